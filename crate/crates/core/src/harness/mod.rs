mod config;
mod plot;
mod record;
mod run;

pub use config::{
    Accdim, BoundsTable, DesignCheck, DesignEnsembleKind, Experiment, ExperimentConfig, ExperimentKind, ShadowEnsembleKind,
    ShadowRun, SpacetimeClifford, SpacetimeRandom, TeleportVerify,
};
pub use plot::{emit_plot_data, series_columns, SERIES};
pub use record::{config_digest, read_records, write_records, Check, ResultRecord, Series};
pub use run::run;
