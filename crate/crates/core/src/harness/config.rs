use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::shadow::SamplingMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    TeleportVerify,
    SpacetimeRandom,
    SpacetimeClifford,
    ShadowRun,
    DesignCheck,
    Accdim,
    BoundsTable,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::TeleportVerify,
        ExperimentKind::SpacetimeRandom,
        ExperimentKind::SpacetimeClifford,
        ExperimentKind::ShadowRun,
        ExperimentKind::DesignCheck,
        ExperimentKind::Accdim,
        ExperimentKind::BoundsTable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::TeleportVerify => "teleport-verify",
            ExperimentKind::SpacetimeRandom => "spacetime-random",
            ExperimentKind::SpacetimeClifford => "spacetime-clifford",
            ExperimentKind::ShadowRun => "shadow-run",
            ExperimentKind::DesignCheck => "design-check",
            ExperimentKind::Accdim => "accdim",
            ExperimentKind::BoundsTable => "bounds-table",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeleportVerify {
    pub n: usize,
    pub trials: usize,
    /// Extra input qubits the gate does not act on.
    pub spectators: usize,
}

impl Default for TeleportVerify {
    fn default() -> Self {
        Self { n: 2, trials: 100, spectators: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpacetimeRandom {
    pub n: usize,
    pub t: usize,
    pub ks: Vec<usize>,
    pub runs: usize,
}

impl Default for SpacetimeRandom {
    fn default() -> Self {
        Self { n: 2, t: 6, ks: vec![2, 3, 4], runs: 400 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpacetimeClifford {
    pub n: usize,
    pub t: usize,
    pub ks: Vec<usize>,
    pub trials: usize,
}

impl Default for SpacetimeClifford {
    fn default() -> Self {
        Self { n: 4, t: 12, ks: vec![2, 3], trials: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShadowEnsembleKind {
    Clifford,
    Haar,
    Local,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowRun {
    pub n: usize,
    pub ensemble: ShadowEnsembleKind,
    pub mode: SamplingMode,
    pub epsilon: f64,
    pub delta: f64,
    /// Pauli labels such as `ZI` or `-XY`.
    pub observables: Vec<String>,
    /// Sample counts at which the convergence series is recorded.
    pub checkpoints: Vec<usize>,
}

impl Default for ShadowRun {
    fn default() -> Self {
        Self {
            n: 2,
            ensemble: ShadowEnsembleKind::Clifford,
            mode: SamplingMode::Formula,
            epsilon: 0.1,
            delta: 0.01,
            observables: vec!["ZI".into(), "XX".into(), "YZ".into()],
            checkpoints: vec![100, 300, 1000, 3000, 10000],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignEnsembleKind {
    /// Sampled Haar states; frame potentials are estimated.
    Haar,
    /// All stabilizer states, exactly.
    Stabilizer,
    /// Computational basis states, exactly.
    Computational,
    /// Projected ensemble of one random `(m, d)` brickwork state.
    Projected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignCheck {
    pub n: usize,
    pub t_max: usize,
    pub ensemble: DesignEnsembleKind,
    /// Sample count for the Haar ensemble.
    pub samples: usize,
    /// Brickwork size and depth for the projected ensemble.
    pub m: usize,
    pub d: usize,
}

impl Default for DesignCheck {
    fn default() -> Self {
        Self { n: 1, t_max: 4, ensemble: DesignEnsembleKind::Stabilizer, samples: 4000, m: 6, d: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Accdim {
    pub m: usize,
    pub n: usize,
    pub ds: Vec<usize>,
    pub points: usize,
}

impl Default for Accdim {
    fn default() -> Self {
        Self { m: 4, n: 2, ds: vec![0, 1, 2, 3, 4], points: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsTable {
    /// `(m, n, d)` triples.
    pub grid: Vec<[usize; 3]>,
}

impl Default for BoundsTable {
    fn default() -> Self {
        let grid = [4usize, 8]
            .iter()
            .flat_map(|&m| [4usize, 8].into_iter().filter(move |&n| n <= m).map(move |n| (m, n)))
            .flat_map(|(m, n)| [0usize, 40, 160, 640].map(|d| [m, n, d]))
            .collect();
        Self { grid }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    TeleportVerify(TeleportVerify),
    SpacetimeRandom(SpacetimeRandom),
    SpacetimeClifford(SpacetimeClifford),
    ShadowRun(ShadowRun),
    DesignCheck(DesignCheck),
    Accdim(Accdim),
    BoundsTable(BoundsTable),
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::TeleportVerify(_) => ExperimentKind::TeleportVerify,
            Experiment::SpacetimeRandom(_) => ExperimentKind::SpacetimeRandom,
            Experiment::SpacetimeClifford(_) => ExperimentKind::SpacetimeClifford,
            Experiment::ShadowRun(_) => ExperimentKind::ShadowRun,
            Experiment::DesignCheck(_) => ExperimentKind::DesignCheck,
            Experiment::Accdim(_) => ExperimentKind::Accdim,
            Experiment::BoundsTable(_) => ExperimentKind::BoundsTable,
        }
    }

    /// Default parameters for `kind`.
    pub fn default_for(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::TeleportVerify => Experiment::TeleportVerify(Default::default()),
            ExperimentKind::SpacetimeRandom => Experiment::SpacetimeRandom(Default::default()),
            ExperimentKind::SpacetimeClifford => Experiment::SpacetimeClifford(Default::default()),
            ExperimentKind::ShadowRun => Experiment::ShadowRun(Default::default()),
            ExperimentKind::DesignCheck => Experiment::DesignCheck(Default::default()),
            ExperimentKind::Accdim => Experiment::Accdim(Default::default()),
            ExperimentKind::BoundsTable => Experiment::BoundsTable(Default::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(with = "seed_format")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(flatten)]
    pub experiment: Experiment,
}

fn default_workers() -> usize {
    1
}

/// TOML integers are signed, so seeds above `i64::MAX` are written as
/// decimal strings.
mod seed_format {
    use super::*;

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = u64;
            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a non-negative 64-bit integer or its decimal string")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<u64, E> {
                Ok(v)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<u64, E> {
                u64::try_from(v).map_err(|_| E::custom("seed must be non-negative"))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<u64, E> {
                v.parse().map_err(|_| E::custom(format!("`{v}` is not a 64-bit seed")))
            }
        }
        d.deserialize_any(V)
    }
}

fn require(ok: bool, field: &str, message: impl Into<String>) -> Result<()> {
    if ok { Ok(()) } else { Err(Error::config(field, message)) }
}

const MAX_DENSE: usize = 16;

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        Self { seed, workers: 1, experiment }
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Checks every parameter against the preconditions of the operation it
    /// feeds, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        require(self.workers >= 1, "workers", "must be at least 1")?;
        match &self.experiment {
            Experiment::TeleportVerify(c) => {
                require(c.n >= 1, "n", "must be at least 1")?;
                require(3 * c.n + c.spectators <= MAX_DENSE, "n", format!("3n + spectators must not exceed {MAX_DENSE}"))?;
                require(c.trials >= 1, "trials", "must be at least 1")
            }
            Experiment::SpacetimeRandom(c) => {
                require(c.n >= 2, "n", "brickwork circuits need n >= 2")?;
                require(!c.ks.is_empty(), "ks", "must list at least one k")?;
                for &k in &c.ks {
                    require(k >= 2, "ks", format!("k = {k} is below 2"))?;
                    require(k * c.n <= MAX_DENSE, "ks", format!("k = {k} needs {} qubits", k * c.n))?;
                }
                require(c.t >= 1, "t", "must be at least 1")?;
                require(c.runs >= 2, "runs", "must be at least 2")
            }
            Experiment::SpacetimeClifford(c) => {
                require(c.n >= 1, "n", "must be at least 1")?;
                require(!c.ks.is_empty(), "ks", "must list at least one k")?;
                for &k in &c.ks {
                    require(k >= 2, "ks", format!("k = {k} is below 2"))?;
                    require(k * c.n + c.n <= MAX_DENSE, "ks", format!("k = {k} needs too many qubits"))?;
                }
                require(c.t >= 1, "t", "must be at least 1")?;
                require(c.trials >= 1, "trials", "must be at least 1")
            }
            Experiment::ShadowRun(c) => {
                require((1..=6).contains(&c.n), "n", "must lie in 1..=6")?;
                require(c.epsilon > 0.0, "epsilon", "must be positive")?;
                require(c.delta > 0.0 && c.delta < 1.0, "delta", "must lie in (0, 1)")?;
                require(!c.observables.is_empty(), "observables", "must list at least one Pauli label")?;
                for label in &c.observables {
                    let p = crate::cliffordsim::PauliString::parse(label)
                        .map_err(|e| Error::config("observables", format!("`{label}`: {e}")))?;
                    require(p.num_qubits() == c.n, "observables", format!("`{label}` is not an {}-qubit label", c.n))?;
                    require(p.is_hermitian(), "observables", format!("`{label}` is not Hermitian"))?;
                }
                require(c.checkpoints.iter().all(|&x| x >= 1), "checkpoints", "must be positive")
            }
            Experiment::DesignCheck(c) => {
                require(c.n >= 1, "n", "must be at least 1")?;
                require(c.t_max >= 1, "t_max", "must be at least 1")?;
                match c.ensemble {
                    DesignEnsembleKind::Stabilizer => require(
                        c.n <= crate::cliffordsim::MAX_ENUMERATED_QUBITS,
                        "n",
                        "stabilizer states are enumerated up to 4 qubits",
                    )?,
                    DesignEnsembleKind::Haar => require(c.samples >= 2, "samples", "must be at least 2")?,
                    DesignEnsembleKind::Projected => {
                        require(c.m > c.n && c.m <= MAX_DENSE, "m", format!("need n < m <= {MAX_DENSE}"))?;
                        require(c.m >= 2, "m", "brickwork circuits need m >= 2")?
                    }
                    DesignEnsembleKind::Computational => {}
                }
                require(c.n <= 12, "n", "at most 12 qubits")
            }
            Experiment::Accdim(c) => {
                require(c.m >= 2 && c.m <= MAX_DENSE, "m", format!("must lie in 2..={MAX_DENSE}"))?;
                require(c.n >= 1 && c.n <= c.m, "n", "must lie in 1..=m")?;
                require(!c.ds.is_empty(), "ds", "must list at least one depth")?;
                require(c.points >= 1, "points", "must be at least 1")
            }
            Experiment::BoundsTable(c) => {
                require(!c.grid.is_empty(), "grid", "must list at least one (m, n, d)")?;
                require(c.grid.iter().all(|g| g[1] >= 1), "grid", "n must be at least 1")
            }
        }
    }
}
