mod bounds;
mod gmap;
mod moments;
mod projected;

pub use bounds::{complexity_bound, swap_ladder_layers, ComplexityBound};
pub use gmap::{
    accessible_dimension, evaluate_G, gate_from_coords, gate_layout, numeric_rank, rank_at, singular_values,
    AccessibleDimension, GPoint, PointRank, GENERATORS,
};
pub use moments::{
    ensemble_frame_potential, frame_potential, frame_potential_estimate, haar_frame_potential, moment_distance,
    moment_operator, FrameEstimate, MAX_MOMENT_DIM,
};
pub use projected::{projected_ensemble, ProjectedEnsemble, ProjectedEntry};
