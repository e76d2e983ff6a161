//! Simulation toolkit for depth/width trade-offs in random and Clifford
//! circuits: dense state vectors, brickwork ensembles, Bell-measurement gate
//! teleportation, spacetime conversion, ancilla-assisted classical shadows
//! and numerical checks of design and accessible-dimension properties.

pub mod bits;
pub mod cliffordsim;
pub mod designlab;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod shadow;
pub mod statevector;
pub mod teleport;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
