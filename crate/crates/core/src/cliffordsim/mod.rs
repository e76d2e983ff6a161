//! Pauli algebra, Clifford circuits and tableaux, uniform Clifford sampling
//! and the Clifford teleportation protocols.

mod circuit;
mod pauli;
mod protocol;
mod random;
mod stabilizer_states;
mod tableau;

pub use circuit::{random_layered_clifford, CliffordCircuit, CliffordGate};
pub use pauli::PauliString;
pub use protocol::{
    clifford_choi, clifford_spacetime, clifford_teleport, CliffordSpacetimeRun, CliffordTeleport, MergeOrder,
};
pub use random::{random_clifford, random_clifford_tableau};
pub use stabilizer_states::{stabilizer_states, MAX_ENUMERATED_QUBITS};
pub use tableau::CliffordTableau;

/// `C P C†`.
pub fn conjugate_pauli(circuit: &CliffordCircuit, p: &PauliString) -> crate::error::Result<PauliString> {
    circuit.conjugate_pauli(p)
}
