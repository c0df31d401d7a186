//! Qubit states, the canonical one-qubit channels and their Kraus sets.
//!
//! Basis convention: σ3 = |0⟩⟨0| − |1⟩⟨1|, so the Bloch vector +ẑ is the
//! ground state |0⟩ and amplitude damping drives |1⟩ → |0⟩.

mod kraus;
mod state;

pub use kraus::{
    apply_kraus, depolarize_direct, depolarize_pauli, dress_with_phase, kraus_amplitude_damping, kraus_depolarizing,
    kraus_phase_damping, kraus_phase_damping_alt, ChannelKind, KrausSet, PhaseDressing, PhaseGenerator, CLAMP_SLACK,
    COMPLETENESS_TOL,
};
pub use state::{
    bloch_from_state, identity, pauli, state_from_bloch, BlochVector, Mat2, QubitState, POSITIVITY_TOL, STATE_TOL,
};
