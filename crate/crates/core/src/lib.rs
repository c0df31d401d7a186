//! Microscopic models of one-qubit decoherence channels.
//!
//! Each model produces a time-dependent channel parameter (Bloch factor,
//! dephasing exponent or amplitude ratio) together with its decay rate.
//! [`analysis`] turns sampled parameters into rates and a Markovianity
//! verdict, and [`oracle`] holds brute-force reference simulations.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod classical;
pub mod damping;
pub mod dephasing;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod quadrature;
pub mod spinbath;

pub use analysis::{
    classify, classify_default, rate_from_series, MarkovClass, RateFlag, RateSeries, SeriesKind, TimeSeries,
};
pub use channel::{
    apply_kraus, bloch_from_state, depolarize_direct, depolarize_pauli, dress_with_phase, kraus_amplitude_damping,
    kraus_depolarizing, kraus_phase_damping, kraus_phase_damping_alt, state_from_bloch, BlochVector, ChannelKind,
    KrausSet, PhaseDressing, PhaseGenerator, QubitState,
};
pub use classical::{IsotropicGaussianNoise, NoiseSample};
pub use damping::{AmplitudeKernelSpec, AmplitudeSolution, KernelMode};
pub use dephasing::{BosonMode, DiscreteBosonBath, SpectralDensity, StationaryProcess, TabulatedDensity};
pub use error::{Error, Result};
pub use montecarlo::MonteCarloEstimate;
pub use spinbath::{CouplingEnsemble, HalfInt, SectorWeightTable};
