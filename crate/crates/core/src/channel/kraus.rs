use num_complex::Complex64 as C64;

use super::state::{identity, pauli, Mat2, QubitState, I};
use crate::error::{domain, Error, Result};

/// Residual allowed in Σ E†E = I.
pub const COMPLETENESS_TOL: f64 = 1e-12;
/// Upstream numerics may push a probability this far outside its range
/// before it is treated as an error rather than clamped.
pub const CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
    /// Two-operator form of phase damping: {√(1−p/2) I, √(p/2) σ3}.
    PhaseDampingAlt,
}

impl ChannelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ChannelKind::Depolarizing => "D",
            ChannelKind::AmplitudeDamping => "AD",
            ChannelKind::PhaseDamping => "PD",
            ChannelKind::PhaseDampingAlt => "PD-alt",
        }
    }
}

/// Generator of the unitary that dresses a Kraus set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseGenerator {
    /// e^{−iΩσ3/2}, for the phase-damping family.
    HalfSigmaZ,
    /// e^{−iΩ|1⟩⟨1|}, for amplitude damping.
    ExcitedProjector,
}

/// Accumulated phase Ω(t) together with its generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDressing {
    pub omega: f64,
    pub generator: PhaseGenerator,
}

impl PhaseDressing {
    pub fn new(omega: f64, generator: PhaseGenerator) -> Result<Self> {
        if !omega.is_finite() {
            return domain(format!("phase {omega} is not finite"));
        }
        Ok(PhaseDressing { omega, generator })
    }

    pub fn unitary(&self) -> Mat2 {
        let z = C64::new(0.0, 0.0);
        match self.generator {
            PhaseGenerator::HalfSigmaZ => {
                Mat2::new((-I * (self.omega / 2.0)).exp(), z, z, (I * (self.omega / 2.0)).exp())
            }
            PhaseGenerator::ExcitedProjector => Mat2::new(C64::new(1.0, 0.0), z, z, (-I * self.omega).exp()),
        }
    }
}

/// An ordered Kraus decomposition tagged with the channel it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<Mat2>,
    kind: ChannelKind,
    p: f64,
    dressing: Option<PhaseDressing>,
}

impl KrausSet {
    /// Builds a set without checking completeness; [`KrausSet::apply`]
    /// rejects incomplete sets.
    pub fn from_parts(kind: ChannelKind, p: f64, ops: Vec<Mat2>) -> Self {
        KrausSet { ops, kind, p, dressing: None }
    }

    pub fn operators(&self) -> &[Mat2] {
        &self.ops
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dressing(&self) -> Option<PhaseDressing> {
        self.dressing
    }

    /// Largest entry of |Σ E†E − I|.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self.ops.iter().fold(Mat2::zeros(), |acc, e| acc + e.adjoint() * e);
        (sum - identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_complete(&self) -> bool {
        self.completeness_residual() <= COMPLETENESS_TOL
    }

    /// ρ ↦ Σ E ρ E†.
    pub fn apply(&self, rho: &QubitState) -> Result<QubitState> {
        let residual = self.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::Contract(format!("Kraus set is not trace preserving (residual {residual:e})")));
        }
        let out = self.ops.iter().fold(Mat2::zeros(), |acc, e| acc + e * rho.matrix() * e.adjoint());
        // Restore exact hermiticity lost to rounding.
        let out = (out + out.adjoint()) * C64::new(0.5, 0.0);
        QubitState::new(out)
    }

    /// Left-multiplies every operator by the unitary of `dressing`.
    pub fn dress(&self, dressing: PhaseDressing) -> Result<KrausSet> {
        let expected = match self.kind {
            ChannelKind::PhaseDamping | ChannelKind::PhaseDampingAlt => PhaseGenerator::HalfSigmaZ,
            ChannelKind::AmplitudeDamping => PhaseGenerator::ExcitedProjector,
            ChannelKind::Depolarizing => {
                return Err(Error::Contract("depolarizing Kraus sets take no phase dressing".into()))
            }
        };
        if dressing.generator != expected {
            return Err(Error::Contract(format!(
                "{:?} generator does not match a {} channel",
                dressing.generator,
                self.kind.tag()
            )));
        }
        let u = dressing.unitary();
        let omega = self.dressing.map_or(0.0, |d| d.omega) + dressing.omega;
        Ok(KrausSet {
            ops: self.ops.iter().map(|e| u * e).collect(),
            kind: self.kind,
            p: self.p,
            dressing: Some(PhaseDressing { omega, generator: expected }),
        })
    }
}

/// Clamps `p` into `[lo, hi]` when it strays by at most [`CLAMP_SLACK`].
pub(crate) fn checked_probability(p: f64, lo: f64, hi: f64, what: &str) -> Result<f64> {
    if !p.is_finite() || p < lo - CLAMP_SLACK || p > hi + CLAMP_SLACK {
        return domain(format!("{what} = {p} outside [{lo}, {hi}]"));
    }
    Ok(p.clamp(lo, hi))
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn proj(ground: f64, excited: f64) -> Mat2 {
    Mat2::new(real(ground), real(0.0), real(0.0), real(excited))
}

pub fn kraus_depolarizing(p: f64) -> Result<KrausSet> {
    let p = checked_probability(p, 0.0, 1.0, "p")?;
    let [s1, s2, s3] = pauli();
    let a = real(p.sqrt() / 2.0);
    Ok(KrausSet::from_parts(
        ChannelKind::Depolarizing,
        p,
        vec![identity() * real((1.0 - 0.75 * p).sqrt()), s1 * a, s2 * a, s3 * a],
    ))
}

pub fn kraus_amplitude_damping(p: f64) -> Result<KrausSet> {
    let p = checked_probability(p, 0.0, 1.0, "p")?;
    let z = real(0.0);
    Ok(KrausSet::from_parts(
        ChannelKind::AmplitudeDamping,
        p,
        vec![proj(1.0, (1.0 - p).sqrt()), Mat2::new(z, real(p.sqrt()), z, z)],
    ))
}

pub fn kraus_phase_damping(p: f64) -> Result<KrausSet> {
    let p = checked_probability(p, 0.0, 1.0, "p")?;
    Ok(KrausSet::from_parts(
        ChannelKind::PhaseDamping,
        p,
        vec![identity() * real((1.0 - p).sqrt()), proj(p.sqrt(), 0.0), proj(0.0, p.sqrt())],
    ))
}

pub fn kraus_phase_damping_alt(p: f64) -> Result<KrausSet> {
    let p = checked_probability(p, 0.0, 1.0, "p")?;
    Ok(KrausSet::from_parts(
        ChannelKind::PhaseDampingAlt,
        p,
        vec![identity() * real((1.0 - p / 2.0).sqrt()), pauli()[2] * real((p / 2.0).sqrt())],
    ))
}

pub fn apply_kraus(k: &KrausSet, rho: &QubitState) -> Result<QubitState> {
    k.apply(rho)
}

pub fn dress_with_phase(k: &KrausSet, dressing: PhaseDressing) -> Result<KrausSet> {
    k.dress(dressing)
}

/// ρ ↦ p I/2 + (1 − p) ρ.
pub fn depolarize_direct(rho: &QubitState, p: f64) -> Result<QubitState> {
    let p = checked_probability(p, 0.0, 1.0, "p")?;
    let out = identity() * real(p / 2.0) + rho.matrix() * real(1.0 - p);
    Ok(QubitState::unchecked(out))
}

/// ρ ↦ (p̃/3) Σ σᵢρσᵢ + (1 − p̃) ρ, with 0 ≤ p̃ ≤ 3/4.
pub fn depolarize_pauli(rho: &QubitState, p_err: f64) -> Result<QubitState> {
    let p_err = checked_probability(p_err, 0.0, 0.75, "p̃")?;
    let twirl = pauli().iter().fold(Mat2::zeros(), |acc, s| acc + s * rho.matrix() * s);
    let out = twirl * real(p_err / 3.0) + rho.matrix() * real(1.0 - p_err);
    Ok(QubitState::unchecked(out))
}
