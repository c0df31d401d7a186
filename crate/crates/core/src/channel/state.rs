use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense 2×2 complex matrix used for states and Kraus operators.
pub type Mat2 = Matrix2<C64>;

/// Tolerance on the Bloch norm, trace and hermiticity of a state.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub fn identity() -> Mat2 {
    Mat2::identity()
}

/// The Pauli matrices σ1, σ2, σ3 with σ3 = |0⟩⟨0| − |1⟩⟨1|.
pub fn pauli() -> [Mat2; 3] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    [Mat2::new(o, l, l, o), Mat2::new(o, -I, I, o), Mat2::new(l, o, o, -l)]
}

/// Real 3-vector parametrizing a qubit state as ρ = (I + s·σ)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    s: [f64; 3],
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector { s: [0.0; 3] };

    /// Checked constructor: the norm may exceed one by at most [`STATE_TOL`].
    pub fn new(s1: f64, s2: f64, s3: f64) -> Result<Self> {
        let v = BlochVector { s: [s1, s2, s3] };
        if !v.s.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidState("non-finite Bloch component".into()));
        }
        if v.norm() > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!("Bloch vector norm {} exceeds one", v.norm())));
        }
        Ok(v)
    }

    pub fn from_array(s: [f64; 3]) -> Result<Self> {
        Self::new(s[0], s[1], s[2])
    }

    pub(crate) fn raw(s: [f64; 3]) -> Self {
        BlochVector { s }
    }

    pub fn x(&self) -> f64 {
        self.s[0]
    }

    pub fn y(&self) -> f64 {
        self.s[1]
    }

    pub fn z(&self) -> f64 {
        self.s[2]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.s.iter().zip(other.s.iter()).map(|(a, b)| a * b).sum()
    }

    /// Multiplies every component by `factor`; `|factor| ≤ 1` keeps it valid.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.s[0] * factor, self.s[1] * factor, self.s[2] * factor)
    }

    pub fn is_pure(&self) -> bool {
        (self.norm() - 1.0).abs() <= STATE_TOL
    }
}

/// A valid one-qubit density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Mat2,
}

impl QubitState {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(rho: Mat2) -> Result<Self> {
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite matrix entry".into()));
        }
        let herm = (rho - rho.adjoint()).norm();
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from one")));
        }
        let state = QubitState { rho };
        let min = state.eigenvalues()[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(state)
    }

    pub(crate) fn unchecked(rho: Mat2) -> Self {
        QubitState { rho }
    }

    pub fn from_bloch(s: &BlochVector) -> Self {
        let [s1, s2, s3] = s.s;
        QubitState {
            rho: Mat2::new(
                C64::new((1.0 + s3) / 2.0, 0.0),
                C64::new(s1 / 2.0, -s2 / 2.0),
                C64::new(s1 / 2.0, s2 / 2.0),
                C64::new((1.0 - s3) / 2.0, 0.0),
            ),
        }
    }

    pub fn bloch(&self) -> BlochVector {
        let r01 = self.rho[(0, 1)];
        BlochVector::raw([2.0 * r01.re, -2.0 * r01.im, self.rho[(0, 0)].re - self.rho[(1, 1)].re])
    }

    /// |0⟩⟨0|, the ground state (Bloch vector +ẑ).
    pub fn ground() -> Self {
        Self::from_bloch(&BlochVector::raw([0.0, 0.0, 1.0]))
    }

    /// |1⟩⟨1|, the excited state (Bloch vector −ẑ).
    pub fn excited() -> Self {
        Self::from_bloch(&BlochVector::raw([0.0, 0.0, -1.0]))
    }

    pub fn maximally_mixed() -> Self {
        Self::from_bloch(&BlochVector::ORIGIN)
    }

    /// The pure state `a|1⟩ + b|0⟩` after normalization.
    pub fn pure(ground_amp: C64, excited_amp: C64) -> Result<Self> {
        let n = (ground_amp.norm_sqr() + excited_amp.norm_sqr()).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let (b, a) = (ground_amp / n, excited_amp / n);
        Ok(QubitState { rho: Mat2::new(b * b.conj(), b * a.conj(), a * b.conj(), a * a.conj()) })
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Eigenvalues in ascending order, from the closed-form 2×2 formula.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.rho[(0, 0)].re;
        let d = self.rho[(1, 1)].re;
        let b = self.rho[(0, 1)];
        let mean = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Largest absolute entry of the difference with another state.
    pub fn max_abs_diff(&self, other: &QubitState) -> f64 {
        (self.rho - other.rho).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ⟨1|ρ|1⟩.
    pub fn excited_population(&self) -> f64 {
        self.rho[(1, 1)].re
    }

    /// ⟨1|ρ|0⟩.
    pub fn coherence(&self) -> C64 {
        self.rho[(1, 0)]
    }
}

pub fn state_from_bloch(s: &BlochVector) -> QubitState {
    QubitState::from_bloch(s)
}

pub fn bloch_from_state(rho: &QubitState) -> BlochVector {
    rho.bloch()
}
