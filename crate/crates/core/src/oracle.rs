//! Brute-force reference simulations.
//!
//! Each routine builds the joint system–environment Hamiltonian explicitly,
//! evolves it exactly (Hermitian eigendecomposition or a closed-form 2×2
//! exponential) and traces out the environment. Nothing here reuses the
//! closed-form channel parameters of the model modules; only the state
//! types are shared.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::channel::{pauli, Mat2, QubitState};
use crate::damping::AmplitudeKernelSpec;
use crate::error::{domain, Error, Result};
use crate::spinbath::HalfInt;

/// Largest environmental spin the spin-bath oracle accepts.
pub const MAX_ORACLE_SPIN: f64 = 25.0;
/// Largest mode count for the single-excitation oracle.
pub const MAX_SINGLE_EXCITATION_MODES: usize = 10_000;
/// Thermal weight allowed beyond the Fock cutoff.
pub const THERMAL_TAIL_TOL: f64 = 1e-12;

type CMatrix = DMatrix<C64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// e^{−iHt} for a fixed Hermitian H, via its eigendecomposition.
#[derive(Debug, Clone)]
pub struct HermitianPropagator {
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl HermitianPropagator {
    pub fn new(h: CMatrix) -> Self {
        let eig = SymmetricEigen::new(h);
        HermitianPropagator { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        let phases = CMatrix::from_diagonal(&DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|e| C64::from_polar(1.0, -e * t)),
        ));
        &self.vectors * phases * self.vectors.adjoint()
    }

    pub fn apply(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let coeffs = self.vectors.adjoint() * psi;
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&self.energies).map(|(a, e)| a * C64::from_polar(1.0, -e * t)),
        );
        &self.vectors * phased
    }
}

/// Spin-l operators in the basis m = l, l − 1, …, −l.
#[derive(Debug, Clone)]
pub struct AngularMomentumOps {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub s2: CMatrix,
}

impl AngularMomentumOps {
    pub fn new(l: HalfInt) -> Self {
        let d = l.multiplicity() as usize;
        let lv = l.value();
        let m = |i: usize| lv - i as f64;
        let mut raise = CMatrix::zeros(d, d);
        for i in 1..d {
            raise[(i - 1, i)] = c((lv * (lv + 1.0) - m(i) * (m(i) + 1.0)).sqrt());
        }
        let lower = raise.adjoint();
        let sx = (&raise + &lower) * c(0.5);
        let sy = (&raise - &lower) * C64::new(0.0, -0.5);
        let sz = CMatrix::from_diagonal(&DVector::from_iterator(d, (0..d).map(|i| c(m(i)))));
        let s2 = &sx * &sx + &sy * &sy + &sz * &sz;
        AngularMomentumOps { sx, sy, sz, s2 }
    }
}

fn partial_trace_env(rho: &CMatrix, env_dim: usize) -> Mat2 {
    let mut out = Mat2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            out[(a, b)] = (0..env_dim).map(|k| rho[(a * env_dim + k, b * env_dim + k)]).sum();
        }
    }
    out
}

fn to_dense(m: &Mat2) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

fn hermitize(m: Mat2) -> Mat2 {
    (m + m.adjoint()) * c(0.5)
}

/// Qubit ⊗ spin-l system with H = g s·S, the bath starting maximally mixed.
#[derive(Debug, Clone)]
pub struct SpinBathOracle {
    env_dim: usize,
    propagator: HermitianPropagator,
}

impl SpinBathOracle {
    pub fn new(l: HalfInt, g: f64) -> Result<Self> {
        if l.value() > MAX_ORACLE_SPIN {
            return Err(Error::Resource(format!("spin {l} exceeds the oracle cap {MAX_ORACLE_SPIN}")));
        }
        if l.twice() == 0 {
            return domain("environmental spin must be at least 1/2");
        }
        let s = AngularMomentumOps::new(HalfInt::HALF);
        let big = AngularMomentumOps::new(l);
        let h = (s.sx.kronecker(&big.sx) + s.sy.kronecker(&big.sy) + s.sz.kronecker(&big.sz)) * c(g);
        Ok(SpinBathOracle { env_dim: l.multiplicity() as usize, propagator: HermitianPropagator::new(h) })
    }

    /// Joint energies in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut e = self.propagator.energies().to_vec();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        self.propagator.unitary(t)
    }

    pub fn evolve(&self, rho0: &QubitState, t: f64) -> Result<QubitState> {
        let d = self.env_dim;
        let env = CMatrix::identity(d, d) * c(1.0 / d as f64);
        let joint = to_dense(rho0.matrix()).kronecker(&env);
        let u = self.propagator.unitary(t);
        let evolved = &u * joint * u.adjoint();
        QubitState::new(hermitize(partial_trace_env(&evolved, d)))
    }
}

/// Reduced qubit state after time `t` of H = g s·S with a maximally mixed
/// spin-l bath.
pub fn exact_spin_bath(l: HalfInt, g: f64, rho0: &QubitState, t: f64) -> Result<QubitState> {
    SpinBathOracle::new(l, g)?.evolve(rho0, t)
}

/// Qubit and modes restricted to at most one excitation, with the qubit
/// excitation at energy ω and hopping c_l to mode l.
#[derive(Debug, Clone)]
pub struct SingleExcitationOracle {
    propagator: HermitianPropagator,
}

impl SingleExcitationOracle {
    pub fn new(spec: &AmplitudeKernelSpec) -> Result<Self> {
        let n = spec.modes().len();
        if n > MAX_SINGLE_EXCITATION_MODES {
            return Err(Error::Resource(format!("{n} modes exceed the oracle cap")));
        }
        let mut h = CMatrix::zeros(n + 1, n + 1);
        h[(0, 0)] = c(spec.qubit_frequency());
        for (l, m) in spec.modes().iter().enumerate() {
            h[(l + 1, l + 1)] = c(m.frequency);
            h[(l + 1, 0)] = c(m.coupling);
            h[(0, l + 1)] = c(m.coupling);
        }
        Ok(SingleExcitationOracle { propagator: HermitianPropagator::new(h) })
    }

    /// (α, δ_1, …, δ_N) at time `t`, starting from the excited qubit.
    pub fn amplitudes(&self, t: f64) -> DVector<C64> {
        let n = self.propagator.energies().len();
        let mut psi = DVector::zeros(n);
        psi[0] = c(1.0);
        self.propagator.apply(&psi, t)
    }
}

/// α(t)/α(0) on `times` from the exact single-excitation evolution.
pub fn exact_single_excitation(spec: &AmplitudeKernelSpec, times: &[f64]) -> Result<Vec<C64>> {
    let oracle = SingleExcitationOracle::new(spec)?;
    times
        .iter()
        .map(|&t| {
            let psi = oracle.amplitudes(t);
            let norm = psi.norm();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Accuracy(format!("norm drifted to {norm} at t = {t}")));
            }
            Ok(psi[0])
        })
        .collect()
}

/// Fock cutoff whose thermal tail e^{−βω(n+1)} is below [`THERMAL_TAIL_TOL`].
pub fn thermal_cutoff(omega: f64, beta: f64) -> usize {
    if beta.is_infinite() {
        return 0;
    }
    (-(THERMAL_TAIL_TOL.ln()) / (beta * omega)).ceil() as usize + 2
}

/// Qubit coupled through σ3 to one mode with
/// H = ω (a + κσ3)†(a + κσ3), κ = c/(4ω), and the mode thermal at β.
///
/// With this normalization of `c` the coherence is suppressed by
/// exp(−¼ c² (1 − cos ωt) coth(ωβ/2)/ω²).
pub fn exact_dephasing_single_mode(
    coupling: f64,
    omega: f64,
    beta: f64,
    n_max: usize,
    rho0: &QubitState,
    t: f64,
) -> Result<QubitState> {
    if !(omega > 0.0) {
        return domain("mode frequency must be positive");
    }
    if !(beta > 0.0) {
        return domain("inverse temperature must be positive");
    }
    let q = if beta.is_infinite() { 0.0 } else { (-beta * omega).exp() };
    let tail = q.powi(n_max as i32 + 1);
    if tail >= THERMAL_TAIL_TOL {
        return Err(Error::Precondition(format!("thermal weight {tail:e} beyond n = {n_max} is not negligible")));
    }
    let kappa = coupling / (4.0 * omega);
    let dim = ((n_max as f64).sqrt() + 2.0 * kappa.abs() + 8.0).powi(2).ceil() as usize + n_max + 10;
    let branch = |sign: f64| {
        let mut h = CMatrix::zeros(dim, dim);
        for n in 0..dim {
            h[(n, n)] = c(omega * (n as f64 + kappa * kappa));
            if n + 1 < dim {
                let off = c(sign * omega * kappa * ((n + 1) as f64).sqrt());
                h[(n, n + 1)] = off;
                h[(n + 1, n)] = off;
            }
        }
        HermitianPropagator::new(h)
    };
    let (plus, minus) = (branch(1.0), branch(-1.0));
    let mut overlap = C64::new(0.0, 0.0);
    let norm: f64 = (0..=n_max).map(|n| q.powi(n as i32)).sum();
    for n in 0..=n_max {
        let weight = q.powi(n as i32) / norm;
        if weight == 0.0 {
            continue;
        }
        let mut fock = DVector::zeros(dim);
        fock[n] = c(1.0);
        let up = plus.apply(&fock, t);
        let down = minus.apply(&fock, t);
        // Weight leaking to the top of the truncated space signals a too-small basis.
        if up[dim - 1].norm() > 1e-12 || down[dim - 1].norm() > 1e-12 {
            return Err(Error::Precondition("Fock truncation too small for this coupling".into()));
        }
        overlap += down.dotc(&up) * weight;
    }
    let r = rho0.matrix();
    let c01 = r[(0, 1)] * overlap;
    QubitState::new(Mat2::new(r[(0, 0)], c01, c01.conj(), r[(1, 1)]))
}

/// ρ ↦ U ρ U† with U = exp(−igt ξ·σ), evaluated as cos θ I − i sin θ ξ̂·σ.
pub fn unitary_noise_conjugation(xi: [f64; 3], g: f64, t: f64, rho0: &QubitState) -> Result<QubitState> {
    let norm = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    let u = if norm == 0.0 {
        Mat2::identity()
    } else {
        let theta = g * t * norm;
        let [s1, s2, s3] = pauli();
        let axis = (s1 * c(xi[0]) + s2 * c(xi[1]) + s3 * c(xi[2])) * c(1.0 / norm);
        Mat2::identity() * c(theta.cos()) - axis * C64::new(0.0, theta.sin())
    };
    QubitState::new(hermitize(u * rho0.matrix() * u.adjoint()))
}
