//! Amplitude damping of a qubit exchanging one excitation with a set of
//! bosonic modes.
//!
//! The excited amplitude obeys
//!
//! ```text
//! dα/dt + iωα + ∫₀ᵗ K(t − τ) α(τ) dτ = 0,   K(s) = Σ_l |c_l|² e^{−iω_l s},
//! ```
//!
//! and is written as α(t) = α(0) e^{−Γ(t)/2 − iΩ(t)}. The reduced dynamics
//! is the amplitude damping channel with p = 1 − e^{−Γ}, dressed by
//! e^{−iΩ|1⟩⟨1|}.
//!
//! The march works on the slowly varying amplitude a(t) = e^{iωt} α(t),
//! whose kernel is K(s) e^{iωs}, with the trapezoidal rule applied both to
//! the time derivative and to the memory integral (implicit in the newest
//! point). The kernel is tabulated once per lag, so a run costs
//! O(steps · modes + steps²).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::channel::{Mat2, QubitState};
use crate::error::{domain, Error, Result};

/// |α|/|α(0)| below which Γ is capped.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMode {
    pub coupling: f64,
    pub frequency: f64,
}

/// Qubit frequency and the modes that build the memory kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeKernelSpec {
    qubit_frequency: f64,
    modes: Vec<KernelMode>,
}

impl AmplitudeKernelSpec {
    pub fn new(qubit_frequency: f64, modes: Vec<KernelMode>) -> Result<Self> {
        if !qubit_frequency.is_finite() {
            return domain("qubit frequency must be finite");
        }
        if modes.is_empty() {
            return domain("kernel needs at least one mode");
        }
        if modes.iter().any(|m| !m.coupling.is_finite() || !m.frequency.is_finite()) {
            return domain("mode couplings and frequencies must be finite");
        }
        Ok(AmplitudeKernelSpec { qubit_frequency, modes })
    }

    /// One mode at the qubit frequency with coupling `g`.
    pub fn resonant(qubit_frequency: f64, g: f64) -> Result<Self> {
        Self::new(qubit_frequency, vec![KernelMode { coupling: g, frequency: qubit_frequency }])
    }

    pub fn qubit_frequency(&self) -> f64 {
        self.qubit_frequency
    }

    pub fn modes(&self) -> &[KernelMode] {
        &self.modes
    }

    /// K(s) = Σ |c_l|² e^{−iω_l s}.
    pub fn kernel(&self, s: f64) -> C64 {
        self.modes.iter().map(|m| C64::from_polar(m.coupling * m.coupling, -m.frequency * s)).sum()
    }

    /// Kernel seen by the co-rotating amplitude, K(s) e^{iωs}.
    fn rotating_kernel(&self, s: f64) -> C64 {
        self.modes
            .iter()
            .map(|m| C64::from_polar(m.coupling * m.coupling, -(m.frequency - self.qubit_frequency) * s))
            .sum()
    }
}

/// Solution of the amplitude equation on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSolution {
    step: f64,
    /// α(t)/α(0).
    ratio: Vec<C64>,
    /// Γ(t) = −2 ln|α/α(0)|, capped at −2 ln(floor).
    gamma: Vec<f64>,
    /// Ω(t) = −arg(α/α(0)), unwrapped.
    omega: Vec<f64>,
    capped: Vec<bool>,
}

impl AmplitudeSolution {
    fn from_ratio(step: f64, qubit_frequency: f64, slow: Vec<C64>) -> Self {
        let cap = -2.0 * AMPLITUDE_FLOOR.ln();
        let mut gamma = Vec::with_capacity(slow.len());
        let mut capped = Vec::with_capacity(slow.len());
        let mut omega = Vec::with_capacity(slow.len());
        let mut prev_arg = 0.0;
        let mut unwrapped = 0.0;
        for (i, a) in slow.iter().enumerate() {
            let mag = a.norm();
            if mag < AMPLITUDE_FLOOR {
                gamma.push(cap);
                capped.push(true);
            } else {
                gamma.push(-2.0 * mag.ln());
                capped.push(false);
            }
            // Nearest-branch continuation of arg(a).
            let arg = a.arg();
            if i > 0 {
                let mut d = arg - prev_arg;
                d -= 2.0 * PI * (d / (2.0 * PI)).round();
                unwrapped += d;
            } else {
                unwrapped = arg;
            }
            prev_arg = arg;
            omega.push(qubit_frequency * step * i as f64 - unwrapped);
        }
        let ratio = slow
            .iter()
            .enumerate()
            .map(|(i, a)| a * C64::from_polar(1.0, -qubit_frequency * step * i as f64))
            .collect();
        AmplitudeSolution { step, ratio, gamma, omega, capped }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.ratio.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratio.is_empty()
    }

    pub fn time(&self, index: usize) -> f64 {
        self.step * index as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn ratio(&self) -> &[C64] {
        &self.ratio
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Samples whose amplitude fell below [`AMPLITUDE_FLOOR`].
    pub fn capped(&self) -> &[bool] {
        &self.capped
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::Range { index, len: self.len() });
        }
        Ok(())
    }

    /// p(t) = 1 − e^{−Γ(t)}.
    pub fn probability(&self, index: usize) -> Result<f64> {
        self.check_index(index)?;
        Ok(-(-self.gamma[index]).exp_m1())
    }
}

/// Marches the amplitude equation to `t_max` in `steps` uniform steps.
pub fn solve_amplitude(spec: &AmplitudeKernelSpec, t_max: f64, steps: usize) -> Result<AmplitudeSolution> {
    if steps < 8 {
        return domain(format!("at least 8 steps are required, got {steps}"));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return domain(format!("t_max = {t_max} must be positive"));
    }
    let h = t_max / steps as f64;
    let kernel: Vec<C64> = (0..=steps).map(|m| spec.rotating_kernel(h * m as f64)).collect();
    let mut a = Vec::with_capacity(steps + 1);
    a.push(C64::new(1.0, 0.0));
    // I_n = h Σ'' K(t_n − t_j) a_j, the trapezoidal memory integral.
    let mut memory = C64::new(0.0, 0.0);
    let denom = C64::new(1.0, 0.0) + kernel[0] * (h * h / 4.0);
    for n in 0..steps {
        // Part of I_{n+1} that does not involve a_{n+1}.
        let mut known = kernel[n + 1] * a[0] * 0.5;
        for j in 1..=n {
            known += kernel[n + 1 - j] * a[j];
        }
        known *= h;
        let next = (a[n] - (memory + known) * (h / 2.0)) / denom;
        memory = known + kernel[0] * next * (h / 2.0);
        a.push(next);
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Accuracy("amplitude march produced non-finite values".into()));
    }
    Ok(AmplitudeSolution::from_ratio(h, spec.qubit_frequency, a))
}

/// Empirical order from three successive halvings of the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// max |α_h − α_{h/2}| on the common grid.
    pub coarse_difference: f64,
    /// max |α_{h/2} − α_{h/4}| on the common grid.
    pub fine_difference: f64,
    pub order: f64,
}

/// Solves with `steps`, `2·steps` and `4·steps` and estimates the order of
/// convergence. Fails when refinement reduces the difference by less than
/// a factor 2.
pub fn check_convergence(spec: &AmplitudeKernelSpec, t_max: f64, steps: usize) -> Result<ConvergenceReport> {
    let s1 = solve_amplitude(spec, t_max, steps)?;
    let s2 = solve_amplitude(spec, t_max, 2 * steps)?;
    let s4 = solve_amplitude(spec, t_max, 4 * steps)?;
    // Differences are compared on the coarsest grid.
    let coarse = (0..s1.len()).map(|i| (s1.ratio[i] - s2.ratio[2 * i]).norm()).fold(0.0, f64::max);
    let fine = (0..s1.len()).map(|i| (s2.ratio[2 * i] - s4.ratio[4 * i]).norm()).fold(0.0, f64::max);
    let ratio = coarse / fine;
    let report = ConvergenceReport { coarse_difference: coarse, fine_difference: fine, order: ratio.log2() };
    if coarse > 1e-13 && !(ratio >= 2.0) {
        return Err(Error::Accuracy(format!(
            "refinement reduced the difference only by {ratio:.3} (from {coarse:e} to {fine:e})"
        )));
    }
    Ok(report)
}

/// ρ(t) built directly: |1⟩ population × e^{−Γ}, ⟨1|ρ|0⟩ × e^{−Γ/2} e^{−iΩ}.
pub fn ad_channel_at(sol: &AmplitudeSolution, index: usize, rho0: &QubitState) -> Result<QubitState> {
    sol.check_index(index)?;
    let (gamma, omega) = (sol.gamma[index], sol.omega[index]);
    let r = rho0.matrix();
    let excited = r[(1, 1)].re * (-gamma).exp();
    let c10 = r[(1, 0)] * (-gamma / 2.0).exp() * C64::from_polar(1.0, -omega);
    QubitState::new(Mat2::new(C64::new(1.0 - excited, 0.0), c10.conj(), c10, C64::new(excited, 0.0)))
}

/// μ(t) = |α0|² e^{−Γ(t)}.
pub fn population(sol: &AmplitudeSolution, index: usize, alpha0: C64) -> Result<f64> {
    sol.check_index(index)?;
    Ok(alpha0.norm_sqr() * (-sol.gamma[index]).exp())
}
