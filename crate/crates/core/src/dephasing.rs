//! Dephasing (phase-damping) channels from a qubit coupled to bosonic modes
//! through σ3, and from a classical Gaussian stationary field along σ3.
//!
//! Both models shrink the coherence ⟨0|ρ|1⟩ by e^{−Γ(t)}, i.e. a phase
//! damping channel with p(t) = 1 − e^{−Γ(t)}, dressed by e^{−iΩσ3/2}.
//!
//! Units: ħ = 1, so the inverse temperature β carries units of time. An
//! infinite β is the zero-temperature bath.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::channel::{Mat2, QubitState};
use crate::error::{domain, Error, Result};
use crate::montecarlo::{self, MonteCarloEstimate};
use crate::quadrature::{self, Estimate};

/// Default absolute tolerance for the continuum decoherence integral.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
const MAX_SEGMENTS_PER_PIECE: usize = 200;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("time t = {t} must be finite and non-negative"));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || beta.is_nan() {
        return domain(format!("inverse temperature β = {beta} must be positive"));
    }
    Ok(())
}

/// coth(ωβ/2); one at zero temperature.
fn coth_half(omega: f64, beta: f64) -> f64 {
    if beta.is_infinite() {
        1.0
    } else {
        1.0 / (0.5 * omega * beta).tanh()
    }
}

/// (1 − cos ωt)·coth(ωβ/2), finite as ω → 0.
fn thermal_weight(omega: f64, t: f64, beta: f64) -> f64 {
    if beta.is_finite() && omega * beta.max(t) < 1e-6 {
        // (ω²t²/2)(2/(ωβ))
        return omega * t * t / beta;
    }
    let s = (0.5 * omega * t).sin();
    2.0 * s * s * coth_half(omega, beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BosonMode {
    /// Coupling constant c_k (only |c_k|² enters).
    pub coupling: f64,
    /// Mode frequency ω_k > 0.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBosonBath {
    modes: Vec<BosonMode>,
    beta: f64,
}

impl DiscreteBosonBath {
    pub fn new(modes: Vec<BosonMode>, beta: f64) -> Result<Self> {
        if modes.is_empty() {
            return domain("bath has no modes");
        }
        for m in &modes {
            if !(m.frequency > 0.0 && m.frequency.is_finite()) {
                return domain(format!("mode frequency {} must be positive", m.frequency));
            }
            if !m.coupling.is_finite() {
                return domain("mode coupling must be finite");
            }
        }
        check_beta(beta)?;
        Ok(DiscreteBosonBath { modes, beta })
    }

    pub fn zero_temperature(modes: Vec<BosonMode>) -> Result<Self> {
        Self::new(modes, f64::INFINITY)
    }

    /// One mode whose combination |c|² coth(ωβ/2)/ω² equals `weight`,
    /// realized at zero temperature.
    pub fn single_mode_weighted(frequency: f64, weight: f64) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return domain(format!("mode weight {weight} must be non-negative"));
        }
        Self::zero_temperature(vec![BosonMode { coupling: frequency * weight.sqrt(), frequency }])
    }

    pub fn modes(&self) -> &[BosonMode] {
        &self.modes
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Γ(t) = ¼ Σ_k |c_k|² (1 − cos ω_k t) coth(ω_k β/2)/ω_k².
pub fn gamma_discrete(bath: &DiscreteBosonBath, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(0.25
        * bath
            .modes
            .iter()
            .map(|m| m.coupling * m.coupling * thermal_weight(m.frequency, t, bath.beta) / (m.frequency * m.frequency))
            .sum::<f64>())
}

/// dΓ/dt for the discrete bath.
pub fn gamma_discrete_rate(bath: &DiscreteBosonBath, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(0.25
        * bath
            .modes
            .iter()
            .map(|m| {
                m.coupling * m.coupling * (m.frequency * t).sin() * coth_half(m.frequency, bath.beta) / m.frequency
            })
            .sum::<f64>())
}

/// Tabulated spectral density with linear interpolation between samples.
/// Below the first sample J is continued linearly through the origin, and
/// above the last sample it vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    omega: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() || omega.len() < 2 {
            return domain("tabulated density needs at least two (ω, J) pairs");
        }
        if omega[0] < 0.0 || omega.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("tabulated ω grid must be non-negative and strictly ascending");
        }
        if values.iter().any(|j| !(*j >= 0.0) || !j.is_finite()) {
            return domain("tabulated J(ω) must be finite and non-negative");
        }
        if omega[0] == 0.0 && values[0] != 0.0 {
            return domain("J(0) must vanish");
        }
        Ok(TabulatedDensity { omega, values })
    }

    /// Parses whitespace-separated `ω J` lines; blank lines and `#` comments
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut omega = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: invalid number '{s}'", lineno + 1)))
            };
            if cols.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            }
            omega.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        Self::new(omega, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    fn j_over_omega(&self, w: f64) -> f64 {
        let (first, last) = (self.omega[0], *self.omega.last().unwrap());
        if w > last {
            return 0.0;
        }
        if w <= first {
            return if first > 0.0 {
                self.values[0] / first
            } else {
                // J(0) = 0: use the slope of the first segment.
                self.values[1] / self.omega[1]
            };
        }
        let i = self.omega.partition_point(|&x| x <= w).min(self.omega.len() - 1);
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let j = self.values[i - 1] + (self.values[i] - self.values[i - 1]) * (w - w0) / (w1 - w0);
        j / w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// J(ω) = A ω e^{−ωτ}.
    OhmicExp {
        amplitude: f64,
        cutoff_time: f64,
    },
    Tabulated(TabulatedDensity),
}

impl SpectralDensity {
    pub fn ohmic_exp(amplitude: f64, cutoff_time: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return domain("ohmic amplitude must be finite and non-negative");
        }
        if !(cutoff_time > 0.0) || !cutoff_time.is_finite() {
            return domain("cutoff time τ must be positive");
        }
        Ok(SpectralDensity::OhmicExp { amplitude, cutoff_time })
    }

    pub fn eval(&self, omega: f64) -> f64 {
        omega * self.j_over_omega(omega)
    }

    fn j_over_omega(&self, omega: f64) -> f64 {
        match self {
            SpectralDensity::OhmicExp { amplitude, cutoff_time } => amplitude * (-omega * cutoff_time).exp(),
            SpectralDensity::Tabulated(tab) => tab.j_over_omega(omega),
        }
    }

    /// Finite upper limit of the ω integral and a bound on the neglected tail.
    fn truncation(&self, beta: f64, tol: f64) -> (f64, f64, Vec<f64>) {
        match self {
            SpectralDensity::OhmicExp { amplitude, cutoff_time } => {
                let tau = *cutoff_time;
                // Integrand ≤ (A/4π) e^{−ωτ} coth(ωβ/2) ⇒ tail ≤ (A/(4πτ)) e^{−Ωτ} coth(Ωβ/2).
                let tail = |w: f64| amplitude / (4.0 * PI * tau) * (-w * tau).exp() * coth_half(w, beta);
                let mut upper = 10.0 / tau;
                while tail(upper) > 0.1 * tol {
                    upper += 5.0 / tau;
                }
                let cutoffs = (1..).map(|k| k as f64 / tau).take_while(|w| *w < upper).collect();
                (upper, tail(upper), cutoffs)
            }
            SpectralDensity::Tabulated(tab) => {
                let nodes = tab.omega.iter().copied().filter(|w| *w > 0.0).collect::<Vec<_>>();
                (*tab.omega.last().unwrap(), 0.0, nodes)
            }
        }
    }
}

/// Γ(t) = ¼ ∫₀^∞ J(ω)/(2πω) (1 − cos ωt) coth(ωβ/2) dω by adaptive
/// quadrature, with the range split at cutoff multiples (or table nodes)
/// and at half-periods π/t of the cosine.
pub fn gamma_continuum(density: &SpectralDensity, beta: f64, t: f64, tol: f64) -> Result<Estimate> {
    check_time(t)?;
    check_beta(beta)?;
    if !(tol > 0.0) {
        return domain("quadrature tolerance must be positive");
    }
    if t == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (upper, tail, mut breaks) = density.truncation(beta, tol);
    let half_period = PI / t;
    breaks.extend((1..).map(|k| k as f64 * half_period).take_while(|w| *w < upper));
    breaks.push(0.0);
    breaks.push(upper);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * upper);

    let integrand = |w: f64| density.j_over_omega(w) * thermal_weight(w, t, beta) / (8.0 * PI);
    let budget = 0.9 * tol - tail;
    let mut total = Estimate { value: 0.0, error: tail };
    for piece in breaks.windows(2) {
        let share = budget * (piece[1] - piece[0]) / upper;
        match quadrature::integrate(integrand, piece[0], piece[1], share, MAX_SEGMENTS_PER_PIECE) {
            Ok(est) => {
                total.value += est.value;
                total.error += est.error;
            }
            Err(Error::Quadrature { estimate, error }) => {
                return Err(Error::Quadrature { estimate: total.value + estimate, error: total.error + error });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineComponent {
    /// Standard deviation σ_i of the amplitudes x_i, y_i.
    pub amplitude: f64,
    pub frequency: f64,
}

/// Zero-mean Gaussian stationary processes.
#[derive(Debug, Clone, PartialEq)]
pub enum StationaryProcess {
    /// ξ(t) = Σ x_i cos(ω_i t) + y_i sin(ω_i t) with x_i, y_i ~ N(0, σ_i²).
    CosineSum(Vec<CosineComponent>),
    /// Φ(Δt) = intensity · δ(Δt).
    WhiteNoise { intensity: f64 },
}

impl StationaryProcess {
    pub fn cosine_sum(components: Vec<CosineComponent>) -> Result<Self> {
        if components.is_empty() {
            return domain("cosine-sum process has no components");
        }
        for c in &components {
            if !(c.amplitude > 0.0 && c.amplitude.is_finite()) || !(c.frequency > 0.0 && c.frequency.is_finite()) {
                return domain("cosine components need positive amplitude and frequency");
            }
        }
        Ok(StationaryProcess::CosineSum(components))
    }

    pub fn white_noise(intensity: f64) -> Result<Self> {
        if !(intensity >= 0.0) || !intensity.is_finite() {
            return domain("white-noise intensity must be non-negative");
        }
        Ok(StationaryProcess::WhiteNoise { intensity })
    }
}

/// Two-point correlation Φ(Δt) = Σ σ_i² cos(ω_i Δt).
pub fn correlation(process: &StationaryProcess, dt: f64) -> Result<f64> {
    match process {
        StationaryProcess::CosineSum(cs) => {
            Ok(cs.iter().map(|c| c.amplitude * c.amplitude * (c.frequency * dt).cos()).sum())
        }
        StationaryProcess::WhiteNoise { .. } => {
            Err(Error::Unsupported("white-noise correlation is a distribution, not a function".into()))
        }
    }
}

/// Γ(t) = 2g² ∫₀^t∫₀^t Φ(t₁ − t₂) dt₁ dt₂.
pub fn gamma_classical(process: &StationaryProcess, g: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let g2 = g * g;
    Ok(match process {
        StationaryProcess::CosineSum(cs) => {
            4.0 * g2
                * cs.iter()
                    .map(|c| {
                        let s = (0.5 * c.frequency * t).sin();
                        c.amplitude * c.amplitude * 2.0 * s * s / (c.frequency * c.frequency)
                    })
                    .sum::<f64>()
        }
        StationaryProcess::WhiteNoise { intensity } => 2.0 * g2 * intensity * t,
    })
}

/// dΓ/dt for the classical process.
pub fn gamma_classical_rate(process: &StationaryProcess, g: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let g2 = g * g;
    Ok(match process {
        StationaryProcess::CosineSum(cs) => {
            4.0 * g2 * cs.iter().map(|c| c.amplitude * c.amplitude * (c.frequency * t).sin() / c.frequency).sum::<f64>()
        }
        StationaryProcess::WhiteNoise { intensity } => 2.0 * g2 * intensity,
    })
}

/// Real and imaginary parts of a Monte Carlo coherence estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceEstimate {
    pub real: MonteCarloEstimate,
    pub imag: MonteCarloEstimate,
}

/// Samples E[exp(−2ig∫₀^t ξ)] using the exact per-realization integral
/// ∫₀^t ξ = Σ [x_i sin(ω_i t) + y_i (1 − cos ω_i t)]/ω_i.
pub fn monte_carlo_coherence(
    process: &StationaryProcess,
    g: f64,
    times: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<CoherenceEstimate> {
    let StationaryProcess::CosineSum(cs) = process else {
        return Err(Error::Unsupported("Monte Carlo coherence needs a cosine-sum process".into()));
    };
    montecarlo::check_grid(times, realizations)?;
    let n = times.len();
    let (mean, se) = montecarlo::average(realizations, seed, 2 * n, |rng, out| {
        let amps: Vec<(f64, f64)> =
            cs.iter().map(|c| (c.amplitude * rng.normal(), c.amplitude * rng.normal())).collect();
        for (i, &t) in times.iter().enumerate() {
            let integral: f64 = cs
                .iter()
                .zip(&amps)
                .map(|(c, (x, y))| {
                    let (s, co) = (c.frequency * t).sin_cos();
                    (x * s + y * (1.0 - co)) / c.frequency
                })
                .sum();
            let (s, co) = (-2.0 * g * integral).sin_cos();
            out[i] = co;
            out[n + i] = s;
        }
    });
    let part = |range: std::ops::Range<usize>| MonteCarloEstimate {
        times: times.to_vec(),
        mean: mean[range.clone()].to_vec(),
        std_err: se[range].to_vec(),
        realizations,
        seed,
    };
    Ok(CoherenceEstimate { real: part(0..n), imag: part(n..2 * n) })
}

/// Dephased and phase-rotated state: populations kept, ⟨1|ρ|0⟩ multiplied
/// by e^{−Γ} e^{iΩ} (the action of e^{−iΩσ3/2} after phase damping).
pub fn dephasing_channel_at(gamma: f64, omega: f64, rho0: &QubitState) -> Result<QubitState> {
    if !(gamma >= 0.0) {
        return domain(format!("decoherence exponent Γ = {gamma} must be non-negative"));
    }
    if !omega.is_finite() {
        return domain("phase Ω must be finite");
    }
    let r = rho0.matrix();
    let c10 = r[(1, 0)] * (-gamma).exp() * C64::from_polar(1.0, omega);
    QubitState::new(Mat2::new(r[(0, 0)], c10.conj(), c10, r[(1, 1)]))
}

/// p(t) = 1 − e^{−Γ(t)}.
pub fn probability_from_gamma(gamma: f64) -> f64 {
    -(-gamma).exp_m1()
}

/// How a decoherence function was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    DiscreteSum,
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

/// Γ(t) sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceFunction {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl DecoherenceFunction {
    pub fn tabulate<F>(times: &[f64], provenance: Provenance, gamma: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let values = times.iter().map(|&t| gamma(t)).collect::<Result<Vec<_>>>()?;
        if let Some(v) = values.iter().find(|v| **v < -1e-12) {
            return Err(Error::Accuracy(format!("negative decoherence exponent {v}")));
        }
        Ok(DecoherenceFunction { times: times.to_vec(), values, provenance })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.values.iter().map(|g| probability_from_gamma(*g)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        apply_kraus, dress_with_phase, kraus_phase_damping, BlochVector, PhaseDressing, PhaseGenerator,
    };

    fn fig2_single_mode() -> DiscreteBosonBath {
        DiscreteBosonBath::single_mode_weighted(0.5, 4.0).unwrap()
    }

    #[test]
    fn single_mode_closed_form() {
        let bath = fig2_single_mode();
        for &t in &[0.0, 1.0, 3.3, 2.0 * PI] {
            let expected = 1.0 - (t / 2.0).cos();
            assert!((gamma_discrete(&bath, t).unwrap() - expected).abs() < 1e-14);
        }
        let peak = probability_from_gamma(gamma_discrete(&bath, 2.0 * PI).unwrap());
        assert!((peak - (1.0 - (-2.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn modes_add_linearly() {
        let m = BosonMode { coupling: 0.3, frequency: 1.1 };
        let one = DiscreteBosonBath::new(vec![m], 2.0).unwrap();
        let two = DiscreteBosonBath::new(vec![m, m], 2.0).unwrap();
        let t = 1.7;
        assert!((gamma_discrete(&two, t).unwrap() - 2.0 * gamma_discrete(&one, t).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn temperature_increases_peak() {
        let m = BosonMode { coupling: 0.4, frequency: 1.0 };
        let t = PI;
        let cold = gamma_discrete(&DiscreteBosonBath::new(vec![m], 10.0).unwrap(), t).unwrap();
        let hot = gamma_discrete(&DiscreteBosonBath::new(vec![m], 0.5).unwrap(), t).unwrap();
        assert!(hot > cold);
    }

    #[test]
    fn discrete_rate_matches_difference_quotient() {
        let bath = DiscreteBosonBath::new(
            vec![BosonMode { coupling: 0.5, frequency: 0.7 }, BosonMode { coupling: 0.2, frequency: 2.1 }],
            1.5,
        )
        .unwrap();
        let (t, h) = (1.3, 1e-6);
        let fd = (gamma_discrete(&bath, t + h).unwrap() - gamma_discrete(&bath, t - h).unwrap()) / (2.0 * h);
        assert!((gamma_discrete_rate(&bath, t).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn classical_rate_matches_difference_quotient() {
        let p = StationaryProcess::cosine_sum(vec![
            CosineComponent { amplitude: 0.8, frequency: 1.3 },
            CosineComponent { amplitude: 0.3, frequency: 0.4 },
        ])
        .unwrap();
        let (t, h) = (2.1, 1e-6);
        let fd = (gamma_classical(&p, 0.7, t + h).unwrap() - gamma_classical(&p, 0.7, t - h).unwrap()) / (2.0 * h);
        assert!((gamma_classical_rate(&p, 0.7, t).unwrap() - fd).abs() < 1e-8);
        let w = StationaryProcess::white_noise(1.0).unwrap();
        assert_eq!(gamma_classical_rate(&w, 1.0, 3.0).unwrap(), 2.0);
    }

    #[test]
    fn ohmic_zero_temperature_integral() {
        // ∫₀^∞ e^{−ω}(1 − cos ωt) dω = t²/(1 + t²).
        let j = SpectralDensity::ohmic_exp(8.0 * PI, 1.0).unwrap();
        for &t in &[0.0, 0.5, 1.0, 4.0, 20.0] {
            let est = gamma_continuum(&j, f64::INFINITY, t, 1e-10).unwrap();
            assert!((est.value - t * t / (1.0 + t * t)).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn ohmic_general_cutoff() {
        let tau = 0.4;
        let j = SpectralDensity::ohmic_exp(8.0 * PI, tau).unwrap();
        let t = 1.3;
        let est = gamma_continuum(&j, f64::INFINITY, t, 1e-10).unwrap();
        assert!((est.value - t * t / (tau * (tau * tau + t * t))).abs() < 1e-9);
    }

    #[test]
    fn thermal_weight_small_frequency_limit() {
        let (t, beta) = (2.0, 1.5);
        assert!((thermal_weight(1e-9, t, beta) - 1e-9 * t * t / beta).abs() < 1e-22);
        // Both branches agree across the switch-over.
        let below = thermal_weight(0.99e-6 / t, t, beta);
        let above = thermal_weight(1.01e-6 / t, t, beta);
        assert!(((above - below) / below - 0.0202).abs() < 1e-3);
        assert_eq!(thermal_weight(0.0, t, f64::INFINITY), 0.0);
    }

    #[test]
    fn tabulated_parsing() {
        let tab = TabulatedDensity::parse("# w J\n0 0\n1.0 2.0\n\n2.0 1.0\n").unwrap();
        let j = SpectralDensity::Tabulated(tab);
        assert!((j.eval(0.5) - 1.0).abs() < 1e-15);
        assert!((j.eval(1.5) - 1.5).abs() < 1e-15);
        assert_eq!(j.eval(3.0), 0.0);
        assert!(TabulatedDensity::parse("0 0\n1 2 3\n").is_err());
        assert!(TabulatedDensity::parse("0 0\n1 x\n").is_err());
        assert!(TabulatedDensity::parse("1 1\n0.5 1\n").is_err());
    }

    #[test]
    fn classical_closed_forms() {
        let white = StationaryProcess::white_noise(1.0).unwrap();
        assert!((gamma_classical(&white, 1.0, 3.0).unwrap() - 6.0).abs() < 1e-15);
        let single = StationaryProcess::cosine_sum(vec![CosineComponent { amplitude: 1.0, frequency: 1.0 }]).unwrap();
        for &t in &[0.0, 0.7, PI] {
            assert!((gamma_classical(&single, 1.0, t).unwrap() - 4.0 * (1.0 - t.cos())).abs() < 1e-14);
        }
    }

    #[test]
    fn classical_gamma_matches_double_integral() {
        let proc = StationaryProcess::cosine_sum(vec![
            CosineComponent { amplitude: 0.7, frequency: 1.3 },
            CosineComponent { amplitude: 0.4, frequency: 0.3 },
        ])
        .unwrap();
        let (g, t, n) = (0.8, 2.5, 800);
        // Midpoint rule on the square [0, t]².
        let h = t / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (t1, t2) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                sum += correlation(&proc, t1 - t2).unwrap();
            }
        }
        let double = 2.0 * g * g * sum * h * h;
        assert!((gamma_classical(&proc, g, t).unwrap() - double).abs() < 1e-5);
    }

    #[test]
    fn correlation_properties() {
        let proc = StationaryProcess::cosine_sum(vec![
            CosineComponent { amplitude: 1.5, frequency: 2.0 },
            CosineComponent { amplitude: 0.5, frequency: 0.3 },
        ])
        .unwrap();
        assert!((correlation(&proc, 0.0).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(correlation(&proc, 0.37).unwrap(), correlation(&proc, -0.37).unwrap());
        let single = StationaryProcess::cosine_sum(vec![CosineComponent { amplitude: 2.0, frequency: 3.0 }]).unwrap();
        assert!((correlation(&single, PI / 3.0).unwrap() + 4.0).abs() < 1e-14);
        let white = StationaryProcess::white_noise(1.0).unwrap();
        assert!(matches!(correlation(&white, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn coherence_monte_carlo() {
        let proc = StationaryProcess::cosine_sum(vec![CosineComponent { amplitude: 1.0, frequency: 1.0 }]).unwrap();
        let times = [0.0, 0.3, 1.0, PI];
        let est = monte_carlo_coherence(&proc, 1.0, &times, 4000, 9).unwrap();
        assert_eq!(est.real.mean[0], 1.0);
        assert_eq!(est.imag.mean[0], 0.0);
        for (i, &t) in times.iter().enumerate().skip(1) {
            let target = (-gamma_classical(&proc, 1.0, t).unwrap()).exp();
            assert!((est.real.mean[i] - target).abs() <= 5.0 * est.real.std_err[i] + 1e-12);
            assert!(est.imag.mean[i].abs() <= 5.0 * est.imag.std_err[i] + 1e-12);
        }
        let again = monte_carlo_coherence(&proc, 1.0, &times, 4000, 9).unwrap();
        assert_eq!(est, again);
        let white = StationaryProcess::white_noise(1.0).unwrap();
        assert!(monte_carlo_coherence(&white, 1.0, &times, 10, 0).is_err());
    }

    #[test]
    fn channel_examples() {
        let rho = QubitState::from_bloch(&BlochVector::new(0.6, 0.0, 0.8).unwrap());
        assert!(dephasing_channel_at(0.0, 0.0, &rho).unwrap().max_abs_diff(&rho) < 1e-16);
        let half = dephasing_channel_at(2f64.ln(), 0.0, &rho).unwrap();
        assert!((half.bloch().x() - 0.3).abs() < 1e-15);
        let gone = dephasing_channel_at(800.0, 1.0, &rho).unwrap();
        assert_eq!(gone.coherence(), C64::new(0.0, 0.0));
        assert_eq!(gone.excited_population(), rho.excited_population());
        assert!(dephasing_channel_at(-0.1, 0.0, &rho).is_err());
    }

    #[test]
    fn channel_matches_dressed_kraus() {
        let rho = QubitState::from_bloch(&BlochVector::new(0.3, -0.5, 0.4).unwrap());
        for &(gamma, omega) in &[(0.2, 0.4), (1.5, -2.0), (0.0, 3.0)] {
            let direct = dephasing_channel_at(gamma, omega, &rho).unwrap();
            let k = kraus_phase_damping(probability_from_gamma(gamma)).unwrap();
            let k = dress_with_phase(&k, PhaseDressing::new(omega, PhaseGenerator::HalfSigmaZ).unwrap()).unwrap();
            let via = apply_kraus(&k, &rho).unwrap();
            assert!(direct.max_abs_diff(&via) < 1e-12);
        }
    }

    #[test]
    fn tabulate_rejects_negative_values() {
        let f = DecoherenceFunction::tabulate(&[0.0, 1.0], Provenance::ClosedForm, |t| Ok(-t));
        assert!(f.is_err());
        let f = DecoherenceFunction::tabulate(&[0.0, 1.0], Provenance::ClosedForm, Ok).unwrap();
        assert_eq!(f.probabilities()[0], 0.0);
    }
}
