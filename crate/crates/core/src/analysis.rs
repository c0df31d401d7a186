//! Decay rates from sampled channel parameters, and the sign-based
//! Markovianity verdict.
//!
//! Derivatives use five-point stencils (fourth order). The central stencil is
//! preferred; near the ends of the grid or next to masked samples an
//! off-centre stencil is substituted.

use std::fmt;

use crate::error::{domain, Error, Result};

/// Factors at or below this value are treated as poles of the rate.
pub const FACTOR_FLOOR: f64 = 1e-12;
pub const DEFAULT_EPS_REL: f64 = 1e-8;
pub const MIN_POINTS: usize = 5;

/// What the sampled values mean, and so how γ is derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    /// Bloch contraction factor f; γ = −f′/f.
    BlochFactor,
    /// Error probability p; γ = p′/(1 − p).
    Probability,
    /// Dephasing exponent Γ; γ = Γ′.
    DephasingGamma,
    /// Amplitude-damping exponent Γ; γ = Γ′.
    DampingGamma,
}

impl SeriesKind {
    pub fn tag(&self) -> &'static str {
        match self {
            SeriesKind::BlochFactor => "bloch-factor",
            SeriesKind::Probability => "probability",
            SeriesKind::DephasingGamma => "dephasing-gamma",
            SeriesKind::DampingGamma => "damping-gamma",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "bloch-factor" | "f" => Ok(SeriesKind::BlochFactor),
            "probability" | "p" => Ok(SeriesKind::Probability),
            "dephasing-gamma" => Ok(SeriesKind::DephasingGamma),
            "damping-gamma" => Ok(SeriesKind::DampingGamma),
            other => Err(Error::Parse(format!("unknown series kind '{other}'"))),
        }
    }

    fn is_exponent(&self) -> bool {
        matches!(self, SeriesKind::DephasingGamma | SeriesKind::DampingGamma)
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Samples y_i at t_i = i·h.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    step: f64,
    values: Vec<f64>,
    kind: SeriesKind,
    masked: Vec<bool>,
}

impl TimeSeries {
    pub fn new(step: f64, values: Vec<f64>, kind: SeriesKind) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return domain(format!("step h = {step} must be positive"));
        }
        if values.len() < MIN_POINTS {
            return domain(format!("a series needs at least {MIN_POINTS} points, got {}", values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("value at index {i} is not finite"));
        }
        let masked = vec![false; values.len()];
        Ok(TimeSeries { step, values, kind, masked })
    }

    /// Samples `f` at `points` grid points starting from t = 0.
    pub fn sample<F>(kind: SeriesKind, step: f64, points: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let values = (0..points).map(|i| f(i as f64 * step)).collect::<Result<Vec<_>>>()?;
        TimeSeries::new(step, values, kind)
    }

    /// Excludes samples (e.g. capped exponents) from every derivative stencil.
    pub fn with_mask(mut self, masked: &[bool]) -> Result<Self> {
        if masked.len() != self.values.len() {
            return domain("mask length differs from series length");
        }
        self.masked = masked.to_vec();
        Ok(self)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    /// Samples every `factor`-th point.
    pub fn decimate(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return domain("decimation factor must be positive");
        }
        let pick = |v: &[f64]| v.iter().step_by(factor).copied().collect::<Vec<_>>();
        let masked = self.masked.iter().step_by(factor).copied().collect::<Vec<_>>();
        TimeSeries::new(self.step * factor as f64, pick(&self.values), self.kind)?.with_mask(&masked)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateFlag {
    Ok,
    /// The factor itself is at or below [`FACTOR_FLOOR`].
    Pole,
    /// No five-point stencil around the sample avoids masked or pole points.
    Undefined,
}

impl RateFlag {
    pub fn tag(&self) -> &'static str {
        match self {
            RateFlag::Ok => "",
            RateFlag::Pole => "pole",
            RateFlag::Undefined => "undefined",
        }
    }
}

/// γ_i with an error estimate; undefined points carry NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    step: f64,
    gamma: Vec<f64>,
    error: Vec<f64>,
    flags: Vec<RateFlag>,
}

impl RateSeries {
    pub fn new(step: f64, gamma: Vec<f64>, error: Vec<f64>, flags: Vec<RateFlag>) -> Result<Self> {
        if !(step > 0.0) || gamma.len() != error.len() || gamma.len() != flags.len() {
            return domain("inconsistent rate series");
        }
        for i in 0..gamma.len() {
            if flags[i] == RateFlag::Ok && !(gamma[i].is_finite() && error[i].is_finite()) {
                return domain(format!("rate at index {i} is flagged valid but not finite"));
            }
        }
        Ok(RateSeries { step, gamma, error, flags })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn error(&self) -> &[f64] {
        &self.error
    }

    pub fn flags(&self) -> &[RateFlag] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.flags[i] == RateFlag::Ok
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }
}

struct Stencil {
    start: isize,
    weights: [f64; 5],
    // Leading truncation error is err_coeff · h⁴ · y⁽⁵⁾.
    err_coeff: f64,
}

const STENCILS: [Stencil; 5] = [
    Stencil { start: -2, weights: [1.0, -8.0, 0.0, 8.0, -1.0], err_coeff: 1.0 / 30.0 },
    Stencil { start: -1, weights: [-3.0, -10.0, 18.0, -6.0, 1.0], err_coeff: 1.0 / 20.0 },
    Stencil { start: -3, weights: [-1.0, 6.0, -18.0, 10.0, 3.0], err_coeff: 1.0 / 20.0 },
    Stencil { start: 0, weights: [-25.0, 48.0, -36.0, 16.0, -3.0], err_coeff: 1.0 / 5.0 },
    Stencil { start: -4, weights: [3.0, -16.0, 36.0, -48.0, 25.0], err_coeff: 1.0 / 5.0 },
];

fn window_ok(usable: &[bool], start: isize, width: usize) -> bool {
    start >= 0
        && (start as usize + width) <= usable.len()
        && usable[start as usize..start as usize + width].iter().all(|&u| u)
}

/// Magnitude of the fifth (or, failing that, fourth) difference near `lo`.
fn high_difference(y: &[f64], usable: &[bool], lo: isize) -> f64 {
    for width in [6usize, 5] {
        for shift in [0isize, -1, 1, -2, 2] {
            let start = lo + shift;
            if window_ok(usable, start, width) {
                let w = &y[start as usize..start as usize + width];
                let d = if width == 6 {
                    -w[0] + 5.0 * w[1] - 10.0 * w[2] + 10.0 * w[3] - 5.0 * w[4] + w[5]
                } else {
                    // h⁴y⁽⁴⁾ overestimates h⁴y⁽⁵⁾·h for smooth data; acceptable as a bound.
                    w[0] - 4.0 * w[1] + 6.0 * w[2] - 4.0 * w[3] + w[4]
                };
                return d.abs();
            }
        }
    }
    0.0
}

/// (y′_i, error) from the best available stencil, or `None`.
fn derivative(y: &[f64], usable: &[bool], i: usize, h: f64) -> Option<(f64, f64)> {
    for s in &STENCILS {
        let start = i as isize + s.start;
        if !window_ok(usable, start, 5) {
            continue;
        }
        let w = &y[start as usize..start as usize + 5];
        let d: f64 = w.iter().zip(&s.weights).map(|(v, c)| v * c).sum::<f64>() / (12.0 * h);
        let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let roundoff = 8.0 * f64::EPSILON * scale / h;
        // Factor 2 keeps the estimate on the safe side of the true error.
        let truncation = 2.0 * s.err_coeff * high_difference(y, usable, start) / h;
        return Some((d, truncation + roundoff));
    }
    None
}

/// γ(t) from a sampled channel parameter.
pub fn rate_from_series(ts: &TimeSeries) -> Result<RateSeries> {
    let n = ts.len();
    let h = ts.step;
    // Work with the factor f (or the exponent Γ directly).
    let (y, sign): (Vec<f64>, f64) = match ts.kind {
        SeriesKind::BlochFactor => (ts.values.clone(), -1.0),
        SeriesKind::Probability => (ts.values.iter().map(|p| 1.0 - p).collect(), -1.0),
        SeriesKind::DephasingGamma | SeriesKind::DampingGamma => (ts.values.clone(), 1.0),
    };
    let pole: Vec<bool> =
        if ts.kind.is_exponent() { vec![false; n] } else { y.iter().map(|&f| f <= FACTOR_FLOOR).collect() };
    let usable: Vec<bool> = (0..n).map(|i| !pole[i] && !ts.masked[i]).collect();
    let mut gamma = vec![f64::NAN; n];
    let mut error = vec![f64::NAN; n];
    let mut flags = vec![RateFlag::Undefined; n];
    for i in 0..n {
        if pole[i] {
            flags[i] = RateFlag::Pole;
            continue;
        }
        if !usable[i] {
            continue;
        }
        if let Some((d, err)) = derivative(&y, &usable, i, h) {
            let (g, e) = if ts.kind.is_exponent() { (d, err) } else { (sign * d / y[i], err / y[i].abs()) };
            if g.is_finite() && e.is_finite() {
                gamma[i] = g;
                error[i] = e;
                flags[i] = RateFlag::Ok;
            }
        }
    }
    RateSeries::new(h, gamma, error, flags)
}

/// Default absolute threshold, 1e-9 scaled by 1/h for fine grids.
pub fn default_eps_abs(step: f64) -> f64 {
    1e-9 * (1.0 / step).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarkovClass {
    ConstantRate { rate: f64 },
    TimeDependentMarkovian,
    NonMarkovian { intervals: Vec<(f64, f64)> },
}

impl MarkovClass {
    pub fn label(&self) -> &'static str {
        match self {
            MarkovClass::ConstantRate { .. } => "constant-rate",
            MarkovClass::TimeDependentMarkovian => "time-dependent-markovian",
            MarkovClass::NonMarkovian { .. } => "non-markovian",
        }
    }

    pub fn negative_intervals(&self) -> &[(f64, f64)] {
        match self {
            MarkovClass::NonMarkovian { intervals } => intervals,
            _ => &[],
        }
    }

    pub fn is_markovian(&self) -> bool {
        !matches!(self, MarkovClass::NonMarkovian { .. })
    }

    /// Same variant, ignoring the supporting data.
    pub fn same_verdict(&self, other: &MarkovClass) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for MarkovClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkovClass::ConstantRate { rate } => write!(f, "constant-rate (gamma = {rate:.12e})"),
            MarkovClass::TimeDependentMarkovian => f.write_str("time-dependent-markovian"),
            MarkovClass::NonMarkovian { intervals } => {
                write!(f, "non-markovian ({} negative interval", intervals.len())?;
                if intervals.len() != 1 {
                    f.write_str("s")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Linear-interpolated zero of γ between samples a and a + 1.
fn crossing(rs: &RateSeries, a: usize) -> f64 {
    let (g0, g1) = (rs.gamma[a], rs.gamma[a + 1]);
    rs.time(a) + rs.step * g0 / (g0 - g1)
}

/// Constant if every defined γ_i lies within max(ε_abs, ε_rel|γ̄|) plus its
/// error estimate of the mean; otherwise non-Markovian if some γ_i falls
/// below −(ε_abs + error), with the negative runs reported as intervals.
pub fn classify(rs: &RateSeries, eps_abs: f64, eps_rel: f64) -> Result<MarkovClass> {
    if !(eps_abs >= 0.0 && eps_rel >= 0.0) {
        return domain("thresholds must be non-negative");
    }
    let defined: Vec<usize> = (0..rs.len()).filter(|&i| rs.is_defined(i)).collect();
    if defined.is_empty() {
        return Err(Error::Unclassifiable("no point of the rate series is defined".into()));
    }
    // Weighting by the error estimate keeps one-sided boundary stencils from biasing the mean.
    let weight = |i: usize| (rs.error[i] + eps_abs + f64::MIN_POSITIVE).powi(-2);
    let total: f64 = defined.iter().map(|&i| weight(i)).sum();
    let mean = defined.iter().map(|&i| weight(i) * rs.gamma[i]).sum::<f64>() / total;
    let band = eps_abs.max(eps_rel * mean.abs());
    if defined.iter().all(|&i| (rs.gamma[i] - mean).abs() <= band + rs.error[i]) {
        return Ok(MarkovClass::ConstantRate { rate: mean });
    }
    let significant = |i: usize| rs.is_defined(i) && rs.gamma[i] < -(eps_abs + rs.error[i]);
    let negative = |i: usize| rs.is_defined(i) && rs.gamma[i] < 0.0;
    let n = rs.len();
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < n {
        if !significant(i) {
            i += 1;
            continue;
        }
        // Grow to the full run of negative rates around this point.
        let mut lo = i;
        while lo > 0 && negative(lo - 1) {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < n && negative(hi + 1) {
            hi += 1;
        }
        let start = if lo > 0 && rs.is_defined(lo - 1) { crossing(rs, lo - 1) } else { rs.time(lo) };
        let end = if hi + 1 < n && rs.is_defined(hi + 1) { crossing(rs, hi) } else { rs.time(hi) };
        match intervals.last_mut() {
            Some(last) if start - last.1 < 2.0 * rs.step => last.1 = end,
            _ => intervals.push((start, end)),
        }
        i = hi + 1;
    }
    if intervals.is_empty() {
        Ok(MarkovClass::TimeDependentMarkovian)
    } else {
        Ok(MarkovClass::NonMarkovian { intervals })
    }
}

/// [`classify`] with [`default_eps_abs`] and [`DEFAULT_EPS_REL`].
pub fn classify_default(rs: &RateSeries) -> Result<MarkovClass> {
    classify(rs, default_eps_abs(rs.step), DEFAULT_EPS_REL)
}
