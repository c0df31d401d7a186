//! Depolarizing channel from a spin ½ coupled isotropically to a direct sum
//! of effective environmental spins, H = ⊕ₖ gₖ s·Sₖ (ħ = 1), with the bath
//! initially maximally mixed.
//!
//! For one effective spin `l` and coupling `g` the qubit Bloch vector is
//! contracted by
//!
//! ```text
//! F(t) = [4l² + 4l + 3 + 8l(l+1) cos((2l+1)gt/2)] / [3(2l+1)²]
//! ```
//!
//! Every ensemble below averages the cosine (or the whole factor) over a
//! distribution of couplings or spins. Rates are γ(t) = −d ln F/dt, taken
//! from closed-form derivatives.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};

/// Below this contraction factor the decay rate is reported as a pole.
pub const RATE_FLOOR: f64 = 1e-12;

/// A non-negative half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(u32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);

    pub fn from_twice(twice: u32) -> Self {
        HalfInt(twice)
    }

    pub fn twice(&self) -> u32 {
        self.0
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Dimension 2l + 1 of the spin-l representation.
    pub fn multiplicity(&self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"1"` or `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(num) = s.strip_suffix("/2") {
            return num
                .trim()
                .parse::<u32>()
                .map(HalfInt)
                .map_err(|_| Error::Parse(format!("invalid half-integer '{s}'")));
        }
        let v: f64 = s.parse().map_err(|_| Error::Parse(format!("invalid half-integer '{s}'")))?;
        let twice = 2.0 * v;
        if v < 0.0 || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(Error::Parse(format!("'{s}' is not a non-negative half-integer")));
        }
        Ok(HalfInt(twice as u32))
    }
}

fn binomial(n: u32, k: i64) -> BigUint {
    if k < 0 || k > n as i64 {
        return BigUint::zero();
    }
    let k = (k as u32).min(n - k as u32);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Number of effective spin-`l` copies in N spin-½ environment spins:
/// ν(N, l) = C(N, N/2 − l) − C(N, N/2 − l − 1).
pub fn degeneracy(spins: u32, l: HalfInt) -> Result<BigUint> {
    if spins == 0 {
        return domain("spin count must be positive");
    }
    if l.twice() > spins || !(spins - l.twice()).is_multiple_of(2) {
        return domain(format!("l = {l} is not reachable from {spins} spins ½"));
    }
    let k = ((spins - l.twice()) / 2) as i64;
    Ok(binomial(spins, k) - binomial(spins, k - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub l: HalfInt,
    pub degeneracy: BigUint,
    /// ν(N, l)(2l + 1)/2^N.
    pub weight: f64,
}

/// Angular-momentum decomposition of N environmental spins ½.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorWeightTable {
    spins: u32,
    sectors: Vec<Sector>,
}

impl SectorWeightTable {
    pub fn spin_star(spins: u32) -> Result<Self> {
        if spins == 0 {
            return domain("spin count must be positive");
        }
        let total = BigUint::one() << spins as usize;
        let total_f = total.to_f64().unwrap_or(f64::INFINITY);
        let sectors = (0..=spins / 2)
            .map(|k| {
                let l = HalfInt(spins - 2 * k);
                let nu = degeneracy(spins, l)?;
                let dim = &nu * l.multiplicity();
                let weight = dim.to_f64().unwrap_or(f64::INFINITY) / total_f;
                Ok(Sector { l, degeneracy: nu, weight })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SectorWeightTable { spins, sectors })
    }

    pub fn spins(&self) -> u32 {
        self.spins
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    /// Σ ν(N, l)(2l + 1), which must equal 2^N.
    pub fn dimension(&self) -> BigUint {
        self.sectors.iter().map(|s| &s.degeneracy * s.l.multiplicity()).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.dimension() == BigUint::one() << self.spins as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedCoupling {
    pub l: HalfInt,
    pub g: f64,
    pub weight: f64,
}

/// Distribution of effective spins and coupling constants.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingEnsemble {
    Fixed {
        l: HalfInt,
        g: f64,
    },
    /// Normal distribution of g with mean `mean` and standard deviation `std_dev`.
    Gaussian {
        l: HalfInt,
        mean: f64,
        std_dev: f64,
    },
    /// Cauchy distribution of g centered at zero with half-width `half_width`.
    Lorentzian {
        l: HalfInt,
        half_width: f64,
    },
    /// g uniform on `[lo, hi]`.
    Uniform {
        l: HalfInt,
        lo: f64,
        hi: f64,
    },
    /// N identical couplings to environmental spins ½.
    SpinStar {
        g: f64,
        table: SectorWeightTable,
    },
    Custom(Vec<WeightedCoupling>),
}

fn check_l(l: HalfInt) -> Result<()> {
    if l.twice() == 0 {
        return domain("effective spin l must be at least 1/2");
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return domain(format!("{name} = {v} is not finite"));
    }
    Ok(())
}

impl CouplingEnsemble {
    pub fn fixed(l: HalfInt, g: f64) -> Result<Self> {
        let e = CouplingEnsemble::Fixed { l, g };
        e.validate()?;
        Ok(e)
    }

    pub fn gaussian(l: HalfInt, mean: f64, std_dev: f64) -> Result<Self> {
        let e = CouplingEnsemble::Gaussian { l, mean, std_dev };
        e.validate()?;
        Ok(e)
    }

    pub fn lorentzian(l: HalfInt, half_width: f64) -> Result<Self> {
        let e = CouplingEnsemble::Lorentzian { l, half_width };
        e.validate()?;
        Ok(e)
    }

    pub fn uniform(l: HalfInt, lo: f64, hi: f64) -> Result<Self> {
        let e = CouplingEnsemble::Uniform { l, lo, hi };
        e.validate()?;
        Ok(e)
    }

    pub fn spin_star(spins: u32, g: f64) -> Result<Self> {
        check_finite("g", g)?;
        Ok(CouplingEnsemble::SpinStar { g, table: SectorWeightTable::spin_star(spins)? })
    }

    pub fn custom(components: Vec<WeightedCoupling>) -> Result<Self> {
        let e = CouplingEnsemble::Custom(components);
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CouplingEnsemble::Fixed { l, g } => {
                check_l(*l)?;
                check_finite("g", *g)
            }
            CouplingEnsemble::Gaussian { l, mean, std_dev } => {
                check_l(*l)?;
                check_finite("G", *mean)?;
                if !(*std_dev > 0.0 && std_dev.is_finite()) {
                    return domain(format!("Gaussian σ = {std_dev} must be positive"));
                }
                Ok(())
            }
            CouplingEnsemble::Lorentzian { l, half_width } => {
                check_l(*l)?;
                if !(*half_width > 0.0 && half_width.is_finite()) {
                    return domain(format!("Lorentzian half-width {half_width} must be positive"));
                }
                Ok(())
            }
            CouplingEnsemble::Uniform { l, lo, hi } => {
                check_l(*l)?;
                check_finite("g_lo", *lo)?;
                check_finite("g_hi", *hi)?;
                if lo >= hi {
                    return domain(format!("uniform range [{lo}, {hi}] is empty"));
                }
                Ok(())
            }
            CouplingEnsemble::SpinStar { g, table } => {
                check_finite("g", *g)?;
                if !table.is_exact() {
                    return Err(Error::Contract("spin-star sector table is inconsistent".into()));
                }
                Ok(())
            }
            CouplingEnsemble::Custom(components) => {
                if components.is_empty() {
                    return domain("custom ensemble has no components");
                }
                for c in components {
                    check_l(c.l)?;
                    check_finite("g", c.g)?;
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return domain(format!("custom weight {} must be positive", c.weight));
                    }
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return domain(format!("custom weights sum to {total}, not 1"));
                }
                Ok(())
            }
        }
    }
}

/// Coefficients of F = (A + B·⟨cos⟩)/D for one effective spin.
#[derive(Debug, Clone, Copy)]
struct SpinCoefficients {
    a: f64,
    b: f64,
    d: f64,
    /// (2l + 1)/2, the frequency multiplier of g.
    k: f64,
}

impl SpinCoefficients {
    fn new(l: HalfInt) -> Self {
        let lv = l.value();
        let m = l.multiplicity() as f64;
        SpinCoefficients { a: 4.0 * lv * lv + 4.0 * lv + 3.0, b: 8.0 * lv * (lv + 1.0), d: 3.0 * m * m, k: m / 2.0 }
    }

    fn factor(&self, mean_cos: (f64, f64)) -> (f64, f64) {
        ((self.a + self.b * mean_cos.0) / self.d, self.b * mean_cos.1 / self.d)
    }
}

/// Plateau x(l) = (4l² + 4l + 3)/(3(2l+1)²) of the Bloch factor.
pub fn plateau(l: HalfInt) -> f64 {
    let c = SpinCoefficients::new(l);
    c.a / c.d
}

/// Saturation p_inf(l) = 8l(l+1)/(3(2l+1)²) of the depolarizing probability.
pub fn saturation_probability(l: HalfInt) -> f64 {
    let c = SpinCoefficients::new(l);
    c.b / c.d
}

/// ⟨cos(ug)⟩ and its derivative in u for g uniform on [lo, hi].
fn uniform_mean_cos(u: f64, lo: f64, hi: f64) -> (f64, f64) {
    let width = hi - lo;
    let gmax = lo.abs().max(hi.abs());
    if (u * gmax).abs() < 1e-3 {
        // Series in the moments of g.
        let m2 = (hi.powi(3) - lo.powi(3)) / (3.0 * width);
        let m4 = (hi.powi(5) - lo.powi(5)) / (5.0 * width);
        let m6 = (hi.powi(7) - lo.powi(7)) / (7.0 * width);
        let u2 = u * u;
        let c = 1.0 - u2 * m2 / 2.0 + u2 * u2 * m4 / 24.0 - u2 * u2 * u2 * m6 / 720.0;
        let dc = -u * m2 + u2 * u * m4 / 6.0 - u2 * u2 * u * m6 / 120.0;
        return (c, dc);
    }
    let diff_sin = (hi * u).sin() - (lo * u).sin();
    let diff_cos = hi * (hi * u).cos() - lo * (lo * u).cos();
    let c = diff_sin / (u * width);
    let dc = (diff_cos * u - diff_sin) / (u * u * width);
    (c, dc)
}

/// F(t) and dF/dt.
fn contraction(e: &CouplingEnsemble, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("time t = {t} must be finite and non-negative"));
    }
    e.validate()?;
    let fixed = |l: HalfInt, g: f64| {
        let c = SpinCoefficients::new(l);
        let w = c.k * g;
        c.factor(((w * t).cos(), -w * (w * t).sin()))
    };
    let value = match e {
        CouplingEnsemble::Fixed { l, g } => fixed(*l, *g),
        CouplingEnsemble::Gaussian { l, mean, std_dev } => {
            let c = SpinCoefficients::new(*l);
            let (w, s) = (c.k * mean, c.k * std_dev);
            let env = (-0.5 * s * s * t * t).exp();
            let (sin, cos) = (w * t).sin_cos();
            c.factor((env * cos, env * (-s * s * t * cos - w * sin)))
        }
        CouplingEnsemble::Lorentzian { l, half_width } => {
            let c = SpinCoefficients::new(*l);
            let rate = c.k * half_width;
            let env = (-rate * t).exp();
            c.factor((env, -rate * env))
        }
        CouplingEnsemble::Uniform { l, lo, hi } => {
            let c = SpinCoefficients::new(*l);
            let (mc, dmc) = uniform_mean_cos(c.k * t, *lo, *hi);
            c.factor((mc, c.k * dmc))
        }
        CouplingEnsemble::SpinStar { g, table } => table.sectors().iter().fold((0.0, 0.0), |acc, s| {
            let (f, df) = fixed(s.l, *g);
            (acc.0 + s.weight * f, acc.1 + s.weight * df)
        }),
        CouplingEnsemble::Custom(components) => components.iter().fold((0.0, 0.0), |acc, c| {
            let (f, df) = fixed(c.l, c.g);
            (acc.0 + c.weight * f, acc.1 + c.weight * df)
        }),
    };
    Ok(value)
}

/// Factor multiplying every Bloch component at time `t`.
pub fn bloch_factor(e: &CouplingEnsemble, t: f64) -> Result<f64> {
    Ok(contraction(e, t)?.0)
}

/// Depolarizing probability p(t) = 1 − F(t).
pub fn depolarization_probability(e: &CouplingEnsemble, t: f64) -> Result<f64> {
    Ok(1.0 - bloch_factor(e, t)?)
}

/// γ(t) = −(dF/dt)/F, from the analytic derivative.
pub fn decay_rate(e: &CouplingEnsemble, t: f64) -> Result<f64> {
    let (f, df) = contraction(e, t)?;
    if f <= RATE_FLOOR {
        return Err(Error::Pole { t, factor: f });
    }
    Ok(-df / f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn half(twice: u32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn small_degeneracies() {
        let nu = |n, l| degeneracy(n, half(l)).unwrap().to_u64().unwrap();
        assert_eq!((nu(2, 2), nu(2, 0)), (1, 1));
        assert_eq!((nu(4, 4), nu(4, 2), nu(4, 0)), (1, 3, 2));
        assert_eq!(nu(1, 1), 1);
        assert_eq!(5 + 3 * 3 + 2, 16);
    }

    #[test]
    fn degeneracy_rejects_bad_pairs() {
        assert!(degeneracy(3, half(2)).is_err());
        assert!(degeneracy(2, half(6)).is_err());
        assert!(degeneracy(0, half(0)).is_err());
    }

    #[test]
    fn half_int_parsing() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), half(3));
        assert_eq!("2".parse::<HalfInt>().unwrap(), half(4));
        assert_eq!("0.5".parse::<HalfInt>().unwrap(), half(1));
        assert!("0.3".parse::<HalfInt>().is_err());
        assert!("-1".parse::<HalfInt>().is_err());
        assert_eq!(half(5).to_string(), "5/2");
        assert_eq!(half(4).to_string(), "2");
    }

    #[test]
    fn spin_half_closed_form() {
        let e = CouplingEnsemble::fixed(HalfInt::HALF, 1.3).unwrap();
        for &t in &[0.0, 0.4, 1.7, 3.0] {
            let expected = (1.0 + (1.3f64 * t).cos()) / 2.0;
            assert!((bloch_factor(&e, t).unwrap() - expected).abs() < 1e-15);
        }
        let e = CouplingEnsemble::fixed(HalfInt::HALF, 1.0).unwrap();
        assert!(bloch_factor(&e, PI).unwrap().abs() < 1e-15);
        assert!((depolarization_probability(&e, PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(decay_rate(&e, PI), Err(Error::Pole { .. })));
    }

    #[test]
    fn lorentzian_plateau() {
        let e = CouplingEnsemble::lorentzian(half(2), 0.7).unwrap();
        let late = bloch_factor(&e, 500.0).unwrap();
        assert!((late - 11.0 / 27.0).abs() < 1e-15);
        assert!((plateau(half(2)) - 0.407_407_407_407_407_4).abs() < 1e-15);
    }

    #[test]
    fn gaussian_saturation() {
        let e = CouplingEnsemble::gaussian(half(2), 0.0, 1.0).unwrap();
        let p = depolarization_probability(&e, 100.0).unwrap();
        assert!((p - 16.0 / 27.0).abs() < 1e-15);
        assert!((saturation_probability(half(2)) - 16.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn every_ensemble_starts_at_one() {
        let ensembles = vec![
            CouplingEnsemble::fixed(half(3), 0.9).unwrap(),
            CouplingEnsemble::gaussian(half(2), 1.0, 0.5).unwrap(),
            CouplingEnsemble::lorentzian(half(1), 2.0).unwrap(),
            CouplingEnsemble::uniform(half(2), 0.5, 1.5).unwrap(),
            CouplingEnsemble::spin_star(5, 1.0).unwrap(),
            CouplingEnsemble::custom(vec![
                WeightedCoupling { l: half(1), g: 1.0, weight: 0.25 },
                WeightedCoupling { l: half(4), g: 0.3, weight: 0.75 },
            ])
            .unwrap(),
        ];
        for e in &ensembles {
            assert!((bloch_factor(e, 0.0).unwrap() - 1.0).abs() < 1e-15, "{e:?}");
            // The Lorentzian average has a kink at t = 0, so its rate starts finite.
            if !matches!(e, CouplingEnsemble::Lorentzian { .. }) {
                let r0 = decay_rate(e, 0.0).unwrap();
                assert!(r0.abs() < 1e-15, "{e:?}: {r0}");
            }
        }
    }

    #[test]
    fn uniform_matches_brute_force_average() {
        let (lo, hi) = (0.5, 1.5);
        let e = CouplingEnsemble::uniform(half(2), lo, hi).unwrap();
        let n = 20_000;
        for &t in &[1e-4, 0.3, 2.0, 7.5] {
            // Midpoint rule over g of the fixed-coupling factor.
            let avg: f64 = (0..n)
                .map(|i| {
                    let g = lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
                    bloch_factor(&CouplingEnsemble::fixed(half(2), g).unwrap(), t).unwrap()
                })
                .sum::<f64>()
                / n as f64;
            assert!((bloch_factor(&e, t).unwrap() - avg).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn analytic_rates_match_finite_differences() {
        let ensembles = vec![
            CouplingEnsemble::fixed(half(2), 1.0).unwrap(),
            CouplingEnsemble::gaussian(half(3), 0.8, 0.4).unwrap(),
            CouplingEnsemble::lorentzian(half(1), 0.6).unwrap(),
            CouplingEnsemble::uniform(half(2), 0.5, 1.5).unwrap(),
            CouplingEnsemble::spin_star(3, 1.0).unwrap(),
        ];
        let h = 1e-5;
        for e in &ensembles {
            for &t in &[0.2, 0.9, 1.6] {
                if bloch_factor(e, t).unwrap() < 0.05 {
                    continue;
                }
                let fd = -((bloch_factor(e, t + h).unwrap()).ln() - (bloch_factor(e, t - h).unwrap()).ln()) / (2.0 * h);
                let rate = decay_rate(e, t).unwrap();
                assert!((rate - fd).abs() < 1e-6 * (1.0 + rate.abs()), "{e:?} t={t}");
            }
        }
        // Small-argument branch of the uniform average.
        let e = CouplingEnsemble::uniform(half(2), 0.5, 1.5).unwrap();
        let t = 2e-4;
        let fd = -((bloch_factor(&e, t + 1e-6).unwrap()).ln() - (bloch_factor(&e, t - 1e-6).unwrap()).ln()) / 2e-6;
        assert!((decay_rate(&e, t).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn invalid_ensembles() {
        assert!(CouplingEnsemble::fixed(HalfInt::ZERO, 1.0).is_err());
        assert!(CouplingEnsemble::gaussian(half(1), 0.0, 0.0).is_err());
        assert!(CouplingEnsemble::lorentzian(half(1), -1.0).is_err());
        assert!(CouplingEnsemble::uniform(half(1), 2.0, 1.0).is_err());
        assert!(CouplingEnsemble::spin_star(0, 1.0).is_err());
        assert!(CouplingEnsemble::custom(vec![WeightedCoupling { l: half(1), g: 1.0, weight: 0.5 }]).is_err());
        let e = CouplingEnsemble::fixed(half(1), 1.0).unwrap();
        assert!(matches!(bloch_factor(&e, -1.0), Err(Error::Domain(_))));
    }
}
