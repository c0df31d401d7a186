//! Depolarizing channel from a static, isotropic Gaussian random field,
//! H = g ξ·σ (ħ = 1), drawn once per realization.
//!
//! Each realization rotates the Bloch vector about ξ̂ by the angle 2gt|ξ|
//! (right-handed, from ρ ↦ e^{−igtξ·σ} ρ e^{igtξ·σ}); the ensemble average
//! contracts it isotropically by the polarization factor
//!
//! ```text
//! f(t) = (1 + 2(1 − 4g²σ²t²) e^{−2g²σ²t²}) / 3.
//! ```

use crate::channel::BlochVector;
use crate::error::{domain, Error, Result};
use crate::montecarlo::{self, MonteCarloEstimate};

/// Below this polarization factor the rate is reported as a pole.
pub const RATE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicGaussianNoise {
    /// Coupling constant (frequency).
    pub g: f64,
    /// Standard deviation of each dimensionless field component.
    pub sigma: f64,
}

impl IsotropicGaussianNoise {
    pub fn new(g: f64, sigma: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return domain(format!("coupling g = {g} must be positive"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain(format!("noise σ = {sigma} must be positive"));
        }
        Ok(IsotropicGaussianNoise { g, sigma })
    }

    /// Time at which f(t) reaches its minimum, 4g²σ²t² = 3.
    pub fn minimum_time(&self) -> f64 {
        3f64.sqrt() / (2.0 * self.g * self.sigma)
    }
}

/// One realization of the field direction and strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSample {
    pub xi: [f64; 3],
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("time t = {t} must be finite and non-negative"));
    }
    Ok(())
}

/// f(t) and df/dt.
fn polarization(noise: &IsotropicGaussianNoise, t: f64) -> (f64, f64) {
    let gs2 = (noise.g * noise.sigma).powi(2);
    let x = gs2 * t * t;
    let e = (-2.0 * x).exp();
    let f = (1.0 + 2.0 * (1.0 - 4.0 * x) * e) / 3.0;
    // df/dx = (4/3) e^{−2x} (4x − 3), dx/dt = 2g²σ²t.
    let df = 4.0 / 3.0 * e * (4.0 * x - 3.0) * 2.0 * gs2 * t;
    (f, df)
}

pub fn polarization_factor(noise: &IsotropicGaussianNoise, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(polarization(noise, t).0)
}

/// γ(t) = −f′(t)/f(t).
pub fn classical_decay_rate(noise: &IsotropicGaussianNoise, t: f64) -> Result<f64> {
    check_time(t)?;
    let (f, df) = polarization(noise, t);
    if f <= RATE_FLOOR {
        return Err(Error::Pole { t, factor: f });
    }
    Ok(-df / f)
}

fn rotate(xi: [f64; 3], g: f64, t: f64, s: [f64; 3]) -> [f64; 3] {
    let norm = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    let a = 2.0 * g * t;
    let angle = a * norm;
    // sin(aξ)/ξ and (1 − cos aξ)/ξ², continuous through ξ = 0.
    let (sin_over, versin_over) = if angle.abs() < 1e-4 {
        let a2 = angle * angle;
        (a * (1.0 - a2 / 6.0), a * a / 2.0 * (1.0 - a2 / 12.0))
    } else {
        let half = (angle / 2.0).sin();
        (angle.sin() / norm, 2.0 * half * half / (norm * norm))
    };
    let cos = angle.cos();
    let cross = [xi[1] * s[2] - xi[2] * s[1], xi[2] * s[0] - xi[0] * s[2], xi[0] * s[1] - xi[1] * s[0]];
    let along = xi[0] * s[0] + xi[1] * s[1] + xi[2] * s[2];
    std::array::from_fn(|i| s[i] * cos + cross[i] * sin_over + along * xi[i] * versin_over)
}

/// Bloch vector after evolving for time `t` in the fixed field `sample`.
pub fn rotate_bloch(sample: &NoiseSample, g: f64, t: f64, s0: &BlochVector) -> Result<BlochVector> {
    check_time(t)?;
    if !sample.xi.iter().all(|x| x.is_finite()) || !g.is_finite() {
        return domain("noise sample and coupling must be finite");
    }
    Ok(BlochVector::raw(rotate(sample.xi, g, t, s0.as_array())))
}

/// Monte Carlo estimate of f(t) as the mean projection s(t)·ŝ0 for the
/// initial direction ẑ.
pub fn monte_carlo_polarization(
    noise: &IsotropicGaussianNoise,
    times: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let z = BlochVector::raw([0.0, 0.0, 1.0]);
    monte_carlo_polarization_along(noise, times, realizations, seed, &z)
}

/// As [`monte_carlo_polarization`] with an arbitrary unit initial vector.
pub fn monte_carlo_polarization_along(
    noise: &IsotropicGaussianNoise,
    times: &[f64],
    realizations: usize,
    seed: u64,
    s0: &BlochVector,
) -> Result<MonteCarloEstimate> {
    montecarlo::check_grid(times, realizations)?;
    if (s0.norm() - 1.0).abs() > 1e-12 {
        return domain("initial Bloch vector must be a unit vector");
    }
    let s = s0.as_array();
    let (g, sigma) = (noise.g, noise.sigma);
    let (mean, std_err) = montecarlo::average(realizations, seed, times.len(), |rng, out| {
        let xi = [sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal()];
        for (o, &t) in out.iter_mut().zip(times) {
            let r = rotate(xi, g, t, s);
            *o = r[0] * s[0] + r[1] * s[1] + r[2] * s[2];
        }
    });
    Ok(MonteCarloEstimate { times: times.to_vec(), mean, std_err, realizations, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise() -> IsotropicGaussianNoise {
        IsotropicGaussianNoise::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn special_values() {
        let n = IsotropicGaussianNoise::new(0.7, 1.3).unwrap();
        assert_eq!(polarization_factor(&n, 0.0).unwrap(), 1.0);
        let t = 1.0 / (2.0 * 0.7 * 1.3);
        assert!((polarization_factor(&n, t).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let fmin = (1.0 - 4.0 * (-1.5f64).exp()) / 3.0;
        assert!((polarization_factor(&n, n.minimum_time()).unwrap() - fmin).abs() < 1e-15);
        assert!((polarization_factor(&n, 1e3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn minimum_by_grid_search() {
        let n = noise();
        let (tmin, fmin) = (0..200_000)
            .map(|i| {
                let t = i as f64 * 1e-5;
                (t, polarization_factor(&n, t).unwrap())
            })
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert!((tmin - n.minimum_time()).abs() < 2e-5);
        assert!((fmin - 0.035_826_45).abs() < 1e-7);
    }

    #[test]
    fn rate_signs() {
        let n = noise();
        assert_eq!(classical_decay_rate(&n, 0.0).unwrap(), 0.0);
        assert!(classical_decay_rate(&n, 0.5).unwrap() > 0.0);
        assert!(classical_decay_rate(&n, n.minimum_time() * 1.01).unwrap() < 0.0);
        let h = 1e-6;
        for &t in &[0.3, 0.9, 1.4] {
            let fd = -(polarization_factor(&n, t + h).unwrap().ln() - polarization_factor(&n, t - h).unwrap().ln())
                / (2.0 * h);
            assert!((classical_decay_rate(&n, t).unwrap() - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn rotation_limits() {
        let s0 = BlochVector::new(0.6, 0.0, 0.8).unwrap();
        let zero = NoiseSample { xi: [0.0; 3] };
        assert_eq!(rotate_bloch(&zero, 1.0, 3.0, &s0).unwrap(), s0);
        let parallel = NoiseSample { xi: [0.3, 0.0, 0.4] };
        let out = rotate_bloch(&parallel, 1.0, 2.0, &s0).unwrap();
        for (a, b) in out.as_array().iter().zip(s0.as_array()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn quarter_turn_about_z() {
        let x = BlochVector::new(1.0, 0.0, 0.0).unwrap();
        let sample = NoiseSample { xi: [0.0, 0.0, 1.0] };
        // 2gt = π/2 with g = 1.
        let out = rotate_bloch(&sample, 1.0, std::f64::consts::FRAC_PI_4, &x).unwrap();
        assert!(out.x().abs() < 1e-15);
        assert!((out.y() - 1.0).abs() < 1e-15);
        assert!(out.z().abs() < 1e-15);
    }

    #[test]
    fn tiny_field_is_continuous() {
        let s0 = BlochVector::new(0.0, 1.0, 0.0).unwrap();
        let a = rotate_bloch(&NoiseSample { xi: [1e-6, 2e-6, 0.0] }, 1.0, 1.0, &s0).unwrap();
        let b = rotate_bloch(&NoiseSample { xi: [1e-3, 2e-3, 0.0] }, 1.0, 1e-3, &s0).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-15);
        assert!((a.z() - b.z()).abs() < 1e-10);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.2).collect();
        let a = monte_carlo_polarization(&noise(), &times, 500, 42).unwrap();
        let b = monte_carlo_polarization(&noise(), &times, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_polarization(&noise(), &times, 500, 43).unwrap();
        assert_ne!(a.mean, c.mean);
        assert_eq!(a.mean[0], 1.0);
        assert_eq!(a.std_err[0], 0.0);
    }

    #[test]
    fn weak_noise_barely_moves() {
        let n = IsotropicGaussianNoise::new(1.0, 1e-9).unwrap();
        let est = monte_carlo_polarization(&n, &[0.0, 1.0, 4.0], 100, 1).unwrap();
        for m in est.mean {
            assert!((m - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn monte_carlo_errors() {
        assert!(monte_carlo_polarization(&noise(), &[0.0, 1.0], 1, 0).is_err());
        assert!(monte_carlo_polarization(&noise(), &[], 10, 0).is_err());
        assert!(IsotropicGaussianNoise::new(0.0, 1.0).is_err());
        assert!(IsotropicGaussianNoise::new(1.0, -1.0).is_err());
    }
}
