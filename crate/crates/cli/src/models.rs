//! One runner per model: resolve parameters, sample the channel on the
//! time grid and attach the Markovianity verdict.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::Value;

use qchan_core::analysis::{
    classify, default_eps_abs, rate_from_series, MarkovClass, RateFlag, RateSeries, SeriesKind, TimeSeries,
    DEFAULT_EPS_REL,
};
use qchan_core::classical::{
    classical_decay_rate, monte_carlo_polarization, polarization_factor, IsotropicGaussianNoise,
};
use qchan_core::damping::{solve_amplitude, AmplitudeKernelSpec, KernelMode};
use qchan_core::dephasing::{
    gamma_classical, gamma_classical_rate, gamma_continuum, gamma_discrete, gamma_discrete_rate, monte_carlo_coherence,
    probability_from_gamma, BosonMode, CosineComponent, DiscreteBosonBath, SpectralDensity, StationaryProcess,
    TabulatedDensity,
};
use qchan_core::spinbath::{bloch_factor, decay_rate, CouplingEnsemble, HalfInt};
use qchan_core::Error as ModelError;

use crate::args::{ClassicalArgs, ClassicalDephasingArgs, CommonArgs, DampingArgs, QuantumDephasingArgs, SpinBathArgs};
use crate::config::Source;
use crate::error::CliError;
use crate::table::{fmt_float, Format, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Grid and output settings shared by every model run.
#[derive(Debug, Clone)]
pub struct Common {
    pub t_max: f64,
    pub steps: usize,
    pub seed: u64,
    pub mc: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn resolve(
        args: &CommonArgs,
        src: &mut Source,
        default_t_max: f64,
        default_mc: usize,
    ) -> Result<Self, CliError> {
        let t_max = src.f64(args.t_max, "t-max", default_t_max)?;
        let steps = src.usize(args.steps, "steps", 400)?;
        let seed = src.u64(args.seed, "seed", 0)?;
        let mc = src.usize(args.mc, "mc", default_mc)?;
        let format = match src.string(args.format.map(|f| format_name(f).to_string()), "format", "csv")?.as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(CliError::Config(format!("field 'format': unknown format '{other}'"))),
        };
        let out = src.optional_string(args.out.as_ref().map(|p| p.display().to_string()), "out")?.map(PathBuf::from);
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(CliError::Config(format!("field 't-max': {t_max} must be positive and finite")));
        }
        if steps < 5 {
            return Err(CliError::Config(format!("field 'steps': {steps} is below the minimum of 5")));
        }
        Ok(Common { t_max, steps, seed, mc, format, out })
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.steps).map(|i| i as f64 * h).collect()
    }
}

pub fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Rates and verdict for one sampled column.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub rates: RateSeries,
    pub class: MarkovClass,
}

pub fn classify_values(
    values: &[f64],
    step: f64,
    kind: SeriesKind,
    mask: Option<&[bool]>,
    eps_abs: Option<f64>,
    eps_rel: Option<f64>,
) -> Result<Verdict, CliError> {
    let mut ts = TimeSeries::new(step, values.to_vec(), kind)?;
    if let Some(m) = mask {
        ts = ts.with_mask(m)?;
    }
    let rates = rate_from_series(&ts)?;
    let class = classify(&rates, eps_abs.unwrap_or_else(|| default_eps_abs(step)), eps_rel.unwrap_or(DEFAULT_EPS_REL))?;
    Ok(Verdict { rates, class })
}

pub fn intervals_text(class: &MarkovClass) -> String {
    class
        .negative_intervals()
        .iter()
        .map(|(a, b)| format!("[{}, {}]", fmt_float(*a), fmt_float(*b)))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn push_verdict(table: &mut Table, column: &str, kind: SeriesKind, class: &MarkovClass) {
    table.push_meta("series-column", column);
    table.push_meta("series-kind", kind.tag());
    table.push_meta("classification", class.label());
    match class {
        MarkovClass::ConstantRate { rate } => table.push_meta("constant-rate", fmt_float(*rate)),
        MarkovClass::NonMarkovian { .. } => table.push_meta("negative-intervals", intervals_text(class)),
        MarkovClass::TimeDependentMarkovian => {}
    }
}

fn header(model: &str, common: &Common, resolved: serde_json::Map<String, Value>) -> Table {
    let mut t = Table::default();
    t.push_meta("qchan", VERSION);
    t.push_meta("model", model);
    t.push_meta("config", Value::Object(resolved).to_string());
    t.push_meta("step", fmt_float(common.step()));
    t.push_meta("points", (common.steps + 1).to_string());
    t
}

fn join_flags(flags: Vec<Vec<&str>>) -> Vec<String> {
    flags.into_iter().map(|f| f.join("|")).collect()
}

/// γ from an analytic rate function, with poles turned into flags.
fn analytic_rates<F>(times: &[f64], rate: F) -> Result<(Vec<f64>, Vec<Vec<&'static str>>), CliError>
where
    F: Fn(f64) -> Result<f64, ModelError>,
{
    let mut gamma = Vec::with_capacity(times.len());
    let mut flags = Vec::with_capacity(times.len());
    for &t in times {
        match rate(t) {
            Ok(g) => {
                gamma.push(g);
                flags.push(vec![]);
            }
            Err(ModelError::Pole { .. }) => {
                gamma.push(f64::NAN);
                flags.push(vec!["pole"]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((gamma, flags))
}

fn finite_difference_columns(rates: &RateSeries) -> (Vec<f64>, Vec<f64>, Vec<Vec<&'static str>>) {
    let flags = rates
        .flags()
        .iter()
        .map(|f| match f {
            RateFlag::Ok => vec![],
            other => vec![other.tag()],
        })
        .collect();
    (rates.gamma().to_vec(), rates.error().to_vec(), flags)
}

/// Parses "a:b,c:d" pairs.
pub fn parse_pairs(text: &str, key: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("field '{key}': '{pair}' is not of the form a:b")))?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("field '{key}': '{s}' is not a number")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

pub struct Run {
    pub table: Table,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub fn depol_spinbath(args: &SpinBathArgs) -> Result<Run, CliError> {
    let mut src = Source::load(args.common.config.as_deref())?;
    let common = Common::resolve(&args.common, &mut src, 10.0, 0)?;
    let name = src.string(args.ensemble.clone(), "ensemble", "fixed")?;
    let l: HalfInt = src.string(args.l.clone(), "l", "1")?.parse()?;
    src.accept(&["g", "mean", "std-dev", "half-width", "g-lo", "g-hi", "spins"]);
    let ensemble = match name.as_str() {
        "fixed" => CouplingEnsemble::fixed(l, src.f64(args.g, "g", 1.0)?)?,
        "gaussian" => {
            CouplingEnsemble::gaussian(l, src.f64(args.mean, "mean", 0.0)?, src.f64(args.std_dev, "std-dev", 1.0)?)?
        }
        "lorentzian" => CouplingEnsemble::lorentzian(l, src.f64(args.half_width, "half-width", 1.0)?)?,
        "uniform" => CouplingEnsemble::uniform(l, src.f64(args.g_lo, "g-lo", 0.5)?, src.f64(args.g_hi, "g-hi", 1.5)?)?,
        "spin-star" => {
            let spins = src.u64(args.spins, "spins", 3)?;
            let spins = u32::try_from(spins).map_err(|_| CliError::Config("field 'spins': too large".into()))?;
            CouplingEnsemble::spin_star(spins, src.f64(args.g, "g", 1.0)?)?
        }
        other => return Err(CliError::Config(format!("field 'ensemble': unknown ensemble '{other}'"))),
    };
    let resolved = src.finish()?;
    let times = common.times();
    let f = times.iter().map(|&t| bloch_factor(&ensemble, t)).collect::<Result<Vec<_>, _>>()?;
    let (gamma, flags) = analytic_rates(&times, |t| decay_rate(&ensemble, t))?;
    let verdict = classify_values(&f, common.step(), SeriesKind::BlochFactor, None, None, None)?;

    let mut table = header("depol-spinbath", &common, resolved);
    push_verdict(&mut table, "f_or_coherence", SeriesKind::BlochFactor, &verdict.class);
    table.push_num("t", times);
    table.push_num("f_or_coherence", f.clone());
    table.push_num("p", f.iter().map(|x| 1.0 - x).collect());
    table.push_num("gamma", gamma);
    table.push_num("gamma_err", vec![0.0; f.len()]);
    table.push_text("flags", join_flags(flags));
    Ok(Run { table, format: common.format, out: common.out })
}

pub fn depol_classical(args: &ClassicalArgs) -> Result<Run, CliError> {
    let mut src = Source::load(args.common.config.as_deref())?;
    let common = Common::resolve(&args.common, &mut src, 4.0, 0)?;
    let noise = IsotropicGaussianNoise::new(src.f64(args.g, "g", 1.0)?, src.f64(args.sigma, "sigma", 1.0)?)?;
    let resolved = src.finish()?;
    let times = common.times();
    let f = times.iter().map(|&t| polarization_factor(&noise, t)).collect::<Result<Vec<_>, _>>()?;
    let (gamma, flags) = analytic_rates(&times, |t| classical_decay_rate(&noise, t))?;
    let verdict = classify_values(&f, common.step(), SeriesKind::BlochFactor, None, None, None)?;

    let mut table = header("depol-classical", &common, resolved);
    push_verdict(&mut table, "f_or_coherence", SeriesKind::BlochFactor, &verdict.class);
    table.push_num("t", times.clone());
    table.push_num("f_or_coherence", f.clone());
    table.push_num("p", f.iter().map(|x| 1.0 - x).collect());
    table.push_num("gamma", gamma);
    table.push_num("gamma_err", vec![0.0; f.len()]);
    table.push_text("flags", join_flags(flags));
    if common.mc > 0 {
        table.push_meta("mc-realizations", common.mc.to_string());
        table.push_meta("mc-seed", common.seed.to_string());
        let est = monte_carlo_polarization(&noise, &times, common.mc, common.seed)?;
        table.push_num("diff", est.mean.iter().zip(&f).map(|(m, x)| m - x).collect());
        table.push_num("mc_f", est.mean);
        table.push_num("mc_stderr", est.std_err);
    }
    Ok(Run { table, format: common.format, out: common.out })
}

/// Γ, Γ′ and their errors on the grid, for the chosen boson bath.
struct DephasingSeries {
    gamma: Vec<f64>,
    rate: Option<Vec<f64>>,
    quad_err: Option<Vec<f64>>,
}

pub fn dephasing_quantum(args: &QuantumDephasingArgs) -> Result<Run, CliError> {
    let mut src = Source::load(args.common.config.as_deref())?;
    let common = Common::resolve(&args.common, &mut src, 10.0, 0)?;
    let single = src.switch(args.single_mode, "single-mode")?;
    let ohmic = src.switch(args.ohmic, "ohmic")?;
    let modes = src.optional_string(args.modes.clone(), "modes")?;
    let density_file = src.optional_string(args.density_file.clone(), "density-file")?;
    let chosen = [single, ohmic, modes.is_some(), density_file.is_some()].iter().filter(|b| **b).count();
    if chosen > 1 {
        return Err(CliError::Config("choose one of 'single-mode', 'modes', 'ohmic' and 'density-file'".into()));
    }
    src.accept(&["omega", "weight", "amplitude", "cutoff-time", "beta", "tol"]);
    let times = common.times();
    let series = if single {
        let bath = DiscreteBosonBath::single_mode_weighted(
            src.f64(args.omega, "omega", 0.5)?,
            src.f64(args.weight, "weight", 4.0)?,
        )?;
        discrete_series(&bath, &times)?
    } else if let Some(spec) = modes {
        let beta = src.f64(args.beta, "beta", f64::INFINITY)?;
        let modes = parse_pairs(&spec, "modes")?
            .into_iter()
            .map(|(coupling, frequency)| BosonMode { coupling, frequency })
            .collect();
        discrete_series(&DiscreteBosonBath::new(modes, beta)?, &times)?
    } else {
        let beta = src.f64(args.beta, "beta", f64::INFINITY)?;
        let tol = src.f64(args.tol, "tol", qchan_core::dephasing::DEFAULT_QUAD_TOL)?;
        let density = match density_file {
            Some(path) => SpectralDensity::Tabulated(
                TabulatedDensity::load(&path).map_err(|e| CliError::Config(format!("field 'density-file': {e}")))?,
            ),
            None => SpectralDensity::ohmic_exp(
                src.f64(args.amplitude, "amplitude", 8.0 * std::f64::consts::PI)?,
                src.f64(args.cutoff_time, "cutoff-time", 1.0)?,
            )?,
        };
        if !(beta > 0.0) || !(tol > 0.0) {
            return Err(CliError::Config("fields 'beta' and 'tol' must be positive".into()));
        }
        let est = times.par_iter().map(|&t| gamma_continuum(&density, beta, t, tol)).collect::<Result<Vec<_>, _>>()?;
        DephasingSeries {
            gamma: est.iter().map(|e| e.value).collect(),
            rate: None,
            quad_err: Some(est.iter().map(|e| e.error).collect()),
        }
    };
    let resolved = src.finish()?;
    dephasing_table("dephasing-quantum", &common, resolved, times, series)
}

fn discrete_series(bath: &DiscreteBosonBath, times: &[f64]) -> Result<DephasingSeries, CliError> {
    Ok(DephasingSeries {
        gamma: times.iter().map(|&t| gamma_discrete(bath, t)).collect::<Result<_, _>>()?,
        rate: Some(times.iter().map(|&t| gamma_discrete_rate(bath, t)).collect::<Result<_, _>>()?),
        quad_err: None,
    })
}

fn dephasing_table(
    model: &str,
    common: &Common,
    resolved: serde_json::Map<String, Value>,
    times: Vec<f64>,
    series: DephasingSeries,
) -> Result<Run, CliError> {
    let kind = SeriesKind::DephasingGamma;
    let verdict = classify_values(&series.gamma, common.step(), kind, None, None, None)?;
    let (fd_gamma, fd_err, fd_flags) = finite_difference_columns(&verdict.rates);
    let (gamma, gamma_err, flags) = match series.rate {
        Some(rate) => (rate, vec![0.0; times.len()], vec![vec![]; times.len()]),
        None => (fd_gamma, fd_err, fd_flags),
    };
    let mut table = header(model, common, resolved);
    push_verdict(&mut table, "decoherence", kind, &verdict.class);
    table.push_num("t", times);
    table.push_num("f_or_coherence", series.gamma.iter().map(|g| (-g).exp()).collect());
    table.push_num("p", series.gamma.iter().map(|g| probability_from_gamma(*g)).collect());
    table.push_num("gamma", gamma);
    table.push_num("gamma_err", gamma_err);
    table.push_text("flags", join_flags(flags));
    table.push_num("decoherence", series.gamma);
    if let Some(q) = series.quad_err {
        table.push_num("quad_err", q);
    }
    Ok(Run { table, format: common.format, out: common.out.clone() })
}

pub fn dephasing_classical(args: &ClassicalDephasingArgs) -> Result<Run, CliError> {
    let mut src = Source::load(args.common.config.as_deref())?;
    let common = Common::resolve(&args.common, &mut src, 10.0, 0)?;
    let name = src.string(args.process.clone(), "process", "cosine")?;
    src.accept(&["cosines", "intensity"]);
    let process = match name.as_str() {
        "cosine" => {
            let spec = src.string(args.cosines.clone(), "cosines", "1:1")?;
            StationaryProcess::cosine_sum(
                parse_pairs(&spec, "cosines")?
                    .into_iter()
                    .map(|(amplitude, frequency)| CosineComponent { amplitude, frequency })
                    .collect(),
            )?
        }
        "white" => StationaryProcess::white_noise(src.f64(args.intensity, "intensity", 1.0)?)?,
        other => return Err(CliError::Config(format!("field 'process': unknown process '{other}'"))),
    };
    let g = src.f64(args.g, "g", 1.0)?;
    let resolved = src.finish()?;
    let times = common.times();
    let series = DephasingSeries {
        gamma: times.iter().map(|&t| gamma_classical(&process, g, t)).collect::<Result<_, _>>()?,
        rate: Some(times.iter().map(|&t| gamma_classical_rate(&process, g, t)).collect::<Result<_, _>>()?),
        quad_err: None,
    };
    let mut run = dephasing_table("dephasing-classical", &common, resolved, times.clone(), series)?;
    if common.mc > 0 {
        let est = monte_carlo_coherence(&process, g, &times, common.mc, common.seed)?;
        run.table.push_meta("mc-realizations", common.mc.to_string());
        run.table.push_meta("mc-seed", common.seed.to_string());
        run.table.push_num("mc_re", est.real.mean);
        run.table.push_num("mc_re_stderr", est.real.std_err);
        run.table.push_num("mc_im", est.imag.mean);
        run.table.push_num("mc_im_stderr", est.imag.std_err);
    }
    Ok(run)
}

pub fn kernel_spec(args: &DampingArgs, src: &mut Source) -> Result<AmplitudeKernelSpec, CliError> {
    let omega = src.f64(args.omega, "omega", 1.0)?;
    src.accept(&["g"]);
    match src.optional_string(args.modes.clone(), "modes")? {
        Some(spec) => Ok(AmplitudeKernelSpec::new(
            omega,
            parse_pairs(&spec, "modes")?
                .into_iter()
                .map(|(coupling, frequency)| KernelMode { coupling, frequency })
                .collect(),
        )?),
        None => Ok(AmplitudeKernelSpec::resonant(omega, src.f64(args.g, "g", 1.0)?)?),
    }
}

pub fn amp_damping(args: &DampingArgs) -> Result<Run, CliError> {
    let mut src = Source::load(args.common.config.as_deref())?;
    let common = Common::resolve(&args.common, &mut src, 10.0, 0)?;
    let spec = kernel_spec(args, &mut src)?;
    let resolved = src.finish()?;
    let sol = solve_amplitude(&spec, common.t_max, common.steps)?;
    let kind = SeriesKind::DampingGamma;
    let verdict = classify_values(sol.gamma(), common.step(), kind, Some(sol.capped()), None, None)?;
    let (gamma, gamma_err, mut flags) = finite_difference_columns(&verdict.rates);
    for (f, &c) in flags.iter_mut().zip(sol.capped()) {
        if c {
            f.insert(0, "capped");
        }
    }
    let mut table = header("amp-damping", &common, resolved);
    push_verdict(&mut table, "decoherence", kind, &verdict.class);
    table.push_num("t", sol.times());
    table.push_num("f_or_coherence", sol.ratio().iter().map(|a| a.norm()).collect());
    table.push_num("p", (0..sol.len()).map(|i| sol.probability(i)).collect::<Result<_, _>>()?);
    table.push_num("gamma", gamma);
    table.push_num("gamma_err", gamma_err);
    table.push_text("flags", join_flags(flags));
    table.push_num("decoherence", sol.gamma().to_vec());
    table.push_num("phase", sol.omega().to_vec());
    table.push_num("alpha_re", sol.ratio().iter().map(|a| a.re).collect());
    table.push_num("alpha_im", sol.ratio().iter().map(|a| a.im).collect());
    Ok(Run { table, format: common.format, out: common.out })
}
