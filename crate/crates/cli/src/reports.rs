//! analyze, reproduce and oracle subcommands.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use qchan_core::analysis::{MarkovClass, RateFlag, SeriesKind};
use qchan_core::channel::{BlochVector, QubitState};
use qchan_core::classical::{monte_carlo_polarization, polarization_factor, IsotropicGaussianNoise};
use qchan_core::damping::solve_amplitude;
use qchan_core::dephasing::{
    gamma_continuum, gamma_discrete, probability_from_gamma, BosonMode, DiscreteBosonBath, SpectralDensity,
    DEFAULT_QUAD_TOL,
};
use qchan_core::oracle::{exact_dephasing_single_mode, exact_single_excitation, thermal_cutoff, SpinBathOracle};
use qchan_core::spinbath::{bloch_factor, CouplingEnsemble, HalfInt};

use crate::args::{AnalyzeArgs, DampingArgs, Figure, OracleDephasingArgs, OracleSpinArgs, ReproduceArgs};
use crate::config::Source;
use crate::error::CliError;
use crate::models::{classify_values, intervals_text, kernel_spec, push_verdict, Common, Run, VERSION};
use crate::table::{emit, fmt_float, ColumnData, Format, Table};

/// Relative tolerance for accepting a `t` column as a uniform grid.
const GRID_TOL: f64 = 1e-9;

fn resolve_column(args: &AnalyzeArgs, table: &Table) -> String {
    match args.col.as_deref() {
        Some("f") => "f_or_coherence".to_string(),
        Some(c) => c.to_string(),
        None => table.meta("series-column").unwrap_or("f_or_coherence").to_string(),
    }
}

fn resolve_kind(args: &AnalyzeArgs, table: &Table, column: &str) -> Result<SeriesKind, CliError> {
    if let Some(k) = &args.kind {
        return Ok(SeriesKind::from_tag(k)?);
    }
    if table.meta("series-column") == Some(column) {
        if let Some(k) = table.meta("series-kind") {
            return Ok(SeriesKind::from_tag(k)?);
        }
    }
    match column {
        "f_or_coherence" => Ok(SeriesKind::BlochFactor),
        "p" => Ok(SeriesKind::Probability),
        _ => Err(CliError::Config(format!("cannot infer the kind of column '{column}'; pass --kind"))),
    }
}

fn resolve_step(table: &Table, path: &Path) -> Result<f64, CliError> {
    let times = table.num("t");
    let step = match (table.meta("step"), times) {
        (Some(s), _) => {
            s.parse::<f64>().map_err(|_| CliError::Config(format!("{}: step '{s}' is not a number", path.display())))?
        }
        (None, Some(t)) if t.len() >= 2 => t[1] - t[0],
        _ => return Err(CliError::Config(format!("{}: no step metadata and no usable t column", path.display()))),
    };
    if let Some(t) = times {
        for (i, &ti) in t.iter().enumerate() {
            let expect = t[0] + i as f64 * step;
            if (ti - expect).abs() > GRID_TOL * expect.abs().max(1.0) {
                return Err(CliError::Config(format!(
                    "{}: t column is not a uniform grid of step {step} (row {})",
                    path.display(),
                    i + 1
                )));
            }
        }
    }
    Ok(step)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let table = Table::read_csv(&args.file)?;
    let column = resolve_column(args, &table);
    let values = table
        .num(&column)
        .ok_or_else(|| CliError::Config(format!("{}: no numeric column '{column}'", args.file.display())))?;
    let kind = resolve_kind(args, &table, &column)?;
    let step = resolve_step(&table, &args.file)?;
    let mask: Option<Vec<bool>> = match table.column("flags") {
        Some(ColumnData::Text(f)) => Some(f.iter().map(|s| s.split('|').any(|x| x == "capped")).collect()),
        _ => None,
    };
    let verdict = classify_values(values, step, kind, mask.as_deref(), args.eps_abs, args.eps_rel)?;
    let rates = &verdict.rates;
    let undefined = rates.flags().iter().filter(|f| **f != RateFlag::Ok).count();

    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    match args.format {
        None => {
            writeln!(out, "file = {}", args.file.display())?;
            writeln!(out, "column = {column}")?;
            writeln!(out, "kind = {}", kind.tag())?;
            writeln!(out, "step = {}", fmt_float(step))?;
            writeln!(out, "points = {}", values.len())?;
            writeln!(out, "undefined-points = {undefined}")?;
            writeln!(out, "classification = {}", verdict.class.label())?;
            match &verdict.class {
                MarkovClass::ConstantRate { rate } => writeln!(out, "constant-rate = {}", fmt_float(*rate))?,
                MarkovClass::NonMarkovian { .. } => {
                    writeln!(out, "negative-intervals = {}", intervals_text(&verdict.class))?
                }
                MarkovClass::TimeDependentMarkovian => {}
            }
        }
        Some(format) => {
            let mut t = Table::default();
            t.push_meta("qchan", VERSION);
            t.push_meta("source", args.file.display().to_string());
            t.push_meta("step", fmt_float(step));
            push_verdict(&mut t, &column, kind, &verdict.class);
            t.push_num("t", (0..rates.len()).map(|i| rates.time(i)).collect());
            t.push_num("gamma", rates.gamma().to_vec());
            t.push_num("gamma_err", rates.error().to_vec());
            t.push_text("flags", rates.flags().iter().map(|f| f.tag().to_string()).collect());
            t.write(format, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn provenance(t: &mut Table, figure: &str, params: Value) {
    t.push_meta("qchan", VERSION);
    t.push_meta("figure", figure);
    t.push_meta("parameters", params.to_string());
}

fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    let h = t_max / steps as f64;
    (0..=steps).map(|i| i as f64 * h).collect()
}

fn figure1(args: &ReproduceArgs) -> Result<Table, CliError> {
    let noise = IsotropicGaussianNoise::new(1.0, 1.0)?;
    let times = uniform_grid(4.0, 399);
    let theory = times.iter().map(|&t| polarization_factor(&noise, t)).collect::<Result<Vec<_>, _>>()?;
    let mc = monte_carlo_polarization(&noise, &times, args.mc, args.seed)?;
    let mut t = Table::default();
    provenance(
        &mut t,
        "fig1",
        json!({"g": 1.0, "sigma": 1.0, "t-max": 4.0, "points": 400, "mc": args.mc, "seed": args.seed}),
    );
    t.push_meta("within-2-stderr", fmt_float(mc.fraction_within(&theory, 2.0)));
    let diff = mc.mean.iter().zip(&theory).map(|(m, f)| m - f).collect();
    t.push_num("t", times);
    t.push_num("f_theory", theory);
    t.push_num("f_mc", mc.mean);
    t.push_num("mc_stderr", mc.std_err);
    t.push_num("diff", diff);
    Ok(t)
}

fn figure2() -> Result<Table, CliError> {
    let times = uniform_grid(25.0, 500);
    let single = DiscreteBosonBath::single_mode_weighted(0.5, 4.0)?;
    let ohmic = SpectralDensity::ohmic_exp(8.0 * PI, 1.0)?;
    let p_single =
        times.iter().map(|&t| gamma_discrete(&single, t).map(probability_from_gamma)).collect::<Result<Vec<_>, _>>()?;
    let continuum = |beta: f64| -> Result<Vec<f64>, CliError> {
        Ok(times
            .par_iter()
            .map(|&t| gamma_continuum(&ohmic, beta, t, DEFAULT_QUAD_TOL).map(|e| probability_from_gamma(e.value)))
            .collect::<Result<Vec<_>, _>>()?)
    };
    let mut t = Table::default();
    provenance(
        &mut t,
        "fig2",
        json!({
            "single-mode": {"omega": 0.5, "weight": 4.0},
            "ohmic": {"amplitude": 8.0 * PI, "cutoff-time": 1.0},
            "beta-tau": 1.0,
            "t-max": 25.0,
            "steps": 500,
        }),
    );
    t.push_num("t", times.clone());
    t.push_num("p_single_mode", p_single);
    t.push_num("p_zero_t", continuum(f64::INFINITY)?);
    t.push_num("p_beta_tau", continuum(1.0)?);
    Ok(t)
}

pub fn reproduce(args: &ReproduceArgs) -> Result<PathBuf, CliError> {
    let (table, name) = match args.which {
        Figure::Fig1 => (figure1(args)?, "fig1.csv"),
        Figure::Fig2 => (figure2()?, "fig2.csv"),
    };
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let path = args.out_dir.join(name);
    emit(&table, Format::Csv, Some(&path))?;
    Ok(path)
}

fn oracle_header(model: &str, common: &Common, resolved: serde_json::Map<String, Value>, diff: &[f64]) -> Table {
    let mut t = Table::default();
    t.push_meta("qchan", VERSION);
    t.push_meta("oracle", model);
    t.push_meta("config", Value::Object(resolved).to_string());
    t.push_meta("step", fmt_float(common.step()));
    t.push_meta("max-abs-diff", fmt_float(diff.iter().cloned().fold(0.0, f64::max)));
    t
}

pub fn oracle_spin_bath(args: &OracleSpinArgs) -> Result<Run, CliError> {
    let mut src = Source::load(args.common.config.as_deref())?;
    let common = Common::resolve(&args.common, &mut src, 10.0, 0)?;
    let l: HalfInt = src.string(args.l.clone(), "l", "1")?.parse()?;
    let g = src.f64(args.g, "g", 1.0)?;
    let resolved = src.finish()?;
    let oracle = SpinBathOracle::new(l, g)?;
    let ensemble = CouplingEnsemble::fixed(l, g)?;
    let times = common.times();
    let exact = times
        .par_iter()
        .map(|&t| oracle.evolve(&QubitState::ground(), t).map(|r| r.bloch().z()))
        .collect::<Result<Vec<_>, _>>()?;
    let model = times.iter().map(|&t| bloch_factor(&ensemble, t)).collect::<Result<Vec<_>, _>>()?;
    let diff: Vec<f64> = exact.iter().zip(&model).map(|(a, b)| (a - b).abs()).collect();
    let mut table = oracle_header("spin-bath", &common, resolved, &diff);
    table.push_num("t", times);
    table.push_num("oracle_f", exact);
    table.push_num("model_f", model);
    table.push_num("diff", diff);
    Ok(Run { table, format: common.format, out: common.out })
}

pub fn oracle_single_excitation(args: &DampingArgs) -> Result<Run, CliError> {
    let mut src = Source::load(args.common.config.as_deref())?;
    let common = Common::resolve(&args.common, &mut src, 10.0, 0)?;
    let spec = kernel_spec(args, &mut src)?;
    let resolved = src.finish()?;
    let sol = solve_amplitude(&spec, common.t_max, common.steps)?;
    let times = sol.times();
    let exact = exact_single_excitation(&spec, &times)?;
    let diff: Vec<f64> = exact.iter().zip(sol.ratio()).map(|(a, b)| (a - b).norm()).collect();
    let mut table = oracle_header("single-excitation", &common, resolved, &diff);
    table.push_num("t", times);
    table.push_num("oracle_re", exact.iter().map(|a| a.re).collect());
    table.push_num("oracle_im", exact.iter().map(|a| a.im).collect());
    table.push_num("model_re", sol.ratio().iter().map(|a| a.re).collect());
    table.push_num("model_im", sol.ratio().iter().map(|a| a.im).collect());
    table.push_num("diff", diff);
    Ok(Run { table, format: common.format, out: common.out })
}

pub fn oracle_dephasing(args: &OracleDephasingArgs) -> Result<Run, CliError> {
    let mut src = Source::load(args.common.config.as_deref())?;
    let common = Common::resolve(&args.common, &mut src, 10.0, 0)?;
    let coupling = src.f64(args.coupling, "coupling", 1.0)?;
    let omega = src.f64(args.omega, "omega", 0.5)?;
    let beta = src.f64(args.beta, "beta", f64::INFINITY)?;
    let resolved = src.finish()?;
    let bath = DiscreteBosonBath::new(vec![BosonMode { coupling, frequency: omega }], beta)?;
    let n_max = thermal_cutoff(omega, beta);
    let rho0 = QubitState::from_bloch(&BlochVector::new(1.0, 0.0, 0.0)?);
    let times = common.times();
    let exact = times
        .par_iter()
        .map(|&t| exact_dephasing_single_mode(coupling, omega, beta, n_max, &rho0, t))
        .collect::<Result<Vec<_>, _>>()?;
    let model = times.iter().map(|&t| gamma_discrete(&bath, t).map(|g| (-g).exp())).collect::<Result<Vec<_>, _>>()?;
    let coherence: Vec<f64> = exact.iter().map(|r| 2.0 * r.coherence().norm()).collect();
    let diff: Vec<f64> = coherence.iter().zip(&model).map(|(a, b)| (a - b).abs()).collect();
    let mut table = oracle_header("dephasing", &common, resolved, &diff);
    table.push_num("t", times);
    table.push_num("oracle_coherence", coherence);
    table.push_num("model_coherence", model);
    table.push_num("diff", diff);
    Ok(Run { table, format: common.format, out: common.out })
}
