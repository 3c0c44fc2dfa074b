//! One function per subcommand. Each returns a [`Report`]: the CSV table,
//! the asserted bound reports, and trend checks that only fail the run
//! under `--strict`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use bergquant::bergman_local::{converged_at, demailly_profile, LocalWeight, Truncation};
use bergquant::energy;
use bergquant::estimates::{self, ComplexPolynomial, THEOREM_NAMES};
use bergquant::line_fn::LineFunction;
use bergquant::measure_quant::{self, MeasureSpec};
use bergquant::report::{is_non_increasing, BoundReport};
use bergquant::toric_cp1::{self, hilbert_norms, TWO_PI};
use bergquant::weights::{linspace, CurvatureBounds, RadialWeight};

use crate::config::{ExperimentConfig, PotentialSpec};
use crate::output::{Cell, Report, Trend};
use crate::CliError;

pub const SUBCOMMANDS: [&str; 12] = [
    "local-kernel",
    "demailly",
    "ot-check",
    "mt-check",
    "lemma-sphere",
    "cp1-c11",
    "berndtsson",
    "doubling",
    "lower-bound",
    "tail-mass",
    "energy",
    "measure-quantize",
];

pub fn run(name: &str, cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    match name {
        "local-kernel" => local_kernel(cfg),
        "demailly" => demailly(cfg),
        "ot-check" => ot_check(cfg),
        "mt-check" => mt_check(cfg, seed),
        "lemma-sphere" => lemma_sphere(cfg, seed),
        "cp1-c11" => cp1_c11(cfg),
        "berndtsson" => berndtsson(cfg),
        "doubling" => doubling(cfg),
        "lower-bound" => lower_bound(cfg),
        "tail-mass" => tail_mass(cfg),
        "energy" => energy_check(cfg),
        "measure-quantize" => measure_quantize(cfg),
        other => Err(CliError::config(format!("unknown subcommand `{other}`"))),
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn e1(n: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0); n];
    v[0] = c(1.0);
    v
}

fn test_potential() -> PotentialSpec {
    PotentialSpec::Test { s: 0.5, c: 1.0 }
}

fn local_kernel(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let d = cfg.domain();
    let n = d.dimension();
    let w: LocalWeight = cfg.radial_weight(&d)?.into();
    let radii = cfg.radii.clone().unwrap_or_else(|| linspace(0.0, 0.9, 10));
    let v = e1(n);
    let rows: Vec<(f64, bergquant::bergman_local::KernelValue, f64, bool)> = radii
        .par_iter()
        .map(|&r| {
            let mut z = vec![c(0.0); n];
            z[0] = c(r);
            if !d.contains(&z) {
                return Err(CliError::config(format!("radius {r} lies outside the domain")));
            }
            let (basis, _, converged) = converged_at(&d, &w, Truncation::default(), |b| {
                vec![b.log_kernel_diag(&z), b.tilde_kernel_both(&z, &v).1.ln()]
            })
            .map_err(|e| CliError::case(format!("radius {r}"), e))?;
            let kv = basis.kernel_value(&z, &v).map_err(|e| CliError::case(format!("radius {r}"), e))?;
            Ok((r, kv, basis.metric_finite_difference(&z, &v), converged))
        })
        .collect::<Result<_, _>>()?;
    let mut report = Report::new(&["radius", "degree", "converged", "kernel", "tilde_kernel", "metric", "metric_fd"]);
    for (r, kv, fd, conv) in rows {
        report.checks.push(BoundReport::equal(
            format!("metric_fd[r={r}]"),
            kv.metric,
            fd,
            bergquant::bergman_local::METRIC_FD_TOL * kv.metric.abs(),
        ));
        report.trends.push(Trend::new(format!("truncation_converged[r={r}]"), conv, ""));
        report.rows.push(vec![
            r.into(),
            Cell::Int(kv.degree as i64),
            conv.into(),
            kv.kernel.into(),
            kv.tilde_kernel.into(),
            kv.metric.into(),
            fd.into(),
        ]);
    }
    Ok(report)
}

fn demailly(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let d = cfg.domain();
    let n = d.dimension();
    let rw = cfg.radial_weight(&d)?;
    let w: LocalWeight = rw.clone().into();
    let radii = cfg.radii.clone().unwrap_or_else(|| linspace(0.0, 0.9, 41));
    let ks: Vec<u32> = cfg.k_list(&[8, 16, 32, 64, 128]).into_iter().map(|k| k as u32).collect();
    let pts: Vec<Vec<Complex64>> = radii
        .iter()
        .map(|&r| {
            let mut z = vec![c(0.0); n];
            z[0] = c(r);
            z
        })
        .collect();
    let profiles: Vec<Vec<f64>> = ks
        .par_iter()
        .map(|&k| demailly_profile(&d, &w, k, &pts).map_err(|e| CliError::case(format!("k={k}"), e)))
        .collect::<Result<_, _>>()?;
    let mut report = Report::new(&["k", "radius", "u", "u_k", "error"]);
    let mut sups = Vec::new();
    for (k, uk) in ks.iter().zip(&profiles) {
        let mut sup: f64 = 0.0;
        for ((z, r), v) in pts.iter().zip(&radii).zip(uk) {
            let u = rw.value(z);
            sup = sup.max((v - u).abs());
            report.rows.push(vec![Cell::Int(*k as i64), (*r).into(), u.into(), (*v).into(), (v - u).into()]);
        }
        sups.push(sup);
    }
    // rate sup|u_k − u| ≤ C log k / k with C fixed by the first level
    let k0 = ks[0] as f64;
    let c0 = sups[0] / (k0.ln() / k0).max(f64::MIN_POSITIVE);
    for (&k, &s) in ks.iter().zip(&sups).skip(1) {
        let kf = k as f64;
        report.checks.push(BoundReport::upper(format!("demailly_rate[k={k}]"), s, c0 * kf.ln() / kf));
    }
    report.trends.push(Trend::new("sup_error_decreasing", is_non_increasing(&sups, 0.0), fmt_list(&sups)));
    report.info.insert("rate_constant".into(), json!(c0));
    Ok(report)
}

fn ot_check(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let a_list = cfg.a_list.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 5.0]);
    let m_max = cfg.m_max.unwrap_or(3);
    let tol = cfg.tolerance.unwrap_or(1e-8);
    if a_list.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(CliError::config("a_list entries must be finite and non-negative"));
    }
    let cases: Vec<(f64, u32)> = a_list.iter().flat_map(|&a| (0..=m_max).map(move |m| (a, m))).collect();
    let results: Vec<(f64, u32, f64, BoundReport)> = cases
        .par_iter()
        .map(|&(a, m)| {
            let r = estimates::ot_tightness(a, m, tol).map_err(|e| CliError::case(format!("a={a}, m={m}"), e))?;
            Ok((a, m, estimates::ot_constant(a, m), r))
        })
        .collect::<Result<_, CliError>>()?;
    let mut report = Report::new(&["a", "m", "ot_constant", "derivative_kernel", "product"]);
    for (a, m, ca, r) in results {
        report.rows.push(vec![a.into(), Cell::Int(m as i64), ca.into(), (r.value / ca).into(), r.value.into()]);
        report.checks.push(r);
    }
    Ok(report)
}

fn mt_check(cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    let d = cfg.domain();
    let n = d.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family: Vec<LocalWeight> = Vec::new();
    for a in cfg.a_list.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]) {
        family.push(RadialWeight::gaussian(a, &d).map_err(|e| CliError::config(format!("a = {a}: {e}")))?.into());
    }
    for _ in 0..cfg.count.unwrap_or(0) {
        let w = estimates::random_radial_weight(&d, &mut rng).map_err(|e| CliError::case("random weight", e))?;
        family.push(w.into());
    }
    if cfg.planar.unwrap_or(false) {
        if n != 1 {
            return Err(CliError::config("planar weights need a one-dimensional domain"));
        }
        family.extend(estimates::planar_family().into_iter().map(LocalWeight::from));
    }
    let z = vec![c(0.0); n];
    let chk = estimates::check_theorem_mt(&d, &family, &z, &e1(n)).map_err(|e| CliError::case("family", e))?;
    let mut report = Report::new(&["weight", "a", "kernel", "tilde_kernel", "metric", "c_kernel_upper", "c_tilde_upper", "c_kernel_lower", "c_tilde_lower", "c_metric_lower", "c_metric_upper"]);
    for (i, t) in chk.per_weight.iter().enumerate() {
        let mut row = vec![Cell::Int(i as i64), t.a.into(), t.kernel.into(), t.tilde_kernel.into(), t.metric.into()];
        row.extend(t.as_array().iter().map(|x| Cell::from(*x)));
        report.rows.push(row);
    }
    for i in 0..6 {
        if let Some(cst) = chk.constants[i] {
            report.info.insert(format!("constant_{}", THEOREM_NAMES[i]), json!(cst));
            // boundedness is the claim; the spread across the family is a trend
            let cs: Vec<f64> = chk.per_weight.iter().filter_map(|t| t.as_array()[i]).collect();
            let med = bergquant::report::median(&cs);
            report.trends.push(Trend::new(
                format!("constant_stable[{}]", THEOREM_NAMES[i]),
                chk.stable[i],
                format!("max {cst:.6e}, median {med:.6e}"),
            ));
        }
    }
    report.checks.extend(chk.reports);
    Ok(report)
}

fn lemma_sphere(cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    let n = cfg.dimension.unwrap_or(2);
    if n == 0 {
        return Err(CliError::config("dimension must be positive"));
    }
    let count = cfg.count.unwrap_or(50);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new(&["index", "rho", "value", "bound", "slack"]);
    for i in 0..count {
        let f = ComplexPolynomial::random(n, 3, &mut rng);
        let rho = rng.gen_range(0.2..1.5);
        let r = estimates::check_lemma_sphere_mean(&f, rho, &mut rng).map_err(|e| CliError::case(format!("polynomial {i}"), e))?;
        report.rows.push(vec![Cell::Int(i as i64), rho.into(), r.value.into(), r.bound.into(), r.slack.into()]);
        report.checks.push(r);
    }
    let (cn, se) = if n == 1 {
        (estimates::sphere_log_constant(1), 0.0)
    } else {
        estimates::sphere_log_constant_mc(n, cfg.samples.unwrap_or(200_000), &mut rng)
    };
    report.info.insert("sphere_log_constant".into(), json!(cn));
    report.info.insert("sphere_log_constant_stderr".into(), json!(se));
    Ok(report)
}

fn cp1_c11(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.grid();
    let p = cfg.potential_or(cfg.potential.as_ref(), test_potential())?;
    let bounds = match p.bounds {
        Some(b) => b,
        None => {
            let (lo, hi) = CurvatureBounds::sampled(&p.potential, &grid);
            CurvatureBounds::new(lo, hi).map_err(|e| CliError::case(&p.label, e))?
        }
    };
    let ks = cfg.k_list(&[25, 50, 100, 200]);
    let r = toric_cp1::check_theorem_c11(&p.potential, bounds, &ks, &grid).map_err(|e| CliError::case(&p.label, e))?;
    let mut report = Report::new(&["k", "min_ratio", "max_ratio", "sup_potential_error", "constant", "m_mass", "metric_mass"]);
    for row in &r.rows {
        report.rows.push(vec![
            Cell::Int(row.k as i64),
            row.min_ratio.into(),
            row.max_ratio.into(),
            row.sup_potential_error.into(),
            row.constant.into(),
            row.m_mass.into(),
            row.metric_mass.into(),
        ]);
    }
    report.info.insert("potential".into(), json!(p.label));
    report.info.insert("a".into(), json!(bounds.a));
    report.info.insert("big_a".into(), json!(bounds.big_a));
    report.info.insert("constant".into(), json!(r.constant));
    report.trends.push(Trend::new("constant_stable", r.constant_stable, format!("{:.6e}", r.constant)));
    report.trends.push(Trend::new("potential_error_decreasing", r.potential_error_decreasing, ""));
    report.checks = r.reports;
    Ok(report)
}

fn berndtsson(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.grid();
    let phi = cfg.potential_or(cfg.potential.as_ref(), test_potential())?;
    let psi = cfg.potential_or(
        cfg.psi.as_ref(),
        PotentialSpec::Shifted {
            base: Box::new(PotentialSpec::FubiniStudy),
            by: -0.2,
        },
    )?;
    let ks = cfg.k_list(&[20, 60, 120]);
    let results: Vec<(usize, toric_cp1::BerndtssonResult, BoundReport)> = ks
        .par_iter()
        .map(|&k| {
            let case = |e| CliError::case(format!("k={k}"), e);
            let b = toric_cp1::berndtsson_check(&phi.potential, &psi.potential, k, &grid).map_err(case)?;
            let m = toric_cp1::max_comparison_check(&phi.potential, &psi.potential, k, &grid).map_err(case)?;
            Ok((k, b, m))
        })
        .collect::<Result<_, CliError>>()?;
    let mut report = Report::new(&["k", "set_intervals", "lhs", "rhs", "slack", "max_comparison_value", "max_comparison_bound"]);
    for (k, b, m) in results {
        report.rows.push(vec![
            Cell::Int(k as i64),
            Cell::Int(b.set.len() as i64),
            b.lhs.into(),
            b.rhs.into(),
            b.report.slack.into(),
            m.value.into(),
            m.bound.into(),
        ]);
        report.checks.push(b.report);
        report.checks.push(m);
    }
    report.info.insert("phi".into(), json!(phi.label));
    report.info.insert("psi".into(), json!(psi.label));
    Ok(report)
}

fn doubling(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.grid();
    let p = cfg.potential_or(cfg.potential.as_ref(), test_potential())?;
    let ks = cfg.k_list(&[10, 20, 40, 80]);
    let eps: Vec<f64> = ks
        .par_iter()
        .map(|&k| toric_cp1::doubling_epsilon(&p.potential, k, &grid).map_err(|e| CliError::case(format!("k={k}"), e)))
        .collect::<Result<_, _>>()?;
    epsilon_report(&ks, &eps, "doubling", &p.label)
}

fn lower_bound(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.grid();
    let p = cfg.potential_or(cfg.potential.as_ref(), test_potential())?;
    let a = match cfg.a {
        Some(a) => a,
        None => CurvatureBounds::sampled(&p.potential, &grid).0,
    };
    let ks = cfg.k_list(&[10, 20, 40, 80]);
    let eps: Vec<f64> = ks
        .par_iter()
        .map(|&k| {
            toric_cp1::lower_bound_epsilon(&p.potential, a, k, &grid).map_err(|e| CliError::case(format!("k={k}"), e))
        })
        .collect::<Result<_, _>>()?;
    let mut report = epsilon_report(&ks, &eps, "lower_bound", &p.label)?;
    report.info.insert("a".into(), json!(a));
    Ok(report)
}

// ε_k = 1 − min ratio; the bound itself (ratio ≥ 1 − max(ε_k, 0)) is
// asserted, monotonicity of ε_k is a trend
fn epsilon_report(ks: &[usize], eps: &[f64], name: &str, label: &str) -> Result<Report, CliError> {
    let mut report = Report::new(&["k", "min_ratio", "epsilon"]);
    for (&k, &e) in ks.iter().zip(eps) {
        report.rows.push(vec![Cell::Int(k as i64), (1.0 - e).into(), e.into()]);
        report.checks.push(BoundReport::lower(format!("{name}_min_ratio[k={k}]"), 1.0 - e, 1.0 - e.max(0.0)));
    }
    let trend = toric_cp1::epsilon_trend_report(&format!("{name}_epsilon_non_increasing"), eps);
    report.trends.push(Trend::new(trend.name.clone(), trend.pass, fmt_list(eps)));
    report.info.insert("potential".into(), json!(label));
    Ok(report)
}

fn tail_mass(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.grid();
    let p = cfg.potential_or(cfg.potential.as_ref(), PotentialSpec::LogPole { beta: 0.5 })?;
    let levels = cfg.levels.clone().unwrap_or_else(|| vec![-5.0, -2.0, 0.0]);
    let ks = cfg.k_list(&[10, 20, 40, 80]);
    let classical_measure = toric_cp1::ma_measure(&p.potential);
    let spectra: Vec<toric_cp1::QuantumSpectrum> = ks
        .par_iter()
        .map(|&k| hilbert_norms(&p.potential, k).map_err(|e| CliError::case(format!("k={k}"), e)))
        .collect::<Result<_, _>>()?;
    let mut report = Report::new(&["level", "k", "tail_mass", "classical_tail_mass", "total_mass"]);
    for &lvl in &levels {
        let set = toric_cp1::superlevel_set(|t| lvl - p.potential.relative(t), &grid);
        let classical: f64 = set
            .iter()
            .map(|&(a, b)| {
                let hi = if b.is_finite() { classical_measure.cdf(b) } else { classical_measure.total_mass() };
                let lo = if a.is_finite() { classical_measure.cdf(a) } else { 0.0 };
                hi - lo
            })
            .sum();
        for (k, spec) in ks.iter().zip(&spectra) {
            let m = toric_cp1::tail_mass_from_spectrum(spec, lvl, &grid)
                .map_err(|e| CliError::case(format!("level {lvl}, k={k}"), e))?;
            let total = TWO_PI * (*k as f64 + 1.0) / *k as f64;
            report.rows.push(vec![lvl.into(), Cell::Int(*k as i64), m.into(), classical.into(), total.into()]);
            report.checks.push(BoundReport::upper(format!("tail_mass_total[c={lvl},k={k}]"), m, total));
        }
    }
    report.info.insert("potential".into(), json!(p.label));
    Ok(report)
}

fn energy_check(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.grid();
    let p = cfg.potential_or(cfg.potential.as_ref(), test_potential())?;
    let f = cfg.perturbation.unwrap_or(LineFunction::Tanh { shift: 0.0 });
    let s = cfg.s.unwrap_or(0.2);
    let ks = cfg.k_list(&[10, 20, 40, 80, 160]);
    let conv = energy::perturbed_convergence_check(&p.potential, &f, s, &ks, &grid)
        .map_err(|e| CliError::case(format!("{} + {s}·{}", p.label, f.name()), e))?;
    let derivs: Vec<energy::DerivativeIdentity> = ks
        .par_iter()
        .map(|&k| {
            energy::derivative_identity_check(&p.potential, &f, k, &grid)
                .map_err(|e| CliError::case(format!("derivative at k={k}"), e))
        })
        .collect::<Result<_, _>>()?;
    let mut report = Report::new(&[
        "k",
        "quantum",
        "quantum_envelope",
        "classical",
        "gap",
        "derivative_quantum_residual",
        "derivative_classical_residual",
    ]);
    for (row, d) in conv.rows.iter().zip(&derivs) {
        report.rows.push(vec![
            Cell::Int(row.k as i64),
            row.quantum.into(),
            row.quantum_envelope.into(),
            row.classical.into(),
            row.gap.into(),
            (d.quantum_lhs - d.quantum_rhs).into(),
            (d.classical_lhs - d.classical_rhs).into(),
        ]);
        report.checks.extend(d.reports.iter().cloned());
    }
    report.checks.extend(conv.sandwich.iter().cloned());
    let gaps: Vec<f64> = conv.rows.iter().map(|r| r.gap).collect();
    report.trends.push(Trend::new("gap_trend", conv.trend_ok, fmt_list(&gaps)));
    report.info.insert("potential".into(), json!(p.label));
    report.info.insert("perturbation".into(), json!(f.name()));
    report.info.insert("s".into(), json!(s));
    report.info.insert("envelope_active".into(), json!(conv.envelope_active));
    report.info.insert("envelope_overshoot".into(), json!(conv.envelope_overshoot));
    Ok(report)
}

fn measure_quantize(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.grid();
    let nu = cfg.measure(MeasureSpec::TranslatedFs { shift: 1.0 })?;
    let label = nu.label();
    let functions = cfg.functions.clone().unwrap_or_else(LineFunction::weak_convergence_family);
    let ks = cfg.k_list(&[25, 50, 100, 200]);
    let solution = measure_quant::solve_calabi_yau(&nu, &grid).map_err(|e| CliError::case(&label, e))?;
    let r = measure_quant::weak_convergence_report(&nu, &functions, &ks, &grid).map_err(|e| CliError::case(&label, e))?;
    let mut report = Report::new(&["function", "k", "quantum", "exact", "error"]);
    for row in r.rows.iter().cloned() {
        report.rows.push(vec![Cell::Text(row.function), Cell::Int(row.k as i64), row.quantum.into(), row.exact.into(), row.error.into()]);
    }
    report.checks.push(BoundReport::upper("calabi_yau_roundtrip", solution.roundtrip_error, 1e-8));
    for (name, ok) in &r.minimized_at_largest {
        report.trends.push(Trend::new(format!("error_minimized_at_largest_k[{name}]"), *ok, ""));
    }
    report.info.insert("measure".into(), json!(label));
    report.info.insert("normalization".into(), json!(solution.normalization));
    Ok(report)
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(",")
}
