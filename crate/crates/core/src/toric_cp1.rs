//! Kähler quantization of S¹-invariant potentials on CP¹.
//!
//! In the affine chart with `t = log|z|²`, the monomials `z^j`, `j = 0..k`,
//! are orthogonal for every S¹-invariant Hilbert map, so the level-k Gram
//! matrix is diagonal with entries
//! `‖z^j‖² = 2π ∫ e^{jt − kφ(t)} φ_FS″(t) dt`.
//! All spectral sums below are evaluated as log-sum-exp over
//! `w_j(t) = jt − log‖z^j‖²`.

use std::f64::consts::{LN_10, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::line_fn::LineFunction;
use crate::measure_quant::RadonMeasure1D;
use crate::quadrature::{self, Integrand1D, Tolerance};
use crate::report::{constant_is_stable, is_non_increasing, BoundReport, Direction};
use crate::weights::{
    bisect, default_grid, fs_curvature, linspace, log_fs_curvature, CurvatureBounds, ToricPotential,
};

pub const TWO_PI: f64 = 2.0 * PI;
/// Norm integrands are cut where they fall this many nats below their peak.
pub const WINDOW_DROP: f64 = 30.0 * LN_10;
/// Largest admissible `|t|` of an integration window.
pub const WINDOW_LIMIT: f64 = 1e4;
const NORM_TOL: f64 = 1e-13;
// the absolute part matters for sign-changing f with ∫ f dM ≈ 0, where the
// per-panel rounding floor (~ε·mass) adds up over the hint panels
const SET_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-12,
    max_subdivisions: 20_000,
};

/// Level-k Hilbert norms `‖z^j‖²`, stored as logarithms.
#[derive(Debug, Clone)]
pub struct QuantumSpectrum {
    k: usize,
    log_norms: Vec<f64>,
    window: (f64, f64),
    potential: ToricPotential,
}

impl QuantumSpectrum {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn log_norms(&self) -> &[f64] {
        &self.log_norms
    }

    /// Union of the per-norm integration windows.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn potential(&self) -> &ToricPotential {
        &self.potential
    }

    /// `(log Σ_j e^{w_j(t)}, mean of j, variance of j)` under `p_t(j) ∝ e^{w_j(t)}`.
    pub fn moments(&self, t: f64) -> (f64, f64, f64) {
        let mut m = f64::NEG_INFINITY;
        for (j, l) in self.log_norms.iter().enumerate() {
            m = m.max(j as f64 * t - l);
        }
        let mut s = 0.0;
        let mut s1 = 0.0;
        for (j, l) in self.log_norms.iter().enumerate() {
            let p = (j as f64 * t - l - m).exp();
            s += p;
            s1 += j as f64 * p;
        }
        let mean = s1 / s;
        let mut var = 0.0;
        for (j, l) in self.log_norms.iter().enumerate() {
            let p = (j as f64 * t - l - m).exp();
            let d = j as f64 - mean;
            var += d * d * p;
        }
        (m + s.ln(), mean, var / s)
    }

    /// `log` of the M-density relative to `ω_FS` at `t`:
    /// `log(2π/k) + L(t) − kφ(t)`.
    pub fn log_m_density(&self, t: f64) -> f64 {
        let (l, _, _) = self.moments(t);
        (TWO_PI / self.k as f64).ln() + l - self.k as f64 * self.potential.value(t)
    }

    /// Hints for integrals against `M^k`: potential kinks inside the window.
    fn hints(&self) -> Vec<f64> {
        let (lo, hi) = self.window;
        let mut h: Vec<f64> = self
            .potential
            .breakpoints()
            .into_iter()
            .filter(|t| *t > lo && *t < hi)
            .collect();
        h.push(0.0);
        h
    }
}

/// Quantities of the Bergman kernel at one point of the t-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BergmanDensity {
    pub t: f64,
    /// `log K^k_φ(t)` (trace with respect to `h_FS^k`).
    pub log_kernel: f64,
    /// `P^k_φ(t) = (1/k) log K^k_φ(t)`.
    pub potential: f64,
    /// Density of `M^k_φ` relative to `ω_FS`.
    pub m_density: f64,
    /// `ω_{P^k_φ}/ω_FS`.
    pub metric_ratio: f64,
    /// `P^k_φ(t) − ϕ(t)`, computed without cancellation.
    pub potential_error: f64,
}

/// Hilbert norms `‖z^j‖² = 2π ∫ e^{jt − kφ(t)} φ_FS″(t) dt` for `j = 0..k`.
///
/// Each integrand is log-concave; it is integrated over the window where it
/// stays within [`WINDOW_DROP`] nats of its peak.
pub fn hilbert_norms(phi: &ToricPotential, k: usize) -> Result<QuantumSpectrum> {
    let (log_norms, window) = log_norms_for(&|t| phi.value(t), &phi.breakpoints(), k, 0.0)?;
    Ok(QuantumSpectrum {
        k,
        log_norms,
        window,
        potential: phi.clone(),
    })
}

/// Log-norms for the weight `φ + s·f`, which need not be ω-psh. The window
/// margin grows by `2k|s| sup|f|` because the integrands are then only
/// log-concave up to that oscillation.
pub fn perturbed_log_norms(phi: &ToricPotential, f: &LineFunction, s: f64, k: usize) -> Result<Vec<f64>> {
    let mut breaks = phi.breakpoints();
    if let LineFunction::Bump { centre, .. } = f {
        breaks.push(*centre);
    }
    let margin = 2.0 * k as f64 * s.abs() * f.sup_abs();
    Ok(log_norms_for(&|t| phi.value(t) + s * f.value(t), &breaks, k, margin)?.0)
}

fn log_norms_for(value: &dyn Fn(f64) -> f64, breaks: &[f64], k: usize, margin: f64) -> Result<(Vec<f64>, (f64, f64))> {
    if k == 0 {
        return Err(Error::invalid("level k must be positive"));
    }
    let kf = k as f64;
    let mut log_norms = Vec::with_capacity(k + 1);
    let mut window = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..=k {
        let jf = j as f64;
        let log_f = |t: f64| jf * t - kf * value(t) + log_fs_curvature(t);
        let peak = quadrature::locate_peak(&log_f, -WINDOW_LIMIT, WINDOW_LIMIT, breaks);
        if !peak.1.is_finite() {
            return Err(Error::NonConvergent {
                value: peak.1,
                error: f64::INFINITY,
                evaluations: 0,
            });
        }
        let lo = drop_point(&log_f, peak, -1.0, WINDOW_DROP + margin)?;
        let hi = drop_point(&log_f, peak, 1.0, WINDOW_DROP + margin)?;
        window.0 = window.0.min(lo);
        window.1 = window.1.max(hi);
        let hints: Vec<f64> = breaks.iter().copied().filter(|t| *t > lo && *t < hi).collect();
        let r = quadrature::integrate_exp(log_f, lo, hi, &hints, NORM_TOL)?;
        log_norms.push(TWO_PI.ln() + r.log_value);
    }
    Ok((log_norms, window))
}

// first point on one side of the peak where log_f has dropped by WINDOW_DROP
fn drop_point<F: Fn(f64) -> f64>(log_f: &F, peak: (f64, f64), dir: f64, drop: f64) -> Result<f64> {
    let (x0, v0) = peak;
    let below = |x: f64| v0 - log_f(x) >= drop;
    let mut step = 0.5;
    let mut inner = x0;
    loop {
        let x = x0 + dir * step;
        if x.abs() > WINDOW_LIMIT {
            return Err(Error::NonConvergent {
                value: x,
                error: v0 - log_f(x),
                evaluations: 0,
            });
        }
        if below(x) {
            let g = |y: f64| (v0 - log_f(y)) - drop;
            return Ok(bisect(&g, inner.min(x), inner.max(x)));
        }
        inner = x;
        step *= 2.0;
    }
}

/// All four kernel quantities at `t` from a single log-sum-exp pass.
pub fn bergman_density(spec: &QuantumSpectrum, t: f64) -> BergmanDensity {
    let kf = spec.k as f64;
    let (l, _, var) = spec.moments(t);
    let fs = crate::weights::fs_potential(t);
    let phi = spec.potential.value(t);
    BergmanDensity {
        t,
        log_kernel: l - kf * fs,
        potential: l / kf - fs,
        m_density: TWO_PI / kf * (l - kf * phi).exp(),
        metric_ratio: var / kf / fs_curvature(t),
        potential_error: l / kf - phi,
    }
}

/// `ω_{P^k_φ}/ω_FS = (1/k) Var_{p_t}(j) / φ_FS″(t)`.
pub fn bergman_metric_ratio(spec: &QuantumSpectrum, t: f64) -> f64 {
    let (_, _, var) = spec.moments(t);
    var / spec.k as f64 / fs_curvature(t)
}

/// Second differences of `Ψ = (1/k) L` divided by `φ_FS″`, the
/// finite-difference counterpart of [`bergman_metric_ratio`].
pub fn metric_ratio_finite_difference(spec: &QuantumSpectrum, t: f64, h: f64) -> f64 {
    let psi = |x: f64| spec.moments(x).0 / spec.k as f64;
    (psi(t + h) - 2.0 * psi(t) + psi(t - h)) / (h * h) / fs_curvature(t)
}

/// `∫_S f dM^k_φ` over a union of closed intervals (ends may be infinite).
pub fn integrate_m<F: Fn(f64) -> f64>(spec: &QuantumSpectrum, f: F, set: &[(f64, f64)]) -> Result<f64> {
    let (wlo, whi) = spec.window;
    let hints = spec.hints();
    let mut total = 0.0;
    for &(a, b) in set {
        let (a, b) = (a.max(wlo), b.min(whi));
        if a >= b {
            continue;
        }
        let g = |t: f64| f(t) * (spec.log_m_density(t) + TWO_PI.ln() + log_fs_curvature(t)).exp();
        let ig = Integrand1D::new(g, a, b).with_hints(hints.iter().copied());
        total += quadrature::integrate_with(&ig, SET_TOL)?.value;
    }
    Ok(total)
}

/// Total mass of `M^k_φ`; equals `2π(k+1)/k`.
pub fn m_mass(spec: &QuantumSpectrum) -> Result<f64> {
    integrate_m(spec, |_| 1.0, &[(f64::NEG_INFINITY, f64::INFINITY)])
}

/// Total mass of `ω_{P^k_φ}`; equals `2π`.
pub fn metric_mass(spec: &QuantumSpectrum) -> Result<f64> {
    let kf = spec.k as f64;
    let g = |t: f64| TWO_PI * spec.moments(t).2 / kf;
    let (lo, hi) = spec.window;
    let ig = Integrand1D::new(g, f64::NEG_INFINITY, f64::INFINITY).with_hints([lo, hi, 0.0]);
    Ok(quadrature::integrate_with(&ig, SET_TOL)?.value)
}

/// `ω_φ` pushed to the t-line: CDF `2π φ′`.
pub fn ma_measure(phi: &ToricPotential) -> RadonMeasure1D {
    RadonMeasure1D::from_potential(phi.clone())
}

/// Closed intervals where `f ≥ 0`, located by sign changes on `grid` and
/// bisection; the first and last intervals extend to `∓∞` when `f ≥ 0` at
/// the grid ends.
pub fn superlevel_set<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Vec<(f64, f64)> {
    let inside = |t: f64| f(t) >= 0.0;
    let mut out = Vec::new();
    let mut start = if inside(grid[0]) { Some(f64::NEG_INFINITY) } else { None };
    for w in grid.windows(2) {
        let (a, b) = (inside(w[0]), inside(w[1]));
        if a == b {
            continue;
        }
        // boundary point: the crossing of f through 0
        let x = bisect_to(&f, w[0], w[1], 1e-10);
        if a {
            out.push((start.take().unwrap(), x));
        } else {
            start = Some(x);
        }
    }
    if let Some(s) = start {
        out.push((s, f64::INFINITY));
    }
    out
}

fn bisect_to<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let fa_in = f(a) >= 0.0;
    while b - a > tol {
        let m = 0.5 * (a + b);
        if (f(m) >= 0.0) == fa_in {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// One row of the two-sided metric bound check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C11Row {
    pub k: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub sup_potential_error: f64,
    /// Smallest `C` putting this level inside the bracket.
    pub constant: f64,
    pub m_mass: f64,
    pub metric_mass: f64,
}

#[derive(Debug, Clone)]
pub struct C11Report {
    pub bounds: CurvatureBounds,
    pub rows: Vec<C11Row>,
    /// Extracted constant: worst level.
    pub constant: f64,
    pub constant_stable: bool,
    pub potential_error_decreasing: bool,
    pub reports: Vec<BoundReport>,
}

/// Two-sided bounds `a²/(C(1+A)) ≤ ω_{P^k_φ}/ω_FS ≤ C(1+A²)/a` over
/// `k_list` and the decay of `sup|P^k_φ − ϕ|`, both on `grid`.
pub fn check_theorem_c11(
    phi: &ToricPotential,
    bounds: CurvatureBounds,
    k_list: &[usize],
    grid: &[f64],
) -> Result<C11Report> {
    if !bounds.holds_for(phi, grid) {
        let (lo, _) = CurvatureBounds::sampled(phi, grid);
        return Err(Error::Uncertified {
            requested: bounds.a,
            certified: lo,
        });
    }
    let (a, big_a) = (bounds.a, bounds.big_a);
    let lower_shape = a * a / (1.0 + big_a);
    let upper_shape = (1.0 + big_a * big_a) / a;
    let mut rows = Vec::new();
    for &k in k_list {
        let spec = hilbert_norms(phi, k)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut err: f64 = 0.0;
        for &t in grid {
            let d = bergman_density(&spec, t);
            lo = lo.min(d.metric_ratio);
            hi = hi.max(d.metric_ratio);
            err = err.max(d.potential_error.abs());
        }
        rows.push(C11Row {
            k,
            min_ratio: lo,
            max_ratio: hi,
            sup_potential_error: err,
            constant: (lower_shape / lo).max(hi / upper_shape),
            m_mass: m_mass(&spec)?,
            metric_mass: metric_mass(&spec)?,
        });
    }
    let cs: Vec<f64> = rows.iter().map(|r| r.constant).collect();
    let constant = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let errs: Vec<f64> = rows.iter().map(|r| r.sup_potential_error).collect();
    let mut reports = Vec::new();
    for r in &rows {
        reports.push(BoundReport::lower(format!("ratio_lower[k={}]", r.k), r.min_ratio, lower_shape / constant));
        reports.push(BoundReport::upper(format!("ratio_upper[k={}]", r.k), r.max_ratio, constant * upper_shape));
    }
    Ok(C11Report {
        bounds,
        rows,
        constant,
        constant_stable: constant_is_stable(&cs),
        potential_error_decreasing: is_non_increasing(&errs, 0.0),
        reports,
    })
}

/// Outcome of the quantized comparison principle for one pair and level.
#[derive(Debug, Clone)]
pub struct BerndtssonResult {
    /// `{ψ ≤ φ}` as closed intervals.
    pub set: Vec<(f64, f64)>,
    /// `∫_{ψ≤φ} M^k_φ`
    pub lhs: f64,
    /// `∫_{ψ≤φ} M^k_ψ`
    pub rhs: f64,
    pub report: BoundReport,
}

/// `∫_{ψ≤φ} M^k_φ ≤ ∫_{ψ≤φ} M^k_ψ`.
pub fn berndtsson_check(phi: &ToricPotential, psi: &ToricPotential, k: usize, grid: &[f64]) -> Result<BerndtssonResult> {
    let sp = hilbert_norms(phi, k)?;
    let ss = hilbert_norms(psi, k)?;
    berndtsson_from_spectra(&sp, &ss, grid)
}

pub fn berndtsson_from_spectra(sp: &QuantumSpectrum, ss: &QuantumSpectrum, grid: &[f64]) -> Result<BerndtssonResult> {
    if sp.k != ss.k {
        return Err(Error::LevelMismatch(sp.k, ss.k));
    }
    let (phi, psi) = (sp.potential.clone(), ss.potential.clone());
    let set = superlevel_set(|t| phi.relative(t) - psi.relative(t), grid);
    let lhs = integrate_m(sp, |_| 1.0, &set)?;
    let rhs = integrate_m(ss, |_| 1.0, &set)?;
    let report = BoundReport::upper(format!("berndtsson[k={}]", sp.k), lhs, rhs);
    Ok(BerndtssonResult { set, lhs, rhs, report })
}

/// `1_{ψ≥φ} M^k_ψ ≤ 1_{ψ≥φ} M^k_{max(φ,ψ)}` on the grid; the report carries
/// the worst relative slack.
pub fn max_comparison_check(phi: &ToricPotential, psi: &ToricPotential, k: usize, grid: &[f64]) -> Result<BoundReport> {
    let ss = hilbert_norms(psi, k)?;
    let sm = hilbert_norms(&ToricPotential::max(phi, psi), k)?;
    max_comparison_from_spectra(phi, &ss, &sm, grid)
}

/// As [`max_comparison_check`], with the spectra of `ψ` and `max(φ, ψ)`
/// already computed.
pub fn max_comparison_from_spectra(
    phi: &ToricPotential,
    ss: &QuantumSpectrum,
    sm: &QuantumSpectrum,
    grid: &[f64],
) -> Result<BoundReport> {
    if ss.k != sm.k {
        return Err(Error::LevelMismatch(ss.k, sm.k));
    }
    let k = ss.k;
    let psi = &ss.potential;
    let mut worst = f64::INFINITY;
    let mut at = (0.0, 0.0);
    for &t in grid {
        if psi.relative(t) >= phi.relative(t) {
            // compare in log space: log M_max − log M_ψ ≥ 0
            let (lp, lm) = (ss.log_m_density(t), sm.log_m_density(t));
            if lm - lp < worst {
                worst = lm - lp;
                at = (lp.exp(), lm.exp());
            }
        }
    }
    Ok(BoundReport::upper(format!("max_comparison[k={k}]"), at.0, at.1))
}

/// `ε_k = 1 − min_t 2·M^{2k}_{φ/2}/M^k_φ`, where `φ/2` halves the relative
/// potential.
pub fn doubling_epsilon(phi: &ToricPotential, k: usize, grid: &[f64]) -> Result<f64> {
    let s1 = hilbert_norms(phi, k)?;
    let s2 = hilbert_norms(&phi.halved(), 2 * k)?;
    let mut min = f64::INFINITY;
    for &t in grid {
        let r = 2.0 * (s2.log_m_density(t) - s1.log_m_density(t)).exp();
        min = min.min(r);
    }
    Ok(1.0 - min)
}

pub fn doubling_check(phi: &ToricPotential, k: usize, grid: &[f64]) -> Result<BoundReport> {
    let eps = doubling_epsilon(phi, k, grid)?;
    Ok(BoundReport::lower(format!("doubling_min_ratio[k={k}]"), 1.0 - eps, 1.0 - eps.max(0.0)))
}

/// `ε_k = 1 − min_t M^k_φ-density / a`, with `a` certified against the
/// sampled curvature ratio.
pub fn lower_bound_epsilon(phi: &ToricPotential, a: f64, k: usize, grid: &[f64]) -> Result<f64> {
    let (certified, _) = CurvatureBounds::sampled(phi, grid);
    if a > certified * (1.0 + 1e-12) {
        return Err(Error::Uncertified { requested: a, certified });
    }
    let s = hilbert_norms(phi, k)?;
    let mut min = f64::INFINITY;
    for &t in grid {
        min = min.min(s.log_m_density(t).exp() / a);
    }
    Ok(1.0 - min)
}

pub fn lower_bound_check(phi: &ToricPotential, a: f64, k: usize, grid: &[f64]) -> Result<BoundReport> {
    let eps = lower_bound_epsilon(phi, a, k, grid)?;
    Ok(BoundReport::lower(format!("lower_bound_min_ratio[k={k}]"), 1.0 - eps, 1.0 - eps.max(0.0)))
}

/// `∫_{ϕ≤c} M^k_φ`.
pub fn tail_mass(phi: &ToricPotential, c: f64, k: usize, grid: &[f64]) -> Result<f64> {
    let spec = hilbert_norms(phi, k)?;
    tail_mass_from_spectrum(&spec, c, grid)
}

pub fn tail_mass_from_spectrum(spec: &QuantumSpectrum, c: f64, grid: &[f64]) -> Result<f64> {
    let phi = spec.potential.clone();
    // extend the grid over the whole window so slow tails are seen
    let (lo, hi) = spec.window;
    let mut g: Vec<f64> = grid.to_vec();
    if lo < g[0] {
        g.splice(0..0, linspace(lo, g[0], 64).into_iter().take(63));
    }
    if hi > *g.last().unwrap() {
        g.extend(linspace(*g.last().unwrap(), hi, 64).into_iter().skip(1));
    }
    let set = superlevel_set(|t| c - phi.relative(t), &g);
    integrate_m(spec, |_| 1.0, &set)
}

/// Seeded convex spline on `[-10, 10]` with slopes 0 and 1 at the ends
/// (full mass) and a random offset.
pub fn random_spline_potential(rng: &mut ChaCha8Rng) -> Result<ToricPotential> {
    let n = 21;
    let knots = linspace(-10.0, 10.0, n);
    let mut inner: Vec<f64> = (0..n - 2).map(|_| rng.gen::<f64>()).collect();
    inner.sort_by(f64::total_cmp);
    let mut slopes = vec![0.0];
    slopes.extend(inner);
    slopes.push(1.0);
    let offset = rng.gen_range(-1.0..1.0);
    ToricPotential::spline_from_slopes(knots, slopes, offset)
}

/// Trend report helper for ε sequences.
pub fn epsilon_trend_report(name: &str, eps: &[f64]) -> BoundReport {
    let worst = eps.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    BoundReport::with_tolerance(name, worst.max(-f64::MAX), 0.0, Direction::Upper, 1e-12)
}

/// The default t-grid.
pub fn grid() -> Vec<f64> {
    default_grid()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_test_potential, TestPotentialParams};

    fn log_beta_norm(k: usize, j: usize) -> f64 {
        let lf = |n: usize| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
        TWO_PI.ln() + lf(j) + lf(k - j) - lf(k + 1)
    }

    #[test]
    fn fs_norms_are_beta_integrals() {
        let fs = ToricPotential::fubini_study();
        for k in [1, 5, 50] {
            let s = hilbert_norms(&fs, k).unwrap();
            for j in 0..=k {
                assert!((s.log_norms()[j] - log_beta_norm(k, j)).abs() < 1e-12, "k={k} j={j}");
            }
        }
        let s = hilbert_norms(&fs, 1).unwrap();
        assert!((s.log_norms()[0].exp() - PI).abs() < 1e-12);
    }

    #[test]
    fn constant_shift_scales_norms() {
        let tp = make_test_potential(TestPotentialParams::default()).unwrap().potential;
        let k = 20;
        let c = 0.7;
        let a = hilbert_norms(&tp, k).unwrap();
        let b = hilbert_norms(&tp.shifted(c), k).unwrap();
        for j in 0..=k {
            assert!((b.log_norms()[j] - a.log_norms()[j] + k as f64 * c).abs() < 1e-12);
        }
        for t in [-3.0, 0.0, 2.5] {
            let (da, db) = (bergman_density(&a, t), bergman_density(&b, t));
            assert!((da.m_density - db.m_density).abs() < 1e-12 * da.m_density);
            assert!((da.metric_ratio - db.metric_ratio).abs() < 1e-12 * da.metric_ratio);
            assert!((da.potential_error - db.potential_error).abs() < 1e-12);
        }
    }

    #[test]
    fn fs_density_is_constant() {
        let fs = ToricPotential::fubini_study();
        let k = 5;
        let s = hilbert_norms(&fs, k).unwrap();
        for t in [-30.0, -1.0, 0.0, 4.0, 30.0] {
            let d = bergman_density(&s, t);
            assert!((d.log_kernel.exp() - 6.0 / TWO_PI).abs() < 1e-12);
            assert!((d.m_density - 6.0 / 5.0).abs() < 1e-12);
            assert!((d.metric_ratio - 1.0).abs() < 1e-10);
        }
        let (_, _, var) = s.moments(0.0);
        assert!((var - 1.25).abs() < 1e-12);
    }

    #[test]
    fn masses() {
        let tp = make_test_potential(TestPotentialParams::default()).unwrap().potential;
        for k in [3, 30] {
            let s = hilbert_norms(&tp, k).unwrap();
            let m = m_mass(&s).unwrap();
            assert!((m - TWO_PI * (k as f64 + 1.0) / k as f64).abs() < 1e-9);
            assert!((metric_mass(&s).unwrap() - TWO_PI).abs() < 1e-9);
        }
    }

    #[test]
    fn metric_ratio_matches_second_differences() {
        let tp = make_test_potential(TestPotentialParams::default()).unwrap().potential;
        let s = hilbert_norms(&tp, 40).unwrap();
        for t in linspace(-5.0, 5.0, 11) {
            let exact = bergman_metric_ratio(&s, t);
            let fd = metric_ratio_finite_difference(&s, t, 1e-3);
            assert!((exact - fd).abs() < 1e-5 * exact, "t={t}: {exact} vs {fd}");
        }
    }

    #[test]
    fn superlevel_sets() {
        let g = linspace(-10.0, 10.0, 201);
        let set = superlevel_set(|t| 1.0 - t * t, &g);
        assert_eq!(set.len(), 1);
        assert!((set[0].0 + 1.0).abs() < 1e-9 && (set[0].1 - 1.0).abs() < 1e-9);
        let all = superlevel_set(|_| 0.0, &g);
        assert_eq!(all, vec![(f64::NEG_INFINITY, f64::INFINITY)]);
        let tails = superlevel_set(|t| t * t - 4.0, &g);
        assert_eq!(tails.len(), 2);
    }

    #[test]
    fn berndtsson_trivial_cases() {
        let tp = make_test_potential(TestPotentialParams::default()).unwrap().potential;
        let g = grid();
        let r = berndtsson_check(&tp, &tp, 10, &g).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-12);
        let r = berndtsson_check(&tp, &tp.shifted(-0.3), 10, &g).unwrap();
        let total = TWO_PI * 11.0 / 10.0;
        assert!((r.lhs - total).abs() < 1e-9 && (r.rhs - total).abs() < 1e-9);
        assert!(r.report.pass);
    }

    #[test]
    fn fs_doubling_and_lower_bound_closed_forms() {
        let fs = ToricPotential::fubini_study();
        let g = grid();
        let eps = doubling_epsilon(&fs, 10, &g).unwrap();
        assert!((1.0 - eps - 21.0 / 11.0).abs() < 1e-12);
        let eps = lower_bound_epsilon(&fs, 1.0, 10, &g).unwrap();
        assert!((eps + 0.1).abs() < 1e-12);
        assert!(matches!(
            lower_bound_epsilon(&fs, 1.5, 10, &g),
            Err(Error::Uncertified { .. })
        ));
    }

    #[test]
    fn tail_mass_extremes() {
        let tp = make_test_potential(TestPotentialParams::default()).unwrap().potential;
        let g = grid();
        let k = 12;
        assert_eq!(tail_mass(&tp, -10.0, k, &g).unwrap(), 0.0);
        let full = tail_mass(&tp, 10.0, k, &g).unwrap();
        assert!((full - TWO_PI * 13.0 / 12.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_potential_quantizes() {
        let p = ToricPotential::log_pole(0.5).unwrap();
        let s = hilbert_norms(&p, 20).unwrap();
        assert!(s.window().0 < -40.0);
        assert!((m_mass(&s).unwrap() - TWO_PI * 21.0 / 20.0).abs() < 1e-8);
    }
}
