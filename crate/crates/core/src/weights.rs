//! Plurisubharmonic weights on Reinhardt model domains and S¹-invariant
//! ω-psh potentials on CP¹.
//!
//! Conventions (fixed, not configurable): Lebesgue measure on ℂⁿ, the real
//! Laplacian normalised so that Δ|z|² = 4n, and ω_FS = i∂∂̄ log(1 + |z|²)
//! with total mass 2π. On CP¹ an S¹-invariant potential is a convex function
//! φ of `t = log|z|²`; the background potential is `φ_FS(t) = log(1 + e^t)`
//! and the relative potential is `ϕ = φ − φ_FS`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line_fn::sigmoid;

/// Default t-grid: `[-40, 40]` with 4001 knots.
pub const GRID_LO: f64 = -40.0;
pub const GRID_HI: f64 = 40.0;
pub const GRID_KNOTS: usize = 4001;

/// `log(1 + e^t)` without overflow.
pub fn fs_potential(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `φ_FS′(t) = e^t / (1 + e^t)`.
pub fn fs_slope(t: f64) -> f64 {
    sigmoid(t)
}

/// `φ_FS″(t) = e^t / (1 + e^t)²`.
pub fn fs_curvature(t: f64) -> f64 {
    log_fs_curvature(t).exp()
}

/// `log φ_FS″(t) = −|t| − 2 log(1 + e^{−|t|})`.
pub fn log_fs_curvature(t: f64) -> f64 {
    -t.abs() - 2.0 * (-t.abs()).exp().ln_1p()
}

/// Evenly spaced grid.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn default_grid() -> Vec<f64> {
    linspace(GRID_LO, GRID_HI, GRID_KNOTS)
}

// ---------------------------------------------------------------------------
// Reinhardt domains and radial weights

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReinhardtDomain {
    Polydisk { radii: Vec<f64> },
    Ball { radius: f64, dimension: usize },
}

impl ReinhardtDomain {
    pub fn unit_polydisk(n: usize) -> Self {
        ReinhardtDomain::Polydisk {
            radii: vec![1.0; n],
        }
    }

    pub fn unit_disk() -> Self {
        Self::unit_polydisk(1)
    }

    pub fn polydisk(radius: f64, n: usize) -> Self {
        ReinhardtDomain::Polydisk {
            radii: vec![radius; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReinhardtDomain::Polydisk { radii } => {
                if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
                    return Err(Error::invalid("polydisk radii must be positive and finite"));
                }
            }
            ReinhardtDomain::Ball { radius, dimension } => {
                if *dimension == 0 || !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::invalid("ball needs n ≥ 1 and a positive radius"));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self {
            ReinhardtDomain::Polydisk { radii } => radii.len(),
            ReinhardtDomain::Ball { dimension, .. } => *dimension,
        }
    }

    /// Largest value of `|z_i|²` on the closure, per coordinate.
    pub fn coordinate_extent(&self) -> Vec<f64> {
        match self {
            ReinhardtDomain::Polydisk { radii } => radii.iter().map(|r| r * r).collect(),
            ReinhardtDomain::Ball { radius, dimension } => vec![radius * radius; *dimension],
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        match self {
            ReinhardtDomain::Polydisk { radii } => {
                z.len() == radii.len() && z.iter().zip(radii).all(|(z, r)| z.norm() < *r)
            }
            ReinhardtDomain::Ball { radius, dimension } => {
                z.len() == *dimension && z.iter().map(|z| z.norm_sqr()).sum::<f64>() < radius * radius
            }
        }
    }
}

/// A profile `g` of a radial weight `g(|z|²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `Σ c_i s^i`
    Polynomial { coefficients: Vec<f64> },
    /// `scale · log(1 + s)`
    LogOnePlus { scale: f64 },
    /// `scale · (e^{rate·s} − 1)`
    Exponential { scale: f64, rate: f64 },
}

impl Profile {
    pub fn zero() -> Self {
        Profile::Polynomial {
            coefficients: Vec::new(),
        }
    }

    pub fn linear(a: f64) -> Self {
        Profile::Polynomial {
            coefficients: vec![0.0, a],
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Profile::Polynomial { coefficients } => Profile::Polynomial {
                coefficients: coefficients.iter().map(|c| c * k).collect(),
            },
            Profile::LogOnePlus { scale } => Profile::LogOnePlus { scale: scale * k },
            Profile::Exponential { scale, rate } => Profile::Exponential {
                scale: scale * k,
                rate: *rate,
            },
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            Profile::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
            Profile::LogOnePlus { scale } => scale * s.ln_1p(),
            Profile::Exponential { scale, rate } => scale * (rate * s).exp_m1(),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Profile::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * s + i as f64 * c),
            Profile::LogOnePlus { scale } => scale / (1.0 + s),
            Profile::Exponential { scale, rate } => scale * rate * (rate * s).exp(),
        }
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        match self {
            Profile::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * s + (i * (i - 1)) as f64 * c),
            Profile::LogOnePlus { scale } => -scale / (1.0 + s).powi(2),
            Profile::Exponential { scale, rate } => scale * rate * rate * (rate * s).exp(),
        }
    }

    /// `∂∂̄ g(|z|²) = g′(s) + s g″(s)` at `s = |z|²`.
    pub fn levi(&self, s: f64) -> f64 {
        self.derivative(s) + s * self.second_derivative(s)
    }

    /// Slope `a` if the profile is exactly `a·s`.
    pub fn linear_slope(&self) -> Option<f64> {
        match self {
            Profile::Polynomial { coefficients } => {
                let mut c = coefficients.clone();
                while c.last() == Some(&0.0) {
                    c.pop();
                }
                match c.as_slice() {
                    [] => Some(0.0),
                    [c0] if *c0 == 0.0 => Some(0.0),
                    [c0, a] if *c0 == 0.0 => Some(*a),
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

const BOUND_SAMPLES: usize = 2001;

/// A product-radial weight `u(z) = Σ g_i(|z_i|²)` with its declared
/// Levi-form lower bound and Laplacian supremum on a given domain.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWeight {
    profiles: Vec<Profile>,
    extent: Vec<f64>,
    declared_lower_bound: f64,
    declared_laplacian_sup: f64,
}

impl RadialWeight {
    /// Builds the weight and certifies its bounds on `domain` by sampling the
    /// profile derivatives on a grid of each `[0, R_i²]`.
    pub fn new(profiles: Vec<Profile>, domain: &ReinhardtDomain) -> Result<Self> {
        domain.validate()?;
        if profiles.len() != domain.dimension() {
            return Err(Error::invalid(format!(
                "{} profiles for a domain of dimension {}",
                profiles.len(),
                domain.dimension()
            )));
        }
        let extent = domain.coordinate_extent();
        let mut lower = f64::INFINITY;
        let mut lap = 0.0;
        for (p, &s_max) in profiles.iter().zip(&extent) {
            let (lo, hi) = levi_range(p, s_max);
            if lo < -1e-12 {
                return Err(Error::invalid(format!(
                    "profile {p:?} is not plurisubharmonic (Levi form {lo})"
                )));
            }
            lower = lower.min(lo);
            lap += 4.0 * hi;
        }
        Ok(Self {
            profiles,
            extent,
            declared_lower_bound: lower.max(0.0),
            declared_laplacian_sup: lap,
        })
    }

    /// `a|z|²` in dimension `n`.
    pub fn gaussian(a: f64, domain: &ReinhardtDomain) -> Result<Self> {
        Self::new(vec![Profile::linear(a); domain.dimension()], domain)
    }

    pub fn zero(domain: &ReinhardtDomain) -> Result<Self> {
        Self::gaussian(0.0, domain)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            profiles: self.profiles.iter().map(|p| p.scaled(k)).collect(),
            extent: self.extent.clone(),
            declared_lower_bound: self.declared_lower_bound * k,
            declared_laplacian_sup: self.declared_laplacian_sup * k,
        }
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn dimension(&self) -> usize {
        self.profiles.len()
    }

    pub fn declared_lower_bound(&self) -> f64 {
        self.declared_lower_bound
    }

    pub fn declared_laplacian_sup(&self) -> f64 {
        self.declared_laplacian_sup
    }

    pub fn value(&self, z: &[Complex64]) -> f64 {
        self.profiles
            .iter()
            .zip(z)
            .map(|(p, z)| p.value(z.norm_sqr()))
            .sum()
    }

    /// Real Laplacian at `z` from the profile derivatives.
    pub fn laplacian(&self, z: &[Complex64]) -> f64 {
        self.profiles
            .iter()
            .zip(z)
            .map(|(p, z)| 4.0 * p.levi(z.norm_sqr()))
            .sum()
    }

    /// Common slope `a` when `u = a|z|²`.
    pub fn isotropic_slope(&self) -> Option<f64> {
        let first = self.profiles.first()?.linear_slope()?;
        self.profiles
            .iter()
            .all(|p| p.linear_slope() == Some(first))
            .then_some(first)
    }

    /// Re-samples the declared bounds on a finer grid.
    pub fn verify_declared_bounds(&self, samples: usize) -> bool {
        let mut lower = f64::INFINITY;
        let mut lap = 0.0;
        for (p, &s_max) in self.profiles.iter().zip(&self.extent) {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in linspace(0.0, s_max, samples) {
                let l = p.levi(s);
                lo = lo.min(l);
                hi = hi.max(l);
            }
            lower = lower.min(lo);
            lap += 4.0 * hi;
        }
        let tol = 1e-9 * (1.0 + lap.abs());
        lower >= self.declared_lower_bound - tol && lap <= self.declared_laplacian_sup + tol
    }
}

fn levi_range(p: &Profile, s_max: f64) -> (f64, f64) {
    if let Some(a) = p.linear_slope() {
        return (a, a);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in linspace(0.0, s_max, BOUND_SAMPLES) {
        let l = p.levi(s);
        lo = lo.min(l);
        hi = hi.max(l);
    }
    (lo, hi)
}

/// A (possibly non-radial) weight on a disk in ℂ.
#[derive(Clone)]
pub struct PlanarWeight {
    label: String,
    evaluator: Arc<dyn Fn(Complex64) -> f64 + Send + Sync>,
    smooth: bool,
    levi_lower: Option<f64>,
}

impl std::fmt::Debug for PlanarWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlanarWeight")
            .field("label", &self.label)
            .field("smooth", &self.smooth)
            .field("levi_lower", &self.levi_lower)
            .finish()
    }
}

pub const PLANAR_FD_STEP: f64 = 1e-4;

impl PlanarWeight {
    pub fn new(
        label: impl Into<String>,
        evaluator: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            evaluator: Arc::new(evaluator),
            smooth: true,
            levi_lower: None,
        }
    }

    /// `a|z|² + ε·Re(z²)`; the harmonic term leaves `∂∂̄u = a`.
    pub fn gaussian_harmonic(a: f64, eps: f64) -> Self {
        let mut w = Self::new(format!("{a}|z|^2+{eps}Re(z^2)"), move |z: Complex64| {
            a * z.norm_sqr() + eps * (z * z).re
        });
        w.levi_lower = Some(a);
        w
    }

    /// `c·Re z` (harmonic).
    pub fn real_part(c: f64) -> Self {
        let mut w = Self::new(format!("{c}Re(z)"), move |z: Complex64| c * z.re);
        w.levi_lower = Some(0.0);
        w
    }

    pub fn with_levi_lower(mut self, a: f64) -> Self {
        self.levi_lower = Some(a);
        self
    }

    pub fn with_smooth(mut self, smooth: bool) -> Self {
        self.smooth = smooth;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn levi_lower(&self) -> Option<f64> {
        self.levi_lower
    }

    pub fn value(&self, z: Complex64) -> f64 {
        (self.evaluator)(z)
    }

    /// Five-point real Laplacian with step [`PLANAR_FD_STEP`].
    pub fn laplacian(&self, z: Complex64) -> f64 {
        let h = PLANAR_FD_STEP;
        let c = self.value(z);
        let s = self.value(z + h)
            + self.value(z - h)
            + self.value(z + Complex64::new(0.0, h))
            + self.value(z - Complex64::new(0.0, h));
        (s - 4.0 * c) / (h * h)
    }

    fn sample_disk(centre: Complex64, radius: f64) -> impl Iterator<Item = Complex64> {
        (0..=24).flat_map(move |i| {
            let r = radius * i as f64 / 24.0;
            let m = if i == 0 { 1 } else { 8 * i };
            (0..m).map(move |j| {
                centre + Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / m as f64)
            })
        })
    }

    /// Discrete-Laplacian spot check on a polar grid.
    pub fn is_subharmonic_on(&self, centre: Complex64, radius: f64, tol: f64) -> bool {
        Self::sample_disk(centre, radius * (1.0 - 2.0 * PLANAR_FD_STEP)).all(|z| self.laplacian(z) >= -tol)
    }

    pub fn laplacian_sup(&self, centre: Complex64, radius: f64) -> f64 {
        Self::sample_disk(centre, radius * (1.0 - 2.0 * PLANAR_FD_STEP))
            .map(|z| self.laplacian(z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean of `u` over the circle `|ζ − centre| = ρ` (periodic trapezoid).
    pub fn circle_mean(&self, centre: Complex64, rho: f64) -> f64 {
        const M: usize = 256;
        let s: f64 = (0..M)
            .map(|j| self.value(centre + Complex64::from_polar(rho, std::f64::consts::TAU * j as f64 / M as f64)))
            .sum();
        s / M as f64
    }
}

// ---------------------------------------------------------------------------
// Toric potentials on CP¹

/// Convex spline with continuous, piecewise-linear slope: `φ′` is stored at
/// the knots and interpolated linearly, so `φ` is piecewise quadratic and
/// `φ″` piecewise constant.
#[derive(Debug, Clone)]
pub struct ConvexSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl ConvexSpline {
    fn locate(&self, t: f64) -> usize {
        // index i with knots[i] <= t < knots[i+1]
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn value(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return self.values[0] + self.slopes[0] * (t - self.knots[0]);
        }
        if t >= self.knots[n - 1] {
            return self.values[n - 1] + self.slopes[n - 1] * (t - self.knots[n - 1]);
        }
        let i = self.locate(t);
        let h = self.knots[i + 1] - self.knots[i];
        let d = t - self.knots[i];
        self.values[i] + self.slopes[i] * d + (self.slopes[i + 1] - self.slopes[i]) * d * d / (2.0 * h)
    }

    fn slope(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return self.slopes[0];
        }
        if t >= self.knots[n - 1] {
            return self.slopes[n - 1];
        }
        let i = self.locate(t);
        let h = self.knots[i + 1] - self.knots[i];
        self.slopes[i] + (self.slopes[i + 1] - self.slopes[i]) * (t - self.knots[i]) / h
    }

    fn curvature(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t < self.knots[0] || t >= self.knots[n - 1] {
            return 0.0;
        }
        let i = self.locate(t);
        (self.slopes[i + 1] - self.slopes[i]) / (self.knots[i + 1] - self.knots[i])
    }
}

/// Convex piecewise-linear potential (the output of envelopes). Its
/// Monge–Ampère measure is atomic, concentrated at the interior knots.
#[derive(Debug, Clone)]
pub struct PolygonalPotential {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>, // slopes[i] on [knots[i], knots[i+1]]
}

impl PolygonalPotential {
    fn locate(&self, t: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn value(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t >= self.knots[n - 1] {
            return self.values[n - 1] + self.slopes[n - 2] * (t - self.knots[n - 1]);
        }
        let i = if t <= self.knots[0] { 0 } else { self.locate(t) };
        self.values[i] + self.slopes[i] * (t - self.knots[i])
    }

    fn slope(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t < self.knots[0] {
            return self.slopes[0];
        }
        if t >= self.knots[n - 1] {
            return self.slopes[n - 2];
        }
        self.slopes[self.locate(t)]
    }
}

#[derive(Debug)]
enum Repr {
    Mixture(Vec<(f64, f64)>),
    Spline(ConvexSpline),
    Polygonal(PolygonalPotential),
    LogPole { beta: f64 },
    Max {
        a: ToricPotential,
        b: ToricPotential,
        crossings: Vec<f64>,
    },
    Blend {
        base: ToricPotential,
        lambda: f64,
        shift: f64,
    },
}

/// An S¹-invariant ω-psh potential on CP¹, stored as the total convex
/// function φ(t) with slopes in `[0, 1]`. Cheap to clone.
#[derive(Debug, Clone)]
pub struct ToricPotential(Arc<Repr>);

const SLOPE_TOL: f64 = 1e-12;

impl ToricPotential {
    /// φ = φ_FS, i.e. ϕ ≡ 0.
    pub fn fubini_study() -> Self {
        ToricPotential(Arc::new(Repr::Mixture(vec![(1.0, 0.0)])))
    }

    /// `φ(t) = Σ w_i φ_FS(t − c_i)` with `w_i ≥ 0`, `Σ w_i = 1`.
    pub fn mixture(terms: Vec<(f64, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::SlopeViolation("empty mixture".into()));
        }
        if terms.iter().any(|(w, c)| !(*w >= 0.0) || !c.is_finite()) {
            return Err(Error::SlopeViolation(
                "mixture weights must be non-negative and shifts finite".into(),
            ));
        }
        let total: f64 = terms.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::SlopeViolation(format!(
                "mixture weights sum to {total}, slopes would leave [0, 1]"
            )));
        }
        Ok(ToricPotential(Arc::new(Repr::Mixture(terms))))
    }

    /// `φ_FS + ϕ/2`-style blends: `φ_FS + λ(φ − φ_FS) + shift`, `λ ∈ [0, 1]`.
    pub fn blend(&self, lambda: f64, shift: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) || !shift.is_finite() {
            return Err(Error::SlopeViolation(format!(
                "blend factor {lambda} outside [0, 1]"
            )));
        }
        Ok(ToricPotential(Arc::new(Repr::Blend {
            base: self.clone(),
            lambda,
            shift,
        })))
    }

    /// `ϕ + c`.
    pub fn shifted(&self, c: f64) -> Self {
        ToricPotential(Arc::new(Repr::Blend {
            base: self.clone(),
            lambda: 1.0,
            shift: c,
        }))
    }

    /// Relative potential halved: `φ_FS + ϕ/2`.
    pub fn halved(&self) -> Self {
        self.blend(0.5, 0.0).expect("1/2 is a valid blend factor")
    }

    /// `ϕ(t) = −β log(1 + log(1 + e^{−t}))`: full mass, zero Lelong
    /// numbers, unbounded below as `t → −∞`. Needs `0 < β ≤ 1`.
    pub fn log_pole(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::SlopeViolation(format!(
                "log-pole strength {beta} must lie in (0, 1]"
            )));
        }
        Ok(ToricPotential(Arc::new(Repr::LogPole { beta })))
    }

    /// Pointwise maximum (still convex with slopes in `[0, 1]`).
    pub fn max(a: &ToricPotential, b: &ToricPotential) -> Self {
        let diff = |t: f64| a.relative(t) - b.relative(t);
        let mut crossings = Vec::new();
        let grid = linspace(-60.0, 60.0, 12001);
        for w in grid.windows(2) {
            let (d0, d1) = (diff(w[0]), diff(w[1]));
            if d0 == 0.0 {
                continue;
            }
            if d1 == 0.0 {
                crossings.push(w[1]);
            } else if d0.signum() != d1.signum() {
                crossings.push(bisect(&diff, w[0], w[1]));
            }
        }
        ToricPotential(Arc::new(Repr::Max {
            a: a.clone(),
            b: b.clone(),
            crossings,
        }))
    }

    /// Spline from knot slopes and the value at the first knot; values by
    /// cumulative trapezoidal integration of the slope.
    pub fn spline_from_slopes(knots: Vec<f64>, slopes: Vec<f64>, value0: f64) -> Result<Self> {
        check_knots(&knots)?;
        if slopes.len() != knots.len() {
            return Err(Error::invalid("knots and slopes differ in length"));
        }
        check_slopes(&knots, &slopes)?;
        let mut values = Vec::with_capacity(knots.len());
        values.push(value0);
        for i in 1..knots.len() {
            let h = knots[i] - knots[i - 1];
            values.push(values[i - 1] + 0.5 * h * (slopes[i - 1] + slopes[i]));
        }
        Ok(ToricPotential(Arc::new(Repr::Spline(ConvexSpline {
            knots,
            values,
            slopes,
        }))))
    }

    /// Spline fitted to sampled values `(t_i, φ(t_i))`: knot slopes are the
    /// averaged adjacent secants, clamped to `[0, 1]`.
    pub fn spline_from_values(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_knots(&knots)?;
        if values.len() != knots.len() {
            return Err(Error::invalid("knots and values differ in length"));
        }
        let n = knots.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]))
            .collect();
        for w in secants.windows(2) {
            if w[1] < w[0] - 1e-9 {
                return Err(Error::SlopeViolation("sampled values are not convex".into()));
            }
        }
        if secants[0] < -1e-9 || secants[n - 2] > 1.0 + 1e-9 {
            return Err(Error::SlopeViolation("sampled slopes leave [0, 1]".into()));
        }
        let mut slopes = Vec::with_capacity(n);
        slopes.push(secants[0]);
        for i in 1..n - 1 {
            slopes.push(0.5 * (secants[i - 1] + secants[i]));
        }
        slopes.push(secants[n - 2]);
        for s in &mut slopes {
            *s = s.clamp(0.0, 1.0);
        }
        Self::spline_from_slopes(knots, slopes, values[0])
    }

    /// Convex polygon through `(knots[i], values[i])`.
    pub fn polygonal(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_knots(&knots)?;
        if values.len() != knots.len() {
            return Err(Error::invalid("knots and values differ in length"));
        }
        let slopes: Vec<f64> = (0..knots.len() - 1)
            .map(|i| (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]))
            .collect();
        for w in slopes.windows(2) {
            if w[1] < w[0] - 1e-9 {
                return Err(Error::SlopeViolation("polygon is not convex".into()));
            }
        }
        if slopes[0] < -1e-9 || *slopes.last().unwrap() > 1.0 + 1e-9 {
            return Err(Error::SlopeViolation("polygon slopes leave [0, 1]".into()));
        }
        Ok(ToricPotential(Arc::new(Repr::Polygonal(PolygonalPotential {
            knots,
            values,
            slopes,
        }))))
    }

    /// Total potential φ(t).
    pub fn value(&self, t: f64) -> f64 {
        match &*self.0 {
            Repr::Spline(s) => s.value(t),
            Repr::Polygonal(p) => p.value(t),
            _ => fs_potential(t) + self.relative(t),
        }
    }

    /// Relative potential ϕ(t) = φ(t) − φ_FS(t), evaluated without
    /// cancellation for the closed-form kinds.
    pub fn relative(&self, t: f64) -> f64 {
        match &*self.0 {
            Repr::Mixture(terms) => terms
                .iter()
                .map(|&(w, c)| {
                    if c == 0.0 {
                        0.0
                    } else {
                        w * fs_shift_difference(t, c)
                    }
                })
                .sum(),
            Repr::Spline(s) => s.value(t) - fs_potential(t),
            Repr::Polygonal(p) => p.value(t) - fs_potential(t),
            Repr::LogPole { beta } => -beta * fs_potential(-t).ln_1p(),
            Repr::Max { a, b, .. } => a.relative(t).max(b.relative(t)),
            Repr::Blend {
                base,
                lambda,
                shift,
            } => {
                if *lambda == 0.0 {
                    *shift
                } else {
                    lambda * base.relative(t) + shift
                }
            }
        }
    }

    /// Right derivative φ′(t).
    pub fn slope(&self, t: f64) -> f64 {
        match &*self.0 {
            Repr::Mixture(terms) => terms.iter().map(|&(w, c)| w * sigmoid(t - c)).sum(),
            Repr::Spline(s) => s.slope(t),
            Repr::Polygonal(p) => p.slope(t),
            Repr::LogPole { beta } => {
                let s = sigmoid(t);
                let l = fs_potential(-t);
                s + beta * sigmoid(-t) / (1.0 + l)
            }
            Repr::Max { a, b, .. } => {
                let (ra, rb) = (a.relative(t), b.relative(t));
                if ra > rb {
                    a.slope(t)
                } else if rb > ra {
                    b.slope(t)
                } else {
                    a.slope(t).max(b.slope(t))
                }
            }
            Repr::Blend { base, lambda, .. } => {
                (1.0 - lambda) * sigmoid(t) + lambda * base.slope(t)
            }
        }
    }

    /// Density of the absolutely continuous part of φ″ (atoms excluded).
    pub fn curvature(&self, t: f64) -> f64 {
        match &*self.0 {
            Repr::Mixture(terms) => terms
                .iter()
                .map(|&(w, c)| w * fs_curvature(t - c))
                .sum(),
            Repr::Spline(s) => s.curvature(t),
            Repr::Polygonal(_) => 0.0,
            Repr::LogPole { beta } => {
                let l1 = 1.0 + fs_potential(-t);
                let q = sigmoid(-t);
                fs_curvature(t) * (1.0 - beta / l1) + beta * q * q / (l1 * l1)
            }
            Repr::Max { a, b, .. } => {
                if a.relative(t) >= b.relative(t) {
                    a.curvature(t)
                } else {
                    b.curvature(t)
                }
            }
            Repr::Blend { base, lambda, .. } => {
                (1.0 - lambda) * fs_curvature(t) + lambda * base.curvature(t)
            }
        }
    }

    /// Point masses of φ″ as `(t, jump of φ′)`.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out = match &*self.0 {
            Repr::Polygonal(p) => (1..p.knots.len() - 1)
                .filter_map(|i| {
                    let j = p.slopes[i] - p.slopes[i - 1];
                    (j > 0.0).then_some((p.knots[i], j))
                })
                .collect(),
            Repr::Max { a, b, crossings } => {
                let mut v: Vec<(f64, f64)> = crossings
                    .iter()
                    .map(|&t| (t, (a.slope(t) - b.slope(t)).abs()))
                    .filter(|(_, j)| *j > 0.0)
                    .collect();
                for (t, j) in a.atoms() {
                    if a.relative(t) >= b.relative(t) {
                        v.push((t, j));
                    }
                }
                for (t, j) in b.atoms() {
                    if b.relative(t) > a.relative(t) {
                        v.push((t, j));
                    }
                }
                v
            }
            Repr::Blend { base, lambda, .. } => base
                .atoms()
                .into_iter()
                .map(|(t, j)| (t, j * lambda))
                .filter(|(_, j)| *j > 0.0)
                .collect(),
            _ => Vec::new(),
        };
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    /// Points where φ fails to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &*self.0 {
            Repr::Spline(s) => s.knots.clone(),
            Repr::Polygonal(p) => p.knots.clone(),
            Repr::Max { a, b, crossings } => {
                let mut v = crossings.clone();
                v.extend(a.breakpoints());
                v.extend(b.breakpoints());
                v
            }
            Repr::Blend { base, .. } => base.breakpoints(),
            _ => Vec::new(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `false` only for potentials whose relative part is unbounded below.
    pub fn is_bounded(&self) -> bool {
        match &*self.0 {
            Repr::LogPole { .. } => false,
            Repr::Max { a, b, .. } => a.is_bounded() || b.is_bounded(),
            Repr::Blend { base, lambda, .. } => *lambda == 0.0 || base.is_bounded(),
            _ => true,
        }
    }

    /// Whether the potential has a closed form (no grid).
    pub fn is_closed_form(&self) -> bool {
        match &*self.0 {
            Repr::Mixture(_) | Repr::LogPole { .. } => true,
            Repr::Spline(_) | Repr::Polygonal(_) => false,
            Repr::Max { a, b, .. } => a.is_closed_form() && b.is_closed_form(),
            Repr::Blend { base, .. } => base.is_closed_form(),
        }
    }

    /// Grid-side invariant checks: φ′ non-decreasing and inside `[0, 1]`.
    pub fn check_slopes_on(&self, grid: &[f64]) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for &t in grid {
            let s = self.slope(t);
            if !(-SLOPE_TOL..=1.0 + SLOPE_TOL).contains(&s) {
                return Err(Error::SlopeViolation(format!("slope {s} at t = {t}")));
            }
            if s < prev - 1e-10 {
                return Err(Error::SlopeViolation(format!(
                    "slope decreases from {prev} to {s} at t = {t}"
                )));
            }
            prev = s;
        }
        Ok(())
    }
}

/// `φ_FS(t − c) − φ_FS(t)` without cancellation.
pub fn fs_shift_difference(t: f64, c: f64) -> f64 {
    let x = t - c;
    (x.max(0.0) - t.max(0.0)) + ((-x.abs()).exp().ln_1p() - (-t.abs()).exp().ln_1p())
}

fn check_knots(knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::invalid("need at least two knots"));
    }
    if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("knots must be finite and strictly increasing"));
    }
    Ok(())
}

fn check_slopes(knots: &[f64], slopes: &[f64]) -> Result<()> {
    for (i, s) in slopes.iter().enumerate() {
        if !(-SLOPE_TOL..=1.0 + SLOPE_TOL).contains(s) {
            return Err(Error::SlopeViolation(format!(
                "slope {s} at t = {} outside [0, 1]",
                knots[i]
            )));
        }
    }
    for (i, w) in slopes.windows(2).enumerate() {
        if w[1] < w[0] - 1e-12 {
            return Err(Error::SlopeViolation(format!(
                "slope decreases at t = {}",
                knots[i + 1]
            )));
        }
    }
    Ok(())
}

pub(crate) fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) < 1e-13 {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Two-sided bound `a·ω ≤ ω_φ ≤ A·ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds {
    pub a: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
}

impl CurvatureBounds {
    pub fn new(a: f64, big_a: f64) -> Result<Self> {
        if !(a > 0.0) || !(big_a >= a) || !big_a.is_finite() {
            return Err(Error::invalid(format!("need 0 < a ≤ A, got a = {a}, A = {big_a}")));
        }
        Ok(Self { a, big_a })
    }

    /// Extremes of `φ″/φ_FS″` sampled on `grid` (atoms make `A` infinite).
    pub fn sampled(phi: &ToricPotential, grid: &[f64]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in grid {
            let r = phi.curvature(t) / fs_curvature(t);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !phi.atoms().is_empty() {
            hi = f64::INFINITY;
        }
        (lo, hi)
    }

    /// Whether `a φ_FS″ ≤ φ″ ≤ A φ_FS″` holds on the grid.
    pub fn holds_for(&self, phi: &ToricPotential, grid: &[f64]) -> bool {
        let (lo, hi) = Self::sampled(phi, grid);
        lo >= self.a * (1.0 - 1e-12) && hi <= self.big_a * (1.0 + 1e-12)
    }
}

/// Parameters of the experiment-suite potential
/// `φ = (1 − s)·φ_FS(t) + s·φ_FS(t − c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestPotentialParams {
    pub s: f64,
    pub c: f64,
}

impl Default for TestPotentialParams {
    fn default() -> Self {
        Self { s: 0.5, c: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct TestPotential {
    pub potential: ToricPotential,
    pub bounds: CurvatureBounds,
}

/// Factory for the experiment suite. The curvature ratio
/// `φ″/φ_FS″ = (1 − s) + s·q(t)` with `q` monotone between `e^{−c}` and
/// `e^{c}`, which gives the bounds in closed form.
pub fn make_test_potential(params: TestPotentialParams) -> Result<TestPotential> {
    let TestPotentialParams { s, c } = params;
    if !(0.0..=1.0).contains(&s) || !c.is_finite() {
        return Err(Error::SlopeViolation(format!(
            "test potential needs s ∈ [0, 1] and finite c, got s = {s}, c = {c}"
        )));
    }
    let potential = if s == 0.0 || c == 0.0 {
        ToricPotential::fubini_study()
    } else {
        ToricPotential::mixture(vec![(1.0 - s, 0.0), (s, c)])?
    };
    let (lo, hi) = ((-c.abs()).exp(), c.abs().exp());
    let bounds = CurvatureBounds::new((1.0 - s) + s * lo, (1.0 - s) + s * hi)?;
    Ok(TestPotential { potential, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn fs_potential_values() {
        assert!((fs_potential(0.0) - LN_2).abs() < 1e-16);
        assert!((fs_potential(50.0) - 50.0).abs() < 1e-20 + 2e-22);
        assert!(fs_potential(800.0).is_finite());
        let mut prev = fs_potential(-1.0);
        for i in 2..60 {
            let v = fs_potential(-(i as f64));
            assert!(v < prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn fs_curvature_matches_central_differences() {
        let h = 1e-4;
        for i in -300..=300 {
            let t = i as f64 * 0.1;
            let fd = (fs_potential(t + h) - 2.0 * fs_potential(t) + fs_potential(t - h)) / (h * h);
            assert!((fd - fs_curvature(t)).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn gaussian_weight_declares_exact_bounds() {
        for n in 1..=3 {
            let d = ReinhardtDomain::unit_polydisk(n);
            let w = RadialWeight::gaussian(0.7, &d).unwrap();
            assert_eq!(w.declared_lower_bound(), 0.7);
            assert_eq!(w.declared_laplacian_sup(), 4.0 * n as f64 * 0.7);
            assert!(w.verify_declared_bounds(501));
        }
    }

    #[test]
    fn non_psh_profile_rejected() {
        let d = ReinhardtDomain::unit_disk();
        let p = Profile::Polynomial {
            coefficients: vec![0.0, -1.0],
        };
        assert!(RadialWeight::new(vec![p], &d).is_err());
    }

    #[test]
    fn profile_derivatives_agree_with_finite_differences() {
        let profiles = [
            Profile::Polynomial {
                coefficients: vec![0.3, 0.5, 0.2, 0.1],
            },
            Profile::LogOnePlus { scale: 1.3 },
            Profile::Exponential {
                scale: 0.4,
                rate: 1.2,
            },
        ];
        let h = 1e-5;
        for p in &profiles {
            for i in 1..20 {
                let s = i as f64 * 0.05;
                let d1 = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
                let d2 = (p.derivative(s + h) - p.derivative(s - h)) / (2.0 * h);
                assert!((d1 - p.derivative(s)).abs() < 1e-8);
                assert!((d2 - p.second_derivative(s)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn test_potential_trivial_parameters() {
        for params in [TestPotentialParams { s: 0.0, c: 3.0 }, TestPotentialParams { s: 1.0, c: 0.0 }] {
            let tp = make_test_potential(params).unwrap();
            for i in -50..=50 {
                assert_eq!(tp.potential.relative(i as f64), 0.0);
            }
            assert_eq!(tp.bounds, CurvatureBounds { a: 1.0, big_a: 1.0 });
        }
        assert!(matches!(
            make_test_potential(TestPotentialParams { s: 1.5, c: 1.0 }),
            Err(Error::SlopeViolation(_))
        ));
    }

    #[test]
    fn test_potential_bounds_match_finite_difference_sweep() {
        let tp = make_test_potential(TestPotentialParams { s: 0.5, c: 1.0 }).unwrap();
        // independent oracle: second differences of log(1 + e^x), evaluated
        // in the branch (log1p(e^x) or log1p(e^{-x})) fixed by the centre so
        // the differences never straddle the switch
        let h = 1e-3;
        let d2 = |x: f64| {
            let f = |y: f64| if x < 0.0 { y.exp().ln_1p() } else { (-y).exp().ln_1p() };
            (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in linspace(-40.0, 40.0, 8001) {
            let r = (0.5 * d2(t) + 0.5 * d2(t - 1.0)) / d2(t);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        assert!((tp.bounds.a - lo).abs() < 1e-6, "{} vs {lo}", tp.bounds.a);
        assert!((tp.bounds.big_a - hi).abs() < 1e-6, "{} vs {hi}", tp.bounds.big_a);
        assert!((tp.bounds.a - 0.5 * (1.0 + (-1f64).exp())).abs() < 1e-15);
        assert!(tp.bounds.holds_for(&tp.potential, &default_grid()));
    }

    #[test]
    fn full_mass_slopes_reach_zero_and_one() {
        let pots = [
            ToricPotential::fubini_study(),
            make_test_potential(TestPotentialParams::default()).unwrap().potential,
            ToricPotential::log_pole(0.5).unwrap(),
        ];
        for p in &pots {
            p.check_slopes_on(&default_grid()).unwrap();
            assert!(p.slope(GRID_LO) < 1e-6 + if p.is_bounded() { 0.0 } else { 0.02 });
            assert!(p.slope(GRID_HI) > 1.0 - 1e-6);
        }
    }

    #[test]
    fn log_pole_derivatives_match_finite_differences() {
        let p = ToricPotential::log_pole(0.8).unwrap();
        let h = 1e-4;
        for i in -40..=40 {
            let t = i as f64 * 0.5;
            let d1 = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            let d2 = (p.value(t + h) - 2.0 * p.value(t) + p.value(t - h)) / (h * h);
            assert!((d1 - p.slope(t)).abs() < 1e-8);
            assert!((d2 - p.curvature(t)).abs() < 1e-5);
        }
        assert!(!p.is_bounded());
        assert!(p.relative(-1e6) < -10.0);
    }

    #[test]
    fn spline_round_trips_slopes() {
        let knots = linspace(-5.0, 5.0, 101);
        let slopes: Vec<f64> = knots.iter().map(|&t| sigmoid(t)).collect();
        let p = ToricPotential::spline_from_slopes(knots.clone(), slopes.clone(), fs_potential(-5.0)).unwrap();
        for (t, s) in knots.iter().zip(&slopes) {
            assert!((p.slope(*t) - s).abs() < 1e-15);
        }
        // trapezoid error O(h²)
        assert!((p.value(0.0) - LN_2).abs() < 1e-3);
        let bad = ToricPotential::spline_from_slopes(vec![0.0, 1.0], vec![0.6, 0.5], 0.0);
        assert!(matches!(bad, Err(Error::SlopeViolation(_))));
    }

    #[test]
    fn max_of_potentials_has_atoms_at_crossings() {
        let a = ToricPotential::fubini_study();
        let b = ToricPotential::mixture(vec![(1.0, 2.0)]).unwrap().shifted(0.5);
        let m = ToricPotential::max(&a, &b);
        let atoms = m.atoms();
        assert_eq!(atoms.len(), 1);
        let t0 = atoms[0].0;
        assert!((a.relative(t0) - b.relative(t0)).abs() < 1e-10);
        m.check_slopes_on(&default_grid()).unwrap();
    }

    #[test]
    fn planar_weight_checks() {
        let w = PlanarWeight::gaussian_harmonic(1.0, 0.5);
        let z0 = Complex64::new(0.0, 0.0);
        assert!(w.is_subharmonic_on(z0, 1.0, 1e-6));
        assert!((w.laplacian_sup(z0, 1.0) - 4.0).abs() < 1e-5);
        let bad = PlanarWeight::new("-|z|^2", |z: Complex64| -z.norm_sqr());
        assert!(!bad.is_subharmonic_on(z0, 1.0, 1e-6));
    }
}
