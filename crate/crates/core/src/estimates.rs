//! Explicit constants and bounds for weighted Bergman kernels: the optimal
//! extension constant, the polydisk lower bounds, the Jensen-type upper
//! bound, the sphere-mean lemma and empirical constants for the two-sided
//! kernel and metric estimates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bergman_local::{self, Functional, LocalWeight, OrthonormalBasis, Truncation};
use crate::error::{Error, Result};
use crate::quadrature::{self, gauss_legendre, Integrand1D};
use crate::report::{constant_is_stable, BoundReport, Direction};
use crate::weights::{PlanarWeight, Profile, RadialWeight, ReinhardtDomain};

/// `C_a = ∫_𝔻 |ζ|^{2m} e^{−a|ζ|²} dλ = (π/a^{m+1}) ∫_0^a ρ^m e^{−ρ} dρ`.
///
/// Uses `γ(m+1, a) = m! e^{−a} Σ_{j>m} a^j/j!`, so that
/// `C_a = π e^{−a} Σ_{i≥0} m! a^i / (m+1+i)!`, a series of positive terms
/// with no cancellation for any `a ≥ 0`.
pub fn ot_constant(a: f64, m: u32) -> f64 {
    assert!(a >= 0.0, "a must be non-negative");
    let mut term = 1.0 / (m as f64 + 1.0); // m!/(m+1)!
    let mut sum = 0.0;
    let mut i = 0u32;
    loop {
        sum += term;
        i += 1;
        term *= a / (m as f64 + 1.0 + i as f64);
        if term < 1e-18 * sum || i > 100_000 {
            break;
        }
    }
    PI * (-a).exp() * sum
}

/// `K^{(m)}_{𝔻, a|ζ|²}(0)`: the largest `|f^{(m)}(0)/m!|²` over unit-norm
/// `f` with `f(0) = … = f^{(m−1)}(0) = 0`, computed from the kernel machinery.
pub fn derivative_kernel_at_origin(a: f64, m: u32) -> Result<f64> {
    let d = ReinhardtDomain::unit_disk();
    let w = LocalWeight::Radial(RadialWeight::gaussian(a, &d)?);
    let basis = OrthonormalBasis::build(&d, &w, m + 4)?;
    let cons: Vec<Functional> = (0..m).map(|j| Functional::Taylor(vec![j])).collect();
    Ok(basis.log_constrained_sup(&Functional::Taylor(vec![m]), &cons).exp())
}

/// Checks `K^{(m)}(0)·C_a = 1`.
pub fn ot_tightness(a: f64, m: u32, tol: f64) -> Result<BoundReport> {
    let k = derivative_kernel_at_origin(a, m)?;
    Ok(BoundReport::equal(
        format!("ot_tightness(a={a},m={m})"),
        k * ot_constant(a, m),
        1.0,
        tol,
    ))
}

/// Lower bounds of the polydisk corollary for `K(0)` and `K̃(0; e₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolydiskBounds {
    pub kernel: f64,
    pub tilde_kernel: f64,
    /// Weakened forms with denominator `πⁿ` only.
    pub kernel_weak: f64,
    pub tilde_kernel_weak: f64,
}

pub fn polydisk_lower_bounds(n: usize, a: f64, u0: f64) -> Result<PolydiskBounds> {
    if !(a > 0.0) || n == 0 {
        return Err(Error::invalid("polydisk bounds need a > 0 and n ≥ 1"));
    }
    let nf = n as f64;
    let e = u0.exp();
    let strong = (a / (PI * (-a).exp_m1().abs())).powf(nf) * e;
    let weak = (a / PI).powf(nf) * e;
    Ok(PolydiskBounds {
        kernel: strong,
        tilde_kernel: strong * a,
        kernel_weak: weak,
        tilde_kernel_weak: weak * a,
    })
}

/// `K̃(0; e₁)` on the unit polydisk for `u = a|z|²`, in closed form:
/// `a²/(π(1 − (1+a)e^{−a})) · (a/(π(1 − e^{−a})))^{n−1}`.
pub fn polydisk_gaussian_tilde_exact(n: usize, a: f64) -> f64 {
    let m1 = 1.0 / ot_constant(a, 1);
    let m0 = 1.0 / ot_constant(a, 0);
    m1 * m0.powi(n as i32 - 1)
}

/// Area of the sphere of radius ρ in ℂⁿ: `2πⁿ ρ^{2n−1}/(n−1)!`.
pub fn sphere_area(n: usize, rho: f64) -> f64 {
    2.0 * PI.powi(n as i32) * rho.powi(2 * n as i32 - 1) / (1..n).map(|i| i as f64).product::<f64>()
}

/// Mean of `u` over the sphere `|w − z| = ρ`.
///
/// Radial weights at the origin use `|w_i|² = ρ² X_i` with `X_i` Beta(1, n−1)
/// distributed; planar weights and off-centre points in dimension one use
/// the periodic trapezoid rule on the circle.
pub fn sphere_mean(weight: &LocalWeight, z: &[Complex64], rho: f64) -> Result<f64> {
    match weight {
        LocalWeight::Planar(w) => Ok(w.circle_mean(z[0], rho)),
        LocalWeight::Radial(w) => {
            let n = w.dimension();
            if z.iter().all(|zi| *zi == Complex64::new(0.0, 0.0)) {
                if n == 1 {
                    return Ok(w.profiles()[0].value(rho * rho));
                }
                let (x, wt) = gauss_legendre(64);
                let mut total = 0.0;
                for p in w.profiles() {
                    let mut s = 0.0;
                    for (xi, wi) in x.iter().zip(&wt) {
                        let t = 0.5 * (xi + 1.0);
                        let dens = (n as f64 - 1.0) * (1.0 - t).powi(n as i32 - 2);
                        s += 0.5 * wi * dens * p.value(rho * rho * t);
                    }
                    total += s;
                }
                Ok(total)
            } else if n == 1 {
                let profile = w.profiles()[0].clone();
                let planar = PlanarWeight::new("radial", move |q: Complex64| profile.value(q.norm_sqr()));
                Ok(planar.circle_mean(z[0], rho))
            } else {
                Err(Error::invalid(
                    "off-centre sphere means are implemented in dimension one only",
                ))
            }
        }
    }
}

/// `K(z) ≤ (∫_0^r |∂B_ρ| exp(−⨍_{∂B_ρ} u) dρ)^{−1}`.
pub fn bb_upper_bound(weight: &LocalWeight, r: f64, z: &[Complex64]) -> Result<f64> {
    let n = z.len();
    sphere_mean(weight, z, r)?;
    let f = |rho: f64| match sphere_mean(weight, z, rho) {
        Ok(m) => sphere_area(n, rho) * (-m).exp(),
        Err(_) => f64::NAN,
    };
    let r_int = quadrature::integrate(&Integrand1D::new(f, 0.0, r), 1e-12)?;
    Ok(1.0 / r_int.value)
}

/// `K̃(z; v) ≤ C_n⁻¹ (∫_0^r ρ² |∂B_ρ| exp(−⨍_{∂B_ρ} u) dρ)^{−1}` for `|v| = 1`.
pub fn bb_tilde_upper_bound(weight: &LocalWeight, r: f64, z: &[Complex64]) -> Result<f64> {
    let n = z.len();
    sphere_mean(weight, z, r)?;
    let f = |rho: f64| match sphere_mean(weight, z, rho) {
        Ok(m) => rho * rho * sphere_area(n, rho) * (-m).exp(),
        Err(_) => f64::NAN,
    };
    let r_int = quadrature::integrate(&Integrand1D::new(f, 0.0, r), 1e-12)?;
    Ok(1.0 / (sphere_log_constant(n) * r_int.value))
}

/// Laplacian form of the upper bound: with `Δu ≤ 4nA` on `B_r`,
/// `K(z) ≤ e^{u(z)} Aⁿ (n ω_{2n} ∫_0^{Ar²} s^{n−1} e^{−s} ds)^{−1}`.
pub fn bb_laplacian_bound(u_z: f64, big_a: f64, n: usize, r: f64) -> f64 {
    // n ω_{2n} = πⁿ/(n−1)!
    let x = big_a * r * r;
    let lower_gamma = if x == 0.0 {
        0.0
    } else {
        // ∫_0^x s^{n−1} e^{−s} ds = xⁿ C_x(m = n−1)/π
        x.powi(n as i32) * ot_constant(x, n as u32 - 1) / PI
    };
    u_z.exp() * big_a.powi(n as i32) * (1..n).map(|i| i as f64).product::<f64>()
        / (PI.powi(n as i32) * lower_gamma)
}

/// Harmonic number `H_m`.
pub fn harmonic_number(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

/// `C_n = exp(2 ∫_{∂B₁} log|v₁| dσ) = exp(−H_{n−1})`.
pub fn sphere_log_constant(n: usize) -> f64 {
    assert!(n >= 1);
    (-harmonic_number(n - 1)).exp()
}

/// Uniform point on the unit sphere of ℂⁿ.
pub fn random_sphere_point(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let r = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if r > 1e-300 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Monte Carlo estimate of `C_n` as `(estimate, standard error of the estimate)`.
pub fn sphere_log_constant_mc(n: usize, samples: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..samples {
        let v = random_sphere_point(n, rng);
        let l = v[0].norm_sqr().ln();
        sum += l;
        sq += l * l;
    }
    let mean = sum / samples as f64;
    let var = (sq / samples as f64 - mean * mean).max(0.0);
    let se = (var / samples as f64).sqrt();
    (mean.exp(), mean.exp() * se)
}

/// A polynomial in n complex variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPolynomial {
    pub n: usize,
    pub terms: Vec<(Vec<u32>, Complex64)>,
}

impl ComplexPolynomial {
    pub fn new(n: usize, terms: Vec<(Vec<u32>, Complex64)>) -> Result<Self> {
        if terms.iter().any(|(a, _)| a.len() != n) {
            return Err(Error::invalid("multi-index length differs from n"));
        }
        Ok(Self { n, terms })
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, c)| {
                a.iter()
                    .zip(z)
                    .fold(*c, |acc, (&ai, zi)| acc * zi.powu(ai))
            })
            .sum()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|(a, _)| a.iter().all(|&x| x == 0))
            .map(|(_, c)| c)
            .sum()
    }

    /// `∂f(0)`.
    pub fn gradient_at_origin(&self) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); self.n];
        for (a, c) in &self.terms {
            if a.iter().sum::<u32>() == 1 {
                let i = a.iter().position(|&x| x == 1).unwrap();
                g[i] += c;
            }
        }
        g
    }

    /// Coefficients of `ξ ↦ f(ξ w)` by degree.
    fn restrict_to_line(&self, w: &[Complex64]) -> Vec<Complex64> {
        let deg = self.terms.iter().map(|(a, _)| a.iter().sum::<u32>()).max().unwrap_or(0) as usize;
        let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
        for (a, c) in &self.terms {
            let d: u32 = a.iter().sum();
            let v = a.iter().zip(w).fold(*c, |acc, (&ai, wi)| acc * wi.powu(ai));
            out[d as usize] += v;
        }
        out
    }

    /// Seeded random polynomial with `f(0) = 0`, non-zero gradient and
    /// total degree at most `max_degree`.
    pub fn random(n: usize, max_degree: u32, rng: &mut ChaCha8Rng) -> Self {
        let mut terms = Vec::new();
        for alpha in bergman_local::multi_indices(n, max_degree).into_iter().skip(1) {
            if alpha.iter().sum::<u32>() > 1 && rng.gen::<f64>() < 0.4 {
                continue;
            }
            let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            terms.push((alpha, c));
        }
        Self { n, terms }
    }
}

/// `(1/2π) ∫ log|p(e^{iθ})|² dθ` for a polynomial in one variable given by
/// its coefficients, via Jensen's formula `log|p|` mean `= log|b_d| +
/// Σ log max(1, |r_k|)` with the roots from Durand–Kerner iteration.
pub fn circle_log_mean(coeffs: &[Complex64]) -> f64 {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return f64::NEG_INFINITY;
    }
    let tiny = 1e-14 * scale;
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() <= tiny {
        c.pop();
    }
    let d = c.len() - 1;
    let lead = c[d];
    if d == 0 {
        return 2.0 * lead.norm().ln();
    }
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let p = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, x| acc * z + x);
    let radius = 1.0 + monic[..d].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..d).map(|i| seed.powu(i as u32) * radius).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..d {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = p(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    2.0 * (lead.norm().ln() + roots.iter().map(|r| r.norm().max(1.0).ln()).sum::<f64>())
}

/// Left side of the sphere-mean lemma, `⨍_{∂B_ρ} log|f|² − log ρ²`, as
/// `(value, error estimate)`.
///
/// The circle direction is integrated exactly (Jensen), which leaves an
/// integral over `CP^{n−1}`: trivial for n = 1, a product Gauss–Legendre /
/// trapezoid rule in the chart `v = (√x, √(1−x) e^{iθ})` for n = 2 (error
/// from two resolutions), seeded Monte Carlo for n ≥ 3 (standard error).
pub fn sphere_mean_log(f: &ComplexPolynomial, rho: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let inner = |v: &[Complex64]| -> f64 {
        let w: Vec<Complex64> = v.iter().map(|x| x * rho).collect();
        circle_log_mean(&f.restrict_to_line(&w))
    };
    let log_rho2 = (rho * rho).ln();
    match f.n {
        1 => (inner(&[Complex64::new(1.0, 0.0)]) - log_rho2, 0.0),
        2 => {
            let rule = |nx: usize, nt: usize| -> f64 {
                let (x, w) = gauss_legendre(nx);
                let mut total = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    // x = (1 − cos πs)/2 clusters nodes at both ends
                    let s = 0.5 * (xi + 1.0);
                    let xx = 0.5 * (1.0 - (PI * s).cos());
                    let jac = 0.5 * PI * (PI * s).sin() * 0.5 * wi;
                    let mut ring = 0.0;
                    for j in 0..nt {
                        let th = 2.0 * PI * j as f64 / nt as f64;
                        let v = [
                            Complex64::new(xx.sqrt(), 0.0),
                            Complex64::from_polar((1.0 - xx).max(0.0).sqrt(), th),
                        ];
                        ring += inner(&v);
                    }
                    total += jac * ring / nt as f64;
                }
                total
            };
            let coarse = rule(48, 48);
            let fine = rule(96, 96);
            (fine - log_rho2, (fine - coarse).abs())
        }
        n => {
            let samples = 200_000;
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..samples {
                let v = random_sphere_point(n, rng);
                let l = inner(&v);
                sum += l;
                sq += l * l;
            }
            let mean = sum / samples as f64;
            let se = ((sq / samples as f64 - mean * mean).max(0.0) / samples as f64).sqrt();
            (mean - log_rho2, se)
        }
    }
}

/// Sphere-mean lemma: `⨍ log|f|² − log ρ² ≥ log(C_n |∂f(0)|²)`, with the
/// quadrature or sampling error (×3) folded into the tolerance.
pub fn check_lemma_sphere_mean(f: &ComplexPolynomial, rho: f64, rng: &mut ChaCha8Rng) -> Result<BoundReport> {
    if f.constant_term().norm() != 0.0 {
        return Err(Error::invalid("the lemma needs f(0) = 0"));
    }
    let g = f.gradient_at_origin();
    let gn: f64 = g.iter().map(|x| x.norm_sqr()).sum();
    if gn == 0.0 {
        return Err(Error::DegenerateGradient);
    }
    let (left, err) = sphere_mean_log(f, rho, rng);
    let right = (sphere_log_constant(f.n) * gn).ln();
    Ok(BoundReport::with_tolerance(
        format!("lemma_sphere_mean(n={},rho={rho})", f.n),
        left,
        right,
        Direction::Lower,
        3.0 * err + 1e-9 * right.abs().max(1.0),
    ))
}

/// The six constants implied by the two-sided kernel and metric estimates
/// for one weight: each entry is the smallest `C` making that inequality
/// hold at the given point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConstants {
    pub kernel: f64,
    pub tilde_kernel: f64,
    pub metric: f64,
    pub u_z: f64,
    pub a: f64,
    pub laplacian_factor: f64,
    pub kernel_upper: f64,
    pub tilde_upper: f64,
    pub kernel_lower: Option<f64>,
    pub tilde_lower: Option<f64>,
    pub metric_lower: Option<f64>,
    pub metric_upper: Option<f64>,
}

impl TheoremConstants {
    pub fn as_array(&self) -> [Option<f64>; 6] {
        [
            Some(self.kernel_upper),
            Some(self.tilde_upper),
            self.kernel_lower,
            self.tilde_lower,
            self.metric_lower,
            self.metric_upper,
        ]
    }
}

pub const THEOREM_NAMES: [&str; 6] = [
    "K_upper",
    "Ktilde_upper",
    "K_lower",
    "Ktilde_lower",
    "B2_lower",
    "B2_upper",
];

/// Computes `K`, `K̃`, `B²` at `z` (converged in the truncation degree) and
/// the constants each of the six inequalities needs. The lower-bound and
/// metric constants are skipped when the weight has no positive Levi bound.
pub fn theorem_constants(
    domain: &ReinhardtDomain,
    weight: &LocalWeight,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<TheoremConstants> {
    let n = domain.dimension() as i32;
    let (basis, _, _) = bergman_local::converged_at(domain, weight, Truncation::default(), |b| {
        let (_, t) = b.tilde_kernel_both(z, v);
        vec![b.log_kernel_diag(z), t.ln()]
    })?;
    let value = basis.kernel_value(z, v)?;
    let (a, lap) = match weight {
        LocalWeight::Radial(w) => (w.declared_lower_bound(), w.declared_laplacian_sup()),
        LocalWeight::Planar(w) => {
            let r = match domain {
                ReinhardtDomain::Polydisk { radii } => radii[0],
                ReinhardtDomain::Ball { radius, .. } => *radius,
            };
            (w.levi_lower().unwrap_or(0.0), w.laplacian_sup(Complex64::new(0.0, 0.0), r))
        }
    };
    let l = lap.max(1.0);
    let e = weight.value(z).exp();
    let (k, kt, b2) = (value.kernel, value.tilde_kernel, value.metric);
    let pos = a > 0.0;
    Ok(TheoremConstants {
        kernel: k,
        tilde_kernel: kt,
        metric: b2,
        u_z: weight.value(z),
        a,
        laplacian_factor: l,
        kernel_upper: k / (e * l.powi(n)),
        tilde_upper: kt / (e * l.powi(n + 1)),
        kernel_lower: pos.then(|| e * a.powi(n) / k),
        tilde_lower: pos.then(|| e * a.powi(n + 1) / kt),
        metric_lower: pos.then(|| a.powi(n + 1) / (b2 * l.powi(n))),
        metric_upper: pos.then(|| b2 * a.powi(n) / l.powi(n + 1)),
    })
}

/// Result of the two-sided estimate check over a family of weights.
#[derive(Debug, Clone)]
pub struct TheoremCheck {
    /// Extracted constant per inequality (worst case over the family).
    pub constants: [Option<f64>; 6],
    /// Per-weight constants, in family order.
    pub per_weight: Vec<TheoremConstants>,
    /// Six reports per weight (skipped inequalities omitted).
    pub reports: Vec<BoundReport>,
    /// Whether each extracted constant is finite and stable across the family.
    pub stable: [bool; 6],
}

pub fn check_theorem_mt(
    domain: &ReinhardtDomain,
    family: &[LocalWeight],
    z: &[Complex64],
    v: &[Complex64],
) -> Result<TheoremCheck> {
    let per_weight: Vec<TheoremConstants> = family
        .iter()
        .map(|w| theorem_constants(domain, w, z, v))
        .collect::<Result<_>>()?;
    let mut constants = [None; 6];
    let mut stable = [true; 6];
    for i in 0..6 {
        let cs: Vec<f64> = per_weight.iter().filter_map(|t| t.as_array()[i]).collect();
        if !cs.is_empty() {
            constants[i] = Some(cs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            stable[i] = constant_is_stable(&cs);
        }
    }
    let n = domain.dimension() as i32;
    let mut reports = Vec::new();
    for (idx, t) in per_weight.iter().enumerate() {
        let e = t.u_z.exp();
        let l = t.laplacian_factor;
        let tag = |name: &str| format!("{name}[{idx}]");
        if let Some(c) = constants[0] {
            reports.push(BoundReport::upper(tag(THEOREM_NAMES[0]), t.kernel, c * e * l.powi(n)));
        }
        if let Some(c) = constants[1] {
            reports.push(BoundReport::upper(tag(THEOREM_NAMES[1]), t.tilde_kernel, c * e * l.powi(n + 1)));
        }
        if t.a > 0.0 {
            let a = t.a;
            if let Some(c) = constants[2] {
                reports.push(BoundReport::lower(tag(THEOREM_NAMES[2]), t.kernel, e * a.powi(n) / c));
            }
            if let Some(c) = constants[3] {
                reports.push(BoundReport::lower(tag(THEOREM_NAMES[3]), t.tilde_kernel, e * a.powi(n + 1) / c));
            }
            if let Some(c) = constants[4] {
                reports.push(BoundReport::lower(tag(THEOREM_NAMES[4]), t.metric, a.powi(n + 1) / (c * l.powi(n))));
            }
            if let Some(c) = constants[5] {
                reports.push(BoundReport::upper(tag(THEOREM_NAMES[5]), t.metric, c * l.powi(n + 1) / a.powi(n)));
            }
        }
    }
    Ok(TheoremCheck {
        constants,
        per_weight,
        reports,
        stable,
    })
}

/// Seeded plurisubharmonic radial profile for the upper-bound sweeps.
pub fn random_profile(rng: &mut ChaCha8Rng) -> Profile {
    match rng.gen_range(0..3) {
        0 => {
            let deg = rng.gen_range(1..=4);
            let coefficients = (0..=deg).map(|_| rng.gen_range(0.0..2.0)).collect();
            Profile::Polynomial { coefficients }
        }
        1 => Profile::LogOnePlus {
            scale: rng.gen_range(0.1..3.0),
        },
        _ => Profile::Exponential {
            scale: rng.gen_range(0.1..1.5),
            rate: rng.gen_range(0.2..2.0),
        },
    }
}

pub fn random_radial_weight(domain: &ReinhardtDomain, rng: &mut ChaCha8Rng) -> Result<RadialWeight> {
    let profiles = (0..domain.dimension()).map(|_| random_profile(rng)).collect();
    RadialWeight::new(profiles, domain)
}

/// Five non-radial subharmonic weights on the unit disk.
pub fn planar_family() -> Vec<PlanarWeight> {
    vec![
        PlanarWeight::gaussian_harmonic(1.0, 0.5),
        PlanarWeight::new("0.5|z|^2+0.2Re(z^2)+0.7Re(z)", |z: Complex64| {
            0.5 * z.norm_sqr() + 0.2 * (z * z).re + 0.7 * z.re
        })
        .with_levi_lower(0.5),
        PlanarWeight::new("|z-0.3|^2", |z: Complex64| (z - 0.3).norm_sqr()).with_levi_lower(1.0),
        PlanarWeight::new("log(1+|z-0.5i|^2)", |z: Complex64| {
            (z - Complex64::new(0.0, 0.5)).norm_sqr().ln_1p()
        }),
        PlanarWeight::new("|z|^4+Re(z^3)", |z: Complex64| z.norm_sqr().powi(2) + (z * z * z).re),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn ot_constant_values() {
        let e1 = (-1f64).exp();
        assert!((ot_constant(1.0, 0) - PI * (1.0 - e1)).abs() < 1e-15);
        for m in 0..6 {
            assert!((ot_constant(0.0, m) - PI / (m as f64 + 1.0)).abs() < 1e-15);
        }
        let v = ot_constant(2.0, 1);
        assert!((v - PI / 4.0 * (1.0 - 3.0 * (-2f64).exp())).abs() < 1e-15);
        // quadrature oracle
        for (a, m) in [(0.5, 3u32), (5.0, 2), (40.0, 0)] {
            let q = quadrature::integrate(
                &Integrand1D::new(|r: f64| r.powi(m as i32) * (-r).exp(), 0.0, a),
                1e-12,
            )
            .unwrap()
            .value;
            let expect = PI / a.powi(m as i32 + 1) * q;
            assert!((ot_constant(a, m) - expect).abs() < 1e-11 * expect);
        }
    }

    #[test]
    fn ot_tightness_examples() {
        for (a, m) in [(1.0, 0), (0.0, 2), (3.0, 1)] {
            let r = ot_tightness(a, m, 1e-8).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn polydisk_bounds_examples() {
        let b = polydisk_lower_bounds(1, 1.0, 0.0).unwrap();
        let v = 1.0 / (PI * (1.0 - (-1f64).exp()));
        assert!((b.kernel - v).abs() < 1e-15 && (b.tilde_kernel - v).abs() < 1e-15);
        let b2 = polydisk_lower_bounds(2, 1.0, 0.0).unwrap();
        assert!((b2.kernel - v * v).abs() < 1e-15);
        assert!((b2.kernel - 0.253572).abs() < 1e-6);
        assert!((b2.kernel_weak - 1.0 / (PI * PI)).abs() < 1e-15);
        assert!(polydisk_lower_bounds(1, 0.0, 0.0).is_err());
    }

    #[test]
    fn bb_bound_closed_forms() {
        let d = ReinhardtDomain::unit_disk();
        let zero = LocalWeight::Radial(RadialWeight::zero(&d).unwrap());
        let b = bb_upper_bound(&zero, 1.0, &[c(0.0)]).unwrap();
        assert!((b - 1.0 / PI).abs() < 1e-13);
        for a in [0.5, 2.0] {
            for r in [0.5, 1.0] {
                let w = LocalWeight::Radial(RadialWeight::gaussian(a, &d).unwrap());
                let b = bb_upper_bound(&w, r, &[c(0.0)]).unwrap();
                let exact = a / (PI * (1.0 - (-a * r * r).exp()));
                assert!((b - exact).abs() < 1e-12 * exact);
                assert!((bb_laplacian_bound(0.0, a, 1, r) - exact).abs() < 1e-12 * exact);
            }
        }
    }

    #[test]
    fn laplacian_bound_dominates_sphere_mean_bound() {
        let d = ReinhardtDomain::unit_polydisk(2);
        let w = RadialWeight::gaussian(1.0, &d).unwrap();
        let big_a = w.declared_laplacian_sup() / 8.0;
        let lw = LocalWeight::Radial(w);
        let z = [c(0.0), c(0.0)];
        for r in [0.3, 0.7, 1.0] {
            let mean = bb_upper_bound(&lw, r, &z).unwrap();
            let lap = bb_laplacian_bound(0.0, big_a, 2, r);
            assert!(lap >= mean * (1.0 - 1e-12));
        }
    }

    #[test]
    fn sphere_constants() {
        assert_eq!(sphere_log_constant(1), 1.0);
        for n in 1..=8 {
            assert!((sphere_log_constant(n) * harmonic_number(n - 1).exp() - 1.0).abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (c2, se) = sphere_log_constant_mc(2, 200_000, &mut rng);
        assert!((c2 - (-1f64).exp()).abs() < 5.0 * se + 1e-3);
    }

    #[test]
    fn jensen_circle_mean() {
        // p(ξ) = ξ − 0.5: mean log|p|² = 0 (root inside); p = 2ξ − 1: log 4 ... check
        let one = Complex64::new(1.0, 0.0);
        assert!(circle_log_mean(&[c(-0.5), one]).abs() < 1e-14);
        assert!((circle_log_mean(&[c(-3.0), one]) - 2.0 * 3f64.ln()).abs() < 1e-13);
        // brute-force trapezoid oracle on a smooth case
        let p = [Complex64::new(1.0, 0.3), c(0.2), Complex64::new(0.0, 0.1)];
        let m = 4096;
        let brute: f64 = (0..m)
            .map(|j| {
                let x = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
                (p[0] + p[1] * x + p[2] * x * x).norm_sqr().ln()
            })
            .sum::<f64>()
            / m as f64;
        assert!((circle_log_mean(&p) - brute).abs() < 1e-12);
    }

    #[test]
    fn lemma_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = ComplexPolynomial::new(1, vec![(vec![1], c(1.0))]).unwrap();
        let r = check_lemma_sphere_mean(&z, 0.3, &mut rng).unwrap();
        assert!(r.pass && r.slack.abs() < 1e-12);
        let z1 = ComplexPolynomial::new(2, vec![(vec![1, 0], c(1.0))]).unwrap();
        let r = check_lemma_sphere_mean(&z1, 0.5, &mut rng).unwrap();
        assert!(r.pass, "{r:?}");
        let f = ComplexPolynomial::new(2, vec![(vec![1, 0], c(1.0)), (vec![0, 2], c(1.0))]).unwrap();
        let r = check_lemma_sphere_mean(&f, 0.5, &mut rng).unwrap();
        assert!(r.pass && r.slack > 0.0, "{r:?}");
        let flat = ComplexPolynomial::new(2, vec![(vec![2, 0], c(1.0))]).unwrap();
        assert_eq!(check_lemma_sphere_mean(&flat, 0.5, &mut rng).unwrap_err(), Error::DegenerateGradient);
    }

    #[test]
    fn zero_weight_skips_lower_bounds() {
        let d = ReinhardtDomain::unit_disk();
        let fam = vec![LocalWeight::Radial(RadialWeight::zero(&d).unwrap())];
        let chk = check_theorem_mt(&d, &fam, &[c(0.0)], &[c(1.0)]).unwrap();
        assert_eq!(chk.reports.len(), 2);
        assert!(chk.constants[2].is_none());
    }

    #[test]
    fn gaussian_family_lower_constants_bounded_by_pi() {
        let d = ReinhardtDomain::unit_disk();
        let fam: Vec<LocalWeight> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&a| LocalWeight::Radial(RadialWeight::gaussian(a, &d).unwrap()))
            .collect();
        let chk = check_theorem_mt(&d, &fam, &[c(0.0)], &[c(1.0)]).unwrap();
        for t in &chk.per_weight {
            let exact = PI * (1.0 - (-t.a).exp());
            assert!((t.kernel_lower.unwrap() - exact).abs() < 1e-10);
            assert!(t.kernel_lower.unwrap() <= PI);
        }
        assert!(chk.reports.iter().all(|r| r.pass));
    }
}
