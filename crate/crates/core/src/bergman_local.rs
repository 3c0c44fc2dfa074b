//! Weighted Bergman kernels `K`, the constrained kernels `K̃`, the Bergman
//! metric `B² = K̃/K` and Demailly approximations on Reinhardt model domains.
//!
//! The weighted Bergman space is truncated to polynomials of degree `≤ D`.
//! On complete Reinhardt domains with bounded weights polynomials are dense,
//! so the truncated kernels increase to the true ones.
//!
//! Internally the Gram matrix is equilibrated: `H = conj(G) = S·H̃·S` with
//! `S = diag(√G_αα)` stored as logarithms, and `H̃ = L̃L̃*`. A linear
//! functional `ℓ(f) = Σ c_α λ_α` then has `sup{|ℓ(f)|² : ‖f‖ ≤ 1} = ‖a‖²`
//! with `a = L̃⁻¹(conj λ / S)`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, PolarRule};
use crate::weights::{PlanarWeight, RadialWeight, ReinhardtDomain};

/// Largest accepted condition estimate of the equilibrated Gram factor.
pub const CONDITION_LIMIT: f64 = 1e14;
/// Relative disagreement allowed between the two `K̃` computations.
pub const CROSS_CHECK_TOL: f64 = 1e-7;
/// Step of the finite-difference Hessian used to cross-check `B²`.
pub const METRIC_FD_STEP: f64 = 1e-3;
pub const METRIC_FD_TOL: f64 = 1e-3;

/// A weight on a model domain: product-radial in any dimension, or an
/// arbitrary subharmonic function on a disk.
#[derive(Debug, Clone)]
pub enum LocalWeight {
    Radial(RadialWeight),
    Planar(PlanarWeight),
}

impl LocalWeight {
    pub fn value(&self, z: &[Complex64]) -> f64 {
        match self {
            LocalWeight::Radial(w) => w.value(z),
            LocalWeight::Planar(w) => w.value(z[0]),
        }
    }

    /// The weight `k·u` used by Demailly approximations.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            LocalWeight::Radial(w) => LocalWeight::Radial(w.scaled(k)),
            LocalWeight::Planar(w) => {
                let inner = w.clone();
                let mut out = PlanarWeight::new(format!("{k}*({})", w.label()), move |z| k * inner.value(z))
                    .with_smooth(w.is_smooth());
                if let Some(a) = w.levi_lower() {
                    out = out.with_levi_lower(k * a);
                }
                LocalWeight::Planar(out)
            }
        }
    }
}

impl From<RadialWeight> for LocalWeight {
    fn from(w: RadialWeight) -> Self {
        LocalWeight::Radial(w)
    }
}

impl From<PlanarWeight> for LocalWeight {
    fn from(w: PlanarWeight) -> Self {
        LocalWeight::Planar(w)
    }
}

/// Multi-indices `|α| ≤ degree` in graded-lexicographic order.
pub fn multi_indices(n: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(rest: u32, slot: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == cur.len() {
            cur[slot] = rest;
            out.push(cur.clone());
            return;
        }
        for a in (0..=rest).rev() {
            cur[slot] = a;
            fill(rest - a, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    for d in 0..=degree {
        fill(d, 0, &mut cur, &mut out);
    }
    out
}

/// Monomial Gram data `G_αβ = ∫_Ω z^α conj(z^β) e^{−u} dλ` for `|α|, |β| ≤ D`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    domain: ReinhardtDomain,
    degree: u32,
    indices: Vec<Vec<u32>>,
    log_scale: Vec<f64>,
    // equilibrated conj(G), row-major; None when G is diagonal
    normalized: Option<Vec<Complex64>>,
}

impl GramMatrix {
    pub fn build(domain: &ReinhardtDomain, weight: &LocalWeight, degree: u32) -> Result<Self> {
        domain.validate()?;
        match weight {
            LocalWeight::Radial(w) => Self::radial(domain, w, degree),
            LocalWeight::Planar(w) => Self::planar(domain, w, degree),
        }
    }

    fn radial(domain: &ReinhardtDomain, weight: &RadialWeight, degree: u32) -> Result<Self> {
        let n = domain.dimension();
        if weight.dimension() != n {
            return Err(Error::invalid("weight and domain dimensions differ"));
        }
        let indices = multi_indices(n, degree);
        let log_moments: Vec<f64> = match domain {
            ReinhardtDomain::Polydisk { radii } => {
                // per-coordinate radial moments, combined as products
                let mut tables = Vec::with_capacity(n);
                for (profile, r) in weight.profiles().iter().zip(radii) {
                    let mut t = Vec::with_capacity(degree as usize + 1);
                    for m in 0..=degree {
                        t.push(std::f64::consts::PI.ln() + quadrature::log_radial_moment(profile, m, r * r)?);
                    }
                    tables.push(t);
                }
                indices
                    .iter()
                    .map(|a| a.iter().enumerate().map(|(i, &ai)| tables[i][ai as usize]).sum())
                    .collect()
            }
            ReinhardtDomain::Ball { .. } => {
                let mut by_degree: HashMap<u32, f64> = HashMap::new();
                let mut out = Vec::with_capacity(indices.len());
                for a in &indices {
                    let d: u32 = a.iter().sum();
                    let base = match by_degree.get(&d) {
                        Some(v) => *v,
                        None => {
                            let mut e = vec![0; n];
                            e[0] = d;
                            let v = quadrature::log_moment(domain, weight, &e)?;
                            by_degree.insert(d, v);
                            v
                        }
                    };
                    out.push(base + log_factorial_multi(a) - log_factorial(d));
                }
                out
            }
        };
        Ok(Self {
            domain: domain.clone(),
            degree,
            indices,
            log_scale: log_moments.iter().map(|l| 0.5 * l).collect(),
            normalized: None,
        })
    }

    fn planar(domain: &ReinhardtDomain, weight: &PlanarWeight, degree: u32) -> Result<Self> {
        let radius = match domain {
            ReinhardtDomain::Polydisk { radii } if radii.len() == 1 => radii[0],
            _ => {
                return Err(Error::invalid(
                    "non-radial weights are supported on a disk in dimension one only",
                ))
            }
        };
        let size = degree as usize + 1;
        let rule = PolarRule::standard(radius);
        let dtheta = rule.angle_weight();
        // G_jk = ∫ z^j conj(z)^k e^{-u}; accumulate per ring then compensate
        let mut g = vec![Complex64::new(0.0, 0.0); size * size];
        let mut comp = vec![Complex64::new(0.0, 0.0); size * size];
        let mut powers = vec![Complex64::new(0.0, 0.0); size];
        for &(r, wr) in &rule.radial {
            for i in 0..rule.angles {
                let z = Complex64::from_polar(r, rule.angle(i));
                let w = wr * dtheta * (-weight.value(z)).exp();
                let mut p = Complex64::new(1.0, 0.0);
                for slot in powers.iter_mut() {
                    *slot = p;
                    p *= z;
                }
                for j in 0..size {
                    let pj = powers[j] * w;
                    for k in j..size {
                        let term = pj * powers[k].conj();
                        let idx = j * size + k;
                        neumaier_step(&mut g[idx], &mut comp[idx], term);
                    }
                }
            }
        }
        for j in 0..size {
            for k in j..size {
                let v = g[j * size + k] + comp[j * size + k];
                g[j * size + k] = v;
                g[k * size + j] = v.conj();
            }
        }
        let log_scale: Vec<f64> = (0..size)
            .map(|j| {
                let d = g[j * size + j].re;
                if d > 0.0 {
                    Ok(0.5 * d.ln())
                } else {
                    Err(Error::IllConditioned {
                        degree: degree as usize,
                        condition: f64::INFINITY,
                    })
                }
            })
            .collect::<Result<_>>()?;
        let mut h = vec![Complex64::new(0.0, 0.0); size * size];
        for j in 0..size {
            for k in 0..size {
                let s = (-(log_scale[j] + log_scale[k])).exp();
                h[j * size + k] = g[j * size + k].conj() * s;
            }
        }
        Ok(Self {
            domain: domain.clone(),
            degree,
            indices: (0..=degree).map(|d| vec![d]).collect(),
            log_scale,
            normalized: Some(h),
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn domain(&self) -> &ReinhardtDomain {
        &self.domain
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_diagonal(&self) -> bool {
        self.normalized.is_none()
    }

    /// `log G_αα`.
    pub fn log_diagonal(&self, i: usize) -> f64 {
        2.0 * self.log_scale[i]
    }

    /// `G_αβ` in absolute terms (may underflow for large degrees).
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let s = (self.log_scale[i] + self.log_scale[j]).exp();
        match &self.normalized {
            None => {
                if i == j {
                    Complex64::new(s, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Some(h) => h[i * self.len() + j].conj() * s,
        }
    }

    fn normalized_entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.normalized {
            None => Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0),
            Some(h) => h[i * self.len() + j],
        }
    }
}

fn neumaier_step(sum: &mut Complex64, comp: &mut Complex64, x: Complex64) {
    let step = |s: &mut f64, c: &mut f64, x: f64| {
        let t = *s + x;
        if s.abs() >= x.abs() {
            *c += (*s - t) + x;
        } else {
            *c += (x - t) + *s;
        }
        *s = t;
    };
    step(&mut sum.re, &mut comp.re, x.re);
    step(&mut sum.im, &mut comp.im, x.im);
}

pub(crate) fn log_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn log_factorial_multi(a: &[u32]) -> f64 {
    a.iter().map(|&k| log_factorial(k)).sum()
}

/// A linear functional on polynomials, described by its values on monomials.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// `f ↦ f(z)`
    Evaluation(Vec<Complex64>),
    /// `f ↦ ∂f(z)·v`
    Directional(Vec<Complex64>, Vec<Complex64>),
    /// `f ↦` the Taylor coefficient of `z^α` at the origin
    Taylor(Vec<u32>),
}

/// `ℓ` pulled back to orthonormal coordinates: `sup |ℓ(f)|² = e^{2·log_scale}‖a‖²`.
#[derive(Debug, Clone)]
pub struct RepresentedFunctional {
    pub log_scale: f64,
    pub a: Vec<Complex64>,
}

impl RepresentedFunctional {
    pub fn log_norm_sqr(&self) -> f64 {
        let s: f64 = self.a.iter().map(|c| c.norm_sqr()).sum();
        2.0 * self.log_scale + s.ln()
    }
}

// (log|value|, unit phase) of ℓ(z^α), or None when the value is zero
fn monomial_value(ell: &Functional, alpha: &[u32]) -> Option<(f64, Complex64)> {
    let term = |z: &[Complex64], beta: &[u32]| -> Option<(f64, Complex64)> {
        let mut log_abs = 0.0;
        let mut phase = Complex64::new(1.0, 0.0);
        for (zi, &b) in z.iter().zip(beta) {
            if b == 0 {
                continue;
            }
            let r = zi.norm();
            if r == 0.0 {
                return None;
            }
            log_abs += b as f64 * r.ln();
            phase *= (zi / r).powu(b);
        }
        Some((log_abs, phase))
    };
    match ell {
        Functional::Evaluation(z) => term(z, alpha),
        Functional::Taylor(beta) => (beta.as_slice() == alpha).then_some((0.0, Complex64::new(1.0, 0.0))),
        Functional::Directional(z, v) => {
            let mut parts = Vec::new();
            for i in 0..alpha.len() {
                if alpha[i] == 0 || v[i] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut beta = alpha.to_vec();
                beta[i] -= 1;
                if let Some((l, p)) = term(z, &beta) {
                    let c = v[i] * alpha[i] as f64;
                    parts.push((l + c.norm().ln(), p * c / c.norm()));
                }
            }
            let m = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                return None;
            }
            let s: Complex64 = parts.iter().map(|(l, p)| p * (l - m).exp()).sum();
            let r = s.norm();
            (r > 0.0).then(|| (m + r.ln(), s / r))
        }
    }
}

/// Orthonormal basis of the truncated weighted Bergman space, held as the
/// Cholesky factor of the equilibrated Gram matrix.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    gram: GramMatrix,
    // lower-triangular L̃, row-major; None for diagonal Gram matrices
    factor: Option<Vec<Complex64>>,
    condition: f64,
}

impl OrthonormalBasis {
    pub fn new(gram: GramMatrix) -> Result<Self> {
        if gram.is_diagonal() {
            return Ok(Self {
                gram,
                factor: None,
                condition: 1.0,
            });
        }
        let n = gram.len();
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        let mut pmin = f64::INFINITY;
        let mut pmax: f64 = 0.0;
        for j in 0..n {
            let mut s = gram.normalized_entry(j, j);
            let mut c = Complex64::new(0.0, 0.0);
            for k in 0..j {
                neumaier_step(&mut s, &mut c, -Complex64::new(l[j * n + k].norm_sqr(), 0.0));
            }
            let d = (s + c).re;
            if !(d > 0.0) {
                return Err(Error::IllConditioned {
                    degree: gram.degree() as usize,
                    condition: f64::INFINITY,
                });
            }
            let ljj = d.sqrt();
            pmin = pmin.min(ljj);
            pmax = pmax.max(ljj);
            l[j * n + j] = Complex64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut s = gram.normalized_entry(i, j);
                let mut c = Complex64::new(0.0, 0.0);
                for k in 0..j {
                    neumaier_step(&mut s, &mut c, -(l[i * n + k] * l[j * n + k].conj()));
                }
                l[i * n + j] = (s + c) / ljj;
            }
        }
        let condition = (pmax / pmin).powi(2);
        if condition > CONDITION_LIMIT {
            return Err(Error::IllConditioned {
                degree: gram.degree() as usize,
                condition,
            });
        }
        Ok(Self {
            gram,
            factor: Some(l),
            condition,
        })
    }

    pub fn build(domain: &ReinhardtDomain, weight: &LocalWeight, degree: u32) -> Result<Self> {
        Self::new(GramMatrix::build(domain, weight, degree)?)
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn degree(&self) -> u32 {
        self.gram.degree()
    }

    /// Condition estimate `(max pivot / min pivot)²` of the equilibrated factor.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Coefficients `C` with `e_j = Σ_α C_{αj} z^α`, i.e. `C = S⁻¹ L̃^{−*}`
    /// written in the monomial basis. Entries may overflow at high degree.
    pub fn coefficients(&self) -> Vec<Vec<Complex64>> {
        let n = self.gram.len();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            // column j of L̃^{-*}: solve L̃* x = e_j by back substitution
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            for i in (0..=j).rev() {
                let mut s = Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0);
                for k in i + 1..=j {
                    s -= self.l(k, i).conj() * x[k];
                }
                x[i] = s / self.l(i, i).conj();
            }
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = xi.conj() * (-self.gram.log_scale[i]).exp();
            }
            cols.push(x);
        }
        cols
    }

    /// `max |⟨e_i, e_j⟩ − δ_ij|` in the equilibrated coordinates.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.gram.len();
        let cols = self.coefficients();
        let scaled: Vec<Vec<Complex64>> = cols
            .iter()
            .map(|c| c.iter().enumerate().map(|(i, v)| v * self.gram.log_scale[i].exp()).collect())
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                // ⟨e_i, e_j⟩ = Σ c_α(i) conj(c_β(j)) G_αβ
                let mut s = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    for b in 0..n {
                        let g = self.gram.normalized_entry(a, b).conj();
                        s += scaled[i][a] * scaled[j][b].conj() * g;
                    }
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    fn l(&self, i: usize, j: usize) -> Complex64 {
        match &self.factor {
            None => Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0),
            Some(l) => l[i * self.gram.len() + j],
        }
    }

    /// Pulls `ℓ` back to orthonormal coordinates.
    pub fn represent(&self, ell: &Functional) -> RepresentedFunctional {
        let n = self.gram.len();
        let mut logs = vec![f64::NEG_INFINITY; n];
        let mut phases = vec![Complex64::new(0.0, 0.0); n];
        for (i, alpha) in self.gram.indices.iter().enumerate() {
            if let Some((l, p)) = monomial_value(ell, alpha) {
                logs[i] = l - self.gram.log_scale[i];
                phases[i] = p.conj();
            }
        }
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return RepresentedFunctional {
                log_scale: f64::NEG_INFINITY,
                a: vec![Complex64::new(0.0, 0.0); n],
            };
        }
        let w: Vec<Complex64> = logs
            .iter()
            .zip(&phases)
            .map(|(l, p)| p * (l - m).exp())
            .collect();
        let a = match &self.factor {
            None => w,
            Some(l) => {
                let mut a = vec![Complex64::new(0.0, 0.0); n];
                for i in 0..n {
                    let mut s = w[i];
                    for k in 0..i {
                        s -= l[i * n + k] * a[k];
                    }
                    a[i] = s / l[i * n + i];
                }
                a
            }
        };
        RepresentedFunctional { log_scale: m, a }
    }

    /// `log K_D(z)`.
    pub fn log_kernel_diag(&self, z: &[Complex64]) -> f64 {
        self.represent(&Functional::Evaluation(z.to_vec())).log_norm_sqr()
    }

    /// `K_D(z) = Σ_j |e_j(z)|²`.
    pub fn kernel_diag(&self, z: &[Complex64]) -> f64 {
        self.log_kernel_diag(z).exp()
    }

    /// `sup{|ℓ(f)|² : ‖f‖ ≤ 1, c_i(f) = 0}` as a logarithm.
    pub fn log_constrained_sup(&self, target: &Functional, constraints: &[Functional]) -> f64 {
        let t = self.represent(target);
        if t.log_scale == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for c in constraints {
            let mut v = self.represent(c).a;
            // modified Gram–Schmidt, applied twice
            for _ in 0..2 {
                for q in &basis {
                    let d = inner(q, &v);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= d * qi;
                    }
                }
            }
            let nrm = norm(&v);
            if nrm > 1e-14 {
                basis.push(v.iter().map(|x| x / nrm).collect());
            }
        }
        let mut r = t.a.clone();
        for _ in 0..2 {
            for q in &basis {
                let d = inner(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= d * qi;
                }
            }
        }
        2.0 * t.log_scale + norm(&r).powi(2).ln()
    }

    /// `K̃_D(z; v)`, computed by the rank-one formula and by a Householder
    /// null-space projection; the two must agree to [`CROSS_CHECK_TOL`].
    pub fn tilde_kernel(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        let (a, b) = self.tilde_kernel_both(z, v);
        let scale = a.abs().max(b.abs());
        if (a - b).abs() > CROSS_CHECK_TOL * scale {
            return Err(Error::CrossCheckMismatch {
                quantity: "tilde kernel",
                first: a,
                second: b,
            });
        }
        Ok(b)
    }

    /// Both `K̃` computations, without the cross-check.
    pub fn tilde_kernel_both(&self, z: &[Complex64], v: &[Complex64]) -> (f64, f64) {
        let v = unit(v);
        let e = self.represent(&Functional::Evaluation(z.to_vec()));
        let f = self.represent(&Functional::Directional(z.to_vec(), v));
        if f.log_scale == f64::NEG_INFINITY {
            return (0.0, 0.0);
        }
        let scale = (2.0 * f.log_scale).exp();
        // (a) ‖F‖² − |⟨E, F⟩|² / ‖E‖²
        let ee = norm(&e.a).powi(2);
        let ff = norm(&f.a).powi(2);
        let ef = inner(&e.a, &f.a);
        let rank_one = (ff - ef.norm_sqr() / ee) * scale;
        // (b) reflect E onto the first axis, keep the other coordinates of F
        let alpha = norm(&e.a);
        let theta = if e.a[0].norm() > 0.0 {
            e.a[0] / e.a[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut u = e.a.clone();
        u[0] += theta * alpha;
        let uu = norm(&u).powi(2);
        let d = inner(&u, &f.a);
        let projected: f64 = f
            .a
            .iter()
            .zip(&u)
            .skip(1)
            .map(|(fi, ui)| (fi - ui * (2.0 * d / uu)).norm_sqr())
            .sum();
        (rank_one, projected * scale)
    }

    /// `K`, `K̃` and `B² = K̃/K` at `z` in direction `v`.
    pub fn kernel_value(&self, z: &[Complex64], v: &[Complex64]) -> Result<KernelValue> {
        let kernel = self.kernel_diag(z);
        let tilde = self.tilde_kernel(z, v)?;
        Ok(KernelValue {
            kernel,
            tilde_kernel: tilde,
            metric: tilde / kernel,
            degree: self.degree(),
        })
    }

    /// `B²(z; v)`, cross-checked against `∂_ζ∂_ζ̄ log K(z + ζv)` from a
    /// five-point Laplacian with step [`METRIC_FD_STEP`].
    pub fn bergman_metric(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        let value = self.kernel_value(z, v)?;
        let fd = self.metric_finite_difference(z, v);
        if (fd - value.metric).abs() > METRIC_FD_TOL * value.metric.abs() {
            return Err(Error::CrossCheckMismatch {
                quantity: "bergman metric",
                first: value.metric,
                second: fd,
            });
        }
        Ok(value.metric)
    }

    /// `¼ Δ_ζ log K(z + ζv)` at `ζ = 0`.
    pub fn metric_finite_difference(&self, z: &[Complex64], v: &[Complex64]) -> f64 {
        let v = unit(v);
        let h = METRIC_FD_STEP;
        let at = |zeta: Complex64| {
            let p: Vec<Complex64> = z.iter().zip(&v).map(|(zi, vi)| zi + zeta * vi).collect();
            self.log_kernel_diag(&p)
        };
        let c = at(Complex64::new(0.0, 0.0));
        let s = at(Complex64::new(h, 0.0))
            + at(Complex64::new(-h, 0.0))
            + at(Complex64::new(0.0, h))
            + at(Complex64::new(0.0, -h));
        (s - 4.0 * c) / (4.0 * h * h)
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    let m = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * a.iter().map(|x| (x / m).norm_sqr()).sum::<f64>().sqrt()
}

fn unit(v: &[Complex64]) -> Vec<Complex64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub kernel: f64,
    pub tilde_kernel: f64,
    pub metric: f64,
    pub degree: u32,
}

/// Truncation policy: start at degree 8 and double until the kernel at the
/// query point changes by at most `rel_tol`.
#[derive(Debug, Clone, Copy)]
pub struct Truncation {
    pub start: u32,
    pub max_degree: u32,
    pub rel_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            start: 8,
            max_degree: 1024,
            rel_tol: 1e-8,
        }
    }
}

/// A kernel value at a degree where the truncation has stabilised.
#[derive(Debug, Clone)]
pub struct ConvergedKernel {
    pub log_kernel: f64,
    pub basis: OrthonormalBasis,
    /// `false` when conditioning stopped the doubling first; the value is
    /// then the last certified lower approximation.
    pub converged: bool,
}

pub fn converged_kernel(
    domain: &ReinhardtDomain,
    weight: &LocalWeight,
    z: &[Complex64],
    policy: Truncation,
) -> Result<ConvergedKernel> {
    converged_at(domain, weight, policy, |b| vec![b.log_kernel_diag(z)])
        .map(|(basis, vals, converged)| ConvergedKernel {
            log_kernel: vals[0],
            basis,
            converged,
        })
}

/// Doubles the degree until every value of `eval` (logarithms of monotone
/// quantities) is stable.
pub fn converged_at<E: Fn(&OrthonormalBasis) -> Vec<f64>>(
    domain: &ReinhardtDomain,
    weight: &LocalWeight,
    policy: Truncation,
    eval: E,
) -> Result<(OrthonormalBasis, Vec<f64>, bool)> {
    let mut degree = policy.start.max(1);
    let mut prev: Option<(OrthonormalBasis, Vec<f64>)> = None;
    loop {
        let basis = match OrthonormalBasis::build(domain, weight, degree) {
            Ok(b) => b,
            Err(Error::IllConditioned { .. }) if prev.is_some() => {
                let (b, v) = prev.unwrap();
                return Ok((b, v, false));
            }
            Err(e) => return Err(e),
        };
        let vals = eval(&basis);
        if let Some((_, old)) = &prev {
            let stable = vals
                .iter()
                .zip(old)
                .all(|(new, old)| (new - old).abs() <= policy.rel_tol || (new == old));
            if stable {
                return Ok((basis, vals, true));
            }
        }
        if degree >= policy.max_degree {
            return Ok((basis, vals, false));
        }
        prev = Some((basis, vals));
        degree = (degree * 2).min(policy.max_degree);
    }
}

/// Demailly approximation `u_k(z) = (1/k) log K_{Ω,ku}(z)`.
pub fn demailly_approx(
    domain: &ReinhardtDomain,
    weight: &LocalWeight,
    k: u32,
    z: &[Complex64],
) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let scaled = weight.scaled(k as f64);
    let r = converged_kernel(domain, &scaled, z, Truncation::default())?;
    Ok(r.log_kernel / k as f64)
}

/// `u_k` at many points, sharing one basis per degree.
pub fn demailly_profile(
    domain: &ReinhardtDomain,
    weight: &LocalWeight,
    k: u32,
    points: &[Vec<Complex64>],
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let scaled = weight.scaled(k as f64);
    let (_, vals, _) = converged_at(domain, &scaled, Truncation::default(), |b| {
        points.iter().map(|z| b.log_kernel_diag(z)).collect()
    })?;
    Ok(vals.into_iter().map(|v| v / k as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn disk_basis(a: f64, degree: u32) -> OrthonormalBasis {
        let d = ReinhardtDomain::unit_disk();
        let w = RadialWeight::gaussian(a, &d).unwrap();
        OrthonormalBasis::build(&d, &w.into(), degree).unwrap()
    }

    #[test]
    fn graded_lex_order() {
        let idx = multi_indices(2, 2);
        let expect: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(idx, expect);
        assert_eq!(multi_indices(3, 4).len(), 35);
    }

    #[test]
    fn unweighted_disk_gram() {
        let b = disk_basis(0.0, 1);
        assert!(b.gram().is_diagonal());
        assert!((b.gram().entry(0, 0).re - PI).abs() < 1e-13);
        assert!((b.gram().entry(1, 1).re - PI / 2.0).abs() < 1e-13);
        assert_eq!(b.gram().entry(0, 1), c(0.0));
    }

    #[test]
    fn polydisk_gram_is_product() {
        let d = ReinhardtDomain::unit_polydisk(2);
        let w = RadialWeight::zero(&d).unwrap();
        let g = GramMatrix::build(&d, &w.into(), 1).unwrap();
        let expect = [PI * PI, PI * PI / 2.0, PI * PI / 2.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((g.entry(i, i).re - e).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_kernel_closed_forms() {
        let b = disk_basis(0.0, 200);
        assert!((b.kernel_diag(&[c(0.0)]) - 1.0 / PI).abs() < 1e-14);
        let exact = 1.0 / (PI * 0.75f64.powi(2));
        assert!((b.kernel_diag(&[c(0.5)]) - exact).abs() < 1e-12 * exact);
        let g = disk_basis(1.0, 8);
        let exact = 1.0 / (PI * (1.0 - (-1f64).exp()));
        assert!((g.kernel_diag(&[c(0.0)]) - exact).abs() < 1e-12);
    }

    #[test]
    fn tilde_kernel_and_metric_closed_forms() {
        let b = disk_basis(0.0, 200);
        let z0 = [c(0.0)];
        let v = [c(1.0)];
        assert!((b.tilde_kernel(&z0, &v).unwrap() - 2.0 / PI).abs() < 1e-13);
        assert!((b.bergman_metric(&z0, &v).unwrap() - 2.0).abs() < 1e-12);
        let z = [c(0.5)];
        let exact = 2.0 / 0.75f64.powi(2);
        assert!((b.bergman_metric(&z, &v).unwrap() - exact).abs() < 1e-10 * exact);
        let g = disk_basis(1.0, 8);
        let exact = 1.0 / (PI * (1.0 - 2.0 * (-1f64).exp()));
        assert!((g.tilde_kernel(&z0, &v).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn kernel_increases_with_degree() {
        let z = [Complex64::new(0.3, 0.4)];
        let mut prev = 0.0;
        for d in [1, 2, 4, 8, 16, 32] {
            let k = disk_basis(1.5, d).kernel_diag(&z);
            assert!(k >= prev * (1.0 - 1e-15));
            prev = k;
        }
    }

    #[test]
    fn planar_gram_matches_riemann_sum() {
        let d = ReinhardtDomain::unit_disk();
        let w = PlanarWeight::real_part(1.0);
        let g = GramMatrix::build(&d, &w.clone().into(), 1).unwrap();
        assert!(!g.is_diagonal());
        let g01 = g.entry(0, 1);
        assert!(g01.norm() > 1e-3);
        assert!((g.entry(1, 0) - g01.conj()).norm() < 1e-15);
        // brute-force midpoint Riemann sum on a Cartesian grid
        let m = 1200;
        let h = 2.0 / m as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                let z = Complex64::new(-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
                if z.norm() < 1.0 {
                    s += z.conj() * (-w.value(z)).exp() * h * h;
                }
            }
        }
        assert!((g01 - s).norm() < 1e-4 * s.norm().max(1.0), "{g01} vs {s}");
    }

    #[test]
    fn planar_radial_case_agrees_with_radial_path() {
        let d = ReinhardtDomain::unit_disk();
        let planar = PlanarWeight::gaussian_harmonic(1.0, 0.0);
        let radial = RadialWeight::gaussian(1.0, &d).unwrap();
        let bp = OrthonormalBasis::build(&d, &planar.into(), 12).unwrap();
        let br = OrthonormalBasis::build(&d, &radial.into(), 12).unwrap();
        let z = [Complex64::new(0.2, -0.3)];
        let (kp, kr) = (bp.kernel_diag(&z), br.kernel_diag(&z));
        assert!((kp - kr).abs() < 1e-11 * kr);
        assert!(bp.orthonormality_residual() < 1e-10);
    }

    #[test]
    fn cross_checks_agree_for_non_radial_weight() {
        let d = ReinhardtDomain::unit_disk();
        let w = PlanarWeight::gaussian_harmonic(1.0, 0.5);
        let b = OrthonormalBasis::build(&d, &w.into(), 24).unwrap();
        assert!(b.orthonormality_residual() < 1e-10);
        let z = [Complex64::new(0.1, 0.2)];
        let v = [Complex64::new(0.6, 0.8)];
        let (x, y) = b.tilde_kernel_both(&z, &v);
        assert!((x - y).abs() < 1e-9 * y);
        b.bergman_metric(&z, &v).unwrap();
    }

    #[test]
    fn taylor_constrained_sup_is_inverse_moment() {
        let b = disk_basis(2.0, 6);
        for m in 0..4u32 {
            let cons: Vec<Functional> = (0..m).map(|j| Functional::Taylor(vec![j])).collect();
            let v = b.log_constrained_sup(&Functional::Taylor(vec![m]), &cons).exp();
            let moment = b.gram().log_diagonal(m as usize).exp();
            assert!((v * moment - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn demailly_closed_forms_at_origin() {
        let d = ReinhardtDomain::unit_disk();
        let zero = LocalWeight::Radial(RadialWeight::zero(&d).unwrap());
        for k in [1, 3, 10] {
            let v = demailly_approx(&d, &zero, k, &[c(0.0)]).unwrap();
            assert!((v - (1.0 / PI).ln() / k as f64).abs() < 1e-13);
        }
        let a = 1.0;
        let w = LocalWeight::Radial(RadialWeight::gaussian(a, &d).unwrap());
        for k in [2, 8, 32] {
            let kf = k as f64;
            let exact = (kf * a / (PI * (1.0 - (-kf * a).exp()))).ln() / kf;
            let v = demailly_approx(&d, &w, k, &[c(0.0)]).unwrap();
            assert!((v - exact).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn larger_domain_has_smaller_kernel() {
        let small = ReinhardtDomain::polydisk(1.0, 1);
        let big = ReinhardtDomain::polydisk(2.0, 1);
        let z = [Complex64::new(0.3, 0.1)];
        for k in [1, 4, 16] {
            let ws = LocalWeight::Radial(RadialWeight::gaussian(1.0, &small).unwrap());
            let wb = LocalWeight::Radial(RadialWeight::gaussian(1.0, &big).unwrap());
            let us = demailly_approx(&small, &ws, k, &z).unwrap();
            let ub = demailly_approx(&big, &wb, k, &z).unwrap();
            assert!(us >= ub);
        }
    }

    #[test]
    fn ball_moments_use_factorial_split() {
        let d = ReinhardtDomain::Ball {
            radius: 1.0,
            dimension: 2,
        };
        let w = RadialWeight::zero(&d).unwrap();
        let g = GramMatrix::build(&d, &w.into(), 2).unwrap();
        // ∫_B |z^α|² = π² α! / (|α| + 2)!
        for (i, a) in g.indices().iter().enumerate() {
            let fact = |k: u32| (1..=k).product::<u32>() as f64;
            let exact = PI * PI * fact(a[0]) * fact(a[1]) / fact(a[0] + a[1] + 2);
            assert!((g.entry(i, i).re - exact).abs() < 1e-12 * exact, "{a:?}");
        }
    }
}
