//! S¹-invariant probability-type measures on CP¹ and their quantization.
//!
//! A measure is described by its CDF `F` on the t-line, normalised so the
//! total mass is `2π` (the volume of `ω_FS`). The Calabi–Yau potential has
//! `φ′ = F/2π`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line_fn::{sigmoid, LineFunction};
use crate::quadrature::{self, Integrand1D, Tolerance};
use crate::toric_cp1::{self, QuantumSpectrum, TWO_PI};
use crate::weights::{fs_curvature, fs_potential, ToricPotential};

/// Mass defect tolerated by [`RadonMeasure1D::validate`].
pub const MASS_TOL: f64 = 1e-10;
/// A CDF jump that survives refinement to width ~1e−13 and exceeds this
/// is reported as an atom.
pub const ATOM_TOL: f64 = 1e-5;

/// Serializable description of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// `ω_FS` itself.
    FubiniStudy,
    /// `F(t) = 2π σ(t − shift)`.
    TranslatedFs { shift: f64 },
    /// `F(t) = 2π Σ w_i σ(t − c_i)`; the weights must sum to one.
    FsMixture { terms: Vec<(f64, f64)> },
    /// Mass spread over `[centre − half_width, centre + half_width]` with
    /// `F = π (1 + sgn(x)|x|^exponent)`, `x = (t − centre)/half_width`.
    /// The density is unbounded at `centre` for `exponent < 1`.
    Holder { centre: f64, half_width: f64, exponent: f64 },
    /// `F(t) = 2π (1/2 + atan(t/scale)/π)`: polynomial tails.
    Cauchy { scale: f64 },
    /// Translated FS with part of the mass moved to a point.
    FsWithAtom { at: f64, atom_mass: f64 },
    /// Piecewise-linear CDF through `(t_i, F_i)`, constant outside.
    Sampled { t: Vec<f64>, cdf: Vec<f64> },
}

/// A measure on the t-line given by its CDF.
#[derive(Debug, Clone)]
pub enum RadonMeasure1D {
    Spec(MeasureSpec),
    /// `ω_φ`, with CDF `2π φ′`.
    Potential(ToricPotential),
}

impl From<MeasureSpec> for RadonMeasure1D {
    fn from(s: MeasureSpec) -> Self {
        RadonMeasure1D::Spec(s)
    }
}

impl RadonMeasure1D {
    pub fn from_potential(phi: ToricPotential) -> Self {
        RadonMeasure1D::Potential(phi)
    }

    pub fn translated_fs(shift: f64) -> Self {
        MeasureSpec::TranslatedFs { shift }.into()
    }

    pub fn holder(centre: f64, half_width: f64, exponent: f64) -> Self {
        MeasureSpec::Holder {
            centre,
            half_width,
            exponent,
        }
        .into()
    }

    pub fn label(&self) -> String {
        match self {
            RadonMeasure1D::Potential(_) => "potential".into(),
            RadonMeasure1D::Spec(s) => match s {
                MeasureSpec::FubiniStudy => "fubini_study".into(),
                MeasureSpec::TranslatedFs { shift } => format!("translated_fs({shift})"),
                MeasureSpec::FsMixture { terms } => format!("fs_mixture[{}]", terms.len()),
                MeasureSpec::Holder { exponent, .. } => format!("holder({exponent})"),
                MeasureSpec::Cauchy { scale } => format!("cauchy({scale})"),
                MeasureSpec::FsWithAtom { at, .. } => format!("fs_with_atom({at})"),
                MeasureSpec::Sampled { t, .. } => format!("sampled[{}]", t.len()),
            },
        }
    }

    /// `F(t) = ν((−∞, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        let s = match self {
            RadonMeasure1D::Potential(p) => return TWO_PI * p.slope(t),
            RadonMeasure1D::Spec(s) => s,
        };
        match s {
            MeasureSpec::FubiniStudy => TWO_PI * sigmoid(t),
            MeasureSpec::TranslatedFs { shift } => TWO_PI * sigmoid(t - shift),
            MeasureSpec::FsMixture { terms } => {
                TWO_PI * terms.iter().map(|&(w, c)| w * sigmoid(t - c)).sum::<f64>()
            }
            MeasureSpec::Holder {
                centre,
                half_width,
                exponent,
            } => {
                let x = ((t - centre) / half_width).clamp(-1.0, 1.0);
                std::f64::consts::PI * (1.0 + x.signum() * x.abs().powf(*exponent))
            }
            MeasureSpec::Cauchy { scale } => TWO_PI * (0.5 + (t / scale).atan() / std::f64::consts::PI),
            MeasureSpec::FsWithAtom { at, atom_mass } => {
                (TWO_PI - atom_mass) * sigmoid(t) + if t >= *at { *atom_mass } else { 0.0 }
            }
            MeasureSpec::Sampled { t: ts, cdf } => {
                let n = ts.len();
                if t <= ts[0] {
                    return cdf[0];
                }
                if t >= ts[n - 1] {
                    return cdf[n - 1];
                }
                let i = ts.partition_point(|x| *x <= t) - 1;
                let u = (t - ts[i]) / (ts[i + 1] - ts[i]);
                cdf[i] + u * (cdf[i + 1] - cdf[i])
            }
        }
    }

    /// `lim_{t→∞} F(t)`.
    pub fn total_mass(&self) -> f64 {
        match self {
            RadonMeasure1D::Potential(_) => TWO_PI,
            RadonMeasure1D::Spec(s) => match s {
                MeasureSpec::FsMixture { terms } => TWO_PI * terms.iter().map(|(w, _)| w).sum::<f64>(),
                MeasureSpec::Sampled { cdf, .. } => *cdf.last().unwrap_or(&0.0),
                _ => TWO_PI,
            },
        }
    }

    /// Points where `F` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RadonMeasure1D::Potential(p) => p.breakpoints(),
            RadonMeasure1D::Spec(s) => match s {
                MeasureSpec::Holder {
                    centre, half_width, ..
                } => vec![centre - half_width, *centre, centre + half_width],
                MeasureSpec::FsWithAtom { at, .. } => vec![*at],
                MeasureSpec::Sampled { t, .. } => t.clone(),
                _ => Vec::new(),
            },
        }
    }

    /// Mass, atom and window checks, in that order.
    pub fn validate(&self, grid: &[f64]) -> Result<()> {
        if let RadonMeasure1D::Spec(s) = self {
            check_spec(s)?;
        }
        let mass = self.total_mass();
        if (mass - TWO_PI).abs() > MASS_TOL || !mass.is_finite() {
            return Err(Error::MassMismatch { mass });
        }
        if let Some((t, jump)) = self.find_atom(grid) {
            return Err(Error::AtomDetected { t, jump });
        }
        let (lo, hi) = (self.cdf(grid[0]), self.cdf(grid[grid.len() - 1]));
        if lo > MASS_TOL || TWO_PI - hi > MASS_TOL {
            return Err(Error::WindowTooSmall { lo, hi });
        }
        Ok(())
    }

    /// Largest CDF jump on the grid, chased down by bisection of the cell
    /// that keeps the larger increment.
    fn find_atom(&self, grid: &[f64]) -> Option<(f64, f64)> {
        if let RadonMeasure1D::Potential(p) = self {
            return p.atoms().into_iter().map(|(t, j)| (t, TWO_PI * j)).find(|(_, j)| *j > ATOM_TOL);
        }
        let mut cells: Vec<(f64, f64)> = grid.windows(2).map(|w| (w[0], w[1])).collect();
        cells.extend(self.breakpoints().into_iter().map(|b| (b - 1e-3, b + 1e-3)));
        let mut worst: Option<(f64, f64)> = None;
        for (mut a, mut b) in cells {
            if self.cdf(b) - self.cdf(a) <= ATOM_TOL {
                continue;
            }
            while b - a > 1e-13 * (1.0 + a.abs()) {
                let m = 0.5 * (a + b);
                if self.cdf(m) - self.cdf(a) >= self.cdf(b) - self.cdf(m) {
                    b = m;
                } else {
                    a = m;
                }
            }
            let jump = self.cdf(b) - self.cdf(a);
            if jump > ATOM_TOL && worst.map_or(true, |w| jump > w.1) {
                worst = Some((0.5 * (a + b), jump));
            }
        }
        worst
    }

    /// `∫ f dν = M f(+∞) − ∫ f′ F dt`.
    pub fn integrate(&self, f: &LineFunction) -> Result<f64> {
        let (_, f_hi) = f.limits();
        let mut hints = self.breakpoints();
        hints.push(0.0);
        let ig = Integrand1D::new(|t: f64| f.derivative(t) * self.cdf(t), f64::NEG_INFINITY, f64::INFINITY)
            .with_hints(hints);
        let r = quadrature::integrate_with(&ig, Tolerance::uniform(1e-12).with_budget(20_000))?;
        Ok(self.total_mass() * f_hi - r.value)
    }
}

fn check_spec(s: &MeasureSpec) -> Result<()> {
    match s {
        MeasureSpec::Holder {
            half_width,
            exponent,
            centre,
        } => {
            if !(*half_width > 0.0) || !(*exponent > 0.0 && *exponent <= 1.0) || !centre.is_finite() {
                return Err(Error::invalid("Hölder measure needs half_width > 0 and exponent in (0, 1]"));
            }
        }
        MeasureSpec::Cauchy { scale } if !(*scale > 0.0) => {
            return Err(Error::invalid("Cauchy scale must be positive"));
        }
        MeasureSpec::FsMixture { terms } => {
            if terms.iter().any(|(w, c)| !(*w >= 0.0) || !c.is_finite()) {
                return Err(Error::invalid("mixture weights must be non-negative"));
            }
        }
        MeasureSpec::FsWithAtom { atom_mass, .. } if !(0.0..=TWO_PI).contains(atom_mass) => {
            return Err(Error::invalid("atom mass must lie in [0, 2π]"));
        }
        MeasureSpec::Sampled { t, cdf } => {
            if t.len() != cdf.len() || t.len() < 2 {
                return Err(Error::invalid("sampled CDF needs matching t and cdf columns"));
            }
            if t.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid("sampled t values must increase strictly"));
            }
            if cdf.windows(2).any(|w| w[1] < w[0]) || cdf.iter().any(|f| !f.is_finite()) {
                return Err(Error::invalid("sampled CDF must be finite and non-decreasing"));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Calabi–Yau potential of a measure on a fixed grid.
#[derive(Debug, Clone)]
pub struct CalabiYauSolution {
    pub potential: ToricPotential,
    /// `sup_grid |2π φ′ − F|`.
    pub roundtrip_error: f64,
    /// `2π ∫ ϕ φ_FS″ dt` after normalisation.
    pub normalization: f64,
}

/// Solves `ω_φ = ν`: `φ′ = F/2π` at the knots, values by cumulative
/// trapezoidal integration, then the constant fixed by `∫ ϕ ω_FS = 0`.
pub fn solve_calabi_yau(nu: &RadonMeasure1D, grid: &[f64]) -> Result<CalabiYauSolution> {
    nu.validate(grid)?;
    let slopes: Vec<f64> = grid.iter().map(|&t| (nu.cdf(t) / TWO_PI).clamp(0.0, 1.0)).collect();
    let raw = ToricPotential::spline_from_slopes(grid.to_vec(), slopes.clone(), 0.0)?;
    let offset = relative_mean(&raw, grid)?;
    let potential = ToricPotential::spline_from_slopes(grid.to_vec(), slopes, -offset)?;
    let normalization = TWO_PI * relative_mean(&potential, grid)?;
    let back = toric_cp1::ma_measure(&potential);
    let roundtrip_error = grid
        .iter()
        .map(|&t| (back.cdf(t) - nu.cdf(t)).abs())
        .fold(0.0, f64::max);
    Ok(CalabiYauSolution {
        potential,
        roundtrip_error,
        normalization,
    })
}

// ∫ ϕ φ_FS″ dt
fn relative_mean(phi: &ToricPotential, grid: &[f64]) -> Result<f64> {
    let ig = Integrand1D::new(
        |t: f64| (phi.value(t) - fs_potential(t)) * fs_curvature(t),
        f64::NEG_INFINITY,
        f64::INFINITY,
    )
    .with_hints(grid.iter().copied());
    Ok(quadrature::integrate_with(&ig, Tolerance::uniform(1e-13).with_budget(40_000))?.value)
}

/// Level-k quantization of a measure.
#[derive(Debug, Clone)]
pub struct QuantizedMeasure {
    pub solution: CalabiYauSolution,
    pub spectrum: QuantumSpectrum,
}

pub fn quantize_measure(nu: &RadonMeasure1D, k: usize, grid: &[f64]) -> Result<QuantizedMeasure> {
    let solution = solve_calabi_yau(nu, grid)?;
    let spectrum = toric_cp1::hilbert_norms(&solution.potential, k)?;
    Ok(QuantizedMeasure { solution, spectrum })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakRow {
    pub function: String,
    pub k: usize,
    pub quantum: f64,
    pub exact: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakConvergenceReport {
    pub measure: String,
    pub rows: Vec<WeakRow>,
    /// Per test function: whether the error is smallest at the largest k.
    pub minimized_at_largest: Vec<(String, bool)>,
}

impl WeakConvergenceReport {
    pub fn all_minimized_at_largest(&self) -> bool {
        self.minimized_at_largest.iter().all(|(_, b)| *b)
    }
}

/// `|∫ f dM^k_ν − ∫ f dν|` for every test function and level.
pub fn weak_convergence_report(
    nu: &RadonMeasure1D,
    functions: &[LineFunction],
    k_list: &[usize],
    grid: &[f64],
) -> Result<WeakConvergenceReport> {
    let solution = solve_calabi_yau(nu, grid)?;
    let exact: Vec<f64> = functions.iter().map(|f| nu.integrate(f)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &k in k_list {
        let spec = toric_cp1::hilbert_norms(&solution.potential, k)?;
        for (f, e) in functions.iter().zip(&exact) {
            let q = toric_cp1::integrate_m(&spec, |t| f.value(t), &[(f64::NEG_INFINITY, f64::INFINITY)])?;
            rows.push(WeakRow {
                function: f.name(),
                k,
                quantum: q,
                exact: *e,
                error: (q - e).abs(),
            });
        }
    }
    let kmax = k_list.iter().copied().max().unwrap_or(0);
    let minimized_at_largest = functions
        .iter()
        .map(|f| {
            let name = f.name();
            let errs: Vec<&WeakRow> = rows.iter().filter(|r| r.function == name).collect();
            let best = errs.iter().min_by(|a, b| a.error.total_cmp(&b.error)).map(|r| r.k);
            (name, best == Some(kmax))
        })
        .collect();
    Ok(WeakConvergenceReport {
        measure: nu.label(),
        rows,
        minimized_at_largest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::default_grid;

    #[test]
    fn validation_errors() {
        let g = default_grid();
        let short = RadonMeasure1D::from(MeasureSpec::FsMixture {
            terms: vec![(0.9, 0.0)],
        });
        assert!(matches!(short.validate(&g), Err(Error::MassMismatch { .. })));
        let atom = RadonMeasure1D::from(MeasureSpec::FsWithAtom { at: 0.3, atom_mass: 0.5 });
        match atom.validate(&g) {
            Err(Error::AtomDetected { t, jump }) => {
                assert!((t - 0.3).abs() < 1e-9);
                assert!((jump - 0.5).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        let cauchy = RadonMeasure1D::from(MeasureSpec::Cauchy { scale: 1.0 });
        assert!(matches!(cauchy.validate(&g), Err(Error::WindowTooSmall { .. })));
        assert!(RadonMeasure1D::holder(0.0, 0.5, 0.5).validate(&g).is_ok());
        assert!(RadonMeasure1D::translated_fs(1.0).validate(&g).is_ok());
    }

    #[test]
    fn translated_fs_potential_matches_closed_form() {
        let g = default_grid();
        let c = 1.0;
        let sol = solve_calabi_yau(&RadonMeasure1D::translated_fs(c), &g).unwrap();
        assert!(sol.roundtrip_error < 1e-12);
        assert!(sol.normalization.abs() < 1e-10);
        // closed form up to its own mean: ϕ = φ_FS(t − c) − φ_FS(t) + const
        let exact = ToricPotential::mixture(vec![(1.0, c)]).unwrap();
        let shift = sol.potential.relative(0.0) - exact.relative(0.0);
        for t in [-20.0, -3.0, 0.5, 7.0, 30.0] {
            let d = sol.potential.relative(t) - exact.relative(t) - shift;
            assert!(d.abs() < 1e-4, "t={t}: {d}");
        }
    }

    #[test]
    fn integrals_against_closed_forms() {
        let nu = RadonMeasure1D::translated_fs(1.0);
        assert!((nu.integrate(&LineFunction::ONE).unwrap() - TWO_PI).abs() < 1e-12);
        // ∫ tanh(t) dν = 2π ∫ tanh(t) σ′(t − 1) dt, checked by direct quadrature
        let f = LineFunction::Tanh { shift: 0.0 };
        let direct = Integrand1D::new(
            |t: f64| f.value(t) * TWO_PI * fs_curvature(t - 1.0),
            f64::NEG_INFINITY,
            f64::INFINITY,
        );
        let d = quadrature::integrate(&direct, 1e-13).unwrap().value;
        assert!((nu.integrate(&f).unwrap() - d).abs() < 1e-10);
    }

    #[test]
    fn holder_integral_by_parts_matches_density() {
        let nu = RadonMeasure1D::holder(0.2, 0.5, 0.5);
        let f = LineFunction::Tanh { shift: 0.0 };
        // substitute u = sgn(x)|x|^γ, so dF = π du on [-1, 1]
        let (c, d, g) = (0.2, 0.5, 0.5);
        let direct = Integrand1D::new(
            |u: f64| {
                let x = u.signum() * u.abs().powf(1.0 / g);
                std::f64::consts::PI * f.value(c + d * x)
            },
            -1.0,
            1.0,
        )
        .with_hints([0.0]);
        let want = quadrature::integrate(&direct, 1e-13).unwrap().value;
        assert!((nu.integrate(&f).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn fs_weak_error_for_constants_is_exact() {
        let g = default_grid();
        let nu = RadonMeasure1D::from(MeasureSpec::FubiniStudy);
        let r = weak_convergence_report(&nu, &[LineFunction::ONE], &[10, 20], &g).unwrap();
        for row in &r.rows {
            assert!((row.error - TWO_PI / row.k as f64).abs() < 1e-9);
        }
    }
}
