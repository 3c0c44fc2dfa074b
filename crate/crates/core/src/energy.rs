//! Monge–Ampère energy, its quantized counterpart, and ω-psh envelopes on
//! CP¹ in the S¹-invariant model.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::line_fn::LineFunction;
use crate::quadrature::{self, Integrand1D, Tolerance};
use crate::report::{is_non_increasing, BoundReport, Direction};
use crate::toric_cp1::{self, hilbert_norms, perturbed_log_norms, QuantumSpectrum, TWO_PI};
use crate::weights::{fs_curvature, fs_potential, linspace, ToricPotential, GRID_LO};

const ENERGY_TOL: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-13,
    max_subdivisions: 40_000,
};
/// Agreement required between the measure and Dirichlet forms of `I`.
pub const DIRICHLET_TOL: f64 = 1e-8;
/// Finite-difference steps for the derivative identities.
pub const FD_STEPS: (f64, f64) = (1e-3, 1e-4);

/// `I(φ) = ½∫ϕ(ω + ω_φ)` and its two pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyValue {
    pub value: f64,
    /// `½∫ϕ ω`
    pub omega_term: f64,
    /// `½∫ϕ ω_φ`
    pub phi_term: f64,
    /// `½∫ϕ ω_φ` recomputed as `π(ϕ(+∞) − ∫ϕ′φ′ dt)`.
    pub dirichlet_term: f64,
    /// Set when an unbounded potential was replaced by `max(ϕ, level)`.
    pub clip_level: Option<f64>,
}

/// Monge–Ampère energy by quadrature against `ω_FS` and `dφ′`, with the
/// second term cross-checked through integration by parts.
pub fn ma_energy(phi: &ToricPotential) -> Result<EnergyValue> {
    let (phi, clip_level) = if phi.is_bounded() {
        (phi.clone(), None)
    } else {
        let level = phi.relative(GRID_LO);
        let floor = ToricPotential::fubini_study().shifted(level);
        (ToricPotential::max(phi, &floor), Some(level))
    };
    let mut hints = phi.breakpoints();
    hints.push(0.0);
    let quad = |g: &dyn Fn(f64) -> f64| -> Result<f64> {
        let ig = Integrand1D::new(g, f64::NEG_INFINITY, f64::INFINITY).with_hints(hints.iter().copied());
        Ok(quadrature::integrate_with(&ig, ENERGY_TOL)?.value)
    };
    let omega_term = PI * quad(&|t| phi.relative(t) * fs_curvature(t))?;
    let atoms: f64 = phi.atoms().iter().map(|&(t, j)| phi.relative(t) * j).sum();
    let phi_term = PI * (quad(&|t| phi.relative(t) * phi.curvature(t))? + atoms);
    let far = hints.iter().copied().fold(0.0, f64::max) + 1e3;
    let dirichlet_term = PI
        * (phi.relative(far)
            - quad(&|t| {
                let s = phi.slope(t);
                (s - crate::line_fn::sigmoid(t)) * s
            })?);
    if (phi_term - dirichlet_term).abs() > DIRICHLET_TOL * phi_term.abs().max(1.0) {
        return Err(Error::CrossCheckMismatch {
            quantity: "energy",
            first: phi_term,
            second: dirichlet_term,
        });
    }
    Ok(EnergyValue {
        value: omega_term + phi_term,
        omega_term,
        phi_term,
        dirichlet_term,
        clip_level,
    })
}

/// `I_k = −(2π/k²) Σ_j (log‖z^j‖²_φ − log‖z^j‖²_ref)`.
pub fn quantum_energy(spectrum: &QuantumSpectrum, reference: &QuantumSpectrum) -> Result<f64> {
    quantum_energy_logs(spectrum.log_norms(), reference.log_norms())
}

pub fn quantum_energy_logs(log_norms: &[f64], reference: &[f64]) -> Result<f64> {
    if log_norms.len() != reference.len() {
        return Err(Error::LevelMismatch(log_norms.len() - 1, reference.len() - 1));
    }
    let k = (log_norms.len() - 1) as f64;
    let d = quadrature::neumaier(log_norms.iter().zip(reference).map(|(a, b)| a - b));
    Ok(-TWO_PI / (k * k) * d)
}

/// `I_k(H^k_{φ+sf})` against the Fubini–Study reference.
pub fn perturbed_quantum_energy(phi: &ToricPotential, f: &LineFunction, s: f64, k: usize) -> Result<f64> {
    let reference = hilbert_norms(&ToricPotential::fubini_study(), k)?;
    let logs = perturbed_log_norms(phi, f, s, k)?;
    quantum_energy_logs(&logs, reference.log_norms())
}

/// Envelope on a grid.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub potential: ToricPotential,
    /// Grid indices where `P(χ) = χ`.
    pub contact: Vec<usize>,
}

/// `P(χ)`: the largest convex minorant of `φ_FS + χ` on the grid with
/// slopes in `[0, 1]`, extended by slope 0 on the left and slope 1 on the
/// right. Computed exactly from the lower hull of the samples.
pub fn envelope<F: Fn(f64) -> f64>(chi: F, grid: &[f64]) -> Result<Envelope> {
    if grid.len() < 2 {
        return Err(Error::invalid("envelope needs at least two grid points"));
    }
    let g: Vec<f64> = grid.iter().map(|&t| fs_potential(t) + chi(t)).collect();
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("envelope input is not finite on the grid"));
    }
    let hull = lower_hull(grid, &g);
    let slope = |a: usize, b: usize| (g[b] - g[a]) / (grid[b] - grid[a]);
    // keep vertices whose subgradient meets [0, 1]
    let m = hull.len();
    let keep: Vec<usize> = (0..m)
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { slope(hull[i - 1], hull[i]) };
            let right = if i + 1 == m { f64::INFINITY } else { slope(hull[i], hull[i + 1]) };
            left <= 1.0 && right >= 0.0
        })
        .map(|i| hull[i])
        .collect();
    let first = keep[0];
    let last = *keep.last().unwrap();
    let mut knots = vec![grid[first] - 1.0];
    let mut values = vec![g[first]];
    for &i in &keep {
        knots.push(grid[i]);
        values.push(g[i]);
    }
    knots.push(grid[last] + 1.0);
    values.push(g[last] + 1.0);
    let potential = ToricPotential::polygonal(knots, values)?;
    let contact = (0..grid.len())
        .filter(|&i| (potential.value(grid[i]) - g[i]).abs() <= 1e-12 * (1.0 + g[i].abs()))
        .collect();
    Ok(Envelope { potential, contact })
}

fn lower_hull(t: &[f64], g: &[f64]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            // drop b when it lies on or above the chord a–i
            let cross = (t[b] - t[a]) * (g[i] - g[a]) - (g[b] - g[a]) * (t[i] - t[a]);
            if cross <= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// Central differences at two steps combined by Richardson extrapolation.
pub fn richardson_derivative<F: Fn(f64) -> Result<f64>>(f: F) -> Result<f64> {
    let (h1, h2) = FD_STEPS;
    let d = |h: f64| -> Result<f64> { Ok((f(h)? - f(-h)?) / (2.0 * h)) };
    let (d1, d2) = (d(h1)?, d(h2)?);
    let r = (h1 / h2).powi(2);
    Ok(d2 + (d2 - d1) / (r - 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeIdentity {
    pub quantum_lhs: f64,
    pub quantum_rhs: f64,
    pub classical_lhs: f64,
    pub classical_rhs: f64,
    pub reports: [BoundReport; 2],
}

/// Relative agreement required in [`derivative_identity_check`].
pub const DERIVATIVE_TOL: f64 = 1e-6;

/// `d/ds I_k(H^k_{φ+sf}) = ∫ f M^k_φ` and `d/ds I(P(φ+sf)) = ∫ f ω_{P(φ)}`
/// at `s = 0`. The classical side works with the grid envelope, so both
/// sides refer to the same discretised potential.
pub fn derivative_identity_check(phi: &ToricPotential, f: &LineFunction, k: usize, grid: &[f64]) -> Result<DerivativeIdentity> {
    let reference = hilbert_norms(&ToricPotential::fubini_study(), k)?;
    let quantum_lhs = richardson_derivative(|s| {
        let logs = perturbed_log_norms(phi, f, s, k)?;
        quantum_energy_logs(&logs, reference.log_norms())
    })?;
    let spec = hilbert_norms(phi, k)?;
    let quantum_rhs = toric_cp1::integrate_m(&spec, |t| f.value(t), &[(f64::NEG_INFINITY, f64::INFINITY)])?;

    let classical = |s: f64| -> Result<f64> {
        let env = envelope(|t| phi.relative(t) + s * f.value(t), grid)?;
        Ok(ma_energy(&env.potential)?.value)
    };
    let classical_lhs = richardson_derivative(classical)?;
    let base = envelope(|t| phi.relative(t), grid)?;
    let classical_rhs = toric_cp1::ma_measure(&base.potential).integrate(f)?;

    let rel = |name: &str, lhs: f64, rhs: f64| {
        BoundReport::equal(format!("{name}[{}]", f.name()), lhs, rhs, DERIVATIVE_TOL * rhs.abs().max(1e-12))
    };
    let reports = [
        rel(&format!("quantum_derivative[k={k}]"), quantum_lhs, quantum_rhs),
        rel("classical_derivative", classical_lhs, classical_rhs),
    ];
    Ok(DerivativeIdentity {
        quantum_lhs,
        quantum_rhs,
        classical_lhs,
        classical_rhs,
        reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub k: usize,
    /// `I_k(H^k_{φ+sf})`
    pub quantum: f64,
    /// `I_k(H^k_{P(φ+sf)})`
    pub quantum_envelope: f64,
    /// `I(P(φ+sf))`
    pub classical: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbedConvergence {
    pub rows: Vec<EnergyRow>,
    /// Largest `P(φ+sf) − (φ+sf)` seen between grid points.
    pub envelope_overshoot: f64,
    /// Whether the envelope lies strictly below `φ + sf` somewhere.
    pub envelope_active: bool,
    pub trend_ok: bool,
    pub sandwich: Vec<BoundReport>,
}

/// `|I_k(H^k_{φ+sf}) − I(P(φ+sf))|` over `k_list`; the trend check asks
/// the last three gaps to be non-increasing. The sandwich
/// `I_k(H^k_{P(φ+sf)}) ≤ I_k(H^k_{φ+sf})` is checked with the tolerance
/// `2π(k+1)/k · overshoot`, since the polygonal envelope may exceed
/// `φ + sf` between grid points by the interpolation error and `I_k` is
/// Lipschitz in sup norm with that constant.
pub fn perturbed_convergence_check(
    phi: &ToricPotential,
    f: &LineFunction,
    s: f64,
    k_list: &[usize],
    grid: &[f64],
) -> Result<PerturbedConvergence> {
    let chi = |t: f64| phi.relative(t) + s * f.value(t);
    let env = envelope(chi, grid)?;
    let classical = ma_energy(&env.potential)?.value;
    let mut overshoot: f64 = 0.0;
    for w in grid.windows(2) {
        for t in linspace(w[0], w[1], 5) {
            overshoot = overshoot.max(env.potential.relative(t) - chi(t));
        }
    }
    let envelope_active = grid
        .iter()
        .any(|&t| chi(t) - env.potential.relative(t) > 1e-6);
    let mut rows = Vec::new();
    let mut sandwich = Vec::new();
    for &k in k_list {
        let reference = hilbert_norms(&ToricPotential::fubini_study(), k)?;
        let quantum = quantum_energy_logs(&perturbed_log_norms(phi, f, s, k)?, reference.log_norms())?;
        let quantum_envelope = quantum_energy(&hilbert_norms(&env.potential, k)?, &reference)?;
        let kf = k as f64;
        let tol = TWO_PI * (kf + 1.0) / kf * overshoot.max(0.0) + 1e-12;
        sandwich.push(BoundReport::with_tolerance(
            format!("energy_sandwich[k={k}]"),
            quantum_envelope,
            quantum,
            Direction::Upper,
            tol,
        ));
        rows.push(EnergyRow {
            k,
            quantum,
            quantum_envelope,
            classical,
            gap: (quantum - classical).abs(),
        });
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    Ok(PerturbedConvergence {
        rows,
        envelope_overshoot: overshoot,
        envelope_active,
        trend_ok: is_non_increasing(tail, 0.0),
        sandwich,
    })
}

/// Second differences of `s ↦ I_k(H^k_{φ+sf})` at the given centres;
/// concavity means every entry is `≤ 0`.
pub fn concavity_second_differences(
    phi: &ToricPotential,
    f: &LineFunction,
    k: usize,
    centres: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let e = |s: f64| perturbed_quantum_energy(phi, f, s, k);
    centres
        .iter()
        .map(|&s| Ok(e(s + h)? - 2.0 * e(s)? + e(s - h)?))
        .collect()
}

/// Concavity as bound reports with the `1e−9` allowance.
pub fn concavity_reports(second_differences: &[f64], label: &str) -> Vec<BoundReport> {
    second_differences
        .iter()
        .enumerate()
        .map(|(i, &d)| BoundReport::with_tolerance(format!("concavity[{label}#{i}]"), d, 0.0, Direction::Upper, 1e-9))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{default_grid, make_test_potential, TestPotentialParams};

    fn test_potential() -> ToricPotential {
        make_test_potential(TestPotentialParams::default()).unwrap().potential
    }

    #[test]
    fn energy_of_constants() {
        let fs = ToricPotential::fubini_study();
        assert!(ma_energy(&fs).unwrap().value.abs() < 1e-13);
        let e = ma_energy(&fs.shifted(0.4)).unwrap();
        assert!((e.value - TWO_PI * 0.4).abs() < 1e-11);
        let tp = test_potential();
        let a = ma_energy(&tp).unwrap().value;
        let b = ma_energy(&tp.shifted(0.1)).unwrap().value;
        assert!((b - a - TWO_PI * 0.1).abs() < 1e-10);
    }

    #[test]
    fn translated_fs_energy_closed_form() {
        // ϕ = φ_FS(t − c) − φ_FS(t): ½∫ϕ(ω + ω_φ) = π∫ϕ(σ′(t) + σ′(t − c)) dt,
        // checked against an independent quadrature in the variable u = σ(t)
        let c = 1.3;
        let phi = ToricPotential::mixture(vec![(1.0, c)]).unwrap();
        let rel = |t: f64| crate::weights::fs_shift_difference(t, c);
        let ig = Integrand1D::new(
            |u: f64| {
                let t = (u / (1.0 - u)).ln();
                // dt = du / (u(1−u)), σ′(t) = u(1−u)
                let s2 = crate::line_fn::sigmoid(t - c);
                let w = s2 * (1.0 - s2) / (u * (1.0 - u));
                PI * rel(t) * (1.0 + w)
            },
            0.0,
            1.0,
        );
        let want = quadrature::integrate(&ig, 1e-13).unwrap().value;
        assert!((ma_energy(&phi).unwrap().value - want).abs() < 1e-10);
    }

    #[test]
    fn quantum_energy_shift_formula() {
        let tp = test_potential();
        let k = 15;
        let c = 0.25;
        let fs = hilbert_norms(&ToricPotential::fubini_study(), k).unwrap();
        let s = hilbert_norms(&ToricPotential::fubini_study().shifted(c), k).unwrap();
        let ik = quantum_energy(&s, &fs).unwrap();
        assert!((ik - TWO_PI * c * 16.0 / 15.0).abs() < 1e-11);
        assert!(quantum_energy(&fs, &fs).unwrap() == 0.0);
        let other = hilbert_norms(&tp, k + 1).unwrap();
        assert!(matches!(quantum_energy(&other, &fs), Err(Error::LevelMismatch(16, 15))));
    }

    // largest admissible minorant at each grid point by enumerating chords
    // and the two slope-constrained rays
    fn brute_force_envelope(t: &[f64], g: &[f64]) -> Vec<f64> {
        let n = t.len();
        (0..n)
            .map(|i| {
                let mut best = f64::INFINITY;
                for l in 0..=i {
                    best = best.min(g[l] + (t[i] - t[l]));
                    for r in i..n {
                        let v = if r == l {
                            g[l]
                        } else {
                            g[l] + (g[r] - g[l]) * (t[i] - t[l]) / (t[r] - t[l])
                        };
                        best = best.min(v);
                    }
                }
                for r in i..n {
                    best = best.min(g[r]);
                }
                best
            })
            .collect()
    }

    #[test]
    fn envelope_matches_brute_force() {
        let grid = linspace(-10.0, 10.0, 201);
        let chi = |t: f64| -0.3 * t.tanh();
        let env = envelope(chi, &grid).unwrap();
        let g: Vec<f64> = grid.iter().map(|&t| fs_potential(t) + chi(t)).collect();
        let bf = brute_force_envelope(&grid, &g);
        let mut bf_contact = Vec::new();
        for (i, &t) in grid.iter().enumerate() {
            let v = env.potential.value(t);
            assert!((v - bf[i]).abs() < 1e-12, "t={t}: {v} vs {}", bf[i]);
            if (bf[i] - g[i]).abs() <= 1e-12 * (1.0 + g[i].abs()) {
                bf_contact.push(i);
            }
        }
        assert_eq!(env.contact, bf_contact);
        assert!(env.contact.len() < grid.len());
    }

    #[test]
    fn envelope_properties() {
        let grid = linspace(-20.0, 20.0, 801);
        let chi1 = |t: f64| -0.3 * t.tanh() + 0.2 * (-t * t).exp();
        let chi2 = |t: f64| chi1(t) + 0.1 * (1.0 + (t / 3.0).sin()).max(0.0);
        let p1 = envelope(chi1, &grid).unwrap().potential;
        let p2 = envelope(chi2, &grid).unwrap().potential;
        let pp = envelope(|t| p1.relative(t), &grid).unwrap().potential;
        for &t in &grid {
            assert!(p1.relative(t) <= chi1(t) + 1e-10);
            assert!(p1.relative(t) <= p2.relative(t) + 1e-10);
            assert!((pp.relative(t) - p1.relative(t)).abs() < 1e-10);
        }
        let c = envelope(|_| 0.7, &grid).unwrap().potential;
        for &t in &grid {
            assert!((c.relative(t) - 0.7).abs() < 1e-10);
        }
        let tp = test_potential();
        let e = envelope(|t| tp.relative(t), &grid).unwrap();
        for &t in &grid {
            assert!((e.potential.relative(t) - tp.relative(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_identity_for_constants() {
        let tp = test_potential();
        let grid = default_grid();
        let r = derivative_identity_check(&tp, &LineFunction::ONE, 10, &grid).unwrap();
        assert!((r.quantum_lhs - TWO_PI * 1.1).abs() < 1e-8);
        assert!((r.classical_lhs - TWO_PI).abs() < 1e-8);
        assert!(r.reports.iter().all(|x| x.pass), "{:?}", r.reports);
    }

    #[test]
    fn unbounded_potential_is_clipped() {
        let p = ToricPotential::log_pole(0.5).unwrap();
        let e = ma_energy(&p).unwrap();
        assert!(e.clip_level.is_some());
        assert!(e.value < 0.0);
    }
}
