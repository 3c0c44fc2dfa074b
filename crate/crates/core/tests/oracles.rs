//! Public API against closed forms computed here, independently of the
//! library's own routines.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use bergquant::energy::envelope;
use bergquant::estimates::ot_constant;
use bergquant::measure_quant::RadonMeasure1D;
use bergquant::quadrature::{integrate, Integrand1D};
use bergquant::toric_cp1::{hilbert_norms, m_mass, TWO_PI};
use bergquant::weights::{fs_potential, linspace, ToricPotential};

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

#[test]
fn fubini_study_norms_are_beta_integrals() {
    // ‖z^j‖² = 2π ∫ e^{(j+1)t} (1 + e^t)^{−k−2} dt = 2π j!(k−j)!/(k+1)!
    for k in [1, 7, 40] {
        let spec = hilbert_norms(&ToricPotential::fubini_study(), k).unwrap();
        for (j, &l) in spec.log_norms().iter().enumerate() {
            let exact = TWO_PI.ln() + ln_factorial(j) + ln_factorial(k - j) - ln_factorial(k + 1);
            assert!((l - exact).abs() < 1e-10, "k={k} j={j}: {l} vs {exact}");
        }
    }
}

#[test]
fn fubini_study_bergman_mass() {
    // density (k+1)/k against ω_FS, which has mass 2π
    for k in [3, 25] {
        let spec = hilbert_norms(&ToricPotential::fubini_study(), k).unwrap();
        let kf = k as f64;
        assert_relative_eq!(m_mass(&spec).unwrap(), TWO_PI * (kf + 1.0) / kf, max_relative = 1e-9);
    }
}

#[test]
fn quadrature_on_elementary_integrals() {
    let atan = integrate(&Integrand1D::new(|x: f64| 1.0 / (1.0 + x * x), -1.0, 1.0), 1e-12).unwrap();
    assert_relative_eq!(atan.value, PI / 2.0, max_relative = 1e-12);
    // endpoint singularity in the derivative
    let root = integrate(&Integrand1D::new(|x: f64| x.sqrt(), 0.0, 1.0), 1e-12).unwrap();
    assert_relative_eq!(root.value, 2.0 / 3.0, max_relative = 1e-11);
}

#[test]
fn translated_fs_cdf() {
    let nu = RadonMeasure1D::translated_fs(1.5);
    for t in [-10.0, -1.0, 0.0, 1.5, 4.0] {
        let exact = TWO_PI / (1.0 + (-(t - 1.5f64)).exp());
        assert_relative_eq!(nu.cdf(t), exact, max_relative = 1e-14);
    }
    assert_relative_eq!(nu.total_mass(), TWO_PI, max_relative = 1e-14);
}

proptest! {
    #[test]
    fn ot_constant_low_orders(a in 0.01f64..30.0) {
        // m = 0: π(1 − e^{−a})/a;  m = 1: π(1 − (1 + a)e^{−a})/a²
        let c0 = PI * (-(-a).exp_m1()) / a;
        let c1 = PI * (1.0 - (1.0 + a) * (-a).exp()) / (a * a);
        prop_assert!((ot_constant(a, 0) / c0 - 1.0).abs() < 1e-12);
        prop_assert!((ot_constant(a, 1) / c1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn envelope_is_a_convex_minorant(amp in 0.0f64..2.0, freq in 0.2f64..3.0, phase in 0.0f64..6.3) {
        let grid = linspace(-15.0, 15.0, 301);
        let chi = |t: f64| amp * (freq * t + phase).sin();
        let env = envelope(chi, &grid).unwrap();
        let p: Vec<f64> = grid.iter().map(|&t| env.potential.value(t)).collect();
        for (i, &t) in grid.iter().enumerate() {
            let g = fs_potential(t) + chi(t);
            prop_assert!(p[i] <= g + 1e-12 * (1.0 + g.abs()));
        }
        let slopes: Vec<f64> = p.windows(2).zip(grid.windows(2)).map(|(v, t)| (v[1] - v[0]) / (t[1] - t[0])).collect();
        for s in &slopes {
            prop_assert!(*s >= -1e-12 && *s <= 1.0 + 1e-12);
        }
        for w in slopes.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10);
        }
        // applying P again changes nothing
        let again = envelope(|t| env.potential.value(t) - fs_potential(t), &grid).unwrap();
        for &t in &grid {
            prop_assert!((again.potential.value(t) - env.potential.value(t)).abs() < 1e-10);
        }
    }
}
