mod common;

use std::f64::consts::PI;

use common::{c, max_abs, periodized_decay, periodized_lorentzian};
use proptest::prelude::*;
use snxp::grid::FrequencyGrid;
use snxp::phase::{numeric_derivative, unwrap_phase};
use snxp::transform::{forward_transform, forward_transform_at, inverse_transform, inverse_transform_onto};
use snxp::{Complex64, ComplexSpectrum, TimeTrace};

#[test]
fn lorentzian_transforms_to_decaying_exponential() {
    let grid = FrequencyGrid::default_grid();
    let half = grid.spacing() * grid.n_samples() as f64 / 2.0;
    let s = ComplexSpectrum::from_fn(grid, |d| periodized_lorentzian(d, half));
    let x = forward_transform(&s);
    let span = grid.time_span();
    let want: Vec<Complex64> = x.grid().points().iter().map(|&t| periodized_decay(t, span)).collect();
    let err = x
        .values()
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-8 * max_abs(&want), "max error {err}");
}

#[test]
fn shifted_origin_matches_shifted_samples() {
    let grid = FrequencyGrid::new(1 << 12, 0.125, 0.0).unwrap();
    let half = grid.spacing() * grid.n_samples() as f64 / 2.0;
    let s = ComplexSpectrum::from_fn(grid, |d| periodized_lorentzian(d, half));
    // The closed form holds where the time samples are multiples of 2π/(2W).
    let origin = 13.0 * grid.conjugate(0.0).spacing();
    let x = forward_transform_at(&s, origin);
    for (k, v) in x.values().iter().enumerate() {
        let t = x.grid().point(k);
        assert!((v - periodized_decay(t, grid.time_span())).norm() < 1e-9);
    }
}

#[test]
fn off_center_grid_round_trip() {
    let grid = FrequencyGrid::new(256, 0.3, -4.5).unwrap();
    let s = ComplexSpectrum::from_fn(grid, |d| c((-d * d / 50.0).exp(), (d / 7.0).sin()));
    let x = forward_transform_at(&s, 0.8);
    let back = inverse_transform_onto(&x, &grid).unwrap();
    for (a, b) in back.values().iter().zip(s.values()) {
        assert!((a - b).norm() < 1e-13);
    }
}

#[test]
fn mismatched_grid_is_rejected() {
    let grid = FrequencyGrid::new(256, 0.3, 0.0).unwrap();
    let x = forward_transform(&ComplexSpectrum::from_fn(grid, |_| c(1.0, 0.0)));
    let other = FrequencyGrid::new(256, 0.31, 0.0).unwrap();
    assert!(inverse_transform_onto(&x, &other).is_err());
    assert!(TimeTrace::new(*x.grid(), vec![c(0.0, 0.0); 3]).is_err());
}

#[test]
fn linear_phase_is_a_time_shift() {
    // Multiplying by e^{iΔτ} moves the pulse later by τ.
    let grid = FrequencyGrid::new(1 << 12, 0.1, 0.0).unwrap();
    let dt = grid.conjugate(0.0).spacing();
    let shift = 7.0 * dt;
    let pulse = |d: f64| c((-d * d / 8.0).exp(), 0.0);
    let x0 = forward_transform(&ComplexSpectrum::from_fn(grid, pulse));
    let x1 = forward_transform(&ComplexSpectrum::from_fn(grid, |d| pulse(d) * Complex64::from_polar(1.0, d * shift)));
    let n = grid.n_samples();
    for k in 0..n - 7 {
        assert!((x1.values()[k + 7] - x0.values()[k]).norm() < 1e-12);
    }
}

#[test]
fn three_winding_spectrum_unwraps_to_six_pi() {
    let grid = FrequencyGrid::new(4096, 3.0 / 4096.0, 0.5);
    let grid = grid.unwrap();
    let s = ComplexSpectrum::from_fn(grid, |d| Complex64::from_polar(2.0 + d, 2.0 * PI * 3.0 * (d - grid.point(0)) / 3.0));
    let phi = unwrap_phase(&s).unwrap();
    let total = phi[phi.len() - 1] - phi[0];
    assert!((total - 6.0 * PI).abs() < 1e-2, "total winding {total}");
}

#[test]
fn singular_phase_is_reported() {
    let grid = FrequencyGrid::new(16, 1.0, 0.0).unwrap();
    let s = ComplexSpectrum::from_fn(grid, |d| c(d, 0.0));
    assert!(unwrap_phase(&s).is_err());
}

#[test]
fn derivative_of_sine() {
    let grid = FrequencyGrid::new(512, 0.01, 0.0).unwrap();
    let f: Vec<f64> = grid.points().iter().map(|&x| x.sin()).collect();
    let d = numeric_derivative(&f, &grid).unwrap();
    for (j, v) in d.iter().enumerate().skip(2).take(508) {
        assert!((v - grid.point(j).cos()).abs() < 1e-9);
    }
    assert!((d[0] - grid.point(0).cos()).abs() < 1e-4);
    assert!(numeric_derivative(&f[..10], &grid).is_err());
}

proptest! {
    #[test]
    fn parseval(re in prop::collection::vec(-1.0f64..1.0, 64), im in prop::collection::vec(-1.0f64..1.0, 64), center in -5.0f64..5.0) {
        let grid = FrequencyGrid::new(64, 0.4, center).unwrap();
        let values: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
        let s = ComplexSpectrum::new(grid, values).unwrap();
        let x = forward_transform(&s);
        let es: f64 = s.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.spacing();
        let et: f64 = x.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * x.grid().spacing();
        prop_assert!((es - et).abs() < 1e-12 * es.max(1e-300));
    }

    #[test]
    fn round_trip(re in prop::collection::vec(-1.0f64..1.0, 32), im in prop::collection::vec(-1.0f64..1.0, 32)) {
        let grid = FrequencyGrid::new(32, 0.7, 0.0).unwrap();
        let values: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
        let s = ComplexSpectrum::new(grid, values).unwrap();
        let back = inverse_transform(&forward_transform(&s));
        for (a, b) in back.values().iter().zip(s.values()) {
            prop_assert!((a - b).norm() < 1e-13);
        }
    }
}
