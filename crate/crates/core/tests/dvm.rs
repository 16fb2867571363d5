mod common;

use common::*;
use efm_core::collision::eval_collision_direct;
use efm_core::dvm::{build_a, build_g, g_slice, loss_coefficients, loss_coefficients_closed_form, q_dvm};
use efm_core::{FilterKind, MethodVariant, Transform};

#[test]
fn g_is_real() {
    for (dim, modes) in [(2, 7), (3, 5)] {
        let g = grid(dim, modes);
        for filter in [FilterKind::Jackson, FilterKind::Fejer, FilterKind::None] {
            let table = build_g(&g, &filtered(&g, filter)).unwrap();
            assert!(table.max_imag() <= 1e-12, "{filter} d={dim}: {:e}", table.max_imag());
        }
    }
}

#[test]
fn filtered_g_is_nonnegative() {
    let cases = [(2, 5), (2, 7), (2, 9), (3, 5)];
    for (dim, modes) in cases {
        let g = grid(dim, modes);
        for filter in [FilterKind::Jackson, FilterKind::Fejer] {
            let (min, _, _) = build_g(&g, &filtered(&g, filter)).unwrap().min();
            assert!(min >= -1e-12, "{filter} d={dim} N={modes}: {min:e}");
        }
    }
}

#[test]
fn unfiltered_g_takes_negative_values() {
    let g = grid(2, 9);
    let (min, _, _) = build_g(&g, &filtered(&g, FilterKind::None)).unwrap().min();
    assert!(min < 0.0, "{min:e}");

    // along y = (y1, 0) with z = (T/2, T/2) at N = 31
    let g = grid(2, 31);
    let t = g.box_half_width();
    let ys: Vec<[f64; 3]> = (0..=400).map(|i| [-t + 2.0 * t * i as f64 / 400.0, 0.0, 0.0]).collect();
    let plain = g_slice(&g, &filtered(&g, FilterKind::None), [t / 2.0, t / 2.0, 0.0], &ys).unwrap();
    assert!(plain.iter().any(|&v| v < 0.0));
    let smoothed = g_slice(&g, &filtered(&g, FilterKind::Jackson), [t / 2.0, t / 2.0, 0.0], &ys).unwrap();
    let scale = smoothed.iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!(smoothed.iter().all(|&v| v >= -1e-12 * scale));
}

#[test]
fn coefficients_have_the_collision_symmetries() {
    let g = grid(2, 5);
    let coeffs = build_a(&g, &build_g(&g, &filtered(&g, FilterKind::Jackson)).unwrap()).unwrap();
    let scale = coeffs.entries().map(|e| e.4.abs()).fold(0.0, f64::max);
    let n = coeffs.len();
    for p in 0..n {
        for q in 0..n {
            for s in 0..n {
                let r = coeffs.partner(p, q, s);
                let a = coeffs.get(p, q, r, s);
                assert!((a - coeffs.get(q, p, r, s)).abs() <= 1e-12 * scale);
                assert!((a - coeffs.get(p, q, s, r)).abs() <= 1e-12 * scale);
                assert!((a - coeffs.get(r, s, p, q)).abs() <= 1e-12 * scale);
                assert!(a >= -1e-12 * scale);
                if r != 0 {
                    assert_eq!(coeffs.get(p, q, (r + 1) % n, s), 0.0);
                }
            }
        }
    }
}

#[test]
fn loss_coefficients_match_closed_form() {
    for (dim, modes) in [(2, 5), (3, 5)] {
        let g = grid(dim, modes);
        let kernel = filtered(&g, FilterKind::Jackson);
        let coeffs = build_a(&g, &build_g(&g, &kernel).unwrap()).unwrap();
        let summed = loss_coefficients(&coeffs);
        let closed = loss_coefficients_closed_form(&g, &kernel).unwrap();
        let scale = closed.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let err = summed.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-10 * scale, "d={dim}: {err:e}");
    }
}

#[test]
fn quadruple_sum_matches_spectral_collocation() {
    let mut rng = rng(11);
    for (dim, modes) in [(2, 5), (2, 9), (3, 5)] {
        for variant in [MethodVariant::Efm, MethodVariant::EfmFejer, MethodVariant::Fcm] {
            let g = grid(dim, modes);
            let kernel = filtered(&g, variant.filter());
            let coeffs = build_a(&g, &build_g(&g, &kernel).unwrap()).unwrap();
            let transform = Transform::new(&g);
            for _ in 0..3 {
                let values = nonnegative_values(&g, &mut rng);
                let direct = eval_collision_direct(&g, &kernel, variant.indicator(), &modes_of(&g, &values)).unwrap();
                let spectral = transform.inverse_modes(&direct).unwrap();
                let dvm = q_dvm(&values, &coeffs).unwrap();
                let scale = spectral.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let err = dvm.iter().zip(&spectral).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err <= 1e-10 * scale, "{variant} d={dim} N={modes}: {err:e}");
            }
        }
    }
}

#[test]
fn quadruple_sum_conserves_mass_and_dissipates_entropy() {
    let mut rng = rng(12);
    let g = grid(2, 5);
    let coeffs = build_a(&g, &build_g(&g, &filtered(&g, FilterKind::Jackson)).unwrap()).unwrap();
    for _ in 0..100 {
        let values: Vec<f64> = nonnegative_values(&g, &mut rng).iter().map(|v| v + 1e-3).collect();
        let q = q_dvm(&values, &coeffs).unwrap();
        let scale = q.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(q.iter().sum::<f64>().abs() <= 1e-12 * scale * q.len() as f64);
        let production: f64 = q.iter().zip(&values).map(|(q, f)| q * f.ln()).sum();
        assert!(production <= 1e-12, "{production:e}");
    }
}

#[test]
fn oracle_refuses_large_grids() {
    assert!(build_g(&grid(2, 11), &filtered(&grid(2, 11), FilterKind::Jackson)).is_err());
    assert!(build_g(&grid(3, 7), &filtered(&grid(3, 7), FilterKind::Jackson)).is_err());
}
