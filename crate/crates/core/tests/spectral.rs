use std::f64::consts::E;

use critscat::model::{make_packet, packet_corpus, CutoffFunction, GridSpec, PacketShape, PacketSide};
use critscat::spectral::{
    dilate, fourier_transform, free_reduced_propagate, gauge_multiply, mass_below_cutoff,
    mdfm_apply, MdfmMode, SpectralState,
};
use critscat::{Complex64, Error};
use proptest::prelude::*;

/// Fine enough to resolve `exp(i x^2 / 2)` over the packet tails at `t = e`.
fn fine() -> GridSpec {
    GridSpec::new(128.0, 8192).unwrap()
}

fn gaussian(grid: GridSpec, width: f64) -> SpectralState {
    let norm = (std::f64::consts::PI.sqrt() * width).sqrt().recip();
    let v = grid
        .positions()
        .into_iter()
        .map(|x| Complex64::new(norm * (-0.5 * x * x / (width * width)).exp(), 0.0))
        .collect();
    SpectralState::position(grid, v).unwrap()
}

#[test]
fn mdfm_full_mode_is_the_free_propagator() {
    for phi in packet_corpus(fine()).unwrap() {
        let start = SpectralState::from_packet(&phi);
        for k in [1, 2, 5, 10] {
            let full = mdfm_apply(&phi, E.powi(k), MdfmMode::Full).unwrap();
            let exact = free_reduced_propagate(&start, k as f64).unwrap();
            let err = full.distance(&exact).unwrap() / phi.norm();
            assert!(err <= 1e-9, "t = e^{k}: {err:e}");
        }
    }
}

#[test]
fn mdfm_at_e5_on_coarse_grid() {
    let grid = GridSpec::new(200.0, 4096).unwrap();
    let phi = make_packet(0.5, 4.0, grid, PacketShape::default()).unwrap();
    let full = mdfm_apply(&phi, E.powi(5), MdfmMode::Full).unwrap();
    let exact = free_reduced_propagate(&SpectralState::from_packet(&phi), 5.0).unwrap();
    assert!(full.distance(&exact).unwrap() <= 1e-9);
}

#[test]
fn truncation_is_bounded_by_second_moment() {
    for phi in packet_corpus(fine()).unwrap() {
        let x2 = phi.moment_norm(2);
        for k in [1, 2, 5, 10] {
            let tau = k as f64;
            let full = mdfm_apply(&phi, E.powi(k), MdfmMode::Full).unwrap();
            let trunc = mdfm_apply(&phi, E.powi(k), MdfmMode::Truncated).unwrap();
            let d = full.distance(&trunc).unwrap();
            assert!(d <= x2 / (2.0 * tau), "tau {tau}: {d} > {}", x2 / (2.0 * tau));
            assert!((trunc.norm() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn conjugation_turns_position_into_scaled_momentum() {
    for phi in packet_corpus(fine()).unwrap() {
        let p1 = phi.momentum_moment(1);
        let p2 = phi.momentum_moment(2);
        for k in [1, 2, 5, 10] {
            let tau = k as f64;
            let u = mdfm_apply(&phi, E.powi(k), MdfmMode::Truncated).unwrap();
            let m2 = u.moment(2);
            assert!((m2 - tau * tau * p2).abs() <= 1e-6 * tau * tau * p2);
            if phi.shape().side != PacketSide::Both {
                let m1 = u.moment(1);
                assert!((m1 - tau * p1).abs() <= 1e-6 * (tau * p1).abs(), "{m1} vs {}", tau * p1);
            }
        }
    }
}

#[test]
fn propagation_estimate_holds_on_corpus() {
    for phi in packet_corpus(fine()).unwrap() {
        for k in [2, 5, 10] {
            let t = E.powi(k);
            let u = mdfm_apply(&phi, t, MdfmMode::Truncated).unwrap();
            let m = mass_below_cutoff(&u, t, phi.eps()).unwrap();
            assert!(m <= 1e-8, "t = e^{k}: {m:e}");
        }
    }
}

/// `|| (1 - chi_{4 eps}(xi)) phi^ ||` by quadrature over the momentum samples;
/// `|U(t) phi|^2 (x) = |phi^(x / log t)|^2 / log t`.
fn dead_zone_overlap(phi: &critscat::model::WavePacket, radius: f64) -> f64 {
    let chi = CutoffFunction::new(radius).unwrap();
    let g = phi.grid();
    let s: f64 = phi
        .spectrum()
        .iter()
        .enumerate()
        .map(|(k, v)| (1.0 - chi.value(g.momentum(k))).powi(2) * v.norm_sqr())
        .sum();
    (s * g.momentum_spacing()).sqrt()
}

#[test]
fn inflated_cutoff_sees_the_packet() {
    let shape = PacketShape {
        side: PacketSide::Positive,
        sharpness: 1.0,
        offset: 0.0,
    };
    let phi = make_packet(0.5, 3.0, fine(), shape).unwrap();
    let oracle = dead_zone_overlap(&phi, 4.0 * phi.eps());
    for k in [2, 5, 10] {
        let t = E.powi(k);
        let u = mdfm_apply(&phi, t, MdfmMode::Truncated).unwrap();
        let m = mass_below_cutoff(&u, t, 4.0 * phi.eps()).unwrap();
        assert!(m > 0.1, "{m}");
        assert!((m - oracle).abs() < 1e-3 * oracle, "{m} vs {oracle}");
    }
}

#[test]
fn cutoff_at_origin_keeps_everything() {
    let u = gaussian(fine(), 0.5);
    let t = E.powi(5);
    let m = mass_below_cutoff(&u, t, 1.0).unwrap();
    assert!((m - u.norm()).abs() < 1e-12);
    assert!(mass_below_cutoff(&u, 2.0, 1.0).is_err());
}

#[test]
fn gauge_leaves_a_point_mass_at_origin() {
    let g = fine();
    let mut v = vec![Complex64::new(0.0, 0.0); g.points()];
    v[g.points() / 2] = Complex64::new(1.0, 0.0);
    let u = SpectralState::position(g, v).unwrap();
    for t in [0.01, 1.0, 1e4] {
        let w = gauge_multiply(&u, t, 1).unwrap();
        assert!(u.distance(&w).unwrap() < 1e-12);
    }
    // Direct pointwise phase on a spread state.
    let s = gaussian(g, 3.0);
    let w = gauge_multiply(&s, 2.5, -1).unwrap();
    for (j, (a, b)) in s.values().iter().zip(w.values()).enumerate() {
        let x = g.position(j);
        let expect = a * Complex64::from_polar(1.0, -x * x / 5.0);
        assert!((expect - b).norm() < 1e-12);
    }
}

#[test]
fn dilation_scales_width() {
    let g = fine();
    let u = gaussian(g, 2.0);
    let base = u.moment(2);
    for t in [0.5, 2.0, 3.0] {
        let d = dilate(&u, t).unwrap();
        let ratio = d.moment(2) / base;
        assert!((ratio - t * t).abs() <= 1e-6 * t * t, "t {t}: {ratio}");
        assert!((d.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn dilation_refuses_to_leave_the_grid() {
    let u = gaussian(fine(), 10.0);
    assert!(matches!(dilate(&u, 20.0), Err(Error::ScaleOverflow { .. })));
    assert!(dilate(&u, 0.0).is_err());
}

#[test]
fn free_propagator_basics() {
    let phi = make_packet(0.5, 4.0, fine(), PacketShape::default()).unwrap();
    let s = SpectralState::from_packet(&phi);
    assert_eq!(free_reduced_propagate(&s, 0.0).unwrap(), s);
    assert!(free_reduced_propagate(&s, -1.0).is_err());
    let m = fourier_transform(&s);
    let back = fourier_transform(&m);
    assert!(back.distance(&s).unwrap() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn free_propagation_is_unitary(tau in 0.0f64..40.0, idx in 0usize..10) {
        let grid = GridSpec::new(200.0, 4096).unwrap();
        let phi = &packet_corpus(grid).unwrap()[idx];
        let u = free_reduced_propagate(&SpectralState::from_packet(phi), tau).unwrap();
        prop_assert!((u.norm() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn dilation_is_unitary(t in 0.5f64..3.0, idx in 0usize..10) {
        let phi = &packet_corpus(fine()).unwrap()[idx];
        let d = dilate(&SpectralState::from_packet(phi), t).unwrap();
        prop_assert!((d.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn gauge_is_unitary(t in -50.0f64..50.0, sign in prop::sample::select(vec![1i8, -1])) {
        prop_assume!(t.abs() > 1e-3);
        let phi = &packet_corpus(fine()).unwrap()[0];
        let u = gauge_multiply(&SpectralState::from_packet(phi), t, sign).unwrap();
        prop_assert!((u.norm() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn truncated_map_is_unitary(tau in 1.0f64..12.0, idx in 0usize..10) {
        let phi = &packet_corpus(fine()).unwrap()[idx];
        let u = mdfm_apply(phi, tau.exp(), MdfmMode::Truncated).unwrap();
        prop_assert!((u.norm() - 1.0).abs() <= 1e-10);
    }
}
