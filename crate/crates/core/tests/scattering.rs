use critscat::evolution::ReducedEvolverConfig;
use critscat::model::{make_packet, GridSpec, PacketShape, PotentialSpec, WavePacket};
use critscat::quadrature::integrate;
use critscat::scattering::*;
use critscat::Error;
use proptest::prelude::*;

fn sweep_grid() -> GridSpec {
    GridSpec::new(1024.0, 4096).unwrap()
}

fn packet(grid: GridSpec) -> WavePacket {
    make_packet(0.5, 4.0, grid, PacketShape::default()).unwrap()
}

fn evolver(potential: Option<PotentialSpec>) -> ReducedEvolverConfig {
    SweepConfig::new(sweep_grid()).evolver(potential)
}

/// `|| (exp(-i x^2 / 2 tau1) - exp(-i x^2 / 2 tau2)) phi ||`
fn free_gap(phi: &WavePacket, tau1: f64, tau2: f64) -> f64 {
    let grid = phi.grid();
    let s: f64 = phi
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let x = grid.position(j);
            let a = 0.5 * x * x * (1.0 / tau1 - 1.0 / tau2);
            (2.0 - 2.0 * a.cos()) * v.norm_sqr()
        })
        .sum();
    (s * grid.spacing()).sqrt()
}

#[test]
fn free_cauchy_difference_is_the_truncation_gap() {
    let phi = packet(sweep_grid());
    let cfg = evolver(None);
    for (a, b) in [(5.0, 10.0), (10.0, 20.0), (20.0, 40.0)] {
        let d = cauchy_difference(&phi, a, b, &cfg).unwrap();
        assert!((d - free_gap(&phi, a, b)).abs() < 1e-9, "{a}->{b}: {d}");
        assert!(d <= phi.moment_norm(2) / (2.0 * a));
    }
}

#[test]
fn equal_times_give_zero() {
    let phi = packet(sweep_grid());
    let cfg = evolver(Some(PotentialSpec::new(1.5, 0.5).unwrap()));
    assert_eq!(cauchy_difference(&phi, 10.0, 10.0, &cfg).unwrap(), 0.0);
    assert!(cauchy_difference(&phi, 0.5, 10.0, &cfg).is_err());
    assert!(cauchy_difference(&phi, 10.0, 5.0, &cfg).is_err());
}

#[test]
fn short_range_differences_follow_the_tail() {
    let phi = packet(sweep_grid());
    let cfg = evolver(Some(PotentialSpec::new(0.5, 0.1).unwrap()));
    let first = cauchy_row(&phi, 10.0, &[20.0], &cfg, &NoStore).unwrap()[0];
    let second = cauchy_row(&phi, 20.0, &[40.0], &cfg, &NoStore).unwrap()[0];

    // The interaction part scales like int tau^-1.5 over a doubling.
    let ratio = first.interaction / second.interaction;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.3, "interaction ratio {ratio}");

    // The raw differences are dominated by the truncation gap.
    let raw = first.value / second.value;
    let free = free_gap(&phi, 10.0, 20.0) / free_gap(&phi, 20.0, 40.0);
    assert!((raw / free - 1.0).abs() < 0.05, "raw {raw} free {free}");
}

#[test]
fn long_range_differences_stay_above_the_floor() {
    let phi = packet(sweep_grid());
    let potential = PotentialSpec::new(1.5, 0.5).unwrap();
    let cfg = evolver(Some(potential));
    let row = cauchy_row(&phi, 10.0, &[20.0], &cfg, &NoStore).unwrap();
    let next = cauchy_row(&phi, 20.0, &[40.0], &cfg, &NoStore).unwrap();
    let c = WitnessConstants::new(&potential, phi.outer(), phi.eps(), 1e-3);
    for (e, golden) in [(row[0], 3.122050e-1), (next[0], 2.380228e-1)] {
        let floor = 0.5 * c.gamma * tau_power_integral(1.5, e.tau1, e.tau2);
        assert!(e.value >= floor);
        assert!((e.value / golden - 1.0).abs() < 1e-5, "{} -> {}: {}", e.tau1, e.tau2, e.value);
    }
    // The interaction part grows across doublings.
    assert!(next[0].interaction > row[0].interaction);
}

#[test]
fn cauchy_matrix_obeys_the_triangle_inequality() {
    let phi = packet(sweep_grid());
    let cfg = evolver(Some(PotentialSpec::new(1.0, 0.5).unwrap()));
    let taus = [5.0, 10.0, 20.0, 40.0];
    let m = cauchy_matrix(&phi, &taus, &cfg, &NoStore).unwrap();
    assert_eq!(m.len(), 6);
    let d = |a: f64, b: f64| m.iter().find(|e| e.tau1 == a && e.tau2 == b).unwrap();
    let x2 = phi.moment_norm(2);
    for i in 0..4 {
        for j in i + 1..4 {
            assert!(d(taus[i], taus[j]).value >= 0.0);
            for k in j + 1..4 {
                let lhs = d(taus[i], taus[k]).value;
                let rhs = d(taus[i], taus[j]).value + d(taus[j], taus[k]).value;
                let tails = x2 / (2.0 * taus[i]) + x2 / (2.0 * taus[j]);
                assert!(lhs <= rhs + tails);
                // Without the tail allowance the inequality still holds up
                // to the step control.
                assert!(lhs <= rhs + 10.0 * d(taus[i], taus[k]).splitting_error);
            }
        }
    }
}

#[test]
fn i_theta_closed_forms() {
    assert!((i_theta(0.0, 2.0).unwrap() - 1.442695).abs() < 1e-6);
    assert!((i_theta(0.0, 2.0).unwrap() - 1.0 / 2f64.ln()).abs() < 1e-12);
    assert!((i_theta(0.5, 2.0).unwrap() - 2.402245).abs() < 1e-6);
    assert!((i_theta(0.5, 2.0).unwrap() - 2.0 / 2f64.ln().sqrt()).abs() < 1e-12);
    assert!(matches!(i_theta(1.0, 2.0), Err(Error::DivergentIntegral { .. })));
    assert!(matches!(i_theta(1.5, 2.0), Err(Error::DivergentIntegral { .. })));
    assert!(i_theta(0.0, 1.5).is_err());
}

#[test]
fn j1_lower_matches_analytic_forms() {
    let phi = packet(sweep_grid());
    let (r, mass) = (phi.outer(), phi.norm().powi(2));

    let v = PotentialSpec::new(1.0, 0.5).unwrap();
    let acc = j_terms(&phi, 10.0, 20.0, &v, 1e-3).unwrap();
    let expected = 2f64.powi(-3) / (r * r) * 0.5 * mass * 2f64.ln();
    assert!((acc.j1_lower / expected - 1.0).abs() < 1e-12);
    assert!(acc.j1_numeric >= acc.j1_lower);

    let v = PotentialSpec::new(1.5, 0.5).unwrap();
    let curve = j_curve(&phi, &[5.0, 10.0, 20.0, 40.0], &v, 1e-3).unwrap();
    for a in &curve {
        let expected = 2f64.powf(-3.5) / (r * r) * 0.5 * mass * 2.0 * (a.tau2.sqrt() - 5f64.sqrt());
        assert!((a.j1_lower / expected - 1.0).abs() < 1e-12);
        assert!(a.j1_numeric >= a.j1_lower);
        assert!(a.j2_envelope > 0.0 && a.j3_bound > 0.0);
    }
    assert!(curve.windows(2).all(|w| w[1].j1_lower > w[0].j1_lower));

    let short = PotentialSpec::new(0.5, 0.5).unwrap();
    assert!(matches!(j_terms(&phi, 10.0, 20.0, &short, 1e-3), Err(Error::ShortRangeInput { .. })));
}

#[test]
fn cook_terms_respect_their_envelopes() {
    // Fine enough that x^2 phi survives the dilation at tau = 5.
    let grid = GridSpec::new(256.0, 4096).unwrap();
    let phi = packet(grid);
    let v = PotentialSpec::new(0.5, 0.5).unwrap();
    for tau in [5.0, 10.0, 20.0] {
        let s = cook_integrand(&phi, tau, Some(&v)).unwrap();
        assert!(s.term_d <= s.bound_d, "tau {tau}: {} > {}", s.term_d, s.bound_d);
        assert!(s.term_x2 <= s.bound_x2 * (1.0 + 1e-9), "tau {tau}: {} > {}", s.term_x2, s.bound_x2);
        assert!(s.term_v > 0.0 && s.term_v <= s.envelope_v);
        let free = cook_integrand(&phi, tau, None).unwrap();
        assert_eq!(free.term_v, 0.0);
        assert_eq!(free.term_x2, s.term_x2);
    }
    assert!(cook_integrand(&phi, 1.5, None).is_err());
}

#[test]
fn cook_slope_without_potential_dependence_is_minus_two() {
    let grid = GridSpec::new(256.0, 4096).unwrap();
    let phi = packet(grid);
    let v = PotentialSpec::new(0.0, 0.5).unwrap();
    let samples: Vec<_> = [8.0, 12.0, 18.0, 25.0, 30.0]
        .into_iter()
        .map(|tau| cook_integrand(&phi, tau, Some(&v)).unwrap())
        .collect();
    let slope = cook_slope(&samples, (8.0, 30.0)).unwrap();
    assert!((slope + 2.0).abs() < 0.05, "{slope}");
}

#[test]
fn verdicts_are_reproducible_from_the_report() {
    let phi = packet(sweep_grid());
    let cfg = SweepConfig::new(sweep_grid());
    for kappa in [0.5, 1.5] {
        let r = sweep_point(kappa, 0.5, &phi, &cfg, &NoStore).unwrap();
        assert_eq!(r.verdict, Verdict::predicted(kappa));
        let (verdict, basis) = decide(&r);
        assert_eq!(verdict, r.verdict);
        assert_eq!(basis, r.verdict_basis);
        assert!(r.cauchy.iter().all(|e| e.value >= 0.0));
    }
}

#[test]
fn sweep_results_do_not_depend_on_the_pool() {
    let phi = packet(sweep_grid());
    let cfg = SweepConfig::new(sweep_grid());
    let kappas = [0.9, 1.5];
    let one = threshold_sweep(&kappas, &[0.5], &phi, &cfg, 1, &NoStore).unwrap();
    let four = threshold_sweep(&kappas, &[0.5], &phi, &cfg, 4, &NoStore).unwrap();
    let one: Vec<_> = one.into_iter().map(Result::unwrap).collect();
    let four: Vec<_> = four.into_iter().map(Result::unwrap).collect();
    assert_eq!(one, four);
    assert_eq!(one[0].kappa, 0.9);
    assert_eq!(one[1].j1_growth_class(), "power(0.50)");

    assert!(threshold_sweep(&[], &[0.5], &phi, &cfg, 1, &NoStore).is_err());
    assert!(threshold_sweep(&kappas, &[0.5, 0.5, 0.5], &phi, &cfg, 1, &NoStore).is_err());
}

#[test]
fn slow_schedule_gives_logarithmic_growth() {
    let phi = packet(sweep_grid());
    let cfg = SweepConfig::new(sweep_grid());
    assert_eq!(cfg.schedule_for(1.0), &[7.5, 15.0, 30.0, 60.0]);
    assert_eq!(cfg.schedule_for(0.9), &[5.0, 10.0, 20.0, 40.0]);
    let mut bad = cfg.clone();
    bad.schedule = vec![5.0, 10.0, 30.0];
    assert!(bad.validate().is_err());
    let r = sweep_point(1.0, 0.5, &phi, &cfg, &NoStore).unwrap();
    assert_eq!(r.j1_growth_class(), "logarithmic");
    assert_eq!(r.verdict, Verdict::Divergent);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn i_theta_matches_quadrature(theta in -1.0f64..0.9, a in 2.0f64..50.0, span in 1.5f64..20.0) {
        let b = a * span;
        let exact = i_theta(theta, a).unwrap() - i_theta(theta, b).unwrap();
        let quad = integrate(|s| s.powf(-2.0 + theta), a.ln(), b.ln(), 1e-13).unwrap();
        prop_assert!((exact - quad).abs() <= 1e-10 * exact.abs().max(1.0));
    }

    #[test]
    fn power_integral_is_additive(kappa in 0.0f64..2.0, a in 2.0f64..20.0, r1 in 1.1f64..3.0, r2 in 1.1f64..3.0) {
        let (b, c) = (a * r1, a * r1 * r2);
        let whole = tau_power_integral(kappa, a, c);
        let parts = tau_power_integral(kappa, a, b) + tau_power_integral(kappa, b, c);
        prop_assert!((whole - parts).abs() <= 1e-12 * whole);
        prop_assert!(whole > 0.0);
    }

    #[test]
    fn gamma_decreases_with_delta(kappa in 1.0f64..2.0, d1 in 0.0f64..0.1, d2 in 0.0f64..0.1) {
        let v = PotentialSpec::new(kappa, 0.5).unwrap();
        let g1 = WitnessConstants::new(&v, 4.0, 0.5, d1.min(d2)).gamma;
        let g2 = WitnessConstants::new(&v, 4.0, 0.5, d1.max(d2)).gamma;
        prop_assert!(g1 >= g2);
    }
}
