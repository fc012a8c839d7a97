mod common;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use fluid_mimo::evaluation::{evaluate_design, DesignScenario};
use fluid_mimo::model::field_matrices;
use fluid_mimo::{
    build_baseline_layout, ergodic_rate_mc, relative_gain, sample_path_matrix, update_covariance,
    upper_bound_rate, AntennaLayout, BaselineKind, PathAngles, Point, SolverConfig, SystemParams,
    TransmitCovariance,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `E log2(1 + snr X)` for `X ~ Exp(1)` by composite Simpson quadrature.
fn scalar_fading_rate(snr: f64) -> f64 {
    let (upper, n) = (60.0, 600_000);
    let h = upper / n as f64;
    let f = |x: f64| (-x).exp() * (1.0 + snr * x).log2();
    let mut acc = f(0.0) + f(upper);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn path_gains_are_circular_with_requested_variance() {
    let params = SystemParams::new(1.5, 1.0, 1.0, 3, 2, 0.4).unwrap();
    let mut r = rng(21);
    let draws = 50_000;
    let (mut mean, mut power, mut pseudo) =
        (Complex64::new(0.0, 0.0), 0.0, Complex64::new(0.0, 0.0));
    for _ in 0..draws {
        let s = sample_path_matrix(&params, &mut r);
        assert_eq!(s.0.shape(), (2, 3));
        for z in s.0.iter() {
            mean += z;
            power += z.norm_sqr();
            pseudo += z * z;
        }
    }
    let count = (draws * 6) as f64;
    let se = (0.4 / count).sqrt();
    assert!(mean.norm() / count < 5.0 * se);
    assert!((power / count - 0.4).abs() < 5.0 * 0.4 / count.sqrt());
    assert!(pseudo.norm() / count < 5.0 * 0.4 / count.sqrt());
}

#[test]
fn scalar_channel_matches_exponential_fading() {
    for snr_db in [0.0, 10.0] {
        let params = SystemParams::from_snr_db(1.5, 15.0, snr_db, 1, 1, 1.0).unwrap();
        let angles = PathAngles::new(vec![1.0], vec![0.5], vec![2.0], vec![2.5]).unwrap();
        let layout = AntennaLayout {
            tx_positions: vec![Point::new(0.1, 0.2)],
            rx_positions: vec![Point::new(-0.3, 0.0)],
            region_half_width: 1.0,
            min_spacing: 0.0,
        };
        let q = TransmitCovariance::isotropic(1, params.power_budget);
        let est = ergodic_rate_mc(&layout, &angles, &q, &params, 1_000_000, 7).unwrap();
        let want = scalar_fading_rate(params.snr());
        assert!(
            (est.mean_rate - want).abs() < 3.0 * est.std_error,
            "{} +- {} vs {want}",
            est.mean_rate,
            est.std_error
        );
    }
}

#[test]
fn rate_never_exceeds_bound_beyond_noise() {
    let mut r = rng(22);
    for trial in 0..60 {
        let snr_db = [0.0, 10.0, 20.0][trial % 3];
        let params = SystemParams::reference(snr_db);
        let angles = random_angles(&mut r, 3, 3);
        let layout = random_layout(&mut r, 4, 4, 2.25, 0.75);
        let rank = 1 + trial % 4;
        let q = TransmitCovariance::new(
            random_psd(&mut r, 4, rank, params.power_budget),
            params.power_budget,
        )
        .unwrap();
        let bound = upper_bound_rate(&layout, &angles, &q, &params).unwrap();
        let est = ergodic_rate_mc(&layout, &angles, &q, &params, 2000, trial as u64).unwrap();
        assert!(
            est.mean_rate <= bound + 3.0 * est.std_error,
            "{} vs bound {bound}",
            est.mean_rate
        );
    }
}

#[test]
fn zero_covariance_has_zero_rate() {
    let mut r = rng(23);
    let params = SystemParams::reference(10.0);
    let angles = random_angles(&mut r, 3, 3);
    let layout = random_layout(&mut r, 4, 4, 2.25, 0.75);
    let est = ergodic_rate_mc(
        &layout,
        &angles,
        &TransmitCovariance::zeros(4),
        &params,
        500,
        1,
    )
    .unwrap();
    assert_eq!(est.mean_rate, 0.0);
    assert_eq!(est.std_error, 0.0);
}

#[test]
fn estimates_are_seed_deterministic() {
    let mut r = rng(24);
    let params = SystemParams::reference(10.0);
    let angles = random_angles(&mut r, 3, 3);
    let layout = random_layout(&mut r, 4, 4, 2.25, 0.75);
    let q = update_covariance(
        &field_matrices(&layout, &angles, &params).0,
        params.power_budget,
    )
    .unwrap();
    let a = ergodic_rate_mc(&layout, &angles, &q, &params, 1000, 5).unwrap();
    let b = ergodic_rate_mc(&layout, &angles, &q, &params, 1000, 5).unwrap();
    let c = ergodic_rate_mc(&layout, &angles, &q, &params, 1000, 6).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mean_rate, c.mean_rate);
}

#[test]
fn rate_increases_with_power() {
    let mut r = rng(25);
    for _ in 0..10 {
        let angles = random_angles(&mut r, 3, 3);
        let layout = random_layout(&mut r, 4, 4, 2.25, 0.75);
        let seed = r.random();
        let mut last = f64::NEG_INFINITY;
        for snr_db in [0.0, 5.0, 10.0] {
            let params = SystemParams::reference(snr_db);
            let q = update_covariance(
                &field_matrices(&layout, &angles, &params).0,
                params.power_budget,
            )
            .unwrap();
            let rate = ergodic_rate_mc(&layout, &angles, &q, &params, 500, seed)
                .unwrap()
                .mean_rate;
            assert!(rate > last);
            last = rate;
        }
    }
}

#[test]
fn gain_definition() {
    assert!((relative_gain(1.3804, 1.0).unwrap() - 38.04).abs() < 1e-9);
    assert_eq!(relative_gain(2.0, 2.0).unwrap(), 0.0);
    assert!(relative_gain(1.0, 0.0).is_err());
    assert!(relative_gain(1.0, -1.0).is_err());
}

#[test]
fn baselines_are_half_wavelength_arrays() {
    let params = SystemParams::reference(10.0);
    for kind in [BaselineKind::Fpa, BaselineKind::Rfa] {
        let layout = build_baseline_layout(kind, 4, 4, &params, 2.25, 0.75).unwrap();
        for pts in [&layout.tx_positions, &layout.rx_positions] {
            for w in pts.windows(2) {
                assert!((w[0].distance(&w[1]) - 0.75).abs() < 1e-12);
            }
            let cx: f64 = pts.iter().map(|p| p.x).sum();
            assert!(cx.abs() < 1e-12 && pts.iter().all(|p| p.y == 0.0));
        }
    }
    assert!(build_baseline_layout(BaselineKind::Fpa, 4, 4, &params, 0.5, 0.75).is_err());
}

#[test]
fn baseline_designs_freeze_their_fixed_sides() {
    let params = SystemParams::reference(15.0);
    let config = SolverConfig::for_wavelength(params.wavelength);
    let mut r = rng(26);
    for _ in 0..5 {
        let angles = random_angles(&mut r, 3, 3);
        let scenario = DesignScenario {
            num_tx: 4,
            num_rx: 4,
            angles: &angles,
            params: &params,
            region_half_width: 2.25,
            min_spacing: 0.75,
        };
        let ula = build_baseline_layout(BaselineKind::Fpa, 4, 4, &params, 2.25, 0.75).unwrap();
        let fpa = evaluate_design(BaselineKind::Fpa, &scenario, &config, 200, 1).unwrap();
        assert_eq!(fpa.trace.final_layout, ula);
        assert_eq!(fpa.trace.outer_iters_used, 1);
        let rfa = evaluate_design(BaselineKind::Rfa, &scenario, &config, 200, 1).unwrap();
        assert_eq!(rfa.trace.final_layout.tx_positions, ula.tx_positions);
        let fa = evaluate_design(BaselineKind::Fa, &scenario, &config, 200, 1).unwrap();
        // Each design contains the next as a feasible point, and all start from the same arrays.
        assert!(fa.upper_bound >= fpa.upper_bound - 1e-9);
        assert!(rfa.upper_bound >= fpa.upper_bound - 1e-9);
        for d in [&fa, &rfa, &fpa] {
            assert!(d.estimate.mean_rate <= d.upper_bound + 3.0 * d.estimate.std_error);
        }
    }
}
