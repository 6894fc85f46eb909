use covertauth::auth::{calibrate_threshold, decide, Decision};
use covertauth::config::{parse_config, ScenarioConfig};
use covertauth::covert::{covert_rate, optimal_detection_error};
use covertauth::numeric::project_box_simplex;
use covertauth::stats::{grad_log_pa, ncx2_q, ncx2_q_inv, pa_closed_form, quadform_approx};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_lands_in_the_box_simplex(v in prop::collection::vec(-5.0f64..5.0, 2..40)) {
        let lo = 1e-6;
        let hi = 1.0 - lo * (v.len() as f64 - 1.0);
        let w = project_box_simplex(&v, lo, hi).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(w.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
        let again = project_box_simplex(&w, lo, hi).unwrap();
        for (a, b) in w.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn ncx2_tail_is_monotone_and_invertible(
        dof in 1.0f64..20.0,
        nc in 0.0f64..50.0,
        a in 0.0f64..80.0,
        b in 0.0f64..80.0,
        p in 1e-6f64..0.999,
    ) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let q_lo = ncx2_q(dof, nc, lo).unwrap();
        let q_hi = ncx2_q(dof, nc, hi).unwrap();
        prop_assert!(q_lo >= q_hi - 1e-15);
        prop_assert!((0.0..=1.0).contains(&q_lo));
        let x = ncx2_q_inv(dof, nc, p).unwrap();
        prop_assert!((ncx2_q(dof, nc, x).unwrap() - p).abs() < 1e-8 * p.max(1e-3));
    }

    #[test]
    fn alignment_probability_grows_with_snr(l in 2usize..200, x in 0.0f64..40.0, dx in 0.01f64..5.0) {
        let a = pa_closed_form(l, x).unwrap();
        let b = pa_closed_form(l, x + dx).unwrap();
        prop_assert!(a >= 1.0 / l as f64 - 1e-12);
        prop_assert!(b >= a - 1e-12 && b <= 1.0);
        prop_assert!(grad_log_pa(l, x).unwrap() > 0.0);
    }

    #[test]
    fn approximate_tail_inverts(
        pairs in prop::collection::vec((0.05f64..1.0, 0.0f64..20.0), 1..30),
        p in 0.001f64..0.999,
    ) {
        let total: f64 = pairs.iter().map(|x| x.0).sum();
        let w: Vec<f64> = pairs.iter().map(|x| x.0 / total).collect();
        let lam: Vec<f64> = pairs.iter().map(|x| x.1).collect();
        let approx = quadform_approx(&w, &lam).unwrap();
        let tau = approx.inverse_tail(p).unwrap();
        prop_assert!((approx.tail(tau).unwrap() - p).abs() < 1e-7);
        prop_assert!((calibrate_threshold(&w, &lam, p).unwrap() - tau).abs() <= 1e-12 * tau.abs().max(1.0));
    }

    #[test]
    fn ties_go_to_the_legitimate_transmitter(t in -10.0f64..10.0) {
        prop_assert_eq!(decide(t, t), Decision::Legitimate);
        prop_assert_eq!(decide(t + 1e-9, t), Decision::Adversary);
    }

    #[test]
    fn detection_error_decreases_with_divergence(a in 0.0f64..10.0, d in 1e-3f64..10.0) {
        let x = optimal_detection_error(a);
        let y = optimal_detection_error(a + d);
        prop_assert!(y < x && y >= 0.0 && x <= 1.0);
    }

    #[test]
    fn rate_is_nonnegative_and_bounded_by_capacity(
        n in 1.0f64..64.0,
        p in 0.0f64..1.0,
        pa in 0.0f64..1.0,
        c in 0.0f64..100.0,
    ) {
        let r = covert_rate(n, p, 5210.0, pa, c).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert!(r <= (1.0 + c * n * p).log2() + 1e-12);
    }

    #[test]
    fn config_display_round_trips(eps in 0.01f64..0.49, kn in -20.0f64..10.0, trials in 1usize..1_000_000, seed in any::<u64>()) {
        let cfg = ScenarioConfig { epsilon: eps, kappa_n_db: kn, trials, seed, ..ScenarioConfig::default() };
        prop_assert_eq!(parse_config(&cfg.to_string()).unwrap(), cfg);
    }
}
