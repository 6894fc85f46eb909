//! Validation gates run by `covertauth validate`.

use covertauth::config::ScenarioConfig;
use covertauth::covert::eve_means;
use covertauth::harness::experiments::{solve_scenario, uniform_roc, PF_GRID};
use covertauth::harness::trials::count_alignments;
use covertauth::harness::{run_ba_trials, run_eve_detection, BaMode, TrialReport};
use covertauth::stats::pa_closed_form;
use covertauth::Result;
use num_complex::Complex64;

use crate::manifest::Gate;

const PA_TOL: f64 = 0.01;
const XI_SLACK: f64 = 0.02;
const ROC_TOL: f64 = 0.05;

fn oracle_alignment(trials: usize, seed: u64) -> Result<TrialReport> {
    let (l, lambda) = (4, 10.0f64);
    let mut amps = vec![Complex64::new(0.0, 0.0); l];
    amps[0] = Complex64::new((lambda / 2.0).sqrt(), 0.0);
    let hits = count_alignments(&amps, 1.0, 1.0, 0, trials, seed, 100)?;
    Ok(TrialReport::from_counts(
        "pa_oracle_l4_snr10",
        pa_closed_form(l, lambda)?,
        hits,
        trials,
        PA_TOL,
    ))
}

pub fn run_gates(cfg: &ScenarioConfig) -> Result<Vec<Gate>> {
    let trials = cfg.trials;
    let (scen, _, sol) = solve_scenario(cfg, cfg.seed)?;
    let mut reports = vec![
        oracle_alignment(trials, cfg.seed)?,
        run_ba_trials(&scen, BaMode::Quantized, sol.n, sol.p, trials, PA_TOL)?,
        run_ba_trials(&scen, BaMode::Physical, sol.n, sol.p, trials, PA_TOL)?,
    ];

    let means = eve_means(
        &scen.h_e,
        &scen.tx_codebook,
        scen.rx_codebook.len(),
        sol.n as f64,
        sol.p,
    );
    let eve = run_eve_detection(&means, cfg.sigma_e2, cfg.epsilon, trials, cfg.seed);
    reports.push(TrialReport {
        metric: "eve_total_error".into(),
        theoretical: eve.covert_floor,
        empirical: eve.xi_empirical,
        std_error: (2.0 * 0.25 / trials as f64).sqrt(),
        trials,
        tolerance: XI_SLACK,
        passed: eve.xi_empirical >= eve.covert_floor - XI_SLACK,
    });

    let (_, gap) = uniform_roc(cfg, cfg.seed, &PF_GRID)?;
    reports.push(TrialReport {
        metric: "roc_curve_gap".into(),
        theoretical: 0.0,
        empirical: gap,
        std_error: (0.25 / trials as f64).sqrt(),
        trials,
        tolerance: ROC_TOL,
        passed: gap <= ROC_TOL,
    });

    Ok(reports.into_iter().map(Gate::from).collect())
}
