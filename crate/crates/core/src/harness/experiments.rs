//! Named experiments, each producing one CSV table.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use super::rng::purpose;
use super::scenario::Scenario;
use super::trials::{roc_curve, roc_curve_gap, simulate_pair_energies, simulate_statistics, RocPoint};
use crate::array::{beam_pattern, GainMode};
use crate::auth::{
    calibrate_threshold, detection_probability, noncentrality_profile, optimize_weights, profile_from_amplitudes,
    WeightOptions,
};
use crate::config::ScenarioConfig;
use crate::covert::{optimize, CovertProblem, CovertSolution};
use crate::error::{Error, Result};
use crate::stats::Ncx2;

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Column values parsed as numbers.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].parse().unwrap_or(f64::NAN)).collect())
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// All experiments known to the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    CovertSweepEps,
    CovertSweepSnr,
    Convergence,
    ValidatePdf,
    ValidateRoc,
    WeightCompare,
    WorstCase,
    SidelobeRate,
    SidelobeRoc,
    AntennaSweep,
    BeamPattern,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::CovertSweepEps,
        Experiment::CovertSweepSnr,
        Experiment::Convergence,
        Experiment::ValidatePdf,
        Experiment::ValidateRoc,
        Experiment::WeightCompare,
        Experiment::WorstCase,
        Experiment::SidelobeRate,
        Experiment::SidelobeRoc,
        Experiment::AntennaSweep,
        Experiment::BeamPattern,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::CovertSweepEps => "covert-sweep-eps",
            Experiment::CovertSweepSnr => "covert-sweep-snr",
            Experiment::Convergence => "convergence",
            Experiment::ValidatePdf => "validate-pdf",
            Experiment::ValidateRoc => "validate-roc",
            Experiment::WeightCompare => "weight-compare",
            Experiment::WorstCase => "worst-case",
            Experiment::SidelobeRate => "sidelobe-rate",
            Experiment::SidelobeRoc => "sidelobe-roc",
            Experiment::AntennaSweep => "antenna-sweep",
            Experiment::BeamPattern => "beam-pattern",
        }
    }

    /// CSV file name for a seed.
    pub fn file_name(&self, seed: u64) -> String {
        format!("{}_{seed}.csv", self.name())
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Table plus headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub experiment: Experiment,
    pub table: CsvTable,
    pub summary: Vec<(String, f64)>,
}

/// Builds the scenario and solves the covert design for it.
pub fn solve_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<(Scenario, CovertProblem, CovertSolution)> {
    let scen = Scenario::new(cfg, seed)?;
    let prob = scen.covert_problem()?;
    let sol = optimize(&prob, &scen.optimizer_options())?;
    Ok((scen, prob, sol))
}

/// Physical noncentrality profiles `(h0, h1)` at the designed operating
/// point; the adversary scales `N` and `P` by the configured factors.
pub fn auth_profiles(scen: &Scenario, sol: &CovertSolution) -> Result<(Vec<f64>, Vec<f64>, AuthPoint)> {
    let c = &scen.config;
    let point = AuthPoint {
        n0: sol.n as f64,
        p0: sol.p,
        n1: (sol.n as f64 * c.adversary_n_scale).round().max(1.0),
        p1: sol.p * c.adversary_p_scale,
    };
    let h0 = noncentrality_profile(
        &scen.legit_channel(),
        &scen.tx_codebook,
        &scen.rx_codebook,
        point.n0,
        point.p0,
        scen.sigma_n2,
    )?;
    let h1 = noncentrality_profile(
        &scen.adversary_channel(),
        &scen.tx_codebook,
        &scen.rx_codebook,
        point.n1,
        point.p1,
        scen.sigma_n2,
    )?;
    Ok((h0, h1, point))
}

/// Training lengths and powers of both transmitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthPoint {
    pub n0: f64,
    pub p0: f64,
    pub n1: f64,
    pub p1: f64,
}

/// Physical-channel amplitudes `(legit, adversary)` at an operating point.
pub fn auth_amplitudes(scen: &Scenario, pt: &AuthPoint) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let a0 = crate::auth::pair_amplitudes(
        &scen.legit_channel(),
        &scen.tx_codebook,
        &scen.rx_codebook,
        pt.n0,
        pt.p0,
    )?;
    let a1 = crate::auth::pair_amplitudes(
        &scen.adversary_channel(),
        &scen.tx_codebook,
        &scen.rx_codebook,
        pt.n1,
        pt.p1,
    )?;
    Ok((a0, a1))
}

/// Simulated statistics under both hypotheses.
pub fn simulate_both(
    scen: &Scenario,
    weights: &[f64],
    amps: (&[Complex64], &[Complex64]),
    pt: &AuthPoint,
    trials: usize,
    tag: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let s0 = simulate_statistics(
        amps.0,
        weights,
        pt.n0,
        scen.sigma_n2,
        trials,
        scen.seed,
        purpose::AUTH_H0,
        tag,
    )?;
    let s1 = simulate_statistics(
        amps.1,
        weights,
        pt.n1,
        scen.sigma_n2,
        trials,
        scen.seed,
        purpose::AUTH_H1,
        tag,
    )?;
    Ok((s0, s1))
}

/// ROC of the uniform-weight detector at the designed operating point of
/// `cfg`, evaluated at thresholds calibrated for `pf_grid`, together with
/// its curve gap.
pub fn uniform_roc(cfg: &ScenarioConfig, seed: u64, pf_grid: &[f64]) -> Result<(Vec<RocPoint>, f64)> {
    let (scen, _, sol) = solve_scenario(cfg, seed)?;
    let (h0, h1, pt) = auth_profiles(&scen, &sol)?;
    let (a0, a1) = auth_amplitudes(&scen, &pt)?;
    let w = vec![1.0 / h0.len() as f64; h0.len()];
    let taus = pf_grid
        .iter()
        .map(|&pf| calibrate_threshold(&w, &h0, pf))
        .collect::<Result<Vec<_>>>()?;
    let (s0, s1) = simulate_both(&scen, &w, (&a0, &a1), &pt, cfg.trials, 0)?;
    let roc = roc_curve(&w, &h0, &h1, &s0, &s1, &taus)?;
    let gap = roc_curve_gap(&w, &h0, &h1, &roc)?;
    Ok((roc, gap))
}

/// False-alarm targets used by the detector experiments.
pub const PF_GRID: [f64; 11] = [0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9];

fn sweep(from: f64, to: f64, step: f64) -> Vec<f64> {
    let count = ((to - from) / step).round() as usize;
    (0..=count)
        .map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

fn mode_name(mode: GainMode) -> &'static str {
    match mode {
        GainMode::Ideal => "ideal",
        GainMode::Sidelobe => "sidelobe",
    }
}

fn covert_sweep_eps(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&[
        "kappa_e_db",
        "epsilon",
        "p_star",
        "n_star",
        "rate",
        "pa",
        "gamma",
        "nu",
        "iterations",
        "converged",
    ]);
    for ke in [-5.0, -10.0, -15.0] {
        for eps in sweep(0.1, 0.3, 0.02) {
            let c = ScenarioConfig {
                kappa_e_db: ke,
                epsilon: eps,
                ..cfg.clone()
            };
            let (_, prob, sol) = solve_scenario(&c, seed)?;
            t.push(vec![
                num(ke),
                num(eps),
                num(sol.p),
                sol.n.to_string(),
                num(sol.rate),
                num(sol.pa),
                num(prob.gamma),
                num(sol.nu),
                sol.iterations.to_string(),
                sol.converged.to_string(),
            ]);
        }
    }
    let rates = t.column("rate").unwrap_or_default();
    Ok(ExperimentOutput {
        experiment: Experiment::CovertSweepEps,
        summary: vec![("max_rate".into(), rates.iter().cloned().fold(0.0, f64::max))],
        table: t,
    })
}

fn covert_sweep_snr(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&[
        "kappa_n_db",
        "epsilon",
        "p_star",
        "n_star",
        "rate",
        "pa_theory",
        "pa_empirical",
    ]);
    let mut worst = 0.0f64;
    for eps in [0.1, 0.2, 0.3] {
        for kn in sweep(-10.0, 2.0, 1.0) {
            let c = ScenarioConfig {
                kappa_n_db: kn,
                epsilon: eps,
                ..cfg.clone()
            };
            let (scen, _, sol) = solve_scenario(&c, seed)?;
            let rep =
                super::trials::run_ba_trials(&scen, super::trials::BaMode::Quantized, sol.n, sol.p, c.trials, 0.01)?;
            worst = worst.max((rep.theoretical - rep.empirical).abs());
            t.push(vec![
                num(kn),
                num(eps),
                num(sol.p),
                sol.n.to_string(),
                num(sol.rate),
                num(rep.theoretical),
                num(rep.empirical),
            ]);
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::CovertSweepSnr,
        summary: vec![("max_pa_gap".into(), worst)],
        table: t,
    })
}

fn convergence(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&[
        "epsilon",
        "iteration",
        "p",
        "n",
        "nu",
        "lagrangian_pre_round",
        "lagrangian",
        "rate",
        "rounding_event",
    ]);
    let mut iters = 0.0f64;
    for eps in [0.35, 0.4] {
        let c = ScenarioConfig {
            epsilon: eps,
            ..cfg.clone()
        };
        let (_, _, sol) = solve_scenario(&c, seed)?;
        iters = iters.max(sol.iterations as f64);
        for r in &sol.trace {
            t.push(vec![
                num(eps),
                r.iteration.to_string(),
                num(r.p),
                r.n.to_string(),
                num(r.nu),
                num(r.lagrangian_pre_round),
                num(r.lagrangian),
                num(r.rate),
                r.rounding_event.to_string(),
            ]);
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::Convergence,
        summary: vec![("max_iterations".into(), iters)],
        table: t,
    })
}

/// Zero-based indices of the pairs shown in the density experiment.
pub const PDF_PAIRS: [usize; 3] = [33, 34, 35];

fn validate_pdf(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let (scen, _, sol) = solve_scenario(cfg, seed)?;
    let (_, h1, pt) = auth_profiles(&scen, &sol)?;
    let (_, a1) = auth_amplitudes(&scen, &pt)?;
    let pairs: Vec<usize> = PDF_PAIRS.iter().copied().filter(|&l| l < h1.len()).collect();
    let samples = simulate_pair_energies(&a1, &pairs, pt.n1, scen.sigma_n2, cfg.trials, seed);
    let mut t = CsvTable::new(&["pair", "y", "pdf_theory", "pdf_empirical"]);
    let bins = 60;
    let mut worst = 0.0f64;
    for (k, &l) in pairs.iter().enumerate() {
        let law = Ncx2::new(2.0, h1[l])?;
        let top = law.inverse_sf(1e-3)?;
        let width = top / bins as f64;
        let mut counts = vec![0usize; bins];
        for row in &samples {
            let b = (row[k] / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                counts[b as usize] += 1;
            }
        }
        for (b, &count) in counts.iter().enumerate() {
            let lo = b as f64 * width;
            let centre = lo + 0.5 * width;
            let theory = (law.sf(lo)? - law.sf(lo + width)?) / width;
            let empirical = count as f64 / (samples.len() as f64 * width);
            worst = worst.max((theory - empirical).abs());
            t.push(vec![(l + 1).to_string(), num(centre), num(theory), num(empirical)]);
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::ValidatePdf,
        summary: vec![("max_density_gap".into(), worst)],
        table: t,
    })
}

fn validate_roc(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&[
        "kappa_n_db",
        "tau",
        "pf_theory",
        "pf_empirical",
        "pd_theory",
        "pd_empirical",
    ]);
    let mut summary = Vec::new();
    for kn in [-6.0, -2.0, 2.0] {
        let c = ScenarioConfig {
            kappa_n_db: kn,
            ..cfg.clone()
        };
        let (roc, gap) = uniform_roc(&c, seed, &PF_GRID)?;
        summary.push((format!("roc_gap_at_{kn}_db"), gap));
        for p in roc {
            t.push(vec![
                num(kn),
                num(p.tau),
                num(p.pf_theory),
                num(p.pf_empirical),
                num(p.pd_theory),
                num(p.pd_empirical),
            ]);
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::ValidateRoc,
        summary,
        table: t,
    })
}

fn weight_compare(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&[
        "kappa_n_db",
        "scheme",
        "pf_target",
        "pd_theory",
        "pf_empirical",
        "pd_empirical",
    ]);
    let mut best_gain = f64::NEG_INFINITY;
    for kn in [-6.0, -4.0] {
        let c = ScenarioConfig {
            kappa_n_db: kn,
            ..cfg.clone()
        };
        let (scen, _, sol) = solve_scenario(&c, seed)?;
        let (h0, h1, pt) = auth_profiles(&scen, &sol)?;
        let (a0, a1) = auth_amplitudes(&scen, &pt)?;
        let uniform = vec![1.0 / h0.len() as f64; h0.len()];
        let (u0, u1) = simulate_both(&scen, &uniform, (&a0, &a1), &pt, c.trials, 0)?;
        for (k, pf) in sweep(0.05, 0.5, 0.05).into_iter().enumerate() {
            let tau_u = calibrate_threshold(&uniform, &h0, pf)?;
            let roc_u = roc_curve(&uniform, &h0, &h1, &u0, &u1, &[tau_u])?[0];
            let opt = optimize_weights(&h0, &h1, pf, &WeightOptions::default())?;
            let (o0, o1) = simulate_both(&scen, &opt.weights, (&a0, &a1), &pt, c.trials, 1 + k as u64)?;
            let roc_o = roc_curve(&opt.weights, &h0, &h1, &o0, &o1, &[opt.threshold])?[0];
            best_gain = best_gain.max(roc_o.pd_theory - roc_u.pd_theory);
            for (name, p) in [("uniform", roc_u), ("optimized", roc_o)] {
                t.push(vec![
                    num(kn),
                    name.into(),
                    num(pf),
                    num(p.pd_theory),
                    num(p.pf_empirical),
                    num(p.pd_empirical),
                ]);
            }
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::WeightCompare,
        summary: vec![("max_pd_gain".into(), best_gain)],
        table: t,
    })
}

/// Miss-rate targets for the worst-case and side-lobe detector tables.
pub const PF_SHORT: [f64; 5] = [0.001, 0.01, 0.05, 0.1, 0.2];

fn worst_case(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&[
        "epsilon",
        "p_star",
        "n_star",
        "rate",
        "pf_target",
        "pm_theory",
        "pm_empirical",
    ]);
    let base = ScenarioConfig {
        theta1_deg: cfg.theta0_deg,
        phi1_deg: cfg.phi0_deg,
        alpha1_var: cfg.alpha0_var,
        ..cfg.clone()
    };
    let mut summary = Vec::new();
    for eps in [0.1, 0.2, 0.3] {
        let c = ScenarioConfig {
            epsilon: eps,
            ..base.clone()
        };
        let (scen, _, sol) = solve_scenario(&c, seed)?;
        let (h0, h1, pt) = auth_profiles(&scen, &sol)?;
        let (a0, a1) = auth_amplitudes(&scen, &pt)?;
        for (k, &pf) in PF_SHORT.iter().enumerate() {
            let opt = optimize_weights(&h0, &h1, pf, &WeightOptions::default())?;
            let (s0, s1) = simulate_both(&scen, &opt.weights, (&a0, &a1), &pt, c.trials, k as u64)?;
            let p = roc_curve(&opt.weights, &h0, &h1, &s0, &s1, &[opt.threshold])?[0];
            if pf == 0.1 {
                summary.push((format!("pm_at_eps_{eps}"), 1.0 - p.pd_theory));
            }
            t.push(vec![
                num(eps),
                num(sol.p),
                sol.n.to_string(),
                num(sol.rate),
                num(pf),
                num(1.0 - p.pd_theory),
                num(1.0 - p.pd_empirical),
            ]);
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::WorstCase,
        summary,
        table: t,
    })
}

fn sidelobe_rate(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&["kappa_n_db", "epsilon", "mode", "p_star", "n_star", "rate", "pa"]);
    let mut worst_ratio = 0.0f64;
    for eps in [0.1, 0.3] {
        for kn in sweep(-10.0, 2.0, 2.0) {
            let mut rates = [0.0; 2];
            for (m, mode) in [GainMode::Ideal, GainMode::Sidelobe].into_iter().enumerate() {
                let c = ScenarioConfig {
                    kappa_n_db: kn,
                    epsilon: eps,
                    gain_mode: mode,
                    ..cfg.clone()
                };
                let (_, _, sol) = solve_scenario(&c, seed)?;
                rates[m] = sol.rate;
                t.push(vec![
                    num(kn),
                    num(eps),
                    mode_name(mode).into(),
                    num(sol.p),
                    sol.n.to_string(),
                    num(sol.rate),
                    num(sol.pa),
                ]);
            }
            worst_ratio = worst_ratio.max(rates[1] / rates[0]);
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::SidelobeRate,
        summary: vec![("max_sidelobe_to_ideal_rate".into(), worst_ratio)],
        table: t,
    })
}

/// Quantized-model profiles `(h0, h1)` at the designed operating point.
pub fn quantized_profiles(
    scen: &Scenario,
    sol: &CovertSolution,
) -> (Vec<f64>, Vec<f64>, Vec<Complex64>, Vec<Complex64>, AuthPoint) {
    let c = &scen.config;
    let pt = AuthPoint {
        n0: sol.n as f64,
        p0: sol.p,
        n1: (sol.n as f64 * c.adversary_n_scale).round().max(1.0),
        p1: sol.p * c.adversary_p_scale,
    };
    let a0 = scen.quantized_amplitudes(pt.n0, pt.p0, scen.alpha0.norm_sqr(), scen.legit_pair());
    let a1 = scen.quantized_amplitudes(pt.n1, pt.p1, scen.alpha1.norm_sqr(), scen.adversary_pair());
    let h0 = profile_from_amplitudes(&a0, pt.n0, scen.sigma_n2);
    let h1 = profile_from_amplitudes(&a1, pt.n1, scen.sigma_n2);
    (h0, h1, a0, a1, pt)
}

fn sidelobe_roc(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&["epsilon", "mode", "pf_target", "pm_theory", "pm_empirical"]);
    let mut summary = Vec::new();
    for eps in [0.1, 0.3] {
        for mode in [GainMode::Ideal, GainMode::Sidelobe] {
            let c = ScenarioConfig {
                epsilon: eps,
                gain_mode: mode,
                ..cfg.clone()
            };
            let (scen, _, sol) = solve_scenario(&c, seed)?;
            let (h0, h1, a0, a1, pt) = quantized_profiles(&scen, &sol);
            for (k, &pf) in PF_SHORT.iter().enumerate() {
                let opt = optimize_weights(&h0, &h1, pf, &WeightOptions::default())?;
                let (s0, s1) = simulate_both(&scen, &opt.weights, (&a0, &a1), &pt, c.trials, k as u64)?;
                let p = roc_curve(&opt.weights, &h0, &h1, &s0, &s1, &[opt.threshold])?[0];
                if pf == 0.1 {
                    summary.push((format!("pm_{}_eps_{eps}", mode_name(mode)), 1.0 - p.pd_theory));
                }
                t.push(vec![
                    num(eps),
                    mode_name(mode).into(),
                    num(pf),
                    num(1.0 - p.pd_theory),
                    num(1.0 - p.pd_empirical),
                ]);
            }
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::SidelobeRoc,
        summary,
        table: t,
    })
}

/// Array sizes of the antenna sweep.
pub const ARRAY_SIZES: [(usize, usize); 3] = [(16, 8), (32, 16), (64, 32)];

fn antenna_sweep(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut t = CsvTable::new(&["n_t", "n_r", "kappa_n_db", "mode", "rate", "pm_theory"]);
    let mut summary = Vec::new();
    let opts = WeightOptions {
        max_iter: 100,
        ..WeightOptions::default()
    };
    for (n_t, n_r) in ARRAY_SIZES {
        for kn in [-6.0, -2.0] {
            let mut rates = [0.0; 2];
            for (m, mode) in [GainMode::Ideal, GainMode::Sidelobe].into_iter().enumerate() {
                let c = ScenarioConfig {
                    n_t,
                    n_r,
                    l_t: n_t / 2,
                    l_r: n_r / 2,
                    kappa_n_db: kn,
                    gain_mode: mode,
                    ..cfg.clone()
                };
                let (scen, _, sol) = solve_scenario(&c, seed)?;
                let (h0, h1, ..) = quantized_profiles(&scen, &sol);
                let opt = optimize_weights(&h0, &h1, c.pf_target, &opts)?;
                rates[m] = sol.rate;
                t.push(vec![
                    n_t.to_string(),
                    n_r.to_string(),
                    num(kn),
                    mode_name(mode).into(),
                    num(sol.rate),
                    num(1.0 - opt.pd),
                ]);
            }
            summary.push((format!("rate_gap_{n_t}x{n_r}_at_{kn}_db"), 1.0 - rates[1] / rates[0]));
        }
    }
    Ok(ExperimentOutput {
        experiment: Experiment::AntennaSweep,
        summary,
        table: t,
    })
}

fn beam_pattern_table(cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    let scen = Scenario::new(cfg, seed)?;
    let it = scen.tx_codebook.sector_of(cfg.phi0_deg.to_radians()).unwrap_or(0);
    let w = scen.tx_codebook.codeword(it);
    let ca = scen.alice.coupling_matrix();
    let ce = scen.eve.coupling_matrix();
    let db = |z: Complex64| 10.0 * z.norm_sqr().max(1e-30).log10();
    let mut t = CsvTable::new(&["angle_deg", "ideal_db", "alice_db", "eve_db"]);
    let mut peak = f64::NEG_INFINITY;
    for angle in sweep(-90.0, 90.0, 0.5) {
        let rad = angle.to_radians();
        let ideal = db(beam_pattern(w, None, rad)?);
        let alice = db(beam_pattern(w, Some(&ca), rad)?);
        let eve = db(beam_pattern(w, Some(&ce), rad)?);
        peak = peak.max(ideal);
        t.push(vec![num(angle), num(ideal), num(alice), num(eve)]);
    }
    Ok(ExperimentOutput {
        experiment: Experiment::BeamPattern,
        summary: vec![("peak_ideal_db".into(), peak)],
        table: t,
    })
}

/// Runs an experiment with the given configuration and master seed.
pub fn run_experiment(exp: Experiment, cfg: &ScenarioConfig, seed: u64) -> Result<ExperimentOutput> {
    match exp {
        Experiment::CovertSweepEps => covert_sweep_eps(cfg, seed),
        Experiment::CovertSweepSnr => covert_sweep_snr(cfg, seed),
        Experiment::Convergence => convergence(cfg, seed),
        Experiment::ValidatePdf => validate_pdf(cfg, seed),
        Experiment::ValidateRoc => validate_roc(cfg, seed),
        Experiment::WeightCompare => weight_compare(cfg, seed),
        Experiment::WorstCase => worst_case(cfg, seed),
        Experiment::SidelobeRate => sidelobe_rate(cfg, seed),
        Experiment::SidelobeRoc => sidelobe_roc(cfg, seed),
        Experiment::AntennaSweep => antenna_sweep(cfg, seed),
        Experiment::BeamPattern => beam_pattern_table(cfg, seed),
    }
}

/// Approximate detection probability of uniform weights, for reference.
pub fn uniform_detection(h0: &[f64], h1: &[f64], pf: f64) -> Result<f64> {
    let w = vec![1.0 / h0.len() as f64; h0.len()];
    detection_probability(&w, h0, h1, pf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("nope".parse::<Experiment>().is_err());
        assert_eq!(Experiment::ValidateRoc.file_name(7), "validate-roc_7.csv");
    }

    #[test]
    fn beam_pattern_table_shape() {
        let out = run_experiment(Experiment::BeamPattern, &ScenarioConfig::default(), 3).unwrap();
        assert_eq!(out.table.rows.len(), 361);
        assert!(out.table.to_csv().starts_with("angle_deg,ideal_db,alice_db,eve_db\n"));
    }
}
