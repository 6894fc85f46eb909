//! Monte Carlo trial runners. Each trial draws from its own stream and
//! results are reduced sequentially in trial order.

use num_complex::Complex64;
use rayon::prelude::*;

use super::rng::{purpose, stream_rng};
use super::scenario::Scenario;
use crate::array::complex_normal;
use crate::auth::{pf_pd_theoretical, weighted_energy};
use crate::covert::optimal_detection_error;
use crate::error::{invalid, Result};
use crate::stats::pa_general;

/// Theory versus simulation for one probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub metric: String,
    pub theoretical: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub trials: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl TrialReport {
    pub fn from_counts(metric: &str, theoretical: f64, successes: usize, trials: usize, tolerance: f64) -> Self {
        let empirical = successes as f64 / trials as f64;
        let std_error = (empirical * (1.0 - empirical) / trials as f64).sqrt();
        Self {
            metric: metric.to_string(),
            theoretical,
            empirical,
            std_error,
            trials,
            tolerance,
            passed: (theoretical - empirical).abs() <= tolerance,
        }
    }
}

fn noisy_energies<R: rand::Rng>(rng: &mut R, amplitudes: &[Complex64], noise_var: f64, norm: f64, out: &mut Vec<f64>) {
    out.clear();
    let zero = Complex64::new(0.0, 0.0);
    for s in amplitudes {
        let y = s + complex_normal(rng, zero, noise_var);
        out.push(y.norm_sqr() * norm);
    }
}

/// Counts trials in which the largest normalized energy sits at `aligned`.
/// Amplitudes are noiseless per-pair sums over `n` symbols of noise
/// variance `sigma_n2`.
pub fn count_alignments(
    amplitudes: &[Complex64],
    n: f64,
    sigma_n2: f64,
    aligned: usize,
    trials: usize,
    seed: u64,
    tag: u64,
) -> Result<usize> {
    if aligned >= amplitudes.len() {
        return Err(invalid("aligned", "index out of range"));
    }
    let noise_var = n * sigma_n2;
    let norm = 2.0 / noise_var;
    let hits: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            let mut rng = stream_rng(seed, purpose::ALIGNMENT, tag, i);
            noisy_energies(&mut rng, amplitudes, noise_var, norm, buf);
            let best = buf.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (l, &y)| if y > acc.1 { (l, y) } else { acc },
            );
            best.0 == aligned
        })
        .collect();
    Ok(hits.iter().filter(|&&h| h).count())
}

/// Which channel model the alignment trials use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaMode {
    /// Sector gains from the quantized gain model.
    Quantized,
    /// Full array responses with mutual coupling.
    Physical,
}

/// Alignment probability at `(n, p)`: theory against simulation.
pub fn run_ba_trials(
    scen: &Scenario,
    mode: BaMode,
    n: usize,
    p: f64,
    trials: usize,
    tolerance: f64,
) -> Result<TrialReport> {
    let nf = n as f64;
    let aligned = scen.legit_pair();
    let (amps, theory) = match mode {
        BaMode::Quantized => {
            let amps = scen.quantized_amplitudes(nf, p, scen.alpha0.norm_sqr(), aligned);
            let lambda = 2.0 * amps[aligned].norm_sqr() / (nf * scen.sigma_n2);
            (amps, scen.gains.pa_model().pa(lambda)?)
        }
        BaMode::Physical => {
            let amps =
                crate::auth::pair_amplitudes(&scen.legit_channel(), &scen.tx_codebook, &scen.rx_codebook, nf, p)?;
            let profile = crate::auth::profile_from_amplitudes(&amps, nf, scen.sigma_n2);
            let theory = pa_general(&profile, aligned)?;
            (amps, theory)
        }
    };
    let tag = if mode == BaMode::Quantized { 0 } else { 1 };
    let hits = count_alignments(&amps, nf, scen.sigma_n2, aligned, trials, scen.seed, tag)?;
    let name = if mode == BaMode::Quantized {
        "pa_quantized"
    } else {
        "pa_physical"
    };
    Ok(TrialReport::from_counts(name, theory, hits, trials, tolerance))
}

/// Simulated detector statistics `T = sum_l w_l Y_l`, one per trial.
#[allow(clippy::too_many_arguments)]
pub fn simulate_statistics(
    amplitudes: &[Complex64],
    weights: &[f64],
    n: f64,
    sigma_n2: f64,
    trials: usize,
    seed: u64,
    family: u64,
    tag: u64,
) -> Result<Vec<f64>> {
    crate::error::check_len(amplitudes.len(), weights.len())?;
    let noise_var = n * sigma_n2;
    let norm = 2.0 / noise_var;
    Ok((0..trials as u64)
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            let mut rng = stream_rng(seed, family, tag, i);
            noisy_energies(&mut rng, amplitudes, noise_var, norm, buf);
            weighted_energy(buf, weights)
        })
        .collect())
}

/// Simulated normalized energies of selected pairs, `trials` rows.
pub fn simulate_pair_energies(
    amplitudes: &[Complex64],
    pairs: &[usize],
    n: f64,
    sigma_n2: f64,
    trials: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let picked: Vec<Complex64> = pairs.iter().map(|&l| amplitudes[l]).collect();
    let noise_var = n * sigma_n2;
    let norm = 2.0 / noise_var;
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, purpose::ENERGIES, 0, i);
            let mut buf = Vec::with_capacity(picked.len());
            noisy_energies(&mut rng, &picked, noise_var, norm, &mut buf);
            buf
        })
        .collect()
}

/// Fraction of `sorted` strictly above `tau`.
pub fn exceedance(sorted: &[f64], tau: f64) -> f64 {
    let below = sorted.partition_point(|&t| t <= tau);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

/// One operating point of a detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub tau: f64,
    pub pf_theory: f64,
    pub pd_theory: f64,
    pub pf_empirical: f64,
    pub pd_empirical: f64,
}

impl RocPoint {
    /// Largest absolute theory-simulation discrepancy at this point.
    pub fn gap(&self) -> f64 {
        (self.pf_theory - self.pf_empirical)
            .abs()
            .max((self.pd_theory - self.pd_empirical).abs())
    }
}

/// Largest vertical distance between the simulated ROC and the theoretical
/// ROC, comparing each simulated point `(pf, pd)` with the theoretical
/// detection probability at the same false-alarm rate.
pub fn roc_curve_gap(weights: &[f64], h0: &[f64], h1: &[f64], points: &[RocPoint]) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in points {
        if p.pf_empirical <= 0.0 || p.pf_empirical >= 1.0 {
            continue;
        }
        let pd = crate::auth::detection_probability(weights, h0, h1, p.pf_empirical)?;
        worst = worst.max((pd - p.pd_empirical).abs());
    }
    Ok(worst)
}

/// Theory and simulation at each threshold in `taus`.
pub fn roc_curve(
    weights: &[f64],
    h0: &[f64],
    h1: &[f64],
    stats0: &[f64],
    stats1: &[f64],
    taus: &[f64],
) -> Result<Vec<RocPoint>> {
    let mut s0 = stats0.to_vec();
    let mut s1 = stats1.to_vec();
    s0.sort_by(f64::total_cmp);
    s1.sort_by(f64::total_cmp);
    taus.iter()
        .map(|&tau| {
            let (pf, pd) = pf_pd_theoretical(weights, h0, h1, tau)?;
            Ok(RocPoint {
                tau,
                pf_theory: pf,
                pd_theory: pd,
                pf_empirical: exceedance(&s0, tau),
                pd_empirical: exceedance(&s1, tau),
            })
        })
        .collect()
}

/// Eve's detection performance against a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveReport {
    pub kl: f64,
    /// Minimum total error of the optimal detector.
    pub xi_optimal: f64,
    /// Simulated false-alarm plus miss rate of the likelihood-ratio detector.
    pub xi_empirical: f64,
    /// `1 - eps`.
    pub covert_floor: f64,
    pub trials: usize,
}

/// Simulates Eve's optimal detector: with known means `m_l` and noise
/// variance `sigma_e2`, it tests `Re(sum conj(m_l) y_l) > ||m||^2 / 2`.
pub fn run_eve_detection(means: &[Complex64], sigma_e2: f64, epsilon: f64, trials: usize, seed: u64) -> EveReport {
    let energy: f64 = means.iter().map(|m| m.norm_sqr()).sum();
    let threshold = 0.5 * energy;
    let zero = Complex64::new(0.0, 0.0);
    let errors: Vec<(bool, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, purpose::EVE, 0, i);
            let mut s0 = 0.0;
            let mut s1 = 0.0;
            for m in means {
                let w0 = complex_normal(&mut rng, zero, sigma_e2);
                let w1 = complex_normal(&mut rng, zero, sigma_e2);
                s0 += (m.conj() * w0).re;
                s1 += (m.conj() * (m + w1)).re;
            }
            (s0 > threshold, s1 <= threshold)
        })
        .collect();
    let fa = errors.iter().filter(|e| e.0).count();
    let md = errors.iter().filter(|e| e.1).count();
    let kl = energy / sigma_e2;
    EveReport {
        kl,
        xi_optimal: optimal_detection_error(kl),
        xi_empirical: (fa + md) as f64 / trials as f64,
        covert_floor: 1.0 - epsilon,
        trials,
    }
}
