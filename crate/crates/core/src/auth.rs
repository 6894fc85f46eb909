//! Coupling-fingerprint authentication with a weighted energy detector.
//!
//! Bob sweeps all beam pairs, normalizes each received energy to
//! `Y_l = 2|y_l|^2 / (N sigma_n^2)` and compares `T = sum_l w_l Y_l` with a
//! threshold. `H0` is the legitimate transmitter, `H1` the adversary; the
//! detector declares an adversary when `T > tau`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{Channel, Codebook};
use crate::error::{check_len, invalid, Result};
use crate::numeric::{neumaier_sum, project_box_simplex};
use crate::stats::{quadform_approx, QuadFormApprox};

/// Noiseless received amplitudes `N sqrt(P) f^H H w` for every beam pair,
/// ordered as `l = i_t * L_R + i_r`.
pub fn pair_amplitudes(channel: &Channel, tx: &Codebook, rx: &Codebook, n: f64, p: f64) -> Result<Vec<Complex64>> {
    let ar = channel.rx.response(channel.aoa);
    let at = channel.tx.response(channel.aod);
    let scale = channel.gain * n * p.sqrt();
    let mut out = Vec::with_capacity(tx.len() * rx.len());
    for w in tx.codewords() {
        check_len(at.len(), w.len())?;
        let t = at.dotc(w);
        for f in rx.codewords() {
            check_len(ar.len(), f.len())?;
            out.push(scale * f.dotc(&ar) * t);
        }
    }
    Ok(out)
}

/// Noncentralities `2 |s_l|^2 / (N sigma_n^2)` of the normalized energies.
pub fn profile_from_amplitudes(amplitudes: &[Complex64], n: f64, sigma_n2: f64) -> Vec<f64> {
    amplitudes.iter().map(|s| 2.0 * s.norm_sqr() / (n * sigma_n2)).collect()
}

/// Noncentrality profile of a transmitter observed through `channel`.
pub fn noncentrality_profile(
    channel: &Channel,
    tx: &Codebook,
    rx: &Codebook,
    n: f64,
    p: f64,
    sigma_n2: f64,
) -> Result<Vec<f64>> {
    if !(n > 0.0 && sigma_n2 > 0.0) {
        return Err(invalid("n, sigma_n2", "must be positive"));
    }
    let amps = pair_amplitudes(channel, tx, rx, n, p)?;
    Ok(profile_from_amplitudes(&amps, n, sigma_n2))
}

/// Normalized energies `Y_l = 2 |y_l|^2 / (N sigma_n^2)`.
pub fn normalized_energies(y: &[Complex64], n: f64, sigma_n2: f64) -> Vec<f64> {
    y.iter().map(|v| 2.0 * v.norm_sqr() / (n * sigma_n2)).collect()
}

/// Weighted statistic `T = sum_l w_l 2 |y_l|^2 / (N sigma_n^2)`.
pub fn test_statistic(y: &[Complex64], weights: &[f64], n: f64, sigma_n2: f64) -> Result<f64> {
    check_len(weights.len(), y.len())?;
    Ok(weighted_energy(&normalized_energies(y, n, sigma_n2), weights))
}

/// `sum_l w_l Y_l`.
pub fn weighted_energy(energies: &[f64], weights: &[f64]) -> f64 {
    neumaier_sum(energies.iter().zip(weights).map(|(y, w)| y * w))
}

/// Detector decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Legitimate,
    Adversary,
}

/// Declares an adversary iff `t > tau`; ties are legitimate.
pub fn decide(t: f64, tau: f64) -> Decision {
    if t > tau {
        Decision::Adversary
    } else {
        Decision::Legitimate
    }
}

/// Threshold whose approximate false-alarm probability under `h0` is
/// `pf_target`.
pub fn calibrate_threshold(weights: &[f64], h0: &[f64], pf_target: f64) -> Result<f64> {
    if !(pf_target > 0.0 && pf_target < 1.0) {
        return Err(invalid("pf_target", format!("must lie in (0, 1), got {pf_target}")));
    }
    quadform_approx(weights, h0)?.inverse_tail(pf_target)
}

/// Approximate `(P_f, P_d)` at threshold `tau`.
pub fn pf_pd_theoretical(weights: &[f64], h0: &[f64], h1: &[f64], tau: f64) -> Result<(f64, f64)> {
    check_len(h0.len(), h1.len())?;
    Ok((
        quadform_approx(weights, h0)?.tail(tau)?,
        quadform_approx(weights, h1)?.tail(tau)?,
    ))
}

/// Approximate detection probability at the threshold calibrated for
/// `pf_target`.
pub fn detection_probability(weights: &[f64], h0: &[f64], h1: &[f64], pf_target: f64) -> Result<f64> {
    let tau = calibrate_threshold(weights, h0, pf_target)?;
    quadform_approx(weights, h1)?.tail(tau)
}

/// Calibrated detector.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthModel {
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub h0: QuadFormApprox,
    pub h1: QuadFormApprox,
}

impl AuthModel {
    pub fn new(weights: Vec<f64>, h0: &[f64], h1: &[f64], pf_target: f64) -> Result<Self> {
        check_len(h0.len(), h1.len())?;
        let threshold = calibrate_threshold(&weights, h0, pf_target)?;
        Ok(Self {
            h0: quadform_approx(&weights, h0)?,
            h1: quadform_approx(&weights, h1)?,
            weights,
            threshold,
        })
    }

    pub fn pf(&self) -> Result<f64> {
        self.h0.tail(self.threshold)
    }

    pub fn pd(&self) -> Result<f64> {
        self.h1.tail(self.threshold)
    }

    pub fn decide(&self, energies: &[f64]) -> Decision {
        decide(weighted_energy(energies, &self.weights), self.threshold)
    }
}

/// Settings for [`optimize_weights`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightOptions {
    pub max_iter: usize,
    /// Stop when an accepted step improves `P_d` by less than this.
    pub tol: f64,
    /// Lower box bound on every weight.
    pub lower: f64,
    /// Central-difference step.
    pub fd_step: f64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-10,
            lower: 1e-6,
            fd_step: 1e-7,
        }
    }
}

/// Output of [`optimize_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    pub pd: f64,
    pub threshold: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes the approximate detection probability at `pf_target` over
/// weights on the simplex, starting from uniform weights, by projected
/// gradient ascent with backtracking. Always returns the best iterate.
pub fn optimize_weights(h0: &[f64], h1: &[f64], pf_target: f64, opts: &WeightOptions) -> Result<WeightSolution> {
    check_len(h0.len(), h1.len())?;
    let l = h0.len();
    if l == 0 {
        return Err(invalid("profile", "empty"));
    }
    let lo = opts.lower;
    let hi = 1.0 - lo * (l as f64 - 1.0);
    let objective = |w: &[f64]| detection_probability(w, h0, h1, pf_target);
    let mut w = vec![1.0 / l as f64; l];
    let mut value = objective(&w)?;
    if l == 1 {
        let threshold = calibrate_threshold(&w, h0, pf_target)?;
        return Ok(WeightSolution {
            weights: w,
            pd: value,
            threshold,
            iterations: 0,
            converged: true,
        });
    }
    let h = opts.fd_step;
    let mut step = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;
    let mut small_steps = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let grad = (0..l)
            .into_par_iter()
            .map(|i| {
                let mut up = w.clone();
                let mut down = w.clone();
                up[i] += h;
                down[i] = (down[i] - h).max(0.0);
                let span = up[i] - down[i];
                Ok((objective(&up)? - objective(&down)?) / span)
            })
            .collect::<Result<Vec<f64>>>()?;
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax == 0.0 || !gmax.is_finite() {
            converged = gmax == 0.0;
            break;
        }
        if !step.is_finite() {
            step = 0.1 / (gmax * l as f64);
        }
        let mut accepted = false;
        let mut s = step * 4.0;
        for _ in 0..60 {
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(x, g)| x + s * g).collect();
            let cand = project_box_simplex(&trial, lo, hi)?;
            let ascent: f64 = cand.iter().zip(&w).zip(&grad).map(|((c, x), g)| (c - x) * g).sum();
            if ascent <= 0.0 {
                break;
            }
            let cand_value = objective(&cand)?;
            if cand_value >= value + 1e-4 * ascent {
                let gain = cand_value - value;
                w = cand;
                value = cand_value;
                step = s;
                accepted = true;
                small_steps = if gain < opts.tol { small_steps + 1 } else { 0 };
                break;
            }
            s *= 0.5;
        }
        if !accepted || small_steps >= 3 {
            converged = true;
            break;
        }
    }
    let threshold = calibrate_threshold(&w, h0, pf_target)?;
    Ok(WeightSolution {
        weights: w,
        pd: value,
        threshold,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistic_and_tie_rule() {
        let y = [Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)];
        let t = test_statistic(&y, &[0.25, 0.75], 2.0, 0.5).unwrap();
        assert!((t - (0.25 * 4.0 + 0.75 * 8.0)).abs() < 1e-12);
        assert_eq!(decide(t, t), Decision::Legitimate);
        assert_eq!(decide(t + 1e-9, t), Decision::Adversary);
        assert!(test_statistic(&y, &[1.0], 2.0, 0.5).is_err());
    }

    #[test]
    fn calibrated_threshold_hits_target() {
        let w = [0.2, 0.3, 0.5];
        let h0 = [1.0, 2.0, 0.5];
        let h1 = [3.0, 2.0, 6.0];
        let tau = calibrate_threshold(&w, &h0, 0.1).unwrap();
        let (pf, pd) = pf_pd_theoretical(&w, &h0, &h1, tau).unwrap();
        assert!((pf - 0.1).abs() < 1e-9);
        assert!(pd > pf);
    }

    #[test]
    fn optimized_weights_beat_uniform() {
        let h0 = [1.0, 1.0, 4.0, 0.5];
        let h1 = [1.0, 9.0, 4.0, 0.5];
        let sol = optimize_weights(&h0, &h1, 0.1, &WeightOptions::default()).unwrap();
        let uniform = detection_probability(&[0.25; 4], &h0, &h1, 0.1).unwrap();
        assert!(sol.pd > uniform + 0.05);
        assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(sol.weights[1] > 0.5);
    }

    #[test]
    fn identical_hypotheses_give_pd_equal_pf() {
        let h = [2.0, 3.0];
        let pd = detection_probability(&[0.5, 0.5], &h, &h, 0.2).unwrap();
        assert!((pd - 0.2).abs() < 1e-9);
    }
}
