//! Tail approximation for weighted sums of independent 2-dof noncentral
//! chi-square variables, `T = sum_l w_l Y_l` with `Y_l ~ chi2_2(lambda_l)`.
//!
//! `T` is standardized and matched in skewness (and kurtosis when possible)
//! to a single noncentral chi-square law.

use super::ncx2::Ncx2;
use crate::error::{check_len, invalid, Result};
use crate::numeric::neumaier_sum;

/// Relative tolerance for deciding `s1^2 <= s2`.
const BRANCH_SNAP: f64 = 1e-10;

/// Moment-matched surrogate for a weighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFormApprox {
    /// Mean of the weighted sum.
    pub mean: f64,
    /// Standard deviation of the weighted sum.
    pub sd: f64,
    /// Degrees of freedom of the matched law.
    pub dof: f64,
    /// Noncentrality of the matched law.
    pub nc: f64,
}

impl QuadFormApprox {
    fn law(&self) -> Result<Ncx2> {
        Ncx2::new(self.dof, self.nc)
    }

    /// Maps a threshold on the weighted sum to the matched law's scale.
    pub fn map_threshold(&self, tau: f64) -> f64 {
        (tau - self.mean) / self.sd * (2.0 * self.dof + 4.0 * self.nc).sqrt() + self.dof + self.nc
    }

    /// Approximate `P(T > tau)`.
    pub fn tail(&self, tau: f64) -> Result<f64> {
        self.law()?.sf(self.map_threshold(tau))
    }

    /// Threshold on the weighted sum whose approximate tail equals `p`.
    pub fn inverse_tail(&self, p: f64) -> Result<f64> {
        let t = self.law()?.inverse_sf(p)?;
        let scale = (2.0 * self.dof + 4.0 * self.nc).sqrt();
        Ok((t - (self.dof + self.nc)) / scale * self.sd + self.mean)
    }
}

/// Builds the moment-matched surrogate for weights `w` and noncentralities
/// `lambdas`.
pub fn quadform_approx(weights: &[f64], lambdas: &[f64]) -> Result<QuadFormApprox> {
    check_len(weights.len(), lambdas.len())?;
    if weights.is_empty() {
        return Err(invalid("weights", "empty"));
    }
    if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(invalid("weights", "entries must be finite and nonnegative"));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(invalid("weights", "all zero"));
    }
    if lambdas.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
        return Err(invalid("lambdas", "entries must be finite and nonnegative"));
    }
    let cumulant = |k: i32| -> f64 {
        let base = neumaier_sum(weights.iter().map(|w| 2.0 * w.powi(k)));
        let shift = neumaier_sum(weights.iter().zip(lambdas).map(|(w, l)| w.powi(k) * l));
        base + k as f64 * shift
    };
    let (c1, c2, c3, c4) = (cumulant(1), cumulant(2), cumulant(3), cumulant(4));
    let s1 = c3 / c2.powf(1.5);
    let s2 = c4 / (c2 * c2);
    let gap = s1 * s1 - s2;
    let (dof, nc) = if gap > BRANCH_SNAP * s2 {
        let a = 1.0 / (s1 - gap.sqrt());
        let nc = s1 * a.powi(3) - a * a;
        (a * a - 2.0 * nc, nc)
    } else {
        let a = 1.0 / s1;
        (a * a, 0.0)
    };
    Ok(QuadFormApprox {
        mean: c1,
        sd: (2.0 * c2).sqrt(),
        dof,
        nc: nc.max(0.0),
    })
}

/// Approximate `P(sum_l w_l Y_l > tau)`.
pub fn weighted_sum_tail(weights: &[f64], lambdas: &[f64], tau: f64) -> Result<f64> {
    quadform_approx(weights, lambdas)?.tail(tau)
}
