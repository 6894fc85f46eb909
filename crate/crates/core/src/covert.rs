//! Covert power and training-length design.
//!
//! Maximizes the log effective rate
//! `log(1 - N/N_tot) + log ln(1 + cNP) + log P_a(2cNP)` subject to the covert
//! constraint `N P Gamma <= 2 sigma_e^2 eps^2` by alternating proximal
//! (successive convex approximation) steps in `P` and `N`.

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::array::{CVector, Codebook};
use crate::error::{invalid, Error, Result};
use crate::numeric::{maximize_concave, neumaier_sum};
use crate::stats::PaModel;

/// Smallest admissible transmit power relative to `p_max`.
const P_FLOOR: f64 = 1e-9;

/// Robust leakage constant `sum_l (|h_e w_l| + h_bound ||w_l||)^2` over a
/// sweep in which each transmit codeword is used `repeats` times.
pub fn gamma_const(h_e: &CVector, h_bound: f64, codebook: &Codebook, repeats: usize) -> Result<f64> {
    if !(h_bound >= 0.0 && h_bound.is_finite()) {
        return Err(invalid("h_bound", "must be finite and nonnegative"));
    }
    let mut terms = Vec::with_capacity(codebook.len());
    for w in codebook.codewords() {
        crate::error::check_len(h_e.len(), w.len())?;
        let leak = h_e.dot(w).norm() + h_bound * w.norm();
        terms.push(repeats as f64 * leak * leak);
    }
    Ok(neumaier_sum(terms))
}

/// KL divergence between Eve's observations with and without a sweep:
/// `sum_l N P |h_e w_l|^2 / sigma_e^2`.
pub fn kl_divergence(h_e: &CVector, codebook: &Codebook, repeats: usize, n: f64, p: f64, sigma_e2: f64) -> Result<f64> {
    if !(sigma_e2 > 0.0) {
        return Err(invalid("sigma_e2", "must be positive"));
    }
    let mut terms = Vec::with_capacity(codebook.len());
    for w in codebook.codewords() {
        crate::error::check_len(h_e.len(), w.len())?;
        terms.push(repeats as f64 * n * p * h_e.dot(w).norm_sqr() / sigma_e2);
    }
    Ok(neumaier_sum(terms))
}

/// Eve's mean observation per beam pair, `sqrt(N P) h_e w_l`, in sweep order.
pub fn eve_means(h_e: &CVector, codebook: &Codebook, repeats: usize, n: f64, p: f64) -> Vec<Complex64> {
    let amp = (n * p).sqrt();
    codebook
        .codewords()
        .iter()
        .flat_map(|w| std::iter::repeat_n(h_e.dot(w) * amp, repeats))
        .collect()
}

/// Minimum total detection error of an optimal detector facing a Gaussian
/// mean shift with KL divergence `kl`.
pub fn optimal_detection_error(kl: f64) -> f64 {
    erfc((kl / 2.0).sqrt() / std::f64::consts::SQRT_2)
}

/// Effective rate `(1 - N/N_tot) P_a log2(1 + c N P)`.
pub fn covert_rate(n: f64, p: f64, n_total: f64, pa: f64, snr_coeff: f64) -> Result<f64> {
    if !(n >= 0.0 && n < n_total) {
        return Err(invalid("n", format!("must lie in [0, {n_total}), got {n}")));
    }
    if !(p >= 0.0) {
        return Err(invalid("p", "must be nonnegative"));
    }
    if !(0.0..=1.0).contains(&pa) {
        return Err(invalid("pa", format!("must lie in [0, 1], got {pa}")));
    }
    Ok((1.0 - n / n_total) * pa * (snr_coeff * n * p).ln_1p() / std::f64::consts::LN_2)
}

/// Dual step `nu <- max(0, nu + step (N P Gamma - b))`.
pub fn update_nu(nu: f64, n: f64, p: f64, gamma: f64, budget: f64, step: f64) -> f64 {
    (nu + step * (n * p * gamma - budget)).max(0.0)
}

/// Covert design problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovertProblem {
    /// Robust leakage constant.
    pub gamma: f64,
    /// Covertness level.
    pub epsilon: f64,
    /// Noise variance at Bob.
    pub sigma_n2: f64,
    /// Noise variance at Eve.
    pub sigma_e2: f64,
    /// Path-gain power `|alpha|^2`.
    pub alpha_sq: f64,
    /// Receive main-lobe gain.
    pub main_rx: f64,
    /// Transmit main-lobe gain.
    pub main_tx: f64,
    /// Frame length in symbols.
    pub n_total: usize,
    pub n_max: usize,
    pub p_max: f64,
    pub pa_model: PaModel,
}

impl CovertProblem {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("sigma_n2", self.sigma_n2),
            ("sigma_e2", self.sigma_e2),
            ("alpha_sq", self.alpha_sq),
            ("main_rx", self.main_rx),
            ("main_tx", self.main_tx),
            ("p_max", self.p_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.epsilon < 1.0) {
            return Err(invalid("epsilon", "must be below 1"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", "must be finite and nonnegative"));
        }
        if self.n_max == 0 || self.n_max >= self.n_total {
            return Err(invalid(
                "n_max",
                format!("must lie in [1, {}), got {}", self.n_total, self.n_max),
            ));
        }
        Ok(())
    }

    /// `c` in `SNR = c N P`.
    pub fn snr_coeff(&self) -> f64 {
        self.alpha_sq * self.main_rx * self.main_tx / self.sigma_n2
    }

    /// Aligned-pair noncentrality `2 c N P`.
    pub fn lambda(&self, n: f64, p: f64) -> f64 {
        2.0 * self.snr_coeff() * n * p
    }

    /// Right-hand side of the covert constraint, `2 sigma_e^2 eps^2`.
    pub fn budget(&self) -> f64 {
        2.0 * self.sigma_e2 * self.epsilon * self.epsilon
    }

    /// `N P Gamma - b`.
    pub fn constraint(&self, n: f64, p: f64) -> f64 {
        n * p * self.gamma - self.budget()
    }

    /// Largest power allowed by the box and the covert constraint at `n`.
    pub fn p_cap(&self, n: f64) -> f64 {
        if self.gamma > 0.0 {
            self.p_max.min(self.budget() / (n * self.gamma))
        } else {
            self.p_max
        }
    }

    /// Largest training length allowed by the box and the covert constraint at `p`.
    pub fn n_cap(&self, p: f64) -> f64 {
        let n_max = self.n_max as f64;
        if self.gamma > 0.0 {
            n_max.min(self.budget() / (p * self.gamma)).max(1.0)
        } else {
            n_max
        }
    }

    pub fn pa(&self, n: f64, p: f64) -> Result<f64> {
        self.pa_model.pa(self.lambda(n, p))
    }

    pub fn rate(&self, n: f64, p: f64) -> Result<f64> {
        covert_rate(n, p, self.n_total as f64, self.pa(n, p)?, self.snr_coeff())
    }

    /// Log objective `log(1 - N/N_tot) + log ln(1 + cNP) + log P_a`.
    pub fn objective(&self, n: f64, p: f64) -> Result<f64> {
        let c = self.snr_coeff();
        Ok((-n / self.n_total as f64).ln_1p() + (c * n * p).ln_1p().ln() + self.pa(n, p)?.ln())
    }

    /// `objective - nu (N P Gamma - b)`.
    pub fn lagrangian(&self, n: f64, p: f64, nu: f64) -> Result<f64> {
        Ok(self.objective(n, p)? - nu * self.constraint(n, p))
    }

    /// Derivative of `log ln(1 + c x) + log P_a(2 c x)` in `x = N P`.
    fn d_objective_dx(&self, x: f64) -> Result<f64> {
        let c = self.snr_coeff();
        let cx = c * x;
        let rate_part = c / ((1.0 + cx) * cx.ln_1p());
        Ok(rate_part + 2.0 * c * self.pa_model.grad_log_pa(2.0 * cx)?)
    }
}

/// Current point of the alternating scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemState {
    pub p: f64,
    pub n: f64,
    pub nu: f64,
}

/// Proximal power update: maximizes the concave surrogate in which
/// `log P_a` is linearized at the current point, over
/// `(0, min(P_max, b / (N Gamma))]`.
pub fn solve_p_subproblem(state: SubproblemState, prob: &CovertProblem, tau_p: f64) -> Result<f64> {
    if !(tau_p > 0.0) {
        return Err(invalid("tau_p", "must be positive"));
    }
    let c = prob.snr_coeff();
    let (n, pt, nu) = (state.n, state.p, state.nu);
    let lin = 2.0 * c * n * prob.pa_model.grad_log_pa(prob.lambda(n, pt))?;
    let penalty = nu * n * prob.gamma;
    let deriv = |p: f64| {
        let cx = c * n * p;
        c * n / ((1.0 + cx) * cx.ln_1p()) - penalty + lin - 2.0 * tau_p * (p - pt)
    };
    let hi = prob.p_cap(n);
    let lo = (P_FLOOR * prob.p_max).min(hi);
    Ok(maximize_concave(deriv, lo, hi, 1e-15 * hi))
}

/// Result of the training-length update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NStep {
    /// Maximizer of the continuous surrogate.
    pub continuous: f64,
    /// `floor(continuous + 1/2)` clamped to `[1, N_max]`.
    pub rounded: usize,
}

/// Rounds a continuous training length to the nearest integer in `[1, n_max]`.
pub fn round_training_length(n: f64, n_max: usize) -> usize {
    ((n + 0.5).floor().max(1.0) as usize).min(n_max)
}

/// Proximal training-length update over `[1, min(N_max, b / (P Gamma))]`,
/// followed by rounding.
pub fn solve_n_subproblem(state: SubproblemState, prob: &CovertProblem, tau_n: f64) -> Result<NStep> {
    if !(tau_n > 0.0) {
        return Err(invalid("tau_n", "must be positive"));
    }
    let c = prob.snr_coeff();
    let (nt, p, nu) = (state.n, state.p, state.nu);
    let n_total = prob.n_total as f64;
    let lin = 2.0 * c * p * prob.pa_model.grad_log_pa(prob.lambda(nt, p))?;
    let penalty = nu * p * prob.gamma;
    let deriv = |n: f64| {
        let cx = c * n * p;
        c * p / ((1.0 + cx) * cx.ln_1p()) - 1.0 / (n_total - n) - penalty + lin - 2.0 * tau_n * (n - nt)
    };
    let hi = prob.n_cap(p);
    let continuous = maximize_concave(deriv, 1.0, hi, 1e-12 * hi);
    Ok(NStep {
        continuous,
        rounded: round_training_length(continuous, prob.n_max),
    })
}

/// Step sizes and stopping rule of the alternating scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Dual step scale; the step at iteration `t` is `eta / sqrt(t)`.
    pub eta: f64,
    /// Initial proximal weight of the power update.
    pub tau_p: f64,
    /// Initial proximal weight of the training-length update.
    pub tau_n: f64,
    /// Stop once the Lagrangian changes by at most this much.
    pub tol: f64,
    pub t_max: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            eta: 0.1,
            tau_p: 1.0,
            tau_n: 1e-3,
            tol: 1e-5,
            t_max: 100,
        }
    }
}

/// One row of the optimizer trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub p: f64,
    pub n: usize,
    pub nu: f64,
    /// Lagrangian at the continuous training length, before rounding.
    pub lagrangian_pre_round: f64,
    /// Lagrangian at the accepted (rounded) point.
    pub lagrangian: f64,
    /// Effective rate at the accepted point.
    pub rate: f64,
    /// Whether rounding or the feasibility restoration changed the point.
    pub rounding_event: bool,
}

/// Optimality diagnostics at the returned point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub stationarity: f64,
    pub complementary_slackness: f64,
    pub primal_violation: f64,
    pub dual_violation: f64,
    pub constraint_active: bool,
}

impl KktReport {
    pub fn residual(&self) -> f64 {
        self.stationarity
            .max(self.complementary_slackness)
            .max(self.primal_violation)
            .max(self.dual_violation)
    }
}

/// Output of [`optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovertSolution {
    pub p: f64,
    pub n: usize,
    /// Multiplier of the covert constraint.
    pub nu: f64,
    pub rate: f64,
    pub pa: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub feasible: bool,
    pub kkt: KktReport,
    pub trace: Vec<IterationRecord>,
}

fn safeguarded<F>(base: f64, tau0: f64, mut step: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    // Returns (point, lagrangian); doubles the proximal weight until the
    // true Lagrangian does not decrease.
    let mut tau = tau0;
    for _ in 0..60 {
        let (x, value) = step(tau)?;
        if value >= base - 1e-12 * base.abs().max(1.0) {
            return Ok((x, value));
        }
        tau *= 2.0;
    }
    Ok((f64::NAN, f64::NEG_INFINITY))
}

/// Runs the alternating proximal scheme from the default starting point.
pub fn optimize(prob: &CovertProblem, opts: &OptimizerOptions) -> Result<CovertSolution> {
    prob.validate()?;
    if !(opts.eta > 0.0 && opts.tau_p > 0.0 && opts.tau_n > 0.0 && opts.tol > 0.0) || opts.t_max == 0 {
        return Err(invalid(
            "options",
            "eta, tau_p, tau_n, tol must be positive and t_max at least 1",
        ));
    }
    let b = prob.budget();
    if prob.p_cap(1.0) < P_FLOOR * prob.p_max {
        return Err(Error::Infeasible(format!(
            "covert budget {b:.3e} cannot support any training at gamma {:.3e}",
            prob.gamma
        )));
    }
    let mut p = 0.9 * prob.p_cap(prob.n_max as f64);
    let mut n = prob.n_max.min(4);
    let mut nu = 0.0;
    let mut current = prob.lagrangian(n as f64, p, nu)?;
    let mut trace = vec![IterationRecord {
        iteration: 0,
        p,
        n,
        nu,
        lagrangian_pre_round: current,
        lagrangian: current,
        rate: prob.rate(n as f64, p)?,
        rounding_event: false,
    }];
    let mut converged = false;
    let mut iterations = 0;
    for t in 1..=opts.t_max {
        iterations = t;
        nu = update_nu(nu, n as f64, p, prob.gamma, b, opts.eta / (t as f64).sqrt());
        let nf = n as f64;

        let base = prob.lagrangian(nf, p, nu)?;
        let (p_new, _) = safeguarded(base, opts.tau_p, |tau| {
            let cand = solve_p_subproblem(SubproblemState { p, n: nf, nu }, prob, tau)?;
            Ok((cand, prob.lagrangian(nf, cand, nu)?))
        })?;
        if p_new.is_finite() {
            p = p_new;
        }

        let base = prob.lagrangian(nf, p, nu)?;
        let (n_cont, pre) = safeguarded(base, opts.tau_n, |tau| {
            let step = solve_n_subproblem(SubproblemState { p, n: nf, nu }, prob, tau)?;
            Ok((step.continuous, prob.lagrangian(step.continuous, p, nu)?))
        })?;
        let (n_cont, pre) = if n_cont.is_finite() { (n_cont, pre) } else { (nf, base) };

        let rounded = round_training_length(n_cont, prob.n_max);
        let mut event = (rounded as f64 - n_cont).abs() > 1e-12;
        if prob.constraint(rounded as f64, p) > 0.0 {
            p = prob.p_cap(rounded as f64);
            event = true;
        }
        n = rounded;
        let value = prob.lagrangian(n as f64, p, nu)?;
        trace.push(IterationRecord {
            iteration: t,
            p,
            n,
            nu,
            lagrangian_pre_round: pre,
            lagrangian: value,
            rate: prob.rate(n as f64, p)?,
            rounding_event: event,
        });
        let change = (value - current).abs();
        current = value;
        if change <= opts.tol {
            converged = true;
            break;
        }
    }

    let nf = n as f64;
    let x = nf * p;
    let g = prob.constraint(nf, p);
    let active = prob.gamma > 0.0 && g >= -1e-9 * b;
    let dfdp = nf * prob.d_objective_dx(x)?;
    let nu_star = if active {
        (dfdp / (nf * prob.gamma)).max(0.0)
    } else {
        0.0
    };
    let grad = dfdp - nu_star * nf * prob.gamma;
    let at_box = p >= prob.p_max * (1.0 - 1e-12);
    let stationarity = if at_box { (-grad).max(0.0) } else { grad.abs() };
    let kkt = KktReport {
        stationarity,
        complementary_slackness: (nu_star * g).abs(),
        primal_violation: g.max(0.0),
        dual_violation: (-nu_star).max(0.0),
        constraint_active: active,
    };
    Ok(CovertSolution {
        p,
        n,
        nu: nu_star,
        rate: prob.rate(nf, p)?,
        pa: prob.pa(nf, p)?,
        lambda: prob.lambda(nf, p),
        iterations,
        converged,
        feasible: g <= 1e-9 * b,
        kkt,
        trace,
    })
}

/// Exhaustive search over `N = 1..=N_max` and `points` powers per `N`
/// spread evenly over `(0, min(P_max, b / (N Gamma))]`. Returns
/// `(rate, N, P)`.
pub fn grid_search(prob: &CovertProblem, points: usize) -> Result<(f64, usize, f64)> {
    prob.validate()?;
    let mut best = (f64::NEG_INFINITY, 1, 0.0);
    for n in 1..=prob.n_max {
        let cap = prob.p_cap(n as f64);
        for k in 1..=points {
            let p = cap * k as f64 / points as f64;
            let r = prob.rate(n as f64, p)?;
            if r > best.0 {
                best = (r, n, p);
            }
        }
    }
    Ok(best)
}
