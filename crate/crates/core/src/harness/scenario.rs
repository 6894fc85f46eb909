//! Device, channel and eavesdropper realizations for one experiment.

use num_complex::Complex64;

use super::rng::{purpose, stream_rng};
use crate::array::{build_codebook, complex_normal, ArrayModel, CVector, Channel, Codebook, GainModel};
use crate::config::{AlphaMode, ScenarioConfig};
use crate::covert::{gamma_const, CovertProblem, OptimizerOptions};
use crate::error::Result;

/// Angular region covered by every codebook.
pub const REGION: (f64, f64) = (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);

/// Everything drawn once per experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub tx_codebook: Codebook,
    pub rx_codebook: Codebook,
    pub alice: ArrayModel,
    pub eve: ArrayModel,
    pub bob: ArrayModel,
    pub alpha0: Complex64,
    pub alpha1: Complex64,
    pub sigma_n2: f64,
    /// Eve-channel estimate used by the covert design.
    pub h_e_hat: CVector,
    /// Eve's actual channel, within `h_bound` of the estimate.
    pub h_e: CVector,
    pub h_bound: f64,
    pub gains: GainModel,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig, seed: u64) -> Result<Self> {
        let c = config;
        let mut rng = stream_rng(seed, purpose::DEVICES, 0, 0);
        let alice = ArrayModel::new(c.n_t, c.coupling_taps, c.coupling_alice)?.sample_coupling(&mut rng);
        let eve = ArrayModel::new(c.n_t, c.coupling_taps, c.coupling_eve)?.sample_coupling(&mut rng);
        let bob = ArrayModel::new(c.n_r, c.coupling_taps, c.coupling_bob)?.sample_coupling(&mut rng);
        let zero = Complex64::new(0.0, 0.0);
        let unit_draw0 = complex_normal(&mut rng, zero, 1.0);
        let unit_draw1 = complex_normal(&mut rng, zero, 1.0);
        let (alpha0, alpha1) = match c.alpha_mode {
            AlphaMode::Mean => (
                Complex64::new(c.alpha0_var.sqrt(), 0.0),
                Complex64::new(c.alpha1_var.sqrt(), 0.0),
            ),
            AlphaMode::Draw => (unit_draw0 * c.alpha0_var.sqrt(), unit_draw1 * c.alpha1_var.sqrt()),
        };
        let eve_power = c.kappa_e() * c.sigma_e2;
        let entry_sd = (eve_power / c.n_t as f64).sqrt();
        let h_e_hat = CVector::from_fn(c.n_t, |_, _| complex_normal(&mut rng, zero, 1.0) * entry_sd);
        let h_bound = c.csi_error * eve_power.sqrt();
        let dir = CVector::from_fn(c.n_t, |_, _| complex_normal(&mut rng, zero, 1.0));
        let h_e = &h_e_hat + dir.unscale(dir.norm()) * Complex64::new(h_bound, 0.0);
        Ok(Self {
            tx_codebook: build_codebook(c.n_t, c.l_t, REGION)?,
            rx_codebook: build_codebook(c.n_r, c.l_r, REGION)?,
            gains: GainModel::from_mode(c.gain_mode, c.l_t, c.l_r, c.sidelobe_eta)?,
            sigma_n2: c.alpha0_var / c.kappa_n(),
            config: config.clone(),
            seed,
            alice,
            eve,
            bob,
            alpha0,
            alpha1,
            h_e_hat,
            h_e,
            h_bound,
        })
    }

    pub fn beam_pairs(&self) -> usize {
        self.tx_codebook.len() * self.rx_codebook.len()
    }

    /// Pair index `i_t * L_R + i_r` whose sectors contain the angles.
    pub fn pair_index(&self, aod_deg: f64, aoa_deg: f64) -> Option<usize> {
        let it = self.tx_codebook.sector_of(aod_deg.to_radians())?;
        let ir = self.rx_codebook.sector_of(aoa_deg.to_radians())?;
        Some(it * self.rx_codebook.len() + ir)
    }

    pub fn legit_pair(&self) -> usize {
        self.pair_index(self.config.phi0_deg, self.config.theta0_deg)
            .expect("angles validated to lie in the codebook region")
    }

    pub fn adversary_pair(&self) -> usize {
        self.pair_index(self.config.phi1_deg, self.config.theta1_deg)
            .expect("angles validated to lie in the codebook region")
    }

    /// Alice to Bob.
    pub fn legit_channel(&self) -> Channel {
        Channel {
            gain: self.alpha0,
            aoa: self.config.theta0_deg.to_radians(),
            aod: self.config.phi0_deg.to_radians(),
            rx: self.bob.clone(),
            tx: self.alice.clone(),
        }
    }

    /// Eve to Bob.
    pub fn adversary_channel(&self) -> Channel {
        Channel {
            gain: self.alpha1,
            aoa: self.config.theta1_deg.to_radians(),
            aod: self.config.phi1_deg.to_radians(),
            rx: self.bob.clone(),
            tx: self.eve.clone(),
        }
    }

    pub fn gamma(&self) -> Result<f64> {
        gamma_const(&self.h_e_hat, self.h_bound, &self.tx_codebook, self.rx_codebook.len())
    }

    pub fn covert_problem(&self) -> Result<CovertProblem> {
        let c = &self.config;
        let prob = CovertProblem {
            gamma: self.gamma()?,
            epsilon: c.epsilon,
            sigma_n2: self.sigma_n2,
            sigma_e2: c.sigma_e2,
            alpha_sq: self.alpha0.norm_sqr(),
            main_rx: self.gains.main_rx,
            main_tx: self.gains.main_tx,
            n_total: c.n_total,
            n_max: c.n_max,
            p_max: c.p_max,
            pa_model: self.gains.pa_model(),
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        let c = &self.config;
        OptimizerOptions {
            eta: c.eta,
            tau_p: c.tau_p,
            tau_n: c.tau_n,
            tol: c.tol,
            t_max: c.t_max,
        }
    }

    /// Quantized-model amplitudes `N sqrt(P |alpha|^2 g_l)` for a transmitter
    /// whose true pair is `aligned`.
    pub fn quantized_amplitudes(&self, n: f64, p: f64, alpha_sq: f64, aligned: usize) -> Vec<Complex64> {
        let lr = self.rx_codebook.len();
        let (at, ar) = (aligned / lr, aligned % lr);
        (0..self.beam_pairs())
            .map(|l| {
                let g = self.gains.pair_gain(l / lr == at, l % lr == ar);
                Complex64::new(n * (p * alpha_sq * g).sqrt(), 0.0)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_is_deterministic() {
        let cfg = ScenarioConfig::default();
        let a = Scenario::new(&cfg, 9).unwrap();
        let b = Scenario::new(&cfg, 9).unwrap();
        assert_eq!(a.alice, b.alice);
        assert_eq!(a.h_e, b.h_e);
        assert!(((&a.h_e - &a.h_e_hat).norm() - a.h_bound).abs() < 1e-12);
        let c = Scenario::new(&cfg, 10).unwrap();
        assert_ne!(a.alice, c.alice);
    }

    #[test]
    fn default_pairs_and_problem() {
        let s = Scenario::new(&ScenarioConfig::default(), 1).unwrap();
        assert_eq!(s.beam_pairs(), 128);
        assert_eq!(s.legit_pair(), 13 * 8 + 5);
        let prob = s.covert_problem().unwrap();
        assert!(prob.gamma > 0.0);
        assert!((s.sigma_n2 - 10f64.powf(0.6)).abs() < 1e-12);
    }
}
