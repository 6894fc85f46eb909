//! Scenario configuration in a line-based `key = value` format.
//!
//! Blank lines and `#` comments are ignored, unknown keys are rejected and
//! angles are given in degrees. An empty file yields the defaults.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::array::GainMode;

/// How the path gains are chosen for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaMode {
    /// `|alpha|^2` equal to its configured variance.
    Mean,
    /// One complex Gaussian draw per experiment.
    Draw,
}

/// All scenario parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub l_t: usize,
    pub l_r: usize,
    pub n_total: usize,
    pub coupling_taps: usize,
    pub theta0_deg: f64,
    pub phi0_deg: f64,
    pub theta1_deg: f64,
    pub phi1_deg: f64,
    pub coupling_alice: f64,
    pub coupling_eve: f64,
    pub coupling_bob: f64,
    pub alpha0_var: f64,
    pub alpha1_var: f64,
    pub alpha_mode: AlphaMode,
    pub kappa_n_db: f64,
    pub kappa_e_db: f64,
    pub epsilon: f64,
    pub csi_error: f64,
    pub sigma_e2: f64,
    pub p_max: f64,
    pub n_max: usize,
    pub pf_target: f64,
    pub gain_mode: GainMode,
    pub sidelobe_eta: f64,
    pub eta: f64,
    pub tau_p: f64,
    pub tau_n: f64,
    pub tol: f64,
    pub t_max: usize,
    pub adversary_n_scale: f64,
    pub adversary_p_scale: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_t: 32,
            n_r: 16,
            l_t: 16,
            l_r: 8,
            n_total: 5210,
            coupling_taps: 3,
            theta0_deg: 30.0,
            phi0_deg: 60.0,
            theta1_deg: 15.0,
            phi1_deg: 18.0,
            coupling_alice: 0.1,
            coupling_eve: 0.4,
            coupling_bob: 0.1,
            alpha0_var: 1.0,
            alpha1_var: 2.0,
            alpha_mode: AlphaMode::Mean,
            kappa_n_db: -6.0,
            kappa_e_db: -15.0,
            epsilon: 0.2,
            csi_error: 0.1,
            sigma_e2: 1.0,
            p_max: 1.0,
            n_max: 64,
            pf_target: 0.1,
            gain_mode: GainMode::Ideal,
            sidelobe_eta: 0.9,
            eta: 0.1,
            tau_p: 1.0,
            tau_n: 1e-3,
            tol: 1e-5,
            t_max: 100,
            adversary_n_scale: 1.0,
            adversary_p_scale: 1.0,
            trials: 100_000,
            seed: 1,
        }
    }
}

/// Configuration errors.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{content}`")]
    Malformed { line: usize, content: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given more than once")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}`: cannot parse `{value}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("`{key}` out of range: {reason}")]
    OutOfRange { key: &'static str, reason: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

fn range_err(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::OutOfRange {
        key,
        reason: reason.into(),
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl ScenarioConfig {
    /// Names of all recognized keys.
    pub const KEYS: [&'static str; 35] = [
        "n_t",
        "n_r",
        "l_t",
        "l_r",
        "n_total",
        "coupling_taps",
        "theta0_deg",
        "phi0_deg",
        "theta1_deg",
        "phi1_deg",
        "coupling_alice",
        "coupling_eve",
        "coupling_bob",
        "alpha0_var",
        "alpha1_var",
        "alpha_mode",
        "kappa_n_db",
        "kappa_e_db",
        "epsilon",
        "csi_error",
        "sigma_e2",
        "p_max",
        "n_max",
        "pf_target",
        "gain_mode",
        "sidelobe_eta",
        "eta",
        "tau_p",
        "tau_n",
        "tol",
        "t_max",
        "adversary_n_scale",
        "adversary_p_scale",
        "trials",
        "seed",
    ];

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        macro_rules! num {
            () => {
                parse_value(line, key, value)?
            };
        }
        match key {
            "n_t" => self.n_t = num!(),
            "n_r" => self.n_r = num!(),
            "l_t" => self.l_t = num!(),
            "l_r" => self.l_r = num!(),
            "n_total" => self.n_total = num!(),
            "coupling_taps" => self.coupling_taps = num!(),
            "theta0_deg" => self.theta0_deg = num!(),
            "phi0_deg" => self.phi0_deg = num!(),
            "theta1_deg" => self.theta1_deg = num!(),
            "phi1_deg" => self.phi1_deg = num!(),
            "coupling_alice" => self.coupling_alice = num!(),
            "coupling_eve" => self.coupling_eve = num!(),
            "coupling_bob" => self.coupling_bob = num!(),
            "alpha0_var" => self.alpha0_var = num!(),
            "alpha1_var" => self.alpha1_var = num!(),
            "alpha_mode" => {
                self.alpha_mode = match value {
                    "mean" => AlphaMode::Mean,
                    "draw" => AlphaMode::Draw,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: key.into(),
                            value: value.into(),
                        })
                    }
                }
            }
            "kappa_n_db" => self.kappa_n_db = num!(),
            "kappa_e_db" => self.kappa_e_db = num!(),
            "epsilon" => self.epsilon = num!(),
            "csi_error" => self.csi_error = num!(),
            "sigma_e2" => self.sigma_e2 = num!(),
            "p_max" => self.p_max = num!(),
            "n_max" => self.n_max = num!(),
            "pf_target" => self.pf_target = num!(),
            "gain_mode" => {
                self.gain_mode = match value {
                    "ideal" => GainMode::Ideal,
                    "sidelobe" => GainMode::Sidelobe,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: key.into(),
                            value: value.into(),
                        })
                    }
                }
            }
            "sidelobe_eta" => self.sidelobe_eta = num!(),
            "eta" => self.eta = num!(),
            "tau_p" => self.tau_p = num!(),
            "tau_n" => self.tau_n = num!(),
            "tol" => self.tol = num!(),
            "t_max" => self.t_max = num!(),
            "adversary_n_scale" => self.adversary_n_scale = num!(),
            "adversary_p_scale" => self.adversary_p_scale = num!(),
            "trials" => self.trials = num!(),
            "seed" => self.seed = num!(),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Checks every range constraint, naming the first offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let at_least = |key: &'static str, v: usize, min: usize| {
            if v < min {
                Err(range_err(key, format!("must be at least {min}, got {v}")))
            } else {
                Ok(())
            }
        };
        at_least("n_t", self.n_t, 2)?;
        at_least("n_r", self.n_r, 2)?;
        at_least("l_t", self.l_t, 2)?;
        at_least("l_r", self.l_r, 2)?;
        at_least("coupling_taps", self.coupling_taps, 1)?;
        at_least("n_max", self.n_max, 1)?;
        at_least("t_max", self.t_max, 1)?;
        at_least("trials", self.trials, 1)?;
        if self.coupling_taps > self.n_t.min(self.n_r) {
            return Err(range_err("coupling_taps", "exceeds the smaller array size"));
        }
        if self.n_max >= self.n_total {
            return Err(range_err("n_max", format!("must be below n_total = {}", self.n_total)));
        }
        for (key, v) in [
            ("theta0_deg", self.theta0_deg),
            ("phi0_deg", self.phi0_deg),
            ("theta1_deg", self.theta1_deg),
            ("phi1_deg", self.phi1_deg),
        ] {
            if !(-90.0..=90.0).contains(&v) {
                return Err(range_err(key, format!("must lie in [-90, 90] degrees, got {v}")));
            }
        }
        for (key, v) in [
            ("coupling_alice", self.coupling_alice),
            ("coupling_eve", self.coupling_eve),
            ("coupling_bob", self.coupling_bob),
            ("csi_error", self.csi_error),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(range_err(key, format!("must be finite and nonnegative, got {v}")));
            }
        }
        for (key, v) in [
            ("alpha0_var", self.alpha0_var),
            ("alpha1_var", self.alpha1_var),
            ("sigma_e2", self.sigma_e2),
            ("p_max", self.p_max),
            ("eta", self.eta),
            ("tau_p", self.tau_p),
            ("tau_n", self.tau_n),
            ("tol", self.tol),
            ("adversary_n_scale", self.adversary_n_scale),
            ("adversary_p_scale", self.adversary_p_scale),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(range_err(key, format!("must be positive and finite, got {v}")));
            }
        }
        for (key, v) in [("kappa_n_db", self.kappa_n_db), ("kappa_e_db", self.kappa_e_db)] {
            if !v.is_finite() {
                return Err(range_err(key, "must be finite"));
            }
        }
        for (key, v) in [("epsilon", self.epsilon), ("pf_target", self.pf_target)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(range_err(key, format!("must lie in (0, 1), got {v}")));
            }
        }
        if !(self.sidelobe_eta > 1.0 / self.l_t.min(self.l_r) as f64 && self.sidelobe_eta <= 1.0) {
            return Err(range_err("sidelobe_eta", "must lie in (1/min(l_t, l_r), 1]"));
        }
        Ok(())
    }

    /// Noise-normalized gain `kappa_n` as a linear ratio.
    pub fn kappa_n(&self) -> f64 {
        db_to_linear(self.kappa_n_db)
    }

    /// Eve-channel gain `kappa_e` as a linear ratio.
    pub fn kappa_e(&self) -> f64 {
        db_to_linear(self.kappa_e_db)
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = |m: GainMode| if m == GainMode::Ideal { "ideal" } else { "sidelobe" };
        let alpha = if self.alpha_mode == AlphaMode::Mean {
            "mean"
        } else {
            "draw"
        };
        writeln!(
            f,
            "n_t = {}\nn_r = {}\nl_t = {}\nl_r = {}",
            self.n_t, self.n_r, self.l_t, self.l_r
        )?;
        writeln!(f, "n_total = {}\ncoupling_taps = {}", self.n_total, self.coupling_taps)?;
        writeln!(f, "theta0_deg = {}\nphi0_deg = {}", self.theta0_deg, self.phi0_deg)?;
        writeln!(f, "theta1_deg = {}\nphi1_deg = {}", self.theta1_deg, self.phi1_deg)?;
        writeln!(
            f,
            "coupling_alice = {}\ncoupling_eve = {}",
            self.coupling_alice, self.coupling_eve
        )?;
        writeln!(f, "coupling_bob = {}", self.coupling_bob)?;
        writeln!(f, "alpha0_var = {}\nalpha1_var = {}", self.alpha0_var, self.alpha1_var)?;
        writeln!(f, "alpha_mode = {alpha}")?;
        writeln!(f, "kappa_n_db = {}\nkappa_e_db = {}", self.kappa_n_db, self.kappa_e_db)?;
        writeln!(f, "epsilon = {}\ncsi_error = {}", self.epsilon, self.csi_error)?;
        writeln!(
            f,
            "sigma_e2 = {}\np_max = {}\nn_max = {}",
            self.sigma_e2, self.p_max, self.n_max
        )?;
        writeln!(
            f,
            "pf_target = {}\ngain_mode = {}",
            self.pf_target,
            mode(self.gain_mode)
        )?;
        writeln!(f, "sidelobe_eta = {}", self.sidelobe_eta)?;
        writeln!(f, "eta = {}\ntau_p = {}\ntau_n = {}", self.eta, self.tau_p, self.tau_n)?;
        writeln!(f, "tol = {}\nt_max = {}", self.tol, self.t_max)?;
        writeln!(f, "adversary_n_scale = {}", self.adversary_n_scale)?;
        writeln!(f, "adversary_p_scale = {}", self.adversary_p_scale)?;
        write!(f, "trials = {}\nseed = {}", self.trials, self.seed)
    }
}

/// `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Malformed {
                line,
                content: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Malformed {
                line,
                content: content.to_string(),
            });
        }
        if !ScenarioConfig::KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        cfg.set(line, key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), ScenarioConfig::default());
        assert_eq!(parse_config("# only a comment\n\n").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn values_and_comments() {
        let cfg = parse_config("epsilon = 0.3 # covert level\ngain_mode = sidelobe\nn_t=64").unwrap();
        assert_eq!(cfg.epsilon, 0.3);
        assert_eq!(cfg.gain_mode, GainMode::Sidelobe);
        assert_eq!(cfg.n_t, 64);
    }

    #[test]
    fn display_round_trips() {
        let cfg = ScenarioConfig {
            epsilon: 0.25,
            gain_mode: GainMode::Sidelobe,
            ..Default::default()
        };
        assert_eq!(parse_config(&cfg.to_string()).unwrap(), cfg);
    }

    #[test]
    fn errors_name_line_and_key() {
        match parse_config("epsilon = 0.2\nwhat is this") {
            Err(ConfigError::Malformed { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_config("\nfoo = 1") {
            Err(ConfigError::UnknownKey { line: 2, key }) => assert_eq!(key, "foo"),
            other => panic!("{other:?}"),
        }
        let err = parse_config("epsilon = 1.5").unwrap_err();
        assert!(err.to_string().contains("epsilon"));
        assert!(matches!(
            parse_config("n_t = x"),
            Err(ConfigError::BadValue { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("n_t = 8\nn_t = 9"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
    }
}
