use std::collections::BTreeMap;
use std::path::PathBuf;

use covertauth::config::ScenarioConfig;
use covertauth::harness::TrialReport;
use serde::Serialize;

/// Summary of one invocation, printed as JSON on success.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub seed: u64,
    pub trials: usize,
    pub output_dir: Option<String>,
    pub files: Vec<EmittedFile>,
    pub gates: Vec<Gate>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, config_path: &Option<PathBuf>, cfg: &ScenarioConfig) -> Self {
        Self {
            command: command.to_string(),
            config_path: config_path.as_ref().map(|p| p.display().to_string()),
            seed: cfg.seed,
            trials: cfg.trials,
            output_dir: None,
            files: Vec::new(),
            gates: Vec::new(),
            duration_secs: 0.0,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EmittedFile {
    pub experiment: String,
    pub path: String,
    pub rows: usize,
    pub summary: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
pub struct Gate {
    pub metric: String,
    pub theoretical: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub trials: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl From<TrialReport> for Gate {
    fn from(r: TrialReport) -> Self {
        Self {
            metric: r.metric,
            theoretical: r.theoretical,
            empirical: r.empirical,
            std_error: r.std_error,
            trials: r.trials,
            tolerance: r.tolerance,
            passed: r.passed,
        }
    }
}
