use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

/// Settings read from a `--config` file. Keys mirror the long flag names with
/// dashes replaced by underscores; a flag given on the command line wins.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub json: Option<bool>,

    pub n: Option<usize>,
    pub p: Option<f64>,
    pub trials: Option<u64>,
    pub trial: Option<u64>,
    pub timing: Option<bool>,

    pub rowcol_only: Option<bool>,
    pub thresholds: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub rel_tol: Option<f64>,

    pub m: Option<usize>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub partition_samples: Option<usize>,
    pub quad_step_factor: Option<f64>,
    pub t_max: Option<f64>,

    pub r: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub c_tau: Option<f64>,
    pub c0: Option<f64>,
    pub big_c0: Option<f64>,
    pub no_normals: Option<bool>,

    pub sizes: Option<Vec<usize>>,
    pub probs: Option<Vec<f64>>,
    pub log_multiples: Option<Vec<f64>>,
    pub c: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Flag value if present, else the config value.
pub fn pick<T: Clone>(flag: Option<T>, file: &Option<T>) -> Option<T> {
    flag.or_else(|| file.clone())
}

/// Like [`pick`] for list flags, where an empty list means "not given".
pub fn pick_list<T: Clone>(flag: Vec<T>, file: &Option<Vec<T>>) -> Option<Vec<T>> {
    if flag.is_empty() {
        file.clone()
    } else {
        Some(flag)
    }
}
