//! Optional JSON config. Keys mirror the long flag names; any flag given on
//! the command line wins over the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub instance: Option<PathBuf>,
    pub family: Option<String>,
    pub n: Option<usize>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub cap: Option<usize>,
    pub initial: Option<String>,
    pub sector: Option<String>,
    pub levels: Option<usize>,
    pub grid: Option<usize>,
    pub coarse: Option<usize>,
    pub tol: Option<f64>,
    pub estimate: Option<bool>,
    pub safety: Option<f64>,
    #[serde(rename = "T")]
    pub total_time: Option<f64>,
    pub dt: Option<f64>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub n_range: Option<String>,
    pub epsilon: Option<f64>,
    pub execute: Option<bool>,
    pub slices: Option<usize>,
    pub substeps: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source,
        })
    }
}
