//! Declarative TOML config. Keys mirror the long flag names (with `_` for
//! `-`); any flag given on the command line wins over the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub m: Option<u32>,
    pub r: Option<u32>,
    pub channel: Option<String>,
    pub z: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub iters: Option<usize>,
    pub workers: Option<usize>,
    pub random_messages: Option<bool>,
    pub max_frame_errors: Option<u64>,
    pub with_bound: Option<bool>,
    pub tie_break: Option<String>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub message: Option<String>,
    pub combine: Option<u32>,
    pub quantize: Option<usize>,
    pub exact: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}
