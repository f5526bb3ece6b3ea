use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Record of one run: effective parameters, outputs and outcome.
///
/// No timestamps or host data, so identical runs give identical manifests.
#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub parameters: Value,
    pub out_dir: String,
    pub outputs: Vec<String>,
    pub results: Value,
    pub exit_code: u8,
    pub error: Option<String>,
}

impl Manifest {
    pub fn new<T: Serialize>(args: &T, dir: &Path) -> Manifest {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            parameters: serde_json::to_value(args).unwrap_or(Value::Null),
            out_dir: dir.display().to_string(),
            outputs: Vec::new(),
            results: Value::Null,
            exit_code: 0,
            error: None,
        }
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(dir.join("manifest.json"), text + "\n")
    }
}
