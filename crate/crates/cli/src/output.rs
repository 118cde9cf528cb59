use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::commands::Output;
use crate::config::{Format, Operation};
use crate::error::CliError;

/// Default output directory when no path is given.
pub const OUTPUT_DIR_VAR: &str = "SUBLASER_OUTPUT_DIR";

pub fn env_dir() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_VAR).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, content).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// Writes `out` to `target`, else into `dir` under a default name, else to
/// stdout. `simulate` CSV output is a set of files and needs a directory.
pub fn emit(op: Operation, format: Format, target: Option<PathBuf>, dir: Option<PathBuf>, out: &Output) -> Result<(), CliError> {
    if op == Operation::Simulate && format == Format::Csv {
        let dir = target.or(dir).ok_or_else(|| {
            CliError::new(
                "missing_output",
                format!("`simulate` writes one file per component; give --output DIR or set {OUTPUT_DIR_VAR}"),
            )
        })?;
        for (name, content) in &out.files {
            write(&dir.join(name), content)?;
        }
        return Ok(());
    }
    let (content, ext) = match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&out.record).expect("finite values serialize");
            (text + "\n", "json")
        }
        Format::Csv => {
            let csv = out
                .csv
                .clone()
                .ok_or_else(|| CliError::new("unsupported_format", format!("`{op}` has no CSV form")))?;
            (csv, "csv")
        }
    };
    match target.or_else(|| dir.map(|d| d.join(format!("{op}.{ext}")))) {
        Some(path) => write(&path, &content),
        None => std::io::stdout()
            .lock()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::io(format!("cannot write to stdout: {e}"))),
    }
}
