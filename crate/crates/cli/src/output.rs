use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::commands::Artifacts;
use crate::config::{Command, RunConfig};
use crate::error::CliError;

pub const VERSION: &str = env!("POLARITY_LAB_VERSION");

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes to a sibling temp file, syncs it, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp: PathBuf = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

/// Writes every artifact, then `summary.json` with SHA-256 digests.
pub fn emit_outputs(
    dir: &Path,
    command: Command,
    cfg: &RunConfig,
    artifacts: &Artifacts,
    wall: Duration,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    let mut digests = Map::new();
    for (name, bytes) in &artifacts.files {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        digests.insert(name.clone(), Value::String(hex(&Sha256::digest(bytes))));
        written.push(path);
    }
    let summary = json!({
        "command": command,
        "version": VERSION,
        "seed": cfg.seed,
        "wall_time_s": wall.as_secs_f64(),
        "config": cfg,
        "result": artifacts.result,
        "digests": digests,
    });
    let mut text = serde_json::to_vec_pretty(&summary).map_err(|e| CliError::io("summary.json", e.into()))?;
    text.push(b'\n');
    let path = dir.join("summary.json");
    write_atomic(&path, &text)?;
    written.push(path);
    Ok(written)
}
