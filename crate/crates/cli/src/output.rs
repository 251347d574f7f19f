use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use crate::config::Experiment;

/// `#`-prefixed provenance lines: tool version, command, seed, config hash,
/// input-file hashes and the full resolved config.
pub fn provenance(command: &str, experiment: &Experiment) -> Result<String> {
    let config = &experiment.config;
    let mut out = String::new();
    out.push_str(&format!("# tetris {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# command {command}\n"));
    out.push_str(&format!("# seed {}\n", config.seed));
    out.push_str(&format!("# config_sha256 {}\n", config.sha256()?));
    for (field, hash) in &experiment.input_hashes {
        out.push_str(&format!("# input_sha256 {field} {hash}\n"));
    }
    out.push_str("# config:\n");
    for line in config.canonical()?.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str(&format!("#   {line}\n"));
        }
    }
    Ok(out)
}

/// Writes to a temporary file next to `path` and renames it into place, so
/// an interrupted run never leaves a partial file. `None` writes to stdout.
pub fn write_atomic(path: Option<&Path>, contents: &str) -> Result<()> {
    let Some(path) = path else {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(contents.as_bytes())?;
        return lock.flush().map_err(Into::into);
    };
    // Devices and pipes cannot be replaced by a rename; symlinks are
    // followed so the link itself survives.
    let resolved;
    let path = match fs::metadata(path) {
        Ok(meta) if !meta.is_file() => {
            let mut file = fs::OpenOptions::new().write(true).open(path)?;
            file.write_all(contents.as_bytes())?;
            return file.flush().map_err(Into::into);
        }
        Ok(_) => {
            resolved = fs::canonicalize(path)?;
            resolved.as_path()
        }
        Err(_) => path,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
