use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use weakpde::experiments::ExperimentConfig;

use crate::error::{io_at, CliError, CliResult};

/// Writes `path` through a temporary file in the same directory, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_at(path))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush().map_err(io_at(path))?;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(io_at(path))?;
    }
    tmp.as_file().sync_all().map_err(io_at(path))?;
    tmp.persist(path).map_err(|e| io_at(path)(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub step: String,
    pub seconds: f64,
}

/// Everything needed to replay a command: pass the manifest back with
/// `--config` and repeat the listed arguments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Command-specific arguments that are not part of the config.
    pub arguments: serde_json::Value,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub artifacts: Vec<PathBuf>,
    pub started_unix: u64,
    pub timings: Vec<Timing>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig, arguments: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            arguments,
            config: config.clone(),
            master_seed: config.master_seed,
            artifacts: Vec::new(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            timings: Vec::new(),
        }
    }

    pub fn time<T>(&mut self, step: &str, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        self.timings.push(Timing {
            step: step.into(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        out
    }

    /// Writes the manifest next to `output` as `<output>.manifest.json`.
    pub fn write_for(mut self, output: &Path) -> CliResult<PathBuf> {
        self.artifacts.push(output.to_path_buf());
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        write_atomic(&path, |w| {
            serde_json::to_writer_pretty(&mut *w, &self)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            writeln!(w).map_err(io_at(&path))
        })?;
        Ok(path)
    }
}
