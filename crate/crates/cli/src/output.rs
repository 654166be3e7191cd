//! Artifact files. Every file is written to a temporary sibling and renamed
//! into place, so a reader never sees a half-written artifact.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::field("output_dir", format!("cannot create {}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    /// Writes `name` inside the output directory.
    pub fn write<F>(&self, name: &str, fill: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> CliResult<()>,
    {
        let path = self.dir.join(name);
        write_atomic(&path, fill)?;
        Ok(path)
    }

    pub fn write_str(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }
}

pub fn write_atomic<F>(path: &Path, fill: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    // temp files default to 0600; artifacts are ordinary files
    #[cfg(unix)]
    builder.permissions(std::os::unix::fs::PermissionsExt::from_mode(0o644));
    let tmp = builder.tempfile_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}
