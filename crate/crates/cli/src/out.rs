//! Output-directory plumbing: provenance comments, config hashes, CSV files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// FNV-1a 64-bit; stable fingerprint of a resolved configuration.
pub fn config_hash(canonical: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// `# tm-rbe v<version> cmd=<cmd> seed=<seed> config=<hash>`
pub fn provenance(cmd: &str, seed: u64, canonical_config: &str) -> String {
    format!(
        "# tm-rbe v{} cmd={cmd} seed={seed} config={}",
        env!("CARGO_PKG_VERSION"),
        config_hash(canonical_config)
    )
}

pub struct OutDir {
    path: PathBuf,
}

impl OutDir {
    pub fn create(path: PathBuf) -> CliResult<Self> {
        fs::create_dir_all(&path)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))?;
        Ok(Self { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Writes a CSV: provenance comment, then whatever `emit` produces
    /// (header plus rows).
    pub fn write_csv(
        &self,
        name: &str,
        provenance_line: &str,
        emit: impl FnOnce(&mut Vec<u8>) -> tm_rbe::Result<()>,
    ) -> CliResult<PathBuf> {
        let mut buf = Vec::new();
        writeln!(buf, "{provenance_line}").expect("vec write");
        emit(&mut buf).map_err(CliError::from)?;
        let path = self.file(name);
        fs::write(&path, buf)?;
        Ok(path)
    }

    /// Appends one CSV row, creating the file with provenance and header
    /// first if needed.
    pub fn append_csv_row(
        &self,
        name: &str,
        provenance_line: &str,
        header: &str,
        row: &str,
    ) -> CliResult<PathBuf> {
        let path = self.file(name);
        let mut body = if path.exists() {
            fs::read_to_string(&path)?
        } else {
            format!("{provenance_line}\n{header}\n")
        };
        body.push_str(row);
        body.push('\n');
        fs::write(&path, body)?;
        Ok(path)
    }
}
