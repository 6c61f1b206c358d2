//! Provenance-stamped output files.
//!
//! Every CSV starts with `#`-prefixed header lines carrying the tool
//! version, the SHA-256 of the config text, and the effective seed. The
//! generation timestamp is also a `#` line, so identical config and seed
//! reproduce the data rows byte for byte.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use plexciton::Result;
use sha2::{Digest, Sha256};

/// Header fields shared by every file of one run.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_text: &str, seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_text.as_bytes());
        let digest = hasher.finalize();
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self {
            config_sha256,
            seed,
        }
    }
}

/// Opens `dir/name` buffered, with the provenance header already written.
pub fn create(dir: &Path, name: &str, prov: &Provenance) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    writeln!(w, "# plexciton {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# config sha256: {}", prov.config_sha256)?;
    writeln!(w, "# seed: {}", prov.seed)?;
    writeln!(w, "# generated unix: {unix}")?;
    Ok(w)
}

/// Fixed-width scientific float formatting shared by all data rows.
pub fn fmt(v: f64) -> String {
    format!("{v:.9e}")
}
