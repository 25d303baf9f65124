//! Report serialization and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// One output file, held in memory until the run has finished.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a RunConfig,
    result: &'a T,
}

pub fn json_report<T: Serialize>(name: &str, command: &str, config: &RunConfig, result: &T) -> Result<Artifact, CliError> {
    let env = Envelope { schema_version: SCHEMA_VERSION, command, config, result };
    let mut bytes = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    Ok(Artifact { name: name.into(), bytes })
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn csv_table(name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<Artifact, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(Artifact { name: name.into(), bytes })
}

/// Writes every artifact through a temporary file in `dir` followed by a
/// rename, so readers never see a partial file.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    let io = |what: &str, e: std::io::Error| CliError::Output(format!("{what} {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(|e| io("cannot create", e))?;
    for a in artifacts {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io("cannot write into", e))?;
        tmp.write_all(&a.bytes).map_err(|e| io("cannot write into", e))?;
        tmp.as_file().sync_all().map_err(|e| io("cannot sync in", e))?;
        tmp.persist(dir.join(&a.name)).map_err(|e| io("cannot rename in", e.error))?;
    }
    Ok(())
}
