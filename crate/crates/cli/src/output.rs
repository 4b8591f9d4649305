//! Output sinks and the reproducibility header.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{Failure, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Clone, Debug, Default)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// csv | json; the default depends on the command.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// SHA-256 of the argument vector after the program name.
pub fn args_hash(args: &[String]) -> String {
    let mut h = Sha256::new();
    for a in args {
        h.update(a.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

pub fn csv_header(hash: &str) -> String {
    format!("# giant-bic {} args-sha256={hash}", env!("CARGO_PKG_VERSION"))
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    generator: String,
    args_sha256: &'a str,
    data: &'a T,
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, hash: &str, data: &T) -> Result<()> {
    let env = Envelope { generator: format!("giant-bic {}", env!("CARGO_PKG_VERSION")), args_sha256: hash, data };
    serde_json::to_writer_pretty(&mut *out, &env)?;
    writeln!(out)?;
    Ok(())
}
