use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Destination of a subcommand's main output.
#[derive(Debug, Clone)]
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<&Path>) -> Self {
        Sink { path: path.map(Path::to_path_buf) }
    }

    pub fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
            None => Box::new(io::stdout().lock()),
        })
    }

    pub fn json<T: Serialize>(&self, value: &T) -> anyhow::Result<()> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        Ok(())
    }

    /// Writes a header and rows through the `csv` crate.
    pub fn csv<R: Serialize>(&self, header: &[&str], rows: impl IntoIterator<Item = R>) -> anyhow::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(self.writer()?);
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
