use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::CliError;

pub(crate) const SCHEMA_LINE: &str = "# semcarto-schema=1";

/// Headered CSV sink with the schema comment as its first line.
pub(crate) struct CsvOut {
    command: &'static str,
    writer: csv::Writer<Box<dyn Write>>,
}

impl CsvOut {
    pub(crate) fn create(command: &'static str, path: Option<&Path>, header: &[&str]) -> Result<Self, CliError> {
        let fail = |source| CliError::Output { command, source };
        let mut sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(fail)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        writeln!(sink, "{SCHEMA_LINE}").map_err(fail)?;
        let mut out = Self {
            command,
            writer: csv::Writer::from_writer(sink),
        };
        out.row(header)?;
        Ok(out)
    }

    pub(crate) fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let command = self.command;
        self.writer.write_record(fields).map_err(|e| CliError::Output {
            command,
            source: e.into(),
        })
    }

    pub(crate) fn finish(mut self) -> Result<(), CliError> {
        let command = self.command;
        self.writer.flush().map_err(|source| CliError::Output { command, source })
    }
}

pub(crate) fn num(x: f64) -> String {
    format!("{}", if x == 0.0 { 0.0 } else { x })
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub(crate) fn note(command: &str, msg: impl AsRef<str>) {
    eprintln!("note: {command}: {}", msg.as_ref());
}
