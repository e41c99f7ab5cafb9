//! File formats: point and trace CSVs, scenario JSON, SVG plots.

mod output;
mod points;
mod svg;
mod trace;

pub use output::{write_sim_outputs, PLOT_FILE, SUMMARY_FILE, TICKETS_FILE, TRACE_FILE};
pub use points::{read_points, read_threshold_points, write_points, write_threshold_points, ThresholdPoint};
pub use svg::{svg_plot, Series};
pub use trace::{read_trace, trace_rows, write_trace, TraceRow, TRACE_HEADER};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("unexpected header {got:?}, expected {expected:?}")]
    Header { expected: String, got: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IoError {
    fn parse(line: u64, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }

    fn from_csv(err: csv::Error) -> Self {
        let line = err.position().map_or(0, |p| p.line());
        match err.into_kind() {
            csv::ErrorKind::Io(e) => IoError::Io(e),
            kind => IoError::parse(line, format!("{kind:?}")),
        }
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Result<usize, IoError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or(IoError::MissingColumn(name))
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str) -> Result<T, IoError>
where
    T::Err: std::fmt::Display,
{
    let line = record.position().map_or(0, |p| p.line());
    let raw = record
        .get(idx)
        .ok_or_else(|| IoError::parse(line, format!("missing {name}")))?;
    raw.parse()
        .map_err(|e| IoError::parse(line, format!("bad {name} {raw:?}: {e}")))
}
