use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::{svg_plot, trace_rows, write_trace, IoError, Series};
use crate::agents::write_jsonl;
use crate::sim::SimTrace;

pub const TRACE_FILE: &str = "trace.csv";
pub const TICKETS_FILE: &str = "tickets.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "tnbp.svg";

/// Writes trace, tickets and summary (and the plot if asked) into `dir`.
/// Returns the paths written, in that order.
pub fn write_sim_outputs(dir: &Path, trace: &SimTrace, plot: bool) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join(TRACE_FILE);
    write_trace(BufWriter::new(File::create(&path)?), &trace_rows(trace))?;
    written.push(path);

    let path = dir.join(TICKETS_FILE);
    write_jsonl(BufWriter::new(File::create(&path)?), &trace.tickets)?;
    written.push(path);

    let path = dir.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(&trace.summary()).expect("summary serializes");
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);

    if plot {
        let path = dir.join(PLOT_FILE);
        let mut series = vec![Series {
            name: "broadcast MB per tick",
            points: trace.broadcast_mb().collect(),
        }];
        if let Some(mb) = trace.summary().threshold_mb {
            series.push(Series {
                name: "threshold",
                points: trace.ticks.iter().map(|r| (r.t, mb)).collect(),
            });
        }
        let title = format!("{}: broadcast volume", trace.scenario.name);
        fs::write(&path, svg_plot(&title, "t (ms)", "MB", &series))?;
        written.push(path);
    }
    Ok(written)
}
