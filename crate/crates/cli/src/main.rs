//! `stormctl`: growth model, fitting, offline detection and simulation.
//!
//! Exit codes: 0 success, 1 `detect` found a storm, 2 usage, parse or
//! validation error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;
use stormctl_core::agents::{offline, write_jsonl, AgentConfig};
use stormctl_core::datasets::{bundled_scenario, Dataset, BUNDLED_SCENARIOS};
use stormctl_core::io::{read_points, read_trace, svg_plot, write_points, write_sim_outputs, Series, TRACE_HEADER};
use stormctl_core::model::{fit_model, PtrModelParams, TracePoint, DEFAULT_STEP_MS};
use stormctl_core::sim::{run_with, RunOptions, Scenario};
use stormctl_core::NodeId;

#[derive(Parser)]
#[command(
    name = "stormctl",
    version,
    about = "Broadcast storm modelling, detection and simulation"
)]
struct Cli {
    /// Directory for output files. Without it results go to stdout only.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write an SVG plot (needs --out).
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the growth curve P(t) = a·t + b·t·e^(m·t).
    Model {
        #[arg(long)]
        ps: f64,
        #[arg(long)]
        pe: f64,
        #[arg(long, allow_negative_numbers = true)]
        m: f64,
        #[arg(long, default_value_t = 0.0)]
        t_start: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = DEFAULT_STEP_MS)]
        step: f64,
        /// Skip clamping at Pe. Fitted Pe is a shape parameter and can sit below the data.
        #[arg(long)]
        unclamped: bool,
    },
    /// Fit (Ps, Pe, m) to the rise of a trace.
    Fit {
        /// Bundled dataset (table1, table3, table4, table5) or a CSV path.
        #[arg(long)]
        data: String,
    },
    /// Replay a trace through one agent calibrated on a reference.
    Detect {
        #[arg(long)]
        data: String,
        #[arg(long, default_value = "table4")]
        reference: String,
        /// Agent configuration as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a scenario: a bundled name or a JSON file.
    Sim {
        scenario: String,
        /// Disable the storm-control agents.
        #[arg(long)]
        no_agents: bool,
        /// Operator reconnect NODE@T_MS; repeatable.
        #[arg(long, value_parser = parse_reconnect)]
        reconnect: Vec<(NodeId, f64)>,
    },
}

fn parse_reconnect(s: &str) -> Result<(NodeId, f64), String> {
    let (node, t) = s.split_once('@').ok_or("expected NODE@T_MS")?;
    let node = node.parse().map_err(|e| format!("node: {e}"))?;
    let t: f64 = t.parse().map_err(|e| format!("time: {e}"))?;
    Ok((node, t))
}

/// Bundled dataset name or CSV path. Simulator trace files contribute their
/// channel rows.
fn load_points(spec: &str) -> Result<Vec<TracePoint>> {
    if let Ok(d) = spec.parse::<Dataset>() {
        return Ok(d.points());
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let points = if text.lines().next() == Some(TRACE_HEADER) {
        read_trace(&text)
            .with_context(|| spec.to_string())?
            .into_iter()
            .filter(|r| r.node.is_none())
            .map(|r| TracePoint::new(r.t_ms, r.bcast_pkts as f64))
            .collect()
    } else {
        read_points(&text).with_context(|| spec.to_string())?
    };
    Ok(points)
}

fn load_scenario(spec: &str) -> Result<Scenario> {
    if let Some(s) = bundled_scenario(spec) {
        return Ok(s);
    }
    let text = fs::read_to_string(spec).with_context(|| {
        let names: Vec<&str> = BUNDLED_SCENARIOS.iter().map(|(n, _)| *n).collect();
        format!("{spec} is neither a file nor a bundled scenario ({})", names.join(", "))
    })?;
    Ok(Scenario::from_json(&text)?)
}

fn out_file(out: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out.join(name))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let out = cli.out.as_deref();
    if cli.plot && out.is_none() {
        bail!("--plot needs --out");
    }
    match cli.command {
        Command::Model {
            ps,
            pe,
            m,
            t_start,
            t_end,
            step,
            unclamped,
        } => {
            let params = PtrModelParams::new(ps, pe, m)?;
            let curve = params.build_array(t_start, t_end, step)?;
            let mut points: Vec<TracePoint> = curve.points().collect();
            if unclamped {
                for p in &mut points {
                    p.count = params.eval(p.t)?;
                }
            }
            match out {
                Some(dir) => {
                    let path = out_file(dir, "ptr.csv")?;
                    write_points(fs::File::create(&path)?, &points)?;
                    log::info!("wrote {}", path.display());
                    if cli.plot {
                        let series = [Series {
                            name: "P(t)",
                            points: points.iter().map(|p| (p.t, p.count)).collect(),
                        }];
                        fs::write(
                            out_file(dir, "ptr.svg")?,
                            svg_plot("growth model", "t (ms)", "PTR", &series),
                        )?;
                    }
                }
                None => write_points(std::io::stdout().lock(), &points)?,
            }
        }
        Command::Fit { data } => {
            let points = load_points(&data)?;
            let fit = fit_model(&points)?;
            let p = fit.params;
            let record = json!({
                "p_start": p.p_start(),
                "p_end": p.p_end(),
                "m": p.m(),
                "a": p.a(),
                "b": p.b(),
                "rmse": fit.rmse,
            });
            print_json(&record)?;
            if let Some(dir) = out {
                fs::write(
                    out_file(dir, "fit.json")?,
                    format!("{}\n", serde_json::to_string_pretty(&record)?),
                )?;
                if cli.plot {
                    let t_end = points.last().map_or(0.0, |q| q.t);
                    let curve = p.build_array(0.0, t_end, t_end.max(1e-3) / 200.0)?;
                    let series = [
                        Series {
                            name: "data",
                            points: points.iter().map(|q| (q.t, q.count)).collect(),
                        },
                        Series {
                            name: "fit",
                            points: curve.points().map(|q| (q.t, q.count)).collect(),
                        },
                    ];
                    fs::write(
                        out_file(dir, "fit.svg")?,
                        svg_plot("growth fit", "t (ms)", "PTR", &series),
                    )?;
                }
            }
        }
        Command::Detect {
            data,
            reference,
            config,
        } => {
            let trace = load_points(&data)?;
            let reference = load_points(&reference)?;
            let config = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<AgentConfig>(&text).with_context(|| path.display().to_string())?
                }
                None => AgentConfig::default(),
            };
            let report = offline::detect(&trace, &reference, &config)?;
            let first = report
                .first_trigger()
                .map(|c| json!({ "t_ms": c.t, "index": c.j, "deviation": c.deviation, "trigger": c.trigger }));
            print_json(&json!({
                "storm_found": report.storm_found(),
                "step_ms": report.step,
                "samples": report.comparisons.len(),
                "first_trigger": first,
                "tickets": report.tickets,
            }))?;
            if let Some(dir) = out {
                write_jsonl(fs::File::create(out_file(dir, "tickets.jsonl")?)?, &report.tickets)?;
            }
            if report.storm_found() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sim {
            scenario,
            no_agents,
            reconnect,
        } => {
            let mut s = load_scenario(&scenario)?;
            if let Some(seed) = cli.seed {
                s.seed = seed;
            }
            let options = RunOptions {
                agents: !no_agents,
                reconnects: reconnect,
            };
            let trace = run_with(&s, options)?;
            if let Some(dir) = out {
                for path in write_sim_outputs(dir, &trace, cli.plot)? {
                    log::info!("wrote {}", path.display());
                }
            }
            print_json(&serde_json::to_value(trace.summary())?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STORMCTL_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("stormctl: {e:#}");
            ExitCode::from(2)
        }
    }
}
