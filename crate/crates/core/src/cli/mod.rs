//! The `sip-dyn` command line: one JSON config in, CSV tables and a
//! `summary.json` out.
//!
//! Exit codes: 0 on success, 1 for invalid input (nothing is written),
//! 2 when a numerical method fails.

pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use crate::codim1::{sweep, transversality_report};
use crate::codim2::{solve_zh_on_boundary, trace_curve};
use crate::equilibria::{all_equilibria, classify};
use crate::error::{Error, Result};
use crate::integrate::{asymptotic_state, simulate, SimOptions};
use crate::model::State;
use crate::scan::{critical_aggregation, region_grid, threshold_function, Region};

pub use config::{Command, CommandName, RunConfig};

pub const THREADS_ENV: &str = "SIP_DYN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliCommand {
    Simulate,
    Equilibria,
    Sweep,
    Curve,
    Scan,
    Threshold,
    Percapita,
}

impl From<CliCommand> for CommandName {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Simulate => CommandName::Simulate,
            CliCommand::Equilibria => CommandName::Equilibria,
            CliCommand::Sweep => CommandName::Sweep,
            CliCommand::Curve => CommandName::Curve,
            CliCommand::Scan => CommandName::Scan,
            CliCommand::Threshold => CommandName::Threshold,
            CliCommand::Percapita => CommandName::Percapita,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sip-dyn",
    version,
    about = "Susceptible/infected prey and predator dynamics"
)]
pub struct Cli {
    /// What to compute; must match the `command` field of the config.
    #[arg(value_enum)]
    pub command: CliCommand,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads for sweeps and grids (default: SIP_DYN_THREADS, then
    /// all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub summary: Value,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let p = &cfg.params;
    let mut files: Vec<(String, String)> = Vec::new();
    let result = match &cfg.command {
        Command::Simulate(o) => {
            let traj = simulate(p, &o.initial_state(), &o.sim_options())?;
            let eqs = all_equilibria(p);
            let outcome = asymptotic_state(&traj, &eqs, o.outcome_tol);
            files.push(("trajectory.csv".into(), output::trajectory_csv(&traj)));
            json!({
                "outcome": outcome,
                "termination": traj.termination,
                "events": traj.events,
                "final_time": traj.final_time(),
                "final_state": traj.final_state(),
                "samples": traj.samples.len(),
            })
        }
        Command::Equilibria(_) => {
            let eqs = all_equilibria(p);
            let mut rows = Vec::new();
            let mut reports = Vec::new();
            for e in &eqs {
                let rep = if e.feasible {
                    classify(e, p).ok()
                } else {
                    None
                };
                rows.push((*e, rep.as_ref().map(|r| r.verdict)));
                reports.push(json!({ "equilibrium": e, "stability": rep }));
            }
            files.push(("equilibria.csv".into(), output::equilibria_csv(&rows)));
            json!({ "equilibria": reports })
        }
        Command::Sweep(o) => {
            let res = sweep(p, o.param, (o.range[0], o.range[1]), o.n)?;
            files.push(("branches.csv".into(), output::branches_csv(&res.branches)));
            let events: Vec<Value> = res
                .events
                .iter()
                .map(|ev| {
                    let mut v = json!(ev);
                    if o.transversality {
                        let at = p.with_unchecked(o.param, ev.value);
                        v["transversality"] = match transversality_report(ev, &at) {
                            Ok(r) => json!(r),
                            Err(e) => json!({ "error": e.to_string() }),
                        };
                    }
                    v
                })
                .collect();
            let branches: Vec<Value> = res
                .branches
                .iter()
                .map(|b| {
                    json!({
                        "id": b.id,
                        "kind": b.kind,
                        "samples": b.samples.len(),
                        "from": b.samples.first().map(|s| s.param),
                        "to": b.samples.last().map(|s| s.param),
                    })
                })
                .collect();
            json!({ "events": events, "branches": branches })
        }
        Command::Curve(o) => {
            let curve = trace_curve(p, o.kind, o.p1, o.p2, (o.start[0], o.start[1]), o.steps)?;
            files.push(("curve.csv".into(), output::curve_csv(&curve)));
            let zh = match o.zh_seed {
                Some(s) => Some(solve_zh_on_boundary(p, o.p1, o.p2, (s[0], s[1]))?),
                None => None,
            };
            json!({
                "points": curve.points.len(),
                "codim2": curve.codim2,
                "stops": curve.stops,
                "zero_hopf_on_boundary": zh,
            })
        }
        Command::Scan(o) => {
            let grid = region_grid(
                p,
                (o.l_range[0], o.l_range[1]),
                (o.r_range[0], o.r_range[1]),
                o.nl,
                o.nr,
                &State::from_array(o.ic),
                &SimOptions::with_t_end(o.t_end),
            )?;
            files.push(("regions.csv".into(), output::regions_csv(&grid)));
            let counts: serde_json::Map<String, Value> = Region::ALL
                .iter()
                .map(|&r| (r.as_str().to_string(), json!(grid.count(r))))
                .collect();
            json!({ "cells": grid.labels.len(), "counts": counts })
        }
        Command::Threshold(o) => {
            let crit = critical_aggregation(p, o.tol);
            let lo = crit.map_or(1e-6, |c| c.r_feasible);
            let hi = 1.0 - 1e-6;
            let rows: Vec<(f64, f64)> = (0..o.n)
                .map(|k| {
                    let r = lo + (hi - lo) * k as f64 / (o.n - 1) as f64;
                    (r, threshold_function(p, r))
                })
                .collect();
            files.push(("threshold.csv".into(), output::threshold_csv(&rows)));
            json!({ "critical_aggregation": crit })
        }
        Command::Percapita(o) => {
            let [lo, hi] = o.s_range.unwrap_or([p.k / o.n as f64, p.k]);
            files.push((
                "percapita.csv".into(),
                output::emit_percapita(p, &o.i_values, (lo, hi), o.n),
            ));
            json!({ "i_values": o.i_values, "s_range": [lo, hi], "n": o.n })
        }
    };
    if !cfg.formats.csv {
        files.clear();
    }
    let summary = json!({
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "command": cfg.command.name().as_str(),
        "parameters": cfg.params,
        "config": cfg.to_raw(),
        "files": files.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
        "result": result,
    });
    Ok(RunOutput { files, summary })
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

pub fn write_output(out: &RunOutput, dir: &Path, json: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    for (name, text) in &out.files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    }
    if json {
        let path = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    }
    Ok(())
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    let n =
        match flag {
            Some(n) => Some(n),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidOptions(format!("{THREADS_ENV}={v} is not a count"))
                })?),
                Err(_) => None,
            },
        };
    if n == Some(0) {
        return Err(Error::InvalidOptions(
            "thread count must be positive".into(),
        ));
    }
    Ok(n)
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let text = fs::read_to_string(&cli.config).map_err(|e| io_error(&cli.config, e))?;
    let cfg = RunConfig::from_json(&text)?;
    let wanted = CommandName::from(cli.command);
    if cfg.command.name() != wanted {
        return Err(Error::Config(format!(
            "command `{}` does not match config command `{}`",
            wanted.as_str(),
            cfg.command.name().as_str()
        )));
    }
    Ok(cfg)
}

/// Parse, validate, compute, write. Returns the process exit code.
pub fn main_with(cli: &Cli) -> i32 {
    let prepared = thread_count(cli.threads).and_then(|n| load(cli).map(|cfg| (n, cfg)));
    let (threads, cfg) = match prepared {
        Ok(v) => v,
        Err(e) => {
            eprintln!("sip-dyn: {e}");
            return 1;
        }
    };
    let computed = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cfg)),
            Err(e) => Err(Error::InvalidOptions(format!("thread pool: {e}"))),
        },
        None => run(&cfg),
    };
    let result = computed.and_then(|out| write_output(&out, &cli.out, cfg.formats.json));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sip-dyn: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
