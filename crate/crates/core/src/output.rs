//! Results bundle: learning-curve CSV, sweep CSV and a JSON run manifest.
//!
//! Floats are written in Rust's shortest round-trip decimal form, columns in
//! a fixed order, lines end with LF.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ConfigFile;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, ExperimentSummary, StreamSeeds, SweepRow};

pub const LEARNING_CURVE_FILE: &str = "learning_curve.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn csv_writer<W: Write>(writer: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer)
}

/// `slot,policy,mean_avg_cost,std_avg_cost` for each summary in order.
pub fn write_learning_curve<W: Write>(
    summaries: &[&ExperimentSummary],
    writer: W,
) -> csv::Result<()> {
    let mut out = csv_writer(writer);
    out.write_record(["slot", "policy", "mean_avg_cost", "std_avg_cost"])?;
    for summary in summaries {
        for (slot, stat) in &summary.mean_curve {
            out.write_record([
                slot.to_string(),
                summary.policy.to_string(),
                stat.mean.to_string(),
                stat.std.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `beta,policy,mean_avg_cost,std,normalized_avg_cost`.
pub fn write_sweep<W: Write>(rows: &[SweepRow], writer: W) -> csv::Result<()> {
    let mut out = csv_writer(writer);
    out.write_record([
        "beta",
        "policy",
        "mean_avg_cost",
        "std",
        "normalized_avg_cost",
    ])?;
    for row in rows {
        out.write_record([
            row.beta.to_string(),
            row.policy.to_string(),
            row.mean_avg_cost.to_string(),
            row.std.to_string(),
            row.normalized_avg_cost.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// Fully resolved configuration; feeding it back as `--config` reproduces
    /// every CSV in the bundle.
    pub config: ConfigFile,
    pub tolerances: Vec<f64>,
    pub seeds: Vec<StreamSeeds>,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: ConfigFile::from(cfg),
            tolerances: cfg.sensors.iter().map(|s| s.config.tolerance).collect(),
            seeds: (0..u64::from(cfg.episodes))
                .flat_map(|e| cfg.episode_seeds(e))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Creates `dir` and a file inside it, filled by `fill`.
pub fn write_file(
    dir: &Path,
    name: &str,
    fill: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(name);
    let mut buf = Vec::new();
    fill(&mut buf).map_err(|e| io_error(&path, e.into()))?;
    fs::write(&path, buf).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    write_file(dir, name, |buf| {
        buf.extend_from_slice(text.as_bytes());
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Stat;
    use crate::policies::PolicyKind;

    #[test]
    fn learning_curve_layout() {
        let summary = ExperimentSummary {
            policy: PolicyKind::Threshold,
            beta: 0.6,
            episodes: Vec::new(),
            final_cost: Stat {
                mean: 1.0,
                std: 0.0,
            },
            mean_curve: vec![
                (
                    10,
                    Stat {
                        mean: 0.5,
                        std: 0.1,
                    },
                ),
                (
                    20,
                    Stat {
                        mean: 1.0 / 3.0,
                        std: 0.0,
                    },
                ),
            ],
            q_tables: Vec::new(),
        };
        let mut buf = Vec::new();
        write_learning_curve(&[&summary], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "slot,policy,mean_avg_cost,std_avg_cost\n10,threshold,0.5,0.1\n20,threshold,0.3333333333333333,0\n"
        );
    }

    #[test]
    fn sweep_layout() {
        let rows = [SweepRow {
            beta: 0.2,
            policy: PolicyKind::Random,
            mean_avg_cost: 2.5,
            std: 0.25,
            normalized_avg_cost: 1.0,
        }];
        let mut buf = Vec::new();
        write_sweep(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "beta,policy,mean_avg_cost,std,normalized_avg_cost\n0.2,random,2.5,0.25,1\n"
        );
    }

    #[test]
    fn shortest_round_trip_formatting() {
        for x in [0.1 + 0.2, 1e-300, 123456.789, 2.0f64.sqrt()] {
            assert_eq!(x.to_string().parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
