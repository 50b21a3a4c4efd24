//! Monte Carlo experiment runner: empirical size/power tables over a grid of
//! signal strengths, with declarative configuration and CSV persistence.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxtest::{run_test, BasisChoice, TestConfig};
use crate::numeric::canonical_sum;
use crate::rng::{derive_seed, tag};
use crate::simgen::{generate_dataset, DatasetSpec, Family, SlopeSpec, SlopeVariant};
use crate::tauselect::TauPolicy;

fn default_q() -> usize {
    5
}

fn default_r_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

fn default_replications() -> usize {
    1000
}

fn default_bootstrap() -> usize {
    1000
}

fn default_significance() -> f64 {
    0.05
}

fn default_grid_points() -> usize {
    101
}

/// Declarative description of one size/power study.
///
/// The defaults reproduce the reference studies (R = 1000 replications,
/// B = 1000 bootstrap replicates, ϱ = 0.05, r ∈ {0, 0.1, …, 1}, grid-selected
/// τ, component counts equal to the sample size capped at the rank). CI-scale
/// runs typically lower `replications` to 300 and `bootstrap` to 500.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub family: Family,
    pub variant: SlopeVariant,
    pub n: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(default)]
    pub tau: TauPolicy,
    #[serde(default)]
    pub p1: Option<usize>,
    #[serde(default)]
    pub p2: Option<usize>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Record wall-clock seconds per row. Off by default so that identical
    /// configurations produce byte-identical outputs.
    #[serde(default)]
    pub record_timing: bool,
}

impl StudyConfig {
    pub fn new(family: Family, variant: SlopeVariant, n: usize) -> Self {
        Self {
            family,
            variant,
            n,
            q: default_q(),
            r_grid: default_r_grid(),
            replications: default_replications(),
            bootstrap: default_bootstrap(),
            significance: default_significance(),
            tau: TauPolicy::default(),
            p1: None,
            p2: None,
            grid_points: default_grid_points(),
            master_seed: 0,
            record_timing: false,
        }
    }

    /// All constraint violations, or an empty list when the config is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n < 3 {
            out.push(format!("n must be at least 3, got {}", self.n));
        }
        if self.q == 0 {
            out.push("q must be at least 1".into());
        }
        if self.replications == 0 {
            out.push("replications must be at least 1".into());
        }
        if self.bootstrap < 100 {
            out.push(format!("bootstrap must be at least 100, got {}", self.bootstrap));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            out.push(format!(
                "significance must lie in (0, 1), got {}",
                self.significance
            ));
        }
        if self.r_grid.is_empty() {
            out.push("r_grid must be non-empty".into());
        }
        if self.r_grid.iter().any(|r| *r < 0.0 || !r.is_finite()) {
            out.push("r_grid values must be non-negative and finite".into());
        }
        if self.grid_points < 2 {
            out.push(format!("grid_points must be at least 2, got {}", self.grid_points));
        }
        if self.p1 == Some(0) {
            out.push("p1 must be at least 1 when given".into());
        }
        if self.p2 == Some(0) {
            out.push("p2 must be at least 1 when given".into());
        }
        if let Err(e) = self.tau.validate() {
            out.push(e.to_string());
        }
        out
    }

    fn dataset_spec(&self, r: f64) -> Result<DatasetSpec> {
        let mut slope = SlopeSpec::new(self.family, self.variant, r);
        slope.q = self.q;
        let mut spec = DatasetSpec::standard(slope, self.master_seed)?;
        spec.grid = crate::hilbert::Grid::default_unit(self.grid_points)?;
        Ok(spec)
    }

    fn test_config(&self, seed: u64) -> TestConfig {
        TestConfig {
            p1: self.p1,
            p2: self.p2,
            tau: self.tau.clone(),
            bootstrap: self.bootstrap,
            significance: self.significance,
            seed,
            basis: BasisChoice::Empirical,
        }
    }
}

/// One row of a size/power table.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub r: f64,
    pub rejections: usize,
    pub replications: usize,
    pub rate: f64,
    pub mean_tau: f64,
    pub seconds: f64,
}

/// Empirical rejection rates over the signal grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

/// Run the study: for every r in the grid, `replications` independent
/// generate-then-test replicates are tallied. Replicate seeds derive from
/// `(master_seed, r index, replicate index)`, so results are independent of
/// the worker count.
pub fn run_study(config: &StudyConfig) -> Result<PowerTable> {
    let violations = config.violations();
    if !violations.is_empty() {
        return Err(Error::Domain(violations.join("; ")));
    }
    let mut rows = Vec::with_capacity(config.r_grid.len());
    for (ri, &r) in config.r_grid.iter().enumerate() {
        let started = Instant::now();
        let spec = config.dataset_spec(r)?;
        let outcomes: Vec<(bool, f64)> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let replicate = || -> Result<(bool, f64)> {
                    let data_seed = derive_seed(
                        config.master_seed,
                        &[tag::STUDY_REPLICATE, ri as u64, rep as u64, 0],
                    );
                    let test_seed = derive_seed(
                        config.master_seed,
                        &[tag::STUDY_REPLICATE, ri as u64, rep as u64, 1],
                    );
                    let (x, y) = generate_dataset(&spec, config.n, data_seed)?;
                    let result = run_test(&x, &y, &config.test_config(test_seed))?;
                    Ok((result.reject, result.tau))
                };
                replicate().map_err(|e| Error::Replicate {
                    r,
                    index: rep,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let rejections = outcomes.iter().filter(|(reject, _)| *reject).count();
        let mut taus: Vec<f64> = outcomes.iter().map(|&(_, tau)| tau).collect();
        let mean_tau = canonical_sum(&mut taus) / config.replications as f64;
        rows.push(PowerRow {
            r,
            rejections,
            replications: config.replications,
            rate: rejections as f64 / config.replications as f64,
            mean_tau,
            seconds: if config.record_timing {
                started.elapsed().as_secs_f64()
            } else {
                0.0
            },
        });
    }
    Ok(PowerTable { rows })
}

const CSV_HEADER: &str = "r,rejections,reps,rate,mean_tau,seconds";

/// Write the table as CSV. Float fields use the shortest round-trip
/// representation, so reading the file back reproduces the table exactly.
pub fn write_results(table: &PowerTable, path: &str) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.r, row.rejections, row.replications, row.rate, row.mean_tau, row.seconds
        );
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}

/// Read a table previously written by [`write_results`].
pub fn read_results(path: &str) -> Result<PowerTable> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == CSV_HEADER => {}
        Some((_, other)) => {
            return Err(Error::Parse {
                path: path.to_string(),
                line: 1,
                message: format!("expected header `{CSV_HEADER}`, found `{other}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                path: path.to_string(),
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                path: path.to_string(),
                line: idx + 1,
                message: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let parse_f = |s: &str, name: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                path: path.to_string(),
                line: idx + 1,
                message: format!("invalid {name} value `{s}`"),
            })
        };
        let parse_u = |s: &str, name: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Parse {
                path: path.to_string(),
                line: idx + 1,
                message: format!("invalid {name} value `{s}`"),
            })
        };
        rows.push(PowerRow {
            r: parse_f(fields[0], "r")?,
            rejections: parse_u(fields[1], "rejections")?,
            replications: parse_u(fields[2], "reps")?,
            rate: parse_f(fields[3], "rate")?,
            mean_tau: parse_f(fields[4], "mean_tau")?,
            seconds: parse_f(fields[5], "seconds")?,
        });
    }
    Ok(PowerTable { rows })
}
