//! Flags shared by every subcommand, merged over an optional TOML file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use cqa_core::harness::Problem;
use cqa_core::spectrum::{uniform_grid, DEFAULT_GRID_POINTS, DEFAULT_S_TOL};
use cqa_core::Method;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Penalty,
    Cqa,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Penalty => vec![Method::Penalty],
            MethodChoice::Cqa => vec![Method::Cqa],
            MethodChoice::Both => vec![Method::Penalty, Method::Cqa],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingChoice {
    Identity,
    Greedy,
}

/// Either a point count for a uniform grid or explicit comma-separated values.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(usize),
    Values(Vec<f64>),
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.contains(',') {
            s.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad grid value {v:?}: {e}")))
                .collect::<Result<_, _>>()
                .map(GridSpec::Values)
        } else {
            s.trim()
                .parse()
                .map(GridSpec::Points)
                .map_err(|e| format!("bad grid size {s:?}: {e}"))
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Points(p) if *p >= 2 => Ok(uniform_grid(*p)),
            GridSpec::Points(p) => bail!("grid needs at least 2 points, got {p}"),
            GridSpec::Values(v) => Ok(v.clone()),
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// Master RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (or directory for `generate`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_problem)]
    pub problem: Option<Problem>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub per_size: Option<usize>,
    /// Graph degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Number of uniform grid points, or comma-separated s values.
    #[arg(long)]
    pub s_grid: Option<GridSpec>,
    /// Width of the final min-gap bracket.
    #[arg(long)]
    pub s_tol: Option<f64>,
    /// Flat TOML file with the same keys (snake_case); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ring ordering for the XY driver.
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingChoice>,
    /// Colours for graph colouring instances.
    #[arg(long)]
    pub colors: Option<usize>,
    /// Instance or graph file to read.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fill the wall_time_s column (makes the CSV run-dependent).
    #[arg(long)]
    pub record_timing: bool,
}

fn parse_problem(s: &str) -> Result<Problem, String> {
    s.parse().map_err(|e: cqa_core::Error| e.to_string())
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    problem: Option<Problem>,
    method: Option<MethodChoice>,
    sizes: Option<Vec<usize>>,
    per_size: Option<usize>,
    degree: Option<usize>,
    s_grid: Option<GridSpec>,
    s_tol: Option<f64>,
    ordering: Option<OrderingChoice>,
    colors: Option<usize>,
    input: Option<PathBuf>,
    threads: Option<usize>,
    record_timing: Option<bool>,
}

/// Fully resolved settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub problem: Problem,
    pub method: MethodChoice,
    pub sizes: Vec<usize>,
    pub per_size: usize,
    pub degree: usize,
    pub grid: Vec<f64>,
    pub s_tol: f64,
    pub ordering: OrderingChoice,
    pub colors: usize,
    pub input: Option<PathBuf>,
    pub threads: Option<usize>,
    pub record_timing: bool,
}

fn read_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl Common {
    pub fn resolve(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => read_config(p)?,
            None => FileConfig::default(),
        };
        let defaults = cqa_core::harness::ScalingConfig::default();
        let grid = self
            .s_grid
            .clone()
            .or(file.s_grid)
            .unwrap_or(GridSpec::Points(DEFAULT_GRID_POINTS))
            .values()?;
        Ok(Settings {
            seed: self.seed.or(file.seed).unwrap_or(defaults.seed),
            out: self.out.clone().or(file.out),
            problem: self.problem.or(file.problem).unwrap_or(Problem::Gp),
            method: self.method.or(file.method).unwrap_or(MethodChoice::Both),
            sizes: self.sizes.clone().or(file.sizes).unwrap_or(defaults.sizes),
            per_size: self.per_size.or(file.per_size).unwrap_or(defaults.per_size),
            degree: self.degree.or(file.degree).unwrap_or(defaults.degree),
            grid,
            s_tol: self.s_tol.or(file.s_tol).unwrap_or(DEFAULT_S_TOL),
            ordering: self.ordering.or(file.ordering).unwrap_or(OrderingChoice::Identity),
            colors: self.colors.or(file.colors).unwrap_or(3),
            input: self.input.clone().or(file.input),
            threads: self.threads.or(file.threads),
            record_timing: self.record_timing || file.record_timing.unwrap_or(false),
        })
    }
}
