//! Screened ensembles, per-instance minimum gaps and the scaling campaign.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::classical::classical_spectrum;
use super::instance::InstanceDescriptor;
use crate::basis::magnetization_sector;
use crate::error::{Error, Result};
use crate::graphs::{generate_random_regular, greedy_ordering, Graph, Method};
use crate::hamiltonian::build_gp_problem;
use crate::spectrum::{fmt_f64, uniform_grid, AnnealingPath, DEFAULT_GRID_POINTS, DEFAULT_S_TOL};

pub const SCREENING_BUDGET: usize = 100;

/// Independent 64-bit seed for a tagged sub-task of a master seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for t in tags {
        h.update(t.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 8 bytes"))
}

/// Zero-sector GP ground level is a single flip pair.
pub fn is_unique_ground(g: &Graph) -> Result<bool> {
    let sector = magnetization_sector(g.n(), 0)?;
    Ok(classical_spectrum(&build_gp_problem(g), &sector)?.unique_ground)
}

#[derive(Clone, Debug)]
pub struct Screening {
    pub kept: Vec<InstanceDescriptor>,
    pub attempts: usize,
}

/// Draws graphs until `count` distinct unique-ground instances are found or
/// the attempt budget runs out; never fails on yield.
pub fn screen_instances(n: usize, d: usize, count: usize, seed: u64, ordering: bool) -> Result<Screening> {
    if n % 2 != 0 || d >= n || (n * d) % 2 != 0 {
        return Err(Error::Parameter(format!("cannot screen {d}-regular graphs on {n} vertices")));
    }
    let mut kept = Vec::with_capacity(count);
    let mut seen = HashSet::new();
    let mut attempts = 0;
    while kept.len() < count && attempts < SCREENING_BUDGET * count {
        let graph_seed = derive_seed(seed, &[n as u64, d as u64, attempts as u64]);
        attempts += 1;
        let g = generate_random_regular(n, d, graph_seed)?;
        if !seen.insert(g.clone()) || !is_unique_ground(&g)? {
            continue;
        }
        let order = ordering.then(|| greedy_ordering(&g));
        let mut desc = InstanceDescriptor::gp(g, Method::Cqa, graph_seed)?;
        if order.is_some() {
            desc.params.ordering = order;
            desc = InstanceDescriptor::new(desc.problem, desc.payload, desc.params)?;
        }
        kept.push(desc);
    }
    Ok(Screening { kept, attempts })
}

pub fn generate_screened_ensemble(n: usize, d: usize, count: usize, seed: u64) -> Result<Vec<InstanceDescriptor>> {
    let s = screen_instances(n, d, count, seed, false)?;
    if s.kept.len() < count {
        return Err(Error::ScreeningYield {
            n,
            d,
            requested: count,
            kept: s.kept.len(),
            attempts: s.attempts,
        });
    }
    Ok(s.kept)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub n: usize,
    pub instance_id: String,
    pub seed: u64,
    pub method: Method,
    pub gap_min: f64,
    pub s_min: f64,
    /// Exact ground energy of the problem Hamiltonian on the relevant basis.
    pub e0_final: f64,
    pub wall_time_s: Option<f64>,
    pub basis_dim: usize,
    pub at_boundary: bool,
}

impl ScalingRecord {
    pub const CSV_HEADER: &'static str = "n,instance_id,seed,method,gap_min,s_min,e0_final,wall_time_s";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.instance_id,
            self.seed,
            self.method,
            fmt_f64(self.gap_min),
            fmt_f64(self.s_min),
            fmt_f64(self.e0_final),
            self.wall_time_s.map(|t| format!("{t:.6}")).unwrap_or_default()
        )
    }
}

pub fn records_to_csv(records: &[ScalingRecord]) -> String {
    let mut out = String::from(ScalingRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Minimum relevant gap of one instance with the descriptor's method.
pub fn run_instance(desc: &InstanceDescriptor, grid: &[f64], s_tol: f64) -> Result<ScalingRecord> {
    let start = Instant::now();
    let attach = |e: Error| Error::Instance {
        id: desc.id.clone(),
        source: Box::new(e),
    };
    let enc = desc.encoding().map_err(attach)?;
    let path = AnnealingPath::new(&enc.problem, &enc.driver, &enc.basis).map_err(attach)?;
    let result = path.min_gap(grid, s_tol).map_err(attach)?;
    let e0_final = path.point(1.0).map_err(attach)?.e0;
    Ok(ScalingRecord {
        n: desc.n,
        instance_id: desc.id.clone(),
        seed: desc.params.seed,
        method: desc.params.method,
        gap_min: result.gap_min,
        s_min: result.s_min,
        e0_final,
        wall_time_s: Some(start.elapsed().as_secs_f64()),
        basis_dim: path.dim(),
        at_boundary: result.at_boundary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub per_size: usize,
    pub degree: usize,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub s_tol: f64,
    pub threads: Option<usize>,
    pub record_timing: bool,
    pub greedy_ordering: bool,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            sizes: vec![8, 10, 12, 14],
            per_size: 25,
            degree: 5,
            seed: 0,
            grid: uniform_grid(DEFAULT_GRID_POINTS),
            s_tol: DEFAULT_S_TOL,
            threads: None,
            record_timing: false,
            greedy_ordering: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub requested: usize,
    pub kept: usize,
    pub attempts: usize,
    pub median_gap_penalty: Option<f64>,
    pub median_gap_cqa: Option<f64>,
    pub median_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub degree: usize,
    pub seed: u64,
    pub sizes: Vec<SizeSummary>,
    /// Median over all instances of the CQA / penalty minimum-gap ratio.
    pub median_ratio: Option<f64>,
    /// Least-squares slope of ln(median gap) against n.
    pub slope_penalty: Option<f64>,
    pub slope_cqa: Option<f64>,
    pub complete: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ScalingOutcome {
    pub records: Vec<ScalingRecord>,
    pub summary: ScalingSummary,
}

impl ScalingOutcome {
    pub fn csv(&self) -> String {
        records_to_csv(&self.records)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

fn summarize(
    config: &ScalingConfig,
    screenings: &[(usize, Screening)],
    records: &[ScalingRecord],
    failures: Vec<String>,
) -> ScalingSummary {
    let mut sizes = Vec::new();
    let mut ratios_all = Vec::new();
    for (n, s) in screenings {
        let gaps = |m: Method| -> Vec<f64> {
            records
                .iter()
                .filter(|r| r.n == *n && r.method == m)
                .map(|r| r.gap_min)
                .collect()
        };
        let ratios: Vec<f64> = s
            .kept
            .iter()
            .filter_map(|d| {
                let find = |m| records.iter().find(|r| r.instance_id == d.id && r.method == m);
                Some(find(Method::Cqa)?.gap_min / find(Method::Penalty)?.gap_min)
            })
            .collect();
        ratios_all.extend_from_slice(&ratios);
        sizes.push(SizeSummary {
            n: *n,
            requested: config.per_size,
            kept: s.kept.len(),
            attempts: s.attempts,
            median_gap_penalty: median(&gaps(Method::Penalty)),
            median_gap_cqa: median(&gaps(Method::Cqa)),
            median_ratio: median(&ratios),
        });
    }
    let slope = |pick: fn(&SizeSummary) -> Option<f64>| {
        let pts: Vec<(f64, f64)> = sizes
            .iter()
            .filter_map(|s| pick(s).filter(|g| *g > 0.0).map(|g| (s.n as f64, g.ln())))
            .collect();
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        fit_slope(&x, &y)
    };
    ScalingSummary {
        degree: config.degree,
        seed: config.seed,
        slope_penalty: slope(|s| s.median_gap_penalty),
        slope_cqa: slope(|s| s.median_gap_cqa),
        median_ratio: median(&ratios_all),
        complete: failures.is_empty(),
        failures,
        sizes,
    }
}

fn run_campaign(config: &ScalingConfig) -> Result<ScalingOutcome> {
    if config.sizes.is_empty() || config.per_size == 0 {
        return Err(Error::Parameter("scaling needs at least one size and one instance".into()));
    }
    let mut failures = Vec::new();
    let screenings: Vec<(usize, Screening)> = config
        .sizes
        .par_iter()
        .map(|&n| {
            screen_instances(n, config.degree, config.per_size, config.seed, config.greedy_ordering).map(|s| (n, s))
        })
        .collect::<Result<_>>()?;
    for (n, s) in &screenings {
        if s.kept.len() < config.per_size {
            failures.push(
                Error::ScreeningYield {
                    n: *n,
                    d: config.degree,
                    requested: config.per_size,
                    kept: s.kept.len(),
                    attempts: s.attempts,
                }
                .to_string(),
            );
        }
    }
    let jobs: Vec<InstanceDescriptor> = screenings
        .iter()
        .flat_map(|(_, s)| s.kept.iter())
        .flat_map(|d| [d.with_method(Method::Penalty), d.with_method(Method::Cqa)])
        .collect();
    let results: Vec<Result<ScalingRecord>> = jobs
        .par_iter()
        .map(|d| run_instance(d, &config.grid, config.s_tol))
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(mut rec) => {
                if !config.record_timing {
                    rec.wall_time_s = None;
                }
                records.push(rec);
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let summary = summarize(config, &screenings, &records, failures);
    Ok(ScalingOutcome { records, summary })
}

/// Screens `per_size` instances per size and runs both methods on each.
/// Rows are ordered by size, instance and method regardless of threads.
pub fn scaling_experiment(config: &ScalingConfig) -> Result<ScalingOutcome> {
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?
            .install(|| run_campaign(config)),
        None => run_campaign(config),
    }
}

pub fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".summary.json");
    out.with_file_name(name)
}

/// Writes the CSV to `out` and the summary next to it.
pub fn write_outcome(outcome: &ScalingOutcome, out: &Path) -> Result<PathBuf> {
    std::fs::write(out, outcome.csv())?;
    let side = summary_path(out);
    std::fs::write(&side, serde_json::to_string_pretty(&outcome.summary)?)?;
    Ok(side)
}
