use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use cqa_core::graphs::{generate_random_regular, greedy_ordering, identity_ordering, resource_report, Graph};
use cqa_core::harness::{
    derive_seed, random_cnf, scaling_experiment, screen_instances, verify_suite, write_outcome,
    InstanceDescriptor, Params, Payload, Problem, ScalingConfig,
};
use cqa_core::spectrum::gap_curve;
use cqa_core::Method;

mod settings;

use settings::{Common, MethodChoice, OrderingChoice, Settings};

#[derive(Parser, Debug)]
#[command(name = "cqa", version, about = "Minimum-gap studies for constrained quantum annealing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write instance files (screened for graph partitioning).
    Generate(Common),
    /// Gap curve of one instance as CSV.
    Gap(Common),
    /// Penalty versus constrained minimum-gap campaign.
    Scaling(Common),
    /// Extra couplers each method needs for a graph.
    Resources(Common),
    /// Run the invariant suite.
    Verify(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(c) => c.resolve().and_then(|s| generate(&s)),
        Command::Gap(c) => c.resolve().and_then(|s| gap(&s)),
        Command::Scaling(c) => c.resolve().and_then(|s| scaling(&s)),
        Command::Resources(c) => c.resolve().and_then(|s| resources(&s)),
        Command::Verify(c) => c.resolve().and_then(|s| verify(&s)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn single_method(s: &Settings) -> Method {
    match s.method {
        MethodChoice::Penalty => Method::Penalty,
        _ => Method::Cqa,
    }
}

fn instances(s: &Settings) -> Result<Vec<InstanceDescriptor>> {
    let method = single_method(s);
    let mut out = Vec::new();
    for &n in &s.sizes {
        match s.problem {
            Problem::Gp => {
                let screening = screen_instances(n, s.degree, s.per_size, s.seed, s.ordering == OrderingChoice::Greedy)?;
                if screening.kept.len() < s.per_size {
                    bail!(
                        "screening kept {} of {} graphs on {n} vertices after {} attempts",
                        screening.kept.len(),
                        s.per_size,
                        screening.attempts
                    );
                }
                out.extend(screening.kept.into_iter().map(|d| d.with_method(method)));
            }
            Problem::Gc => {
                for i in 0..s.per_size {
                    let seed = derive_seed(s.seed, &[n as u64, s.degree as u64, i as u64]);
                    let g = generate_random_regular(n, s.degree, seed)?;
                    let params = Params { method, colors: Some(s.colors), alpha: None, ordering: None, seed };
                    out.push(InstanceDescriptor::new(Problem::Gc, Payload::Graph(g), params)?);
                }
            }
            Problem::Sat => {
                for i in 0..s.per_size {
                    let seed = derive_seed(s.seed, &[n as u64, i as u64]);
                    let params = Params { method, colors: None, alpha: None, ordering: None, seed };
                    out.push(InstanceDescriptor::new(Problem::Sat, Payload::Cnf(random_cnf(n, 4 * n, seed)?), params)?);
                }
            }
        }
    }
    Ok(out)
}

fn generate(s: &Settings) -> Result<ExitCode> {
    let dir = s.out.clone().unwrap_or_else(|| PathBuf::from("instances"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for desc in instances(s)? {
        let path = dir.join(format!("{}-n{}-{}.json", desc.problem, desc.n, desc.id));
        std::fs::write(&path, desc.to_json()).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn load_instance(s: &Settings) -> Result<InstanceDescriptor> {
    match &s.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(InstanceDescriptor::from_json(&text)?)
        }
        None => {
            let first = Settings { per_size: 1, sizes: s.sizes[..1].to_vec(), ..s.clone() };
            Ok(instances(&first)?.remove(0))
        }
    }
}

fn with_suffix(path: &Path, method: Method) -> PathBuf {
    let stem = path.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|x| x.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{method}.{ext}"))
}

fn gap(s: &Settings) -> Result<ExitCode> {
    let desc = load_instance(s)?;
    let methods = s.method.methods();
    for &m in &methods {
        let enc = desc.with_method(m).encoding()?;
        let mut curve = gap_curve(&enc.problem, &enc.driver, &enc.basis, &s.grid)?;
        curve.method = Some(m);
        let csv = curve.to_csv();
        match &s.out {
            Some(out) => {
                let path = if methods.len() > 1 { with_suffix(out, m) } else { out.clone() };
                std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
                let p = curve.min_point().expect("grid is non-empty");
                println!("{} {m}: grid minimum gap {:.6e} at s = {} -> {}", desc.id, p.gap, p.s, path.display());
            }
            None => print!("# instance={} method={m} basis={}\n{csv}", desc.id, curve.basis),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn scaling(s: &Settings) -> Result<ExitCode> {
    if s.problem != Problem::Gp {
        bail!("the scaling campaign runs graph partitioning instances only");
    }
    let config = ScalingConfig {
        sizes: s.sizes.clone(),
        per_size: s.per_size,
        degree: s.degree,
        seed: s.seed,
        grid: s.grid.clone(),
        s_tol: s.s_tol,
        threads: s.threads,
        record_timing: s.record_timing,
        greedy_ordering: s.ordering == OrderingChoice::Greedy,
    };
    let outcome = scaling_experiment(&config)?;
    let out = s.out.clone().unwrap_or_else(|| PathBuf::from("scaling.csv"));
    let side = write_outcome(&outcome, &out)?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    eprintln!("wrote {} and {}", out.display(), side.display());
    Ok(if outcome.summary.complete { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn resources(s: &Settings) -> Result<ExitCode> {
    let g = match &s.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            // accept a bare graph file or an instance file
            match Graph::from_json(&text) {
                Ok(g) => g,
                Err(_) => InstanceDescriptor::from_json(&text)?
                    .graph()
                    .cloned()
                    .context("instance has no graph payload")?,
            }
        }
        None => generate_random_regular(s.sizes[0], s.degree, s.seed)?,
    };
    let order = match s.ordering {
        OrderingChoice::Identity => identity_ordering(g.n()),
        OrderingChoice::Greedy => greedy_ordering(&g),
    };
    let reports = s
        .method
        .methods()
        .into_iter()
        .map(|m| resource_report(&g, m, &order))
        .collect::<Result<Vec<_>, _>>()?;
    let json = serde_json::to_string_pretty(&reports)?;
    match &s.out {
        Some(out) => std::fs::write(out, json).with_context(|| format!("writing {}", out.display()))?,
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(s: &Settings) -> Result<ExitCode> {
    let report = verify_suite();
    print!("{report}");
    if let Some(out) = &s.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
