use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lglrr::data::{generate_synthetic, load_manifest, load_points, write_matrix, DatasetManifest, ManifestEntry, SynthSpec};
use lglrr::eval::accuracy;
use lglrr::lglrr::{build_btensor, build_neighborhood, SolverConfig};
use lglrr::pipeline::{cluster_points, cluster_precomputed, ClusteringResult};
use lglrr::Error;
use serde_json::json;

use crate::{exit, ClusterArgs, EvalArgs, SolverArgs, SweepArgs, SweepParam, SynthArgs};

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Display) -> Self {
        Self {
            code: exit::USAGE,
            message: message.to_string(),
        }
    }

    fn data(message: impl Display) -> Self {
        Self {
            code: exit::DATA,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CutLocus { .. } | Error::PairAtCutLocus { .. } => exit::CUT_LOCUS,
            _ => exit::DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn finish(result: CmdResult) -> u8 {
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn labels_csv(ids: &[String], labels: &[usize]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::data(e);
    w.write_record(["id", "label"]).map_err(io)?;
    for (id, label) in ids.iter().zip(labels) {
        w.write_record([id.as_str(), &label.to_string()]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn read_labels_csv(path: &Path) -> Result<Vec<usize>, Failure> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == "label")
        .ok_or_else(|| Failure::data(format!("{}: missing \"label\" column", path.display())))?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            let field = rec.get(col).unwrap_or("").trim();
            field.parse::<usize>().map_err(|_| {
                Failure::data(format!("{}: row {}: bad label {field:?}", path.display(), i + 2))
            })
        })
        .collect()
}

pub fn synth(args: &SynthArgs) -> u8 {
    finish(run_synth(args))
}

fn run_synth(args: &SynthArgs) -> CmdResult {
    let spec = SynthSpec {
        clusters: args.r,
        per_cluster: args.per_cluster,
        ambient_dim: args.d,
        subspace_dim: args.p,
        noise_sigma: args.sigma,
        seed: args.seed,
    };
    spec.validate().map_err(Failure::usage)?;
    let (points, labels) = generate_synthetic(&spec)?;

    let point_dir = args.out.join("points");
    create_dir(&point_dir)?;
    let mut manifest = DatasetManifest::default();
    let mut ids = Vec::with_capacity(points.len());
    for (i, (point, &label)) in points.iter().zip(&labels).enumerate() {
        let rel = PathBuf::from("points").join(format!("point_{i:04}.txt"));
        write_matrix(args.out.join(&rel), point.matrix())?;
        let id = format!("s{i:04}");
        manifest.entries.push(ManifestEntry {
            path: rel,
            id: id.clone(),
            label: Some(label),
        });
        ids.push(id);
    }
    write_text(&args.out.join("manifest.tsv"), &manifest.to_text())?;
    write_text(&args.out.join("labels.csv"), &labels_csv(&ids, &labels)?)?;
    eprintln!("wrote {} points to {}", points.len(), args.out.display());
    Ok(exit::OK)
}

struct Dataset {
    manifest: DatasetManifest,
    points: Vec<lglrr::GrassmannPoint>,
    clusters: usize,
}

fn load_dataset(args: &SolverArgs) -> Result<Dataset, Failure> {
    if !args.manifest.is_file() {
        return Err(Failure::usage(format!("manifest {} not found", args.manifest.display())));
    }
    let manifest = load_manifest(&args.manifest)?;
    if manifest.entries.len() < 2 {
        return Err(Failure::data("manifest must list at least two image sets"));
    }
    let clusters = match (args.r, manifest.labels()) {
        (Some(r), _) => r,
        (None, Some(labels)) => labels.iter().max().map_or(1, |m| m + 1),
        (None, None) => return Err(Failure::usage("--r is required when the manifest has no labels")),
    };
    if clusters == 0 || clusters > manifest.entries.len() {
        return Err(Failure::usage(format!(
            "--r must be between 1 and the number of sets ({})",
            manifest.entries.len()
        )));
    }
    let points = load_points(&manifest, args.p, args.normalize)?;
    Ok(Dataset {
        manifest,
        points,
        clusters,
    })
}

fn config_json(config: &SolverConfig, args: &SolverArgs, clusters: usize) -> serde_json::Value {
    json!({
        "manifest": args.manifest.display().to_string(),
        "p": args.p,
        "normalize": args.normalize,
        "lambda": config.lambda,
        "c": config.neighbors,
        "r": clusters,
        "seed": args.seed,
        "rho0": config.rho0,
        "beta0": config.beta0,
        "beta_max": config.beta_max,
        "eps1": config.eps1,
        "eps2": config.eps2,
        "max_iters": config.max_iters,
        "eta_w": config.eta_w_override,
    })
}

pub fn cluster(args: &ClusterArgs) -> u8 {
    finish(run_cluster(args))
}

fn run_cluster(args: &ClusterArgs) -> CmdResult {
    let started = Instant::now();
    let data = load_dataset(&args.solver)?;
    let config = args.solver.solver_config();
    config.validate().map_err(Failure::usage)?;
    let truth = data.manifest.labels();

    let result = cluster_points(&data.points, &config, data.clusters, args.solver.seed, truth.as_deref())
        .map_err(|e| {
            if let Error::PairAtCutLocus { i, j } = e {
                let id = |k: usize| data.manifest.entries[k].id.as_str();
                Failure {
                    code: exit::CUT_LOCUS,
                    message: format!("points {i} ({}) and {j} ({}) are at the cut locus", id(i), id(j)),
                }
            } else {
                e.into()
            }
        })?;
    let elapsed = started.elapsed().as_secs_f64();

    create_dir(&args.out)?;
    let ids: Vec<String> = data.manifest.entries.iter().map(|e| e.id.clone()).collect();
    write_text(&args.out.join("labels.csv"), &labels_csv(&ids, &result.predicted)?)?;
    write_matrix(args.out.join("w.txt"), &result.solution.w)?;
    let mut trace = Vec::new();
    result
        .solution
        .state
        .write_trace_csv(&mut trace)
        .map_err(Failure::data)?;
    write_text(&args.out.join("trace.csv"), &String::from_utf8_lossy(&trace))?;

    let state = &result.solution.state;
    let mut warnings = Vec::new();
    if let Some(requested) = result.solution.graph.clamped_from {
        warnings.push(format!(
            "neighborhood size {requested} clamped to {}",
            result.solution.graph.size()
        ));
    }
    if !state.converged {
        warnings.push(format!("not converged after {} iterations", state.iter));
    }
    let report = json!({
        "accuracy": result.accuracy,
        "iterations": state.iter,
        "converged": state.converged,
        "eta_w": state.eta_w,
        "wall_time_s": elapsed,
        "warnings": warnings,
        "config": config_json(&config, &args.solver, data.clusters),
    });
    write_text(&args.out.join("report.jsonl"), &format!("{report}\n"))?;

    for w in &warnings {
        eprintln!("warning: {w}");
    }
    print_summary(&result);
    Ok(if state.converged { exit::OK } else { exit::NOT_CONVERGED })
}

fn print_summary(result: &ClusteringResult) {
    let state = &result.solution.state;
    let mut line = format!("iterations {} converged {}", state.iter, state.converged);
    if let Some(acc) = result.accuracy {
        line.push_str(&format!(" accuracy {acc:.4}"));
    }
    println!("{line}");
}

pub fn eval(args: &EvalArgs) -> u8 {
    finish(run_eval(args))
}

fn run_eval(args: &EvalArgs) -> CmdResult {
    let predicted = read_labels_csv(&args.predicted)?;
    let truth = read_labels_csv(&args.truth)?;
    let acc = accuracy(&predicted, &truth)?;
    println!("{acc:.4}");
    Ok(exit::OK)
}

pub fn sweep(args: &SweepArgs) -> u8 {
    finish(run_sweep(args))
}

fn run_sweep(args: &SweepArgs) -> CmdResult {
    if args.values.is_empty() {
        return Err(Failure::usage("--values must list at least one value"));
    }
    let data = load_dataset(&args.solver)?;
    let truth = data
        .manifest
        .labels()
        .ok_or_else(|| Failure::usage("sweep needs ground-truth labels in the manifest"))?;
    let base = args.solver.solver_config();
    base.validate().map_err(Failure::usage)?;

    let mut rows = Vec::with_capacity(args.values.len());
    match args.param {
        SweepParam::Lambda => {
            let graph = build_neighborhood(&data.points, base.neighbors)?;
            let b = build_btensor(&data.points, &graph)?;
            for &lambda in &args.values {
                let config = SolverConfig { lambda, ..base.clone() };
                config.validate().map_err(Failure::usage)?;
                let r = cluster_precomputed(&b, &graph, &config, data.clusters, args.solver.seed, Some(&truth))?;
                rows.push((lambda, r));
            }
        }
        SweepParam::C => {
            for &value in &args.values {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Failure::usage(format!("neighborhood size must be a positive integer, got {value}")));
                }
                let config = SolverConfig {
                    neighbors: value as usize,
                    ..base.clone()
                };
                let r = cluster_points(&data.points, &config, data.clusters, args.solver.seed, Some(&truth))?;
                rows.push((value, r));
            }
        }
    }

    let name = match args.param {
        SweepParam::Lambda => "lambda",
        SweepParam::C => "c",
    };
    let mut out = String::from("param,value,accuracy,iterations,converged\n");
    for (value, r) in &rows {
        out.push_str(&format!(
            "{name},{value},{:.6},{},{}\n",
            r.accuracy.unwrap_or(f64::NAN),
            r.solution.state.iter,
            r.solution.state.converged
        ));
    }
    match &args.out {
        Some(path) => write_text(path, &out)?,
        None => std::io::stdout()
            .write_all(out.as_bytes())
            .map_err(Failure::data)?,
    }
    Ok(exit::OK)
}
