use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, ValueEnum};
use peeling::chains::{Algorithm, RunOptions, Trace, TraceRows};
use peeling::kernel::{grow_probability, kernel_row_with_cutoff, PeelEvent};
use peeling::limits::{mean_variance, quantile_sorted};
use peeling::runner::{Job, Length};
use peeling::ModelId;
use serde::Serialize;
use serde_json::{json, Value};

use crate::BUDGET;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    Csv,
    Json,
}

#[derive(Args)]
#[command(group(ArgGroup::new("length").required(true).args(["steps", "rmax"])))]
pub struct SimulateArgs {
    #[arg(long, default_value = "type2")]
    model: ModelId,
    #[arg(long = "algo", long_help = format!("One of: {}", crate::algorithms()))]
    algorithm: Algorithm,
    /// Peeling steps per replica (draws for boltzmann and sphere).
    #[arg(long)]
    steps: Option<u64>,
    /// Layers to complete (layers and map-layers).
    #[arg(long)]
    rmax: Option<u32>,
    #[arg(long, default_value_t = 1)]
    replicas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, env = "PEELING_OUT_DIR", default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = TraceFormat::Csv)]
    format: TraceFormat,
    /// Before running, rebuild the exact kernel rows up to this boundary size and
    /// check them against the sampler (0 skips the check).
    #[arg(long, default_value_t = 0)]
    exact_cutoff: u32,
    /// Largest number of inner vertices one hole may receive; a larger draw truncates the replica.
    #[arg(long)]
    max_hole_volume: Option<u64>,
    /// Keep every stride-th row of step traces.
    #[arg(long, default_value_t = 1)]
    stride: u64,
    /// Disk perimeter for boltzmann draws.
    #[arg(long)]
    perimeter: Option<u32>,
    /// Skip hole volumes (V stays at the count of revealed vertices).
    #[arg(long)]
    no_volume: bool,
}

/// Exact rows through `cutoff` must sum to one and agree with the sampler's growth probability.
fn preflight(model: ModelId, cutoff: u32) -> peeling::Result<u32> {
    let mut checked = 0;
    for p in model.min_boundary()..=cutoff {
        let row = kernel_row_with_cutoff(model, p, cutoff)?;
        let exact = row
            .exact_prob_of(PeelEvent::C)
            .map(|q| q.to_f64())
            .unwrap_or(0.0);
        if (exact - grow_probability(model, p)).abs() > 1e-12 {
            return Err(peeling::Error::Integrity(format!(
                "{model}: sampler growth probability differs from the exact row at p = {p}"
            )));
        }
        checked += 1;
    }
    Ok(checked)
}

fn stem(args: &SimulateArgs) -> String {
    format!("{}-{}-s{}", args.algorithm, args.model, args.seed)
}

fn write_rows<W: std::io::Write>(w: &mut csv::Writer<W>, rows: &TraceRows) -> csv::Result<()> {
    fn all<W: std::io::Write, T: Serialize>(w: &mut csv::Writer<W>, rows: &[T]) -> csv::Result<()> {
        rows.iter().try_for_each(|r| w.serialize(r))
    }
    match rows {
        TraceRows::Pv(r) => all(w, r),
        TraceRows::Layers(r) => all(w, r),
        TraceRows::Fpp(r) => all(w, r),
        TraceRows::Hull(r) => all(w, r),
        TraceRows::Sizes(r) => all(w, r),
        TraceRows::Spheres(r) => all(w, r),
    }
}

fn write_trace(dir: &Path, stem: &str, format: TraceFormat, trace: &Trace) -> Result<Vec<String>> {
    let name = format!("{stem}-r{:04}", trace.replica);
    let mut files = Vec::new();
    match format {
        TraceFormat::Csv => {
            let file = format!("{name}.csv");
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record(trace.rows.header())?;
            write_rows(&mut w, &trace.rows)?;
            let mut bytes = w.into_inner().context("flushing csv")?;
            if let Some(reason) = &trace.truncated {
                bytes.extend_from_slice(format!("# truncated: true ({reason})\n").as_bytes());
            }
            fs::write(dir.join(&file), bytes).with_context(|| format!("writing {file}"))?;
            files.push(file);
        }
        TraceFormat::Json => {
            let file = format!("{name}.json");
            let doc = json!({
                "schema": 1,
                "model": trace.model,
                "algorithm": trace.algorithm,
                "seed": trace.seed,
                "replica": trace.replica,
                "truncated": trace.truncated.is_some(),
                "truncation": trace.truncated,
                "columns": trace.rows.header(),
                "rows": trace.rows,
            });
            fs::write(dir.join(&file), serde_json::to_string_pretty(&doc)? + "\n")
                .with_context(|| format!("writing {file}"))?;
            files.push(file);
        }
    }
    if let Some(edges) = &trace.edge_list {
        let file = format!("{name}.edges");
        fs::write(dir.join(&file), edges).with_context(|| format!("writing {file}"))?;
        files.push(file);
    }
    Ok(files)
}

/// Rows entering the summary: the last row of step traces, every row of draw tables.
fn summary_rows(rows: &TraceRows) -> Result<Vec<Value>> {
    let all = serde_json::to_value(rows)?;
    let Value::Array(items) = all else {
        return Ok(vec![]);
    };
    Ok(match rows {
        TraceRows::Sizes(_) | TraceRows::Spheres(_) => items,
        _ => items.into_iter().last().into_iter().collect(),
    })
}

fn describe(mut xs: Vec<f64>) -> Value {
    if xs.is_empty() {
        return Value::Null;
    }
    let (mean, var) = mean_variance(&xs);
    xs.sort_by(f64::total_cmp);
    let quantiles: BTreeMap<String, f64> = [0.05, 0.25, 0.5, 0.75, 0.95]
        .iter()
        .map(|&q| (format!("{q}"), quantile_sorted(&xs, q)))
        .collect();
    json!({
        "count": xs.len(),
        "mean": mean,
        "sd": var.sqrt(),
        "min": xs[0],
        "max": xs[xs.len() - 1],
        "quantiles": quantiles,
    })
}

/// Per-replica scaling ratios read off the final row.
fn ratios(algorithm: Algorithm, traces: &[Trace]) -> BTreeMap<String, Value> {
    let mut named: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for t in traces {
        match &t.rows {
            TraceRows::Layers(rows) => {
                if let Some(last) = rows.last().filter(|r| r.n > 0) {
                    let key = if algorithm == Algorithm::Dual {
                        "A*_n/n"
                    } else {
                        "A_n/n"
                    };
                    named
                        .entry(key.into())
                        .or_default()
                        .push(last.a as f64 / last.n as f64);
                }
            }
            TraceRows::Fpp(rows) => {
                if let Some(last) = rows.last().filter(|r| r.k > 0) {
                    named
                        .entry("tau_n/n^(1/3)".into())
                        .or_default()
                        .push(last.tau / (last.k as f64).cbrt());
                }
            }
            TraceRows::Pv(rows) => {
                if let Some(last) = rows.last().filter(|r| r.n > 0) {
                    named
                        .entry("P_n/n^(2/3)".into())
                        .or_default()
                        .push(last.p as f64 / (last.n as f64).powf(2.0 / 3.0));
                }
            }
            _ => {}
        }
    }
    named.into_iter().map(|(k, v)| (k, describe(v))).collect()
}

fn summary(
    args: &SimulateArgs,
    traces: &[Trace],
    files: &[String],
    preflight_rows: u32,
) -> Result<Value> {
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for t in traces {
        for row in summary_rows(&t.rows)? {
            if let Value::Object(fields) = row {
                for (k, v) in fields {
                    if let Some(x) = v.as_f64() {
                        columns.entry(k).or_default().push(x);
                    }
                }
            }
        }
    }
    let moments: BTreeMap<String, Value> =
        columns.into_iter().map(|(k, v)| (k, describe(v))).collect();
    let truncated: Vec<u64> = traces
        .iter()
        .filter(|t| t.truncated.is_some())
        .map(|t| t.replica)
        .collect();
    Ok(json!({
        "schema": 1,
        "model": args.model,
        "algorithm": args.algorithm,
        "seed": args.seed,
        "steps": args.steps,
        "r_max": args.rmax,
        "replicas": args.replicas,
        "format": args.format,
        "exact_cutoff": args.exact_cutoff,
        "exact_rows_checked": preflight_rows,
        "max_hole_volume": args.max_hole_volume,
        "stride": args.stride,
        "track_volume": !args.no_volume,
        "truncated": !truncated.is_empty(),
        "truncated_replicas": truncated,
        "moments": moments,
        "ratios": ratios(args.algorithm, traces),
        "files": files,
    }))
}

pub fn run(args: &SimulateArgs) -> Result<u8> {
    if args.replicas == 0 {
        anyhow::bail!(peeling::Error::Argument("replicas must be >= 1".into()));
    }
    let length = match (args.steps, args.rmax) {
        (Some(n), _) => Length::Steps(n),
        (None, Some(r)) => Length::Radius(r),
        (None, None) => unreachable!("clap requires one of --steps, --rmax"),
    };
    let job = Job {
        model: args.model,
        algorithm: args.algorithm,
        length,
        perimeter: args.perimeter,
        opts: RunOptions {
            track_volume: !args.no_volume,
            stride: args.stride,
            max_hole_volume: args.max_hole_volume,
        },
    };
    job.validate()?;
    let checked = if args.exact_cutoff > 0 {
        preflight(args.model, args.exact_cutoff)?
    } else {
        0
    };
    let traces = job.run_all(args.seed, args.replicas)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let stem = stem(args);
    let mut files = Vec::new();
    for t in &traces {
        files.extend(write_trace(&args.out, &stem, args.format, t)?);
    }
    let doc = summary(args, &traces, &files, checked)?;
    let summary_file = args.out.join(format!("{stem}-summary.json"));
    fs::write(&summary_file, serde_json::to_string_pretty(&doc)? + "\n")
        .with_context(|| format!("writing {}", summary_file.display()))?;
    println!(
        "wrote {} trace file(s) and {}",
        files.len(),
        summary_file.display()
    );
    if let Some(v) = doc["ratios"].as_object() {
        for (k, stats) in v {
            println!(
                "{k}: mean {:.6}, sd {:.6}",
                stats["mean"].as_f64().unwrap_or(f64::NAN),
                stats["sd"].as_f64().unwrap_or(f64::NAN)
            );
        }
    }
    let truncated = traces.iter().filter(|t| t.truncated.is_some()).count();
    if truncated > 0 {
        eprintln!("{truncated} replica(s) truncated by a resource guard");
        return Ok(BUDGET);
    }
    Ok(0)
}
