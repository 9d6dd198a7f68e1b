use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use mslab_core::approx::{approximate, ApproxOptions};
use mslab_core::experiments::{self, DEFAULT_SEED, EXPERIMENTS};
use mslab_core::mesh_io::{read_mesh, write_mesh};
use mslab_core::modulus::{modulus_quad, Quad, SolverOptions};
use mslab_core::report::{compare_reports, ExperimentReport, Tolerances};
use mslab_core::tripod::{distortion_certificate, embed_triangle, to_svg, MetricTriangle};
use mslab_core::{spaces, Error};

#[derive(Parser)]
#[command(name = "mslab", version, about = "Numerical laboratory for metric surfaces")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MSLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run registered experiments and write JSON and CSV reports.
    Run {
        /// Experiment name, repeatable or comma-separated; `all` runs the suite.
        #[arg(long, required = true, value_delimiter = ',')]
        experiment: Vec<String>,
        /// JSON file mapping experiment names to parameter objects.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// List the registered experiments.
    List,
    /// Generate a mesh and write it as JSON.
    Gen {
        #[arg(value_enum)]
        space: Space,
        /// Cells per unit length (or the generator's resolution parameter).
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Moduli of both curve families of a quadrilateral.
    Modulus {
        #[arg(long)]
        mesh: PathBuf,
        /// JSON quadrilateral: `{"faces": [..] | null, "sides": [[..],[..],[..],[..]]}`.
        #[arg(long)]
        quad: PathBuf,
        #[arg(long, default_value_t = 1)]
        edge_points: usize,
    },
    /// Polyhedral approximation of a host mesh at one scale.
    Approximate {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Tripod embedding of a flat triangle with the given side lengths.
    EmbedTriangle {
        /// Side lengths `a,b,c`.
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Write the embedded boundary as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compare two reports of the same experiment.
    Compare {
        baseline: PathBuf,
        current: PathBuf,
        /// Default relative tolerance per field.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Per-field tolerance `path=tol`, e.g. `outputs.scalars.product=0.01`.
        #[arg(long = "field-tol", value_parser = parse_field_tol)]
        field_tol: Vec<(String, f64)>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    EuclidSquare,
    LinfSquare,
    Annulus,
    SlitDisk,
    SquareFrame,
    WeightedPlane,
    CantorQuotient,
}

fn parse_field_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected path=tol")?;
    Ok((k.to_string(), v.parse().map_err(|e| format!("{e}"))?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check passed.
fn dispatch(cmd: Command) -> anyhow::Result<bool> {
    match cmd {
        Command::Run { experiment, config, seed, out } => run(&experiment, config.as_deref(), seed, &out),
        Command::List => {
            EXPERIMENTS.iter().for_each(|e| println!("{e}"));
            Ok(true)
        }
        Command::Gen { space, n, out } => {
            let mesh = match space {
                Space::EuclidSquare => spaces::gen_euclid_square(n)?,
                Space::LinfSquare => spaces::gen_linf_square(n)?,
                Space::Annulus => spaces::gen_annulus(1.0, std::f64::consts::E, 4 * n, n)?,
                Space::SlitDisk => spaces::gen_slit_disk(n, false, 2)?,
                Space::SquareFrame => spaces::gen_square_frame(n)?.0,
                Space::WeightedPlane => {
                    let spec = spaces::WeightedPlaneSpec::default();
                    spaces::gen_weighted_plane(spec.n, &spec.zero_cells())?
                }
                Space::CantorQuotient => {
                    let g = spaces::CantorGrid { h: 1.0 / n as f64, ..Default::default() };
                    spaces::gen_cantor_quotient(&spaces::CantorSpec::default(), &g)?.mesh
                }
            };
            write_mesh(&mesh, &out)?;
            println!("{} vertices, {} faces -> {}", mesh.n_vertices(), mesh.n_faces(), out.display());
            Ok(true)
        }
        Command::Modulus { mesh, quad, edge_points } => {
            let mesh = read_mesh(&mesh)?;
            let quad: Quad = serde_json::from_str(&fs::read_to_string(&quad)?).context("reading quad")?;
            let opts = SolverOptions { edge_points, ..SolverOptions::default() };
            let m = modulus_quad(&mesh, &quad, &[], &opts)?;
            let summary = json!({
                "primal": { "value": m.primal.value, "lower_bound": m.primal.lower_bound, "iterations": m.primal.iterations },
                "conjugate": { "value": m.conjugate.value, "lower_bound": m.conjugate.lower_bound, "iterations": m.conjugate.iterations },
                "product": m.product,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(true)
        }
        Command::Approximate { mesh, epsilon } => {
            let mesh = read_mesh(&mesh)?;
            let mut r = serde_json::to_value(approximate(&mesh, epsilon, &ApproxOptions::default())?)?;
            r.as_object_mut().map(|o| o.remove("filling_reports"));
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(true)
        }
        Command::EmbedTriangle { lengths, samples, svg } => {
            if lengths.len() != 3 {
                bail!("--lengths takes three side lengths, got {}", lengths.len());
            }
            let t = MetricTriangle::euclidean([lengths[0], lengths[1], lengths[2]], samples)?;
            let e = embed_triangle(&t)?;
            let d = distortion_certificate(&t, &e)?;
            println!("{}", serde_json::to_string_pretty(&d)?);
            if let Some(path) = svg {
                fs::write(path, to_svg(&e))?;
            }
            Ok(d.max_expand.max(d.max_contract) <= 4.0)
        }
        Command::Compare { baseline, current, tol, field_tol } => {
            let a = ExperimentReport::from_json(&fs::read_to_string(&baseline)?)?;
            let b = ExperimentReport::from_json(&fs::read_to_string(&current)?)?;
            let t = Tolerances { default: tol, fields: field_tol.into_iter().collect() };
            let diff = compare_reports(&a, &b, &t)?;
            for d in &diff.fields {
                let mark = if d.fail { "FAIL" } else { "ok  " };
                println!("{mark} {} {} -> {} (rel {:?}, tol {})", d.field, d.baseline, d.current, d.relative, d.tolerance);
            }
            println!("{} differing fields, {} above tolerance", diff.fields.len(), diff.failures().len());
            Ok(diff.failures().is_empty())
        }
    }
}

fn run(names: &[String], config: Option<&Path>, seed: u64, out: &Path) -> anyhow::Result<bool> {
    let names: Vec<&str> = if names.iter().any(|n| n == "all") {
        EXPERIMENTS.to_vec()
    } else {
        names.iter().map(String::as_str).collect()
    };
    if let Some(bad) = names.iter().find(|n| !EXPERIMENTS.contains(n)) {
        return Err(Error::UnknownExperiment(bad.to_string()).into());
    }
    let config: Value = match config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).map_err(|e| Error::ConfigInvalid(e.to_string()))?,
        None => json!({}),
    };
    let Value::Object(map) = &config else {
        bail!(Error::ConfigInvalid("config must map experiment names to parameter objects".into()));
    };
    if let Some(k) = map.keys().find(|k| !EXPERIMENTS.contains(&k.as_str())) {
        bail!(Error::ConfigInvalid(format!("config names unknown experiment {k}")));
    }
    fs::create_dir_all(out)?;
    let reports: Vec<ExperimentReport> = names
        .par_iter()
        .map(|n| experiments::run(n, map.get(*n).unwrap_or(&Value::Null), seed))
        .collect::<Result<_, _>>()?;
    let mut pass = true;
    for r in &reports {
        fs::write(out.join(format!("{}.json", r.experiment)), r.to_json()? + "\n")?;
        fs::write(out.join(format!("{}.csv", r.experiment)), r.to_csv())?;
        let failed = r.failed();
        println!(
            "{} {} ({} assertions, {} ms)",
            if r.pass { "PASS" } else { "FAIL" },
            r.experiment,
            r.assertions.len(),
            r.runtime_ms
        );
        for a in failed {
            println!("  failed {}: value {} target {} tol {} ({:?})", a.name, a.value, a.target, a.tolerance, a.comparison);
        }
        pass &= r.pass;
    }
    Ok(pass)
}
