use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use focalnet::nets::NetLabel;
use focalnet::report::checks::{run_suite, SuiteConfig, SUITES};
use focalnet::report::obj::{exportable_net, export_obj, MeshRequest};
use focalnet::report::{evaluate_grid, evaluate_point, ReportError, SCHEMA_VERSION};
use focalnet::sdl::{gallery_names, gallery_source};
use focalnet::{compile, parse_surface, Sheet, SurfaceProgram, ToleranceSet};

#[derive(Parser)]
#[command(name = "focalnet", version, about = "Curvature-line frames, focal sheets and net diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in surfaces.
    List {
        /// Print the full `.surf` source of each entry.
        #[arg(long)]
        source: bool,
    },
    /// Evaluate one point.
    Eval {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Parameter point `u,v`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        at: (f64, f64),
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a grid and write a JSON report.
    Grid {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        dims: GridDims,
        #[arg(long)]
        out: PathBuf,
        /// Also write the records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run identity suites; exits 0 iff every check passes.
    Check {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        /// Replace every identity bound by this value.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export the surface, focal sheets and net glyphs as OBJ files.
    Mesh {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        dims: GridDims,
        /// Focal sheets to export, e.g. `1,2`.
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=2))]
        central: Vec<u8>,
        /// Nets to export, e.g. `13,17`.
        #[arg(long, value_delimiter = ',', value_parser = parse_net)]
        nets: Vec<NetLabel>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct SourceChoice {
    /// Gallery surface name.
    #[arg(long)]
    surface: Option<String>,
    /// `.surf` file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    source: SourceChoice,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param, allow_hyphen_values = true)]
    params: Vec<(String, f64)>,
}

#[derive(Args)]
struct GridDims {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    nu: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    nv: u32,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `u,v`")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected `name=value`")?;
    let value = v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), value))
}

fn parse_net(s: &str) -> Result<NetLabel, String> {
    match NetLabel::from_tag(s.trim()) {
        Some(label) if exportable_net(label) => Ok(label),
        _ => Err(format!("`{s}` is not one of 13, 14, 17, 18")),
    }
}

/// Failure that maps to an exit code.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::NothingToExport(_) => Failure::Run(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn load(args: &SurfaceArgs) -> Result<SurfaceProgram, Failure> {
    let (src, origin) = match (&args.source.surface, &args.source.file) {
        (Some(name), _) => (
            gallery_source(name)
                .ok_or_else(|| Failure::Usage(format!("unknown surface `{name}`; try `focalnet list`")))?
                .to_string(),
            name.clone(),
        ),
        (None, Some(path)) => (
            std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
            path.display().to_string(),
        ),
        (None, None) => return Err(Failure::Usage("no surface given".to_string())),
    };
    let def = parse_surface(&src).map_err(|e| Failure::Usage(format!("{origin}:{e}")))?;
    let overrides: BTreeMap<String, f64> = args.params.iter().cloned().collect();
    compile(&def, &overrides).map_err(|e| Failure::Usage(format!("{origin}: {e}")))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let tol = ToleranceSet::default();
    match cli.command {
        Command::List { source } => {
            for name in gallery_names() {
                if source {
                    println!("{}", gallery_source(name).expect("listed name"));
                } else {
                    println!("{name}");
                }
            }
            Ok(())
        }
        Command::Eval { surface, at, json } => {
            let prog = load(&surface)?;
            let (status, conditions, values) = evaluate_point(&prog, at.0, at.1, &tol);
            if json {
                let doc = serde_json::json!({
                    "schema": SCHEMA_VERSION,
                    "surface": prog.name(),
                    "params": prog.params().iter().cloned().collect::<BTreeMap<_, _>>(),
                    "u": at.0,
                    "v": at.1,
                    "status": status,
                    "conditions": conditions,
                    "values": values,
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("plain data serializes"));
            } else {
                println!("surface: {}", prog.name());
                println!("point: ({}, {})", at.0, at.1);
                println!("status: {status}");
                if !conditions.is_empty() {
                    println!("conditions: {}", conditions.join(", "));
                }
                if let Some(p) = &values {
                    println!("k1: {}\nk2: {}", p.k1, p.k2);
                    println!("mean_curvature: {}\ngauss_curvature: {}", p.mean_curvature, p.gauss_curvature);
                    println!("q1: {}\nq2: {}", p.q1, p.q2);
                    println!("w_defect: {:e}", p.w_defect);
                    let flags = serde_json::to_value(p.flags).expect("flags serialize");
                    let on: Vec<&str> = flags
                        .as_object()
                        .expect("flags are a struct")
                        .iter()
                        .filter(|(_, v)| v.as_bool() == Some(true))
                        .map(|(k, _)| k.as_str())
                        .collect();
                    println!("flags: {}", if on.is_empty() { "none".to_string() } else { on.join(", ") });
                    for (k, d) in &p.class_defects {
                        println!("class_{k}: {d:e}");
                    }
                    for (k, r) in &p.prop_residuals {
                        println!("{k}: residual {:e}{}", r.residual, if r.asserted { "" } else { " (not asserted)" });
                    }
                }
            }
            if values.is_none() {
                return Err(Failure::Run(format!("point is degenerate: {status}")));
            }
            Ok(())
        }
        Command::Grid { surface, dims, out, csv } => {
            let prog = load(&surface)?;
            let rep = evaluate_grid(&prog, dims.nu as usize, dims.nv as usize, &tol)?;
            write_text(&out, &rep.to_json()?)?;
            if let Some(path) = csv {
                let file = std::fs::File::create(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                rep.write_csv(file)?;
            }
            let counts: Vec<String> = rep.summary.counts.iter().map(|(k, n)| format!("{k}={n}")).collect();
            println!("{} points, {} evaluated ({})", rep.records.len(), rep.summary.evaluated, counts.join(", "));
            if rep.all_degenerate() {
                return Err(Failure::Run("no grid point could be evaluated".to_string()));
            }
            Ok(())
        }
        Command::Check { suite, tol, seed } => {
            let mut cfg = SuiteConfig {
                bound_override: tol,
                ..SuiteConfig::default()
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let outcomes = run_suite(&suite, &cfg).ok_or_else(|| Failure::Usage(format!("unknown suite `{suite}`")))?;
            for o in &outcomes {
                println!("{}", o.line());
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} checks, {failed} failed", outcomes.len());
            if failed > 0 {
                return Err(Failure::Run(format!("{failed} checks failed")));
            }
            Ok(())
        }
        Command::Mesh {
            surface,
            dims,
            central,
            nets,
            out,
        } => {
            let prog = load(&surface)?;
            let sheets = central.iter().map(|&i| if i == 1 { Sheet::One } else { Sheet::Two }).collect();
            let req = MeshRequest {
                nu: dims.nu as usize,
                nv: dims.nv as usize,
                sheets,
                nets,
            };
            std::fs::create_dir_all(&out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
            let manifest = export_obj(&prog, &req, &out, &tol)?;
            for (name, entry) in &manifest.objects {
                println!("{name}: {}", entry.status);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(msg)) => {
            eprintln!("focalnet: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("focalnet: {msg}");
            ExitCode::from(2)
        }
    }
}
