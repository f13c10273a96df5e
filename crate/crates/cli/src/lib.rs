//! Command-line front end for `npc-core`.
//!
//! Every command produces a JSON value and a verdict. Check commands print a
//! `CheckReport`; queries print their result and always pass. The process
//! exit code is 0 on pass, 1 on a failed check and 2 on any error.

pub mod suite;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use npc_core::complex::{Complex, VertexId};
use npc_core::diagram::{classify, gauss_bonnet_audit, reduced_diagram_search, validate_diagram, DiscDiagram};
use npc_core::error::NpcError;
use npc_core::generators::{self, gen_cayley_ball, gen_ladder_diagram, GeneratorSpec, LadderSpec};
use npc_core::io::{self, AnyInput};
use npc_core::metric::{self, DeltaMethod, OrientedGeodesic};
use npc_core::presentation::Presentation;
use npc_core::report::CheckReport;
use npc_core::sap::{sap_probe, tight_hexagon_probe, verify_sap_bound, SampleSpec};
use npc_core::smallcancel::{
    check_c16_complex, check_c16_presentation, dehn_reduce, enumerate_pieces_complex, enumerate_pieces_presentation,
};
use npc_core::wsys::{self, FillBackend, WsysContext};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] NpcError),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A command's JSON output and verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub value: Value,
    pub passed: bool,
}

impl Outcome {
    fn query(value: Value) -> Self {
        Outcome { value, passed: true }
    }

    fn report(r: CheckReport) -> Self {
        let passed = r.passed();
        Outcome { value: serde_json::to_value(r).expect("reports serialize"), passed }
    }
}

#[derive(Debug, Parser)]
#[command(name = "npc", about = "Non-positive curvature checks on finite 2-complexes")]
pub struct Cli {
    /// Render the JSON result as plain text.
    #[arg(long, global = true)]
    pub text: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DeltaArg {
    Slim,
    #[value(name = "4pt")]
    FourPoint,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Structured,
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DiagramAction {
    Validate,
    Classify,
    GaussBonnet,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    EquilateralDisc,
    Tree,
    Polygon,
    Parallelogram,
    JoinLines,
    RandomDisc,
    CayleyBall,
    Ladder,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub kind: GenKind,
    /// Integer parameters, comma separated (radius; branching,depth; p,q; ...).
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Presentation file for `cayley-ball`.
    #[arg(long)]
    pub presentation: Option<PathBuf>,
    /// Genus of the surface presentation for `cayley-ball`, used without `--presentation`.
    #[arg(long)]
    pub surface: Option<usize>,
    /// Polygon sizes along a `ladder`.
    #[arg(long, value_delimiter = ',')]
    pub cells: Vec<usize>,
    /// Where to write the ladder diagram.
    #[arg(long)]
    pub diagram_out: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural validation of a complex file.
    Validate { file: PathBuf },
    /// Flagness of a simplicial complex.
    IsFlag { file: PathBuf },
    /// Graph distance between two vertices.
    Distance { file: PathBuf, u: VertexId, v: VertexId },
    /// Vertices on some geodesic between two vertices.
    Interval { file: PathBuf, u: VertexId, v: VertexId },
    /// All geodesics between two vertices.
    Geodesics {
        file: PathBuf,
        u: VertexId,
        v: VertexId,
        #[arg(long, default_value_t = metric::DEFAULT_GEODESIC_CAP)]
        cap: u64,
    },
    /// Gromov hyperbolicity constant.
    Delta {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "4pt")]
        method: DeltaArg,
    },
    /// Conditions (E) and (V) at every vertex.
    CheckWsys {
        file: PathBuf,
        /// Only radii 1 to 3.
        #[arg(long)]
        local: bool,
    },
    /// Systolicity: flag, simply connected, 6-large links.
    CheckSystolic { file: PathBuf },
    /// Triangle and quadrangle conditions.
    WeakModularity { file: PathBuf },
    /// Minimal filling of a geodesic bigon.
    FillBigon {
        file: PathBuf,
        /// First geodesic as comma-separated vertex ids.
        #[arg(long, value_delimiter = ',', required = true)]
        g1: Vec<VertexId>,
        /// Second geodesic, with the same endpoints.
        #[arg(long, value_delimiter = ',', required = true)]
        g2: Vec<VertexId>,
        #[arg(long, value_enum, default_value = "structured")]
        backend: BackendArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Filling of a metric triangle.
    FillTriangle {
        file: PathBuf,
        u: VertexId,
        v: VertexId,
        w: VertexId,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pieces of a polygonal complex or a presentation.
    Pieces { file: PathBuf },
    /// C'(1/6) small cancellation.
    CheckC16 { file: PathBuf },
    /// Solve the word problem by Dehn reduction.
    Dehn { file: PathBuf, word: String },
    /// Validate, classify or audit a saved diagram.
    Diagram {
        #[arg(value_enum)]
        action: DiagramAction,
        file: PathBuf,
        /// Target complex, overriding the diagram's own reference.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Minimal-area reduced filling of a closed loop.
    Fill {
        file: PathBuf,
        #[arg(long = "loop", value_delimiter = ',', required = true)]
        loop_ids: Vec<VertexId>,
        #[arg(long, default_value_t = 32)]
        cap: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Shortcut avoidance probe.
    Sap {
        file: PathBuf,
        #[arg(long = "n")]
        n: usize,
        #[arg(long, default_value_t = u32::MAX)]
        radius: u32,
        #[arg(long, default_value_t = 10_000)]
        cap: u64,
        /// Also check `r(n) ≤ n·N²` for this tightness constant.
        #[arg(long)]
        tightness: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Tight filling bound over closed hexagons.
    TightHex {
        file: PathBuf,
        #[arg(long = "N")]
        bound: usize,
        #[arg(long, conflicts_with = "exhaustive")]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exhaustive: bool,
        /// Longest cycle visited by `--exhaustive`.
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long, default_value_t = 64)]
        area_cap: usize,
    },
    /// Generate a complex.
    Gen(GenArgs),
    /// Run a suite configuration.
    Suite { config: PathBuf },
    /// Print the version.
    Version,
}

fn complex(path: &Path) -> CliResult<Complex> {
    Ok(io::load_complex(path)?)
}

fn geodesic(c: &Complex, ids: &[VertexId]) -> CliResult<OrientedGeodesic> {
    Ok(OrientedGeodesic::new(c, ids.to_vec())?)
}

/// Writes `d` to `output` when given; the outcome carries a summary, or the
/// diagram itself when it is not written anywhere.
fn emit_diagram(c: &Complex, d: DiscDiagram, output: Option<&Path>) -> CliResult<Outcome> {
    let v = validate_diagram(&d, c);
    let summary = json!({
        "area": d.area(),
        "multiplicity": d.multiplicity(),
        "max_degree": d.max_degree(),
        "boundary_length": d.boundary.len(),
        "valid": v.passed(),
    });
    let value = match output {
        Some(p) => {
            io::save_diagram(&d, p)?;
            json!({"diagram": p.display().to_string(), "summary": summary})
        }
        None => json!({"diagram": serde_json::to_value(&d).expect("diagrams serialize"), "summary": summary}),
    };
    Ok(Outcome { value, passed: v.passed() })
}

fn diagram_target(d: &DiscDiagram, target: Option<&Path>) -> CliResult<Complex> {
    let path = match (target, &d.target) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(t)) => PathBuf::from(t),
        (None, None) => return Err(CliError::Usage("diagram has no target reference; pass --target".into())),
    };
    complex(&path)
}

pub fn diagram_report(action: DiagramAction, d: &DiscDiagram, c: &Complex) -> CliResult<CheckReport> {
    Ok(match action {
        DiagramAction::Validate => validate_diagram(d, c),
        DiagramAction::Classify => match classify(d) {
            Ok(cl) => CheckReport::pass("classify").stat("kind", cl.name()).with_witness(cl),
            Err(e @ NpcError::Unclassifiable(_)) => CheckReport::fail("classify", e.to_string()),
            Err(e) => return Err(e.into()),
        },
        DiagramAction::GaussBonnet => gauss_bonnet_audit(d)?.to_report(),
    })
}

fn gen(a: &GenArgs) -> CliResult<Outcome> {
    let name = a.kind.to_possible_value().expect("named").get_name().to_string();
    let c = match a.kind {
        GenKind::CayleyBall => {
            let p = match (&a.presentation, a.surface) {
                (Some(f), _) => io::load_presentation(f)?,
                (None, Some(g)) => Presentation::surface(g)?,
                (None, None) => return Err(CliError::Usage("cayley-ball needs --presentation or --surface".into())),
            };
            let r = *a.params.first().ok_or_else(|| CliError::Usage("cayley-ball needs --params R".into()))?;
            gen_cayley_ball(&p, r as u32)?
        }
        GenKind::Ladder => {
            if a.cells.is_empty() {
                return Err(CliError::Usage("ladder needs --cells".into()));
            }
            let (d, c) = gen_ladder_diagram(&LadderSpec::chain(&a.cells))?;
            if let Some(p) = &a.diagram_out {
                let mut d = d;
                d.target = a.output.as_ref().map(|o| o.display().to_string());
                io::save_diagram(&d, p)?;
            }
            c
        }
        _ => generators::generate(&GeneratorSpec { name: name.clone(), params: a.params.clone(), seed: a.seed })?,
    };
    let summary = json!({
        "generator": name,
        "vertices": c.num_vertices(),
        "edges": c.num_edges(),
        "cells": c.num_cells(),
    });
    match &a.output {
        Some(p) => {
            io::save_complex(&c, p)?;
            Ok(Outcome::query(json!({"output": p.display().to_string(), "summary": summary})))
        }
        None => Ok(Outcome::query(serde_json::from_str(&io::complex_to_json(&c)).expect("valid json"))),
    }
}

pub fn execute(cmd: &Command) -> CliResult<Outcome> {
    match cmd {
        Command::Validate { file } => Ok(Outcome::report(complex(file)?.validate())),
        Command::IsFlag { file } => Ok(Outcome::report(complex(file)?.is_flag()?)),
        Command::Distance { file, u, v } => {
            let c = complex(file)?;
            Ok(Outcome::query(json!({"u": u, "v": v, "distance": metric::distance(&c, *u, *v)?})))
        }
        Command::Interval { file, u, v } => {
            let c = complex(file)?;
            Ok(Outcome::query(metric::interval_report(&metric::interval(&c, *u, *v)?)))
        }
        Command::Geodesics { file, u, v, cap } => {
            let c = complex(file)?;
            let gs = metric::enumerate_geodesics(&c, *u, *v, *cap)?;
            Ok(Outcome::query(json!({"u": u, "v": v, "count": gs.len(), "geodesics": gs})))
        }
        Command::Delta { file, method } => {
            let c = complex(file)?;
            let m = match method {
                DeltaArg::Slim => DeltaMethod::SlimTrianglesExhaustive,
                DeltaArg::FourPoint => DeltaMethod::FourPointExhaustive,
            };
            let d = metric::delta_estimate(&c, m)?;
            Ok(Outcome::query(json!({"method": d.method, "delta": d.value.to_string(), "witness": d.witness})))
        }
        Command::CheckWsys { file, local } => {
            let c = complex(file)?;
            let r = if *local { wsys::check_locally(&c)? } else { wsys::check_weakly_systolic(&c)? };
            Ok(Outcome::report(r.to_report()))
        }
        Command::CheckSystolic { file } => Ok(Outcome::report(wsys::check_systolic(&complex(file)?)?)),
        Command::WeakModularity { file } => Ok(Outcome::report(wsys::check_weak_modularity(&complex(file)?))),
        Command::FillBigon { file, g1, g2, backend, output } => {
            let c = complex(file)?;
            let b = match backend {
                BackendArg::Structured => FillBackend::Structured,
                BackendArg::Oracle => FillBackend::Oracle,
            };
            let d = WsysContext::new(&c).fill_bigon(&geodesic(&c, g1)?, &geodesic(&c, g2)?, b)?;
            emit_diagram(&c, with_target(d, file), output.as_deref())
        }
        Command::FillTriangle { file, u, v, w, output } => {
            let c = complex(file)?;
            let d = wsys::fill_triangle(&c, *u, *v, *w)?;
            emit_diagram(&c, with_target(d, file), output.as_deref())
        }
        Command::Pieces { file } => Ok(Outcome::query(match io::load_any(file)? {
            AnyInput::Complex(c) => json!({"pieces": enumerate_pieces_complex(&c)?}),
            AnyInput::Presentation(p) => json!({"pieces": enumerate_pieces_presentation(&p)}),
        })),
        Command::CheckC16 { file } => Ok(Outcome::report(match io::load_any(file)? {
            AnyInput::Complex(c) => check_c16_complex(&c)?.to_report("check_c16_complex"),
            AnyInput::Presentation(p) => check_c16_presentation(&p).to_report("check_c16_presentation"),
        })),
        Command::Dehn { file, word } => {
            let p = io::load_presentation(file)?;
            let w = p.parse_word(word)?;
            let r = dehn_reduce(&p, &w)?;
            Ok(Outcome::query(json!({
                "word": word,
                "reduced": p.format_word(&r),
                "trivial": r.is_empty(),
            })))
        }
        Command::Diagram { action, file, target } => {
            let d = io::load_diagram(file)?;
            let c = diagram_target(&d, target.as_deref())?;
            Ok(Outcome::report(diagram_report(*action, &d, &c)?))
        }
        Command::Fill { file, loop_ids, cap, output } => {
            let c = complex(file)?;
            let d = reduced_diagram_search(&c, loop_ids, *cap)?;
            emit_diagram(&c, with_target(d, file), output.as_deref())
        }
        Command::Sap { file, n, radius, cap, tightness, json } => {
            let c = complex(file)?;
            let probe = sap_probe(&c, *n, *radius, *cap)?;
            let mut r = probe.to_report();
            if let Some(t) = tightness {
                let b = verify_sap_bound(&probe, *t)?;
                r.verdict = b.verdict;
                r = r.stat("bound", &b.stats["bound"]);
            }
            if let Some(p) = json {
                let text = serde_json::to_string_pretty(&probe).expect("probe serializes") + "\n";
                std::fs::write(p, text)
                    .map_err(|e| NpcError::Io { path: p.display().to_string(), msg: e.to_string() })?;
            }
            Ok(Outcome::report(r))
        }
        Command::TightHex { file, bound, samples, seed, exhaustive, max_len, area_cap } => {
            let c = complex(file)?;
            let spec = match (samples, exhaustive) {
                (Some(s), false) => SampleSpec::Random { samples: *s, seed: *seed },
                (None, true) => SampleSpec::Exhaustive { max_len: *max_len },
                _ => return Err(CliError::Usage("pass exactly one of --samples or --exhaustive".into())),
            };
            Ok(Outcome::report(tight_hexagon_probe(&c, *bound, &spec, *area_cap)?))
        }
        Command::Gen(a) => gen(a),
        Command::Suite { config } => {
            let cfg = suite::SuiteConfig::load(config)?;
            let report = suite::run_suite(&cfg)?;
            if let Some(out) = &cfg.output {
                std::fs::write(out, report.to_json())
                    .map_err(|e| NpcError::Io { path: out.display().to_string(), msg: e.to_string() })?;
            }
            let passed = report.passed();
            Ok(Outcome { value: serde_json::to_value(&report).expect("report serializes"), passed })
        }
        Command::Version => Ok(Outcome::query(json!({"name": "npc", "version": VERSION}))),
    }
}

fn with_target(mut d: DiscDiagram, file: &Path) -> DiscDiagram {
    d.target = Some(file.display().to_string());
    d
}

/// Plain-text rendering of a command's JSON output.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    if let (Some(check), Some(verdict)) = (v.get("check"), v.get("verdict")) {
        out += &format!("{}: {}\n", check.as_str().unwrap_or("?"), verdict.as_str().unwrap_or("?"));
        if let Some(stats) = v.get("stats").and_then(Value::as_object) {
            for (k, s) in stats {
                out += &format!("  {k} = {s}\n");
            }
        }
        if !v["witness"].is_null() {
            out += &format!("  witness = {}\n", v["witness"]);
        }
    } else if let Some(checks) = v.get("checks").and_then(Value::as_array) {
        for c in checks {
            let r = &c["report"];
            out += &format!(
                "{:<24} {:<40} {}\n",
                c["name"].as_str().unwrap_or("?"),
                c["target"].as_str().unwrap_or("?"),
                r["verdict"].as_str().unwrap_or("?")
            );
        }
        out += &format!("suite: {}\n", v["verdict"].as_str().unwrap_or("?"));
    } else if let Some(obj) = v.as_object() {
        for (k, x) in obj {
            out += &format!("{k}: {x}\n");
        }
    } else {
        out += &format!("{v}\n");
    }
    out
}

/// Worker count from `NPC_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("NPC_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("NPC_THREADS must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}
