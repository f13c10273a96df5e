//! JSON file formats for complexes, presentations and disc diagrams.
//!
//! Every file carries a `format` tag that is checked before anything else.
//! Parse errors point at a 1-based line and column of the input.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::complex::{Complex, ComplexKind, VertexId};
use crate::diagram::{DiagramCell, DiscDiagram};
use crate::error::{NpcError, Result};
use crate::presentation::Presentation;

pub const COMPLEX_FORMAT: &str = "npc-complex-v1";
pub const PRESENTATION_FORMAT: &str = "npc-presentation-v1";
pub const DIAGRAM_FORMAT: &str = "npc-diagram-v1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexFile {
    format: String,
    kind: ComplexKind,
    vertices: Vec<VertexId>,
    edges: Vec<[VertexId; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    triangles: Option<Vec<[VertexId; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polygons: Option<Vec<Vec<VertexId>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresentationFile {
    format: String,
    generators: Vec<String>,
    relators: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagramFile {
    format: String,
    vertex_map: Vec<VertexId>,
    cells: Vec<DiagramCell>,
    boundary: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
}

/// A complex or a presentation, told apart by the `format` tag.
#[derive(Debug, Clone)]
pub enum AnyInput {
    Complex(Complex),
    Presentation(Presentation),
}

fn located(e: serde_json::Error) -> NpcError {
    NpcError::Parse { line: e.line(), column: e.column(), msg: e.to_string() }
}

/// 1-based line and column of the first occurrence of `needle`.
fn locate(text: &str, needle: &str) -> (usize, usize) {
    match text.find(needle) {
        Some(off) => {
            let before = &text[..off];
            let line = before.matches('\n').count() + 1;
            let column = off - before.rfind('\n').map_or(0, |p| p + 1) + 1;
            (line, column)
        }
        None => (1, 1),
    }
}

fn at(text: &str, needle: &str, msg: String) -> NpcError {
    let (line, column) = locate(text, needle);
    NpcError::Parse { line, column, msg }
}

fn format_tag(text: &str) -> Result<String> {
    let v: Value = serde_json::from_str(text).map_err(located)?;
    match v.get("format") {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(at(text, "\"format\"", "\"format\" must be a string".into())),
        None => Err(NpcError::Parse { line: 1, column: 1, msg: "missing \"format\" field".into() }),
    }
}

fn typed<T: DeserializeOwned>(text: &str, expected: &'static str) -> Result<T> {
    let found = format_tag(text)?;
    if found != expected {
        return Err(NpcError::SchemaVersion { found, expected });
    }
    serde_json::from_str(text).map_err(located)
}

pub fn parse_complex(text: &str) -> Result<Complex> {
    let f: ComplexFile = typed(text, COMPLEX_FORMAT)?;
    let cells: Vec<Vec<VertexId>> = match (f.kind, f.triangles, f.polygons) {
        (ComplexKind::Simplicial, Some(t), None) => t.into_iter().map(|t| t.to_vec()).collect(),
        (ComplexKind::Simplicial, None, None) => Vec::new(),
        (ComplexKind::Polygonal, None, Some(p)) => p,
        (ComplexKind::Polygonal, None, None) => Vec::new(),
        (kind, _, _) => {
            let msg = format!("a {} complex lists its cells under \"{}\" only", kind.name(), cells_key(kind));
            return Err(at(text, "\"kind\"", msg));
        }
    };
    let edges = f.edges.into_iter().map(|[a, b]| (a, b));
    Complex::new(f.kind, f.vertices, edges, cells)
        .map_err(|e| at(text, &format!("\"{}\"", cells_key(f.kind)), e.to_string()))
}

fn cells_key(kind: ComplexKind) -> &'static str {
    match kind {
        ComplexKind::Simplicial => "triangles",
        ComplexKind::Polygonal => "polygons",
    }
}

pub fn complex_to_json(c: &Complex) -> String {
    let (triangles, polygons) = match c.kind() {
        ComplexKind::Simplicial => (Some(c.cells().iter().map(|t| [t[0], t[1], t[2]]).collect()), None),
        ComplexKind::Polygonal => (None, Some(c.cells().to_vec())),
    };
    let f = ComplexFile {
        format: COMPLEX_FORMAT.into(),
        kind: c.kind(),
        vertices: c.vertices().to_vec(),
        edges: c.edges().to_vec(),
        triangles,
        polygons,
    };
    to_pretty(&f)
}

pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let f: PresentationFile = typed(text, PRESENTATION_FORMAT)?;
    let gens: Vec<&str> = f.generators.iter().map(String::as_str).collect();
    let rels: Vec<&str> = f.relators.iter().map(String::as_str).collect();
    Presentation::new(&gens, &rels).map_err(|e| {
        let msg = match e {
            NpcError::Parse { msg, .. } => msg,
            other => other.to_string(),
        };
        // Point at the offending relator when the message names one.
        let needle = rels
            .iter()
            .find(|r| msg.contains(&format!("{r:?}")))
            .map(|r| format!("\"{r}\""))
            .unwrap_or_else(|| "\"relators\"".into());
        at(text, &needle, msg)
    })
}

pub fn presentation_to_json(p: &Presentation) -> String {
    let f = PresentationFile {
        format: PRESENTATION_FORMAT.into(),
        generators: p.generators().iter().map(|c| c.to_string()).collect(),
        relators: p.relator_strings(),
    };
    to_pretty(&f)
}

pub fn parse_diagram(text: &str) -> Result<DiscDiagram> {
    let f: DiagramFile = typed(text, DIAGRAM_FORMAT)?;
    let nv = f.vertex_map.len();
    let bad = f.boundary.iter().chain(f.cells.iter().flat_map(|c| &c.walk)).find(|&&x| x >= nv);
    if let Some(x) = bad {
        return Err(at(text, "\"cells\"", format!("diagram vertex {x} has no entry in vertex_map")));
    }
    Ok(DiscDiagram { vertex_map: f.vertex_map, cells: f.cells, boundary: f.boundary, target: f.target })
}

pub fn diagram_to_json(d: &DiscDiagram) -> String {
    let f = DiagramFile {
        format: DIAGRAM_FORMAT.into(),
        vertex_map: d.vertex_map.clone(),
        cells: d.cells.clone(),
        boundary: d.boundary.clone(),
        target: d.target.clone(),
    };
    to_pretty(&f)
}

pub fn parse_any(text: &str) -> Result<AnyInput> {
    match format_tag(text)?.as_str() {
        PRESENTATION_FORMAT => parse_presentation(text).map(AnyInput::Presentation),
        _ => parse_complex(text).map(AnyInput::Complex),
    }
}

fn to_pretty<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("file types serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| NpcError::Io { path: path.display().to_string(), msg: e.to_string() })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| NpcError::Io { path: path.display().to_string(), msg: e.to_string() })
}

pub fn load_complex(path: impl AsRef<Path>) -> Result<Complex> {
    parse_complex(&read(path.as_ref())?)
}

pub fn save_complex(c: &Complex, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &complex_to_json(c))
}

pub fn load_presentation(path: impl AsRef<Path>) -> Result<Presentation> {
    parse_presentation(&read(path.as_ref())?)
}

pub fn save_presentation(p: &Presentation, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &presentation_to_json(p))
}

/// Loads a diagram; a relative `target` reference is resolved against the
/// diagram file's directory.
pub fn load_diagram(path: impl AsRef<Path>) -> Result<DiscDiagram> {
    let path = path.as_ref();
    let mut d = parse_diagram(&read(path)?)?;
    if let (Some(t), Some(dir)) = (&d.target, path.parent()) {
        if Path::new(t).is_relative() && !dir.as_os_str().is_empty() {
            d.target = Some(dir.join(t).display().to_string());
        }
    }
    Ok(d)
}

pub fn save_diagram(d: &DiscDiagram, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &diagram_to_json(d))
}

pub fn load_any(path: impl AsRef<Path>) -> Result<AnyInput> {
    parse_any(&read(path.as_ref())?)
}
