//! Batch runner for `npc suite <config.json>`.
//!
//! A config lists checks by name, each with a target file and parameters.
//! Unknown names, unknown parameters and missing targets are rejected while
//! the config is loaded; errors raised while a check runs are recorded as that
//! check's failure. The report lists checks in config order and is identical
//! for every thread count apart from `wall_time_ms`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use npc_core::diagram::gauss_bonnet_audit;
use npc_core::error::NpcError;
use npc_core::io::{self, AnyInput};
use npc_core::metric::{delta_estimate, DeltaMethod};
use npc_core::par;
use npc_core::report::{CheckReport, Verdict};
use npc_core::sap::{sap_probe, tight_hexagon_probe, verify_sap_bound, SampleSpec};
use npc_core::smallcancel::{check_c16_complex, check_c16_presentation, is_trivial};
use npc_core::wsys;

use crate::{diagram_report, CliError, CliResult, DiagramAction, VERSION};

pub const SUITE_FORMAT: &str = "npc-suite-v1";
pub const SUITE_REPORT_FORMAT: &str = "npc-suite-report-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    pub geodesic_cap: u64,
    pub area_cap: usize,
    pub node_cap: usize,
    pub radius_cap: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { geodesic_cap: 10_000, area_cap: 64, node_cap: 2_000_000, radius_cap: u32::MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WsysParams {
    #[serde(default)]
    pub local: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaParams {
    pub method: DeltaMethod,
    /// Passes iff the estimate is at most this value.
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SapParams {
    pub n: usize,
    /// Checks `r(n) ≤ n·N²` against this tightness constant when given.
    #[serde(default)]
    pub tightness: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TightHexParams {
    pub bound: usize,
    pub sample: SampleSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DehnParams {
    pub word: String,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramParams {
    /// Target complex; defaults to the diagram's own reference.
    #[serde(default)]
    pub complex: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckKind {
    Validate,
    IsFlag,
    CheckWsys(WsysParams),
    CheckSystolic,
    WeakModularity,
    CheckC16,
    Delta(DeltaParams),
    Dehn(DehnParams),
    Sap(SapParams),
    TightHex(TightHexParams),
    DiagramValidate(DiagramParams),
    DiagramClassify(DiagramParams),
    GaussBonnet,
}

pub const CHECK_NAMES: &[&str] = &[
    "validate",
    "is-flag",
    "check-wsys",
    "check-systolic",
    "weak-modularity",
    "check-c16",
    "delta",
    "dehn",
    "sap",
    "tight-hex",
    "diagram-validate",
    "diagram-classify",
    "gauss-bonnet",
];

impl CheckKind {
    pub fn parse(name: &str, params: Value) -> CliResult<Self> {
        fn p<T: DeserializeOwned>(name: &str, v: Value) -> CliResult<T> {
            serde_json::from_value(v).map_err(|e| CliError::Config(format!("check {name:?}: {e}")))
        }
        let unit = |v: Value| p::<NoParams>(name, v).map(|_| ());
        Ok(match name {
            "validate" => unit(params).map(|_| CheckKind::Validate)?,
            "is-flag" => unit(params).map(|_| CheckKind::IsFlag)?,
            "check-wsys" => CheckKind::CheckWsys(p(name, params)?),
            "check-systolic" => unit(params).map(|_| CheckKind::CheckSystolic)?,
            "weak-modularity" => unit(params).map(|_| CheckKind::WeakModularity)?,
            "check-c16" => unit(params).map(|_| CheckKind::CheckC16)?,
            "delta" => CheckKind::Delta(p(name, params)?),
            "dehn" => CheckKind::Dehn(p(name, params)?),
            "sap" => CheckKind::Sap(p(name, params)?),
            "tight-hex" => CheckKind::TightHex(p(name, params)?),
            "diagram-validate" => CheckKind::DiagramValidate(p(name, params)?),
            "diagram-classify" => CheckKind::DiagramClassify(p(name, params)?),
            "gauss-bonnet" => unit(params).map(|_| CheckKind::GaussBonnet)?,
            other => {
                return Err(CliError::Config(format!(
                    "unknown check {other:?}; expected one of {}",
                    CHECK_NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// The target as written in the config.
    pub target: String,
    /// The target resolved against the config directory.
    pub path: PathBuf,
    pub kind: CheckKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub checks: Vec<Check>,
    pub caps: Caps,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    name: String,
    target: String,
    #[serde(default)]
    params: Option<Map<String, Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    format: String,
    checks: Vec<RawCheck>,
    #[serde(default)]
    caps: Caps,
    #[serde(default)]
    threads: Option<usize>,
    #[serde(default)]
    output: Option<String>,
}

impl SuiteConfig {
    /// Parses a config whose relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let raw: RawConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        if raw.format != SUITE_FORMAT {
            return Err(CliError::Config(format!(
                "unsupported suite format {:?}, expected {SUITE_FORMAT:?}",
                raw.format
            )));
        }
        if raw.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        let mut checks = Vec::with_capacity(raw.checks.len());
        for rc in raw.checks {
            let kind = CheckKind::parse(&rc.name, Value::Object(rc.params.unwrap_or_default()))?;
            let path = base.join(&rc.target);
            if !path.is_file() {
                return Err(CliError::Config(format!("missing target file {}", path.display())));
            }
            if let CheckKind::DiagramValidate(DiagramParams { complex: Some(c) })
            | CheckKind::DiagramClassify(DiagramParams { complex: Some(c) }) = &kind
            {
                let cp = base.join(c);
                if !cp.is_file() {
                    return Err(CliError::Config(format!("missing target file {}", cp.display())));
                }
            }
            checks.push(Check { name: rc.name, target: rc.target, path, kind });
        }
        Ok(SuiteConfig { checks, caps: raw.caps, threads: raw.threads, output: raw.output.map(|o| base.join(o)) })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub target: String,
    /// False when a search cap truncated the check or it sampled at random.
    pub exhaustive: bool,
    /// Error class when the check raised instead of reporting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub format: String,
    pub version: String,
    pub verdict: Verdict,
    pub checks: Vec<CheckEntry>,
    pub wall_time_ms: u64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The report with the timing field zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        SuiteReport { wall_time_ms: 0, ..self.clone() }
    }
}

fn run_check(check: &Check, caps: &Caps) -> Result<(CheckReport, bool), NpcError> {
    let path = &check.path;
    let diagram = |action, params: &DiagramParams| -> Result<CheckReport, NpcError> {
        let d = io::load_diagram(path)?;
        let target = match (&params.complex, &d.target) {
            (Some(c), _) => path.parent().unwrap_or(Path::new("")).join(c),
            (None, Some(t)) => PathBuf::from(t),
            (None, None) => {
                return Err(NpcError::InvalidInput("diagram has no target and no \"complex\" param".into()))
            }
        };
        let c = io::load_complex(target)?;
        diagram_report(action, &d, &c).map_err(|e| match e {
            CliError::Core(e) => e,
            other => NpcError::InvalidInput(other.to_string()),
        })
    };
    Ok(match &check.kind {
        CheckKind::Validate => match io::load_any(path)? {
            AnyInput::Complex(c) => (c.validate(), true),
            AnyInput::Presentation(_) => (CheckReport::pass("validate").stat("kind", "presentation"), true),
        },
        CheckKind::IsFlag => (io::load_complex(path)?.is_flag()?, true),
        CheckKind::CheckWsys(p) => {
            let c = io::load_complex(path)?;
            let r = if p.local { wsys::check_locally(&c)? } else { wsys::check_weakly_systolic(&c)? };
            (r.to_report(), true)
        }
        CheckKind::CheckSystolic => (wsys::check_systolic(&io::load_complex(path)?)?, true),
        CheckKind::WeakModularity => (wsys::check_weak_modularity(&io::load_complex(path)?), true),
        CheckKind::CheckC16 => match io::load_any(path)? {
            AnyInput::Complex(c) => (check_c16_complex(&c)?.to_report("check_c16_complex"), true),
            AnyInput::Presentation(p) => (check_c16_presentation(&p).to_report("check_c16_presentation"), true),
        },
        CheckKind::Delta(p) => {
            let d = delta_estimate(&io::load_complex(path)?, p.method)?;
            let r = CheckReport::new("delta", d.value.as_f64() <= p.max)
                .stat("delta", d.value.to_string())
                .stat("max", p.max)
                .with_witness(&d.witness);
            (r, true)
        }
        CheckKind::Dehn(p) => {
            let pres = io::load_presentation(path)?;
            let w = pres.parse_word(&p.word)?;
            let t = is_trivial(&pres, &w)?;
            let r = CheckReport::new("dehn", t == p.trivial).stat("trivial", t).with_witness(&p.word);
            (r, true)
        }
        CheckKind::Sap(p) => {
            let probe = sap_probe(&io::load_complex(path)?, p.n, caps.radius_cap, caps.geodesic_cap)?;
            let exhaustive = probe.exhaustive;
            let mut r = probe.to_report();
            if let Some(t) = p.tightness {
                let b = verify_sap_bound(&probe, t)?;
                r.verdict = b.verdict;
                r = r.stat("bound", &b.stats["bound"]);
            }
            (r, exhaustive)
        }
        CheckKind::TightHex(p) => {
            let r = tight_hexagon_probe(&io::load_complex(path)?, p.bound, &p.sample, caps.area_cap)?;
            (r, matches!(p.sample, SampleSpec::Exhaustive { .. }))
        }
        CheckKind::DiagramValidate(p) => (diagram(DiagramAction::Validate, p)?, true),
        CheckKind::DiagramClassify(p) => (diagram(DiagramAction::Classify, p)?, true),
        CheckKind::GaussBonnet => (gauss_bonnet_audit(&io::load_diagram(path)?)?.to_report(), true),
    })
}

fn entry(check: &Check, caps: &Caps) -> CheckEntry {
    let (report, exhaustive, error) = match run_check(check, caps) {
        Ok((r, ex)) => (r, ex, None),
        Err(e) => {
            let w = json!({"error": e.class(), "message": e.to_string()});
            (CheckReport::fail(check.name.clone(), w), true, Some(e.class().to_string()))
        }
    };
    CheckEntry { name: check.name.clone(), target: check.target.clone(), exhaustive, error, report }
}

/// Worker count: `NPC_THREADS` first, then the config's `threads`.
pub fn worker_count(cfg: &SuiteConfig) -> CliResult<Option<usize>> {
    Ok(crate::threads_from_env()?.or(cfg.threads))
}

pub fn run_suite(cfg: &SuiteConfig) -> CliResult<SuiteReport> {
    let start = Instant::now();
    let threads = worker_count(cfg)?;
    let run = || par::map(&cfg.checks, |c| entry(c, &cfg.caps));
    let checks = in_pool(threads, run)?;
    let verdict = Verdict::from_bool(checks.iter().all(|c| c.report.passed()));
    Ok(SuiteReport {
        format: SUITE_REPORT_FORMAT.into(),
        version: VERSION.into(),
        verdict,
        checks,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(feature = "parallel")]
fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> CliResult<R> {
    match threads {
        Some(1) => Ok(par::sequential(f)),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn in_pool<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> CliResult<R> {
    Ok(f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_passes() {
        let cfg = SuiteConfig::parse(r#"{"format":"npc-suite-v1","checks":[]}"#, Path::new(".")).unwrap();
        let r = run_suite(&cfg).unwrap();
        assert!(r.passed());
        assert!(r.checks.is_empty());
    }

    #[test]
    fn unknown_check_is_rejected() {
        let text = r#"{"format":"npc-suite-v1","checks":[{"name":"frobnicate","target":"x.json"}]}"#;
        let e = SuiteConfig::parse(text, Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("frobnicate"), "{e}");
    }

    #[test]
    fn unknown_param_is_rejected() {
        let text = r#"{"format":"npc-suite-v1","checks":[{"name":"validate","target":"x.json","params":{"depth":3}}]}"#;
        assert!(matches!(SuiteConfig::parse(text, Path::new(".")), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_target_names_the_path() {
        let text = r#"{"format":"npc-suite-v1","checks":[{"name":"validate","target":"nowhere/c.json"}]}"#;
        let e = SuiteConfig::parse(text, Path::new("/tmp")).unwrap_err();
        assert!(e.to_string().contains("nowhere/c.json"), "{e}");
    }
}
