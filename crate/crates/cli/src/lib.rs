//! Command implementations behind the `pprog` binary: running the analysis
//! on a program file, rendering text and JSON reports, and exporting tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pprog_core::distribution::{NamedTable, PTable};
use pprog_core::evaluator::evaluate_contexts;
use pprog_core::feasibility::Verdict;
use pprog_core::frontend::{self, FrontendError, ValidatedProgram};
use pprog_core::pipeline::{analyze, Analysis, AnalysisError, AnalysisOptions, EvalMode, Tolerance};
use pprog_core::rational;
use pprog_core::scenario::{Assignment, Scenario};
use pprog_core::{BigRational, Execution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Frontend { path: String, source: FrontendError },
    #[error("{path}: {source}")]
    Analysis { path: String, source: AnalysisError },
    #[error("invalid tolerance `{0}`; expected a decimal or n/d")]
    BadTolerance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    pub mode: EvalMode,
    pub tolerance: Tolerance,
    pub lp: bool,
    pub dump_scenario: bool,
    pub format: Format,
}

/// Sampling is on as soon as a sample count or a seed is given. The sample
/// count defaults to each context's own `Infer` count and the seed to 0.
pub fn eval_mode(samples: Option<u64>, seed: Option<u64>) -> EvalMode {
    match (samples, seed) {
        (None, None) => EvalMode::Exact,
        (samples, seed) => EvalMode::Sampled { samples, seed: seed.unwrap_or(0) },
    }
}

pub fn parse_tolerance(text: Option<&str>) -> Result<Tolerance, CliError> {
    match text {
        None => Ok(Tolerance::Auto),
        Some(t) => rational::parse_rational(t)
            .filter(|r| *r >= BigRational::from_integer(0.into()))
            .map(Tolerance::Absolute)
            .ok_or_else(|| CliError::BadTolerance(t.to_string())),
    }
}

pub fn load_program(path: &Path) -> Result<ValidatedProgram, CliError> {
    let display = path.display().to_string();
    let source = fs::read_to_string(path).map_err(|source| CliError::Io { path: display.clone(), source })?;
    frontend::load(&source).map_err(|source| CliError::Frontend { path: display, source })
}

// ---- report model ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeReport {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowReport {
    pub values: Vec<u8>,
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub header: Vec<String>,
    pub rows: Vec<RowReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<u64>,
    pub table: TableReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaReport {
    pub acyclic: bool,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdgeReport {
    pub a: String,
    pub b: String,
    pub separator: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinTreeReport {
    pub edges: Vec<TreeEdgeReport>,
    pub ordering: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioReport {
    pub design: String,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub constraints: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dump: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorReport {
    pub a: String,
    pub b: String,
    pub separator: Vec<String>,
    pub distance: String,
    pub tolerance: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexValue {
    pub vertex: String,
    pub event: String,
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSumReport {
    pub edge: String,
    pub sum: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextValue {
    pub context: String,
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub variable: String,
    pub values: Vec<ContextValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "details")]
pub enum VerdictReport {
    NonContextualAcyclic {
        joint: TableReport,
    },
    InconsistentAcyclic {
        separators: Vec<SeparatorReport>,
    },
    NonContextualScenario {
        model: Vec<VertexValue>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        witness: Option<Vec<VertexValue>>,
    },
    #[serde(rename_all = "camelCase")]
    StrongContextual {
        violated_edges: Vec<EdgeSumReport>,
        discrepancies: Vec<DiscrepancyReport>,
    },
    ScenarioInfeasible {
        reason: String,
    },
}

impl VerdictReport {
    pub fn exit_code(&self) -> u8 {
        match self {
            VerdictReport::NonContextualAcyclic { .. } | VerdictReport::NonContextualScenario { .. } => 0,
            VerdictReport::StrongContextual { .. } => 2,
            VerdictReport::InconsistentAcyclic { .. } | VerdictReport::ScenarioInfeasible { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            VerdictReport::NonContextualAcyclic { .. } => "NonContextualAcyclic",
            VerdictReport::InconsistentAcyclic { .. } => "InconsistentAcyclic",
            VerdictReport::NonContextualScenario { .. } => "NonContextualScenario",
            VerdictReport::StrongContextual { .. } => "StrongContextual",
            VerdictReport::ScenarioInfeasible { .. } => "ScenarioInfeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub program: String,
    pub mode: ModeReport,
    pub contexts: Vec<ContextReport>,
    pub schema: SchemaReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub join_tree: Option<JoinTreeReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scenario: Option<ScenarioReport>,
    pub verdict: VerdictReport,
}

// ---- building reports ------------------------------------------------------

struct Render {
    exact: bool,
}

impl Render {
    fn p(&self, value: &BigRational) -> String {
        if self.exact {
            rational::format_exact(value)
        } else {
            rational::format_decimal(value, 6)
        }
    }

    fn table(&self, t: &PTable) -> TableReport {
        TableReport {
            header: t.header().to_vec(),
            rows: t.rows().map(|(v, p)| RowReport { values: v.iter().map(|&b| u8::from(b)).collect(), p: self.p(p) }).collect(),
        }
    }

    fn assignment(&self, s: &Scenario, a: &Assignment) -> Vec<VertexValue> {
        let labels = s.labels();
        a.iter()
            .map(|(&v, p)| VertexValue { vertex: labels[v].clone(), event: s.vertices()[v].to_string(), p: self.p(p) })
            .collect()
    }
}

fn mode_report(mode: EvalMode) -> ModeReport {
    match mode {
        EvalMode::Exact => ModeReport { kind: "exact".into(), samples: None, seed: None },
        EvalMode::Sampled { samples, seed } => ModeReport { kind: "sampled".into(), samples, seed: Some(seed) },
    }
}

pub fn build_report(program: &str, analysis: &Analysis, config: &RunConfig) -> Report {
    let r = Render { exact: config.mode == EvalMode::Exact };
    let contexts = analysis
        .contexts
        .iter()
        .map(|t| ContextReport { name: t.name.clone(), samples: t.table.mode().samples(), table: r.table(&t.table) })
        .collect();
    let schema = SchemaReport {
        acyclic: analysis.acyclic,
        trace: analysis.graham.render().lines().map(str::to_string).collect(),
    };
    let join_tree = analysis.join_tree.as_ref().map(|jt| JoinTreeReport {
        edges: jt
            .edges
            .iter()
            .map(|e| TreeEdgeReport { a: e.a.clone(), b: e.b.clone(), separator: e.separator.clone() })
            .collect(),
        ordering: jt.ordering.clone(),
    });
    let scenario = analysis.scenario.as_ref().map(|s| ScenarioReport {
        design: s.design().to_string(),
        vertex_count: s.vertex_count(),
        edge_count: s.edge_count(),
        constraints: s.constraints(),
        dump: config.dump_scenario.then(|| s.dump()),
    });
    let verdict = match &analysis.verdict {
        Verdict::NonContextualAcyclic { joint } => VerdictReport::NonContextualAcyclic { joint: r.table(joint) },
        Verdict::InconsistentAcyclic { report } => VerdictReport::InconsistentAcyclic {
            separators: report
                .checks
                .iter()
                .map(|c| SeparatorReport {
                    a: c.a.clone(),
                    b: c.b.clone(),
                    separator: c.separator.clone(),
                    distance: r.p(&c.distance),
                    tolerance: r.p(&c.tolerance),
                    passed: c.passed,
                })
                .collect(),
        },
        Verdict::NonContextualScenario { model, witness } => {
            let s = analysis.scenario.as_ref().expect("scenario verdicts carry a scenario");
            VerdictReport::NonContextualScenario {
                model: r.assignment(s, model),
                witness: witness.as_ref().map(|w| r.assignment(s, w)),
            }
        }
        Verdict::StrongContextual { violated_edges, discrepancies } => {
            let s = analysis.scenario.as_ref().expect("scenario verdicts carry a scenario");
            VerdictReport::StrongContextual {
                violated_edges: violated_edges
                    .iter()
                    .map(|e| EdgeSumReport { edge: s.edge_text(&e.edge), sum: r.p(&e.sum) })
                    .collect(),
                discrepancies: discrepancies
                    .iter()
                    .map(|d| DiscrepancyReport {
                        variable: d.variable.clone(),
                        values: d.values.iter().map(|(c, p)| ContextValue { context: c.clone(), p: r.p(p) }).collect(),
                    })
                    .collect(),
            }
        }
        Verdict::ScenarioInfeasible => VerdictReport::ScenarioInfeasible {
            reason: "no assignment satisfies every edge of the scenario".into(),
        },
    };
    Report { program: program.to_string(), mode: mode_report(config.mode), contexts, schema, join_tree, scenario, verdict }
}

fn write_table(out: &mut String, t: &TableReport, indent: &str) {
    let widths: Vec<usize> = t.header.iter().map(|h| h.len()).collect();
    let _ = write!(out, "{indent}");
    for (h, w) in t.header.iter().zip(&widths) {
        let _ = write!(out, "{h:>w$} ");
    }
    let _ = writeln!(out, "p");
    for row in &t.rows {
        let _ = write!(out, "{indent}");
        for (v, w) in row.values.iter().zip(&widths) {
            let _ = write!(out, "{v:>w$} ");
        }
        let _ = writeln!(out, "{}", row.p);
    }
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "program: {}", report.program);
    let mode = match (&report.mode.samples, &report.mode.seed) {
        (_, None) => report.mode.kind.clone(),
        (Some(n), Some(s)) => format!("{} (samples {n}, seed {s})", report.mode.kind),
        (None, Some(s)) => format!("{} (declared samples, seed {s})", report.mode.kind),
    };
    let _ = writeln!(out, "mode: {mode}");

    let _ = writeln!(out, "\n== contexts");
    for c in &report.contexts {
        match c.samples {
            Some(n) => {
                let _ = writeln!(out, "{} ({n} samples)", c.name);
            }
            None => {
                let _ = writeln!(out, "{}", c.name);
            }
        }
        write_table(&mut out, &c.table, "  ");
    }

    let _ = writeln!(out, "\n== schema");
    let _ = writeln!(out, "acyclic: {}", if report.schema.acyclic { "yes" } else { "no" });
    let _ = writeln!(out, "Graham trace:");
    for line in &report.schema.trace {
        let _ = writeln!(out, "  {line}");
    }

    if let Some(jt) = &report.join_tree {
        let _ = writeln!(out, "\n== join tree");
        for e in &jt.edges {
            let _ = writeln!(out, "  {} - {} on {{{}}}", e.a, e.b, e.separator.join(","));
        }
        let _ = writeln!(out, "  ordering: {}", jt.ordering.join(", "));
    }
    if let Some(s) = &report.scenario {
        let _ = writeln!(out, "\n== scenario");
        let _ = writeln!(out, "design: {}", s.design);
        let _ = writeln!(out, "{} vertices, {} edges", s.vertex_count, s.edge_count);
        for c in &s.constraints {
            let _ = writeln!(out, "  {c}");
        }
        if let Some(dump) = &s.dump {
            let _ = writeln!(out, "\n{}", dump.trim_end());
        }
    }

    let _ = writeln!(out, "\n== verdict");
    let _ = writeln!(out, "{}", report.verdict.kind());
    match &report.verdict {
        VerdictReport::NonContextualAcyclic { joint } => {
            let _ = writeln!(out, "joint distribution:");
            write_table(&mut out, joint, "  ");
        }
        VerdictReport::InconsistentAcyclic { separators } => {
            for s in separators.iter().filter(|s| !s.passed) {
                let _ = writeln!(
                    out,
                    "  {} - {} on {{{}}}: distance {} exceeds {}",
                    s.a,
                    s.b,
                    s.separator.join(","),
                    s.distance,
                    s.tolerance
                );
            }
        }
        VerdictReport::NonContextualScenario { model, witness } => {
            let _ = writeln!(out, "observed probabilities satisfy every edge");
            for v in model {
                let _ = writeln!(out, "  {} {} = {}", v.vertex, v.event, v.p);
            }
            if let Some(w) = witness {
                let _ = writeln!(out, "feasibility witness:");
                for v in w {
                    let _ = writeln!(out, "  {} = {}", v.vertex, v.p);
                }
            }
        }
        VerdictReport::StrongContextual { violated_edges, discrepancies } => {
            for e in violated_edges {
                let _ = writeln!(out, "  edge {} sums to {}", e.edge, e.sum);
            }
            for d in discrepancies {
                let parts: Vec<String> = d.values.iter().map(|v| format!("{} in {}", v.p, v.context)).collect();
                let _ = writeln!(out, "  p({}=1): {}", d.variable, parts.join(" vs "));
            }
        }
        VerdictReport::ScenarioInfeasible { reason } => {
            let _ = writeln!(out, "  {reason}");
        }
    }
    out
}

/// Runs the analysis and renders the report. Returns the rendered report
/// and the exit code for the verdict.
pub fn cmd_run(path: &Path, config: &RunConfig) -> Result<(String, u8), CliError> {
    let program = load_program(path)?;
    let options = AnalysisOptions {
        mode: config.mode,
        tolerance: config.tolerance.clone(),
        lp_check: config.lp,
        execution: Execution::default(),
    };
    let analysis = analyze(&program, &options)
        .map_err(|source| CliError::Analysis { path: path.display().to_string(), source })?;
    let report = build_report(&path.display().to_string(), &analysis, config);
    let code = report.verdict.exit_code();
    let rendered = match config.format {
        Format::Text => render_text(&report),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
            s.push('\n');
            s
        }
    };
    Ok((rendered, code))
}

fn render_csv(t: &PTable, exact: bool) -> String {
    let r = Render { exact };
    let mut out = format!("{},p\n", t.header().join(","));
    for (values, p) in t.rows() {
        for v in values {
            out.push_str(if v { "1," } else { "0," });
        }
        out.push_str(&r.p(p));
        out.push('\n');
    }
    out
}

/// Writes `<context>.csv` for every model context, plus `joint.csv` when
/// the tables join and `scenario.txt` when `scenario` is set and the
/// program maps onto a scenario. Returns the files written, in order, and
/// any analysis problem that kept the optional files from being produced.
pub fn cmd_export(
    path: &Path,
    out_dir: &Path,
    mode: EvalMode,
    tolerance: Tolerance,
    scenario: bool,
) -> Result<(Vec<PathBuf>, Option<CliError>), CliError> {
    let program = load_program(path)?;
    let exact = mode == EvalMode::Exact;
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.display().to_string(), source })?;
    let write = |name: &str, body: &str| -> Result<PathBuf, CliError> {
        let file = out_dir.join(name);
        fs::write(&file, body).map_err(|source| CliError::Io { path: file.display().to_string(), source })?;
        Ok(file)
    };

    let tables: Vec<NamedTable> =
        evaluate_contexts(&program.program().model_contexts(), mode, Execution::default());
    let mut written = Vec::new();
    for t in &tables {
        written.push(write(&format!("{}.csv", t.name), &render_csv(&t.table, exact))?);
    }

    let options = AnalysisOptions { mode, tolerance, lp_check: false, execution: Execution::default() };
    match analyze(&program, &options) {
        Ok(analysis) => {
            if let Verdict::NonContextualAcyclic { joint } = &analysis.verdict {
                written.push(write("joint.csv", &render_csv(joint, exact))?);
            }
            if let (true, Some(s)) = (scenario, &analysis.scenario) {
                written.push(write("scenario.txt", &s.dump())?);
            }
            Ok((written, None))
        }
        Err(source) => Ok((written, Some(CliError::Analysis { path: path.display().to_string(), source }))),
    }
}
