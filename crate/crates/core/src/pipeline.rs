//! End-to-end analysis of a validated program.
//!
//! Contexts are evaluated first. The directive then selects a route:
//!
//! * `auto` with two contexts over the same variables in different orders,
//!   or an explicit `order` design, goes through the order scenario;
//! * `no-signal` and `signal(..)` build Foulis-Randall style products of
//!   the two components;
//! * any other `auto` program must have an acyclic schema and is joined.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use thiserror::Error;

use crate::distribution::{NamedTable, TableMode};
use crate::evaluator::evaluate_contexts;
use crate::exec::Execution;
use crate::feasibility::{lp_feasible, verify_assignment_with, EdgeViolation, FeasibilityError, LpOutcome, MarginalDiscrepancy, Verdict};
use crate::frontend::{Design, ValidatedProgram};
use crate::joiner::{check_marginal_consistency, join_all, ConsistencyReport, JoinError};
use crate::scenario::{
    component_scenario, fr_oneway, fr_product, observed_assignment, order_scenario, Assignment, Direction, Scenario,
    ScenarioError,
};
use crate::schema::{build_schema, graham_reduce, join_tree, GrahamTrace, JoinTree, SchemaError, SchemaHypergraph};

pub use crate::distribution::Tolerance;
pub use crate::evaluator::EvalMode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unsupported schema: {0}")]
    UnsupportedSchema(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Join(#[from] JoinError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnalysisOptions {
    pub mode: EvalMode,
    pub tolerance: Tolerance,
    /// Also decide whether the scenario admits any model at all.
    pub lp_check: bool,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Route {
    Acyclic,
    Order,
    NoSignal,
    Signal { from: String, to: String },
}

#[derive(Debug, Clone)]
pub struct Analysis {
    /// One table per model context, in directive order.
    pub contexts: Vec<NamedTable>,
    pub schema: SchemaHypergraph,
    pub graham: GrahamTrace,
    pub acyclic: bool,
    pub route: Route,
    pub join_tree: Option<JoinTree>,
    pub consistency: Option<ConsistencyReport>,
    pub scenario: Option<Scenario>,
    pub observed: Option<Assignment>,
    pub violations: Vec<EdgeViolation>,
    pub lp: Option<LpOutcome>,
    pub verdict: Verdict,
}

fn route_for(program: &ValidatedProgram, tables: &[NamedTable], acyclic: bool) -> Result<Route, AnalysisError> {
    let same_variables = |t: &[NamedTable]| {
        t.len() == 2 && {
            let a: BTreeSet<&String> = t[0].table.header().iter().collect();
            let b: BTreeSet<&String> = t[1].table.header().iter().collect();
            a == b
        }
    };
    match &program.program().directive.design {
        Design::Order => {
            if same_variables(tables) {
                Ok(Route::Order)
            } else {
                Err(AnalysisError::UnsupportedSchema(
                    "an order design needs exactly two contexts over the same variables".into(),
                ))
            }
        }
        Design::NoSignal => Ok(Route::NoSignal),
        Design::Signal { from, to } => Ok(Route::Signal { from: from.name.clone(), to: to.name.clone() }),
        Design::Auto => {
            if same_variables(tables) && tables[0].table.header() != tables[1].table.header() {
                Ok(Route::Order)
            } else if acyclic {
                Ok(Route::Acyclic)
            } else {
                Err(AnalysisError::UnsupportedSchema(
                    "the schema is cyclic and the program neither lists two orders of one measurement nor declares \
                     a no-signal or signal design over two components"
                        .into(),
                ))
            }
        }
    }
}

/// Variables whose marginals the scenario's edges tie across contexts.
fn constrained_variables(program: &ValidatedProgram, route: &Route, tables: &[NamedTable]) -> Vec<String> {
    match route {
        Route::Acyclic => Vec::new(),
        Route::Order => vec![tables[0].table.header()[0].clone()],
        Route::NoSignal => {
            let b = program.bipartite().expect("validated bipartite design");
            b.first.variables.iter().chain(&b.second.variables).map(|v| v.name.clone()).collect()
        }
        Route::Signal { .. } => {
            let b = program.bipartite().expect("validated bipartite design");
            b.first.variables.iter().map(|v| v.name.clone()).collect()
        }
    }
}

fn discrepancies(variables: &[String], tables: &[NamedTable], tol: &Tolerance) -> Vec<MarginalDiscrepancy> {
    let mut out = Vec::new();
    for var in variables {
        let measuring: Vec<&NamedTable> = tables.iter().filter(|t| t.table.position(var).is_some()).collect();
        if measuring.len() < 2 {
            continue;
        }
        let values: Vec<(String, BigRational)> = measuring
            .iter()
            .map(|t| (t.name.clone(), t.table.prob_true(var).expect("variable is in the header")))
            .collect();
        let mode = measuring.iter().map(|t| t.table.mode()).fold(TableMode::Exact, TableMode::combine);
        let d = MarginalDiscrepancy { variable: var.clone(), values };
        if d.spread() > tol.cell(mode, mode) {
            out.push(d);
        }
    }
    out
}

fn build_scenario(program: &ValidatedProgram, route: &Route, tables: &[NamedTable]) -> Result<Scenario, AnalysisError> {
    match route {
        Route::Acyclic => unreachable!("acyclic programs are joined"),
        Route::Order => Ok(order_scenario(&tables[0], &tables[1])?),
        Route::NoSignal | Route::Signal { .. } => {
            let b = program.bipartite().expect("validated bipartite design");
            let (xa, xb) = (component_scenario(&b.first), component_scenario(&b.second));
            let s = if let Route::Signal { .. } = route {
                fr_oneway(&xa, &xb, Direction::FirstToSecond, (b.first.name.as_str(), b.second.name.as_str()))?
            } else {
                fr_product(&xa, &xb)?
            };
            Ok(s.with_sources(tables)?)
        }
    }
}

pub fn analyze(program: &ValidatedProgram, options: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
    let contexts = program.program().model_contexts();
    let tables = evaluate_contexts(&contexts, options.mode, options.execution);
    let schema = build_schema(&tables)?;
    let graham = graham_reduce(&schema);
    let acyclic = graham.residual.is_empty();
    let route = route_for(program, &tables, acyclic)?;

    if route == Route::Acyclic {
        let jt = join_tree(&schema)?;
        let report = check_marginal_consistency(&jt, &tables, &options.tolerance)?;
        let verdict = if report.passes() {
            Verdict::NonContextualAcyclic { joint: join_all(&jt, &tables, &options.tolerance)? }
        } else {
            Verdict::InconsistentAcyclic { report: report.clone() }
        };
        return Ok(Analysis {
            contexts: tables,
            schema,
            graham,
            acyclic,
            route,
            join_tree: Some(jt),
            consistency: Some(report),
            scenario: None,
            observed: None,
            violations: Vec::new(),
            lp: None,
            verdict,
        });
    }

    let scenario = build_scenario(program, &route, &tables)?;
    let observed = observed_assignment(&scenario, &tables)?;
    let samples: BTreeMap<&str, Option<u64>> = tables.iter().map(|t| (t.name.as_str(), t.table.mode().samples())).collect();
    let violations = verify_assignment_with(&scenario, &observed, |edge| {
        let n = edge
            .iter()
            .filter_map(|&v| scenario.vertices()[v].source.as_deref().and_then(|s| samples.get(s).copied().flatten()))
            .min();
        options.tolerance.sum(edge.len(), n)
    })?;
    let lp = options.lp_check.then(|| lp_feasible(&scenario, &Assignment::new()));

    let verdict = match (&lp, violations.is_empty()) {
        (Some(LpOutcome::Infeasible), _) => Verdict::ScenarioInfeasible,
        (_, true) => Verdict::NonContextualScenario {
            model: observed.clone(),
            witness: match &lp {
                Some(LpOutcome::Feasible(w)) => Some(w.clone()),
                _ => None,
            },
        },
        (_, false) => Verdict::StrongContextual {
            violated_edges: violations.clone(),
            discrepancies: discrepancies(&constrained_variables(program, &route, &tables), &tables, &options.tolerance),
        },
    };
    Ok(Analysis {
        contexts: tables,
        schema,
        graham,
        acyclic,
        route,
        join_tree: None,
        consistency: None,
        scenario: Some(scenario),
        observed: Some(observed),
        violations,
        lp,
        verdict,
    })
}

pub fn verdict(program: &ValidatedProgram, options: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    analyze(program, options).map(|a| a.verdict)
}

/// Analyzes independent programs, in parallel when `exec` allows it.
pub fn analyze_batch(
    programs: &[ValidatedProgram],
    options: &AnalysisOptions,
    exec: Execution,
) -> Vec<Result<Analysis, AnalysisError>> {
    exec.map(programs, |p| analyze(p, options))
}
