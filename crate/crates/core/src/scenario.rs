//! Event-level contextuality scenarios.
//!
//! A scenario is a hypergraph whose vertices are outcome events and whose
//! edges are complete measurements. Events carry the context that observed
//! them, so the same assignment seen in two contexts gives two vertices and
//! cross-context equivalences show up as extra edges instead of merged
//! vertices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::distribution::NamedTable;
use crate::frontend::ComponentDef;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("components share variable `{0}`")]
    VariableOverlap(String),
    #[error("contexts `{left}` and `{right}` do not measure the same variables")]
    HeaderMismatch { left: String, right: String },
    #[error("no table measures event {0}")]
    MissingContextTable(String),
    #[error("edge {index} is malformed: {reason}")]
    MalformedEdge { index: usize, reason: String },
    #[error("vertex {0} lies on no edge")]
    UncoveredVertex(usize),
}

/// An outcome: a value for each variable of one measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub assignment: Vec<(String, bool)>,
    pub source: Option<String>,
}

impl Event {
    pub fn new(assignment: Vec<(String, bool)>, source: Option<String>) -> Self {
        Event { assignment, source }
    }

    pub fn value(&self, var: &str) -> Option<bool> {
        self.assignment.iter().find(|(v, _)| v == var).map(|(_, b)| *b)
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.assignment.iter().map(|(v, _)| v.as_str()).collect()
    }

    /// Assignment as a set, ignoring the order of variables.
    pub fn key(&self) -> BTreeMap<&str, bool> {
        self.assignment.iter().map(|(v, b)| (v.as_str(), *b)).collect()
    }

    pub fn assignment_text(&self) -> String {
        self.assignment
            .iter()
            .map(|(v, b)| format!("{v}={}", u8::from(*b)))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Some(s) => write!(f, "{s}:{}", self.assignment_text()),
            None => write!(f, "{}", self.assignment_text()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DesignTag {
    Component,
    Order,
    Direct,
    FoulisRandall,
    /// Edges for adaptive protocols that measure `from` first.
    OneWay { from: String, to: String },
    /// Arbitrary hypergraph over marker events; no measurement structure.
    Abstract,
}

impl fmt::Display for DesignTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignTag::Component => write!(f, "component"),
            DesignTag::Order => write!(f, "order"),
            DesignTag::Direct => write!(f, "direct"),
            DesignTag::FoulisRandall => write!(f, "foulis-randall"),
            DesignTag::OneWay { from, to } => write!(f, "one-way({from}->{to})"),
            DesignTag::Abstract => write!(f, "abstract"),
        }
    }
}

/// Probability per vertex index.
pub type Assignment = BTreeMap<usize, BigRational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    vertices: Vec<Event>,
    edges: Vec<Vec<usize>>,
    design: DesignTag,
}

impl Scenario {
    /// Builds a scenario, normalizing every edge to a sorted vertex set and
    /// dropping repeated edges (the first copy keeps its position).
    pub fn new(vertices: Vec<Event>, edges: Vec<Vec<usize>>, design: DesignTag) -> Result<Self, ScenarioError> {
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (index, edge) in edges.into_iter().enumerate() {
            let set: BTreeSet<usize> = edge.into_iter().collect();
            if set.is_empty() {
                return Err(ScenarioError::MalformedEdge { index, reason: "empty edge".into() });
            }
            if let Some(&v) = set.iter().find(|&&v| v >= vertices.len()) {
                return Err(ScenarioError::MalformedEdge { index, reason: format!("unknown vertex {v}") });
            }
            let e: Vec<usize> = set.into_iter().collect();
            if seen.insert(e.clone()) {
                normalized.push(e);
            }
        }
        let covered: BTreeSet<usize> = normalized.iter().flatten().copied().collect();
        if let Some(v) = (0..vertices.len()).find(|v| !covered.contains(v)) {
            return Err(ScenarioError::UncoveredVertex(v));
        }
        let s = Scenario { vertices, edges: normalized, design };
        s.check_structure()?;
        Ok(s)
    }

    /// A hypergraph on `n` marker vertices with no measurement semantics.
    pub fn abstract_hypergraph(n: usize, edges: Vec<Vec<usize>>) -> Result<Self, ScenarioError> {
        let vertices = (0..n).map(|i| Event::new(vec![(format!("v{}", i + 1), true)], None)).collect();
        Scenario::new(vertices, edges, DesignTag::Abstract)
    }

    pub fn vertices(&self) -> &[Event] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn design(&self) -> &DesignTag {
        &self.design
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Checks that each edge's events are mutually exclusive and jointly
    /// exhaustive. Abstract scenarios have nothing to check.
    pub fn check_structure(&self) -> Result<(), ScenarioError> {
        if self.design == DesignTag::Abstract {
            return Ok(());
        }
        for (index, edge) in self.edges.iter().enumerate() {
            let events: Vec<BTreeMap<&str, bool>> = edge.iter().map(|&v| self.vertices[v].key()).collect();
            if !exclusive_exhaustive(events) {
                return Err(ScenarioError::MalformedEdge {
                    index,
                    reason: "events are not exclusive and exhaustive".into(),
                });
            }
        }
        Ok(())
    }

    /// Short vertex names. Order and product scenarios letter the vertices
    /// by source context (`p`, `q`, `r`, ...) and number them within it in
    /// presentation order; other scenarios use `v1`, `v2`, ...
    pub fn labels(&self) -> Vec<String> {
        let mut contexts: Vec<&str> = Vec::new();
        let mut counters: Vec<usize> = Vec::new();
        let mut labels = Vec::with_capacity(self.vertices.len());
        for (i, event) in self.vertices.iter().enumerate() {
            match &event.source {
                Some(src) => {
                    let k = match contexts.iter().position(|c| c == src) {
                        Some(k) => k,
                        None => {
                            contexts.push(src);
                            counters.push(0);
                            contexts.len() - 1
                        }
                    };
                    counters[k] += 1;
                    labels.push(format!("{}{}", context_letter(k), counters[k]));
                }
                None => labels.push(format!("v{}", i + 1)),
            }
        }
        labels
    }

    /// The normalization constraint of each edge, e.g. `p1 + p2 + q2 + q4 = 1`.
    pub fn constraints(&self) -> Vec<String> {
        let labels = self.labels();
        self.edges
            .iter()
            .map(|e| {
                let terms: Vec<&str> = e.iter().map(|&v| labels[v].as_str()).collect();
                format!("{} = 1", terms.join(" + "))
            })
            .collect()
    }

    pub fn edge_text(&self, edge: &[usize]) -> String {
        let labels = self.labels();
        format!("{{{}}}", edge.iter().map(|&v| labels[v].as_str()).collect::<Vec<_>>().join(","))
    }

    /// Stable text listing of vertices and edges.
    pub fn dump(&self) -> String {
        let labels = self.labels();
        let mut out = format!("design {}\nvertices {}\n", self.design, self.vertices.len());
        for (label, event) in labels.iter().zip(&self.vertices) {
            out.push_str(&format!("  {label} {event}\n"));
        }
        out.push_str(&format!("edges {}\n", self.edges.len()));
        for (i, edge) in self.edges.iter().enumerate() {
            let members: Vec<&str> = edge.iter().map(|&v| labels[v].as_str()).collect();
            out.push_str(&format!("  e{} {{{}}}\n", i + 1, members.join(",")));
        }
        out
    }

    /// Uses `source` for every vertex that lacks one, by finding the table
    /// whose header is exactly the event's variable set.
    pub fn with_sources(mut self, tables: &[NamedTable]) -> Result<Self, ScenarioError> {
        for event in &mut self.vertices {
            if event.source.is_none() {
                event.source = Some(table_for(event, tables)?.name.clone());
            }
        }
        Ok(self)
    }
}

fn context_letter(k: usize) -> String {
    const LETTERS: &[u8] = b"pqrstuvwxyz";
    match LETTERS.get(k) {
        Some(&c) => (c as char).to_string(),
        None => format!("c{}_", k + 1),
    }
}

/// Exclusive and exhaustive: either a single event with nothing left to
/// decide, or some variable fixed by every event splits them into two
/// non-empty groups that are each exclusive and exhaustive on the rest.
fn exclusive_exhaustive(events: Vec<BTreeMap<&str, bool>>) -> bool {
    match events.len() {
        0 => false,
        1 => events[0].is_empty(),
        _ => {
            if events.iter().any(|e| e.is_empty()) {
                return false;
            }
            let common: Vec<&str> =
                events[0].keys().filter(|v| events.iter().all(|e| e.contains_key(*v))).copied().collect();
            common.into_iter().any(|var| {
                let (mut ones, mut zeros) = (Vec::new(), Vec::new());
                for e in &events {
                    let mut rest = e.clone();
                    let value = rest.remove(var).expect("common variable");
                    if value {
                        ones.push(rest);
                    } else {
                        zeros.push(rest);
                    }
                }
                !ones.is_empty() && !zeros.is_empty() && exclusive_exhaustive(ones) && exclusive_exhaustive(zeros)
            })
        }
    }
}

fn table_for<'a>(event: &Event, tables: &'a [NamedTable]) -> Result<&'a NamedTable, ScenarioError> {
    if let Some(src) = &event.source {
        return tables
            .iter()
            .find(|t| &t.name == src)
            .ok_or_else(|| ScenarioError::MissingContextTable(event.to_string()));
    }
    let vars = event.variables();
    let mut matching = tables
        .iter()
        .filter(|t| t.table.header().iter().map(String::as_str).collect::<BTreeSet<_>>() == vars);
    match (matching.next(), matching.next()) {
        (Some(t), None) => Ok(t),
        _ => Err(ScenarioError::MissingContextTable(event.to_string())),
    }
}

/// One two-outcome edge per variable of the component.
pub fn component_scenario(component: &ComponentDef) -> Scenario {
    let vars: Vec<String> = component.variables.iter().map(|v| v.name.clone()).collect();
    component_scenario_of(&vars)
}

pub fn component_scenario_of<S: AsRef<str>>(variables: &[S]) -> Scenario {
    let mut vertices = Vec::with_capacity(2 * variables.len());
    let mut edges = Vec::with_capacity(variables.len());
    for (i, v) in variables.iter().enumerate() {
        for value in [true, false] {
            vertices.push(Event::new(vec![(v.as_ref().to_string(), value)], None));
        }
        edges.push(vec![2 * i, 2 * i + 1]);
    }
    Scenario::new(vertices, edges, DesignTag::Component).expect("component edges are well formed")
}

fn product_vertices(xa: &Scenario, xb: &Scenario) -> Result<Vec<Event>, ScenarioError> {
    let a_vars: BTreeSet<&str> = xa.vertices.iter().flat_map(|e| e.variables()).collect();
    if let Some(v) = xb.vertices.iter().flat_map(|e| e.variables()).find(|v| a_vars.contains(v)) {
        return Err(ScenarioError::VariableOverlap(v.to_string()));
    }
    let mut out = Vec::with_capacity(xa.vertices.len() * xb.vertices.len());
    for a in &xa.vertices {
        for b in &xb.vertices {
            let mut assignment = a.assignment.clone();
            assignment.extend(b.assignment.iter().cloned());
            out.push(Event::new(assignment, None));
        }
    }
    Ok(out)
}

fn direct_edges(xa: &Scenario, xb: &Scenario) -> Vec<Vec<usize>> {
    let nb = xb.vertices.len();
    let mut edges = Vec::new();
    for ea in &xa.edges {
        for eb in &xb.edges {
            edges.push(ea.iter().flat_map(|&i| eb.iter().map(move |&j| i * nb + j)).collect());
        }
    }
    edges
}

/// Edges of adaptive protocols that measure the first scenario, then choose
/// an edge of the second one depending on the outcome. `index(i, j)` gives
/// the product vertex of first-vertex `i` and second-vertex `j`.
fn adaptive_edges(first: &Scenario, second: &Scenario, index: impl Fn(usize, usize) -> usize) -> Vec<Vec<usize>> {
    let choices = second.edges.len();
    let mut edges = Vec::new();
    for ea in &first.edges {
        let total = choices.pow(ea.len() as u32);
        for mut f in 0..total {
            let mut edge = Vec::new();
            for &v in ea {
                let eb = &second.edges[f % choices];
                f /= choices;
                edge.extend(eb.iter().map(|&w| index(v, w)));
            }
            edges.push(edge);
        }
    }
    edges
}

pub fn direct_product(xa: &Scenario, xb: &Scenario) -> Result<Scenario, ScenarioError> {
    let vertices = product_vertices(xa, xb)?;
    Scenario::new(vertices, direct_edges(xa, xb), DesignTag::Direct)
}

/// Foulis-Randall product: the direct edges plus adaptive edges in both
/// directions.
pub fn fr_product(xa: &Scenario, xb: &Scenario) -> Result<Scenario, ScenarioError> {
    let vertices = product_vertices(xa, xb)?;
    let nb = xb.vertices.len();
    let mut edges = direct_edges(xa, xb);
    edges.extend(adaptive_edges(xa, xb, |i, j| i * nb + j));
    edges.extend(adaptive_edges(xb, xa, |j, i| i * nb + j));
    Scenario::new(vertices, edges, DesignTag::FoulisRandall)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FirstToSecond,
    SecondToFirst,
}

/// Only the adaptive edges that start on the `from` side. Their
/// normalization pins down the `from` marginals while leaving the other
/// side free to depend on the `from` measurement.
pub fn fr_oneway(xa: &Scenario, xb: &Scenario, direction: Direction, names: (&str, &str)) -> Result<Scenario, ScenarioError> {
    let vertices = product_vertices(xa, xb)?;
    let nb = xb.vertices.len();
    let (edges, design) = match direction {
        Direction::FirstToSecond => (
            adaptive_edges(xa, xb, |i, j| i * nb + j),
            DesignTag::OneWay { from: names.0.into(), to: names.1.into() },
        ),
        Direction::SecondToFirst => (
            adaptive_edges(xb, xa, |j, i| i * nb + j),
            DesignTag::OneWay { from: names.1.into(), to: names.0.into() },
        ),
    };
    Scenario::new(vertices, edges, design)
}

/// Two contexts measuring the same variables in different orders.
///
/// Besides the two context edges, the scenario has two substitution edges
/// built around the first variable `x` of the first context's header: one
/// joins the first context's `x = 1` events with the second context's
/// `x = 0` events, the other the converse. When both headers list the
/// variables in the same order the contexts are indistinguishable and only
/// the two context edges remain.
pub fn order_scenario(t1: &NamedTable, t2: &NamedTable) -> Result<Scenario, ScenarioError> {
    let (h1, h2) = (t1.table.header(), t2.table.header());
    let s1: BTreeSet<&String> = h1.iter().collect();
    let s2: BTreeSet<&String> = h2.iter().collect();
    if s1 != s2 {
        return Err(ScenarioError::HeaderMismatch { left: t1.name.clone(), right: t2.name.clone() });
    }
    let mut vertices = Vec::new();
    for t in [t1, t2] {
        for (values, _) in t.table.rows() {
            let assignment = t.table.header().iter().cloned().zip(values).collect();
            vertices.push(Event::new(assignment, Some(t.name.clone())));
        }
    }
    let n1 = t1.table.row_count();
    let first: Vec<usize> = (0..n1).collect();
    let second: Vec<usize> = (n1..vertices.len()).collect();
    let mut edges = vec![first.clone(), second.clone()];
    if h1 != h2 {
        let pivot = &h1[0];
        let with = |vs: &[usize], value: bool| -> Vec<usize> {
            vs.iter().copied().filter(|&v| vertices[v].value(pivot) == Some(value)).collect()
        };
        edges.push([with(&first, true), with(&second, false)].concat());
        edges.push([with(&first, false), with(&second, true)].concat());
    }
    Scenario::new(vertices, edges, DesignTag::Order)
}

/// Row probability of each vertex in its source context's table.
pub fn observed_assignment(s: &Scenario, tables: &[NamedTable]) -> Result<Assignment, ScenarioError> {
    let mut out = Assignment::new();
    for (i, event) in s.vertices.iter().enumerate() {
        let table = table_for(event, tables)?;
        let p = table
            .table
            .prob_named(&event.assignment)
            .map_err(|_| ScenarioError::MissingContextTable(event.to_string()))?;
        out.insert(i, p.clone());
    }
    Ok(out)
}
