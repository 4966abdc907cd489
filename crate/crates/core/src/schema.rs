//! Variable-level hypergraph of p-table headers: Graham (GYO) reduction,
//! acyclicity and join-tree construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::distribution::NamedTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("context `{0}` contributes two tables")]
    DuplicateContextName(String),
    #[error("a schema needs at least one table")]
    Empty,
    #[error("the schema is cyclic; residual edges: {0}")]
    CyclicSchema(String),
}

/// One hyperedge: the header of one context's table, in header order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaEdge {
    pub context: String,
    pub variables: Vec<String>,
}

impl SchemaEdge {
    pub fn new(context: impl Into<String>, variables: Vec<String>) -> Self {
        SchemaEdge { context: context.into(), variables }
    }

    fn set(&self) -> BTreeSet<&str> {
        self.variables.iter().map(String::as_str).collect()
    }

    fn contains_all(&self, other: &SchemaEdge) -> bool {
        other.variables.iter().all(|v| self.variables.contains(v))
    }
}

impl fmt::Display for SchemaEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.variables.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaHypergraph {
    nodes: BTreeSet<String>,
    edges: Vec<SchemaEdge>,
}

impl SchemaHypergraph {
    pub fn from_edges(edges: Vec<SchemaEdge>) -> Result<Self, SchemaError> {
        if edges.is_empty() {
            return Err(SchemaError::Empty);
        }
        let mut names = BTreeSet::new();
        for e in &edges {
            if !names.insert(e.context.as_str()) {
                return Err(SchemaError::DuplicateContextName(e.context.clone()));
            }
        }
        let nodes = edges.iter().flat_map(|e| e.variables.iter().cloned()).collect();
        Ok(SchemaHypergraph { nodes, edges })
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &[SchemaEdge] {
        &self.edges
    }

    pub fn edge(&self, context: &str) -> Option<&SchemaEdge> {
        self.edges.iter().find(|e| e.context == context)
    }
}

/// One edge per table, nodes are the union of the headers.
pub fn build_schema(tables: &[NamedTable]) -> Result<SchemaHypergraph, SchemaError> {
    SchemaHypergraph::from_edges(
        tables.iter().map(|t| SchemaEdge::new(t.name.clone(), t.table.header().to_vec())).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrahamStep {
    /// The edge of `edge` is contained in the edge of `contained_in`.
    DeleteEdge { edge: String, contained_in: String },
    /// `node` occurs only in the edge of `sole_edge`. An edge emptied by
    /// this deletion disappears with it.
    DeleteNode { node: String, sole_edge: String },
}

impl fmt::Display for GrahamStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrahamStep::DeleteEdge { edge, contained_in } => {
                write!(f, "delete edge of {edge} (contained in edge of {contained_in})")
            }
            GrahamStep::DeleteNode { node, sole_edge } => write!(f, "delete node {node} (only in edge of {sole_edge})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrahamTrace {
    pub initial: Vec<SchemaEdge>,
    pub steps: Vec<GrahamStep>,
    pub residual: Vec<SchemaEdge>,
}

impl GrahamTrace {
    /// Edge configurations after 0, 1, ... steps.
    pub fn states(&self) -> Vec<Vec<SchemaEdge>> {
        let mut state = self.initial.clone();
        let mut out = vec![state.clone()];
        for step in &self.steps {
            apply(&mut state, step);
            out.push(state.clone());
        }
        out
    }

    /// Replaying the steps from the initial edges reproduces the residual.
    pub fn replays(&self) -> bool {
        self.states().last() == Some(&self.residual)
    }

    /// Numbered configurations, one per line, ending with `∅` when the
    /// hypergraph empties:
    ///
    /// ```text
    /// 1. {A1,B1}, {A1,B2}, {A2,B1}, {A3,B2}
    /// 2. {A1,B1}, {A1,B2}, {A2,B1}, {B2}
    /// ```
    pub fn render(&self) -> String {
        self.states()
            .iter()
            .enumerate()
            .map(|(i, state)| {
                let body = if state.is_empty() {
                    "∅".to_string()
                } else {
                    state.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
                };
                format!("{}. {}\n", i + 1, body)
            })
            .collect()
    }
}

fn apply(state: &mut Vec<SchemaEdge>, step: &GrahamStep) {
    match step {
        GrahamStep::DeleteEdge { edge, .. } => state.retain(|e| &e.context != edge),
        GrahamStep::DeleteNode { node, sole_edge } => {
            if let Some(e) = state.iter_mut().find(|e| &e.context == sole_edge) {
                e.variables.retain(|v| v != node);
            }
            state.retain(|e| !e.variables.is_empty());
        }
    }
}

/// Every rule application available in `state`.
///
/// Edge deletions come first, scanning from the last edge; then node
/// deletions, scanning edges and their variables from the back. Taking the
/// first candidate each time reproduces the conventional worked example
/// step for step.
pub fn graham_candidates(state: &[SchemaEdge]) -> Vec<GrahamStep> {
    let mut out = Vec::new();
    for (i, e) in state.iter().enumerate().rev() {
        // a duplicate edge counts as contained in its earlier copy only, so
        // one copy always survives
        let container = state.iter().enumerate().find(|(j, other)| {
            *j != i && other.contains_all(e) && (other.variables.len() > e.variables.len() || *j < i)
        });
        if let Some((_, c)) = container {
            out.push(GrahamStep::DeleteEdge { edge: e.context.clone(), contained_in: c.context.clone() });
        }
    }
    for e in state.iter().rev() {
        for v in e.variables.iter().rev() {
            let occurrences = state.iter().filter(|o| o.variables.contains(v)).count();
            if occurrences == 1 {
                out.push(GrahamStep::DeleteNode { node: v.clone(), sole_edge: e.context.clone() });
            }
        }
    }
    out
}

/// Applies the two deletion rules to a fixed point, choosing among the
/// available steps with `pick` (which receives the candidates and returns an
/// index into them).
pub fn graham_reduce_by<F>(h: &SchemaHypergraph, mut pick: F) -> GrahamTrace
where
    F: FnMut(&[GrahamStep]) -> usize,
{
    let initial = h.edges.clone();
    let mut state = initial.clone();
    let mut steps = Vec::new();
    loop {
        let candidates = graham_candidates(&state);
        if candidates.is_empty() {
            break;
        }
        let step = candidates[pick(&candidates).min(candidates.len() - 1)].clone();
        apply(&mut state, &step);
        steps.push(step);
    }
    GrahamTrace { initial, steps, residual: state }
}

pub fn graham_reduce(h: &SchemaHypergraph) -> GrahamTrace {
    graham_reduce_by(h, |_| 0)
}

pub fn is_acyclic(h: &SchemaHypergraph) -> bool {
    graham_reduce(h).residual.is_empty()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEdge {
    pub a: String,
    pub b: String,
    /// Shared variables, sorted by name.
    pub separator: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinTree {
    /// Context names, sorted.
    pub nodes: Vec<String>,
    /// Edges with `a < b`, sorted.
    pub edges: Vec<TreeEdge>,
    /// Tree construction ordering: each context after the first is adjacent
    /// in the tree to one of its predecessors.
    pub ordering: Vec<String>,
    variables: BTreeMap<String, BTreeSet<String>>,
}

impl JoinTree {
    pub fn variables_of(&self, context: &str) -> Option<&BTreeSet<String>> {
        self.variables.get(context)
    }

    pub fn neighbours(&self, context: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.a == context {
                    Some(e.b.as_str())
                } else if e.b == context {
                    Some(e.a.as_str())
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Tree edge between two contexts, in either orientation.
    pub fn edge_between(&self, x: &str, y: &str) -> Option<&TreeEdge> {
        self.edges.iter().find(|e| (e.a == x && e.b == y) || (e.a == y && e.b == x))
    }

    /// Unique tree path between two nodes, endpoints included.
    pub fn path(&self, from: &str, to: &str) -> Option<Vec<&str>> {
        fn walk<'a>(tree: &'a JoinTree, at: &'a str, to: &str, parent: Option<&str>, acc: &mut Vec<&'a str>) -> bool {
            acc.push(at);
            if at == to {
                return true;
            }
            for n in tree.neighbours(at) {
                if Some(n) != parent && walk(tree, n, to, Some(at), acc) {
                    return true;
                }
            }
            acc.pop();
            false
        }
        let start = self.nodes.iter().find(|n| n.as_str() == from)?;
        let mut acc = Vec::new();
        walk(self, start, to, None, &mut acc).then_some(acc)
    }

    pub fn is_spanning_tree(&self) -> bool {
        if self.edges.len() + 1 != self.nodes.len() {
            return false;
        }
        let first = &self.nodes[0];
        self.nodes.iter().all(|n| self.path(first, n).is_some())
    }

    /// For every pair of nodes, their shared variables appear in every node
    /// on the path between them.
    pub fn satisfies_running_intersection(&self) -> bool {
        for (i, x) in self.nodes.iter().enumerate() {
            for y in &self.nodes[i + 1..] {
                let shared: BTreeSet<&String> = self.variables[x].intersection(&self.variables[y]).collect();
                let Some(path) = self.path(x, y) else { return false };
                if !path.iter().all(|n| shared.iter().all(|v| self.variables[*n].contains(*v))) {
                    return false;
                }
            }
        }
        true
    }
}

/// Maximum-weight spanning tree of the edge-intersection graph (weight =
/// number of shared variables), ties broken by context name. Edges with an
/// empty intersection are used only to connect otherwise disjoint parts.
pub fn join_tree(h: &SchemaHypergraph) -> Result<JoinTree, SchemaError> {
    let trace = graham_reduce(h);
    if !trace.residual.is_empty() {
        let residual = trace.residual.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        return Err(SchemaError::CyclicSchema(residual));
    }

    let mut edges: Vec<&SchemaEdge> = h.edges.iter().collect();
    edges.sort_by(|x, y| x.context.cmp(&y.context));
    let nodes: Vec<String> = edges.iter().map(|e| e.context.clone()).collect();
    let variables: BTreeMap<String, BTreeSet<String>> =
        edges.iter().map(|e| (e.context.clone(), e.variables.iter().cloned().collect())).collect();

    let mut candidates = Vec::new();
    for (i, x) in edges.iter().enumerate() {
        for (j, y) in edges.iter().enumerate().skip(i + 1) {
            let sep: Vec<String> = x.set().intersection(&y.set()).map(|s| s.to_string()).collect();
            candidates.push((sep.len(), i, j, sep));
        }
    }
    // heavier first, then lexicographic on (a, b) since nodes are sorted
    candidates.sort_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));

    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut tree_edges = Vec::new();
    for (_, i, j, sep) in candidates {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            tree_edges.push(TreeEdge { a: nodes[i].clone(), b: nodes[j].clone(), separator: sep });
        }
    }
    tree_edges.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));

    let mut tree = JoinTree { nodes, edges: tree_edges, ordering: Vec::new(), variables };
    tree.ordering = construction_ordering(&tree);
    debug_assert!(tree.satisfies_running_intersection());
    Ok(tree)
}

/// Starts at the lexicographically least leaf and repeatedly appends the
/// least unvisited node adjacent to the visited set.
fn construction_ordering(tree: &JoinTree) -> Vec<String> {
    let start = tree
        .nodes
        .iter()
        .find(|n| tree.neighbours(n).len() <= 1)
        .unwrap_or(&tree.nodes[0])
        .clone();
    let mut visited = vec![start];
    while visited.len() < tree.nodes.len() {
        let next = tree
            .nodes
            .iter()
            .filter(|n| !visited.contains(n))
            .find(|n| tree.neighbours(n).iter().any(|m| visited.iter().any(|v| v == m)))
            .expect("spanning tree is connected")
            .clone();
        visited.push(next);
    }
    visited
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hypergraph(edges: &[(&str, &[&str])]) -> SchemaHypergraph {
        SchemaHypergraph::from_edges(
            edges
                .iter()
                .map(|(c, vs)| SchemaEdge::new(*c, vs.iter().map(|v| v.to_string()).collect()))
                .collect(),
        )
        .unwrap()
    }

    fn coins() -> SchemaHypergraph {
        hypergraph(&[("P1", &["A1", "B1"]), ("P2", &["A1", "B2"]), ("P3", &["A2", "B1"]), ("P4", &["A3", "B2"])])
    }

    fn bell() -> SchemaHypergraph {
        hypergraph(&[("P1", &["A1", "B1"]), ("P2", &["A1", "B2"]), ("P3", &["A2", "B1"]), ("P4", &["A2", "B2"])])
    }

    #[test]
    fn nodes_are_the_union() {
        let h = coins();
        let nodes: Vec<&str> = h.nodes().iter().map(String::as_str).collect();
        assert_eq!(nodes, ["A1", "A2", "A3", "B1", "B2"]);
        assert_eq!(h.edges().len(), 4);
    }

    #[test]
    fn duplicate_context_rejected() {
        let err = SchemaHypergraph::from_edges(vec![
            SchemaEdge::new("P1", vec!["A".into()]),
            SchemaEdge::new("P1", vec!["B".into()]),
        ])
        .unwrap_err();
        assert_eq!(err, SchemaError::DuplicateContextName("P1".into()));
    }

    #[test]
    fn worked_example_trace() {
        let trace = graham_reduce(&coins());
        assert!(trace.residual.is_empty());
        assert_eq!(trace.steps.len(), 8);
        assert!(trace.replays());
        let expected = "\
1. {A1,B1}, {A1,B2}, {A2,B1}, {A3,B2}
2. {A1,B1}, {A1,B2}, {A2,B1}, {B2}
3. {A1,B1}, {A1,B2}, {A2,B1}
4. {A1,B1}, {A1,B2}, {B1}
5. {A1,B1}, {A1,B2}
6. {A1,B1}, {A1}
7. {A1,B1}
8. {A1}
9. ∅
";
        assert_eq!(trace.render(), expected);
    }

    #[test]
    fn bell_schema_is_cyclic() {
        let trace = graham_reduce(&bell());
        assert_eq!(trace.residual.len(), 4);
        assert!(trace.steps.is_empty());
        assert!(!is_acyclic(&bell()));
        assert!(matches!(join_tree(&bell()), Err(SchemaError::CyclicSchema(_))));
    }

    #[test]
    fn triangle_is_stuck() {
        let h = hypergraph(&[("X", &["A", "B"]), ("Y", &["B", "C"]), ("Z", &["C", "A"])]);
        let trace = graham_reduce(&h);
        assert_eq!(trace.residual, h.edges());
        assert!(!is_acyclic(&h));
    }

    #[test]
    fn equal_edges_reduce_to_one() {
        let h = hypergraph(&[("P1", &["A", "B"]), ("P2", &["B", "A"])]);
        let trace = graham_reduce(&h);
        assert_eq!(trace.steps[0], GrahamStep::DeleteEdge { edge: "P2".into(), contained_in: "P1".into() });
        assert!(trace.residual.is_empty());
    }

    #[test]
    fn coins_join_tree() {
        let jt = join_tree(&coins()).unwrap();
        let edges: Vec<(&str, &str, Vec<&str>)> = jt
            .edges
            .iter()
            .map(|e| (e.a.as_str(), e.b.as_str(), e.separator.iter().map(String::as_str).collect()))
            .collect();
        assert_eq!(edges, vec![("P1", "P2", vec!["A1"]), ("P1", "P3", vec!["B1"]), ("P2", "P4", vec!["B2"])]);
        assert_eq!(jt.ordering, ["P3", "P1", "P2", "P4"]);
        assert!(jt.is_spanning_tree());
        assert!(jt.satisfies_running_intersection());
    }

    #[test]
    fn single_and_pair_trees() {
        let one = join_tree(&hypergraph(&[("P", &["A", "B"])])).unwrap();
        assert!(one.edges.is_empty());
        assert_eq!(one.ordering, ["P"]);

        let two = join_tree(&hypergraph(&[("Q", &["B", "C"]), ("P", &["A", "B"])])).unwrap();
        assert_eq!(two.edges, vec![TreeEdge { a: "P".into(), b: "Q".into(), separator: vec!["B".into()] }]);
        assert_eq!(two.ordering, ["P", "Q"]);
    }

    #[test]
    fn disjoint_tables_connect_through_empty_separator() {
        let jt = join_tree(&hypergraph(&[("P", &["A"]), ("Q", &["B"])])).unwrap();
        assert_eq!(jt.edges.len(), 1);
        assert!(jt.edges[0].separator.is_empty());
    }

    fn arb_hypergraph(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = SchemaHypergraph> {
        proptest::collection::vec(proptest::collection::btree_set(0..max_nodes, 1..=max_nodes.min(4)), 1..=max_edges)
            .prop_map(|sets| {
                SchemaHypergraph::from_edges(
                    sets.into_iter()
                        .enumerate()
                        .map(|(i, s)| SchemaEdge::new(format!("C{i}"), s.into_iter().map(|v| format!("V{v}")).collect()))
                        .collect(),
                )
                .unwrap()
            })
    }

    fn residual_key(edges: &[SchemaEdge]) -> Vec<BTreeSet<String>> {
        let mut key: Vec<BTreeSet<String>> = edges.iter().map(|e| e.variables.iter().cloned().collect()).collect();
        key.sort();
        key
    }

    proptest! {
        #[test]
        fn reduction_is_confluent(h in arb_hypergraph(8, 6), choices in proptest::collection::vec(any::<usize>(), 64)) {
            let reference = graham_reduce(&h);
            let mut k = 0;
            let random = graham_reduce_by(&h, |c| { k += 1; choices[k % choices.len()] % c.len() });
            prop_assert!(random.replays());
            prop_assert_eq!(residual_key(&reference.residual), residual_key(&random.residual));
        }

        #[test]
        fn reduction_is_idempotent(h in arb_hypergraph(8, 6)) {
            let trace = graham_reduce(&h);
            if !trace.residual.is_empty() {
                let again = graham_reduce(&SchemaHypergraph::from_edges(trace.residual.clone()).unwrap());
                prop_assert!(again.steps.is_empty());
                prop_assert_eq!(again.residual, trace.residual);
            }
        }

        #[test]
        fn join_tree_iff_acyclic(h in arb_hypergraph(6, 6)) {
            match join_tree(&h) {
                Ok(jt) => {
                    prop_assert!(is_acyclic(&h));
                    prop_assert!(jt.is_spanning_tree());
                    prop_assert!(jt.satisfies_running_intersection());
                    prop_assert_eq!(jt.ordering.len(), h.edges().len());
                }
                Err(_) => prop_assert!(!is_acyclic(&h)),
            }
        }
    }
}
