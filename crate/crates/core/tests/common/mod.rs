//! Oracles and generators shared by the integration tests. Nothing here calls
//! into the analyzer; every expected value is computed from first principles.

#![allow(dead_code)]

use std::collections::BTreeMap;

use pprog_core::frontend::{self, ComponentDef, ContextDef, Design, Ident, ModelDirective, Program, Stmt};
use pprog_core::BigRational;
use rand::rngs::StdRng;
use rand::Rng;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// `P(X = x)` for `X ~ flip(p)`.
pub fn bern(p: &BigRational, x: bool) -> BigRational {
    if x {
        p.clone()
    } else {
        q(1, 1) - p
    }
}

/// Hoeffding half-width at 99% confidence.
pub fn hoeffding(n: u64) -> f64 {
    ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt()
}

/// Grid search for `p: V -> {0, 1/32, ..., 1}` satisfying every edge and
/// agreeing with `fixed` (given in 32nds). Vertices are assigned in order;
/// an edge whose other vertices are all set forces the value of the last.
pub fn grid_feasible(n: usize, edges: &[Vec<usize>], fixed: &BTreeMap<usize, u32>) -> bool {
    const STEPS: u32 = 32;
    fn consistent(edges: &[Vec<usize>], values: &[Option<u32>]) -> bool {
        edges.iter().all(|e| {
            let mut sum = 0;
            let mut complete = true;
            for &v in e {
                match values[v] {
                    Some(x) => sum += x,
                    None => complete = false,
                }
            }
            if complete {
                sum == STEPS
            } else {
                sum <= STEPS
            }
        })
    }
    fn search(i: usize, n: usize, edges: &[Vec<usize>], values: &mut Vec<Option<u32>>) -> bool {
        if i == n {
            return true;
        }
        if values[i].is_some() {
            return search(i + 1, n, edges, values);
        }
        let forced = edges.iter().filter(|e| e.contains(&i)).find_map(|e| {
            if e.iter().all(|&v| v == i || values[v].is_some()) {
                let rest: u32 = e.iter().filter(|&&v| v != i).map(|&v| values[v].unwrap()).sum();
                Some(STEPS.checked_sub(rest))
            } else {
                None
            }
        });
        let candidates: Vec<u32> = match forced {
            Some(Some(x)) => vec![x],
            Some(None) => return false,
            None => (0..=STEPS).collect(),
        };
        for x in candidates {
            values[i] = Some(x);
            if consistent(edges, values) && search(i + 1, n, edges, values) {
                return true;
            }
        }
        values[i] = None;
        false
    }
    let mut values: Vec<Option<u32>> = (0..n).map(|v| fixed.get(&v).copied()).collect();
    if values.iter().flatten().any(|&x| x > STEPS) || !consistent(edges, &values) {
        return false;
    }
    search(0, n, edges, &mut values)
}

/// A random hypergraph on at most `max_vertices` vertices in which every
/// vertex lies on some edge.
pub fn random_hypergraph(rng: &mut StdRng, max_vertices: usize) -> (usize, Vec<Vec<usize>>) {
    let n = rng.random_range(1..=max_vertices);
    let m = rng.random_range(1..=6);
    let mut edges: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let mut e: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
            if e.is_empty() {
                e.push(rng.random_range(0..n));
            }
            e
        })
        .collect();
    for v in 0..n {
        if !edges.iter().any(|e| e.contains(&v)) {
            let k = rng.random_range(0..edges.len());
            edges[k].push(v);
            edges[k].sort_unstable();
        }
    }
    (n, edges)
}

fn ident(s: impl Into<String>) -> Ident {
    Ident::new(s)
}

/// Context measuring `x` then `y` with the given marginals and
/// `P(x = 1, y = 1) = both`, written as a flip and a conditional flip.
pub fn two_variable_context(
    name: &str,
    (x, px): (&str, &BigRational),
    (y, py): (&str, &BigRational),
    both: &BigRational,
    joint: [&str; 2],
) -> ContextDef {
    let one = q(1, 1);
    let statements = vec![
        Stmt::Flip { name: ident(x), bias: px.clone() },
        Stmt::Cond {
            name: ident(y),
            condition: ident(x),
            if_true: both / px,
            if_false: (py - both) / (&one - px),
        },
    ];
    ContextDef {
        name: ident(name),
        statements,
        joint_binding: ident("p"),
        joint: joint.iter().map(|j| ident(*j)).collect(),
        samples: 1000,
        infer_target: ident("p"),
    }
}

/// A joint cell compatible with marginals `a` and `b`, picked from five
/// evenly spaced points of the admissible interval.
pub fn random_coupling(rng: &mut StdRng, a: &BigRational, b: &BigRational) -> BigRational {
    let zero = q(0, 1);
    let lo = std::cmp::max(zero, a + b - q(1, 1));
    let hi = std::cmp::min(a.clone(), b.clone());
    let t = q(rng.random_range(0..=4), 4);
    &lo + (&hi - &lo) * t
}

/// Random two-component program with every cross pair measured once.
pub struct BipartiteCase {
    pub program: frontend::ValidatedProgram,
    /// Intended `p(X = 1)` of each variable in each context measuring it.
    pub marginals: BTreeMap<String, Vec<(String, BigRational)>>,
    pub a_vars: Vec<String>,
    pub b_vars: Vec<String>,
}

impl BipartiteCase {
    /// Whether every listed variable has the same marginal in all contexts.
    pub fn agrees_on(&self, vars: &[String]) -> bool {
        vars.iter().all(|v| {
            let ms = &self.marginals[v];
            ms.iter().all(|(_, p)| *p == ms[0].1)
        })
    }

    pub fn no_signalling(&self) -> bool {
        self.agrees_on(&self.a_vars) && self.agrees_on(&self.b_vars)
    }
}

pub fn random_bipartite(rng: &mut StdRng, design: Design) -> BipartiteCase {
    let ma = rng.random_range(1..=3);
    let mb = rng.random_range(1..=3);
    let a_vars: Vec<String> = (1..=ma).map(|i| format!("A{i}")).collect();
    let b_vars: Vec<String> = (1..=mb).map(|i| format!("B{i}")).collect();
    let base: BTreeMap<String, BigRational> =
        a_vars.iter().chain(&b_vars).map(|v| (v.clone(), q(rng.random_range(1..=9), 10))).collect();

    // (context, x, y, px, py)
    let mut plan: Vec<(String, String, String, BigRational, BigRational)> = Vec::new();
    for a in &a_vars {
        for b in &b_vars {
            let name = format!("P{}", plan.len() + 1);
            plan.push((name, a.clone(), b.clone(), base[a].clone(), base[b].clone()));
        }
    }
    if rng.random_bool(0.5) {
        let k = rng.random_range(0..plan.len());
        let slot = if rng.random_bool(0.5) { &mut plan[k].3 } else { &mut plan[k].4 };
        let mut other = q(rng.random_range(1..=9), 10);
        while other == *slot {
            other = q(rng.random_range(1..=9), 10);
        }
        *slot = other;
    }

    let mut marginals: BTreeMap<String, Vec<(String, BigRational)>> = BTreeMap::new();
    let mut contexts = Vec::new();
    for (name, a, b, pa, pb) in &plan {
        marginals.entry(a.clone()).or_default().push((name.clone(), pa.clone()));
        marginals.entry(b.clone()).or_default().push((name.clone(), pb.clone()));
        let both = random_coupling(rng, pa, pb);
        let joint = if rng.random_bool(0.5) { [a.as_str(), b.as_str()] } else { [b.as_str(), a.as_str()] };
        let ctx = if rng.random_bool(0.5) {
            two_variable_context(name, (a, pa), (b, pb), &both, joint)
        } else {
            two_variable_context(name, (b, pb), (a, pa), &both, joint)
        };
        contexts.push(ctx);
    }
    let directive = ModelDirective { design, contexts: contexts.iter().map(|c| c.name.clone()).collect() };
    let components = vec![
        ComponentDef { name: ident("A"), variables: a_vars.iter().map(ident).collect() },
        ComponentDef { name: ident("B"), variables: b_vars.iter().map(ident).collect() },
    ];
    let program = Program { components, contexts, directive };
    let program = frontend::validate(program).expect("generated program is valid");
    BipartiteCase { program, marginals, a_vars, b_vars }
}
