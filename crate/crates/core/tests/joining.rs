mod common;

use common::{bern, fixture, q};
use pprog_core::distribution::{NamedTable, PTable, TableMode, Tolerance};
use pprog_core::evaluator::{evaluate_contexts, EvalMode};
use pprog_core::frontend;
use pprog_core::joiner::{join_all, verify_recovery};
use pprog_core::schema::{build_schema, is_acyclic, join_tree, JoinTree};
use pprog_core::{BigRational, Execution};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn coins() -> Vec<NamedTable> {
    let program = frontend::load(&fixture("coins_acyclic.pp")).unwrap();
    evaluate_contexts(&program.program().model_contexts(), EvalMode::Exact, Execution::Sequential)
}

/// Every ordering in which each node after the first touches an earlier one.
fn valid_orderings(jt: &JoinTree) -> Vec<Vec<String>> {
    fn extend(jt: &JoinTree, prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if prefix.len() == jt.nodes.len() {
            out.push(prefix.clone());
            return;
        }
        for n in &jt.nodes {
            if prefix.contains(n) {
                continue;
            }
            if !prefix.is_empty() && !jt.neighbours(n).iter().any(|m| prefix.iter().any(|p| p == m)) {
                continue;
            }
            prefix.push(n.clone());
            extend(jt, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(jt, &mut Vec::new(), &mut out);
    out
}

#[test]
fn join_is_independent_of_the_ordering() {
    let tables = coins();
    let jt = join_tree(&build_schema(&tables).unwrap()).unwrap();
    let reference = join_all(&jt, &tables, &Tolerance::Auto).unwrap();
    let orderings = valid_orderings(&jt);
    assert!(orderings.len() > 1);
    for ordering in orderings {
        let mut alt = jt.clone();
        alt.ordering = ordering.clone();
        let joint = join_all(&alt, &tables, &Tolerance::Auto).unwrap();
        assert_eq!(joint.marginal_distance(&reference).unwrap(), q(0, 1), "{ordering:?}");
    }
}

#[test]
fn joint_encodes_conditional_independence_along_the_tree() {
    let tables = coins();
    let jt = join_tree(&build_schema(&tables).unwrap()).unwrap();
    let joint = join_all(&jt, &tables, &Tolerance::Auto).unwrap();
    let m = joint.marginalize(&["A2", "A1", "B1"]).unwrap();
    let pb = joint.marginalize(&["B1"]).unwrap();
    let pa2b = joint.marginalize(&["A2", "B1"]).unwrap();
    let pa1b = joint.marginalize(&["A1", "B1"]).unwrap();
    for a2 in [true, false] {
        for a1 in [true, false] {
            for b in [true, false] {
                let denom = pb.prob(&[b]);
                let lhs = m.prob(&[a2, a1, b]) / denom;
                let rhs = (pa2b.prob(&[a2, b]) / denom) * (pa1b.prob(&[a1, b]) / denom);
                assert_eq!(lhs, rhs);
            }
        }
    }
}

/// A random distribution over `k` variables with small integer weights.
fn random_joint(rng: &mut StdRng, k: usize) -> PTable {
    loop {
        let weights: Vec<i64> = (0..1 << k).map(|_| rng.random_range(0..6)).collect();
        let total: i64 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        let header = (0..k).map(|i| format!("X{i}")).collect();
        return PTable::new(header, weights.iter().map(|&w| q(w, total)).collect(), TableMode::Exact).unwrap();
    }
}

/// Headers of an acyclic schema, grown by attaching each new edge to part
/// of an existing one plus one fresh variable.
fn random_acyclic_headers(rng: &mut StdRng, k: usize) -> Vec<Vec<String>> {
    let var = |i: usize| format!("X{i}");
    let mut headers = vec![vec![var(0)]];
    let mut next = 1;
    if rng.random_bool(0.5) {
        headers[0].push(var(next));
        next += 1;
    }
    while next < k {
        let parent = headers[rng.random_range(0..headers.len())].clone();
        let mut h: Vec<String> = parent.into_iter().filter(|_| rng.random_bool(0.6)).collect();
        h.push(var(next));
        next += 1;
        headers.push(h);
    }
    headers
}

#[test]
fn consistent_acyclic_families_are_recovered() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..60 {
        let k = rng.random_range(2..=5);
        let global = random_joint(&mut rng, k);
        let headers = random_acyclic_headers(&mut rng, k);
        let tables: Vec<NamedTable> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| NamedTable::new(format!("P{i}"), global.marginalize(h).unwrap()))
            .collect();
        let schema = build_schema(&tables).unwrap();
        assert!(is_acyclic(&schema));
        let jt = join_tree(&schema).unwrap();
        let joint = join_all(&jt, &tables, &Tolerance::Auto).unwrap();
        assert_eq!(joint.total_mass(), q(1, 1));
        assert!(verify_recovery(&joint, &tables, &Tolerance::Auto));
    }
}

#[test]
fn sampled_coins_join_within_tolerance() {
    let program = frontend::load(&fixture("coins_acyclic.pp")).unwrap();
    let tables = evaluate_contexts(
        &program.program().model_contexts(),
        EvalMode::Sampled { samples: Some(20_000), seed: 3 },
        Execution::Parallel,
    );
    let jt = join_tree(&build_schema(&tables).unwrap()).unwrap();
    let joint = join_all(&jt, &tables, &Tolerance::Auto).unwrap();
    assert_eq!(joint.total_mass(), q(1, 1));
    let exact_a2 = bern(&q(1, 5), true);
    let got: BigRational = joint.prob_true("A2").unwrap();
    assert!((pprog_core::rational::to_f64(&got) - pprog_core::rational::to_f64(&exact_a2)).abs() < 0.02);
}
