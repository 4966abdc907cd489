//! Turns context scopes into p-tables, either by exact enumeration or by
//! seeded Monte Carlo sampling.
//!
//! Sampling uses ChaCha8 seeded with `SHA-256(seed as little-endian u64 ||
//! context name)`, so each context draws from its own stream and adding a
//! context never perturbs another one. A flip with bias `b` consumes one
//! 64-bit word `u` and comes up 1 iff `u < floor(b * 2^64)`; biases are never
//! rounded through floating point.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::distribution::{encode, NamedTable, PTable, TableMode};
use crate::exec::Execution;
use crate::frontend::{ContextDef, Stmt};
use crate::rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    #[default]
    Exact,
    /// Monte Carlo. `samples` overrides each context's own `Infer` count.
    Sampled { samples: Option<u64>, seed: u64 },
}

/// Per-context generator seed.
pub fn context_seed(seed: u64, context: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(context.as_bytes());
    hasher.finalize().into()
}

/// Statement indices the joint list depends on, in declaration order.
fn relevant_statements(ctx: &ContextDef) -> Vec<usize> {
    let index: HashMap<&str, usize> =
        ctx.statements.iter().enumerate().map(|(i, s)| (s.name().as_str(), i)).collect();
    let mut needed = vec![false; ctx.statements.len()];
    let mut stack: Vec<usize> = ctx.joint.iter().filter_map(|j| index.get(j.as_str()).copied()).collect();
    while let Some(i) = stack.pop() {
        if needed[i] {
            continue;
        }
        needed[i] = true;
        if let Stmt::Cond { condition, .. } = &ctx.statements[i] {
            if let Some(&c) = index.get(condition.as_str()) {
                stack.push(c);
            }
        }
    }
    (0..needed.len()).filter(|&i| needed[i]).collect()
}

/// Exact distribution of the context's joint list, by enumerating every
/// outcome of the statements it depends on.
pub fn eval_exact(ctx: &ContextDef) -> PTable {
    let order = relevant_statements(ctx);
    let slot: HashMap<&str, usize> =
        order.iter().enumerate().map(|(k, &i)| (ctx.statements[i].name().as_str(), k)).collect();

    let mut partials: Vec<(Vec<bool>, BigRational)> = vec![(Vec::new(), BigRational::one())];
    for &i in &order {
        let mut next = Vec::with_capacity(partials.len() * 2);
        for (values, p) in partials {
            let p_true = match &ctx.statements[i] {
                Stmt::Flip { bias, .. } => bias.clone(),
                Stmt::Cond { condition, if_true, if_false, .. } => {
                    if values[slot[condition.as_str()]] {
                        if_true.clone()
                    } else {
                        if_false.clone()
                    }
                }
            };
            let p_false = BigRational::one() - &p_true;
            for (outcome, weight) in [(true, p_true), (false, p_false)] {
                if weight.is_zero() {
                    continue;
                }
                let mut v = values.clone();
                v.push(outcome);
                next.push((v, &p * weight));
            }
        }
        partials = next;
    }

    let joint_slots: Vec<usize> = ctx.joint.iter().map(|j| slot[j.as_str()]).collect();
    let mut probs = vec![BigRational::zero(); 1 << joint_slots.len()];
    for (values, p) in partials {
        let row: Vec<bool> = joint_slots.iter().map(|&s| values[s]).collect();
        probs[encode(&row)] += p;
    }
    PTable::new(ctx.joint_names(), probs, TableMode::Exact).expect("enumeration yields a distribution")
}

/// Empirical distribution of `samples` independent runs of the context.
pub fn eval_sampled(ctx: &ContextDef, samples: u64, seed: u64) -> PTable {
    assert!(samples >= 1, "at least one sample");
    let mut rng = ChaCha8Rng::from_seed(context_seed(seed, ctx.name.as_str()));

    enum Draw {
        Flip(u128),
        Cond(usize, u128, u128),
    }
    let index: HashMap<&str, usize> =
        ctx.statements.iter().enumerate().map(|(i, s)| (s.name().as_str(), i)).collect();
    let program: Vec<Draw> = ctx
        .statements
        .iter()
        .map(|s| match s {
            Stmt::Flip { bias, .. } => Draw::Flip(rational::u64_threshold(bias)),
            Stmt::Cond { condition, if_true, if_false, .. } => Draw::Cond(
                index[condition.as_str()],
                rational::u64_threshold(if_true),
                rational::u64_threshold(if_false),
            ),
        })
        .collect();
    let joint: Vec<usize> = ctx.joint.iter().map(|j| index[j.as_str()]).collect();

    let mut counts = vec![0u64; 1 << joint.len()];
    let mut values = vec![false; program.len()];
    let mut row = vec![false; joint.len()];
    for _ in 0..samples {
        for (i, draw) in program.iter().enumerate() {
            let threshold = match draw {
                Draw::Flip(t) => *t,
                Draw::Cond(c, t, f) => {
                    if values[*c] {
                        *t
                    } else {
                        *f
                    }
                }
            };
            values[i] = u128::from(rng.next_u64()) < threshold;
        }
        for (r, &j) in row.iter_mut().zip(&joint) {
            *r = values[j];
        }
        counts[encode(&row)] += 1;
    }

    let n = rational::from_u64(samples);
    let probs = counts.into_iter().map(|c| rational::from_u64(c) / &n).collect();
    PTable::new(ctx.joint_names(), probs, TableMode::Sampled { samples, seed }).expect("frequencies sum to one")
}

pub fn eval_context(ctx: &ContextDef, mode: EvalMode) -> PTable {
    match mode {
        EvalMode::Exact => eval_exact(ctx),
        EvalMode::Sampled { samples, seed } => eval_sampled(ctx, samples.unwrap_or(ctx.samples), seed),
    }
}

/// Evaluates independent contexts, in parallel when `exec` allows it.
pub fn evaluate_contexts(contexts: &[&ContextDef], mode: EvalMode, exec: Execution) -> Vec<NamedTable> {
    exec.map(contexts, |ctx| NamedTable::new(ctx.name.as_str(), eval_context(ctx, mode)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::rational::{ratio, to_f64};

    fn context(body: &str) -> ContextDef {
        let src = format!("var P1 = context() {{ {body} return {{Infer({{samples:1000}}, p)}} }};\nreturn {{model(P1)}}");
        parse(&src).unwrap().contexts.remove(0)
    }

    #[test]
    fn independent_coins() {
        let t = eval_exact(&context("var A1 = flip(0.6) var B1 = flip(0.5) var p = [A1, B1]"));
        assert_eq!(t.header(), ["A1", "B1"]);
        let rows: Vec<BigRational> = t.rows().map(|(_, p)| p.clone()).collect();
        assert_eq!(rows, vec![ratio(3, 10), ratio(3, 10), ratio(1, 5), ratio(1, 5)]);
        assert_eq!(t.total_mass(), ratio(1, 1));
    }

    #[test]
    fn chain_rule_for_conditionals() {
        let t = eval_exact(&context("var A = flip(0.7) var B = A ? flip(0.8) : flip(0.1) var p = [A, B]"));
        let rows: Vec<BigRational> = t.rows().map(|(_, p)| p.clone()).collect();
        assert_eq!(rows, vec![ratio(56, 100), ratio(14, 100), ratio(3, 100), ratio(27, 100)]);
    }

    #[test]
    fn degenerate_bias() {
        let t = eval_exact(&context("var A = flip(1) var p = [A]"));
        assert_eq!(t.prob(&[true]), &ratio(1, 1));
        assert_eq!(t.prob(&[false]), &ratio(0, 1));
    }

    #[test]
    fn latent_variables_are_summed_out() {
        let t = eval_exact(&context("var H = flip(0.5) var A = H ? flip(1) : flip(0) var N = flip(0.9) var p = [A]"));
        assert_eq!(t.header(), ["A"]);
        assert_eq!(t.prob(&[true]), &ratio(1, 2));
    }

    #[test]
    fn swapping_independent_flips_changes_nothing() {
        let a = eval_exact(&context("var A = flip(0.3) var B = flip(0.9) var p = [A, B]"));
        let b = eval_exact(&context("var B = flip(0.9) var A = flip(0.3) var p = [A, B]"));
        assert_eq!(a, b);
    }

    #[test]
    fn single_sample_is_a_point_mass() {
        let t = eval_sampled(&context("var A = flip(0.5) var B = flip(0.5) var p = [A, B]"), 1, 7);
        let ones: Vec<_> = t.rows().filter(|(_, p)| **p == ratio(1, 1)).collect();
        assert_eq!(ones.len(), 1);
        assert_eq!(t.rows().filter(|(_, p)| !p.is_zero()).count(), 1);
    }

    #[test]
    fn sampling_is_reproducible() {
        let ctx = context("var A = flip(0.6) var B = A ? flip(0.3) : flip(0.9) var p = [A, B]");
        assert_eq!(eval_sampled(&ctx, 5000, 42), eval_sampled(&ctx, 5000, 42));
        assert_ne!(eval_sampled(&ctx, 5000, 42), eval_sampled(&ctx, 5000, 43));
        assert_eq!(eval_sampled(&ctx, 10, 1).mode(), TableMode::Sampled { samples: 10, seed: 1 });
    }

    #[test]
    fn seeds_are_isolated_per_context() {
        assert_ne!(context_seed(1, "P1"), context_seed(1, "P2"));
        assert_ne!(context_seed(1, "P1"), context_seed(2, "P1"));
    }

    #[test]
    fn certain_flips_never_miss() {
        let t = eval_sampled(&context("var A = flip(1) var B = flip(0) var p = [A, B]"), 2000, 3);
        assert_eq!(t.prob(&[true, false]), &ratio(1, 1));
    }

    /// Hoeffding: P(|freq - p| >= eps) <= 2 exp(-2 n eps^2); eps at 99%.
    fn hoeffding(n: u64) -> f64 {
        ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt()
    }

    #[test]
    fn sampling_converges_to_enumeration() {
        let ctx = context("var A1 = flip(0.6) var B1 = flip(0.5) var p = [A1, B1]");
        let exact = eval_exact(&ctx);
        assert!((hoeffding(1000) - 0.0514).abs() < 1e-4);
        for n in [1_000u64, 100_000] {
            let sampled = eval_sampled(&ctx, n, 2024);
            let d = to_f64(&exact.marginal_distance(&sampled).unwrap());
            assert!(d <= hoeffding(n), "n = {n}: {d}");
        }
    }
}
