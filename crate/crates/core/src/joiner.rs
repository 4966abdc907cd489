//! Probabilistic join of p-tables along a join tree.
//!
//! For a tree construction ordering `S1, ..., Sn` the joint is the fold
//! `((S1 ⊗ S2) ⊗ S3) ... ⊗ Sn`, where each step glues the next table onto
//! the accumulated one through their shared variables:
//!
//! ```text
//! p(x ∪ y) = p1(x) · p2(y) / m(s)      m = marginal of the left table on S
//! ```
//!
//! with `0 / 0 = 0`. On a consistent acyclic family this equals the product
//! of the node tables over the product of the separator marginals, and every
//! input is recovered from the result by marginalization.

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::distribution::{decode, encode, NamedTable, PTable, TableError, TableMode, Tolerance};
use crate::rational;
use crate::schema::JoinTree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JoinError {
    #[error("{0}")]
    InconsistentMarginals(Box<MarginalMismatch>),
    #[error("no table for context `{0}`")]
    MissingTable(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Two tables that disagree on their shared variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalMismatch {
    pub left: String,
    pub right: String,
    pub separator: Vec<String>,
    pub distance: BigRational,
}

impl std::fmt::Display for MarginalMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "marginals on {{{}}} differ by {} between {} and {}",
            self.separator.join(","),
            rational::format_exact(&self.distance),
            self.left,
            self.right
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatorCheck {
    pub a: String,
    pub b: String,
    pub separator: Vec<String>,
    pub distance: BigRational,
    pub tolerance: BigRational,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConsistencyReport {
    pub checks: Vec<SeparatorCheck>,
}

impl ConsistencyReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SeparatorCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn lookup<'a>(tables: &'a [NamedTable], name: &str) -> Result<&'a PTable, JoinError> {
    tables
        .iter()
        .find(|t| t.name == name)
        .map(|t| &t.table)
        .ok_or_else(|| JoinError::MissingTable(name.to_string()))
}

/// Distance between the marginals of two tables on `separator`. An empty
/// separator is trivially consistent.
fn separator_distance(t1: &PTable, t2: &PTable, separator: &[String]) -> Result<BigRational, TableError> {
    if separator.is_empty() {
        return Ok(BigRational::zero());
    }
    t1.marginalize(separator)?.marginal_distance(&t2.marginalize(separator)?)
}

/// Compares both endpoint tables of every tree edge on the edge's separator.
pub fn check_marginal_consistency(
    jt: &JoinTree,
    tables: &[NamedTable],
    tol: &Tolerance,
) -> Result<ConsistencyReport, JoinError> {
    let mut checks = Vec::with_capacity(jt.edges.len());
    for edge in &jt.edges {
        let (ta, tb) = (lookup(tables, &edge.a)?, lookup(tables, &edge.b)?);
        let distance = separator_distance(ta, tb, &edge.separator)?;
        let tolerance = tol.cell(ta.mode(), tb.mode());
        checks.push(SeparatorCheck {
            a: edge.a.clone(),
            b: edge.b.clone(),
            separator: edge.separator.clone(),
            passed: distance <= tolerance,
            distance,
            tolerance,
        });
    }
    Ok(ConsistencyReport { checks })
}

/// Joins two tables through their shared variables. The result header is
/// `t1`'s header followed by the variables only `t2` has.
pub fn pairwise_join(t1: &PTable, t2: &PTable, tol: &Tolerance) -> Result<PTable, JoinError> {
    let separator: Vec<String> = t1.header().iter().filter(|v| t2.position(v).is_some()).cloned().collect();
    let distance = separator_distance(t1, t2, &separator)?;
    if distance > tol.cell(t1.mode(), t2.mode()) {
        return Err(JoinError::InconsistentMarginals(Box::new(MarginalMismatch {
            left: t1.header().join(","),
            right: t2.header().join(","),
            separator,
            distance,
        })));
    }

    let mut header: Vec<String> = t1.header().to_vec();
    header.extend(t2.header().iter().filter(|v| t1.position(v).is_none()).cloned());
    let pick = |vars: &[String]| -> Vec<usize> {
        vars.iter().map(|v| header.iter().position(|h| h == v).expect("header is a union")).collect()
    };
    let (left_pos, right_pos, sep_pos) = (pick(t1.header()), pick(t2.header()), pick(&separator));
    let sep_marginal = if separator.is_empty() { None } else { Some(t1.marginalize(&separator)?) };

    let k = header.len();
    let mut probs = Vec::with_capacity(1 << k);
    for code in 0..(1usize << k) {
        let values = decode(code, k);
        let sub = |pos: &[usize]| encode(&pos.iter().map(|&i| values[i]).collect::<Vec<_>>());
        let numerator = t1.prob_at(sub(&left_pos)) * t2.prob_at(sub(&right_pos));
        let p = match &sep_marginal {
            None => numerator,
            Some(m) => {
                let denom = m.prob_at(sub(&sep_pos));
                if denom.is_zero() {
                    BigRational::zero()
                } else {
                    numerator / denom
                }
            }
        };
        probs.push(p);
    }

    let mode = t1.mode().combine(t2.mode());
    let mass: BigRational = probs.iter().fold(BigRational::zero(), |acc, p| acc + p);
    if mode != TableMode::Exact && !mass.is_zero() && !mass.is_one() {
        // sampled marginals agree only approximately; zero-mass separator
        // cells on the left can drop a little right-hand mass
        for p in &mut probs {
            *p = &*p / &mass;
        }
    }
    Ok(PTable::new(header, probs, mode)?)
}

/// Folds [`pairwise_join`] along the tree construction ordering.
pub fn join_all(jt: &JoinTree, tables: &[NamedTable], tol: &Tolerance) -> Result<PTable, JoinError> {
    let report = check_marginal_consistency(jt, tables, tol)?;
    if let Some(bad) = report.failures().next() {
        return Err(JoinError::InconsistentMarginals(Box::new(MarginalMismatch {
            left: bad.a.clone(),
            right: bad.b.clone(),
            separator: bad.separator.clone(),
            distance: bad.distance.clone(),
        })));
    }
    let mut order = jt.ordering.iter();
    let first = order.next().ok_or_else(|| JoinError::MissingTable("(empty tree)".into()))?;
    let mut acc = lookup(tables, first)?.clone();
    for name in order {
        acc = pairwise_join(&acc, lookup(tables, name)?, tol)?;
    }
    Ok(acc)
}

/// Whether marginalizing `joint` onto each table's header gives back that
/// table within tolerance.
pub fn verify_recovery(joint: &PTable, tables: &[NamedTable], tol: &Tolerance) -> bool {
    tables.iter().all(|t| {
        joint
            .marginalize(t.table.header())
            .and_then(|m| m.marginal_distance(&t.table))
            .map(|d| d <= tol.cell(joint.mode(), t.table.mode()))
            .unwrap_or(false)
    })
}
