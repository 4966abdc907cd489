//! Deciding whether probabilities on a scenario form a probabilistic model,
//! and whether any model exists at all.

mod lp;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::distribution::PTable;
use crate::joiner::ConsistencyReport;
use crate::rational;
use crate::scenario::{Assignment, Scenario};

pub use lp::phase_one;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeasibilityError {
    #[error("no probability for vertex {0}")]
    PartialAssignment(usize),
}

/// An edge whose probabilities do not sum to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeViolation {
    pub edge: Vec<usize>,
    pub sum: BigRational,
}

/// A variable whose `p(var = 1)` differs between the contexts measuring it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalDiscrepancy {
    pub variable: String,
    pub values: Vec<(String, BigRational)>,
}

impl MarginalDiscrepancy {
    pub fn spread(&self) -> BigRational {
        let max = self.values.iter().map(|(_, p)| p).max();
        let min = self.values.iter().map(|(_, p)| p).min();
        match (max, min) {
            (Some(a), Some(b)) => a - b,
            _ => BigRational::zero(),
        }
    }
}

impl fmt::Display for MarginalDiscrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.values.iter().map(|(c, p)| format!("{} in {c}", rational::format_decimal(p, 6))).collect();
        write!(f, "p({}=1): {}", self.variable, parts.join(" vs "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// The tables join into one distribution that recovers each of them.
    NonContextualAcyclic { joint: PTable },
    /// The schema is acyclic but some separator marginals disagree.
    InconsistentAcyclic { report: ConsistencyReport },
    /// The observed probabilities satisfy every edge; `witness` is an extra
    /// model found by the data-free feasibility check, when it was run.
    NonContextualScenario { model: Assignment, witness: Option<Assignment> },
    StrongContextual { violated_edges: Vec<EdgeViolation>, discrepancies: Vec<MarginalDiscrepancy> },
    /// No assignment at all satisfies the scenario's edges.
    ScenarioInfeasible,
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::NonContextualAcyclic { .. } => "NonContextualAcyclic",
            Verdict::InconsistentAcyclic { .. } => "InconsistentAcyclic",
            Verdict::NonContextualScenario { .. } => "NonContextualScenario",
            Verdict::StrongContextual { .. } => "StrongContextual",
            Verdict::ScenarioInfeasible => "ScenarioInfeasible",
        }
    }

    pub fn is_contextual(&self) -> bool {
        matches!(self, Verdict::StrongContextual { .. } | Verdict::ScenarioInfeasible)
    }
}

fn edge_sum(edge: &[usize], a: &Assignment) -> Result<BigRational, FeasibilityError> {
    edge.iter().try_fold(BigRational::zero(), |acc, v| {
        a.get(v).map(|p| acc + p).ok_or(FeasibilityError::PartialAssignment(*v))
    })
}

/// Edges whose sum differs from one by more than the tolerance chosen for
/// that edge. An empty result means `a` is a probabilistic model.
pub fn verify_assignment_with<F>(s: &Scenario, a: &Assignment, mut tol: F) -> Result<Vec<EdgeViolation>, FeasibilityError>
where
    F: FnMut(&[usize]) -> BigRational,
{
    if let Some(v) = (0..s.vertex_count()).find(|v| !a.contains_key(v)) {
        return Err(FeasibilityError::PartialAssignment(v));
    }
    let mut out = Vec::new();
    for edge in s.edges() {
        let sum = edge_sum(edge, a)?;
        if (&sum - BigRational::one()).abs() > tol(edge) {
            out.push(EdgeViolation { edge: edge.clone(), sum });
        }
    }
    Ok(out)
}

pub fn verify_assignment(s: &Scenario, a: &Assignment, tol: &BigRational) -> Result<Vec<EdgeViolation>, FeasibilityError> {
    verify_assignment_with(s, a, |_| tol.clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Assignment),
    Infeasible,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }
}

/// Whether some `p: V -> [0,1]` agrees with `fixed` and sums to one on every
/// edge. Vertices outside `fixed` are solved for exactly; upper bounds need
/// no constraint of their own since each vertex lies on an edge summing to
/// one.
pub fn lp_feasible(s: &Scenario, fixed: &Assignment) -> LpOutcome {
    if fixed.values().any(|p| p.is_negative() || *p > BigRational::one()) {
        return LpOutcome::Infeasible;
    }
    let free: Vec<usize> = (0..s.vertex_count()).filter(|v| !fixed.contains_key(v)).collect();
    let column = |v: usize| free.binary_search(&v).ok();

    let mut a = Vec::new();
    let mut b = Vec::new();
    for edge in s.edges() {
        let mut row = vec![BigRational::zero(); free.len()];
        let mut rhs = BigRational::one();
        for &v in edge {
            match column(v) {
                Some(j) => row[j] += BigRational::one(),
                None => rhs -= &fixed[&v],
            }
        }
        if row.iter().all(Zero::is_zero) {
            if !rhs.is_zero() {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        a.push(row);
        b.push(rhs);
    }

    match phase_one(&a, &b, free.len()) {
        None => LpOutcome::Infeasible,
        Some(x) => {
            let mut model = fixed.clone();
            model.extend(free.iter().copied().zip(x));
            LpOutcome::Feasible(model)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::NamedTable;
    use crate::rational::ratio;
    use crate::scenario::{component_scenario_of, fr_product, observed_assignment, order_scenario};

    fn uniform(s: &Scenario, p: BigRational) -> Assignment {
        (0..s.vertex_count()).map(|v| (v, p.clone())).collect()
    }

    fn order_tables() -> Vec<NamedTable> {
        let mk = |name: &str, header: [&str; 2], rows: [i64; 4]| {
            NamedTable::new(
                name,
                PTable::from_rows(
                    header.iter().map(|s| s.to_string()).collect(),
                    rows.iter().map(|&n| ratio(n, 100)).collect(),
                    crate::distribution::TableMode::Exact,
                )
                .unwrap(),
            )
        };
        vec![mk("P1", ["A", "B"], [56, 14, 3, 27]), mk("P2", ["B", "A"], [16, 24, 36, 24])]
    }

    #[test]
    fn order_violations() {
        let tables = order_tables();
        let s = order_scenario(&tables[0], &tables[1]).unwrap();
        let a = observed_assignment(&s, &tables).unwrap();
        let v = verify_assignment(&s, &a, &BigRational::zero()).unwrap();
        let sums: Vec<_> = v.iter().map(|e| e.sum.clone()).collect();
        assert_eq!(sums, vec![ratio(59, 50), ratio(41, 50)]);
        assert_eq!(lp_feasible(&s, &a), LpOutcome::Infeasible);

        let p1_only: Assignment = a.iter().filter(|(v, _)| **v < 4).map(|(k, p)| (*k, p.clone())).collect();
        match lp_feasible(&s, &p1_only) {
            LpOutcome::Feasible(model) => {
                assert!(verify_assignment(&s, &model, &BigRational::zero()).unwrap().is_empty());
                assert_eq!(&model[&5] + &model[&7], ratio(3, 10));
            }
            LpOutcome::Infeasible => panic!("extension exists"),
        }
    }

    #[test]
    fn bell_fr_is_feasible() {
        let s = fr_product(&component_scenario_of(&["A1", "A2"]), &component_scenario_of(&["B1", "B2"])).unwrap();
        assert!(verify_assignment(&s, &uniform(&s, ratio(1, 4)), &BigRational::zero()).unwrap().is_empty());
        match lp_feasible(&s, &Assignment::new()) {
            LpOutcome::Feasible(m) => assert!(verify_assignment(&s, &m, &BigRational::zero()).unwrap().is_empty()),
            LpOutcome::Infeasible => panic!("uniform model exists"),
        }
    }

    #[test]
    fn forced_contradiction() {
        let s = Scenario::abstract_hypergraph(2, vec![vec![0], vec![0, 1], vec![1]]).unwrap();
        assert_eq!(lp_feasible(&s, &Assignment::new()), LpOutcome::Infeasible);
    }

    #[test]
    fn fixings_out_of_range_or_conflicting() {
        let s = Scenario::abstract_hypergraph(2, vec![vec![0, 1]]).unwrap();
        let mut fixed = Assignment::new();
        fixed.insert(0, ratio(3, 2));
        assert_eq!(lp_feasible(&s, &fixed), LpOutcome::Infeasible);
        fixed.insert(0, ratio(1, 2));
        fixed.insert(1, ratio(1, 3));
        assert_eq!(lp_feasible(&s, &fixed), LpOutcome::Infeasible);
        fixed.insert(1, ratio(1, 2));
        assert!(lp_feasible(&s, &fixed).is_feasible());
    }

    #[test]
    fn partial_assignment_is_an_error() {
        let s = Scenario::abstract_hypergraph(2, vec![vec![0, 1]]).unwrap();
        let mut a = Assignment::new();
        a.insert(0, ratio(1, 1));
        assert_eq!(verify_assignment(&s, &a, &BigRational::zero()), Err(FeasibilityError::PartialAssignment(1)));
    }

    #[test]
    fn per_edge_tolerance() {
        let s = Scenario::abstract_hypergraph(2, vec![vec![0], vec![0, 1]]).unwrap();
        let a = uniform(&s, ratio(51, 100));
        assert_eq!(verify_assignment(&s, &a, &BigRational::zero()).unwrap().len(), 2);
        let v = verify_assignment_with(&s, &a, |e| ratio(3, 100) * ratio(e.len() as i64, 1)).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].edge, vec![0]);
    }
}
