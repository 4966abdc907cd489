//! P-tables: finite joint distributions over named binary variables.
//!
//! Rows are addressed by an assignment code whose bit `k - 1 - i` holds the
//! value of `header[i]`. Presentation order is descending by code, so the
//! first row of a two-variable table is `11`, then `10`, `01`, `00`.
//!
//! Probabilities are exact rationals in both modes. Sampled tables hold the
//! empirical frequencies `count / n`, which are themselves exact.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("headers differ: [{}] vs [{}]", .left.join(","), .right.join(","))]
    HeaderMismatch { left: Vec<String>, right: Vec<String> },
    #[error("a p-table needs at least one variable")]
    EmptyHeader,
    #[error("variable `{0}` appears twice in a header")]
    DuplicateVariable(String),
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("negative probability in row {0}")]
    NegativeProbability(usize),
    #[error("total mass is {0}, expected 1")]
    MassNotOne(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableMode {
    Exact,
    Sampled { samples: u64, seed: u64 },
}

impl TableMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, TableMode::Exact)
    }

    pub fn samples(&self) -> Option<u64> {
        match self {
            TableMode::Exact => None,
            TableMode::Sampled { samples, .. } => Some(*samples),
        }
    }

    /// Mode of a table derived from two inputs: exact only if both are, and
    /// otherwise as trustworthy as the smaller sample.
    pub fn combine(self, other: TableMode) -> TableMode {
        match (self, other) {
            (TableMode::Exact, m) | (m, TableMode::Exact) => m,
            (
                TableMode::Sampled { samples: a, seed },
                TableMode::Sampled { samples: b, .. },
            ) => TableMode::Sampled { samples: a.min(b), seed },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PTable {
    header: Vec<String>,
    probs: Vec<BigRational>,
    mode: TableMode,
}

impl PTable {
    /// Builds a table from probabilities indexed by assignment code.
    pub fn new(header: Vec<String>, probs: Vec<BigRational>, mode: TableMode) -> Result<Self, TableError> {
        let table = Self::unchecked(header, probs, mode)?;
        let mass = table.total_mass();
        if mass != BigRational::from_integer(1.into()) {
            return Err(TableError::MassNotOne(rational::format_exact(&mass)));
        }
        Ok(table)
    }

    /// Structural checks only; the caller vouches for the mass.
    pub(crate) fn unchecked(header: Vec<String>, probs: Vec<BigRational>, mode: TableMode) -> Result<Self, TableError> {
        if header.is_empty() {
            return Err(TableError::EmptyHeader);
        }
        let mut seen = BTreeSet::new();
        for name in &header {
            if !seen.insert(name.as_str()) {
                return Err(TableError::DuplicateVariable(name.clone()));
            }
        }
        let expected = 1usize << header.len();
        if probs.len() != expected {
            return Err(TableError::RowCount { expected, found: probs.len() });
        }
        if let Some(i) = probs.iter().position(|p| p.is_negative()) {
            return Err(TableError::NegativeProbability(i));
        }
        Ok(PTable { header, probs, mode })
    }

    /// Builds a table from rows given in presentation order (`11`, `10`, ...).
    pub fn from_rows(header: Vec<String>, rows: Vec<BigRational>, mode: TableMode) -> Result<Self, TableError> {
        let mut probs = rows;
        probs.reverse();
        Self::new(header, probs, mode)
    }

    pub fn uniform(header: Vec<String>) -> Result<Self, TableError> {
        let n = 1usize << header.len();
        let p = BigRational::new(1.into(), (n as u64).into());
        Self::new(header, vec![p; n], TableMode::Exact)
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    pub fn arity(&self) -> usize {
        self.header.len()
    }

    pub fn row_count(&self) -> usize {
        self.probs.len()
    }

    pub fn position(&self, var: &str) -> Option<usize> {
        self.header.iter().position(|h| h == var)
    }

    pub fn prob_at(&self, code: usize) -> &BigRational {
        &self.probs[code]
    }

    /// Probability of a positional assignment (one value per header entry).
    pub fn prob(&self, values: &[bool]) -> &BigRational {
        assert_eq!(values.len(), self.arity(), "assignment arity");
        &self.probs[encode(values)]
    }

    /// Probability of an assignment given by name, in any order. The
    /// assignment must cover the header exactly.
    pub fn prob_named<S: AsRef<str>>(&self, assignment: &[(S, bool)]) -> Result<&BigRational, TableError> {
        let mut values = vec![None; self.arity()];
        for (name, value) in assignment {
            let name = name.as_ref();
            let i = self.position(name).ok_or_else(|| TableError::UnknownVariable(name.to_string()))?;
            values[i] = Some(*value);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| TableError::UnknownVariable(self.header[i].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.prob(&values))
    }

    /// Rows in presentation order.
    pub fn rows(&self) -> impl Iterator<Item = (Vec<bool>, &BigRational)> + '_ {
        let k = self.arity();
        (0..self.probs.len()).rev().map(move |code| (decode(code, k), &self.probs[code]))
    }

    pub fn total_mass(&self) -> BigRational {
        self.probs.iter().fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// Marginal over `vars`, in the order given.
    pub fn marginalize<S: AsRef<str>>(&self, vars: &[S]) -> Result<PTable, TableError> {
        if vars.is_empty() {
            return Err(TableError::EmptyHeader);
        }
        let positions = vars
            .iter()
            .map(|v| self.position(v.as_ref()).ok_or_else(|| TableError::UnknownVariable(v.as_ref().to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let header: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let k = self.arity();
        let mut probs = vec![BigRational::zero(); 1 << positions.len()];
        for (code, p) in self.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let full = decode(code, k);
            let sub: Vec<bool> = positions.iter().map(|&i| full[i]).collect();
            probs[encode(&sub)] += p;
        }
        PTable::unchecked(header, probs, self.mode)
    }

    /// The same distribution presented under a permuted header.
    pub fn aligned_to<S: AsRef<str>>(&self, header: &[S]) -> Result<PTable, TableError> {
        let names: BTreeSet<&str> = header.iter().map(|h| h.as_ref()).collect();
        let mine: BTreeSet<&str> = self.header.iter().map(|h| h.as_str()).collect();
        if names != mine || header.len() != self.arity() {
            return Err(self.mismatch(header));
        }
        self.marginalize(header)
    }

    /// Sup-metric distance `max |p1 - p2|` after aligning headers by name.
    pub fn marginal_distance(&self, other: &PTable) -> Result<BigRational, TableError> {
        let aligned = other.aligned_to(&self.header).map_err(|_| self.mismatch(other.header()))?;
        Ok(self
            .probs
            .iter()
            .zip(&aligned.probs)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or_else(BigRational::zero))
    }

    /// `p(var = 1)`.
    pub fn prob_true(&self, var: &str) -> Result<BigRational, TableError> {
        let m = self.marginalize(&[var])?;
        Ok(m.probs[1].clone())
    }

    #[cfg(test)]
    pub(crate) fn with_mode(mut self, mode: TableMode) -> PTable {
        self.mode = mode;
        self
    }

    fn mismatch<S: AsRef<str>>(&self, other: &[S]) -> TableError {
        TableError::HeaderMismatch {
            left: self.header.clone(),
            right: other.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// Renders a probability in the style of the table's mode.
    pub fn render_prob(&self, p: &BigRational) -> String {
        match self.mode {
            TableMode::Exact => rational::format_exact(p),
            TableMode::Sampled { .. } => rational::format_decimal(p, 6),
        }
    }

    /// CSV with the variable names then `p` as header, one row per
    /// assignment in presentation order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push_str(",p\n");
        for (values, p) in self.rows() {
            for v in &values {
                out.push_str(if *v { "1," } else { "0," });
            }
            out.push_str(&self.render_prob(p));
            out.push('\n');
        }
        out
    }

    /// Probability lookup keyed by the full assignment as a name map.
    pub fn as_map(&self) -> HashMap<Vec<(String, bool)>, BigRational> {
        let mut sorted_header: Vec<(usize, &String)> = self.header.iter().enumerate().collect();
        sorted_header.sort_by(|a, b| a.1.cmp(b.1));
        self.rows()
            .map(|(values, p)| {
                let key = sorted_header.iter().map(|(i, name)| ((*name).clone(), values[*i])).collect();
                (key, p.clone())
            })
            .collect()
    }
}

impl fmt::Display for PTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let widths: Vec<usize> = self.header.iter().map(|h| h.len().max(1)).collect();
        for (h, w) in self.header.iter().zip(&widths) {
            write!(f, "{h:>w$} ")?;
        }
        writeln!(f, "p")?;
        for (values, p) in self.rows() {
            for (v, w) in values.iter().zip(&widths) {
                write!(f, "{:>w$} ", u8::from(*v))?;
            }
            writeln!(f, "{}", self.render_prob(p))?;
        }
        Ok(())
    }
}

/// Half-width of the 99% Hoeffding interval for a frequency estimated from
/// `n` samples: `sqrt(ln(2 / 0.01) / (2 n))`.
pub fn hoeffding_epsilon(n: u64) -> f64 {
    ((2.0f64 / 0.01).ln() / (2.0 * n.max(1) as f64)).sqrt()
}

/// How far two probabilities that should agree may drift apart.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Tolerance {
    /// Zero between exact tables; the Hoeffding half-width of the smaller
    /// sample as soon as a sampled table is involved.
    #[default]
    Auto,
    Absolute(BigRational),
}

impl Tolerance {
    pub fn zero() -> Self {
        Tolerance::Absolute(BigRational::zero())
    }

    /// Per-cell threshold when comparing tables of the given modes.
    pub fn cell(&self, a: TableMode, b: TableMode) -> BigRational {
        match self {
            Tolerance::Absolute(t) => t.clone(),
            Tolerance::Auto => match (a.samples(), b.samples()) {
                (None, None) => BigRational::zero(),
                (x, y) => {
                    let n = x.into_iter().chain(y).min().unwrap_or(1);
                    rational::from_f64(hoeffding_epsilon(n))
                }
            },
        }
    }

    /// Threshold for a sum of `cells` probabilities, the smallest of which
    /// came from `samples` draws (`None` when all are exact).
    pub fn sum(&self, cells: usize, samples: Option<u64>) -> BigRational {
        match self {
            Tolerance::Absolute(t) => t.clone(),
            Tolerance::Auto => match samples {
                None => BigRational::zero(),
                Some(n) => rational::from_f64(cells as f64 * hoeffding_epsilon(n)),
            },
        }
    }
}

/// A p-table together with the context that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedTable {
    pub name: String,
    pub table: PTable,
}

impl NamedTable {
    pub fn new(name: impl Into<String>, table: PTable) -> Self {
        NamedTable { name: name.into(), table }
    }
}

pub(crate) fn encode(values: &[bool]) -> usize {
    values.iter().fold(0usize, |acc, &v| (acc << 1) | usize::from(v))
}

pub(crate) fn decode(code: usize, arity: usize) -> Vec<bool> {
    (0..arity).map(|i| (code >> (arity - 1 - i)) & 1 == 1).collect()
}
