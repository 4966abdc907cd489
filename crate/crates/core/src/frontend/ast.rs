use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::BigRational;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// An identifier with its source position. Equality and hashing look at the
/// name only, so trees parsed from differently formatted sources compare
/// equal.
#[derive(Debug, Clone)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident { name: name.into(), span: Span::default() }
    }

    pub fn at(name: impl Into<String>, span: Span) -> Self {
        Ident { name: name.into(), span }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Ident {}

impl Hash for Ident {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub components: Vec<ComponentDef>,
    pub contexts: Vec<ContextDef>,
    pub directive: ModelDirective,
}

impl Program {
    pub fn context(&self, name: &str) -> Option<&ContextDef> {
        self.contexts.iter().find(|c| c.name.name == name)
    }

    pub fn component(&self, name: &str) -> Option<&ComponentDef> {
        self.components.iter().find(|c| c.name.name == name)
    }

    /// The contexts named by the model directive, in directive order.
    pub fn model_contexts(&self) -> Vec<&ContextDef> {
        self.directive.contexts.iter().filter_map(|n| self.context(&n.name)).collect()
    }
}

/// `def A = component(A1, A2)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDef {
    pub name: Ident,
    pub variables: Vec<Ident>,
}

/// One `var P = context() { ... };` scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextDef {
    pub name: Ident,
    pub statements: Vec<Stmt>,
    /// Name bound to the joint list (`p` in `var p = [A, B]`).
    pub joint_binding: Ident,
    /// Measured variables, in measurement order.
    pub joint: Vec<Ident>,
    pub samples: u64,
    /// The identifier handed to `Infer`.
    pub infer_target: Ident,
}

impl ContextDef {
    pub fn joint_names(&self) -> Vec<String> {
        self.joint.iter().map(|j| j.name.clone()).collect()
    }

    pub fn declares(&self, name: &str) -> bool {
        self.statements.iter().any(|s| s.name().name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    /// `var X = flip(b)`
    Flip { name: Ident, bias: BigRational },
    /// `var X = C ? flip(t) : flip(f)`
    Cond {
        name: Ident,
        condition: Ident,
        if_true: BigRational,
        if_false: BigRational,
    },
}

impl Stmt {
    pub fn name(&self) -> &Ident {
        match self {
            Stmt::Flip { name, .. } | Stmt::Cond { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDirective {
    pub design: Design,
    pub contexts: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Design {
    Auto,
    NoSignal,
    Signal { from: Ident, to: Ident },
    Order,
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Design::Auto => f.write_str("auto"),
            Design::NoSignal => f.write_str("no-signal"),
            Design::Signal { from, to } => write!(f, "signal({from}->{to})"),
            Design::Order => f.write_str("order"),
        }
    }
}
