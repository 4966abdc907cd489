//! Static checks on a parsed program: scoping, bias ranges, directive
//! resolution and component coverage.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("{span}: `{name}` is used in scope {scope} before it is declared")]
    UndefinedVariable { name: String, scope: String, span: Span },
    #[error("{span}: `{name}` is already declared in scope {scope}")]
    ShadowedVariable { name: String, scope: String, span: Span },
    #[error("{span}: context `{name}` is defined twice")]
    DuplicateContext { name: String, span: Span },
    #[error("{span}: component `{name}` is defined twice")]
    DuplicateComponent { name: String, span: Span },
    #[error("{span}: variable `{name}` is listed twice in {owner}")]
    DuplicateVariable { name: String, owner: String, span: Span },
    #[error("{span}: variable `{name}` belongs to both components {first} and {second}")]
    SharedComponentVariable { name: String, first: String, second: String, span: Span },
    #[error("{span}: bias {value} of `{name}` is outside [0, 1]")]
    BiasOutOfRange { name: String, value: String, span: Span },
    #[error("{span}: the model refers to undefined context `{name}`")]
    UnknownContext { name: String, span: Span },
    #[error("{span}: context `{name}` appears twice in the model")]
    DuplicateModelEntry { name: String, span: Span },
    #[error("{span}: `{name}` is not a declared component")]
    UnknownComponent { name: String, span: Span },
    #[error("design '{design}' needs exactly two components, found {found}")]
    ComponentCount { design: String, found: usize },
    #[error("{span}: component variable `{variable}` of {component} is not measured by any context")]
    UnusedComponentVariable { component: String, variable: String, span: Span },
    #[error("context {context}: {reason}")]
    ComponentCoverage { context: String, reason: String },
}

impl ValidationError {
    pub fn span(&self) -> Option<Span> {
        match self {
            ValidationError::UndefinedVariable { span, .. }
            | ValidationError::ShadowedVariable { span, .. }
            | ValidationError::DuplicateContext { span, .. }
            | ValidationError::DuplicateComponent { span, .. }
            | ValidationError::DuplicateVariable { span, .. }
            | ValidationError::SharedComponentVariable { span, .. }
            | ValidationError::BiasOutOfRange { span, .. }
            | ValidationError::UnknownContext { span, .. }
            | ValidationError::DuplicateModelEntry { span, .. }
            | ValidationError::UnknownComponent { span, .. }
            | ValidationError::UnusedComponentVariable { span, .. } => Some(*span),
            ValidationError::ComponentCount { .. } | ValidationError::ComponentCoverage { .. } => None,
        }
    }
}

/// Resolution of a two-component design: which component plays which role
/// and which variable of each component every model context measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartite {
    pub first: ComponentDef,
    pub second: ComponentDef,
    /// context name -> (variable of `first`, variable of `second`)
    pub measured: BTreeMap<String, (String, String)>,
}

impl Bipartite {
    /// The context measuring the given pair, if any.
    pub fn context_for(&self, first_var: &str, second_var: &str) -> Option<&str> {
        self.measured
            .iter()
            .find(|(_, (a, b))| a == first_var && b == second_var)
            .map(|(ctx, _)| ctx.as_str())
    }
}

/// A program that passed [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedProgram {
    program: Program,
    bipartite: Option<Bipartite>,
}

impl ValidatedProgram {
    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn into_program(self) -> Program {
        self.program
    }

    /// Present for `no-signal` and `signal(..)` designs.
    pub fn bipartite(&self) -> Option<&Bipartite> {
        self.bipartite.as_ref()
    }
}

pub fn validate(program: Program) -> Result<ValidatedProgram, ValidationError> {
    let owners = check_components(&program)?;
    check_contexts(&program)?;
    check_directive(&program)?;
    check_component_usage(&program)?;
    let bipartite = match &program.directive.design {
        Design::NoSignal => Some(resolve_bipartite(&program, &owners, None)?),
        Design::Signal { from, to } => Some(resolve_bipartite(&program, &owners, Some((from, to)))?),
        Design::Auto | Design::Order => None,
    };
    Ok(ValidatedProgram { program, bipartite })
}

fn check_components(program: &Program) -> Result<HashMap<String, String>, ValidationError> {
    let mut names = BTreeSet::new();
    let mut owners: HashMap<String, String> = HashMap::new();
    for comp in &program.components {
        if !names.insert(comp.name.name.as_str()) {
            return Err(ValidationError::DuplicateComponent { name: comp.name.name.clone(), span: comp.name.span });
        }
        let mut seen = BTreeSet::new();
        for var in &comp.variables {
            if !seen.insert(var.name.as_str()) {
                return Err(ValidationError::DuplicateVariable {
                    name: var.name.clone(),
                    owner: format!("component {}", comp.name),
                    span: var.span,
                });
            }
            if let Some(first) = owners.get(&var.name) {
                return Err(ValidationError::SharedComponentVariable {
                    name: var.name.clone(),
                    first: first.clone(),
                    second: comp.name.name.clone(),
                    span: var.span,
                });
            }
            owners.insert(var.name.clone(), comp.name.name.clone());
        }
    }
    Ok(owners)
}

fn check_bias(name: &Ident, bias: &BigRational) -> Result<(), ValidationError> {
    if *bias < BigRational::zero() || *bias > BigRational::one() {
        return Err(ValidationError::BiasOutOfRange { name: name.name.clone(), value: bias.to_string(), span: name.span });
    }
    Ok(())
}

fn check_contexts(program: &Program) -> Result<(), ValidationError> {
    let mut names = BTreeSet::new();
    for ctx in &program.contexts {
        let scope = ctx.name.name.clone();
        if !names.insert(ctx.name.name.as_str()) {
            return Err(ValidationError::DuplicateContext { name: scope, span: ctx.name.span });
        }
        let mut declared: BTreeSet<&str> = BTreeSet::new();
        for stmt in &ctx.statements {
            let name = stmt.name();
            match stmt {
                Stmt::Flip { bias, .. } => check_bias(name, bias)?,
                Stmt::Cond { condition, if_true, if_false, .. } => {
                    if !declared.contains(condition.name.as_str()) {
                        return Err(ValidationError::UndefinedVariable {
                            name: condition.name.clone(),
                            scope,
                            span: condition.span,
                        });
                    }
                    check_bias(name, if_true)?;
                    check_bias(name, if_false)?;
                }
            }
            if !declared.insert(name.name.as_str()) {
                return Err(ValidationError::ShadowedVariable { name: name.name.clone(), scope, span: name.span });
            }
        }
        if declared.contains(ctx.joint_binding.name.as_str()) {
            return Err(ValidationError::ShadowedVariable {
                name: ctx.joint_binding.name.clone(),
                scope,
                span: ctx.joint_binding.span,
            });
        }
        let mut in_joint = BTreeSet::new();
        for var in &ctx.joint {
            if !declared.contains(var.name.as_str()) {
                return Err(ValidationError::UndefinedVariable { name: var.name.clone(), scope, span: var.span });
            }
            if !in_joint.insert(var.name.as_str()) {
                return Err(ValidationError::DuplicateVariable {
                    name: var.name.clone(),
                    owner: format!("the joint list of {scope}"),
                    span: var.span,
                });
            }
        }
        if ctx.infer_target != ctx.joint_binding {
            return Err(ValidationError::UndefinedVariable {
                name: ctx.infer_target.name.clone(),
                scope,
                span: ctx.infer_target.span,
            });
        }
    }
    Ok(())
}

fn check_directive(program: &Program) -> Result<(), ValidationError> {
    let mut seen = BTreeSet::new();
    for name in &program.directive.contexts {
        if program.context(&name.name).is_none() {
            return Err(ValidationError::UnknownContext { name: name.name.clone(), span: name.span });
        }
        if !seen.insert(name.name.as_str()) {
            return Err(ValidationError::DuplicateModelEntry { name: name.name.clone(), span: name.span });
        }
    }
    Ok(())
}

fn check_component_usage(program: &Program) -> Result<(), ValidationError> {
    for comp in &program.components {
        for var in &comp.variables {
            let used = program.contexts.iter().any(|c| c.joint.iter().any(|j| j.name == var.name));
            if !used {
                return Err(ValidationError::UnusedComponentVariable {
                    component: comp.name.name.clone(),
                    variable: var.name.clone(),
                    span: var.span,
                });
            }
        }
    }
    Ok(())
}

fn resolve_bipartite(
    program: &Program,
    owners: &HashMap<String, String>,
    signal: Option<(&Ident, &Ident)>,
) -> Result<Bipartite, ValidationError> {
    let design = program.directive.design.to_string();
    if program.components.len() != 2 {
        return Err(ValidationError::ComponentCount { design, found: program.components.len() });
    }
    let (first, second) = match signal {
        Some((from, to)) => {
            for end in [from, to] {
                if program.component(&end.name).is_none() {
                    return Err(ValidationError::UnknownComponent { name: end.name.clone(), span: end.span });
                }
            }
            if from == to {
                return Err(ValidationError::ComponentCount { design, found: 1 });
            }
            (program.component(&from.name).unwrap().clone(), program.component(&to.name).unwrap().clone())
        }
        None => (program.components[0].clone(), program.components[1].clone()),
    };

    let mut measured = BTreeMap::new();
    for ctx in program.model_contexts() {
        let context = ctx.name.name.clone();
        let mut a = None;
        let mut b = None;
        for var in &ctx.joint {
            let slot = match owners.get(&var.name) {
                Some(owner) if *owner == first.name.name => &mut a,
                Some(_) => &mut b,
                None => {
                    return Err(ValidationError::ComponentCoverage {
                        context,
                        reason: format!("`{}` belongs to no component", var.name),
                    })
                }
            };
            if slot.replace(var.name.clone()).is_some() {
                return Err(ValidationError::ComponentCoverage {
                    context,
                    reason: format!("measures more than one variable of the component owning `{}`", var.name),
                });
            }
        }
        match (a, b) {
            (Some(a), Some(b)) => {
                measured.insert(context, (a, b));
            }
            (None, _) => {
                return Err(ValidationError::ComponentCoverage {
                    context,
                    reason: format!("measures no variable of component {}", first.name),
                })
            }
            (_, None) => {
                return Err(ValidationError::ComponentCoverage {
                    context,
                    reason: format!("measures no variable of component {}", second.name),
                })
            }
        }
    }

    // every pair of measurements must be performed by exactly one context
    for va in &first.variables {
        for vb in &second.variables {
            let hits: Vec<&String> = measured
                .iter()
                .filter(|(_, (a, b))| *a == va.name && *b == vb.name)
                .map(|(c, _)| c)
                .collect();
            match hits.len() {
                1 => {}
                0 => {
                    return Err(ValidationError::ComponentCoverage {
                        context: "(none)".into(),
                        reason: format!("no model context measures the pair ({va}, {vb})"),
                    })
                }
                _ => {
                    return Err(ValidationError::ComponentCoverage {
                        context: hits[1].clone(),
                        reason: format!("pair ({va}, {vb}) is already measured by {}", hits[0]),
                    })
                }
            }
        }
    }
    Ok(Bipartite { first, second, measured })
}
