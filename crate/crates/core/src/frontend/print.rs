//! Canonical source rendering. `parse(&program.to_string())` yields a program
//! equal to `program`.

use std::fmt;

use super::ast::*;
use crate::rational;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

/// Decimal text for a bias. Terminating decimals print exactly; anything else
/// (only reachable through hand-built trees) falls back to 18 places.
fn decimal(value: &BigRational) -> String {
    let mut denom = value.denom().clone();
    let mut counts = [0usize; 2];
    for (slot, p) in [2u32, 5].into_iter().enumerate() {
        while (&denom % p).to_u32() == Some(0) {
            denom /= p;
            counts[slot] += 1;
        }
    }
    if !denom.is_one() {
        return rational::format_decimal(value, 18);
    }
    rational::format_decimal(value, counts[0].max(counts[1]).max(1))
}

fn list(items: &[Ident]) -> String {
    items.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for comp in &self.components {
            writeln!(f, "def {} = component({})", comp.name, list(&comp.variables))?;
        }
        if !self.components.is_empty() {
            writeln!(f)?;
        }
        for ctx in &self.contexts {
            writeln!(f, "var {} = context() {{", ctx.name)?;
            for stmt in &ctx.statements {
                match stmt {
                    Stmt::Flip { name, bias } => writeln!(f, "    var {name} = flip({})", decimal(bias))?,
                    Stmt::Cond { name, condition, if_true, if_false } => writeln!(
                        f,
                        "    var {name} = {condition} ? flip({}) : flip({})",
                        decimal(if_true),
                        decimal(if_false)
                    )?,
                }
            }
            writeln!(f, "    var {} = [{}]", ctx.joint_binding, list(&ctx.joint))?;
            writeln!(f, "    return {{Infer({{samples:{}}}, {})}}", ctx.samples, ctx.infer_target)?;
            writeln!(f, "}};")?;
        }
        let names = list(&self.directive.contexts);
        match &self.directive.design {
            Design::Auto => writeln!(f, "return {{model({names})}}"),
            design => writeln!(f, "return {{model({{design: '{design}', {names}}})}}"),
        }
    }
}
