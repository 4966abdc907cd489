//! Recursive-descent parser for P-program source.

use num_rational::BigRational;

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::SyntaxError;
use crate::rational::parse_decimal;

const RESERVED: &[&str] = &["var", "def", "return", "context", "component", "flip", "model", "Infer"];

pub fn parse(source: &str) -> Result<Program, SyntaxError> {
    let tokens = tokenize(source)?;
    Parser { tokens, pos: 0 }.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_nth(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: &str, expected: &[&str]) -> SyntaxError {
        let tok = self.peek();
        SyntaxError::new(
            tok.span,
            message,
            expected.iter().map(|s| s.to_string()).collect(),
            &tok.kind.describe(),
        )
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<Span, SyntaxError> {
        if self.is_keyword(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.error(&format!("expected `{kw}`"), &[kw]))
        }
    }

    fn punct(&mut self, kind: TokenKind) -> Result<Span, SyntaxError> {
        if self.peek().kind == kind {
            Ok(self.advance().span)
        } else {
            let sym = kind.symbol();
            Err(self.error(&format!("expected `{sym}`"), &[sym]))
        }
    }

    fn ident(&mut self) -> Result<Ident, SyntaxError> {
        match &self.peek().kind {
            TokenKind::Ident(name) if !RESERVED.contains(&name.as_str()) => {
                let name = name.clone();
                let span = self.advance().span;
                Ok(Ident::at(name, span))
            }
            TokenKind::Ident(name) => {
                let msg = format!("`{name}` is reserved and cannot be used as a name");
                Err(self.error(&msg, &["identifier"]))
            }
            _ => Err(self.error("expected an identifier", &["identifier"])),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<Ident>, SyntaxError> {
        let mut out = vec![self.ident()?];
        while self.peek().kind == TokenKind::Comma {
            self.advance();
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut components = Vec::new();
        let mut contexts = Vec::new();
        loop {
            if self.is_keyword("def") {
                if !contexts.is_empty() {
                    return Err(self.error("component definitions must precede all contexts", &["var", "return"]));
                }
                components.push(self.component_def()?);
            } else if self.is_keyword("var") {
                contexts.push(self.context_def()?);
            } else if self.is_keyword("return") {
                break;
            } else if self.peek().kind == TokenKind::Eof {
                return Err(self.error("missing final `return {model(...)}`", &["def", "var", "return"]));
            } else {
                return Err(self.error("expected a component, a context or the final return", &["def", "var", "return"]));
            }
        }
        self.keyword("return")?;
        self.punct(TokenKind::LBrace)?;
        let directive = self.model_expr()?;
        self.punct(TokenKind::RBrace)?;
        if self.peek().kind == TokenKind::Semi {
            self.advance();
        }
        if self.peek().kind != TokenKind::Eof {
            return Err(self.error("unexpected input after the final return", &["end of input"]));
        }
        Ok(Program { components, contexts, directive })
    }

    fn component_def(&mut self) -> Result<ComponentDef, SyntaxError> {
        self.keyword("def")?;
        let name = self.ident()?;
        self.punct(TokenKind::Eq)?;
        self.keyword("component")?;
        self.punct(TokenKind::LParen)?;
        let variables = self.ident_list()?;
        self.punct(TokenKind::RParen)?;
        if self.peek().kind == TokenKind::Semi {
            self.advance();
        }
        Ok(ComponentDef { name, variables })
    }

    fn context_def(&mut self) -> Result<ContextDef, SyntaxError> {
        self.keyword("var")?;
        let name = self.ident()?;
        self.punct(TokenKind::Eq)?;
        self.keyword("context")?;
        self.punct(TokenKind::LParen)?;
        self.punct(TokenKind::RParen)?;
        self.punct(TokenKind::LBrace)?;

        let mut statements = Vec::new();
        let mut joint = None;
        while self.is_keyword("var") {
            if joint.is_some() {
                return Err(self.error("the joint list must be the last declaration before `return`", &["return"]));
            }
            self.advance();
            let target = self.ident()?;
            self.punct(TokenKind::Eq)?;
            if self.peek().kind == TokenKind::LBracket {
                self.advance();
                let vars = self.ident_list()?;
                self.punct(TokenKind::RBracket)?;
                joint = Some((target, vars));
            } else {
                statements.push(self.rand_expr(target)?);
            }
        }
        let (joint_binding, joint) = match joint {
            Some(j) => j,
            None => return Err(self.error("a context must declare its joint list, e.g. `var p = [A, B]`", &["var"])),
        };

        self.keyword("return")?;
        self.punct(TokenKind::LBrace)?;
        self.keyword("Infer")?;
        self.punct(TokenKind::LParen)?;
        self.punct(TokenKind::LBrace)?;
        self.keyword("samples")?;
        self.punct(TokenKind::Colon)?;
        let samples = self.sample_count()?;
        self.punct(TokenKind::RBrace)?;
        self.punct(TokenKind::Comma)?;
        let infer_target = self.ident()?;
        self.punct(TokenKind::RParen)?;
        self.punct(TokenKind::RBrace)?;
        self.punct(TokenKind::RBrace)?;
        self.punct(TokenKind::Semi)?;
        Ok(ContextDef { name, statements, joint_binding, joint, samples, infer_target })
    }

    fn sample_count(&mut self) -> Result<u64, SyntaxError> {
        if let TokenKind::Number(text) = &self.peek().kind {
            if let Ok(n) = text.parse::<u64>() {
                if n >= 1 {
                    self.advance();
                    return Ok(n);
                }
            }
        }
        Err(self.error("expected a positive integer sample count", &["integer"]))
    }

    fn rand_expr(&mut self, name: Ident) -> Result<Stmt, SyntaxError> {
        if self.is_keyword("flip") {
            let bias = self.flip()?;
            return Ok(Stmt::Flip { name, bias });
        }
        let condition = self.ident()?;
        self.punct(TokenKind::Question)?;
        self.reject_nested()?;
        let if_true = self.flip()?;
        self.punct(TokenKind::Colon)?;
        self.reject_nested()?;
        let if_false = self.flip()?;
        Ok(Stmt::Cond { name, condition, if_true, if_false })
    }

    fn reject_nested(&self) -> Result<(), SyntaxError> {
        if matches!(self.peek().kind, TokenKind::Ident(_)) && self.peek_nth(1).kind == TokenKind::Question {
            return Err(self.error("conditionals nest at most one level deep", &["flip"]));
        }
        Ok(())
    }

    fn flip(&mut self) -> Result<BigRational, SyntaxError> {
        self.keyword("flip")?;
        self.punct(TokenKind::LParen)?;
        let bias = match &self.peek().kind {
            TokenKind::Number(text) => match parse_decimal(text) {
                Some(r) => r,
                None => return Err(self.error("malformed decimal literal", &["decimal"])),
            },
            _ => return Err(self.error("expected a bias between 0 and 1", &["decimal"])),
        };
        self.advance();
        self.punct(TokenKind::RParen)?;
        Ok(bias)
    }

    fn model_expr(&mut self) -> Result<ModelDirective, SyntaxError> {
        self.keyword("model")?;
        self.punct(TokenKind::LParen)?;
        let directive = if self.peek().kind == TokenKind::LBrace {
            self.advance();
            self.keyword("design")?;
            self.punct(TokenKind::Colon)?;
            let design = self.design()?;
            self.punct(TokenKind::Comma)?;
            let contexts = self.ident_list()?;
            self.punct(TokenKind::RBrace)?;
            ModelDirective { design, contexts }
        } else {
            ModelDirective { design: Design::Auto, contexts: self.ident_list()? }
        };
        self.punct(TokenKind::RParen)?;
        Ok(directive)
    }

    fn design(&mut self) -> Result<Design, SyntaxError> {
        let (text, span) = match &self.peek().kind {
            TokenKind::Str(s) => (s.clone(), self.peek().span),
            _ => return Err(self.error("expected a quoted design", &["'no-signal'", "'signal(A->B)'", "'order'"])),
        };
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let design = match compact.as_str() {
            "no-signal" => Design::NoSignal,
            "order" => Design::Order,
            other => {
                let inner = other.strip_prefix("signal(").and_then(|s| s.strip_suffix(')'));
                let (from, to) = match inner.and_then(|s| s.split_once("->")) {
                    Some(parts) => parts,
                    None => return Err(self.error("unknown design", &["'no-signal'", "'signal(A->B)'", "'order'"])),
                };
                let valid = |s: &str| {
                    let mut cs = s.chars();
                    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
                        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
                };
                if !valid(from) || !valid(to) {
                    return Err(self.error("signal endpoints must be component names", &["'signal(A->B)'"]));
                }
                Design::Signal { from: Ident::at(from, span), to: Ident::at(to, span) }
            }
        };
        self.advance();
        Ok(design)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const CTX: &str = "var P1 = context() { var A = flip(0.5) var p = [A] return {Infer({samples:10}, p)} };";

    #[test]
    fn empty_source_is_missing_return() {
        let err = parse("").unwrap_err();
        assert!(err.message.contains("missing final"));
        assert!(err.expected.contains(&"return".to_string()));
        assert_eq!(err.span, Span { line: 1, column: 1 });
    }

    #[test]
    fn minimal_program() {
        let p = parse(&format!("{CTX} return {{model(P1)}}")).unwrap();
        assert_eq!(p.contexts.len(), 1);
        assert_eq!(p.contexts[0].samples, 10);
        assert_eq!(p.directive.design, Design::Auto);
        match &p.contexts[0].statements[0] {
            Stmt::Flip { bias, .. } => assert_eq!(bias, &ratio(1, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn designs() {
        let parse_design = |d: &str| parse(&format!("{CTX} return {{model({{design: {d}, P1}})}}")).map(|p| p.directive.design);
        assert_eq!(parse_design("'no-signal'").unwrap(), Design::NoSignal);
        assert_eq!(parse_design("'order'").unwrap(), Design::Order);
        assert_eq!(
            parse_design("'signal(A -> B)'").unwrap(),
            Design::Signal { from: Ident::new("A"), to: Ident::new("B") }
        );
        assert!(parse_design("'sideways'").is_err());
        assert!(parse_design("`no-signal'").is_err());
    }

    #[test]
    fn nested_conditionals_are_diagnosed() {
        let src = "var P1 = context() { var A = flip(0.5) var B = flip(0.5) var C = A ? B ? flip(1) : flip(0) : flip(0) var p = [C] return {Infer({samples:10}, p)} }; return {model(P1)}";
        let err = parse(src).unwrap_err();
        assert!(err.message.contains("nest"), "{err}");
    }

    #[test]
    fn components_must_come_first() {
        let src = format!("{CTX} def A = component(A) return {{model(P1)}}");
        assert!(parse(&src).unwrap_err().message.contains("precede"));
    }

    #[test]
    fn missing_paren_reports_location() {
        // the order-effects listing as printed drops the `)` after `p`
        let src = "var P1 = context() {\n var A = flip(0.7)\n var p=[A]\n return {Infer({samples:1000},p}\n};\nreturn {model(P1)}";
        let err = parse(src).unwrap_err();
        assert_eq!(err.span.line, 4);
        assert_eq!(err.expected, vec![")".to_string()]);
    }

    #[test]
    fn reserved_words_are_not_names() {
        let src = "var flip = context() { var A = flip(0.5) var p = [A] return {Infer({samples:1}, p)} }; return {model(flip)}";
        assert!(parse(src).unwrap_err().message.contains("reserved"));
    }

    #[test]
    fn zero_samples_rejected() {
        let src = "var P1 = context() { var A = flip(0.5) var p = [A] return {Infer({samples:0}, p)} }; return {model(P1)}";
        assert!(parse(src).unwrap_err().message.contains("sample count"));
    }

    #[test]
    fn joint_list_must_be_last() {
        let src = "var P1 = context() { var p = [A] var A = flip(0.5) return {Infer({samples:1}, p)} }; return {model(P1)}";
        assert!(parse(src).is_err());
    }
}
