use super::ast::Span;
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Question,
    Colon,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(s) => format!("number `{s}`"),
            TokenKind::Str(s) => format!("string '{s}'"),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Comma => ",",
            TokenKind::Semi => ";",
            TokenKind::Eq => "=",
            TokenKind::Question => "?",
            TokenKind::Colon => ":",
            TokenKind::Ident(_) => "identifier",
            TokenKind::Number(_) => "number",
            TokenKind::Str(_) => "string",
            TokenKind::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let mut line = 1;
    let mut column = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let span = Span { line, column };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let simple = match c {
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            ',' => Some(TokenKind::Comma),
            ';' => Some(TokenKind::Semi),
            '=' => Some(TokenKind::Eq),
            '?' => Some(TokenKind::Question),
            ':' => Some(TokenKind::Colon),
            _ => None,
        };
        if let Some(kind) = simple {
            bump!();
            tokens.push(Token { kind, span });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut text = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    text.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            tokens.push(Token { kind: TokenKind::Ident(text), span });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut text = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() || c == '.' {
                    text.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            tokens.push(Token { kind: TokenKind::Number(text), span });
            continue;
        }
        if c == '\'' {
            bump!();
            let mut text = String::new();
            loop {
                match bump!() {
                    Some('\'') => break,
                    Some('\n') | None => {
                        return Err(SyntaxError::new(span, "unterminated string literal", vec!["'".into()], "end of line"));
                    }
                    Some(c) => text.push(c),
                }
            }
            tokens.push(Token { kind: TokenKind::Str(text), span });
            continue;
        }
        if c == '`' || c == '"' {
            return Err(SyntaxError::new(span, "design strings are quoted with single quotes", vec!["'".into()], &format!("`{c}`")));
        }
        return Err(SyntaxError::new(span, "unexpected character", vec![], &format!("`{c}`")));
    }
    tokens.push(Token { kind: TokenKind::Eof, span: Span { line, column } });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("# header\n  var A = flip(0.5)").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Ident("var".into()));
        assert_eq!(toks[0].span, Span { line: 2, column: 3 });
        assert_eq!(toks[5].kind, TokenKind::Number("0.5".into()));
    }

    #[test]
    fn strings_and_punctuation() {
        assert_eq!(
            kinds("{design: 'signal(A->B)',P1}"),
            vec![
                TokenKind::LBrace,
                TokenKind::Ident("design".into()),
                TokenKind::Colon,
                TokenKind::Str("signal(A->B)".into()),
                TokenKind::Comma,
                TokenKind::Ident("P1".into()),
                TokenKind::RBrace,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn back_quotes_are_rejected() {
        let err = tokenize("model({design: `no-signal',P1})").unwrap_err();
        assert_eq!(err.span, Span { line: 1, column: 16 });
    }

    #[test]
    fn unterminated_string() {
        assert!(tokenize("'order").is_err());
    }
}
