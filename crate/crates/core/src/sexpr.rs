//! Minimal s-expression reader shared by term syntaxes.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn parse(text: &str) -> Result<Sexp> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let sexp = parse_at(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!(
                "trailing input after s-expression in {text:?}"
            )));
        }
        Ok(sexp)
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    /// Splits `(head rest...)` into the head atom and the remaining items.
    pub fn as_call(&self) -> Option<(&str, &[Sexp])> {
        match self {
            Sexp::List(items) => {
                let (head, rest) = items.split_first()?;
                Some((head.as_atom()?, rest))
            }
            Sexp::Atom(_) => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn parse_at(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| Error::Parse("unexpected end of s-expression".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err(Error::Parse("unbalanced '('".into())),
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(parse_at(tokens, pos)?),
                }
            }
        }
        ")" => Err(Error::Parse("unexpected ')'".into())),
        atom => Ok(Sexp::Atom(atom.to_string())),
    }
}
