//! Concrete syntax.
//!
//! ```text
//! term := lam | app
//! lam  := ("\" | "λ") ident+ "." term
//! app  := atom+
//! atom := ident | "(" term ")"
//! ```
//!
//! Application associates to the left and an abstraction body extends as far
//! right as possible. Identifiers that are not bound by an enclosing binder are
//! free variables, unless a resolver maps them to a term.

use std::sync::Arc;

use thiserror::Error;

use crate::term::{Term, TermKind, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Ascii,
    Unicode,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lambda,
    Dot,
    Open,
    Close,
    Ident(String),
}

fn is_ident_char(c: char) -> bool {
    c != 'λ' && (c.is_alphanumeric() || c == '_' || c == '\'')
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '\\' | 'λ' => {
                chars.next();
                out.push((i, Tok::Lambda));
            }
            '.' => {
                chars.next();
                out.push((i, Tok::Dot));
            }
            '(' => {
                chars.next();
                out.push((i, Tok::Open));
            }
            ')' => {
                chars.next();
                out.push((i, Tok::Close));
            }
            c if is_ident_char(c) => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push((i, Tok::Ident(s)));
            }
            other => {
                return Err(ParseError {
                    offset: i,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a, R> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    scope: Vec<String>,
    resolve: &'a R,
}

impl<R> Parser<'_, R>
where
    R: Fn(&str) -> Option<Term>,
{
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if self.peek() == Some(&Tok::Lambda) {
            self.pos += 1;
            let mut names = Vec::new();
            while let Some(Tok::Ident(name)) = self.peek() {
                names.push(name.clone());
                self.pos += 1;
            }
            if names.is_empty() {
                return self.err("expected a binder after lambda");
            }
            if self.peek() != Some(&Tok::Dot) {
                return self.err("expected '.' after binders");
            }
            self.pos += 1;
            let depth = self.scope.len();
            self.scope.extend(names.iter().cloned());
            let body = self.term();
            self.scope.truncate(depth);
            let mut body = body?;
            for name in names.iter().rev() {
                body = Term::lam(name, body);
            }
            return Ok(body);
        }
        let mut acc: Option<Term> = None;
        loop {
            match self.peek() {
                Some(Tok::Ident(_)) | Some(Tok::Open) => {
                    let atom = self.atom()?;
                    acc = Some(match acc {
                        None => atom,
                        Some(f) => Term::app(f, atom),
                    });
                }
                Some(Tok::Lambda) => {
                    // trailing abstraction as the last argument: `f \x.x`
                    let lam = self.term()?;
                    acc = Some(match acc {
                        None => lam,
                        Some(f) => Term::app(f, lam),
                    });
                    break;
                }
                _ => break,
            }
        }
        match acc {
            Some(t) => Ok(t),
            None => self.err("expected a term"),
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(i) = self.scope.iter().rev().position(|n| *n == name) {
                    return Ok(Term::bound(i));
                }
                Ok((self.resolve)(&name).unwrap_or_else(|| Term::free(&name)))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let t = self.term()?;
                if self.peek() != Some(&Tok::Close) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(t)
            }
            _ => self.err("expected an identifier or '('"),
        }
    }
}

/// Parses a term; unbound identifiers become free variables.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    parse_with(text, &|_: &str| None)
}

/// Parses a term, offering each unbound identifier to `resolve` first.
///
/// Resolved terms must be closed; they are spliced in without shifting.
pub fn parse_with<R>(text: &str, resolve: &R) -> Result<Term, ParseError>
where
    R: Fn(&str) -> Option<Term>,
{
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        scope: Vec::new(),
        resolve,
    };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(t)
}

/// Renders a term so that `parse` gives back an alpha-equal term.
pub fn print(t: &Term, style: Style) -> String {
    print_in(t, style, &[])
}

/// Renders an open term whose loose indices refer to `context`
/// (innermost binder last).
pub fn print_in(t: &Term, style: Style, context: &[String]) -> String {
    let mut names: Vec<String> = context.to_vec();
    let mut out = String::new();
    Printer { style }.term(t, &mut names, &mut out);
    out
}

struct Printer {
    style: Style,
}

impl Printer {
    fn lambda(&self) -> &'static str {
        match self.style {
            Style::Ascii => "\\",
            Style::Unicode => "λ",
        }
    }

    /// Picks a display name for a binder: the hint unless it clashes with a
    /// free name or with an enclosing binder the body still refers to.
    fn choose(&self, hint: &str, body: &Term, names: &[String]) -> String {
        let hint = if hint.is_empty() || hint.chars().any(|c| !is_ident_char(c)) {
            "x"
        } else {
            hint
        };
        let clashes = |cand: &str| {
            refers_free(body, cand)
                || names
                    .iter()
                    .rev()
                    .enumerate()
                    .any(|(i, n)| n == cand && body.count_bound(i + 1) > 0)
        };
        if !clashes(hint) {
            return hint.to_string();
        }
        (1..)
            .map(|i| format!("{hint}{i}"))
            .find(|c| !clashes(c))
            .expect("unbounded search")
    }

    fn term(&self, t: &Term, names: &mut Vec<String>, out: &mut String) {
        match t.kind() {
            TermKind::Lam(h, body) => {
                let name = self.choose(h.as_str(), body, names);
                out.push_str(self.lambda());
                out.push_str(&name);
                out.push('.');
                names.push(name);
                self.term(body, names, out);
                names.pop();
            }
            TermKind::App(f, a) => {
                self.fun(f, names, out);
                out.push(' ');
                self.arg(a, names, out);
            }
            TermKind::Var(v) => self.var(v, names, out),
        }
    }

    fn fun(&self, t: &Term, names: &mut Vec<String>, out: &mut String) {
        match t.kind() {
            TermKind::Lam(..) => {
                out.push('(');
                self.term(t, names, out);
                out.push(')');
            }
            TermKind::App(f, a) => {
                self.fun(f, names, out);
                out.push(' ');
                self.arg(a, names, out);
            }
            TermKind::Var(v) => self.var(v, names, out),
        }
    }

    fn arg(&self, t: &Term, names: &mut Vec<String>, out: &mut String) {
        match t.kind() {
            TermKind::Var(v) => self.var(v, names, out),
            _ => {
                out.push('(');
                self.term(t, names, out);
                out.push(')');
            }
        }
    }

    fn var(&self, v: &Var, names: &[String], out: &mut String) {
        match v {
            Var::Free(n) => out.push_str(n),
            Var::Bound(k) => match names.len().checked_sub(k + 1) {
                Some(i) => out.push_str(&names[i]),
                None => out.push_str(&format!("#{k}")),
            },
        }
    }
}

fn refers_free(t: &Term, name: &str) -> bool {
    match t.kind() {
        TermKind::Var(Var::Free(n)) => **n == *name,
        TermKind::Var(_) => false,
        TermKind::Lam(_, b) => refers_free(b, name),
        TermKind::App(f, a) => refers_free(f, name) || refers_free(a, name),
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print(self, Style::Unicode))
    }
}

/// Free-name helper used by callers that need an unused variable name.
pub fn fresh_name(base: &str, t: &Term) -> Arc<str> {
    let names = t.free_names();
    if !names.iter().any(|n| &**n == base) {
        return Arc::from(base);
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|c| !names.iter().any(|n| **n == **c))
        .map(|s| Arc::from(s.as_str()))
        .expect("unbounded search")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::alpha_eq;

    #[test]
    fn identity() {
        let t = parse("\\x.x").unwrap();
        assert_eq!(t, Term::lam("x", Term::bound(0)));
        assert_eq!(print(&t, Style::Ascii), "\\x.x");
    }

    #[test]
    fn owl_and_eta() {
        let delta = parse("\\a b. b (a b)").unwrap();
        let expected = Term::lam(
            "a",
            Term::lam(
                "b",
                Term::app(Term::bound(0), Term::app(Term::bound(1), Term::bound(0))),
            ),
        );
        assert_eq!(delta, expected);
        assert_eq!(print(&delta, Style::Ascii), "\\a.\\b.b (a b)");
        assert_eq!(print(&delta, Style::Unicode), "λa.λb.b (a b)");
        let eta = parse("λx f. f (x x f)").unwrap();
        assert!(alpha_eq(&parse(&print(&eta, Style::Ascii)).unwrap(), &eta));
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse("a b c").unwrap();
        let expected = Term::app(
            Term::app(Term::free("a"), Term::free("b")),
            Term::free("c"),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn body_extends_right() {
        let t = parse("\\x. x y").unwrap();
        assert!(t.is_lam());
        let t = parse("f \\x. x y").unwrap();
        assert!(t.is_app());
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse("\\x x").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse("(a b").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse("a ) b").unwrap_err();
        assert_eq!(e.offset, 2);
        assert!(parse("").is_err());
        assert!(parse("a # b").is_err());
    }

    #[test]
    fn unbound_identifiers_are_free() {
        assert_eq!(parse("y").unwrap(), Term::free("y"));
    }

    #[test]
    fn printer_renames_on_clash() {
        // λy.x with x := y, the binder must be renamed
        let t = Term::lam("y", Term::free("y"));
        assert_eq!(print(&t, Style::Ascii), "\\y1.y");
        // shadowing a binder the body does not use is fine
        let t = parse("\\x.\\x.x").unwrap();
        assert_eq!(print(&t, Style::Ascii), "\\x.\\x.x");
        let t = Term::lam("x", Term::lam("x", Term::bound(1)));
        assert_eq!(print(&t, Style::Ascii), "\\x.\\x1.x");
    }

    #[test]
    fn resolver_splices_terms() {
        let id = parse("\\z.z").unwrap();
        let t = parse_with("\\x. I x", &|n: &str| (n == "I").then(|| id.clone())).unwrap();
        assert_eq!(t, Term::lam("x", Term::app(id, Term::bound(0))));
        // bound names shadow the resolver
        let t = parse_with("\\I. I", &|n: &str| (n == "I").then(|| Term::free("bad"))).unwrap();
        assert_eq!(t, Term::lam("I", Term::bound(0)));
    }
}
