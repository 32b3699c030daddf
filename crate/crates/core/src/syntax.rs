//! Formula syntax: AST, concrete grammar, renderer and structural analysis.
//!
//! Concrete grammar (loosest to tightest):
//!
//! ```text
//! formula := "forall" VAR "." formula | iff
//! iff     := imp ("<->" imp)*            (desugared, left-assoc)
//! imp     := or ("->" imp)?              (right-assoc)
//! or      := and ("|" and)*
//! and     := id ("&" id)*
//! id      := unary ("==" unary)?         (non-associative)
//! unary   := "~" unary | "[]" unary | "(" formula ")"
//!          | "bot" | "top" | VAR | "#" IDENT
//! VAR     := "x" DIGITS
//! ```
//!
//! `a <-> b` is sugar for `(a -> b) & (b -> a)` and never appears in the
//! AST.  A `#` immediately followed by an identifier is a named constant;
//! any other `#` starts a comment running to the end of the line.
//! `forall x. f` requires `x` to occur free in `f`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A propositional variable `x0, x1, ...`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl Var {
    /// Parses `x<digits>`.
    pub fn parse(s: &str) -> Option<Var> {
        let rest = s.strip_prefix('x')?;
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        rest.parse().ok().map(Var)
    }
}

/// A propositional constant: the builtins `bot`/`top` or a named `#c`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Const {
    Bot,
    Top,
    Named(String),
}

impl Const {
    /// The key used for this constant in interpretation maps.
    pub fn key(&self) -> &str {
        match self {
            Const::Bot => "bot",
            Const::Top => "top",
            Const::Named(s) => s,
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Bot => write!(f, "bot"),
            Const::Top => write!(f, "top"),
            Const::Named(s) => write!(f, "#{s}"),
        }
    }
}

/// Formula AST.  `Forall(x, f)` is only well-formed when `x` is free in `f`;
/// [`Formula::forall`] enforces this.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    Var(Var),
    Const(Const),
    Neg(Box<Formula>),
    /// Necessity, written `[]f`.
    Nec(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    /// Propositional identity, written `f == g`.
    Id(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("forall {var} binds no free occurrence in its body")]
    VacuousQuantifier { var: Var },
}

pub fn var(i: u32) -> Formula {
    Formula::Var(Var(i))
}
pub fn bot() -> Formula {
    Formula::Const(Const::Bot)
}
pub fn top() -> Formula {
    Formula::Const(Const::Top)
}
pub fn neg(f: Formula) -> Formula {
    Formula::Neg(Box::new(f))
}
pub fn nec(f: Formula) -> Formula {
    Formula::Nec(Box::new(f))
}
pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}
pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}
pub fn imp(a: Formula, b: Formula) -> Formula {
    Formula::Imp(Box::new(a), Box::new(b))
}
pub fn id(a: Formula, b: Formula) -> Formula {
    Formula::Id(Box::new(a), Box::new(b))
}

impl Formula {
    /// Well-formed quantification: errors when `x` is not free in `body`.
    pub fn forall(x: Var, body: Formula) -> Result<Formula, SyntaxError> {
        if !body.fvar().contains(&x) {
            return Err(SyntaxError::VacuousQuantifier { var: x });
        }
        Ok(Formula::Forall(x, Box::new(body)))
    }

    /// Free variables.
    pub fn fvar(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_fvar(&mut out);
        out
    }

    fn collect_fvar(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Var(v) => {
                out.insert(*v);
            }
            Formula::Const(_) => {}
            Formula::Neg(f) | Formula::Nec(f) => f.collect_fvar(out),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Imp(a, b) | Formula::Id(a, b) => {
                a.collect_fvar(out);
                b.collect_fvar(out);
            }
            Formula::Forall(x, f) => {
                let mut inner = BTreeSet::new();
                f.collect_fvar(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
        }
    }

    /// All variables, bound or free.
    pub fn var(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            match f {
                Formula::Var(v) => {
                    out.insert(*v);
                }
                Formula::Forall(x, _) => {
                    out.insert(*x);
                }
                _ => {}
            };
        });
        out
    }

    /// Constants occurring in the formula.
    pub fn con(&self) -> BTreeSet<Const> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Const(c) = f {
                out.insert(c.clone());
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Var(_) | Formula::Const(_) => {}
            Formula::Neg(a) | Formula::Nec(a) => a.walk(f),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Imp(a, b) | Formula::Id(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Formula::Forall(_, a) => a.walk(f),
        }
    }

    /// Quantifier rank: maximal nesting depth of `forall`.
    pub fn qrank(&self) -> u32 {
        match self {
            Formula::Var(_) | Formula::Const(_) => 0,
            Formula::Neg(a) | Formula::Nec(a) => a.qrank(),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Imp(a, b) | Formula::Id(a, b) => {
                a.qrank().max(b.qrank())
            }
            Formula::Forall(_, a) => a.qrank() + 1,
        }
    }

    /// AST height (atoms have depth 0).
    pub fn depth(&self) -> u32 {
        match self {
            Formula::Var(_) | Formula::Const(_) => 0,
            Formula::Neg(a) | Formula::Nec(a) | Formula::Forall(_, a) => a.depth() + 1,
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Imp(a, b) | Formula::Id(a, b) => {
                a.depth().max(b.depth()) + 1
            }
        }
    }

    /// Greatest variable index occurring (bound or free), or `None`.
    pub fn max_var_index(&self) -> Option<u32> {
        self.var().into_iter().map(|v| v.0).max()
    }

    /// Smallest syntactic fragment containing the formula.
    pub fn fragment(&self) -> Fragment {
        let mut has_box = false;
        let mut has_id = false;
        let mut has_forall = false;
        let mut has_named = false;
        self.walk(&mut |f| match f {
            Formula::Nec(_) => has_box = true,
            Formula::Id(_, _) => has_id = true,
            Formula::Forall(_, _) => has_forall = true,
            Formula::Const(Const::Named(_)) => has_named = true,
            _ => {}
        });
        if has_id || has_forall || has_named {
            Fragment::Full
        } else if has_box {
            Fragment::Modal
        } else {
            Fragment::Prop
        }
    }

    /// Renders with minimal parentheses; `parse(render(f)) == f`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s, 0);
        s
    }

    fn render_into(&self, out: &mut String, min_prec: u8) {
        // precedence: forall-body 1, -> 2, | 3, & 4, == 5, prefix 6, atom 7
        let prec = match self {
            Formula::Forall(_, _) => 1,
            Formula::Imp(_, _) => 2,
            Formula::Or(_, _) => 3,
            Formula::And(_, _) => 4,
            Formula::Id(_, _) => 5,
            Formula::Neg(_) | Formula::Nec(_) => 6,
            Formula::Var(_) | Formula::Const(_) => 7,
        };
        let parens = prec < min_prec;
        if parens {
            out.push('(');
        }
        match self {
            Formula::Var(v) => out.push_str(&v.to_string()),
            Formula::Const(c) => out.push_str(&c.to_string()),
            Formula::Neg(a) => {
                out.push('~');
                a.render_into(out, 6);
            }
            Formula::Nec(a) => {
                out.push_str("[]");
                a.render_into(out, 6);
            }
            Formula::Or(a, b) => {
                // left-assoc chain: left child may be another `|` unparenthesised
                a.render_into(out, 3);
                out.push_str(" | ");
                b.render_into(out, 4);
            }
            Formula::And(a, b) => {
                a.render_into(out, 4);
                out.push_str(" & ");
                b.render_into(out, 5);
            }
            Formula::Imp(a, b) => {
                a.render_into(out, 3);
                out.push_str(" -> ");
                b.render_into(out, 2); // right-assoc
            }
            Formula::Id(a, b) => {
                a.render_into(out, 6);
                out.push_str(" == ");
                b.render_into(out, 6);
            }
            Formula::Forall(x, body) => {
                out.push_str("forall ");
                out.push_str(&x.to_string());
                out.push_str(". ");
                body.render_into(out, 1);
            }
        }
        if parens {
            out.push(')');
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Structural analysis bundle, handy for CLI output.
#[derive(Serialize, Debug)]
pub struct Analysis {
    pub rendered: String,
    pub fvar: Vec<String>,
    pub var: Vec<String>,
    pub con: Vec<String>,
    pub qrank: u32,
    pub depth: u32,
    pub fragment: Fragment,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Fragment {
    /// Quantifier-free, identity-free, `[]`-free, constants among bot/top.
    #[serde(rename = "propositional")]
    Prop,
    /// Quantifier-free, identity-free, constants among bot/top.
    #[serde(rename = "modal")]
    Modal,
    #[serde(rename = "full")]
    Full,
}

pub fn analyze(f: &Formula) -> Analysis {
    Analysis {
        rendered: f.render(),
        fvar: f.fvar().iter().map(|v| v.to_string()).collect(),
        var: f.var().iter().map(|v| v.to_string()).collect(),
        con: f.con().iter().map(|c| c.to_string()).collect(),
        qrank: f.qrank(),
        depth: f.depth(),
        fragment: f.fragment(),
    }
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Forall,
    Var(Var),
    Bot,
    Top,
    Named(String),
    Neg,
    Box_,
    LParen,
    RParen,
    Dot,
    Arrow,
    Iff,
    Or,
    And,
    IdEq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Forall => "forall",
            Tok::Var(v) => return write!(f, "{v}"),
            Tok::Bot => "bot",
            Tok::Top => "top",
            Tok::Named(n) => return write!(f, "#{n}"),
            Tok::Neg => "~",
            Tok::Box_ => "[]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Dot => ".",
            Tok::Arrow => "->",
            Tok::Iff => "<->",
            Tok::Or => "|",
            Tok::And => "&",
            Tok::IdEq => "==",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let err = |pos: usize, msg: String| SyntaxError::Parse { pos, msg };
    while i < b.len() {
        let c = b[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                if i + 1 < b.len() && (b[i + 1].is_ascii_alphabetic() || b[i + 1] == b'_') {
                    let start = i + 1;
                    let mut j = start;
                    while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
                        j += 1;
                    }
                    out.push((Tok::Named(src[start..j].to_string()), i));
                    i = j;
                } else {
                    while i < b.len() && b[i] != b'\n' {
                        i += 1;
                    }
                }
            }
            b'~' => {
                out.push((Tok::Neg, i));
                i += 1;
            }
            b'[' => {
                if i + 1 < b.len() && b[i + 1] == b']' {
                    out.push((Tok::Box_, i));
                    i += 2;
                } else {
                    return Err(err(i, "expected `[]`".into()));
                }
            }
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b'.' => {
                out.push((Tok::Dot, i));
                i += 1;
            }
            b'|' => {
                out.push((Tok::Or, i));
                i += 1;
            }
            b'&' => {
                out.push((Tok::And, i));
                i += 1;
            }
            b'-' => {
                if i + 1 < b.len() && b[i + 1] == b'>' {
                    out.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(err(i, "expected `->`".into()));
                }
            }
            b'<' => {
                if i + 2 < b.len() && b[i + 1] == b'-' && b[i + 2] == b'>' {
                    out.push((Tok::Iff, i));
                    i += 3;
                } else {
                    return Err(err(i, "expected `<->`".into()));
                }
            }
            b'=' => {
                if i + 1 < b.len() && b[i + 1] == b'=' {
                    out.push((Tok::IdEq, i));
                    i += 2;
                } else {
                    return Err(err(i, "expected `==`".into()));
                }
            }
            _ if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                let mut j = i;
                while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
                    j += 1;
                }
                let word = &src[start..j];
                let tok = match word {
                    "forall" => Tok::Forall,
                    "bot" => Tok::Bot,
                    "top" => Tok::Top,
                    _ => match Var::parse(word) {
                        Some(v) => Tok::Var(v),
                        None => {
                            return Err(err(
                                start,
                                format!("unknown identifier `{word}` (variables are x0, x1, ...)"),
                            ))
                        }
                    },
                };
                out.push((tok, start));
                i = j;
            }
            _ => return Err(err(i, format!("unexpected character `{}`", c as char))),
        }
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

// --------------------------------------------------------------- parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), SyntaxError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(SyntaxError::Parse {
                pos: self.here(),
                msg: format!("expected `{want}`, found `{}`", self.peek()),
            })
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        if *self.peek() == Tok::Forall {
            let pos = self.here();
            self.bump();
            let x = match self.bump() {
                Tok::Var(v) => v,
                t => {
                    return Err(SyntaxError::Parse {
                        pos,
                        msg: format!("expected variable after `forall`, found `{t}`"),
                    })
                }
            };
            self.expect(&Tok::Dot)?;
            let body = self.formula()?;
            Formula::forall(x, body)
        } else {
            self.iff()
        }
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.imp()?;
            lhs = and(imp(lhs.clone(), rhs.clone()), imp(rhs, lhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.imp()?;
            Ok(imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.id()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = and(lhs, self.id()?);
        }
        Ok(lhs)
    }

    fn id(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::IdEq {
            self.bump();
            let rhs = self.unary()?;
            Ok(id(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let pos = self.here();
        match self.bump() {
            Tok::Neg => Ok(neg(self.unary()?)),
            Tok::Box_ => Ok(nec(self.unary()?)),
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Bot => Ok(bot()),
            Tok::Top => Ok(top()),
            Tok::Var(v) => Ok(Formula::Var(v)),
            Tok::Named(n) => Ok(Formula::Const(Const::Named(n))),
            t => Err(SyntaxError::Parse {
                pos,
                msg: format!("expected a formula, found `{t}`"),
            }),
        }
    }
}

/// Parses a formula from the concrete grammar.
pub fn parse(src: &str) -> Result<Formula, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(SyntaxError::Parse {
            pos: p.here(),
            msg: format!("trailing input starting at `{}`", p.peek()),
        });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_precedence() {
        let f = parse("x0 -> x1 | x2 & ~x3").unwrap();
        assert_eq!(
            f,
            imp(var(0), or(var(1), and(var(2), neg(var(3)))))
        );
    }

    #[test]
    fn imp_right_assoc() {
        assert_eq!(
            parse("x0 -> x1 -> x2").unwrap(),
            imp(var(0), imp(var(1), var(2)))
        );
    }

    #[test]
    fn or_left_assoc() {
        assert_eq!(
            parse("x0 | x1 | x2").unwrap(),
            or(or(var(0), var(1)), var(2))
        );
    }

    #[test]
    fn iff_desugars() {
        assert_eq!(
            parse("x0 <-> x1").unwrap(),
            and(imp(var(0), var(1)), imp(var(1), var(0)))
        );
    }

    #[test]
    fn id_non_associative() {
        assert!(parse("x0 == x1 == x2").is_err());
        assert_eq!(parse("x0 == x1").unwrap(), id(var(0), var(1)));
    }

    #[test]
    fn forall_body_extends_right() {
        let f = parse("forall x0. x0 -> x1").unwrap();
        assert_eq!(
            f,
            Formula::Forall(Var(0), Box::new(imp(var(0), var(1))))
        );
    }

    #[test]
    fn vacuous_forall_rejected() {
        assert!(matches!(
            parse("forall x0. x1"),
            Err(SyntaxError::VacuousQuantifier { var: Var(0) })
        ));
    }

    #[test]
    fn comments_and_constants() {
        let f = parse("#c & top # trailing comment\n| bot").unwrap();
        assert_eq!(
            f,
            or(and(Formula::Const(Const::Named("c".into())), top()), bot())
        );
    }

    #[test]
    fn box_tokens() {
        assert_eq!(parse("[] ~ x2").unwrap(), nec(neg(var(2))));
    }

    #[test]
    fn render_round_trips_handpicked() {
        for s in [
            "forall x0. x0 == x1",
            "(forall x0. x0 & x1) -> x1",
            "~[](x0 | bot) == top",
            "x0 -> (x1 -> x2) -> x3",
            "((x0 == x1) == x2) | #c",
            "forall x1. forall x0. x0 -> x1",
        ] {
            let f = parse(s).unwrap();
            assert_eq!(parse(&f.render()).unwrap(), f, "{s} -> {}", f.render());
        }
    }

    #[test]
    fn analysis_fields() {
        let f = parse("forall x0. x0 -> x1 & []bot").unwrap();
        let a = analyze(&f);
        assert_eq!(a.fvar, vec!["x1"]);
        assert_eq!(a.var, vec!["x0", "x1"]);
        assert_eq!(a.qrank, 1);
        assert_eq!(a.fragment, Fragment::Full);
        assert_eq!(parse("x0 & ~x1").unwrap().fragment(), Fragment::Prop);
        assert_eq!(parse("[]x0 -> top").unwrap().fragment(), Fragment::Modal);
    }
}
