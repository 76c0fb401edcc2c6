//! Integer expression language used for structural equations and for
//! expression-defined state maps.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! or      := and ( "||" and )*
//! and     := cmp ( "&&" cmp )*
//! cmp     := sum ( ("==" | "<" | "<=") sum )?
//! sum     := product ( ("+" | "-") product )*
//! product := unary ( "*" unary )*
//! unary   := ("-" | "!") unary | atom
//! atom    := INT | IDENT | "(" or ")" | "ite" "(" or "," or "," or ")"
//!          | "table" "(" IDENT ("," IDENT)* ")" "[" row ("," row)* "]"
//! row     := key "->" INT        key := INT | "(" INT ("," INT)* ")"
//! ```
//!
//! Booleans are the integers 0 and 1; any nonzero value is true.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::Value;

/// A resolved reference to a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarRef {
    Exo(usize),
    Endo(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    Le,
    And,
    Or,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Eq => "==",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Lt | BinaryOp::Le => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul => 5,
        }
    }
}

const UNARY_PRECEDENCE: u8 = 6;
const ATOM_PRECEDENCE: u8 = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(Value),
    Var(VarRef),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Table { vars: Vec<VarRef>, rows: BTreeMap<Vec<Value>, Value> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("arithmetic overflow")]
    Overflow,
    #[error("lookup table has no row for {0:?}")]
    MissingRow(Vec<Value>),
    #[error("reference to an unbound variable {0:?}")]
    Unbound(VarRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset} in `{source_text}`")]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
    pub source_text: String,
}

impl Expr {
    pub fn var(r: VarRef) -> Self {
        Expr::Var(r)
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn ite(c: Expr, a: Expr, b: Expr) -> Self {
        Expr::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Left-associated sum of the given terms; `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Self {
        terms.into_iter().reduce(|a, b| Expr::binary(BinaryOp::Add, a, b)).unwrap_or(Expr::Lit(0))
    }

    pub fn eval(&self, exo: &[Value], endo: &[Value]) -> Result<Value, EvalError> {
        let lookup = |r: VarRef| -> Result<Value, EvalError> {
            let v = match r {
                VarRef::Exo(i) => exo.get(i),
                VarRef::Endo(i) => endo.get(i),
            };
            v.copied().ok_or(EvalError::Unbound(r))
        };
        let truth = |b: bool| Value::from(b);
        Ok(match self {
            Expr::Lit(v) => *v,
            Expr::Var(r) => lookup(*r)?,
            Expr::Unary(UnaryOp::Neg, e) => e.eval(exo, endo)?.checked_neg().ok_or(EvalError::Overflow)?,
            Expr::Unary(UnaryOp::Not, e) => truth(e.eval(exo, endo)? == 0),
            Expr::Binary(BinaryOp::And, a, b) => truth(a.eval(exo, endo)? != 0 && b.eval(exo, endo)? != 0),
            Expr::Binary(BinaryOp::Or, a, b) => truth(a.eval(exo, endo)? != 0 || b.eval(exo, endo)? != 0),
            Expr::Binary(op, a, b) => {
                let (x, y) = (a.eval(exo, endo)?, b.eval(exo, endo)?);
                match op {
                    BinaryOp::Add => x.checked_add(y).ok_or(EvalError::Overflow)?,
                    BinaryOp::Sub => x.checked_sub(y).ok_or(EvalError::Overflow)?,
                    BinaryOp::Mul => x.checked_mul(y).ok_or(EvalError::Overflow)?,
                    BinaryOp::Eq => truth(x == y),
                    BinaryOp::Lt => truth(x < y),
                    BinaryOp::Le => truth(x <= y),
                    BinaryOp::And | BinaryOp::Or => unreachable!(),
                }
            }
            Expr::Ite(c, a, b) => {
                if c.eval(exo, endo)? != 0 {
                    a.eval(exo, endo)?
                } else {
                    b.eval(exo, endo)?
                }
            }
            Expr::Table { vars, rows } => {
                let key = vars.iter().map(|r| lookup(*r)).collect::<Result<Vec<_>, _>>()?;
                match rows.get(&key) {
                    Some(v) => *v,
                    None => return Err(EvalError::MissingRow(key)),
                }
            }
        })
    }

    /// Every variable the expression mentions.
    pub fn refs(&self) -> BTreeSet<VarRef> {
        let mut out = BTreeSet::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut BTreeSet<VarRef>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(r) => {
                out.insert(*r);
            }
            Expr::Unary(_, e) => e.collect_refs(out),
            Expr::Binary(_, a, b) => {
                a.collect_refs(out);
                b.collect_refs(out);
            }
            Expr::Ite(c, a, b) => {
                c.collect_refs(out);
                a.collect_refs(out);
                b.collect_refs(out);
            }
            Expr::Table { vars, .. } => out.extend(vars.iter().copied()),
        }
    }

    /// Replaces variable references. Table keys can only hold variables, so a
    /// table whose variable is mapped to a non-variable expression is
    /// rewritten as a chain of `ite` lookups over the replacement.
    pub fn substitute(&self, f: &dyn Fn(VarRef) -> Option<Expr>) -> Expr {
        match self {
            Expr::Lit(v) => Expr::Lit(*v),
            Expr::Var(r) => f(*r).unwrap_or(Expr::Var(*r)),
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.substitute(f))),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(f), b.substitute(f)),
            Expr::Ite(c, a, b) => Expr::ite(c.substitute(f), a.substitute(f), b.substitute(f)),
            Expr::Table { vars, rows } => {
                let replaced: Vec<Expr> = vars.iter().map(|r| f(*r).unwrap_or(Expr::Var(*r))).collect();
                if let Some(new_vars) = replaced
                    .iter()
                    .map(|e| match e {
                        Expr::Var(r) => Some(*r),
                        _ => None,
                    })
                    .collect::<Option<Vec<_>>>()
                {
                    return Expr::Table { vars: new_vars, rows: rows.clone() };
                }
                // Fallback: nested ite over all rows; a missing row evaluates to
                // a table lookup that is guaranteed to miss.
                let mut acc = Expr::Table { vars: vec![], rows: BTreeMap::new() };
                for (key, out) in rows.iter().rev() {
                    let cond = replaced
                        .iter()
                        .zip(key)
                        .map(|(e, k)| Expr::binary(BinaryOp::Eq, e.clone(), Expr::Lit(*k)))
                        .reduce(|a, b| Expr::binary(BinaryOp::And, a, b))
                        .unwrap_or(Expr::Lit(1));
                    acc = Expr::ite(cond, Expr::Lit(*out), acc);
                }
                acc
            }
        }
    }

    /// Renders the expression in the surface syntax accepted by [`parse`].
    pub fn render(&self, name: &dyn Fn(VarRef) -> String) -> String {
        let mut s = String::new();
        self.render_into(&mut s, name, 0);
        s
    }

    fn render_into(&self, out: &mut String, name: &dyn Fn(VarRef) -> String, min_prec: u8) {
        let prec = self.precedence();
        let paren = prec < min_prec;
        if paren {
            out.push('(');
        }
        match self {
            Expr::Lit(v) => out.push_str(&v.to_string()),
            Expr::Var(r) => out.push_str(&name(*r)),
            Expr::Unary(op, e) => {
                out.push(if *op == UnaryOp::Neg { '-' } else { '!' });
                // keep `- -1` and `--x` apart
                if matches!(**e, Expr::Lit(v) if v < 0) || matches!(**e, Expr::Unary(UnaryOp::Neg, _)) {
                    out.push(' ');
                }
                e.render_into(out, name, UNARY_PRECEDENCE);
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                let is_cmp = p == 3;
                // left-associative; comparisons do not chain
                a.render_into(out, name, if is_cmp { p + 1 } else { p });
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                b.render_into(out, name, p + 1);
            }
            Expr::Ite(c, a, b) => {
                out.push_str("ite(");
                c.render_into(out, name, 0);
                out.push_str(", ");
                a.render_into(out, name, 0);
                out.push_str(", ");
                b.render_into(out, name, 0);
                out.push(')');
            }
            Expr::Table { vars, rows } => {
                out.push_str("table(");
                out.push_str(&vars.iter().map(|r| name(*r)).collect::<Vec<_>>().join(", "));
                out.push_str(")[");
                let body: Vec<String> = rows
                    .iter()
                    .map(|(k, v)| {
                        let key = k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
                        format!("({key}) -> {v}")
                    })
                    .collect();
                out.push_str(&body.join(", "));
                out.push(']');
            }
        }
        if paren {
            out.push(')');
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Unary(..) => UNARY_PRECEDENCE,
            Expr::Lit(v) if *v < 0 => UNARY_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }
}

/// Parses an expression, resolving identifiers through `resolve`.
pub fn parse(src: &str, resolve: &dyn Fn(&str) -> Option<VarRef>) -> Result<Expr, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { src, tokens, pos: 0, resolve };
    let e = p.or()?;
    if p.pos < p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(Value),
    Ident(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 15] = ["->", "==", "<=", "&&", "||", "(", ")", "[", "]", ",", "+", "-", "*", "<", "!"];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let v = src[start..i].parse::<Value>().map_err(|_| ParseError {
                message: "integer literal out of range".into(),
                offset: start,
                source_text: src.into(),
            })?;
            out.push((Tok::Int(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            out.push((Tok::Sym(sym), i));
            i += sym.len();
        } else {
            return Err(ParseError {
                message: format!("unexpected character `{c}`"),
                offset: i,
                source_text: src.into(),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    resolve: &'a dyn Fn(&str) -> Option<VarRef>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ParseError {
        let offset = self.tokens.get(self.pos).map(|t| t.1).unwrap_or(self.src.len());
        ParseError { message: message.to_string(), offset, source_text: self.src.to_string() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{sym}`")))
        }
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and()?;
        while self.eat("||") {
            e = Expr::binary(BinaryOp::Or, e, self.and()?);
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.cmp()?;
        while self.eat("&&") {
            e = Expr::binary(BinaryOp::And, e, self.cmp()?);
        }
        Ok(e)
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let e = self.sum()?;
        for (sym, op) in [("==", BinaryOp::Eq), ("<=", BinaryOp::Le), ("<", BinaryOp::Lt)] {
            if self.eat(sym) {
                return Ok(Expr::binary(op, e, self.sum()?));
            }
        }
        Ok(e)
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.product()?;
        loop {
            if self.eat("+") {
                e = Expr::binary(BinaryOp::Add, e, self.product()?);
            } else if self.eat("-") {
                e = Expr::binary(BinaryOp::Sub, e, self.product()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        while self.eat("*") {
            e = Expr::binary(BinaryOp::Mul, e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat("-") {
            return Ok(match self.unary()? {
                Expr::Lit(v) if v != Value::MIN => Expr::Lit(-v),
                e => Expr::Unary(UnaryOp::Neg, Box::new(e)),
            });
        }
        if self.eat("!") {
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn int(&mut self) -> Result<Value, ParseError> {
        let neg = self.eat("-");
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.error("expected integer")),
        }
    }

    fn ident(&mut self) -> Result<VarRef, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                let r = (self.resolve)(&name).ok_or_else(|| self.error(&format!("unknown variable `{name}`")))?;
                self.pos += 1;
                Ok(r)
            }
            _ => Err(self.error("expected variable name")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Expr::Lit(v))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.or()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) if name == "ite" && self.next_is_paren() => {
                self.pos += 1;
                self.expect("(")?;
                let c = self.or()?;
                self.expect(",")?;
                let a = self.or()?;
                self.expect(",")?;
                let b = self.or()?;
                self.expect(")")?;
                Ok(Expr::ite(c, a, b))
            }
            Some(Tok::Ident(name)) if name == "table" && self.next_is_paren() => {
                self.pos += 1;
                self.table()
            }
            Some(Tok::Ident(_)) => Ok(Expr::Var(self.ident()?)),
            _ => Err(self.error("expected expression")),
        }
    }

    fn next_is_paren(&self) -> bool {
        matches!(self.tokens.get(self.pos + 1), Some((Tok::Sym("("), _)))
    }

    fn table(&mut self) -> Result<Expr, ParseError> {
        self.expect("(")?;
        let mut vars = vec![self.ident()?];
        while self.eat(",") {
            vars.push(self.ident()?);
        }
        self.expect(")")?;
        self.expect("[")?;
        let mut rows = BTreeMap::new();
        loop {
            let key = if self.eat("(") {
                let mut k = vec![self.int()?];
                while self.eat(",") {
                    k.push(self.int()?);
                }
                self.expect(")")?;
                k
            } else {
                vec![self.int()?]
            };
            if key.len() != vars.len() {
                return Err(self.error("table row arity does not match its variable list"));
            }
            self.expect("->")?;
            let out = self.int()?;
            if rows.insert(key, out).is_some() {
                return Err(self.error("duplicate table row"));
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect("]")?;
        Ok(Expr::Table { vars, rows })
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRef::Exo(i) => write!(f, "exo#{i}"),
            VarRef::Endo(i) => write!(f, "endo#{i}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolver(name: &str) -> Option<VarRef> {
        match name {
            "U" => Some(VarRef::Exo(0)),
            "W" => Some(VarRef::Exo(1)),
            "X" => Some(VarRef::Endo(0)),
            "Y" => Some(VarRef::Endo(1)),
            _ => None,
        }
    }

    fn names(r: VarRef) -> String {
        match r {
            VarRef::Exo(0) => "U".into(),
            VarRef::Exo(1) => "W".into(),
            VarRef::Endo(0) => "X".into(),
            VarRef::Endo(1) => "Y".into(),
            _ => unreachable!(),
        }
    }

    fn ev(src: &str, exo: &[Value], endo: &[Value]) -> Value {
        parse(src, &resolver).unwrap().eval(exo, endo).unwrap()
    }

    #[test]
    fn precedence_and_booleans() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7);
        assert_eq!(ev("(1 + 2) * 3", &[], &[]), 9);
        assert_eq!(ev("1 - 2 - 3", &[], &[]), -4);
        assert_eq!(ev("U + 1 == 2 && !W", &[1, 0], &[]), 1);
        assert_eq!(ev("X < Y || X <= 0", &[], &[3, 2]), 0);
        assert_eq!(ev("ite(U, 10, 20)", &[0, 0], &[]), 20);
        assert_eq!(ev("1 - W", &[0, 1], &[]), 0);
        assert_eq!(ev("-U * 2", &[3, 0], &[]), -6);
    }

    #[test]
    fn tables() {
        let src = "table(U, X)[(0, 0) -> 5, (0, 1) -> 6, (1, 0) -> -7]";
        assert_eq!(ev(src, &[1, 0], &[0]), -7);
        let e = parse(src, &resolver).unwrap();
        assert_eq!(e.eval(&[1], &[1]), Err(EvalError::MissingRow(vec![1, 1])));
        assert_eq!(ev("table(U)[0 -> 1, 1 -> 0]", &[1], &[]), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("Z + 1", &resolver).is_err());
        assert!(parse("1 +", &resolver).is_err());
        assert!(parse("table(U)[(0,1) -> 1]", &resolver).is_err());
        assert!(parse("table(U)[0 -> 1, 0 -> 2]", &resolver).is_err());
        assert!(parse("1 2", &resolver).is_err());
        assert!(parse("a $ b", &resolver).is_err());
    }

    #[test]
    fn render_round_trips() {
        for src in [
            "1 - (2 - 3)",
            "-U * 2",
            "-(U + 1)",
            "!(X == 1) && (Y < 2 || U <= -1)",
            "ite(X == 1, table(U, W)[(0, 0) -> 1, (1, 1) -> 0], 3)",
            "U - -1",
            "(1 == 1) == 1",
        ] {
            let e = parse(src, &resolver).unwrap();
            let back = parse(&e.render(&names), &resolver).unwrap();
            assert_eq!(e, back, "{src} rendered as {}", e.render(&names));
        }
    }

    #[test]
    fn substitute_into_table_with_expression_falls_back_to_ite() {
        let e = parse("table(U)[0 -> 4, 1 -> 9]", &resolver).unwrap();
        let s = e.substitute(&|r| (r == VarRef::Exo(0)).then(|| parse("1 - W", &resolver).unwrap()));
        assert_eq!(s.eval(&[0, 0], &[]).unwrap(), 9);
        assert_eq!(s.eval(&[0, 1], &[]).unwrap(), 4);
        assert_eq!(s.refs(), [VarRef::Exo(1)].into_iter().collect());
    }
}
