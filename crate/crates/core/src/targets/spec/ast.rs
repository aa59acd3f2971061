//! Abstract syntax of IO-behaviour specifications and their ASCII notation.
//!
//! Notation: `[?n:Nat]` reads into `n`, `[!t]` writes a term, `(s)^L`
//! repeats `s` until `E` (exit) runs, `{c} a /\ b` branches. Terms use
//! `x_A` for all values read into `x` so far and `x_C` for the latest one.

use std::fmt;

use crate::instantiate::HoleRef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueSet {
    Nat,
    Int,
}

impl ValueSet {
    pub fn name(self) -> &'static str {
        match self {
            ValueSet::Nat => "Nat",
            ValueSet::Int => "Int",
        }
    }

    pub fn contains(self, v: i64) -> bool {
        self == ValueSet::Int || v >= 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Int(i64),
    /// Latest value read into the variable.
    Current(String),
    /// Every value read into the variable, oldest first.
    All(String),
    /// `sum`, `product`, `len`, `filterEq`.
    Call(String, Vec<Term>),
    Bin {
        op: String,
        lhs: Box<Term>,
        rhs: Box<Term>,
    },
    Neg(Box<Term>),
    Hole(HoleRef<Term>),
}

pub const FUNCTIONS: [(&str, usize); 4] = [("sum", 1), ("product", 1), ("len", 1), ("filterEq", 2)];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Read { var: String, set: ValueSet },
    Write(Term),
    Loop(Vec<Action>),
    Branch { cond: Term, then: Vec<Action>, else_: Vec<Action> },
    Exit,
}

/// A specification is a sequence of actions; the empty sequence does
/// nothing.
pub type Spec = Vec<Action>;

/// Operator precedence (higher binds tighter); all are left-associative
/// except comparisons, which do not chain.
pub fn precedence(op: &str) -> Option<(u8, bool)> {
    Some(match op {
        "&&" => (1, true),
        "=" | "!=" | "<" | "<=" | ">" | ">=" => (2, false),
        "+" | "-" | "++" => (3, true),
        "*" => (4, true),
        _ => return None,
    })
}

pub fn render_term(t: &Term) -> String {
    term(t, 0)
}

fn term(t: &Term, ctx: u8) -> String {
    match t {
        Term::Int(n) if *n < 0 && ctx > 0 => format!("({n})"),
        Term::Int(n) => n.to_string(),
        Term::Current(v) => format!("{v}_C"),
        Term::All(v) => format!("{v}_A"),
        Term::Call(f, args) => format!("{f}({})", args.iter().map(render_term).collect::<Vec<_>>().join(", ")),
        Term::Bin { op, lhs, rhs } => {
            let (p, left) = precedence(op).expect("known operator");
            let (lp, rp) = if left { (p, p + 1) } else { (p + 1, p + 1) };
            let s = format!("{} {op} {}", term(lhs, lp), term(rhs, rp));
            if ctx > p {
                format!("({s})")
            } else {
                s
            }
        }
        Term::Neg(a) => {
            let inner = match &**a {
                Term::Int(_) => format!("({})", term(a, 0)),
                _ => term(a, 5),
            };
            let s = format!("-{inner}");
            if ctx > 0 {
                format!("({s})")
            } else {
                s
            }
        }
        Term::Hole(h) => {
            let args = h.args.as_ref().map(|a| a.iter().map(render_term).collect::<Vec<_>>());
            h.render(args.as_deref())
        }
    }
}

pub fn render_spec(s: &[Action]) -> String {
    s.iter().map(render_action).collect::<Vec<_>>().join(" ")
}

fn render_action(a: &Action) -> String {
    match a {
        Action::Read { var, set } => format!("[?{var}:{}]", set.name()),
        Action::Write(t) => format!("[!{}]", render_term(t)),
        Action::Loop(body) => format!("({})^L", render_spec(body)),
        Action::Exit => "E".into(),
        Action::Branch { cond, then, else_ } => {
            format!("{{{}}} {} /\\ {}", render_term(cond), operand(then), operand(else_))
        }
    }
}

/// Branch operands are single non-branch actions or parenthesized
/// sequences; `()` is the empty sequence.
fn operand(s: &[Action]) -> String {
    match s {
        [a] if !matches!(a, Action::Branch { .. }) => render_action(a),
        _ => format!("({})", render_spec(s)),
    }
}

/// Newtype wrapper to print a whole specification.
pub struct Rendered<'a>(pub &'a [Action]);

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_spec(self.0))
    }
}

pub fn walk_terms<'a>(s: &'a [Action], f: &mut dyn FnMut(&'a Term)) {
    fn walk_term<'a>(t: &'a Term, f: &mut dyn FnMut(&'a Term)) {
        f(t);
        match t {
            Term::Call(_, args) => args.iter().for_each(|a| walk_term(a, f)),
            Term::Bin { lhs, rhs, .. } => {
                walk_term(lhs, f);
                walk_term(rhs, f);
            }
            Term::Neg(a) => walk_term(a, f),
            Term::Hole(h) => h.args.iter().flatten().for_each(|a| walk_term(a, f)),
            Term::Int(_) | Term::Current(_) | Term::All(_) => {}
        }
    }
    for a in s {
        match a {
            Action::Write(t) => walk_term(t, f),
            Action::Loop(body) => walk_terms(body, f),
            Action::Branch { cond, then, else_ } => {
                walk_term(cond, f);
                walk_terms(then, f);
                walk_terms(else_, f);
            }
            Action::Read { .. } | Action::Exit => {}
        }
    }
}

/// Rebuild every term bottom-up.
pub fn map_terms(s: Spec, f: &mut dyn FnMut(Term) -> Result<Term, String>) -> Result<Spec, String> {
    s.into_iter()
        .map(|a| {
            Ok(match a {
                Action::Write(t) => Action::Write(map_term(t, f)?),
                Action::Loop(body) => Action::Loop(map_terms(body, f)?),
                Action::Branch { cond, then, else_ } => {
                    Action::Branch { cond: map_term(cond, f)?, then: map_terms(then, f)?, else_: map_terms(else_, f)? }
                }
                a => a,
            })
        })
        .collect()
}

pub fn map_term(t: Term, f: &mut dyn FnMut(Term) -> Result<Term, String>) -> Result<Term, String> {
    let rebuilt = match t {
        Term::Call(n, args) => Term::Call(n, args.into_iter().map(|a| map_term(a, f)).collect::<Result<_, _>>()?),
        Term::Bin { op, lhs, rhs } => {
            Term::Bin { op, lhs: Box::new(map_term(*lhs, f)?), rhs: Box::new(map_term(*rhs, f)?) }
        }
        Term::Neg(a) => Term::Neg(Box::new(map_term(*a, f)?)),
        Term::Hole(mut h) => {
            if let Some(args) = h.args.take() {
                h.args = Some(args.into_iter().map(|a| map_term(a, f)).collect::<Result<_, _>>()?);
            }
            Term::Hole(h)
        }
        leaf => leaf,
    };
    f(rebuilt)
}
