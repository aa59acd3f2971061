//! Deterministic evaluation of specifications against an input source, plus
//! the static well-formedness checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::{walk_terms, Action, Term, ValueSet};
use crate::targets::trace::{Outcome, Trace};

/// Maximum number of actions a single run may execute.
pub const STEP_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Value {
    Int(i64),
    Bool(bool),
    List(Vec<i64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => f.write_str(if *b { "True" } else { "False" }),
            Value::List(xs) => {
                write!(f, "[{}]", xs.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
            }
        }
    }
}

enum Halt {
    Exhausted(usize),
    Inadmissible(usize),
    Error(String),
}

enum Flow {
    Next,
    Exit,
}

type R<T> = Result<T, Halt>;

fn err<T>(m: impl Into<String>) -> R<T> {
    Err(Halt::Error(m.into()))
}

/// Where reads take their values from: `next(var, set)` returns the next
/// value or `None` when input is exhausted.
pub trait InputSource {
    fn next(&mut self, var: &str, set: ValueSet) -> Option<i64>;
}

/// A fixed input sequence.
pub struct Stdin<'a>(pub std::slice::Iter<'a, i64>);

impl InputSource for Stdin<'_> {
    fn next(&mut self, _var: &str, _set: ValueSet) -> Option<i64> {
        self.0.next().copied()
    }
}

impl<F: FnMut(&str, ValueSet) -> Option<i64>> InputSource for F {
    fn next(&mut self, var: &str, set: ValueSet) -> Option<i64> {
        self(var, set)
    }
}

struct Machine<'s> {
    input: &'s mut dyn InputSource,
    history: BTreeMap<String, Vec<i64>>,
    consumed: Vec<i64>,
    outputs: Vec<String>,
    steps: u64,
    budget: u64,
}

/// Expected trace of `spec` on `stdin`.
pub fn run_spec(spec: &[Action], stdin: &[i64]) -> Trace {
    run_spec_with(spec, &mut Stdin(stdin.iter()), STEP_BUDGET)
}

/// Run with values drawn on demand from `input`.
pub fn run_spec_with(spec: &[Action], input: &mut dyn InputSource, budget: u64) -> Trace {
    let mut m = Machine { input, history: BTreeMap::new(), consumed: vec![], outputs: vec![], steps: 0, budget };
    let outcome = match m.seq(spec) {
        Ok(Flow::Next) => Outcome::Completed,
        Ok(Flow::Exit) => Outcome::Error { message: "exit outside of a loop".into() },
        Err(Halt::Exhausted(i)) => Outcome::InputExhausted { read_index: i },
        Err(Halt::Inadmissible(i)) => Outcome::Inadmissible { read_index: i },
        Err(Halt::Error(message)) => Outcome::Error { message },
    };
    Trace { inputs: m.consumed, outputs: m.outputs, outcome }
}

impl Machine<'_> {
    fn seq(&mut self, s: &[Action]) -> R<Flow> {
        for a in s {
            if let Flow::Exit = self.action(a)? {
                return Ok(Flow::Exit);
            }
        }
        Ok(Flow::Next)
    }

    fn action(&mut self, a: &Action) -> R<Flow> {
        self.steps += 1;
        if self.steps > self.budget {
            return err(format!("step budget of {} exceeded", self.budget));
        }
        match a {
            Action::Read { var, set } => {
                let index = self.consumed.len();
                let v = self.input.next(var, *set).ok_or(Halt::Exhausted(index))?;
                self.consumed.push(v);
                if !set.contains(v) {
                    return Err(Halt::Inadmissible(index));
                }
                self.history.entry(var.clone()).or_default().push(v);
                Ok(Flow::Next)
            }
            Action::Write(t) => {
                let v = self.eval(t)?;
                self.outputs.push(v.to_string());
                Ok(Flow::Next)
            }
            Action::Exit => Ok(Flow::Exit),
            Action::Branch { cond, then, else_ } => match self.eval(cond)? {
                Value::Bool(true) => self.seq(then),
                Value::Bool(false) => self.seq(else_),
                v => err(format!("branch condition evaluated to {v}")),
            },
            Action::Loop(body) => loop {
                if let Flow::Exit = self.seq(body)? {
                    return Ok(Flow::Next);
                }
                self.steps += 1;
                if self.steps > self.budget {
                    return err(format!("step budget of {} exceeded", self.budget));
                }
            },
        }
    }

    fn eval(&self, t: &Term) -> R<Value> {
        let int = |v: Value| match v {
            Value::Int(n) => Ok(n),
            v => err(format!("expected an integer, found {v}")),
        };
        let list = |v: Value| match v {
            Value::List(xs) => Ok(xs),
            v => err(format!("expected a sequence, found {v}")),
        };
        let checked = |r: Option<i64>| r.map(Value::Int).ok_or(Halt::Error("integer overflow".into()));
        Ok(match t {
            Term::Int(n) => Value::Int(*n),
            Term::All(v) => Value::List(self.history.get(v).cloned().unwrap_or_default()),
            Term::Current(v) => match self.history.get(v).and_then(|h| h.last()) {
                Some(x) => Value::Int(*x),
                None => return err(format!("`{v}` has not been read yet")),
            },
            Term::Neg(a) => checked(int(self.eval(a)?)?.checked_neg())?,
            Term::Call(f, args) => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.eval(a)?);
                }
                let mut vals = vals.into_iter();
                let first = vals.next().ok_or(Halt::Error(format!("`{f}` needs an argument")))?;
                match f.as_str() {
                    "sum" => checked(list(first)?.iter().try_fold(0i64, |a, b| a.checked_add(*b)))?,
                    "product" => checked(list(first)?.iter().try_fold(1i64, |a, b| a.checked_mul(*b)))?,
                    "len" => Value::Int(list(first)?.len() as i64),
                    "filterEq" => {
                        let y = int(vals.next().ok_or(Halt::Error("`filterEq` needs two arguments".into()))?)?;
                        Value::List(list(first)?.into_iter().filter(|x| *x == y).collect())
                    }
                    other => return err(format!("unknown function `{other}`")),
                }
            }
            Term::Bin { op, lhs, rhs } => {
                let l = self.eval(lhs)?;
                if op == "&&" {
                    return match l {
                        Value::Bool(false) => Ok(Value::Bool(false)),
                        Value::Bool(true) => match self.eval(rhs)? {
                            Value::Bool(b) => Ok(Value::Bool(b)),
                            v => err(format!("expected a boolean, found {v}")),
                        },
                        v => err(format!("expected a boolean, found {v}")),
                    };
                }
                let r = self.eval(rhs)?;
                match op.as_str() {
                    "++" => {
                        let mut a = list(l)?;
                        a.extend(list(r)?);
                        Value::List(a)
                    }
                    "=" => Value::Bool(l == r),
                    "!=" => Value::Bool(l != r),
                    _ => {
                        let (a, b) = (int(l)?, int(r)?);
                        match op.as_str() {
                            "+" => checked(a.checked_add(b))?,
                            "-" => checked(a.checked_sub(b))?,
                            "*" => checked(a.checked_mul(b))?,
                            "<" => Value::Bool(a < b),
                            "<=" => Value::Bool(a <= b),
                            ">" => Value::Bool(a > b),
                            ">=" => Value::Bool(a >= b),
                            other => return err(format!("unknown operator `{other}`")),
                        }
                    }
                }
            }
            Term::Hole(h) => return err(format!("unfilled hole `{}`", h.input)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecIssue {
    ExitOutsideLoop,
    UnreadVariable(String),
    UnfilledHole(String),
}

impl fmt::Display for SpecIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecIssue::ExitOutsideLoop => f.write_str("exit marker outside of any loop"),
            SpecIssue::UnreadVariable(v) => write!(f, "variable `{v}` is used but never read"),
            SpecIssue::UnfilledHole(h) => write!(f, "unfilled hole `{h}`"),
        }
    }
}

/// Static well-formedness: exits only inside loops, every referenced
/// variable is read somewhere, no holes left.
pub fn check_spec(spec: &[Action]) -> Vec<SpecIssue> {
    fn exits(s: &[Action], in_loop: bool, out: &mut Vec<SpecIssue>) {
        for a in s {
            match a {
                Action::Exit if !in_loop => out.push(SpecIssue::ExitOutsideLoop),
                Action::Loop(body) => exits(body, true, out),
                Action::Branch { then, else_, .. } => {
                    exits(then, in_loop, out);
                    exits(else_, in_loop, out);
                }
                _ => {}
            }
        }
    }
    fn reads(s: &[Action], out: &mut BTreeSet<String>) {
        for a in s {
            match a {
                Action::Read { var, .. } => {
                    out.insert(var.clone());
                }
                Action::Loop(body) => reads(body, out),
                Action::Branch { then, else_, .. } => {
                    reads(then, out);
                    reads(else_, out);
                }
                _ => {}
            }
        }
    }
    let mut issues = Vec::new();
    exits(spec, false, &mut issues);
    let mut read = BTreeSet::new();
    reads(spec, &mut read);
    let mut reported = BTreeSet::new();
    walk_terms(spec, &mut |t| match t {
        Term::All(v) | Term::Current(v) if !read.contains(v) && reported.insert(v.clone()) => {
            issues.push(SpecIssue::UnreadVariable(v.clone()))
        }
        Term::Hole(h) => issues.push(SpecIssue::UnfilledHole(h.input.clone())),
        _ => {}
    });
    issues
}

/// Variables whose latest value is compared inside a loop's branch
/// condition, i.e. values that bound how often a loop runs.
pub fn loop_gating_variables(spec: &[Action]) -> BTreeSet<String> {
    fn go(s: &[Action], in_loop: bool, out: &mut BTreeSet<String>) {
        for a in s {
            match a {
                Action::Loop(body) => go(body, true, out),
                Action::Branch { cond, then, else_ } => {
                    if in_loop {
                        walk_terms(std::slice::from_ref(&Action::Write(cond.clone())), &mut |t| {
                            if let Term::Current(v) = t {
                                out.insert(v.clone());
                            }
                        });
                    }
                    go(then, in_loop, out);
                    go(else_, in_loop, out);
                }
                _ => {}
            }
        }
    }
    let mut out = BTreeSet::new();
    go(spec, false, &mut out);
    out
}
