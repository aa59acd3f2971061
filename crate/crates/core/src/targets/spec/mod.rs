//! The specification artifact kind: regular-expression-like descriptions
//! of console IO behaviour with a reference interpreter.

pub mod ast;
pub mod interp;
pub mod parse;

pub use ast::{render_spec, render_term, Action, Spec, Term, ValueSet};
pub use interp::{check_spec, loop_gating_variables, run_spec, run_spec_with, InputSource, SpecIssue};
pub use parse::{parse_spec, parse_term};

use crate::instantiate::{ArtifactKind, Filler};
use crate::targets::program::Program;
use crate::targets::trace::Trace;

pub struct SpecKind;

fn subst(t: &Term, params: &[String], args: &[Term]) -> Term {
    ast::map_term(t.clone(), &mut |x| {
        Ok(match &x {
            // Partial parameters are written as current values (`s_C`).
            Term::Current(v) | Term::All(v) => match params.iter().position(|p| p == v) {
                Some(i) => args[i].clone(),
                None => x,
            },
            _ => x,
        })
    })
    .expect("substitution cannot fail")
}

impl ArtifactKind for SpecKind {
    type Expr = Term;
    type Fragment = Spec;
    const NAME: &'static str = "spec";
    const EXTENSION: &'static str = "spec";

    fn reserved() -> Vec<String> {
        let mut r: Vec<String> = ast::FUNCTIONS.iter().map(|(f, _)| f.to_string()).collect();
        r.extend(["Nat", "Int", "A", "C", "L", "E"].map(String::from));
        r
    }

    fn identity() -> Spec {
        Vec::new()
    }

    fn combine(mut a: Spec, b: Spec) -> Spec {
        a.extend(b);
        a
    }

    fn parse_fragment(src: &str) -> Result<Spec, String> {
        parse_spec(src)
    }

    fn parse_expr(src: &str) -> Result<Term, String> {
        parse_term(src)
    }

    fn fill_fragment(f: Spec, fill: &mut Filler<'_, Term>) -> Result<Spec, String> {
        ast::map_terms(f, &mut |t| match t {
            Term::Hole(h) => fill(&h),
            t => Ok(t),
        })
    }

    fn fill_expr(e: Term, fill: &mut Filler<'_, Term>) -> Result<Term, String> {
        ast::map_term(e, &mut |t| match t {
            Term::Hole(h) => fill(&h),
            t => Ok(t),
        })
    }

    fn subst_params(body: &Term, params: &[String], args: &[Term]) -> Term {
        subst(body, params, args)
    }

    fn apply(f: Term, _args: Vec<Term>) -> Result<Term, String> {
        Err(format!("specification term `{}` cannot be applied", render_term(&f)))
    }

    fn tuple(_items: Vec<Term>) -> Option<Term> {
        None
    }

    fn render(f: &Spec) -> String {
        format!("{}\n", render_spec(f))
    }
}

/// Outcome of comparing a program with a specification on some inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Satisfaction {
    Pass { checked: usize, inadmissible: usize },
    Counterexample { stdin: Vec<i64>, program: Trace, spec: Trace },
}

/// Run both sides on each admissible input; report the first divergence.
pub fn satisfies(p: &Program, s: &[Action], inputs: &[Vec<i64>]) -> Satisfaction {
    let (mut checked, mut inadmissible) = (0, 0);
    for stdin in inputs {
        let expected = run_spec(s, stdin);
        if !expected.is_admissible() {
            inadmissible += 1;
            continue;
        }
        let actual = crate::targets::program::run_program(p, stdin);
        if actual != expected {
            return Satisfaction::Counterexample { stdin: stdin.clone(), program: actual, spec: expected };
        }
        checked += 1;
    }
    Satisfaction::Pass { checked, inadmissible }
}
