//! The program artifact kind: Haskell-flavoured IO programs with an
//! interpreter for coherence checking.

pub mod ast;
pub mod interp;
pub mod parse;
pub mod render;
pub mod scope;

pub use ast::{Clause, Decl, Expr, Pat, Program, Rhs, Stmt};
pub use interp::{run_program, Outcome, Trace};
pub use parse::{parse_expr, parse_program, parse_stmts};
pub use render::{render_expr, render_program};
pub use scope::{check_scope, ScopeIssue};

use crate::instantiate::{ArtifactKind, Filler};

pub struct ProgramKind;

fn subst(e: &Expr, map: &[(String, Expr)]) -> Expr {
    let bound = |v: &str| map.iter().find(|(p, _)| p == v).map(|(_, e)| e.clone());
    let b = |x: &Expr| Box::new(subst(x, map));
    match e {
        Expr::Var(v) => bound(v).unwrap_or_else(|| e.clone()),
        Expr::Lambda(ps, body) => {
            // Parameters of the lambda shadow the substitution.
            let mut names = Vec::new();
            ps.iter().for_each(|p| p.binders(&mut names));
            let inner: Vec<_> = map.iter().filter(|(p, _)| !names.contains(p)).cloned().collect();
            Expr::Lambda(ps.clone(), Box::new(subst(body, &inner)))
        }
        Expr::App(f, a) => Expr::App(b(f), b(a)),
        Expr::BinOp { op, lhs, rhs, spaced } => {
            Expr::BinOp { op: op.clone(), lhs: b(lhs), rhs: b(rhs), spaced: *spaced }
        }
        Expr::Neg(a) => Expr::Neg(b(a)),
        Expr::SectionR { op, rhs } => Expr::SectionR { op: op.clone(), rhs: b(rhs) },
        Expr::SectionL { lhs, op } => Expr::SectionL { lhs: b(lhs), op: op.clone() },
        Expr::List(xs) => Expr::List(xs.iter().map(|x| subst(x, map)).collect()),
        Expr::Tuple(xs) => Expr::Tuple(xs.iter().map(|x| subst(x, map)).collect()),
        Expr::If(c, t, f) => Expr::If(b(c), b(t), b(f)),
        Expr::Hole(h) => {
            let mut h = h.clone();
            if let Some(args) = &mut h.args {
                args.iter_mut().for_each(|a| *a = subst(a, map));
            }
            Expr::Hole(h)
        }
        // Templates do not rebind parameters inside nested blocks.
        Expr::Do(stmts) => Expr::Do(
            ast::map_stmts(stmts.clone(), &mut |x| {
                Ok(match x {
                    Expr::Var(ref v) => bound(v).unwrap_or(x),
                    x => x,
                })
            })
            .expect("substitution cannot fail"),
        ),
        Expr::Int(_) | Expr::OpRef(_) => e.clone(),
    }
}

impl ArtifactKind for ProgramKind {
    type Expr = Expr;
    type Fragment = Vec<Stmt>;
    const NAME: &'static str = "program";
    const EXTENSION: &'static str = "hs";

    fn reserved() -> Vec<String> {
        let mut r: Vec<String> = interp::PRIMITIVES.iter().map(|(n, _)| n.to_string()).collect();
        r.extend(["main", "do", "let", "in", "if", "then", "else", "where", "case", "of"].map(String::from));
        r
    }

    fn identity() -> Vec<Stmt> {
        Vec::new()
    }

    fn combine(mut a: Vec<Stmt>, b: Vec<Stmt>) -> Vec<Stmt> {
        a.extend(b);
        a
    }

    fn parse_fragment(src: &str) -> Result<Vec<Stmt>, String> {
        parse_stmts(src)
    }

    fn parse_expr(src: &str) -> Result<Expr, String> {
        parse::parse_expr(src)
    }

    fn fill_fragment(f: Vec<Stmt>, fill: &mut Filler<'_, Expr>) -> Result<Vec<Stmt>, String> {
        ast::map_stmts(f, &mut |e| match e {
            Expr::Hole(h) => fill(&h),
            e => Ok(e),
        })
    }

    fn fill_expr(e: Expr, fill: &mut Filler<'_, Expr>) -> Result<Expr, String> {
        ast::map_expr(e, &mut |e| match e {
            Expr::Hole(h) => fill(&h),
            e => Ok(e),
        })
    }

    fn subst_params(body: &Expr, params: &[String], args: &[Expr]) -> Expr {
        let map: Vec<(String, Expr)> = params.iter().cloned().zip(args.iter().cloned()).collect();
        subst(body, &map)
    }

    fn apply(f: Expr, args: Vec<Expr>) -> Result<Expr, String> {
        if let (Expr::OpRef(op), [l, r]) = (&f, args.as_slice()) {
            return Ok(Expr::BinOp {
                op: op.clone(),
                lhs: Box::new(l.clone()),
                rhs: Box::new(r.clone()),
                spaced: true,
            });
        }
        Ok(args.into_iter().fold(f, |f, a| Expr::App(Box::new(f), Box::new(a))))
    }

    fn tuple(items: Vec<Expr>) -> Option<Expr> {
        Some(Expr::Tuple(items))
    }

    fn render(f: &Vec<Stmt>) -> String {
        render_program(&Program { stmts: f.clone() })
    }
}
