//! Static scope analysis: every variable must be bound, and no binder may be
//! introduced while the same name is still visible (fresh-name hygiene).

use std::fmt;

use super::ast::{Decl, Expr, Pat, Program, Rhs, Stmt};
use super::interp::is_primitive;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScopeIssue {
    Unbound(String),
    Shadowed(String),
}

impl fmt::Display for ScopeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScopeIssue::Unbound(v) => write!(f, "unbound variable `{v}`"),
            ScopeIssue::Shadowed(v) => write!(f, "`{v}` is bound again while still in scope"),
        }
    }
}

pub fn check_scope(p: &Program) -> Vec<ScopeIssue> {
    let mut s = Scope { names: Vec::new(), issues: Vec::new() };
    s.block(&p.stmts);
    s.issues
}

struct Scope {
    names: Vec<String>,
    issues: Vec<ScopeIssue>,
}

impl Scope {
    fn bind(&mut self, name: &str) {
        if self.names.iter().any(|n| n == name) {
            self.issues.push(ScopeIssue::Shadowed(name.to_string()));
        }
        self.names.push(name.to_string());
    }

    fn bind_pat(&mut self, p: &Pat) {
        let mut vs = Vec::new();
        p.binders(&mut vs);
        for v in vs {
            self.bind(&v);
        }
    }

    fn block(&mut self, stmts: &[Stmt]) {
        let mark = self.names.len();
        for s in stmts {
            match s {
                Stmt::Expr(e) => self.expr(e),
                Stmt::Bind(p, e) => {
                    self.expr(e);
                    self.bind_pat(p);
                }
                Stmt::Let(decls) => self.decls(decls),
            }
        }
        self.names.truncate(mark);
    }

    fn decls(&mut self, decls: &[Decl]) {
        for d in decls.iter().filter(|d| d.arity() > 0) {
            self.bind(&d.name);
        }
        for d in decls.iter().filter(|d| d.arity() > 0) {
            for c in &d.clauses {
                let mark = self.names.len();
                c.params.iter().for_each(|p| self.bind_pat(p));
                self.rhs(&c.rhs);
                self.names.truncate(mark);
            }
        }
        for d in decls.iter().filter(|d| d.arity() == 0) {
            for c in &d.clauses {
                self.rhs(&c.rhs);
            }
            self.bind(&d.name);
        }
    }

    fn rhs(&mut self, r: &Rhs) {
        match r {
            Rhs::Plain(e) => self.expr(e),
            Rhs::Guarded(gs) => gs.iter().for_each(|(g, e)| {
                self.expr(g);
                self.expr(e);
            }),
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Var(v) => {
                if !self.names.iter().any(|n| n == v) && !is_primitive(v) {
                    self.issues.push(ScopeIssue::Unbound(v.clone()));
                }
            }
            Expr::Int(_) | Expr::OpRef(_) => {}
            Expr::App(a, b) | Expr::BinOp { lhs: a, rhs: b, .. } => {
                self.expr(a);
                self.expr(b);
            }
            Expr::Neg(a) | Expr::SectionR { rhs: a, .. } | Expr::SectionL { lhs: a, .. } => self.expr(a),
            Expr::List(xs) | Expr::Tuple(xs) => xs.iter().for_each(|x| self.expr(x)),
            Expr::Lambda(ps, body) => {
                let mark = self.names.len();
                ps.iter().for_each(|p| self.bind_pat(p));
                self.expr(body);
                self.names.truncate(mark);
            }
            Expr::If(c, t, f) => {
                self.expr(c);
                self.expr(t);
                self.expr(f);
            }
            Expr::Do(stmts) => self.block(stmts),
            Expr::Hole(h) => self.issues.push(ScopeIssue::Unbound(format!("{{hole:{}}}", h.input))),
        }
    }
}
