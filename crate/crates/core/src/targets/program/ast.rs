//! Abstract syntax of the Haskell-flavoured program language.

use crate::instantiate::HoleRef;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pat {
    Var(String),
    Int(i64),
    Wild,
    Nil,
    Tuple(Vec<Pat>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Var(String),
    App(Box<Expr>, Box<Expr>),
    /// `spaced` records whether the operator is written with surrounding
    /// blanks (`list ++ [v]`) or tight (`i+1`).
    BinOp {
        op: String,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        spaced: bool,
    },
    Neg(Box<Expr>),
    /// `(== y)`
    SectionR {
        op: String,
        rhs: Box<Expr>,
    },
    /// `(y ==)`
    SectionL {
        lhs: Box<Expr>,
        op: String,
    },
    /// `(+)`
    OpRef(String),
    List(Vec<Expr>),
    /// `()` is the empty tuple.
    Tuple(Vec<Expr>),
    Lambda(Vec<Pat>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Do(Vec<Stmt>),
    Hole(HoleRef<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Bind(Pat, Expr),
    Let(Vec<Decl>),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Plain(Expr),
    /// `| cond = expr` alternatives, tried in order.
    Guarded(Vec<(Expr, Expr)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub params: Vec<Pat>,
    pub rhs: Rhs,
}

/// A named definition made of one or more equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub clauses: Vec<Clause>,
}

impl Decl {
    pub fn arity(&self) -> usize {
        self.clauses.first().map_or(0, |c| c.params.len())
    }
}

/// A program is the statement list of `main`'s do-block.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

impl Pat {
    pub fn binders(&self, out: &mut Vec<String>) {
        match self {
            Pat::Var(v) => out.push(v.clone()),
            Pat::Tuple(ps) => ps.iter().for_each(|p| p.binders(out)),
            Pat::Int(_) | Pat::Wild | Pat::Nil => {}
        }
    }
}

/// Operator fixity: precedence and associativity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assoc {
    Left,
    Right,
    None,
}

pub fn fixity(op: &str) -> (u8, Assoc) {
    match op {
        "$" => (0, Assoc::Right),
        "||" => (2, Assoc::Right),
        "&&" => (3, Assoc::Right),
        "==" | "/=" | "<" | "<=" | ">" | ">=" => (4, Assoc::None),
        "++" | ":" => (5, Assoc::Right),
        "+" | "-" => (6, Assoc::Left),
        "*" | "`div`" | "`mod`" => (7, Assoc::Left),
        "." => (9, Assoc::Right),
        "!!" => (9, Assoc::Left),
        _ => (9, Assoc::Left),
    }
}

/// Visit every expression node (pre-order), including nested statements.
pub fn walk_expr<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
    f(e);
    match e {
        Expr::App(a, b) | Expr::BinOp { lhs: a, rhs: b, .. } => {
            walk_expr(a, f);
            walk_expr(b, f);
        }
        Expr::Neg(a) | Expr::SectionR { rhs: a, .. } | Expr::SectionL { lhs: a, .. } | Expr::Lambda(_, a) => {
            walk_expr(a, f)
        }
        Expr::List(xs) | Expr::Tuple(xs) => xs.iter().for_each(|x| walk_expr(x, f)),
        Expr::If(c, t, e) => {
            walk_expr(c, f);
            walk_expr(t, f);
            walk_expr(e, f);
        }
        Expr::Do(stmts) => stmts.iter().for_each(|s| walk_stmt(s, f)),
        Expr::Hole(h) => h.args.iter().flatten().for_each(|a| walk_expr(a, f)),
        Expr::Int(_) | Expr::Var(_) | Expr::OpRef(_) => {}
    }
}

pub fn walk_stmt<'a>(s: &'a Stmt, f: &mut dyn FnMut(&'a Expr)) {
    match s {
        Stmt::Bind(_, e) | Stmt::Expr(e) => walk_expr(e, f),
        Stmt::Let(decls) => {
            for d in decls {
                for c in &d.clauses {
                    match &c.rhs {
                        Rhs::Plain(e) => walk_expr(e, f),
                        Rhs::Guarded(gs) => gs.iter().for_each(|(g, e)| {
                            walk_expr(g, f);
                            walk_expr(e, f)
                        }),
                    }
                }
            }
        }
    }
}

/// Rebuild an expression bottom-up, letting `f` replace nodes. `f` sees
/// each node after its children were rebuilt.
pub fn map_expr(e: Expr, f: &mut dyn FnMut(Expr) -> Result<Expr, String>) -> Result<Expr, String> {
    let b = |x: Box<Expr>, f: &mut dyn FnMut(Expr) -> Result<Expr, String>| map_expr(*x, f).map(Box::new);
    let rebuilt = match e {
        Expr::App(a, c) => Expr::App(b(a, f)?, b(c, f)?),
        Expr::BinOp { op, lhs, rhs, spaced } => Expr::BinOp { op, lhs: b(lhs, f)?, rhs: b(rhs, f)?, spaced },
        Expr::Neg(a) => Expr::Neg(b(a, f)?),
        Expr::SectionR { op, rhs } => Expr::SectionR { op, rhs: b(rhs, f)? },
        Expr::SectionL { lhs, op } => Expr::SectionL { lhs: b(lhs, f)?, op },
        Expr::Lambda(ps, body) => Expr::Lambda(ps, b(body, f)?),
        Expr::List(xs) => Expr::List(xs.into_iter().map(|x| map_expr(x, f)).collect::<Result<_, _>>()?),
        Expr::Tuple(xs) => Expr::Tuple(xs.into_iter().map(|x| map_expr(x, f)).collect::<Result<_, _>>()?),
        Expr::If(c, t, e) => Expr::If(b(c, f)?, b(t, f)?, b(e, f)?),
        Expr::Do(stmts) => Expr::Do(map_stmts(stmts, f)?),
        Expr::Hole(mut h) => {
            if let Some(args) = h.args.take() {
                h.args = Some(args.into_iter().map(|x| map_expr(x, f)).collect::<Result<_, _>>()?);
            }
            Expr::Hole(h)
        }
        leaf @ (Expr::Int(_) | Expr::Var(_) | Expr::OpRef(_)) => leaf,
    };
    f(rebuilt)
}

pub fn map_stmts(stmts: Vec<Stmt>, f: &mut dyn FnMut(Expr) -> Result<Expr, String>) -> Result<Vec<Stmt>, String> {
    stmts
        .into_iter()
        .map(|s| {
            Ok(match s {
                Stmt::Bind(p, e) => Stmt::Bind(p, map_expr(e, f)?),
                Stmt::Expr(e) => Stmt::Expr(map_expr(e, f)?),
                Stmt::Let(decls) => Stmt::Let(
                    decls
                        .into_iter()
                        .map(|d| {
                            let clauses = d
                                .clauses
                                .into_iter()
                                .map(|c| {
                                    let rhs = match c.rhs {
                                        Rhs::Plain(e) => Rhs::Plain(map_expr(e, f)?),
                                        Rhs::Guarded(gs) => Rhs::Guarded(
                                            gs.into_iter()
                                                .map(|(g, e)| Ok((map_expr(g, f)?, map_expr(e, f)?)))
                                                .collect::<Result<_, String>>()?,
                                        ),
                                    };
                                    Ok(Clause { params: c.params, rhs })
                                })
                                .collect::<Result<_, String>>()?;
                            Ok(Decl { name: d.name, clauses })
                        })
                        .collect::<Result<_, String>>()?,
                ),
            })
        })
        .collect()
}
