//! Haskell-flavoured pretty-printer: `main = do`, two-space indentation,
//! minimal parentheses derived from operator fixity.

use super::ast::{fixity, Assoc, Clause, Decl, Expr, Pat, Program, Rhs, Stmt};

const INDENT: usize = 2;
/// Context precedence of a function argument.
const ARG: i32 = 11;
/// Precedence of function application.
const APP: i32 = 10;

pub fn render_program(p: &Program) -> String {
    let mut out = String::from("main = do\n");
    if p.stmts.is_empty() {
        out.push_str("  pure ()\n");
    } else {
        render_block(&p.stmts, INDENT, &mut out);
    }
    out
}

/// Render a statement list at indentation `indent` (one line per statement
/// plus nested blocks).
pub fn render_stmts(stmts: &[Stmt], indent: usize) -> String {
    let mut out = String::new();
    render_block(stmts, indent, &mut out);
    out
}

fn render_block(stmts: &[Stmt], indent: usize, out: &mut String) {
    for s in stmts {
        render_stmt(s, indent, out);
    }
}

fn pad(n: usize) -> String {
    " ".repeat(n)
}

fn render_stmt(s: &Stmt, indent: usize, out: &mut String) {
    let p = pad(indent);
    match s {
        Stmt::Bind(pat, e) => out.push_str(&format!("{p}{} <- {}\n", render_pat(pat), expr(e, 0, indent))),
        Stmt::Expr(e) => out.push_str(&format!("{p}{}\n", expr(e, 0, indent))),
        Stmt::Let(decls) => {
            if let [d] = decls.as_slice() {
                if is_simple(d) {
                    let mut line = String::new();
                    render_decl(d, indent + 4, &mut line);
                    out.push_str(&format!("{p}let {}", line.trim_start()));
                    return;
                }
            }
            out.push_str(&format!("{p}let\n"));
            for d in decls {
                render_decl(d, indent + INDENT, out);
            }
        }
    }
}

/// A single plain equation that fits on one line.
fn is_simple(d: &Decl) -> bool {
    match d.clauses.as_slice() {
        [Clause { rhs: Rhs::Plain(e), .. }] => !contains_block(e),
        _ => false,
    }
}

fn contains_block(e: &Expr) -> bool {
    let mut found = false;
    super::ast::walk_expr(e, &mut |x| found |= matches!(x, Expr::Do(_)));
    found
}

fn render_decl(d: &Decl, indent: usize, out: &mut String) {
    let p = pad(indent);
    for c in &d.clauses {
        let mut head = d.name.clone();
        for param in &c.params {
            head.push(' ');
            head.push_str(&pat_atom(param));
        }
        match &c.rhs {
            Rhs::Plain(e) => out.push_str(&format!("{p}{head} = {}\n", expr(e, 0, indent))),
            Rhs::Guarded(gs) => {
                out.push_str(&format!("{p}{head}\n"));
                let gi = indent + INDENT;
                for (g, e) in gs {
                    out.push_str(&format!("{}| {} = {}\n", pad(gi), expr(g, 0, gi), expr(e, 0, gi)));
                }
            }
        }
    }
}

pub fn render_pat(p: &Pat) -> String {
    match p {
        Pat::Var(v) => v.clone(),
        Pat::Int(n) => n.to_string(),
        Pat::Wild => "_".into(),
        Pat::Nil => "[]".into(),
        Pat::Tuple(ps) => format!("({})", ps.iter().map(render_pat).collect::<Vec<_>>().join(", ")),
    }
}

fn pat_atom(p: &Pat) -> String {
    match p {
        Pat::Int(n) if *n < 0 => format!("({n})"),
        _ => render_pat(p),
    }
}

/// Render an expression standalone (single line unless it holds a do-block).
pub fn render_expr(e: &Expr) -> String {
    expr(e, 0, 0)
}

fn paren(s: String, needed: bool) -> String {
    if needed {
        format!("({s})")
    } else {
        s
    }
}

pub fn is_atomic(e: &Expr) -> bool {
    match e {
        Expr::Int(n) => *n >= 0,
        Expr::Var(_)
        | Expr::List(_)
        | Expr::Tuple(_)
        | Expr::SectionR { .. }
        | Expr::SectionL { .. }
        | Expr::OpRef(_)
        | Expr::Hole(_) => true,
        _ => false,
    }
}

/// `ctx` is the minimum precedence the context accepts without parentheses;
/// `line` is the indentation of the line being written (do-blocks nest
/// two columns deeper than it).
fn expr(e: &Expr, ctx: i32, line: usize) -> String {
    match e {
        Expr::Int(n) => paren(n.to_string(), *n < 0 && ctx > 6),
        Expr::Var(v) => v.clone(),
        Expr::OpRef(op) => format!("({op})"),
        Expr::Hole(h) => {
            let args = h.args.as_ref().map(|a| a.iter().map(|x| expr(x, 0, line)).collect::<Vec<_>>());
            h.render(args.as_deref())
        }
        Expr::App(f, a) => paren(format!("{} {}", expr(f, APP, line), expr(a, ARG, line)), ctx > APP),
        Expr::BinOp { op, lhs, rhs, .. } if op == "$" && is_atomic(rhs) => {
            // `f $ x` with an atomic argument reads better as `f x`.
            paren(format!("{} {}", expr(lhs, APP, line), expr(rhs, ARG, line)), ctx > APP)
        }
        Expr::BinOp { op, lhs, rhs, spaced } => {
            let (p, assoc) = fixity(op);
            let p = i32::from(p);
            let (lp, rp) = match assoc {
                Assoc::Left => (p, p + 1),
                Assoc::Right => (p + 1, p),
                Assoc::None => (p + 1, p + 1),
            };
            let sep = if *spaced { " " } else { "" };
            paren(format!("{}{sep}{op}{sep}{}", expr(lhs, lp, line), expr(rhs, rp, line)), ctx > p)
        }
        Expr::Neg(a) => paren(format!("-{}", expr(a, ARG, line)), ctx > 6),
        Expr::SectionR { op, rhs } => format!("({op} {})", expr(rhs, i32::from(fixity(op).0) + 1, line)),
        Expr::SectionL { lhs, op } => format!("({} {op})", expr(lhs, i32::from(fixity(op).0) + 1, line)),
        Expr::List(xs) => format!("[{}]", xs.iter().map(|x| expr(x, 0, line)).collect::<Vec<_>>().join(", ")),
        Expr::Tuple(xs) => format!("({})", xs.iter().map(|x| expr(x, 0, line)).collect::<Vec<_>>().join(", ")),
        Expr::Lambda(ps, body) => paren(
            format!("\\{} -> {}", ps.iter().map(pat_atom).collect::<Vec<_>>().join(" "), expr(body, 0, line)),
            ctx > 0,
        ),
        Expr::If(c, t, f) => {
            paren(format!("if {} then {} else {}", expr(c, 0, line), expr(t, 0, line), expr(f, 0, line)), ctx > 0)
        }
        Expr::Do(stmts) => {
            let body = render_stmts(stmts, line + INDENT);
            paren(format!("do\n{}", body.trim_end_matches('\n')), ctx > 0)
        }
    }
}
