//! Layout-aware reader for the program language. Block structure follows
//! indentation: a line owns every following line that is indented deeper.

use super::ast::{fixity, Assoc, Clause, Decl, Expr, Pat, Program, Rhs, Stmt};
use crate::instantiate::{parse_hole_ref, HOLE_OPEN};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Op(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Backslash,
    Underscore,
    Kw(&'static str),
    Hole(String),
    Block(Vec<Stmt>),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    space_before: bool,
}

const KEYWORDS: &[&str] = &["do", "let", "in", "if", "then", "else", "where", "case", "of"];
const OP_CHARS: &str = "!#$%&*+./<=>?@^|-~:";

fn lex(src: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut space = true;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            space = true;
            i += 1;
            continue;
        }
        let start = i;
        let tok = if src[byte_index(&chars, i)..].starts_with(HOLE_OPEN) {
            let mut depth = 0;
            let mut j = i;
            loop {
                match chars.get(j) {
                    None => return Err("unterminated hole marker".into()),
                    Some('{') => depth += 1,
                    Some('}') => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                j += 1;
            }
            let inner: String = chars[i + HOLE_OPEN.len()..j].iter().collect();
            i = j + 1;
            Tok::Hole(inner)
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            Tok::Int(s.parse().map_err(|_| format!("integer literal `{s}` out of range"))?)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s == "_" {
                Tok::Underscore
            } else if let Some(k) = KEYWORDS.iter().find(|k| **k == s) {
                Tok::Kw(k)
            } else {
                Tok::Ident(s)
            }
        } else if c == '`' {
            // `div` style infix: treated as an operator named by the identifier.
            let close = chars[i + 1..].iter().position(|&x| x == '`').ok_or("unterminated backtick")?;
            let s: String = chars[i + 1..i + 1 + close].iter().collect();
            i += close + 2;
            Tok::Op(format!("`{s}`"))
        } else if OP_CHARS.contains(c) {
            while i < chars.len() && OP_CHARS.contains(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s == "\\" {
                Tok::Backslash
            } else {
                Tok::Op(s)
            }
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '\\' => Tok::Backslash,
                _ => return Err(format!("unexpected character `{c}`")),
            }
        };
        out.push(Token { tok, space_before: space });
        space = false;
    }
    Ok(out)
}

fn byte_index(chars: &[char], i: usize) -> usize {
    chars[..i].iter().map(|c| c.len_utf8()).sum()
}

#[derive(Debug)]
struct Line {
    text: String,
    children: Vec<Line>,
}

fn layout(src: &str) -> Result<Vec<Line>, String> {
    let lines: Vec<(usize, &str)> =
        src.lines().filter(|l| !l.trim().is_empty()).map(|l| (l.len() - l.trim_start().len(), l.trim())).collect();
    let mut pos = 0;
    let base = lines.first().map_or(0, |l| l.0);
    let out = build(&lines, &mut pos, base)?;
    if pos < lines.len() {
        return Err(format!("line `{}` is indented less than the block start", lines[pos].1));
    }
    Ok(out)
}

fn build(lines: &[(usize, &str)], pos: &mut usize, indent: usize) -> Result<Vec<Line>, String> {
    let mut out = Vec::new();
    while *pos < lines.len() {
        let (ind, text) = lines[*pos];
        if ind < indent {
            break;
        }
        if ind > indent {
            return Err(format!("unexpected indentation at `{text}`"));
        }
        *pos += 1;
        let children = match lines.get(*pos) {
            Some(&(ci, _)) if ci > indent => build(lines, pos, ci)?,
            _ => Vec::new(),
        };
        out.push(Line { text: text.to_string(), children });
    }
    Ok(out)
}

fn flatten(lines: &[Line], out: &mut String) {
    for l in lines {
        out.push(' ');
        out.push_str(&l.text);
        flatten(&l.children, out);
    }
}

/// Parse a statement block (a program body or template fragment).
pub fn parse_stmts(src: &str) -> Result<Vec<Stmt>, String> {
    block(&layout(src)?)
}

/// Parse a whole program, with or without the `main = do` header.
pub fn parse_program(src: &str) -> Result<Program, String> {
    let lines = layout(src)?;
    if let [only] = lines.as_slice() {
        let t: Vec<&str> = only.text.split_whitespace().collect();
        if t == ["main", "=", "do"] {
            let stmts = block(&only.children)?;
            // The empty program is rendered as a lone `pure ()`.
            if stmts == [Stmt::Expr(Expr::App(Box::new(Expr::Var("pure".into())), Box::new(Expr::Tuple(vec![]))))] {
                return Ok(Program::default());
            }
            return Ok(Program { stmts });
        }
    }
    Ok(Program { stmts: block(&lines)? })
}

pub fn parse_expr(src: &str) -> Result<Expr, String> {
    let lines = layout(src)?;
    let mut text = String::new();
    flatten(&lines, &mut text);
    let toks = lex(&text)?;
    expr_from(toks, &[])
}

fn block(lines: &[Line]) -> Result<Vec<Stmt>, String> {
    lines.iter().map(stmt).collect()
}

fn stmt(l: &Line) -> Result<Stmt, String> {
    let toks = lex(&l.text)?;
    if matches!(toks.first().map(|t| &t.tok), Some(Tok::Kw("let"))) {
        if toks.len() == 1 {
            return Ok(Stmt::Let(decls(&l.children)?));
        }
        let d = decl(toks[1..].to_vec(), &l.children)?;
        return Ok(Stmt::Let(vec![d]));
    }
    if let Some(p) = find_top(&toks, |t| matches!(t, Tok::Op(o) if o == "<-")) {
        let pat = pattern_all(&toks[..p])?;
        let e = expr_from(toks[p + 1..].to_vec(), &l.children)?;
        return Ok(Stmt::Bind(pat, e));
    }
    Ok(Stmt::Expr(expr_from(toks, &l.children)?))
}

fn decls(lines: &[Line]) -> Result<Vec<Decl>, String> {
    let mut out: Vec<Decl> = Vec::new();
    for l in lines {
        let d = decl(lex(&l.text)?, &l.children)?;
        match out.last_mut() {
            Some(prev) if prev.name == d.name => {
                if prev.arity() != d.arity() {
                    return Err(format!("equations for `{}` have different arities", d.name));
                }
                prev.clauses.extend(d.clauses)
            }
            _ => out.push(d),
        }
    }
    Ok(out)
}

fn decl(toks: Vec<Token>, children: &[Line]) -> Result<Decl, String> {
    let name = match toks.first().map(|t| &t.tok) {
        Some(Tok::Ident(n)) => n.clone(),
        _ => return Err("definition must start with a name".into()),
    };
    let eq = find_top(&toks, |t| matches!(t, Tok::Op(o) if o == "="));
    let head_end = eq.unwrap_or(toks.len());
    let params = patterns(&toks[1..head_end])?;
    let rhs = match eq {
        Some(eq) => Rhs::Plain(expr_from(toks[eq + 1..].to_vec(), children)?),
        None => {
            if children.is_empty() {
                return Err(format!("definition of `{name}` has no body"));
            }
            let mut gs = Vec::new();
            for g in children {
                let gt = lex(&g.text)?;
                if !matches!(gt.first().map(|t| &t.tok), Some(Tok::Op(o)) if o == "|") {
                    return Err(format!("expected a guard `| cond = expr` in `{name}`"));
                }
                let eq = find_top(&gt, |t| matches!(t, Tok::Op(o) if o == "="))
                    .ok_or_else(|| format!("guard without `=` in `{name}`"))?;
                let cond = expr_from(gt[1..eq].to_vec(), &[])?;
                let body = expr_from(gt[eq + 1..].to_vec(), &g.children)?;
                gs.push((cond, body));
            }
            Rhs::Guarded(gs)
        }
    };
    Ok(Decl { name, clauses: vec![Clause { params, rhs }] })
}

fn find_top(toks: &[Token], pred: impl Fn(&Tok) -> bool) -> Option<usize> {
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate() {
        match t.tok {
            Tok::LParen | Tok::LBracket => depth += 1,
            Tok::RParen | Tok::RBracket => depth -= 1,
            _ if depth == 0 && pred(&t.tok) => return Some(i),
            _ => {}
        }
    }
    None
}

fn expr_from(mut toks: Vec<Token>, children: &[Line]) -> Result<Expr, String> {
    if matches!(toks.last().map(|t| &t.tok), Some(Tok::Kw("do"))) {
        let space_before = toks.pop().is_some_and(|t| t.space_before);
        toks.push(Token { tok: Tok::Block(block(children)?), space_before });
    } else if !children.is_empty() {
        let mut text = String::new();
        flatten(children, &mut text);
        toks.extend(lex(&text)?);
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(format!("unexpected token {:?}", p.toks[p.pos].tok));
    }
    Ok(e)
}

fn patterns(toks: &[Token]) -> Result<Vec<Pat>, String> {
    let mut p = Parser { toks: toks.to_vec(), pos: 0 };
    let mut out = Vec::new();
    while p.pos < p.toks.len() {
        out.push(p.pattern()?);
    }
    Ok(out)
}

fn pattern_all(toks: &[Token]) -> Result<Pat, String> {
    let mut ps = patterns(toks)?;
    if ps.len() != 1 {
        return Err("expected a single pattern before `<-`".into());
    }
    Ok(ps.remove(0))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), String> {
        match self.next() {
            Some(t) if t.tok == want => Ok(()),
            other => Err(format!("expected {want:?}, found {:?}", other.map(|t| t.tok))),
        }
    }

    fn is_binop(t: Option<&Tok>) -> Option<String> {
        match t {
            Some(Tok::Op(o)) if !matches!(o.as_str(), "=" | "|" | "<-" | "->") => Some(o.clone()),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        self.binary(0)
    }

    /// Precedence climbing over infix operators.
    fn binary(&mut self, min: u8) -> Result<Expr, String> {
        let mut lhs = self.operand()?;
        while let Some(op) = Self::is_binop(self.peek()) {
            // `(e op)` is a left section; leave the operator to the caller.
            if matches!(self.peek_at(1), Some(Tok::RParen)) {
                break;
            }
            let (prec, assoc) = fixity(&op);
            if prec < min {
                break;
            }
            let op_tok = self.next().unwrap();
            let after_space = self.toks.get(self.pos).is_some_and(|t| t.space_before);
            let spaced = op_tok.space_before || after_space;
            let next_min = match assoc {
                Assoc::Left | Assoc::None => prec + 1,
                Assoc::Right => prec,
            };
            let rhs = self.binary(next_min)?;
            lhs = Expr::BinOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs), spaced };
            if assoc == Assoc::None {
                if let Some(o2) = Self::is_binop(self.peek()) {
                    if fixity(&o2) == (prec, Assoc::None) {
                        return Err(format!("operator `{o2}` cannot be chained"));
                    }
                }
            }
        }
        Ok(lhs)
    }

    fn operand(&mut self) -> Result<Expr, String> {
        if matches!(self.peek(), Some(Tok::Op(o)) if o == "-") {
            self.next();
            let e = self.application()?;
            return Ok(match e {
                Expr::Int(n) => Expr::Int(-n),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.application()
    }

    fn starts_atom(t: Option<&Tok>) -> bool {
        matches!(t, Some(Tok::Int(_) | Tok::Ident(_) | Tok::LParen | Tok::LBracket | Tok::Hole(_) | Tok::Underscore))
    }

    fn starts_tail(t: Option<&Tok>) -> bool {
        matches!(t, Some(Tok::Backslash | Tok::Kw("if") | Tok::Block(_)))
    }

    fn application(&mut self) -> Result<Expr, String> {
        if Self::starts_tail(self.peek()) {
            return self.tail();
        }
        let mut f = self.atom()?;
        loop {
            if Self::starts_atom(self.peek()) {
                let a = self.atom()?;
                f = Expr::App(Box::new(f), Box::new(a));
            } else if Self::starts_tail(self.peek()) {
                let a = self.tail()?;
                f = Expr::App(Box::new(f), Box::new(a));
                break;
            } else {
                break;
            }
        }
        Ok(f)
    }

    /// Lambdas, conditionals and do-blocks extend as far right as possible.
    fn tail(&mut self) -> Result<Expr, String> {
        match self.next().map(|t| t.tok) {
            Some(Tok::Backslash) => {
                let mut ps = Vec::new();
                while !matches!(self.peek(), Some(Tok::Op(o)) if o == "->") {
                    if self.peek().is_none() {
                        return Err("lambda without `->`".into());
                    }
                    ps.push(self.pattern()?);
                }
                self.next();
                Ok(Expr::Lambda(ps, Box::new(self.expr()?)))
            }
            Some(Tok::Kw("if")) => {
                let c = self.expr()?;
                self.expect(Tok::Kw("then"))?;
                let t = self.expr()?;
                self.expect(Tok::Kw("else"))?;
                let e = self.expr()?;
                Ok(Expr::If(Box::new(c), Box::new(t), Box::new(e)))
            }
            Some(Tok::Block(stmts)) => Ok(Expr::Do(stmts)),
            other => Err(format!("unexpected token {other:?}")),
        }
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.next().map(|t| t.tok) {
            Some(Tok::Int(n)) => Ok(Expr::Int(n)),
            Some(Tok::Ident(v)) => Ok(Expr::Var(v)),
            Some(Tok::Hole(h)) => Ok(Expr::Hole(parse_hole_ref(&h, parse_expr)?)),
            Some(Tok::LBracket) => {
                let items = self.comma_list(Tok::RBracket)?;
                Ok(Expr::List(items))
            }
            Some(Tok::LParen) => {
                if self.peek() == Some(&Tok::RParen) {
                    self.next();
                    return Ok(Expr::Tuple(vec![]));
                }
                if let Some(op) = Self::is_binop(self.peek()) {
                    self.next();
                    if self.peek() == Some(&Tok::RParen) {
                        self.next();
                        return Ok(Expr::OpRef(op));
                    }
                    if op == "-" {
                        // `(-x)` is negation, not a section.
                        self.pos -= 1;
                    } else {
                        let rhs = self.expr()?;
                        self.expect(Tok::RParen)?;
                        return Ok(Expr::SectionR { op, rhs: Box::new(rhs) });
                    }
                }
                let first = self.expr()?;
                if let Some(op) = Self::is_binop(self.peek()) {
                    self.next();
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::SectionL { lhs: Box::new(first), op });
                }
                if self.peek() == Some(&Tok::Comma) {
                    self.next();
                    let mut items = vec![first];
                    items.extend(self.comma_list(Tok::RParen)?);
                    return Ok(Expr::Tuple(items));
                }
                self.expect(Tok::RParen)?;
                Ok(first)
            }
            other => Err(format!("expected an expression, found {other:?}")),
        }
    }

    fn comma_list(&mut self, close: Tok) -> Result<Vec<Expr>, String> {
        let mut items = Vec::new();
        if self.peek() == Some(&close) {
            self.next();
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            match self.next().map(|t| t.tok) {
                Some(Tok::Comma) => continue,
                Some(t) if t == close => return Ok(items),
                other => return Err(format!("expected `,` or closing bracket, found {other:?}")),
            }
        }
    }

    fn pattern(&mut self) -> Result<Pat, String> {
        match self.next().map(|t| t.tok) {
            Some(Tok::Ident(v)) => Ok(Pat::Var(v)),
            Some(Tok::Int(n)) => Ok(Pat::Int(n)),
            Some(Tok::Underscore) => Ok(Pat::Wild),
            Some(Tok::LBracket) => {
                self.expect(Tok::RBracket)?;
                Ok(Pat::Nil)
            }
            Some(Tok::LParen) => {
                let mut ps = Vec::new();
                if self.peek() == Some(&Tok::RParen) {
                    self.next();
                    return Ok(Pat::Tuple(ps));
                }
                loop {
                    ps.push(self.pattern()?);
                    match self.next().map(|t| t.tok) {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RParen) => break,
                        other => return Err(format!("bad pattern near {other:?}")),
                    }
                }
                Ok(if ps.len() == 1 { ps.remove(0) } else { Pat::Tuple(ps) })
            }
            other => Err(format!("expected a pattern, found {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(v: &str) -> Expr {
        Expr::Var(v.into())
    }

    #[test]
    fn operators_follow_fixity() {
        let e = parse_expr("print $ sum (filter (== y) xs ++ xs)").unwrap();
        let Expr::BinOp { op, rhs, .. } = e else { panic!() };
        assert_eq!(op, "$");
        let Expr::App(f, arg) = *rhs else { panic!() };
        assert_eq!(*f, var("sum"));
        assert!(matches!(*arg, Expr::BinOp { ref op, spaced: true, .. } if op == "++"));
    }

    #[test]
    fn tight_operators_are_remembered() {
        let e = parse_expr("go (i+1) (list ++ [v])").unwrap();
        let Expr::App(f, b) = e else { panic!() };
        let Expr::App(_, a) = *f else { panic!() };
        assert!(matches!(*a, Expr::BinOp { spaced: false, .. }));
        assert!(matches!(*b, Expr::BinOp { spaced: true, .. }));
    }

    #[test]
    fn guarded_let_block_with_nested_do() {
        let src = "let\n  go i list\n    | i == x = pure list\n    | otherwise = do\n      v <- readLn\n      go (i+1) (list ++ [v])\nxs <- go 0 []";
        let stmts = parse_stmts(src).unwrap();
        assert_eq!(stmts.len(), 2);
        let Stmt::Let(ds) = &stmts[0] else { panic!() };
        assert_eq!(ds[0].name, "go");
        assert_eq!(ds[0].arity(), 2);
        let Rhs::Guarded(gs) = &ds[0].clauses[0].rhs else { panic!() };
        assert!(matches!(gs[1].1, Expr::Do(ref b) if b.len() == 2));
    }

    #[test]
    fn equations_are_grouped() {
        let src = "let\n  go 0 list = pure list\n  go i list = do\n    x <- readLn\n    go (i-1) (list++[x])";
        let stmts = parse_stmts(src).unwrap();
        let Stmt::Let(ds) = &stmts[0] else { panic!() };
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].clauses.len(), 2);
    }

    #[test]
    fn sections_lambdas_and_tuples() {
        assert_eq!(parse_expr("(== y)").unwrap(), Expr::SectionR { op: "==".into(), rhs: Box::new(var("y")) });
        assert_eq!(parse_expr("(y ==)").unwrap(), Expr::SectionL { lhs: Box::new(var("y")), op: "==".into() });
        assert_eq!(parse_expr("(+)").unwrap(), Expr::OpRef("+".into()));
        assert_eq!(parse_expr("(0, 1)").unwrap(), Expr::Tuple(vec![Expr::Int(0), Expr::Int(1)]));
        assert!(matches!(parse_expr("\\v -> if v == y then 2 * v else v").unwrap(), Expr::Lambda(..)));
        assert_eq!(parse_expr("(-3)").unwrap(), Expr::Int(-3));
    }

    #[test]
    fn holes_are_atoms() {
        let e = parse_expr("go 0 {hole:f.0}").unwrap();
        let Expr::App(_, h) = e else { panic!() };
        let Expr::Hole(h) = *h else { panic!() };
        assert_eq!(h.input, "f");
        assert_eq!(h.path, vec![0]);
    }

    #[test]
    fn comparison_chains_are_rejected() {
        assert!(parse_expr("a == b == c").is_err());
    }
}
