//! Reader for the ASCII specification notation.

use super::ast::{precedence, Action, Spec, Term, ValueSet, FUNCTIONS};
use crate::instantiate::{parse_hole_ref, HOLE_OPEN};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), String> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`")))
        }
    }

    fn error(&self, msg: &str) -> String {
        let near: String = self.rest().chars().take(12).collect();
        format!("{msg} at offset {} (near `{near}`)", self.pos)
    }

    fn ident(&mut self) -> Result<&'a str, String> {
        self.skip_ws();
        let r = self.rest();
        if !r.starts_with(|c: char| c.is_alphabetic()) {
            return Err(self.error("expected an identifier"));
        }
        let end = r.find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\'')).unwrap_or(r.len());
        self.pos += end;
        Ok(&r[..end])
    }

    /// Content of a brace-delimited hole, cursor positioned after `{hole:`.
    fn hole_body(&mut self) -> Result<&'a str, String> {
        let r = self.rest();
        let mut depth = 1;
        for (i, c) in r.char_indices() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += i + 1;
                        return Ok(&r[..i]);
                    }
                }
                _ => {}
            }
        }
        Err(self.error("unterminated hole"))
    }
}

pub fn parse_spec(src: &str) -> Result<Spec, String> {
    let mut c = Cursor { src, pos: 0 };
    let s = seq(&mut c)?;
    if c.peek().is_some() {
        return Err(c.error("unexpected input"));
    }
    Ok(s)
}

pub fn parse_term(src: &str) -> Result<Term, String> {
    let mut c = Cursor { src, pos: 0 };
    let t = term(&mut c, 0)?;
    if c.peek().is_some() {
        return Err(c.error("unexpected input after term"));
    }
    Ok(t)
}

fn seq(c: &mut Cursor) -> Result<Spec, String> {
    let mut out = Vec::new();
    loop {
        match c.peek() {
            None | Some(')') => return Ok(out),
            _ if c.rest().starts_with("/\\") => return Ok(out),
            _ => out.extend(item(c)?),
        }
    }
}

/// One item; a parenthesized group without `^L` contributes its actions
/// in place.
fn item(c: &mut Cursor) -> Result<Spec, String> {
    if c.rest().starts_with(HOLE_OPEN) {
        return Err(c.error("holes may only appear inside terms"));
    }
    if c.eat("[?") {
        let var = c.ident()?.to_string();
        c.expect(":")?;
        let set = match c.ident()? {
            "Nat" => ValueSet::Nat,
            "Int" => ValueSet::Int,
            other => return Err(c.error(&format!("unknown value set `{other}`"))),
        };
        c.expect("]")?;
        return Ok(vec![Action::Read { var, set }]);
    }
    if c.eat("[!") {
        let t = term(c, 0)?;
        c.expect("]")?;
        return Ok(vec![Action::Write(t)]);
    }
    if c.eat("(") {
        let body = seq(c)?;
        c.expect(")")?;
        if c.eat("^L") {
            return Ok(vec![Action::Loop(body)]);
        }
        return Ok(body);
    }
    if c.eat("{") {
        let cond = term(c, 0)?;
        c.expect("}")?;
        let then = item(c)?;
        c.expect("/\\")?;
        let else_ = item(c)?;
        return Ok(vec![Action::Branch { cond, then, else_ }]);
    }
    c.skip_ws();
    if c.rest().starts_with('E') && !c.rest()[1..].starts_with(|ch: char| ch.is_alphanumeric() || ch == '_') {
        c.pos += 1;
        return Ok(vec![Action::Exit]);
    }
    Err(c.error("expected an action"))
}

fn binop(c: &mut Cursor) -> Option<&'static str> {
    c.skip_ws();
    // Longest operators first.
    ["&&", "!=", "<=", ">=", "++", "=", "<", ">", "+", "-", "*"].into_iter().find(|op| c.rest().starts_with(op))
}

fn term(c: &mut Cursor, min: u8) -> Result<Term, String> {
    let mut lhs = unary(c)?;
    let mut last_nonassoc: Option<u8> = None;
    while let Some(op) = binop(c) {
        let (p, left) = precedence(op).expect("known operator");
        if p < min {
            break;
        }
        if !left && last_nonassoc == Some(p) {
            return Err(c.error("comparisons do not chain"));
        }
        c.pos += op.len();
        let rhs = term(c, p + 1)?;
        lhs = Term::Bin { op: op.to_string(), lhs: Box::new(lhs), rhs: Box::new(rhs) };
        last_nonassoc = if left { None } else { Some(p) };
    }
    Ok(lhs)
}

fn unary(c: &mut Cursor) -> Result<Term, String> {
    if c.eat("-") {
        // A minus directly before digits is part of the literal.
        if c.rest().starts_with(|ch: char| ch.is_ascii_digit()) {
            if let Term::Int(n) = atom(c)? {
                return Ok(Term::Int(-n));
            }
        }
        return Ok(Term::Neg(Box::new(unary(c)?)));
    }
    atom(c)
}

fn atom(c: &mut Cursor) -> Result<Term, String> {
    match c.peek() {
        Some('(') => {
            c.pos += 1;
            let t = term(c, 0)?;
            c.expect(")")?;
            Ok(t)
        }
        Some('{') if c.rest().starts_with(HOLE_OPEN) => {
            c.pos += HOLE_OPEN.len();
            let body = c.hole_body()?;
            Ok(Term::Hole(parse_hole_ref(body, parse_term)?))
        }
        Some(d) if d.is_ascii_digit() => {
            let r = c.rest();
            let end = r.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(r.len());
            c.pos += end;
            r[..end].parse().map(Term::Int).map_err(|_| c.error("integer literal out of range"))
        }
        Some(_) => {
            let name = c.ident()?;
            if let Some(v) = name.strip_suffix("_A") {
                return Ok(Term::All(v.to_string()));
            }
            if let Some(v) = name.strip_suffix("_C") {
                return Ok(Term::Current(v.to_string()));
            }
            let Some(&(_, arity)) = FUNCTIONS.iter().find(|(f, _)| *f == name) else {
                return Err(c.error(&format!("`{name}` is neither a function nor a variable with _A/_C")));
            };
            c.expect("(")?;
            let mut args = vec![term(c, 0)?];
            while c.eat(",") {
                args.push(term(c, 0)?);
            }
            c.expect(")")?;
            if args.len() != arity {
                return Err(c.error(&format!("`{name}` takes {arity} argument(s)")));
            }
            Ok(Term::Call(name.to_string(), args))
        }
        None => Err(c.error("expected a term")),
    }
}
