//! Strict big-step interpreter with console IO traces. IO actions are
//! first-class values run by a trampolining executor, so tail-recursive
//! loops (`go (i+1) ...` at the end of a do-block) run in constant stack.

use std::collections::VecDeque;
use std::rc::Rc;

pub use crate::targets::trace::{Outcome, Trace};

use super::ast::{Clause, Decl, Expr, Pat, Program, Rhs, Stmt};

/// Default evaluation step budget.
pub const STEP_BUDGET: u64 = 1_000_000;

#[derive(Clone)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(Rc<str>),
    List(Rc<Vec<Value>>),
    Tuple(Rc<Vec<Value>>),
    Fun(Rc<Fun>),
    Io(Rc<Io>),
}

pub enum Fun {
    Prim { name: &'static str, arity: usize, args: Vec<Value> },
    Closure { params: Rc<Vec<Pat>>, body: Rc<Expr>, env: Env, args: Vec<Value> },
    Group { group: Rc<Group>, index: usize, args: Vec<Value> },
}

pub struct Group {
    decls: Vec<Decl>,
    env: Env,
}

pub enum Io {
    Pure(Value),
    ReadLn,
    Print(Value),
    PutStrLn(Rc<str>),
    Do { stmts: Rc<Vec<Stmt>>, env: Env },
    ReplicateM(i64, Value),
    MapM(Value, Rc<Vec<Value>>),
}

/// Persistent linked environment.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<Frame>>);

pub struct Frame {
    name: String,
    value: Value,
    next: Env,
}

impl Env {
    fn bind(&self, name: &str, value: Value) -> Env {
        Env(Some(Rc::new(Frame { name: name.to_string(), value, next: self.clone() })))
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = &self.0;
        while let Some(f) = cur {
            if f.name == name {
                return Some(&f.value);
            }
            cur = &f.next.0;
        }
        None
    }
}

enum Halt {
    Exhausted(usize),
    Error(String),
}

type R<T> = Result<T, Halt>;

fn err<T>(msg: impl Into<String>) -> R<T> {
    Err(Halt::Error(msg.into()))
}

/// Names provided by the interpreter, with their arities.
pub const PRIMITIVES: &[(&str, usize)] = &[
    ("readLn", 0),
    ("print", 1),
    ("putStrLn", 1),
    ("show", 1),
    ("pure", 1),
    ("return", 1),
    ("sum", 1),
    ("product", 1),
    ("length", 1),
    ("reverse", 1),
    ("not", 1),
    ("fst", 1),
    ("snd", 1),
    ("abs", 1),
    ("negate", 1),
    ("even", 1),
    ("odd", 1),
    ("maximum", 1),
    ("minimum", 1),
    ("head", 1),
    ("filter", 2),
    ("map", 2),
    ("replicate", 2),
    ("replicateM", 2),
    ("mapM_", 2),
    ("forM_", 2),
    ("div", 2),
    ("mod", 2),
    ("elem", 2),
    ("take", 2),
    ("foldl", 3),
    ("foldr", 3),
    ("otherwise", 0),
    ("True", 0),
    ("False", 0),
];

pub fn is_primitive(name: &str) -> bool {
    PRIMITIVES.iter().any(|(n, _)| *n == name)
}

const OPERATORS: &[&str] =
    &["+", "-", "*", "==", "/=", "<", "<=", ">", ">=", "&&", "||", "++", ":", "$", ".", "!!", "`div`", "`mod`"];

pub struct Machine {
    stdin: VecDeque<i64>,
    consumed: Vec<i64>,
    outputs: Vec<String>,
    steps: u64,
    budget: u64,
    depth: usize,
}

/// Deepest evaluation nesting allowed before a run is stopped.
pub const DEPTH_LIMIT: usize = 10_000;
/// Stack reserved for the interpreter thread; enough for `DEPTH_LIMIT`.
const INTERPRETER_STACK: usize = 256 << 20;

/// Run `main` against `stdin`.
pub fn run_program(p: &Program, stdin: &[i64]) -> Trace {
    run_program_with_budget(p, stdin, STEP_BUDGET)
}

pub fn run_program_with_budget(p: &Program, stdin: &[i64], budget: u64) -> Trace {
    // Non-tail recursion in the interpreted program nests host frames, so
    // evaluation runs on a thread with a generous stack.
    let (p, stdin) = (p.clone(), stdin.to_vec());
    std::thread::Builder::new()
        .stack_size(INTERPRETER_STACK)
        .spawn(move || run_on_current_thread(&p, &stdin, budget))
        .expect("spawn interpreter thread")
        .join()
        .expect("interpreter thread panicked")
}

fn run_on_current_thread(p: &Program, stdin: &[i64], budget: u64) -> Trace {
    let mut m = Machine {
        stdin: stdin.iter().copied().collect(),
        consumed: vec![],
        outputs: vec![],
        steps: 0,
        budget,
        depth: 0,
    };
    let main = Io::Do { stmts: Rc::new(p.stmts.clone()), env: Env::default() };
    let outcome = match m.run(Rc::new(main)) {
        Ok(_) => Outcome::Completed,
        Err(Halt::Exhausted(i)) => Outcome::InputExhausted { read_index: i },
        Err(Halt::Error(message)) => Outcome::Error { message },
    };
    Trace { inputs: m.consumed, outputs: m.outputs, outcome }
}

pub fn show(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Bool(b) => if *b { "True" } else { "False" }.into(),
        Value::Str(s) => format!("{s:?}"),
        Value::List(xs) => format!("[{}]", xs.iter().map(show).collect::<Vec<_>>().join(",")),
        Value::Tuple(xs) => format!("({})", xs.iter().map(show).collect::<Vec<_>>().join(",")),
        Value::Fun(_) => "<function>".into(),
        Value::Io(_) => "<io>".into(),
    }
}

fn values_eq(a: &Value, b: &Value) -> R<bool> {
    Ok(match (a, b) {
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::List(x), Value::List(y)) | (Value::Tuple(x), Value::Tuple(y)) => {
            if x.len() != y.len() {
                return Ok(false);
            }
            for (p, q) in x.iter().zip(y.iter()) {
                if !values_eq(p, q)? {
                    return Ok(false);
                }
            }
            true
        }
        _ => return err(format!("cannot compare {} with {}", show(a), show(b))),
    })
}

fn int(v: &Value) -> R<i64> {
    match v {
        Value::Int(n) => Ok(*n),
        other => err(format!("expected an integer, found {}", show(other))),
    }
}

fn boolean(v: &Value) -> R<bool> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => err(format!("expected a boolean, found {}", show(other))),
    }
}

fn list(v: &Value) -> R<Rc<Vec<Value>>> {
    match v {
        Value::List(xs) => Ok(xs.clone()),
        other => err(format!("expected a list, found {}", show(other))),
    }
}

fn prim(name: &'static str, arity: usize) -> Value {
    Value::Fun(Rc::new(Fun::Prim { name, arity, args: vec![] }))
}

fn lookup_prim(name: &str) -> Option<(&'static str, usize)> {
    PRIMITIVES.iter().find(|(n, _)| *n == name).copied()
}

fn op_prim(op: &str) -> R<Value> {
    match OPERATORS.iter().find(|o| **o == op) {
        Some(o) => Ok(prim(o, 2)),
        None => err(format!("unknown operator `{op}`")),
    }
}

fn checked(r: Option<i64>) -> R<Value> {
    r.map(Value::Int).ok_or(Halt::Error("integer overflow".into()))
}

impl Machine {
    fn tick(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.budget {
            return err(format!("step budget of {} exceeded", self.budget));
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr, env: &Env) -> R<Value> {
        self.depth += 1;
        if self.depth > DEPTH_LIMIT {
            return err(format!("evaluation nested deeper than {DEPTH_LIMIT}"));
        }
        let r = self.eval_node(e, env);
        self.depth -= 1;
        r
    }

    fn eval_node(&mut self, e: &Expr, env: &Env) -> R<Value> {
        self.tick()?;
        match e {
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Var(v) => match env.lookup(v) {
                Some(x) => Ok(x.clone()),
                None => match v.as_str() {
                    "otherwise" | "True" => Ok(Value::Bool(true)),
                    "False" => Ok(Value::Bool(false)),
                    "readLn" => Ok(Value::Io(Rc::new(Io::ReadLn))),
                    _ => match lookup_prim(v) {
                        Some((n, a)) => Ok(prim(n, a)),
                        None => err(format!("unbound variable `{v}`")),
                    },
                },
            },
            Expr::App(f, a) => {
                let fv = self.eval(f, env)?;
                let av = self.eval(a, env)?;
                self.apply(fv, vec![av])
            }
            Expr::BinOp { op, lhs, rhs, .. } => {
                // Short-circuit the boolean connectives.
                if op == "&&" || op == "||" {
                    let l = boolean(&self.eval(lhs, env)?)?;
                    if (op == "&&") != l {
                        return Ok(Value::Bool(l));
                    }
                    return Ok(Value::Bool(boolean(&self.eval(rhs, env)?)?));
                }
                let l = self.eval(lhs, env)?;
                let r = self.eval(rhs, env)?;
                self.binop(op, l, r)
            }
            Expr::Neg(a) => checked(int(&self.eval(a, env)?)?.checked_neg()),
            Expr::SectionR { op, rhs } => {
                // (op y) = \x -> x op y
                let r = self.eval(rhs, env)?;
                let env = env.bind("\u{0}r", r);
                let body = Expr::BinOp {
                    op: op.clone(),
                    lhs: Box::new(Expr::Var("\u{0}l".into())),
                    rhs: Box::new(Expr::Var("\u{0}r".into())),
                    spaced: true,
                };
                Ok(closure(vec![Pat::Var("\u{0}l".into())], body, env))
            }
            Expr::SectionL { lhs, op } => {
                let l = self.eval(lhs, env)?;
                let f = op_prim(op)?;
                self.apply(f, vec![l])
            }
            Expr::OpRef(op) => op_prim(op),
            Expr::List(xs) => Ok(Value::List(Rc::new(xs.iter().map(|x| self.eval(x, env)).collect::<R<Vec<_>>>()?))),
            Expr::Tuple(xs) => Ok(Value::Tuple(Rc::new(xs.iter().map(|x| self.eval(x, env)).collect::<R<Vec<_>>>()?))),
            Expr::Lambda(ps, body) => Ok(closure(ps.clone(), (**body).clone(), env.clone())),
            Expr::If(c, t, f) => {
                if boolean(&self.eval(c, env)?)? {
                    self.eval(t, env)
                } else {
                    self.eval(f, env)
                }
            }
            Expr::Do(stmts) => Ok(Value::Io(Rc::new(Io::Do { stmts: Rc::new(stmts.clone()), env: env.clone() }))),
            Expr::Hole(h) => err(format!("unfilled hole `{}`", h.input)),
        }
    }

    fn binop(&mut self, op: &str, l: Value, r: Value) -> R<Value> {
        Ok(match op {
            "+" => return checked(int(&l)?.checked_add(int(&r)?)),
            "-" => return checked(int(&l)?.checked_sub(int(&r)?)),
            "*" => return checked(int(&l)?.checked_mul(int(&r)?)),
            "`div`" | "`mod`" => return self.apply(prim(if op == "`div`" { "div" } else { "mod" }, 2), vec![l, r]),
            "==" => Value::Bool(values_eq(&l, &r)?),
            "/=" => Value::Bool(!values_eq(&l, &r)?),
            "<" => Value::Bool(int(&l)? < int(&r)?),
            "<=" => Value::Bool(int(&l)? <= int(&r)?),
            ">" => Value::Bool(int(&l)? > int(&r)?),
            ">=" => Value::Bool(int(&l)? >= int(&r)?),
            "&&" => Value::Bool(boolean(&l)? && boolean(&r)?),
            "||" => Value::Bool(boolean(&l)? || boolean(&r)?),
            "++" => {
                let mut v = (*list(&l)?).clone();
                v.extend(list(&r)?.iter().cloned());
                Value::List(Rc::new(v))
            }
            ":" => {
                let mut v = vec![l];
                v.extend(list(&r)?.iter().cloned());
                Value::List(Rc::new(v))
            }
            "!!" => {
                let xs = list(&l)?;
                let i = int(&r)?;
                match usize::try_from(i).ok().and_then(|i| xs.get(i)) {
                    Some(v) => v.clone(),
                    None => return err("index out of range"),
                }
            }
            "$" => return self.apply(l, vec![r]),
            "." => {
                let env = Env::default().bind("\u{0}f", l).bind("\u{0}g", r);
                let body = Expr::App(
                    Box::new(Expr::Var("\u{0}f".into())),
                    Box::new(Expr::App(Box::new(Expr::Var("\u{0}g".into())), Box::new(Expr::Var("\u{0}x".into())))),
                );
                closure(vec![Pat::Var("\u{0}x".into())], body, env)
            }
            _ => return err(format!("unknown operator `{op}`")),
        })
    }

    fn apply(&mut self, f: Value, args: Vec<Value>) -> R<Value> {
        let mut f = f;
        let mut pending: VecDeque<Value> = args.into();
        while let Some(a) = pending.pop_front() {
            self.tick()?;
            let Value::Fun(fun) = &f else { return err(format!("cannot apply {}", show(&f))) };
            let (arity, mut have) = match &**fun {
                Fun::Prim { arity, args, .. } => (*arity, args.clone()),
                Fun::Closure { params, args, .. } => (params.len(), args.clone()),
                Fun::Group { group, index, args } => (group.decls[*index].arity(), args.clone()),
            };
            have.push(a);
            if have.len() < arity {
                f = Value::Fun(Rc::new(match &**fun {
                    Fun::Prim { name, arity, .. } => Fun::Prim { name, arity: *arity, args: have },
                    Fun::Closure { params, body, env, .. } => {
                        Fun::Closure { params: params.clone(), body: body.clone(), env: env.clone(), args: have }
                    }
                    Fun::Group { group, index, .. } => Fun::Group { group: group.clone(), index: *index, args: have },
                }));
                continue;
            }
            f = match &**fun {
                Fun::Prim { name, .. } => self.call_prim(name, have)?,
                Fun::Closure { params, body, env, .. } => {
                    let mut env = env.clone();
                    for (p, v) in params.iter().zip(have) {
                        env = match self.matches(p, &v, &env)? {
                            Some(e) => e,
                            None => return err("lambda pattern did not match"),
                        };
                    }
                    self.eval(body, &env)?
                }
                Fun::Group { group, index, .. } => self.call_group(group, *index, have)?,
            };
        }
        Ok(f)
    }

    fn group_env(&self, group: &Rc<Group>) -> Env {
        let mut env = group.env.clone();
        for (i, d) in group.decls.iter().enumerate() {
            env = env.bind(&d.name, Value::Fun(Rc::new(Fun::Group { group: group.clone(), index: i, args: vec![] })));
        }
        env
    }

    fn call_group(&mut self, group: &Rc<Group>, index: usize, args: Vec<Value>) -> R<Value> {
        let base = self.group_env(group);
        let decl = &group.decls[index];
        for Clause { params, rhs } in &decl.clauses {
            let mut env = Some(base.clone());
            for (p, v) in params.iter().zip(&args) {
                env = match env {
                    Some(e) => self.matches(p, v, &e)?,
                    None => None,
                };
            }
            let Some(env) = env else { continue };
            match rhs {
                Rhs::Plain(e) => return self.eval(e, &env),
                Rhs::Guarded(gs) => {
                    for (g, e) in gs {
                        if boolean(&self.eval(g, &env)?)? {
                            return self.eval(e, &env);
                        }
                    }
                }
            }
        }
        err(format!("no equation of `{}` matched", decl.name))
    }

    fn matches(&mut self, p: &Pat, v: &Value, env: &Env) -> R<Option<Env>> {
        Ok(match (p, v) {
            (Pat::Var(x), v) => Some(env.bind(x, v.clone())),
            (Pat::Wild, _) => Some(env.clone()),
            (Pat::Int(n), Value::Int(m)) => (n == m).then(|| env.clone()),
            (Pat::Nil, Value::List(xs)) => xs.is_empty().then(|| env.clone()),
            (Pat::Tuple(ps), Value::Tuple(vs)) if ps.len() == vs.len() => {
                let mut e = env.clone();
                for (p, v) in ps.iter().zip(vs.iter()) {
                    match self.matches(p, v, &e)? {
                        Some(n) => e = n,
                        None => return Ok(None),
                    }
                }
                Some(e)
            }
            (p, v) => return err(format!("pattern {p:?} cannot match {}", show(v))),
        })
    }

    fn call_prim(&mut self, name: &str, a: Vec<Value>) -> R<Value> {
        let io = |x: Io| Ok(Value::Io(Rc::new(x)));
        match name {
            "print" => io(Io::Print(a[0].clone())),
            "putStrLn" => match &a[0] {
                Value::Str(s) => io(Io::PutStrLn(s.clone())),
                other => err(format!("putStrLn expects a string, found {}", show(other))),
            },
            "show" => Ok(Value::Str(show(&a[0]).into())),
            "pure" | "return" => io(Io::Pure(a[0].clone())),
            "sum" => {
                let mut s: i64 = 0;
                for v in list(&a[0])?.iter() {
                    s = s.checked_add(int(v)?).ok_or(Halt::Error("integer overflow".into()))?;
                }
                Ok(Value::Int(s))
            }
            "product" => {
                let mut s: i64 = 1;
                for v in list(&a[0])?.iter() {
                    s = s.checked_mul(int(v)?).ok_or(Halt::Error("integer overflow".into()))?;
                }
                Ok(Value::Int(s))
            }
            "length" => Ok(Value::Int(list(&a[0])?.len() as i64)),
            "reverse" => Ok(Value::List(Rc::new(list(&a[0])?.iter().rev().cloned().collect()))),
            "not" => Ok(Value::Bool(!boolean(&a[0])?)),
            "fst" | "snd" => match &a[0] {
                Value::Tuple(t) if t.len() == 2 => Ok(t[usize::from(name == "snd")].clone()),
                other => err(format!("{name} expects a pair, found {}", show(other))),
            },
            "abs" => checked(int(&a[0])?.checked_abs()),
            "negate" => checked(int(&a[0])?.checked_neg()),
            "even" => Ok(Value::Bool(int(&a[0])? % 2 == 0)),
            "odd" => Ok(Value::Bool(int(&a[0])? % 2 != 0)),
            "maximum" | "minimum" | "head" => {
                let xs = list(&a[0])?;
                if xs.is_empty() {
                    return err(format!("{name} of an empty list"));
                }
                if name == "head" {
                    return Ok(xs[0].clone());
                }
                let mut best = int(&xs[0])?;
                for v in xs.iter().skip(1) {
                    let n = int(v)?;
                    best = if name == "maximum" { best.max(n) } else { best.min(n) };
                }
                Ok(Value::Int(best))
            }
            "filter" => {
                let mut out = Vec::new();
                for v in list(&a[1])?.iter() {
                    if boolean(&self.apply(a[0].clone(), vec![v.clone()])?)? {
                        out.push(v.clone());
                    }
                }
                Ok(Value::List(Rc::new(out)))
            }
            "map" => {
                let xs = list(&a[1])?;
                let out = xs.iter().map(|v| self.apply(a[0].clone(), vec![v.clone()])).collect::<R<Vec<_>>>()?;
                Ok(Value::List(Rc::new(out)))
            }
            "replicate" => {
                let n = int(&a[0])?.max(0) as usize;
                if n > 1_000_000 {
                    return err("replicate count too large");
                }
                Ok(Value::List(Rc::new(vec![a[1].clone(); n])))
            }
            "replicateM" => io(Io::ReplicateM(int(&a[0])?, a[1].clone())),
            "mapM_" => io(Io::MapM(a[0].clone(), list(&a[1])?)),
            "forM_" => io(Io::MapM(a[1].clone(), list(&a[0])?)),
            "div" | "mod" => {
                let (x, y) = (int(&a[0])?, int(&a[1])?);
                if y == 0 {
                    return err("division by zero");
                }
                // Haskell's `div` rounds toward negative infinity.
                let q = x / y - i64::from(x % y != 0 && ((x < 0) != (y < 0)));
                Ok(Value::Int(if name == "div" { q } else { x - y * q }))
            }
            "elem" => {
                for v in list(&a[1])?.iter() {
                    if values_eq(&a[0], v)? {
                        return Ok(Value::Bool(true));
                    }
                }
                Ok(Value::Bool(false))
            }
            "take" => {
                let n = int(&a[0])?.max(0) as usize;
                Ok(Value::List(Rc::new(list(&a[1])?.iter().take(n).cloned().collect())))
            }
            "foldl" => {
                let mut acc = a[1].clone();
                for v in list(&a[2])?.iter() {
                    acc = self.apply(a[0].clone(), vec![acc, v.clone()])?;
                }
                Ok(acc)
            }
            "foldr" => {
                let mut acc = a[1].clone();
                for v in list(&a[2])?.iter().rev() {
                    acc = self.apply(a[0].clone(), vec![v.clone(), acc])?;
                }
                Ok(acc)
            }
            op if OPERATORS.contains(&op) => self.binop(op, a[0].clone(), a[1].clone()),
            _ => err(format!("unknown primitive `{name}`")),
        }
    }

    fn as_io(v: Value) -> R<Rc<Io>> {
        match v {
            Value::Io(io) => Ok(io),
            other => err(format!("expected an IO action, found {}", show(&other))),
        }
    }

    /// Execute an IO action. The last statement of a do-block is run in a
    /// loop rather than recursively.
    fn run(&mut self, io: Rc<Io>) -> R<Value> {
        let mut io = io;
        loop {
            self.tick()?;
            match &*io {
                Io::Pure(v) => return Ok(v.clone()),
                Io::ReadLn => {
                    let idx = self.consumed.len();
                    let v = self.stdin.pop_front().ok_or(Halt::Exhausted(idx))?;
                    self.consumed.push(v);
                    return Ok(Value::Int(v));
                }
                Io::Print(v) => {
                    self.outputs.push(show(v));
                    return Ok(Value::Tuple(Rc::new(vec![])));
                }
                Io::PutStrLn(s) => {
                    self.outputs.push(s.to_string());
                    return Ok(Value::Tuple(Rc::new(vec![])));
                }
                Io::ReplicateM(n, act) => {
                    let act = Self::as_io(act.clone())?;
                    let mut out = Vec::new();
                    for _ in 0..(*n).max(0) {
                        out.push(self.run(act.clone())?);
                    }
                    return Ok(Value::List(Rc::new(out)));
                }
                Io::MapM(f, xs) => {
                    for x in xs.iter() {
                        let a = self.apply(f.clone(), vec![x.clone()])?;
                        self.run(Self::as_io(a)?)?;
                    }
                    return Ok(Value::Tuple(Rc::new(vec![])));
                }
                Io::Do { stmts, env } => {
                    let Some((last, init)) = stmts.split_last() else { return err("empty do-block") };
                    let mut env = env.clone();
                    for s in init {
                        env = self.exec(s, env)?;
                    }
                    let next = match last {
                        Stmt::Expr(e) => self.eval(e, &env)?,
                        _ => return err("the last statement of a do-block must be an expression"),
                    };
                    io = Self::as_io(next)?;
                }
            }
        }
    }

    fn exec(&mut self, s: &Stmt, env: Env) -> R<Env> {
        match s {
            Stmt::Expr(e) => {
                let v = self.eval(e, &env)?;
                self.run(Self::as_io(v)?)?;
                Ok(env)
            }
            Stmt::Bind(p, e) => {
                let v = self.eval(e, &env)?;
                let r = self.run(Self::as_io(v)?)?;
                match self.matches(p, &r, &env)? {
                    Some(e) => Ok(e),
                    None => err("bind pattern did not match"),
                }
            }
            Stmt::Let(decls) => {
                let (funs, vals): (Vec<&Decl>, Vec<&Decl>) = decls.iter().partition(|d| d.arity() > 0);
                let mut env = env;
                if !funs.is_empty() {
                    let group = Rc::new(Group { decls: funs.into_iter().cloned().collect(), env: env.clone() });
                    env = self.group_env(&group);
                }
                for d in vals {
                    let v = match &d.clauses[0].rhs {
                        Rhs::Plain(e) => self.eval(e, &env)?,
                        Rhs::Guarded(gs) => {
                            let mut found = None;
                            for (g, e) in gs {
                                if boolean(&self.eval(g, &env)?)? {
                                    found = Some(self.eval(e, &env)?);
                                    break;
                                }
                            }
                            found.ok_or(Halt::Error(format!("no guard of `{}` held", d.name)))?
                        }
                    };
                    env = env.bind(&d.name, v);
                }
                Ok(env)
            }
        }
    }
}

fn closure(params: Vec<Pat>, body: Expr, env: Env) -> Value {
    Value::Fun(Rc::new(Fun::Closure { params: Rc::new(params), body: Rc::new(body), env, args: vec![] }))
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_program;
    use super::*;

    fn run(src: &str, stdin: &[i64]) -> Trace {
        run_program(&parse_program(src).unwrap(), stdin)
    }

    #[test]
    fn prints_a_constant() {
        let t = run("main = do\n  print 0\n", &[]);
        assert_eq!(t.outputs, vec!["0"]);
        assert_eq!(t.outcome, Outcome::Completed);
    }

    #[test]
    fn replicate_and_sum() {
        let t = run("main = do\n  n <- readLn\n  xs <- replicateM n readLn\n  print (sum xs)\n", &[3, 1, 2, 3]);
        assert_eq!(t.outputs, vec!["6"]);
        assert_eq!(t.inputs, vec![3, 1, 2, 3]);
    }

    #[test]
    fn guarded_recursive_loop() {
        let src = "main = do\n  x <- readLn\n  y <- readLn\n  let\n    go i list\n      | i == x = pure list\n      | otherwise = do\n        v <- readLn\n        go (i+1) (list ++ [v])\n  xs <- go 0 []\n  let res = sum (filter (== y) xs ++ xs)\n  print res\n";
        assert_eq!(run(src, &[2, 5, 5, 7]).outputs, vec!["17"]);
    }

    #[test]
    fn pattern_equations_and_folds() {
        let src = "main = do\n  n <- readLn\n  let\n    go 0 s = print s\n    go i s = do\n      v <- readLn\n      go (i-1) (s*v)\n  go n 1\n  print (foldl (+) 0 [1, 2, 3])\n  mapM_ print (map (\\v -> if v == 2 then 2 * v else v) [1, 2])\n";
        assert_eq!(run(src, &[2, 3, 4]).outputs, vec!["12", "6", "1", "4"]);
    }

    #[test]
    fn exhausted_input_is_reported() {
        let t = run("main = do\n  n <- readLn\n  m <- readLn\n  print (n + m)\n", &[1]);
        assert_eq!(t.outcome, Outcome::InputExhausted { read_index: 1 });
        assert_eq!(t.inputs, vec![1]);
    }

    #[test]
    fn long_loops_run_in_constant_stack() {
        let src = "main = do\n  let\n    go i s\n      | i == 20000 = print s\n      | otherwise = do\n        go (i+1) (s+i)\n  go 0 0\n";
        let t = run(src, &[]);
        assert_eq!(t.outputs, vec!["199990000"]);
    }

    #[test]
    fn step_budget_stops_runaway_programs() {
        let src = "main = do\n  let\n    go i = go (i+1)\n  go 0\n";
        let t = run_program_with_budget(&parse_program(src).unwrap(), &[], 10_000);
        assert!(matches!(t.outcome, Outcome::Error { .. }));
    }

    #[test]
    fn show_and_put_str_ln() {
        assert_eq!(run("main = do\n  putStrLn (show 42)\n", &[]).outputs, vec!["42"]);
    }
}
