//! The `.idioms` text format: signatures, implementations, rule sets,
//! grammars and concrete idiom libraries, plus a printer that reproduces
//! a loadable file from a workspace.
//!
//! ```text
//! // comments run to the end of the line
//! idiom "read" : () -> (Int) effect;
//! apply "apply fold" : ([Int], (Int, Int->Int->Int)) -> (Int);
//! nonterminal "provide list" : () -> ([Int]) effect;
//!
//! impl sum : () -> () {
//!   box n = "read";
//!   box xs = "read list";
//!   wire n.0 -> xs.0;
//!   effects n, xs;
//! }
//!
//! rules sum_rules {
//!   alt "sum" { box f = "sum fold"; ... wire @in.0 -> a.0; wire a.0 -> @out.0; }
//!   merge loop { ... } => "read loop";
//! }
//!
//! grammar lists { start { ... } refine "provide list" { ... } }
//!
//! concrete program "read list" {
//!   inputs n;
//!   fresh xs = box, go;
//!   emits """
//!     xs <- replicateM {hole:n} readLn
//!   """;
//!   silent "xs";
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diagram::{BoxId, Diagram, IdiomKind, Signature, Source, Target, TypeName};
use crate::instantiate::{split_top_level, ArtifactKind, ConcreteIdiom, FreshName, IdiomLibrary, OutputTemplate};
use crate::patterns::{PatternGrammar, RefinementRule};
use crate::targets::program::ProgramKind;
use crate::targets::prose::ProseKind;
use crate::targets::spec::SpecKind;
use crate::variants::{AlternativeImplementation, MergeRule, RuleSet};

/// Artifact kinds a concrete idiom may target.
pub const KINDS: [&str; 3] = [ProgramKind::NAME, SpecKind::NAME, ProseKind::NAME];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{file}:{line}:{col}: {message}")]
pub struct DslError {
    pub file: String,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Loc(usize);

/// Everything loaded from a set of `.idioms` files.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Workspace {
    pub signatures: Vec<Signature>,
    pub impls: Vec<Diagram>,
    pub rule_sets: Vec<(String, RuleSet)>,
    pub grammars: Vec<PatternGrammar>,
    /// One library per artifact kind, in order of first appearance.
    pub libraries: Vec<IdiomLibrary>,
}

impl Workspace {
    pub fn signature(&self, label: &str) -> Option<&Signature> {
        self.signatures.iter().find(|s| s.label == label)
    }

    pub fn intent(&self, name: &str) -> Option<&Diagram> {
        self.impls.iter().find(|d| d.name == name)
    }

    pub fn grammar(&self, name: &str) -> Option<&PatternGrammar> {
        self.grammars.iter().find(|g| g.name == name)
    }

    pub fn library(&self, kind: &str) -> Option<&IdiomLibrary> {
        self.libraries.iter().find(|l| l.kind == kind)
    }

    /// Every rule set of the workspace combined.
    pub fn rules(&self) -> RuleSet {
        let mut all = RuleSet::default();
        for (_, r) in &self.rule_sets {
            all.extend(r.clone());
        }
        all
    }

    /// Parse and validate a set of files. Either every file loads or the
    /// first error is returned and nothing is kept.
    pub fn load(paths: &[PathBuf]) -> Result<Workspace, DslError> {
        let mut sources = Vec::new();
        for p in paths {
            let text = std::fs::read_to_string(p).map_err(|e| DslError {
                file: p.display().to_string(),
                line: 0,
                col: 0,
                message: e.to_string(),
            })?;
            sources.push((p.display().to_string(), text));
        }
        Workspace::from_sources(&sources)
    }

    /// Load every `.idioms` file of a directory (sorted by name), or a
    /// single file.
    pub fn load_path(path: &Path) -> Result<Workspace, DslError> {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| DslError { file: path.display().to_string(), line: 0, col: 0, message: e.to_string() })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "idioms"))
                .collect();
            files.sort();
            Workspace::load(&files)
        } else {
            Workspace::load(&[path.to_path_buf()])
        }
    }

    /// Parse `(file name, contents)` pairs; names are used in diagnostics.
    pub fn from_sources(sources: &[(String, String)]) -> Result<Workspace, DslError> {
        let mut parsed = Vec::new();
        for (file, text) in sources {
            let items = Parser::new(text).items().map_err(|(loc, m)| error_at(file, text, loc, m))?;
            parsed.push((file, text, items));
        }
        let mut ws = Workspace::default();
        // Signatures first, so later files can use labels declared earlier
        // and vice versa.
        for (file, text, items) in &parsed {
            for item in items {
                if let Item::Sig(loc, sig) = item {
                    if ws.signature(&sig.label).is_some() {
                        return Err(error_at(file, text, *loc, format!("duplicate idiom `{}`", sig.label)));
                    }
                    ws.signatures.push(sig.clone());
                }
            }
        }
        for (file, text, items) in parsed {
            for item in items {
                ws.add_item(item).map_err(|(loc, m)| error_at(file, text, loc, m))?;
            }
        }
        Ok(ws)
    }

    fn add_item(&mut self, item: Item) -> Result<(), (Loc, String)> {
        match item {
            Item::Sig(..) => {}
            Item::Impl { loc, name, iface, body } => {
                if self.intent(&name).is_some() {
                    return Err((loc, format!("duplicate implementation `{name}`")));
                }
                let d = self.build(&name, iface, &body)?;
                check_valid(&d, loc)?;
                if d.contains_apply() || d.is_pattern() {
                    return Err((loc, "implementations may only use plain idioms".into()));
                }
                self.impls.push(d);
            }
            Item::Rules { loc, name, alts, merges } => {
                if self.rule_sets.iter().any(|(n, _)| *n == name) {
                    return Err((loc, format!("duplicate rule set `{name}`")));
                }
                let mut rs = RuleSet::default();
                for (loc, label, body) in alts {
                    let base = self.lookup(&label, loc)?.clone();
                    let body = self.build(&format!("alt {label}"), Some(iface_of(&base)), &body)?;
                    let alt = AlternativeImplementation { base, body };
                    alt.validate().map_err(|e| (loc, e.to_string()))?;
                    rs.alternatives.push(alt);
                }
                for (loc, rule, body, result) in merges {
                    let result = self.lookup(&result, loc)?.clone();
                    let pattern = self.build(&rule, Some(iface_of(&result)), &body)?;
                    let m = MergeRule { name: rule, pattern, result };
                    m.validate().map_err(|e| (loc, e.to_string()))?;
                    rs.merge_rules.push(m);
                }
                self.rule_sets.push((name, rs));
            }
            Item::Grammar { loc, name, start, refines } => {
                if self.grammar(&name).is_some() {
                    return Err((loc, format!("duplicate grammar `{name}`")));
                }
                let start = self.build(&name, None, &start)?;
                check_valid(&start, loc)?;
                let mut rules = Vec::new();
                for (loc, label, body) in refines {
                    let nonterminal = self.lookup(&label, loc)?.clone();
                    let body = self.build(&format!("refine {label}"), Some(iface_of(&nonterminal)), &body)?;
                    check_valid(&body, loc)?;
                    rules.push(RefinementRule { nonterminal, body });
                }
                let g = PatternGrammar { name, start, rules };
                g.validate().map_err(|e| (loc, e.to_string()))?;
                self.grammars.push(g);
            }
            Item::Concrete { loc, kind, idiom } => {
                if !KINDS.contains(&kind.as_str()) {
                    return Err((
                        loc,
                        format!("unknown artifact kind `{kind}` (expected one of {})", KINDS.join(", ")),
                    ));
                }
                let sig = self.lookup(&idiom.label, loc)?;
                if sig.kind != IdiomKind::Idiom {
                    return Err((loc, format!("`{}` is not a plain idiom", sig.label)));
                }
                if idiom.inputs.len() != sig.inputs.len() || idiom.silent.len() != sig.outputs.len() {
                    return Err((
                        loc,
                        format!(
                            "signature mismatch: `{}` has {} input(s) and {} output(s), the idiom declares {} and {}",
                            sig.label,
                            sig.inputs.len(),
                            sig.outputs.len(),
                            idiom.inputs.len(),
                            idiom.silent.len()
                        ),
                    ));
                }
                let mut single = IdiomLibrary::new(kind.clone());
                single.idioms.push(idiom);
                let checked = match kind.as_str() {
                    "program" => single.check::<ProgramKind>(),
                    "spec" => single.check::<SpecKind>(),
                    _ => single.check::<ProseKind>(),
                };
                checked.map_err(|e| (loc, e.to_string()))?;
                match self.libraries.iter_mut().find(|l| l.kind == kind) {
                    Some(lib) => lib.extend(single),
                    None => self.libraries.push(single),
                }
            }
        }
        Ok(())
    }

    fn lookup(&self, label: &str, loc: Loc) -> Result<&Signature, (Loc, String)> {
        self.signature(label).ok_or((loc, format!("unknown idiom `{label}`")))
    }

    fn build(&self, name: &str, iface: Option<Iface>, body: &Body) -> Result<Diagram, (Loc, String)> {
        let mut boxes = BTreeMap::new();
        for (loc, id, label) in &body.boxes {
            let sig = self.lookup(label, *loc)?;
            if boxes.insert(BoxId::new(id.clone()), sig.clone()).is_some() {
                return Err((*loc, format!("duplicate box `{id}`")));
            }
        }
        let port_type = |loc: Loc, e: &End, output: bool| -> Result<TypeName, (Loc, String)> {
            match e {
                End::Port(b, k) => {
                    let sig = boxes.get(&BoxId::new(b.clone())).ok_or((loc, format!("unknown box `{b}`")))?;
                    let tys = if output { &sig.outputs } else { &sig.inputs };
                    tys.get(*k)
                        .cloned()
                        .ok_or((loc, format!("box `{b}` has no {} {k}", if output { "output" } else { "input" })))
                }
                _ => unreachable!("boundary handled by caller"),
            }
        };
        // Interface: declared, or inferred from the boundary wires.
        let (inputs, outputs) = match iface {
            Some(i) => i,
            None => {
                let mut ins: BTreeMap<usize, TypeName> = BTreeMap::new();
                let mut outs: BTreeMap<usize, TypeName> = BTreeMap::new();
                for (loc, from, to) in &body.wires {
                    if let End::In(i) = from {
                        let t = match to {
                            End::Out(_) => return Err((*loc, "cannot infer the type of a pass-through wire".into())),
                            _ => port_type(*loc, to, false)?,
                        };
                        if ins.insert(*i, t.clone()).is_some_and(|old| old != t) {
                            return Err((*loc, format!("type mismatch: @in.{i} feeds different types")));
                        }
                    }
                    if let End::Out(j) = to {
                        outs.insert(*j, port_type(*loc, from, true)?);
                    }
                }
                let dense = |m: BTreeMap<usize, TypeName>, what: &str| -> Result<Vec<TypeName>, (Loc, String)> {
                    m.iter()
                        .enumerate()
                        .map(|(n, (i, t))| {
                            if n == *i {
                                Ok(t.clone())
                            } else {
                                Err((body.loc, format!("boundary {what} {n} is never wired")))
                            }
                        })
                        .collect()
                };
                (dense(ins, "input")?, dense(outs, "output")?)
            }
        };
        let mut d = Diagram {
            name: name.to_string(),
            inputs,
            outputs,
            boxes: boxes.clone(),
            wires: Vec::new(),
            effect_order: Vec::new(),
        };
        for (loc, from, to) in &body.wires {
            let (source, st) = match from {
                End::In(i) => {
                    (Source::Boundary(*i), d.inputs.get(*i).cloned().ok_or((*loc, format!("no boundary input {i}")))?)
                }
                End::Port(b, k) => (Source::Port(BoxId::new(b.clone()), *k), port_type(*loc, from, true)?),
                End::Out(_) => return Err((*loc, "@out can only be a wire target".into())),
            };
            let (target, tt) = match to {
                End::Out(j) => {
                    (Target::Boundary(*j), d.outputs.get(*j).cloned().ok_or((*loc, format!("no boundary output {j}")))?)
                }
                End::Port(b, k) => (Target::Port(BoxId::new(b.clone()), *k), port_type(*loc, to, false)?),
                End::In(_) => return Err((*loc, "@in can only be a wire source".into())),
            };
            if st != tt {
                return Err((*loc, format!("type mismatch: {st} cannot feed {tt}")));
            }
            d.connect(source, target);
        }
        match &body.effects {
            Some((loc, order)) => {
                for id in order {
                    if !d.boxes.contains_key(&BoxId::new(id.clone())) {
                        return Err((*loc, format!("unknown box `{id}` in effects")));
                    }
                }
                d.set_effect_order(order.iter().map(String::as_str));
            }
            None => {
                let eff: Vec<&BoxId> = d.boxes.iter().filter(|(_, s)| s.effectful).map(|(id, _)| id).collect();
                if eff.len() > 1 {
                    return Err((body.loc, "several effectful boxes: an `effects` line must order them".into()));
                }
                d.effect_order = eff.into_iter().cloned().collect();
            }
        }
        Ok(d)
    }
}

fn check_valid(d: &Diagram, loc: Loc) -> Result<(), (Loc, String)> {
    let v = d.validate();
    if v.is_ok() {
        Ok(())
    } else {
        Err((loc, v.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")))
    }
}

type Iface = (Vec<TypeName>, Vec<TypeName>);

fn iface_of(s: &Signature) -> Iface {
    (s.inputs.clone(), s.outputs.clone())
}

fn error_at(file: &str, text: &str, loc: Loc, message: String) -> DslError {
    let before = &text[..loc.0.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    DslError { file: file.to_string(), line, col, message }
}

// ---------------------------------------------------------------- parsing

#[derive(Clone, Debug)]
enum End {
    In(usize),
    Out(usize),
    Port(String, usize),
}

#[derive(Clone, Debug)]
struct Body {
    loc: Loc,
    boxes: Vec<(Loc, String, String)>,
    wires: Vec<(Loc, End, End)>,
    effects: Option<(Loc, Vec<String>)>,
}

#[derive(Clone, Debug)]
enum Item {
    Sig(Loc, Signature),
    Impl { loc: Loc, name: String, iface: Option<Iface>, body: Body },
    Rules { loc: Loc, name: String, alts: Vec<(Loc, String, Body)>, merges: Vec<(Loc, String, Body, String)> },
    Grammar { loc: Loc, name: String, start: Body, refines: Vec<(Loc, String, Body)> },
    Concrete { loc: Loc, kind: String, idiom: ConcreteIdiom },
}

type P<T> = Result<T, (Loc, String)>;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip(&mut self) {
        loop {
            let r = self.rest();
            let t = r.trim_start();
            self.pos += r.len() - t.len();
            if t.starts_with("//") {
                self.pos += t.find('\n').unwrap_or(t.len());
            } else {
                return;
            }
        }
    }

    fn loc(&mut self) -> Loc {
        self.skip();
        Loc(self.pos)
    }

    fn fail<T>(&mut self, msg: impl Into<String>) -> P<T> {
        let l = self.loc();
        Err((l, msg.into()))
    }

    fn at_end(&mut self) -> bool {
        self.skip();
        self.pos >= self.src.len()
    }

    fn peek_is(&mut self, s: &str) -> bool {
        self.skip();
        self.rest().starts_with(s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.peek_is(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> P<()> {
        if self.eat(s) {
            Ok(())
        } else {
            let found: String = self.rest().chars().take(16).collect();
            self.fail(format!("expected `{s}`, found `{found}`"))
        }
    }

    fn word(&mut self) -> P<&'a str> {
        self.skip();
        let r = self.rest();
        let end = r.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(r.len());
        if end == 0 || r.starts_with(|c: char| c.is_ascii_digit()) {
            return self.fail("expected a name");
        }
        self.pos += end;
        Ok(&r[..end])
    }

    /// A box id: a name whose `/`-separated segments record where
    /// substitution inserted the box.
    fn box_id(&mut self) -> P<&'a str> {
        self.skip();
        let r = self.rest();
        let end = r.find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '/')).unwrap_or(r.len());
        if end == 0 || r.starts_with(|c: char| c.is_ascii_digit() || c == '/') || r[..end].ends_with('/') {
            return self.fail("expected a box id");
        }
        self.pos += end;
        Ok(&r[..end])
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip();
        let r = self.rest();
        if r.starts_with(kw) && !r[kw.len()..].starts_with(|c: char| c.is_alphanumeric() || c == '_') {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> P<usize> {
        self.skip();
        let r = self.rest();
        let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
        if end == 0 {
            return self.fail("expected a port number");
        }
        self.pos += end;
        r[..end].parse().map_err(|_| (Loc(self.pos), "port number out of range".into()))
    }

    fn string(&mut self) -> P<String> {
        self.skip();
        if self.rest().starts_with("\"\"\"") {
            self.pos += 3;
            let r = self.rest();
            let end = r.find("\"\"\"").ok_or((Loc(self.pos), "unterminated block string".to_string()))?;
            self.pos += end + 3;
            return Ok(dedent(&r[..end]));
        }
        if !self.eat("\"") {
            return self.fail("expected a string");
        }
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, c @ ('"' | '\\'))) => out.push(c),
                    // Any other backslash is literal, so `/\` and `\x ->`
                    // need no escaping.
                    Some((_, c)) => {
                        out.push('\\');
                        out.push(c);
                    }
                    None => break,
                },
                '\n' => break,
                c => out.push(c),
            }
        }
        self.fail("unterminated string")
    }

    /// Text of a balanced parenthesized group, without the parentheses.
    fn group(&mut self) -> P<&'a str> {
        self.expect("(")?;
        let r = self.rest();
        let mut depth = 1;
        for (i, c) in r.char_indices() {
            match c {
                '(' | '[' => depth += 1,
                ')' | ']' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += i + 1;
                        return Ok(&r[..i]);
                    }
                }
                _ => {}
            }
        }
        self.fail("unbalanced parentheses")
    }

    fn types(&mut self) -> P<Vec<TypeName>> {
        let g = self.group()?;
        if g.trim().is_empty() {
            return Ok(Vec::new());
        }
        Ok(split_top_level(g, ',').into_iter().map(|t| TypeName::new(t.trim())).collect())
    }

    fn iface(&mut self) -> P<Iface> {
        let ins = self.types()?;
        self.expect("->")?;
        let outs = self.types()?;
        Ok((ins, outs))
    }

    fn items(mut self) -> P<Vec<Item>> {
        let mut items = Vec::new();
        while !self.at_end() {
            let loc = self.loc();
            let kind = [IdiomKind::Idiom, IdiomKind::Apply, IdiomKind::Nonterminal]
                .into_iter()
                .find(|k| self.keyword(k.keyword()));
            if let Some(kind) = kind {
                let label = self.string()?;
                self.expect(":")?;
                let (ins, outs) = self.iface()?;
                let effectful = self.keyword("effect");
                self.expect(";")?;
                let mut sig = Signature::new(label, Vec::<&str>::new(), Vec::<&str>::new(), effectful).with_kind(kind);
                sig.inputs = ins;
                sig.outputs = outs;
                items.push(Item::Sig(loc, sig));
            } else if self.keyword("impl") {
                let name = self.word()?.to_string();
                let iface = if self.eat(":") { Some(self.iface()?) } else { None };
                let body = self.body()?;
                items.push(Item::Impl { loc, name, iface, body });
            } else if self.keyword("rules") {
                let name = self.word()?.to_string();
                self.expect("{")?;
                let (mut alts, mut merges) = (Vec::new(), Vec::new());
                while !self.eat("}") {
                    let l = self.loc();
                    if self.keyword("alt") {
                        let label = self.string()?;
                        alts.push((l, label, self.body()?));
                    } else if self.keyword("merge") {
                        let rule = self.word()?.to_string();
                        let body = self.body()?;
                        self.expect("=>")?;
                        let result = self.string()?;
                        self.expect(";")?;
                        merges.push((l, rule, body, result));
                    } else {
                        return self.fail("expected `alt`, `merge` or `}`");
                    }
                }
                items.push(Item::Rules { loc, name, alts, merges });
            } else if self.keyword("grammar") {
                let name = self.word()?.to_string();
                self.expect("{")?;
                let mut start = None;
                let mut refines = Vec::new();
                while !self.eat("}") {
                    let l = self.loc();
                    if self.keyword("start") {
                        if start.is_some() {
                            return Err((l, "a grammar has one start pattern".into()));
                        }
                        start = Some(self.body()?);
                    } else if self.keyword("refine") {
                        let label = self.string()?;
                        refines.push((l, label, self.body()?));
                    } else {
                        return self.fail("expected `start`, `refine` or `}`");
                    }
                }
                let start = start.ok_or((loc, "grammar without a start pattern".to_string()))?;
                items.push(Item::Grammar { loc, name, start, refines });
            } else if self.keyword("concrete") {
                let kind = self.word()?.to_string();
                let label = self.string()?;
                let idiom = self.concrete(label)?;
                items.push(Item::Concrete { loc, kind, idiom });
            } else {
                return self.fail("expected `idiom`, `apply`, `nonterminal`, `impl`, `rules`, `grammar` or `concrete`");
            }
        }
        Ok(items)
    }

    fn end(&mut self) -> P<End> {
        if self.eat("@in") {
            self.expect(".")?;
            return Ok(End::In(self.number()?));
        }
        if self.eat("@out") {
            self.expect(".")?;
            return Ok(End::Out(self.number()?));
        }
        let b = self.box_id()?.to_string();
        self.expect(".")?;
        Ok(End::Port(b, self.number()?))
    }

    fn body(&mut self) -> P<Body> {
        let loc = self.loc();
        self.expect("{")?;
        let mut body = Body { loc, boxes: Vec::new(), wires: Vec::new(), effects: None };
        while !self.eat("}") {
            let l = self.loc();
            if self.keyword("box") {
                let id = self.box_id()?.to_string();
                self.expect("=")?;
                let label = self.string()?;
                body.boxes.push((l, id, label));
            } else if self.keyword("wire") {
                let from = self.end()?;
                self.expect("->")?;
                let to = self.end()?;
                body.wires.push((l, from, to));
            } else if self.keyword("effects") {
                let mut ids = vec![self.box_id()?.to_string()];
                while self.eat(",") {
                    ids.push(self.box_id()?.to_string());
                }
                if body.effects.replace((l, ids)).is_some() {
                    return Err((l, "duplicate `effects` line".into()));
                }
            } else {
                return self.fail("expected `box`, `wire`, `effects` or `}`");
            }
            self.expect(";")?;
        }
        Ok(body)
    }

    fn concrete(&mut self, label: String) -> P<ConcreteIdiom> {
        self.expect("{")?;
        let mut idiom = ConcreteIdiom { label, inputs: vec![], fresh: vec![], emits: String::new(), silent: vec![] };
        while !self.eat("}") {
            if self.keyword("inputs") {
                idiom.inputs.push(self.word()?.to_string());
                while self.eat(",") {
                    idiom.inputs.push(self.word()?.to_string());
                }
            } else if self.keyword("fresh") {
                loop {
                    let name = self.word()?.to_string();
                    let from_box = if self.eat("=") {
                        if !self.keyword("box") {
                            return self.fail("expected `box`");
                        }
                        true
                    } else {
                        false
                    };
                    idiom.fresh.push(FreshName { name, from_box });
                    if !self.eat(",") {
                        break;
                    }
                }
            } else if self.keyword("emits") {
                idiom.emits = self.string()?;
            } else if self.keyword("silent") {
                idiom.silent.push(self.output()?);
                while self.eat(",") {
                    idiom.silent.push(self.output()?);
                }
            } else {
                return self.fail("expected `inputs`, `fresh`, `emits`, `silent` or `}`");
            }
            self.expect(";")?;
        }
        Ok(idiom)
    }

    fn output(&mut self) -> P<OutputTemplate> {
        if self.keyword("partial") {
            self.expect("(")?;
            let mut params = Vec::new();
            if !self.eat(")") {
                params.push(self.word()?.to_string());
                while self.eat(",") {
                    params.push(self.word()?.to_string());
                }
                self.expect(")")?;
            }
            let body = self.string()?;
            return Ok(OutputTemplate::Partial { params, body });
        }
        if self.eat("(") {
            let mut items = vec![self.output()?];
            while self.eat(",") {
                items.push(self.output()?);
            }
            self.expect(")")?;
            return Ok(OutputTemplate::Tuple(items));
        }
        Ok(OutputTemplate::Expr(self.string()?))
    }
}

/// Block-string contents: drop the first line break and trailing blank
/// line, then remove the common indentation.
fn dedent(s: &str) -> String {
    let s = s.strip_prefix('\n').unwrap_or(s);
    let lines: Vec<&str> = s.lines().collect();
    let lines = match lines.split_last() {
        Some((last, init)) if last.trim().is_empty() => init.to_vec(),
        _ => lines,
    };
    let indent =
        lines.iter().filter(|l| !l.trim().is_empty()).map(|l| l.len() - l.trim_start().len()).min().unwrap_or(0);
    lines.iter().map(|l| l.get(indent..).unwrap_or("").trim_end()).collect::<Vec<_>>().join("\n")
}

// --------------------------------------------------------------- printing

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn types(ts: &[TypeName]) -> String {
    format!("({})", ts.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", "))
}

fn print_body(d: &Diagram, indent: &str, out: &mut String) {
    out.push_str("{\n");
    for (id, sig) in &d.boxes {
        out.push_str(&format!("{indent}  box {id} = {};\n", quote(&sig.label)));
    }
    for w in &d.wires {
        let s = match &w.source {
            Source::Boundary(i) => format!("@in.{i}"),
            Source::Port(b, k) => format!("{b}.{k}"),
        };
        let t = match &w.target {
            Target::Boundary(j) => format!("@out.{j}"),
            Target::Port(b, k) => format!("{b}.{k}"),
        };
        out.push_str(&format!("{indent}  wire {s} -> {t};\n"));
    }
    if !d.effect_order.is_empty() {
        let ids: Vec<&str> = d.effect_order.iter().map(|b| b.as_str()).collect();
        out.push_str(&format!("{indent}  effects {};\n", ids.join(", ")));
    }
    out.push_str(&format!("{indent}}}"));
}

fn print_output(t: &OutputTemplate) -> String {
    match t {
        OutputTemplate::Expr(s) => quote(s),
        OutputTemplate::Partial { params, body } => format!("partial({}) {}", params.join(", "), quote(body)),
        OutputTemplate::Tuple(ts) => format!("({})", ts.iter().map(print_output).collect::<Vec<_>>().join(", ")),
    }
}

impl fmt::Display for Workspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for s in &self.signatures {
            out.push_str(&format!("{s};\n"));
        }
        for d in &self.impls {
            out.push('\n');
            out.push_str(&render_diagram(d));
        }
        for (name, rs) in &self.rule_sets {
            out.push_str(&format!("\nrules {name} {{\n"));
            for a in &rs.alternatives {
                out.push_str(&format!("  alt {} ", quote(&a.base.label)));
                print_body(&a.body, "  ", &mut out);
                out.push('\n');
            }
            for m in &rs.merge_rules {
                out.push_str(&format!("  merge {} ", m.name));
                print_body(&m.pattern, "  ", &mut out);
                out.push_str(&format!(" => {};\n", quote(&m.result.label)));
            }
            out.push_str("}\n");
        }
        for g in &self.grammars {
            out.push_str(&format!("\ngrammar {} {{\n  start ", g.name));
            print_body(&g.start, "  ", &mut out);
            out.push('\n');
            for r in &g.rules {
                out.push_str(&format!("  refine {} ", quote(&r.nonterminal.label)));
                print_body(&r.body, "  ", &mut out);
                out.push('\n');
            }
            out.push_str("}\n");
        }
        for lib in &self.libraries {
            for i in &lib.idioms {
                out.push_str(&format!("\nconcrete {} {} {{\n", lib.kind, quote(&i.label)));
                if !i.inputs.is_empty() {
                    out.push_str(&format!("  inputs {};\n", i.inputs.join(", ")));
                }
                if !i.fresh.is_empty() {
                    let fr: Vec<String> = i
                        .fresh
                        .iter()
                        .map(|f| if f.from_box { format!("{} = box", f.name) } else { f.name.clone() })
                        .collect();
                    out.push_str(&format!("  fresh {};\n", fr.join(", ")));
                }
                if !i.emits.is_empty() {
                    out.push_str("  emits \"\"\"\n");
                    for line in i.emits.lines() {
                        if line.is_empty() {
                            out.push('\n');
                        } else {
                            out.push_str(&format!("    {line}\n"));
                        }
                    }
                    out.push_str("  \"\"\";\n");
                }
                if !i.silent.is_empty() {
                    let s: Vec<String> = i.silent.iter().map(print_output).collect();
                    out.push_str(&format!("  silent {};\n", s.join(", ")));
                }
                out.push_str("}\n");
            }
        }
        f.write_str(out.trim_start())
    }
}

/// A diagram in the implementation syntax of the format.
pub fn render_diagram(d: &Diagram) -> String {
    let mut out = format!("impl {} : {} -> {} ", d.name, types(&d.inputs), types(&d.outputs));
    print_body(d, "", &mut out);
    out.push('\n');
    out
}

/// Labels used anywhere in the workspace that no signature declares
/// (always empty for a loaded workspace; useful for hand-built ones).
pub fn undeclared_labels(ws: &Workspace) -> BTreeSet<String> {
    let mut used = BTreeSet::new();
    let mut add = |d: &Diagram| used.extend(d.boxes.values().map(|s| s.label.clone()));
    ws.impls.iter().for_each(&mut add);
    for (_, rs) in &ws.rule_sets {
        rs.alternatives.iter().for_each(|a| add(&a.body));
        rs.merge_rules.iter().for_each(|m| add(&m.pattern));
    }
    for g in &ws.grammars {
        add(&g.start);
        g.rules.iter().for_each(|r| add(&r.body));
    }
    used.into_iter().filter(|l| ws.signature(l).is_none()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
// two idioms and a pipeline
idiom "read" : () -> (Int) effect;
idiom "print" : (Int) -> () effect;
impl echo {
  box r = "read";
  box p = "print";
  wire r.0 -> p.0;
  effects r, p;
}
concrete program "read" {
  fresh n = box;
  emits """
    n <- readLn
  """;
  silent "n";
}
concrete program "print" { inputs v; emits "print {hole:v}"; }
"#;

    fn load(src: &str) -> Result<Workspace, DslError> {
        Workspace::from_sources(&[("test.idioms".into(), src.into())])
    }

    #[test]
    fn loads_a_small_workspace() {
        let ws = load(SMALL).unwrap();
        assert_eq!(ws.signatures.len(), 2);
        assert_eq!(ws.impls.len(), 1);
        assert_eq!(ws.libraries.len(), 1);
        assert_eq!(ws.library("program").unwrap().idioms[0].emits, "n <- readLn");
        assert!(undeclared_labels(&ws).is_empty());
    }

    #[test]
    fn printing_round_trips() {
        let ws = load(SMALL).unwrap();
        let again = load(&ws.to_string()).unwrap();
        assert_eq!(ws, again);
    }

    #[test]
    fn type_mismatch_has_a_location() {
        let src = "idiom \"a\" : () -> (Int);\nidiom \"b\" : ([Int]) -> ();\nimpl x {\n  box a = \"a\";\n  box b = \"b\";\n  wire a.0 -> b.0;\n}\n";
        let e = load(src).unwrap_err();
        assert_eq!((e.line, e.col), (6, 3));
        assert!(e.message.contains("type mismatch"), "{e}");
        assert!(e.to_string().starts_with("test.idioms:6:3:"));
    }

    #[test]
    fn empty_input_is_an_empty_workspace() {
        assert_eq!(Workspace::from_sources(&[]).unwrap(), Workspace::default());
        assert_eq!(Workspace::load(&[]).unwrap(), Workspace::default());
    }

    #[test]
    fn unknown_labels_and_duplicates_are_rejected() {
        assert!(load("impl x { box a = \"nope\"; }").unwrap_err().message.contains("unknown idiom"));
        assert!(load("idiom \"a\" : () -> ();\nidiom \"a\" : () -> ();").unwrap_err().message.contains("duplicate"));
        let e = load("idiom \"a\" : () -> (Int);\nconcrete program \"a\" { emits \"pure ()\"; }").unwrap_err();
        assert!(e.message.contains("signature mismatch"), "{e}");
    }

    #[test]
    fn several_effects_need_an_order() {
        let src = "idiom \"r\" : () -> () effect;\nimpl x { box a = \"r\"; box b = \"r\"; }";
        assert!(load(src).unwrap_err().message.contains("effects"));
    }
}
