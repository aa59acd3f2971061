//! The concrete-idiom algebra: choose one concrete idiom per box, propagate
//! values along wires, fill holes (including partial outputs completed at
//! the consumer), and fold the visible fragments in a linearization order.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use rand::Rng;
use thiserror::Error;

use crate::diagram::{BoxId, Diagram, Source};
use crate::rng::stage_rng;

/// Marker opening a hole in a template: `{hole:name}`, `{hole:f.1}`,
/// `{hole:k(s)}`, `{hole:f.1(s, v)}`.
pub const HOLE_OPEN: &str = "{hole:";

/// A reference to an input value from inside a template: the input's role
/// name, an optional tuple projection path, and optional arguments that
/// complete a partial value (or are applied to a complete one).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoleRef<E> {
    pub input: String,
    pub path: Vec<usize>,
    pub args: Option<Vec<E>>,
}

impl<E> HoleRef<E> {
    /// Template text of the hole, given already-rendered arguments.
    pub fn render(&self, args: Option<&[String]>) -> String {
        let mut s = format!("{HOLE_OPEN}{}", self.input);
        for p in &self.path {
            s.push_str(&format!(".{p}"));
        }
        if let Some(a) = args {
            s.push_str(&format!("({})", a.join(", ")));
        }
        s.push('}');
        s
    }
}

/// Split at commas outside any bracket.
pub fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Parse the inside of a hole marker.
pub fn parse_hole_ref<E>(src: &str, parse_arg: impl Fn(&str) -> Result<E, String>) -> Result<HoleRef<E>, String> {
    let s = src.trim();
    let name_end = s.find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\'')).unwrap_or(s.len());
    if name_end == 0 {
        return Err(format!("hole `{src}` does not name an input"));
    }
    let input = s[..name_end].to_string();
    let mut rest = &s[name_end..];
    let mut path = Vec::new();
    while let Some(r) = rest.strip_prefix('.') {
        let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
        path.push(r[..end].parse().map_err(|_| format!("bad projection in hole `{src}`"))?);
        rest = &r[end..];
    }
    let rest = rest.trim();
    let args = if rest.is_empty() {
        None
    } else {
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("unexpected `{rest}` in hole `{src}`"))?;
        if inner.trim().is_empty() {
            Some(Vec::new())
        } else {
            Some(split_top_level(inner, ',').into_iter().map(|a| parse_arg(a.trim())).collect::<Result<_, _>>()?)
        }
    };
    Ok(HoleRef { input, path, args })
}

/// Data flowing along a wire between concrete idioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value<E> {
    Complete(E),
    /// An expression with named holes; only ever a silent output, completed
    /// by the consuming idiom.
    Partial {
        params: Vec<String>,
        body: E,
    },
    Tuple(Vec<Value<E>>),
}

pub type Filler<'a, E> = dyn FnMut(&HoleRef<E>) -> Result<E, String> + 'a;

/// One artifact kind: its expression and fragment types, the fragment
/// monoid, template parsing and hole filling, and the final renderer.
pub trait ArtifactKind {
    type Expr: Clone + Debug + PartialEq;
    type Fragment: Clone + Debug + PartialEq;

    /// Kind name used in idiom files (`program`, `spec`, `prose`).
    const NAME: &'static str;
    /// File extension for rendered artifacts.
    const EXTENSION: &'static str;

    /// Names the name supply must never hand out.
    fn reserved() -> Vec<String>;
    fn identity() -> Self::Fragment;
    fn combine(a: Self::Fragment, b: Self::Fragment) -> Self::Fragment;
    fn parse_fragment(src: &str) -> Result<Self::Fragment, String>;
    fn parse_expr(src: &str) -> Result<Self::Expr, String>;
    fn fill_fragment(f: Self::Fragment, fill: &mut Filler<'_, Self::Expr>) -> Result<Self::Fragment, String>;
    fn fill_expr(e: Self::Expr, fill: &mut Filler<'_, Self::Expr>) -> Result<Self::Expr, String>;
    /// Simultaneously replace the named parameters by the arguments.
    fn subst_params(body: &Self::Expr, params: &[String], args: &[Self::Expr]) -> Self::Expr;
    /// Apply a complete (function-valued) expression to arguments.
    fn apply(f: Self::Expr, args: Vec<Self::Expr>) -> Result<Self::Expr, String>;
    /// Build a tuple expression, if the kind has tuples.
    fn tuple(items: Vec<Self::Expr>) -> Option<Self::Expr>;
    /// Render a whole artifact.
    fn render(f: &Self::Fragment) -> String;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreshName {
    /// Placeholder identifier used inside the templates.
    pub name: String,
    /// Derive the base name from the box id instead of the placeholder.
    pub from_box: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputTemplate {
    Expr(String),
    Partial { params: Vec<String>, body: String },
    Tuple(Vec<OutputTemplate>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteIdiom {
    pub label: String,
    /// Names by which templates refer to the box's inputs, in port order.
    pub inputs: Vec<String>,
    pub fresh: Vec<FreshName>,
    /// Visible fragment template; empty means the monoid identity.
    pub emits: String,
    pub silent: Vec<OutputTemplate>,
}

/// Concrete idioms of one artifact kind, in a stable order; the index of an
/// idiom among those of its label is its choice index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdiomLibrary {
    pub kind: String,
    pub idioms: Vec<ConcreteIdiom>,
}

impl IdiomLibrary {
    pub fn new(kind: impl Into<String>) -> Self {
        IdiomLibrary { kind: kind.into(), idioms: Vec::new() }
    }

    pub fn options(&self, label: &str) -> Vec<&ConcreteIdiom> {
        self.idioms.iter().filter(|i| i.label == label).collect()
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.idioms.iter().map(|i| i.label.as_str()).collect()
    }

    pub fn extend(&mut self, other: IdiomLibrary) {
        self.idioms.extend(other.idioms);
    }

    /// Parse every template of the library as kind `K` (with placeholder
    /// names), reporting the first failure.
    pub fn check<K: ArtifactKind>(&self) -> Result<(), InstantiateError> {
        for idiom in &self.idioms {
            let err = |message: String| InstantiateError::Template { label: idiom.label.clone(), message };
            if !idiom.emits.trim().is_empty() {
                K::parse_fragment(&idiom.emits).map_err(err)?;
            }
            fn walk<K: ArtifactKind>(t: &OutputTemplate) -> Result<(), String> {
                match t {
                    OutputTemplate::Expr(s) | OutputTemplate::Partial { body: s, .. } => K::parse_expr(s).map(|_| ()),
                    OutputTemplate::Tuple(ts) => ts.iter().try_for_each(walk::<K>),
                }
            }
            idiom.silent.iter().try_for_each(walk::<K>).map_err(err)?;
            let mut seen = BTreeSet::new();
            for i in &idiom.inputs {
                if !seen.insert(i) {
                    return Err(err(format!("input `{i}` declared twice")));
                }
            }
        }
        Ok(())
    }

    /// Identifiers the templates use for their own purposes (locals, library
    /// functions); fresh names must avoid them.
    pub fn template_identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for idiom in &self.idioms {
            let fresh: BTreeSet<&str> = idiom.fresh.iter().map(|f| f.name.as_str()).collect();
            let mut srcs = vec![idiom.emits.as_str()];
            fn collect<'a>(t: &'a OutputTemplate, out: &mut Vec<&'a str>) {
                match t {
                    OutputTemplate::Expr(s) | OutputTemplate::Partial { body: s, .. } => out.push(s),
                    OutputTemplate::Tuple(ts) => ts.iter().for_each(|t| collect(t, out)),
                }
            }
            idiom.silent.iter().for_each(|t| collect(t, &mut srcs));
            for s in srcs {
                for tok in identifier_tokens(s) {
                    if !fresh.contains(tok.as_str()) {
                        out.insert(tok);
                    }
                }
            }
        }
        out
    }
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Walk a template, handing each identifier token to `f` (hole input names
/// excluded) and copying everything else verbatim.
fn map_tokens(src: &str, mut f: impl FnMut(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(src.len());
    let mut rest = src;
    while let Some(c) = rest.chars().next() {
        if rest.starts_with(HOLE_OPEN) {
            out.push_str(HOLE_OPEN);
            rest = &rest[HOLE_OPEN.len()..];
            let end = rest.find(|c: char| !(is_token_char(c) || c == '_' || c == '.')).unwrap_or(rest.len());
            out.push_str(&rest[..end]);
            rest = &rest[end..];
        } else if c.is_alphabetic() {
            let end = rest.find(|c: char| !is_token_char(c)).unwrap_or(rest.len());
            let tok = &rest[..end];
            match f(tok) {
                Some(r) => out.push_str(&r),
                None => out.push_str(tok),
            }
            rest = &rest[end..];
        } else if c.is_ascii_digit() {
            let end = rest.find(|c: char| !is_token_char(c)).unwrap_or(rest.len());
            out.push_str(&rest[..end]);
            rest = &rest[end..];
        } else {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

fn identifier_tokens(src: &str) -> Vec<String> {
    let mut toks = Vec::new();
    map_tokens(src, |t| {
        toks.push(t.to_string());
        None
    });
    toks
}

/// Rename whole identifier tokens (outside hole input names).
pub fn rename_tokens(src: &str, map: &BTreeMap<String, String>) -> String {
    map_tokens(src, |t| map.get(t).cloned())
}

/// Issues distinct names: the base itself first, then `base1`, `base2`, ...
#[derive(Clone, Debug, Default)]
pub struct NameSupply {
    used: BTreeSet<String>,
    next: BTreeMap<String, usize>,
}

impl NameSupply {
    pub fn new(reserved: impl IntoIterator<Item = String>) -> Self {
        NameSupply { used: reserved.into_iter().collect(), next: BTreeMap::new() }
    }

    pub fn for_library<K: ArtifactKind>(lib: &IdiomLibrary) -> Self {
        let mut reserved = lib.template_identifiers();
        reserved.extend(K::reserved());
        NameSupply::new(reserved)
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let mut k = *self.next.get(base).unwrap_or(&0);
        loop {
            let cand = if k == 0 { base.to_string() } else { format!("{base}{k}") };
            k += 1;
            if self.used.insert(cand.clone()) {
                self.next.insert(base.to_string(), k);
                return cand;
            }
        }
    }
}

/// Identifier base for a box: last path segment of its id, camel-cased.
pub fn base_name(id: &BoxId) -> String {
    let last = id.as_str().rsplit('/').next().unwrap_or("");
    let mut out = String::new();
    let mut upper = false;
    for c in last.chars() {
        if c.is_alphanumeric() {
            if upper && !out.is_empty() {
                out.extend(c.to_uppercase());
            } else {
                out.push(c);
            }
            upper = false;
        } else {
            upper = true;
        }
    }
    match out.chars().next() {
        None => "v".into(),
        Some(c) if c.is_ascii_digit() => format!("v{out}"),
        Some(c) if c.is_uppercase() => {
            let mut s: String = c.to_lowercase().collect();
            s.push_str(&out[c.len_utf8()..]);
            s
        }
        _ => out,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstantiateError {
    #[error("the diagram is not a valid implementation: {0}")]
    InvalidDiagram(String),
    #[error("`{order}` is not a valid linearization of the diagram")]
    BadOrder { order: String },
    #[error("no {kind} idiom for `{label}`")]
    MissingIdiom { kind: String, label: String },
    #[error("box `{id}` chooses idiom #{index} of `{label}`, which has only {available}")]
    BadChoice { id: String, label: String, index: usize, available: usize },
    #[error("idiom for `{label}` does not fit its signature: {detail}")]
    Arity { label: String, detail: String },
    #[error("template of `{label}`: {message}")]
    Template { label: String, message: String },
    #[error("partial value from input `{input}` reaches a visible position in `{label}`")]
    PartialVisible { label: String, input: String },
    #[error("diagram input {0} has no value")]
    UnboundBoundary(usize),
    #[error("the {kind} library has no idioms for: {}", labels.join(", "))]
    CoverageGap { kind: String, labels: Vec<String> },
}

/// Result of instantiating one diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<K: ArtifactKind> {
    pub fragment: K::Fragment,
    pub outputs: Vec<Value<K::Expr>>,
}

fn check_order(d: &Diagram, order: &[BoxId]) -> Result<(), InstantiateError> {
    let bad = || InstantiateError::BadOrder { order: order.iter().map(|b| b.as_str()).collect::<Vec<_>>().join(",") };
    let pos: BTreeMap<&BoxId, usize> = order.iter().enumerate().map(|(i, b)| (b, i)).collect();
    if pos.len() != order.len() || order.len() != d.boxes.len() || order.iter().any(|b| !d.boxes.contains_key(b)) {
        return Err(bad());
    }
    for (a, succs) in d.combined_graph() {
        for b in succs {
            if pos[&a] >= pos[&b] {
                return Err(bad());
            }
        }
    }
    Ok(())
}

/// Instantiate `d` with kind `K`, using `choice` (box id → idiom index,
/// missing boxes default to 0) and processing boxes in `order`.
pub fn instantiate<K: ArtifactKind>(
    d: &Diagram,
    lib: &IdiomLibrary,
    choice: &BTreeMap<BoxId, usize>,
    order: &[BoxId],
) -> Result<Instance<K>, InstantiateError> {
    let v = d.validate();
    if !v.is_ok() {
        return Err(InstantiateError::InvalidDiagram(
            v.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        ));
    }
    if !d.is_implementation() {
        return Err(InstantiateError::InvalidDiagram("contains apply or nonterminal boxes".into()));
    }
    check_order(d, order)?;
    let mut supply = NameSupply::for_library::<K>(lib);
    let mut values: BTreeMap<(BoxId, usize), Value<K::Expr>> = BTreeMap::new();
    let mut acc = K::identity();

    for id in order {
        let sig = &d.boxes[id];
        let options = lib.options(&sig.label);
        if options.is_empty() {
            return Err(InstantiateError::MissingIdiom { kind: K::NAME.into(), label: sig.label.clone() });
        }
        let index = choice.get(id).copied().unwrap_or(0);
        let idiom = *options.get(index).ok_or_else(|| InstantiateError::BadChoice {
            id: id.to_string(),
            label: sig.label.clone(),
            index,
            available: options.len(),
        })?;
        if idiom.inputs.len() != sig.inputs.len() || idiom.silent.len() != sig.outputs.len() {
            return Err(InstantiateError::Arity {
                label: sig.label.clone(),
                detail: format!(
                    "{} inputs and {} outputs, signature has {} and {}",
                    idiom.inputs.len(),
                    idiom.silent.len(),
                    sig.inputs.len(),
                    sig.outputs.len()
                ),
            });
        }

        let mut inputs: BTreeMap<String, Value<K::Expr>> = BTreeMap::new();
        for (j, slot) in idiom.inputs.iter().enumerate() {
            let src =
                d.source_of(&crate::diagram::Target::Port(id.clone(), j)).expect("validated diagrams feed every input");
            let v = match src {
                Source::Boundary(i) => return Err(InstantiateError::UnboundBoundary(*i)),
                Source::Port(b, k) => values[&(b.clone(), *k)].clone(),
            };
            inputs.insert(slot.clone(), v);
        }

        let mut renames = BTreeMap::new();
        for f in &idiom.fresh {
            let base = if f.from_box { base_name(id) } else { f.name.clone() };
            renames.insert(f.name.clone(), supply.fresh(&base));
        }

        let partial_hit: Cell<Option<String>> = Cell::new(None);
        let mut fill = |h: &HoleRef<K::Expr>| -> Result<K::Expr, String> {
            let mut v = inputs.get(&h.input).ok_or_else(|| format!("no input named `{}`", h.input))?;
            for &p in &h.path {
                v = match v {
                    Value::Tuple(items) => items.get(p).ok_or_else(|| format!("`{}` has no component {p}", h.input))?,
                    _ => return Err(format!("`{}` is not a tuple", h.input)),
                };
            }
            match (v, &h.args) {
                (Value::Complete(e), None) => Ok(e.clone()),
                (Value::Complete(e), Some(args)) => K::apply(e.clone(), args.clone()),
                (Value::Partial { params, body }, Some(args)) => {
                    if params.len() != args.len() {
                        return Err(format!(
                            "`{}` expects {} arguments, {} supplied",
                            h.input,
                            params.len(),
                            args.len()
                        ));
                    }
                    Ok(K::subst_params(body, params, args))
                }
                (Value::Partial { .. }, None) => {
                    partial_hit.set(Some(h.input.clone()));
                    Err("partial value in a visible position".into())
                }
                (Value::Tuple(items), None) => {
                    let mut es = Vec::new();
                    for it in items {
                        match it {
                            Value::Complete(e) => es.push(e.clone()),
                            _ => {
                                partial_hit.set(Some(h.input.clone()));
                                return Err("partial value in a visible position".into());
                            }
                        }
                    }
                    K::tuple(es).ok_or_else(|| format!("{} artifacts have no tuples", K::NAME))
                }
                (Value::Tuple(_), Some(_)) => Err(format!("cannot apply the tuple `{}`", h.input)),
            }
        };

        let label = sig.label.clone();
        let wrap = |message: String, hit: &Cell<Option<String>>| match hit.take() {
            Some(input) => InstantiateError::PartialVisible { label: label.clone(), input },
            None => InstantiateError::Template { label: label.clone(), message },
        };

        if !idiom.emits.trim().is_empty() {
            let src = rename_tokens(&idiom.emits, &renames);
            let frag = K::parse_fragment(&src).map_err(|m| wrap(m, &partial_hit))?;
            let frag = K::fill_fragment(frag, &mut fill).map_err(|m| wrap(m, &partial_hit))?;
            acc = K::combine(acc, frag);
        }

        fn build<K: ArtifactKind>(
            t: &OutputTemplate,
            renames: &BTreeMap<String, String>,
            fill: &mut Filler<'_, K::Expr>,
        ) -> Result<Value<K::Expr>, String> {
            Ok(match t {
                OutputTemplate::Expr(s) => {
                    Value::Complete(K::fill_expr(K::parse_expr(&rename_tokens(s, renames))?, fill)?)
                }
                OutputTemplate::Partial { params, body } => {
                    let mut local = renames.clone();
                    for p in params {
                        local.remove(p);
                    }
                    let body = K::fill_expr(K::parse_expr(&rename_tokens(body, &local))?, fill)?;
                    Value::Partial { params: params.clone(), body }
                }
                OutputTemplate::Tuple(ts) => {
                    Value::Tuple(ts.iter().map(|t| build::<K>(t, renames, fill)).collect::<Result<_, _>>()?)
                }
            })
        }
        for (k, t) in idiom.silent.iter().enumerate() {
            let v = build::<K>(t, &renames, &mut fill).map_err(|m| wrap(m, &partial_hit))?;
            values.insert((id.clone(), k), v);
        }
    }

    let mut outputs = Vec::new();
    for i in 0..d.outputs.len() {
        let src = d.source_of(&crate::diagram::Target::Boundary(i)).expect("validated");
        outputs.push(match src {
            Source::Boundary(j) => return Err(InstantiateError::UnboundBoundary(*j)),
            Source::Port(b, k) => values[&(b.clone(), *k)].clone(),
        });
    }
    Ok(Instance { fragment: acc, outputs })
}

/// Whitespace-normalized text used to decide artifact equality.
pub fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoiceMode {
    Exhaustive,
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact<K: ArtifactKind> {
    /// Index into the variant list.
    pub variant: usize,
    pub choice: BTreeMap<BoxId, usize>,
    pub fragment: K::Fragment,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedVariant {
    pub variant: usize,
    pub missing: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration<K: ArtifactKind> {
    pub artifacts: Vec<Artifact<K>>,
    /// Variants using idioms the library does not cover.
    pub skipped: Vec<SkippedVariant>,
}

fn missing_labels(d: &Diagram, lib: &IdiomLibrary) -> Vec<String> {
    let have = lib.labels();
    d.labels().into_iter().filter(|l| !have.contains(l)).map(str::to_string).collect()
}

/// All distinct artifacts over the given variants (the first variant is the
/// base implementation and must be covered by the library). Artifacts are
/// deduplicated on whitespace-normalized text; at most `limit` are kept.
pub fn enumerate_artifacts<K: ArtifactKind>(
    variants: &[Diagram],
    lib: &IdiomLibrary,
    mode: ChoiceMode,
    limit: usize,
) -> Result<Enumeration<K>, InstantiateError> {
    let mut out = Enumeration { artifacts: Vec::new(), skipped: Vec::new() };
    let Some(base) = variants.first() else { return Ok(out) };
    let gap = missing_labels(base, lib);
    if !gap.is_empty() {
        return Err(InstantiateError::CoverageGap { kind: K::NAME.into(), labels: gap });
    }
    let mut covered = Vec::new();
    for (i, v) in variants.iter().enumerate() {
        let missing = missing_labels(v, lib);
        if missing.is_empty() {
            let order = v.canonical_linearization().map_err(|e| InstantiateError::InvalidDiagram(e.to_string()))?;
            let radix: Vec<(BoxId, usize)> =
                v.boxes.iter().map(|(id, s)| (id.clone(), lib.options(&s.label).len())).collect();
            covered.push((i, v, order, radix));
        } else {
            out.skipped.push(SkippedVariant { variant: i, missing });
        }
    }
    let mut seen = BTreeSet::new();
    let mut push =
        |out: &mut Enumeration<K>, variant: usize, d: &Diagram, order: &[BoxId], choice: BTreeMap<BoxId, usize>| {
            let inst = instantiate::<K>(d, lib, &choice, order)?;
            let text = K::render(&inst.fragment);
            if seen.insert(normalize(&text)) {
                out.artifacts.push(Artifact { variant, choice, fragment: inst.fragment, text });
            }
            Ok::<(), InstantiateError>(())
        };
    if limit == 0 {
        return Ok(out);
    }
    match mode {
        ChoiceMode::Exhaustive => {
            'variants: for (vi, v, order, radix) in &covered {
                let mut digits = vec![0usize; radix.len()];
                loop {
                    let choice = radix.iter().zip(&digits).map(|((id, _), &c)| (id.clone(), c)).collect();
                    push(&mut out, *vi, v, order, choice)?;
                    if out.artifacts.len() >= limit {
                        break 'variants;
                    }
                    let mut i = radix.len();
                    loop {
                        if i == 0 {
                            continue 'variants;
                        }
                        i -= 1;
                        digits[i] += 1;
                        if digits[i] < radix[i].1 {
                            break;
                        }
                        digits[i] = 0;
                    }
                }
            }
        }
        ChoiceMode::Random { seed } => {
            let mut rng = stage_rng(seed, "choices");
            let attempts = limit.min(4096).saturating_mul(8).max(64);
            for _ in 0..attempts {
                if out.artifacts.len() >= limit || covered.is_empty() {
                    break;
                }
                let (vi, v, order, radix) = &covered[rng.gen_range(0..covered.len())];
                let choice = radix.iter().map(|(id, n)| (id.clone(), rng.gen_range(0..*n))).collect();
                push(&mut out, *vi, v, order, choice)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hole_references_parse() {
        let h = parse_hole_ref("f.1(s, v)", |a| Ok(a.to_string())).unwrap();
        assert_eq!(h, HoleRef { input: "f".into(), path: vec![1], args: Some(vec!["s".into(), "v".into()]) });
        let h = parse_hole_ref("n", |a| Ok(a.to_string())).unwrap();
        assert_eq!(h.render(None), "{hole:n}");
        assert!(parse_hole_ref("(x)", |a| Ok(a.to_string())).is_err());
    }

    #[test]
    fn renaming_touches_whole_tokens_only() {
        let map = BTreeMap::from([("n".to_string(), "x".to_string()), ("go".to_string(), "go1".to_string())]);
        assert_eq!(
            rename_tokens("n <- readLn; go n ngo {hole:n} [?n:Nat] n_C", &map),
            "x <- readLn; go1 x ngo {hole:n} [?x:Nat] x_C"
        );
        assert_eq!(rename_tokens("{hole:k(n)}", &map), "{hole:k(x)}");
    }

    #[test]
    fn name_supply_suffixes() {
        let mut s = NameSupply::new(["go".to_string()]);
        assert_eq!(s.fresh("x"), "x");
        assert_eq!(s.fresh("x"), "x1");
        assert_eq!(s.fresh("x"), "x2");
        assert_eq!(s.fresh("go"), "go1");
    }

    #[test]
    fn box_ids_become_identifiers() {
        assert_eq!(base_name(&"read_loop".into()), "readLoop");
        assert_eq!(base_name(&"r/fold".into()), "fold");
        assert_eq!(base_name(&"xs".into()), "xs");
        assert_eq!(base_name(&"2".into()), "v2");
        assert_eq!(base_name(&"Total".into()), "total");
    }

    #[test]
    fn split_respects_brackets() {
        assert_eq!(split_top_level("a, f(b, c), [d, e]", ','), vec!["a", " f(b, c)", " [d, e]"]);
    }
}
