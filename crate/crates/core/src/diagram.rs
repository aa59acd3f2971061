//! Typed, acyclic wiring diagrams of abstract idioms.
//!
//! A [`Diagram`] is a set of labelled boxes connected by wires, together with
//! an explicit total order on its effectful boxes. The same type serves for
//! abstract implementations (only `idiom` boxes), the bodies of alternatives
//! and merge rules (which may contain `apply` boxes) and abstract patterns
//! (which contain `nonterminal` boxes).
//!
//! Ports are addressed positionally. The diagram's own inputs and outputs
//! live on an implicit boundary box, addressed as [`Source::Boundary`] and
//! [`Target::Boundary`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque, nominal type name. Whitespace is not significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeName(String);

impl TypeName {
    pub fn new(name: impl AsRef<str>) -> Self {
        TypeName(name.as_ref().chars().filter(|c| !c.is_whitespace()).collect())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TypeName {
    fn from(s: &str) -> Self {
        TypeName::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdiomKind {
    Idiom,
    /// Connector produced by splitting an idiom into a function application.
    Apply,
    /// Placeholder for a class of behaviours, refined by pattern grammars.
    Nonterminal,
}

impl IdiomKind {
    pub fn keyword(self) -> &'static str {
        match self {
            IdiomKind::Idiom => "idiom",
            IdiomKind::Apply => "apply",
            IdiomKind::Nonterminal => "nonterminal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub label: String,
    pub inputs: Vec<TypeName>,
    pub outputs: Vec<TypeName>,
    pub effectful: bool,
    pub kind: IdiomKind,
}

impl Signature {
    pub fn new<I, O>(label: impl Into<String>, inputs: I, outputs: O, effectful: bool) -> Self
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
        O: IntoIterator,
        O::Item: AsRef<str>,
    {
        Signature {
            label: label.into(),
            inputs: inputs.into_iter().map(TypeName::new).collect(),
            outputs: outputs.into_iter().map(TypeName::new).collect(),
            effectful,
            kind: IdiomKind::Idiom,
        }
    }

    pub fn with_kind(mut self, kind: IdiomKind) -> Self {
        self.kind = kind;
        self
    }

    /// Same port types in the same order.
    pub fn same_interface(&self, other: &Signature) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |tys: &[TypeName]| tys.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ");
        write!(f, "{} {:?} : ({}) -> ({})", self.kind.keyword(), self.label, join(&self.inputs), join(&self.outputs))?;
        if self.effectful {
            f.write_str(" effect")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxId(String);

impl BoxId {
    pub fn new(id: impl Into<String>) -> Self {
        BoxId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BoxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BoxId {
    fn from(s: &str) -> Self {
        BoxId::new(s)
    }
}

impl From<String> for BoxId {
    fn from(s: String) -> Self {
        BoxId(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    /// Input port `i` of the diagram boundary.
    Boundary(usize),
    /// Output port `k` of a box.
    Port(BoxId, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    /// Output port `i` of the diagram boundary.
    Boundary(usize),
    /// Input port `j` of a box.
    Port(BoxId, usize),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Boundary(i) => write!(f, "@in.{i}"),
            Source::Port(b, k) => write!(f, "{b}.{k}"),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Boundary(i) => write!(f, "@out.{i}"),
            Target::Port(b, j) => write!(f, "{b}.{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Wire {
    pub source: Source,
    pub target: Target,
}

impl Wire {
    pub fn new(source: Source, target: Target) -> Self {
        Wire { source, target }
    }
}

/// A wiring diagram: boxes, wires and the total order of effectful boxes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub name: String,
    pub inputs: Vec<TypeName>,
    pub outputs: Vec<TypeName>,
    pub boxes: BTreeMap<BoxId, Signature>,
    pub wires: Vec<Wire>,
    pub effect_order: Vec<BoxId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("unknown box `{0}`")]
    UnknownBox(BoxId),
    #[error("box `{0}` is not effectful")]
    NotEffectful(BoxId),
    #[error("duplicate box id `{0}`")]
    DuplicateBox(BoxId),
    #[error("invalid diagram: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// One broken structural invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    UnknownBox { wire: usize, id: BoxId },
    PortOutOfRange { wire: usize, endpoint: String },
    TypeMismatch { wire: usize, source: TypeName, target: TypeName },
    UnconnectedInput(Target),
    MultipleSources(Target),
    DataCycle(Vec<BoxId>),
    UnknownInEffectOrder(BoxId),
    NotEffectful(BoxId),
    DuplicateInEffectOrder(BoxId),
    MissingFromEffectOrder(BoxId),
    CombinedCycle(Vec<BoxId>),
}

fn ids(ids: &[BoxId]) -> String {
    ids.iter().map(|b| b.as_str()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownBox { wire, id } => write!(f, "wire #{wire} references unknown box {id}"),
            Violation::PortOutOfRange { wire, endpoint } => {
                write!(f, "wire #{wire} uses nonexistent port {endpoint}")
            }
            Violation::TypeMismatch { wire, source, target } => {
                write!(f, "type mismatch on wire #{wire}: {source} feeds {target}")
            }
            Violation::UnconnectedInput(t) => write!(f, "input {t} has no source"),
            Violation::MultipleSources(t) => write!(f, "input {t} has more than one source"),
            Violation::DataCycle(c) => write!(f, "data cycle {}", ids(c)),
            Violation::UnknownInEffectOrder(b) => write!(f, "effect order names unknown box {b}"),
            Violation::NotEffectful(b) => write!(f, "effect order names effect-free box {b}"),
            Violation::DuplicateInEffectOrder(b) => write!(f, "box {b} appears twice in effect order"),
            Violation::MissingFromEffectOrder(b) => write!(f, "effectful box {b} missing from effect order"),
            Violation::CombinedCycle(c) => write!(f, "combined cycle {}", ids(c)),
        }
    }
}

/// Result of [`Diagram::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<(), DiagramError> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(DiagramError::Invalid(self.violations))
        }
    }
}

pub(crate) type Graph = BTreeMap<BoxId, BTreeSet<BoxId>>;

impl Diagram {
    pub fn new<I, O>(name: impl Into<String>, inputs: I, outputs: O) -> Self
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
        O: IntoIterator,
        O::Item: AsRef<str>,
    {
        Diagram {
            name: name.into(),
            inputs: inputs.into_iter().map(TypeName::new).collect(),
            outputs: outputs.into_iter().map(TypeName::new).collect(),
            boxes: BTreeMap::new(),
            wires: Vec::new(),
            effect_order: Vec::new(),
        }
    }

    /// Empty diagram with the port types of `sig`.
    pub fn with_interface(name: impl Into<String>, sig: &Signature) -> Self {
        Diagram {
            name: name.into(),
            inputs: sig.inputs.clone(),
            outputs: sig.outputs.clone(),
            boxes: BTreeMap::new(),
            wires: Vec::new(),
            effect_order: Vec::new(),
        }
    }

    pub fn add_box(&mut self, id: impl Into<BoxId>, sig: Signature) -> Result<&mut Self, DiagramError> {
        let id = id.into();
        if self.boxes.contains_key(&id) {
            return Err(DiagramError::DuplicateBox(id));
        }
        self.boxes.insert(id, sig);
        Ok(self)
    }

    pub fn connect(&mut self, source: Source, target: Target) -> &mut Self {
        self.wires.push(Wire::new(source, target));
        self
    }

    /// Convenience for `box.k -> box.j`.
    pub fn wire(&mut self, from: &str, out: usize, to: &str, input: usize) -> &mut Self {
        self.connect(Source::Port(from.into(), out), Target::Port(to.into(), input))
    }

    pub fn set_effect_order<I, S>(&mut self, order: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<BoxId>,
    {
        self.effect_order = order.into_iter().map(Into::into).collect();
        self
    }

    /// Outside interface. Effectful iff some inner box is effectful.
    pub fn boundary(&self) -> Signature {
        Signature {
            label: self.name.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            effectful: self.is_effectful(),
            kind: IdiomKind::Idiom,
        }
    }

    pub fn is_effectful(&self) -> bool {
        self.boxes.values().any(|s| s.effectful)
    }

    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }

    pub fn signature(&self, id: &BoxId) -> Option<&Signature> {
        self.boxes.get(id)
    }

    /// Only concrete idiom boxes: an abstract implementation.
    pub fn is_implementation(&self) -> bool {
        self.boxes.values().all(|s| s.kind == IdiomKind::Idiom)
    }

    /// Contains at least one nonterminal box.
    pub fn is_pattern(&self) -> bool {
        self.boxes.values().any(|s| s.kind == IdiomKind::Nonterminal)
    }

    pub fn contains_apply(&self) -> bool {
        self.boxes.values().any(|s| s.kind == IdiomKind::Apply)
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.boxes.values().map(|s| s.label.as_str()).collect()
    }

    pub fn source_of(&self, target: &Target) -> Option<&Source> {
        self.wires.iter().find(|w| &w.target == target).map(|w| &w.source)
    }

    pub fn consumers<'a>(&'a self, source: &'a Source) -> impl Iterator<Item = &'a Target> + 'a {
        self.wires.iter().filter(move |w| &w.source == source).map(|w| &w.target)
    }

    /// A box id derived from `base` that is not yet used.
    pub fn fresh_id(&self, base: &str) -> BoxId {
        let candidate = BoxId::new(base);
        if !self.boxes.contains_key(&candidate) {
            return candidate;
        }
        (2..)
            .map(|n| BoxId::new(format!("{base}_{n}")))
            .find(|c| !self.boxes.contains_key(c))
            .expect("unbounded counter")
    }

    pub(crate) fn data_graph(&self) -> Graph {
        let mut g: Graph = self.boxes.keys().map(|b| (b.clone(), BTreeSet::new())).collect();
        for w in &self.wires {
            if let (Source::Port(a, _), Target::Port(b, _)) = (&w.source, &w.target) {
                if self.boxes.contains_key(a) && self.boxes.contains_key(b) {
                    g.entry(a.clone()).or_default().insert(b.clone());
                }
            }
        }
        g
    }

    /// Data edges plus one edge between each pair of consecutive effects.
    pub(crate) fn combined_graph(&self) -> Graph {
        let mut g = self.data_graph();
        for pair in self.effect_order.windows(2) {
            if self.boxes.contains_key(&pair[0]) && self.boxes.contains_key(&pair[1]) {
                g.entry(pair[0].clone()).or_default().insert(pair[1].clone());
            }
        }
        g
    }

    pub fn validate(&self) -> Validation {
        let mut violations = Vec::new();

        let out_type = |s: &Source| -> Option<&TypeName> {
            match s {
                Source::Boundary(i) => self.inputs.get(*i),
                Source::Port(b, k) => self.boxes.get(b).and_then(|sig| sig.outputs.get(*k)),
            }
        };
        let in_type = |t: &Target| -> Option<&TypeName> {
            match t {
                Target::Boundary(i) => self.outputs.get(*i),
                Target::Port(b, j) => self.boxes.get(b).and_then(|sig| sig.inputs.get(*j)),
            }
        };

        for (i, w) in self.wires.iter().enumerate() {
            let mut ok = true;
            for id in [endpoint_box_s(&w.source), endpoint_box_t(&w.target)].into_iter().flatten() {
                if !self.boxes.contains_key(id) {
                    violations.push(Violation::UnknownBox { wire: i, id: id.clone() });
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            let (st, tt) = (out_type(&w.source), in_type(&w.target));
            if st.is_none() {
                violations.push(Violation::PortOutOfRange { wire: i, endpoint: w.source.to_string() });
            }
            if tt.is_none() {
                violations.push(Violation::PortOutOfRange { wire: i, endpoint: w.target.to_string() });
            }
            if let (Some(s), Some(t)) = (st, tt) {
                if s != t {
                    violations.push(Violation::TypeMismatch { wire: i, source: s.clone(), target: t.clone() });
                }
            }
        }

        // Every input port has exactly one source.
        let mut fan_in: BTreeMap<&Target, usize> = BTreeMap::new();
        for w in &self.wires {
            *fan_in.entry(&w.target).or_default() += 1;
        }
        let mut all_inputs: Vec<Target> = (0..self.outputs.len()).map(Target::Boundary).collect();
        for (id, sig) in &self.boxes {
            all_inputs.extend((0..sig.inputs.len()).map(|j| Target::Port(id.clone(), j)));
        }
        for t in all_inputs {
            match fan_in.get(&t).copied().unwrap_or(0) {
                0 => violations.push(Violation::UnconnectedInput(t)),
                1 => {}
                _ => violations.push(Violation::MultipleSources(t)),
            }
        }

        let data_cycle = find_cycle(&self.data_graph());
        if let Some(c) = &data_cycle {
            violations.push(Violation::DataCycle(c.clone()));
        }

        let mut seen = BTreeSet::new();
        let mut order_ok = true;
        for b in &self.effect_order {
            match self.boxes.get(b) {
                None => {
                    violations.push(Violation::UnknownInEffectOrder(b.clone()));
                    order_ok = false;
                }
                Some(sig) if !sig.effectful => {
                    violations.push(Violation::NotEffectful(b.clone()));
                    order_ok = false;
                }
                Some(_) => {}
            }
            if !seen.insert(b) {
                violations.push(Violation::DuplicateInEffectOrder(b.clone()));
                order_ok = false;
            }
        }
        for (id, sig) in &self.boxes {
            if sig.effectful && !seen.contains(id) {
                violations.push(Violation::MissingFromEffectOrder(id.clone()));
            }
        }

        if data_cycle.is_none() && order_ok {
            if let Some(c) = find_cycle(&self.combined_graph()) {
                violations.push(Violation::CombinedCycle(c));
            }
        }

        Validation { violations }
    }

    fn require_box(&self, id: &BoxId) -> Result<&Signature, DiagramError> {
        self.boxes.get(id).ok_or_else(|| DiagramError::UnknownBox(id.clone()))
    }

    /// `x ≺data y`: reflexive-transitive reachability along data wires.
    pub fn data_reach(&self, x: &BoxId, y: &BoxId) -> Result<bool, DiagramError> {
        self.require_box(x)?;
        self.require_box(y)?;
        Ok(reaches(&self.data_graph(), x, y))
    }

    /// `x ≺IO y`: `x` precedes or equals `y` in the effect order.
    pub fn effect_reach(&self, x: &BoxId, y: &BoxId) -> Result<bool, DiagramError> {
        for b in [x, y] {
            if !self.require_box(b)?.effectful {
                return Err(DiagramError::NotEffectful(b.clone()));
            }
        }
        let pos = |b: &BoxId| self.effect_order.iter().position(|e| e == b);
        match (pos(x), pos(y)) {
            (Some(i), Some(j)) => Ok(i <= j),
            _ => Err(DiagramError::Invalid(self.validate().violations)),
        }
    }

    /// Every total order compatible with data flow and effect order, up to
    /// `limit` orders.
    pub fn linearizations(&self, limit: usize) -> Result<Vec<Vec<BoxId>>, DiagramError> {
        self.validate().into_result()?;
        let g = self.combined_graph();
        let mut indeg: BTreeMap<BoxId, usize> = g.keys().map(|b| (b.clone(), 0)).collect();
        for succs in g.values() {
            for s in succs {
                *indeg.get_mut(s).expect("node") += 1;
            }
        }
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        all_topo(&g, &mut indeg, &mut prefix, &mut out, limit);
        Ok(out)
    }

    /// The lexicographically smallest compatible total order (by box id).
    pub fn canonical_linearization(&self) -> Result<Vec<BoxId>, DiagramError> {
        self.validate().into_result()?;
        Ok(smallest_topo(&self.combined_graph()))
    }
}

fn endpoint_box_s(s: &Source) -> Option<&BoxId> {
    match s {
        Source::Port(b, _) => Some(b),
        Source::Boundary(_) => None,
    }
}

fn endpoint_box_t(t: &Target) -> Option<&BoxId> {
    match t {
        Target::Port(b, _) => Some(b),
        Target::Boundary(_) => None,
    }
}

pub(crate) fn reaches(g: &Graph, from: &BoxId, to: &BoxId) -> bool {
    if from == to {
        return true;
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![from];
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        for m in g.get(n).into_iter().flatten() {
            if m == to {
                return true;
            }
            stack.push(m);
        }
    }
    false
}

/// Some cycle of `g`, as the list of nodes along it.
pub(crate) fn find_cycle(g: &Graph) -> Option<Vec<BoxId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    let mut mark: BTreeMap<&BoxId, Mark> = g.keys().map(|k| (k, Mark::Fresh)).collect();
    for root in g.keys() {
        if mark[root] != Mark::Fresh {
            continue;
        }
        // Iterative DFS keeping the active path.
        let mut path: Vec<&BoxId> = vec![root];
        let mut iters: Vec<std::collections::btree_set::Iter<'_, BoxId>> = vec![g[root].iter()];
        mark.insert(root, Mark::Active);
        while let Some(it) = iters.last_mut() {
            match it.next() {
                Some(next) => match mark.get(next).copied().unwrap_or(Mark::Done) {
                    Mark::Fresh => {
                        mark.insert(next, Mark::Active);
                        path.push(next);
                        iters.push(g[next].iter());
                    }
                    Mark::Active => {
                        let start = path.iter().position(|p| *p == next).expect("on path");
                        return Some(path[start..].iter().map(|b| (*b).clone()).collect());
                    }
                    Mark::Done => {}
                },
                None => {
                    let done = path.pop().expect("non-empty");
                    mark.insert(done, Mark::Done);
                    iters.pop();
                }
            }
        }
    }
    None
}

fn all_topo(
    g: &Graph,
    indeg: &mut BTreeMap<BoxId, usize>,
    prefix: &mut Vec<BoxId>,
    out: &mut Vec<Vec<BoxId>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if prefix.len() == g.len() {
        out.push(prefix.clone());
        return;
    }
    let ready: Vec<BoxId> =
        indeg.iter().filter(|(b, d)| **d == 0 && !prefix.contains(b)).map(|(b, _)| b.clone()).collect();
    for b in ready {
        for s in &g[&b] {
            *indeg.get_mut(s).expect("node") -= 1;
        }
        prefix.push(b.clone());
        all_topo(g, indeg, prefix, out, limit);
        prefix.pop();
        for s in &g[&b] {
            *indeg.get_mut(s).expect("node") += 1;
        }
    }
}

pub(crate) fn smallest_topo(g: &Graph) -> Vec<BoxId> {
    let mut indeg: BTreeMap<&BoxId, usize> = g.keys().map(|b| (b, 0)).collect();
    for succs in g.values() {
        for s in succs {
            *indeg.get_mut(s).expect("node") += 1;
        }
    }
    let mut ready: BTreeSet<&BoxId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(b, _)| *b).collect();
    let mut order = Vec::with_capacity(g.len());
    while let Some(b) = ready.pop_first() {
        order.push(b.clone());
        for s in &g[b] {
            let d = indeg.get_mut(s).expect("node");
            *d -= 1;
            if *d == 0 {
                ready.insert(s);
            }
        }
    }
    order
}

/// Bijection on boxes preserving signatures, wires, boundary connections
/// and effect order. Diagram names are ignored.
pub fn isomorphic(a: &Diagram, b: &Diagram) -> bool {
    isomorphism(a, b).is_some()
}

/// The box bijection witnessing [`isomorphic`], if any.
pub fn isomorphism(a: &Diagram, b: &Diagram) -> Option<BTreeMap<BoxId, BoxId>> {
    if a.inputs != b.inputs
        || a.outputs != b.outputs
        || a.boxes.len() != b.boxes.len()
        || a.wires.len() != b.wires.len()
        || a.effect_order.len() != b.effect_order.len()
    {
        return None;
    }
    let mut la: Vec<&Signature> = a.boxes.values().collect();
    let mut lb: Vec<&Signature> = b.boxes.values().collect();
    la.sort();
    lb.sort();
    if la != lb {
        return None;
    }
    // Effectful boxes are pinned by their effect-order position.
    let mut map: BTreeMap<BoxId, BoxId> = BTreeMap::new();
    for (x, y) in a.effect_order.iter().zip(&b.effect_order) {
        if a.boxes.get(x)? != b.boxes.get(y)? {
            return None;
        }
        if map.insert(x.clone(), y.clone()).is_some() {
            return None;
        }
    }
    let used: BTreeSet<BoxId> = map.values().cloned().collect();
    let rest: Vec<&BoxId> = a.boxes.keys().filter(|k| !map.contains_key(*k)).collect();
    let target_wires: BTreeMap<Wire, usize> = count_wires(&b.wires);
    let mut used = used;
    if extend_iso(a, b, &rest, 0, &mut map, &mut used, &target_wires) {
        Some(map)
    } else {
        None
    }
}

fn count_wires(ws: &[Wire]) -> BTreeMap<Wire, usize> {
    let mut m = BTreeMap::new();
    for w in ws {
        *m.entry(w.clone()).or_insert(0) += 1;
    }
    m
}

fn map_wire(w: &Wire, map: &BTreeMap<BoxId, BoxId>) -> Option<Wire> {
    let source = match &w.source {
        Source::Boundary(i) => Source::Boundary(*i),
        Source::Port(x, k) => Source::Port(map.get(x)?.clone(), *k),
    };
    let target = match &w.target {
        Target::Boundary(i) => Target::Boundary(*i),
        Target::Port(x, j) => Target::Port(map.get(x)?.clone(), *j),
    };
    Some(Wire { source, target })
}

fn extend_iso(
    a: &Diagram,
    b: &Diagram,
    rest: &[&BoxId],
    i: usize,
    map: &mut BTreeMap<BoxId, BoxId>,
    used: &mut BTreeSet<BoxId>,
    target_wires: &BTreeMap<Wire, usize>,
) -> bool {
    // Partial check: every wire whose endpoints are mapped must exist in b.
    let mut partial: BTreeMap<Wire, usize> = BTreeMap::new();
    for w in &a.wires {
        if let Some(mw) = map_wire(w, map) {
            *partial.entry(mw).or_insert(0) += 1;
        }
    }
    if partial.iter().any(|(w, n)| target_wires.get(w).copied().unwrap_or(0) < *n) {
        return false;
    }
    if i == rest.len() {
        return partial == *target_wires;
    }
    let x = rest[i];
    let sig = &a.boxes[x];
    let candidates: Vec<BoxId> =
        b.boxes.iter().filter(|(y, s)| *s == sig && !used.contains(*y)).map(|(y, _)| y.clone()).collect();
    for y in candidates {
        map.insert(x.clone(), y.clone());
        used.insert(y.clone());
        if extend_iso(a, b, rest, i + 1, map, used, target_wires) {
            return true;
        }
        map.remove(x);
        used.remove(&y);
    }
    false
}

/// Keeps the first of every isomorphism class, preserving order.
pub fn dedup_isomorphic(diagrams: Vec<Diagram>) -> Vec<Diagram> {
    let mut kept: Vec<Diagram> = Vec::new();
    for d in diagrams {
        if !kept.iter().any(|k| isomorphic(k, &d)) {
            kept.push(d);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sum_of_list() -> Diagram {
        let mut d = Diagram::new("sum", Vec::<&str>::new(), Vec::<&str>::new());
        d.add_box("n", Signature::new("read", Vec::<&str>::new(), ["Int"], true)).unwrap();
        d.add_box("xs", Signature::new("read list", ["Int"], ["[Int]"], true)).unwrap();
        d.add_box("r", Signature::new("sum", ["[Int]"], ["Int"], false)).unwrap();
        d.add_box("p", Signature::new("print", ["Int"], Vec::<&str>::new(), true)).unwrap();
        d.wire("n", 0, "xs", 0).wire("xs", 0, "r", 0).wire("r", 0, "p", 0);
        d.set_effect_order(["n", "xs", "p"]);
        d
    }

    fn b(s: &str) -> BoxId {
        BoxId::new(s)
    }

    #[test]
    fn empty_diagram_is_valid() {
        let d = Diagram::new("empty", Vec::<&str>::new(), Vec::<&str>::new());
        assert!(d.validate().is_ok());
    }

    #[test]
    fn sum_of_list_is_valid() {
        assert_eq!(sum_of_list().validate().violations, vec![]);
    }

    #[test]
    fn reversed_effect_order_against_data_is_a_combined_cycle() {
        let mut d = Diagram::new("d", Vec::<&str>::new(), Vec::<&str>::new());
        d.add_box("x", Signature::new("read", Vec::<&str>::new(), ["Int"], true)).unwrap();
        d.add_box("y", Signature::new("print", ["Int"], Vec::<&str>::new(), true)).unwrap();
        d.wire("x", 0, "y", 0).set_effect_order(["y", "x"]);
        let v = d.validate();
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].to_string(), "combined cycle x,y");
    }

    #[test]
    fn type_mismatch_is_reported() {
        let mut d = sum_of_list();
        d.wires.retain(|w| w.target != Target::Port(b("r"), 0));
        d.wire("n", 0, "r", 0);
        let v = d.validate();
        assert!(matches!(v.violations[..], [Violation::TypeMismatch { .. }]));
    }

    #[test]
    fn missing_and_double_sources() {
        let mut d = sum_of_list();
        d.wires.retain(|w| w.target != Target::Port(b("r"), 0));
        assert_eq!(d.validate().violations, vec![Violation::UnconnectedInput(Target::Port(b("r"), 0))]);
        d.wire("xs", 0, "r", 0).wire("xs", 0, "r", 0);
        assert_eq!(d.validate().violations, vec![Violation::MultipleSources(Target::Port(b("r"), 0))]);
    }

    #[test]
    fn effect_order_must_be_exact() {
        let mut d = sum_of_list();
        d.set_effect_order(["n", "xs", "r", "p", "n"]);
        let v = d.validate().violations;
        assert!(v.contains(&Violation::NotEffectful(b("r"))));
        assert!(v.contains(&Violation::DuplicateInEffectOrder(b("n"))));
        d.set_effect_order(["n", "p"]);
        assert_eq!(d.validate().violations, vec![Violation::MissingFromEffectOrder(b("xs"))]);
    }

    #[test]
    fn fan_out_is_permitted() {
        let mut d = sum_of_list();
        d.add_box("q", Signature::new("print", ["Int"], Vec::<&str>::new(), true)).unwrap();
        d.wire("n", 0, "q", 0);
        d.set_effect_order(["n", "xs", "p", "q"]);
        assert!(d.validate().is_ok());
    }

    #[test]
    fn reachability() {
        let d = sum_of_list();
        assert!(d.data_reach(&b("n"), &b("p")).unwrap());
        assert!(d.data_reach(&b("r"), &b("r")).unwrap());
        assert!(!d.data_reach(&b("p"), &b("n")).unwrap());
        assert!(d.effect_reach(&b("n"), &b("xs")).unwrap());
        assert!(d.effect_reach(&b("p"), &b("p")).unwrap());
        assert!(!d.effect_reach(&b("p"), &b("n")).unwrap());
        assert_eq!(d.effect_reach(&b("r"), &b("p")), Err(DiagramError::NotEffectful(b("r"))));
        assert_eq!(d.data_reach(&b("zz"), &b("p")), Err(DiagramError::UnknownBox(b("zz"))));
    }

    #[test]
    fn sum_of_list_linearization_is_forced() {
        let d = sum_of_list();
        let all = d.linearizations(usize::MAX).unwrap();
        let expected: Vec<BoxId> = ["n", "xs", "r", "p"].into_iter().map(b).collect();
        assert_eq!(all, vec![expected.clone()]);
        assert_eq!(d.canonical_linearization().unwrap(), expected);
    }

    #[test]
    fn parallel_pure_boxes_have_two_orders() {
        let mut d = Diagram::new("par", Vec::<&str>::new(), Vec::<&str>::new());
        d.add_box("a", Signature::new("zero", Vec::<&str>::new(), ["Int"], false)).unwrap();
        d.add_box("b", Signature::new("zero", Vec::<&str>::new(), ["Int"], false)).unwrap();
        let all = d.linearizations(usize::MAX).unwrap();
        assert_eq!(all, vec![vec![b("a"), b("b")], vec![b("b"), b("a")]]);
    }

    #[test]
    fn single_box_has_one_order() {
        let mut d = Diagram::new("one", Vec::<&str>::new(), Vec::<&str>::new());
        d.add_box("a", Signature::new("zero", Vec::<&str>::new(), ["Int"], false)).unwrap();
        assert_eq!(d.linearizations(usize::MAX).unwrap().len(), 1);
    }

    #[test]
    fn isomorphism_ignores_ids() {
        let d = sum_of_list();
        let mut e = Diagram::new("other", Vec::<&str>::new(), Vec::<&str>::new());
        e.add_box("a", Signature::new("read", Vec::<&str>::new(), ["Int"], true)).unwrap();
        e.add_box("b", Signature::new("read list", ["Int"], ["[Int]"], true)).unwrap();
        e.add_box("c", Signature::new("sum", ["[Int]"], ["Int"], false)).unwrap();
        e.add_box("d", Signature::new("print", ["Int"], Vec::<&str>::new(), true)).unwrap();
        e.wire("a", 0, "b", 0).wire("b", 0, "c", 0).wire("c", 0, "d", 0);
        e.set_effect_order(["a", "b", "d"]);
        assert!(isomorphic(&d, &e));
        e.set_effect_order(["a", "d", "b"]);
        assert!(!isomorphic(&d, &e));
    }
}
