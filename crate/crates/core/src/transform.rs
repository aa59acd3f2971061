//! Substitution of a box by a diagram and merging of a matched sub-diagram
//! into a single box.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::diagram::{BoxId, Diagram, IdiomKind, Signature, Source, Target, Violation, Wire};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("unknown box `{0}`")]
    UnknownTarget(BoxId),
    #[error("interface mismatch: expected {expected}, found {found}")]
    BoundaryMismatch { expected: Box<Signature>, found: Box<Signature> },
    #[error("invalid replacement or pattern `{name}`: {reason}")]
    InvalidPattern { name: String, reason: String },
    #[error("transformation produced an invalid diagram: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// One occurrence of a pattern inside a host diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    /// Pattern box -> host box (injective).
    pub box_map: BTreeMap<BoxId, BoxId>,
    /// Host source feeding each pattern boundary input.
    pub input_sources: Vec<Source>,
    /// Host consumers, outside the image, of each pattern boundary output.
    pub output_targets: Vec<Vec<Target>>,
}

impl Match {
    pub fn image(&self) -> BTreeSet<&BoxId> {
        self.box_map.values().collect()
    }
}

fn interface_check(expected: &Signature, found: &Signature, allow_fewer_effects: bool) -> Result<(), TransformError> {
    let effects_ok = if allow_fewer_effects {
        !found.effectful || expected.effectful
    } else {
        found.effectful == expected.effectful
    };
    if expected.same_interface(found) && effects_ok {
        Ok(())
    } else {
        Err(TransformError::BoundaryMismatch { expected: Box::new(expected.clone()), found: Box::new(found.clone()) })
    }
}

fn invalid(d: &Diagram) -> Result<(), TransformError> {
    let v = d.validate();
    if v.is_ok() {
        Ok(())
    } else {
        Err(TransformError::Invalid(v.violations))
    }
}

/// Replace box `target` of `host` by the diagram `replacement`.
///
/// Inserted boxes are named `<target>/<inner id>` (with a numeric suffix on
/// collision). A nonterminal target may be replaced by a body with fewer
/// effects than its "may have effects" flag promises.
pub fn substitute(host: &Diagram, target: &BoxId, replacement: &Diagram) -> Result<Diagram, TransformError> {
    let tsig = host.boxes.get(target).ok_or_else(|| TransformError::UnknownTarget(target.clone()))?;
    interface_check(tsig, &replacement.boundary(), tsig.kind == IdiomKind::Nonterminal)?;
    let rv = replacement.validate();
    if !rv.is_ok() {
        return Err(TransformError::InvalidPattern {
            name: replacement.name.clone(),
            reason: rv.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        });
    }

    let mut out = host.clone();
    out.boxes.remove(target);
    let mut rename: BTreeMap<&BoxId, BoxId> = BTreeMap::new();
    for (inner, sig) in &replacement.boxes {
        let id = out.fresh_id(&format!("{target}/{inner}"));
        out.boxes.insert(id.clone(), sig.clone());
        rename.insert(inner, id);
    }

    let mut in_src = Vec::with_capacity(tsig.inputs.len());
    for j in 0..tsig.inputs.len() {
        let s = host.source_of(&Target::Port(target.clone(), j)).cloned().ok_or_else(|| {
            TransformError::Invalid(vec![Violation::UnconnectedInput(Target::Port(target.clone(), j))])
        })?;
        in_src.push(s);
    }
    let map_src = |s: &Source| -> Source {
        match s {
            Source::Boundary(i) => in_src[*i].clone(),
            Source::Port(b, k) => Source::Port(rename[b].clone(), *k),
        }
    };
    let out_src: Vec<Source> = (0..tsig.outputs.len())
        .map(|k| map_src(replacement.source_of(&Target::Boundary(k)).expect("validated replacement")))
        .collect();

    let mut wires = Vec::with_capacity(host.wires.len() + replacement.wires.len());
    for w in &host.wires {
        if matches!(&w.target, Target::Port(b, _) if b == target) {
            continue;
        }
        match &w.source {
            Source::Port(b, k) if b == target => wires.push(Wire::new(out_src[*k].clone(), w.target.clone())),
            _ => wires.push(w.clone()),
        }
    }
    for w in &replacement.wires {
        if let Target::Port(b, j) = &w.target {
            wires.push(Wire::new(map_src(&w.source), Target::Port(rename[b].clone(), *j)));
        }
    }
    out.wires = wires;

    let inner_order: Vec<BoxId> = replacement.effect_order.iter().map(|b| rename[b].clone()).collect();
    // The interface check guarantees an effectful replacement only ever
    // stands in for an effectful target.
    if let Some(pos) = host.effect_order.iter().position(|b| b == target) {
        out.effect_order.splice(pos..=pos, inner_order);
    }

    invalid(&out)?;
    Ok(out)
}

/// Patterns usable for matching: valid, non-empty, every boundary input
/// consumed by some box, every boundary output produced by a box.
pub fn check_pattern(pattern: &Diagram) -> Result<(), TransformError> {
    let fail = |reason: String| Err(TransformError::InvalidPattern { name: pattern.name.clone(), reason });
    if pattern.boxes.is_empty() {
        return fail("pattern has no boxes".into());
    }
    let v = pattern.validate();
    if !v.is_ok() {
        return fail(v.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "));
    }
    for i in 0..pattern.inputs.len() {
        if !pattern.wires.iter().any(|w| w.source == Source::Boundary(i) && matches!(w.target, Target::Port(..))) {
            return fail(format!("boundary input {i} is not consumed by any box"));
        }
    }
    for k in 0..pattern.outputs.len() {
        if let Some(Source::Boundary(_)) = pattern.source_of(&Target::Boundary(k)) {
            return fail(format!("boundary output {k} is wired straight from an input"));
        }
    }
    Ok(())
}

/// Every occurrence of `pattern` in `host`, ordered by ascending host ids
/// (pattern boxes taken in ascending id order).
pub fn find_matches(pattern: &Diagram, host: &Diagram) -> Vec<Match> {
    if check_pattern(pattern).is_err() {
        return Vec::new();
    }
    let order: Vec<&BoxId> = pattern.boxes.keys().collect();
    let mut found = Vec::new();
    let mut map = BTreeMap::new();
    search(pattern, host, &order, &mut map, &mut found);
    found
}

fn search<'p>(
    pattern: &'p Diagram,
    host: &Diagram,
    order: &[&'p BoxId],
    map: &mut BTreeMap<&'p BoxId, BoxId>,
    found: &mut Vec<Match>,
) {
    if map.len() == order.len() {
        if let Some(m) = complete_match(pattern, host, map) {
            found.push(m);
        }
        return;
    }
    let pb = order[map.len()];
    let sig = &pattern.boxes[pb];
    let used: BTreeSet<&BoxId> = map.values().collect();
    let candidates: Vec<BoxId> =
        host.boxes.iter().filter(|(h, s)| *s == sig && !used.contains(h)).map(|(h, _)| h.clone()).collect();
    for hb in candidates {
        map.insert(pb, hb);
        if partial_consistent(pattern, host, map) {
            search(pattern, host, order, map, found);
        }
        map.remove(pb);
    }
}

/// Internal wiring agrees among the boxes mapped so far.
fn partial_consistent(pattern: &Diagram, host: &Diagram, map: &BTreeMap<&BoxId, BoxId>) -> bool {
    let inverse: BTreeMap<&BoxId, &BoxId> = map.iter().map(|(p, h)| (h, *p)).collect();
    for (pb, hb) in map {
        let sig = &pattern.boxes[*pb];
        for j in 0..sig.inputs.len() {
            let ps = pattern.source_of(&Target::Port((*pb).clone(), j));
            let hs = host.source_of(&Target::Port(hb.clone(), j));
            match (ps, hs) {
                (Some(Source::Port(p2, k)), Some(hs)) => {
                    if let Some(h2) = map.get(p2) {
                        if hs != &Source::Port(h2.clone(), *k) {
                            return false;
                        }
                    }
                }
                (Some(Source::Boundary(_)), Some(Source::Port(h2, _))) => {
                    if inverse.contains_key(h2) {
                        return false;
                    }
                }
                (Some(_), Some(_)) => {}
                _ => return false,
            }
            if let Some(Source::Port(h2, k)) = hs {
                if let Some(p2) = inverse.get(h2) {
                    if ps != Some(&Source::Port((*p2).clone(), *k)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn complete_match(pattern: &Diagram, host: &Diagram, map: &BTreeMap<&BoxId, BoxId>) -> Option<Match> {
    if !partial_consistent(pattern, host, map) {
        return None;
    }
    let image: BTreeSet<&BoxId> = map.values().collect();
    let inverse: BTreeMap<&BoxId, &BoxId> = map.iter().map(|(p, h)| (h, *p)).collect();

    // Boundary inputs: all pattern consumers see one host source, from outside.
    let mut input_sources = Vec::with_capacity(pattern.inputs.len());
    for i in 0..pattern.inputs.len() {
        let mut src: Option<&Source> = None;
        for t in pattern.consumers(&Source::Boundary(i)) {
            let Target::Port(pb, j) = t else { return None };
            let hs = host.source_of(&Target::Port(map[pb].clone(), *j))?;
            if let Source::Port(h, _) = hs {
                if image.contains(h) {
                    return None;
                }
            }
            match src {
                None => src = Some(hs),
                Some(prev) if prev != hs => return None,
                _ => {}
            }
        }
        input_sources.push(src?.clone());
    }

    // Host consumers outside the image must read an exposed port.
    let exposed: Vec<&Source> =
        (0..pattern.outputs.len()).map(|k| pattern.source_of(&Target::Boundary(k))).collect::<Option<_>>()?;
    let mut output_targets = vec![Vec::new(); pattern.outputs.len()];
    for w in &host.wires {
        let Source::Port(h, k) = &w.source else { continue };
        let Some(pb) = inverse.get(h) else { continue };
        let outside = match &w.target {
            Target::Boundary(_) => true,
            Target::Port(t, _) => !image.contains(t),
        };
        if !outside {
            continue;
        }
        let ps = Source::Port((*pb).clone(), *k);
        let slot = exposed.iter().position(|e| **e == ps)?;
        output_targets[slot].push(w.target.clone());
    }

    // Effect order restricted to the image equals the pattern's.
    let restricted: Vec<&BoxId> = host.effect_order.iter().filter(|b| image.contains(b)).collect();
    let expected: Vec<&BoxId> = pattern.effect_order.iter().map(|p| &map[p]).collect();
    if restricted != expected {
        return None;
    }

    Some(Match { box_map: map.iter().map(|(p, h)| ((*p).clone(), h.clone())).collect(), input_sources, output_targets })
}

/// Collapsing the image of `m` creates no cycle: no outside box lies on a
/// path (data wires and effect order combined) leaving and re-entering the
/// image.
pub fn mergeable(host: &Diagram, m: &Match) -> bool {
    let g = host.combined_graph();
    let image = m.image();
    let mut seen: BTreeSet<&BoxId> = BTreeSet::new();
    let mut queue: VecDeque<&BoxId> = VecDeque::new();
    for x in &image {
        for y in g.get(*x).into_iter().flatten() {
            if !image.contains(y) && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    while let Some(y) = queue.pop_front() {
        for z in g.get(y).into_iter().flatten() {
            if image.contains(z) {
                return false;
            }
            if seen.insert(z) {
                queue.push_back(z);
            }
        }
    }
    true
}

fn slug(label: &str) -> String {
    let s: String =
        label.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
    if s.is_empty() {
        "merged".to_string()
    } else {
        s
    }
}

/// Replace the image of `m` by one fresh box of signature `merged`.
pub fn merge_at(pattern: &Diagram, merged: &Signature, host: &Diagram, m: &Match) -> Result<Diagram, TransformError> {
    let image = m.image();
    let inverse: BTreeMap<&BoxId, &BoxId> = m.box_map.iter().map(|(p, h)| (h, p)).collect();
    let exposed: Vec<Source> = (0..pattern.outputs.len())
        .map(|k| pattern.source_of(&Target::Boundary(k)).cloned().expect("checked pattern"))
        .collect();

    let mut out = host.clone();
    out.boxes.retain(|b, _| !image.contains(b));
    let new_id = out.fresh_id(&slug(&merged.label));
    out.boxes.insert(new_id.clone(), merged.clone());

    let mut wires = Vec::with_capacity(host.wires.len());
    for w in &host.wires {
        if matches!(&w.target, Target::Port(t, _) if image.contains(t)) {
            continue;
        }
        match &w.source {
            Source::Port(h, k) if image.contains(h) => {
                let ps = Source::Port(inverse[h].clone(), *k);
                let slot = exposed.iter().position(|e| *e == ps).expect("exposed by match");
                wires.push(Wire::new(Source::Port(new_id.clone(), slot), w.target.clone()));
            }
            _ => wires.push(w.clone()),
        }
    }
    for (i, s) in m.input_sources.iter().enumerate() {
        wires.push(Wire::new(s.clone(), Target::Port(new_id.clone(), i)));
    }
    out.wires = wires;

    let first = host.effect_order.iter().position(|b| image.contains(b));
    let kept: Vec<BoxId> = host.effect_order.iter().filter(|b| !image.contains(b)).cloned().collect();
    out.effect_order = kept;
    if merged.effectful {
        let pos = first.ok_or_else(|| TransformError::BoundaryMismatch {
            expected: Box::new(merged.clone()),
            found: Box::new(pattern.boundary()),
        })?;
        let at = host.effect_order[..pos].iter().filter(|b| !image.contains(b)).count();
        out.effect_order.insert(at, new_id);
    }
    invalid(&out)?;
    Ok(out)
}

/// Merge every mergeable occurrence of `pattern` in `host` (one result per
/// occurrence, in match order).
pub fn merge(pattern: &Diagram, merged: &Signature, host: &Diagram) -> Result<Vec<Diagram>, TransformError> {
    interface_check(merged, &pattern.boundary(), false)?;
    check_pattern(pattern)?;
    find_matches(pattern, host)
        .iter()
        .filter(|m| mergeable(host, m))
        .map(|m| merge_at(pattern, merged, host, m))
        .collect()
}
