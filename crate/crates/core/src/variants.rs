//! Intent-preserving data-flow variants: alternatives zoom into an idiom,
//! merge rules zoom back out, and whatever is left without `apply`
//! connectors is a variant.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagram::{dedup_isomorphic, isomorphic, Diagram, IdiomKind, Signature, Violation};
use crate::rng::stage_rng;
use crate::transform::{check_pattern, find_matches, merge_at, mergeable, substitute, TransformError};

/// A finer-grained diagram that may replace every box of `base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternativeImplementation {
    pub base: Signature,
    pub body: Diagram,
}

/// A pattern (usually holding an `apply` box) that collapses into one box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeRule {
    pub name: String,
    pub pattern: Diagram,
    pub result: Signature,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub alternatives: Vec<AlternativeImplementation>,
    pub merge_rules: Vec<MergeRule>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeStrategy {
    /// First applicable rule, first match, until nothing applies.
    Deterministic,
    /// Every fixpoint reachable through any sequence of rule/match choices.
    All,
}

#[derive(Debug, Error)]
pub enum VariantError {
    #[error("input diagram is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInput(Vec<Violation>),
    #[error("input diagram contains apply or nonterminal boxes")]
    NotAnImplementation,
    #[error("rule `{name}` is malformed: {reason}")]
    Rule { name: String, reason: String },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("merge step budget of {0} exceeded")]
    StepBudget(usize),
}

impl AlternativeImplementation {
    pub fn validate(&self) -> Result<(), VariantError> {
        let err = |reason: String| VariantError::Rule { name: format!("alt {}", self.base.label), reason };
        let b = self.body.boundary();
        if !b.same_interface(&self.base) || b.effectful != self.base.effectful {
            return Err(err(format!("body interface {b} differs from {}", self.base)));
        }
        if self.body.is_pattern() {
            return Err(err("body contains nonterminal boxes".into()));
        }
        let v = self.body.validate();
        if !v.is_ok() {
            return Err(err(v.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")));
        }
        Ok(())
    }
}

impl MergeRule {
    pub fn validate(&self) -> Result<(), VariantError> {
        let err = |reason: String| VariantError::Rule { name: self.name.clone(), reason };
        let b = self.pattern.boundary();
        if !b.same_interface(&self.result) {
            return Err(err(format!("pattern interface {b} differs from {}", self.result)));
        }
        if b.effectful != self.result.effectful {
            return Err(err("result is effectful iff the pattern contains an effectful box".into()));
        }
        if self.pattern.box_count() < 2 {
            return Err(err("a merge pattern needs at least two boxes".into()));
        }
        check_pattern(&self.pattern).map_err(|e| err(e.to_string()))
    }
}

impl RuleSet {
    pub fn validate(&self) -> Result<(), VariantError> {
        self.alternatives.iter().try_for_each(AlternativeImplementation::validate)?;
        self.merge_rules.iter().try_for_each(MergeRule::validate)
    }

    pub fn extend(&mut self, other: RuleSet) {
        self.alternatives.extend(other.alternatives);
        self.merge_rules.extend(other.merge_rules);
    }

    fn alternatives_for<'a>(&'a self, sig: &'a Signature) -> impl Iterator<Item = &'a AlternativeImplementation> + 'a {
        self.alternatives.iter().filter(move |a| &a.base == sig)
    }
}

fn step_budget(d: &Diagram) -> usize {
    10 * d.box_count().max(1)
}

/// All (rule, merged diagram) successors of `d`.
fn merge_successors(d: &Diagram, rules: &[MergeRule]) -> Result<Vec<Diagram>, VariantError> {
    let mut out = Vec::new();
    for rule in rules {
        for m in find_matches(&rule.pattern, d) {
            if mergeable(d, &m) {
                let next = merge_at(&rule.pattern, &rule.result, d, &m)?;
                debug_assert!(next.box_count() < d.box_count());
                out.push(next);
            }
        }
    }
    Ok(out)
}

fn first_merge(d: &Diagram, rules: &[MergeRule]) -> Result<Option<Diagram>, VariantError> {
    for rule in rules {
        if let Some(m) = find_matches(&rule.pattern, d).into_iter().find(|m| mergeable(d, m)) {
            return Ok(Some(merge_at(&rule.pattern, &rule.result, d, &m)?));
        }
    }
    Ok(None)
}

/// Apply merge rules until none applies.
pub fn apply_merge_fixpoint(
    d: &Diagram,
    rules: &[MergeRule],
    strategy: MergeStrategy,
) -> Result<Vec<Diagram>, VariantError> {
    let budget = step_budget(d);
    match strategy {
        MergeStrategy::Deterministic => {
            let mut cur = d.clone();
            let mut steps = 0;
            while let Some(next) = first_merge(&cur, rules)? {
                assert!(next.box_count() < cur.box_count(), "merge must shrink the diagram");
                steps += 1;
                if steps > budget {
                    return Err(VariantError::StepBudget(budget));
                }
                cur = next;
            }
            Ok(vec![cur])
        }
        MergeStrategy::All => {
            let mut fixpoints: Vec<Diagram> = Vec::new();
            let mut seen: Vec<Diagram> = vec![d.clone()];
            let mut queue: VecDeque<(Diagram, usize)> = VecDeque::from([(d.clone(), 0)]);
            while let Some((cur, depth)) = queue.pop_front() {
                let succs = merge_successors(&cur, rules)?;
                if succs.is_empty() {
                    if !fixpoints.iter().any(|f| isomorphic(f, &cur)) {
                        fixpoints.push(cur);
                    }
                    continue;
                }
                if depth + 1 > budget {
                    return Err(VariantError::StepBudget(budget));
                }
                for s in succs {
                    assert!(s.box_count() < cur.box_count(), "merge must shrink the diagram");
                    if !seen.iter().any(|x| isomorphic(x, &s)) {
                        seen.push(s.clone());
                        queue.push_back((s, depth + 1));
                    }
                }
            }
            Ok(fixpoints)
        }
    }
}

fn random_fixpoint(d: &Diagram, rules: &[MergeRule], rng: &mut ChaCha8Rng) -> Result<Diagram, VariantError> {
    let budget = step_budget(d);
    let mut cur = d.clone();
    for _ in 0..=budget {
        let mut succs = merge_successors(&cur, rules)?;
        if succs.is_empty() {
            return Ok(cur);
        }
        let i = rng.gen_range(0..succs.len());
        cur = succs.swap_remove(i);
    }
    Err(VariantError::StepBudget(budget))
}

/// Applies the chosen alternative (index into the box's options, 0 = keep)
/// to every box.
fn apply_assignment(
    impl_: &Diagram,
    options: &[(crate::diagram::BoxId, Vec<&AlternativeImplementation>)],
    choice: &[usize],
) -> Result<Diagram, VariantError> {
    let mut d = impl_.clone();
    for ((id, alts), &c) in options.iter().zip(choice) {
        if c > 0 {
            d = substitute(&d, id, &alts[c - 1].body)?;
        }
    }
    Ok(d)
}

/// Stage one substitutes alternatives, stage two merges to a fixpoint;
/// results without `apply` boxes are the variants. `impl_` itself is
/// always the first result. Results are distinct up to isomorphism.
pub fn explore_variants(
    impl_: &Diagram,
    rules: &RuleSet,
    mode: Mode,
    limit: usize,
) -> Result<Vec<Diagram>, VariantError> {
    let v = impl_.validate();
    if !v.is_ok() {
        return Err(VariantError::InvalidInput(v.violations));
    }
    if !impl_.is_implementation() {
        return Err(VariantError::NotAnImplementation);
    }
    rules.validate()?;
    if limit == 0 {
        return Ok(Vec::new());
    }

    let options: Vec<_> =
        impl_.boxes.iter().map(|(id, sig)| (id.clone(), rules.alternatives_for(sig).collect::<Vec<_>>())).collect();
    let radix: Vec<usize> = options.iter().map(|(_, a)| a.len() + 1).collect();
    let mut results: Vec<Diagram> = vec![impl_.clone()];
    let push = |results: &mut Vec<Diagram>, d: Diagram| {
        if !d.contains_apply()
            && d.boxes.values().all(|s| s.kind == IdiomKind::Idiom)
            && !results.iter().any(|r| isomorphic(r, &d))
        {
            results.push(d);
        }
    };

    match mode {
        Mode::Exhaustive => {
            let mut choice = vec![0usize; radix.len()];
            'outer: loop {
                if choice.iter().any(|&c| c > 0) {
                    let d = apply_assignment(impl_, &options, &choice)?;
                    for f in apply_merge_fixpoint(&d, &rules.merge_rules, MergeStrategy::All)? {
                        push(&mut results, f);
                        if results.len() >= limit {
                            break 'outer;
                        }
                    }
                }
                // Odometer, last box fastest.
                let mut i = radix.len();
                loop {
                    if i == 0 {
                        break 'outer;
                    }
                    i -= 1;
                    choice[i] += 1;
                    if choice[i] < radix[i] {
                        break;
                    }
                    choice[i] = 0;
                }
            }
        }
        Mode::Random { seed } => {
            let mut rng = stage_rng(seed, "variants");
            let attempts = limit.min(256).saturating_mul(8).max(64);
            for _ in 0..attempts {
                if results.len() >= limit {
                    break;
                }
                let choice: Vec<usize> = radix.iter().map(|&r| rng.gen_range(0..r)).collect();
                let d = apply_assignment(impl_, &options, &choice)?;
                let f = random_fixpoint(&d, &rules.merge_rules, &mut rng)?;
                push(&mut results, f);
            }
        }
    }
    results.truncate(limit);
    Ok(dedup_isomorphic(results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{BoxId, Source, Target};

    fn none() -> Vec<&'static str> {
        Vec::new()
    }

    #[test]
    fn no_rules_gives_only_the_input() {
        let mut d = Diagram::new("d", none(), none());
        d.add_box("a", Signature::new("read", none(), ["Int"], true)).unwrap();
        d.add_box("p", Signature::new("print", ["Int"], none(), true)).unwrap();
        d.wire("a", 0, "p", 0).set_effect_order(["a", "p"]);
        let out = explore_variants(&d, &RuleSet::default(), Mode::Exhaustive, usize::MAX).unwrap();
        assert_eq!(out, vec![d]);
    }

    fn chain() -> (Diagram, Vec<MergeRule>) {
        // s -> a -> b -> c -> p, rules {a,b} => X and {b,c} => Y.
        let int = ["Int"];
        let mut d = Diagram::new("chain", none(), none());
        d.add_box("s", Signature::new("src", none(), int, false)).unwrap();
        d.add_box("a", Signature::new("a", int, int, false)).unwrap();
        d.add_box("b", Signature::new("b", int, int, false).with_kind(IdiomKind::Apply)).unwrap();
        d.add_box("c", Signature::new("c", int, int, false)).unwrap();
        d.add_box("p", Signature::new("print", int, none(), true)).unwrap();
        d.wire("s", 0, "a", 0).wire("a", 0, "b", 0).wire("b", 0, "c", 0).wire("c", 0, "p", 0);
        d.set_effect_order(["p"]);
        let pair = |x: &str, y: &str, name: &str| {
            let mut pat = Diagram::new(name, int, int);
            pat.add_box("x", d.boxes[&BoxId::new(x)].clone()).unwrap();
            pat.add_box("y", d.boxes[&BoxId::new(y)].clone()).unwrap();
            pat.connect(Source::Boundary(0), Target::Port("x".into(), 0));
            pat.wire("x", 0, "y", 0);
            pat.connect(Source::Port("y".into(), 0), Target::Boundary(0));
            MergeRule { name: name.into(), pattern: pat, result: Signature::new(name, int, int, false) }
        };
        let rules = vec![pair("a", "b", "X"), pair("b", "c", "Y")];
        (d, rules)
    }

    #[test]
    fn deterministic_fixpoint_takes_first_rule() {
        let (d, rules) = chain();
        let out = apply_merge_fixpoint(&d, &rules, MergeStrategy::Deterministic).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].boxes.values().any(|s| s.label == "X"));
        assert_eq!(out[0].box_count(), 4);
    }

    #[test]
    fn all_strategy_finds_both_fixpoints() {
        let (d, rules) = chain();
        let out = apply_merge_fixpoint(&d, &rules, MergeStrategy::All).unwrap();
        let mut labels: Vec<String> = out
            .iter()
            .map(|f| f.boxes.values().map(|s| s.label.clone()).filter(|l| l == "X" || l == "Y").collect())
            .collect();
        labels.sort();
        assert_eq!(labels, vec!["X".to_string(), "Y".to_string()]);
    }

    #[test]
    fn no_match_is_its_own_fixpoint() {
        let (d, rules) = chain();
        let mut plain = d.clone();
        plain.boxes.get_mut(&BoxId::new("b")).unwrap().label = "other".into();
        for s in [MergeStrategy::Deterministic, MergeStrategy::All] {
            assert_eq!(apply_merge_fixpoint(&plain, &rules, s).unwrap(), vec![plain.clone()]);
        }
    }

    #[test]
    fn single_box_merge_pattern_is_rejected() {
        let (d, _) = chain();
        let mut pat = Diagram::new("one", ["Int"], ["Int"]);
        pat.add_box("x", d.boxes[&BoxId::new("a")].clone()).unwrap();
        pat.connect(Source::Boundary(0), Target::Port("x".into(), 0));
        pat.connect(Source::Port("x".into(), 0), Target::Boundary(0));
        let rule = MergeRule { name: "one".into(), pattern: pat, result: Signature::new("a", ["Int"], ["Int"], false) };
        assert!(matches!(rule.validate(), Err(VariantError::Rule { .. })));
    }
}
