//! Grammar-like refinement of abstract patterns into abstract
//! implementations. Nonterminal boxes play the part of CFG nonterminals and
//! refinement rules their productions.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::diagram::{isomorphic, BoxId, Diagram, IdiomKind, Signature};
use crate::rng::stage_rng;
use crate::transform::{substitute, TransformError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementRule {
    pub nonterminal: Signature,
    pub body: Diagram,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternGrammar {
    pub name: String,
    pub start: Diagram,
    pub rules: Vec<RefinementRule>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeriveMode {
    Exhaustive,
    /// `draws` independent random derivations.
    Random {
        seed: u64,
        draws: usize,
    },
}

/// Retries per random draw before giving up.
pub const RETRY_BUDGET: usize = 1000;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("nonterminal `{0}` has no refinement rule")]
    MissingRule(String),
    #[error("refinement of `{label}` is malformed: {reason}")]
    BadRule { label: String, reason: String },
    #[error("no derivation within depth {max_depth} after {RETRY_BUDGET} retries")]
    RetryBudgetExhausted { max_depth: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub diagrams: Vec<Diagram>,
    /// Exhaustive mode found no terminating derivation within the depth.
    pub unproductive: bool,
}

impl PatternGrammar {
    pub fn validate(&self) -> Result<(), GrammarError> {
        let mut diagrams = vec![&self.start];
        diagrams.extend(self.rules.iter().map(|r| &r.body));
        for d in diagrams {
            for sig in d.boxes.values().filter(|s| s.kind == IdiomKind::Nonterminal) {
                if !self.rules.iter().any(|r| r.nonterminal == *sig) {
                    return Err(GrammarError::MissingRule(sig.label.clone()));
                }
            }
        }
        for r in &self.rules {
            let bad = |reason: String| GrammarError::BadRule { label: r.nonterminal.label.clone(), reason };
            if r.nonterminal.kind != IdiomKind::Nonterminal {
                return Err(bad("only nonterminals can be refined".into()));
            }
            let b = r.body.boundary();
            if !b.same_interface(&r.nonterminal) || (b.effectful && !r.nonterminal.effectful) {
                return Err(bad(format!("body interface {b} does not fit {}", r.nonterminal)));
            }
            if r.body.contains_apply() {
                return Err(bad("refinement bodies may not contain apply boxes".into()));
            }
            let v = r.body.validate();
            if !v.is_ok() {
                return Err(bad(v.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")));
            }
        }
        Ok(())
    }

    fn rules_for<'a>(&'a self, sig: &'a Signature) -> impl Iterator<Item = &'a RefinementRule> + 'a {
        self.rules.iter().filter(move |r| &r.nonterminal == sig)
    }
}

#[derive(Clone)]
struct State {
    diagram: Diagram,
    depth: BTreeMap<BoxId, usize>,
}

impl State {
    fn start(d: &Diagram) -> Self {
        State { diagram: d.clone(), depth: d.boxes.keys().map(|b| (b.clone(), 0)).collect() }
    }

    /// Lowest-id nonterminal box.
    fn leftmost(&self) -> Option<(BoxId, Signature)> {
        self.diagram.boxes.iter().find(|(_, s)| s.kind == IdiomKind::Nonterminal).map(|(b, s)| (b.clone(), s.clone()))
    }

    /// Refine `target` by `rule`; `None` if the result is too deep.
    fn refine(&self, target: &BoxId, rule: &RefinementRule, max_depth: usize) -> Result<Option<State>, GrammarError> {
        let d = self.depth[target] + 1;
        if d > max_depth {
            return Ok(None);
        }
        let diagram = substitute(&self.diagram, target, &rule.body)?;
        let mut depth = self.depth.clone();
        depth.remove(target);
        for b in diagram.boxes.keys() {
            depth.entry(b.clone()).or_insert(d);
        }
        Ok(Some(State { diagram, depth }))
    }
}

/// Refine nonterminals (leftmost first) until only idioms remain. Substitution
/// nesting deeper than `max_depth` is pruned.
pub fn derive(g: &PatternGrammar, mode: DeriveMode, max_depth: usize) -> Result<Derivation, GrammarError> {
    g.validate()?;
    match mode {
        DeriveMode::Exhaustive => {
            let mut found: Vec<Diagram> = Vec::new();
            let mut stack = vec![State::start(&g.start)];
            while let Some(s) = stack.pop() {
                match s.leftmost() {
                    None => {
                        if !found.iter().any(|f| isomorphic(f, &s.diagram)) {
                            found.push(s.diagram);
                        }
                    }
                    Some((id, sig)) => {
                        let mut next = Vec::new();
                        for rule in g.rules_for(&sig) {
                            if let Some(n) = s.refine(&id, rule, max_depth)? {
                                next.push(n);
                            }
                        }
                        // Reverse so rule order is explored first-to-last.
                        stack.extend(next.into_iter().rev());
                    }
                }
            }
            let unproductive = found.is_empty();
            Ok(Derivation { diagrams: found, unproductive })
        }
        DeriveMode::Random { seed, draws } => {
            let mut rng = stage_rng(seed, "derive");
            let mut out = Vec::with_capacity(draws);
            for _ in 0..draws {
                out.push(random_draw(g, max_depth, &mut rng)?);
            }
            Ok(Derivation { diagrams: out, unproductive: false })
        }
    }
}

fn random_draw(g: &PatternGrammar, max_depth: usize, rng: &mut impl Rng) -> Result<Diagram, GrammarError> {
    'retry: for _ in 0..RETRY_BUDGET {
        let mut s = State::start(&g.start);
        while let Some((id, sig)) = s.leftmost() {
            let rules: Vec<_> = g.rules_for(&sig).collect();
            let rule = rules[rng.gen_range(0..rules.len())];
            match s.refine(&id, rule, max_depth)? {
                Some(n) => s = n,
                None => continue 'retry,
            }
        }
        return Ok(s.diagram);
    }
    Err(GrammarError::RetryBudgetExhausted { max_depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{Source, Target};

    fn none() -> Vec<&'static str> {
        Vec::new()
    }

    fn value_nt() -> Signature {
        Signature::new("provide value", none(), ["Int"], true).with_kind(IdiomKind::Nonterminal)
    }

    fn grammar() -> PatternGrammar {
        let mut start = Diagram::new("start", none(), none());
        start.add_box("v", value_nt()).unwrap();
        start.add_box("p", Signature::new("print", ["Int"], none(), true)).unwrap();
        start.wire("v", 0, "p", 0).set_effect_order(["v", "p"]);
        let leaf = |label: &str, effect: bool| {
            let mut body = Diagram::new(label, none(), ["Int"]);
            body.add_box("x", Signature::new(label, none(), ["Int"], effect)).unwrap();
            body.connect(Source::Port("x".into(), 0), Target::Boundary(0));
            if effect {
                body.set_effect_order(["x"]);
            }
            RefinementRule { nonterminal: value_nt(), body }
        };
        PatternGrammar { name: "g".into(), start, rules: vec![leaf("read", true), leaf("constant", false)] }
    }

    #[test]
    fn two_rules_give_two_results() {
        let d = derive(&grammar(), DeriveMode::Exhaustive, 1).unwrap();
        assert_eq!(d.diagrams.len(), 2);
        assert!(!d.unproductive);
        for x in &d.diagrams {
            assert!(x.validate().is_ok());
            assert!(x.is_implementation());
        }
        // The constant refinement drops the effect slot.
        assert!(d.diagrams.iter().any(|x| x.effect_order.len() == 1));
    }

    #[test]
    fn depth_zero_is_unproductive() {
        let d = derive(&grammar(), DeriveMode::Exhaustive, 0).unwrap();
        assert!(d.unproductive);
        assert!(d.diagrams.is_empty());
        let err = derive(&grammar(), DeriveMode::Random { seed: 1, draws: 1 }, 0).unwrap_err();
        assert!(matches!(err, GrammarError::RetryBudgetExhausted { .. }));
    }

    #[test]
    fn start_without_nonterminals_is_its_own_result() {
        let mut g = grammar();
        g.start.boxes.get_mut(&BoxId::new("v")).unwrap().kind = IdiomKind::Idiom;
        let d = derive(&g, DeriveMode::Exhaustive, 3).unwrap();
        assert_eq!(d.diagrams, vec![g.start.clone()]);
    }

    #[test]
    fn missing_rule_is_reported() {
        let mut g = grammar();
        g.rules.clear();
        assert!(matches!(derive(&g, DeriveMode::Exhaustive, 2), Err(GrammarError::MissingRule(_))));
    }
}
