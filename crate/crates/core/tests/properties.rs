//! Algebraic and round-trip properties of the artifact kinds, plus
//! invariants of generation over the shipped workspaces.

mod common;

use std::collections::BTreeMap;

use common::*;
use idiomgen::coherence::Sampler;
use idiomgen::diagram::BoxId;
use idiomgen::instantiate::{enumerate_artifacts, instantiate, ArtifactKind, ChoiceMode, HOLE_OPEN};
use idiomgen::targets::program::{parse_program, render_program, run_program, ProgramKind};
use idiomgen::targets::prose::ProseKind;
use idiomgen::targets::spec::{parse_spec, render_spec, run_spec, Action, SpecKind, Term, ValueSet};
use proptest::prelude::*;

// ------------------------------------------------------------ monoid laws

const PROGRAM_FRAGMENTS: [&str; 4] = [
    "n <- readLn",
    "let r = sum xs",
    "print (r + 1)",
    "let\n  go i\n    | i == 0 = pure 0\n    | otherwise = go (i - 1)\nk <- go 3",
];
const SPEC_FRAGMENTS: [&str; 4] = ["[?n:Nat]", "[!n_C + 1]", "({n_C = 0} E /\\ [?x:Int])^L", "{n_C > 2} [!1] /\\ ()"];
const PROSE_FRAGMENTS: [&str; 4] = ["Read a number n.", "Print it.", "Then stop! Or not?", "Repeat n times."];

fn fragment<K: ArtifactKind>(pool: &[&str], picks: &[usize]) -> K::Fragment {
    picks
        .iter()
        .map(|i| K::parse_fragment(pool[i % pool.len()]).expect("pool fragments parse"))
        .fold(K::identity(), K::combine)
}

fn monoid_laws<K: ArtifactKind>(pool: &[&str], a: &[usize], b: &[usize], c: &[usize]) -> Result<(), TestCaseError>
where
    K::Fragment: PartialEq + std::fmt::Debug,
{
    let (fa, fb, fc) = (fragment::<K>(pool, a), fragment::<K>(pool, b), fragment::<K>(pool, c));
    prop_assert_eq!(K::combine(K::identity(), fa.clone()), fa.clone());
    prop_assert_eq!(K::combine(fa.clone(), K::identity()), fa.clone());
    prop_assert_eq!(K::combine(K::combine(fa.clone(), fb.clone()), fc.clone()), K::combine(fa, K::combine(fb, fc)));
    Ok(())
}

fn picks() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..4, 0..4)
}

proptest! {
    #[test]
    fn program_fragments_form_a_monoid(a in picks(), b in picks(), c in picks()) {
        monoid_laws::<ProgramKind>(&PROGRAM_FRAGMENTS, &a, &b, &c)?;
    }

    #[test]
    fn spec_fragments_form_a_monoid(a in picks(), b in picks(), c in picks()) {
        monoid_laws::<SpecKind>(&SPEC_FRAGMENTS, &a, &b, &c)?;
    }

    #[test]
    fn prose_fragments_form_a_monoid(a in picks(), b in picks(), c in picks()) {
        monoid_laws::<ProseKind>(&PROSE_FRAGMENTS, &a, &b, &c)?;
    }
}

// ------------------------------------------------------- spec round trips

fn term() -> impl Strategy<Value = Term> {
    let var = prop::sample::select(vec!["n", "x", "acc"]).prop_map(String::from);
    let leaf =
        prop_oneof![(-20i64..20).prop_map(Term::Int), var.clone().prop_map(Term::Current), var.prop_map(Term::All),];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["sum", "product", "len"]), inner.clone())
                .prop_map(|(f, a)| Term::Call(f.to_string(), vec![a])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Call("filterEq".into(), vec![a, b])),
            (
                prop::sample::select(vec!["+", "-", "*", "++", "=", "!=", "<", "<=", ">", ">=", "&&"]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Term::Bin {
                    op: op.to_string(),
                    lhs: Box::new(l),
                    rhs: Box::new(r)
                }),
            inner.prop_map(|a| Term::Neg(Box::new(a))),
        ]
    })
}

fn action() -> impl Strategy<Value = Action> {
    let leaf = prop_oneof![
        (prop::sample::select(vec!["n", "x"]), any::<bool>()).prop_map(|(v, nat)| Action::Read {
            var: v.to_string(),
            set: if nat { ValueSet::Nat } else { ValueSet::Int }
        }),
        term().prop_map(Action::Write),
        Just(Action::Exit),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        let seq = prop::collection::vec(inner, 0..3);
        prop_oneof![
            seq.clone().prop_map(Action::Loop),
            (term(), seq.clone(), seq).prop_map(|(cond, then, else_)| Action::Branch { cond, then, else_ }),
        ]
    })
}

proptest! {
    #[test]
    fn specs_survive_render_and_parse(spec in prop::collection::vec(action(), 0..4)) {
        let text = render_spec(&spec);
        let back = parse_spec(&text).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
        prop_assert_eq!(back, spec, "{}", text);
    }
}

// ------------------------------------------- generated artifact invariants

const WORKSPACES: [(&str, &str); 2] = [("sum_intent", "sum"), ("msum_intent", "msum")];

#[test]
fn generated_programs_survive_render_and_parse() {
    for (ws, intent) in WORKSPACES {
        let w = workspace(ws);
        let spec = specs(&w, intent).remove(0).fragment;
        let stdins = Sampler::for_spec(Some(&spec)).samples(30, 4);
        for a in programs(&w, intent) {
            let p = parse_program(&a.text).unwrap();
            let again = parse_program(&render_program(&p)).unwrap();
            assert_eq!(render_program(&again), a.text);
            for s in &stdins {
                assert_eq!(run_program(&p, s), run_program(&again, s));
            }
        }
    }
}

#[test]
fn generated_specs_survive_render_and_parse() {
    for (ws, intent) in WORKSPACES {
        for a in specs(&workspace(ws), intent) {
            assert_eq!(parse_spec(a.text.trim_end()).unwrap(), a.fragment);
        }
    }
}

#[test]
fn no_generated_artifact_contains_a_hole() {
    for (ws, intent) in WORKSPACES {
        let w = workspace(ws);
        let vs = variants(&w, intent);
        let mut texts: Vec<String> = programs(&w, intent).into_iter().map(|a| a.text).collect();
        texts.extend(specs(&w, intent).into_iter().map(|a| a.text));
        let prose =
            enumerate_artifacts::<ProseKind>(&vs, w.library("prose").unwrap(), ChoiceMode::Exhaustive, usize::MAX)
                .unwrap();
        texts.extend(prose.artifacts.into_iter().map(|a| a.text));
        for t in texts {
            assert!(!t.contains(HOLE_OPEN), "{t}");
        }
    }
}

/// Every admissible box order yields a program with the same behaviour as
/// the canonical one, for every variant and idiom choice.
#[test]
fn box_order_does_not_change_behaviour() {
    for (ws, intent) in WORKSPACES {
        let w = workspace(ws);
        let lib = w.library("program").unwrap();
        let spec = specs(&w, intent).remove(0).fragment;
        let stdins = Sampler::for_spec(Some(&spec)).samples(20, 8);
        let vs = variants(&w, intent);
        for a in programs(&w, intent) {
            let d = &vs[a.variant];
            let orders = d.linearizations(64).unwrap();
            assert!(!orders.is_empty());
            let expected: Vec<_> = stdins.iter().map(|s| run_spec(&spec, s)).collect();
            for order in orders {
                let inst = instantiate::<ProgramKind>(d, lib, &a.choice, &order).unwrap();
                let p = parse_program(&ProgramKind::render(&inst.fragment)).unwrap();
                for (s, e) in stdins.iter().zip(&expected) {
                    let t = run_program(&p, s);
                    assert_eq!(t.outputs, e.outputs, "order {order:?} on {s:?}");
                }
            }
        }
    }
}

#[test]
fn random_choice_draws_stay_inside_the_exhaustive_set() {
    let w = workspace("msum_intent");
    let all: Vec<String> = programs(&w, "msum").into_iter().map(|a| a.text).collect();
    let vs = variants(&w, "msum");
    for seed in 0..20 {
        let drawn =
            enumerate_artifacts::<ProgramKind>(&vs, w.library("program").unwrap(), ChoiceMode::Random { seed }, 5)
                .unwrap();
        assert!(!drawn.artifacts.is_empty());
        for a in drawn.artifacts {
            assert!(all.contains(&a.text));
        }
    }
}

#[test]
fn missing_choices_default_to_the_first_idiom() {
    let w = workspace("msum_intent");
    let d = w.intent("msum").unwrap();
    let lib = w.library("program").unwrap();
    let order = d.canonical_linearization().unwrap();
    let empty = instantiate::<ProgramKind>(d, lib, &BTreeMap::new(), &order).unwrap();
    let zeros: BTreeMap<BoxId, usize> = d.boxes.keys().map(|b| (b.clone(), 0)).collect();
    let explicit = instantiate::<ProgramKind>(d, lib, &zeros, &order).unwrap();
    assert_eq!(ProgramKind::render(&empty.fragment), ProgramKind::render(&explicit.fragment));
}
