//! Shared helpers for the integration tests: the shipped workspaces, a
//! random diagram generator and an independent acyclicity oracle.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use idiomgen::diagram::{BoxId, Diagram, IdiomKind, Signature, Source, Target, TypeName};
use idiomgen::dsl::Workspace;
use idiomgen::instantiate::{enumerate_artifacts, Artifact, ChoiceMode};
use idiomgen::targets::program::ProgramKind;
use idiomgen::targets::spec::SpecKind;
use idiomgen::transform::Match;
use idiomgen::variants::{explore_variants, Mode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn workspace(name: &str) -> Workspace {
    Workspace::load_path(&manifest_path(&format!("examples/{name}"))).expect("shipped workspace loads")
}

/// The sum workspace with one mutation file added on top.
pub fn mutated_sum(fixture: &Path) -> Workspace {
    let mut files: Vec<PathBuf> = std::fs::read_dir(manifest_path("examples/sum_intent"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "idioms"))
        .collect();
    files.sort();
    files.push(fixture.to_path_buf());
    Workspace::load(&files).expect("mutated workspace loads")
}

pub fn mutation_fixtures() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(manifest_path("tests/fixtures/mutations"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "idioms"))
        .collect();
    v.sort();
    v
}

pub fn variants(ws: &Workspace, intent: &str) -> Vec<Diagram> {
    explore_variants(ws.intent(intent).unwrap(), &ws.rules(), Mode::Exhaustive, usize::MAX).unwrap()
}

pub fn programs(ws: &Workspace, intent: &str) -> Vec<Artifact<ProgramKind>> {
    let lib = ws.library("program").unwrap();
    enumerate_artifacts::<ProgramKind>(&variants(ws, intent), lib, ChoiceMode::Exhaustive, usize::MAX)
        .unwrap()
        .artifacts
}

pub fn specs(ws: &Workspace, intent: &str) -> Vec<Artifact<SpecKind>> {
    let lib = ws.library("spec").unwrap();
    enumerate_artifacts::<SpecKind>(&variants(ws, intent), lib, ChoiceMode::Exhaustive, usize::MAX).unwrap().artifacts
}

// ------------------------------------------------------- random diagrams

/// Box vocabulary for random diagrams: a few labels over a single type, so
/// patterns recur and matches are ambiguous.
pub fn vocabulary() -> Vec<Signature> {
    vec![
        Signature::new("src", Vec::<&str>::new(), ["Int"], true),
        Signature::new("const", Vec::<&str>::new(), ["Int"], false),
        Signature::new("inc", ["Int"], ["Int"], false),
        Signature::new("add", ["Int", "Int"], ["Int"], false),
        Signature::new("dup", ["Int"], ["Int", "Int"], false),
        Signature::new("step", ["Int"], ["Int"], true),
        Signature::new("emit", ["Int"], Vec::<&str>::new(), true),
    ]
}

/// A random valid implementation `() -> ()` with `1..=max_boxes` boxes:
/// each input is fed by an output of an earlier box, and effects follow a
/// random topological order of the data graph.
pub fn random_diagram(rng: &mut ChaCha8Rng, max_boxes: usize) -> Diagram {
    let vocab = vocabulary();
    let n = rng.gen_range(1..=max_boxes);
    let mut d = Diagram::new("random", Vec::<&str>::new(), Vec::<&str>::new());
    let mut outputs: Vec<(String, usize)> = Vec::new();
    let mut ids = Vec::new();
    for i in 0..n {
        let usable: Vec<&Signature> = vocab.iter().filter(|s| s.inputs.is_empty() || !outputs.is_empty()).collect();
        let sig = (*usable.choose(rng).unwrap()).clone();
        let id = format!("b{i}");
        for j in 0..sig.inputs.len() {
            let (from, k) = outputs.choose(rng).unwrap().clone();
            d.wire(&from, k, &id, j);
        }
        for k in 0..sig.outputs.len() {
            outputs.push((id.clone(), k));
        }
        d.add_box(id.as_str(), sig).unwrap();
        ids.push(id);
    }
    // Random topological order: repeatedly pick any box whose data
    // predecessors are placed.
    let preds = data_preds(&d);
    let mut placed: Vec<BoxId> = Vec::new();
    while placed.len() < n {
        let ready: Vec<&BoxId> =
            d.boxes.keys().filter(|b| !placed.contains(b) && preds[*b].iter().all(|p| placed.contains(p))).collect();
        placed.push((*ready.choose(rng).unwrap()).clone());
    }
    let effects: Vec<BoxId> = placed.into_iter().filter(|b| d.boxes[b].effectful).collect();
    d.set_effect_order(effects);
    assert!(d.validate().is_ok(), "generator produced an invalid diagram: {:?}", d.validate());
    d
}

fn data_preds(d: &Diagram) -> BTreeMap<BoxId, BTreeSet<BoxId>> {
    let mut p: BTreeMap<BoxId, BTreeSet<BoxId>> = d.boxes.keys().map(|b| (b.clone(), BTreeSet::new())).collect();
    for w in &d.wires {
        if let (Source::Port(a, _), Target::Port(b, _)) = (&w.source, &w.target) {
            p.get_mut(b).unwrap().insert(a.clone());
        }
    }
    p
}

/// The sub-diagram of `host` induced by `subset`, with one boundary input
/// per distinct outside source and one boundary output per inside port
/// consumed outside. Returns the pattern and the signature of the box it
/// would merge into.
pub fn induced_pattern(host: &Diagram, subset: &BTreeSet<BoxId>) -> (Diagram, Signature) {
    let mut in_sources: Vec<Source> = Vec::new();
    let mut out_ports: Vec<(BoxId, usize)> = Vec::new();
    for w in &host.wires {
        let inside_target = matches!(&w.target, Target::Port(b, _) if subset.contains(b));
        let inside_source = matches!(&w.source, Source::Port(b, _) if subset.contains(b));
        if inside_target && !inside_source && !in_sources.contains(&w.source) {
            in_sources.push(w.source.clone());
        }
        if inside_source && !inside_target {
            if let Source::Port(b, k) = &w.source {
                if !out_ports.contains(&(b.clone(), *k)) {
                    out_ports.push((b.clone(), *k));
                }
            }
        }
    }
    let ty = |s: &Source| match s {
        Source::Port(b, k) => host.boxes[b].outputs[*k].clone(),
        Source::Boundary(i) => host.inputs[*i].clone(),
    };
    let ins: Vec<_> = in_sources.iter().map(ty).collect();
    let outs: Vec<_> = out_ports.iter().map(|(b, k)| host.boxes[b].outputs[*k].clone()).collect();
    let mut p = Diagram { name: "pattern".into(), inputs: ins.clone(), outputs: outs.clone(), ..Diagram::default() };
    for b in subset {
        p.add_box(b.clone(), host.boxes[b].clone()).unwrap();
    }
    for w in &host.wires {
        if let Target::Port(tb, j) = &w.target {
            if !subset.contains(tb) {
                continue;
            }
            let src = match &w.source {
                Source::Port(sb, k) if subset.contains(sb) => Source::Port(sb.clone(), *k),
                s => Source::Boundary(in_sources.iter().position(|x| x == s).unwrap()),
            };
            p.connect(src, Target::Port(tb.clone(), *j));
        }
    }
    for (i, (b, k)) in out_ports.iter().enumerate() {
        p.connect(Source::Port(b.clone(), *k), Target::Boundary(i));
    }
    let eff: Vec<String> =
        host.effect_order.iter().filter(|b| subset.contains(*b)).map(|b| b.as_str().to_string()).collect();
    let effectful = !eff.is_empty();
    p.set_effect_order(eff);
    let sig = Signature { label: "merged".into(), inputs: ins, outputs: outs, effectful, kind: IdiomKind::Idiom };
    (p, sig)
}

/// Independent oracle: collapsing the image of `m` is legal iff the
/// quotient of the combined graph (data wires plus consecutive effects)
/// by the image is acyclic.
pub fn quotient_is_acyclic(host: &Diagram, m: &Match) -> bool {
    let image: BTreeSet<&BoxId> = m.box_map.values().collect();
    let node = |b: &BoxId| if image.contains(b) { "<merged>".to_string() } else { b.as_str().to_string() };
    let mut edges: BTreeSet<(String, String)> = BTreeSet::new();
    for w in &host.wires {
        if let (Source::Port(a, _), Target::Port(b, _)) = (&w.source, &w.target) {
            edges.insert((node(a), node(b)));
        }
    }
    for pair in host.effect_order.windows(2) {
        edges.insert((node(&pair[0]), node(&pair[1])));
    }
    edges.retain(|(a, b)| a != b);
    let mut nodes: BTreeSet<String> = host.boxes.keys().map(node).collect();
    // Kahn's algorithm.
    let mut indeg: BTreeMap<&String, usize> = nodes.iter().map(|n| (n, 0)).collect();
    for (_, b) in &edges {
        *indeg.get_mut(b).unwrap() += 1;
    }
    let mut ready: Vec<String> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| (*n).clone()).collect();
    let mut removed = 0;
    let mut indeg: BTreeMap<String, usize> = indeg.into_iter().map(|(n, d)| (n.clone(), d)).collect();
    while let Some(n) = ready.pop() {
        removed += 1;
        for (a, b) in &edges {
            if *a == n {
                let d = indeg.get_mut(b).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(b.clone());
                }
            }
        }
    }
    let total = nodes.len();
    nodes.clear();
    removed == total
}

/// A replacement for box `target` of `host` with the same interface: a
/// relabelled core box, optionally wrapped by pure `pre`/`post` boxes on
/// each input and output.
pub fn random_replacement(rng: &mut ChaCha8Rng, host: &Diagram, target: &BoxId) -> Diagram {
    let sig = &host.boxes[target];
    let mut r = Diagram::with_interface("replacement", sig);
    let core = Signature { label: format!("core {}", sig.label), ..sig.clone() };
    let wrap = |label: &str, t: &TypeName| Signature {
        label: label.into(),
        inputs: vec![t.clone()],
        outputs: vec![t.clone()],
        effectful: false,
        kind: IdiomKind::Idiom,
    };
    r.add_box("core", core).unwrap();
    for (j, t) in sig.inputs.iter().enumerate() {
        if rng.gen_bool(0.5) {
            let id = format!("pre{j}");
            r.add_box(id.as_str(), wrap("pre", t)).unwrap();
            r.connect(Source::Boundary(j), Target::Port(BoxId::new(id.clone()), 0));
            r.wire(&id, 0, "core", j);
        } else {
            r.connect(Source::Boundary(j), Target::Port(BoxId::new("core"), j));
        }
    }
    for (k, t) in sig.outputs.iter().enumerate() {
        if rng.gen_bool(0.5) {
            let id = format!("post{k}");
            r.add_box(id.as_str(), wrap("post", t)).unwrap();
            r.wire("core", k, &id, 0);
            r.connect(Source::Port(BoxId::new(id), 0), Target::Boundary(k));
        } else {
            r.connect(Source::Port(BoxId::new("core"), k), Target::Boundary(k));
        }
    }
    if sig.effectful {
        r.set_effect_order(["core"]);
    }
    assert!(r.validate().is_ok(), "{:?}", r.validate());
    r
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
