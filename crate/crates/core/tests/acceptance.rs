//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints one PASS/FAIL line; the process fails if any check fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use idiomgen::cli;
use idiomgen::coherence::{check_coherence, CheckOptions, Libraries, Sampler};
use idiomgen::diagram::{isomorphic, BoxId, Diagram, Signature};
use idiomgen::instantiate::{instantiate, normalize, ArtifactKind};
use idiomgen::patterns::{derive, DeriveMode};
use idiomgen::targets::program::{parse_program, run_program, ProgramKind};
use idiomgen::targets::spec::run_spec;
use idiomgen::targets::Outcome;
use idiomgen::transform::{find_matches, merge, mergeable, substitute};
use rand::seq::IteratorRandom;
use rand::Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["idiomgen"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ws_arg(name: &str) -> String {
    manifest_path(&format!("examples/{name}")).display().to_string()
}

fn sum_program_count() -> Result<String, String> {
    let start = Instant::now();
    let ws = ws_arg("sum_intent");
    let (code, out, err) = run_cli(&["--workspace", &ws, "count", "--intent", "sum", "--kind", "program"]);
    let t = within(Duration::from_secs(1), start, "count")?;
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    ensure(out.trim() == "6", || format!("count printed {out:?}"))?;
    let texts: BTreeSet<String> =
        programs(&workspace("sum_intent"), "sum").iter().map(|a| normalize(&a.text)).collect();
    ensure(texts.len() == 6, || format!("{} distinct normalized programs", texts.len()))?;
    Ok(format!("6 pairwise distinct programs in {t:?}"))
}

fn msum_program_count() -> Result<String, String> {
    let start = Instant::now();
    let ws = ws_arg("msum_intent");
    let (code, out, err) = run_cli(&["--workspace", &ws, "count", "--intent", "msum", "--kind", "program"]);
    let t = within(Duration::from_secs(5), start, "count")?;
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    ensure(out.trim() == "20", || format!("count printed {out:?}"))?;
    Ok(format!("20 programs in {t:?}"))
}

const RECURSIVE_READ_LISTING: &str = "\
main = do
  x <- readLn
  y <- readLn
  let
    go i list
      | i == x = pure list
      | otherwise = do
        v <- readLn
        go (i+1) (list ++ [v])
  xs <- go 0 []
  let res = sum (filter (== y) xs ++ xs)
  print res
";

const REPLICATE_LISTING: &str = "\
main = do
  x <- readLn
  y <- readLn
  xs <- replicateM x readLn
  print $ sum (filter (== y) xs ++ xs)
";

fn strip_trailing(s: &str) -> String {
    s.lines().map(str::trim_end).collect::<Vec<_>>().join("\n").trim_end().to_string()
}

fn golden_listings() -> Result<String, String> {
    let ws = workspace("msum_intent");
    let d = ws.intent("msum").unwrap();
    let lib = ws.library("program").unwrap();
    let order = d.canonical_linearization().map_err(|e| e.to_string())?;
    for (choice, expected) in
        [([("xs", 1), ("res", 0)], RECURSIVE_READ_LISTING), ([("xs", 0), ("res", 3)], REPLICATE_LISTING)]
    {
        let choice: BTreeMap<BoxId, usize> = choice.iter().map(|(b, i)| (BoxId::new(*b), *i)).collect();
        let inst = instantiate::<ProgramKind>(d, lib, &choice, &order).map_err(|e| e.to_string())?;
        let text = ProgramKind::render(&inst.fragment);
        ensure(strip_trailing(&text) == strip_trailing(expected), || format!("got:\n{text}\nexpected:\n{expected}"))?;
    }
    Ok("both listings reproduced".into())
}

fn sum_is_coherent() -> Result<String, String> {
    let start = Instant::now();
    let ws = workspace("sum_intent");
    let spec = &specs(&ws, "sum")[0];
    let sampler = Sampler::for_spec(Some(&spec.fragment));
    for stdin in sampler.samples(100, 42) {
        let n = stdin[0];
        ensure((0..=5).contains(&n) && stdin.len() == n as usize + 1, || format!("bad sample shape {stdin:?}"))?;
        ensure(stdin[1..].iter().all(|v| (-10..=10).contains(v)), || format!("value out of range in {stdin:?}"))?;
    }
    let (code, out, err) = run_cli(&[
        "--workspace",
        &ws_arg("sum_intent"),
        "check",
        "--intent",
        "sum",
        "--samples",
        "100",
        "--seed",
        "42",
    ]);
    let t = within(Duration::from_secs(10), start, "check")?;
    ensure(code == 0, || format!("exit {code}:\n{out}{err}"))?;
    ensure(out.contains("verdict: coherent"), || out.clone())?;
    Ok(format!("coherent over 100 samples in {t:?}"))
}

fn known_outputs() -> Result<String, String> {
    for (name, intent, stdin, expected) in
        [("sum_intent", "sum", vec![3, 1, 2, 3], "6"), ("msum_intent", "msum", vec![2, 5, 5, 7], "17")]
    {
        let ws = workspace(name);
        let progs = programs(&ws, intent);
        for a in &progs {
            let p = parse_program(&a.text).map_err(|e| format!("{e}\n{}", a.text))?;
            let t = run_program(&p, &stdin);
            ensure(t.outcome == Outcome::Completed && t.outputs == [expected], || {
                format!("{intent} program printed {:?} ({:?}):\n{}", t.outputs, t.outcome, a.text)
            })?;
        }
        for s in specs(&ws, intent) {
            let t = run_spec(&s.fragment, &stdin);
            ensure(t.outcome == Outcome::Completed && t.outputs == [expected], || {
                format!("{intent} spec gave {:?} ({:?})", t.outputs, t.outcome)
            })?;
        }
    }
    Ok("every program and spec prints 6 and 17".into())
}

fn substitute_merge_round_trips() -> Result<String, String> {
    let mut rng = rng(6);
    for i in 0..200 {
        let host = random_diagram(&mut rng, 8);
        let target = host.boxes.keys().choose(&mut rng).unwrap().clone();
        let r = random_replacement(&mut rng, &host, &target);
        let expanded = substitute(&host, &target, &r).map_err(|e| format!("round trip {i}: {e}"))?;
        let merged = merge(&r, &host.boxes[&target], &expanded).map_err(|e| format!("round trip {i}: {e}"))?;
        ensure(merged.iter().any(|m| isomorphic(m, &host)), || format!("round trip {i}: host not recovered"))?;
    }
    Ok("200 of 200 recovered the host".into())
}

fn mergeable_matches_oracle() -> Result<String, String> {
    let mut rng = rng(7);
    let (mut matches, mut blocked) = (0, 0);
    for i in 0..300 {
        let host = random_diagram(&mut rng, 8);
        let size = rng.gen_range(1..=host.boxes.len().min(3));
        let subset: BTreeSet<BoxId> = host.boxes.keys().cloned().choose_multiple(&mut rng, size).into_iter().collect();
        let (pattern, _) = induced_pattern(&host, &subset);
        let found = find_matches(&pattern, &host);
        ensure(found.iter().any(|m| m.image().into_iter().cloned().collect::<BTreeSet<_>>() == subset), || {
            format!("instance {i}: the pattern does not match its own occurrence")
        })?;
        for m in &found {
            let oracle = quotient_is_acyclic(&host, m);
            ensure(mergeable(&host, m) == oracle, || format!("instance {i}: mergeable disagrees (oracle {oracle})"))?;
            matches += 1;
            blocked += usize::from(!oracle);
        }
    }
    Ok(format!("agreement on {matches} matches ({blocked} cyclic)"))
}

fn sig(label: &str, ins: &[&str], outs: &[&str], effectful: bool) -> Signature {
    Signature::new(label, ins.iter().copied(), outs.iter().copied(), effectful)
}

/// The three expected variants of the sum intent, built by hand.
fn expected_sum_variants() -> Vec<Diagram> {
    let fold = "(Int, Int->Int->Int)";
    let read = sig("read", &[], &["Int"], true);
    let print = sig("print", &["Int"], &[], true);
    let mut base = Diagram::new("sum", Vec::<&str>::new(), Vec::<&str>::new());
    base.add_box("n", read.clone()).unwrap();
    base.add_box("xs", sig("read list", &["Int"], &["[Int]"], true)).unwrap();
    base.add_box("r", sig("sum", &["[Int]"], &["Int"], false)).unwrap();
    base.add_box("p", print.clone()).unwrap();
    base.wire("n", 0, "xs", 0).wire("xs", 0, "r", 0).wire("r", 0, "p", 0);
    base.set_effect_order(["n", "xs", "p"]);

    let mut looped = Diagram::new("sum", Vec::<&str>::new(), Vec::<&str>::new());
    looped.add_box("n", read.clone()).unwrap();
    looped.add_box("f", sig("sum fold", &[], &[fold], false)).unwrap();
    looped.add_box("l", sig("read loop", &["Int", fold], &["Int"], true)).unwrap();
    looped.add_box("p", print).unwrap();
    looped.wire("n", 0, "l", 0).wire("f", 0, "l", 1).wire("l", 0, "p", 0);
    looped.set_effect_order(["n", "l", "p"]);

    let mut cont = Diagram::new("sum", Vec::<&str>::new(), Vec::<&str>::new());
    cont.add_box("n", read).unwrap();
    cont.add_box("f", sig("sum fold", &[], &[fold], false)).unwrap();
    cont.add_box("k", sig("print cont", &[], &["Int->IO()"], false)).unwrap();
    cont.add_box("l", sig("read loop cont", &["Int", fold, "Int->IO()"], &[], true)).unwrap();
    cont.wire("n", 0, "l", 0).wire("f", 0, "l", 1).wire("k", 0, "l", 2);
    cont.set_effect_order(["n", "l"]);
    vec![base, looped, cont]
}

fn sum_variants() -> Result<String, String> {
    let found = variants(&workspace("sum_intent"), "sum");
    let expected = expected_sum_variants();
    ensure(found.len() == expected.len(), || format!("{} variants", found.len()))?;
    for (i, e) in expected.iter().enumerate() {
        ensure(found.iter().any(|f| isomorphic(f, e)), || format!("expected variant {i} missing"))?;
    }
    ensure(isomorphic(&found[0], &expected[0]), || "the base implementation is not first".into())?;
    Ok("base, read loop and read loop with continuation".into())
}

fn grammar_derivation() -> Result<String, String> {
    let ws = workspace("lists_grammar");
    let g = ws.grammar("lists").unwrap();
    let all = derive(g, DeriveMode::Exhaustive, 3).map_err(|e| e.to_string())?.diagrams;
    let sum = workspace("sum_intent").intent("sum").unwrap().clone();
    ensure(all.iter().any(|d| isomorphic(d, &sum)), || "the read-and-sum implementation is not derived".into())?;
    for d in &all {
        ensure(d.validate().is_ok(), || format!("invalid derivation: {:?}", d.validate()))?;
    }
    for seed in 0..1000 {
        let drawn = derive(g, DeriveMode::Random { seed, draws: 1 }, 3).map_err(|e| e.to_string())?.diagrams;
        for d in &drawn {
            ensure(all.iter().any(|a| isomorphic(a, d)), || {
                format!("seed {seed} drew a diagram outside the exhaustive set")
            })?;
        }
    }
    Ok(format!("{} derivations; 1000 random draws inside", all.len()))
}

fn read_dir_bytes(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn determinism() -> Result<String, String> {
    let ws = ws_arg("msum_intent");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for kind in ["program", "spec", "prose"] {
            let out = dir.path().join(kind);
            let o = run_cli(&[
                "--workspace",
                &ws,
                "generate",
                "--intent",
                "msum",
                "--kind",
                kind,
                "--mode",
                "random",
                "--seed",
                "5",
                "--limit",
                "7",
                "--out",
                out.to_str().unwrap(),
            ]);
            outputs.push((o, read_dir_bytes(&out)));
        }
        let report = dir.path().join("report.json");
        let c = run_cli(&[
            "--workspace",
            &ws,
            "check",
            "--intent",
            "msum",
            "--seed",
            "9",
            "--report",
            report.to_str().unwrap(),
        ]);
        runs.push((outputs, c, std::fs::read(&report).map_err(|e| e.to_string())?));
    }
    ensure(runs[0] == runs[1], || "two identical runs differ".into())?;
    Ok("generate and check are byte-identical across runs".into())
}

fn mutations_flagged() -> Result<String, String> {
    let fixtures = mutation_fixtures();
    let mut flagged = 0;
    let mut missed = Vec::new();
    for f in &fixtures {
        let ws = mutated_sum(f);
        let libs = Libraries { program: ws.library("program"), spec: ws.library("spec"), prose: ws.library("prose") };
        let r = check_coherence(ws.intent("sum").unwrap(), &ws.rules(), libs, CheckOptions::new(100, 1))
            .map_err(|e| e.to_string())?;
        if r.is_coherent() {
            missed.push(f.file_stem().unwrap().to_string_lossy().into_owned());
        } else {
            flagged += 1;
        }
    }
    ensure(flagged >= 5, || format!("only {flagged} flagged; missed {missed:?}"))?;
    Ok(format!("{flagged} of {} mutations flagged", fixtures.len()))
}

fn main() {
    let checks: [(&str, Check); 11] = [
        ("sum intent yields 6 distinct programs quickly", sum_program_count),
        ("doubled-occurrence sum yields 20 programs", msum_program_count),
        ("chosen idioms reproduce the two reference listings", golden_listings),
        ("sum intent is coherent over 100 samples", sum_is_coherent),
        ("all programs and specs print the known results", known_outputs),
        ("substitute then merge recovers the host", substitute_merge_round_trips),
        ("mergeable agrees with the quotient acyclicity oracle", mergeable_matches_oracle),
        ("sum intent has exactly the three expected variants", sum_variants),
        ("list grammar derivation is complete and consistent", grammar_derivation),
        ("identical seeds give identical outputs", determinism),
        ("seeded mutations are flagged by the checker", mutations_flagged),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let t = start.elapsed();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{t:.2?}]", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failures, checks.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
