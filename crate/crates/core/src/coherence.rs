//! Mechanical coherence checking: every generated program must show the
//! same console behaviour as every other program and as every generated
//! specification, on seeded random inputs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::diagram::Diagram;
use crate::instantiate::{enumerate_artifacts, ChoiceMode, IdiomLibrary, InstantiateError};
use crate::rng::stage_rng;
use crate::targets::program::{run_program, Program, ProgramKind};
use crate::targets::prose::ProseKind;
use crate::targets::spec::{
    self, check_spec, loop_gating_variables, run_spec, run_spec_with, Spec, SpecKind, ValueSet,
};
use crate::targets::trace::Trace;
use crate::variants::{explore_variants, Mode, RuleSet, VariantError};

/// Largest count drawn for a value that bounds a loop.
pub const LOOP_COUNT_MAX: i64 = 5;
/// Largest natural number drawn for other `Nat` reads.
pub const NAT_MAX: i64 = 10;
/// Integers are drawn from `-INT_BOUND..=INT_BOUND`.
pub const INT_BOUND: i64 = 10;

/// Produces seeded input sequences.
#[derive(Clone, Debug)]
pub enum Sampler {
    /// Follow the specification's reads, drawing each value from the set
    /// its read declares.
    SpecGuided(Spec),
    /// `[n, v1, ..., vn]` with `n` in `0..=LOOP_COUNT_MAX`.
    CountThenValues,
}

impl Sampler {
    pub fn for_spec(spec: Option<&Spec>) -> Sampler {
        match spec {
            Some(s) => Sampler::SpecGuided(s.clone()),
            None => Sampler::CountThenValues,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Sampler::SpecGuided(s) => {
                let gating: Vec<String> = loop_gating_variables(s).into_iter().collect();
                format!(
                    "spec-guided: inputs follow the reads of `{}`; values bounding a loop ({}) are drawn from 0..={LOOP_COUNT_MAX}, \
                     other Nat reads from 0..={NAT_MAX}, Int reads from -{INT_BOUND}..={INT_BOUND}",
                    spec::render_spec(s),
                    if gating.is_empty() { "none".to_string() } else { gating.join(", ") }
                )
            }
            Sampler::CountThenValues => format!(
                "count-then-values: [n, v1..vn] with n in 0..={LOOP_COUNT_MAX} and each v in -{INT_BOUND}..={INT_BOUND}"
            ),
        }
    }

    pub fn samples(&self, count: usize, seed: u64) -> Vec<Vec<i64>> {
        let mut rng = stage_rng(seed, "samples");
        (0..count)
            .map(|_| match self {
                Sampler::SpecGuided(s) => {
                    let gating = loop_gating_variables(s);
                    let mut draw = |var: &str, set: ValueSet| -> Option<i64> {
                        Some(match set {
                            ValueSet::Nat if gating.contains(var) => rng.gen_range(0..=LOOP_COUNT_MAX),
                            ValueSet::Nat => rng.gen_range(0..=NAT_MAX),
                            ValueSet::Int => rng.gen_range(-INT_BOUND..=INT_BOUND),
                        })
                    };
                    run_spec_with(s, &mut draw, spec::interp::STEP_BUDGET).inputs
                }
                Sampler::CountThenValues => {
                    let n = rng.gen_range(0..=LOOP_COUNT_MAX);
                    std::iter::once(n).chain((0..n).map(|_| rng.gen_range(-INT_BOUND..=INT_BOUND))).collect()
                }
            })
            .collect()
    }
}

/// Maps a trace to the form that is compared; the default keeps it as is.
pub type Normalizer = fn(&Trace) -> Trace;

pub fn exact(t: &Trace) -> Trace {
    t.clone()
}

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactRecord {
    pub id: String,
    pub kind: String,
    /// Index of the data-flow variant the artifact was generated from.
    pub variant: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub stdin: Vec<i64>,
    pub left: Trace,
    pub right: Trace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One pair check: program/program, program/spec or spec/spec.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub left: String,
    pub right: String,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub intent: String,
    pub sampler: String,
    pub seed: u64,
    pub samples: usize,
    /// Samples every specification accepts.
    pub admissible: usize,
    pub artifacts: Vec<ArtifactRecord>,
    pub checks: Vec<CheckRecord>,
    /// Artifacts without executable semantics.
    pub not_checkable: Vec<String>,
    /// Static problems of individual artifacts (unbound names, bad specs).
    pub static_issues: Vec<String>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn is_coherent(&self) -> bool {
        self.static_issues.is_empty() && self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn violations(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }

    pub fn count(&self, kind: &str) -> usize {
        self.artifacts.iter().filter(|a| a.kind == kind).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "coherence report for `{}`", self.intent);
        let _ = writeln!(s, "sampler: {}", self.sampler);
        let _ = writeln!(s, "seed: {}; samples: {} ({} admissible)", self.seed, self.samples, self.admissible);
        let _ = writeln!(
            s,
            "artifacts: {} program(s), {} spec(s), {} prose",
            self.count("program"),
            self.count("spec"),
            self.count("prose")
        );
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        for id in &self.not_checkable {
            let _ = writeln!(s, "{id}: not checkable");
        }
        for i in &self.static_issues {
            let _ = writeln!(s, "static: {i}");
        }
        let passed = self.checks.iter().filter(|c| c.verdict == Verdict::Pass).count();
        let _ = writeln!(s, "pair checks: {passed} of {} passed", self.checks.len());
        for v in self.violations() {
            let ce = v.counterexample.as_ref().expect("failures carry a counterexample");
            let _ = writeln!(s, "VIOLATION {} vs {} on stdin {:?}", v.left, v.right, ce.stdin);
            let _ = writeln!(s, "  {}: {}", v.left, ce.left);
            let _ = writeln!(s, "  {}: {}", v.right, ce.right);
        }
        let _ = writeln!(s, "verdict: {}", if self.is_coherent() { "coherent" } else { "incoherent" });
        s
    }
}

#[derive(Debug, Error)]
pub enum CoherenceError {
    #[error(transparent)]
    Variants(#[from] VariantError),
    #[error(transparent)]
    Instantiate(#[from] InstantiateError),
    #[error("no program library: nothing to check")]
    NoPrograms,
}

/// Libraries used for coherence checking.
#[derive(Clone, Copy, Debug, Default)]
pub struct Libraries<'a> {
    pub program: Option<&'a IdiomLibrary>,
    pub spec: Option<&'a IdiomLibrary>,
    pub prose: Option<&'a IdiomLibrary>,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub normalizer: Normalizer,
}

impl CheckOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        CheckOptions { samples, seed, normalizer: exact }
    }
}

/// Enumerate every artifact of the intent and check them against each
/// other.
pub fn check_coherence(
    impl_: &Diagram,
    rules: &RuleSet,
    libs: Libraries<'_>,
    opts: CheckOptions,
) -> Result<Report, CoherenceError> {
    let variants = explore_variants(impl_, rules, Mode::Exhaustive, usize::MAX)?;
    let program_lib = libs.program.ok_or(CoherenceError::NoPrograms)?;
    let programs = enumerate_artifacts::<ProgramKind>(&variants, program_lib, ChoiceMode::Exhaustive, usize::MAX)?;
    if let Some(gap) = programs.skipped.first() {
        // Programs are the primary artifact: every variant must render.
        return Err(InstantiateError::CoverageGap { kind: "program".into(), labels: gap.missing.clone() }.into());
    }
    let mut notes = Vec::new();
    let mut records = Vec::new();
    let mut progs = Vec::new();
    for (i, a) in programs.artifacts.iter().enumerate() {
        let id = format!("program#{i}");
        records.push(ArtifactRecord {
            id: id.clone(),
            kind: "program".into(),
            variant: a.variant,
            text: a.text.clone(),
        });
        progs.push((id, Program { stmts: a.fragment.clone() }));
    }
    let mut specs = Vec::new();
    if let Some(lib) = libs.spec {
        let e = enumerate_artifacts::<SpecKind>(&variants, lib, ChoiceMode::Exhaustive, usize::MAX)?;
        for s in &e.skipped {
            notes.push(format!("spec: variant {} skipped (no spec idioms for {})", s.variant, s.missing.join(", ")));
        }
        for (i, a) in e.artifacts.iter().enumerate() {
            let id = format!("spec#{i}");
            records.push(ArtifactRecord {
                id: id.clone(),
                kind: "spec".into(),
                variant: a.variant,
                text: a.text.clone(),
            });
            specs.push((id, a.fragment.clone()));
        }
    }
    let mut not_checkable = Vec::new();
    if let Some(lib) = libs.prose {
        let e = enumerate_artifacts::<ProseKind>(&variants, lib, ChoiceMode::Exhaustive, usize::MAX)?;
        for s in &e.skipped {
            notes.push(format!("prose: variant {} skipped (no prose idioms for {})", s.variant, s.missing.join(", ")));
        }
        for (i, a) in e.artifacts.iter().enumerate() {
            let id = format!("prose#{i}");
            records.push(ArtifactRecord {
                id: id.clone(),
                kind: "prose".into(),
                variant: a.variant,
                text: a.text.clone(),
            });
            not_checkable.push(id);
        }
    }
    let mut report = check_artifacts(&impl_.name, &progs, &specs, opts);
    report.artifacts = records;
    report.not_checkable = not_checkable;
    report.notes = notes;
    Ok(report)
}

/// Pairwise checks over given programs and specifications. Inputs come from
/// the first specification's reads (or the count-then-values fallback).
pub fn check_artifacts(
    intent: &str,
    programs: &[(String, Program)],
    specs: &[(String, Spec)],
    opts: CheckOptions,
) -> Report {
    let sampler = Sampler::for_spec(specs.first().map(|(_, s)| s));
    let samples = sampler.samples(opts.samples, opts.seed);

    let mut static_issues = Vec::new();
    for (id, p) in programs {
        for issue in crate::targets::program::check_scope(p) {
            static_issues.push(format!("{id}: {issue}"));
        }
    }
    for (id, s) in specs {
        for issue in check_spec(s) {
            static_issues.push(format!("{id}: {issue}"));
        }
    }

    // All artifacts in one list: programs first, then specs.
    let ids: Vec<&String> = programs.iter().map(|(id, _)| id).chain(specs.iter().map(|(id, _)| id)).collect();
    let n = ids.len();
    let mut first_failure: Vec<Vec<Option<Counterexample>>> = vec![vec![None; n]; n];
    let mut admissible = 0;
    for stdin in &samples {
        let spec_traces: Vec<Trace> = specs.iter().map(|(_, s)| run_spec(s, stdin)).collect();
        if spec_traces.iter().any(|t| !t.is_admissible()) {
            continue;
        }
        admissible += 1;
        let traces: Vec<Trace> = programs
            .iter()
            .map(|(_, p)| run_program(p, stdin))
            .chain(spec_traces)
            .map(|t| (opts.normalizer)(&t))
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                if first_failure[i][j].is_none() && traces[i] != traces[j] {
                    first_failure[i][j] = Some(Counterexample {
                        stdin: stdin.clone(),
                        left: traces[i].clone(),
                        right: traces[j].clone(),
                    });
                }
            }
        }
    }
    let mut checks = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let ce = first_failure[i][j].take();
            checks.push(CheckRecord {
                left: ids[i].clone(),
                right: ids[j].clone(),
                verdict: if ce.is_some() { Verdict::Fail } else { Verdict::Pass },
                counterexample: ce,
            });
        }
    }
    Report {
        intent: intent.to_string(),
        sampler: sampler.describe(),
        seed: opts.seed,
        samples: samples.len(),
        admissible,
        artifacts: Vec::new(),
        checks,
        not_checkable: Vec::new(),
        static_issues,
        notes: Vec::new(),
    }
}

/// Artifacts involved in at least one violation.
pub fn flagged(report: &Report) -> BTreeSet<&str> {
    report.violations().flat_map(|c| [c.left.as_str(), c.right.as_str()]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::program::parse_program;
    use crate::targets::spec::parse_spec;

    const SUM_SPEC: &str = "[?n:Nat] ({len(x_A) = n_C} E /\\ [?x:Int])^L [!sum(x_A)]";

    #[test]
    fn spec_guided_samples_have_count_then_values_shape() {
        let s = Sampler::for_spec(Some(&parse_spec(SUM_SPEC).unwrap()));
        for stdin in s.samples(200, 3) {
            let n = stdin[0];
            assert!((0..=LOOP_COUNT_MAX).contains(&n));
            assert_eq!(stdin.len() as i64, n + 1);
            assert!(stdin[1..].iter().all(|v| (-INT_BOUND..=INT_BOUND).contains(v)));
        }
        assert_eq!(s.samples(10, 9), s.samples(10, 9));
    }

    #[test]
    fn identical_behaviour_is_coherent() {
        let p = parse_program("main = do\n  n <- readLn\n  xs <- replicateM n readLn\n  print (sum xs)\n").unwrap();
        let s = parse_spec(SUM_SPEC).unwrap();
        let r = check_artifacts("sum", &[("p".into(), p)], &[("s".into(), s)], CheckOptions::new(50, 1));
        assert!(r.is_coherent(), "{}", r.to_text());
        assert_eq!(r.checks.len(), 1);
    }

    #[test]
    fn constant_program_is_caught() {
        let p = parse_program("main = do\n  n <- readLn\n  xs <- replicateM n readLn\n  print 0\n").unwrap();
        let s = parse_spec(SUM_SPEC).unwrap();
        let r = check_artifacts("sum", &[("p".into(), p)], &[("s".into(), s)], CheckOptions::new(50, 1));
        assert!(!r.is_coherent());
        let v = r.violations().next().unwrap();
        let ce = v.counterexample.as_ref().unwrap();
        assert_eq!(ce.left.outputs, vec!["0"]);
        assert_ne!(ce.right.outputs, ce.left.outputs);
    }
}
