//! Command-line entry points.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::coherence::{check_coherence, CheckOptions, Libraries};
use crate::diagram::Diagram;
use crate::dsl::{render_diagram, Workspace};
use crate::instantiate::{enumerate_artifacts, ArtifactKind, ChoiceMode, IdiomLibrary};
use crate::patterns::{derive, DeriveMode};
use crate::targets::program::ProgramKind;
use crate::targets::prose::ProseKind;
use crate::targets::spec::SpecKind;
use crate::variants::{explore_variants, Mode};

/// Exit code for incoherence and validation failures.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for usage errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "idiomgen",
    version,
    about = "Generate coherent programs, specifications and descriptions from wiring diagrams of idioms"
)]
struct Cli {
    /// Workspace directory (every `.idioms` file in it) or a single file.
    #[arg(long, short = 'w', global = true, default_value = ".")]
    workspace: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Program,
    Spec,
    Prose,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GenMode {
    Exhaustive,
    Random,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write artifacts as numbered files and print how many were written.
    Generate {
        #[arg(long)]
        intent: String,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: GenMode,
        /// Required in random mode.
        #[arg(long)]
        seed: Option<u64>,
        /// Maximum number of artifacts (default: all in exhaustive mode,
        /// 10 in random mode).
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the data-flow variants of an implementation.
    Variants {
        #[arg(long)]
        intent: String,
    },
    /// Derive implementations from a pattern grammar.
    Derive {
        #[arg(long)]
        grammar: String,
        #[arg(long)]
        max_depth: usize,
        /// Random derivation with this seed (exhaustive when absent).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of random derivations.
        #[arg(long, default_value_t = 1)]
        draws: usize,
    },
    /// Print the number of distinct artifacts of a kind.
    Count {
        #[arg(long)]
        intent: String,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Check that all generated artifacts behave alike; exit 0 iff coherent.
    Check {
        #[arg(long)]
        intent: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

/// Run the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> Result<Workspace, Failure> {
    Workspace::load_path(path).map_err(|e| fail(EXIT_FAILURE, e.to_string()))
}

fn intent<'a>(ws: &'a Workspace, name: &str) -> Result<&'a Diagram, Failure> {
    ws.intent(name).ok_or_else(|| {
        let known: Vec<&str> = ws.impls.iter().map(|d| d.name.as_str()).collect();
        fail(EXIT_USAGE, format!("unknown intent `{name}` (known: {})", known.join(", ")))
    })
}

fn variants_of(ws: &Workspace, d: &Diagram) -> Result<Vec<Diagram>, Failure> {
    explore_variants(d, &ws.rules(), Mode::Exhaustive, usize::MAX).map_err(|e| fail(EXIT_FAILURE, e.to_string()))
}

fn library<'a>(ws: &'a Workspace, kind: &str) -> Result<&'a IdiomLibrary, Failure> {
    ws.library(kind).ok_or_else(|| fail(EXIT_FAILURE, format!("the workspace has no {kind} idioms")))
}

/// Rendered artifacts of one kind (text, file extension), warnings.
fn artifacts<K: ArtifactKind>(
    variants: &[Diagram],
    lib: &IdiomLibrary,
    mode: ChoiceMode,
    limit: usize,
) -> Result<(Vec<String>, Vec<String>), Failure> {
    let e = enumerate_artifacts::<K>(variants, lib, mode, limit).map_err(|e| fail(EXIT_FAILURE, e.to_string()))?;
    let warnings = e
        .skipped
        .iter()
        .map(|s| format!("warning: variant {} skipped: no {} idioms for {}", s.variant, K::NAME, s.missing.join(", ")))
        .collect();
    Ok((e.artifacts.into_iter().map(|a| a.text).collect(), warnings))
}

fn by_kind(
    kind: Kind,
    ws: &Workspace,
    variants: &[Diagram],
    mode: ChoiceMode,
    limit: usize,
) -> Result<(Vec<String>, Vec<String>, &'static str), Failure> {
    Ok(match kind {
        Kind::Program => {
            let (a, w) = artifacts::<ProgramKind>(variants, library(ws, ProgramKind::NAME)?, mode, limit)?;
            (a, w, ProgramKind::EXTENSION)
        }
        Kind::Spec => {
            let (a, w) = artifacts::<SpecKind>(variants, library(ws, SpecKind::NAME)?, mode, limit)?;
            (a, w, SpecKind::EXTENSION)
        }
        Kind::Prose => {
            let (a, w) = artifacts::<ProseKind>(variants, library(ws, ProseKind::NAME)?, mode, limit)?;
            (a, w, ProseKind::EXTENSION)
        }
    })
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Program => ProgramKind::NAME,
        Kind::Spec => SpecKind::NAME,
        Kind::Prose => ProseKind::NAME,
    }
}

fn io(e: std::io::Error) -> Failure {
    fail(EXIT_FAILURE, e.to_string())
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let ws = load(&cli.workspace)?;
    match cli.command {
        Command::Generate { intent: name, kind, mode, seed, limit, out: dir } => {
            let (mode, limit) = match (mode, seed) {
                (GenMode::Exhaustive, _) => (ChoiceMode::Exhaustive, limit.unwrap_or(usize::MAX)),
                (GenMode::Random, Some(seed)) => (ChoiceMode::Random { seed }, limit.unwrap_or(10)),
                (GenMode::Random, None) => return Err(fail(EXIT_USAGE, "--mode random needs --seed")),
            };
            let d = intent(&ws, &name)?;
            let variants = variants_of(&ws, d)?;
            let (texts, warnings, ext) = by_kind(kind, &ws, &variants, mode, limit)?;
            for w in warnings {
                writeln!(err, "{w}").map_err(io)?;
            }
            std::fs::create_dir_all(&dir).map_err(io)?;
            for (i, t) in texts.iter().enumerate() {
                std::fs::write(dir.join(format!("{}-{:03}.{ext}", kind_name(kind), i + 1)), t).map_err(io)?;
            }
            writeln!(out, "{}", texts.len()).map_err(io)?;
            Ok(0)
        }
        Command::Variants { intent: name } => {
            let d = intent(&ws, &name)?;
            let variants = variants_of(&ws, d)?;
            writeln!(out, "{} variant(s)", variants.len()).map_err(io)?;
            for (i, v) in variants.iter().enumerate() {
                writeln!(out, "\n// variant {i}").map_err(io)?;
                write!(out, "{}", render_diagram(v)).map_err(io)?;
            }
            Ok(0)
        }
        Command::Derive { grammar, max_depth, seed, draws } => {
            let g = ws.grammar(&grammar).ok_or_else(|| fail(EXIT_USAGE, format!("unknown grammar `{grammar}`")))?;
            let mode = match seed {
                Some(seed) => DeriveMode::Random { seed, draws },
                None => DeriveMode::Exhaustive,
            };
            let r = derive(g, mode, max_depth).map_err(|e| fail(EXIT_FAILURE, e.to_string()))?;
            writeln!(out, "{} implementation(s)", r.diagrams.len()).map_err(io)?;
            if r.unproductive {
                writeln!(err, "warning: no derivation terminates within depth {max_depth}").map_err(io)?;
            }
            for (i, d) in r.diagrams.iter().enumerate() {
                let mut d = d.clone();
                d.name = format!("{}_{i}", g.name);
                writeln!(out).map_err(io)?;
                write!(out, "{}", render_diagram(&d)).map_err(io)?;
            }
            Ok(0)
        }
        Command::Count { intent: name, kind } => {
            let d = intent(&ws, &name)?;
            let variants = variants_of(&ws, d)?;
            let (texts, warnings, _) = by_kind(kind, &ws, &variants, ChoiceMode::Exhaustive, usize::MAX)?;
            for w in warnings {
                writeln!(err, "{w}").map_err(io)?;
            }
            writeln!(out, "{}", texts.len()).map_err(io)?;
            Ok(0)
        }
        Command::Check { intent: name, samples, seed, report } => {
            let d = intent(&ws, &name)?;
            let libs = Libraries {
                program: ws.library(ProgramKind::NAME),
                spec: ws.library(SpecKind::NAME),
                prose: ws.library(ProseKind::NAME),
            };
            let r = check_coherence(d, &ws.rules(), libs, CheckOptions::new(samples, seed))
                .map_err(|e| fail(EXIT_FAILURE, e.to_string()))?;
            write!(out, "{}", r.to_text()).map_err(io)?;
            if let Some(path) = report {
                std::fs::write(path, r.to_json()).map_err(io)?;
            }
            Ok(if r.is_coherent() { 0 } else { EXIT_FAILURE })
        }
    }
}
