//! Generate every task description for an intent.

use idiomgen::dsl::Workspace;
use idiomgen::instantiate::{enumerate_artifacts, ChoiceMode};
use idiomgen::targets::prose::ProseKind;
use idiomgen::variants::{explore_variants, Mode};

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/sum_intent");
    let ws = Workspace::load_path(&dir).expect("workspace loads");
    let variants = explore_variants(ws.intent("sum").unwrap(), &ws.rules(), Mode::Exhaustive, usize::MAX).unwrap();
    let e =
        enumerate_artifacts::<ProseKind>(&variants, ws.library("prose").unwrap(), ChoiceMode::Exhaustive, usize::MAX)
            .unwrap();
    for a in &e.artifacts {
        print!("{}", a.text);
    }
    for s in &e.skipped {
        println!("(variant {} has no description idioms for {})", s.variant, s.missing.join(", "));
    }
}
