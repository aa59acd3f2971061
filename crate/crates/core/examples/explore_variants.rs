//! Enumerate the data-flow variants an implementation admits under its
//! alternative implementations and merge rules.

use idiomgen::dsl::{render_diagram, Workspace};
use idiomgen::variants::{explore_variants, Mode};

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/sum_intent");
    let ws = Workspace::load_path(&dir).expect("workspace loads");
    let variants = explore_variants(ws.intent("sum").unwrap(), &ws.rules(), Mode::Exhaustive, usize::MAX).unwrap();
    for (i, v) in variants.iter().enumerate() {
        println!("// variant {i}\n{}", render_diagram(v));
    }
}
