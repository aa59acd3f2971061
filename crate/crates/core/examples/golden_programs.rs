//! Instantiate one implementation with two explicit idiom choices.

use std::collections::BTreeMap;

use idiomgen::diagram::BoxId;
use idiomgen::dsl::Workspace;
use idiomgen::instantiate::{instantiate, ArtifactKind};
use idiomgen::targets::program::ProgramKind;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/msum_intent");
    let ws = Workspace::load_path(&dir).expect("workspace loads");
    let d = ws.intent("msum").unwrap();
    let lib = ws.library("program").unwrap();
    let order = d.canonical_linearization().unwrap();
    for choice in [[("xs", 1), ("res", 0)], [("xs", 0), ("res", 3)]] {
        let choice: BTreeMap<BoxId, usize> = choice.iter().map(|(b, i)| (BoxId::new(*b), *i)).collect();
        let inst = instantiate::<ProgramKind>(d, lib, &choice, &order).unwrap();
        println!("{}", ProgramKind::render(&inst.fragment));
    }
}
