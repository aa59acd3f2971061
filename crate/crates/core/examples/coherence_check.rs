//! Check that every program and specification generated for an intent
//! behaves the same on sampled inputs.

use idiomgen::coherence::{check_coherence, CheckOptions, Libraries};
use idiomgen::dsl::Workspace;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/msum_intent");
    let ws = Workspace::load_path(&dir).expect("workspace loads");
    let libs = Libraries { program: ws.library("program"), spec: ws.library("spec"), prose: ws.library("prose") };
    let report = check_coherence(ws.intent("msum").unwrap(), &ws.rules(), libs, CheckOptions::new(100, 1)).unwrap();
    print!("{}", report.to_text());
}
