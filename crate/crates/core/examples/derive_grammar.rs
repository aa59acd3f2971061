//! Derive a family of implementations from a grammar of patterns, both
//! exhaustively and by seeded random draws.

use idiomgen::dsl::Workspace;
use idiomgen::patterns::{derive, DeriveMode};

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/lists_grammar");
    let ws = Workspace::load_path(&dir).expect("workspace loads");
    let g = ws.grammar("lists").unwrap();
    for depth in 1..=4 {
        let all = derive(g, DeriveMode::Exhaustive, depth).unwrap();
        println!("max depth {depth}: {} implementations", all.diagrams.len());
    }
    let drawn = derive(g, DeriveMode::Random { seed: 7, draws: 3 }, 3).unwrap();
    for d in drawn.diagrams {
        let labels: Vec<&str> = d.boxes.values().map(|s| s.label.as_str()).collect();
        println!("drawn: {}", labels.join(", "));
    }
}
