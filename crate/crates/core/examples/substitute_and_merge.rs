//! Replace a box by a finer-grained diagram, then merge the result back.

use idiomgen::diagram::{isomorphic, BoxId};
use idiomgen::dsl::{render_diagram, Workspace};
use idiomgen::transform::{merge, substitute};

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/sum_intent");
    let ws = Workspace::load_path(&dir).expect("workspace loads");
    let sum = ws.intent("sum").unwrap();
    let rules = ws.rules();
    let alt = rules.alternatives.iter().find(|a| a.base.label == "sum").unwrap();

    let expanded = substitute(sum, &BoxId::new("r"), &alt.body).unwrap();
    println!("after substituting the fold form for `sum`:\n{}", render_diagram(&expanded));

    let merged = merge(&alt.body, &alt.base, &expanded).unwrap();
    println!(
        "merging it back gives {} diagram(s); isomorphic to the original: {}",
        merged.len(),
        merged.iter().any(|m| isomorphic(m, sum))
    );
}
