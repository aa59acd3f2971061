//! Load a workspace of `.idioms` files (or a directory given on the
//! command line) and print a summary plus its canonical text form.

use idiomgen::dsl::Workspace;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/sum_intent"));
    match Workspace::load_path(&dir) {
        Ok(ws) => {
            println!(
                "{} signatures, {} implementations, {} grammars, {} idiom libraries",
                ws.signatures.len(),
                ws.impls.len(),
                ws.grammars.len(),
                ws.libraries.len()
            );
            print!("{ws}");
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
