//! The workspace printer produces files that load back to the same
//! workspace.

mod common;

use common::*;
use idiomgen::diagram::isomorphic;
use idiomgen::dsl::Workspace;

#[test]
fn shipped_workspaces_print_and_reload_unchanged() {
    for name in ["sum_intent", "msum_intent", "lists_grammar"] {
        let ws = workspace(name);
        let printed = ws.to_string();
        let again = Workspace::from_sources(&[("printed.idioms".into(), printed.clone())])
            .unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(again.to_string(), printed, "{name}");
        assert_eq!(again.signatures, ws.signatures, "{name}");
        for (a, b) in ws.impls.iter().zip(&again.impls) {
            assert!(isomorphic(a, b), "{name}: implementation {} changed", a.name);
        }
        assert_eq!(ws.libraries.len(), again.libraries.len());
        for lib in &ws.libraries {
            assert_eq!(Some(lib), again.library(&lib.kind), "{name}: {} idioms changed", lib.kind);
        }
    }
}

#[test]
fn reloaded_workspace_generates_the_same_programs() {
    let ws = workspace("msum_intent");
    let again = Workspace::from_sources(&[("printed.idioms".into(), ws.to_string())]).unwrap();
    let before: Vec<String> = programs(&ws, "msum").into_iter().map(|a| a.text).collect();
    let after: Vec<String> = programs(&again, "msum").into_iter().map(|a| a.text).collect();
    assert_eq!(before, after);
}

#[test]
fn errors_point_at_file_line_and_column() {
    let src = "idiom \"a\" : () -> (Int);\nidiom \"b\" : (Bool) -> ();\nimpl bad {\n  box x = \"a\";\n  box y = \"b\";\n  wire x.0 -> y.0;\n}\n";
    let err = Workspace::from_sources(&[("bad.idioms".into(), src.into())]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.starts_with("bad.idioms:6:"), "{msg}");
    assert!(msg.contains("type mismatch"), "{msg}");
}
