//! Run an IO specification and check programs against it.

use idiomgen::targets::program::parse_program;
use idiomgen::targets::spec::{parse_spec, run_spec, satisfies, Satisfaction};

fn main() {
    let spec = parse_spec("[?n:Nat] ({len(x_A) = n_C} E /\\ [?x:Int])^L [!sum(x_A)]").unwrap();
    println!("spec on [3, 1, 2, 3]: {}", run_spec(&spec, &[3, 1, 2, 3]));
    println!("spec on [-1]: {}", run_spec(&spec, &[-1]));

    let inputs: Vec<Vec<i64>> = vec![vec![0], vec![2, 4, -1], vec![3, 1, 1, 1]];
    for src in [
        "main = do\n  n <- readLn\n  xs <- replicateM n readLn\n  print (sum xs)\n",
        "main = do\n  n <- readLn\n  xs <- replicateM n readLn\n  print (product xs)\n",
    ] {
        let p = parse_program(src).unwrap();
        match satisfies(&p, &spec, &inputs) {
            Satisfaction::Pass { checked, .. } => println!("satisfied on {checked} inputs"),
            Satisfaction::Counterexample { stdin, program, spec } => {
                println!("counterexample {stdin:?}: program {program}, spec {spec}")
            }
        }
    }
}
