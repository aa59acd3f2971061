//! Parse a program and run it on a few inputs with the built-in
//! interpreter.

use idiomgen::targets::program::{parse_program, run_program};

const SOURCE: &str = "\
main = do
  n <- readLn
  xs <- replicateM n readLn
  print (sum (filter even xs))
";

fn main() {
    let p = parse_program(SOURCE).expect("program parses");
    for stdin in [vec![3, 1, 2, 4], vec![0], vec![2, 5]] {
        println!("{stdin:?} -> {}", run_program(&p, &stdin));
    }
}
