//! Build a wiring diagram by hand, validate it, and list its admissible
//! box orders. Then break it and show the reported violations.

use idiomgen::diagram::{Diagram, Signature};

fn main() {
    let mut d = Diagram::new("sum", Vec::<&str>::new(), Vec::<&str>::new());
    d.add_box("n", Signature::new("read", Vec::<&str>::new(), ["Int"], true)).unwrap();
    d.add_box("xs", Signature::new("read list", ["Int"], ["[Int]"], true)).unwrap();
    d.add_box("r", Signature::new("sum", ["[Int]"], ["Int"], false)).unwrap();
    d.add_box("p", Signature::new("print", ["Int"], Vec::<&str>::new(), true)).unwrap();
    d.wire("n", 0, "xs", 0).wire("xs", 0, "r", 0).wire("r", 0, "p", 0);
    d.set_effect_order(["n", "xs", "p"]);

    println!("valid: {}", d.validate().is_ok());
    for order in d.linearizations(10).unwrap() {
        println!("order: {}", order.iter().map(|b| b.as_str()).collect::<Vec<_>>().join(" "));
    }

    // Printing before reading the list contradicts the data flow.
    d.set_effect_order(["n", "p", "xs"]);
    for v in d.validate().violations {
        println!("violation: {v}");
    }
}
