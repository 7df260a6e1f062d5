//! Parse, print, differentiate, and evaluate the expression language used
//! for Lagrangians, potentials, and constraints.
//!
//! Run with: cargo run --example expressions

use std::collections::BTreeSet;

use fracmech::expr::{parse, Binding};

fn main() -> fracmech::Result<()> {
    let scope: BTreeSet<String> = ["q1", "p1", "t"].iter().map(|s| s.to_string()).collect();

    let e = parse("q1^2*sin(t) - 0.5*p1^2/(1 + q1^2)", &scope)?;
    println!("parsed:        {e}");
    println!("d/d q1:        {}", e.diff("q1"));
    println!("d/d p1:        {}", e.diff("p1"));
    println!("d/d t:         {}", e.diff("t"));

    let mut binding = Binding::new();
    binding.insert("q1".to_string(), 1.5);
    binding.insert("p1".to_string(), -0.25);
    binding.insert("t".to_string(), std::f64::consts::FRAC_PI_2);
    println!("value at (q1=1.5, p1=-0.25, t=pi/2): {}", e.eval(&binding)?);

    // Constant folding happens at construction, so derived expressions
    // stay readable.
    let folded = parse("0*q1 + 1*p1 + 2^3", &scope)?;
    println!("folded:        {folded}");

    // Undeclared names and syntax errors carry positions.
    match parse("q1 + qq", &scope) {
        Err(err) => println!("undeclared:    {err}"),
        Ok(_) => unreachable!(),
    }
    match parse("q1 * (p1 +", &scope) {
        Err(err) => println!("syntax error:  {err}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
