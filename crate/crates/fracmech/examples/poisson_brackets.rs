//! Compute Poisson brackets symbolically and verify the bracket axioms at
//! random phase points.
//!
//! Run with: cargo run --example poisson_brackets

use std::collections::BTreeSet;

use fracmech::dynamics::poisson;
use fracmech::expr::{parse, Binding, Expr};
use rand::{Rng, SeedableRng};

fn main() -> fracmech::Result<()> {
    let pairs = vec![
        ("q1".to_string(), "p1".to_string()),
        ("q2".to_string(), "p2".to_string()),
    ];
    let scope: BTreeSet<String> = pairs
        .iter()
        .flat_map(|(q, p)| [q.clone(), p.clone()])
        .collect();

    // Canonical relations come out exactly.
    let q1 = parse("q1", &scope)?;
    let p1 = parse("p1", &scope)?;
    let p2 = parse("p2", &scope)?;
    println!("{{q1, p1}} = {}", poisson(&q1, &p1, &pairs)?);
    println!("{{q1, p2}} = {}", poisson(&q1, &p2, &pairs)?);

    let a = parse("q1^2*p2 + q2", &scope)?;
    let b = parse("p1*p2 - q2^2", &scope)?;
    let c = parse("q1*p1 + q2*p2", &scope)?;
    println!("\nA = {a}\nB = {b}\nC = {c}");
    println!("{{A, B}} = {}", poisson(&a, &b, &pairs)?);

    // Axioms, checked numerically at seeded random points.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let mut worst_anti = 0.0f64;
    let mut worst_leibniz = 0.0f64;
    let mut worst_jacobi = 0.0f64;
    let ab = poisson(&a, &b, &pairs)?;
    let ba = poisson(&b, &a, &pairs)?;
    let leibniz_lhs = poisson(&a, &Expr::mul(b.clone(), c.clone()), &pairs)?;
    let ac = poisson(&a, &c, &pairs)?;
    let jacobi = Expr::add(
        Expr::add(
            poisson(&a, &poisson(&b, &c, &pairs)?, &pairs)?,
            poisson(&b, &poisson(&c, &a, &pairs)?, &pairs)?,
        ),
        poisson(&c, &poisson(&a, &b, &pairs)?, &pairs)?,
    );
    for _ in 0..50 {
        let mut binding = Binding::new();
        for name in &scope {
            binding.insert(name.clone(), rng.gen_range(-1.0..1.0));
        }
        worst_anti = worst_anti.max((ab.eval(&binding)? + ba.eval(&binding)?).abs());
        let lhs = leibniz_lhs.eval(&binding)?;
        let rhs = ab.eval(&binding)? * c.eval(&binding)? + b.eval(&binding)? * ac.eval(&binding)?;
        worst_leibniz = worst_leibniz.max((lhs - rhs).abs());
        worst_jacobi = worst_jacobi.max(jacobi.eval(&binding)?.abs());
    }
    println!("\naxioms at 50 random phase points:");
    println!("  |{{A,B}} + {{B,A}}|                     <= {worst_anti:.2e}");
    println!("  |{{A,BC}} - {{A,B}}C - B{{A,C}}|          <= {worst_leibniz:.2e}");
    println!("  |{{A,{{B,C}}}} + {{B,{{C,A}}}} + {{C,{{A,B}}}}| <= {worst_jacobi:.2e}");
    Ok(())
}
