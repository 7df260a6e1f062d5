//! Derive canonical momenta, the Hamiltonian, and the primary constraints
//! of a linear-velocity Lagrangian, then read off the canonical equations.
//!
//! Run with: cargo run --example derive_hamiltonian

use std::collections::BTreeSet;

use fracmech::dynamics::{canonical_hamiltonian, derive_momenta, primary_constraints};
use fracmech::expr::parse;
use fracmech::varprob::{
    left_ladder_var, left_momentum_var, lvl_to_lagrangian, LinearVelocityLagrangian,
};

fn main() -> fracmech::Result<()> {
    // L = q2 D^alpha q1 - (q1^2 + q2^2)/2, written over the coordinates.
    let names: Vec<String> = vec!["q1".into(), "q2".into()];
    let scope: BTreeSet<String> = names.iter().cloned().collect();
    let lvl = LinearVelocityLagrangian::new(
        names,
        0.5,
        vec![parse("q2", &scope)?, parse("0", &scope)?],
        parse("0.5*(q1^2 + q2^2)", &scope)?,
    )?;

    // Internally the first ladder rung q{r}_1 stands for D^alpha q{r}.
    let spec = lvl_to_lagrangian(&lvl);
    println!("L = {}", spec.expr());

    let lag = spec.into();
    let momenta = derive_momenta(&lag);
    println!("\nmomenta (level 1 vanishes identically):");
    for r in 1..=2 {
        for n in 0..=1 {
            println!(
                "  {} = {}",
                left_momentum_var(r, n),
                momenta.left_momentum(r, n)
            );
        }
    }

    let h = canonical_hamiltonian(&lag, &momenta)?;
    println!("\nH = {}", h.expr());

    let constraints = primary_constraints(&momenta, &lvl, None)?;
    println!("\nprimary constraints (vanishing top momenta):");
    for c in constraints.constraints() {
        println!("  0 = {c}");
    }

    println!("\ncanonical equations:");
    for r in 1..=2 {
        let q0 = left_ladder_var(r, 0);
        let p0 = left_momentum_var(r, 0);
        println!("  Dright^0.5[{p0}] = {}", h.expr().diff(&q0));
        println!("  Dleft^0.5[{q0}]  = {}", h.expr().diff(&p0));
    }
    Ok(())
}
