//! At order 1 every fractional construction collapses to its classical
//! counterpart: the weights reduce to a backward difference, and the
//! derived equations of motion become the familiar first-order system.
//!
//! Run with: cargo run --example classical_limit

use std::collections::BTreeSet;

use fracmech::dynamics::{lvl_el_residual, OperatorPair};
use fracmech::expr::parse;
use fracmech::frac_ops::{gl_weights, Grid};
use fracmech::varprob::{LinearVelocityLagrangian, PhaseTrajectory};

fn main() -> fracmech::Result<()> {
    println!("weights at order 1: {:?}", gl_weights(1.0, 5)?);

    // Demo model at alpha = 1: the equations of motion are q1' = q2 and
    // q2' = -q1, so q1 = cos t, q2 = -sin t solves them. Plugging that
    // classical solution into the discrete residual leaves only the
    // truncation error of the backward difference, which is C h with a
    // stable constant.
    let names: Vec<String> = vec!["q1".into(), "q2".into()];
    let scope: BTreeSet<String> = names.iter().cloned().collect();
    let lvl = LinearVelocityLagrangian::new(
        names,
        1.0,
        vec![parse("q2", &scope)?, parse("0", &scope)?],
        parse("0.5*(q1^2 + q2^2)", &scope)?,
    )?;

    println!("\nresidual of the continuum solution (cos t, -sin t):");
    for n in [101usize, 201, 401, 801] {
        let grid = Grid::new(0.0, 1.0, n)?;
        let pair = OperatorPair::new(&grid, 1.0)?;
        let mut traj = PhaseTrajectory::new(grid.clone());
        traj.set("q1_0", grid.nodes().iter().map(|t| t.cos()).collect())?;
        traj.set("q2_0", grid.nodes().iter().map(|t| -t.sin()).collect())?;
        let field = lvl_el_residual(&lvl, &traj, &pair)?;
        println!(
            "  n = {n:4}   h = {:.4}   max residual = {:.3e}   residual / h = {:.4}",
            grid.h(),
            field.max_abs(),
            field.max_abs() / grid.h()
        );
    }
    Ok(())
}
