//! Verify numerically that the Lagrangian equations of motion and the
//! Hamiltonian-route combined equations are the same equations: evaluated
//! with a shared discrete operator pair they agree to machine precision on
//! arbitrary trajectories, and visibly disagree once the operators differ.
//!
//! Run with: cargo run --example equivalence_check

use std::collections::BTreeSet;

use fracmech::dynamics::{check_equivalence, check_equivalence_ops, OperatorPair};
use fracmech::expr::parse;
use fracmech::frac_ops::Grid;
use fracmech::varprob::{
    left_ladder_var, random_smooth_samples, LinearVelocityLagrangian, PhaseTrajectory,
};

fn main() -> fracmech::Result<()> {
    let names: Vec<String> = vec!["q1".into(), "q2".into()];
    let scope: BTreeSet<String> = names.iter().cloned().collect();
    let lvl = LinearVelocityLagrangian::new(
        names,
        0.5,
        vec![parse("q2", &scope)?, parse("0", &scope)?],
        parse("0.5*(q1^2 + q2^2)", &scope)?,
    )?;
    let grid = Grid::new(0.0, 1.0, 129)?;
    let pair = OperatorPair::new(&grid, lvl.alpha())?;

    let mut worst = 0.0f64;
    for seed in 0..25 {
        let samples = random_smooth_samples(&grid, 2, seed);
        let mut traj = PhaseTrajectory::new(grid.clone());
        for (r0, f) in samples.iter().enumerate() {
            traj.set(left_ladder_var(r0 + 1, 0), f.values().to_vec())?;
        }
        let report = check_equivalence(&lvl, &traj, &pair)?;
        worst = worst.max(report.max_abs_diff());
    }
    println!("25 random trajectories, shared operators:");
    println!("  max |lagrangian route - hamiltonian route| = {worst:.3e}");
    println!("  identical equations: {}", worst < 1e-12);

    // Negative control: evaluate the Hamiltonian route with operators of a
    // slightly different order. The agreement collapses, which shows the
    // check would catch any real discrepancy.
    let skewed = OperatorPair::new(&grid, lvl.alpha() + 0.01)?;
    let samples = random_smooth_samples(&grid, 2, 7);
    let mut traj = PhaseTrajectory::new(grid.clone());
    for (r0, f) in samples.iter().enumerate() {
        traj.set(left_ladder_var(r0 + 1, 0), f.values().to_vec())?;
    }
    let report = check_equivalence_ops(&lvl, &traj, &pair, &skewed)?;
    println!("\nmismatched operator orders (0.5 vs 0.51):");
    println!("  max difference = {:.3e}", report.max_abs_diff());
    println!("  identical equations: {}", report.passes(1e-12));
    Ok(())
}
