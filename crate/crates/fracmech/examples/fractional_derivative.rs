//! Discretize left and right fractional derivatives on a grid and compare
//! them against closed-form values.
//!
//! Run with: cargo run --example fractional_derivative

use fracmech::frac_ops::{build_operator, power_rule_oracle, Grid, SampledFunction, Side};

fn main() -> fracmech::Result<()> {
    let grid = Grid::new(0.0, 1.0, 1025)?;
    let alpha = 0.5;

    // Left derivative of f(t) = t. The closed form is
    // Gamma(2)/Gamma(2 - alpha) * t^(1 - alpha).
    let left = build_operator(Side::Left, alpha, &grid)?;
    let f = SampledFunction::from_fn(grid.clone(), |t| t)?;
    let df = left.apply(&f)?;
    println!("left derivative of t at order {alpha}:");
    for &i in &[256usize, 512, 768, 1024] {
        let t = grid.node(i);
        let exact = power_rule_oracle(1.0, alpha, grid.a(), t)?;
        println!(
            "  t = {t:4.2}   numeric = {:+.6}   exact = {:+.6}   error = {:.2e}",
            df.values()[i],
            exact,
            (df.values()[i] - exact).abs()
        );
    }

    // The right operator is exactly the transpose of the left one: the
    // discrete form of integration by parts without boundary terms.
    let right = build_operator(Side::Right, alpha, &grid)?;
    let mut max_gap = 0.0f64;
    for i in (0..grid.n_points()).step_by(97) {
        for j in (0..grid.n_points()).step_by(89) {
            max_gap = max_gap.max((left.entry(i, j) - right.entry(j, i)).abs());
        }
    }
    println!("largest |left[i][j] - right[j][i]| over a probe set: {max_gap:.1e}");

    // At order 1 the weights collapse to [1, -1, 0, ...] and the operator
    // becomes the plain backward difference.
    let classical = build_operator(Side::Left, 1.0, &grid)?;
    println!(
        "order-1 weights: {:?}",
        &classical.weights()[..4.min(classical.weights().len())]
    );
    let g = SampledFunction::from_fn(grid.clone(), |t| t * t)?;
    let dg = classical.apply(&g)?;
    let mid = grid.n_points() / 2;
    println!(
        "backward difference of t^2 at t = {}: {:.6} (2t - h = {:.6})",
        grid.node(mid),
        dg.values()[mid],
        2.0 * grid.node(mid) - grid.h()
    );
    Ok(())
}
