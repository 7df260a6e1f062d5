//! Discrete left/right Riemann-Liouville derivatives on uniform grids.
//!
//! The discretization is the standard (unshifted) Grünwald-Letnikov
//! convolution: first-order accurate, lower-triangular for the left
//! operator, and exactly the transpose of the left operator for the right
//! one. Two independent oracles back it: a closed-form power rule through
//! the gamma function, and direct quadrature of the defining integral with
//! the kernel singularity removed by substitution.
//!
//! Node 0 for the left operator (the last node for the right one) has only
//! its own sample in the convolution window, so values there do not
//! approximate the derivative of functions that are nonzero at the interval
//! start; residual evaluators exclude those boundary-affected nodes.

use crate::error::{Error, Result};
use crate::special::{gamma, recip_gamma};

/// Which end of the interval the operator's memory extends to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Memory over `[a, t]`.
    Left,
    /// Memory over `[t, b]`.
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// Uniform time mesh on `[a, b]` with `n_points` nodes `t_i = a + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n_points: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n_points: usize) -> Result<Grid> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain("grid endpoints must be finite".into()));
        }
        if a >= b {
            return Err(Error::Domain(format!(
                "grid needs a < b, got a = {a}, b = {b}"
            )));
        }
        if n_points < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        let h = (b - a) / (n_points - 1) as f64;
        // Defensive: the last node must land on b up to rounding.
        let drift = (a + (n_points - 1) as f64 * h - b).abs();
        let scale = a.abs().max(b.abs()).max(b - a);
        if drift > 8.0 * f64::EPSILON * scale {
            return Err(Error::Domain("grid step does not reach the endpoint".into()));
        }
        Ok(Grid { a, b, n_points, h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }
}

/// Orders of the left (`alpha`) and right (`beta`) operators. The solver
/// workflow uses orders in `(0, 1]`; the operator layer itself accepts any
/// positive order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrders {
    alpha: f64,
    beta: f64,
}

impl FracOrders {
    pub fn new(alpha: f64, beta: f64) -> Result<FracOrders> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "order {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(FracOrders { alpha, beta })
    }

    /// Same order on both sides; what a problem spec without an explicit
    /// right-side order means.
    pub fn symmetric(alpha: f64) -> Result<FracOrders> {
        FracOrders::new(alpha, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// A function known only through its values at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<SampledFunction> {
        if values.len() != grid.n_points() {
            return Err(Error::Usage(format!(
                "sample count {} does not match grid with {} nodes",
                values.len(),
                grid.n_points()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample value {bad}")));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<SampledFunction> {
        let values = (0..grid.n_points()).map(|i| f(grid.node(i))).collect();
        SampledFunction::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Grünwald-Letnikov weights `w_0 .. w_{count-1}` for the given order:
/// `w_0 = 1`, `w_k = w_{k-1} (1 - (order+1)/k)`, equal to
/// `(-1)^k binom(order, k)`.
pub fn gl_weights(order: f64, count: usize) -> Result<Vec<f64>> {
    if !order.is_finite() || order <= 0.0 {
        return Err(Error::Domain(format!(
            "weight order must be positive and finite, got {order}"
        )));
    }
    if count == 0 {
        return Err(Error::Domain("weight count must be at least 1".into()));
    }
    let mut w = Vec::with_capacity(count);
    w.push(1.0);
    for k in 1..count {
        let prev = w[k - 1];
        w.push(prev * (1.0 - (order + 1.0) / k as f64));
    }
    Ok(w)
}

/// Dense discretization of a one-sided fractional derivative on a grid.
///
/// Left rows encode `h^{-order} sum_{k<=i} w_k f_{i-k}`; the right matrix is
/// the entrywise transpose (bit for bit, both are filled from one scaled
/// weight array). For order 1 the left matrix is exactly the backward
/// difference.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    side: Side,
    order: f64,
    grid: Grid,
    weights: Vec<f64>,
    /// Row-major `n x n` entries; triangular by construction.
    entries: Vec<f64>,
}

/// Build the discrete operator for one side and order on a grid.
pub fn build_operator(side: Side, order: f64, grid: &Grid) -> Result<OperatorMatrix> {
    let n = grid.n_points();
    let weights = gl_weights(order, n)?;
    let scale = grid.h().powf(-order);
    let scaled: Vec<f64> = weights.iter().map(|w| scale * w).collect();
    let mut entries = vec![0.0; n * n];
    match side {
        Side::Left => {
            for i in 0..n {
                for k in 0..=i {
                    entries[i * n + (i - k)] = scaled[k];
                }
            }
        }
        Side::Right => {
            for i in 0..n {
                for k in 0..n - i {
                    entries[i * n + (i + k)] = scaled[k];
                }
            }
        }
    }
    Ok(OperatorMatrix {
        side,
        order,
        grid: grid.clone(),
        weights,
        entries,
    })
}

impl OperatorMatrix {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Unscaled convolution weights cached at construction.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.grid.n_points() + col]
    }

    /// Matrix-vector product against raw values of the right length.
    pub fn apply_vec(&self, values: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n_points();
        if values.len() != n {
            return Err(Error::Usage(format!(
                "operator on {} nodes applied to {} samples",
                n,
                values.len()
            )));
        }
        let mut out = vec![0.0; n];
        match self.side {
            Side::Left => {
                for i in 0..n {
                    let row = &self.entries[i * n..i * n + i + 1];
                    let mut acc = 0.0;
                    for (j, r) in row.iter().enumerate() {
                        acc += r * values[j];
                    }
                    out[i] = acc;
                }
            }
            Side::Right => {
                for i in 0..n {
                    let row = &self.entries[i * n + i..(i + 1) * n];
                    let mut acc = 0.0;
                    for (j, r) in row.iter().enumerate() {
                        acc += r * values[i + j];
                    }
                    out[i] = acc;
                }
            }
        }
        Ok(out)
    }

    /// Apply to a sampled function on the same grid.
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        if *f.grid() != self.grid {
            return Err(Error::Usage(
                "operator and samples live on different grids".into(),
            ));
        }
        let out = self.apply_vec(f.values())?;
        SampledFunction::new(self.grid.clone(), out)
    }
}

/// Apply `op` to `f` repeatedly, `times` in total; `times = 0` returns the
/// input unchanged. This realizes repeated application of the one-sided
/// derivative, which is not the same as a single application of a summed
/// order, so no semigroup identity is assumed anywhere.
pub fn sequential_apply(
    op: &OperatorMatrix,
    f: &SampledFunction,
    times: usize,
) -> Result<SampledFunction> {
    let mut current = f.clone();
    for _ in 0..times {
        current = op.apply(&current)?;
    }
    Ok(current)
}

/// Closed-form left fractional derivative of `(t-a)^nu`:
/// `Γ(nu+1)/Γ(nu+1-order) (t-a)^{nu-order}`. When the denominator gamma
/// sits at a pole the reciprocal-gamma convention makes the result exactly
/// zero.
pub fn power_rule_oracle(nu: f64, order: f64, a: f64, t: f64) -> Result<f64> {
    if !nu.is_finite() || nu <= -1.0 {
        return Err(Error::Domain(format!(
            "power-rule exponent must be greater than -1, got {nu}"
        )));
    }
    if !order.is_finite() || order <= 0.0 {
        return Err(Error::Domain(format!(
            "power-rule order must be positive, got {order}"
        )));
    }
    if !(t > a) {
        return Err(Error::Domain(format!(
            "power rule needs t > a, got t = {t}, a = {a}"
        )));
    }
    Ok(gamma(nu + 1.0) * recip_gamma(nu + 1.0 - order) * (t - a).powf(nu - order))
}

/// Composite Simpson quadrature, panel-doubling until two consecutive
/// refinements agree to `tol` relatively.
fn simpson_doubling(g: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let eval = |panels: usize| -> f64 {
        let step = (hi - lo) / panels as f64;
        let mut acc = g(lo) + g(hi);
        for j in 1..panels {
            let weight = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += weight * g(lo + j as f64 * step);
        }
        acc * step / 3.0
    };
    let mut panels = 8;
    let mut prev = eval(panels);
    while panels <= 1 << 16 {
        panels *= 2;
        let next = eval(panels);
        if (next - prev).abs() <= tol * (1.0 + next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Accuracy {
        best: prev,
        bound: tol * (1.0 + prev.abs()),
    })
}

/// Evaluate the defining integral of the one-sided fractional derivative of
/// order in `(0, 1)` directly, independent of the grid discretization.
///
/// The kernel singularity is removed by substituting `tau = t - s^{1/(1-order)}`
/// (mirrored for the right side), which turns the fractional integral into a
/// smooth one; the outer first derivative is then taken by central
/// differences with Richardson extrapolation, refining until the requested
/// tolerance is met.
pub fn quadrature_oracle(
    side: Side,
    order: f64,
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    t: f64,
    tol: f64,
) -> Result<f64> {
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::Domain(format!(
            "quadrature oracle needs order in (0, 1), got {order}"
        )));
    }
    if !(a < t && t < b) {
        return Err(Error::Domain(format!(
            "quadrature oracle needs t strictly inside ({a}, {b}), got {t}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let w = 1.0 - order;
    let norm = recip_gamma(2.0 - order);
    let inner_tol = 1e-13;
    // Fractional integral of order 1-order, with the kernel absorbed.
    let frac_integral = |u: f64| -> Result<f64> {
        let extent = match side {
            Side::Left => u - a,
            Side::Right => b - u,
        };
        let bound = extent.powf(w);
        let g = |s: f64| {
            let offset = s.powf(1.0 / w);
            match side {
                Side::Left => f(u - offset),
                Side::Right => f(u + offset),
            }
        };
        let integral = simpson_doubling(&g, 0.0, bound, inner_tol)?;
        Ok(norm * integral)
    };
    let sign = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let h0 = 0.05 * (t - a).min(b - t);
    let mut prev_g: Option<f64> = None;
    let mut prev_r: Option<f64> = None;
    let mut best = 0.0;
    let mut bound = f64::INFINITY;
    for level in 0..=8 {
        let hd = h0 / (1u64 << level) as f64;
        let g = (frac_integral(t + hd)? - frac_integral(t - hd)?) / (2.0 * hd);
        if let Some(pg) = prev_g {
            let r = (4.0 * g - pg) / 3.0;
            if let Some(pr) = prev_r {
                let diff = (r - pr).abs();
                if diff <= (0.5 * tol).max(1e-14 * (1.0 + r.abs())) {
                    return Ok(sign * r);
                }
                best = sign * r;
                bound = diff;
            }
            prev_r = Some(r);
        }
        prev_g = Some(g);
    }
    Err(Error::Accuracy { best, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn integer_order_weights_reduce_to_first_difference() {
        let w = gl_weights(1.0, 4).unwrap();
        assert_eq!(w, vec![1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn half_order_weights_match_hand_values() {
        let w = gl_weights(0.5, 4).unwrap();
        assert_eq!(w, vec![1.0, -0.5, -0.125, -0.0625]);
    }

    #[test]
    fn first_weight_is_minus_order() {
        let w = gl_weights(0.3, 2).unwrap();
        assert_eq!(w[0], 1.0);
        assert!((w[1] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn weight_recurrence_matches_binomial_oracle() {
        // (-1)^k binom(alpha, k) = Γ(k-alpha) / (Γ(-alpha) Γ(k+1))
        for &alpha in &[0.25, 0.3, 0.5, 0.7, 0.75, 0.9] {
            let w = gl_weights(alpha, 65).unwrap();
            for (k, wk) in w.iter().enumerate() {
                let oracle =
                    gamma(k as f64 - alpha) / (gamma(-alpha) * gamma(k as f64 + 1.0));
                let rel = (wk - oracle).abs() / oracle.abs();
                assert!(
                    rel < 1e-12,
                    "alpha={alpha} k={k}: recurrence {wk:e} vs binomial {oracle:e}"
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn weight_oracle_holds_for_random_fractional_orders(
            alpha in 0.05f64..0.95f64
        ) {
            let w = gl_weights(alpha, 33).unwrap();
            for (k, wk) in w.iter().enumerate() {
                let oracle =
                    gamma(k as f64 - alpha) / (gamma(-alpha) * gamma(k as f64 + 1.0));
                let rel = (wk - oracle).abs() / oracle.abs();
                prop_assert!(rel < 1e-12);
            }
        }
    }

    #[test]
    fn partial_sums_positive_decreasing_and_match_product_oracle() {
        for &alpha in &[0.25, 0.5, 0.75, 0.9] {
            let w = gl_weights(alpha, 513).unwrap();
            let mut sum = w[0];
            let mut product = 1.0;
            let mut prev_sum = f64::INFINITY;
            for k in 1..513 {
                sum += w[k];
                product *= (k as f64 - alpha) / k as f64;
                assert!(sum > 0.0, "alpha={alpha}: partial sum negative at K={k}");
                assert!(sum < prev_sum, "alpha={alpha}: partial sum not decreasing at K={k}");
                let rel = (sum - product).abs() / product;
                assert!(
                    rel < 1e-10,
                    "alpha={alpha} K={k}: sum {sum:e} vs product oracle {product:e}"
                );
                prev_sum = sum;
            }
        }
    }

    #[test]
    fn right_matrix_is_bitwise_transpose_of_left() {
        let grid = Grid::new(0.0, 1.0, 9).unwrap();
        let left = build_operator(Side::Left, 0.6, &grid).unwrap();
        let right = build_operator(Side::Right, 0.6, &grid).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                assert_eq!(
                    left.entry(i, j).to_bits(),
                    right.entry(j, i).to_bits(),
                    "mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn order_one_left_operator_is_backward_difference_on_squares() {
        let grid = Grid::new(0.0, 1.0, 11).unwrap();
        let h = grid.h();
        let op = build_operator(Side::Left, 1.0, &grid).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| t * t).unwrap();
        let d = op.apply(&f).unwrap();
        for i in 1..11 {
            let t = grid.node(i);
            assert!(
                (d.values()[i] - (2.0 * t - h)).abs() < 1e-12,
                "node {i}: {} vs {}",
                d.values()[i],
                2.0 * t - h
            );
        }
    }

    #[test]
    fn order_one_derivative_of_constant_vanishes() {
        let grid = Grid::new(0.0, 2.0, 21).unwrap();
        let op = build_operator(Side::Left, 1.0, &grid).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |_| 3.7).unwrap();
        let d = op.apply(&f).unwrap();
        for i in 1..21 {
            assert_eq!(d.values()[i], 0.0, "node {i}");
        }
    }

    #[test]
    fn half_derivative_of_constant_converges_to_closed_form() {
        // The fractional derivative of 1 on [0,4] at t=4 is
        // 4^{-1/2} / Γ(1/2) = 1/(2 sqrt(pi)).
        let expected = 0.282_094_791_773_878_14;
        let mut errs = Vec::new();
        for n in [1025usize, 2049] {
            let grid = Grid::new(0.0, 4.0, n).unwrap();
            let op = build_operator(Side::Left, 0.5, &grid).unwrap();
            let f = SampledFunction::from_fn(grid.clone(), |_| 1.0).unwrap();
            let d = op.apply(&f).unwrap();
            errs.push((d.values()[n - 1] - expected).abs());
        }
        assert!(errs[0] < 5e-3, "error {:.3e}", errs[0]);
        assert!(errs[1] < errs[0], "no decay: {errs:?}");
    }

    #[test]
    fn half_derivative_of_t_matches_power_rule_at_endpoint() {
        let grid = Grid::new(0.0, 1.0, 1025).unwrap();
        let op = build_operator(Side::Left, 0.5, &grid).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| t).unwrap();
        let d = op.apply(&f).unwrap();
        let expected = 1.128_379_167_095_512_6; // 2/sqrt(pi)
        assert!((d.values()[1024] - expected).abs() < 5e-3);
    }

    #[test]
    fn power_rule_oracle_known_values() {
        assert!((power_rule_oracle(1.0, 1.0, 0.0, 3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (power_rule_oracle(1.0, 0.5, 0.0, 1.0).unwrap() - 1.128_379_167_095_512_6).abs()
                < 1e-12
        );
        assert!(
            (power_rule_oracle(0.5, 0.5, 0.0, 1.0).unwrap() - 0.886_226_925_452_758).abs()
                < 1e-12
        );
    }

    #[test]
    fn power_rule_oracle_pole_convention_and_domain_errors() {
        // nu + 1 - order = 0 puts the denominator gamma at a pole; the
        // reciprocal convention zeroes the value.
        assert_eq!(power_rule_oracle(0.5, 1.5, 0.0, 2.0).unwrap(), 0.0);
        assert!(power_rule_oracle(-1.5, 0.5, 0.0, 1.0).is_err());
        assert!(power_rule_oracle(1.0, 0.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn error_at_fixed_node_halves_with_h() {
        // f(t) = t^2, order 1/2: absolute error at the node nearest t=0.75
        // drops by about 2 when h is halved (first-order scheme).
        let mut errors = Vec::new();
        for n in [257usize, 513, 1025] {
            let grid = Grid::new(0.0, 1.0, n).unwrap();
            let op = build_operator(Side::Left, 0.5, &grid).unwrap();
            let f = SampledFunction::from_fn(grid.clone(), |t| t * t).unwrap();
            let d = op.apply(&f).unwrap();
            let i = ((0.75 - grid.a()) / grid.h()).round() as usize;
            let exact = power_rule_oracle(2.0, 0.5, 0.0, grid.node(i)).unwrap();
            errors.push((d.values()[i] - exact).abs());
        }
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(
                (1.5..=2.5).contains(&ratio),
                "halving ratio {ratio} outside [1.5, 2.5]; errors {errors:?}"
            );
        }
    }

    #[test]
    fn sequential_apply_zero_times_is_identity() {
        let grid = Grid::new(0.0, 1.0, 33).unwrap();
        let op = build_operator(Side::Left, 0.5, &grid).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| t.sin()).unwrap();
        let same = sequential_apply(&op, &f, 0).unwrap();
        assert_eq!(f.values(), same.values());
    }

    #[test]
    fn sequential_apply_twice_at_order_one_is_second_difference() {
        let grid = Grid::new(0.0, 1.0, 41).unwrap();
        let op = build_operator(Side::Left, 1.0, &grid).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| t * t).unwrap();
        let dd = sequential_apply(&op, &f, 2).unwrap();
        for i in 2..41 {
            assert!(
                (dd.values()[i] - 2.0).abs() < 1e-9,
                "node {i}: {}",
                dd.values()[i]
            );
        }
    }

    #[test]
    fn apply_rejects_grid_mismatch() {
        let grid_a = Grid::new(0.0, 1.0, 17).unwrap();
        let grid_b = Grid::new(0.0, 2.0, 17).unwrap();
        let op = build_operator(Side::Left, 0.5, &grid_a).unwrap();
        let f = SampledFunction::from_fn(grid_b, |t| t).unwrap();
        assert!(matches!(op.apply(&f), Err(Error::Usage(_))));
    }

    #[test]
    fn quadrature_oracle_matches_power_rule_for_t() {
        let v = quadrature_oracle(Side::Left, 0.5, &|t| t, 0.0, 2.0, 1.0, 1e-6).unwrap();
        assert!(
            (v - 1.128_379_167_095_512_6).abs() < 1e-6,
            "got {v}, want 2/sqrt(pi)"
        );
    }

    #[test]
    fn quadrature_oracle_of_zero_is_zero() {
        let v = quadrature_oracle(Side::Left, 0.5, &|_| 0.0, 0.0, 1.0, 0.5, 1e-6).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn quadrature_oracle_matches_power_rule_for_t_squared() {
        // Γ(3)/Γ(2.5) 0.5^{1.5}, evaluated ahead of time.
        let expected = 0.531_923_040_535_243_5;
        let v = quadrature_oracle(Side::Left, 0.5, &|t| t * t, 0.0, 1.0, 0.5, 1e-6).unwrap();
        assert!((v - expected).abs() < 1e-6, "got {v}, want {expected}");
    }

    #[test]
    fn quadrature_oracle_right_side_mirrors_power_rule() {
        // Right derivative of (b - t) at t: Γ(2)/Γ(1.5) (b-t)^{1/2}.
        let expected = 1.128_379_167_095_512_6 * 0.5f64.sqrt();
        let v =
            quadrature_oracle(Side::Right, 0.5, &|t| 1.0 - t, 0.0, 1.0, 0.5, 1e-6).unwrap();
        assert!((v - expected).abs() < 1e-6, "got {v}, want {expected}");
    }

    #[test]
    fn quadrature_and_operator_agree_on_smooth_monomials() {
        let grid = Grid::new(0.0, 1.0, 257).unwrap();
        let op = build_operator(Side::Left, 0.5, &grid).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| t * t).unwrap();
        let d = op.apply(&f).unwrap();
        let budget = (10.0 * grid.h()).max(1e-6);
        for target in [0.3, 0.5, 0.8] {
            let i = ((target - grid.a()) / grid.h()).round() as usize;
            let q = quadrature_oracle(
                Side::Left,
                0.5,
                &|t| t * t,
                0.0,
                1.0,
                grid.node(i),
                1e-6,
            )
            .unwrap();
            assert!(
                (d.values()[i] - q).abs() < budget,
                "t={target}: operator {} vs quadrature {q}",
                d.values()[i]
            );
        }
    }

    #[test]
    fn degenerate_grids_and_orders_are_rejected() {
        assert!(Grid::new(1.0, 1.0, 5).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(gl_weights(0.0, 4).is_err());
        assert!(gl_weights(-0.5, 4).is_err());
        assert!(quadrature_oracle(Side::Left, 1.5, &|t| t, 0.0, 1.0, 0.5, 1e-6).is_err());
        assert!(quadrature_oracle(Side::Left, 0.5, &|t| t, 0.0, 1.0, 1.0, 1e-6).is_err());
    }
}
