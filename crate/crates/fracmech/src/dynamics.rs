//! Equation machinery: Euler-Lagrange residuals, canonical momenta and
//! Hamiltonians, primary constraints, Hamilton-equation residuals, Poisson
//! brackets, and the consistency check between the Lagrangian and
//! Hamiltonian derivations for linear-velocity models.
//!
//! Every residual evaluator takes an explicit [`OperatorPair`] instead of
//! building discrete operators internally. Identities between equation sets
//! derived along different routes then hold at the level of identical
//! floating-point operations, so consistency checks can use tolerances near
//! machine precision.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::frac_ops::{build_operator, FracOrders, Grid, OperatorMatrix, Side};
use crate::varprob::{
    left_ladder_var, left_momentum_var, lvl_to_lagrangian, right_ladder_var, right_momentum_var,
    AugmentedLagrangian, CoordinateSystem, LagrangianSpec, LinearVelocityLagrangian,
    PhaseTrajectory, TIME_VAR,
};

/// Left and right discrete operators of one order on one grid, built once
/// and shared by every evaluation that must stay mutually consistent.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    order: f64,
    left: OperatorMatrix,
    right: OperatorMatrix,
}

impl OperatorPair {
    pub fn new(grid: &Grid, order: f64) -> Result<OperatorPair> {
        Ok(OperatorPair {
            order,
            left: build_operator(Side::Left, order, grid)?,
            right: build_operator(Side::Right, order, grid)?,
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn grid(&self) -> &Grid {
        self.left.grid()
    }

    pub fn left(&self) -> &OperatorMatrix {
        &self.left
    }

    pub fn right(&self) -> &OperatorMatrix {
        &self.right
    }

    pub fn matrix(&self, side: Side) -> &OperatorMatrix {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

/// Evaluate an expression at every grid node of a trajectory; `t` is bound
/// to the node times, every other variable to its trajectory channel.
pub(crate) fn sample_expr(e: &Expr, traj: &PhaseTrajectory) -> Result<Vec<f64>> {
    let nodes = traj.grid().nodes();
    let vars = e.variables();
    let mut channels: BTreeMap<&str, &[f64]> = BTreeMap::new();
    for v in &vars {
        if let Some(s) = traj.channel(v) {
            channels.insert(v.as_str(), s);
        }
    }
    channels.insert(TIME_VAR, &nodes);
    e.eval_batch(traj.grid().n_points(), &channels)
}

fn interior_nodes(grid: &Grid) -> Vec<usize> {
    (1..grid.n_points().saturating_sub(1)).collect()
}

fn check_same_grid(traj: &PhaseTrajectory, pair: &OperatorPair) -> Result<()> {
    if traj.grid() != pair.grid() {
        return Err(Error::Usage(
            "trajectory and operators live on different grids".into(),
        ));
    }
    Ok(())
}

/// Residuals of one equation set sampled on the reported nodes.
///
/// Both endpoint nodes are excluded: the left operator window is degenerate
/// at the interval start, the right operator window at the end, so residual
/// values there do not approximate the continuum equations.
#[derive(Debug, Clone)]
pub struct ResidualField {
    grid: Grid,
    nodes: Vec<usize>,
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl ResidualField {
    fn from_full_rows(
        grid: Grid,
        labels: Vec<String>,
        full_rows: Vec<Vec<f64>>,
    ) -> ResidualField {
        let nodes = interior_nodes(&grid);
        let values = full_rows
            .iter()
            .map(|row| nodes.iter().map(|&i| row[i]).collect())
            .collect();
        ResidualField {
            grid,
            nodes,
            labels,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Node indices the residuals are reported on.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn equation_count(&self) -> usize {
        self.values.len()
    }

    /// Residuals of one equation, aligned with `nodes()`.
    pub fn equation(&self, idx: usize) -> &[f64] {
        &self.values[idx]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid-weighted root-mean-square over all equations and nodes.
    pub fn l2(&self) -> f64 {
        let sum: f64 = self.values.iter().flatten().map(|v| v * v).sum();
        (self.grid.h() * sum).sqrt()
    }
}

/// Trapezoidal quadrature of the Lagrangian along a trajectory.
pub fn action_value(spec: &LagrangianSpec, traj: &PhaseTrajectory) -> Result<f64> {
    let samples = sample_expr(spec.expr(), traj)?;
    let n = samples.len();
    let mut acc = 0.0;
    for (i, v) in samples.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += w * v;
    }
    Ok(acc * traj.grid().h())
}

fn general_rows(
    lag: &AugmentedLagrangian,
    traj: &PhaseTrajectory,
    pair: &OperatorPair,
    mixed: &OperatorPair,
) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let coords = lag.coords();
    let full = lag.lagrangian();
    let n = traj.grid().n_points();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for r in 1..=coords.count() {
        let mut acc = sample_expr(&full.diff(&left_ladder_var(r, 0)), traj)?;
        for level in 1..=coords.n_left() {
            let partial = full.diff(&left_ladder_var(r, level));
            if partial == Expr::Const(0.0) {
                continue;
            }
            let mut v = sample_expr(&partial, traj)?;
            for _ in 0..level {
                v = pair.right().apply_vec(&v)?;
            }
            for i in 0..n {
                acc[i] += v[i];
            }
        }
        for level in 1..=coords.n_right() {
            let partial = full.diff(&right_ladder_var(r, level));
            if partial == Expr::Const(0.0) {
                continue;
            }
            let mut v = sample_expr(&partial, traj)?;
            for _ in 0..level {
                v = mixed.left().apply_vec(&v)?;
            }
            for i in 0..n {
                acc[i] += v[i];
            }
        }
        labels.push(coords.names()[r - 1].clone());
        rows.push(acc);
    }
    Ok((labels, rows))
}

/// Euler-Lagrange residuals of a general Lagrangian on a trajectory.
///
/// For each coordinate the residual is the partial in `q{r}_0`, plus the
/// adjoint (right) operator applied once per level to the partials in the
/// higher left rungs, plus the left operator applied to the partials in the
/// right rungs. The trajectory must carry samples for every ladder variable
/// (and multiplier) the Lagrangian references.
pub fn el_residual(
    lag: &AugmentedLagrangian,
    traj: &PhaseTrajectory,
    pair: &OperatorPair,
) -> Result<ResidualField> {
    el_residual_with_mixed(lag, traj, pair, pair)
}

/// As [`el_residual`], but the operator applied to right-ladder partials is
/// taken from `mixed` (its left matrix). Which order that operator should
/// carry is a modeling convention rather than a consequence of the
/// variational calculation, so it stays adjustable; the default keeps it
/// equal to the pair's own order.
pub fn el_residual_with_mixed(
    lag: &AugmentedLagrangian,
    traj: &PhaseTrajectory,
    pair: &OperatorPair,
    mixed: &OperatorPair,
) -> Result<ResidualField> {
    check_same_grid(traj, pair)?;
    check_same_grid(traj, mixed)?;
    let (labels, rows) = general_rows(lag, traj, pair, mixed)?;
    Ok(ResidualField::from_full_rows(
        pair.grid().clone(),
        labels,
        rows,
    ))
}

/// Full-length residual rows of the linear-velocity equations, one row per
/// coordinate. Only the `q{r}_0` channels are read; the first ladder rung
/// is recomputed from the pair's left matrix so that every caller sees the
/// same discretization regardless of what the trajectory carries.
pub(crate) fn lvl_rows(
    lvl: &LinearVelocityLagrangian,
    traj: &PhaseTrajectory,
    pair: &OperatorPair,
) -> Result<Vec<Vec<f64>>> {
    let r_count = lvl.coords().count();
    let mut work = traj.clone();
    for r in 1..=r_count {
        let name = left_ladder_var(r, 0);
        let q0 = traj
            .channel(&name)
            .ok_or_else(|| Error::Usage(format!("trajectory lacks samples for {name}")))?;
        work.set(left_ladder_var(r, 1), pair.left().apply_vec(q0)?)?;
    }
    let spec = lvl_to_lagrangian(lvl);
    let full = spec.expr();
    let mut rows = Vec::new();
    for k in 1..=r_count {
        let mut acc = sample_expr(&full.diff(&left_ladder_var(k, 0)), &work)?;
        let a_k = lvl.coefficient(k - 1);
        if *a_k != Expr::Const(0.0) {
            let v = pair.right().apply_vec(&sample_expr(a_k, &work)?)?;
            for i in 0..acc.len() {
                acc[i] += v[i];
            }
        }
        rows.push(acc);
    }
    Ok(rows)
}

/// Residuals of the linear-velocity equations of motion: for coordinate k,
/// `sum_j da_j/dq_k D^order q_j + Dright^order a_k - dV/dq_k`.
pub fn lvl_el_residual(
    lvl: &LinearVelocityLagrangian,
    traj: &PhaseTrajectory,
    pair: &OperatorPair,
) -> Result<ResidualField> {
    check_same_grid(traj, pair)?;
    let rows = lvl_rows(lvl, traj, pair)?;
    let labels = lvl.coords().names().to_vec();
    Ok(ResidualField::from_full_rows(
        pair.grid().clone(),
        labels,
        rows,
    ))
}

/// One additive piece of an equation: a plain expression, or a one-sided
/// operator applied `power` times to an inner expression. The recorded
/// order is notation for display; evaluation always uses the matrices of
/// the supplied pair.
#[derive(Debug, Clone, PartialEq)]
pub enum OpTerm {
    Plain(Expr),
    Operator {
        side: Side,
        order: f64,
        power: usize,
        inner: Expr,
    },
}

/// Sum of plain and operator-applied terms; operator applications stay
/// symbolic until evaluated against a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorExpr {
    terms: Vec<OpTerm>,
}

impl OperatorExpr {
    pub fn zero() -> OperatorExpr {
        OperatorExpr { terms: Vec::new() }
    }

    pub fn from_terms(terms: Vec<OpTerm>) -> OperatorExpr {
        OperatorExpr { terms }
    }

    pub fn terms(&self) -> &[OpTerm] {
        &self.terms
    }

    /// True when the expression is an empty sum.
    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sample every term on the trajectory, resolve operator applications
    /// through the pair, and sum.
    pub fn evaluate(&self, traj: &PhaseTrajectory, pair: &OperatorPair) -> Result<Vec<f64>> {
        check_same_grid(traj, pair)?;
        let n = traj.grid().n_points();
        let mut acc: Option<Vec<f64>> = None;
        for term in &self.terms {
            let v = match term {
                OpTerm::Plain(e) => sample_expr(e, traj)?,
                OpTerm::Operator {
                    side, power, inner, ..
                } => {
                    let mut v = sample_expr(inner, traj)?;
                    for _ in 0..*power {
                        v = pair.matrix(*side).apply_vec(&v)?;
                    }
                    v
                }
            };
            acc = Some(match acc {
                None => v,
                Some(mut a) => {
                    for i in 0..n {
                        a[i] += v[i];
                    }
                    a
                }
            });
        }
        Ok(acc.unwrap_or_else(|| vec![0.0; n]))
    }
}

impl std::fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match term {
                OpTerm::Plain(e) => write!(f, "{e}")?,
                OpTerm::Operator {
                    side,
                    order,
                    power,
                    inner,
                } => {
                    let tag = match side {
                        Side::Left => "Dleft",
                        Side::Right => "Dright",
                    };
                    for _ in 0..*power {
                        write!(f, "{tag}^{order}[")?;
                    }
                    write!(f, "{inner}")?;
                    for _ in 0..*power {
                        write!(f, "]")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Symbolic canonical momenta: for each coordinate, one operator expression
/// per ladder level, `p{r}_n` for n = 0..=N and `pi{r}_n'` for
/// n' = 0..=N'. The top level of each ladder is an empty sum, identically
/// zero; for linear-velocity models that vanishing momentum is what turns
/// into the primary constraints.
#[derive(Debug, Clone)]
pub struct MomentumField {
    left: Vec<Vec<OperatorExpr>>,
    right: Vec<Vec<OperatorExpr>>,
}

impl MomentumField {
    pub fn coordinate_count(&self) -> usize {
        self.left.len()
    }

    /// Momentum conjugate to `q{r}_{n}` (r is 1-based).
    pub fn left_momentum(&self, r: usize, n: usize) -> &OperatorExpr {
        &self.left[r - 1][n]
    }

    /// Momentum conjugate to `Q{r}_{n}` (r is 1-based).
    pub fn right_momentum(&self, r: usize, n: usize) -> &OperatorExpr {
        &self.right[r - 1][n]
    }

    pub fn left_levels(&self) -> usize {
        self.left.first().map_or(0, |p| p.len())
    }

    pub fn right_levels(&self) -> usize {
        self.right.first().map_or(0, |p| p.len())
    }
}

/// Canonical momenta by the ladder shift rule: the momentum at level n
/// collects the Lagrangian partials with respect to all higher rungs, each
/// pushed down by repeated opposite-side operator applications. Level-N
/// momenta are empty sums.
pub fn derive_momenta(lag: &AugmentedLagrangian) -> MomentumField {
    let coords = lag.coords();
    let full = lag.lagrangian();
    let alpha = lag.orders().alpha();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for r in 1..=coords.count() {
        let mut per = Vec::new();
        for n in 0..=coords.n_left() {
            let mut ox = OperatorExpr::zero();
            for k in (n + 1)..=coords.n_left() {
                let partial = full.diff(&left_ladder_var(r, k));
                if partial == Expr::Const(0.0) {
                    continue;
                }
                let power = k - n - 1;
                ox.terms.push(if power == 0 {
                    OpTerm::Plain(partial)
                } else {
                    OpTerm::Operator {
                        side: Side::Right,
                        order: alpha,
                        power,
                        inner: partial,
                    }
                });
            }
            per.push(ox);
        }
        left.push(per);

        let mut per = Vec::new();
        if coords.n_right() >= 1 {
            for n in 0..=coords.n_right() {
                let mut ox = OperatorExpr::zero();
                for k in (n + 1)..=coords.n_right() {
                    let partial = full.diff(&right_ladder_var(r, k));
                    if partial == Expr::Const(0.0) {
                        continue;
                    }
                    let power = k - n - 1;
                    ox.terms.push(if power == 0 {
                        OpTerm::Plain(partial)
                    } else {
                        OpTerm::Operator {
                            side: Side::Left,
                            order: alpha,
                            power,
                            inner: partial,
                        }
                    });
                }
                per.push(ox);
            }
        }
        right.push(per);
    }
    MomentumField { left, right }
}

/// A canonical Hamiltonian over coordinates, momenta, multipliers, and
/// time, with momenta as independent symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    coords: CoordinateSystem,
    orders: FracOrders,
    multiplier_count: usize,
    expr: Expr,
}

impl HamiltonianSpec {
    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn orders(&self) -> FracOrders {
        self.orders
    }

    pub fn multiplier_count(&self) -> usize {
        self.multiplier_count
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

/// `H = sum p{r}_n q{r}_{n+1} + sum pi{r}_n' Q{r}_{n'+1} - L`, with every
/// momentum a fresh symbol rather than its derived expression.
pub fn canonical_hamiltonian(
    lag: &AugmentedLagrangian,
    momenta: &MomentumField,
) -> Result<HamiltonianSpec> {
    let coords = lag.coords();
    let left_levels_ok = momenta.coordinate_count() == coords.count()
        && momenta.left_levels() == coords.n_left() + 1;
    let right_levels_ok = if coords.n_right() == 0 {
        momenta.right_levels() == 0
    } else {
        momenta.right_levels() == coords.n_right() + 1
    };
    if !(left_levels_ok && right_levels_ok) {
        return Err(Error::Usage(
            "momenta were derived from a different model shape".into(),
        ));
    }
    let mut sum = Expr::Const(0.0);
    for r in 1..=coords.count() {
        for n in 0..coords.n_left() {
            sum = Expr::add(
                sum,
                Expr::mul(
                    Expr::Var(left_momentum_var(r, n)),
                    Expr::Var(left_ladder_var(r, n + 1)),
                ),
            );
        }
        for n in 0..coords.n_right() {
            sum = Expr::add(
                sum,
                Expr::mul(
                    Expr::Var(right_momentum_var(r, n)),
                    Expr::Var(right_ladder_var(r, n + 1)),
                ),
            );
        }
    }
    Ok(HamiltonianSpec {
        coords: coords.clone(),
        orders: lag.orders(),
        multiplier_count: lag.multiplier_count(),
        expr: Expr::sub(sum, lag.lagrangian()),
    })
}

/// Primary constraints of a linear-velocity model and, optionally, their
/// worst violation on a trajectory.
#[derive(Debug, Clone)]
pub struct ConstraintReport {
    constraints: Vec<Expr>,
    max_violation: Option<f64>,
}

impl ConstraintReport {
    /// One expression per coordinate, `p{j}_0 - a_j(q)`.
    pub fn constraints(&self) -> &[Expr] {
        &self.constraints
    }

    pub fn max_violation(&self) -> Option<f64> {
        self.max_violation
    }
}

/// Build `p{j}_0 - a_j(q)` for each coordinate from the derived momenta.
/// The derived level-0 momenta of a linear-velocity model are velocity-free
/// expressions, so these relations constrain the phase variables directly.
pub fn primary_constraints(
    momenta: &MomentumField,
    lvl: &LinearVelocityLagrangian,
    traj: Option<&PhaseTrajectory>,
) -> Result<ConstraintReport> {
    let r_count = lvl.coords().count();
    if momenta.coordinate_count() != r_count || momenta.left_levels() != 2 {
        return Err(Error::Usage(
            "momenta were not derived from this linear-velocity model".into(),
        ));
    }
    let mut constraints = Vec::new();
    for j in 1..=r_count {
        let derived = momenta.left_momentum(j, 0);
        let plain = match derived.terms() {
            [] => Expr::Const(0.0),
            [OpTerm::Plain(e)] => e.clone(),
            _ => {
                return Err(Error::Usage(format!(
                    "momentum {} is operator-valued; primary constraints need the \
                     linear-velocity form",
                    left_momentum_var(j, 0)
                )))
            }
        };
        constraints.push(Expr::sub(Expr::Var(left_momentum_var(j, 0)), plain));
    }
    let max_violation = match traj {
        None => None,
        Some(traj) => {
            let mut worst = 0.0f64;
            for c in &constraints {
                for v in sample_expr(c, traj)? {
                    worst = worst.max(v.abs());
                }
            }
            Some(worst)
        }
    };
    Ok(ConstraintReport {
        constraints,
        max_violation,
    })
}

/// Residuals of the canonical equations on a phase trajectory:
/// stationarity of H in the highest ladder rungs, the coordinate equations
/// `dH/dq{k}_0 - Dright[p{k}_0]`, and the ladder reconstruction equations
/// `dH/dp{k}_0 - Dleft[q{k}_0]`.
pub fn hamilton_residuals(
    h: &HamiltonianSpec,
    traj: &PhaseTrajectory,
    pair: &OperatorPair,
) -> Result<ResidualField> {
    check_same_grid(traj, pair)?;
    let coords = &h.coords;
    for k in 1..=coords.count() {
        let p0 = left_momentum_var(k, 0);
        if !traj.has(&p0) {
            return Err(Error::Usage(format!(
                "trajectory lacks momentum samples {p0}"
            )));
        }
        let q0 = left_ladder_var(k, 0);
        if !traj.has(&q0) {
            return Err(Error::Usage(format!(
                "trajectory lacks coordinate samples {q0}"
            )));
        }
    }
    let n = traj.grid().n_points();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for r in 1..=coords.count() {
        if coords.n_left() >= 1 {
            let hi = left_ladder_var(r, coords.n_left());
            rows.push(sample_expr(&h.expr.diff(&hi), traj)?);
            labels.push(format!("dH/d{hi}"));
        }
        if coords.n_right() >= 1 {
            let hi = right_ladder_var(r, coords.n_right());
            rows.push(sample_expr(&h.expr.diff(&hi), traj)?);
            labels.push(format!("dH/d{hi}"));
        }
    }
    for k in 1..=coords.count() {
        let p0 = left_momentum_var(k, 0);
        let q0 = left_ladder_var(k, 0);
        let pv = traj
            .channel(&p0)
            .ok_or_else(|| Error::Usage(format!("trajectory lacks momentum samples {p0}")))?;
        let dp = pair.right().apply_vec(pv)?;
        let mut row = sample_expr(&h.expr.diff(&q0), traj)?;
        for i in 0..n {
            row[i] -= dp[i];
        }
        labels.push(format!("dH/d{q0} - Dright^{}[{p0}]", pair.order()));
        rows.push(row);
    }
    for k in 1..=coords.count() {
        let p0 = left_momentum_var(k, 0);
        let q0 = left_ladder_var(k, 0);
        let qv = traj
            .channel(&q0)
            .ok_or_else(|| Error::Usage(format!("trajectory lacks coordinate samples {q0}")))?;
        let dq = pair.left().apply_vec(qv)?;
        let mut row = sample_expr(&h.expr.diff(&p0), traj)?;
        for i in 0..n {
            row[i] -= dq[i];
        }
        labels.push(format!("dH/d{p0} - Dleft^{}[{q0}]", pair.order()));
        rows.push(row);
    }
    Ok(ResidualField::from_full_rows(
        pair.grid().clone(),
        labels,
        rows,
    ))
}

/// The coordinate equations of the Hamiltonian route with the momentum and
/// ladder relations substituted back in: one operator expression per
/// coordinate, value-identical to [`lvl_el_residual`] when evaluated with
/// the same operator pair on the same trajectory.
pub fn combined_equation(
    h: &HamiltonianSpec,
    lvl: &LinearVelocityLagrangian,
) -> Result<Vec<OperatorExpr>> {
    if h.coords != *lvl.coords() {
        return Err(Error::Usage(
            "Hamiltonian and linear-velocity model disagree on coordinates".into(),
        ));
    }
    let mut out = Vec::new();
    for k in 1..=lvl.coords().count() {
        let mut terms = Vec::new();
        let plain = Expr::neg(h.expr.diff(&left_ladder_var(k, 0)));
        if plain != Expr::Const(0.0) {
            terms.push(OpTerm::Plain(plain));
        }
        let a_k = lvl.coefficient(k - 1);
        if *a_k != Expr::Const(0.0) {
            terms.push(OpTerm::Operator {
                side: Side::Right,
                order: lvl.alpha(),
                power: 1,
                inner: a_k.clone(),
            });
        }
        out.push(OperatorExpr { terms });
    }
    Ok(out)
}

/// Pointwise difference between the Lagrangian-route residuals and the
/// Hamiltonian-route combined equations on one trajectory.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    nodes: Vec<usize>,
    diffs: Vec<Vec<f64>>,
    max_abs_diff: f64,
}

impl EquivalenceReport {
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Per-coordinate differences aligned with `nodes()`.
    pub fn diffs(&self) -> &[Vec<f64>] {
        &self.diffs
    }

    pub fn max_abs_diff(&self) -> f64 {
        self.max_abs_diff
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs_diff < tol
    }
}

/// Evaluate both derivation routes with one shared operator pair and
/// report their pointwise difference.
pub fn check_equivalence(
    lvl: &LinearVelocityLagrangian,
    traj: &PhaseTrajectory,
    pair: &OperatorPair,
) -> Result<EquivalenceReport> {
    check_equivalence_ops(lvl, traj, pair, pair)
}

/// As [`check_equivalence`], but the Hamiltonian route evaluates with its
/// own pair. Passing a pair of a different order is a deliberate negative
/// control: it demonstrates that the check is sensitive to any mismatch in
/// the discrete operators behind the two routes.
pub fn check_equivalence_ops(
    lvl: &LinearVelocityLagrangian,
    traj: &PhaseTrajectory,
    lagrangian_ops: &OperatorPair,
    hamiltonian_ops: &OperatorPair,
) -> Result<EquivalenceReport> {
    check_same_grid(traj, lagrangian_ops)?;
    check_same_grid(traj, hamiltonian_ops)?;
    let mut work = traj.clone();
    for r in 1..=lvl.coords().count() {
        let name = left_ladder_var(r, 0);
        let q0 = traj
            .channel(&name)
            .ok_or_else(|| Error::Usage(format!("trajectory lacks samples for {name}")))?;
        work.set(left_ladder_var(r, 1), lagrangian_ops.left().apply_vec(q0)?)?;
    }
    let rows_a = lvl_rows(lvl, &work, lagrangian_ops)?;
    let spec = lvl_to_lagrangian(lvl);
    let momenta = derive_momenta(&spec.clone().into());
    let hamiltonian = canonical_hamiltonian(&spec.into(), &momenta)?;
    let equations = combined_equation(&hamiltonian, lvl)?;
    let nodes = interior_nodes(traj.grid());
    let mut diffs = Vec::new();
    let mut max_abs = 0.0f64;
    for (row_a, eq) in rows_a.iter().zip(&equations) {
        let row_b = eq.evaluate(&work, hamiltonian_ops)?;
        let d: Vec<f64> = nodes.iter().map(|&i| (row_a[i] - row_b[i]).abs()).collect();
        for &v in &d {
            max_abs = max_abs.max(v);
        }
        diffs.push(d);
    }
    Ok(EquivalenceReport {
        nodes,
        diffs,
        max_abs_diff: max_abs,
    })
}

/// Poisson bracket of two phase-space expressions over declared conjugate
/// pairs: `sum dA/dq dB/dp - dB/dq dA/dp`. Both expressions may reference
/// only paired variables and time.
pub fn poisson(a: &Expr, b: &Expr, pairs: &[(String, String)]) -> Result<Expr> {
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    for (q, p) in pairs {
        if q == p || !declared.insert(q.as_str()) || !declared.insert(p.as_str()) {
            return Err(Error::Usage(format!(
                "conjugate pair ({q}, {p}) reuses a variable"
            )));
        }
    }
    for e in [a, b] {
        for v in e.variables() {
            if v != TIME_VAR && !declared.contains(v.as_str()) {
                return Err(Error::Usage(format!(
                    "variable {v:?} is not part of any conjugate pair"
                )));
            }
        }
    }
    let mut acc = Expr::Const(0.0);
    for (q, p) in pairs {
        let term = Expr::sub(
            Expr::mul(a.diff(q), b.diff(p)),
            Expr::mul(b.diff(q), a.diff(p)),
        );
        acc = Expr::add(acc, term);
    }
    Ok(acc)
}
