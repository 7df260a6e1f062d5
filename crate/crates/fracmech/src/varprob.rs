//! Problem data model: coordinate ladders, Lagrangians, constraints, and
//! sampled phase trajectories.
//!
//! Internally every phase quantity has a canonical variable name: `q{r}_{n}`
//! for the n-th left derivative of coordinate r (1-based), `Q{r}_{n}` for
//! right derivatives, `p{r}_{n}` and `pi{r}_{n}` for the conjugate momenta,
//! `lam{m}` for constraint multipliers, and `t` for time. User-facing
//! coordinate names are renamed to `q{r}_0` at construction time.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::expr::{Binding, Expr};
use crate::frac_ops::{build_operator, FracOrders, Grid, SampledFunction, Side};

/// The reserved time variable.
pub const TIME_VAR: &str = "t";

const RESERVED_NAMES: [&str; 5] = ["t", "sin", "cos", "exp", "ln"];

/// Canonical name of the n-th left-derivative ladder variable of
/// coordinate `r` (1-based); n = 0 is the coordinate itself.
pub fn left_ladder_var(r: usize, n: usize) -> String {
    format!("q{r}_{n}")
}

/// Canonical name of the n-th right-derivative ladder variable (n >= 1).
pub fn right_ladder_var(r: usize, n: usize) -> String {
    format!("Q{r}_{n}")
}

/// Canonical name of the momentum conjugate to `q{r}_{n}`.
pub fn left_momentum_var(r: usize, n: usize) -> String {
    format!("p{r}_{n}")
}

/// Canonical name of the momentum conjugate to `Q{r}_{n}`.
pub fn right_momentum_var(r: usize, n: usize) -> String {
    format!("pi{r}_{n}")
}

/// Canonical name of the m-th constraint multiplier (1-based).
pub fn multiplier_var(m: usize) -> String {
    format!("lam{m}")
}

fn is_canonical_shape(name: &str) -> bool {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    for prefix in ["pi", "q", "Q", "p"] {
        if let Some(rest) = name.strip_prefix(prefix) {
            if let Some((a, b)) = rest.split_once('_') {
                if digits(a) && digits(b) {
                    return true;
                }
            }
        }
    }
    name.strip_prefix("lam").is_some_and(digits)
}

fn validate_coordinate_name(name: &str) -> Result<()> {
    let mut chars = name.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    let tail_ok = name
        .chars()
        .skip(1)
        .all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !(head_ok && tail_ok) {
        return Err(Error::Domain(format!(
            "coordinate name {name:?} is not a valid identifier"
        )));
    }
    if RESERVED_NAMES.contains(&name) {
        return Err(Error::Domain(format!(
            "coordinate name {name:?} is reserved"
        )));
    }
    if is_canonical_shape(name) {
        return Err(Error::Domain(format!(
            "coordinate name {name:?} collides with generated phase-variable names"
        )));
    }
    Ok(())
}

/// Fundamental coordinates plus the depth of the left (`n_left`) and right
/// (`n_right`) derivative ladders built on them.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSystem {
    names: Vec<String>,
    n_left: usize,
    n_right: usize,
}

impl CoordinateSystem {
    pub fn new(names: Vec<String>, n_left: usize, n_right: usize) -> Result<CoordinateSystem> {
        if names.is_empty() {
            return Err(Error::Domain("at least one coordinate is required".into()));
        }
        if n_left == 0 && n_right == 0 {
            return Err(Error::Domain(
                "at least one ladder level (left or right) is required".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            validate_coordinate_name(name)?;
            if !seen.insert(name.clone()) {
                return Err(Error::Domain(format!("duplicate coordinate name {name:?}")));
            }
        }
        Ok(CoordinateSystem {
            names,
            n_left,
            n_right,
        })
    }

    /// Number of fundamental coordinates.
    pub fn count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Highest left ladder index N.
    pub fn n_left(&self) -> usize {
        self.n_left
    }

    /// Highest right ladder index N'.
    pub fn n_right(&self) -> usize {
        self.n_right
    }

    /// Zero-based position of a user coordinate name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Every ladder variable: `q{r}_0..q{r}_N` and `Q{r}_1..Q{r}_N'`.
    pub fn ladder_vars(&self) -> Vec<String> {
        let mut vars = Vec::new();
        for r in 1..=self.count() {
            for n in 0..=self.n_left {
                vars.push(left_ladder_var(r, n));
            }
            for n in 1..=self.n_right {
                vars.push(right_ladder_var(r, n));
            }
        }
        vars
    }

    /// Names a Lagrangian over this system may reference.
    pub fn lagrangian_scope(&self) -> BTreeSet<String> {
        let mut scope: BTreeSet<String> = self.ladder_vars().into_iter().collect();
        scope.insert(TIME_VAR.to_string());
        scope
    }

    /// Names usable in coefficient and potential functions: the coordinates
    /// themselves, under their user-facing names.
    pub fn coordinate_scope(&self) -> BTreeSet<String> {
        self.names.iter().cloned().collect()
    }

    /// Rewrite user coordinate names into their canonical `q{r}_0` forms.
    pub fn internalize(&self, e: &Expr) -> Expr {
        let map: BTreeMap<String, String> = self
            .names
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), left_ladder_var(i + 1, 0)))
            .collect();
        e.rename_variables(&map)
    }

    fn check_scope(&self, e: &Expr, what: &str, extra: &BTreeSet<String>) -> Result<()> {
        let mut scope = self.lagrangian_scope();
        scope.extend(extra.iter().cloned());
        for v in e.variables() {
            if !scope.contains(&v) {
                return Err(Error::Domain(format!(
                    "{what} references {v:?}, which is not a variable of this coordinate system"
                )));
            }
        }
        Ok(())
    }
}

/// A Lagrangian over the ladder variables of a coordinate system.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSpec {
    coords: CoordinateSystem,
    orders: FracOrders,
    lagrangian: Expr,
}

impl LagrangianSpec {
    /// `lagrangian` is an expression over the canonical ladder variables
    /// and `t`.
    pub fn new(
        coords: CoordinateSystem,
        orders: FracOrders,
        lagrangian: Expr,
    ) -> Result<LagrangianSpec> {
        coords.check_scope(&lagrangian, "Lagrangian", &BTreeSet::new())?;
        Ok(LagrangianSpec {
            coords,
            orders,
            lagrangian,
        })
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn orders(&self) -> FracOrders {
        self.orders
    }

    pub fn expr(&self) -> &Expr {
        &self.lagrangian
    }
}

/// Constraint functions over ladder variables and time; the count must stay
/// strictly below the coordinate count, and each constraint must involve at
/// least one phase variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    exprs: Vec<Expr>,
}

impl ConstraintSpec {
    pub fn new(coords: &CoordinateSystem, exprs: Vec<Expr>) -> Result<ConstraintSpec> {
        if exprs.len() >= coords.count() {
            return Err(Error::Domain(format!(
                "{} constraints for {} coordinates; the constraint count must be \
                 strictly smaller than the coordinate count",
                exprs.len(),
                coords.count()
            )));
        }
        for (m, phi) in exprs.iter().enumerate() {
            coords.check_scope(phi, "constraint", &BTreeSet::new())?;
            let depends_on_phase = phi.variables().iter().any(|v| v != TIME_VAR);
            if !depends_on_phase {
                return Err(Error::Domain(format!(
                    "constraint {} ({phi}) involves no phase variable",
                    m + 1
                )));
            }
        }
        Ok(ConstraintSpec { exprs })
    }

    pub fn none() -> ConstraintSpec {
        ConstraintSpec { exprs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }
}

/// A Lagrangian with multiplier terms for its constraints:
/// `L + sum_m lam{m} * phi_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedLagrangian {
    base: LagrangianSpec,
    constraints: ConstraintSpec,
}

/// Attach constraints to a Lagrangian with fresh multiplier variables.
pub fn augment(base: LagrangianSpec, constraints: ConstraintSpec) -> Result<AugmentedLagrangian> {
    if constraints.len() >= base.coords().count() {
        return Err(Error::Domain(format!(
            "{} constraints for {} coordinates; the constraint count must be \
             strictly smaller than the coordinate count",
            constraints.len(),
            base.coords().count()
        )));
    }
    Ok(AugmentedLagrangian { base, constraints })
}

impl From<LagrangianSpec> for AugmentedLagrangian {
    fn from(base: LagrangianSpec) -> AugmentedLagrangian {
        AugmentedLagrangian {
            base,
            constraints: ConstraintSpec::none(),
        }
    }
}

impl AugmentedLagrangian {
    pub fn base(&self) -> &LagrangianSpec {
        &self.base
    }

    pub fn constraints(&self) -> &ConstraintSpec {
        &self.constraints
    }

    pub fn coords(&self) -> &CoordinateSystem {
        self.base.coords()
    }

    pub fn orders(&self) -> FracOrders {
        self.base.orders()
    }

    pub fn multiplier_count(&self) -> usize {
        self.constraints.len()
    }

    /// The full expression `L + sum_m lam{m} * phi_m`.
    pub fn lagrangian(&self) -> Expr {
        let mut acc = self.base.expr().clone();
        for (m, phi) in self.constraints.exprs().iter().enumerate() {
            acc = Expr::add(
                acc,
                Expr::mul(Expr::Var(multiplier_var(m + 1)), phi.clone()),
            );
        }
        acc
    }
}

/// Lagrangian of the form `sum_j a_j(q) D^alpha q_j - V(q)`: linear in the
/// first left-derivative ladder level, with coefficients and potential
/// depending on the coordinates only.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearVelocityLagrangian {
    coords: CoordinateSystem,
    alpha: f64,
    coefficients: Vec<Expr>,
    potential: Expr,
}

impl LinearVelocityLagrangian {
    /// `coefficients` and `potential` are expressions over the user
    /// coordinate names; they are internalized here. The order must lie in
    /// `(0, 1]`; at exactly 1 the model reduces to classical first-order
    /// mechanics.
    pub fn new(
        names: Vec<String>,
        alpha: f64,
        coefficients: Vec<Expr>,
        potential: Expr,
    ) -> Result<LinearVelocityLagrangian> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
            return Err(Error::Domain(format!(
                "linear-velocity order must lie in (0, 1], got {alpha}"
            )));
        }
        let coords = CoordinateSystem::new(names, 1, 0)?;
        if coefficients.len() != coords.count() {
            return Err(Error::Domain(format!(
                "{} coefficient functions for {} coordinates",
                coefficients.len(),
                coords.count()
            )));
        }
        let scope = coords.coordinate_scope();
        for (what, e) in coefficients
            .iter()
            .map(|e| ("coefficient", e))
            .chain(std::iter::once(("potential", &potential)))
        {
            for v in e.variables() {
                if !scope.contains(&v) {
                    return Err(Error::Domain(format!(
                        "{what} {e} references {v:?}; only coordinate names are allowed"
                    )));
                }
            }
        }
        let coefficients = coefficients.iter().map(|e| coords.internalize(e)).collect();
        let potential = coords.internalize(&potential);
        Ok(LinearVelocityLagrangian {
            coords,
            alpha,
            coefficients,
            potential,
        })
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn orders(&self) -> FracOrders {
        FracOrders::symmetric(self.alpha).expect("validated at construction")
    }

    /// Coefficient of the j-th velocity term (0-based), over canonical names.
    pub fn coefficient(&self, j: usize) -> &Expr {
        &self.coefficients[j]
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coefficients
    }

    /// Potential over canonical names.
    pub fn potential(&self) -> &Expr {
        &self.potential
    }
}

/// Expand a linear-velocity model into the general Lagrangian form with
/// N = 1, N' = 0: `L = sum_j a_j * q{j}_1 - V`.
pub fn lvl_to_lagrangian(lvl: &LinearVelocityLagrangian) -> LagrangianSpec {
    let mut sum = Expr::Const(0.0);
    for (j, a) in lvl.coefficients().iter().enumerate() {
        sum = Expr::add(
            sum,
            Expr::mul(a.clone(), Expr::Var(left_ladder_var(j + 1, 1))),
        );
    }
    let lagrangian = Expr::sub(sum, lvl.potential().clone());
    LagrangianSpec::new(lvl.coords().clone(), lvl.orders(), lagrangian)
        .expect("expansion stays inside the coordinate scope")
}

/// Sampled values of phase variables along a grid, keyed by canonical name.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    grid: Grid,
    channels: BTreeMap<String, Vec<f64>>,
}

impl PhaseTrajectory {
    pub fn new(grid: Grid) -> PhaseTrajectory {
        PhaseTrajectory {
            grid,
            channels: BTreeMap::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Add or replace one sampled channel.
    pub fn set(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.grid.n_points() {
            return Err(Error::Usage(format!(
                "channel {name:?} has {} samples for a grid with {} nodes",
                values.len(),
                self.grid.n_points()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "channel {name:?} contains non-finite sample {bad}"
            )));
        }
        self.channels.insert(name, values);
        Ok(())
    }

    pub fn has(&self, name: &str) -> bool {
        self.channels.contains_key(name)
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.get(name).map(|v| v.as_slice())
    }

    pub fn channel_names(&self) -> Vec<&str> {
        self.channels.keys().map(|k| k.as_str()).collect()
    }

    /// All channel values at node `i`, plus `t` bound to the node time.
    pub fn binding_at(&self, i: usize) -> Binding {
        let mut binding: Binding = self
            .channels
            .iter()
            .map(|(k, v)| (k.clone(), v[i]))
            .collect();
        binding.insert(TIME_VAR.to_string(), self.grid.node(i));
        binding
    }
}

/// Fill the coordinate part of a phase trajectory: `q{r}_0` from the given
/// samples, higher rungs by repeated application of the discrete left
/// operator, right rungs by the right operator.
pub fn ladder_samples(
    x: &[SampledFunction],
    coords: &CoordinateSystem,
    orders: FracOrders,
    grid: &Grid,
) -> Result<PhaseTrajectory> {
    if x.len() != coords.count() {
        return Err(Error::Usage(format!(
            "{} sampled coordinates for {} declared",
            x.len(),
            coords.count()
        )));
    }
    for f in x {
        if f.grid() != grid {
            return Err(Error::Usage(
                "coordinate samples live on a different grid".into(),
            ));
        }
    }
    let left = if coords.n_left() >= 1 {
        Some(build_operator(Side::Left, orders.alpha(), grid)?)
    } else {
        None
    };
    let right = if coords.n_right() >= 1 {
        Some(build_operator(Side::Right, orders.beta(), grid)?)
    } else {
        None
    };
    let mut traj = PhaseTrajectory::new(grid.clone());
    for (r0, f) in x.iter().enumerate() {
        let r = r0 + 1;
        traj.set(left_ladder_var(r, 0), f.values().to_vec())?;
        let mut current = f.values().to_vec();
        if let Some(op) = &left {
            for n in 1..=coords.n_left() {
                current = op.apply_vec(&current)?;
                traj.set(left_ladder_var(r, n), current.clone())?;
            }
        }
        let mut current = f.values().to_vec();
        if let Some(op) = &right {
            for n in 1..=coords.n_right() {
                current = op.apply_vec(&current)?;
                traj.set(right_ladder_var(r, n), current.clone())?;
            }
        }
    }
    Ok(traj)
}

/// Deterministic pseudo-random smooth coordinate samples: per coordinate,
/// a sum of five sine modes with seeded amplitudes in (-1/2, 1/2) and
/// seeded phases. The same seed always yields the same samples.
pub fn random_smooth_samples(grid: &Grid, count: usize, seed: u64) -> Vec<SampledFunction> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (grid.a(), grid.b());
    let span = b - a;
    (0..count)
        .map(|_| {
            let modes: Vec<(f64, f64)> = (1..=5)
                .map(|_| {
                    (
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            SampledFunction::from_fn(grid.clone(), |t| {
                modes
                    .iter()
                    .enumerate()
                    .map(|(m, (amp, phase))| {
                        let freq = (m + 1) as f64 * std::f64::consts::PI / span;
                        amp * (freq * (t - a) + phase).sin()
                    })
                    .sum()
            })
            .expect("bounded sine sums are finite")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn demo_model() -> LinearVelocityLagrangian {
        let scope = CoordinateSystem::new(names(&["q1", "q2"]), 1, 0)
            .unwrap()
            .coordinate_scope();
        LinearVelocityLagrangian::new(
            names(&["q1", "q2"]),
            0.5,
            vec![parse("q2", &scope).unwrap(), parse("0", &scope).unwrap()],
            parse("0.5*(q1^2 + q2^2)", &scope).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn coordinate_names_are_validated() {
        assert!(CoordinateSystem::new(names(&["q1", "q2"]), 1, 0).is_ok());
        assert!(CoordinateSystem::new(names(&["theta", "phi"]), 1, 0).is_ok());
        assert!(CoordinateSystem::new(names(&[]), 1, 0).is_err());
        assert!(CoordinateSystem::new(names(&["t"]), 1, 0).is_err());
        assert!(CoordinateSystem::new(names(&["sin"]), 1, 0).is_err());
        assert!(CoordinateSystem::new(names(&["2x"]), 1, 0).is_err());
        assert!(CoordinateSystem::new(names(&["a", "a"]), 1, 0).is_err());
        assert!(CoordinateSystem::new(names(&["q1_0"]), 1, 0).is_err());
        assert!(CoordinateSystem::new(names(&["lam3"]), 1, 0).is_err());
        assert!(CoordinateSystem::new(names(&["x"]), 0, 0).is_err());
    }

    #[test]
    fn canonical_names_follow_the_fixed_scheme() {
        assert_eq!(left_ladder_var(2, 0), "q2_0");
        assert_eq!(left_ladder_var(1, 3), "q1_3");
        assert_eq!(right_ladder_var(1, 2), "Q1_2");
        assert_eq!(left_momentum_var(2, 1), "p2_1");
        assert_eq!(right_momentum_var(3, 0), "pi3_0");
        assert_eq!(multiplier_var(1), "lam1");
    }

    #[test]
    fn expansion_of_linear_velocity_model_prints_expected_form() {
        let lvl = demo_model();
        let spec = lvl_to_lagrangian(&lvl);
        assert_eq!(spec.expr().to_string(), "q2_0*q1_1 - 0.5*(q1_0^2 + q2_0^2)");
    }

    #[test]
    fn velocity_partials_of_expansion_recover_coefficients() {
        let lvl = demo_model();
        let spec = lvl_to_lagrangian(&lvl);
        for j in 0..2 {
            let d = spec.expr().diff(&left_ladder_var(j + 1, 1));
            assert_eq!(&d, lvl.coefficient(j), "coordinate {}", j + 1);
        }
    }

    #[test]
    fn coordinate_partials_of_expansion_sample_correctly() {
        // dL/dq{k}_0 = sum_j da_j/dq{k}_0 q{j}_1 - dV/dq{k}_0.
        let lvl = demo_model();
        let spec = lvl_to_lagrangian(&lvl);
        let mut binding = Binding::new();
        for (name, v) in [
            ("q1_0", 0.7),
            ("q2_0", -1.3),
            ("q1_1", 0.4),
            ("q2_1", 2.2),
        ] {
            binding.insert(name.into(), v);
        }
        let d1 = spec.expr().diff("q1_0").eval(&binding).unwrap();
        assert!((d1 - (-0.7)).abs() < 1e-12);
        let d2 = spec.expr().diff("q2_0").eval(&binding).unwrap();
        assert!((d2 - (0.4 + 1.3)).abs() < 1e-12);
    }

    #[test]
    fn linear_velocity_validation_rejects_bad_inputs() {
        let scope: BTreeSet<String> = ["q1".to_string(), "t".to_string()].into_iter().collect();
        let t_expr = parse("t", &scope).unwrap();
        assert!(matches!(
            LinearVelocityLagrangian::new(names(&["q1"]), 0.5, vec![t_expr], Expr::Const(0.0)),
            Err(Error::Domain(_))
        ));
        let zero = Expr::Const(0.0);
        assert!(LinearVelocityLagrangian::new(
            names(&["q1"]),
            0.0,
            vec![zero.clone()],
            zero.clone()
        )
        .is_err());
        assert!(LinearVelocityLagrangian::new(
            names(&["q1"]),
            1.2,
            vec![zero.clone()],
            zero.clone()
        )
        .is_err());
        assert!(
            LinearVelocityLagrangian::new(names(&["q1"]), 0.5, vec![], zero.clone()).is_err()
        );
        assert!(LinearVelocityLagrangian::new(names(&["q1"]), 1.0, vec![zero.clone()], zero)
            .is_ok());
    }

    #[test]
    fn ladder_level_zero_is_the_input_bitwise() {
        let grid = Grid::new(0.0, 1.0, 17).unwrap();
        let coords = CoordinateSystem::new(names(&["x"]), 1, 0).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| t.sin()).unwrap();
        let traj = ladder_samples(
            &[f.clone()],
            &coords,
            FracOrders::symmetric(0.5).unwrap(),
            &grid,
        )
        .unwrap();
        assert_eq!(traj.channel("q1_0").unwrap(), f.values());
    }

    #[test]
    fn ladder_at_order_one_is_backward_difference() {
        let grid = Grid::new(0.0, 1.0, 33).unwrap();
        let h = grid.h();
        let coords = CoordinateSystem::new(names(&["x"]), 1, 0).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| t * t).unwrap();
        let traj =
            ladder_samples(&[f.clone()], &coords, FracOrders::symmetric(1.0).unwrap(), &grid)
                .unwrap();
        let q1 = traj.channel("q1_1").unwrap();
        for i in 1..33 {
            let expected = (f.values()[i] - f.values()[i - 1]) / h;
            assert!((q1[i] - expected).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn fractional_ladder_approaches_power_rule() {
        let grid = Grid::new(0.0, 1.0, 1025).unwrap();
        let coords = CoordinateSystem::new(names(&["x"]), 1, 0).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| t).unwrap();
        let traj = ladder_samples(&[f], &coords, FracOrders::symmetric(0.5).unwrap(), &grid)
            .unwrap();
        let q1 = traj.channel("q1_1").unwrap();
        assert!((q1[1024] - 1.128_379_167_095_512_6).abs() < 5e-3);
    }

    #[test]
    fn right_ladder_uses_right_operator() {
        let grid = Grid::new(0.0, 1.0, 65).unwrap();
        let coords = CoordinateSystem::new(names(&["x"]), 1, 1).unwrap();
        let f = SampledFunction::from_fn(grid.clone(), |t| 1.0 - t).unwrap();
        let traj = ladder_samples(
            &[f],
            &coords,
            FracOrders::new(0.5, 0.5).unwrap(),
            &grid,
        )
        .unwrap();
        // Right half-derivative of (1 - t) near t = 0 approaches
        // Γ(2)/Γ(1.5) * 1^{1/2} = 2/sqrt(pi).
        let q = traj.channel("Q1_1").unwrap();
        assert!((q[0] - 1.128_379_167_095_512_6).abs() < 5e-2);
    }

    #[test]
    fn constraints_must_be_fewer_than_coordinates_and_nonconstant() {
        let coords = CoordinateSystem::new(names(&["q1", "q2"]), 1, 0).unwrap();
        let scope = coords.lagrangian_scope();
        let phi = parse("q1_0 - q2_0", &scope).unwrap();
        assert!(ConstraintSpec::new(&coords, vec![phi.clone()]).is_ok());
        assert!(ConstraintSpec::new(&coords, vec![phi.clone(), phi.clone()]).is_err());
        let t_only = parse("t^2", &scope).unwrap();
        assert!(ConstraintSpec::new(&coords, vec![t_only]).is_err());
        assert!(ConstraintSpec::new(&coords, vec![Expr::Const(1.0)]).is_err());
    }

    #[test]
    fn augmentation_is_additive_and_differentiates_to_constraints() {
        let lvl = demo_model();
        let spec = lvl_to_lagrangian(&lvl);
        let coords = spec.coords().clone();
        let scope = coords.lagrangian_scope();
        let phi = parse("q1_0 - q2_0", &scope).unwrap();
        let constraints = ConstraintSpec::new(&coords, vec![phi.clone()]).unwrap();
        let plain = spec.expr().clone();
        let augmented = augment(spec, constraints).unwrap();
        let full = augmented.lagrangian();

        assert_eq!(full.diff("lam1"), phi);

        let mut binding = Binding::new();
        for (name, v) in [
            ("q1_0", 0.3),
            ("q2_0", -0.8),
            ("q1_1", 1.1),
            ("q2_1", 0.6),
            ("lam1", 2.5),
        ] {
            binding.insert(name.into(), v);
        }
        let lhs = full.eval(&binding).unwrap() - plain.eval(&binding).unwrap();
        let rhs = 2.5 * (0.3 - (-0.8));
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn augmenting_with_no_constraints_keeps_the_lagrangian() {
        let lvl = demo_model();
        let spec = lvl_to_lagrangian(&lvl);
        let plain = spec.expr().clone();
        let augmented = AugmentedLagrangian::from(spec);
        assert_eq!(augmented.lagrangian(), plain);
    }

    #[test]
    fn trajectory_channels_are_length_checked() {
        let grid = Grid::new(0.0, 1.0, 5).unwrap();
        let mut traj = PhaseTrajectory::new(grid);
        assert!(traj.set("q1_0", vec![1.0, 2.0]).is_err());
        assert!(traj.set("q1_0", vec![0.0; 5]).is_ok());
        let binding = traj.binding_at(2);
        assert_eq!(binding["t"], 0.5);
        assert_eq!(binding["q1_0"], 0.0);
    }

    #[test]
    fn random_samples_are_deterministic_per_seed() {
        let grid = Grid::new(0.0, 1.0, 33).unwrap();
        let a = random_smooth_samples(&grid, 2, 42);
        let b = random_smooth_samples(&grid, 2, 42);
        let c = random_smooth_samples(&grid, 2, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a[0].values().iter().all(|v| v.abs() < 2.5));
    }

    #[test]
    fn lagrangian_scope_is_enforced() {
        let coords = CoordinateSystem::new(names(&["q1"]), 1, 0).unwrap();
        let orders = FracOrders::symmetric(0.5).unwrap();
        let bad = Expr::Var("q9_0".into());
        assert!(LagrangianSpec::new(coords.clone(), orders, bad).is_err());
        let good = Expr::Var("q1_1".into());
        assert!(LagrangianSpec::new(coords, orders, good).is_ok());
    }
}
