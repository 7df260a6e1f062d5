//! Boundary-value solver for linear-velocity models: collocate the
//! equations of motion on the grid, pin coordinate endpoints, and drive the
//! residual to zero with a damped Newton iteration.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{
    derive_momenta, lvl_rows, primary_constraints, sample_expr, OperatorPair,
};
use crate::error::{Error, Result};
use crate::frac_ops::Grid;
use crate::varprob::{
    left_ladder_var, left_momentum_var, lvl_to_lagrangian, LinearVelocityLagrangian,
    PhaseTrajectory,
};

/// Endpoint values to hold fixed, keyed by user coordinate name. Every
/// coordinate of the model must receive at least one pin, otherwise the
/// collocation system is under-determined.
#[derive(Debug, Clone, Default)]
pub struct BoundarySpec {
    pins: BTreeMap<String, (Option<f64>, Option<f64>)>,
}

impl BoundarySpec {
    pub fn new() -> BoundarySpec {
        BoundarySpec::default()
    }

    pub fn pin_left(mut self, name: &str, value: f64) -> Result<BoundarySpec> {
        check_pin(name, value)?;
        self.pins.entry(name.to_string()).or_default().0 = Some(value);
        Ok(self)
    }

    pub fn pin_right(mut self, name: &str, value: f64) -> Result<BoundarySpec> {
        check_pin(name, value)?;
        self.pins.entry(name.to_string()).or_default().1 = Some(value);
        Ok(self)
    }

    pub fn left(&self, name: &str) -> Option<f64> {
        self.pins.get(name).and_then(|p| p.0)
    }

    pub fn right(&self, name: &str) -> Option<f64> {
        self.pins.get(name).and_then(|p| p.1)
    }

    pub fn names(&self) -> Vec<&str> {
        self.pins.keys().map(|k| k.as_str()).collect()
    }
}

fn check_pin(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "boundary value {value} for {name:?} is not finite"
        )));
    }
    Ok(())
}

/// Shape of the collocation system relative to its unknown count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemMode {
    /// One pin per coordinate: as many equations as unknowns.
    Square,
    /// Extra pins remove unknowns: solve in the least-squares sense.
    LeastSquares,
}

/// Collocated equations of motion with boundary pins folded in. Residual
/// rows are taken at every node except the first; the last row per
/// coordinate closes the system through the one-sided operator window that
/// degenerates at that endpoint.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    lvl: LinearVelocityLagrangian,
    pair: OperatorPair,
    pinned: Vec<(usize, usize, f64)>,
    unknowns: Vec<(usize, usize)>,
    mode: SystemMode,
}

/// Collect the unknown coordinate samples and residual rows of a model on
/// a grid under the given boundary pins.
pub fn assemble_system(
    lvl: &LinearVelocityLagrangian,
    grid: &Grid,
    boundary: &BoundarySpec,
) -> Result<AssembledSystem> {
    let names = lvl.coords().names();
    for name in boundary.names() {
        if !names.iter().any(|n| n == name) {
            return Err(Error::Usage(format!(
                "boundary condition references unknown coordinate {name:?}"
            )));
        }
    }
    let n = grid.n_points();
    let mut pinned = Vec::new();
    let mut unknowns = Vec::new();
    for (r0, name) in names.iter().enumerate() {
        let left = boundary.left(name);
        let right = boundary.right(name);
        if left.is_none() && right.is_none() {
            return Err(Error::Usage(format!(
                "coordinate {name:?} has no boundary pin; the system would be \
                 under-determined"
            )));
        }
        if let Some(v) = left {
            pinned.push((r0, 0, v));
        }
        if let Some(v) = right {
            pinned.push((r0, n - 1, v));
        }
        for node in 0..n {
            let is_pinned = (node == 0 && left.is_some()) || (node == n - 1 && right.is_some());
            if !is_pinned {
                unknowns.push((r0, node));
            }
        }
    }
    let pair = OperatorPair::new(grid, lvl.alpha())?;
    let equation_count = names.len() * (n - 1);
    let mode = if unknowns.len() == equation_count {
        SystemMode::Square
    } else {
        SystemMode::LeastSquares
    };
    Ok(AssembledSystem {
        lvl: lvl.clone(),
        pair,
        pinned,
        unknowns,
        mode,
    })
}

impl AssembledSystem {
    pub fn lvl(&self) -> &LinearVelocityLagrangian {
        &self.lvl
    }

    pub fn pair(&self) -> &OperatorPair {
        &self.pair
    }

    pub fn grid(&self) -> &Grid {
        self.pair.grid()
    }

    pub fn mode(&self) -> SystemMode {
        self.mode
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    pub fn equation_count(&self) -> usize {
        self.lvl.coords().count() * (self.grid().n_points() - 1)
    }

    /// Coordinate and node index of each unknown, in residual-vector order.
    pub fn unknowns(&self) -> &[(usize, usize)] {
        &self.unknowns
    }

    /// Coordinate trajectory encoded by an unknown vector, pins included.
    pub fn trajectory_from(&self, u: &[f64]) -> Result<PhaseTrajectory> {
        if u.len() != self.unknowns.len() {
            return Err(Error::Usage(format!(
                "{} unknown values for a system with {} unknowns",
                u.len(),
                self.unknowns.len()
            )));
        }
        let n = self.grid().n_points();
        let r_count = self.lvl.coords().count();
        let mut channels = vec![vec![0.0; n]; r_count];
        for &(r0, node, value) in &self.pinned {
            channels[r0][node] = value;
        }
        for (&(r0, node), &value) in self.unknowns.iter().zip(u) {
            channels[r0][node] = value;
        }
        let mut traj = PhaseTrajectory::new(self.grid().clone());
        for (r0, values) in channels.into_iter().enumerate() {
            traj.set(left_ladder_var(r0 + 1, 0), values)?;
        }
        Ok(traj)
    }

    /// Equation-of-motion residuals at nodes `1..n` for each coordinate,
    /// flattened coordinate-major.
    pub fn residuals(&self, u: &[f64]) -> Result<Vec<f64>> {
        let traj = self.trajectory_from(u)?;
        let rows = lvl_rows(&self.lvl, &traj, &self.pair)?;
        let n = self.grid().n_points();
        let mut flat = Vec::with_capacity(self.equation_count());
        for row in rows {
            flat.extend_from_slice(&row[1..n]);
        }
        Ok(flat)
    }

    /// Straight-line interpolation between the pinned endpoint values,
    /// treating an unpinned endpoint as zero.
    pub fn initial_guess(&self) -> Vec<f64> {
        let n = self.grid().n_points();
        let names = self.lvl.coords().names();
        let mut endpoints = vec![(0.0, 0.0); names.len()];
        for &(r0, node, value) in &self.pinned {
            if node == 0 {
                endpoints[r0].0 = value;
            } else {
                endpoints[r0].1 = value;
            }
        }
        self.unknowns
            .iter()
            .map(|&(r0, node)| {
                let (va, vb) = endpoints[r0];
                va + (vb - va) * node as f64 / (n - 1) as f64
            })
            .collect()
    }
}

/// Outcome of a boundary-value solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    trajectory: PhaseTrajectory,
    iterations: usize,
    final_residual: f64,
    converged: bool,
    conditioning_warning: bool,
    unknown_count: usize,
    equation_count: usize,
    constraint_violation: Option<f64>,
}

impl SolveReport {
    pub fn trajectory(&self) -> &PhaseTrajectory {
        &self.trajectory
    }

    pub fn into_trajectory(self) -> PhaseTrajectory {
        self.trajectory
    }

    /// Newton steps taken (zero when the initial guess already satisfies
    /// the tolerance).
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Largest residual magnitude at the returned trajectory.
    pub fn final_residual(&self) -> f64 {
        self.final_residual
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// True when a singular collocation Jacobian forced the regularized
    /// normal-equations fallback.
    pub fn conditioning_warning(&self) -> bool {
        self.conditioning_warning
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown_count
    }

    pub fn equation_count(&self) -> usize {
        self.equation_count
    }

    /// Worst primary-constraint violation of the returned trajectory, when
    /// the solve populated the momentum channels.
    pub fn constraint_violation(&self) -> Option<f64> {
        self.constraint_violation
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Damped Newton iteration on the collocation residual. The Jacobian is
/// built by forward differences; each step is cut in half (up to thirty
/// times) until the residual norm decreases. Square systems go through an
/// LU factorization with partial pivoting; least-squares systems, and
/// square systems whose Jacobian turns out singular, fall back to the
/// normal equations with a small diagonal regularization.
pub fn newton_solve(
    system: &AssembledSystem,
    u0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let mut u = u0.to_vec();
    let mut residual = system.residuals(&u)?;
    let mut norm = max_abs(&residual);
    let mut iterations = 0;
    let mut conditioning_warning = false;
    while norm > tol && iterations < max_iter {
        let rows = residual.len();
        let cols = u.len();
        let mut jacobian = DMatrix::zeros(rows, cols);
        for j in 0..cols {
            let step = 1e-7 * u[j].abs().max(1.0);
            let mut probe = u.clone();
            probe[j] += step;
            let shifted = system.residuals(&probe)?;
            for i in 0..rows {
                jacobian[(i, j)] = (shifted[i] - residual[i]) / step;
            }
        }
        let rhs = DVector::from_iterator(rows, residual.iter().map(|v| -v));
        let direct = match system.mode() {
            SystemMode::Square => jacobian
                .clone()
                .lu()
                .solve(&rhs)
                .filter(|d| d.iter().all(|v| v.is_finite())),
            SystemMode::LeastSquares => None,
        };
        let direction = match direct {
            Some(d) => d,
            None => {
                if system.mode() == SystemMode::Square {
                    conditioning_warning = true;
                }
                let transpose = jacobian.transpose();
                let mut normal = &transpose * &jacobian;
                for i in 0..cols {
                    normal[(i, i)] += 1e-12;
                }
                let projected = &transpose * &rhs;
                normal.lu().solve(&projected).ok_or(Error::Accuracy {
                    best: norm,
                    bound: tol,
                })?
            }
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..31 {
            let trial: Vec<f64> = u
                .iter()
                .zip(direction.iter())
                .map(|(a, d)| a + scale * d)
                .collect();
            if let Ok(trial_residual) = system.residuals(&trial) {
                let trial_norm = max_abs(&trial_residual);
                if trial_norm < norm {
                    u = trial;
                    residual = trial_residual;
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    Ok(SolveReport {
        trajectory: system.trajectory_from(&u)?,
        iterations,
        final_residual: norm,
        converged: norm <= tol,
        conditioning_warning,
        unknown_count: system.unknown_count(),
        equation_count: system.equation_count(),
        constraint_violation: None,
    })
}

/// Solve a linear-velocity boundary-value problem end to end: assemble,
/// run the Newton iteration from the interpolated guess, then extend the
/// solved trajectory with the first ladder rung and the momentum channels
/// and verify the primary constraints on it.
pub fn solve_lvl(
    lvl: &LinearVelocityLagrangian,
    grid: &Grid,
    boundary: &BoundarySpec,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let system = assemble_system(lvl, grid, boundary)?;
    let guess = system.initial_guess();
    let mut report = newton_solve(&system, &guess, tol, max_iter)?;
    let n = grid.n_points();
    for r in 1..=lvl.coords().count() {
        let q0 = report
            .trajectory
            .channel(&left_ladder_var(r, 0))
            .expect("solver fills every coordinate channel")
            .to_vec();
        report
            .trajectory
            .set(left_ladder_var(r, 1), system.pair().left().apply_vec(&q0)?)?;
    }
    for r in 1..=lvl.coords().count() {
        let momentum = sample_expr(lvl.coefficient(r - 1), &report.trajectory)?;
        report.trajectory.set(left_momentum_var(r, 0), momentum)?;
        report.trajectory.set(left_momentum_var(r, 1), vec![0.0; n])?;
    }
    let momenta = derive_momenta(&lvl_to_lagrangian(lvl).into());
    let constraints = primary_constraints(&momenta, lvl, Some(&report.trajectory))?;
    report.constraint_violation = constraints.max_violation();
    Ok(report)
}
