//! Problem files: a TOML format that carries one model, its grid, and
//! optional boundary data and trajectories. One file describes exactly one
//! variational problem; unknown keys are rejected so that typos surface as
//! parse errors instead of silently ignored sections.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::parse;
use crate::frac_ops::{FracOrders, Grid, SampledFunction};
use crate::solver::BoundarySpec;
use crate::varprob::{
    augment, ladder_samples, lvl_to_lagrangian, multiplier_var, AugmentedLagrangian,
    ConstraintSpec, CoordinateSystem, LagrangianSpec, LinearVelocityLagrangian, PhaseTrajectory,
    TIME_VAR,
};

/// Parsed problem file, one section per struct field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub grid: GridSection,
    pub orders: OrdersSection,
    pub coords: CoordsSection,
    pub lagrangian: LagrangianSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintsSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub boundary: BTreeMap<String, BoundarySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub a: f64,
    pub b: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdersSection {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordsSection {
    pub names: Vec<String>,
}

/// Exactly one of the two model forms must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_velocity: Option<LinearVelocitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general: Option<GeneralSection>,
}

/// `L = sum_j a_j(q) D^alpha q_j - V(q)`, with coefficients and potential
/// written over the user coordinate names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearVelocitySection {
    pub a: Vec<String>,
    #[serde(rename = "V")]
    pub v: String,
}

/// A Lagrangian written directly over the canonical ladder variables
/// (`q{r}_0`, `q{r}_1`, ..., `Q{r}_1`, ..., `t`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSection {
    #[serde(rename = "L")]
    pub l: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_prime", default)]
    pub n_prime: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsSection {
    pub phi: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<f64>,
}

/// Coordinate samples along the grid, as closed-form generators in `t` or
/// inline sample lists; exactly one of the two maps must be filled. Keys
/// are user coordinate names, plus optionally multiplier names `lam{m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub generator: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub samples: BTreeMap<String, Vec<f64>>,
}

/// Which model form the file carries.
#[derive(Debug, Clone)]
pub enum ModelForm {
    LinearVelocity(LinearVelocityLagrangian),
    General(LagrangianSpec),
}

/// A problem file resolved into library types.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    grid: Grid,
    form: ModelForm,
    constraints: ConstraintSpec,
    boundary: BoundarySpec,
    trajectory: Option<PhaseTrajectory>,
}

impl ProblemFile {
    /// Parse problem-file text; syntax errors carry the byte offset.
    pub fn parse(text: &str) -> Result<ProblemFile> {
        toml::from_str(text).map_err(|e| Error::Syntax {
            offset: e.span().map_or(0, |s| s.start),
            message: e.message().to_string(),
        })
    }

    /// Serialize back to problem-file text; the result re-parses to an
    /// identical `ProblemFile`.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::Usage(format!("problem file cannot be serialized: {e}")))
    }

    /// Resolve every section into library types, validating as a whole.
    pub fn build(&self) -> Result<BuiltProblem> {
        let grid = Grid::new(self.grid.a, self.grid.b, self.grid.n_points)?;
        let beta = self.orders.beta.unwrap_or(self.orders.alpha);
        let orders = FracOrders::new(self.orders.alpha, beta)?;
        let names = self.coords.names.clone();

        let form = match (&self.lagrangian.linear_velocity, &self.lagrangian.general) {
            (Some(lvl), None) => {
                if self.orders.beta.is_some() && beta != self.orders.alpha {
                    return Err(Error::Usage(
                        "linear_velocity models use a single order; omit beta or set it \
                         equal to alpha"
                            .into(),
                    ));
                }
                let scope: std::collections::BTreeSet<String> = names.iter().cloned().collect();
                let coefficients = lvl
                    .a
                    .iter()
                    .map(|text| parse(text, &scope))
                    .collect::<Result<Vec<_>>>()?;
                let potential = parse(&lvl.v, &scope)?;
                ModelForm::LinearVelocity(LinearVelocityLagrangian::new(
                    names.clone(),
                    self.orders.alpha,
                    coefficients,
                    potential,
                )?)
            }
            (None, Some(general)) => {
                let coords = CoordinateSystem::new(names.clone(), general.n, general.n_prime)?;
                let scope = coords.lagrangian_scope();
                let lagrangian = parse(&general.l, &scope)?;
                ModelForm::General(LagrangianSpec::new(coords, orders, lagrangian)?)
            }
            _ => {
                return Err(Error::Usage(
                    "the lagrangian section needs exactly one of linear_velocity or general"
                        .into(),
                ));
            }
        };
        let coords = match &form {
            ModelForm::LinearVelocity(lvl) => lvl.coords().clone(),
            ModelForm::General(spec) => spec.coords().clone(),
        };

        let constraints = match &self.constraints {
            None => ConstraintSpec::none(),
            Some(section) => {
                let exprs = section
                    .phi
                    .iter()
                    .map(|text| match &form {
                        ModelForm::LinearVelocity(_) => {
                            let mut scope = coords.coordinate_scope();
                            scope.insert(TIME_VAR.to_string());
                            parse(text, &scope).map(|e| coords.internalize(&e))
                        }
                        ModelForm::General(_) => parse(text, &coords.lagrangian_scope()),
                    })
                    .collect::<Result<Vec<_>>>()?;
                ConstraintSpec::new(&coords, exprs)?
            }
        };

        let mut boundary = BoundarySpec::new();
        for (name, section) in &self.boundary {
            if coords.index_of(name).is_none() {
                return Err(Error::Usage(format!(
                    "boundary section references unknown coordinate {name:?}"
                )));
            }
            if let Some(v) = section.left {
                boundary = boundary.pin_left(name, v)?;
            }
            if let Some(v) = section.right {
                boundary = boundary.pin_right(name, v)?;
            }
        }

        let trajectory = match &self.trajectory {
            None => None,
            Some(section) => Some(realize_trajectory(
                section,
                &coords,
                orders,
                &grid,
                constraints.len(),
            )?),
        };

        Ok(BuiltProblem {
            grid,
            form,
            constraints,
            boundary,
            trajectory,
        })
    }
}

fn realize_trajectory(
    section: &TrajectorySection,
    coords: &CoordinateSystem,
    orders: FracOrders,
    grid: &Grid,
    multiplier_count: usize,
) -> Result<PhaseTrajectory> {
    let multiplier_names: Vec<String> = (1..=multiplier_count).map(multiplier_var).collect();
    let mut channels: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    match (section.generator.is_empty(), section.samples.is_empty()) {
        (false, true) => {
            let nodes = grid.nodes();
            let scope: std::collections::BTreeSet<String> =
                std::iter::once(TIME_VAR.to_string()).collect();
            for (name, text) in &section.generator {
                let e = parse(text, &scope)?;
                let mut bound: BTreeMap<&str, &[f64]> = BTreeMap::new();
                bound.insert(TIME_VAR, &nodes);
                channels.insert(name.clone(), e.eval_batch(grid.n_points(), &bound)?);
            }
        }
        (true, false) => {
            for (name, values) in &section.samples {
                channels.insert(name.clone(), values.clone());
            }
        }
        _ => {
            return Err(Error::Usage(
                "the trajectory section needs exactly one of generator or samples".into(),
            ));
        }
    }
    for name in channels.keys() {
        let known =
            coords.index_of(name).is_some() || multiplier_names.iter().any(|m| m == name);
        if !known {
            return Err(Error::Usage(format!(
                "trajectory channel {name:?} is neither a coordinate nor a multiplier"
            )));
        }
    }
    let mut sampled = Vec::new();
    for name in coords.names() {
        let values = channels.remove(name).ok_or_else(|| {
            Error::Usage(format!("trajectory is missing coordinate {name:?}"))
        })?;
        sampled.push(SampledFunction::new(grid.clone(), values)?);
    }
    let mut traj = ladder_samples(&sampled, coords, orders, grid)?;
    for (name, values) in channels {
        traj.set(name, values)?;
    }
    Ok(traj)
}

impl BuiltProblem {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn form(&self) -> &ModelForm {
        &self.form
    }

    /// The linear-velocity model, when the file carries that form.
    pub fn lvl(&self) -> Option<&LinearVelocityLagrangian> {
        match &self.form {
            ModelForm::LinearVelocity(lvl) => Some(lvl),
            ModelForm::General(_) => None,
        }
    }

    pub fn orders(&self) -> FracOrders {
        match &self.form {
            ModelForm::LinearVelocity(lvl) => lvl.orders(),
            ModelForm::General(spec) => spec.orders(),
        }
    }

    pub fn coords(&self) -> &CoordinateSystem {
        match &self.form {
            ModelForm::LinearVelocity(lvl) => lvl.coords(),
            ModelForm::General(spec) => spec.coords(),
        }
    }

    pub fn constraints(&self) -> &ConstraintSpec {
        &self.constraints
    }

    /// Base Lagrangian plus multiplier-weighted constraints.
    pub fn augmented(&self) -> Result<AugmentedLagrangian> {
        let base = match &self.form {
            ModelForm::LinearVelocity(lvl) => lvl_to_lagrangian(lvl),
            ModelForm::General(spec) => spec.clone(),
        };
        augment(base, self.constraints.clone())
    }

    pub fn boundary(&self) -> &BoundarySpec {
        &self.boundary
    }

    pub fn trajectory(&self) -> Option<&PhaseTrajectory> {
        self.trajectory.as_ref()
    }
}
