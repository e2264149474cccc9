//! Physical parameters, the stabilized double-well potential and initial data.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{dot_cell, lap_cell, CellField, GridSpec, MacVector};

/// Model coefficients. The defaults are the benchmark values used for the
/// convergence tables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysParams {
    pub epsilon: f64,
    pub mobility: f64,
    pub viscosity: f64,
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
    /// Decay horizon of the `q` variable, `q(t) = exp(−t/T)`.
    pub horizon: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            epsilon: 0.3,
            mobility: 1e-3,
            viscosity: 1e-3,
            gamma: 1.0,
            beta: 5.0,
            delta: 0.0,
            horizon: 0.1,
        }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("mobility", self.mobility),
            ("viscosity", self.viscosity),
            ("horizon", self.horizon),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        let nonneg = [("gamma", self.gamma), ("beta", self.beta), ("delta", self.delta)];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Linear coefficient of the stabilized chemical potential, γ + β/ε².
    pub fn gamma_eff(&self) -> f64 {
        self.gamma + self.beta / (self.epsilon * self.epsilon)
    }

    /// Constant dropped from the free energy by the stabilization, per unit area.
    pub fn energy_shift_density(&self) -> f64 {
        -(self.beta * self.beta + 2.0 * self.beta) / (4.0 * self.epsilon * self.epsilon)
    }

    /// Root of F′ away from zero, where the potential attains its minimum.
    pub fn well_value(&self) -> f64 {
        (1.0 + self.beta).sqrt()
    }
}

/// `F′(φ) = φ(φ² − 1 − β)/ε²`
pub fn potential_f_prime(phi: &CellField, params: &PhysParams) -> CellField {
    let s = 1.0 + params.beta;
    let k = 1.0 / (params.epsilon * params.epsilon);
    phi.map(|p| k * p * (p * p - s))
}

/// `E1(φ) = (1/(4ε²)) ∫ (φ² − 1 − β)²` by the midpoint rule.
pub fn energy_e1(phi: &CellField, params: &PhysParams) -> f64 {
    let s = 1.0 + params.beta;
    let sum: f64 = phi
        .data()
        .iter()
        .map(|p| {
            let w = p * p - s;
            w * w
        })
        .sum();
    sum * phi.grid().cell_area() / (4.0 * params.epsilon * params.epsilon)
}

/// `sqrt(E1(φ) + δ)`, rejecting states where the square root degenerates.
pub fn sav_scale(phi: &CellField, params: &PhysParams) -> Result<f64> {
    let e = energy_e1(phi, params) + params.delta;
    if !(e > 1e-14) || !e.is_finite() {
        return Err(Error::InvalidState(format!(
            "E1(phi) + delta = {e:e} is too small for the auxiliary variable"
        )));
    }
    Ok(e.sqrt())
}

/// `μ = −Δφ + γ_eff φ + ξ·F′`
pub fn chemical_potential(
    phi: &CellField,
    xi: f64,
    f_prime: &CellField,
    params: &PhysParams,
) -> Result<CellField> {
    let lap = lap_cell(phi);
    CellField::combine(&[(-1.0, &lap), (params.gamma_eff(), phi), (xi, f_prime)])
}

/// Discrete total free energy including kinetic energy and the constant
/// removed by the stabilization.
pub fn total_energy(phi: &CellField, u: &MacVector, params: &PhysParams) -> f64 {
    let g = crate::grid::grad_cell_to_face(phi);
    let kinetic = 0.5 * crate::grid::dot_face(u, u).expect("same grid");
    let gradient = 0.5 * crate::grid::dot_face(&g, &g).expect("same grid");
    let quadratic = 0.5 * params.gamma * dot_cell(phi, phi).expect("same grid");
    kinetic + gradient + quadratic + energy_e1(phi, params)
        + params.energy_shift_density() * phi.grid().area()
}

/// Named initial conditions.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// Vortex velocity with `φ = cos(πx)cos(πy)` and zero pressure.
    Benchmark,
    /// Fluid at rest with φ at the potential minimum everywhere.
    FixedPoint,
    /// Tabulated φ with given velocity.
    Fields { phi: CellField, u: MacVector },
}

/// How the level-zero pressure is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitialPressure {
    #[default]
    Zero,
    /// Gradient part of the initial momentum forcing `μ∇φ − (u·∇)u + νΔu`,
    /// which is the pressure the continuous problem carries at t = 0.
    Consistent,
}

impl std::str::FromStr for InitialPressure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(InitialPressure::Zero),
            "consistent" => Ok(InitialPressure::Consistent),
            other => Err(Error::InvalidParameter(format!(
                "unknown initial pressure {other:?} (expected zero or consistent)"
            ))),
        }
    }
}

/// Level-zero fields shared by both schemes.
#[derive(Clone, Debug)]
pub struct InitialFields {
    pub phi: CellField,
    pub u: MacVector,
    pub p: CellField,
}

impl InitialData {
    pub fn fields(&self, grid: GridSpec, params: &PhysParams) -> Result<InitialFields> {
        let (phi, u) = match self {
            InitialData::Benchmark => {
                // u = curl ψ with ψ = sin²(πx) sin²(πy)/π, sampled at nodes so
                // the discrete field is exactly divergence free
                let u = MacVector::from_stream_function(grid, |x, y| {
                    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
                    sx * sx * sy * sy / PI
                });
                let phi = CellField::from_fn(grid, |x, y| (PI * x).cos() * (PI * y).cos());
                (phi, u)
            }
            InitialData::FixedPoint => (
                CellField::constant(grid, params.well_value()),
                MacVector::zeros(grid),
            ),
            InitialData::Fields { phi, u } => {
                grid.ensure_same(phi.grid())?;
                grid.ensure_same(u.grid())?;
                (phi.clone(), u.clone())
            }
        };
        if !phi.is_finite() || !u.is_finite() {
            return Err(Error::NonFinite("initial data"));
        }
        Ok(InitialFields {
            phi,
            u,
            p: CellField::zeros(grid),
        })
    }
}
