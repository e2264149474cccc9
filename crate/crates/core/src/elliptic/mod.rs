//! Constant-coefficient elliptic solves needed by every time step.
//!
//! Three problem classes appear:
//!
//! * the Neumann Poisson problem `Δψ = f` behind each projection,
//! * the fourth-order Cahn-Hilliard operator
//!   `(I + MΔt Δ² − MΔt γ_eff Δ) φ = f` with Neumann conditions on φ and Δφ,
//! * the velocity Helmholtz problem `(I − νΔt Δ) ũ = f` with no-slip walls.
//!
//! The two cell-centered problems are diagonal in the 2-D DCT-II basis and
//! are solved that way by default; a conjugate-gradient path is kept for
//! cross-checking. The Helmholtz problem always uses Jacobi-preconditioned CG.

mod cg;
mod transform;

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{
    div_face_to_cell, grad_cell_to_face, lap_cell, lap_velocity, norm_l2_cell, CellField,
    GridSpec, MacVector,
};

use transform::CosinePlan;

/// Relative mean defect above which a Neumann right-hand side is rejected.
pub const COMPATIBILITY_THRESHOLD: f64 = 1e-10;

/// Coefficients of `I + MΔt Δ² − MΔt γ_eff Δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChOperatorSpec {
    pub mobility_dt: f64,
    pub gamma_eff: f64,
}

impl ChOperatorSpec {
    pub fn new(mobility_dt: f64, gamma_eff: f64) -> Result<Self> {
        if !(mobility_dt >= 0.0) || !mobility_dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mobility_dt must be >= 0, got {mobility_dt}"
            )));
        }
        if !(gamma_eff > 0.0) || !gamma_eff.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma_eff must be > 0, got {gamma_eff}"
            )));
        }
        Ok(Self {
            mobility_dt,
            gamma_eff,
        })
    }

    /// Symbol of the operator at Laplacian eigenvalue `lambda`.
    pub fn symbol(&self, lambda: f64) -> f64 {
        1.0 + self.mobility_dt * lambda * lambda - self.mobility_dt * self.gamma_eff * lambda
    }
}

/// Coefficient of `I − νΔt Δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelmholtzSpec {
    pub visc_dt: f64,
}

impl HelmholtzSpec {
    pub fn new(visc_dt: f64) -> Result<Self> {
        if !(visc_dt > 0.0) || !visc_dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "visc_dt must be > 0, got {visc_dt}"
            )));
        }
        Ok(Self { visc_dt })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖A x − b‖ / ‖b‖` measured with the forward operator.
    pub residual: f64,
    /// Mean projected out of a Neumann right-hand side.
    pub mean_removed: f64,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iterations={}, residual={:e}",
            self.iterations, self.residual
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Transform,
    Iterative,
}

/// Solver tolerances (relative residuals).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub poisson: f64,
    pub helmholtz: f64,
    pub ch: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            poisson: 1e-12,
            helmholtz: 1e-11,
            ch: 1e-12,
        }
    }
}

/// `(I + MΔt Δ² − MΔt γ_eff Δ) φ`
pub fn apply_ch_operator(spec: &ChOperatorSpec, phi: &CellField) -> CellField {
    let l1 = lap_cell(phi);
    let l2 = lap_cell(&l1);
    let mut out = phi.clone();
    out.axpy(spec.mobility_dt, &l2).expect("same grid");
    out.axpy(-spec.mobility_dt * spec.gamma_eff, &l1)
        .expect("same grid");
    out
}

/// `(I − νΔt Δ) w` acting on the interior unknowns; wall-normal entries of
/// the result are zero.
pub fn apply_helmholtz(spec: &HelmholtzSpec, w: &MacVector) -> MacVector {
    let mut out = w.clone();
    out.clear_normal_boundary();
    out.axpy(-spec.visc_dt, &lap_velocity(w)).expect("same grid");
    out
}

fn relative_residual(ax: &CellField, b: &CellField) -> f64 {
    let bn = norm_l2_cell(b);
    if bn == 0.0 {
        return norm_l2_cell(ax);
    }
    let mut r = ax.clone();
    r.axpy(-1.0, b).expect("same grid");
    norm_l2_cell(&r) / bn
}

fn iteration_cap(n: usize) -> usize {
    20 * n + 1000
}

/// Zero-mean ψ with `Δψ = rhs` under homogeneous Neumann conditions.
pub fn solve_neumann_poisson(rhs: &CellField, tol: f64) -> Result<(CellField, SolveReport)> {
    solve_neumann_poisson_with(rhs, tol, Backend::Transform)
}

pub fn solve_neumann_poisson_with(
    rhs: &CellField,
    tol: f64,
    backend: Backend,
) -> Result<(CellField, SolveReport)> {
    if !rhs.is_finite() {
        return Err(Error::NonFinite("solve_neumann_poisson"));
    }
    let grid = *rhs.grid();
    let norm = norm_l2_cell(rhs);
    let mean = rhs.mean();
    if norm == 0.0 {
        return Ok((CellField::zeros(grid), SolveReport::default()));
    }
    let defect = mean.abs() * grid.area().sqrt() / norm;
    if defect > COMPATIBILITY_THRESHOLD {
        return Err(Error::Compatibility {
            defect,
            threshold: COMPATIBILITY_THRESHOLD,
        });
    }
    let b = rhs.zero_mean();
    let (psi, iterations) = match backend {
        Backend::Transform => {
            let plan = CosinePlan::for_grid(&grid);
            let x = plan.solve(b.data(), |lambda| (lambda != 0.0).then_some(lambda));
            (CellField::from_vec(grid, x)?.zero_mean(), 0)
        }
        Backend::Iterative => {
            // CG on −Δ, which is positive definite on zero-mean fields
            let neg_b: Vec<f64> = b.data().iter().map(|x| -x).collect();
            let apply = |x: &[f64], y: &mut [f64]| {
                let f = CellField::from_vec(grid, x.to_vec()).expect("sized");
                for (o, l) in y.iter_mut().zip(lap_cell(&f).data()) {
                    *o = -l;
                }
            };
            let (x, report, ok) = cg::pcg(
                apply,
                |r, z| z.copy_from_slice(r),
                remove_mean,
                &neg_b,
                tol,
                iteration_cap(grid.n_cells()),
            );
            if !ok {
                return Err(Error::NotConverged {
                    solver: "neumann poisson CG",
                    report,
                });
            }
            (CellField::from_vec(grid, x)?.zero_mean(), report.iterations)
        }
    };
    let report = SolveReport {
        iterations,
        residual: relative_residual(&lap_cell(&psi), &b),
        mean_removed: mean,
    };
    Ok((psi, report))
}

fn remove_mean(x: &mut [f64]) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= m;
    }
}

/// φ with `(I + MΔt Δ² − MΔt γ_eff Δ) φ = rhs`, Neumann on φ and Δφ.
pub fn solve_ch_system(
    spec: &ChOperatorSpec,
    rhs: &CellField,
    tol: f64,
) -> Result<(CellField, SolveReport)> {
    solve_ch_system_with(spec, rhs, tol, Backend::Transform)
}

pub fn solve_ch_system_with(
    spec: &ChOperatorSpec,
    rhs: &CellField,
    tol: f64,
    backend: Backend,
) -> Result<(CellField, SolveReport)> {
    if !rhs.is_finite() {
        return Err(Error::NonFinite("solve_ch_system"));
    }
    let grid = *rhs.grid();
    if spec.mobility_dt == 0.0 {
        return Ok((rhs.clone(), SolveReport::default()));
    }
    let (phi, iterations) = match backend {
        Backend::Transform => {
            let plan = CosinePlan::for_grid(&grid);
            let x = plan.solve(rhs.data(), |lambda| Some(spec.symbol(lambda)));
            (CellField::from_vec(grid, x)?, 0)
        }
        Backend::Iterative => {
            let apply = |x: &[f64], y: &mut [f64]| {
                let f = CellField::from_vec(grid, x.to_vec()).expect("sized");
                y.copy_from_slice(apply_ch_operator(spec, &f).data());
            };
            let (x, report, ok) = cg::pcg(
                apply,
                |r, z| z.copy_from_slice(r),
                |_| {},
                rhs.data(),
                tol,
                iteration_cap(grid.n_cells()),
            );
            if !ok {
                return Err(Error::NotConverged {
                    solver: "cahn-hilliard CG",
                    report,
                });
            }
            (CellField::from_vec(grid, x)?, report.iterations)
        }
    };
    let report = SolveReport {
        iterations,
        residual: relative_residual(&apply_ch_operator(spec, &phi), rhs),
        mean_removed: 0.0,
    };
    Ok((phi, report))
}

fn helmholtz_diagonal(grid: &GridSpec, visc_dt: f64) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (ix2, iy2) = (1.0 / (grid.hx() * grid.hx()), 1.0 / (grid.hy() * grid.hy()));
    let mut diag = Vec::with_capacity(grid.n_u() + grid.n_v());
    for j in 0..ny {
        for i in 0..=nx {
            if i == 0 || i == nx {
                diag.push(1.0);
                continue;
            }
            let mut d = 2.0 * ix2 + 2.0 * iy2;
            if j == 0 {
                d += iy2;
            }
            if j + 1 == ny {
                d += iy2;
            }
            diag.push(1.0 + visc_dt * d);
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            if j == 0 || j == ny {
                diag.push(1.0);
                continue;
            }
            let mut d = 2.0 * ix2 + 2.0 * iy2;
            if i == 0 {
                d += ix2;
            }
            if i + 1 == nx {
                d += ix2;
            }
            diag.push(1.0 + visc_dt * d);
        }
    }
    diag
}

fn split_mac(grid: GridSpec, x: &[f64]) -> MacVector {
    let nu = grid.n_u();
    MacVector::from_vecs(grid, x[..nu].to_vec(), x[nu..].to_vec()).expect("sized")
}

/// ũ with `(I − νΔt Δ) ũ = rhs` and ũ = 0 on the walls.
pub fn solve_velocity_helmholtz(
    spec: &HelmholtzSpec,
    rhs: &MacVector,
    tol: f64,
) -> Result<(MacVector, SolveReport)> {
    if !rhs.is_finite() {
        return Err(Error::NonFinite("solve_velocity_helmholtz"));
    }
    let grid = *rhs.grid();
    let mut b_field = rhs.clone();
    b_field.clear_normal_boundary();
    let b: Vec<f64> = b_field.u().iter().chain(b_field.v()).copied().collect();
    let diag = helmholtz_diagonal(&grid, spec.visc_dt);
    let apply = |x: &[f64], y: &mut [f64]| {
        let w = split_mac(grid, x);
        let aw = apply_helmholtz(spec, &w);
        let nu = grid.n_u();
        y[..nu].copy_from_slice(aw.u());
        y[nu..].copy_from_slice(aw.v());
        // identity on the fixed wall-normal entries keeps the operator SPD
        for j in 0..grid.ny() {
            y[j * (grid.nx() + 1)] = x[j * (grid.nx() + 1)];
            y[j * (grid.nx() + 1) + grid.nx()] = x[j * (grid.nx() + 1) + grid.nx()];
        }
        for i in 0..grid.nx() {
            y[nu + i] = x[nu + i];
            y[nu + grid.ny() * grid.nx() + i] = x[nu + grid.ny() * grid.nx() + i];
        }
    };
    let precond = |r: &[f64], z: &mut [f64]| {
        for ((zk, rk), dk) in z.iter_mut().zip(r).zip(&diag) {
            *zk = rk / dk;
        }
    };
    let (x, report, ok) = cg::pcg(
        apply,
        precond,
        |_| {},
        &b,
        tol,
        iteration_cap(b.len()),
    );
    if !ok {
        return Err(Error::NotConverged {
            solver: "velocity helmholtz PCG",
            report,
        });
    }
    let mut w = split_mac(grid, &x);
    w.clear_normal_boundary();
    Ok((w, report))
}

/// Result of a projection onto discretely divergence-free fields.
#[derive(Clone, Debug)]
pub struct Projection {
    pub velocity: MacVector,
    /// ψ with `Δψ = ∇·w / coef`; the pressure increment.
    pub potential: CellField,
    pub report: SolveReport,
}

/// Removes the gradient part of `w`: `u = w − coef·∇ψ` with `Δψ = ∇·w/coef`.
///
/// `coef` is Δt for the standard pressure-correction step and 2Δt/3 for the
/// rotational BDF2 step.
pub fn project(w: &MacVector, coef: f64, tol: f64) -> Result<Projection> {
    if !w.is_finite() {
        return Err(Error::NonFinite("project"));
    }
    if !(coef > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "projection coefficient must be > 0, got {coef}"
        )));
    }
    let mut velocity = w.clone();
    velocity.clear_normal_boundary();
    // with no flux through the walls the divergence sums to zero, so any
    // mean left is rounding
    let rhs = div_face_to_cell(&velocity).zero_mean().scaled(1.0 / coef);
    let (psi, report) = solve_neumann_poisson(&rhs, tol)?;
    velocity.axpy(-coef, &grad_cell_to_face(&psi))?;
    Ok(Projection {
        velocity,
        potential: psi,
        report,
    })
}
