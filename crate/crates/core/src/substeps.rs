//! Linear building blocks shared by both steppers.
//!
//! Each step splits into three families of constant-coefficient solves whose
//! results are recombined with the two scalars (ξ1, ξ2). Everything here is
//! parameterized by the time coefficient `c`: Δt for backward Euler and
//! 2Δt/3 for BDF2.

use crate::elliptic::{
    project, solve_ch_system, solve_velocity_helmholtz, ChOperatorSpec, HelmholtzSpec, Tolerances,
};
use crate::error::{Error, Result};
use crate::grid::{
    advect_scalar, advect_velocity, chemical_force, div_face_to_cell, dot_cell, dot_face,
    grad_cell_to_face, lap_cell, CellField, MacVector,
};
use crate::model::{potential_f_prime, sav_scale, PhysParams};

/// Quadrature used for the `(ũ, μ∇φ)` pairing inside the r-equation.
///
/// The momentum forcing is always assembled on faces. `Face` pairs on the
/// same faces; `CellAveraged` first averages both vectors to cell centers.
/// The latter is consistent to O(h²) but breaks the exact discrete energy
/// cancellation, and exists so audits can be checked against a known-bad
/// scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ForcePairing {
    #[default]
    Face,
    CellAveraged,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepOptions {
    pub tol: Tolerances,
    pub pairing: ForcePairing,
}

/// Explicitly treated data of one step, evaluated at the lagged or
/// extrapolated level.
#[derive(Clone, Debug)]
pub struct Explicit {
    pub phi: CellField,
    pub u: MacVector,
    pub mu: CellField,
    pub f_prime: CellField,
    /// `∇·(u φ)`
    pub advection: CellField,
    /// `μ∇φ`
    pub force: MacVector,
    /// `(u·∇)u`
    pub convection: MacVector,
    /// `sqrt(E1(φ) + δ)`
    pub scale: f64,
}

impl Explicit {
    pub fn new(phi: CellField, u: MacVector, mu: CellField, params: &PhysParams) -> Result<Self> {
        let scale = sav_scale(&phi, params)?;
        Ok(Self {
            f_prime: potential_f_prime(&phi, params),
            advection: advect_scalar(&u, &phi)?,
            force: chemical_force(&mu, &phi)?,
            convection: advect_velocity(&u),
            scale,
            phi,
            u,
            mu,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ChPair {
    pub phi: CellField,
    pub mu: CellField,
}

/// Solutions of the split linear problems. The third phase pair is
/// identically zero and not stored.
#[derive(Clone, Debug)]
pub struct Substeps {
    pub ch: [ChPair; 2],
    pub u_tilde: [MacVector; 3],
    pub u: [MacVector; 3],
    pub p: [CellField; 3],
}

/// Phase-field pairs: `𝔸φ0 = base`, `𝔸φ1 = −c·∇·(uφ) + Mc·ΔF′`, with
/// `μ0 = −Δφ0 + γ_eff φ0` and `μ1 = −Δφ1 + γ_eff φ1 + F′`.
pub fn ch_substeps(
    base: &CellField,
    ex: &Explicit,
    params: &PhysParams,
    c: f64,
    tol: f64,
) -> Result<[ChPair; 2]> {
    let spec = ChOperatorSpec::new(params.mobility * c, params.gamma_eff())?;
    let ge = params.gamma_eff();
    let (phi0, _) = solve_ch_system(&spec, base, tol)?;
    let mu0 = CellField::combine(&[(-1.0, &lap_cell(&phi0)), (ge, &phi0)])?;
    let rhs1 = CellField::combine(&[
        (-c, &ex.advection),
        (params.mobility * c, &lap_cell(&ex.f_prime)),
    ])?;
    let (phi1, _) = solve_ch_system(&spec, &rhs1, tol)?;
    let mu1 = CellField::combine(&[(-1.0, &lap_cell(&phi1)), (ge, &phi1), (1.0, &ex.f_prime)])?;
    Ok([
        ChPair { phi: phi0, mu: mu0 },
        ChPair { phi: phi1, mu: mu1 },
    ])
}

/// Intermediate velocities from `(I − νcΔ)ũ_i = rhs_i` with right-hand sides
/// `base − c∇pⁿ`, `c·μ∇φ` and `−c(u·∇)u`.
pub fn velocity_substeps(
    base: &MacVector,
    p_n: &CellField,
    ex: &Explicit,
    params: &PhysParams,
    c: f64,
    tol: f64,
) -> Result<[MacVector; 3]> {
    let spec = HelmholtzSpec::new(params.viscosity * c)?;
    let rhs0 = MacVector::combine(&[(1.0, base), (-c, &grad_cell_to_face(p_n))])?;
    let (w0, _) = solve_velocity_helmholtz(&spec, &rhs0, tol)?;
    let (w1, _) = solve_velocity_helmholtz(&spec, &ex.force.scaled(c), tol)?;
    let (w2, _) = solve_velocity_helmholtz(&spec, &ex.convection.scaled(-c), tol)?;
    Ok([w0, w1, w2])
}

/// Projects each ũ_i with coefficient `c`. The pressure of family 0 carries
/// pⁿ; with `rotational = Some(ν)` each p_i also receives `−ν∇·ũ_i`.
pub fn projection_substeps(
    u_tilde: &[MacVector; 3],
    p_n: &CellField,
    c: f64,
    rotational: Option<f64>,
    tol: f64,
) -> Result<([MacVector; 3], [CellField; 3])> {
    let mut us = Vec::with_capacity(3);
    let mut ps = Vec::with_capacity(3);
    for (k, w) in u_tilde.iter().enumerate() {
        let proj = project(w, c, tol)?;
        let mut p = proj.potential;
        if k == 0 {
            p.axpy(1.0, p_n)?;
        }
        if let Some(nu) = rotational {
            p.axpy(-nu, &div_face_to_cell(w))?;
        }
        us.push(proj.velocity);
        ps.push(p);
    }
    Ok((to3(us), to3(ps)))
}

fn to3<T>(v: Vec<T>) -> [T; 3] {
    v.try_into().unwrap_or_else(|_| unreachable!("three substep families"))
}

pub fn force_pairing(w: &MacVector, force: &MacVector, mode: ForcePairing) -> f64 {
    match mode {
        ForcePairing::Face => dot_face(w, force).expect("same grid"),
        ForcePairing::CellAveraged => {
            let (a, b) = (cell_average(w), cell_average(force));
            let s: f64 = a.iter().zip(&b).map(|(x, y)| x.0 * y.0 + x.1 * y.1).sum();
            s * w.grid().cell_area()
        }
    }
}

fn cell_average(w: &MacVector) -> Vec<(f64, f64)> {
    let g = w.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push((
                0.5 * (w.u_at(i, j) + w.u_at(i + 1, j)),
                0.5 * (w.v_at(i, j) + w.v_at(i, j + 1)),
            ));
        }
    }
    out
}

/// `A1ξ1 + A2ξ2 = A0`, `B1ξ1 + B2ξ2 = B0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiSystem {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl XiSystem {
    pub fn det(&self) -> f64 {
        self.a1 * self.b2 - self.a2 * self.b1
    }
}

/// Cramer's rule with a relative singularity guard.
pub fn solve_xi(sys: &XiSystem) -> Result<(f64, f64)> {
    let all = [sys.a0, sys.a1, sys.a2, sys.b0, sys.b1, sys.b2];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("xi system"));
    }
    let det = sys.det();
    let scale = (sys.a1 * sys.b2).abs().max((sys.a2 * sys.b1).abs());
    if !(det.abs() > 1e-14 * scale) {
        return Err(Error::SingularXi { det, scale });
    }
    let xi1 = (sys.a0 * sys.b2 - sys.a2 * sys.b0) / det;
    let xi2 = (sys.a1 * sys.b0 - sys.a0 * sys.b1) / det;
    Ok((xi1, xi2))
}

/// Inner products that enter the ξ coefficients for substep family `k`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Pairings {
    /// `(μ_k, ∇·(uφ))`
    pub mu_adv: f64,
    /// `(ũ_k, μ∇φ)`
    pub force: f64,
    /// `((u·∇)u, ũ_k)`
    pub convection: f64,
}

pub(crate) fn pairings(
    sub: &Substeps,
    ex: &Explicit,
    mode: ForcePairing,
) -> [Pairings; 3] {
    std::array::from_fn(|k| Pairings {
        mu_adv: if k < 2 {
            dot_cell(&sub.ch[k].mu, &ex.advection).expect("same grid")
        } else {
            0.0
        },
        force: force_pairing(&sub.u_tilde[k], &ex.force, mode),
        convection: dot_face(&ex.convection, &sub.u_tilde[k]).expect("same grid"),
    })
}

/// Fields after recombination with (ξ1, ξ2).
pub(crate) struct Recombined {
    pub phi: CellField,
    pub mu: CellField,
    pub u_tilde: MacVector,
    pub u: MacVector,
    pub p: CellField,
}

pub(crate) fn recombine(sub: &Substeps, xi1: f64, xi2: f64) -> Result<Recombined> {
    let phi = CellField::combine(&[(1.0, &sub.ch[0].phi), (xi1, &sub.ch[1].phi)])?;
    let mu = CellField::combine(&[(1.0, &sub.ch[0].mu), (xi1, &sub.ch[1].mu)])?;
    let mix = |v: &[MacVector; 3]| {
        MacVector::combine(&[(1.0, &v[0]), (xi1, &v[1]), (xi2, &v[2])])
    };
    let u_tilde = mix(&sub.u_tilde)?;
    let u = mix(&sub.u)?;
    let p = CellField::combine(&[(1.0, &sub.p[0]), (xi1, &sub.p[1]), (xi2, &sub.p[2])])?
        .zero_mean();
    let out = Recombined { phi, mu, u_tilde, u, p };
    if !(out.phi.is_finite() && out.mu.is_finite() && out.u.is_finite() && out.p.is_finite()) {
        return Err(Error::NonFinite("recombined step"));
    }
    Ok(out)
}
