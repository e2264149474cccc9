//! Backward-Euler MSAV step with first-order pressure correction.

use crate::elliptic::project;
use crate::error::Result;
use crate::grid::{advect_velocity, chemical_force, lap_velocity, CellField, GridSpec, MacVector};
use crate::model::{
    chemical_potential, potential_f_prime, sav_scale, InitialData, InitialPressure, PhysParams,
};
use crate::substeps::{
    ch_substeps, pairings, projection_substeps, recombine, solve_xi, velocity_substeps, Explicit,
    StepOptions, Substeps, XiSystem,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SavState {
    pub r: f64,
    pub q: f64,
}

/// All unknowns at one time level.
#[derive(Clone, Debug)]
pub struct SchemeState {
    pub step: usize,
    pub t: f64,
    pub phi: CellField,
    pub mu: CellField,
    pub u: MacVector,
    /// Intermediate velocity of the step that produced this level; equal to
    /// `u` at the initial level.
    pub u_tilde: MacVector,
    pub p: CellField,
    pub sav: SavState,
}

impl SchemeState {
    pub fn initial(grid: GridSpec, params: &PhysParams, init: &InitialData) -> Result<Self> {
        params.validate()?;
        let f = init.fields(grid, params)?;
        let f_prime = potential_f_prime(&f.phi, params);
        let mu = chemical_potential(&f.phi, 1.0, &f_prime, params)?;
        let r = sav_scale(&f.phi, params)?;
        Ok(Self {
            step: 0,
            t: 0.0,
            mu,
            u_tilde: f.u.clone(),
            phi: f.phi,
            u: f.u,
            p: f.p,
            sav: SavState { r, q: 1.0 },
        })
    }

    /// Like [`SchemeState::initial`] with a choice of level-zero pressure.
    pub fn initial_with(
        grid: GridSpec,
        params: &PhysParams,
        init: &InitialData,
        pressure: InitialPressure,
        tol: f64,
    ) -> Result<Self> {
        let mut s = Self::initial(grid, params, init)?;
        if pressure == InitialPressure::Consistent {
            let w = MacVector::combine(&[
                (1.0, &chemical_force(&s.mu, &s.phi)?),
                (-1.0, &advect_velocity(&s.u)),
                (params.viscosity, &lap_velocity(&s.u)),
            ])?;
            s.p = project(&w, 1.0, tol)?.potential.zero_mean();
        }
        Ok(s)
    }

    pub fn grid(&self) -> &GridSpec {
        self.phi.grid()
    }
}

/// By-products of a step, for diagnostics and tests.
#[derive(Clone, Debug)]
pub struct StepTrace {
    pub system: XiSystem,
    pub xi1: f64,
    pub xi2: f64,
    /// `sqrt(E1 + δ)` at the lagged level.
    pub scale: f64,
    pub substeps: Substeps,
}

/// Coefficients of the 2×2 system from the r- and q-equations.
pub fn assemble_xi_system(
    state: &SchemeState,
    sub: &Substeps,
    ex: &Explicit,
    params: &PhysParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<XiSystem> {
    let s = ex.scale;
    let t1 = state.t + dt;
    let e = (t1 / params.horizon).exp();
    let pr = pairings(sub, ex, opts.pairing);
    let dphi0 = CellField::combine(&[(1.0, &sub.ch[0].phi), (-1.0, &state.phi)])?;
    let fp = |f: &CellField| crate::grid::dot_cell(&ex.f_prime, f).expect("same grid");
    let h = 0.5 / s;
    Ok(XiSystem {
        a0: state.sav.r / dt + h * (fp(&dphi0) / dt + pr[0].mu_adv - pr[0].force),
        a1: s / dt - h * (fp(&sub.ch[1].phi) / dt + pr[1].mu_adv - pr[1].force),
        a2: h * pr[2].force,
        b0: state.sav.q / dt + e * pr[0].convection,
        b1: -e * pr[1].convection,
        b2: (1.0 / dt + 1.0 / params.horizon) / e - e * pr[2].convection,
    })
}

pub fn step_first_order(
    state: &SchemeState,
    params: &PhysParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<SchemeState> {
    step_first_order_traced(state, params, dt, opts).map(|(s, _)| s)
}

pub fn step_first_order_traced(
    state: &SchemeState,
    params: &PhysParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<(SchemeState, StepTrace)> {
    crate::check_dt(dt)?;
    let ex = Explicit::new(state.phi.clone(), state.u.clone(), state.mu.clone(), params)?;
    let ch = ch_substeps(&state.phi, &ex, params, dt, opts.tol.ch)?;
    let u_tilde = velocity_substeps(&state.u, &state.p, &ex, params, dt, opts.tol.helmholtz)?;
    let (u, p) = projection_substeps(&u_tilde, &state.p, dt, None, opts.tol.poisson)?;
    let sub = Substeps { ch, u_tilde, u, p };
    let system = assemble_xi_system(state, &sub, &ex, params, dt, opts)?;
    let (xi1, xi2) = solve_xi(&system)?;
    let f = recombine(&sub, xi1, xi2)?;
    let t = state.t + dt;
    let next = SchemeState {
        step: state.step + 1,
        t,
        phi: f.phi,
        mu: f.mu,
        u: f.u,
        u_tilde: f.u_tilde,
        p: f.p,
        sav: SavState {
            r: xi1 * ex.scale,
            q: xi2 * (-t / params.horizon).exp(),
        },
    };
    let trace = StepTrace {
        system,
        xi1,
        xi2,
        scale: ex.scale,
        substeps: sub,
    };
    Ok((next, trace))
}
