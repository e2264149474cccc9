//! BDF2 MSAV step with rotational pressure correction.
//!
//! Nonlinear terms use the linear extrapolation `2xⁿ − xⁿ⁻¹`. The pressure
//! update of each substep family carries the rotational term `−ν∇·ũ_i`, and
//! the auxiliary sequences `g^{n+1} = gⁿ + ν∇·ũ^{n+1}`, `H = p + g` are kept
//! for the energy audit.

use crate::error::Result;
use crate::grid::{div_face_to_cell, dot_cell, CellField, MacVector};
use crate::model::PhysParams;
use crate::msav_first::{step_first_order, SavState, SchemeState};
use crate::substeps::{
    ch_substeps, pairings, projection_substeps, recombine, solve_xi, velocity_substeps, Explicit,
    StepOptions, Substeps, XiSystem,
};

/// Two consecutive levels plus the rotational auxiliaries.
#[derive(Clone, Debug)]
pub struct SchemeState2 {
    pub current: SchemeState,
    pub previous: SchemeState,
    pub g: CellField,
    pub h: CellField,
}

/// `2xⁿ − xⁿ⁻¹` for the explicitly treated fields.
#[derive(Clone, Debug)]
pub struct Extrapolants {
    pub phi: CellField,
    pub u: MacVector,
    pub mu: CellField,
}

impl Extrapolants {
    pub fn new(cur: &SchemeState, prev: &SchemeState) -> Result<Self> {
        Ok(Self {
            phi: CellField::combine(&[(2.0, &cur.phi), (-1.0, &prev.phi)])?,
            u: MacVector::combine(&[(2.0, &cur.u), (-1.0, &prev.u)])?,
            mu: CellField::combine(&[(2.0, &cur.mu), (-1.0, &prev.mu)])?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct StepTrace2 {
    pub system: XiSystem,
    pub xi1: f64,
    pub xi2: f64,
    pub scale: f64,
    pub substeps: Substeps,
}

/// Produces the second level with one backward-Euler step.
pub fn bootstrap(
    state0: &SchemeState,
    params: &PhysParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<SchemeState2> {
    let s1 = step_first_order(state0, params, dt, opts)?;
    let g = div_face_to_cell(&s1.u_tilde).scaled(params.viscosity);
    let h = CellField::combine(&[(1.0, &s1.p), (1.0, &g)])?;
    Ok(SchemeState2 {
        current: s1,
        previous: state0.clone(),
        g,
        h,
    })
}

pub fn assemble_xi_system2(
    s2: &SchemeState2,
    sub: &Substeps,
    ex: &Explicit,
    params: &PhysParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<XiSystem> {
    let (cur, prev) = (&s2.current, &s2.previous);
    let s = ex.scale;
    let t1 = cur.t + dt;
    let e = (t1 / params.horizon).exp();
    let pr = pairings(sub, ex, opts.pairing);
    let inv = 1.0 / (2.0 * dt);
    let d0 = CellField::combine(&[(3.0, &sub.ch[0].phi), (-4.0, &cur.phi), (1.0, &prev.phi)])?;
    let fp = |f: &CellField| dot_cell(&ex.f_prime, f).expect("same grid");
    let h = 0.5 / s;
    Ok(XiSystem {
        a0: (4.0 * cur.sav.r - prev.sav.r) * inv + h * (fp(&d0) * inv + pr[0].mu_adv - pr[0].force),
        a1: 3.0 * s * inv - h * (3.0 * fp(&sub.ch[1].phi) * inv + pr[1].mu_adv - pr[1].force),
        a2: h * pr[2].force,
        b0: (4.0 * cur.sav.q - prev.sav.q) * inv + e * pr[0].convection,
        b1: -e * pr[1].convection,
        b2: (3.0 * inv + 1.0 / params.horizon) / e - e * pr[2].convection,
    })
}

pub fn step_second_order(
    s2: &SchemeState2,
    params: &PhysParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<SchemeState2> {
    step_second_order_traced(s2, params, dt, opts).map(|(s, _)| s)
}

pub fn step_second_order_traced(
    s2: &SchemeState2,
    params: &PhysParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<(SchemeState2, StepTrace2)> {
    crate::check_dt(dt)?;
    let (cur, prev) = (&s2.current, &s2.previous);
    let bar = Extrapolants::new(cur, prev)?;
    let ex = Explicit::new(bar.phi, bar.u, bar.mu, params)?;
    let c = 2.0 * dt / 3.0;
    let third = 1.0 / 3.0;
    let phi_base = CellField::combine(&[(4.0 * third, &cur.phi), (-third, &prev.phi)])?;
    let u_base = MacVector::combine(&[(4.0 * third, &cur.u), (-third, &prev.u)])?;
    let ch = ch_substeps(&phi_base, &ex, params, c, opts.tol.ch)?;
    let u_tilde = velocity_substeps(&u_base, &cur.p, &ex, params, c, opts.tol.helmholtz)?;
    let (u, p) = projection_substeps(
        &u_tilde,
        &cur.p,
        c,
        Some(params.viscosity),
        opts.tol.poisson,
    )?;
    let sub = Substeps { ch, u_tilde, u, p };
    let system = assemble_xi_system2(s2, &sub, &ex, params, dt, opts)?;
    let (xi1, xi2) = solve_xi(&system)?;
    let f = recombine(&sub, xi1, xi2)?;
    let t = cur.t + dt;
    let g = CellField::combine(&[(1.0, &s2.g), (params.viscosity, &div_face_to_cell(&f.u_tilde))])?;
    let h = CellField::combine(&[(1.0, &f.p), (1.0, &g)])?;
    let next = SchemeState {
        step: cur.step + 1,
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
    let out = SchemeState2 {
        previous: cur.clone(),
        current: next,
        g,
        h,
    };
    let trace = StepTrace2 {
        system,
        xi1,
        xi2,
        scale: ex.scale,
        substeps: sub,
    };
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norm_l2_cell, GridSpec};
    use crate::model::InitialData;

    #[test]
    fn fixed_point_follows_bdf2_q_recurrence() {
        let p = PhysParams { delta: 0.5, ..PhysParams::default() };
        let g = GridSpec::unit_square(8, 8).unwrap();
        let s0 = SchemeState::initial(g, &p, &InitialData::FixedPoint).unwrap();
        let dt = 0.01;
        let opts = StepOptions::default();
        let mut s = bootstrap(&s0, &p, dt, &opts).unwrap();
        for _ in 0..5 {
            let (qn, qm) = (s.current.sav.q, s.previous.sav.q);
            s = step_second_order(&s, &p, dt, &opts).unwrap();
            let expect = (4.0 * qn - qm) / (3.0 + 2.0 * dt / p.horizon);
            assert!((s.current.sav.q - expect).abs() < 1e-12);
            assert!((s.current.sav.r - s0.sav.r).abs() < 1e-12);
            assert!(s.current.u.max_abs() < 1e-14);
        }
    }

    #[test]
    fn g_recursion_and_invariants() {
        let p = PhysParams::default();
        let g = GridSpec::unit_square(12, 12).unwrap();
        let s0 = SchemeState::initial(g, &p, &InitialData::Benchmark).unwrap();
        let opts = StepOptions::default();
        let s1 = bootstrap(&s0, &p, 0.01, &opts).unwrap();
        let s2 = step_second_order(&s1, &p, 0.01, &opts).unwrap();
        let mut dg = s2.g.clone();
        dg.axpy(-1.0, &s1.g).unwrap();
        dg.axpy(-p.viscosity, &div_face_to_cell(&s2.current.u_tilde)).unwrap();
        assert!(dg.max_abs() < 1e-13);
        assert!(norm_l2_cell(&div_face_to_cell(&s2.current.u)) < 1e-9);
        assert!((s2.current.phi.sum() - s0.phi.sum()).abs() < 1e-11 * 144.0);
        assert!((s2.current.t - 0.02).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_equals_first_order_step() {
        let p = PhysParams::default();
        let g = GridSpec::unit_square(8, 8).unwrap();
        let s0 = SchemeState::initial(g, &p, &InitialData::Benchmark).unwrap();
        let opts = StepOptions::default();
        let b = bootstrap(&s0, &p, 0.02, &opts).unwrap();
        let f = step_first_order(&s0, &p, 0.02, &opts).unwrap();
        assert_eq!(b.current.phi, f.phi);
        assert_eq!(b.current.u, f.u);
        assert_eq!(b.current.sav, f.sav);
        assert_eq!(b.previous.phi, s0.phi);
    }
}
