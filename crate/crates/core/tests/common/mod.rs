#![allow(dead_code)]

use chns_core::grid::{
    advect_scalar, advect_velocity, chemical_force, div_face_to_cell, grad_cell_to_face, lap_cell,
    lap_velocity,
};
use chns_core::model::{potential_f_prime, sav_scale};
use chns_core::{CellField, GridSpec, MacVector, PhysParams, SchemeState};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cell(g: GridSpec, rng: &mut ChaCha8Rng) -> CellField {
    let data = (0..g.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CellField::from_vec(g, data).unwrap()
}

/// Random face field with zero wall-normal entries.
pub fn random_face(g: GridSpec, rng: &mut ChaCha8Rng) -> MacVector {
    let u = (0..g.n_u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let v = (0..g.n_v()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut w = MacVector::from_vecs(g, u, v).unwrap();
    w.clear_normal_boundary();
    w
}

/// Storage indices (u entries first, then v offset by `n_u`) of the faces
/// not lying on a wall.
pub fn interior_faces(g: &GridSpec) -> Vec<usize> {
    let (nx, ny) = (g.nx(), g.ny());
    let mut idx = Vec::new();
    for j in 0..ny {
        for i in 1..nx {
            idx.push(j * (nx + 1) + i);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            idx.push(g.n_u() + j * nx + i);
        }
    }
    idx
}

pub fn face_flat(w: &MacVector) -> Vec<f64> {
    w.u().iter().chain(w.v()).copied().collect()
}

pub fn face_interior(w: &MacVector) -> DVector<f64> {
    let flat = face_flat(w);
    DVector::from_iterator(
        interior_faces(w.grid()).len(),
        interior_faces(w.grid()).into_iter().map(|k| flat[k]),
    )
}

pub fn face_from_interior(g: GridSpec, x: &[f64]) -> MacVector {
    let mut flat = vec![0.0; g.n_u() + g.n_v()];
    for (k, v) in interior_faces(&g).into_iter().zip(x) {
        flat[k] = *v;
    }
    let v = flat.split_off(g.n_u());
    MacVector::from_vecs(g, flat, v).unwrap()
}

pub fn cell_vec(f: &CellField) -> DVector<f64> {
    DVector::from_column_slice(f.data())
}

pub fn cell_from(g: GridSpec, x: &[f64]) -> CellField {
    CellField::from_vec(g, x.to_vec()).unwrap()
}

/// Matrix of a linear cell-to-cell map, column by column.
pub fn probe_cell(g: GridSpec, op: impl Fn(&CellField) -> CellField) -> DMatrix<f64> {
    let n = g.n_cells();
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let y = op(&cell_from(g, &e));
        m.set_column(k, &cell_vec(&y));
    }
    m
}

/// Matrix of a linear map on interior faces.
pub fn probe_face(g: GridSpec, op: impl Fn(&MacVector) -> MacVector) -> DMatrix<f64> {
    let n = interior_faces(&g).len();
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let y = op(&face_from_interior(g, &e));
        m.set_column(k, &face_interior(&y));
    }
    m
}

/// Face gradient, cells to interior faces.
pub fn grad_matrix(g: GridSpec) -> DMatrix<f64> {
    let (nc, nf) = (g.n_cells(), interior_faces(&g).len());
    let mut m = DMatrix::zeros(nf, nc);
    for k in 0..nc {
        let mut e = vec![0.0; nc];
        e[k] = 1.0;
        m.set_column(k, &face_interior(&grad_cell_to_face(&cell_from(g, &e))));
    }
    m
}

/// Cell divergence of interior faces.
pub fn div_matrix(g: GridSpec) -> DMatrix<f64> {
    let (nc, nf) = (g.n_cells(), interior_faces(&g).len());
    let mut m = DMatrix::zeros(nc, nf);
    for k in 0..nf {
        let mut e = vec![0.0; nf];
        e[k] = 1.0;
        m.set_column(k, &cell_vec(&div_face_to_cell(&face_from_interior(g, &e))));
    }
    m
}

pub fn rel_diff_cell(a: &CellField, b: &CellField) -> f64 {
    let d = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    d / a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE)
}

pub fn rel_diff_face(a: &MacVector, b: &MacVector) -> f64 {
    let (fa, fb) = (face_flat(a), face_flat(b));
    let d = fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    d / a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// One step solved as a single coupled linear system.
#[derive(Debug)]
pub struct Monolithic {
    pub phi: CellField,
    pub mu: CellField,
    pub u_tilde: MacVector,
    pub u: MacVector,
    pub p: CellField,
    pub r: f64,
    pub q: f64,
    pub xi1: f64,
    pub xi2: f64,
}

/// Data that distinguishes backward Euler from BDF2 in the coupled system.
pub struct TimeLevels<'a> {
    /// Scheme coefficient: Δt or 2Δt/3.
    pub c: f64,
    pub t_next: f64,
    pub phi_base: CellField,
    pub u_base: MacVector,
    /// `(r_base, q_base)` such that the discrete derivative is `(x − base)/c`.
    pub r_base: f64,
    pub q_base: f64,
    /// Explicit level for the nonlinear terms.
    pub phi_ex: &'a CellField,
    pub u_ex: &'a MacVector,
    pub mu_ex: &'a CellField,
    pub p_n: &'a CellField,
    /// Viscosity of the rotational correction, if any.
    pub rotational: Option<f64>,
}

/// Unknown ordering: φ, μ, ũ, u (interior faces), p, r, q.
///
/// The equations are the unsplit scheme with ξ1 = r/s and ξ2 = q·e^{t/T}:
///
/// * `φ − McΔμ + (c/s)∇·(ūφ̄) r = φ_base`
/// * `μ + Δφ − γ_eff φ − (F′/s) r = 0`
/// * `(I − νcΔ)ũ + c·e·(ū·∇)ū q − (c/s) μ̄∇φ̄ r = u_base − c∇pⁿ`
/// * `u − ũ + c∇(p − pⁿ + ν∇·ũ) = 0`, `∇·u = 0`, `Σp = 0`
/// * `(r − r_base)/c = (1/2s)[(F′, φ − φ_base)/c + (μ, ∇·(ūφ̄)) − (ũ, μ̄∇φ̄)]`
/// * `(q − q_base)/c = −q/T + e((ū·∇)ū, ũ)`
pub fn monolithic_step(g: GridSpec, params: &PhysParams, lv: &TimeLevels) -> Monolithic {
    let nc = g.n_cells();
    let nf = interior_faces(&g).len();
    let (o_phi, o_mu, o_ut, o_u, o_p) = (0, nc, 2 * nc, 2 * nc + nf, 2 * nc + 2 * nf);
    let o_r = 3 * nc + 2 * nf;
    let o_q = o_r + 1;
    let n = o_q + 1;
    let c = lv.c;
    let h2 = g.cell_area();

    let lap = probe_cell(g, lap_cell);
    let lapv = probe_face(g, lap_velocity);
    let grad = grad_matrix(g);
    let div = div_matrix(g);

    let s = sav_scale(lv.phi_ex, params).unwrap();
    let fp = cell_vec(&potential_f_prime(lv.phi_ex, params));
    let adv = cell_vec(&advect_scalar(lv.u_ex, lv.phi_ex).unwrap());
    let force = face_interior(&chemical_force(lv.mu_ex, lv.phi_ex).unwrap());
    let conv = face_interior(&advect_velocity(lv.u_ex));
    let e = (lv.t_next / params.horizon).exp();
    let ge = params.gamma_eff();
    let m_c = params.mobility * c;

    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    let eye_c = DMatrix::<f64>::identity(nc, nc);
    let eye_f = DMatrix::<f64>::identity(nf, nf);

    // phase equation
    a.view_mut((o_phi, o_phi), (nc, nc)).copy_from(&eye_c);
    a.view_mut((o_phi, o_mu), (nc, nc)).copy_from(&(&lap * -m_c));
    a.view_mut((o_phi, o_r), (nc, 1)).copy_from(&(&adv * (c / s)));
    b.rows_mut(o_phi, nc).copy_from(&cell_vec(&lv.phi_base));

    // chemical potential
    a.view_mut((o_mu, o_mu), (nc, nc)).copy_from(&eye_c);
    a.view_mut((o_mu, o_phi), (nc, nc)).copy_from(&(&lap - &eye_c * ge));
    a.view_mut((o_mu, o_r), (nc, 1)).copy_from(&(&fp * (-1.0 / s)));

    // intermediate velocity
    a.view_mut((o_ut, o_ut), (nf, nf)).copy_from(&(&eye_f - &lapv * (params.viscosity * c)));
    a.view_mut((o_ut, o_q), (nf, 1)).copy_from(&(&conv * (c * e)));
    a.view_mut((o_ut, o_r), (nf, 1)).copy_from(&(&force * (-c / s)));
    let gp_n = &grad * cell_vec(lv.p_n);
    b.rows_mut(o_ut, nf)
        .copy_from(&(face_interior(&lv.u_base) - &gp_n * c));

    // projection
    a.view_mut((o_u, o_u), (nf, nf)).copy_from(&eye_f);
    let mut ut_block = -eye_f.clone();
    if let Some(nu) = lv.rotational {
        ut_block += &grad * &div * (c * nu);
    }
    a.view_mut((o_u, o_ut), (nf, nf)).copy_from(&ut_block);
    a.view_mut((o_u, o_p), (nf, nc)).copy_from(&(&grad * c));
    b.rows_mut(o_u, nf).copy_from(&(&gp_n * c));

    // incompressibility; the last row is redundant and fixes the gauge instead
    a.view_mut((o_p, o_u), (nc - 1, nf)).copy_from(&div.rows(0, nc - 1));
    for k in 0..nc {
        a[(o_p + nc - 1, o_p + k)] = 1.0;
    }

    // r equation
    let k = 0.5 / s;
    a[(o_r, o_r)] = 1.0 / c;
    for i in 0..nc {
        a[(o_r, o_phi + i)] = -k * h2 * fp[i] / c;
        a[(o_r, o_mu + i)] = -k * h2 * adv[i];
    }
    for i in 0..nf {
        a[(o_r, o_ut + i)] = k * h2 * force[i];
    }
    b[o_r] = lv.r_base / c - k * h2 * fp.dot(&cell_vec(&lv.phi_base)) / c;

    // q equation
    a[(o_q, o_q)] = 1.0 / c + 1.0 / params.horizon;
    for i in 0..nf {
        a[(o_q, o_ut + i)] = -e * h2 * conv[i];
    }
    b[o_q] = lv.q_base / c;

    let x = a.lu().solve(&b).expect("coupled system is nonsingular");
    let r = x[o_r];
    let q = x[o_q];
    Monolithic {
        phi: cell_from(g, x.rows(o_phi, nc).as_slice()),
        mu: cell_from(g, x.rows(o_mu, nc).as_slice()),
        u_tilde: face_from_interior(g, x.rows(o_ut, nf).as_slice()),
        u: face_from_interior(g, x.rows(o_u, nf).as_slice()),
        p: cell_from(g, x.rows(o_p, nc).as_slice()),
        r,
        q,
        xi1: r / s,
        xi2: q * e,
    }
}

/// Coupled backward-Euler step from `s`.
pub fn monolithic_first(s: &SchemeState, params: &PhysParams, dt: f64) -> Monolithic {
    let lv = TimeLevels {
        c: dt,
        t_next: s.t + dt,
        phi_base: s.phi.clone(),
        u_base: s.u.clone(),
        r_base: s.sav.r,
        q_base: s.sav.q,
        phi_ex: &s.phi,
        u_ex: &s.u,
        mu_ex: &s.mu,
        p_n: &s.p,
        rotational: None,
    };
    monolithic_step(*s.grid(), params, &lv)
}

/// Coupled BDF2 step from levels `cur` and `prev`.
pub fn monolithic_second(
    cur: &SchemeState,
    prev: &SchemeState,
    params: &PhysParams,
    dt: f64,
) -> Monolithic {
    let third = 1.0 / 3.0;
    let phi_bar = CellField::combine(&[(2.0, &cur.phi), (-1.0, &prev.phi)]).unwrap();
    let u_bar = MacVector::combine(&[(2.0, &cur.u), (-1.0, &prev.u)]).unwrap();
    let mu_bar = CellField::combine(&[(2.0, &cur.mu), (-1.0, &prev.mu)]).unwrap();
    let lv = TimeLevels {
        c: 2.0 * dt / 3.0,
        t_next: cur.t + dt,
        phi_base: CellField::combine(&[(4.0 * third, &cur.phi), (-third, &prev.phi)]).unwrap(),
        u_base: MacVector::combine(&[(4.0 * third, &cur.u), (-third, &prev.u)]).unwrap(),
        r_base: 4.0 * third * cur.sav.r - third * prev.sav.r,
        q_base: 4.0 * third * cur.sav.q - third * prev.sav.q,
        phi_ex: &phi_bar,
        u_ex: &u_bar,
        mu_ex: &mu_bar,
        p_n: &cur.p,
        rotational: Some(params.viscosity),
    };
    monolithic_step(*cur.grid(), params, &lv)
}
