//! Second-order centered MAC stencils and h-weighted inner products.
//!
//! Every operator treats the wall-normal velocity entries as zero whatever is
//! stored there, and leaves them zero in its output. Sums run over the
//! row-major storage order, so reductions are bitwise reproducible.

use super::{CellField, MacVector, NodeField};
use crate::error::Result;

/// Face gradient of a cell field; zero normal derivative on the walls.
pub fn grad_cell_to_face(p: &CellField) -> MacVector {
    let g = *p.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = MacVector::zeros(g);
    {
        let u = out.u_mut();
        for j in 0..ny {
            for i in 1..nx {
                u[j * (nx + 1) + i] = (p.get(i, j) - p.get(i - 1, j)) / hx;
            }
        }
    }
    let v = out.v_mut();
    for j in 1..ny {
        for i in 0..nx {
            v[j * nx + i] = (p.get(i, j) - p.get(i, j - 1)) / hy;
        }
    }
    out
}

/// Cell divergence of a face field.
pub fn div_face_to_cell(w: &MacVector) -> CellField {
    let g = *w.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = CellField::zeros(g);
    let d = out.data_mut();
    for j in 0..ny {
        for i in 0..nx {
            d[j * nx + i] = (wu(w, i + 1, j) - wu(w, i, j)) / hx
                + (wv(w, i, j + 1) - wv(w, i, j)) / hy;
        }
    }
    out
}

/// Five-point Laplacian with mirrored (homogeneous Neumann) ghost cells.
///
/// Identical to `div_face_to_cell(grad_cell_to_face(f))`.
pub fn lap_cell(f: &CellField) -> CellField {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (ix2, iy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
    let mut out = CellField::zeros(g);
    let d = out.data_mut();
    for j in 0..ny {
        for i in 0..nx {
            let c = f.get(i, j);
            let mut sx = 0.0;
            if i > 0 {
                sx += f.get(i - 1, j) - c;
            }
            if i + 1 < nx {
                sx += f.get(i + 1, j) - c;
            }
            let mut sy = 0.0;
            if j > 0 {
                sy += f.get(i, j - 1) - c;
            }
            if j + 1 < ny {
                sy += f.get(i, j + 1) - c;
            }
            d[j * nx + i] = sx * ix2 + sy * iy2;
        }
    }
    out
}

/// Component-wise five-point Laplacian with no-slip ghosting.
pub fn lap_velocity(w: &MacVector) -> MacVector {
    let g = *w.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (ix2, iy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
    let mut out = MacVector::zeros(g);
    {
        let u = out.u_mut();
        for j in 0..ny {
            for i in 1..nx {
                let c = wu(w, i, j);
                let (s, n) = u_ns(w, i, j);
                u[j * (nx + 1) + i] =
                    (wu(w, i + 1, j) - 2.0 * c + wu(w, i - 1, j)) * ix2 + (n - 2.0 * c + s) * iy2;
            }
        }
    }
    let v = out.v_mut();
    for j in 1..ny {
        for i in 0..nx {
            let c = wv(w, i, j);
            let (west, east) = v_we(w, i, j);
            v[j * nx + i] =
                (east - 2.0 * c + west) * ix2 + (wv(w, i, j + 1) - 2.0 * c + wv(w, i, j - 1)) * iy2;
        }
    }
    out
}

/// Conservative transport term `∇·(w f)` with two-point face averages of `f`.
pub fn advect_scalar(w: &MacVector, f: &CellField) -> Result<CellField> {
    w.grid().ensure_same(f.grid())?;
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let flux_x = |i: usize, j: usize| {
        if i == 0 || i == nx {
            0.0
        } else {
            w.u_at(i, j) * 0.5 * (f.get(i - 1, j) + f.get(i, j))
        }
    };
    let flux_y = |i: usize, j: usize| {
        if j == 0 || j == ny {
            0.0
        } else {
            w.v_at(i, j) * 0.5 * (f.get(i, j - 1) + f.get(i, j))
        }
    };
    let mut out = CellField::zeros(g);
    let d = out.data_mut();
    for j in 0..ny {
        for i in 0..nx {
            d[j * nx + i] =
                (flux_x(i + 1, j) - flux_x(i, j)) / hx + (flux_y(i, j + 1) - flux_y(i, j)) / hy;
        }
    }
    Ok(out)
}

/// Centered convection `(w·∇)w` at face midpoints, four-point averages for
/// the cross components.
pub fn advect_velocity(w: &MacVector) -> MacVector {
    let g = *w.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = MacVector::zeros(g);
    {
        let u = out.u_mut();
        for j in 0..ny {
            for i in 1..nx {
                let c = wu(w, i, j);
                let dudx = (wu(w, i + 1, j) - wu(w, i - 1, j)) / (2.0 * hx);
                let (s, n) = u_ns(w, i, j);
                let dudy = (n - s) / (2.0 * hy);
                let vbar = 0.25
                    * (wv(w, i - 1, j) + wv(w, i, j) + wv(w, i - 1, j + 1) + wv(w, i, j + 1));
                u[j * (nx + 1) + i] = c * dudx + vbar * dudy;
            }
        }
    }
    let v = out.v_mut();
    for j in 1..ny {
        for i in 0..nx {
            let c = wv(w, i, j);
            let dvdy = (wv(w, i, j + 1) - wv(w, i, j - 1)) / (2.0 * hy);
            let (west, east) = v_we(w, i, j);
            let dvdx = (east - west) / (2.0 * hx);
            let ubar =
                0.25 * (wu(w, i, j - 1) + wu(w, i + 1, j - 1) + wu(w, i, j) + wu(w, i + 1, j));
            v[j * nx + i] = ubar * dvdx + c * dvdy;
        }
    }
    out
}

/// Capillary forcing `μ∇φ`: face-averaged μ times the face gradient of φ.
pub fn chemical_force(mu: &CellField, phi: &CellField) -> Result<MacVector> {
    mu.grid().ensure_same(phi.grid())?;
    let g = *phi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = MacVector::zeros(g);
    {
        let u = out.u_mut();
        for j in 0..ny {
            for i in 1..nx {
                let m = 0.5 * (mu.get(i - 1, j) + mu.get(i, j));
                u[j * (nx + 1) + i] = m * (phi.get(i, j) - phi.get(i - 1, j)) / hx;
            }
        }
    }
    let v = out.v_mut();
    for j in 1..ny {
        for i in 0..nx {
            let m = 0.5 * (mu.get(i, j - 1) + mu.get(i, j));
            v[j * nx + i] = m * (phi.get(i, j) - phi.get(i, j - 1)) / hy;
        }
    }
    Ok(out)
}

/// Scalar vorticity `∂v/∂x − ∂u/∂y` at grid nodes.
///
/// Wall nodes use the odd-reflection ghosts of the tangential component,
/// which makes the corner values vanish for fields with zero normal
/// boundary values.
pub fn curl_at_nodes(w: &MacVector) -> NodeField {
    let g = *w.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let mut data = Vec::with_capacity(g.n_nodes());
    for j in 0..=ny {
        for i in 0..=nx {
            let dvdx = if j == 0 || j == ny {
                0.0
            } else {
                let west = if i == 0 { -wv(w, 0, j) } else { wv(w, i - 1, j) };
                let east = if i == nx { -wv(w, nx - 1, j) } else { wv(w, i, j) };
                (east - west) / hx
            };
            let dudy = if i == 0 || i == nx {
                0.0
            } else {
                let south = if j == 0 { -wu(w, i, 0) } else { wu(w, i, j - 1) };
                let north = if j == ny { -wu(w, i, ny - 1) } else { wu(w, i, j) };
                (north - south) / hy
            };
            data.push(dvdx - dudy);
        }
    }
    NodeField { grid: g, data }
}

/// `hx·hy·Σ a·b` over cells.
pub fn dot_cell(a: &CellField, b: &CellField) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    let s: f64 = a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum();
    Ok(s * a.grid().cell_area())
}

/// `hx·hy·Σ a·b` over all u-faces and v-faces.
pub fn dot_face(a: &MacVector, b: &MacVector) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    let su: f64 = a.u().iter().zip(b.u()).map(|(x, y)| x * y).sum();
    let sv: f64 = a.v().iter().zip(b.v()).map(|(x, y)| x * y).sum();
    Ok((su + sv) * a.grid().cell_area())
}

/// Trapezoidal node inner product (edge nodes ½, corners ¼).
pub fn dot_node(a: &NodeField, b: &NodeField) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    let g = a.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mut s = 0.0;
    for j in 0..=ny {
        let wy = if j == 0 || j == ny { 0.5 } else { 1.0 };
        for i in 0..=nx {
            let wx = if i == 0 || i == nx { 0.5 } else { 1.0 };
            s += wx * wy * a.get(i, j) * b.get(i, j);
        }
    }
    Ok(s * g.cell_area())
}

pub fn norm_l2_cell(f: &CellField) -> f64 {
    let s: f64 = f.data().iter().map(|x| x * x).sum();
    (s * f.grid().cell_area()).sqrt()
}

pub fn norm_l2_face(w: &MacVector) -> f64 {
    let s: f64 = w.u().iter().chain(w.v()).map(|x| x * x).sum();
    (s * w.grid().cell_area()).sqrt()
}

pub fn norm_l2_node(f: &NodeField) -> f64 {
    dot_node(f, f).expect("same grid").max(0.0).sqrt()
}

/// `‖∇f‖` for a cell field, using the face gradient.
pub fn norm_h1_semi(f: &CellField) -> f64 {
    norm_l2_face(&grad_cell_to_face(f))
}

/// `⟨−Δw, w⟩` for the no-slip velocity Laplacian, i.e. `‖∇w‖²`.
pub fn velocity_grad_energy(w: &MacVector) -> f64 {
    let lw = lap_velocity(w);
    // wall-normal entries of lw are zero, so stored boundary values drop out
    -dot_face(&lw, w).expect("same grid")
}

#[inline]
fn wu(w: &MacVector, i: usize, j: usize) -> f64 {
    if i == 0 || i == w.grid().nx() {
        0.0
    } else {
        w.u_at(i, j)
    }
}

#[inline]
fn wv(w: &MacVector, i: usize, j: usize) -> f64 {
    if j == 0 || j == w.grid().ny() {
        0.0
    } else {
        w.v_at(i, j)
    }
}

/// South and north neighbours of u-face `(i, j)`, odd-reflected at walls.
#[inline]
fn u_ns(w: &MacVector, i: usize, j: usize) -> (f64, f64) {
    let c = wu(w, i, j);
    let ny = w.grid().ny();
    let s = if j == 0 { -c } else { wu(w, i, j - 1) };
    let n = if j + 1 == ny { -c } else { wu(w, i, j + 1) };
    (s, n)
}

/// West and east neighbours of v-face `(i, j)`, odd-reflected at walls.
#[inline]
fn v_we(w: &MacVector, i: usize, j: usize) -> (f64, f64) {
    let c = wv(w, i, j);
    let nx = w.grid().nx();
    let west = if i == 0 { -c } else { wv(w, i - 1, j) };
    let east = if i + 1 == nx { -c } else { wv(w, i + 1, j) };
    (west, east)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn grid(n: usize) -> GridSpec {
        GridSpec::unit_square(n, n).unwrap()
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let p = CellField::constant(grid(8), 3.5);
        assert_eq!(grad_cell_to_face(&p).max_abs(), 0.0);
        assert_eq!(lap_cell(&p).max_abs(), 0.0);
    }

    #[test]
    fn gradient_of_linear_field_is_exact() {
        let g = grid(10);
        let p = CellField::from_fn(g, |x, _| x);
        let w = grad_cell_to_face(&p);
        for j in 0..10 {
            for i in 1..10 {
                assert!((w.u_at(i, j) - 1.0).abs() < 1e-12);
            }
            assert_eq!(w.u_at(0, j), 0.0);
            assert_eq!(w.u_at(10, j), 0.0);
        }
        assert!(w.v().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn cosine_mode_is_an_eigenfield_of_lap_cell() {
        let n = 16;
        let g = grid(n);
        let h = g.hx();
        for k in 1..4 {
            let kk = k as f64;
            let f = CellField::from_fn(g, |x, _| (kk * PI * x).cos());
            let lam = -(2.0 / (h * h)) * (1.0 - (kk * PI * h).cos());
            let lf = lap_cell(&f);
            for (a, b) in lf.data().iter().zip(f.data()) {
                assert!((a - lam * b).abs() < 1e-10 * lam.abs());
            }
        }
    }

    #[test]
    fn lap_cell_equals_div_grad() {
        let g = grid(7);
        let f = CellField::from_fn(g, |x, y| (3.0 * x).sin() + x * y * y);
        let a = lap_cell(&f);
        let b = div_face_to_cell(&grad_cell_to_face(&f));
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_inputs_give_zero() {
        let g = grid(6);
        let w = MacVector::zeros(g);
        assert_eq!(div_face_to_cell(&w).max_abs(), 0.0);
        assert_eq!(lap_velocity(&w).max_abs(), 0.0);
        assert_eq!(advect_velocity(&w).max_abs(), 0.0);
        let f = CellField::from_fn(g, |x, y| x + y);
        assert_eq!(advect_scalar(&w, &f).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn chemical_force_factorizes_for_constant_mu() {
        let g = grid(9);
        let phi = CellField::from_fn(g, |x, y| (PI * x).cos() * y);
        let mu = CellField::constant(g, 2.5);
        let f = chemical_force(&mu, &phi).unwrap();
        let gphi = grad_cell_to_face(&phi).scaled(2.5);
        for (a, b) in f.u().iter().chain(f.v()).zip(gphi.u().iter().chain(gphi.v())) {
            assert!((a - b).abs() < 1e-12);
        }
        let flat = CellField::constant(g, 0.7);
        assert_eq!(chemical_force(&mu, &flat).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = grid(8);
        assert_eq!(norm_l2_cell(&CellField::zeros(g)), 0.0);
        assert!((norm_l2_cell(&CellField::constant(g, 1.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dot_products_reject_mismatched_grids() {
        let a = CellField::zeros(grid(4));
        let b = CellField::zeros(grid(6));
        assert!(dot_cell(&a, &b).is_err());
        let w = MacVector::zeros(grid(4));
        assert!(advect_scalar(&w, &b).is_err());
    }
}
