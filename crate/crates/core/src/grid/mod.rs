//! Uniform MAC staggered grid and the field containers that live on it.
//!
//! Scalars (phase, chemical potential, pressure and the auxiliary `g`/`H`
//! sequence) sit at cell centers. Velocity components sit on faces: the
//! x-component on vertical faces, the y-component on horizontal faces.
//!
//! Storage is row-major with the x index running fastest:
//!
//! * cell `(i, j)` at `((i+½)hx, (j+½)hy)` has index `j*nx + i`,
//! * u-face `(i, j)` at `(i·hx, (j+½)hy)` has index `j*(nx+1) + i`,
//! * v-face `(i, j)` at `((i+½)hx, j·hy)` has index `j*nx + i`,
//! * node `(i, j)` at `(i·hx, j·hy)` has index `j*(nx+1) + i`.

mod ops;
pub mod snapshot;

pub use ops::*;

use std::fmt;

use crate::error::{Error, Result};

/// Smallest supported cell count per direction.
pub const MIN_CELLS: usize = 4;

/// Uniform rectangular grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if nx < MIN_CELLS || ny < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_CELLS} cells per direction, got {nx}x{ny}"
            )));
        }
        if !(x1 - x0 > 0.0) || !(y1 - y0 > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "empty domain [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Self {
            nx,
            ny,
            x0,
            x1,
            y0,
            y1,
        })
    }

    /// `nx × ny` cells on `(0,1)×(0,1)`.
    pub fn unit_square(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, 0.0, 1.0, 0.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn extents(&self) -> (f64, f64, f64, f64) {
        (self.x0, self.x1, self.y0, self.y1)
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_u(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn n_v(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.hx(),
            self.y0 + (j as f64 + 0.5) * self.hy(),
        )
    }

    pub fn u_face(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + i as f64 * self.hx(),
            self.y0 + (j as f64 + 0.5) * self.hy(),
        )
    }

    pub fn v_face(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.hx(),
            self.y0 + j as f64 * self.hy(),
        )
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + i as f64 * self.hx(),
            self.y0 + j as f64 * self.hy(),
        )
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} on [{}, {}]x[{}, {}]",
            self.nx, self.ny, self.x0, self.x1, self.y0, self.y1
        )
    }
}

/// Boundary treatment used by the stencils.
///
/// * `NeumannCell`: ghost cells mirror the adjacent interior value (φ, μ).
/// * `NeumannPressure`: same mirror convention for p; the face gradient on
///   the wall is zero.
/// * `DirichletVelocity`: normal components sit on the wall and are zero;
///   tangential ghosts are odd reflections (ghost = −interior).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcKind {
    NeumannCell,
    DirichletVelocity,
    NeumannPressure,
}

/// Cell-centered scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl CellField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.n_cells()],
        }
    }

    /// Samples `f(x, y)` at cell centers.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.n_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                data.push(f(x, y));
            }
        }
        Self { grid, data }
    }

    pub fn from_vec(grid: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.n_cells() {
            return Err(Error::InvalidInput(format!(
                "cell field needs {} values, got {}",
                grid.n_cells(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let nx = self.grid.nx;
        self.data[j * nx + i] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &CellField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
        Ok(())
    }

    /// `Σ c_k f_k` over fields on a common grid.
    pub fn combine(terms: &[(f64, &CellField)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| {
            Error::InvalidInput("empty linear combination".to_string())
        })?;
        let mut out = CellField::zeros(first.grid);
        for (c, f) in terms {
            out.axpy(*c, f)?;
        }
        Ok(out)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Area-weighted mean over the domain.
    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Copy with the mean subtracted.
    pub fn zero_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Staggered vector field: `u` on vertical faces, `v` on horizontal faces.
#[derive(Clone, Debug, PartialEq)]
pub struct MacVector {
    grid: GridSpec,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl MacVector {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            u: vec![0.0; grid.n_u()],
            v: vec![0.0; grid.n_v()],
        }
    }

    /// Samples `(fu, fv)` at the respective face midpoints, including the
    /// boundary faces.
    pub fn from_fns(
        grid: GridSpec,
        fu: impl Fn(f64, f64) -> f64,
        fv: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut u = Vec::with_capacity(grid.n_u());
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let (x, y) = grid.u_face(i, j);
                u.push(fu(x, y));
            }
        }
        let mut v = Vec::with_capacity(grid.n_v());
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.v_face(i, j);
                v.push(fv(x, y));
            }
        }
        Self { grid, u, v }
    }

    /// Discretely divergence-free field `(∂ψ/∂y, −∂ψ/∂x)` built from a
    /// stream function sampled at grid nodes.
    pub fn from_stream_function(grid: GridSpec, psi: impl Fn(f64, f64) -> f64) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let (hx, hy) = (grid.hx(), grid.hy());
        let mut nodes = Vec::with_capacity(grid.n_nodes());
        for j in 0..=ny {
            for i in 0..=nx {
                let (x, y) = grid.node(i, j);
                nodes.push(psi(x, y));
            }
        }
        let at = |i: usize, j: usize| nodes[j * (nx + 1) + i];
        let mut out = Self::zeros(grid);
        for j in 0..ny {
            for i in 0..=nx {
                out.u[j * (nx + 1) + i] = (at(i, j + 1) - at(i, j)) / hy;
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                out.v[j * nx + i] = -(at(i + 1, j) - at(i, j)) / hx;
            }
        }
        out
    }

    pub fn from_vecs(grid: GridSpec, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != grid.n_u() || v.len() != grid.n_v() {
            return Err(Error::InvalidInput(format!(
                "MAC vector needs {}+{} values, got {}+{}",
                grid.n_u(),
                grid.n_v(),
                u.len(),
                v.len()
            )));
        }
        Ok(Self { grid, u, v })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn v_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[j * (self.grid.nx + 1) + i]
    }

    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.grid.nx + i]
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|v| v.is_finite())
    }

    /// Largest magnitude among the wall-normal boundary entries.
    pub fn normal_boundary_max(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut m: f64 = 0.0;
        for j in 0..ny {
            m = m.max(self.u_at(0, j).abs()).max(self.u_at(nx, j).abs());
        }
        for i in 0..nx {
            m = m.max(self.v_at(i, 0).abs()).max(self.v_at(i, ny).abs());
        }
        m
    }

    /// Zeroes the wall-normal boundary entries.
    pub fn clear_normal_boundary(&mut self) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for j in 0..ny {
            self.u[j * (nx + 1)] = 0.0;
            self.u[j * (nx + 1) + nx] = 0.0;
        }
        for i in 0..nx {
            self.v[i] = 0.0;
            self.v[ny * nx + i] = 0.0;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            u: self.u.iter().map(|&x| f(x)).collect(),
            v: self.v.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|x| a * x)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &MacVector) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (s, o) in self.u.iter_mut().zip(&other.u) {
            *s += a * o;
        }
        for (s, o) in self.v.iter_mut().zip(&other.v) {
            *s += a * o;
        }
        Ok(())
    }

    pub fn combine(terms: &[(f64, &MacVector)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| {
            Error::InvalidInput("empty linear combination".to_string())
        })?;
        let mut out = MacVector::zeros(first.grid);
        for (c, f) in terms {
            out.axpy(*c, f)?;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Scalar field at grid nodes (used for the discrete vorticity).
#[derive(Clone, Debug, PartialEq)]
pub struct NodeField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl NodeField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * (self.grid.nx + 1) + i]
    }
}
