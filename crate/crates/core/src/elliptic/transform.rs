//! Type-II cosine transform diagonalization of the mirrored-ghost Laplacian.
//!
//! With mirrored ghost cells, `cos(kπ(i+½)/n)` is an exact eigenvector of the
//! 1-D second difference with eigenvalue `−(4/h²)·sin²(kπ/(2n))`, so any
//! polynomial in `lap_cell` is diagonal in the 2-D DCT-II basis.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rustdct::{DctPlanner, TransformType2And3};

use crate::grid::GridSpec;

pub(crate) struct CosinePlan {
    nx: usize,
    ny: usize,
    dct_x: Arc<dyn TransformType2And3<f64>>,
    dct_y: Arc<dyn TransformType2And3<f64>>,
    eig_x: Vec<f64>,
    eig_y: Vec<f64>,
}

type PlanKey = (usize, usize, u64, u64);

fn cache() -> &'static RwLock<HashMap<PlanKey, Arc<CosinePlan>>> {
    static CACHE: OnceLock<RwLock<HashMap<PlanKey, Arc<CosinePlan>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// 1-D symbol of the Neumann second difference on `n` cells of width `h`.
pub(crate) fn neumann_symbol(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / (2.0 * n as f64)).sin();
            -4.0 * s * s / (h * h)
        })
        .collect()
}

impl CosinePlan {
    pub(crate) fn for_grid(grid: &GridSpec) -> Arc<CosinePlan> {
        let key = (
            grid.nx(),
            grid.ny(),
            grid.hx().to_bits(),
            grid.hy().to_bits(),
        );
        if let Some(plan) = cache().read().expect("plan cache poisoned").get(&key) {
            return Arc::clone(plan);
        }
        let mut planner = DctPlanner::new();
        let plan = Arc::new(CosinePlan {
            nx: grid.nx(),
            ny: grid.ny(),
            dct_x: planner.plan_dct2(grid.nx()),
            dct_y: planner.plan_dct2(grid.ny()),
            eig_x: neumann_symbol(grid.nx(), grid.hx()),
            eig_y: neumann_symbol(grid.ny(), grid.hy()),
        });
        let mut map = cache().write().expect("plan cache poisoned");
        Arc::clone(map.entry(key).or_insert(plan))
    }

    fn transform(&self, data: &mut [f64], forward: bool) {
        let (nx, ny) = (self.nx, self.ny);
        for row in data.chunks_exact_mut(nx) {
            if forward {
                self.dct_x.process_dct2(row);
            } else {
                self.dct_x.process_dct3(row);
            }
        }
        let mut column = vec![0.0; ny];
        for i in 0..nx {
            for j in 0..ny {
                column[j] = data[j * nx + i];
            }
            if forward {
                self.dct_y.process_dct2(&mut column);
            } else {
                self.dct_y.process_dct3(&mut column);
            }
            for j in 0..ny {
                data[j * nx + i] = column[j];
            }
        }
    }

    /// Solves `p(L) x = b` where `divisor(λ)` returns `p(λ)` for the 2-D
    /// eigenvalue λ, or `None` to zero that mode.
    pub(crate) fn solve(&self, rhs: &[f64], divisor: impl Fn(f64) -> Option<f64>) -> Vec<f64> {
        let mut data = rhs.to_vec();
        self.transform(&mut data, true);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let idx = j * self.nx + i;
                data[idx] = match divisor(self.eig_x[i] + self.eig_y[j]) {
                    Some(d) => data[idx] / d,
                    None => 0.0,
                };
            }
        }
        self.transform(&mut data, false);
        // unnormalized DCT-III after DCT-II scales by n/2 per direction
        let scale = 4.0 / (self.nx * self.ny) as f64;
        for x in &mut data {
            *x *= scale;
        }
        data
    }
}
