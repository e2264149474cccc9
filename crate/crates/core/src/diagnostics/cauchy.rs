use crate::error::{Error, Result};
use crate::grid::{
    norm_h1_semi, norm_l2_cell, norm_l2_face, velocity_grad_energy, CellField, MacVector,
};
use crate::msav_first::SchemeState;

/// The seven tracked error quantities, in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    Phi,
    GradPhi,
    R,
    U,
    GradUTilde,
    P,
    Q,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::Phi,
        Quantity::GradPhi,
        Quantity::R,
        Quantity::U,
        Quantity::GradUTilde,
        Quantity::P,
        Quantity::Q,
    ];

    /// Whether the quantity is a pointwise-in-time error with a final-level value.
    pub fn has_final(self) -> bool {
        !matches!(self, Quantity::GradUTilde | Quantity::P)
    }

    /// Column label: quantity and time norm.
    pub fn label(self) -> &'static str {
        match self {
            Quantity::Phi => "e_phi_linf",
            Quantity::GradPhi => "e_grad_phi_linf",
            Quantity::R => "e_r_inf",
            Quantity::U => "e_u_linf",
            Quantity::GradUTilde => "e_grad_ut_l2",
            Quantity::P => "e_p_l2",
            Quantity::Q => "e_q_inf",
        }
    }
}

/// Pointwise Cauchy errors at the last coarse level only.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FinalErrors {
    pub phi: f64,
    pub grad_phi: f64,
    pub r: f64,
    pub u: f64,
    pub q: f64,
}

/// Cauchy errors between runs at Δt and Δt/2 over all coarse levels.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorRecord {
    pub dt: f64,
    pub phi_linf: f64,
    pub grad_phi_linf: f64,
    pub r_inf: f64,
    pub u_linf: f64,
    pub grad_u_tilde_l2: f64,
    pub p_l2: f64,
    pub q_inf: f64,
    pub last: FinalErrors,
}

impl ErrorRecord {
    pub fn get(&self, q: Quantity) -> f64 {
        match q {
            Quantity::Phi => self.phi_linf,
            Quantity::GradPhi => self.grad_phi_linf,
            Quantity::R => self.r_inf,
            Quantity::U => self.u_linf,
            Quantity::GradUTilde => self.grad_u_tilde_l2,
            Quantity::P => self.p_l2,
            Quantity::Q => self.q_inf,
        }
    }

    /// Error at the final time, for quantities measured pointwise in time.
    pub fn get_final(&self, q: Quantity) -> Option<f64> {
        let l = &self.last;
        match q {
            Quantity::Phi => Some(l.phi),
            Quantity::GradPhi => Some(l.grad_phi),
            Quantity::R => Some(l.r),
            Quantity::U => Some(l.u),
            Quantity::Q => Some(l.q),
            Quantity::GradUTilde | Quantity::P => None,
        }
    }
}

/// `log₂(coarse/fine)`, or `None` if either error is not positive.
pub fn observed_rate(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > 0.0 && fine > 0.0 && coarse.is_finite() && fine.is_finite())
        .then(|| (coarse / fine).log2())
}

/// Streaming accumulator: feed the coarse level and the time-aligned fine
/// level after every coarse step.
#[derive(Clone, Debug)]
pub struct CauchyAccumulator {
    dt: f64,
    levels: usize,
    rec: ErrorRecord,
    grad_u_sum: f64,
    p_sum: f64,
}

impl CauchyAccumulator {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            levels: 0,
            rec: ErrorRecord { dt, ..ErrorRecord::default() },
            grad_u_sum: 0.0,
            p_sum: 0.0,
        }
    }

    pub fn record(&mut self, coarse: &SchemeState, fine: &SchemeState) -> Result<()> {
        coarse.grid().ensure_same(fine.grid())?;
        let tol = 1e-9 * self.dt;
        if (coarse.t - fine.t).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "levels are not time aligned: {} vs {}",
                coarse.t, fine.t
            )));
        }
        let dphi = CellField::combine(&[(1.0, &coarse.phi), (-1.0, &fine.phi)])?;
        let du = MacVector::combine(&[(1.0, &coarse.u), (-1.0, &fine.u)])?;
        let dut = MacVector::combine(&[(1.0, &coarse.u_tilde), (-1.0, &fine.u_tilde)])?;
        let dp = CellField::combine(&[(1.0, &coarse.p), (-1.0, &fine.p)])?.zero_mean();
        let last = FinalErrors {
            phi: norm_l2_cell(&dphi),
            grad_phi: norm_h1_semi(&dphi),
            r: (coarse.sav.r - fine.sav.r).abs(),
            u: norm_l2_face(&du),
            q: (coarse.sav.q - fine.sav.q).abs(),
        };
        let r = &mut self.rec;
        r.phi_linf = r.phi_linf.max(last.phi);
        r.grad_phi_linf = r.grad_phi_linf.max(last.grad_phi);
        r.r_inf = r.r_inf.max(last.r);
        r.u_linf = r.u_linf.max(last.u);
        r.q_inf = r.q_inf.max(last.q);
        r.last = last;
        self.grad_u_sum += self.dt * velocity_grad_energy(&dut).max(0.0);
        self.p_sum += self.dt * norm_l2_cell(&dp).powi(2);
        self.levels += 1;
        Ok(())
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn finish(&self) -> ErrorRecord {
        ErrorRecord {
            grad_u_tilde_l2: self.grad_u_sum.sqrt(),
            p_l2: self.p_sum.sqrt(),
            ..self.rec
        }
    }
}

/// Errors from stored level sequences. `coarse[n]` is compared with
/// `fine[2n]`; level 0 is skipped.
pub fn cauchy_errors(coarse: &[SchemeState], fine: &[SchemeState], dt: f64) -> Result<ErrorRecord> {
    if coarse.is_empty() || fine.len() < 2 * (coarse.len() - 1) + 1 {
        return Err(Error::InvalidInput(format!(
            "{} coarse levels need {} fine levels, got {}",
            coarse.len(),
            2 * coarse.len().saturating_sub(1) + 1,
            fine.len()
        )));
    }
    let mut acc = CauchyAccumulator::new(dt);
    for (n, c) in coarse.iter().enumerate().skip(1) {
        acc.record(c, &fine[2 * n])?;
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::model::{InitialData, PhysParams};

    #[test]
    fn rates() {
        assert_eq!(observed_rate(4.0, 1.0), Some(2.0));
        assert_eq!(observed_rate(3.0, 3.0), Some(0.0));
        assert!((observed_rate(2.44e-3, 1.43e-3).unwrap() - 0.77).abs() < 5e-3);
        assert_eq!(observed_rate(0.0, 1.0), None);
        assert_eq!(observed_rate(1.0, -1.0), None);
    }

    fn levels(shift: f64) -> Vec<SchemeState> {
        let p = PhysParams::default();
        let g = GridSpec::unit_square(8, 8).unwrap();
        let s = SchemeState::initial(g, &p, &InitialData::Benchmark).unwrap();
        (0..5)
            .map(|k| {
                let mut l = s.clone();
                l.t = 0.25 * k as f64;
                l.p = CellField::constant(g, shift + k as f64);
                l
            })
            .collect()
    }

    #[test]
    fn identical_and_shifted_runs_have_zero_error() {
        let fine = levels(0.0);
        let coarse: Vec<_> = levels(3.0).into_iter().step_by(2).collect();
        let rec = cauchy_errors(&coarse, &fine, 0.5).unwrap();
        for q in Quantity::ALL {
            assert_eq!(rec.get(q), 0.0, "{q:?}");
        }
    }

    #[test]
    fn misaligned_levels_are_rejected() {
        let fine = levels(0.0);
        assert!(cauchy_errors(&fine[..3], &fine, 0.25).is_err());
        assert!(cauchy_errors(&fine, &fine[..2], 0.25).is_err());
    }

    #[test]
    fn swapping_runs_is_symmetric() {
        let mut a = levels(0.0);
        let b = levels(0.0);
        for l in a.iter_mut() {
            l.phi = l.phi.map(|x| x * 1.01);
            l.sav.r += 0.1;
        }
        let mut acc1 = CauchyAccumulator::new(0.25);
        let mut acc2 = CauchyAccumulator::new(0.25);
        for k in 1..5 {
            acc1.record(&a[k], &b[k]).unwrap();
            acc2.record(&b[k], &a[k]).unwrap();
        }
        assert_eq!(acc1.finish(), acc2.finish());
        assert!(acc1.finish().phi_linf > 0.0);
    }

    #[test]
    fn final_level_is_the_last_recorded() {
        let a = levels(0.0);
        let mut b = levels(0.0);
        b[1].sav.q += 0.5;
        b[3].sav.q += 0.25;
        let mut acc = CauchyAccumulator::new(0.25);
        for k in 1..5 {
            acc.record(&a[k], &b[k]).unwrap();
        }
        let rec = acc.finish();
        assert_eq!(rec.q_inf, 0.5);
        assert_eq!(rec.get_final(Quantity::Q), Some(0.0));
        assert_eq!(rec.get_final(Quantity::P), None);
        acc.record(&a[3], &b[3]).unwrap();
        assert_eq!(acc.finish().last.q, 0.25);
    }
}
