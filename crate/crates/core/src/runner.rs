//! Driving either scheme through time with one interface.

use std::fmt;
use std::str::FromStr;

use crate::diagnostics::{audit_first, audit_second, CauchyAccumulator, EnergyAudit, ErrorRecord};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::model::{InitialData, PhysParams};
use crate::msav_first::{step_first_order, SchemeState};
use crate::msav_second::{bootstrap, step_second_order, SchemeState2};
use crate::substeps::StepOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Backward Euler with standard pressure correction.
    Msav1,
    /// BDF2 with rotational pressure correction.
    Msav2,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "msav1" => Ok(Scheme::Msav1),
            "msav2" => Ok(Scheme::Msav2),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme {other:?} (expected msav1 or msav2)"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Msav1 => "msav1",
            Scheme::Msav2 => "msav2",
        })
    }
}

/// Number of steps of size `dt` that reach `t_final`, allowing a few ulps of
/// representation error in the ratio.
pub fn whole_steps(t_final: f64, dt: f64) -> Result<usize> {
    crate::check_dt(dt)?;
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_final must be >= 0, got {t_final}")));
    }
    let ratio = t_final / dt;
    let n = ratio.round();
    if (ratio - n).abs() > 4.0 * f64::EPSILON * ratio.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} does not divide t_final = {t_final} into whole steps"
        )));
    }
    Ok(n as usize)
}

#[derive(Clone, Debug)]
enum Levels {
    One(SchemeState),
    Two(Box<SchemeState2>),
}

/// A time-stepping run of a fixed scheme and step size.
#[derive(Clone, Debug)]
pub struct Simulation {
    scheme: Scheme,
    params: PhysParams,
    dt: f64,
    opts: StepOptions,
    levels: Levels,
}

impl Simulation {
    pub fn new(
        scheme: Scheme,
        grid: GridSpec,
        params: PhysParams,
        init: &InitialData,
        dt: f64,
        opts: StepOptions,
    ) -> Result<Self> {
        crate::check_dt(dt)?;
        let s0 = SchemeState::initial(grid, &params, init)?;
        Ok(Self::from_state(scheme, s0, params, dt, opts))
    }

    pub fn from_state(
        scheme: Scheme,
        state: SchemeState,
        params: PhysParams,
        dt: f64,
        opts: StepOptions,
    ) -> Self {
        Self {
            scheme,
            params,
            dt,
            opts,
            levels: Levels::One(state),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn current(&self) -> &SchemeState {
        match &self.levels {
            Levels::One(s) => s,
            Levels::Two(s2) => &s2.current,
        }
    }

    /// Two-level state once the BDF2 scheme has bootstrapped.
    pub fn two_level(&self) -> Option<&SchemeState2> {
        match &self.levels {
            Levels::Two(s2) => Some(s2),
            Levels::One(_) => None,
        }
    }

    pub fn step(&mut self) -> Result<()> {
        self.advance(false).map(|_| ())
    }

    /// Steps and audits the energy change. The bootstrap step of the BDF2
    /// scheme is a backward-Euler step and is audited as one.
    pub fn step_audited(&mut self) -> Result<EnergyAudit> {
        self.advance(true).map(|a| a.expect("audit requested"))
    }

    fn advance(&mut self, audit: bool) -> Result<Option<EnergyAudit>> {
        let (p, dt, o) = (&self.params, self.dt, &self.opts);
        let (next, report) = match (&self.levels, self.scheme) {
            (Levels::One(s), Scheme::Msav1) => {
                let n = step_first_order(s, p, dt, o)?;
                let a = audit.then(|| audit_first(s, &n, p, dt));
                (Levels::One(n), a)
            }
            (Levels::One(s), Scheme::Msav2) => {
                let n = bootstrap(s, p, dt, o)?;
                let a = audit.then(|| audit_first(s, &n.current, p, dt));
                (Levels::Two(Box::new(n)), a)
            }
            (Levels::Two(s2), _) => {
                let n = step_second_order(s2, p, dt, o)?;
                let a = audit.then(|| audit_second(s2, &n, p, dt));
                (Levels::Two(Box::new(n)), a)
            }
        };
        self.levels = next;
        Ok(report)
    }
}

/// Runs Δt and Δt/2 in lockstep from `initial` to `t_final` and accumulates
/// Cauchy errors at every coarse level.
pub fn cauchy_study(
    scheme: Scheme,
    initial: &SchemeState,
    params: PhysParams,
    dt: f64,
    t_final: f64,
    opts: StepOptions,
) -> Result<ErrorRecord> {
    crate::check_dt(dt)?;
    let n = whole_steps(t_final - initial.t, dt)?;
    let mut coarse = Simulation::from_state(scheme, initial.clone(), params, dt, opts);
    let mut fine = Simulation::from_state(scheme, initial.clone(), params, 0.5 * dt, opts);
    let mut acc = CauchyAccumulator::new(dt);
    for _ in 0..n {
        coarse.step()?;
        fine.step()?;
        fine.step()?;
        acc.record(coarse.current(), fine.current())?;
    }
    Ok(acc.finish())
}
