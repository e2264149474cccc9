//! Flat `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use chns_core::grid::snapshot::{read_csv, Snapshot};
use chns_core::{
    whole_steps, ForcePairing, GridSpec, InitialData, InitialPressure, PhysParams, Scheme,
    StepOptions,
};

use crate::CliError;

/// Δt ladder used by `converge` when none is configured.
pub const DEFAULT_LADDER: [f64; 4] = [0.0125, 0.00625, 0.003125, 0.0015625];
/// Step sizes used by `audit` when no ladder is configured.
pub const DEFAULT_AUDIT_DTS: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSource {
    Benchmark,
    FixedPoint,
    /// Directory holding `phi.csv`, `u.csv` and `v.csv` snapshots.
    Snapshots(PathBuf),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    pub params: PhysParams,
    pub opts: StepOptions,
    pub snapshot_every: usize,
    pub outdir: PathBuf,
    pub ladder: Option<Vec<f64>>,
    pub initial: InitialSource,
    pub initial_pressure: InitialPressure,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nx: 160,
            ny: 160,
            scheme: Scheme::Msav1,
            dt: 0.0125,
            t_final: 0.1,
            params: PhysParams::default(),
            opts: StepOptions::default(),
            snapshot_every: 0,
            outdir: PathBuf::from("out"),
            ladder: None,
            initial: InitialSource::Benchmark,
            initial_pressure: InitialPressure::Zero,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| config_err(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    /// Defaults, then the file (if any), then the overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(p) = path {
            let text = fs::read_to_string(p)
                .map_err(|e| config_err(format!("reading {}: {e}", p.display())))?;
            cfg.apply_text(&text)?;
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| config_err(format!("--set expects key=value, got {o:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| config_err(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let p = &mut self.params;
        match key {
            "nx" => self.nx = num(key, value)?,
            "ny" => self.ny = num(key, value)?,
            "scheme" => self.scheme = value.parse().map_err(|e| config_err(format!("{e}")))?,
            "dt" => self.dt = num(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "epsilon" => p.epsilon = num(key, value)?,
            "mobility" => p.mobility = num(key, value)?,
            "viscosity" => p.viscosity = num(key, value)?,
            "gamma" => p.gamma = num(key, value)?,
            "beta" => p.beta = num(key, value)?,
            "delta" => p.delta = num(key, value)?,
            "horizon_T" => p.horizon = num(key, value)?,
            "tol_poisson" => self.opts.tol.poisson = num(key, value)?,
            "tol_helmholtz" => self.opts.tol.helmholtz = num(key, value)?,
            "snapshot_every" => self.snapshot_every = num(key, value)?,
            "outdir" => self.outdir = PathBuf::from(value),
            "ladder" => {
                let dts = value
                    .split(',')
                    .map(|s| num::<f64>(key, s.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                self.ladder = Some(dts);
            }
            "initial" => {
                self.initial = match value {
                    "benchmark" => InitialSource::Benchmark,
                    "fixed_point" => InitialSource::FixedPoint,
                    other => match other.strip_prefix("snapshot:") {
                        Some(dir) => InitialSource::Snapshots(PathBuf::from(dir)),
                        None => {
                            return Err(config_err(format!(
                                "initial: expected benchmark, fixed_point or snapshot:DIR, got {other:?}"
                            )))
                        }
                    },
                }
            }
            "initial_pressure" => {
                self.initial_pressure = value.parse().map_err(|e| config_err(format!("{e}")))?
            }
            "pairing" => {
                self.opts.pairing = match value {
                    "face" => ForcePairing::Face,
                    "cell_averaged" => ForcePairing::CellAveraged,
                    other => return Err(config_err(format!("pairing: unknown value {other:?}"))),
                }
            }
            other => return Err(config_err(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.params.validate().map_err(|e| config_err(e.to_string()))?;
        for (name, tol) in [
            ("tol_poisson", self.opts.tol.poisson),
            ("tol_helmholtz", self.opts.tol.helmholtz),
        ] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(config_err(format!("{name} must lie in (0, 1), got {tol}")));
            }
        }
        self.steps(self.dt)?;
        if let Some(l) = &self.ladder {
            if l.is_empty() {
                return Err(config_err("ladder is empty"));
            }
            for &dt in l {
                self.steps(dt)?;
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::unit_square(self.nx, self.ny).map_err(|e| config_err(e.to_string()))
    }

    pub fn steps(&self, dt: f64) -> Result<usize, CliError> {
        whole_steps(self.t_final, dt).map_err(|e| config_err(e.to_string()))
    }

    /// Ladder for `converge`; must halve from row to row.
    pub fn converge_ladder(&self) -> Result<Vec<f64>, CliError> {
        let l = self.ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
        for w in l.windows(2) {
            if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
                return Err(config_err(format!(
                    "ladder must halve at each entry, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for &dt in &l {
            self.steps(dt)?;
        }
        Ok(l)
    }

    pub fn audit_dts(&self) -> Vec<f64> {
        self.ladder.clone().unwrap_or_else(|| DEFAULT_AUDIT_DTS.to_vec())
    }

    pub fn initial_data(&self) -> Result<InitialData, CliError> {
        Ok(match &self.initial {
            InitialSource::Benchmark => InitialData::Benchmark,
            InitialSource::FixedPoint => InitialData::FixedPoint,
            InitialSource::Snapshots(dir) => {
                let read = |name: &str| -> Result<Snapshot, CliError> {
                    let path = dir.join(name);
                    let f = fs::File::open(&path)
                        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                    read_csv(std::io::BufReader::new(f))
                        .map_err(|e| config_err(format!("{}: {e}", path.display())))
                };
                let phi = read("phi.csv")?.to_cell().map_err(|e| config_err(e.to_string()))?;
                let u = Snapshot::to_mac(&read("u.csv")?, &read("v.csv")?)
                    .map_err(|e| config_err(e.to_string()))?;
                if *phi.grid() != self.grid()? {
                    return Err(config_err(format!(
                        "snapshot grid {} does not match nx={}, ny={}",
                        phi.grid(),
                        self.nx,
                        self.ny
                    )));
                }
                InitialData::Fields { phi, u }
            }
        })
    }
}
