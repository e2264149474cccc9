use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use chns_core::diagnostics::csv::{write_audit_header, write_audit_row, write_table_csv};
use chns_core::diagnostics::observed_rate;
use chns_core::grid::snapshot::{write_csv, Snapshot};
use chns_core::grid::{div_face_to_cell, norm_l2_cell};
use chns_core::{cauchy_study, EnergyAudit, ErrorRecord, Quantity, SchemeState, Simulation};

use crate::config::RunConfig;
use crate::CliError;

/// Runs `jobs` on up to `threads` workers; results keep the input order.
fn run_parallel<T: Send>(threads: usize, n: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= n {
                    break;
                }
                let out = job(k);
                slots.lock().unwrap()[k] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("every job ran"))
        .collect()
}

fn initial_state(cfg: &RunConfig) -> Result<SchemeState, CliError> {
    let init = cfg.initial_data()?;
    SchemeState::initial_with(
        cfg.grid()?,
        &cfg.params,
        &init,
        cfg.initial_pressure,
        cfg.opts.tol.poisson,
    )
    .map_err(CliError::from_core)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_snapshot(dir: &Path, s: &SchemeState) -> Result<(), CliError> {
    let fields = [
        ("phi.csv", Snapshot::from_cell(&s.phi)),
        ("p.csv", Snapshot::from_cell(&s.p)),
        ("u.csv", Snapshot::from_u(&s.u)),
        ("v.csv", Snapshot::from_v(&s.u)),
    ];
    for (name, snap) in fields {
        let mut out = create(&dir.join(name))?;
        write_csv(&mut out, &snap).map_err(CliError::from_core)?;
        out.flush()?;
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let s0 = initial_state(cfg)?;
    let n = cfg.steps(cfg.dt)?;
    let snaps = cfg.outdir.join("snapshots");
    let snap_dir = |step: usize| snaps.join(format!("step_{step:06}"));
    if cfg.snapshot_every > 0 {
        write_snapshot(&snap_dir(0), &s0)?;
    }
    let mut sim = Simulation::from_state(cfg.scheme, s0, cfg.params, cfg.dt, cfg.opts);
    let audit_path = cfg.outdir.join("audit.csv");
    let mut out = create(&audit_path)?;
    write_audit_header(&mut out).map_err(CliError::from_core)?;
    let mut violations = 0;
    let mut last = EnergyAudit::default();
    for k in 1..=n {
        last = sim.step_audited().map_err(|e| CliError::at_step(k, e))?;
        write_audit_row(&mut out, &last).map_err(CliError::from_core)?;
        if !last.passes() {
            violations += 1;
            eprintln!(
                "warning: step {k}: energy defect {:e} exceeds slack {:e}",
                last.decay_defect,
                last.slack()
            );
        }
        if cfg.snapshot_every > 0 && (k % cfg.snapshot_every == 0 || k == n) {
            write_snapshot(&snap_dir(k), sim.current())?;
        }
    }
    out.flush()?;
    let s = sim.current();
    println!(
        "{} {}x{} dt={} steps={n} t={:.6} E={:.10e} Etilde={:.10e} mass={:.3e} div={:.3e} violations={violations}",
        cfg.scheme,
        cfg.nx,
        cfg.ny,
        cfg.dt,
        s.t,
        last.e_total,
        last.etilde,
        s.phi.sum() * s.grid().cell_area(),
        norm_l2_cell(&div_face_to_cell(&s.u)),
    );
    println!("audit written to {}", audit_path.display());
    Ok(())
}

pub fn converge(cfg: &RunConfig, threads: usize) -> Result<(), CliError> {
    let dts = cfg.converge_ladder()?;
    let s0 = initial_state(cfg)?;
    let results: Vec<Result<ErrorRecord, CliError>> = run_parallel(threads, dts.len(), |k| {
        cauchy_study(cfg.scheme, &s0, cfg.params, dts[k], cfg.t_final, cfg.opts)
            .map_err(CliError::from_core)
    });
    let rows: Vec<Option<ErrorRecord>> = results.iter().map(|r| r.as_ref().ok().copied()).collect();
    let path = cfg.outdir.join("table.csv");
    let mut out = create(&path)?;
    write_table_csv(&mut out, &rows, &dts).map_err(CliError::from_core)?;
    out.flush()?;
    print_table(&rows, &dts);
    println!("table written to {}", path.display());
    let mut first_err = None;
    for (dt, r) in dts.iter().zip(results) {
        if let Err(e) = r {
            eprintln!("error: dt={dt}: {e}");
            first_err.get_or_insert(e);
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn print_table(rows: &[Option<ErrorRecord>], dts: &[f64]) {
    let mut header = format!("{:>12}", "dt");
    for q in Quantity::ALL {
        header.push_str(&format!(" {:>16} {:>6}", q.label(), "rate"));
    }
    println!("{header}");
    for (k, dt) in dts.iter().enumerate() {
        let mut line = format!("{dt:>12.6e}");
        for q in Quantity::ALL {
            match rows[k] {
                Some(r) => {
                    let rate = k
                        .checked_sub(1)
                        .and_then(|j| rows[j])
                        .and_then(|p| observed_rate(p.get(q), r.get(q)))
                        .map(|x| format!("{x:6.2}"))
                        .unwrap_or_else(|| format!("{:>6}", "-"));
                    line.push_str(&format!(" {:>16.4e} {rate}", r.get(q)));
                }
                None => line.push_str(&format!(" {:>16} {:>6}", "failed", "-")),
            }
        }
        println!("{line}");
    }
}

struct AuditSummary {
    dt: f64,
    steps: usize,
    worst: f64,
    worst_identity: f64,
    first_violation: Option<EnergyAudit>,
}

pub fn audit(cfg: &RunConfig, threads: usize) -> Result<(), CliError> {
    let dts = cfg.audit_dts();
    for &dt in &dts {
        cfg.steps(dt)?;
    }
    let s0 = initial_state(cfg)?;
    let results = run_parallel(threads, dts.len(), |k| -> Result<AuditSummary, CliError> {
        let dt = dts[k];
        let n = cfg.steps(dt)?;
        let mut sim = Simulation::from_state(cfg.scheme, s0.clone(), cfg.params, dt, cfg.opts);
        let mut out = create(&cfg.outdir.join(format!("audit_dt{dt:e}.csv")))?;
        write_audit_header(&mut out).map_err(CliError::from_core)?;
        let mut sum = AuditSummary {
            dt,
            steps: n,
            worst: f64::NEG_INFINITY,
            worst_identity: 0.0,
            first_violation: None,
        };
        for step in 1..=n {
            let a = sim.step_audited().map_err(|e| CliError::at_step(step, e))?;
            write_audit_row(&mut out, &a).map_err(CliError::from_core)?;
            sum.worst = sum.worst.max(a.decay_defect);
            sum.worst_identity = sum.worst_identity.max(a.identity_residual().abs());
            if !(a.passes() && a.identity_holds()) && sum.first_violation.is_none() {
                sum.first_violation = Some(a);
            }
        }
        out.flush()?;
        Ok(sum)
    });
    let mut failure = None;
    for r in results {
        let s = r?;
        println!(
            "{} dt={:e} steps={} worst decay defect={:.3e} worst identity residual={:.3e} {}",
            cfg.scheme,
            s.dt,
            s.steps,
            s.worst,
            s.worst_identity,
            if s.first_violation.is_some() { "VIOLATION" } else { "ok" }
        );
        if let (Some(a), None) = (s.first_violation, &failure) {
            let (what, defect) = if a.passes() {
                ("energy identity", a.identity_residual().abs())
            } else {
                ("energy inequality", a.decay_defect)
            };
            failure = Some(CliError::Audit {
                what,
                dt: s.dt,
                step: a.step,
                defect,
                slack: a.slack(),
            });
        }
    }
    failure.map_or(Ok(()), Err)
}
