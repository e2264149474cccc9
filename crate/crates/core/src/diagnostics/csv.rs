//! CSV writers for audit logs and convergence tables.

use std::io::Write;

use super::{observed_rate, EnergyAudit, ErrorRecord, Quantity};
#[cfg(test)]
use super::FinalErrors;
use crate::error::Result;

pub const AUDIT_COLUMNS: [&str; 17] = [
    "t",
    "E_total",
    "Etilde",
    "mass",
    "div_norm",
    "r",
    "q",
    "decay_defect",
    "diss_mu",
    "diss_visc",
    "diss_curl",
    "diss_q",
    "numerical",
    "identity_residual",
    "raw_decay_defect",
    "curl_defect",
    "step",
];

pub fn write_audit_header<W: Write>(out: &mut W) -> Result<()> {
    writeln!(out, "{}", AUDIT_COLUMNS.join(","))?;
    Ok(())
}

pub fn write_audit_row<W: Write>(out: &mut W, a: &EnergyAudit) -> Result<()> {
    let vals = [
        a.t,
        a.e_total,
        a.etilde,
        a.mass,
        a.div_norm,
        a.r,
        a.q,
        a.decay_defect,
        a.diss_mu,
        a.diss_visc,
        a.diss_curl,
        a.diss_q,
        a.numerical,
        a.identity_residual(),
        a.raw_decay_defect,
        a.curl_defect,
    ];
    let cells: Vec<String> = vals.iter().map(|v| format!("{v:.17e}")).collect();
    writeln!(out, "{},{}", cells.join(","), a.step)?;
    Ok(())
}

pub fn write_audit_csv<W: Write>(mut out: W, rows: &[EnergyAudit]) -> Result<()> {
    write_audit_header(&mut out)?;
    for a in rows {
        write_audit_row(&mut out, a)?;
    }
    Ok(())
}

/// Header of the convergence table: `dt`, then error and rate per quantity,
/// then final-time error and rate for the pointwise quantities.
pub fn table_columns() -> Vec<String> {
    let mut cols = vec!["dt".to_string()];
    for q in Quantity::ALL {
        cols.push(q.label().to_string());
        cols.push(format!("rate_{}", &q.label()[2..]));
    }
    for q in Quantity::ALL.into_iter().filter(|q| q.has_final()) {
        let base = q.label()[2..].trim_end_matches("_linf").trim_end_matches("_inf");
        cols.push(format!("e_{base}_final"));
        cols.push(format!("rate_{base}_final"));
    }
    cols
}

fn push_pair(cells: &mut Vec<String>, prev: Option<f64>, cur: Option<f64>) {
    match cur {
        Some(e) => {
            cells.push(format!("{e:.6e}"));
            cells.push(
                prev.and_then(|p| observed_rate(p, e))
                    .map(|r| format!("{r:.4}"))
                    .unwrap_or_default(),
            );
        }
        None => {
            cells.push(String::new());
            cells.push(String::new());
        }
    }
}

/// One row per ladder entry, ordered by decreasing Δt. Rates compare each
/// row with the one above it; a failed row is written with empty cells.
pub fn write_table_csv<W: Write>(mut out: W, rows: &[Option<ErrorRecord>], dts: &[f64]) -> Result<()> {
    writeln!(out, "{}", table_columns().join(","))?;
    for (k, dt) in dts.iter().enumerate() {
        let mut cells = vec![format!("{dt:e}")];
        let cur = rows.get(k).copied().flatten();
        let prev = k.checked_sub(1).and_then(|j| rows.get(j).copied().flatten());
        for q in Quantity::ALL {
            push_pair(&mut cells, prev.map(|p| p.get(q)), cur.map(|c| c.get(q)));
        }
        for q in Quantity::ALL.into_iter().filter(|q| q.has_final()) {
            push_pair(
                &mut cells,
                prev.and_then(|p| p.get_final(q)),
                cur.and_then(|c| c.get_final(q)),
            );
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
