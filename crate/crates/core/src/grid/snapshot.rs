//! Field snapshot files.
//!
//! CSV layout:
//!
//! ```text
//! # nx,ny,hx,hy,kind
//! 64,64,0.015625,0.015625,cell
//! <row j=0 values, comma separated>
//! ...
//! ```
//!
//! `kind` is `cell`, `u_face` or `v_face`; rows run over `j` with the x index
//! fastest, so a `u_face` file has `ny` rows of `nx+1` values and a `v_face`
//! file has `ny+1` rows of `nx` values.
//!
//! The binary layout is eight little-endian f64 header values
//! `[nx, ny, hx, hy, kind_code, x0, y0, version]` followed by the values in
//! the same order. `kind_code` is 0, 1, 2 for cell, u-face, v-face.

use std::io::{BufRead, Read, Write};

use super::{CellField, GridSpec, MacVector};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "# nx,ny,hx,hy,kind";
const BINARY_VERSION: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Cell,
    UFace,
    VFace,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Cell => "cell",
            FieldKind::UFace => "u_face",
            FieldKind::VFace => "v_face",
        }
    }

    fn code(self) -> f64 {
        match self {
            FieldKind::Cell => 0.0,
            FieldKind::UFace => 1.0,
            FieldKind::VFace => 2.0,
        }
    }

    fn from_name(s: &str) -> Result<Self> {
        match s {
            "cell" => Ok(FieldKind::Cell),
            "u_face" => Ok(FieldKind::UFace),
            "v_face" => Ok(FieldKind::VFace),
            other => Err(Error::Snapshot(format!("unknown field kind {other:?}"))),
        }
    }

    fn from_code(c: f64) -> Result<Self> {
        match c as i64 {
            0 => Ok(FieldKind::Cell),
            1 => Ok(FieldKind::UFace),
            2 => Ok(FieldKind::VFace),
            _ => Err(Error::Snapshot(format!("unknown field kind code {c}"))),
        }
    }

    /// (rows, columns) of the stored array.
    pub fn shape(self, grid: &GridSpec) -> (usize, usize) {
        match self {
            FieldKind::Cell => (grid.ny(), grid.nx()),
            FieldKind::UFace => (grid.ny(), grid.nx() + 1),
            FieldKind::VFace => (grid.ny() + 1, grid.nx()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub kind: FieldKind,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn from_cell(f: &CellField) -> Self {
        Self {
            grid: *f.grid(),
            kind: FieldKind::Cell,
            values: f.data().to_vec(),
        }
    }

    pub fn from_u(w: &MacVector) -> Self {
        Self {
            grid: *w.grid(),
            kind: FieldKind::UFace,
            values: w.u().to_vec(),
        }
    }

    pub fn from_v(w: &MacVector) -> Self {
        Self {
            grid: *w.grid(),
            kind: FieldKind::VFace,
            values: w.v().to_vec(),
        }
    }

    pub fn to_cell(&self) -> Result<CellField> {
        if self.kind != FieldKind::Cell {
            return Err(Error::Snapshot(format!(
                "expected a cell field, found {}",
                self.kind.name()
            )));
        }
        CellField::from_vec(self.grid, self.values.clone())
    }

    /// Reassembles a velocity from its two component snapshots.
    pub fn to_mac(u: &Snapshot, v: &Snapshot) -> Result<MacVector> {
        if u.kind != FieldKind::UFace || v.kind != FieldKind::VFace {
            return Err(Error::Snapshot(
                "expected a u_face and a v_face snapshot".to_string(),
            ));
        }
        u.grid.ensure_same(&v.grid)?;
        MacVector::from_vecs(u.grid, u.values.clone(), v.values.clone())
    }
}

fn grid_from_header(nx: usize, ny: usize, hx: f64, hy: f64, x0: f64, y0: f64) -> Result<GridSpec> {
    GridSpec::new(nx, ny, x0, x0 + nx as f64 * hx, y0, y0 + ny as f64 * hy)
}

pub fn write_csv<W: Write>(mut out: W, snap: &Snapshot) -> Result<()> {
    let g = &snap.grid;
    writeln!(out, "{CSV_HEADER}")?;
    writeln!(
        out,
        "{},{},{:e},{:e},{}",
        g.nx(),
        g.ny(),
        g.hx(),
        g.hy(),
        snap.kind.name()
    )?;
    let (_, cols) = snap.kind.shape(g);
    for row in snap.values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Snapshot(format!("bad number {s:?}: {e}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|e| Error::Snapshot(format!("bad count {s:?}: {e}")))
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Snapshot> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Snapshot("empty file".to_string()))??;
    if header.trim() != CSV_HEADER {
        return Err(Error::Snapshot(format!("unexpected header {header:?}")));
    }
    let meta = lines
        .next()
        .ok_or_else(|| Error::Snapshot("missing metadata line".to_string()))??;
    let parts: Vec<&str> = meta.split(',').collect();
    if parts.len() != 5 {
        return Err(Error::Snapshot(format!("bad metadata line {meta:?}")));
    }
    let grid = grid_from_header(
        parse_usize(parts[0])?,
        parse_usize(parts[1])?,
        parse_f64(parts[2])?,
        parse_f64(parts[3])?,
        0.0,
        0.0,
    )?;
    let kind = FieldKind::from_name(parts[4].trim())?;
    let (rows, cols) = kind.shape(&grid);
    let mut values = Vec::with_capacity(rows * cols);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split(',') {
            values.push(parse_f64(tok)?);
        }
        if values.len() - before != cols {
            return Err(Error::Snapshot(format!(
                "row has {} values, expected {cols}",
                values.len() - before
            )));
        }
    }
    if values.len() != rows * cols {
        return Err(Error::Snapshot(format!(
            "expected {} values, found {}",
            rows * cols,
            values.len()
        )));
    }
    Ok(Snapshot { grid, kind, values })
}

pub fn write_binary<W: Write>(mut out: W, snap: &Snapshot) -> Result<()> {
    let g = &snap.grid;
    let (x0, _, y0, _) = g.extents();
    let header = [
        g.nx() as f64,
        g.ny() as f64,
        g.hx(),
        g.hy(),
        snap.kind.code(),
        x0,
        y0,
        BINARY_VERSION,
    ];
    for v in header.iter().chain(&snap.values) {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 || bytes.len() < 64 {
        return Err(Error::Snapshot(format!(
            "binary snapshot has {} bytes",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let h = &values[..8];
    if h[7] != BINARY_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {}", h[7])));
    }
    let grid = grid_from_header(h[0] as usize, h[1] as usize, h[2], h[3], h[5], h[6])?;
    let kind = FieldKind::from_code(h[4])?;
    let (rows, cols) = kind.shape(&grid);
    if values.len() - 8 != rows * cols {
        return Err(Error::Snapshot(format!(
            "expected {} values, found {}",
            rows * cols,
            values.len() - 8
        )));
    }
    Ok(Snapshot {
        grid,
        kind,
        values: values[8..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_and_binary_round_trip(nx in 4usize..9, ny in 4usize..9, seed in any::<u64>()) {
            let g = GridSpec::unit_square(nx, ny).unwrap();
            let f = CellField::from_fn(g, |x, y| ((seed % 97) as f64 + 1.0) * (x - y * y).sin() * 1e-3);
            let w = MacVector::from_fns(g, |x, y| x * y - 0.1, |x, y| (x + 2.0 * y).exp());
            for snap in [Snapshot::from_cell(&f), Snapshot::from_u(&w), Snapshot::from_v(&w)] {
                let mut buf = Vec::new();
                write_csv(&mut buf, &snap).unwrap();
                prop_assert_eq!(&read_csv(buf.as_slice()).unwrap(), &snap);
                let mut bin = Vec::new();
                write_binary(&mut bin, &snap).unwrap();
                prop_assert_eq!(bin.len(), 8 * (8 + snap.values.len()));
                prop_assert_eq!(&read_binary(bin.as_slice()).unwrap(), &snap);
            }
        }
    }

    #[test]
    fn truncated_csv_is_rejected() {
        let g = GridSpec::unit_square(4, 4).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &Snapshot::from_cell(&CellField::zeros(g))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: Vec<&str> = text.lines().take(4).collect();
        assert!(read_csv(cut.join("\n").as_bytes()).is_err());
        assert!(read_csv("nope\n".as_bytes()).is_err());
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let g = GridSpec::unit_square(4, 4).unwrap();
        let s = Snapshot::from_u(&MacVector::zeros(g));
        assert!(s.to_cell().is_err());
    }
}
