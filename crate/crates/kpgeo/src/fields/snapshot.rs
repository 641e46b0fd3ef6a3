//! `GFLD v1` field snapshots: one ASCII header line, then little-endian `f64` values.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::grid::{GridField, IntervalGrid, Support, TorusGrid, Value, WindowGrid};
use crate::error::{Error, Result};

fn header<T: Value>(field: &GridField<T>, components: usize) -> Result<String> {
    let t = field.torus;
    let planar = match &field.support {
        Support::Torus => "torus".to_string(),
        Support::Boundary { nodes, length } => format!("boundary {nodes} {length:e}"),
        Support::Window(w) => format!("window {} {}", w.n_theta, w.n_t),
        Support::Interval(g) => format!("interval {}", g.n_t),
        Support::Segment { nodes, spacing } => format!("segment {nodes} {spacing:e}"),
        Support::Planar(_) => {
            return Err(Error::Snapshot("planar-domain fields are not snapshot-able".into()))
        }
    };
    Ok(format!("GFLD v1 {planar} {} {} {components}\n", t.ny, t.nx))
}

fn write_impl<T: Value>(field: &GridField<T>, w: &mut impl Write, complex: bool) -> Result<()> {
    let comps = if complex { 2 } else { 1 };
    w.write_all(header(field, comps)?.as_bytes())?;
    for v in &field.values {
        let c = v.to_c64();
        w.write_all(&c.re.to_le_bytes())?;
        if complex {
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn save_real(field: &GridField<f64>, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_impl(field, &mut f, false)
}

pub fn save_complex(field: &GridField<super::grid::C64>, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_impl(field, &mut f, true)
}

fn parse<T: Value>(reader: impl Read, want_complex: bool) -> Result<GridField<T>> {
    let mut r = BufReader::new(reader);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let tok: Vec<&str> = line.split_whitespace().collect();
    let bad = |m: &str| Error::Snapshot(format!("{m}: `{}`", line.trim()));
    if tok.len() < 3 || tok[0] != "GFLD" || tok[1] != "v1" {
        return Err(bad("not a GFLD v1 header"));
    }
    let num = |i: usize| -> Result<f64> {
        tok.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad("malformed dimension"))
    };
    let int = |i: usize| -> Result<usize> {
        let v = num(i)?;
        if v < 1.0 || v.fract() != 0.0 {
            return Err(bad("dimension must be a positive integer"));
        }
        Ok(v as usize)
    };
    let (support, rest) = match tok[2] {
        "torus" => (Support::Torus, 3),
        "boundary" => (Support::Boundary { nodes: int(3)?, length: num(4)? }, 5),
        "window" => {
            let (nth, nt) = (int(3)?, int(4)?);
            if nth < 2 || nt < 2 {
                return Err(bad("window needs at least two nodes per direction"));
            }
            let mut w = WindowGrid::with_cells(nt - 1);
            w.n_theta = nth;
            (Support::Window(w), 5)
        }
        "interval" => (Support::Interval(IntervalGrid { n_t: int(3)? }), 4),
        "segment" => (Support::Segment { nodes: int(3)?, spacing: num(4)? }, 5),
        _ => return Err(bad("unknown support kind")),
    };
    if tok.len() != rest + 3 {
        return Err(bad("wrong number of header fields"));
    }
    let (ny, nx, comps) = (int(rest)?, int(rest + 1)?, int(rest + 2)?);
    if comps != if want_complex { 2 } else { 1 } {
        return Err(bad("component count does not match the requested value type"));
    }
    let torus = TorusGrid::new(nx, ny);
    let n = support.planar_len() * torus.len();
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * comps * 8 {
        return Err(Error::Snapshot(format!(
            "expected {} bytes of data, found {}",
            n * comps * 8,
            bytes.len()
        )));
    }
    let f: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let values = if want_complex {
        f.chunks_exact(2).map(|c| T::from_c64(super::grid::C64::new(c[0], c[1]))).collect()
    } else {
        f.iter().map(|&v| T::from_c64(super::grid::C64::new(v, 0.0))).collect()
    };
    GridField::from_values(support, torus, values).map_err(|e| Error::Snapshot(e.to_string()))
}

pub fn load_real(path: &Path) -> Result<GridField<f64>> {
    parse(std::fs::File::open(path)?, false)
}

pub fn load_complex(path: &Path) -> Result<GridField<super::grid::C64>> {
    parse(std::fs::File::open(path)?, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_rejects_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid::new(8, 2);
        let f = GridField::torus_field(g, g.sample(|x, y| x.cos() * y.sin()));
        let p = dir.path().join("a.gfld");
        save_real(&f, &p).unwrap();
        let back = load_real(&p).unwrap();
        assert_eq!(back.values, f.values);
        let mut bytes = std::fs::read(&p).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&p, bytes).unwrap();
        assert!(matches!(load_real(&p), Err(Error::Snapshot(_))));
    }
}
