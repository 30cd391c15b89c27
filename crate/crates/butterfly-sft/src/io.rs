//! Text formats: point-set files and potentials files.
//!
//! Point-set format: a header line `dim N count has_charges`, then one line
//! per point, `x y [z] [re im]`, whitespace-separated, written with 17
//! significant digits so values round-trip exactly.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::geometry::PointSet;
use crate::{Error, Result};

/// A point set of either supported dimension, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyPointSet {
    D2(PointSet<2>),
    D3(PointSet<3>),
}

impl AnyPointSet {
    pub fn dim(&self) -> usize {
        match self {
            AnyPointSet::D2(_) => 2,
            AnyPointSet::D3(_) => 3,
        }
    }

    pub fn n_scale(&self) -> u64 {
        match self {
            AnyPointSet::D2(ps) => ps.n_scale(),
            AnyPointSet::D3(ps) => ps.n_scale(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyPointSet::D2(ps) => ps.len(),
            AnyPointSet::D3(ps) => ps.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_charges(&self) -> bool {
        match self {
            AnyPointSet::D2(ps) => ps.has_charges(),
            AnyPointSet::D3(ps) => ps.has_charges(),
        }
    }
}

pub fn write_point_set<const D: usize>(mut w: impl Write, ps: &PointSet<D>) -> Result<()> {
    writeln!(
        w,
        "{} {} {} {}",
        D,
        ps.n_scale(),
        ps.len(),
        if ps.has_charges() { 1 } else { 0 }
    )?;
    for (i, pt) in ps.points().iter().enumerate() {
        for (c, v) in pt.iter().enumerate() {
            if c > 0 {
                write!(w, " ")?;
            }
            write!(w, "{v:.16e}")?;
        }
        if let Some(charges) = ps.charges() {
            write!(w, " {:.16e} {:.16e}", charges[i].re, charges[i].im)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_point_set_file<const D: usize>(path: impl AsRef<Path>, ps: &PointSet<D>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_point_set(&mut buf, ps)?;
    buf.flush()?;
    Ok(())
}

pub fn read_point_set(r: impl BufRead, path: &str) -> Result<AnyPointSet> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.into(),
        line: 1,
        message: "empty file".into(),
    })?;
    let header = header?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 4 {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("header needs `dim N count has_charges`, got {header:?}"),
        });
    }
    let parse_u64 = |tok: &str, what: &str| -> Result<u64> {
        tok.parse().map_err(|_| Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("bad {what}: {tok:?}"),
        })
    };
    let dim = parse_u64(head[0], "dim")?;
    let n = parse_u64(head[1], "N")?;
    let count = parse_u64(head[2], "count")? as usize;
    let has_charges = match head[3] {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                message: format!("bad has_charges flag: {other:?}"),
            })
        }
    };

    let want_tokens = dim as usize + if has_charges { 2 } else { 0 };
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.into(),
                    line: lineno + 1,
                    message: format!("bad number {t:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if vals.len() != want_tokens {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno + 1,
                message: format!("expected {want_tokens} values, got {}", vals.len()),
            });
        }
        rows.push(vals);
    }
    if rows.len() != count {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("header promises {count} points, file has {}", rows.len()),
        });
    }

    fn build<const D: usize>(
        n: u64,
        rows: &[Vec<f64>],
        has_charges: bool,
    ) -> Result<PointSet<D>> {
        let pts: Vec<[f64; D]> = rows
            .iter()
            .map(|r| {
                let mut p = [0.0; D];
                p.copy_from_slice(&r[..D]);
                p
            })
            .collect();
        let ps = PointSet::new(n, pts)?;
        if has_charges {
            let charges = rows
                .iter()
                .map(|r| Complex64::new(r[D], r[D + 1]))
                .collect();
            ps.with_charges(charges)
        } else {
            Ok(ps)
        }
    }

    match dim {
        2 => Ok(AnyPointSet::D2(build::<2>(n, &rows, has_charges)?)),
        3 => Ok(AnyPointSet::D3(build::<3>(n, &rows, has_charges)?)),
        other => Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("dim must be 2 or 3, got {other}"),
        }),
    }
}

pub fn read_point_set_file(path: impl AsRef<Path>) -> Result<AnyPointSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: format!("cannot open: {e}"),
    })?;
    read_point_set(
        std::io::BufReader::new(file),
        &path.display().to_string(),
    )
}

/// Potentials file: one line per target, `x y [z] re im`, target order
/// preserved.
pub fn write_potentials<const D: usize>(
    mut w: impl Write,
    targets: &PointSet<D>,
    potentials: &[Complex64],
) -> Result<()> {
    debug_assert_eq!(targets.len(), potentials.len());
    for (pt, u) in targets.points().iter().zip(potentials.iter()) {
        for v in pt.iter() {
            write!(w, "{v:.16e} ")?;
        }
        writeln!(w, "{:.16e} {:.16e}", u.re, u.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{attach_random_charges, sample_curve_2d, GeometrySpec};

    #[test]
    fn point_set_round_trips_exactly() {
        let ps = sample_curve_2d(&GeometrySpec::ellipse_x(), 16, 5.0).unwrap();
        let ps = attach_random_charges(ps, 42);
        let mut buf = Vec::new();
        write_point_set(&mut buf, &ps).unwrap();
        let back = read_point_set(buf.as_slice(), "mem").unwrap();
        match back {
            AnyPointSet::D2(got) => assert_eq!(got, ps),
            _ => panic!("wrong dimension"),
        }
    }

    #[test]
    fn header_is_as_documented() {
        let ps = PointSet::<2>::new(64, vec![[1.0, 2.0]])
            .unwrap()
            .with_charges(vec![Complex64::new(0.5, -0.5)])
            .unwrap();
        let mut buf = Vec::new();
        write_point_set(&mut buf, &ps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("2 64 1 1\n"), "{text}");
    }

    #[test]
    fn malformed_inputs_are_reported_with_lines() {
        let err = read_point_set("2 16 2 0\n1.0 2.0\noops 4.0\n".as_bytes(), "t").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(read_point_set("".as_bytes(), "t").is_err());
        assert!(read_point_set("2 16 5 0\n1 2\n".as_bytes(), "t").is_err());
        assert!(read_point_set("4 16 0 0\n".as_bytes(), "t").is_err());
    }

    #[test]
    fn potentials_format_has_coords_then_complex() {
        let ps = PointSet::<3>::new(4, vec![[1.0, 2.0, 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_potentials(&mut buf, &ps, &[Complex64::new(1.5, -2.5)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let tokens: Vec<&str> = text.split_whitespace().collect();
        assert_eq!(tokens.len(), 5);
        assert_eq!(tokens[3].parse::<f64>().unwrap(), 1.5);
        assert_eq!(tokens[4].parse::<f64>().unwrap(), -2.5);
    }
}
