//! Wavefront OBJ ingestion and quasi-uniform surface sampling of triangle
//! meshes. Only `v` and `f` records are honored; polygons are fan-
//! triangulated; everything else is ignored.

use std::io::BufRead;
use std::path::Path;

use crate::geometry::apportion;
use crate::{Error, Result};

/// Triangle mesh as raw vertex and face arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleSoup {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[u32; 3]>,
}

impl TriangleSoup {
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[u32; 3]>) -> Result<Self> {
        for f in &faces {
            if f.iter().any(|&i| i as usize >= vertices.len()) {
                return Err(Error::Parse {
                    path: "<memory>".into(),
                    line: 0,
                    message: format!("face references missing vertex: {f:?}"),
                });
            }
        }
        Ok(TriangleSoup { vertices, faces })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    fn triangle(&self, f: usize) -> [[f64; 3]; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    fn triangle_area(tri: &[[f64; 3]; 3]) -> f64 {
        let u = sub(&tri[1], &tri[0]);
        let v = sub(&tri[2], &tri[0]);
        0.5 * norm(&cross(&u, &v))
    }

    /// Total surface area.
    pub fn area(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| Self::triangle_area(&self.triangle(f)))
            .sum()
    }

    /// Uniformly rescales and recenters so the mesh sits strictly inside the
    /// unit box with a small margin, preserving aspect ratio.
    pub fn rescale_to_unit_box(&mut self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::ZeroAreaSurface);
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for c in 0..3 {
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        let extent = (0..3).map(|c| hi[c] - lo[c]).fold(0.0, f64::max);
        if extent <= 0.0 {
            return Err(Error::ZeroAreaSurface);
        }
        let scale = 0.96 / extent;
        for v in &mut self.vertices {
            for c in 0..3 {
                v[c] = 0.5 + scale * (v[c] - 0.5 * (lo[c] + hi[c]));
            }
        }
        Ok(())
    }

    /// Quasi-uniform sample with `density` points per unit area at scale
    /// `nf`: per-triangle counts proportional to area, low-discrepancy
    /// barycentric placement inside each triangle.
    pub fn sample(&self, nf: f64, density: f64) -> Result<Vec<[f64; 3]>> {
        let areas: Vec<f64> = (0..self.faces.len())
            .map(|f| Self::triangle_area(&self.triangle(f)))
            .collect();
        let total_area: f64 = areas.iter().sum::<f64>() * nf * nf;
        if total_area <= 0.0 {
            return Err(Error::ZeroAreaSurface);
        }
        let total = (density * total_area).round().max(1.0) as usize;
        let counts = apportion(total, &areas);
        let mut out = Vec::with_capacity(total);
        let mut halton_idx = 0u64;
        for (f, &cnt) in counts.iter().enumerate() {
            let tri = self.triangle(f);
            for _ in 0..cnt {
                halton_idx += 1;
                let u = halton(halton_idx, 2);
                let v = halton(halton_idx, 3);
                // square-root warp maps the unit square onto the triangle
                let su = u.sqrt();
                let (b0, b1, b2) = (1.0 - su, su * (1.0 - v), su * v);
                out.push([
                    (b0 * tri[0][0] + b1 * tri[1][0] + b2 * tri[2][0]) * nf,
                    (b0 * tri[0][1] + b1 * tri[1][1] + b2 * tri[2][1]) * nf,
                    (b0 * tri[0][2] + b1 * tri[1][2] + b2 * tri[2][2]) * nf,
                ]);
            }
        }
        Ok(out)
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Radical-inverse (van der Corput) value of `i` in the given base.
fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Parses OBJ `v`/`f` records from a reader without any rescaling.
pub fn parse_obj(reader: impl BufRead, path: &str) -> Result<TriangleSoup> {
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .by_ref()
                    .take(3)
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| Error::Parse {
                            path: path.into(),
                            line: lineno,
                            message: format!("bad vertex coordinate {t:?}"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: lineno,
                        message: "vertex needs 3 coordinates".into(),
                    });
                }
                vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in tokens {
                    // accept v, v/t, v/t/n and v//n forms; position only
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| Error::Parse {
                        path: path.into(),
                        line: lineno,
                        message: format!("bad face index {tok:?}"),
                    })?;
                    if i < 1 || i as usize > vertices.len() {
                        return Err(Error::Parse {
                            path: path.into(),
                            line: lineno,
                            message: format!(
                                "face index {i} out of range 1..={} (indices are 1-based)",
                                vertices.len()
                            ),
                        });
                    }
                    idx.push((i - 1) as u32);
                }
                if idx.len() < 3 {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: lineno,
                        message: format!("face has {} vertices, need at least 3", idx.len()),
                    });
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {} // comments, normals, texture records, groups...
        }
    }
    if vertices.is_empty() || faces.is_empty() {
        return Err(Error::Parse {
            path: path.into(),
            line: 0,
            message: "no v/f records found".into(),
        });
    }
    TriangleSoup::new(vertices, faces)
}

/// Loads an OBJ file and rescales it strictly inside the unit box.
pub fn load_obj_surface(path: impl AsRef<Path>) -> Result<TriangleSoup> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: format!("cannot open: {e}"),
    })?;
    let mut soup = parse_obj(std::io::BufReader::new(file), &path.display().to_string())?;
    soup.rescale_to_unit_box()?;
    Ok(soup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(s: &str) -> Result<TriangleSoup> {
        parse_obj(Cursor::new(s), "test.obj")
    }

    #[test]
    fn single_triangle_parses() {
        let soup = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(soup.vertices().len(), 3);
        assert_eq!(soup.faces().len(), 1);
        assert!((soup.area() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cube_area_before_rescale() {
        let side = 2.0;
        let mut obj = String::new();
        for z in [0.0, side] {
            for y in [0.0, side] {
                for x in [0.0, side] {
                    obj.push_str(&format!("v {x} {y} {z}\n"));
                }
            }
        }
        // 12 triangles over the 6 faces (vertices are 1-based, bit pattern xyz)
        let quads = [
            [1, 2, 4, 3], // z = 0
            [5, 7, 8, 6], // z = side
            [1, 5, 6, 2], // y = 0
            [3, 4, 8, 7], // y = side
            [1, 3, 7, 5], // x = 0
            [2, 6, 8, 4], // x = side
        ];
        for q in quads {
            obj.push_str(&format!("f {} {} {} {}\n", q[0], q[1], q[2], q[3]));
        }
        let soup = parse(&obj).unwrap();
        assert_eq!(soup.faces().len(), 12);
        assert!((soup.area() - 6.0 * side * side).abs() < 1e-9);
    }

    #[test]
    fn bad_indices_are_rejected() {
        assert!(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").is_err());
        assert!(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n").is_err());
        assert!(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n").is_err());
        assert!(parse("").is_err());
        assert!(parse("v 0 0\n").is_err());
    }

    #[test]
    fn slash_face_forms_are_accepted() {
        let soup = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2/1 3//1\n").unwrap();
        assert_eq!(soup.faces().len(), 1);
    }

    #[test]
    fn polygons_are_fan_triangulated() {
        let soup = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(soup.faces(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn rescale_fits_strictly_inside_unit_box() {
        let mut soup = parse("v -3 0 0\nv 5 0 0\nv 0 9 2\nf 1 2 3\n").unwrap();
        soup.rescale_to_unit_box().unwrap();
        for v in soup.vertices() {
            assert!(v.iter().all(|&c| c > 0.0 && c < 1.0), "{v:?}");
        }
        // aspect ratio is preserved: edge-length ratios unchanged
        let e0 = norm(&sub(&soup.vertices()[1], &soup.vertices()[0]));
        let e1 = norm(&sub(&soup.vertices()[2], &soup.vertices()[0]));
        assert!((e0 / e1 - 8.0 / (9.0f64.powi(2) + 3.0f64.powi(2) + 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sampling_respects_per_triangle_areas() {
        // two triangles, one four times the area of the other
        let soup = TriangleSoup::new(
            vec![
                [0.0, 0.0, 0.0],
                [0.4, 0.0, 0.0],
                [0.0, 0.4, 0.0],
                [0.5, 0.5, 0.0],
                [0.9, 0.5, 0.0],
                [0.5, 0.9, 0.0],
                [0.2, 0.0, 0.0],
                [0.0, 0.2, 0.0],
            ],
            vec![[0, 1, 2], [3, 4, 5], [0, 6, 7]],
        )
        .unwrap();
        let pts = soup.sample(1.0, 1000.0).unwrap();
        let want = (1000.0 * soup.area()).round() as usize;
        assert_eq!(pts.len(), want);
    }
}
