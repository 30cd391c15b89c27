//! Point-set generation on curves and surfaces, plus random charges.
//!
//! Shapes are defined inside the unit box `[0,1]^d` and sampled after scaling
//! by the domain size `N`: curves with a fixed number of points per unit
//! length, surfaces with a fixed number per unit area.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mesh::{self, TriangleSoup};
use crate::{is_power_of_two, Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// A shape in the unit box. 2D kinds feed [`sample_curve_2d`], 3D kinds feed
/// [`sample_surface_3d`].
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    /// Axis-aligned ellipse; `semi_axes` strictly inside the box.
    Ellipse2d {
        center: [f64; 2],
        semi_axes: [f64; 2],
    },
    /// Named closed/open parametric curve preset.
    Parametric2d(CurvePreset),
    Sphere3d { center: [f64; 3], radius: f64 },
    /// Ring torus around the z-axis through `center`.
    Torus3d {
        center: [f64; 3],
        major_radius: f64,
        minor_radius: f64,
    },
    /// Triangle mesh loaded from a Wavefront OBJ file and rescaled into the
    /// unit box.
    Mesh3d { path: std::path::PathBuf },
}

/// Smooth test curves used where no analytic geometry is prescribed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvePreset {
    /// Five-lobed star `r(t) = 0.3 + 0.1 cos(5t)` around the box center.
    Star,
    /// Archimedean spiral, three turns from radius 0.05 to 0.45.
    Spiral,
}

impl GeometrySpec {
    /// Default target-side ellipse, close to the largest that fits.
    pub fn ellipse_x() -> Self {
        GeometrySpec::Ellipse2d {
            center: [0.5, 0.5],
            semi_axes: [0.49, 0.46],
        }
    }

    /// Default source-side ellipse, the target one rotated a quarter turn.
    pub fn ellipse_k() -> Self {
        GeometrySpec::Ellipse2d {
            center: [0.5, 0.5],
            semi_axes: [0.46, 0.49],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GeometrySpec::Ellipse2d { .. } | GeometrySpec::Parametric2d(_) => 2,
            _ => 3,
        }
    }

    /// Validates the strictly-inside-the-unit-box invariants.
    pub fn validate(&self) -> Result<()> {
        let inside = |c: f64, r: f64| c - r > 0.0 && c + r < 1.0;
        let ok = match self {
            GeometrySpec::Ellipse2d { center, semi_axes } => {
                semi_axes.iter().all(|&a| a > 0.0)
                    && inside(center[0], semi_axes[0])
                    && inside(center[1], semi_axes[1])
            }
            GeometrySpec::Parametric2d(_) => true,
            GeometrySpec::Sphere3d { center, radius } => {
                *radius > 0.0 && center.iter().all(|&c| inside(c, *radius))
            }
            GeometrySpec::Torus3d {
                center,
                major_radius,
                minor_radius,
            } => {
                *minor_radius > 0.0
                    && *major_radius > *minor_radius
                    && inside(center[0], major_radius + minor_radius)
                    && inside(center[1], major_radius + minor_radius)
                    && inside(center[2], *minor_radius)
            }
            GeometrySpec::Mesh3d { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatiblePointSets(format!(
                "shape does not fit strictly inside the unit box: {self:?}"
            )))
        }
    }
}

/// Points in `[0, N]^D`, optionally carrying one complex charge per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<const D: usize> {
    n_scale: u64,
    points: Vec<[f64; D]>,
    charges: Option<Vec<Complex64>>,
}

impl<const D: usize> PointSet<D> {
    /// Validates the domain invariants and wraps the raw data.
    pub fn new(n_scale: u64, points: Vec<[f64; D]>) -> Result<Self> {
        if !is_power_of_two(n_scale) {
            return Err(Error::DomainNotPowerOfTwo(n_scale));
        }
        let nf = n_scale as f64;
        for (index, pt) in points.iter().enumerate() {
            if pt.iter().any(|&c| !(0.0..=nf).contains(&c)) {
                return Err(Error::PointOutsideDomain {
                    index,
                    n: n_scale,
                    dim: D,
                    coords: pt.to_vec(),
                });
            }
        }
        Ok(PointSet {
            n_scale,
            points,
            charges: None,
        })
    }

    pub fn with_charges(mut self, charges: Vec<Complex64>) -> Result<Self> {
        if charges.len() != self.points.len() {
            return Err(Error::ChargeCountMismatch {
                charges: charges.len(),
                points: self.points.len(),
            });
        }
        self.charges = Some(charges);
        Ok(self)
    }

    pub fn n_scale(&self) -> u64 {
        self.n_scale
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; D]] {
        &self.points
    }

    pub fn charges(&self) -> Option<&[Complex64]> {
        self.charges.as_deref()
    }

    pub fn has_charges(&self) -> bool {
        self.charges.is_some()
    }
}

/// Attaches independent complex charges, uniform on `[-1,1]` per component,
/// reproducible from the seed. The set must not already carry charges.
pub fn attach_random_charges<const D: usize>(ps: PointSet<D>, seed: u64) -> PointSet<D> {
    assert!(!ps.has_charges(), "point set already has charges");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let charges = (0..ps.len())
        .map(|_| {
            Complex64::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        })
        .collect();
    PointSet {
        charges: Some(charges),
        ..ps
    }
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

struct Curve {
    eval: Box<dyn Fn(f64) -> [f64; 2]>,
    t_max: f64,
    closed: bool,
}

fn curve_for(spec: &GeometrySpec) -> Result<Curve> {
    match spec {
        GeometrySpec::Ellipse2d { center, semi_axes } => {
            let (c, ab) = (*center, *semi_axes);
            Ok(Curve {
                eval: Box::new(move |t| [c[0] + ab[0] * t.cos(), c[1] + ab[1] * t.sin()]),
                t_max: TAU,
                closed: true,
            })
        }
        GeometrySpec::Parametric2d(CurvePreset::Star) => Ok(Curve {
            eval: Box::new(|t| {
                let r = 0.3 + 0.1 * (5.0 * t).cos();
                [0.5 + r * t.cos(), 0.5 + r * t.sin()]
            }),
            t_max: TAU,
            closed: true,
        }),
        GeometrySpec::Parametric2d(CurvePreset::Spiral) => Ok(Curve {
            eval: Box::new(|t| {
                let turns = 3.0;
                let r = 0.05 + (0.45 - 0.05) * t / (turns * TAU);
                [0.5 + r * t.cos(), 0.5 + r * t.sin()]
            }),
            t_max: 3.0 * TAU,
            closed: false,
        }),
        other => Err(Error::DimensionMismatch {
            expected: 2,
            actual: other.dim(),
        }),
    }
}

/// Samples a 2D curve equispaced in arc length on the scaled curve, spacing
/// `1/density`; at least one point is always returned.
pub fn sample_curve_2d(spec: &GeometrySpec, n: u64, density: f64) -> Result<PointSet<2>> {
    if n < 2 || !is_power_of_two(n) {
        return Err(Error::DomainNotPowerOfTwo(n));
    }
    assert!(density > 0.0, "density must be positive");
    spec.validate()?;
    let curve = curve_for(spec)?;

    // arc-length table on a fine parameter grid, refined past the target count
    let rough = polyline_points(&curve, 4096);
    let rough_len = polyline_length(&rough);
    let target = (density * n as f64 * rough_len).round().max(1.0) as usize;
    let segments = (8 * target).max(8192);
    let pts = polyline_points(&curve, segments);
    let mut cum = Vec::with_capacity(pts.len());
    cum.push(0.0);
    for w in pts.windows(2) {
        let d = dist2(&w[0], &w[1]);
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    let count = (density * n as f64 * total).round().max(1.0) as usize;

    let mut out = Vec::with_capacity(count);
    let nf = n as f64;
    if count == 1 {
        let p = (curve.eval)(0.0);
        out.push([p[0] * nf, p[1] * nf]);
    } else {
        // closed curves wrap around; open curves include both endpoints
        let step = if curve.closed {
            total / count as f64
        } else {
            total / (count - 1) as f64
        };
        let mut seg = 0usize;
        for i in 0..count {
            let s = (i as f64 * step).min(total);
            while seg + 1 < cum.len() - 1 && cum[seg + 1] < s {
                seg += 1;
            }
            let ds = cum[seg + 1] - cum[seg];
            let frac = if ds > 0.0 { (s - cum[seg]) / ds } else { 0.0 };
            let t = (seg as f64 + frac) / segments as f64 * curve.t_max;
            let p = (curve.eval)(t);
            out.push([p[0] * nf, p[1] * nf]);
        }
    }
    PointSet::new(n, out)
}

fn polyline_points(curve: &Curve, segments: usize) -> Vec<[f64; 2]> {
    (0..=segments)
        .map(|i| (curve.eval)(i as f64 / segments as f64 * curve.t_max))
        .collect()
}

fn polyline_length(pts: &[[f64; 2]]) -> f64 {
    pts.windows(2).map(|w| dist2(&w[0], &w[1])).sum()
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

// ---------------------------------------------------------------------------
// Surfaces
// ---------------------------------------------------------------------------

/// Samples a 3D surface quasi-uniformly with `density` points per unit area
/// of the scaled surface. Analytic shapes use equal-area bands; meshes use
/// area-weighted triangle sampling.
pub fn sample_surface_3d(spec: &GeometrySpec, n: u64, density: f64) -> Result<PointSet<3>> {
    if !is_power_of_two(n) {
        return Err(Error::DomainNotPowerOfTwo(n));
    }
    assert!(density > 0.0, "density must be positive");
    spec.validate()?;
    let nf = n as f64;
    match spec {
        GeometrySpec::Sphere3d { center, radius } => {
            let pts = sample_sphere(*center, *radius, nf, density);
            PointSet::new(n, pts)
        }
        GeometrySpec::Torus3d {
            center,
            major_radius,
            minor_radius,
        } => {
            let pts = sample_torus(*center, *major_radius, *minor_radius, nf, density);
            PointSet::new(n, pts)
        }
        GeometrySpec::Mesh3d { path } => {
            let soup = mesh::load_obj_surface(path)?;
            sample_soup(&soup, n, density)
        }
        other => Err(Error::DimensionMismatch {
            expected: 3,
            actual: other.dim(),
        }),
    }
}

/// Samples an in-memory triangle soup at `density` points per unit area of
/// the scaled surface.
pub fn sample_soup(soup: &TriangleSoup, n: u64, density: f64) -> Result<PointSet<3>> {
    if !is_power_of_two(n) {
        return Err(Error::DomainNotPowerOfTwo(n));
    }
    let pts = soup.sample(n as f64, density)?;
    PointSet::new(n, pts)
}

/// Splits `total` into `weights.len()` integer parts proportional to the
/// weights (largest-remainder rounding), so the parts sum to `total` exactly.
pub(crate) fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 || weights.is_empty() {
        return vec![0; weights.len()];
    }
    let ideal: Vec<f64> = weights
        .iter()
        .map(|w| total as f64 * w / wsum)
        .collect();
    let mut parts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = ideal[i] - ideal[i].floor();
        let fj = ideal[j] - ideal[j].floor();
        fj.partial_cmp(&fi).unwrap().then(i.cmp(&j))
    });
    for &i in order.iter().take(total - assigned) {
        parts[i] += 1;
    }
    parts
}

fn sample_sphere(center: [f64; 3], radius: f64, nf: f64, density: f64) -> Vec<[f64; 3]> {
    let r_scaled = radius * nf;
    let area = 4.0 * std::f64::consts::PI * r_scaled * r_scaled;
    let total = (density * area).round().max(1.0) as usize;
    // equal-area latitude bands, each filled with an evenly spaced ring
    let per_point = (area / total as f64).sqrt();
    let bands = ((std::f64::consts::PI * r_scaled / per_point).round() as usize).max(1);
    let band_weights: Vec<f64> = (0..bands)
        .map(|m| {
            let t0 = std::f64::consts::PI * m as f64 / bands as f64;
            let t1 = std::f64::consts::PI * (m + 1) as f64 / bands as f64;
            t0.cos() - t1.cos()
        })
        .collect();
    let counts = apportion(total, &band_weights);
    let golden = 0.618_033_988_749_894_9;
    let mut out = Vec::with_capacity(total);
    for (m, &cnt) in counts.iter().enumerate() {
        if cnt == 0 {
            continue;
        }
        let theta = std::f64::consts::PI * (m as f64 + 0.5) / bands as f64;
        let offset = (m as f64 * golden).fract();
        for k in 0..cnt {
            let phi = TAU * (k as f64 + offset) / cnt as f64;
            out.push([
                (center[0] + radius * theta.sin() * phi.cos()) * nf,
                (center[1] + radius * theta.sin() * phi.sin()) * nf,
                (center[2] + radius * theta.cos()) * nf,
            ]);
        }
    }
    out
}

fn sample_torus(
    center: [f64; 3],
    major: f64,
    minor: f64,
    nf: f64,
    density: f64,
) -> Vec<[f64; 3]> {
    let area = 4.0 * std::f64::consts::PI.powi(2) * major * minor * nf * nf;
    let total = (density * area).round().max(1.0) as usize;
    let per_point = (area / total as f64).sqrt();
    let bands = ((TAU * minor * nf / per_point).round() as usize).max(1);
    // band area over the tube angle u: integral of (R + r cos u) du
    let band_weights: Vec<f64> = (0..bands)
        .map(|m| {
            let u0 = TAU * m as f64 / bands as f64;
            let u1 = TAU * (m + 1) as f64 / bands as f64;
            major * (u1 - u0) + minor * (u1.sin() - u0.sin())
        })
        .collect();
    let counts = apportion(total, &band_weights);
    let golden = 0.618_033_988_749_894_9;
    let mut out = Vec::with_capacity(total);
    for (m, &cnt) in counts.iter().enumerate() {
        if cnt == 0 {
            continue;
        }
        let u = TAU * (m as f64 + 0.5) / bands as f64;
        let ring = major + minor * u.cos();
        let offset = (m as f64 * golden).fract();
        for k in 0..cnt {
            let v = TAU * (k as f64 + offset) / cnt as f64;
            out.push([
                (center[0] + ring * v.cos()) * nf,
                (center[1] + ring * v.sin()) * nf,
                (center[2] + minor * u.sin()) * nf,
            ]);
        }
    }
    out
}
