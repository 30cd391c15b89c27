//! Rescaling of far-field pattern evaluation onto the `[0, N]^d` transform.
//!
//! The far-field pattern of a scatterer with boundary density `f` is
//! `u(dir) = sum_j exp(-i*N * dir . y_j) * f_j` over surface samples
//! `y_j in [0,1]^d`, with `N` the wave number. An affine change of variables
//! turns this into the standard `exp(+2*pi*i * x . k / N)` form: targets
//! `x = (N/2)(dir + 1)`, sources `k = N(1 - y/pi)`, a per-source phase folded
//! into the charges and a per-target unit-modulus phase applied after the
//! transform. The mapping itself is exact; only the fast transform
//! contributes approximation error.

use num_complex::Complex64;

use crate::geometry::PointSet;
use crate::{is_power_of_two, Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Far-field evaluation task: directions on the unit sphere/circle, surface
/// samples in the unit box, and the boundary density (quadrature weights
/// folded in).
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldProblem<const D: usize> {
    pub directions: Vec<[f64; D]>,
    pub surface_points: Vec<[f64; D]>,
    pub density: Vec<Complex64>,
    pub wave_number: u64,
}

/// Output of [`farfield_adapter`]: a ready-to-transform source/target pair
/// plus the per-target diagonal phase that finishes the change of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMapping<const D: usize> {
    pub targets: PointSet<D>,
    pub sources: PointSet<D>,
    pub target_phases: Vec<Complex64>,
}

impl<const D: usize> FarFieldMapping<D> {
    /// Turns transform potentials into far-field values.
    pub fn apply_phases(&self, potentials: &[Complex64]) -> Vec<Complex64> {
        self.target_phases
            .iter()
            .zip(potentials.iter())
            .map(|(d, u)| d * u)
            .collect()
    }
}

/// Maps a far-field problem onto the standard transform geometry.
pub fn farfield_adapter<const D: usize>(fp: &FarFieldProblem<D>) -> Result<FarFieldMapping<D>> {
    let n = fp.wave_number;
    if !is_power_of_two(n) {
        return Err(Error::DomainNotPowerOfTwo(n));
    }
    if fp.density.len() != fp.surface_points.len() {
        return Err(Error::ChargeCountMismatch {
            charges: fp.density.len(),
            points: fp.surface_points.len(),
        });
    }
    for (index, dir) in fp.directions.iter().enumerate() {
        let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitDirection { index, norm });
        }
    }
    let nf = n as f64;

    let target_pts: Vec<[f64; D]> = fp
        .directions
        .iter()
        .map(|dir| {
            let mut x = [0.0; D];
            for c in 0..D {
                x[c] = 0.5 * nf * (dir[c] + 1.0);
            }
            x
        })
        .collect();
    let target_phases: Vec<Complex64> = target_pts
        .iter()
        .map(|x| Complex64::cis(-TAU * x.iter().sum::<f64>()))
        .collect();

    let source_pts: Vec<[f64; D]> = fp
        .surface_points
        .iter()
        .map(|y| {
            let mut k = [0.0; D];
            for c in 0..D {
                k[c] = nf * (1.0 - y[c] / std::f64::consts::PI);
            }
            k
        })
        .collect();
    let charges: Vec<Complex64> = fp
        .surface_points
        .iter()
        .zip(fp.density.iter())
        .map(|(y, f)| f * Complex64::cis(nf * y.iter().sum::<f64>()))
        .collect();

    let targets = PointSet::new(n, target_pts)?;
    let sources = PointSet::new(n, source_pts)?.with_charges(charges)?;
    Ok(FarFieldMapping {
        targets,
        sources,
        target_phases,
    })
}

/// Direct quadrature of the far-field sum, the adapter's ground truth.
pub fn direct_far_field<const D: usize>(fp: &FarFieldProblem<D>) -> Vec<Complex64> {
    let nf = fp.wave_number as f64;
    fp.directions
        .iter()
        .map(|dir| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (y, f) in fp.surface_points.iter().zip(fp.density.iter()) {
                let mut dp = 0.0;
                for c in 0..D {
                    dp += dir[c] * y[c];
                }
                acc += Complex64::cis(-nf * dp) * f;
            }
            acc
        })
        .collect()
}

/// Equal-area spread of `count` unit vectors over the sphere.
pub fn unit_sphere_directions(count: usize) -> Vec<[f64; 3]> {
    let bands = ((count as f64 * std::f64::consts::PI / 4.0).sqrt().round() as usize).max(1);
    let weights: Vec<f64> = (0..bands)
        .map(|m| {
            let t0 = std::f64::consts::PI * m as f64 / bands as f64;
            let t1 = std::f64::consts::PI * (m + 1) as f64 / bands as f64;
            t0.cos() - t1.cos()
        })
        .collect();
    let counts = crate::geometry::apportion(count, &weights);
    let golden = 0.618_033_988_749_894_9;
    let mut out = Vec::with_capacity(count);
    for (m, &cnt) in counts.iter().enumerate() {
        if cnt == 0 {
            continue;
        }
        let theta = std::f64::consts::PI * (m as f64 + 0.5) / bands as f64;
        let offset = (m as f64 * golden).fract();
        for k in 0..cnt {
            let phi = TAU * (k as f64 + offset) / cnt as f64;
            out.push([
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ]);
        }
    }
    out
}

/// `count` unit vectors evenly spaced on the circle.
pub fn unit_circle_directions(count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|k| {
            let t = TAU * k as f64 / count as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}
