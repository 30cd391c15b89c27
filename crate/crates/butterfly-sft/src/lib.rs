//! Fast sparse Fourier transforms supported on smooth curves and surfaces.
//!
//! Given source points `k_j` and target points `x_i`, both sampled from
//! curves (2D) or surfaces (3D) scaled to the box `[0, N]^d`, this crate
//! evaluates
//!
//! ```text
//! u_i = sum_j exp(2*pi*i * x_i . k_j / N) * f_j
//! ```
//!
//! in `O(N log N)` time instead of the `O(N^2)` direct sum. The scheme pairs
//! an adaptive spatial tree over the targets with one over the sources and
//! represents the interaction of every complementary box pair (widths
//! multiplying to `N`) through a small set of equivalent charges on a
//! Cartesian grid. All fitting and transition operators factor into diagonal
//! phases around two fixed `p x p` matrices, applied tensor-axis by
//! tensor-axis, which keeps both runtime and storage linear up to logs.
//!
//! Modules:
//! - [`geometry`]: point-set generation on curves/surfaces, random charges,
//!   far-field problem rescaling, point-set text I/O.
//! - [`mesh`]: Wavefront OBJ ingestion and area-weighted surface sampling.
//! - [`tree`]: adaptive dyadic quadtrees/octrees with unit-width leaves.
//! - [`lowrank`]: grids, the fixed `G`/`H` operators, Kronecker-structured
//!   solves and transitions, equivalent-charge arrays.
//! - [`transform`]: the level sweep orchestrating the full fast transform.
//! - [`oracle`]: direct evaluation, sampled error estimation, direct-time
//!   extrapolation.

pub mod farfield;
pub mod geometry;
pub mod io;
pub mod lowrank;
pub mod mesh;
pub mod oracle;
pub mod transform;
pub mod tree;

mod linalg;

pub use num_complex::Complex64;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain size {0} is not a power of two")]
    DomainNotPowerOfTwo(u64),
    #[error("point {index} lies outside [0, {n}]^{dim}: {coords:?}")]
    PointOutsideDomain {
        index: usize,
        n: u64,
        dim: usize,
        coords: Vec<f64>,
    },
    #[error("geometry spec is {actual}-dimensional, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("incompatible point sets: {0}")]
    IncompatiblePointSets(String),
    #[error("{charges} charges for {points} points")]
    ChargeCountMismatch { charges: usize, points: usize },
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("grid size p = {0} unsupported; need 3 <= p <= 15")]
    UnsupportedGridSize(usize),
    #[error("fit operator solve residual {residual:.2e} exceeds 1e-10 (condition estimate {condition:.2e})")]
    IllConditionedOperators { residual: f64, condition: f64 },
    #[error("box width product {product} does not equal required {required}")]
    WidthProductMismatch { product: f64, required: f64 },
    #[error("epsilon = {0} must lie in (0, 1)")]
    InvalidEpsilon(f64),
    #[error("direction {index} is not unit length: |v| = {norm}")]
    NonUnitDirection { index: usize, norm: f64 },
    #[error("surface has zero area")]
    ZeroAreaSurface,
    #[error("exact reference values on the sample are all zero")]
    ZeroReference,
    #[error("tree level {level} out of range 0..={max}")]
    LevelOutOfRange { level: u32, max: u32 },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// `true` iff `n` is a positive power of two.
pub fn is_power_of_two(n: u64) -> bool {
    n > 0 && n & (n - 1) == 0
}

pub(crate) fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for c in 0..D {
        s += a[c] * b[c];
    }
    s
}
