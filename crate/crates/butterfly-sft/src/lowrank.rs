//! Per-box-pair numerics: Cartesian grids, the fixed `G`/`H` operators, and
//! tensor-structured application of the fitting and transition maps.
//!
//! For a complementary box pair `(A, B)` with `w^A * w^B = N`, the fitting
//! matrix `M[(l..),(l'..)] = exp(2*pi*i * x_l . k_l' / N)` between the two
//! Cartesian grids is a Kronecker product of one matrix per axis, and each
//! axis factor splits into `diag * G * diag` with `G` independent of `N` and
//! of the boxes. The parent-from-child transition matrix splits the same way
//! around `H`. Everything here works axis by axis on `p^d` tensors, so a
//! solve or transition costs `O(p^(d+1))` instead of `O(p^(2d))`.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMat, Lu};
use crate::{dot, Error, Result};

const TWO_PI: f64 = std::f64::consts::TAU;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Smallest supported grid size. `p = 2` would make `G` the all-ones matrix.
pub const MIN_GRID_SIZE: usize = 3;
/// Largest supported grid size; beyond this `G` is too ill-conditioned.
pub const MAX_GRID_SIZE: usize = 15;

/// Residual bound the factorization of `G` must meet at assembly time.
const SOLVER_RESIDUAL_BOUND: f64 = 1e-10;

/// The oscillatory kernel `exp(2*pi*i * x . k / N)`.
#[inline]
pub fn kernel_eval<const D: usize>(x: &[f64; D], k: &[f64; D], n: u64) -> Complex64 {
    Complex64::cis(TWO_PI * dot(x, k) / n as f64)
}

/// A `p^D` Cartesian grid covering a box, endpoints included on every axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<const D: usize> {
    pub corner: [f64; D],
    pub width: f64,
    pub p: usize,
}

/// Builds the grid with nodes `corner + l * width/(p-1)` per axis.
pub fn cartesian_grid<const D: usize>(corner: [f64; D], width: f64, p: usize) -> Result<Grid<D>> {
    if p < MIN_GRID_SIZE {
        return Err(Error::UnsupportedGridSize(p));
    }
    assert!(width > 0.0, "grid width must be positive");
    Ok(Grid { corner, width, p })
}

impl<const D: usize> Grid<D> {
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.width / (self.p - 1) as f64
    }

    #[inline]
    pub fn axis_node(&self, axis: usize, l: usize) -> f64 {
        self.corner[axis] + l as f64 * self.spacing()
    }

    pub fn node_count(&self) -> usize {
        self.p.pow(D as u32)
    }

    /// Node for a flat row-major index (axis 0 slowest).
    pub fn node_at(&self, flat: usize) -> [f64; D] {
        let mut idx = flat;
        let mut out = [0.0; D];
        for ax in (0..D).rev() {
            out[ax] = self.axis_node(ax, idx % self.p);
            idx /= self.p;
        }
        out
    }

    /// All `p^D` nodes in row-major multi-index order.
    pub fn nodes(&self) -> Vec<[f64; D]> {
        (0..self.node_count()).map(|i| self.node_at(i)).collect()
    }
}

// ---------------------------------------------------------------------------
// Equivalent-charge arrays, instrumented for the two-adjacent-levels storage
// contract: every live array is counted so the peak can be asserted against
// the per-level pair counts.
// ---------------------------------------------------------------------------

static LIVE_ARRAYS: AtomicUsize = AtomicUsize::new(0);
static PEAK_ARRAYS: AtomicUsize = AtomicUsize::new(0);

/// `p^d` complex values on a box grid: equivalent charges or check potentials.
#[derive(Debug, PartialEq)]
pub struct ChargeArray {
    values: Vec<Complex64>,
}

impl ChargeArray {
    fn register() {
        let live = LIVE_ARRAYS.fetch_add(1, Ordering::Relaxed) + 1;
        PEAK_ARRAYS.fetch_max(live, Ordering::Relaxed);
    }

    pub fn zeros(len: usize) -> Self {
        Self::register();
        ChargeArray {
            values: vec![ZERO; len],
        }
    }

    pub fn from_values(values: Vec<Complex64>) -> Self {
        Self::register();
        ChargeArray { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.values.iter()
    }
}

impl Clone for ChargeArray {
    fn clone(&self) -> Self {
        Self::from_values(self.values.clone())
    }
}

impl Drop for ChargeArray {
    fn drop(&mut self) {
        LIVE_ARRAYS.fetch_sub(1, Ordering::Relaxed);
    }
}

impl std::ops::Index<usize> for ChargeArray {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for ChargeArray {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.values[i]
    }
}

/// Number of charge arrays currently alive in the process.
pub fn live_charge_arrays() -> usize {
    LIVE_ARRAYS.load(Ordering::Relaxed)
}

/// High-water mark of live charge arrays since the last reset.
pub fn peak_live_charge_arrays() -> usize {
    PEAK_ARRAYS.load(Ordering::Relaxed)
}

/// Resets the peak to the current live count.
pub fn reset_charge_array_peak() {
    PEAK_ARRAYS.store(LIVE_ARRAYS.load(Ordering::Relaxed), Ordering::Relaxed);
}

// ---------------------------------------------------------------------------
// Fixed operators
// ---------------------------------------------------------------------------

/// The fixed `p x p` matrices `G` and `H` plus a pivoted factorization of `G`.
///
/// `G[l,l'] = exp(2*pi*i * l*l'/(p-1)^2)` carries all non-diagonal structure
/// of the fitting operator for complementary pairs; `H[l,l'] =
/// exp(pi*i * l*l'/(p-1)^2)` plays the same role for the half-width
/// parent-from-child transition. Both depend only on `p`, so one assembly is
/// shared across every box pair of a transform.
#[derive(Debug, Clone)]
pub struct GridOperators {
    p: usize,
    g: CMat,
    h: CMat,
    g_lu: Lu,
    condition: f64,
    /// cis(pi * r / (p-1)) for r in 0..2(p-1): every diagonal factor of the
    /// fit and transition operators on lattice boxes is one of these.
    unity: Vec<Complex64>,
}

/// Builds the operators for grid size `p` and factors `G` once.
///
/// Fails with [`Error::IllConditionedOperators`] if the factorization cannot
/// reproduce random right-hand sides to a 1e-10 relative residual.
pub fn assemble_operators(p: usize) -> Result<GridOperators> {
    if !(MIN_GRID_SIZE..=MAX_GRID_SIZE).contains(&p) {
        return Err(Error::UnsupportedGridSize(p));
    }
    let denom = ((p - 1) * (p - 1)) as f64;
    let g = CMat::from_fn(p, |l, lp| Complex64::cis(TWO_PI * (l * lp) as f64 / denom));
    let h = CMat::from_fn(p, |l, lp| {
        Complex64::cis(std::f64::consts::PI * (l * lp) as f64 / denom)
    });
    let g_lu = Lu::factor(&g).map_err(|_| Error::IllConditionedOperators {
        residual: f64::INFINITY,
        condition: f64::INFINITY,
    })?;
    let condition = g.one_norm() * g_lu.inverse().one_norm();

    // Self-check: the factorization must reproduce right-hand sides of the
    // kind the fit actually sees, i.e. y in the range of G over bounded
    // charges. (Arbitrary y can carry components along the smallest singular
    // directions of G, whose solutions are too large to even round to f64
    // without violating any fixed residual bound.)
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let z: Vec<Complex64> = (0..p)
            .map(|_| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        let y = g.mul_vec(&z);
        let mut x = y.clone();
        g_lu.solve_in_place(&mut x);
        let gx = g.mul_vec(&x);
        let num: f64 = gx
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    if worst > SOLVER_RESIDUAL_BOUND {
        return Err(Error::IllConditionedOperators {
            residual: worst,
            condition,
        });
    }
    let q = p - 1;
    let unity = (0..2 * q)
        .map(|r| Complex64::cis(std::f64::consts::PI * r as f64 / q as f64))
        .collect();
    Ok(GridOperators {
        p,
        g,
        h,
        g_lu,
        condition,
        unity,
    })
}

impl GridOperators {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn g_entry(&self, l: usize, lp: usize) -> Complex64 {
        self.g.at(l, lp)
    }

    pub fn h_entry(&self, l: usize, lp: usize) -> Complex64 {
        self.h.at(l, lp)
    }

    /// One-norm condition estimate of `G` from the explicit inverse.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// Solves `G z = y` in place using the stored factorization.
    pub fn solve_g(&self, y: &mut [Complex64]) {
        self.g_lu.solve_in_place(y);
    }
}

// ---------------------------------------------------------------------------
// Phase vectors and per-axis tensor machinery
// ---------------------------------------------------------------------------

/// Fills `out[l] = cis(base + l*step)` by phase recurrence (two trig calls).
pub(crate) fn phase_vector_into(base: f64, step: f64, p: usize, out: &mut Vec<Complex64>) {
    out.clear();
    let rot = Complex64::cis(step);
    let mut cur = Complex64::cis(base);
    for _ in 0..p {
        out.push(cur);
        cur *= rot;
    }
}

/// Fills `out[l] = cis(base + l*step)` with one trig call per entry. The fit
/// diagonals use this: a p-step recurrence drifts by a few ulps, and the
/// ill-conditioned fit at large `p` amplifies even that.
pub(crate) fn exact_phase_vector_into(base: f64, step: f64, p: usize, out: &mut Vec<Complex64>) {
    out.clear();
    for l in 0..p {
        out.push(Complex64::cis(base + l as f64 * step));
    }
}

#[inline]
fn axis_stride(p: usize, d: usize, axis: usize) -> usize {
    p.pow((d - 1 - axis) as u32)
}

/// Base offsets of every length-`p` fiber along `axis` of a row-major `p^d`
/// tensor; element `l` of a fiber lives at `base + l * stride(axis)`.
fn fiber_bases(p: usize, d: usize, axis: usize) -> impl Iterator<Item = usize> {
    let stride = axis_stride(p, d, axis);
    let outer = p.pow((d - 1) as u32);
    (0..outer).map(move |o| {
        let pre = o / stride;
        let post = o % stride;
        pre * stride * p + post
    })
}

/// Reusable buffers for the per-axis passes; one per thread in the sweep.
pub(crate) struct AxisScratch {
    fiber_in: Vec<Complex64>,
    fiber_out: Vec<Complex64>,
    diag_a: Vec<Complex64>,
    diag_b: Vec<Complex64>,
    pub(crate) tensor: Vec<Complex64>,
    eval: Vec<Complex64>,
    pub(crate) eval_phases: Vec<Vec<Complex64>>,
}

impl AxisScratch {
    pub(crate) fn new(p: usize, d: usize) -> Self {
        let volume = p.pow(d as u32);
        AxisScratch {
            fiber_in: vec![ZERO; p],
            fiber_out: vec![ZERO; p],
            diag_a: Vec::with_capacity(p),
            diag_b: Vec::with_capacity(p),
            tensor: vec![ZERO; volume],
            eval: vec![ZERO; volume / p],
            eval_phases: (0..d).map(|_| Vec::with_capacity(p)).collect(),
        }
    }
}

fn check_width_product(product: f64, required: f64) -> Result<()> {
    // widths are powers of two, so this comparison is exact
    if product != required {
        return Err(Error::WidthProductMismatch { product, required });
    }
    Ok(())
}

/// Integer lattice coordinate `corner / width`, when exact.
#[inline]
fn lattice_coord(corner: f64, width: f64) -> Option<u64> {
    let ratio = corner / width;
    if ratio >= 0.0 && ratio <= u64::MAX as f64 && ratio.fract() == 0.0 {
        Some(ratio as u64)
    } else {
        None
    }
}

/// `(a * b) mod 1` with the product's rounding error recovered via fma, so
/// the result is ulp-accurate even when `a * b` is huge.
#[inline]
pub(crate) fn prod_frac(a: f64, b: f64) -> f64 {
    let p = a * b;
    let e = f64::mul_add(a, b, -p);
    (p - p.round()) + e
}

/// `(v / d) mod 1` for integer `d`, quotient rounding recovered via fma.
#[inline]
pub(crate) fn div_frac(v: f64, d: f64) -> f64 {
    let q = v / d;
    let r = f64::mul_add(q, -d, v);
    (q - q.round()) + r / d
}

/// In-place fit solve. On entry `values` holds check potentials on the `A`
/// grid; on exit it holds the equivalent charges on the `B` grid.
///
/// With `w^A w^B = N`, the axis diagonals collapse to roots of unity indexed
/// by the integer box coordinates: `(c^A + l w^A/(p-1)) c^B / N` is an
/// integer plus `l*ib/(p-1)`. Boxes on the dyadic lattice therefore get
/// exact diagonals from the unity table; anything else falls back to trig.
pub(crate) fn solve_in_place<const D: usize>(
    values: &mut [Complex64],
    a: &Grid<D>,
    b: &Grid<D>,
    ops: &GridOperators,
    n: u64,
    ws: &mut AxisScratch,
) {
    let p = ops.p;
    debug_assert_eq!(values.len(), p.pow(D as u32));
    let nf = n as f64;
    let q = (p - 1) as u128;
    for ax in 0..D {
        let ca = a.corner[ax];
        let cb = b.corner[ax];
        match (lattice_coord(ca, a.width), lattice_coord(cb, b.width)) {
            (Some(ia), Some(ib)) => {
                // conjugates of cis(2*pi * l*ib / (p-1)) and of the ia twin
                ws.diag_a.clear();
                ws.diag_b.clear();
                for l in 0..p as u128 {
                    let ra = (2 * ((l * ib as u128) % q)) % (2 * q);
                    let rb = (2 * ((l * ia as u128) % q)) % (2 * q);
                    ws.diag_a.push(ops.unity[((2 * q - ra) % (2 * q)) as usize]);
                    ws.diag_b.push(ops.unity[((2 * q - rb) % (2 * q)) as usize]);
                }
            }
            _ => {
                exact_phase_vector_into(
                    -TWO_PI * ca * cb / nf,
                    -TWO_PI * a.spacing() * cb / nf,
                    p,
                    &mut ws.diag_a,
                );
                exact_phase_vector_into(0.0, -TWO_PI * ca * b.spacing() / nf, p, &mut ws.diag_b);
            }
        }
        let stride = axis_stride(p, D, ax);
        for base in fiber_bases(p, D, ax) {
            for l in 0..p {
                ws.fiber_in[l] = values[base + l * stride] * ws.diag_a[l];
            }
            ops.g_lu.solve_in_place(&mut ws.fiber_in);
            for l in 0..p {
                values[base + l * stride] = ws.fiber_in[l] * ws.diag_b[l];
            }
        }
    }
}

/// In-place transition. On entry `values` holds equivalent charges on the
/// child grid `B_c`; on exit it holds check potentials on the `A` grid.
///
/// With `w^A w^{B_c} = N/2` the axis diagonals are again roots of unity:
/// `(c^A + l w^A/(p-1)) c^{B_c} / N = (ia*ibc)/2 + l*ibc/(2(p-1))`.
pub(crate) fn transition_in_place<const D: usize>(
    values: &mut [Complex64],
    a: &Grid<D>,
    b_child: &Grid<D>,
    ops: &GridOperators,
    n: u64,
    ws: &mut AxisScratch,
) {
    let p = ops.p;
    debug_assert_eq!(values.len(), p.pow(D as u32));
    let nf = n as f64;
    let q = (p - 1) as u128;
    for ax in 0..D {
        let ca = a.corner[ax];
        let cbc = b_child.corner[ax];
        match (lattice_coord(ca, a.width), lattice_coord(cbc, b_child.width)) {
            (Some(ia), Some(ibc)) => {
                ws.diag_a.clear();
                ws.diag_b.clear();
                let (ia, ibc) = (ia as u128, ibc as u128);
                for l in 0..p as u128 {
                    let ra = (ia * ibc * q + l * ibc) % (2 * q);
                    let rb = (l * ia) % (2 * q);
                    ws.diag_a.push(ops.unity[ra as usize]);
                    ws.diag_b.push(ops.unity[rb as usize]);
                }
            }
            _ => {
                exact_phase_vector_into(
                    TWO_PI * ca * cbc / nf,
                    TWO_PI * a.spacing() * cbc / nf,
                    p,
                    &mut ws.diag_a,
                );
                exact_phase_vector_into(
                    0.0,
                    TWO_PI * ca * b_child.spacing() / nf,
                    p,
                    &mut ws.diag_b,
                );
            }
        }
        let stride = axis_stride(p, D, ax);
        for base in fiber_bases(p, D, ax) {
            for l in 0..p {
                ws.fiber_in[l] = values[base + l * stride] * ws.diag_b[l];
            }
            ops.h.mul_vec_into(&ws.fiber_in, &mut ws.fiber_out);
            for l in 0..p {
                values[base + l * stride] = ws.fiber_out[l] * ws.diag_a[l];
            }
        }
    }
}

/// Solves `(M_1 (x) M_2 [(x) M_3]) f = u` for the equivalent charges of the
/// pair `(A, B)`, consuming the check potentials in place.
///
/// Requires `w^A * w^B = N` exactly; the axis factors then split around `G`.
pub fn solve_equivalent_charges<const D: usize>(
    a: &Grid<D>,
    b: &Grid<D>,
    mut u: ChargeArray,
    ops: &GridOperators,
    n: u64,
) -> Result<ChargeArray> {
    check_width_product(a.width * b.width, n as f64)?;
    let mut ws = AxisScratch::new(ops.p, D);
    solve_in_place(u.as_mut_slice(), a, b, ops, n, &mut ws);
    Ok(u)
}

/// Check potentials on the `A` grid generated by the equivalent charges of a
/// child box `B_c`, via `diag * H * diag` along each tensor axis.
///
/// Requires `w^A * w^{B_c} = N/2` exactly (the half-width child relation).
pub fn apply_child_to_parent<const D: usize>(
    a: &Grid<D>,
    b_child: &Grid<D>,
    f_child: &ChargeArray,
    ops: &GridOperators,
    n: u64,
) -> Result<ChargeArray> {
    check_width_product(a.width * b_child.width, n as f64 / 2.0)?;
    let mut out = f_child.clone();
    let mut ws = AxisScratch::new(ops.p, D);
    transition_in_place(out.as_mut_slice(), a, b_child, ops, n, &mut ws);
    Ok(out)
}

/// Sweep-internal variant of [`apply_child_to_parent`]: accumulates into a
/// plain buffer through the scratch tensor, so no extra charge array is ever
/// alive.
pub(crate) fn accumulate_child_potentials<const D: usize>(
    acc: &mut [Complex64],
    a: &Grid<D>,
    b_child: &Grid<D>,
    f_child: &[Complex64],
    ops: &GridOperators,
    n: u64,
    ws: &mut AxisScratch,
) {
    let mut tensor = std::mem::take(&mut ws.tensor);
    tensor.copy_from_slice(f_child);
    transition_in_place(&mut tensor, a, b_child, ops, n, ws);
    for (dst, src) in acc.iter_mut().zip(tensor.iter()) {
        *dst += src;
    }
    ws.tensor = tensor;
}

/// Check potentials on a box grid from one point charge:
/// `u[node] = charge * kernel_eval(node, k, n)` for every grid node, via
/// per-axis phase recurrences with arguments reduced mod 2*pi. This is the
/// well-conditioned way to build fit data; summing naive `kernel_eval`
/// calls instead leaves `O(eps * N)` phase noise that the fit amplifies.
pub fn charge_check_potentials<const D: usize>(
    grid: &Grid<D>,
    k: &[f64; D],
    charge: Complex64,
    n: u64,
) -> Vec<Complex64> {
    let p = grid.p;
    let nf = n as f64;
    let mut axes: Vec<Vec<Complex64>> = Vec::with_capacity(D);
    for ax in 0..D {
        let base = TWO_PI * prod_frac(k[ax], grid.corner[ax] / nf);
        let step = TWO_PI * div_frac(k[ax] * (grid.width / nf), (p - 1) as f64);
        let mut v = Vec::new();
        phase_vector_into(base, step, p, &mut v);
        axes.push(v);
    }
    let mut out = vec![charge];
    for axis in axes.iter() {
        let mut next = Vec::with_capacity(out.len() * p);
        for v in &out {
            for w in axis.iter() {
                next.push(v * w);
            }
        }
        out = next;
    }
    out
}

/// Evaluates the grid-charge expansion at one point:
/// `sum over nodes of kernel(x, node) * f[node]`, using the separable
/// per-axis phases (`O(d*p)` trig calls, `O(p^d)` multiplies).
pub fn evaluate_from_charges<const D: usize>(
    x: &[f64; D],
    b: &Grid<D>,
    f: &ChargeArray,
    n: u64,
) -> Complex64 {
    let mut ws = AxisScratch::new(b.p, D);
    evaluate_with_scratch(x, b, f.as_slice(), n, &mut ws)
}

pub(crate) fn evaluate_with_scratch<const D: usize>(
    x: &[f64; D],
    b: &Grid<D>,
    f: &[Complex64],
    n: u64,
    ws: &mut AxisScratch,
) -> Complex64 {
    let p = b.p;
    debug_assert_eq!(f.len(), p.pow(D as u32));
    let nf = n as f64;
    for ax in 0..D {
        // arguments reduced mod 2*pi before any trig call; the raw phases
        // grow like N and their rounding would otherwise dominate
        let base = TWO_PI * prod_frac(x[ax], b.corner[ax] / nf);
        let step = TWO_PI * div_frac(x[ax] * (b.width / nf), (p - 1) as f64);
        phase_vector_into(base, step, p, &mut ws.eval_phases[ax]);
    }
    if D == 1 {
        return cdot(f, &ws.eval_phases[0]);
    }
    // contract the fastest axis out of `f`, then keep folding in place
    let phases = &ws.eval_phases[D - 1];
    for (i, chunk) in f.chunks_exact(p).enumerate() {
        ws.eval[i] = cdot(chunk, phases);
    }
    let mut len = f.len() / p;
    for ax in (1..D - 1).rev() {
        let phases = &ws.eval_phases[ax];
        len /= p;
        for i in 0..len {
            let mut acc = ZERO;
            for l in 0..p {
                acc += ws.eval[i * p + l] * phases[l];
            }
            ws.eval[i] = acc;
        }
    }
    cdot(&ws.eval[..p], &ws.eval_phases[0])
}

#[inline]
fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x * y;
    }
    acc
}

// ---------------------------------------------------------------------------
// Truncation-rank diagnostic
// ---------------------------------------------------------------------------

/// Taylor term count guaranteeing `|exp(2*pi*i*x) - partial sum| <= epsilon`
/// for all `|x| <= z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankBound {
    pub z: f64,
    pub epsilon: f64,
    pub terms: usize,
}

/// `terms = ceil(max(4*e*pi*z, log2(1/epsilon)))`, a diagnostic only; the
/// operational rank of the scheme is set by the grid size `p`.
pub fn taylor_rank_bound(z: f64, epsilon: f64) -> Result<RankBound> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    assert!(z >= 0.0, "bound radius must be non-negative");
    let cap = 4.0 * std::f64::consts::E * std::f64::consts::PI * z;
    let bits = (1.0 / epsilon).log2();
    let terms = (cap.max(bits)).ceil() as usize;
    Ok(RankBound {
        z,
        epsilon,
        terms: terms.max(1),
    })
}

/// Partial sum `sum_{t < terms} (2*pi*i*x)^t / t!` of `exp(2*pi*i*x)`.
pub fn taylor_partial_sum(x: f64, terms: usize) -> Complex64 {
    let arg = Complex64::new(0.0, TWO_PI * x);
    let mut term = Complex64::new(1.0, 0.0);
    let mut acc = ZERO;
    for t in 0..terms {
        acc += term;
        term = term * arg / (t + 1) as f64;
    }
    acc
}
