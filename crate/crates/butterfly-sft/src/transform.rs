//! The fast transform: leaf initialization, upward level sweep over
//! complementary box pairs, and final evaluation.
//!
//! Source boxes `B` from the source tree at level `t` pair with target boxes
//! `A` at level `L - t`, so `w^A * w^B = N` always holds exactly. The sweep
//! walks `t` from the leaves to the root, building each pair's equivalent
//! charges from the charges of `(parent(A), child(B))` pairs one level below;
//! only two adjacent levels of charge arrays are ever alive.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::PointSet;
use crate::lowrank::{
    accumulate_child_potentials, assemble_operators, div_frac, evaluate_with_scratch,
    phase_vector_into, solve_in_place, AxisScratch, ChargeArray, Grid, GridOperators,
};
use crate::tree::{AdaptiveTree, BoxId};
use crate::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Reusable transform plan: both trees, the fixed operators, and copies of
/// the point coordinates. Building it once amortizes over many charge
/// vectors.
#[derive(Debug, Clone)]
pub struct TransformPlan<const D: usize> {
    tree_x: AdaptiveTree<D>,
    tree_k: AdaptiveTree<D>,
    source_points: Vec<[f64; D]>,
    target_points: Vec<[f64; D]>,
    ops: GridOperators,
    n: u64,
    depth: u32,
    parallel: bool,
}

/// Equivalent charges for every complementary pair at one source-tree level.
#[derive(Debug)]
pub struct LevelState<const D: usize> {
    level: u32,
    n_a: usize,
    entries: Vec<ChargeArray>, // indexed b_idx * n_a + a_idx
}

impl<const D: usize> LevelState<D> {
    /// Source-tree level `t` of this state.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn pair_count(&self) -> usize {
        self.entries.len()
    }

    fn get(&self, a_idx: usize, b_idx: usize) -> &ChargeArray {
        &self.entries[b_idx * self.n_a + a_idx]
    }
}

/// Per-run instrumentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformStats {
    /// Pairs processed at source-tree level `t` (index `t`, leaf level last).
    pub pairs_per_level: Vec<usize>,
}

impl TransformStats {
    pub fn total_pairs(&self) -> usize {
        self.pairs_per_level.iter().sum()
    }
}

/// Builds the plan: trees for both point sets plus the `p`-grid operators.
pub fn plan<const D: usize>(
    sources: &PointSet<D>,
    targets: &PointSet<D>,
    p: usize,
) -> Result<TransformPlan<D>> {
    if sources.n_scale() != targets.n_scale() {
        return Err(Error::IncompatiblePointSets(format!(
            "sources have N = {}, targets N = {}",
            sources.n_scale(),
            targets.n_scale()
        )));
    }
    if sources.is_empty() || targets.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let ops = assemble_operators(p)?;
    let tree_k = AdaptiveTree::build(sources)?;
    let tree_x = AdaptiveTree::build(targets)?;
    let n = sources.n_scale();
    Ok(TransformPlan {
        tree_x,
        tree_k,
        source_points: sources.points().to_vec(),
        target_points: targets.points().to_vec(),
        ops,
        n,
        depth: n.trailing_zeros(),
        parallel: false,
    })
}

impl<const D: usize> TransformPlan<D> {
    pub fn n_scale(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> usize {
        self.ops.p()
    }

    /// `L = log2(N)`, the leaf level of both trees.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn tree_x(&self) -> &AdaptiveTree<D> {
        &self.tree_x
    }

    pub fn tree_k(&self) -> &AdaptiveTree<D> {
        &self.tree_k
    }

    pub fn operators(&self) -> &GridOperators {
        &self.ops
    }

    /// Enables data-parallel pair processing. Pairs are independent and each
    /// pair's summation order is fixed, so results match serial mode.
    pub fn set_parallel(&mut self, parallel: bool) {
        self.parallel = parallel;
    }

    pub fn parallel(&self) -> bool {
        self.parallel
    }

    /// Pairs that the sweep processes at each source-tree level.
    pub fn pair_counts(&self) -> Vec<usize> {
        (0..=self.depth)
            .map(|t| {
                self.tree_k.box_count_at(t) * self.tree_x.box_count_at(self.depth - t)
            })
            .collect()
    }

    /// Equivalent charges of a pair in a level state, for inspection.
    pub fn charges_for<'a>(
        &self,
        state: &'a LevelState<D>,
        a: &BoxId<D>,
        b: &BoxId<D>,
    ) -> Option<&'a ChargeArray> {
        if b.level != state.level || a.level != self.depth - state.level {
            return None;
        }
        let a_idx = self.tree_x.index_of(a)?;
        let b_idx = self.tree_k.index_of(b)?;
        Some(state.get(a_idx, b_idx))
    }

    /// Full pipeline for one charge vector.
    pub fn transform(&self, charges: &[Complex64]) -> Result<Vec<Complex64>> {
        let state = leaf_init(self, charges)?;
        let state = upward_sweep(self, state)?;
        final_eval(self, &state)
    }

    /// Like [`TransformPlan::transform`], also reporting per-level pair
    /// counts.
    pub fn transform_with_stats(
        &self,
        charges: &[Complex64],
    ) -> Result<(Vec<Complex64>, TransformStats)> {
        let out = self.transform(charges)?;
        Ok((
            out,
            TransformStats {
                pairs_per_level: self.pair_counts(),
            },
        ))
    }

    fn root_grid_x(&self) -> Grid<D> {
        Grid {
            corner: [0.0; D],
            width: self.n as f64,
            p: self.ops.p(),
        }
    }

    fn root_grid_k(&self) -> Grid<D> {
        self.root_grid_x()
    }
}

/// Equivalent charges for every source leaf against the whole-domain target
/// box: check potentials are accumulated directly from the true sources, then
/// fit in place.
pub fn leaf_init<const D: usize>(
    plan: &TransformPlan<D>,
    charges: &[Complex64],
) -> Result<LevelState<D>> {
    if charges.len() != plan.source_points.len() {
        return Err(Error::ChargeCountMismatch {
            charges: charges.len(),
            points: plan.source_points.len(),
        });
    }
    let t = plan.depth;
    let n_b = plan.tree_k.box_count_at(t);
    let p = plan.ops.p();
    let a0 = plan.root_grid_x();

    let build = |ws: &mut AxisScratch, b_idx: usize| -> ChargeArray {
        let grid_b = plan.tree_k.grid_of(t, b_idx, p);
        let mut u = ChargeArray::zeros(grid_b.node_count());
        for &pj in plan.tree_k.point_indices(t, b_idx) {
            let k = &plan.source_points[pj as usize];
            let f = charges[pj as usize];
            // check potentials on the whole-domain grid: separable per-axis
            // phases with the argument reduced before any trig call
            for ax in 0..D {
                let step = TAU * div_frac(k[ax], (p - 1) as f64);
                phase_vector_into(0.0, step, p, &mut ws.eval_phases[ax]);
            }
            axpy_outer::<D>(u.as_mut_slice(), f, ws);
        }
        solve_in_place(u.as_mut_slice(), &a0, &grid_b, &plan.ops, plan.n, ws);
        u
    };

    let entries: Vec<ChargeArray> = if plan.parallel {
        (0..n_b)
            .into_par_iter()
            .map_init(|| AxisScratch::new(p, D), |ws, b_idx| build(ws, b_idx))
            .collect()
    } else {
        let mut ws = AxisScratch::new(p, D);
        (0..n_b).map(|b_idx| build(&mut ws, b_idx)).collect()
    };

    Ok(LevelState {
        level: t,
        n_a: 1,
        entries,
    })
}

/// Adds `f * outer(phases[0], ..., phases[D-1])` onto `u`, expanding the
/// tensor product in the scratch buffer.
fn axpy_outer<const D: usize>(u: &mut [Complex64], f: Complex64, ws: &mut AxisScratch) {
    let p = ws.eval_phases[0].len();
    let mut tensor = std::mem::take(&mut ws.tensor);
    tensor[0] = f;
    let mut len = 1usize;
    for ax in 0..D {
        let phases = &ws.eval_phases[ax];
        for i in (0..len).rev() {
            let v = tensor[i];
            for l in (0..p).rev() {
                tensor[i * p + l] = v * phases[l];
            }
        }
        len *= p;
    }
    for (dst, src) in u.iter_mut().zip(tensor[..len].iter()) {
        *dst += src;
    }
    ws.tensor = tensor;
}

/// One sweep step: from the state at level `t + 1` to the state at `t`.
pub fn advance_level<const D: usize>(
    plan: &TransformPlan<D>,
    prev: &LevelState<D>,
) -> Result<LevelState<D>> {
    assert!(prev.level > 0, "already at the root level");
    let t = prev.level - 1;
    let a_level = plan.depth - t;
    // complementary widths, exact in integers
    assert_eq!((plan.n >> a_level) * (plan.n >> t), plan.n);

    let n_b = plan.tree_k.box_count_at(t);
    let n_a = plan.tree_x.box_count_at(a_level);
    debug_assert_eq!(prev.n_a, plan.tree_x.box_count_at(a_level - 1));
    let p = plan.ops.p();

    let build = |ws: &mut AxisScratch, flat: usize| -> ChargeArray {
        let b_idx = flat / n_a;
        let a_idx = flat % n_a;
        let grid_a = plan.tree_x.grid_of(a_level, a_idx, p);
        let grid_b = plan.tree_k.grid_of(t, b_idx, p);
        let a_parent = plan.tree_x.parent_index(a_level, a_idx);
        let mut u = ChargeArray::zeros(grid_a.node_count());
        for &c_idx in plan.tree_k.child_indices(t, b_idx) {
            let grid_bc = plan.tree_k.grid_of(t + 1, c_idx as usize, p);
            let f_child = prev.get(a_parent, c_idx as usize);
            accumulate_child_potentials(
                u.as_mut_slice(),
                &grid_a,
                &grid_bc,
                f_child.as_slice(),
                &plan.ops,
                plan.n,
                ws,
            );
        }
        solve_in_place(u.as_mut_slice(), &grid_a, &grid_b, &plan.ops, plan.n, ws);
        u
    };

    let entries: Vec<ChargeArray> = if plan.parallel {
        (0..n_b * n_a)
            .into_par_iter()
            .map_init(|| AxisScratch::new(p, D), |ws, flat| build(ws, flat))
            .collect()
    } else {
        let mut ws = AxisScratch::new(p, D);
        (0..n_b * n_a).map(|flat| build(&mut ws, flat)).collect()
    };

    Ok(LevelState {
        level: t,
        n_a,
        entries,
    })
}

/// Walks the source tree from the leaves to the root; the previous level's
/// state is released as soon as the next one is complete.
pub fn upward_sweep<const D: usize>(
    plan: &TransformPlan<D>,
    state: LevelState<D>,
) -> Result<LevelState<D>> {
    let mut state = state;
    while state.level > 0 {
        state = advance_level(plan, &state)?;
    }
    Ok(state)
}

/// Evaluates every target from the root-box equivalent charges of its leaf.
pub fn final_eval<const D: usize>(
    plan: &TransformPlan<D>,
    state: &LevelState<D>,
) -> Result<Vec<Complex64>> {
    assert_eq!(state.level, 0, "final evaluation needs the root-level state");
    let leaf_level = plan.depth;
    let n_leaves = plan.tree_x.box_count_at(leaf_level);
    let p = plan.ops.p();
    let b0 = plan.root_grid_k();
    let mut out = vec![Complex64::new(0.0, 0.0); plan.target_points.len()];
    if state.entries.is_empty() {
        return Ok(out); // no sources anywhere
    }

    let eval_leaf = |ws: &mut AxisScratch, a_idx: usize| -> Vec<(u32, Complex64)> {
        let f = state.get(a_idx, 0);
        plan.tree_x
            .point_indices(leaf_level, a_idx)
            .iter()
            .map(|&ti| {
                let x = &plan.target_points[ti as usize];
                (ti, evaluate_with_scratch(x, &b0, f.as_slice(), plan.n, ws))
            })
            .collect()
    };

    if plan.parallel {
        let chunks: Vec<Vec<(u32, Complex64)>> = (0..n_leaves)
            .into_par_iter()
            .map_init(|| AxisScratch::new(p, D), |ws, a_idx| eval_leaf(ws, a_idx))
            .collect();
        for chunk in chunks {
            for (ti, v) in chunk {
                out[ti as usize] = v;
            }
        }
    } else {
        let mut ws = AxisScratch::new(p, D);
        for a_idx in 0..n_leaves {
            for (ti, v) in eval_leaf(&mut ws, a_idx) {
                out[ti as usize] = v;
            }
        }
    }
    Ok(out)
}
