//! Adaptive dyadic quadtrees/octrees over `[0, N]^d` with unit-width leaves.
//!
//! Only boxes containing at least one point are stored. Points are bucketed
//! once into leaf cells (half-open `[c, c+1)` per axis, closed above at the
//! domain boundary), sorted in Morton order so that every box at every level
//! owns a contiguous index range, and the level lists are then re-sorted
//! lexicographically by coordinates for deterministic sweeps.

use std::collections::HashMap;

use crate::geometry::PointSet;
use crate::lowrank::Grid;
use crate::{is_power_of_two, Error, Result};

/// A box in the hierarchy: `width = N / 2^level`, corner = `coords * width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxId<const D: usize> {
    pub level: u32,
    pub coords: [u32; D],
}

impl<const D: usize> BoxId<D> {
    pub fn width(&self, n: u64) -> u64 {
        n >> self.level
    }

    pub fn corner(&self, n: u64) -> [f64; D] {
        let w = self.width(n) as f64;
        let mut c = [0.0; D];
        for ax in 0..D {
            c[ax] = self.coords[ax] as f64 * w;
        }
        c
    }

    /// Parent box, or `None` at the root.
    pub fn parent(&self) -> Option<BoxId<D>> {
        if self.level == 0 {
            return None;
        }
        let mut coords = [0u32; D];
        for ax in 0..D {
            coords[ax] = self.coords[ax] >> 1;
        }
        Some(BoxId {
            level: self.level - 1,
            coords,
        })
    }

    /// The `p`-per-axis Cartesian grid spanning this box.
    pub fn grid(&self, n: u64, p: usize) -> Grid<D> {
        Grid {
            corner: self.corner(n),
            width: self.width(n) as f64,
            p,
        }
    }
}

#[derive(Debug, Clone)]
struct BoxNode<const D: usize> {
    coords: [u32; D],
    start: u32,
    len: u32,
    /// Index of the parent in the previous level's box list (root: 0).
    parent: u32,
    children_start: u32,
    children_len: u32,
}

#[derive(Debug, Clone)]
struct Level<const D: usize> {
    boxes: Vec<BoxNode<D>>,
    index: HashMap<[u32; D], u32>,
    /// Flat child-index lists into the next level, CSR style.
    children: Vec<u32>,
}

/// The adaptive tree: per-level box lists plus one shared point permutation.
#[derive(Debug, Clone)]
pub struct AdaptiveTree<const D: usize> {
    n: u64,
    levels: Vec<Level<D>>,
    point_order: Vec<u32>,
}

/// Builds the tree for a point set; leaves have width exactly 1.
pub fn build_tree<const D: usize>(ps: &PointSet<D>) -> Result<AdaptiveTree<D>> {
    AdaptiveTree::build(ps)
}

impl<const D: usize> AdaptiveTree<D> {
    pub fn build(ps: &PointSet<D>) -> Result<Self> {
        let n = ps.n_scale();
        if !is_power_of_two(n) {
            return Err(Error::DomainNotPowerOfTwo(n));
        }
        if ps.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let depth = n.trailing_zeros();
        assert!(
            (depth as usize) * D <= 63,
            "domain too deep for {D}-dimensional Morton keys"
        );
        let nf = n as f64;

        // leaf cell per point; the top boundary folds into the last cell
        let cells: Vec<[u32; D]> = ps
            .points()
            .iter()
            .enumerate()
            .map(|(index, pt)| {
                let mut cell = [0u32; D];
                for ax in 0..D {
                    let c = pt[ax];
                    if !(0.0..=nf).contains(&c) {
                        return Err(Error::PointOutsideDomain {
                            index,
                            n,
                            dim: D,
                            coords: pt.to_vec(),
                        });
                    }
                    cell[ax] = (c.floor() as u64).min(n - 1) as u32;
                }
                Ok(cell)
            })
            .collect::<Result<_>>()?;

        let mut point_order: Vec<u32> = (0..ps.len() as u32).collect();
        let keys: Vec<u64> = cells.iter().map(|c| morton_key::<D>(c, depth)).collect();
        point_order.sort_unstable_by_key(|&i| (keys[i as usize], i));

        // leaf boxes from Morton runs
        let mut levels: Vec<Level<D>> = Vec::with_capacity(depth as usize + 1);
        let mut leaf_boxes: Vec<BoxNode<D>> = Vec::new();
        let mut run_start = 0usize;
        for i in 0..point_order.len() {
            let next_differs = i + 1 == point_order.len()
                || keys[point_order[i + 1] as usize] != keys[point_order[i] as usize];
            if next_differs {
                leaf_boxes.push(BoxNode {
                    coords: cells[point_order[run_start] as usize],
                    start: run_start as u32,
                    len: (i + 1 - run_start) as u32,
                    parent: 0,
                    children_start: 0,
                    children_len: 0,
                });
                run_start = i + 1;
            }
        }

        // coarser levels by merging Morton-adjacent siblings
        let mut all: Vec<Vec<BoxNode<D>>> = vec![leaf_boxes];
        for _ in 0..depth {
            let finer = all.last().unwrap();
            let mut coarse: Vec<BoxNode<D>> = Vec::new();
            for node in finer {
                let mut pc = [0u32; D];
                for ax in 0..D {
                    pc[ax] = node.coords[ax] >> 1;
                }
                match coarse.last_mut() {
                    Some(last) if last.coords == pc => last.len += node.len,
                    _ => coarse.push(BoxNode {
                        coords: pc,
                        start: node.start,
                        len: node.len,
                        parent: 0,
                        children_start: 0,
                        children_len: 0,
                    }),
                }
            }
            all.push(coarse);
        }
        all.reverse(); // index by level: 0 = root, depth = leaves

        // deterministic level ordering: lexicographic by coords
        for mut boxes in all {
            boxes.sort_by(|a, b| a.coords.cmp(&b.coords));
            let index = boxes
                .iter()
                .enumerate()
                .map(|(i, node)| (node.coords, i as u32))
                .collect();
            levels.push(Level {
                boxes,
                index,
                children: Vec::new(),
            });
        }

        // parent/child links between adjacent levels
        for lvl in 1..levels.len() {
            let (coarse, fine) = {
                let (a, b) = levels.split_at_mut(lvl);
                (&mut a[lvl - 1], &mut b[0])
            };
            let mut counts = vec![0u32; coarse.boxes.len()];
            for node in fine.boxes.iter_mut() {
                let mut pc = [0u32; D];
                for ax in 0..D {
                    pc[ax] = node.coords[ax] >> 1;
                }
                let pi = coarse.index[&pc];
                node.parent = pi;
                counts[pi as usize] += 1;
            }
            let mut offset = 0u32;
            for (node, &cnt) in coarse.boxes.iter_mut().zip(counts.iter()) {
                node.children_start = offset;
                node.children_len = cnt;
                offset += cnt;
            }
            coarse.children = vec![0; offset as usize];
            let mut cursor: Vec<u32> = coarse
                .boxes
                .iter()
                .map(|node| node.children_start)
                .collect();
            for (ci, node) in fine.boxes.iter().enumerate() {
                let slot = &mut cursor[node.parent as usize];
                coarse.children[*slot as usize] = ci as u32;
                *slot += 1;
            }
        }

        Ok(AdaptiveTree {
            n,
            levels,
            point_order,
        })
    }

    pub fn n_scale(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        D
    }

    /// Deepest level; its boxes have width exactly 1.
    pub fn leaf_level(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn box_count_at(&self, level: u32) -> usize {
        self.levels[level as usize].boxes.len()
    }

    /// Total boxes across all levels.
    pub fn box_count(&self) -> usize {
        self.levels.iter().map(|l| l.boxes.len()).sum()
    }

    /// All non-empty boxes at a level, sorted by coordinates.
    pub fn boxes_at_level(&self, level: u32) -> Result<Vec<BoxId<D>>> {
        let lvl = self
            .levels
            .get(level as usize)
            .ok_or(Error::LevelOutOfRange {
                level,
                max: self.leaf_level(),
            })?;
        Ok(lvl
            .boxes
            .iter()
            .map(|node| BoxId {
                level,
                coords: node.coords,
            })
            .collect())
    }

    pub fn contains(&self, b: &BoxId<D>) -> bool {
        self.levels
            .get(b.level as usize)
            .is_some_and(|lvl| lvl.index.contains_key(&b.coords))
    }

    /// Non-empty children of a box, sorted by coordinates; empty for leaves.
    pub fn children(&self, b: &BoxId<D>) -> Result<Vec<BoxId<D>>> {
        let idx = self.box_index(b)?;
        Ok(self
            .child_indices(b.level, idx)
            .iter()
            .map(|&ci| BoxId {
                level: b.level + 1,
                coords: self.levels[b.level as usize + 1].boxes[ci as usize].coords,
            })
            .collect())
    }

    /// Indices (into the original point set) of the points in a box.
    pub fn points_in_box(&self, b: &BoxId<D>) -> Result<&[u32]> {
        let idx = self.box_index(b)?;
        let node = &self.levels[b.level as usize].boxes[idx];
        Ok(&self.point_order[node.start as usize..(node.start + node.len) as usize])
    }

    /// Index of a box in its level's coordinate-sorted list.
    pub(crate) fn index_of(&self, b: &BoxId<D>) -> Option<usize> {
        self.levels
            .get(b.level as usize)?
            .index
            .get(&b.coords)
            .map(|&i| i as usize)
    }

    fn box_index(&self, b: &BoxId<D>) -> Result<usize> {
        let lvl = self
            .levels
            .get(b.level as usize)
            .ok_or(Error::LevelOutOfRange {
                level: b.level,
                max: self.leaf_level(),
            })?;
        lvl.index
            .get(&b.coords)
            .map(|&i| i as usize)
            .ok_or_else(|| Error::IncompatiblePointSets(format!("box not in tree: {b:?}")))
    }

    // --- index-based accessors for the level sweep ---

    pub(crate) fn coords_of(&self, level: u32, idx: usize) -> [u32; D] {
        self.levels[level as usize].boxes[idx].coords
    }

    pub(crate) fn parent_index(&self, level: u32, idx: usize) -> usize {
        self.levels[level as usize].boxes[idx].parent as usize
    }

    pub(crate) fn child_indices(&self, level: u32, idx: usize) -> &[u32] {
        let lvl = &self.levels[level as usize];
        if level == self.leaf_level() {
            return &[];
        }
        let node = &lvl.boxes[idx];
        &lvl.children
            [node.children_start as usize..(node.children_start + node.children_len) as usize]
    }

    pub(crate) fn point_indices(&self, level: u32, idx: usize) -> &[u32] {
        let node = &self.levels[level as usize].boxes[idx];
        &self.point_order[node.start as usize..(node.start + node.len) as usize]
    }

    pub(crate) fn grid_of(&self, level: u32, idx: usize, p: usize) -> Grid<D> {
        BoxId {
            level,
            coords: self.coords_of(level, idx),
        }
        .grid(self.n, p)
    }

    /// Debug dump: `level cx cy [cz] count` per box, sorted by (level, coords).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (level, lvl) in self.levels.iter().enumerate() {
            for node in &lvl.boxes {
                out.push_str(&level.to_string());
                for c in node.coords.iter() {
                    out.push(' ');
                    out.push_str(&c.to_string());
                }
                out.push(' ');
                out.push_str(&node.len.to_string());
                out.push('\n');
            }
        }
        out
    }
}

/// Interleaves `bits` bits per axis, axis 0 most significant within a round.
fn morton_key<const D: usize>(cell: &[u32; D], bits: u32) -> u64 {
    let mut key = 0u64;
    for b in (0..bits).rev() {
        for c in cell.iter() {
            key = (key << 1) | ((c >> b) & 1) as u64;
        }
    }
    key
}
