//! Exhaustive enumeration of unrooted binary topologies by stepwise leaf
//! insertion.
//!
//! Leaves 0, 1, 2 form a star; leaf `i >= 3` is inserted on one of the
//! `2i - 3` edges present at that point. A topology is identified by its
//! vector of insertion choices, and the iterator walks those vectors as an
//! odometer (last leaf fastest), so any prefix of choices names a contiguous
//! block of the global order.

use std::sync::Arc;

use rand::Rng;

use super::{TaxonSet, Tree};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 10;

/// `(2n - 5)!!`, the number of unrooted binary topologies on `n >= 3` leaves.
pub fn count_topologies(n: usize) -> u64 {
    (3..n).map(|i| (2 * i - 3) as u64).product()
}

#[derive(Debug, Clone)]
pub struct Topologies {
    taxa: Arc<TaxonSet>,
    choices: Vec<usize>,
    fixed: usize,
    done: bool,
}

impl Topologies {
    /// All topologies on `taxa`, refusing more than `cap` taxa.
    pub fn new(taxa: Arc<TaxonSet>, cap: usize) -> Result<Self> {
        let n = taxa.len();
        if n > cap {
            return Err(Error::TooManyTaxa { n, cap });
        }
        if n < 3 {
            return Err(Error::TooFewTaxa { need: 3, got: n });
        }
        Ok(Topologies { choices: vec![0; n - 3], taxa, fixed: 0, done: false })
    }

    /// Splits the enumeration into consecutive blocks keyed by the insertion
    /// choices of the first `depth` inserted leaves. Concatenating the
    /// blocks in the returned order reproduces the full enumeration.
    pub fn partition(taxa: Arc<TaxonSet>, cap: usize, depth: usize) -> Result<Vec<Topologies>> {
        let base = Topologies::new(taxa, cap)?;
        let depth = depth.min(base.choices.len());
        let mut blocks = Vec::new();
        let mut prefix = vec![0usize; depth];
        loop {
            let mut block = base.clone();
            block.choices[..depth].copy_from_slice(&prefix);
            block.fixed = depth;
            blocks.push(block);
            if !advance(&mut prefix, 0) {
                break;
            }
        }
        Ok(blocks)
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }
}

/// Odometer step over `choices[lo..]`; false once it wraps.
fn advance(choices: &mut [usize], lo: usize) -> bool {
    for j in (lo..choices.len()).rev() {
        choices[j] += 1;
        if choices[j] < 2 * j + 3 {
            return true;
        }
        choices[j] = 0;
    }
    false
}

impl Iterator for Topologies {
    type Item = Tree;

    fn next(&mut self) -> Option<Tree> {
        if self.done {
            return None;
        }
        let tree = build_from_choices(self.taxa.clone(), &self.choices);
        if !advance(&mut self.choices, self.fixed) {
            self.done = true;
        }
        Some(tree)
    }
}

fn build_from_choices(taxa: Arc<TaxonSet>, choices: &[usize]) -> Tree {
    let n = taxa.len();
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(2 * n - 3);
    edges.extend([(0, n), (1, n), (2, n)]);
    let mut next = n + 1;
    for (j, &c) in choices.iter().enumerate() {
        let leaf = j + 3;
        let (u, v) = edges[c];
        let w = next;
        next += 1;
        edges[c] = (u, w);
        edges.push((w, v));
        edges.push((w, leaf));
    }
    Tree::from_edges(taxa, next, &edges)
}

/// Uniformly random binary topology on `taxa` (at least 3 labels).
pub fn random_tree<R: Rng + ?Sized>(taxa: Arc<TaxonSet>, rng: &mut R) -> Tree {
    let n = taxa.len();
    assert!(n >= 3, "random_tree needs at least 3 taxa");
    let choices: Vec<usize> = (0..n - 3).map(|j| rng.gen_range(0..2 * j + 3)).collect();
    build_from_choices(taxa, &choices)
}
