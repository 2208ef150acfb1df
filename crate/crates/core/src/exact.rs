//! Brute-force optimum over every binary topology.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::quartets::QuartetTable;
use crate::tree::{Topologies, Tree, DEFAULT_ENUMERATION_CAP};

/// Enumeration blocks handed to workers: the insertion choices of the
/// first two inserted leaves give 15 blocks.
const PARTITION_DEPTH: usize = 2;

#[derive(Debug, Clone)]
pub struct ExactResult {
    /// `p`, the best achievable score.
    pub optimum_score: u64,
    /// `d = N - p`.
    pub optimum_cost: u64,
    /// Every optimal tree, in enumeration order.
    pub optima: Vec<Tree>,
    pub evaluated_count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactSummary {
    pub optimum_score: u64,
    pub optimum_cost: u64,
    pub optima: Vec<String>,
    pub evaluated_count: u64,
}

impl ExactResult {
    pub fn summary(&self) -> ExactSummary {
        ExactSummary {
            optimum_score: self.optimum_score,
            optimum_cost: self.optimum_cost,
            optima: self.optima.iter().map(Tree::to_newick).collect(),
            evaluated_count: self.evaluated_count,
        }
    }
}

pub fn solve_exact(table: &QuartetTable) -> Result<ExactResult> {
    solve_exact_capped(table, DEFAULT_ENUMERATION_CAP)
}

pub fn solve_exact_capped(table: &QuartetTable, cap: usize) -> Result<ExactResult> {
    let blocks = Topologies::partition(table.taxa().clone(), cap, PARTITION_DEPTH)?;
    let partial: Vec<(u64, Vec<Tree>, u64)> = blocks
        .into_par_iter()
        .map(|block| {
            let mut best = 0u64;
            let mut optima = Vec::new();
            let mut count = 0u64;
            for t in block {
                count += 1;
                let s = table.score_distances(&t.leaf_distances());
                match s.cmp(&best) {
                    Ordering::Greater => {
                        best = s;
                        optima.clear();
                        optima.push(t);
                    }
                    Ordering::Equal => optima.push(t),
                    Ordering::Less => {}
                }
            }
            (best, optima, count)
        })
        .collect();
    let best = partial.iter().map(|p| p.0).max().unwrap_or(0);
    let evaluated_count = partial.iter().map(|p| p.2).sum();
    let optima = partial
        .into_iter()
        .filter(|p| p.0 == best)
        .flat_map(|p| p.1)
        .collect();
    Ok(ExactResult {
        optimum_score: best,
        optimum_cost: table.total() - best,
        optima,
        evaluated_count,
    })
}

/// Scores every topology and keeps what `keep` returns, in enumeration
/// order.
pub fn scan<T, F>(table: &QuartetTable, cap: usize, keep: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Tree, u64) -> Option<T> + Sync,
{
    let blocks = Topologies::partition(table.taxa().clone(), cap, PARTITION_DEPTH)?;
    let parts: Vec<Vec<T>> = blocks
        .into_par_iter()
        .map(|block| {
            block
                .filter_map(|t| {
                    let s = table.score_distances(&t.leaf_distances());
                    keep(t, s)
                })
                .collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub holds: bool,
    /// First optimal tree in enumeration order, when it meets the threshold.
    pub witness: Option<Tree>,
    pub optimum_score: u64,
}

/// Is there a tree displaying at least `threshold` input quartets?
pub fn decide(table: &QuartetTable, threshold: u64) -> Result<Decision> {
    let res = solve_exact(table)?;
    let holds = res.optimum_score >= threshold;
    Ok(Decision {
        holds,
        witness: if holds { res.optima.into_iter().next() } else { None },
        optimum_score: res.optimum_score,
    })
}
