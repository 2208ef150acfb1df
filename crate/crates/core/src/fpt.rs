//! Parameterized search over complete quartet sets.
//!
//! The search starts from a dominant quartet on every quadset and repairs
//! five-taxon violations by four-way branching. Every branch rewrites
//! exactly one quadset that still holds its seed quartet and locks it, so a
//! search state is fully described by its choice vector: the locked
//! quadsets are the ones that differ from the seed, and the spent budget
//! follows from them. States reached twice are expanded once.

use std::collections::HashSet;
use std::sync::Arc;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quartets::{quadset_of, quadset_rank, quadsets, CompleteQuartetSet, Dominance, Quadset, QuartetTable, Topology};
use crate::tree::{TaxonSet, Tree};

/// A five-taxon set breaking the compatibility condition: `ab|cd` is in the
/// set while neither `ab|ce` nor `ae|cd` is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub e: usize,
}

/// First violation in lexicographic order of five-sets.
pub fn find_violation(set: &CompleteQuartetSet) -> Option<Violation> {
    (0..set.n_taxa()).tuple_combinations().find_map(|(s0, s1, s2, s3, s4)| violation_in(set, [s0, s1, s2, s3, s4]))
}

pub fn is_compatible(set: &CompleteQuartetSet) -> bool {
    find_violation(set).is_none()
}

fn violation_in(set: &CompleteQuartetSet, five: [usize; 5]) -> Option<Violation> {
    for skip in 0..5 {
        let e = five[skip];
        let mut four = [0; 4];
        let mut j = 0;
        for (i, &x) in five.iter().enumerate() {
            if i != skip {
                four[j] = x;
                j += 1;
            }
        }
        let ((p, q), (r, s)) = set.get(&four).pairs(&four);
        for (a, b, c, d) in [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r)]
            .into_iter()
            .flat_map(|(a, b, c, d)| [(a, b, c, d), (c, d, a, b)])
        {
            let abce = quadset_of([a, b, c, e]);
            let acde = quadset_of([a, c, d, e]);
            if set.get(&abce) != Topology::from_pair(&abce, a, b) && set.get(&acde) != Topology::from_pair(&acde, a, e) {
                return Some(Violation { a, b, c, d, e });
            }
        }
    }
    None
}

/// The binary tree displaying exactly `set`, built by inserting taxa in
/// index order, each on the one edge consistent with the quartets over the
/// taxa placed so far.
pub fn tree_from_complete_compatible_set(set: &CompleteQuartetSet) -> Result<Tree> {
    let n = set.n_taxa();
    let mut edges: Vec<(usize, usize)> = vec![(0, n), (1, n), (2, n)];
    let mut next = n + 1;
    for leaf in 3..n {
        let slot = (0..edges.len())
            .find(|&c| {
                let mut cand = edges.clone();
                let (u, v) = cand[c];
                cand[c] = (u, next);
                cand.push((next, v));
                cand.push((next, leaf));
                consistent(set, &cand, next + 1, leaf)
            })
            .ok_or(Error::Incompatible)?;
        let (u, v) = edges[slot];
        edges[slot] = (u, next);
        edges.push((next, v));
        edges.push((next, leaf));
        next += 1;
    }
    Ok(Tree::from_edges(set.taxa().clone(), next, &edges))
}

/// Do the quartets on `leaf` and three earlier taxa agree with `set`?
fn consistent(set: &CompleteQuartetSet, edges: &[(usize, usize)], nodes: usize, leaf: usize) -> bool {
    let mut adj = vec![Vec::new(); nodes];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let dist: Vec<Vec<u32>> = (0..=leaf)
        .map(|s| {
            let mut d = vec![u32::MAX; nodes];
            let mut stack = vec![s];
            d[s] = 0;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if d[v] == u32::MAX {
                        d[v] = d[u] + 1;
                        stack.push(v);
                    }
                }
            }
            d
        })
        .collect();
    (0..leaf).tuple_combinations().all(|(x, y, z)| {
        let q = [x, y, z, leaf];
        let dd = |i: usize, j: usize| dist[q[i]][q[j]];
        let s = [dd(0, 1) + dd(2, 3), dd(0, 2) + dd(1, 3), dd(0, 3) + dd(1, 2)];
        let t = set.get(&q).index();
        s[t] < s[(t + 1) % 3] && s[t] < s[(t + 2) % 3]
    })
}

/// Seed set of dominant quartets (ties to the lowest topology index) with
/// each quadset's number of dominant topologies.
#[derive(Debug, Clone)]
pub struct DominantSeed {
    pub set: CompleteQuartetSet,
    pub n_dominant: Vec<u8>,
}

pub fn dominant_seed(table: &QuartetTable) -> DominantSeed {
    let dom: Vec<Dominance> = table.counts().iter().map(|&c| Dominance::of(c)).collect();
    let choice = dom.iter().map(|d| d.dominant_topologies().next().unwrap()).collect();
    DominantSeed {
        set: CompleteQuartetSet::new(table.taxa().clone(), choice).expect("one choice per quadset"),
        n_dominant: dom.iter().map(|d| d.n_dominant).collect(),
    }
}

/// Remaining rejections of seed quartets on quadsets with one, two and
/// three dominant topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub d: u64,
    pub k2: u64,
    pub k3: u64,
}

impl Budget {
    pub fn new(d: u64, k2: u64, k3: u64) -> Self {
        Budget { d, k2, k3 }
    }

    pub fn unbounded() -> Self {
        Budget { d: u64::MAX, k2: u64::MAX, k3: u64::MAX }
    }

    fn component(&mut self, n_dominant: u8) -> &mut u64 {
        match n_dominant {
            1 => &mut self.d,
            2 => &mut self.k2,
            _ => &mut self.k3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FptSolution {
    pub set: CompleteQuartetSet,
    pub tree: Tree,
    pub weight: u64,
}

#[derive(Debug, Clone)]
pub struct FptResult {
    /// Every complete compatible set reached within budget, in discovery
    /// order.
    pub solutions: Vec<FptSolution>,
    /// Index into `solutions` of the heaviest one (ties to the smaller
    /// canonical Newick).
    pub best: Option<usize>,
    pub branches_explored: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FptSummary {
    pub weight: Option<u64>,
    pub newick: Option<String>,
    pub branches_explored: u64,
    pub solutions_found: usize,
}

impl FptResult {
    pub fn best(&self) -> Option<&FptSolution> {
        self.best.map(|i| &self.solutions[i])
    }

    pub fn summary(&self) -> FptSummary {
        FptSummary {
            weight: self.best().map(|s| s.weight),
            newick: self.best().map(|s| s.tree.to_newick()),
            branches_explored: self.branches_explored,
            solutions_found: self.solutions.len(),
        }
    }
}

struct Search<'a> {
    table: &'a QuartetTable,
    seed: DominantSeed,
    seen: HashSet<Vec<Topology>>,
    solutions: Vec<FptSolution>,
    branches: u64,
}

impl Search<'_> {
    fn visit(&mut self, set: &mut CompleteQuartetSet, budget: Budget) -> Result<()> {
        if !self.seen.insert(set.choices().to_vec()) {
            return Ok(());
        }
        self.branches += 1;
        let Some(Violation { a, b, c, d, e }) = find_violation(set) else {
            let tree = tree_from_complete_compatible_set(set)?;
            let weight = self.table.weight(set);
            self.solutions.push(FptSolution { set: set.clone(), tree, weight });
            return Ok(());
        };
        let abcd = quadset_of([a, b, c, d]);
        let abce = quadset_of([a, b, c, e]);
        let acde = quadset_of([a, c, d, e]);
        let moves: [(Quadset, Topology); 4] = [
            (abcd, Topology::from_pair(&abcd, a, c)),
            (abcd, Topology::from_pair(&abcd, a, d)),
            (abce, Topology::from_pair(&abce, a, b)),
            (acde, Topology::from_pair(&acde, a, e)),
        ];
        for (q, topo) in moves {
            let r = quadset_rank(&q);
            let old = set.get(&q);
            if old != self.seed.set.choices()[r] {
                continue; // locked
            }
            let mut left = budget;
            let slot = left.component(self.seed.n_dominant[r]);
            if *slot == 0 {
                continue;
            }
            *slot -= 1;
            set.set(&q, topo);
            self.visit(set, left)?;
            set.set(&q, old);
        }
        Ok(())
    }
}

/// Complete compatible sets at the leaves of the branching search within
/// `budget`, and the heaviest one.
///
/// A compatible set met on the way to some target is never lighter than
/// the target, since it keeps a dominant quartet wherever it still differs.
/// So the heaviest leaf is the heaviest compatible set whose rejections fit
/// the budget.
pub fn solve_fpt(table: &QuartetTable, budget: Budget) -> Result<FptResult> {
    if table.n_taxa() < 4 {
        return Err(Error::TooFewTaxa { need: 4, got: table.n_taxa() });
    }
    let seed = dominant_seed(table);
    let mut set = seed.set.clone();
    let mut search = Search { table, seed, seen: HashSet::new(), solutions: Vec::new(), branches: 0 };
    search.visit(&mut set, budget)?;
    let best = search
        .solutions
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.weight, s.tree.to_newick()))
        .max_by(|x, y| x.1.cmp(&y.1).then_with(|| y.2.cmp(&x.2)))
        .map(|(i, ..)| i);
    Ok(FptResult { solutions: search.solutions, best, branches_explored: search.branches })
}

/// Complete set from per-quadset topology indices in colex order.
pub fn complete_set_from_indices(taxa: Arc<TaxonSet>, choice: &[usize]) -> Result<CompleteQuartetSet> {
    if choice.iter().any(|&c| c > 2) {
        return Err(Error::Invalid("topology index out of range".into()));
    }
    CompleteQuartetSet::new(taxa, choice.iter().map(|&c| Topology::from_index(c)).collect())
}

/// Seed quadsets a complete set disagrees with, per dominance class.
pub fn rejections(seed: &DominantSeed, set: &CompleteQuartetSet) -> Budget {
    let mut spent = Budget::new(0, 0, 0);
    for (r, _) in quadsets(set.n_taxa()).enumerate() {
        if set.choices()[r] != seed.set.choices()[r] {
            *spent.component(seed.n_dominant[r]) += 1;
        }
    }
    spent
}
