//! Deterministic 1/3-approximation by conditional expectations.
//!
//! The working state is an internally binary rooted tree: every node with
//! more than two children has only leaves below it. Its random completion
//! resolves each such node into a uniformly random rooted binary tree, and
//! while a node is being split, every child not yet reinserted goes to
//! either side with probability 1/2. Quartet probabilities under that
//! completion are multiples of 1/48 (at most four pending leaves, and a
//! star restriction resolves each way with probability 1/3), so they are
//! carried as integers in 48ths and expectations compare exactly.

use std::collections::VecDeque;
use std::sync::Arc;

use itertools::Itertools;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::quartets::{quadset_of, quadsets, Quadset, Quartet, QuartetTable};
use crate::tree::{Clade, TaxonSet, Tree};

/// Probability denominator used throughout.
pub const PROB_SCALE: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

/// Rooted working tree of the derandomizer; every multifurcating node has
/// only leaf children while the algorithm runs.
#[derive(Debug, Clone)]
pub struct PartialTree {
    taxa: Arc<TaxonSet>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
}

/// A node in the middle of being split into two sides.
#[derive(Debug, Clone)]
pub struct PendingSplit {
    pub node: usize,
    pub x: usize,
    pub y: usize,
    /// Children of `node` not yet reinserted (detached from the tree).
    pub pending: Vec<usize>,
}

impl PartialTree {
    /// Root with every taxon as a direct child.
    pub fn star(taxa: Arc<TaxonSet>) -> Self {
        let n = taxa.len();
        let mut parent = vec![Some(n); n];
        parent.push(None);
        let mut children = vec![Vec::new(); n];
        children.push((0..n).collect());
        PartialTree { taxa, parent, children, root: n }
    }

    /// Builds from a rooted expression over exactly `taxa`. Any
    /// multifurcation is accepted here; its random completion resolves it
    /// uniformly over its child subtrees. The derandomizer itself only ever
    /// produces internally binary states.
    pub fn from_clade(taxa: Arc<TaxonSet>, clade: &Clade) -> Result<Self> {
        let n = taxa.len();
        let mut pt = PartialTree { taxa, parent: vec![None; n], children: vec![Vec::new(); n], root: 0 };
        let mut seen = vec![false; n];
        pt.root = pt.add_clade(clade, &mut seen)?;
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::MissingLabel(pt.taxa.label(i).to_string()));
        }
        Ok(pt)
    }

    fn add_clade(&mut self, clade: &Clade, seen: &mut [bool]) -> Result<usize> {
        match clade {
            Clade::Leaf(l) => {
                let i = self.taxa.index_of(l).ok_or_else(|| Error::UnknownLabel(l.clone()))?;
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::DuplicateLabel(l.clone()));
                }
                Ok(i)
            }
            Clade::Node(ch) => {
                if ch.len() < 2 {
                    return Err(Error::NonBinary(ch.len() + 1));
                }
                let id = self.new_node();
                for c in ch {
                    let cid = self.add_clade(c, seen)?;
                    self.attach(cid, id);
                }
                Ok(id)
            }
        }
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.children.len()
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.taxa.len()
    }

    pub fn is_internally_binary(&self) -> bool {
        self.children
            .iter()
            .all(|ch| ch.len() <= 2 || ch.iter().all(|&c| self.is_leaf(c)))
    }

    /// Multifurcating nodes in breadth-first order from the root.
    pub fn multifurcations(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut queue = VecDeque::from([self.root]);
        while let Some(u) = queue.pop_front() {
            if self.children[u].len() > 2 {
                out.push(u);
            }
            queue.extend(self.children[u].iter().copied());
        }
        out
    }

    fn new_node(&mut self) -> usize {
        self.parent.push(None);
        self.children.push(Vec::new());
        self.children.len() - 1
    }

    fn attach(&mut self, child: usize, parent: usize) {
        self.parent[child] = Some(parent);
        self.children[parent].push(child);
    }

    /// Detaches the children of `node` (which must all be leaves) and hangs
    /// two fresh empty sides below it.
    pub fn begin_split(&mut self, node: usize) -> PendingSplit {
        let mut pending = std::mem::take(&mut self.children[node]);
        assert!(pending.iter().all(|&c| self.is_leaf(c)), "split of a node with internal children");
        pending.sort_unstable();
        for &c in &pending {
            self.parent[c] = None;
        }
        let x = self.new_node();
        let y = self.new_node();
        self.attach(x, node);
        self.attach(y, node);
        PendingSplit { node, x, y, pending }
    }

    /// Reinserts a pending child of the split under the given side.
    pub fn place(&mut self, split: &mut PendingSplit, leaf: usize, side: Side) {
        let pos = split.pending.iter().position(|&l| l == leaf).expect("leaf is pending");
        split.pending.remove(pos);
        let s = match side {
            Side::X => split.x,
            Side::Y => split.y,
        };
        self.attach(leaf, s);
    }

    /// Drops an empty side and contracts a side holding a single child.
    pub fn finish_split(&mut self, split: &PendingSplit) {
        assert!(split.pending.is_empty(), "split still has pending children");
        for s in [split.x, split.y] {
            match self.children[s].len() {
                0 => {
                    self.children[split.node].retain(|&c| c != s);
                    self.parent[s] = None;
                }
                1 => {
                    let only = self.children[s].pop().unwrap();
                    let slot = self.children[split.node].iter().position(|&c| c == s).unwrap();
                    self.children[split.node][slot] = only;
                    self.parent[only] = Some(split.node);
                    self.parent[s] = None;
                }
                _ => {}
            }
        }
    }

    /// Root-first ancestor chain of a node, ending at the node itself.
    fn chain(&self, node: usize) -> Vec<usize> {
        let mut out = vec![node];
        let mut u = node;
        while let Some(p) = self.parent[u] {
            out.push(p);
            u = p;
        }
        out.reverse();
        out
    }

    fn clade(&self, node: usize) -> Clade {
        if self.is_leaf(node) {
            return Clade::leaf(self.taxa.label(node));
        }
        let mut kids: Vec<Clade> = self.children[node].iter().map(|&c| self.clade(c)).collect();
        if kids.len() == 1 {
            kids.pop().unwrap()
        } else {
            Clade::Node(kids)
        }
    }

    /// The unrooted tree, once every node is binary.
    pub fn to_tree(&self) -> Result<Tree> {
        Tree::from_clade(&self.clade(self.root), Some(self.taxa.clone()))
    }
}

fn chain_distance(a: &[usize], b: &[usize]) -> u32 {
    let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    (a.len() + b.len() - 2 * common) as u32
}

/// Distribution, in 48ths, of the topology displayed on `q` by the random
/// completion of the current state. Pending leaves of `q` are enumerated
/// over both sides; the four-point condition on the resulting (possibly
/// non-binary) tree either fixes the topology or reports a star, which the
/// uniform resolution splits evenly.
fn completion_weights(pt: &PartialTree, split: Option<&PendingSplit>, q: &Quadset) -> [u32; 3] {
    let pending: Vec<usize> = match split {
        Some(s) => (0..4).filter(|&j| s.pending.contains(&q[j])).collect(),
        None => Vec::new(),
    };
    let base: Vec<Vec<usize>> = q
        .iter()
        .enumerate()
        .map(|(j, &leaf)| if pending.contains(&j) { Vec::new() } else { pt.chain(leaf) })
        .collect();
    let (x_chain, y_chain) = match split {
        Some(s) if !pending.is_empty() => (pt.chain(s.x), pt.chain(s.y)),
        _ => (Vec::new(), Vec::new()),
    };
    let unit = 16u32 >> pending.len();
    let mut acc = [0u32; 3];
    for mask in 0..(1u32 << pending.len()) {
        let mut chains = base.clone();
        for (bit, &j) in pending.iter().enumerate() {
            let mut c = if mask >> bit & 1 == 0 { x_chain.clone() } else { y_chain.clone() };
            c.push(q[j]);
            chains[j] = c;
        }
        let d = |i: usize, j: usize| chain_distance(&chains[i], &chains[j]);
        let s = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
        match (0..3).find(|&t| s[t] < s[(t + 1) % 3] && s[t] < s[(t + 2) % 3]) {
            Some(t) => acc[t] += 3 * unit,
            None => acc.iter_mut().for_each(|a| *a += unit),
        }
    }
    acc
}

/// `Pr[q is displayed]` by the random completion of `pt` (and of `split`,
/// when a node is mid-split).
pub fn completion_probability(pt: &PartialTree, split: Option<&PendingSplit>, q: &Quartet) -> Ratio<u64> {
    let w = completion_weights(pt, split, &q.quadset);
    Ratio::new(w[q.topology.index()] as u64, PROB_SCALE as u64)
}

/// `E[I(T')]`: expected number of input quartets displayed by the random
/// completion.
pub fn expected_score(table: &QuartetTable, pt: &PartialTree, split: Option<&PendingSplit>) -> Ratio<u128> {
    let num: u128 = quadsets(table.n_taxa())
        .zip(table.counts())
        .map(|(q, c)| {
            let w = completion_weights(pt, split, &q);
            (0..3).map(|t| c[t] as u128 * w[t] as u128).sum::<u128>()
        })
        .sum();
    Ratio::new(num, PROB_SCALE as u128)
}

/// What the derandomizer did, reported to an observer.
#[derive(Debug)]
pub enum DerandEvent<'a> {
    SplitStarted {
        tree: &'a PartialTree,
        split: &'a PendingSplit,
    },
    Placed {
        tree: &'a PartialTree,
        split: &'a PendingSplit,
        leaf: usize,
        side: Side,
        /// Decision-relevant expectation (in 48ths) for either side.
        gain_x: u128,
        gain_y: u128,
    },
    SplitFinished {
        tree: &'a PartialTree,
    },
}

/// Expectation, restricted to quartets whose probability depends on where
/// `leaf` goes, with `leaf` tentatively placed on `side`. Those are the
/// quadsets holding `leaf` and at least two other children of the node
/// being split.
fn side_gain(
    table: &QuartetTable,
    pt: &mut PartialTree,
    split: &mut PendingSplit,
    kids: &[bool],
    leaf: usize,
    side: Side,
) -> u128 {
    pt.place(split, leaf, side);
    let n = table.n_taxa();
    let mut total = 0u128;
    for (b, c, d) in (0..n).filter(|&v| v != leaf).tuple_combinations() {
        if kids[b] as u8 + kids[c] as u8 + kids[d] as u8 >= 2 {
            let q = quadset_of([leaf, b, c, d]);
            let w = completion_weights(pt, Some(split), &q);
            let f = table.triple(&q);
            total += (0..3).map(|t| f[t] as u128 * w[t] as u128).sum::<u128>();
        }
    }
    // undo
    let s = match side {
        Side::X => split.x,
        Side::Y => split.y,
    };
    pt.children[s].retain(|&c| c != leaf);
    pt.parent[leaf] = None;
    let at = split.pending.partition_point(|&p| p < leaf);
    split.pending.insert(at, leaf);
    total
}

/// Runs the top-down splitting procedure, reporting every step.
pub fn derandomize_observed(
    table: &QuartetTable,
    observer: &mut dyn FnMut(DerandEvent<'_>),
) -> Result<Tree> {
    let n = table.n_taxa();
    let mut pt = PartialTree::star(table.taxa().clone());
    let mut queue = VecDeque::from([pt.root]);
    while let Some(v) = queue.pop_front() {
        if pt.children[v].len() <= 2 {
            continue;
        }
        let mut split = pt.begin_split(v);
        observer(DerandEvent::SplitStarted { tree: &pt, split: &split });
        let mut kids = vec![false; n];
        split.pending.iter().for_each(|&c| kids[c] = true);
        let order = split.pending.clone();
        for (i, &leaf) in order.iter().enumerate() {
            let gain_x = side_gain(table, &mut pt, &mut split, &kids, leaf, Side::X);
            let gain_y = side_gain(table, &mut pt, &mut split, &kids, leaf, Side::Y);
            let last = i + 1 == order.len();
            // the final child never leaves a side empty: by the averaging
            // argument the empty side is then at least as good
            let side = if last && pt.children[split.y].is_empty() {
                Side::Y
            } else if (last && pt.children[split.x].is_empty()) || gain_x >= gain_y {
                Side::X
            } else {
                Side::Y
            };
            pt.place(&mut split, leaf, side);
            observer(DerandEvent::Placed { tree: &pt, split: &split, leaf, side, gain_x, gain_y });
        }
        pt.finish_split(&split);
        observer(DerandEvent::SplitFinished { tree: &pt });
        for s in [split.x, split.y] {
            if pt.parent[s].is_some() && pt.children[s].len() > 2 {
                queue.push_back(s);
            }
        }
    }
    pt.to_tree()
}

pub fn derandomize(table: &QuartetTable) -> Result<Tree> {
    derandomize_observed(table, &mut |_| {})
}
