//! Leaf-labelled phylogenetic trees.
//!
//! A [`Tree`] is unrooted and binary. Nodes are dense integers: node `i` for
//! `i < n` is the leaf carrying taxon `i` of the shared [`TaxonSet`], and
//! internal nodes follow. Rooted trees (subtrees handed to the caterpillar
//! builder, parser output before unrooting) are plain [`Clade`] values.

mod enumerate;
mod newick;

pub use enumerate::{count_topologies, random_tree, Topologies, DEFAULT_ENUMERATION_CAP};
pub use newick::{parse_clade, parse_newick};

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered set of distinct taxon labels.
///
/// Labels are kept in lexicographic order; the position of a label is its
/// taxon index and that order is the canonical order used for quadsets,
/// serialization and tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl TaxonSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort();
        for w in labels.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateLabel(w[0].clone()));
            }
        }
        if labels.iter().any(|l| l.is_empty()) {
            return Err(Error::EmptyLabel);
        }
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Ok(TaxonSet { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    /// Resolves a list of labels to sorted taxon indices.
    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            out.push(self.index_of(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))?);
        }
        out.sort_unstable();
        for w in out.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateLabel(self.label(w[0]).to_string()));
            }
        }
        Ok(out)
    }
}

/// Rooted tree expression, as written in Newick.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Clade {
    Leaf(String),
    Node(Vec<Clade>),
}

impl Clade {
    pub fn leaf(label: impl Into<String>) -> Self {
        Clade::Leaf(label.into())
    }

    /// Rooted caterpillar `(((l1,l2),l3),...)`. A single label yields a leaf.
    pub fn caterpillar<S: AsRef<str>>(labels: &[S]) -> Self {
        assert!(!labels.is_empty(), "caterpillar needs at least one label");
        let mut acc = Clade::leaf(labels[0].as_ref());
        for l in &labels[1..] {
            acc = Clade::Node(vec![acc, Clade::leaf(l.as_ref())]);
        }
        acc
    }

    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Clade::Leaf(l) => out.push(l),
            Clade::Node(ch) => ch.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    fn map_labels(&self, f: &dyn Fn(&str) -> String) -> Clade {
        match self {
            Clade::Leaf(l) => Clade::Leaf(f(l)),
            Clade::Node(ch) => Clade::Node(ch.iter().map(|c| c.map_labels(f)).collect()),
        }
    }
}

/// Pairwise path lengths (in edges) between leaves.
#[derive(Debug, Clone)]
pub struct LeafDistances {
    n: usize,
    d: Vec<u32>,
}

impl LeafDistances {
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.d[a * self.n + b]
    }
}

/// Unrooted binary leaf-labelled tree.
#[derive(Clone)]
pub struct Tree {
    taxa: Arc<TaxonSet>,
    adj: Vec<Vec<usize>>,
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({})", self.to_newick())
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_newick())
    }
}

impl Tree {
    /// Builds an unrooted tree from a rooted expression. A root with two
    /// children is suppressed; a root with three children becomes an
    /// ordinary internal node. Every other internal node needs exactly two
    /// children.
    ///
    /// With `taxa` given, the leaf labels must match it exactly.
    pub fn from_clade(clade: &Clade, taxa: Option<Arc<TaxonSet>>) -> Result<Tree> {
        let labels = clade.leaves();
        let taxa = match taxa {
            Some(t) => {
                let mut seen = vec![false; t.len()];
                for l in &labels {
                    let i = t.index_of(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
                    if seen[i] {
                        return Err(Error::DuplicateLabel(l.to_string()));
                    }
                    seen[i] = true;
                }
                if let Some(i) = seen.iter().position(|s| !s) {
                    return Err(Error::MissingLabel(t.label(i).to_string()));
                }
                t
            }
            None => Arc::new(TaxonSet::new(labels.iter().copied())?),
        };
        let n = taxa.len();
        if n < 2 {
            return Err(Error::TooFewTaxa { need: 2, got: n });
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        let Clade::Node(children) = clade else {
            unreachable!("a bare leaf has fewer than two taxa")
        };
        match children.len() {
            2 => {
                let a = attach(&children[0], &taxa, &mut adj)?;
                let b = attach(&children[1], &taxa, &mut adj)?;
                link(&mut adj, a, b);
            }
            3 => {
                let root = new_node(&mut adj);
                for c in children {
                    let id = attach(c, &taxa, &mut adj)?;
                    link(&mut adj, root, id);
                }
            }
            d => return Err(Error::NonBinary(d)),
        }
        Ok(Tree { taxa, adj })
    }

    /// Builds a tree from an edge list over `node_count` nodes, leaves first.
    pub(crate) fn from_edges(taxa: Arc<TaxonSet>, node_count: usize, edges: &[(usize, usize)]) -> Tree {
        let mut adj = vec![Vec::with_capacity(3); node_count];
        for &(u, v) in edges {
            link(&mut adj, u, v);
        }
        Tree { taxa, adj }
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.n_taxa()
    }

    pub fn same_taxa(&self, other: &Tree) -> bool {
        Arc::ptr_eq(&self.taxa, &other.taxa) || self.taxa == other.taxa
    }

    pub fn leaf_distances(&self) -> LeafDistances {
        let n = self.n_taxa();
        let mut d = vec![0u32; n * n];
        let mut dist = vec![u32::MAX; self.adj.len()];
        let mut queue = VecDeque::with_capacity(self.adj.len());
        for src in 0..n {
            dist.iter_mut().for_each(|x| *x = u32::MAX);
            dist[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            d[src * n..(src + 1) * n].copy_from_slice(&dist[..n]);
        }
        LeafDistances { n, d }
    }

    /// Non-trivial splits, each given by the side that excludes taxon 0.
    pub fn splits(&self) -> BTreeSet<Vec<usize>> {
        let n = self.n_taxa();
        let mut out = BTreeSet::new();
        if n < 4 {
            return out;
        }
        // root at leaf 0; the leaf set below each internal node is one side
        let (order, parent) = self.dfs_order(0);
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.adj.len()];
        for &u in order.iter().rev() {
            if self.is_leaf(u) {
                below[u].push(u);
            }
            if let Some(p) = parent[u] {
                let mine = std::mem::take(&mut below[u]);
                if !self.is_leaf(u) && mine.len() >= 2 && mine.len() <= n - 2 {
                    let mut s = mine.clone();
                    s.sort_unstable();
                    out.insert(s);
                }
                below[p].extend(mine);
            }
        }
        out
    }

    pub fn is_isomorphic(&self, other: &Tree) -> bool {
        self.same_taxa(other) && self.splits() == other.splits()
    }

    fn dfs_order(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut parent = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        let mut order = Vec::with_capacity(self.adj.len());
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    stack.push(v);
                }
            }
        }
        (order, parent)
    }

    /// Rooted view hanging from `node`, entered from `from`.
    fn clade_below(&self, node: usize, from: Option<usize>) -> Clade {
        if self.is_leaf(node) && from.is_some() {
            return Clade::Leaf(self.taxa.label(node).to_string());
        }
        Clade::Node(
            self.adj[node]
                .iter()
                .filter(|&&v| Some(v) != from)
                .map(|&v| self.clade_below(v, Some(node)))
                .collect(),
        )
    }

    /// Rooted expression equivalent to this tree (trifurcating top node).
    pub fn to_clade(&self) -> Clade {
        if self.n_taxa() == 2 {
            return Clade::Node(vec![
                Clade::leaf(self.taxa.label(0)),
                Clade::leaf(self.taxa.label(1)),
            ]);
        }
        self.clade_below(self.adj[0][0], None)
    }

    /// Same topology with every label passed through `f`.
    pub fn map_labels(&self, f: impl Fn(&str) -> String) -> Result<Tree> {
        Tree::from_clade(&self.to_clade().map_labels(&f), None)
    }

    /// Re-expresses this tree over an equal taxon set held elsewhere.
    pub fn with_taxa(&self, taxa: Arc<TaxonSet>) -> Result<Tree> {
        if *taxa != *self.taxa {
            return Err(Error::LeafSetMismatch);
        }
        Ok(Tree { taxa, adj: self.adj.clone() })
    }

    /// Canonical Newick: the top node is the neighbour of the smallest
    /// label and children are ordered by their smallest contained label.
    pub fn to_newick(&self) -> String {
        newick::write_canonical(self)
    }

    /// `T|Y`: the minimal subtree connecting `labels`, degree-2 nodes contracted.
    pub fn restrict<S: AsRef<str>>(&self, labels: &[S]) -> Result<Tree> {
        let ids = self.taxa.indices_of(labels).map_err(|e| match e {
            Error::UnknownLabel(_) => Error::NotSubset,
            other => other,
        })?;
        if ids.len() < 2 {
            return Err(Error::TooFewTaxa { need: 2, got: ids.len() });
        }
        let mut keep = vec![false; self.adj.len()];
        ids.iter().for_each(|&i| keep[i] = true);
        let root = ids[0];
        let (order, parent) = self.dfs_order(root);
        let mut has = keep.clone();
        for &u in order.iter().rev() {
            if let Some(p) = parent[u] {
                if has[u] {
                    has[p] = true;
                }
            }
        }
        let first = self.adj[root][0];
        let below = self.kept_clade(first, root, &has);
        let clade = Clade::Node(vec![Clade::leaf(self.taxa.label(root)), below]);
        let sub = Arc::new(TaxonSet::new(ids.iter().map(|&i| self.taxa.label(i)))?);
        Tree::from_clade(&clade, Some(sub))
    }

    fn kept_clade(&self, node: usize, from: usize, has: &[bool]) -> Clade {
        if self.is_leaf(node) {
            return Clade::Leaf(self.taxa.label(node).to_string());
        }
        let mut kids: Vec<Clade> = self.adj[node]
            .iter()
            .filter(|&&v| v != from && has[v])
            .map(|&v| self.kept_clade(v, node, has))
            .collect();
        if kids.len() == 1 {
            kids.pop().unwrap()
        } else {
            Clade::Node(kids)
        }
    }

    /// True iff some edge separates exactly `set` from the remaining leaves.
    pub fn is_cluster(&self, set: &[usize]) -> bool {
        let n = self.n_taxa();
        if set.is_empty() || set.len() >= n {
            return false;
        }
        if set.len() == 1 {
            return true;
        }
        let mut inside = vec![false; n];
        set.iter().for_each(|&i| inside[i] = true);
        let root = (0..n).find(|&i| !inside[i]).unwrap();
        let (order, parent) = self.dfs_order(root);
        let mut total = vec![0usize; self.adj.len()];
        let mut hits = vec![0usize; self.adj.len()];
        for &u in order.iter().rev() {
            if self.is_leaf(u) {
                total[u] += 1;
                if inside[u] {
                    hits[u] += 1;
                }
            }
            if total[u] == set.len() && hits[u] == set.len() {
                return true;
            }
            if let Some(p) = parent[u] {
                total[p] += total[u];
                hits[p] += hits[u];
            }
        }
        false
    }

    /// For a `(W, Z)`-augmented caterpillar, the leaves hanging off the
    /// spine in order from the `W` end to the `Z` end. `None` when the tree
    /// does not have that shape.
    pub fn caterpillar_spine(&self, w: &[usize], z: &[usize]) -> Option<Vec<usize>> {
        let n = self.n_taxa();
        let ws: HashSet<usize> = w.iter().copied().collect();
        let zs: HashSet<usize> = z.iter().copied().collect();
        if ws.is_empty() || zs.is_empty() || !ws.is_disjoint(&zs) || ws.len() + zs.len() >= n {
            return None;
        }
        let cw = self.cluster_node(&ws, z[0])?;
        let cz = self.cluster_node(&zs, w[0])?;
        // path cw -> cz
        let (_, parent) = self.dfs_order(cz);
        let mut path = vec![cw];
        let mut u = cw;
        while u != cz {
            u = parent[u]?;
            path.push(u);
        }
        let spine = &path[1..path.len() - 1];
        let mut out = Vec::with_capacity(spine.len());
        for (i, &p) in spine.iter().enumerate() {
            let prev = path[i];
            let next = path[i + 2];
            let hang = *self.adj[p].iter().find(|&&v| v != prev && v != next)?;
            if !self.is_leaf(hang) {
                return None;
            }
            out.push(hang);
        }
        Some(out)
    }

    /// Node whose leaves (rooted at `root_leaf`) are exactly `set`.
    fn cluster_node(&self, set: &HashSet<usize>, root_leaf: usize) -> Option<usize> {
        let (order, parent) = self.dfs_order(root_leaf);
        let mut total = vec![0usize; self.adj.len()];
        let mut hits = vec![0usize; self.adj.len()];
        for &u in order.iter().rev() {
            if self.is_leaf(u) && u != root_leaf {
                total[u] += 1;
                if set.contains(&u) {
                    hits[u] += 1;
                }
            }
            if total[u] == set.len() && hits[u] == set.len() {
                return Some(u);
            }
            if let Some(p) = parent[u] {
                total[p] += total[u];
                hits[p] += hits[u];
            }
        }
        None
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.is_isomorphic(other)
    }
}

impl Eq for Tree {}

fn new_node(adj: &mut Vec<Vec<usize>>) -> usize {
    adj.push(Vec::with_capacity(3));
    adj.len() - 1
}

fn link(adj: &mut [Vec<usize>], a: usize, b: usize) {
    adj[a].push(b);
    adj[b].push(a);
}

fn attach(clade: &Clade, taxa: &TaxonSet, adj: &mut Vec<Vec<usize>>) -> Result<usize> {
    match clade {
        Clade::Leaf(l) => taxa.index_of(l).ok_or_else(|| Error::UnknownLabel(l.clone())),
        Clade::Node(ch) => {
            if ch.len() != 2 {
                return Err(Error::NonBinary(ch.len() + 1));
            }
            let id = new_node(adj);
            for c in ch {
                let cid = attach(c, taxa, adj)?;
                link(adj, id, cid);
            }
            Ok(id)
        }
    }
}

/// The `(T_1 | T_2 | ... | T_k)` caterpillar: `T_1, T_2` hang off one end of
/// the spine, `T_{k-1}, T_k` off the other, the rest in order between.
pub fn build_caterpillar(subtrees: &[Clade]) -> Result<Tree> {
    if subtrees.len() < 3 {
        return Err(Error::Invalid(format!(
            "caterpillar needs at least 3 subtrees, got {}",
            subtrees.len()
        )));
    }
    let mut seen = HashSet::new();
    for s in subtrees {
        for l in s.leaves() {
            if !seen.insert(l) {
                return Err(Error::OverlappingLeafSets(l.to_string()));
            }
        }
    }
    let mut acc = Clade::Node(vec![subtrees[0].clone(), subtrees[1].clone()]);
    for s in &subtrees[2..] {
        acc = Clade::Node(vec![acc, s.clone()]);
    }
    Tree::from_clade(&acc, None)
}

/// Whether `t` is a caterpillar whose two end subtrees have leaf sets
/// exactly `w_leaves` and `z_leaves`.
pub fn is_wz_augmented_caterpillar<S: AsRef<str>>(t: &Tree, w_leaves: &[S], z_leaves: &[S]) -> bool {
    let (Ok(w), Ok(z)) = (t.taxa().indices_of(w_leaves), t.taxa().indices_of(z_leaves)) else {
        return false;
    };
    t.caterpillar_spine(&w, &z).is_some()
}
