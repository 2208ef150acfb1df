//! Quartets, quartet frequency tables and the scores built on them.
//!
//! Quadsets over `n` taxa are stored densely by their colexicographic rank
//! `C(a,1) + C(b,2) + C(c,3) + C(d,4)` for `a < b < c < d`. Topology indices
//! are `0 = ab|cd`, `1 = ac|bd`, `2 = ad|bc`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{parse_newick, LeafDistances, TaxonSet, Tree};

pub fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

pub type Quadset = [usize; 4];

#[inline]
pub fn quadset_rank(q: &Quadset) -> usize {
    let [a, b, c, d] = *q;
    debug_assert!(a < b && b < c && c < d);
    a + b * (b - 1) / 2 + c * (c - 1) * (c - 2) / 6 + d * (d - 1) * (d - 2) * (d - 3) / 24
}

pub fn quadset_count(n: usize) -> usize {
    binom(n, 4) as usize
}

/// All quadsets in rank (colexicographic) order.
pub fn quadsets(n: usize) -> impl Iterator<Item = Quadset> {
    (3..n).flat_map(|d| {
        (2..d).flat_map(move |c| (1..c).flat_map(move |b| (0..b).map(move |a| [a, b, c, d])))
    })
}

/// All quadsets in lexicographic order, the order used for table dumps.
pub fn quadsets_lex(n: usize) -> impl Iterator<Item = Quadset> {
    (0..n).flat_map(move |a| {
        (a + 1..n).flat_map(move |b| (b + 1..n).flat_map(move |c| (c + 1..n).map(move |d| [a, b, c, d])))
    })
}

/// Sorts four distinct taxon indices into a quadset.
pub fn quadset_of(mut xs: [usize; 4]) -> Quadset {
    xs.sort_unstable();
    xs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Topology {
    AbCd = 0,
    AcBd = 1,
    AdBc = 2,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::AbCd, Topology::AcBd, Topology::AdBc];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Topology {
        Topology::ALL[i]
    }

    /// Topology of a sorted quadset given one of its cherries, as two
    /// members in any order.
    pub fn from_pair(q: &Quadset, x: usize, y: usize) -> Topology {
        let partner = if x == q[0] {
            y
        } else if y == q[0] {
            x
        } else {
            // the complementary pair holds q[0]
            let (u, v) = complement(q, x, y);
            if u == q[0] { v } else { u }
        };
        match q.iter().position(|&v| v == partner) {
            Some(1) => Topology::AbCd,
            Some(2) => Topology::AcBd,
            Some(3) => Topology::AdBc,
            _ => panic!("pair not inside quadset"),
        }
    }

    /// The two cherries `(first pair, second pair)` of this topology on `q`.
    pub fn pairs(self, q: &Quadset) -> ((usize, usize), (usize, usize)) {
        let [a, b, c, d] = *q;
        match self {
            Topology::AbCd => ((a, b), (c, d)),
            Topology::AcBd => ((a, c), (b, d)),
            Topology::AdBc => ((a, d), (b, c)),
        }
    }
}

fn complement(q: &Quadset, x: usize, y: usize) -> (usize, usize) {
    let mut rest = q.iter().copied().filter(|&v| v != x && v != y);
    (rest.next().unwrap(), rest.next().unwrap())
}

/// Four-point condition on a tree metric: the pairing with the strictly
/// smallest sum is the displayed topology; `None` for an unresolved star.
#[inline]
pub fn topology_from_distances(dist: &LeafDistances, q: &Quadset) -> Option<Topology> {
    let [a, b, c, d] = *q;
    let s0 = dist.get(a, b) + dist.get(c, d);
    let s1 = dist.get(a, c) + dist.get(b, d);
    let s2 = dist.get(a, d) + dist.get(b, c);
    if s0 < s1 && s0 < s2 {
        Some(Topology::AbCd)
    } else if s1 < s0 && s1 < s2 {
        Some(Topology::AcBd)
    } else if s2 < s0 && s2 < s1 {
        Some(Topology::AdBc)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quartet {
    pub quadset: Quadset,
    pub topology: Topology,
}

impl Quartet {
    pub fn new(quadset: Quadset, topology: Topology) -> Self {
        Quartet { quadset, topology }
    }

    /// `xy|zw` given by labels in any order.
    pub fn from_labels(taxa: &TaxonSet, left: [&str; 2], right: [&str; 2]) -> Result<Quartet> {
        let ids = taxa.indices_of(&[left[0], left[1], right[0], right[1]])?;
        let q: Quadset = [ids[0], ids[1], ids[2], ids[3]];
        let x = taxa.index_of(left[0]).unwrap();
        let y = taxa.index_of(left[1]).unwrap();
        Ok(Quartet::new(q, Topology::from_pair(&q, x, y)))
    }

    pub fn display<'a>(&'a self, taxa: &'a TaxonSet) -> QuartetDisplay<'a> {
        QuartetDisplay { q: self, taxa }
    }
}

pub struct QuartetDisplay<'a> {
    q: &'a Quartet,
    taxa: &'a TaxonSet,
}

impl fmt::Display for QuartetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ((a, b), (c, d)) = self.q.topology.pairs(&self.q.quadset);
        let l = |i| self.taxa.label(i);
        write!(f, "{}{}|{}{}", l(a), l(b), l(c), l(d))
    }
}

/// Exactly one topology per quadset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompleteQuartetSet {
    taxa: Arc<TaxonSet>,
    choice: Vec<Topology>,
}

impl CompleteQuartetSet {
    pub fn new(taxa: Arc<TaxonSet>, choice: Vec<Topology>) -> Result<Self> {
        if choice.len() != quadset_count(taxa.len()) {
            return Err(Error::Invalid(format!(
                "complete set over {} taxa needs {} quadsets, got {}",
                taxa.len(),
                quadset_count(taxa.len()),
                choice.len()
            )));
        }
        Ok(CompleteQuartetSet { taxa, choice })
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    #[inline]
    pub fn get(&self, q: &Quadset) -> Topology {
        self.choice[quadset_rank(q)]
    }

    #[inline]
    pub fn set(&mut self, q: &Quadset, t: Topology) {
        self.choice[quadset_rank(q)] = t;
    }

    pub fn contains(&self, q: &Quartet) -> bool {
        self.get(&q.quadset) == q.topology
    }

    pub fn choices(&self) -> &[Topology] {
        &self.choice
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Quartet> + '_ {
        quadsets(self.n_taxa()).zip(self.choice.iter()).map(|(q, &t)| Quartet::new(q, t))
    }

    /// Number of quadsets on which the two sets disagree.
    pub fn distance(&self, other: &CompleteQuartetSet) -> u64 {
        self.choice.iter().zip(&other.choice).filter(|(a, b)| a != b).count() as u64
    }
}

/// `Q(T)`: the quartet displayed by `t` on every quadset.
pub fn quartets_of_tree(t: &Tree) -> Result<CompleteQuartetSet> {
    let n = t.n_taxa();
    if n < 4 {
        return Err(Error::TooFewTaxa { need: 4, got: n });
    }
    let dist = t.leaf_distances();
    let choice = quadsets(n)
        .map(|q| topology_from_distances(&dist, &q).expect("binary tree resolves every quadset"))
        .collect();
    Ok(CompleteQuartetSet { taxa: t.taxa().clone(), choice })
}

/// `d_Q(t1, t2)`: quadsets on which the two trees display different quartets.
pub fn quartet_distance(t1: &Tree, t2: &Tree) -> Result<u64> {
    if !t1.same_taxa(t2) {
        return Err(Error::LeafSetMismatch);
    }
    Ok(quartets_of_tree(t1)?.distance(&quartets_of_tree(t2)?))
}

/// Multiset of input trees on a shared taxon set.
#[derive(Debug, Clone)]
pub struct WqcInstance {
    taxa: Arc<TaxonSet>,
    trees: Vec<(Tree, u64)>,
}

impl WqcInstance {
    pub fn new(taxa: Arc<TaxonSet>, trees: Vec<(Tree, u64)>) -> Result<Self> {
        if taxa.len() < 4 {
            return Err(Error::TooFewTaxa { need: 4, got: taxa.len() });
        }
        let mut out = Vec::with_capacity(trees.len());
        for (t, m) in trees {
            if m == 0 {
                return Err(Error::Invalid("tree multiplicity must be at least 1".into()));
            }
            out.push((t.with_taxa(taxa.clone())?, m));
        }
        Ok(WqcInstance { taxa, trees: out })
    }

    /// Instance whose taxa are those of the first tree.
    pub fn from_trees(trees: Vec<(Tree, u64)>) -> Result<Self> {
        let taxa = trees
            .first()
            .map(|(t, _)| t.taxa().clone())
            .ok_or_else(|| Error::Invalid("instance has no trees".into()))?;
        WqcInstance::new(taxa, trees)
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    pub fn trees(&self) -> &[(Tree, u64)] {
        &self.trees
    }

    /// Total multiplicity.
    pub fn k(&self) -> u64 {
        self.trees.iter().map(|(_, m)| m).sum()
    }

    /// Reads the instance format: one tree per line, optionally preceded by
    /// a multiplicity and a tab; blank and `#` lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut taxa: Option<Arc<TaxonSet>> = None;
        let mut trees = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |e: Error| Error::Invalid(format!("line {}: {e}", lineno + 1));
            let (mult, newick) = split_multiplicity(line).map_err(at)?;
            let tree = parse_newick(newick, taxa.clone()).map_err(at)?;
            if taxa.is_none() {
                taxa = Some(tree.taxa().clone());
            }
            trees.push((tree, mult));
        }
        WqcInstance::from_trees(trees)
    }

    pub fn to_text(&self) -> String {
        self.trees.iter().map(|(t, m)| format!("{m}\t{}\n", t.to_newick())).collect()
    }
}

fn split_multiplicity(line: &str) -> Result<(u64, &str)> {
    if line.starts_with('(') {
        return Ok((1, line));
    }
    let (head, rest) = line
        .split_once(|c: char| c.is_whitespace())
        .ok_or_else(|| Error::Invalid(format!("cannot read `{line}` as `multiplicity<TAB>newick`")))?;
    let m: u64 = head
        .parse()
        .map_err(|_| Error::Invalid(format!("bad multiplicity `{head}`")))?;
    if m == 0 {
        return Err(Error::Invalid("tree multiplicity must be at least 1".into()));
    }
    Ok((m, rest.trim()))
}

/// Per-quadset frequency triples `f_Q` of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuartetTable {
    taxa: Arc<TaxonSet>,
    counts: Vec<[u64; 3]>,
    k: u64,
}

impl QuartetTable {
    /// Table from raw triples in rank order; every triple must sum to `k`.
    pub fn from_counts(taxa: Arc<TaxonSet>, counts: Vec<[u64; 3]>, k: u64) -> Result<Self> {
        if taxa.len() < 4 {
            return Err(Error::TooFewTaxa { need: 4, got: taxa.len() });
        }
        if counts.len() != quadset_count(taxa.len()) {
            return Err(Error::Invalid(format!(
                "expected {} quadsets, got {}",
                quadset_count(taxa.len()),
                counts.len()
            )));
        }
        if let Some((q, c)) = quadsets(taxa.len()).zip(&counts).find(|(_, c)| c.iter().sum::<u64>() != k) {
            let l = |i: usize| taxa.label(i).to_string();
            return Err(Error::Invalid(format!(
                "triple {c:?} on {{{},{},{},{}}} does not sum to k={k}",
                l(q[0]),
                l(q[1]),
                l(q[2]),
                l(q[3])
            )));
        }
        Ok(QuartetTable { taxa, counts, k })
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `N = k * C(n, 4)`, the size of the quartet multiset.
    pub fn total(&self) -> u64 {
        self.k * binom(self.n_taxa(), 4)
    }

    pub fn counts(&self) -> &[[u64; 3]] {
        &self.counts
    }

    #[inline]
    pub fn triple(&self, q: &Quadset) -> [u64; 3] {
        self.counts[quadset_rank(q)]
    }

    #[inline]
    pub fn frequency(&self, q: &Quartet) -> u64 {
        self.triple(&q.quadset)[q.topology.index()]
    }

    /// Σ over quadsets of the frequency of the chosen topology.
    pub fn weight(&self, set: &CompleteQuartetSet) -> u64 {
        self.counts.iter().zip(set.choices()).map(|(c, t)| c[t.index()]).sum()
    }

    pub(crate) fn score_distances(&self, dist: &LeafDistances) -> u64 {
        quadsets(self.n_taxa())
            .zip(&self.counts)
            .map(|(q, c)| c[topology_from_distances(dist, &q).expect("binary tree").index()])
            .sum()
    }

    /// WQC objective: quartets of the input multiset displayed by `m`.
    pub fn score(&self, m: &Tree) -> Result<u64> {
        if *m.taxa().as_ref() != *self.taxa {
            return Err(Error::LeafSetMismatch);
        }
        Ok(self.score_distances(&m.leaf_distances()))
    }

    /// Dump as tab-separated `a b c d f0 f1 f2` lines in lexicographic
    /// quadset order.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# wqc quartet table n={} k={}\n", self.n_taxa(), self.k);
        for q in quadsets_lex(self.n_taxa()) {
            let c = self.triple(&q);
            let l = |i: usize| self.taxa.label(i);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                l(q[0]),
                l(q[1]),
                l(q[2]),
                l(q[3]),
                c[0],
                c[1],
                c[2]
            ));
        }
        out
    }

    /// Reads a table dump. Each line's labels may come in any order; the
    /// triple is read relative to the order as written.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut rows: Vec<([String; 4], [u64; 3])> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 {
                return Err(Error::Invalid(format!("line {}: expected 7 fields, got {}", lineno + 1, f.len())));
            }
            let mut tri = [0u64; 3];
            for (j, s) in f[4..].iter().enumerate() {
                tri[j] = s
                    .parse()
                    .map_err(|_| Error::Invalid(format!("line {}: bad count `{s}`", lineno + 1)))?;
            }
            rows.push(([f[0], f[1], f[2], f[3]].map(String::from), tri));
        }
        let mut labels: Vec<&str> = rows.iter().flat_map(|(l, _)| l.iter().map(String::as_str)).collect();
        labels.sort_unstable();
        labels.dedup();
        let taxa = Arc::new(TaxonSet::new(labels)?);
        let n = taxa.len();
        if n < 4 {
            return Err(Error::TooFewTaxa { need: 4, got: n });
        }
        let mut counts: Vec<Option<[u64; 3]>> = vec![None; quadset_count(n)];
        for (labels, tri) in &rows {
            let ids = [0, 1, 2, 3].map(|j| taxa.index_of(&labels[j]).unwrap());
            let q = quadset_of(ids);
            if q.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Invalid(format!("repeated label in quadset {labels:?}")));
            }
            // the written order names the pairs: col0 = ids0ids1|ids2ids3, ...
            let mut canon = [0u64; 3];
            canon[Topology::from_pair(&q, ids[0], ids[1]).index()] = tri[0];
            canon[Topology::from_pair(&q, ids[0], ids[2]).index()] = tri[1];
            canon[Topology::from_pair(&q, ids[0], ids[3]).index()] = tri[2];
            let slot = &mut counts[quadset_rank(&q)];
            if slot.is_some() {
                return Err(Error::Invalid(format!("quadset {labels:?} listed twice")));
            }
            *slot = Some(canon);
        }
        let counts: Vec<[u64; 3]> = counts
            .into_iter()
            .map(|c| c.ok_or_else(|| Error::Invalid("table does not cover every quadset".into())))
            .collect::<Result<_>>()?;
        let k = counts[0].iter().sum();
        QuartetTable::from_counts(taxa, counts, k)
    }
}

/// `f_Q` for an instance: per quadset, summed multiplicities of the trees
/// displaying each topology.
pub fn build_table(inst: &WqcInstance) -> QuartetTable {
    let n = inst.taxa().len();
    let sets: Vec<(CompleteQuartetSet, u64)> = inst
        .trees()
        .par_iter()
        .map(|(t, m)| (quartets_of_tree(t).expect("instance has >= 4 taxa"), *m))
        .collect();
    let mut counts = vec![[0u64; 3]; quadset_count(n)];
    for (set, m) in &sets {
        for (c, t) in counts.iter_mut().zip(set.choices()) {
            c[t.index()] += m;
        }
    }
    QuartetTable { taxa: inst.taxa().clone(), counts, k: inst.k() }
}

/// WQC objective of `m` against an instance.
pub fn score(table: &QuartetTable, m: &Tree) -> Result<u64> {
    table.score(m)
}

/// Dominance structure of one frequency triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dominance {
    pub dominant: [bool; 3],
    pub n_dominant: u8,
    pub strictly_dominant: Option<Topology>,
    pub strictly_least: Option<Topology>,
}

impl Dominance {
    pub fn of(c: [u64; 3]) -> Dominance {
        let max = *c.iter().max().unwrap();
        let min = *c.iter().min().unwrap();
        let dominant = c.map(|v| v == max);
        let n_dominant = dominant.iter().filter(|&&d| d).count() as u8;
        let unique = |v: u64| {
            let mut hits = c.iter().enumerate().filter(|(_, &x)| x == v);
            let first = hits.next().map(|(i, _)| Topology::from_index(i));
            if hits.next().is_some() {
                None
            } else {
                first
            }
        };
        Dominance { dominant, n_dominant, strictly_dominant: unique(max), strictly_least: unique(min) }
    }

    /// Dominant topologies in index order.
    pub fn dominant_topologies(&self) -> impl Iterator<Item = Topology> + '_ {
        Topology::ALL.into_iter().filter(|t| self.dominant[t.index()])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub per_quadset: Vec<Dominance>,
    /// Quadsets with exactly 1, 2 and 3 dominant topologies.
    pub with_one: usize,
    pub with_two: usize,
    pub with_three: usize,
}

pub fn classify_dominance(table: &QuartetTable) -> DominanceReport {
    let per_quadset: Vec<Dominance> = table.counts().iter().map(|&c| Dominance::of(c)).collect();
    let count = |k: u8| per_quadset.iter().filter(|d| d.n_dominant == k).count();
    DominanceReport { with_one: count(1), with_two: count(2), with_three: count(3), per_quadset }
}

/// Input file that is either a tree instance or a table dump.
#[derive(Debug, Clone)]
pub enum InputData {
    Instance(WqcInstance),
    Table(QuartetTable),
}

impl InputData {
    /// A file whose first data line contains `(` is an instance.
    pub fn parse(text: &str) -> Result<Self> {
        let first = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .ok_or_else(|| Error::Invalid("input is empty".into()))?;
        if first.contains('(') {
            Ok(InputData::Instance(WqcInstance::parse(text)?))
        } else {
            Ok(InputData::Table(QuartetTable::from_tsv(text)?))
        }
    }

    pub fn table(&self) -> QuartetTable {
        match self {
            InputData::Instance(i) => build_table(i),
            InputData::Table(t) => t.clone(),
        }
    }

    pub fn instance(&self) -> Option<&WqcInstance> {
        match self {
            InputData::Instance(i) => Some(i),
            InputData::Table(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        parse_newick(s, None).unwrap()
    }

    #[test]
    fn rank_is_dense_and_ordered() {
        for (i, q) in quadsets(9).enumerate() {
            assert_eq!(quadset_rank(&q), i);
        }
        assert_eq!(quadsets_lex(9).count(), 126);
    }

    #[test]
    fn single_quadset() {
        let set = quartets_of_tree(&t("(a,b,(c,d));")).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.choices(), &[Topology::AbCd]);
    }

    #[test]
    fn caterpillar_five_quartets() {
        let tree = t("(a,b,(c,(d,e)));");
        let shown: Vec<String> = quartets_of_tree(&tree)
            .unwrap()
            .iter()
            .map(|q| q.display(tree.taxa()).to_string())
            .collect();
        let mut shown = shown;
        shown.sort();
        assert_eq!(shown, ["ab|cd", "ab|ce", "ab|de", "ac|de", "bc|de"]);
    }

    #[test]
    fn topology_from_pair_roundtrip() {
        let q = [0, 1, 2, 3];
        assert_eq!(Topology::from_pair(&q, 3, 2), Topology::AbCd);
        assert_eq!(Topology::from_pair(&q, 1, 3), Topology::AcBd);
        assert_eq!(Topology::from_pair(&q, 2, 1), Topology::AdBc);
    }

    #[test]
    fn dominance_cases() {
        let d = Dominance::of([11, 17, 16]);
        assert_eq!(d.n_dominant, 1);
        assert_eq!(d.strictly_dominant, Some(Topology::AcBd));
        assert_eq!(d.strictly_least, Some(Topology::AbCd));
        let d = Dominance::of([5, 5, 5]);
        assert_eq!((d.n_dominant, d.strictly_dominant, d.strictly_least), (3, None, None));
        let d = Dominance::of([4, 4, 1]);
        assert_eq!((d.n_dominant, d.strictly_dominant, d.strictly_least), (2, None, Some(Topology::AdBc)));
    }

    #[test]
    fn table_and_score() {
        let a = t("(a,b,(c,(d,e)));");
        let b = t("(a,c,(b,(d,e)));");
        let inst = WqcInstance::from_trees(vec![(a.clone(), 2), (b.clone(), 1)]).unwrap();
        let table = build_table(&inst);
        assert_eq!(table.k(), 3);
        for c in table.counts() {
            assert_eq!(c.iter().sum::<u64>(), 3);
        }
        let d = quartet_distance(&a, &b).unwrap();
        assert_eq!(table.score(&a).unwrap(), 2 * 5 + (5 - d));
    }

    #[test]
    fn instance_file_format() {
        let text = "# two trees\n2\t((a,b),(c,d));\n\n(a,c,(b,d));\n";
        let inst = WqcInstance::parse(text).unwrap();
        assert_eq!(inst.k(), 3);
        assert_eq!(inst.trees().len(), 2);
        let again = WqcInstance::parse(&inst.to_text()).unwrap();
        assert_eq!(again.to_text(), inst.to_text());
        assert!(WqcInstance::parse("(a,b,(c,d));\n(a,b,(c,e));").is_err());
        assert!(WqcInstance::parse("0\t(a,b,(c,d));").is_err());
    }

    #[test]
    fn tsv_roundtrip_and_reorder() {
        let inst = WqcInstance::parse("3\t(a,b,(c,(d,e)));\n(a,e,(b,(c,d)));").unwrap();
        let table = build_table(&inst);
        let back = QuartetTable::from_tsv(&table.to_tsv()).unwrap();
        assert_eq!(back, table);
        // columns follow the written label order
        let written = "b\ta\td\tc\t0\t1\t2\n";
        let one = QuartetTable::from_tsv(written).unwrap();
        // ba|dc = ab|cd -> 0, bd|ac = ac|bd -> 1, bc|ad = ad|bc -> 2
        assert_eq!(one.counts()[0], [0, 1, 2]);
    }
}
