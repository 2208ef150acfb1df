//! Cyclic-ordering reduction: instances, the six-tree gadget per triple and
//! the accounting of the quartets a candidate consensus tree keeps.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quartets::{binom, quadset_of, quadsets, quartets_of_tree, CompleteQuartetSet, Quartet, Topology, WqcInstance};
use crate::tree::{build_caterpillar, Clade, TaxonSet, Tree};

/// Element set `S` (sorted) and ordered triples over it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicOrderingInstance {
    elements: Vec<String>,
    triples: Vec<[usize; 3]>,
}

impl CyclicOrderingInstance {
    pub fn new<S: AsRef<str>>(elements: &[S], triples: &[[S; 3]]) -> Result<Self> {
        let mut elems: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        elems.sort();
        if let Some(w) = elems.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateLabel(w[0].clone()));
        }
        if elems.len() < 3 {
            return Err(Error::TooFewTaxa { need: 3, got: elems.len() });
        }
        if let Some(e) = elems.iter().find(|e| e.is_empty() || e.contains(|c: char| "(),;:[]".contains(c) || c.is_whitespace())) {
            return Err(Error::Invalid(format!("element `{e}` is not a valid leaf label")));
        }
        let index = |s: &S| {
            elems
                .binary_search_by(|e| e.as_str().cmp(s.as_ref()))
                .map_err(|_| Error::UnknownLabel(s.as_ref().to_string()))
        };
        let mut out = Vec::with_capacity(triples.len());
        for [a, b, c] in triples {
            let t = [index(a)?, index(b)?, index(c)?];
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Invalid(format!(
                    "triple ({}, {}, {}) repeats an element",
                    a.as_ref(),
                    b.as_ref(),
                    c.as_ref()
                )));
            }
            out.push(t);
        }
        Ok(CyclicOrderingInstance { elements: elems, triples: out })
    }

    /// Reads `n m` on the first line, then `m` lines `a b c`. Elements are
    /// the names used in the triples; when fewer than `n` appear, the rest
    /// get fresh names `s1, s2, ...`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::Invalid("empty cyclic-ordering file".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Invalid(format!("line 1: bad header `{header}`"))))
            .collect::<Result<_>>()?;
        let [n, m] = nums[..] else {
            return Err(Error::Invalid(format!("line 1: expected `n m`, got `{header}`")));
        };
        let mut names: Vec<String> = Vec::new();
        let mut triples = Vec::new();
        for (lineno, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [a, b, c] = toks[..] else {
                return Err(Error::Invalid(format!("line {lineno}: expected `a b c`")));
            };
            for t in [a, b, c] {
                if !names.iter().any(|x| x == t) {
                    names.push(t.to_string());
                }
            }
            triples.push([a.to_string(), b.to_string(), c.to_string()]);
        }
        if triples.len() != m {
            return Err(Error::Invalid(format!("header announces {m} triples, found {}", triples.len())));
        }
        if names.len() > n {
            return Err(Error::Invalid(format!("header announces {n} elements, triples use {}", names.len())));
        }
        let mut fresh = 1;
        while names.len() < n {
            let name = format!("s{fresh}");
            fresh += 1;
            if !names.contains(&name) {
                names.push(name);
            }
        }
        CyclicOrderingInstance::new(&names, &triples)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n(), self.m());
        for t in &self.triples {
            s += &format!("{} {} {}\n", self.elements[t[0]], self.elements[t[1]], self.elements[t[2]]);
        }
        s
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    pub fn n(&self) -> usize {
        self.elements.len()
    }

    pub fn m(&self) -> usize {
        self.triples.len()
    }

    pub fn triple_labels(&self, i: usize) -> [&str; 3] {
        self.triples[i].map(|e| self.elements[e].as_str())
    }

    fn positions<S: AsRef<str>>(&self, order: &[S]) -> Result<Vec<usize>> {
        let mut pos = vec![usize::MAX; self.n()];
        for (p, s) in order.iter().enumerate() {
            let e = self
                .elements
                .binary_search_by(|x| x.as_str().cmp(s.as_ref()))
                .map_err(|_| Error::UnknownLabel(s.as_ref().to_string()))?;
            if pos[e] != usize::MAX {
                return Err(Error::DuplicateLabel(s.as_ref().to_string()));
            }
            pos[e] = p;
        }
        if let Some(e) = pos.iter().position(|&p| p == usize::MAX) {
            return Err(Error::MissingLabel(self.elements[e].clone()));
        }
        Ok(pos)
    }

    /// Every linear ordering of `S` satisfying all triples, in
    /// lexicographic order of permutations.
    pub fn satisfying_orderings(&self) -> Vec<Vec<String>> {
        use itertools::Itertools;
        (0..self.n())
            .permutations(self.n())
            .map(|p| p.into_iter().map(|e| self.elements[e].clone()).collect::<Vec<_>>())
            .filter(|l| satisfies(l, self).map(|r| r.satisfied).unwrap_or(false))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleReport {
    pub triple: [String; 3],
    /// One of `a<b<c`, `b<c<a`, `c<a<b` holds.
    pub rotation_holds: bool,
    /// How many of `a<b`, `b<c`, `c<a` hold.
    pub relations_holding: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SatisfactionReport {
    pub satisfied: bool,
    pub per_triple: Vec<TripleReport>,
}

/// Does the linear ordering `order` satisfy every triple?
pub fn satisfies<S: AsRef<str>>(order: &[S], co: &CyclicOrderingInstance) -> Result<SatisfactionReport> {
    let pos = co.positions(order)?;
    let per_triple: Vec<TripleReport> = co
        .triples
        .iter()
        .map(|&[a, b, c]| {
            let (pa, pb, pc) = (pos[a], pos[b], pos[c]);
            let rotation_holds = (pa < pb && pb < pc) || (pb < pc && pc < pa) || (pc < pa && pa < pb);
            let relations_holding = (pa < pb) as u8 + (pb < pc) as u8 + (pc < pa) as u8;
            TripleReport {
                triple: [a, b, c].map(|e| co.elements[e].clone()),
                rotation_holds,
                relations_holding,
            }
        })
        .collect();
    Ok(SatisfactionReport { satisfied: per_triple.iter().all(|t| t.rotation_holds), per_triple })
}

/// Where a gadget tree comes from: its triple, its designated ordered pair
/// and whether it is the reversed member of the pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRole {
    pub triple: usize,
    pub pair: [String; 2],
    pub reversed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuartetClass {
    B,
    In,
    Out,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    W,
    Z,
    S,
}

#[derive(Debug, Clone)]
pub struct GadgetInstance {
    pub co: CyclicOrderingInstance,
    pub wqc: WqcInstance,
    pub w_labels: Vec<String>,
    pub z_labels: Vec<String>,
    pub w_size: usize,
    /// `K = 6m |B(T)|`.
    pub k_value: u64,
    pub o_bound: u64,
    /// `K + O + 4m|W||Z|`.
    pub threshold: u64,
    pub provenance: Vec<TreeRole>,
    roles: Vec<Role>,
    pair_index: Vec<[usize; 2]>,
}

/// JSON companion of an emitted gadget instance file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadgetSidecar {
    #[serde(rename = "K")]
    pub k_value: u64,
    #[serde(rename = "O")]
    pub o_bound: u64,
    pub threshold: u64,
    pub w_size: usize,
    pub w_labels: Vec<String>,
    pub z_labels: Vec<String>,
    pub elements: Vec<String>,
    pub triples: Vec<[String; 3]>,
    pub provenance: Vec<TreeRole>,
}

pub const DEFAULT_W_SIZE: usize = 4;

/// `O = 3m|W||Z|(C(n-2,2) + 2(n-2))`.
pub fn out_bound(n: usize, m: usize, w_size: usize) -> u64 {
    let ww = (w_size * w_size) as u64;
    3 * m as u64 * ww * (binom(n - 2, 2) + 2 * (n as u64 - 2))
}

/// Six caterpillars per triple, each pair in ordered and reversed form, with
/// sorted fillers and caterpillar-shaped `W`, `Z` on `w1.., z1..`.
pub fn build_gadget(co: &CyclicOrderingInstance, w_size: usize) -> Result<GadgetInstance> {
    if w_size == 0 {
        return Err(Error::Invalid("w_size must be at least 1".into()));
    }
    if co.m() == 0 {
        return Err(Error::Invalid("cyclic-ordering instance has no triples".into()));
    }
    let w_labels: Vec<String> = (1..=w_size).map(|i| format!("w{i}")).collect();
    let z_labels: Vec<String> = (1..=w_size).map(|i| format!("z{i}")).collect();
    if let Some(e) = co.elements.iter().find(|e| w_labels.contains(e) || z_labels.contains(e)) {
        return Err(Error::Invalid(format!("element `{e}` clashes with a W/Z leaf label")));
    }
    let w = Clade::caterpillar(&w_labels);
    let z = Clade::caterpillar(&z_labels);
    let taxa = Arc::new(TaxonSet::new(co.elements.iter().chain(&w_labels).chain(&z_labels).cloned())?);

    let mut trees = Vec::with_capacity(6 * co.m());
    let mut provenance = Vec::with_capacity(6 * co.m());
    let mut pair_index = Vec::with_capacity(6 * co.m());
    for (ti, &[a, b, c]) in co.triples.iter().enumerate() {
        for (x, y) in [(a, b), (b, c), (c, a)] {
            let fillers: Vec<usize> = (0..co.n()).filter(|&e| e != x && e != y).collect();
            let leaf = |e: usize| Clade::leaf(&co.elements[e]);
            let mut ordered = vec![w.clone(), leaf(x), leaf(y)];
            ordered.extend(fillers.iter().map(|&e| leaf(e)));
            ordered.push(z.clone());
            let mut reversed = vec![w.clone()];
            reversed.extend(fillers.iter().rev().map(|&e| leaf(e)));
            reversed.extend([leaf(x), leaf(y), z.clone()]);
            for (rev, parts) in [(false, ordered), (true, reversed)] {
                trees.push((build_caterpillar(&parts)?.with_taxa(taxa.clone())?, 1));
                provenance.push(TreeRole {
                    triple: ti,
                    pair: [co.elements[x].clone(), co.elements[y].clone()],
                    reversed: rev,
                });
                let idx = |e: usize| taxa.index_of(&co.elements[e]).unwrap();
                pair_index.push([idx(x), idx(y)]);
            }
        }
    }
    let roles: Vec<Role> = taxa
        .labels()
        .iter()
        .map(|l| {
            if w_labels.contains(l) {
                Role::W
            } else if z_labels.contains(l) {
                Role::Z
            } else {
                Role::S
            }
        })
        .collect();
    let b_per_tree = quadsets(taxa.len())
        .filter(|q| {
            let nw = q.iter().filter(|&&i| roles[i] == Role::W).count();
            let nz = q.iter().filter(|&&i| roles[i] == Role::Z).count();
            nw >= 2 || nz >= 2
        })
        .count() as u64;
    let m = co.m();
    let k_value = 6 * m as u64 * b_per_tree;
    let o_bound = out_bound(co.n(), m, w_size);
    let threshold = k_value + o_bound + 4 * m as u64 * (w_size * w_size) as u64;
    Ok(GadgetInstance {
        co: co.clone(),
        wqc: WqcInstance::new(taxa, trees)?,
        w_labels,
        z_labels,
        w_size,
        k_value,
        o_bound,
        threshold,
        provenance,
        roles,
        pair_index,
    })
}

impl GadgetInstance {
    pub fn taxa(&self) -> &Arc<TaxonSet> {
        self.wqc.taxa()
    }

    pub fn sidecar(&self) -> GadgetSidecar {
        GadgetSidecar {
            k_value: self.k_value,
            o_bound: self.o_bound,
            threshold: self.threshold,
            w_size: self.w_size,
            w_labels: self.w_labels.clone(),
            z_labels: self.z_labels.clone(),
            elements: self.co.elements.clone(),
            triples: (0..self.co.m()).map(|i| self.co.triple_labels(i).map(String::from)).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Rebuilds the gadget described by a sidecar and checks it against the
    /// trees of the accompanying instance file.
    pub fn from_parts(inst: &WqcInstance, sidecar: &GadgetSidecar) -> Result<Self> {
        let co = CyclicOrderingInstance::new(&sidecar.elements, &sidecar.triples)?;
        let g = build_gadget(&co, sidecar.w_size)?;
        let same = g.wqc.trees().len() == inst.trees().len()
            && g.wqc.trees().iter().zip(inst.trees()).all(|((a, ma), (b, mb))| ma == mb && a.is_isomorphic(b));
        if !same || g.sidecar().provenance != sidecar.provenance || g.threshold != sidecar.threshold {
            return Err(Error::Invalid("gadget instance file does not match its sidecar".into()));
        }
        Ok(g)
    }

    /// The caterpillar `(W | order... | Z)`.
    pub fn caterpillar<S: AsRef<str>>(&self, order: &[S]) -> Result<Tree> {
        self.co.positions(order)?;
        let mut parts = vec![Clade::caterpillar(&self.w_labels)];
        parts.extend(order.iter().map(|s| Clade::leaf(s.as_ref())));
        parts.push(Clade::caterpillar(&self.z_labels));
        build_caterpillar(&parts)?.with_taxa(self.taxa().clone())
    }

    fn indices(&self, labels: &[String]) -> Vec<usize> {
        labels.iter().map(|l| self.taxa().index_of(l).unwrap()).collect()
    }
}

/// Class of `q` relative to gadget tree `tree_index`.
pub fn classify_quartet(g: &GadgetInstance, tree_index: usize, q: &Quartet) -> QuartetClass {
    let count = |r: Role| q.quadset.iter().filter(|&&i| g.roles[i] == r).count();
    let (nw, nz) = (count(Role::W), count(Role::Z));
    if nw >= 2 || nz >= 2 {
        return QuartetClass::B;
    }
    if nw != 1 || nz != 1 {
        return QuartetClass::Other;
    }
    let ((p, r), (s, t)) = q.topology.pairs(&q.quadset);
    let with_w = |(u, v): (usize, usize)| if g.roles[u] == Role::W { Some(v) } else if g.roles[v] == Role::W { Some(u) } else { None };
    let with_z = |(u, v): (usize, usize)| if g.roles[u] == Role::Z { Some(v) } else if g.roles[v] == Role::Z { Some(u) } else { None };
    let (x, y) = match (with_w((p, r)), with_z((s, t)), with_w((s, t)), with_z((p, r))) {
        (Some(x), Some(y), _, _) | (_, _, Some(x), Some(y)) => (x, y),
        _ => return QuartetClass::Other, // wz|xy
    };
    if g.roles[x] != Role::S || g.roles[y] != Role::S {
        return QuartetClass::Other;
    }
    let [a, b] = g.pair_index[tree_index];
    if (x, y) == (a, b) {
        QuartetClass::In
    } else if (x, y) == (b, a) {
        QuartetClass::Other
    } else {
        QuartetClass::Out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CandidateBreakdown {
    pub b_count: u64,
    pub in_count: u64,
    pub out_count: u64,
    pub other_count: u64,
    pub total: u64,
    pub threshold: u64,
    pub meets_threshold: bool,
}

/// Input quartets `m` displays, split by class relative to the tree they
/// come from.
pub fn evaluate_candidate(g: &GadgetInstance, m: &Tree) -> Result<CandidateBreakdown> {
    let m = m.with_taxa(g.taxa().clone())?;
    let qm = quartets_of_tree(&m)?;
    let per_tree: Vec<[u64; 4]> = g
        .wqc
        .trees()
        .par_iter()
        .enumerate()
        .map(|(i, (t, mult))| {
            let qt = quartets_of_tree(t).expect(">= 4 taxa");
            let mut acc = [0u64; 4];
            for q in shared(&qm, &qt) {
                acc[classify_quartet(g, i, &q) as usize] += mult;
            }
            acc
        })
        .collect();
    let sum = per_tree.iter().fold([0u64; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    let total = sum.iter().sum();
    Ok(CandidateBreakdown {
        b_count: sum[0],
        in_count: sum[1],
        out_count: sum[2],
        other_count: sum[3],
        total,
        threshold: g.threshold,
        meets_threshold: total >= g.threshold,
    })
}

fn shared<'a>(a: &'a CompleteQuartetSet, b: &'a CompleteQuartetSet) -> impl Iterator<Item = Quartet> + 'a {
    a.iter().zip(b.choices()).filter(|(q, &t)| q.topology == t).map(|(q, _)| q)
}

/// The order of `S` read along the spine of a `(W, Z)`-augmented
/// caterpillar. `None` if `m` has another shape.
pub fn extract_ordering(g: &GadgetInstance, m: &Tree) -> Option<Vec<String>> {
    let m = m.with_taxa(g.taxa().clone()).ok()?;
    let spine = m.caterpillar_spine(&g.indices(&g.w_labels), &g.indices(&g.z_labels))?;
    Some(spine.into_iter().map(|i| g.taxa().label(i).to_string()).collect())
}

/// Per triple, which of the in-quartet families `wa|bz`, `wb|cz`, `wc|az`
/// `m` displays for the given `w`, `z`.
pub fn in_families(g: &GadgetInstance, m: &Tree, w: &str, z: &str) -> Result<Vec<[bool; 3]>> {
    let m = m.with_taxa(g.taxa().clone())?;
    let qm = quartets_of_tree(&m)?;
    let taxa = g.taxa();
    let idx: HashMap<&str, usize> = taxa.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let wi = *idx.get(w).ok_or_else(|| Error::UnknownLabel(w.into()))?;
    let zi = *idx.get(z).ok_or_else(|| Error::UnknownLabel(z.into()))?;
    Ok((0..g.co.m())
        .map(|t| {
            let [a, b, c] = g.co.triple_labels(t).map(|l| idx[l]);
            [(a, b), (b, c), (c, a)].map(|(x, y)| {
                let q = quadset_of([wi, x, y, zi]);
                qm.get(&q) == Topology::from_pair(&q, wi, x)
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::is_wz_augmented_caterpillar;

    fn abc() -> CyclicOrderingInstance {
        CyclicOrderingInstance::new(&["a", "b", "c"], &[["a", "b", "c"]]).unwrap()
    }

    #[test]
    fn rotations_and_two_relations_agree() {
        use itertools::Itertools;
        let labels = ["a", "b", "c"];
        for order in labels.iter().permutations(3) {
            for t in labels.iter().permutations(3) {
                let co = CyclicOrderingInstance::new(&labels, &[[*t[0], *t[1], *t[2]]]).unwrap();
                let r = satisfies(&order, &co).unwrap();
                assert_eq!(r.satisfied, r.per_triple[0].relations_holding == 2);
            }
        }
        assert!(satisfies(&["a", "b", "c"], &abc()).unwrap().satisfied);
        assert!(!satisfies(&["a", "c", "b"], &abc()).unwrap().satisfied);
        assert!(matches!(satisfies(&["a", "b"], &abc()), Err(Error::MissingLabel(_))));
    }

    #[test]
    fn parse_pads_elements() {
        let co = CyclicOrderingInstance::parse("5 2\nx y z\nz y q\n").unwrap();
        assert_eq!(co.elements(), &["q", "s1", "x", "y", "z"]);
        assert_eq!(co.m(), 2);
        assert!(CyclicOrderingInstance::parse("3 2\na b c\n").is_err());
        assert!(CyclicOrderingInstance::parse("3 1\na a c\n").is_err());
        assert_eq!(CyclicOrderingInstance::parse(&co.to_text()).unwrap(), co);
    }

    #[test]
    fn small_gadget_constants() {
        let g = build_gadget(&abc(), 2).unwrap();
        assert_eq!(g.wqc.trees().len(), 6);
        assert_eq!(g.taxa().len(), 7);
        assert_eq!(g.o_bound, 24);
        for (t, _) in g.wqc.trees() {
            assert!(is_wz_augmented_caterpillar(t, &g.w_labels, &g.z_labels));
            let q = quartets_of_tree(t).unwrap();
            let b = q.iter().filter(|q| classify_quartet(&g, 0, q) == QuartetClass::B).count() as u64;
            assert_eq!(6 * b, g.k_value);
        }
    }

    #[test]
    fn classes() {
        let g = build_gadget(&abc(), 2).unwrap();
        let ts = g.taxa().clone();
        // tree 0 is the ordered "a<b" tree
        assert_eq!(g.provenance[0].pair, ["a", "b"]);
        let q = |l: [&str; 2], r: [&str; 2]| Quartet::from_labels(&ts, l, r).unwrap();
        assert_eq!(classify_quartet(&g, 0, &q(["w1", "w2"], ["a", "b"])), QuartetClass::B);
        assert_eq!(classify_quartet(&g, 0, &q(["w1", "a"], ["b", "z1"])), QuartetClass::In);
        assert_eq!(classify_quartet(&g, 0, &q(["w1", "a"], ["c", "z1"])), QuartetClass::Out);
        assert_eq!(classify_quartet(&g, 0, &q(["w1", "z1"], ["a", "c"])), QuartetClass::Other);
        assert_eq!(classify_quartet(&g, 0, &q(["w1", "a"], ["b", "c"])), QuartetClass::Other);
    }

    #[test]
    fn satisfying_caterpillar_hits_threshold() {
        let g = build_gadget(&abc(), 2).unwrap();
        let m = g.caterpillar(&["a", "b", "c"]).unwrap();
        let r = evaluate_candidate(&g, &m).unwrap();
        assert_eq!(r.b_count, g.k_value);
        assert_eq!(r.out_count, g.o_bound);
        assert_eq!(r.in_count, 16);
        assert!(r.meets_threshold);
        assert_eq!(extract_ordering(&g, &m).unwrap(), ["a", "b", "c"]);
        let bad = g.caterpillar(&["a", "c", "b"]).unwrap();
        assert_eq!(evaluate_candidate(&g, &bad).unwrap().in_count, 8);
    }

    #[test]
    fn extract_rejects_mixed_ends() {
        let g = build_gadget(&abc(), 2).unwrap();
        let m = crate::tree::parse_newick("((w1,z1),(w2,(a,(b,(c,z2)))));", Some(g.taxa().clone())).unwrap();
        assert!(extract_ordering(&g, &m).is_none());
    }
}
