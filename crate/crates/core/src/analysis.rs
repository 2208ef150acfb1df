//! Dominance-structure experiments: checks of five natural conjectures
//! about optimal consensus trees, integer search for instances with a
//! prescribed quartet profile, and seeded random searches for falsifiers.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{scan, solve_exact};
use crate::quartets::{build_table, quadset_count, quadset_rank, quartets_of_tree, Dominance, Quartet, QuartetTable, Topology, WqcInstance};
use crate::tree::{parse_newick, random_tree, TaxonSet, Topologies, Tree, DEFAULT_ENUMERATION_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Falsifies,
    Consistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Strictly dominant quartets kept by the optimum keeping the most.
    DominantFraction { strictly_dominant: usize, best_contained: usize },
    /// A quartet of the stated kind that no optimum displays.
    AbsentFromOptima { quartet: Option<String> },
    /// A zero-frequency quartet displayed by an optimum.
    PresentInOptimum { quartet: Option<String>, tree: Option<String> },
    /// Best tree avoiding every strictly least-frequent quartet.
    LeastFrequentFree {
        best_tree: Option<String>,
        best_score: Option<u64>,
        optimum_score: u64,
        optima_all_contain_least_frequent: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    pub conjecture_id: u8,
    /// Instance file text, when the input was a tree instance.
    pub instance: Option<String>,
    pub optimum_score: u64,
    pub optima: Vec<String>,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

fn label(table: &QuartetTable, q: &Quartet) -> String {
    q.display(table.taxa()).to_string()
}

/// Evaluates all five conjectures on a frequency table.
pub fn verify_conjectures_table(table: &QuartetTable) -> Result<Vec<ConjectureReport>> {
    let exact = solve_exact(table)?;
    let optima_sets = exact.optima.iter().map(quartets_of_tree).collect::<Result<Vec<_>>>()?;
    let dom: Vec<Dominance> = table.counts().iter().map(|&c| Dominance::of(c)).collect();
    let quartets: Vec<Quartet> = crate::quartets::quadsets(table.n_taxa())
        .flat_map(|q| Topology::ALL.map(|t| Quartet::new(q, t)))
        .collect();
    let in_some_optimum = |q: &Quartet| optima_sets.iter().any(|s| s.contains(q));
    let report = |id: u8, falsifies: bool, evidence: Evidence| ConjectureReport {
        conjecture_id: id,
        instance: None,
        optimum_score: exact.optimum_score,
        optima: exact.optima.iter().map(Tree::to_newick).collect(),
        verdict: if falsifies { Verdict::Falsifies } else { Verdict::Consistent },
        evidence,
    };
    let mut out = Vec::with_capacity(5);

    let strict: Vec<Quartet> = crate::quartets::quadsets(table.n_taxa())
        .zip(&dom)
        .filter_map(|(q, d)| d.strictly_dominant.map(|t| Quartet::new(q, t)))
        .collect();
    let best_contained = optima_sets
        .iter()
        .map(|s| strict.iter().filter(|q| s.contains(q)).count())
        .max()
        .unwrap_or(0);
    out.push(report(
        1,
        !strict.is_empty() && best_contained == 0,
        Evidence::DominantFraction { strictly_dominant: strict.len(), best_contained },
    ));

    let majority = quartets.iter().find(|q| {
        let c = table.triple(&q.quadset);
        let f = c[q.topology.index()];
        2 * f > c.iter().sum::<u64>() && !in_some_optimum(q)
    });
    out.push(report(2, majority.is_some(), Evidence::AbsentFromOptima { quartet: majority.map(|q| label(table, q)) }));

    let universal = quartets.iter().find(|q| table.frequency(q) == table.k() && !in_some_optimum(q));
    out.push(report(3, universal.is_some(), Evidence::AbsentFromOptima { quartet: universal.map(|q| label(table, q)) }));

    let absent = exact.optima.iter().zip(&optima_sets).find_map(|(t, s)| {
        s.iter().find(|q| table.frequency(q) == 0).map(|q| (t.to_newick(), label(table, &q)))
    });
    out.push(report(
        4,
        absent.is_some(),
        Evidence::PresentInOptimum {
            quartet: absent.as_ref().map(|a| a.1.clone()),
            tree: absent.map(|a| a.0),
        },
    ));

    let least: Vec<Option<Topology>> = dom.iter().map(|d| d.strictly_least).collect();
    let has_least = |t: &Tree| -> bool {
        quartets_of_tree(t)
            .map(|s| s.choices().iter().zip(&least).any(|(c, l)| Some(*c) == *l))
            .unwrap_or(false)
    };
    let free = scan(table, DEFAULT_ENUMERATION_CAP, |t, s| if has_least(&t) { None } else { Some((s, t.to_newick())) })?;
    let best = free.into_iter().max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
    let all_contain = exact.optima.iter().all(has_least);
    out.push(report(
        5,
        best.as_ref().is_some_and(|b| b.0 < exact.optimum_score),
        Evidence::LeastFrequentFree {
            best_score: best.as_ref().map(|b| b.0),
            best_tree: best.map(|b| b.1),
            optimum_score: exact.optimum_score,
            optima_all_contain_least_frequent: all_contain,
        },
    ));
    Ok(out)
}

pub fn verify_conjectures(inst: &WqcInstance) -> Result<Vec<ConjectureReport>> {
    let text = inst.to_text();
    let mut reports = verify_conjectures_table(&build_table(inst))?;
    reports.iter_mut().for_each(|r| r.instance = Some(text.clone()));
    Ok(reports)
}

/// Constraint on one quadset's frequency triple, indexed by topology
/// (`ab|cd`, `ac|bd`, `ad|bc` over the sorted labels).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadsetConstraint {
    pub quadset: [String; 4],
    /// Fixed entries; `null` is a wildcard.
    #[serde(default)]
    pub exact: [Option<u64>; 3],
    /// When present, the triple is a permutation of these values.
    #[serde(default)]
    pub multiset: Option<[u64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredMultiplicity {
    pub newick: String,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimumConstraint {
    pub score: Option<u64>,
    /// The optimum must be unique and equal to this tree.
    pub unique_at: Option<String>,
}

/// Target frequency profile for `realize_profile`. Quadsets not listed are
/// unconstrained apart from summing to `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub taxa: Vec<String>,
    pub k: u64,
    #[serde(default)]
    pub quadsets: Vec<QuadsetConstraint>,
    #[serde(default)]
    pub required: Vec<RequiredMultiplicity>,
    #[serde(default)]
    pub optimum: Option<OptimumConstraint>,
}

/// Tree on which the profile with no surviving dominant quartet is anchored:
/// `ae|bc` with `d` grafted on the middle edge.
pub const NO_DOMINANT_TREE: &str = "((a,e),d,(b,c));";

/// Five taxa, `k = 44`, every triple a permutation of (17, 16, 11) with the
/// 16 on the quartet of [`NO_DOMINANT_TREE`], `f(ac|bd) = 17` and
/// `f(ab|cd) = 11` on `abcd`, that tree three times in the input and the
/// unique optimum at score 80.
pub fn no_dominant_profile() -> ProfileSpec {
    let taxa = Arc::new(TaxonSet::new(["a", "b", "c", "d", "e"]).unwrap());
    let star = parse_newick(NO_DOMINANT_TREE, Some(taxa.clone())).unwrap();
    let qs = quartets_of_tree(&star).unwrap();
    let quadsets = qs
        .iter()
        .map(|q| {
            let labels = q.quadset.map(|i| taxa.label(i).to_string());
            let mut exact = [None; 3];
            if labels == ["a", "b", "c", "d"] {
                exact = [Some(11), Some(17), Some(16)];
            } else {
                exact[q.topology.index()] = Some(16);
            }
            QuadsetConstraint { quadset: labels, exact, multiset: Some([17, 16, 11]) }
        })
        .collect();
    ProfileSpec {
        taxa: taxa.labels().to_vec(),
        k: 44,
        quadsets,
        required: vec![RequiredMultiplicity { newick: NO_DOMINANT_TREE.into(), multiplicity: 3 }],
        optimum: Some(OptimumConstraint { score: Some(80), unique_at: Some(NO_DOMINANT_TREE.into()) }),
    }
}

/// Linear system `sum_{t in vars} x_t = value`.
#[derive(Debug, Clone)]
struct Equation {
    vars: Vec<usize>,
    value: u64,
}

/// Nonnegative integer multiplicities over all topologies whose table
/// matches `spec`. Candidate triples are tried in lexicographic order and,
/// within one, multiplicity vectors in lexicographic order; the first
/// solution meeting the structural constraints is returned.
pub fn realize_profile(spec: &ProfileSpec) -> Result<Option<WqcInstance>> {
    let taxa = Arc::new(TaxonSet::new(spec.taxa.iter().cloned())?);
    let n = taxa.len();
    if !(4..=6).contains(&n) {
        return Err(Error::Invalid(format!("profile search supports 4 to 6 taxa, got {n}")));
    }
    let trees: Vec<Tree> = Topologies::new(taxa.clone(), DEFAULT_ENUMERATION_CAP)?.collect();
    let sets = trees.iter().map(quartets_of_tree).collect::<Result<Vec<_>>>()?;

    // allowed triples per constrained quadset
    let mut options: Vec<(usize, Vec<[u64; 3]>)> = Vec::new();
    let mut seen = vec![false; quadset_count(n)];
    for c in &spec.quadsets {
        let idx = taxa.indices_of(&c.quadset)?;
        let r = quadset_rank(&[idx[0], idx[1], idx[2], idx[3]]);
        if std::mem::replace(&mut seen[r], true) {
            return Err(Error::Invalid(format!("quadset {:?} listed twice", c.quadset)));
        }
        let allowed = allowed_triples(c, spec.k);
        if allowed.is_empty() {
            return Ok(None);
        }
        options.push((r, allowed));
    }
    let mut fixed = vec![None; trees.len()];
    for req in &spec.required {
        let t = parse_newick(&req.newick, Some(taxa.clone()))?;
        let i = trees.iter().position(|u| u.is_isomorphic(&t)).expect("every topology enumerated");
        if fixed[i].is_some_and(|m| m != req.multiplicity) {
            return Ok(None);
        }
        fixed[i] = Some(req.multiplicity);
    }
    let unique_at = match spec.optimum.as_ref().and_then(|o| o.unique_at.as_ref()) {
        Some(s) => Some(parse_newick(s, Some(taxa.clone()))?),
        None => None,
    };

    let profiles: Vec<Vec<(usize, [u64; 3])>> = options
        .iter()
        .map(|(r, opts)| opts.iter().map(|&t| (*r, t)).collect::<Vec<_>>())
        .multi_cartesian_product_or_unit();
    let found = profiles.par_iter().find_map_first(|profile| {
        let mut eqs = vec![Equation { vars: (0..trees.len()).collect(), value: spec.k }];
        for &(r, triple) in profile {
            for (topo, &value) in triple.iter().enumerate() {
                let vars = (0..trees.len()).filter(|&t| sets[t].choices()[r].index() == topo).collect();
                eqs.push(Equation { vars, value });
            }
        }
        let mut search = ProfileSearch { eqs: &eqs, n_vars: trees.len(), found: None };
        let mut accept = |x: &[u64]| -> bool {
            let inst = WqcInstance::new(
                taxa.clone(),
                x.iter().zip(&trees).filter(|(&m, _)| m > 0).map(|(&m, t)| (t.clone(), m)).collect(),
            );
            let Ok(inst) = inst else { return false };
            structural_ok(spec, &inst, unique_at.as_ref())
        };
        search.run(&fixed, &mut accept);
        search.found
    });
    Ok(found.map(|x| {
        WqcInstance::new(taxa.clone(), x.iter().zip(&trees).filter(|(&m, _)| m > 0).map(|(&m, t)| (t.clone(), m)).collect())
            .expect("validated in search")
    }))
}

fn allowed_triples(c: &QuadsetConstraint, k: u64) -> Vec<[u64; 3]> {
    let fits = |t: &[u64; 3]| t.iter().sum::<u64>() == k && (0..3).all(|i| c.exact[i].is_none_or(|v| v == t[i]));
    let mut out: Vec<[u64; 3]> = match c.multiset {
        Some([x, y, z]) => [[x, y, z], [x, z, y], [y, x, z], [y, z, x], [z, x, y], [z, y, x]].into_iter().filter(fits).collect(),
        None => match c.exact {
            [Some(a), Some(b), Some(d)] => vec![[a, b, d]].into_iter().filter(fits).collect(),
            _ => {
                // partially specified: keep the exact entries as equations only
                let free = c.exact.iter().filter(|e| e.is_none()).count();
                let fixed: u64 = c.exact.iter().flatten().sum();
                if fixed > k || (free == 0 && fixed != k) {
                    return Vec::new();
                }
                return vec![c.exact.map(|e| e.unwrap_or(u64::MAX))];
            }
        },
    };
    out.sort();
    out.dedup();
    out
}

fn structural_ok(spec: &ProfileSpec, inst: &WqcInstance, unique_at: Option<&Tree>) -> bool {
    let Some(opt) = &spec.optimum else { return true };
    let Ok(res) = solve_exact(&build_table(inst)) else { return false };
    if opt.score.is_some_and(|s| s != res.optimum_score) {
        return false;
    }
    match unique_at {
        Some(t) => res.optima.len() == 1 && res.optima[0].is_isomorphic(t),
        None => true,
    }
}

trait CartesianOrUnit<T> {
    fn multi_cartesian_product_or_unit(self) -> Vec<Vec<T>>;
}

impl<I, T> CartesianOrUnit<T> for I
where
    I: Iterator<Item = Vec<T>>,
    T: Clone,
{
    fn multi_cartesian_product_or_unit(self) -> Vec<Vec<T>> {
        self.fold(vec![Vec::new()], |acc, opts| {
            acc.iter()
                .flat_map(|prefix| {
                    opts.iter().map(move |o| {
                        let mut p = prefix.clone();
                        p.push(o.clone());
                        p
                    })
                })
                .collect()
        })
    }
}

struct ProfileSearch<'a> {
    eqs: &'a [Equation],
    n_vars: usize,
    found: Option<Vec<u64>>,
}

impl ProfileSearch<'_> {
    /// Depth-first over variables in index order. Equations whose value is
    /// `u64::MAX` are wildcards and only bound nothing.
    fn run(&mut self, fixed: &[Option<u64>], accept: &mut dyn FnMut(&[u64]) -> bool) {
        let mut x: Vec<Option<u64>> = vec![None; self.n_vars];
        for (i, f) in fixed.iter().enumerate() {
            x[i] = *f;
        }
        let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); self.n_vars];
        for (e, eq) in self.eqs.iter().enumerate() {
            if eq.value != u64::MAX {
                eq.vars.iter().for_each(|&v| occurs[v].push(e));
            }
        }
        if let Some(x) = self.propagate(x) {
            self.dfs(x, &occurs, accept);
        }
    }

    fn dfs(&mut self, x: Vec<Option<u64>>, occurs: &[Vec<usize>], accept: &mut dyn FnMut(&[u64]) -> bool) -> bool {
        let Some(v) = x.iter().position(Option::is_none) else {
            let full: Vec<u64> = x.iter().map(|v| v.unwrap()).collect();
            if accept(&full) {
                self.found = Some(full);
                return true;
            }
            return false;
        };
        let upper = occurs[v].iter().map(|&e| self.residual(&x, e)).min().unwrap_or(0);
        for val in 0..=upper {
            let mut y = x.clone();
            y[v] = Some(val);
            if let Some(y) = self.propagate(y) {
                if self.dfs(y, occurs, accept) {
                    return true;
                }
            }
        }
        false
    }

    fn residual(&self, x: &[Option<u64>], e: usize) -> u64 {
        let eq = &self.eqs[e];
        let used: u64 = eq.vars.iter().filter_map(|&v| x[v]).sum();
        eq.value.saturating_sub(used)
    }

    /// Forces variables until a fixpoint: an equation with residual zero
    /// zeroes its open variables, one with a single open variable fixes it.
    /// `None` on contradiction.
    fn propagate(&self, mut x: Vec<Option<u64>>) -> Option<Vec<Option<u64>>> {
        loop {
            let mut changed = false;
            for eq in self.eqs.iter().filter(|e| e.value != u64::MAX) {
                let used: u64 = eq.vars.iter().filter_map(|&v| x[v]).sum();
                if used > eq.value {
                    return None;
                }
                let open: Vec<usize> = eq.vars.iter().copied().filter(|&v| x[v].is_none()).collect();
                let rest = eq.value - used;
                match open.len() {
                    0 if rest != 0 => return None,
                    0 => {}
                    1 => {
                        x[open[0]] = Some(rest);
                        changed = true;
                    }
                    _ if rest == 0 => {
                        open.iter().for_each(|&v| x[v] = Some(0));
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Some(x);
            }
        }
    }
}

/// `k` uniformly random topologies, each with multiplicity one.
pub fn random_instance<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<WqcInstance> {
    let taxa = Arc::new(TaxonSet::new((0..n).map(taxon_name))?);
    WqcInstance::new(taxa.clone(), (0..k).map(|_| (random_tree(taxa.clone(), rng), 1)).collect())
}

/// `a, b, ..., z, t26, t27, ...`
pub fn taxon_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("t{i}")
    }
}

/// Runs `conjecture_id` on the `extra` instances and then on `trials`
/// random instances (trial `i` drawn from a generator seeded with
/// `seed + i`), returning the falsifying reports in that order.
pub fn search_counterexamples(
    conjecture_id: u8,
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
    extra: &[WqcInstance],
) -> Result<Vec<ConjectureReport>> {
    if !(1..=5).contains(&conjecture_id) {
        return Err(Error::Invalid(format!("conjecture id must be 1 to 5, got {conjecture_id}")));
    }
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::TooManyTaxa { n, cap: DEFAULT_ENUMERATION_CAP });
    }
    let pick = |inst: &WqcInstance| -> Result<Option<ConjectureReport>> {
        let r = verify_conjectures(inst)?.swap_remove(conjecture_id as usize - 1);
        Ok((r.verdict == Verdict::Falsifies).then_some(r))
    };
    let mut out = Vec::new();
    for inst in extra {
        out.extend(pick(inst)?);
    }
    let found: Vec<Option<ConjectureReport>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            pick(&random_instance(n, k, &mut rng)?)
        })
        .collect::<Result<_>>()?;
    out.extend(found.into_iter().flatten());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        parse_newick(s, None).unwrap()
    }

    #[test]
    fn single_tree_is_consistent() {
        let inst = WqcInstance::from_trees(vec![(t("((a,b),(c,(d,e)));"), 4)]).unwrap();
        for r in verify_conjectures(&inst).unwrap() {
            assert_eq!(r.verdict, Verdict::Consistent, "conjecture {}", r.conjecture_id);
        }
    }

    #[test]
    fn realize_single_tree_profile() {
        let tree = t("((a,c),(b,(d,e)));");
        let qs = quartets_of_tree(&tree).unwrap();
        let taxa = tree.taxa().clone();
        let spec = ProfileSpec {
            taxa: taxa.labels().to_vec(),
            k: 3,
            quadsets: qs
                .iter()
                .map(|q| {
                    let mut exact = [Some(0); 3];
                    exact[q.topology.index()] = Some(3);
                    QuadsetConstraint { quadset: q.quadset.map(|i| taxa.label(i).to_string()), exact, multiset: None }
                })
                .collect(),
            required: vec![],
            optimum: None,
        };
        let inst = realize_profile(&spec).unwrap().unwrap();
        assert_eq!(inst.trees().len(), 1);
        assert!(inst.trees()[0].0.is_isomorphic(&tree));
        assert_eq!(inst.trees()[0].1, 3);
    }

    #[test]
    fn infeasible_sum() {
        let mut spec = no_dominant_profile();
        spec.k = 45;
        assert!(realize_profile(&spec).unwrap().is_none());
    }

    #[test]
    fn identical_trees_never_falsify_four() {
        let inst = WqcInstance::from_trees(vec![(t("((a,b),(c,(d,e)));"), 2), (t("((b,a),((d,e),c));"), 1)]).unwrap();
        assert!(search_counterexamples(4, 5, 3, 0, 1, &[inst]).unwrap().is_empty());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = no_dominant_profile();
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ProfileSpec>(&s).unwrap(), spec);
    }
}
