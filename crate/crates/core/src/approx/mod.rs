//! Approximation algorithms: the best input tree for the inconsistency
//! (WMQI) form, the derandomized 1/3-approximation and their combination.

mod derand;

pub use derand::{
    completion_probability, derandomize, derandomize_observed, expected_score, DerandEvent, PartialTree,
    PendingSplit, Side, PROB_SCALE,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quartets::{build_table, quartets_of_tree, CompleteQuartetSet, QuartetTable, WqcInstance};
use crate::tree::Tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BestTree,
    Derandomized,
    Combined,
}

#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub tree: Tree,
    pub wqc_score: u64,
    /// `k * C(n,4) - wqc_score`.
    pub wmqi_cost: u64,
    pub method: Method,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxSummary {
    pub method: Method,
    pub newick: String,
    pub score: u64,
    pub cost: u64,
}

impl ApproxResult {
    fn scored(table: &QuartetTable, tree: Tree, method: Method) -> Result<Self> {
        let wqc_score = table.score(&tree)?;
        Ok(ApproxResult { wmqi_cost: table.total() - wqc_score, tree, wqc_score, method })
    }

    pub fn summary(&self) -> ApproxSummary {
        ApproxSummary {
            method: self.method,
            newick: self.tree.to_newick(),
            score: self.wqc_score,
            cost: self.wmqi_cost,
        }
    }
}

/// Input tree minimizing `sum_j mult_j * d_Q(T, T_j)`; ties go to the
/// smaller canonical Newick string.
pub fn best_input_tree(inst: &WqcInstance) -> Result<ApproxResult> {
    if inst.trees().is_empty() {
        return Err(Error::Invalid("instance has no trees".into()));
    }
    let sets: Vec<(CompleteQuartetSet, u64)> = inst
        .trees()
        .par_iter()
        .map(|(t, m)| Ok((quartets_of_tree(t)?, *m)))
        .collect::<Result<_>>()?;
    let costs: Vec<u64> = sets
        .par_iter()
        .map(|(qi, _)| sets.iter().map(|(qj, m)| m * qi.distance(qj)).sum())
        .collect();
    let (best, _) = inst
        .trees()
        .iter()
        .zip(&costs)
        .map(|((t, _), &c)| (t, (c, t.to_newick())))
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("nonempty");
    let res = ApproxResult::scored(&build_table(inst), best.clone(), Method::BestTree)?;
    debug_assert_eq!(res.wmqi_cost, costs[inst.trees().iter().position(|(t, _)| t == best).unwrap()]);
    Ok(res)
}

/// Derandomized top-down splitting; displays at least a third of the input
/// quartets.
pub fn derandomized_one_third(table: &QuartetTable) -> Result<ApproxResult> {
    let tree = derandomize(table)?;
    ApproxResult::scored(table, tree, Method::Derandomized)
}

/// Better of the best input tree and the derandomized tree (ties keep the
/// best input tree). Guarantees half of the optimum score.
pub fn half_approximation(inst: &WqcInstance) -> Result<ApproxResult> {
    let table = build_table(inst);
    let (best, derand) = rayon::join(|| best_input_tree(inst), || derandomized_one_third(&table));
    let (best, derand) = (best?, derand?);
    let winner = if derand.wqc_score > best.wqc_score { derand } else { best };
    Ok(ApproxResult { method: Method::Combined, ..winner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quartets::quartet_distance;
    use crate::tree::parse_newick;

    fn t(s: &str) -> Tree {
        parse_newick(s, None).unwrap()
    }

    #[test]
    fn identical_trees() {
        let tree = t("((a,b),(c,(d,(e,f))));");
        let inst = WqcInstance::from_trees(vec![(tree.clone(), 2), (tree.clone(), 1)]).unwrap();
        let r = best_input_tree(&inst).unwrap();
        assert_eq!(r.wmqi_cost, 0);
        assert!(r.tree.is_isomorphic(&tree));
        let h = half_approximation(&inst).unwrap();
        assert_eq!(h.wqc_score, 45);
        assert_eq!(h.method, Method::Combined);
    }

    #[test]
    fn two_trees_cost_is_their_distance() {
        let t1 = t("((a,b),(c,(d,e)));");
        let t2 = t("((a,c),(b,(d,e)));");
        let inst = WqcInstance::from_trees(vec![(t1.clone(), 1), (t2.clone(), 1)]).unwrap();
        let r = best_input_tree(&inst).unwrap();
        assert_eq!(r.wmqi_cost, quartet_distance(&t1, &t2).unwrap());
        // ties resolved by canonical string
        assert_eq!(r.tree.to_newick(), t1.to_newick().min(t2.to_newick()));
    }

    #[test]
    fn four_taxa_derandomized_is_exact() {
        let tree = t("((a,c),(b,d));");
        let inst = WqcInstance::from_trees(vec![(tree.clone(), 1)]).unwrap();
        let r = derandomized_one_third(&build_table(&inst)).unwrap();
        assert_eq!(r.wqc_score, 1);
        assert!(r.tree.is_isomorphic(&tree));
    }

    #[test]
    fn summary_json() {
        let inst = WqcInstance::from_trees(vec![(t("((a,b),(c,d));"), 1)]).unwrap();
        let s = serde_json::to_string(&best_input_tree(&inst).unwrap().summary()).unwrap();
        assert_eq!(s, r#"{"method":"best_tree","newick":"(a,b,(c,d));","score":1,"cost":0}"#);
    }
}
