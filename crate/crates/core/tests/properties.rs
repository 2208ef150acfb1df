use std::collections::HashMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wqc_core::analysis::random_instance;
use wqc_core::approx::best_input_tree;
use wqc_core::quartets::{binom, build_table, quadsets, quartet_distance, quartets_of_tree, topology_from_distances, WqcInstance};
use wqc_core::tree::{parse_newick, Clade, random_tree, TaxonSet, Topologies, Tree};

fn taxa(n: usize) -> Arc<TaxonSet> {
    Arc::new(TaxonSet::new((0..n).map(|i| ((b'a' + i as u8) as char).to_string())).unwrap())
}

fn seeded_tree(n: usize, seed: u64) -> Tree {
    random_tree(taxa(n), &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn serialize_then_parse_is_identity() {
    for n in 4..=7 {
        for t in Topologies::new(taxa(n), 10).unwrap() {
            let back = parse_newick(&t.to_newick(), None).unwrap();
            assert!(back.is_isomorphic(&t));
            assert_eq!(back.to_newick(), t.to_newick());
        }
    }
}

fn mirror(c: &Clade) -> Clade {
    match c {
        Clade::Leaf(l) => Clade::Leaf(l.clone()),
        Clade::Node(ch) => Clade::Node(ch.iter().rev().map(mirror).collect()),
    }
}

#[test]
fn canonical_string_decides_isomorphism() {
    let all: Vec<Tree> = Topologies::new(taxa(5), 10).unwrap().collect();
    for a in &all {
        for b in &all {
            assert_eq!(a.is_isomorphic(b), a.to_newick() == b.to_newick());
        }
        let mirrored = Tree::from_clade(&mirror(&a.to_clade()), None).unwrap();
        assert_eq!(mirrored.to_newick(), a.to_newick());
    }
}

#[test]
fn restriction_to_quadsets_matches_extraction() {
    for t in Topologies::new(taxa(6), 10).unwrap() {
        let qs = quartets_of_tree(&t).unwrap();
        assert_eq!(qs.len() as u64, binom(6, 4));
        for q in quadsets(6) {
            let labels = q.map(|i| t.taxa().label(i).to_string());
            let r = t.restrict(&labels).unwrap();
            let topo = topology_from_distances(&r.leaf_distances(), &[0, 1, 2, 3]).unwrap();
            assert_eq!(topo, qs.get(&q));
        }
    }
}

#[test]
fn quartet_counts_per_tree() {
    for t in Topologies::new(taxa(7), 10).unwrap() {
        assert_eq!(quartets_of_tree(&t).unwrap().len() as u64, binom(7, 4));
    }
}

#[test]
fn quartet_distance_is_a_metric() {
    let five: Vec<Tree> = Topologies::new(taxa(5), 10).unwrap().collect();
    let check = |a: &Tree, b: &Tree, c: &Tree| {
        let ab = quartet_distance(a, b).unwrap();
        assert_eq!(ab, quartet_distance(b, a).unwrap());
        assert_eq!(ab == 0, a.is_isomorphic(b));
        assert!(ab <= quartet_distance(a, c).unwrap() + quartet_distance(c, b).unwrap());
    };
    for a in &five {
        for b in &five {
            for c in &five {
                check(a, b, c);
            }
        }
    }
    for seed in 0..300 {
        let [a, b, c] = [0, 1, 2].map(|j| seeded_tree(6, 3 * seed + j));
        check(&a, &b, &c);
    }
}

#[test]
fn caterpillar_distance_by_hand() {
    let t1 = parse_newick("(a,b,(c,(d,e)));", None).unwrap();
    let t2 = parse_newick("(a,c,(b,(d,e)));", None).unwrap();
    // quadsets abcd, abce differ; abde, acde, bcde agree
    assert_eq!(quartet_distance(&t1, &t2).unwrap(), 2);
    let q1 = quartets_of_tree(&t1).unwrap();
    let shown: Vec<String> = q1.iter().map(|q| q.display(t1.taxa()).to_string()).collect();
    assert_eq!(shown, ["ab|cd", "ab|ce", "ab|de", "ac|de", "bc|de"]);
}

fn relabel(inst: &WqcInstance, perm: &HashMap<String, String>) -> WqcInstance {
    let trees = inst
        .trees()
        .iter()
        .map(|(t, m)| (t.map_labels(|l| perm[l].clone()).unwrap(), *m))
        .collect();
    WqcInstance::from_trees(trees).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restriction_composes(n in 4usize..=8, seed in any::<u64>(), keep in 3usize..=8, keep2 in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(taxa(n), &mut rng);
        let mut labels: Vec<String> = t.taxa().labels().to_vec();
        labels.shuffle(&mut rng);
        let y: Vec<String> = labels[..keep.min(n)].to_vec();
        let y2: Vec<String> = y[..keep2.min(y.len())].to_vec();
        let once = t.restrict(&y2).unwrap();
        let twice = t.restrict(&y).unwrap().restrict(&y2).unwrap();
        prop_assert!(once.is_isomorphic(&twice));
        prop_assert!(t.restrict(t.taxa().labels()).unwrap().is_isomorphic(&t));
    }

    #[test]
    fn complement_identity(n in 4usize..=8, k in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(n, k, &mut rng).unwrap();
        let table = build_table(&inst);
        for c in table.counts() {
            prop_assert_eq!(c.iter().sum::<u64>(), k as u64);
        }
        let m = random_tree(inst.taxa().clone(), &mut rng);
        let lost: u64 = inst.trees().iter().map(|(t, mult)| mult * quartet_distance(&m, t).unwrap()).sum();
        let kept = table.score(&m).unwrap();
        prop_assert_eq!(kept + lost, k as u64 * binom(n, 4));
        let by_tree: u64 = inst
            .trees()
            .iter()
            .map(|(t, mult)| mult * (binom(n, 4) - quartet_distance(&m, t).unwrap()))
            .sum();
        prop_assert_eq!(kept, by_tree);
    }

    #[test]
    fn best_input_tree_is_relabeling_equivariant(n in 4usize..=7, k in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(n, k, &mut rng).unwrap();
        let mut shuffled = inst.taxa().labels().to_vec();
        shuffled.shuffle(&mut rng);
        let perm: HashMap<String, String> = inst.taxa().labels().iter().cloned().zip(shuffled).collect();
        let a = best_input_tree(&inst).unwrap();
        let b = best_input_tree(&relabel(&inst, &perm)).unwrap();
        prop_assert_eq!(a.wmqi_cost, b.wmqi_cost);
        // the permuted winner is an input tree with the same cost
        let mapped = a.tree.map_labels(|l| perm[l].clone()).unwrap();
        let permuted = relabel(&inst, &perm);
        let cost = |t: &Tree| -> u64 { permuted.trees().iter().map(|(u, m)| m * quartet_distance(t, u).unwrap()).sum() };
        prop_assert_eq!(cost(&mapped), b.wmqi_cost);
    }
}
