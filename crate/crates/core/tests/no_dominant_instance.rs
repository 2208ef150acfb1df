use std::time::Instant;

use wqc_core::analysis::{no_dominant_profile, realize_profile, verify_conjectures, Evidence, Verdict, NO_DOMINANT_TREE};
use wqc_core::exact::solve_exact;
use wqc_core::fpt::{solve_fpt, Budget};
use wqc_core::quartets::{build_table, quadsets, quartets_of_tree, Dominance, Quartet, WqcInstance};
use wqc_core::tree::{parse_newick, Topologies};

fn realized() -> WqcInstance {
    realize_profile(&no_dominant_profile()).unwrap().expect("profile is feasible")
}

#[test]
fn profile_is_realized_exactly() {
    let start = Instant::now();
    let inst = realized();
    eprintln!("search took {:?}", start.elapsed());
    eprint!("{}", inst.to_text());
    assert_eq!(inst.k(), 44);
    let table = build_table(&inst);
    let taxa = inst.taxa();
    let abcd = Quartet::from_labels(taxa, ["a", "b"], ["c", "d"]).unwrap().quadset;
    assert_eq!(table.triple(&abcd), [11, 17, 16]);
    let star = parse_newick(NO_DOMINANT_TREE, Some(taxa.clone())).unwrap();
    let star_q = quartets_of_tree(&star).unwrap();
    for q in quadsets(5) {
        let mut c = table.triple(&q);
        assert_eq!(c[star_q.get(&q).index()], 16);
        c.sort();
        assert_eq!(c, [11, 16, 17]);
    }
    let mult: u64 = inst.trees().iter().filter(|(t, _)| t.is_isomorphic(&star)).map(|(_, m)| m).sum();
    assert_eq!(mult, 3);
}

#[test]
fn optimum_keeps_no_dominant_quartet() {
    let inst = realized();
    let table = build_table(&inst);
    let exact = solve_exact(&table).unwrap();
    let star = parse_newick(NO_DOMINANT_TREE, Some(inst.taxa().clone())).unwrap();
    assert_eq!(exact.optimum_score, 80);
    assert_eq!(exact.optima.len(), 1);
    assert!(exact.optima[0].is_isomorphic(&star));
    for t in Topologies::new(inst.taxa().clone(), 10).unwrap() {
        let qs = quartets_of_tree(&t).unwrap();
        let has_dominant = quadsets(5).any(|q| Dominance::of(table.triple(&q)).strictly_dominant == Some(qs.get(&q)));
        if has_dominant {
            assert!(table.score(&t).unwrap() <= 79);
        }
    }
    let reports = verify_conjectures(&inst).unwrap();
    assert_eq!(reports[0].verdict, Verdict::Falsifies);
    assert_eq!(reports[0].evidence, Evidence::DominantFraction { strictly_dominant: 5, best_contained: 0 });
}

#[test]
fn without_the_anchor_tree() {
    let inst = realized();
    let star = parse_newick(NO_DOMINANT_TREE, Some(inst.taxa().clone())).unwrap();
    let rest: Vec<_> = inst.trees().iter().filter(|(t, _)| !t.is_isomorphic(&star)).cloned().collect();
    let variant = WqcInstance::new(inst.taxa().clone(), rest).unwrap();
    assert_eq!(variant.k(), 41);
    let table = build_table(&variant);
    assert_eq!(table.score(&star).unwrap(), 65);
    assert_eq!(solve_exact(&table).unwrap().optimum_score, 75);
    let r = &verify_conjectures(&variant).unwrap()[4];
    assert_eq!(r.verdict, Verdict::Falsifies);
    match &r.evidence {
        Evidence::LeastFrequentFree { best_score, optimum_score, optima_all_contain_least_frequent, .. } => {
            assert_eq!(*best_score, Some(65));
            assert_eq!(*optimum_score, 75);
            assert!(optima_all_contain_least_frequent);
        }
        other => panic!("unexpected evidence {other:?}"),
    }
}

#[test]
fn fpt_budget_on_strictly_dominant_quartets() {
    let table = build_table(&realized());
    let five = solve_fpt(&table, Budget::new(5, 0, 0)).unwrap();
    assert_eq!(five.best().unwrap().weight, 80);
    let four = solve_fpt(&table, Budget::new(4, 0, 0)).unwrap();
    assert!(four.solutions.iter().all(|s| s.weight != 80));
}
