use std::collections::BTreeMap;

use monodromy_core::f222::*;
use monodromy_core::{elaborate, parse_items, Fiber};

fn surface() -> Surface {
    Surface::load(&fixture_dir()).unwrap()
}

#[test]
fn degree_audit_matches_the_printed_totals() {
    let s = surface();
    let r = s.audit().unwrap();
    assert_eq!(r.schema, AUDIT_SCHEMA);
    let by_name: BTreeMap<&str, i64> = r.groups.iter().map(|g| (g.group.as_str(), g.degree)).collect();
    assert_eq!(by_name["parasitic"], 800);
    assert_eq!(by_name["three_point"], 80);
    assert_eq!(by_name["two_point_extra"], 2);
    assert_eq!(by_name["six_point"], 378);
    assert_eq!(r.total, 1260);
    assert_eq!(r.expected, 36 * 35);
    assert!(r.matches);
    assert_eq!(r.total_without_extra, 1259);
}

#[test]
fn parasitic_degree_is_eight_per_disjoint_pair() {
    let s = surface();
    let pairs = s.arrangement.parasitic_pairs().len();
    assert_eq!(pairs, 100);
    let factors: usize = s.parasitic.values().map(|f| f.len()).sum();
    assert_eq!(factors, 4 * pairs);
    for f in s.parasitic.values() {
        assert!(f.factors.iter().all(|t| t.degree() == 2));
    }
}

#[test]
fn local_degrees_and_histograms() {
    let r = surface().audit().unwrap();
    let six: BTreeMap<i64, usize> = [(1, 6), (2, 24), (3, 24)].into_iter().collect();
    for l in &r.locals {
        match l.group.as_str() {
            "six_point" => {
                assert_eq!(l.degree, 126, "phi{}", l.index);
                assert_eq!(l.histogram, six, "phi{}", l.index);
            }
            "three_point" => assert_eq!(l.degree, 10, "phi{}", l.index),
            _ => assert!(l.degree <= 1, "phi{}", l.index),
        }
    }
    let three: Vec<u32> = r.locals.iter().filter(|l| l.group == "three_point").map(|l| l.index).collect();
    assert_eq!(three, vec![2, 3, 4, 8, 9, 10, 11, 13]);
}

#[test]
fn global_product_has_the_full_twist_degree_and_permutation() {
    let s = surface();
    let p = s.factorization(true).unwrap().product();
    assert_eq!(p.degree(), 36 * 35);
    assert!(p.permutation().is_identity());
    let without = s.factorization(false).unwrap().product();
    assert_eq!(without.permutation().cycles(), vec![vec![13, 14]]);
}

#[test]
fn forgetting_degrees() {
    assert_eq!(full_twist_forget_degrees(18).unwrap(), vec![2; 18]);
    let s = surface();
    assert_eq!(local_forget_degree(&s, 3, 7).unwrap(), 1);
    assert_eq!(local_forget_degree(&s, 7, 7).unwrap(), 0);
    assert_eq!(local_forget_degree(&s, 7, 16).unwrap(), 2);
    // f_16 sees only phi_7; f_1 sees phi_1 and one other factor.
    for i in (1..=13).filter(|&i| i != 7) {
        assert_eq!(local_forget_degree(&s, i, 16).unwrap(), 0, "phi{i}");
    }
    let f1: i64 = (2..=13).map(|i| local_forget_degree(&s, i, 1).unwrap()).sum();
    assert_eq!(f1, 1);
    let r = s.audit().unwrap();
    assert!(r.forget_ok, "{:?}", r.forget_degrees);
}

#[test]
fn six_point_matches_the_comparison_braid_in_degree_and_permutation() {
    let c = six_point_check(&fixture_dir(), false).unwrap();
    assert!(c.local.necessary, "{:?}", c.local);
    assert!(c.embedded_necessary);
    assert_eq!(c.local.degree, 12 * 11 - 4 - 2);
    // Independent: the comparison braid permutes exactly the pairs 2, 3, 4, 6.
    let fiber = Fiber::doubled(6);
    let pairs = elaborate(&parse_items("Z[2,2'] Z[3,3'] Z[4,4'] Z[6,6']").unwrap(), &fiber).unwrap().product();
    assert_eq!(six_point_target().unwrap().permutation(), pairs.permutation());
}

#[test]
fn phi_fixtures_are_in_the_doubled_fiber() {
    let s = surface();
    assert_eq!(s.fiber, Fiber::doubled(18));
    assert_eq!(s.locals.len(), 14);
    assert!(s.local(12).unwrap().factorization.is_empty());
    assert_eq!(s.local(14).unwrap().factorization.degree(), 1);
}

fn copy_fixtures(skip: &str) -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    for sub in ["f222", "five_point"] {
        std::fs::create_dir_all(tmp.path().join(sub)).unwrap();
        for e in std::fs::read_dir(fixture_dir().join(sub)).unwrap() {
            let e = e.unwrap();
            let rel = format!("{sub}/{}", e.file_name().to_string_lossy());
            if rel != skip {
                std::fs::copy(e.path(), tmp.path().join(&rel)).unwrap();
            }
        }
    }
    tmp
}

#[test]
fn missing_extra_branch_point_gives_1259_and_is_flagged() {
    let tmp = copy_fixtures("f222/phi14.dsl");
    let r = Surface::load(tmp.path()).unwrap().audit().unwrap();
    assert_eq!(r.total, 1259);
    assert!(!r.matches);
    assert!(!r.forget_ok);
    assert_eq!(r.forget_degrees[&7], 1);
    assert!(r.notes.iter().any(|n| n.contains("phi14")));
}

#[test]
fn missing_components_are_listed() {
    let tmp = tempfile::tempdir().unwrap();
    let err = format!("{:#}", Surface::load(tmp.path()).unwrap_err());
    for f in required_files() {
        assert!(err.contains(&f), "{f} not in {err}");
    }
}
