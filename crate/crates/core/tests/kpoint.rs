use monodromy_core::regeneration::{flatten, stage_factorization};
use monodromy_core::{k_point_chain, k_point_closed_form, k_point_fiber, parse_factorization};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/kpoint/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn k4_chain_matches_printed_stages() {
    let chain = k_point_chain(4, 3).unwrap();
    assert_eq!(chain.len(), 4);
    for (n, (fiber, items)) in chain.iter().enumerate() {
        let (pf, expected) = parse_factorization(&fixture(&format!("k4_stage{n}.dsl"))).unwrap();
        assert_eq!(&pf, fiber, "stage {n}");
        let got = stage_factorization(fiber, items).unwrap();
        assert_eq!(got.first_mismatch(&expected).unwrap(), None, "stage {n}");
    }
}

#[test]
fn closed_form_equals_recursion() {
    for k in 2..=6 {
        let (fiber, items) = k_point_chain(k, k - 1).unwrap().pop().unwrap();
        assert_eq!(fiber, k_point_fiber(k, k - 1));
        let rec = stage_factorization(&fiber, &flatten(items)).unwrap();
        let closed = stage_factorization(&fiber, &k_point_closed_form(k)).unwrap();
        assert_eq!(rec.first_mismatch(&closed).unwrap(), None, "k = {k}");
        let want: i64 = (2..=k as i64).map(|j| 10 + 8 * (j - 2)).sum();
        assert_eq!(rec.degree(), want);
    }
}

#[test]
fn table_propagation_reproduces_b_k() {
    use monodromy_core::regeneration::k_point_table;
    use monodromy_core::{k_point_items, propagate};
    for k in 2..=6 {
        let table = k_point_table(k).unwrap();
        let got = propagate(&table.records, &table.fiber).unwrap();
        let want = stage_factorization(&table.fiber, &k_point_items(k).unwrap()).unwrap();
        assert_eq!(got.first_mismatch(&want).unwrap(), None, "k = {k}");
    }
}
