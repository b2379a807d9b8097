use monodromy_core::{parse_factorization, parse_table, propagate};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/five_point/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn table_propagation_matches_stage_one() {
    let table = parse_table(&fixture("table.dsl")).unwrap();
    let got = propagate(&table.records, &table.fiber).unwrap();
    let (fiber, expected) = parse_factorization(&fixture("stage1.dsl")).unwrap();
    assert_eq!(fiber, table.fiber);
    assert_eq!(got.first_mismatch(&expected).unwrap(), None);
    assert_eq!(got.degree(), 2 + 4 + 4 + 2 + 1 + 2 + 2 + 12);
}

#[test]
fn regeneration_stages_match_printed_expressions() {
    use monodromy_core::regeneration::{apply_plan, parse_plan, stage_factorization};
    let doc = monodromy_core::parse_document(&fixture("stage1.dsl")).unwrap();
    let (mut fiber, mut items) = (doc.fiber, doc.items);
    for stage in [2, 3] {
        let plan = parse_plan(&fixture(&format!("stage{stage}.plan"))).unwrap();
        (fiber, items) = apply_plan(&fiber, &items, &plan).unwrap();
        let got = stage_factorization(&fiber, &items).unwrap();
        let (pf, expected) = parse_factorization(&fixture(&format!("stage{stage}.dsl"))).unwrap();
        assert_eq!(pf, fiber, "stage {stage}");
        assert_eq!(got.first_mismatch(&expected).unwrap(), None, "stage {stage}");
    }
}
