use std::collections::BTreeMap;

use monodromy_core::{
    elaborate, full_twist, generic_lines, propagate, Factorization, parse_factorization, parse_items, Arrangement, ArrangementSpec, VertexKind,
};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/f222/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn f222() -> Arrangement {
    let spec: ArrangementSpec = serde_json::from_str(&fixture("arrangement.json")).unwrap();
    Arrangement::from_spec(&spec).unwrap()
}

fn generic(lines: &[(u32, u32)]) -> Arrangement {
    let mut vs: Vec<u32> = lines.iter().flat_map(|&(a, b)| [a, b]).collect();
    vs.sort_unstable();
    vs.dedup();
    Arrangement::new(vs, lines.to_vec()).unwrap()
}

#[test]
fn line_order_is_by_right_then_left_vertex() {
    let a = generic(&[(2, 3), (1, 3), (1, 2)]);
    assert_eq!(a.lines(), &[(1, 2), (1, 3), (2, 3)]);
    let spec: ArrangementSpec = serde_json::from_str(&fixture("arrangement.json")).unwrap();
    assert_eq!(f222().spec(), spec, "fixture is listed in line order");
}

#[test]
fn f222_vertex_kinds() {
    let kinds: Vec<VertexKind> = f222().singularities().iter().map(|d| d.kind).collect();
    for v in [5, 6, 7] {
        assert_eq!(kinds[v - 1], VertexKind::Interior(6), "v{v}");
    }
    for v in [1, 12] {
        assert_eq!(kinds[v - 1], VertexKind::TwoPoint, "v{v}");
    }
    for v in [2, 3, 4, 8, 9, 10, 11, 13] {
        assert_eq!(kinds[v - 1], VertexKind::ThreePoint, "v{v}");
    }
}

#[test]
fn f222_parasitic_braids_match_table() {
    let a = f222();
    let ds = a.parasitic_braids();
    for t in [1, 2, 3, 6] {
        assert!(ds[t - 1].items.is_empty(), "D_{t}");
    }
    let printed = fixture("parasitic.dsl");
    let rows: Vec<&str> = printed.lines().filter(|l| !l.starts_with('#') && !l.starts_with("fiber")).collect();
    let nonempty: Vec<_> = ds.iter().filter(|d| !d.items.is_empty()).collect();
    assert_eq!(rows.len(), nonempty.len());
    for (row, d) in rows.iter().zip(&nonempty) {
        assert_eq!(parse_items(row).unwrap(), d.items, "D_{}", d.line);
    }
    let count: usize = ds.iter().map(|d| d.items.len()).sum();
    assert_eq!(count, 100);
    // Brute-force count of line pairs with no shared vertex.
    let lines = a.lines();
    let mut brute = 0;
    for t in 0..lines.len() {
        for p in 0..t {
            let (x, y) = (lines[p], lines[t]);
            if x.0 != y.0 && x.0 != y.1 && x.1 != y.0 && x.1 != y.1 {
                brute += 1;
            }
        }
    }
    assert_eq!(count, brute);
    assert_eq!(a.parasitic_pairs().len(), brute);
    let (_, whole) = parse_factorization(&printed).unwrap();
    assert_eq!(whole.degree(), 200);
}

#[test]
fn f222_vertex_products_group_d_by_smaller_vertex() {
    let a = f222();
    let ds = a.parasitic_braids();
    let grouped: [(u32, &[usize]); 6] =
        [(2, &[4]), (3, &[5, 7]), (4, &[10]), (5, &[11, 12]), (6, &[8, 13, 14]), (7, &[9, 15, 16, 17])];
    for (v, ts) in grouped {
        let expected: Vec<_> = ts.iter().flat_map(|&t| ds[t - 1].items.clone()).collect();
        assert_eq!(a.parasitic_for_vertex(v), expected, "C_{v}");
    }
    assert_eq!(a.parasitic_for_vertex(8), ds[17].items);
    for v in [1, 9, 10, 11, 12, 13] {
        assert!(a.parasitic_for_vertex(v).is_empty(), "C_{v}");
    }
}

#[test]
fn f222_degenerate_degree() {
    let a = f222();
    let bmf = a.degenerate_bmf(&a.default_locals().unwrap()).unwrap();
    assert_eq!(bmf.degree(), 18 * 17);
    // Independent sum: 2 per parasitic pair, m(m-1) per vertex on m lines.
    let local: i64 = a.singularities().iter().map(|d| (d.lines.len() * (d.lines.len() - 1)) as i64).sum();
    assert_eq!(2 * a.parasitic_pairs().len() as i64 + local, 306);
}

#[test]
fn missing_local_is_an_error() {
    let a = generic(&[(1, 2), (1, 3)]);
    assert!(a.degenerate_bmf(&BTreeMap::new()).is_err());
    let mut locals = a.default_locals().unwrap();
    locals.remove(&2);
    locals.remove(&3);
    assert!(a.degenerate_bmf(&locals).is_ok(), "single-line vertices contribute nothing");
}

#[test]
fn generic_lines_multiply_to_the_full_twist() {
    for n in 2..=5 {
        let (fiber, rows, pairs) = generic_lines(n).unwrap();
        assert_eq!(rows.len(), n * (n - 1) / 2);
        let bmf = propagate(&rows, &fiber).unwrap();
        assert_eq!(bmf.degree(), (n * (n - 1)) as i64);
        assert!(bmf.product().equals(&full_twist(n, 1, n).unwrap()).unwrap(), "n = {n}");
        // Each node factor permutes exactly the two lines that meet there.
        for (f, &(i, j)) in bmf.factors.iter().zip(&pairs) {
            assert!(f.word.permutation().is_identity());
            assert_eq!(f.degree(), 2, "{i},{j}");
        }
    }
}

#[test]
fn triangle_with_generic_locals_multiplies_to_the_full_twist() {
    let (fiber, rows, pairs) = generic_lines(3).unwrap();
    let bmf = propagate(&rows, &fiber).unwrap();
    // Vertices of the triangle: 1 = L1∩L2, 2 = L1∩L3, 3 = L2∩L3.
    let tri = Arrangement::new(vec![1, 2, 3], vec![(1, 2), (1, 3), (2, 3)]).unwrap();
    let mut locals = BTreeMap::new();
    for (f, &pair) in bmf.factors.iter().zip(&pairs) {
        let v = tri.singularities().iter().find(|d| d.lines == [pair.0, pair.1]).unwrap().vertex;
        locals.insert(v, Factorization::from_factors(3, vec![f.clone()]).unwrap());
    }
    let out = tri.degenerate_bmf(&locals).unwrap();
    assert_eq!(out.len(), 3);
    assert!(out.product().equals(&full_twist(3, 1, 3).unwrap()).unwrap());
    let two = Arrangement::new(vec![1, 2, 3], vec![(1, 2), (1, 3)]).unwrap();
    let out = two.degenerate_bmf(&two.default_locals().unwrap()).unwrap();
    assert_eq!(out.len(), 1);
    assert!(out.product().equals(&full_twist(2, 1, 2).unwrap()).unwrap());
    assert_eq!(elaborate(&tri.local_twist(2), &tri.fiber()).unwrap().len(), 1);
}
