use monodromy_core::regeneration::stage_factorization;
use monodromy_core::{
    apply_rule, elaborate, k_point_chain, k_point_items, parse_items, DoublingMap, Fiber, Item, RegenRule,
};

fn cabled_equals(src: &str, bases: &[u32], s: &str, t: &str) -> bool {
    let sf = Fiber::parse(src).unwrap();
    let d = DoublingMap::new(&sf, bases).unwrap();
    let a = elaborate(&parse_items(s).unwrap(), &sf).unwrap().product();
    let b = elaborate(&parse_items(t).unwrap(), d.target()).unwrap().product();
    d.cable(&a).unwrap().equals(&b).unwrap()
}

fn one(text: &str) -> Item {
    parse_items(text).unwrap().remove(0)
}

#[test]
fn node_expansion_is_the_cabled_twist() {
    assert!(cabled_equals("1 2 3 4 4' 5", &[5], "Z2[4,5]", "Z2[4,5'] Z2[4,5]"));
    assert!(cabled_equals("1 2 3 4 4'", &[2], "Z2[2,4]", "Z2[2',4] Z2[2,4]"));
    assert!(!cabled_equals("1 2 3 4 4' 5", &[5], "Z2[4,5]", "Z2[4,5] Z2[4,5']"));
}

#[test]
fn detours_around_a_doubled_point_surround_both_points() {
    assert!(cabled_equals("1 2 3 4 4' 5", &[1, 5], "Z2[3,4']{over(4),detour(5)}", "Z2[3,4']{over(4),detour(5),detour(5')}"));
    assert!(cabled_equals("1 2 3 4 4'", &[3], "Zbar[4,4']{detour(3)}", "Zbar[4,4']{detour(3),detour(3')}"));
    assert!(cabled_equals("1 2 3", &[1], "Z[2,3]{detour(1)}", "Z[2,3]{detour(1),detour(1')}"));
    assert!(!cabled_equals("1 2 3 4 4'", &[3], "Zbar[4,4']{detour(3)}", "Zbar[4,4']{detour(3)}"));
}

#[test]
fn mapped_items_agree_with_cabling() {
    let sf = Fiber::parse("1 2 3 4 4' 5").unwrap();
    let d = DoublingMap::new(&sf, &[1, 5]).unwrap();
    for text in ["Z2[3,4']{over(4),detour(5)}", "(Z[3,4']{detour(2),detour(5)})^{Z[3,4]}", "Z4[2,4]", "(Z2[2,3])^{Z2[4,5]^-1}"] {
        let it = one(text);
        let a = elaborate(std::slice::from_ref(&it), &sf).unwrap().product();
        let m = d.map_item(&it).unwrap();
        let b = elaborate(&[m.clone()], d.target()).unwrap().product();
        assert!(d.cable(&a).unwrap().equals(&b).unwrap(), "{text} -> {m}");
    }
}

#[test]
fn rule_degrees() {
    let f = Fiber::parse("1 2 3").unwrap();
    let cases = [
        ("Z[1,2]", &[1u32, 2][..], RegenRule::BRANCH, 2, 2),
        ("Z2[1,3]", &[1], RegenRule::NODE, 2, 4),
        ("Z2[1,3]", &[1, 3], RegenRule::NODE, 4, 8),
        ("Z4[2,3]", &[3], RegenRule::TANGENT, 3, 9),
    ];
    for (text, bases, rule, count, degree) in cases {
        let d = DoublingMap::new(&f, bases).unwrap();
        let out = apply_rule(&one(text), rule, &d).unwrap();
        let fact = elaborate(&out, d.target()).unwrap();
        assert_eq!(fact.len(), count, "{text}");
        assert_eq!(fact.degree(), degree, "{text}");
        assert_eq!(degree, rule_target(rule, bases.len()));
    }
    let d = DoublingMap::new(&f, &[1]).unwrap();
    assert!(apply_rule(&one("Z2[1,3]"), RegenRule::TANGENT, &d).is_err());
}

fn rule_target(rule: RegenRule, doubled: usize) -> i64 {
    if rule == RegenRule::NODE && doubled == 2 {
        8
    } else if rule == RegenRule::NODE {
        4
    } else {
        rule.target_degree()
    }
}

#[test]
fn branch_rule_permutation_is_the_doubled_transposition() {
    let f = Fiber::parse("1 2").unwrap();
    let d = DoublingMap::new(&f, &[1, 2]).unwrap();
    let out = elaborate(&apply_rule(&one("Z[1,2]"), RegenRule::BRANCH, &d).unwrap(), d.target()).unwrap();
    let cabled = d.cable(&elaborate(&[one("Z[1,2]")], &f).unwrap().product()).unwrap();
    // Points 1,1',2,2' sit at positions 1..4; the new branch points swap each pair.
    let pairs = monodromy_core::Permutation::transposition(4, 1, 2).then(&monodromy_core::Permutation::transposition(4, 3, 4));
    assert_eq!(out.product().permutation().then(&pairs), cabled.permutation());
}

#[test]
fn k_point_degrees_and_small_cases() {
    for k in 2..=7usize {
        let fiber = monodromy_core::k_point_fiber(k, 0);
        let b = stage_factorization(&fiber, &k_point_items(k).unwrap()).unwrap();
        let k = k as i64;
        assert_eq!(b.degree(), 4 + 1 + 4 * (k - 2) + (k - 1) * (k - 2));
    }
    let (fiber, items) = k_point_chain(2, 1).unwrap().pop().unwrap();
    let t2 = elaborate(&parse_items("T[2]").unwrap(), &fiber).unwrap();
    let got = stage_factorization(&fiber, &items).unwrap();
    assert_eq!(got.first_mismatch(&t2).unwrap(), None);
    assert!(k_point_chain(3, 3).is_err());
    assert!(k_point_chain(1, 0).is_err());
}

#[test]
fn node_rule_matches_cabling_on_both_sides_of_the_axis() {
    let sf = Fiber::parse("1 2 3 4").unwrap();
    let cases: [(&str, &[u32]); 6] = [
        ("Z2[1,3]", &[1]),
        ("Z2[1,3]", &[3]),
        ("Z2[1,3]", &[1, 3]),
        ("Zbar2[1,3]", &[1]),
        ("Zbar2[1,3]", &[3]),
        ("Zbar2[1,4]{under(3)}", &[1, 4]),
    ];
    for (text, bases) in cases {
        let d = DoublingMap::new(&sf, bases).unwrap();
        let it = one(text);
        let a = elaborate(std::slice::from_ref(&it), &sf).unwrap().product();
        let out = apply_rule(&it, RegenRule::NODE, &d).unwrap();
        let b = elaborate(&out, d.target()).unwrap().product();
        assert!(d.cable(&a).unwrap().equals(&b).unwrap(), "{text} on {bases:?}");
    }
    assert!(cabled_equals("1 2 3", &[1], "Zbar2[1,3]", "Zbar2[1,3] Zbar2[1',3]"));
    assert!(!cabled_equals("1 2 3", &[1], "Zbar2[1,3]", "Zbar2[1',3] Zbar2[1,3]"));
}

#[test]
fn node_under_a_conjugator_that_moves_a_doubled_point() {
    use monodromy_core::regeneration::{apply_plan, parse_plan};
    let sf = Fiber::parse("1 2 3").unwrap();
    let src = parse_items("(Z2[1,3])^{Z[2,3]}").unwrap();
    let plan = parse_plan("double: 2\nnode: Z2[1,3]").unwrap();
    let (tf, out) = apply_plan(&sf, &src, &plan).unwrap();
    let got = elaborate(&out, &tf).unwrap();
    assert_eq!(got.len(), 2);
    assert!(got.factors.iter().all(|t| t.degree() == 2));
    let d = DoublingMap::new(&sf, &[2]).unwrap();
    let want = d.cable(&elaborate(&src, &sf).unwrap().product()).unwrap();
    assert!(got.product().equals(&want).unwrap());
    // A conjugated branch point is cabled whole into one factor.
    let d = DoublingMap::new(&Fiber::parse("1 2 3 4 4' 5").unwrap(), &[3]).unwrap();
    let it = one("(Z[3,4']{detour(2)})^{Z[3,4]}");
    let m = d.map_item(&it).unwrap();
    let a = elaborate(std::slice::from_ref(&it), d.source()).unwrap().product();
    let b = elaborate(&[m], d.target()).unwrap();
    assert_eq!(b.len(), 1);
    assert!(d.cable(&a).unwrap().equals(&b.product()).unwrap());
}
