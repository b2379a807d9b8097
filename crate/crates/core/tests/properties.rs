use monodromy_core::{forget, hurwitz_move, BraidWord, Factor, Factorization, MoveDirection, NormalForm};
use proptest::prelude::*;

const N: usize = 5;

fn letters(max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec((1..N as i32, any::<bool>()).prop_map(|(g, pos)| if pos { g } else { -g }), 0..max_len)
}

fn word(l: Vec<i32>) -> BraidWord {
    BraidWord::new(N, l).unwrap()
}

/// A pure braid: a product of conjugated squared generators.
fn pure() -> impl Strategy<Value = BraidWord> {
    prop::collection::vec((letters(6), 1..N), 1..4).prop_map(|parts| {
        parts.into_iter().fold(BraidWord::identity(N), |acc, (x, i)| {
            let sq = BraidWord::generator(N, i, 2).unwrap();
            acc.compose(&sq.conjugate(&word(x)).unwrap()).unwrap()
        })
    })
}

fn keep() -> impl Strategy<Value = Vec<usize>> {
    prop::sample::subsequence((1..=N).collect::<Vec<_>>(), 1..=N)
}

proptest! {
    #[test]
    fn forgetting_is_a_homomorphism_on_pure_braids(a in pure(), b in pure(), k in keep()) {
        let lhs = forget(&a.compose(&b).unwrap(), &k).unwrap();
        let rhs = forget(&a, &k).unwrap().compose(&forget(&b, &k).unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs).unwrap());
    }

    #[test]
    fn normal_form_is_a_class_invariant(a in letters(12), x in letters(8)) {
        let a = word(a);
        let padded = word(x.clone()).compose(&word(x).invert()).unwrap().compose(&a).unwrap();
        prop_assert_eq!(NormalForm::of(&a), NormalForm::of(&padded));
    }

    #[test]
    fn backward_move_undoes_forward(ws in prop::collection::vec(letters(6), 2..6), k in 1usize..5) {
        let m = ws.len();
        prop_assume!(k < m);
        let f = Factorization::from_factors(N, ws.into_iter().map(|l| Factor::new(word(l), "t", "")).collect()).unwrap();
        let g = hurwitz_move(&f, k, MoveDirection::Forward).unwrap();
        prop_assert!(g.product().equals(&f.product()).unwrap());
        prop_assert_eq!(hurwitz_move(&g, k, MoveDirection::Backward).unwrap().first_mismatch(&f).unwrap(), None);
    }
}
