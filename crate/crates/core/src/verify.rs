//! Checks on factorizations: forgetting homomorphisms, Hurwitz moves and a
//! bounded equivalence search, invariance under conjugation, product checks.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{BraidWord, Permutation};
use crate::disk::{Fiber, Label};
use crate::error::BraidError;
use crate::factorization::{Factor, Factorization};
use crate::garside::NormalForm;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("the kept strand set is empty")]
    EmptyKeep,
    #[error("strand {0} is not in 1..={1} or is repeated")]
    BadStrand(usize, usize),
    #[error("no pair {0}, {0}' in the fiber")]
    UnknownPair(u32),
    #[error("move index {k} needs 1 <= k < {len}")]
    MoveRange { k: usize, len: usize },
    #[error(transparent)]
    Braid(#[from] BraidError),
}

/// Deletes every strand that does not start at a position in `keep`
/// (1-based) and renumbers the rest. Crossings between two kept strands
/// survive with their sign.
pub fn forget(b: &BraidWord, keep: &[usize]) -> Result<BraidWord, VerifyError> {
    let n = b.strands();
    if keep.is_empty() {
        return Err(VerifyError::EmptyKeep);
    }
    let mut kept = vec![false; n];
    for &p in keep {
        if p == 0 || p > n || kept[p - 1] {
            return Err(VerifyError::BadStrand(p, n));
        }
        kept[p - 1] = true;
    }
    // at[q] is the strand currently at position q + 1.
    let mut at: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for &l in b.letters() {
        let i = l.unsigned_abs() as usize - 1;
        if kept[at[i]] && kept[at[i + 1]] {
            let below = at[..i].iter().filter(|&&s| kept[s]).count();
            out.push(l.signum() * (below as i32 + 1));
        }
        at.swap(i, i + 1);
    }
    Ok(BraidWord::new(keep.len(), out)?)
}

/// Positions of `i` and `i'` in the fiber.
pub fn pair_positions(fiber: &Fiber, i: u32) -> Result<[usize; 2], VerifyError> {
    let a = fiber.position(&Label::plain(i)).map_err(|_| VerifyError::UnknownPair(i))?;
    let b = fiber.position(&Label::primed(i)).map_err(|_| VerifyError::UnknownPair(i))?;
    Ok([a, b])
}

/// `deg f_i(∏ f)`: the forgetting map onto the pair `i, i'` applied to the
/// product. Strand deletion is a homomorphism only on braids that keep the
/// pair setwise, and single factors often do not, so the factorwise sum
/// can differ.
pub fn forget_degree(f: &Factorization, fiber: &Fiber, i: u32) -> Result<i64, VerifyError> {
    let keep = pair_positions(fiber, i)?;
    Ok(forget(&f.product(), &keep)?.degree())
}

// ---------------------------------------------------------------- Hurwitz

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveDirection {
    /// `(t_k, t_{k+1}) ↦ (t_k t_{k+1} t_k⁻¹, t_k)`.
    Forward,
    /// The inverse move `(s_k, s_{k+1}) ↦ (s_{k+1}, s_{k+1}⁻¹ s_k s_{k+1})`.
    Backward,
}

fn move_words(ws: &[BraidWord], k: usize, dir: MoveDirection) -> Vec<BraidWord> {
    let mut out = ws.to_vec();
    let (a, b) = (&ws[k - 1], &ws[k]);
    match dir {
        MoveDirection::Forward => {
            out[k - 1] = b.conjugate(&a.invert()).expect("same strands").free_reduce();
            out[k] = a.clone();
        }
        MoveDirection::Backward => {
            out[k - 1] = b.clone();
            out[k] = a.conjugate(b).expect("same strands").free_reduce();
        }
    }
    out
}

/// The Hurwitz move `R_k` (1-based) or its inverse. The product is unchanged.
pub fn hurwitz_move(f: &Factorization, k: usize, dir: MoveDirection) -> Result<Factorization, VerifyError> {
    let len = f.len();
    if k == 0 || k >= len {
        return Err(VerifyError::MoveRange { k, len });
    }
    let words = move_words(&f.words(), k, dir);
    let mut out = f.clone();
    let (a, b) = (f.factors[k - 1].provenance.clone(), f.factors[k].provenance.clone());
    let (pa, pb) = match dir {
        MoveDirection::Forward => (format!("({b})^({a})^-1"), a),
        MoveDirection::Backward => (b.clone(), format!("({a})^({b})")),
    };
    out.factors[k - 1] = Factor::new(words[k - 1].clone(), pa, String::new());
    out.factors[k] = Factor::new(words[k].clone(), pb, String::new());
    Ok(out)
}

fn key(ws: &[BraidWord]) -> Vec<NormalForm> {
    ws.iter().map(NormalForm::of).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum HurwitzOutcome {
    /// Reached within the bounds by the listed moves, applied from the left.
    Equivalent { depth: usize, moves: Vec<(usize, MoveDirection)>, explored: usize },
    /// Inconclusive: the bounds ran out.
    NotFound { explored: usize },
    /// Certainly inequivalent: products or factor counts differ.
    NotEquivalent { reason: String },
}

impl HurwitzOutcome {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, HurwitzOutcome::Equivalent { .. })
    }
}

/// Breadth-first search over tuples keyed by factorwise normal forms, from
/// `f` towards `g`, up to `depth` moves and `budget` distinct tuples.
/// Neighbors are visited in the order `R_1, R_1⁻¹, R_2, …`, so the result
/// is deterministic.
pub fn hurwitz_equiv_bounded(
    f: &Factorization,
    g: &Factorization,
    depth: usize,
    budget: usize,
) -> Result<HurwitzOutcome, VerifyError> {
    if f.strands != g.strands {
        return Ok(HurwitzOutcome::NotEquivalent { reason: "strand counts differ".into() });
    }
    if f.len() != g.len() {
        return Ok(HurwitzOutcome::NotEquivalent { reason: "factor counts differ".into() });
    }
    if !f.product().equals(&g.product())? {
        return Ok(HurwitzOutcome::NotEquivalent { reason: "products differ".into() });
    }
    let target = key(&g.words());
    let start = f.words();
    // Node i: (words, parent, move, depth).
    let mut nodes: Vec<(Vec<BraidWord>, usize, Option<(usize, MoveDirection)>, usize)> = Vec::new();
    let mut seen: HashSet<Vec<NormalForm>> = HashSet::new();
    let k0 = key(&start);
    let found = |nodes: &Vec<(Vec<BraidWord>, usize, Option<(usize, MoveDirection)>, usize)>, mut i: usize| {
        let d = nodes[i].3;
        let mut moves = Vec::new();
        while let Some(m) = nodes[i].2 {
            moves.push(m);
            i = nodes[i].1;
        }
        moves.reverse();
        (d, moves)
    };
    if k0 == target {
        return Ok(HurwitzOutcome::Equivalent { depth: 0, moves: Vec::new(), explored: 1 });
    }
    seen.insert(k0);
    nodes.push((start, 0, None, 0));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let d = nodes[i].3;
        if d >= depth {
            continue;
        }
        for k in 1..f.len() {
            for dir in [MoveDirection::Forward, MoveDirection::Backward] {
                if seen.len() >= budget {
                    return Ok(HurwitzOutcome::NotFound { explored: seen.len() });
                }
                let next = move_words(&nodes[i].0, k, dir);
                let kn = key(&next);
                if seen.contains(&kn) {
                    continue;
                }
                let hit = kn == target;
                let idx = nodes.len();
                seen.insert(kn);
                nodes.push((next, i, Some((k, dir)), d + 1));
                if hit {
                    let (depth, moves) = found(&nodes, idx);
                    return Ok(HurwitzOutcome::Equivalent { depth, moves, explored: seen.len() });
                }
                queue.push_back(idx);
            }
        }
    }
    Ok(HurwitzOutcome::NotFound { explored: seen.len() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceResult {
    /// `h` commutes with every factor, so conjugation fixes the tuple.
    pub fast_path: bool,
    pub outcome: HurwitzOutcome,
}

/// Is `(t_i)_h` Hurwitz-equivalent to `(t_i)` within the bounds?
pub fn invariance_check(
    f: &Factorization,
    h: &BraidWord,
    depth: usize,
    budget: usize,
) -> Result<InvarianceResult, VerifyError> {
    let commutes = f.factors.iter().try_fold(true, |acc, t| -> Result<bool, VerifyError> {
        Ok(acc && t.word.compose(h)?.equals(&h.compose(&t.word)?)?)
    })?;
    if commutes {
        let outcome = HurwitzOutcome::Equivalent { depth: 0, moves: Vec::new(), explored: 0 };
        return Ok(InvarianceResult { fast_path: true, outcome });
    }
    let g = f.conjugated(h)?;
    Ok(InvarianceResult { fast_path: false, outcome: hurwitz_equiv_bounded(f, &g, depth, budget)? })
}

// ---------------------------------------------------------------- products

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductReport {
    pub equal: bool,
    pub degree: i64,
    pub expected_degree: i64,
    pub degree_delta: i64,
    /// Cycles of the product's permutation, 1-based.
    pub permutation: Vec<Vec<usize>>,
    pub expected_permutation: Vec<Vec<usize>>,
    /// Cycles of `π(product) · π(expected)⁻¹`; empty when they agree.
    pub permutation_delta: Vec<Vec<usize>>,
    /// Degree and permutation agree.
    pub necessary: bool,
}

fn inverse(p: &Permutation) -> Permutation {
    let img = p.images();
    let mut inv = vec![0; img.len()];
    for (i, &j) in img.iter().enumerate() {
        inv[j - 1] = i + 1;
    }
    Permutation::from_images(&inv).expect("bijection")
}

/// Compares `∏ f` with `expected`: degree and permutation first, then
/// normal forms.
pub fn product_check(f: &Factorization, expected: &BraidWord) -> Result<ProductReport, VerifyError> {
    let product = f.product();
    let (pa, pe) = (product.permutation(), expected.permutation());
    let delta = pa.then(&inverse(&pe));
    let degree = product.degree();
    let expected_degree = expected.degree();
    let necessary = degree == expected_degree && delta.is_identity();
    let equal = necessary && product.equals(expected)?;
    Ok(ProductReport {
        equal,
        degree,
        expected_degree,
        degree_delta: degree - expected_degree,
        permutation: pa.cycles(),
        expected_permutation: pe.cycles(),
        permutation_delta: delta.cycles(),
        necessary,
    })
}
