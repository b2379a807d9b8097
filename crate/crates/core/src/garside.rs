//! Left-greedy Garside normal form `Δ^p · A_1 ⋯ A_k`.
//!
//! Simple elements are stored as permutations: entry `j` is the final
//! position of the strand starting at position `j` (0-based). Factors are
//! never `1` or `Δ`, and each adjacent pair is left-weighted.

use crate::braid::BraidWord;

type Simple = Vec<u8>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalForm {
    strands: usize,
    delta_power: i64,
    factors: Vec<Simple>,
}

fn delta_simple(n: usize) -> Simple {
    (0..n).map(|j| (n - 1 - j) as u8).collect()
}

fn is_identity(s: &Simple) -> bool {
    s.iter().enumerate().all(|(j, &v)| j == v as usize)
}

fn inverse(s: &Simple) -> Simple {
    let mut inv = vec![0u8; s.len()];
    for (j, &v) in s.iter().enumerate() {
        inv[v as usize] = j as u8;
    }
    inv
}

/// Conjugation by `Δ`: `σ_i ↦ σ_{n-i}`.
fn tau(s: &Simple) -> Simple {
    let n = s.len();
    (0..n).map(|j| (n - 1 - s[n - 1 - j] as usize) as u8).collect()
}

/// Makes `(a, b)` left-weighted in place. Returns whether anything moved.
fn left_weight(a: &mut Simple, b: &mut Simple) -> bool {
    let n = a.len();
    let mut moved = false;
    loop {
        let inv_a = inverse(a);
        let pick = (0..n - 1).find(|&i| b[i] > b[i + 1] && inv_a[i] < inv_a[i + 1]);
        let Some(i) = pick else { break };
        // a ← a·σ_{i+1}: swap the values i, i+1 in the image table.
        for v in a.iter_mut() {
            if *v as usize == i {
                *v = (i + 1) as u8;
            } else if *v as usize == i + 1 {
                *v = i as u8;
            }
        }
        // b ← σ_{i+1}⁻¹·b
        b.swap(i, i + 1);
        moved = true;
    }
    moved
}

impl NormalForm {
    pub fn identity(strands: usize) -> Self {
        NormalForm { strands, delta_power: 0, factors: Vec::new() }
    }

    pub fn of(word: &BraidWord) -> Self {
        let n = word.strands();
        let mut nf = NormalForm::identity(n);
        if n < 2 {
            return nf;
        }
        for &l in word.letters() {
            let i = l.unsigned_abs() as usize - 1;
            if l > 0 {
                let mut s: Simple = (0..n as u8).collect();
                s.swap(i, i + 1);
                nf.push_simple(s);
            } else {
                // σ_i⁻¹ = Δ⁻¹ · (Δσ_i⁻¹), and N·Δ⁻¹ = Δ⁻¹·τ(N).
                nf.delta_power -= 1;
                for f in nf.factors.iter_mut() {
                    *f = tau(f);
                }
                let mut x = delta_simple(n);
                for v in x.iter_mut() {
                    if *v as usize == i {
                        *v = (i + 1) as u8;
                    } else if *v as usize == i + 1 {
                        *v = i as u8;
                    }
                }
                nf.push_simple(x);
            }
        }
        nf
    }

    fn push_simple(&mut self, s: Simple) {
        if is_identity(&s) {
            return;
        }
        let delta = delta_simple(self.strands);
        if s == delta {
            self.delta_power += 1;
            for f in self.factors.iter_mut() {
                *f = tau(f);
            }
            return;
        }
        self.factors.push(s);
        loop {
            let mut changed = false;
            for j in (0..self.factors.len() - 1).rev() {
                let (left, right) = self.factors.split_at_mut(j + 1);
                changed |= left_weight(&mut left[j], &mut right[0]);
            }
            self.factors.retain(|f| !is_identity(f));
            while self.factors.first() == Some(&delta) {
                self.factors.remove(0);
                self.delta_power += 1;
            }
            if !changed || self.factors.len() < 2 {
                break;
            }
        }
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn delta_power(&self) -> i64 {
        self.delta_power
    }

    /// Canonical length (number of non-`Δ` simple factors).
    pub fn canonical_length(&self) -> usize {
        self.factors.len()
    }

    /// A positive word for each canonical factor.
    pub fn factor_words(&self) -> Vec<BraidWord> {
        self.factors.iter().map(|f| simple_to_word(f)).collect()
    }

    /// A word representing this normal form.
    pub fn to_word(&self) -> BraidWord {
        let n = self.strands;
        let d = BraidWord::new(n, simple_to_word(&delta_simple(n)).letters().to_vec())
            .expect("delta is valid");
        let mut w = d.pow(self.delta_power as i32);
        for f in &self.factors {
            w.extend(&simple_to_word(f));
        }
        w
    }
}

fn simple_to_word(s: &Simple) -> BraidWord {
    let n = s.len();
    let mut b = s.clone();
    let mut letters = Vec::new();
    while let Some(i) = (0..n - 1).find(|&i| b[i] > b[i + 1]) {
        letters.push(i as i32 + 1);
        b.swap(i, i + 1);
    }
    BraidWord::new(n, letters).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::{delta, full_twist};

    fn w(n: usize, l: &[i32]) -> BraidWord {
        BraidWord::new(n, l.to_vec()).unwrap()
    }

    #[test]
    fn braid_relation() {
        assert_eq!(NormalForm::of(&w(3, &[1, 2, 1])), NormalForm::of(&w(3, &[2, 1, 2])));
        assert_eq!(NormalForm::of(&w(4, &[1, 3])), NormalForm::of(&w(4, &[3, 1])));
        assert_ne!(NormalForm::of(&w(3, &[1])), NormalForm::of(&w(3, &[2])));
    }

    #[test]
    fn delta_is_absorbed() {
        let nf = NormalForm::of(&delta(5));
        assert_eq!(nf.delta_power(), 1);
        assert_eq!(nf.canonical_length(), 0);
        let nf = NormalForm::of(&full_twist(5, 1, 5).unwrap());
        assert_eq!(nf.delta_power(), 2);
    }

    #[test]
    fn inverse_cancels() {
        let x = w(4, &[1, -2, 3, 3, -1, 2]);
        let y = x.compose(&x.invert()).unwrap();
        assert_eq!(NormalForm::of(&y), NormalForm::identity(4));
    }

    #[test]
    fn to_word_round_trips() {
        let x = w(5, &[1, -2, 3, 4, -1, 2, -4, -4, 3]);
        let nf = NormalForm::of(&x);
        assert_eq!(NormalForm::of(&nf.to_word()), nf);
    }

    #[test]
    fn left_weighted_pairs() {
        // σ1 σ2 σ2 σ1: two factors σ1σ2 | σ2σ1.
        let nf = NormalForm::of(&w(3, &[1, 2, 2, 1]));
        assert_eq!(nf.delta_power(), 0);
        assert_eq!(nf.canonical_length(), 2);
    }
}
