//! Words in the Artin generators of `B_n`, permutation images and the
//! Garside element.
//!
//! A letter `+i` stands for `σ_i`, the counterclockwise half-twist of the
//! punctures at positions `i` and `i+1`; `-i` stands for its inverse. Words
//! are read left to right as a sequence of motions, so a path `p` acted on by
//! `u·v` is first moved by `u` and then by `v`, and the half-twist of the
//! transported path is `(u·v)⁻¹ · H(p) · (u·v)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::BraidError;
use crate::garside::NormalForm;

/// A braid word on a fixed number of strands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn identity(strands: usize) -> Self {
        BraidWord { strands, letters: Vec::new() }
    }

    /// Builds a word, checking that every generator index lies in `[1, n-1]`.
    pub fn new(strands: usize, letters: Vec<i32>) -> Result<Self, BraidError> {
        if strands == 0 {
            return Err(BraidError::ZeroStrands);
        }
        for &l in &letters {
            let i = l.unsigned_abs() as usize;
            if l == 0 || i >= strands {
                return Err(BraidError::GeneratorOutOfRange { letter: l, strands });
            }
        }
        Ok(BraidWord { strands, letters })
    }

    /// `σ_i^e` as a word.
    pub fn generator(strands: usize, i: usize, exponent: i32) -> Result<Self, BraidError> {
        let sign = if exponent < 0 { -1 } else { 1 };
        Self::new(strands, vec![sign * i as i32; exponent.unsigned_abs() as usize])
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn check_same(&self, other: &BraidWord) -> Result<(), BraidError> {
        if self.strands != other.strands {
            return Err(BraidError::StrandMismatch { left: self.strands, right: other.strands });
        }
        Ok(())
    }

    /// Concatenation `self · other`.
    pub fn compose(&self, other: &BraidWord) -> Result<BraidWord, BraidError> {
        self.check_same(other)?;
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { strands: self.strands, letters })
    }

    /// Appends `other` in place. Panics on a strand mismatch; used internally
    /// where the counts are known to agree.
    pub(crate) fn extend(&mut self, other: &BraidWord) {
        assert_eq!(self.strands, other.strands, "strand count mismatch");
        self.letters.extend_from_slice(&other.letters);
    }

    pub fn invert(&self) -> BraidWord {
        BraidWord {
            strands: self.strands,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    /// `h⁻¹ · self · h`. Both `(x)^h` and `(x)_h` in the factorization notation
    /// resolve to this.
    pub fn conjugate(&self, h: &BraidWord) -> Result<BraidWord, BraidError> {
        self.check_same(h)?;
        let mut out = h.invert();
        out.extend(self);
        out.extend(h);
        Ok(out)
    }

    pub fn pow(&self, e: i32) -> BraidWord {
        let base = if e < 0 { self.invert() } else { self.clone() };
        let mut out = BraidWord::identity(self.strands);
        for _ in 0..e.unsigned_abs() {
            out.extend(&base);
        }
        out
    }

    /// Exponent sum.
    pub fn degree(&self) -> i64 {
        self.letters.iter().map(|l| l.signum() as i64).sum()
    }

    /// Image in `S_n` under `σ_i ↦ (i, i+1)`.
    pub fn permutation(&self) -> Permutation {
        let mut p = Permutation::identity(self.strands);
        for &l in &self.letters {
            p.swap_positions(l.unsigned_abs() as usize);
        }
        p
    }

    /// Cancels adjacent `σ_i σ_i⁻¹` pairs.
    pub fn free_reduce(&self) -> BraidWord {
        let mut out: Vec<i32> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        BraidWord { strands: self.strands, letters: out }
    }

    pub fn normal_form(&self) -> NormalForm {
        NormalForm::of(self)
    }

    /// Equality in `B_n`, decided by comparing left normal forms.
    pub fn equals(&self, other: &BraidWord) -> Result<bool, BraidError> {
        self.check_same(other)?;
        if self.degree() != other.degree() || self.permutation() != other.permutation() {
            return Ok(false);
        }
        Ok(self.normal_form() == other.normal_form())
    }

    /// Embeds into a larger group by shifting generator indices.
    pub fn embed(&self, strands: usize, offset: usize) -> Result<BraidWord, BraidError> {
        let letters = self
            .letters
            .iter()
            .map(|&l| l.signum() * (l.unsigned_abs() as i32 + offset as i32))
            .collect();
        BraidWord::new(strands, letters)
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            if *l > 0 {
                write!(f, "s{}", l)?;
            } else {
                write!(f, "s{}^-1", -l)?;
            }
        }
        Ok(())
    }
}

/// A permutation of `{1..n}`, stored as the final position of the strand
/// starting at each position (0-based internally).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
    // position -> strand currently sitting there; kept to make swaps O(1)
    at: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n).collect(), at: (0..n).collect() }
    }

    /// From a 1-based image table.
    pub fn from_images(images: &[usize]) -> Result<Self, BraidError> {
        let n = images.len();
        let mut at = vec![usize::MAX; n];
        for (s, &img) in images.iter().enumerate() {
            if img == 0 || img > n || at[img - 1] != usize::MAX {
                return Err(BraidError::NotAPermutation);
            }
            at[img - 1] = s;
        }
        Ok(Permutation { image: images.iter().map(|i| i - 1).collect(), at })
    }

    /// The transposition of `a` and `b` (1-based).
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(a - 1, b - 1);
        Permutation::from_images(&images).expect("transposition is a bijection")
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    /// Final position (1-based) of the strand starting at `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1] + 1
    }

    pub fn images(&self) -> Vec<usize> {
        self.image.iter().map(|i| i + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(k, &v)| k == v)
    }

    fn swap_positions(&mut self, i: usize) {
        let (p, q) = (i - 1, i);
        let (s, t) = (self.at[p], self.at[q]);
        self.at.swap(p, q);
        self.image[s] = q;
        self.image[t] = p;
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        let images: Vec<usize> = self.image.iter().map(|&v| other.image[v] + 1).collect();
        Permutation::from_images(&images).expect("composition of bijections")
    }

    /// Disjoint cycles of length ≥ 2, each starting from its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.size();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.image[start] == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                cyc.push(k + 1);
                k = self.image[k];
            }
            out.push(cyc);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// The Garside half-twist `Δ_n = (σ_1 ⋯ σ_{n-1})(σ_1 ⋯ σ_{n-2}) ⋯ σ_1`.
pub fn delta(n: usize) -> BraidWord {
    block_delta(n, 1, n).expect("full block is valid")
}

/// `Δ` on the consecutive positions `first..=last`, embedded in `B_n`.
pub fn block_delta(n: usize, first: usize, last: usize) -> Result<BraidWord, BraidError> {
    if first == 0 || first > last || last > n {
        return Err(BraidError::BadBlock { first, last, strands: n });
    }
    let mut letters = Vec::new();
    for top in (first..last).rev() {
        for i in first..=top {
            letters.push(i as i32);
        }
    }
    BraidWord::new(n, letters)
}

/// `Δ²⟨first, last⟩`: the full twist of a consecutive block.
pub fn full_twist(n: usize, first: usize, last: usize) -> Result<BraidWord, BraidError> {
    Ok(block_delta(n, first, last)?.pow(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, l: &[i32]) -> BraidWord {
        BraidWord::new(n, l.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(BraidWord::new(3, vec![3]).is_err());
        assert!(BraidWord::new(3, vec![0]).is_err());
        assert!(BraidWord::new(3, vec![-2, 1]).is_ok());
    }

    #[test]
    fn compose_then_inverse_is_identity() {
        let a = w(2, &[1]);
        let b = a.compose(&a.invert()).unwrap();
        assert!(b.equals(&BraidWord::identity(2)).unwrap());
    }

    #[test]
    fn three_cycle_from_two_generators() {
        // (1 2) then (2 3): strand 1 -> 2 -> 3, strand 3 -> 2, strand 2 -> 1.
        let p = w(3, &[1, 2]).permutation();
        assert_eq!(p.images(), vec![3, 1, 2]);
        assert_eq!(p.cycles(), vec![vec![1, 3, 2]]);
    }

    #[test]
    fn invert_reverses_and_flips() {
        assert_eq!(w(3, &[1, 2]).invert().letters(), &[-2, -1]);
        assert!(BraidWord::identity(4).invert().is_empty());
    }

    #[test]
    fn conjugation_keeps_degree_and_moves_transposition() {
        let c = w(3, &[1]).conjugate(&w(3, &[2])).unwrap();
        assert_eq!(c.degree(), 1);
        assert_eq!(c.permutation(), Permutation::transposition(3, 1, 3));
        assert_eq!(w(3, &[1, -2]).conjugate(&BraidWord::identity(3)).unwrap(), w(3, &[1, -2]));
    }

    #[test]
    fn strand_mismatch_is_an_error() {
        assert!(w(3, &[1]).compose(&w(4, &[1])).is_err());
        assert!(w(3, &[1]).equals(&w(4, &[1])).is_err());
    }

    #[test]
    fn delta_reverses_positions() {
        assert_eq!(delta(4).permutation().images(), vec![4, 3, 2, 1]);
        assert_eq!(delta(4).degree(), 6);
    }

    #[test]
    fn full_twist_degrees() {
        assert_eq!(full_twist(2, 1, 2).unwrap(), w(2, &[1, 1]));
        assert_eq!(full_twist(36, 1, 36).unwrap().degree(), 1260);
        for n in 2..=36 {
            assert_eq!(full_twist(n, 1, n).unwrap().degree(), (n * (n - 1)) as i64);
        }
        assert!(full_twist(5, 3, 2).is_err());
        assert!(full_twist(5, 0, 2).is_err());
    }

    #[test]
    fn full_twist_is_pure() {
        for n in 1..=8 {
            assert!(full_twist(n, 1, n).unwrap().permutation().is_identity());
        }
    }
}
