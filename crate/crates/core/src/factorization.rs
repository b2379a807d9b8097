//! Ordered products of braids with provenance.

use serde::{Deserialize, Serialize};

use crate::braid::BraidWord;
use crate::error::BraidError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub word: BraidWord,
    /// Where the factor came from, e.g. `row 6'` or `D'_5`.
    pub provenance: String,
    /// Canonical DSL text for the factor, when one is known.
    pub expr: String,
}

impl Factor {
    pub fn new(word: BraidWord, provenance: impl Into<String>, expr: impl Into<String>) -> Self {
        Factor { word, provenance: provenance.into(), expr: expr.into() }
    }

    pub fn degree(&self) -> i64 {
        self.word.degree()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub strands: usize,
    pub factors: Vec<Factor>,
}

/// First disagreement between two factorizations compared factor by factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mismatch {
    Length { left: usize, right: usize },
    Factor { index: usize, left: String, right: String },
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mismatch::Length { left, right } => write!(f, "factor counts differ: {left} vs {right}"),
            Mismatch::Factor { index, left, right } => {
                write!(f, "factor {} differs: {left} vs {right}", index + 1)
            }
        }
    }
}

impl Factorization {
    pub fn new(strands: usize) -> Self {
        Factorization { strands, factors: Vec::new() }
    }

    pub fn from_factors(strands: usize, factors: Vec<Factor>) -> Result<Self, BraidError> {
        for f in &factors {
            if f.word.strands() != strands {
                return Err(BraidError::StrandMismatch { left: strands, right: f.word.strands() });
            }
        }
        Ok(Factorization { strands, factors })
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn push(&mut self, f: Factor) -> Result<(), BraidError> {
        if f.word.strands() != self.strands {
            return Err(BraidError::StrandMismatch { left: self.strands, right: f.word.strands() });
        }
        self.factors.push(f);
        Ok(())
    }

    pub fn append(&mut self, other: Factorization) -> Result<(), BraidError> {
        if other.strands != self.strands {
            return Err(BraidError::StrandMismatch { left: self.strands, right: other.strands });
        }
        self.factors.extend(other.factors);
        Ok(())
    }

    pub fn words(&self) -> Vec<BraidWord> {
        self.factors.iter().map(|f| f.word.clone()).collect()
    }

    pub fn degree(&self) -> i64 {
        self.factors.iter().map(Factor::degree).sum()
    }

    pub fn product(&self) -> BraidWord {
        let mut letters = Vec::new();
        for f in &self.factors {
            letters.extend_from_slice(f.word.letters());
        }
        BraidWord::new(self.strands, letters).expect("factors share the strand count")
    }

    /// Conjugates every factor by `h`.
    pub fn conjugated(&self, h: &BraidWord) -> Result<Factorization, BraidError> {
        let factors = self
            .factors
            .iter()
            .map(|f| Ok(Factor { word: f.word.conjugate(h)?, ..f.clone() }))
            .collect::<Result<_, BraidError>>()?;
        Ok(Factorization { strands: self.strands, factors })
    }

    /// Factorwise braid equality; `None` when every factor agrees.
    pub fn first_mismatch(&self, other: &Factorization) -> Result<Option<Mismatch>, BraidError> {
        if self.strands != other.strands {
            return Err(BraidError::StrandMismatch { left: self.strands, right: other.strands });
        }
        if self.len() != other.len() {
            return Ok(Some(Mismatch::Length { left: self.len(), right: other.len() }));
        }
        for (i, (a, b)) in self.factors.iter().zip(&other.factors).enumerate() {
            if !a.word.equals(&b.word)? {
                let show = |f: &Factor| if f.expr.is_empty() { f.word.to_string() } else { f.expr.clone() };
                return Ok(Some(Mismatch::Factor { index: i, left: show(a), right: show(b) }));
            }
        }
        Ok(None)
    }
}
