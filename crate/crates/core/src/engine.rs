//! Skeleton propagation: from a table of singular fibers to a factorization.
//!
//! Rows are ordered by increasing distance from the base fiber. Row `j`
//! emits `Δ⟨ξ_j⟩^ε` with `ξ_j = λ_j · δ_{j-1} ⋯ δ_1`, where each `δ_i` is the
//! local motion of row `i` written in its own fiber.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::BraidWord;
use crate::disk::{compile_path, rewrite_through_branch, DiskError, Fiber, PathExpr, Skeleton};
use crate::factorization::{Factor, Factorization};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("row {row}: {source}")]
    Row { row: String, source: DiskError },
    #[error("row {row}: {why}")]
    Inconsistent { row: String, why: String },
    #[error("table has branch rows {0} and {1}; only one rotated pair per table is supported")]
    MultipleBranches(String, String),
    #[error("empty table")]
    Empty,
}

/// The δ column of a table row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaSpec {
    /// `Δ⟨s⟩^power`, power 1 for a node and 2 for a tangency or complex pair.
    Twist { skeleton: PathExpr, power: i32 },
    /// Quarter rotation of the pair at positions `(m+1, m+2)`.
    Branch { m: usize },
    /// Last row: no later row is transported across it.
    Nothing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityRecord {
    /// Row label as printed, e.g. `6,6'`.
    pub label: String,
    /// One skeleton, or two for a complex-conjugate pair of nodes.
    pub skeletons: Vec<PathExpr>,
    pub epsilon: i32,
    pub delta: DeltaSpec,
}

impl SingularityRecord {
    pub fn is_complex_pair(&self) -> bool {
        self.skeletons.len() == 2
    }

    fn check(&self, last: bool) -> Result<(), EngineError> {
        let bad = |why: &str| Err(EngineError::Inconsistent { row: self.label.clone(), why: why.into() });
        if !matches!(self.epsilon, 1 | 2 | 4) {
            return bad("epsilon must be 1, 2 or 4");
        }
        if self.skeletons.is_empty() || self.skeletons.len() > 2 {
            return bad("a row has one skeleton, or two for a complex pair");
        }
        match (&self.delta, self.epsilon, self.is_complex_pair()) {
            (DeltaSpec::Nothing, _, _) if last => Ok(()),
            (DeltaSpec::Nothing, _, _) => bad("only the last row may omit its motion"),
            (DeltaSpec::Branch { .. }, 1, false) => Ok(()),
            (DeltaSpec::Branch { .. }, _, _) => bad("a branch motion needs epsilon 1"),
            (_, 1, _) => bad("epsilon 1 is a branch point and needs a branch motion"),
            (DeltaSpec::Twist { power: 1, .. }, 2, false) => Ok(()),
            (DeltaSpec::Twist { power: 2, .. }, 4, false) => Ok(()),
            (DeltaSpec::Twist { power: 2, .. }, 2, true) => Ok(()),
            _ => bad("motion power does not match epsilon"),
        }
    }
}

fn chart(expr: &PathExpr, fiber: &Fiber, branch: Option<usize>) -> Result<Skeleton, DiskError> {
    match branch {
        Some(m) => compile_path(&rewrite_through_branch(expr, fiber, m)?, fiber),
        None => compile_path(expr, fiber),
    }
}

/// Runs the table and returns one factor per skeleton, in row order.
pub fn propagate(records: &[SingularityRecord], fiber: &Fiber) -> Result<Factorization, EngineError> {
    if records.is_empty() {
        return Err(EngineError::Empty);
    }
    let n = fiber.len();
    let mut branch: Option<(usize, usize)> = None;
    for (j, r) in records.iter().enumerate() {
        r.check(j + 1 == records.len())?;
        if let DeltaSpec::Branch { m } = r.delta {
            if let Some((b, _)) = branch {
                return Err(EngineError::MultipleBranches(records[b].label.clone(), r.label.clone()));
            }
            branch = Some((j, m));
        }
    }

    let mut out = Factorization::new(n);
    // Transport from the current row's fiber to the base fiber.
    let mut transport = BraidWord::identity(n);
    for (j, r) in records.iter().enumerate() {
        let row_err = |source: DiskError| EngineError::Row { row: r.label.clone(), source };
        let rotated = branch.filter(|&(b, _)| j > b).map(|(_, m)| m + 1);
        for (k, s) in r.skeletons.iter().enumerate() {
            let xi = chart(s, fiber, rotated).and_then(|sk| sk.transported(&transport)).map_err(row_err)?;
            let word = xi.block_twist(r.epsilon).map_err(row_err)?;
            let provenance = match (r.is_complex_pair(), k) {
                (false, _) => format!("row {}", r.label),
                (true, k) => format!("row {} #{}", r.label, k + 1),
            };
            out.factors.push(Factor::new(word, provenance, String::new()));
        }
        let local = match &r.delta {
            DeltaSpec::Twist { skeleton, power } if r.is_complex_pair() => {
                // The real axis passes below only one node of the pair: the one
                // on the skeleton ending at the upper point.
                if !r.skeletons.contains(skeleton) {
                    return Err(EngineError::Inconsistent {
                        row: r.label.clone(),
                        why: "a complex-pair motion must name one of the row's skeletons".into(),
                    });
                }
                let upper = rotated.map(|p| fiber.label_at(p + 1));
                let along = r
                    .skeletons
                    .iter()
                    .find(|s| upper.is_some_and(|u| s.labels.contains(&u)))
                    .unwrap_or(skeleton);
                chart(along, fiber, rotated).and_then(|sk| sk.block_power(*power)).map_err(row_err)?
            }
            DeltaSpec::Twist { skeleton, power } => {
                chart(skeleton, fiber, rotated).and_then(|sk| sk.block_power(*power)).map_err(row_err)?
            }
            DeltaSpec::Branch { m } => {
                if *m + 2 > n {
                    return Err(row_err(DiskError::BranchPattern(*m + 1, *m + 2, "pair outside the fiber".into())));
                }
                BraidWord::identity(n)
            }
            DeltaSpec::Nothing => BraidWord::identity(n),
        };
        transport = local.compose(&transport).expect("same strands");
    }
    Ok(out)
}
