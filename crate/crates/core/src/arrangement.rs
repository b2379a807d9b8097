//! Line arrangements of a degenerated surface: line order, vertex data,
//! parasitic intersection braids and the degenerated factorization.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disk::{Decoration, Fiber, Label, PathExpr, Side};
use crate::engine::{DeltaSpec, SingularityRecord};
use crate::factorization::Factorization;
use crate::notation::{elaborate, Expr, Item, NotationError};

#[derive(Debug, Error)]
pub enum ArrangementError {
    #[error("line ({0}, {1}) must join two distinct vertices with the smaller first")]
    BadLine(u32, u32),
    #[error("line ({0}, {1}) uses an unknown vertex")]
    UnknownVertex(u32, u32),
    #[error("line ({0}, {1}) appears twice")]
    DuplicateLine(u32, u32),
    #[error("vertex {0} lies on no line")]
    IsolatedVertex(u32),
    #[error("vertex {0} is listed twice")]
    DuplicateVertex(u32),
    #[error("no local factorization for vertex {0}")]
    MissingLocal(u32),
    #[error("local factorization for vertex {vertex} has {got} strands, expected {expected}")]
    LocalStrands { vertex: u32, got: usize, expected: usize },
    #[error("lines {0} and {1} meet at the same x as another pair")]
    Degenerate(usize, usize),
    #[error(transparent)]
    Notation(#[from] NotationError),
}

/// Input form: vertex ids and lines as `[α, β]` vertex pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrangementSpec {
    pub vertices: Vec<u32>,
    pub lines: Vec<[u32; 2]>,
}

/// Lines sorted so that `L < L'` iff `β < β'`, or `β = β'` and `α < α'`.
/// Line `t` (1-based) is strand `t` of the fiber.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrangement {
    vertices: Vec<u32>,
    lines: Vec<(u32, u32)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    /// One line: two planes meet along it.
    TwoPoint,
    /// Two lines: three planes on a boundary vertex.
    ThreePoint,
    /// `m ≥ 3` lines around an interior vertex of `m` planes.
    Interior(usize),
}

impl VertexKind {
    /// Number of planes meeting at the vertex.
    pub fn planes(self) -> usize {
        match self {
            VertexKind::TwoPoint => 2,
            VertexKind::ThreePoint => 3,
            VertexKind::Interior(m) => m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexData {
    pub vertex: u32,
    /// 1-based line numbers, increasing.
    pub lines: Vec<usize>,
    pub kind: VertexKind,
}

/// `D_t`: the parasitic braids of line `t` against earlier disjoint lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParasiticBraid {
    pub line: usize,
    pub items: Vec<Item>,
}

impl Arrangement {
    pub fn new(vertices: Vec<u32>, lines: Vec<(u32, u32)>) -> Result<Self, ArrangementError> {
        let mut seen = BTreeSet::new();
        for &v in &vertices {
            if !seen.insert(v) {
                return Err(ArrangementError::DuplicateVertex(v));
            }
        }
        let mut uniq = BTreeSet::new();
        for &(a, b) in &lines {
            if a >= b {
                return Err(ArrangementError::BadLine(a, b));
            }
            if !seen.contains(&a) || !seen.contains(&b) {
                return Err(ArrangementError::UnknownVertex(a, b));
            }
            if !uniq.insert((a, b)) {
                return Err(ArrangementError::DuplicateLine(a, b));
            }
        }
        let mut vertices = vertices;
        vertices.sort_unstable();
        for &v in &vertices {
            if !lines.iter().any(|&(a, b)| a == v || b == v) {
                return Err(ArrangementError::IsolatedVertex(v));
            }
        }
        let mut lines = lines;
        lines.sort_by_key(|&(a, b)| (b, a));
        Ok(Arrangement { vertices, lines })
    }

    pub fn from_spec(spec: &ArrangementSpec) -> Result<Self, ArrangementError> {
        Arrangement::new(spec.vertices.clone(), spec.lines.iter().map(|l| (l[0], l[1])).collect())
    }

    pub fn spec(&self) -> ArrangementSpec {
        ArrangementSpec { vertices: self.vertices.clone(), lines: self.lines.iter().map(|&(a, b)| [a, b]).collect() }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    /// Lines in order; entry `t - 1` is line `t`.
    pub fn lines(&self) -> &[(u32, u32)] {
        &self.lines
    }

    pub fn fiber(&self) -> Fiber {
        Fiber::plain(self.lines.len())
    }

    fn line(&self, t: usize) -> (u32, u32) {
        self.lines[t - 1]
    }

    fn disjoint(&self, p: usize, t: usize) -> bool {
        let (a, b) = self.line(p);
        let (c, d) = self.line(t);
        a != c && a != d && b != c && b != d
    }

    /// Lines through `v`, increasing.
    pub fn lines_through(&self, v: u32) -> Vec<usize> {
        (1..=self.lines.len()).filter(|&t| self.line(t).0 == v || self.line(t).1 == v).collect()
    }

    /// Every pair `p < t` of lines with no common vertex.
    pub fn parasitic_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.lines.len();
        (1..=n).flat_map(|t| (1..t).map(move |p| (p, t))).filter(|&(p, t)| self.disjoint(p, t)).collect()
    }

    /// `D_t` for every line. Each factor is a full twist above the axis
    /// that passes below every line strictly between `p` and `t` sharing
    /// the right vertex of `L_t`.
    pub fn parasitic_braids(&self) -> Vec<ParasiticBraid> {
        let n = self.lines.len();
        (1..=n)
            .map(|t| {
                let beta = self.line(t).1;
                let items = (1..t)
                    .filter(|&p| self.disjoint(p, t))
                    .map(|p| {
                        let decos = (p + 1..t)
                            .filter(|&k| self.line(k).1 == beta)
                            .map(|k| Decoration::Under(label(k), label(k)))
                            .collect();
                        Item::path(Side::Above, 2, vec![label(p), label(t)], decos)
                    })
                    .collect();
                ParasiticBraid { line: t, items }
            })
            .collect()
    }

    /// `C̃_j`: the product of `D_t` over lines whose smaller vertex is `v`.
    pub fn parasitic_for_vertex(&self, v: u32) -> Vec<Item> {
        let ds = self.parasitic_braids();
        (1..=self.lines.len()).filter(|&t| self.line(t).0 == v).flat_map(|t| ds[t - 1].items.clone()).collect()
    }

    /// Incident lines and kind of every vertex, in vertex order.
    pub fn singularities(&self) -> Vec<VertexData> {
        self.vertices
            .iter()
            .map(|&v| {
                let lines = self.lines_through(v);
                let kind = match lines.len() {
                    1 => VertexKind::TwoPoint,
                    2 => VertexKind::ThreePoint,
                    m => VertexKind::Interior(m),
                };
                VertexData { vertex: v, lines, kind }
            })
            .collect()
    }

    /// The full twist on the lines through `v`, as one chain below the axis.
    /// Empty for a vertex on a single line.
    pub fn local_twist(&self, v: u32) -> Vec<Item> {
        let lines = self.lines_through(v);
        if lines.len() < 2 {
            return Vec::new();
        }
        let labels = lines.into_iter().map(label).collect();
        vec![Item::new(Expr::Block { power: 2, side: Side::Below, labels, decos: Vec::new() })]
    }

    /// Local factorizations from [`Arrangement::local_twist`] for every vertex.
    pub fn default_locals(&self) -> Result<BTreeMap<u32, Factorization>, ArrangementError> {
        let fiber = self.fiber();
        self.vertices.iter().map(|&v| Ok((v, elaborate(&self.local_twist(v), &fiber)?))).collect()
    }

    /// `∏_v C̃_v · Δ̃²_v` in vertex order. Every vertex on two or more lines
    /// needs a local factorization; single-line vertices may be omitted.
    pub fn degenerate_bmf(&self, local: &BTreeMap<u32, Factorization>) -> Result<Factorization, ArrangementError> {
        let fiber = self.fiber();
        let n = fiber.len();
        let mut out = Factorization::new(n);
        for &v in &self.vertices {
            for mut f in elaborate(&self.parasitic_for_vertex(v), &fiber)?.factors {
                f.provenance = format!("C{v}: {}", f.provenance);
                out.factors.push(f);
            }
            match local.get(&v) {
                Some(l) if l.strands != n => {
                    return Err(ArrangementError::LocalStrands { vertex: v, got: l.strands, expected: n })
                }
                Some(l) => {
                    for f in &l.factors {
                        let mut f = f.clone();
                        f.provenance = format!("v{v}: {}", f.provenance);
                        out.factors.push(f);
                    }
                }
                None if self.lines_through(v).len() >= 2 => return Err(ArrangementError::MissingLocal(v)),
                None => {}
            }
        }
        Ok(out)
    }
}

fn label(t: usize) -> Label {
    Label::plain(t as u32)
}

/// Node table of `n` real lines `y = -i·x + i³` in general position.
///
/// At the base fiber (far left) line `i` is the `i`-th point from below.
/// Lines `i < j` meet at `x = i² + ij + j²`; nodes are taken in increasing
/// `x`, and the two lines of each node are adjacent there. Returns the fiber,
/// the rows, and the pair of lines meeting at each row.
pub fn generic_lines(n: usize) -> Result<(Fiber, Vec<SingularityRecord>, Vec<(usize, usize)>), ArrangementError> {
    let mut nodes: Vec<(i64, usize, usize)> = Vec::new();
    for j in 1..=n {
        for i in 1..j {
            let (a, b) = (i as i64, j as i64);
            nodes.push((a * a + a * b + b * b, i, j));
        }
    }
    nodes.sort_unstable();
    if let Some(w) = nodes.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(ArrangementError::Degenerate(w[1].1, w[1].2));
    }
    // order[k] is the line at position k + 1.
    let mut order: Vec<usize> = (1..=n).collect();
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for (r, &(_, i, j)) in nodes.iter().enumerate() {
        let pi = order.iter().position(|&l| l == i).expect("line present");
        let pj = order.iter().position(|&l| l == j).expect("line present");
        let lo = pi.min(pj);
        debug_assert_eq!(pi.abs_diff(pj), 1, "lines meeting at a node are adjacent");
        order.swap(pi, pj);
        let skeleton = PathExpr::below(vec![label(lo + 1), label(lo + 2)]);
        let delta = if r + 1 == nodes.len() {
            DeltaSpec::Nothing
        } else {
            DeltaSpec::Twist { skeleton: skeleton.clone(), power: 1 }
        };
        rows.push(SingularityRecord { label: (r + 1).to_string(), skeletons: vec![skeleton], epsilon: 2, delta });
        pairs.push((i, j));
    }
    Ok((Fiber::plain(n), rows, pairs))
}
