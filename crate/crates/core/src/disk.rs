//! Paths and skeletons in the punctured disk, their half-twists, and the
//! Lefschetz motions that transport them between fibers.
//!
//! Punctures sit on the real axis at positions `1..=n`. A [`Skeleton`] is the
//! image, under a conjugating braid, of the straight chain through a
//! consecutive block of positions; a [`DiskPath`] is the two-point case.
//! Braids act on the right: transporting by `g` replaces the conjugator `c`
//! by `c·g`, and the half-twist becomes `g⁻¹·H·g`.
//!
//! Left of a branch point the two points of the pair are complex conjugate.
//! Such fibers are described in a chart obtained by rotating the vertical pair
//! a quarter turn counterclockwise onto the real axis; in that chart the
//! branch motion itself is the identity, and [`rewrite_through_branch`]
//! translates a skeleton drawn in the vertical picture into the chart.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{block_delta, BraidWord};
use crate::error::BraidError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiskError {
    #[error("unknown puncture label `{0}`")]
    UnknownLabel(String),
    #[error("malformed label `{0}`")]
    BadLabel(String),
    #[error("a path needs distinct endpoints, got `{0}` twice")]
    RepeatedLabel(String),
    #[error("skeleton labels must increase along the fiber: {0}")]
    Unordered(String),
    #[error("decoration on `{0}` does not name a puncture strictly between the endpoints")]
    DecorationOutside(String),
    #[error("detour around `{label}` is inside the span of the path{}", .hint)]
    DetourInside { label: String, hint: String },
    #[error("detour around `{label}` declared `{declared}` but the puncture lies on the other side")]
    DetourDirection { label: String, declared: String },
    #[error("exponent {0} is not one of 1, 2, 4")]
    BadExponent(i32),
    #[error("branch motion at pair ({0},{1}) cannot rewrite this skeleton: {2}")]
    BranchPattern(usize, usize, String),
    #[error(transparent)]
    Braid(#[from] BraidError),
}

/// A fiber label such as `4` or `4'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub base: u32,
    pub primed: bool,
}

impl Label {
    pub fn plain(base: u32) -> Self {
        Label { base, primed: false }
    }

    pub fn primed(base: u32) -> Self {
        Label { base, primed: true }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, if self.primed { "'" } else { "" })
    }
}

impl FromStr for Label {
    type Err = DiskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (digits, primed) = match s.strip_suffix('\'') {
            Some(d) => (d, true),
            None => (s, false),
        };
        let base: u32 = digits.parse().map_err(|_| DiskError::BadLabel(s.to_string()))?;
        if base == 0 {
            return Err(DiskError::BadLabel(s.to_string()));
        }
        Ok(Label { base, primed })
    }
}

/// The left-to-right naming of the punctures of one fiber.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fiber {
    labels: Vec<Label>,
}

impl Fiber {
    pub fn new(labels: Vec<Label>) -> Result<Self, DiskError> {
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(DiskError::RepeatedLabel(l.to_string()));
            }
        }
        Ok(Fiber { labels })
    }

    /// Labels `1..=n`.
    pub fn plain(n: usize) -> Self {
        Fiber { labels: (1..=n as u32).map(Label::plain).collect() }
    }

    /// Labels `1, 1', 2, 2', …, k, k'`: label `i` sits at `2i-1`, `i'` at `2i`.
    pub fn doubled(k: usize) -> Self {
        let mut labels = Vec::with_capacity(2 * k);
        for i in 1..=k as u32 {
            labels.push(Label::plain(i));
            labels.push(Label::primed(i));
        }
        Fiber { labels }
    }

    pub fn parse(text: &str) -> Result<Self, DiskError> {
        let labels = text.split_whitespace().map(str::parse).collect::<Result<Vec<Label>, _>>()?;
        Fiber::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// 1-based position of a label.
    pub fn position(&self, l: &Label) -> Result<usize, DiskError> {
        self.labels
            .iter()
            .position(|x| x == l)
            .map(|p| p + 1)
            .ok_or_else(|| DiskError::UnknownLabel(l.to_string()))
    }

    pub fn label_at(&self, pos: usize) -> Label {
        self.labels[pos - 1]
    }
}

impl fmt::Display for Fiber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Below,
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

/// One decoration of a path or chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decoration {
    /// Pass above every puncture in the inclusive label range.
    Over(Label, Label),
    /// Pass below every puncture in the inclusive label range.
    Under(Label, Label),
    /// Loop around a puncture outside the span before reaching the nearer endpoint.
    Detour(Label, Option<Direction>),
}

impl fmt::Display for Decoration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let range = |f: &mut fmt::Formatter<'_>, a: &Label, b: &Label| {
            if a == b {
                write!(f, "{a}")
            } else {
                write!(f, "{a}-{b}")
            }
        };
        match self {
            Decoration::Over(a, b) => {
                write!(f, "over(")?;
                range(f, a, b)?;
                write!(f, ")")
            }
            Decoration::Under(a, b) => {
                write!(f, "under(")?;
                range(f, a, b)?;
                write!(f, ")")
            }
            Decoration::Detour(k, None) => write!(f, "detour({k})"),
            Decoration::Detour(k, Some(Direction::Left)) => write!(f, "detour({k}:left)"),
            Decoration::Detour(k, Some(Direction::Right)) => write!(f, "detour({k}:right)"),
        }
    }
}

/// A path or chain written the way the factorization notation writes it:
/// endpoint labels, the side of the axis it runs on, and decorations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathExpr {
    pub labels: Vec<Label>,
    pub side: Side,
    pub decorations: Vec<Decoration>,
}

impl PathExpr {
    pub fn below(labels: Vec<Label>) -> Self {
        PathExpr { labels, side: Side::Below, decorations: Vec::new() }
    }

    pub fn above(labels: Vec<Label>) -> Self {
        PathExpr { labels, side: Side::Above, decorations: Vec::new() }
    }

    pub fn with(mut self, d: Decoration) -> Self {
        self.decorations.push(d);
        self
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(","))?;
        let mut decos: Vec<String> = Vec::new();
        if self.side == Side::Above {
            decos.push("above".into());
        }
        decos.extend(self.decorations.iter().map(|d| d.to_string()));
        if !decos.is_empty() {
            write!(f, " {{{}}}", decos.join(","))?;
        }
        Ok(())
    }
}

/// A chain through a consecutive block of positions, transported by a braid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Skeleton {
    pub first: usize,
    pub len: usize,
    pub conjugator: BraidWord,
}

/// A two-point skeleton.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiskPath {
    pub start: usize,
    pub conjugator: BraidWord,
}

impl DiskPath {
    /// The straight segment between positions `i` and `i+1`.
    pub fn segment(strands: usize, i: usize) -> Result<Self, DiskError> {
        if i == 0 || i + 1 > strands {
            return Err(BraidError::BadBlock { first: i, last: i + 1, strands }.into());
        }
        Ok(DiskPath { start: i, conjugator: BraidWord::identity(strands) })
    }

    pub fn strands(&self) -> usize {
        self.conjugator.strands()
    }

    /// Current endpoint positions, smaller first.
    pub fn endpoints(&self) -> (usize, usize) {
        let p = self.conjugator.permutation();
        let (a, b) = (p.apply(self.start), p.apply(self.start + 1));
        (a.min(b), a.max(b))
    }

    pub fn half_twist(&self) -> BraidWord {
        let s = BraidWord::generator(self.strands(), self.start, 1).expect("start in range");
        s.conjugate(&self.conjugator).expect("same strands")
    }

    pub fn as_skeleton(&self) -> Skeleton {
        Skeleton { first: self.start, len: 2, conjugator: self.conjugator.clone() }
    }

    pub fn transported(&self, g: &BraidWord) -> Result<DiskPath, DiskError> {
        Ok(DiskPath { start: self.start, conjugator: self.conjugator.compose(g)? })
    }
}

impl Skeleton {
    pub fn strands(&self) -> usize {
        self.conjugator.strands()
    }

    /// Current support positions, sorted.
    pub fn support(&self) -> Vec<usize> {
        let p = self.conjugator.permutation();
        let mut s: Vec<usize> = (self.first..self.first + self.len).map(|i| p.apply(i)).collect();
        s.sort_unstable();
        s
    }

    pub fn as_path(&self) -> Option<DiskPath> {
        (self.len == 2).then(|| DiskPath { start: self.first, conjugator: self.conjugator.clone() })
    }

    pub fn transported(&self, g: &BraidWord) -> Result<Skeleton, DiskError> {
        Ok(Skeleton { first: self.first, len: self.len, conjugator: self.conjugator.compose(g)? })
    }

    /// `Δ⟨s⟩^ε`: the half-twist of a neighborhood of the skeleton raised to
    /// `ε ∈ {1, 2, 4}`. For a two-point skeleton and `ε = 1` this is the
    /// half-twist of the path.
    pub fn block_twist(&self, exponent: i32) -> Result<BraidWord, DiskError> {
        if !matches!(exponent, 1 | 2 | 4) {
            return Err(DiskError::BadExponent(exponent));
        }
        self.block_power(exponent)
    }

    /// `Δ⟨s⟩^e` for any integer `e`; motions and inverse motions use this.
    pub fn block_power(&self, exponent: i32) -> Result<BraidWord, DiskError> {
        let n = self.strands();
        let d = block_delta(n, self.first, self.first + self.len - 1)?;
        Ok(d.pow(exponent).conjugate(&self.conjugator)?)
    }
}

/// Braid moving a straight chain on `first..first+k-1` onto the given sorted
/// positions, with every skipped puncture passed on the requested side.
fn chain_transport(n: usize, support: &[usize], side_of: impl Fn(usize) -> Side) -> BraidWord {
    let first = support[0];
    let last = *support.last().expect("nonempty");
    let k = support.len();
    let mut letters = Vec::new();
    // Skipped punctures start stacked to the right of the chain and move left
    // into place, leftmost target first.
    let skipped: Vec<usize> = (first..=last).filter(|p| !support.contains(p)).collect();
    for (t, &q) in skipped.iter().enumerate() {
        let mut at = first + k + t;
        while at > q {
            let sign = match side_of(q) {
                Side::Below => 1,
                Side::Above => -1,
            };
            letters.push(sign * (at as i32 - 1));
            at -= 1;
        }
    }
    BraidWord::new(n, letters).expect("positions in range")
}

/// Half-twist along the monotone path between two positions, passing on one side of
/// everything between.
pub fn monotone_half_twist(n: usize, a: usize, b: usize, side: Side) -> Result<BraidWord, DiskError> {
    let (a, b) = (a.min(b), a.max(b));
    if a == 0 || b > n || a == b {
        return Err(BraidError::BadBlock { first: a, last: b, strands: n }.into());
    }
    let t = chain_transport(n, &[a, b], |_| side);
    Ok(BraidWord::generator(n, a, 1)?.conjugate(&t)?)
}

/// Embeds a braid on `k` points into `B_n`, sending point `j` to
/// `positions[j - 1]` (increasing). The remaining punctures sit above the
/// small disk, so every generator becomes the half-twist below them.
pub fn embed_below(word: &BraidWord, n: usize, positions: &[usize]) -> Result<BraidWord, DiskError> {
    if positions.len() != word.strands() || positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DiskError::Unordered(format!("{positions:?}")));
    }
    let mut letters = Vec::new();
    for &l in word.letters() {
        let j = l.unsigned_abs() as usize;
        let h = monotone_half_twist(n, positions[j - 1], positions[j], Side::Below)?;
        letters.extend(if l > 0 { h } else { h.invert() }.letters().iter().copied());
    }
    Ok(BraidWord::new(n, letters)?)
}

/// Resolves a [`PathExpr`] in `fiber` to a concrete skeleton.
pub fn compile_path(expr: &PathExpr, fiber: &Fiber) -> Result<Skeleton, DiskError> {
    let n = fiber.len();
    if expr.labels.len() < 2 {
        return Err(DiskError::Unordered(expr.to_string()));
    }
    let mut support = Vec::with_capacity(expr.labels.len());
    for l in &expr.labels {
        let p = fiber.position(l)?;
        if support.contains(&p) {
            return Err(DiskError::RepeatedLabel(l.to_string()));
        }
        support.push(p);
    }
    if support.windows(2).any(|w| w[0] > w[1]) {
        return Err(DiskError::Unordered(expr.to_string()));
    }
    let (lo, hi) = (support[0], *support.last().expect("nonempty"));

    let mut sides: Vec<Option<Side>> = vec![None; n + 1];
    let mut detours: Vec<(usize, Direction)> = Vec::new();
    for d in &expr.decorations {
        match d {
            Decoration::Over(a, b) | Decoration::Under(a, b) => {
                let (pa, pb) = (fiber.position(a)?, fiber.position(b)?);
                let side = if matches!(d, Decoration::Over(..)) { Side::Above } else { Side::Below };
                for p in pa.min(pb)..=pa.max(pb) {
                    if p <= lo || p >= hi || support.contains(&p) {
                        return Err(DiskError::DecorationOutside(fiber.label_at(p).to_string()));
                    }
                    sides[p] = Some(side);
                }
            }
            Decoration::Detour(k, dir) => {
                let pk = fiber.position(k)?;
                let actual = if pk < lo {
                    Direction::Left
                } else if pk > hi {
                    Direction::Right
                } else {
                    let hint = match dir {
                        Some(Direction::Left) => " (declared left)",
                        Some(Direction::Right) => " (declared right)",
                        None => "",
                    };
                    return Err(DiskError::DetourInside { label: k.to_string(), hint: hint.into() });
                };
                if let Some(declared) = dir {
                    if *declared != actual {
                        let declared = if *declared == Direction::Left { "left" } else { "right" };
                        return Err(DiskError::DetourDirection { label: k.to_string(), declared: declared.into() });
                    }
                }
                detours.push((pk, actual));
            }
        }
    }

    let mut conj = chain_transport(n, &support, |q| sides[q].unwrap_or(expr.side));
    // Right-hand loops before left-hand ones, each side from right to left.
    // Loops around both points of a pair then cable a single loop.
    detours.sort_by_key(|&(pk, dir)| (dir == Direction::Left, std::cmp::Reverse(pk)));
    for (pk, dir) in detours {
        let end = if dir == Direction::Left { lo } else { hi };
        let loop_twist = monotone_half_twist(n, end, pk, Side::Below)?.pow(2);
        conj.extend(&loop_twist);
    }
    Ok(Skeleton { first: lo, len: support.len(), conjugator: conj })
}

/// Rewrites a skeleton drawn in the fiber left of a branch point, where the
/// pair at positions `(m+1, m+2)` is vertical (the first label of the pair is
/// the lower point), into the rotated chart used for computation.
///
/// Six configurations are recognized: a path ending at the lower point or at
/// the upper point, approached from either side; the segment joining the pair;
/// and a chain crossing the pair's real part between the two points.
/// Skeletons that stay away from the pair are returned unchanged.
pub fn rewrite_through_branch(expr: &PathExpr, fiber: &Fiber, pair_left: usize) -> Result<PathExpr, DiskError> {
    let (lower_pos, upper_pos) = (pair_left, pair_left + 1);
    let lower = fiber.label_at(lower_pos);
    let upper = fiber.label_at(upper_pos);
    let fail = |why: &str| DiskError::BranchPattern(lower_pos, upper_pos, format!("{expr}: {why}"));

    let touches_lower = expr.labels.contains(&lower);
    let touches_upper = expr.labels.contains(&upper);
    let positions: Vec<usize> = expr.labels.iter().map(|l| fiber.position(l)).collect::<Result<_, _>>()?;
    let (lo, hi) = (positions[0], *positions.last().expect("nonempty"));

    let mentions_pair = expr.decorations.iter().any(|d| match d {
        Decoration::Over(a, b) | Decoration::Under(a, b) => [*a, *b].iter().any(|x| *x == lower || *x == upper),
        Decoration::Detour(k, _) => *k == lower || *k == upper,
    });

    if touches_lower && touches_upper {
        if expr.labels.len() == 2 && expr.decorations.is_empty() {
            // The vertical segment rotates onto the real segment.
            return Ok(PathExpr::below(vec![lower, upper]));
        }
        return Err(fail("pair joined inside a longer chain"));
    }
    if touches_lower || touches_upper {
        if expr.labels.len() != 2 {
            return Err(fail("pair point inside a chain"));
        }
        if mentions_pair {
            return Err(fail("decoration on the rotated pair"));
        }
        let other = if expr.labels[0] == lower || expr.labels[0] == upper { expr.labels[1] } else { expr.labels[0] };
        let other_pos = fiber.position(&other)?;
        let (end, side) = if touches_lower { (upper, Side::Below) } else { (lower, Side::Above) };
        let mut labels = vec![other, end];
        if other_pos > upper_pos {
            labels.reverse();
        }
        let mut out = PathExpr { labels, side, decorations: Vec::new() };
        // Decorations on other intermediates keep their meaning.
        out.decorations.extend(expr.decorations.iter().cloned());
        if other_pos > lower_pos && other_pos < upper_pos {
            return Err(fail("endpoint between the pair"));
        }
        return Ok(out);
    }
    if lo < lower_pos && hi > upper_pos {
        let mut out = expr.clone();
        if !mentions_pair {
            // The real axis passes between the two points.
            out.decorations.push(Decoration::Under(lower, lower));
            out.decorations.push(Decoration::Over(upper, upper));
        }
        return Ok(out);
    }
    Ok(expr.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MotionKind {
    Node,
    Tangent,
    Branch,
    ComplexPair,
}

/// A Lefschetz motion `δ_x`: the braid induced by passing below a singular fiber.
///
/// Node and tangent motions are `Δ⟨λ⟩` and `Δ²⟨λ⟩`; a complex pair moves by
/// the full twist along its first skeleton. A branch motion rotates its pair
/// a quarter turn; in the rotated chart its braid is trivial and its effect is
/// carried by [`rewrite_through_branch`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Motion {
    pub kind: MotionKind,
    pub braid: BraidWord,
    /// For branch motions, the left position of the rotated pair.
    pub pair: Option<usize>,
    pub inverse: bool,
}

impl Motion {
    pub fn node(s: &Skeleton) -> Result<Motion, DiskError> {
        Ok(Motion { kind: MotionKind::Node, braid: s.block_power(1)?, pair: None, inverse: false })
    }

    pub fn tangent(s: &Skeleton) -> Result<Motion, DiskError> {
        Ok(Motion { kind: MotionKind::Tangent, braid: s.block_power(2)?, pair: None, inverse: false })
    }

    pub fn complex_pair(first: &Skeleton) -> Result<Motion, DiskError> {
        Ok(Motion { kind: MotionKind::ComplexPair, braid: first.block_power(2)?, pair: None, inverse: false })
    }

    pub fn branch(strands: usize, pair_left: usize) -> Motion {
        Motion { kind: MotionKind::Branch, braid: BraidWord::identity(strands), pair: Some(pair_left), inverse: false }
    }

    pub fn inverse(&self) -> Motion {
        Motion { kind: self.kind, braid: self.braid.invert(), pair: self.pair, inverse: !self.inverse }
    }

    /// Transports a skeleton across this motion.
    pub fn act(&self, s: &Skeleton) -> Result<Skeleton, DiskError> {
        s.transported(&self.braid)
    }

    pub fn act_path(&self, p: &DiskPath) -> Result<DiskPath, DiskError> {
        p.transported(&self.braid)
    }

    /// Transports a not-yet-compiled skeleton. Branch motions rewrite the
    /// expression into the rotated chart; other kinds compile and transport.
    pub fn act_expr(&self, e: &PathExpr, fiber: &Fiber) -> Result<Skeleton, DiskError> {
        match (self.kind, self.pair) {
            (MotionKind::Branch, Some(m)) if !self.inverse => {
                let rewritten = rewrite_through_branch(e, fiber, m)?;
                compile_path(&rewritten, fiber)
            }
            _ => self.act(&compile_path(e, fiber)?),
        }
    }
}

/// The two degree-2 factors of a conic–line pair of complex conjugate nodes,
/// in table order (row `j`, then row `j′`), transported to the base fiber.
pub fn complex_pair_factors(
    first: &Skeleton,
    second: &Skeleton,
    transport: &BraidWord,
) -> Result<(BraidWord, BraidWord), DiskError> {
    if first.len != 2 || second.len != 2 {
        return Err(DiskError::BranchPattern(0, 0, "complex pair rows need two-point skeletons".into()));
    }
    let a = first.transported(transport)?.block_twist(2)?;
    let b = second.transported(transport)?.block_twist(2)?;
    Ok((a, b))
}
