//! Regeneration: doubling lines into pairs of parallel lines or conics and
//! rewriting a factorization factor by factor.
//!
//! Rewriting happens on expressions, not words, so every stage stays
//! readable. The doubling map also cables braid words, which gives an
//! independent geometric check of the rewritten factors.

use thiserror::Error;

use crate::braid::BraidWord;
use crate::disk::{Decoration, DiskError, Fiber, Label, PathExpr, Side};
use crate::engine::{DeltaSpec, SingularityRecord};
use crate::error::BraidError;
use crate::factorization::Factorization;
use crate::notation::{elaborate, parse_items, render_items, Expr, Item, MacroKind, NotationError, Op, Table};

#[derive(Debug, Error)]
pub enum RegenError {
    #[error("cannot double `{0}`: only unprimed labels without a partner can be doubled")]
    NotDoublable(Label),
    #[error("`{item}` does not fit {rule:?}: {why}")]
    RuleMismatch { item: String, rule: RegenRule, why: String },
    #[error("substitution `{0}` matched nothing")]
    Unused(String),
    #[error("conjugator `{0}` moves a doubled point onto a single one")]
    ForeignConjugator(String),
    #[error("k-point stage {stage} is out of range for k = {k}")]
    Stage { k: usize, stage: usize },
    #[error(transparent)]
    Notation(#[from] NotationError),
    #[error(transparent)]
    Disk(#[from] DiskError),
    #[error(transparent)]
    Braid(#[from] BraidError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// A branch point `Z` of degree 1 becomes two of degree 1.
    Branch,
    /// A node `Z²` becomes two or four squares.
    Node,
    /// A tangency `Z⁴` becomes the three cubes of `Z3p`.
    Tangent,
}

/// Which endpoints of a node are doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeVariant {
    First,
    Second,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegenRule {
    pub kind: RuleKind,
    pub variant: Option<NodeVariant>,
}

impl RegenRule {
    pub const BRANCH: RegenRule = RegenRule { kind: RuleKind::Branch, variant: None };
    pub const NODE: RegenRule = RegenRule { kind: RuleKind::Node, variant: None };
    pub const TANGENT: RegenRule = RegenRule { kind: RuleKind::Tangent, variant: None };

    pub fn source_degree(&self) -> i32 {
        match self.kind {
            RuleKind::Branch => 1,
            RuleKind::Node => 2,
            RuleKind::Tangent => 4,
        }
    }

    pub fn target_degree(&self) -> i64 {
        match (self.kind, self.variant) {
            (RuleKind::Branch, _) => 2,
            (RuleKind::Node, Some(NodeVariant::Both)) => 8,
            (RuleKind::Node, _) => 4,
            (RuleKind::Tangent, _) => 9,
        }
    }
}

/// Order-preserving embedding of a fiber into the fiber where some points
/// are replaced by adjacent pairs `i, i'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoublingMap {
    source: Fiber,
    target: Fiber,
    doubled: Vec<Label>,
}

impl DoublingMap {
    pub fn new(source: &Fiber, bases: &[u32]) -> Result<Self, RegenError> {
        let mut doubled = Vec::new();
        for &b in bases {
            let l = Label::plain(b);
            if source.position(&l).is_err() || source.position(&Label::primed(b)).is_ok() {
                return Err(RegenError::NotDoublable(l));
            }
            doubled.push(l);
        }
        let mut labels = Vec::new();
        for l in source.labels() {
            labels.push(*l);
            if doubled.contains(l) {
                labels.push(Label::primed(l.base));
            }
        }
        Ok(DoublingMap { source: source.clone(), target: Fiber::new(labels)?, doubled })
    }

    pub fn source(&self) -> &Fiber {
        &self.source
    }

    pub fn target(&self) -> &Fiber {
        &self.target
    }

    pub fn is_doubled(&self, l: &Label) -> bool {
        self.doubled.contains(l)
    }

    /// Rightmost target point over a source point.
    fn last(&self, l: Label) -> Label {
        if self.is_doubled(&l) {
            Label::primed(l.base)
        } else {
            l
        }
    }

    /// Number of target points over each source position.
    pub fn sizes(&self) -> Vec<usize> {
        self.source.labels().iter().map(|l| if self.is_doubled(l) { 2 } else { 1 }).collect()
    }

    /// A range covers both points of a pair; a detour around a doubled
    /// point goes around both points.
    pub fn map_decoration(&self, d: &Decoration) -> Vec<Decoration> {
        match d {
            Decoration::Over(a, b) => vec![Decoration::Over(*a, self.last(*b))],
            Decoration::Under(a, b) => vec![Decoration::Under(*a, self.last(*b))],
            Decoration::Detour(k, dir) if self.is_doubled(k) => {
                vec![Decoration::Detour(*k, *dir), Decoration::Detour(Label::primed(k.base), *dir)]
            }
            Decoration::Detour(..) => vec![d.clone()],
        }
    }

    fn map_decos(&self, decos: &[Decoration]) -> Vec<Decoration> {
        decos.iter().flat_map(|d| self.map_decoration(d)).collect()
    }

    /// Point counts over each source position after `w`.
    fn end_sizes(&self, w: &BraidWord) -> Vec<usize> {
        let mut sizes = self.sizes();
        for &l in w.letters() {
            let i = l.unsigned_abs() as usize;
            sizes.swap(i - 1, i);
        }
        sizes
    }

    /// Does some conjugator carry a doubled point onto a single one? Then
    /// cabling the conjugator alone is not a homomorphism, and only the
    /// whole conjugated factor has a cable.
    fn has_foreign_conjugator(&self, ops: &[Op]) -> Result<bool, RegenError> {
        for op in ops {
            if let Op::Conj(items) = op {
                let h = elaborate(items, &self.source)?.product();
                if self.end_sizes(&h) != self.sizes() {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// The cable of every factor of `item`, as raw words.
    fn cable_item(&self, item: &Item) -> Result<Item, RegenError> {
        let f = elaborate(std::slice::from_ref(item), &self.source)?;
        let mut words = Vec::new();
        for t in &f.factors {
            if self.end_sizes(&t.word) != self.sizes() {
                return Err(RegenError::ForeignConjugator(item.to_string()));
            }
            words.push(Item::new(Expr::Word(self.cable(&t.word)?.letters().to_vec())));
        }
        Ok(if words.len() == 1 { words.remove(0) } else { Item::new(Expr::Group(words)) })
    }

    /// The node rule on a conjugated twist `X^h` whose conjugator moves a
    /// doubled point onto a single one. With `W` the cable of `h⁻¹` from
    /// the doubled configuration, the cable of `h⁻¹Xh` is `W·X̂·W⁻¹`, where
    /// `X̂` is the node rule applied to `X` in the configuration `W` ends
    /// in. That configuration is named by positions.
    fn node_under_foreign(&self, item: &Item) -> Result<Vec<Item>, RegenError> {
        let mut conj = Vec::new();
        for op in &item.ops {
            match op {
                Op::Conj(items) => conj.extend(items.iter().cloned()),
                Op::Power(_) => return Err(RegenError::ForeignConjugator(item.to_string())),
            }
        }
        let h = elaborate(&conj, &self.source)?.product();
        let w = self.cable(&h.invert())?;
        let mid_sizes = self.end_sizes(&h.invert());
        let n = self.source.len();
        let doubled: Vec<u32> = (1..=n as u32).filter(|&p| mid_sizes[p as usize - 1] == 2).collect();
        let mid = DoublingMap::new(&Fiber::plain(n), &doubled)?;
        let at = |l: &Label| -> Result<Label, RegenError> { Ok(Label::plain(self.source.position(l)? as u32)) };
        let Expr::Path { side, power, labels, decos } = core(&item.expr) else {
            return Err(RegenError::ForeignConjugator(item.to_string()));
        };
        let labels = labels.iter().map(at).collect::<Result<Vec<_>, _>>()?;
        let decos = decos
            .iter()
            .map(|d| {
                Ok(match d {
                    Decoration::Over(a, b) => Decoration::Over(at(a)?, at(b)?),
                    Decoration::Under(a, b) => Decoration::Under(at(a)?, at(b)?),
                    Decoration::Detour(k, dir) => Decoration::Detour(at(k)?, *dir),
                })
            })
            .collect::<Result<Vec<_>, RegenError>>()?;
        let parts = apply_rule(&path(*side, *power, labels, decos), RegenRule::NODE, &mid)?;
        let back = Op::Conj(vec![Item::new(Expr::Word(w.invert().letters().to_vec()))]);
        let f = elaborate(&parts, mid.target())?;
        Ok(f.factors
            .into_iter()
            .map(|t| Item::new(Expr::Word(t.word.letters().to_vec())).with_op(back.clone()))
            .collect())
    }

    /// Pushes an expression through the map without applying any rule.
    pub fn map_item(&self, item: &Item) -> Result<Item, RegenError> {
        if self.has_foreign_conjugator(&item.ops)? {
            return self.cable_item(item);
        }
        let expr = match &item.expr {
            Expr::Path { side, power, labels, decos } => {
                Expr::Path { side: *side, power: *power, labels: labels.clone(), decos: self.map_decos(decos) }
            }
            Expr::Block { power, side, labels, decos } => {
                Expr::Block { power: *power, side: *side, labels: labels.clone(), decos: self.map_decos(decos) }
            }
            Expr::Macro { kind, side, labels, decos } => {
                Expr::Macro { kind: *kind, side: *side, labels: labels.clone(), decos: self.map_decos(decos) }
            }
            Expr::Group(items) => Expr::Group(items.iter().map(|i| self.map_item(i)).collect::<Result<_, _>>()?),
            Expr::Word(_) => {
                let w = elaborate(&[Item::new(item.expr.clone())], &self.source)?.product();
                Expr::Word(self.cable(&w)?.letters().to_vec())
            }
            other => other.clone(),
        };
        Ok(Item { expr, ops: self.map_ops(&item.ops)? })
    }

    fn map_ops(&self, ops: &[Op]) -> Result<Vec<Op>, RegenError> {
        if self.has_foreign_conjugator(ops)? {
            let text: Vec<String> = ops
                .iter()
                .filter_map(|o| match o {
                    Op::Conj(items) => Some(render_items(items)),
                    Op::Power(_) => None,
                })
                .collect();
            return Err(RegenError::ForeignConjugator(text.join(", ")));
        }
        ops.iter()
            .map(|op| match op {
                Op::Power(n) => Ok(Op::Power(*n)),
                Op::Conj(items) => Ok(Op::Conj(items.iter().map(|i| self.map_conjugator(i)).collect::<Result<_, _>>()?)),
            })
            .collect()
    }

    /// Conjugators are diffeomorphisms of the whole disk, so they must be
    /// cabled exactly. An even twist on a doubled point becomes its node
    /// expansion; anything else that touches a doubled point becomes the
    /// cabled word.
    fn map_conjugator(&self, item: &Item) -> Result<Item, RegenError> {
        let touches = |labels: &[Label]| labels.iter().any(|l| self.is_doubled(l));
        match &item.expr {
            Expr::Path { power, labels, .. } if touches(labels) && power % 2 == 0 => {
                let core = Item::new(item.expr.clone());
                let parts = apply_rule(&core, RegenRule::NODE, self)?;
                let parts = if *power == 2 {
                    parts
                } else {
                    parts.into_iter().map(|p| rescale(p, *power)).collect()
                };
                let group = Item { expr: Expr::Group(parts), ops: self.map_ops(&item.ops)? };
                Ok(group)
            }
            Expr::Path { labels, .. } | Expr::Block { labels, .. } | Expr::Macro { labels, .. } if touches(labels) => {
                let w = elaborate(std::slice::from_ref(item), &self.source)?.product();
                Ok(Item::new(Expr::Word(self.cable(&w)?.letters().to_vec())))
            }
            _ => self.map_item(item),
        }
    }

    /// Replaces every strand over a doubled point by two parallel strands.
    pub fn cable(&self, w: &BraidWord) -> Result<BraidWord, RegenError> {
        if w.strands() != self.source.len() {
            return Err(BraidError::StrandMismatch { left: self.source.len(), right: w.strands() }.into());
        }
        let mut sizes = self.sizes();
        let mut out = Vec::new();
        for &letter in w.letters() {
            let i = letter.unsigned_abs() as usize;
            // σ⁻¹ undoes the positive crossing that produced the current sizes.
            let (a, b) = if letter > 0 { (sizes[i - 1], sizes[i]) } else { (sizes[i], sizes[i - 1]) };
            let o: usize = sizes[..i - 1].iter().sum();
            let mut cross = Vec::with_capacity(a * b);
            for p in (0..a).rev() {
                for q in 0..b {
                    cross.push((o + p + q + 1) as i32);
                }
            }
            if letter < 0 {
                cross.reverse();
                cross.iter_mut().for_each(|x| *x = -*x);
            }
            out.extend(cross);
            sizes.swap(i - 1, i);
        }
        Ok(BraidWord::new(self.target.len(), out)?)
    }
}

fn rescale(item: Item, power: i32) -> Item {
    match item.expr {
        Expr::Path { side, labels, decos, .. } => Item { expr: Expr::Path { side, power, labels, decos }, ops: item.ops },
        other => Item { expr: other, ops: item.ops },
    }
}

fn path(side: Side, power: i32, labels: Vec<Label>, decos: Vec<Decoration>) -> Item {
    Item::path(side, power, labels, decos)
}

/// Applies one regeneration rule to a single path factor. Conjugators on
/// the factor are pushed through the map and distributed over the output.
pub fn apply_rule(item: &Item, rule: RegenRule, d: &DoublingMap) -> Result<Vec<Item>, RegenError> {
    let mismatch = |why: &str| RegenError::RuleMismatch { item: item.to_string(), rule, why: why.into() };
    let Expr::Path { side, power, labels, decos } = &item.expr else {
        return Err(mismatch("rules apply to half-twist paths"));
    };
    if *power != rule.source_degree() && !(rule.kind == RuleKind::Node && power % 2 == 0) {
        return Err(mismatch("degree does not match the rule"));
    }
    let (a, b) = (labels[0], labels[1]);
    let (da, db) = (d.is_doubled(&a), d.is_doubled(&b));
    let decos = d.map_decos(decos);
    let (ap, bp) = (Label::primed(a.base), Label::primed(b.base));
    let side = *side;
    let parts: Vec<Item> = match rule.kind {
        RuleKind::Tangent => {
            let labels = match (da, db) {
                (true, false) => vec![a, ap, b],
                (false, true) => vec![a, b, bp],
                _ => return Err(mismatch("a tangency regenerates with exactly one doubled side")),
            };
            vec![Item::new(Expr::Macro { kind: MacroKind::Cube, side, labels, decos })]
        }
        RuleKind::Node => {
            let want = match (da, db) {
                (true, false) => NodeVariant::First,
                (false, true) => NodeVariant::Second,
                (true, true) => NodeVariant::Both,
                _ => return Err(mismatch("a node regenerates only if a side is doubled")),
            };
            if rule.variant.is_some_and(|v| v != want) {
                return Err(mismatch("variant does not match the doubled sides"));
            }
            let p = *power;
            // Below the axis the primed twist comes first; above, the mirror order.
            let mut out = match want {
                NodeVariant::First => vec![path(side, p, vec![ap, b], decos.clone()), path(side, p, vec![a, b], decos)],
                NodeVariant::Second => vec![path(side, p, vec![a, bp], decos.clone()), path(side, p, vec![a, b], decos)],
                NodeVariant::Both => {
                    let kind = if side == Side::Above { MacroKind::Parasitic } else { MacroKind::Square };
                    vec![Item::new(Expr::Macro { kind, side, labels: vec![a, ap, b, bp], decos })]
                }
            };
            if side == Side::Above {
                out.reverse();
            }
            out
        }
        RuleKind::Branch => {
            if !(da && db) {
                return Err(mismatch("a branch point regenerates when both sides are doubled"));
            }
            let mut over = decos.clone();
            over.push(Decoration::Over(b, b));
            vec![path(side, 1, vec![ap, b], decos), path(side, 1, vec![a, bp], over)]
        }
    };
    let ops = d.map_ops(&item.ops)?;
    Ok(parts.into_iter().map(|p| Item { expr: p.expr, ops: p.ops.into_iter().chain(ops.iter().cloned()).collect() }).collect())
}

/// What to do with a matched factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Rule(RegenRule),
    /// Replace the matched core by these target-fiber expressions, keeping
    /// the matched item's conjugators.
    Replace(Vec<Item>),
    /// Two consecutive squares `Z²[a,b'] Z²[a,b]` become `Zsq[a,a',b,b']`.
    MergeSquares,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    /// Source-fiber cores to match: one item, or two for `MergeSquares`.
    pub pattern: Vec<Item>,
    pub action: Action,
}

impl Substitution {
    pub fn rule(pattern: Item, rule: RegenRule) -> Self {
        Substitution { pattern: vec![pattern], action: Action::Rule(rule) }
    }

    pub fn replace(pattern: Item, with: Vec<Item>) -> Self {
        Substitution { pattern: vec![pattern], action: Action::Replace(with) }
    }

    pub fn merge(first: Item, second: Item) -> Self {
        Substitution { pattern: vec![first, second], action: Action::MergeSquares }
    }
}

/// Looks through single-item groups without operators.
fn core(expr: &Expr) -> &Expr {
    match expr {
        Expr::Group(items) if items.len() == 1 && items[0].ops.is_empty() => core(&items[0].expr),
        other => other,
    }
}

fn matches(item: &Item, pattern: &Item) -> bool {
    pattern.ops.is_empty() && core(&item.expr) == core(&pattern.expr)
}

fn with_ops(parts: Vec<Item>, ops: &[Op]) -> Item {
    if ops.is_empty() && parts.len() == 1 {
        return parts.into_iter().next().expect("one part");
    }
    Item { expr: Expr::Group(parts), ops: ops.to_vec() }
}

fn rewrite(items: &[Item], d: &DoublingMap, subs: &[Substitution], used: &mut [usize]) -> Result<Vec<Item>, RegenError> {
    let mut out = Vec::new();
    let mut i = 0;
    'items: while i < items.len() {
        let item = &items[i];
        for (s, sub) in subs.iter().enumerate() {
            match (&sub.action, sub.pattern.as_slice()) {
                (Action::MergeSquares, [p, q]) => {
                    let Some(next) = items.get(i + 1) else { continue };
                    if matches(item, p) && matches(next, q) && item.ops == next.ops {
                        let Expr::Path { side, power: 2, labels, decos } = core(&next.expr) else { continue };
                        let (a, b) = (labels[0], labels[1]);
                        let decos = d.map_decos(decos);
                        let sq = Item::new(Expr::Macro {
                            kind: MacroKind::Square,
                            side: *side,
                            labels: vec![a, Label::primed(a.base), b, Label::primed(b.base)],
                            decos,
                        });
                        out.push(with_ops(vec![sq], &d.map_ops(&item.ops)?));
                        used[s] += 1;
                        i += 2;
                        continue 'items;
                    }
                }
                (Action::Rule(rule), [p]) if matches(item, p) => {
                    // The conjugator cannot be pushed through on its own.
                    if rule.kind == RuleKind::Node && d.has_foreign_conjugator(&item.ops)? {
                        out.extend(d.node_under_foreign(item)?);
                        used[s] += 1;
                        i += 1;
                        continue 'items;
                    }
                    let bare = Item::new(core(&item.expr).clone());
                    let parts = apply_rule(&bare, *rule, d)?;
                    out.push(with_ops(parts, &d.map_ops(&item.ops)?));
                    used[s] += 1;
                    i += 1;
                    continue 'items;
                }
                (Action::Replace(with), [p]) if matches(item, p) => {
                    out.push(Item { expr: Expr::Group(with.clone()), ops: d.map_ops(&item.ops)? });
                    used[s] += 1;
                    i += 1;
                    continue 'items;
                }
                _ => {}
            }
        }
        match &item.expr {
            Expr::Group(inner) if core(&item.expr) == &item.expr && !d.has_foreign_conjugator(&item.ops)? => {
                let inner = rewrite(inner, d, subs, used)?;
                out.push(Item { expr: Expr::Group(inner), ops: d.map_ops(&item.ops)? });
            }
            _ => out.push(d.map_item(item)?),
        }
        i += 1;
    }
    Ok(out)
}

/// Rewrites a source-fiber expression list into the target fiber. Every
/// substitution must fire at least once.
pub fn regenerate(items: &[Item], d: &DoublingMap, subs: &[Substitution]) -> Result<Vec<Item>, RegenError> {
    let mut used = vec![0; subs.len()];
    let out = rewrite(items, d, subs, &mut used)?;
    if let Some(s) = used.iter().position(|&u| u == 0) {
        let text: Vec<String> = subs[s].pattern.iter().map(|p| p.to_string()).collect();
        return Err(RegenError::Unused(text.join(" ")));
    }
    Ok(out)
}

// ------------------------------------------------------------ k-point

fn pl(i: usize) -> Label {
    Label::plain(i as u32)
}

fn pr(i: usize) -> Label {
    Label::primed(i as u32)
}

/// Fiber of stage `n` for the `k+1`-point: lines `k-n..=k` are doubled.
pub fn k_point_fiber(k: usize, stage: usize) -> Fiber {
    let mut labels = Vec::new();
    for i in 1..=k {
        labels.push(pl(i));
        if i + stage >= k {
            labels.push(pr(i));
        }
    }
    Fiber::new(labels).expect("distinct labels")
}

fn chain(k: usize) -> Vec<Item> {
    // Δ² on the first k-1 points; empty when fewer than two points.
    if k < 3 {
        return Vec::new();
    }
    vec![Item::new(Expr::Block { power: 2, side: Side::Below, labels: (1..k).map(pl).collect(), decos: vec![] })]
}

/// `B_k`: tangency, branch point, node pairs and the remaining chain, in
/// the fiber `1, …, k-1, k, k'`.
pub fn k_point_items(k: usize) -> Result<Vec<Item>, RegenError> {
    if k < 2 {
        return Err(RegenError::Stage { k, stage: 0 });
    }
    let mut items = vec![
        path(Side::Below, 4, vec![pl(k - 1), pl(k)], vec![]),
        path(Side::Above, 1, vec![pl(k), pr(k)], vec![Decoration::Detour(pl(k - 1), None)]),
    ];
    for i in 3..=k {
        let a = pl(k - i + 1);
        items.push(path(Side::Below, 2, vec![a, pr(k)], vec![]));
        items.push(path(Side::Below, 2, vec![a, pl(k)], vec![]));
    }
    items.extend(chain(k));
    Ok(items)
}

/// Singular fibers of the `k+1`-point after regenerating line `k`: the
/// tangency, the branch point, the node pairs and the remaining chain.
pub fn k_point_table(k: usize) -> Result<Table, RegenError> {
    if k < 2 {
        return Err(RegenError::Stage { k, stage: 0 });
    }
    let below = |ls: Vec<Label>| PathExpr::below(ls);
    let mut records = vec![
        SingularityRecord {
            label: "1".into(),
            skeletons: vec![below(vec![pl(k - 1), pl(k)])],
            epsilon: 4,
            delta: DeltaSpec::Twist { skeleton: below(vec![pl(k - 1), pl(k)]), power: 2 },
        },
        SingularityRecord {
            label: "2".into(),
            skeletons: vec![below(vec![pl(k), pr(k)])],
            epsilon: 1,
            delta: DeltaSpec::Branch { m: k - 1 },
        },
    ];
    for i in 3..=k {
        let a = pl(k - i + 1);
        records.push(SingularityRecord {
            label: format!("{i},{i}'"),
            skeletons: vec![below(vec![a, pl(k)]), below(vec![a, pr(k)])],
            epsilon: 2,
            delta: DeltaSpec::Twist { skeleton: below(vec![a, pl(k)]), power: 2 },
        });
    }
    if k >= 3 {
        records.push(SingularityRecord {
            label: format!("{}", k + 1),
            skeletons: vec![below((1..k).map(pl).collect())],
            epsilon: 2,
            delta: DeltaSpec::Nothing,
        });
    }
    Ok(Table { fiber: k_point_fiber(k, 0), records })
}

/// Substitutions for regenerating line `k - stage` in a stage `stage - 1`
/// factorization of the `k+1`-point, at every nesting level.
fn k_point_substitutions(k: usize, stage: usize) -> Result<Vec<Substitution>, RegenError> {
    let mut subs = Vec::new();
    let line = k - stage;
    for j in (line + 1)..=k {
        let n = stage - (k - j);
        if n == 1 {
            subs.push(Substitution::rule(path(Side::Below, 4, vec![pl(j - 1), pl(j)], vec![]), RegenRule::TANGENT));
            if j >= 3 {
                subs.push(Substitution::replace(chain(j).remove(0), k_point_items(j - 1)?));
            }
        } else {
            subs.push(Substitution::merge(
                path(Side::Below, 2, vec![pl(line), pr(j)], vec![]),
                path(Side::Below, 2, vec![pl(line), pl(j)], vec![]),
            ));
        }
    }
    Ok(subs)
}

/// One regeneration stage: `B_k^{(stage-1)} → B_k^{(stage)}`.
pub fn k_point_step(items: &[Item], k: usize, stage: usize) -> Result<Vec<Item>, RegenError> {
    if stage == 0 || stage >= k {
        return Err(RegenError::Stage { k, stage });
    }
    let d = DoublingMap::new(&k_point_fiber(k, stage - 1), &[(k - stage) as u32])?;
    let out = regenerate(items, &d, &k_point_substitutions(k, stage)?)?;
    Ok(flatten(out))
}

/// Every stage from `B_k` to `B_k^{(stage)}`, each with its fiber.
pub fn k_point_chain(k: usize, stage: usize) -> Result<Vec<(Fiber, Vec<Item>)>, RegenError> {
    if k < 2 || stage >= k {
        return Err(RegenError::Stage { k, stage });
    }
    let mut items = k_point_items(k)?;
    let mut out = vec![(k_point_fiber(k, 0), items.clone())];
    for n in 1..=stage {
        items = k_point_step(&items, k, n)?;
        out.push((k_point_fiber(k, n), items.clone()));
    }
    Ok(out)
}

/// `∏_{j=k}^{2} (T_j ∏_{m=j-2}^{1} Zsq[m,m',j,j'])`.
pub fn k_point_closed_form(k: usize) -> Vec<Item> {
    let mut items = Vec::new();
    for j in (2..=k).rev() {
        items.push(Item::new(Expr::T(j as u32)));
        for m in (1..=j.saturating_sub(2)).rev() {
            items.push(Item::new(Expr::Macro {
                kind: MacroKind::Square,
                side: Side::Below,
                labels: vec![pl(m), pr(m), pl(j), pr(j)],
                decos: vec![],
            }));
        }
    }
    items
}

/// Splices groups without operators into the surrounding list.
pub fn flatten(items: Vec<Item>) -> Vec<Item> {
    let mut out = Vec::new();
    for it in items {
        match it.expr {
            Expr::Group(inner) if it.ops.is_empty() => out.extend(flatten(inner)),
            expr => out.push(Item { expr, ops: it.ops }),
        }
    }
    out
}

/// Elaborates a stage in its fiber.
pub fn stage_factorization(fiber: &Fiber, items: &[Item]) -> Result<Factorization, RegenError> {
    Ok(elaborate(items, fiber)?)
}

// ------------------------------------------------------------ plans

/// One regeneration step read from text:
///
/// ```text
/// double: 1 5
/// tangent: Z4[4',5]
/// node: Z2[1,4]
/// branch: Z[2,3]
/// merge: Z2[1,3'] Z2[1,3]
/// replace: Delta2<1,2,3,5> => Z4[1',2] Z4[3,5]
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub double: Vec<u32>,
    pub subs: Vec<Substitution>,
}

pub fn parse_plan(text: &str) -> Result<Plan, RegenError> {
    let mut double = Vec::new();
    let mut subs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: &str| NotationError::Syntax { line: n + 1, col: 1, message: message.into() };
        let (key, rest) = line.split_once(':').ok_or_else(|| bad("expected `key: value`"))?;
        let items = |t: &str| parse_items(t).map_err(|e| relocate(e, n + 1));
        let single = |t: &str| -> Result<Item, RegenError> {
            let mut v = items(t)?;
            if v.len() != 1 {
                return Err(bad("expected one expression").into());
            }
            Ok(v.remove(0))
        };
        match key.trim() {
            "double" => {
                for w in rest.split_whitespace() {
                    double.push(w.parse().map_err(|_| bad("`double` takes line numbers"))?);
                }
            }
            "tangent" => subs.push(Substitution::rule(single(rest)?, RegenRule::TANGENT)),
            "node" => subs.push(Substitution::rule(single(rest)?, RegenRule::NODE)),
            "branch" => subs.push(Substitution::rule(single(rest)?, RegenRule::BRANCH)),
            "merge" => {
                let mut v = items(rest)?;
                if v.len() != 2 {
                    return Err(bad("`merge` takes two squares").into());
                }
                let second = v.pop().expect("two");
                subs.push(Substitution::merge(v.pop().expect("two"), second));
            }
            "replace" => {
                let (pat, with) = rest.split_once("=>").ok_or_else(|| bad("`replace` needs `=>`"))?;
                subs.push(Substitution::replace(single(pat)?, items(with)?));
            }
            other => return Err(bad(&format!("unknown plan key `{other}`")).into()),
        }
    }
    Ok(Plan { double, subs })
}

fn relocate(e: NotationError, line: usize) -> RegenError {
    match e {
        NotationError::Syntax { col, message, .. } => NotationError::Syntax { line, col, message }.into(),
        other => other.into(),
    }
}

/// Applies a plan to a stage and returns the next stage's fiber and items.
pub fn apply_plan(fiber: &Fiber, items: &[Item], plan: &Plan) -> Result<(Fiber, Vec<Item>), RegenError> {
    let d = DoublingMap::new(fiber, &plan.double)?;
    let out = flatten(regenerate(items, &d, &plan.subs)?);
    Ok((d.target().clone(), out))
}
