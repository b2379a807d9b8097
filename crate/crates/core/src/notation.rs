//! Text notation for factorizations and singularity tables.
//!
//! ```text
//! # comment
//! fiber: 1 2 3 4 4' 5          (or `fiber: doubled 18`, or `strands: 6`)
//! Z2[3,4] Z4[4',5] Z2[3,4']{over(4),detour(5)}
//! (Delta2<1,2,3,5>)^{Z2[4,5]^-1}
//! ```
//!
//! Atoms: `Z`/`Zbar` with an optional power suffix (`Z2`, `Zbar4`), the
//! closed macros `Z3p`, `Z2p`, `Zsq`, `Zpp` and `T[j]`, chain twists
//! `Delta<…>`, `Delta2<…>`, `Delta4<…>`, `FullTwist<a,b>` on a consecutive
//! block, raw words `W[1,-2]`, `id`, and parenthesized groups. Postfix `^n`
//! is a power; `^{…}` and `_{…}` both conjugate every factor by the product
//! `h` of the braces, giving `h⁻¹·x·h`.

use std::fmt;

use thiserror::Error;

use crate::braid::{block_delta, BraidWord};
use crate::disk::{compile_path, Decoration, DiskError, Direction, Fiber, Label, PathExpr, Side};
use crate::engine::{DeltaSpec, SingularityRecord};
use crate::error::BraidError;
use crate::factorization::{Factor, Factorization};

#[derive(Debug, Error)]
pub enum NotationError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("in `{at}`: {source}")]
    Disk { at: String, source: DiskError },
    #[error("in `{at}`: {message}")]
    Macro { at: String, message: String },
    #[error(transparent)]
    Braid(#[from] BraidError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MacroKind {
    /// `Z3p`: the tangency regeneration `Z^{(3)}`, three cubes.
    Cube,
    /// `Z2p`: a node with one doubled side, two squares.
    Double,
    /// `Zsq`: a node with both sides doubled, four squares.
    Square,
    /// `Zpp`: a regenerated parasitic node, four squares above the axis.
    Parasitic,
}

impl MacroKind {
    fn name(self) -> &'static str {
        match self {
            MacroKind::Cube => "Z3p",
            MacroKind::Double => "Z2p",
            MacroKind::Square => "Zsq",
            MacroKind::Parasitic => "Zpp",
        }
    }

    fn default_side(self) -> Side {
        if self == MacroKind::Parasitic {
            Side::Above
        } else {
            Side::Below
        }
    }

    /// Total degree of one expansion.
    pub fn degree(self) -> i64 {
        match self {
            MacroKind::Cube => 9,
            MacroKind::Double => 4,
            MacroKind::Square | MacroKind::Parasitic => 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Path { side: Side, power: i32, labels: Vec<Label>, decos: Vec<Decoration> },
    Macro { kind: MacroKind, side: Side, labels: Vec<Label>, decos: Vec<Decoration> },
    T(u32),
    Block { power: i32, side: Side, labels: Vec<Label>, decos: Vec<Decoration> },
    FullTwist(Label, Label),
    Word(Vec<i32>),
    Identity,
    Group(Vec<Item>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Power(i32),
    Conj(Vec<Item>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Item {
    pub expr: Expr,
    pub ops: Vec<Op>,
}

impl Item {
    pub fn new(expr: Expr) -> Self {
        Item { expr, ops: Vec::new() }
    }

    pub fn path(side: Side, power: i32, labels: Vec<Label>, decos: Vec<Decoration>) -> Self {
        Item::new(Expr::Path { side, power, labels, decos })
    }

    pub fn with_op(mut self, op: Op) -> Self {
        self.ops.push(op);
        self
    }

    pub fn conj(self, by: Vec<Item>) -> Self {
        self.with_op(Op::Conj(by))
    }

    pub fn pow(self, n: i32) -> Self {
        self.with_op(Op::Power(n))
    }
}

fn write_decos(f: &mut fmt::Formatter<'_>, side: Option<Side>, decos: &[Decoration]) -> fmt::Result {
    let mut parts: Vec<String> = Vec::new();
    if let Some(s) = side {
        parts.push(if s == Side::Above { "above".into() } else { "below".into() });
    }
    parts.extend(decos.iter().map(|d| d.to_string()));
    if parts.is_empty() {
        Ok(())
    } else {
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn join_labels(labels: &[Label]) -> String {
    labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Path { side, power, labels, decos } => {
                write!(f, "Z{}", if *side == Side::Above { "bar" } else { "" })?;
                if *power != 1 {
                    write!(f, "{power}")?;
                }
                write!(f, "[{}]", join_labels(labels))?;
                write_decos(f, None, decos)
            }
            Expr::Macro { kind, side, labels, decos } => {
                let name = kind.name();
                write!(f, "{name}[{}]", join_labels(labels))?;
                let side = (*side != kind.default_side()).then_some(*side);
                write_decos(f, side, decos)
            }
            Expr::T(j) => write!(f, "T[{j}]"),
            Expr::Block { power, side, labels, decos } => {
                let name = match power {
                    1 => "Delta",
                    2 => "Delta2",
                    _ => "Delta4",
                };
                write!(f, "{name}<{}>", join_labels(labels))?;
                write_decos(f, (*side == Side::Above).then_some(Side::Above), decos)
            }
            Expr::FullTwist(a, b) => write!(f, "FullTwist<{a},{b}>"),
            Expr::Word(ls) => {
                let parts: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
                write!(f, "W[{}]", parts.join(","))
            }
            Expr::Identity => write!(f, "id"),
            Expr::Group(items) => write!(f, "({})", render_items(items)),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = !self.ops.is_empty() && matches!(self.expr, Expr::Path { .. } | Expr::Macro { .. } | Expr::Block { .. })
            && self.ops.iter().any(|o| matches!(o, Op::Conj(_)));
        if wrap {
            write!(f, "({})", self.expr)?;
        } else {
            write!(f, "{}", self.expr)?;
        }
        for op in &self.ops {
            match op {
                Op::Power(n) => write!(f, "^{n}")?,
                Op::Conj(items) => write!(f, "^{{{}}}", render_items(items))?,
            }
        }
        Ok(())
    }
}

pub fn render_items(items: &[Item]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------- parsing

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, NotationError> {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
        Err(NotationError::Syntax { line, col, message: message.into() })
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = &self.src[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), NotationError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.err(format!("expected `{c}`, found `{found}`")),
                None => self.err(format!("expected `{c}`, found end of input")),
            }
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_alphanumeric() && c != '_').unwrap_or(rest.len());
        if len == 0 || !rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return None;
        }
        self.pos += len;
        Some(rest[..len].to_string())
    }

    fn int(&mut self) -> Result<i64, NotationError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let sign = usize::from(rest.starts_with('-'));
        let digits = rest[sign..].find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len() - sign);
        if digits == 0 {
            return self.err("expected an integer");
        }
        let text = &rest[..sign + digits];
        self.pos += sign + digits;
        text.parse().or_else(|_| self.err(format!("integer `{text}` out of range")))
    }

    fn label(&mut self) -> Result<Label, NotationError> {
        self.skip_ws();
        let start = self.pos;
        let n = self.int()?;
        if n <= 0 {
            self.pos = start;
            return self.err("labels are positive integers");
        }
        let primed = self.peek_raw() == Some('\'');
        if primed {
            self.pos += 1;
        }
        Ok(Label { base: n as u32, primed })
    }

    fn labels(&mut self, close: char) -> Result<Vec<Label>, NotationError> {
        let mut out = vec![self.label()?];
        while self.eat(',') {
            out.push(self.label()?);
        }
        self.expect(close)?;
        Ok(out)
    }

    /// `{above, over(3-4), detour(5:left)}`; returns the side override and decorations.
    fn decorations(&mut self) -> Result<(Option<Side>, Vec<Decoration>), NotationError> {
        let mut side = None;
        let mut decos = Vec::new();
        if self.peek() != Some('{') {
            return Ok((side, decos));
        }
        self.pos += 1;
        if self.eat('}') {
            return Ok((side, decos));
        }
        loop {
            let Some(word) = self.ident() else { return self.err("expected a decoration") };
            match word.as_str() {
                "above" => side = Some(Side::Above),
                "below" => side = Some(Side::Below),
                "over" | "under" => {
                    self.expect('(')?;
                    let a = self.label()?;
                    let b = if self.eat('-') { self.label()? } else { a };
                    self.expect(')')?;
                    decos.push(if word == "over" { Decoration::Over(a, b) } else { Decoration::Under(a, b) });
                }
                "detour" => {
                    self.expect('(')?;
                    let k = self.label()?;
                    let dir = if self.eat(':') {
                        match self.ident().as_deref() {
                            Some("left") => Some(Direction::Left),
                            Some("right") => Some(Direction::Right),
                            _ => return self.err("detour direction must be `left` or `right`"),
                        }
                    } else {
                        None
                    };
                    self.expect(')')?;
                    decos.push(Decoration::Detour(k, dir));
                }
                other => return self.err(format!("unknown decoration `{other}`")),
            }
            if self.eat('}') {
                break;
            }
            self.expect(',')?;
        }
        Ok((side, decos))
    }

    fn at_item_start(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c == '(' || c.is_ascii_alphabetic())
    }

    fn items(&mut self) -> Result<Vec<Item>, NotationError> {
        let mut out = Vec::new();
        while self.at_item_start() {
            out.push(self.item()?);
        }
        Ok(out)
    }

    fn item(&mut self) -> Result<Item, NotationError> {
        let expr = self.primary()?;
        let mut ops = Vec::new();
        loop {
            match self.peek() {
                Some('^') => {
                    self.pos += 1;
                    if self.eat('{') {
                        ops.push(Op::Conj(self.conj_body()?));
                    } else {
                        let n = self.int()?;
                        if n == 0 || n.abs() > 64 {
                            return self.err("powers must be nonzero and at most 64 in size");
                        }
                        ops.push(Op::Power(n as i32));
                    }
                }
                Some('_') => {
                    self.pos += 1;
                    self.expect('{')?;
                    ops.push(Op::Conj(self.conj_body()?));
                }
                _ => break,
            }
        }
        Ok(Item { expr, ops })
    }

    fn conj_body(&mut self) -> Result<Vec<Item>, NotationError> {
        let items = self.items()?;
        if items.is_empty() {
            return self.err("empty conjugator");
        }
        self.expect('}')?;
        Ok(items)
    }

    fn primary(&mut self) -> Result<Expr, NotationError> {
        if self.eat('(') {
            let items = self.items()?;
            if items.is_empty() {
                return self.err("empty group");
            }
            self.expect(')')?;
            return Ok(Expr::Group(items));
        }
        let start = self.pos;
        let Some(name) = self.ident() else { return self.err("expected a factor") };
        let unknown = |c: &Self| {
            let mut c2 = Cursor { src: c.src, pos: start };
            c2.skip_ws();
            c2.err::<Expr>(format!("unknown atom `{name}`"))
        };
        match name.as_str() {
            "id" => Ok(Expr::Identity),
            "T" => {
                self.expect('[')?;
                let j = self.int()?;
                self.expect(']')?;
                if j < 2 {
                    return self.err("T[j] needs j >= 2");
                }
                Ok(Expr::T(j as u32))
            }
            "W" => {
                self.expect('[')?;
                let mut letters = Vec::new();
                if !self.eat(']') {
                    letters.push(self.int()? as i32);
                    while self.eat(',') {
                        letters.push(self.int()? as i32);
                    }
                    self.expect(']')?;
                }
                Ok(Expr::Word(letters))
            }
            "FullTwist" => {
                self.expect('<')?;
                let ls = self.labels('>')?;
                if ls.len() != 2 {
                    return self.err("FullTwist takes the two ends of a block");
                }
                Ok(Expr::FullTwist(ls[0], ls[1]))
            }
            "Delta" | "Delta2" | "Delta4" => {
                let power = match name.as_str() {
                    "Delta" => 1,
                    "Delta2" => 2,
                    _ => 4,
                };
                self.expect('<')?;
                let labels = self.labels('>')?;
                let (side, decos) = self.decorations()?;
                Ok(Expr::Block { power, side: side.unwrap_or(Side::Below), labels, decos })
            }
            "Z3p" | "Z2p" | "Zsq" | "Zpp" => {
                let kind = match name.as_str() {
                    "Z3p" => MacroKind::Cube,
                    "Z2p" => MacroKind::Double,
                    "Zsq" => MacroKind::Square,
                    _ => MacroKind::Parasitic,
                };
                self.expect('[')?;
                let labels = self.labels(']')?;
                let want = if matches!(kind, MacroKind::Cube | MacroKind::Double) { 3 } else { 4 };
                if labels.len() != want {
                    return self.err(format!("{name} takes {want} labels"));
                }
                let (side, decos) = self.decorations()?;
                Ok(Expr::Macro { kind, side: side.unwrap_or(kind.default_side()), labels, decos })
            }
            _ => {
                let rest = name.strip_prefix('Z').ok_or(()).or_else(|_| unknown(self).map(|_| ""))?;
                let (bar, digits) = match rest.strip_prefix("bar") {
                    Some(d) => (true, d),
                    None => (false, rest),
                };
                let power: i32 = if digits.is_empty() {
                    1
                } else {
                    match digits.parse() {
                        Ok(p) if p > 0 && p <= 8 => p,
                        _ => return unknown(self),
                    }
                };
                self.expect('[')?;
                let labels = self.labels(']')?;
                if labels.len() != 2 {
                    return self.err("a half-twist path has two endpoints");
                }
                let (side, decos) = self.decorations()?;
                let side = side.unwrap_or(if bar { Side::Above } else { Side::Below });
                Ok(Expr::Path { side, power, labels, decos })
            }
        }
    }
}

/// A parsed factorization file: its fiber and the expressions in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub fiber: Fiber,
    pub items: Vec<Item>,
}

fn parse_header(text: &str) -> Result<(Option<Fiber>, usize), NotationError> {
    // Header lines come first; returns the byte offset where the body starts.
    let mut offset = 0;
    let mut fiber = None;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            offset += line.len();
            continue;
        }
        let syntax = |message: String| NotationError::Syntax { line: lineno + 1, col: 1, message };
        if let Some(rest) = t.strip_prefix("fiber:") {
            let rest = rest.split('#').next().unwrap_or("").trim();
            let f = if let Some(k) = rest.strip_prefix("doubled") {
                let k: usize = k.trim().parse().map_err(|_| syntax("`fiber: doubled K` needs a count".into()))?;
                Fiber::doubled(k)
            } else {
                Fiber::parse(rest).map_err(|e| syntax(e.to_string()))?
            };
            fiber = Some(f);
        } else if let Some(rest) = t.strip_prefix("strands:") {
            let n: usize = rest.split('#').next().unwrap_or("").trim().parse().map_err(|_| syntax("bad strand count".into()))?;
            fiber = Some(Fiber::plain(n));
        } else {
            break;
        }
        offset += line.len();
    }
    Ok((fiber, offset))
}

fn located(err: NotationError, text: &str, offset: usize) -> NotationError {
    match err {
        NotationError::Syntax { line, col, message } => {
            let extra = text[..offset].matches('\n').count();
            NotationError::Syntax { line: line + extra, col, message }
        }
        other => other,
    }
}

/// Parses a factorization file without elaborating it.
pub fn parse_document(text: &str) -> Result<Document, NotationError> {
    let (fiber, offset) = parse_header(text)?;
    let fiber = fiber.ok_or(NotationError::Syntax { line: 1, col: 1, message: "missing `fiber:` or `strands:` header".into() })?;
    let body = &text[offset..];
    let mut c = Cursor::new(body);
    let items = c.items().map_err(|e| located(e, text, offset))?;
    if let Some(ch) = c.peek() {
        return Err(located(c.err::<()>(format!("unexpected `{ch}`")).unwrap_err(), text, offset));
    }
    Ok(Document { fiber, items })
}

/// Parses a list of expressions with no header.
pub fn parse_items(text: &str) -> Result<Vec<Item>, NotationError> {
    let mut c = Cursor::new(text);
    let items = c.items()?;
    if let Some(ch) = c.peek() {
        return c.err(format!("unexpected `{ch}`"));
    }
    Ok(items)
}

/// Parses and elaborates a factorization file.
pub fn parse_factorization(text: &str) -> Result<(Fiber, Factorization), NotationError> {
    let doc = parse_document(text)?;
    let f = elaborate(&doc.items, &doc.fiber)?;
    Ok((doc.fiber, f))
}

/// Canonical text: the fiber header, then one factor per line.
pub fn render(fiber: &Fiber, f: &Factorization) -> String {
    let mut out = format!("fiber: {fiber}\n");
    for factor in &f.factors {
        out.push_str(&factor.expr);
        out.push('\n');
    }
    out
}

// ------------------------------------------------------------ elaboration

fn disk(at: &impl fmt::Display) -> impl Fn(DiskError) -> NotationError + '_ {
    move |source| NotationError::Disk { at: at.to_string(), source }
}

/// Keeps the decorations that make sense for a sub-path of a macro.
fn clip(decos: &[Decoration], a: Label, b: Label, fiber: &Fiber) -> Result<Vec<Decoration>, DiskError> {
    let (pa, pb) = (fiber.position(&a)?, fiber.position(&b)?);
    let (lo, hi) = (pa.min(pb), pa.max(pb));
    let mut out = Vec::new();
    for d in decos {
        match d {
            Decoration::Over(x, y) | Decoration::Under(x, y) => {
                let (px, py) = (fiber.position(x)?, fiber.position(y)?);
                let (s, e) = ((px.min(py)).max(lo + 1), (px.max(py)).min(hi - 1));
                if s <= e {
                    let (ls, le) = (fiber.label_at(s), fiber.label_at(e));
                    out.push(if matches!(d, Decoration::Over(..)) { Decoration::Over(ls, le) } else { Decoration::Under(ls, le) });
                }
            }
            Decoration::Detour(k, _) => {
                let pk = fiber.position(k)?;
                if pk < lo || pk > hi {
                    out.push(d.clone());
                }
            }
        }
    }
    Ok(out)
}

fn ordered(a: Label, b: Label, fiber: &Fiber) -> Result<Vec<Label>, DiskError> {
    Ok(if fiber.position(&a)? < fiber.position(&b)? { vec![a, b] } else { vec![b, a] })
}

fn sub_path(side: Side, power: i32, a: Label, b: Label, decos: &[Decoration], fiber: &Fiber) -> Result<Item, DiskError> {
    Ok(Item::path(side, power, ordered(a, b, fiber)?, clip(decos, a, b, fiber)?))
}

/// Splits three labels into (single, pair member, pair partner) with the
/// member being the one nearer the single point.
fn split_pair(labels: &[Label], fiber: &Fiber) -> Option<(Label, Label, Label, bool)> {
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let (x, y) = (labels[i], labels[j]);
        if x.base == y.base && x.primed != y.primed {
            let single = labels[3 - i - j];
            let (p, pp) = if x.primed { (y, x) } else { (x, y) };
            let (ps, pp_pos) = (fiber.position(&single).ok()?, fiber.position(&p).ok()?);
            let pair_first = pp_pos < ps;
            let near = if pair_first { pp } else { p };
            let far = if pair_first { p } else { pp };
            return Some((single, near, far, pair_first));
        }
    }
    None
}

fn expand_macro(kind: MacroKind, side: Side, labels: &[Label], decos: &[Decoration], fiber: &Fiber) -> Result<Vec<Item>, DiskError> {
    let pair_twist = |a: Label, b: Label| -> Result<Item, DiskError> { Ok(Item::path(Side::Below, 1, ordered(a, b, fiber)?, vec![])) };
    Ok(match kind {
        MacroKind::Cube => {
            let (single, near, far, _) = split_pair(labels, fiber).ok_or_else(|| DiskError::Unordered("Z3p needs a pair j,j'".into()))?;
            let cube = sub_path(side, 3, single, near, decos, fiber)?;
            let z = pair_twist(near, far)?;
            vec![cube.clone().conj(vec![z.clone()]), cube.clone(), cube.conj(vec![z.pow(-1)])]
        }
        MacroKind::Double => {
            let (single, near, far, _) = split_pair(labels, fiber).ok_or_else(|| DiskError::Unordered("Z2p needs a pair j,j'".into()))?;
            let (unprimed, primed) = if near.primed { (far, near) } else { (near, far) };
            vec![sub_path(side, 2, single, primed, decos, fiber)?, sub_path(side, 2, single, unprimed, decos, fiber)?]
        }
        MacroKind::Square => {
            let [a, ap, b, bp] = [labels[0], labels[1], labels[2], labels[3]];
            vec![
                sub_path(side, 2, ap, bp, decos, fiber)?,
                sub_path(side, 2, ap, b, decos, fiber)?,
                sub_path(side, 2, a, bp, decos, fiber)?,
                sub_path(side, 2, a, b, decos, fiber)?,
            ]
        }
        MacroKind::Parasitic => {
            let [a, ap, b, bp] = [labels[0], labels[1], labels[2], labels[3]];
            vec![
                sub_path(side, 2, a, b, decos, fiber)?,
                sub_path(side, 2, ap, b, decos, fiber)?,
                sub_path(side, 2, a, bp, decos, fiber)?,
                sub_path(side, 2, ap, bp, decos, fiber)?,
            ]
        }
    })
}

/// `T_j = Z^{(3)}_{(j-1)(j-1)',j} · Z̄_{j,j'}` with a detour around the pair `j-1, (j-1)'`.
pub fn t_macro(j: u32) -> Vec<Item> {
    let prev = Label::plain(j - 1);
    vec![
        Item::new(Expr::Macro {
            kind: MacroKind::Cube,
            side: Side::Below,
            labels: vec![prev, Label::primed(j - 1), Label::plain(j)],
            decos: vec![],
        }),
        Item::path(
            Side::Above,
            1,
            vec![Label::plain(j), Label::primed(j)],
            vec![Decoration::Detour(prev, None), Decoration::Detour(Label::primed(j - 1), None)],
        ),
    ]
}

type Elaborated = Vec<(BraidWord, Item)>;

fn elaborate_expr(expr: &Expr, fiber: &Fiber) -> Result<Elaborated, NotationError> {
    let n = fiber.len();
    match expr {
        Expr::Path { side, power, labels, decos } => {
            let pe = PathExpr { labels: labels.clone(), side: *side, decorations: decos.clone() };
            let sk = compile_path(&pe, fiber).map_err(disk(expr))?;
            let w = sk.block_power(1).map_err(disk(expr))?.pow(*power);
            Ok(vec![(w, Item::new(expr.clone()))])
        }
        Expr::Block { power, side, labels, decos } => {
            let pe = PathExpr { labels: labels.clone(), side: *side, decorations: decos.clone() };
            let sk = compile_path(&pe, fiber).map_err(disk(expr))?;
            Ok(vec![(sk.block_twist(*power).map_err(disk(expr))?, Item::new(expr.clone()))])
        }
        Expr::FullTwist(a, b) => {
            let (pa, pb) = (fiber.position(a).map_err(disk(expr))?, fiber.position(b).map_err(disk(expr))?);
            let d = block_delta(n, pa.min(pb), pa.max(pb))?;
            Ok(vec![(d.pow(2), Item::new(expr.clone()))])
        }
        Expr::Word(letters) => Ok(vec![(BraidWord::new(n, letters.clone())?, Item::new(expr.clone()))]),
        Expr::Identity => Ok(Vec::new()),
        Expr::Group(items) => {
            let mut out = Vec::new();
            for it in items {
                out.extend(elaborate_item(it, fiber)?);
            }
            Ok(out)
        }
        Expr::Macro { kind, side, labels, decos } => {
            let items = expand_macro(*kind, *side, labels, decos, fiber).map_err(disk(expr))?;
            let mut out = Vec::new();
            for it in &items {
                out.extend(elaborate_item(it, fiber)?);
            }
            let degree: i64 = out.iter().map(|(w, _)| w.degree()).sum();
            if degree != kind.degree() {
                return Err(NotationError::Macro { at: expr.to_string(), message: format!("expanded to degree {degree}") });
            }
            Ok(out)
        }
        Expr::T(j) => {
            let mut out = Vec::new();
            for it in &t_macro(*j) {
                out.extend(elaborate_item(it, fiber)?);
            }
            let degree: i64 = out.iter().map(|(w, _)| w.degree()).sum();
            if degree != 10 {
                return Err(NotationError::Macro { at: expr.to_string(), message: format!("expanded to degree {degree}") });
            }
            Ok(out)
        }
    }
}

fn elaborate_item(item: &Item, fiber: &Fiber) -> Result<Elaborated, NotationError> {
    let mut cur = elaborate_expr(&item.expr, fiber)?;
    for op in &item.ops {
        cur = match op {
            Op::Power(k) if cur.len() == 1 => {
                let (w, it) = cur.pop().expect("one factor");
                vec![(w.pow(*k), it.pow(*k))]
            }
            Op::Power(k) if *k > 0 => {
                let mut out = Vec::with_capacity(cur.len() * *k as usize);
                for _ in 0..*k {
                    out.extend(cur.iter().cloned());
                }
                out
            }
            Op::Power(k) => {
                let mut out = Vec::new();
                for _ in 0..k.unsigned_abs() {
                    out.extend(cur.iter().rev().map(|(w, it)| (w.invert(), it.clone().pow(-1))));
                }
                out
            }
            Op::Conj(by) => {
                let h = product(&elaborate(by, fiber)?);
                cur.into_iter()
                    .map(|(w, it)| Ok((w.conjugate(&h)?, it.conj(by.clone()))))
                    .collect::<Result<_, NotationError>>()?
            }
        };
    }
    Ok(cur)
}

fn product(f: &Factorization) -> BraidWord {
    f.product()
}

/// Expands macros and compiles paths. Each factor carries its own
/// single-factor canonical expression.
pub fn elaborate(items: &[Item], fiber: &Fiber) -> Result<Factorization, NotationError> {
    let mut out = Factorization::new(fiber.len());
    for it in items {
        for (w, canon) in elaborate_item(it, fiber)? {
            out.factors.push(Factor::new(w, it.to_string(), canon.to_string()));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- tables

/// A singularity table: the fiber and its rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub fiber: Fiber,
    pub records: Vec<SingularityRecord>,
}

impl Cursor<'_> {
    fn skeleton(&mut self) -> Result<PathExpr, NotationError> {
        self.expect('<')?;
        let labels = self.labels('>')?;
        let (side, decorations) = self.decorations()?;
        Ok(PathExpr { labels, side: side.unwrap_or(Side::Below), decorations })
    }

    fn keyword(&mut self, kw: &str) -> Result<(), NotationError> {
        match self.ident() {
            Some(w) if w == kw => Ok(()),
            _ => self.err(format!("expected `{kw}`")),
        }
    }
}

/// Parses a table: header, then lines such as
/// `row 6,6': <1,3>, <1,4> eps 2 delta Delta2<1,3>`.
/// The motion column is `Delta<…>`, `Delta2<…>`, `IR<m>` or `-`.
pub fn parse_table(text: &str) -> Result<Table, NotationError> {
    let (fiber, offset) = parse_header(text)?;
    let fiber = fiber.ok_or(NotationError::Syntax { line: 1, col: 1, message: "missing `fiber:` header".into() })?;
    let body = &text[offset..];
    let mut c = Cursor::new(body);
    let mut records = Vec::new();
    let wrap = |e: NotationError| located(e, text, offset);
    while c.peek().is_some() {
        let row = (|| -> Result<SingularityRecord, NotationError> {
            c.keyword("row")?;
            c.skip_ws();
            let rest = &c.src[c.pos..];
            let Some(colon) = rest.find(':') else { return c.err("expected `:` after the row label") };
            let label = rest[..colon].trim().to_string();
            c.pos += colon + 1;
            let mut skeletons = vec![c.skeleton()?];
            while c.eat(',') {
                skeletons.push(c.skeleton()?);
            }
            c.keyword("eps")?;
            let epsilon = c.int()? as i32;
            c.keyword("delta")?;
            let delta = if c.eat('-') {
                DeltaSpec::Nothing
            } else {
                match c.ident().as_deref() {
                    Some("IR") => {
                        c.expect('<')?;
                        let m = c.int()?;
                        c.expect('>')?;
                        DeltaSpec::Branch { m: m as usize }
                    }
                    Some(d @ ("Delta" | "Delta2")) => {
                        let power = if d == "Delta" { 1 } else { 2 };
                        let skeleton = c.skeleton_after_name()?;
                        DeltaSpec::Twist { skeleton, power }
                    }
                    _ => return c.err("expected `Delta<…>`, `Delta2<…>`, `IR<m>` or `-`"),
                }
            };
            Ok(SingularityRecord { label, skeletons, epsilon, delta })
        })()
        .map_err(wrap)?;
        records.push(row);
    }
    Ok(Table { fiber, records })
}

impl Cursor<'_> {
    fn skeleton_after_name(&mut self) -> Result<PathExpr, NotationError> {
        self.skeleton()
    }
}

fn render_skeleton(p: &PathExpr) -> String {
    let mut s = format!("<{}>", join_labels(&p.labels));
    let mut parts: Vec<String> = Vec::new();
    if p.side == Side::Above {
        parts.push("above".into());
    }
    parts.extend(p.decorations.iter().map(|d| d.to_string()));
    if !parts.is_empty() {
        s.push_str(&format!("{{{}}}", parts.join(",")));
    }
    s
}

pub fn render_table(t: &Table) -> String {
    let mut out = format!("fiber: {}\n", t.fiber);
    for r in &t.records {
        let sks: Vec<String> = r.skeletons.iter().map(render_skeleton).collect();
        let delta = match &r.delta {
            DeltaSpec::Twist { skeleton, power } => {
                format!("{}{}", if *power == 1 { "Delta" } else { "Delta2" }, render_skeleton(skeleton))
            }
            DeltaSpec::Branch { m } => format!("IR<{m}>"),
            DeltaSpec::Nothing => "-".into(),
        };
        out.push_str(&format!("row {}: {} eps {} delta {}\n", r.label, sks.join(", "), r.epsilon, delta));
    }
    out
}
