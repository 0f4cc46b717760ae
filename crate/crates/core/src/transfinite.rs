//! Closed expressions for transfinite words with finitely many letters per
//! summand, their projections to every finite level, and terminal analysis.
//!
//! Grammar (one expression per line, juxtaposition concatenates):
//!
//! ```text
//! expr   := `e` | `j:g` | `(` expr* `)` | `omega[` rule `]` | `omega*[` rule `]`
//! rule   := `diag` start step recipe [`inv`]
//! recipe := `const` g | `cycle` g1 .. gm | `pow` g [first]
//! ```
//!
//! Block `n` of `diag s t r` is the single letter `(s + n*t : r(n))`. `omega`
//! lays the blocks out as `0, 1, 2, ...` and `omega*` as `..., 2, 1, 0`.

use std::fmt;

use crate::error::{Error, Result};
use crate::freeprod::{self, parse_letter_token, FiniteWord, Letter};
use crate::summands::{Elem, Index, SummandSpec, WedgeConfig};
use crate::syntax::Cursor;

/// Element of block `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ElemRecipe {
    Const(Elem),
    Cycle(Vec<Elem>),
    /// `base^(first + n)`; only valid in summands where `base` has infinite order.
    Pow { base: Elem, first: i64 },
}

impl ElemRecipe {
    fn period(&self) -> u64 {
        match self {
            ElemRecipe::Cycle(v) => v.len() as u64,
            _ => 1,
        }
    }

    fn raw_at(&self, n: u64, g: &SummandSpec) -> Elem {
        match self {
            ElemRecipe::Const(a) => a.clone(),
            ElemRecipe::Cycle(v) => v[(n % v.len() as u64) as usize].clone(),
            ElemRecipe::Pow { base, first } => g.pow(base, first + n as i64),
        }
    }

    fn shifted(&self) -> ElemRecipe {
        match self {
            ElemRecipe::Const(a) => ElemRecipe::Const(a.clone()),
            ElemRecipe::Cycle(v) => {
                let mut v = v.clone();
                v.rotate_left(1);
                ElemRecipe::Cycle(v)
            }
            ElemRecipe::Pow { base, first } => ElemRecipe::Pow {
                base: base.clone(),
                first: first + 1,
            },
        }
    }
}

/// An arithmetic progression of single-letter blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockRule {
    pub start: Index,
    pub step: u32,
    pub recipe: ElemRecipe,
    /// Each block letter is replaced by its inverse in its own summand.
    pub inverted: bool,
}

impl BlockRule {
    pub fn diag(start: Index, step: u32, recipe: ElemRecipe) -> Self {
        BlockRule {
            start,
            step,
            recipe,
            inverted: false,
        }
    }

    pub fn constant(start: Index, step: u32, g: Elem) -> Self {
        Self::diag(start, step, ElemRecipe::Const(g))
    }

    pub fn summand_at(&self, n: u64) -> u64 {
        self.start as u64 + n * self.step as u64
    }

    /// Block indices whose summand is at most `k`, in increasing order.
    /// Only meaningful for rules with a positive step.
    pub fn blocks_upto(&self, k: Index) -> std::ops::Range<u64> {
        if self.start > k || self.step == 0 {
            return 0..0;
        }
        0..((k - self.start) / self.step) as u64 + 1
    }

    /// The block index hitting summand `j`, if any.
    pub fn block_for(&self, j: Index) -> Option<u64> {
        if j < self.start {
            return None;
        }
        let d = (j - self.start) as u64;
        match self.step {
            0 => (d == 0).then_some(0),
            t => (d % t as u64 == 0).then_some(d / t as u64),
        }
    }

    pub fn letter_at(&self, n: u64, cfg: &WedgeConfig) -> Result<Letter> {
        let j64 = self.summand_at(n);
        let j = Index::try_from(j64)
            .map_err(|_| Error::MalformedRule(format!("summand index {j64} overflows")))?;
        let g = cfg.summand(j)?;
        let a = self.recipe.raw_at(n, g);
        let a = if self.inverted { g.inv(&a) } else { a };
        Ok(Letter::new(j, a))
    }

    /// Distinct groups met by the progression: every explicit summand it hits
    /// and, for infinite progressions, the default.
    fn hit_groups<'a>(&self, cfg: &'a WedgeConfig) -> Result<Vec<(Index, &'a SummandSpec)>> {
        let mut out = Vec::new();
        if self.step == 0 {
            out.push((self.start, cfg.summand(self.start)?));
            return Ok(out);
        }
        for (&j, g) in cfg.explicit() {
            if self.block_for(j).is_some() {
                out.push((j, g));
            }
        }
        // The progression is infinite, so it hits some index without an
        // explicit entry; find one to report errors against.
        let mut n = 0u64;
        let free = loop {
            let j = self.summand_at(n);
            if j > Index::MAX as u64 {
                break None;
            }
            if !cfg.explicit().contains_key(&(j as Index)) {
                break Some(j as Index);
            }
            n += 1;
        };
        if let Some(j) = free {
            out.push((j, cfg.summand(j)?));
        }
        Ok(out)
    }

    /// Checks that every block letter is a valid non-identity element.
    /// Expression rules additionally need a positive step.
    pub fn validate(&self, cfg: &WedgeConfig, need_step: bool) -> Result<()> {
        if self.start == 0 {
            return Err(Error::MalformedRule("start index must be at least 1".into()));
        }
        if need_step && self.step == 0 {
            return Err(Error::MalformedRule(
                "step 0 would place infinitely many letters in one summand".into(),
            ));
        }
        if let ElemRecipe::Cycle(v) = &self.recipe {
            if v.is_empty() {
                return Err(Error::MalformedRule("empty cycle".into()));
            }
        }
        for (j, g) in self.hit_groups(cfg)? {
            let bad = |msg: String| Err(Error::MalformedRule(format!("summand {j} ({g}): {msg}")));
            match &self.recipe {
                ElemRecipe::Const(a) => {
                    if !g.is_valid(a) {
                        return bad(format!("{a:?} is not an element"));
                    }
                    if g.is_identity(a) {
                        return bad("recipe element is the identity".into());
                    }
                }
                ElemRecipe::Cycle(v) => {
                    for a in v {
                        if !g.is_valid(a) {
                            return bad(format!("{a:?} is not an element"));
                        }
                        if g.is_identity(a) {
                            return bad("recipe element is the identity".into());
                        }
                    }
                }
                ElemRecipe::Pow { base, first } => {
                    if !g.is_valid(base) {
                        return bad(format!("{base:?} is not an element"));
                    }
                    if !g.has_infinite_order(base) {
                        return bad("pow needs a base of infinite order".into());
                    }
                    if *first < 1 {
                        return bad("pow exponents must start at 1 or above".into());
                    }
                }
            }
        }
        Ok(())
    }

    /// The same progression with block 0 removed.
    pub fn shifted(&self) -> BlockRule {
        BlockRule {
            start: self.start + self.step,
            step: self.step,
            recipe: self.recipe.shifted(),
            inverted: self.inverted,
        }
    }

    /// Blockwise inverse. Written with explicit inverse elements when all hit
    /// groups agree on them, otherwise via the `inv` flag.
    pub fn inverse(&self, cfg: &WedgeConfig) -> Result<BlockRule> {
        let groups = self.hit_groups(cfg)?;
        let invert_all = |a: &Elem| -> Option<Elem> {
            let mut out: Option<Elem> = None;
            for (_, g) in &groups {
                let b = g.inv(a);
                match &out {
                    None => out = Some(b),
                    Some(prev) if *prev == b => {}
                    Some(_) => return None,
                }
            }
            out
        };
        let plain = match &self.recipe {
            ElemRecipe::Const(a) => invert_all(a).map(ElemRecipe::Const),
            ElemRecipe::Cycle(v) => v
                .iter()
                .map(invert_all)
                .collect::<Option<Vec<_>>>()
                .map(ElemRecipe::Cycle),
            ElemRecipe::Pow { base, first } => invert_all(base).map(|b| ElemRecipe::Pow {
                base: b,
                first: *first,
            }),
        };
        Ok(match plain {
            Some(recipe) => BlockRule {
                recipe,
                ..self.clone()
            },
            None => BlockRule {
                inverted: !self.inverted,
                ..self.clone()
            },
        })
    }
}

/// A transfinite word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WordExpr {
    Empty,
    Lit(Letter),
    Concat(Vec<WordExpr>),
    /// Blocks `0, 1, 2, ...`; no maximal letter.
    Omega(BlockRule),
    /// Blocks `..., 2, 1, 0`; block 0 is the maximal letter.
    OmegaStar(BlockRule),
}

/// Result of comparing projections level by level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    /// Projections agree at every level up to and including the bound.
    AgreeThrough(Index),
    FirstDifference(Index),
}

/// Summand of the order-maximal letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    /// The index order has no maximum (a trailing `omega`).
    NoMaximal,
    Summand(Index),
    EmptyWord,
}

impl WordExpr {
    pub fn lit(j: Index, g: Elem) -> Self {
        WordExpr::Lit(Letter::new(j, g))
    }

    pub fn int(j: Index, x: i64) -> Self {
        WordExpr::lit(j, Elem::Int(x))
    }

    pub fn concat(parts: impl IntoIterator<Item = WordExpr>) -> Self {
        WordExpr::Concat(parts.into_iter().collect())
    }

    pub fn from_word(w: &FiniteWord) -> Self {
        match w.letters() {
            [] => WordExpr::Empty,
            [l] => WordExpr::Lit(l.clone()),
            ls => WordExpr::Concat(ls.iter().cloned().map(WordExpr::Lit).collect()),
        }
    }

    pub fn validate(&self, cfg: &WedgeConfig) -> Result<()> {
        match self {
            WordExpr::Empty => Ok(()),
            WordExpr::Lit(l) => {
                if cfg.is_identity(l.summand, &l.elem)? {
                    Err(Error::MalformedRule(format!(
                        "literal {} is the identity",
                        l.display(cfg)
                    )))
                } else {
                    Ok(())
                }
            }
            WordExpr::Concat(parts) => parts.iter().try_for_each(|p| p.validate(cfg)),
            WordExpr::Omega(r) | WordExpr::OmegaStar(r) => r.validate(cfg, true),
        }
    }

    /// Literal letters in order, ignoring blocks.
    pub fn literal_letters(&self) -> Vec<&Letter> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let WordExpr::Lit(l) = e {
                out.push(l);
            }
        });
        out
    }

    /// Every block rule in order.
    pub fn rules(&self) -> Vec<&BlockRule> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let WordExpr::Omega(r) | WordExpr::OmegaStar(r) = e {
                out.push(r);
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a WordExpr)) {
        f(self);
        if let WordExpr::Concat(parts) = self {
            for p in parts {
                p.walk(f);
            }
        }
    }

    /// Largest summand written explicitly: literal summands and block starts.
    pub fn explicit_max_summand(&self) -> Index {
        let lits = self.literal_letters().into_iter().map(|l| l.summand);
        let starts = self.rules().into_iter().map(|r| r.start);
        lits.chain(starts).max().unwrap_or(0)
    }

    fn raw_letters(&self, k: Index, cfg: &WedgeConfig, out: &mut Vec<Letter>) -> Result<()> {
        match self {
            WordExpr::Empty => {}
            WordExpr::Lit(l) => {
                if l.summand <= k {
                    out.push(l.clone());
                }
            }
            WordExpr::Concat(parts) => {
                for p in parts {
                    p.raw_letters(k, cfg, out)?;
                }
            }
            WordExpr::Omega(r) => {
                for n in r.blocks_upto(k) {
                    out.push(r.letter_at(n, cfg)?);
                }
            }
            WordExpr::OmegaStar(r) => {
                for n in r.blocks_upto(k).rev() {
                    out.push(r.letter_at(n, cfg)?);
                }
            }
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, cfg: &'a WedgeConfig) -> impl fmt::Display + 'a {
        ExprDisplay { expr: self, cfg }
    }

    /// Parses one line of expression syntax; several top-level expressions
    /// are concatenated.
    pub fn parse(text: &str, cfg: &WedgeConfig) -> Result<Self> {
        Self::parse_line(text, 1, cfg)
    }

    pub fn parse_line(text: &str, line_no: usize, cfg: &WedgeConfig) -> Result<Self> {
        let mut cur = Cursor::new(text, line_no);
        let mut parts = Vec::new();
        while !cur.is_done() {
            parts.push(parse_expr(&mut cur, cfg)?);
        }
        match parts.len() {
            0 => Err(Error::parse(cur.pos(), "expected an expression")),
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(WordExpr::Concat(parts)),
        }
    }
}

/// Parses one expression at the cursor.
pub fn parse_expr(cur: &mut Cursor, cfg: &WedgeConfig) -> Result<WordExpr> {
    let tok = cur.next()?;
    match tok.text.as_str() {
        "e" => Ok(WordExpr::Empty),
        "(" => {
            let mut parts = Vec::new();
            loop {
                match cur.peek_text() {
                    Some(")") => {
                        cur.next()?;
                        break;
                    }
                    Some(_) => parts.push(parse_expr(cur, cfg)?),
                    None => return Err(Error::parse(cur.pos(), "unclosed `(`")),
                }
            }
            Ok(WordExpr::Concat(parts))
        }
        "omega" | "omega*" => {
            cur.expect("[")?;
            let rule = parse_rule(cur, cfg, &["]"])?;
            cur.expect("]")?;
            if tok.text == "omega" {
                Ok(WordExpr::Omega(rule))
            } else {
                Ok(WordExpr::OmegaStar(rule))
            }
        }
        ")" | "[" | "]" => Err(Error::parse(tok.pos, format!("unexpected `{}`", tok.text))),
        text => Ok(WordExpr::Lit(parse_letter_token(text, tok.pos, cfg)?)),
    }
}

/// Parses `diag <start> <step> <recipe> [inv]`. A cycle runs until one of
/// `stops`, `inv`, or the end of the line.
pub fn parse_rule(cur: &mut Cursor, cfg: &WedgeConfig, stops: &[&str]) -> Result<BlockRule> {
    cur.expect("diag")?;
    let spos = cur.pos();
    let start: Index = cur.next_int("start index")?;
    if start == 0 {
        return Err(Error::parse(spos, "start index must be at least 1"));
    }
    let step: u32 = cur.next_int("step")?;
    let elem = |cur: &mut Cursor| -> Result<Elem> {
        let t = cur.next()?;
        cfg.parse_elem(start, &t.text)
            .map_err(|e| Error::parse(t.pos, e.to_string()))
    };
    let kind = cur.next()?;
    let recipe = match kind.text.as_str() {
        "const" => ElemRecipe::Const(elem(cur)?),
        "cycle" => {
            let mut v = Vec::new();
            while let Some(t) = cur.peek_text() {
                if t == "inv" || stops.contains(&t) {
                    break;
                }
                v.push(elem(cur)?);
            }
            if v.is_empty() {
                return Err(Error::parse(cur.pos(), "empty cycle"));
            }
            ElemRecipe::Cycle(v)
        }
        "pow" => {
            let base = elem(cur)?;
            let first = match cur.peek_text() {
                Some(t) if t.parse::<i64>().is_ok() => cur.next_int("exponent")?,
                _ => 1,
            };
            ElemRecipe::Pow { base, first }
        }
        other => {
            return Err(Error::parse(
                kind.pos,
                format!("expected `const`, `cycle` or `pow`, found `{other}`"),
            ))
        }
    };
    let inverted = if cur.peek_text() == Some("inv") {
        cur.next()?;
        true
    } else {
        false
    };
    Ok(BlockRule {
        start,
        step,
        recipe,
        inverted,
    })
}

pub(crate) struct RuleDisplay<'a> {
    pub rule: &'a BlockRule,
    pub cfg: &'a WedgeConfig,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.rule;
        let el = |a: &Elem| self.cfg.format_elem(r.start, a);
        write!(f, "diag {} {} ", r.start, r.step)?;
        match &r.recipe {
            ElemRecipe::Const(a) => write!(f, "const {}", el(a))?,
            ElemRecipe::Cycle(v) => {
                write!(f, "cycle")?;
                for a in v {
                    write!(f, " {}", el(a))?;
                }
            }
            ElemRecipe::Pow { base, first } => {
                write!(f, "pow {}", el(base))?;
                if *first != 1 {
                    write!(f, " {first}")?;
                }
            }
        }
        if r.inverted {
            write!(f, " inv")?;
        }
        Ok(())
    }
}

struct ExprDisplay<'a> {
    expr: &'a WordExpr,
    cfg: &'a WedgeConfig,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cfg = self.cfg;
        match self.expr {
            WordExpr::Empty => write!(f, "e"),
            WordExpr::Lit(l) => write!(f, "{}", l.display(cfg)),
            WordExpr::Concat(parts) => {
                write!(f, "(")?;
                for p in parts {
                    write!(f, " {}", p.display(cfg))?;
                }
                write!(f, " )")
            }
            WordExpr::Omega(r) => write!(f, "omega[{}]", RuleDisplay { rule: r, cfg }),
            WordExpr::OmegaStar(r) => write!(f, "omega*[{}]", RuleDisplay { rule: r, cfg }),
        }
    }
}

/// Reduced projection onto `G_1 * ... * G_k`.
pub fn project_expr(w: &WordExpr, k: Index, cfg: &WedgeConfig) -> Result<FiniteWord> {
    w.validate(cfg)?;
    project_unchecked(w, k, cfg)
}

pub(crate) fn project_unchecked(w: &WordExpr, k: Index, cfg: &WedgeConfig) -> Result<FiniteWord> {
    let mut raw = Vec::new();
    w.raw_letters(k, cfg, &mut raw)?;
    freeprod::reduce(&raw, cfg)
}

/// Compares projections at every level `1..=bound`.
pub fn equal_up_to(
    w: &WordExpr,
    v: &WordExpr,
    bound: Index,
    cfg: &WedgeConfig,
) -> Result<Agreement> {
    w.validate(cfg)?;
    v.validate(cfg)?;
    for k in 1..=bound {
        if project_unchecked(w, k, cfg)? != project_unchecked(v, k, cfg)? {
            return Ok(Agreement::FirstDifference(k));
        }
    }
    Ok(Agreement::AgreeThrough(bound))
}

/// Equality of local normal forms. Sound for equality, not complete.
pub fn structurally_equal(w: &WordExpr, v: &WordExpr, cfg: &WedgeConfig) -> Result<bool> {
    Ok(normalize(w, cfg)? == normalize(v, cfg)?)
}

pub fn multiply_expr(u: &WordExpr, v: &WordExpr) -> WordExpr {
    let mut parts = Vec::new();
    for x in [u, v] {
        match x {
            WordExpr::Concat(ps) => parts.extend(ps.iter().cloned()),
            WordExpr::Empty => {}
            other => parts.push(other.clone()),
        }
    }
    WordExpr::Concat(parts)
}

/// Reverses the order and inverts every letter.
pub fn invert_expr(u: &WordExpr, cfg: &WedgeConfig) -> Result<WordExpr> {
    Ok(match u {
        WordExpr::Empty => WordExpr::Empty,
        WordExpr::Lit(l) => WordExpr::Lit(l.inverse(cfg)?),
        WordExpr::Concat(parts) => WordExpr::Concat(
            parts
                .iter()
                .rev()
                .map(|p| invert_expr(p, cfg))
                .collect::<Result<_>>()?,
        ),
        WordExpr::Omega(r) => WordExpr::OmegaStar(r.inverse(cfg)?),
        WordExpr::OmegaStar(r) => WordExpr::Omega(r.inverse(cfg)?),
    })
}

/// The finitely many `G_j` letters of `w`, in order.
pub fn letters_in_summand(w: &WordExpr, j: Index, cfg: &WedgeConfig) -> Result<Vec<Elem>> {
    w.validate(cfg)?;
    let mut out = Vec::new();
    collect_in_summand(w, j, cfg, &mut out)?;
    Ok(out)
}

fn collect_in_summand(w: &WordExpr, j: Index, cfg: &WedgeConfig, out: &mut Vec<Elem>) -> Result<()> {
    match w {
        WordExpr::Empty => {}
        WordExpr::Lit(l) => {
            if l.summand == j {
                out.push(l.elem.clone());
            }
        }
        WordExpr::Concat(parts) => {
            for p in parts {
                collect_in_summand(p, j, cfg, out)?;
            }
        }
        WordExpr::Omega(r) | WordExpr::OmegaStar(r) => {
            if let Some(n) = r.block_for(j) {
                out.push(r.letter_at(n, cfg)?.elem);
            }
        }
    }
    Ok(())
}

/// Summand of the maximal letter of the local normal form.
pub fn terminal_summand(w: &WordExpr, cfg: &WedgeConfig) -> Result<Terminal> {
    let n = normalize(w, cfg)?;
    Ok(terminal_of_normal(&n))
}

fn terminal_of_normal(n: &WordExpr) -> Terminal {
    match n {
        WordExpr::Empty => Terminal::EmptyWord,
        WordExpr::Lit(l) => Terminal::Summand(l.summand),
        WordExpr::Omega(_) => Terminal::NoMaximal,
        WordExpr::OmegaStar(r) => Terminal::Summand(r.start),
        WordExpr::Concat(parts) => parts
            .last()
            .map(terminal_of_normal)
            .unwrap_or(Terminal::EmptyWord),
    }
}

#[derive(Debug, Clone)]
enum Seg {
    Letters(Vec<Letter>),
    Omega(BlockRule),
    OmegaStar(BlockRule),
}

/// Local normal form: nested concatenations flattened, adjacent letters
/// merged, and blocks peeled off wherever they touch a neighbouring letter.
/// Cancellations that need infinitely many steps at once (an `omega` or
/// `omega*` node next to its own inverse) are only removed when the two
/// progressions annihilate blockwise.
pub fn normalize(w: &WordExpr, cfg: &WedgeConfig) -> Result<WordExpr> {
    w.validate(cfg)?;
    let mut out: Vec<Seg> = Vec::new();
    push_expr(&mut out, w, cfg)?;
    let mut parts = Vec::new();
    for s in out {
        match s {
            Seg::Letters(ls) => parts.extend(ls.into_iter().map(WordExpr::Lit)),
            Seg::Omega(r) => parts.push(WordExpr::Omega(r)),
            Seg::OmegaStar(r) => parts.push(WordExpr::OmegaStar(r)),
        }
    }
    Ok(match parts.len() {
        0 => WordExpr::Empty,
        1 => parts.pop().unwrap(),
        _ => WordExpr::Concat(parts),
    })
}

fn push_expr(out: &mut Vec<Seg>, w: &WordExpr, cfg: &WedgeConfig) -> Result<()> {
    match w {
        WordExpr::Empty => Ok(()),
        WordExpr::Lit(l) => push_lit(out, l.clone(), cfg),
        WordExpr::Concat(parts) => parts.iter().try_for_each(|p| push_expr(out, p, cfg)),
        WordExpr::OmegaStar(r) => {
            if let Some(Seg::Omega(prev)) = out.last() {
                if let Some(rest) = omega_pair_remainder(prev, r, cfg)? {
                    out.pop();
                    return rest.into_iter().try_for_each(|l| push_lit(out, l, cfg));
                }
            }
            out.push(Seg::OmegaStar(r.clone()));
            Ok(())
        }
        WordExpr::Omega(r) => push_omega(out, r.clone(), cfg),
    }
}

/// Summand of the last letter of the segment list, when it has one.
fn last_summand(out: &[Seg]) -> Option<Index> {
    match out.last()? {
        Seg::Letters(ls) => ls.last().map(|l| l.summand),
        Seg::OmegaStar(r) => Some(r.start),
        Seg::Omega(_) => None,
    }
}

fn push_lit(out: &mut Vec<Seg>, l: Letter, cfg: &WedgeConfig) -> Result<()> {
    let g = cfg.summand(l.summand)?;
    if g.is_identity(&l.elem) {
        return Ok(());
    }
    if last_summand(out) == Some(l.summand) {
        if let Some(Seg::OmegaStar(r)) = out.last() {
            let b0 = r.letter_at(0, cfg)?;
            let rest = r.shifted();
            *out.last_mut().unwrap() = Seg::OmegaStar(rest);
            out.push(Seg::Letters(vec![b0]));
        }
    }
    match out.last_mut() {
        Some(Seg::Letters(ls)) => {
            match ls.last_mut() {
                Some(top) if top.summand == l.summand => {
                    let prod = g.mul(&top.elem, &l.elem);
                    if g.is_identity(&prod) {
                        ls.pop();
                        if ls.is_empty() {
                            out.pop();
                        }
                    } else {
                        top.elem = prod;
                    }
                }
                _ => ls.push(l),
            }
        }
        _ => out.push(Seg::Letters(vec![l])),
    }
    Ok(())
}

fn push_omega(out: &mut Vec<Seg>, mut r: BlockRule, cfg: &WedgeConfig) -> Result<()> {
    // Each iteration consumes a finite letter or, at an omega*/omega junction
    // with matching progressions, a pair of blocks; the annihilation test
    // guarantees a mismatch within one recipe period.
    while last_summand(out) == Some(r.start) {
        if let Some(Seg::OmegaStar(prev)) = out.last() {
            if prev.step == r.step && annihilates(prev, &r, cfg)? {
                out.pop();
                return Ok(());
            }
        }
        let b0 = r.letter_at(0, cfg)?;
        let before = out.len();
        let merged_into_nonidentity = {
            push_lit(out, b0, cfg)?;
            last_summand(out) == Some(r.start) && out.len() >= before
        };
        r = r.shifted();
        if merged_into_nonidentity {
            break;
        }
    }
    out.push(Seg::Omega(r));
    Ok(())
}

/// `omega[a] omega*[b]` projects to `a_0..a_N b_M..b_0`, so when one progression
/// continues the other and the overlapping blocks cancel pairwise, only the
/// leading blocks of the lower one survive. Returns them in word order.
fn omega_pair_remainder(a: &BlockRule, b: &BlockRule, cfg: &WedgeConfig) -> Result<Option<Vec<Letter>>> {
    if a.step != b.step || a.step == 0 {
        return Ok(None);
    }
    let (lo, hi) = if a.start <= b.start { (a, b) } else { (b, a) };
    if (hi.start - lo.start) % lo.step != 0 {
        return Ok(None);
    }
    let m = (hi.start - lo.start) / lo.step;
    let mut tail = lo.clone();
    for _ in 0..m {
        tail = tail.shifted();
    }
    let (x, y) = if a.start <= b.start { (&tail, hi) } else { (hi, &tail) };
    if !annihilates(x, y, cfg)? {
        return Ok(None);
    }
    let mut rest = (0..m as u64)
        .map(|n| lo.letter_at(n, cfg))
        .collect::<Result<Vec<_>>>()?;
    if a.start > b.start {
        rest.reverse();
    }
    Ok(Some(rest))
}

/// Whether blocks `a_n·b_n` are trivial for every `n`.
fn annihilates(a: &BlockRule, b: &BlockRule, cfg: &WedgeConfig) -> Result<bool> {
    let pa = a.recipe.period();
    let pb = b.recipe.period();
    let period = pa / gcd(pa, pb) * pb;
    // Powers are affine in the exponent, so three agreeing blocks settle it.
    let checks = period.max(3);
    for n in 0..checks {
        let x = a.letter_at(n, cfg)?;
        let y = b.letter_at(n, cfg)?;
        let g = cfg.summand(x.summand)?;
        if !g.is_identity(&g.mul(&x.elem, &y.elem)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
