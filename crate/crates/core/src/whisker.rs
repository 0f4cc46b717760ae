//! Neighbourhoods of the wedgepoint fiber and the compactness predicate for
//! coefficient families indexed by coset representatives.
//!
//! A basic neighbourhood of `α` at depth `J` contains the words `α·β` where
//! `β` reduces to a word over summands `> J` only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::freeprod::FiniteWord;
use crate::summands::{Index, WedgeConfig};
use crate::syntax::{content_lines, Cursor, Token};
use crate::transfinite::{
    self, equal_up_to, invert_expr, multiply_expr, normalize, parse_expr, parse_rule, Agreement,
    BlockRule, RuleDisplay, Terminal, WordExpr,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberNbhd {
    pub base: WordExpr,
    pub depth: Index,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbhdVerdict {
    Yes,
    NoAtLevel(Index),
    Inconclusive,
}

/// Whether `candidate` lies in the neighbourhood, checked level by level up
/// to `bound`. `NoAtLevel` is definitive. `Yes` means no violation through
/// `bound` and every explicit letter of `base⁻¹·candidate` sits at or below
/// it; otherwise the answer is `Inconclusive`.
pub fn in_nbhd(
    candidate: &WordExpr,
    nbhd: &FiberNbhd,
    bound: Index,
    cfg: &WedgeConfig,
) -> Result<NbhdVerdict> {
    candidate.validate(cfg)?;
    nbhd.base.validate(cfg)?;
    if normalize(candidate, cfg)? == normalize(&nbhd.base, cfg)? {
        return Ok(NbhdVerdict::Yes);
    }
    let d = normalize(
        &multiply_expr(&invert_expr(&nbhd.base, cfg)?, candidate),
        cfg,
    )?;
    for k in 1..=bound {
        let p = transfinite::project_expr(&d, k, cfg)?;
        if p.letters().iter().any(|l| l.summand <= nbhd.depth) {
            return Ok(NbhdVerdict::NoAtLevel(k));
        }
    }
    if d.explicit_max_summand() <= bound {
        Ok(NbhdVerdict::Yes)
    } else {
        Ok(NbhdVerdict::Inconclusive)
    }
}

/// Affine rule `i ↦ a + (i-1)·b` on member positions `i ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexRule {
    pub first: u32,
    pub step: u32,
}

impl IndexRule {
    pub fn constant(a: u32) -> Self {
        IndexRule { first: a, step: 0 }
    }

    pub fn diag(a: u32, b: u32) -> Self {
        IndexRule { first: a, step: b }
    }

    pub fn at(&self, i: u64) -> u64 {
        self.first as u64 + (i - 1) * self.step as u64
    }

    /// Positions `i ≥ 1` with `at(i) == v`: none, one, or all of them.
    fn solve(&self, v: u64) -> Solutions {
        let a = self.first as u64;
        match self.step {
            0 if a == v => Solutions::All,
            0 => Solutions::One(None),
            b => {
                let b = b as u64;
                if v >= a && (v - a) % b == 0 {
                    Solutions::One(Some((v - a) / b + 1))
                } else {
                    Solutions::One(None)
                }
            }
        }
    }

    fn parse(cur: &mut Cursor) -> Result<Self> {
        let pos = cur.pos();
        match cur.next()?.text.as_str() {
            "const" => Ok(IndexRule::constant(cur.next_int("index")?)),
            "diag" => {
                let a = cur.next_int("index")?;
                let b = cur.next_int("step")?;
                Ok(IndexRule::diag(a, b))
            }
            other => Err(Error::parse(
                pos,
                format!("expected `const` or `diag`, found `{other}`"),
            )),
        }
    }
}

enum Solutions {
    One(Option<u64>),
    All,
}

impl fmt::Display for IndexRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.step == 0 {
            write!(f, "const {}", self.first)
        } else {
            write!(f, "diag {} {}", self.first, self.step)
        }
    }
}

/// A coefficient group standing in for a higher homotopy group of a summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoeffGroup {
    Integer,
    Cyclic(u32),
}

impl CoeffGroup {
    pub fn normalize(&self, c: i64) -> i64 {
        match self {
            CoeffGroup::Integer => c,
            CoeffGroup::Cyclic(n) => c.rem_euclid(*n as i64),
        }
    }

    pub fn add(&self, a: i64, b: i64) -> i64 {
        self.normalize(a + b)
    }

    pub fn is_zero(&self, c: i64) -> bool {
        self.normalize(c) == 0
    }

    fn parse(cur: &mut Cursor) -> Result<Self> {
        let pos = cur.pos();
        match cur.next()?.text.as_str() {
            "integer" => Ok(CoeffGroup::Integer),
            "cyclic" => {
                let n: u32 = cur.next_int("order")?;
                if n < 2 {
                    return Err(Error::parse(pos, "cyclic coefficient group needs order at least 2"));
                }
                Ok(CoeffGroup::Cyclic(n))
            }
            other => Err(Error::parse(
                pos,
                format!("expected `integer` or `cyclic`, found `{other}`"),
            )),
        }
    }
}

impl fmt::Display for CoeffGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffGroup::Integer => write!(f, "integer"),
            CoeffGroup::Cyclic(n) => write!(f, "cyclic {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffGroups {
    pub default: CoeffGroup,
    pub explicit: BTreeMap<Index, CoeffGroup>,
}

impl Default for CoeffGroups {
    fn default() -> Self {
        CoeffGroups {
            default: CoeffGroup::Integer,
            explicit: BTreeMap::new(),
        }
    }
}

impl CoeffGroups {
    pub fn at(&self, j: u64) -> CoeffGroup {
        Index::try_from(j)
            .ok()
            .and_then(|j| self.explicit.get(&j).copied())
            .unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CoeffRule {
    Const(i64),
    Cycle(Vec<i64>),
}

impl CoeffRule {
    pub fn raw_at(&self, i: u64) -> i64 {
        match self {
            CoeffRule::Const(c) => *c,
            CoeffRule::Cycle(v) => v[((i - 1) % v.len() as u64) as usize],
        }
    }

    fn period(&self) -> u64 {
        match self {
            CoeffRule::Const(_) => 1,
            CoeffRule::Cycle(v) => v.len() as u64,
        }
    }

    fn map(&self, f: impl Fn(i64) -> i64) -> CoeffRule {
        match self {
            CoeffRule::Const(c) => CoeffRule::Const(f(*c)),
            CoeffRule::Cycle(v) => CoeffRule::Cycle(v.iter().map(|&c| f(c)).collect()),
        }
    }

    fn sum(&self, other: &CoeffRule) -> CoeffRule {
        match (self, other) {
            (CoeffRule::Const(a), CoeffRule::Const(b)) => CoeffRule::Const(a + b),
            _ => {
                let (p, q) = (self.period(), other.period());
                let n = p / gcd(p, q) * q;
                CoeffRule::Cycle((1..=n).map(|i| self.raw_at(i) + other.raw_at(i)).collect())
            }
        }
    }
}

impl fmt::Display for CoeffRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRule::Const(c) => write!(f, "const {c}"),
            CoeffRule::Cycle(v) => {
                write!(f, "cycle")?;
                for c in v {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolatedPoint {
    pub summand: Index,
    pub rep: WordExpr,
    pub coeff: i64,
}

/// Members `rep_i = limit·β_i` in summand `summand(i)`, where `β_i` is block
/// `i-1` of `members` (or empty), meant to lie in the neighbourhood of `limit`
/// at depth `escape(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentTail {
    pub limit: WordExpr,
    pub summand: IndexRule,
    pub escape: IndexRule,
    pub members: Option<BlockRule>,
    pub coeffs: CoeffRule,
}

impl ConvergentTail {
    pub fn member_word(&self, i: u64, cfg: &WedgeConfig) -> Result<WordExpr> {
        Ok(match &self.members {
            None => self.limit.clone(),
            Some(r) => multiply_expr(&self.limit, &WordExpr::Lit(r.letter_at(i - 1, cfg)?)),
        })
    }

    pub fn coeff_at(&self, i: u64, groups: &CoeffGroups) -> i64 {
        groups.at(self.summand.at(i)).normalize(self.coeffs.raw_at(i))
    }

    /// Positions past which the coefficient pattern repeats with period
    /// [`Self::pattern_period`].
    fn pattern_horizon(&self, groups: &CoeffGroups) -> u64 {
        let mut h = 1;
        for &j in groups.explicit.keys() {
            match self.summand.solve(j as u64) {
                Solutions::One(Some(i)) => h = h.max(i),
                _ => {}
            }
        }
        h
    }

    fn pattern_period(&self) -> u64 {
        self.coeffs.period()
    }

    /// First member position at or after `from` with a nonzero coefficient.
    pub fn next_active(&self, from: u64, groups: &CoeffGroups) -> Option<u64> {
        let end = from.max(self.pattern_horizon(groups)) + self.pattern_period();
        (from..=end).find(|&i| self.coeff_at(i, groups) != 0)
    }

    pub fn has_members(&self, groups: &CoeffGroups) -> bool {
        self.next_active(1, groups).is_some()
    }

    fn same_shape(&self, other: &ConvergentTail, cfg: &WedgeConfig) -> Result<bool> {
        Ok(self.summand == other.summand
            && self.escape == other.escape
            && self.members == other.members
            && normalize(&self.limit, cfg)? == normalize(&other.limit, cfg)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportFamily {
    pub isolated: Vec<IsolatedPoint>,
    pub tails: Vec<ConvergentTail>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaElement {
    /// Name of the wedge configuration the representatives are written in.
    pub config_ref: String,
    /// Level through which representatives are compared.
    pub level: Index,
    pub coeff_groups: CoeffGroups,
    pub support: SupportFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// Infinitely many members have pairwise distinct projections at `level`.
    UnboundedProjection { tail: usize, level: Index },
    /// `escape(member + 1) <= escape(member)`.
    EscapeStalls { tail: usize, member: u64, depth: u64 },
    /// The member is outside the neighbourhood of the limit at its declared
    /// depth; the offending letter sits at `level`.
    OutsideNeighbourhood { tail: usize, member: u64, level: u64 },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::UnboundedProjection { tail, level } => {
                write!(f, "tail {tail}: unbounded projection at level {level}")
            }
            Witness::EscapeStalls {
                tail,
                member,
                depth,
            } => write!(
                f,
                "tail {tail}: escape stalls at member {member} (depth {depth})"
            ),
            Witness::OutsideNeighbourhood {
                tail,
                member,
                level,
            } => write!(
                f,
                "tail {tail}: member {member} leaves the neighbourhood at level {level}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageVerdict {
    InImage,
    NotInImage(Witness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub samples: u64,
    /// `(i, reason)` for every failing position.
    pub failures: Vec<(u64, String)>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<u64> {
        self.failures.first().map(|(i, _)| *i)
    }
}

/// Samples members `1..=samples`: each must sit in the neighbourhood of the
/// limit at its declared depth, and the depths must strictly increase.
pub fn check_convergence(
    tail: &ConvergentTail,
    samples: u64,
    cfg: &WedgeConfig,
) -> Result<ConvergenceReport> {
    tail.limit.validate(cfg)?;
    let mut failures = Vec::new();
    for i in 1..=samples {
        let rep = tail.member_word(i, cfg)?;
        let depth = tail.escape.at(i);
        let depth_idx = Index::try_from(depth)
            .map_err(|_| Error::MalformedSupport(format!("depth {depth} overflows")))?;
        let bound = rep.explicit_max_summand().max(depth_idx) + 1;
        let nbhd = FiberNbhd {
            base: tail.limit.clone(),
            depth: depth_idx,
        };
        match in_nbhd(&rep, &nbhd, bound, cfg)? {
            NbhdVerdict::Yes => {}
            NbhdVerdict::NoAtLevel(k) => {
                failures.push((i, format!("outside depth {depth} at level {k}")));
                continue;
            }
            NbhdVerdict::Inconclusive => {
                failures.push((i, format!("membership at depth {depth} undecided")));
                continue;
            }
        }
        if tail.escape.at(i + 1) <= depth {
            failures.push((i, format!("depth {depth} does not increase")));
        }
    }
    Ok(ConvergenceReport { samples, failures })
}

fn check_rep(j: Index, rep: &WordExpr, cfg: &WedgeConfig) -> Result<()> {
    if j == 0 {
        return Err(Error::MalformedSupport("summand indices start at 1".into()));
    }
    cfg.summand(j)?;
    if transfinite::terminal_summand(rep, cfg)? == Terminal::Summand(j) {
        return Err(Error::MalformedSupport(format!(
            "representative {} ends in a letter of summand {j}",
            rep.display(cfg)
        )));
    }
    Ok(())
}

/// Summand of the letter just before the maximal one, in the local normal form.
fn penultimate_summand(w: &WordExpr, cfg: &WedgeConfig) -> Result<Option<Index>> {
    let n = normalize(w, cfg)?;
    let parts: Vec<WordExpr> = match n {
        WordExpr::Concat(p) => p,
        WordExpr::Empty => vec![],
        other => vec![other],
    };
    Ok(match parts.split_last() {
        Some((WordExpr::OmegaStar(r), _)) => Some(r.start + r.step),
        Some((WordExpr::Lit(_), rest)) => match rest.last() {
            Some(WordExpr::Lit(l)) => Some(l.summand),
            Some(WordExpr::OmegaStar(r)) => Some(r.start),
            _ => None,
        },
        _ => None,
    })
}

fn validate_tail(t: &ConvergentTail, groups: &CoeffGroups, cfg: &WedgeConfig) -> Result<()> {
    t.limit.validate(cfg)?;
    if t.summand.step == 0 && t.has_members(groups) {
        return Err(Error::MalformedSupport(format!(
            "every member lies in summand {}, so that summand carries infinitely many",
            t.summand.first
        )));
    }
    if t.summand.first == 0 {
        return Err(Error::MalformedSupport("summand indices start at 1".into()));
    }
    if let CoeffRule::Cycle(v) = &t.coeffs {
        if v.is_empty() {
            return Err(Error::MalformedSupport("empty coefficient cycle".into()));
        }
    }
    if let Some(r) = &t.members {
        r.validate(cfg, false)?;
    }
    // The maximal letter of limit·β_i is that of β_i, of the limit, or the
    // one just before the limit's maximal letter when β_i cancels it. Only
    // finitely many positions can make it coincide with summand(i), unless
    // it does so for all of them; checking those positions plus one full
    // recipe period decides validity for every member.
    let mut targets = BTreeSet::new();
    if let Terminal::Summand(s) = transfinite::terminal_summand(&t.limit, cfg)? {
        targets.insert(s as u64);
    }
    if let Some(s) = penultimate_summand(&t.limit, cfg)? {
        targets.insert(s as u64);
    }
    let mut candidates: BTreeSet<u64> = (1..=4).collect();
    if let Some(r) = &t.members {
        let period = match &r.recipe {
            crate::transfinite::ElemRecipe::Cycle(v) => v.len() as u64,
            _ => 1,
        };
        candidates.extend(1..=period + 3);
        // summand(i) == start + (i-1)·step
        let (a, b) = (t.summand.first as i64, t.summand.step as i64);
        let (c, d) = (r.start as i64, r.step as i64);
        if b != d && (c - a) % (b - d) == 0 {
            let m = (c - a) / (b - d);
            if m >= 0 {
                candidates.insert(m as u64 + 1);
            }
        }
        if r.step == 0 {
            targets.insert(r.start as u64);
        }
    }
    for v in targets {
        if let Solutions::One(Some(i)) = t.summand.solve(v) {
            candidates.insert(i);
        }
    }
    for i in candidates {
        if t.coeff_at(i, groups) == 0 {
            continue;
        }
        let j = Index::try_from(t.summand.at(i))
            .map_err(|_| Error::MalformedSupport("summand index overflows".into()))?;
        check_rep(j, &t.member_word(i, cfg)?, cfg)?;
    }
    Ok(())
}

/// Checks every representative is non-terminal in its summand and every
/// coefficient is nonzero.
pub fn validate(el: &ThetaElement, cfg: &WedgeConfig) -> Result<()> {
    for p in &el.support.isolated {
        p.rep.validate(cfg)?;
        check_rep(p.summand, &p.rep, cfg)?;
        if el.coeff_groups.at(p.summand as u64).is_zero(p.coeff) {
            return Err(Error::MalformedSupport(format!(
                "zero coefficient on {} in summand {}",
                p.rep.display(cfg),
                p.summand
            )));
        }
    }
    for t in &el.support.tails {
        validate_tail(t, &el.coeff_groups, cfg)?;
    }
    Ok(())
}

/// Exact decision for one tail with at least one member.
fn tail_obstruction(idx: usize, t: &ConvergentTail, groups: &CoeffGroups) -> Option<Witness> {
    if let Some(r) = &t.members {
        if r.step == 0 && matches!(r.recipe, crate::transfinite::ElemRecipe::Pow { .. }) {
            return Some(Witness::UnboundedProjection {
                tail: idx,
                level: r.start,
            });
        }
        // member i is outside iff start + (i-1)·step <= escape(i)
        let (s, m) = (r.start as i64, r.step as i64);
        let (a, b) = (t.escape.first as i64, t.escape.step as i64);
        // the bad positions form a prefix, a suffix, everything or nothing
        let bad: Option<(u64, Option<u64>)> = if m > b {
            (s <= a).then(|| (1, Some(1 + ((a - s) / (m - b)) as u64)))
        } else if m == b {
            (s <= a).then_some((1, None))
        } else if s <= a {
            Some((1, None))
        } else {
            let (gap, slope) = (s - a, b - m);
            Some((1 + ((gap + slope - 1) / slope) as u64, None))
        };
        if let Some((i0, end)) = bad {
            let hit = t
                .next_active(i0, groups)
                .filter(|&i| end.map_or(true, |e| i <= e));
            if let Some(i) = hit {
                return Some(Witness::OutsideNeighbourhood {
                    tail: idx,
                    member: i,
                    level: r.summand_at(i - 1),
                });
            }
        }
    }
    if t.escape.step == 0 {
        let i = t.next_active(1, groups).unwrap_or(1);
        return Some(Witness::EscapeStalls {
            tail: idx,
            member: i,
            depth: t.escape.at(i),
        });
    }
    None
}

/// Decides whether the support family has compact closure in the whisker
/// model: finite sets always do, and each tail does exactly when its declared
/// depths strictly increase and every member sits in the neighbourhood of the
/// limit at its depth.
pub fn in_theta_image(el: &ThetaElement, cfg: &WedgeConfig) -> Result<ImageVerdict> {
    validate(el, cfg)?;
    for (idx, t) in el.support.tails.iter().enumerate() {
        if !t.has_members(&el.coeff_groups) {
            continue;
        }
        if let Some(w) = tail_obstruction(idx, t, &el.coeff_groups) {
            return Ok(ImageVerdict::NotInImage(w));
        }
    }
    Ok(ImageVerdict::InImage)
}

/// Number of distinct level-`level` projections of the support, or `None`
/// when it is infinite. Only meaningful for elements in the image or with an
/// [`Witness::UnboundedProjection`].
pub fn projection_count(el: &ThetaElement, level: Index, cfg: &WedgeConfig) -> Result<Option<usize>> {
    let mut seen: BTreeSet<FiniteWord> = BTreeSet::new();
    for p in &el.support.isolated {
        seen.insert(transfinite::project_expr(&p.rep, level, cfg)?);
    }
    for (idx, t) in el.support.tails.iter().enumerate() {
        if !t.has_members(&el.coeff_groups) {
            continue;
        }
        match tail_obstruction(idx, t, &el.coeff_groups) {
            Some(Witness::UnboundedProjection { level: l, .. }) if l <= level => return Ok(None),
            Some(_) if t.escape.step == 0 => return Ok(None),
            _ => {}
        }
        // members whose depth reaches the level project like the limit
        let mut i = 1;
        while t.escape.at(i) < level as u64 {
            if t.coeff_at(i, &el.coeff_groups) != 0 {
                seen.insert(transfinite::project_expr(&t.member_word(i, cfg)?, level, cfg)?);
            }
            i += 1;
        }
        seen.insert(transfinite::project_expr(&t.limit, level, cfg)?);
    }
    Ok(Some(seen.len()))
}

fn same_rep(a: &WordExpr, b: &WordExpr, level: Index, cfg: &WedgeConfig) -> Result<bool> {
    if normalize(a, cfg)? == normalize(b, cfg)? {
        return Ok(true);
    }
    match equal_up_to(a, b, level, cfg)? {
        Agreement::FirstDifference(_) => Ok(false),
        Agreement::AgreeThrough(k) => Err(Error::InconclusiveComparison(k)),
    }
}

fn drop_zero_tails(tails: Vec<ConvergentTail>, groups: &CoeffGroups) -> Vec<ConvergentTail> {
    tails.into_iter().filter(|t| t.has_members(groups)).collect()
}

/// Coefficientwise sum. Isolated representatives are matched by structural
/// identity and told apart by a projection difference through the larger of
/// the two declared levels; tails are merged when their shapes coincide.
pub fn add_theta(a: &ThetaElement, b: &ThetaElement, cfg: &WedgeConfig) -> Result<ThetaElement> {
    if a.config_ref != b.config_ref {
        return Err(Error::Mismatch(format!(
            "configurations `{}` and `{}` differ",
            a.config_ref, b.config_ref
        )));
    }
    if a.coeff_groups != b.coeff_groups {
        return Err(Error::Mismatch("coefficient groups differ".into()));
    }
    let groups = &a.coeff_groups;
    let level = a.level.max(b.level);
    let mut isolated = a.support.isolated.clone();
    for p in &b.support.isolated {
        let mut merged = false;
        for q in isolated.iter_mut().filter(|q| q.summand == p.summand) {
            if same_rep(&q.rep, &p.rep, level, cfg)? {
                q.coeff = groups.at(p.summand as u64).add(q.coeff, p.coeff);
                merged = true;
                break;
            }
        }
        if !merged {
            isolated.push(p.clone());
        }
    }
    isolated.retain(|q| !groups.at(q.summand as u64).is_zero(q.coeff));
    let mut tails = a.support.tails.clone();
    for t in &b.support.tails {
        let mut merged = false;
        for u in tails.iter_mut() {
            if u.same_shape(t, cfg)? {
                u.coeffs = u.coeffs.sum(&t.coeffs);
                merged = true;
                break;
            }
        }
        if !merged {
            tails.push(t.clone());
        }
    }
    Ok(ThetaElement {
        config_ref: a.config_ref.clone(),
        level,
        coeff_groups: groups.clone(),
        support: SupportFamily {
            isolated,
            tails: drop_zero_tails(tails, groups),
        },
    })
}

pub fn neg_theta(a: &ThetaElement) -> ThetaElement {
    let groups = &a.coeff_groups;
    let mut out = a.clone();
    for p in &mut out.support.isolated {
        p.coeff = groups.at(p.summand as u64).normalize(-p.coeff);
    }
    for t in &mut out.support.tails {
        t.coeffs = t.coeffs.map(|c| -c);
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl ThetaElement {
    pub fn new(config_ref: impl Into<String>, level: Index) -> Self {
        ThetaElement {
            config_ref: config_ref.into(),
            level,
            coeff_groups: CoeffGroups::default(),
            support: SupportFamily::default(),
        }
    }

    pub fn parse(text: &str, cfg: &WedgeConfig) -> Result<Self> {
        let mut lines = content_lines(text);
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::parse(crate::error::Pos { line: 1, col: 1 }, "empty theta file"))?;
        let mut cur = Cursor::new(header, hl);
        cur.expect("theta")?;
        let config_ref = cur.next()?.text;
        cur.expect("level")?;
        let level = cur.next_int("level")?;
        cur.finish()?;
        let mut el = ThetaElement::new(config_ref, level);
        let mut default_seen = false;
        for (ln, line) in lines {
            let mut cur = Cursor::new(line, ln);
            let kw = cur.next()?;
            match kw.text.as_str() {
                "coeff" => {
                    let target = cur.next()?;
                    let g = CoeffGroup::parse(&mut cur)?;
                    cur.finish()?;
                    if target.text == "default" {
                        if default_seen {
                            return Err(Error::parse(target.pos, "duplicate default coefficient group"));
                        }
                        default_seen = true;
                        el.coeff_groups.default = g;
                    } else {
                        let j: Index = target
                            .text
                            .parse()
                            .ok()
                            .filter(|&j| j >= 1)
                            .ok_or_else(|| Error::parse(target.pos, "expected a summand index"))?;
                        if el.coeff_groups.explicit.insert(j, g).is_some() {
                            return Err(Error::parse(target.pos, format!("duplicate coefficient group for {j}")));
                        }
                    }
                }
                "iso" => {
                    let j: Index = cur.next_int("summand index")?;
                    let mut toks = Vec::new();
                    while let Some(t) = cur.peek().cloned() {
                        toks.push(t);
                        cur.next()?;
                    }
                    let coeff_tok = toks
                        .pop()
                        .ok_or_else(|| Error::parse(cur.pos(), "expected a coefficient"))?;
                    let coeff = parse_coeff(&coeff_tok)?;
                    let end = coeff_tok.pos;
                    let mut sub = Cursor::from_tokens(toks, end);
                    let rep = parse_expr_seq(&mut sub, cfg, &[])?;
                    el.support.isolated.push(IsolatedPoint {
                        summand: j,
                        rep,
                        coeff: el.coeff_groups.at(j as u64).normalize(coeff),
                    });
                }
                "tail" => el.support.tails.push(parse_tail(&mut cur, cfg)?),
                other => {
                    return Err(Error::parse(
                        kw.pos,
                        format!("expected `coeff`, `iso` or `tail`, found `{other}`"),
                    ))
                }
            }
        }
        // isolated coefficients are reduced once all groups are known
        for p in &mut el.support.isolated {
            p.coeff = el.coeff_groups.at(p.summand as u64).normalize(p.coeff);
        }
        Ok(el)
    }

    pub fn to_text(&self, cfg: &WedgeConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theta {} level {}", self.config_ref, self.level);
        let g = &self.coeff_groups;
        if g.default != CoeffGroup::Integer {
            let _ = writeln!(out, "coeff default {}", g.default);
        }
        for (j, c) in &g.explicit {
            let _ = writeln!(out, "coeff {j} {c}");
        }
        for p in &self.support.isolated {
            let _ = writeln!(out, "iso {} {} {}", p.summand, p.rep.display(cfg), p.coeff);
        }
        for t in &self.support.tails {
            let members = match &t.members {
                None => "e".to_string(),
                Some(r) => RuleDisplay { rule: r, cfg }.to_string(),
            };
            let _ = writeln!(
                out,
                "tail limit {} summand {} escape {} members {} coeffs {}",
                t.limit.display(cfg),
                t.summand,
                t.escape,
                members,
                t.coeffs
            );
        }
        out
    }
}

const TAIL_KEYWORDS: [&str; 4] = ["summand", "escape", "members", "coeffs"];

fn parse_coeff(t: &Token) -> Result<i64> {
    t.text
        .parse()
        .map_err(|_| Error::parse(t.pos, format!("expected a coefficient, found `{}`", t.text)))
}

fn parse_expr_seq(cur: &mut Cursor, cfg: &WedgeConfig, stops: &[&str]) -> Result<WordExpr> {
    let mut parts = Vec::new();
    while let Some(t) = cur.peek_text() {
        if stops.contains(&t) {
            break;
        }
        parts.push(parse_expr(cur, cfg)?);
    }
    match parts.len() {
        0 => Err(Error::parse(cur.pos(), "expected an expression")),
        1 => Ok(parts.pop().unwrap()),
        _ => Ok(WordExpr::Concat(parts)),
    }
}

fn parse_tail(cur: &mut Cursor, cfg: &WedgeConfig) -> Result<ConvergentTail> {
    cur.expect("limit")?;
    let limit = parse_expr_seq(cur, cfg, &TAIL_KEYWORDS)?;
    cur.expect("summand")?;
    let summand = IndexRule::parse(cur)?;
    cur.expect("escape")?;
    let escape = IndexRule::parse(cur)?;
    cur.expect("members")?;
    let members = if cur.peek_text() == Some("e") {
        cur.next()?;
        None
    } else {
        Some(parse_rule(cur, cfg, &["coeffs"])?)
    };
    cur.expect("coeffs")?;
    let pos = cur.pos();
    let coeffs = match cur.next()?.text.as_str() {
        "const" => CoeffRule::Const(parse_coeff(&cur.next()?)?),
        "cycle" => {
            let mut v = Vec::new();
            while !cur.is_done() {
                v.push(parse_coeff(&cur.next()?)?);
            }
            if v.is_empty() {
                return Err(Error::parse(cur.pos(), "empty coefficient cycle"));
            }
            CoeffRule::Cycle(v)
        }
        other => {
            return Err(Error::parse(
                pos,
                format!("expected `const` or `cycle`, found `{other}`"),
            ))
        }
    };
    cur.finish()?;
    Ok(ConvergentTail {
        limit,
        summand,
        escape,
        members,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summands::Elem;

    fn ints() -> WedgeConfig {
        WedgeConfig::integers()
    }

    fn x(text: &str, cfg: &WedgeConfig) -> WordExpr {
        WordExpr::parse(text, cfg).unwrap()
    }

    fn theta(text: &str) -> ThetaElement {
        ThetaElement::parse(text, &ints()).unwrap()
    }

    #[test]
    fn nbhd_examples() {
        let c = ints();
        let a = x("( 1:1 omega[diag 2 1 const 1] )", &c);
        let n = FiberNbhd {
            base: a.clone(),
            depth: 4,
        };
        assert_eq!(in_nbhd(&a, &n, 5, &c).unwrap(), NbhdVerdict::Yes);
        let n = FiberNbhd {
            base: WordExpr::Empty,
            depth: 1,
        };
        assert_eq!(in_nbhd(&x("1:1", &c), &n, 5, &c).unwrap(), NbhdVerdict::NoAtLevel(1));
        let n = FiberNbhd {
            base: WordExpr::Empty,
            depth: 3,
        };
        assert_eq!(in_nbhd(&x("7:1", &c), &n, 10, &c).unwrap(), NbhdVerdict::Yes);
        assert_eq!(in_nbhd(&x("7:1", &c), &n, 5, &c).unwrap(), NbhdVerdict::Inconclusive);
        // a conjugate projects trivially below the depth but is not a tail word
        assert_eq!(
            in_nbhd(&x("1:1 5:1 1:-1", &c), &n, 6, &c).unwrap(),
            NbhdVerdict::NoAtLevel(5)
        );
    }

    fn tail(limit: &str, summand: IndexRule, escape: IndexRule, members: Option<BlockRule>) -> ConvergentTail {
        ConvergentTail {
            limit: x(limit, &ints()),
            summand,
            escape,
            members,
            coeffs: CoeffRule::Const(1),
        }
    }

    #[test]
    fn convergence_examples() {
        let c = ints();
        let t = tail(
            "1:1",
            IndexRule::diag(1, 1),
            IndexRule::diag(2, 1),
            Some(BlockRule::constant(3, 1, Elem::Int(1))),
        );
        assert!(check_convergence(&t, 20, &c).unwrap().passed());
        let t = tail(
            "1:1",
            IndexRule::diag(1, 1),
            IndexRule::diag(1, 1),
            Some(BlockRule::constant(2, 0, Elem::Int(1))),
        );
        assert_eq!(check_convergence(&t, 20, &c).unwrap().first_failure(), Some(2));
        let t = tail("e", IndexRule::diag(1, 1), IndexRule::diag(1, 1), None);
        assert!(check_convergence(&t, 5, &c).unwrap().passed());
    }

    #[test]
    fn image_examples() {
        let c = ints();
        let el = theta("theta earring level 8\niso 1 e 1\niso 2 1:1 1\niso 3 ( 1:1 2:1 ) 2\niso 1 2:5 1\niso 4 e -3\n");
        assert_eq!(in_theta_image(&el, &c).unwrap(), ImageVerdict::InImage);
        let pos = theta("theta earring level 8\ntail limit e summand diag 1 1 escape diag 1 1 members e coeffs const 1\n");
        assert_eq!(in_theta_image(&pos, &c).unwrap(), ImageVerdict::InImage);
        let neg = theta(
            "theta earring level 8\ntail limit e summand diag 2 1 escape const 0 members diag 1 0 pow 1 coeffs const 1\n",
        );
        assert_eq!(
            in_theta_image(&neg, &c).unwrap(),
            ImageVerdict::NotInImage(Witness::UnboundedProjection { tail: 0, level: 1 })
        );
        assert_eq!(projection_count(&pos, 8, &c).unwrap(), Some(1));
        assert_eq!(projection_count(&neg, 1, &c).unwrap(), None);
    }

    #[test]
    fn late_escape_failure_is_located_exactly() {
        let c = ints();
        // member summand 10 + i - 1 against depth 3i - 2: first outside at i = 6
        let el = theta("theta earring level 8\ntail limit 1:1 summand diag 2 1 escape diag 1 3 members diag 10 1 const 1 coeffs const 1\n");
        assert_eq!(
            in_theta_image(&el, &c).unwrap(),
            ImageVerdict::NotInImage(Witness::OutsideNeighbourhood {
                tail: 0,
                member: 6,
                level: 15
            })
        );
        let t = &el.support.tails[0];
        assert_eq!(check_convergence(t, 10, &c).unwrap().first_failure(), Some(6));
    }

    #[test]
    fn malformed_supports() {
        let c = ints();
        for text in [
            "theta earring level 4\niso 2 1:1 2:1 1\n",
            "theta earring level 4\niso 2 1:1 0\n",
            "theta earring level 4\ntail limit e summand const 2 escape diag 1 1 members e coeffs const 1\n",
            // member 2 is 3:1 in summand 3
            "theta earring level 4\ntail limit e summand diag 2 1 escape diag 1 1 members diag 3 0 const 1 coeffs const 1\n",
        ] {
            let el = theta(text);
            assert!(matches!(in_theta_image(&el, &c), Err(Error::MalformedSupport(_))), "{text}");
        }
    }

    #[test]
    fn add_examples() {
        let c = ints();
        let a = theta("theta earring level 6\niso 2 1:1 1\ntail limit e summand diag 1 1 escape diag 1 1 members e coeffs cycle 1 2\n");
        let sum = add_theta(&a, &neg_theta(&a), &c).unwrap();
        assert!(sum.support.isolated.is_empty() && sum.support.tails.is_empty());
        let b = theta("theta earring level 6\niso 3 1:1 1\n");
        let u = add_theta(&a, &b, &c).unwrap();
        assert_eq!(u.support.isolated.len(), 2);
        let d = add_theta(&b, &b, &c).unwrap();
        assert_eq!(d.support.isolated[0].coeff, 2);
        // agree through the level without being structurally equal
        let p = theta("theta earring level 6\niso 1 9:1 1\n");
        let q = theta("theta earring level 6\niso 1 9:2 1\n");
        assert!(matches!(add_theta(&p, &q, &c), Err(Error::InconclusiveComparison(6))));
        let other = theta("theta rp level 6\niso 3 1:1 1\n");
        assert!(matches!(add_theta(&a, &other, &c), Err(Error::Mismatch(_))));
    }

    #[test]
    fn cyclic_coefficients_cancel() {
        let c = ints();
        let a = theta("theta earring level 6\ncoeff default cyclic 2\niso 2 1:1 1\ntail limit e summand diag 1 1 escape diag 1 1 members e coeffs const 1\n");
        let s = add_theta(&a, &a, &c).unwrap();
        assert!(s.support.isolated.is_empty() && s.support.tails.is_empty());
    }

    #[test]
    fn text_round_trips() {
        let c = ints();
        let text = "theta earring level 7\ncoeff default cyclic 3\ncoeff 2 integer\niso 2 ( 1:1 omega[diag 3 1 const 1] ) 4\ntail limit ( 1:1 3:2 ) summand diag 2 2 escape diag 3 1 members diag 4 1 cycle 1 -1 coeffs cycle 1 0 2\n";
        let el = theta(text);
        assert_eq!(el.to_text(&c), text);
        assert_eq!(theta(&el.to_text(&c)), el);
        assert!(ThetaElement::parse("theta x level 3\ntail limit e summand diag 1 1\n", &c).is_err());
    }
}
