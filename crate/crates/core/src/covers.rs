//! Copies of summand covers inside the universal cover of a finite wedge,
//! how the bonding maps move them, and the tree translates they carry.
//!
//! The copy `(k, j, α)` is the set of fiber words `α·g`, `g ∈ G_j`, inside the
//! cover of `X_1 ∨ ... ∨ X_k`. Its tree translate `β ∈ G_j` records which
//! translate `β·T` of a fixed tree of the summand cover is assigned to it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::freeprod::{self, Alphabet, FiniteWord};
use crate::summands::{Elem, Index, WedgeConfig};
use crate::transfinite::{self, Terminal, WordExpr};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CopyId {
    pub level: Index,
    pub summand: Index,
    pub index: FiniteWord,
}

impl CopyId {
    pub fn new(level: Index, summand: Index, index: FiniteWord) -> Self {
        CopyId {
            level,
            summand,
            index,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.summand == 0 || self.summand > self.level {
            return Err(Error::MalformedCopy(format!(
                "summand {} is not in 1..={}",
                self.summand, self.level
            )));
        }
        if let Some(top) = self.index.max_summand() {
            if top > self.level {
                return Err(Error::MalformedCopy(format!(
                    "index uses summand {top} above level {}",
                    self.level
                )));
            }
        }
        if self.index.last().map(|l| l.summand) == Some(self.summand) {
            return Err(Error::MalformedCopy(format!(
                "index ends in a letter of summand {}",
                self.summand
            )));
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, cfg: &'a WedgeConfig) -> impl fmt::Display + 'a {
        CopyDisplay { copy: self, cfg }
    }
}

struct CopyDisplay<'a> {
    copy: &'a CopyId,
    cfg: &'a WedgeConfig,
}

impl fmt::Display for CopyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.copy;
        write!(f, "({}, {}, {})", c.level, c.summand, c.index.display(self.cfg))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BondingImage {
    /// The whole copy folds onto one fiber point one level down.
    Collapsed(FiniteWord),
    /// The copy maps onto `target`, translated by `deck`.
    MappedTo { target: CopyId, deck: Elem },
}

/// Where the bonding map from level `k+1` to `k` sends the copy `c`.
pub fn bonding_image(c: &CopyId, cfg: &WedgeConfig) -> Result<BondingImage> {
    c.validate()?;
    if c.level < 2 {
        return Err(Error::MalformedCopy(
            "level 1 has no bonding map below it".into(),
        ));
    }
    let down = freeprod::bonding(&c.index, c.level, cfg)?;
    if c.summand == c.level {
        return Ok(BondingImage::Collapsed(down));
    }
    let d = freeprod::decompose_nt(&down, c.summand, cfg)?;
    Ok(BondingImage::MappedTo {
        target: CopyId::new(c.level - 1, c.summand, d.prefix),
        deck: d.tail,
    })
}

/// Tree translate of `c`, by descent to the level where the summand first
/// appears. Each MappedTo step with deck `γ` contributes `γ⁻¹` on the left of
/// the translate of its target.
pub fn tree_translate(c: &CopyId, cfg: &WedgeConfig) -> Result<Elem> {
    c.validate()?;
    let j = c.summand;
    let g = cfg.summand(j)?;
    let mut acc = g.identity();
    let mut cur = c.clone();
    while cur.level > j {
        match bonding_image(&cur, cfg)? {
            BondingImage::MappedTo { target, deck } => {
                acc = g.mul(&acc, &g.inv(&deck));
                cur = target;
            }
            BondingImage::Collapsed(_) => unreachable!("summand below level never collapses"),
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationReport {
    pub target: WordExpr,
    pub summand: Index,
    /// `(k, β_k)` for `k = j..=K`.
    pub betas: Vec<(Index, Elem)>,
    pub stable_value: Elem,
    pub stabilization_level: Index,
    pub certified_through: Index,
}

impl StabilizationReport {
    pub fn to_text(&self, cfg: &WedgeConfig) -> String {
        let j = self.summand;
        let mut out = String::new();
        for (k, b) in &self.betas {
            let _ = writeln!(out, "{k} {j}:{}", cfg.format_elem(j, b));
        }
        let _ = writeln!(
            out,
            "stable {j}:{} at {}",
            cfg.format_elem(j, &self.stable_value),
            self.stabilization_level
        );
        out
    }
}

/// Level from which `ρ_k(w)` keeps the same terminal `G_j` letter.
///
/// Past every literal and `j`, a block letter whose summand no other node of
/// `w` touches can never be cancelled, so it splits each projection into two
/// independently reduced halves. Choosing it in the rightmost block node makes
/// everything to its right independent of the level.
pub fn quiescence_level(w: &WordExpr, j: Index, cfg: &WedgeConfig) -> Result<Index> {
    w.validate(cfg)?;
    let lits = w.literal_letters().into_iter().map(|l| l.summand);
    let floor = lits.chain([j]).max().unwrap_or(j);
    let rules = w.rules();
    let Some((last, others)) = rules.split_last() else {
        return Ok(floor);
    };
    const SEARCH: u64 = 4096;
    for n in 0..SEARCH {
        let s = last.summand_at(n);
        if s > Index::MAX as u64 {
            break;
        }
        let s = s as Index;
        if s > floor && others.iter().all(|r| r.block_for(s).is_none()) {
            return Ok(s);
        }
    }
    Err(Error::Uncertifiable(format!(
        "no barrier summand found in the first {SEARCH} blocks of the last block node"
    )))
}

/// Runs the β-sequence of `w` against summand `j` through level `bound` and
/// certifies its stable value.
pub fn stabilize(
    w: &WordExpr,
    j: Index,
    bound: Index,
    cfg: &WedgeConfig,
) -> Result<StabilizationReport> {
    if j == 0 {
        return Err(Error::MalformedCopy("summand indices start at 1".into()));
    }
    if let Terminal::Summand(t) = transfinite::terminal_summand(w, cfg)? {
        if t == j {
            return Err(Error::Terminal(j));
        }
    }
    let quiet = quiescence_level(w, j, cfg)?;
    let needed = quiet.max(j) + 2;
    if bound < needed {
        return Err(Error::BoundTooSmall {
            given: bound,
            needed,
        });
    }
    let mut betas = Vec::new();
    for k in j..=bound {
        let rho = transfinite::project_expr(w, k, cfg)?;
        let d = freeprod::decompose_nt(&rho, j, cfg)?;
        betas.push((k, tree_translate(&CopyId::new(k, j, d.prefix), cfg)?));
    }
    let (_, stable_value) = betas.last().cloned().expect("bound >= j");
    let mut level = bound;
    for (k, b) in betas.iter().rev() {
        if *b != stable_value {
            break;
        }
        level = *k;
    }
    Ok(StabilizationReport {
        target: w.clone(),
        summand: j,
        betas,
        stable_value,
        stabilization_level: level,
        certified_through: bound,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    /// Positions in [`Atlas::copies`].
    pub a: usize,
    pub b: usize,
    pub point: FiniteWord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atlas {
    pub level: Index,
    pub maxlen: usize,
    pub copies: Vec<CopyId>,
    pub attachments: Vec<Attachment>,
}

impl Atlas {
    pub fn position(&self, c: &CopyId) -> Option<usize> {
        self.copies.iter().position(|d| d == c)
    }
}

/// The copy `(j, decompose_nt(w, j).prefix)` containing `w`, for each `j`.
pub fn copies_containing(
    w: &FiniteWord,
    k: Index,
    cfg: &WedgeConfig,
) -> Result<Vec<CopyId>> {
    (1..=k)
        .map(|j| Ok(CopyId::new(k, j, freeprod::decompose_nt(w, j, cfg)?.prefix)))
        .collect()
}

/// Copies with index length at most `maxlen`, attached along shared fiber
/// points of length at most `maxlen`.
///
/// Every fiber point lies in exactly one copy per summand. Rather than joining
/// all of those pairwise (a clique, so cycles once `k ≥ 3`), each point is
/// realized as a star centred on the copy in which it is not the base point:
/// the copy of its last letter, or `(1, e)` for the base word itself.
pub fn build_atlas(
    k: Index,
    maxlen: usize,
    cfg: &WedgeConfig,
    alphabet: &Alphabet,
) -> Result<Atlas> {
    if k == 0 {
        return Err(Error::MalformedCopy("level must be at least 1".into()));
    }
    let mut copies = Vec::new();
    for j in 1..=k {
        for alpha in freeprod::enumerate_nt(k, j, maxlen, cfg, alphabet)? {
            copies.push(CopyId::new(k, j, alpha));
        }
    }
    let pos: BTreeMap<&CopyId, usize> = copies.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut attachments = Vec::new();
    for w in freeprod::enumerate_words(k, maxlen, cfg, alphabet)? {
        let holders = copies_containing(&w, k, cfg)?;
        let centre_summand = w.last().map_or(1, |l| l.summand);
        let centre = pos[&holders[centre_summand as usize - 1]];
        let mut seen = BTreeSet::new();
        for h in &holders {
            let p = pos[h];
            if p != centre && seen.insert(p) {
                let (a, b) = (centre.min(p), centre.max(p));
                attachments.push(Attachment {
                    a,
                    b,
                    point: w.clone(),
                });
            }
        }
    }
    attachments.sort_by(|x, y| (x.a, x.b, &x.point).cmp(&(y.a, y.b, &y.point)));
    Ok(Atlas {
        level: k,
        maxlen,
        copies,
        attachments,
    })
}

/// DOT text: one node per copy labeled `(j, α, β)`, one edge per attachment
/// labeled by the shared point.
pub fn emit_atlas_dot(atlas: &Atlas, cfg: &WedgeConfig) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "graph atlas {{");
    let _ = writeln!(out, "  // level {} maxlen {}", atlas.level, atlas.maxlen);
    for (i, c) in atlas.copies.iter().enumerate() {
        let beta = tree_translate(c, cfg)?;
        let _ = writeln!(
            out,
            "  n{i} [label=\"({}, {}, {})\"];",
            c.summand,
            c.index.display(cfg),
            cfg.format_elem(c.summand, &beta)
        );
    }
    for e in &atlas.attachments {
        let _ = writeln!(
            out,
            "  n{} -- n{} [label=\"{}\"];",
            e.a,
            e.b,
            e.point.display(cfg)
        );
    }
    out.push_str("}\n");
    Ok(out)
}
