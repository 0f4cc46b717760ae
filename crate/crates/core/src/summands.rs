//! Summand groups and the wedge configuration.
//!
//! Every summand is a black-box group with canonical element encodings, so
//! equality of elements is structural equality of [`Elem`] values.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Pos, Result};
use crate::syntax::{content_lines, Cursor};

/// Summand index `j`, always at least 1.
pub type Index = u32;

/// Canonical element encoding. Which variant is valid depends on the summand.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    /// Integers, and residues `0..n` for cyclic groups.
    Int(i64),
    /// Elements of the integer lattice of rank 2.
    Pair(i64, i64),
    /// Index into the element list of a multiplication table.
    Sym(u16),
}

/// A finite group given by its full multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableGroup {
    source: String,
    names: Vec<String>,
    mul: Vec<u16>,
    identity: u16,
    inverse: Vec<u16>,
}

impl TableGroup {
    /// Builds and exhaustively checks a table. `rows[a][b]` is the index of `a·b`.
    pub fn new(source: impl Into<String>, names: Vec<String>, rows: Vec<Vec<u16>>) -> Result<Self> {
        let n = names.len();
        if n < 2 {
            return Err(Error::InvalidGroup(
                "table must have at least two elements (trivial summands are not allowed)".into(),
            ));
        }
        if n > u16::MAX as usize {
            return Err(Error::InvalidGroup("table too large".into()));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidGroup(format!("duplicate element `{a}`")));
            }
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGroup("table is not square".into()));
        }
        let mut mul = Vec::with_capacity(n * n);
        for row in &rows {
            for &x in row {
                if x as usize >= n {
                    return Err(Error::InvalidGroup("table is not closed".into()));
                }
                mul.push(x);
            }
        }
        let at = |a: usize, b: usize| mul[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let b = (0..n)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("`{}` has no inverse", names[a])))?;
            inverse.push(b as u16);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(Error::InvalidGroup(format!(
                            "not associative at ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        Ok(TableGroup {
            source: source.into(),
            names,
            mul,
            identity: identity as u16,
            inverse,
        })
    }

    /// Parses a table file: a header line listing the elements, then one row
    /// per element (`a  a·x1 a·x2 ...`) in header order.
    pub fn parse(source: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(Pos { line: 1, col: 1 }, "empty table"))?;
        let names = Cursor::new(header, hline).rest_texts();
        let mut rows = vec![Vec::new(); names.len()];
        let mut seen = vec![false; names.len()];
        for (no, line) in lines {
            let mut cur = Cursor::new(line, no);
            let head = cur.next()?;
            let r = names
                .iter()
                .position(|x| *x == head.text)
                .ok_or_else(|| Error::parse(head.pos, format!("unknown element `{}`", head.text)))?;
            if seen[r] {
                return Err(Error::parse(head.pos, format!("duplicate row `{}`", head.text)));
            }
            seen[r] = true;
            while let Some(tok) = cur.peek().cloned() {
                cur.next()?;
                let c = names
                    .iter()
                    .position(|x| *x == tok.text)
                    .ok_or_else(|| Error::parse(tok.pos, format!("unknown element `{}`", tok.text)))?;
                rows[r].push(c as u16);
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGroup(format!("missing row `{}`", names[missing])));
        }
        TableGroup::new(source, names, rows)
    }

    /// Symmetric group on three letters, generated by permutation composition.
    pub fn symmetric3() -> Self {
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let names = ["e", "s", "t", "u", "r", "q"].map(String::from).to_vec();
        let compose = |a: &[usize; 3], b: &[usize; 3]| [a[b[0]], a[b[1]], a[b[2]]];
        let rows = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        let c = compose(a, b);
                        perms.iter().position(|p| *p == c).unwrap() as u16
                    })
                    .collect()
            })
            .collect();
        TableGroup::new("S3", names, rows).expect("S3 is a group")
    }

    /// Renders the table in the file format accepted by [`TableGroup::parse`].
    pub fn to_table_text(&self) -> String {
        let mut out = self.names.join(" ");
        out.push('\n');
        let n = self.names.len();
        for a in 0..n {
            out.push_str(&self.names[a]);
            for b in 0..n {
                out.push(' ');
                out.push_str(&self.names[self.mul[a * n + b] as usize]);
            }
            out.push('\n');
        }
        out
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    fn at(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.names.len() + b as usize]
    }
}

/// One summand group `G_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SummandSpec {
    Integer,
    Cyclic(u32),
    /// The rank-2 integer lattice, elements written `a,b`.
    IntegerPair,
    Table(Arc<TableGroup>),
}

impl SummandSpec {
    pub fn cyclic(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup(format!(
                "cyclic {n} is trivial; summands must be nontrivial"
            )));
        }
        Ok(SummandSpec::Cyclic(n))
    }

    pub fn identity(&self) -> Elem {
        match self {
            SummandSpec::Integer | SummandSpec::Cyclic(_) => Elem::Int(0),
            SummandSpec::IntegerPair => Elem::Pair(0, 0),
            SummandSpec::Table(t) => Elem::Sym(t.identity),
        }
    }

    pub fn is_valid(&self, a: &Elem) -> bool {
        match (self, a) {
            (SummandSpec::Integer, Elem::Int(_)) => true,
            (SummandSpec::Cyclic(n), Elem::Int(x)) => (0..*n as i64).contains(x),
            (SummandSpec::IntegerPair, Elem::Pair(..)) => true,
            (SummandSpec::Table(t), Elem::Sym(s)) => (*s as usize) < t.order(),
            _ => false,
        }
    }

    /// Product in canonical encoding; operands must be valid.
    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match (self, a, b) {
            (SummandSpec::Integer, Elem::Int(x), Elem::Int(y)) => Elem::Int(x + y),
            (SummandSpec::Cyclic(n), Elem::Int(x), Elem::Int(y)) => {
                Elem::Int((x + y).rem_euclid(*n as i64))
            }
            (SummandSpec::IntegerPair, Elem::Pair(a1, a2), Elem::Pair(b1, b2)) => {
                Elem::Pair(a1 + b1, a2 + b2)
            }
            (SummandSpec::Table(t), Elem::Sym(x), Elem::Sym(y)) => Elem::Sym(t.at(*x, *y)),
            _ => panic!("element encoding does not match summand"),
        }
    }

    pub fn inv(&self, a: &Elem) -> Elem {
        match (self, a) {
            (SummandSpec::Integer, Elem::Int(x)) => Elem::Int(-x),
            (SummandSpec::Cyclic(n), Elem::Int(x)) => Elem::Int((-x).rem_euclid(*n as i64)),
            (SummandSpec::IntegerPair, Elem::Pair(x, y)) => Elem::Pair(-x, -y),
            (SummandSpec::Table(t), Elem::Sym(x)) => Elem::Sym(t.inverse[*x as usize]),
            _ => panic!("element encoding does not match summand"),
        }
    }

    pub fn is_identity(&self, a: &Elem) -> bool {
        *a == self.identity()
    }

    /// `a^n` for any integer `n`.
    pub fn pow(&self, a: &Elem, n: i64) -> Elem {
        match (self, a) {
            (SummandSpec::Integer, Elem::Int(x)) => Elem::Int(x * n),
            (SummandSpec::Cyclic(m), Elem::Int(x)) => Elem::Int((x * n).rem_euclid(*m as i64)),
            (SummandSpec::IntegerPair, Elem::Pair(x, y)) => Elem::Pair(x * n, y * n),
            _ => {
                let base = if n < 0 { self.inv(a) } else { a.clone() };
                let mut acc = self.identity();
                for _ in 0..n.unsigned_abs() {
                    acc = self.mul(&acc, &base);
                }
                acc
            }
        }
    }

    /// True when no positive power of `a` is the identity.
    pub fn has_infinite_order(&self, a: &Elem) -> bool {
        match self {
            SummandSpec::Integer | SummandSpec::IntegerPair => !self.is_identity(a),
            _ => false,
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            SummandSpec::Table(t) => {
                let n = t.order() as u16;
                (0..n).all(|a| (0..n).all(|b| t.at(a, b) == t.at(b, a)))
            }
            _ => true,
        }
    }

    /// Every element, identity first, when the group is finite.
    pub fn elements(&self) -> Option<Vec<Elem>> {
        match self {
            SummandSpec::Cyclic(n) => Some((0..*n as i64).map(Elem::Int).collect()),
            SummandSpec::Table(t) => {
                let mut v = vec![Elem::Sym(t.identity)];
                v.extend(
                    (0..t.order() as u16)
                        .filter(|&s| s != t.identity)
                        .map(Elem::Sym),
                );
                Some(v)
            }
            _ => None,
        }
    }

    pub fn parse_elem(&self, s: &str) -> Option<Elem> {
        match self {
            SummandSpec::Integer => s.parse().ok().map(Elem::Int),
            SummandSpec::Cyclic(n) => s
                .parse::<i64>()
                .ok()
                .map(|x| Elem::Int(x.rem_euclid(*n as i64))),
            SummandSpec::IntegerPair => {
                let (a, b) = s.split_once(',')?;
                Some(Elem::Pair(a.parse().ok()?, b.parse().ok()?))
            }
            SummandSpec::Table(t) => t
                .names
                .iter()
                .position(|x| x == s)
                .map(|i| Elem::Sym(i as u16)),
        }
    }

    pub fn format_elem(&self, a: &Elem) -> String {
        match (self, a) {
            (SummandSpec::Table(t), Elem::Sym(s)) => t
                .names
                .get(*s as usize)
                .cloned()
                .unwrap_or_else(|| format!("?{s}")),
            (_, Elem::Int(x)) => x.to_string(),
            (_, Elem::Pair(x, y)) => format!("{x},{y}"),
            (_, Elem::Sym(s)) => format!("?{s}"),
        }
    }
}

impl fmt::Display for SummandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummandSpec::Integer => write!(f, "integer"),
            SummandSpec::Cyclic(n) => write!(f, "cyclic {n}"),
            SummandSpec::IntegerPair => write!(f, "integer2"),
            SummandSpec::Table(t) => write!(f, "table {}", t.source),
        }
    }
}

/// Which group sits at which index: finitely many explicit summands plus a
/// default applied to every other index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WedgeConfig {
    explicit: BTreeMap<Index, SummandSpec>,
    default: Option<SummandSpec>,
}

impl WedgeConfig {
    pub fn uniform(spec: SummandSpec) -> Self {
        WedgeConfig {
            explicit: BTreeMap::new(),
            default: Some(spec),
        }
    }

    pub fn integers() -> Self {
        Self::uniform(SummandSpec::Integer)
    }

    pub fn new(default: Option<SummandSpec>) -> Self {
        WedgeConfig {
            explicit: BTreeMap::new(),
            default,
        }
    }

    pub fn with_summand(mut self, j: Index, spec: SummandSpec) -> Self {
        assert!(j >= 1, "summand indices start at 1");
        self.explicit.insert(j, spec);
        self
    }

    pub fn explicit(&self) -> &BTreeMap<Index, SummandSpec> {
        &self.explicit
    }

    pub fn default_spec(&self) -> Option<&SummandSpec> {
        self.default.as_ref()
    }

    pub fn summand(&self, j: Index) -> Result<&SummandSpec> {
        if j == 0 {
            return Err(Error::UnknownSummand(0));
        }
        self.explicit
            .get(&j)
            .or(self.default.as_ref())
            .ok_or(Error::UnknownSummand(j))
    }

    pub fn check(&self, j: Index, a: &Elem) -> Result<()> {
        let g = self.summand(j)?;
        if g.is_valid(a) {
            Ok(())
        } else {
            Err(Error::BadElement {
                summand: j,
                msg: format!("{a:?} is not a canonical element of {g}"),
            })
        }
    }

    pub fn group_mul(&self, j: Index, a: &Elem, b: &Elem) -> Result<Elem> {
        self.check(j, a)?;
        self.check(j, b)?;
        Ok(self.summand(j)?.mul(a, b))
    }

    pub fn group_inv(&self, j: Index, a: &Elem) -> Result<Elem> {
        self.check(j, a)?;
        Ok(self.summand(j)?.inv(a))
    }

    pub fn is_identity(&self, j: Index, a: &Elem) -> Result<bool> {
        self.check(j, a)?;
        Ok(self.summand(j)?.is_identity(a))
    }

    pub fn identity(&self, j: Index) -> Result<Elem> {
        Ok(self.summand(j)?.identity())
    }

    pub fn parse_elem(&self, j: Index, s: &str) -> Result<Elem> {
        let g = self.summand(j)?;
        g.parse_elem(s).ok_or_else(|| Error::BadElement {
            summand: j,
            msg: format!("`{s}` is not an element of {g}"),
        })
    }

    pub fn format_elem(&self, j: Index, a: &Elem) -> String {
        match self.summand(j) {
            Ok(g) => g.format_elem(a),
            Err(_) => format!("{a:?}"),
        }
    }

    /// True when every summand that can occur is abelian.
    pub fn all_abelian(&self) -> bool {
        self.explicit.values().all(SummandSpec::is_abelian)
            && self.default.as_ref().map_or(true, SummandSpec::is_abelian)
    }

    /// Parses the configuration grammar. `load_table` resolves `table <path>`.
    pub fn parse_with(
        text: &str,
        mut load_table: impl FnMut(&str) -> Result<TableGroup>,
    ) -> Result<Self> {
        let mut cfg = WedgeConfig::default();
        for (no, line) in content_lines(text) {
            let mut cur = Cursor::new(line, no);
            let head = cur.next()?;
            match head.text.as_str() {
                "summand" => {
                    let jpos = cur.pos();
                    let j: Index = cur.next_int("summand index")?;
                    if j == 0 {
                        return Err(Error::parse(jpos, "summand indices start at 1"));
                    }
                    if cfg.explicit.contains_key(&j) {
                        return Err(Error::parse(jpos, format!("summand {j} declared twice")));
                    }
                    let spec = parse_spec(&mut cur, &mut load_table, true)?;
                    cfg.explicit.insert(j, spec);
                }
                "default" => {
                    if cfg.default.is_some() {
                        return Err(Error::parse(head.pos, "default declared twice"));
                    }
                    cfg.default = Some(parse_spec(&mut cur, &mut load_table, false)?);
                }
                other => {
                    return Err(Error::parse(
                        head.pos,
                        format!("expected `summand` or `default`, found `{other}`"),
                    ))
                }
            }
            cur.finish()?;
        }
        Ok(cfg)
    }

    /// Parses a configuration that does not reference table files.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, |p| {
            Err(Error::InvalidConfig(format!(
                "table `{p}` cannot be loaded without a file resolver"
            )))
        })
    }
}

fn parse_spec(
    cur: &mut Cursor,
    load_table: &mut impl FnMut(&str) -> Result<TableGroup>,
    allow_table: bool,
) -> Result<SummandSpec> {
    let tok = cur.next()?;
    match tok.text.as_str() {
        "integer" => Ok(SummandSpec::Integer),
        "integer2" => Ok(SummandSpec::IntegerPair),
        "cyclic" => {
            let npos = cur.pos();
            let n: u32 = cur.next_int("group order")?;
            SummandSpec::cyclic(n).map_err(|e| Error::parse(npos, e.to_string()))
        }
        "table" if allow_table => {
            let path = cur.next()?;
            let t = load_table(&path.text)?;
            Ok(SummandSpec::Table(Arc::new(t)))
        }
        other => Err(Error::parse(
            tok.pos,
            format!("unknown summand kind `{other}`"),
        )),
    }
}

impl fmt::Display for WedgeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, s) in &self.explicit {
            writeln!(f, "summand {j} {s}")?;
        }
        if let Some(d) = &self.default {
            writeln!(f, "default {d}")?;
        }
        Ok(())
    }
}
