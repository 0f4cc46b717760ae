//! Generators and independent oracles shared by the integration tests.
//! The oracles here only touch group arithmetic and, where stated, the
//! freeprod primitives; they never call into covers or whisker.
#![allow(dead_code)]

pub mod theta;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shrinking_wedge::freeprod::{self, FiniteWord, Letter};
use shrinking_wedge::summands::{Elem, Index, SummandSpec, TableGroup, WedgeConfig};
use shrinking_wedge::transfinite::{self, BlockRule, ElemRecipe, Terminal, WordExpr};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cyclic2() -> WedgeConfig {
    WedgeConfig::uniform(SummandSpec::cyclic(2).unwrap())
}

/// Integer, cyclic and nonabelian summands side by side.
pub fn mixed() -> WedgeConfig {
    WedgeConfig::integers()
        .with_summand(2, SummandSpec::cyclic(2).unwrap())
        .with_summand(3, SummandSpec::cyclic(3).unwrap())
        .with_summand(5, SummandSpec::Table(std::sync::Arc::new(TableGroup::symmetric3())))
}

/// Random element of `G_j`, possibly the identity when `allow_identity`.
pub fn random_elem(r: &mut impl Rng, cfg: &WedgeConfig, j: Index, allow_identity: bool) -> Elem {
    let g = cfg.summand(j).unwrap();
    loop {
        let e = match g {
            SummandSpec::Integer => Elem::Int(r.gen_range(-3..=3)),
            SummandSpec::IntegerPair => Elem::Pair(r.gen_range(-2..=2), r.gen_range(-2..=2)),
            _ => g.elements().unwrap().choose(r).unwrap().clone(),
        };
        if allow_identity || !g.is_identity(&e) {
            return e;
        }
    }
}

pub fn random_letters(
    r: &mut impl Rng,
    cfg: &WedgeConfig,
    summands: &[Index],
    len: usize,
    allow_identity: bool,
) -> Vec<Letter> {
    (0..len)
        .map(|_| {
            let j = *summands.choose(r).unwrap();
            Letter::new(j, random_elem(r, cfg, j, allow_identity))
        })
        .collect()
}

pub fn random_word(r: &mut impl Rng, cfg: &WedgeConfig, summands: &[Index], maxlen: usize) -> FiniteWord {
    let n = r.gen_range(0..=maxlen);
    freeprod::reduce(&random_letters(r, cfg, summands, n, false), cfg).unwrap()
}

/// Confluence oracle: explores every order of the single-step rewrites
/// (delete an identity letter; merge two adjacent letters of one summand)
/// and returns the set of irreducible words reached.
pub fn rewrite_normal_forms(word: &[Letter], cfg: &WedgeConfig) -> HashSet<Vec<Letter>> {
    let mut seen: HashSet<Vec<Letter>> = HashSet::new();
    let mut finals = HashSet::new();
    let mut stack = vec![word.to_vec()];
    while let Some(w) = stack.pop() {
        if !seen.insert(w.clone()) {
            continue;
        }
        let mut moved = false;
        for i in 0..w.len() {
            let g = cfg.summand(w[i].summand).unwrap();
            if g.is_identity(&w[i].elem) {
                let mut v = w.clone();
                v.remove(i);
                stack.push(v);
                moved = true;
            }
            if i + 1 < w.len() && w[i].summand == w[i + 1].summand {
                let mut v = w.clone();
                let prod = g.mul(&w[i].elem, &w[i + 1].elem);
                v[i] = Letter::new(w[i].summand, prod);
                v.remove(i + 1);
                stack.push(v);
                moved = true;
            }
        }
        if !moved {
            finals.insert(w);
        }
    }
    finals
}

/// The same fixpoint set as [`rewrite_normal_forms`], computed without
/// walking every order. Each letter of a reachable word collapses a
/// contiguous segment of the input, with vanishing segments between them, so
/// an interval table of "collapses to this letter" and "can vanish" covers
/// every derivation.
pub fn rewrite_normal_forms_by_segments(word: &[Letter], cfg: &WedgeConfig) -> HashSet<Vec<Letter>> {
    let n = word.len();
    let mut single: Vec<Vec<HashSet<Letter>>> = vec![vec![HashSet::new(); n + 1]; n + 1];
    let mut vanish = vec![vec![false; n + 1]; n + 1];
    for i in 0..=n {
        vanish[i][i] = true;
    }
    for len in 1..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut s: HashSet<Letter> = HashSet::new();
            if len == 1 {
                s.insert(word[i].clone());
            }
            for k in i + 1..j {
                for x in &single[i][k] {
                    if vanish[k][j] {
                        s.insert(x.clone());
                    }
                    for y in &single[k][j] {
                        if x.summand == y.summand {
                            let g = cfg.summand(x.summand).unwrap();
                            s.insert(Letter::new(x.summand, g.mul(&x.elem, &y.elem)));
                        }
                    }
                }
                if vanish[i][k] {
                    s.extend(single[k][j].iter().cloned());
                }
            }
            let v = s.iter().any(|l| cfg.summand(l.summand).unwrap().is_identity(&l.elem))
                || (i + 1..j).any(|k| vanish[i][k] && vanish[k][j]);
            single[i][j] = s;
            vanish[i][j] = v;
        }
    }
    // irreducible words reachable from each prefix
    let mut prefix: Vec<HashSet<Vec<Letter>>> = vec![HashSet::new(); n + 1];
    prefix[0].insert(vec![]);
    for j in 1..=n {
        let mut out = HashSet::new();
        for i in 0..j {
            if vanish[i][j] {
                out.extend(prefix[i].iter().cloned());
            }
            for l in &single[i][j] {
                if cfg.summand(l.summand).unwrap().is_identity(&l.elem) {
                    continue;
                }
                for u in &prefix[i] {
                    if u.last().map_or(true, |t| t.summand != l.summand) {
                        let mut v = u.clone();
                        v.push(l.clone());
                        out.insert(v);
                    }
                }
            }
        }
        prefix[j] = out;
    }
    prefix.pop().unwrap()
}

/// Every word of exactly `len` letters over `alphabet`.
pub fn all_words(alphabet: &[Letter], len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |l| {
                    let mut v = w.clone();
                    v.push(l.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Letter of block `n` of `r`, from the recipe by hand.
pub fn block_letter(r: &BlockRule, n: u64, cfg: &WedgeConfig) -> Letter {
    let j = (r.start as u64 + n * r.step as u64) as Index;
    let g = cfg.summand(j).unwrap();
    let e = match &r.recipe {
        ElemRecipe::Const(a) => a.clone(),
        ElemRecipe::Cycle(v) => v[n as usize % v.len()].clone(),
        ElemRecipe::Pow { base, first } => g.pow(base, first + n as i64),
    };
    Letter::new(j, if r.inverted { g.inv(&e) } else { e })
}

/// Raw letters of `w` with summand at most `k`, expanded by hand.
pub fn expand(w: &WordExpr, k: Index, cfg: &WedgeConfig, out: &mut Vec<Letter>) {
    let block = |r: &BlockRule, n: u64| block_letter(r, n, cfg);
    let count = |r: &BlockRule| -> u64 {
        if r.start > k {
            0
        } else {
            ((k - r.start) / r.step) as u64 + 1
        }
    };
    match w {
        WordExpr::Empty => {}
        WordExpr::Lit(l) => {
            if l.summand <= k {
                out.push(l.clone());
            }
        }
        WordExpr::Concat(ps) => ps.iter().for_each(|p| expand(p, k, cfg, out)),
        WordExpr::Omega(r) => (0..count(r)).for_each(|n| out.push(block(r, n))),
        WordExpr::OmegaStar(r) => (0..count(r)).rev().for_each(|n| out.push(block(r, n))),
    }
}

/// `ρ_k(w)` from hand expansion and freeprod reduction.
pub fn rho(w: &WordExpr, k: Index, cfg: &WedgeConfig) -> FiniteWord {
    let mut raw = Vec::new();
    expand(w, k, cfg, &mut raw);
    freeprod::reduce(&raw, cfg).unwrap()
}

/// Tree translate by descent, using only freeprod bonding and decomposition:
/// each step down contributes the inverse of the exposed terminal letter.
pub fn descent_beta(level: Index, j: Index, index: &FiniteWord, cfg: &WedgeConfig) -> Elem {
    let g = cfg.summand(j).unwrap();
    let mut beta = g.identity();
    let mut alpha = index.clone();
    for k in ((j + 1)..=level).rev() {
        let down = freeprod::bonding(&alpha, k, cfg).unwrap();
        let d = freeprod::decompose_nt(&down, j, cfg).unwrap();
        beta = g.mul(&beta, &g.inv(&d.tail));
        alpha = d.prefix;
    }
    beta
}

/// β-sequence for `k = j..=bound` replayed from freeprod primitives only.
pub fn recurrence_betas(w: &WordExpr, j: Index, bound: Index, cfg: &WedgeConfig) -> Vec<(Index, Elem)> {
    (j..=bound)
        .map(|k| {
            let d = freeprod::decompose_nt(&rho(w, k, cfg), j, cfg).unwrap();
            (k, descent_beta(k, j, &d.prefix, cfg))
        })
        .collect()
}

/// Closed form of the β-sequence: `γ_k·γ_j⁻¹`, with `γ_k` the terminal `G_j`
/// letter of `ρ_k(w)`.
pub fn closed_form_beta(w: &WordExpr, j: Index, k: Index, cfg: &WedgeConfig) -> Elem {
    let g = cfg.summand(j).unwrap();
    let gamma = |k| freeprod::decompose_nt(&rho(w, k, cfg), j, cfg).unwrap().tail;
    g.mul(&gamma(k), &g.inv(&gamma(j)))
}

/// One generated word for the stabilization corpus.
pub struct StabCase {
    pub word: WordExpr,
    pub summand: Index,
    /// Largest explicit summand: literals, `j`, and the first tail block past them.
    pub explicit_max: Index,
}

/// Random concatenations of at most six literals over summands 1..=9 with an
/// optional ω-tail, non-terminal in the chosen summand `j ≤ 4`.
pub fn stabilization_corpus(seed: u64, n: usize, cfg: &WedgeConfig) -> Vec<StabCase> {
    let mut r = rng(seed);
    let summands: Vec<Index> = (1..=9).collect();
    let mut out = Vec::new();
    while out.len() < n {
        let j = r.gen_range(1..=4);
        let len = r.gen_range(0..=6);
        let mut parts: Vec<WordExpr> = random_letters(&mut r, cfg, &summands, len, false)
            .into_iter()
            .map(WordExpr::Lit)
            .collect();
        let tail = if r.gen_bool(0.5) {
            let start = r.gen_range(1..=9);
            let step = r.gen_range(1..=3);
            let e = random_elem(&mut r, cfg, start, false);
            let rule = BlockRule::constant(start, step, e);
            if rule.validate(cfg, true).is_err() {
                continue;
            }
            parts.push(WordExpr::Omega(rule.clone()));
            Some(rule)
        } else {
            None
        };
        let word = WordExpr::Concat(parts);
        if transfinite::terminal_summand(&word, cfg).unwrap() == Terminal::Summand(j) {
            continue;
        }
        let lit_max = word.literal_letters().iter().map(|l| l.summand).max().unwrap_or(0).max(j);
        let explicit_max = match &tail {
            Some(rule) => {
                let mut s = rule.start;
                while s <= lit_max {
                    s += rule.step;
                }
                s
            }
            None => lit_max,
        };
        out.push(StabCase {
            word,
            summand: j,
            explicit_max,
        });
    }
    out
}

/// Random valid expression mixing literals, blocks and nesting.
pub fn random_expr(r: &mut impl Rng, cfg: &WedgeConfig, depth: u32) -> WordExpr {
    let pick = if depth == 0 { r.gen_range(0..4) } else { r.gen_range(0..5) };
    match pick {
        0 => WordExpr::Empty,
        1 | 2 => {
            let j = r.gen_range(1..=6);
            WordExpr::Lit(Letter::new(j, random_elem(r, cfg, j, false)))
        }
        3 => loop {
            let start = r.gen_range(1..=6);
            let step = r.gen_range(1..=2);
            let recipe = if r.gen_bool(0.5) {
                ElemRecipe::Const(random_elem(r, cfg, start, false))
            } else {
                ElemRecipe::Cycle(
                    (0..r.gen_range(1..=3))
                        .map(|_| random_elem(r, cfg, start, false))
                        .collect(),
                )
            };
            let rule = BlockRule::diag(start, step, recipe);
            if rule.validate(cfg, true).is_ok() {
                break if r.gen_bool(0.5) {
                    WordExpr::Omega(rule)
                } else {
                    WordExpr::OmegaStar(rule)
                };
            }
        },
        _ => {
            let n = r.gen_range(0..=4);
            WordExpr::Concat((0..n).map(|_| random_expr(r, cfg, depth - 1)).collect())
        }
    }
}
