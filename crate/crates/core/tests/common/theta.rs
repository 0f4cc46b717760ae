//! Support generators and the brute-force image check for coefficient families.

use std::collections::BTreeSet;

use rand::Rng;

use super::*;
use shrinking_wedge::freeprod::{self, FiniteWord, Letter};
use shrinking_wedge::summands::{Index, WedgeConfig};
use shrinking_wedge::transfinite::{BlockRule, ElemRecipe, WordExpr};
use shrinking_wedge::whisker::{self, *};

/// Members examined per tail.
pub const N: u64 = 64;

pub fn random_tail(r: &mut impl Rng, cfg: &WedgeConfig) -> ConvergentTail {
    let limit = if r.gen_bool(0.5) {
        WordExpr::from_word(&random_word(r, cfg, &[1, 2, 3, 4, 5], 4))
    } else {
        random_expr(r, cfg, 1)
    };
    let escape = if r.gen_bool(0.2) {
        IndexRule::constant(r.gen_range(0..=3))
    } else {
        IndexRule::diag(r.gen_range(0..=4), r.gen_range(1..=3))
    };
    let members = if r.gen_bool(0.25) {
        None
    } else {
        loop {
            let start = r.gen_range(1..=10);
            let step = r.gen_range(0..=2);
            let recipe = match r.gen_range(0..3) {
                0 => ElemRecipe::Const(random_elem(r, cfg, start, false)),
                1 => ElemRecipe::Cycle((0..r.gen_range(1..=3)).map(|_| random_elem(r, cfg, start, false)).collect()),
                _ => ElemRecipe::Pow { base: random_elem(r, cfg, start, false), first: r.gen_range(1..=2) },
            };
            let rule = BlockRule::diag(start, step, recipe);
            if rule.validate(cfg, false).is_ok() {
                break Some(rule);
            }
        }
    };
    let coeffs = if r.gen_bool(0.5) {
        CoeffRule::Const(*[-2i64, -1, 1, 3].iter().nth(r.gen_range(0..4)).unwrap())
    } else {
        CoeffRule::Cycle((0..r.gen_range(1..=3)).map(|_| r.gen_range(-2..=2)).collect())
    };
    ConvergentTail {
        limit,
        summand: IndexRule::diag(r.gen_range(1..=6), r.gen_range(1..=2)),
        escape,
        members,
        coeffs,
    }
}

pub fn random_point(r: &mut impl Rng, cfg: &WedgeConfig) -> IsolatedPoint {
    let w = random_word(r, cfg, &[1, 2, 3, 4, 5], 4);
    let last = w.last().map(|l| l.summand);
    let summand = loop {
        let j = r.gen_range(1..=6);
        if Some(j) != last {
            break j;
        }
    };
    IsolatedPoint { summand, rep: WordExpr::from_word(&w), coeff: r.gen_range(1..=4) }
}

/// Valid elements over integer coefficients.
pub fn elements(seed: u64, n: usize, cfg: &WedgeConfig) -> Vec<ThetaElement> {
    supports(seed, n, 2, 2, cfg)
}

/// Valid elements with up to `points` isolated points and `1..=tails` tails.
pub fn supports(seed: u64, n: usize, points: usize, tails: usize, cfg: &WedgeConfig) -> Vec<ThetaElement> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let mut el = ThetaElement::new("mixed", 8);
        el.support.isolated = (0..r.gen_range(0..=points)).map(|_| random_point(&mut r, cfg)).collect();
        el.support.tails = (0..r.gen_range(1..=tails)).map(|_| random_tail(&mut r, cfg)).collect();
        if whisker::validate(&el, cfg).is_ok() {
            out.push(el);
        }
    }
    out
}

pub fn active(t: &ConvergentTail, upto: u64) -> Vec<u64> {
    (1..=upto).filter(|&i| t.coeffs.raw_at(i) != 0).collect()
}

/// `ρ_k` of member `i`, assembled by hand.
pub fn member_proj(t: &ConvergentTail, i: u64, k: Index, cfg: &WedgeConfig) -> FiniteWord {
    let mut raw: Vec<Letter> = rho(&t.limit, k, cfg).letters().to_vec();
    if let Some(m) = &t.members {
        let l = block_letter(m, i - 1, cfg);
        if l.summand <= k {
            raw.push(l);
        }
    }
    freeprod::reduce(&raw, cfg).unwrap()
}

pub fn member_in_nbhd(t: &ConvergentTail, i: u64, cfg: &WedgeConfig) -> bool {
    let depth = t.escape.at(i);
    let top = t.members.as_ref().map_or(0, |m| m.summand_at(i - 1)).max(depth) as Index + 1;
    (1..=top).all(|k| {
        let lim = freeprod::invert(&rho(&t.limit, k, cfg), cfg).unwrap();
        let d = freeprod::multiply(&lim, &member_proj(t, i, k, cfg), cfg).unwrap();
        d.letters().iter().all(|l| l.summand as u64 > depth)
    })
}

pub fn distinct(t: &ConvergentTail, upto: u64, k: Index, cfg: &WedgeConfig) -> usize {
    active(t, upto).iter().map(|&i| member_proj(t, i, k, cfg)).collect::<BTreeSet<_>>().len()
}

/// Brute-force closure test over the first `N` members of each tail.
pub fn oracle_in_image(el: &ThetaElement, cfg: &WedgeConfig) -> bool {
    el.support.tails.iter().all(|t| {
        let act = active(t, N);
        if act.is_empty() {
            return true;
        }
        let stalls = act.iter().any(|&i| t.escape.at(i + 1) <= t.escape.at(i));
        let outside = act.iter().any(|&i| !member_in_nbhd(t, i, cfg));
        let unbounded = (1..=8).any(|k| distinct(t, N / 2, k, cfg) != distinct(t, N, k, cfg));
        !(stalls || outside || unbounded)
    })
}

pub fn oracle_count(el: &ThetaElement, k: Index, cfg: &WedgeConfig) -> usize {
    let mut seen: BTreeSet<FiniteWord> = el.support.isolated.iter().map(|p| rho(&p.rep, k, cfg)).collect();
    for t in &el.support.tails {
        let act = active(t, N);
        if !act.is_empty() {
            seen.insert(rho(&t.limit, k, cfg));
            seen.extend(act.iter().map(|&i| member_proj(t, i, k, cfg)));
        }
    }
    seen.len()
}
