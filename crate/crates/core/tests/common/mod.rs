//! Brute-force oracles shared by the integration tests. None of them use
//! the orbit engine, canonical forms or the group law under test.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use oligo_core::presentation::ClassPresentation;
use oligo_core::structure::FinStructure;
use oligo_core::types::TupleType;
use oligo_core::wu::WuElement;

pub mod invariants;

/// The position pattern of `t` in `s`: which positions are equal and which
/// position tuples satisfy each relation.
fn pattern(s: &FinStructure, t: &[usize]) -> (Vec<bool>, Vec<Vec<Vec<usize>>>) {
    let n = t.len();
    let eq = (0..n * n).map(|k| t[k / n] == t[k % n]).collect();
    let rels = (0..s.num_symbols())
        .map(|sym| {
            all_tuples(n, s.arities()[sym])
                .into_iter()
                .filter(|pos| s.holds(sym, &pos.iter().map(|&i| t[i]).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    (eq, rels)
}

/// Number of `n`-tuple orbits, as the number of distinct position patterns
/// of tuples in age members of size at most `n`.
pub fn orbit_oracle(p: &ClassPresentation, n: usize) -> usize {
    let mut seen = BTreeSet::new();
    for s in p.enumerate_age(n).unwrap() {
        for t in all_tuples(s.size(), n) {
            seen.insert(pattern(&s, &t));
        }
    }
    seen.len()
}

/// Number of orbits on `n`-tuples of distinct points.
pub fn injective_orbit_oracle(p: &ClassPresentation, n: usize) -> usize {
    let mut seen = BTreeSet::new();
    for s in p.enumerate_age(n).unwrap() {
        for t in all_tuples(s.size(), n) {
            if t.iter().collect::<BTreeSet<_>>().len() == n {
                seen.insert(pattern(&s, &t));
            }
        }
    }
    seen.len()
}

/// Number of patterns of `n`-tuples of rationals, read off order types of
/// tuples over `{0, …, n-1}`.
pub fn rational_order_patterns(n: usize) -> usize {
    let patterns: BTreeSet<Vec<std::cmp::Ordering>> = all_tuples(n, n)
        .into_iter()
        .map(|t| (0..n * n).map(|k| t[k / n].cmp(&t[k % n])).collect())
        .collect();
    patterns.len()
}

/// Ids for the pair types `(x, y)` of tuples `x, y` realizing `base`, and
/// the id triples `(xy, yz, xz)` read off concrete age members of size at
/// most `3n`.
pub fn pair_triples(p: &ClassPresentation, base: &TupleType) -> (HashMap<TupleType, usize>, BTreeSet<(usize, usize, usize)>) {
    let n = base.arity();
    let members = p.enumerate_age(3 * n).unwrap();
    let mut pair_ids: HashMap<TupleType, usize> = HashMap::new();
    let mut triples: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for s in &members {
        let tuples: Vec<Vec<usize>> = all_tuples(s.size(), n)
            .into_iter()
            .filter(|t| TupleType::of_tuple(s, t) == *base)
            .collect();
        let mut id = |x: &[usize], y: &[usize], s: &FinStructure| {
            let t = TupleType::of_tuple(s, &[x, y].concat());
            let k = pair_ids.len();
            *pair_ids.entry(t).or_insert(k)
        };
        for x in &tuples {
            for y in &tuples {
                for z in &tuples {
                    let a = id(x, y, s);
                    let b = id(y, z, s);
                    let c = id(x, z, s);
                    triples.insert((a, b, c));
                }
            }
        }
    }
    (pair_ids, triples)
}

/// Counts equivalences on the orbit of `base` by testing every union of
/// pair types against the triples of [`pair_triples`].
pub fn equivalence_oracle(p: &ClassPresentation, base: &TupleType) -> usize {
    let n = base.arity();
    let (pair_ids, triples) = pair_triples(p, base);
    let k = pair_ids.len();
    let diag = pair_ids[&TupleType::of_tuple(base.carrier(), &[base.labeling(), base.labeling()].concat())];
    let flip: Vec<usize> = (n..2 * n).chain(0..n).collect();
    let mut swap = vec![0; k];
    for (t, &i) in &pair_ids {
        swap[i] = pair_ids[&t.restrict(&flip)];
    }
    let mut count = 0;
    for mask in 0u64..(1u64 << k) {
        let has = |i: usize| mask >> i & 1 == 1;
        if !has(diag) || (0..k).any(|i| has(i) && !has(swap[i])) {
            continue;
        }
        if triples.iter().all(|&(a, b, c)| !(has(a) && has(b)) || has(c)) {
            count += 1;
        }
    }
    count
}

pub fn all_tuples(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| (0..m).map(move |x| [t.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Isomorphism by trying every bijection.
pub fn isomorphic(a: &FinStructure, b: &FinStructure) -> bool {
    a.size() == b.size()
        && a.arities() == b.arities()
        && a.tuple_count() == b.tuple_count()
        && permutations(a.size()).iter().any(|p| a.relabel(p) == *b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Letter {
    A(usize),
    B(usize),
    C,
}

/// A word in the generators, each letter with exponent `1` or `-1`.
pub type Word = Vec<(Letter, i64)>;

pub fn word_of(x: &WuElement) -> Word {
    let mut out = Vec::new();
    for (&i, &e) in &x.u {
        out.extend(std::iter::repeat((Letter::A(i), 1)).take(e as usize));
    }
    for (&i, &e) in &x.v {
        out.extend(std::iter::repeat((Letter::B(i), 1)).take(e as usize));
    }
    out.extend(std::iter::repeat((Letter::C, 1)).take(x.w as usize));
    out
}

/// Collects a word into `a`-letters, then `b`-letters, then `c`-letters
/// by adjacent swaps, using only `b_i^e a_i^f = a_i^f b_i^e c^{ef}` and
/// commutation of every other pair, then reduces exponents mod 3.
pub fn collect(word: &Word) -> WuElement {
    let rank = |l: Letter| match l {
        Letter::A(_) => 0,
        Letter::B(_) => 1,
        Letter::C => 2,
    };
    let mut w = word.clone();
    let mut i = 0;
    while i + 1 < w.len() {
        let ((x, e), (y, f)) = (w[i], w[i + 1]);
        if rank(x) <= rank(y) {
            i += 1;
            continue;
        }
        w.swap(i, i + 1);
        if let (Letter::B(j), Letter::A(k)) = (x, y) {
            if j == k {
                let sign = if e * f > 0 { 1 } else { -1 };
                w.push((Letter::C, sign));
            }
        }
        i = i.saturating_sub(1);
    }
    let mut u: HashMap<usize, i64> = HashMap::new();
    let mut v: HashMap<usize, i64> = HashMap::new();
    let mut c = 0;
    for (l, e) in w {
        match l {
            Letter::A(i) => *u.entry(i).or_default() += e,
            Letter::B(i) => *v.entry(i).or_default() += e,
            Letter::C => c += e,
        }
    }
    let u: Vec<(usize, i64)> = u.into_iter().collect();
    let v: Vec<(usize, i64)> = v.into_iter().collect();
    WuElement::from_parts(&u, &v, c)
}

/// Evaluates a word with the group law under test.
pub fn evaluate(word: &Word) -> WuElement {
    word.iter().fold(WuElement::identity(), |acc, &(l, e)| {
        let x = match l {
            Letter::A(i) => WuElement::a(i),
            Letter::B(i) => WuElement::b(i),
            Letter::C => WuElement::c(),
        };
        acc.mul(&if e > 0 { x } else { x.inverse() })
    })
}
