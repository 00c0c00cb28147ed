//! Finite relational structures over a fixed signature.
//!
//! A [`FinStructure`] lives on the domain `0..size` and stores one set of
//! tuples per relation symbol. Structures carry their arity list so that they
//! can be manipulated without a signature at hand; two structures built over
//! the same [`Signature`] compare equal exactly when they have the same size
//! and the same tuples.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Ordered list of relation symbols. The order is part of every encoding.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let symbols: Vec<Symbol> = symbols
            .into_iter()
            .map(|(name, arity)| Symbol {
                name: name.into(),
                arity,
            })
            .collect();
        let mut seen = HashSet::new();
        for sym in &symbols {
            if sym.arity == 0 {
                return Err(Error::InvalidSignature(format!(
                    "symbol `{}` has arity 0",
                    sym.name
                )));
            }
            if sym.name.is_empty() {
                return Err(Error::InvalidSignature("empty symbol name".into()));
            }
            if !seen.insert(sym.name.clone()) {
                return Err(Error::InvalidSignature(format!(
                    "duplicate symbol `{}`",
                    sym.name
                )));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arities(&self) -> Vec<usize> {
        self.symbols.iter().map(|s| s.arity).collect()
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

pub type Tuple = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinStructure {
    size: usize,
    arities: Vec<usize>,
    relations: Vec<BTreeSet<Tuple>>,
}

impl FinStructure {
    /// The structure of the given size with every relation empty.
    pub fn empty(signature: &Signature, size: usize) -> Self {
        Self::with_arities(signature.arities(), size)
    }

    pub(crate) fn with_arities(arities: Vec<usize>, size: usize) -> Self {
        let relations = vec![BTreeSet::new(); arities.len()];
        FinStructure {
            size,
            arities,
            relations,
        }
    }

    /// Builds a structure from explicit tuple lists, one list per symbol.
    pub fn from_tuples(
        signature: &Signature,
        size: usize,
        tuples: impl IntoIterator<Item = (usize, Tuple)>,
    ) -> Result<Self> {
        let mut s = FinStructure::empty(signature, size);
        for (sym, t) in tuples {
            if sym >= s.arities.len() {
                return Err(Error::InvalidStructure(format!("unknown symbol index {sym}")));
            }
            if t.len() != s.arities[sym] {
                return Err(Error::InvalidStructure(format!(
                    "tuple {t:?} has length {} but `{}` has arity {}",
                    t.len(),
                    signature.symbols()[sym].name,
                    s.arities[sym]
                )));
            }
            if let Some(&bad) = t.iter().find(|&&x| x >= size) {
                return Err(Error::InvalidStructure(format!(
                    "entry {bad} outside domain of size {size}"
                )));
            }
            s.relations[sym].insert(t);
        }
        Ok(s)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn num_symbols(&self) -> usize {
        self.arities.len()
    }

    pub fn relation(&self, sym: usize) -> &BTreeSet<Tuple> {
        &self.relations[sym]
    }

    pub fn holds(&self, sym: usize, tuple: &[usize]) -> bool {
        self.relations[sym].contains(tuple)
    }

    pub fn insert(&mut self, sym: usize, tuple: Tuple) {
        debug_assert_eq!(tuple.len(), self.arities[sym]);
        debug_assert!(tuple.iter().all(|&x| x < self.size));
        self.relations[sym].insert(tuple);
    }

    pub fn remove(&mut self, sym: usize, tuple: &[usize]) {
        self.relations[sym].remove(tuple);
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(|r| r.len()).sum()
    }

    /// Adds `extra` isolated points at the end of the domain.
    pub fn grow(&self, extra: usize) -> Self {
        let mut s = self.clone();
        s.size += extra;
        s
    }

    /// The substructure induced on `points`, relabelled so that `points[i]`
    /// becomes `i`. Points must be distinct.
    pub fn induced(&self, points: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.size];
        for (i, &p) in points.iter().enumerate() {
            debug_assert_eq!(pos[p], usize::MAX, "induced: repeated point");
            pos[p] = i;
        }
        let mut out = FinStructure::with_arities(self.arities.clone(), points.len());
        for (sym, rel) in self.relations.iter().enumerate() {
            for t in rel {
                if t.iter().all(|&x| pos[x] != usize::MAX) {
                    out.relations[sym].insert(t.iter().map(|&x| pos[x]).collect());
                }
            }
        }
        out
    }

    /// Renames every point `v` to `perm[v]`; `perm` must be a bijection of
    /// the domain.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.size);
        let mut out = FinStructure::with_arities(self.arities.clone(), self.size);
        for (sym, rel) in self.relations.iter().enumerate() {
            for t in rel {
                out.relations[sym].insert(t.iter().map(|&x| perm[x]).collect());
            }
        }
        out
    }

    /// Labelled encoding: equal exactly for equal structures.
    pub fn raw_code(&self) -> Vec<u32> {
        let mut code = vec![self.size as u32, self.arities.len() as u32];
        for rel in &self.relations {
            code.push(rel.len() as u32);
            for t in rel {
                code.extend(t.iter().map(|&x| x as u32));
            }
        }
        code
    }

    /// Whether the map `map` (indexed by points of `self`) preserves and
    /// reflects every relation when read as a partial map into `other`.
    pub fn is_embedding_into(&self, other: &FinStructure, map: &[usize]) -> bool {
        if map.len() != self.size {
            return false;
        }
        let mut seen = HashSet::new();
        if !map.iter().all(|&x| x < other.size && seen.insert(x)) {
            return false;
        }
        for sym in 0..self.arities.len() {
            let mut count = 0;
            for t in &self.relations[sym] {
                let image: Tuple = t.iter().map(|&x| map[x]).collect();
                if !other.holds(sym, &image) {
                    return false;
                }
                count += 1;
            }
            let inside = other.relations[sym]
                .iter()
                .filter(|t| t.iter().all(|x| seen.contains(x)))
                .count();
            if inside != count {
                return false;
            }
        }
        true
    }
}

/// Every tuple of the given arity over `0..=max` in which `max` occurs, in
/// lexicographic order.
pub(crate) fn tuples_with_max(arity: usize, max: usize) -> Vec<Tuple> {
    let mut out = Vec::new();
    let mut t = vec![0usize; arity];
    loop {
        if t.contains(&max) {
            out.push(t.clone());
        }
        let mut i = arity;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if t[i] < max {
                t[i] += 1;
                for x in t.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
        }
    }
}

/// Search state for injective relation preserving-and-reflecting maps.
struct EmbeddingSearch<'a> {
    from: &'a FinStructure,
    into: &'a FinStructure,
    map: Vec<usize>,
    used: Vec<bool>,
    allowed: Option<&'a [bool]>,
    must_hit: Option<usize>,
}

impl EmbeddingSearch<'_> {
    fn consistent(&self, i: usize) -> bool {
        for sym in 0..self.from.arities.len() {
            for t in tuples_with_max(self.from.arities[sym], i) {
                let image: Tuple = t.iter().map(|&x| self.map[x]).collect();
                if self.from.holds(sym, &t) != self.into.holds(sym, &image) {
                    return false;
                }
            }
        }
        true
    }

    fn run(&mut self, i: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if i == self.from.size {
            if let Some(p) = self.must_hit {
                if !self.map.contains(&p) {
                    return true;
                }
            }
            return visit(&self.map);
        }
        for cand in 0..self.into.size {
            if self.used[cand] || self.allowed.is_some_and(|a| !a[cand]) {
                continue;
            }
            self.map.push(cand);
            self.used[cand] = true;
            let go_on = !self.consistent(i) || self.run(i + 1, visit);
            self.used[cand] = false;
            self.map.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// All embeddings of `from` into `into` (injective, preserving and reflecting
/// every relation), as image vectors in lexicographic order.
pub fn embeddings(from: &FinStructure, into: &FinStructure) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut search = EmbeddingSearch {
        from,
        into,
        map: Vec::new(),
        used: vec![false; into.size],
        allowed: None,
        must_hit: None,
    };
    search.run(0, &mut |m| {
        out.push(m.to_vec());
        true
    });
    out
}

/// Whether some embedding of `from` into `into` uses only points flagged in
/// `allowed` and hits the point `must_hit`.
pub(crate) fn embeds_hitting(
    from: &FinStructure,
    into: &FinStructure,
    allowed: &[bool],
    must_hit: Option<usize>,
) -> bool {
    if from.size > allowed.iter().filter(|&&a| a).count() {
        return false;
    }
    let mut found = false;
    let mut search = EmbeddingSearch {
        from,
        into,
        map: Vec::new(),
        used: vec![false; into.size],
        allowed: Some(allowed),
        must_hit,
    };
    search.run(0, &mut |_| {
        found = true;
        false
    });
    found
}
