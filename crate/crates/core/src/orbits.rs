//! Orbit tables: the `n`-orbits of `Aut(M)` on `M^n` as quantifier-free
//! types, with restriction maps and one-point extension counts.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_form_colored, CanonicalCode};
use crate::complete::{for_each_completion, Constraint};
use crate::error::{Error, Result};
use crate::presentation::{Admission, ClassPresentation};
use crate::structure::FinStructure;
use crate::types::TupleType;

/// Default saturation bound for extension counts.
pub const DEFAULT_COUNT_BOUND: usize = 8;

/// The orbits of a single arity, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitTable {
    arity: usize,
    types: Vec<TupleType>,
    #[serde(skip)]
    index: HashMap<TupleType, usize>,
}

impl OrbitTable {
    fn new(arity: usize, mut types: Vec<TupleType>) -> Self {
        let mut keyed: Vec<_> = types.drain(..).map(|t| (t.order_key(), t)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let types: Vec<TupleType> = keyed.into_iter().map(|(_, t)| t).collect();
        let index = types.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        OrbitTable {
            arity,
            types,
            index,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[TupleType] {
        &self.types
    }

    pub fn get(&self, i: usize) -> &TupleType {
        &self.types[i]
    }

    pub fn index_of(&self, t: &TupleType) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// For each orbit, the index in `lower` of its restriction along
    /// `positions` (a map from `lower.arity()` positions into this arity).
    pub fn restriction_map(&self, positions: &[usize], lower: &OrbitTable) -> Vec<usize> {
        assert_eq!(positions.len(), lower.arity);
        self.types
            .iter()
            .map(|t| {
                lower
                    .index_of(&t.restrict(positions))
                    .expect("restriction of an orbit is an orbit")
            })
            .collect()
    }

    /// Restores the lookup index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.types.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    }
}

/// Orbit tables of a presentation for every arity up to a maximum.
#[derive(Clone, Debug)]
pub struct TypeSpace {
    presentation: ClassPresentation,
    tables: Vec<OrbitTable>,
    amalgamation_checked_to: usize,
    amalgamation_failures: usize,
}

/// Bound used for the amalgamation pre-check attached to orbit tables.
const CAVEAT_CHECK_BOUND: usize = 4;

impl TypeSpace {
    pub fn new(p: &ClassPresentation, max_arity: usize) -> Result<Self> {
        let mut tables = vec![OrbitTable::new(0, vec![TupleType::empty(p)])];
        for n in 1..=max_arity {
            if let Some(bound) = p.age_bound() {
                if n > bound {
                    return Err(Error::BoundExceeded {
                        requested: n,
                        bound,
                    });
                }
            }
            let mut next = Vec::new();
            for t in tables[n - 1].types() {
                next.extend(t.extend_one(p)?);
            }
            tables.push(OrbitTable::new(n, next));
        }
        let check = max_arity
            .clamp(2, CAVEAT_CHECK_BOUND)
            .min(p.age_bound().map_or(usize::MAX, |b| b.max(2)));
        let report = p.check_amalgamation(check)?;
        Ok(TypeSpace {
            presentation: p.clone(),
            tables,
            amalgamation_checked_to: check,
            amalgamation_failures: report.failures.len(),
        })
    }

    pub fn presentation(&self) -> &ClassPresentation {
        &self.presentation
    }

    pub fn max_arity(&self) -> usize {
        self.tables.len() - 1
    }

    pub fn table(&self, n: usize) -> &OrbitTable {
        &self.tables[n]
    }

    /// True when the amalgamation pre-check found failures, in which case
    /// orbits need not coincide with quantifier-free types.
    pub fn caveat(&self) -> bool {
        self.amalgamation_failures > 0
    }

    pub fn amalgamation_checked_to(&self) -> usize {
        self.amalgamation_checked_to
    }

    pub fn index_of(&self, t: &TupleType) -> usize {
        self.tables[t.arity()]
            .index_of(t)
            .expect("every realizable type is in its table")
    }

    /// Index in the table of arity `positions.len()` of the restriction of
    /// orbit `o` of arity `n`.
    pub fn restrict(&self, n: usize, o: usize, positions: &[usize]) -> usize {
        self.index_of(&self.tables[n].get(o).restrict(positions))
    }

    /// Counts, for each `(n + 1)`-orbit extending orbit `o` of arity `n`, how
    /// many points realize it over a fixed realization of `o`.
    pub fn extension_profile(
        &self,
        n: usize,
        o: usize,
        bound: usize,
    ) -> Result<Vec<(usize, ExtensionCount)>> {
        if bound < 2 {
            return Err(Error::Invalid("count bound must be at least 2".into()));
        }
        if n + 1 > self.max_arity() {
            return Err(Error::Invalid(format!(
                "orbit tables only go up to arity {}",
                self.max_arity()
            )));
        }
        let t = self.tables[n].get(o);
        let mut out = Vec::new();
        for ext in t.extend_one(&self.presentation)? {
            let idx = self.tables[n + 1].index_of(&ext).expect("extension in table");
            let count = if ext.support() == t.support() {
                ExtensionCount::Exactly(1)
            } else {
                count_realizations(&self.presentation, t.carrier(), ext.carrier(), bound)?
            };
            out.push((idx, count));
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out)
    }
}

/// How many points realize a one-point extension type over fixed
/// parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtensionCount {
    Exactly(usize),
    /// At least this many; either the saturation bound was reached or an
    /// explicit age bound stopped the search earlier.
    AtLeast(usize),
}

impl ExtensionCount {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtensionCount::Exactly(_))
    }
}

impl std::fmt::Display for ExtensionCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtensionCount::Exactly(k) => write!(f, "{k}"),
            ExtensionCount::AtLeast(k) => write!(f, ">={k}"),
        }
    }
}

/// Number of distinct points `z` realizing the extension `ext` (a structure
/// on `base.size() + 1` points extending `base`) over `base`, found as the
/// largest family of such points that jointly lives in one age member.
pub fn count_realizations(
    p: &ClassPresentation,
    base: &FinStructure,
    ext: &FinStructure,
    bound: usize,
) -> Result<ExtensionCount> {
    let d = base.size();
    debug_assert_eq!(ext.size(), d + 1);
    let mut search = RealizationSearch {
        p,
        d,
        ext,
        bound,
        best: 0,
        truncated: false,
        seen: HashSet::new(),
    };
    search.run(base.clone(), 0)?;
    Ok(if search.best >= bound {
        ExtensionCount::AtLeast(bound)
    } else if search.truncated {
        ExtensionCount::AtLeast(search.best)
    } else {
        ExtensionCount::Exactly(search.best)
    })
}

struct RealizationSearch<'a> {
    p: &'a ClassPresentation,
    d: usize,
    ext: &'a FinStructure,
    bound: usize,
    best: usize,
    truncated: bool,
    seen: HashSet<CanonicalCode>,
}

impl RealizationSearch<'_> {
    fn run(&mut self, state: FinStructure, j: usize) -> Result<()> {
        self.best = self.best.max(j);
        if self.best >= self.bound {
            return Ok(());
        }
        let m = state.size();
        if self.p.age_bound().is_some_and(|b| m + 1 > b) {
            self.truncated = true;
            return Ok(());
        }
        let mut ext_points: Vec<usize> = (0..self.d).collect();
        ext_points.push(m);
        let constraints = [
            Constraint::new((0..m).collect(), state),
            Constraint::new(ext_points, self.ext.clone()),
        ];
        let p = self.p;
        let mut failure = None;
        for_each_completion(p, m + 1, &constraints, &mut |s| {
            let colors: Vec<u32> = (0..s.size())
                .map(|x| if x < self.d { x as u32 + 1 } else { 0 })
                .collect();
            if self.seen.insert(canonical_form_colored(s, &colors)) {
                if let Err(e) = self.run(s.clone(), j + 1) {
                    failure = Some(e);
                    return false;
                }
            }
            self.best < self.bound
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(())
    }
}

pub fn enumerate_orbits(p: &ClassPresentation, n: usize) -> Result<OrbitTable> {
    let space = TypeSpace::new(p, n)?;
    Ok(space.tables.into_iter().nth(n).expect("table present"))
}

pub fn count_orbits(p: &ClassPresentation, n: usize) -> Result<usize> {
    Ok(enumerate_orbits(p, n)?.len())
}

/// The orbit index of `tuple`, read inside the age member `s`.
pub fn orbit_of(table: &OrbitTable, p: &ClassPresentation, s: &FinStructure, tuple: &[usize]) -> Result<usize> {
    if tuple.len() != table.arity() {
        return Err(Error::Invalid(format!(
            "tuple of length {} for a table of arity {}",
            tuple.len(),
            table.arity()
        )));
    }
    if let Some(&bad) = tuple.iter().find(|&&x| x >= s.size()) {
        return Err(Error::Invalid(format!("entry {bad} outside the structure")));
    }
    let t = TupleType::of_tuple(s, tuple);
    if p.admits(t.carrier()) != Admission::Admitted {
        return Err(Error::TupleNotInAge(format!("{tuple:?}")));
    }
    table
        .index_of(&t)
        .ok_or_else(|| Error::TupleNotInAge(format!("{tuple:?}")))
}
