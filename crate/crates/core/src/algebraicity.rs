//! Algebraic closure over finite parameter tuples, the no-algebraicity test,
//! and the merge of several 1-orbits into one.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::canon::canonical_form;
use crate::complete::{completions, Constraint};
use crate::error::{Error, Result};
use crate::normalizer::arrangements;
use crate::orbits::{count_realizations, ExtensionCount, TypeSpace};
use crate::presentation::{Admission, ClassPresentation};
use crate::structure::{FinStructure, Signature};
use crate::types::TupleType;
use crate::verdict::Verdict;

pub const DEFAULT_MERGE_BOUND: usize = 6;
pub const DEFAULT_WITNESS_CAP: usize = 6;

/// One extension orbit over the parameters with finitely many realizations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraicElement {
    /// Index of the `(n + 1)`-orbit.
    pub orbit: usize,
    pub ty: TupleType,
    pub multiplicity: usize,
    /// Set when the new entry equals parameter entry `i`.
    pub parameter: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AclReport {
    pub parameters: TupleType,
    pub bound: usize,
    pub algebraic: Vec<AlgebraicElement>,
    /// Some count was ambiguous: exactly `bound - 1`, or cut short by an
    /// explicit age bound.
    pub saturated: bool,
}

impl AclReport {
    /// Algebraic elements outside the parameters.
    pub fn new_elements(&self) -> impl Iterator<Item = &AlgebraicElement> {
        self.algebraic.iter().filter(|a| a.parameter.is_none())
    }

    pub fn is_trivial(&self) -> bool {
        self.new_elements().next().is_none()
    }
}

/// acl of orbit `o` of arity `n`, read from its extension profile.
pub fn acl_of_orbit(space: &TypeSpace, n: usize, o: usize, bound: usize) -> Result<AclReport> {
    let t = space.table(n).get(o).clone();
    let mut algebraic = Vec::new();
    let mut saturated = false;
    for (idx, count) in space.extension_profile(n, o, bound)? {
        let ty = space.table(n + 1).get(idx).clone();
        let new_label = ty.labeling()[n];
        let parameter = (new_label < t.support())
            .then(|| t.labeling().iter().position(|&l| l == new_label).expect("label occurs"));
        match count {
            ExtensionCount::Exactly(k) => {
                if k + 1 >= bound {
                    saturated = true;
                }
                if k > 0 {
                    algebraic.push(AlgebraicElement {
                        orbit: idx,
                        ty,
                        multiplicity: k,
                        parameter,
                    });
                }
            }
            ExtensionCount::AtLeast(k) if k < bound => saturated = true,
            ExtensionCount::AtLeast(_) => {}
        }
    }
    Ok(AclReport {
        parameters: t,
        bound,
        algebraic,
        saturated,
    })
}

/// acl of the tuple `tuple` read in the age member `s`.
pub fn acl(p: &ClassPresentation, s: &FinStructure, tuple: &[usize], bound: usize) -> Result<AclReport> {
    if let Some(&bad) = tuple.iter().find(|&&x| x >= s.size()) {
        return Err(Error::Invalid(format!("entry {bad} outside the structure")));
    }
    let t = TupleType::of_tuple(s, tuple);
    if p.admits(t.carrier()) != Admission::Admitted {
        return Err(Error::TupleNotInAge(format!("{tuple:?}")));
    }
    let n = tuple.len();
    let space = TypeSpace::new(p, n + 1)?;
    acl_of_orbit(&space, n, space.index_of(&t), bound)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitWitness {
    pub parameters: TupleType,
    pub element: TupleType,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoAlgebraicityReport {
    pub verdict: Verdict,
    pub arity_bound: usize,
    pub bound: usize,
    pub parameters_checked: usize,
    pub witness: Option<OrbitWitness>,
    /// Parameter orbits whose acl report was ambiguous.
    pub ambiguous: Vec<TupleType>,
}

/// PASS when no parameter orbit of arity `<= arity_bound` has a new
/// algebraic element, FAIL with the first such element found.
pub fn is_no_algebraicity(p: &ClassPresentation, arity_bound: usize, bound: usize) -> Result<NoAlgebraicityReport> {
    let space = TypeSpace::new(p, arity_bound + 1)?;
    let mut ambiguous = Vec::new();
    let mut checked = 0;
    for n in 0..=arity_bound {
        for o in 0..space.table(n).len() {
            checked += 1;
            let report = acl_of_orbit(&space, n, o, bound)?;
            if let Some(e) = report.new_elements().find(|e| e.multiplicity + 1 < bound) {
                return Ok(NoAlgebraicityReport {
                    verdict: Verdict::Fail,
                    arity_bound,
                    bound,
                    parameters_checked: checked,
                    witness: Some(OrbitWitness {
                        parameters: report.parameters.clone(),
                        element: e.ty.clone(),
                        multiplicity: e.multiplicity,
                    }),
                    ambiguous,
                });
            }
            if report.saturated {
                ambiguous.push(report.parameters);
            }
        }
    }
    Ok(NoAlgebraicityReport {
        verdict: if ambiguous.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        },
        arity_bound,
        bound,
        parameters_checked: checked,
        witness: None,
        ambiguous,
    })
}

/// The structure on transversal sets: sets containing one point from each
/// 1-orbit. Each merged point is stored as the tuple of its members listed
/// by 1-orbit index. For every `k` up to `max(2, r)` (with `r` the largest
/// arity of the signature) and every orbit of `k` distinct merged points
/// there is one `k`-ary symbol; a single unary symbol that would hold
/// everywhere is omitted.
#[derive(Clone, Debug)]
pub struct Merge {
    original: ClassPresentation,
    one_orbits: Vec<TupleType>,
    merged: ClassPresentation,
    /// `symbols[i]`: the type of the concatenated members of a `k`-tuple of
    /// merged points named by symbol `i`.
    symbols: Vec<TupleType>,
    symbol_of: HashMap<TupleType, usize>,
    bound: usize,
}

impl Merge {
    pub fn new(p: &ClassPresentation, bound: usize) -> Result<Merge> {
        let space = TypeSpace::new(p, 1)?;
        let one_orbits: Vec<TupleType> = space.table(1).types().to_vec();
        let n = one_orbits.len();
        if n <= 1 {
            return Ok(Merge {
                original: p.clone(),
                one_orbits,
                merged: p.clone(),
                symbols: Vec::new(),
                symbol_of: HashMap::new(),
                bound,
            });
        }
        let arity = p.signature().max_arity().max(2);
        if bound < arity {
            return Err(Error::Invalid(format!("merge bound must be at least {arity}")));
        }

        // all labelled types of s distinct merged points, for s up to arity
        let mut levels: Vec<Vec<TupleType>> = vec![vec![TupleType::empty(p)]];
        for s in 1..=arity {
            let mut next = Vec::new();
            for t in &levels[s - 1] {
                next.extend(extend_block(p, t, &one_orbits)?);
            }
            next.sort_by_key(|t| t.order_key());
            levels.push(next);
        }
        let mut symbols: Vec<TupleType> = Vec::new();
        let mut sig_symbols: Vec<(String, usize)> = Vec::new();
        for (s, level) in levels.iter().enumerate().skip(1) {
            if s == 1 && level.len() == 1 {
                continue;
            }
            for (j, t) in level.iter().enumerate() {
                symbols.push(t.clone());
                sig_symbols.push((format!("o{s}_{j}"), s));
            }
        }
        let symbol_of: HashMap<TupleType, usize> =
            symbols.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let sig = Signature::new(sig_symbols)?;

        // beyond the named arities a merged structure determines the type of
        // its members, so one representative per isomorphism type suffices
        let mut members = Vec::new();
        let mut frontier: Vec<TupleType> = Vec::new();
        for (s, level) in levels.iter().enumerate().skip(1) {
            let mut seen = BTreeMap::new();
            for t in level {
                let st = structure_from_type(&sig, &symbols, &symbol_of, t, n);
                seen.entry(canonical_form(&st)).or_insert_with(|| (st, t.clone()));
            }
            if s == arity {
                frontier = seen.values().map(|(_, t)| t.clone()).collect();
            }
            members.extend(seen.into_values().map(|(st, _)| st));
        }
        for _ in arity + 1..=bound {
            let mut seen = BTreeMap::new();
            for t in &frontier {
                for e in extend_block(p, t, &one_orbits)? {
                    let st = structure_from_type(&sig, &symbols, &symbol_of, &e, n);
                    seen.entry(canonical_form(&st)).or_insert((st, e));
                }
            }
            frontier = seen.values().map(|(_, t)| t.clone()).collect();
            members.extend(seen.into_values().map(|(st, _)| st));
        }
        let name = format!("{}_merged", p.name().unwrap_or("presentation"));
        let merged = ClassPresentation::explicit(sig, members, bound)?
            .with_name(name)
            .with_claims(crate::presentation::Claims {
                homogeneous: p.claims().homogeneous,
                transitive: true,
            });
        Ok(Merge {
            original: p.clone(),
            one_orbits,
            merged,
            symbols,
            symbol_of,
            bound,
        })
    }

    pub fn presentation(&self) -> &ClassPresentation {
        &self.merged
    }

    pub fn original(&self) -> &ClassPresentation {
        &self.original
    }

    pub fn one_orbit_count(&self) -> usize {
        self.one_orbits.len()
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// The type of the concatenated members named by each merged symbol.
    pub fn symbol_types(&self) -> &[TupleType] {
        &self.symbols
    }

    /// Some age member of the original presentation in which point `i` lies
    /// in 1-orbit `orbits[i]`.
    pub fn realize_points(&self, orbits: &[usize]) -> Result<FinStructure> {
        let constraints: Vec<Constraint> = orbits
            .iter()
            .enumerate()
            .map(|(i, &o)| Constraint::new(vec![i], self.one_orbits[o].carrier().clone()))
            .collect();
        completions(&self.original, orbits.len(), &constraints, Some(1))?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Invalid("no age member with these 1-orbits".into()))
    }

    /// The merged structure on the given transversal sets of `s`, each listed
    /// in any order.
    pub fn structure_of(&self, s: &FinStructure, sets: &[Vec<usize>]) -> Result<FinStructure> {
        let n = self.one_orbits.len();
        if n <= 1 {
            return Err(Error::Invalid("nothing to merge".into()));
        }
        let mut ordered = Vec::with_capacity(sets.len());
        for set in sets {
            let mut slot = vec![usize::MAX; n];
            for &x in set {
                let t = TupleType::of_tuple(s, &[x]);
                let o = self
                    .one_orbits
                    .iter()
                    .position(|u| *u == t)
                    .ok_or_else(|| Error::TupleNotInAge(format!("point {x}")))?;
                if slot[o] != usize::MAX {
                    return Err(Error::Invalid(format!("{set:?} has two points in one 1-orbit")));
                }
                slot[o] = x;
            }
            if slot.contains(&usize::MAX) || set.len() != n {
                return Err(Error::Invalid(format!("{set:?} is not a transversal")));
            }
            ordered.push(slot);
        }
        let flat: Vec<usize> = ordered.iter().flatten().copied().collect();
        let t = TupleType::of_tuple(s, &flat);
        Ok(structure_from_type(
            self.merged.signature(),
            &self.symbols,
            &self.symbol_of,
            &t,
            n,
        ))
    }
}

/// Extensions of a type of `s` merged points by one more merged point,
/// distinct from the others.
fn extend_block(p: &ClassPresentation, t: &TupleType, one_orbits: &[TupleType]) -> Result<Vec<TupleType>> {
    let n = one_orbits.len();
    let base = t.arity();
    let mut frontier = vec![t.clone()];
    for (i, orbit) in one_orbits.iter().enumerate() {
        let mut next = Vec::new();
        for u in &frontier {
            for e in u.extend_one(p)? {
                if e.restrict(&[base + i]) == *orbit {
                    next.push(e);
                }
            }
        }
        frontier = next;
    }
    let blocks = base / n;
    Ok(frontier
        .into_iter()
        .filter(|e| {
            let new = &e.labeling()[base..];
            (0..blocks).all(|b| &e.labeling()[b * n..(b + 1) * n] != new)
        })
        .collect())
}

fn structure_from_type(
    sig: &Signature,
    symbols: &[TupleType],
    symbol_of: &HashMap<TupleType, usize>,
    t: &TupleType,
    n: usize,
) -> FinStructure {
    let points = t.arity() / n;
    let mut s = FinStructure::empty(sig, points);
    let max_k = symbols.iter().map(|u| u.arity() / n).max().unwrap_or(0);
    for k in 1..=max_k.min(points) {
        for arr in arrangements(points, k) {
            let positions: Vec<usize> = arr.iter().flat_map(|&b| b * n..(b + 1) * n).collect();
            if let Some(&sym) = symbol_of.get(&t.restrict(&positions)) {
                s.insert(sym, arr);
            }
        }
    }
    s
}

/// The merged presentation; unchanged when there is a single 1-orbit.
pub fn merge_to_transitive(p: &ClassPresentation) -> Result<ClassPresentation> {
    Ok(Merge::new(p, DEFAULT_MERGE_BOUND)?.merged)
}

/// Largest size [`acl_closure`] grows a structure to before giving up.
pub const CLOSURE_SIZE_CAP: usize = 12;

/// Adds algebraic points to `s` one at a time until none is left. The
/// original points keep their numbers.
pub fn acl_closure(p: &ClassPresentation, s: &FinStructure, bound: usize) -> Result<FinStructure> {
    let mut cur = s.clone();
    'grow: loop {
        if p.age_bound().is_some_and(|b| cur.size() >= b) {
            return Err(Error::ResourceLimit(format!(
                "acl closure reaches the explicit age bound at {} points",
                cur.size()
            )));
        }
        for ext in p.one_point_extensions(&cur)? {
            if count_realizations(p, &cur, &ext, bound)?.is_finite() {
                if ext.size() > CLOSURE_SIZE_CAP {
                    return Err(Error::ResourceLimit(format!(
                        "acl closure exceeds {CLOSURE_SIZE_CAP} points"
                    )));
                }
                cur = ext;
                continue 'grow;
            }
        }
        return Ok(cur);
    }
}

/// Whether `s` has no algebraic points outside itself.
pub fn is_acl_closed(p: &ClassPresentation, s: &FinStructure, bound: usize) -> Result<bool> {
    for ext in p.one_point_extensions(s)? {
        if count_realizations(p, s, &ext, bound)?.is_finite() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A point `c` of `structure` definable over the remaining points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DclWitness {
    pub structure: FinStructure,
    pub element: usize,
    pub parameters: Vec<usize>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub witness: Option<DclWitness>,
    /// Largest parameter-set size searched exhaustively.
    pub searched_to: usize,
    /// The search stopped below the cap because of an explicit age bound.
    pub truncated: bool,
}

/// Number of realizations of the type of point `c` over the other points of
/// `s`.
pub fn dcl_multiplicity(p: &ClassPresentation, s: &FinStructure, c: usize, bound: usize) -> Result<ExtensionCount> {
    let params: Vec<usize> = (0..s.size()).filter(|&x| x != c).collect();
    let mut order = params.clone();
    order.push(c);
    let base = s.induced(&params);
    let ext = s.induced(&order);
    count_realizations(p, &base, &ext, bound)
}

/// Smallest parameter set `A` and point `c ∉ A` with `c` the unique
/// realization of its type over `A`, searching `|A| <= cap`.
pub fn find_algebraicity_witness(p: &ClassPresentation, bound: usize, cap: usize) -> Result<WitnessSearch> {
    let mut searched_to = 0;
    for a in 1..=cap {
        if p.age_bound().is_some_and(|b| a + 2 > b) {
            return Ok(WitnessSearch {
                witness: None,
                searched_to,
                truncated: true,
            });
        }
        let levels = p.age_levels(a + 1)?;
        for s in &levels[a + 1] {
            for c in 0..s.size() {
                if dcl_multiplicity(p, s, c, bound)? == ExtensionCount::Exactly(1) {
                    return Ok(WitnessSearch {
                        witness: Some(DclWitness {
                            structure: s.clone(),
                            element: c,
                            parameters: (0..s.size()).filter(|&x| x != c).collect(),
                            multiplicity: 1,
                        }),
                        searched_to: a,
                        truncated: false,
                    });
                }
            }
        }
        searched_to = a;
    }
    Ok(WitnessSearch {
        witness: None,
        searched_to,
        truncated: false,
    })
}
