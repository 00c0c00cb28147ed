//! Imaginary sorts `D/E`, the open subgroups `G_{a/E}` they define, and the
//! finite lattice of open subgroups above a tuple stabilizer.
//!
//! An imaginary is always read inside a *frame*: a finite age member holding
//! concrete representatives. Every question about imaginaries is reduced to
//! gluing quantifier-free types over the frame.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::algebraicity::{acl_closure, is_acl_closed};
use crate::error::{Error, Result};
use crate::orbits::{ExtensionCount, TypeSpace, DEFAULT_COUNT_BOUND};
use crate::presentation::ClassPresentation;
use crate::structure::FinStructure;
use crate::types::{glue, Part, TupleType};
use crate::verdict::Verdict;

pub const DEFAULT_EQUIVALENCE_CAP: usize = 1 << 16;
pub const DEFAULT_CONJUGATE_CAP: usize = 3;
/// Largest base arity accepted for imaginary sorts.
pub const MAX_SORT_ARITY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Saturation bound for class and index counts.
    pub count_bound: usize,
    /// Largest number of subsets of pair orbits tried directly.
    pub equivalence_cap: usize,
    /// Arity of the tuples whose stabilizers seed the subgroup search.
    pub arity: usize,
    /// Number of conjugates tried when testing almost essentiality.
    pub conjugates: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            count_bound: DEFAULT_COUNT_BOUND,
            equivalence_cap: DEFAULT_EQUIVALENCE_CAP,
            arity: 1,
            conjugates: DEFAULT_CONJUGATE_CAP,
        }
    }
}

/// A sort `D/E`: `D` is the orbit of `base`, and `E` is given by the types of
/// the related pairs `(x, y)`, read as tuples of length `2n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sort {
    base: TupleType,
    pairs: BTreeSet<TupleType>,
}

impl Sort {
    pub fn new(base: TupleType, pairs: impl IntoIterator<Item = TupleType>) -> Sort {
        Sort {
            base,
            pairs: pairs.into_iter().collect(),
        }
    }

    /// The home sort of `base`: equality on its orbit.
    pub fn equality(base: TupleType) -> Sort {
        let pairs = BTreeSet::from([diagonal(&base)]);
        Sort { base, pairs }
    }

    pub fn base(&self) -> &TupleType {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.base.arity()
    }

    pub fn pairs(&self) -> impl Iterator<Item = &TupleType> {
        self.pairs.iter()
    }

    pub fn is_equality(&self) -> bool {
        self.pairs.len() == 1 && self.pairs.contains(&diagonal(&self.base))
    }

    pub fn relates(&self, pair: &TupleType) -> bool {
        self.pairs.contains(pair)
    }
}

/// The type of `(x, x)` for `x` of type `t`.
pub fn diagonal(t: &TupleType) -> TupleType {
    let n = t.arity();
    let positions: Vec<usize> = (0..n).chain(0..n).collect();
    t.restrict(&positions)
}

/// The class of `tuple` (points of a frame) in `sort`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Imaginary {
    pub sort: Sort,
    pub tuple: Vec<usize>,
}

impl Imaginary {
    pub fn new(frame: &FinStructure, sort: Sort, tuple: Vec<usize>) -> Result<Imaginary> {
        if tuple.iter().any(|&x| x >= frame.size()) {
            return Err(Error::Invalid(format!("{tuple:?} leaves the frame")));
        }
        if TupleType::of_tuple(frame, &tuple) != *sort.base() {
            return Err(Error::Invalid(format!("{tuple:?} is not in the base orbit of its sort")));
        }
        Ok(Imaginary { sort, tuple })
    }

    /// A real tuple, as an imaginary of its home sort.
    pub fn point(frame: &FinStructure, tuple: Vec<usize>) -> Imaginary {
        let sort = Sort::equality(TupleType::of_tuple(frame, &tuple));
        Imaginary { sort, tuple }
    }
}

/// The stabilizer `G_α` of an imaginary read in a frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSubgroupDescriptor {
    pub frame: FinStructure,
    pub imaginary: Imaginary,
}

fn concat(items: &[&Imaginary]) -> (Vec<usize>, Vec<usize>) {
    let mut tuple = Vec::new();
    let mut starts = Vec::new();
    for a in items {
        starts.push(tuple.len());
        tuple.extend_from_slice(&a.tuple);
    }
    (tuple, starts)
}

/// Calls `visit` on one choice of related-pair type per sort, stopping
/// when it returns `false`.
fn for_each_choice<'a>(
    sorts: &[&'a Sort],
    visit: &mut dyn FnMut(&[&'a TupleType]) -> Result<bool>,
) -> Result<bool> {
    let lists: Vec<Vec<&TupleType>> = sorts.iter().map(|s| s.pairs().collect()).collect();
    if lists.iter().any(|l| l.is_empty()) {
        return Ok(true);
    }
    let mut idx = vec![0; lists.len()];
    loop {
        let choice: Vec<&TupleType> = idx.iter().enumerate().map(|(i, &j)| lists[i][j]).collect();
        if !visit(&choice)? {
            return Ok(false);
        }
        let mut i = 0;
        loop {
            if i == idx.len() {
                return Ok(true);
            }
            idx[i] += 1;
            if idx[i] < lists[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Whether some automorphism maps `ys[i]` to `xs[i]` for every `i`.
pub fn jointly_conjugate(p: &ClassPresentation, frame: &FinStructure, xs: &[Imaginary], ys: &[Imaginary]) -> Result<bool> {
    if xs.len() != ys.len() {
        return Err(Error::Invalid("imaginary lists differ in length".into()));
    }
    if xs.iter().zip(ys).any(|(x, y)| x.sort != y.sort) {
        return Err(Error::SortMismatch);
    }
    let xr: Vec<&Imaginary> = xs.iter().collect();
    let yr: Vec<&Imaginary> = ys.iter().collect();
    let (xt, starts) = concat(&xr);
    let (yt, _) = concat(&yr);
    let tx = TupleType::of_tuple(frame, &xt);
    let ty = TupleType::of_tuple(frame, &yt);
    if xs.iter().all(|x| x.sort.is_equality()) {
        return Ok(tx == ty);
    }
    let len = xt.len();
    let sorts: Vec<&Sort> = xs.iter().map(|x| &x.sort).collect();
    let mut found = false;
    for_each_choice(&sorts, &mut |choice| {
        let mut parts = vec![
            Part { ty: &tx, positions: (0..len).collect() },
            Part { ty: &ty, positions: (len..2 * len).collect() },
        ];
        for (i, e) in choice.iter().enumerate() {
            let n = xs[i].tuple.len();
            let s = starts[i];
            let positions = (s..s + n).chain(len + s..len + s + n).collect();
            parts.push(Part { ty: e, positions });
        }
        found = !glue(p, 2 * len, &parts)?.is_empty();
        Ok(!found)
    })?;
    Ok(found)
}

/// Whether `beta` is fixed by every automorphism fixing each of `alpha`.
pub fn in_dcl(p: &ClassPresentation, frame: &FinStructure, alpha: &[Imaginary], beta: &Imaginary) -> Result<bool> {
    in_dcl_by(p, frame, alpha, &beta.tuple, &|t: &TupleType| beta.sort.relates(t))
}

/// As [`in_dcl`], with the target class given by a test on the type of
/// `(b, b')` for two representatives.
fn in_dcl_by(
    p: &ClassPresentation,
    frame: &FinStructure,
    alpha: &[Imaginary],
    b: &[usize],
    same: &dyn Fn(&TupleType) -> bool,
) -> Result<bool> {
    let ar: Vec<&Imaginary> = alpha.iter().collect();
    let (xt, starts) = concat(&ar);
    let points_fixed = alpha.iter().all(|a| a.sort.is_equality());
    if points_fixed && b.iter().all(|x| xt.contains(x)) {
        let bt = TupleType::of_tuple(frame, &[b, b].concat());
        return Ok(same(&bt));
    }
    let len = xt.len();
    let m = b.len();
    let mut joint = xt.clone();
    joint.extend_from_slice(b);
    let r = TupleType::of_tuple(frame, &joint);
    let total = 2 * (len + m);
    let b_then_b2: Vec<usize> = (len..len + m).chain(2 * len + m..total).collect();
    let sorts: Vec<&Sort> = alpha.iter().map(|a| &a.sort).collect();
    let mut ok = true;
    for_each_choice(&sorts, &mut |choice| {
        let mut parts = vec![
            Part { ty: &r, positions: (0..len + m).collect() },
            Part { ty: &r, positions: (len + m..total).collect() },
        ];
        for (i, e) in choice.iter().enumerate() {
            let n = alpha[i].tuple.len();
            let s = starts[i];
            let positions = (s..s + n).chain(len + m + s..len + m + s + n).collect();
            parts.push(Part { ty: e, positions });
        }
        for t in glue(p, total, &parts)? {
            if !same(&t.restrict(&b_then_b2)) {
                ok = false;
                break;
            }
        }
        Ok(ok)
    })?;
    Ok(ok)
}

/// `G_α ⊆ G_β` for descriptors over one frame.
pub fn contains(p: &ClassPresentation, u: &OpenSubgroupDescriptor, v: &OpenSubgroupDescriptor) -> Result<bool> {
    if u.frame != v.frame {
        return Err(Error::Invalid("descriptors are read in different frames".into()));
    }
    in_dcl(p, &u.frame, std::slice::from_ref(&u.imaginary), &v.imaginary)
}

/// Number of images of `beta` under the stabilizer of `alpha`, that is the
/// index `|G_α : G_α ∩ G_β|`, saturated at `bound`.
pub fn conjugate_count(
    p: &ClassPresentation,
    frame: &FinStructure,
    alpha: &[Imaginary],
    beta: &Imaginary,
    bound: usize,
) -> Result<ExtensionCount> {
    let ar: Vec<&Imaginary> = alpha.iter().collect();
    let (xt, starts) = concat(&ar);
    let len = xt.len();
    let m = beta.tuple.len();
    let mut joint = xt.clone();
    joint.extend_from_slice(&beta.tuple);
    let r = TupleType::of_tuple(frame, &joint);
    let mut first = xt.clone();
    first.extend_from_slice(&joint);
    let mut search = ConjugateSearch {
        p,
        alpha,
        sort: &beta.sort,
        starts,
        len,
        m,
        r,
        bound,
        best: 0,
        truncated: false,
        seen: HashSet::new(),
    };
    search.run(TupleType::of_tuple(frame, &first), 1)?;
    Ok(if search.best >= bound {
        ExtensionCount::AtLeast(bound)
    } else if search.truncated {
        ExtensionCount::AtLeast(search.best)
    } else {
        ExtensionCount::Exactly(search.best)
    })
}

/// States are types of `(x, x_1, b_1, ..., x_j, b_j)` with each `x_i`
/// equivalent to `x`, each `(x_i, b_i)` of the type of `(x, b)`, and the
/// `b_i` in distinct classes.
struct ConjugateSearch<'a> {
    p: &'a ClassPresentation,
    alpha: &'a [Imaginary],
    sort: &'a Sort,
    starts: Vec<usize>,
    len: usize,
    m: usize,
    r: TupleType,
    bound: usize,
    best: usize,
    truncated: bool,
    seen: HashSet<TupleType>,
}

impl ConjugateSearch<'_> {
    fn run(&mut self, state: TupleType, j: usize) -> Result<()> {
        self.best = self.best.max(j);
        if self.best >= self.bound || !self.seen.insert(state.clone()) {
            return Ok(());
        }
        let old = state.arity();
        let block = self.len + self.m;
        let total = old + block;
        let mut next = Vec::new();
        let sorts: Vec<&Sort> = self.alpha.iter().map(|a| &a.sort).collect();
        let p = self.p;
        let mut truncated = false;
        let (len, starts, r) = (self.len, &self.starts, &self.r);
        for_each_choice(&sorts, &mut |choice| {
            let mut parts = vec![
                Part { ty: &state, positions: (0..old).collect() },
                Part { ty: r, positions: (old..total).collect() },
            ];
            for (i, e) in choice.iter().enumerate() {
                let n = self.alpha[i].tuple.len();
                let s = starts[i];
                let positions = (s..s + n).chain(old + s..old + s + n).collect();
                parts.push(Part { ty: e, positions });
            }
            match glue(p, total, &parts) {
                Ok(ts) => next.extend(ts),
                Err(Error::BoundExceeded { .. }) => truncated = true,
                Err(e) => return Err(e),
            }
            Ok(true)
        })?;
        self.truncated |= truncated;
        let b_new: Vec<usize> = (old + len..total).collect();
        for t in next {
            let distinct = (0..j).all(|i| {
                let b_old: Vec<usize> = (0..self.m).map(|k| len + i * block + len + k).collect();
                let pair: Vec<usize> = b_old.iter().chain(&b_new).copied().collect();
                !self.sort.relates(&t.restrict(&pair))
            });
            if distinct {
                self.run(t, j + 1)?;
                if self.best >= self.bound {
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

/// The types of pairs `(x, y)` with `x, y` in the orbit of `base`, with
/// composition of pair types cached.
pub struct PairSpace<'a> {
    p: &'a ClassPresentation,
    base: TupleType,
    pairs: Vec<TupleType>,
    index: HashMap<TupleType, usize>,
    swap: Vec<usize>,
    diagonal: usize,
    compose_cache: Mutex<HashMap<(usize, usize), Vec<usize>>>,
}

impl<'a> PairSpace<'a> {
    pub fn new(p: &'a ClassPresentation, base: &TupleType) -> Result<PairSpace<'a>> {
        let n = base.arity();
        if n > MAX_SORT_ARITY {
            return Err(Error::ResourceLimit(format!(
                "sort arity {n} exceeds {MAX_SORT_ARITY}"
            )));
        }
        let pairs = glue(
            p,
            2 * n,
            &[
                Part { ty: base, positions: (0..n).collect() },
                Part { ty: base, positions: (n..2 * n).collect() },
            ],
        )?;
        let index: HashMap<TupleType, usize> = pairs.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let flip: Vec<usize> = (n..2 * n).chain(0..n).collect();
        let swap = pairs.iter().map(|t| index[&t.restrict(&flip)]).collect();
        let diagonal = index[&diagonal(base)];
        Ok(PairSpace {
            p,
            base: base.clone(),
            pairs,
            index,
            swap,
            diagonal,
            compose_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn base(&self) -> &TupleType {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[TupleType] {
        &self.pairs
    }

    pub fn index_of(&self, t: &TupleType) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn diagonal(&self) -> usize {
        self.diagonal
    }

    pub fn swap(&self, i: usize) -> usize {
        self.swap[i]
    }

    /// Types of `(x, z)` over triples with `(x, y)` of type `i` and `(y, z)`
    /// of type `j`.
    pub fn compose(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        if let Some(hit) = self.compose_cache.lock().expect("cache").get(&(i, j)) {
            return Ok(hit.clone());
        }
        let n = self.base.arity();
        let triples = glue(
            self.p,
            3 * n,
            &[
                Part { ty: &self.pairs[i], positions: (0..2 * n).collect() },
                Part { ty: &self.pairs[j], positions: (n..3 * n).collect() },
            ],
        )?;
        let outer: Vec<usize> = (0..n).chain(2 * n..3 * n).collect();
        let mut out: Vec<usize> = triples.iter().map(|t| self.index[&t.restrict(&outer)]).collect();
        out.sort_unstable();
        out.dedup();
        self.compose_cache.lock().expect("cache").insert((i, j), out.clone());
        Ok(out)
    }

    /// The smallest equivalence containing the flagged pair types.
    pub fn closure(&self, set: &[bool]) -> Result<Vec<bool>> {
        let mut member = set.to_vec();
        member[self.diagonal] = true;
        let mut list: Vec<usize> = (0..self.len()).filter(|&i| member[i]).collect();
        let mut queue: VecDeque<usize> = list.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            let mut fresh = vec![self.swap[x]];
            for &y in &list.clone() {
                fresh.extend(self.compose(x, y)?);
                fresh.extend(self.compose(y, x)?);
            }
            for z in fresh {
                if !member[z] {
                    member[z] = true;
                    list.push(z);
                    queue.push_back(z);
                }
            }
        }
        Ok(member)
    }

    pub fn is_equivalence(&self, set: &[bool]) -> Result<bool> {
        if !set[self.diagonal] {
            return Ok(false);
        }
        let list: Vec<usize> = (0..self.len()).filter(|&i| set[i]).collect();
        for &x in &list {
            if !set[self.swap[x]] {
                return Ok(false);
            }
        }
        for &x in &list {
            for &y in &list {
                if self.compose(x, y)?.iter().any(|&z| !set[z]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn equivalence(&self, set: &[bool]) -> DefinableEquivalence {
        let (inside, outside): (Vec<usize>, Vec<usize>) = (0..self.len()).partition(|&i| set[i]);
        DefinableEquivalence {
            sort: Sort::new(self.base.clone(), inside.iter().map(|&i| self.pairs[i].clone())),
            complement: outside.iter().map(|&i| self.pairs[i].clone()).collect(),
            verified: true,
        }
    }
}

/// A definable equivalence on the orbit of its base, with the pair types
/// it leaves out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinableEquivalence {
    pub sort: Sort,
    pub complement: Vec<TupleType>,
    /// Checked closed under reflexivity, symmetry and composition.
    pub verified: bool,
}

impl DefinableEquivalence {
    pub fn arity(&self) -> usize {
        self.sort.arity()
    }

    pub fn is_equality(&self) -> bool {
        self.sort.is_equality()
    }

    pub fn is_total(&self) -> bool {
        self.complement.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.sort.pairs.len()
    }

    /// A proper set of coordinates on which agreement already implies
    /// equivalence, smallest first.
    pub fn degenerate_witness(&self) -> Option<Vec<usize>> {
        let n = self.arity();
        let mut subsets: Vec<Vec<usize>> = (0..(1usize << n) - 1)
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
            .collect();
        subsets.sort_by_key(|s: &Vec<usize>| s.len());
        subsets.into_iter().find(|sigma| {
            !self.complement.iter().any(|t| {
                let l = t.labeling();
                sigma.iter().all(|&i| l[i] == l[n + i])
            })
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate_witness().is_some()
    }

    pub fn is_subset_of(&self, other: &DefinableEquivalence) -> bool {
        self.sort.base == other.sort.base && self.sort.pairs.is_subset(&other.sort.pairs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationMethod {
    /// Every union of pair orbits was tested.
    Subsets,
    /// Too many unions; equivalences were generated as joins of the ones
    /// generated by a single pair orbit.
    Joins,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceFamily {
    pub base: TupleType,
    pub pair_types: usize,
    pub method: EnumerationMethod,
    /// Ordered by number of pair types; equality first, the total relation
    /// last.
    pub equivalences: Vec<DefinableEquivalence>,
}

/// All definable equivalences on the orbit of `base`.
pub fn equivalences_on(p: &ClassPresentation, base: &TupleType, cap: usize) -> Result<EquivalenceFamily> {
    let space = PairSpace::new(p, base)?;
    let k = space.len();
    let free: Vec<usize> = (0..k).filter(|&i| i != space.diagonal()).collect();
    let mut found: Vec<Vec<bool>> = Vec::new();
    let method = if free.len() < 63 && (1usize << free.len()) <= cap {
        for mask in 0usize..(1 << free.len()) {
            let mut set = vec![false; k];
            set[space.diagonal()] = true;
            for (b, &i) in free.iter().enumerate() {
                set[i] = mask >> b & 1 == 1;
            }
            if space.is_equivalence(&set)? {
                found.push(set);
            }
        }
        EnumerationMethod::Subsets
    } else {
        let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
        let mut list = Vec::new();
        for i in 0..k {
            let mut set = vec![false; k];
            set[i] = true;
            let c = space.closure(&set)?;
            if seen.insert(c.clone()) {
                list.push(c);
            }
        }
        let mut frontier = list.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for a in &frontier {
                for b in &list.clone() {
                    let union: Vec<bool> = a.iter().zip(b).map(|(x, y)| *x || *y).collect();
                    let c = space.closure(&union)?;
                    if seen.insert(c.clone()) {
                        if seen.len() > cap {
                            return Err(Error::ResourceLimit(format!(
                                "more than {cap} equivalences on one orbit"
                            )));
                        }
                        list.push(c.clone());
                        next.push(c);
                    }
                }
            }
            frontier = next;
        }
        found = list;
        EnumerationMethod::Joins
    };
    found.sort_by_key(|s| (s.iter().filter(|&&x| x).count(), s.iter().map(|&x| !x).collect::<Vec<_>>()));
    Ok(EquivalenceFamily {
        base: base.clone(),
        pair_types: k,
        method,
        equivalences: found.iter().map(|s| space.equivalence(s)).collect(),
    })
}

/// Definable equivalences on each `n`-orbit.
pub fn enumerate_equivalences(p: &ClassPresentation, n: usize, cap: usize) -> Result<Vec<EquivalenceFamily>> {
    let space = TypeSpace::new(p, n)?;
    space
        .table(n)
        .types()
        .iter()
        .map(|t| equivalences_on(p, t, cap))
        .collect()
}

/// The open subgroups containing the stabilizer of a tuple, one per
/// definable equivalence on its orbit, ordered by containment upwards.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupLattice {
    pub base: TupleType,
    pub frame: FinStructure,
    pub tuple: Vec<usize>,
    pub method: EnumerationMethod,
    pub equivalences: Vec<DefinableEquivalence>,
    /// `contains[i][j]`: subgroup `i` lies inside subgroup `j`.
    pub contains: Vec<Vec<bool>>,
}

impl SubgroupLattice {
    pub fn len(&self) -> usize {
        self.equivalences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equivalences.is_empty()
    }

    pub fn descriptor(&self, i: usize) -> OpenSubgroupDescriptor {
        OpenSubgroupDescriptor {
            frame: self.frame.clone(),
            imaginary: self.imaginary(i),
        }
    }

    pub fn imaginary(&self, i: usize) -> Imaginary {
        Imaginary {
            sort: self.equivalences[i].sort.clone(),
            tuple: self.tuple.clone(),
        }
    }

    /// The stabilizer of the tuple itself.
    pub fn bottom(&self) -> usize {
        0
    }

    /// The whole group.
    pub fn top(&self) -> usize {
        self.len() - 1
    }

    /// The subgroups minimal among those strictly above `i`.
    pub fn covers(&self, i: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| j != i && self.contains[i][j])
            .filter(|&j| !(0..self.len()).any(|k| k != i && k != j && self.contains[i][k] && self.contains[k][j]))
            .collect()
    }

    /// Shortest length of a maximal chain from subgroup `i` up to the
    /// whole group.
    pub fn depth(&self, i: usize) -> usize {
        let mut dist = vec![usize::MAX; self.len()];
        dist[i] = 0;
        let mut queue = VecDeque::from([i]);
        while let Some(x) = queue.pop_front() {
            if x == self.top() {
                return dist[x];
            }
            for y in self.covers(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        unreachable!("the whole group lies above every subgroup")
    }
}

pub fn subgroups_above(p: &ClassPresentation, base: &TupleType, cap: usize) -> Result<SubgroupLattice> {
    let family = equivalences_on(p, base, cap)?;
    let k = family.equivalences.len();
    let contains = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| family.equivalences[i].is_subset_of(&family.equivalences[j]))
                .collect()
        })
        .collect();
    Ok(SubgroupLattice {
        base: base.clone(),
        frame: base.carrier().clone(),
        tuple: base.labeling().to_vec(),
        method: family.method,
        equivalences: family.equivalences,
        contains,
    })
}

/// `|U : V|` for subgroups `V ⊆ U` of one lattice.
pub fn index_in(
    p: &ClassPresentation,
    lattice: &SubgroupLattice,
    upper: usize,
    lower: usize,
    bound: usize,
) -> Result<ExtensionCount> {
    if !lattice.contains[lower][upper] {
        return Err(Error::Invalid(format!("subgroup {lower} is not inside subgroup {upper}")));
    }
    conjugate_count(
        p,
        &lattice.frame,
        &[lattice.imaginary(upper)],
        &lattice.imaginary(lower),
        bound,
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub depth: usize,
    pub irreducible: bool,
    /// Enumerated proper subgroups of finite index, with the index.
    pub finite_index_below: Vec<(usize, usize)>,
    pub almost_essential: bool,
    pub essential: bool,
}

/// A configuration showing that a point of the given 1-orbit is definable
/// over finitely many conjugates of the subgroup's imaginary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugateWitness {
    pub point_orbit: TupleType,
    /// Type of `(b, x_1, ..., x_k)`; `b` is the point.
    pub configuration: TupleType,
    pub conjugates: usize,
}

/// Searches, for every 1-orbit, a point definable over at most `cap`
/// conjugates of `G_{x/E}`. Returns the witnesses, or `None` for a 1-orbit
/// where none was found.
pub fn almost_essential_witnesses(
    p: &ClassPresentation,
    sort: &Sort,
    cap: usize,
) -> Result<Vec<(TupleType, Option<ConjugateWitness>)>> {
    let space = TypeSpace::new(p, 1)?;
    let n = sort.arity();
    let mut out = Vec::new();
    for point in space.table(1).types() {
        let mut frontier = vec![point.clone()];
        let mut found = None;
        'search: for k in 1..=cap {
            let mut next = BTreeSet::new();
            for t in &frontier {
                let len = t.arity();
                for e in glue(
                    p,
                    len + n,
                    &[
                        Part { ty: t, positions: (0..len).collect() },
                        Part { ty: sort.base(), positions: (len..len + n).collect() },
                    ],
                )? {
                    next.insert(e);
                }
            }
            for t in &next {
                let frame = t.carrier();
                let alpha: Vec<Imaginary> = (0..k)
                    .map(|i| Imaginary {
                        sort: sort.clone(),
                        tuple: t.labeling()[1 + i * n..1 + (i + 1) * n].to_vec(),
                    })
                    .collect();
                let b = [t.labeling()[0]];
                let same = |u: &TupleType| u.labeling()[0] == u.labeling()[1];
                if in_dcl_by(p, frame, &alpha, &b, &same)? {
                    found = Some(ConjugateWitness {
                        point_orbit: point.clone(),
                        configuration: t.clone(),
                        conjugates: k,
                    });
                    break 'search;
                }
            }
            frontier = next.into_iter().collect();
        }
        out.push((point.clone(), found));
    }
    Ok(out)
}

pub fn is_almost_essential(p: &ClassPresentation, sort: &Sort, cap: usize) -> Result<bool> {
    Ok(almost_essential_witnesses(p, sort, cap)?
        .iter()
        .all(|(_, w)| w.is_some()))
}

/// One subgroup of the candidate family with its classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedSubgroup {
    pub lattice: usize,
    pub index: usize,
    pub equivalence: DefinableEquivalence,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EssentialReport {
    pub caps: Caps,
    pub lattices: Vec<SubgroupLattice>,
    pub subgroups: Vec<ClassifiedSubgroup>,
    /// Smallest depth of an almost essential subgroup found.
    pub essential_depth: Option<usize>,
}

impl EssentialReport {
    pub fn essential(&self) -> impl Iterator<Item = &ClassifiedSubgroup> {
        self.subgroups.iter().filter(|s| s.classification.essential)
    }

    pub fn find(&self, lattice: usize, index: usize) -> Option<&ClassifiedSubgroup> {
        self.subgroups.iter().find(|s| s.lattice == lattice && s.index == index)
    }
}

/// Classifies every subgroup above the stabilizer of an `n`-orbit
/// representative, `n <= caps.arity`.
pub fn classify_subgroups(p: &ClassPresentation, caps: &Caps) -> Result<EssentialReport> {
    let space = TypeSpace::new(p, caps.arity)?;
    let mut lattices = Vec::new();
    for n in 1..=caps.arity {
        for t in space.table(n).types() {
            lattices.push(subgroups_above(p, t, caps.equivalence_cap)?);
        }
    }
    let mut subgroups = Vec::new();
    for (li, lat) in lattices.iter().enumerate() {
        for i in 0..lat.len() {
            let mut finite_index_below = Vec::new();
            for j in 0..lat.len() {
                if j != i && lat.contains[j][i] {
                    if let ExtensionCount::Exactly(k) = index_in(p, lat, i, j, caps.count_bound)? {
                        finite_index_below.push((j, k));
                    }
                }
            }
            subgroups.push(ClassifiedSubgroup {
                lattice: li,
                index: i,
                equivalence: lat.equivalences[i].clone(),
                classification: Classification {
                    depth: lat.depth(i),
                    irreducible: finite_index_below.is_empty(),
                    finite_index_below,
                    almost_essential: is_almost_essential(p, &lat.equivalences[i].sort, caps.conjugates)?,
                    essential: false,
                },
            });
        }
    }
    let essential_depth = subgroups
        .iter()
        .filter(|s| s.classification.almost_essential)
        .map(|s| s.classification.depth)
        .min();
    for s in &mut subgroups {
        s.classification.essential =
            s.classification.almost_essential && Some(s.classification.depth) == essential_depth;
    }
    Ok(EssentialReport {
        caps: *caps,
        lattices,
        subgroups,
        essential_depth,
    })
}

/// A finite algebraically closed set sandwiching one subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lattice: usize,
    pub index: usize,
    /// The acl-closure of the tuple, in which the candidate sets live.
    pub frame: FinStructure,
    pub tuple: Vec<usize>,
    /// Every acl-closed subset `A` of the frame with
    /// `G_(A) ⊆ U ⊆ G_{A}`.
    pub sets: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeiReport {
    pub verdict: Verdict,
    pub caps: Caps,
    pub subgroups: Vec<Sandwich>,
}

/// Weak elimination of imaginaries for the subgroups above tuple
/// stabilizers of arity `<= caps.arity`: each must be sandwiched by exactly
/// one finite algebraically closed set.
pub fn check_wei(p: &ClassPresentation, caps: &Caps) -> Result<WeiReport> {
    let space = TypeSpace::new(p, caps.arity)?;
    let mut subgroups = Vec::new();
    let mut li = 0;
    for n in 1..=caps.arity {
        for t in space.table(n).types() {
            let lat = subgroups_above(p, t, caps.equivalence_cap)?;
            let frame = acl_closure(p, &lat.frame, caps.count_bound)?;
            let points = frame.size();
            let mut closed = Vec::new();
            for mask in 0usize..(1 << points) {
                let set: Vec<usize> = (0..points).filter(|i| mask >> i & 1 == 1).collect();
                if is_acl_closed(p, &frame.induced(&set), caps.count_bound)? {
                    closed.push(set);
                }
            }
            for i in 0..lat.len() {
                let u = Imaginary {
                    sort: lat.equivalences[i].sort.clone(),
                    tuple: lat.tuple.clone(),
                };
                let mut sets = Vec::new();
                for a in &closed {
                    let fixed = Imaginary::point(&frame, a.clone());
                    let below = in_dcl(p, &frame, std::slice::from_ref(&fixed), &u)?;
                    let same_set = |t: &TupleType| {
                        let l = t.labeling();
                        let k = l.len() / 2;
                        let x: BTreeSet<usize> = l[..k].iter().copied().collect();
                        let y: BTreeSet<usize> = l[k..].iter().copied().collect();
                        x == y
                    };
                    if below && in_dcl_by(p, &frame, std::slice::from_ref(&u), a, &same_set)? {
                        sets.push(a.clone());
                    }
                }
                subgroups.push(Sandwich {
                    lattice: li,
                    index: i,
                    frame: frame.clone(),
                    tuple: lat.tuple.clone(),
                    sets,
                });
            }
            li += 1;
        }
    }
    let verdict = if subgroups.iter().any(|s| s.sets.len() > 1) {
        Verdict::Fail
    } else if subgroups.iter().any(|s| s.sets.is_empty()) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(WeiReport {
        verdict,
        caps: *caps,
        subgroups,
    })
}
