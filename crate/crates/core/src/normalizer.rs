//! The finite groups of orbit relabelings whose inverse limit is `N_G / G`.
//!
//! A relabeling permutes the orbit indices of every arity up to `n`
//! coherently with restriction maps. It is kept when, for every age member
//! up to the consistency bound, renaming the orbit data of the member yields
//! the orbit data of another age member on the same points, and when one
//! point extension counts are preserved. A back-and-forth search certifies
//! that a kept relabeling is induced by a partial map of orbital structures.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::complete::{completions, Constraint};
use crate::error::{Error, Result};
use crate::orbits::{ExtensionCount, TypeSpace};
use crate::presentation::ClassPresentation;
use crate::structure::FinStructure;
use crate::types::TupleType;

pub const DEFAULT_CONSISTENCY_BOUND: usize = 5;
pub const DEFAULT_CERTIFICATE_DEPTH: usize = 6;

/// A coherent family of orbit-index permutations, one for each arity
/// `0..=n`; `levels[k][o]` is the image of orbit `o` of arity `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitPermutationSystem {
    pub levels: Vec<Vec<usize>>,
}

impl OrbitPermutationSystem {
    pub fn identity(space: &TypeSpace, n: usize) -> Self {
        OrbitPermutationSystem {
            levels: (0..=n).map(|k| (0..space.table(k).len()).collect()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn top(&self) -> &[usize] {
        &self.levels[self.arity()]
    }

    pub fn is_identity(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.iter().enumerate().all(|(i, &x)| i == x))
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Self) -> Self {
        OrbitPermutationSystem {
            levels: self
                .levels
                .iter()
                .zip(&other.levels)
                .map(|(a, b)| b.iter().map(|&x| a[x]).collect())
                .collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        OrbitPermutationSystem {
            levels: self
                .levels
                .iter()
                .map(|l| {
                    let mut inv = vec![0; l.len()];
                    for (i, &x) in l.iter().enumerate() {
                        inv[x] = i;
                    }
                    inv
                })
                .collect(),
        }
    }

    /// The system restricted to arities `0..=m`.
    pub fn project(&self, m: usize) -> Self {
        OrbitPermutationSystem {
            levels: self.levels[..=m].to_vec(),
        }
    }

    fn image_type(&self, space: &TypeSpace, t: &TupleType) -> TupleType {
        let k = t.arity();
        space.table(k).get(self.levels[k][space.index_of(t)]).clone()
    }
}

/// A chain of age members `S_1 ⊂ S_2 ⊂ ...` with their relabeled images,
/// every one-point extension of either side matched at every step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizabilityCertificate {
    pub depth: usize,
    pub chain: Vec<(FinStructure, FinStructure)>,
    pub extensions_matched: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizabilityFailure {
    pub reason: String,
    pub configuration: Option<FinStructure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Realizability {
    Certified(RealizabilityCertificate),
    Failed(RealizabilityFailure),
}

impl Realizability {
    pub fn is_certified(&self) -> bool {
        matches!(self, Realizability::Certified(_))
    }
}

/// A finite group of orbit relabelings at one arity, with its
/// multiplication table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelGroup {
    pub arity: usize,
    pub consistency_bound: usize,
    pub elements: Vec<OrbitPermutationSystem>,
    pub certificates: Vec<Realizability>,
    /// `table[i][j]` is the index of `elements[i] ∘ elements[j]`.
    pub table: Vec<Vec<usize>>,
    pub generators: Vec<usize>,
    /// Every element carries a realizability certificate.
    pub exact: bool,
}

impl LevelGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, g: &OrbitPermutationSystem) -> Option<usize> {
        self.elements.iter().position(|e| e == g)
    }

    /// Checks closure, identity and inverses on the multiplication table.
    pub fn is_group(&self) -> bool {
        let n = self.order();
        if n == 0 || !self.elements[0].is_identity() {
            return false;
        }
        let closed = self.table.len() == n && self.table.iter().all(|r| r.len() == n && r.iter().all(|&x| x < n));
        let inverses = (0..n).all(|i| (0..n).any(|j| self.table[i][j] == 0));
        let assoc = (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| self.table[self.table[a][b]][c] == self.table[a][self.table[b][c]]))
        });
        closed && inverses && assoc
    }
}

/// Precomputed data shared by the level searches of one presentation.
struct Context<'a> {
    space: &'a TypeSpace,
    n: usize,
    age: Vec<FinStructure>,
    /// `profiles[k][o]`: extension counts of orbit `o` of arity `k < n`.
    profiles: Vec<Vec<BTreeMap<usize, ExtensionCount>>>,
}

impl<'a> Context<'a> {
    fn new(space: &'a TypeSpace, n: usize, bound: usize) -> Result<Self> {
        let p = space.presentation();
        let age_bound = bound.min(p.age_bound().unwrap_or(usize::MAX));
        let age = if age_bound == 0 {
            Vec::new()
        } else {
            p.enumerate_age(age_bound)?
        };
        let mut profiles = Vec::new();
        for k in 0..n {
            let mut level = Vec::new();
            for o in 0..space.table(k).len() {
                level.push(space.extension_profile(k, o, bound.max(2))?.into_iter().collect());
            }
            profiles.push(level);
        }
        Ok(Context {
            space,
            n,
            age,
            profiles,
        })
    }

    /// All systems compatible with restriction along position maps.
    fn coherent_systems(&self) -> Vec<OrbitPermutationSystem> {
        let mut out = Vec::new();
        let mut levels = vec![vec![0usize]];
        self.extend_levels(&mut levels, &mut out);
        out
    }

    fn extend_levels(&self, levels: &mut Vec<Vec<usize>>, out: &mut Vec<OrbitPermutationSystem>) {
        let k = levels.len();
        if k > self.n {
            out.push(OrbitPermutationSystem {
                levels: levels.clone(),
            });
            return;
        }
        let table = self.space.table(k);
        let mut assign: Vec<Option<usize>> = vec![None; table.len()];
        // non-injective types are determined by lower arities
        for (o, t) in table.types().iter().enumerate() {
            if !t.is_injective() {
                let support = TupleType::of_tuple(t.carrier(), &(0..t.support()).collect::<Vec<_>>());
                let d = support.arity();
                let img = self.space.table(d).get(levels[d][self.space.index_of(&support)]);
                assign[o] = Some(self.space.index_of(&img.restrict(t.labeling())));
            }
        }
        let injective: Vec<usize> = (0..table.len())
            .filter(|&o| table.get(o).is_injective())
            .collect();
        let faces = arrangements(k, k.saturating_sub(1));
        let perms = arrangements(k, k);
        let mut used = vec![false; table.len()];
        for a in assign.iter().flatten() {
            used[*a] = true;
        }
        self.assign_injective(levels, &injective, 0, &faces, &perms, &mut assign, &mut used, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_injective(
        &self,
        levels: &mut Vec<Vec<usize>>,
        injective: &[usize],
        i: usize,
        faces: &[Vec<usize>],
        perms: &[Vec<usize>],
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        out: &mut Vec<OrbitPermutationSystem>,
    ) {
        let k = levels.len();
        let table = self.space.table(k);
        let Some(&o) = injective.get(i) else {
            levels.push(assign.iter().map(|a| a.expect("complete")).collect());
            self.extend_levels(levels, out);
            levels.pop();
            return;
        };
        if assign[o].is_some() {
            self.assign_injective(levels, injective, i + 1, faces, perms, assign, used, out);
            return;
        }
        let t = table.get(o);
        for &cand in injective {
            if used[cand] {
                continue;
            }
            let c = table.get(cand);
            let faces_ok = k <= 1
                || faces.iter().all(|f| {
                    let lower = t.restrict(f);
                    let img = levels[k - 1][self.space.index_of(&lower)];
                    self.space.index_of(&c.restrict(f)) == img
                });
            if !faces_ok {
                continue;
            }
            // coordinate permutations must commute with the assignment
            let mut newly = Vec::new();
            let mut ok = true;
            for pi in perms {
                let src = self.space.index_of(&t.restrict(pi));
                let dst = self.space.index_of(&c.restrict(pi));
                match assign[src] {
                    Some(x) if x == dst => {}
                    Some(_) => {
                        ok = false;
                        break;
                    }
                    None => {
                        if used[dst] {
                            ok = false;
                            break;
                        }
                        assign[src] = Some(dst);
                        used[dst] = true;
                        newly.push(src);
                    }
                }
            }
            if ok {
                self.assign_injective(levels, injective, i + 1, faces, perms, assign, used, out);
            }
            for src in newly {
                used[assign[src].expect("assigned")] = false;
                assign[src] = None;
            }
        }
    }

    fn preserves_profiles(&self, sys: &OrbitPermutationSystem) -> bool {
        (0..self.n).all(|k| {
            self.profiles[k].iter().enumerate().all(|(o, prof)| {
                let target = &self.profiles[k][sys.levels[k][o]];
                prof.iter()
                    .all(|(ext, count)| target.get(&sys.levels[k + 1][*ext]) == Some(count))
            })
        })
    }

    fn first_inconsistent_member(&self, sys: &OrbitPermutationSystem) -> Result<Option<FinStructure>> {
        for s in &self.age {
            if image(self.space, sys, s)?.is_none() {
                return Ok(Some(s.clone()));
            }
        }
        Ok(None)
    }
}

/// All arrangements (injective sequences) of `len` elements of `0..n`.
pub(crate) fn arrangements(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for x in 0..n {
            if !cur.contains(&x) {
                cur.push(x);
                go(n, len, cur, out);
                cur.pop();
            }
        }
    }
    go(n, len, &mut cur, &mut out);
    out
}

/// The structure on the points of `s` whose orbit data is the relabeling of
/// the orbit data of `s`, if it is an age member.
pub fn image(
    space: &TypeSpace,
    sys: &OrbitPermutationSystem,
    s: &FinStructure,
) -> Result<Option<FinStructure>> {
    let m = s.size();
    let k = sys.arity().min(m);
    let mut constraints = Vec::new();
    for subset in increasing_subsets(m, k) {
        let t = TupleType::of_tuple(s, &subset);
        let img = sys.image_type(space, &t);
        constraints.push(Constraint::new(subset, img.carrier().clone()));
    }
    Ok(completions(space.presentation(), m, &constraints, Some(1))?
        .into_iter()
        .next())
}

fn increasing_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..m {
            cur.push(x);
            go(x + 1, m, k, cur, out);
            cur.pop();
        }
    }
    go(0, m, k, &mut cur, &mut out);
    out
}

/// Checks that the system commutes with every restriction map between the
/// arities it covers; returns the offending orbit otherwise.
pub fn coherence_violation(space: &TypeSpace, sys: &OrbitPermutationSystem) -> Option<(usize, usize, Vec<usize>)> {
    let n = sys.arity();
    for m in 1..=n {
        if sys.levels[m].len() != space.table(m).len() {
            return Some((m, 0, Vec::new()));
        }
        let mut seen = vec![false; sys.levels[m].len()];
        for &x in &sys.levels[m] {
            if x >= seen.len() || std::mem::replace(&mut seen[x], true) {
                return Some((m, 0, Vec::new()));
            }
        }
    }
    for m in 1..=n {
        for (o, t) in space.table(m).types().iter().enumerate() {
            let img = space.table(m).get(sys.levels[m][o]);
            for k in 1..=m {
                for sigma in all_maps(k, m) {
                    let lower = space.index_of(&t.restrict(&sigma));
                    let lower_img = space.index_of(&img.restrict(&sigma));
                    if sys.levels[k][lower] != lower_img {
                        return Some((m, o, sigma));
                    }
                }
            }
        }
    }
    None
}

/// Every map from `0..k` to `0..m`.
fn all_maps(k: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..m).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Back-and-forth to `depth` points: a chain of age members and images in
/// which every one-point extension on either side has a partner.
pub fn realizability_check(
    space: &TypeSpace,
    sys: &OrbitPermutationSystem,
    depth: usize,
) -> Result<Realizability> {
    if let Some((m, o, sigma)) = coherence_violation(space, sys) {
        return Ok(Realizability::Failed(RealizabilityFailure {
            reason: format!(
                "not coherent: orbit {o} of arity {m} restricted along {sigma:?} is not sent to the restriction of its image"
            ),
            configuration: Some(space.table(m).get(o).carrier().clone()),
        }));
    }
    let p = space.presentation();
    let depth = depth.min(p.age_bound().unwrap_or(usize::MAX));
    let inverse = sys.inverse();
    let mut left = FinStructure::empty(p.signature(), 0);
    let mut right = left.clone();
    let mut chain = Vec::new();
    let mut matched = 0;
    for _ in 0..depth {
        let forth = p.one_point_extensions(&left)?;
        let back = p.one_point_extensions(&right)?;
        for (exts, other, map, side) in [
            (&forth, &right, sys, "forth"),
            (&back, &left, &inverse, "back"),
        ] {
            for e in exts {
                match image(space, map, e)? {
                    Some(img) if img.induced(&(0..other.size()).collect::<Vec<_>>()) == *other => {
                        matched += 1;
                    }
                    _ => {
                        return Ok(Realizability::Failed(RealizabilityFailure {
                            reason: format!("{side} step fails at {} points", e.size()),
                            configuration: Some(e.clone()),
                        }))
                    }
                }
            }
        }
        let Some(next) = forth.into_iter().next() else {
            break;
        };
        let next_img = image(space, sys, &next)?.expect("matched above");
        chain.push((next.clone(), next_img.clone()));
        left = next;
        right = next_img;
    }
    Ok(Realizability::Certified(RealizabilityCertificate {
        depth: chain.len(),
        chain,
        extensions_matched: matched,
    }))
}

fn build_group(
    space: &TypeSpace,
    n: usize,
    bound: usize,
    mut elements: Vec<OrbitPermutationSystem>,
    depth: usize,
) -> Result<LevelGroup> {
    elements.sort();
    let index: HashMap<OrbitPermutationSystem, usize> =
        elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let table: Vec<Vec<usize>> = elements
        .iter()
        .map(|a| {
            elements
                .iter()
                .map(|b| *index.get(&a.compose(b)).unwrap_or(&usize::MAX))
                .collect()
        })
        .collect();
    let mut certificates = Vec::with_capacity(elements.len());
    for e in &elements {
        certificates.push(realizability_check(space, e, depth)?);
    }
    let exact = certificates.iter().all(Realizability::is_certified);
    let generators = minimal_generators(&table);
    Ok(LevelGroup {
        arity: n,
        consistency_bound: bound,
        elements,
        certificates,
        table,
        generators,
        exact,
    })
}

/// A smallest set of element indices generating the group of `table`.
fn minimal_generators(table: &[Vec<usize>]) -> Vec<usize> {
    let n = table.len();
    if n <= 1 || table.iter().flatten().any(|&x| x >= n) {
        return Vec::new();
    }
    let generated = |gens: &[usize]| {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = table[x][g];
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().filter(|&&s| s).count()
    };
    fn search(
        start: usize,
        left: usize,
        n: usize,
        combo: &mut Vec<usize>,
        generated: &dyn Fn(&[usize]) -> usize,
    ) -> bool {
        if left == 0 {
            return generated(combo) == n;
        }
        for g in start..n {
            combo.push(g);
            if search(g + 1, left - 1, n, combo, generated) {
                return true;
            }
            combo.pop();
        }
        false
    }
    for size in 1..n {
        let mut combo = Vec::new();
        if search(1, size, n, &mut combo, &generated) {
            return combo;
        }
    }
    (1..n).collect()
}

/// The group of orbit relabelings at arity `n`, consistent with the age up to
/// `bound` points.
pub fn level_group(p: &ClassPresentation, n: usize, bound: usize) -> Result<LevelGroup> {
    let space = TypeSpace::new(p, n)?;
    level_group_in(&space, n, bound, DEFAULT_CERTIFICATE_DEPTH)
}

pub fn level_group_in(space: &TypeSpace, n: usize, bound: usize, depth: usize) -> Result<LevelGroup> {
    if n > space.max_arity() {
        return Err(Error::Invalid(format!(
            "orbit tables only go up to arity {}",
            space.max_arity()
        )));
    }
    let ctx = Context::new(space, n, bound)?;
    let mut kept = Vec::new();
    for sys in ctx.coherent_systems() {
        if ctx.preserves_profiles(&sys) && ctx.first_inconsistent_member(&sys)?.is_none() {
            kept.push(sys);
        }
    }
    build_group(space, n, bound, kept, depth)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseLimit {
    pub max_arity: usize,
    pub levels: Vec<LevelGroup>,
    /// `projections[i][j]`: index in level `i` of the projection of element
    /// `j` of level `i + 1` (levels counted from arity 1).
    pub projections: Vec<Vec<usize>>,
    pub stabilized: bool,
    pub stabilized_at: Option<usize>,
    /// The limit group: the top level.
    pub limit: LevelGroup,
}

impl InverseLimit {
    pub fn order(&self) -> usize {
        self.limit.order()
    }
}

/// Level groups for arities `1..=m` linked by projection. The top level is
/// the limit candidate; `stabilized` holds when the last projection is a
/// bijection and the previous arity already covers the signature.
pub fn inverse_limit(p: &ClassPresentation, m: usize, bound: usize) -> Result<InverseLimit> {
    inverse_limit_with_depth(p, m, bound, DEFAULT_CERTIFICATE_DEPTH)
}

pub fn inverse_limit_with_depth(
    p: &ClassPresentation,
    m: usize,
    bound: usize,
    depth: usize,
) -> Result<InverseLimit> {
    if m == 0 {
        return Err(Error::Invalid("maximum arity must be at least 1".into()));
    }
    if p.signature().max_arity() > m {
        return Err(Error::Invalid(format!(
            "maximum arity {m} is below the signature's largest arity {}",
            p.signature().max_arity()
        )));
    }
    let space = TypeSpace::new(p, m)?;
    let levels: Vec<LevelGroup> = std::thread::scope(|scope| {
        let handles: Vec<_> = (1..=m)
            .map(|n| {
                let space = &space;
                scope.spawn(move || level_group_in(space, n, bound, depth))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("level worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut projections: Vec<Vec<usize>> = Vec::new();
    let mut levels = levels;
    // keep only elements projecting into the level below
    for i in 1..levels.len() {
        let below = levels[i - 1].clone();
        let keep: Vec<OrbitPermutationSystem> = levels[i]
            .elements
            .iter()
            .filter(|e| below.index_of(&e.project(i)).is_some())
            .cloned()
            .collect();
        if keep.len() != levels[i].elements.len() {
            levels[i] = build_group(&space, i + 1, bound, keep, depth)?;
        }
    }
    for i in 1..levels.len() {
        projections.push(
            levels[i]
                .elements
                .iter()
                .map(|e| levels[i - 1].index_of(&e.project(i)).expect("filtered"))
                .collect(),
        );
    }
    let max_sig = p.signature().max_arity();
    let mut stabilized_at = None;
    for (i, proj) in projections.iter().enumerate() {
        let lower_arity = i + 1;
        let mut sorted = proj.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let bijective = sorted.len() == proj.len() && proj.len() == levels[i].order();
        if bijective && lower_arity >= max_sig.max(1) {
            stabilized_at.get_or_insert(lower_arity);
        } else {
            stabilized_at = None;
        }
    }
    let limit = levels.last().expect("m >= 1").clone();
    Ok(InverseLimit {
        max_arity: m,
        stabilized: stabilized_at.is_some(),
        stabilized_at,
        projections,
        limit,
        levels,
    })
}
