//! Finite fragments of the coset groupoid: open cosets `[α₀, α₁]` between
//! the stabilizers of imaginaries realized in a frame, with domain,
//! codomain, partial product, intersection relations and meets.
//!
//! `[α₀, α₁]` is the set of automorphisms mapping `α₁` to `α₀`; its domain
//! is the stabilizer of `α₀` and its codomain the stabilizer of `α₁`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::algebraicity::is_acl_closed;
use crate::canon::canonical_form;
use crate::error::{Error, Result};
use crate::format::{parse_presentation, write_presentation};
use crate::imaginaries::{classify_subgroups, in_dcl, jointly_conjugate, Caps, Imaginary, Sort};
use crate::orbits::{TypeSpace, DEFAULT_COUNT_BOUND};
use crate::presentation::ClassPresentation;
use crate::structure::{FinStructure, Signature};
use crate::types::TupleType;

pub const DEFAULT_INTERSECTION_ARITY: usize = 4;
pub const DEFAULT_MAX_ELEMENTS: usize = 200;
pub const DEFAULT_CONFIGURATION_SIZE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentCaps {
    /// Largest `k` for which the `I_k` relations are tabulated.
    pub intersection_arity: usize,
    pub max_elements: usize,
    /// Largest frame used for fingerprints.
    pub configuration_size: usize,
    pub count_bound: usize,
    pub imaginaries: Caps,
}

impl Default for FragmentCaps {
    fn default() -> Self {
        FragmentCaps {
            intersection_arity: DEFAULT_INTERSECTION_ARITY,
            max_elements: DEFAULT_MAX_ELEMENTS,
            configuration_size: DEFAULT_CONFIGURATION_SIZE,
            count_bound: DEFAULT_COUNT_BOUND,
            imaginaries: Caps::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Stabilizers of single points.
    PointStabilizers,
    /// Essential subgroups found above point stabilizers.
    EssentialSubgroups,
}

/// `[left, right]`, indices into the fragment's imaginaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CosetElement {
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Meet {
    Empty,
    Element(usize),
    /// A coset of a stabilizer outside the family; the arity of the
    /// imaginary it stabilizes.
    External(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgFragment {
    /// The presentation in the text format.
    pub presentation: String,
    pub caps: FragmentCaps,
    pub frame: FinStructure,
    pub sorts: Vec<Sort>,
    /// One representative per imaginary of a family sort realized in the
    /// frame.
    pub imaginaries: Vec<Imaginary>,
    /// Imaginaries with the same stabilizer share a subgroup number.
    pub subgroup_of: Vec<usize>,
    pub subgroups: usize,
    /// Ordered by (domain, codomain, left, right).
    pub elements: Vec<CosetElement>,
    /// `coset_of[i][j]`: the element `[i, j]`, if nonempty.
    pub coset_of: Vec<Vec<Option<usize>>>,
    /// The identity coset of each subgroup.
    pub identities: Vec<usize>,
    /// `product[a][b]` when the codomain of `a` is the domain of `b` and the
    /// product is realized in the frame.
    pub product: Vec<Vec<Option<usize>>>,
    /// Composable pairs whose product is not realized in the frame.
    pub external_products: Vec<(usize, usize)>,
    /// `intersections[k - 2]`: the sorted `k`-sets of distinct elements
    /// with nonempty intersection.
    pub intersections: Vec<Vec<Vec<usize>>>,
    /// Present for fragments built with meets.
    pub meets: Option<Vec<Vec<Meet>>>,
}

impl CgFragment {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn parse_presentation(&self) -> Result<ClassPresentation> {
        parse_presentation(&self.presentation)
    }

    /// Subgroup number of the domain of element `a`.
    pub fn dom(&self, a: usize) -> usize {
        self.subgroup_of[self.elements[a].left]
    }

    pub fn cod(&self, a: usize) -> usize {
        self.subgroup_of[self.elements[a].right]
    }

    pub fn is_identity(&self, a: usize) -> bool {
        self.identities[self.dom(a)] == a
    }

    pub fn inverse(&self, a: usize) -> usize {
        let e = self.elements[a];
        self.element_of(e.right, e.left).expect("inverse present")
    }

    pub fn mul(&self, a: usize, b: usize) -> Option<usize> {
        self.product[a][b]
    }

    /// The element equal to `[left, right]`.
    pub fn element_of(&self, left: usize, right: usize) -> Option<usize> {
        self.coset_of[left][right]
    }

    /// `I_k` for any `k`: whether the listed elements share an automorphism.
    pub fn intersects(&self, p: &ClassPresentation, elements: &[usize]) -> Result<bool> {
        let mut set: Vec<usize> = elements.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.len() <= 1 {
            return Ok(true);
        }
        if let Some(table) = self.intersections.get(set.len() - 2) {
            return Ok(table.binary_search(&set).is_ok());
        }
        let xs: Vec<Imaginary> = set.iter().map(|&a| self.imaginaries[self.elements[a].left].clone()).collect();
        let ys: Vec<Imaginary> = set.iter().map(|&a| self.imaginaries[self.elements[a].right].clone()).collect();
        jointly_conjugate(p, &self.frame, &xs, &ys)
    }

    /// Number of cosets with domain and codomain `u`.
    pub fn two_sided_coset_count(&self, u: usize) -> usize {
        (0..self.len()).filter(|&a| self.dom(a) == u && self.cod(a) == u).count()
    }

    /// Number of cosets from `v` to `u` (domain `u`, codomain `v`).
    pub fn coset_count(&self, u: usize, v: usize) -> usize {
        (0..self.len()).filter(|&a| self.dom(a) == u && self.cod(a) == v).count()
    }

    /// The fragment as a finite structure on its elements.
    pub fn as_structure(&self) -> FinStructure {
        let mut symbols = vec![("dom".to_string(), 2), ("cod".to_string(), 2), ("prod".to_string(), 3)];
        for k in 2..2 + self.intersections.len() {
            symbols.push((format!("i{k}"), k));
        }
        if self.meets.is_some() {
            symbols.push(("meet".to_string(), 3));
        }
        let sig = Signature::new(symbols).expect("fragment signature");
        let mut s = FinStructure::empty(&sig, self.len());
        for a in 0..self.len() {
            s.insert(0, vec![a, self.identities[self.dom(a)]]);
            s.insert(1, vec![a, self.identities[self.cod(a)]]);
            for b in 0..self.len() {
                if let Some(c) = self.product[a][b] {
                    s.insert(2, vec![a, b, c]);
                }
            }
        }
        for (j, table) in self.intersections.iter().enumerate() {
            for set in table {
                for perm in permutations(set) {
                    s.insert(3 + j, perm);
                }
            }
        }
        if let Some(meets) = &self.meets {
            let sym = 3 + self.intersections.len();
            for (a, row) in meets.iter().enumerate() {
                for (b, m) in row.iter().enumerate() {
                    if let Meet::Element(c) = m {
                        s.insert(sym, vec![a, b, *c]);
                    }
                }
            }
        }
        s
    }
}

fn permutations(set: &[usize]) -> Vec<Vec<usize>> {
    if set.len() <= 1 {
        return vec![set.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..set.len() {
        let mut rest = set.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// The home sorts of the 1-orbits.
pub fn point_sorts(p: &ClassPresentation) -> Result<Vec<Sort>> {
    let space = TypeSpace::new(p, 1)?;
    Ok(space.table(1).types().iter().cloned().map(Sort::equality).collect())
}

/// The sorts of the essential subgroups, one per conjugacy class.
pub fn essential_sorts(p: &ClassPresentation, caps: &Caps) -> Result<Vec<Sort>> {
    let report = classify_subgroups(p, caps)?;
    let mut out: Vec<Sort> = Vec::new();
    for s in report.essential() {
        if !out.contains(&s.equivalence.sort) {
            out.push(s.equivalence.sort.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyFamily("no essential subgroup found at the caps".into()));
    }
    Ok(out)
}

pub fn policy_sorts(p: &ClassPresentation, policy: Policy, caps: &FragmentCaps) -> Result<Vec<Sort>> {
    match policy {
        Policy::PointStabilizers => point_sorts(p),
        Policy::EssentialSubgroups => essential_sorts(p, &caps.imaginaries),
    }
}

/// All tuples of `frame` in the orbit of `base`.
fn realizations(frame: &FinStructure, base: &TupleType) -> Vec<Vec<usize>> {
    let n = base.arity();
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| (0..frame.size()).map(move |x| [t.clone(), vec![x]].concat()))
            .collect();
    }
    out.retain(|t| TupleType::of_tuple(frame, t) == *base);
    out
}

/// The fragment on the cosets between stabilizers of the imaginaries of
/// `sorts` realized in `frame`.
pub fn build_fragment(
    p: &ClassPresentation,
    frame: &FinStructure,
    sorts: &[Sort],
    caps: &FragmentCaps,
) -> Result<CgFragment> {
    // imaginaries, one per class
    let mut imaginaries: Vec<Imaginary> = Vec::new();
    for sort in sorts {
        for t in realizations(frame, sort.base()) {
            let fresh = imaginaries.iter().filter(|a| a.sort == *sort).all(|a| {
                let pair = TupleType::of_tuple(frame, &[a.tuple.clone(), t.clone()].concat());
                !sort.relates(&pair)
            });
            if fresh {
                imaginaries.push(Imaginary {
                    sort: sort.clone(),
                    tuple: t,
                });
            }
        }
    }
    let ni = imaginaries.len();

    // stabilizer classes by mutual definability
    let mut subgroup_of = vec![usize::MAX; ni];
    let mut subgroups = 0;
    for i in 0..ni {
        if subgroup_of[i] != usize::MAX {
            continue;
        }
        subgroup_of[i] = subgroups;
        for j in i + 1..ni {
            if subgroup_of[j] == usize::MAX
                && in_dcl(p, frame, std::slice::from_ref(&imaginaries[i]), &imaginaries[j])?
                && in_dcl(p, frame, std::slice::from_ref(&imaginaries[j]), &imaginaries[i])?
            {
                subgroup_of[j] = subgroups;
            }
        }
        subgroups += 1;
    }

    // cosets, one representative pair each
    let mut reps: Vec<CosetElement> = Vec::new();
    let mut pair_element: HashMap<(usize, usize), usize> = HashMap::new();
    for i in 0..ni {
        for j in 0..ni {
            if imaginaries[i].sort != imaginaries[j].sort {
                continue;
            }
            if !jointly_conjugate(p, frame, &[imaginaries[i].clone()], &[imaginaries[j].clone()])? {
                continue;
            }
            let mut same = None;
            for (e, r) in reps.iter().enumerate() {
                if subgroup_of[r.right] == subgroup_of[j]
                    && imaginaries[r.left].sort == imaginaries[r.right].sort
                    && jointly_conjugate(
                        p,
                        frame,
                        &[imaginaries[i].clone(), imaginaries[r.left].clone()],
                        &[imaginaries[j].clone(), imaginaries[r.right].clone()],
                    )?
                {
                    same = Some(e);
                    break;
                }
            }
            let e = match same {
                Some(e) => e,
                None => {
                    reps.push(CosetElement { left: i, right: j });
                    if reps.len() > caps.max_elements {
                        return Err(Error::CapExceeded(format!(
                            "fragment has more than {} elements",
                            caps.max_elements
                        )));
                    }
                    reps.len() - 1
                }
            };
            pair_element.insert((i, j), e);
        }
    }

    // canonical order
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by_key(|&e| {
        let r = reps[e];
        (subgroup_of[r.left], subgroup_of[r.right], r.left, r.right)
    });
    let mut rank = vec![0; reps.len()];
    for (k, &e) in order.iter().enumerate() {
        rank[e] = k;
    }
    let elements: Vec<CosetElement> = order.iter().map(|&e| reps[e]).collect();
    for v in pair_element.values_mut() {
        *v = rank[*v];
    }
    let n = elements.len();
    let mut identities = vec![usize::MAX; subgroups];
    for i in 0..ni {
        identities[subgroup_of[i]] = pair_element[&(i, i)];
    }

    // products [a0, a1][b0, b1] = [g, b1] with tp(a0, g) = tp(a1, b0)
    let mut product = vec![vec![None; n]; n];
    let mut external_products = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let (ea, eb) = (elements[a], elements[b]);
            if subgroup_of[ea.right] != subgroup_of[eb.left] {
                continue;
            }
            let mut result = None;
            for g in 0..ni {
                if imaginaries[g].sort != imaginaries[eb.left].sort
                    || imaginaries[ea.left].sort != imaginaries[ea.right].sort
                {
                    continue;
                }
                if jointly_conjugate(
                    p,
                    frame,
                    &[imaginaries[ea.left].clone(), imaginaries[g].clone()],
                    &[imaginaries[ea.right].clone(), imaginaries[eb.left].clone()],
                )? {
                    result = pair_element.get(&(g, eb.right)).copied();
                    break;
                }
            }
            match result {
                Some(c) => product[a][b] = Some(c),
                None => external_products.push((a, b)),
            }
        }
    }

    // intersections, built upwards from the true sets of one size less
    let joint = |set: &[usize]| -> Result<bool> {
        let xs: Vec<Imaginary> = set.iter().map(|&a| imaginaries[elements[a].left].clone()).collect();
        let ys: Vec<Imaginary> = set.iter().map(|&a| imaginaries[elements[a].right].clone()).collect();
        jointly_conjugate(p, frame, &xs, &ys)
    };
    let mut intersections: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut prev: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
    for _k in 2..=caps.intersection_arity {
        let known: BTreeSet<Vec<usize>> = prev.iter().cloned().collect();
        let mut level = Vec::new();
        for set in &prev {
            let last = *set.last().expect("nonempty");
            for b in last + 1..n {
                let mut cand = set.clone();
                cand.push(b);
                let faces_ok = (0..cand.len() - 1).all(|drop| {
                    let mut f = cand.clone();
                    f.remove(drop);
                    known.contains(&f)
                });
                if faces_ok && joint(&cand)? {
                    level.push(cand);
                }
            }
        }
        intersections.push(level.clone());
        prev = level;
    }

    let mut coset_of = vec![vec![None; ni]; ni];
    for (&(i, j), &e) in &pair_element {
        coset_of[i][j] = Some(e);
    }
    Ok(CgFragment {
        presentation: write_presentation(p),
        caps: *caps,
        frame: frame.clone(),
        sorts: sorts.to_vec(),
        imaginaries,
        subgroup_of,
        subgroups,
        elements,
        coset_of,
        identities,
        product,
        external_products,
        intersections,
        meets: None,
    })
}

/// As [`build_fragment`], adding the meet of every pair of elements.
pub fn build_w_fragment(
    p: &ClassPresentation,
    frame: &FinStructure,
    sorts: &[Sort],
    caps: &FragmentCaps,
) -> Result<CgFragment> {
    let mut f = build_fragment(p, frame, sorts, caps)?;
    let n = f.len();
    let mut meets = vec![vec![Meet::Empty; n]; n];
    for a in 0..n {
        for b in 0..n {
            if !f.intersects(p, &[a, b])? {
                continue;
            }
            let (ea, eb) = (f.elements[a], f.elements[b]);
            let cods = [f.imaginaries[ea.right].clone(), f.imaginaries[eb.right].clone()];
            let mut found = None;
            for c in 0..n {
                let gamma = &f.imaginaries[f.elements[c].right];
                let same_stabilizer = in_dcl(p, &f.frame, &cods, gamma)?
                    && in_dcl(p, &f.frame, std::slice::from_ref(gamma), &cods[0])?
                    && in_dcl(p, &f.frame, std::slice::from_ref(gamma), &cods[1])?;
                if same_stabilizer && f.intersects(p, &[a, b, c])? {
                    found = Some(c);
                    break;
                }
            }
            meets[a][b] = match found {
                Some(c) => Meet::Element(c),
                None => Meet::External(cods[0].tuple.len() + cods[1].tuple.len()),
            };
        }
    }
    f.meets = Some(meets);
    Ok(f)
}

/// Age members of size `1..=size` with no algebraic points outside
/// themselves.
pub fn acl_closed_configurations(p: &ClassPresentation, size: usize, bound: usize) -> Result<Vec<FinStructure>> {
    let size = p.age_bound().map_or(size, |b| size.min(b));
    let mut out = Vec::new();
    for level in p.age_levels(size)?.into_iter().skip(1) {
        for s in level {
            if is_acl_closed(p, &s, bound)? {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// The fragment of the given policy on one frame.
pub fn build_cg_fragment(
    p: &ClassPresentation,
    policy: Policy,
    frame: &FinStructure,
    caps: &FragmentCaps,
) -> Result<CgFragment> {
    let sorts = policy_sorts(p, policy, caps)?;
    build_fragment(p, frame, &sorts, caps)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FragmentSummary {
    pub configuration_size: usize,
    pub elements: usize,
    pub subgroups: usize,
    pub products: usize,
    /// Number of true sets for `I_2, I_3, ...`.
    pub intersections: Vec<usize>,
}

impl FragmentSummary {
    fn of(f: &CgFragment) -> FragmentSummary {
        FragmentSummary {
            configuration_size: f.frame.size(),
            elements: f.len(),
            subgroups: f.subgroups,
            products: f.product.iter().flatten().filter(|x| x.is_some()).count(),
            intersections: f.intersections.iter().map(|t| t.len()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FingerprintEntry {
    pub configuration_size: usize,
    /// Canonical code of the fragment, in hexadecimal.
    pub code: String,
    pub summary: FragmentSummary,
}

/// The isomorphism types of the fragments over all acl-closed
/// configurations up to the configuration cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub policy: Policy,
    pub caps: FragmentCaps,
    pub entries: Vec<FingerprintEntry>,
}

impl Fingerprint {
    pub fn up_to(&self, size: usize) -> BTreeSet<&FingerprintEntry> {
        self.entries.iter().filter(|e| e.configuration_size <= size).collect()
    }
}

pub fn fragment_code(f: &CgFragment) -> String {
    canonical_form(&f.as_structure()).to_hex()
}

pub fn fingerprint(p: &ClassPresentation, policy: Policy, caps: &FragmentCaps) -> Result<Fingerprint> {
    let sorts = policy_sorts(p, policy, caps)?;
    let mut entries = BTreeSet::new();
    for frame in acl_closed_configurations(p, caps.configuration_size, caps.count_bound)? {
        let f = build_fragment(p, &frame, &sorts, caps)?;
        entries.insert(FingerprintEntry {
            configuration_size: frame.size(),
            code: fragment_code(&f),
            summary: FragmentSummary::of(&f),
        });
    }
    Ok(Fingerprint {
        policy,
        caps: *caps,
        entries: entries.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distinction {
    /// Smallest configuration size at which the fingerprints differ.
    pub configuration_size: usize,
    /// 0 or 1: the presentation owning the unmatched fragment.
    pub side: usize,
    pub unmatched: FingerprintEntry,
    /// Fragments of the other presentation on configurations of that size.
    pub others: Vec<FragmentSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    IndistinguishableAtCaps,
    Distinguished(Box<Distinction>),
}

pub fn compare_fingerprints(a: &Fingerprint, b: &Fingerprint) -> Comparison {
    for size in 1..=a.caps.configuration_size.max(b.caps.configuration_size) {
        let (sa, sb) = (a.up_to(size), b.up_to(size));
        if sa == sb {
            continue;
        }
        let codes = |s: &BTreeSet<&FingerprintEntry>| -> BTreeMap<String, FingerprintEntry> {
            s.iter().map(|e| (e.code.clone(), (*e).clone())).collect()
        };
        let (ca, cb) = (codes(&sa), codes(&sb));
        let (side, unmatched, other) = match ca.iter().find(|(k, _)| !cb.contains_key(*k)) {
            Some((_, e)) => (0, e.clone(), &sb),
            None => {
                let e = cb.iter().find(|(k, _)| !ca.contains_key(*k)).expect("sets differ").1;
                (1, e.clone(), &sa)
            }
        };
        let others = other
            .iter()
            .filter(|e| e.configuration_size == unmatched.configuration_size)
            .map(|e| e.summary.clone())
            .collect();
        return Comparison::Distinguished(Box::new(Distinction {
            configuration_size: size,
            side,
            unmatched,
            others,
        }));
    }
    Comparison::IndistinguishableAtCaps
}

pub fn compare(
    p1: &ClassPresentation,
    p2: &ClassPresentation,
    policy: Policy,
    caps: &FragmentCaps,
) -> Result<Comparison> {
    Ok(compare_fingerprints(
        &fingerprint(p1, policy, caps)?,
        &fingerprint(p2, policy, caps)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraicity::acl_closure;
    use crate::corpus;

    fn frame_of(p: &ClassPresentation, size: usize) -> FinStructure {
        let s = FinStructure::empty(p.signature(), size);
        assert_eq!(p.admits(&s), crate::presentation::Admission::Admitted);
        s
    }

    #[test]
    fn pure_set_products() {
        let p = corpus::pure_set();
        let f = build_cg_fragment(&p, Policy::PointStabilizers, &frame_of(&p, 3), &FragmentCaps::default()).unwrap();
        assert_eq!(f.len(), 9);
        assert_eq!(f.subgroups, 3);
        let ab = f.element_of(0, 1).unwrap();
        let bc = f.element_of(1, 2).unwrap();
        let ac = f.element_of(0, 2).unwrap();
        assert_eq!(f.mul(ab, bc), Some(ac));
        assert_eq!(f.mul(bc, ab), None);
        assert!(f.external_products.is_empty());
        for a in 0..f.len() {
            assert_eq!(f.two_sided_coset_count(f.dom(a)), 1);
        }
    }

    #[test]
    fn cycle_two_sided_cosets() {
        for k in [2, 3] {
            let p = corpus::cycle(k);
            let point = FinStructure::empty(p.signature(), 1);
            let frame = acl_closure(&p, &point, 8).unwrap();
            let f = build_cg_fragment(&p, Policy::PointStabilizers, &frame, &FragmentCaps::default()).unwrap();
            assert_eq!(f.subgroups, 1);
            assert_eq!(f.two_sided_coset_count(0), k);
        }
    }

    #[test]
    fn group_alone() {
        let p = corpus::dlo();
        let f = build_fragment(&p, &frame_of(&p, 0), &[Sort::equality(TupleType::empty(&p))], &FragmentCaps::default())
            .unwrap();
        assert_eq!(f.len(), 1);
        assert!(f.is_identity(0));
    }

    #[test]
    fn dlo_meets() {
        let p = corpus::dlo();
        let frame = FinStructure::from_tuples(p.signature(), 2, [(0, vec![0, 1])]).unwrap();
        let f = build_w_fragment(&p, &frame, &point_sorts(&p).unwrap(), &FragmentCaps::default()).unwrap();
        let meets = f.meets.as_ref().unwrap();
        let a = f.element_of(0, 0).unwrap();
        let b = f.element_of(1, 1).unwrap();
        assert_eq!(meets[a][b], Meet::External(2));
        assert_eq!(meets[a][a], Meet::Element(a));
        let ab = f.element_of(0, 1).unwrap();
        let ba = f.element_of(1, 0).unwrap();
        assert_eq!(meets[ab][ba], Meet::Empty);
    }

    #[test]
    fn fingerprints_separate_pure_set_and_dlo() {
        let caps = FragmentCaps::default();
        let a = fingerprint(&corpus::pure_set(), Policy::PointStabilizers, &caps).unwrap();
        let b = fingerprint(&corpus::pure_set_redundant(), Policy::PointStabilizers, &caps).unwrap();
        assert_eq!(a.entries, b.entries);
        let c = fingerprint(&corpus::dlo(), Policy::PointStabilizers, &caps).unwrap();
        match compare_fingerprints(&a, &c) {
            Comparison::Distinguished(d) => assert_eq!(d.configuration_size, 2),
            other => panic!("{other:?}"),
        }
    }
}
