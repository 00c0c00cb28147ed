//! Property suites, one group per module. Every suite runs under a proptest
//! runner with a fixed seed, or exhaustively where the input space is a
//! finite slice of the corpus.

use std::collections::BTreeSet;
use std::fmt::Debug;

use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use oligo_core::algebraicity::{
    acl_closure, acl_of_orbit, dcl_multiplicity, find_algebraicity_witness, is_no_algebraicity, Merge,
};
use oligo_core::canon::{canonical_form, canonical_labeling};
use oligo_core::corpus;
use oligo_core::groupoid::{
    acl_closed_configurations, build_cg_fragment, fragment_code, CgFragment, FragmentCaps, Policy,
};
use oligo_core::imaginaries::{
    contains, enumerate_equivalences, equivalences_on, jointly_conjugate, subgroups_above, Imaginary,
    SubgroupLattice, DEFAULT_EQUIVALENCE_CAP,
};
use oligo_core::inn_tree::{
    build_level, frame_automorphisms, inner_consistent_to_depth, FragmentAutomorphism, InnerConsistency,
};
use oligo_core::normalizer::{inverse_limit, level_group, Realizability, DEFAULT_CERTIFICATE_DEPTH};
use oligo_core::orbits::{count_orbits, ExtensionCount, TypeSpace};
use oligo_core::presentation::ClassPresentation;
use oligo_core::structure::{embeddings, FinStructure, Signature};
use oligo_core::types::TupleType;
use oligo_core::wu::{WuElement, WuEndo};
use oligo_core::Verdict;

use super::{all_tuples, collect, evaluate, Letter, Word, equivalence_oracle, isomorphic, orbit_oracle, pair_triples, word_of};

pub type Outcome = Result<(), String>;

pub struct Suite {
    pub module: &'static str,
    pub name: &'static str,
    pub run: fn() -> Outcome,
}

impl Suite {
    /// Runs the suite, reporting a panic as a failure.
    pub fn outcome(&self) -> Outcome {
        std::panic::catch_unwind(self.run).unwrap_or_else(|e| {
            let message = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        })
    }
}

pub fn suites() -> Vec<Suite> {
    let s = |module, name, run| Suite { module, name, run };
    vec![
        s("finite_structures", "canonical form is isomorphism-complete", canon_is_complete),
        s("finite_structures", "age is closed under substructures", age_is_closed),
        s("finite_structures", "embedding counts ignore relabelling", embedding_counts_are_invariant),
        s("orbit_engine", "orbit counts match the pattern oracle", orbit_counts_match_oracle),
        s("orbit_engine", "restrictions compose", restrictions_compose),
        s("orbit_engine", "every orbit extends", every_orbit_extends),
        s("normalizer_quotient", "levels are groups linked by projections", levels_project),
        s("normalizer_quotient", "limit elements are certified", limit_is_certified),
        s("normalizer_quotient", "larger bounds never add elements", bounds_are_monotone),
        s("algebraicity", "acl grows with the parameters", acl_is_monotone),
        s("algebraicity", "PASS leaves no witness", pass_has_no_witness),
        s("algebraicity", "merged witness has multiplicity one", merged_witness_is_definable),
        s("imaginaries", "equivalences are closed on triples", equivalences_are_closed),
        s("imaginaries", "containment is a preorder", containment_is_a_preorder),
        s("imaginaries", "lattices match the union oracle", lattices_match_oracle),
        s("imaginaries", "depth is positive and antitone", depth_is_antitone),
        s("imaginaries", "minimal bases are non-degenerate", minimal_bases_are_nondegenerate),
        s("coset_groupoid", "groupoid laws", groupoid_laws),
        s("coset_groupoid", "cosets between conjugates", cosets_between_conjugates),
        s("coset_groupoid", "intersections survive automorphisms", intersections_are_invariant),
        s("coset_groupoid", "equal codes exactly for isomorphic fragments", codes_match_isomorphism),
        s("inn_tree", "levels depend on their prefix only", prefix_dependence),
        s("inn_tree", "levels form a tree", levels_form_a_tree),
        s("inn_tree", "branching is bounded by coset counts", branching_is_bounded),
        s("wu_group", "group axioms against collection", wu_axioms),
        s("wu_group", "random words evaluate to their collected form", wu_words),
        s("wu_group", "centre is the c part", wu_centre),
        s("wu_group", "limit moves elements by central factors", wu_lemma),
        s("wu_group", "limit has order three", wu_order_three),
    ]
}

fn check<S>(seed: u64, cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S: Strategy,
    S::Value: Debug,
{
    let config = Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new(config).run(&strategy, test).map_err(|e| e.to_string())
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn presentations() -> Vec<(&'static str, ClassPresentation)> {
    corpus::names().map(|n| (n, corpus::by_name(n).unwrap())).collect()
}

fn shuffled(rng: &mut StdRng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

// finite structures

fn random_structure(rng: &mut StdRng, arities: &[usize], size: usize) -> FinStructure {
    let sig = Signature::new(arities.iter().enumerate().map(|(i, &a)| (format!("r{i}"), a))).unwrap();
    let mut s = FinStructure::empty(&sig, size);
    let density = rng.gen_range(0.05..0.6);
    for (sym, &a) in arities.iter().enumerate() {
        for t in all_tuples(size, a) {
            if rng.gen_bool(density) {
                s.insert(sym, t);
            }
        }
    }
    s
}

/// A symmetric graph on six points made of disjoint cycles.
fn cycles(rng: &mut StdRng, lengths: &[usize]) -> FinStructure {
    let sig = Signature::new([("e", 2)]).unwrap();
    let mut s = FinStructure::empty(&sig, 6);
    let mut start = 0;
    for &len in lengths {
        for i in 0..len {
            let (x, y) = (start + i, start + (i + 1) % len);
            s.insert(0, vec![x, y]);
            s.insert(0, vec![y, x]);
        }
        start += len;
    }
    s.relabel(&shuffled(rng, 6))
}

fn canon_is_complete() -> Outcome {
    let strategy = (prop::collection::vec(1usize..=3, 1..=3), 1usize..=6, any::<u64>(), 0u8..4);
    check(1, 300, strategy, |(arities, size, seed, mode)| {
        let mut rng = StdRng::seed_from_u64(seed);
        let (a, b) = match mode {
            0 => {
                let a = random_structure(&mut rng, &arities, size);
                let b = a.relabel(&shuffled(&mut rng, size));
                (a, b)
            }
            1 => (random_structure(&mut rng, &arities, size), random_structure(&mut rng, &arities, size)),
            2 => {
                // move one tuple, keeping every count
                let a = random_structure(&mut rng, &arities, size);
                let mut b = a.clone();
                let sym = rng.gen_range(0..arities.len());
                let present: Vec<Vec<usize>> = a.relation(sym).iter().cloned().collect();
                let absent: Vec<Vec<usize>> =
                    all_tuples(size, arities[sym]).into_iter().filter(|t| !a.holds(sym, t)).collect();
                if let (Some(x), Some(y)) = (present.choose(&mut rng), absent.choose(&mut rng)) {
                    b.remove(sym, x);
                    b.insert(sym, y.clone());
                }
                let b = b.relabel(&shuffled(&mut rng, size));
                (a, b)
            }
            _ => {
                let shapes: [&[usize]; 2] = [&[6], &[3, 3]];
                let (x, y) = (shapes[rng.gen_range(0..2)], shapes[rng.gen_range(0..2)]);
                (cycles(&mut rng, x), cycles(&mut rng, y))
            }
        };
        prop_assert_eq!(canonical_form(&a) == canonical_form(&b), isomorphic(&a, &b));
        Ok(())
    })
}

fn age_is_closed() -> Outcome {
    for (name, p) in presentations() {
        let members = p.enumerate_age(4).map_err(|e| e.to_string())?;
        let codes: BTreeSet<_> = members.iter().map(canonical_form).collect();
        for s in &members {
            for mask in 1u32..(1 << s.size()) {
                let points: Vec<usize> = (0..s.size()).filter(|i| mask >> i & 1 == 1).collect();
                let sub = s.induced(&points);
                ensure(codes.contains(&canonical_form(&sub)), || format!("{name}: {sub:?} missing from the age"))?;
            }
        }
    }
    Ok(())
}

fn embedding_counts_are_invariant() -> Outcome {
    let ages: Vec<Vec<FinStructure>> = presentations().iter().map(|(_, p)| p.enumerate_age(4).unwrap()).collect();
    check(2, 150, (any::<Index>(), any::<u64>()), |(which, seed)| {
        let age = &ages[which.index(ages.len())];
        let mut rng = StdRng::seed_from_u64(seed);
        let small: Vec<&FinStructure> = age.iter().filter(|s| s.size() <= 3).collect();
        let a = *small.choose(&mut rng).unwrap();
        let b = age.choose(&mut rng).unwrap();
        let a2 = a.relabel(&shuffled(&mut rng, a.size()));
        let b2 = b.relabel(&shuffled(&mut rng, b.size()));
        let n = embeddings(a, b).len();
        prop_assert_eq!(n, embeddings(&a2, b).len());
        prop_assert_eq!(n, embeddings(a, &b2).len());
        Ok(())
    })
}

// orbit engine

fn orbit_counts_match_oracle() -> Outcome {
    for (name, p) in presentations() {
        for n in 1..=4 {
            let ours = count_orbits(&p, n).map_err(|e| e.to_string())?;
            let oracle = orbit_oracle(&p, n);
            ensure(ours == oracle, || format!("{name} n={n}: {ours} orbits, oracle {oracle}"))?;
        }
    }
    Ok(())
}

fn spaces(arity: usize) -> Vec<(&'static str, TypeSpace)> {
    presentations().into_iter().map(|(n, p)| (n, TypeSpace::new(&p, arity).unwrap())).collect()
}

fn restrictions_compose() -> Outcome {
    let spaces = spaces(4);
    let strategy = (
        any::<Index>(),
        1usize..=4,
        any::<Index>(),
        prop::collection::vec(any::<Index>(), 1..=4),
        prop::collection::vec(any::<Index>(), 1..=4),
    );
    check(3, 500, strategy, |(which, n, o, sigma, tau)| {
        let (_, space) = &spaces[which.index(spaces.len())];
        let o = o.index(space.table(n).len());
        let sigma: Vec<usize> = sigma.iter().map(|i| i.index(n)).collect();
        let m = sigma.len();
        let tau: Vec<usize> = tau.iter().map(|i| i.index(m)).collect();
        let composed: Vec<usize> = tau.iter().map(|&i| sigma[i]).collect();
        let stepwise = space.restrict(m, space.restrict(n, o, &sigma), &tau);
        prop_assert_eq!(stepwise, space.restrict(n, o, &composed));
        Ok(())
    })
}

fn every_orbit_extends() -> Outcome {
    for (name, space) in spaces(4) {
        for n in 0..4 {
            let prefix: Vec<usize> = (0..n).collect();
            let hit: BTreeSet<usize> =
                (0..space.table(n + 1).len()).map(|o| space.restrict(n + 1, o, &prefix)).collect();
            ensure(hit.len() == space.table(n).len(), || format!("{name}: some {n}-orbit has no extension"))?;
        }
    }
    Ok(())
}

// normalizer

fn limit_arity(p: &ClassPresentation) -> usize {
    p.signature().max_arity().max(2)
}

fn levels_project() -> Outcome {
    for (name, p) in presentations() {
        let lim = inverse_limit(&p, limit_arity(&p), 5).map_err(|e| e.to_string())?;
        for (i, level) in lim.levels.iter().enumerate() {
            ensure(level.is_group(), || format!("{name}: level {} is not a group", i + 1))?;
        }
        for (i, proj) in lim.projections.iter().enumerate() {
            let (lower, upper) = (&lim.levels[i], &lim.levels[i + 1]);
            for (j, &k) in proj.iter().enumerate() {
                ensure(upper.elements[j].project(i + 1) == lower.elements[k], || {
                    format!("{name}: projection {i} misplaces element {j}")
                })?;
                for (l, &m) in proj.iter().enumerate() {
                    ensure(proj[upper.table[j][l]] == lower.table[k][m], || {
                        format!("{name}: projection {i} is not a homomorphism")
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn limit_is_certified() -> Outcome {
    for (name, p) in presentations() {
        let lim = inverse_limit(&p, limit_arity(&p), 5).map_err(|e| e.to_string())?;
        for (i, c) in lim.limit.certificates.iter().enumerate() {
            match c {
                Realizability::Certified(c) if c.depth >= DEFAULT_CERTIFICATE_DEPTH => {}
                other => return Err(format!("{name}: limit element {i} has {other:?}")),
            }
        }
    }
    Ok(())
}

fn bounds_are_monotone() -> Outcome {
    for (name, p) in presentations() {
        let mut previous: Option<BTreeSet<_>> = None;
        for bound in 3..=5 {
            let g = level_group(&p, 2, bound).map_err(|e| e.to_string())?;
            let now: BTreeSet<_> = g.elements.into_iter().collect();
            if let Some(prev) = &previous {
                ensure(now.is_subset(prev), || format!("{name}: bound {bound} added elements"))?;
            }
            previous = Some(now);
        }
    }
    Ok(())
}

// algebraicity

fn acl_is_monotone() -> Outcome {
    const BOUND: usize = 8;
    for (name, p) in presentations() {
        let space = TypeSpace::new(&p, 3).map_err(|e| e.to_string())?;
        for n in 0..=1 {
            let prefix: Vec<usize> = (0..n).collect();
            for larger in 0..space.table(n + 1).len() {
                let smaller = space.restrict(n + 1, larger, &prefix);
                let over_small = acl_of_orbit(&space, n, smaller, BOUND).map_err(|e| e.to_string())?;
                let over_large = acl_of_orbit(&space, n + 1, larger, BOUND).map_err(|e| e.to_string())?;
                if over_small.saturated || over_large.saturated {
                    continue;
                }
                let algebraic: BTreeSet<usize> = over_large.algebraic.iter().map(|e| e.orbit).collect();
                let dropped: Vec<usize> = prefix.iter().copied().chain([n + 1]).collect();
                for e in &over_small.algebraic {
                    for t in 0..space.table(n + 2).len() {
                        let extends = space.restrict(n + 2, t, &(0..=n).collect::<Vec<_>>()) == larger
                            && space.restrict(n + 2, t, &dropped) == e.orbit;
                        ensure(!extends || algebraic.contains(&t), || {
                            format!("{name}: {:?} stops being algebraic over a larger set", e.ty)
                        })?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn pass_has_no_witness() -> Outcome {
    for (name, p) in presentations() {
        let report = is_no_algebraicity(&p, 2, 8).map_err(|e| e.to_string())?;
        if report.verdict != Verdict::Pass {
            continue;
        }
        let search = find_algebraicity_witness(&p, 8, 3).map_err(|e| e.to_string())?;
        ensure(search.witness.is_none(), || format!("{name}: PASS but witness {:?}", search.witness))?;
    }
    Ok(())
}

fn merged_witness_is_definable() -> Outcome {
    let m = Merge::new(&corpus::two_sorted_set(), 6).map_err(|e| e.to_string())?;
    let s = m.realize_points(&[0, 0, 0, 1, 1, 1]).map_err(|e| e.to_string())?;
    let (x, x1, x2, y, y1, y2) = (0, 1, 2, 3, 4, 5);
    let merged = m
        .structure_of(&s, &[vec![x, y1], vec![x, y2], vec![x1, y], vec![x2, y], vec![x, y]])
        .map_err(|e| e.to_string())?;
    let count = dcl_multiplicity(m.presentation(), &merged, 4, 8).map_err(|e| e.to_string())?;
    ensure(count == ExtensionCount::Exactly(1), || format!("multiplicity {count:?}"))
}

// imaginaries

/// Presentations and base arities small enough for the brute-force triple
/// oracle.
pub fn oracle_bases() -> Vec<(&'static str, ClassPresentation, TupleType)> {
    let mut out = Vec::new();
    for name in ["pure_set", "dlo", "random_graph", "cycle_k2", "cycle_k3", "two_sorted_set", "two_classes"] {
        let p = corpus::by_name(name).unwrap();
        let space = TypeSpace::new(&p, 2).unwrap();
        for n in 1..=2 {
            for base in space.table(n).types() {
                if n == 2 && name == "random_graph" && base.is_injective() {
                    continue;
                }
                out.push((name, p.clone(), base.clone()));
            }
        }
    }
    out
}

fn equivalences_are_closed() -> Outcome {
    for (name, p, base) in oracle_bases() {
        let n = base.arity();
        let (ids, triples) = pair_triples(&p, &base);
        let flip: Vec<usize> = (n..2 * n).chain(0..n).collect();
        let family = equivalences_on(&p, &base, DEFAULT_EQUIVALENCE_CAP).map_err(|e| e.to_string())?;
        for e in &family.equivalences {
            let mut has = vec![false; ids.len()];
            for t in e.sort.pairs() {
                let &i = ids.get(t).ok_or_else(|| format!("{name}: unrealized pair type {t:?}"))?;
                has[i] = true;
            }
            let diag = TupleType::of_tuple(base.carrier(), &[base.labeling(), base.labeling()].concat());
            ensure(e.verified && has[ids[&diag]], || format!("{name}: {:?} not reflexive", e.sort))?;
            for (t, &i) in &ids {
                ensure(!has[i] || has[ids[&t.restrict(&flip)]], || format!("{name}: {:?} not symmetric", e.sort))?;
            }
            for &(a, b, c) in &triples {
                ensure(!(has[a] && has[b]) || has[c], || format!("{name}: {:?} not transitive", e.sort))?;
            }
        }
    }
    Ok(())
}

fn lattices(names: &[&str], max_arity: usize) -> Vec<(String, ClassPresentation, SubgroupLattice)> {
    let mut out = Vec::new();
    for &name in names {
        let p = corpus::by_name(name).unwrap();
        let space = TypeSpace::new(&p, max_arity).unwrap();
        for n in 1..=max_arity {
            for base in space.table(n).types() {
                let lat = subgroups_above(&p, base, DEFAULT_EQUIVALENCE_CAP).unwrap();
                out.push((format!("{name} {:?}", base.labeling()), p.clone(), lat));
            }
        }
    }
    out
}

fn containment_is_a_preorder() -> Outcome {
    let mut all = lattices(&["pure_set", "dlo", "random_graph", "cycle_k2", "cycle_k3", "two_classes"], 1);
    all.extend(lattices(&["pure_set", "dlo", "cycle_k2", "two_sorted_set"], 2));
    for (label, p, lat) in all {
        let k = lat.len();
        let mut table = vec![vec![false; k]; k];
        for (i, row) in table.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = contains(&p, &lat.descriptor(i), &lat.descriptor(j)).map_err(|e| e.to_string())?;
            }
        }
        ensure(table == lat.contains, || format!("{label}: containment disagrees with the pair sets"))?;
        for i in 0..k {
            ensure(table[i][i], || format!("{label}: {i} not inside itself"))?;
            for j in 0..k {
                for l in 0..k {
                    ensure(!(table[i][j] && table[j][l]) || table[i][l], || format!("{label}: not transitive"))?;
                }
            }
        }
    }
    Ok(())
}

fn lattices_match_oracle() -> Outcome {
    for (name, p, base) in oracle_bases() {
        let lat = subgroups_above(&p, &base, DEFAULT_EQUIVALENCE_CAP).map_err(|e| e.to_string())?;
        let oracle = equivalence_oracle(&p, &base);
        ensure(lat.len() == oracle, || format!("{name} {:?}: {} subgroups, oracle {oracle}", base.labeling(), lat.len()))?;
        let (bottom, top) = (lat.bottom(), lat.top());
        ensure(lat.equivalences[top].is_total() && lat.equivalences[bottom].is_equality(), || {
            format!("{name}: bottom or top misplaced")
        })?;
        ensure((0..lat.len()).all(|i| lat.contains[i][top] && lat.contains[bottom][i]), || {
            format!("{name}: G is not the top")
        })?;
    }
    Ok(())
}

fn depth_is_antitone() -> Outcome {
    let names = ["pure_set", "dlo", "random_graph", "cycle_k2", "cycle_k3", "two_sorted_set", "two_classes", "colored_dlo"];
    for (label, _, lat) in lattices(&names, 2) {
        let depth: Vec<usize> = (0..lat.len()).map(|i| lat.depth(i)).collect();
        ensure(depth[lat.top()] == 0, || format!("{label}: G has depth {}", depth[lat.top()]))?;
        for i in 0..lat.len() {
            ensure(i == lat.top() || depth[i] >= 1, || format!("{label}: proper subgroup {i} has depth 0"))?;
            for j in 0..lat.len() {
                ensure(!lat.contains[i][j] || depth[i] >= depth[j], || {
                    format!("{label}: {i} inside {j} but depth {} < {}", depth[i], depth[j])
                })?;
            }
        }
    }
    Ok(())
}

fn minimal_bases_are_nondegenerate() -> Outcome {
    for name in ["pure_set", "dlo", "random_graph", "cycle_k2", "cycle_k3", "two_sorted_set", "two_classes"] {
        let p = corpus::by_name(name).unwrap();
        for family in enumerate_equivalences(&p, 2, DEFAULT_EQUIVALENCE_CAP).map_err(|e| e.to_string())? {
            let n = family.base.arity();
            for e in &family.equivalences {
                let Some(sigma) = e.degenerate_witness() else { continue };
                if sigma.is_empty() {
                    ensure(e.is_total(), || format!("{name}: empty witness for a proper equivalence"))?;
                    continue;
                }
                // agreement on sigma already forces equivalence, so the
                // subgroup is the stabilizer of an imaginary on the shorter tuple
                let positions: Vec<usize> = sigma.iter().copied().chain(sigma.iter().map(|i| i + n)).collect();
                let pairs: BTreeSet<TupleType> = e.sort.pairs().map(|t| t.restrict(&positions)).collect();
                let shorter = family.base.restrict(&sigma);
                let found = equivalences_on(&p, &shorter, DEFAULT_EQUIVALENCE_CAP)
                    .map_err(|e| e.to_string())?
                    .equivalences
                    .into_iter()
                    .find(|f| f.sort.pairs().cloned().collect::<BTreeSet<_>>() == pairs);
                let f = found.ok_or_else(|| format!("{name}: restriction of {:?} is not an equivalence", e.sort))?;
                ensure(!f.is_degenerate(), || format!("{name}: minimal base of {:?} is degenerate", e.sort))?;
            }
        }
    }
    Ok(())
}

// coset groupoid

fn fragments() -> Vec<(String, ClassPresentation, CgFragment)> {
    let caps = FragmentCaps::default();
    let mut out = Vec::new();
    for name in ["pure_set", "dlo", "random_graph", "cycle_k2", "cycle_k3", "two_sorted_set", "two_classes"] {
        let p = corpus::by_name(name).unwrap();
        let mut frames = acl_closed_configurations(&p, 3, 8).unwrap();
        if name.starts_with("cycle") {
            frames.push(acl_closure(&p, &FinStructure::empty(p.signature(), 2), 8).unwrap());
        }
        for frame in frames {
            for policy in [Policy::PointStabilizers, Policy::EssentialSubgroups] {
                // presentations without essential subgroups have no essential fragment
                let Ok(f) = build_cg_fragment(&p, policy, &frame, &caps) else { continue };
                out.push((format!("{name} {policy:?} on {} points", frame.size()), p.clone(), f));
            }
        }
    }
    out
}

fn groupoid_laws() -> Outcome {
    for (label, _, f) in fragments() {
        let n = f.len();
        for a in 0..n {
            let (u, v) = (f.dom(a), f.cod(a));
            ensure(f.mul(f.identities[u], a) == Some(a) && f.mul(a, f.identities[v]) == Some(a), || {
                format!("{label}: identities do not fix element {a}")
            })?;
            ensure(f.mul(a, f.inverse(a)) == Some(f.identities[u]), || format!("{label}: A·A⁻¹ is not Dom(A) for {a}"))?;
            ensure(f.mul(f.inverse(a), a) == Some(f.identities[v]), || format!("{label}: A⁻¹·A is not Cod(A) for {a}"))?;
            for b in 0..n {
                if let Some(c) = f.mul(a, b) {
                    ensure(f.cod(a) == f.dom(b) && f.dom(c) == u && f.cod(c) == f.cod(b), || {
                        format!("{label}: product {a}·{b} mistyped")
                    })?;
                }
                for c in 0..n {
                    let left = f.mul(a, b).and_then(|ab| f.mul(ab, c));
                    let right = f.mul(b, c).and_then(|bc| f.mul(a, bc));
                    if let (Some(l), Some(r)) = (left, right) {
                        ensure(l == r, || format!("{label}: ({a}·{b})·{c} != {a}·({b}·{c})"))?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn cosets_between_conjugates() -> Outcome {
    for (label, _, f) in fragments() {
        let sort_of = |u: usize| {
            let i = f.subgroup_of.iter().position(|&s| s == u).unwrap();
            &f.imaginaries[i].sort
        };
        for u in 0..f.subgroups {
            for v in 0..f.subgroups {
                let expected = if sort_of(u) == sort_of(v) { f.two_sided_coset_count(u) } else { 0 };
                ensure(f.coset_count(u, v) == expected, || {
                    format!("{label}: {} cosets from {u} to {v}, expected {expected}", f.coset_count(u, v))
                })?;
            }
        }
    }
    Ok(())
}

fn k_sets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (0..n).flat_map(|last| k_sets(last, k - 1).into_iter().map(move |mut s| {
        s.push(last);
        s
    }))
    .collect()
}

fn intersections_are_invariant() -> Outcome {
    let fragments = fragments();
    // automorphisms read off the canonical labeling
    check(4, 64, (any::<Index>(), any::<u64>()), |(which, seed)| {
        let (label, _, f) = &fragments[which.index(fragments.len())];
        let s = f.as_structure();
        let mut rng = StdRng::seed_from_u64(seed);
        let sigma = shuffled(&mut rng, s.size());
        let zeros = vec![0; s.size()];
        let (lambda, _) = canonical_labeling(&s, &zeros);
        let (lambda2, _) = canonical_labeling(&s.relabel(&sigma), &zeros);
        let mut inverse = vec![0; s.size()];
        for (v, &l) in lambda.iter().enumerate() {
            inverse[l] = v;
        }
        let pi: Vec<usize> = (0..s.size()).map(|v| inverse[lambda2[sigma[v]]]).collect();
        prop_assert!(s.relabel(&pi) == s, "{}: canonical labelings do not give an automorphism", label);
        prop_assert!(FragmentAutomorphism::new(f, pi.clone()).is_ok(), "{}", label);
        for (j, table) in f.intersections.iter().enumerate() {
            for set in table {
                let mut image: Vec<usize> = set.iter().map(|&a| pi[a]).collect();
                image.sort_unstable();
                prop_assert!(f.intersections[j].binary_search(&image).is_ok(), "{}: I_{} moved", label, j + 2);
            }
        }
        Ok(())
    })?;
    // automorphisms induced by the frame, against intersections recomputed
    // from the imaginaries
    for (label, p, f) in &fragments {
        if f.len() > 20 {
            continue;
        }
        let joint = |set: &[usize]| {
            let xs: Vec<Imaginary> = set.iter().map(|&a| f.imaginaries[f.elements[a].left].clone()).collect();
            let ys: Vec<Imaginary> = set.iter().map(|&a| f.imaginaries[f.elements[a].right].clone()).collect();
            jointly_conjugate(p, &f.frame, &xs, &ys).unwrap()
        };
        for g in frame_automorphisms(f).into_iter().take(6) {
            let phi = FragmentAutomorphism::induced(f, &g).map_err(|e| e.to_string())?;
            for k in 2..=3 {
                for set in k_sets(f.len(), k) {
                    let image: Vec<usize> = set.iter().map(|&a| phi.apply(a)).collect();
                    ensure(joint(&set) == joint(&image), || format!("{label}: I_{k} not preserved on {set:?}"))?;
                }
            }
        }
    }
    Ok(())
}

fn codes_match_isomorphism() -> Outcome {
    let small: Vec<(String, FinStructure, String)> = fragments()
        .into_iter()
        .filter(|(_, _, f)| f.len() <= 24)
        .map(|(label, _, f)| (label, f.as_structure(), fragment_code(&f)))
        .collect();
    for i in 0..small.len() {
        for j in i..small.len() {
            let (la, a, ca) = &small[i];
            let (lb, b, cb) = &small[j];
            let iso = a.size() == b.size() && a.arities() == b.arities() && !embeddings(a, b).is_empty();
            ensure((ca == cb) == iso, || format!("{la} / {lb}: equal codes {} but isomorphic {iso}", ca == cb))?;
        }
    }
    Ok(())
}

// inn tree

fn tree_fragments() -> Vec<(ClassPresentation, CgFragment)> {
    let caps = FragmentCaps::default();
    let pure = corpus::pure_set();
    let two = corpus::two_sorted_set();
    let two_frame = FinStructure::from_tuples(two.signature(), 4, [(0, vec![0]), (0, vec![1])]).unwrap();
    vec![
        (pure.clone(), build_cg_fragment(&pure, Policy::PointStabilizers, &FinStructure::empty(pure.signature(), 3), &caps).unwrap()),
        (two.clone(), build_cg_fragment(&two, Policy::PointStabilizers, &two_frame, &caps).unwrap()),
    ]
}

/// An inner automorphism, or a random permutation of the elements.
fn candidate(f: &CgFragment, rng: &mut StdRng) -> FragmentAutomorphism {
    if rng.gen_bool(0.5) {
        let autos = frame_automorphisms(f);
        FragmentAutomorphism::induced(f, autos.choose(rng).unwrap()).unwrap()
    } else {
        FragmentAutomorphism::unchecked(f, shuffled(rng, f.len())).unwrap()
    }
}

pub fn prefix_dependence() -> Outcome {
    let cases = tree_fragments();
    check(5, 96, (any::<Index>(), any::<u64>(), 0usize..=6), |(which, seed, n)| {
        let (p, f) = &cases[which.index(cases.len())];
        let mut rng = StdRng::seed_from_u64(seed);
        let phi = candidate(f, &mut rng);
        // same first n images, the rest permuted among themselves
        let mut images = phi.images.clone();
        images[n..].shuffle(&mut rng);
        let psi = FragmentAutomorphism::unchecked(f, images).unwrap();
        let a = inner_consistent_to_depth(p, f, &phi, n).unwrap();
        let b = inner_consistent_to_depth(p, f, &psi, n).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(build_level(p, f, &phi.images[..n]).unwrap(), build_level(p, f, &psi.images[..n]).unwrap());
        let depth = f.len().min(8);
        if let InnerConsistency::RefutedAt(r) = inner_consistent_to_depth(p, f, &phi, depth).unwrap() {
            if r <= n {
                prop_assert_eq!(inner_consistent_to_depth(p, f, &psi, depth).unwrap(), InnerConsistency::RefutedAt(r));
            }
        }
        Ok(())
    })
}

fn levels_form_a_tree() -> Outcome {
    let cases = tree_fragments();
    check(6, 64, (any::<Index>(), any::<u64>()), |(which, seed)| {
        let (p, f) = &cases[which.index(cases.len())];
        let phi = candidate(f, &mut StdRng::seed_from_u64(seed));
        let mut previous = build_level(p, f, &[]).unwrap();
        for n in 1..=6 {
            let level = build_level(p, f, &phi.images[..n]).unwrap();
            for node in &level.nodes {
                prop_assert!(previous.nodes.contains(&node[..n - 1].to_vec()), "level {} node has no parent", n);
            }
            previous = level;
        }
        Ok(())
    })
}

fn branching_is_bounded() -> Outcome {
    let cases = tree_fragments();
    check(7, 64, (any::<Index>(), any::<u64>()), |(which, seed)| {
        let (p, f) = &cases[which.index(cases.len())];
        let widest = (0..f.subgroups).map(|u| f.two_sided_coset_count(u)).max().unwrap();
        let phi = candidate(f, &mut StdRng::seed_from_u64(seed));
        let mut previous = build_level(p, f, &[]).unwrap();
        for n in 1..=6 {
            let level = build_level(p, f, &phi.images[..n]).unwrap();
            for parent in &previous.nodes {
                let children = level.nodes.iter().filter(|c| c[..n - 1] == parent[..]).count();
                prop_assert!(children <= widest, "{} children at level {}", children, n);
            }
            previous = level;
        }
        Ok(())
    })
}

// wu group

fn element(rng: &mut StdRng) -> WuElement {
    WuElement::random(rng, 8)
}

pub fn wu_axioms() -> Outcome {
    check(8, 10_000, any::<u64>(), |seed| {
        let mut rng = StdRng::seed_from_u64(seed);
        let (x, y, z) = (element(&mut rng), element(&mut rng), element(&mut rng));
        prop_assert_eq!(x.mul(&y), collect(&[word_of(&x), word_of(&y)].concat()));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert!(x.mul(&x.inverse()).is_identity() && x.inverse().mul(&x).is_identity());
        prop_assert!(x.pow(3).is_identity());
        Ok(())
    })
}

pub fn wu_words() -> Outcome {
    let letter = (0u8..3, 0usize..3, any::<bool>()).prop_map(|(kind, i, positive)| {
        let l = match kind {
            0 => Letter::A(i),
            1 => Letter::B(i),
            _ => Letter::C,
        };
        (l, if positive { 1 } else { -1 })
    });
    check(12, 10_000, prop::collection::vec(letter, 0..=8), |word: Word| {
        prop_assert_eq!(evaluate(&word), collect(&word));
        Ok(())
    })
}

pub fn wu_centre() -> Outcome {
    check(9, 1_000, any::<u64>(), |seed| {
        let x = WuElement::random(&mut StdRng::seed_from_u64(seed), 5);
        match x.noncommuting_generator() {
            Some(g) => prop_assert!(!x.commutes_with(&WuElement::generator(g))),
            None => {
                prop_assert!(x.is_central());
                for i in 0..6 {
                    prop_assert!(x.commutes_with(&WuElement::a(i)) && x.commutes_with(&WuElement::b(i)));
                }
            }
        }
        Ok(())
    })
}

pub fn wu_lemma() -> Outcome {
    let phi = WuEndo::central_shift();
    check(10, 1_000, any::<u64>(), |seed| {
        let mut rng = StdRng::seed_from_u64(seed);
        let (g, h) = (element(&mut rng), element(&mut rng));
        prop_assert!(phi.apply(&g).mul(&g.inverse()).is_central());
        prop_assert_eq!(phi.apply(&g.conjugate_by(&h)), phi.apply(&g).conjugate_by(&h));
        prop_assert_eq!(phi.apply(&g.mul(&h)), phi.apply(&g).mul(&phi.apply(&h)));
        Ok(())
    })
}

fn wu_order_three() -> Outcome {
    let phi = WuEndo::central_shift();
    ensure(phi.compose(&phi).compose(&phi).same_as(&WuEndo::identity()), || "Φ³ is not the identity".into())?;
    ensure(!phi.compose(&phi).same_as(&WuEndo::identity()), || "Φ² is the identity".into())?;
    check(11, 1_000, any::<u64>(), |seed| {
        let g = element(&mut StdRng::seed_from_u64(seed));
        prop_assert_eq!(phi.apply(&phi.apply(&phi.apply(&g))), g);
        Ok(())
    })
}
