use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use oligo_core::algebraicity::{acl_of_orbit, find_algebraicity_witness, is_no_algebraicity, Merge};
use oligo_core::format::{read_presentation, write_presentation};
use oligo_core::groupoid::{
    acl_closed_configurations, build_cg_fragment, compare_fingerprints, fingerprint, CgFragment, Comparison,
    Policy,
};
use oligo_core::imaginaries::{check_wei, classify_subgroups, enumerate_equivalences, subgroups_above};
use oligo_core::inn_tree::{frame_automorphisms, inner_consistent_to_depth, FragmentAutomorphism, InnerConsistency};
use oligo_core::normalizer::inverse_limit_with_depth;
use oligo_core::orbits::{enumerate_orbits, TypeSpace};
use oligo_core::presentation::ClassPresentation;
use oligo_core::wu::{verify_suite, NotInnerCertificate};
use oligo_core::{Error, Result};

use crate::caps::{CapArgs, Resolver};
use crate::render;
use crate::report::{Input, Outcome, Provenance, Report};

/// Collects what a report needs besides its result.
pub struct Context {
    pub caps: Resolver,
    pub amalgamation_check: Option<usize>,
    inputs: Vec<Input>,
    flags: BTreeMap<String, String>,
    warnings: Vec<String>,
}

impl Context {
    pub fn new(caps: CapArgs, amalgamation_check: Option<usize>) -> Context {
        let mut flags = BTreeMap::new();
        if let Some(size) = amalgamation_check {
            flags.insert("check_amalgamation".to_string(), size.to_string());
        }
        Context {
            caps: Resolver::new(caps),
            amalgamation_check,
            inputs: Vec::new(),
            flags,
            warnings: Vec::new(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl ToString) {
        self.flags.insert(name.to_string(), value.to_string());
    }

    pub fn presentation(&mut self, path: &Path) -> Result<ClassPresentation> {
        let p = read_presentation(path)?;
        self.note_input(path, &p);
        if let Some(size) = self.amalgamation_check {
            let check = p.check_amalgamation(size)?;
            for f in &check.failures {
                self.warnings
                    .push(format!("{}: {:?} fails over a base of size {}: {}", path.display(), f.kind, f.base.size(), f.note));
            }
        }
        Ok(p)
    }

    fn note_input(&mut self, path: &Path, p: &ClassPresentation) {
        self.note_text(path, write_presentation(p));
    }

    fn note_text(&mut self, path: &Path, text: String) {
        self.inputs.push(Input {
            path: path.display().to_string(),
            text,
        });
    }

    fn report(&mut self, command: &str, module: &str, outcome: Outcome, mut text: String, result: impl Serialize) -> Result<Report> {
        for w in &self.warnings {
            text = format!("warning: {w}\n{text}");
        }
        Ok(Report {
            command: command.into(),
            outcome,
            text,
            result: serde_json::to_value(result).map_err(|e| Error::Invalid(e.to_string()))?,
            provenance: Provenance {
                tool: "oligo".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                module: module.into(),
                inputs: std::mem::take(&mut self.inputs),
                flags: std::mem::take(&mut self.flags),
                caps: self.caps.used(),
            },
        })
    }
}

pub fn orbits(cx: &mut Context, file: &Path, arity: usize, show: bool) -> Result<Report> {
    cx.flag("arity", arity);
    cx.flag("list", show);
    let p = cx.presentation(file)?;
    let mut text = String::new();
    let mut tables = Vec::new();
    for n in 0..=arity {
        let table = enumerate_orbits(&p, n)?;
        writeln!(text, "arity {n}: {} orbits", table.len()).unwrap();
        if show {
            for (i, t) in table.types().iter().enumerate() {
                writeln!(text, "  {i}: {}", render::tuple_type(p.signature(), t)).unwrap();
            }
        }
        tables.push(table);
    }
    cx.report("orbits", "finite_structures", Outcome::Success, text, tables)
}

pub fn normalizer(cx: &mut Context, file: &Path, arity: usize) -> Result<Report> {
    cx.flag("arity", arity);
    let p = cx.presentation(file)?;
    let bound = cx.caps.get("consistency_bound")?;
    let depth = cx.caps.get("certificate_depth")?;
    let lim = inverse_limit_with_depth(&p, arity, bound, depth)?;
    let mut text = String::new();
    for level in &lim.levels {
        writeln!(text, "arity {}: {} relabelings", level.arity, level.order()).unwrap();
    }
    writeln!(text, "quotient order {}", lim.order()).unwrap();
    match lim.stabilized_at {
        Some(n) if lim.stabilized => writeln!(text, "stabilized from arity {n}").unwrap(),
        _ => writeln!(text, "not yet stabilized").unwrap(),
    }
    for (i, (g, cert)) in lim.limit.elements.iter().zip(&lim.limit.certificates).enumerate() {
        let status = match cert {
            oligo_core::normalizer::Realizability::Certified(c) => {
                format!("realized to depth {} ({} extensions matched)", c.depth, c.extensions_matched)
            }
            oligo_core::normalizer::Realizability::Failed(f) => format!("not realized: {}", f.reason),
        };
        writeln!(text, "element {i}: {:?} {status}", g.levels.last().unwrap()).unwrap();
    }
    let outcome = if lim.limit.exact { Outcome::Success } else { Outcome::Inconclusive };
    cx.report("normalizer", "normalizer_quotient", outcome, text, lim)
}

pub fn acl(cx: &mut Context, file: &Path, arity: usize) -> Result<Report> {
    cx.flag("arity", arity);
    let p = cx.presentation(file)?;
    let bound = cx.caps.get("count_bound")?;
    let space = TypeSpace::new(&p, arity + 1)?;
    let mut text = String::new();
    let mut reports = Vec::new();
    for o in 0..space.table(arity).len() {
        let r = acl_of_orbit(&space, arity, o, bound)?;
        write!(text, "{}:", render::tuple_type(p.signature(), &r.parameters)).unwrap();
        if r.is_trivial() {
            write!(text, " acl trivial").unwrap();
        }
        for a in r.new_elements() {
            write!(text, " algebraic {} x{}", render::tuple_type(p.signature(), &a.ty), a.multiplicity).unwrap();
        }
        if r.saturated {
            write!(text, " (some counts saturated)").unwrap();
        }
        text.push('\n');
        reports.push(r);
    }
    cx.report("acl", "algebraicity", Outcome::Success, text, reports)
}

pub fn no_algebraicity(cx: &mut Context, file: &Path, arity: usize) -> Result<Report> {
    cx.flag("arity", arity);
    let p = cx.presentation(file)?;
    let bound = cx.caps.get("count_bound")?;
    let r = is_no_algebraicity(&p, arity, bound)?;
    let mut text = format!("{} ({} parameter orbits up to arity {arity})\n", r.verdict, r.parameters_checked);
    if let Some(w) = &r.witness {
        writeln!(
            text,
            "witness: over {} the extension {} has exactly {} realization(s)",
            render::tuple_type(p.signature(), &w.parameters),
            render::tuple_type(p.signature(), &w.element),
            w.multiplicity
        )
        .unwrap();
    }
    for t in &r.ambiguous {
        writeln!(text, "ambiguous: {}", render::tuple_type(p.signature(), t)).unwrap();
    }
    cx.report("no-algebraicity", "algebraicity", r.verdict.into(), text, r)
}

#[derive(Serialize)]
struct MergeResult {
    presentation: String,
    one_orbits: usize,
    witness: Option<oligo_core::algebraicity::WitnessSearch>,
}

pub fn merge(cx: &mut Context, file: &Path, witness: bool) -> Result<Report> {
    cx.flag("witness", witness);
    let p = cx.presentation(file)?;
    let bound = cx.caps.get("merge_bound")?;
    let m = Merge::new(&p, bound)?;
    let merged = write_presentation(m.presentation());
    let mut text = format!("{} one-point orbits merged into one\n{merged}", m.one_orbit_count());
    let search = if witness {
        let cap = cx.caps.get("witness_cap")?;
        let s = find_algebraicity_witness(m.presentation(), bound, cap)?;
        match &s.witness {
            Some(w) => writeln!(
                text,
                "witness: point {} definable over {:?} in {}",
                w.element,
                w.parameters,
                render::structure(m.presentation().signature(), &w.structure)
            )
            .unwrap(),
            None => writeln!(text, "no witness with at most {} parameters", s.searched_to).unwrap(),
        }
        Some(s)
    } else {
        None
    };
    let result = MergeResult {
        presentation: merged,
        one_orbits: m.one_orbit_count(),
        witness: search,
    };
    cx.report("merge", "algebraicity", Outcome::Success, text, result)
}

pub fn imaginaries(cx: &mut Context, file: &Path, arity: usize) -> Result<Report> {
    cx.flag("arity", arity);
    let p = cx.presentation(file)?;
    let cap = cx.caps.get("equivalence_cap")?;
    let families = enumerate_equivalences(&p, arity, cap)?;
    let mut text = String::new();
    for f in &families {
        writeln!(
            text,
            "{}: {} definable equivalences over {} pair orbits",
            render::tuple_type(p.signature(), &f.base),
            f.equivalences.len(),
            f.pair_types
        )
        .unwrap();
    }
    cx.report("imaginaries", "imaginaries", Outcome::Success, text, families)
}

pub fn subgroups(cx: &mut Context, file: &Path, arity: usize) -> Result<Report> {
    cx.flag("arity", arity);
    let p = cx.presentation(file)?;
    let cap = cx.caps.get("equivalence_cap")?;
    let mut text = String::new();
    let mut lattices = Vec::new();
    for base in enumerate_orbits(&p, arity)?.types() {
        if !base.is_injective() {
            continue;
        }
        let l = subgroups_above(&p, base, cap)?;
        writeln!(text, "above {}: {} subgroups", render::tuple_type(p.signature(), base), l.len()).unwrap();
        for i in 0..l.len() {
            let e = &l.equivalences[i];
            writeln!(text, "  {i}: depth {} classes {}", l.depth(i), e.class_count()).unwrap();
        }
        lattices.push(l);
    }
    cx.report("subgroups", "imaginaries", Outcome::Success, text, lattices)
}

pub fn essential(cx: &mut Context, file: &Path, arity: usize) -> Result<Report> {
    cx.flag("arity", arity);
    let p = cx.presentation(file)?;
    let caps = cx.caps.imaginaries(arity)?;
    let r = classify_subgroups(&p, &caps)?;
    let mut text = String::new();
    for s in &r.subgroups {
        let c = &s.classification;
        let mut tags = vec![format!("depth {}", c.depth)];
        if c.irreducible {
            tags.push("irreducible".into());
        }
        if c.almost_essential {
            tags.push("almost essential".into());
        }
        if c.essential {
            tags.push("essential".into());
        }
        for (j, index) in &c.finite_index_below {
            tags.push(format!("index {index} over subgroup {j}"));
        }
        writeln!(text, "lattice {} subgroup {}: {}", s.lattice, s.index, tags.join(", ")).unwrap();
    }
    match r.essential_depth {
        Some(d) => writeln!(text, "essential depth {d}").unwrap(),
        None => writeln!(text, "no almost essential subgroup found").unwrap(),
    }
    let outcome = if r.essential_depth.is_some() { Outcome::Success } else { Outcome::Inconclusive };
    cx.report("essential", "imaginaries", outcome, text, r)
}

pub fn wei(cx: &mut Context, file: &Path, arity: usize) -> Result<Report> {
    cx.flag("arity", arity);
    let p = cx.presentation(file)?;
    let caps = cx.caps.imaginaries(arity)?;
    let r = check_wei(&p, &caps)?;
    let mut text = format!("{}\n", r.verdict);
    for s in &r.subgroups {
        writeln!(text, "lattice {} subgroup {}: sandwiched by {:?}", s.lattice, s.index, s.sets).unwrap();
    }
    cx.report("wei", "imaginaries", r.verdict.into(), text, r)
}

/// The spelling of a policy on the command line.
pub fn policy_name(policy: Policy) -> &'static str {
    match policy {
        Policy::PointStabilizers => "points",
        Policy::EssentialSubgroups => "essential",
    }
}

pub fn fingerprint_cmd(cx: &mut Context, file: &Path, policy: Policy) -> Result<Report> {
    cx.flag("policy", policy_name(policy));
    let p = cx.presentation(file)?;
    let caps = cx.caps.fragment(1)?;
    let fp = fingerprint(&p, policy, &caps)?;
    let mut text = String::new();
    for e in &fp.entries {
        let s = &e.summary;
        writeln!(
            text,
            "size {}: {} elements, {} subgroups, {} products, intersections {:?}",
            e.configuration_size, s.elements, s.subgroups, s.products, s.intersections
        )
        .unwrap();
    }
    cx.report("fingerprint", "coset_groupoid", Outcome::Success, text, fp)
}

pub fn compare(cx: &mut Context, a: &Path, b: &Path, policy: Policy) -> Result<Report> {
    cx.flag("policy", policy_name(policy));
    let pa = cx.presentation(a)?;
    let pb = cx.presentation(b)?;
    let caps = cx.caps.fragment(1)?;
    let c = compare_fingerprints(&fingerprint(&pa, policy, &caps)?, &fingerprint(&pb, policy, &caps)?);
    let (outcome, text) = match &c {
        Comparison::IndistinguishableAtCaps => (
            Outcome::Success,
            format!("indistinguishable up to configuration size {}\n", caps.configuration_size),
        ),
        Comparison::Distinguished(d) => {
            let s = &d.unmatched.summary;
            (
                Outcome::Fail,
                format!(
                    "distinguished at configuration size {}: input {} has a fragment ({} elements, {} subgroups) isomorphic to none of the other's\n",
                    d.configuration_size,
                    d.side + 1,
                    s.elements,
                    s.subgroups
                ),
            )
        }
    };
    cx.report("compare", "coset_groupoid", outcome, text, c)
}

#[derive(Serialize)]
struct FragmentResult {
    fragment: CgFragment,
    /// Element images of the automorphisms induced by the frame.
    inner_automorphisms: Vec<Vec<usize>>,
}

pub fn fragment(cx: &mut Context, file: &Path, policy: Policy, size: usize, index: usize) -> Result<Report> {
    cx.flag("policy", policy_name(policy));
    cx.flag("size", size);
    cx.flag("index", index);
    let p = cx.presentation(file)?;
    let caps = cx.caps.fragment(1)?;
    let frames: Vec<_> = acl_closed_configurations(&p, size, caps.count_bound)?
        .into_iter()
        .filter(|s| s.size() == size)
        .collect();
    let frame = frames.get(index).ok_or_else(|| {
        Error::Invalid(format!("only {} acl-closed configurations of size {size}", frames.len()))
    })?;
    let f = build_cg_fragment(&p, policy, frame, &caps)?;
    let inner = frame_automorphisms(&f)
        .iter()
        .map(|g| FragmentAutomorphism::induced(&f, g).map(|a| a.images))
        .collect::<Result<Vec<_>>>()?;
    let text = format!(
        "frame {}\n{} elements, {} subgroups, {} external products, {} inner automorphisms from the frame\n",
        render::structure(p.signature(), &f.frame),
        f.len(),
        f.subgroups,
        f.external_products.len(),
        inner.len()
    );
    let result = FragmentResult {
        fragment: f,
        inner_automorphisms: inner,
    };
    cx.report("fragment", "coset_groupoid", Outcome::Success, text, result)
}

#[derive(Serialize)]
struct InnCheckResult {
    consistency: InnerConsistency,
    violation: Option<String>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: format!("{}: {e}", path.display()),
    })
}

/// Accepts either a bare fragment or the result block of `fragment`.
fn read_fragment(path: &Path) -> Result<CgFragment> {
    let value: serde_json::Value = read_json(path)?;
    let value = match value.get("result").and_then(|r| r.get("fragment")) {
        Some(f) => f.clone(),
        None => value.get("fragment").cloned().unwrap_or(value),
    };
    serde_json::from_value(value).map_err(|e| Error::Invalid(format!("{}: not a fragment: {e}", path.display())))
}

pub fn inn_check(cx: &mut Context, fragment: &Path, automorphism: &Path, depth: usize, unchecked: bool) -> Result<Report> {
    cx.flag("depth", depth);
    cx.flag("unchecked", unchecked);
    let f = read_fragment(fragment)?;
    let p = f.parse_presentation()?;
    let a: FragmentAutomorphism = read_json(automorphism)?;
    cx.note_text(fragment, serde_json::to_string(&f).expect("fragments serialize"));
    cx.note_text(automorphism, serde_json::to_string(&a).expect("automorphisms serialize"));
    let phi = if unchecked {
        FragmentAutomorphism::unchecked(&f, a.images)?
    } else {
        FragmentAutomorphism::new(&f, a.images)?
    };
    let violation = phi.violation(&f);
    let consistency = inner_consistent_to_depth(&p, &f, &phi, depth)?;
    let mut text = match consistency {
        InnerConsistency::Consistent(d) => format!("consistent to depth {d}\n"),
        InnerConsistency::RefutedAt(n) => format!("refuted at level {n}: not inner\n"),
    };
    if let Some(v) = &violation {
        writeln!(text, "note: not a fragment automorphism: {v}").unwrap();
    }
    let outcome = match consistency {
        InnerConsistency::Consistent(_) => Outcome::Success,
        InnerConsistency::RefutedAt(_) => Outcome::Fail,
    };
    cx.report("inn-check", "inn_tree", outcome, text, InnCheckResult { consistency, violation })
}

pub fn wu_verify(cx: &mut Context, seed: u64, samples: usize, support: usize, max_k: usize) -> Result<Report> {
    cx.flag("seed", seed);
    cx.flag("samples", samples);
    cx.flag("support", support);
    cx.flag("max_k", max_k);
    let r = verify_suite(seed, samples, support, max_k);
    let mark = |ok: bool| if ok { "ok" } else { "FAILED" };
    let mut text = String::new();
    writeln!(text, "group axioms on {samples} random triples: {}", mark(r.axioms_ok)).unwrap();
    writeln!(text, "centre is the c-part: {}", mark(r.center_ok)).unwrap();
    for (n, w) in &r.prefix_witnesses {
        match w {
            Some(g) => writeln!(text, "prefix conjugation {n}: inner, conjugator {g}").unwrap(),
            None => writeln!(text, "prefix conjugation {n}: no conjugator found").unwrap(),
        }
    }
    match &r.limit_certificate {
        Some(NotInnerCertificate::MovesInfinitelyMany { from, .. }) => writeln!(
            text,
            "limit: not inner, it moves a_i for every i >= {from} while a conjugation fixes all but finitely many generators"
        )
        .unwrap(),
        Some(NotInnerCertificate::LeavesCentreCoset { generator, image }) => {
            writeln!(text, "limit: not inner, {generator:?} maps to {image}").unwrap()
        }
        None => writeln!(text, "limit: no certificate").unwrap(),
    }
    writeln!(text, "convergence checked up to k = {:?}", r.converges_up_to).unwrap();
    writeln!(text, "order three: {}", mark(r.order_three)).unwrap();
    writeln!(text, "moves each element by a central factor: {}", mark(r.lemma_ok)).unwrap();
    let outcome = if r.passed() { Outcome::Success } else { Outcome::Fail };
    cx.report("wu verify", "wu_group", outcome, text, r)
}
