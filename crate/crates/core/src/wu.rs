//! The exponent-3 group generated by `a_i`, `b_i` (`i ≥ 0`) and a central
//! `c`, with `b_i a_i b_i⁻¹ = a_i c` and all other generator pairs commuting.
//!
//! Every element is `a^u b^v c^w` for finitely supported `u, v` over `Z/3`.
//! Since `b_i a_i = a_i b_i c`, moving `b^v` past `a^u′` costs `c^⟨v,u′⟩`:
//!
//! `(u, v, w)(u′, v′, w′) = (u + u′, v + v′, w + w′ + ⟨v, u′⟩)`.
//!
//! The automorphism `a_i ↦ a_i c`, `b_i ↦ b_i` is the limit of conjugation
//! by `b_0 ⋯ b_{n-1}` but is not itself inner.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn z3(x: i64) -> u8 {
    x.rem_euclid(3) as u8
}

/// A finitely supported map `index → Z/3`, zeros omitted.
pub type Exponents = BTreeMap<usize, u8>;

fn add_into(target: &mut Exponents, other: &Exponents, scale: i64) {
    for (&i, &e) in other {
        let x = z3(*target.get(&i).unwrap_or(&0) as i64 + scale * e as i64);
        if x == 0 {
            target.remove(&i);
        } else {
            target.insert(i, x);
        }
    }
}

fn pairing(v: &Exponents, u: &Exponents) -> i64 {
    v.iter().map(|(i, &x)| x as i64 * *u.get(i).unwrap_or(&0) as i64).sum()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WuElement {
    pub u: Exponents,
    pub v: Exponents,
    pub w: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    A(usize),
    B(usize),
}

impl Generator {
    pub fn index(self) -> usize {
        match self {
            Generator::A(i) | Generator::B(i) => i,
        }
    }
}

impl WuElement {
    pub fn identity() -> WuElement {
        WuElement::default()
    }

    pub fn a(i: usize) -> WuElement {
        WuElement {
            u: [(i, 1)].into(),
            ..WuElement::default()
        }
    }

    pub fn b(i: usize) -> WuElement {
        WuElement {
            v: [(i, 1)].into(),
            ..WuElement::default()
        }
    }

    pub fn c() -> WuElement {
        WuElement::central(1)
    }

    pub fn central(w: i64) -> WuElement {
        WuElement {
            w: z3(w),
            ..WuElement::default()
        }
    }

    pub fn generator(g: Generator) -> WuElement {
        match g {
            Generator::A(i) => WuElement::a(i),
            Generator::B(i) => WuElement::b(i),
        }
    }

    /// Builds an element from exponent lists, reducing mod 3.
    pub fn from_parts(u: &[(usize, i64)], v: &[(usize, i64)], w: i64) -> WuElement {
        let mut x = WuElement::central(w);
        for &(i, e) in u {
            add_into(&mut x.u, &[(i, z3(e))].into(), 1);
        }
        for &(i, e) in v {
            add_into(&mut x.v, &[(i, z3(e))].into(), 1);
        }
        x
    }

    /// Whether the maps have no stored zeros and all entries lie in `Z/3`.
    pub fn is_canonical(&self) -> bool {
        self.w < 3 && self.u.values().chain(self.v.values()).all(|&e| e == 1 || e == 2)
    }

    pub fn is_identity(&self) -> bool {
        self.u.is_empty() && self.v.is_empty() && self.w == 0
    }

    pub fn is_central(&self) -> bool {
        self.u.is_empty() && self.v.is_empty()
    }

    /// Indices where `u` or `v` is nonzero.
    pub fn support(&self) -> std::collections::BTreeSet<usize> {
        self.u.keys().chain(self.v.keys()).copied().collect()
    }

    pub fn mul(&self, other: &WuElement) -> WuElement {
        let mut u = self.u.clone();
        add_into(&mut u, &other.u, 1);
        let mut v = self.v.clone();
        add_into(&mut v, &other.v, 1);
        WuElement {
            u,
            v,
            w: z3(self.w as i64 + other.w as i64 + pairing(&self.v, &other.u)),
        }
    }

    pub fn inverse(&self) -> WuElement {
        let mut u = Exponents::new();
        add_into(&mut u, &self.u, -1);
        let mut v = Exponents::new();
        add_into(&mut v, &self.v, -1);
        WuElement {
            u,
            v,
            w: z3(-(self.w as i64) + pairing(&self.v, &self.u)),
        }
    }

    pub fn pow(&self, k: u32) -> WuElement {
        (0..k).fold(WuElement::identity(), |acc, _| acc.mul(self))
    }

    /// `g x g⁻¹`.
    pub fn conjugate_by(&self, g: &WuElement) -> WuElement {
        g.mul(self).mul(&g.inverse())
    }

    pub fn commutes_with(&self, other: &WuElement) -> bool {
        self.mul(other) == other.mul(self)
    }

    /// A generator not commuting with `self`, when `self` is not central.
    pub fn noncommuting_generator(&self) -> Option<Generator> {
        if let Some(&i) = self.u.keys().next() {
            return Some(Generator::B(i));
        }
        self.v.keys().next().map(|&i| Generator::A(i))
    }

    /// A random element supported on indices below `support`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, support: usize) -> WuElement {
        let mut x = WuElement::central(rng.gen_range(0..3));
        for i in 0..support {
            let (a, b) = (rng.gen_range(0..3u8), rng.gen_range(0..3u8));
            if a != 0 {
                x.u.insert(i, a);
            }
            if b != 0 {
                x.v.insert(i, b);
            }
        }
        x
    }
}

impl fmt::Display for WuElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let power = |name: String, e: u8| if e == 1 { name } else { format!("{name}^{e}") };
        parts.extend(self.u.iter().map(|(i, &e)| power(format!("a{i}"), e)));
        parts.extend(self.v.iter().map(|(i, &e)| power(format!("b{i}"), e)));
        if self.w != 0 {
            parts.push(power("c".into(), self.w));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

/// What an endomorphism does to all but finitely many generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventualRule {
    Identity,
    /// `a_i ↦ a_i c^k`, `b_i ↦ b_i`.
    CentralShift(u8),
    Conjugation(WuElement),
}

impl EventualRule {
    fn image(&self, g: Generator) -> WuElement {
        let x = WuElement::generator(g);
        match (self, g) {
            (EventualRule::Identity, _) => x,
            (EventualRule::CentralShift(k), Generator::A(_)) => x.mul(&WuElement::central(*k as i64)),
            (EventualRule::CentralShift(_), Generator::B(_)) => x,
            (EventualRule::Conjugation(h), _) => x.conjugate_by(h),
        }
    }

    /// Indices past which the rule's behavior is uniform.
    fn reach(&self) -> usize {
        match self {
            EventualRule::Conjugation(h) => h.support().last().map_or(0, |&i| i + 1),
            _ => 0,
        }
    }
}

/// An endomorphism given by finitely many explicit generator images and a
/// rule for the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WuEndo {
    pub exceptions: BTreeMap<Generator, WuElement>,
    pub rule: EventualRule,
}

impl WuEndo {
    pub fn identity() -> WuEndo {
        WuEndo::from_rule(EventualRule::Identity)
    }

    pub fn from_rule(rule: EventualRule) -> WuEndo {
        WuEndo {
            exceptions: BTreeMap::new(),
            rule,
        }
    }

    /// `a_i ↦ a_i c`, `b_i ↦ b_i` for every `i`.
    pub fn central_shift() -> WuEndo {
        WuEndo::from_rule(EventualRule::CentralShift(1))
    }

    pub fn conjugation(g: WuElement) -> WuEndo {
        WuEndo::from_rule(EventualRule::Conjugation(g))
    }

    /// Checks the generator images against the defining relations.
    pub fn new(exceptions: BTreeMap<Generator, WuElement>, rule: EventualRule) -> Result<WuEndo> {
        let e = WuEndo { exceptions, rule };
        e.validate()?;
        Ok(e.normalized())
    }

    fn window(&self) -> usize {
        let exceptional = self.exceptions.keys().map(|g| g.index() + 1).max().unwrap_or(0);
        exceptional.max(self.rule.reach())
    }

    pub fn image(&self, g: Generator) -> WuElement {
        self.exceptions.get(&g).cloned().unwrap_or_else(|| self.rule.image(g))
    }

    /// The image of `c`, read off the relation at index 0.
    pub fn image_of_c(&self) -> WuElement {
        let (a, b) = (self.image(Generator::A(0)), self.image(Generator::B(0)));
        a.inverse().mul(&b).mul(&a).mul(&b.inverse())
    }

    /// Verifies the relations on every index up to one past the window,
    /// beyond which they repeat.
    pub fn validate(&self) -> Result<()> {
        let n = self.window() + 1;
        let c = self.image_of_c();
        if !c.is_central() {
            return Err(Error::Invalid(format!("c maps to the non-central element {c}")));
        }
        let gens: Vec<Generator> = (0..=n).flat_map(|i| [Generator::A(i), Generator::B(i)]).collect();
        for &x in &gens {
            for &y in &gens {
                let (ix, iy) = (self.image(x), self.image(y));
                let expected = match (x, y) {
                    (Generator::B(i), Generator::A(j)) if i == j => iy.mul(&ix).mul(&c),
                    (Generator::A(i), Generator::B(j)) if i == j => iy.mul(&ix).mul(&c.inverse()),
                    _ => iy.mul(&ix),
                };
                if ix.mul(&iy) != expected {
                    return Err(Error::Invalid(format!("images of {x:?} and {y:?} break a relation")));
                }
            }
        }
        Ok(())
    }

    /// Drops exceptions that agree with the rule.
    pub fn normalized(mut self) -> WuEndo {
        let rule = self.rule.clone();
        self.exceptions.retain(|&g, x| *x != rule.image(g));
        self
    }

    pub fn apply(&self, x: &WuElement) -> WuElement {
        let mut out = WuElement::identity();
        for (&i, &e) in &x.u {
            out = out.mul(&self.image(Generator::A(i)).pow(e as u32));
        }
        for (&i, &e) in &x.v {
            out = out.mul(&self.image(Generator::B(i)).pow(e as u32));
        }
        out.mul(&self.image_of_c().pow(x.w as u32))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &WuEndo) -> WuEndo {
        let n = self.window().max(other.window());
        let exceptions = (0..n)
            .flat_map(|i| [Generator::A(i), Generator::B(i)])
            .map(|g| (g, self.apply(&other.image(g))))
            .collect();
        let shift = |r: &EventualRule| match r {
            EventualRule::CentralShift(k) => *k as i64,
            _ => 0,
        };
        let conjugator = |r: &EventualRule| match r {
            EventualRule::Conjugation(h) => h.clone(),
            _ => WuElement::identity(),
        };
        let k = z3(shift(&self.rule) + shift(&other.rule));
        let rule = if k != 0 {
            EventualRule::CentralShift(k)
        } else {
            let h = conjugator(&self.rule).mul(&conjugator(&other.rule));
            if h.is_central() {
                EventualRule::Identity
            } else {
                EventualRule::Conjugation(h)
            }
        };
        WuEndo { exceptions, rule }.normalized()
    }

    /// Whether both agree on `a_i`, `b_i` for `i < k`.
    pub fn agrees_on(&self, other: &WuEndo, k: usize) -> bool {
        (0..k)
            .flat_map(|i| [Generator::A(i), Generator::B(i)])
            .all(|g| self.image(g) == other.image(g))
    }

    /// Agreement on every generator.
    pub fn same_as(&self, other: &WuEndo) -> bool {
        let n = self.window().max(other.window()) + 1;
        self.agrees_on(other, n) && self.image_of_c() == other.image_of_c()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotInnerCertificate {
    /// The rule moves every generator `a_i` with `i ≥ from`, while a
    /// conjugation fixes all generators outside its finite support.
    MovesInfinitelyMany { from: usize, rule: EventualRule },
    /// A conjugation sends each generator into its coset of the centre.
    LeavesCentreCoset { generator: Generator, image: WuElement },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innerness {
    Inner(WuElement),
    NotInner(NotInnerCertificate),
    /// Inner, but every conjugator has larger support than allowed.
    SupportExceeded(usize),
}

/// Conjugation by `(p, q, r)` sends `a_i ↦ a_i c^{q_i}` and
/// `b_i ↦ b_i c^{-p_i}`, so the conjugator is read off the generator images
/// up to the centre. The witness returned has `w = 0`.
pub fn is_inner(e: &WuEndo, support_bound: usize) -> Innerness {
    if let EventualRule::CentralShift(k) = e.rule {
        if k != 0 {
            return Innerness::NotInner(NotInnerCertificate::MovesInfinitelyMany {
                from: e.window(),
                rule: e.rule.clone(),
            });
        }
    }
    let mut g = WuElement::identity();
    for i in 0..e.window() {
        for gen in [Generator::A(i), Generator::B(i)] {
            let x = WuElement::generator(gen);
            let image = e.image(gen);
            let shift = x.inverse().mul(&image);
            if !shift.is_central() {
                return Innerness::NotInner(NotInnerCertificate::LeavesCentreCoset { generator: gen, image });
            }
            if shift.w != 0 {
                match gen {
                    Generator::A(i) => g.v.insert(i, shift.w),
                    Generator::B(i) => g.u.insert(i, z3(-(shift.w as i64))),
                };
            }
        }
    }
    let support = g.support().len();
    if support > support_bound {
        Innerness::SupportExceeded(support)
    } else {
        Innerness::Inner(g)
    }
}

/// `b_0 b_1 ⋯ b_{n-1}`.
pub fn prefix_conjugator(n: usize) -> WuElement {
    (0..n).fold(WuElement::identity(), |acc, i| acc.mul(&WuElement::b(i)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WuSequence {
    Constant(WuEndo),
    /// The `n`-th term is conjugation by `b_0 ⋯ b_{n-1}`.
    PrefixConjugation,
}

impl WuSequence {
    pub fn term(&self, n: usize) -> WuEndo {
        match self {
            WuSequence::Constant(e) => e.clone(),
            WuSequence::PrefixConjugation => WuEndo::conjugation(prefix_conjugator(n)),
        }
    }

    /// An `N` such that all terms from `N` on agree with term `N` on the
    /// first `k` generator pairs.
    pub fn settles_on(&self, k: usize) -> usize {
        match self {
            WuSequence::Constant(_) => 0,
            WuSequence::PrefixConjugation => k,
        }
    }
}

/// Whether every term from `k` on agrees with `limit` on `a_i, b_i`, `i < k`.
pub fn converges_to(seq: &WuSequence, limit: &WuEndo, k: usize) -> bool {
    let last = seq.settles_on(k).max(k);
    (k..=last).all(|n| seq.term(n).agrees_on(limit, k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WuSuiteReport {
    pub seed: u64,
    pub samples: usize,
    pub support: usize,
    pub max_k: usize,
    pub axioms_ok: bool,
    pub center_ok: bool,
    /// `(n, conjugator found)` for each tested prefix conjugation.
    pub prefix_witnesses: Vec<(usize, Option<WuElement>)>,
    pub limit_certificate: Option<NotInnerCertificate>,
    pub converges_up_to: Option<usize>,
    pub order_three: bool,
    pub lemma_ok: bool,
}

impl WuSuiteReport {
    pub fn passed(&self) -> bool {
        self.axioms_ok
            && self.center_ok
            && self.prefix_witnesses.iter().all(|(n, w)| w.as_ref() == Some(&prefix_conjugator(*n)))
            && self.limit_certificate.is_some()
            && self.converges_up_to == Some(self.max_k)
            && self.order_three
            && self.lemma_ok
    }
}

/// The self-contained checks on the limit automorphism: group axioms and
/// centre on random samples, innerness of the prefix conjugations and
/// non-innerness of their limit, convergence, `Φ³ = 1` and `Φ(g)g⁻¹`
/// central.
pub fn verify_suite(seed: u64, samples: usize, support: usize, max_k: usize) -> WuSuiteReport {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let phi = WuEndo::central_shift();
    let mut axioms_ok = true;
    let mut center_ok = true;
    let mut lemma_ok = true;
    for _ in 0..samples {
        let x = WuElement::random(&mut rng, support);
        let y = WuElement::random(&mut rng, support);
        let z = WuElement::random(&mut rng, support);
        axioms_ok &= x.mul(&y).mul(&z) == x.mul(&y.mul(&z))
            && x.mul(&x.inverse()).is_identity()
            && x.inverse().mul(&x).is_identity()
            && x.pow(3).is_identity();
        center_ok &= match x.noncommuting_generator() {
            Some(g) => !x.commutes_with(&WuElement::generator(g)),
            None => x.is_central(),
        };
        lemma_ok &= phi.apply(&x).mul(&x.inverse()).is_central()
            && phi.apply(&x.mul(&y)) == phi.apply(&x).mul(&phi.apply(&y))
            && phi.apply(&z.conjugate_by(&y)) == phi.apply(&z).conjugate_by(&y);
    }
    let prefix_witnesses = (1..=max_k)
        .map(|n| match is_inner(&WuSequence::PrefixConjugation.term(n), n) {
            Innerness::Inner(g) => (n, Some(g)),
            _ => (n, None),
        })
        .collect();
    let limit_certificate = match is_inner(&phi, max_k) {
        Innerness::NotInner(c) => Some(c),
        _ => None,
    };
    let converges_up_to = (1..=max_k)
        .take_while(|&k| converges_to(&WuSequence::PrefixConjugation, &phi, k))
        .last();
    let order_three = phi.compose(&phi).compose(&phi).same_as(&WuEndo::identity());
    WuSuiteReport {
        seed,
        samples,
        support,
        max_k,
        axioms_ok,
        center_ok,
        prefix_witnesses,
        limit_certificate,
        converges_up_to,
        order_three,
        lemma_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_relation() {
        let (a0, b0, c) = (WuElement::a(0), WuElement::b(0), WuElement::c());
        assert_eq!(b0.mul(&a0), a0.mul(&b0).mul(&c));
        assert_eq!(a0.conjugate_by(&b0), a0.mul(&c));
        assert_eq!(a0.mul(&WuElement::b(1)).w, 0);
        let x = a0.mul(&b0);
        assert!(x.pow(3).is_identity());
        assert_eq!(b0.mul(&a0).to_string(), "a0 b0 c");
    }

    #[test]
    fn prefix_conjugation_shifts_early_generators() {
        let g2 = prefix_conjugator(2);
        assert_eq!(WuElement::a(1).conjugate_by(&g2), WuElement::a(1).mul(&WuElement::c()));
        assert_eq!(WuElement::a(5).conjugate_by(&g2), WuElement::a(5));
        let phi = WuEndo::central_shift();
        let x = WuElement::a(0).mul(&WuElement::a(1));
        assert_eq!(phi.apply(&x), x.mul(&WuElement::central(2)));
    }

    #[test]
    fn innerness() {
        let a0 = WuElement::a(0);
        assert_eq!(is_inner(&WuEndo::conjugation(a0.clone()), 4), Innerness::Inner(a0));
        assert!(matches!(
            is_inner(&WuEndo::central_shift(), 16),
            Innerness::NotInner(NotInnerCertificate::MovesInfinitelyMany { .. })
        ));
        assert_eq!(
            is_inner(&WuSequence::PrefixConjugation.term(3), 3),
            Innerness::Inner(prefix_conjugator(3))
        );
        assert_eq!(is_inner(&WuSequence::PrefixConjugation.term(3), 2), Innerness::SupportExceeded(3));
        let skew = WuEndo::new([(Generator::A(0), WuElement::a(0).mul(&WuElement::b(0)))].into(), EventualRule::Identity);
        assert!(matches!(
            is_inner(&skew.unwrap(), 4),
            Innerness::NotInner(NotInnerCertificate::LeavesCentreCoset { generator: Generator::A(0), .. })
        ));
        assert!(WuEndo::new([(Generator::A(0), WuElement::a(1))].into(), EventualRule::Identity).is_err());
    }

    #[test]
    fn convergence() {
        let phi = WuEndo::central_shift();
        assert!(converges_to(&WuSequence::PrefixConjugation, &phi, 3));
        assert!(!converges_to(&WuSequence::Constant(WuEndo::identity()), &phi, 1));
        assert!(!converges_to(&WuSequence::PrefixConjugation, &WuEndo::identity(), 1));
    }

    #[test]
    fn compose_tracks_rules() {
        let phi = WuEndo::central_shift();
        let phi2 = phi.compose(&phi);
        assert_eq!(phi2.rule, EventualRule::CentralShift(2));
        assert!(phi2.compose(&phi).same_as(&WuEndo::identity()));
        let g = WuElement::a(2).mul(&WuElement::b(0));
        let conj = WuEndo::conjugation(g.clone());
        let twice = conj.compose(&conj);
        let x = WuElement::a(0).mul(&WuElement::b(2));
        assert_eq!(twice.apply(&x), x.conjugate_by(&g.mul(&g)));
    }

    #[test]
    fn suite_passes() {
        let report = verify_suite(7, 200, 6, 16);
        assert!(report.passed(), "{report:?}");
    }
}
