//! Class presentations of homogeneous structures and their ages.
//!
//! A presentation names a signature and either a finite list of forbidden
//! structures (no induced copy may occur) or an explicit list of age members
//! up to a size bound.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_form, CanonicalCode};
use crate::complete::{completions, Constraint};
use crate::error::{Error, Result};
use crate::structure::{embeds_hitting, FinStructure, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AgeMode {
    Forbidden(Vec<FinStructure>),
    ExplicitAge {
        members: Vec<FinStructure>,
        bound: usize,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    pub homogeneous: bool,
    pub transitive: bool,
}

/// Outcome of an age membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admission {
    Admitted,
    Rejected,
    /// Beyond the bound of an explicit age.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct ClassPresentation {
    name: Option<String>,
    signature: Signature,
    mode: AgeMode,
    claims: Claims,
    explicit_codes: HashSet<CanonicalCode>,
}

impl PartialEq for ClassPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.signature == other.signature
            && self.mode == other.mode
            && self.claims == other.claims
    }
}

impl ClassPresentation {
    pub fn forbidden(signature: Signature, forbidden: Vec<FinStructure>) -> Result<Self> {
        let mut problems = Vec::new();
        for (i, f) in forbidden.iter().enumerate() {
            if f.size() == 0 {
                problems.push(format!("forbidden structure #{i} is empty"));
            }
            if f.arities() != signature.arities().as_slice() {
                problems.push(format!("forbidden structure #{i} does not match the signature"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(ClassPresentation {
            name: None,
            signature,
            mode: AgeMode::Forbidden(forbidden),
            claims: Claims::default(),
            explicit_codes: HashSet::new(),
        })
    }

    /// An explicit age. The list must be closed under substructures (up to
    /// isomorphism) and contain no member larger than `bound`.
    pub fn explicit(signature: Signature, members: Vec<FinStructure>, bound: usize) -> Result<Self> {
        let mut problems = Vec::new();
        let mut codes = HashSet::new();
        for (i, m) in members.iter().enumerate() {
            if m.arities() != signature.arities().as_slice() {
                problems.push(format!("age member #{i} does not match the signature"));
                continue;
            }
            if m.size() > bound {
                problems.push(format!(
                    "age member #{i} has size {} above the bound {bound}",
                    m.size()
                ));
            }
            if m.size() > 0 {
                codes.insert(canonical_form(m));
            }
        }
        for (i, m) in members.iter().enumerate() {
            if m.size() <= 1 {
                continue;
            }
            for drop in 0..m.size() {
                let keep: Vec<usize> = (0..m.size()).filter(|&x| x != drop).collect();
                if !codes.contains(&canonical_form(&m.induced(&keep))) {
                    problems.push(format!(
                        "age member #{i} has a substructure (without point {drop}) missing from the list"
                    ));
                    break;
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(ClassPresentation {
            name: None,
            signature,
            mode: AgeMode::ExplicitAge { members, bound },
            claims: Claims::default(),
            explicit_codes: codes,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_claims(mut self, claims: Claims) -> Self {
        self.claims = claims;
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn mode(&self) -> &AgeMode {
        &self.mode
    }

    pub fn claims(&self) -> Claims {
        self.claims
    }

    /// The size bound of an explicit age; `None` for forbidden presentations.
    pub fn age_bound(&self) -> Option<usize> {
        match &self.mode {
            AgeMode::Forbidden(_) => None,
            AgeMode::ExplicitAge { bound, .. } => Some(*bound),
        }
    }

    pub(crate) fn check_size(&self, size: usize) -> Result<()> {
        match self.age_bound() {
            Some(bound) if size > bound => Err(Error::BoundExceeded {
                requested: size,
                bound,
            }),
            _ => Ok(()),
        }
    }

    pub fn admits(&self, s: &FinStructure) -> Admission {
        let all = vec![true; s.size()];
        self.admits_within(s, &all, None)
    }

    /// Membership of the substructure induced on the flagged points, given
    /// that every substructure avoiding `new_point` is already known to be
    /// admitted.
    pub(crate) fn admits_within(
        &self,
        s: &FinStructure,
        allowed: &[bool],
        new_point: Option<usize>,
    ) -> Admission {
        match &self.mode {
            AgeMode::Forbidden(list) => {
                if list.iter().any(|f| embeds_hitting(f, s, allowed, new_point)) {
                    Admission::Rejected
                } else {
                    Admission::Admitted
                }
            }
            AgeMode::ExplicitAge { bound, .. } => {
                let points: Vec<usize> = (0..s.size()).filter(|&p| allowed[p]).collect();
                if points.is_empty() {
                    return Admission::Admitted;
                }
                if points.len() > *bound {
                    return Admission::Unknown;
                }
                let sub = s.induced(&points);
                if self.explicit_codes.contains(&canonical_form(&sub)) {
                    Admission::Admitted
                } else {
                    Admission::Rejected
                }
            }
        }
    }

    /// One representative per isomorphism class of age members of size
    /// `1..=size_bound`, ordered by canonical code.
    pub fn enumerate_age(&self, size_bound: usize) -> Result<Vec<FinStructure>> {
        if size_bound == 0 {
            return Err(Error::Invalid("size bound must be at least 1".into()));
        }
        Ok(self
            .age_levels(size_bound)?
            .into_iter()
            .skip(1)
            .flatten()
            .collect())
    }

    /// Age representatives grouped by size, including the empty structure at
    /// index 0. Each level is sorted by canonical code.
    pub fn age_levels(&self, size_bound: usize) -> Result<Vec<Vec<FinStructure>>> {
        self.check_size(size_bound)?;
        let empty = FinStructure::empty(&self.signature, 0);
        let mut levels = vec![vec![empty]];
        match &self.mode {
            AgeMode::ExplicitAge { members, .. } => {
                let mut by_size: BTreeMap<usize, BTreeMap<CanonicalCode, FinStructure>> =
                    BTreeMap::new();
                for m in members.iter().filter(|m| m.size() > 0) {
                    by_size
                        .entry(m.size())
                        .or_default()
                        .entry(canonical_form(m))
                        .or_insert_with(|| m.clone());
                }
                for size in 1..=size_bound {
                    levels.push(
                        by_size
                            .remove(&size)
                            .map(|m| m.into_values().collect())
                            .unwrap_or_default(),
                    );
                }
            }
            AgeMode::Forbidden(_) => {
                for _ in 1..=size_bound {
                    let prev = levels.last().expect("nonempty");
                    let mut next: BTreeMap<CanonicalCode, FinStructure> = BTreeMap::new();
                    for s in prev {
                        for ext in self.one_point_extensions(s)? {
                            next.entry(canonical_form(&ext)).or_insert(ext);
                        }
                    }
                    levels.push(next.into_values().collect());
                }
            }
        }
        Ok(levels)
    }

    /// Every age member on `s.size() + 1` points whose restriction to the
    /// first `s.size()` points is `s` (labelled, not up to isomorphism).
    pub fn one_point_extensions(&self, s: &FinStructure) -> Result<Vec<FinStructure>> {
        let m = s.size();
        let out = completions(
            self,
            m + 1,
            &[Constraint::new((0..m).collect(), s.clone())],
            None,
        )?;
        Ok(out)
    }

    /// Joint-embedding and one-point amalgamation problems among age members
    /// of size at most `size_bound`.
    pub fn check_amalgamation(&self, size_bound: usize) -> Result<AmalgamationReport> {
        if size_bound < 2 {
            return Err(Error::Invalid("amalgamation bound must be at least 2".into()));
        }
        let levels = self.age_levels(size_bound.min(self.age_bound().unwrap_or(usize::MAX)))?;
        let mut report = AmalgamationReport {
            bound: size_bound,
            problems_checked: 0,
            problems_unchecked: 0,
            failures: Vec::new(),
        };
        for (size, level) in levels.iter().enumerate().skip(1) {
            if level.is_empty() {
                report.failures.push(AmalgamationFailure {
                    kind: FailureKind::JointEmbedding,
                    base: FinStructure::empty(&self.signature, 0),
                    left: FinStructure::empty(&self.signature, 1),
                    right: levels[size - 1]
                        .first()
                        .cloned()
                        .unwrap_or_else(|| FinStructure::empty(&self.signature, 0)),
                    note: format!(
                        "no age member of size {size}: a point and a member of size {} never embed jointly on disjoint supports",
                        size - 1
                    ),
                });
                break;
            }
        }
        for level in levels.iter().take(size_bound) {
            for base in level {
                let m = base.size();
                let fits = self.age_bound().is_none_or(|b| m + 2 <= b);
                let exts = self.one_point_extensions(base)?;
                for (i, left) in exts.iter().enumerate() {
                    for right in &exts[i..] {
                        if !fits {
                            report.problems_unchecked += 1;
                            continue;
                        }
                        report.problems_checked += 1;
                        if left == right {
                            continue;
                        }
                        let mut right_pts: Vec<usize> = (0..m).collect();
                        right_pts.push(m + 1);
                        let amalgams = completions(
                            self,
                            m + 2,
                            &[
                                Constraint::new((0..=m).collect(), left.clone()),
                                Constraint::new(right_pts, right.clone()),
                            ],
                            Some(1),
                        )?;
                        if amalgams.is_empty() {
                            report.failures.push(AmalgamationFailure {
                                kind: if m == 0 {
                                    FailureKind::JointEmbedding
                                } else {
                                    FailureKind::Amalgamation
                                },
                                base: base.clone(),
                                left: left.clone(),
                                right: right.clone(),
                                note: "no amalgam with distinct new points".into(),
                            });
                        }
                    }
                }
            }
        }
        Ok(report)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    JointEmbedding,
    Amalgamation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgamationFailure {
    pub kind: FailureKind,
    pub base: FinStructure,
    pub left: FinStructure,
    pub right: FinStructure,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgamationReport {
    pub bound: usize,
    pub problems_checked: usize,
    /// Problems whose amalgam would exceed an explicit age bound.
    pub problems_unchecked: usize,
    pub failures: Vec<AmalgamationFailure>,
}

impl AmalgamationReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}
