//! Quantifier-free types of tuples: an equality pattern plus the structure on
//! the distinct entries.
//!
//! In a homogeneous structure two tuples lie in the same orbit exactly when
//! they have the same type, so a [`TupleType`] names an orbit on `M^n`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_form, CanonicalCode};
use crate::complete::{completions, Constraint};
use crate::error::Result;
use crate::presentation::ClassPresentation;
use crate::structure::FinStructure;

/// The type of an `n`-tuple. Entry `i` of the tuple is point `labeling[i]`
/// of `carrier`; carrier points are numbered in order of first occurrence,
/// so the labeling is a restricted growth string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TupleType {
    labeling: Vec<usize>,
    carrier: FinStructure,
}

impl TupleType {
    /// The type of `tuple` inside `s`.
    pub fn of_tuple(s: &FinStructure, tuple: &[usize]) -> TupleType {
        let mut points: Vec<usize> = Vec::new();
        let labeling = tuple
            .iter()
            .map(|&x| match points.iter().position(|&p| p == x) {
                Some(i) => i,
                None => {
                    points.push(x);
                    points.len() - 1
                }
            })
            .collect();
        TupleType {
            labeling,
            carrier: s.induced(&points),
        }
    }

    /// The type of the empty tuple.
    pub fn empty(p: &ClassPresentation) -> TupleType {
        TupleType {
            labeling: Vec::new(),
            carrier: FinStructure::empty(p.signature(), 0),
        }
    }

    pub fn arity(&self) -> usize {
        self.labeling.len()
    }

    pub fn labeling(&self) -> &[usize] {
        &self.labeling
    }

    pub fn carrier(&self) -> &FinStructure {
        &self.carrier
    }

    /// Number of distinct entries.
    pub fn support(&self) -> usize {
        self.carrier.size()
    }

    pub fn is_injective(&self) -> bool {
        self.support() == self.arity()
    }

    /// The type of the tuple whose entry `i` is entry `positions[i]` of a
    /// realization of `self`.
    pub fn restrict(&self, positions: &[usize]) -> TupleType {
        let tuple: Vec<usize> = positions.iter().map(|&i| self.labeling[i]).collect();
        TupleType::of_tuple(&self.carrier, &tuple)
    }

    /// Sort key: equality pattern, then isomorphism type of the carrier, then
    /// the labelled carrier.
    pub fn order_key(&self) -> (Vec<usize>, CanonicalCode, Vec<u32>) {
        (
            self.labeling.clone(),
            canonical_form(&self.carrier),
            self.carrier.raw_code(),
        )
    }

    /// All types of arity `n + 1` whose first `n` entries have type `self`.
    pub fn extend_one(&self, p: &ClassPresentation) -> Result<Vec<TupleType>> {
        let mut out = Vec::new();
        for j in 0..self.support() {
            let mut labeling = self.labeling.clone();
            labeling.push(j);
            out.push(TupleType {
                labeling,
                carrier: self.carrier.clone(),
            });
        }
        let d = self.support();
        for carrier in p.one_point_extensions(&self.carrier)? {
            let mut labeling = self.labeling.clone();
            labeling.push(d);
            out.push(TupleType { labeling, carrier });
        }
        Ok(out)
    }
}

/// A type of arity `arity` determined by the requirement that restricting
/// along each `positions` list gives the paired type.
#[derive(Clone, Debug)]
pub struct Part<'a> {
    pub ty: &'a TupleType,
    pub positions: Vec<usize>,
}

/// Every type `t` of the given arity with `t.restrict(part.positions) ==
/// part.ty` for each part. Every coordinate must be covered by some part.
pub fn glue(p: &ClassPresentation, arity: usize, parts: &[Part<'_>]) -> Result<Vec<TupleType>> {
    let mut covered = vec![false; arity];
    for part in parts {
        debug_assert_eq!(part.ty.arity(), part.positions.len());
        for &x in &part.positions {
            covered[x] = true;
        }
    }
    assert!(covered.iter().all(|&c| c), "glue: uncovered coordinate");

    // union-find over coordinates for the forced equalities
    let mut parent: Vec<usize> = (0..arity).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for part in parts {
        let mut first_of: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &label) in part.ty.labeling().iter().enumerate() {
            let coord = part.positions[i];
            match first_of.get(&label) {
                Some(&c) => {
                    let (a, b) = (find(&mut parent, c), find(&mut parent, coord));
                    parent[a] = b;
                }
                None => {
                    first_of.insert(label, coord);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..arity).map(|x| find(&mut parent, x)).collect();
    for part in parts {
        for (i, &ci) in part.positions.iter().enumerate() {
            for (j, &cj) in part.positions.iter().enumerate() {
                let equal = part.ty.labeling()[i] == part.ty.labeling()[j];
                if equal != (roots[ci] == roots[cj]) {
                    return Ok(Vec::new());
                }
            }
        }
    }

    // classes, and which parts touch each class
    let mut classes: Vec<usize> = roots.clone();
    classes.sort_unstable();
    classes.dedup();
    let touches: Vec<Vec<bool>> = classes
        .iter()
        .map(|&r| {
            parts
                .iter()
                .map(|part| part.positions.iter().any(|&c| roots[c] == r))
                .collect()
        })
        .collect();

    // further identifications: merge classes that share no part
    let mut results = BTreeMap::new();
    let mut merge_of: Vec<usize> = (0..classes.len()).collect();
    identify(
        0,
        &touches,
        &mut merge_of,
        &mut |merge: &[usize]| -> Result<()> {
            // points are merged-class representatives in order
            let mut point_of_class = vec![usize::MAX; classes.len()];
            let mut npoints = 0;
            for c in 0..classes.len() {
                if merge[c] == c {
                    point_of_class[c] = npoints;
                    npoints += 1;
                }
            }
            for c in 0..classes.len() {
                point_of_class[c] = point_of_class[merge[c]];
            }
            let class_index = |coord: usize| classes.binary_search(&roots[coord]).expect("root");
            let coord_point: Vec<usize> = (0..arity)
                .map(|x| point_of_class[class_index(x)])
                .collect();
            let constraints: Vec<Constraint> = parts
                .iter()
                .map(|part| {
                    let mut pts = vec![usize::MAX; part.ty.support()];
                    for (i, &label) in part.ty.labeling().iter().enumerate() {
                        pts[label] = coord_point[part.positions[i]];
                    }
                    Constraint::new(pts, part.ty.carrier().clone())
                })
                .collect();
            for s in completions(p, npoints, &constraints, None)? {
                let t = TupleType::of_tuple(&s, &coord_point);
                results.insert(t.order_key(), t);
            }
            Ok(())
        },
    )?;
    Ok(results.into_values().collect())
}

/// Enumerates the ways to merge classes into earlier classes such that no
/// two merged classes are touched by a common part. `merge[c]` is the class
/// that `c` is merged into (itself if it stays separate).
fn identify(
    c: usize,
    touches: &[Vec<bool>],
    merge: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if c == touches.len() {
        return visit(merge);
    }
    merge[c] = c;
    identify(c + 1, touches, merge, visit)?;
    for target in 0..c {
        if merge[target] != target {
            continue;
        }
        // every class already merged into target, plus target, must share no
        // part with c
        let group_touch = |x: usize, part: usize| touches[x][part];
        let clash = (0..c)
            .filter(|&x| merge[x] == target)
            .any(|x| (0..touches[c].len()).any(|q| touches[c][q] && group_touch(x, q)));
        if clash {
            continue;
        }
        merge[c] = target;
        identify(c + 1, touches, merge, visit)?;
    }
    merge[c] = c;
    Ok(())
}
