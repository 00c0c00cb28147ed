//! Completing partially specified structures inside the age.
//!
//! A completion problem fixes the induced structure on some blocks of points
//! and leaves every tuple that is not inside a single block free. Points are
//! added one at a time; the free tuples joining a new point `p` to the older
//! points are decided in groups (first the tuples on `p` alone, then those
//! whose largest older entry is `q` for `q = 0, 1, ...`), and after each group
//! the structure induced on `{0..=q, p}` is checked against the presentation.

use crate::error::Result;
use crate::presentation::{Admission, ClassPresentation};
use crate::structure::{FinStructure, Tuple};

#[derive(Clone, Debug)]
pub(crate) struct Constraint {
    points: Vec<usize>,
    structure: FinStructure,
}

impl Constraint {
    pub(crate) fn new(points: Vec<usize>, structure: FinStructure) -> Self {
        debug_assert_eq!(points.len(), structure.size());
        Constraint { points, structure }
    }
}

/// Every age member on `size` points that induces `c.structure` on
/// `c.points` for each constraint `c`, up to `limit` results.
pub(crate) fn completions(
    p: &ClassPresentation,
    size: usize,
    constraints: &[Constraint],
    limit: Option<usize>,
) -> Result<Vec<FinStructure>> {
    let limit = limit.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    for_each_completion(p, size, constraints, &mut |s| {
        out.push(s.clone());
        out.len() < limit
    })?;
    Ok(out)
}

/// Calls `visit` on each completion in turn until it returns `false`.
pub(crate) fn for_each_completion(
    p: &ClassPresentation,
    size: usize,
    constraints: &[Constraint],
    visit: &mut dyn FnMut(&FinStructure) -> bool,
) -> Result<()> {
    p.check_size(size)?;
    let arities = p.signature().arities();
    let mut fixed = FinStructure::with_arities(arities.clone(), size);
    let mut masks = Vec::with_capacity(constraints.len());
    for c in constraints {
        let mut mask = vec![false; size];
        for &q in &c.points {
            mask[q] = true;
        }
        masks.push(mask);
        for sym in 0..arities.len() {
            for t in c.structure.relation(sym) {
                fixed.insert(sym, t.iter().map(|&x| c.points[x]).collect());
            }
        }
    }
    for c in constraints {
        if fixed.induced(&c.points) != c.structure {
            return Ok(());
        }
    }
    let decided = |t: &[usize]| masks.iter().any(|m| t.iter().all(|&x| m[x]));

    let mut groups = Vec::new();
    for point in 0..size {
        for q in std::iter::once(None).chain((0..point).map(Some)) {
            let mut allowed = vec![false; size];
            allowed[point] = true;
            let mut local: Vec<usize> = Vec::new();
            if let Some(q) = q {
                for (x, a) in allowed.iter_mut().enumerate().take(q + 1) {
                    *a = true;
                    local.push(x);
                }
            }
            local.push(point);
            let mut free = Vec::new();
            for (sym, &arity) in arities.iter().enumerate() {
                for t in tuples_over(&local, arity) {
                    let hits_point = t.contains(&point);
                    let right_group = match q {
                        None => t.iter().all(|&x| x == point),
                        Some(q) => hits_point && t.contains(&q),
                    };
                    if right_group && !decided(&t) {
                        free.push((sym, t));
                    }
                }
            }
            groups.push(Group {
                point,
                allowed,
                free,
            });
        }
    }

    let mut run = Run {
        presentation: p,
        groups: &groups,
        visit,
        stopped: false,
    };
    run.step(0, &mut fixed);
    Ok(())
}

struct Group {
    point: usize,
    allowed: Vec<bool>,
    free: Vec<(usize, Tuple)>,
}

struct Run<'a> {
    presentation: &'a ClassPresentation,
    groups: &'a [Group],
    visit: &'a mut dyn FnMut(&FinStructure) -> bool,
    stopped: bool,
}

impl Run<'_> {
    fn step(&mut self, g: usize, s: &mut FinStructure) {
        if self.stopped {
            return;
        }
        let Some(group) = self.groups.get(g) else {
            self.stopped = !(self.visit)(s);
            return;
        };
        let f = group.free.len();
        assert!(f < 32, "too many free tuples in one completion step");
        for mask in 0u64..(1u64 << f) {
            for (i, (sym, t)) in group.free.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s.insert(*sym, t.clone());
                } else {
                    s.remove(*sym, t);
                }
            }
            let verdict = self
                .presentation
                .admits_within(s, &group.allowed, Some(group.point));
            if verdict == Admission::Admitted {
                self.step(g + 1, s);
                if self.stopped {
                    break;
                }
            }
        }
        for (sym, t) in &group.free {
            s.remove(*sym, t);
        }
    }
}

/// All tuples of the given arity with entries from `points`.
pub(crate) fn tuples_over(points: &[usize], arity: usize) -> Vec<Tuple> {
    let mut out = vec![Vec::with_capacity(arity)];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                points.iter().map(move |&x| {
                    let mut t2 = t.clone();
                    t2.push(x);
                    t2
                })
            })
            .collect();
    }
    out
}
