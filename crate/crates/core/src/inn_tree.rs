//! Finite-depth test of whether a fragment automorphism `Φ` can be inner.
//!
//! Conjugation by `g` sends `A = [α₀, α₁]` to `B·A·C⁻¹` with
//! `B = [gα₀, α₀]` and `C = [gα₁, α₁]`, and `g` lies in every such `B` and
//! `C`. A node of depth `n` is a choice of `(B_i, C_i)` for the first `n`
//! elements `A_i` meeting these equations, with all the `B_i` and `C_i`
//! sharing an automorphism. An empty level proves that `Φ` is not inner.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::CgFragment;
use crate::presentation::ClassPresentation;
use crate::structure::embeddings;
use crate::types::TupleType;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentAutomorphism {
    pub images: Vec<usize>,
}

impl FragmentAutomorphism {
    pub fn identity(f: &CgFragment) -> FragmentAutomorphism {
        FragmentAutomorphism {
            images: (0..f.len()).collect(),
        }
    }

    /// A permutation of the elements, checked to preserve domains,
    /// codomains, products and the tabulated intersections.
    pub fn new(f: &CgFragment, images: Vec<usize>) -> Result<FragmentAutomorphism> {
        let a = FragmentAutomorphism::unchecked(f, images)?;
        if let Some(reason) = a.violation(f) {
            return Err(Error::InvalidAutomorphism(reason));
        }
        Ok(a)
    }

    /// A permutation of the elements, not checked to preserve structure.
    pub fn unchecked(f: &CgFragment, images: Vec<usize>) -> Result<FragmentAutomorphism> {
        let n = f.len();
        let mut seen = vec![false; n];
        if images.len() != n {
            return Err(Error::InvalidAutomorphism(format!("expected {n} images, got {}", images.len())));
        }
        for &x in &images {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidAutomorphism("images are not a permutation".into()));
            }
        }
        Ok(FragmentAutomorphism { images })
    }

    /// The automorphism induced by an automorphism `g` of the frame,
    /// given as the image of each frame point.
    pub fn induced(f: &CgFragment, g: &[usize]) -> Result<FragmentAutomorphism> {
        if !f.frame.is_embedding_into(&f.frame, g) {
            return Err(Error::InvalidAutomorphism("not an automorphism of the frame".into()));
        }
        let moved: Vec<usize> = f
            .imaginaries
            .iter()
            .map(|a| {
                let image: Vec<usize> = a.tuple.iter().map(|&x| g[x]).collect();
                f.imaginaries
                    .iter()
                    .position(|b| {
                        b.sort == a.sort
                            && a.sort.relates(&TupleType::of_tuple(&f.frame, &[b.tuple.clone(), image.clone()].concat()))
                    })
                    .expect("frame automorphisms permute imaginaries")
            })
            .collect();
        let images = f
            .elements
            .iter()
            .map(|e| f.element_of(moved[e.left], moved[e.right]).expect("image coset present"))
            .collect();
        FragmentAutomorphism::new(f, images)
    }

    pub fn apply(&self, a: usize) -> usize {
        self.images[a]
    }

    /// The first structure this permutation fails to preserve.
    pub fn violation(&self, f: &CgFragment) -> Option<String> {
        let phi = &self.images;
        for a in 0..f.len() {
            if f.identities[f.dom(phi[a])] != phi[f.identities[f.dom(a)]] {
                return Some(format!("domain of element {a} not preserved"));
            }
            if f.identities[f.cod(phi[a])] != phi[f.identities[f.cod(a)]] {
                return Some(format!("codomain of element {a} not preserved"));
            }
            for b in 0..f.len() {
                if f.mul(phi[a], phi[b]) != f.mul(a, b).map(|c| phi[c]) {
                    return Some(format!("product of elements {a} and {b} not preserved"));
                }
            }
        }
        for (j, table) in f.intersections.iter().enumerate() {
            let count = table
                .iter()
                .filter(|set| {
                    let mut image: Vec<usize> = set.iter().map(|&x| phi[x]).collect();
                    image.sort_unstable();
                    table.binary_search(&image).is_ok()
                })
                .count();
            if count != table.len() {
                return Some(format!("I_{} not preserved", j + 2));
            }
        }
        None
    }
}

/// All automorphisms of the frame, as point maps.
pub fn frame_automorphisms(f: &CgFragment) -> Vec<Vec<usize>> {
    embeddings(&f.frame, &f.frame)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeLevel {
    pub depth: usize,
    /// Each node lists `(B_i, C_i)` for `i < depth`.
    pub nodes: Vec<Vec<(usize, usize)>>,
    /// Candidates dropped because a product fell outside the fragment.
    pub pruned_external: usize,
}

impl TreeLevel {
    pub fn root() -> TreeLevel {
        TreeLevel {
            depth: 0,
            nodes: vec![Vec::new()],
            pruned_external: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Extends every node of `level` by the choices for the next element, whose
/// image is `image`.
pub fn next_level(p: &ClassPresentation, f: &CgFragment, level: &TreeLevel, image: usize) -> Result<TreeLevel> {
    let i = level.depth;
    if i >= f.len() {
        return Err(Error::CapExceeded(format!("the fragment has only {} elements", f.len())));
    }
    let mut pruned = 0;
    let mut steps = Vec::new();
    for b in 0..f.len() {
        if f.cod(b) != f.dom(i) || f.dom(b) != f.dom(image) {
            continue;
        }
        let Some(ba) = f.mul(b, i) else {
            pruned += 1;
            continue;
        };
        for c in 0..f.len() {
            if f.cod(c) != f.cod(i) || f.dom(c) != f.cod(image) {
                continue;
            }
            match f.mul(ba, f.inverse(c)) {
                Some(x) if x == image => steps.push((b, c)),
                Some(_) => {}
                None => pruned += 1,
            }
        }
    }
    let mut nodes = Vec::new();
    for node in &level.nodes {
        for &(b, c) in &steps {
            let mut all: Vec<usize> = node.iter().flat_map(|&(x, y)| [x, y]).collect();
            all.extend([b, c]);
            if f.intersects(p, &all)? {
                let mut next = node.clone();
                next.push((b, c));
                nodes.push(next);
            }
        }
    }
    Ok(TreeLevel {
        depth: i + 1,
        nodes,
        pruned_external: level.pruned_external + pruned,
    })
}

/// The level of depth `images.len()`, given the images of the first
/// elements only.
pub fn build_level(p: &ClassPresentation, f: &CgFragment, images: &[usize]) -> Result<TreeLevel> {
    let mut level = TreeLevel::root();
    for &image in images {
        level = next_level(p, f, &level, image)?;
    }
    Ok(level)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerConsistency {
    /// Every level up to this depth is nonempty.
    Consistent(usize),
    /// This level is empty: not inner.
    RefutedAt(usize),
}

pub fn inner_consistent_to_depth(
    p: &ClassPresentation,
    f: &CgFragment,
    phi: &FragmentAutomorphism,
    depth: usize,
) -> Result<InnerConsistency> {
    if depth > f.len() {
        return Err(Error::CapExceeded(format!(
            "depth {depth} exceeds the {} fragment elements",
            f.len()
        )));
    }
    let mut level = TreeLevel::root();
    for n in 0..depth {
        level = next_level(p, f, &level, phi.apply(n))?;
        if level.is_empty() {
            return Ok(InnerConsistency::RefutedAt(n + 1));
        }
    }
    Ok(InnerConsistency::Consistent(depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::groupoid::{build_cg_fragment, FragmentCaps, Policy};
    use crate::structure::FinStructure;

    #[test]
    fn identity_is_consistent() {
        let p = corpus::pure_set();
        let frame = FinStructure::empty(p.signature(), 3);
        let f = build_cg_fragment(&p, Policy::PointStabilizers, &frame, &FragmentCaps::default()).unwrap();
        let id = FragmentAutomorphism::identity(&f);
        assert_eq!(
            inner_consistent_to_depth(&p, &f, &id, 8).unwrap(),
            InnerConsistency::Consistent(8)
        );
        let level = build_level(&p, &f, &id.images[..1]).unwrap();
        assert!(level.nodes.contains(&vec![(0, 0)]));
    }

    #[test]
    fn swapping_sorts_is_not_inner() {
        let p = corpus::two_sorted_set();
        let frame = FinStructure::from_tuples(p.signature(), 2, [(0, vec![0])]).unwrap();
        let f = build_cg_fragment(&p, Policy::PointStabilizers, &frame, &FragmentCaps::default()).unwrap();
        assert_eq!(f.len(), 2);
        let swap = FragmentAutomorphism::new(&f, vec![1, 0]).unwrap();
        assert_eq!(
            inner_consistent_to_depth(&p, &f, &swap, 2).unwrap(),
            InnerConsistency::RefutedAt(1)
        );
    }

    #[test]
    fn unchecked_rejects_non_permutations() {
        let p = corpus::pure_set();
        let frame = FinStructure::empty(p.signature(), 2);
        let f = build_cg_fragment(&p, Policy::PointStabilizers, &frame, &FragmentCaps::default()).unwrap();
        assert!(FragmentAutomorphism::unchecked(&f, vec![0, 0, 1, 2]).is_err());
        assert!(FragmentAutomorphism::new(&f, vec![1, 0, 2, 3]).is_err());
    }
}
