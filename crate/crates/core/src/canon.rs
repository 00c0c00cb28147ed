//! Canonical forms by partition refinement and individualization.
//!
//! The search refines an ordered vertex partition until it is equitable with
//! respect to tuple incidences, individualizes each vertex of the first
//! smallest non-singleton cell in turn, and keeps the lexicographically least
//! leaf encoding. Automorphisms found between leaves prune the search tree
//! (first-path abandonment plus orbit pruning).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::structure::FinStructure;

/// Isomorphism-invariant code of a (possibly vertex-colored) structure.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalCode(Vec<u32>);

impl CanonicalCode {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 2);
        for word in &self.0 {
            // most entries are tiny; a short varint-ish hex keeps codes readable
            s.push_str(&format!("{word:x}."));
        }
        s.pop();
        s
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({})", self.to_hex())
    }
}

pub fn canonical_form(s: &FinStructure) -> CanonicalCode {
    canonical_labeling(s, &vec![0; s.size()]).1
}

/// Canonical code of `s` where vertex `v` carries color `colors[v]`; only
/// color-preserving isomorphisms identify structures.
pub fn canonical_form_colored(s: &FinStructure, colors: &[u32]) -> CanonicalCode {
    canonical_labeling(s, colors).1
}

/// Returns the canonical labeling (`v` goes to `labeling[v]`) together with
/// the code of the relabelled structure.
pub fn canonical_labeling(s: &FinStructure, colors: &[u32]) -> (Vec<usize>, CanonicalCode) {
    assert_eq!(colors.len(), s.size());
    let incidence = Incidence::new(s);
    let mut search = Search {
        s,
        incidence: &incidence,
        init_colors: colors,
        best: None,
        first: None,
        generators: Vec::new(),
    };
    let start = rank_by(colors.len(), |v| (colors[v], 0u32));
    let start = search.refine(start);
    search.explore(start, &mut Vec::new());
    let (code, labeling) = search.best.expect("search visits at least one leaf");
    (labeling, CanonicalCode(code))
}

/// For each vertex: (symbol, tuple) incidences.
struct Incidence {
    by_point: Vec<Vec<(usize, Vec<usize>)>>,
}

impl Incidence {
    fn new(s: &FinStructure) -> Self {
        let mut by_point = vec![Vec::new(); s.size()];
        for sym in 0..s.num_symbols() {
            for t in s.relation(sym) {
                let mut seen: Vec<usize> = t.clone();
                seen.sort_unstable();
                seen.dedup();
                for &p in &seen {
                    by_point[p].push((sym, t.clone()));
                }
            }
        }
        Incidence { by_point }
    }
}

/// Dense ranks of vertices under a key function; ties share a rank.
fn rank_by<K: Ord + Clone>(n: usize, key: impl Fn(usize) -> K) -> Vec<u32> {
    let keys: Vec<K> = (0..n).map(&key).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("present") as u32)
        .collect()
}

fn cell_count(colors: &[u32]) -> usize {
    colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
}

struct Search<'a> {
    s: &'a FinStructure,
    incidence: &'a Incidence,
    init_colors: &'a [u32],
    best: Option<(Vec<u32>, Vec<usize>)>,
    first: Option<(Vec<u32>, Vec<usize>, Vec<usize>)>,
    generators: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let n = colors.len();
        loop {
            let before = cell_count(&colors);
            let sigs: Vec<Vec<(usize, u32, Vec<u32>)>> = (0..n)
                .map(|v| {
                    let mut sig: Vec<(usize, u32, Vec<u32>)> = self.incidence.by_point[v]
                        .iter()
                        .map(|(sym, t)| {
                            let mask = t
                                .iter()
                                .enumerate()
                                .filter(|&(_, &x)| x == v)
                                .fold(0u32, |m, (i, _)| m | (1 << i));
                            (*sym, mask, t.iter().map(|&x| colors[x]).collect())
                        })
                        .collect();
                    sig.sort_unstable();
                    sig
                })
                .collect();
            colors = rank_by(n, |v| (colors[v], sigs[v].clone()));
            if cell_count(&colors) == before {
                return colors;
            }
        }
    }

    fn encode(&self, labeling: &[usize]) -> Vec<u32> {
        let n = self.s.size();
        let mut code = Vec::with_capacity(2 + n + self.s.tuple_count() * 2);
        code.push(n as u32);
        let mut by_label = vec![0u32; n];
        for v in 0..n {
            by_label[labeling[v]] = self.init_colors[v];
        }
        code.extend(by_label);
        for sym in 0..self.s.num_symbols() {
            let mut ts: Vec<Vec<u32>> = self
                .s
                .relation(sym)
                .iter()
                .map(|t| t.iter().map(|&x| labeling[x] as u32).collect())
                .collect();
            ts.sort_unstable();
            code.push(ts.len() as u32);
            for t in ts {
                code.extend(t);
            }
        }
        code
    }

    /// Returns `Some(level)` when an automorphism shows that the subtree
    /// rooted at the current child of `level` is redundant.
    fn explore(&mut self, colors: Vec<u32>, path: &mut Vec<usize>) -> Option<usize> {
        let n = colors.len();
        // the first smallest non-singleton cell
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let target = (0..n)
            .filter(|&c| sizes[c] > 1)
            .min_by_key(|&c| (sizes[c], c));
        let Some(target) = target else {
            let labeling: Vec<usize> = colors.iter().map(|&c| c as usize).collect();
            let code = self.encode(&labeling);
            return self.visit_leaf(code, labeling, path);
        };
        let level = path.len();
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] as usize == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() && self.same_orbit(path, &explored, v) {
                continue;
            }
            let child = rank_by(n, |w| (colors[w], u32::from(w != v)));
            let child = self.refine(child);
            path.push(v);
            let abort = self.explore(child, path);
            path.pop();
            explored.push(v);
            match abort {
                Some(l) if l < level => return Some(l),
                _ => {}
            }
        }
        None
    }

    fn visit_leaf(
        &mut self,
        code: Vec<u32>,
        labeling: Vec<usize>,
        path: &[usize],
    ) -> Option<usize> {
        let mut abort = None;
        match &self.first {
            None => self.first = Some((code.clone(), labeling.clone(), path.to_vec())),
            Some((first_code, first_labeling, first_path)) => {
                if *first_code == code {
                    // gamma maps the first leaf onto this one, hence the
                    // first path onto the current path
                    let n = labeling.len();
                    let mut inverse = vec![0; n];
                    for (v, &l) in labeling.iter().enumerate() {
                        inverse[l] = v;
                    }
                    let gamma: Vec<usize> = (0..n).map(|v| inverse[first_labeling[v]]).collect();
                    abort = first_path.iter().zip(path).position(|(a, b)| a != b);
                    self.generators.push(gamma);
                }
            }
        }
        match &self.best {
            Some((best, _)) if *best <= code => {}
            _ => self.best = Some((code, labeling)),
        }
        abort
    }

    fn same_orbit(&self, path: &[usize], explored: &[usize], v: usize) -> bool {
        let n = self.s.size();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for g in &self.generators {
            if path.iter().all(|&p| g[p] == p) {
                for x in 0..n {
                    let (a, b) = (find(&mut parent, x), find(&mut parent, g[x]));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&u| find(&mut parent, u) == rv)
    }
}
