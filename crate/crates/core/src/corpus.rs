//! The presentations shipped in the repository's `corpus/` directory.

use crate::format::parse_presentation;
use crate::presentation::ClassPresentation;

const FILES: [(&str, &str); 11] = [
    ("pure_set", include_str!("../../../corpus/pure_set")),
    ("pure_set_redundant", include_str!("../../../corpus/pure_set_redundant")),
    ("dlo", include_str!("../../../corpus/dlo")),
    ("dlo_reversed", include_str!("../../../corpus/dlo_reversed")),
    ("random_graph", include_str!("../../../corpus/random_graph")),
    ("cycle_k2", include_str!("../../../corpus/cycle_k2")),
    ("cycle_k3", include_str!("../../../corpus/cycle_k3")),
    ("two_sorted_set", include_str!("../../../corpus/two_sorted_set")),
    ("three_sorted_set", include_str!("../../../corpus/three_sorted_set")),
    ("two_classes", include_str!("../../../corpus/two_classes")),
    ("colored_dlo", include_str!("../../../corpus/colored_dlo")),
];

/// Names of every shipped presentation.
pub fn names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

pub fn by_name(name: &str) -> Option<ClassPresentation> {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_presentation(text).expect("shipped corpus file parses"))
}

fn get(name: &str) -> ClassPresentation {
    by_name(name).expect("known corpus name")
}

pub fn pure_set() -> ClassPresentation {
    get("pure_set")
}

pub fn pure_set_redundant() -> ClassPresentation {
    get("pure_set_redundant")
}

pub fn dlo() -> ClassPresentation {
    get("dlo")
}

pub fn dlo_reversed() -> ClassPresentation {
    get("dlo_reversed")
}

pub fn random_graph() -> ClassPresentation {
    get("random_graph")
}

/// The graph of a permutation whose cycles all have length `k` (2 or 3).
pub fn cycle(k: usize) -> ClassPresentation {
    match k {
        2 => get("cycle_k2"),
        3 => get("cycle_k3"),
        _ => panic!("only cycle lengths 2 and 3 are shipped"),
    }
}

pub fn two_sorted_set() -> ClassPresentation {
    get("two_sorted_set")
}

pub fn three_sorted_set() -> ClassPresentation {
    get("three_sorted_set")
}

pub fn two_classes() -> ClassPresentation {
    get("two_classes")
}

pub fn colored_dlo() -> ClassPresentation {
    get("colored_dlo")
}
