use oligo_core::structure::{FinStructure, Signature};
use oligo_core::types::TupleType;

fn list(xs: &[usize], name: impl Fn(usize) -> String) -> String {
    xs.iter().map(|&x| name(x)).collect::<Vec<_>>().join(",")
}

/// `n points; R: (0,1) (1,2)`.
pub fn structure(sig: &Signature, s: &FinStructure) -> String {
    let mut out = format!("{} points", s.size());
    for (i, sym) in sig.symbols().iter().enumerate() {
        if s.relation(i).is_empty() {
            continue;
        }
        let tuples: Vec<String> = s.relation(i).iter().map(|t| format!("({})", list(t, |x| x.to_string()))).collect();
        out += &format!("; {}: {}", sym.name, tuples.join(" "));
    }
    out
}

/// `(x0,x1,x0) with R(x0,x1)`.
pub fn tuple_type(sig: &Signature, t: &TupleType) -> String {
    let point = |x: usize| format!("x{x}");
    let mut out = format!("({})", list(t.labeling(), point));
    let carrier = t.carrier();
    let mut facts = Vec::new();
    for (i, sym) in sig.symbols().iter().enumerate() {
        for tuple in carrier.relation(i) {
            facts.push(format!("{}({})", sym.name, list(tuple, point)));
        }
    }
    if !facts.is_empty() {
        out += &format!(" with {}", facts.join(" "));
    }
    out
}
