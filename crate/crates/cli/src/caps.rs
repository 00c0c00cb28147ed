//! Resource caps: a flag wins over `OLIGO_<NAME>` in the environment, which
//! wins over the built-in default.

use std::collections::BTreeMap;

use clap::Args;

use oligo_core::algebraicity::{DEFAULT_MERGE_BOUND, DEFAULT_WITNESS_CAP};
use oligo_core::groupoid::{
    FragmentCaps, DEFAULT_CONFIGURATION_SIZE, DEFAULT_INTERSECTION_ARITY, DEFAULT_MAX_ELEMENTS,
};
use oligo_core::imaginaries::{Caps, DEFAULT_CONJUGATE_CAP, DEFAULT_EQUIVALENCE_CAP};
use oligo_core::normalizer::{DEFAULT_CERTIFICATE_DEPTH, DEFAULT_CONSISTENCY_BOUND};
use oligo_core::orbits::DEFAULT_COUNT_BOUND;
use oligo_core::{Error, Result};

#[derive(Args, Debug, Clone, Default)]
pub struct CapArgs {
    /// Saturation bound for realization counts
    #[arg(long, global = true)]
    pub count_bound: Option<usize>,
    /// Most subsets of pair orbits tried directly per equivalence search
    #[arg(long, global = true)]
    pub equivalence_cap: Option<usize>,
    /// Conjugates tried when testing almost essentiality
    #[arg(long, global = true)]
    pub conjugate_cap: Option<usize>,
    /// Realizability depth bound for orbit relabelings
    #[arg(long, global = true)]
    pub consistency_bound: Option<usize>,
    /// Chain length of realizability certificates
    #[arg(long, global = true)]
    pub certificate_depth: Option<usize>,
    /// Age bound of merged presentations
    #[arg(long, global = true)]
    pub merge_bound: Option<usize>,
    /// Largest parameter set tried by the algebraicity witness search
    #[arg(long, global = true)]
    pub witness_cap: Option<usize>,
    /// Most elements in a coset fragment
    #[arg(long, global = true)]
    pub max_elements: Option<usize>,
    /// Largest k with a tabulated I_k relation
    #[arg(long, global = true)]
    pub intersection_arity: Option<usize>,
    /// Largest configuration used by fingerprints
    #[arg(long, global = true)]
    pub configuration_size: Option<usize>,
}

/// Caps resolved so far, in the order they were asked for.
#[derive(Debug, Clone)]
pub struct Resolver {
    args: CapArgs,
    used: BTreeMap<String, usize>,
}

impl Resolver {
    pub fn new(args: CapArgs) -> Resolver {
        Resolver {
            args,
            used: BTreeMap::new(),
        }
    }

    pub fn get(&mut self, name: &str) -> Result<usize> {
        let (flag, default) = match name {
            "count_bound" => (self.args.count_bound, DEFAULT_COUNT_BOUND),
            "equivalence_cap" => (self.args.equivalence_cap, DEFAULT_EQUIVALENCE_CAP),
            "conjugate_cap" => (self.args.conjugate_cap, DEFAULT_CONJUGATE_CAP),
            "consistency_bound" => (self.args.consistency_bound, DEFAULT_CONSISTENCY_BOUND),
            "certificate_depth" => (self.args.certificate_depth, DEFAULT_CERTIFICATE_DEPTH),
            "merge_bound" => (self.args.merge_bound, DEFAULT_MERGE_BOUND),
            "witness_cap" => (self.args.witness_cap, DEFAULT_WITNESS_CAP),
            "max_elements" => (self.args.max_elements, DEFAULT_MAX_ELEMENTS),
            "intersection_arity" => (self.args.intersection_arity, DEFAULT_INTERSECTION_ARITY),
            "configuration_size" => (self.args.configuration_size, DEFAULT_CONFIGURATION_SIZE),
            _ => return Err(Error::Invalid(format!("unknown cap `{name}`"))),
        };
        let value = match flag {
            Some(v) => v,
            None => from_env(name)?.unwrap_or(default),
        };
        self.used.insert(name.to_string(), value);
        Ok(value)
    }

    pub fn imaginaries(&mut self, arity: usize) -> Result<Caps> {
        Ok(Caps {
            count_bound: self.get("count_bound")?,
            equivalence_cap: self.get("equivalence_cap")?,
            arity,
            conjugates: self.get("conjugate_cap")?,
        })
    }

    pub fn fragment(&mut self, arity: usize) -> Result<FragmentCaps> {
        Ok(FragmentCaps {
            intersection_arity: self.get("intersection_arity")?,
            max_elements: self.get("max_elements")?,
            configuration_size: self.get("configuration_size")?,
            count_bound: self.get("count_bound")?,
            imaginaries: self.imaginaries(arity)?,
        })
    }

    pub fn used(&self) -> BTreeMap<String, usize> {
        self.used.clone()
    }
}

pub fn env_name(cap: &str) -> String {
    format!("OLIGO_{}", cap.to_uppercase())
}

fn from_env(cap: &str) -> Result<Option<usize>> {
    let var = env_name(cap);
    match std::env::var(&var) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Invalid(format!("{var}={s:?} is not a nonnegative integer"))),
        Err(_) => Ok(None),
    }
}
