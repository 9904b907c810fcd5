//! Finite sub-distributions over terms with an explicit residual mass.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::prob::{self, Prob};
use crate::syntax::{print_term, Term};

/// Weights are strictly positive; `residual` is mass that has not been
/// resolved (truncated tails, unexplored branches). Alpha-equivalent terms
/// share a key.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Dist {
    support: IndexMap<Term, Prob>,
    residual: Prob,
}

impl Dist {
    pub fn new() -> Dist {
        Dist::default()
    }

    pub fn dirac(t: Term) -> Dist {
        let mut d = Dist::new();
        d.add(t, prob::one());
        d
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Term, Prob)>, residual: Prob) -> Dist {
        let mut d = Dist::new();
        for (t, p) in pairs {
            d.add(t, p);
        }
        d.residual = residual;
        d
    }

    pub fn add(&mut self, t: Term, p: Prob) {
        if p.is_zero() {
            return;
        }
        debug_assert!(p.is_positive());
        *self.support.entry(t).or_default() += p;
    }

    pub fn add_residual(&mut self, p: &Prob) {
        self.residual += p;
    }

    pub fn get(&self, t: &Term) -> Prob {
        self.support.get(t).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Prob)> {
        self.support.iter()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn residual(&self) -> &Prob {
        &self.residual
    }

    /// Total weight of the support (residual excluded).
    pub fn norm(&self) -> Prob {
        self.support.values().sum()
    }

    pub fn total(&self) -> Prob {
        self.norm() + &self.residual
    }

    /// `∫ k(t) d(t)`; residuals add up, each scaled by the mass it came with.
    pub fn bind(&self, mut k: impl FnMut(&Term) -> Dist) -> Dist {
        self.try_bind(|t| Ok::<_, std::convert::Infallible>(k(t))).unwrap()
    }

    pub fn try_bind<E>(&self, mut k: impl FnMut(&Term) -> Result<Dist, E>) -> Result<Dist, E> {
        let mut out = Dist::new();
        out.residual = self.residual.clone();
        for (t, p) in &self.support {
            let d = k(t)?;
            for (u, q) in d.support {
                out.add(u, p * q);
            }
            out.residual += p * d.residual;
        }
        Ok(out)
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Dist {
        let mut out = Dist::new();
        out.residual = self.residual.clone();
        for (t, p) in &self.support {
            out.add(f(t), p.clone());
        }
        out
    }

    pub fn scale(&self, by: &Prob) -> Dist {
        let mut out = Dist::new();
        out.residual = &self.residual * by;
        for (t, p) in &self.support {
            out.add(t.clone(), p * by);
        }
        out
    }

    /// Merges `other` into `self` (weights and residual add).
    pub fn absorb(&mut self, other: Dist) {
        for (t, p) in other.support {
            self.add(t, p);
        }
        self.residual += other.residual;
    }

    pub fn supp_values(&self) -> Vec<Term> {
        self.support.keys().filter(|t| t.is_value()).cloned().collect()
    }

    pub fn supp_reducible(&self) -> Vec<Term> {
        self.support.keys().filter(|t| !t.is_value()).cloned().collect()
    }

    /// Weights of numeral outcomes.
    pub fn nat_weights(&self) -> BTreeMap<u64, Prob> {
        self.support.iter().filter_map(|(t, p)| t.as_nat().map(|n| (n, p.clone()))).collect()
    }

    /// Entries ordered by numeral value, then by printed form.
    pub fn sorted(&self) -> Vec<(Term, Prob)> {
        let mut v: Vec<(Option<u64>, String, Term, Prob)> =
            self.support.iter().map(|(t, p)| (t.as_nat(), print_term(t), t.clone(), p.clone())).collect();
        v.sort_by(|a, b| match (a.0, b.0) {
            (Some(x), Some(y)) => x.cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.1.cmp(&b.1),
        });
        v.into_iter().map(|(_, _, t, p)| (t, p)).collect()
    }

    pub fn to_json(&self) -> DistJson {
        DistJson {
            support: self
                .sorted()
                .into_iter()
                .map(|(t, p)| EntryJson { term: print_term(&t), nat: t.as_nat(), prob: prob::render(&p) })
                .collect(),
            residual: prob::render(&self.residual),
        }
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct EntryJson {
    pub term: String,
    pub nat: Option<u64>,
    pub prob: String,
}

#[derive(Serialize, Debug, Clone)]
pub struct DistJson {
    pub support: Vec<EntryJson>,
    pub residual: String,
}

fn abs_diff_sum(d1: &Dist, d2: &Dist) -> Prob {
    let mut s = Prob::zero();
    for (t, p) in d1.iter() {
        s += (p - d2.get(t)).abs();
    }
    for (t, q) in d2.iter() {
        if !d1.support.contains_key(t) {
            s += q;
        }
    }
    s
}

/// ½Σ|d1 − d2| + ½(r1 + r2): residual mass is treated as adversarial, so
/// this bounds the distance between the true distributions from above.
pub fn tv_distance(d1: &Dist, d2: &Dist) -> Prob {
    (abs_diff_sum(d1, d2) + &d1.residual + &d2.residual) / Prob::from_integer(2.into())
}

/// (lower, upper) bounds on the distance between any completions of `d1`
/// and `d2` that distribute their residuals.
pub fn tv_bounds(d1: &Dist, d2: &Dist) -> (Prob, Prob) {
    let half = prob::ratio(1, 2);
    let s = abs_diff_sum(d1, d2);
    let r = &d1.residual + &d2.residual;
    let lower = if s > r { (&s - &r) * &half } else { Prob::zero() };
    (lower, (s + r) * half)
}
