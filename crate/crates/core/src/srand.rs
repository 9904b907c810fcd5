//! `srand`: a draw bounded by a register. In a configuration `(M, m, n)` it
//! returns k < m with probability 2^-(k+1), fails otherwise, and raises the
//! bound to m + n.

use indexmap::IndexMap;
use num_traits::{One, Zero};

use crate::dist::Dist;
use crate::eval::{contract, lockstep, Budget, EvalError, Firing};
use crate::prob::{self, Prob};
use crate::syntax::{Kind, Term};
use crate::transforms::TransformError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    pub term: Term,
    pub m: u64,
    pub n: u64,
}

impl Config {
    pub fn new(term: Term, m: u64, n: u64) -> Config {
        Config { term, m, n }
    }
}

/// Sub-distribution over configurations plus the mass lost to failed draws.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigDist {
    pub entries: IndexMap<Config, Prob>,
    pub failure: Prob,
}

impl ConfigDist {
    pub fn get(&self, c: &Config) -> Prob {
        self.entries.get(c).cloned().unwrap_or_default()
    }

    pub fn norm(&self) -> Prob {
        self.entries.values().sum()
    }

    /// Forgets the registers.
    pub fn erase(&self) -> Dist {
        let mut d = Dist::new();
        for (c, p) in &self.entries {
            d.add(c.term.clone(), p.clone());
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrandResult {
    /// final configurations (their terms are values)
    pub values: ConfigDist,
    pub failure: Prob,
    /// mass left unresolved by the step budget
    pub residual: Prob,
    pub steps_taken: u64,
}

impl SrandResult {
    pub fn success(&self) -> Prob {
        self.values.norm()
    }

    /// Value distribution with registers erased; failure and residual
    /// together form its residual.
    pub fn value_dist(&self) -> Dist {
        let mut d = self.values.erase();
        d.add_residual(&(&self.failure + &self.residual));
        d
    }
}

/// Replaces every `rand` by `srand`.
pub fn star(t: &Term) -> Result<Term, TransformError> {
    if t.has_fixran() {
        return Err(TransformError::Fragment("fixr cannot be starred; encode it with rand first".into()));
    }
    if t.has_srand() {
        return Err(TransformError::Fragment("term already contains srand".into()));
    }
    Ok(t.rewrite(&mut |u| match u.kind() {
        Kind::Rand => Some(Term::srand()),
        _ if !u.has_rand() => Some(u.clone()),
        _ => None,
    }))
}

/// Lockstep evaluation with registers. `srand` has finitely many outcomes,
/// so the only residual comes from the step budget (or from plain `rand`,
/// which is expanded as in `evaluate`).
pub fn eval_srand(c: &Config, b: &Budget) -> Result<SrandResult, EvalError> {
    b.validate()?;
    let width = b.rand_width();
    let fire = |r: &Term, regs: &(u64, u64), _: &Prob| -> Result<Firing<(u64, u64)>, EvalError> {
        match r.kind() {
            Kind::SRand => {
                let (m, n) = *regs;
                let next = (m + n, n);
                let outs = (0..m).map(|k| (Term::num(k), prob::half_pow(k + 1), next)).collect();
                Ok(Firing::Branch { outs, failure: prob::half_pow(m) })
            }
            _ => Ok(Firing::from_fired(contract(r, width)?, regs)),
        }
    };
    let run = lockstep(&c.term, (c.m, c.n), b.max_steps, &b.epsilon, fire)?;
    let mut values = ConfigDist::default();
    for ((v, (m, n)), p) in run.values {
        *values.entries.entry(Config { term: v, m, n }).or_default() += p;
    }
    values.failure = run.failure.clone();
    Ok(SrandResult { values, failure: run.failure, residual: run.residual, steps_taken: run.steps })
}

/// Π_{k<terms} (1 − 2^-(m+kn)): the first factors of the product bounding
/// the success of `(M*, m, n)`.
pub fn success_product_bound(m: u64, n: u64, terms: u64) -> Prob {
    (0..terms).fold(Prob::one(), |acc, k| acc * (Prob::one() - prob::half_pow(m + k * n)))
}

/// 1 − 1/n, the bound that `success_product_bound(n, n, _)` dominates.
pub fn simple_success_bound(n: u64) -> Prob {
    if n == 0 {
        return Prob::zero();
    }
    Prob::one() - prob::ratio(1, n as i64)
}
