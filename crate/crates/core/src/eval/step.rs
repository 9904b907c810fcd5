//! One-step reduction, following the rules literally on whole terms.

use std::sync::OnceLock;

use super::EvalError;
use crate::dist::Dist;
use crate::prob::{self, Prob};
use crate::syntax::{Kind, Term};

pub(crate) fn half() -> &'static Prob {
    static H: OnceLock<Prob> = OnceLock::new();
    H.get_or_init(|| prob::ratio(1, 2))
}

/// Result of contracting a redex.
pub(crate) enum Fired {
    Det(Term),
    /// weighted outcomes and the truncated tail
    Branch(Vec<(Term, Prob)>, Prob),
}

/// Contracts a redex: an application of a value to a value, a choice,
/// `rand`, or `srand` (which only the register semantics can contract).
pub(crate) fn contract(redex: &Term, rand_width: u32) -> Result<Fired, EvalError> {
    match redex.kind() {
        Kind::Choice(l, r) => {
            Ok(Fired::Branch(vec![(l.clone(), half().clone()), (r.clone(), half().clone())], prob::zero()))
        }
        Kind::Rand => {
            let outs = (0..rand_width as u64).map(|k| (Term::num(k), prob::half_pow(k + 1))).collect();
            Ok(Fired::Branch(outs, prob::half_pow(rand_width as u64)))
        }
        Kind::SRand => Err(EvalError::SRandOutsideState),
        Kind::App(f, a) => match (f.kind(), a.kind()) {
            (Kind::Lam(_, _, body), _) => Ok(Fired::Det(body.open(a))),
            (Kind::Proj1, Kind::Pair(x, _)) => Ok(Fired::Det(x.clone())),
            (Kind::Proj2, Kind::Pair(_, y)) => Ok(Fired::Det(y.clone())),
            (Kind::Rec, Kind::Pair(u, rest)) => match rest.kind() {
                Kind::Pair(v, n) => match n.kind() {
                    Kind::Num(0) => Ok(Fired::Det(u.clone())),
                    Kind::Num(k) => {
                        let pred = Term::num(k - 1);
                        let again = Term::rec_on(u.clone(), v.clone(), pred.clone());
                        Ok(Fired::Det(Term::app(Term::app(v.clone(), pred), again)))
                    }
                    _ => Err(stuck(redex)),
                },
                _ => Err(stuck(redex)),
            },
            (Kind::FixRan, Kind::Pair(v, w)) => {
                let unfold = Term::app(v.clone(), redex.clone());
                Ok(Fired::Branch(vec![(unfold, half().clone()), (w.clone(), half().clone())], prob::zero()))
            }
            _ => Err(stuck(redex)),
        },
        Kind::Free(x) => Err(EvalError::Open(x.to_string())),
        _ => Err(stuck(redex)),
    }
}

pub(crate) fn stuck(t: &Term) -> EvalError {
    EvalError::Stuck(crate::syntax::print_term(t))
}

/// One reduction step of a closed term. Values are returned as Diracs;
/// `rand` is expanded to `rand_width` outcomes, its tail becoming residual.
pub fn step(t: &Term, rand_width: u32) -> Result<Dist, EvalError> {
    if t.is_value() {
        return Ok(Dist::dirac(t.clone()));
    }
    match t.kind() {
        Kind::App(f, a) => {
            if !a.is_value() {
                // argument first
                Ok(step(a, rand_width)?.map_terms(|a2| Term::app(f.clone(), a2.clone())))
            } else if !f.is_value() {
                Ok(step(f, rand_width)?.map_terms(|f2| Term::app(f2.clone(), a.clone())))
            } else {
                fired_to_dist(contract(t, rand_width)?)
            }
        }
        Kind::Pair(l, r) => {
            if !l.is_value() {
                Ok(step(l, rand_width)?.map_terms(|l2| Term::pair(l2.clone(), r.clone())))
            } else {
                Ok(step(r, rand_width)?.map_terms(|r2| Term::pair(l.clone(), r2.clone())))
            }
        }
        _ => fired_to_dist(contract(t, rand_width)?),
    }
}

fn fired_to_dist(f: Fired) -> Result<Dist, EvalError> {
    Ok(match f {
        Fired::Det(t) => Dist::dirac(t),
        Fired::Branch(outs, tail) => Dist::from_pairs(outs, tail),
    })
}

/// The lifted relation: values stay put, reducible terms step.
pub fn dist_step(d: &Dist, rand_width: u32) -> Result<Dist, EvalError> {
    d.try_bind(|t| step(t, rand_width))
}
