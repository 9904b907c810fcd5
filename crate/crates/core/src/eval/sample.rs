//! Monte-Carlo trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::machine::trajectory;
use super::EvalError;
use crate::dist::Dist;
use crate::prob::{self, Prob};
use crate::syntax::{Kind, Term};

/// Per-trajectory step cap.
pub const TRAJECTORY_CAP: u64 = 1_000_000;

fn run_one(t: &Term, rng: &mut ChaCha8Rng, cap: u64) -> Result<Option<Term>, EvalError> {
    let choose = |redex: &Term| -> Option<Term> {
        match redex.kind() {
            Kind::Choice(l, r) => Some(if rng.gen::<bool>() { l.clone() } else { r.clone() }),
            Kind::Rand => {
                // exact geometric: count heads before the first tail
                let mut k = 0u64;
                while rng.gen::<bool>() {
                    k += 1;
                }
                Some(Term::num(k))
            }
            Kind::App(f, a) if matches!(f.kind(), Kind::FixRan) => match a.kind() {
                Kind::Pair(v, w) => {
                    Some(if rng.gen::<bool>() { Term::app(v.clone(), redex.clone()) } else { w.clone() })
                }
                _ => None,
            },
            _ => None,
        }
    };
    Ok(trajectory(t, cap, choose)?.map(|(v, _)| v))
}

/// One trajectory with its own stream seeded by `seed`.
pub fn sample(t: &Term, seed: u64) -> Result<Term, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_one(t, &mut rng, TRAJECTORY_CAP)?.ok_or(EvalError::TrajectoryCap(TRAJECTORY_CAP))
}

/// Empirical distribution of `trials` trajectories drawn from one stream.
/// Trials that hit the step cap are counted in the residual.
pub fn sample_many(t: &Term, seed: u64, trials: u64) -> Result<Dist, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Dist::new();
    if trials == 0 {
        return Ok(d);
    }
    let w: Prob = prob::ratio(1, trials as i64);
    let mut capped = 0i64;
    for _ in 0..trials {
        match run_one(t, &mut rng, TRAJECTORY_CAP)? {
            Some(v) => d.add(v, w.clone()),
            None => capped += 1,
        }
    }
    d.add_residual(&(&w * Prob::from_integer(capped.into())));
    Ok(d)
}
