//! Call-by-value reduction, truncated exact evaluation, and sampling.

mod machine;
mod sample;
mod step;

use num_traits::Zero;
use thiserror::Error;

use crate::dist::Dist;
use crate::prob::{self, Prob};
use crate::syntax::Term;

pub(crate) use machine::{lockstep, worklist, Firing, Run};
pub use sample::{sample, sample_many};
pub(crate) use step::contract;
pub use step::{dist_step, step};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("stuck term `{0}` (ill-typed input?)")]
    Stuck(String),
    #[error("free variable `{0}` reached evaluation")]
    Open(String),
    #[error("srand can only be evaluated with registers")]
    SRandOutsideState,
    #[error("invalid budget: {0}")]
    Budget(String),
    #[error("trajectory exceeded {0} steps")]
    TrajectoryCap(u64),
    #[error("`{0}` is probabilistic")]
    NotDeterministic(String),
    #[error("no normal form within {0} steps")]
    Exhausted(u64),
}

/// When to stop a truncated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub max_steps: u64,
    /// stop once the unresolved mass is at most this
    pub epsilon: Prob,
    /// fixed number of `rand` outcomes per expansion; `None` picks one from
    /// `epsilon`
    pub rand_width: Option<u32>,
}

/// Width used when neither a width nor a positive epsilon is given.
pub const DEFAULT_RAND_WIDTH: u32 = 64;

impl Default for Budget {
    fn default() -> Self {
        Budget { max_steps: 1_000_000, epsilon: prob::half_pow(20), rand_width: None }
    }
}

impl Budget {
    pub fn steps(max_steps: u64) -> Budget {
        Budget { max_steps, ..Budget::default() }
    }

    pub fn with_epsilon(mut self, eps: Prob) -> Budget {
        self.epsilon = eps;
        self
    }

    pub fn with_rand_width(mut self, w: u32) -> Budget {
        self.rand_width = Some(w);
        self
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.max_steps == 0 {
            return Err(EvalError::Budget("max_steps must be at least 1".into()));
        }
        if self.epsilon < prob::zero() || self.epsilon >= prob::one() {
            return Err(EvalError::Budget("epsilon must lie in [0, 1)".into()));
        }
        if self.rand_width == Some(0) {
            return Err(EvalError::Budget("rand width must be at least 1".into()));
        }
        Ok(())
    }

    /// Outcomes per `rand` expansion: fixed if set, otherwise enough that
    /// the tail cut at each expansion is at most ε/2 of the mass reaching it.
    pub fn rand_width(&self) -> u32 {
        if let Some(w) = self.rand_width {
            return w;
        }
        if self.epsilon.is_zero() {
            return DEFAULT_RAND_WIDTH;
        }
        // smallest K with 2^-K ≤ ε/2
        let mut k = 1u32;
        while prob::half_pow(k as u64 - 1) > self.epsilon {
            k += 1;
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// every reducible branch steps once per round
    #[default]
    Lockstep,
    /// heaviest branch first
    Worklist,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    /// values reached, with the unresolved mass as residual
    pub value_dist: Dist,
    pub residual: Prob,
    pub steps_taken: u64,
    /// Σ depth · (mass first reaching a value at that depth)
    pub avlength_lower: Prob,
    pub per_depth_mass: Vec<(u64, Prob)>,
}

impl EvalResult {
    fn from_run(run: Run<()>) -> EvalResult {
        let avlength_lower = run.avlength();
        let mut value_dist = Dist::new();
        for ((v, ()), p) in run.values {
            value_dist.add(v, p);
        }
        // failure is impossible without registers
        value_dist.add_residual(&run.residual);
        EvalResult {
            value_dist,
            residual: run.residual,
            steps_taken: run.steps,
            avlength_lower,
            per_depth_mass: run.per_depth,
        }
    }
}

/// Evaluates a closed term until the residual is at most ε or the step
/// budget runs out. In lockstep mode `steps_taken` is the number of rounds;
/// in worklist mode it is the number of expansions.
pub fn evaluate(t: &Term, b: &Budget, mode: Mode) -> Result<EvalResult, EvalError> {
    b.validate()?;
    let width = b.rand_width();
    let fire = |r: &Term, regs: &(), _: &Prob| Ok(Firing::from_fired(contract(r, width)?, regs));
    let run = match mode {
        Mode::Lockstep => lockstep(t, (), b.max_steps, &b.epsilon, fire)?,
        Mode::Worklist => worklist(t, (), b.max_steps, &b.epsilon, fire)?,
    };
    Ok(EvalResult::from_run(run))
}

/// Bounds on the probability of reaching a value.
pub fn success(t: &Term, b: &Budget) -> Result<(Prob, Prob), EvalError> {
    let r = evaluate(t, b, Mode::Lockstep)?;
    let lo = r.value_dist.norm();
    let hi = &lo + &r.residual;
    Ok((lo, hi))
}

/// Lower bound on the average reduction length, and a hint that it is
/// still growing: mass remains and the second half of the observed window
/// contributed at least 1/2.
pub fn av_length(t: &Term, b: &Budget) -> Result<(Prob, bool), EvalError> {
    let r = evaluate(t, b, Mode::Lockstep)?;
    let half_way = r.steps_taken / 2;
    let late: Prob =
        r.per_depth_mass.iter().filter(|(d, _)| *d > half_way).map(|(d, m)| Prob::from_integer((*d).into()) * m).sum();
    let hint = !r.residual.is_zero() && late >= prob::ratio(1, 2);
    Ok((r.avlength_lower, hint))
}

/// Normal form of a term that never branches (plain System T).
pub fn normal_form(t: &Term, max_steps: u64) -> Result<Term, EvalError> {
    Ok(machine::run_deterministic(t, max_steps)?.0)
}

/// Like `normal_form`, also returning the number of steps.
pub fn normal_form_steps(t: &Term, max_steps: u64) -> Result<(Term, u64), EvalError> {
    machine::run_deterministic(t, max_steps)
}

/// Normal form read back as a numeral.
pub fn nat_normal_form(t: &Term, max_steps: u64) -> Result<u64, EvalError> {
    let v = normal_form(t, max_steps)?;
    v.as_nat().ok_or_else(|| EvalError::Stuck(crate::syntax::print_term(&v)))
}
