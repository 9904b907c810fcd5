//! Source-to-source constructions.

pub mod approx;
pub mod derand;
pub mod encode;
pub mod lift;
pub mod sugar;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::{elaborate, TNode, Term, TypeEnv, TypeError, Typed};

pub use approx::approximant;
pub use derand::{derandomize_lv, derandomize_mc};
pub use encode::{encode_choice, encode_fixran_via_rand, encode_rand_via_fixran, ChoiceTarget};
pub use lift::{finite_rep, lift_plus_to_t, FiniteRep};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("unsupported construct: {0}")]
    Fragment(String),
    #[error("expected a term of type {expected}, found {actual}")]
    Shape { expected: String, actual: String },
    #[error("this construction needs a bound function (h)")]
    MissingBound,
    #[error("term is not closed")]
    Open,
}

pub(crate) fn closed_typed(t: &Term) -> Result<Typed, TransformError> {
    if !t.is_closed() {
        return Err(TransformError::Open);
    }
    Ok(elaborate(&TypeEnv::new(), t)?)
}

/// Bottom-up rebuild of a typed tree; `f` sees each node together with its
/// already rebuilt children and may replace it.
pub(crate) fn rebuild(t: &Typed, f: &mut impl FnMut(&Typed, &[Term]) -> Option<Term>) -> Result<Term, TransformError> {
    let parts: Vec<Term> = match &t.node {
        TNode::Lam(_, _, b) => vec![rebuild(b, f)?],
        TNode::App(a, b) | TNode::Pair(a, b) | TNode::Choice(a, b) => vec![rebuild(a, f)?, rebuild(b, f)?],
        TNode::Var(_) | TNode::Num(_) | TNode::Const(_) => vec![],
    };
    if let Some(r) = f(t, &parts) {
        return Ok(r);
    }
    Ok(match (&t.node, parts.as_slice()) {
        (TNode::Var(x), _) => Term::var(x),
        (TNode::Num(n), _) => Term::num(*n),
        (TNode::Const(c), _) => c.term(),
        (TNode::Lam(x, ty, _), [b]) => Term::lam(x, ty.clone(), b.clone()),
        (TNode::App(..), [a, b]) => Term::app(a.clone(), b.clone()),
        (TNode::Pair(..), [a, b]) => Term::pair(a.clone(), b.clone()),
        (TNode::Choice(..), [a, b]) => Term::choice(a.clone(), b.clone()),
        _ => unreachable!(),
    })
}

/// The passes exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    OplusToRand,
    FixranToRand,
    OplusToFixran,
    RandToFixran,
    LiftPlus,
    FiniteRep,
    Approximant,
    DerandMc,
    DerandLv,
}

impl Pass {
    pub const ALL: [Pass; 9] = [
        Pass::OplusToRand,
        Pass::FixranToRand,
        Pass::OplusToFixran,
        Pass::RandToFixran,
        Pass::LiftPlus,
        Pass::FiniteRep,
        Pass::Approximant,
        Pass::DerandMc,
        Pass::DerandLv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pass::OplusToRand => "oplus-to-rand",
            Pass::FixranToRand => "fixran-to-rand",
            Pass::OplusToFixran => "oplus-to-fixran",
            Pass::RandToFixran => "rand-to-fixran",
            Pass::LiftPlus => "lift-plus",
            Pass::FiniteRep => "finite-rep",
            Pass::Approximant => "approximant",
            Pass::DerandMc => "derand-mc",
            Pass::DerandLv => "derand-lv",
        }
    }

    /// Runs the pass. `finite-rep` returns the pair `<F, Q>`; the
    /// derandomizers use `h` when the input contains `rand`.
    pub fn apply(self, t: &Term, h: Option<&Term>) -> Result<Term, TransformError> {
        match self {
            Pass::OplusToRand => encode_choice(t, ChoiceTarget::Rand),
            Pass::FixranToRand => encode_fixran_via_rand(t),
            Pass::OplusToFixran => encode_choice(t, ChoiceTarget::FixRan),
            Pass::RandToFixran => encode_rand_via_fixran(t),
            Pass::LiftPlus => lift_plus_to_t(t),
            Pass::FiniteRep => finite_rep(t).map(|r| Term::pair(r.f, r.q)),
            Pass::Approximant => approximant(t),
            Pass::DerandMc => derandomize_mc(t, h),
            Pass::DerandLv => derandomize_lv(t, h),
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = String;

    fn from_str(s: &str) -> Result<Pass, String> {
        Pass::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| format!("unknown pass `{s}`"))
    }
}
