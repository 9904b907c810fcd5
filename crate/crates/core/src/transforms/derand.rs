//! Derandomizers: deterministic System T functions extracted from
//! randomized ones under a promise on their output distributions.
//!
//! *Monte-Carlo*: some output has probability > 1/2; return it.
//! *Las-Vegas*: outputs are 0 (no answer) or `S v`; return the v with
//! positive weight.
//!
//! Choice-only programs are handled exactly through their finite
//! representation. Programs using `rand` are first replaced by their
//! approximant at precision 2·h(m), where `h` is a caller-supplied bound:
//! for Monte-Carlo the majority must exceed 1/2 + 1/(2h(m)); for Las-Vegas
//! the answer must have probability above 1/h(m).

use super::approx::approximant;
use super::encode::encode_fixran_via_rand;
use super::lift::{lifted_call, support_bound, weight_of, Lifter};
use super::sugar::*;
use super::{closed_typed, TransformError};
use crate::syntax::{fresh_name, Term};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    MonteCarlo,
    LasVegas,
}

fn check_bound(h: &Term) -> Result<(), TransformError> {
    if !h.is_deterministic() {
        return Err(TransformError::Fragment("the bound h must be plain System T".into()));
    }
    let ty = closed_typed(h)?.ty;
    if ty != arr(nat(), nat()) {
        return Err(TransformError::Shape { expected: "Nat -> Nat".into(), actual: ty.to_string() });
    }
    Ok(())
}

/// `λm. (λp. rec⟨0, λk y. ite(test p k, k, y), Q p⟩) (call m)`, where
/// `test` is built from the weight table of `p`.
fn search(m: &str, call: Term, test: impl FnOnce(Term, Term) -> Term) -> Term {
    let body = lam("p", Lifter::COUNT.comp(&nat()), |p| {
        let step = lam("k", nat(), |k| lam("y", nat(), |y| ite_lazy(&nat(), test(p.clone(), k.clone()), k, y)));
        Term::rec_on(Term::num(0), step, ap(support_bound(), p))
    });
    Term::lam(m, nat(), ap(body, call))
}

fn derandomize(t: &Term, h: Option<&Term>, kind: Kind) -> Result<Term, TransformError> {
    let t = if t.has_fixran() { encode_fixran_via_rand(t)? } else { t.clone() };
    let ty = closed_typed(&t)?.ty;
    if ty != arr(nat(), nat()) {
        return Err(TransformError::Shape { expected: "Nat -> Nat".into(), actual: ty.to_string() });
    }
    let m = fresh_name("m");
    let mv = Term::var(&m);
    if !t.has_rand() {
        let call = lifted_call(&t, &[mv])?;
        return Ok(match kind {
            Kind::MonteCarlo => search(&m, call, |p, k| ap(sup_half(), ap2(weight_of(), p, k))),
            Kind::LasVegas => search(&m, call, |p, k| ap(sup_zero(), ap2(weight_of(), p, Term::s(k)))),
        });
    }
    let h = h.ok_or(TransformError::MissingBound)?;
    check_bound(h)?;
    let a = approximant(&t)?;
    let hm = ap(h.clone(), mv.clone());
    let precision = ap2(mul(), Term::num(2), hm.clone());
    let call = lifted_call(&a, &[mv, precision])?;
    Ok(match kind {
        Kind::MonteCarlo => search(&m, call, |p, k| ap(sup_half(), ap2(weight_of(), p, k))),
        Kind::LasVegas => search(&m, call, |p, k| ap(sup_half(), ap2(times_b(), hm, ap2(weight_of(), p, Term::s(k))))),
    })
}

/// Returns the majority outcome. `h` is needed only when `t` uses `rand`.
pub fn derandomize_mc(t: &Term, h: Option<&Term>) -> Result<Term, TransformError> {
    derandomize(t, h, Kind::MonteCarlo)
}

/// Returns v such that `S v` has positive (with `rand`: large enough)
/// weight, or 0 when there is none.
pub fn derandomize_lv(t: &Term, h: Option<&Term>) -> Result<Term, TransformError> {
    derandomize(t, h, Kind::LasVegas)
}
