//! Uniform approximants: a `rand` program turned into a choice-only
//! program whose output distribution is within 1/p of the original, where
//! p is an extra precision argument.
//!
//! `rand` is first replaced by `srand`, and the program is run in the state
//! monad with registers ⟨p, p⟩. A failed draw sets the error flag, which
//! collapses the final outcome to 0; every other outcome keeps exactly the
//! weight it has under the register semantics.

use super::lift::{st, Lifter};
use super::sugar::*;
use super::{closed_typed, TransformError};
use crate::srand::star;
use crate::syntax::{fresh_name, Term, Type};

/// `λr. rec⟨π1 r, λ_ _. 0, π1 (π2 r)⟩`: the outcome if the flag is clear.
fn finish() -> Term {
    lam("r", prod(nat(), st()), |r| {
        Term::rec_on(Term::p1(r.clone()), konst(nat(), konst(nat(), Term::num(0))), Term::p1(Term::p2(r)))
    })
}

fn initial(p: Term) -> Term {
    Term::pair(Term::num(0), Term::pair(p.clone(), p))
}

/// For `t : N`, a term of type `N → N` taking the precision. For
/// `t : N → N`, a term of type `N → N → N` taking the input, then the
/// precision.
pub fn approximant(t: &Term) -> Result<Term, TransformError> {
    if t.has_fixran() {
        return Err(TransformError::Fragment("encode fixr with rand before approximating".into()));
    }
    let starred = star(t)?;
    let typed = closed_typed(&starred)?;
    let l = Lifter::STATE;
    let lifted = l.comp_of(&typed)?;
    let run = |comp: Term| lam("p", nat(), |p| ap(finish(), ap(comp, initial(p))));
    if typed.ty == nat() {
        Ok(run(lifted))
    } else if typed.ty == arr(nat(), nat()) {
        let i = fresh_name("i");
        let (call, _) = l.apply(lifted, &typed.ty, &[Term::var(&i)]);
        Ok(Term::lam(&i, nat(), run(call)))
    } else {
        Err(TransformError::Shape { expected: "Nat or Nat -> Nat".into(), actual: typed.ty.to_string() })
    }
}

/// The type of `approximant(t)` for `t : ty`.
pub fn approximant_type(ty: &Type) -> Option<Type> {
    if *ty == nat() {
        Some(arr(nat(), nat()))
    } else if *ty == arr(nat(), nat()) {
        Some(Type::arrows(&[nat(), nat()], nat()))
    } else {
        None
    }
}
