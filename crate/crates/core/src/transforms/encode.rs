//! Encodings between the probabilistic constants.

use super::sugar::{arr, konst, lam, nat, prod};
use super::{closed_typed, rebuild, TransformError};
use crate::syntax::{Const, TNode, Term, Type};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiceTarget {
    Rand,
    FixRan,
}

/// `M ⊕ N` as `rec⟨λz.N, λx y z.M, rand⟩ 0`.
pub fn choice_via_rand(ty: &Type, m: Term, n: Term) -> Term {
    let base = konst(nat(), n);
    let step = konst(nat(), konst(arr(nat(), ty.clone()), konst(nat(), m)));
    Term::app(Term::rec_on(base, step, Term::rand()), Term::num(0))
}

/// `M ⊕ N` as `fixr⟨λx y.M, λy.N⟩ 0`.
pub fn choice_via_fixran(ty: &Type, m: Term, n: Term) -> Term {
    let f = arr(nat(), ty.clone());
    Term::app(Term::fixran_on(konst(f, konst(nat(), m)), konst(nat(), n)), Term::num(0))
}

/// `fixr` at `(α→α)×α→α` as `λx. rec⟨π2 x, λ_. π1 x, rand⟩`.
pub fn fixran_via_rand(alpha: &Type) -> Term {
    let a = alpha.clone();
    lam("x", prod(arr(a.clone(), a.clone()), a), |x| {
        Term::rec_on(Term::p2(x.clone()), konst(nat(), Term::p1(x)), Term::rand())
    })
}

/// `rand` as `fixr⟨S, 0⟩`.
pub fn rand_via_fixran() -> Term {
    Term::fixran_on(Term::succ(), Term::num(0))
}

/// Rewrites every `⊕`.
pub fn encode_choice(t: &Term, target: ChoiceTarget) -> Result<Term, TransformError> {
    let typed = closed_typed(t)?;
    rebuild(&typed, &mut |node, parts| match (&node.node, parts) {
        (TNode::Choice(..), [m, n]) => Some(match target {
            ChoiceTarget::Rand => choice_via_rand(&node.ty, m.clone(), n.clone()),
            ChoiceTarget::FixRan => choice_via_fixran(&node.ty, m.clone(), n.clone()),
        }),
        _ => None,
    })
}

/// Rewrites every `rand`.
pub fn encode_rand_via_fixran(t: &Term) -> Result<Term, TransformError> {
    let typed = closed_typed(t)?;
    rebuild(&typed, &mut |node, _| match node.node {
        TNode::Const(Const::Rand) => Some(rand_via_fixran()),
        _ => None,
    })
}

/// Rewrites every `fixr`.
pub fn encode_fixran_via_rand(t: &Term) -> Result<Term, TransformError> {
    let typed = closed_typed(t)?;
    rebuild(&typed, &mut |node, _| match node.node {
        TNode::Const(Const::FixRan) => {
            let (dom, _) = node.ty.as_arrow().expect("fixr has an arrow type");
            let (_, alpha) = dom.as_product().expect("fixr takes a pair");
            Some(fixran_via_rand(alpha))
        }
        _ => None,
    })
}
