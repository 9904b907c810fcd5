//! Closed System T combinators used by the constructions.
//!
//! Everything here is call-by-value friendly: conditionals that guard
//! recursive work are built with [`ite_lazy`], which only evaluates the
//! selected branch.

use crate::syntax::{fresh_name, Term, Type};

pub fn nat() -> Type {
    Type::Nat
}

pub fn arr(a: Type, b: Type) -> Type {
    Type::arrow(a, b)
}

pub fn prod(a: Type, b: Type) -> Type {
    Type::product(a, b)
}

/// `N × N`, a dyadic a/2^e as ⟨a, e⟩.
pub fn bin() -> Type {
    prod(nat(), nat())
}

/// `λx:ty. body(x)` with a fresh binder name.
pub fn lam(hint: &str, ty: Type, body: impl FnOnce(Term) -> Term) -> Term {
    let name = fresh_name(hint);
    let b = body(Term::var(&name));
    Term::lam(&name, ty, b)
}

/// `λ_:ty. body`, where `body` does not mention the binder.
pub fn konst(ty: Type, body: Term) -> Term {
    lam("_", ty, |_| body)
}

pub fn ap(f: Term, a: Term) -> Term {
    Term::app(f, a)
}

pub fn ap2(f: Term, a: Term, b: Term) -> Term {
    Term::app(Term::app(f, a), b)
}

/// Branch on `c ≠ 0` evaluating only the chosen branch:
/// `rec⟨λ_.else, λ_ λ_ λ_. then, c⟩ 0`.
pub fn ite_lazy(ty: &Type, c: Term, then: Term, els: Term) -> Term {
    let base = konst(nat(), els);
    let step = konst(nat(), konst(arr(nat(), ty.clone()), konst(nat(), then)));
    ap(Term::rec_on(base, step, c), Term::num(0))
}

/// Strict conditional `ite : N × (τ × τ) → τ`, `ite⟨c, a, b⟩ = a` if c ≠ 0
/// else `b`.
pub fn ite(ty: &Type) -> Term {
    let t = ty.clone();
    lam("x", prod(nat(), prod(t.clone(), t.clone())), |x| {
        let then = Term::p1(Term::p2(x.clone()));
        let els = Term::p2(Term::p2(x.clone()));
        Term::rec_on(els, konst(nat(), konst(t, then)), Term::p1(x))
    })
}

pub fn pred() -> Term {
    lam("u", nat(), |u| Term::rec_on(Term::num(0), lam("a", nat(), |a| konst(nat(), a)), u))
}

pub fn add() -> Term {
    lam("a", nat(), |a| lam("b", nat(), |b| Term::rec_on(a, konst(nat(), lam("x", nat(), Term::s)), b)))
}

pub fn mul() -> Term {
    lam("a", nat(), |a| {
        lam("b", nat(), |b| Term::rec_on(Term::num(0), konst(nat(), lam("y", nat(), |y| ap2(add(), a, y))), b))
    })
}

/// `2^m`
pub fn pow2() -> Term {
    lam("m", nat(), |m| {
        let double = lam("y", nat(), |y| Term::rec_on(y.clone(), konst(nat(), lam("v", nat(), Term::s)), y));
        Term::rec_on(Term::num(1), konst(nat(), double), m)
    })
}

/// `max(a, b)`
pub fn or_max() -> Term {
    lam("a", nat(), |a| {
        lam("b", nat(), |b| {
            let base = lam("u", nat(), |u| u);
            let step = lam("x", nat(), |x| {
                lam("y", arr(nat(), nat()), |y| {
                    lam("u", nat(), |u| ite_lazy(&nat(), u.clone(), Term::s(ap(y, ap(pred(), u))), Term::s(x)))
                })
            });
            ap(Term::rec_on(base, step, a), b)
        })
    })
}

/// `max_below m f = max {f x | x < m}` (0 when m = 0)
pub fn max_below() -> Term {
    lam("m", nat(), |m| {
        lam("f", arr(nat(), nat()), |f| {
            let step = lam("x", nat(), |x| lam("y", nat(), |y| ap2(or_max(), ap(f, x), y)));
            Term::rec_on(Term::num(0), step, m)
        })
    })
}

/// `a > b` as 1 or 0
pub fn gt() -> Term {
    lam("a", nat(), |a| {
        lam("b", nat(), |b| {
            let base = konst(nat(), Term::num(0));
            let step = lam("x", nat(), |_| {
                lam("y", arr(nat(), nat()), |y| {
                    lam("u", nat(), |u| ite_lazy(&nat(), u.clone(), ap(y, ap(pred(), u)), Term::num(1)))
                })
            });
            ap(Term::rec_on(base, step, a), b)
        })
    })
}

/// `a = b` as 1 or 0
pub fn eq() -> Term {
    lam("a", nat(), |a| {
        lam("b", nat(), |b| {
            let ab = ap2(gt(), a.clone(), b.clone());
            let ba = ap2(gt(), b, a);
            ite_lazy(&nat(), ab, Term::num(0), ite_lazy(&nat(), ba, Term::num(0), Term::num(1)))
        })
    })
}

pub fn mod2() -> Term {
    lam("x", nat(), |x| {
        let step = konst(nat(), lam("v", nat(), |v| ite_lazy(&nat(), v, Term::num(0), Term::num(1))));
        Term::rec_on(Term::num(0), step, x)
    })
}

/// `⌊x/2⌋`: a recursion on x carrying the parity of what has been consumed.
pub fn div2() -> Term {
    lam("x", nat(), |x| {
        let base = konst(nat(), Term::num(0));
        let step = konst(
            nat(),
            lam("v", arr(nat(), nat()), |v| {
                lam("w", nat(), |w| ite_lazy(&nat(), w, Term::s(ap(v.clone(), Term::num(0))), ap(v, Term::num(1))))
            }),
        );
        ap(Term::rec_on(base, step, x), Term::num(0))
    })
}

/// `shift s y = ⌊s / 2^y⌋`
pub fn shift() -> Term {
    lam("s", nat(), |s| lam("y", nat(), |y| Term::rec_on(s, konst(nat(), div2()), y)))
}

/// a/2^e > 1/2
pub fn sup_half() -> Term {
    lam("p", bin(), |p| {
        let a = Term::p1(p.clone());
        ap2(gt(), ap2(add(), a.clone(), a), ap(pow2(), Term::p2(p)))
    })
}

/// a/2^e > 0
pub fn sup_zero() -> Term {
    lam("p", bin(), |p| ap2(gt(), Term::p1(p), Term::num(0)))
}

/// `m *_b ⟨a, e⟩ = ⟨m·a, e⟩`
pub fn times_b() -> Term {
    lam("m", nat(), |m| lam("p", bin(), |p| Term::pair(ap2(mul(), m, Term::p1(p.clone())), Term::p2(p))))
}

/// A canonical closed value of each type.
pub fn bottom(ty: &Type) -> Term {
    match ty {
        Type::Nat => Term::num(0),
        Type::Arrow(a, b) => konst((**a).clone(), bottom(b)),
        Type::Product(a, b) => Term::pair(bottom(a), bottom(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::nat_normal_form;
    use crate::syntax::{typecheck, TypeEnv};

    fn nf(t: Term) -> u64 {
        nat_normal_form(&t, 10_000_000).unwrap()
    }

    fn ty(t: &Term) -> String {
        typecheck(&TypeEnv::new(), t).unwrap().to_string()
    }

    fn n(k: u64) -> Term {
        Term::num(k)
    }

    #[test]
    fn signatures() {
        for (t, want) in [
            (add(), "Nat -> Nat -> Nat"),
            (mul(), "Nat -> Nat -> Nat"),
            (pow2(), "Nat -> Nat"),
            (or_max(), "Nat -> Nat -> Nat"),
            (max_below(), "Nat -> (Nat -> Nat) -> Nat"),
            (gt(), "Nat -> Nat -> Nat"),
            (eq(), "Nat -> Nat -> Nat"),
            (mod2(), "Nat -> Nat"),
            (div2(), "Nat -> Nat"),
            (shift(), "Nat -> Nat -> Nat"),
            (sup_half(), "Nat * Nat -> Nat"),
            (sup_zero(), "Nat * Nat -> Nat"),
            (times_b(), "Nat -> Nat * Nat -> Nat * Nat"),
            (ite(&nat()), "Nat * Nat * Nat -> Nat"),
        ] {
            assert_eq!(ty(&t), want);
        }
    }

    #[test]
    fn arithmetic_tables() {
        for a in 0..7u64 {
            assert_eq!(nf(ap(pow2(), n(a))), 1 << a);
            assert_eq!(nf(ap(mod2(), n(a))), a % 2);
            assert_eq!(nf(ap(div2(), n(a))), a / 2);
            assert_eq!(nf(ap(pred(), n(a))), a.saturating_sub(1));
            for b in 0..7u64 {
                assert_eq!(nf(ap2(add(), n(a), n(b))), a + b);
                assert_eq!(nf(ap2(mul(), n(a), n(b))), a * b);
                assert_eq!(nf(ap2(or_max(), n(a), n(b))), a.max(b));
                assert_eq!(nf(ap2(gt(), n(a), n(b))), (a > b) as u64);
                assert_eq!(nf(ap2(eq(), n(a), n(b))), (a == b) as u64);
            }
        }
        assert_eq!(nf(ap2(shift(), n(45), n(2))), 11);
        assert_eq!(nf(ap2(shift(), n(5), n(0))), 5);
    }

    #[test]
    fn max_below_table() {
        // max {x·x mod 7 | x < m} via a table function
        let sq = lam("x", nat(), |x| ap2(mul(), x.clone(), x));
        assert_eq!(nf(ap2(max_below(), n(0), sq.clone())), 0);
        assert_eq!(nf(ap2(max_below(), n(4), sq)), 9);
    }

    #[test]
    fn conditionals() {
        let t = Term::tuple(vec![n(3), n(1), n(2)]);
        assert_eq!(nf(ap(ite(&nat()), t)), 1);
        let t = Term::tuple(vec![n(0), n(1), n(2)]);
        assert_eq!(nf(ap(ite(&nat()), t)), 2);
        assert_eq!(nf(ite_lazy(&nat(), n(0), n(5), n(6))), 6);
        assert_eq!(nf(ite_lazy(&nat(), n(2), n(5), n(6))), 5);
    }

    #[test]
    fn dyadic_thresholds() {
        let b = |a, e| Term::pair(n(a), n(e));
        assert_eq!(nf(ap(sup_half(), b(3, 2))), 1);
        assert_eq!(nf(ap(sup_half(), b(2, 2))), 0);
        assert_eq!(nf(ap(sup_zero(), b(1, 5))), 1);
        assert_eq!(nf(ap(sup_zero(), b(0, 5))), 0);
        let tb = ap2(times_b(), n(3), b(2, 4));
        assert_eq!(nf(Term::p1(tb.clone())), 6);
        assert_eq!(nf(Term::p2(tb)), 4);
    }

    #[test]
    fn bottoms_typecheck() {
        let t = Type::arrow(nat(), Type::product(nat(), Type::arrow(nat(), nat())));
        let b = bottom(&t);
        assert_eq!(typecheck(&TypeEnv::new(), &b).unwrap(), t);
    }
}
