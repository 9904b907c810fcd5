//! Monadic translations into a smaller language.
//!
//! Both translations follow the same scheme: a type τ becomes a value type
//! ⌊τ⌋ (functions return computations) and a computation type ⟨⟨τ⟩⟩; values
//! are translated structurally and everything else goes through `ret` and
//! an application bind.
//!
//! *Counting*: ⟨⟨τ⟩⟩ = (N → ⌊τ⌋) × N, a function from a seed to the outcome
//! together with the number of seed bits the computation may consume. Used
//! to move the choice fragment into plain System T.
//!
//! *State*: ⟨⟨τ⟩⟩ = St → ⌊τ⌋ × St with St = N × (N × N) holding an error
//! flag and the two `srand` registers; `srand` becomes a finite cascade of
//! choices. Used for the approximants.

use super::sugar::*;
use super::{closed_typed, TransformError};
use crate::syntax::{Const, Name, TNode, Term, Type, Typed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Count,
    State,
}

/// `N × (N × N)`: error flag, bound m, increment n.
pub fn st() -> Type {
    prod(nat(), prod(nat(), nat()))
}

pub struct Lifter {
    pub flavor: Flavor,
}

impl Lifter {
    pub const COUNT: Lifter = Lifter { flavor: Flavor::Count };
    pub const STATE: Lifter = Lifter { flavor: Flavor::State };

    /// ⌊τ⌋
    pub fn low(&self, ty: &Type) -> Type {
        match ty {
            Type::Nat => nat(),
            Type::Arrow(a, b) => arr(self.low(a), self.comp(b)),
            Type::Product(a, b) => prod(self.low(a), self.low(b)),
        }
    }

    /// ⟨⟨τ⟩⟩
    pub fn comp(&self, ty: &Type) -> Type {
        match self.flavor {
            Flavor::Count => prod(arr(nat(), self.low(ty)), nat()),
            Flavor::State => arr(st(), prod(self.low(ty), st())),
        }
    }

    pub fn ret(&self, _ty: &Type, x: Term) -> Term {
        match self.flavor {
            Flavor::Count => Term::pair(konst(nat(), x), Term::num(0)),
            Flavor::State => lam("s", st(), |s| Term::pair(x, s)),
        }
    }

    /// The application bind `⟨⟨α→β⟩⟩ → ⟨⟨α⟩⟩ → ⟨⟨β⟩⟩` as a closed term.
    pub fn bind(&self, a: &Type, b: &Type) -> Term {
        let fty = Type::arrow(a.clone(), b.clone());
        match self.flavor {
            Flavor::Count => lam("m", self.comp(&fty), |m| {
                lam("n", self.comp(a), |n| {
                    let mc = Term::p2(m.clone());
                    let nc = Term::p2(n.clone());
                    let run = lam("s", nat(), |s| {
                        let arg = ap(Term::p1(n.clone()), ap2(shift(), s.clone(), mc.clone()));
                        let res = ap(ap(Term::p1(m.clone()), s.clone()), arg);
                        ap(Term::p1(res), ap2(shift(), s, ap2(add(), mc.clone(), nc.clone())))
                    });
                    let inner = lam("x", nat(), |x| {
                        let per_y =
                            lam("y", nat(), |y| Term::p2(ap(ap(Term::p1(m.clone()), x), ap(Term::p1(n.clone()), y))));
                        ap2(max_below(), ap(pow2(), nc.clone()), per_y)
                    });
                    let extra = ap2(max_below(), ap(pow2(), mc.clone()), inner);
                    let count = ap2(add(), ap2(add(), mc, nc), extra);
                    Term::pair(run, count)
                })
            }),
            // the argument runs first, then the function, then the body
            Flavor::State => lam("m", self.comp(&fty), |m| {
                lam("n", self.comp(a), |n| {
                    lam("s", st(), |s| {
                        let after_arg = lam("r", prod(self.low(a), st()), |r| {
                            let after_fun = lam("q", prod(self.low(&fty), st()), |q| {
                                ap(ap(Term::p1(q.clone()), Term::p1(r.clone())), Term::p2(q))
                            });
                            ap(after_fun, ap(m, Term::p2(r)))
                        });
                        ap(after_arg, ap(n, s))
                    })
                })
            }),
        }
    }

    fn choice(&self, ty: &Type, m: Term, n: Term) -> Term {
        match self.flavor {
            Flavor::Count => {
                let c = self.comp(ty);
                let f = lam("la", c.clone(), |la| {
                    lam("lb", c, |lb| {
                        let run = lam("x", nat(), |x| {
                            let rest = ap(div2(), x.clone());
                            ite_lazy(
                                &self.low(ty),
                                ap(mod2(), x),
                                ap(Term::p1(lb.clone()), rest.clone()),
                                ap(Term::p1(la.clone()), rest),
                            )
                        });
                        Term::pair(run, Term::s(ap2(or_max(), Term::p2(la), Term::p2(lb))))
                    })
                });
                ap2(f, m, n)
            }
            Flavor::State => lam("s", st(), |s| Term::choice(ap(m, s.clone()), ap(n, s))),
        }
    }

    fn pair(&self, a: &Type, b: &Type, m: Term, n: Term) -> Term {
        match self.flavor {
            Flavor::Count => {
                let ab = prod(a.clone(), b.clone());
                let inner_ty = Type::arrow(b.clone(), ab.clone());
                let pf = lam("x", self.low(a), |x| {
                    self.ret(&inner_ty, lam("y", self.low(b), |y| self.ret(&ab, Term::pair(x, y))))
                });
                let partial = ap2(self.bind(a, &inner_ty), self.ret(&Type::arrow(a.clone(), inner_ty.clone()), pf), m);
                ap2(self.bind(b, &ab), partial, n)
            }
            // left component first
            Flavor::State => lam("s", st(), |s| {
                let after_l = lam("r", prod(self.low(a), st()), |r| {
                    let after_r = lam("q", prod(self.low(b), st()), |q| {
                        Term::pair(Term::pair(Term::p1(r.clone()), Term::p1(q.clone())), Term::p2(q))
                    });
                    ap(after_r, ap(n, Term::p2(r)))
                });
                ap(after_l, ap(m, s))
            }),
        }
    }

    /// `srand` over the state: k < m with weight 2^-(k+1), failure (flag
    /// set) with the remaining 2^-m; the bound grows by n.
    fn srand(&self) -> Result<Term, TransformError> {
        if self.flavor == Flavor::Count {
            return Err(TransformError::Fragment("rand has no finite lifting".into()));
        }
        Ok(lam("s", st(), |s| {
            let e = Term::p1(s.clone());
            let m = Term::p1(Term::p2(s.clone()));
            let n = Term::p2(Term::p2(s));
            let next = |flag: Term| Term::pair(flag, Term::pair(ap2(add(), m.clone(), n.clone()), n.clone()));
            let out = prod(nat(), st());
            let base = konst(nat(), Term::pair(Term::num(0), next(Term::num(1))));
            let step = konst(
                nat(),
                lam("y", arr(nat(), out.clone()), |y| {
                    lam("u", nat(), |u| {
                        let bump = lam("r", out, |r| Term::pair(Term::s(Term::p1(r.clone())), Term::p2(r)));
                        Term::choice(Term::pair(Term::num(0), next(e)), ap(bump, ap(y, u)))
                    })
                }),
            );
            ap(Term::rec_on(base, step, m.clone()), Term::num(0))
        }))
    }

    /// ⟨⟨t⟩⟩
    pub fn comp_of(&self, t: &Typed) -> Result<Term, TransformError> {
        if t.is_ext_value() {
            return Ok(self.ret(&t.ty, self.val_of(t)?));
        }
        if plain_first_order(t) {
            // translates to itself: evaluate it once, then return it
            return Ok(ap(lam("v", t.ty.clone(), |v| self.ret(&t.ty, v)), t.term()));
        }
        match &t.node {
            // ret f >>= ret a is just ⌊f⌋ ⌊a⌋
            TNode::App(f, a) if f.is_ext_value() && (a.is_ext_value() || plain_first_order(a)) => {
                let arg = if a.is_ext_value() { self.val_of(a)? } else { a.term() };
                Ok(ap(self.val_of(f)?, arg))
            }
            TNode::App(f, a) => Ok(ap2(self.bind(&a.ty, &t.ty), self.comp_of(f)?, self.comp_of(a)?)),
            TNode::Pair(l, r) => Ok(self.pair(&l.ty, &r.ty, self.comp_of(l)?, self.comp_of(r)?)),
            TNode::Choice(l, r) => Ok(self.choice(&t.ty, self.comp_of(l)?, self.comp_of(r)?)),
            TNode::Const(Const::Rand | Const::SRand) => self.srand(),
            _ => unreachable!("non-value node"),
        }
    }

    /// ⌊V⌋
    pub fn val_of(&self, t: &Typed) -> Result<Term, TransformError> {
        if plain_first_order(t) {
            return Ok(t.term());
        }
        Ok(match &t.node {
            TNode::Var(x) => Term::var(x),
            TNode::Num(n) => Term::num(*n),
            TNode::Lam(x, ty, b) => Term::lam(x, self.low(ty), self.comp_of(b)?),
            TNode::Pair(l, r) => Term::pair(self.val_of(l)?, self.val_of(r)?),
            TNode::App(_, a) => Term::s(self.val_of(a)?),
            TNode::Const(Const::Succ) => lam("y", nat(), |y| self.ret(&nat(), Term::s(y))),
            TNode::Const(c @ (Const::Proj1 | Const::Proj2)) => {
                let (dom, cod) = t.ty.as_arrow().expect("projection type");
                let proj: fn(Term) -> Term = if *c == Const::Proj1 { Term::p1 } else { Term::p2 };
                lam("x", self.low(dom), |x| self.ret(cod, proj(x)))
            }
            TNode::Const(Const::Rec) => {
                let (dom, tau) = t.ty.as_arrow().expect("rec type");
                lam("p", self.low(dom), |p| {
                    let base = self.ret(tau, Term::p1(p.clone()));
                    let step = lam("x", nat(), |x| {
                        lam("y", self.comp(tau), |y| ap2(self.bind(tau, tau), ap(Term::p1(Term::p2(p.clone())), x), y))
                    });
                    Term::rec_on(base, step, Term::p2(Term::p2(p)))
                })
            }
            TNode::Const(Const::FixRan) => {
                return Err(TransformError::Fragment("fixr has no finite lifting".into()));
            }
            TNode::Const(Const::Rand | Const::SRand) | TNode::Choice(..) => unreachable!("not a value"),
        })
    }

    /// Applies a translated function of type `fty` to translated values.
    pub fn apply(&self, f: Term, fty: &Type, args: &[Term]) -> (Term, Type) {
        let mut cur = f;
        let mut ty = fty.clone();
        for a in args {
            let (dom, cod) = ty.as_arrow().expect("enough arrows");
            let (dom, cod) = (dom.clone(), cod.clone());
            cur = ap2(self.bind(&dom, &cod), cur, self.ret(&dom, a.clone()));
            ty = cod;
        }
        (cur, ty)
    }
}

fn first_order(ty: &Type) -> bool {
    match ty {
        Type::Nat => true,
        Type::Arrow(..) => false,
        Type::Product(a, b) => first_order(a) && first_order(b),
    }
}

/// No probabilistic constant, a first-order type, and first-order free
/// variables: both translations leave such a term unchanged.
fn plain_first_order(t: &Typed) -> bool {
    fn go(t: &Typed, bound: &mut Vec<Name>) -> bool {
        match &t.node {
            TNode::Var(x) => bound.contains(x) || first_order(&t.ty),
            TNode::Num(_) => true,
            TNode::Const(c) => !matches!(c, Const::Rand | Const::SRand | Const::FixRan),
            TNode::Choice(..) => false,
            TNode::Lam(x, _, b) => {
                bound.push(x.clone());
                let ok = go(b, bound);
                bound.pop();
                ok
            }
            TNode::App(a, b) | TNode::Pair(a, b) => go(a, bound) && go(b, bound),
        }
    }
    first_order(&t.ty) && go(t, &mut Vec::new())
}

/// ⟨⟨t⟩⟩ for a closed term of the choice fragment: a pure System T term of
/// type (N → ⌊τ⌋) × N.
pub fn lift_plus_to_t(t: &Term) -> Result<Term, TransformError> {
    if t.has_rand() || t.has_fixran() || t.has_srand() {
        return Err(TransformError::Fragment("only (+) can be lifted".into()));
    }
    let typed = closed_typed(t)?;
    Lifter::COUNT.comp_of(&typed)
}

/// `F n k = ⟨a, e⟩` with a/2^e the probability that `t n` yields k, and
/// `Q n` exceeding every possible outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRep {
    pub f: Term,
    pub q: Term,
}

/// `λp:⟨⟨N⟩⟩. λk. ⟨#{s < 2^p# | π1 p s = k}, p#⟩`
pub(crate) fn weight_of() -> Term {
    let c = Lifter::COUNT.comp(&nat());
    lam("p", c, |p| {
        lam("k", nat(), |k| {
            let step = lam("s", nat(), |s| {
                lam("acc", nat(), |acc| {
                    let hit = ap2(eq(), ap(Term::p1(p.clone()), s), k);
                    ite_lazy(&nat(), hit, Term::s(acc.clone()), acc)
                })
            });
            let count = Term::rec_on(Term::num(0), step, ap(pow2(), Term::p2(p.clone())));
            Term::pair(count, Term::p2(p))
        })
    })
}

/// `λp:⟨⟨N⟩⟩. S (max over seeds of π1 p s)`
pub(crate) fn support_bound() -> Term {
    let c = Lifter::COUNT.comp(&nat());
    lam("p", c, |p| Term::s(ap2(max_below(), ap(pow2(), Term::p2(p.clone())), Term::p1(p))))
}

/// The counting computation of `t a1 .. ak` for a closed choice-fragment
/// function `t : N → .. → N` and argument terms of type N.
pub(crate) fn lifted_call(t: &Term, args: &[Term]) -> Result<Term, TransformError> {
    if t.has_rand() || t.has_fixran() || t.has_srand() {
        return Err(TransformError::Fragment("only (+) can be lifted".into()));
    }
    let typed = closed_typed(t)?;
    let want = Type::arrows(&vec![nat(); args.len()], nat());
    if typed.ty != want {
        return Err(TransformError::Shape { expected: want.to_string(), actual: typed.ty.to_string() });
    }
    let l = Lifter::COUNT.comp_of(&typed)?;
    // ⟨⟨t⟩⟩ is a computation of a function; bind it once, then apply
    let (call, _) = Lifter::COUNT.apply(l, &typed.ty, args);
    Ok(call)
}

pub fn finite_rep(t: &Term) -> Result<FiniteRep, TransformError> {
    let n = crate::syntax::fresh_name("n");
    let call = lifted_call(t, &[Term::var(&n)])?;
    let f = Term::lam(&n, nat(), lam("k", nat(), |k| ap2(weight_of(), call.clone(), k)));
    let q = Term::lam(&n, nat(), ap(support_bound(), call));
    Ok(FiniteRep { f, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{nat_normal_form, normal_form};
    use crate::syntax::{parse_term, typecheck, TypeEnv};

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn ty(t: &Term) -> Type {
        typecheck(&TypeEnv::new(), t).unwrap()
    }

    const CAP: u64 = 50_000_000;

    #[test]
    fn value_lifts_to_ret() {
        let l = lift_plus_to_t(&p("\\x:Nat. x")).unwrap();
        assert!(l.is_deterministic());
        assert_eq!(nat_normal_form(&Term::p2(l), CAP).unwrap(), 0);
    }

    #[test]
    fn types_translate() {
        for src in ["0 (+) 1", "\\x:Nat. x (+) S x", "<0 (+) 1, \\x:Nat. x>", "rec <0, \\x:Nat. \\y:Nat. y (+) S y, 2>"]
        {
            let t = p(src);
            let want = Lifter::COUNT.comp(&ty(&t));
            assert_eq!(ty(&lift_plus_to_t(&t).unwrap()), want, "{src}");
        }
    }

    #[test]
    fn doubleflip_seeds() {
        let l = lift_plus_to_t(&p("rec <0, \\x:Nat. \\y:Nat. y (+) S y, 2>")).unwrap();
        let bits = nat_normal_form(&Term::p2(l.clone()), CAP).unwrap();
        assert!(bits >= 2);
        let run = normal_form(&Term::p1(l), CAP).unwrap();
        let mut counts = [0u64; 3];
        for s in 0..(1u64 << bits) {
            counts[nat_normal_form(&Term::app(run.clone(), Term::num(s)), CAP).unwrap() as usize] += 1;
        }
        let scale = 1u64 << (bits - 2);
        assert_eq!(counts, [scale, 2 * scale, scale]);
    }

    #[test]
    fn finite_rep_of_identity() {
        let r = finite_rep(&p("\\n:Nat. n")).unwrap();
        assert_eq!(ty(&r.f).to_string(), "Nat -> Nat -> Nat * Nat");
        assert_eq!(ty(&r.q).to_string(), "Nat -> Nat");
        for n in 0..3 {
            for k in 0..4 {
                let w = Term::app(Term::app(r.f.clone(), Term::num(n)), Term::num(k));
                let a = nat_normal_form(&Term::p1(w.clone()), CAP).unwrap();
                let e = nat_normal_form(&Term::p2(w), CAP).unwrap();
                assert_eq!((a, e), (u64::from(n == k), 0));
            }
        }
    }

    #[test]
    fn rejects_rand() {
        assert!(lift_plus_to_t(&Term::rand()).is_err());
        assert!(finite_rep(&p("\\n:Nat. n")).is_ok());
        assert!(finite_rep(&p("\\n:Nat. \\m:Nat. n")).is_err());
    }
}
