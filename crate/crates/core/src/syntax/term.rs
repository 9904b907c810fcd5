//! Locally nameless terms.
//!
//! Bound variables are de Bruijn indices, free variables are names. Binders
//! keep the user's name only as a printing hint, so alpha-equivalent terms
//! are structurally equal. Every node caches its hash, its value-ness and a
//! few occurrence flags, which keeps the evaluators from re-walking large
//! numerals and contexts.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use super::types::Type;

pub type Name = Arc<str>;

#[derive(Clone)]
pub struct Term(Arc<Node>);

struct Node {
    kind: Kind,
    hash: u64,
    /// one more than the largest dangling de Bruijn index (0 = locally closed)
    loose: u32,
    flags: u8,
}

const VALUE: u8 = 1;
const HAS_FREE: u8 = 2;
const HAS_RAND: u8 = 4;
const HAS_FIXRAN: u8 = 8;
const HAS_CHOICE: u8 = 16;
const HAS_SRAND: u8 = 32;

pub enum Kind {
    Bound(u32),
    Free(Name),
    /// binder hint, annotation, body (index 0 refers to the binder)
    Lam(Name, Type, Term),
    App(Term, Term),
    Pair(Term, Term),
    Choice(Term, Term),
    /// the numeral S^n 0
    Num(u64),
    Proj1,
    Proj2,
    Rec,
    Succ,
    Rand,
    FixRan,
    SRand,
}

fn mix(h: u64, x: u64) -> u64 {
    (h.rotate_left(5) ^ x).wrapping_mul(0x517c_c1b7_2722_0a95)
}

fn std_hash<T: Hash + ?Sized>(x: &T) -> u64 {
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}

impl Term {
    fn mk(kind: Kind) -> Term {
        let (hash, loose, flags) = match &kind {
            Kind::Bound(i) => (mix(1, *i as u64), i + 1, 0),
            Kind::Free(n) => (mix(2, std_hash(&**n)), 0, HAS_FREE),
            Kind::Lam(_, ty, b) => {
                (mix(mix(3, std_hash(ty)), b.hash()), b.0.loose.saturating_sub(1), (b.0.flags & !VALUE) | VALUE)
            }
            Kind::App(f, a) => {
                let v = if matches!(f.kind(), Kind::Succ) && a.is_value() { VALUE } else { 0 };
                (mix(mix(4, f.hash()), a.hash()), f.0.loose.max(a.0.loose), ((f.0.flags | a.0.flags) & !VALUE) | v)
            }
            Kind::Pair(l, r) => {
                let v = if l.is_value() && r.is_value() { VALUE } else { 0 };
                (mix(mix(5, l.hash()), r.hash()), l.0.loose.max(r.0.loose), ((l.0.flags | r.0.flags) & !VALUE) | v)
            }
            Kind::Choice(l, r) => (
                mix(mix(6, l.hash()), r.hash()),
                l.0.loose.max(r.0.loose),
                ((l.0.flags | r.0.flags) & !VALUE) | HAS_CHOICE,
            ),
            Kind::Num(n) => (mix(7, *n), 0, VALUE),
            Kind::Proj1 => (8, 0, VALUE),
            Kind::Proj2 => (9, 0, VALUE),
            Kind::Rec => (10, 0, VALUE),
            Kind::Succ => (11, 0, VALUE),
            Kind::Rand => (12, 0, HAS_RAND),
            Kind::FixRan => (13, 0, VALUE | HAS_FIXRAN),
            Kind::SRand => (14, 0, HAS_SRAND),
        };
        Term(Arc::new(Node { kind, hash, loose, flags }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn hash(&self) -> u64 {
        self.0.hash
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    // ---- constructors -------------------------------------------------

    pub fn bound(i: u32) -> Term {
        Term::mk(Kind::Bound(i))
    }

    pub fn var(name: &str) -> Term {
        Term::mk(Kind::Free(name.into()))
    }

    /// `λname:ty. body`, abstracting the free occurrences of `name` in `body`.
    /// A `#suffix` on the name (used for generated names) is dropped from the hint.
    pub fn lam(name: &str, ty: Type, body: Term) -> Term {
        let hint = name.split('#').next().unwrap_or(name);
        let hint = if hint.is_empty() { "x" } else { hint };
        let body = body.close(name, 0);
        Term::mk(Kind::Lam(hint.into(), ty, body))
    }

    /// Binder around a body already in nameless form.
    pub fn lam_nameless(hint: Name, ty: Type, body: Term) -> Term {
        Term::mk(Kind::Lam(hint, ty, body))
    }

    /// Application; `S n` on a numeral is folded into the numeral `n+1`.
    pub fn app(f: Term, a: Term) -> Term {
        if let (Kind::Succ, Kind::Num(n)) = (f.kind(), a.kind()) {
            return Term::num(n + 1);
        }
        Term::mk(Kind::App(f, a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn pair(l: Term, r: Term) -> Term {
        Term::mk(Kind::Pair(l, r))
    }

    /// Right-nested tuple `<a, <b, c>>`.
    pub fn tuple(items: Vec<Term>) -> Term {
        let mut it = items.into_iter().rev();
        let last = it.next().expect("tuple of at least one term");
        it.fold(last, |acc, t| Term::pair(t, acc))
    }

    pub fn choice(l: Term, r: Term) -> Term {
        Term::mk(Kind::Choice(l, r))
    }

    pub fn num(n: u64) -> Term {
        if n == 0 {
            return Term::zero();
        }
        Term::mk(Kind::Num(n))
    }

    pub fn zero() -> Term {
        static T: OnceLock<Term> = OnceLock::new();
        T.get_or_init(|| Term::mk(Kind::Num(0))).clone()
    }

    pub fn succ() -> Term {
        static T: OnceLock<Term> = OnceLock::new();
        T.get_or_init(|| Term::mk(Kind::Succ)).clone()
    }

    pub fn proj1() -> Term {
        static T: OnceLock<Term> = OnceLock::new();
        T.get_or_init(|| Term::mk(Kind::Proj1)).clone()
    }

    pub fn proj2() -> Term {
        static T: OnceLock<Term> = OnceLock::new();
        T.get_or_init(|| Term::mk(Kind::Proj2)).clone()
    }

    pub fn rec() -> Term {
        static T: OnceLock<Term> = OnceLock::new();
        T.get_or_init(|| Term::mk(Kind::Rec)).clone()
    }

    pub fn rand() -> Term {
        static T: OnceLock<Term> = OnceLock::new();
        T.get_or_init(|| Term::mk(Kind::Rand)).clone()
    }

    pub fn fixran() -> Term {
        static T: OnceLock<Term> = OnceLock::new();
        T.get_or_init(|| Term::mk(Kind::FixRan)).clone()
    }

    pub fn srand() -> Term {
        static T: OnceLock<Term> = OnceLock::new();
        T.get_or_init(|| Term::mk(Kind::SRand)).clone()
    }

    pub fn s(t: Term) -> Term {
        Term::app(Term::succ(), t)
    }

    pub fn p1(t: Term) -> Term {
        Term::app(Term::proj1(), t)
    }

    pub fn p2(t: Term) -> Term {
        Term::app(Term::proj2(), t)
    }

    /// `rec <base, step, n>`
    pub fn rec_on(base: Term, step: Term, n: Term) -> Term {
        Term::app(Term::rec(), Term::pair(base, Term::pair(step, n)))
    }

    /// `fixr <step, base>`
    pub fn fixran_on(step: Term, base: Term) -> Term {
        Term::app(Term::fixran(), Term::pair(step, base))
    }

    // ---- queries ------------------------------------------------------

    /// Value predicate for closed terms.
    pub fn is_value(&self) -> bool {
        self.0.flags & VALUE != 0
    }

    /// `Some(n)` iff the term is `S^n 0`.
    pub fn as_nat(&self) -> Option<u64> {
        match self.kind() {
            Kind::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_locally_closed(&self) -> bool {
        self.0.loose == 0
    }

    pub fn is_closed(&self) -> bool {
        self.0.loose == 0 && self.0.flags & HAS_FREE == 0
    }

    pub fn has_free(&self) -> bool {
        self.0.flags & HAS_FREE != 0
    }

    pub fn has_rand(&self) -> bool {
        self.0.flags & HAS_RAND != 0
    }

    pub fn has_fixran(&self) -> bool {
        self.0.flags & HAS_FIXRAN != 0
    }

    pub fn has_choice(&self) -> bool {
        self.0.flags & HAS_CHOICE != 0
    }

    pub fn has_srand(&self) -> bool {
        self.0.flags & HAS_SRAND != 0
    }

    /// No probabilistic constant at all: a term of plain System T.
    pub fn is_deterministic(&self) -> bool {
        self.0.flags & (HAS_RAND | HAS_FIXRAN | HAS_CHOICE | HAS_SRAND) == 0
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if !t.has_free() {
                continue;
            }
            match t.kind() {
                Kind::Free(n) => {
                    out.insert(n.clone());
                }
                _ => t.for_each_child(|c| stack.push(c)),
            }
        }
        out
    }

    /// Number of nodes (numerals count as one).
    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            n += 1;
            t.for_each_child(|c| stack.push(c));
        }
        n
    }

    fn for_each_child<'a>(&'a self, mut f: impl FnMut(&'a Term)) {
        match self.kind() {
            Kind::Lam(_, _, b) => f(b),
            Kind::App(a, b) | Kind::Pair(a, b) | Kind::Choice(a, b) => {
                f(a);
                f(b);
            }
            _ => {}
        }
    }

    // ---- binding operations ---------------------------------------------

    /// Instantiates the outermost bound variable of a binder body with `v`
    /// (which must be locally closed).
    pub fn open(&self, v: &Term) -> Term {
        self.open_at(0, v)
    }

    fn open_at(&self, depth: u32, v: &Term) -> Term {
        if self.0.loose <= depth {
            return self.clone();
        }
        match self.kind() {
            Kind::Bound(i) if *i == depth => v.clone(),
            Kind::Bound(i) => Term::bound(i - 1),
            Kind::Lam(h, ty, b) => Term::mk(Kind::Lam(h.clone(), ty.clone(), b.open_at(depth + 1, v))),
            Kind::App(f, a) => Term::app(f.open_at(depth, v), a.open_at(depth, v)),
            Kind::Pair(l, r) => Term::pair(l.open_at(depth, v), r.open_at(depth, v)),
            Kind::Choice(l, r) => Term::choice(l.open_at(depth, v), r.open_at(depth, v)),
            _ => self.clone(),
        }
    }

    /// Turns free occurrences of `name` into the bound index `depth`.
    fn close(&self, name: &str, depth: u32) -> Term {
        if !self.has_free() {
            return self.clone();
        }
        match self.kind() {
            Kind::Free(n) if &**n == name => Term::bound(depth),
            Kind::Lam(h, ty, b) => Term::mk(Kind::Lam(h.clone(), ty.clone(), b.close(name, depth + 1))),
            Kind::App(f, a) => Term::app(f.close(name, depth), a.close(name, depth)),
            Kind::Pair(l, r) => Term::pair(l.close(name, depth), r.close(name, depth)),
            Kind::Choice(l, r) => Term::choice(l.close(name, depth), r.close(name, depth)),
            _ => self.clone(),
        }
    }

    /// `body[value/var]` for a free variable `var`. Binders are nameless, so
    /// capture cannot happen; a binder that shadows `var` in the surface
    /// syntax simply has no free occurrence of it underneath.
    pub fn substitute(&self, var: &str, value: &Term) -> Term {
        if !self.has_free() {
            return self.clone();
        }
        match self.kind() {
            Kind::Free(n) if &**n == var => value.clone(),
            Kind::Lam(h, ty, b) => Term::mk(Kind::Lam(h.clone(), ty.clone(), b.substitute(var, value))),
            Kind::App(f, a) => Term::app(f.substitute(var, value), a.substitute(var, value)),
            Kind::Pair(l, r) => Term::pair(l.substitute(var, value), r.substitute(var, value)),
            Kind::Choice(l, r) => Term::choice(l.substitute(var, value), r.substitute(var, value)),
            _ => self.clone(),
        }
    }

    /// Bottom-up rewrite of the leaves `rand`, `fixr`, ... (and any other
    /// node for which `f` returns `Some`). Binders are rebuilt unchanged.
    pub fn rewrite(&self, f: &mut impl FnMut(&Term) -> Option<Term>) -> Term {
        if let Some(t) = f(self) {
            return t;
        }
        match self.kind() {
            Kind::Lam(h, ty, b) => Term::mk(Kind::Lam(h.clone(), ty.clone(), b.rewrite(f))),
            Kind::App(a, b) => Term::app(a.rewrite(f), b.rewrite(f)),
            Kind::Pair(a, b) => Term::pair(a.rewrite(f), b.rewrite(f)),
            Kind::Choice(a, b) => Term::choice(a.rewrite(f), b.rewrite(f)),
            _ => self.clone(),
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        let mut stack: Vec<(&Term, &Term)> = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            if a.ptr_eq(b) {
                continue;
            }
            if a.0.hash != b.0.hash {
                return false;
            }
            match (a.kind(), b.kind()) {
                (Kind::Bound(i), Kind::Bound(j)) if i == j => {}
                (Kind::Free(x), Kind::Free(y)) if x == y => {}
                (Kind::Num(m), Kind::Num(n)) if m == n => {}
                (Kind::Lam(_, s, x), Kind::Lam(_, t, y)) if s == t => stack.push((x, y)),
                (Kind::App(f, x), Kind::App(g, y))
                | (Kind::Pair(f, x), Kind::Pair(g, y))
                | (Kind::Choice(f, x), Kind::Choice(g, y)) => {
                    stack.push((f, g));
                    stack.push((x, y));
                }
                (Kind::Proj1, Kind::Proj1)
                | (Kind::Proj2, Kind::Proj2)
                | (Kind::Rec, Kind::Rec)
                | (Kind::Succ, Kind::Succ)
                | (Kind::Rand, Kind::Rand)
                | (Kind::FixRan, Kind::FixRan)
                | (Kind::SRand, Kind::SRand) => {}
                _ => return false,
            }
        }
        true
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash)
    }
}

// Long chains (contexts of deep recursions, `S (S (... ))` towers) would
// overflow the stack under the default recursive drop.
impl Drop for Node {
    fn drop(&mut self) {
        let mut stack: Vec<Term> = Vec::new();
        take_children(&mut self.kind, &mut stack);
        while let Some(t) = stack.pop() {
            if let Some(mut node) = Arc::into_inner(t.0) {
                take_children(&mut node.kind, &mut stack);
            }
        }
    }
}

fn take_children(kind: &mut Kind, out: &mut Vec<Term>) {
    match std::mem::replace(kind, Kind::Rec) {
        Kind::Lam(_, _, b) => out.push(b),
        Kind::App(a, b) | Kind::Pair(a, b) | Kind::Choice(a, b) => {
            out.push(a);
            out.push(b);
        }
        _ => {}
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::print::print_term(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::print::print_term(self))
    }
}
