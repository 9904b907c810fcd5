//! Syntax-directed typing with binder annotations.
//!
//! `p1`, `p2`, `rec` and `fixr` have schematic types; their instance is
//! read off the argument when they are applied, or off the expected type
//! when they appear unapplied in a checked position. The checker produces a
//! typed tree, which the transforms consume.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use super::print::print_term;
use super::term::{Kind, Name, Term};
use super::types::Type;

pub type TypeEnv = BTreeMap<Name, Type>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("type mismatch in `{term}`: expected {expected}, found {actual}")]
    Mismatch { term: String, expected: String, actual: String },
    #[error("cannot determine the type of `{0}` here; apply it or use it where its type is known")]
    Ambiguous(String),
    #[error("term contains a dangling bound variable")]
    Dangling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Const {
    Proj1,
    Proj2,
    Rec,
    Succ,
    Rand,
    FixRan,
    SRand,
}

impl Const {
    pub fn term(self) -> Term {
        match self {
            Const::Proj1 => Term::proj1(),
            Const::Proj2 => Term::proj2(),
            Const::Rec => Term::rec(),
            Const::Succ => Term::succ(),
            Const::Rand => Term::rand(),
            Const::FixRan => Term::fixran(),
            Const::SRand => Term::srand(),
        }
    }
}

/// A term annotated with the type of every node. Binder bodies are opened
/// with globally fresh names.
#[derive(Clone, Debug)]
pub struct Typed {
    pub ty: Type,
    pub node: TNode,
}

#[derive(Clone, Debug)]
pub enum TNode {
    Var(Name),
    Lam(Name, Type, Box<Typed>),
    App(Box<Typed>, Box<Typed>),
    Pair(Box<Typed>, Box<Typed>),
    Choice(Box<Typed>, Box<Typed>),
    Num(u64),
    Const(Const),
}

impl Typed {
    /// Rebuilds the (closed-over) term.
    pub fn term(&self) -> Term {
        match &self.node {
            TNode::Var(n) => Term::var(n),
            TNode::Lam(x, ty, b) => Term::lam(x, ty.clone(), b.term()),
            TNode::App(f, a) => Term::app(f.term(), a.term()),
            TNode::Pair(l, r) => Term::pair(l.term(), r.term()),
            TNode::Choice(l, r) => Term::choice(l.term(), r.term()),
            TNode::Num(n) => Term::num(*n),
            TNode::Const(c) => c.term(),
        }
    }

    /// Values extended with variables: the shapes that do not compute.
    pub fn is_ext_value(&self) -> bool {
        match &self.node {
            TNode::Var(_) | TNode::Lam(..) | TNode::Num(_) => true,
            TNode::Const(c) => !matches!(c, Const::Rand | Const::SRand),
            TNode::Pair(l, r) => l.is_ext_value() && r.is_ext_value(),
            TNode::App(f, a) => matches!(f.node, TNode::Const(Const::Succ)) && a.is_ext_value(),
            TNode::Choice(..) => false,
        }
    }
}

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A name no parsed program can contain (`#` is not an identifier character).
pub fn fresh_name(hint: &str) -> String {
    let hint = hint.split('#').next().unwrap_or("x");
    format!("{hint}#{}", FRESH.fetch_add(1, Ordering::Relaxed))
}

pub fn typecheck(env: &TypeEnv, t: &Term) -> Result<Type, TypeError> {
    Ok(elaborate(env, t)?.ty)
}

pub fn elaborate(env: &TypeEnv, t: &Term) -> Result<Typed, TypeError> {
    let mut env = env.clone();
    infer(&mut env, t)
}

/// Elaborates `t` against a known type (this also accepts unapplied
/// schematic constants).
pub fn elaborate_against(env: &TypeEnv, t: &Term, ty: &Type) -> Result<Typed, TypeError> {
    let mut env = env.clone();
    check(&mut env, t, ty)
}

fn mismatch(t: &Term, expected: impl ToString, actual: impl ToString) -> TypeError {
    TypeError::Mismatch { term: print_term(t), expected: expected.to_string(), actual: actual.to_string() }
}

fn typed(ty: Type, node: TNode) -> Typed {
    Typed { ty, node }
}

fn open_binder(env: &mut TypeEnv, hint: &Name, ty: &Type, body: &Term) -> (Name, Term, Option<Type>) {
    let x: Name = fresh_name(hint).into();
    let opened = body.open(&Term::var(&x));
    let prev = env.insert(x.clone(), ty.clone());
    (x, opened, prev)
}

fn infer(env: &mut TypeEnv, t: &Term) -> Result<Typed, TypeError> {
    match t.kind() {
        Kind::Bound(_) => Err(TypeError::Dangling),
        Kind::Free(x) => match env.get(x) {
            Some(ty) => Ok(typed(ty.clone(), TNode::Var(x.clone()))),
            None => Err(TypeError::Unbound(x.to_string())),
        },
        Kind::Num(n) => Ok(typed(Type::Nat, TNode::Num(*n))),
        Kind::Succ => Ok(typed(Type::arrow(Type::Nat, Type::Nat), TNode::Const(Const::Succ))),
        Kind::Rand => Ok(typed(Type::Nat, TNode::Const(Const::Rand))),
        Kind::SRand => Ok(typed(Type::Nat, TNode::Const(Const::SRand))),
        Kind::Proj1 | Kind::Proj2 | Kind::Rec | Kind::FixRan => Err(TypeError::Ambiguous(print_term(t))),
        Kind::Lam(hint, ty, body) => {
            let (x, opened, prev) = open_binder(env, hint, ty, body);
            let b = infer(env, &opened);
            restore(env, &x, prev);
            let b = b?;
            Ok(typed(Type::arrow(ty.clone(), b.ty.clone()), TNode::Lam(x, ty.clone(), Box::new(b))))
        }
        Kind::App(f, a) => {
            if let Some(c) = schematic(f) {
                let ta = infer(env, a)?;
                let res = instantiate(c, &ta.ty).ok_or_else(|| mismatch(a, shape(c), &ta.ty))?;
                let fty = Type::arrow(ta.ty.clone(), res.clone());
                return Ok(typed(res, TNode::App(Box::new(typed(fty, TNode::Const(c))), Box::new(ta))));
            }
            let tf = infer(env, f)?;
            let Some((dom, cod)) = tf.ty.as_arrow() else {
                return Err(mismatch(f, "a function type", &tf.ty));
            };
            let (dom, cod) = (dom.clone(), cod.clone());
            let ta = check(env, a, &dom)?;
            Ok(typed(cod, TNode::App(Box::new(tf), Box::new(ta))))
        }
        Kind::Pair(l, r) => {
            let tl = infer(env, l)?;
            let tr = infer(env, r)?;
            Ok(typed(Type::product(tl.ty.clone(), tr.ty.clone()), TNode::Pair(Box::new(tl), Box::new(tr))))
        }
        Kind::Choice(l, r) => {
            let tl = infer(env, l)?;
            let tr = check(env, r, &tl.ty)?;
            Ok(typed(tl.ty.clone(), TNode::Choice(Box::new(tl), Box::new(tr))))
        }
    }
}

fn check(env: &mut TypeEnv, t: &Term, want: &Type) -> Result<Typed, TypeError> {
    match t.kind() {
        Kind::Proj1 | Kind::Proj2 | Kind::Rec | Kind::FixRan => {
            let c = schematic(t).unwrap();
            let ok = match want.as_arrow() {
                Some((dom, cod)) => instantiate(c, dom).as_ref() == Some(cod),
                None => false,
            };
            if ok {
                Ok(typed(want.clone(), TNode::Const(c)))
            } else {
                Err(mismatch(t, want, shape(c)))
            }
        }
        Kind::Lam(hint, ty, body) => {
            let Some((_, cod)) = want.as_arrow().filter(|(dom, _)| *dom == ty) else {
                let got = infer(env, t)?;
                return Err(mismatch(t, want, &got.ty));
            };
            let cod = cod.clone();
            let (x, opened, prev) = open_binder(env, hint, ty, body);
            let b = check(env, &opened, &cod);
            restore(env, &x, prev);
            Ok(typed(want.clone(), TNode::Lam(x, ty.clone(), Box::new(b?))))
        }
        Kind::Pair(l, r) => {
            let Some((a, b)) = want.as_product() else {
                let got = infer(env, t)?;
                return Err(mismatch(t, want, &got.ty));
            };
            let (a, b) = (a.clone(), b.clone());
            let tl = check(env, l, &a)?;
            let tr = check(env, r, &b)?;
            Ok(typed(want.clone(), TNode::Pair(Box::new(tl), Box::new(tr))))
        }
        Kind::Choice(l, r) => {
            let tl = check(env, l, want)?;
            let tr = check(env, r, want)?;
            Ok(typed(want.clone(), TNode::Choice(Box::new(tl), Box::new(tr))))
        }
        _ => {
            let got = infer(env, t)?;
            if &got.ty == want {
                Ok(got)
            } else {
                Err(mismatch(t, want, &got.ty))
            }
        }
    }
}

fn restore(env: &mut TypeEnv, x: &Name, prev: Option<Type>) {
    match prev {
        Some(ty) => env.insert(x.clone(), ty),
        None => env.remove(x),
    };
}

fn schematic(t: &Term) -> Option<Const> {
    match t.kind() {
        Kind::Proj1 => Some(Const::Proj1),
        Kind::Proj2 => Some(Const::Proj2),
        Kind::Rec => Some(Const::Rec),
        Kind::FixRan => Some(Const::FixRan),
        _ => None,
    }
}

fn shape(c: Const) -> &'static str {
    match c {
        Const::Proj1 | Const::Proj2 => "a pair type a * b",
        Const::Rec => "a * (Nat -> a -> a) * Nat",
        Const::FixRan => "(a -> a) * a",
        _ => unreachable!(),
    }
}

/// Result type of a schematic constant applied to an argument of type `arg`.
fn instantiate(c: Const, arg: &Type) -> Option<Type> {
    let (a, b) = arg.as_product()?;
    match c {
        Const::Proj1 => Some(a.clone()),
        Const::Proj2 => Some(b.clone()),
        Const::FixRan => {
            let (d, e) = a.as_arrow()?;
            (d == e && e == b).then(|| b.clone())
        }
        Const::Rec => {
            let (step, n) = b.as_product()?;
            let (k, rest) = step.as_arrow()?;
            let (x, y) = rest.as_arrow()?;
            (*k == Type::Nat && *n == Type::Nat && x == a && y == a).then(|| a.clone())
        }
        _ => None,
    }
}
