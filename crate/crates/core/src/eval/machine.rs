//! Reduction with an explicit, shared evaluation context.
//!
//! A configuration is a context (a persistent stack of frames) around a
//! redex. After a contraction the machine refocuses from where it was, so
//! a step costs time proportional to the work done rather than to the size
//! of the whole term. Only contractions count as steps, so depths agree with
//! the whole-term semantics of `step`.

use std::collections::{BinaryHeap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use indexmap::IndexMap;
use num_traits::Zero;

use super::step::Fired;
use super::EvalError;
use crate::prob::{self, Prob};
use crate::syntax::{Kind, Term};

enum FrameKind {
    /// `f □`, the function not yet evaluated
    Arg(Term),
    /// `□ v`, the argument already a value
    Fun(Term),
    /// `<□, r>`
    PairL(Term),
    /// `<v, □>`
    PairR(Term),
}

struct Frame {
    kind: FrameKind,
    next: Ctx,
    hash: u64,
}

#[derive(Clone, Default)]
pub(crate) struct Ctx(Option<Arc<Frame>>);

impl Ctx {
    fn hash(&self) -> u64 {
        self.0.as_ref().map_or(0x9e37_79b9, |f| f.hash)
    }

    fn push(self, kind: FrameKind) -> Ctx {
        let (tag, t) = match &kind {
            FrameKind::Arg(t) => (1u64, t),
            FrameKind::Fun(t) => (2, t),
            FrameKind::PairL(t) => (3, t),
            FrameKind::PairR(t) => (4, t),
        };
        let hash = (self.hash().rotate_left(7) ^ t.hash() ^ tag).wrapping_mul(0x2545_f491_4f6c_dd1d);
        Ctx(Some(Arc::new(Frame { kind, next: self, hash })))
    }
}

impl PartialEq for Ctx {
    fn eq(&self, other: &Ctx) -> bool {
        let (mut a, mut b) = (self, other);
        loop {
            match (&a.0, &b.0) {
                (None, None) => return true,
                (Some(x), Some(y)) => {
                    if Arc::ptr_eq(x, y) {
                        return true;
                    }
                    if x.hash != y.hash {
                        return false;
                    }
                    let same = match (&x.kind, &y.kind) {
                        (FrameKind::Arg(s), FrameKind::Arg(t))
                        | (FrameKind::Fun(s), FrameKind::Fun(t))
                        | (FrameKind::PairL(s), FrameKind::PairL(t))
                        | (FrameKind::PairR(s), FrameKind::PairR(t)) => s == t,
                        _ => false,
                    };
                    if !same {
                        return false;
                    }
                    a = &x.next;
                    b = &y.next;
                }
                _ => return false,
            }
        }
    }
}

impl Eq for Ctx {}

impl Drop for Frame {
    fn drop(&mut self) {
        let mut next = self.next.0.take();
        while let Some(arc) = next {
            match Arc::into_inner(arc) {
                Some(mut frame) => next = frame.next.0.take(),
                None => break,
            }
        }
    }
}

pub(crate) enum Focus {
    Value(Term),
    Redex(Ctx, Term),
}

/// Descends (call-by-value, argument before function, pairs left to right)
/// to the next redex, or climbs back out with a value.
pub(crate) fn refocus(mut ctx: Ctx, mut t: Term) -> Result<Focus, EvalError> {
    loop {
        if t.is_value() {
            let Some(frame) = ctx.0.clone() else {
                return Ok(Focus::Value(t));
            };
            ctx = frame.next.clone();
            match &frame.kind {
                FrameKind::Arg(f) => {
                    ctx = ctx.push(FrameKind::Fun(t));
                    t = f.clone();
                }
                FrameKind::Fun(v) => {
                    if matches!(t.kind(), Kind::Succ) {
                        t = Term::app(t, v.clone());
                    } else {
                        return Ok(Focus::Redex(ctx, Term::app(t, v.clone())));
                    }
                }
                FrameKind::PairL(r) => {
                    ctx = ctx.push(FrameKind::PairR(t));
                    t = r.clone();
                }
                FrameKind::PairR(l) => t = Term::pair(l.clone(), t),
            }
        } else {
            match t.kind() {
                Kind::App(f, a) => {
                    if !a.is_value() {
                        let (f, a) = (f.clone(), a.clone());
                        ctx = ctx.push(FrameKind::Arg(f));
                        t = a;
                    } else if !f.is_value() {
                        let (f, a) = (f.clone(), a.clone());
                        ctx = ctx.push(FrameKind::Fun(a));
                        t = f;
                    } else {
                        return Ok(Focus::Redex(ctx, t));
                    }
                }
                Kind::Pair(l, r) => {
                    let (l, r) = (l.clone(), r.clone());
                    if !l.is_value() {
                        ctx = ctx.push(FrameKind::PairL(r));
                        t = l;
                    } else {
                        ctx = ctx.push(FrameKind::PairR(l));
                        t = r;
                    }
                }
                Kind::Choice(..) | Kind::Rand | Kind::SRand => return Ok(Focus::Redex(ctx, t)),
                Kind::Free(x) => return Err(EvalError::Open(x.to_string())),
                _ => return Err(super::step::stuck(&t)),
            }
        }
    }
}

/// What a redex turns into under some semantics (plain, or with registers).
pub(crate) enum Firing<R> {
    Det(Term),
    Branch { outs: Vec<(Term, Prob, R)>, failure: Prob },
}

impl<R: Clone> Firing<R> {
    pub(crate) fn from_fired(f: Fired, regs: &R) -> Firing<R> {
        match f {
            Fired::Det(t) => Firing::Det(t),
            Fired::Branch(outs, _tail) => Firing::Branch {
                outs: outs.into_iter().map(|(t, p)| (t, p, regs.clone())).collect(),
                failure: prob::zero(),
            },
        }
    }
}

#[derive(Clone)]
struct Conf<R> {
    ctx: Ctx,
    redex: Term,
    regs: R,
}

impl<R: Hash> Hash for Conf<R> {
    fn hash<H: Hasher>(&self, h: &mut H) {
        h.write_u64(self.ctx.hash());
        h.write_u64(self.redex.hash());
        self.regs.hash(h);
    }
}

impl<R: PartialEq> PartialEq for Conf<R> {
    fn eq(&self, o: &Self) -> bool {
        self.redex == o.redex && self.regs == o.regs && self.ctx == o.ctx
    }
}

impl<R: Eq> Eq for Conf<R> {}

/// Outcome of running a configuration to (truncated) completion.
pub(crate) struct Run<R> {
    pub values: IndexMap<(Term, R), Prob>,
    pub per_depth: Vec<(u64, Prob)>,
    /// mass removed by an explicit failure (the register semantics)
    pub failure: Prob,
    /// 1 − values − failure: unexplored configurations and truncated tails
    pub residual: Prob,
    pub steps: u64,
}

impl<R> Run<R> {
    pub(crate) fn avlength(&self) -> Prob {
        self.per_depth.iter().map(|(d, m)| Prob::from_integer((*d).into()) * m).sum()
    }
}

struct Acc<R> {
    values: IndexMap<(Term, R), Prob>,
    per_depth: Vec<(u64, Prob)>,
    failure: Prob,
    residual: Prob,
}

impl<R: Clone + Eq + Hash> Acc<R> {
    fn new() -> Self {
        Acc { values: IndexMap::new(), per_depth: Vec::new(), failure: prob::zero(), residual: prob::one() }
    }

    fn finish(&mut self, v: Term, regs: R, p: Prob, depth: u64) {
        self.residual -= &p;
        match self.per_depth.last_mut() {
            Some((d, m)) if *d == depth => *m += &p,
            _ => self.per_depth.push((depth, p.clone())),
        }
        *self.values.entry((v, regs)).or_default() += p;
    }

    fn fail(&mut self, p: Prob) {
        self.residual -= &p;
        self.failure += p;
    }

    fn into_run(self, steps: u64) -> Run<R> {
        Run { values: self.values, per_depth: self.per_depth, failure: self.failure, residual: self.residual, steps }
    }
}

/// Lockstep: every live configuration takes one step per round, so a value
/// found in round n was reached in exactly n steps. Configurations that
/// coincide after a branching round are merged.
pub(crate) fn lockstep<R, F>(t: &Term, regs: R, max_steps: u64, eps: &Prob, mut fire: F) -> Result<Run<R>, EvalError>
where
    R: Clone + Eq + Hash,
    F: FnMut(&Term, &R, &Prob) -> Result<Firing<R>, EvalError>,
{
    let mut acc = Acc::new();
    let mut live: Vec<(Conf<R>, Prob)> = Vec::new();
    match refocus(Ctx::default(), t.clone())? {
        Focus::Value(v) => acc.finish(v, regs, prob::one(), 0),
        Focus::Redex(ctx, redex) => live.push((Conf { ctx, redex, regs }, prob::one())),
    }
    let mut depth = 0u64;
    let mut done = acc.residual <= *eps;
    while !live.is_empty() && depth < max_steps && !done {
        depth += 1;
        let mut next: Vec<(Conf<R>, Prob)> = Vec::with_capacity(live.len());
        let mut branched = false;
        let mut resolved = false;
        for (c, p) in live.drain(..) {
            match fire(&c.redex, &c.regs, &p)? {
                Firing::Det(t) => match refocus(c.ctx, t)? {
                    Focus::Value(v) => {
                        acc.finish(v, c.regs, p, depth);
                        resolved = true;
                    }
                    Focus::Redex(ctx, redex) => next.push((Conf { ctx, redex, regs: c.regs }, p)),
                },
                Firing::Branch { outs, failure } => {
                    branched = true;
                    resolved = true;
                    if !failure.is_zero() {
                        acc.fail(&p * failure);
                    }
                    for (t, q, regs) in outs {
                        let pq = &p * q;
                        match refocus(c.ctx.clone(), t)? {
                            Focus::Value(v) => acc.finish(v, regs, pq, depth),
                            Focus::Redex(ctx, redex) => next.push((Conf { ctx, redex, regs }, pq)),
                        }
                    }
                }
            }
        }
        if branched {
            next = merge(next);
        }
        live = next;
        if resolved {
            done = acc.residual <= *eps;
        }
    }
    Ok(acc.into_run(depth))
}

fn merge<R: Clone + Eq + Hash>(v: Vec<(Conf<R>, Prob)>) -> Vec<(Conf<R>, Prob)> {
    let mut index: HashMap<Conf<R>, usize> = HashMap::with_capacity(v.len());
    let mut out: Vec<(Conf<R>, Prob)> = Vec::with_capacity(v.len());
    for (c, p) in v {
        match index.get(&c) {
            Some(&i) => out[i].1 += p,
            None => {
                index.insert(c.clone(), out.len());
                out.push((c, p));
            }
        }
    }
    out
}

struct Queued<R> {
    mass: Prob,
    seq: u64,
    depth: u64,
    conf: Conf<R>,
}

impl<R> PartialEq for Queued<R> {
    fn eq(&self, o: &Self) -> bool {
        self.seq == o.seq
    }
}
impl<R> Eq for Queued<R> {}
impl<R> PartialOrd for Queued<R> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<R> Ord for Queued<R> {
    // heaviest first, then oldest first
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.mass.cmp(&o.mass).then_with(|| o.seq.cmp(&self.seq))
    }
}

/// Worklist: always expands the heaviest pending configuration by one step.
/// `max_steps` bounds the number of expansions.
pub(crate) fn worklist<R, F>(t: &Term, regs: R, max_steps: u64, eps: &Prob, mut fire: F) -> Result<Run<R>, EvalError>
where
    R: Clone + Eq + Hash,
    F: FnMut(&Term, &R, &Prob) -> Result<Firing<R>, EvalError>,
{
    let mut acc = Acc::new();
    let mut heap: BinaryHeap<Queued<R>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut per_depth: std::collections::BTreeMap<u64, Prob> = Default::default();
    let mut finish = |acc: &mut Acc<R>, v: Term, regs: R, p: Prob, depth: u64| {
        *per_depth.entry(depth).or_default() += &p;
        acc.residual -= &p;
        *acc.values.entry((v, regs)).or_default() += p;
    };
    match refocus(Ctx::default(), t.clone())? {
        Focus::Value(v) => finish(&mut acc, v, regs, prob::one(), 0),
        Focus::Redex(ctx, redex) => {
            heap.push(Queued { mass: prob::one(), seq, depth: 0, conf: Conf { ctx, redex, regs } })
        }
    }
    let mut expansions = 0u64;
    while expansions < max_steps && acc.residual > *eps {
        let Some(q) = heap.pop() else { break };
        expansions += 1;
        let depth = q.depth + 1;
        let c = q.conf;
        let p = q.mass;
        let outs: Vec<(Term, Prob, R)> = match fire(&c.redex, &c.regs, &p)? {
            Firing::Det(t) => vec![(t, prob::one(), c.regs.clone())],
            Firing::Branch { outs, failure } => {
                if !failure.is_zero() {
                    acc.fail(&p * failure);
                }
                outs
            }
        };
        for (t, q, regs) in outs {
            let pq = &p * q;
            match refocus(c.ctx.clone(), t)? {
                Focus::Value(v) => finish(&mut acc, v, regs, pq, depth),
                Focus::Redex(ctx, redex) => {
                    seq += 1;
                    heap.push(Queued { mass: pq, seq, depth, conf: Conf { ctx, redex, regs } });
                }
            }
        }
    }
    acc.per_depth = per_depth.into_iter().collect();
    Ok(acc.into_run(expansions))
}

/// Runs a term that never branches to its value.
pub(crate) fn run_deterministic(t: &Term, max_steps: u64) -> Result<(Term, u64), EvalError> {
    let mut focus = refocus(Ctx::default(), t.clone())?;
    let mut steps = 0u64;
    loop {
        match focus {
            Focus::Value(v) => return Ok((v, steps)),
            Focus::Redex(ctx, redex) => {
                if steps >= max_steps {
                    return Err(EvalError::Exhausted(max_steps));
                }
                steps += 1;
                match super::step::contract(&redex, 0)? {
                    Fired::Det(t) => focus = refocus(ctx, t)?,
                    Fired::Branch(..) => return Err(EvalError::NotDeterministic(crate::syntax::print_term(&redex))),
                }
            }
        }
    }
}

/// Follows a single trajectory, letting `choose` resolve each branching.
pub(crate) fn trajectory(
    t: &Term,
    max_steps: u64,
    mut choose: impl FnMut(&Term) -> Option<Term>,
) -> Result<Option<(Term, u64)>, EvalError> {
    let mut focus = refocus(Ctx::default(), t.clone())?;
    let mut steps = 0u64;
    loop {
        match focus {
            Focus::Value(v) => return Ok(Some((v, steps))),
            Focus::Redex(ctx, redex) => {
                if steps >= max_steps {
                    return Ok(None);
                }
                steps += 1;
                let next = match choose(&redex) {
                    Some(t) => t,
                    None => match super::step::contract(&redex, 0)? {
                        Fired::Det(t) => t,
                        Fired::Branch(..) => unreachable!("branching redexes are resolved by `choose`"),
                    },
                };
                focus = refocus(ctx, next)?;
            }
        }
    }
}
