// Shared corpora and independent checkers for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::Zero;

use probt::dist::Dist;
use probt::eval::{dist_step, evaluate, Budget, Mode};
use probt::prob::{self, Prob};
use probt::syntax::{parse_term, typecheck, Term, TypeEnv};

pub fn p(src: &str) -> Term {
    parse_term(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

pub const BRANCH: &str = "(3 (+) 4) (+) 2";
pub const GEO: &str = "fixr <S, 0>";
pub const DOUBLEFLIP: &str = "rec <0, \\x:Nat. \\y:Nat. y (+) S y, 2>";

/// n ↦ 2^(n+1), in time proportional to the result.
pub const EXPO: &str = "\\n:Nat. rec <1, \\x:Nat. \\y:Nat. rec <0, \\a:Nat. \\b:Nat. S (S b), y>, S n>";

/// Closed terms of type Nat using only ⊕.
pub const PLUS_CORPUS: &[&str] = &[
    "(3 (+) 4) (+) 2",
    "rec <0, \\x:Nat. \\y:Nat. y (+) S y, 2>",
    "(\\x:Nat. x (+) S x) (0 (+) 2)",
    "p1 <0 (+) 1, 5>",
    "(0 (+) 1) (+) (2 (+) 3)",
    "p2 <1 (+) 2, 3 (+) 4>",
    "((\\x:Nat. x) (+) (\\x:Nat. S x)) 4",
    "rec <1, \\x:Nat. \\y:Nat. S y (+) y, 0 (+) 3>",
    "(\\f:Nat->Nat. f (f 0)) (\\x:Nat. x (+) S (S x))",
    "S (S 0 (+) 0) (+) 7",
];

/// Closed terms of type Nat using rand or fixr (and possibly ⊕).
pub const RANDOM_CORPUS: &[&str] = &[
    "rand",
    "fixr <S, 0>",
    "fixr <\\z:Nat. S (S z), 0>",
    "rec <0, \\x:Nat. \\y:Nat. S y, rand>",
    "(\\x:Nat. x (+) rand) 3",
    "fixr <\\z:Nat. z (+) S z, 0>",
    "(\\x:Nat. rec <0, \\a:Nat. \\b:Nat. S (S b), x>) rand",
    "rand (+) 0",
    "fixr <\\f:Nat->Nat. \\x:Nat. f (S x), \\x:Nat. x> 0",
    "p1 <rand, fixr <S, 1>>",
];

/// T^R terms (rand only) for the register semantics and the approximant.
pub const TR_CORPUS: &[&str] = &[
    "rand",
    "(\\x:Nat. \\y:Nat. rec <x, \\a:Nat. \\b:Nat. S b, y>) rand rand",
    "rec <0, \\x:Nat. \\y:Nat. y (+) S y, rand>",
    "rand (+) 3",
    "(\\x:Nat. S x (+) x) rand",
    "(\\x:Nat. rec <0, \\a:Nat. \\b:Nat. S (S b), x>) rand",
];

/// Programs of type Nat -> Nat with few flips.
pub const FINITE_REP_CORPUS: &[&str] = &[
    "\\n:Nat. rec <0, \\x:Nat. \\y:Nat. y (+) S y, n>",
    "\\n:Nat. S n (+) (S n (+) 0)",
    "\\n:Nat. S (S n) (+) 0",
    "\\n:Nat. n",
    "\\n:Nat. (\\x:Nat. x (+) S x) (n (+) S n)",
    "\\n:Nat. p1 <n (+) 0, 0 (+) 1>",
];

pub fn exact(t: &Term) -> Dist {
    let r = evaluate(t, &Budget::default().with_epsilon(prob::zero()), Mode::Lockstep).unwrap();
    assert!(r.residual.is_zero(), "no exact evaluation within budget");
    r.value_dist
}

pub fn nat_map(d: &Dist) -> BTreeMap<u64, Prob> {
    d.nat_weights()
}

// ---- property checkers, shared by the proptest suites and acceptance ----

/// Iterates `dist_step` and checks mass conservation, monotone value mass,
/// dyadic weights and subject reduction along the way.
pub fn check_lockstep_invariants(t: &Term, rounds: usize, width: u32) -> Result<(), String> {
    let ty = typecheck(&TypeEnv::new(), t).map_err(|e| e.to_string())?;
    let mut d = Dist::dirac(t.clone());
    for round in 0..rounds {
        let next = dist_step(&d, width).map_err(|e| e.to_string())?;
        if next.total() != prob::one() {
            return Err(format!("round {round}: norm + residual = {}", prob::render(&next.total())));
        }
        for (u, w) in d.iter() {
            if u.is_value() && next.get(u) < *w {
                return Err(format!("round {round}: weight of {u} decreased"));
            }
        }
        for (u, w) in next.iter() {
            if !prob::is_dyadic(w) {
                return Err(format!("round {round}: weight {} is not dyadic", prob::render(w)));
            }
            match typecheck(&TypeEnv::new(), u) {
                Ok(t2) if t2 == ty => {}
                other => return Err(format!("round {round}: {u} has type {other:?}, expected {ty}")),
            }
        }
        if !prob::is_dyadic(next.residual()) {
            return Err(format!("round {round}: residual is not dyadic"));
        }
        d = next;
    }
    Ok(())
}

/// Σ|d1 − d2| ≤ r1 + r2: the two distributions have a common completion.
pub fn consistent(d1: &Dist, d2: &Dist) -> bool {
    probt::dist::tv_bounds(d1, d2).0.is_zero()
}

/// Evaluates `m n` directly and through the continuity decomposition:
/// evaluate m and n, then each `v w`.
pub fn continuity_gap(m: &Term, n: &Term, b: &Budget) -> (Dist, Dist) {
    let direct = evaluate(&Term::app(m.clone(), n.clone()), b, Mode::Lockstep).unwrap().value_dist;
    let dm = evaluate(m, b, Mode::Lockstep).unwrap().value_dist;
    let dn = evaluate(n, b, Mode::Lockstep).unwrap().value_dist;
    let composed =
        dm.bind(|v| dn.bind(|w| evaluate(&Term::app(v.clone(), w.clone()), b, Mode::Lockstep).unwrap().value_dist));
    (direct, composed)
}

/// Continuity corpus: (function, argument) pairs.
pub const CONTINUITY_CORPUS: &[(&str, &str)] = &[
    ("(\\x:Nat. x) (+) (\\x:Nat. S x)", "0 (+) 2"),
    ("\\x:Nat. rec <0, \\a:Nat. \\b:Nat. b (+) S b, x>", "1 (+) 2"),
    ("(\\y:Nat. \\x:Nat. x (+) y) rand", "fixr <S, 0>"),
    ("(\\x:Nat. S x) (+) (\\x:Nat. rand)", "3"),
];

/// A small distribution over numerals and two kernels, for associativity.
pub fn bind_assoc_holds(d: &Dist, k1: &dyn Fn(u64) -> Dist, k2: &dyn Fn(u64) -> Dist) -> bool {
    let nat = |t: &Term| t.as_nat().expect("numeral");
    let left = d.bind(|x| k1(nat(x))).bind(|y| k2(nat(y)));
    let right = d.bind(|x| k1(nat(x)).bind(|y| k2(nat(y))));
    // direct expansion: Σ_x Σ_y d(x) k1(x)(y) k2(y)(z)
    let mut direct = Dist::new();
    let mut res = d.residual().clone();
    for (x, wx) in d.iter() {
        let kx = k1(nat(x));
        res += wx * kx.residual();
        for (y, wy) in kx.iter() {
            let ky = k2(nat(y));
            res += wx * wy * ky.residual();
            for (z, wz) in ky.iter() {
                direct.add(z.clone(), wx * wy * wz);
            }
        }
    }
    direct.add_residual(&res);
    left == right && left == direct
}
