//! Exact evaluation of the choice-only fragment by exploring its (finite)
//! execution tree.

use num_traits::Zero;
use thiserror::Error;

use crate::dist::Dist;
use crate::eval::{step, EvalError};
use crate::prob::{self, Prob};
use crate::syntax::Term;

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultistepError {
    #[error("exact tree evaluation only supports (+); found {0}")]
    Fragment(&'static str),
    #[error("execution tree exceeds {0} nodes")]
    NodeCap(u64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEval {
    pub exact_dist: Dist,
    /// Σ over leaves of depth × probability
    pub expected_steps: Prob,
    pub max_depth: u64,
    pub node_count: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeOptions {
    pub node_cap: u64,
    /// explore the right branch of each choice first
    pub reverse: bool,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions { node_cap: DEFAULT_NODE_CAP, reverse: false }
    }
}

pub fn exact_eval_plus(t: &Term) -> Result<TreeEval, MultistepError> {
    exact_eval_plus_with(t, TreeOptions::default())
}

pub fn exact_eval_plus_with(t: &Term, opts: TreeOptions) -> Result<TreeEval, MultistepError> {
    if t.has_rand() {
        return Err(MultistepError::Fragment("rand"));
    }
    if t.has_fixran() {
        return Err(MultistepError::Fragment("fixr"));
    }
    if t.has_srand() {
        return Err(MultistepError::Fragment("srand"));
    }
    let mut out = TreeEval { exact_dist: Dist::new(), expected_steps: prob::zero(), max_depth: 0, node_count: 0 };
    let mut stack: Vec<(Term, Prob, u64)> = vec![(t.clone(), prob::one(), 0)];
    while let Some((t, p, depth)) = stack.pop() {
        out.node_count += 1;
        if out.node_count > opts.node_cap {
            return Err(MultistepError::NodeCap(opts.node_cap));
        }
        if t.is_value() {
            out.max_depth = out.max_depth.max(depth);
            out.expected_steps += Prob::from_integer(depth.into()) * &p;
            out.exact_dist.add(t, p);
            continue;
        }
        let d = step(&t, 0)?;
        debug_assert!(d.residual().is_zero());
        let mut children: Vec<_> = d.iter().map(|(u, q)| (u.clone(), &p * q, depth + 1)).collect();
        // the stack pops from the back, so push in reverse of visiting order
        if !opts.reverse {
            children.reverse();
        }
        stack.extend(children);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;
    use crate::syntax::parse_term;

    #[test]
    fn doubleflip() {
        let t = parse_term("rec <0, \\x:Nat. \\y:Nat. y (+) S y, 2>").unwrap();
        let r = exact_eval_plus(&t).unwrap();
        assert_eq!(r.exact_dist.get(&Term::num(0)), ratio(1, 4));
        assert_eq!(r.exact_dist.get(&Term::num(1)), ratio(1, 2));
        assert_eq!(r.exact_dist.get(&Term::num(2)), ratio(1, 4));
        assert!(r.exact_dist.residual().is_zero());
    }

    #[test]
    fn value_is_a_leaf() {
        let r = exact_eval_plus(&Term::num(3)).unwrap();
        assert_eq!(r.exact_dist, Dist::dirac(Term::num(3)));
        assert!(r.expected_steps.is_zero());
        assert_eq!(r.node_count, 1);
    }

    #[test]
    fn rejects_other_constants() {
        assert_eq!(exact_eval_plus(&Term::rand()), Err(MultistepError::Fragment("rand")));
        let t = parse_term("fixr <S, 0>").unwrap();
        assert_eq!(exact_eval_plus(&t), Err(MultistepError::Fragment("fixr")));
    }

    #[test]
    fn node_cap_is_reported() {
        let t = parse_term("rec <0, \\x:Nat. \\y:Nat. y (+) S y, 6>").unwrap();
        let opts = TreeOptions { node_cap: 10, reverse: false };
        assert_eq!(exact_eval_plus_with(&t, opts), Err(MultistepError::NodeCap(10)));
    }
}
