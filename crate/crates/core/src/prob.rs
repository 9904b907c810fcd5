//! Exact probabilities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Prob = BigRational;

pub fn zero() -> Prob {
    Prob::zero()
}

pub fn one() -> Prob {
    Prob::one()
}

pub fn ratio(n: i64, d: i64) -> Prob {
    Prob::new(BigInt::from(n), BigInt::from(d))
}

/// 2^-k
pub fn half_pow(k: u64) -> Prob {
    Prob::new(BigInt::one(), BigInt::one() << k)
}

/// Always `num/den`, including `0/1` and `1/1`.
pub fn render(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

/// Accepts `p/q`, a plain integer, or `2^-k`.
pub fn parse(s: &str) -> Result<Prob, String> {
    let s = s.trim();
    if let Some(k) = s.strip_prefix("2^-") {
        let k: u64 = k.parse().map_err(|_| format!("bad exponent in `{s}`"))?;
        return Ok(half_pow(k));
    }
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| format!("bad numerator in `{s}`"))?;
    let d: BigInt = d.parse().map_err(|_| format!("bad denominator in `{s}`"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    let p = Prob::new(n, d);
    if p.is_negative() {
        return Err(format!("negative probability `{s}`"));
    }
    Ok(p)
}

/// Denominator is a power of two.
pub fn is_dyadic(p: &Prob) -> bool {
    let d = p.denom();
    d.is_positive() && (d & (d - BigInt::one())).is_zero()
}

pub fn to_f64(p: &Prob) -> f64 {
    use num_traits::ToPrimitive;
    p.to_f64().unwrap_or(f64::NAN)
}
