//! Rising factorials and the per-block weights of the sampling formula.

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// `a (a+1) ... (a+len-1)`; the empty product when `len == 0`.
pub fn rising_factorial<T: Scalar>(a: &T, len: usize) -> T {
    let mut acc = T::one();
    let mut term = a.clone();
    for _ in 0..len {
        acc = acc * term.clone();
        term = term + T::one();
    }
    acc
}

pub fn factorial<T: Scalar>(m: usize) -> T {
    rising_factorial(&T::one(), m)
}

/// Checks `0 < alpha < 1`.
pub fn check_alpha<T: Scalar>(alpha: &T) -> Result<()> {
    if *alpha <= T::zero() || *alpha >= T::one() {
        return Err(domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

/// `-(-alpha)_{m}`, the weight a block of size `m` contributes to the
/// Pitman sampling formula. Equals `alpha (1-alpha)_{m-1}` and is positive.
pub fn alpha_weight<T: Scalar>(alpha: &T, m: usize) -> Result<T> {
    check_alpha(alpha)?;
    if m == 0 {
        return Err(domain("block size must be at least 1"));
    }
    Ok(-rising_factorial(&-alpha.clone(), m))
}

/// Number of `k`-subsets of an `l`-set.
pub fn binomial(l: usize, k: usize) -> u64 {
    if k > l {
        return 0;
    }
    let k = k.min(l - k);
    (0..k).fold(1u64, |acc, i| acc * (l - i) as u64 / (i as u64 + 1))
}
