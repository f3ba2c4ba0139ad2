//! Finite comparison of `n!` against `c * n^(3k) * log2(n!)`.
//!
//! The left side counts subsets of the tour space a formulation would have to
//! distinguish; the right side bounds the information content of a polynomial
//! number of polynomially-sized variables. The comparison is carried out with
//! exact integer arithmetic: `log2` is bracketed by bit lengths and the
//! bracket is tightened by repeated squaring until the two sides separate.

use num_bigint::BigUint;
use num_traits::One;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GapOrdering {
    LeftGreater,
    RightGreater,
    Equal,
}

fn factorial(n: u64) -> BigUint {
    let mut f = BigUint::one();
    for i in 2..=n {
        f *= BigUint::from(i);
    }
    f
}

/// Compares `n!` (left) with `c * n^(3k) * log2(n!)` (right) exactly.
///
/// For `n > 10` a sufficient condition is tried first: `(n-10)! > c * log2 n`
/// already forces the left side to dominate. Otherwise the comparison
/// `F  vs  P * log2(F)` (with `F = n!`, `P = c * n^(3k)`) is decided by
/// bracketing `2^m * P * log2 F = P * log2(F^(2^m))` between
/// `P * (bits(F^(2^m)) - 1)` and `P * bits(F^(2^m))` for growing `m`. Since
/// `n!` is never a power of two for `n >= 3`, `log2 F` is irrational and the
/// bracket always separates.
pub fn expressiveness_gap(n: u64, c: u64, k: u32) -> GapOrdering {
    assert!(n >= 3 && c >= 1 && k >= 1, "need n >= 3, c >= 1, k >= 1");

    if n > 10 {
        // ceil(log2 n) upper-bounds log2 n, so this check is conservative.
        let log_n_up = BigUint::from(64 - (n - 1).leading_zeros() as u64);
        if factorial(n - 10) > BigUint::from(c) * log_n_up {
            return GapOrdering::LeftGreater;
        }
    }

    let f = factorial(n);
    let p = BigUint::from(c) * BigUint::from(n).pow(3 * k);

    let mut power = f.clone(); // F^(2^m)
    let mut m = 0u32;
    loop {
        let bits = BigUint::from(power.bits());
        // 2^m * F  vs  P * log2(F^(2^m)), with log2 in [bits-1, bits).
        let left = &f << m;
        let hi = &p * &bits;
        let lo = &p * (&bits - BigUint::one());
        if left >= hi {
            return GapOrdering::LeftGreater;
        }
        if left <= lo {
            return GapOrdering::RightGreater;
        }
        m += 1;
        assert!(m <= 4096, "log2 bracket failed to separate");
        power = &power * &power;
    }
}
