//! Terminating hypergeometric series and log-domain combinatorics.
//!
//! Every closed form in this crate reduces to finite sums of the shape
//! `Σ_k (−m)_k … z^k / ((b)_k k!)`. The sums are accumulated term by term in
//! the log domain with explicit sign tracking so that atom numbers in the
//! hundreds never overflow intermediate factorials.

use crate::error::{Error, Result};

/// Value of a terminating series together with the number of terms that
/// were accumulated (always the terminating degree plus one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminatingSeries {
    pub value: f64,
    pub terms_summed: usize,
}

/// Signed terms stored as `(ln|t|, negative)`.
#[derive(Debug, Default)]
struct LogTerms {
    terms: Vec<(f64, bool)>,
}

impl LogTerms {
    fn with_capacity(n: usize) -> Self {
        Self {
            terms: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, ln_abs: f64, negative: bool) {
        self.terms.push((ln_abs, negative));
    }

    fn sum(&self) -> f64 {
        let max = self
            .terms
            .iter()
            .map(|&(l, _)| l)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return 0.0;
        }
        let scaled: f64 = self
            .terms
            .iter()
            .map(|&(l, neg)| {
                let t = (l - max).exp();
                if neg {
                    -t
                } else {
                    t
                }
            })
            .sum();
        scaled * max.exp()
    }
}

fn check_no_pole(b: f64, m: u64, what: &str) -> Result<()> {
    if !b.is_finite() {
        return Err(Error::Domain(format!("{what} parameter must be finite")));
    }
    // (b)_k vanishes for some k < m iff b is a non-positive integer > −m.
    if b <= 0.0 && b.fract() == 0.0 && -b < m as f64 {
        return Err(Error::Domain(format!(
            "{what} parameter {b} hits a pole inside the summation range"
        )));
    }
    Ok(())
}

/// Kummer's `₁F₁(−m; b; z)` as the finite sum of its `m + 1` terms.
///
/// For the dark-state argument `z = −N cot²θ` all terms are nonnegative so
/// the sum is cancellation free.
pub fn kummer_1f1_neg(m: u64, b: f64, z: f64) -> Result<TerminatingSeries> {
    check_no_pole(b, m, "lower")?;
    if !z.is_finite() {
        return Err(Error::Domain("argument must be finite".into()));
    }
    let mut terms = LogTerms::with_capacity(m as usize + 1);
    let (mut ln_t, mut neg) = (0.0_f64, false);
    terms.push(ln_t, neg);
    for k in 1..=m {
        let i = (k - 1) as f64;
        let factor = (i - m as f64) * z / ((b + i) * k as f64);
        ln_t += factor.abs().ln();
        neg ^= factor < 0.0;
        terms.push(ln_t, neg);
    }
    Ok(TerminatingSeries {
        value: terms.sum(),
        terms_summed: m as usize + 1,
    })
}

/// Gauss `₂F₁(−m1, −m2; c; z)` for `z ∈ [0, 1]`; terminates after
/// `min(m1, m2) + 1` terms.
pub fn gauss_2f1_negneg(m1: u64, m2: u64, c: f64, z: f64) -> Result<TerminatingSeries> {
    let degree = m1.min(m2);
    check_no_pole(c, degree, "lower")?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("argument {z} outside [0, 1]")));
    }
    let mut terms = LogTerms::with_capacity(degree as usize + 1);
    let (mut ln_t, mut neg) = (0.0_f64, false);
    terms.push(ln_t, neg);
    for k in 1..=degree {
        let i = (k - 1) as f64;
        let factor = (i - m1 as f64) * (i - m2 as f64) * z / ((c + i) * k as f64);
        ln_t += factor.abs().ln();
        neg ^= factor < 0.0;
        terms.push(ln_t, neg);
    }
    Ok(TerminatingSeries {
        value: terms.sum(),
        terms_summed: degree as usize + 1,
    })
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Exact binomial in `u128`, or `None` on overflow.
fn exact_binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Natural log of `C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("binomial C({n}, {k}) with k > n")));
    }
    if let Some(exact) = exact_binomial(n, k) {
        return Ok((exact as f64).ln());
    }
    let k = k.min(n - k);
    Ok(compensated_sum(
        (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()),
    ))
}

/// Natural log of `n!`.
pub fn log_factorial(n: u64) -> f64 {
    compensated_sum((2..=n).map(|i| (i as f64).ln()))
}

/// Natural log of the rising factorial `(x)_k = x (x+1) … (x+k−1)` for `x > 0`.
pub fn log_rising(x: f64, k: u64) -> f64 {
    compensated_sum((0..k).map(|i| (x + i as f64).ln()))
}
