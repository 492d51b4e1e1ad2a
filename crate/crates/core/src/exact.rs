//! Exact rational scalars and q-series primitives.
//!
//! Everything downstream is assembled from a handful of building blocks:
//!
//! - [`Rational`]: arbitrary-precision rational numbers, always in lowest
//!   terms with a positive denominator. All probabilities and counts in this
//!   crate are `Rational`s; floating point appears only in display helpers.
//! - [`pochhammer`]: the descending product (x)_i = (1-x)(1-x/p)···(1-x/p^{i-1}).
//! - [`pochhammer_infinite`]: a rigorous [`IntervalRational`] enclosure of the
//!   infinite product prod_{i>=1} (1 - x/p^i).
//! - [`q_int`], [`q_factorial`], [`q_binomial`]: Gaussian binomial machinery,
//!   valid for any rational q > 1.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar. `num`'s `BigRational` already maintains the
/// lowest-terms / positive-denominator invariant on every operation.
pub type Rational = BigRational;

/// Rational from a machine integer.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `base^exp` for a natural exponent.
pub fn pow(base: &Rational, exp: u64) -> Rational {
    let e = i32::try_from(exp).expect("exponent out of range");
    base.pow(e)
}

/// Parses "a/b" or "a" in base 10.
pub fn parse_rational(s: &str) -> Result<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
}

/// Renders `x` as a plain decimal with `sig` significant digits
/// (round-half-up). Exact values stay exact elsewhere; this is display only.
pub fn to_decimal_string(x: &Rational, sig: usize) -> String {
    assert!(sig > 0);
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let a = x.numer().abs();
    let b = x.denom().clone();
    // decimal exponent e with 10^e <= a/b < 10^{e+1}
    let mut e = a.to_string().len() as i64 - b.to_string().len() as i64;
    let ten = BigInt::from(10);
    let scale = |k: i64| -> (BigInt, BigInt) {
        // returns (a', b') with a'/b' = (a/b) * 10^k
        if k >= 0 {
            (a.clone() * ten.pow(k as u32), b.clone())
        } else {
            (a.clone(), b.clone() * ten.pow((-k) as u32))
        }
    };
    loop {
        let (na, nb) = scale(-e);
        if na < nb {
            e -= 1;
        } else if na >= nb.clone() * &ten {
            e += 1;
        } else {
            break;
        }
    }
    // digits = round(a/b * 10^{sig-1-e})
    let (na, nb) = scale(sig as i64 - 1 - e);
    let mut digits = ((na * 2u8 + &nb) / (nb * 2u8)).to_string();
    if digits.len() > sig {
        // rounding carried over, e.g. 0.999996 -> 1.00000
        e += 1;
        digits.truncate(sig);
    }
    let sign = if neg { "-" } else { "" };
    let body = if e >= 0 && (e as usize) < sig + 4 {
        let ip = e as usize + 1;
        if ip >= digits.len() {
            format!("{}{}", &digits, "0".repeat(ip - digits.len()))
        } else {
            format!("{}.{}", &digits[..ip], &digits[ip..])
        }
    } else if e < 0 && e >= -6 {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], e)
    };
    format!("{sign}{body}")
}

/// Descending Pochhammer product (x)_i = prod_{j=0}^{i-1} (1 - x/p^j).
///
/// With x = u/p this yields (u/p)_i = prod_{j=1}^{i} (1 - u/p^j), the form
/// every probability mass in this crate is written in. The empty product
/// (i = 0) is 1. Panics if p <= 1.
pub fn pochhammer(x: &Rational, count: u32, p: &Rational) -> Rational {
    assert!(p > &Rational::one(), "pochhammer requires p > 1");
    let one = Rational::one();
    let mut acc = Rational::one();
    let mut cur = x.clone();
    for _ in 0..count {
        acc *= &one - &cur;
        cur /= p;
    }
    acc
}

/// (1/p)_m = prod_{j=1}^{m} (1 - 1/p^j).
pub fn poch_recip(p: &Rational, m: u32) -> Rational {
    pochhammer(&p.recip(), m, p)
}

/// prod_{i=a}^{b} (1 - 1/p^i); empty when a > b.
pub fn poch_range(p: &Rational, a: u32, b: u32) -> Rational {
    let one = Rational::one();
    let mut acc = Rational::one();
    for i in a..=b {
        acc *= &one - pow(p, i as u64).recip();
    }
    acc
}

/// Closed interval [lower, upper] of rationals. Used only to enclose
/// infinite products and tail sums; every finite quantity stays an exact
/// [`Rational`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalRational {
    lower: Rational,
    upper: Rational,
}

impl IntervalRational {
    pub fn new(lower: Rational, upper: Rational) -> Self {
        assert!(lower <= upper, "interval bounds out of order");
        IntervalRational { lower, upper }
    }

    /// Degenerate interval holding a single exact value.
    pub fn point(value: Rational) -> Self {
        IntervalRational { lower: value.clone(), upper: value }
    }

    pub fn lower(&self) -> &Rational {
        &self.lower
    }

    pub fn upper(&self) -> &Rational {
        &self.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn midpoint(&self) -> Rational {
        (&self.upper + &self.lower) / int(2)
    }

    pub fn contains(&self, value: &Rational) -> bool {
        &self.lower <= value && value <= &self.upper
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    /// Scales by a nonnegative exact factor.
    pub fn scale(&self, c: &Rational) -> Self {
        assert!(!c.is_negative(), "scale factor must be nonnegative");
        IntervalRational { lower: &self.lower * c, upper: &self.upper * c }
    }

    pub fn add(&self, other: &Self) -> Self {
        IntervalRational {
            lower: &self.lower + &other.lower,
            upper: &self.upper + &other.upper,
        }
    }

    /// Product of two intervals with nonnegative lower bounds.
    pub fn mul_nonneg(&self, other: &Self) -> Self {
        assert!(!self.lower.is_negative() && !other.lower.is_negative());
        IntervalRational {
            lower: &self.lower * &other.lower,
            upper: &self.upper * &other.upper,
        }
    }

    /// Quotient of two intervals, both with positive lower bounds.
    pub fn div_pos(&self, other: &Self) -> Self {
        assert!(!self.lower.is_negative() && other.lower.is_positive());
        IntervalRational {
            lower: &self.lower / &other.upper,
            upper: &self.upper / &other.lower,
        }
    }
}

impl std::fmt::Display for IntervalRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.lower)
        } else {
            write!(f, "[{}, {}]", self.lower, self.upper)
        }
    }
}

/// Encloses the infinite product prod_{i>=1} (1 - x/p^i).
///
/// The upper bound is the partial product through `terms` factors; the lower
/// bound multiplies it by 1 - sum_{i>terms} x/p^i (the Weierstrass bound for
/// the omitted tail), clamped at 0. Requires p > 1 and 0 <= x < p so that
/// every factor is positive; rejects x outside that range.
pub fn pochhammer_infinite(x: &Rational, p: &Rational, terms: u32) -> Result<IntervalRational> {
    if p <= &Rational::one() {
        return Err(Error::InvalidParameter(format!("p must be > 1, got {p}")));
    }
    if x.is_negative() || x >= p {
        return Err(Error::InvalidParameter(format!(
            "infinite Pochhammer needs 0 <= x < p, got x={x}, p={p}"
        )));
    }
    let one = Rational::one();
    let mut partial = Rational::one();
    let mut cur = x / p;
    for _ in 0..terms {
        partial *= &one - &cur;
        cur /= p;
    }
    // sum_{i>terms} x/p^i = x / (p^terms (p-1))
    let tail_sum = x / (pow(p, terms as u64) * (p - &one));
    let lower_factor = &one - &tail_sum;
    let lower = if lower_factor.is_positive() { &partial * lower_factor } else { Rational::zero() };
    Ok(IntervalRational::new(lower, partial))
}

/// Refines [`pochhammer_infinite`] until the enclosure is narrower than
/// `width`. The width shrinks geometrically in the term count, so this always
/// terminates for valid inputs.
pub fn pochhammer_infinite_to_width(
    x: &Rational,
    p: &Rational,
    width: &Rational,
) -> Result<IntervalRational> {
    let mut terms = 16;
    loop {
        let enc = pochhammer_infinite(x, p, terms)?;
        if &enc.width() <= width {
            return Ok(enc);
        }
        terms = terms.checked_mul(2).expect("term count overflow");
        assert!(terms <= 1 << 22, "enclosure failed to reach target width");
    }
}

/// Default enclosure width for rank-unbounded measures: 2^-64.
pub fn default_enclosure_width() -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << 64)
}

/// q-integer [n]_q = (q^n - 1)/(q - 1) = 1 + q + ... + q^{n-1}.
pub fn q_int(n: u32, q: &Rational) -> Rational {
    assert!(q > &Rational::one(), "q-integer requires q > 1");
    (pow(q, n as u64) - Rational::one()) / (q - &Rational::one())
}

/// q-factorial [n]_q! = [n]_q [n-1]_q ··· [2]_q.
pub fn q_factorial(n: u32, q: &Rational) -> Rational {
    let mut acc = Rational::one();
    for i in 2..=n {
        acc *= q_int(i, q);
    }
    acc
}

/// Gaussian binomial coefficient [n choose j]_q = [n]_q!/([j]_q! [n-j]_q!).
///
/// Computed as prod_{i=1}^{j} [n-j+i]_q/[i]_q; always a polynomial value in
/// q, hence an integer whenever q is. Panics if j > n or q <= 1.
pub fn q_binomial(n: u32, j: u32, q: &Rational) -> Rational {
    assert!(j <= n, "q_binomial requires j <= n (got n={n}, j={j})");
    assert!(q > &Rational::one(), "q_binomial requires q > 1");
    let mut acc = Rational::one();
    for i in 1..=j {
        acc *= q_int(n - j + i, q) / q_int(i, q);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pochhammer_empty_product() {
        assert_eq!(pochhammer(&int(1), 0, &int(2)), int(1));
    }

    #[test]
    fn pochhammer_two_terms_by_hand() {
        // (1 - 1/2)(1 - 1/4) = 3/8
        assert_eq!(pochhammer(&ratio(1, 2), 2, &int(2)), ratio(3, 8));
        // (1 - 1/3)(1 - 1/9) = 16/27
        assert_eq!(pochhammer(&int(1), 2, &int(3)), ratio(16, 27));
    }

    #[test]
    #[should_panic(expected = "p > 1")]
    fn pochhammer_rejects_small_p() {
        pochhammer(&int(1), 1, &int(1));
    }

    #[test]
    fn pochhammer_infinite_at_zero_is_one() {
        let enc = pochhammer_infinite(&int(0), &int(2), 5).unwrap();
        assert_eq!(enc, IntervalRational::point(int(1)));
    }

    #[test]
    fn pochhammer_infinite_width_bound() {
        // x=1, p=2, 40 terms: width below 2^-38
        let enc = pochhammer_infinite(&int(1), &int(2), 40).unwrap();
        assert!(enc.width() < Rational::new(BigInt::one(), BigInt::one() << 38));
        // and still encloses the 60-term partial product
        let tighter = pochhammer_infinite(&int(1), &int(2), 60).unwrap();
        assert!(enc.contains(tighter.lower()) && enc.contains(tighter.upper()));
    }

    #[test]
    fn pochhammer_infinite_one_term_by_hand() {
        // x=1/2, p=2, one term: partial = 1 - 1/4 = 3/4,
        // tail sum = (1/2)/(2*(2-1)) = 1/4, so [9/16, 3/4].
        let enc = pochhammer_infinite(&ratio(1, 2), &int(2), 1).unwrap();
        assert_eq!(enc.lower(), &ratio(9, 16));
        assert_eq!(enc.upper(), &ratio(3, 4));
    }

    #[test]
    fn pochhammer_infinite_rejects_x_at_least_p() {
        assert!(pochhammer_infinite(&int(2), &int(2), 4).is_err());
        assert!(pochhammer_infinite(&int(3), &int(2), 4).is_err());
    }

    #[test]
    fn q_binomial_small_values() {
        assert_eq!(q_binomial(2, 1, &int(2)), int(3)); // 1 + q at q=2
        assert_eq!(q_binomial(4, 2, &int(2)), int(35));
        assert_eq!(q_binomial(5, 0, &int(3)), int(1));
    }

    #[test]
    #[should_panic(expected = "j <= n")]
    fn q_binomial_rejects_j_above_n() {
        q_binomial(2, 3, &int(2));
    }

    #[test]
    fn q_binomial_symmetry_and_pascal() {
        // [n j]_q = [n n-j]_q and [n j]_q = [n-1 j-1]_q + q^j [n-1 j]_q,
        // exhaustively for n <= 12 over a small grid of rational q.
        for q in [int(2), int(3), ratio(7, 2), ratio(5, 2)] {
            for n in 0u32..=12 {
                for j in 0..=n {
                    let b = q_binomial(n, j, &q);
                    assert_eq!(b, q_binomial(n, n - j, &q));
                    if n > 0 && j > 0 && j < n {
                        let rec = q_binomial(n - 1, j - 1, &q)
                            + pow(&q, j as u64) * q_binomial(n - 1, j, &q);
                        assert_eq!(b, rec);
                    }
                }
            }
        }
    }

    #[test]
    fn q_binomial_integral_for_integer_q() {
        for n in 0u32..=10 {
            for j in 0..=n {
                assert!(q_binomial(n, j, &int(2)).is_integer());
                assert!(q_binomial(n, j, &int(5)).is_integer());
            }
        }
    }

    #[test]
    fn rational_string_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("-2/6").unwrap(), ratio(-1, 3));
        assert_eq!(ratio(9, 32).to_string(), "9/32");
        assert_eq!(int(5).to_string(), "5");
        assert!(parse_rational("x/y").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal_string(&ratio(1, 2), 12), "0.500000000000");
        assert_eq!(to_decimal_string(&int(0), 12), "0");
        assert_eq!(to_decimal_string(&ratio(-1, 3), 6), "-0.333333");
        assert_eq!(to_decimal_string(&int(1000), 4), "1000");
        assert_eq!(to_decimal_string(&ratio(9999999, 10000000), 6), "1.00000");
    }

    proptest! {
        // (x)_{i+1} = (x)_i * (1 - x/p^i)
        #[test]
        fn pochhammer_recurrence(xn in -20i64..20, xd in 1i64..20, i in 0u32..12,
                                 pn in 3i64..40, pd in 1i64..2) {
            let x = ratio(xn, xd);
            let p = ratio(pn, pd * 2); // p in (3/2, 20)
            prop_assume!(p > int(1));
            let lhs = pochhammer(&x, i + 1, &p);
            let rhs = pochhammer(&x, i, &p) * (int(1) - x / pow(&p, i as u64));
            prop_assert_eq!(lhs, rhs);
        }

        // enclosures are nested: more terms never widens
        #[test]
        fn pochhammer_infinite_nested(xn in 0i64..10, pn in 2i64..10, t in 1u32..40) {
            let x = ratio(xn, 7);
            let p = int(pn);
            prop_assume!(x < p);
            let coarse = pochhammer_infinite(&x, &p, t).unwrap();
            let fine = pochhammer_infinite(&x, &p, t + 1).unwrap();
            prop_assert!(coarse.lower() <= fine.lower());
            prop_assert!(fine.upper() <= coarse.upper());
        }
    }
}
