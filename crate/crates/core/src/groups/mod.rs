//! Exact counts attached to finite abelian p-groups of type lambda:
//! automorphism and symplectic-automorphism orders, subgroup counts
//! n_lambda(mu), surjection counts, torsion counts, surjection moments with
//! rigorous truncation tails, the sublattice zeta identity, and the
//! moment-uniqueness hypothesis check.
//!
//! All formulas are polynomial/rational in p and evaluate exactly for any
//! rational p > 1; when p is a prime integer they are the literal cardinal
//! counts, and [`brute`] provides enumeration oracles for that case.

pub mod brute;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{
    self, int, poch_recip, pochhammer, pochhammer_infinite, pow, q_binomial, IntervalRational,
    Rational,
};
use crate::measures::{MeasureSpec, MeasureValue};
use crate::partition::{partitions_of_size, partitions_up_to_size, Partition};

/// Rank bound of a measure: finite d, or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankBound {
    Finite(u32),
    Infinite,
}

impl std::fmt::Display for RankBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankBound::Finite(d) => write!(f, "{d}"),
            RankBound::Infinite => write!(f, "inf"),
        }
    }
}

/// |Aut(lambda)| = p^{sum (lambda'_i)^2} prod_i (1/p)_{m_i(lambda)}.
///
/// A positive integer when p is an integer; for non-integer rational p > 1
/// this product is taken as the definition.
pub fn aut_order(lambda: &Partition, p: &Rational) -> Rational {
    assert!(p > &Rational::one(), "aut_order requires p > 1");
    let mut acc = pow(p, lambda.sum_conjugate_squares());
    for (_, m) in lambda.part_multiplicities() {
        acc *= poch_recip(p, m);
    }
    acc
}

/// Order of the symplectic automorphism group attached to a nondegenerate
/// alternating pairing on H x H, H of type lambda:
/// p^{4 n(lambda) + 3 |lambda|} prod_i prod_{j=1}^{m_i} (1 - 1/p^{2j}).
pub fn sp_order(lambda: &Partition, p: &Rational) -> Rational {
    assert!(p > &Rational::one(), "sp_order requires p > 1");
    let p2 = p * p;
    let mut acc = pow(p, 4 * lambda.n_lambda() + 3 * lambda.size());
    for (_, m) in lambda.part_multiplicities() {
        acc *= poch_recip(&p2, m);
    }
    acc
}

/// n_lambda(mu): the number of subgroups of type mu inside a group of type
/// lambda, as the standard product
///
///   prod_{i>=1} p^{mu'_{i+1} (lambda'_i - mu'_i)}
///              [lambda'_i - mu'_{i+1} choose mu'_i - mu'_{i+1}]_p.
///
/// Returns 0 when mu is not contained in lambda. The product form is gated
/// by the enumeration oracle in [`brute`] throughout the test suite.
pub fn subgroup_count(lambda: &Partition, mu: &Partition, p: &Rational) -> Rational {
    assert!(p > &Rational::one(), "subgroup_count requires p > 1");
    if !lambda.contains(mu) {
        return Rational::zero();
    }
    let mut acc = Rational::one();
    for i in 1..=lambda.largest_part() {
        let lc = lambda.conjugate_part(i);
        let mc = mu.conjugate_part(i);
        let mc_next = mu.conjugate_part(i + 1);
        acc *= pow(p, mc_next as u64 * (lc - mc) as u64);
        acc *= q_binomial(lc - mc_next, mc - mc_next, p);
    }
    acc
}

/// |Sur(lambda, mu)| = n_lambda(mu) |Aut(mu)|.
pub fn sur_count(lambda: &Partition, mu: &Partition, p: &Rational) -> Rational {
    subgroup_count(lambda, mu, p) * aut_order(mu, p)
}

/// T_ell(lambda) = p^{lambda'_1 + ... + lambda'_ell}: the number of
/// p^ell-torsion elements, equivalently the number of homomorphisms into a
/// cyclic group of order p^ell.
pub fn torsion_count(lambda: &Partition, ell: u32, p: &Rational) -> Rational {
    assert!(ell >= 1);
    assert!(p > &Rational::one());
    pow(p, lambda.conjugate_prefix_sum(ell))
}

/// The mu-moment (expected surjection count onto a fixed group of type mu)
/// of the rank-<= d measure with parameters (u, p):
/// u^{|mu|} (1/p)_d / (1/p)_{d - r(mu)} when r(mu) <= d, else 0.
/// The unbounded-rank limit is exactly u^{|mu|}.
pub fn moment_closed_form(mu: &Partition, d: RankBound, u: &Rational, p: &Rational) -> Rational {
    validate_general_params(u, p);
    let r = mu.num_parts();
    match d {
        RankBound::Finite(d) => {
            if r > d {
                Rational::zero()
            } else {
                pow(u, mu.size()) * poch_recip(p, d) / poch_recip(p, d - r)
            }
        }
        // the Pochhammer ratio tends to 1
        RankBound::Infinite => pow(u, mu.size()),
    }
}

/// Expected p^ell-torsion count under the rank-<= d measure:
/// (u^ell + ... + u)(1 - p^{-d}) + 1.
pub fn torsion_expectation(ell: u32, d: RankBound, u: &Rational, p: &Rational) -> Rational {
    assert!(ell >= 1);
    validate_general_params(u, p);
    let geom: Rational = (1..=ell).map(|j| pow(u, j as u64)).fold(Rational::zero(), |a, b| a + b);
    geom * one_minus_p_to_minus_d(d, p) + Rational::one()
}

/// Expected number of elements of order exactly p^ell: u^ell (1 - p^{-d}).
pub fn torsion_expectation_exact_order(
    ell: u32,
    d: RankBound,
    u: &Rational,
    p: &Rational,
) -> Rational {
    assert!(ell >= 1);
    validate_general_params(u, p);
    pow(u, ell as u64) * one_minus_p_to_minus_d(d, p)
}

fn one_minus_p_to_minus_d(d: RankBound, p: &Rational) -> Rational {
    match d {
        RankBound::Finite(d) => Rational::one() - pow(p, d as u64).recip(),
        RankBound::Infinite => Rational::one(),
    }
}

fn validate_general_params(u: &Rational, p: &Rational) {
    assert!(p > &Rational::one(), "requires p > 1");
    assert!(u.is_positive() && u < p, "requires 0 < u < p");
}

/// A truncated sum together with a rigorous bound on the omitted tail: the
/// true value lies in [partial.lower, partial.upper + tail_bound].
#[derive(Debug, Clone)]
pub struct TruncatedSum {
    pub partial: IntervalRational,
    pub tail_bound: Rational,
}

impl TruncatedSum {
    pub fn encloses(&self, value: &Rational) -> bool {
        self.partial.lower() <= value && *value <= self.partial.upper() + &self.tail_bound
    }
}

/// Truncated mu-moment: sum over |lambda| <= max_size of
/// pmf(lambda) |Sur(lambda, mu)|, plus a rigorous tail bound. The closed
/// form of [`moment_closed_form`] always lies inside the enclosure.
pub fn moment_truncated(
    mu: &Partition,
    d: RankBound,
    u: &Rational,
    p: &Rational,
    max_size: u32,
) -> Result<TruncatedSum> {
    // |Sur(lambda, mu)| <= p^{|mu| r(lambda)}: each of the r(mu) generator
    // images lies in the p^{mu_j}-torsion, of size <= p^{mu_j r(lambda)}.
    let mu = mu.clone();
    truncated_expectation(d, u, p, max_size, mu.size() as u32, &|lam| {
        sur_count(lam, &mu, p)
    })
}

/// Truncated expectation of T_ell with a rigorous tail bound.
pub fn torsion_truncated(
    ell: u32,
    d: RankBound,
    u: &Rational,
    p: &Rational,
    max_size: u32,
) -> Result<TruncatedSum> {
    assert!(ell >= 1);
    // T_ell(lambda) <= p^{ell r(lambda)}
    truncated_expectation(d, u, p, max_size, ell, &|lam| torsion_count(lam, ell, p))
}

/// Shared truncation engine: sums f(lambda) pmf(lambda) over
/// |lambda| <= max_size and bounds the tail, given the growth certificate
/// 0 <= f(lambda) <= p^{growth * r(lambda)}.
fn truncated_expectation(
    d: RankBound,
    u: &Rational,
    p: &Rational,
    max_size: u32,
    growth: u32,
    f: &dyn Fn(&Partition) -> Rational,
) -> Result<TruncatedSum> {
    validate_general_params(u, p);
    let spec = MeasureSpec::general(p.clone(), u.clone(), d)?;
    let mut partial = IntervalRational::point(Rational::zero());
    for lam in partitions_up_to_size(max_size) {
        if let RankBound::Finite(d) = d {
            if lam.num_parts() > d {
                continue;
            }
        }
        let mass = match spec.pmf(&lam) {
            MeasureValue::Exact(v) => IntervalRational::point(v),
            MeasureValue::Enclosure(enc) => enc,
        };
        partial = partial.add(&mass.scale(&f(&lam)));
    }
    let tail = match d {
        RankBound::Finite(dd) => {
            // r(lambda) <= d throughout, so f <= p^{growth*d} uniformly.
            pow(p, growth as u64 * dd as u64) * spec.tail_bound_size(max_size)?
        }
        RankBound::Infinite => infinite_rank_tail(u, p, max_size, growth)?,
    };
    Ok(TruncatedSum { partial, tail_bound: tail })
}

/// Tail bound for the unbounded-rank measure: split on the number of parts.
/// For any R,
///   sum_{|lambda|>N} pmf f <= p^{growth R} P(size > N)
///                           + sum_{r>R} p^{growth r} P(parts = r),
/// with P(parts = r) <= u^r UB((u/p)_inf) / (p^{r^2} (1/p)_r (u/p)_r).
/// The best R over a small range is returned.
fn infinite_rank_tail(u: &Rational, p: &Rational, max_size: u32, growth: u32) -> Result<Rational> {
    let terms = 64;
    let ub_upoch = pochhammer_infinite(u, p, terms)?.upper().clone();
    let lb_poch1 = pochhammer_infinite(&Rational::one(), p, terms)?.lower().clone();
    assert!(lb_poch1.is_positive());
    // P(size > N) <= sum_{n>N} (u/p)^n UB/(1/p)_inf = UB (u/p)^{N+1}/((1-u/p) LB)
    let up = u / p;
    let size_tail = &ub_upoch * pow(&up, max_size as u64 + 1)
        / ((Rational::one() - &up) * &lb_poch1);

    let parts_term = |r: u32| -> Rational {
        &ub_upoch * pow(u, r as u64) * pow(p, growth as u64 * r as u64)
            / (pow(p, r as u64 * r as u64)
                * poch_recip(p, r)
                * pochhammer(&(u / p), r, p))
    };
    // sum_{r > R} parts_term(r): walk until the term ratio certifies <= 1/2,
    // then close geometrically. The ratio from r to r+1 is
    //   u p^{growth - 2r - 1} / ((1 - p^{-(r+1)})(1 - u p^{-(r+1)})),
    // decreasing in r.
    let parts_tail = |cap: u32| -> Rational {
        let mut acc = Rational::zero();
        let mut r = cap + 1;
        loop {
            let t = parts_term(r);
            let denom = (Rational::one() - pow(p, r as u64 + 1).recip())
                * (Rational::one() - u / pow(p, r as u64 + 1));
            let ratio = u * pow(p, growth as u64) / (pow(p, 2 * r as u64 + 1) * denom);
            if ratio <= exact::ratio(1, 2) {
                return acc + t * int(2);
            }
            acc += t;
            r += 1;
            assert!(r < cap + 500, "parts tail failed to converge");
        }
    };

    let mut best: Option<Rational> = None;
    for cap in growth..growth + 40 {
        let bound = pow(p, growth as u64 * cap as u64) * &size_tail + parts_tail(cap);
        if best.as_ref().is_none_or(|b| &bound < b) {
            best = Some(bound);
        }
    }
    Ok(best.expect("nonempty candidate range"))
}

/// Both sides of the sublattice-count identity behind the size marginal:
/// summing n_{lambda*}(lambda) over |lambda| = n with at most d parts
/// (lambda* the d-fold rectangle) against the closed form
/// p^{n(d-1)} (1/p)_{d+n-1} / ((1/p)_{d-1} (1/p)_n).
pub fn subgroup_zeta_check(d: u32, n: u32, p: &Rational) -> (Rational, Rational) {
    assert!(d >= 1);
    assert!(p > &Rational::one());
    let rect = Partition::new(vec![n.max(1); d as usize]).expect("rectangle is a partition");
    let mut lhs = Rational::zero();
    for lam in partitions_of_size(n, Some(d)) {
        lhs += subgroup_count(&rect, &lam, p);
    }
    let rhs = pow(p, n as u64 * (d as u64 - 1)) * poch_recip(p, d + n - 1)
        / (poch_recip(p, d - 1) * poch_recip(p, n));
    (lhs, rhs)
}

/// Whether 1/(u/p)_d < 2, the hypothesis under which the surjection moments
/// pin down the distribution uniquely. For unbounded rank the interval
/// enclosure of (u/p)_inf is refined until it excludes 1/2.
pub fn moments_unique_condition(d: RankBound, u: &Rational, p: &Rational) -> Result<bool> {
    validate_general_params(u, p);
    let half = exact::ratio(1, 2);
    match d {
        RankBound::Finite(d) => Ok(pochhammer(&(u / p), d, p) > half),
        RankBound::Infinite => {
            let mut terms = 32;
            while terms <= 1 << 15 {
                let enc = pochhammer_infinite(u, p, terms)?;
                if enc.lower() > &half {
                    return Ok(true);
                }
                if enc.upper() < &half {
                    return Ok(false);
                }
                terms *= 2;
            }
            Err(Error::Indeterminate(format!(
                "(u/p)_inf too close to 1/2 for u={u}, p={p}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn part(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn aut_order_examples() {
        assert_eq!(aut_order(&Partition::empty(), &int(2)), int(1));
        // invertible 2x2 matrices over the 2-element field
        assert_eq!(aut_order(&part(&[1, 1]), &int(2)), int(6));
        // automorphisms of a cyclic group of order 9
        assert_eq!(aut_order(&part(&[2]), &int(3)), int(6));
    }

    #[test]
    fn sp_order_examples() {
        assert_eq!(sp_order(&Partition::empty(), &int(2)), int(1));
        // 2x2 determinant-one matrices over F_2 and F_3
        assert_eq!(sp_order(&part(&[1]), &int(2)), int(6));
        assert_eq!(sp_order(&part(&[1]), &int(3)), int(24));
    }

    #[test]
    fn subgroup_count_examples() {
        assert_eq!(subgroup_count(&part(&[1]), &part(&[1]), &int(2)), int(1));
        // three order-2 subgroups of the Klein group
        assert_eq!(subgroup_count(&part(&[1, 1]), &part(&[1]), &int(2)), int(3));
        // unique order-3 subgroup of a cyclic group of order 9
        assert_eq!(subgroup_count(&part(&[2]), &part(&[1]), &int(3)), int(1));
        // cyclic group has no rank-2 subgroup
        assert_eq!(subgroup_count(&part(&[2]), &part(&[1, 1]), &int(2)), int(0));
    }

    #[test]
    fn sur_count_examples() {
        for k in 1..=4 {
            assert_eq!(sur_count(&part(&[k]), &part(&[1]), &int(2)), int(1));
        }
        assert_eq!(sur_count(&part(&[1, 1]), &part(&[1]), &int(2)), int(3));
        assert_eq!(sur_count(&part(&[1]), &part(&[2]), &int(2)), int(0));
    }

    #[test]
    fn torsion_count_examples() {
        assert_eq!(torsion_count(&Partition::empty(), 1, &int(2)), int(1));
        assert_eq!(torsion_count(&part(&[2, 1]), 1, &int(2)), int(4));
        assert_eq!(torsion_count(&part(&[2, 1]), 2, &int(2)), int(8));
    }

    #[test]
    fn moment_closed_form_examples() {
        let m = moment_closed_form(&part(&[1]), RankBound::Finite(1), &int(1), &int(2));
        assert_eq!(m, ratio(1, 2));
        // direct sum over the support of the d=1 measure:
        // sum_k pmf((k)) * |Sur((k),(1))| = sum_k 2^{-k-1} = 1/2
        let zero = moment_closed_form(&part(&[1, 1, 1]), RankBound::Finite(2), &int(1), &int(2));
        assert_eq!(zero, int(0));
        assert_eq!(
            moment_closed_form(&Partition::empty(), RankBound::Finite(3), &ratio(1, 2), &int(2)),
            int(1)
        );
        assert_eq!(
            moment_closed_form(&part(&[2, 1]), RankBound::Infinite, &ratio(1, 2), &int(2)),
            ratio(1, 8)
        );
    }

    #[test]
    fn torsion_expectation_examples() {
        assert_eq!(torsion_expectation(1, RankBound::Finite(1), &int(1), &int(2)), ratio(3, 2));
        assert_eq!(torsion_expectation(1, RankBound::Infinite, &int(1), &int(2)), int(2));
        // ell=2, d=1: (u^2+u)/2 + 1 at u=1/3, p=2
        let u = ratio(1, 3);
        assert_eq!(
            torsion_expectation(2, RankBound::Finite(1), &u, &int(2)),
            (&u * &u + &u) / int(2) + int(1)
        );
        assert_eq!(
            torsion_expectation_exact_order(2, RankBound::Finite(1), &int(1), &int(2)),
            ratio(1, 2)
        );
    }

    #[test]
    fn zeta_check_examples() {
        for k in 0..5 {
            let (lhs, rhs) = subgroup_zeta_check(1, k, &int(2));
            assert_eq!(lhs, int(1));
            assert_eq!(rhs, int(1));
        }
        let (lhs, rhs) = subgroup_zeta_check(2, 1, &int(2));
        assert_eq!(lhs, int(3));
        assert_eq!(rhs, int(3));
        let (lhs, rhs) = subgroup_zeta_check(2, 2, &int(2));
        assert_eq!(lhs, int(7));
        assert_eq!(rhs, int(7));
    }

    #[test]
    fn moment_truncation_encloses_closed_form() {
        // mu=(1), d=1, u=1, p=2: partial sum through size 12 is within
        // 2^{-10} of 1/2 and the enclosure holds.
        let ts = moment_truncated(&part(&[1]), RankBound::Finite(1), &int(1), &int(2), 12).unwrap();
        let closed = ratio(1, 2);
        assert!(ts.encloses(&closed));
        assert!((closed - ts.partial.upper()).abs() < Rational::new(1.into(), 1024.into()));
        // mu=(1), d=2, u=1/2, p=2: closed form 3/8
        let ts = moment_truncated(&part(&[1]), RankBound::Finite(2), &ratio(1, 2), &int(2), 16)
            .unwrap();
        let closed = moment_closed_form(&part(&[1]), RankBound::Finite(2), &ratio(1, 2), &int(2));
        assert_eq!(closed, ratio(3, 8));
        assert!(ts.encloses(&closed));
    }

    #[test]
    fn moment_truncation_unbounded_rank() {
        let ts =
            moment_truncated(&part(&[1]), RankBound::Infinite, &ratio(1, 2), &int(2), 16).unwrap();
        assert!(ts.encloses(&ratio(1, 2)));
        let ts = torsion_truncated(1, RankBound::Infinite, &int(1), &int(3), 16).unwrap();
        assert!(ts.encloses(&int(2)));
    }

    #[test]
    fn uniqueness_condition_cases() {
        assert!(moments_unique_condition(RankBound::Infinite, &int(1), &int(3)).unwrap());
        assert!(!moments_unique_condition(RankBound::Infinite, &int(1), &int(2)).unwrap());
        // small u: product >= 1 - u/(p-1) = 7/8 > 1/2
        assert!(moments_unique_condition(RankBound::Infinite, &ratio(1, 8), &int(2)).unwrap());
        assert!(moments_unique_condition(RankBound::Finite(1), &int(1), &int(3)).unwrap());
    }
}
