//! Hall-Littlewood polynomial evaluation by symmetrization.
//!
//! P_lambda(x_1,...,x_n; t) is computed literally as
//!
//!   (1/v_lambda(t)) sum_{w in S_n} w( x_1^{lambda_1} ... x_n^{lambda_n}
//!                                     prod_{i<j} (x_i - t x_j)/(x_i - x_j) ),
//!
//! which costs n! terms and therefore carries a hard variable cap. This
//! module exists as an independent cross-check of the measure formulas, not
//! as a production evaluation path: the principal specialization
//! x_i = u/p^i, t = 1/p reproduces the rank-bounded general measure exactly.

use itertools::Itertools;
use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{pochhammer, pow, Rational};
use crate::partition::Partition;

/// n! symmetrization cap.
pub const MAX_VARIABLES: usize = 8;

/// v_lambda(t) = prod_{i>=0} prod_{j=1}^{m_i} (1 - t^j)/(1 - t), where
/// m_0 counts the zero parts, i.e. m_0 = n_vars - r(lambda).
pub fn v_lambda(lambda: &Partition, n_vars: u32, t: &Rational) -> Rational {
    assert!(n_vars >= lambda.num_parts(), "need at least r(lambda) variables");
    assert!(t != &Rational::one(), "v_lambda has a pole at t = 1");
    let mut mults: Vec<u32> = vec![n_vars - lambda.num_parts()];
    mults.extend(lambda.part_multiplicities().iter().map(|&(_, m)| m));
    let one = Rational::one();
    let mut acc = Rational::one();
    for m in mults {
        for j in 1..=m {
            acc *= (&one - pow(t, j as u64)) / (&one - t);
        }
    }
    acc
}

/// Exact evaluation of P_lambda(x; t) by full symmetrization.
///
/// The x values must be pairwise distinct (the kernel divides by x_i - x_j)
/// and nonzero, with r(lambda) <= |x| <= [`MAX_VARIABLES`]. Symmetric in x.
pub fn hl_eval(lambda: &Partition, x: &[Rational], t: &Rational) -> Result<Rational> {
    let n = x.len();
    if n > MAX_VARIABLES {
        return Err(Error::LimitExceeded(format!(
            "{n} variables exceeds the {MAX_VARIABLES}-variable symmetrization cap"
        )));
    }
    if (lambda.num_parts() as usize) > n {
        return Err(Error::InvalidParameter(format!(
            "{} variables cannot carry a partition with {} parts",
            n,
            lambda.num_parts()
        )));
    }
    if x.iter().any(|v| v.is_zero()) {
        return Err(Error::InvalidParameter("variables must be nonzero".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if x[i] == x[j] {
                return Err(Error::InvalidParameter(format!(
                    "variables must be pairwise distinct, x[{i}] = x[{j}] = {}",
                    x[i]
                )));
            }
        }
    }

    let mut exponents = vec![0u64; n];
    for (i, &part) in lambda.parts().iter().enumerate() {
        exponents[i] = part as u64;
    }
    let mut sum = Rational::zero();
    for perm in (0..n).permutations(n) {
        let mut term = Rational::one();
        for (i, &pi) in perm.iter().enumerate() {
            if exponents[i] != 0 {
                term *= pow(&x[pi], exponents[i]);
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (xi, xj) = (&x[perm[i]], &x[perm[j]]);
                term *= (xi - t * xj) / (xi - xj);
            }
        }
        sum += term;
    }
    Ok(sum / v_lambda(lambda, n as u32, t))
}

/// The rank-bounded general measure expressed through the principal
/// specialization:
///
///   prod_{i=1}^d (1 - u/p^i) * P_lambda(u/p, ..., u/p^d; 1/p) / p^{n(lambda)}.
///
/// Evaluated in exactly d variables; trailing zero variables would not
/// change the value for r(lambda) <= d and would break the symmetrization
/// kernel. Must agree with the measure's own mass function everywhere.
pub fn hl_pmf(lambda: &Partition, d: u32, u: &Rational, p: &Rational) -> Result<Rational> {
    if lambda.num_parts() > d {
        return Err(Error::InvalidParameter(format!(
            "partition has {} parts but d = {d}",
            lambda.num_parts()
        )));
    }
    let x: Vec<Rational> = (1..=d as u64).map(|i| u / pow(p, i)).collect();
    let value = hl_eval(lambda, &x, &p.recip())?;
    Ok(pochhammer(&(u / p), d, p) * value / pow(p, lambda.n_lambda()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn part(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn v_lambda_examples() {
        assert_eq!(v_lambda(&Partition::empty(), 2, &ratio(1, 2)), ratio(3, 2));
        for t in [ratio(1, 2), ratio(1, 3), ratio(2, 5)] {
            assert_eq!(v_lambda(&part(&[1]), 2, &t), int(1));
        }
        // m_1 = 2: (1-t)(1-t^2)/(1-t)^2 = 1 + t
        assert_eq!(v_lambda(&part(&[1, 1]), 2, &ratio(1, 3)), ratio(4, 3));
    }

    #[test]
    fn hl_eval_low_degree() {
        // empty partition: the symmetrized kernel normalizes to 1
        for n in 1..=3usize {
            let x: Vec<Rational> = (1..=n as i64).map(|i| ratio(1, 1 + i)).collect();
            assert_eq!(hl_eval(&Partition::empty(), &x, &ratio(1, 2)).unwrap(), int(1));
        }
        // single box: e_1 = x_1 + x_2 regardless of t
        let x = [ratio(1, 2), ratio(1, 4)];
        for t in [ratio(1, 2), ratio(1, 5)] {
            assert_eq!(hl_eval(&part(&[1]), &x, &t).unwrap(), ratio(3, 4));
        }
        // all-ones partition with n = r: e_n = x_1 x_2
        assert_eq!(hl_eval(&part(&[1, 1]), &x, &ratio(1, 2)).unwrap(), ratio(1, 8));
    }

    #[test]
    fn hl_eval_at_t_zero_is_schur() {
        let x = [ratio(1, 2), ratio(1, 3)];
        let s2 = &x[0] * &x[0] + &x[0] * &x[1] + &x[1] * &x[1];
        assert_eq!(hl_eval(&part(&[2]), &x, &int(0)).unwrap(), s2);
        let e2 = &x[0] * &x[1];
        assert_eq!(hl_eval(&part(&[1, 1]), &x, &int(0)).unwrap(), e2);
        let x3 = [ratio(1, 2), ratio(1, 3), ratio(1, 5)];
        let e1 = &x3[0] + &x3[1] + &x3[2];
        assert_eq!(hl_eval(&part(&[1]), &x3, &int(0)).unwrap(), e1);
    }

    #[test]
    fn hl_eval_rejects_bad_inputs() {
        assert!(hl_eval(&part(&[1]), &[ratio(1, 2), ratio(1, 2)], &int(0)).is_err());
        assert!(hl_eval(&part(&[1]), &[], &int(0)).is_err());
        assert!(hl_eval(&part(&[1]), &[int(0)], &int(0)).is_err());
        let too_many: Vec<Rational> = (1..=9).map(|i| ratio(1, i)).collect();
        assert!(hl_eval(&Partition::empty(), &too_many, &int(0)).is_err());
    }

    #[test]
    fn hl_eval_symmetric_under_permutation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let lam = part(&[2, 1]);
        let x: Vec<Rational> = vec![ratio(1, 2), ratio(1, 4), ratio(2, 3), ratio(-1, 5)];
        let reference = hl_eval(&lam, &x, &ratio(1, 3)).unwrap();
        for _ in 0..5 {
            let mut shuffled = x.clone();
            shuffled.shuffle(&mut rng);
            assert_eq!(hl_eval(&lam, &shuffled, &ratio(1, 3)).unwrap(), reference);
        }
    }

    #[test]
    fn hl_pmf_examples() {
        assert_eq!(hl_pmf(&Partition::empty(), 1, &int(1), &int(2)).unwrap(), ratio(1, 2));
        assert_eq!(hl_pmf(&part(&[1]), 1, &int(1), &int(2)).unwrap(), ratio(1, 4));
        assert_eq!(hl_pmf(&part(&[1]), 2, &int(1), &int(2)).unwrap(), ratio(9, 32));
    }
}
