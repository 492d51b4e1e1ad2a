//! The probability measures on partitions, with exact masses.
//!
//! Five families are provided through [`MeasureSpec`]:
//!
//! - `general:p=..,u=..,d=..` — the two-parameter rank-bounded family; u = 1
//!   recovers the square-matrix cokernel law of dimension d.
//! - `general:p=..,u=..,d=inf` — its rank-unbounded limit (masses are
//!   interval enclosures around the infinite product).
//! - `alt:p=..,n=..` — the cokernel law of n x n alternating matrices
//!   (n even); equals the general family at (p^2, p, n/2).
//! - `sym:p=..,n=..` — the cokernel law of n x n symmetric matrices.
//! - `syminf:p=..` — its n -> infinity limit.
//!
//! Finite-parameter masses are exact [`Rational`]s; the two limit families
//! return [`IntervalRational`] enclosures with caller-controlled width.
//! Closed-form marginals (number of parts; size; joint) and a rigorous
//! geometric tail bound for size truncation round out the module.

use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{
    default_enclosure_width, poch_range, poch_recip, pochhammer, pochhammer_infinite_to_width,
    pow, q_binomial, IntervalRational, Rational,
};
use crate::groups::{aut_order, RankBound};
use crate::partition::{partitions_of_size, Partition};

/// One measure in the family: tag plus validated parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureSpec {
    GeneralDU { p: Rational, u: Rational, d: u32 },
    GeneralInfU { p: Rational, u: Rational },
    Alternating { p: Rational, n: u32 },
    Symmetric { p: Rational, n: u32 },
    SymmetricInf { p: Rational },
}

/// An exact mass, or a rigorous enclosure when the measure involves an
/// infinite product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureValue {
    Exact(Rational),
    Enclosure(IntervalRational),
}

impl MeasureValue {
    pub fn lower(&self) -> Rational {
        match self {
            MeasureValue::Exact(v) => v.clone(),
            MeasureValue::Enclosure(e) => e.lower().clone(),
        }
    }

    pub fn upper(&self) -> Rational {
        match self {
            MeasureValue::Exact(v) => v.clone(),
            MeasureValue::Enclosure(e) => e.upper().clone(),
        }
    }

    pub fn midpoint(&self) -> Rational {
        match self {
            MeasureValue::Exact(v) => v.clone(),
            MeasureValue::Enclosure(e) => e.midpoint(),
        }
    }

    pub fn expect_exact(&self) -> &Rational {
        match self {
            MeasureValue::Exact(v) => v,
            MeasureValue::Enclosure(_) => panic!("expected an exact mass"),
        }
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureValue::Exact(v) => write!(f, "{v}"),
            MeasureValue::Enclosure(e) => write!(f, "{e}"),
        }
    }
}

fn check_p(p: &Rational) -> Result<()> {
    if p <= &Rational::one() {
        return Err(Error::InvalidParameter(format!("p must be > 1, got {p}")));
    }
    Ok(())
}

fn check_u(u: &Rational, p: &Rational) -> Result<()> {
    if !u.is_positive() || u >= p {
        return Err(Error::InvalidParameter(format!("u must satisfy 0 < u < p, got u={u}, p={p}")));
    }
    Ok(())
}

impl MeasureSpec {
    /// The rank-bounded or rank-unbounded general family.
    pub fn general(p: Rational, u: Rational, d: RankBound) -> Result<Self> {
        check_p(&p)?;
        check_u(&u, &p)?;
        match d {
            RankBound::Finite(d) => {
                if d == 0 {
                    return Err(Error::InvalidParameter("d must be >= 1".into()));
                }
                Ok(MeasureSpec::GeneralDU { p, u, d })
            }
            RankBound::Infinite => Ok(MeasureSpec::GeneralInfU { p, u }),
        }
    }

    /// Cokernel law of n x n alternating matrices; n must be even.
    pub fn alternating(p: Rational, n: u32) -> Result<Self> {
        check_p(&p)?;
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "alternating family needs even n >= 2, got {n}"
            )));
        }
        Ok(MeasureSpec::Alternating { p, n })
    }

    /// Cokernel law of n x n symmetric matrices.
    pub fn symmetric(p: Rational, n: u32) -> Result<Self> {
        check_p(&p)?;
        if n == 0 {
            return Err(Error::InvalidParameter("symmetric family needs n >= 1".into()));
        }
        Ok(MeasureSpec::Symmetric { p, n })
    }

    pub fn symmetric_inf(p: Rational) -> Result<Self> {
        check_p(&p)?;
        Ok(MeasureSpec::SymmetricInf { p })
    }

    pub fn p(&self) -> &Rational {
        match self {
            MeasureSpec::GeneralDU { p, .. }
            | MeasureSpec::GeneralInfU { p, .. }
            | MeasureSpec::Alternating { p, .. }
            | MeasureSpec::Symmetric { p, .. }
            | MeasureSpec::SymmetricInf { p } => p,
        }
    }

    /// Maximum number of parts carrying positive mass, if bounded.
    pub fn parts_bound(&self) -> Option<u32> {
        match self {
            MeasureSpec::GeneralDU { d, .. } => Some(*d),
            MeasureSpec::Alternating { n, .. } => Some(n / 2),
            MeasureSpec::Symmetric { n, .. } => Some(*n),
            MeasureSpec::GeneralInfU { .. } | MeasureSpec::SymmetricInf { .. } => None,
        }
    }

    /// The measure of a single partition, at the default enclosure width.
    pub fn pmf(&self, lambda: &Partition) -> MeasureValue {
        self.pmf_with_width(lambda, &default_enclosure_width())
    }

    /// The measure of a single partition; `width` controls the enclosure
    /// refinement for the limit families (ignored by finite families).
    pub fn pmf_with_width(&self, lambda: &Partition, width: &Rational) -> MeasureValue {
        let r = lambda.num_parts();
        if let Some(bound) = self.parts_bound() {
            if r > bound {
                return MeasureValue::Exact(Rational::zero());
            }
        }
        match self {
            MeasureSpec::GeneralDU { p, u, d } => {
                let val = pow(u, lambda.size()) * pochhammer(&(u / p), *d, p) * poch_recip(p, *d)
                    / (aut_order(lambda, p) * poch_recip(p, *d - r));
                MeasureValue::Exact(val)
            }
            MeasureSpec::GeneralInfU { p, u } => {
                let enc = pochhammer_infinite_to_width(u, p, width)
                    .expect("validated parameters enclose");
                let factor = pow(u, lambda.size()) / aut_order(lambda, p);
                MeasureValue::Enclosure(enc.scale(&factor))
            }
            MeasureSpec::Alternating { p, n } => {
                let numer = poch_range(p, n - 2 * r + 1, *n) * odd_poch(p, n / 2 - r);
                let denom = pow(p, lambda.size() + 4 * lambda.n_lambda())
                    * even_multiplicity_product(lambda, p, |m| m);
                MeasureValue::Exact(numer / denom)
            }
            MeasureSpec::Symmetric { p, n } => {
                let numer = poch_range(p, n - r + 1, *n) * odd_poch(p, (n - r).div_ceil(2));
                let denom = pow(p, lambda.size() + lambda.n_lambda())
                    * even_multiplicity_product(lambda, p, |m| m / 2);
                MeasureValue::Exact(numer / denom)
            }
            MeasureSpec::SymmetricInf { p } => {
                // prod over odd i of (1 - 1/p^i) = prod_{j>=1} (1 - p/(p^2)^j)
                let enc = pochhammer_infinite_to_width(p, &(p * p), width)
                    .expect("validated parameters enclose");
                let denom = pow(p, lambda.size() + lambda.n_lambda())
                    * even_multiplicity_product(lambda, p, |m| m / 2);
                MeasureValue::Enclosure(enc.scale(&denom.recip()))
            }
        }
    }

    /// Mass of {lambda : r(lambda) = r}.
    pub fn prob_num_parts(&self, r: u32) -> Result<MeasureValue> {
        if let Some(bound) = self.parts_bound() {
            if r > bound {
                return Ok(MeasureValue::Exact(Rational::zero()));
            }
        }
        match self {
            MeasureSpec::GeneralDU { p, u, d } => {
                let val = pow(u, r as u64) * poch_recip(p, *d) * pochhammer(&(u / p), *d, p)
                    / (pow(p, r as u64 * r as u64)
                        * poch_recip(p, *d - r)
                        * poch_recip(p, r)
                        * pochhammer(&(u / p), r, p));
                Ok(MeasureValue::Exact(val))
            }
            MeasureSpec::GeneralInfU { p, u } => {
                let enc = pochhammer_infinite_to_width(u, p, &default_enclosure_width())?;
                let factor = pow(u, r as u64)
                    / (pow(p, r as u64 * r as u64)
                        * poch_recip(p, r)
                        * pochhammer(&(u / p), r, p));
                Ok(MeasureValue::Enclosure(enc.scale(&factor)))
            }
            MeasureSpec::Alternating { .. } => self.alternating_as_general().prob_num_parts(r),
            MeasureSpec::Symmetric { p, n } => {
                let val = poch_range(p, r + 1, *n)
                    / (pow(p, (r as u64 + 1) * r as u64 / 2)
                        * poch_recip(&(p * p), (n - r) / 2));
                Ok(MeasureValue::Exact(val))
            }
            MeasureSpec::SymmetricInf { p } => {
                let w = default_enclosure_width();
                // prod_{j>r} (1 - 1/p^j) enclosed as (1/p)_inf / (1/p)_r
                let tail = pochhammer_infinite_to_width(&Rational::one(), p, &w)?
                    .scale(&poch_recip(p, r).recip());
                let even = pochhammer_infinite_to_width(&Rational::one(), &(p * p), &w)?;
                let scaled = tail.scale(&pow(p, (r as u64 + 1) * r as u64 / 2).recip());
                Ok(MeasureValue::Enclosure(scaled.div_pos(&even)))
            }
        }
    }

    /// Mass of {lambda : |lambda| = n}; closed form for the general families
    /// (and the alternating family via its general-family expression).
    pub fn prob_size(&self, n: u32) -> Result<MeasureValue> {
        match self {
            MeasureSpec::GeneralDU { p, u, d } => {
                let val = pow(&(u / p), n as u64) * pochhammer(&(u / p), *d, p)
                    * poch_recip(p, d + n - 1)
                    / (poch_recip(p, d - 1) * poch_recip(p, n));
                Ok(MeasureValue::Exact(val))
            }
            MeasureSpec::GeneralInfU { p, u } => {
                let enc = pochhammer_infinite_to_width(u, p, &default_enclosure_width())?;
                let factor = pow(&(u / p), n as u64) / poch_recip(p, n);
                Ok(MeasureValue::Enclosure(enc.scale(&factor)))
            }
            MeasureSpec::Alternating { .. } => self.alternating_as_general().prob_size(n),
            _ => Err(Error::InvalidParameter(
                "size marginal has a closed form only for the general and alternating families"
                    .into(),
            )),
        }
    }

    /// Joint mass of {|lambda| = n, r(lambda) = r} for the rank-bounded
    /// general family.
    pub fn prob_size_and_parts(&self, n: u32, r: u32) -> Result<Rational> {
        let MeasureSpec::GeneralDU { p, u, d } = self else {
            return Err(Error::InvalidParameter(
                "joint size/parts marginal is defined for the rank-bounded general family".into(),
            ));
        };
        if n == 0 && r == 0 {
            return Ok(pochhammer(&(u / p), *d, p));
        }
        if r == 0 || r > n.min(*d) {
            return Ok(Rational::zero());
        }
        let head = pow(u, n as u64) * pochhammer(&(u / p), *d, p) * poch_recip(p, *d)
            / (pow(p, r as u64 * r as u64) * poch_recip(p, d - r) * poch_recip(p, r));
        let tail = poch_recip(p, n - 1)
            / (pow(p, (n - r) as u64) * poch_recip(p, r - 1) * poch_recip(p, n - r));
        Ok(head * tail)
    }

    /// Rigorous upper bound on P(|lambda| > max_size) for the general
    /// families: sum_{n > N} (u/p)^n divided by a lower bound of (1/p)_inf,
    /// closed as a geometric series. Monotone decreasing in max_size.
    pub fn tail_bound_size(&self, max_size: u32) -> Result<Rational> {
        let (p, u) = match self {
            MeasureSpec::GeneralDU { p, u, .. } | MeasureSpec::GeneralInfU { p, u } => (p, u),
            MeasureSpec::Alternating { .. } => {
                return self.alternating_as_general().tail_bound_size(max_size)
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "size tail bound is defined for the general and alternating families".into(),
                ))
            }
        };
        let lb = pochhammer_infinite_to_width(&Rational::one(), p, &crate::exact::ratio(1, 1 << 20))?
            .lower()
            .clone();
        assert!(lb.is_positive());
        let up = u / p;
        Ok(pow(&up, max_size as u64 + 1) / ((Rational::one() - &up) * lb))
    }

    /// The alternating family rewritten inside the general family:
    /// (p, u, d) = (p^2, p, n/2).
    pub fn alternating_as_general(&self) -> MeasureSpec {
        let MeasureSpec::Alternating { p, n } = self else {
            panic!("alternating_as_general called on a non-alternating spec");
        };
        MeasureSpec::GeneralDU { p: p * p, u: p.clone(), d: n / 2 }
    }

    /// Smallest initial segment of the size-ordered support whose exact mass
    /// reaches `target_mass` (capped at |lambda| <= max_size), together with
    /// the accumulated lower bound on its mass.
    pub fn support_with_mass(
        &self,
        target_mass: &Rational,
        max_size: u32,
    ) -> (Vec<Partition>, Rational) {
        let mut support = Vec::new();
        let mut mass = Rational::zero();
        for n in 0..=max_size {
            for lam in partitions_of_size(n, self.parts_bound()) {
                mass += self.pmf(&lam).lower();
                support.push(lam);
            }
            if &mass >= target_mass {
                break;
            }
        }
        (support, mass)
    }
}

/// prod_{i=1}^{m} (1 - 1/p^{2i-1}).
fn odd_poch(p: &Rational, m: u32) -> Rational {
    let one = Rational::one();
    let mut acc = Rational::one();
    for i in 1..=m {
        acc *= &one - pow(p, 2 * i as u64 - 1).recip();
    }
    acc
}

/// prod_i prod_{j=1}^{g(m_i)} (1 - 1/p^{2j}) over the part multiplicities.
fn even_multiplicity_product(lambda: &Partition, p: &Rational, g: impl Fn(u32) -> u32) -> Rational {
    let p2 = p * p;
    let mut acc = Rational::one();
    for (_, m) in lambda.part_multiplicities() {
        acc *= poch_recip(&p2, g(m));
    }
    acc
}

/// The second product expression for the rank-bounded general mass: the mass
/// written through the count of finite-index sublattices of Z^d with
/// quotient of type lambda,
///
///   (u^{|lambda|}/p^{|lambda| d})
///   prod_i p^{lambda'_{i+1}(d - lambda'_i)}
///          [d - lambda'_{i+1} choose lambda'_i - lambda'_{i+1}]_p
///   prod_{i=1}^d (1 - u/p^i).
///
/// Agrees with [`MeasureSpec::pmf`] exactly on the whole support.
pub fn pmf_lattice_form(p: &Rational, u: &Rational, d: u32, lambda: &Partition) -> Result<Rational> {
    check_p(p)?;
    check_u(u, p)?;
    if d == 0 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    if lambda.num_parts() > d {
        return Ok(Rational::zero());
    }
    let mut acc = pow(u, lambda.size()) / pow(p, lambda.size() * d as u64);
    for i in 1..=lambda.largest_part() {
        let ci = lambda.conjugate_part(i);
        let ci_next = lambda.conjugate_part(i + 1);
        acc *= pow(p, ci_next as u64 * (d - ci) as u64);
        acc *= q_binomial(d - ci_next, ci - ci_next, p);
    }
    Ok(acc * pochhammer(&(u / p), d, p))
}

/// Both sides of the alternating specialization: the general family at
/// (p^2, p, n/2) against the alternating family at (p, n), evaluated on the
/// same partition. The two are equal for every input.
pub fn alternating_specialization_pair(
    n: u32,
    p: &Rational,
    lambda: &Partition,
) -> Result<(Rational, Rational)> {
    let alt = MeasureSpec::alternating(p.clone(), n)?;
    let general = alt.alternating_as_general();
    let left = general.pmf(lambda).expect_exact().clone();
    let right = alt.pmf(lambda).expect_exact().clone();
    Ok((left, right))
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSpec::GeneralDU { p, u, d } => write!(f, "general:p={p},u={u},d={d}"),
            MeasureSpec::GeneralInfU { p, u } => write!(f, "general:p={p},u={u},d=inf"),
            MeasureSpec::Alternating { p, n } => write!(f, "alt:p={p},n={n}"),
            MeasureSpec::Symmetric { p, n } => write!(f, "sym:p={p},n={n}"),
            MeasureSpec::SymmetricInf { p } => write!(f, "syminf:p={p}"),
        }
    }
}

impl FromStr for MeasureSpec {
    type Err = Error;

    /// Parses the compact form, e.g. "general:p=2,u=1/2,d=3",
    /// "general:p=2,u=1,d=inf", "alt:p=3,n=4", "sym:p=2,n=3", "syminf:p=2".
    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s
            .trim()
            .split_once(':')
            .map(|(a, b)| (a, Some(b)))
            .unwrap_or((s.trim(), None));
        let mut fields = std::collections::BTreeMap::new();
        if let Some(rest) = rest {
            for pair in rest.split(',') {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got {pair:?}")))?;
                fields.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let mut take = |k: &str| -> Result<String> {
            fields
                .remove(k)
                .ok_or_else(|| Error::Parse(format!("measure {s:?} is missing parameter {k}")))
        };
        let spec = match family {
            "general" => {
                let p = crate::exact::parse_rational(&take("p")?)?;
                let u = crate::exact::parse_rational(&take("u")?)?;
                let d_raw = take("d")?;
                let d = if d_raw == "inf" {
                    RankBound::Infinite
                } else {
                    RankBound::Finite(
                        d_raw
                            .parse::<u32>()
                            .map_err(|e| Error::Parse(format!("bad d {d_raw:?}: {e}")))?,
                    )
                };
                MeasureSpec::general(p, u, d)?
            }
            "alt" => {
                let p = crate::exact::parse_rational(&take("p")?)?;
                let n = take("n")?
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad n: {e}")))?;
                MeasureSpec::alternating(p, n)?
            }
            "sym" => {
                let p = crate::exact::parse_rational(&take("p")?)?;
                let n = take("n")?
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad n: {e}")))?;
                MeasureSpec::symmetric(p, n)?
            }
            "syminf" => MeasureSpec::symmetric_inf(crate::exact::parse_rational(&take("p")?)?)?,
            other => {
                return Err(Error::Parse(format!(
                    "unknown measure family {other:?} (expected general, alt, sym, or syminf)"
                )))
            }
        };
        if let Some(k) = fields.into_keys().next() {
            return Err(Error::Parse(format!("unexpected parameter {k:?} in {s:?}")));
        }
        Ok(spec)
    }
}
