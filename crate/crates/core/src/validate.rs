//! The exact identity suite behind the `validate` command: every structural
//! identity the library promises, run over deterministic desk-scale grids,
//! with one result row per identity.

use num::{One, Signed, Zero};

use crate::error::Result;
use crate::exact::{int, parse_rational, poch_range, pow, q_binomial, Rational};
use crate::groups::{
    self, brute, moment_closed_form, moment_truncated, moments_unique_condition, RankBound,
};
use crate::hall_littlewood::hl_pmf;
use crate::measures::{alternating_specialization_pair, pmf_lattice_form, MeasureSpec};
use crate::partition::{partitions_of_size, partitions_up_to_size, Partition};
use crate::sampler::{kernel_general, kernel_sym};

/// Outcome of one identity check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub params: String,
    pub passed: bool,
    /// On failure: the partition and both exact values.
    pub detail: Option<String>,
}

impl CheckResult {
    fn pass(name: &str, params: String) -> Self {
        CheckResult { name: name.into(), params, passed: true, detail: None }
    }

    fn fail(name: &str, params: String, detail: String) -> Self {
        CheckResult { name: name.into(), params, passed: false, detail: Some(detail) }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "params": self.params,
            "passed": self.passed,
            "detail": self.detail,
        })
    }
}

fn equal_check(
    name: &str,
    params: String,
    tag: &str,
    lhs: &Rational,
    rhs: &Rational,
) -> CheckResult {
    if lhs == rhs {
        CheckResult::pass(name, params)
    } else {
        CheckResult::fail(name, params, format!("{tag}: {lhs} != {rhs}"))
    }
}

fn general_grid() -> Vec<(Rational, Rational)> {
    [("2", "1"), ("3", "1/2"), ("7/2", "3/2")]
        .iter()
        .map(|(p, u)| (parse_rational(p).unwrap(), parse_rational(u).unwrap()))
        .collect()
}

/// Equality of the automorphism-quotient mass expression and the sublattice
/// product expression, over every admissible partition in the grid.
pub fn check_dual_form(max_size: u32, max_d: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (p, u) in general_grid() {
        for d in 1..=max_d {
            let spec = MeasureSpec::general(p.clone(), u.clone(), RankBound::Finite(d))?;
            let params = format!("p={p}, u={u}, d={d}, |lambda|<={max_size}");
            let mut bad = None;
            for lam in partitions_up_to_size(max_size) {
                let direct = spec.pmf(&lam).expect_exact().clone();
                let lattice = pmf_lattice_form(&p, &u, d, &lam)?;
                if direct != lattice {
                    bad = Some(format!("lambda={lam}: {direct} != {lattice}"));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("dual-form", params),
                Some(detail) => CheckResult::fail("dual-form", params, detail),
            });
        }
    }
    Ok(out)
}

/// The mass identity through the automorphism order alone:
/// (1/p^{|lambda| d}) prod_i p^{...} [..]_p
///   = (1/|Aut(lambda)|) prod_{i=d-r+1}^d (1 - 1/p^i).
pub fn check_rectangle_aut_identity(max_size: u32, max_d: u32) -> Result<Vec<CheckResult>> {
    let grid = [int(2), int(3), parse_rational("7/2").unwrap()];
    let mut out = Vec::new();
    for p in grid {
        for d in 1..=max_d {
            let params = format!("p={p}, d={d}, |lambda|<={max_size}");
            let mut bad = None;
            for lam in partitions_up_to_size(max_size) {
                let r = lam.num_parts();
                if r > d {
                    continue;
                }
                let mut lhs = pow(&p, lam.size() * d as u64).recip();
                for i in 1..=lam.largest_part() {
                    let ci = lam.conjugate_part(i);
                    let ci_next = lam.conjugate_part(i + 1);
                    lhs *= pow(&p, ci_next as u64 * (d - ci) as u64);
                    lhs *= q_binomial(d - ci_next, ci - ci_next, &p);
                }
                let rhs = poch_range(&p, d - r + 1, d) / groups::aut_order(&lam, &p);
                if lhs != rhs {
                    bad = Some(format!("lambda={lam}: {lhs} != {rhs}"));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("rectangle-aut-identity", params),
                Some(detail) => CheckResult::fail("rectangle-aut-identity", params, detail),
            });
        }
    }
    Ok(out)
}

/// Hall-Littlewood principal specialization equals the direct mass.
pub fn check_hall_littlewood(max_size: u32, max_d: u32) -> Result<Vec<CheckResult>> {
    let grid = [(int(2), int(1)), (int(3), parse_rational("1/2").unwrap())];
    let mut out = Vec::new();
    for (p, u) in grid {
        for d in 1..=max_d {
            let spec = MeasureSpec::general(p.clone(), u.clone(), RankBound::Finite(d))?;
            let params = format!("p={p}, u={u}, d={d}, |lambda|<={max_size}");
            let mut bad = None;
            for lam in partitions_up_to_size(max_size) {
                if lam.num_parts() > d {
                    continue;
                }
                let via_hl = hl_pmf(&lam, d, &u, &p)?;
                let direct = spec.pmf(&lam).expect_exact().clone();
                if via_hl != direct {
                    bad = Some(format!("lambda={lam}: {via_hl} != {direct}"));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("hall-littlewood", params),
                Some(detail) => CheckResult::fail("hall-littlewood", params, detail),
            });
        }
    }
    Ok(out)
}

/// Chain rows sum to one and telescoping path products rebuild the masses.
pub fn check_kernels(max_state: u32, max_size: u32, max_d: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (p, u) in general_grid() {
        let params = format!("p={p}, u={u}, a<={max_state}");
        let mut bad = None;
        for a in 0..=max_state {
            let total: Rational = (0..=a).map(|b| kernel_general(a, b, max_state, &u, &p)).sum();
            if !total.is_one() {
                bad = Some(format!("row a={a} sums to {total}"));
                break;
            }
        }
        out.push(match bad {
            None => CheckResult::pass("general-kernel-rows", params),
            Some(detail) => CheckResult::fail("general-kernel-rows", params, detail),
        });

        for d in 1..=max_d {
            let spec = MeasureSpec::general(p.clone(), u.clone(), RankBound::Finite(d))?;
            let params = format!("p={p}, u={u}, d={d}, |lambda|<={max_size}");
            let mut bad = None;
            for lam in partitions_up_to_size(max_size) {
                if lam.num_parts() > d {
                    continue;
                }
                let mut cols = lam.conjugate_parts();
                cols.push(0);
                let mut state = d;
                let mut product = Rational::one();
                for &c in &cols {
                    product *= kernel_general(state, c, d, &u, &p);
                    state = c;
                }
                let mass = spec.pmf(&lam).expect_exact().clone();
                if product != mass {
                    bad = Some(format!("lambda={lam}: path {product} != {mass}"));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("general-kernel-paths", params),
                Some(detail) => CheckResult::fail("general-kernel-paths", params, detail),
            });
        }
    }
    for p in [int(2), int(3)] {
        for n in 1..=max_d {
            let spec = MeasureSpec::symmetric(p.clone(), n)?;
            let params = format!("p={p}, n={n}, |lambda|<={max_size}");
            let mut bad = None;
            for a in 0..=n {
                let total: Rational = (0..=a).map(|b| kernel_sym(a, b, n, &p)).sum();
                if !total.is_one() {
                    bad = Some(format!("row a={a} sums to {total}"));
                }
            }
            for lam in partitions_up_to_size(max_size) {
                if lam.num_parts() > n {
                    continue;
                }
                let mut cols = lam.conjugate_parts();
                cols.push(0);
                let mut state = n;
                let mut product = Rational::one();
                for &c in &cols {
                    product *= kernel_sym(state, c, n, &p);
                    state = c;
                }
                let mass = spec.pmf(&lam).expect_exact().clone();
                if product != mass {
                    bad = Some(format!("lambda={lam}: path {product} != {mass}"));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("symmetric-kernel", params),
                Some(detail) => CheckResult::fail("symmetric-kernel", params, detail),
            });
        }
    }
    Ok(out)
}

/// Size, parts, and joint marginals against exhaustive sums and tail bounds.
pub fn check_marginals(max_n: u32, tail_cut: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (p, u) in general_grid() {
        for d in [1u32, 2, 3] {
            let spec = MeasureSpec::general(p.clone(), u.clone(), RankBound::Finite(d))?;
            let params = format!("p={p}, u={u}, d={d}, n<={max_n}");
            // size marginal vs exhaustive sum
            let mut bad = None;
            for n in 0..=max_n {
                let closed = spec.prob_size(n)?.expect_exact().clone();
                let mut sum = Rational::zero();
                for lam in partitions_of_size(n, Some(d)) {
                    sum += spec.pmf(&lam).expect_exact();
                }
                if closed != sum {
                    bad = Some(format!("n={n}: closed {closed} != sum {sum}"));
                    break;
                }
                // joint cells marginalize to the size marginal
                let joint: Rational =
                    (0..=n).map(|r| spec.prob_size_and_parts(n, r).unwrap()).sum();
                if joint != closed {
                    bad = Some(format!("n={n}: joint sum {joint} != {closed}"));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("size-marginal", params.clone()),
                Some(detail) => CheckResult::fail("size-marginal", params.clone(), detail),
            });
            // parts marginal: enclosed by the truncated sum plus size tail
            let tail = spec.tail_bound_size(tail_cut)?;
            let mut partial = vec![Rational::zero(); d as usize + 1];
            for lam in partitions_up_to_size(tail_cut) {
                if lam.num_parts() <= d {
                    partial[lam.num_parts() as usize] += spec.pmf(&lam).expect_exact();
                }
            }
            let mut bad = None;
            for r in 0..=d {
                let closed = spec.prob_num_parts(r)?.expect_exact().clone();
                if !(partial[r as usize] <= closed
                    && closed <= &partial[r as usize] + &tail)
                {
                    bad = Some(format!(
                        "r={r}: closed {closed} outside [{}, +tail]",
                        partial[r as usize]
                    ));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("parts-marginal", params),
                Some(detail) => CheckResult::fail("parts-marginal", params, detail),
            });
        }
    }
    Ok(out)
}

/// The alternating cokernel family equals the general family at
/// (p^2, p, n/2).
pub fn check_alternating_specialization(max_size: u32, even_ns: &[u32]) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for p in [int(2), int(3)] {
        for &n in even_ns {
            let params = format!("p={p}, n={n}, |lambda|<={max_size}");
            let mut bad = None;
            for lam in partitions_up_to_size(max_size) {
                let (general, alt) = alternating_specialization_pair(n, &p, &lam)?;
                if general != alt {
                    bad = Some(format!("lambda={lam}: {general} != {alt}"));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("alternating-specialization", params),
                Some(detail) => CheckResult::fail("alternating-specialization", params, detail),
            });
        }
    }
    Ok(out)
}

/// Sublattice zeta identity: enumerated subgroup sums against the closed
/// form.
pub fn check_zeta(max_d: u32, max_n: u32) -> Result<Vec<CheckResult>> {
    let grid = [int(2), int(3), parse_rational("5/2").unwrap()];
    let mut out = Vec::new();
    for p in grid {
        for d in 1..=max_d {
            let params = format!("p={p}, d={d}, n<={max_n}");
            let mut bad = None;
            for n in 0..=max_n {
                let (lhs, rhs) = groups::subgroup_zeta_check(d, n, &p);
                if lhs != rhs {
                    bad = Some(format!("n={n}: {lhs} != {rhs}"));
                    break;
                }
            }
            out.push(match bad {
                None => CheckResult::pass("subgroup-zeta", params),
                Some(detail) => CheckResult::fail("subgroup-zeta", params, detail),
            });
        }
    }
    Ok(out)
}

/// Subgroup-count product formula against the enumeration oracle at a small
/// scale.
pub fn check_subgroup_oracle() -> Result<Vec<CheckResult>> {
    let limits = brute::BruteForceLimits::default();
    let mut out = Vec::new();
    for (p, max) in [(2u64, 5u32), (3, 3)] {
        let params = format!("p={p}, |lambda|<={max}");
        let mut bad = None;
        'outer: for lam in partitions_up_to_size(max) {
            let census = brute::subgroup_type_census(&lam, p, &limits)?;
            for mu in partitions_up_to_size(lam.size() as u32) {
                let formula = groups::subgroup_count(&lam, &mu, &int(p as i64));
                let counted = int(census.get(&mu).copied().unwrap_or(0) as i64);
                if formula != counted {
                    bad = Some(format!("lambda={lam}, mu={mu}: {formula} != {counted}"));
                    break 'outer;
                }
            }
        }
        out.push(match bad {
            None => CheckResult::pass("subgroup-oracle", params),
            Some(detail) => CheckResult::fail("subgroup-oracle", params, detail),
        });
    }
    Ok(out)
}

/// Moment enclosures around the closed form, and the uniqueness-condition
/// decisions.
pub fn check_moments(max_size: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mus = [vec![1u32], vec![2, 1]];
    let grid = [(int(2), int(1)), (int(3), int(1))];
    for (p, u) in grid {
        for mu_parts in &mus {
            let mu = Partition::new(mu_parts.clone()).unwrap();
            for d in [RankBound::Finite(2), RankBound::Infinite] {
                let params = format!("p={p}, u={u}, d={d}, mu={mu}");
                let closed = moment_closed_form(&mu, d, &u, &p);
                let trunc = moment_truncated(&mu, d, &u, &p, max_size)?;
                out.push(if trunc.encloses(&closed) {
                    CheckResult::pass("moment-enclosure", params)
                } else {
                    CheckResult::fail(
                        "moment-enclosure",
                        params,
                        format!(
                            "closed {closed} outside [{}, {} + {}]",
                            trunc.partial.lower(),
                            trunc.partial.upper(),
                            trunc.tail_bound
                        ),
                    )
                });
            }
        }
    }
    let tt = moments_unique_condition(RankBound::Infinite, &int(1), &int(3))?;
    out.push(equal_check(
        "moments-unique",
        "p=3, u=1, d=inf".into(),
        "condition",
        &int(tt as i64),
        &int(1),
    ));
    let ff = moments_unique_condition(RankBound::Infinite, &int(1), &int(2))?;
    out.push(equal_check(
        "moments-unique",
        "p=2, u=1, d=inf".into(),
        "condition",
        &int(ff as i64),
        &int(0),
    ));
    Ok(out)
}

/// Normalization: truncated total mass below one, and above one once the
/// tail bound is added.
pub fn check_normalization(cut: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (p, u) in general_grid() {
        for d in [2u32, 4] {
            let spec = MeasureSpec::general(p.clone(), u.clone(), RankBound::Finite(d))?;
            let params = format!("p={p}, u={u}, d={d}, cut={cut}");
            let mut total = Rational::zero();
            for lam in partitions_up_to_size(cut) {
                let mass = spec.pmf(&lam).expect_exact().clone();
                if mass.is_negative() || mass > Rational::one() {
                    out.push(CheckResult::fail(
                        "normalization",
                        params.clone(),
                        format!("mass of {lam} out of [0,1]: {mass}"),
                    ));
                }
                total += mass;
            }
            let tail = spec.tail_bound_size(cut)?;
            out.push(if total <= Rational::one() && &total + &tail >= Rational::one() {
                CheckResult::pass("normalization", params)
            } else {
                CheckResult::fail(
                    "normalization",
                    params,
                    format!("partial mass {total}, tail {tail}"),
                )
            });
        }
    }
    Ok(out)
}

/// The whole default suite, deterministic and desk scale.
pub fn run_default_suite() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    out.extend(check_dual_form(8, 3)?);
    out.extend(check_rectangle_aut_identity(8, 3)?);
    out.extend(check_hall_littlewood(6, 4)?);
    out.extend(check_kernels(8, 8, 3)?);
    out.extend(check_marginals(8, 16)?);
    out.extend(check_alternating_specialization(6, &[2, 4])?);
    out.extend(check_zeta(3, 4)?);
    out.extend(check_subgroup_oracle()?);
    out.extend(check_moments(12)?);
    out.extend(check_normalization(16)?);
    Ok(out)
}
