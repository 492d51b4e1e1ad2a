//! Enumeration oracles over concrete finite abelian p-groups (prime p).
//!
//! Everything here is deliberately dumb: groups are materialized element by
//! element, subgroups are produced by closing generating sets and
//! deduplicating on the element set, and types are read off torsion counts.
//! These oracles gate the product formulas in the parent module; they are
//! exact but only viable at small scale, so every entry point is guarded by
//! [`BruteForceLimits`].

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Scale guards for the enumeration oracles.
#[derive(Debug, Clone, Copy)]
pub struct BruteForceLimits {
    /// Largest group order p^{|lambda|} that may be materialized.
    pub max_group_order: u64,
    /// Abort once this many distinct subgroups have been found.
    pub max_subgroups: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits { max_group_order: 1 << 16, max_subgroups: 1 << 21 }
    }
}

/// A concrete group Z/p^{lambda_1} x ... x Z/p^{lambda_r} with elements
/// encoded as mixed-radix integers in [0, p^{|lambda|}).
pub struct ConcreteGroup {
    p: u64,
    moduli: Vec<u64>,
    order: u64,
    max_exponent: u32,
    /// order_exp[e]: the least k with p^k * e = 0.
    order_exp: Vec<u32>,
    /// add_table[a * order + b] = a + b, built when the order is small
    /// enough, otherwise addition decodes digits on the fly.
    add_table: Option<Vec<u32>>,
}

impl ConcreteGroup {
    pub fn new(lambda: &Partition, p: u64, limits: &BruteForceLimits) -> Result<Self> {
        if lambda.size() > 40 {
            return Err(Error::LimitExceeded("group exponent sum too large".into()));
        }
        let mut order: u64 = 1;
        let mut moduli = Vec::new();
        for &part in lambda.parts() {
            let m = p.checked_pow(part).ok_or_else(|| {
                Error::LimitExceeded("group order overflows".into())
            })?;
            order = order
                .checked_mul(m)
                .ok_or_else(|| Error::LimitExceeded("group order overflows".into()))?;
            moduli.push(m);
        }
        if order > limits.max_group_order {
            return Err(Error::LimitExceeded(format!(
                "group order {order} exceeds the configured bound {}",
                limits.max_group_order
            )));
        }
        let max_exponent = lambda.largest_part();
        let mut group = ConcreteGroup {
            p,
            moduli,
            order,
            max_exponent,
            order_exp: Vec::new(),
            add_table: None,
        };
        group.order_exp = (0..order).map(|e| group.order_exponent_slow(e)).collect();
        if order <= 2048 {
            let mut table = vec![0u32; (order * order) as usize];
            for a in 0..order {
                for b in 0..order {
                    table[(a * order + b) as usize] = group.add_slow(a, b) as u32;
                }
            }
            group.add_table = Some(table);
        }
        Ok(group)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    fn add_slow(&self, a: u64, b: u64) -> u64 {
        let mut out = 0;
        let mut mult = 1;
        let (mut ra, mut rb) = (a, b);
        for &m in self.moduli.iter().rev() {
            let da = ra % m;
            let db = rb % m;
            ra /= m;
            rb /= m;
            out += ((da + db) % m) * mult;
            mult *= m;
        }
        out
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        match &self.add_table {
            Some(t) => t[(a * self.order + b) as usize] as u64,
            None => self.add_slow(a, b),
        }
    }

    fn order_exponent_slow(&self, e: u64) -> u32 {
        let mut k = 0;
        let mut cur = e;
        while cur != 0 {
            // multiply by p
            let mut next = 0;
            for _ in 0..self.p {
                next = self.add_slow(next, cur);
            }
            cur = next;
            k += 1;
        }
        k
    }

    /// Least k with p^k e = 0.
    pub fn order_exponent(&self, e: u64) -> u32 {
        self.order_exp[e as usize]
    }

    /// Element from coordinates (one per cyclic factor).
    pub fn from_coordinates(&self, coords: &[u64]) -> u64 {
        assert_eq!(coords.len(), self.moduli.len());
        let mut out = 0;
        for (c, m) in coords.iter().zip(&self.moduli) {
            assert!(c < m);
            out = out * m + c;
        }
        out
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }
}

/// Subgroup represented as a bitset over element indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    words: Vec<u64>,
    len: u32,
}

impl ElementSet {
    fn with_capacity(order: u64) -> Self {
        ElementSet { words: vec![0; (order as usize).div_ceil(64)], len: 0 }
    }

    fn contains(&self, e: u64) -> bool {
        self.words[(e / 64) as usize] >> (e % 64) & 1 == 1
    }

    fn insert(&mut self, e: u64) {
        let w = &mut self.words[(e / 64) as usize];
        let bit = 1u64 << (e % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
        }
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros();
                    bits &= bits - 1;
                    Some(wi as u64 * 64 + tz as u64)
                }
            })
        })
    }
}

/// Closure of H together with one extra element: the union of the cosets
/// H, H+g, H+2g, ... until the multiple falls back into the set.
fn closure_with(group: &ConcreteGroup, h: &ElementSet, g: u64) -> ElementSet {
    let mut result = h.clone();
    let mut shift = g;
    while !result.contains(shift) {
        for e in h.iter() {
            result.insert(group.add(e, shift));
        }
        shift = group.add(shift, g);
    }
    result
}

/// Closure of an arbitrary generating set.
fn span(group: &ConcreteGroup, gens: &[u64]) -> ElementSet {
    let mut h = ElementSet::with_capacity(group.order());
    h.insert(0);
    for &g in gens {
        if !h.contains(g) {
            h = closure_with(group, &h, g);
        }
    }
    h
}

/// All subgroups of the group of type lambda over the prime p, by breadth
/// first closure of generating sets, deduplicated on the element bitset.
pub fn enumerate_subgroups(
    lambda: &Partition,
    p: u64,
    limits: &BruteForceLimits,
) -> Result<Vec<ElementSet>> {
    let group = ConcreteGroup::new(lambda, p, limits)?;
    enumerate_subgroups_of(&group, limits)
}

fn enumerate_subgroups_of(
    group: &ConcreteGroup,
    limits: &BruteForceLimits,
) -> Result<Vec<ElementSet>> {
    let mut trivial = ElementSet::with_capacity(group.order());
    trivial.insert(0);
    let mut seen: HashSet<ElementSet> = HashSet::new();
    seen.insert(trivial.clone());
    let mut out = vec![trivial.clone()];
    let mut queue = VecDeque::new();
    queue.push_back(trivial);
    while let Some(h) = queue.pop_front() {
        for g in 1..group.order() {
            if h.contains(g) {
                continue;
            }
            let k = closure_with(group, &h, g);
            if seen.insert(k.clone()) {
                if out.len() >= limits.max_subgroups {
                    return Err(Error::LimitExceeded(format!(
                        "more than {} subgroups",
                        limits.max_subgroups
                    )));
                }
                out.push(k.clone());
                queue.push_back(k);
            }
        }
    }
    Ok(out)
}

/// Type of a subgroup, read off its torsion counts: p^{lambda'_k} is the
/// ratio |H[p^k]| / |H[p^{k-1}]|.
pub fn subgroup_type(group: &ConcreteGroup, h: &ElementSet) -> Partition {
    let mut torsion = vec![0u64; group.max_exponent as usize + 1];
    for e in h.iter() {
        torsion[group.order_exponent(e) as usize] += 1;
    }
    let mut conjugate = Vec::new();
    let mut cumulative: u64 = 0;
    let mut prev: u64 = 0;
    for count in torsion {
        cumulative += count;
        if prev != 0 {
            let ratio = cumulative / prev;
            let col = exact_log(ratio, group.p);
            if col == 0 {
                break;
            }
            conjugate.push(col);
        }
        prev = cumulative;
    }
    conjugate_to_partition(&conjugate)
}

/// Type of the quotient G/H: |(G/H)[p^k]| = #{g : p^k g in H} / |H|.
pub fn quotient_type(group: &ConcreteGroup, h: &ElementSet) -> Partition {
    let order = group.order();
    // current[e] = p^k * e, advanced one multiplication by p per round
    let mut current: Vec<u64> = (0..order).collect();
    let mut conjugate = Vec::new();
    let mut prev_count = h.len() as u64;
    for _ in 1..=group.max_exponent {
        for e in current.iter_mut() {
            let mut acc = 0;
            for _ in 0..group.p {
                acc = group.add(acc, *e);
            }
            *e = acc;
        }
        let count = current.iter().filter(|&&img| h.contains(img)).count() as u64;
        let col = exact_log(count / prev_count, group.p);
        if col == 0 {
            break;
        }
        conjugate.push(col);
        prev_count = count;
    }
    conjugate_to_partition(&conjugate)
}

fn exact_log(mut value: u64, p: u64) -> u32 {
    let mut out = 0;
    while value > 1 {
        assert!(value % p == 0, "expected an exact power of {p}");
        value /= p;
        out += 1;
    }
    out
}

fn conjugate_to_partition(conjugate: &[u32]) -> Partition {
    Partition::from_conjugate(conjugate).expect("torsion counts give a weakly decreasing profile")
}

/// All subgroup types of the group of type lambda, with multiplicities.
pub fn subgroup_type_census(
    lambda: &Partition,
    p: u64,
    limits: &BruteForceLimits,
) -> Result<BTreeMap<Partition, u64>> {
    let group = ConcreteGroup::new(lambda, p, limits)?;
    let subgroups = enumerate_subgroups_of(&group, limits)?;
    let mut census = BTreeMap::new();
    for h in &subgroups {
        *census.entry(subgroup_type(&group, h)).or_insert(0) += 1;
    }
    Ok(census)
}

/// All quotient types G/H over the subgroups H, with multiplicities.
pub fn quotient_type_census(
    lambda: &Partition,
    p: u64,
    limits: &BruteForceLimits,
) -> Result<BTreeMap<Partition, u64>> {
    let group = ConcreteGroup::new(lambda, p, limits)?;
    let subgroups = enumerate_subgroups_of(&group, limits)?;
    let mut census = BTreeMap::new();
    for h in &subgroups {
        *census.entry(quotient_type(&group, h)).or_insert(0) += 1;
    }
    Ok(census)
}

/// n_lambda(mu) by exhaustive enumeration. Independent of the product
/// formula in the parent module.
pub fn subgroup_count_bruteforce(
    lambda: &Partition,
    mu: &Partition,
    p: u64,
    limits: &BruteForceLimits,
) -> Result<u64> {
    Ok(subgroup_type_census(lambda, p, limits)?.get(mu).copied().unwrap_or(0))
}

/// |Sur(lambda, mu)| by exhaustive enumeration of homomorphisms: images of
/// the r(lambda) generators ranged over the admissible torsion of mu, kept
/// when they span.
pub fn surjection_count_bruteforce(
    lambda: &Partition,
    mu: &Partition,
    p: u64,
    limits: &BruteForceLimits,
) -> Result<u64> {
    let target = ConcreteGroup::new(mu, p, limits)?;
    if lambda.is_empty() {
        return Ok(if mu.is_empty() { 1 } else { 0 });
    }
    // admissible images per generator: elements killed by p^{lambda_i}
    let candidates: Vec<Vec<u64>> = lambda
        .parts()
        .iter()
        .map(|&part| {
            (0..target.order()).filter(|&e| target.order_exponent(e) <= part).collect()
        })
        .collect();
    let total: u128 = candidates.iter().map(|c| c.len() as u128).product();
    if total > 1 << 24 {
        return Err(Error::LimitExceeded(format!("{total} homomorphisms to enumerate")));
    }
    let mut count = 0u64;
    let mut images = vec![0u64; candidates.len()];
    let mut idx = vec![0usize; candidates.len()];
    loop {
        for (i, &j) in idx.iter().enumerate() {
            images[i] = candidates[i][j];
        }
        if span(&target, &images).len() as u64 == target.order() {
            count += 1;
        }
        // odometer
        let mut pos = candidates.len();
        loop {
            if pos == 0 {
                return Ok(count);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < candidates[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::groups;
    use crate::partition::partitions_up_to_size;
    use num::ToPrimitive;

    fn part(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn limits() -> BruteForceLimits {
        BruteForceLimits::default()
    }

    #[test]
    fn klein_group_census() {
        let census = subgroup_type_census(&part(&[1, 1]), 2, &limits()).unwrap();
        assert_eq!(census.get(&Partition::empty()), Some(&1));
        assert_eq!(census.get(&part(&[1])), Some(&3));
        assert_eq!(census.get(&part(&[1, 1])), Some(&1));
    }

    #[test]
    fn cyclic_p_squared_census() {
        let census = subgroup_type_census(&part(&[2]), 3, &limits()).unwrap();
        assert_eq!(census.get(&part(&[1])), Some(&1));
        assert_eq!(census.len(), 3);
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(subgroup_count_bruteforce(&part(&[1]), &part(&[1]), 2, &limits()).unwrap(), 1);
        assert_eq!(
            subgroup_count_bruteforce(&part(&[1, 1]), &part(&[1]), 2, &limits()).unwrap(),
            3
        );
        assert_eq!(subgroup_count_bruteforce(&part(&[2]), &part(&[1]), 3, &limits()).unwrap(), 1);
    }

    #[test]
    fn rejects_oversized_groups() {
        let tight = BruteForceLimits { max_group_order: 16, max_subgroups: 1000 };
        assert!(subgroup_type_census(&part(&[5]), 2, &tight).is_err());
    }

    #[test]
    fn product_formula_matches_enumeration_small() {
        for p in [2u64, 3] {
            let max = if p == 2 { 6 } else { 4 };
            for lam in partitions_up_to_size(max) {
                let census = subgroup_type_census(&lam, p, &limits()).unwrap();
                let total: u64 = census.values().sum();
                let mut formula_total = int(0);
                for mu in partitions_up_to_size(lam.size() as u32) {
                    let formula = groups::subgroup_count(&lam, &mu, &int(p as i64));
                    let counted = census.get(&mu).copied().unwrap_or(0);
                    assert_eq!(
                        formula,
                        int(counted as i64),
                        "n_lambda(mu) mismatch at lambda={lam}, mu={mu}, p={p}"
                    );
                    formula_total += formula;
                }
                assert_eq!(formula_total, int(total as i64));
            }
        }
    }

    #[test]
    fn subgroup_quotient_duality_small() {
        // #subgroups of type mu equals #subgroups with quotient of type mu
        for p in [2u64, 3] {
            let max = if p == 2 { 6 } else { 4 };
            for lam in partitions_up_to_size(max) {
                let subs = subgroup_type_census(&lam, p, &limits()).unwrap();
                let quots = quotient_type_census(&lam, p, &limits()).unwrap();
                assert_eq!(subs, quots, "duality fails at lambda={lam}, p={p}");
            }
        }
    }

    #[test]
    fn surjection_formula_matches_enumeration() {
        for p in [2u64, 3] {
            for lam in partitions_up_to_size(4) {
                for mu in partitions_up_to_size(3) {
                    if lam.size() + mu.size() > 6 {
                        continue;
                    }
                    let brute = surjection_count_bruteforce(&lam, &mu, p, &limits()).unwrap();
                    let formula = groups::sur_count(&lam, &mu, &int(p as i64));
                    assert_eq!(
                        formula.to_integer().to_u64().unwrap(),
                        brute,
                        "sur mismatch at lambda={lam}, mu={mu}, p={p}"
                    );
                }
            }
        }
    }
}
