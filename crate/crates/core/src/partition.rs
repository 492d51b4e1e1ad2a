//! Integer partitions and their derived statistics.
//!
//! A [`Partition`] is a weakly decreasing list of positive integers; the
//! empty list is the unique partition of 0. Partitions index everything in
//! this crate: measures, group types, moments. Conjugates, multiplicities,
//! and the weight n(lambda) = sum_i C(lambda'_i, 2) are computed on demand.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition, checking that parts are weakly decreasing and
    /// positive.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        for w in parts.windows(2) {
            if w[0] < w[1] {
                return Err(Error::InvalidParameter(format!(
                    "parts must be weakly decreasing, got {parts:?}"
                )));
            }
        }
        if parts.iter().any(|&x| x == 0) {
            return Err(Error::InvalidParameter("parts must be positive".into()));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// Rebuilds a partition from its conjugate part list.
    pub fn from_conjugate(conjugate_parts: &[u32]) -> Result<Self> {
        Partition::new(conjugate_parts.to_vec()).map(|c| c.conjugate())
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Number of parts r(lambda).
    pub fn num_parts(&self) -> u32 {
        self.parts.len() as u32
    }

    /// |lambda|: the sum of the parts.
    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&x| x as u64).sum()
    }

    /// lambda_1, or 0 for the empty partition.
    pub fn largest_part(&self) -> u32 {
        self.parts.first().copied().unwrap_or(0)
    }

    /// Number of parts equal to `i` (m_i), for i >= 1.
    pub fn multiplicity(&self, i: u32) -> u32 {
        self.parts.iter().filter(|&&x| x == i).count() as u32
    }

    /// Distinct part sizes with their multiplicities, in decreasing size
    /// order.
    pub fn part_multiplicities(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &x in &self.parts {
            match out.last_mut() {
                Some((size, count)) if *size == x => *count += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    /// The conjugate partition: lambda'_i = #{j : lambda_j >= i}.
    pub fn conjugate(&self) -> Partition {
        Partition { parts: self.conjugate_parts() }
    }

    /// The conjugate part list (lambda'_1, ..., lambda'_{lambda_1}).
    pub fn conjugate_parts(&self) -> Vec<u32> {
        let cols = self.largest_part() as usize;
        let mut out = vec![0u32; cols];
        for &x in &self.parts {
            for c in out.iter_mut().take(x as usize) {
                *c += 1;
            }
        }
        out
    }

    /// lambda'_i for i >= 1, with 0 beyond the diagram.
    pub fn conjugate_part(&self, i: u32) -> u32 {
        assert!(i >= 1);
        self.parts.iter().filter(|&&x| x >= i).count() as u32
    }

    /// n(lambda) = sum_i C(lambda'_i, 2).
    pub fn n_lambda(&self) -> u64 {
        self.conjugate_parts()
            .iter()
            .map(|&c| (c as u64) * (c as u64 - 1) / 2)
            .sum()
    }

    /// sum_i (lambda'_i)^2.
    pub fn sum_conjugate_squares(&self) -> u64 {
        self.conjugate_parts().iter().map(|&c| (c as u64) * (c as u64)).sum()
    }

    /// lambda'_1 + ... + lambda'_ell (the first `ell` column sizes).
    pub fn conjugate_prefix_sum(&self, ell: u32) -> u64 {
        (1..=ell).map(|i| self.conjugate_part(i) as u64).sum()
    }

    /// Diagram containment: other_i <= self_i for every i.
    pub fn contains(&self, other: &Partition) -> bool {
        if other.parts.len() > self.parts.len() {
            return false;
        }
        other.parts.iter().zip(&self.parts).all(|(&m, &l)| m <= l)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses "[3,1,1]"-style bracketed lists; "[]" is the empty partition.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("partition must look like [3,1,1], got {s:?}")))?;
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = inner
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad part {tok:?}: {e}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        Partition::new(parts)
    }
}

/// All partitions of `size` with at most `max_parts` parts (unbounded when
/// `None`), in reverse lexicographic order: (4), (3,1), (2,2), (2,1,1),
/// (1,1,1,1).
pub fn partitions_of_size(size: u32, max_parts: Option<u32>) -> Vec<Partition> {
    let bound = max_parts.unwrap_or(size.max(1));
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    gen_rec(size, size, bound, &mut prefix, &mut out);
    out
}

fn gen_rec(remaining: u32, max_part: u32, parts_left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition { parts: prefix.clone() });
        return;
    }
    if parts_left == 0 {
        return;
    }
    let hi = remaining.min(max_part);
    for part in (1..=hi).rev() {
        // remaining-part must fit into parts_left-1 parts of size <= part
        if (remaining - part) as u64 > (parts_left as u64 - 1) * part as u64 {
            continue;
        }
        prefix.push(part);
        gen_rec(remaining - part, part, parts_left - 1, prefix, out);
        prefix.pop();
    }
}

/// All partitions with |lambda| <= max_size, ordered by size and then
/// reverse lexicographically within each size.
pub fn partitions_up_to_size(max_size: u32) -> Vec<Partition> {
    (0..=max_size).flat_map(|n| partitions_of_size(n, None)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn rejects_increasing_or_zero_parts() {
        assert!(Partition::new(vec![2, 3]).is_err());
        assert!(Partition::new(vec![1, 0]).is_err());
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(Partition::empty().conjugate(), Partition::empty());
        assert_eq!(p(&[3, 1]).conjugate(), p(&[2, 1, 1]));
        assert_eq!(p(&[2, 2]).conjugate(), p(&[2, 2]));
    }

    #[test]
    fn n_lambda_examples() {
        assert_eq!(Partition::empty().n_lambda(), 0);
        assert_eq!(p(&[2, 2]).n_lambda(), 2);
        assert_eq!(p(&[1, 1, 1]).n_lambda(), 3);
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(partitions_of_size(0, None), vec![Partition::empty()]);
        let all4 = partitions_of_size(4, None);
        assert_eq!(
            all4,
            vec![p(&[4]), p(&[3, 1]), p(&[2, 2]), p(&[2, 1, 1]), p(&[1, 1, 1, 1])]
        );
        let bounded = partitions_of_size(4, Some(2));
        assert_eq!(bounded, vec![p(&[4]), p(&[3, 1]), p(&[2, 2])]);
    }

    /// p(n) by Euler's pentagonal number recurrence — independent of the
    /// enumerator above.
    fn partition_count_pentagonal(n: usize) -> u64 {
        let mut table = vec![0u64; n + 1];
        table[0] = 1;
        for i in 1..=n {
            let mut acc: i128 = 0;
            let mut k: i64 = 1;
            loop {
                let g1 = (k * (3 * k - 1) / 2) as usize;
                if g1 > i {
                    break;
                }
                let sign: i128 = if k % 2 == 1 { 1 } else { -1 };
                acc += sign * table[i - g1] as i128;
                let g2 = (k * (3 * k + 1) / 2) as usize;
                if g2 <= i {
                    acc += sign * table[i - g2] as i128;
                }
                k += 1;
            }
            table[i] = u64::try_from(acc).expect("pentagonal recurrence went negative");
        }
        table[n]
    }

    #[test]
    fn enumeration_count_matches_pentagonal_recurrence() {
        for n in 0..=40u32 {
            let got = partitions_of_size(n, None).len() as u64;
            assert_eq!(got, partition_count_pentagonal(n as usize), "p({n})");
        }
    }

    #[test]
    fn conjugate_and_multiplicity_identities_exhaustive() {
        for lam in partitions_up_to_size(20) {
            assert_eq!(lam.conjugate().conjugate(), lam);
            // |lambda| + 2 n(lambda) = sum (lambda'_i)^2
            assert_eq!(lam.size() + 2 * lam.n_lambda(), lam.sum_conjugate_squares());
            // m_i = lambda'_i - lambda'_{i+1}
            for i in 1..=lam.largest_part() {
                assert_eq!(
                    lam.multiplicity(i),
                    lam.conjugate_part(i) - lam.conjugate_part(i + 1)
                );
            }
        }
    }

    #[test]
    fn containment() {
        assert!(p(&[3, 1]).contains(&p(&[2, 1])));
        assert!(!p(&[3, 1]).contains(&p(&[2, 2])));
        assert!(p(&[2]).contains(&Partition::empty()));
        assert!(!p(&[2]).contains(&p(&[1, 1])));
    }

    #[test]
    fn string_round_trip() {
        for s in ["[]", "[3,1,1]", "[7]", "[2,2,2,1]"] {
            let lam: Partition = s.parse().unwrap();
            assert_eq!(lam.to_string(), s);
        }
        assert!("[2,3]".parse::<Partition>().is_err());
        assert!("3,1".parse::<Partition>().is_err());
        assert!("[0]".parse::<Partition>().is_err());
    }

    fn arb_partition() -> impl Strategy<Value = Partition> {
        proptest::collection::vec(1u32..12, 0..10).prop_map(|mut v| {
            v.sort_unstable_by(|a, b| b.cmp(a));
            Partition::new(v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn conjugate_involution(lam in arb_partition()) {
            prop_assert_eq!(lam.conjugate().conjugate(), lam);
        }

        #[test]
        fn display_parse_round_trip(lam in arb_partition()) {
            let s = lam.to_string();
            prop_assert_eq!(s.parse::<Partition>().unwrap(), lam);
        }
    }
}
