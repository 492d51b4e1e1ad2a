//! Seeded, reproducible sampling of partitions by the conjugate-column
//! Markov chains, plus empirical-distribution aggregation.
//!
//! The chains generate lambda'_1 >= lambda'_2 >= ... one column at a time:
//! the rank-bounded general family starts at d, the symmetric family at n,
//! and the rank-unbounded general family starts with a dedicated first-step
//! row built from interval enclosures. Discrete choices are made by walking
//! the exact cumulative row with a lazily-extended dyadic draw, so sampling
//! is exact: no floating point, no fixed-precision bias.

use std::collections::BTreeMap;
use std::collections::HashMap;

use num::bigint::BigUint;
use num::{BigInt, One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{pochhammer, pochhammer_infinite, pow, IntervalRational, Rational};
use crate::measures::MeasureSpec;
use crate::partition::Partition;

/// Counter-based random stream keyed by a 64-bit seed. Identical seeds give
/// identical sequences on every platform; worker substreams for parallel
/// aggregation are derived by XOR with the worker index.
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Substream for parallel worker `index`.
    pub fn derive(seed: u64, index: u64) -> Self {
        RandomStream::new(seed ^ index)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in [0, bound).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // rejection sampling on the top range keeps the draw unbiased
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

/// One-step transition mass K(a, b) of the rank-bounded general chain:
///
///   K(a,b) = u^b (1/p)_a (u/p)_a / (p^{b^2} (1/p)_{a-b} (1/p)_b (u/p)_b).
///
/// Requires 0 <= b <= a <= d; each row sums to exactly 1.
pub fn kernel_general(a: u32, b: u32, d: u32, u: &Rational, p: &Rational) -> Rational {
    assert!(b <= a && a <= d, "kernel requires b <= a <= d");
    let up = u / p;
    let recip_p = p.recip();
    pow(u, b as u64) * pochhammer(&recip_p, a, p) * pochhammer(&up, a, p)
        / (pow(p, b as u64 * b as u64)
            * pochhammer(&recip_p, a - b, p)
            * pochhammer(&recip_p, b, p)
            * pochhammer(&up, b, p))
}

/// First-step mass of the rank-unbounded general chain, as an enclosure of
///
///   u^b (u/p)_inf / (p^{b^2} (1/p)_b (u/p)_b),
///
/// the d -> infinity limit of K(d, b). Later steps use [`kernel_general`]
/// unchanged.
pub fn kernel_general_inf_start(
    b: u32,
    u: &Rational,
    p: &Rational,
    terms: u32,
) -> Result<IntervalRational> {
    let enc = pochhammer_infinite(u, p, terms)?;
    let factor = pow(u, b as u64)
        / (pow(p, b as u64 * b as u64)
            * pochhammer(&p.recip(), b, p)
            * pochhammer(&(u / p), b, p));
    Ok(enc.scale(&factor))
}

/// One-step transition mass of the symmetric chain:
///
///   K(a,b) = (1/p)_a / (p^{C(b+1,2)} (1/p)_b prod_{j=1}^{floor((a-b)/2)} (1-1/p^{2j})).
pub fn kernel_sym(a: u32, b: u32, n: u32, p: &Rational) -> Rational {
    assert!(b <= a && a <= n, "kernel requires b <= a <= n");
    let recip_p = p.recip();
    let p2 = p * p;
    pochhammer(&recip_p, a, p)
        / (pow(p, (b as u64 + 1) * b as u64 / 2)
            * pochhammer(&recip_p, b, p)
            * pochhammer(&p2.recip(), (a - b) / 2, &p2))
}

/// A dyadic draw [num/2^bits, (num+1)/2^bits) standing for a uniform real
/// in [0,1) revealed 64 bits at a time.
struct DyadicDraw {
    num: BigUint,
    bits: u32,
}

impl DyadicDraw {
    fn new(stream: &mut RandomStream) -> Self {
        let mut d = DyadicDraw { num: BigUint::zero(), bits: 0 };
        d.refine(stream);
        d.refine(stream);
        d
    }

    fn refine(&mut self, stream: &mut RandomStream) {
        self.num = (&self.num << 64) | BigUint::from(stream.next_u64());
        self.bits += 64;
    }

    fn low(&self) -> Rational {
        Rational::new(BigInt::from(self.num.clone()), BigInt::one() << self.bits)
    }

    fn high(&self) -> Rational {
        Rational::new(BigInt::from(&self.num + 1u8), BigInt::one() << self.bits)
    }
}

/// Walks an exact row (summing to 1) with a dyadic draw; appends bits until
/// the draw interval sits inside one cell. Terminates with probability 1.
fn sample_exact_row(row: &[Rational], stream: &mut RandomStream) -> usize {
    let mut draw = DyadicDraw::new(stream);
    loop {
        let lo = draw.low();
        let hi = draw.high();
        let mut cum = Rational::zero();
        let mut resolved = None;
        for (b, mass) in row.iter().enumerate() {
            cum += mass;
            if lo < cum {
                if hi <= cum {
                    resolved = Some(b);
                }
                break;
            }
        }
        match resolved {
            Some(b) => return b,
            None => {
                assert!(draw.bits < 4096, "dyadic draw failed to resolve");
                draw.refine(stream);
            }
        }
    }
}

/// First step of the rank-unbounded chain: walks interval-valued cells,
/// refining both the draw and the product enclosures until one cell
/// certifiably contains the draw.
fn sample_inf_start(u: &Rational, p: &Rational, stream: &mut RandomStream, terms: u32) -> u32 {
    let mut terms = terms.max(32);
    let mut draw = DyadicDraw::new(stream);
    loop {
        let enc = pochhammer_infinite(u, p, terms).expect("validated parameters");
        let lo = draw.low();
        let hi = draw.high();
        let mut cum_lo = Rational::zero();
        let mut cum_hi = Rational::zero();
        let mut b = 0u32;
        let outcome = loop {
            let factor = pow(u, b as u64)
                / (pow(p, b as u64 * b as u64)
                    * pochhammer(&p.recip(), b, p)
                    * pochhammer(&(u / p), b, p));
            let prev_hi = cum_hi.clone();
            cum_lo += enc.lower() * &factor;
            cum_hi += enc.upper() * &factor;
            if lo >= prev_hi && hi <= cum_lo {
                break Some(b);
            }
            if lo >= cum_hi {
                b += 1;
                assert!(b < 10_000, "first-step walk failed to terminate");
                continue;
            }
            break None;
        };
        match outcome {
            Some(b) => return b,
            None => {
                assert!(draw.bits < 4096 && terms < 1 << 20, "refinement failed to resolve");
                draw.refine(stream);
                terms *= 2;
            }
        }
    }
}

/// Reusable sampler for one measure; caches kernel rows across draws.
pub struct PartitionSampler {
    spec: MeasureSpec,
    rows: HashMap<u32, Vec<Rational>>,
    inf_terms: u32,
}

impl PartitionSampler {
    /// Supported families: the general (bounded or unbounded rank) and
    /// symmetric measures. The alternating and limit-symmetric families have
    /// no chain here.
    pub fn new(spec: MeasureSpec) -> Result<Self> {
        match spec {
            MeasureSpec::GeneralDU { .. }
            | MeasureSpec::GeneralInfU { .. }
            | MeasureSpec::Symmetric { .. } => {
                Ok(PartitionSampler { spec, rows: HashMap::new(), inf_terms: 64 })
            }
            other => Err(Error::InvalidParameter(format!(
                "no chain sampler for measure {other}"
            ))),
        }
    }

    fn row(&mut self, a: u32) -> &Vec<Rational> {
        let spec = self.spec.clone();
        self.rows.entry(a).or_insert_with(|| {
            let row: Vec<Rational> = match &spec {
                MeasureSpec::GeneralDU { p, u, d } => {
                    (0..=a).map(|b| kernel_general(a, b, *d, u, p)).collect()
                }
                MeasureSpec::GeneralInfU { p, u } => {
                    (0..=a).map(|b| kernel_general(a, b, a, u, p)).collect()
                }
                MeasureSpec::Symmetric { p, n } => {
                    (0..=a).map(|b| kernel_sym(a, b, *n, p)).collect()
                }
                _ => unreachable!("constructor restricts the family"),
            };
            let total: Rational = row.iter().sum();
            assert!(total.is_one(), "kernel row must sum to exactly 1");
            row
        })
    }

    /// Draws one partition; the output distribution is exactly the spec's
    /// mass function.
    pub fn sample(&mut self, stream: &mut RandomStream) -> Partition {
        let first = match &self.spec {
            MeasureSpec::GeneralDU { d, .. } => {
                sample_exact_row(self.row(*d), stream) as u32
            }
            MeasureSpec::GeneralInfU { p, u } => {
                let (u, p) = (u.clone(), p.clone());
                sample_inf_start(&u, &p, stream, self.inf_terms)
            }
            MeasureSpec::Symmetric { n, .. } => sample_exact_row(self.row(*n), stream) as u32,
            _ => unreachable!(),
        };
        let mut columns = Vec::new();
        let mut state = first;
        while state > 0 {
            columns.push(state);
            state = sample_exact_row(self.row(state), stream) as u32;
        }
        Partition::from_conjugate(&columns).expect("chain emits weakly decreasing columns")
    }
}

/// Draws one partition from the spec with a fresh sampler.
pub fn sample_partition(spec: &MeasureSpec, stream: &mut RandomStream) -> Result<Partition> {
    Ok(PartitionSampler::new(spec.clone())?.sample(stream))
}

/// Exact counts of sampled partitions, plus the number of trials whose
/// outcome could not be classified (truncation-ambiguous matrix samples).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    counts: BTreeMap<Partition, u64>,
    total: u64,
    ambiguous: u64,
}

impl EmpiricalDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples<I: IntoIterator<Item = Partition>>(samples: I) -> Self {
        let mut dist = Self::new();
        for lam in samples {
            dist.record(lam);
        }
        dist
    }

    pub fn record(&mut self, lambda: Partition) {
        *self.counts.entry(lambda).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn record_ambiguous(&mut self) {
        self.ambiguous += 1;
        self.total += 1;
    }

    /// Deterministic merge; callers combine worker results in index order.
    pub fn merge(&mut self, other: EmpiricalDistribution) {
        for (lam, c) in other.counts {
            *self.counts.entry(lam).or_insert(0) += c;
        }
        self.total += other.total;
        self.ambiguous += other.ambiguous;
    }

    pub fn counts(&self) -> &BTreeMap<Partition, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn ambiguous(&self) -> u64 {
        self.ambiguous
    }

    pub fn count(&self, lambda: &Partition) -> u64 {
        self.counts.get(lambda).copied().unwrap_or(0)
    }

    /// Exact relative frequency count/total.
    pub fn frequency(&self, lambda: &Partition) -> Rational {
        assert!(self.total > 0, "no trials recorded");
        Rational::new(BigInt::from(self.count(lambda)), BigInt::from(self.total))
    }

    /// CSV with leading total/ambiguous header rows, then one row per
    /// partition in lexicographic partition order.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("total,{}\n", self.total));
        out.push_str(&format!("ambiguous,{}\n", self.ambiguous));
        out.push_str("partition,count,frequency\n");
        for (lam, c) in &self.counts {
            let freq = if self.total == 0 {
                "0".to_string()
            } else {
                crate::exact::to_decimal_string(
                    &Rational::new(BigInt::from(*c), BigInt::from(self.total)),
                    12,
                )
            };
            out.push_str(&format!("\"{lam}\",{c},{freq}\n"));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .counts
            .iter()
            .map(|(lam, c)| {
                serde_json::json!({ "partition": lam.to_string(), "count": c })
            })
            .collect();
        serde_json::json!({
            "total": self.total,
            "ambiguous": self.ambiguous,
            "counts": rows,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("empirical distribution JSON: {m}"));
        let total = value["total"].as_u64().ok_or_else(|| bad("missing total"))?;
        let ambiguous = value["ambiguous"].as_u64().ok_or_else(|| bad("missing ambiguous"))?;
        let mut counts = BTreeMap::new();
        let mut seen = 0u64;
        for row in value["counts"].as_array().ok_or_else(|| bad("missing counts"))? {
            let lam: Partition = row["partition"]
                .as_str()
                .ok_or_else(|| bad("missing partition"))?
                .parse()?;
            let c = row["count"].as_u64().ok_or_else(|| bad("missing count"))?;
            seen += c;
            counts.insert(lam, c);
        }
        if seen + ambiguous != total {
            return Err(bad("counts plus ambiguous do not add up to total"));
        }
        Ok(EmpiricalDistribution { counts, total, ambiguous })
    }
}
