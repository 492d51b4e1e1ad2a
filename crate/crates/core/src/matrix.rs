//! Random matrix ensembles over Z/p^k, Smith normal form, cokernel types,
//! the random-quotient process, and Monte-Carlo comparison against exact
//! masses.
//!
//! Matrices with entries uniform mod p^k are the depth-k truncation of Haar
//! measure on p-adic matrices; a cokernel whose Smith valuations stay below
//! k is read off exactly, and a sample that saturates the precision is
//! flagged [`CokernelSample::AmbiguousTruncation`] rather than dropped.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::measures::MeasureSpec;
use crate::partition::Partition;
use crate::sampler::{EmpiricalDistribution, PartitionSampler, RandomStream};

/// Matrix ensembles: free entries are i.i.d. uniform on [0, p^k), dependent
/// entries are filled by the symmetry constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    Square { d: u32 },
    Rect { rows: u32, cols: u32 },
    /// Zero diagonal, entry(j,i) = -entry(i,j); n must be even.
    Alternating { n: u32 },
    Symmetric { n: u32 },
}

impl Ensemble {
    pub fn shape(&self) -> (u32, u32) {
        match *self {
            Ensemble::Square { d } => (d, d),
            Ensemble::Rect { rows, cols } => (rows, cols),
            Ensemble::Alternating { n } | Ensemble::Symmetric { n } => (n, n),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Ensemble::Square { d } => d >= 1,
            Ensemble::Rect { rows, cols } => rows >= 1 && cols >= 1,
            Ensemble::Alternating { n } => n >= 2 && n % 2 == 0,
            Ensemble::Symmetric { n } => n >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad ensemble dimensions: {self:?}")))
        }
    }
}

impl std::fmt::Display for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Ensemble::Square { d } => write!(f, "square:d={d}"),
            Ensemble::Rect { rows, cols } => write!(f, "rect:rows={rows},cols={cols}"),
            Ensemble::Alternating { n } => write!(f, "alt:n={n}"),
            Ensemble::Symmetric { n } => write!(f, "sym:n={n}"),
        }
    }
}

/// Parses "square:p=2,d=2", "rect:p=2,rows=2,cols=3", "alt:p=2,n=4",
/// "sym:p=3,n=3" into the ensemble and the prime.
pub fn parse_ensemble_spec(s: &str) -> Result<(Ensemble, u64)> {
    let (family, rest) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("ensemble must look like square:p=2,d=2, got {s:?}")))?;
    let mut fields = std::collections::BTreeMap::new();
    for pair in rest.split(',') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {pair:?}")))?;
        let parsed: u64 = value
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad value {value:?}: {e}")))?;
        fields.insert(key.trim().to_string(), parsed);
    }
    let mut take = |k: &str| -> Result<u64> {
        fields.remove(k).ok_or_else(|| Error::Parse(format!("ensemble {s:?} missing {k}")))
    };
    let p = take("p")?;
    let ens = match family {
        "square" => Ensemble::Square { d: take("d")? as u32 },
        "rect" => Ensemble::Rect { rows: take("rows")? as u32, cols: take("cols")? as u32 },
        "alt" => Ensemble::Alternating { n: take("n")? as u32 },
        "sym" => Ensemble::Symmetric { n: take("n")? as u32 },
        other => return Err(Error::Parse(format!("unknown ensemble family {other:?}"))),
    };
    ens.validate()?;
    if let Some(k) = fields.into_keys().next() {
        return Err(Error::Parse(format!("unexpected parameter {k:?} in {s:?}")));
    }
    Ok((ens, p))
}

fn is_small_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Matrix over Z/p^k with row-major entries reduced mod p^k.
#[derive(Debug, Clone)]
pub struct ModPKMatrix {
    rows: usize,
    cols: usize,
    p: u64,
    k: u32,
    modulus: u64,
    entries: Vec<u64>,
}

impl ModPKMatrix {
    pub fn zero(rows: usize, cols: usize, p: u64, k: u32) -> Result<Self> {
        if !is_small_prime(p) {
            return Err(Error::InvalidParameter(format!("p must be a prime, got {p}")));
        }
        if k < 1 {
            return Err(Error::InvalidParameter("precision k must be >= 1".into()));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("matrix dimensions must be positive".into()));
        }
        let modulus = (p as u128).checked_pow(k).filter(|&m| m <= 1 << 62).ok_or_else(|| {
            Error::LimitExceeded(format!("p^k = {p}^{k} too large for 64-bit entries"))
        })? as u64;
        Ok(ModPKMatrix { rows, cols, p, k, modulus, entries: vec![0; rows * cols] })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        assert!(v < self.modulus);
        self.entries[i * self.cols + j] = v;
    }

    fn mul_mod(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.modulus as u128) as u64
    }

    fn sub_mod(&self, a: u64, b: u64) -> u64 {
        (a + self.modulus - b) % self.modulus
    }

    /// p-valuation of an entry, with zero mapped to the precision k.
    fn valuation(&self, mut e: u64) -> u32 {
        if e == 0 {
            return self.k;
        }
        let mut v = 0;
        while e % self.p == 0 {
            e /= self.p;
            v += 1;
        }
        v
    }

    fn scale_row(&mut self, i: usize, c: u64) {
        for j in 0..self.cols {
            let v = self.mul_mod(self.at(i, j), c);
            self.entries[i * self.cols + j] = v;
        }
    }

    /// row_dst -= c * row_src
    fn sub_scaled_row(&mut self, dst: usize, src: usize, c: u64) {
        for j in 0..self.cols {
            let v = self.sub_mod(self.at(dst, j), self.mul_mod(c, self.at(src, j)));
            self.entries[dst * self.cols + j] = v;
        }
    }

    #[cfg(test)]
    fn scale_col(&mut self, j: usize, c: u64) {
        for i in 0..self.rows {
            let v = self.mul_mod(self.at(i, j), c);
            self.entries[i * self.cols + j] = v;
        }
    }

    /// col_dst -= c * col_src
    fn sub_scaled_col(&mut self, dst: usize, src: usize, c: u64) {
        for i in 0..self.rows {
            let v = self.sub_mod(self.at(i, dst), self.mul_mod(c, self.at(i, src)));
            self.entries[i * self.cols + dst] = v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.entries.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }
}

fn mod_inverse(a: u64, modulus: u64) -> u64 {
    // extended Euclid; a must be a unit
    let (mut old_r, mut r) = (a as i128, modulus as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    assert!(old_r == 1, "not a unit");
    (old_s.rem_euclid(modulus as i128)) as u64
}

/// Uniform random matrix in the ensemble at precision k.
pub fn random_matrix(
    ensemble: Ensemble,
    p: u64,
    k: u32,
    stream: &mut RandomStream,
) -> Result<ModPKMatrix> {
    ensemble.validate()?;
    let (rows, cols) = ensemble.shape();
    let mut m = ModPKMatrix::zero(rows as usize, cols as usize, p, k)?;
    let modulus = m.modulus;
    match ensemble {
        Ensemble::Square { .. } | Ensemble::Rect { .. } => {
            for i in 0..m.rows {
                for j in 0..m.cols {
                    m.set(i, j, stream.below(modulus));
                }
            }
        }
        Ensemble::Alternating { .. } => {
            for i in 0..m.rows {
                for j in i + 1..m.cols {
                    let v = stream.below(modulus);
                    m.set(i, j, v);
                    m.set(j, i, (modulus - v) % modulus);
                }
            }
        }
        Ensemble::Symmetric { .. } => {
            for i in 0..m.rows {
                for j in i..m.cols {
                    let v = stream.below(modulus);
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
        }
    }
    Ok(m)
}

/// Diagonal p-valuations of a Smith normal form over Z/p^k, ascending, plus
/// the count of valuations that saturated the precision.
///
/// Pivoting picks the first entry (row-major) of minimal valuation v < k,
/// normalizes its unit part to 1, clears its row and column, and recurses;
/// entries indistinguishable from 0 mod p^k yield valuation k.
pub fn smith_valuations(m: &ModPKMatrix) -> (Vec<u32>, usize) {
    let mut w = m.clone();
    let n = w.rows.min(w.cols);
    let mut vals = Vec::with_capacity(n);
    for step in 0..n {
        // minimal-valuation entry in the remaining submatrix
        let mut best: Option<(u32, usize, usize)> = None;
        for i in step..w.rows {
            for j in step..w.cols {
                let v = w.valuation(w.at(i, j));
                if v < w.k && best.map_or(true, |(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                    if v == 0 {
                        break;
                    }
                }
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
        }
        let Some((v, pi, pj)) = best else {
            // remaining block vanishes mod p^k
            for _ in step..n {
                vals.push(w.k);
            }
            break;
        };
        w.swap_rows(step, pi);
        w.swap_cols(step, pj);
        let pv = w.p.pow(v);
        let unit = w.at(step, step) / pv;
        w.scale_row(step, mod_inverse(unit, w.modulus));
        debug_assert_eq!(w.at(step, step), pv);
        for i in step + 1..w.rows {
            let f = w.at(i, step) / pv;
            w.sub_scaled_row(i, step, f);
        }
        for j in step + 1..w.cols {
            let f = w.at(step, j) / pv;
            w.sub_scaled_col(j, step, f);
        }
        vals.push(v);
    }
    let saturated = vals.iter().filter(|&&v| v == m.k).count();
    (vals, saturated)
}

/// Outcome of one cokernel trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CokernelSample {
    Type(Partition),
    /// Some Smith valuation reached the working precision, so the true part
    /// sizes are unknown.
    AmbiguousTruncation,
}

/// Cokernel type of a matrix at precision k: the nonzero Smith valuations in
/// decreasing order. For tall matrices the free rank is carried by the
/// missing columns and never enters the type.
pub fn cokernel_type(m: &ModPKMatrix) -> CokernelSample {
    let (vals, saturated) = smith_valuations(m);
    if saturated > 0 {
        return CokernelSample::AmbiguousTruncation;
    }
    let mut parts: Vec<u32> = vals.into_iter().filter(|&v| v > 0).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    CokernelSample::Type(Partition::new(parts).expect("sorted decreasing"))
}

/// Aggregates cokernel types over independent trials. Ambiguous samples are
/// counted separately, never dropped.
pub fn monte_carlo_cokernel(
    ensemble: Ensemble,
    p: u64,
    k: u32,
    trials: u64,
    stream: &mut RandomStream,
) -> Result<EmpiricalDistribution> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mut dist = EmpiricalDistribution::new();
    for _ in 0..trials {
        let m = random_matrix(ensemble, p, k, stream)?;
        match cokernel_type(&m) {
            CokernelSample::Type(lam) => dist.record(lam),
            CokernelSample::AmbiguousTruncation => dist.record_ambiguous(),
        }
    }
    Ok(dist)
}

/// Parallel Monte Carlo: trials are split across `jobs` workers with
/// substreams seed^0, ..., seed^(jobs-1), and the worker results are merged
/// in index order, so the aggregate depends only on (seed, jobs).
pub fn monte_carlo_cokernel_parallel(
    ensemble: Ensemble,
    p: u64,
    k: u32,
    trials: u64,
    seed: u64,
    jobs: u32,
) -> Result<EmpiricalDistribution> {
    run_parallel(trials, seed, jobs, move |share, stream| {
        monte_carlo_cokernel(ensemble, p, k, share, stream)
    })
}

fn run_parallel<F>(trials: u64, seed: u64, jobs: u32, work: F) -> Result<EmpiricalDistribution>
where
    F: Fn(u64, &mut RandomStream) -> Result<EmpiricalDistribution> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let jobs = jobs.max(1).min(trials.min(64) as u32) as u64;
    let results: Vec<Result<EmpiricalDistribution>> = std::thread::scope(|scope| {
        let work = &work;
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                scope.spawn(move || {
                    let share = trials / jobs + u64::from(w < trials % jobs);
                    let mut stream = RandomStream::derive(seed, w);
                    work(share, &mut stream)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut merged = EmpiricalDistribution::new();
    for r in results {
        merged.merge(r?);
    }
    Ok(merged)
}

/// The three-step random quotient: draw a group H from the rank-unbounded
/// u = 1 measure, draw w uniform elements, and return the type of the
/// quotient by the subgroup they generate. The quotient is computed as the
/// cokernel of the r x (r+w) relation matrix [diag(p^{mu_i}) | g_1 ... g_w]
/// at precision mu_1 + 1, which can never truncate.
pub struct QuotientProcess {
    w: u32,
    p: u64,
    sampler: PartitionSampler,
}

impl QuotientProcess {
    pub fn new(w: u32, p: u64, inf_terms: u32) -> Result<Self> {
        if w < 1 {
            return Err(Error::InvalidParameter("w must be >= 1".into()));
        }
        if !is_small_prime(p) {
            return Err(Error::InvalidParameter(format!("p must be a prime, got {p}")));
        }
        let _ = inf_terms;
        let spec = MeasureSpec::general(
            crate::exact::int(p as i64),
            Rational::one(),
            crate::groups::RankBound::Infinite,
        )?;
        Ok(QuotientProcess { w, p, sampler: PartitionSampler::new(spec)? })
    }

    pub fn run(&mut self, stream: &mut RandomStream) -> Result<CokernelSample> {
        let mu = self.sampler.sample(stream);
        if mu.is_empty() {
            return Ok(CokernelSample::Type(Partition::empty()));
        }
        let r = mu.num_parts() as usize;
        let k = mu.largest_part() + 1;
        let mut m = ModPKMatrix::zero(r, r + self.w as usize, self.p, k)?;
        for (i, &part) in mu.parts().iter().enumerate() {
            m.set(i, i, self.p.pow(part));
        }
        for j in 0..self.w as usize {
            for (i, &part) in mu.parts().iter().enumerate() {
                // uniform element of H, coordinate i uniform mod p^{mu_i}
                m.set(i, r + j, stream.below(self.p.pow(part)));
            }
        }
        let sample = cokernel_type(&m);
        debug_assert!(
            !matches!(sample, CokernelSample::AmbiguousTruncation),
            "quotient matrix cannot truncate at precision mu_1 + 1"
        );
        Ok(sample)
    }
}

/// One draw of the three-step quotient process.
pub fn random_quotient_process(
    w: u32,
    p: u64,
    stream: &mut RandomStream,
    inf_terms: u32,
) -> Result<CokernelSample> {
    QuotientProcess::new(w, p, inf_terms)?.run(stream)
}

/// Monte Carlo over the quotient process, parallel and deterministic in
/// (seed, jobs).
pub fn quotient_process_monte_carlo(
    w: u32,
    p: u64,
    trials: u64,
    seed: u64,
    jobs: u32,
) -> Result<EmpiricalDistribution> {
    run_parallel(trials, seed, jobs, move |share, stream| {
        let mut process = QuotientProcess::new(w, p, 64)?;
        let mut dist = EmpiricalDistribution::new();
        for _ in 0..share {
            match process.run(stream)? {
                CokernelSample::Type(lam) => dist.record(lam),
                CokernelSample::AmbiguousTruncation => dist.record_ambiguous(),
            }
        }
        Ok(dist)
    })
}

/// Exact distribution of cokernel types over ALL dim x dim matrices mod p^k,
/// by exhaustive enumeration. A zero-statistical-error oracle for small
/// (dim, p, k).
pub fn exhaustive_cokernel_census(dim: u32, p: u64, k: u32) -> Result<EmpiricalDistribution> {
    let cells = (dim * dim) as u32;
    let modulus = (p as u128).pow(k);
    let total = modulus.checked_pow(cells).ok_or_else(|| {
        Error::LimitExceeded("exhaustive census too large".into())
    })?;
    if total > 1 << 24 {
        return Err(Error::LimitExceeded(format!("exhaustive census of {total} matrices")));
    }
    let mut m = ModPKMatrix::zero(dim as usize, dim as usize, p, k)?;
    let mut dist = EmpiricalDistribution::new();
    let mut odometer = vec![0u64; cells as usize];
    loop {
        for (idx, &v) in odometer.iter().enumerate() {
            m.set(idx / dim as usize, idx % dim as usize, v);
        }
        match cokernel_type(&m) {
            CokernelSample::Type(lam) => dist.record(lam),
            CokernelSample::AmbiguousTruncation => dist.record_ambiguous(),
        }
        let mut pos = odometer.len();
        loop {
            if pos == 0 {
                return Ok(dist);
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < modulus as u64 {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// Total-variation distance between an empirical distribution and an exact
/// measure on a finite support list:
///
///   (1/2) sum_{lambda in support} |freq - pmf|
///   + (1/2) (empirical mass off support + exact mass off support).
///
/// Interval-valued masses contribute their midpoints to the per-partition
/// terms; the exact off-support mass is bounded by 1 minus the sum of the
/// mass lower bounds.
pub fn tv_distance(
    emp: &EmpiricalDistribution,
    spec: &MeasureSpec,
    support: &[Partition],
) -> Rational {
    assert!(emp.total() > 0, "empirical distribution has no trials");
    let mut diff_sum = Rational::zero();
    let mut emp_on = Rational::zero();
    let mut exact_lower = Rational::zero();
    for lam in support {
        let freq = emp.frequency(lam);
        let mass = spec.pmf(lam);
        diff_sum += (&freq - mass.midpoint()).abs();
        emp_on += freq;
        exact_lower += mass.lower();
    }
    let one = Rational::one();
    let emp_off = &one - emp_on;
    let exact_off = if exact_lower < one { &one - exact_lower } else { Rational::zero() };
    (diff_sum + emp_off + exact_off) / crate::exact::int(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use proptest::prelude::*;

    fn part(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn matrix_from(rows: usize, cols: usize, p: u64, k: u32, data: &[u64]) -> ModPKMatrix {
        let mut m = ModPKMatrix::zero(rows, cols, p, k).unwrap();
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, data[i * cols + j]);
            }
        }
        m
    }

    #[test]
    fn smith_valuations_examples() {
        // zero matrix: everything saturates
        let z = ModPKMatrix::zero(2, 2, 2, 3).unwrap();
        assert_eq!(smith_valuations(&z), (vec![3, 3], 2));
        // [[2,1],[0,2]] over p=2, k=4: valuations (0, 2)
        let m = matrix_from(2, 2, 2, 4, &[2, 1, 0, 2]);
        assert_eq!(smith_valuations(&m), (vec![0, 2], 0));
        // diagonal (1, p, p^2) already in normal form
        let m = matrix_from(3, 3, 3, 5, &[1, 0, 0, 0, 3, 0, 0, 0, 9]);
        assert_eq!(smith_valuations(&m), (vec![0, 1, 2], 0));
    }

    #[test]
    fn cokernel_type_examples() {
        let m = matrix_from(1, 1, 2, 3, &[2]);
        assert_eq!(cokernel_type(&m), CokernelSample::Type(part(&[1])));
        let m = matrix_from(2, 2, 2, 4, &[2, 1, 0, 2]);
        assert_eq!(cokernel_type(&m), CokernelSample::Type(part(&[2])));
        let z = ModPKMatrix::zero(1, 1, 2, 3).unwrap();
        assert_eq!(cokernel_type(&z), CokernelSample::AmbiguousTruncation);
        // tall matrix: the min-dimension valuations give the type
        let m = matrix_from(3, 2, 2, 4, &[1, 0, 0, 4, 0, 0]);
        assert_eq!(cokernel_type(&m), CokernelSample::Type(part(&[2])));
    }

    #[test]
    fn alternating_matrix_shape() {
        let mut stream = RandomStream::new(3);
        let m = random_matrix(Ensemble::Alternating { n: 4 }, 3, 4, &mut stream).unwrap();
        for i in 0..4 {
            assert_eq!(m.at(i, i), 0);
            for j in 0..4 {
                assert_eq!(m.at(j, i), (m.modulus - m.at(i, j)) % m.modulus);
            }
        }
        let m = random_matrix(Ensemble::Symmetric { n: 3 }, 2, 5, &mut stream).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.at(i, j), m.at(j, i));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut stream = RandomStream::new(0);
        assert!(random_matrix(Ensemble::Alternating { n: 3 }, 2, 4, &mut stream).is_err());
        assert!(random_matrix(Ensemble::Square { d: 1 }, 4, 4, &mut stream).is_err()); // not prime
        assert!(random_matrix(Ensemble::Square { d: 0 }, 2, 4, &mut stream).is_err());
        assert!(monte_carlo_cokernel(Ensemble::Square { d: 1 }, 2, 8, 0, &mut stream).is_err());
    }

    #[test]
    fn entry_histogram_uniform_within_three_sigma() {
        let mut stream = RandomStream::new(41);
        let trials = 40_000u64;
        let modulus = 8u64;
        let mut hist = vec![0u64; modulus as usize];
        for _ in 0..trials {
            let m = random_matrix(Ensemble::Square { d: 1 }, 2, 3, &mut stream).unwrap();
            hist[m.at(0, 0) as usize] += 1;
        }
        let expect = trials as f64 / modulus as f64;
        let sigma = (expect * (1.0 - 1.0 / modulus as f64)).sqrt();
        for (v, &c) in hist.iter().enumerate() {
            assert!(
                (c as f64 - expect).abs() < 3.0 * sigma,
                "value {v} count {c} expected {expect}"
            );
        }
    }

    #[test]
    fn scalar_valuation_law() {
        // 1x1 matrices over Z/2^8: valuation-1 frequency near 1/4
        let dist = monte_carlo_cokernel_parallel(Ensemble::Square { d: 1 }, 2, 8, 100_000, 17, 4)
            .unwrap();
        let freq = dist.frequency(&part(&[1]));
        assert!((freq - ratio(1, 4)).abs() < ratio(1, 100));
        // alternating 2x2: empty cokernel iff the off-diagonal entry is a unit
        let dist =
            monte_carlo_cokernel_parallel(Ensemble::Alternating { n: 2 }, 2, 8, 100_000, 18, 4)
                .unwrap();
        let freq = dist.frequency(&Partition::empty());
        assert!((freq - ratio(1, 2)).abs() < ratio(1, 100));
    }

    #[test]
    fn ambiguity_decreases_with_precision() {
        let run = |k: u32| {
            monte_carlo_cokernel_parallel(Ensemble::Square { d: 2 }, 2, k, 50_000, 23, 4)
                .unwrap()
                .ambiguous()
        };
        let coarse = run(2);
        let fine = run(6);
        assert!(fine < coarse, "ambiguous at k=2: {coarse}, at k=6: {fine}");
    }

    #[test]
    fn parallel_merge_is_deterministic() {
        let a = monte_carlo_cokernel_parallel(Ensemble::Square { d: 2 }, 2, 6, 4000, 5, 4).unwrap();
        let b = monte_carlo_cokernel_parallel(Ensemble::Square { d: 2 }, 2, 6, 4000, 5, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quotient_process_single_relation() {
        // mu=(1), w=1, p=2: the quotient is trivial iff the drawn element
        // generates; over many trials both outcomes appear
        let dist = quotient_process_monte_carlo(1, 2, 20_000, 11, 4).unwrap();
        assert_eq!(dist.ambiguous(), 0);
        assert!(dist.count(&Partition::empty()) > 0);
        assert!(dist.count(&part(&[1])) > 0);
    }

    #[test]
    fn tv_distance_extremes() {
        let spec: MeasureSpec = "general:p=2,u=1,d=1".parse().unwrap();
        let support: Vec<Partition> =
            (0..=10u32).map(|n| if n == 0 { Partition::empty() } else { part(&[n]) }).collect();
        // all mass on the empty partition: distance approaches 1/2
        let mut dist = EmpiricalDistribution::new();
        for _ in 0..1000 {
            dist.record(Partition::empty());
        }
        let tv = tv_distance(&dist, &spec, &support);
        assert!(tv > ratio(49, 100) && tv < ratio(51, 100));
        // empirical exactly proportional on a truncated support: only
        // truncation terms remain
        let mut dist = EmpiricalDistribution::new();
        for _ in 0..512 {
            dist.record(Partition::empty());
        }
        for n in 1..=8u32 {
            for _ in 0..(512u64 >> n) {
                dist.record(part(&[n]));
            }
        }
        let support: Vec<Partition> =
            (0..=8u32).map(|n| if n == 0 { Partition::empty() } else { part(&[n]) }).collect();
        let tv = tv_distance(&dist, &spec, &support);
        assert!(tv < ratio(1, 100), "tv = {tv}");
    }

    #[test]
    fn ensemble_spec_parsing() {
        assert_eq!(
            parse_ensemble_spec("square:p=2,d=2").unwrap(),
            (Ensemble::Square { d: 2 }, 2)
        );
        assert_eq!(
            parse_ensemble_spec("rect:p=2,rows=2,cols=3").unwrap(),
            (Ensemble::Rect { rows: 2, cols: 3 }, 2)
        );
        assert_eq!(parse_ensemble_spec("alt:p=3,n=4").unwrap(), (Ensemble::Alternating { n: 4 }, 3));
        assert!(parse_ensemble_spec("alt:p=3,n=3").is_err());
        assert!(parse_ensemble_spec("square:d=2").is_err());
        assert!(parse_ensemble_spec("frob:p=2,d=2").is_err());
    }

    /// Applies random invertible row and column operations; Smith valuations
    /// must be unchanged.
    fn randomize_equivalent(m: &mut ModPKMatrix, stream: &mut RandomStream, ops: usize) {
        for _ in 0..ops {
            match stream.below(6) {
                0 => {
                    let i = stream.below(m.rows as u64) as usize;
                    let j = stream.below(m.rows as u64) as usize;
                    if i != j {
                        let c = stream.below(m.modulus);
                        // dst += c * src, written via sub with the negation
                        m.sub_scaled_row(i, j, (m.modulus - c) % m.modulus);
                    }
                }
                1 => {
                    let i = stream.below(m.cols as u64) as usize;
                    let j = stream.below(m.cols as u64) as usize;
                    if i != j {
                        let c = stream.below(m.modulus);
                        m.sub_scaled_col(i, j, (m.modulus - c) % m.modulus);
                    }
                }
                2 => {
                    let i = stream.below(m.rows as u64) as usize;
                    let unit = random_unit(m, stream);
                    m.scale_row(i, unit);
                }
                3 => {
                    let j = stream.below(m.cols as u64) as usize;
                    let unit = random_unit(m, stream);
                    m.scale_col(j, unit);
                }
                4 => {
                    let i = stream.below(m.rows as u64) as usize;
                    let j = stream.below(m.rows as u64) as usize;
                    m.swap_rows(i, j);
                }
                _ => {
                    let i = stream.below(m.cols as u64) as usize;
                    let j = stream.below(m.cols as u64) as usize;
                    m.swap_cols(i, j);
                }
            }
        }
    }

    fn random_unit(m: &ModPKMatrix, stream: &mut RandomStream) -> u64 {
        loop {
            let v = stream.below(m.modulus);
            if v % m.p != 0 {
                return v;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn smith_invariant_under_equivalence(seed in 0u64..5000, rows in 1usize..4,
                                             cols in 1usize..4, pk in 0usize..4) {
            let (p, k) = [(2u64, 6u32), (3, 4), (2, 3), (5, 3)][pk];
            let mut stream = RandomStream::new(seed);
            let mut m = ModPKMatrix::zero(rows, cols, p, k).unwrap();
            for i in 0..rows {
                for j in 0..cols {
                    m.set(i, j, stream.below(m.modulus));
                }
            }
            let reference = smith_valuations(&m);
            randomize_equivalent(&mut m, &mut stream, 40);
            prop_assert_eq!(smith_valuations(&m), reference);
        }
    }

    #[test]
    fn exhaustive_small_census_scalar() {
        // all 1x1 matrices over Z/4: unit mass 1/2, valuation-1 mass 1/4,
        // ambiguous mass 1/4
        let dist = exhaustive_cokernel_census(1, 2, 2).unwrap();
        assert_eq!(dist.total(), 4);
        assert_eq!(dist.count(&Partition::empty()), 2);
        assert_eq!(dist.count(&part(&[1])), 1);
        assert_eq!(dist.ambiguous(), 1);
    }

    #[test]
    fn tv_uses_interval_midpoints() {
        let spec: MeasureSpec = "general:p=2,u=1,d=inf".parse().unwrap();
        let mut dist = EmpiricalDistribution::new();
        for _ in 0..100 {
            dist.record(Partition::empty());
        }
        let support = vec![Partition::empty()];
        let tv = tv_distance(&dist, &spec, &support);
        assert!(tv > int(0) && tv < int(1));
    }
}
