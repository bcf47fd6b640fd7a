//! Prime statistics over twin-row pairs: per-pair scans, column gaps, the
//! mean gap `M / pi`, equidistribution across pairs, the level-to-level gap
//! ratio, and a twin prime census.

use std::ops::RangeInclusive;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{MatrixSpec, TwinRowPair};
use crate::numtheory::{is_prime, PrimeBasis};
use crate::sieve;

/// Values scanned must stay at or below this bound.
pub const MAX_CELL_VALUE: u64 = 1 << 63;

/// Minimum columns per level for the statistics operations, as a multiple of `k`.
pub const MIN_COLUMNS_PER_K: u64 = 100;

/// Minimum `M_k` on every level of a gap recursion run.
pub const MIN_GAP_COLUMNS: u64 = 100;

/// Prime cells of one twin-row pair over columns `1..=columns`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentScan {
    pub basis: PrimeBasis,
    pub pair: TwinRowPair,
    pub columns: u64,
    /// Columns holding a prime in the lower row.
    pub primes_low: Vec<u64>,
    pub primes_high: Vec<u64>,
    /// Columns where both rows hold a prime, i.e. a twin prime pair.
    pub twin_hits: Vec<u64>,
    /// Columns from the fragment's left edge to the first prime cell.
    pub leading_gap: Option<u64>,
    /// Columns from the last prime cell to the fragment's right edge.
    pub trailing_gap: Option<u64>,
}

impl FragmentScan {
    /// `pi_{k,l}`: primes in both rows of the fragment.
    pub fn pi_count(&self) -> u64 {
        (self.primes_low.len() + self.primes_high.len()) as u64
    }

    pub fn first_twin_column(&self) -> Option<u64> {
        self.twin_hits.first().copied()
    }

    /// Cell values `(lower, upper)` in column `j`.
    pub fn values_at(&self, j: u64) -> (u64, u64) {
        let step = self.basis.primorial() * (j - 1);
        (self.pair.lower_residue + step, self.pair.upper_residue + step)
    }
}

fn check_pair(basis: &PrimeBasis, pair: &TwinRowPair, columns: u64) -> Result<()> {
    if basis.k() < 2 {
        return Err(Error::Range("twin-row pairs exist only for k >= 2".into()));
    }
    if columns == 0 {
        return Err(Error::Range("fragment needs at least one column".into()));
    }
    let p = basis.primorial();
    if pair.lower_residue < 2
        || pair.upper_residue != pair.lower_residue + 2
        || pair.upper_residue > p + 1
        || !basis.is_coprime(pair.lower_residue)
        || !basis.is_coprime(pair.upper_residue)
    {
        return Err(Error::Domain(format!(
            "({}, {}) is not a twin-row pair of A_{}",
            pair.lower_residue,
            pair.upper_residue,
            basis.k()
        )));
    }
    let top = p
        .checked_mul(columns - 1)
        .and_then(|v| v.checked_add(pair.upper_residue))
        .filter(|&v| v <= MAX_CELL_VALUE);
    if top.is_none() {
        return Err(Error::Range(format!("{columns} columns of A_{} exceed 2^63", basis.k())));
    }
    Ok(())
}

/// Classifies every cell of both rows of `pair` over columns `1..=columns`.
pub fn scan_pair(basis: &PrimeBasis, pair: &TwinRowPair, columns: u64) -> Result<FragmentScan> {
    check_pair(basis, pair, columns)?;
    let p = basis.primorial();
    let mut scan = FragmentScan {
        basis: basis.clone(),
        pair: *pair,
        columns,
        primes_low: Vec::new(),
        primes_high: Vec::new(),
        twin_hits: Vec::new(),
        leading_gap: None,
        trailing_gap: None,
    };
    for j in 1..=columns {
        let lo = pair.lower_residue + p * (j - 1);
        let lo_prime = is_prime(lo);
        let hi_prime = is_prime(lo + 2);
        if lo_prime {
            scan.primes_low.push(j);
        }
        if hi_prime {
            scan.primes_high.push(j);
        }
        if lo_prime && hi_prime {
            scan.twin_hits.push(j);
        }
        if lo_prime || hi_prime {
            scan.leading_gap.get_or_insert(j);
            scan.trailing_gap = Some(columns - j);
        }
    }
    Ok(scan)
}

/// Number of primes in both rows of `pair` over columns `1..=columns`.
pub fn count_pair_primes(basis: &PrimeBasis, pair: &TwinRowPair, columns: u64) -> Result<u64> {
    check_pair(basis, pair, columns)?;
    let p = basis.primorial();
    Ok((0..columns)
        .map(|c| {
            let lo = pair.lower_residue + p * c;
            u64::from(is_prime(lo)) + u64::from(is_prime(lo + 2))
        })
        .sum())
}

/// Smallest column `<= columns` where both cells are prime.
pub fn pair_has_twin(basis: &PrimeBasis, pair: &TwinRowPair, columns: u64) -> Result<Option<u64>> {
    check_pair(basis, pair, columns)?;
    let p = basis.primorial();
    Ok((1..=columns).find(|j| {
        let lo = pair.lower_residue + p * (j - 1);
        is_prime(lo) && is_prime(lo + 2)
    }))
}

/// Column distances between successive primes of the fragment.
///
/// Primes are ordered by column, lower row first, so a twin contributes a 0
/// and horizontally adjacent primes contribute a 1. Fewer than two primes
/// yields an empty list.
pub fn cell_gaps(scan: &FragmentScan) -> Vec<u64> {
    let mut merged = Vec::with_capacity(scan.pi_count() as usize);
    let (mut lo, mut hi) = (scan.primes_low.iter().peekable(), scan.primes_high.iter().peekable());
    loop {
        let next = match (lo.peek(), hi.peek()) {
            (Some(&&a), Some(&&b)) if a <= b => lo.next(),
            (Some(_), Some(_)) => hi.next(),
            (Some(_), None) => lo.next(),
            (None, Some(_)) => hi.next(),
            (None, None) => break,
        };
        merged.extend(next.copied());
    }
    merged.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Mean column distance between neighboring primes, `M / pi`.
pub fn d_cp(scan: &FragmentScan) -> Result<Ratio<u64>> {
    let pi = scan.pi_count();
    if pi == 0 {
        return Err(Error::UndefinedStatistic(format!(
            "pair ({}, {}) has no primes in {} columns",
            scan.pair.lower_residue, scan.pair.upper_residue, scan.columns
        )));
    }
    Ok(Ratio::new(scan.columns, pi))
}

/// Scans every twin-row pair of `spec` over `columns` columns, in row order.
pub fn scan_level(spec: &MatrixSpec, columns: u64) -> Result<Vec<FragmentScan>> {
    let pairs: Vec<TwinRowPair> = spec.twin_pairs()?.collect();
    pairs.par_iter().map(|pair| scan_pair(spec.basis(), pair, columns)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquidistributionReport {
    pub k: usize,
    pub columns: u64,
    /// `(pair, pi)` in the order the sample was given.
    pub per_pair: Vec<(TwinRowPair, u64)>,
    pub mean: f64,
    /// `max_l |pi_l - mean| / mean`.
    pub max_relative_deviation: f64,
}

fn check_statistics_columns(k: usize, columns: u64) -> Result<()> {
    let min = MIN_COLUMNS_PER_K * k as u64;
    if columns < min {
        return Err(Error::Range(format!("{columns} columns at k = {k}; need at least {min}")));
    }
    Ok(())
}

/// Prime counts across a sample of twin-row pairs and their spread.
pub fn equidistribution_report(
    basis: &PrimeBasis,
    columns: u64,
    sample: &[TwinRowPair],
) -> Result<EquidistributionReport> {
    if basis.k() < 3 {
        return Err(Error::Range("equidistribution needs k >= 3".into()));
    }
    check_statistics_columns(basis.k(), columns)?;
    if sample.is_empty() {
        return Err(Error::UndefinedStatistic("empty pair sample".into()));
    }
    let counts: Vec<u64> = sample
        .par_iter()
        .map(|pair| count_pair_primes(basis, pair, columns))
        .collect::<Result<_>>()?;
    let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
    if mean == 0.0 {
        return Err(Error::UndefinedStatistic("no primes in any sampled pair".into()));
    }
    let max_relative_deviation = counts
        .iter()
        .map(|&c| (c as f64 - mean).abs() / mean)
        .fold(0.0, f64::max);
    Ok(EquidistributionReport {
        k: basis.k(),
        columns,
        per_pair: sample.iter().copied().zip(counts).collect(),
        mean,
        max_relative_deviation,
    })
}

/// Gap statistics for one matrix level, all pairs scanned over the same value range.
#[derive(Debug, Clone, PartialEq)]
pub struct GapLevel {
    pub k: usize,
    pub prime: u64,
    /// `M_k = floor(N / p_k#)`.
    pub columns: u64,
    pub pairs: u64,
    pub pi_total: u64,
    pub pi_avg: Ratio<u128>,
    /// `M_k / pi_avg`.
    pub d_avg: Ratio<u128>,
    pub d_min: Ratio<u128>,
    pub d_max: Ratio<u128>,
    /// `d_k / d_{k-1}`, when the previous level is in the report.
    pub empirical_ratio: Option<Ratio<u128>>,
    /// `(p_k - 1) / p_k`.
    pub predicted_ratio: Ratio<u128>,
    /// `prod_{i<=k} (p_i - 1) / p_i`.
    pub mertens_product: Ratio<u128>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub bound: u64,
    pub levels: Vec<GapLevel>,
}

/// Measures the mean column gap on each level of `ks`, with every level
/// scanning values up to the shared `bound`, and sets each level's
/// empirical ratio to the previous one next to `(p_k - 1) / p_k`.
pub fn gap_recursion_check(bound: u64, ks: RangeInclusive<usize>) -> Result<GapReport> {
    if ks.is_empty() || *ks.start() < 2 {
        return Err(Error::Range("gap recursion needs levels k >= 2".into()));
    }
    let mut levels: Vec<GapLevel> = Vec::new();
    for k in ks {
        let spec = MatrixSpec::for_level(k)?;
        let columns = bound / spec.rows();
        if columns < MIN_GAP_COLUMNS {
            return Err(Error::Range(format!(
                "bound {bound} leaves {columns} columns at k = {k}; need at least {MIN_GAP_COLUMNS}"
            )));
        }
        let pairs: Vec<TwinRowPair> = spec.twin_pairs()?.collect();
        let counts: Vec<u64> = pairs
            .par_iter()
            .map(|pair| count_pair_primes(spec.basis(), pair, columns))
            .collect::<Result<_>>()?;
        let pi_total: u64 = counts.iter().sum();
        let (lo, hi) = (counts.iter().min().copied(), counts.iter().max().copied());
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(Error::UndefinedStatistic(format!("A_{k} has no twin-row pairs")));
        };
        if lo == 0 {
            return Err(Error::UndefinedStatistic(format!(
                "a twin-row pair of A_{k} has no primes in {columns} columns"
            )));
        }
        let m = pairs.len() as u128;
        let cols = u128::from(columns);
        let pi_avg = Ratio::new(u128::from(pi_total), m);
        let d_avg = Ratio::from_integer(cols) / pi_avg;
        let prime = spec.basis().largest();
        let empirical_ratio = levels.last().map(|prev| d_avg / prev.d_avg);
        levels.push(GapLevel {
            k,
            prime,
            columns,
            pairs: m as u64,
            pi_total,
            pi_avg,
            d_avg,
            d_min: Ratio::new(cols, u128::from(hi)),
            d_max: Ratio::new(cols, u128::from(lo)),
            empirical_ratio,
            predicted_ratio: Ratio::new(u128::from(prime - 1), u128::from(prime)),
            mertens_product: mertens_prediction(k)?,
        });
    }
    Ok(GapReport { bound, levels })
}

/// `prod_{i=1..k} (p_i - 1) / p_i`, exact.
pub fn mertens_prediction(k: usize) -> Result<Ratio<u128>> {
    let basis = PrimeBasis::new(k)?;
    Ok(basis
        .primes()
        .iter()
        .map(|&p| Ratio::new(u128::from(p - 1), u128::from(p)))
        .product())
}

pub fn ratio_to_f64(r: &Ratio<u128>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinCensus {
    pub bound: u64,
    pub count: u64,
    pub pairs: Option<Vec<(u64, u64)>>,
}

/// Counts twin primes `(p, p + 2)` with `p + 2 <= bound` using the classical sieve.
pub fn twin_census(bound: u64, keep_pairs: bool) -> Result<TwinCensus> {
    check_census_bound(bound)?;
    let mut count = 0;
    let mut pairs = keep_pairs.then(Vec::new);
    for pair in sieve::twin_primes(bound) {
        count += 1;
        if let Some(list) = pairs.as_mut() {
            list.push(pair);
        }
    }
    Ok(TwinCensus { bound, count, pairs })
}

fn check_census_bound(bound: u64) -> Result<()> {
    if bound < 5 {
        return Err(Error::Range(format!("census bound {bound} below 5")));
    }
    Ok(())
}

/// Twin primes up to `bound` found by walking the twin-row pairs of `A_k`,
/// plus the pairs touching a basis prime, which sit in colored rows.
pub fn twin_census_via_rows(bound: u64, k: usize) -> Result<Vec<(u64, u64)>> {
    check_census_bound(bound)?;
    let spec = MatrixSpec::for_level(k)?;
    let p = spec.rows();
    let pairs: Vec<TwinRowPair> = spec.twin_pairs()?.collect();
    let per_pair: Vec<Vec<(u64, u64)>> = pairs
        .par_iter()
        .map(|pair| {
            let mut hits = Vec::new();
            let mut lo = pair.lower_residue;
            while lo <= bound.saturating_sub(2) {
                if is_prime(lo) && is_prime(lo + 2) {
                    hits.push((lo, lo + 2));
                }
                match lo.checked_add(p) {
                    Some(next) => lo = next,
                    None => break,
                }
            }
            hits
        })
        .collect();
    let mut twins: Vec<(u64, u64)> = spec
        .basis()
        .primes()
        .iter()
        .flat_map(|&q| [q.wrapping_sub(2), q])
        .filter(|&lo| lo >= 2 && lo + 2 <= bound && is_prime(lo) && is_prime(lo + 2))
        .map(|lo| (lo, lo + 2))
        .collect();
    twins.extend(per_pair.into_iter().flatten());
    twins.sort_unstable();
    twins.dedup();
    Ok(twins)
}
