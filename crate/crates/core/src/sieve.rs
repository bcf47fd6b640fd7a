//! Classical segmented sieve of Eratosthenes.
//!
//! Shares no code with the matrix machinery or the Miller-Rabin test, so
//! results from the two can be cross-checked against each other.

/// Sieving window, in odd numbers per segment.
const SEGMENT_ODDS: usize = 1 << 16;

/// All primes `<= limit` by a plain sieve.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            for m in (i * i..=n).step_by(i) {
                composite[m] = true;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&i| !composite[i]).map(|i| i as u64).collect()
}

/// Iterates the primes `<= limit` in increasing order, one odd-only segment
/// at a time, so memory stays at `O(sqrt(limit) + segment)`.
#[derive(Debug, Clone)]
pub struct SegmentedPrimes {
    limit: u64,
    base: Vec<u64>,
    /// Primes of the current segment, reversed for popping.
    pending: Vec<u64>,
    /// First odd number of the next segment to sieve.
    next_start: u64,
    emitted_two: bool,
}

impl SegmentedPrimes {
    pub fn new(limit: u64) -> Self {
        let root = (limit as f64).sqrt() as u64 + 1;
        let base = primes_up_to(root).into_iter().skip(1).collect();
        SegmentedPrimes { limit, base, pending: Vec::new(), next_start: 3, emitted_two: false }
    }

    fn fill(&mut self) {
        let lo = self.next_start;
        let hi = lo.saturating_add(2 * SEGMENT_ODDS as u64 - 2).min(self.limit);
        if lo > hi {
            return;
        }
        let len = ((hi - lo) / 2 + 1) as usize;
        let mut composite = vec![false; len];
        for &p in &self.base {
            if p * p > hi {
                break;
            }
            // First odd multiple of p that is >= max(p*p, lo).
            let mut m = (p * p).max(lo.div_ceil(p) * p);
            if m % 2 == 0 {
                m += p;
            }
            while m <= hi {
                composite[((m - lo) / 2) as usize] = true;
                m += 2 * p;
            }
        }
        self.pending = (0..len)
            .rev()
            .filter(|&i| !composite[i])
            .map(|i| lo + 2 * i as u64)
            .collect();
        self.next_start = hi + 2;
    }
}

impl Iterator for SegmentedPrimes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if !self.emitted_two {
            self.emitted_two = true;
            if self.limit >= 2 {
                return Some(2);
            }
        }
        while self.pending.is_empty() {
            if self.next_start > self.limit {
                return None;
            }
            self.fill();
        }
        self.pending.pop()
    }
}

/// Twin prime pairs `(p, p + 2)` with `p + 2 <= limit`, streamed from the sieve.
pub fn twin_primes(limit: u64) -> impl Iterator<Item = (u64, u64)> {
    let mut primes = SegmentedPrimes::new(limit);
    let mut prev = primes.next();
    std::iter::from_fn(move || loop {
        let p = prev?;
        let q = primes.next()?;
        prev = Some(q);
        if q - p == 2 {
            return Some((p, q));
        }
    })
}
