//! The matrices `A_k` as virtual objects.
//!
//! Row `i` (1-based, `1 <= i <= p_k#`) holds the progression
//! `(i + 1) + p_k# * (j - 1)` for columns `j >= 1`, so its residue is `i + 1`
//! and residues run over `2..=p_k# + 1`. The number 1 sits outside every row.
//! Nothing is materialized: cells are computed on demand.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::numtheory::{gcd, is_prime, mod_inverse, PrimeBasis};

/// Largest level whose twin-row pairs may be enumerated (`p_9# = 223092870` rows).
pub const MAX_ENUMERATION_K: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSpec {
    basis: PrimeBasis,
}

impl MatrixSpec {
    pub fn new(basis: PrimeBasis) -> Self {
        MatrixSpec { basis }
    }

    pub fn for_level(k: usize) -> Result<Self> {
        Ok(MatrixSpec::new(PrimeBasis::new(k)?))
    }

    pub fn basis(&self) -> &PrimeBasis {
        &self.basis
    }

    pub fn k(&self) -> usize {
        self.basis.k()
    }

    /// Row count, `p_k#`.
    pub fn rows(&self) -> u64 {
        self.basis.primorial()
    }

    fn check_row(&self, i: u64) -> Result<()> {
        if i == 0 || i > self.rows() {
            return Err(Error::Range(format!("row {i} outside 1..={}", self.rows())));
        }
        Ok(())
    }

    /// Cell value `a(k, i, j) = (i + 1) + p_k# * (j - 1)`.
    pub fn value_at(&self, i: u64, j: u64) -> Result<u64> {
        self.check_row(i)?;
        if j == 0 {
            return Err(Error::Range("column index starts at 1".into()));
        }
        self.rows()
            .checked_mul(j - 1)
            .and_then(|v| v.checked_add(i + 1))
            .ok_or_else(|| Error::Range(format!("a({}, {i}, {j}) overflows u64", self.k())))
    }

    pub fn classify_row(&self, i: u64) -> Result<RowClass> {
        self.check_row(i)?;
        let residue = i + 1;
        let status = if gcd(residue, self.rows()) == 1 {
            RowStatus::Uncolored
        } else {
            RowStatus::Colored
        };
        let leading_prime = self.basis.primes().contains(&residue).then_some(residue);
        Ok(RowClass { row_index: i, residue, status, leading_prime })
    }

    /// Streams every twin-row pair in increasing row order.
    pub fn twin_pairs(&self) -> Result<TwinPairs<'_>> {
        self.twin_pairs_in(1..=self.rows())
    }

    /// Streams the twin-row pairs whose lower row lies in `rows`, so a full
    /// enumeration can be split across workers.
    pub fn twin_pairs_in(&self, rows: RangeInclusive<u64>) -> Result<TwinPairs<'_>> {
        check_enumeration_level(self.k())?;
        let first_lower = (*rows.start()).max(1) + 1;
        // Upper residue may not exceed p_k# + 1.
        let last_lower = (*rows.end() + 1).min(self.rows() - 1);
        Ok(TwinPairs::new(&self.basis, first_lower, last_lower))
    }

    /// `m_k = prod_{i=2..k} (p_i - 2)`, the closed-form number of twin-row pairs.
    pub fn twin_pair_count(&self) -> Result<u64> {
        if self.k() < 2 {
            return Err(Error::Range("twin-row pairs exist only for k >= 2".into()));
        }
        Ok(self.basis.primes()[1..].iter().map(|p| p - 2).product())
    }

    /// The `p_k` lifts of a twin-row pair of `A_{k-1}` into this matrix.
    pub fn lift_pair(&self, parent: &TwinRowPair) -> Result<Vec<LiftedPair>> {
        let prev = self.check_parent(parent)?;
        let p = self.basis.largest();
        let step = prev.primorial();
        Ok((0..p)
            .map(|offset| {
                let pair = TwinRowPair::from_lower_residue(parent.lower_residue + step * offset);
                let fate = if pair.lower_residue.is_multiple_of(p) {
                    Fate::KilledLow
                } else if pair.upper_residue.is_multiple_of(p) {
                    Fate::KilledHigh
                } else {
                    Fate::Survivor
                };
                LiftedPair { offset, pair, fate }
            })
            .collect())
    }

    /// The two lift offsets at which `p_k` divides an endpoint, solved with a
    /// modular inverse: `r + P * m == 0 (mod p)` gives `m = -r * P^-1 (mod p)`.
    pub fn killed_offsets(&self, parent: &TwinRowPair) -> Result<KilledOffsets> {
        let prev = self.check_parent(parent)?;
        let p = self.basis.largest();
        let inv = mod_inverse(prev.primorial() % p, p)?;
        let solve = |residue: u64| ((p - residue % p) % p) * inv % p;
        let offsets = KilledOffsets {
            low: solve(parent.lower_residue),
            high: solve(parent.upper_residue),
        };
        debug_assert_ne!(offsets.low, offsets.high);
        Ok(offsets)
    }

    fn check_parent(&self, parent: &TwinRowPair) -> Result<PrimeBasis> {
        let prev = self
            .basis
            .parent()
            .ok_or_else(|| Error::Domain("A_1 has no parent level to lift from".into()))?;
        let in_range = parent.lower_residue >= 2 && parent.upper_residue <= prev.primorial() + 1;
        if !in_range
            || parent.upper_residue != parent.lower_residue + 2
            || !prev.is_coprime(parent.lower_residue)
            || !prev.is_coprime(parent.upper_residue)
        {
            return Err(Error::Domain(format!(
                "({}, {}) is not a twin-row pair of A_{}",
                parent.lower_residue,
                parent.upper_residue,
                prev.k()
            )));
        }
        Ok(prev)
    }

    /// One pixel per cell: 255 for a prime, 0 for a composite, 128 for the
    /// value 1 (which never appears in a row but keeps its reserved shade).
    pub fn render_fragment(&self, rows: RangeInclusive<u64>, columns: u64) -> Result<Graymap> {
        if rows.is_empty() {
            return Err(Error::Range("empty row range".into()));
        }
        self.check_row(*rows.start())?;
        self.check_row(*rows.end())?;
        if columns == 0 {
            return Err(Error::Range("fragment needs at least one column".into()));
        }
        let mut pixels = Vec::new();
        for i in rows.clone() {
            for j in 1..=columns {
                let v = self.value_at(i, j)?;
                pixels.push(match v {
                    1 => 128,
                    v if is_prime(v) => 255,
                    _ => 0,
                });
            }
        }
        Ok(Graymap {
            width: columns as usize,
            height: (rows.end() - rows.start() + 1) as usize,
            pixels,
        })
    }
}

fn check_enumeration_level(k: usize) -> Result<()> {
    if !(2..=MAX_ENUMERATION_K).contains(&k) {
        return Err(Error::Range(format!(
            "twin-row enumeration supports 2 <= k <= {MAX_ENUMERATION_K}, got {k}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowStatus {
    /// Shares a factor with the primorial: composites only, bar a leading basis prime.
    Colored,
    Uncolored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowClass {
    pub row_index: u64,
    pub residue: u64,
    pub status: RowStatus,
    /// Set when the first cell is one of the basis primes.
    pub leading_prime: Option<u64>,
}

/// Two uncolored rows two apart, identified by the lower residue.
///
/// The top pair `(P - 1, P + 1)` keeps `P + 1` as its upper residue rather
/// than wrapping to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwinRowPair {
    pub lower_row: u64,
    pub upper_row: u64,
    pub lower_residue: u64,
    pub upper_residue: u64,
}

impl TwinRowPair {
    pub fn from_lower_residue(residue: u64) -> Self {
        TwinRowPair {
            lower_row: residue - 1,
            upper_row: residue + 1,
            lower_residue: residue,
            upper_residue: residue + 2,
        }
    }
}

/// Sliding two-residue window over the odd residues of `A_k`.
///
/// Every basis contains 2, so only odd residues can be uncolored; the window
/// holds the status of `r` and tests `r + 2`.
#[derive(Debug, Clone)]
pub struct TwinPairs<'a> {
    odd_primes: &'a [u64],
    next_lower: u64,
    last_lower: u64,
    lower_uncolored: bool,
}

impl<'a> TwinPairs<'a> {
    fn new(basis: &'a PrimeBasis, first_lower: u64, last_lower: u64) -> Self {
        let odd_primes = &basis.primes()[1..];
        let next_lower = first_lower | 1;
        let lower_uncolored = residue_uncolored(odd_primes, next_lower);
        TwinPairs { odd_primes, next_lower, last_lower, lower_uncolored }
    }
}

fn residue_uncolored(odd_primes: &[u64], r: u64) -> bool {
    odd_primes.iter().all(|&p| !r.is_multiple_of(p))
}

impl Iterator for TwinPairs<'_> {
    type Item = TwinRowPair;

    fn next(&mut self) -> Option<TwinRowPair> {
        while self.next_lower <= self.last_lower {
            let lower = self.next_lower;
            let upper_uncolored = residue_uncolored(self.odd_primes, lower + 2);
            let hit = self.lower_uncolored && upper_uncolored;
            self.next_lower += 2;
            self.lower_uncolored = upper_uncolored;
            if hit {
                return Some(TwinRowPair::from_lower_residue(lower));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fate {
    Survivor,
    /// `p_k` divides the lower residue.
    KilledLow,
    /// `p_k` divides the upper residue.
    KilledHigh,
}

/// One child of a lifted pair: lower residue `r + p_{k-1}# * offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftedPair {
    pub offset: u64,
    pub pair: TwinRowPair,
    pub fate: Fate,
}

/// Lift offsets (`0..p_k`) at which one endpoint becomes divisible by `p_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KilledOffsets {
    pub low: u64,
    pub high: u64,
}

impl KilledOffsets {
    /// Offsets counted from 1 instead of 0, matching the parameterization
    /// `p_{k-1}# * m -/+ 1` with `m = 1..=p_k` when the parent is the top pair.
    pub fn one_based(&self) -> (u64, u64) {
        (self.low + 1, self.high + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Graymap {
    pub fn row(&self, r: usize) -> &[u8] {
        &self.pixels[r * self.width..(r + 1) * self.width]
    }

    /// Plain (`P2`) PGM text: header lines, then one line per pixel row with
    /// single-space separators, ending in a newline.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for r in 0..self.height {
            let line: Vec<String> = self.row(r).iter().map(u8::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn spec(k: usize) -> MatrixSpec {
        MatrixSpec::for_level(k).unwrap()
    }

    fn lowers(k: usize) -> Vec<u64> {
        spec(k).twin_pairs().unwrap().map(|p| p.lower_residue).collect()
    }

    /// Direct enumeration over all rows with gcd, independent of the window.
    fn brute_lowers(k: usize) -> Vec<u64> {
        let p = spec(k).rows();
        (2..p).filter(|&r| gcd(r, p) == 1 && gcd(r + 2, p) == 1).collect()
    }

    #[test]
    fn value_at_examples() {
        assert_eq!(spec(2).value_at(2, 1).unwrap(), 3);
        assert_eq!(spec(3).value_at(1, 2).unwrap(), 32);
        assert_eq!(spec(2).value_at(2, 3).unwrap(), 15);
        assert!(spec(2).value_at(0, 1).is_err());
        assert!(spec(2).value_at(7, 1).is_err());
        assert!(spec(2).value_at(1, 0).is_err());
        assert!(matches!(spec(15).value_at(1, 100), Err(Error::Range(_))));
    }

    #[test]
    fn fig1_a3_first_rows() {
        let a3 = spec(3);
        let row: Vec<u64> = (1..=4).map(|j| a3.value_at(1, j).unwrap()).collect();
        assert_eq!(row, [2, 32, 62, 92]);
        let row: Vec<u64> = (1..=4).map(|j| a3.value_at(24, j).unwrap()).collect();
        assert_eq!(row, [25, 55, 85, 115]);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(spec(3).classify_row(24).unwrap().status, RowStatus::Colored);
        assert_eq!(spec(3).classify_row(6).unwrap().status, RowStatus::Uncolored);
        assert_eq!(spec(2).classify_row(3).unwrap().status, RowStatus::Colored);
        let leading = spec(3).classify_row(4).unwrap();
        assert_eq!(leading.leading_prime, Some(5));
        assert_eq!(leading.status, RowStatus::Colored);
        assert_eq!(spec(3).classify_row(30).unwrap().residue, 31);
        assert_eq!(spec(3).classify_row(30).unwrap().status, RowStatus::Uncolored);
        assert!(spec(3).classify_row(31).is_err());
    }

    #[test]
    fn twin_pair_examples() {
        assert_eq!(lowers(2), [5]);
        assert_eq!(lowers(3), [11, 17, 29]);
        assert_eq!(lowers(4).len(), 15);
        let top = spec(3).twin_pairs().unwrap().last().unwrap();
        assert_eq!(top, TwinRowPair { lower_row: 28, upper_row: 30, lower_residue: 29, upper_residue: 31 });
        assert!(spec(1).twin_pairs().is_err());
        assert!(spec(10).twin_pairs().is_err());
    }

    #[test]
    fn window_matches_gcd_enumeration() {
        for k in 2..=6 {
            assert_eq!(lowers(k), brute_lowers(k), "k = {k}");
        }
    }

    #[test]
    fn partitioned_enumeration_concatenates() {
        let a5 = spec(5);
        let whole: Vec<_> = a5.twin_pairs().unwrap().collect();
        let cuts = [1, 2, 500, 1001, 1002, 2309, 2310];
        let mut parts = Vec::new();
        for w in cuts.windows(2) {
            let hi = if w[1] == a5.rows() { w[1] } else { w[1] - 1 };
            parts.extend(a5.twin_pairs_in(w[0]..=hi).unwrap());
        }
        assert_eq!(parts, whole);
    }

    #[test]
    fn count_formula_examples() {
        assert_eq!(spec(2).twin_pair_count().unwrap(), 1);
        assert_eq!(spec(3).twin_pair_count().unwrap(), 3);
        assert_eq!(spec(4).twin_pair_count().unwrap(), 15);
        assert_eq!(spec(8).twin_pair_count().unwrap(), 378_675);
        assert!(spec(1).twin_pair_count().is_err());
    }

    #[test]
    fn count_formula_matches_enumeration() {
        for k in 2..=8 {
            let a = spec(k);
            assert_eq!(a.twin_pairs().unwrap().count() as u64, a.twin_pair_count().unwrap());
        }
    }

    #[test]
    fn count_formula_matches_enumeration_k9() {
        let a = spec(9);
        assert_eq!(a.twin_pairs().unwrap().count() as u64, a.twin_pair_count().unwrap());
    }

    #[test]
    fn lift_a2_to_a3() {
        let a3 = spec(3);
        let parent = TwinRowPair::from_lower_residue(5);
        let kids = a3.lift_pair(&parent).unwrap();
        let summary: Vec<(u64, u64, Fate)> = kids
            .iter()
            .map(|c| (c.pair.lower_residue, c.pair.upper_residue, c.fate))
            .collect();
        assert_eq!(
            summary,
            [
                (5, 7, Fate::KilledLow),
                (11, 13, Fate::Survivor),
                (17, 19, Fate::Survivor),
                (23, 25, Fate::KilledHigh),
                (29, 31, Fate::Survivor),
            ]
        );
        let killed = a3.killed_offsets(&parent).unwrap();
        assert_eq!(killed, KilledOffsets { low: 0, high: 3 });
        assert_eq!(killed.one_based(), (1, 4));
    }

    #[test]
    fn lift_top_pair_of_a3() {
        let a4 = spec(4);
        let parent = TwinRowPair::from_lower_residue(29);
        let kids = a4.lift_pair(&parent).unwrap();
        assert_eq!(kids.len(), 7);
        assert_eq!(kids.iter().filter(|c| c.fate != Fate::Survivor).count(), 2);
        let killed = a4.killed_offsets(&parent).unwrap();
        // 30t - 1 and 30t + 1 divisible by 7 at t = 4 and t = 3.
        assert_eq!(killed.one_based(), (4, 3));
        for t in 0..7u64 {
            let low_dead = (29 + 30 * t) % 7 == 0;
            let high_dead = (31 + 30 * t) % 7 == 0;
            assert_eq!(low_dead, t == killed.low);
            assert_eq!(high_dead, t == killed.high);
        }
    }

    #[test]
    fn killed_offsets_agree_with_scan() {
        let a4 = spec(4);
        let parent = TwinRowPair::from_lower_residue(11);
        let killed = a4.killed_offsets(&parent).unwrap();
        let scan_low = (0..7).find(|t| (11 + 30 * t) % 7 == 0).unwrap();
        let scan_high = (0..7).find(|t| (13 + 30 * t) % 7 == 0).unwrap();
        assert_eq!((killed.low, killed.high), (scan_low, scan_high));
        assert_ne!(killed.low, killed.high);
    }

    #[test]
    fn lift_rejects_non_parents() {
        let a4 = spec(4);
        // 23 + 2 = 25 is colored in A_3.
        assert!(matches!(
            a4.lift_pair(&TwinRowPair::from_lower_residue(23)),
            Err(Error::Domain(_))
        ));
        // Out of A_3's residue range.
        assert!(a4.killed_offsets(&TwinRowPair::from_lower_residue(41)).is_err());
        assert!(spec(1).lift_pair(&TwinRowPair::from_lower_residue(5)).is_err());
    }

    #[test]
    fn survival_law_and_global_recount() {
        for k in 3..=7 {
            let child = spec(k);
            let parent = MatrixSpec::new(child.basis().parent().unwrap());
            let p = child.basis().largest();
            let mut survivors = BTreeSet::new();
            for pair in parent.twin_pairs().unwrap() {
                let kids = child.lift_pair(&pair).unwrap();
                let alive: Vec<_> = kids.iter().filter(|c| c.fate == Fate::Survivor).collect();
                assert_eq!(alive.len() as u64, p - 2);
                survivors.extend(alive.iter().map(|c| c.pair.lower_residue));
            }
            let direct: BTreeSet<u64> = lowers(k).into_iter().collect();
            assert_eq!(survivors, direct, "k = {k}");
        }
    }

    #[test]
    fn column_periodicity_of_coloring() {
        for k in 1..=4 {
            let a = spec(k);
            for i in 1..=a.rows() {
                let colored = a.classify_row(i).unwrap().status == RowStatus::Colored;
                for j in 1..=5 {
                    let v = a.value_at(i, j).unwrap();
                    let hit = a.basis().primes().iter().any(|&p| v.is_multiple_of(p));
                    assert_eq!(hit, colored, "k={k} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn uncolored_rows_are_coprime_progressions() {
        let a = spec(5);
        for i in 1..=a.rows() {
            let class = a.classify_row(i).unwrap();
            if class.status == RowStatus::Uncolored {
                assert_eq!(gcd(a.value_at(i, 1).unwrap(), a.rows()), 1);
                assert!(class.leading_prime.is_none());
            }
        }
    }

    #[test]
    fn twin_candidates_never_straddle_columns() {
        for k in 2..=5 {
            let a = spec(k);
            let p = a.rows();
            for x in 2..=3 * p {
                if gcd(x, p) == 1 && gcd(x + 2, p) == 1 {
                    let column = |v: u64| (v - 2) / p;
                    assert_eq!(column(x), column(x + 2), "k={k} x={x}");
                }
            }
        }
    }

    #[test]
    fn render_examples() {
        let g = spec(1).render_fragment(1..=2, 4).unwrap();
        assert_eq!(g.row(0), [255, 0, 0, 0]);
        assert_eq!(g.row(1), [255, 255, 255, 0]);
        assert_eq!(g.to_pgm(), "P2\n4 2\n255\n255 0 0 0\n255 255 255 0\n");
        let g = spec(2).render_fragment(4..=4, 4).unwrap();
        assert_eq!(g.pixels, [255, 255, 255, 255]);
        let g = spec(2).render_fragment(1..=1, 1).unwrap();
        assert_eq!(g.pixels, [255]);
        assert!(spec(2).render_fragment(1..=1, 0).is_err());
        assert!(spec(2).render_fragment(5..=7, 2).is_err());
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=2;
        assert!(spec(2).render_fragment(empty, 2).is_err());
    }
}
