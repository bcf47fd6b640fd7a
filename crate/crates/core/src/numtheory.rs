//! Exact integer arithmetic: primorials, gcd and modular inverses, a
//! deterministic 64-bit primality test, and prime generation by reading the
//! first uncolored cell of each matrix.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest basis whose primorial fits in a `u64` (`p_15# = 614889782588491410`).
pub const MAX_BASIS_LEN: usize = 15;

/// The first `k` primes together with their product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeBasis {
    primes: Vec<u64>,
    primorial: u64,
}

impl PrimeBasis {
    /// Builds the basis of the first `k` primes, generating each prime from
    /// the matrix of the previous level.
    pub fn new(k: usize) -> Result<Self> {
        check_basis_len(k)?;
        let mut basis = PrimeBasis { primes: vec![2], primorial: 2 };
        while basis.k() < k {
            basis = basis.extend()?;
        }
        Ok(basis)
    }

    /// The basis one level up: appends the next prime and multiplies it in.
    pub fn extend(&self) -> Result<Self> {
        check_basis_len(self.k() + 1)?;
        let next = next_prime_via_matrix(self)?;
        let primorial = self
            .primorial
            .checked_mul(next)
            .ok_or_else(|| Error::Range(format!("primorial of {} primes overflows u64", self.k() + 1)))?;
        let mut primes = self.primes.clone();
        primes.push(next);
        Ok(PrimeBasis { primes, primorial })
    }

    /// The basis with its largest prime removed, or `None` for `k = 1`.
    pub fn parent(&self) -> Option<Self> {
        if self.k() == 1 {
            return None;
        }
        let primes = self.primes[..self.k() - 1].to_vec();
        let primorial = self.primorial / self.largest();
        Some(PrimeBasis { primes, primorial })
    }

    pub fn k(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn primorial(&self) -> u64 {
        self.primorial
    }

    /// `p_k`, the last prime of the basis.
    pub fn largest(&self) -> u64 {
        *self.primes.last().expect("basis is never empty")
    }

    /// True when `n` shares no factor with the primorial.
    pub fn is_coprime(&self, n: u64) -> bool {
        self.primes.iter().all(|&p| !n.is_multiple_of(p))
    }
}

fn check_basis_len(k: usize) -> Result<()> {
    if k == 0 || k > MAX_BASIS_LEN {
        return Err(Error::Range(format!("basis length {k} outside 1..={MAX_BASIS_LEN}")));
    }
    Ok(())
}

/// Product of the first `k` primes, `p_k#`.
pub fn special_factorial(k: usize) -> Result<u64> {
    Ok(PrimeBasis::new(k)?.primorial())
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m`, in `[1, m)`.
pub fn mod_inverse(a: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} must be at least 2")));
    }
    // Extended Euclid on signed 128-bit values so no intermediate overflows.
    let (mut old_r, mut r) = (i128::from(a % m), i128::from(m));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return Err(Error::Domain(format!("{a} is not invertible modulo {m}")));
    }
    Ok(old_s.rem_euclid(i128::from(m)) as u64)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Deterministic primality for every `u64`.
///
/// Trial division by the primes below 59, then strong-probable-prime tests
/// with a witness set that is proven sufficient for the size of `n`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 59 * 59 {
        return true;
    }
    let witnesses: &[u64] = if n < 3_215_031_751 {
        &[2, 3, 5, 7]
    } else if n < 3_474_749_660_383 {
        &[2, 3, 5, 7, 11, 13]
    } else if n < 341_550_071_728_321 {
        &[2, 3, 5, 7, 11, 13, 17]
    } else {
        &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
    };
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in witnesses {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The smallest integer above 1 that is coprime to the basis primorial.
///
/// That is the first uncolored cell of `A_k` after the basis primes, which
/// is always `p_{k+1}`: the smallest composite coprime to `p_k#` is
/// `p_{k+1}^2`.
pub fn next_prime_via_matrix(basis: &PrimeBasis) -> Result<u64> {
    if basis.k() >= MAX_BASIS_LEN {
        return Err(Error::Range(format!(
            "basis of {} primes cannot be extended within u64",
            basis.k()
        )));
    }
    let next = (2..)
        .find(|&n| gcd(n, basis.primorial()) == 1)
        .expect("an integer coprime to the primorial always exists");
    assert!(is_prime(next), "first uncolored value {next} is not prime");
    Ok(next)
}

/// Unbounded prime stream built the same way as [`next_prime_via_matrix`]:
/// each new prime is the first value past the last known prime that no known
/// prime divides. Past `k = 15` the primorial is never formed; coprimality is
/// checked against the basis primes directly.
#[derive(Debug, Clone, Default)]
pub struct MatrixPrimes {
    known: Vec<u64>,
}

impl MatrixPrimes {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Iterator for MatrixPrimes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let start = self.known.last().map_or(2, |&p| p + 1);
        let next = (start..).find(|&n| self.known.iter().all(|&p| n % p != 0))?;
        debug_assert!(is_prime(next));
        self.known.push(next);
        Some(next)
    }
}

/// Exact partial sum of prime reciprocals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReciprocalSum {
    terms: usize,
    value: BigRational,
}

impl ReciprocalSum {
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal expansion truncated to `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let numer = self.value.numer().to_biguint().expect("sum is positive");
        let denom = self.value.denom().to_biguint().expect("sum is positive");
        let whole = &numer / &denom;
        let frac = (&numer % &denom) * BigUint::from(10u32).pow(digits as u32) / &denom;
        if digits == 0 {
            return whole.to_string();
        }
        format!("{whole}.{frac:0>digits$}")
    }
}

/// `sum_{i=1..k} 1/p_i` in exact rational arithmetic.
pub fn prime_sum_reciprocals(k: usize) -> ReciprocalSum {
    let value = MatrixPrimes::new()
        .take(k)
        .fold(BigRational::zero(), |acc, p| {
            acc + BigRational::new(1.into(), p.into())
        });
    ReciprocalSum { terms: k, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn special_factorial_values() {
        assert_eq!(special_factorial(1).unwrap(), 2);
        assert_eq!(special_factorial(4).unwrap(), 210);
        assert_eq!(special_factorial(6).unwrap(), 2 * 3 * 5 * 7 * 11 * 13);
        assert_eq!(special_factorial(15).unwrap(), 614_889_782_588_491_410);
    }

    #[test]
    fn special_factorial_rejects_out_of_range() {
        assert!(matches!(special_factorial(0), Err(Error::Range(_))));
        assert!(matches!(special_factorial(16), Err(Error::Range(_))));
    }

    #[test]
    fn primorial_ratio_is_the_new_prime() {
        for k in 2..=MAX_BASIS_LEN {
            let basis = PrimeBasis::new(k).unwrap();
            let prev = special_factorial(k - 1).unwrap();
            assert_eq!(basis.primorial() / prev, basis.largest());
            assert_eq!(basis.primorial() % prev, 0);
        }
    }

    #[test]
    fn basis_invariants() {
        let basis = PrimeBasis::new(MAX_BASIS_LEN).unwrap();
        assert_eq!(basis.primes()[0], 2);
        assert!(basis.primes().windows(2).all(|w| w[0] < w[1]));
        assert!(basis.primes().iter().all(|&p| is_prime(p)));
        assert_eq!(basis.parent().unwrap(), PrimeBasis::new(14).unwrap());
        assert!(PrimeBasis::new(1).unwrap().parent().is_none());
        assert!(basis.extend().is_err());
    }

    #[test]
    fn is_prime_small_cases() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(104_729));
        assert!(!is_prime(104_729 * 3));
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn is_prime_hard_composites() {
        // Strong pseudoprimes to several small bases.
        for n in [
            3_215_031_751u64,
            2_152_302_898_747,
            3_474_749_660_383,
            341_550_071_728_321,
            3_825_123_056_546_413_051,
            // Carmichael numbers.
            561,
            1105,
            41041,
            825_265,
            // Product of two primes near 2^32.
            4_294_967_291 * 4_294_967_279,
        ] {
            assert!(!is_prime(n), "{n} is composite");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(u64::MAX));
        assert!(is_prime(4_294_967_291));
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(6, 5).unwrap(), 1);
        assert_eq!(mod_inverse(1, 7).unwrap(), 1);
        assert_eq!(mod_inverse(30, 7).unwrap(), 4);
        assert!(matches!(mod_inverse(6, 9), Err(Error::Domain(_))));
        assert!(matches!(mod_inverse(3, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn next_prime_examples() {
        assert_eq!(next_prime_via_matrix(&PrimeBasis::new(1).unwrap()).unwrap(), 3);
        assert_eq!(next_prime_via_matrix(&PrimeBasis::new(2).unwrap()).unwrap(), 5);
        assert_eq!(next_prime_via_matrix(&PrimeBasis::new(4).unwrap()).unwrap(), 11);
    }

    #[test]
    fn next_prime_matches_trial_division_ordering() {
        let oracle: Vec<u64> = (2..).filter(|&n| trial_division(n)).take(16).collect();
        for k in 1..MAX_BASIS_LEN {
            let basis = PrimeBasis::new(k).unwrap();
            assert_eq!(basis.primes(), &oracle[..k]);
            assert_eq!(next_prime_via_matrix(&basis).unwrap(), oracle[k]);
        }
    }

    #[test]
    fn matrix_primes_stream() {
        let first: Vec<u64> = MatrixPrimes::new().take(10).collect();
        assert_eq!(first, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn reciprocal_sum_small() {
        assert_eq!(prime_sum_reciprocals(1).to_decimal(12), "0.500000000000");
        assert_eq!(prime_sum_reciprocals(2).to_decimal(12), "0.833333333333");
        assert_eq!(prime_sum_reciprocals(1).to_decimal(0), "0");
    }

    #[test]
    fn reciprocal_sum_k25_against_fixed_point_oracle() {
        // Independent route: integer fixed-point with 30 fractional digits.
        let scale = 10u128.pow(30);
        let primes: Vec<u128> = (2u128..).filter(|&n| trial_division(n as u64)).take(25).collect();
        assert_eq!(*primes.last().unwrap(), 97);
        let fixed: u128 = primes.iter().map(|p| scale / p).sum();
        // Each truncation loses < 1e-30, so the first 12 digits are exact.
        let oracle = format!("{}.{:030}", fixed / scale, fixed % scale);
        let ours = prime_sum_reciprocals(25).to_decimal(12);
        assert_eq!(ours, oracle[..ours.len()]);
    }

    #[test]
    fn reciprocal_sum_strictly_increasing() {
        let sums: Vec<_> = (1..40).map(prime_sum_reciprocals).collect();
        assert!(sums.windows(2).all(|w| w[0].value() < w[1].value()));
    }

    proptest! {
        #[test]
        fn mod_inverse_round_trip(a in 1u64..u64::MAX, m in 2u64..u64::MAX) {
            prop_assume!(gcd(a, m) == 1);
            let x = mod_inverse(a, m).unwrap();
            prop_assert!(x >= 1 && x < m);
            prop_assert_eq!(mul_mod(a % m, x, m), 1 % m);
        }

        #[test]
        fn is_prime_matches_trial_division(n in 0u64..5_000_000) {
            prop_assert_eq!(is_prime(n), trial_division(n));
        }

        #[test]
        fn semiprimes_are_composite(a in 1u64 << 20..1u64 << 31, b in 1u64 << 20..1u64 << 31) {
            let next = |n: u64| (n..).find(|&c| trial_division(c)).unwrap();
            let (p, q) = (next(a), next(b));
            prop_assert!(is_prime(p) && is_prime(q));
            prop_assert!(!is_prime(p * q));
        }
    }
}
