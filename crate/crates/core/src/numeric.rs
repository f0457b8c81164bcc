//! Exact integer and rational primitives.
//!
//! Everything is arbitrary precision. Denominators produced by the
//! constructors grow like `n * p1 * ... * pt * y`, which leaves machine words
//! behind after a handful of terms.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("gcd witnesses are undefined for (0, 0)")]
    BothZero,
    #[error("{a} has no inverse modulo {n}")]
    NotInvertible { a: BigInt, n: BigUint },
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(BigUint),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
}

/// A reduced rational number. The denominator is always positive and
/// coprime to the numerator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, NumericError> {
        let den = den.into();
        if den.is_zero() {
            return Err(NumericError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// Builds `num / den` from unsigned parts. Panics on a zero denominator.
    pub fn from_parts(num: &BigUint, den: &BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rational(BigRational::new(
            BigInt::from(num.clone()),
            BigInt::from(den.clone()),
        ))
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// The denominator as an unsigned integer (it is always positive).
    pub fn denom_unsigned(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn recip(&self) -> Result<Self, NumericError> {
        if self.is_zero() {
            return Err(NumericError::ZeroDenominator);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.0.to_f64()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericError::Parse(s.to_string());
        match s.split_once('/') {
            Some((a, b)) => {
                let a: BigInt = a.trim().parse().map_err(|_| bad())?;
                let b: BigInt = b.trim().parse().map_err(|_| bad())?;
                Rational::new(a, b)
            }
            None => Ok(Rational::from_integer(
                s.trim().parse::<BigInt>().map_err(|_| bad())?,
            )),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }

        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Bezout witness `y*m - x*n = 1` for the pair `(m, n)` it was produced for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BezoutPair {
    pub y: BigUint,
    pub x: BigUint,
}

impl BezoutPair {
    pub fn holds_for(&self, m: &BigUint, n: &BigUint) -> bool {
        &self.y * m == &self.x * n + 1u32
    }
}

pub fn gcd(a: &BigInt, b: &BigInt) -> BigUint {
    a.gcd(b).magnitude().clone()
}

/// Extended Euclid: returns `(g, s, t)` with `s*a + t*b = g = gcd(a, b)`.
pub fn egcd(a: &BigInt, b: &BigInt) -> Result<(BigInt, BigInt, BigInt), NumericError> {
    if a.is_zero() && b.is_zero() {
        return Err(NumericError::BothZero);
    }
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.sign() == Sign::Minus {
        return Ok((-old_r, -old_s, -old_t));
    }
    Ok((old_r, old_s, old_t))
}

/// The unique `y` in `[1, n-1]` with `a*y = 1 (mod n)`.
pub fn mod_inverse(a: &BigInt, n: &BigUint) -> Result<BigUint, NumericError> {
    if n < &BigUint::from(2u32) {
        return Err(NumericError::ModulusTooSmall(n.clone()));
    }
    let modulus = BigInt::from(n.clone());
    let (g, s, _) = egcd(&a.mod_floor(&modulus), &modulus)?;
    if !g.is_one() {
        return Err(NumericError::NotInvertible {
            a: a.clone(),
            n: n.clone(),
        });
    }
    Ok(s.mod_floor(&modulus).magnitude().clone())
}

/// `a^-1 mod n` for unsigned operands, where `n = 1` is allowed and gives 0.
pub(crate) fn inverse_mod_or_zero(a: &BigUint, n: &BigUint) -> Option<BigUint> {
    if n.is_one() {
        return Some(BigUint::zero());
    }
    mod_inverse(&BigInt::from(a.clone()), n).ok()
}

/// True iff `v` lies in the fractional ideal `(1/n)Z`.
pub fn in_ideal(v: &Rational, n: &BigUint) -> bool {
    (n % v.denom_unsigned()).is_zero()
}

/// Part of `q` built only from primes dividing `support`.
pub(crate) fn smooth_part(q: &BigUint, support: &BigUint) -> BigUint {
    let mut rest = q.clone();
    let mut part = BigUint::one();
    loop {
        let g = rest.gcd(support);
        if g.is_one() || g.is_zero() {
            return part;
        }
        rest /= &g;
        part *= &g;
    }
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

// Strong-probable-prime bases; deterministic below 3.3e24.
const WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
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

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = p as u64;
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 97 * 97 {
        return true;
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &WITNESSES[..12] {
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

fn is_prime_big(n: &BigUint) -> bool {
    for &p in &SMALL_PRIMES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &WITNESSES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality. Exact below 3.3e24; a fixed 13-base strong-probable-prime test
/// beyond that.
pub fn is_prime(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(small) => is_prime_u64(small),
        None => is_prime_big(n),
    }
}

/// Ascending primes `p >= lower_bound` that divide no element of `forbidden`.
#[derive(Debug, Clone)]
pub struct AdmissiblePrimes<'a> {
    next: BigUint,
    forbidden: &'a [BigUint],
}

impl<'a> AdmissiblePrimes<'a> {
    pub fn new(lower_bound: &BigUint, forbidden: &'a [BigUint]) -> Self {
        AdmissiblePrimes {
            next: lower_bound.clone().max(BigUint::from(2u32)),
            forbidden,
        }
    }
}

impl Iterator for AdmissiblePrimes<'_> {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        loop {
            let candidate = self.next.clone();
            self.next += 1u32;
            if is_prime(&candidate)
                && !self
                    .forbidden
                    .iter()
                    .any(|f| !f.is_zero() && (f % &candidate).is_zero())
            {
                return Some(candidate);
            }
        }
    }
}

/// The `count` smallest primes `p >= lower_bound` dividing no forbidden value.
pub fn primes_avoiding(lower_bound: &BigUint, forbidden: &[BigUint], count: usize) -> Vec<BigUint> {
    AdmissiblePrimes::new(lower_bound, forbidden)
        .take(count)
        .collect()
}

/// All positive divisors in ascending order.
pub(crate) fn divisors(n: &BigUint) -> Vec<BigUint> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigUint::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            let q = n / &d;
            if q != d {
                large.push(q);
            }
            small.push(d.clone());
        }
        d += 1u32;
    }
    small.extend(large.into_iter().rev());
    small
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn bu(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(&bi(12), &bi(18)), bu(6));
        assert_eq!(gcd(&bi(7), &bi(0)), bu(7));
        assert_eq!(gcd(&bi(35), &bi(64)), bu(1));
        assert_eq!(gcd(&bi(0), &bi(0)), bu(0));
    }

    #[test]
    fn egcd_examples() {
        assert_eq!(egcd(&bi(3), &bi(7)).unwrap(), (bi(1), bi(-2), bi(1)));
        assert_eq!(egcd(&bi(1), &bi(91)).unwrap(), (bi(1), bi(1), bi(0)));
        assert_eq!(egcd(&bi(29), &bi(30)).unwrap(), (bi(1), bi(-1), bi(1)));
        assert_eq!(egcd(&bi(0), &bi(0)), Err(NumericError::BothZero));
    }

    #[test]
    fn egcd_negative_inputs_give_nonnegative_gcd() {
        let (g, s, t) = egcd(&bi(-12), &bi(18)).unwrap();
        assert_eq!(g, bi(6));
        assert_eq!(s * bi(-12) + t * bi(18), bi(6));
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(&bi(4), &bu(5)).unwrap(), bu(4));
        assert_eq!(mod_inverse(&bi(3), &bu(7)).unwrap(), bu(5));
        assert_eq!(mod_inverse(&bi(71), &bu(105)).unwrap(), bu(71));
        assert!(matches!(
            mod_inverse(&bi(6), &bu(9)),
            Err(NumericError::NotInvertible { .. })
        ));
        assert!(matches!(
            mod_inverse(&bi(1), &bu(1)),
            Err(NumericError::ModulusTooSmall(_))
        ));
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(&bu(2)));
        assert!(!is_prime(&bu(1)));
        assert!(!is_prime(&bu(0)));
        assert!(!is_prime(&bu(105)));
        assert!(is_prime(&bu(71)));
        // Carmichael numbers and strong pseudoprimes to small bases
        assert!(!is_prime(&bu(561)));
        assert!(!is_prime(&bu(3_215_031_751)));
        assert!(is_prime(&bu(18_446_744_073_709_551_557)));
        let mersenne_127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_prime(&mersenne_127));
        assert!(!is_prime(&(&mersenne_127 * bu(3))));
    }

    #[test]
    fn primes_avoiding_examples() {
        assert_eq!(primes_avoiding(&bu(4), &[bu(3)], 2), vec![bu(5), bu(7)]);
        assert_eq!(primes_avoiding(&bu(2), &[], 3), vec![bu(2), bu(3), bu(5)]);
        assert_eq!(
            primes_avoiding(&bu(2), &[bu(30)], 3),
            vec![bu(7), bu(11), bu(13)]
        );
    }

    #[test]
    fn ideal_membership_examples() {
        assert!(in_ideal(&Rational::new(1, 3).unwrap(), &bu(9)));
        assert!(!in_ideal(&Rational::new(1, 2).unwrap(), &bu(3)));
        assert!(in_ideal(&Rational::zero(), &bu(17)));
    }

    #[test]
    fn rationals_stay_reduced() {
        let r = Rational::new(6, -4).unwrap();
        assert_eq!(r.numer(), &bi(-3));
        assert_eq!(r.denom(), &bi(2));
        let s = &r + &Rational::new(1, 2).unwrap();
        assert_eq!(s, Rational::from_integer(-1));
        assert_eq!("10/4".parse::<Rational>().unwrap().to_string(), "5/2");
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn smooth_part_extracts_prime_powers() {
        assert_eq!(smooth_part(&bu(2 * 2 * 2 * 9 * 7), &bu(6)), bu(72));
        assert_eq!(smooth_part(&bu(35), &bu(6)), bu(1));
    }

    #[test]
    fn divisors_listed_in_order() {
        assert_eq!(
            divisors(&bu(28)),
            [1u64, 2, 4, 7, 14, 28].map(bu).to_vec()
        );
        assert_eq!(divisors(&bu(36)).len(), 9);
    }
}
