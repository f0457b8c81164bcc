//! Constructors for faithful decompositions.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{Decomposition, Term};
use crate::numeric::{divisors, mod_inverse, primes_avoiding, AdmissiblePrimes, BezoutPair, Rational};

pub const DEFAULT_GREEDY_BUDGET: usize = 2000;
pub const DEFAULT_PROGRESSION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructError {
    #[error("inputs must be positive")]
    ZeroInput,
    #[error("{m}/{n} is not irreducible")]
    NotCoprime { m: BigUint, n: BigUint },
    #[error("1/{0} is already a unit fraction")]
    AlreadyUnit(BigUint),
    #[error("{m}/{n} is not a proper fraction")]
    NotProper { m: BigUint, n: BigUint },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{0} is not a perfect number")]
    NotPerfect(BigUint),
    #[error("term {num}/{den} is not proper")]
    ImproperTerm { num: BigUint, den: BigUint },
    #[error("greedy stage used {budget} primes and the remainder (about {remainder:.4}) is still at least 1")]
    GreedyBudgetExceeded { budget: usize, remainder: f64 },
    #[error("no admissible denominator within {0} progression steps")]
    ProgressionExhausted(u64),
    #[error("not a three-term shape: {0}")]
    NotProp6Shape(String),
    #[error("internal construction check failed: {0}")]
    Internal(String),
}

/// Which branch of the three-term construction applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `2n + r = m (mod 2m)`
    Case1,
    /// `2n + r = 0 (mod 2m)`
    Case2,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Case1 => "case1",
            Branch::Case2 => "case2",
        }
    }
}

/// Hand-picked outputs that bypass the parametric formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    /// `4/9 = 1/4 + 1/6 + 1/36`
    FourNinths,
    /// `4/15` as a scaled copy of `4/5`
    ScaledFourFifths,
}

impl SpecialCase {
    pub fn as_str(self) -> &'static str {
        match self {
            SpecialCase::FourNinths => "special9",
            SpecialCase::ScaledFourFifths => "special15",
        }
    }
}

/// How a decomposition was produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstructionTrace {
    pub primes_used: Vec<BigUint>,
    /// values the recorded primes were required not to divide
    pub avoided: Vec<BigUint>,
    pub bezout: Option<BezoutPair>,
    pub progression_steps: u64,
    pub branch: Option<Branch>,
    pub residue: Option<BigUint>,
    pub applied_scaling: Option<BigUint>,
    pub special_case: Option<SpecialCase>,
    pub seed: usize,
}

impl ConstructionTrace {
    /// Tag for tables: the special case if any, else the branch.
    pub fn case_tag(&self) -> &'static str {
        match (self.special_case, self.branch) {
            (Some(s), _) => s.as_str(),
            (None, Some(b)) => b.as_str(),
            (None, None) => "",
        }
    }
}

/// Finite set of positive integers the leading denominators must be coprime
/// to.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OmegaSet {
    values: BTreeSet<BigUint>,
}

impl OmegaSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values<I, T>(values: I) -> Result<Self, ConstructError>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigUint>,
    {
        let mut set = OmegaSet::new();
        for v in values {
            set.insert(v.into())?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, v: BigUint) -> Result<(), ConstructError> {
        if v.is_zero() {
            return Err(ConstructError::Precondition("omega values must be positive".into()));
        }
        self.values.insert(v);
        Ok(())
    }

    pub fn values(&self) -> impl Iterator<Item = &BigUint> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coprime_to(&self, b: &BigUint) -> bool {
        self.values.iter().all(|v| v.gcd(b).is_one())
    }
}

/// Numerators of the leading terms in [`general_coprime`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumeratorPolicy {
    /// `a = 1`
    #[default]
    Unit,
    /// `a = p - 1`
    Max,
    /// the same `a` for every leading term
    Fixed(u64),
}

impl NumeratorPolicy {
    fn numerator(self, p: &BigUint) -> BigUint {
        match self {
            NumeratorPolicy::Unit => BigUint::one(),
            NumeratorPolicy::Max => p - 1u32,
            NumeratorPolicy::Fixed(k) => BigUint::from(k),
        }
    }
}

/// Knobs for the coprime constructions.
#[derive(Debug, Clone)]
pub struct CoprimeOptions {
    /// number of admissible primes skipped before the greedy starts
    pub seed: usize,
    /// most leading terms the greedy may use
    pub budget: usize,
    pub progression_limit: u64,
}

impl Default for CoprimeOptions {
    fn default() -> Self {
        CoprimeOptions {
            seed: 0,
            budget: DEFAULT_GREEDY_BUDGET,
            progression_limit: DEFAULT_PROGRESSION_LIMIT,
        }
    }
}

fn positive_coprime(m: &BigUint, n: &BigUint) -> Result<(), ConstructError> {
    if m.is_zero() || n.is_zero() {
        return Err(ConstructError::ZeroInput);
    }
    if !m.gcd(n).is_one() {
        return Err(ConstructError::NotCoprime {
            m: m.clone(),
            n: n.clone(),
        });
    }
    Ok(())
}

fn target(m: &BigUint, n: &BigUint) -> Rational {
    Rational::from_parts(m, n)
}

fn int(v: &BigUint) -> BigInt {
    BigInt::from(v.clone())
}

/// `m/n = x/y + 1/(ny)` with `ym - xn = 1`.
pub fn two_term(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
) -> Result<Decomposition, ConstructError> {
    two_term_traced(m, n).map(|(d, _)| d)
}

pub fn two_term_traced(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
) -> Result<(Decomposition, ConstructionTrace), ConstructError> {
    let (m, n) = (m.into(), n.into());
    positive_coprime(&m, &n)?;
    if m >= n {
        return Err(ConstructError::NotProper { m, n });
    }
    if m.is_one() {
        return Err(ConstructError::AlreadyUnit(n));
    }
    let y = mod_inverse(&int(&m), &n).map_err(|e| ConstructError::Internal(e.to_string()))?;
    let x = (&y * &m - 1u32) / &n;
    let terms = vec![
        Term::new(x.clone(), y.clone()).expect("x >= 1"),
        Term::unit(&n * &y),
    ];
    let trace = ConstructionTrace {
        bezout: Some(BezoutPair { y, x }),
        ..Default::default()
    };
    Ok((Decomposition::new(target(&m, &n), terms), trace))
}

/// `1 = sum 1/d` over the divisors `d > 1` of a perfect number.
pub fn from_perfect(p: impl Into<BigUint>) -> Result<Decomposition, ConstructError> {
    let p = p.into();
    if p.is_zero() {
        return Err(ConstructError::ZeroInput);
    }
    let divs = divisors(&p);
    let sigma: BigUint = divs.iter().sum();
    if sigma != &p * 2u32 {
        return Err(ConstructError::NotPerfect(p));
    }
    let terms = divs.into_iter().skip(1).map(Term::unit).collect();
    Ok(Decomposition::new(Rational::one(), terms))
}

/// Length `t + 2` decomposition for `t = floor(m/n) >= 2`:
/// `sum (p_i - 1)/p_i + x/y + 1/(n p_1 ... p_t y)`.
pub fn theorem1(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
) -> Result<(Decomposition, ConstructionTrace), ConstructError> {
    let (m, n) = (m.into(), n.into());
    positive_coprime(&m, &n)?;
    let t = &m / &n;
    if t < BigUint::from(2u32) {
        return Err(ConstructError::Precondition(format!(
            "floor({m}/{n}) = {t} is below 2"
        )));
    }
    let count = t
        .to_usize()
        .ok_or_else(|| ConstructError::Precondition(format!("floor({m}/{n}) is too large")))?;
    // p_1 > tn / ((t+1)n - m)
    let bound = Rational::from_parts(&(&t * &n), &((&t + 1u32) * &n - &m));
    let lower = bound.floor().magnitude() + 1u32;
    let avoided = vec![n.clone()];
    let primes = primes_avoiding(&lower, &avoided, count);

    let reciprocals: Rational = primes
        .iter()
        .map(|p| Rational::from_parts(&BigUint::one(), p))
        .sum();
    let slack = Rational::from_integer(int(&(&t + 1u32))) - target(&m, &n);
    if reciprocals >= slack {
        return Err(ConstructError::Internal(format!(
            "sum of 1/p is {reciprocals}, needs to stay below {slack}"
        )));
    }

    let product: BigUint = primes.iter().product();
    let big_n = &n * &product;
    let cofactor_sum: BigUint = primes.iter().map(|p| &product / p).sum();
    let big_m = (&m - &t * &n) * &product + &n * cofactor_sum;
    if !big_m.gcd(&big_n).is_one() {
        return Err(ConstructError::Internal(format!(
            "gcd({big_m}, {big_n}) is not 1"
        )));
    }
    if big_m <= BigUint::one() {
        return Err(ConstructError::Internal(format!("residual numerator {big_m} is not above 1")));
    }
    let y = mod_inverse(&int(&big_m), &big_n).map_err(|e| ConstructError::Internal(e.to_string()))?;
    let x = (&y * &big_m - 1u32) / &big_n;

    let mut terms: Vec<Term> = primes
        .iter()
        .map(|p| Term::new(p - 1u32, p.clone()).expect("p >= 2"))
        .collect();
    terms.push(Term::new(x.clone(), y.clone()).expect("x >= 1"));
    terms.push(Term::unit(&big_n * &y));
    let trace = ConstructionTrace {
        primes_used: primes,
        avoided,
        bezout: Some(BezoutPair { y, x }),
        ..Default::default()
    };
    Ok((Decomposition::new(target(&m, &n), terms), trace))
}

/// `m/n = 1/b_1 + ... + 1/b_t + x/b_{t+1} + 1/(n b_1 ... b_{t+1})` with the
/// `b_i` pairwise coprime and coprime to `n` and to `omega`.
pub fn all_units_but_one(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
    omega: &OmegaSet,
) -> Result<(Decomposition, ConstructionTrace), ConstructError> {
    all_units_but_one_with(m, n, omega, &CoprimeOptions::default())
}

pub fn all_units_but_one_with(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
    omega: &OmegaSet,
    options: &CoprimeOptions,
) -> Result<(Decomposition, ConstructionTrace), ConstructError> {
    coprime_build(&m.into(), &n.into(), NumeratorPolicy::Unit, omega, options)
}

/// Like [`all_units_but_one`], with the leading numerators set by `policy`.
pub fn general_coprime(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
    policy: NumeratorPolicy,
    omega: &OmegaSet,
) -> Result<(Decomposition, ConstructionTrace), ConstructError> {
    general_coprime_with(m, n, policy, omega, &CoprimeOptions::default())
}

pub fn general_coprime_with(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
    policy: NumeratorPolicy,
    omega: &OmegaSet,
    options: &CoprimeOptions,
) -> Result<(Decomposition, ConstructionTrace), ConstructError> {
    coprime_build(&m.into(), &n.into(), policy, omega, options)
}

fn coprime_build(
    m: &BigUint,
    n: &BigUint,
    policy: NumeratorPolicy,
    omega: &OmegaSet,
    options: &CoprimeOptions,
) -> Result<(Decomposition, ConstructionTrace), ConstructError> {
    positive_coprime(m, n)?;
    let goal = target(m, n);
    let mut avoided = vec![n.clone()];
    avoided.extend(omega.values().cloned());

    // remainder z / N with N = n * (primes so far), kept unreduced
    let mut z = m.clone();
    let mut big_n = n.clone();
    let mut leading: Vec<Term> = Vec::new();
    let mut primes_used = Vec::new();
    let mut primes = AdmissiblePrimes::new(&BigUint::from(2u32), &avoided).skip(options.seed);
    while z >= big_n {
        if leading.len() >= options.budget {
            return Err(ConstructError::GreedyBudgetExceeded {
                budget: options.budget,
                remainder: Rational::from_parts(&z, &big_n).to_f64().unwrap_or(f64::INFINITY),
            });
        }
        let p = primes.next().expect("infinitely many primes");
        let a = policy.numerator(&p);
        if a.is_zero() || a >= p {
            return Err(ConstructError::ImproperTerm { num: a, den: p });
        }
        z = &z * &p - &a * &big_n;
        big_n *= &p;
        leading.push(Term::new(a, p.clone()).expect("checked positive"));
        primes_used.push(p);
    }

    if z.is_zero() || !z.gcd(&big_n).is_one() {
        return Err(ConstructError::Internal(format!("gcd({z}, {big_n}) is not 1")));
    }
    let mut y0 = mod_inverse(&int(&z), &big_n).map_err(|e| ConstructError::Internal(e.to_string()))?;
    if y0.is_one() {
        // z = 1 would give x0 = 0; step once along the progression
        y0 += &big_n;
    }
    let x0 = (&z * &y0 - 1u32) / &big_n;

    let mut steps = 0u64;
    let mut b = y0.clone();
    while !omega.coprime_to(&b) {
        steps += 1;
        if steps > options.progression_limit {
            return Err(ConstructError::ProgressionExhausted(options.progression_limit));
        }
        b += &big_n;
    }
    let x = &x0 + &z * steps;

    let mut terms = leading;
    terms.push(Term::new(x, b.clone()).expect("x >= 1"));
    terms.push(Term::unit(&big_n * &b));
    let trace = ConstructionTrace {
        primes_used,
        avoided,
        bezout: Some(BezoutPair { y: y0, x: x0 }),
        progression_steps: steps,
        seed: options.seed,
        ..Default::default()
    };
    Ok((Decomposition::new(goal, terms), trace))
}

fn big(v: impl Into<BigUint>) -> BigUint {
    v.into()
}

/// Faithfulness criterion for `m/n = 1/y2 + 1/y1 + x/(y n)` where `1/y1` is
/// the residual `m/n - 1/y2 - x/(yn)`: true iff `x < y` and `n != m' y2` for
/// all `0 < m' < m`.
pub fn prop6_condition(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
    y2: impl Into<BigUint>,
    y: impl Into<BigUint>,
    x: impl Into<BigUint>,
) -> Result<bool, ConstructError> {
    let (m, n, y2, y, x) = (m.into(), n.into(), y2.into(), y.into(), x.into());
    let shape = |why: String| Err(ConstructError::NotProp6Shape(why));
    if [&m, &n, &y2, &y, &x].iter().any(|v| v.is_zero()) {
        return shape("all parameters must be positive".into());
    }
    if !y.gcd(&y2).is_one() {
        return shape(format!("gcd({y}, {y2}) is not 1"));
    }
    if x >= y {
        return Ok(false);
    }
    let yn = &y * &n;
    let residual = target(&m, &n)
        - Rational::from_parts(&BigUint::one(), &y2)
        - Rational::from_parts(&x, &yn);
    if !residual.is_positive() || !residual.numer().is_one() {
        return shape(format!("residual {residual} is not a positive unit fraction"));
    }
    let y1 = residual.denom_unsigned();
    if y1 == y2 || y1 == yn || y2 == yn {
        return shape(format!("denominators {y2}, {y1}, {yn} are not distinct"));
    }
    let hits = (&n % &y2).is_zero() && {
        let q = &n / &y2;
        !q.is_zero() && q < m
    };
    Ok(!hits)
}

/// Three-term decomposition `1/y2 + 1/(y2 y) + c/(y n)` for `m >= 3`, and the
/// predicted verdict from the closed-form criterion.
pub fn prop7(
    m: impl Into<BigUint>,
    n: impl Into<BigUint>,
) -> Result<(Decomposition, bool, ConstructionTrace), ConstructError> {
    let (m, n) = (m.into(), n.into());
    positive_coprime(&m, &n)?;
    if m < big(3u32) {
        return Err(ConstructError::Precondition(format!("m = {m} is below 3")));
    }
    if n <= m {
        return Err(ConstructError::Precondition(format!("n = {n} does not exceed m = {m}")));
    }
    let two_n = &n * 2u32;
    let r = (&m - &two_n % &m) % &m;
    let k = (&two_n + &r) / &m;
    let (branch, y2, y, c) = if k.is_odd() {
        (Branch::Case1, (&k + 1u32) / 2u32, k.clone(), r.clone())
    } else {
        (Branch::Case2, (&k + 2u32) / 2u32, &k / 2u32, &r / 2u32)
    };
    let terms = vec![
        Term::unit(y2.clone()),
        Term::unit(&y2 * &y),
        Term::new(c, &y * &n).expect("r > 0"),
    ];
    let d = Decomposition::new(target(&m, &n), terms);
    if !d.is_valid() {
        return Err(ConstructError::Internal(format!("{d} is malformed")));
    }

    let mut predicted = two_n > &r * (&m - 1u32);
    let mut mp = BigUint::one();
    while predicted && mp < m {
        let (lhs, in_range) = match branch {
            Branch::Case1 => (&mp * (&r + &m), &mp * 2u32 > m),
            Branch::Case2 => (&mp * (&r + &m * 2u32), &mp * 5u32 > &m * 2u32),
        };
        if in_range && &two_n * (&m - &mp) == lhs {
            predicted = false;
        }
        mp += 1u32;
    }
    let trace = ConstructionTrace {
        branch: Some(branch),
        residue: Some(r),
        ..Default::default()
    };
    Ok((d, predicted, trace))
}

/// `4/n = 1/x + 1/y + r/z` with `r` in `{1, 2}` for odd `n >= 5`.
pub fn theorem4(n: impl Into<BigUint>) -> Result<(Decomposition, ConstructionTrace), ConstructError> {
    let n = n.into();
    if n < big(5u32) || n.is_even() {
        return Err(ConstructError::Precondition(format!("n = {n} must be odd and at least 5")));
    }
    if n == big(9u32) {
        let d = crate::model::decomposition_from((4, 9), &[(1, 4), (1, 6), (1, 36)]);
        let trace = ConstructionTrace {
            special_case: Some(SpecialCase::FourNinths),
            ..Default::default()
        };
        return Ok((d, trace));
    }
    if n == big(15u32) {
        let (base, mut trace) = theorem4(5u32)?;
        let scale = big(3u32);
        let d = base
            .scale(&scale)
            .map_err(|e| ConstructError::Internal(e.to_string()))?;
        trace.applied_scaling = Some(scale);
        trace.special_case = Some(SpecialCase::ScaledFourFifths);
        return Ok((d, trace));
    }
    let (d, predicted, trace) = prop7(4u32, n.clone())?;
    if !predicted {
        return Err(ConstructError::Internal(format!(
            "4/{n} falls in an exclusion set"
        )));
    }
    Ok((d, trace))
}

impl fmt::Display for ConstructionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let primes: Vec<String> = self.primes_used.iter().map(|p| p.to_string()).collect();
        write!(f, "primes [{}]", primes.join(", "))?;
        if let Some(b) = &self.bezout {
            write!(f, ", bezout (y={}, x={})", b.y, b.x)?;
        }
        if self.progression_steps > 0 {
            write!(f, ", progression steps {}", self.progression_steps)?;
        }
        let tag = self.case_tag();
        if !tag.is_empty() {
            write!(f, ", {tag}")?;
        }
        if let Some(r) = &self.residue {
            write!(f, ", r={r}")?;
        }
        if let Some(c) = &self.applied_scaling {
            write!(f, ", scaled by {c}")?;
        }
        Ok(())
    }
}
