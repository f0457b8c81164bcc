//! Decompositions `m/n = a1/b1 + ... + at/bt` and the structural checks that
//! can certify or refute faithfulness without enumerating coefficients.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("term numerator and denominator must be positive, got {num}/{den}")]
    NonPositiveTerm { num: BigUint, den: BigUint },
    #[error("scale factor must be positive")]
    ZeroScale,
}

/// One summand `a/b`, kept in written form. `2/6` is not the same term as
/// `1/3`: faithfulness quantifies over `0 <= x <= a` for the written `a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    num: BigUint,
    den: BigUint,
}

impl Term {
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Result<Self, ModelError> {
        let (num, den) = (num.into(), den.into());
        if num.is_zero() || den.is_zero() {
            return Err(ModelError::NonPositiveTerm { num, den });
        }
        Ok(Term { num, den })
    }

    /// `1/den`. Panics if `den` is zero.
    pub fn unit(den: impl Into<BigUint>) -> Self {
        Term::new(1u32, den).expect("unit fraction with zero denominator")
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn den(&self) -> &BigUint {
        &self.den
    }

    pub fn value(&self) -> Rational {
        Rational::from_parts(&self.num, &self.den)
    }

    pub fn is_unit(&self) -> bool {
        self.num.is_one()
    }

    pub fn is_proper(&self) -> bool {
        self.num < self.den
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A target rational together with an ordered list of terms.
///
/// Construction does not check anything; use [`Decomposition::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    target: Rational,
    terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonPositiveTarget(Rational),
    DuplicateDenominator(BigUint),
    SumMismatch { sum: Rational, target: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveTarget(t) => write!(f, "target {t} is not positive"),
            Violation::DuplicateDenominator(b) => write!(f, "denominator {b} repeated"),
            Violation::SumMismatch { sum, target } => {
                write!(f, "terms sum to {sum}, target is {target}")
            }
        }
    }
}

impl Decomposition {
    pub fn new(target: Rational, terms: Vec<Term>) -> Self {
        Decomposition { target, terms }
    }

    pub fn target(&self) -> &Rational {
        &self.target
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Numerator `m` of the reduced target (absolute value).
    pub fn m(&self) -> BigUint {
        self.target.numer().magnitude().clone()
    }

    /// Denominator `n` of the reduced target; the ideal is `(1/n)Z`.
    pub fn n(&self) -> BigUint {
        self.target.denom_unsigned()
    }

    pub fn sum(&self) -> Rational {
        self.terms.iter().map(Term::value).sum()
    }

    pub fn max_denominator(&self) -> Option<&BigUint> {
        self.terms.iter().map(Term::den).max()
    }

    /// Every violated well-formedness rule; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.target.is_positive() {
            out.push(Violation::NonPositiveTarget(self.target.clone()));
        }
        let mut seen = BTreeSet::new();
        let mut reported = BTreeSet::new();
        for t in &self.terms {
            if !seen.insert(t.den()) && reported.insert(t.den()) {
                out.push(Violation::DuplicateDenominator(t.den().clone()));
            }
        }
        let sum = self.sum();
        if sum != self.target {
            out.push(Violation::SumMismatch {
                sum,
                target: self.target.clone(),
            });
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// `m/(C n) = a1/(C b1) + ... + at/(C bt)`.
    pub fn scale(&self, factor: &BigUint) -> Result<Decomposition, ModelError> {
        if factor.is_zero() {
            return Err(ModelError::ZeroScale);
        }
        let target = &self.target * &Rational::from_parts(&BigUint::one(), factor);
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                num: t.num.clone(),
                den: &t.den * factor,
            })
            .collect();
        Ok(Decomposition { target, terms })
    }

    /// Per-term necessary conditions for faithfulness of a decomposition of
    /// length at least 2: `b` must not divide `n`, and `a < b / gcd(b, n)`.
    pub fn necessary_conditions(&self) -> StructureReport {
        let n = self.n();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let g = t.den.gcd(&n);
                TermFlags {
                    den_divides_n: (&n % &t.den).is_zero(),
                    numerator_too_big: t.num >= &t.den / &g,
                }
            })
            .collect();
        StructureReport {
            terms,
            pairwise_coprime_shape: self.coprime_shape(),
        }
    }

    /// True iff the decomposition reads `m/n = a1/b1 + ... + at/bt +
    /// 1/(n b1 ... bt)` with every `ai < bi` and `n, b1, ..., bt` pairwise
    /// coprime. Such a decomposition is faithful.
    pub fn coprime_shape(&self) -> bool {
        let Some((last, leading)) = self.terms.split_last() else {
            return false;
        };
        if !last.is_unit() || !leading.iter().all(Term::is_proper) {
            return false;
        }
        let n = self.n();
        let product = leading.iter().fold(n.clone(), |acc, t| acc * &t.den);
        if last.den != product {
            return false;
        }
        let mut moduli: Vec<&BigUint> = leading.iter().map(Term::den).collect();
        moduli.push(&n);
        moduli
            .iter()
            .enumerate()
            .all(|(i, a)| moduli[i + 1..].iter().all(|b| a.gcd(b).is_one()))
    }

    /// Renders as `m/n = a1/b1 + a2/b2 + ...`.
    pub fn display_equation(&self) -> String {
        let rhs: Vec<String> = self.terms.iter().map(Term::to_string).collect();
        format!("{} = {}", self.target, rhs.join(" + "))
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_equation())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermFlags {
    pub den_divides_n: bool,
    pub numerator_too_big: bool,
}

impl TermFlags {
    pub fn violated(&self) -> bool {
        self.den_divides_n || self.numerator_too_big
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub terms: Vec<TermFlags>,
    pub pairwise_coprime_shape: bool,
}

impl StructureReport {
    pub fn violation_count(&self) -> usize {
        self.terms.iter().filter(|f| f.violated()).count()
    }

    /// Some term breaks a necessary condition, so the decomposition cannot be
    /// faithful.
    pub fn certifies_unfaithful(&self) -> bool {
        self.violation_count() > 0
    }
}

/// Convenience for building decompositions from small integers.
pub fn decomposition_from(target: (u64, u64), terms: &[(u64, u64)]) -> Decomposition {
    let target = Rational::new(BigInt::from(target.0), BigInt::from(target.1))
        .expect("nonzero target denominator");
    let terms = terms
        .iter()
        .map(|&(a, b)| Term::new(a, b).expect("positive term"))
        .collect();
    Decomposition::new(target, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(target: (u64, u64), terms: &[(u64, u64)]) -> Decomposition {
        decomposition_from(target, terms)
    }

    #[test]
    fn validate_examples() {
        assert!(d((4, 9), &[(1, 4), (1, 6), (1, 36)]).is_valid());
        let bad = d((4, 9), &[(1, 4), (1, 4)]).validate();
        assert_eq!(bad.len(), 2);
        assert!(matches!(bad[0], Violation::DuplicateDenominator(_)));
        assert!(matches!(bad[1], Violation::SumMismatch { .. }));
        assert!(d((7, 3), &[(4, 5), (6, 7), (48, 71), (1, 7455)]).is_valid());
    }

    #[test]
    fn validate_flags_nonpositive_target() {
        let zero = Decomposition::new(Rational::zero(), vec![]);
        assert_eq!(
            zero.validate(),
            vec![Violation::NonPositiveTarget(Rational::zero())]
        );
    }

    #[test]
    fn term_rejects_zero_parts() {
        assert!(Term::new(0u32, 3u32).is_err());
        assert!(Term::new(1u32, 0u32).is_err());
    }

    #[test]
    fn scale_examples() {
        let four_fifths = d((4, 5), &[(1, 2), (1, 6), (2, 15)]);
        assert_eq!(
            four_fifths.scale(&BigUint::from(3u32)).unwrap(),
            d((4, 15), &[(1, 6), (1, 18), (2, 45)])
        );
        assert_eq!(four_fifths.scale(&BigUint::one()).unwrap(), four_fifths);
        assert_eq!(
            d((2, 3), &[(1, 2), (1, 6)])
                .scale(&BigUint::from(5u32))
                .unwrap(),
            d((2, 15), &[(1, 10), (1, 30)])
        );
        assert_eq!(
            four_fifths.scale(&BigUint::zero()),
            Err(ModelError::ZeroScale)
        );
    }

    #[test]
    fn scale_keeps_written_numerators() {
        // 2/6 reduces to 1/3 as a value, but the written term must survive.
        let dec = d((1, 2), &[(2, 6), (1, 6)]).scale(&BigUint::from(2u32)).unwrap();
        assert_eq!(dec.terms()[0].num(), &BigUint::from(2u32));
        assert_eq!(dec.terms()[0].den(), &BigUint::from(12u32));
    }

    #[test]
    fn necessary_condition_examples() {
        let r = d((5, 6), &[(1, 2), (1, 3)]).necessary_conditions();
        assert!(r.terms.iter().all(|f| f.den_divides_n));
        assert!(r.certifies_unfaithful());

        let r = d((4, 9), &[(1, 4), (1, 6), (1, 36)]).necessary_conditions();
        assert_eq!(r.violation_count(), 0);

        let r = d((4, 9), &[(1, 3), (1, 15), (2, 45)]).necessary_conditions();
        assert!(r.terms[0].numerator_too_big);
        assert!(!r.terms[1].violated());
        assert!(r.certifies_unfaithful());
    }

    #[test]
    fn coprime_shape_examples() {
        assert!(d((2, 3), &[(1, 2), (1, 6)]).coprime_shape());
        assert!(!d((4, 9), &[(1, 4), (1, 6), (1, 36)]).coprime_shape());
        assert!(d((9, 5), &[(1, 2), (1, 3), (28, 29), (1, 870)]).coprime_shape());
        // improper leading term
        assert!(!d((5, 3), &[(3, 2), (1, 6)]).coprime_shape());
        // wrong closing denominator
        assert!(!d((2, 3), &[(1, 2), (1, 7)]).coprime_shape());
        assert!(!Decomposition::new(Rational::one(), vec![]).coprime_shape());
    }
}
