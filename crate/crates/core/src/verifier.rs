//! Exact faithfulness decisions.
//!
//! A decomposition of `u = m/n` is faithful when no coefficient vector
//! `0 <= x_i <= a_i` produces a value `v = sum x_i/b_i` inside `(1/n)Z` other
//! than `0` and `u` itself. Four strategies decide this, all returning the
//! same violating vector when one exists: the first one met when the
//! coefficients are enumerated with `x_1` varying fastest, i.e. the
//! lexicographically smallest vector read from the last coordinate.
//!
//! * `Naive` walks the whole coefficient lattice.
//! * `Congruence` walks every term but the one with the largest numerator and
//!   solves for that term's coefficient as a linear congruence.
//! * `MeetInMiddle` does the same, but splits the walked terms in two halves
//!   and joins them on a residue key.
//! * `CrtSplit` enumerates a few "hub" terms, splits the remaining terms into
//!   groups whose denominators share no prime, and solves each group
//!   independently. Faithful decompositions with many unit terms, which the
//!   constructors produce, collapse to a handful of congruences this way.
//!
//! All arithmetic is carried out on integers scaled by `L = lcm(b_i)`: the
//! vector `x` has value `S/L` with `S = sum x_i (L/b_i)`, and `S/L` lies in
//! `(1/n)Z` iff `S` is divisible by `Q = L/gcd(L, n)`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{AddAssign, SubAssign};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{Decomposition, Term, Violation};
use crate::numeric::{in_ideal, inverse_mod_or_zero, smooth_part, Rational};

pub const DEFAULT_CAP: u64 = 10_000_000;
pub const DEFAULT_MITM_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Naive,
    Congruence,
    MeetInMiddle,
    CrtSplit,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Congruence => "congruence",
            Method::MeetInMiddle => "meet_in_middle",
            Method::CrtSplit => "crt_split",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("malformed decomposition: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("{method} enumeration needs more than the cap of {cap} combinations")]
    CapExceeded { method: Method, cap: u64 },
}

/// A coefficient vector whose partial sum lands in `(1/n)Z` away from 0 and
/// the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientViolation {
    pub coefficients: Vec<BigUint>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaithfulnessReport {
    pub faithful: bool,
    pub violation: Option<CoefficientViolation>,
    pub combos_examined: u64,
    pub method: Method,
}

/// Verifier configuration. `Default` uses a cap of 10^7 combinations and
/// switches congruence elimination to meet-in-the-middle above 20 walked
/// terms.
#[derive(Debug, Clone)]
pub struct Verifier {
    cap: u64,
    mitm_threshold: usize,
    forced: Option<Method>,
}

impl Default for Verifier {
    fn default() -> Self {
        Verifier {
            cap: DEFAULT_CAP,
            mitm_threshold: DEFAULT_MITM_THRESHOLD,
            forced: None,
        }
    }
}

pub fn verify_naive(d: &Decomposition) -> Result<FaithfulnessReport, VerifyError> {
    Verifier::default().verify_naive(d)
}

pub fn verify(d: &Decomposition) -> Result<FaithfulnessReport, VerifyError> {
    Verifier::default().verify(d)
}

pub fn partial_sums_in_ideal(d: &Decomposition) -> Result<BTreeSet<Rational>, VerifyError> {
    Verifier::default().partial_sums_in_ideal(d)
}

impl Verifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap.max(1);
        self
    }

    pub fn with_mitm_threshold(mut self, threshold: usize) -> Self {
        self.mitm_threshold = threshold;
        self
    }

    /// Always use `method` in [`Verifier::verify`].
    pub fn force(mut self, method: Method) -> Self {
        self.forced = Some(method);
        self
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn verify_naive(&self, d: &Decomposition) -> Result<FaithfulnessReport, VerifyError> {
        check_valid(d)?;
        naive(&Lattice::new(d.terms(), d.n()), self.cap)
    }

    pub fn verify(&self, d: &Decomposition) -> Result<FaithfulnessReport, VerifyError> {
        check_valid(d)?;
        let lattice = Lattice::new(d.terms(), d.n());
        match self.forced {
            Some(Method::Naive) => return naive(&lattice, self.cap),
            Some(Method::Congruence) => return congruence(&lattice, self.cap),
            Some(Method::MeetInMiddle) => return meet_in_middle(&lattice, self.cap),
            Some(Method::CrtSplit) => return crt_split(d, &lattice, self.cap),
            None => {}
        }
        let pivot = lattice.pivot();
        let walked: Vec<usize> = significance(lattice.len())
            .into_iter()
            .filter(|&i| i != pivot)
            .collect();
        if walked.len() <= self.mitm_threshold {
            if lattice.size_of(&walked) <= BigUint::from(self.cap) {
                return congruence(&lattice, self.cap);
            }
        } else {
            let (left, right) = walked.split_at(walked.len().div_ceil(2));
            if lattice.size_of(left) + lattice.size_of(right) <= BigUint::from(self.cap) {
                match meet_in_middle(&lattice, self.cap) {
                    Err(VerifyError::CapExceeded { .. }) => {}
                    other => return other,
                }
            }
        }
        crt_split(d, &lattice, self.cap)
    }

    /// Every value `sum x_i/b_i` (over the full coefficient lattice) lying in
    /// `(1/n)Z`, where `n` is the target's denominator. Always contains 0.
    pub fn partial_sums_in_ideal(
        &self,
        d: &Decomposition,
    ) -> Result<BTreeSet<Rational>, VerifyError> {
        self.lattice_sums_in_ideal(d.terms(), &d.n())
    }

    /// Every value `sum x_i/b_i` with `0 <= x_i <= a_i` lying in `(1/n)Z`.
    pub fn lattice_sums_in_ideal(
        &self,
        terms: &[Term],
        n: &BigUint,
    ) -> Result<BTreeSet<Rational>, VerifyError> {
        let lattice = Lattice::new(terms, n.clone());
        let mut split = Split::new(terms, n, self.cap);
        let all: Vec<usize> = (0..terms.len()).collect();
        let vectors = split.solve(&all, &Rational::zero())?;
        Ok(vectors
            .into_iter()
            .map(|v| lattice.value(&lattice.scaled_sum(&densify(v, terms.len()))))
            .collect())
    }
}

fn check_valid(d: &Decomposition) -> Result<(), VerifyError> {
    let violations = d.validate();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(VerifyError::Invalid(violations))
    }
}

/// Integer view of a decomposition's coefficient lattice.
struct Lattice {
    bounds: Vec<BigUint>,
    weights: Vec<BigUint>,
    /// `L = lcm(b_i)`
    scale: BigUint,
    /// `Q = L / gcd(L, n)`
    modulus: BigUint,
    /// scaled value of the full vector, `m L / n`
    full: BigUint,
    n: BigUint,
}

impl Lattice {
    fn new(terms: &[Term], n: BigUint) -> Self {
        let scale = terms
            .iter()
            .fold(BigUint::one(), |acc, t| acc.lcm(t.den()));
        let weights: Vec<BigUint> = terms.iter().map(|t| &scale / t.den()).collect();
        let bounds: Vec<BigUint> = terms.iter().map(|t| t.num().clone()).collect();
        let full = bounds
            .iter()
            .zip(&weights)
            .fold(BigUint::zero(), |acc, (a, w)| acc + a * w);
        let modulus = &scale / scale.gcd(&n);
        Lattice {
            bounds,
            weights,
            scale,
            modulus,
            full,
            n,
        }
    }

    fn len(&self) -> usize {
        self.bounds.len()
    }

    fn is_violation(&self, s: &BigUint) -> bool {
        (s % &self.modulus).is_zero() && !s.is_zero() && s != &self.full
    }

    fn value(&self, s: &BigUint) -> Rational {
        Rational::from_parts(s, &self.scale)
    }

    fn scaled_sum(&self, x: &[BigUint]) -> BigUint {
        x.iter()
            .zip(&self.weights)
            .fold(BigUint::zero(), |acc, (xi, w)| acc + xi * w)
    }

    fn size_of(&self, idx: &[usize]) -> BigUint {
        idx.iter()
            .fold(BigUint::one(), |acc, &i| acc * (&self.bounds[i] + 1u32))
    }

    /// Index of the largest numerator (first one on ties).
    fn pivot(&self) -> usize {
        let mut best = 0;
        for i in 1..self.len() {
            if self.bounds[i] > self.bounds[best] {
                best = i;
            }
        }
        best
    }

    fn small_bounds(&self, idx: &[usize]) -> Vec<u64> {
        idx.iter()
            .map(|&i| self.bounds[i].to_u64().expect("bound checked against cap"))
            .collect()
    }

    fn violation(&self, x: Vec<BigUint>) -> CoefficientViolation {
        let value = self.value(&self.scaled_sum(&x));
        CoefficientViolation {
            coefficients: x,
            value,
        }
    }
}

fn report(
    method: Method,
    violation: Option<CoefficientViolation>,
    combos_examined: u64,
) -> FaithfulnessReport {
    FaithfulnessReport {
        faithful: violation.is_none(),
        violation,
        combos_examined,
        method,
    }
}

/// Walks `0 <= x_i <= bounds[i]` in lexicographic order (last position
/// fastest), tracking `s = sum x_i w_i` incrementally. Stops when `visit`
/// returns false.
fn walk_lex<N>(bounds: &[u64], weights: &[N], mut visit: impl FnMut(&[u64], &N) -> bool)
where
    N: Clone + Zero + From<u64> + for<'a> AddAssign<&'a N> + for<'a> SubAssign<&'a N>,
    for<'a> &'a N: std::ops::Mul<N, Output = N>,
{
    let wraps: Vec<N> = bounds
        .iter()
        .zip(weights)
        .map(|(&a, w)| w * N::from(a))
        .collect();
    let mut x = vec![0u64; bounds.len()];
    let mut s = N::zero();
    loop {
        if !visit(&x, &s) {
            return;
        }
        let mut i = bounds.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if x[i] < bounds[i] {
                x[i] += 1;
                s += &weights[i];
                break;
            }
            s -= &wraps[i];
            x[i] = 0;
        }
    }
}

fn to_big(x: &[u64]) -> Vec<BigUint> {
    x.iter().map(|&v| BigUint::from(v)).collect()
}

fn naive(lattice: &Lattice, cap: u64) -> Result<FaithfulnessReport, VerifyError> {
    let all = significance(lattice.len());
    if lattice.size_of(&all) > BigUint::from(cap) {
        return Err(VerifyError::CapExceeded {
            method: Method::Naive,
            cap,
        });
    }
    let bounds = lattice.small_bounds(&all);
    let mut examined = 0u64;
    let mut found: Option<Vec<u64>> = None;

    // u128 fast path; every partial sum is bounded by `full`.
    let fits = lattice
        .full
        .to_u128()
        .filter(|&f| f < u128::MAX / 2)
        .is_some();
    if fits {
        let weights: Vec<u128> = all
            .iter()
            .map(|&i| lattice.weights[i].to_u128().unwrap())
            .collect();
        let q = lattice.modulus.to_u128().unwrap();
        let full = lattice.full.to_u128().unwrap();
        walk_lex(&bounds, &weights, |x, &s| {
            examined += 1;
            if s % q == 0 && s != 0 && s != full {
                found = Some(x.to_vec());
                return false;
            }
            true
        });
    } else {
        let weights: Vec<BigUint> = all.iter().map(|&i| lattice.weights[i].clone()).collect();
        walk_lex(&bounds, &weights, |x, s| {
            examined += 1;
            if lattice.is_violation(s) {
                found = Some(x.to_vec());
                return false;
            }
            true
        });
    }
    let violation = found.map(|mut x| {
        x.reverse();
        lattice.violation(to_big(&x))
    });
    Ok(report(Method::Naive, violation, examined))
}

/// Solves `s + x * w = 0 (mod Q)` for `x`, precomputed for one pivot weight.
struct PivotSolver<'a> {
    lattice: &'a Lattice,
    pivot: usize,
    g: BigUint,
    step: BigUint,
    inv: BigUint,
}

impl<'a> PivotSolver<'a> {
    fn new(lattice: &'a Lattice, pivot: usize) -> Self {
        let q = &lattice.modulus;
        let w = &lattice.weights[pivot] % q;
        let g = w.gcd(q);
        let step = q / &g;
        let inv = inverse_mod_or_zero(&((&w / &g) % &step), &step)
            .expect("w/g is coprime to Q/g");
        PivotSolver {
            lattice,
            pivot,
            g,
            step,
            inv,
        }
    }

    /// Smallest pivot coefficient making a violation together with the walked
    /// terms' scaled sum `s`, if any.
    fn smallest_violation(&self, s: &BigUint) -> Option<BigUint> {
        let q = &self.lattice.modulus;
        let need = (q - s % q) % q;
        if !(&need % &self.g).is_zero() {
            return None;
        }
        let bound = &self.lattice.bounds[self.pivot];
        let weight = &self.lattice.weights[self.pivot];
        let mut x = (&need / &self.g * &self.inv) % &self.step;
        // the total is strictly increasing in x, so at most two candidates are
        // excluded (total 0 and total = full)
        for _ in 0..3 {
            if &x > bound {
                return None;
            }
            let total = s + &x * weight;
            if !total.is_zero() && total != self.lattice.full {
                return Some(x);
            }
            x += &self.step;
        }
        None
    }
}

/// Tracks the lexicographically smallest violating vector seen so far.
struct LexMin {
    best: Option<Vec<BigUint>>,
}

impl LexMin {
    fn offer(&mut self, candidate: impl FnOnce() -> Vec<BigUint>) {
        let candidate = candidate();
        match &self.best {
            Some(b) if cmp_vec(&candidate, b) != Ordering::Less => {}
            _ => self.best = Some(candidate),
        }
    }
}

/// Vectors are ordered by their last coordinate first, matching enumeration
/// with the first coordinate varying fastest.
fn cmp_vec(a: &[BigUint], b: &[BigUint]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

/// Coordinates from most to least significant.
fn significance(len: usize) -> Vec<usize> {
    (0..len).rev().collect()
}

fn assemble(len: usize, pivot: usize, x_pivot: BigUint, walked: &[usize], x: &[u64]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); len];
    out[pivot] = x_pivot;
    for (&i, &v) in walked.iter().zip(x) {
        out[i] = BigUint::from(v);
    }
    out
}

fn congruence(lattice: &Lattice, cap: u64) -> Result<FaithfulnessReport, VerifyError> {
    let pivot = lattice.pivot();
    let walked: Vec<usize> = significance(lattice.len())
        .into_iter()
        .filter(|&i| i != pivot)
        .collect();
    if lattice.size_of(&walked) > BigUint::from(cap) {
        return Err(VerifyError::CapExceeded {
            method: Method::Congruence,
            cap,
        });
    }
    let solver = PivotSolver::new(lattice, pivot);
    let bounds = lattice.small_bounds(&walked);
    let weights: Vec<BigUint> = walked.iter().map(|&i| lattice.weights[i].clone()).collect();
    let pivot_is_least = pivot == 0;
    let mut examined = 0u64;
    let mut min = LexMin { best: None };
    walk_lex(&bounds, &weights, |x, s| {
        examined += 1;
        if let Some(xp) = solver.smallest_violation(s) {
            min.offer(|| assemble(lattice.len(), pivot, xp, &walked, x));
            // walk order is already the global order when the pivot is least
            // significant
            if pivot_is_least {
                return false;
            }
        }
        true
    });
    let violation = min.best.map(|x| lattice.violation(x));
    Ok(report(Method::Congruence, violation, examined))
}

fn mixed_radix_decode(mut index: u64, bounds: &[u64]) -> Vec<u64> {
    let mut x = vec![0u64; bounds.len()];
    for i in (0..bounds.len()).rev() {
        let radix = bounds[i] + 1;
        x[i] = index % radix;
        index /= radix;
    }
    x
}

fn meet_in_middle(lattice: &Lattice, cap: u64) -> Result<FaithfulnessReport, VerifyError> {
    let exceeded = || VerifyError::CapExceeded {
        method: Method::MeetInMiddle,
        cap,
    };
    let pivot = lattice.pivot();
    let walked: Vec<usize> = significance(lattice.len())
        .into_iter()
        .filter(|&i| i != pivot)
        .collect();
    let (left, right) = walked.split_at(walked.len().div_ceil(2));
    if lattice.size_of(left) + lattice.size_of(right) > BigUint::from(cap) {
        return Err(exceeded());
    }
    let solver = PivotSolver::new(lattice, pivot);
    let g = &solver.g;
    let weights_of = |idx: &[usize]| -> Vec<BigUint> {
        idx.iter().map(|&i| lattice.weights[i].clone()).collect()
    };
    let left_bounds = lattice.small_bounds(left);
    let right_bounds = lattice.small_bounds(right);
    let mut examined = 0u64;

    let mut table: HashMap<BigUint, Vec<(u64, BigUint)>> = HashMap::new();
    let mut index = 0u64;
    walk_lex(&right_bounds, &weights_of(right), |_, s| {
        table.entry(s % g).or_default().push((index, s.clone()));
        index += 1;
        true
    });
    examined += index;

    let mut min = LexMin { best: None };
    let mut over = false;
    walk_lex(&left_bounds, &weights_of(left), |xl, s1| {
        examined += 1;
        let key = (g - s1 % g) % g;
        if let Some(matches) = table.get(&key) {
            for (idx, s2) in matches {
                examined += 1;
                if examined > cap {
                    over = true;
                    return false;
                }
                let s = s1 + s2;
                if let Some(xp) = solver.smallest_violation(&s) {
                    let xr = mixed_radix_decode(*idx, &right_bounds);
                    let x: Vec<u64> = xl.iter().chain(&xr).copied().collect();
                    min.offer(|| assemble(lattice.len(), pivot, xp, &walked, &x));
                }
            }
        }
        true
    });
    if over {
        return Err(exceeded());
    }
    let violation = min.best.map(|x| lattice.violation(x));
    Ok(report(Method::MeetInMiddle, violation, examined))
}

fn crt_split(
    d: &Decomposition,
    lattice: &Lattice,
    cap: u64,
) -> Result<FaithfulnessReport, VerifyError> {
    let mut split = Split::new(d.terms(), &lattice.n, cap);
    let all: Vec<usize> = (0..d.len()).collect();
    let vectors = split.solve(&all, &Rational::zero())?;
    let mut min = LexMin { best: None };
    for v in vectors {
        let x = densify(v, d.len());
        if lattice.is_violation(&lattice.scaled_sum(&x)) {
            min.offer(|| x);
        }
    }
    let violation = min.best.map(|x| lattice.violation(x));
    Ok(report(Method::CrtSplit, violation, split.used))
}

type Partial = Vec<(usize, BigUint)>;

fn densify(mut v: Partial, len: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); len];
    for (i, x) in v.drain(..) {
        out[i] = x;
    }
    out
}

/// Enumerates every coefficient vector over a set of terms whose sum plus a
/// fixed offset lies in `(1/n)Z`.
///
/// Terms are grouped by shared prime factors of their denominators. Groups
/// have coprime denominators, so the offset splits into one partial fraction
/// per group (plus a remainder that must already lie in the ideal), and the
/// membership condition holds iff it holds for each group separately.
struct Split<'a> {
    terms: &'a [Term],
    n: &'a BigUint,
    cap: u64,
    used: u64,
}

impl<'a> Split<'a> {
    fn new(terms: &'a [Term], n: &'a BigUint, cap: u64) -> Self {
        Split {
            terms,
            n,
            cap,
            used: 0,
        }
    }

    fn charge(&mut self, amount: &BigUint) -> Result<(), VerifyError> {
        let over = || VerifyError::CapExceeded {
            method: Method::CrtSplit,
            cap: self.cap,
        };
        let amount = amount.to_u64().ok_or_else(over)?;
        self.used = self.used.saturating_add(amount);
        if self.used > self.cap {
            return Err(over());
        }
        Ok(())
    }

    fn solve(&mut self, idx: &[usize], offset: &Rational) -> Result<Vec<Partial>, VerifyError> {
        if idx.is_empty() {
            self.charge(&BigUint::one())?;
            return Ok(if in_ideal(offset, self.n) {
                vec![Vec::new()]
            } else {
                Vec::new()
            });
        }
        let groups = self.groups(idx);
        let p = offset.numer().magnitude().clone();
        let q = offset.denom_unsigned();

        let mut parts = Vec::with_capacity(groups.len());
        let mut covered = BigUint::one();
        for group in &groups {
            let support = group
                .iter()
                .fold(BigUint::one(), |acc, &i| acc.lcm(self.terms[i].den()));
            let qg = smooth_part(&q, &support);
            covered *= &qg;
            let share = if qg.is_one() {
                Rational::zero()
            } else {
                let cofactor = (&q / &qg) % &qg;
                let inv = inverse_mod_or_zero(&cofactor, &qg).expect("coprime cofactor");
                Rational::from_parts(&((&p * inv) % &qg), &qg)
            };
            parts.push(share);
        }
        let rest = &q / &covered;
        if !(self.n % &rest).is_zero() {
            self.charge(&BigUint::one())?;
            return Ok(Vec::new());
        }

        let mut per_group = Vec::with_capacity(groups.len());
        for (group, share) in groups.iter().zip(&parts) {
            let solutions = if group.len() == 1 {
                self.single(group[0], share)?
            } else {
                self.hub(group, share)?
            };
            if solutions.is_empty() {
                return Ok(Vec::new());
            }
            per_group.push(solutions);
        }

        let total = per_group
            .iter()
            .fold(BigUint::one(), |acc, s| acc * BigUint::from(s.len()));
        self.charge(&total)?;
        let mut out: Vec<Partial> = vec![Vec::new()];
        for solutions in per_group {
            let mut next = Vec::with_capacity(out.len() * solutions.len());
            for prefix in &out {
                for s in &solutions {
                    let mut v = prefix.clone();
                    v.extend(s.iter().cloned());
                    next.push(v);
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Connected components of the "denominators share a prime" relation.
    fn groups(&self, idx: &[usize]) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..idx.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                let da = self.terms[idx[a]].den();
                let db = self.terms[idx[b]].den();
                if !da.gcd(db).is_one() {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[rb.max(ra)] = rb.min(ra);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for (a, &term) in idx.iter().enumerate() {
            let root = find(&mut parent, a);
            let k = *slot.entry(root).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[k].push(term);
        }
        groups
    }

    /// All `0 <= x <= a` with `offset + x/b` in `(1/n)Z`: an arithmetic
    /// progression cut out by one linear congruence.
    fn single(&mut self, i: usize, offset: &Rational) -> Result<Vec<Partial>, VerifyError> {
        let (a, b) = (self.terms[i].num(), self.terms[i].den());
        let u = offset.numer().magnitude();
        let w = offset.denom_unsigned();
        let l = w.lcm(b);
        let q = &l / l.gcd(self.n);
        let c = (u * (&l / &w)) % &q;
        let weight = (&l / b) % &q;
        let need = (&q - c) % &q;
        let g = weight.gcd(&q);
        self.charge(&BigUint::one())?;
        if !(&need % &g).is_zero() {
            return Ok(Vec::new());
        }
        let step = &q / &g;
        let inv = inverse_mod_or_zero(&((&weight / &g) % &step), &step).expect("coprime");
        let x0 = (&need / &g * inv) % &step;
        if &x0 > a {
            return Ok(Vec::new());
        }
        let count = (a - &x0) / &step + 1u32;
        self.charge(&count)?;
        let mut out = Vec::new();
        let mut x = x0;
        while &x <= a {
            out.push(vec![(i, x.clone())]);
            x += &step;
        }
        Ok(out)
    }

    /// Enumerates the most connected term of a group and recurses on the rest.
    fn hub(&mut self, group: &[usize], offset: &Rational) -> Result<Vec<Partial>, VerifyError> {
        let degree = |i: usize| {
            group
                .iter()
                .filter(|&&j| j != i && !self.terms[i].den().gcd(self.terms[j].den()).is_one())
                .count()
        };
        let hub = *group
            .iter()
            .max_by(|&&i, &&j| {
                degree(i)
                    .cmp(&degree(j))
                    .then_with(|| self.terms[j].num().cmp(self.terms[i].num()))
                    .then_with(|| j.cmp(&i))
            })
            .expect("group is nonempty");
        let rest: Vec<usize> = group.iter().copied().filter(|&j| j != hub).collect();
        let term = &self.terms[hub];
        self.charge(&(term.num() + 1u32))?;
        let mut out = Vec::new();
        let mut x = BigUint::zero();
        while &x <= term.num() {
            let shifted = offset + &Rational::from_parts(&x, term.den());
            for mut v in self.solve(&rest, &shifted)? {
                v.push((hub, x.clone()));
                out.push(v);
            }
            x += 1u32;
        }
        Ok(out)
    }
}
