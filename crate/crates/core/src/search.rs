//! Bounded exhaustive searches: shortest faithful decompositions with small
//! denominators, and agreement between the three-term criterion and the
//! verifier.

use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::construct::{prop6_condition, prop7, ConstructError};
use crate::model::{Decomposition, Term};
use crate::numeric::Rational;
use crate::verifier::{FaithfulnessReport, VerifyError, Verifier};

pub const DEFAULT_COMBO_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("{m}/{n} is not irreducible")]
    NotCoprime { m: u64, n: u64 },
    #[error("budget fields must be positive")]
    EmptyBudget,
    #[error("intermediate values overflow 128 bits")]
    Overflow,
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_length: usize,
    pub max_denominator: u64,
    /// per length: denominator sets plus numerator nodes visited
    pub combo_cap: u64,
}

impl SearchBudget {
    pub fn new(max_length: usize, max_denominator: u64) -> Self {
        SearchBudget {
            max_length,
            max_denominator,
            combo_cap: DEFAULT_COMBO_CAP,
        }
    }

    pub fn with_cap(mut self, combo_cap: u64) -> Self {
        self.combo_cap = combo_cap;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthResult {
    pub length: usize,
    pub found: Option<Decomposition>,
    /// the whole bounded space at this length was scanned
    pub exhausted: bool,
    pub combos: u64,
    /// exact-sum candidates handed to the verifier
    pub candidates: u64,
    /// candidates the verifier could not settle within its cap
    pub undecided: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub m: u64,
    pub n: u64,
    pub budget: SearchBudget,
    pub lengths: Vec<LengthResult>,
}

impl SearchResult {
    pub fn shortest(&self) -> Option<&Decomposition> {
        self.lengths.iter().find_map(|l| l.found.as_ref())
    }

    /// Every length was either scanned completely or produced a witness.
    pub fn complete(&self) -> bool {
        self.lengths.iter().all(|l| l.exhausted || l.found.is_some())
    }
}

/// Candidate denominator `b` with its largest admissible numerator
/// `b/gcd(b, n) - 1`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    b: u64,
    amax: u64,
}

fn candidates(n: u64, max_den: u64) -> Vec<Candidate> {
    (2..=max_den)
        .filter(|b| !n.is_multiple_of(*b))
        .map(|b| Candidate {
            b,
            amax: b / b.gcd(&n) - 1,
        })
        .filter(|c| c.amax >= 1)
        .collect()
}

/// Searches lengths `1..=max_length` for faithful decompositions of `m/n`
/// with distinct denominators `<= max_denominator`.
///
/// Denominator sets are visited in colex order; numerators by backtracking
/// in lexicographic order. Every term obeys `b ∤ n` and `a < b / gcd(b, n)`,
/// which any faithful decomposition satisfies, and partial numerator choices
/// are cut as soon as the residual leaves the range the remaining terms can
/// cover.
pub fn min_length_search(
    m: u64,
    n: u64,
    budget: &SearchBudget,
) -> Result<SearchResult, SearchError> {
    min_length_search_with(m, n, budget, &Verifier::default())
}

pub fn min_length_search_with(
    m: u64,
    n: u64,
    budget: &SearchBudget,
    verifier: &Verifier,
) -> Result<SearchResult, SearchError> {
    if m == 0 || n == 0 {
        return Err(SearchError::NotCoprime { m, n });
    }
    if m.gcd(&n) != 1 {
        return Err(SearchError::NotCoprime { m, n });
    }
    if budget.max_length == 0 || budget.max_denominator == 0 || budget.combo_cap == 0 {
        return Err(SearchError::EmptyBudget);
    }
    let pool = candidates(n, budget.max_denominator);
    let mut best_ratio = Vec::with_capacity(pool.len() + 1);
    best_ratio.push(0.0f64);
    for c in &pool {
        let last = *best_ratio.last().expect("nonempty");
        best_ratio.push(f64::max(last, c.amax as f64 / c.b as f64));
    }
    let mut lengths = Vec::with_capacity(budget.max_length);
    for length in 1..=budget.max_length {
        let mut scan = LengthScan {
            m,
            n,
            pool: &pool,
            best_ratio: &best_ratio,
            cap: budget.combo_cap,
            verifier,
            combos: 0,
            candidates: 0,
            undecided: 0,
            capped: false,
            found: None,
            chosen: Vec::with_capacity(length),
        };
        scan.sets(pool.len(), length)?;
        lengths.push(LengthResult {
            length,
            exhausted: !scan.capped && scan.found.is_none() && scan.undecided == 0,
            found: scan.found,
            combos: scan.combos,
            candidates: scan.candidates,
            undecided: scan.undecided,
        });
    }
    Ok(SearchResult {
        m,
        n,
        budget: *budget,
        lengths,
    })
}

struct LengthScan<'a> {
    m: u64,
    n: u64,
    pool: &'a [Candidate],
    /// `best_ratio[i]` is the largest `amax/b` over `pool[..i]`
    best_ratio: &'a [f64],
    cap: u64,
    verifier: &'a Verifier,
    combos: u64,
    candidates: u64,
    undecided: u64,
    capped: bool,
    found: Option<Decomposition>,
    /// chosen candidate indices, largest first
    chosen: Vec<usize>,
}

enum Flow {
    Continue,
    Stop,
}

impl LengthScan<'_> {
    fn tick(&mut self) -> Flow {
        self.combos += 1;
        if self.combos > self.cap {
            self.capped = true;
            Flow::Stop
        } else {
            Flow::Continue
        }
    }

    fn done(&self) -> bool {
        self.capped || self.found.is_some()
    }

    /// Chooses the next-largest denominator among `pool[..below]`.
    fn sets(&mut self, below: usize, remaining: usize) -> Result<(), SearchError> {
        if remaining == 0 {
            if let Flow::Stop = self.tick() {
                return Ok(());
            }
            return self.numerators();
        }
        if !self.can_reach(below, remaining) {
            return Ok(());
        }
        for i in (remaining - 1)..below {
            self.chosen.push(i);
            self.sets(i, remaining - 1)?;
            self.chosen.pop();
            if self.done() {
                break;
            }
        }
        Ok(())
    }

    /// Floating-point bounds on the sums still reachable, padded so rounding
    /// never discards a feasible set.
    fn can_reach(&self, below: usize, remaining: usize) -> bool {
        let target = self.m as f64 / self.n as f64;
        let (mut lo, mut hi) = (0.0, 0.0);
        for &i in &self.chosen {
            let c = self.pool[i];
            lo += 1.0 / c.b as f64;
            hi += c.amax as f64 / c.b as f64;
        }
        if below < remaining {
            return false;
        }
        let k = remaining as f64;
        let largest_below = self.pool[below - 1].b as f64;
        lo += k / largest_below;
        hi += k * self.best_ratio[below];
        let slack = 1e-9 * (1.0 + target);
        lo <= target + slack && hi >= target - slack
    }

    fn numerators(&mut self) -> Result<(), SearchError> {
        let mut dens: Vec<Candidate> = self.chosen.iter().map(|&i| self.pool[i]).collect();
        dens.reverse();
        let scale = dens
            .iter()
            .try_fold(self.n as i128, |acc, c| lcm_i128(acc, c.b as i128))
            .ok_or(SearchError::Overflow)?;
        let weights: Vec<i128> = dens.iter().map(|c| scale / c.b as i128).collect();
        let residual = (self.m as i128)
            .checked_mul(scale / self.n as i128)
            .ok_or(SearchError::Overflow)?;
        // suffix bounds on what terms j.. can contribute, in units of 1/scale
        let t = dens.len();
        let mut min_suffix = vec![0i128; t + 1];
        let mut max_suffix = vec![0i128; t + 1];
        for j in (0..t).rev() {
            min_suffix[j] = min_suffix[j + 1]
                .checked_add(weights[j])
                .ok_or(SearchError::Overflow)?;
            max_suffix[j] = max_suffix[j + 1]
                .checked_add(weights[j].checked_mul(dens[j].amax as i128).ok_or(SearchError::Overflow)?)
                .ok_or(SearchError::Overflow)?;
        }
        let ctx = NumeratorCtx {
            dens: &dens,
            weights: &weights,
            min_suffix: &min_suffix,
            max_suffix: &max_suffix,
        };
        let mut chosen = Vec::with_capacity(t);
        self.assign(&ctx, 0, residual, &mut chosen)
    }

    fn assign(
        &mut self,
        ctx: &NumeratorCtx<'_>,
        j: usize,
        residual: i128,
        chosen: &mut Vec<u64>,
    ) -> Result<(), SearchError> {
        let t = ctx.dens.len();
        if residual < ctx.min_suffix[j] || residual > ctx.max_suffix[j] {
            return Ok(());
        }
        if j + 1 == t {
            let w = ctx.weights[j];
            if residual % w == 0 {
                let a = (residual / w) as u64;
                if a >= 1 && a <= ctx.dens[j].amax {
                    chosen.push(a);
                    let r = self.candidate(ctx.dens, chosen);
                    chosen.pop();
                    r?;
                }
            }
            return Ok(());
        }
        if j + 2 == t {
            return self.assign_pair(ctx, j, residual, chosen);
        }
        let w = ctx.weights[j];
        for a in 1..=ctx.dens[j].amax {
            if let Flow::Stop = self.tick() {
                return Ok(());
            }
            let rest = residual - w * a as i128;
            if rest < ctx.min_suffix[j + 1] {
                break;
            }
            chosen.push(a);
            let r = self.assign(ctx, j + 1, rest, chosen);
            chosen.pop();
            r?;
            if self.done() {
                break;
            }
        }
        Ok(())
    }

    /// Last two numerators: `a w1 + c w2 = residual` solved directly, `a`
    /// ascending.
    fn assign_pair(
        &mut self,
        ctx: &NumeratorCtx<'_>,
        j: usize,
        residual: i128,
        chosen: &mut Vec<u64>,
    ) -> Result<(), SearchError> {
        let (w1, w2) = (ctx.weights[j], ctx.weights[j + 1]);
        let (amax, cmax) = (ctx.dens[j].amax as i128, ctx.dens[j + 1].amax as i128);
        let g = w1.gcd(&w2);
        if residual % g != 0 {
            return Ok(());
        }
        let (w1g, w2g, rg) = (w1 / g, w2 / g, residual / g);
        // a = rg * w1g^-1 (mod w2g)
        let inv = match inverse_i128(w1g.rem_euclid(w2g), w2g) {
            Some(v) => v,
            None => return Ok(()),
        };
        let step = w2g;
        let base = mul_mod(rg.rem_euclid(step), inv, step);
        let mut a = if base == 0 { step } else { base };
        while a <= amax {
            if let Flow::Stop = self.tick() {
                return Ok(());
            }
            let rest = residual - a * w1;
            if rest < w2 {
                break;
            }
            let c = rest / w2;
            if c <= cmax {
                chosen.push(a as u64);
                chosen.push(c as u64);
                let r = self.candidate(ctx.dens, chosen);
                chosen.pop();
                chosen.pop();
                r?;
                if self.done() {
                    break;
                }
            }
            a += step;
        }
        Ok(())
    }

    fn candidate(&mut self, dens: &[Candidate], nums: &[u64]) -> Result<(), SearchError> {
        self.candidates += 1;
        let terms: Vec<Term> = dens
            .iter()
            .zip(nums)
            .map(|(c, &a)| Term::new(a, c.b).expect("positive"))
            .collect();
        let d = Decomposition::new(
            Rational::new(self.m as i64, self.n as i64).expect("n > 0"),
            terms,
        );
        debug_assert!(d.is_valid());
        match self.verifier.verify(&d) {
            Ok(report) if report.faithful => self.found = Some(d),
            Ok(_) => {}
            Err(VerifyError::CapExceeded { .. }) => self.undecided += 1,
            Err(e) => return Err(e.into()),
        }
        Ok(())
    }
}

struct NumeratorCtx<'a> {
    dens: &'a [Candidate],
    weights: &'a [i128],
    min_suffix: &'a [i128],
    max_suffix: &'a [i128],
}

fn lcm_i128(a: i128, b: i128) -> Option<i128> {
    (a / a.gcd(&b)).checked_mul(b)
}

fn mul_mod(a: i128, b: i128, m: i128) -> i128 {
    let (a, b, m) = (a as u128, b as u128, m as u128);
    match a.checked_mul(b) {
        Some(p) => (p % m) as i128,
        None => {
            let r = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(m);
            r.to_u128().expect("below modulus") as i128
        }
    }
}

fn inverse_i128(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let e = a.extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

/// Which three-term shapes a discrepancy scan visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapeFilter {
    /// the parametric three-term outputs only
    #[default]
    Prop7,
    /// every `(y2, y, x)` within the bounds whose residual is a unit fraction
    General { max_y2: u64, max_y: u64, max_x: u64 },
}

/// One `m/n = 1/y2 + 1/y1 + x/(yn)` instance with both verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop6Instance {
    pub m: u64,
    pub n: u64,
    pub y2: u64,
    pub y: u64,
    pub x: u64,
    pub decomposition: Decomposition,
    pub condition: bool,
    pub report: FaithfulnessReport,
}

impl Prop6Instance {
    pub fn agrees(&self) -> bool {
        self.condition == self.report.faithful
    }
}

/// Evaluates the criterion and the verifier on one instance. `Ok(None)` when
/// the parameters are not of the required shape.
pub fn prop6_instance(
    m: u64,
    n: u64,
    y2: u64,
    y: u64,
    x: u64,
    verifier: &Verifier,
) -> Result<Option<Prop6Instance>, SearchError> {
    let condition = match prop6_condition(m, n, y2, y, x) {
        Ok(c) => c,
        Err(ConstructError::NotProp6Shape(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let yn = BigUint::from(y) * n;
    let target = Rational::new(m as i64, n as i64).expect("n > 0");
    let residual = target.clone()
        - Rational::from_parts(&BigUint::from(1u32), &BigUint::from(y2))
        - Rational::from_parts(&BigUint::from(x), &yn);
    if !residual.is_positive() || !residual.numer().magnitude().to_u64().is_some_and(|v| v == 1) {
        // x >= y short-circuits the criterion before the shape check
        return Ok(None);
    }
    let y1 = residual.denom_unsigned();
    if y1 == BigUint::from(y2) || y1 == yn || yn == BigUint::from(y2) {
        return Ok(None);
    }
    let terms = vec![
        Term::unit(y2),
        Term::unit(y1),
        Term::new(x, yn).expect("positive"),
    ];
    let decomposition = Decomposition::new(target, terms);
    let report = verifier.verify(&decomposition)?;
    Ok(Some(Prop6Instance {
        m,
        n,
        y2,
        y,
        x,
        decomposition,
        condition,
        report,
    }))
}

/// Every instance in range where the criterion and the verifier disagree.
pub fn prop6_discrepancy_scan(
    m_range: RangeInclusive<u64>,
    n_range: RangeInclusive<u64>,
    filter: ShapeFilter,
) -> Result<Vec<Prop6Instance>, SearchError> {
    let verifier = Verifier::default();
    let mut out = Vec::new();
    for m in m_range {
        for n in n_range.clone() {
            if m == 0 || n == 0 || m.gcd(&n) != 1 {
                continue;
            }
            match filter {
                ShapeFilter::Prop7 => {
                    if m < 3 || n <= m {
                        continue;
                    }
                    let (d, _, _) = prop7(m, n)?;
                    let y2 = d.terms()[0].den().to_u64().expect("small");
                    let last = &d.terms()[2];
                    let y = (last.den() / n).to_u64().ok_or(SearchError::Overflow)?;
                    let x = last.num().to_u64().expect("small");
                    if let Some(inst) = prop6_instance(m, n, y2, y, x, &verifier)? {
                        if !inst.agrees() {
                            out.push(inst);
                        }
                    }
                }
                ShapeFilter::General { max_y2, max_y, max_x } => {
                    for y2 in 2..=max_y2 {
                        for y in 1..=max_y {
                            if y.gcd(&y2) != 1 {
                                continue;
                            }
                            for x in 1..=max_x {
                                if let Some(inst) = prop6_instance(m, n, y2, y, x, &verifier)? {
                                    if !inst.agrees() {
                                        out.push(inst);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::decomposition_from;

    #[test]
    fn seven_thirds_has_no_short_faithful_decomposition() {
        let r = min_length_search(7, 3, &SearchBudget::new(3, 30)).unwrap();
        assert_eq!(r.lengths.len(), 3);
        for l in &r.lengths {
            assert!(l.found.is_none(), "length {}", l.length);
            assert!(l.exhausted, "length {}", l.length);
        }
    }

    #[test]
    fn two_thirds_found_at_length_two() {
        let r = min_length_search(2, 3, &SearchBudget::new(2, 10)).unwrap();
        assert!(r.lengths[0].found.is_none());
        assert!(r.lengths[0].exhausted);
        assert_eq!(
            r.lengths[1].found,
            Some(decomposition_from((2, 3), &[(1, 2), (1, 6)]))
        );
    }

    #[test]
    fn seven_thirds_length_four_scan_stops_at_cap() {
        // the canonical length-4 decomposition sits inside the bounds...
        let (witness, _) = crate::construct::theorem1(7u32, 3u32).unwrap();
        let pool = candidates(3, 8000);
        for t in witness.terms() {
            let b = t.den().to_u64().unwrap();
            let c = pool.iter().find(|c| c.b == b).expect("admissible denominator");
            assert!(t.num().to_u64().unwrap() <= c.amax);
        }
        // ...but colex order reaches it only after every set with a smaller
        // largest denominator, so a capped scan reports a partial result
        let budget = SearchBudget::new(4, 8000).with_cap(20_000);
        let r = min_length_search(7, 3, &budget).unwrap();
        assert!(r.lengths[..2].iter().all(|l| l.exhausted));
        assert!(!r.lengths[3].exhausted);
        assert!(r.lengths.iter().all(|l| l.found.is_none()));
    }

    #[test]
    fn cap_marks_partial_scans() {
        let r = min_length_search(7, 3, &SearchBudget::new(3, 30).with_cap(5)).unwrap();
        assert!(r.lengths.iter().any(|l| !l.exhausted));
    }

    #[test]
    fn rejects_reducible_input() {
        assert!(min_length_search(2, 4, &SearchBudget::new(2, 10)).is_err());
    }

    #[test]
    fn prop7_scan_is_clean() {
        let found = prop6_discrepancy_scan(3..=5, 1..=500, ShapeFilter::Prop7).unwrap();
        assert!(found.is_empty(), "{found:?}");
    }

    #[test]
    fn four_ninths_instance_agrees() {
        let inst = prop6_instance(4, 9, 3, 5, 2, &Verifier::default()).unwrap().unwrap();
        assert!(!inst.condition);
        assert!(!inst.report.faithful);
        assert_eq!(
            inst.report.violation.as_ref().unwrap().value,
            Rational::new(1, 3).unwrap()
        );
        assert!(inst.agrees());
    }

    #[test]
    fn general_scan_runs() {
        let found = prop6_discrepancy_scan(
            3..=4,
            5..=15,
            ShapeFilter::General {
                max_y2: 8,
                max_y: 8,
                max_x: 8,
            },
        )
        .unwrap();
        for inst in &found {
            assert!(inst.decomposition.is_valid());
        }
    }
}
