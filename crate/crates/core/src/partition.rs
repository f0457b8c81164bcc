//! Decompositions assembled from an integer partition `m = m_1 + ... + m_e`.
//!
//! Each block `m_i/n` gets its own faithful decomposition, with denominators
//! coprime to `n` and to every denominator of the earlier blocks. Over the
//! combined coefficient lattice, the partial sums that land in `(1/n)Z`
//! (`S_e`) are then exactly the subset sums of the `m_i/n` (`T_e`).

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use thiserror::Error;

use crate::construct::{
    all_units_but_one, general_coprime, ConstructError, ConstructionTrace, NumeratorPolicy,
    OmegaSet,
};
use crate::model::{Decomposition, Term};
use crate::numeric::Rational;
use crate::verifier::{VerifyError, Verifier};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("invalid partition: {0}")]
    InvalidSpec(String),
    #[error("{m}/{n} is not irreducible")]
    NotCoprime { m: u64, n: u64 },
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("combined decomposition is malformed: {0}")]
    Internal(String),
}

/// `m = m_1 + ... + m_e` with `m_1 <= ... <= m_e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    m: u64,
    parts: Vec<u64>,
}

impl PartitionSpec {
    /// Parts are sorted into non-decreasing order.
    pub fn new(m: u64, parts: &[u64]) -> Result<Self, PartitionError> {
        if parts.is_empty() {
            return Err(PartitionError::InvalidSpec("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(PartitionError::InvalidSpec("parts must be positive".into()));
        }
        let total = parts
            .iter()
            .try_fold(0u64, |acc, &p| acc.checked_add(p))
            .ok_or_else(|| PartitionError::InvalidSpec("parts overflow".into()))?;
        if total != m {
            return Err(PartitionError::InvalidSpec(format!(
                "parts sum to {total}, not {m}"
            )));
        }
        let mut parts = parts.to_vec();
        parts.sort_unstable();
        Ok(PartitionSpec { m, parts })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }
}

/// Every partition of `m`, parts non-decreasing.
pub fn partitions(m: u64) -> Vec<PartitionSpec> {
    fn go(rest: u64, min: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for p in min..=rest {
            prefix.push(p);
            go(rest - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 {
        go(m, 1, &mut Vec::new(), &mut out);
    }
    out.into_iter()
        .map(|parts| PartitionSpec { m, parts })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub blocks: Vec<Decomposition>,
    pub traces: Vec<ConstructionTrace>,
    pub combined: Decomposition,
}

/// Builds the blocks left to right, each avoiding `n` and all earlier
/// denominators.
///
/// A block is reduced to lowest terms first. The all-units construction is
/// tried first; when its greedy stage cannot bring the remainder below 1
/// within budget (large `m_i/n`), the block falls back to leading numerators
/// `p - 1`.
pub fn decompose_partition(
    spec: &PartitionSpec,
    n: u64,
) -> Result<BlockDecomposition, PartitionError> {
    if n == 0 {
        return Err(PartitionError::InvalidSpec("n must be positive".into()));
    }
    if spec.m.gcd(&n) != 1 {
        return Err(PartitionError::NotCoprime { m: spec.m, n });
    }
    let mut omega = OmegaSet::new();
    omega.insert(BigUint::from(n))?;
    let mut blocks = Vec::with_capacity(spec.parts.len());
    let mut traces = Vec::with_capacity(spec.parts.len());
    let mut terms: Vec<Term> = Vec::new();
    for &part in &spec.parts {
        let g = part.gcd(&n);
        let (mp, np) = (part / g, n / g);
        let (block, trace) = match all_units_but_one(mp, np, &omega) {
            Err(ConstructError::GreedyBudgetExceeded { .. }) => {
                general_coprime(mp, np, NumeratorPolicy::Max, &omega)?
            }
            other => other?,
        };
        for t in block.terms() {
            omega.insert(t.den().clone())?;
        }
        terms.extend(block.terms().iter().cloned());
        blocks.push(block);
        traces.push(trace);
    }
    let combined = Decomposition::new(
        Rational::from_parts(&BigUint::from(spec.m), &BigUint::from(n)),
        terms,
    );
    let problems = combined.validate();
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(|p| p.to_string()).collect();
        return Err(PartitionError::Internal(text.join("; ")));
    }
    Ok(BlockDecomposition {
        blocks,
        traces,
        combined,
    })
}

/// Lattice partial sums of the combined decomposition lying in `(1/n)Z`.
pub fn s_set(
    bd: &BlockDecomposition,
    n: u64,
    verifier: &Verifier,
) -> Result<BTreeSet<Rational>, PartitionError> {
    Ok(verifier.lattice_sums_in_ideal(bd.combined.terms(), &BigUint::from(n))?)
}

/// All subset sums of `m_i/n`.
pub fn t_set(spec: &PartitionSpec, n: u64) -> BTreeSet<Rational> {
    let den = BigUint::from(n);
    let mut sums: BTreeSet<u64> = BTreeSet::from([0]);
    for &p in &spec.parts {
        let shifted: Vec<u64> = sums.iter().map(|s| s + p).collect();
        sums.extend(shifted);
    }
    sums.into_iter()
        .map(|s| Rational::from_parts(&BigUint::from(s), &den))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCheck {
    pub blocks: BlockDecomposition,
    pub s_set: BTreeSet<Rational>,
    pub t_set: BTreeSet<Rational>,
}

impl PartitionCheck {
    /// `S_e = T_e`
    pub fn holds(&self) -> bool {
        self.s_set == self.t_set
    }

    /// `S_e` contains `T_e`
    pub fn contains_subset_sums(&self) -> bool {
        self.t_set.is_subset(&self.s_set)
    }
}

pub fn check_partition_theorem(
    spec: &PartitionSpec,
    n: u64,
) -> Result<PartitionCheck, PartitionError> {
    check_partition_theorem_with(spec, n, &Verifier::default())
}

pub fn check_partition_theorem_with(
    spec: &PartitionSpec,
    n: u64,
    verifier: &Verifier,
) -> Result<PartitionCheck, PartitionError> {
    let blocks = decompose_partition(spec, n)?;
    let s = s_set(&blocks, n, verifier)?;
    Ok(PartitionCheck {
        blocks,
        s_set: s,
        t_set: t_set(spec, n),
    })
}

/// Denominators of all blocks except each block's closing term.
pub fn leading_denominators(bd: &BlockDecomposition) -> Vec<BigUint> {
    bd.blocks
        .iter()
        .flat_map(|b| b.terms()[..b.len() - 1].iter().map(|t| t.den().clone()))
        .collect()
}

/// Pairwise coprimality of the leading denominators, and of each with `n`.
pub fn cross_block_coprime(bd: &BlockDecomposition, n: u64) -> bool {
    let dens = leading_denominators(bd);
    let n = BigUint::from(n);
    dens.iter().all(|b| b.gcd(&n).is_one())
        && dens
            .iter()
            .enumerate()
            .all(|(i, a)| dens[i + 1..].iter().all(|b| a.gcd(b).is_one()))
}
