//! Occupation-vector arithmetic and the enumerations that index the
//! identity sums.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::SubsetIndex;

/// Default cap on the number of patterns a single enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Per-mode particle counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector {
    counts: Vec<usize>,
}

impl OccupationVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { counts: vec![0; dim] }
    }

    /// One particle in each mode of `subset`.
    pub fn indicator(subset: &SubsetIndex) -> Self {
        let mut counts = vec![0; subset.dim()];
        for &i in subset.indices() {
            counts[i] = 1;
        }
        Self { counts }
    }

    /// `count` particles in the single 0-based `mode`.
    pub fn single_mode(dim: usize, mode: usize, count: usize) -> Self {
        let mut counts = vec![0; dim];
        counts[mode] = count;
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// True when every mode holds at most one particle.
    pub fn is_binary(&self) -> bool {
        self.counts.iter().all(|&c| c <= 1)
    }

    /// Modes with a nonzero count.
    pub fn support(&self) -> SubsetIndex {
        let idx = self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i).collect();
        SubsetIndex::from_sorted_unchecked(idx, self.dim())
    }

    /// Mode index `s` repeated `counts[s]` times, in mode order.
    pub fn expanded_modes(&self) -> Vec<usize> {
        self.counts.iter().enumerate().flat_map(|(s, &c)| std::iter::repeat_n(s, c)).collect()
    }

    /// Componentwise `self <= other`.
    pub fn is_dominated_by(&self, other: &OccupationVector) -> bool {
        self.dim() == other.dim() && self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }

    /// `self - other`, or `None` if any component would go negative.
    pub fn checked_sub(&self, other: &OccupationVector) -> Option<OccupationVector> {
        assert_eq!(self.dim(), other.dim(), "occupation dimension mismatch");
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a.checked_sub(*b)).collect::<Option<_>>()?;
        Some(Self { counts })
    }

    pub fn factorial_product(&self) -> Result<u64> {
        factorial_product(self)
    }

    /// Renders counts joined by `sep`, e.g. `1,0,2`.
    pub fn join(&self, sep: &str) -> String {
        self.counts.iter().map(usize::to_string).collect::<Vec<_>>().join(sep)
    }

    /// CSV-safe token: counts joined by `-`.
    pub fn token(&self) -> String {
        self.join("-")
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join(","))
    }
}

impl FromStr for OccupationVector {
    type Err = Error;

    /// Parses a comma-separated list of non-negative integers.
    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("`{t}` is not a non-negative integer in pattern `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { counts })
    }
}

/// The vector with ones on `support` and zeros elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorVector {
    support: SubsetIndex,
}

impl IndicatorVector {
    pub fn new(support: SubsetIndex) -> Self {
        Self { support }
    }

    pub fn support(&self) -> &SubsetIndex {
        &self.support
    }

    pub fn dimension(&self) -> usize {
        self.support.dim()
    }

    pub fn to_occupation(&self) -> OccupationVector {
        OccupationVector::indicator(&self.support)
    }
}

/// `v - 1_alpha`, or `None` when some mode of `alpha` is empty in `v`.
/// Callers drop such terms.
pub fn subtract_indicator(v: &OccupationVector, alpha: &SubsetIndex) -> Option<OccupationVector> {
    assert_eq!(v.dim(), alpha.dim(), "occupation dimension mismatch");
    let mut counts = v.counts.clone();
    for &s in alpha.indices() {
        counts[s] = counts[s].checked_sub(1)?;
    }
    Some(OccupationVector { counts })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

/// Number of occupation vectors of length `dim` summing to `total`.
pub fn occupation_count(dim: usize, total: usize) -> u128 {
    if dim == 0 {
        return u128::from(total == 0);
    }
    binomial(total + dim - 1, dim - 1)
}

/// All length-`dim` vectors summing to `total`, first component descending
/// (so `(2,0), (1,1), (0,2)` for two modes).
pub fn enumerate_occupations(dim: usize, total: usize) -> Result<Vec<OccupationVector>> {
    enumerate_occupations_capped(dim, total, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_occupations_capped(dim: usize, total: usize, cap: usize) -> Result<Vec<OccupationVector>> {
    if dim == 0 {
        return Err(Error::InvalidInput("occupation vectors need at least one mode".into()));
    }
    let count = occupation_count(dim, total);
    if count > cap as u128 {
        return Err(Error::BudgetExceeded(format!(
            "{count} occupation patterns of {total} particles in {dim} modes exceed the cap {cap}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = vec![0usize; dim];
    fill_occupations(&mut current, 0, total, &mut out);
    Ok(out)
}

fn fill_occupations(current: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<OccupationVector>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(OccupationVector::new(current.to_vec()));
        return;
    }
    for c in (0..=remaining).rev() {
        current[pos] = c;
        fill_occupations(current, pos + 1, remaining - c, out);
    }
    current[pos] = 0;
}

/// All `m`-element subsets of `0..dim` in lexicographic order.
pub fn enumerate_subsets(dim: usize, m: usize) -> Vec<SubsetIndex> {
    if m > dim {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(dim, m) as usize);
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(SubsetIndex::from_sorted_unchecked(idx.clone(), dim));
        // advance to the next combination
        let Some(pos) = (0..m).rev().find(|&p| idx[p] < dim - m + p) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..m {
            idx[p] = idx[p - 1] + 1;
        }
    }
    out
}

/// All 0/1 vectors `j` with `j_s <= min(v_s, 1)`, in ascending lexicographic order.
pub fn bounded_subvectors(v: &OccupationVector) -> Vec<OccupationVector> {
    let caps: Vec<usize> = v.counts().iter().map(|&c| c.min(1)).collect();
    all_below(&caps)
}

/// All vectors `j` with `0 <= j <= v` componentwise, in ascending lexicographic order.
pub fn subvectors(v: &OccupationVector) -> Vec<OccupationVector> {
    all_below(v.counts())
}

fn all_below(caps: &[usize]) -> Vec<OccupationVector> {
    let mut out = Vec::new();
    let mut current = vec![0usize; caps.len()];
    loop {
        out.push(OccupationVector::new(current.clone()));
        // odometer increment from the last mode
        let mut pos = caps.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if current[pos] < caps[pos] {
                current[pos] += 1;
                current[pos + 1..].iter_mut().for_each(|c| *c = 0);
                break;
            }
        }
    }
}

const FACTORIALS: [u64; 21] = {
    let mut table = [1u64; 21];
    let mut k = 1;
    while k < 21 {
        table[k] = table[k - 1] * k as u64;
        k += 1;
    }
    table
};

/// `prod_s v_s!` in exact 64-bit arithmetic.
pub fn factorial_product(v: &OccupationVector) -> Result<u64> {
    v.counts().iter().try_fold(1u64, |acc, &c| {
        let f = *FACTORIALS.get(c).ok_or(Error::Overflow(c))?;
        acc.checked_mul(f).ok_or(Error::Overflow(c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(c: &[usize]) -> OccupationVector {
        OccupationVector::new(c.to_vec())
    }

    #[test]
    fn occupations_small() {
        assert_eq!(enumerate_occupations(2, 2).unwrap(), vec![ov(&[2, 0]), ov(&[1, 1]), ov(&[0, 2])]);
        assert_eq!(enumerate_occupations(3, 1).unwrap(), vec![ov(&[1, 0, 0]), ov(&[0, 1, 0]), ov(&[0, 0, 1])]);
        assert_eq!(enumerate_occupations(4, 3).unwrap().len(), 20);
        assert_eq!(enumerate_occupations(3, 0).unwrap(), vec![ov(&[0, 0, 0])]);
    }

    #[test]
    fn occupations_respect_cap() {
        assert!(matches!(enumerate_occupations_capped(10, 10, 1000), Err(Error::BudgetExceeded(_))));
        assert!(enumerate_occupations(0, 1).is_err());
    }

    #[test]
    fn subsets_small() {
        let s0 = enumerate_subsets(3, 0);
        assert_eq!(s0.len(), 1);
        assert!(s0[0].is_empty());
        let s2: Vec<String> = enumerate_subsets(3, 2).iter().map(ToString::to_string).collect();
        assert_eq!(s2, ["{1,2}", "{1,3}", "{2,3}"]);
        assert_eq!(enumerate_subsets(4, 2).len(), 6);
        assert!(enumerate_subsets(2, 3).is_empty());
    }

    #[test]
    fn subtract_indicator_cases() {
        let s = |l: &[usize], n| SubsetIndex::from_one_based(l, n).unwrap();
        assert_eq!(subtract_indicator(&ov(&[2, 1]), &s(&[1], 2)), Some(ov(&[1, 1])));
        assert_eq!(subtract_indicator(&ov(&[1, 0]), &s(&[2], 2)), None);
        assert_eq!(subtract_indicator(&ov(&[1, 1]), &s(&[1, 2], 2)), Some(ov(&[0, 0])));
    }

    #[test]
    fn bounded_subvector_cases() {
        assert_eq!(bounded_subvectors(&ov(&[1, 1])), vec![ov(&[0, 0]), ov(&[0, 1]), ov(&[1, 0]), ov(&[1, 1])]);
        assert_eq!(bounded_subvectors(&ov(&[2, 0])), vec![ov(&[0, 0]), ov(&[1, 0])]);
        assert_eq!(bounded_subvectors(&ov(&[0, 0, 0])), vec![ov(&[0, 0, 0])]);
        assert_eq!(subvectors(&ov(&[2, 1])).len(), 6);
    }

    #[test]
    fn factorial_products() {
        assert_eq!(factorial_product(&ov(&[1, 1, 1])).unwrap(), 1);
        assert_eq!(factorial_product(&ov(&[3, 2])).unwrap(), 12);
        assert_eq!(factorial_product(&ov(&[0, 0])).unwrap(), 1);
        assert_eq!(factorial_product(&ov(&[20])).unwrap(), 2_432_902_008_176_640_000);
        assert_eq!(factorial_product(&ov(&[21])), Err(Error::Overflow(21)));
        assert!(factorial_product(&ov(&[20, 20])).is_err());
    }

    #[test]
    fn parse_and_render() {
        let v: OccupationVector = "1, 0,2,1".parse().unwrap();
        assert_eq!(v, ov(&[1, 0, 2, 1]));
        assert_eq!(v.to_string(), "1,0,2,1");
        assert_eq!(v.token(), "1-0-2-1");
        assert!("1,-1".parse::<OccupationVector>().is_err());
        assert!("".parse::<OccupationVector>().is_err());
    }

    #[test]
    fn expanded_modes_and_support() {
        let v = ov(&[0, 2, 1]);
        assert_eq!(v.expanded_modes(), vec![1, 1, 2]);
        assert_eq!(v.support().to_string(), "{2,3}");
        assert_eq!(IndicatorVector::new(v.support()).to_occupation(), ov(&[0, 1, 1]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn occupation_count_and_sums(dim in 1usize..6, total in 0usize..6) {
                let all = enumerate_occupations(dim, total).unwrap();
                prop_assert_eq!(all.len() as u128, occupation_count(dim, total));
                prop_assert!(all.iter().all(|v| v.total() == total && v.dim() == dim));
                // strictly descending, hence no duplicates
                prop_assert!(all.windows(2).all(|w| w[0] > w[1]));
            }

            #[test]
            fn subsets_partition_power_set(dim in 0usize..9) {
                let total: usize = (0..=dim).map(|m| {
                    let s = enumerate_subsets(dim, m);
                    assert_eq!(s.len() as u128, binomial(dim, m));
                    s.len()
                }).sum();
                prop_assert_eq!(total, 1usize << dim);
            }

            #[test]
            fn subtract_indicator_undefined_iff_empty_mode(
                counts in proptest::collection::vec(0usize..3, 1..6),
                mask in any::<u8>(),
            ) {
                let v = OccupationVector::new(counts.clone());
                let dim = counts.len();
                let alpha = SubsetIndex::new((0..dim).filter(|s| mask >> s & 1 == 1).collect(), dim).unwrap();
                let undefined = alpha.indices().iter().any(|&s| counts[s] == 0);
                prop_assert_eq!(subtract_indicator(&v, &alpha).is_none(), undefined);
            }

            #[test]
            fn bounded_subvector_count(counts in proptest::collection::vec(0usize..3, 0..7)) {
                let v = OccupationVector::new(counts.clone());
                let expected: usize = counts.iter().map(|&c| c.min(1) + 1).product();
                let subs = bounded_subvectors(&v);
                prop_assert_eq!(subs.len(), expected);
                prop_assert!(subs.iter().all(|j| j.is_binary() && j.is_dominated_by(&v)));
            }
        }
    }
}
