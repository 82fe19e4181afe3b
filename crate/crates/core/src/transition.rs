//! Bosonic, fermionic and classical transition probabilities between Fock
//! patterns.
//!
//! For an interferometer `U` with input pattern `i` and output pattern `n`:
//!
//! * bosons:     `|per(U_{n,i})|^2 / (n! i!)`
//! * fermions:   `|det(U_{n,i})|^2` (zero unless both patterns are 0/1)
//! * classical:  `per(M_{n,i}) / n!` with `M_kl = |U_kl|^2`
//!
//! All three vanish unless `|i| = |n|`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::combinat::{enumerate_occupations_capped, occupation_count, OccupationVector, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::matrix::{classical_matrix, submatrix_by_occupation, ComplexMatrix, UnitaryMatrix};
use crate::parallel;
use crate::permdet::{determinant, permanent};

/// Slack allowed around `[0, 1]` before a probability is reported as anomalous.
pub const DISPLAY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
    Classical,
}

impl Statistics {
    pub const ALL: [Statistics; 3] = [Statistics::Boson, Statistics::Fermion, Statistics::Classical];

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
            Statistics::Classical => "classical",
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boson" | "bosons" | "b" => Ok(Statistics::Boson),
            "fermion" | "fermions" | "f" => Ok(Statistics::Fermion),
            "classical" | "c" => Ok(Statistics::Classical),
            _ => Err(Error::InvalidInput(format!("unknown statistics `{s}`"))),
        }
    }
}

/// Input and output patterns of equal dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternPair {
    pub input: OccupationVector,
    pub output: OccupationVector,
}

impl PatternPair {
    pub fn new(input: OccupationVector, output: OccupationVector) -> Result<Self> {
        if input.dim() != output.dim() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} modes, output has {}",
                input.dim(),
                output.dim()
            )));
        }
        Ok(Self { input, output })
    }

    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    pub fn conserves_particles(&self) -> bool {
        self.input.total() == self.output.total()
    }
}

/// `(B, F, C)` for one pattern pair. Raw values; see [`clamp_for_display`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionTriple {
    pub boson: f64,
    pub fermion: f64,
    pub classical: f64,
}

impl TransitionTriple {
    /// `B + F`
    pub fn sum(&self) -> f64 {
        self.boson + self.fermion
    }

    /// `B - F`
    pub fn difference(&self) -> f64 {
        self.boson - self.fermion
    }

    pub fn get(&self, stats: Statistics) -> f64 {
        match stats {
            Statistics::Boson => self.boson,
            Statistics::Fermion => self.fermion,
            Statistics::Classical => self.classical,
        }
    }
}

/// Clamps into `[0, 1]` when the value lies within [`DISPLAY_SLACK`] of the
/// interval; otherwise returns it unchanged and flags it as an anomaly.
pub fn clamp_for_display(p: f64) -> (f64, bool) {
    if (0.0..=1.0).contains(&p) {
        (p, false)
    } else if p >= -DISPLAY_SLACK && p <= 1.0 + DISPLAY_SLACK {
        (p.clamp(0.0, 1.0), false)
    } else {
        (p, true)
    }
}

fn check_dims(u: &UnitaryMatrix, p: &PatternPair) -> Result<()> {
    if p.dim() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "patterns have {} modes but the interferometer has {}",
            p.dim(),
            u.dim()
        )));
    }
    Ok(())
}

fn factorial_f64(v: &OccupationVector) -> Result<f64> {
    Ok(v.factorial_product()? as f64)
}

pub fn boson_prob(u: &UnitaryMatrix, p: &PatternPair) -> Result<f64> {
    check_dims(u, p)?;
    if !p.conserves_particles() {
        return Ok(0.0);
    }
    let sub = submatrix_by_occupation(u.matrix(), &p.output, &p.input)?;
    let per = permanent(&sub)?.value;
    Ok(per.norm_sqr() / (factorial_f64(&p.output)? * factorial_f64(&p.input)?))
}

pub fn fermion_prob(u: &UnitaryMatrix, p: &PatternPair) -> Result<f64> {
    check_dims(u, p)?;
    if !p.conserves_particles() || !p.input.is_binary() || !p.output.is_binary() {
        return Ok(0.0);
    }
    let sub = submatrix_by_occupation(u.matrix(), &p.output, &p.input)?;
    Ok(determinant(&sub)?.value.norm_sqr())
}

pub fn classical_prob(u: &UnitaryMatrix, p: &PatternPair) -> Result<f64> {
    check_dims(u, p)?;
    if !p.conserves_particles() {
        return Ok(0.0);
    }
    classical_from_matrix(&classical_matrix(u), p)
}

fn classical_from_matrix(m: &ComplexMatrix, p: &PatternPair) -> Result<f64> {
    let sub = submatrix_by_occupation(m, &p.output, &p.input)?;
    Ok(permanent(&sub)?.value.re / factorial_f64(&p.output)?)
}

pub fn transition_triple(u: &UnitaryMatrix, p: &PatternPair) -> Result<TransitionTriple> {
    Ok(TransitionTriple { boson: boson_prob(u, p)?, fermion: fermion_prob(u, p)?, classical: classical_prob(u, p)? })
}

pub fn probability(u: &UnitaryMatrix, p: &PatternPair, stats: Statistics) -> Result<f64> {
    match stats {
        Statistics::Boson => boson_prob(u, p),
        Statistics::Fermion => fermion_prob(u, p),
        Statistics::Classical => classical_prob(u, p),
    }
}

/// Caps for pattern sweeps: interferometer size, particle number and the
/// number of patterns a single enumeration may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_modes: usize,
    pub max_particles: usize,
    pub max_patterns: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_modes: 10, max_particles: 8, max_patterns: DEFAULT_ENUMERATION_CAP }
    }
}

impl Budget {
    pub fn check(&self, modes: usize, particles: usize) -> Result<()> {
        if modes > self.max_modes {
            return Err(Error::BudgetExceeded(format!("{modes} modes exceed the limit of {}", self.max_modes)));
        }
        if particles > self.max_particles {
            return Err(Error::BudgetExceeded(format!(
                "{particles} particles exceed the limit of {}",
                self.max_particles
            )));
        }
        Ok(())
    }
}

/// Output probabilities for a fixed input, in enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDistribution {
    pub statistics: Statistics,
    pub input: OccupationVector,
    pub entries: Vec<(OccupationVector, f64)>,
}

impl OutputDistribution {
    pub fn get(&self, output: &OccupationVector) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == output).map(|(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        crate::summation::compensated_sum(self.entries.iter().map(|(_, p)| *p))
    }
}

pub fn output_distribution(u: &UnitaryMatrix, input: &OccupationVector, stats: Statistics) -> Result<OutputDistribution> {
    output_distribution_with_budget(u, input, stats, &Budget::default())
}

pub fn output_distribution_with_budget(
    u: &UnitaryMatrix,
    input: &OccupationVector,
    stats: Statistics,
    budget: &Budget,
) -> Result<OutputDistribution> {
    let n = u.dim();
    if input.dim() != n {
        return Err(Error::DimensionMismatch(format!("input has {} modes, interferometer has {n}", input.dim())));
    }
    budget.check(n, input.total())?;
    if stats == Statistics::Fermion && !input.is_binary() {
        return Err(Error::UnsupportedPattern(format!(
            "fermionic input {input} has a mode with more than one particle"
        )));
    }
    let outputs = enumerate_occupations_capped(n, input.total(), budget.max_patterns)?;
    let m = (stats == Statistics::Classical).then(|| classical_matrix(u));
    let probs = parallel::try_map_ordered(&outputs, |out| {
        let pair = PatternPair { input: input.clone(), output: out.clone() };
        match &m {
            Some(m) => classical_from_matrix(m, &pair),
            None => probability(u, &pair, stats),
        }
    })?;
    Ok(OutputDistribution { statistics: stats, input: input.clone(), entries: outputs.into_iter().zip(probs).collect() })
}

/// Supplies transition probabilities to the identity checks, either computed
/// on demand or looked up in a precomputed table.
pub trait ProbabilitySource: Sync {
    fn unitary(&self) -> &UnitaryMatrix;
    fn triple(&self, p: &PatternPair) -> Result<TransitionTriple>;

    fn boson(&self, p: &PatternPair) -> Result<f64> {
        Ok(self.triple(p)?.boson)
    }

    fn fermion(&self, p: &PatternPair) -> Result<f64> {
        Ok(self.triple(p)?.fermion)
    }

    fn classical(&self, p: &PatternPair) -> Result<f64> {
        Ok(self.triple(p)?.classical)
    }
}

/// Computes every probability from scratch.
#[derive(Debug, Clone, Copy)]
pub struct DirectSource<'a>(pub &'a UnitaryMatrix);

impl ProbabilitySource for DirectSource<'_> {
    fn unitary(&self) -> &UnitaryMatrix {
        self.0
    }

    fn triple(&self, p: &PatternPair) -> Result<TransitionTriple> {
        transition_triple(self.0, p)
    }

    fn boson(&self, p: &PatternPair) -> Result<f64> {
        boson_prob(self.0, p)
    }

    fn fermion(&self, p: &PatternPair) -> Result<f64> {
        fermion_prob(self.0, p)
    }

    fn classical(&self, p: &PatternPair) -> Result<f64> {
        classical_prob(self.0, p)
    }
}

/// All triples with `|i| = |n| <= max_particles`, computed once (in parallel)
/// and shared by sweeps that revisit the same sub-patterns many times.
/// Lookups outside the table fall back to direct evaluation.
#[derive(Debug, Clone)]
pub struct TransitionTable<'a> {
    unitary: &'a UnitaryMatrix,
    max_particles: usize,
    table: HashMap<(OccupationVector, OccupationVector), TransitionTriple>,
}

impl<'a> TransitionTable<'a> {
    pub fn build(u: &'a UnitaryMatrix, max_particles: usize, budget: &Budget) -> Result<Self> {
        let n = u.dim();
        budget.check(n, max_particles)?;
        let pairs = conserving_pairs(n, max_particles, budget)?;
        let triples = parallel::try_map_ordered(&pairs, |p| transition_triple(u, p))?;
        let table = pairs.into_iter().zip(triples).map(|(p, t)| ((p.input, p.output), t)).collect();
        Ok(Self { unitary: u, max_particles, table })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn max_particles(&self) -> usize {
        self.max_particles
    }
}

impl ProbabilitySource for TransitionTable<'_> {
    fn unitary(&self) -> &UnitaryMatrix {
        self.unitary
    }

    fn triple(&self, p: &PatternPair) -> Result<TransitionTriple> {
        if !p.conserves_particles() {
            return Ok(TransitionTriple { boson: 0.0, fermion: 0.0, classical: 0.0 });
        }
        match self.table.get(&(p.input.clone(), p.output.clone())) {
            Some(t) => Ok(*t),
            None => transition_triple(self.unitary, p),
        }
    }
}

/// Every `(i, n)` with `|i| = |n| <= max_particles`, ordered by particle number,
/// then input, then output.
pub fn conserving_pairs(dim: usize, max_particles: usize, budget: &Budget) -> Result<Vec<PatternPair>> {
    let total: u128 = (0..=max_particles).map(|t| occupation_count(dim, t).pow(2)).sum();
    if total > budget.max_patterns as u128 {
        return Err(Error::BudgetExceeded(format!(
            "{total} pattern pairs up to {max_particles} particles in {dim} modes exceed the cap {}",
            budget.max_patterns
        )));
    }
    let mut pairs = Vec::with_capacity(total as usize);
    for t in 0..=max_particles {
        let patterns = enumerate_occupations_capped(dim, t, budget.max_patterns)?;
        for i in &patterns {
            for n in &patterns {
                pairs.push(PatternPair { input: i.clone(), output: n.clone() });
            }
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{balanced_beamsplitter, fourier_matrix, haar_random_unitary, permutation_matrix, validate_unitary};

    fn pair(i: &[usize], n: &[usize]) -> PatternPair {
        PatternPair::new(OccupationVector::new(i.to_vec()), OccupationVector::new(n.to_vec())).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hong_ou_mandel() {
        let bs = balanced_beamsplitter();
        let t = transition_triple(&bs, &pair(&[1, 1], &[1, 1])).unwrap();
        assert!(close(t.boson, 0.0, 1e-12));
        assert!(close(t.fermion, 1.0, 1e-12));
        assert!(close(t.classical, 0.5, 1e-12));
    }

    #[test]
    fn fourier3_values() {
        let f = fourier_matrix(3);
        let full = transition_triple(&f, &pair(&[1, 1, 1], &[1, 1, 1])).unwrap();
        assert!(close(full.boson, 1.0 / 3.0, 1e-12));
        assert!(close(full.fermion, 1.0, 1e-12));
        // per of the all-1/3 3x3 matrix: 3! / 27
        assert!(close(full.classical, 2.0 / 9.0, 1e-12));
        assert!(close(fermion_prob(&f, &pair(&[1, 1, 0], &[1, 1, 0])).unwrap(), 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn bunched_input_through_beamsplitter() {
        let bs = balanced_beamsplitter();
        assert!(close(boson_prob(&bs, &pair(&[2, 0], &[1, 1])).unwrap(), 0.5, 1e-12));
        assert_eq!(fermion_prob(&bs, &pair(&[2, 0], &[1, 1])).unwrap(), 0.0);
        let haar = haar_random_unitary(3, 1);
        assert_eq!(fermion_prob(&haar, &pair(&[2, 0, 0], &[1, 1, 0])).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_is_certain() {
        for u in [balanced_beamsplitter(), haar_random_unitary(3, 4)] {
            let zero = vec![0; u.dim()];
            let t = transition_triple(&u, &pair(&zero, &zero)).unwrap();
            assert_eq!((t.boson, t.fermion, t.classical), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn particle_number_conservation() {
        let u = haar_random_unitary(3, 2);
        let t = transition_triple(&u, &pair(&[1, 1, 0], &[1, 0, 0])).unwrap();
        assert_eq!((t.boson, t.fermion, t.classical), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_particle_statistics_agree() {
        for seed in 0..5 {
            let u = haar_random_unitary(4, seed);
            for a in 0..4 {
                for b in 0..4 {
                    let p = PatternPair::new(OccupationVector::single_mode(4, a, 1), OccupationVector::single_mode(4, b, 1))
                        .unwrap();
                    let t = transition_triple(&u, &p).unwrap();
                    let expected = u.matrix()[(b, a)].norm_sqr();
                    assert!(close(t.boson, expected, 1e-12));
                    assert!(close(t.fermion, expected, 1e-12));
                    assert!(close(t.classical, expected, 1e-12));
                }
            }
        }
    }

    #[test]
    fn identity_is_deterministic_routing() {
        let id = validate_unitary(ComplexMatrix::identity(3), 1e-12).unwrap();
        for stats in Statistics::ALL {
            let input = OccupationVector::new(vec![1, 0, 1]);
            let dist = output_distribution(&id, &input, stats).unwrap();
            for (n, p) in &dist.entries {
                assert_eq!(*p, if *n == input { 1.0 } else { 0.0 }, "{stats} {n}");
            }
        }
        for k in 0..3 {
            let p = PatternPair::new(OccupationVector::single_mode(3, k, 1), OccupationVector::single_mode(3, k, 1)).unwrap();
            assert_eq!(classical_prob(&id, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn permutation_routes_patterns() {
        let perm = permutation_matrix(&[2, 0, 1]).unwrap();
        let input = OccupationVector::new(vec![2, 1, 0]);
        let routed = OccupationVector::new(vec![1, 0, 2]);
        for stats in [Statistics::Boson, Statistics::Classical] {
            let dist = output_distribution(&perm, &input, stats).unwrap();
            assert!(close(dist.get(&routed).unwrap(), 1.0, 1e-12));
        }
        let fin = OccupationVector::new(vec![1, 1, 0]);
        let dist = output_distribution(&perm, &fin, Statistics::Fermion).unwrap();
        assert!(close(dist.get(&OccupationVector::new(vec![1, 0, 1])).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn beamsplitter_two_photon_distribution() {
        let dist = output_distribution(&balanced_beamsplitter(), &OccupationVector::new(vec![2, 0]), Statistics::Boson).unwrap();
        let expected = [(vec![2, 0], 0.25), (vec![1, 1], 0.5), (vec![0, 2], 0.25)];
        assert_eq!(dist.entries.len(), 3);
        for ((n, p), (en, ep)) in dist.entries.iter().zip(expected) {
            assert_eq!(n.counts(), en.as_slice());
            assert!(close(*p, ep, 1e-12));
        }
    }

    #[test]
    fn fourier3_fermion_distribution() {
        let dist = output_distribution(&fourier_matrix(3), &OccupationVector::new(vec![1, 1, 1]), Statistics::Fermion).unwrap();
        for (n, p) in &dist.entries {
            let expected = if n.counts() == [1, 1, 1] { 1.0 } else { 0.0 };
            assert!(close(*p, expected, 1e-12));
        }
    }

    #[test]
    fn distribution_errors() {
        let u = haar_random_unitary(3, 0);
        let bunched = OccupationVector::new(vec![2, 0, 0]);
        assert!(matches!(output_distribution(&u, &bunched, Statistics::Fermion), Err(Error::UnsupportedPattern(_))));
        let heavy = OccupationVector::new(vec![9, 0, 0]);
        assert!(matches!(output_distribution(&u, &heavy, Statistics::Boson), Err(Error::BudgetExceeded(_))));
        let wrong_dim = OccupationVector::new(vec![1, 0]);
        assert!(matches!(output_distribution(&u, &wrong_dim, Statistics::Boson), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn normalization_small_sweep() {
        for seed in 0..5 {
            let u = haar_random_unitary(4, seed);
            for input in [vec![1, 1, 0, 1], vec![2, 0, 1, 0], vec![0, 0, 0, 3]] {
                let input = OccupationVector::new(input);
                for stats in Statistics::ALL {
                    if stats == Statistics::Fermion && !input.is_binary() {
                        continue;
                    }
                    let total = output_distribution(&u, &input, stats).unwrap().total();
                    assert!(close(total, 1.0, 1e-9), "{stats} {input}: {total}");
                }
            }
        }
    }

    #[test]
    fn boson_symmetric_under_time_reversal() {
        let u = haar_random_unitary(3, 12);
        let u_dag = validate_unitary(u.matrix().adjoint(), 1e-12).unwrap();
        for (i, n) in [(vec![2, 1, 0], vec![0, 1, 2]), (vec![1, 1, 1], vec![3, 0, 0])] {
            let fwd = boson_prob(&u, &pair(&i, &n)).unwrap();
            let back = boson_prob(&u_dag, &pair(&n, &i)).unwrap();
            assert!(close(fwd, back, 1e-12));
        }
    }

    #[test]
    fn table_matches_direct() {
        let u = haar_random_unitary(3, 8);
        let table = TransitionTable::build(&u, 3, &Budget::default()).unwrap();
        assert_eq!(table.len(), 1 + 9 + 36 + 100);
        let p = pair(&[1, 2, 0], &[0, 1, 2]);
        assert_eq!(table.triple(&p).unwrap(), transition_triple(&u, &p).unwrap());
        // outside the table
        let q = pair(&[4, 0, 0], &[1, 1, 2]);
        assert_eq!(table.triple(&q).unwrap(), transition_triple(&u, &q).unwrap());
    }

    #[test]
    fn display_clamping() {
        assert_eq!(clamp_for_display(0.5), (0.5, false));
        assert_eq!(clamp_for_display(-1e-12), (0.0, false));
        assert_eq!(clamp_for_display(1.0 + 1e-12), (1.0, false));
        assert_eq!(clamp_for_display(1.1), (1.1, true));
    }
}
