//! Numerical checks of the boson-fermion complementarity relations and the
//! permanent-determinant identities they imply for arbitrary matrices.
//!
//! Every check accumulates its signed terms with compensated summation and
//! reports the residual normalized by `sum |term| + 1`. Mode arguments are
//! 0-based.

use num_complex::Complex64;
use serde::Serialize;

use crate::combinat::{bounded_subvectors, enumerate_subsets, subtract_indicator, subvectors, OccupationVector};
use crate::error::{Error, Result};
use crate::matrix::{minor_keep, submatrix_by_occupation, unitary_dilation, ComplexMatrix, SubsetIndex, UnitaryMatrix};
use crate::permdet::{determinant, permanent};
use crate::summation::{ComplexNeumaierSum, NeumaierSum};
use crate::transition::{Budget, DirectSource, PatternPair, ProbabilitySource};

/// Pass threshold on the normalized residual.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Width of the tie region when ordering `B`, `C`, `F`.
pub const DEFAULT_TIE_EPS: f64 = 1e-10;
/// Largest matrix accepted by [`check_corollary1`].
pub const COROLLARY_MAX_DIM: usize = 8;
/// Largest matrix accepted by [`check_muir`].
pub const MUIR_MAX_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity_name: String,
    /// `|raw_residual| / normalizer`
    pub residual: f64,
    pub raw_residual: f64,
    pub term_count: usize,
    /// `sum |term| + 1`
    pub normalizer: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityReport {
    fn from_parts(name: impl Into<String>, raw: f64, abs_sum: f64, term_count: usize) -> Self {
        let normalizer = abs_sum + 1.0;
        let residual = raw.abs() / normalizer;
        Self {
            identity_name: name.into(),
            residual,
            raw_residual: raw,
            term_count,
            normalizer,
            tolerance: DEFAULT_TOLERANCE,
            passed: residual <= DEFAULT_TOLERANCE,
        }
    }

    /// Re-judges the report against another tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.passed = self.residual <= tolerance;
        self
    }
}

/// Signed terms of an identity that should sum to zero.
#[derive(Debug, Default)]
struct Terms {
    sum: NeumaierSum,
    abs: NeumaierSum,
    count: usize,
}

impl Terms {
    fn push(&mut self, term: f64) {
        self.sum.add(term);
        self.abs.add(term.abs());
        self.count += 1;
    }

    fn report(self, name: impl Into<String>) -> IdentityReport {
        IdentityReport::from_parts(name, self.sum.value(), self.abs.value(), self.count.max(1))
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn pair(i: OccupationVector, n: OccupationVector) -> PatternPair {
    PatternPair { input: i, output: n }
}

fn check_pattern(dim: usize, p: &PatternPair, budget: &Budget) -> Result<()> {
    if p.dim() != dim {
        return Err(Error::DimensionMismatch(format!("patterns have {} modes, matrix has {dim}", p.dim())));
    }
    budget.check(dim, p.input.total().max(p.output.total()))
}

/// `sum_m (-1)^m sum_{alpha, beta in R_m} |[U]_{beta,alpha}|^2 B_{n - 1_beta}^(i - 1_alpha) = 0`
/// for `(i, n) != (0, 0)`, and `B_0^(0) = 1` otherwise. Terms with a negative
/// occupation are dropped.
pub fn check_lemma2(u: &UnitaryMatrix, p: &PatternPair) -> Result<IdentityReport> {
    check_lemma2_with(&DirectSource(u), p)
}

pub fn check_lemma2_with<S: ProbabilitySource>(src: &S, p: &PatternPair) -> Result<IdentityReport> {
    let u = src.unitary();
    let n_modes = u.dim();
    check_pattern(n_modes, p, &Budget::default())?;
    let mut terms = Terms::default();
    if p.input.is_vacuum() && p.output.is_vacuum() {
        terms.push(src.boson(p)?);
        terms.push(-1.0);
        return Ok(terms.report("lemma2"));
    }
    for m in 0..=n_modes {
        let subsets = enumerate_subsets(n_modes, m);
        for alpha in &subsets {
            let Some(i_rest) = subtract_indicator(&p.input, alpha) else { continue };
            for beta in &subsets {
                let Some(n_rest) = subtract_indicator(&p.output, beta) else { continue };
                let minor = determinant(&minor_keep(u.matrix(), beta, alpha)?)?.value.norm_sqr();
                terms.push(sign(m) * minor * src.boson(&pair(i_rest.clone(), n_rest))?);
            }
        }
    }
    Ok(terms.report("lemma2"))
}

/// `sum_{j, k} (-1)^{|j|} F_k^(j) B_{n-k}^(i-j) = 0` with `j <= min(i, 1)`,
/// `k <= min(n, 1)` and `|j| = |k|`; for the vacuum pair, `B = F = 1`.
pub fn check_theorem1(u: &UnitaryMatrix, p: &PatternPair) -> Result<IdentityReport> {
    check_theorem1_with(&DirectSource(u), p)
}

pub fn check_theorem1_with<S: ProbabilitySource>(src: &S, p: &PatternPair) -> Result<IdentityReport> {
    check_pattern(src.unitary().dim(), p, &Budget::default())?;
    let mut terms = Terms::default();
    if p.input.is_vacuum() && p.output.is_vacuum() {
        let t = src.triple(p)?;
        terms.push(t.boson - 1.0);
        terms.push(t.fermion - 1.0);
        return Ok(terms.report("theorem1"));
    }
    let ks = bounded_subvectors(&p.output);
    for j in bounded_subvectors(&p.input) {
        let i_rest = p.input.checked_sub(&j).expect("j <= i by construction");
        for k in ks.iter().filter(|k| k.total() == j.total()) {
            let n_rest = p.output.checked_sub(k).expect("k <= n by construction");
            let f = src.fermion(&pair(j.clone(), k.clone()))?;
            let b = src.boson(&pair(i_rest.clone(), n_rest))?;
            terms.push(sign(j.total()) * f * b);
        }
    }
    Ok(terms.report("theorem1"))
}

/// The complementarity sum with the roles of bosons and fermions exchanged,
/// `sum_{j, k} (-1)^{|j|} B_k^(j) F_{n-k}^(i-j)`. It is the reindexed original
/// sum times `(-1)^{|i|}`, so it vanishes whenever the original does.
pub fn theorem1_swapped_sum<S: ProbabilitySource>(src: &S, p: &PatternPair) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    let ks = subvectors(&p.output);
    for j in subvectors(&p.input) {
        let i_rest = p.input.checked_sub(&j).expect("j <= i");
        if !i_rest.is_binary() {
            continue;
        }
        for k in ks.iter().filter(|k| k.total() == j.total()) {
            let n_rest = p.output.checked_sub(k).expect("k <= n");
            if !n_rest.is_binary() {
                continue;
            }
            let b = src.boson(&pair(j.clone(), k.clone()))?;
            let f = src.fermion(&pair(i_rest.clone(), n_rest))?;
            acc.add(sign(j.total()) * b * f);
        }
    }
    Ok(acc.value())
}

/// For any square `A`:
/// `sum_{j, k} (-1)^{|j|} |det A_{k,j}|^2 |per A_{n-k,i-j}|^2 / (k! j! (n-k)! (i-j)!) = 0`.
/// Evaluated over all `j <= i`, `k <= n` directly from the matrix functions.
/// For the vacuum pair the sum is 1 and that is what gets checked.
pub fn check_theorem2(a: &ComplexMatrix, p: &PatternPair) -> Result<IdentityReport> {
    check_theorem2_with_budget(a, p, &Budget::default())
}

pub fn check_theorem2_with_budget(a: &ComplexMatrix, p: &PatternPair, budget: &Budget) -> Result<IdentityReport> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    check_pattern(a.rows(), p, budget)?;
    let mut terms = Terms::default();
    if p.input.is_vacuum() && p.output.is_vacuum() {
        // the lone empty-minor term equals 1 instead of cancelling
        terms.push(1.0);
        terms.push(-1.0);
        return Ok(terms.report("theorem2"));
    }
    let ks = subvectors(&p.output);
    for j in subvectors(&p.input) {
        let i_rest = p.input.checked_sub(&j).expect("j <= i");
        for k in ks.iter().filter(|k| k.total() == j.total()) {
            let n_rest = p.output.checked_sub(k).expect("k <= n");
            let det = determinant(&submatrix_by_occupation(a, k, &j)?)?.value.norm_sqr();
            let per = permanent(&submatrix_by_occupation(a, &n_rest, &i_rest)?)?.value.norm_sqr();
            let denom = (k.factorial_product()? * j.factorial_product()?) as f64
                * (n_rest.factorial_product()? * i_rest.factorial_product()?) as f64;
            terms.push(sign(j.total()) * det * per / denom);
        }
    }
    Ok(terms.report("theorem2"))
}

/// Both routes to the arbitrary-matrix identity for one pattern pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilationCheck {
    pub epsilon: f64,
    pub dilation_size: usize,
    /// Direct evaluation on `A`.
    pub direct: IdentityReport,
    /// Complementarity sum on the dilation `V` with zero-padded patterns.
    pub dilated: IdentityReport,
    /// `dilated` with every term divided by `epsilon^(2|i|)`, i.e. on the scale of `A`.
    pub dilated_rescaled: IdentityReport,
    /// Both routes pass, or both fail.
    pub consistent: bool,
}

/// Embeds `epsilon * A` in a unitary of size `size` (>= 2N), runs the
/// complementarity check on the padded patterns, and compares it with the
/// direct evaluation on `A`.
pub fn check_theorem2_via_dilation(a: &ComplexMatrix, p: &PatternPair, size: usize) -> Result<DilationCheck> {
    let direct = check_theorem2(a, p)?;
    let dilation = unitary_dilation(a, size)?;
    let pad = |v: &OccupationVector| {
        let mut counts = v.counts().to_vec();
        counts.resize(size, 0);
        OccupationVector::new(counts)
    };
    let padded = pair(pad(&p.input), pad(&p.output));
    // budget on particle number only; the padded interferometer may exceed the mode cap
    let budget = Budget { max_modes: usize::MAX, ..Budget::default() };
    budget.check(size, p.input.total())?;
    let dilated = check_theorem1_with(&DirectSource(&dilation.unitary), &padded)?;

    let scale = dilation.epsilon.powi(2 * p.input.total() as i32);
    let mut rescaled = IdentityReport::from_parts(
        "theorem2:dilation-rescaled",
        dilated.raw_residual / scale,
        (dilated.normalizer - 1.0) / scale,
        dilated.term_count,
    );
    rescaled.tolerance = dilated.tolerance;
    let dilated = IdentityReport { identity_name: "theorem2:dilation".into(), ..dilated };
    let consistent = direct.passed == dilated.passed;
    Ok(DilationCheck { epsilon: dilation.epsilon, dilation_size: size, direct, dilated, dilated_rescaled: rescaled, consistent })
}

fn require_square_capped(a: &ComplexMatrix, cap: usize, what: &'static str) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() > cap {
        return Err(Error::SizeLimit { what, size: a.rows(), cap });
    }
    Ok(a.rows())
}

/// `sum_m (-1)^m sum_{alpha, beta in R_m} |[A]_{alpha,beta}|^2 |{A}_{alpha^c,beta^c}|^2 = 0`,
/// where `{.}` is the permanental minor.
pub fn check_corollary1(a: &ComplexMatrix) -> Result<IdentityReport> {
    let n = require_square_capped(a, COROLLARY_MAX_DIM, "corollary check matrix")?;
    let mut terms = Terms::default();
    for m in 0..=n {
        let subsets = enumerate_subsets(n, m);
        let complements: Vec<SubsetIndex> = subsets.iter().map(SubsetIndex::complement).collect();
        for (alpha, alpha_c) in subsets.iter().zip(&complements) {
            for (beta, beta_c) in subsets.iter().zip(&complements) {
                let det = determinant(&minor_keep(a, alpha, beta)?)?.value.norm_sqr();
                let per = permanent(&minor_keep(a, alpha_c, beta_c)?)?.value.norm_sqr();
                terms.push(sign(m) * det * per);
            }
        }
    }
    Ok(terms.report("corollary1"))
}

/// Muir's relation over principal minors,
/// `sum_m (-1)^m sum_{alpha in R_m} [A]_alpha {A}_{alpha^c} = 0`, with a complex residual.
pub fn check_muir(a: &ComplexMatrix) -> Result<IdentityReport> {
    let n = require_square_capped(a, MUIR_MAX_DIM, "Muir check matrix")?;
    let mut sum = ComplexNeumaierSum::new();
    let mut abs = NeumaierSum::new();
    let mut count = 0;
    for m in 0..=n {
        for alpha in enumerate_subsets(n, m) {
            let alpha_c = alpha.complement();
            let det = determinant(&minor_keep(a, &alpha, &alpha)?)?.value;
            let per = permanent(&minor_keep(a, &alpha_c, &alpha_c)?)?.value;
            let term: Complex64 = det * per * sign(m);
            sum.add(term);
            abs.add(term.norm());
            count += 1;
        }
    }
    Ok(IdentityReport::from_parts("muir", sum.value().norm(), abs.value(), count))
}

/// `C_n^(i) = sum_k C_k^(j) C_{n-k}^(i-j)` for a split `j <= i` of the input.
pub fn check_classical_convolution(u: &UnitaryMatrix, p: &PatternPair, j: &OccupationVector) -> Result<IdentityReport> {
    check_classical_convolution_with(&DirectSource(u), p, j)
}

pub fn check_classical_convolution_with<S: ProbabilitySource>(
    src: &S,
    p: &PatternPair,
    j: &OccupationVector,
) -> Result<IdentityReport> {
    check_pattern(src.unitary().dim(), p, &Budget::default())?;
    let Some(i_rest) = (j.dim() == p.input.dim()).then(|| p.input.checked_sub(j)).flatten() else {
        return Err(Error::InvalidInput(format!("split {j} is not below input {}", p.input)));
    };
    let mut terms = Terms::default();
    terms.push(src.classical(p)?);
    for k in subvectors(&p.output).into_iter().filter(|k| k.total() == j.total()) {
        let n_rest = p.output.checked_sub(&k).expect("k <= n");
        let first = src.classical(&pair(j.clone(), k))?;
        let second = src.classical(&pair(i_rest.clone(), n_rest))?;
        terms.push(-first * second);
    }
    Ok(terms.report("classical-convolution"))
}

fn distinct_modes(modes: &[usize], dim: usize) -> Result<OccupationVector> {
    let mut sorted = modes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::UnsupportedPattern(format!("modes {modes:?} are not distinct")));
    }
    Ok(OccupationVector::indicator(&SubsetIndex::new(sorted, dim)?))
}

/// One particle in each of two input modes, detected in two output modes:
/// `B + F - 2C = 0`, and `2C = 2|U_ca|^2 |U_db|^2 + 2|U_cb|^2 |U_da|^2`.
/// Returns the complementarity report followed by the explicit-form report.
pub fn check_two_particle(u: &UnitaryMatrix, in_modes: (usize, usize), out_modes: (usize, usize)) -> Result<Vec<IdentityReport>> {
    check_two_particle_with(&DirectSource(u), in_modes, out_modes)
}

pub fn check_two_particle_with<S: ProbabilitySource>(
    src: &S,
    (a, b): (usize, usize),
    (c, d): (usize, usize),
) -> Result<Vec<IdentityReport>> {
    let u = src.unitary();
    let n = u.dim();
    let p = pair(distinct_modes(&[a, b], n)?, distinct_modes(&[c, d], n)?);
    let t = src.triple(&p)?;

    let mut complementarity = Terms::default();
    complementarity.push(t.boson);
    complementarity.push(t.fermion);
    complementarity.push(-2.0 * t.classical);

    let m = |r: usize, s: usize| u.matrix()[(r, s)].norm_sqr();
    let mut explicit = Terms::default();
    explicit.push(2.0 * m(c, a) * m(d, b));
    explicit.push(2.0 * m(c, b) * m(d, a));
    explicit.push(-2.0 * t.classical);

    Ok(vec![complementarity.report("two-particle"), explicit.report("two-particle:explicit")])
}

/// The two-particle pattern left after removing input mode `i` and output mode `j`.
fn without(modes: &[usize], drop: usize, dim: usize) -> OccupationVector {
    let mut v = OccupationVector::indicator(&SubsetIndex::new(modes.to_vec(), dim).expect("valid modes"));
    let mut counts = v.counts().to_vec();
    counts[drop] = 0;
    v = OccupationVector::new(counts);
    v
}

/// Three particles, one per mode. Returns, in order:
/// the complementarity sum (`three-particle:complementarity`), the difference
/// relation `B - F = sum C^(i)_j (B - F)^(not i)_(not j)` (`three-particle:difference`),
/// and the Laplace expansion `C = sum_i C^(i)_j C^(not i)_(not j)` for each output
/// mode `j` (`three-particle:laplace[j]`, 1-based).
pub fn check_three_particle(u: &UnitaryMatrix, in_modes: [usize; 3], out_modes: [usize; 3]) -> Result<Vec<IdentityReport>> {
    check_three_particle_with(&DirectSource(u), in_modes, out_modes)
}

pub fn check_three_particle_with<S: ProbabilitySource>(
    src: &S,
    in_modes: [usize; 3],
    out_modes: [usize; 3],
) -> Result<Vec<IdentityReport>> {
    let u = src.unitary();
    let n = u.dim();
    if n < 3 {
        return Err(Error::DimensionTooSmall { got: n, need: 3 });
    }
    let full = pair(distinct_modes(&in_modes, n)?, distinct_modes(&out_modes, n)?);
    let t = src.triple(&full)?;
    let single = |i: usize, j: usize| {
        src.triple(&pair(OccupationVector::single_mode(n, i, 1), OccupationVector::single_mode(n, j, 1)))
    };
    let rest = |i: usize, j: usize| src.triple(&pair(without(&in_modes, i, n), without(&out_modes, j, n)));

    let mut complementarity = Terms::default();
    let mut difference = Terms::default();
    complementarity.push(t.boson);
    complementarity.push(-t.fermion);
    difference.push(t.boson);
    difference.push(-t.fermion);
    for &i in &in_modes {
        for &j in &out_modes {
            let one = single(i, j)?;
            let two = rest(i, j)?;
            complementarity.push(-two.boson * one.fermion);
            complementarity.push(one.boson * two.fermion);
            difference.push(-one.classical * two.boson);
            difference.push(one.classical * two.fermion);
        }
    }
    let mut reports =
        vec![complementarity.report("three-particle:complementarity"), difference.report("three-particle:difference")];
    for &j in &out_modes {
        let mut laplace = Terms::default();
        laplace.push(t.classical);
        for &i in &in_modes {
            laplace.push(-single(i, j)?.classical * rest(i, j)?.classical);
        }
        reports.push(laplace.report(format!("three-particle:laplace[{}]", j + 1)));
    }
    Ok(reports)
}

/// Sum (`S = B + F`) and difference (`D = B - F`) relations on the leading
/// `upto` modes, one particle per mode, plus the matrix-dependent forms for one
/// and two particles:
///
/// * `D^(1)_1 = 0` and `S^(1)_1 = 2|U_11|^2`
/// * `S^(12)_12 = sum C^(i)_j C^(not i)_(not j) = 2 C^(12)_12` and `D^(12)_12 = 4 Re[U_11 U_22 U_12^* U_21^*]`
/// * `D^(123)_123 = sum C^(i)_j D^(not i)_(not j)`
/// * `S^(1234)_1234 = sum C^(i)_j S^(not i)_(not j) - sum_{i<j, k<l} B^(not ij)_(not kl) F^(ij)_(kl)`
pub fn check_sum_difference_system(u: &UnitaryMatrix, upto: usize) -> Result<Vec<IdentityReport>> {
    check_sum_difference_system_with(&DirectSource(u), upto)
}

pub fn check_sum_difference_system_with<S: ProbabilitySource>(src: &S, upto: usize) -> Result<Vec<IdentityReport>> {
    if !(1..=4).contains(&upto) {
        return Err(Error::InvalidInput(format!("sum/difference system is defined for 1 to 4 particles, got {upto}")));
    }
    let u = src.unitary();
    let n = u.dim();
    if n < upto {
        return Err(Error::DimensionTooSmall { got: n, need: upto });
    }
    let ind = |modes: &[usize]| OccupationVector::indicator(&SubsetIndex::new(modes.to_vec(), n).expect("valid modes"));
    let triple = |i: &[usize], j: &[usize]| src.triple(&pair(ind(i), ind(j)));
    let m = |r: usize, c: usize| u.matrix()[(r, c)];
    let others = |k: usize, drop: &[usize]| (0..k).filter(|x| !drop.contains(x)).collect::<Vec<_>>();

    let mut reports = Vec::new();

    let t1 = triple(&[0], &[0])?;
    let mut d1 = Terms::default();
    d1.push(t1.boson);
    d1.push(-t1.fermion);
    reports.push(d1.report("sum-difference:D1"));
    let mut s1 = Terms::default();
    s1.push(t1.sum());
    s1.push(-2.0 * m(0, 0).norm_sqr());
    reports.push(s1.report("sum-difference:S1-explicit"));

    if upto >= 2 {
        let t12 = triple(&[0, 1], &[0, 1])?;
        let mut s12 = Terms::default();
        s12.push(t12.sum());
        for i in 0..2 {
            for j in 0..2 {
                let c = triple(&[i], &[j])?.classical;
                let c_rest = triple(&[1 - i], &[1 - j])?.classical;
                s12.push(-c * c_rest);
            }
        }
        reports.push(s12.report("sum-difference:S12"));
        let mut s12c = Terms::default();
        s12c.push(t12.sum());
        s12c.push(-2.0 * t12.classical);
        reports.push(s12c.report("sum-difference:S12=2C"));
        let mut d12 = Terms::default();
        d12.push(t12.difference());
        d12.push(-4.0 * (m(0, 0) * m(1, 1) * m(0, 1).conj() * m(1, 0).conj()).re);
        reports.push(d12.report("sum-difference:D12-explicit"));
    }

    if upto >= 3 {
        let t123 = triple(&[0, 1, 2], &[0, 1, 2])?;
        let mut d123 = Terms::default();
        d123.push(t123.difference());
        for i in 0..3 {
            for j in 0..3 {
                let c = triple(&[i], &[j])?.classical;
                let d = triple(&others(3, &[i]), &others(3, &[j]))?.difference();
                d123.push(-c * d);
            }
        }
        reports.push(d123.report("sum-difference:D123"));
    }

    if upto >= 4 {
        let t1234 = triple(&[0, 1, 2, 3], &[0, 1, 2, 3])?;
        let mut s1234 = Terms::default();
        s1234.push(t1234.sum());
        for i in 0..4 {
            for j in 0..4 {
                let c = triple(&[i], &[j])?.classical;
                let s = triple(&others(4, &[i]), &others(4, &[j]))?.sum();
                s1234.push(-c * s);
            }
        }
        let pairs: Vec<[usize; 2]> = (0..4).flat_map(|a| (a + 1..4).map(move |b| [a, b])).collect();
        for ij in &pairs {
            for kl in &pairs {
                let b = triple(&others(4, ij), &others(4, kl))?.boson;
                let f = triple(ij, kl)?.fermion;
                s1234.push(b * f);
            }
        }
        reports.push(s1234.report("sum-difference:S1234"));
    }
    Ok(reports)
}

/// `n` bosons entering and leaving through the same `mode` behave classically:
/// `B_n^(n) = (|U_mm|^2)^n`. For `n = 2` the split output `(1 in mode, 1 in the
/// next mode)` is also checked against `2 |U_mm|^2 |U_m'm|^2`.
pub fn check_single_mode_bunching(u: &UnitaryMatrix, n: usize, mode: usize) -> Result<Vec<IdentityReport>> {
    check_single_mode_bunching_with(&DirectSource(u), n, mode)
}

pub fn check_single_mode_bunching_with<S: ProbabilitySource>(src: &S, n: usize, mode: usize) -> Result<Vec<IdentityReport>> {
    let u = src.unitary();
    let dim = u.dim();
    if mode >= dim {
        return Err(Error::IndexOutOfRange { index: mode + 1, dim });
    }
    if n == 0 {
        return Err(Error::InvalidInput("single-mode bunching needs at least one particle".into()));
    }
    Budget::default().check(dim, n)?;
    let bunched = OccupationVector::single_mode(dim, mode, n);
    let single = u.matrix()[(mode, mode)].norm_sqr();

    let mut same = Terms::default();
    same.push(src.boson(&pair(bunched.clone(), bunched.clone()))?);
    same.push(-single.powi(n as i32));
    let mut reports = vec![same.report("single-mode-bunching")];

    if n == 2 && dim >= 2 {
        let other = (mode + 1) % dim;
        let mut counts = vec![0; dim];
        counts[mode] = 1;
        counts[other] = 1;
        let mut split = Terms::default();
        split.push(src.boson(&pair(bunched, OccupationVector::new(counts)))?);
        split.push(-2.0 * single * u.matrix()[(other, mode)].norm_sqr());
        reports.push(split.report("single-mode-bunching:multinomial"));
    }
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Naturalness {
    Natural,
    Antinatural,
    Boundary,
}

impl Naturalness {
    pub fn name(self) -> &'static str {
        match self {
            Naturalness::Natural => "Natural",
            Naturalness::Antinatural => "Antinatural",
            Naturalness::Boundary => "Boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalnessLabel {
    pub label: Naturalness,
    /// `B - F`
    pub difference: f64,
}

/// Orders `(B, C, F)` for a two-particle, one-per-mode transition.
pub fn naturalness(boson: f64, classical: f64, fermion: f64, tie_eps: f64) -> Naturalness {
    if boson < classical - tie_eps && classical < fermion - tie_eps {
        Naturalness::Natural
    } else if boson > classical + tie_eps && classical > fermion + tie_eps {
        Naturalness::Antinatural
    } else {
        Naturalness::Boundary
    }
}

/// True for patterns the naturalness labels are defined on.
pub fn is_two_particle_binary(p: &PatternPair) -> bool {
    p.input.total() == 2 && p.output.total() == 2 && p.input.is_binary() && p.output.is_binary()
}

pub fn classify_transition(u: &UnitaryMatrix, p: &PatternPair) -> Result<NaturalnessLabel> {
    classify_transition_with(&DirectSource(u), p, DEFAULT_TIE_EPS)
}

pub fn classify_transition_with<S: ProbabilitySource>(src: &S, p: &PatternPair, tie_eps: f64) -> Result<NaturalnessLabel> {
    if !is_two_particle_binary(p) {
        return Err(Error::UnsupportedPattern(format!(
            "naturalness is defined for two particles in distinct modes, got {} -> {}",
            p.input, p.output
        )));
    }
    let t = src.triple(p)?;
    Ok(NaturalnessLabel { label: naturalness(t.boson, t.classical, t.fermion, tie_eps), difference: t.difference() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{balanced_beamsplitter, fourier_matrix, haar_random_unitary, permutation_matrix};

    fn pp(i: &[usize], n: &[usize]) -> PatternPair {
        PatternPair::new(OccupationVector::new(i.to_vec()), OccupationVector::new(n.to_vec())).unwrap()
    }

    #[test]
    fn lemma2_vacuum_and_hom() {
        let u = haar_random_unitary(3, 0);
        let r = check_lemma2(&u, &pp(&[0, 0, 0], &[0, 0, 0])).unwrap();
        assert!(r.passed && r.raw_residual == 0.0);
        let r = check_lemma2(&balanced_beamsplitter(), &pp(&[1, 1], &[1, 1])).unwrap();
        assert!(r.residual <= 1e-12, "{r:?}");
    }

    #[test]
    fn lemma2_haar_four_modes() {
        let u = haar_random_unitary(4, 5);
        let r = check_lemma2(&u, &pp(&[1, 1, 1, 0], &[0, 1, 1, 1])).unwrap();
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn theorem1_single_particle_two_terms() {
        let u = haar_random_unitary(3, 1);
        let r = check_theorem1(&u, &pp(&[0, 1, 0], &[0, 0, 1])).unwrap();
        assert_eq!(r.term_count, 2);
        assert!(r.raw_residual.abs() <= 1e-15);
    }

    #[test]
    fn theorem1_hom_six_terms() {
        // B^(12)_12 - four single-particle products of 1/4 + F^(12)_12 = 0 - 1 + 1
        let r = check_theorem1(&balanced_beamsplitter(), &pp(&[1, 1], &[1, 1])).unwrap();
        assert_eq!(r.term_count, 6);
        assert!((r.normalizer - 3.0).abs() < 1e-12);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn theorem1_fourier3() {
        let r = check_theorem1(&fourier_matrix(3), &pp(&[1, 1, 1], &[1, 1, 1])).unwrap();
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn theorem1_swap_symmetry() {
        let u = haar_random_unitary(3, 17);
        for (i, n) in [(vec![1, 1, 1], vec![1, 1, 1]), (vec![2, 1, 0], vec![0, 1, 2]), (vec![1, 0, 1], vec![1, 1, 0])] {
            let p = pp(&i, &n);
            let src = DirectSource(&u);
            let original = check_theorem1(&u, &p).unwrap().raw_residual;
            let swapped = theorem1_swapped_sum(&src, &p).unwrap();
            assert!((swapped - sign(p.input.total()) * original).abs() <= 1e-12);
        }
    }

    #[test]
    fn theorem2_zero_and_identity() {
        let r = check_theorem2(&ComplexMatrix::zeros(2, 2), &pp(&[1, 1], &[1, 1])).unwrap();
        assert!(r.passed && r.raw_residual == 0.0);
        let r = check_theorem2(&ComplexMatrix::identity(2), &pp(&[1, 1], &[1, 1])).unwrap();
        // surviving terms: per = 1, -|a11|^2 - |a22|^2, det = 1
        assert_eq!(r.raw_residual, 0.0);
        assert!((r.normalizer - 5.0).abs() < 1e-15);
    }

    #[test]
    fn theorem2_rejects_rectangular() {
        assert!(matches!(check_theorem2(&ComplexMatrix::zeros(2, 3), &pp(&[1, 1], &[1, 1])), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn corollary_and_muir_small() {
        let a = ComplexMatrix::new(1, 1, vec![Complex64::new(0.4, -0.9)]).unwrap();
        assert_eq!(check_corollary1(&a).unwrap().raw_residual, 0.0);
        assert_eq!(check_muir(&a).unwrap().raw_residual, 0.0);
        assert_eq!(check_corollary1(&ComplexMatrix::identity(3)).unwrap().raw_residual, 0.0);
        let b = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let r = check_muir(&b).unwrap();
        assert_eq!(r.term_count, 4);
        assert!(r.residual <= 1e-15);
        assert!(matches!(check_corollary1(&ComplexMatrix::identity(9)), Err(Error::SizeLimit { .. })));
        assert!(matches!(check_muir(&ComplexMatrix::identity(11)), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn classical_convolution_cases() {
        let bs = balanced_beamsplitter();
        let p = pp(&[1, 1], &[1, 1]);
        for j in [vec![0, 0], vec![1, 1], vec![1, 0]] {
            let r = check_classical_convolution(&bs, &p, &OccupationVector::new(j)).unwrap();
            assert!(r.residual <= 1e-15, "{r:?}");
        }
        let u = haar_random_unitary(3, 3);
        let p = pp(&[2, 1, 1], &[0, 3, 1]);
        let r = check_classical_convolution(&u, &p, &OccupationVector::new(vec![1, 1, 0])).unwrap();
        assert!(r.residual <= 1e-12);
        assert!(check_classical_convolution(&u, &p, &OccupationVector::new(vec![0, 2, 0])).is_err());
    }

    #[test]
    fn two_particle_examples() {
        let r = check_two_particle(&balanced_beamsplitter(), (0, 1), (0, 1)).unwrap();
        assert!(r.iter().all(|r| r.residual <= 1e-12));
        let f = fourier_matrix(3);
        let r = check_two_particle(&f, (0, 1), (0, 1)).unwrap();
        assert!(r.iter().all(|r| r.residual <= 1e-12));
        assert!(matches!(check_two_particle(&f, (0, 0), (0, 1)), Err(Error::UnsupportedPattern(_))));
    }

    #[test]
    fn two_particle_residual_is_bunching_minus_antibunching() {
        let u = haar_random_unitary(4, 23);
        let p = pp(&[1, 0, 1, 0], &[0, 1, 1, 0]);
        let t = crate::transition::transition_triple(&u, &p).unwrap();
        let r = &check_two_particle(&u, (0, 2), (1, 2)).unwrap()[0];
        let excess = (t.classical - t.boson) - (t.fermion - t.classical);
        assert!((excess + r.raw_residual).abs() <= 1e-15);
    }

    #[test]
    fn three_particle_fourier_and_permutation() {
        let f = fourier_matrix(3);
        for r in check_three_particle(&f, [0, 1, 2], [0, 1, 2]).unwrap() {
            assert!(r.residual <= 1e-12, "{r:?}");
        }
        let p = permutation_matrix(&[1, 2, 0, 3]).unwrap();
        for r in check_three_particle(&p, [0, 1, 2], [1, 2, 3]).unwrap() {
            assert_eq!(r.raw_residual, 0.0, "{r:?}");
        }
        assert!(check_three_particle(&balanced_beamsplitter(), [0, 1, 0], [0, 1, 0]).is_err());
    }

    #[test]
    fn sum_difference_on_beamsplitter() {
        let reports = check_sum_difference_system(&balanced_beamsplitter(), 2).unwrap();
        let names: Vec<&str> = reports.iter().map(|r| r.identity_name.as_str()).collect();
        assert_eq!(
            names,
            ["sum-difference:D1", "sum-difference:S1-explicit", "sum-difference:S12", "sum-difference:S12=2C", "sum-difference:D12-explicit"]
        );
        assert!(reports.iter().all(|r| r.residual <= 1e-12));
        assert!(matches!(check_sum_difference_system(&balanced_beamsplitter(), 3), Err(Error::DimensionTooSmall { .. })));
        assert!(check_sum_difference_system(&balanced_beamsplitter(), 0).is_err());
    }

    #[test]
    fn single_mode_bunching_examples() {
        let u = haar_random_unitary(3, 6);
        let r = check_single_mode_bunching(&u, 1, 1).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].raw_residual.abs() <= 1e-15);
        let bs = balanced_beamsplitter();
        let r = check_single_mode_bunching(&bs, 2, 0).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|r| r.residual <= 1e-12));
        let r = check_single_mode_bunching(&u, 3, 2).unwrap();
        assert!(r[0].residual <= 1e-10);
        assert!(matches!(check_single_mode_bunching(&u, 9, 0), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn classification_examples() {
        let hom = classify_transition(&balanced_beamsplitter(), &pp(&[1, 1], &[1, 1])).unwrap();
        assert_eq!(hom.label, Naturalness::Natural);
        assert!((hom.difference + 1.0).abs() < 1e-12);
        let f = classify_transition(&fourier_matrix(3), &pp(&[1, 1, 0], &[1, 1, 0])).unwrap();
        assert_eq!(f.label, Naturalness::Natural);
        let p = permutation_matrix(&[0, 1, 2]).unwrap();
        assert_eq!(classify_transition(&p, &pp(&[1, 1, 0], &[1, 1, 0])).unwrap().label, Naturalness::Boundary);
        assert!(matches!(classify_transition(&p, &pp(&[2, 0, 0], &[1, 1, 0])), Err(Error::UnsupportedPattern(_))));
    }

    #[test]
    fn naturalness_depends_only_on_ordering() {
        for (b, c, f) in [(0.1, 0.2, 0.3), (0.3, 0.2, 0.1), (0.2, 0.2, 0.3), (0.0, 0.5, 1.0)] {
            let label = naturalness(b, c, f, 0.0);
            for scale in [1e-3, 0.5, 2.0, 10.0] {
                assert_eq!(naturalness(b * scale, c * scale, f * scale, 0.0), label);
            }
        }
        assert_eq!(naturalness(0.0, 0.5, 1.0, DEFAULT_TIE_EPS), Naturalness::Natural);
        assert_eq!(naturalness(1.0, 0.5, 0.0, DEFAULT_TIE_EPS), Naturalness::Antinatural);
    }

    #[test]
    fn report_normalization() {
        let r = IdentityReport::from_parts("x", -0.5, 3.0, 2);
        assert_eq!(r.normalizer, 4.0);
        assert_eq!(r.residual, 0.125);
        assert!(!r.passed);
        assert!(r.clone().with_tolerance(0.2).passed);
    }
}
