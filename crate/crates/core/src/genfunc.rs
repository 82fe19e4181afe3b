//! Generating function of the bosonic transition probabilities,
//!
//! ```text
//! g(x, z) = sum_{i, n} x^i z^n B_n^(i),   x, z in [0, 1)^N
//! ```
//!
//! evaluated three independent ways: the closed form `1 / det(I - U^dag Z U X)`,
//! the expansion of that determinant over pairs of equal-size minors, and the
//! truncated power series itself.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::combinat::{enumerate_occupations_capped, enumerate_subsets, occupation_count, OccupationVector};
use crate::error::{Error, Result};
use crate::matrix::{minor_keep, ComplexMatrix, UnitaryMatrix};
use crate::parallel;
use crate::permdet::determinant;
use crate::summation::NeumaierSum;
use crate::transition::Budget;

/// Below this, `det(I - U^dag Z U X)` is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-14;

/// Input duals `x` and output duals `z`, one per mode, each in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVariables {
    x: Vec<f64>,
    z: Vec<f64>,
}

impl DualVariables {
    pub fn new(x: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch(format!("{} input duals but {} output duals", x.len(), z.len())));
        }
        if let Some(bad) = x.iter().chain(&z).find(|v| !(0.0..1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("dual variable {bad} is outside [0, 1)")));
        }
        Ok(Self { x, z })
    }

    /// Every component of `x` and `z` set to `value`.
    pub fn uniform(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim], vec![value; dim])
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

fn check_dim(u: &UnitaryMatrix, d: &DualVariables) -> Result<()> {
    if u.dim() != d.dim() {
        return Err(Error::DimensionMismatch(format!("{} duals for {} modes", d.dim(), u.dim())));
    }
    Ok(())
}

fn reciprocal(denominator: f64) -> Result<f64> {
    if denominator.abs() < SINGULAR_THRESHOLD {
        return Err(Error::SingularDenominator(denominator.abs()));
    }
    Ok(1.0 / denominator)
}

/// `1 / det(I - U^dag Z U X)`.
pub fn gf_closed_form(u: &UnitaryMatrix, d: &DualVariables) -> Result<f64> {
    check_dim(u, d)?;
    let n = u.dim();
    let m = u.matrix();
    let zu = ComplexMatrix::from_fn(n, n, |r, c| m[(r, c)] * d.z[r]);
    let mut k = m.adjoint().matmul(&zu)?;
    for r in 0..n {
        for c in 0..n {
            let scaled = -k[(r, c)] * d.x[c];
            k[(r, c)] = if r == c { Complex64::new(1.0, 0.0) + scaled } else { scaled };
        }
    }
    // the determinant is real: it equals det(I - X^1/2 U^dag Z U X^1/2)
    reciprocal(determinant(&k)?.value.re)
}

/// Reciprocal of `sum_m (-1)^m sum_{|alpha|=|beta|=m} [Z]_beta |[U]_{beta,alpha}|^2 [X]_alpha`.
pub fn gf_minor_expansion(u: &UnitaryMatrix, d: &DualVariables) -> Result<f64> {
    check_dim(u, d)?;
    let n = u.dim();
    let levels: Vec<usize> = (0..=n).collect();
    let partials = parallel::try_map_ordered(&levels, |&m| minor_level(u.matrix(), d, m))?;
    let mut total = NeumaierSum::new();
    for (m, partial) in partials.iter().enumerate() {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        total.add(sign * partial);
    }
    reciprocal(total.value())
}

fn minor_level(u: &ComplexMatrix, d: &DualVariables, m: usize) -> Result<f64> {
    let subsets = enumerate_subsets(u.rows(), m);
    let weight = |duals: &[f64], s: &crate::matrix::SubsetIndex| s.indices().iter().map(|&i| duals[i]).product::<f64>();
    let mut acc = NeumaierSum::new();
    for alpha in &subsets {
        let xa = weight(&d.x, alpha);
        if xa == 0.0 {
            continue;
        }
        for beta in &subsets {
            let zb = weight(&d.z, beta);
            if zb == 0.0 {
                continue;
            }
            let minor = determinant(&minor_keep(u, beta, alpha)?)?.value;
            acc.add(zb * minor.norm_sqr() * xa);
        }
    }
    Ok(acc.value())
}

/// Partial sum of the series together with an upper estimate of the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// `sum_{|i| = |n| <= cutoff} B_n^(i) x^i z^n`.
///
/// Probabilities come from expanding `prod_s (sum_r U_rs y_r)^{i_s}`, which
/// yields every output amplitude of a given input at once, so no permanent
/// size cap applies. The number of input patterns is limited by
/// `budget.max_patterns`.
pub fn gf_truncated_series(u: &UnitaryMatrix, d: &DualVariables, cutoff: usize) -> Result<SeriesValue> {
    gf_truncated_series_with_budget(u, d, cutoff, &Budget::default())
}

pub fn gf_truncated_series_with_budget(
    u: &UnitaryMatrix,
    d: &DualVariables,
    cutoff: usize,
    budget: &Budget,
) -> Result<SeriesValue> {
    check_dim(u, d)?;
    let n = u.dim();
    let pairs: u128 = (0..=cutoff).map(|t| occupation_count(n, t).pow(2)).sum();
    if pairs > budget.max_patterns as u128 {
        return Err(Error::BudgetExceeded(format!(
            "series to order {cutoff} in {n} modes needs {pairs} pattern pairs, cap is {}",
            budget.max_patterns
        )));
    }
    let mut total = NeumaierSum::new();
    for t in 0..=cutoff {
        let inputs = enumerate_occupations_capped(n, t, budget.max_patterns)?;
        let level = parallel::map_ordered(&inputs, |input| {
            let xi = monomial(&d.x, input);
            if xi == 0.0 {
                return 0.0;
            }
            let amplitudes = fock_amplitudes(u.matrix(), input);
            let mut acc = NeumaierSum::new();
            for (output, amp) in &amplitudes {
                let zn = monomial(&d.z, output);
                if zn != 0.0 {
                    acc.add(amp.norm_sqr() * zn);
                }
            }
            xi * acc.value()
        });
        for v in level {
            total.add(v);
        }
    }
    Ok(SeriesValue { value: total.value(), tail_bound: series_tail_bound(d, cutoff) })
}

fn monomial(duals: &[f64], pattern: &OccupationVector) -> f64 {
    duals.iter().zip(pattern.counts()).map(|(v, &k)| v.powi(k as i32)).product()
}

/// Bound on the neglected terms: each input of `t` particles contributes at most
/// `(max x * max z)^t` since its output probabilities sum to one, and there are
/// `C(t + N - 1, N - 1)` such inputs. Summed until the terms are negligible.
fn series_tail_bound(d: &DualVariables, cutoff: usize) -> f64 {
    let xmax = d.x.iter().copied().fold(0.0, f64::max);
    let zmax = d.z.iter().copied().fold(0.0, f64::max);
    let ratio = xmax * zmax;
    if ratio == 0.0 {
        return 0.0;
    }
    let n = d.dim();
    let mut tail = 0.0;
    for t in cutoff + 1..cutoff + 100_000 {
        let term = occupation_count(n, t) as f64 * ratio.powi(t as i32);
        tail += term;
        if term < 1e-18 * tail || term < f64::MIN_POSITIVE {
            break;
        }
    }
    tail
}

/// Transition amplitudes `<n| U |i>` for every output `n` with `|n| = |i|`,
/// read off as `sqrt(n!/i!)` times the coefficient of `y^n` in
/// `prod_s (sum_r U_rs y_r)^{i_s}`. Outputs absent from the map have zero amplitude.
pub fn fock_amplitudes(u: &ComplexMatrix, input: &OccupationVector) -> BTreeMap<OccupationVector, Complex64> {
    let n = u.rows();
    let mut poly: BTreeMap<Vec<usize>, Complex64> = BTreeMap::from([(vec![0; n], Complex64::new(1.0, 0.0))]);
    for col in input.expanded_modes() {
        let mut next: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        for (exponents, coeff) in &poly {
            for r in 0..n {
                let factor = u[(r, col)];
                if factor.norm_sqr() == 0.0 {
                    continue;
                }
                let mut e = exponents.clone();
                e[r] += 1;
                *next.entry(e).or_default() += coeff * factor;
            }
        }
        poly = next;
    }
    let input_fact = factorial_f64(input.counts());
    poly.into_iter()
        .map(|(e, coeff)| {
            let scale = (factorial_f64(&e) / input_fact).sqrt();
            (OccupationVector::new(e), coeff * scale)
        })
        .collect()
}

fn factorial_f64(counts: &[usize]) -> f64 {
    counts.iter().map(|&c| (1..=c).map(|k| k as f64).product::<f64>()).product()
}
