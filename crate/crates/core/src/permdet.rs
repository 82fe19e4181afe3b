//! Permanent and determinant kernels.
//!
//! Both functions follow the same shape conventions: the empty (0x0) matrix
//! evaluates to 1 and a non-square matrix evaluates to 0. The permanent uses
//! Ryser's inclusion-exclusion formula walked in Gray-code order, so every
//! step updates the row sums with a single column in O(n).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::summation::ComplexNeumaierSum;

/// Largest square size accepted by [`permanent`].
pub const DEFAULT_PERMANENT_CAP: usize = 20;
/// Largest square size accepted by [`permanent_naive`].
pub const DEFAULT_NAIVE_CAP: usize = 9;

/// Subsets are split into `2^(n - CHUNK_BITS)` fixed chunks. The split does not
/// depend on the thread count, so sequential and parallel runs agree bitwise.
const CHUNK_BITS: usize = 10;
/// Below this size the parallel kernel just runs sequentially.
const PARALLEL_MIN_SIZE: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixFunctionValue {
    pub value: Complex64,
    /// Set when the result came from a shape convention (empty or non-square).
    pub shape_convention_applied: bool,
}

impl MatrixFunctionValue {
    fn computed(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NumericOverflow("matrix function value"));
        }
        Ok(Self { value, shape_convention_applied: false })
    }

    fn convention(value: f64) -> Self {
        Self { value: Complex64::new(value, 0.0), shape_convention_applied: true }
    }
}

fn shape_convention(a: &ComplexMatrix) -> Option<MatrixFunctionValue> {
    if !a.is_square() {
        Some(MatrixFunctionValue::convention(0.0))
    } else if a.rows() == 0 {
        Some(MatrixFunctionValue::convention(1.0))
    } else {
        None
    }
}

/// Permanent via Gray-code Ryser, `O(2^n n)`, capped at [`DEFAULT_PERMANENT_CAP`].
pub fn permanent(a: &ComplexMatrix) -> Result<MatrixFunctionValue> {
    permanent_with_cap(a, DEFAULT_PERMANENT_CAP)
}

pub fn permanent_with_cap(a: &ComplexMatrix, cap: usize) -> Result<MatrixFunctionValue> {
    if let Some(v) = shape_convention(a) {
        return Ok(v);
    }
    let n = a.rows();
    if n > cap {
        return Err(Error::SizeLimit { what: "permanent", size: n, cap });
    }
    let value = if cfg!(feature = "parallel") && n >= PARALLEL_MIN_SIZE {
        ryser(a, true)
    } else {
        ryser(a, false)
    };
    MatrixFunctionValue::computed(value)
}

/// Single-threaded Ryser regardless of build features.
pub fn permanent_sequential(a: &ComplexMatrix) -> Result<MatrixFunctionValue> {
    if let Some(v) = shape_convention(a) {
        return Ok(v);
    }
    check_cap(a.rows(), DEFAULT_PERMANENT_CAP)?;
    MatrixFunctionValue::computed(ryser(a, false))
}

/// Ryser with the subset chunks fanned out over the rayon pool, whatever the size.
#[cfg(feature = "parallel")]
pub fn permanent_parallel(a: &ComplexMatrix) -> Result<MatrixFunctionValue> {
    if let Some(v) = shape_convention(a) {
        return Ok(v);
    }
    check_cap(a.rows(), DEFAULT_PERMANENT_CAP)?;
    MatrixFunctionValue::computed(ryser(a, true))
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::SizeLimit { what: "permanent", size: n, cap });
    }
    Ok(())
}

fn ryser(a: &ComplexMatrix, parallel: bool) -> Complex64 {
    let n = a.rows();
    if n == 1 {
        return a[(0, 0)];
    }
    let chunk_bits = n.min(CHUNK_BITS);
    let n_chunks = 1usize << (n - chunk_bits);
    let chunk_len = 1usize << chunk_bits;
    let run = |chunk: usize| ryser_chunk(a, chunk * chunk_len, chunk_len);

    let partials: Vec<ComplexNeumaierSum> = if parallel {
        crate::parallel::map_range(n_chunks, run)
    } else {
        (0..n_chunks).map(run).collect()
    };
    let mut total = ComplexNeumaierSum::new();
    for p in &partials {
        total.merge(p);
    }
    let sum = total.value();
    if n % 2 == 1 {
        -sum
    } else {
        sum
    }
}

/// Sums `(-1)^{|S|} prod_i rowsum_i(S)` over Gray-code positions `start..start + len`.
fn ryser_chunk(a: &ComplexMatrix, start: usize, len: usize) -> ComplexNeumaierSum {
    let n = a.rows();
    let mut acc = ComplexNeumaierSum::new();
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];

    let mut gray = start ^ (start >> 1);
    for j in (0..n).filter(|j| gray >> j & 1 == 1) {
        for (i, s) in row_sums.iter_mut().enumerate() {
            *s += a[(i, j)];
        }
    }
    let emit = |gray: usize, row_sums: &[Complex64], acc: &mut ComplexNeumaierSum| {
        if gray == 0 {
            return;
        }
        let prod = row_sums.iter().fold(Complex64::new(1.0, 0.0), |p, s| p * s);
        if gray.count_ones() % 2 == 1 {
            acc.add(-prod);
        } else {
            acc.add(prod);
        }
    };
    emit(gray, &row_sums, &mut acc);

    for k in start + 1..start + len {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        if gray >> j & 1 == 1 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, j)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, j)];
            }
        }
        emit(gray, &row_sums, &mut acc);
    }
    acc
}

/// Brute-force permutation sum. Test oracle only; capped at [`DEFAULT_NAIVE_CAP`].
pub fn permanent_naive(a: &ComplexMatrix) -> Result<MatrixFunctionValue> {
    if let Some(v) = shape_convention(a) {
        return Ok(v);
    }
    let n = a.rows();
    if n > DEFAULT_NAIVE_CAP {
        return Err(Error::SizeLimit { what: "naive permanent", size: n, cap: DEFAULT_NAIVE_CAP });
    }
    let mut used = vec![false; n];
    MatrixFunctionValue::computed(permutation_sum(a, 0, &mut used))
}

fn permutation_sum(a: &ComplexMatrix, row: usize, used: &mut [bool]) -> Complex64 {
    if row == a.rows() {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for col in 0..a.cols() {
        if !used[col] {
            used[col] = true;
            total += a[(row, col)] * permutation_sum(a, row + 1, used);
            used[col] = false;
        }
    }
    total
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant(a: &ComplexMatrix) -> Result<MatrixFunctionValue> {
    if let Some(v) = shape_convention(a) {
        return Ok(v);
    }
    let n = a.rows();
    let mut lu: Vec<Complex64> = a.entries().to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&x, &y| lu[x * n + k].norm().total_cmp(&lu[y * n + k].norm()))
            .expect("non-empty pivot range");
        let pivot = lu[pivot_row * n + k];
        if pivot.norm() == 0.0 {
            return MatrixFunctionValue::computed(Complex64::new(0.0, 0.0));
        }
        if pivot_row != k {
            for c in 0..n {
                lu.swap(k * n + c, pivot_row * n + c);
            }
            det = -det;
        }
        det *= pivot;
        for r in k + 1..n {
            let factor = lu[r * n + k] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in k + 1..n {
                let upper = lu[k * n + c];
                lu[r * n + c] -= factor * upper;
            }
        }
    }
    MatrixFunctionValue::computed(det)
}

/// `|x - y| / max(1, |x|, |y|)`, the comparison metric for kernel outputs.
pub fn relative_error(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / 1f64.max(x.norm()).max(y.norm())
}
