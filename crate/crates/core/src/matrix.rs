//! Dense complex matrices, unitarity checks, the canonical interferometers
//! and the submatrix selectors used by the probability formulas.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::combinat::OccupationVector;
use crate::error::{Error, Result};

/// Default tolerance on `max |U^dagger U - I|` for accepting a matrix as unitary.
pub const DEFAULT_UNITARY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix. Zero-sized shapes are allowed; they show
/// up as empty minors and as occupation submatrices of the vacuum.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { rows, cols, data: entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(n_rows, n_cols, rows.concat())
    }

    /// Convenience constructor for real-valued matrices.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Copies `block` into `self` with its top-left corner at `(row, col)`.
    fn set_block(&mut self, row: usize, col: usize, block: &ComplexMatrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self[(row + r, col + c)] = block[(r, c)];
            }
        }
    }

    /// Copies the `rows x cols` block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| self[(row + r, col + c)])
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// On-disk matrix representation: `{"rows": R, "cols": C, "entries": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixFile { rows: m.rows, cols: m.cols, entries: m.data.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.rows == 0 || file.cols == 0 {
            return Err(Error::InvalidInput("matrix file must have positive rows and cols".into()));
        }
        let entries = file.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::new(file.rows, file.cols, entries)
    }
}

impl ComplexMatrix {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("matrix JSON: {e}")))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixFile::from(self)).expect("matrix serialization cannot fail")
    }
}

/// A square matrix that passed the unitarity gate, with the residual recorded.
#[derive(Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
    unitarity_residual: f64,
}

impl UnitaryMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.unitarity_residual
    }

    /// Number of modes.
    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.matrix
    }
}

impl AsRef<ComplexMatrix> for UnitaryMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitaryMatrix(residual={:e}) {:?}", self.unitarity_residual, self.matrix)
    }
}

/// `max |M^dagger M - I|` over all entries.
pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    let n = m.cols;
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let mut acc = ZERO;
            for r in 0..m.rows {
                acc += m[(r, a)].conj() * m[(r, b)];
            }
            if a == b {
                acc -= ONE;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

pub fn validate_unitary(m: ComplexMatrix, tol: f64) -> Result<UnitaryMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("unitarity tolerance must be positive, got {tol}")));
    }
    let residual = unitarity_residual(&m);
    if residual > tol {
        return Err(Error::NotUnitary { residual, tol });
    }
    Ok(UnitaryMatrix { matrix: m, unitarity_residual: residual })
}

/// Fourier interferometer `U_kl = exp(-2 pi i k l / n) / sqrt(n)` with 1-based `k, l`.
pub fn fourier_matrix(n: usize) -> UnitaryMatrix {
    assert!(n >= 1, "Fourier matrix needs at least one mode");
    let norm = 1.0 / (n as f64).sqrt();
    let m = ComplexMatrix::from_fn(n, n, |r, c| {
        // reduce k*l mod n before scaling the angle
        let phase = ((r + 1) * (c + 1)) % n;
        Complex64::from_polar(norm, -2.0 * PI * phase as f64 / n as f64)
    });
    validate_unitary(m, 1e-14).expect("Fourier matrix is unitary")
}

/// The balanced two-mode coupler `(1/sqrt 2) [[1, 1], [1, -1]]`.
pub fn balanced_beamsplitter() -> UnitaryMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = ComplexMatrix::from_real_rows(&[vec![h, h], vec![h, -h]]).unwrap();
    validate_unitary(m, DEFAULT_UNITARY_TOL).expect("beamsplitter is unitary")
}

/// Permutation interferometer sending input mode `l` to output mode `targets[l]`
/// (both 0-based), i.e. `U[targets[l], l] = 1`.
pub fn permutation_matrix(targets: &[usize]) -> Result<UnitaryMatrix> {
    let n = targets.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty permutation".into()));
    }
    let mut seen = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(Error::IndexOutOfRange { index: t + 1, dim: n });
        }
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::InvalidInput(format!("mode {} appears twice in permutation", t + 1)));
        }
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (l, &t) in targets.iter().enumerate() {
        m[(t, l)] = ONE;
    }
    validate_unitary(m, DEFAULT_UNITARY_TOL)
}

/// Haar-distributed unitary: Ginibre matrix, Gram-Schmidt orthonormalized so the
/// triangular factor has a real positive diagonal. Deterministic per `(n, seed)`.
pub fn haar_random_unitary(n: usize, seed: u64) -> UnitaryMatrix {
    assert!(n >= 1, "Haar unitary needs at least one mode");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let ginibre = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    });
    let q = orthonormalize_columns(&ginibre);
    validate_unitary(q, DEFAULT_UNITARY_TOL).expect("Gram-Schmidt output is unitary")
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Column `j` of the
/// result is the normalized component of column `j` orthogonal to the earlier
/// ones, so the implied R factor has a positive real diagonal.
fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows, m.cols);
    let mut columns: Vec<Vec<Complex64>> = (0..cols).map(|c| (0..rows).map(|r| m[(r, c)]).collect()).collect();
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = columns.split_at_mut(j);
                let q = &done[k];
                let v = &mut rest[0];
                let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = columns[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "rank-deficient Ginibre sample");
        for z in &mut columns[j] {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(rows, cols, |r, c| columns[c][r])
}

/// Matrix with entries drawn uniformly from the closed complex unit disk.
pub fn random_unit_disk_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, n, |_, _| {
        let r = rng.random::<f64>().sqrt();
        Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
    })
}

/// Entrywise squared moduli `M_kl = |U_kl|^2`, the doubly stochastic matrix
/// governing distinguishable particles.
pub fn classical_matrix(u: &UnitaryMatrix) -> ComplexMatrix {
    let m = u.matrix();
    ComplexMatrix::from_fn(m.rows, m.cols, |r, c| Complex64::new(m[(r, c)].norm_sqr(), 0.0))
}

/// Builds `A_{n,i}`: row `s` of `a` repeated `n_s` times, column `t` repeated
/// `i_t` times, in mode order. The result is `|n| x |i|` and may be non-square.
pub fn submatrix_by_occupation(
    a: &ComplexMatrix,
    rows: &OccupationVector,
    cols: &OccupationVector,
) -> Result<ComplexMatrix> {
    if rows.dim() != a.rows || cols.dim() != a.cols {
        return Err(Error::DimensionMismatch(format!(
            "occupations of length {} and {} for a {}x{} matrix",
            rows.dim(),
            cols.dim(),
            a.rows,
            a.cols
        )));
    }
    let row_idx = rows.expanded_modes();
    let col_idx = cols.expanded_modes();
    Ok(ComplexMatrix::from_fn(row_idx.len(), col_idx.len(), |r, c| a[(row_idx[r], col_idx[c])]))
}

/// Strictly increasing set of 0-based mode indices drawn from `0..dim`.
/// Displayed 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    indices: Vec<usize>,
    dim: usize,
}

impl SubsetIndex {
    pub fn new(mut indices: Vec<usize>, dim: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index: bad + 1, dim });
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("subset indices must be unique".into()));
        }
        Ok(Self { indices, dim })
    }

    /// Builds a subset from 1-based mode labels.
    pub fn from_one_based(labels: &[usize], dim: usize) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::IndexOutOfRange { index: 0, dim });
        }
        Self::new(labels.iter().map(|l| l - 1).collect(), dim)
    }

    pub fn empty(dim: usize) -> Self {
        Self { indices: Vec::new(), dim }
    }

    pub fn full(dim: usize) -> Self {
        Self { indices: (0..dim).collect(), dim }
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>, dim: usize) -> Self {
        Self { indices, dim }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> Self {
        Self { indices: (0..self.dim).filter(|&i| !self.contains(i)).collect(), dim: self.dim }
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// Submatrix keeping exactly the listed rows and columns.
pub fn minor_keep(a: &ComplexMatrix, rows: &SubsetIndex, cols: &SubsetIndex) -> Result<ComplexMatrix> {
    if let Some(&r) = rows.indices.iter().find(|&&r| r >= a.rows) {
        return Err(Error::IndexOutOfRange { index: r + 1, dim: a.rows });
    }
    if let Some(&c) = cols.indices.iter().find(|&&c| c >= a.cols) {
        return Err(Error::IndexOutOfRange { index: c + 1, dim: a.cols });
    }
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| a[(rows.indices[r], cols.indices[c])]))
}

/// Unitary `V` of size `L x L` holding `epsilon * A` in its top-left block.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub unitary: UnitaryMatrix,
    pub epsilon: f64,
}

/// Contraction scale used by [`unitary_dilation`]: `1 / (2 ||A||_F + 1)`.
/// Since `||A||_2 <= ||A||_F` this is a strict contraction, and it stays finite for `A = 0`.
pub fn dilation_epsilon(a: &ComplexMatrix) -> f64 {
    1.0 / (2.0 * a.frobenius_norm() + 1.0)
}

/// Embeds `epsilon * A` into an `L x L` unitary via
///
/// ```text
/// [ eps A                     (I - eps^2 A A^dagger)^{1/2} ]
/// [ (I - eps^2 A^dagger A)^{1/2}          -eps A^dagger     ]
/// ```
///
/// padded with the identity up to size `L >= 2N`.
pub fn unitary_dilation(a: &ComplexMatrix, size: usize) -> Result<Dilation> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    if size < 2 * n || size == 0 {
        return Err(Error::DimensionTooSmall { got: size, need: (2 * n).max(1) });
    }
    let epsilon = dilation_epsilon(a);
    let t = a.scale(Complex64::new(epsilon, 0.0));
    let t_adj = t.adjoint();
    let identity = ComplexMatrix::identity(n);
    let left_defect = hermitian_sqrt(&sub(&identity, &t.matmul(&t_adj)?));
    let right_defect = hermitian_sqrt(&sub(&identity, &t_adj.matmul(&t)?));

    let mut v = ComplexMatrix::identity(size);
    v.set_block(0, 0, &t);
    v.set_block(0, n, &left_defect);
    v.set_block(n, 0, &right_defect);
    v.set_block(n, n, &t_adj.scale(Complex64::new(-1.0, 0.0)));
    let unitary = validate_unitary(v, DEFAULT_UNITARY_TOL)?;
    Ok(Dilation { unitary, epsilon })
}

fn sub(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows, a.cols, |r, c| a[(r, c)] - b[(r, c)])
}

/// Principal square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues that round slightly negative are clamped to zero.
fn hermitian_sqrt(h: &ComplexMatrix) -> ComplexMatrix {
    let n = h.rows;
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    // symmetrize away rounding so the eigensolver sees an exactly Hermitian input
    let sym = ComplexMatrix::from_fn(n, n, |r, c| (h[(r, c)] + h[(c, r)].conj()) * 0.5);
    let eig = SymmetricEigen::new(sym.to_nalgebra());
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let w = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(n, n, |r, c| w[(r, c)] * roots[c]);
    ComplexMatrix::from_nalgebra(&(scaled * w.adjoint()))
}
