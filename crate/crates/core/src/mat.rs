//! Dense complex matrices and the handful of operations the factorization
//! needs: products, adjoints, permutations, unitarity and distance predicates,
//! and a polar projection for repairing near-unitary input.
//!
//! Storage is row-major `Vec<Complex64>`. The pipeline only ever manipulates
//! square matrices of modest size (the CLI's benchmark tops out in the low
//! thousands), so there is no blocking, no BLAS, and no sparse path — just
//! cache-friendly row accumulation, optionally split over threads.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute/relative tolerance pair used by the predicates in this crate.
///
/// Most checks in the pipeline are absolute (the quantities compared are
/// entries of unitary matrices, all of magnitude ~1); the relative part is
/// kept for vector comparisons where scale matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Tolerance {
    /// Purely absolute tolerance.
    pub fn absolute(tol: f64) -> Self {
        Tolerance {
            absolute: tol,
            relative: 0.0,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            absolute: 1e-10,
            relative: 0.0,
        }
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    /// Diagonal matrix from explicit complex entries.
    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = diag[j];
        }
        m
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

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Extract the main diagonal.
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|j| self[(j, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scaled(&self, s: Complex64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn check_mul(&self, rhs: &CMat) -> Result<()> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        Ok(())
    }

    /// Matrix product, dispatching to the threaded kernel when the `parallel`
    /// feature is enabled and the workload is large enough to amortize it.
    pub fn matmul(&self, rhs: &CMat) -> Result<CMat> {
        self.check_mul(rhs)?;
        #[cfg(feature = "parallel")]
        {
            // Thread spawn/join overhead swamps small products.
            if self.rows * self.cols * rhs.cols >= 64 * 64 * 64 {
                return Ok(self.matmul_par_impl(rhs));
            }
        }
        Ok(self.matmul_seq_impl(rhs))
    }

    /// Sequential matrix product; always available for baseline comparisons.
    pub fn matmul_seq(&self, rhs: &CMat) -> Result<CMat> {
        self.check_mul(rhs)?;
        Ok(self.matmul_seq_impl(rhs))
    }

    fn mul_row_into(&self, rhs: &CMat, r: usize, out: &mut [Complex64]) {
        // out = sum_k self[r,k] * rhs.row(k); row-major axpy keeps this
        // sequentially cache-friendly in both operands.
        for k in 0..self.cols {
            let a = self[(r, k)];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let rrow = rhs.row(k);
            for (o, b) in out.iter_mut().zip(rrow) {
                *o += a * b;
            }
        }
    }

    fn matmul_seq_impl(&self, rhs: &CMat) -> CMat {
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            self.mul_row_into(rhs, r, row);
        }
        out
    }

    #[cfg(feature = "parallel")]
    fn matmul_par_impl(&self, rhs: &CMat) -> CMat {
        use rayon::prelude::*;
        let cols = rhs.cols;
        let mut out = CMat::zeros(self.rows, cols);
        out.data
            .par_chunks_mut(cols)
            .enumerate()
            .for_each(|(r, row)| self.mul_row_into(rhs, r, row));
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, x) in self.row(r).iter().zip(v) {
                acc += a * x;
            }
            out[r] = acc;
        }
        Ok(out)
    }

    /// Gather rows and columns by index maps: `out[r][c] = self[rmap[r]][cmap[c]]`.
    ///
    /// With `rmap = cmap = sigma` this computes the conjugation Q\u{2020}·self·Q of
    /// the permutation matrix Q with Q[sigma(i), i] = 1.
    pub fn permute_rows_cols(&self, rmap: &[usize], cmap: &[usize]) -> Result<CMat> {
        if rmap.len() != self.rows || cmap.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                got: rmap.len(),
            });
        }
        Ok(CMat::from_fn(self.rows, self.cols, |r, c| {
            self[(rmap[r], cmap[c])]
        }))
    }

    /// max_jk |self - rhs| entrywise.
    pub fn max_abs_diff(&self, rhs: &CMat) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm of M\u{2020}M − I; 0 for an exactly unitary matrix.
    pub fn unitarity_defect(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let gram = self.dagger().matmul(self)?;
        Ok(gram.max_abs_diff(&CMat::identity(self.rows)))
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Free-function spelling of the matrix product.
pub fn matmul(a: &CMat, b: &CMat) -> Result<CMat> {
    a.matmul(b)
}

/// Free-function spelling of the matrix-vector product.
pub fn matvec(a: &CMat, v: &[Complex64]) -> Result<Vec<Complex64>> {
    a.matvec(v)
}

/// Free-function spelling of the conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.dagger()
}

/// √Σ|a_jk − b_jk|² over all entries.
pub fn frobenius_distance(a: &CMat, b: &CMat) -> Result<f64> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::ShapeMismatch {
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let sum: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok(sum.sqrt())
}

/// True iff max-norm of M\u{2020}M − I is within `tol.absolute`.
pub fn is_unitary(m: &CMat, tol: &Tolerance) -> Result<bool> {
    Ok(m.unitarity_defect()? <= tol.absolute)
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inverse of a permutation given as an index map: `inv[map[i]] = i`.
pub fn invert_permutation(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; map.len()];
    for (i, &m) in map.iter().enumerate() {
        inv[m] = i;
    }
    inv
}

/// Inverse via LU with partial pivoting. Only used by the polar projection;
/// inputs there are invertible by construction (near-unitary matrices).
fn lu_inverse(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut a = m.clone();
    // Augment with the identity and run Gauss-Jordan.
    let mut inv = CMat::identity(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[(i, col)]
                    .norm()
                    .partial_cmp(&a[(j, col)].norm())
                    .unwrap()
            })
            .unwrap();
        let pivot = a[(pivot_row, col)];
        if pivot.norm() < 1e-300 {
            return Err(Error::InvalidArgument(
                "matrix is singular; cannot invert".into(),
            ));
        }
        if pivot_row != col {
            for k in 0..n {
                let (x, y) = (a[(col, k)], a[(pivot_row, k)]);
                a[(col, k)] = y;
                a[(pivot_row, k)] = x;
                let (x, y) = (inv[(col, k)], inv[(pivot_row, k)]);
                inv[(col, k)] = y;
                inv[(pivot_row, k)] = x;
            }
        }
        let scale = Complex64::new(1.0, 0.0) / pivot;
        for k in 0..n {
            a[(col, k)] *= scale;
            inv[(col, k)] *= scale;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for k in 0..n {
                let acol = a[(col, k)];
                let icol = inv[(col, k)];
                a[(r, k)] -= f * acol;
                inv[(r, k)] -= f * icol;
            }
        }
    }
    Ok(inv)
}

/// Unitary factor of the polar decomposition M = W·P (W unitary, P ≥ 0),
/// i.e. the unitary matrix nearest to M in Frobenius norm.
///
/// Newton iteration X ← (X + X^{-\u{2020}})/2, globally quadratically convergent
/// for nonsingular input. Used by the CLI's opt-in projection of
/// almost-unitary matrices; exactly singular input is rejected.
pub fn polar_unitary_factor(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let mut x = m.clone();
    for _ in 0..100 {
        let xinv_dag = lu_inverse(&x)?.dagger();
        let mut next = CMat::zeros(x.rows, x.cols);
        for (o, (a, b)) in next
            .data
            .iter_mut()
            .zip(x.data.iter().zip(&xinv_dag.data))
        {
            *o = (a + b) * 0.5;
        }
        let delta = next.max_abs_diff(&x);
        x = next;
        if delta < 1e-14 {
            break;
        }
    }
    let defect = x.unitarity_defect()?;
    if defect > 1e-10 {
        return Err(Error::VerificationFailed {
            residual: defect,
            tol: 1e-10,
        });
    }
    Ok(x)
}
