//! Dense small-scale linear algebra.
//!
//! Row-major matrices with the handful of factorizations the rest of the
//! crate needs: LU with partial pivoting, Cholesky, a cyclic Jacobi
//! symmetric eigensolver, and a spectral-abscissa estimate for general
//! (nonsymmetric) matrices. Everything targets matrices of order ~50 or
//! less; no attempt is made at cache blocking or sparsity.

use crate::scalar::{cast, Real};
use crate::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Build from a row-major slice of `rows * cols` entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[T]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Matrix {
            rows,
            cols,
            data: entries.to_vec(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i];
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

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T x` without forming the transpose.
    pub fn tr_matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.rows, x.len(), "tr_matvec dimension mismatch");
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for j in 0..self.cols {
                out[j] += self[(i, j)] * xi;
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Adds `s` to the diagonal, returning `self + s I`.
    pub fn shift_diag(&self, s: T) -> Matrix<T> {
        assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += s;
        }
        out
    }

    /// Symmetric part `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> Matrix<T> {
        assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)]) * cast::<T>(0.5)
        })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|&a| a * a)
            .fold(T::zero(), |acc, v| acc + v)
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &a| acc.max(a.abs()))
    }

    /// Largest absolute difference `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> T {
        assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    /// 2x2 block matrix `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Matrix<T>, b: &Matrix<T>, c: &Matrix<T>, d: &Matrix<T>) -> Matrix<T> {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let mut out = Matrix::zeros(a.rows + c.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out[(i, j)] = a[(i, j)];
            }
            for j in 0..b.cols {
                out[(i, a.cols + j)] = b[(i, j)];
            }
        }
        for i in 0..c.rows {
            for j in 0..c.cols {
                out[(a.rows + i, j)] = c[(i, j)];
            }
            for j in 0..d.cols {
                out[(a.rows + i, a.cols + j)] = d[(i, j)];
            }
        }
        out
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

// ── vector helpers ──────────────────────────────────────────────────

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn sub_vec<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add_vec<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale_vec<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

// ── LU factorization ────────────────────────────────────────────────

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("LU requires a square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs_entry().max(T::one());
        let tiny = scale * cast::<T>(1e-14) * T::epsilon() / cast::<T>(f64::EPSILON);
        for k in 0..n {
            // pivot search
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(Error::Singular(format!(
                    "LU pivot {best} below threshold at column {k}"
                )));
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                for j in (k + 1)..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= m * v;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::Dimension("LU solve rhs length mismatch".into()));
        }
        let mut x: Vec<T> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }
}

/// Solve `a x = b` for a single right-hand side.
pub fn solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    Lu::factor(a)?.solve(b)
}

/// Dense inverse via LU; intended for small, well-conditioned matrices.
pub fn inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let lu = Lu::factor(a)?;
    let mut out = Matrix::zeros(n, n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        let col = lu.solve(&e)?;
        e[j] = T::zero();
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    Ok(out)
}

// ── Cholesky ────────────────────────────────────────────────────────

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::Dimension("Cholesky requires a square matrix".into()));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= T::zero() {
                    return Err(Error::Singular(format!(
                        "matrix not positive definite (pivot {s} at {i})"
                    )));
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Forward substitution `L y = b` with lower-triangular `L`.
pub fn forward_substitute<T: Real>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for j in 0..i {
            s -= l[(i, j)] * y[j];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

// ── symmetric eigensolver (cyclic Jacobi) ───────────────────────────

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending plus the
/// matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

/// Cyclic Jacobi iteration. Input is symmetrized first, so slight asymmetry
/// from rounding is tolerated.
pub fn sym_eigen<T: Real>(a: &Matrix<T>) -> Result<SymEigen<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(
            "eigensolver requires a square matrix".into(),
        ));
    }
    if !a.is_finite() {
        return Err(Error::Argument(
            "eigensolver input has non-finite entries".into(),
        ));
    }
    let n = a.rows();
    let mut m = a.symmetric_part();
    let mut v = Matrix::identity(n);
    if n <= 1 {
        return Ok(SymEigen {
            values: (0..n).map(|i| m[(i, i)]).collect(),
            vectors: v,
        });
    }
    let eps = T::epsilon();
    let norm = m.frobenius_norm().max(T::min_positive_value());
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= eps * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= eps * norm * cast::<T>(1e-3) {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let tau = (aqq - app) / (cast::<T>(2.0) * apq);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // update rows/cols p and q
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    idx.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("NaN eigenvalue"));
    let values: Vec<T> = idx.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn sym_eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    sym_eigen(a).map(|e| e.values)
}

/// Largest eigenvalue of the symmetric part; equals the Euclidean log-norm.
pub fn lognorm_euclidean<T: Real>(a: &Matrix<T>) -> Result<T> {
    let vals = sym_eigenvalues(&a.symmetric_part())?;
    Ok(*vals.last().expect("empty matrix"))
}

/// Largest singular value, computed from the Gram matrix.
pub fn spectral_norm<T: Real>(a: &Matrix<T>) -> Result<T> {
    let gram = a.transpose().matmul(a);
    let vals = sym_eigenvalues(&gram)?;
    Ok(vals.last().expect("empty matrix").max(T::zero()).sqrt())
}

/// Rebuild `V diag(w) V^T` from an eigendecomposition with modified values.
pub fn recompose<T: Real>(eig: &SymEigen<T>, values: &[T]) -> Matrix<T> {
    let n = eig.vectors.rows();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] *= values[j];
        }
    }
    scaled.matmul(&eig.vectors.transpose())
}

// ── spectral abscissa ───────────────────────────────────────────────

/// Largest real part over the eigenvalues of a general square matrix.
///
/// Computed without a nonsymmetric QR iteration: exponentiate a scaled copy
/// (truncated Taylor series) and estimate the spectral radius of the
/// exponential by normalized repeated squaring, so that
/// `abscissa = 2^s * log rho(exp(A / 2^s))`. Repeated squaring drives the
/// k-th-root error to zero geometrically, which is plenty for the ~1e-10
/// accuracy needed here.
pub fn spectral_abscissa<T: Real>(a: &Matrix<T>) -> Result<T> {
    if !a.is_square() {
        return Err(Error::Dimension(
            "spectral abscissa requires a square matrix".into(),
        ));
    }
    if !a.is_finite() {
        return Err(Error::Argument(
            "spectral abscissa input has non-finite entries".into(),
        ));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    // scale so the Taylor series converges fast
    let norm = a.frobenius_norm();
    let mut s: i32 = 0;
    let half = cast::<T>(0.5);
    let mut scaled_norm = norm;
    while scaled_norm > half && s < 200 {
        scaled_norm *= half;
        s += 1;
    }
    let b = a.scale(T::one() / cast::<T>((2.0f64).powi(s)));
    // exp(b) by Taylor; ||b|| <= 1/2 so 24 terms are beyond machine precision
    let mut term = Matrix::identity(n);
    let mut expb = Matrix::identity(n);
    for k in 1..=24 {
        term = term.matmul(&b).scale(T::one() / cast::<T>(k as f64));
        expb = expb.add(&term);
    }
    // log of spectral radius by normalized repeated squaring:
    // running estimate alpha_j = T_j / 2^j with M_{j+1} = M_j^2 / ||M_j^2||.
    let mut m = expb;
    let mut alpha = T::zero();
    let mut pow = T::one(); // 2^{-j}
    for _j in 0..90 {
        let sq = m.matmul(&m);
        let nf = sq.frobenius_norm();
        if nf <= T::zero() || !nf.is_finite() {
            return Err(Error::Numerical(
                "spectral radius iteration degenerated".into(),
            ));
        }
        pow *= half;
        alpha += nf.ln() * pow;
        m = sq.scale(T::one() / nf);
    }
    Ok(alpha * cast::<T>((2.0f64).powi(s)))
}

/// Kronecker product (used to vectorize Lyapunov-type equations).
pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let mut out = Matrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij == T::zero() {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out[(i * b.rows() + k, j * b.cols() + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}
