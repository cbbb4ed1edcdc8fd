//! Small dense matrix and vector routines.
//!
//! Everything in this crate works on matrices of a few dozen rows at most
//! (the stacked parameter dimension of a desk-scale game), so the solvers
//! here are plain O(n^3) dense methods: LU with partial pivoting for linear
//! systems and a cyclic Jacobi iteration for symmetric eigenvalues. Singular
//! values are obtained from the eigenvalues of `Z^T Z`.

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DimensionMismatch("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::DimensionMismatch("matrix needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Mat { rows: rows.len(), cols, data })
    }

    /// Square diagonal matrix with the given diagonal entries.
    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Mat::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
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

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copy the block of `self` into `target` with its top-left corner at
    /// `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &Mat) {
        assert!(row + block.rows <= self.rows && col + block.cols <= self.cols, "block out of range");
        for r in 0..block.rows {
            for c in 0..block.cols {
                self[(row + r, col + c)] = block[(r, c)];
            }
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length must equal column count");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self[(i, j)] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Entrywise `self + scale * other`.
    pub fn add_scaled(&self, other: &Mat, scale: f64) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shapes must agree");
        let mut out = self.clone();
        for (o, v) in out.data.iter_mut().zip(other.data.iter()) {
            *o += scale * v;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= s;
        }
        out
    }

    /// Largest absolute entry difference to another matrix.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shapes must agree");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Solve `a * x = b` by LU decomposition with partial pivoting.
pub fn lu_solve(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "lu_solve needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if a.rows != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            a.rows
        )));
    }
    let n = a.rows;
    let mut lu = a.clone();
    let mut x: Vec<f64> = b.to_vec();

    for col in 0..n {
        // Partial pivot: bring the largest remaining entry of this column up.
        let mut pivot_row = col;
        let mut pivot_mag = lu[(col, col)].abs();
        for r in col + 1..n {
            let mag = lu[(r, col)].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag == 0.0 || !pivot_mag.is_finite() {
            return Err(Error::Numeric(format!("singular matrix at pivot column {col}")));
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = lu[(col, c)];
                lu[(col, c)] = lu[(pivot_row, c)];
                lu[(pivot_row, c)] = tmp;
            }
            x.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = lu[(r, col)] / lu[(col, col)];
            lu[(r, col)] = factor;
            for c in col + 1..n {
                lu[(r, c)] -= factor * lu[(col, c)];
            }
            x[r] -= factor * x[col];
        }
    }

    // Back substitution.
    for col in (0..n).rev() {
        x[col] /= lu[(col, col)];
        for r in 0..col {
            x[r] -= lu[(r, col)] * x[col];
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite solution from lu_solve".into()));
    }
    Ok(x)
}

/// Solve `a * X = B` column by column.
pub fn lu_solve_matrix(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "row counts must agree, got {} and {}",
            a.rows, b.rows
        )));
    }
    let mut out = Mat::zeros(b.rows, b.cols);
    for j in 0..b.cols {
        let col: Vec<f64> = (0..b.rows).map(|i| b[(i, j)]).collect();
        let sol = lu_solve(a, &col)?;
        for i in 0..b.rows {
            out[(i, j)] = sol[i];
        }
    }
    Ok(out)
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
///
/// The input must be symmetric; entries are read from the upper triangle and
/// mirrored. Convergence is to a fixed multiple of machine epsilon relative
/// to the Frobenius norm, which is plenty for the small well-scaled matrices
/// this crate produces.
pub fn symmetric_eigenvalues(m: &Mat) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if !m.is_finite() {
        return Err(Error::Numeric("non-finite entry in eigenvalue input".into()));
    }
    let n = m.rows;
    // Work on an explicitly symmetrized copy so tiny asymmetries from
    // finite-difference noise do not break the rotation algebra.
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }

    let frob: f64 = a.data.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = f64::EPSILON * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol * 1e-3 {
                    continue;
                }
                // Classic Jacobi rotation annihilating a[(p, q)].
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eig)
}

/// Largest and smallest singular values of a square matrix.
///
/// Computed as square roots of the extreme eigenvalues of `Z^T Z` (clamped at
/// zero to absorb round-off on rank-deficient inputs).
pub fn singular_extremes(z: &Mat) -> Result<(f64, f64)> {
    if !z.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "singular extremes need a square matrix, got {}x{}",
            z.rows, z.cols
        )));
    }
    let gram = z.transpose().matmul(z);
    let eig = symmetric_eigenvalues(&gram)?;
    let lo = eig.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let hi = eig.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    Ok((hi, lo))
}

/// Euclidean norm of a vector.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Max-absolute-entry norm of a vector.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Euclidean distance between two equal-length vectors.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Max-entry distance between two equal-length vectors.
pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
