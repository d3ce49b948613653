//! Dense real linear algebra: a row-major matrix, a symmetric wrapper,
//! cyclic Jacobi eigendecomposition and Cholesky factorization.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math::{ln, sqrt};
use crate::tol;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(alloc::format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Ok(Matrix { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| crate::math::dot(self.row(i), v)).collect()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `A · Diag(w) · Aᵀ`, exactly symmetric.
    pub fn weighted_gram(&self, w: &[f64]) -> SymMatrix {
        assert_eq!(self.cols, w.len(), "weighted_gram shape mismatch");
        let n = self.rows;
        let mut out = Matrix::zeros(n, n);
        let mut scaled = vec![0.0; self.cols];
        for i in 0..n {
            for ((s, a), wk) in scaled.iter_mut().zip(self.row(i)).zip(w) {
                *s = a * wk;
            }
            for j in 0..=i {
                let v = crate::math::dot(&scaled, self.row(j));
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        SymMatrix(out)
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, keep.len(), |i, j| self[(i, keep[j])])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Square symmetric matrix. Symmetry is exact: construction averages the
/// two triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::InvalidInput(alloc::format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows,
                m.cols
            )));
        }
        if m.rows == 0 {
            return Err(Error::InvalidInput("matrix order must be at least 1".into()));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self::symmetrize(m))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        SymMatrix::new(Matrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn diag(d: &[f64]) -> Self {
        SymMatrix(Matrix::diag(d))
    }

    /// Symmetrizes without validation; callers guarantee a square matrix.
    pub(crate) fn symmetrize(mut m: Matrix) -> Self {
        let n = m.rows;
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub(crate) fn as_mut_matrix(&mut self) -> &mut Matrix {
        &mut self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn principal(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix(Matrix::from_fn(idx.len(), idx.len(), |i, j| self.0[(idx[i], idx[j])]))
    }

    /// `Diag(d) · M · Diag(d)`.
    pub fn scale_sym(&self, d: &[f64]) -> SymMatrix {
        SymMatrix(Matrix::from_fn(self.order(), self.order(), |i, j| d[i] * self.0[(i, j)] * d[j]))
    }

    pub fn hadamard(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.order(), other.order());
        SymMatrix(Matrix::from_fn(self.order(), self.order(), |i, j| self.0[(i, j)] * other.0[(i, j)]))
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.0[ij]
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order and
/// eigenvectors as the matching columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomp {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigDecomp {
    /// `Q · Diag(f(λ)) · Qᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let q = &self.vectors;
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = (0..n).map(|k| q[(i, k)] * fl[k] * q[(j, k)]).sum();
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymMatrix(out)
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn eig_sym(m: &SymMatrix) -> Result<EigDecomp> {
    if !m.0.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.order();
    let mut a = m.0.clone();
    let mut v = Matrix::identity(n);
    let target = tol::JACOBI_OFF_DIAG * a.frobenius();

    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let t = 1.0 / (theta.abs() + sqrt(theta * theta + 1.0));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[(r, p)];
                    let h = a[(r, q)];
                    let rp = c * g - s * h;
                    let rq = s * g + c * h;
                    a[(r, p)] = rp;
                    a[(p, r)] = rp;
                    a[(r, q)] = rq;
                    a[(q, r)] = rq;
                }
                for r in 0..n {
                    let g = v[(r, p)];
                    let h = v[(r, q)];
                    v[(r, p)] = c * g - s * h;
                    v[(r, q)] = s * g + c * h;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps ties in index order, so the output is deterministic.
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(EigDecomp { values, vectors })
}

/// Eigenvalues only (descending), by Householder tridiagonalization and
/// implicit QL. Much cheaper than [`eig_sym`] when vectors are not needed.
pub fn eigenvalues_sym(m: &SymMatrix) -> Result<Vec<f64>> {
    if !m.0.is_finite() {
        return Err(Error::NonFinite);
    }
    let (mut d, mut e) = tridiagonalize(m.0.clone());
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Reduces symmetric `a` to tridiagonal form by Householder reflections;
/// returns the diagonal and the subdiagonal (`e[i]` couples `i - 1` and
/// `i`, `e[0] = 0`).
fn tridiagonalize(mut a: Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        d[k] = a[(k, k)];
        let lo = k + 1;
        let m = n - lo;
        // Householder vector for row k to the right of the diagonal.
        let xs = &a.data[k * n + lo..k * n + n];
        let norm = sqrt(xs.iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            e[lo] = 0.0;
            continue;
        }
        let alpha = if xs[0] > 0.0 { -norm } else { norm };
        let v = &mut v[..m];
        v.copy_from_slice(xs);
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        e[lo] = alpha;
        if vv == 0.0 {
            continue;
        }
        let beta = 2.0 / vv;
        // p = β A₂₂ v, w = p - (β/2)(pᵀv) v, A₂₂ -= v wᵀ + w vᵀ.
        let w = &mut w[..m];
        for (i, wi) in w.iter_mut().enumerate() {
            let row = &a.data[(lo + i) * n + lo..(lo + i) * n + n];
            *wi = beta * crate::math::dot(row, v);
        }
        let pv = 0.5 * beta * crate::math::dot(w, v);
        for (wi, vi) in w.iter_mut().zip(v.iter()) {
            *wi -= pv * vi;
        }
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a.data[(lo + i) * n + lo..(lo + i) * n + n];
            for ((r, vj), wj) in row.iter_mut().zip(v.iter()).zip(w.iter()) {
                *r -= vi * wj + wi * vj;
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2, n - 2)];
        e[n - 1] = a[(n - 1, n - 2)];
    }
    if n >= 1 {
        d[n - 1] = a[(n - 1, n - 1)];
    }
    (d, e)
}

fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let mut sum = 0.0;
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sqrt(sum)
}

/// Natural log-determinant of a positive definite matrix, from its spectrum.
pub fn ldet_pd(m: &SymMatrix) -> Result<f64> {
    let eig = eig_sym(m)?;
    ldet_from_spectrum(&eig.values)
}

/// Sum of logs of a descending spectrum, rejecting non-PD spectra.
pub fn ldet_from_spectrum(values: &[f64]) -> Result<f64> {
    let lmax = values.first().copied().unwrap_or(0.0);
    let lmin = values.last().copied().unwrap_or(0.0);
    if !(lmax > 0.0) || !(lmin > tol::PD_RELATIVE * lmax) {
        return Err(Error::NotPositiveDefinite { lambda_min: lmin });
    }
    Ok(values.iter().map(|&l| ln(l)).sum())
}

/// Solves `M·X = B` for positive definite `M`.
pub fn solve_pd(m: &SymMatrix, b: &Matrix) -> Result<Matrix> {
    if b.rows() != m.order() {
        return Err(Error::InvalidInput("right-hand side has the wrong number of rows".into()));
    }
    if !m.0.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite);
    }
    let chol = Cholesky::factor(m).ok_or(Error::Singular)?;
    Ok(chol.solve(b))
}

/// Lower-triangular Cholesky factor `M = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Returns `None` when a pivot is not sufficiently positive.
    pub fn factor(m: &SymMatrix) -> Option<Self> {
        Self::factor_matrix(&m.0)
    }

    /// Factors the lower triangle of a square matrix assumed symmetric.
    pub(crate) fn factor_matrix(m: &Matrix) -> Option<Self> {
        let n = m.rows;
        let max_diag = (0..n).fold(0.0_f64, |acc, i| acc.max(m[(i, i)]));
        if !(max_diag > 0.0) || !max_diag.is_finite() {
            return None;
        }
        let floor = tol::CHOLESKY_PIVOT_RELATIVE * max_diag;
        // Row-oriented Cholesky–Banachiewicz.
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = m[(i, j)];
                let (ri, rj) = (i * n, j * n);
                for k in 0..j {
                    sum -= l.data[ri + k] * l.data[rj + k];
                }
                if i == j {
                    if !(sum > floor) || !sum.is_finite() {
                        return None;
                    }
                    l.data[ri + i] = sqrt(sum);
                } else {
                    l.data[ri + j] = sum / l.data[rj + j];
                }
            }
        }
        Some(Cholesky { l })
    }

    pub fn factor_l(&self) -> &Matrix {
        &self.l
    }

    pub fn ldet(&self) -> f64 {
        2.0 * (0..self.l.rows).map(|i| ln(self.l[(i, i)])).sum::<f64>()
    }

    /// Solves `L·Y = B` in place.
    pub(crate) fn forward_in_place(&self, b: &mut Matrix) {
        let n = self.l.rows;
        let k = b.cols;
        for i in 0..n {
            for p in 0..i {
                let lip = self.l[(i, p)];
                if lip == 0.0 {
                    continue;
                }
                let (upper, lower) = b.data.split_at_mut(i * k);
                let src = &upper[p * k..(p + 1) * k];
                for (dst, s) in lower[..k].iter_mut().zip(src) {
                    *dst -= lip * s;
                }
            }
            let lii = self.l[(i, i)];
            for v in b.row_mut(i) {
                *v /= lii;
            }
        }
    }

    /// Solves `Lᵀ·X = Y` in place.
    pub(crate) fn backward_in_place(&self, b: &mut Matrix) {
        let n = self.l.rows;
        let k = b.cols;
        for i in (0..n).rev() {
            let lii = self.l[(i, i)];
            for v in b.row_mut(i) {
                *v /= lii;
            }
            // Row i is final; eliminate it from the rows above.
            let (upper, lower) = b.data.split_at_mut(i * k);
            let src = &lower[..k];
            for p in 0..i {
                let lip = self.l[(i, p)];
                if lip == 0.0 {
                    continue;
                }
                for (dst, s) in upper[p * k..(p + 1) * k].iter_mut().zip(src) {
                    *dst -= lip * s;
                }
            }
        }
    }

    pub fn solve(&self, b: &Matrix) -> Matrix {
        let mut x = b.clone();
        self.forward_in_place(&mut x);
        self.backward_in_place(&mut x);
        x
    }

    pub fn inverse(&self) -> Matrix {
        let mut x = self.solve(&Matrix::identity(self.l.rows));
        // Exact symmetry for downstream Hadamard products.
        let n = self.l.rows;
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (x[(i, j)] + x[(j, i)]);
                x[(i, j)] = v;
                x[(j, i)] = v;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> SymMatrix {
        SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap()
    }

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).max_abs()
    }

    #[test]
    fn eig_identity_reconstructs() {
        let m = SymMatrix::identity(2);
        let e = eig_sym(&m).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert!(max_abs_diff(e.reconstruct().as_matrix(), m.as_matrix()) < 1e-14);
    }

    #[test]
    fn eigenvalues_match_jacobi() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [1, 2, 3, 7, 20] {
            let g = Matrix::from_fn(n, n, |_, _| next());
            let m = SymMatrix::symmetrize(g);
            let a = eigenvalues_sym(&m).unwrap();
            let b = eig_sym(&m).unwrap().values;
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "n={n}: {a:?} vs {b:?}");
            }
        }
        let a = eigenvalues_sym(&SymMatrix::diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(a, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn eig_two_by_two() {
        let e = eig_sym(&c2()).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        let q0 = e.vectors.column(0);
        let q1 = e.vectors.column(1);
        assert!((q0[0].abs() - r).abs() < 1e-14 && (q0[0] - q0[1]).abs() < 1e-14);
        assert!((q1[0].abs() - r).abs() < 1e-14 && (q1[0] + q1[1]).abs() < 1e-14);
    }

    #[test]
    fn eig_diagonal_is_sorted_permutation() {
        let e = eig_sym(&SymMatrix::diag(&[0.1, 4.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![4.0, 3.0, 0.1]);
        let expected = Matrix::from_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(e.vectors, expected);
    }

    #[test]
    fn eig_rejects_nan() {
        let m = SymMatrix(Matrix::from_rows(&[&[1.0, f64::NAN], &[f64::NAN, 1.0]]).unwrap());
        assert_eq!(eig_sym(&m), Err(Error::NonFinite));
        assert_eq!(SymMatrix::new(Matrix::from_rows(&[&[f64::INFINITY]]).unwrap()), Err(Error::NonFinite));
    }

    #[test]
    fn ldet_examples() {
        assert_eq!(ldet_pd(&SymMatrix::identity(3)).unwrap(), 0.0);
        let m = SymMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 2.0]]).unwrap();
        assert!((ldet_pd(&m).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert!((ldet_pd(&SymMatrix::diag(&[2.0, 3.0, 4.0])).unwrap() - 24f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ldet_rejects_indefinite() {
        let m = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        match ldet_pd(&m) {
            Err(Error::NotPositiveDefinite { lambda_min }) => assert!((lambda_min + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solve_examples() {
        let b = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(solve_pd(&SymMatrix::identity(2), &b).unwrap(), b);

        let m = SymMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 2.0]]).unwrap();
        let inv = solve_pd(&m, &Matrix::identity(2)).unwrap();
        let expected = Matrix::from_rows(&[&[0.5, -0.5], &[-0.5, 1.0]]).unwrap();
        assert!(max_abs_diff(&inv, &expected) < 1e-14);

        let x = solve_pd(&SymMatrix::diag(&[2.0, 4.0]), &Matrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap()).unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-15 && (x[(1, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn solve_rejects_singular() {
        let m = SymMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(solve_pd(&m, &Matrix::identity(2)), Err(Error::Singular));
    }

    #[test]
    fn cholesky_inverse_matches() {
        let m = SymMatrix::from_rows(&[&[4.0, 2.0, 0.5], &[2.0, 3.0, 0.1], &[0.5, 0.1, 2.0]]).unwrap();
        let chol = Cholesky::factor(&m).unwrap();
        let prod = m.as_matrix().matmul(&chol.inverse());
        assert!(max_abs_diff(&prod, &Matrix::identity(3)) < 1e-13);
        assert!((chol.ldet() - ldet_pd(&m).unwrap()).abs() < 1e-12);
    }
}
