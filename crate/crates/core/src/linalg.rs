//! Dense matrices and a thin singular value decomposition.
//!
//! The SVD reduces the (tall) input with Householder QR and then runs
//! one-sided Jacobi rotations on the square triangular factor. Jacobi keeps
//! small singular values accurate to working precision relative to the
//! largest one, which is what rank truncation needs.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch(rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch(cols, r.len()));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::LengthMismatch(rows, c.len()));
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch(self.cols, other.rows));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn to_columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin SVD `a = u * diag(sigma) * v^T` with `r = min(rows, cols)`
/// components, singular values in non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    /// rows × r, orthonormal columns.
    pub u: Matrix,
    pub sigma: Vec<f64>,
    /// cols × r, orthonormal columns.
    pub v: Matrix,
}

const MAX_SWEEPS: usize = 80;

pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::EmptyInput("matrix"));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite(a.data.iter().position(|v| !v.is_finite()).unwrap()));
    }
    if a.rows < a.cols {
        let t = svd_tall(&a.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    svd_tall(a)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Householder reflectors of a QR factorization, stored as unit vectors
/// acting on rows `j..m`.
struct Householder {
    m: usize,
    reflectors: Vec<Option<Vec<f64>>>,
}

impl Householder {
    /// Factors the columns in place; on return the columns hold R in their
    /// leading `n` entries.
    fn factor(cols: &mut [Vec<f64>], m: usize) -> Self {
        let n = cols.len();
        let mut reflectors = Vec::with_capacity(n);
        for j in 0..n {
            let x = &cols[j][j..];
            let alpha = norm(x);
            if alpha == 0.0 {
                reflectors.push(None);
                continue;
            }
            let alpha = if x[0] > 0.0 { -alpha } else { alpha };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let vn = norm(&v);
            if vn == 0.0 {
                reflectors.push(None);
                continue;
            }
            v.iter_mut().for_each(|e| *e /= vn);
            for col in cols[j..].iter_mut() {
                let tail = &mut col[j..];
                let f = 2.0 * dot(&v, tail);
                for (t, vi) in tail.iter_mut().zip(&v) {
                    *t -= f * vi;
                }
            }
            // exact zeros below the diagonal
            cols[j][j] = alpha;
            cols[j][j + 1..].iter_mut().for_each(|e| *e = 0.0);
            reflectors.push(Some(v));
        }
        Self { m, reflectors }
    }

    /// Computes `Q * x` for a vector `x` given in its leading `n` entries.
    fn apply_q(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        y[..x.len()].copy_from_slice(x);
        for (j, v) in self.reflectors.iter().enumerate().rev() {
            if let Some(v) = v {
                let tail = &mut y[j..];
                let f = 2.0 * dot(v, tail);
                for (t, vi) in tail.iter_mut().zip(v) {
                    *t -= f * vi;
                }
            }
        }
        y
    }
}

fn svd_tall(a: &Matrix) -> Result<Svd> {
    let (m, n) = (a.rows, a.cols);
    let mut cols = a.to_columns();
    let qr = Householder::factor(&mut cols, m);

    // one-sided Jacobi on R (n × n), accumulating the right rotations in V
    let mut w: Vec<Vec<f64>> = cols.iter().map(|c| c[..n].to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| f64::from(u8::from(i == j))).collect())
        .collect();
    let eps = f64::EPSILON;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence(MAX_SWEEPS));
    }

    let mut sigma: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let smax = order.first().map_or(0.0, |&i| sigma[i]);
    let mut u_small: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut v_sorted = Vec::with_capacity(n);
    let mut s_sorted = Vec::with_capacity(n);
    for &i in &order {
        let s = sigma[i];
        // columns with negligible norm carry no direction; rebuild them below
        if s > 0.0 && s > smax * eps * n as f64 {
            u_small.push(w[i].iter().map(|x| x / s).collect());
        } else {
            u_small.push(Vec::new());
        }
        v_sorted.push(std::mem::take(&mut v[i]));
        s_sorted.push(s);
    }
    complete_orthonormal(&mut u_small, n);
    sigma = s_sorted;

    let u_cols: Vec<Vec<f64>> = u_small.iter().map(|c| qr.apply_q(c)).collect();
    Ok(Svd {
        u: Matrix::from_columns(&u_cols)?,
        sigma,
        v: Matrix::from_columns(&v_sorted)?,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (a, b) = (&mut lo[p], &mut hi[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fills empty entries with unit vectors orthogonal to all others
/// (modified Gram-Schmidt against the standard basis).
fn complete_orthonormal(basis: &mut [Vec<f64>], n: usize) {
    let mut candidate = 0;
    for slot in 0..basis.len() {
        if !basis[slot].is_empty() {
            continue;
        }
        while candidate < n {
            let mut e = vec![0.0; n];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for b in basis.iter().filter(|b| !b.is_empty()) {
                    let f = dot(b, &e);
                    e.iter_mut().zip(b).for_each(|(x, y)| *x -= f * y);
                }
            }
            let l = norm(&e);
            if l > 1e-6 {
                e.iter_mut().for_each(|x| *x /= l);
                basis[slot] = e;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_row_major(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    fn reconstruct(s: &Svd) -> Matrix {
        let mut us = s.u.clone();
        for i in 0..us.rows() {
            for (j, sj) in s.sigma.iter().enumerate() {
                us[(i, j)] *= sj;
            }
        }
        us.matmul(&s.v.transpose()).unwrap()
    }

    fn orthonormality_error(m: &Matrix) -> f64 {
        let g = m.transpose().matmul(m).unwrap();
        let id = Matrix::identity(g.rows());
        g.as_slice()
            .iter()
            .zip(id.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
        let diff: f64 = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).powi(2))
            .sum();
        diff.sqrt() / a.frobenius_norm()
    }

    #[test]
    fn identity() {
        let s = svd(&Matrix::identity(2)).unwrap();
        assert_eq!(s.sigma, vec![1.0, 1.0]);
    }

    #[test]
    fn rank_one() {
        // m^T m = [[5,10],[10,20]] has eigenvalues 25 and 0
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let s = svd(&m).unwrap();
        assert!((s.sigma[0] - 5.0).abs() < 1e-12);
        assert!(s.sigma[1].abs() < 1e-12);
        assert!(orthonormality_error(&s.u) < 1e-12);
        assert!(rel_err(&m, &reconstruct(&s)) < 1e-12);
    }

    #[test]
    fn tall_wide_and_square() {
        for (r, c, seed) in [(5, 4, 1), (4, 5, 2), (30, 30, 3), (1, 7, 4), (7, 1, 5), (50, 200, 6)] {
            let m = random(r, c, seed);
            let s = svd(&m).unwrap();
            assert_eq!(s.sigma.len(), r.min(c));
            assert!(rel_err(&m, &reconstruct(&s)) < 1e-12, "{r}x{c}");
            assert!(orthonormality_error(&s.u) < 1e-12);
            assert!(orthonormality_error(&s.v) < 1e-12);
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_deficient_keeps_orthonormal_u() {
        // duplicate columns and a zero column
        let mut m = random(6, 4, 9);
        for i in 0..6 {
            m[(i, 2)] = m[(i, 0)];
            m[(i, 3)] = 0.0;
        }
        let s = svd(&m).unwrap();
        assert!(s.sigma[2] < 1e-12 && s.sigma[3] < 1e-12);
        assert!(orthonormality_error(&s.u) < 1e-10);
        assert!(rel_err(&m, &reconstruct(&s)) < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let s = svd(&Matrix::zeros(3, 2)).unwrap();
        assert_eq!(s.sigma, vec![0.0, 0.0]);
        assert!(orthonormality_error(&s.u) < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(svd(&Matrix::zeros(0, 3)).is_err());
        let mut m = Matrix::zeros(2, 2);
        m[(1, 0)] = f64::NAN;
        assert!(matches!(svd(&m), Err(Error::NonFinite(2))));
    }

    #[test]
    fn agrees_with_nalgebra() {
        let m = random(12, 7, 21);
        let s = svd(&m).unwrap();
        let na = nalgebra::DMatrix::from_row_slice(12, 7, m.as_slice());
        let mut theirs: Vec<f64> = na.singular_values().iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in s.sigma.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
