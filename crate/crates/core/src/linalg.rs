//! Dense real linear algebra kernels.
//!
//! Everything here works on small square matrices (n up to a few hundred)
//! stored row-major. The SVD is a one-sided (Hestenes) Jacobi method, which
//! delivers small singular values to high relative accuracy; the polar and
//! square-root bounds depend on exactly those values.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot threshold for [`invert`].
pub const PIVOT_RTOL: f64 = 1e-14;
/// Sweep limit for the Jacobi SVD.
pub const MAX_SWEEPS: usize = 60;

/// Dense real square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds an `n x n` matrix from row-major entries. Rejects wrong lengths
    /// and non-finite values.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if data.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / n,
                pos % n
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows must all have length n".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// `alpha * I`.
    pub fn scaled_identity(n: usize, alpha: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = alpha;
        }
        m
    }

    pub(crate) fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self[(i, j)] == 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_dim(&self, other: &Matrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix { n: self.n, data })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { n: self.n, data })
    }

    pub fn scale(&self, alpha: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|v| alpha * v).collect() }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_dim(other)?;
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Matrix { n, data: out })
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// Symmetric part `(A + A^T) / 2`.
    pub fn symmetrize(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Inverse via LU with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when a pivot falls below
/// `1e-14 * max|a_ij|`.
pub fn invert(a: &Matrix) -> Result<Matrix> {
    let n = a.n;
    let threshold = PIVOT_RTOL * a.max_abs();
    let mut lu = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lu[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= threshold {
            return Err(Error::SingularMatrix { pivot, threshold });
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let d = lu[k * n + k];
        for i in k + 1..n {
            let l = lu[i * n + k] / d;
            lu[i * n + k] = l;
            if l != 0.0 {
                for j in k + 1..n {
                    lu[i * n + j] -= l * lu[k * n + j];
                }
            }
        }
    }

    // Solve L U x = P e_j column by column.
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for (i, c) in col.iter_mut().enumerate() {
            *c = if perm[i] == j { 1.0 } else { 0.0 };
        }
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= lu[i * n + k] * col[k];
            }
            col[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in i + 1..n {
                s -= lu[i * n + k] * col[k];
            }
            col[i] = s / lu[i * n + i];
        }
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Ok(Matrix { n, data: inv })
}

/// `A = U diag(s) V^T` with `s` non-increasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let n = self.s.len();
        Matrix::from_fn(n, |i, j| (0..n).map(|k| self.u[(i, k)] * self.s[k] * self.v[(j, k)]).sum())
    }
}

/// Orthogonalizes the rows of `w` in place with cyclic Jacobi rotations,
/// applying the same rotations to the rows of `acc` when given.
/// Returns the number of sweeps used.
fn jacobi_sweeps(w: &mut [Vec<f64>], mut acc: Option<&mut [Vec<f64>]>) -> Result<usize> {
    let n = w.len();
    let tol = (n as f64).sqrt() * f64::EPSILON;
    for sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (&w[p], &w[q]);
                    let mut a = 0.0;
                    let mut b = 0.0;
                    let mut g = 0.0;
                    for (x, y) in wp.iter().zip(wq) {
                        a += x * x;
                        b += y * y;
                        g += x * y;
                    }
                    (a, b, g)
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate_pair(w, p, q, c, s);
                if let Some(acc) = acc.as_deref_mut() {
                    rotate_pair(acc, p, q, c, s);
                }
            }
        }
        if !rotated {
            return Ok(sweep + 1);
        }
    }
    Err(Error::NoConvergence { iterations: MAX_SWEEPS })
}

fn rotate_pair(rows: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = rows.split_at_mut(q);
    let rp = &mut head[p];
    let rq = &mut tail[0];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Columns of `a` as separate vectors.
fn columns(a: &Matrix) -> Vec<Vec<f64>> {
    (0..a.n).map(|j| (0..a.n).map(|i| a[(i, j)]).collect()).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Singular value decomposition by one-sided Jacobi.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    let n = a.n;
    let mut w = columns(a);
    let mut vt: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    jacobi_sweeps(&mut w, Some(&mut vt))?;

    let norms: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > f64::MIN_POSITIVE {
            ucols.push(w[j].iter().map(|x| x / norms[j]).collect());
        } else {
            ucols.push(vec![0.0; n]);
            missing.push(k);
        }
    }
    complete_basis(&mut ucols, &missing);

    let u = Matrix::from_fn(n, |i, k| ucols[k][i]);
    let v = Matrix::from_fn(n, |i, k| vt[order[k]][i]);
    Ok(SvdResult { u, s, v })
}

/// Fills the columns listed in `missing` with unit vectors orthogonal to all
/// other columns (Gram-Schmidt against the standard basis).
fn complete_basis(cols: &mut [Vec<f64>], missing: &[usize]) {
    let n = cols.len();
    let mut filled: Vec<bool> = (0..n).map(|k| !missing.contains(&k)).collect();
    let mut e = 0;
    for &k in missing {
        while e < n {
            let mut cand: Vec<f64> = (0..n).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
            e += 1;
            for _ in 0..2 {
                for (j, c) in cols.iter().enumerate() {
                    if !filled[j] {
                        continue;
                    }
                    let d: f64 = cand.iter().zip(c).map(|(x, y)| x * y).sum();
                    for (x, y) in cand.iter_mut().zip(c) {
                        *x -= d * y;
                    }
                }
            }
            let nrm = norm2(&cand);
            if nrm > 0.5 {
                cols[k] = cand.iter().map(|x| x / nrm).collect();
                filled[k] = true;
                break;
            }
        }
    }
}

/// Singular values only, descending. Skips accumulation of `V`.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    let mut w = columns(a);
    jacobi_sweeps(&mut w, None)?;
    let mut s: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    if a.is_diagonal() {
        return Ok(a.diag().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok(singular_values(a)?[0])
}

/// Smallest singular value.
pub fn sigma_min(a: &Matrix) -> Result<f64> {
    if a.is_diagonal() {
        return Ok(a.diag().iter().fold(f64::INFINITY, |m, v| m.min(v.abs())));
    }
    Ok(*singular_values(a)?.last().expect("n >= 1"))
}

/// Unevaluated sum `hi + lo` carrying about 32 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let e = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: e }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self { hi: p, lo: a.mul_add(b, -p) }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        Self::renorm(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = Self::two_prod(self.hi, b);
        Self::renorm(p.hi, p.lo + self.lo * b)
    }

    fn mul(self, o: Self) -> Self {
        let p = Self::two_prod(self.hi, o.hi);
        Self::renorm(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Self) -> Self {
        let q = self.hi / o.hi;
        let r = self.add(o.mul_f64(-q));
        let q2 = r.hi / o.hi;
        Self::renorm(q, q2)
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(0.0);
        }
        let s = self.hi.sqrt();
        let r = self.add(Self::two_prod(s, -s));
        Self::renorm(s, r.hi / (2.0 * s))
    }

    /// `x - self` for a plain double `x`.
    pub fn sub_from(self, x: f64) -> f64 {
        let d = Self::two_sum(x, -self.hi);
        d.hi + (d.lo - self.lo)
    }
}

/// Largest singular value, with the leading singular pair's Rayleigh quotient
/// `u^T A v / (|u| |v|)` re-evaluated in double-double arithmetic.
///
/// The quotient is stationary at the exact pair, so the `O(eps)` error of the
/// Jacobi vectors enters only at second order. Needed when the norm is
/// subtracted from a nearly equal quantity.
pub fn spectral_norm_refined(a: &Matrix) -> Result<DoubleDouble> {
    if a.is_diagonal() {
        return Ok(DoubleDouble::from_f64(spectral_norm(a)?));
    }
    refined_norm_shifted(a, DoubleDouble::from_f64(0.0))
}

/// `||A - c I||` to double-double precision, where the shift `c = alpha^2`
/// is itself carried exactly. Rounding `alpha^2` would otherwise perturb the
/// small singular values by `eps * alpha^2`.
pub fn spectral_norm_shifted_square(a: &Matrix, alpha: f64) -> Result<DoubleDouble> {
    refined_norm_shifted(a, DoubleDouble::two_prod(alpha, alpha))
}

fn refined_norm_shifted(a: &Matrix, shift: DoubleDouble) -> Result<DoubleDouble> {
    let n = a.n;
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift.hi + shift.lo;
    }
    let r = svd(&shifted)?;
    let u: Vec<f64> = (0..n).map(|i| r.u[(i, 0)]).collect();
    let v: Vec<f64> = (0..n).map(|i| r.v[(i, 0)]).collect();
    let zero = DoubleDouble::from_f64(0.0);
    let neg_shift = DoubleDouble { hi: -shift.hi, lo: -shift.lo };
    let mut quad = zero;
    for i in 0..n {
        let mut av = zero;
        for j in 0..n {
            av = av.add(DoubleDouble::two_prod(a[(i, j)], v[j]));
        }
        av = av.add(neg_shift.mul_f64(v[i]));
        quad = quad.add(av.mul_f64(u[i]));
    }
    let sq = |w: &[f64]| w.iter().fold(zero, |acc, &x| acc.add(DoubleDouble::two_prod(x, x)));
    let denom = sq(&u).mul(sq(&v)).sqrt();
    let rho = quad.div(denom);
    if rho.hi < 0.0 {
        return Ok(DoubleDouble { hi: -rho.hi, lo: -rho.lo });
    }
    Ok(rho)
}

/// `self / b` for a plain double `b`.
impl DoubleDouble {
    pub fn div_f64(self, b: f64) -> Self {
        self.div(Self::from_f64(b))
    }
}

/// `||AX - XA||_F <= rtol * ||A||_F * ||X||_F`.
pub fn commutes(a: &Matrix, x: &Matrix, rtol: f64) -> Result<bool> {
    Ok(commutator_ratio(a, x)? <= rtol)
}

/// `||AX - XA||_F / (||A||_F ||X||_F)`, zero when either factor vanishes.
pub fn commutator_ratio(a: &Matrix, x: &Matrix) -> Result<f64> {
    let c = a.matmul(x)?.sub(&x.matmul(a)?)?.frobenius_norm();
    let scale = a.frobenius_norm() * x.frobenius_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(c / scale)
}

/// Eigenvalues of a symmetric matrix, descending, read off the SVD as
/// `sign(u_j . v_j) * s_j`.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let n = a.n;
    let r = svd(a)?;
    let mut ev: Vec<f64> = (0..n)
        .map(|k| {
            let d: f64 = (0..n).map(|i| r.u[(i, k)] * r.v[(i, k)]).sum();
            if d < 0.0 {
                -r.s[k]
            } else {
                r.s[k]
            }
        })
        .collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev)
}
