//! Dense vector and matrix primitives. Desk-scale sizes only, so everything is row-major `Vec` storage.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::ops::{Index, IndexMut};

#[inline]
pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

#[inline]
pub fn norm2_sq<T: Real>(x: &[T]) -> T {
    x.iter().map(|&a| a * a).sum()
}

#[inline]
pub fn norm2<T: Real>(x: &[T]) -> T {
    norm2_sq(x).sqrt()
}

#[inline]
pub fn norm1<T: Real>(x: &[T]) -> T {
    x.iter().map(|a| a.abs()).sum()
}

#[inline]
pub fn norm_inf<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, a| m.max(a.abs()))
}

/// `‖x‖_p` for `p ≥ 1`, computed with max-scaling to avoid overflow for large `p`.
pub fn norm_p<T: Real>(x: &[T], p: T) -> T {
    let m = norm_inf(x);
    if m == T::zero() {
        return T::zero();
    }
    let s: T = x.iter().map(|&a| (a.abs() / m).powf(p)).sum();
    m * s.powf(T::one() / p)
}

pub fn dist2<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale<T: Real>(a: T, x: &[T]) -> Vec<T> {
    x.iter().map(|&v| a * v).collect()
}

pub fn add<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| a + b).collect()
}

pub fn sub<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}

/// `a x + b y`
pub fn lincomb<T: Real>(a: T, x: &[T], b: T, y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&u, &v)| a * u + b * v).collect()
}

pub fn sum<T: Real>(x: &[T]) -> T {
    x.iter().copied().sum()
}

pub fn all_finite<T: Real>(x: &[T]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Numerically stable `log Σ exp(x_i)`.
pub fn logsumexp<T: Real>(x: &[T]) -> T {
    let m = x.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    if !m.is_finite() {
        return m;
    }
    m + x.iter().map(|&v| (v - m).exp()).sum::<T>().ln()
}

/// Softmax with max-subtraction.
pub fn softmax<T: Real>(x: &[T]) -> Vec<T> {
    let m = x.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let e: Vec<T> = x.iter().map(|&v| (v - m).exp()).collect();
    let s = sum(&e);
    e.into_iter().map(|v| v / s).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Self {
        let conv: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&v| T::of(v)).collect()).collect();
        Self::from_rows(&conv)
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`
    pub fn tmatvec(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            axpy(y[i], self.row(i), &mut out);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out[(i, j)] + a * other[(k, j)];
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat { rows: self.rows, cols: self.cols, data: add(&self.data, &other.data) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat { rows: self.rows, cols: self.cols, data: sub(&self.data, &other.data) }
    }

    pub fn scaled(&self, a: T) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: scale(a, &self.data) }
    }

    pub fn frobenius(&self) -> T {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> T {
        norm_inf(&self.data)
    }

    /// Solves `A x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.rows;
        if !self.is_square() || b.len() != n {
            return Err(Error::InvalidInput(format!("solve: shape {}x{} vs rhs {}", self.rows, self.cols, b.len())));
        }
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        let scale_ref = self.max_abs().max(T::min_positive_value());
        for k in 0..n {
            let (p, pv) = (k..n).map(|i| (i, a[i * n + k].abs())).fold((k, T::zero()), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pv <= scale_ref * T::epsilon() * T::of(1e-3) {
                return Err(Error::InvalidInput("singular matrix".into()));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                if f == T::zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[k * n + j];
                    a[i * n + j] -= f * v;
                }
                let xk = x[k];
                x[i] -= f * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[k * n + j] * x[j];
            }
            x[k] = s / a[k * n + k];
        }
        Ok(x)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    pub fn sym_eigenvalues(&self) -> Vec<T> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let two = T::of(2.0);
        for _sweep in 0..100 {
            let off: T = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * a[(i, j)]).sum();
            if off <= T::epsilon() * T::epsilon() * a.frobenius().powi(2).max(T::min_positive_value()) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
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
        let mut ev: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        ev
    }

    pub fn lambda_max_sym(&self) -> T {
        self.sym_eigenvalues().last().copied().unwrap_or(T::zero())
    }

    /// Spectral norm `‖A‖₂ = √λ_max(AᵀA)`.
    pub fn op_norm2(&self) -> T {
        let g = if self.rows <= self.cols { self.matmul(&self.transpose()) } else { self.transpose().matmul(self) };
        g.lambda_max_sym().max(T::zero()).sqrt()
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor series.
    pub fn expm(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        let norm = self.data.iter().map(|v| v.abs()).sum::<T>().max(T::zero());
        let mut s = 0i32;
        let mut scaled = self.clone();
        let half = T::of(0.5);
        let mut nrm = norm;
        while nrm > half {
            scaled = scaled.scaled(half);
            nrm = nrm * half;
            s += 1;
        }
        let mut term = Self::identity(n);
        let mut acc = Self::identity(n);
        for k in 1..30 {
            term = term.matmul(&scaled).scaled(T::one() / T::of_usize(k));
            acc = acc.add(&term);
        }
        for _ in 0..s {
            acc = acc.matmul(&acc);
        }
        acc
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}
