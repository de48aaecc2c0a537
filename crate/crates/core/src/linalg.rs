//! Small dense linear algebra under the complex bilinear form `⟨x, y⟩ = xᵀy`,
//! generic over plain complex scalars and jets.

use std::ops::{Add, Mul, Neg, Sub};

use crate::cx::{self, Cx, ONE, ZERO};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Relative threshold below which a bilinear norm counts as isotropic.
pub const ISOTROPY_TOL: f64 = 1e-10;
/// Relative threshold below which a determinant counts as singular.
pub const SINGULARITY_TOL: f64 = 1e-12;

pub trait Scalar: Clone + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn value(&self) -> Cx;
    /// A constant with the same shape as `self`.
    fn lift(&self, c: Cx) -> Self;
    fn scaled(&self, c: Cx) -> Self;
    fn try_recip(&self) -> Result<Self>;
    fn try_sqrt(&self) -> Result<Self>;
}

impl Scalar for Cx {
    fn value(&self) -> Cx {
        *self
    }
    fn lift(&self, c: Cx) -> Self {
        c
    }
    fn scaled(&self, c: Cx) -> Self {
        self * c
    }
    fn try_recip(&self) -> Result<Self> {
        if *self == ZERO {
            return Err(Error::domain("reciprocal", *self, "division by zero"));
        }
        Ok(ONE / self)
    }
    fn try_sqrt(&self) -> Result<Self> {
        Ok(cx::sqrt(*self))
    }
}

impl Scalar for Jet {
    fn value(&self) -> Cx {
        Jet::value(self)
    }
    fn lift(&self, c: Cx) -> Self {
        self.constant_like(c)
    }
    fn scaled(&self, c: Cx) -> Self {
        self.clone().scale(c)
    }
    fn try_recip(&self) -> Result<Self> {
        self.recip()
    }
    fn try_sqrt(&self) -> Result<Self> {
        self.sqrt_local()
    }
}

/// `xᵀy`.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len());
    let mut acc = x[0].clone() * y[0].clone();
    for (a, b) in x.iter().zip(y).skip(1) {
        acc = acc + a.clone() * b.clone();
    }
    acc
}

fn hermitian_sq<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.value().norm_sqr()).sum()
}

/// Gram–Schmidt under the bilinear form, in input order, without pivoting.
///
/// Fails with [`Error::Degenerate`] when an intermediate vector is isotropic
/// relative to its Hermitian size.
pub fn orthonormalize_bilinear<T: Scalar>(vs: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(vs.len());
    for (i, v) in vs.iter().enumerate() {
        let mut w = v.clone();
        for e in &out {
            let c = dot(&w, e);
            for (wk, ek) in w.iter_mut().zip(e) {
                *wk = wk.clone() - c.clone() * ek.clone();
            }
        }
        let n2 = dot(&w, &w);
        let scale = hermitian_sq(&w);
        if scale == 0.0 || n2.value().norm() < ISOTROPY_TOL * scale {
            return Err(Error::Degenerate(format!(
                "vector {i} is isotropic after projection (|wᵀw| = {:e}, |w|² = {:e})",
                n2.value().norm(),
                scale
            )));
        }
        let inv = n2.try_sqrt()?.try_recip()?;
        out.push(w.into_iter().map(|x| x * inv.clone()).collect());
    }
    Ok(out)
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> SquareMat<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMat { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> SquareMat<U> {
        SquareMat {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }
}

impl<T: Scalar> SquareMat<T> {
    pub fn values(&self) -> SquareMat<Cx> {
        self.map(|x| x.value())
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(m: &SquareMat<Cx>) -> Cx {
    let n = m.dim();
    let mut a = m.clone();
    let mut d = ONE;
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a.at(i, col).norm().total_cmp(&a.at(j, col).norm()))
            .unwrap();
        if *a.at(p, col) == ZERO {
            return ZERO;
        }
        if p != col {
            for k in 0..n {
                a.data.swap(p * n + k, col * n + k);
            }
            d = -d;
        }
        let piv = *a.at(col, col);
        d *= piv;
        for r in col + 1..n {
            let f = *a.at(r, col) / piv;
            for k in col..n {
                let v = *a.at(r, k) - f * a.at(col, k);
                a.set(r, k, v);
            }
        }
    }
    d
}

/// Numerical rank: pivots below `rel_tol` times the largest entry are zero.
pub fn rank(m: &[Vec<Cx>], rel_tol: f64) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<Cx>> = m.to_vec();
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if a[p][c].norm() <= rel_tol * scale {
            continue;
        }
        a.swap(p, r);
        for i in r + 1..rows {
            let f = a[i][c] / a[r][c];
            let pivot = a[r].clone();
            for (x, v) in a[i][c..cols].iter_mut().zip(&pivot[c..cols]) {
                *x -= f * v;
            }
        }
        r += 1;
    }
    r
}

/// Product of the row 2-norms, the Hadamard bound on `|det|`.
pub fn hadamard_bound(m: &SquareMat<Cx>) -> f64 {
    let n = m.dim();
    (0..n).map(|r| (0..n).map(|c| m.at(r, c).norm_sqr()).sum::<f64>().sqrt()).product()
}

/// Inverse by Gauss–Jordan elimination with partial pivoting on the value
/// part. Fails when `|det| < SINGULARITY_TOL` times the Hadamard bound.
pub fn invert<T: Scalar>(m: &SquareMat<T>) -> Result<SquareMat<T>> {
    let n = m.dim();
    let vals = m.values();
    let scale = hadamard_bound(&vals);
    let d = det(&vals);
    if scale == 0.0 || d.norm() < SINGULARITY_TOL * scale {
        return Err(Error::Degenerate(format!(
            "matrix is numerically singular (|det| = {:e}, row-norm product {:e})",
            d.norm(),
            scale
        )));
    }
    let proto = m.at(0, 0);
    let mut a = m.clone();
    let mut inv = SquareMat::from_fn(n, |i, j| proto.lift(if i == j { ONE } else { ZERO }));
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a.at(i, col).value().norm().total_cmp(&a.at(j, col).value().norm()))
            .unwrap();
        if p != col {
            for k in 0..n {
                a.data.swap(p * n + k, col * n + k);
                inv.data.swap(p * n + k, col * n + k);
            }
        }
        let pinv = a.at(col, col).try_recip()?;
        for k in 0..n {
            a.set(col, k, a.at(col, k).clone() * pinv.clone());
            inv.set(col, k, inv.at(col, k).clone() * pinv.clone());
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a.at(r, col).clone();
            for k in 0..n {
                a.set(r, k, a.at(r, k).clone() - f.clone() * a.at(col, k).clone());
                inv.set(r, k, inv.at(r, k).clone() - f.clone() * inv.at(col, k).clone());
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::{cx, I};

    #[test]
    fn gram_schmidt_e1_e1_plus_e2() {
        let v = vec![vec![ONE, ZERO, ZERO], vec![ONE, ONE, ZERO]];
        let f = orthonormalize_bilinear(&v).unwrap();
        assert_eq!(f[0], vec![ONE, ZERO, ZERO]);
        assert!((f[1][0]).norm() < 1e-15 && (f[1][1] - ONE).norm() < 1e-15);
    }

    #[test]
    fn isotropic_input_is_rejected() {
        let v = vec![vec![ONE, I, ZERO]];
        assert!(matches!(orthonormalize_bilinear(&v), Err(Error::Degenerate(_))));
    }

    #[test]
    fn invert_and_det() {
        let m = SquareMat::from_fn(3, |i, j| {
            cx((i * 3 + j) as f64 + if i == j { 5.0 } else { 0.0 }, (i as f64) - (j as f64))
        });
        let inv = invert(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = ZERO;
                for k in 0..3 {
                    s += m.at(i, k) * inv.at(k, j);
                }
                let e = if i == j { ONE } else { ZERO };
                assert!((s - e).norm() < 1e-13);
            }
        }
        let two = SquareMat::from_fn(2, |i, j| cx([[1.0, 2.0], [3.0, 4.0]][i][j], 0.0));
        assert!((det(&two) - cx(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_degenerate() {
        let m = SquareMat::from_fn(2, |_, _| ONE);
        assert!(matches!(invert(&m), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = vec![vec![ONE, I], vec![cx(2.0, 0.0), cx(0.0, 2.0)], vec![ZERO, ONE]];
        assert_eq!(rank(&m, 1e-12), 2);
    }
}
