//! Small dense complex linear algebra: LU with partial pivoting, used for
//! decoder head inversion and Kronecker factor inversion. Matrices are
//! row-major `Vec<Complex64>` with explicit dimension; sizes here are at most
//! a few hundred, so no blocking is needed.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
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
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        CMat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    *out.at_mut(i, j) += a * other.at(k, j);
                }
            }
        }
        out
    }
}

/// LU factorization with partial pivoting of a square matrix.
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

pub fn lu_decompose(a: &CMat) -> Result<Lu> {
    if a.rows != a.cols {
        return Err(Error::InvalidDimension("LU needs a square matrix".into()));
    }
    let n = a.rows;
    let mut lu = a.data.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = lu[k * n + k].norm_sqr();
        for i in (k + 1)..n {
            let v = lu[i * n + k].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::Singular("zero pivot in LU".into()));
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            piv.swap(k, p);
        }
        let pivot = lu[k * n + k];
        for i in (k + 1)..n {
            let f = lu[i * n + k] / pivot;
            lu[i * n + k] = f;
            for j in (k + 1)..n {
                let v = lu[k * n + j];
                lu[i * n + j] -= f * v;
            }
        }
    }
    Ok(Lu { n, lu, piv })
}

impl Lu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> CMat {
        let n = self.n;
        let mut inv = CMat::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            e[j] = Complex64::new(0.0, 0.0);
            for i in 0..n {
                *inv.at_mut(i, j) = col[i];
            }
        }
        inv
    }

    pub fn det(&self) -> Complex64 {
        let n = self.n;
        let mut det = Complex64::new(1.0, 0.0);
        for i in 0..n {
            det *= self.lu[i * n + i];
        }
        // Count the permutation parity from the pivot vector.
        let mut perm = self.piv.clone();
        let mut swaps = 0usize;
        for i in 0..n {
            while perm[i] != i {
                let t = perm[i];
                perm.swap(i, t);
                swaps += 1;
            }
        }
        if swaps % 2 == 1 {
            -det
        } else {
            det
        }
    }
}

/// If the columns of `a` satisfy A* A = c I within `tol` (relative), return
/// the common squared column norm `c`.
pub fn scaled_unitary_constant(a: &CMat, tol: f64) -> Option<f64> {
    let n = a.cols;
    let mut c = 0.0f64;
    for j in 0..n {
        let mut norm = 0.0;
        for i in 0..a.rows {
            norm += a.at(i, j).norm_sqr();
        }
        if j == 0 {
            c = norm;
            if c == 0.0 {
                return None;
            }
        } else if (norm - c).abs() > tol * c {
            return None;
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..a.rows {
                dot += a.at(i, j).conj() * a.at(i, k);
            }
            if dot.norm() > tol * c {
                return None;
            }
        }
    }
    Some(c)
}
