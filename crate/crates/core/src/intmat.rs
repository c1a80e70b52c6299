//! Exact integer matrices.
//!
//! Cocycle matrices are unipotent products and stay in exact integer
//! arithmetic no matter which scalar backend drives the length data. Sizes
//! are tiny (d <= 8) but entries grow without bound along orbits, hence
//! `BigInt` throughout.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::num::{ln_bigint, Scalar};
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>, // row-major
}

impl IMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| BigInt::from(x))).collect();
        IMat { rows: r, cols: c, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> IMat {
        let mut t = IMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IMat) -> IMat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = IMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a * &rhs[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Matrix times a scalar vector; exact for exact backends.
    pub fn mul_scalar_vec<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(S::zero(), |acc, (a, x)| acc + x.mul_big(a))
            })
            .collect()
    }

    /// Row update `row dst += row src`; this is left-multiplication by the
    /// unipotent `I + E_{dst,src}`.
    pub fn add_row_to_row(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        for j in 0..self.cols {
            let v = self[(src, j)].clone();
            self[(dst, j)] += v;
        }
    }

    /// Column update `col dst -= col src`; this is right-multiplication by
    /// `I - E_{src,dst}`.
    pub fn sub_col_from_col(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        for i in 0..self.rows {
            let v = self[(i, src)].clone();
            self[(i, dst)] -= v;
        }
    }

    /// Inverse of [`IMat::add_row_to_row`].
    pub fn sub_row_from_row(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        for j in 0..self.cols {
            let v = self[(src, j)].clone();
            self[(dst, j)] -= v;
        }
    }

    /// Inverse of [`IMat::sub_col_from_col`].
    pub fn add_col_to_col(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        for i in 0..self.rows {
            let v = self[(i, src)].clone();
            self[(i, dst)] += v;
        }
    }

    pub fn is_entrywise_positive(&self) -> bool {
        self.data.iter().all(|x| x.is_positive())
    }

    pub fn norm_inf(&self) -> BigInt {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(Signed::abs).sum::<BigInt>())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn log_norm_inf(&self) -> f64 {
        let n = self.norm_inf();
        if n.is_zero() {
            f64::NEG_INFINITY
        } else {
            ln_bigint(&n)
        }
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY))
                    .collect()
            })
            .collect()
    }

    /// Exact determinant (Bareiss fraction-free elimination).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let idx = |i: usize, j: usize| i * n + j;
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[idx(k, k)].is_zero() {
                match (k + 1..n).find(|&r| !a[idx(r, k)].is_zero()) {
                    Some(r) => {
                        for j in 0..n {
                            a.swap(idx(k, j), idx(r, j));
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[idx(i, j)] * &a[idx(k, k)] - &a[idx(i, k)] * &a[idx(k, j)];
                    a[idx(i, j)] = num / &prev;
                }
                a[idx(i, k)] = BigInt::zero();
            }
            prev = a[idx(k, k)].clone();
        }
        sign * a[idx(n - 1, n - 1)].clone()
    }

    /// Exact rank over Q (fraction-free elimination).
    pub fn rank(&self) -> usize {
        let (r, c) = (self.rows, self.cols);
        let mut a: Vec<BigRational> =
            self.data.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        let idx = |i: usize, j: usize| i * c + j;
        let mut rank = 0;
        let mut row = 0;
        for col in 0..c {
            let pivot = (row..r).find(|&i| !a[idx(i, col)].is_zero());
            let Some(p) = pivot else { continue };
            for j in 0..c {
                a.swap(idx(row, j), idx(p, j));
            }
            let pv = a[idx(row, col)].clone();
            for i in row + 1..r {
                let factor = a[idx(i, col)].clone() / pv.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..c {
                    let s = a[idx(row, j)].clone() * factor.clone();
                    a[idx(i, j)] -= s;
                }
            }
            rank += 1;
            row += 1;
            if row == r {
                break;
            }
        }
        rank
    }

    /// Exact inverse of a unimodular matrix (det = +-1).
    pub fn inverse_unimodular(&self) -> Result<IMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let det = self.det();
        if det.abs() != BigInt::one() {
            return Err(Error::Internal(format!("matrix not unimodular, det = {det}")));
        }
        // Gauss-Jordan over Q; entries of the result are integers because
        // the determinant is a unit.
        let mut a: Vec<BigRational> =
            self.data.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        let mut inv: Vec<BigRational> = IMat::identity(n)
            .data
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        let idx = |i: usize, j: usize| i * n + j;
        for col in 0..n {
            let p = (col..n)
                .find(|&i| !a[idx(i, col)].is_zero())
                .ok_or_else(|| Error::Internal("singular matrix".into()))?;
            for j in 0..n {
                a.swap(idx(col, j), idx(p, j));
                inv.swap(idx(col, j), idx(p, j));
            }
            let pv = a[idx(col, col)].clone();
            for j in 0..n {
                a[idx(col, j)] /= pv.clone();
                inv[idx(col, j)] /= pv.clone();
            }
            for i in 0..n {
                if i == col || a[idx(i, col)].is_zero() {
                    continue;
                }
                let f = a[idx(i, col)].clone();
                for j in 0..n {
                    let s = a[idx(col, j)].clone() * f.clone();
                    a[idx(i, j)] -= s;
                    let s = inv[idx(col, j)].clone() * f.clone();
                    inv[idx(i, j)] -= s;
                }
            }
        }
        let data = inv
            .into_iter()
            .map(|x| {
                if x.is_integer() {
                    Ok(x.to_integer())
                } else {
                    Err(Error::Internal("non-integer inverse of unimodular matrix".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IMat { rows: n, cols: n, data })
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Basis of the integer kernel `{x in Z^d : M x = 0}` of an integer matrix,
/// via unimodular column reduction.
pub fn integer_kernel(m: &IMat) -> Vec<Vec<BigInt>> {
    let (k, d) = (m.nrows(), m.ncols());
    let mut a = m.clone();
    let mut u = IMat::identity(d);
    let mut active: Vec<usize> = (0..d).collect();

    let col_sub = |a: &mut IMat, u: &mut IMat, dst: usize, src: usize, q: &BigInt| {
        for i in 0..a.nrows() {
            let s = &a[(i, src)] * q;
            a[(i, dst)] -= s;
        }
        for i in 0..u.nrows() {
            let s = &u[(i, src)] * q;
            u[(i, dst)] -= s;
        }
    };

    let negate_col = |a: &mut IMat, u: &mut IMat, c: usize| {
        for i in 0..a.nrows() {
            let v = -a[(i, c)].clone();
            a[(i, c)] = v;
        }
        for i in 0..u.nrows() {
            let v = -u[(i, c)].clone();
            u[(i, c)] = v;
        }
    };

    for r in 0..k {
        loop {
            let nz: Vec<usize> =
                active.iter().copied().filter(|&c| !a[(r, c)].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                active.retain(|&c| c != nz[0]);
                break;
            }
            let &c0 = nz.iter().min_by_key(|&&c| a[(r, c)].abs()).unwrap();
            if a[(r, c0)].is_negative() {
                negate_col(&mut a, &mut u, c0);
            }
            let den = a[(r, c0)].clone();
            for &c in nz.iter().filter(|&&c| c != c0) {
                // rounded quotient keeps the Euclid-style reduction fast
                let num2: BigInt = &a[(r, c)] * 2 + &den;
                let den2: BigInt = &den * 2;
                let q = num2.div_floor(&den2);
                if !q.is_zero() {
                    col_sub(&mut a, &mut u, c, c0, &q);
                }
            }
        }
    }
    active.iter().map(|&c| (0..d).map(|i| u[(i, c)].clone()).collect()).collect()
}

/// Solve `K X = M` exactly for integer `X` where `K` has full column rank.
/// Used to express cocycle matrices in a lattice basis of `H(pi)`.
pub fn solve_in_lattice_basis(k: &IMat, m: &IMat) -> Result<IMat> {
    let (d, g2) = (k.nrows(), k.ncols());
    assert_eq!(m.nrows(), d);
    assert_eq!(m.ncols(), g2);
    // Row-reduce [K | M] over Q; K has rank g2, so we end with X = K^+ M.
    let mut a: Vec<BigRational> = Vec::with_capacity(d * (g2 + g2));
    for i in 0..d {
        for j in 0..g2 {
            a.push(BigRational::from_integer(k[(i, j)].clone()));
        }
        for j in 0..g2 {
            a.push(BigRational::from_integer(m[(i, j)].clone()));
        }
    }
    let w = 2 * g2;
    let idx = |i: usize, j: usize| i * w + j;
    let mut row = 0;
    for col in 0..g2 {
        let p = (row..d)
            .find(|&i| !a[idx(i, col)].is_zero())
            .ok_or_else(|| Error::Internal("lattice basis not full rank".into()))?;
        for j in 0..w {
            a.swap(idx(row, j), idx(p, j));
        }
        let pv = a[idx(row, col)].clone();
        for j in 0..w {
            a[idx(row, j)] /= pv.clone();
        }
        for i in 0..d {
            if i == row || a[idx(i, col)].is_zero() {
                continue;
            }
            let f = a[idx(i, col)].clone();
            for j in 0..w {
                let s = a[idx(row, j)].clone() * f.clone();
                a[idx(i, j)] -= s;
            }
        }
        row += 1;
    }
    // consistency: rows below the pivot block must be zero on the M side
    for i in row..d {
        for j in g2..w {
            if !a[idx(i, j)].is_zero() {
                return Err(Error::Internal("lattice solve inconsistent".into()));
            }
        }
    }
    let mut x = IMat::zeros(g2, g2);
    for i in 0..g2 {
        for j in 0..g2 {
            let v = &a[idx(i, g2 + j)];
            if !v.is_integer() {
                return Err(Error::Internal("restricted cocycle matrix not integral".into()));
            }
            x[(i, j)] = v.to_integer();
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_unimodular() {
        let m = IMat::from_i64_rows(&[vec![1, 1], vec![1, 2]]);
        assert_eq!(m.det(), BigInt::one());
        let inv = m.inverse_unimodular().unwrap();
        assert_eq!(m.mul(&inv), IMat::identity(2));

        let m3 = IMat::from_i64_rows(&[vec![2, 1, 0], vec![1, 1, 0], vec![3, 5, 1]]);
        assert_eq!(m3.det(), BigInt::one());
        let inv3 = m3.inverse_unimodular().unwrap();
        assert_eq!(inv3.mul(&m3), IMat::identity(3));
    }

    #[test]
    fn rank_of_antisymmetric() {
        let omega = IMat::from_i64_rows(&[vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0]]);
        assert_eq!(omega.rank(), 2);
        assert_eq!(IMat::identity(4).rank(), 4);
    }

    #[test]
    fn sparse_row_and_col_updates_match_products() {
        // B <- (I + E_{0,2}) B as a row update
        let b = IMat::from_i64_rows(&[vec![1, 2, 0], vec![0, 1, 1], vec![3, 0, 1]]);
        let mut upd = b.clone();
        upd.add_row_to_row(0, 2);
        let mut e = IMat::identity(3);
        e[(0, 2)] = BigInt::one();
        assert_eq!(upd, e.mul(&b));

        // X <- X (I - E_{0,2}) as a column update
        let mut upd2 = b.clone();
        upd2.sub_col_from_col(2, 0);
        let mut e2 = IMat::identity(3);
        e2[(0, 2)] = BigInt::from(-1);
        assert_eq!(upd2, b.mul(&e2));
    }

    #[test]
    fn kernel_of_singularity_vectors() {
        // b-vectors of the d=3 reversal: (1,-1,1) and (-1,1,-1)
        let m = IMat::from_i64_rows(&[vec![1, -1, 1], vec![-1, 1, -1]]);
        let ker = integer_kernel(&m);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            let s: BigInt = v[0].clone() - v[1].clone() + v[2].clone();
            assert!(s.is_zero());
        }
        // kernel of the zero map is everything
        let z = IMat::zeros(1, 4);
        assert_eq!(integer_kernel(&z).len(), 4);
    }

    #[test]
    fn lattice_solve_round_trip() {
        // K = two columns in Z^3, M = K * X0 for a known integer X0
        let k = IMat::from_i64_rows(&[vec![1, 0], vec![1, 1], vec![0, 2]]);
        let x0 = IMat::from_i64_rows(&[vec![2, -1], vec![3, 1]]);
        let m = k.mul(&x0);
        let x = solve_in_lattice_basis(&k, &m).unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn log_norm_of_huge_matrix() {
        let mut m = IMat::identity(2);
        m[(0, 1)] = BigInt::from(1) << 1000;
        let expect = 1000.0 * std::f64::consts::LN_2;
        assert!((m.log_norm_inf() - expect).abs() / expect < 1e-9);
    }
}
