//! Dense matrices with exact elimination.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{CanonError, Result};
use crate::scalar::Ring;

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Ring> Matrix<T> {
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

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(CanonError::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Matrix with column `j` removed.
    pub fn without_column(&self, j: usize) -> Self {
        let mut data = Vec::with_capacity(self.rows * (self.cols - 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c != j {
                    data.push(self[(r, c)].clone());
                }
            }
        }
        Matrix {
            rows: self.rows,
            cols: self.cols - 1,
            data,
        }
    }

    /// Matrix with column `j` replaced by `v`.
    pub fn with_column(&self, j: usize, v: &[T]) -> Self {
        let mut m = self.clone();
        for r in 0..self.rows {
            m[(r, j)] = v[r].clone();
        }
        m
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Determinant by fraction-free (Bareiss) elimination.
///
/// Every division is exact in an integral domain, so this is exact for
/// `i64` (absent overflow), `BigInt` and `BigRational`.
pub fn bareiss_det<T: Ring>(m: &Matrix<T>) -> Result<T> {
    if m.rows != m.cols {
        return Err(CanonError::NotSquare(m.rows, m.cols));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(T::one());
    }
    let mut a = m.clone();
    let mut sign_flip = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            match (k + 1..n).find(|&r| !a[(r, k)].is_zero()) {
                Some(r) => {
                    a.swap_rows(k, r);
                    sign_flip = !sign_flip;
                }
                None => return Ok(T::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (a[(i, j)].clone() * a[(k, k)].clone()
                    - a[(i, k)].clone() * a[(k, j)].clone())
                    / prev.clone();
                a[(i, j)] = v;
            }
        }
        prev = a[(k, k)].clone();
    }
    let d = a[(n - 1, n - 1)].clone();
    Ok(if sign_flip { -d } else { d })
}

/// Fixed-size Bareiss determinant on `i64`, allocation free, for hot loops.
pub fn det_i64<const N: usize>(mut a: [[i64; N]; N]) -> i64 {
    if N == 0 {
        return 1;
    }
    let mut sign = 1i64;
    let mut prev = 1i64;
    for k in 0..N - 1 {
        if a[k][k] == 0 {
            match (k + 1..N).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..N {
            for j in k + 1..N {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[N - 1][N - 1]
}

/// Unique solution of `A x = b` by Cramer's rule.
pub fn cramer_solve(a: &Matrix<BigRational>, b: &[BigRational]) -> Result<Vec<BigRational>> {
    if a.rows != a.cols {
        return Err(CanonError::NotSquare(a.rows, a.cols));
    }
    if b.len() != a.rows {
        return Err(CanonError::Dimension("right-hand side length".into()));
    }
    let det = bareiss_det(a)?;
    if det.is_zero() {
        return Err(CanonError::Singular);
    }
    (0..a.cols)
        .map(|j| Ok(bareiss_det(&a.with_column(j, b))? / &det))
        .collect()
}

/// Hadamard's bound `prod_i ||row_i||`, kept as its exact square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardBound<T> {
    pub squared: T,
    pub row_norms_sq: Vec<T>,
}

impl<T: Ring + PartialOrd> HadamardBound<T> {
    /// `|det| <= bound`, decided on squares.
    pub fn dominates(&self, det: &T) -> bool {
        det.clone() * det.clone() <= self.squared
    }
}

pub fn hadamard_bound<T: Ring + PartialOrd>(m: &Matrix<T>) -> Result<HadamardBound<T>> {
    if m.rows != m.cols {
        return Err(CanonError::NotSquare(m.rows, m.cols));
    }
    let row_norms_sq: Vec<T> = (0..m.rows)
        .map(|r| {
            m.row(r)
                .iter()
                .fold(T::zero(), |acc, x| acc + x.clone() * x.clone())
        })
        .collect();
    let squared = row_norms_sq.iter().fold(T::one(), |acc, x| acc * x.clone());
    Ok(HadamardBound {
        squared,
        row_norms_sq,
    })
}

/// Reduced row echelon form over ℚ, in place; returns the pivot columns.
pub fn rref(m: &mut Matrix<BigRational>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
            continue;
        };
        m.swap_rows(row, p);
        let inv = BigRational::one() / &m[(row, col)];
        for c in col..m.cols {
            let v = &m[(row, c)] * &inv;
            m[(row, c)] = v;
        }
        for r in 0..m.rows {
            if r != row && !m[(r, col)].is_zero() {
                let f = m[(r, col)].clone();
                for c in col..m.cols {
                    let v = &m[(r, c)] - &f * &m[(row, c)];
                    m[(r, c)] = v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(m: &Matrix<BigRational>) -> usize {
    let mut c = m.clone();
    rref(&mut c).len()
}

/// Solution set of `A x = b` over ℚ: `None` when inconsistent, otherwise a
/// particular solution and a basis of the null space.
pub fn solve_affine(
    a: &Matrix<BigRational>,
    b: &[BigRational],
) -> Option<(Vec<BigRational>, Vec<Vec<BigRational>>)> {
    let n = a.cols;
    let mut aug = Matrix::zeros(a.rows, n + 1);
    for r in 0..a.rows {
        for c in 0..n {
            aug[(r, c)] = a[(r, c)].clone();
        }
        aug[(r, n)] = b[r].clone();
    }
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut particular = vec![BigRational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug[(r, n)].clone();
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -aug[(r, f)].clone();
            }
            v
        })
        .collect();
    Some((particular, basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    fn qm(rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
            .unwrap()
    }

    fn cofactor_det(m: &Matrix<BigRational>) -> BigRational {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)].clone();
        }
        let mut acc = BigRational::zero();
        for j in 0..n {
            let minor_rows: Vec<Vec<BigRational>> = (1..n)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[(r, c)].clone()).collect())
                .collect();
            let minor = Matrix::from_rows(minor_rows).unwrap();
            let term = &m[(0, j)] * cofactor_det(&minor);
            acc = if j % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(bareiss_det(&qm(&[&[1, 1], &[1, -1]])).unwrap(), int(-2));
        assert_eq!(bareiss_det(&Matrix::<BigRational>::identity(5)).unwrap(), int(1));
        assert_eq!(bareiss_det(&qm(&[&[2, -1], &[-1, 2]])).unwrap(), int(3));
        assert_eq!(bareiss_det(&qm(&[&[0, 1], &[1, 0]])).unwrap(), int(-1));
        assert!(bareiss_det(&qm(&[&[1, 2, 3]])).is_err());
        assert_eq!(det_i64([[0, 1, 0], [0, 0, 1], [1, 0, 0]]), 1);
        assert_eq!(det_i64([[2, -1], [1, 1]]), 3);
    }

    #[test]
    fn cramer_examples() {
        assert_eq!(
            cramer_solve(&qm(&[&[1, 0], &[1, -1]]), &[int(2), int(0)]).unwrap(),
            vec![int(2), int(2)]
        );
        assert_eq!(cramer_solve(&qm(&[&[2]]), &[int(1)]).unwrap(), vec![rat(1, 2)]);
        assert_eq!(
            cramer_solve(&qm(&[&[1, 1], &[1, -1]]), &[int(1), int(0)]).unwrap(),
            vec![rat(1, 2), rat(1, 2)]
        );
        let e = cramer_solve(&qm(&[&[1, 1], &[2, 2]]), &[int(1), int(0)]).unwrap_err();
        assert!(e.to_string().contains("singular"));
    }

    #[test]
    fn hadamard_examples() {
        let h = hadamard_bound(&qm(&[&[1, 1], &[1, -1]])).unwrap();
        assert_eq!(h.squared, int(4));
        assert!(h.dominates(&int(-2)));
        let h = hadamard_bound(&qm(&[&[1, 1, -1], &[0, 1, 0], &[0, 0, 1]])).unwrap();
        assert_eq!(h.row_norms_sq[0], int(3));
        let h = hadamard_bound(&Matrix::<BigRational>::identity(4)).unwrap();
        assert_eq!(h.squared, int(1));
    }

    #[test]
    fn affine_solution() {
        let (p, basis) = solve_affine(&qm(&[&[1, 1, 0]]), &[int(1)]).unwrap();
        assert_eq!(p, vec![int(1), int(0), int(0)]);
        assert_eq!(basis.len(), 2);
        assert!(solve_affine(&qm(&[&[1, 1], &[1, 1]]), &[int(1), int(2)]).is_none());
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = Matrix<BigRational>> {
        proptest::collection::vec((-9i64..=9, 1i64..=5), n * n).prop_map(move |v| {
            let rows = v.chunks(n).map(|r| r.iter().map(|&(a, b)| rat(a, b)).collect()).collect();
            Matrix::from_rows(rows).unwrap()
        })
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor(m in small_matrix(4)) {
            prop_assert_eq!(bareiss_det(&m).unwrap(), cofactor_det(&m));
        }

        #[test]
        fn cramer_solution_substitutes(m in small_matrix(3), b in proptest::collection::vec(-9i64..=9, 3)) {
            let b: Vec<BigRational> = b.into_iter().map(int).collect();
            match cramer_solve(&m, &b) {
                Ok(x) => prop_assert_eq!(m.mul_vec(&x), b),
                Err(_) => prop_assert!(bareiss_det(&m).unwrap().is_zero()),
            }
        }

        #[test]
        fn hadamard_holds(v in proptest::collection::vec(-6i64..=6, 16)) {
            let m = Matrix::from_rows(v.chunks(4).map(|r| r.to_vec()).collect()).unwrap();
            let d = bareiss_det(&m).unwrap();
            prop_assert!(hadamard_bound(&m).unwrap().dominates(&d));
        }

        #[test]
        fn fixed_size_matches_generic(v in proptest::collection::vec(-2i64..=2, 16)) {
            let m = Matrix::from_rows(v.chunks(4).map(|r| r.to_vec()).collect()).unwrap();
            let arr = [
                [v[0], v[1], v[2], v[3]],
                [v[4], v[5], v[6], v[7]],
                [v[8], v[9], v[10], v[11]],
                [v[12], v[13], v[14], v[15]],
            ];
            prop_assert_eq!(det_i64(arr), bareiss_det(&m).unwrap());
        }
    }
}
