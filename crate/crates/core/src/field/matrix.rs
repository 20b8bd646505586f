//! Small dense matrices over a [`Field`].

use std::fmt;

use super::tower::Field;

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<T: Field> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn filled(rows: usize, cols: usize, v: &T) -> Self {
        Self::from_fn(rows, cols, |_, _| v.clone())
    }

    pub fn zeros_like(rows: usize, cols: usize, proto: &T) -> Self {
        Self::filled(rows, cols, &proto.zero_like())
    }

    pub fn identity_like(n: usize, proto: &T) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { proto.one_like() } else { proto.zero_like() })
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

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<U: Field, E>(&self, f: impl Fn(&T) -> Result<U, E>) -> Result<Matrix<U>, E> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Field::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        Self::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = self.get(i, 0).zero_like();
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = o.get(k, j);
                if !Field::is_zero(a) && !Field::is_zero(b) {
                    acc = acc.add(&a.mul(b));
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].zero_like();
                for k in 0..self.cols {
                    if !Field::is_zero(self.get(i, k)) && !Field::is_zero(&v[k]) {
                        acc = acc.add(&self.get(i, k).mul(&v[k]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> T {
        assert!(self.is_square());
        let mut acc = self.data[0].zero_like();
        for i in 0..self.rows {
            acc = acc.add(self.get(i, i));
        }
        acc
    }

    /// Row-reduce `[self | rhs]`; returns the solution of `self·X = rhs`, or
    /// `None` if `self` is singular.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        assert!(self.is_square() && rhs.rows == self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let piv = (col..n).find(|&r| !Field::is_zero(a.get(r, col)))?;
            if piv != col {
                a.swap_rows(piv, col);
                b.swap_rows(piv, col);
            }
            let inv = a.get(col, col).inv()?;
            for j in 0..n {
                let v = a.get(col, j).mul(&inv);
                a.set(col, j, v);
            }
            for j in 0..b.cols {
                let v = b.get(col, j).mul(&inv);
                b.set(col, j, v);
            }
            for r in 0..n {
                if r == col || Field::is_zero(a.get(r, col)) {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    let v = a.get(r, j).sub(&f.mul(a.get(col, j)));
                    a.set(r, j, v);
                }
                for j in 0..b.cols {
                    let v = b.get(r, j).sub(&f.mul(b.get(col, j)));
                    b.set(r, j, v);
                }
            }
        }
        Some(b)
    }

    pub fn inverse(&self) -> Option<Self> {
        let id = Self::identity_like(self.rows, &self.data[0]);
        self.solve(&id)
    }

    pub fn det(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = self.data[0].one_like();
        for col in 0..n {
            let piv = match (col..n).find(|&r| !Field::is_zero(a.get(r, col))) {
                Some(p) => p,
                None => return det.zero_like(),
            };
            if piv != col {
                a.swap_rows(piv, col);
                det = det.neg();
            }
            let p = a.get(col, col).clone();
            det = det.mul(&p);
            let inv = p.inv().unwrap();
            for r in col + 1..n {
                if Field::is_zero(a.get(r, col)) {
                    continue;
                }
                let f = a.get(r, col).mul(&inv);
                for j in col..n {
                    let v = a.get(r, j).sub(&f.mul(a.get(col, j)));
                    a.set(r, j, v);
                }
            }
        }
        det
    }

    /// Rank by row reduction.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let piv = match (rank..self.rows).find(|&r| !Field::is_zero(a.get(r, col))) {
                Some(p) => p,
                None => continue,
            };
            a.swap_rows(piv, rank);
            let inv = a.get(rank, col).inv().unwrap();
            for r in rank + 1..self.rows {
                if Field::is_zero(a.get(r, col)) {
                    continue;
                }
                let f = a.get(r, col).mul(&inv);
                for j in col..self.cols {
                    let v = a.get(r, j).sub(&f.mul(a.get(rank, j)));
                    a.set(r, j, v);
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn m(v: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(v.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect())
    }

    #[test]
    fn inverse_and_det() {
        let a = m(&[&[2, 1], &[7, 4]]);
        assert_eq!(a.det(), BigRational::from_integer(1.into()));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), m(&[&[1, 0], &[0, 1]]));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
        assert_eq!(m(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 3]]).det(), BigRational::from_integer((-3).into()));
    }
}
