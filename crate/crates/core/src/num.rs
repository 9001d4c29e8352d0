//! Numeric plumbing: the [`Scalar`] bound shared by float and exact-rational
//! computations, and a small dense row-major [`Matrix`].

use std::fmt::{self, Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Rates and matrix entries. Implemented by `f64` and [`BigRational`].
pub trait Scalar: Signed + Clone + PartialOrd + Debug + Display + ToPrimitive + Send + Sync {}

impl<T> Scalar for T where T: Signed + Clone + PartialOrd + Debug + Display + ToPrimitive + Send + Sync {}

pub type Rational = BigRational;

/// Exact conversion of a finite float (every binary fraction is rational).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite rate {x}")))
}

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Debug> Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        Ok(())
    }
}

impl<R: Scalar> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![R::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = R::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &R {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: R) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: R) {
        let cell = &mut self.data[r * self.cols + c];
        *cell = cell.clone() + v;
    }

    pub fn row(&self, r: usize) -> &[R] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_at(i, j, a.clone() * b.clone());
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        })
    }

    pub fn scale(&self, k: &R) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.clone() * k.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    /// Largest absolute entry together with its position (zero matrix gives `(0, None)`).
    pub fn max_abs(&self) -> (R, Option<(usize, usize)>) {
        let mut best = R::zero();
        let mut at = None;
        for (k, v) in self.data.iter().enumerate() {
            let a = v.abs();
            if a > best {
                best = a;
                at = Some((k / self.cols, k % self.cols));
            }
        }
        (best, at)
    }

    pub fn row_sum(&self, r: usize) -> R {
        self.row(r).iter().fold(R::zero(), |acc, v| acc + v.clone())
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Dense CSV: a header row of column labels, then one row per state
    /// prefixed with its label.
    pub fn to_csv(&self, row_labels: &[String], col_labels: &[String]) -> String {
        let mut out = String::from("state");
        for l in col_labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for r in 0..self.rows {
            out.push_str(row_labels.get(r).map_or("?", String::as_str));
            for v in self.row(r) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiply_and_transpose() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = a.mul(&Matrix::identity(2)).unwrap();
        assert_eq!(a, b);
        let at = a.transpose();
        assert_eq!(*at.get(0, 1), 3.0);
        let p = a.mul(&at).unwrap();
        assert_eq!(*p.get(0, 0), 5.0);
        assert_eq!(*p.get(1, 1), 25.0);
        assert!(a.mul(&Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn exact_rationals() {
        let third = rational(1, 3);
        let m = Matrix::from_rows(vec![vec![third.clone(), third.clone(), third]]).unwrap();
        assert_eq!(m.row_sum(0), rational(1, 1));
        assert_eq!(rational_from_f64(0.25).unwrap(), rational(1, 4));
    }

    #[test]
    fn csv_layout() {
        let m = Matrix::from_rows(vec![vec![-1.0, 1.0], vec![0.5, -0.5]]).unwrap();
        let labels = vec!["a".to_string(), "b".to_string()];
        assert_eq!(m.to_csv(&labels, &labels), "state,a,b\na,-1,1\nb,0.5,-0.5\n");
    }
}
