use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// An integer row vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVector(pub Vec<BigInt>);

impl IntVector {
    pub fn zero(dim: usize) -> Self {
        IntVector(vec![BigInt::zero(); dim])
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        IntVector(values.iter().map(|&v| BigInt::from(v)).collect())
    }

    /// The `i`-th standard basis vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn add(&self, other: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &BigInt) -> IntVector {
        IntVector(self.0.iter().map(|a| a * c).collect())
    }

    /// Right action `xQ`.
    pub fn mul_matrix(&self, q: &IntMatrix) -> IntVector {
        debug_assert_eq!(self.dim(), q.dim());
        let m = q.dim();
        let mut out = vec![BigInt::zero(); m];
        for (x, row) in self.0.iter().zip(&q.rows) {
            if x.is_zero() {
                continue;
            }
            for (o, e) in out.iter_mut().zip(row) {
                *o += x * e;
            }
        }
        IntVector(out)
    }

    /// `xQ^n` by repeated application.
    pub fn mul_matrix_pow(&self, q: &IntMatrix, n: u64) -> IntVector {
        let mut x = self.clone();
        for _ in 0..n {
            x = x.mul_matrix(q);
        }
        x
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// A square integer matrix acting on row vectors from the right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let m = rows.len();
        for r in &rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: r.len(),
                });
            }
        }
        Ok(IntMatrix { rows })
    }

    /// Panics unless `rows` is square; meant for literals in tests.
    pub fn from_i64s(rows: &[&[i64]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        Self::new(rows).expect("square matrix literal")
    }

    pub fn identity(m: usize) -> Self {
        let rows = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        IntMatrix { rows }
    }

    pub fn zero(m: usize) -> Self {
        IntMatrix {
            rows: vec![vec![BigInt::zero(); m]; m],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> IntVector {
        IntVector(self.rows[i].clone())
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        IntMatrix {
            rows: mat_mul(&self.rows, &other.rows, other.dim()),
        }
    }

    /// `Q^n` by binary exponentiation.
    pub fn pow(&self, mut n: u64) -> IntMatrix {
        let mut result = IntMatrix::identity(self.dim());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `Q − I`.
    pub fn minus_identity(&self) -> IntMatrix {
        let mut rows = self.rows.clone();
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] -= BigInt::one();
        }
        IntMatrix { rows }
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.dim())
    }

    /// Exact determinant (fraction-free Bareiss elimination).
    pub fn determinant(&self) -> BigInt {
        determinant(&self.rows)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", IntVector(r.clone()))?;
        }
        write!(f, "]")
    }
}

pub(crate) fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>], b_cols: usize) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|row| {
            let mut out = vec![BigInt::zero(); b_cols];
            for (x, brow) in row.iter().zip(b) {
                if x.is_zero() {
                    continue;
                }
                for (o, e) in out.iter_mut().zip(brow) {
                    *o += x * e;
                }
            }
            out
        })
        .collect()
}

pub(crate) fn determinant(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = rows.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}
