//! Hermite and Smith normal forms over arbitrary-precision integers, and the
//! canonical lattice types built on them.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{determinant, mat_mul, IntMatrix, IntVector};
use crate::error::{Error, Result};

/// Row-style Hermite form together with the unimodular transform `U`
/// satisfying `U·A = H`.
#[derive(Debug, Clone)]
pub(crate) struct RowEchelon {
    pub h: Vec<Vec<BigInt>>,
    pub u: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
}

impl RowEchelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn identity_rows(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

/// `rows[target] -= q * rows[source]`.
fn row_sub(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let (t, s) = if target < source {
        let (lo, hi) = rows.split_at_mut(source);
        (&mut lo[target], &hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(target);
        (&mut hi[0], &lo[source])
    };
    for (a, b) in t.iter_mut().zip(s.iter()) {
        *a -= q * b;
    }
}

fn row_negate(row: &mut [BigInt]) {
    for a in row.iter_mut() {
        *a = -std::mem::take(a);
    }
}

/// Row-echelon Hermite form: positive pivots, entries above each pivot
/// reduced into `[0, pivot)`, zero rows last.
pub(crate) fn row_hnf(mut a: Vec<Vec<BigInt>>, ncols: usize) -> RowEchelon {
    let m = a.len();
    let mut u = identity_rows(m);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == m {
            break;
        }
        loop {
            let best = (r..m)
                .filter(|&i| !a[i][col].is_zero())
                .min_by(|&i, &j| a[i][col].abs().cmp(&a[j][col].abs()));
            let Some(best) = best else { break };
            a.swap(r, best);
            u.swap(r, best);
            let mut clean = true;
            for i in r + 1..m {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_floor(&a[r][col]);
                row_sub(&mut a, i, r, &q);
                row_sub(&mut u, i, r, &q);
                if !a[i][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if a[r][col].is_zero() {
            continue;
        }
        if a[r][col].is_negative() {
            row_negate(&mut a[r]);
            row_negate(&mut u[r]);
        }
        for i in 0..r {
            let q = a[i][col].div_floor(&a[r][col]);
            row_sub(&mut a, i, r, &q);
            row_sub(&mut u, i, r, &q);
        }
        pivots.push(col);
        r += 1;
    }
    RowEchelon { h: a, u, pivots }
}

/// Canonical basis of a sublattice of `Z^m`, stored in Hermite normal form.
///
/// Equal lattices have identical stored bases, so `==` is lattice equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeBasis {
    ambient_dim: usize,
    rows: Vec<IntVector>,
    pivots: Vec<usize>,
}

/// Canonical basis of the lattice generated by `vectors` in `Z^dim`.
pub fn hermite_normal_form(vectors: &[IntVector], dim: usize) -> Result<LatticeBasis> {
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
    }
    let rows = vectors.iter().map(|v| v.0.clone()).collect();
    Ok(LatticeBasis::from_echelon(row_hnf(rows, dim), dim))
}

impl LatticeBasis {
    fn from_echelon(e: RowEchelon, dim: usize) -> Self {
        let rank = e.rank();
        let rows = e.h.into_iter().take(rank).map(IntVector).collect();
        LatticeBasis {
            ambient_dim: dim,
            rows,
            pivots: e.pivots,
        }
    }

    pub(crate) fn from_rows(rows: Vec<Vec<BigInt>>, dim: usize) -> Self {
        LatticeBasis::from_echelon(row_hnf(rows, dim), dim)
    }

    pub fn zero(dim: usize) -> Self {
        LatticeBasis {
            ambient_dim: dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        LatticeBasis {
            ambient_dim: dim,
            rows: (0..dim).map(|i| IntVector::unit(dim, i)).collect(),
            pivots: (0..dim).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[IntVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.ambient_dim
    }

    /// `[Z^m : L]` for a full-rank lattice.
    pub fn index(&self) -> Option<BigInt> {
        self.is_full_rank().then(|| {
            self.rows
                .iter()
                .zip(&self.pivots)
                .map(|(r, &p)| r.0[p].clone())
                .product()
        })
    }

    /// Canonical representative of `v + L`: each pivot coordinate lands in
    /// `[0, pivot)`.
    pub fn reduce(&self, v: &IntVector) -> IntVector {
        let mut out = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let q = out.0[p].div_floor(&row.0[p]);
            if !q.is_zero() {
                for (o, r) in out.0.iter_mut().zip(&row.0) {
                    *o -= &q * r;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &IntVector) -> bool {
        v.dim() == self.ambient_dim && self.reduce(v).is_zero()
    }

    pub fn is_sublattice_of(&self, other: &LatticeBasis) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }
}

impl fmt::Display for LatticeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "]")
    }
}

/// A translate `offset + L` with the offset reduced to its canonical
/// representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineLattice {
    offset: IntVector,
    lattice: LatticeBasis,
}

impl AffineLattice {
    pub fn new(offset: IntVector, lattice: LatticeBasis) -> Result<Self> {
        if offset.dim() != lattice.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: lattice.ambient_dim(),
                found: offset.dim(),
            });
        }
        let offset = lattice.reduce(&offset);
        Ok(AffineLattice { offset, lattice })
    }

    pub fn offset(&self) -> &IntVector {
        &self.offset
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    pub fn contains(&self, v: &IntVector) -> bool {
        v.dim() == self.offset.dim() && self.lattice.contains(&v.sub(&self.offset))
    }

    pub fn is_subset_of(&self, other: &AffineLattice) -> bool {
        self.lattice.is_sublattice_of(&other.lattice) && other.contains(&self.offset)
    }
}

impl fmt::Display for AffineLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}", self.offset, self.lattice)
    }
}

/// `U·A·V = D` with `U`, `V` unimodular and `D` diagonal with `d_i | d_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfDecomposition {
    /// Diagonal of `D`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.dim()).map(|i| self.d.entry(i, i).clone()).collect()
    }

    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.invariant_factors().iter().filter(|d| !d.is_zero()).count()
    }
}

pub(crate) struct RectSnf {
    pub u: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

fn col_sub(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for r in rows.iter_mut() {
        let s = r[source].clone();
        r[target] -= q * s;
    }
}

fn col_swap(rows: &mut [Vec<BigInt>], a: usize, b: usize) {
    for r in rows.iter_mut() {
        r.swap(a, b);
    }
}

pub(crate) fn snf_rect(mut a: Vec<Vec<BigInt>>, ncols: usize) -> RectSnf {
    let m = a.len();
    let n = ncols;
    let mut u = identity_rows(m);
    let mut v = identity_rows(n);
    for t in 0..m.min(n) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return RectSnf { u, d: a, v };
            };
            a.swap(t, pi);
            u.swap(t, pi);
            col_swap(&mut a, t, pj);
            col_swap(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..m {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                row_sub(&mut a, i, t, &q);
                row_sub(&mut u, i, t, &q);
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                col_sub(&mut a, j, t, &q);
                col_sub(&mut v, j, t, &q);
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..m).find(|&i| (t + 1..n).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match offender {
                Some(i) => {
                    // Pull the offending row up; the next round shrinks the pivot.
                    let minus_one = -BigInt::one();
                    row_sub(&mut a, t, i, &minus_one);
                    row_sub(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if a[t][t].sign() == Sign::Minus {
            row_negate(&mut a[t]);
            row_negate(&mut u[t]);
        }
    }
    RectSnf { u, d: a, v }
}

/// Smith normal form of a square integer matrix.
pub fn smith_normal_form(a: &IntMatrix) -> SnfDecomposition {
    let m = a.dim();
    let RectSnf { u, d, v } = snf_rect(a.rows().to_vec(), m);
    let out = SnfDecomposition {
        u: IntMatrix::new(u).expect("square"),
        d: IntMatrix::new(d).expect("square"),
        v: IntMatrix::new(v).expect("square"),
    };
    debug_assert!(check_snf(a, &out).is_ok(), "{:?}", check_snf(a, &out));
    out
}

/// Verifies the Smith decomposition contract.
pub fn check_snf(a: &IntMatrix, snf: &SnfDecomposition) -> std::result::Result<(), String> {
    let m = a.dim();
    let uav = mat_mul(&mat_mul(snf.u.rows(), a.rows(), m), snf.v.rows(), m);
    if uav != snf.d.rows() {
        return Err("U·A·V != D".into());
    }
    for i in 0..m {
        for j in 0..m {
            if i != j && !snf.d.entry(i, j).is_zero() {
                return Err(format!("D has off-diagonal entry at ({i},{j})"));
            }
        }
    }
    let diag = snf.invariant_factors();
    if diag.iter().any(|d| d.is_negative()) {
        return Err("negative invariant factor".into());
    }
    for w in diag.windows(2) {
        let ok = if w[0].is_zero() {
            w[1].is_zero()
        } else {
            w[1].is_multiple_of(&w[0])
        };
        if !ok {
            return Err(format!("divisibility chain broken: {} then {}", w[0], w[1]));
        }
    }
    for (name, mat) in [("U", &snf.u), ("V", &snf.v)] {
        if determinant(mat.rows()).abs() != BigInt::one() {
            return Err(format!("{name} is not unimodular"));
        }
    }
    Ok(())
}
