//! Image and kernel chains of an integer matrix, preimage solving and
//! periodic points.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::matrix::{IntMatrix, IntVector};
use super::normal_form::{row_hnf, snf_rect, AffineLattice, LatticeBasis};
use crate::error::{Error, Result};

fn check_dim(q: &IntMatrix, v: &IntVector) -> Result<()> {
    if v.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

/// `{xQ^n : x ∈ Z^m}`.
pub fn image_lattice(q: &IntMatrix, n: u64) -> LatticeBasis {
    let m = q.dim();
    if n == 0 {
        return LatticeBasis::full(m);
    }
    LatticeBasis::from_rows(q.pow(n).rows().to_vec(), m)
}

/// `{x : xQ^n = 0}`, always saturated.
pub fn kernel_lattice(q: &IntMatrix, n: u64) -> LatticeBasis {
    let m = q.dim();
    if n == 0 {
        return LatticeBasis::zero(m);
    }
    left_kernel(&q.pow(n))
}

/// Left kernel of `a` via the Hermite transform: the rows of `U` that map
/// onto zero rows of `H`.
pub(crate) fn left_kernel(a: &IntMatrix) -> LatticeBasis {
    let m = a.dim();
    let e = row_hnf(a.rows().to_vec(), m);
    let rank = e.rank();
    LatticeBasis::from_rows(e.u.into_iter().skip(rank).collect(), m)
}

/// Left kernel of `a` via the Smith transform. Independent of
/// [`left_kernel`]; the two are cross-checked in tests.
pub fn left_kernel_snf(a: &IntMatrix) -> LatticeBasis {
    let m = a.dim();
    let snf = snf_rect(a.rows().to_vec(), m);
    let rank = (0..m).filter(|&i| !snf.d[i][i].is_zero()).count();
    LatticeBasis::from_rows(snf.u.into_iter().skip(rank).collect(), m)
}

/// Full solution set of `xQ^n = y`, or `None` when `y ∉ Im(Q^n)`.
pub fn solve_preimage(q: &IntMatrix, n: u64, y: &IntVector) -> Result<Option<AffineLattice>> {
    check_dim(q, y)?;
    let m = q.dim();
    let a = q.pow(n);
    // U·A·V = D, so xA = y  ⇔  (xU⁻¹)·D = y·V.
    let snf = snf_rect(a.rows().to_vec(), m);
    let v = IntMatrix::new(snf.v).expect("square");
    let yv = y.mul_matrix(&v);
    let mut z = vec![BigInt::zero(); m];
    for i in 0..m {
        let d = &snf.d[i][i];
        if d.is_zero() {
            if !yv.0[i].is_zero() {
                return Ok(None);
            }
        } else {
            let (quot, rem) = yv.0[i].div_rem(d);
            if !rem.is_zero() {
                return Ok(None);
            }
            z[i] = quot;
        }
    }
    let rank = (0..m).filter(|&i| !snf.d[i][i].is_zero()).count();
    let u = IntMatrix::new(snf.u).expect("square");
    let offset = IntVector(z).mul_matrix(&u);
    debug_assert_eq!(&offset.mul_matrix(&a), y);
    let kernel = LatticeBasis::from_rows(u.rows()[rank..].to_vec(), m);
    Ok(Some(AffineLattice::new(offset, kernel)?))
}

/// Full solution set of `xQ^n ∈ target`, or `None` when it is empty.
pub fn solve_affine_preimage(q: &IntMatrix, n: u64, target: &AffineLattice) -> Result<Option<AffineLattice>> {
    check_dim(q, target.offset())?;
    let m = q.dim();
    let basis = target.lattice().rows();
    let r = basis.len();
    if r == 0 {
        return solve_preimage(q, n, target.offset());
    }
    // Solve (x, c)·[Q^n; −B] = offset in Z^{m+r}, then project onto x.
    let a = q.pow(n);
    let cols = m;
    let mut stacked: Vec<Vec<BigInt>> = a.rows().to_vec();
    for b in basis {
        stacked.push(b.0.iter().map(|e| -e).collect());
    }
    let rows = m + r;
    let snf = snf_rect(stacked, cols);
    // (x,c)·U⁻¹·D = offset·V with D of shape rows × cols.
    let yv: Vec<BigInt> = {
        let mut out = vec![BigInt::zero(); cols];
        for (yi, vrow) in target.offset().0.iter().zip(&snf.v) {
            for (o, e) in out.iter_mut().zip(vrow) {
                *o += yi * e;
            }
        }
        out
    };
    let diag_len = rows.min(cols);
    let mut z = vec![BigInt::zero(); rows];
    for j in 0..cols {
        let d = if j < diag_len { snf.d[j][j].clone() } else { BigInt::zero() };
        if d.is_zero() {
            if !yv[j].is_zero() {
                return Ok(None);
            }
        } else {
            let (quot, rem) = yv[j].div_rem(&d);
            if !rem.is_zero() {
                return Ok(None);
            }
            z[j] = quot;
        }
    }
    let rank = (0..diag_len).filter(|&i| !snf.d[i][i].is_zero()).count();
    let combine = |coeffs: &[BigInt]| -> IntVector {
        let mut out = vec![BigInt::zero(); m];
        for (c, urow) in coeffs.iter().zip(&snf.u) {
            if c.is_zero() {
                continue;
            }
            for (o, e) in out.iter_mut().zip(&urow[..m]) {
                *o += c * e;
            }
        }
        IntVector(out)
    };
    let offset = combine(&z);
    let kernel_rows: Vec<Vec<BigInt>> = snf.u[rank..].iter().map(|row| row[..m].to_vec()).collect();
    let kernel = LatticeBasis::from_rows(kernel_rows, m);
    let sol = AffineLattice::new(offset, kernel)?;
    debug_assert!(target.contains(&sol.offset().mul_matrix(&a)));
    Ok(Some(sol))
}

/// Least `k ≤ m` with `rank Im(Q^k) = rank Im(Q^{k+1})`.
pub fn stabilization_index(q: &IntMatrix) -> u64 {
    let m = q.dim();
    let mut power = IntMatrix::identity(m);
    let mut prev_rank = m;
    for k in 0..=m as u64 {
        power = power.mul(q);
        let rank = row_hnf(power.rows().to_vec(), m).rank();
        if rank == prev_rank {
            return k;
        }
        prev_rank = rank;
    }
    unreachable!("rank sequence of length m+2 must repeat")
}

/// Whether `Q` restricted to `Im(Q^j)` is injective, decided as
/// `Ker(Q^j) = Ker(Q^{j+1})` through the ranks of the two nested saturated
/// kernels.
pub fn restriction_injective(q: &IntMatrix, j: u64) -> bool {
    kernel_lattice(q, j).rank() == kernel_lattice(q, j + 1).rank()
}

fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

/// Least common multiple of the orders of all finite subgroups of
/// `GL_m(Q)`: `∏_p p^{⌊m/(p−1)⌋ + ⌊m/(p(p−1))⌋ + ⌊m/(p²(p−1))⌋ + ⋯}`.
pub fn minkowski_bound(m: usize) -> BigUint {
    let m = m as u64;
    let mut out = BigUint::from(1u32);
    for p in primes_up_to(m + 1) {
        let mut exponent = 0u64;
        let mut denom = p - 1;
        while denom <= m {
            exponent += m / denom;
            denom *= p;
        }
        out *= BigUint::from(p).pow(exponent as u32);
    }
    out
}

fn minkowski_u64(m: usize) -> Result<u64> {
    minkowski_bound(m)
        .to_u64()
        .ok_or_else(|| Error::Unsupported(format!("Minkowski bound for dimension {m} exceeds u64")))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `Per(Q) = {x : xQ^{M_m} = x}`.
pub fn periodic_lattice(q: &IntMatrix) -> Result<LatticeBasis> {
    let bound = minkowski_u64(q.dim())?;
    Ok(left_kernel(&q.pow(bound).minus_identity()))
}

/// Least `d ≥ 1` with `hQ^d = h`, if `h` is periodic. The period divides
/// the Minkowski bound.
pub fn is_periodic(q: &IntMatrix, h: &IntVector) -> Result<Option<u64>> {
    check_dim(q, h)?;
    let bound = minkowski_u64(q.dim())?;
    if h.mul_matrix(&q.pow(bound)) != *h {
        return Ok(None);
    }
    let mut d = bound;
    for p in prime_factors(bound) {
        while d % p == 0 && h.mul_matrix(&q.pow(d / p)) == *h {
            d /= p;
        }
    }
    Ok(Some(d))
}
