//! Classification of modular-invariant partition functions.
//!
//! A physical torus partition function is a sesquilinear combination
//! `Z(tau) = sum_{M,N} Z_{MN} chi_M(tau) conj(chi_N(tau))` whose coefficient
//! matrix has nonnegative integer entries, is normalized at the vacuum
//! (`Z_{vv} = 1`), and commutes with both modular generators: `ZS = SZ` and
//! `ZT = TZ`. This module computes the real commutant of `{S, T}` by
//! null-space extraction, then enumerates every integer point of that
//! commutant inside the quantum-dimension box `Z_{ab} <= ceil(d_a d_b)`.
//!
//! The search runs over coefficients of a row-reduced rational basis of the
//! commutant rather than over raw matrix entries: the commutant dimension is
//! tiny (1-3 for the built-in data sets) while the entry count grows like the
//! rank squared.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::characters::PuiseuxSeries;
use crate::error::{Error, Result};
use crate::fusion::quantum_dimension;
use crate::linalg::{max_abs, real_nullspace, rref, snap_to_rational};
use crate::modular_data::ModularData;

/// Relative singular-value threshold separating "null" from "nonzero" when
/// extracting the commutant.
const NULLSPACE_REL_TOL: f64 = 1e-9;

/// Required ratio between the smallest kept and largest dropped singular
/// value; anything closer is reported as numerically ambiguous rank.
const RANK_GAP: f64 = 1e3;

/// Residual allowed when re-verifying that an integer candidate commutes.
const COMMUTATION_TOL: f64 = 1e-8;

/// Default hard cap on candidate evaluations during enumeration.
pub const MAX_CANDIDATES: u64 = 10_000_000;

/// A nonnegative-integer matrix commuting with S and T, normalized at the
/// vacuum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantMatrix {
    rank: usize,
    /// Row-major entries, `entries[a * rank + b] = Z_{ab}`.
    entries: Vec<u64>,
}

impl InvariantMatrix {
    /// Wrap and verify a candidate coefficient matrix: right shape,
    /// vacuum-normalized, and commuting with S and T within `tol`.
    pub fn new(md: &ModularData, entries: Vec<u64>, tol: f64) -> Result<Self> {
        let n = md.rank();
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "invariant matrix has {} entries, expected {}",
                entries.len(),
                n * n
            )));
        }
        let z = Self { rank: n, entries };
        if z.entry(md.vacuum(), md.vacuum()) != 1 {
            return Err(Error::CheckFailed {
                check: "vacuum normalization Z_vv = 1".into(),
                residual: (z.entry(md.vacuum(), md.vacuum()) as f64 - 1.0).abs(),
                tol: 0.0,
            });
        }
        let residual = z.commutation_residual(md);
        if residual > tol {
            return Err(Error::CheckFailed {
                check: "invariant commutes with S and T".into(),
                residual,
                tol,
            });
        }
        Ok(z)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, a: usize, b: usize) -> u64 {
        self.entries[a * self.rank + b]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// True when the matrix is the identity (the diagonal invariant).
    pub fn is_identity(&self) -> bool {
        (0..self.rank).all(|a| {
            (0..self.rank).all(|b| self.entry(a, b) == if a == b { 1 } else { 0 })
        })
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.rank).all(|a| (a..self.rank).all(|b| self.entry(a, b) == self.entry(b, a)))
    }

    /// The matrix as complex floats, for residual computations.
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rank, self.rank, |a, b| {
            Complex64::new(self.entry(a, b) as f64, 0.0)
        })
    }

    /// `max(|ZS - SZ|, |ZT - TZ|)` in the max-entry norm.
    pub fn commutation_residual(&self, md: &ModularData) -> f64 {
        let z = self.to_complex();
        let s = md.s();
        let t = md.t_matrix();
        let rs = max_abs(&(&z * s - s * &z));
        let rt = max_abs(&(&z * &t - &t * &z));
        rs.max(rt)
    }
}

/// Build the real linear system whose kernel is the commutant
/// `{Z real : ZS = SZ, ZT = TZ}`.
///
/// Unknowns are the `n^2` entries of `Z` in row-major order; each complex
/// matrix equation contributes `2 n^2` real rows (real and imaginary parts).
fn commutant_system(md: &ModularData) -> DMatrix<f64> {
    let n = md.rank();
    let s = md.s();
    let t = md.t_diagonal();
    let rows = 4 * n * n;
    let mut a = DMatrix::zeros(rows, n * n);
    let mut row = 0;
    // (ZS - SZ)_{pq} = sum_c Z_{pc} S_{cq} - S_{pc} Z_{cq}.
    for p in 0..n {
        for q in 0..n {
            for c in 0..n {
                a[(row, p * n + c)] += s[(c, q)].re;
                a[(row, c * n + q)] -= s[(p, c)].re;
                a[(row + 1, p * n + c)] += s[(c, q)].im;
                a[(row + 1, c * n + q)] -= s[(p, c)].im;
            }
            row += 2;
        }
    }
    // (ZT - TZ)_{pq} = Z_{pq} (T_q - T_p) for diagonal T.
    for p in 0..n {
        for q in 0..n {
            let d = t[q] - t[p];
            a[(row, p * n + q)] = d.re;
            a[(row + 1, p * n + q)] = d.im;
            row += 2;
        }
    }
    a
}

/// Singular values of the commutant system, for the rank-gap diagnostic.
fn system_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let svd = a.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// A basis of the real commutant of `{S, T}`, row-reduced and snapped to
/// small rationals.
///
/// Each returned matrix has its pivot entry equal to 1 and zeros at every
/// other basis element's pivot position, so the coefficient of a commutant
/// member along basis element `i` can be read off at pivot `i`.
pub fn commutant_basis(md: &ModularData) -> Result<Vec<DMatrix<f64>>> {
    Ok(rational_commutant_basis(md)?
        .into_iter()
        .map(|(_, m)| {
            let n = md.rank();
            DMatrix::from_fn(n, n, |a, b| m[a * n + b].to_f64().unwrap())
        })
        .collect())
}

/// Commutant basis with exact rational entries, paired with each basis
/// element's pivot position in the flattened (row-major) entry order.
fn rational_commutant_basis(md: &ModularData) -> Result<Vec<(usize, Vec<Rational64>)>> {
    let n = md.rank();
    let a = commutant_system(md);

    // Rank-gap check: the split between "zero" and "nonzero" singular values
    // must be decisive, otherwise the commutant dimension is numerically
    // ambiguous and we refuse to guess.
    let sv = system_singular_values(&a);
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let thresh = NULLSPACE_REL_TOL * sigma_max.max(1.0);
    let dropped_max = sv.iter().copied().filter(|&s| s <= thresh).fold(0.0, f64::max);
    let kept_min = sv
        .iter()
        .copied()
        .filter(|&s| s > thresh)
        .fold(f64::INFINITY, f64::min);
    if dropped_max > 0.0 && kept_min.is_finite() && kept_min / dropped_max < RANK_GAP {
        return Err(Error::CheckFailed {
            check: "commutant rank gap (smallest kept / largest dropped singular value)".into(),
            residual: kept_min / dropped_max,
            tol: RANK_GAP,
        });
    }

    let kernel = real_nullspace(&a, NULLSPACE_REL_TOL);
    if kernel.is_empty() {
        return Err(Error::CheckFailed {
            check: "commutant contains the identity".into(),
            residual: 1.0,
            tol: 0.0,
        });
    }

    // Canonicalize: rows of B span the commutant; RREF makes the basis
    // unique and exposes pivot entries.
    let dim = kernel.len();
    let mut b = DMatrix::zeros(dim, n * n);
    for (i, v) in kernel.iter().enumerate() {
        b.row_mut(i).copy_from(&v.transpose());
    }
    let pivots = rref(&mut b, 1e-9);
    if pivots.len() != dim {
        return Err(Error::CheckFailed {
            check: "commutant basis row reduction preserves dimension".into(),
            residual: (dim - pivots.len()) as f64,
            tol: 0.0,
        });
    }

    let mut out = Vec::with_capacity(dim);
    for (i, &piv) in pivots.iter().enumerate() {
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n * n {
            let x = b[(i, j)];
            match snap_to_rational(x, 1_000_000, 1e-9) {
                Some((p, q)) => entries.push(Rational64::new(p, q)),
                None => {
                    return Err(Error::CheckFailed {
                        check: format!(
                            "commutant basis entry at flat index {j} snaps to a rational"
                        ),
                        residual: x,
                        tol: 1e-9,
                    })
                }
            }
        }
        out.push((piv, entries));
    }
    Ok(out)
}

/// All modular invariants of `md`: nonnegative-integer matrices in the
/// commutant with `Z_{vv} = 1` and entries bounded by `ceil(d_a d_b)`.
///
/// Exhaustive within the quantum-dimension bound; each result is re-verified
/// to commute with residual below 1e-8. Refuses with a size estimate when the
/// search box exceeds [`MAX_CANDIDATES`].
pub fn enumerate_invariants(md: &ModularData) -> Result<Vec<InvariantMatrix>> {
    enumerate_invariants_bounded(md, 0, MAX_CANDIDATES)
}

/// [`enumerate_invariants`] with the entry bound enlarged by `extra_bound`
/// and a configurable candidate cap; the public entry point uses
/// `extra_bound = 0`. Enlarging the bound must not change the result set once
/// the quantum-dimension bound is exceeded, which tests assert directly.
pub fn enumerate_invariants_bounded(
    md: &ModularData,
    extra_bound: u64,
    max_candidates: u64,
) -> Result<Vec<InvariantMatrix>> {
    let n = md.rank();
    let v = md.vacuum();
    let basis = rational_commutant_basis(md)?;
    let dims: Vec<f64> = (0..n)
        .map(|a| quantum_dimension(md, a))
        .collect::<Result<_>>()?;

    // Entry bound ceil(d_a d_b), with a small guard so float noise in an
    // exactly-integer product cannot inflate the ceiling.
    let bound = |flat: usize| -> u64 {
        let (a, b) = (flat / n, flat % n);
        (dims[a] * dims[b] - 1e-6).ceil().max(1.0) as u64 + extra_bound
    };

    // Each coefficient equals the candidate's entry at that basis element's
    // pivot position, so it ranges over 0..=bound(pivot) — or is pinned to 1
    // when the pivot is the vacuum-vacuum entry.
    let boxes: Vec<(u64, u64)> = basis
        .iter()
        .map(|&(piv, _)| {
            if piv == v * n + v {
                (1, 1)
            } else {
                (0, bound(piv))
            }
        })
        .collect();

    let mut estimate: u64 = 1;
    for &(lo, hi) in &boxes {
        estimate = estimate.saturating_mul(hi - lo + 1);
    }
    if estimate > max_candidates {
        return Err(Error::Budget {
            estimate: estimate as u128,
            budget: max_candidates as u128,
        });
    }

    let mut results = Vec::new();
    let mut coeffs: Vec<u64> = boxes.iter().map(|&(lo, _)| lo).collect();
    'outer: loop {
        if let Some(z) = assemble_candidate(md, &basis, &coeffs, n, v, &bound)? {
            results.push(z);
        }
        // Odometer increment over the coefficient box.
        for i in 0..coeffs.len() {
            if coeffs[i] < boxes[i].1 {
                coeffs[i] += 1;
                continue 'outer;
            }
            coeffs[i] = boxes[i].0;
        }
        break;
    }
    results.sort_by(|a, b| a.entries().cmp(b.entries()));
    Ok(results)
}

/// Combine basis elements with the given integer coefficients and keep the
/// result when it is a valid invariant within the entry bound.
fn assemble_candidate(
    md: &ModularData,
    basis: &[(usize, Vec<Rational64>)],
    coeffs: &[u64],
    n: usize,
    v: usize,
    bound: &dyn Fn(usize) -> u64,
) -> Result<Option<InvariantMatrix>> {
    let mut flat = vec![Rational64::zero(); n * n];
    for ((_, mat), &c) in basis.iter().zip(coeffs) {
        if c == 0 {
            continue;
        }
        let c = Rational64::from_integer(c as i64);
        for (dst, src) in flat.iter_mut().zip(mat) {
            *dst += c * src;
        }
    }
    let mut entries = Vec::with_capacity(n * n);
    for (j, x) in flat.iter().enumerate() {
        if !x.is_integer() || x.is_negative() {
            return Ok(None);
        }
        let e = x.to_integer() as u64;
        if e > bound(j) {
            return Ok(None);
        }
        entries.push(e);
    }
    if entries[v * n + v] != 1 {
        return Ok(None);
    }
    match InvariantMatrix::new(md, entries, COMMUTATION_TOL) {
        Ok(z) => Ok(Some(z)),
        // A lattice point that fails the float re-verification is not an
        // invariant; it is filtered, not fatal.
        Err(Error::CheckFailed { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Torus partition function `sum_{M,N} Z_{MN} chi_M(tau) conj(chi_N(tau))`.
///
/// Errors when the accumulated truncation bound of the character evaluations
/// exceeds `tol`, mirroring the refusal semantics of the transform checks.
pub fn partition_function(
    md: &ModularData,
    z: &InvariantMatrix,
    chars: &[PuiseuxSeries],
    tau: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let n = md.rank();
    if z.rank() != n || chars.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "partition function needs rank-{n} invariant and {n} characters, got rank {} and {}",
            z.rank(),
            chars.len()
        )));
    }
    let vals: Vec<_> = chars.iter().map(|c| c.eval_tau(tau)).collect::<Result<_>>()?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut bound = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            let w = z.entry(a, b) as f64;
            if w == 0.0 {
                continue;
            }
            let (xa, ea) = (vals[a].value, vals[a].truncation_bound);
            let (xb, eb) = (vals[b].value, vals[b].truncation_bound);
            total += xa * xb.conj() * w;
            // |x_a conj(x_b) - chi_a conj(chi_b)| <= |x_a| e_b + |x_b| e_a + e_a e_b.
            bound += w * (xa.norm() * eb + xb.norm() * ea + ea * eb);
        }
    }
    if bound > tol {
        return Err(Error::Truncation { bound, tol });
    }
    Ok(total)
}
