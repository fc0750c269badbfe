//! Fusion rules and conformal-block dimensions from the S matrix.
//!
//! The Verlinde formula recovers the fusion multiplicities
//!
//! ```text
//! N_ab^c = sum_P  S_aP S_bP conj(S_cP) / S_vP      (v = vacuum)
//! ```
//!
//! and its surface generalization counts the dimension of the space of
//! conformal blocks on a genus-g surface with punctures M^1..M^n:
//!
//! ```text
//! dim F(g; M^1..M^n) = sum_P  (prod_i S_{M^i P} / S_vP) * S_vP^(2-2g)
//! ```
//!
//! Both sums are evaluated in floating point and must land within
//! [`INTEGRALITY_TOL`] of a nonnegative integer; anything else is reported as
//! an error rather than silently rounded.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modular_data::ModularData;

/// How close a fusion multiplicity or block dimension must be to an integer.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Caps on genus and puncture count; `S_vP^(2-2g)` overflows f64 range soon after.
pub const MAX_GENUS: usize = 64;
pub const MAX_PUNCTURES: usize = 64;

/// Round a complex sum that should be a nonnegative integer, or explain why not.
fn expect_nonneg_integer(what: impl Fn() -> String, z: Complex64) -> Result<u64> {
    let rounded = z.re.round();
    let residual = (z.re - rounded).abs().max(z.im.abs());
    if residual > INTEGRALITY_TOL || rounded < 0.0 {
        return Err(Error::NonIntegral {
            what: what(),
            value: z.re,
            residual,
        });
    }
    Ok(rounded as u64)
}

/// Single fusion multiplicity `N_ab^c` by the Verlinde formula.
pub fn verlinde_coefficient(md: &ModularData, a: usize, b: usize, c: usize) -> Result<u64> {
    let n = md.rank();
    if a >= n || b >= n || c >= n {
        return Err(Error::DimensionMismatch(format!(
            "label indices ({a},{b},{c}) out of range for rank {n}"
        )));
    }
    let v = md.vacuum();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..n {
        acc += md.s_entry(a, p) * md.s_entry(b, p) * md.s_entry(c, p).conj() / md.s_entry(v, p);
    }
    expect_nonneg_integer(|| format!("N({a},{b};{c})"), acc)
}

/// The full rank^3 table of fusion multiplicities.
///
/// Guaranteed on construction: symmetric in the lower indices, the vacuum
/// fuses as the unit, and fusion is associative.
#[derive(Debug, Clone)]
pub struct FusionTensor {
    rank: usize,
    /// `n[(a * rank + b) * rank + c] = N_ab^c`.
    n: Vec<u64>,
}

impl FusionTensor {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Multiplicity `N_ab^c`.
    pub fn get(&self, a: usize, b: usize, c: usize) -> u64 {
        self.n[(a * self.rank + b) * self.rank + c]
    }
}

/// Compute the full fusion tensor and verify its structural invariants.
pub fn fusion_tensor(md: &ModularData) -> Result<FusionTensor> {
    let n = md.rank();
    let mut table = vec![0u64; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                table[(a * n + b) * n + c] = verlinde_coefficient(md, a, b, c)?;
            }
        }
    }
    let t = FusionTensor { rank: n, n: table };

    // Commutativity N_ab^c = N_ba^c.
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if t.get(a, b, c) != t.get(b, a, c) {
                    return Err(Error::CheckFailed {
                        check: format!("fusion commutativity at ({a},{b};{c})"),
                        residual: 1.0,
                        tol: 0.0,
                    });
                }
            }
        }
    }
    // Unit: N_vb^c = delta_bc.
    let v = md.vacuum();
    for b in 0..n {
        for c in 0..n {
            let expected = u64::from(b == c);
            if t.get(v, b, c) != expected {
                return Err(Error::CheckFailed {
                    check: format!("vacuum fusion unit at ({b};{c})"),
                    residual: 1.0,
                    tol: 0.0,
                });
            }
        }
    }
    // Associativity: sum_e N_ab^e N_ec^d = sum_e N_bc^e N_ae^d.
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let lhs: u64 = (0..n).map(|e| t.get(a, b, e) * t.get(e, c, d)).sum();
                    let rhs: u64 = (0..n).map(|e| t.get(b, c, e) * t.get(a, e, d)).sum();
                    if lhs != rhs {
                        return Err(Error::CheckFailed {
                            check: format!("fusion associativity at ({a},{b},{c};{d})"),
                            residual: (lhs as f64 - rhs as f64).abs(),
                            tol: 0.0,
                        });
                    }
                }
            }
        }
    }
    Ok(t)
}

/// A compact surface type: genus plus an ordered list of puncture labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surface {
    pub genus: usize,
    pub punctures: Vec<usize>,
}

impl Surface {
    pub fn new(genus: usize, punctures: Vec<usize>) -> Self {
        Surface { genus, punctures }
    }

    /// Closed surface of the given genus.
    pub fn closed(genus: usize) -> Self {
        Surface {
            genus,
            punctures: Vec::new(),
        }
    }
}

/// Dimension of the space of conformal blocks on `surface`.
///
/// For three punctures on a sphere this equals `N_ab^{C(c)}`; with the
/// self-conjugate built-in data (C = identity) that is just `N_ab^c`. For
/// data with nontrivial charge conjugation the third label is implicitly
/// conjugated relative to the Verlinde multiplicity.
pub fn block_dimension(md: &ModularData, surface: &Surface) -> Result<u64> {
    let n = md.rank();
    if surface.genus > MAX_GENUS {
        return Err(Error::SurfaceCap {
            what: "genus".into(),
            value: surface.genus,
            cap: MAX_GENUS,
        });
    }
    if surface.punctures.len() > MAX_PUNCTURES {
        return Err(Error::SurfaceCap {
            what: "punctures".into(),
            value: surface.punctures.len(),
            cap: MAX_PUNCTURES,
        });
    }
    for &m in &surface.punctures {
        if m >= n {
            return Err(Error::DimensionMismatch(format!(
                "puncture label {m} out of range for rank {n}"
            )));
        }
    }
    let v = md.vacuum();
    let euler_exp = 2 - 2 * surface.genus as i32;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..n {
        let s_vp = md.s_entry(v, p);
        let mut term = s_vp.powi(euler_exp);
        for &m in &surface.punctures {
            term *= md.s_entry(m, p) / s_vp;
        }
        acc += term;
    }
    expect_nonneg_integer(
        || {
            format!(
                "dim F(genus {}, punctures {:?})",
                surface.genus, surface.punctures
            )
        },
        acc,
    )
}

/// Quantum dimension `d_a = S_{a,vac} / S_{vac,vac}`; positive real for
/// valid unitary modular data.
pub fn quantum_dimension(md: &ModularData, a: usize) -> Result<f64> {
    let n = md.rank();
    if a >= n {
        return Err(Error::DimensionMismatch(format!(
            "label index {a} out of range for rank {n}"
        )));
    }
    let v = md.vacuum();
    let d = md.s_entry(a, v) / md.s_entry(v, v);
    if d.im.abs() > INTEGRALITY_TOL || d.re <= 0.0 {
        return Err(Error::Domain(format!(
            "quantum dimension of label {a} is not positive real: {d}"
        )));
    }
    Ok(d.re)
}
