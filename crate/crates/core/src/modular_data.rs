//! Modular data of a rational conformal field theory: the unitary symmetric
//! S matrix, conformal weights and central charge (kept as exact rationals),
//! and the diagonal T matrix derived from them via
//! `T_M = exp(2 pi i (h_M - c/24))`.
//!
//! The S and T matrices generate a representation of SL2(Z); the consistency
//! conditions checked by [`validate_modular_data`] are
//!
//! * S is unitary and symmetric,
//! * S^2 = C is a permutation matrix (charge conjugation) with C^2 = I,
//! * (ST)^3 = S^2,
//! * every T entry is unimodular and matches the stored weights.
//!
//! Two families ship with the crate: the Ising model (labels 𝒱, ε, σ) and the
//! affine su(2) level-k series with
//! `S_ab = sqrt(2/(k+2)) sin(pi (a+1)(b+1) / (k+2))`.
//!
//! # File format
//!
//! External modular data is a JSON object with the keys
//!
//! ```text
//! {
//!   "labels":         ["1", "f", ...],      // display names, unique
//!   "vacuum":         0,                     // index into labels
//!   "central_charge": "1/2",                 // exact rational "p/q" or "p"
//!   "weights":        ["0", "1/2", ...],     // exact rationals, one per label
//!   "S":              [[re, im], ...]        // row-major, length n^2
//! }
//! ```
//!
//! T is never serialized; it is always recomputed from `weights` and
//! `central_charge`. [`load_modular_data`] rejects any file that fails
//! validation at tolerance 1e-9.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg;

/// Default tolerance for validating modular data (used by the file loader).
pub const VALIDATION_TOL: f64 = 1e-9;

/// A primary-field label: its position in the label list plus a display name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub index: usize,
    pub name: String,
}

/// Modular data (S, T) of a rational conformal field theory.
///
/// `S` is stored as a complex matrix; `T` is represented exactly by the
/// conformal weights and central charge and realized as complex phases on
/// demand by [`ModularData::t_diagonal`].
#[derive(Debug, Clone)]
pub struct ModularData {
    labels: Vec<Label>,
    vacuum: usize,
    s: DMatrix<Complex64>,
    central_charge: Rational64,
    weights: Vec<Rational64>,
}

impl ModularData {
    /// Assemble modular data, enforcing the structural requirements:
    /// nonempty unique labels, a square S of matching size, one weight per
    /// label, a valid vacuum index, and vacuum weight zero.
    ///
    /// Analytic requirements (unitarity, the SL2(Z) relations, ...) are the
    /// job of [`validate_modular_data`], so that deliberately broken data can
    /// still be constructed and fed to the validator.
    pub fn new(
        labels: Vec<String>,
        vacuum: usize,
        s: DMatrix<Complex64>,
        central_charge: Rational64,
        weights: Vec<Rational64>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("label list is empty".into()));
        }
        let unique: HashSet<&str> = labels.iter().map(|s| s.as_str()).collect();
        if unique.len() != n {
            return Err(Error::DimensionMismatch("label names are not unique".into()));
        }
        if labels.iter().any(|name| name.is_empty()) {
            return Err(Error::DimensionMismatch("label names must be nonempty".into()));
        }
        if s.nrows() != n || s.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "S is {}x{} but there are {} labels",
                s.nrows(),
                s.ncols(),
                n
            )));
        }
        if weights.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} labels",
                weights.len(),
                n
            )));
        }
        if vacuum >= n {
            return Err(Error::DimensionMismatch(format!(
                "vacuum index {vacuum} out of range for {n} labels"
            )));
        }
        if !weights[vacuum].is_zero() {
            return Err(Error::Domain(format!(
                "vacuum weight must be 0, got {}",
                weights[vacuum]
            )));
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(index, name)| Label { index, name })
            .collect();
        Ok(ModularData {
            labels,
            vacuum,
            s,
            central_charge,
            weights,
        })
    }

    /// Number of primary fields (the rank of the theory).
    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn vacuum(&self) -> usize {
        self.vacuum
    }

    pub fn s(&self) -> &DMatrix<Complex64> {
        &self.s
    }

    pub fn s_entry(&self, a: usize, b: usize) -> Complex64 {
        self.s[(a, b)]
    }

    pub fn central_charge(&self) -> Rational64 {
        self.central_charge
    }

    pub fn weights(&self) -> &[Rational64] {
        &self.weights
    }

    /// Exact exponents `h_M - c/24` of the T matrix, one per label.
    pub fn t_exponents(&self) -> Vec<Rational64> {
        let c24 = self.central_charge / Rational64::from_integer(24);
        self.weights.iter().map(|h| h - c24).collect()
    }

    /// Diagonal of T: `exp(2 pi i (h_M - c/24))`, recomputed from the exact
    /// exponents (T is never stored in floating point).
    pub fn t_diagonal(&self) -> Vec<Complex64> {
        self.t_exponents()
            .iter()
            .map(|e| unit_phase(*e))
            .collect()
    }

    /// T as a dense matrix, for forming words like `(ST)^3`.
    pub fn t_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.t_diagonal()))
    }

    /// Resolve a label by display name, falling back to a numeric index.
    pub fn resolve_label(&self, name: &str) -> Result<usize> {
        if let Some(l) = self.labels.iter().find(|l| l.name == name) {
            return Ok(l.index);
        }
        if let Ok(i) = name.parse::<usize>() {
            if i < self.rank() {
                return Ok(i);
            }
        }
        Err(Error::UnknownLabel(name.to_string()))
    }
}

/// `exp(2 pi i r)` for an exact rational `r`, reduced mod 1 before rounding
/// so large numerators do not lose precision.
pub fn unit_phase(r: Rational64) -> Complex64 {
    let frac = r - r.floor();
    let x = frac.to_f64().expect("rational fits in f64");
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// Outcome of one named consistency check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

/// Full validation report: one entry per check, all run at the same tolerance.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub tol: f64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn overall_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// First failing check, if any.
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Extract the permutation hiding in an approximate permutation matrix.
///
/// For each row the largest entry marks the image column; the matrix must be
/// within `tol` of the exact 0/1 matrix of a bijection. On failure the
/// distance actually achieved is returned so callers can report it.
fn extract_permutation(
    m: &DMatrix<Complex64>,
    tol: f64,
) -> std::result::Result<(Vec<usize>, f64), f64> {
    let n = m.nrows();
    let mut perm = vec![0usize; n];
    let mut residual: f64 = 0.0;
    for i in 0..n {
        let (best, _) = (0..n)
            .map(|j| (j, m[(i, j)].norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        perm[i] = best;
        for j in 0..n {
            let target = if j == best {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            residual = residual.max((m[(i, j)] - target).norm());
        }
    }
    let mut seen = vec![false; n];
    for &p in &perm {
        if seen[p] {
            // Two rows claim the same column: not a permutation at all.
            return Err(residual.max(1.0));
        }
        seen[p] = true;
    }
    if residual <= tol {
        Ok((perm, residual))
    } else {
        Err(residual)
    }
}

/// Run every consistency check on `md` at tolerance `tol`.
///
/// The report contains, in order: `unitary`, `symmetric`,
/// `s_squared_permutation`, `involution` (C^2 = I, checked as S^4 = I),
/// `modular_relation` ((ST)^3 = S^2), `t_unimodular`, `t_matches_weights`,
/// and `vacuum_row_positive`. Structural problems (already ruled out by
/// [`ModularData::new`]) are errors, not failed checks.
pub fn validate_modular_data(md: &ModularData, tol: f64) -> ValidationReport {
    let n = md.rank();
    let s = md.s();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut checks = Vec::new();
    let mut push = |name: &'static str, residual: f64| {
        checks.push(CheckResult {
            name,
            residual,
            pass: residual < tol,
        });
    };

    let unitary = linalg::max_abs_diff(&(s * s.adjoint()), &id);
    push("unitary", unitary);

    let symmetric = linalg::max_abs_diff(s, &s.transpose());
    push("symmetric", symmetric);

    let s2 = s * s;
    let perm_residual = match extract_permutation(&s2, tol) {
        Ok((_, r)) => r,
        Err(r) => r,
    };
    push("s_squared_permutation", perm_residual);

    let s4 = &s2 * &s2;
    push("involution", linalg::max_abs_vs_identity(&s4));

    let st = s * md.t_matrix();
    let st3 = &st * &st * &st;
    push("modular_relation", linalg::max_abs_diff(&st3, &s2));

    let t = md.t_diagonal();
    let t_unimodular = t
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    push("t_unimodular", t_unimodular);

    // T is recomputed from the exact weights on every call, so this residual
    // is zero by construction; it stays in the report to pin that contract.
    let t_matches = t
        .iter()
        .zip(md.t_exponents())
        .map(|(z, e)| (z - unit_phase(e)).norm())
        .fold(0.0, f64::max);
    push("t_matches_weights", t_matches);

    // Perron-Frobenius positivity of the vacuum row. An entry with
    // nonpositive real part forces the residual above any sane tolerance.
    let mut vac_residual: f64 = 0.0;
    for p in 0..n {
        let z = md.s_entry(md.vacuum(), p);
        vac_residual = vac_residual.max(z.im.abs());
        if z.re <= 0.0 {
            vac_residual = vac_residual.max(1.0).max(-z.re);
        }
    }
    push("vacuum_row_positive", vac_residual);

    ValidationReport { tol, checks }
}

/// Charge conjugation: the permutation C with `S^2 = C`.
///
/// Fails with [`Error::NotPermutation`] when S^2 is not within 1e-9 of a
/// permutation matrix.
pub fn charge_conjugation(md: &ModularData) -> Result<Vec<usize>> {
    let s2 = md.s() * md.s();
    extract_permutation(&s2, VALIDATION_TOL)
        .map(|(perm, _)| perm)
        .map_err(|residual| Error::NotPermutation { residual })
}

/// Ising modular data: labels 𝒱 (vacuum), ε, σ with central charge 1/2 and
/// weights (0, 1/2, 1/16);
///
/// ```text
///         [ 1    1    √2 ]
/// S = 1/2 [ 1    1   -√2 ]
///         [ √2  -√2   0  ]
/// ```
pub fn ising_modular_data() -> ModularData {
    let h = FRAC_1_SQRT_2; // √2/2
    let entries: [f64; 9] = [0.5, 0.5, h, 0.5, 0.5, -h, h, -h, 0.0];
    let s = DMatrix::from_row_slice(
        3,
        3,
        &entries.map(|x| Complex64::new(x, 0.0)),
    );
    ModularData::new(
        vec!["𝒱".into(), "ε".into(), "σ".into()],
        0,
        s,
        Rational64::new(1, 2),
        vec![
            Rational64::zero(),
            Rational64::new(1, 2),
            Rational64::new(1, 16),
        ],
    )
    .expect("built-in Ising data is structurally valid")
}

/// Affine su(2) level-k modular data: labels a = 0..k (twice the spin),
/// `S_ab = sqrt(2/(k+2)) sin(pi (a+1)(b+1)/(k+2))`, central charge
/// `3k/(k+2)`, weights `h_a = a(a+2)/(4(k+2))`.
pub fn su2_modular_data(k: usize) -> ModularData {
    let n = k + 1;
    let kk = (k + 2) as f64;
    let norm = (2.0 / kk).sqrt();
    let s = DMatrix::from_fn(n, n, |a, b| {
        // Reduce the sine argument exactly mod 2(k+2) to keep entries clean
        // for large products (a+1)(b+1).
        let m = ((a + 1) * (b + 1)) % (2 * (k + 2));
        Complex64::new(norm * (PI * m as f64 / kk).sin(), 0.0)
    });
    let k_i64 = k as i64;
    let labels = (0..n).map(|a| a.to_string()).collect();
    let weights = (0..n as i64)
        .map(|a| Rational64::new(a * (a + 2), 4 * (k_i64 + 2)))
        .collect();
    ModularData::new(
        labels,
        0,
        s,
        Rational64::new(3 * k_i64, k_i64 + 2),
        weights,
    )
    .expect("built-in su(2) data is structurally valid")
}

/// Serialized form of [`ModularData`]; see the module docs for the schema.
#[derive(Debug, Serialize, Deserialize)]
struct ModularDataFile {
    labels: Vec<String>,
    vacuum: usize,
    central_charge: String,
    weights: Vec<String>,
    #[serde(rename = "S")]
    s: Vec<[f64; 2]>,
}

fn parse_rational(text: &str) -> Result<Rational64> {
    Rational64::from_str(text.trim())
        .map_err(|e| Error::Parse(format!("bad rational `{text}`: {e}")))
}

/// Parse modular data from a JSON string and validate it at tolerance 1e-9.
pub fn modular_data_from_json(json: &str) -> Result<ModularData> {
    let file: ModularDataFile = serde_json::from_str(json)?;
    let n = file.labels.len();
    if file.s.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "S has {} entries, expected {}",
            file.s.len(),
            n * n
        )));
    }
    let s = DMatrix::from_fn(n, n, |i, j| {
        let [re, im] = file.s[i * n + j];
        Complex64::new(re, im)
    });
    let central_charge = parse_rational(&file.central_charge)?;
    let weights = file
        .weights
        .iter()
        .map(|w| parse_rational(w))
        .collect::<Result<Vec<_>>>()?;
    let md = ModularData::new(file.labels, file.vacuum, s, central_charge, weights)?;
    let report = validate_modular_data(&md, VALIDATION_TOL);
    if let Some(fail) = report.first_failure() {
        return Err(Error::CheckFailed {
            check: fail.name.to_string(),
            residual: fail.residual,
            tol: report.tol,
        });
    }
    Ok(md)
}

/// Load and validate modular data from a JSON file.
pub fn load_modular_data(path: &Path) -> Result<ModularData> {
    let text = std::fs::read_to_string(path)?;
    modular_data_from_json(&text)
}

/// Serialize modular data to the JSON file format (T is not serialized).
pub fn modular_data_to_json(md: &ModularData) -> String {
    let n = md.rank();
    let mut s = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = md.s_entry(i, j);
            s.push([z.re, z.im]);
        }
    }
    let file = ModularDataFile {
        labels: md.labels().iter().map(|l| l.name.clone()).collect(),
        vacuum: md.vacuum(),
        central_charge: md.central_charge().to_string(),
        weights: md.weights().iter().map(|w| w.to_string()).collect(),
        s,
    };
    serde_json::to_string_pretty(&file).expect("serialization cannot fail")
}
