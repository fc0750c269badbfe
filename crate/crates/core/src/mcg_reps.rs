//! Mapping-class-group representations carried by the spaces of conformal
//! blocks: the torus representation of SL(2, Z) generated by (S, T), and the
//! four-point genus-zero braid representation built from the Ising fusing and
//! braiding matrices. Includes relation verification with projective scalars
//! and a bounded breadth-first closure of the projective image to decide
//! finiteness.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_vs_identity};
use crate::modular_data::ModularData;

/// Tolerance for unitarity of generator images.
pub const UNITARITY_TOL: f64 = 1e-12;
/// Tolerance below which a matrix entry counts as zero during phase
/// normalization.
const PHASE_ZERO_TOL: f64 = 1e-8;
/// Matching tolerance for closure deduplication.
pub const CLOSURE_TOL: f64 = 1e-8;

/// Fusing, twist, and braiding matrices of the four-point Ising block space.
#[derive(Debug, Clone)]
pub struct DualityData {
    /// Real symmetric involution relating the two asymptotic channels.
    pub f: DMatrix<Complex64>,
    /// Diagonal unitary of adjacent-twist eigenvalues.
    pub d: DMatrix<Complex64>,
    /// Braiding matrix; equals F D F.
    pub b: DMatrix<Complex64>,
}

impl DualityData {
    /// Build from `f` and `d`, deriving `b = f d f`, and verify the
    /// invariants: `f` involutive, `d` and `b` unitary.
    pub fn new(f: DMatrix<Complex64>, d: DMatrix<Complex64>) -> Result<Self> {
        let n = f.nrows();
        if f.ncols() != n || d.nrows() != n || d.ncols() != n {
            return Err(Error::DimensionMismatch(
                "duality data must be square matrices of equal size".into(),
            ));
        }
        let f2 = &f * &f;
        let r = max_abs_vs_identity(&f2);
        if r > 1e-12 {
            return Err(Error::CheckFailed {
                check: "fusing matrix squares to the identity".into(),
                residual: r,
                tol: 1e-12,
            });
        }
        let b = &f * &d * &f;
        for (name, m) in [("twist", &d), ("braiding", &b)] {
            let r = max_abs_vs_identity(&(m.adjoint() * m));
            if r > 1e-12 {
                return Err(Error::CheckFailed {
                    check: format!("{name} matrix is unitary"),
                    residual: r,
                    tol: 1e-12,
                });
            }
        }
        Ok(DualityData { f, d, b })
    }
}

/// The Ising four-point duality data:
/// `F = (1/sqrt2) [[1, 1], [1, -1]]`,
/// `D = diag(e^{i pi/8}, e^{-3 i pi/8})`,
/// `B = F D F = (e^{-i pi/8}/sqrt2) [[1, i], [i, 1]]`.
///
/// The diagonal order of `D` follows the fused-channel label order
/// (vacuum first), matching the fusion-product ordering used elsewhere.
pub fn ising_duality_data() -> DualityData {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let f = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
    let d = DMatrix::from_partial_diagonal(
        2,
        2,
        &[
            Complex64::from_polar(1.0, PI / 8.0),
            Complex64::from_polar(1.0, -3.0 * PI / 8.0),
        ],
    );
    DualityData::new(f, d).expect("reference duality data satisfies its invariants")
}

/// A relation word in the generators: a list of (generator index, power).
/// Negative powers use the adjoint, which is the inverse for unitary
/// generators.
#[derive(Debug, Clone)]
pub struct Relation {
    pub name: String,
    pub word: Vec<(usize, i32)>,
    /// Expected projective scalar, if the relation pins one (true
    /// representations expect exactly 1).
    pub expected: Option<Complex64>,
    pub tol: f64,
}

impl Relation {
    pub fn new(
        name: &str,
        word: &[(usize, i32)],
        expected: Option<Complex64>,
        tol: f64,
    ) -> Self {
        Relation {
            name: name.into(),
            word: word.to_vec(),
            expected,
            tol,
        }
    }
}

/// Verified evaluation of one relation.
#[derive(Debug, Clone)]
pub struct RelationReport {
    pub name: String,
    /// The unimodular scalar lambda with word = lambda * identity.
    pub scalar: Complex64,
    /// max |word - lambda * identity|.
    pub residual: f64,
    /// |lambda - expected| when an expected scalar was given, else 0.
    pub expected_residual: f64,
}

/// A finitely generated representation with verified relts.
#[derive(Debug, Clone)]
pub struct MCGRep {
    generators: Vec<DMatrix<Complex64>>,
    relations: Vec<Relation>,
    reports: Vec<RelationReport>,
}

/// Extract the scalar of a projective identity: checks `m` is within `tol`
/// of `lambda * I` with `|lambda| = 1`, returning `lambda`.
fn projective_scalar(m: &DMatrix<Complex64>, tol: f64) -> Result<Complex64> {
    let n = m.nrows();
    let mut lambda = Complex64::new(0.0, 0.0);
    for i in 0..n {
        lambda += m[(i, i)];
    }
    lambda /= n as f64;
    let mut residual = 0.0_f64;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c { lambda } else { Complex64::new(0.0, 0.0) };
            residual = residual.max((m[(r, c)] - want).norm());
        }
    }
    if residual > tol {
        return Err(Error::CheckFailed {
            check: "relation word is a scalar multiple of the identity".into(),
            residual,
            tol,
        });
    }
    if (lambda.norm() - 1.0).abs() > tol {
        return Err(Error::CheckFailed {
            check: "relation scalar is unimodular".into(),
            residual: (lambda.norm() - 1.0).abs(),
            tol,
        });
    }
    Ok(lambda)
}

impl MCGRep {
    /// Build a representation, verifying generator unitarity and every
    /// relation word.
    pub fn new(generators: Vec<DMatrix<Complex64>>, relations: Vec<Relation>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Domain("a representation needs generators".into()));
        }
        let n = generators[0].nrows();
        for (i, g) in generators.iter().enumerate() {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator {i} is {}x{}, expected {n}x{n}",
                    g.nrows(),
                    g.ncols()
                )));
            }
            let r = max_abs_vs_identity(&(g.adjoint() * g));
            if r > UNITARITY_TOL {
                return Err(Error::CheckFailed {
                    check: format!("generator {i} is unitary"),
                    residual: r,
                    tol: UNITARITY_TOL,
                });
            }
        }
        let mut rep = MCGRep {
            generators,
            relations,
            reports: Vec::new(),
        };
        rep.reports = rep.verify()?;
        Ok(rep)
    }

    pub fn generators(&self) -> &[DMatrix<Complex64>] {
        &self.generators
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn reports(&self) -> &[RelationReport] {
        &self.reports
    }

    pub fn dimension(&self) -> usize {
        self.generators[0].nrows()
    }

    /// Evaluate a word in the generators (adjoint for negative powers).
    pub fn evaluate_word(&self, word: &[(usize, i32)]) -> Result<DMatrix<Complex64>> {
        let n = self.dimension();
        let mut out: DMatrix<Complex64> = DMatrix::identity(n, n);
        for &(g, p) in word {
            let gen = self.generators.get(g).ok_or_else(|| {
                Error::Domain(format!(
                    "word references generator {g}, but there are only {}",
                    self.generators.len()
                ))
            })?;
            let factor = if p >= 0 { gen.clone() } else { gen.adjoint() };
            for _ in 0..p.unsigned_abs() {
                out *= &factor;
            }
        }
        Ok(out)
    }

    /// Check every relation, returning the projective scalars and residuals.
    pub fn verify(&self) -> Result<Vec<RelationReport>> {
        let mut reports = Vec::with_capacity(self.relations.len());
        for rel in &self.relations {
            let m = self.evaluate_word(&rel.word)?;
            let scalar = projective_scalar(&m, rel.tol).map_err(|e| match e {
                Error::CheckFailed { check, residual, tol } => Error::CheckFailed {
                    check: format!("relation {}: {check}", rel.name),
                    residual,
                    tol,
                },
                other => other,
            })?;
            let expected_residual = match rel.expected {
                Some(want) => {
                    let r = (scalar - want).norm();
                    if r > rel.tol {
                        return Err(Error::CheckFailed {
                            check: format!(
                                "relation {} evaluates to the expected scalar",
                                rel.name
                            ),
                            residual: r,
                            tol: rel.tol,
                        });
                    }
                    r
                }
                None => 0.0,
            };
            let mut residual = 0.0_f64;
            let n = m.nrows();
            for r in 0..n {
                for c in 0..n {
                    let want = if r == c { scalar } else { Complex64::new(0.0, 0.0) };
                    residual = residual.max((m[(r, c)] - want).norm());
                }
            }
            reports.push(RelationReport {
                name: rel.name.clone(),
                scalar,
                residual,
                expected_residual,
            });
        }
        Ok(reports)
    }
}

/// The torus representation of SL(2, Z) generated by the (S, T) matrices,
/// with the defining relations `S^4 = 1`, `(ST)^3 = S^2`, and the centrality
/// `S^2 T = T S^2` verified as true (scalar exactly 1) relations.
pub fn sl2z_rep(md: &ModularData) -> Result<MCGRep> {
    let one = Complex64::new(1.0, 0.0);
    let generators = vec![md.s().clone(), md.t_matrix()];
    let relations = vec![
        Relation::new("S^4", &[(0, 4)], Some(one), 1e-8),
        Relation::new(
            "(ST)^3 S^-2",
            &[(0, 1), (1, 1), (0, 1), (1, 1), (0, 1), (1, 1), (0, -2)],
            Some(one),
            1e-8,
        ),
        Relation::new(
            "S^2 T S^-2 T^-1",
            &[(0, 2), (1, 1), (0, -2), (1, -1)],
            Some(one),
            1e-8,
        ),
    ];
    MCGRep::new(generators, relations)
}

/// The four-point genus-zero braid representation of the Ising block space:
/// `sigma_1 -> D`, `sigma_2 -> B = F D F`, `sigma_3 -> D`, with the braid
/// relations checked as true relations and the two sphere relations
/// (`sigma_1 sigma_2 sigma_3^2 sigma_2 sigma_1` and
/// `(sigma_1 sigma_2 sigma_3)^4`) checked projectively.
pub fn ising_braid_rep() -> Result<MCGRep> {
    let dd = ising_duality_data();
    let one = Complex64::new(1.0, 0.0);
    let generators = vec![dd.d.clone(), dd.b.clone(), dd.d.clone()];
    let braid = |i: usize, j: usize| {
        vec![
            (i, 1),
            (j, 1),
            (i, 1),
            (j, -1),
            (i, -1),
            (j, -1),
        ]
    };
    let relations = vec![
        Relation::new("s1 s2 s1 = s2 s1 s2", &braid(0, 1), Some(one), 1e-12),
        Relation::new("s2 s3 s2 = s3 s2 s3", &braid(1, 2), Some(one), 1e-12),
        Relation::new(
            "s1 s3 = s3 s1",
            &[(0, 1), (2, 1), (0, -1), (2, -1)],
            Some(one),
            1e-12,
        ),
        Relation::new(
            "sphere: s1 s2 s3^2 s2 s1",
            &[(0, 1), (1, 1), (2, 2), (1, 1), (0, 1)],
            None,
            1e-9,
        ),
        Relation::new(
            "sphere: (s1 s2 s3)^4",
            &[
                (0, 1),
                (1, 1),
                (2, 1),
                (0, 1),
                (1, 1),
                (2, 1),
                (0, 1),
                (1, 1),
                (2, 1),
                (0, 1),
                (1, 1),
                (2, 1),
            ],
            None,
            1e-9,
        ),
    ];
    MCGRep::new(generators, relations)
}

/// Multiply a matrix by the unit phase that makes its first entry of
/// magnitude above the zero threshold positive real (row-major scan).
pub fn phase_normalize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            if z.norm() > PHASE_ZERO_TOL {
                let phase = z.conj() / z.norm();
                return m * phase;
            }
        }
    }
    m.clone()
}

/// Result of the bounded projective-closure exploration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureOutcome {
    /// The closure stabilized: the projective image is finite of this order.
    Finite { order: usize },
    /// Exploration hit the element bound without stabilizing.
    ExceedsBound { explored: usize },
}

/// Breadth-first closure of the group generated by the representation's
/// images, modulo global phase. Matrices are compared after phase
/// normalization with tolerance 1e-8. Exploration stops once `max_elems`
/// distinct elements are found.
pub fn projective_image_closure(rep: &MCGRep, max_elems: usize) -> ClosureOutcome {
    let n = rep.dimension();
    let id: DMatrix<Complex64> = DMatrix::identity(n, n);
    let mut seen: Vec<DMatrix<Complex64>> = vec![phase_normalize(&id)];
    let mut frontier: Vec<usize> = vec![0];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &idx in &frontier {
            for g in rep.generators() {
                let prod = phase_normalize(&(&seen[idx] * g));
                let known = seen
                    .iter()
                    .any(|m| max_abs(&(&prod - m)) < CLOSURE_TOL);
                if !known {
                    if seen.len() >= max_elems {
                        return ClosureOutcome::ExceedsBound {
                            explored: seen.len(),
                        };
                    }
                    seen.push(prod);
                    next.push(seen.len() - 1);
                }
            }
        }
        frontier = next;
    }
    ClosureOutcome::Finite { order: seen.len() }
}
