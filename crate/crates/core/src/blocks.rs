//! The explicit pair of four-point chiral blocks
//!
//! ```text
//! F1(w) = sqrt(1 + sqrt(1-w)) / (w(1-w))^{1/8}
//! F2(w) = sqrt(1 - sqrt(1-w)) / (w(1-w))^{1/8}
//! ```
//!
//! with three capabilities: evaluation on principal branches, analytic
//! continuation along piecewise line/arc paths in the punctured plane
//! `C \ {0, 1}` with full branch bookkeeping, and the lift to Puiseux series
//! in `q = e^{2 pi i tau}` through the Hauptmodul `lambda = theta2^4/theta3^4`.
//!
//! Branch bookkeeping uses continuous arguments for the four multivalued
//! factors — `w`, `1-w`, `1 + sqrt(1-w)`, `1 - sqrt(1-w)` — rather than an
//! explicit sheet structure. Each continuation step is accepted only when
//! every factor's argument moves by less than pi/4, which keeps the
//! principal-value increment equal to the true continuous increment (the two
//! can only disagree once a single step winds a factor by more than pi).
//!
//! Monodromy extraction exploits the fact that continuation permutes the two
//! blocks up to phases: when the inner square root returns to itself (the
//! winding of `1-w` about 0 is even) the monodromy matrix is diagonal in the
//! `(F1, F2)` germ basis, and when the winding is odd the inner root flips
//! sign, the two numerator germs trade places, and the matrix is
//! antidiagonal. Entries are exact end/start value ratios.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use std::f64::consts::PI;

use crate::characters::{rat, rat_int, PuiseuxSeries};
use crate::error::{Error, Result};

/// Minimum allowed distance between a continuation path and the singular
/// points {0, 1}.
pub const DEFAULT_CLEARANCE: f64 = 1e-3;

/// Largest per-step change allowed in any tracked argument.
const ARG_STEP_LIMIT: f64 = PI / 4.0;

/// Total step budget for one path.
const MAX_STEPS: usize = 1_000_000;

/// Endpoint coincidence threshold deciding whether a path is closed.
const CLOSURE_TOL: f64 = 1e-12;

/// Allowed deviation of |det M| from 1 for closed loops.
const DET_TOL: f64 = 1e-8;

/// A germ of the block pair: the point `w` plus continuous arguments for the
/// four multivalued factors, from which the block values are recomputed.
#[derive(Debug, Clone, Copy)]
pub struct BranchState {
    w: Complex64,
    /// Continuous argument of `w`.
    theta_w: f64,
    /// Continuous argument of `1 - w`.
    theta_v: f64,
    /// Continuous argument of `1 + s`, `s` the tracked branch of `sqrt(1-w)`.
    theta_p: f64,
    /// Continuous argument of `1 - s`.
    theta_m: f64,
    /// Cached `(F1, F2)`, always equal to the recomputation from the fields above.
    values: (Complex64, Complex64),
}

impl BranchState {
    /// The all-principal germ at `w`; the reference normalization has
    /// basepoint 1/2 where every tracked argument vanishes.
    pub fn principal(w: Complex64) -> Result<Self> {
        if w.norm() < 1e-12 || (w - 1.0).norm() < 1e-12 {
            return Err(Error::Domain(format!(
                "blocks are singular at w = {w} (branch points 0 and 1)"
            )));
        }
        let v = Complex64::new(1.0, 0.0) - w;
        let s = v.sqrt(); // principal: |v|^{1/2} e^{i arg(v)/2}
        let up = Complex64::new(1.0, 0.0) + s;
        let um = Complex64::new(1.0, 0.0) - s;
        let mut state = BranchState {
            w,
            theta_w: w.arg(),
            theta_v: v.arg(),
            theta_p: up.arg(),
            theta_m: um.arg(),
            values: (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        };
        state.values = state.recompute_values();
        Ok(state)
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    /// Current `(F1, F2)`.
    pub fn values(&self) -> (Complex64, Complex64) {
        self.values
    }

    /// The tracked branch of the inner root `sqrt(1-w)`.
    fn inner_root(&self) -> Complex64 {
        let v = Complex64::new(1.0, 0.0) - self.w;
        Complex64::from_polar(v.norm().sqrt(), self.theta_v / 2.0)
    }

    /// Rebuild `(F1, F2)` from the stored arguments: moduli come from the
    /// point, phases from the continuous arguments.
    pub fn recompute_values(&self) -> (Complex64, Complex64) {
        let v = Complex64::new(1.0, 0.0) - self.w;
        let s = self.inner_root();
        let up_mod = (Complex64::new(1.0, 0.0) + s).norm();
        let um_mod = (Complex64::new(1.0, 0.0) - s).norm();
        let denom_mod = (self.w.norm() * v.norm()).powf(-0.125);
        let denom = Complex64::from_polar(denom_mod, -(self.theta_w + self.theta_v) / 8.0);
        let f1 = Complex64::from_polar(up_mod.sqrt(), self.theta_p / 2.0) * denom;
        let f2 = Complex64::from_polar(um_mod.sqrt(), self.theta_m / 2.0) * denom;
        (f1, f2)
    }

    /// Attempt one continuation step to `w_next`. Returns the updated state,
    /// or `None` when some argument would move by `ARG_STEP_LIMIT` or more in
    /// a single step (the caller then bisects).
    fn step_to(&self, w_next: Complex64) -> Option<Self> {
        let one = Complex64::new(1.0, 0.0);
        let v_cur = one - self.w;
        let v_next = one - w_next;
        let d_tw = (w_next / self.w).arg();
        let d_tv = (v_next / v_cur).arg();
        let s_cur = self.inner_root();
        let s_next = Complex64::from_polar(v_next.norm().sqrt(), (self.theta_v + d_tv) / 2.0);
        let d_tp = ((one + s_next) / (one + s_cur)).arg();
        let d_tm = ((one - s_next) / (one - s_cur)).arg();
        let worst = d_tw
            .abs()
            .max(d_tv.abs())
            .max(d_tp.abs())
            .max(d_tm.abs());
        if worst >= ARG_STEP_LIMIT {
            return None;
        }
        let mut next = BranchState {
            w: w_next,
            theta_w: self.theta_w + d_tw,
            theta_v: self.theta_v + d_tv,
            theta_p: self.theta_p + d_tp,
            theta_m: self.theta_m + d_tm,
            values: self.values,
        };
        next.values = next.recompute_values();
        Some(next)
    }
}

/// Principal-branch evaluation of the block pair at `w`.
///
/// Intended for the reference region `(0, 1)` on the real axis, where every
/// tracked argument vanishes; elsewhere it evaluates the all-principal germ.
pub fn blocks_at(w: Complex64) -> Result<(Complex64, Complex64)> {
    Ok(BranchState::principal(w)?.values())
}

/// One path segment: a straight line to a target, or a circular arc around a
/// center, swept by a signed angle (positive = counterclockwise). The arc's
/// radius and starting angle come from the current point.
#[derive(Debug, Clone, Copy)]
pub enum Segment {
    Line { to: Complex64 },
    Arc { center: Complex64, angle: f64 },
}

/// A piecewise path in the punctured plane, with a clearance radius the path
/// must keep from the singular points {0, 1}.
#[derive(Debug, Clone)]
pub struct PathSpec {
    pub start: Complex64,
    pub segments: Vec<Segment>,
    pub clearance: f64,
}

impl PathSpec {
    pub fn new(start: Complex64) -> Self {
        PathSpec {
            start,
            segments: Vec::new(),
            clearance: DEFAULT_CLEARANCE,
        }
    }

    pub fn line_to(mut self, to: Complex64) -> Self {
        self.segments.push(Segment::Line { to });
        self
    }

    pub fn arc(mut self, center: Complex64, angle: f64) -> Self {
        self.segments.push(Segment::Arc { center, angle });
        self
    }

    pub fn with_clearance(mut self, clearance: f64) -> Self {
        self.clearance = clearance;
        self
    }

    /// Append all segments of `other` (which must start where `self` ends).
    pub fn then(mut self, other: &PathSpec) -> Result<Self> {
        let end = self.endpoint();
        if (end - other.start).norm() > CLOSURE_TOL {
            return Err(Error::Domain(format!(
                "cannot concatenate: first path ends at {end}, second starts at {}",
                other.start
            )));
        }
        self.segments.extend_from_slice(&other.segments);
        Ok(self)
    }

    /// Endpoint implied by the segments.
    pub fn endpoint(&self) -> Complex64 {
        let mut p = self.start;
        for seg in &self.segments {
            p = segment_point(p, seg, 1.0);
        }
        p
    }

    /// A closed circle traversed `turns` times (negative = clockwise),
    /// starting at `center + radius`.
    pub fn circle(center: Complex64, radius: f64, turns: i32) -> Self {
        PathSpec::new(center + Complex64::new(radius, 0.0)).arc(center, 2.0 * PI * turns as f64)
    }

    /// A loop around `target` based at `base`: straight line to the circle
    /// entry point on the side facing the base, a full counterclockwise
    /// circle, and the line back.
    pub fn based_loop(base: Complex64, target: Complex64, radius: f64) -> Self {
        let dir = (base - target) / (base - target).norm();
        let entry = target + dir * radius;
        PathSpec::new(base)
            .line_to(entry)
            .arc(target, 2.0 * PI)
            .line_to(base)
    }
}

/// Point at parameter `t` in [0, 1] of `seg` starting from `from`.
fn segment_point(from: Complex64, seg: &Segment, t: f64) -> Complex64 {
    match *seg {
        Segment::Line { to } => from + (to - from) * t,
        Segment::Arc { center, angle } => {
            let rel = from - center;
            center + rel * Complex64::from_polar(1.0, angle * t)
        }
    }
}

/// Exact minimum distance from the singular point `c` to the segment.
fn segment_clearance(from: Complex64, seg: &Segment, c: Complex64) -> f64 {
    match *seg {
        Segment::Line { to } => {
            let d = to - from;
            let len2 = d.norm_sqr();
            if len2 == 0.0 {
                return (c - from).norm();
            }
            // Projection parameter of c onto the line, clamped to the segment.
            let t = ((c - from).re * d.re + (c - from).im * d.im) / len2;
            let t = t.clamp(0.0, 1.0);
            (c - (from + d * t)).norm()
        }
        Segment::Arc { center, angle } => {
            let rel = from - center;
            let r = rel.norm();
            let d = (c - center).norm();
            if angle.abs() >= 2.0 * PI {
                return (d - r).abs();
            }
            // Is the angle of c (from the center) inside the swept sector?
            let phi0 = rel.arg();
            let psi = (c - center).arg();
            let mut delta = psi - phi0;
            if angle >= 0.0 {
                while delta < 0.0 {
                    delta += 2.0 * PI;
                }
                if delta <= angle {
                    return (d - r).abs();
                }
            } else {
                while delta > 0.0 {
                    delta -= 2.0 * PI;
                }
                if delta >= angle {
                    return (d - r).abs();
                }
            }
            let end = segment_point(from, seg, 1.0);
            (c - from).norm().min((c - end).norm())
        }
    }
}

/// The result of continuing the block pair along a path.
#[derive(Debug, Clone)]
pub struct MonodromyResult {
    /// 2x2 matrix M expressing the continued germs in the start-germ basis:
    /// continuation sends F_j to sum_i M_{ij} F_i, so the value pairs satisfy
    /// (F1, F2)_after = (F1, F2)_before . M as row vectors, and composition
    /// follows the representation rule M(path1 then path2) = M(path2) M(path1).
    pub matrix: DMatrix<Complex64>,
    /// Whether the path returned to its starting point (within 1e-12).
    pub closed: bool,
    /// Whether the inner root came back with the opposite sign (odd winding
    /// of `1-w` about 0), i.e. whether the matrix is antidiagonal.
    pub germ_swapped: bool,
    /// |det M|; equals 1 up to floating error for closed loops.
    pub det_modulus: f64,
}

/// Analytically continue the block pair along `path` from its all-principal
/// germ, with adaptive stepping, and express the final values in terms of the
/// initial germ.
///
/// Steps shrink until no tracked argument moves by more than pi/4 per step;
/// clearance from the singular points is verified exactly per segment before
/// stepping and re-checked at every accepted point.
pub fn continue_along(path: &PathSpec) -> Result<MonodromyResult> {
    let singulars = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];

    // Exact geometric clearance check, segment by segment.
    let mut seg_start = path.start;
    for (i, seg) in path.segments.iter().enumerate() {
        for s in singulars {
            let d = segment_clearance(seg_start, seg, s);
            if d < path.clearance {
                return Err(Error::Clearance {
                    point: format!("segment {i}"),
                    singular: format!("{s}"),
                    t: i as f64,
                    clearance: d,
                });
            }
        }
        seg_start = segment_point(seg_start, seg, 1.0);
    }

    let start = BranchState::principal(path.start)?;
    let mut state = start;
    let mut steps_used = 0usize;

    let mut from = path.start;
    for seg in &path.segments {
        let mut t = 0.0_f64;
        // Initial parameter step: arcs are capped so one step sweeps at most
        // pi/4 around the center, lines start at an eighth of the segment.
        let mut dt = match *seg {
            Segment::Arc { angle, .. } => (ARG_STEP_LIMIT / angle.abs()).min(1.0),
            Segment::Line { .. } => 0.125,
        };
        while t < 1.0 {
            steps_used += 1;
            if steps_used > MAX_STEPS {
                return Err(Error::StepUnderflow {
                    t,
                    context: format!("step budget {MAX_STEPS} exhausted"),
                });
            }
            let t_next = (t + dt).min(1.0);
            let w_next = segment_point(from, seg, t_next);
            for s in singulars {
                if (w_next - s).norm() < path.clearance {
                    return Err(Error::Clearance {
                        point: format!("{w_next}"),
                        singular: format!("{s}"),
                        t: t_next,
                        clearance: (w_next - s).norm(),
                    });
                }
            }
            match state.step_to(w_next) {
                Some(next) => {
                    state = next;
                    t = t_next;
                    dt = (dt * 1.5).min(1.0 - t + 1e-16);
                }
                None => {
                    dt *= 0.5;
                    if dt < 1e-12 {
                        return Err(Error::StepUnderflow {
                            t,
                            context: "argument increment will not fall below pi/4".into(),
                        });
                    }
                }
            }
        }
        from = segment_point(from, seg, 1.0);
    }

    let closed = (state.w - start.w).norm() < CLOSURE_TOL;
    let winding_v = ((state.theta_v - start.theta_v) / (2.0 * PI)).round() as i64;
    let germ_swapped = winding_v.rem_euclid(2) == 1;
    let (f1_0, f2_0) = start.values();
    let (f1_1, f2_1) = state.values();
    let zero = Complex64::new(0.0, 0.0);
    // Column j holds the start-basis coordinates of the continued F_j: after
    // an odd winding of 1-w the inner root flips sign and the germs trade
    // places, so the ratio f1_end/f2_start sits in row 2, column 1.
    let matrix = if germ_swapped {
        DMatrix::from_row_slice(2, 2, &[zero, f2_1 / f1_0, f1_1 / f2_0, zero])
    } else {
        DMatrix::from_row_slice(2, 2, &[f1_1 / f1_0, zero, zero, f2_1 / f2_0])
    };
    let det = matrix[(0, 0)] * matrix[(1, 1)] - matrix[(0, 1)] * matrix[(1, 0)];
    let det_modulus = det.norm();
    if closed && (det_modulus - 1.0).abs() > DET_TOL {
        return Err(Error::CheckFailed {
            check: "closed-loop monodromy has unimodular determinant".into(),
            residual: (det_modulus - 1.0).abs(),
            tol: DET_TOL,
        });
    }
    Ok(MonodromyResult {
        matrix,
        closed,
        germ_swapped,
        det_modulus,
    })
}

/// The involutive fusing matrix relating the block bases at `w` and `1-w`.
pub fn fusing_matrix() -> DMatrix<Complex64> {
    let h = Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    DMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// Max residual of the fusing relation `F_i(w) = sum_j F_{ij} F_j(1-w)` over
/// real sample points in (0, 1).
pub fn verify_fusing(samples: &[f64]) -> Result<f64> {
    let f = fusing_matrix();
    let mut worst = 0.0_f64;
    for &x in samples {
        if !(0.0..=1.0).contains(&x) || x == 0.0 || x == 1.0 {
            return Err(Error::Domain(format!(
                "fusing sample {x} is outside the open interval (0, 1)"
            )));
        }
        let w = Complex64::new(x, 0.0);
        let here = blocks_at(w)?;
        let there = blocks_at(Complex64::new(1.0 - x, 0.0))?;
        let r1 = (here.0 - (f[(0, 0)] * there.0 + f[(0, 1)] * there.1)).norm();
        let r2 = (here.1 - (f[(1, 0)] * there.0 + f[(1, 1)] * there.1)).norm();
        worst = worst.max(r1).max(r2);
    }
    Ok(worst)
}

/// Theta constant `theta2 = sum_{n in Z} q^{(n+1/2)^2/2}` as a Puiseux series.
fn theta2_series(cutoff: &BigRational) -> PuiseuxSeries {
    let mut terms = Vec::new();
    let mut n = 0i64;
    loop {
        let e = rat((2 * n + 1) * (2 * n + 1), 8);
        if &e >= cutoff {
            break;
        }
        // n and -n-1 give the same exponent.
        terms.push((e, rat_int(2)));
        n += 1;
    }
    PuiseuxSeries::from_terms(terms, cutoff.clone())
}

/// Theta constant `theta3 = sum_{n in Z} q^{n^2/2}`.
fn theta3_series(cutoff: &BigRational) -> PuiseuxSeries {
    let mut terms = vec![(rat_int(0), rat_int(1))];
    let mut n = 1i64;
    loop {
        let e = rat(n * n, 2);
        if &e >= cutoff {
            break;
        }
        terms.push((e, rat_int(2)));
        n += 1;
    }
    PuiseuxSeries::from_terms(terms, cutoff.clone())
}

/// The degree-2 Hauptmodul `lambda = theta2^4 / theta3^4`, leading term
/// `16 q^{1/2}`.
pub fn hauptmodul_series(cutoff: &BigRational) -> Result<PuiseuxSeries> {
    let margin = cutoff + rat_int(1);
    let t2 = theta2_series(&margin);
    let t3 = theta3_series(&margin);
    Ok(t2.powi(4).div(&t3.powi(4))?.truncate(cutoff))
}

/// Lift of the block pair to Puiseux series in `q` by substituting
/// `w = lambda(q)`.
///
/// Square roots are taken in an order that keeps every leading coefficient a
/// perfect rational square: `(lambda(1-lambda))^{1/4}` as two nested square
/// roots (leading coefficients 16, then 4), then
/// `F_i = sqrt((1 +/- sqrt(1-lambda)) / (lambda(1-lambda))^{1/4})`
/// (leading coefficients 1 and 4). A direct eighth root would hit leading
/// coefficient 2, which has no rational square root.
pub fn lift_to_tau(cutoff: &BigRational) -> Result<(PuiseuxSeries, PuiseuxSeries)> {
    if cutoff <= &rat_int(3) {
        return Err(Error::Domain(format!(
            "lift cutoff {cutoff} too small; need cutoff > 3"
        )));
    }
    let margin = cutoff + rat_int(2);
    let lambda = hauptmodul_series(&margin)?;
    let one = PuiseuxSeries::constant(rat_int(1), margin.clone());
    let one_minus = one.sub(&lambda);
    let s = one_minus.sqrt()?;
    let quarter = lambda.mul(&one_minus).sqrt()?.sqrt()?;
    let f1 = one.add(&s).div(&quarter)?.sqrt()?.truncate(cutoff);
    let f2 = one.sub(&s).div(&quarter)?.sqrt()?.truncate(cutoff);
    Ok((f1, f2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, max_abs_vs_identity};

    fn phase(x: f64) -> Complex64 {
        Complex64::from_polar(1.0, x)
    }

    /// e^{-i pi/4} diag(1, -1): forced by the local exponents -1/8 and 3/8
    /// of the two blocks at w = 0.
    fn loop0_expected() -> DMatrix<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let p = phase(-PI / 4.0);
        DMatrix::from_row_slice(2, 2, &[p, zero, zero, -p])
    }

    /// e^{-i pi/4} antidiag(1, 1): the two blocks trade places around w = 1.
    fn loop1_expected() -> DMatrix<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let p = phase(-PI / 4.0);
        DMatrix::from_row_slice(2, 2, &[zero, p, p, zero])
    }

    #[test]
    fn principal_values_on_the_real_interval() {
        // At w = 1/2 the ratio F1/F2 is sqrt((1+sqrt(1/2))/(1-sqrt(1/2))).
        let (f1, f2) = blocks_at(Complex64::new(0.5, 0.0)).unwrap();
        let want = ((1.0 + 0.5_f64.sqrt()) / (1.0 - 0.5_f64.sqrt())).sqrt();
        assert!((f1 / f2 - want).norm() < 1e-14);
        assert!(f1.im.abs() < 1e-15 && f2.im.abs() < 1e-15);
    }

    #[test]
    fn square_sum_and_product_identities() {
        // F1^2 + F2^2 = 2/(w(1-w))^{1/4} and F1 F2 = sqrt(w)/(w(1-w))^{1/4}.
        for &x in &[0.05, 0.2, 0.5, 0.8, 0.95] {
            let w = Complex64::new(x, 0.0);
            let (f1, f2) = blocks_at(w).unwrap();
            let quarter = (x * (1.0 - x)).powf(0.25);
            let sum = f1 * f1 + f2 * f2;
            let prod = f1 * f2;
            assert!((sum - 2.0 / quarter).norm() < 1e-12, "sum at {x}");
            assert!((prod - x.sqrt() / quarter).norm() < 1e-12, "prod at {x}");
        }
    }

    #[test]
    fn blocks_reject_singular_points() {
        assert!(matches!(
            blocks_at(Complex64::new(0.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            blocks_at(Complex64::new(1.0, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn branch_state_cache_matches_recomputation() {
        let st = BranchState::principal(Complex64::new(0.3, 0.4)).unwrap();
        let (c1, c2) = st.values();
        let (r1, r2) = st.recompute_values();
        assert_eq!(c1, r1);
        assert_eq!(c2, r2);
    }

    #[test]
    fn loop_around_zero_is_diagonal_with_opposite_signs() {
        // Radius 0.1 circle around w = 0, based at w = 0.1. The block
        // exponents at 0 are -1/8 and +3/8, so the counterclockwise loop
        // multiplies the pair by e^{-i pi/4} diag(1, -1): the two local
        // exponents differ by the half-integer 1/2, which no scalar matrix
        // can reproduce.
        let m = continue_along(&PathSpec::circle(Complex64::new(0.0, 0.0), 0.1, 1)).unwrap();
        assert!(m.closed);
        assert!(!m.germ_swapped);
        assert!(max_abs_diff(&m.matrix, &loop0_expected()) < 1e-10);
        assert!((m.det_modulus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loop_around_one_is_antidiagonal() {
        let m = continue_along(&PathSpec::circle(Complex64::new(1.0, 0.0), 0.4, 1)).unwrap();
        assert!(m.closed);
        assert!(m.germ_swapped);
        assert!(max_abs_diff(&m.matrix, &loop1_expected()) < 1e-10);
    }

    #[test]
    fn contractible_loop_is_identity() {
        // Circle around 0.5 of radius 0.3 encloses neither singular point.
        let m = continue_along(&PathSpec::circle(Complex64::new(0.5, 0.0), 0.3, 1)).unwrap();
        assert!(m.closed);
        assert!(!m.germ_swapped);
        assert!(max_abs_vs_identity(&m.matrix) < 1e-10);
    }

    #[test]
    fn clockwise_loop_inverts_the_monodromy() {
        let ccw = continue_along(&PathSpec::circle(Complex64::new(0.0, 0.0), 0.1, 1)).unwrap();
        let cw = continue_along(&PathSpec::circle(Complex64::new(0.0, 0.0), 0.1, -1)).unwrap();
        let prod = &ccw.matrix * &cw.matrix;
        assert!(max_abs_vs_identity(&prod) < 1e-10);
    }

    #[test]
    fn loop_composition_multiplies_in_reverse_order() {
        // Based loops at 0.5 around each singular point; the concatenated
        // path must continue to M(second) * M(first).
        let base = Complex64::new(0.5, 0.0);
        let g0 = PathSpec::based_loop(base, Complex64::new(0.0, 0.0), 0.1);
        let g1 = PathSpec::based_loop(base, Complex64::new(1.0, 0.0), 0.1);
        let m0 = continue_along(&g0).unwrap();
        let m1 = continue_along(&g1).unwrap();
        let cat = g0.clone().then(&g1).unwrap();
        let mcat = continue_along(&cat).unwrap();
        let want = &m1.matrix * &m0.matrix;
        assert!(max_abs_diff(&mcat.matrix, &want) < 1e-8);
    }

    #[test]
    fn homotopic_loops_agree() {
        let base = Complex64::new(0.5, 0.0);
        let small = continue_along(&PathSpec::based_loop(base, Complex64::new(0.0, 0.0), 0.05))
            .unwrap();
        let large = continue_along(&PathSpec::based_loop(base, Complex64::new(0.0, 0.0), 0.3))
            .unwrap();
        assert!(max_abs_diff(&small.matrix, &large.matrix) < 1e-7);
    }

    #[test]
    fn based_loops_match_the_literature_matrices() {
        // The based-loop normalization at 0.5 reproduces the same matrices
        // as the plain circles: the connecting segments cancel.
        let base = Complex64::new(0.5, 0.0);
        let m0 = continue_along(&PathSpec::based_loop(base, Complex64::new(0.0, 0.0), 0.1))
            .unwrap();
        let m1 = continue_along(&PathSpec::based_loop(base, Complex64::new(1.0, 0.0), 0.1))
            .unwrap();
        assert!(max_abs_diff(&m0.matrix, &loop0_expected()) < 1e-9);
        assert!(max_abs_diff(&m1.matrix, &loop1_expected()) < 1e-9);
    }

    #[test]
    fn big_circle_composes_the_two_puncture_loops() {
        // A radius-10 circle around the origin encloses both singular
        // points; continued from w = 10 it must equal the composite of the
        // two elementary loops based there, and its inverse (the loop around
        // infinity) then cancels them to the identity.
        let base = Complex64::new(10.0, 0.0);
        let big = continue_along(&PathSpec::circle(Complex64::new(0.0, 0.0), 10.0, 1)).unwrap();

        // Loop around 1, approaching along the real axis from the right.
        let g1 = PathSpec::new(base)
            .line_to(Complex64::new(1.4, 0.0))
            .arc(Complex64::new(1.0, 0.0), 2.0 * PI)
            .line_to(base);
        // Loop around 0, approaching through the lower half-plane.
        let mid = Complex64::new(0.1, -2.0);
        let g0 = PathSpec::new(base)
            .line_to(mid)
            .line_to(Complex64::new(0.1, 0.0))
            .arc(Complex64::new(0.0, 0.0), 2.0 * PI)
            .line_to(mid)
            .line_to(base);
        let m1 = continue_along(&g1).unwrap();
        let m0 = continue_along(&g0).unwrap();

        // Orientation convention: the counterclockwise outer circle first
        // crosses the cut beyond w = 1, so the w = 1 loop acts first.
        let want = &m0.matrix * &m1.matrix;
        assert!(
            max_abs_diff(&big.matrix, &want) < 1e-8,
            "composite mismatch: {:.3e}",
            max_abs_diff(&big.matrix, &want)
        );
        let infinity = continue_along(&PathSpec::circle(Complex64::new(0.0, 0.0), 10.0, -1))
            .unwrap();
        let total = &infinity.matrix * &m0.matrix * &m1.matrix;
        assert!(max_abs_vs_identity(&total) < 1e-8);
    }

    #[test]
    fn clearance_violations_are_rejected_with_location() {
        // A segment crossing w = 1.
        let p = PathSpec::new(Complex64::new(0.5, 0.0)).line_to(Complex64::new(1.5, 0.0));
        match continue_along(&p) {
            Err(Error::Clearance { singular, .. }) => assert!(singular.contains('1')),
            other => panic!("expected clearance error, got {other:?}"),
        }
        // A circle passing within 1e-4 of w = 0.
        let p = PathSpec::circle(Complex64::new(0.0, 0.0), 1e-4, 1);
        assert!(matches!(
            continue_along(&p),
            Err(Error::Clearance { .. })
        ));
    }

    #[test]
    fn double_loop_squares_the_monodromy() {
        let single = continue_along(&PathSpec::circle(Complex64::new(0.0, 0.0), 0.1, 1)).unwrap();
        let double = continue_along(&PathSpec::circle(Complex64::new(0.0, 0.0), 0.1, 2)).unwrap();
        let want = &single.matrix * &single.matrix;
        assert!(max_abs_diff(&double.matrix, &want) < 1e-9);
        assert!(!double.germ_swapped);
    }

    #[test]
    fn fusing_relation_holds_on_samples() {
        // Fixed point.
        assert!(verify_fusing(&[0.5]).unwrap() < 1e-12);
        // A 20-point spread across (0.05, 0.95).
        let samples: Vec<f64> = (0..20).map(|i| 0.05 + 0.9 * (i as f64) / 19.0).collect();
        assert!(verify_fusing(&samples).unwrap() < 1e-10);
        // Near-degenerate sample.
        assert!(verify_fusing(&[0.01]).unwrap() < 1e-8);
        // Out-of-domain sample refuses.
        assert!(matches!(verify_fusing(&[1.2]), Err(Error::Domain(_))));
    }

    #[test]
    fn hauptmodul_leading_term_is_sixteen_sqrt_q() {
        let lambda = hauptmodul_series(&rat_int(4)).unwrap();
        let (e, c) = lambda.leading().unwrap();
        assert_eq!(e, &rat(1, 2));
        assert_eq!(c, &rat_int(16));
    }

    #[test]
    fn lift_matches_the_frozen_expansions() {
        let (f1, f2) = lift_to_tau(&rat_int(4)).unwrap();
        // F1 = q^{-1/16}(1 + q^{1/2} + 3q + 4q^{3/2} + 5q^2 + 8q^{5/2} + 11q^3 + ...)
        let want1 = [1, 1, 3, 4, 5, 8, 11];
        for (i, &w) in want1.iter().enumerate() {
            let e = rat(-1, 16) + rat(i as i64, 2);
            assert_eq!(f1.coeff(&e), rat_int(w), "F1 term {i}");
        }
        // F2 = q^{3/16}(2 + 2q^{1/2} + 2q + 4q^{3/2} + 8q^2 + 10q^{5/2} + 12q^3 + ...)
        let want2 = [2, 2, 2, 4, 8, 10, 12];
        for (i, &w) in want2.iter().enumerate() {
            let e = rat(3, 16) + rat(i as i64, 2);
            assert_eq!(f2.coeff(&e), rat_int(w), "F2 term {i}");
        }
    }

    #[test]
    fn lift_rejects_tiny_cutoff() {
        assert!(matches!(lift_to_tau(&rat_int(3)), Err(Error::Domain(_))));
    }

    #[test]
    fn lift_satisfies_the_block_identities_as_series() {
        // F1*F2 squared must equal lambda / sqrt(lambda(1-lambda)) — the
        // series image of (F1 F2)^2 = w / sqrt(w(1-w)).
        let cutoff = rat_int(5);
        let (f1, f2) = lift_to_tau(&cutoff).unwrap();
        let margin = &cutoff + rat_int(2);
        let lambda = hauptmodul_series(&margin).unwrap();
        let one = PuiseuxSeries::constant(rat_int(1), margin.clone());
        let r1 = lambda.mul(&one.sub(&lambda)).sqrt().unwrap();
        let want = lambda.div(&r1).unwrap();
        let got = f1.mul(&f2).powi(2);
        let common = got.cutoff().min(want.cutoff()).clone();
        let diff = got.truncate(&common).sub(&want.truncate(&common));
        assert!(diff.is_zero(), "difference {:?}", diff.leading());
    }

    #[test]
    fn lift_evaluates_to_the_principal_blocks() {
        // At tau = 2i the Hauptmodul lands in (0, 1), where the series lift
        // and the principal-branch closed form must agree.
        let tau = Complex64::new(0.0, 2.0);
        let cutoff = rat_int(12);
        let lambda = hauptmodul_series(&cutoff).unwrap();
        let w = lambda.eval_tau(tau).unwrap().value;
        assert!(w.im.abs() < 1e-12 && w.re > 0.0 && w.re < 1.0);
        let (f1c, f2c) = blocks_at(w).unwrap();
        let (f1, f2) = lift_to_tau(&cutoff).unwrap();
        let v1 = f1.eval_tau(tau).unwrap();
        let v2 = f2.eval_tau(tau).unwrap();
        assert!((v1.value - f1c).norm() < 1e-10 + v1.truncation_bound);
        assert!((v2.value - f2c).norm() < 1e-10 + v2.truncation_bound);
    }
}
