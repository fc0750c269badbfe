//! Truncated Puiseux series: finitely many terms `c * q^e` with exact
//! rational exponents and exact rational coefficients, plus a cutoff
//! recording the first exponent about which nothing is known.
//!
//! A value represents `sum_e c_e q^e + O(q^cutoff)` with every stored
//! exponent strictly below the cutoff. Arithmetic propagates cutoffs
//! honestly: multiplying series known mod `q^ca` and `q^cb` with leading
//! exponents `a0`, `b0` yields a product known mod `q^min(ca+b0, cb+a0)`,
//! and division/square roots preserve *relative* precision. No operation
//! ever claims terms it cannot actually determine.
//!
//! Multiplication, division, and square root run on a dense common grid:
//! all exponents of the operands are integer multiples of `1/D` for the
//! least common denominator `D`, so the coefficient recurrences index flat
//! vectors instead of comparing rational keys.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Exact rational from an integer.
pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational `p/q`.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// A truncated series `sum c_e q^e + O(q^cutoff)`, exponents strictly below
/// the cutoff, no zero coefficients stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PuiseuxSeries {
    terms: BTreeMap<BigRational, BigRational>,
    cutoff: BigRational,
}

/// Result of evaluating a series at a point of the upper half-plane.
#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Conservative bound on the dropped tail; see [`PuiseuxSeries::eval_tau`].
    pub truncation_bound: f64,
}

impl PuiseuxSeries {
    /// The zero series, known up to `O(q^cutoff)`.
    pub fn zero(cutoff: BigRational) -> Self {
        PuiseuxSeries {
            terms: BTreeMap::new(),
            cutoff,
        }
    }

    /// The constant series `c + O(q^cutoff)`.
    pub fn constant(c: BigRational, cutoff: BigRational) -> Self {
        Self::monomial(BigRational::zero(), c, cutoff)
    }

    /// The single term `c q^e + O(q^cutoff)`.
    pub fn monomial(exponent: BigRational, coeff: BigRational, cutoff: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() && exponent < cutoff {
            terms.insert(exponent, coeff);
        }
        PuiseuxSeries { terms, cutoff }
    }

    /// Build from explicit terms; coefficients at equal exponents accumulate,
    /// zeros and terms at or above the cutoff are dropped.
    pub fn from_terms(
        terms: impl IntoIterator<Item = (BigRational, BigRational)>,
        cutoff: BigRational,
    ) -> Self {
        let mut map: BTreeMap<BigRational, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            if e >= cutoff || c.is_zero() {
                continue;
            }
            *map.entry(e).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        PuiseuxSeries { terms: map, cutoff }
    }

    pub fn cutoff(&self) -> &BigRational {
        &self.cutoff
    }

    /// Exponent/coefficient pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `q^e` (zero when absent).
    pub fn coeff(&self, e: &BigRational) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Lowest term `(exponent, coefficient)`, if the series is not zero.
    pub fn leading(&self) -> Option<(&BigRational, &BigRational)> {
        self.terms.iter().next()
    }

    /// Restrict knowledge to `O(q^new_cutoff)`; cannot extend the cutoff.
    pub fn truncate(&self, new_cutoff: &BigRational) -> Self {
        let cutoff = self.cutoff.clone().min(new_cutoff.clone());
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| *e < &cutoff)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        PuiseuxSeries { terms, cutoff }
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    /// Multiply by the exact monomial `c q^e`; shifts terms and cutoff.
    pub fn mul_monomial(&self, e: &BigRational, c: &BigRational) -> Self {
        if c.is_zero() {
            // Knowledge becomes exact zero up to the shifted cutoff.
            return PuiseuxSeries::zero(&self.cutoff + e);
        }
        PuiseuxSeries {
            terms: self
                .terms
                .iter()
                .map(|(te, tc)| (te + e, tc * c))
                .collect(),
            cutoff: &self.cutoff + e,
        }
    }

    /// Multiply every coefficient by an exact rational.
    pub fn scale(&self, c: &BigRational) -> Self {
        self.mul_monomial(&BigRational::zero(), c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let cutoff = self.cutoff.clone().min(other.cutoff.clone());
        let mut terms = BTreeMap::new();
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            if e >= &cutoff {
                continue;
            }
            *terms.entry(e.clone()).or_insert_with(BigRational::zero) += c;
        }
        terms.retain(|_, c: &mut BigRational| !c.is_zero());
        PuiseuxSeries { terms, cutoff }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Effective leading exponent for precision bookkeeping: the first term's
    /// exponent, or the cutoff itself when no term is known (a zero series
    /// could have its first term anywhere at or above the cutoff).
    fn lead_or_cutoff(&self) -> BigRational {
        self.leading()
            .map(|(e, _)| e.clone())
            .unwrap_or_else(|| self.cutoff.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a0 = self.lead_or_cutoff();
        let b0 = other.lead_or_cutoff();
        let cutoff = (&self.cutoff + &b0).min(&other.cutoff + &a0);
        if self.is_zero() || other.is_zero() {
            return PuiseuxSeries::zero(cutoff);
        }
        // Dense convolution over the common exponent grid.
        let d = common_denominator(&[self, other]);
        let (a_lead, a_vec) = self.dense(d);
        let (b_lead, b_vec) = other.dense(d);
        let lead = &a_lead + &b_lead;
        let len = rel_len(&(&cutoff - &lead), d);
        let mut out = vec![BigRational::zero(); len];
        for (i, ca) in a_vec.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b_vec.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if cb.is_zero() {
                    continue;
                }
                out[i + j] += ca * cb;
            }
        }
        Self::from_dense(lead, out, d, cutoff)
    }

    /// Small nonnegative integer power by repeated multiplication.
    pub fn powi(&self, n: u32) -> Self {
        // `x^0 = 1` exactly, with the operand's own cutoff.
        let mut acc = PuiseuxSeries::constant(BigRational::one(), self.cutoff.clone());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Division with honest precision: the quotient keeps the smaller of the
    /// two relative precisions. Errors when the divisor has no known terms.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let (b_lead, b_unit) = match other.leading() {
            Some((e, c)) => (e.clone(), c.clone()),
            None => {
                return Err(Error::Series(
                    "division by a series with no known terms".into(),
                ))
            }
        };
        let a0 = self.lead_or_cutoff();
        let rel = (&self.cutoff - &a0).min(&other.cutoff - &b_lead);
        let lead = &a0 - &b_lead;
        let cutoff = &lead + &rel;
        if self.is_zero() {
            return Ok(PuiseuxSeries::zero(cutoff));
        }
        let d = common_denominator(&[self, other]);
        let len = rel_len(&rel, d);
        let (_, a_vec) = self.dense_rel(d, &a0, len);
        let (_, b_vec) = other.dense_rel(d, &b_lead, len);
        let mut q = vec![BigRational::zero(); len];
        for j in 0..len {
            let mut acc = a_vec[j].clone();
            for i in 1..=j {
                if !b_vec[i].is_zero() && !q[j - i].is_zero() {
                    acc -= &b_vec[i] * &q[j - i];
                }
            }
            q[j] = acc / &b_unit;
        }
        Ok(Self::from_dense(lead, q, d, cutoff))
    }

    /// Square root of a series whose leading coefficient is the square of a
    /// rational. Picks the branch whose leading coefficient is positive.
    pub fn sqrt(&self) -> Result<Self> {
        let (a0, c0) = match self.leading() {
            Some((e, c)) => (e.clone(), c.clone()),
            None => {
                // sqrt of an all-unknown series: zero with halved cutoff.
                return Ok(PuiseuxSeries::zero(self.cutoff.clone() / rat_int(2)));
            }
        };
        let root = rational_sqrt(&c0).ok_or_else(|| Error::NotASquare(c0.to_string()))?;
        let rel = &self.cutoff - &a0;
        let lead = a0.clone() / rat_int(2);
        let cutoff = &lead + &rel;
        let d = common_denominator(&[self]);
        let len = rel_len(&rel, d);
        let (_, u) = self.dense_rel(d, &a0, len);
        // v^2 = u / c0 with v_0 = 1: v_j = (u_j/c0 - sum_{0<i<j} v_i v_{j-i}) / 2.
        let mut v = vec![BigRational::zero(); len];
        if len > 0 {
            v[0] = BigRational::one();
        }
        let two = rat_int(2);
        for j in 1..len {
            let mut acc = &u[j] / &c0;
            for i in 1..j {
                if !v[i].is_zero() && !v[j - i].is_zero() {
                    acc -= &v[i] * &v[j - i];
                }
            }
            v[j] = acc / &two;
        }
        for x in v.iter_mut() {
            *x *= &root;
        }
        Ok(Self::from_dense(lead, v, d, cutoff))
    }

    /// Evaluate at `q = exp(2 pi i tau)` for `tau` in the upper half-plane.
    ///
    /// The truncation bound charges every dropped term with the largest
    /// stored coefficient modulus and a geometric growth allowance of 2 per
    /// unit exponent: `|q|^cutoff * max(1, max|c|) / (1 - 2|q|)`. That is
    /// far above the subexponential coefficient growth of the character-type
    /// series this crate produces, and still astronomically small at the
    /// evaluation points of interest. Requires `2|q| < 1`.
    pub fn eval_tau(&self, tau: Complex64) -> Result<SeriesValue> {
        if tau.im <= 0.0 {
            return Err(Error::Domain(format!(
                "evaluation point tau = {tau} is not in the upper half-plane"
            )));
        }
        let q_abs = (-2.0 * PI * tau.im).exp();
        if 2.0 * q_abs >= 1.0 {
            return Err(Error::Domain(format!(
                "|q| = {q_abs:.6} too large for a controlled truncation bound"
            )));
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut max_coeff: f64 = 1.0;
        let two_pi_i_tau = Complex64::new(0.0, 2.0 * PI) * tau;
        for (e, c) in &self.terms {
            let ef = e.to_f64().ok_or_else(|| {
                Error::Series(format!("exponent {e} does not fit in an f64"))
            })?;
            let cf = c.to_f64().ok_or_else(|| {
                Error::Series(format!("coefficient {c} does not fit in an f64"))
            })?;
            value += (two_pi_i_tau * ef).exp() * cf;
            max_coeff = max_coeff.max(cf.abs());
        }
        let cf = self.cutoff.to_f64().ok_or_else(|| {
            Error::Series(format!("cutoff {} does not fit in an f64", self.cutoff))
        })?;
        let truncation_bound = q_abs.powf(cf) * max_coeff / (1.0 - 2.0 * q_abs);
        Ok(SeriesValue {
            value,
            truncation_bound,
        })
    }

    /// Dense coefficients on the `1/d` grid starting at the leading exponent;
    /// callers guarantee the series is nonzero.
    fn dense(&self, d: i64) -> (BigRational, Vec<BigRational>) {
        let lead = self.lead_or_cutoff();
        let len = rel_len(&(&self.cutoff - &lead), d);
        self.dense_rel(d, &lead, len)
    }

    /// Dense coefficients relative to `lead`, padded/truncated to `len`.
    fn dense_rel(&self, d: i64, lead: &BigRational, len: usize) -> (BigRational, Vec<BigRational>) {
        let mut v = vec![BigRational::zero(); len];
        let df = rat_int(d);
        for (e, c) in &self.terms {
            let idx_rat = (e - lead) * &df;
            debug_assert!(idx_rat.is_integer(), "exponent off the common grid");
            if idx_rat.is_negative() {
                continue;
            }
            if let Some(idx) = idx_rat.to_integer().to_usize() {
                if idx < len {
                    v[idx] = c.clone();
                }
            }
        }
        (lead.clone(), v)
    }

    fn from_dense(lead: BigRational, v: Vec<BigRational>, d: i64, cutoff: BigRational) -> Self {
        let df = rat_int(d);
        let terms = v
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (&lead + rat_int(i as i64) / &df, c))
            .filter(|(e, _)| e < &cutoff)
            .collect();
        PuiseuxSeries { terms, cutoff }
    }
}

/// Least common denominator of every exponent in the given series.
fn common_denominator(series: &[&PuiseuxSeries]) -> i64 {
    let mut d = BigInt::one();
    for s in series {
        for (e, _) in s.terms() {
            d = d.lcm(e.denom());
        }
    }
    d.to_i64().expect("exponent denominators stay small")
}

/// Number of grid points in `[0, rel)` at spacing `1/d` (ceiling).
fn rel_len(rel: &BigRational, d: i64) -> usize {
    if rel.is_negative() || rel.is_zero() {
        return 0;
    }
    let scaled = rel * rat_int(d);
    let ceil = scaled.ceil().to_integer();
    ceil.to_usize().expect("series length stays small")
}

/// `sqrt(p/q)` as an exact rational, when both `p` and `q` are perfect squares.
fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let p = x.numer();
    let q = x.denom();
    let sp = p.sqrt();
    let sq = q.sqrt();
    if &(&sp * &sp) == p && &(&sq * &sq) == q {
        Some(BigRational::new(sp, sq))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(cutoff: i64) -> PuiseuxSeries {
        // 1 + q + q^2 + ... below the cutoff.
        PuiseuxSeries::from_terms(
            (0..cutoff).map(|n| (rat_int(n), BigRational::one())),
            rat_int(cutoff),
        )
    }

    #[test]
    fn add_merges_and_cancels() {
        let a = PuiseuxSeries::monomial(rat(1, 2), rat_int(3), rat_int(5));
        let b = PuiseuxSeries::monomial(rat(1, 2), rat_int(-3), rat_int(4));
        let sum = a.add(&b);
        assert!(sum.is_zero());
        assert_eq!(sum.cutoff(), &rat_int(4));
    }

    #[test]
    fn mul_of_binomials() {
        // (1 + q)(1 - q) = 1 - q^2.
        let c = rat_int(10);
        let one = PuiseuxSeries::constant(BigRational::one(), c.clone());
        let q = PuiseuxSeries::monomial(rat_int(1), BigRational::one(), c.clone());
        let prod = one.add(&q).mul(&one.sub(&q));
        assert_eq!(prod.coeff(&rat_int(0)), rat_int(1));
        assert_eq!(prod.coeff(&rat_int(1)), rat_int(0));
        assert_eq!(prod.coeff(&rat_int(2)), rat_int(-1));
    }

    #[test]
    fn mul_cutoff_bookkeeping() {
        // (q^2 known mod q^5) * (q^3 known mod q^4): product known mod
        // min(5+3, 4+2) = q^6.
        let a = PuiseuxSeries::monomial(rat_int(2), BigRational::one(), rat_int(5));
        let b = PuiseuxSeries::monomial(rat_int(3), BigRational::one(), rat_int(4));
        let p = a.mul(&b);
        assert_eq!(p.cutoff(), &rat_int(6));
        assert_eq!(p.coeff(&rat_int(5)), rat_int(1));
    }

    #[test]
    fn geometric_series_inverts_one_minus_q() {
        let c = rat_int(12);
        let one = PuiseuxSeries::constant(BigRational::one(), c.clone());
        let q = PuiseuxSeries::monomial(rat_int(1), BigRational::one(), c.clone());
        let inv = one.div(&one.sub(&q)).unwrap();
        for n in 0..12 {
            assert_eq!(inv.coeff(&rat_int(n)), BigRational::one(), "q^{n}");
        }
    }

    #[test]
    fn division_preserves_relative_precision() {
        // (q known mod q^9) / (q^2 known mod q^4): relative precisions are
        // 8 and 2, so the quotient is q^-1 known to relative precision 2,
        // i.e. mod q^1.
        let a = PuiseuxSeries::monomial(rat_int(1), BigRational::one(), rat_int(9));
        let b = PuiseuxSeries::monomial(rat_int(2), BigRational::one(), rat_int(4));
        let q = a.div(&b).unwrap();
        assert_eq!(q.cutoff(), &rat_int(1));
        assert_eq!(q.coeff(&rat_int(-1)), BigRational::one());
    }

    #[test]
    fn division_by_unknown_series_fails() {
        let a = geometric(5);
        let zero = PuiseuxSeries::zero(rat_int(5));
        assert!(matches!(a.div(&zero), Err(Error::Series(_))));
    }

    #[test]
    fn sqrt_squares_back() {
        // sqrt(1 + q), squared, returns 1 + q.
        let c = rat_int(16);
        let one = PuiseuxSeries::constant(BigRational::one(), c.clone());
        let q = PuiseuxSeries::monomial(rat_int(1), BigRational::one(), c.clone());
        let a = one.add(&q);
        let s = a.sqrt().unwrap();
        let back = s.mul(&s);
        for n in 0..16 {
            assert_eq!(back.coeff(&rat_int(n)), a.coeff(&rat_int(n)), "q^{n}");
        }
        // Half-integer binomial coefficients appear with denominator powers of 2.
        assert_eq!(s.coeff(&rat_int(1)), rat(1, 2));
        assert_eq!(s.coeff(&rat_int(2)), rat(-1, 8));
    }

    #[test]
    fn sqrt_of_scaled_monomial() {
        // sqrt(4 q^(1/2) (1 + q)) = 2 q^(1/4) (1 + q)^(1/2).
        let c = rat_int(8);
        let one = PuiseuxSeries::constant(BigRational::one(), c.clone());
        let q = PuiseuxSeries::monomial(rat_int(1), BigRational::one(), c.clone());
        let a = one.add(&q).mul_monomial(&rat(1, 2), &rat_int(4));
        let s = a.sqrt().unwrap();
        assert_eq!(s.leading().unwrap().0, &rat(1, 4));
        assert_eq!(s.coeff(&rat(1, 4)), rat_int(2));
        assert_eq!(s.coeff(&rat(5, 4)), rat_int(1));
    }

    #[test]
    fn sqrt_rejects_non_square_leading_coefficient() {
        let a = PuiseuxSeries::monomial(rat_int(0), rat_int(2), rat_int(4));
        assert!(matches!(a.sqrt(), Err(Error::NotASquare(_))));
        let b = PuiseuxSeries::monomial(rat_int(0), rat_int(-1), rat_int(4));
        assert!(matches!(b.sqrt(), Err(Error::NotASquare(_))));
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let c = rat_int(6);
        let one = PuiseuxSeries::constant(BigRational::one(), c.clone());
        let q = PuiseuxSeries::monomial(rat_int(1), BigRational::one(), c.clone());
        let a = one.add(&q);
        let cube = a.powi(3);
        assert_eq!(cube.coeff(&rat_int(0)), rat_int(1));
        assert_eq!(cube.coeff(&rat_int(1)), rat_int(3));
        assert_eq!(cube.coeff(&rat_int(2)), rat_int(3));
        assert_eq!(cube.coeff(&rat_int(3)), rat_int(1));
    }

    #[test]
    fn eval_tau_matches_closed_form() {
        // Geometric series vs 1/(1-q) at tau = 2i: |q| ~ 3.5e-6.
        let s = geometric(30);
        let tau = Complex64::new(0.0, 2.0);
        let v = s.eval_tau(tau).unwrap();
        let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
        let exact = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - q);
        assert!((v.value - exact).norm() < 1e-15);
        assert!(v.truncation_bound < 1e-100);
        assert!((v.value - exact).norm() <= v.truncation_bound + 1e-15);
    }

    #[test]
    fn eval_tau_rejects_lower_half_plane() {
        let s = geometric(5);
        assert!(s.eval_tau(Complex64::new(0.0, -1.0)).is_err());
        assert!(s.eval_tau(Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn mul_monomial_shifts_cutoff() {
        let s = geometric(5).mul_monomial(&rat(-1, 48), &BigRational::one());
        assert_eq!(s.cutoff(), &(rat_int(5) + rat(-1, 48)));
        assert_eq!(s.leading().unwrap().0, &rat(-1, 48));
    }

    #[test]
    fn truncate_drops_terms_and_knowledge() {
        let s = geometric(10);
        let t = s.truncate(&rat_int(3));
        assert_eq!(t.num_terms(), 3);
        assert_eq!(t.cutoff(), &rat_int(3));
        // Truncating to a larger cutoff must not pretend extra knowledge.
        let u = t.truncate(&rat_int(7));
        assert_eq!(u.cutoff(), &rat_int(3));
    }

    #[test]
    fn mixed_grids_multiply_exactly() {
        // (q^(1/3) + q) * (q^(1/2) - 1) exercises lcm denominator 6.
        let c = rat_int(4);
        let a = PuiseuxSeries::from_terms(
            [
                (rat(1, 3), BigRational::one()),
                (rat_int(1), BigRational::one()),
            ],
            c.clone(),
        );
        let b = PuiseuxSeries::from_terms(
            [
                (rat(1, 2), BigRational::one()),
                (rat_int(0), -BigRational::one()),
            ],
            c.clone(),
        );
        let p = a.mul(&b);
        assert_eq!(p.coeff(&rat(5, 6)), BigRational::one());
        assert_eq!(p.coeff(&rat(1, 3)), -BigRational::one());
        assert_eq!(p.coeff(&rat(3, 2)), BigRational::one());
        assert_eq!(p.coeff(&rat_int(1)), -BigRational::one());
    }
}
