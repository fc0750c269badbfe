//! Virasoro/affine characters as exact q-series, and numeric verification of
//! their modular transformation behaviour.
//!
//! Characters are [`PuiseuxSeries`] in `q = exp(2 pi i tau)` whose exponents
//! are `h - c/24 + n` for nonnegative integers `n`.
//!
//! * Ising (free-fermion products):
//!
//!   ```text
//!   χ_𝒱 = q^(-1/48) (prod_{n>=1}(1 + q^(n-1/2)) + prod_{n>=1}(1 - q^(n-1/2))) / 2
//!   χ_ε = q^(-1/48) (prod_{n>=1}(1 + q^(n-1/2)) - prod_{n>=1}(1 - q^(n-1/2))) / 2
//!   χ_σ = q^(1/24)   prod_{n>=1}(1 + q^n)
//!   ```
//!
//! * Affine su(2) level k (Weyl-Kac quotient of theta-like sums):
//!
//!   ```text
//!   χ_a = N_a / D,
//!   N_a = sum_{n in Z} (a+1+2n(k+2)) q^((a+1+2n(k+2))^2 / (4(k+2)))
//!   D   = sum_{n in Z} (4n+1)        q^((4n+1)^2 / 8)
//!   ```
//!
//!   The quotient must come out with nonnegative integer coefficients and
//!   leading exponent `h_a - c/24`; both are verified, not assumed.
//!
//! [`check_modular_transform`] evaluates the characters numerically and
//! measures `max_M |χ_M(-1/τ) - Σ_N S_MN χ_N(τ)|` (S) or
//! `max_M |χ_M(τ+1) - T_MM χ_M(τ)|` (T), refusing to report a residual the
//! series truncation cannot support.

pub mod series;

pub use series::{rat, rat_int, PuiseuxSeries, SeriesValue};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modular_data::ModularData;

/// Convert an exact `Rational64` (weights, central charges) to a `BigRational`.
pub fn to_big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// `prod_{n>=1} (1 + sign * q^(n - offset))` truncated below `cutoff`,
/// with `offset` either 0 (integer grid) or 1/2 (half-integer grid).
fn fermionic_product(sign: i64, offset: BigRational, cutoff: &BigRational) -> PuiseuxSeries {
    let mut acc = PuiseuxSeries::constant(BigRational::one(), cutoff.clone());
    let mut n = BigRational::one();
    loop {
        let e = &n - &offset;
        if &e >= cutoff {
            break;
        }
        let factor = PuiseuxSeries::from_terms(
            [
                (BigRational::zero(), BigRational::one()),
                (e, BigRational::from_integer(BigInt::from(sign))),
            ],
            cutoff.clone(),
        );
        acc = acc.mul(&factor);
        n += BigRational::one();
    }
    acc
}

/// The three Ising characters, ordered as the labels of
/// [`crate::modular_data::ising_modular_data`]: (𝒱, ε, σ).
pub fn ising_characters(cutoff: &BigRational) -> [PuiseuxSeries; 3] {
    let half = rat(1, 2);
    let s48 = rat(1, 48);
    let s24 = rat(1, 24);

    // Products need knowledge slightly past the cutoff so the q^(∓1/48)
    // prefactor shifts land exactly on `cutoff`.
    let c_ns = cutoff + &s48;
    let plus = fermionic_product(1, half.clone(), &c_ns);
    let minus = fermionic_product(-1, half.clone(), &c_ns);
    let chi_v = plus
        .add(&minus)
        .scale(&half)
        .mul_monomial(&-&s48, &BigRational::one());
    let chi_e = plus
        .sub(&minus)
        .scale(&half)
        .mul_monomial(&-&s48, &BigRational::one());

    let c_r = cutoff - &s24;
    let chi_s =
        fermionic_product(1, BigRational::zero(), &c_r).mul_monomial(&s24, &BigRational::one());

    [
        chi_v.truncate(cutoff),
        chi_e.truncate(cutoff),
        chi_s.truncate(cutoff),
    ]
}

/// Theta-like sum `sum_{n in Z} (r + n*step) * q^((r + n*step)^2 / (4m))`
/// truncated below `cutoff`.
fn weighted_theta_sum(r: i64, step: i64, four_m: i64, cutoff: &BigRational) -> PuiseuxSeries {
    let mut terms = Vec::new();
    for direction in [1i64, -1i64] {
        let mut n = if direction == 1 { 0i64 } else { -1i64 };
        loop {
            let val = r + n * step;
            let e = rat(val * val, four_m);
            if &e >= cutoff {
                break;
            }
            terms.push((e, rat_int(val)));
            n += direction;
        }
    }
    PuiseuxSeries::from_terms(terms, cutoff.clone())
}

/// Characters of the affine su(2) level-k primaries, ordered a = 0..k.
///
/// Verifies that each quotient has leading exponent `h_a - c/24` and
/// nonnegative integer coefficients before returning it.
pub fn su2_characters(k: usize, cutoff: &BigRational) -> Result<Vec<PuiseuxSeries>> {
    let ki = k as i64;
    let md = crate::modular_data::su2_modular_data(k);
    let exponents = md.t_exponents();
    // Build operands past the requested cutoff; the su(2) leading exponents
    // sit within (-1, 1), so one extra unit absorbs every shift.
    let margin = cutoff + rat_int(2);
    let denom = weighted_theta_sum(1, 4, 8, &margin);
    let mut out = Vec::with_capacity(k + 1);
    for a in 0..=ki {
        let numer = weighted_theta_sum(a + 1, 2 * (ki + 2), 4 * (ki + 2), &margin);
        let chi = numer.div(&denom)?.truncate(cutoff);
        // Leading term: the top graded piece is the (a+1)-dimensional sl(2)
        // multiplet at energy h_a - c/24.
        let expected_lead = to_big(exponents[a as usize]);
        let expected_dim = rat_int(a + 1);
        match chi.leading() {
            Some((e, c)) if *e == expected_lead && *c == expected_dim => {}
            other => {
                return Err(Error::CheckFailed {
                    check: format!(
                        "su(2) level {k} character {a} leading term (got {:?}, want exponent {expected_lead})",
                        other.map(|(e, c)| (e.to_string(), c.to_string()))
                    ),
                    residual: 1.0,
                    tol: 0.0,
                })
            }
        }
        for (e, c) in chi.terms() {
            if !c.is_integer() || c.is_negative() {
                return Err(Error::NonIntegral {
                    what: format!("su(2) level {k} character {a}, coefficient of q^{e}"),
                    value: c.to_f64().unwrap_or(f64::NAN),
                    residual: f64::NAN,
                });
            }
        }
        out.push(chi);
    }
    Ok(out)
}

/// Which modular transformation to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    S,
    T,
}

/// Measure how well `chars` (ordered like `md.labels()`) transform under S
/// or T at the point `tau`.
///
/// Returns the maximum residual over labels. Errors when the accumulated
/// truncation bounds exceed `tol`, i.e. when the cutoff is too small to
/// support a verdict at that tolerance.
pub fn check_modular_transform(
    md: &ModularData,
    chars: &[PuiseuxSeries],
    tau: Complex64,
    which: Transform,
    tol: f64,
) -> Result<f64> {
    let n = md.rank();
    if chars.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} characters for rank {n}",
            chars.len()
        )));
    }
    let mut residual: f64 = 0.0;
    match which {
        Transform::S => {
            let s_tau = -Complex64::new(1.0, 0.0) / tau;
            let at_tau: Vec<SeriesValue> = chars
                .iter()
                .map(|c| c.eval_tau(tau))
                .collect::<Result<_>>()?;
            let at_s: Vec<SeriesValue> = chars
                .iter()
                .map(|c| c.eval_tau(s_tau))
                .collect::<Result<_>>()?;
            for m in 0..n {
                let mut rhs = Complex64::new(0.0, 0.0);
                let mut bound = at_s[m].truncation_bound;
                for p in 0..n {
                    rhs += md.s_entry(m, p) * at_tau[p].value;
                    bound += md.s_entry(m, p).norm() * at_tau[p].truncation_bound;
                }
                if bound > tol {
                    return Err(Error::Truncation { bound, tol });
                }
                residual = residual.max((at_s[m].value - rhs).norm());
            }
        }
        Transform::T => {
            let t_tau = tau + Complex64::new(1.0, 0.0);
            let t_diag = md.t_diagonal();
            for m in 0..n {
                let lhs = chars[m].eval_tau(t_tau)?;
                let rhs = chars[m].eval_tau(tau)?;
                let bound = lhs.truncation_bound + rhs.truncation_bound;
                if bound > tol {
                    return Err(Error::Truncation { bound, tol });
                }
                residual = residual.max((lhs.value - t_diag[m] * rhs.value).norm());
            }
        }
    }
    Ok(residual)
}
