//! Exact rational polynomial arithmetic: monic Lagrange interpolation,
//! quasi-polynomial refutation for the 4×4 super-regular count, and the
//! closed-form count polynomials for small matrices.
//!
//! All arithmetic is arbitrary-precision and exact; rationals are kept in
//! lowest terms with positive denominators after every operation. Outputs
//! that are supposed to be integers are checked to have denominator 1
//! rather than rounded.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("duplicate abscissa {0}")]
    DuplicateAbscissa(BigInt),
    #[error("expected {expected} interpolation points, got {got}")]
    WrongPointCount { expected: usize, got: usize },
    #[error("abscissa {q} is not congruent to {residue} mod {period}")]
    ResidueMismatch { q: u64, residue: u64, period: u64 },
    #[error("no count available for q = {0}")]
    MissingData(u64),
}

/// Polynomial with exact rational coefficients, constant term first.
/// The coefficient list never has a trailing zero; the zero polynomial is
/// the empty list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> RatPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> RatPoly {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest nonzero index; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of x^i (zero beyond the stored degree).
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_int(&self, x: i64) -> BigRational {
        self.eval(&BigRational::from_integer(BigInt::from(x)))
    }
}

/// Exact Horner evaluation of `p` at `x`.
pub fn eval_poly(p: &RatPoly, x: &BigRational) -> BigRational {
    p.eval(x)
}

/// The unique monic polynomial of degree `n` through `n` points with
/// distinct abscissae:
/// f(x) = xⁿ + Σᵢ (bᵢ − aᵢⁿ) Πⱼ≠ᵢ (x − aⱼ)/(aᵢ − aⱼ).
pub fn lagrange_monic(points: &[(BigInt, BigInt)], n: usize) -> Result<RatPoly, PolyError> {
    if points.len() != n {
        return Err(PolyError::WrongPointCount {
            expected: n,
            got: points.len(),
        });
    }
    for (i, (a, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|(a2, _)| a2 == a) {
            return Err(PolyError::DuplicateAbscissa(a.clone()));
        }
    }

    // start from x^n
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();

    for (i, (a_i, b_i)) in points.iter().enumerate() {
        // numerator basis Π_{j≠i} (x − a_j), integer coefficients
        let mut basis: Vec<BigInt> = vec![BigInt::one()];
        let mut denom = BigInt::one();
        for (j, (a_j, _)) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut next = vec![BigInt::zero(); basis.len() + 1];
            for (d, c) in basis.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * a_j;
            }
            basis = next;
            denom *= a_i - a_j;
        }
        let weight = BigRational::new(b_i - a_i.pow(n as u32), denom);
        for (d, c) in basis.iter().enumerate() {
            coeffs[d] += &weight * BigRational::from_integer(c.clone());
        }
    }
    let poly = RatPoly::new(coeffs);
    debug_assert!(poly.is_monic() && poly.degree() == Some(n));
    Ok(poly)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "REFUTED_MISMATCH")]
    RefutedMismatch,
    #[serde(rename = "REFUTED_NONINTEGER")]
    RefutedNoninteger,
    #[serde(rename = "CONSISTENT")]
    Consistent,
}

/// Outcome of testing one (period, residue) quasi-polynomial hypothesis
/// against reduced 4×4 counts.
#[derive(Debug, Clone)]
pub struct QuasiPolyVerdict {
    pub period: u64,
    pub residue: u64,
    /// Monic degree-9 candidate for count/(q−1)⁷ on this residue class.
    pub fitted: RatPoly,
    pub holdout_q: u64,
    pub predicted: BigRational,
    pub observed: Option<BigUint>,
    pub verdict: Verdict,
}

impl QuasiPolyVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "period": self.period,
            "residue": self.residue,
            "fitted_coeffs": self.fitted.coeffs().iter().map(rational_string).collect::<Vec<_>>(),
            "holdout_q": self.holdout_q,
            "predicted": rational_string(&self.predicted),
            "observed": self.observed.as_ref().map(|o| o.to_string()),
            "verdict": serde_json::to_value(self.verdict).unwrap(),
        })
    }
}

pub fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Fits a monic degree-9 polynomial to count/(q−1)⁷ at nine abscissae of
/// the residue class i mod m and evaluates it at a holdout point. If a
/// quasi-polynomial of period m produced the counts, the prediction would
/// be an integer equal to the observed count.
pub fn quasi_poly_test(
    data: &BTreeMap<u64, BigUint>,
    m: u64,
    i: u64,
    fit_qs: &[u64],
    holdout_q: u64,
) -> Result<QuasiPolyVerdict, PolyError> {
    const DEGREE: usize = 9;
    if fit_qs.len() != DEGREE {
        return Err(PolyError::WrongPointCount {
            expected: DEGREE,
            got: fit_qs.len(),
        });
    }
    for &q in fit_qs.iter().chain(std::iter::once(&holdout_q)) {
        if q % m != i {
            return Err(PolyError::ResidueMismatch {
                q,
                residue: i,
                period: m,
            });
        }
    }
    let points: Vec<(BigInt, BigInt)> = fit_qs
        .iter()
        .map(|&q| {
            let count = data.get(&q).ok_or(PolyError::MissingData(q))?;
            Ok((BigInt::from(q), BigInt::from(count.clone())))
        })
        .collect::<Result<_, PolyError>>()?;

    let fitted = lagrange_monic(&points, DEGREE)?;
    let predicted = fitted.eval(&BigRational::from_integer(BigInt::from(holdout_q)));
    let observed = data.get(&holdout_q).cloned();

    let verdict = if !predicted.is_integer() {
        Verdict::RefutedNoninteger
    } else {
        match &observed {
            Some(obs) if predicted.numer() != &BigInt::from(obs.clone()) => {
                Verdict::RefutedMismatch
            }
            _ => Verdict::Consistent,
        }
    };
    Ok(QuasiPolyVerdict {
        period: m,
        residue: i,
        fitted,
        holdout_q,
        predicted,
        observed,
        verdict,
    })
}

fn bigint_q(q: u64) -> BigInt {
    BigInt::from(q)
}

/// Number of 3×3 super-regular matrices: (q−1)⁵(q−2)(q−3)(q²−9q+21).
pub fn sr3_count(q: u64) -> BigUint {
    let q = bigint_q(q);
    let v = (&q - 1i32).pow(5) * (&q - 2i32) * (&q - 3i32) * (&q * &q - 9i32 * &q + 21i32);
    v.max(BigInt::zero()).to_biguint().unwrap()
}

/// Number of 3×3 contiguous super-regular matrices:
/// (q−1)⁵(q−2)(q−3)(q²−4q+5).
pub fn csr3_count(q: u64) -> BigUint {
    let q = bigint_q(q);
    let v = (&q - 1i32).pow(5) * (&q - 2i32) * (&q - 3i32) * (&q * &q - 4i32 * &q + 5i32);
    v.max(BigInt::zero()).to_biguint().unwrap()
}

/// The conjectured 4×4 contiguous super-regular count
/// (q−1)⁷(q−2)(q−3)f(q) with
/// f(q) = q⁷ − 18q⁶ + 143q⁵ − 654q⁴ + 1874q³ − 3400q² + 3671q − 1855.
pub fn csr4_conjecture(q: u64) -> BigUint {
    let q = bigint_q(q);
    let f = q.pow(7) - 18i32 * q.pow(6) + 143i32 * q.pow(5) - 654i32 * q.pow(4)
        + 1874i32 * q.pow(3)
        - 3400i32 * q.pow(2)
        + 3671i32 * &q
        - 1855i32;
    let v = (&q - 1i32).pow(7) * (&q - 2i32) * (&q - 3i32) * f;
    v.max(BigInt::zero()).to_biguint().unwrap()
}

/// Σ_{i,j≤k} min(i,j) = k³/3 + k²/2 + k/6, evaluated exactly as
/// k(k+1)(2k+1)/6.
pub fn min_sum(k: u64) -> BigUint {
    let k = BigUint::from(k);
    let num = &k * (&k + 1u32) * (2u32 * &k + 1u32);
    num / BigUint::from(6u32)
}

/// Probability that a random k×k matrix over GF(q) is nonsingular:
/// Π_{i=1..k} (1 − q^{-i}), exact.
pub fn nonsingular_prob(q: u64, k: u32) -> BigRational {
    let q = BigRational::from_integer(bigint_q(q));
    let mut prod = BigRational::one();
    let mut qi = BigRational::one();
    for _ in 1..=k {
        qi *= &q;
        prod *= BigRational::one() - qi.recip();
    }
    prod
}

/// Exact binomial coefficient.
pub fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

/// f64 view of a rational, for reporting only.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}
