//! Shifted and scaled Chebyshev polynomials.
//!
//! The estimators add one bias-correction term per observed element, and the
//! coefficients of those corrections come from the degree-`L` Chebyshev
//! polynomial `Q_L(x) = cos(L·arccos x)` remapped so that the result `P_L`
//! satisfies `P_L(0) = -1` and `|P_L| <= eps` on a scaled interval `[1, R]`:
//!
//! ```text
//! P_L(x) = -Q_L((2x - (R+1)) / (R-1)) / Q_L(-(R+1)/(R-1))
//! eps    = 1 / |Q_L(-(R+1)/(R-1))|
//! ```
//!
//! Coefficients are produced by synthetic substitution of the affine map into
//! the exact integer coefficients of `Q_L`, carried in compensated multi-limb
//! arithmetic (see [`crate::expansion`]); the monomial basis is kept because
//! the estimators consume the `a_k` individually.

use crate::expansion::Ex;
use thiserror::Error;

/// Largest supported polynomial degree. The default degree used by the
/// estimators is `floor(0.45 ln n)`, which stays below 20 for any realistic
/// domain, so the cap is generous.
pub const MAX_DEGREE: u32 = 64;

/// ln(f64::MAX); exponentiating anything larger overflows.
const MAX_EXP_ARG: f64 = 709.782712893384;

#[derive(Debug, Error)]
pub enum ChebyshevError {
    #[error("degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeTooLarge(u32),
    #[error("shifted polynomial needs degree >= 1, got {0}")]
    DegreeTooSmall(u32),
    #[error("interval ratio must be a finite number > 1, got {0}")]
    InvalidRatio(f64),
    #[error("polynomial for degree {degree}, ratio {ratio} is not representable in f64 range")]
    Unrepresentable { degree: u32, ratio: f64 },
    #[error("correction term overflows: exp({log_magnitude:.3}) out of f64 range (mis-tuned scale or sample size)")]
    CorrectionOverflow { log_magnitude: f64 },
    #[error("correction term needs scale > 0 and sample size > 0, got scale={scale}, sample_size={sample_size}")]
    InvalidCorrectionInput { scale: f64, sample_size: f64 },
}

/// A polynomial in the monomial basis; `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialPoly {
    coeffs: Vec<f64>,
}

impl MonomialPoly {
    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Exact integer coefficients of `Q_L` via the three-term recurrence.
/// They fit in i128 comfortably for every supported degree.
pub(crate) fn chebyshev_coeffs_exact(degree: u32) -> Result<Vec<i128>, ChebyshevError> {
    if degree > MAX_DEGREE {
        return Err(ChebyshevError::DegreeTooLarge(degree));
    }
    let mut prev: Vec<i128> = vec![1];
    if degree == 0 {
        return Ok(prev);
    }
    let mut cur: Vec<i128> = vec![0, 1];
    for _ in 1..degree {
        let mut next = vec![0i128; cur.len() + 1];
        for (k, &c) in cur.iter().enumerate() {
            next[k + 1] += 2 * c;
        }
        for (k, &c) in prev.iter().enumerate() {
            next[k] -= c;
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Monomial coefficients of the standard Chebyshev polynomial `Q_L`.
///
/// `Q_0 = 1`, `Q_1 = x`, `Q_{L+1} = 2x·Q_L - Q_{L-1}`. Rejects degrees above
/// [`MAX_DEGREE`] (coefficients leave the range where f64 keeps them usable).
pub fn chebyshev_coeffs(degree: u32) -> Result<MonomialPoly, ChebyshevError> {
    let exact = chebyshev_coeffs_exact(degree)?;
    Ok(MonomialPoly {
        coeffs: exact.iter().map(|&c| c as f64).collect(),
    })
}

/// Horner evaluation of `sum_k coeffs[k] x^k`.
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0f64;
    for &c in coeffs.iter().rev() {
        acc = acc.mul_add(x, c);
    }
    acc
}

/// The remapped polynomial `P_L` on `[1, R]` together with its sup-norm bound.
///
/// Coefficients satisfy `a_0 = -1` exactly and are held internally in
/// multi-limb form; [`ShiftedPolynomial::coeffs`] exposes their nearest-f64
/// values, [`ShiftedPolynomial::eval`] evaluates Horner-style at full
/// internal precision.
#[derive(Debug, Clone)]
pub struct ShiftedPolynomial {
    degree: u32,
    ratio: f64,
    exact: Vec<Ex>,
    approx: Vec<f64>,
    ln_abs: Vec<f64>,
    sign: Vec<f64>,
    eps: f64,
    ln_eps: f64,
}

/// Builds `P_L` for the scaled interval `[1, R]` (Algorithm parameters use
/// `R = b^2`). Synthetic substitution of `(2x-(R+1))/(R-1)` into the exact
/// `Q_L` coefficients, then normalization by the value at zero.
pub fn shifted_polynomial(degree: u32, ratio: f64) -> Result<ShiftedPolynomial, ChebyshevError> {
    if degree < 1 {
        return Err(ChebyshevError::DegreeTooSmall(degree));
    }
    if !(ratio.is_finite() && ratio > 1.0) {
        return Err(ChebyshevError::InvalidRatio(ratio));
    }
    let q = chebyshev_coeffs_exact(degree)?;

    // alpha = 2/(R-1), beta = -(R+1)/(R-1); R-1 and R+1 are exact two-limb sums.
    let dm = Ex::from_f64(ratio).add(Ex::from_f64(-1.0));
    let dp = Ex::from_f64(ratio).add(Ex::from_f64(1.0));
    let alpha = Ex::from_f64(2.0).div(dm);
    let beta = dp.div(dm).neg();

    // g(x) = Q_L(alpha x + beta) by Horner: g <- g·(alpha x + beta) + q_k.
    let mut g: Vec<Ex> = vec![Ex::from_i128(q[degree as usize])];
    for k in (0..degree as usize).rev() {
        let mut next = vec![Ex::ZERO; g.len() + 1];
        for (j, gj) in g.iter().enumerate() {
            next[j + 1] = next[j + 1].add(gj.mul(alpha));
            next[j] = next[j].add(gj.mul(beta));
        }
        next[0] = next[0].add(Ex::from_i128(q[k]));
        g = next;
    }
    if g.iter().any(|e| !e.is_finite()) {
        return Err(ChebyshevError::Unrepresentable { degree, ratio });
    }

    // a_k = -g_k / g_0, which pins a_0 = -1 exactly; eps = 1/|g_0|.
    let g0 = g[0];
    let exact: Vec<Ex> = g.iter().map(|gk| gk.div(g0).neg()).collect();
    let ln_eps = -g0.ln_abs();
    let eps = ln_eps.exp();

    Ok(ShiftedPolynomial {
        degree,
        ratio,
        approx: exact.iter().map(|e| e.approx()).collect(),
        ln_abs: exact.iter().map(|e| e.ln_abs()).collect(),
        sign: exact.iter().map(|e| e.signum()).collect(),
        exact,
        eps,
        ln_eps,
    })
}

impl ShiftedPolynomial {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The interval ratio `R`; the polynomial is bounded by `eps` on `[1, R]`.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Nearest-f64 coefficients `a_0..a_L`.
    pub fn coeffs(&self) -> &[f64] {
        &self.approx
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.approx.get(k).copied().unwrap_or(0.0)
    }

    /// Guaranteed sup-norm of `P_L` on `[1, R]`.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `ln(eps)`, usable even where `eps` would underflow.
    pub fn ln_eps(&self) -> f64 {
        self.ln_eps
    }

    /// Horner evaluation at full internal precision.
    ///
    /// The compensated limbs matter: around the sup-norm band the monomial
    /// terms cancel down to ~1e-19 of their own magnitude at degree 25.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = Ex::ZERO;
        for a in self.exact.iter().rev() {
            acc = acc.scale(x).add(*a);
        }
        acc.approx()
    }
}

fn ln_factorial(k: u32) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; MAX_DEGREE as usize + 1]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0.0; MAX_DEGREE as usize + 1];
        let mut acc = 0.0;
        for (j, slot) in t.iter_mut().enumerate() {
            if j >= 2 {
                acc += (j as f64).ln();
            }
            *slot = acc;
        }
        t
    });
    table[k as usize]
}

/// The per-element correction `a_k · scale^k · k! / N^k`.
///
/// Computed in log space (`ln|a_k| + k ln scale + ln k! - k ln N`, then
/// `sign · exp`) because the factors individually overflow long before the
/// product does. Counts above the polynomial degree return 0 (`a_k = 0` for
/// `k > L`); a product beyond f64 range is reported as an error rather than
/// a silent infinity.
pub fn correction_term(
    poly: &ShiftedPolynomial,
    count: u64,
    scale: f64,
    sample_size: f64,
) -> Result<f64, ChebyshevError> {
    if !(scale > 0.0 && scale.is_finite() && sample_size > 0.0 && sample_size.is_finite()) {
        return Err(ChebyshevError::InvalidCorrectionInput { scale, sample_size });
    }
    if count > poly.degree as u64 {
        return Ok(0.0);
    }
    let k = count as u32;
    let sign = poly.sign[k as usize];
    if sign == 0.0 {
        return Ok(0.0);
    }
    let log_magnitude = poly.ln_abs[k as usize] + f64::from(k) * scale.ln() + ln_factorial(k)
        - f64::from(k) * sample_size.ln();
    if log_magnitude > MAX_EXP_ARG {
        return Err(ChebyshevError::CorrectionOverflow { log_magnitude });
    }
    Ok(sign * log_magnitude.exp())
}
