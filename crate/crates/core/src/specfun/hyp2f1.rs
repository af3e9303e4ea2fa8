//! Gauss hypergeometric function ₂F₁(a, b; c; z) for real parameters and z ≤ 0.
//!
//! The evaluation domain is split in two:
//!
//! * `−2 ≤ z ≤ 0`: Pfaff transformation onto w = z/(z−1) ∈ [0, 2/3] followed by the
//!   power series, which converges at least like (2/3)^n there.
//! * `z < −2`: the 1/z connection formula. When a − b is an integer the two
//!   connection terms have cancelling poles and the logarithmic limit form is used.
//!
//! Parameter-dependent Gamma prefactors are computed once per [`Hyp2F1`], so callers
//! evaluating the same (a, b, c) at many points should keep one around.

use super::gamma::{digamma, gamma, rgamma, rgamma_digamma};
use crate::{Error, Result};

const MAX_TERMS: usize = 10_000;
const PFAFF_LIMIT: f64 = -2.0;
// |a − b − round(a − b)| below this is treated as the integer (logarithmic) case.
const DEGENERATE_TOL: f64 = 1e-9;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Power series Σ (a)_n (b)_n / ((c)_n n!) x^n for |x| < 1.
fn series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small_streak = 0;
    for n in 0..MAX_TERMS {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= f64::EPSILON * sum.abs() {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "2F1 power series".into(),
        detail: format!("a={a}, b={b}, c={c}, x={x}: {MAX_TERMS} terms exhausted"),
    })
}

/// Terminating series when one upper parameter is a non-positive integer.
fn polynomial(neg_int: f64, other: f64, c: f64, z: f64) -> f64 {
    let degree = (-neg_int) as usize;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..degree {
        let n = n as f64;
        term *= (neg_int + n) * (other + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
    }
    sum
}

#[derive(Debug, Clone, Copy)]
enum Connection {
    /// Two-term 1/z connection formula with precomputed Gamma ratios.
    Regular { coef_a: f64, coef_b: f64 },
    /// b = a + m with m a non-negative integer (after reordering a, b).
    Logarithmic { a: f64, m: usize, gamma_c: f64 },
    /// One upper parameter is a non-positive integer: ₂F₁ is a polynomial.
    Polynomial,
}

/// ₂F₁(a, b; c; ·) with parameter-dependent constants precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Hyp2F1 {
    a: f64,
    b: f64,
    c: f64,
    connection: Connection,
}

impl Hyp2F1 {
    /// Prepares ₂F₁(a, b; c; ·). Fails if c is a non-positive integer.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::domain("gauss_2f1", "parameters must be finite"));
        }
        if is_nonpositive_integer(c) {
            return Err(Error::domain(
                "gauss_2f1",
                format!("c = {c} is a non-positive integer"),
            ));
        }
        let connection = if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
            Connection::Polynomial
        } else {
            let diff = b - a;
            let nearest = diff.round();
            if (diff - nearest).abs() < DEGENERATE_TOL * diff.abs().max(1.0) {
                // F is symmetric in (a, b); order them so that b = a + m, m ≥ 0.
                let (lo, m) = if nearest >= 0.0 {
                    (a, nearest as usize)
                } else {
                    (b, (-nearest) as usize)
                };
                Connection::Logarithmic {
                    a: lo,
                    m,
                    gamma_c: gamma(c),
                }
            } else {
                let gc = gamma(c);
                Connection::Regular {
                    coef_a: gc * gamma(b - a) * rgamma(b) * rgamma(c - a),
                    coef_b: gc * gamma(a - b) * rgamma(a) * rgamma(c - b),
                }
            }
        };
        Ok(Self { a, b, c, connection })
    }

    /// Evaluates ₂F₁(a, b; c; z) for z ≤ 0.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if z.is_nan() || z > 0.0 {
            return Err(Error::domain(
                "gauss_2f1",
                format!("z = {z}; only z <= 0 is supported"),
            ));
        }
        if z == 0.0 {
            return Ok(1.0);
        }
        if z.is_infinite() {
            return Err(Error::domain("gauss_2f1", "z must be finite"));
        }
        let (a, b, c) = (self.a, self.b, self.c);
        if let Connection::Polynomial = self.connection {
            return Ok(if is_nonpositive_integer(a) {
                polynomial(a, b, c, z)
            } else {
                polynomial(b, a, c, z)
            });
        }
        if z >= PFAFF_LIMIT {
            return self.pfaff(z);
        }
        match self.connection {
            Connection::Regular { coef_a, coef_b } => {
                let inv = 1.0 / z;
                let ln_mz = (-z).ln();
                let mut total = 0.0;
                if coef_a != 0.0 {
                    total += coef_a
                        * (-a * ln_mz).exp()
                        * series(a, a - c + 1.0, a - b + 1.0, inv)?;
                }
                if coef_b != 0.0 {
                    total += coef_b
                        * (-b * ln_mz).exp()
                        * series(b, b - c + 1.0, b - a + 1.0, inv)?;
                }
                Ok(total)
            }
            Connection::Logarithmic { a, m, gamma_c } => logarithmic(a, m, c, gamma_c, z),
            Connection::Polynomial => unreachable!(),
        }
    }

    fn pfaff(&self, z: f64) -> Result<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        let w = z / (z - 1.0);
        let ln_1mz = (-z).ln_1p();
        // Either upper parameter may be pulled out; prefer the variant whose
        // series has non-negative terms so no cancellation occurs.
        let nonneg_a = a >= 0.0 && c - b >= 0.0;
        let nonneg_b = b >= 0.0 && c - a >= 0.0 && c > 0.0;
        if nonneg_b && !nonneg_a {
            Ok((-b * ln_1mz).exp() * series(b, c - a, c, w)?)
        } else {
            Ok((-a * ln_1mz).exp() * series(a, c - b, c, w)?)
        }
    }
}

/// ₂F₁(a, a+m; c; z) for z < −1 (logarithmic case of the 1/z connection).
fn logarithmic(a: f64, m: usize, c: f64, gamma_c: f64, z: f64) -> Result<f64> {
    let mf = m as f64;
    let inv = 1.0 / z;
    let ln_mz = (-z).ln();

    // Finite part: Σ_{k<m} (a)_k (m−k−1)! / (k! Γ(c−a−k)) z^{−k}
    let mut finite = 0.0;
    let mut poch = 1.0; // (a)_k
    let mut k_fact = 1.0; // k!
    let mut z_pow = 1.0; // z^{-k}
    for k in 0..m {
        let kf = k as f64;
        let tail_fact: f64 = (1..(m - k)).map(|i| i as f64).product();
        finite += poch * tail_fact / k_fact * rgamma(c - a - kf) * z_pow;
        poch *= a + kf;
        k_fact *= kf + 1.0;
        z_pow *= inv;
    }
    finite *= rgamma(a + mf);

    // Logarithmic series, (a+m)_k / (k! (k+m)!) (−1)^k z^{−k−m} [...]
    let mut log_sum = 0.0;
    let mut coef: f64 = inv.powi(m as i32) / (1..=m).map(|i| i as f64).product::<f64>();
    let mut small_streak = 0;
    let mut converged = false;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let x = c - a - kf - mf;
        let bracket = rgamma(x)
            * (ln_mz + digamma(1.0 + mf + kf) + digamma(1.0 + kf) - digamma(a + mf + kf))
            - rgamma_digamma(x);
        let term = coef * bracket;
        log_sum += term;
        if term.abs() <= f64::EPSILON * log_sum.abs() {
            small_streak += 1;
            if small_streak >= 3 {
                converged = true;
                break;
            }
        } else {
            small_streak = 0;
        }
        coef *= -(a + mf + kf) / ((kf + 1.0) * (kf + 1.0 + mf)) * inv;
        if coef == 0.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "2F1 logarithmic connection series".into(),
            detail: format!("a={a}, m={m}, c={c}, z={z}"),
        });
    }
    log_sum *= rgamma(a);

    Ok(gamma_c * (-a * ln_mz).exp() * (finite + log_sum))
}

/// ₂F₁(a, b; c; z) for real parameters and z ≤ 0.
///
/// Convenience wrapper around [`Hyp2F1`]; prefer the latter when evaluating the
/// same parameters repeatedly.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    Hyp2F1::new(a, b, c)?.eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // 50-digit reference values.
    const REFERENCE: &[((f64, f64, f64, f64), f64)] = &[
        ((-0.5, 4.0, 0.5, -2.0), 4.861_224_205_026_039),
        ((-0.5, 4.0, 0.5, -0.3), 1.978_538_848_633_405_6),
        ((-0.5, 4.0, 0.5, -1e3), 108.659_559_157_144_97),
        ((1.0, 1.5, 2.5, -0.7), 0.716_940_799_905_208_7),
        ((1.0, 1.5, 2.5, -50.0), 0.047_863_445_835_086_38),
        ((1.0, 2.0, 3.0, -1e6), 1.999_972_368_976_884e-6),
        ((1.0, 2.0, 3.0, -3.0), 0.358_601_253_084_468_75),
        ((0.3, 1.3, 2.1, -8.0), 0.608_959_570_145_786_7),
        ((2.5, 1.5, 3.2, -1e8), 2.006_776_005_314_18e-12),
        ((-3.0, 2.5, 1.5, -10.0), 3751.0),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &((a, b, c, z), expected) in REFERENCE {
            let got = gauss_2f1(a, b, c, z).unwrap();
            assert!(
                rel(got, expected) < 1e-11,
                "2F1({a},{b};{c};{z}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn zero_argument_is_one() {
        assert_eq!(gauss_2f1(0.3, -1.7, 2.2, 0.0).unwrap(), 1.0);
        assert_eq!(gauss_2f1(-0.5, 4.0, 0.5, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn geometric_identity() {
        for b in [0.5, 1.0, 2.5, 7.0] {
            let v = gauss_2f1(1.0, b, b, -1.0).unwrap();
            assert!((v - 0.5).abs() < 1e-14);
            let v = gauss_2f1(1.0, b, b, -9.0).unwrap();
            assert!(rel(v, 0.1) < 1e-12);
        }
    }

    /// Independent oracle: plain Pfaff-transformed series summed to 4000 terms.
    #[test]
    fn matches_series_after_transformation() {
        let (a, b, c, z) = (-0.5f64, 4.0f64, 0.5f64, -2.0f64);
        let w = z / (z - 1.0);
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for n in 0..4000 {
            let n = n as f64;
            term *= (a + n) * (c - b + n) / ((c + n) * (n + 1.0)) * w;
            sum += term;
        }
        let oracle = (1.0 - z).powf(-a) * sum;
        assert!(rel(gauss_2f1(a, b, c, z).unwrap(), oracle) < 1e-10);
    }

    #[test]
    fn logarithmic_case_matches_closed_form() {
        // 2F1(1, 2; 3; z) = 2(−ln(1−z) − z)/z²
        for z in [-2.5f64, -7.0, -123.0, -4.5e4, -1e9] {
            let expected = 2.0 * (-(-z).ln_1p() - z) / (z * z);
            assert!(rel(gauss_2f1(1.0, 2.0, 3.0, z).unwrap(), expected) < 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            gauss_2f1(1.0, 1.0, 0.0, -1.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            gauss_2f1(1.0, 1.0, -2.0, -1.0),
            Err(Error::Domain { .. })
        ));
        assert!(gauss_2f1(1.0, 1.0, 2.0, 0.5).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, f64::NAN).is_err());
    }

    #[test]
    fn continuous_across_region_boundary() {
        let f = Hyp2F1::new(-0.5, 4.0, 0.5).unwrap();
        let left = f.eval(PFAFF_LIMIT - 1e-12).unwrap();
        let right = f.eval(PFAFF_LIMIT).unwrap();
        assert!(rel(left, right) < 1e-10);
        let f = Hyp2F1::new(1.0, 2.0, 3.0).unwrap();
        assert!(rel(f.eval(-2.0 - 1e-12).unwrap(), f.eval(-2.0).unwrap()) < 1e-10);
    }

    proptest! {
        #[test]
        fn continuous_in_z(
            a in -1.5f64..3.0,
            b in 0.2f64..5.0,
            c in 0.3f64..4.0,
            z in -500.0f64..-0.01,
        ) {
            prop_assume!(!is_nonpositive_integer(c));
            let f = Hyp2F1::new(a, b, c).unwrap();
            let v0 = f.eval(z).unwrap();
            let v1 = f.eval(z - 1e-7 * z.abs()).unwrap();
            let scale = v0.abs().max(1e-300);
            prop_assert!(((v0 - v1) / scale).abs() < 1e-4, "{} vs {}", v0, v1);
        }
    }
}
