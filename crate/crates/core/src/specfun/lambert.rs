//! Principal branch of the Lambert W function on the non-negative reals.

use crate::{Error, Result};

const MAX_ITER: usize = 64;
const TOL: f64 = 1e-12;

/// W₀(x) for x ≥ 0, i.e. the w ≥ 0 solving w·e^w = x.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(
            "lambert_w0",
            format!("x = {x}; only x >= 0 is supported"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = if x <= std::f64::consts::E {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    if x > 1e300 {
        // w·e^w overflows; iterate on w + ln w = ln x instead.
        let lx = x.ln();
        for _ in 0..MAX_ITER {
            let f = w + w.ln() - lx;
            let step = f / (1.0 + 1.0 / w);
            w -= step;
            if step.abs() <= TOL * w {
                return Ok(w);
            }
        }
    } else {
        for _ in 0..MAX_ITER {
            let ew = w.exp();
            let f = w * ew - x;
            let wp1 = w + 1.0;
            let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
            let step = f / denom;
            w -= step;
            if step.abs() <= TOL * w.abs().max(f64::MIN_POSITIVE) {
                return Ok(w);
            }
        }
    }
    Err(Error::NonConvergence {
        what: "lambert_w0".into(),
        detail: format!("x = {x}: Halley iteration did not settle"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-14);
        // Omega constant
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((lambert_w0(10.0).unwrap() - 1.745_528_002_740_699).abs() < 1e-13);
        assert!((lambert_w0(1e-10).unwrap() - 9.999_999_999e-11).abs() < 1e-22);
    }

    #[test]
    fn inverts_w_exp_w() {
        for &x in &[1e-8, 0.3, 2.0, 50.0, 1e5, 1e20, 1e100, 1e250] {
            let w = lambert_w0(x).unwrap();
            let back = (w + w.ln()).exp();
            assert!(((back - x) / x).abs() < 1e-11, "x = {x}, w = {w}");
        }
    }

    #[test]
    fn huge_arguments() {
        let x = 1e305;
        let w = lambert_w0(x).unwrap();
        assert!((w + w.ln() - x.ln()).abs() < 1e-10);
    }

    #[test]
    fn negative_is_domain_error() {
        assert!(matches!(lambert_w0(-0.1), Err(Error::Domain { .. })));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn monotone(x in 0.0f64..1e6, dx in 1e-6f64..1e3) {
            prop_assert!(lambert_w0(x + dx).unwrap() > lambert_w0(x).unwrap());
        }
    }
}
