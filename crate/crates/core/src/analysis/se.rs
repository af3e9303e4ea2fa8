//! Ergodic spectral efficiency E[ln(1 + SINR)] in nats/s/Hz.

use super::Analysis;
use crate::specfun::{try_integrate, try_integrate_breaks, try_integrate_semi_infinite, QuadratureSpec};
use crate::{Error, Result};

/// ζ(z) = 1/z − 1/(z (1+z)^M), with ζ(0) = M.
pub fn zeta(z: f64, m: u32) -> f64 {
    if z == 0.0 {
        return f64::from(m);
    }
    // (1 − (1+z)^{−M}) / z without cancellation for small z.
    -(-f64::from(m) * z.ln_1p()).exp_m1() / z
}

/// ∫₀^∞ g(v) dv for an integrand that is smooth near 0 and decays somewhere
/// far out on a logarithmic scale: [0, 1] directly, [1, ∞) as v = e^u.
fn integrate_log_tail<F>(mut g: F, quad: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let head = try_integrate(&mut g, 0.0, 1.0, quad)?;
    let tail = try_integrate_semi_infinite(
        |u: f64| {
            let v = u.exp();
            if !v.is_finite() {
                return Ok(0.0);
            }
            Ok(g(v)? * v)
        },
        0.0,
        1.0,
        quad,
    )?;
    Ok(head + tail)
}

impl Analysis {
    fn inner_quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: 0.1 * self.quad.rel_tol,
            ..self.quad
        }
    }

    /// E[ln(1 + SINR_T)] for a THz link of length x, via the MGF technique.
    fn thz_link_se(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let m = self.params.nakagami_m;
        let scale = f64::from(m) * (self.thz.alpha * x.ln() + self.k_a * x).exp();
        let n_hat = self.noise.thz_hat_n;
        integrate_log_tail(
            |z| {
                let eta = scale * z;
                let e = (-eta * n_hat).exp();
                if e == 0.0 {
                    return Ok(0.0);
                }
                Ok(zeta(z, m) * e * self.laplace_interference_thz(eta, x)?)
            },
            &self.inner_quadrature(),
        )
    }

    /// E[ln(1 + SINR_m)] for an mmWave link of length x.
    fn mm_link_se(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let xa = x.powf(self.mm.alpha);
        let sigma2 = self.noise.mm_sigma2;
        integrate_log_tail(
            |tau| {
                let s = tau * xa;
                let e = (-s * sigma2).exp();
                if e == 0.0 {
                    return Ok(0.0);
                }
                Ok(e / (1.0 + tau) * self.laplace_interference_mmwave(s, x)?)
            },
            &self.inner_quadrature(),
        )
    }

    fn se_thz_part(&self) -> Result<f64> {
        try_integrate_breaks(
            |x| {
                let w = self.assoc_weight_thz(x);
                if w == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * self.thz_link_se(x)?)
            },
            &self.thz_breaks()?,
            &self.quad,
        )
        .map_err(|e| e.within("THz spectral efficiency"))
    }

    fn se_mm_part(&self) -> Result<f64> {
        try_integrate_breaks(
            |x| {
                let w = self.assoc_weight_mm(x)?;
                if w == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * self.mm_link_se(x)?)
            },
            &self.mm_breaks(),
            &self.quad,
        )
        .map_err(|e| e.within("mmWave spectral efficiency"))
    }

    /// Spectral efficiency conditioned on THz association.
    pub fn se_thz(&self) -> Result<f64> {
        let a = self.association_prob_thz();
        if a < 1e-12 {
            return Err(Error::DegenerateTier {
                tier: "THz",
                probability: a,
            });
        }
        Ok(self.se_thz_part()? / a)
    }

    /// Spectral efficiency conditioned on mmWave association.
    pub fn se_mmwave(&self) -> Result<f64> {
        let a = self.association_prob_mmwave();
        if a < 1e-12 {
            return Err(Error::DegenerateTier {
                tier: "mmWave",
                probability: a,
            });
        }
        Ok(self.se_mm_part()? / a)
    }

    /// Spectral efficiency of the hybrid network, 𝒜_T C_T + 𝒜_m C_m.
    pub fn se_hybrid(&self) -> Result<f64> {
        Ok(self.se_thz_part()? + self.se_mm_part()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::HybridParams;
    use crate::specfun::integrate_semi_infinite;

    #[test]
    fn zeta_values() {
        for z in [0.01, 0.5, 3.0, 1e4] {
            assert!((zeta(z, 1) - 1.0 / (1.0 + z)).abs() < 1e-15);
        }
        assert!((zeta(1.0, 2) - 0.75).abs() < 1e-15);
        assert!((zeta(1e-8, 4) - 4.0).abs() < 1e-6);
        assert_eq!(zeta(0.0, 4), 4.0);
    }

    /// Without interference or noise beyond a constant b, the MGF technique
    /// reduces to E[ln(1 + g/b)] for g ~ Gamma(M, 1/M), which is checked
    /// against direct integration over the Gamma density.
    #[test]
    fn mgf_technique_matches_direct_expectation() {
        let m = 3u32;
        let b = 0.2;
        let q = QuadratureSpec::default();
        let lhs = integrate_log_tail(|z| Ok(zeta(z, m) * (-f64::from(m) * z * b).exp()), &q).unwrap();
        let mf = f64::from(m);
        let gamma_pdf = |g: f64| mf.powi(3) * g * g * (-mf * g).exp() / 2.0;
        let rhs = integrate_semi_infinite(|g| gamma_pdf(g) * (1.0 + g / b).ln(), 0.0, 1.0, &q).unwrap();
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn se_nonnegative_and_grows_with_array() {
        let mut prev = 0.0;
        for n in [32, 64, 128] {
            let mut p = HybridParams::default();
            p.thz.array_size = n;
            let a = Analysis::new(&p).unwrap();
            let se = a.se_hybrid().unwrap();
            assert!(se > prev, "N = {n}: {se}");
            prev = se;
        }
    }

    #[test]
    fn se_mm_decreases_with_noise() {
        let mut p = HybridParams::default();
        p.thz.density = 1e-3;
        let quiet = Analysis::new(&p).unwrap().se_mmwave().unwrap();
        p.mmwave_noise_power *= 1e4;
        let loud = Analysis::new(&p).unwrap().se_mmwave().unwrap();
        assert!(quiet > loud && loud >= 0.0);
    }

    #[test]
    fn se_hybrid_limits() {
        let mut p = HybridParams::default();
        p.thz.bias = 1e12;
        let a = Analysis::new(&p).unwrap();
        let h = a.se_hybrid().unwrap();
        let t = a.association_prob_thz() * a.se_thz().unwrap();
        assert!(((h - t) / h).abs() < 1e-4);
    }

    #[test]
    fn se_increases_with_bias_at_low_density() {
        let mut prev = 0.0;
        for bias in [0.1, 1.0, 10.0] {
            let mut p = HybridParams::default();
            p.thz.density = 1e-4;
            p.thz.bias = bias;
            let se = Analysis::new(&p).unwrap().se_hybrid().unwrap();
            assert!(se > prev, "bias {bias}: {se}");
            prev = se;
        }
    }
}
