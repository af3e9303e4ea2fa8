//! SINR coverage probabilities.

use log::warn;

use super::association::nearest_distance_pdf;
use super::Analysis;
use crate::specfun::try_integrate_breaks;
use crate::{Error, Result};

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(
            "tau",
            format!("SINR threshold {tau} must be positive and finite"),
        ));
    }
    Ok(())
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn clamp_probability(v: f64, what: &str) -> f64 {
    let c = v.clamp(0.0, 1.0);
    if (c - v).abs() > 1e-6 {
        warn!("{what}: value {v:.9} clamped to [0, 1]");
    }
    c
}

impl Analysis {
    /// Σ_n C(M,n)(−1)^{n+1} e^{−P_n N̂} L_Ĵ(P_n), the Alzer-bounded probability
    /// that a THz link at distance x is covered.
    fn thz_link_coverage(&self, tau: f64, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        let m = self.params.nakagami_m;
        let ln_p1 = tau.ln() + self.thz.alpha * x.ln() + self.k_a * x;
        let p1 = ln_p1.exp();
        let mut total = 0.0;
        for n in 1..=m {
            let pn = self.alzer_a * f64::from(n) * p1;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            let term = (-pn * self.noise.thz_hat_n).exp();
            if term == 0.0 {
                continue;
            }
            total += sign * binomial(m, n) * term * self.laplace_interference_thz(pn, x)?;
        }
        Ok(total)
    }

    /// Exact probability that an mmWave link at distance x is covered.
    fn mm_link_coverage(&self, tau: f64, x: f64, sigma2: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        let s = tau * x.powf(self.mm.alpha);
        let noise = (-s * sigma2).exp();
        if noise == 0.0 {
            return Ok(0.0);
        }
        Ok(noise * self.laplace_interference_mmwave(s, x)?)
    }

    /// Coverage of a THz-only network (Alzer bound), conditioned on at least
    /// one TBS inside the LOS ball.
    pub fn coverage_thz_standalone(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let f = nearest_distance_pdf(self.thz.density, self.thz.radius)?;
        let breaks = Self::breakpoints(self.thz.density, self.thz.radius, &[]);
        let v = try_integrate_breaks(
            |x| {
                let w = f.eval(x);
                if w == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * self.thz_link_coverage(tau, x)?)
            },
            &breaks,
            &self.quad,
        )
        .map_err(|e| e.within("THz coverage"))?;
        Ok(clamp_probability(v, "THz coverage"))
    }

    /// Coverage of an mmWave-only network, conditioned on at least one MBS
    /// inside the LOS ball.
    pub fn coverage_mmwave_standalone(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let f = nearest_distance_pdf(self.mm.density, self.mm.radius)?;
        let breaks = Self::breakpoints(self.mm.density, self.mm.radius, &[]);
        let sigma2 = self.noise.mm_sigma2;
        let v = try_integrate_breaks(
            |x| {
                let w = f.eval(x);
                if w == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * self.mm_link_coverage(tau, x, sigma2)?)
            },
            &breaks,
            &self.quad,
        )
        .map_err(|e| e.within("mmWave coverage"))?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// Noise-free mmWave coverage through the product-form Laplace transform.
    /// Requires α_m = 2.
    pub fn coverage_mmwave_interference_limited(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        if self.mm.alpha != 2.0 {
            return Err(Error::invalid(
                "pathloss_exponent_mm",
                format!("interference-limited form needs α_m = 2, got {}", self.mm.alpha),
            ));
        }
        let f = nearest_distance_pdf(self.mm.density, self.mm.radius)?;
        let breaks = Self::breakpoints(self.mm.density, self.mm.radius, &[]);
        let v = try_integrate_breaks(
            |x| Ok(f.eval(x) * self.laplace_interference_mmwave_product(tau, x)?),
            &breaks,
            &self.quad,
        )
        .map_err(|e| e.within("interference-limited mmWave coverage"))?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// THz part of the hybrid coverage, 𝒜_T·P(covered | THz).
    fn hybrid_thz_part(&self, tau: f64) -> Result<f64> {
        let breaks = self.thz_breaks()?;
        try_integrate_breaks(
            |x| {
                let w = self.assoc_weight_thz(x);
                if w == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * self.thz_link_coverage(tau, x)?)
            },
            &breaks,
            &self.quad,
        )
        .map_err(|e| e.within("hybrid coverage (THz part)"))
    }

    /// mmWave part of the hybrid coverage, 𝒜_m·P(covered | mmWave).
    fn hybrid_mm_part(&self, tau: f64) -> Result<f64> {
        let sigma2 = self.noise.mm_sigma2;
        try_integrate_breaks(
            |x| {
                let w = self.assoc_weight_mm(x)?;
                if w == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * self.mm_link_coverage(tau, x, sigma2)?)
            },
            &self.mm_breaks(),
            &self.quad,
        )
        .map_err(|e| e.within("hybrid coverage (mmWave part)"))
    }

    /// Coverage of the hybrid network under Max-BRP association.
    pub fn coverage_hybrid(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let v = self.hybrid_thz_part(tau)? + self.hybrid_mm_part(tau)?;
        Ok(clamp_probability(v, "hybrid coverage"))
    }

    /// Coverage conditioned on THz association.
    pub fn coverage_thz_conditioned(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let a = self.association_prob_thz();
        if a < 1e-12 {
            return Err(Error::DegenerateTier {
                tier: "THz",
                probability: a,
            });
        }
        Ok(clamp_probability(self.hybrid_thz_part(tau)? / a, "conditioned THz coverage"))
    }

    /// Coverage conditioned on mmWave association.
    pub fn coverage_mmwave_conditioned(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let a = self.association_prob_mmwave();
        if a < 1e-12 {
            return Err(Error::DegenerateTier {
                tier: "mmWave",
                probability: a,
            });
        }
        Ok((self.hybrid_mm_part(tau)? / a).clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::HybridParams;
    use crate::db_to_linear;

    fn grid() -> Vec<f64> {
        (-10..=40).step_by(5).map(|d| db_to_linear(d as f64)).collect()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(6, 3), 20.0);
    }

    #[test]
    fn thz_coverage_limits_and_monotonicity() {
        let a = Analysis::new(&HybridParams::default()).unwrap();
        assert!((a.coverage_thz_standalone(1e-9).unwrap() - 1.0).abs() < 1e-4);
        let mut prev = 1.0;
        for tau in grid() {
            let c = a.coverage_thz_standalone(tau).unwrap();
            assert!(c < prev, "tau {tau}: {c} !< {prev}");
            prev = c;
        }
        assert!(a.coverage_thz_standalone(0.0).is_err());
    }

    #[test]
    fn thz_coverage_grows_with_array() {
        let tau = db_to_linear(20.0);
        let mut prev = 0.0;
        for n in [8, 16, 32, 64] {
            let mut p = HybridParams::default();
            p.thz.array_size = n;
            let c = Analysis::new(&p).unwrap().coverage_thz_standalone(tau).unwrap();
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn mm_coverage_limits_noise_and_monotonicity() {
        let p = HybridParams::default();
        let a = Analysis::new(&p).unwrap();
        assert!((a.coverage_mmwave_standalone(1e-9).unwrap() - 1.0).abs() < 1e-4);
        let mut noisy = p;
        noisy.mmwave_noise_power *= 1e6;
        let b = Analysis::new(&noisy).unwrap();
        let mut prev = 1.0;
        for tau in grid() {
            let c = a.coverage_mmwave_standalone(tau).unwrap();
            assert!(c <= prev);
            assert!(b.coverage_mmwave_standalone(tau).unwrap() < c);
            prev = c;
        }
    }

    #[test]
    fn interference_limited_matches_noise_free_theorem() {
        let mut p = HybridParams::default();
        p.mmwave_noise_power = 0.0;
        let a = Analysis::new(&p).unwrap();
        assert!((a.coverage_mmwave_interference_limited(1e-9).unwrap() - 1.0).abs() < 1e-4);
        let mut prev = 1.0;
        for tau in grid() {
            let c = a.coverage_mmwave_interference_limited(tau).unwrap();
            let d = a.coverage_mmwave_standalone(tau).unwrap();
            assert!((c - d).abs() < 1e-6, "{c} vs {d}");
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn hybrid_limits() {
        let tau = db_to_linear(20.0);
        let mut p = HybridParams::default();
        p.thz.bias = 1e12;
        let a = Analysis::new(&p).unwrap();
        let h = a.coverage_hybrid(tau).unwrap();
        let t = a.coverage_thz_standalone(tau).unwrap();
        assert!((h - t).abs() < 1e-4, "{h} vs {t}");

        let mut p = HybridParams::default();
        p.thz.density = 1e-30;
        let a = Analysis::new(&p).unwrap();
        let h = a.coverage_hybrid(tau).unwrap();
        let m = a.coverage_mmwave_standalone(tau).unwrap();
        assert!((h - m).abs() < 1e-4, "{h} vs {m}");
    }

    #[test]
    fn hybrid_is_mixture_of_conditioned() {
        let mut p = HybridParams::default();
        p.thz.density = 5e-3;
        p.thz.bias = 1.0;
        let a = Analysis::new(&p).unwrap();
        let tau = 10.0;
        let mix = a.association_prob_thz() * a.coverage_thz_conditioned(tau).unwrap()
            + a.association_prob_mmwave() * a.coverage_mmwave_conditioned(tau).unwrap();
        let h = a.coverage_hybrid(tau).unwrap();
        assert!((mix - h).abs() < 1e-6);
        assert!((0.0..=1.0).contains(&h));
    }
}
