//! Max-BRP association and serving-distance densities.

use std::f64::consts::PI;

use super::{Analysis, AssociationModel, HybridParams};
use crate::specfun::{lambert_w0, try_integrate_breaks};
use crate::{Error, Result};

const DEGENERATE_PROB: f64 = 1e-12;

/// ε = (B_m P_m N_m)/(B_T P_T N_T)·(f_T/f_m)², evaluated in log space.
pub fn epsilon(params: &HybridParams) -> f64 {
    let t = &params.thz;
    let m = &params.mmwave;
    let ln = m.bias.ln() + m.tx_power.ln() + f64::from(m.array_size).ln()
        - t.bias.ln()
        - t.tx_power.ln()
        - f64::from(t.array_size).ln()
        + 2.0 * (t.frequency.ln() - m.frequency.ln());
    ln.exp()
}

/// Distance to the nearest point of a PPP of `density` inside a disc of
/// `radius`, conditioned on the disc being non-empty.
#[derive(Debug, Clone, Copy)]
pub struct NearestDistancePdf {
    density: f64,
    radius: f64,
    norm: f64,
}

/// Truncated Rayleigh density of the nearest-node distance in a LOS ball.
pub fn nearest_distance_pdf(density: f64, radius: f64) -> Result<NearestDistancePdf> {
    if !(density > 0.0 && radius > 0.0) {
        return Err(Error::invalid(
            "nearest_distance_pdf",
            format!("density {density} and radius {radius} must be positive"),
        ));
    }
    let norm = -(-density * PI * radius * radius).exp_m1();
    Ok(NearestDistancePdf {
        density,
        radius,
        norm,
    })
}

impl NearestDistancePdf {
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=self.radius).contains(&x) {
            return 0.0;
        }
        2.0 * PI * self.density * x * (-PI * self.density * x * x).exp() / self.norm
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Probability that the ball holds at least one node.
    pub fn non_empty_probability(&self) -> f64 {
        self.norm
    }
}

impl Analysis {
    /// ρ(x) = (ε x^{α_T} e^{k_a x})^{1/α_m}: the mmWave distance at which both
    /// tiers deliver the same biased power as a TBS at distance x.
    pub fn rho(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let ln = self.epsilon.ln() + self.params.thz.pathloss_exponent * x.ln() + self.k_a * x;
        (ln / self.params.mmwave.pathloss_exponent).exp()
    }

    /// ν(x̂): the TBS distance giving the same biased power as an MBS at x̂,
    /// i.e. the root of ε r^{α_T} e^{k_a r} = x̂^{α_m}.
    pub fn nu(&self, x_hat: f64) -> Result<f64> {
        if x_hat <= 0.0 {
            return Ok(0.0);
        }
        let a_t = self.params.thz.pathloss_exponent;
        let a_m = self.params.mmwave.pathloss_exponent;
        let ln_base = (a_m * x_hat.ln() - self.epsilon.ln()) / a_t;
        if self.k_a == 0.0 {
            return Ok(ln_base.exp());
        }
        let arg = (self.k_a / a_t) * ln_base.exp();
        Ok(a_t / self.k_a * lambert_w0(arg)?)
    }

    /// Probability that at least one base station of either tier is in range.
    pub fn p_any(&self) -> f64 {
        self.p_any
    }

    /// Density (over x ∈ [0, R_T]) of the event "nearest TBS at x and the UE
    /// associates with it". Integrates to 𝒜_T.
    pub(crate) fn assoc_weight_thz(&self, x: f64) -> f64 {
        let t = &self.params.thz;
        let m = &self.params.mmwave;
        if x <= 0.0 || x > t.los_radius {
            return 0.0;
        }
        let rho = self.rho(x);
        match self.params.association {
            AssociationModel::LosBall => {
                let r = rho.min(m.los_radius);
                let ln = (2.0 * PI * t.density * x).ln()
                    - PI * t.density * x * x
                    - PI * m.density * r * r;
                ln.exp() / self.p_any
            }
            AssociationModel::UnboundedMmWave => {
                let norm = -(-t.density * PI * t.los_radius.powi(2)).exp_m1();
                let ln = (2.0 * PI * t.density * x).ln()
                    - PI * t.density * x * x
                    - PI * m.density * rho * rho;
                ln.exp() / norm
            }
        }
    }

    /// Counterpart of [`Self::assoc_weight_thz`] for the mmWave tier, over [0, R_m].
    pub(crate) fn assoc_weight_mm(&self, x: f64) -> Result<f64> {
        let t = &self.params.thz;
        let m = &self.params.mmwave;
        if x <= 0.0 || x > m.los_radius {
            return Ok(0.0);
        }
        let nu = self.nu(x)?;
        Ok(match self.params.association {
            AssociationModel::LosBall => {
                let r = nu.min(t.los_radius);
                let ln = (2.0 * PI * m.density * x).ln()
                    - PI * m.density * x * x
                    - PI * t.density * r * r;
                ln.exp() / self.p_any
            }
            AssociationModel::UnboundedMmWave => {
                let norm = -(-m.density * PI * m.los_radius.powi(2)).exp_m1();
                let ln = (2.0 * PI * m.density * x).ln()
                    - PI * m.density * x * x
                    - PI * t.density * nu * nu;
                ln.exp() / norm
            }
        })
    }

    /// Integration breakpoints for THz-side integrals.
    pub(crate) fn thz_breaks(&self) -> Result<Vec<f64>> {
        let kink = self.nu(self.params.mmwave.los_radius)?;
        Ok(Self::breakpoints(
            self.params.thz.density,
            self.params.thz.los_radius,
            &[kink],
        ))
    }

    /// Integration breakpoints for mmWave-side integrals.
    pub(crate) fn mm_breaks(&self) -> Vec<f64> {
        let kink = self.rho(self.params.thz.los_radius);
        Self::breakpoints(
            self.params.mmwave.density,
            self.params.mmwave.los_radius,
            &[kink],
        )
    }

    pub(super) fn compute_association_thz(&self) -> Result<f64> {
        let breaks = self.thz_breaks()?;
        let v = try_integrate_breaks(|x| Ok(self.assoc_weight_thz(x)), &breaks, &self.quad)
            .map_err(|e| e.within("THz association probability"))?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// 𝒜_T, probability that the typical UE associates with the THz tier.
    pub fn association_prob_thz(&self) -> f64 {
        self.assoc_thz
    }

    /// 𝒜_m = 1 − 𝒜_T.
    pub fn association_prob_mmwave(&self) -> f64 {
        1.0 - self.assoc_thz
    }

    /// Density of the serving distance given THz association.
    pub fn conditioned_distance_pdf_thz(&self, x: f64) -> Result<f64> {
        let a = self.association_prob_thz();
        if a < DEGENERATE_PROB {
            return Err(Error::DegenerateTier {
                tier: "THz",
                probability: a,
            });
        }
        Ok(self.assoc_weight_thz(x) / a)
    }

    /// Density of the serving distance given mmWave association.
    pub fn conditioned_distance_pdf_mmwave(&self, x: f64) -> Result<f64> {
        let a = self.association_prob_mmwave();
        if a < DEGENERATE_PROB {
            return Err(Error::DegenerateTier {
                tier: "mmWave",
                probability: a,
            });
        }
        Ok(self.assoc_weight_mm(x)? / a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::TierParams;
    use crate::specfun::{integrate, QuadratureSpec};

    fn defaults() -> HybridParams {
        HybridParams::default()
    }

    #[test]
    fn epsilon_values() {
        let p = defaults();
        // (1·10^5.3·16)/(10·10^7.3·64)·(350/30)² ≈ 0.0340
        let expected = 16.0 / (10.0 * 100.0 * 64.0) * (350.0f64 / 30.0).powi(2);
        assert!((epsilon(&p) - expected).abs() < 1e-15);
        assert!((epsilon(&p) - 0.0340).abs() < 1e-4);

        let mut sym = p;
        sym.mmwave = TierParams {
            density: p.mmwave.density,
            pathloss_exponent: 2.0,
            los_radius: 20.0,
            ..p.thz
        };
        assert!((epsilon(&sym) - 1.0).abs() < 1e-14);

        let mut doubled = p;
        doubled.thz.bias *= 2.0;
        assert!((epsilon(&doubled) / epsilon(&p) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn nearest_pdf_normalized() {
        let f = nearest_distance_pdf(0.05, 100.0).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        let v = integrate(|x| f.eval(x), 0.0, 100.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        let g = nearest_distance_pdf(5e-4, 20.0).unwrap();
        let v = integrate(|x| g.eval(x), 0.0, 20.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn nu_solves_defining_equation() {
        let a = Analysis::new(&defaults()).unwrap();
        assert_eq!(a.nu(0.0).unwrap(), 0.0);
        for i in 1..=50 {
            let x = 20.0 * i as f64 / 50.0;
            let r = a.nu(x).unwrap();
            let lhs = a.epsilon() * r.powf(4.0) * (a.absorption_coefficient() * r).exp();
            let rhs = x * x;
            assert!(((lhs - rhs) / rhs).abs() < 1e-9);
            // ρ inverts ν
            assert!((a.rho(r) - x).abs() < 1e-9 * x);
        }
    }

    #[test]
    fn nu_small_absorption_limit() {
        let mut p = defaults();
        p.absorption = crate::channel::AbsorptionSource::Fixed(1e-12);
        let a = Analysis::new(&p).unwrap();
        for x in [0.5, 3.0, 17.0] {
            let limit = (x * x / a.epsilon()).powf(0.25);
            assert!(((a.nu(x).unwrap() - limit) / limit).abs() < 1e-6);
        }
        p.absorption = crate::channel::AbsorptionSource::Fixed(0.0);
        let a = Analysis::new(&p).unwrap();
        assert!((a.nu(4.0).unwrap() - (16.0 / a.epsilon()).powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn association_sums_to_one_and_sparse_mmwave() {
        let a = Analysis::new(&defaults()).unwrap();
        assert_eq!(a.association_prob_thz() + a.association_prob_mmwave(), 1.0);
        assert!((0.0..=1.0).contains(&a.association_prob_thz()));

        for model in [AssociationModel::LosBall, AssociationModel::UnboundedMmWave] {
            let mut p = defaults();
            p.association = model;
            p.mmwave.density = 1e-30;
            let a = Analysis::new(&p).unwrap();
            assert!((a.association_prob_thz() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn association_monotone() {
        let mut prev_l = 0.0;
        for lt in [1e-3, 5e-3, 0.01, 0.05] {
            let mut prev_b = 0.0;
            for bt in [1.0, 10.0] {
                let mut p = defaults();
                p.thz.density = lt;
                p.thz.bias = bt;
                let v = Analysis::new(&p).unwrap().association_prob_thz();
                assert!(v > prev_b);
                prev_b = v;
                if bt == 1.0 {
                    assert!(v > prev_l);
                    prev_l = v;
                }
            }
        }
    }

    #[test]
    fn conditioned_densities_integrate_to_one() {
        let a = Analysis::new(&defaults()).unwrap();
        let q = QuadratureSpec::default();
        let t = try_integrate_breaks(
            |x| a.conditioned_distance_pdf_thz(x),
            &a.thz_breaks().unwrap(),
            &q,
        )
        .unwrap();
        assert!((t - 1.0).abs() < 1e-6);
        let mut p = defaults();
        p.thz.density = 1e-3;
        p.thz.bias = 1.0;
        let a = Analysis::new(&p).unwrap();
        let m = try_integrate_breaks(|x| a.conditioned_distance_pdf_mmwave(x), &a.mm_breaks(), &q)
            .unwrap();
        assert!((m - 1.0).abs() < 1e-6, "{m}");
    }

    #[test]
    fn conditioned_thz_reduces_to_nearest_without_mmwave() {
        let mut p = defaults();
        p.mmwave.density = 1e-30;
        let a = Analysis::new(&p).unwrap();
        let f = nearest_distance_pdf(p.thz.density, p.thz.los_radius).unwrap();
        for i in 0..=40 {
            let x = 0.5 * i as f64;
            assert!((a.conditioned_distance_pdf_thz(x).unwrap() - f.eval(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn degenerate_tier_is_reported() {
        let mut p = defaults();
        p.thz.density = 1e-30;
        let a = Analysis::new(&p).unwrap();
        assert!(matches!(
            a.conditioned_distance_pdf_thz(1.0),
            Err(Error::DegenerateTier { .. })
        ));
    }
}
