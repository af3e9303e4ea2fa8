//! Semi-closed-form analysis of the two-tier network: association, serving
//! distance densities, interference Laplace transforms, coverage and spectral
//! efficiency.
//!
//! Everything is evaluated through an [`Analysis`], which validates a
//! [`HybridParams`] once and caches the derived constants (absorption coefficient,
//! MLFT patterns, bias ratio ε, normalized noise, hypergeometric prefactors).
//! An `Analysis` is immutable and `Sync`, so sweeps can share one across threads.

mod association;
mod coverage;
mod laplace;
mod se;

pub use association::{epsilon, nearest_distance_pdf};
pub use se::zeta;

use crate::antenna::{build_mlft, MlftPattern};
use crate::channel::{
    absorption_coefficient, friis_factor, johnson_nyquist_noise_density, AbsorptionSource,
    Environment, ABSORPTION_BAND_HZ,
};
use crate::specfun::{Hyp2F1, QuadratureSpec};
use crate::{dbm_to_watts, Error, Result};

/// Parameters of one tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierParams {
    /// Base-station density, 1/m².
    pub density: f64,
    /// Carrier frequency, Hz.
    pub frequency: f64,
    /// Transmit power, W.
    pub tx_power: f64,
    pub bias: f64,
    pub pathloss_exponent: f64,
    /// LOS ball radius, m.
    pub los_radius: f64,
    pub array_size: u32,
}

impl TierParams {
    /// THz tier defaults: 0.05 /m², 350 GHz, 73 dBm, bias 10, α = 4, 100 m, 64 elements.
    pub fn thz_default() -> Self {
        Self {
            density: 0.05,
            frequency: 350e9,
            tx_power: dbm_to_watts(73.0),
            bias: 10.0,
            pathloss_exponent: 4.0,
            los_radius: 100.0,
            array_size: 64,
        }
    }

    /// mmWave tier defaults: 5e-4 /m², 30 GHz, 53 dBm, bias 1, α = 2, 20 m, 16 elements.
    pub fn mmwave_default() -> Self {
        Self {
            density: 5e-4,
            frequency: 30e9,
            tx_power: dbm_to_watts(53.0),
            bias: 1.0,
            pathloss_exponent: 2.0,
            los_radius: 20.0,
            array_size: 16,
        }
    }

    fn validate(&self, tier: &'static str) -> Result<()> {
        let fields = [
            ("density", self.density),
            ("frequency", self.frequency),
            ("tx_power", self.tx_power),
            ("bias", self.bias),
            ("los_radius", self.los_radius),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    tier,
                    format!("{name} = {v}; must be finite and positive"),
                ));
            }
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent >= 2.0) {
            return Err(Error::invalid(
                tier,
                format!(
                    "pathloss_exponent = {}; must be at least 2",
                    self.pathloss_exponent
                ),
            ));
        }
        if self.array_size < 2 {
            return Err(Error::invalid(
                tier,
                format!("array_size = {}; must be at least 2", self.array_size),
            ));
        }
        Ok(())
    }
}

/// How the association probability treats the mmWave tier's LOS radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssociationModel {
    /// Both tiers restricted to their LOS balls, matching the simulated network.
    /// Probabilities are conditioned on at least one base station being visible.
    #[default]
    LosBall,
    /// The mmWave void probability is taken from an unbounded PPP and the
    /// serving-distance densities use the per-tier truncated Rayleigh laws.
    UnboundedMmWave,
}

/// Full parameter set of the hybrid network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridParams {
    pub thz: TierParams,
    pub mmwave: TierParams,
    pub nakagami_m: u32,
    /// mmWave receiver noise power, W.
    pub mmwave_noise_power: f64,
    pub environment: Environment,
    pub absorption: AbsorptionSource,
    pub association: AssociationModel,
}

impl Default for HybridParams {
    fn default() -> Self {
        let environment = Environment::default();
        Self {
            thz: TierParams::thz_default(),
            mmwave: TierParams::mmwave_default(),
            nakagami_m: 4,
            mmwave_noise_power: dbm_to_watts(-85.0),
            environment,
            absorption: AbsorptionSource::Simplified(environment),
            association: AssociationModel::LosBall,
        }
    }
}

impl HybridParams {
    pub fn validate(&self) -> Result<()> {
        self.thz.validate("thz tier")?;
        self.mmwave.validate("mmwave tier")?;
        if self.nakagami_m < 1 {
            return Err(Error::invalid("nakagami_m", "must be at least 1"));
        }
        if !(self.mmwave_noise_power.is_finite() && self.mmwave_noise_power >= 0.0) {
            return Err(Error::invalid(
                "noise_power_mm",
                format!("{} W; must be non-negative", self.mmwave_noise_power),
            ));
        }
        if let AbsorptionSource::Simplified(_) = self.absorption {
            let (lo, hi) = ABSORPTION_BAND_HZ;
            if !(lo..=hi).contains(&self.thz.frequency) {
                return Err(Error::OutOfBand {
                    frequency_hz: self.thz.frequency,
                });
            }
        }
        Ok(())
    }

    /// THz absorption coefficient k_a(f_T), 1/m.
    pub fn absorption_coefficient(&self) -> Result<f64> {
        absorption_coefficient(self.thz.frequency, &self.absorption)
    }
}

/// Noise terms normalized by the serving-link gain at unit distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedNoise {
    /// N̂ = N_JN / (P_T N_T (c/4πf_T)²)
    pub thz_hat_n: f64,
    /// σ² = σ_m² / (P_m N_m (c/4πf_m)²)
    pub mm_sigma2: f64,
}

impl NormalizedNoise {
    pub fn from_params(params: &HybridParams) -> Self {
        let t = &params.thz;
        let m = &params.mmwave;
        let njn = johnson_nyquist_noise_density(t.frequency, params.environment.temperature());
        Self {
            thz_hat_n: njn / (t.tx_power * f64::from(t.array_size) * friis_factor(t.frequency)),
            mm_sigma2: params.mmwave_noise_power
                / (m.tx_power * f64::from(m.array_size) * friis_factor(m.frequency)),
        }
    }
}

/// Interference geometry of one tier: MLFT pattern and normalized level gains.
#[derive(Debug, Clone)]
pub(crate) struct TierInterference {
    pub pattern: MlftPattern,
    /// G_k / N for each level.
    pub gains: Vec<f64>,
    pub density: f64,
    pub alpha: f64,
    pub radius: f64,
}

impl TierInterference {
    fn new(tier: &TierParams) -> Result<Self> {
        let pattern = build_mlft(tier.array_size)?;
        let n = f64::from(tier.array_size);
        let gains = pattern.levels().iter().map(|l| l.gain / n).collect();
        Ok(Self {
            pattern,
            gains,
            density: tier.density,
            alpha: tier.pathloss_exponent,
            radius: tier.los_radius,
        })
    }

    /// 4πλψ, the prefactor of the Laplace exponent.
    pub fn exponent_scale(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.density * self.pattern.hpbw()
    }
}

/// Derived-quantity cache for one parameter set.
#[derive(Debug, Clone)]
pub struct Analysis {
    params: HybridParams,
    quad: QuadratureSpec,
    k_a: f64,
    epsilon: f64,
    noise: NormalizedNoise,
    /// Alzer constant a = M (M!)^{-1/M}.
    alzer_a: f64,
    thz: TierInterference,
    mm: TierInterference,
    /// ₂F₁(−2/α_T, M; (α_T−2)/α_T; ·), absent when α_T = 2.
    thz_f: Option<Hyp2F1>,
    /// ₂F₁(1, 1+2/α_m; 2+2/α_m; ·), the χ_m closed form.
    mm_chi_f: Hyp2F1,
    /// ₂F₁(1, 2/α_m; 1+2/α_m; ·), the interference deficit used in L_I.
    mm_deficit_f: Hyp2F1,
    /// Probability that at least one base station is inside either LOS ball.
    p_any: f64,
    assoc_thz: f64,
}

impl Analysis {
    pub fn new(params: &HybridParams) -> Result<Self> {
        Self::with_quadrature(params, QuadratureSpec::default())
    }

    pub fn with_quadrature(params: &HybridParams, quad: QuadratureSpec) -> Result<Self> {
        params.validate()?;
        quad.validate()?;
        let k_a = params.absorption_coefficient()?;
        let m = params.nakagami_m;
        let mf = f64::from(m);
        let log_fact: f64 = (1..=m).map(|i| f64::from(i).ln()).sum();
        let alzer_a = mf * (-log_fact / mf).exp();
        let a_t = params.thz.pathloss_exponent;
        let a_m = params.mmwave.pathloss_exponent;
        // c = (α_T − 2)/α_T vanishes at α_T = 2; the Laplace transform then
        // falls back to quadrature.
        let thz_f = if a_t > 2.0 {
            Some(Hyp2F1::new(-2.0 / a_t, mf, (a_t - 2.0) / a_t)?)
        } else {
            None
        };
        let mm_chi_f = Hyp2F1::new(1.0, 1.0 + 2.0 / a_m, 2.0 + 2.0 / a_m)?;
        let mm_deficit_f = Hyp2F1::new(1.0, 2.0 / a_m, 1.0 + 2.0 / a_m)?;
        let pi = std::f64::consts::PI;
        let p_any = -(-(params.thz.density * pi * params.thz.los_radius.powi(2)
            + params.mmwave.density * pi * params.mmwave.los_radius.powi(2)))
        .exp_m1();
        let mut analysis = Self {
            params: *params,
            quad,
            k_a,
            epsilon: epsilon(params),
            noise: NormalizedNoise::from_params(params),
            alzer_a,
            thz: TierInterference::new(&params.thz)?,
            mm: TierInterference::new(&params.mmwave)?,
            thz_f,
            mm_chi_f,
            mm_deficit_f,
            p_any,
            assoc_thz: f64::NAN,
        };
        analysis.assoc_thz = analysis.compute_association_thz()?;
        Ok(analysis)
    }

    pub fn params(&self) -> &HybridParams {
        &self.params
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// THz absorption coefficient in use, 1/m.
    pub fn absorption_coefficient(&self) -> f64 {
        self.k_a
    }

    /// Bias/power/gain ratio ε between the tiers.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn noise(&self) -> NormalizedNoise {
        self.noise
    }

    pub fn alzer_constant(&self) -> f64 {
        self.alzer_a
    }

    pub fn thz_pattern(&self) -> &MlftPattern {
        &self.thz.pattern
    }

    pub fn mmwave_pattern(&self) -> &MlftPattern {
        &self.mm.pattern
    }

    /// Breakpoints for integrals over [0, radius] whose integrand is concentrated
    /// on the nearest-neighbour scale 1/√(πλ), plus any extra kinks.
    pub(crate) fn breakpoints(density: f64, radius: f64, kinks: &[f64]) -> Vec<f64> {
        let scale = 1.0 / (std::f64::consts::PI * density).sqrt();
        let mut pts = vec![0.0, radius];
        let mut s = 0.25 * scale;
        while s < radius && pts.len() < 40 {
            pts.push(s);
            s *= 2.0;
        }
        pts.extend(kinks.iter().copied().filter(|&k| k > 0.0 && k < radius));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * radius);
        pts
    }
}
