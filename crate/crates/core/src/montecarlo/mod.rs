//! Monte Carlo simulation of the two-tier network.
//!
//! Each trial draws both PPPs inside their LOS balls, associates the user by
//! maximum biased average received power, and evaluates the SINR of the
//! serving link from the raw per-node terms in physical units. Trials use
//! independent ChaCha streams keyed by (master seed, trial index), so results
//! are bit-identical however the trials are spread across threads.

mod estimate;

pub use estimate::{
    association_estimate, coverage_estimate, se_estimate, CoverageEstimate, Estimate, SeEstimate,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::analysis::{HybridParams, TierParams};
use crate::antenna::{actual_gain, build_mlft, interferer_gain_distribution};
use crate::channel::{
    friis_factor, johnson_nyquist_noise_density, pathloss, sample_nakagami_power,
    sample_rayleigh_power,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Thz,
    MmWave,
}

/// Which tiers are deployed in a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    ThzOnly,
    MmWaveOnly,
    #[default]
    Hybrid,
}

impl Mode {
    fn deploys(self, tier: Tier) -> bool {
        !matches!(
            (self, tier),
            (Mode::ThzOnly, Tier::MmWave) | (Mode::MmWaveOnly, Tier::Thz)
        )
    }
}

/// How interferer antenna gains are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainModel {
    /// The discrete MLFT levels, each with probability 2ψ, zero otherwise.
    #[default]
    Mlft,
    /// The exact array factor at a direction uniform on [−1/2, 1/2].
    ActualPattern,
}

/// One base station as seen from the typical user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    /// Distance to the user, m.
    pub distance: f64,
    /// Antenna gain towards the user, linear.
    pub gain: f64,
    /// Small-scale fading power, unit mean.
    pub fading: f64,
}

/// One network draw.
///
/// The nearest node of each tier comes first in its list and carries the full
/// array gain N, since it would serve with perfect beam alignment. The order of
/// the remaining nodes is arbitrary.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub thz_nodes: Vec<Node>,
    pub mm_nodes: Vec<Node>,
    pub association: Option<Tier>,
    /// Serving distance, m.
    pub serving_distance: Option<f64>,
    /// Received power of the serving link, W.
    pub signal: f64,
    /// Co-tier interference after absorption, W.
    pub interference: f64,
    /// Power absorbed from the interfering THz links and re-emitted as noise, W.
    pub absorption_noise: f64,
    /// Receiver noise, W.
    pub noise: f64,
    /// Zero when the user is unserved.
    pub sinr: f64,
}

impl Realization {
    pub fn outcome(&self) -> TrialOutcome {
        TrialOutcome {
            association: self.association,
            sinr: self.sinr,
            serving_distance: self.serving_distance,
            thz_count: self.thz_nodes.len() as u32,
            mm_count: self.mm_nodes.len() as u32,
        }
    }
}

/// The part of a realization kept for aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub association: Option<Tier>,
    pub sinr: f64,
    pub serving_distance: Option<f64>,
    pub thz_count: u32,
    pub mm_count: u32,
}

/// Per-tier constants for fast sampling.
#[derive(Debug, Clone)]
struct TierSim {
    count: Option<Poisson<f64>>,
    radius: f64,
    alpha: f64,
    tx_power: f64,
    friis: f64,
    n_elements: u32,
    /// ln(B P N (c/4πf)²), the distance-free part of the biased received power.
    ln_biased_power: f64,
    /// Cumulative probabilities of the MLFT gain levels; beyond the last is zero gain.
    gain_cdf: Vec<f64>,
    gain_levels: Vec<f64>,
}

impl TierSim {
    fn new(tier: &TierParams) -> Result<Self> {
        let mean = tier.density * std::f64::consts::PI * tier.los_radius * tier.los_radius;
        let count = if mean > 0.0 {
            Some(Poisson::new(mean).map_err(|e| Error::invalid("density", e.to_string()))?)
        } else {
            None
        };
        let pattern = build_mlft(tier.array_size)?;
        let dist = interferer_gain_distribution(&pattern);
        let mut acc = 0.0;
        let mut gain_cdf = Vec::new();
        let mut gain_levels = Vec::new();
        for &(g, p) in dist.iter().filter(|&&(g, _)| g > 0.0) {
            acc += p;
            gain_cdf.push(acc);
            gain_levels.push(g);
        }
        let friis = friis_factor(tier.frequency);
        Ok(Self {
            count,
            radius: tier.los_radius,
            alpha: tier.pathloss_exponent,
            tx_power: tier.tx_power,
            friis,
            n_elements: tier.array_size,
            ln_biased_power: tier.bias.ln()
                + tier.tx_power.ln()
                + f64::from(tier.array_size).ln()
                + friis.ln(),
            gain_cdf,
            gain_levels,
        })
    }

    fn interferer_gain<R: Rng + ?Sized>(&self, rng: &mut R, model: GainModel) -> f64 {
        let u: f64 = rng.random();
        match model {
            GainModel::Mlft => {
                let i = self.gain_cdf.partition_point(|&c| c <= u);
                self.gain_levels.get(i).copied().unwrap_or(0.0)
            }
            GainModel::ActualPattern => actual_gain(u - 0.5, self.n_elements),
        }
    }

    /// Draws the node count and uniform positions in the disc, nearest first.
    fn distances<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.count.as_ref().map_or(0, |p| p.sample(rng) as usize);
        // 1 − U lies in (0, 1], so distances stay in (0, R].
        let mut d: Vec<f64> = (0..n)
            .map(|_| self.radius * (1.0 - rng.random::<f64>()).sqrt())
            .collect();
        if let Some(i) = (0..n).min_by(|&a, &b| d[a].total_cmp(&d[b])) {
            d.swap(0, i);
        }
        d
    }

    /// Received power P G (c/4πf)² x^{−α} h before absorption.
    fn received(&self, node: &Node) -> f64 {
        let a = self.alpha;
        let decay = if a.fract() == 0.0 && a <= 8.0 {
            node.distance.powi(-(a as i32))
        } else {
            node.distance.powf(-a)
        };
        self.tx_power * node.gain * self.friis * decay * node.fading
    }
}

/// Monte Carlo engine for one parameter set and master seed.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: HybridParams,
    seed: u64,
    gain_model: GainModel,
    k_a: f64,
    /// Johnson–Nyquist noise at the THz carrier, W.
    thz_noise: f64,
    thz: TierSim,
    mm: TierSim,
}

impl Simulator {
    pub fn new(params: &HybridParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params: *params,
            seed,
            gain_model: GainModel::default(),
            k_a: params.absorption_coefficient()?,
            thz_noise: johnson_nyquist_noise_density(
                params.thz.frequency,
                params.environment.temperature(),
            ),
            thz: TierSim::new(&params.thz)?,
            mm: TierSim::new(&params.mmwave)?,
        })
    }

    pub fn with_gain_model(mut self, model: GainModel) -> Self {
        self.gain_model = model;
        self
    }

    pub fn params(&self) -> &HybridParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gain_model(&self) -> GainModel {
        self.gain_model
    }

    /// The independent random stream of one trial.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    fn draw_tier<R: Rng + ?Sized>(&self, rng: &mut R, tier: Tier, mode: Mode) -> Vec<Node> {
        if !mode.deploys(tier) {
            return Vec::new();
        }
        let sim = match tier {
            Tier::Thz => &self.thz,
            Tier::MmWave => &self.mm,
        };
        let m = self.params.nakagami_m;
        sim.distances(rng)
            .into_iter()
            .enumerate()
            .map(|(i, distance)| {
                let gain = if i == 0 {
                    f64::from(sim.n_elements)
                } else {
                    sim.interferer_gain(rng, self.gain_model)
                };
                let fading = match tier {
                    Tier::Thz => sample_nakagami_power(rng, m),
                    Tier::MmWave => sample_rayleigh_power(rng),
                };
                Node {
                    distance,
                    gain,
                    fading,
                }
            })
            .collect()
    }

    /// Draws one network and evaluates the serving link.
    pub fn realize_network<R: Rng + ?Sized>(&self, rng: &mut R, mode: Mode) -> Realization {
        let thz_nodes = self.draw_tier(rng, Tier::Thz, mode);
        let mm_nodes = self.draw_tier(rng, Tier::MmWave, mode);

        // Fading-free biased received power of each tier's nearest node, in log space.
        let ln_thz = thz_nodes.first().map(|n| {
            self.thz.ln_biased_power - self.thz.alpha * n.distance.ln() - self.k_a * n.distance
        });
        let ln_mm = mm_nodes
            .first()
            .map(|n| self.mm.ln_biased_power - self.mm.alpha * n.distance.ln());
        let association = match (ln_thz, ln_mm) {
            (None, None) => None,
            (Some(_), None) => Some(Tier::Thz),
            (None, Some(_)) => Some(Tier::MmWave),
            (Some(t), Some(m)) => Some(if t > m { Tier::Thz } else { Tier::MmWave }),
        };

        let mut r = Realization {
            thz_nodes,
            mm_nodes,
            association,
            serving_distance: None,
            signal: 0.0,
            interference: 0.0,
            absorption_noise: 0.0,
            noise: 0.0,
            sinr: 0.0,
        };
        match association {
            None => {}
            Some(Tier::Thz) => {
                let serving = r.thz_nodes[0];
                r.serving_distance = Some(serving.distance);
                r.signal = self.thz.received(&serving) * (-self.k_a * serving.distance).exp();
                for node in &r.thz_nodes[1..] {
                    let raw = self.thz.received(node);
                    let kx = -self.k_a * node.distance;
                    r.interference += raw * kx.exp();
                    r.absorption_noise -= raw * kx.exp_m1();
                }
                r.noise = self.thz_noise;
            }
            Some(Tier::MmWave) => {
                let serving = r.mm_nodes[0];
                r.serving_distance = Some(serving.distance);
                r.signal = self.mm.received(&serving);
                r.interference = r.mm_nodes[1..].iter().map(|n| self.mm.received(n)).sum();
                r.noise = self.params.mmwave_noise_power;
            }
        }
        if association.is_some() {
            r.sinr = r.signal / (r.interference + r.absorption_noise + r.noise);
        }
        r
    }

    /// The realization of trial `trial` under this simulator's seed.
    pub fn realize(&self, trial: u64, mode: Mode) -> Realization {
        self.realize_network(&mut self.trial_rng(trial), mode)
    }

    /// Runs trials 0..n_trials in parallel and returns their outcomes in trial order.
    pub fn run(&self, n_trials: usize, mode: Mode) -> Vec<TrialOutcome> {
        (0..n_trials as u64)
            .into_par_iter()
            .map(|t| self.realize(t, mode).outcome())
            .collect()
    }

    /// Fraction of served users associating with the THz tier.
    pub fn estimate_association(&self, n_trials: usize) -> Result<Estimate> {
        check_trials(n_trials, 1)?;
        Ok(association_estimate(&self.run(n_trials, Mode::Hybrid)))
    }

    /// Coverage at each linear threshold in `taus`, all from one set of realizations.
    pub fn estimate_coverage(
        &self,
        taus: &[f64],
        n_trials: usize,
        mode: Mode,
    ) -> Result<Vec<CoverageEstimate>> {
        check_trials(n_trials, 100)?;
        if let Some(&bad) = taus.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::invalid("tau", format!("threshold {bad} must be finite and non-negative")));
        }
        let outcomes = self.run(n_trials, mode);
        Ok(taus.iter().map(|&t| coverage_estimate(&outcomes, t)).collect())
    }

    pub fn estimate_se(&self, n_trials: usize, mode: Mode) -> Result<SeEstimate> {
        check_trials(n_trials, 100)?;
        Ok(se_estimate(&self.run(n_trials, mode)))
    }

    /// Unabsorbed interfering power Σ G P (c/4πf)² x^{−α} g of a THz-served
    /// realization, recomputed from its node list.
    pub fn unabsorbed_interference(&self, r: &Realization) -> Result<f64> {
        let t = &self.params.thz;
        r.thz_nodes
            .iter()
            .skip(1)
            .map(|n| {
                Ok(t.tx_power * n.gain * pathloss(t.frequency, n.distance, t.pathloss_exponent)? * n.fading)
            })
            .sum()
    }

    /// Relative mismatch between interference plus absorption noise and the
    /// unabsorbed interfering power. Zero for realizations not served by THz.
    pub fn conservation_residual(&self, r: &Realization) -> Result<f64> {
        if r.association != Some(Tier::Thz) {
            return Ok(0.0);
        }
        let total = self.unabsorbed_interference(r)?;
        let stored = r.interference + r.absorption_noise;
        Ok(if total == 0.0 {
            stored.abs()
        } else {
            ((stored - total) / total).abs()
        })
    }

    /// SINR of the serving link recomputed from the node lists.
    pub fn recompute_sinr(&self, r: &Realization) -> Result<f64> {
        let p = &self.params;
        match r.association {
            None => Ok(0.0),
            Some(Tier::Thz) => {
                let t = &p.thz;
                let s = &r.thz_nodes[0];
                let signal = t.tx_power
                    * s.gain
                    * pathloss(t.frequency, s.distance, t.pathloss_exponent)?
                    * s.fading
                    * (-self.k_a * s.distance).exp();
                Ok(signal / (self.unabsorbed_interference(r)? + self.thz_noise))
            }
            Some(Tier::MmWave) => {
                let m = &p.mmwave;
                let mut powers = Vec::with_capacity(r.mm_nodes.len());
                for n in &r.mm_nodes {
                    powers.push(
                        m.tx_power * n.gain * pathloss(m.frequency, n.distance, m.pathloss_exponent)? * n.fading,
                    );
                }
                let interference: f64 = powers[1..].iter().sum();
                Ok(powers[0] / (interference + p.mmwave_noise_power))
            }
        }
    }

    /// Largest conservation residual over trials 0..n_trials.
    pub fn max_conservation_residual(&self, n_trials: usize, mode: Mode) -> Result<f64> {
        let residuals: Result<Vec<f64>> = (0..n_trials as u64)
            .into_par_iter()
            .map(|t| self.conservation_residual(&self.realize(t, mode)))
            .collect();
        Ok(residuals?.into_iter().fold(0.0, f64::max))
    }
}

fn check_trials(n_trials: usize, min: usize) -> Result<()> {
    if n_trials < min {
        return Err(Error::invalid(
            "n_trials",
            format!("{n_trials} trials; at least {min} required"),
        ));
    }
    Ok(())
}
