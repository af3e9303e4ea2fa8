//! Aggregation of per-trial outcomes into estimates with standard errors.

use super::{Tier, TrialOutcome};

/// A Monte Carlo mean with its standard error.
///
/// `n_conditioned` counts the trials that entered the mean; the standard error
/// is the sample standard deviation over those trials divided by √n_conditioned.
/// With no conditioned trials the mean and stderr are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_trials: usize,
    pub n_conditioned: usize,
}

impl Estimate {
    /// Mean and standard error of `samples`, accumulated in iteration order.
    pub fn from_samples<I>(samples: I, n_trials: usize) -> Self
    where
        I: IntoIterator<Item = f64>,
    {
        // Welford's update, sequential so the result never depends on threading.
        let mut n = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for x in samples {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let (mean, stderr) = match n {
            0 => (f64::NAN, f64::NAN),
            1 => (mean, 0.0),
            _ => (mean, (m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt()),
        };
        Self {
            mean,
            stderr,
            n_trials,
            n_conditioned: n,
        }
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn contains(&self, value: f64, k: f64) -> bool {
        (value - self.mean).abs() <= k * self.stderr
    }
}

/// Coverage at one threshold under both empty-ball conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageEstimate {
    /// Linear SINR threshold.
    pub tau: f64,
    /// Among trials where some base station serves the user.
    pub conditioned: Estimate,
    /// Over all trials, an unserved user counting as not covered.
    pub unconditional: Estimate,
}

/// Spectral efficiency E[ln(1 + SINR)] in nats/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeEstimate {
    /// Over all trials, an unserved user contributing zero.
    pub unconditional: Estimate,
    /// Among served trials.
    pub conditioned: Estimate,
    /// Among trials associated with the THz tier.
    pub thz: Estimate,
    /// Among trials associated with the mmWave tier.
    pub mmwave: Estimate,
}

/// Fraction of served trials that associate with the THz tier.
pub fn association_estimate(outcomes: &[TrialOutcome]) -> Estimate {
    Estimate::from_samples(
        outcomes
            .iter()
            .filter_map(|o| o.association)
            .map(|t| if t == Tier::Thz { 1.0 } else { 0.0 }),
        outcomes.len(),
    )
}

/// Coverage P(SINR ≥ τ) over a shared set of outcomes.
pub fn coverage_estimate(outcomes: &[TrialOutcome], tau: f64) -> CoverageEstimate {
    let hit = |o: &TrialOutcome| if o.association.is_some() && o.sinr >= tau { 1.0 } else { 0.0 };
    CoverageEstimate {
        tau,
        conditioned: Estimate::from_samples(
            outcomes.iter().filter(|o| o.association.is_some()).map(hit),
            outcomes.len(),
        ),
        unconditional: Estimate::from_samples(outcomes.iter().map(hit), outcomes.len()),
    }
}

/// Spectral efficiency over a shared set of outcomes.
pub fn se_estimate(outcomes: &[TrialOutcome]) -> SeEstimate {
    let n = outcomes.len();
    let se = |o: &TrialOutcome| if o.association.is_some() { o.sinr.ln_1p() } else { 0.0 };
    let of_tier = |tier: Tier| {
        Estimate::from_samples(
            outcomes.iter().filter(|o| o.association == Some(tier)).map(se),
            n,
        )
    };
    SeEstimate {
        unconditional: Estimate::from_samples(outcomes.iter().map(se), n),
        conditioned: Estimate::from_samples(
            outcomes.iter().filter(|o| o.association.is_some()).map(se),
            n,
        ),
        thz: of_tier(Tier::Thz),
        mmwave: of_tier(Tier::MmWave),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr_of_known_sample() {
        let e = Estimate::from_samples([1.0, 2.0, 3.0, 4.0], 10);
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3
        assert!((e.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!((e.n_trials, e.n_conditioned), (10, 4));
        assert!(e.contains(2.0, 1.0));
        assert!(!e.contains(4.0, 1.0));
    }

    #[test]
    fn degenerate_sample_sizes() {
        let e = Estimate::from_samples(std::iter::empty(), 3);
        assert!(e.mean.is_nan() && e.stderr.is_nan());
        let e = Estimate::from_samples([0.7], 3);
        assert_eq!((e.mean, e.stderr), (0.7, 0.0));
    }

    fn outcome(association: Option<Tier>, sinr: f64) -> TrialOutcome {
        TrialOutcome {
            association,
            sinr,
            serving_distance: association.map(|_| 1.0),
            thz_count: 0,
            mm_count: 0,
        }
    }

    #[test]
    fn empty_ball_conventions() {
        let outs = [
            outcome(Some(Tier::Thz), 10.0),
            outcome(Some(Tier::MmWave), 0.5),
            outcome(None, 0.0),
            outcome(Some(Tier::Thz), 2.0),
        ];
        let c = coverage_estimate(&outs, 1.0);
        assert!((c.conditioned.mean - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.unconditional.mean, 0.5);
        let a = association_estimate(&outs);
        assert!((a.mean - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.n_conditioned, 3);
        let s = se_estimate(&outs);
        let total = 11f64.ln() + 1.5f64.ln() + 3f64.ln();
        assert!((s.unconditional.mean - total / 4.0).abs() < 1e-15);
        assert!((s.conditioned.mean - total / 3.0).abs() < 1e-15);
        assert!((s.thz.mean - (11f64.ln() + 3f64.ln()) / 2.0).abs() < 1e-15);
        assert_eq!(s.mmwave.n_conditioned, 1);
    }
}
