//! Uniform linear array gain and its multi-level flat-top (MLFT) approximation.
//!
//! Directions are cosine directions φ, so a lobe of an N-element array with
//! half-wavelength spacing has width 1/N and nulls at multiples of 1/N.

use std::f64::consts::PI;

use crate::{Error, Result};

/// One flat-top bin: gain `gain` over `[center − ψ/2, center + ψ/2)` in |φ|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlftLevel {
    pub center: f64,
    pub gain: f64,
}

/// Precomputed MLFT pattern for an array of `n_elements`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlftPattern {
    n_elements: u32,
    hpbw: f64,
    levels: Vec<MlftLevel>,
}

impl MlftPattern {
    pub fn n_elements(&self) -> u32 {
        self.n_elements
    }

    /// Half-power beamwidth ψ.
    pub fn hpbw(&self) -> f64 {
        self.hpbw
    }

    pub fn levels(&self) -> &[MlftLevel] {
        &self.levels
    }

    /// Number of levels K = floor(N/2).
    pub fn k(&self) -> usize {
        self.levels.len()
    }
}

/// Array gain sin²(πNφ) / (N sin²(πφ)).
pub fn actual_gain(phi: f64, n_elements: u32) -> f64 {
    let n = f64::from(n_elements);
    // The pattern has period 1 in φ; fold onto [-1/2, 1/2] so the removable
    // singularity only appears at δ = 0.
    let delta = phi - phi.round();
    let s = (PI * delta).sin();
    if s.abs() < 1e-9 {
        let x = PI * delta;
        return n * (1.0 - (n * n - 1.0) * x * x / 3.0);
    }
    let num = (PI * n * delta).sin();
    num * num / (n * s * s)
}

fn check_size(n_elements: u32) -> Result<()> {
    if n_elements < 2 {
        return Err(Error::invalid(
            "array size",
            format!("{n_elements} elements; need at least 2"),
        ));
    }
    Ok(())
}

/// Half-power beamwidth: the root of G_act(ψ) = N/2 on (0, 1/N).
pub fn solve_hpbw(n_elements: u32) -> Result<f64> {
    check_size(n_elements)?;
    let n = f64::from(n_elements);
    let target = 0.5 * n;
    let (mut lo, mut hi) = (0.0, 1.0 / n);
    let f = |p: f64| actual_gain(p, n_elements) - target;
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::NonConvergence {
            what: "half-power beamwidth".into(),
            detail: format!("root not bracketed for N = {n_elements}"),
        });
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds the MLFT pattern: boresight bin of gain N, then one bin per side lobe
/// sampled at the lobe center (2k−1)/(2N).
pub fn build_mlft(n_elements: u32) -> Result<MlftPattern> {
    let psi = solve_hpbw(n_elements)?;
    let n = f64::from(n_elements);
    let k = (n_elements / 2) as usize;
    let mut levels = Vec::with_capacity(k);
    levels.push(MlftLevel {
        center: 0.5 * psi,
        gain: n,
    });
    for idx in 2..=k {
        let center = (2.0 * idx as f64 - 1.0) / (2.0 * n);
        levels.push(MlftLevel {
            center,
            gain: actual_gain(center, n_elements),
        });
    }
    Ok(MlftPattern {
        n_elements,
        hpbw: psi,
        levels,
    })
}

/// Gain of the MLFT pattern at cosine direction φ.
pub fn mlft_gain(pattern: &MlftPattern, phi: f64) -> f64 {
    let a = phi.abs();
    let half = 0.5 * pattern.hpbw;
    pattern
        .levels
        .iter()
        .find(|l| a >= l.center - half && a < l.center + half)
        .map_or(0.0, |l| l.gain)
}

/// Distribution of the gain an interferer presents to the typical user when its
/// direction is uniform on [−1/2, 1/2]: each level with probability 2ψ, zero
/// otherwise. The zero-gain entry comes last.
pub fn interferer_gain_distribution(pattern: &MlftPattern) -> Vec<(f64, f64)> {
    let p = 2.0 * pattern.hpbw;
    let mut out: Vec<(f64, f64)> = pattern.levels.iter().map(|l| (l.gain, p)).collect();
    let used: f64 = out.iter().map(|&(_, q)| q).sum();
    out.push((0.0, 1.0 - used));
    out
}
