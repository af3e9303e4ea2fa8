//! Propagation physics: molecular absorption in the 275–400 GHz band, free-space
//! pathloss, thermal noise and small-scale fading.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Physical constants (CODATA exact values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Speed of light, m/s.
    pub c: f64,
    /// Planck constant h, J·s.
    pub planck: f64,
    /// Boltzmann constant, J/K.
    pub k_boltzmann: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    c: SPEED_OF_LIGHT,
    planck: PLANCK,
    k_boltzmann: BOLTZMANN,
};

/// Atmospheric conditions for the absorption model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    temperature: f64,
    pressure: f64,
    relative_humidity: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            temperature: 296.0,
            pressure: 101_325.0,
            relative_humidity: 0.6,
        }
    }
}

impl Environment {
    /// `temperature` in kelvin, `pressure` in pascal, `relative_humidity` as a
    /// fraction in [0, 1].
    pub fn new(temperature: f64, pressure: f64, relative_humidity: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::invalid(
                "temperature",
                format!("{temperature} K; must be positive"),
            ));
        }
        if !(pressure.is_finite() && pressure > 0.0) {
            return Err(Error::invalid(
                "pressure",
                format!("{pressure} Pa; must be positive"),
            ));
        }
        if !(0.0..=1.0).contains(&relative_humidity) {
            let hint = if relative_humidity > 1.0 && relative_humidity <= 100.0 {
                format!(
                    "; expected fraction in [0,1], did you mean {}?",
                    relative_humidity / 100.0
                )
            } else {
                "; expected fraction in [0,1]".to_string()
            };
            return Err(Error::invalid(
                "relative_humidity",
                format!("{relative_humidity}{hint}"),
            ));
        }
        Ok(Self {
            temperature,
            pressure,
            relative_humidity,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn relative_humidity(&self) -> f64 {
        self.relative_humidity
    }
}

/// Where the THz absorption coefficient comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbsorptionSource {
    /// Simplified water-vapor line model for 275–400 GHz.
    Simplified(Environment),
    /// Externally supplied coefficient in 1/m.
    Fixed(f64),
}

impl AbsorptionSource {
    pub fn fixed(k_a: f64) -> Result<Self> {
        if !(k_a.is_finite() && k_a >= 0.0) {
            return Err(Error::invalid(
                "absorption_coefficient",
                format!("{k_a} 1/m; must be non-negative"),
            ));
        }
        Ok(Self::Fixed(k_a))
    }
}

/// Saturated water vapor pressure in pascal (Buck equation over water).
///
/// The enhancement factor takes pressure in hPa, as in Buck's original fit.
pub fn saturated_vapor_pressure(env: &Environment) -> f64 {
    let t_c = env.temperature - 273.15;
    let p_hpa = env.pressure / 100.0;
    let hpa = 6.1121 * (1.0007 + 3.46e-6 * p_hpa) * (17.502 * t_c / (240.94 + t_c)).exp();
    hpa * 100.0
}

/// Volume mixing ratio of water vapor.
pub fn water_vapor_mixing_ratio(env: &Environment) -> f64 {
    env.relative_humidity * saturated_vapor_pressure(env) / env.pressure
}

pub const ABSORPTION_BAND_HZ: (f64, f64) = (275e9, 400e9);

/// Molecular absorption coefficient k_a(f) in 1/m.
pub fn absorption_coefficient(frequency_hz: f64, source: &AbsorptionSource) -> Result<f64> {
    let env = match source {
        AbsorptionSource::Fixed(k) => return Ok(*k),
        AbsorptionSource::Simplified(env) => env,
    };
    let (lo, hi) = ABSORPTION_BAND_HZ;
    if !(lo..=hi).contains(&frequency_hz) {
        return Err(Error::OutOfBand { frequency_hz });
    }
    let mu = water_vapor_mixing_ratio(env);
    let f = frequency_hz;
    // wavenumber in 1/cm
    let nu = f / (100.0 * SPEED_OF_LIGHT);
    let y1 = 0.2205 * mu * (0.1303 * mu + 0.0294)
        / ((0.4093 * mu + 0.0925).powi(2) + (nu - 10.835).powi(2));
    let y2 = 2.014 * mu * (0.1702 * mu + 0.0303)
        / ((0.537 * mu + 0.0956).powi(2) + (nu - 12.664).powi(2));
    let omega = ((5.54e-37 * f - 3.94e-25) * f + 9.06e-14) * f - 6.36e-3;
    Ok(y1 + y2 + omega)
}

/// Transmittance e^{−k_a x}.
pub fn absorption_loss(k_a: f64, x: f64) -> f64 {
    (-k_a * x).exp()
}

/// Free-space pathloss (c/4πf)² x^{−α}.
pub fn pathloss(frequency_hz: f64, x: f64, alpha: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("pathloss", format!("distance {x} must be positive")));
    }
    Ok(friis_factor(frequency_hz) * x.powf(-alpha))
}

/// (c/4πf)², the distance-independent part of the pathloss.
pub fn friis_factor(frequency_hz: f64) -> f64 {
    let k = SPEED_OF_LIGHT / (4.0 * PI * frequency_hz);
    k * k
}

/// Planck-form thermal noise h·f / (exp(h·f / k_B·T) − 1).
pub fn johnson_nyquist_noise_density(frequency_hz: f64, temperature: f64) -> f64 {
    let hf = PLANCK * frequency_hz;
    hf / (hf / (BOLTZMANN * temperature)).exp_m1()
}

/// Nakagami-m power fading: a Gamma(m, 1/m) draw with unit mean.
pub fn sample_nakagami_power<R: Rng + ?Sized>(rng: &mut R, m: u32) -> f64 {
    let m = f64::from(m.max(1));
    Gamma::new(m, 1.0 / m)
        .expect("shape and scale are positive")
        .sample(rng)
}

/// Rayleigh power fading: a unit-mean exponential draw.
pub fn sample_rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn buck_close_to_magnus() {
        let env = Environment::default();
        let t_c = env.temperature() - 273.15;
        let magnus = 610.94 * (17.625 * t_c / (t_c + 243.04)).exp();
        let pw = saturated_vapor_pressure(&env);
        assert!(rel(pw, magnus) < 0.02, "{pw} vs {magnus}");
        assert!(rel(pw, 2_795.300_001_796_678) < 1e-12);
    }

    #[test]
    fn buck_monotone_in_temperature() {
        let mut prev = 0.0;
        for t in 270..=320 {
            let v = saturated_vapor_pressure(&Environment::new(t as f64, 101_325.0, 0.5).unwrap());
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn buck_pressure_enters_only_through_enhancement() {
        let a = saturated_vapor_pressure(&Environment::new(296.0, 101_325.0, 0.6).unwrap());
        let b = saturated_vapor_pressure(&Environment::new(296.0, 50_000.0, 0.6).unwrap());
        let expected = (1.0007 + 3.46e-6 * 1013.25) / (1.0007 + 3.46e-6 * 500.0);
        assert!(rel(a / b, expected) < 1e-14);
    }

    #[test]
    fn mixing_ratio() {
        let dry = Environment::new(296.0, 101_325.0, 0.0).unwrap();
        assert_eq!(water_vapor_mixing_ratio(&dry), 0.0);
        let env = Environment::default();
        assert!(rel(water_vapor_mixing_ratio(&env), 0.016_552_479_655_346_725) < 1e-12);
        let half = Environment::new(296.0, 101_325.0, 0.3).unwrap();
        assert!(rel(water_vapor_mixing_ratio(&env) / water_vapor_mixing_ratio(&half), 2.0) < 1e-15);
    }

    #[test]
    fn humidity_as_percent_is_rejected_with_hint() {
        let err = Environment::new(296.0, 101_325.0, 60.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("fraction in [0,1]"), "{msg}");
        assert!(msg.contains("0.6"), "{msg}");
        assert!(Environment::new(-1.0, 101_325.0, 0.5).is_err());
        assert!(Environment::new(296.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn absorption_reference_value() {
        let src = AbsorptionSource::Simplified(Environment::default());
        let k = absorption_coefficient(350e9, &src).unwrap();
        assert!(rel(k, 0.002_114_512_388_646_284_5) < 1e-12, "{k}");
    }

    #[test]
    fn absorption_fixed_and_band() {
        let fixed = AbsorptionSource::fixed(0.05).unwrap();
        assert_eq!(absorption_coefficient(1e12, &fixed).unwrap(), 0.05);
        assert!(AbsorptionSource::fixed(-0.1).is_err());
        let src = AbsorptionSource::Simplified(Environment::default());
        assert!(matches!(
            absorption_coefficient(500e9, &src),
            Err(Error::OutOfBand { .. })
        ));
        assert!(absorption_coefficient(274.9e9, &src).is_err());
        assert!(absorption_coefficient(275e9, &src).is_ok());
    }

    #[test]
    fn absorption_has_two_peaks() {
        let src = AbsorptionSource::Simplified(Environment::default());
        let grid: Vec<f64> = (0..=250).map(|i| 275e9 + 0.5e9 * i as f64).collect();
        let k: Vec<f64> = grid
            .iter()
            .map(|&f| absorption_coefficient(f, &src).unwrap())
            .collect();
        assert!(k.iter().all(|v| v.is_finite() && *v > 0.0));
        let peaks: Vec<f64> = (1..k.len() - 1)
            .filter(|&i| k[i] > k[i - 1] && k[i] > k[i + 1])
            .map(|i| grid[i])
            .collect();
        assert_eq!(peaks.len(), 2);
        let c = SPEED_OF_LIGHT * 100.0;
        assert!((peaks[0] - c * 10.835).abs() < 3e9);
        assert!((peaks[1] - c * 12.664).abs() < 3e9);
    }

    #[test]
    fn loss_and_pathloss() {
        assert_eq!(absorption_loss(0.3, 0.0), 1.0);
        assert_eq!(absorption_loss(0.0, 123.0), 1.0);
        assert!((absorption_loss(0.01, 100.0) - (-1f64).exp()).abs() < 1e-15);
        let f = 300e9;
        assert_eq!(pathloss(f, 1.0, 3.7).unwrap(), friis_factor(f));
        assert!(rel(pathloss(f, 6.0, 2.5).unwrap() / pathloss(f, 3.0, 2.5).unwrap(), 2f64.powf(-2.5)) < 1e-14);
        assert!(rel(pathloss(2.0 * f, 3.0, 2.0).unwrap() / pathloss(f, 3.0, 2.0).unwrap(), 0.25) < 1e-14);
        assert!(matches!(pathloss(f, 0.0, 2.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn thermal_noise() {
        let t = 296.0;
        assert!(rel(johnson_nyquist_noise_density(1e3, t), BOLTZMANN * t) < 1e-6);
        assert!(rel(johnson_nyquist_noise_density(350e9, t), 3.971_861_463_780_426_7e-21) < 1e-12);
        let mut prev = f64::INFINITY;
        for i in 1..=100 {
            let v = johnson_nyquist_noise_density(1e11 * i as f64, t);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn nakagami_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let m = 4;
        let draws: Vec<f64> = (0..n).map(|_| sample_nakagami_power(&mut rng, m)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - 1.0).abs() < 4.0 / (f64::from(m) * n as f64).sqrt());
        assert!(rel(var, 0.25) < 0.05);
    }

    #[test]
    fn nakagami_one_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| sample_nakagami_power(&mut rng, 1) <= 1.0)
            .count() as f64
            / n as f64;
        let p = 1.0 - (-1f64).exp();
        assert!((hits - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn rayleigh_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_rayleigh_power(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 4e-3);
        let above = draws.iter().filter(|&&h| h > 2f64.ln()).count() as f64 / n as f64;
        assert!((above - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    /// Two-sample Kolmogorov–Smirnov test at α = 0.01.
    #[test]
    fn rayleigh_matches_nakagami_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 100_000;
        let mut a: Vec<f64> = (0..n).map(|_| sample_rayleigh_power(&mut rng)).collect();
        let mut b: Vec<f64> = (0..n).map(|_| sample_nakagami_power(&mut rng, 1)).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 - j as f64).abs() / n as f64);
        }
        let critical = 1.628 * (2.0 / n as f64).sqrt();
        assert!(d < critical, "D = {d}, critical {critical}");
    }

    proptest! {
        #[test]
        fn conservation_identity(
            g in 0.0f64..64.0,
            p in 1e-3f64..1e5,
            k in 0.0f64..0.2,
            x in 0.5f64..100.0,
            fade in 0.0f64..10.0,
        ) {
            let lp = pathloss(350e9, x, 2.0).unwrap();
            let la = absorption_loss(k, x);
            let interference = g * p * la * lp * fade;
            let noise = g * p * (1.0 - la) * lp * fade;
            let total = g * p * lp * fade;
            prop_assert!((interference + noise - total).abs() <= 1e-12 * total.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn received_power_decreases_with_distance(x in 0.5f64..100.0, dx in 1e-3f64..10.0) {
            let k = 0.01;
            let near = pathloss(350e9, x, 2.0).unwrap() * absorption_loss(k, x);
            let far = pathloss(350e9, x + dx, 2.0).unwrap() * absorption_loss(k, x + dx);
            prop_assert!(far < near);
        }
    }
}
