//! Run configuration: a flat `key = value` file with `#` comments.
//!
//! Every key is optional; absent keys keep the default scenario. Powers and
//! frequencies must carry a unit suffix (`73 dBm`, `350 GHz`) so that a bare
//! number is never silently read in the wrong unit.

use std::fmt;

use thzmm_core::analysis::{AssociationModel, HybridParams, TierParams};
use thzmm_core::channel::{AbsorptionSource, Environment};
use thzmm_core::montecarlo::GainModel;
use thzmm_core::specfun::QuadratureSpec;
use thzmm_core::{db_to_linear, dbm_to_watts, Error as CoreError};

/// One problem found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// All diagnostics of a rejected configuration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration")?;
        for d in &self.diagnostics {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Positive,
    Frequency,
    Power,
    Ratio,
    Exponent,
    Length,
    Count,
    Temperature,
    Pressure,
    Fraction,
    Absorption,
    Association,
    Gains,
    Seed,
    Tolerance,
}

/// Every recognized key, in the order `validate` prints them.
const KEYS: &[(&str, Kind)] = &[
    ("density_thz", Kind::Positive),
    ("density_mm", Kind::Positive),
    ("frequency_thz", Kind::Frequency),
    ("frequency_mm", Kind::Frequency),
    ("tx_power_thz", Kind::Power),
    ("tx_power_mm", Kind::Power),
    ("noise_power_mm", Kind::Power),
    ("bias_thz", Kind::Ratio),
    ("bias_mm", Kind::Ratio),
    ("pathloss_exponent_thz", Kind::Exponent),
    ("pathloss_exponent_mm", Kind::Exponent),
    ("los_radius_thz", Kind::Length),
    ("los_radius_mm", Kind::Length),
    ("array_size_thz", Kind::Count),
    ("array_size_mm", Kind::Count),
    ("nakagami_m", Kind::Count),
    ("temperature", Kind::Temperature),
    ("pressure", Kind::Pressure),
    ("relative_humidity", Kind::Fraction),
    ("absorption_coefficient", Kind::Absorption),
    ("association_model", Kind::Association),
    ("interferer_gains", Kind::Gains),
    ("master_seed", Kind::Seed),
    ("n_trials", Kind::Count),
    ("quad_rel_tol", Kind::Tolerance),
    ("quad_abs_tol", Kind::Tolerance),
    ("quad_max_subdivisions", Kind::Count),
    ("quad_tail_cutoff_tol", Kind::Tolerance),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|&(_, kind)| kind)
}

/// Whether `key` names a scenario parameter that a sweep may vary.
pub fn is_sweepable(key: &str) -> bool {
    matches!(
        kind_of(key),
        Some(
            Kind::Positive
                | Kind::Frequency
                | Kind::Power
                | Kind::Ratio
                | Kind::Exponent
                | Kind::Length
                | Kind::Temperature
                | Kind::Pressure
                | Kind::Fraction
                | Kind::Absorption
        )
    ) || matches!(key, "array_size_thz" | "array_size_mm" | "nakagami_m")
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}

/// Splits `value` into a number and one of `units` (longest match first).
fn split_unit<'a>(value: &'a str, units: &[&'a str]) -> (&'a str, Option<&'a str>) {
    let v = value.trim();
    for u in units {
        if let Some(num) = v.strip_suffix(u) {
            return (num, Some(u));
        }
    }
    (v, None)
}

fn parse_power(value: &str) -> Result<f64, String> {
    match split_unit(value, &["dBm", "dBW", "mW", "W"]) {
        (n, Some("dBm")) => Ok(dbm_to_watts(parse_number(n)?)),
        (n, Some("dBW")) => Ok(dbm_to_watts(parse_number(n)? + 30.0)),
        (n, Some("mW")) => Ok(parse_number(n)? * 1e-3),
        (n, Some(_)) => Ok(parse_number(n)?),
        (_, None) => Err(format!("`{value}` needs a unit: dBm, dBW, mW or W")),
    }
}

fn parse_frequency(value: &str) -> Result<f64, String> {
    let scale = |u: &str| match u {
        "THz" => 1e12,
        "GHz" => 1e9,
        "MHz" => 1e6,
        "kHz" => 1e3,
        _ => 1.0,
    };
    match split_unit(value, &["THz", "GHz", "MHz", "kHz", "Hz"]) {
        (n, Some(u)) => Ok(parse_number(n)? * scale(u)),
        (_, None) => Err(format!("`{value}` needs a unit: Hz, kHz, MHz, GHz or THz")),
    }
}

/// A plain number, optionally followed by the one unit it may carry.
fn parse_with_optional_unit(value: &str, unit: &str) -> Result<f64, String> {
    let (n, _) = split_unit(value, &[unit]);
    parse_number(n)
}

fn parse_count(value: &str) -> Result<u64, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a non-negative integer", value.trim()))
}

fn positive(v: f64) -> Result<f64, String> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: HybridParams,
    pub master_seed: u64,
    pub n_trials: usize,
    pub quadrature: QuadratureSpec,
    pub gain_model: GainModel,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: HybridParams::default(),
            master_seed: 1,
            n_trials: 10_000,
            quadrature: QuadratureSpec::default(),
            gain_model: GainModel::Mlft,
        }
    }
}

impl RunConfig {
    /// Parses configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut diagnostics = Vec::new();
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                diagnostics.push(Diagnostic {
                    line: Some(line),
                    key: content.to_string(),
                    message: "expected `key = value`".into(),
                });
                continue;
            };
            let key = key.trim();
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
                diagnostics.push(Diagnostic {
                    line: Some(line),
                    key: key.to_string(),
                    message: format!("duplicate key, first set on line {first}"),
                });
                continue;
            }
            seen.push((key.to_string(), line));
            if let Err(message) = cfg.set(key, value) {
                diagnostics.push(Diagnostic {
                    line: Some(line),
                    key: key.to_string(),
                    message,
                });
            }
        }
        if diagnostics.is_empty() {
            if let Err(d) = cfg.validate() {
                diagnostics.push(d);
            }
        }
        if let Some(d) = diagnostics.iter_mut().find(|d| d.line.is_none()) {
            d.line = seen.iter().find(|(k, _)| *k == d.key).map(|&(_, l)| l);
        }
        if diagnostics.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { diagnostics })
        }
    }

    /// Checks cross-key constraints that single assignments cannot see.
    pub fn validate(&self) -> Result<(), Diagnostic> {
        let diag = |key: &str, message: String| Diagnostic {
            line: None,
            key: key.to_string(),
            message,
        };
        if let Err(e) = self.quadrature.validate() {
            return Err(diag("quadrature", e.to_string()));
        }
        match self.params.validate() {
            Ok(()) => Ok(()),
            Err(e @ CoreError::OutOfBand { .. }) => Err(diag("frequency_thz", e.to_string())),
            Err(CoreError::InvalidParameter { name, detail }) => Err(diag(name, detail)),
            Err(e) => Err(diag("params", e.to_string())),
        }
    }

    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let kind = kind_of(key).ok_or_else(|| format!("unknown key `{key}`"))?;
        let value = value.trim();
        fn tier<'a>(cfg: &'a mut RunConfig, key: &str) -> &'a mut TierParams {
            if key.ends_with("_thz") {
                &mut cfg.params.thz
            } else {
                &mut cfg.params.mmwave
            }
        }
        match kind {
            Kind::Positive => tier(self, key).density = positive(parse_number(value)?)?,
            Kind::Frequency => tier(self, key).frequency = positive(parse_frequency(value)?)?,
            Kind::Power if key == "noise_power_mm" => self.params.mmwave_noise_power = parse_power(value)?,
            Kind::Power => tier(self, key).tx_power = parse_power(value)?,
            Kind::Ratio => {
                tier(self, key).bias = match split_unit(value, &["dB"]) {
                    (n, Some(_)) => db_to_linear(parse_number(n)?),
                    (n, None) => positive(parse_number(n)?)?,
                }
            }
            Kind::Exponent => {
                let a = parse_number(value)?;
                if a < 2.0 {
                    return Err(format!("{a} must be at least 2"));
                }
                tier(self, key).pathloss_exponent = a;
            }
            Kind::Length => tier(self, key).los_radius = positive(parse_with_optional_unit(value, "m")?)?,
            Kind::Count => {
                let n = parse_count(value)?;
                match key {
                    "array_size_thz" | "array_size_mm" => {
                        if n < 2 {
                            return Err(format!("{n} elements; need at least 2"));
                        }
                        tier(self, key).array_size = u32::try_from(n).map_err(|_| format!("{n} is too large"))?;
                    }
                    "nakagami_m" => {
                        if !(1..=64).contains(&n) {
                            return Err(format!("{n}; must be between 1 and 64"));
                        }
                        self.params.nakagami_m = n as u32;
                    }
                    "n_trials" => {
                        if n == 0 {
                            return Err("must be at least 1".into());
                        }
                        self.n_trials = n as usize;
                    }
                    _ => {
                        if n == 0 {
                            return Err("must be at least 1".into());
                        }
                        self.quadrature.max_subdivisions = n as usize;
                    }
                }
            }
            Kind::Temperature | Kind::Pressure | Kind::Fraction => {
                let env = self.params.environment;
                let (mut t, mut p, mut rh) = (env.temperature(), env.pressure(), env.relative_humidity());
                match kind {
                    Kind::Temperature => t = parse_with_optional_unit(value, "K")?,
                    Kind::Pressure => p = parse_with_optional_unit(value, "Pa")?,
                    _ => rh = parse_number(value)?,
                }
                let env = Environment::new(t, p, rh).map_err(|e| match e {
                    CoreError::InvalidParameter { detail, .. } => detail,
                    other => other.to_string(),
                })?;
                self.params.environment = env;
                if let AbsorptionSource::Simplified(_) = self.params.absorption {
                    self.params.absorption = AbsorptionSource::Simplified(env);
                }
            }
            Kind::Absorption => {
                self.params.absorption = if value == "simplified" {
                    AbsorptionSource::Simplified(self.params.environment)
                } else {
                    let k = parse_with_optional_unit(value, "/m")?;
                    AbsorptionSource::fixed(k).map_err(|e| e.to_string())?
                };
            }
            Kind::Association => {
                self.params.association = match value {
                    "los_ball" => AssociationModel::LosBall,
                    "unbounded_mmwave" => AssociationModel::UnboundedMmWave,
                    _ => return Err(format!("`{value}`; expected los_ball or unbounded_mmwave")),
                }
            }
            Kind::Gains => {
                self.gain_model = match value {
                    "mlft" => GainModel::Mlft,
                    "actual_pattern" => GainModel::ActualPattern,
                    _ => return Err(format!("`{value}`; expected mlft or actual_pattern")),
                }
            }
            Kind::Seed => self.master_seed = parse_count(value)?,
            Kind::Tolerance => {
                let v = parse_number(value)?;
                if v < 0.0 {
                    return Err(format!("{v} must be non-negative"));
                }
                match key {
                    "quad_rel_tol" => self.quadrature.rel_tol = v,
                    "quad_abs_tol" => self.quadrature.abs_tol = v,
                    _ => self.quadrature.tail_cutoff_tol = v,
                }
            }
        }
        Ok(())
    }

    /// Every key with its value in config syntax and, where a unit conversion
    /// applies, the internal value it resolves to.
    pub fn resolved(&self) -> Vec<(&'static str, String, Option<String>)> {
        let p = &self.params;
        let env = &p.environment;
        let dbm = |w: f64| {
            if w > 0.0 {
                format!("{} dBm", short(10.0 * w.log10() + 30.0))
            } else {
                "0 W".to_string()
            }
        };
        let watts = |w: f64| Some(format!("{} W", short(w)));
        let ghz = |f: f64| format!("{} GHz", short(f / 1e9));
        let hz = |f: f64| Some(format!("{} Hz", short(f)));
        let db = |x: f64| Some(format!("{} dB", short(10.0 * x.log10())));
        KEYS.iter()
            .map(|&(key, _)| {
                let (value, internal) = match key {
                    "density_thz" => (short(p.thz.density), None),
                    "density_mm" => (short(p.mmwave.density), None),
                    "frequency_thz" => (ghz(p.thz.frequency), hz(p.thz.frequency)),
                    "frequency_mm" => (ghz(p.mmwave.frequency), hz(p.mmwave.frequency)),
                    "tx_power_thz" => (dbm(p.thz.tx_power), watts(p.thz.tx_power)),
                    "tx_power_mm" => (dbm(p.mmwave.tx_power), watts(p.mmwave.tx_power)),
                    "noise_power_mm" => (dbm(p.mmwave_noise_power), watts(p.mmwave_noise_power)),
                    "bias_thz" => (short(p.thz.bias), db(p.thz.bias)),
                    "bias_mm" => (short(p.mmwave.bias), db(p.mmwave.bias)),
                    "pathloss_exponent_thz" => (short(p.thz.pathloss_exponent), None),
                    "pathloss_exponent_mm" => (short(p.mmwave.pathloss_exponent), None),
                    "los_radius_thz" => (format!("{} m", short(p.thz.los_radius)), None),
                    "los_radius_mm" => (format!("{} m", short(p.mmwave.los_radius)), None),
                    "array_size_thz" => (p.thz.array_size.to_string(), None),
                    "array_size_mm" => (p.mmwave.array_size.to_string(), None),
                    "nakagami_m" => (p.nakagami_m.to_string(), None),
                    "temperature" => (format!("{} K", short(env.temperature())), None),
                    "pressure" => (format!("{} Pa", short(env.pressure())), None),
                    "relative_humidity" => (short(env.relative_humidity()), None),
                    "absorption_coefficient" => match p.absorption {
                        AbsorptionSource::Fixed(k) => (format!("{} /m", short(k)), None),
                        AbsorptionSource::Simplified(_) => (
                            "simplified".to_string(),
                            p.absorption_coefficient()
                                .ok()
                                .map(|k| format!("{} /m at {}", short(k), ghz(p.thz.frequency))),
                        ),
                    },
                    "association_model" => (
                        match p.association {
                            AssociationModel::LosBall => "los_ball",
                            AssociationModel::UnboundedMmWave => "unbounded_mmwave",
                        }
                        .to_string(),
                        None,
                    ),
                    "interferer_gains" => (
                        match self.gain_model {
                            GainModel::Mlft => "mlft",
                            GainModel::ActualPattern => "actual_pattern",
                        }
                        .to_string(),
                        None,
                    ),
                    "master_seed" => (self.master_seed.to_string(), None),
                    "n_trials" => (self.n_trials.to_string(), None),
                    "quad_rel_tol" => (short(self.quadrature.rel_tol), None),
                    "quad_abs_tol" => (short(self.quadrature.abs_tol), None),
                    "quad_max_subdivisions" => (self.quadrature.max_subdivisions.to_string(), None),
                    _ => (short(self.quadrature.tail_cutoff_tol), None),
                };
                (key, value, internal)
            })
            .collect()
    }

    /// The resolved configuration as config-file text, with internal values
    /// as trailing comments. Feeding it back through [`RunConfig::parse`]
    /// reproduces this configuration.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value, internal) in self.resolved() {
            match internal {
                Some(i) => out.push_str(&format!("{key} = {value}  # {i}\n")),
                None => out.push_str(&format!("{key} = {value}\n")),
            }
        }
        out
    }
}

/// Shortest decimal rendering of `v` rounded to 10 significant digits.
pub fn short(v: f64) -> String {
    let rounded: f64 = format!("{v:.9e}").parse().unwrap_or(v);
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = RunConfig::parse("# nothing here\n\n").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.n_trials, 10_000);
    }

    #[test]
    fn units_are_converted() {
        let cfg = RunConfig::parse(
            "tx_power_thz = 70 dBm\nnoise_power_mm = 2 mW # inline comment\nfrequency_thz = 0.3 THz\n\
             frequency_mm = 28GHz\nbias_thz = 10 dB\nlos_radius_mm = 25 m\n",
        )
        .unwrap();
        let p = cfg.params;
        assert!((p.thz.tx_power - 1e4).abs() < 1e-8);
        assert!((p.mmwave_noise_power - 2e-3).abs() < 1e-18);
        assert_eq!(p.thz.frequency, 3e11);
        assert_eq!(p.mmwave.frequency, 28e9);
        assert!((p.thz.bias - 10.0).abs() < 1e-12);
        assert_eq!(p.mmwave.los_radius, 25.0);
    }

    #[test]
    fn powers_and_frequencies_need_units() {
        let e = RunConfig::parse("tx_power_thz = 73\nfrequency_mm = 3e10\n").unwrap_err();
        assert_eq!(e.diagnostics.len(), 2);
        assert!(e.diagnostics[0].message.contains("needs a unit"));
        assert_eq!(e.diagnostics[1].line, Some(2));
    }

    #[test]
    fn humidity_percentage_gets_hint() {
        let e = RunConfig::parse("relative_humidity = 60").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("expected fraction in [0,1]"), "{msg}");
        assert!(msg.contains("relative_humidity"));
    }

    #[test]
    fn out_of_band_frequency_names_band() {
        let e = RunConfig::parse("frequency_thz = 500 GHz").unwrap_err();
        let d = &e.diagnostics[0];
        assert_eq!(d.key, "frequency_thz");
        assert_eq!(d.line, Some(1));
        assert!(d.message.contains("275-400 GHz"), "{}", d.message);
        // A fixed coefficient lifts the band restriction.
        RunConfig::parse("frequency_thz = 500 GHz\nabsorption_coefficient = 0.01").unwrap();
    }

    #[test]
    fn malformed_lines_are_all_reported() {
        let e = RunConfig::parse("bogus = 1\njust text\ndensity_thz = -1\ndensity_thz = 2\n").unwrap_err();
        let keys: Vec<_> = e.diagnostics.iter().map(|d| d.key.as_str()).collect();
        assert_eq!(keys, ["bogus", "just text", "density_thz", "density_thz"]);
    }

    #[test]
    fn render_round_trips() {
        let cfg = RunConfig::parse(
            "array_size_thz = 32\nbias_mm = 3\nabsorption_coefficient = 0.004\nmaster_seed = 42\n\
             association_model = unbounded_mmwave\ninterferer_gains = actual_pattern\n",
        )
        .unwrap();
        let text = cfg.render();
        assert!(text.contains("tx_power_thz = 73 dBm"), "{text}");
        let again = RunConfig::parse(&text).unwrap();
        assert_eq!(again.render(), text);
        assert_eq!(again.params.thz.array_size, 32);
        assert_eq!(again.master_seed, 42);
    }

    #[test]
    fn short_rounds_to_ten_digits() {
        assert_eq!(short(72.99999999999999), "73");
        assert_eq!(short(0.05), "0.05");
        assert_eq!(short(3.5e11), "350000000000");
    }
}
