//! Sweep axis: `KEY=VALUES[ UNIT]` where VALUES is a comma list or a range
//! `start:stop:steps[:lin|log|db]`.
//!
//! The optional unit suffix applies to every value, so power and frequency
//! sweeps read like the config file: `tx_power_thz=60:80:5 dBm`.
//! With the `db` scale, start and stop are in dB and the points, spaced
//! uniformly in dB, are applied as linear ratios.

use crate::config::{is_sweepable, RunConfig};

/// Sweep key that varies the SINR threshold instead of a scenario parameter.
pub const TAU_KEY: &str = "tau_db";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<f64>,
    pub unit: Option<String>,
}

impl SweepSpec {
    pub fn parse(arg: &str) -> Result<Self, String> {
        let (key, rest) = arg
            .split_once('=')
            .ok_or_else(|| format!("`{arg}`: expected KEY=VALUES"))?;
        let key = key.trim();
        if key != TAU_KEY && !is_sweepable(key) {
            return Err(format!("`{key}` cannot be swept"));
        }
        let rest = rest.trim();
        let (values, unit) = match rest.split_once(char::is_whitespace) {
            Some((v, u)) => (v, Some(u.trim().to_string())),
            None => (rest, None),
        };
        if key == TAU_KEY && unit.as_deref().is_some_and(|u| u != "dB") {
            return Err(format!("{TAU_KEY} values are in dB, got unit `{}`", unit.unwrap_or_default()));
        }
        Ok(Self {
            key: key.to_string(),
            values: parse_values(values)?,
            unit: unit.filter(|u| u != "dB" || key != TAU_KEY),
        })
    }

    pub fn is_tau(&self) -> bool {
        self.key == TAU_KEY
    }

    /// The configuration at one sweep value.
    pub fn apply(&self, base: &RunConfig, value: f64) -> Result<RunConfig, String> {
        let mut cfg = base.clone();
        let text = match &self.unit {
            Some(u) => format!("{value} {u}"),
            None => format!("{value}"),
        };
        cfg.set(&self.key, &text)
            .map_err(|e| format!("{} = {text}: {e}", self.key))?;
        cfg.validate()
            .map_err(|d| format!("{} = {text}: {}: {}", self.key, d.key, d.message))?;
        Ok(cfg)
    }
}

/// Parses a comma list or a `start:stop:steps[:scale]` range.
pub fn parse_values(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{}` is not finite", s.trim()))
        }
    };
    if spec.is_empty() {
        return Err("empty value list".into());
    }
    if !spec.contains(':') {
        return spec.split(',').map(num).collect();
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(format!("`{spec}`: expected start:stop:steps[:lin|log|db]"));
    }
    let start = num(parts[0])?;
    let stop = num(parts[1])?;
    let steps: usize = parts[2]
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("`{}`: steps must be a positive integer", parts[2]))?;
    let scale = parts.get(3).map_or("lin", |s| s.trim());
    let point = |i: usize, a: f64, b: f64| {
        if steps == 1 {
            a
        } else if i == steps - 1 {
            b
        } else {
            a + (b - a) * i as f64 / (steps - 1) as f64
        }
    };
    match scale {
        "lin" => Ok((0..steps).map(|i| point(i, start, stop)).collect()),
        "log" => {
            if !(start > 0.0 && stop > 0.0) {
                return Err("log scale needs positive start and stop".into());
            }
            let (a, b) = (start.log10(), stop.log10());
            Ok((0..steps)
                .map(|i| match i {
                    0 => start,
                    _ if i == steps - 1 => stop,
                    _ => 10f64.powf(point(i, a, b)),
                })
                .collect())
        }
        "db" => Ok((0..steps)
            .map(|i| 10f64.powf(point(i, start, stop) / 10.0))
            .collect()),
        other => Err(format!("unknown scale `{other}`; expected lin, log or db")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_values("1, 2.5,4").unwrap(), [1.0, 2.5, 4.0]);
        assert_eq!(parse_values("-10:40:6").unwrap(), [-10.0, 0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(parse_values("7:9:1").unwrap(), [7.0]);
        let l = parse_values("1e-3:1e-1:3:log").unwrap();
        assert_eq!(l[0], 1e-3);
        assert!((l[1] - 1e-2).abs() < 1e-15);
        assert_eq!(l[2], 0.1);
        let d = parse_values("0:20:3:db").unwrap();
        assert!((d[1] - 10.0).abs() < 1e-12 && (d[2] - 100.0).abs() < 1e-10);
        let f = parse_values("275:400:251").unwrap();
        assert_eq!(f.len(), 251);
        assert_eq!(f[250], 400.0);
        assert!((f[99] - 324.5).abs() < 1e-12);
    }

    #[test]
    fn bad_values() {
        for s in ["", "1,,2", "1:2", "1:2:0", "1:2:x", "0:1:3:log", "1:2:3:cubic", "nan"] {
            assert!(parse_values(s).is_err(), "{s}");
        }
    }

    #[test]
    fn sweep_spec_with_unit() {
        let s = SweepSpec::parse("frequency_thz=275:400:251 GHz").unwrap();
        assert_eq!(s.unit.as_deref(), Some("GHz"));
        let cfg = s.apply(&RunConfig::default(), 300.0).unwrap();
        assert_eq!(cfg.params.thz.frequency, 3e11);
        let err = s.apply(&RunConfig::default(), 500.0).unwrap_err();
        assert!(err.contains("275-400 GHz"), "{err}");
    }

    #[test]
    fn sweep_spec_rejections() {
        assert!(SweepSpec::parse("master_seed=1,2").is_err());
        assert!(SweepSpec::parse("no_such_key=1").is_err());
        assert!(SweepSpec::parse("density_thz").is_err());
        assert!(SweepSpec::parse("tau_db=1,2 W").is_err());
        let s = SweepSpec::parse("tx_power_thz=70,73").unwrap();
        assert!(s.apply(&RunConfig::default(), 70.0).is_err());
        let s = SweepSpec::parse("array_size_thz=8,16.5").unwrap();
        assert!(s.apply(&RunConfig::default(), 16.5).is_err());
        assert!(SweepSpec::parse("tau_db=-10:40:6").unwrap().is_tau());
    }
}
