//! Sweep execution and CSV output.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thzmm_core::analysis::Analysis;
use thzmm_core::db_to_linear;
use thzmm_core::montecarlo::{
    association_estimate, coverage_estimate, se_estimate, Estimate, Mode, Simulator,
};

use crate::config::{short, RunConfig};
use crate::sweep::SweepSpec;
use crate::CliError;

pub const CSV_HEADER: &str =
    "sweep_key,sweep_value,tau_db,analytic_value,mc_mean,mc_stderr,n_trials,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    CoverageThz,
    CoverageMm,
    CoverageHybrid,
    SeHybrid,
    Association,
    AbsorptionCoefficient,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::CoverageThz,
        Metric::CoverageMm,
        Metric::CoverageHybrid,
        Metric::SeHybrid,
        Metric::Association,
        Metric::AbsorptionCoefficient,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::CoverageThz => "coverage_thz",
            Metric::CoverageMm => "coverage_mm",
            Metric::CoverageHybrid => "coverage_hybrid",
            Metric::SeHybrid => "se_hybrid",
            Metric::Association => "association",
            Metric::AbsorptionCoefficient => "absorption_coefficient",
        }
    }

    pub fn uses_tau(self) -> bool {
        matches!(
            self,
            Metric::CoverageThz | Metric::CoverageMm | Metric::CoverageHybrid
        )
    }

    pub fn has_monte_carlo(self) -> bool {
        self != Metric::AbsorptionCoefficient
    }

    fn mode(self) -> Mode {
        match self {
            Metric::CoverageThz => Mode::ThzOnly,
            Metric::CoverageMm => Mode::MmWaveOnly,
            _ => Mode::Hybrid,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Metric::ALL.iter().map(|m| m.name()).collect();
                format!("unknown metric `{s}`; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engines {
    Analytic,
    MonteCarlo,
    Both,
}

impl Engines {
    pub fn name(self) -> &'static str {
        match self {
            Engines::Analytic => "analytic",
            Engines::MonteCarlo => "mc",
            Engines::Both => "both",
        }
    }

    fn analytic(self) -> bool {
        self != Engines::MonteCarlo
    }

    fn monte_carlo(self) -> bool {
        self != Engines::Analytic
    }
}

impl FromStr for Engines {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "analytic" => Ok(Engines::Analytic),
            "mc" | "montecarlo" => Ok(Engines::MonteCarlo),
            "both" => Ok(Engines::Both),
            _ => Err(format!("unknown engines `{s}`; expected analytic, mc or both")),
        }
    }
}

/// A fully specified run.
#[derive(Debug, Clone)]
pub struct RunRequest {
    pub config: RunConfig,
    pub sweep: Option<SweepSpec>,
    pub metric: Metric,
    /// SINR thresholds in dB, for coverage metrics.
    pub tau_db: Vec<f64>,
    pub engines: Engines,
}

impl RunRequest {
    /// Checks metric, engine and threshold compatibility.
    pub fn check(&self) -> Result<(), CliError> {
        let tau_swept = self.sweep.as_ref().is_some_and(SweepSpec::is_tau);
        if self.engines.monte_carlo() && !self.metric.has_monte_carlo() {
            return Err(CliError::Sweep(format!(
                "{} is analytic-only; use --engines analytic",
                self.metric
            )));
        }
        if tau_swept && !self.metric.uses_tau() {
            return Err(CliError::Sweep(format!("{} does not take a threshold", self.metric)));
        }
        if tau_swept && !self.tau_db.is_empty() {
            return Err(CliError::Sweep("tau_db is swept; drop --tau-db".into()));
        }
        if self.metric.uses_tau() && !tau_swept && self.tau_db.is_empty() {
            return Err(CliError::Sweep(format!("{} needs --tau-db", self.metric)));
        }
        if !self.metric.uses_tau() && !self.tau_db.is_empty() {
            return Err(CliError::Sweep(format!("{} does not take --tau-db", self.metric)));
        }
        if self.engines.monte_carlo() && self.metric != Metric::Association && self.config.n_trials < 100 {
            return Err(CliError::Sweep(format!(
                "{} trials; Monte Carlo estimates need at least 100",
                self.config.n_trials
            )));
        }
        Ok(())
    }

    /// The sweep points as (key, value, configuration).
    fn points(&self) -> Result<Vec<(String, Option<f64>, RunConfig)>, CliError> {
        match &self.sweep {
            None => Ok(vec![(String::new(), None, self.config.clone())]),
            Some(s) if s.is_tau() => Ok(vec![(String::new(), None, self.config.clone())]),
            Some(s) => s
                .values
                .iter()
                .map(|&v| {
                    let cfg = s.apply(&self.config, v).map_err(CliError::Sweep)?;
                    Ok((s.key.clone(), Some(v), cfg))
                })
                .collect(),
        }
    }

    fn thresholds(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) if s.is_tau() => s.values.iter().copied().map(Some).collect(),
            _ if self.metric.uses_tau() => self.tau_db.iter().copied().map(Some).collect(),
            _ => vec![None],
        }
    }

    /// A record of the request, written next to the CSV. It is itself a valid
    /// config file for the resolved parameters.
    pub fn metadata(&self) -> String {
        let mut out = String::from("# thzmm run metadata\n");
        out.push_str(&format!("# version = {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# metric = {}\n", self.metric));
        out.push_str(&format!("# engines = {}\n", self.engines.name()));
        if let Some(s) = &self.sweep {
            let vals: Vec<String> = s.values.iter().map(|&v| short(v)).collect();
            let unit = s.unit.as_deref().map(|u| format!(" {u}")).unwrap_or_default();
            out.push_str(&format!("# sweep = {}={}{unit}\n", s.key, vals.join(",")));
        }
        if !self.tau_db.is_empty() {
            let vals: Vec<String> = self.tau_db.iter().map(|&v| short(v)).collect();
            out.push_str(&format!("# tau_db = {}\n", vals.join(",")));
        }
        out.push_str(&self.config.render());
        out
    }
}

/// One CSV row. Absent values are written as empty fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_key: String,
    pub sweep_value: Option<f64>,
    pub tau_db: Option<f64>,
    pub analytic: Option<f64>,
    pub mc: Option<Estimate>,
    pub seed: Option<u64>,
}

fn sci(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9e}")).unwrap_or_default()
}

impl Row {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.sweep_key,
            sci(self.sweep_value),
            sci(self.tau_db),
            sci(self.analytic),
            sci(self.mc.map(|e| e.mean)),
            sci(self.mc.map(|e| e.stderr)),
            self.mc.map(|e| e.n_trials.to_string()).unwrap_or_default(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        )
    }
}

fn analytic_value(metric: Metric, a: &Analysis, tau: Option<f64>) -> thzmm_core::Result<f64> {
    let tau = tau.map(db_to_linear).unwrap_or(f64::NAN);
    match metric {
        Metric::CoverageThz => a.coverage_thz_standalone(tau),
        Metric::CoverageMm => a.coverage_mmwave_standalone(tau),
        Metric::CoverageHybrid => a.coverage_hybrid(tau),
        Metric::SeHybrid => a.se_hybrid(),
        Metric::Association => Ok(a.association_prob_thz()),
        Metric::AbsorptionCoefficient => Ok(a.absorption_coefficient()),
    }
}

fn evaluate_point(
    req: &RunRequest,
    key: &str,
    value: Option<f64>,
    cfg: &RunConfig,
) -> Result<Vec<Row>, CliError> {
    let taus = req.thresholds();
    let metric = req.metric;
    let analytic: Vec<Option<f64>> = if !req.engines.analytic() {
        vec![None; taus.len()]
    } else if metric == Metric::AbsorptionCoefficient {
        let k = cfg.params.absorption_coefficient().map_err(CliError::Numerical)?;
        vec![Some(k); taus.len()]
    } else {
        let a = Analysis::with_quadrature(&cfg.params, cfg.quadrature).map_err(CliError::from_core)?;
        taus.par_iter()
            .map(|&t| analytic_value(metric, &a, t).map(Some).map_err(CliError::from_core))
            .collect::<Result<_, _>>()?
    };
    let mc: Vec<Option<Estimate>> = if req.engines.monte_carlo() {
        let sim = Simulator::new(&cfg.params, cfg.master_seed)
            .map_err(CliError::from_core)?
            .with_gain_model(cfg.gain_model);
        let outcomes = sim.run(cfg.n_trials, metric.mode());
        taus.iter()
            .map(|t| {
                Some(match metric {
                    Metric::SeHybrid => se_estimate(&outcomes).conditioned,
                    Metric::Association => association_estimate(&outcomes),
                    _ => coverage_estimate(&outcomes, db_to_linear(t.unwrap_or(f64::NAN))).conditioned,
                })
            })
            .collect()
    } else {
        vec![None; taus.len()]
    };
    let tau_key = req.sweep.as_ref().filter(|s| s.is_tau()).map(|s| s.key.clone());
    Ok(taus
        .iter()
        .zip(analytic)
        .zip(mc)
        .map(|((&tau, analytic), mc)| Row {
            sweep_key: tau_key.clone().unwrap_or_else(|| key.to_string()),
            sweep_value: if tau_key.is_some() { tau } else { value },
            tau_db: tau,
            analytic,
            mc,
            seed: mc.map(|_| cfg.master_seed),
        })
        .collect())
}

/// Evaluates every sweep point. Points run in parallel; rows come back in
/// sweep order.
pub fn execute(req: &RunRequest) -> Result<Vec<Row>, CliError> {
    req.check()?;
    let points = req.points()?;
    let per_point: Vec<Vec<Row>> = points
        .par_iter()
        .map(|(key, value, cfg)| evaluate_point(req, key, *value, cfg))
        .collect::<Result<_, _>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(rows: &[Row], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv())?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(metric: Metric, engines: Engines) -> RunRequest {
        RunRequest {
            config: RunConfig::default(),
            sweep: None,
            metric,
            tau_db: Vec::new(),
            engines,
        }
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("coverage".parse::<Metric>().is_err());
    }

    #[test]
    fn incompatible_requests() {
        assert!(request(Metric::AbsorptionCoefficient, Engines::Both).check().is_err());
        assert!(request(Metric::AbsorptionCoefficient, Engines::Analytic).check().is_ok());
        assert!(request(Metric::CoverageThz, Engines::Analytic).check().is_err());
        let mut r = request(Metric::SeHybrid, Engines::Analytic);
        r.tau_db = vec![10.0];
        assert!(r.check().is_err());
        let mut r = request(Metric::CoverageThz, Engines::Analytic);
        r.sweep = Some(SweepSpec::parse("tau_db=0,10").unwrap());
        assert!(r.check().is_ok());
        r.tau_db = vec![3.0];
        assert!(r.check().is_err());
    }

    #[test]
    fn rows_have_fixed_columns() {
        let row = Row {
            sweep_key: "bias_thz".into(),
            sweep_value: Some(10.0),
            tau_db: None,
            analytic: Some(0.5),
            mc: None,
            seed: None,
        };
        let csv = row.to_csv();
        assert_eq!(csv, "bias_thz,1.000000000e1,,5.000000000e-1,,,,");
        assert_eq!(csv.split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn absorption_sweep_rows() {
        let mut r = request(Metric::AbsorptionCoefficient, Engines::Analytic);
        r.sweep = Some(SweepSpec::parse("frequency_thz=300,325,350 GHz").unwrap());
        let rows = execute(&r).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[1].analytic > rows[0].analytic && rows[1].analytic > rows[2].analytic);
        assert_eq!(rows[2].sweep_value, Some(350.0));
    }

    #[test]
    fn tau_sweep_rows_follow_thresholds() {
        let mut r = request(Metric::CoverageMm, Engines::Both);
        r.config.n_trials = 200;
        r.sweep = Some(SweepSpec::parse("tau_db=-10,0,10").unwrap());
        let rows = execute(&r).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|row| row.sweep_key == "tau_db" && row.sweep_value == row.tau_db));
        assert!(rows.iter().all(|row| row.mc.unwrap().n_trials == 200 && row.seed == Some(1)));
    }

    #[test]
    fn metadata_is_a_config() {
        let mut r = request(Metric::Association, Engines::Both);
        r.sweep = Some(SweepSpec::parse("density_thz=0.001,0.01").unwrap());
        let meta = r.metadata();
        assert!(meta.contains("# sweep = density_thz=0.001,0.01"));
        assert_eq!(RunConfig::parse(&meta).unwrap(), r.config);
    }
}
