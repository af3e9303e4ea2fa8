//! The acceptance suite: eight criteria checking the analytic engine against
//! the simulator, closed forms against quadrature, structural invariants and
//! run reproducibility. Shared by `thzmm selftest` and the `acceptance` test.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thzmm_core::analysis::{Analysis, HybridParams};
use thzmm_core::channel::{absorption_coefficient, AbsorptionSource, Environment};
use thzmm_core::montecarlo::{association_estimate, coverage_estimate, se_estimate, Mode, Simulator};
use thzmm_core::specfun::{lambert_w0, try_integrate, QuadratureSpec};
use thzmm_core::{db_to_linear, Result as CoreResult};

use crate::config::RunConfig;
use crate::runner::{execute, write_csv, Engines, Metric, RunRequest};
use crate::sweep::SweepSpec;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Monte Carlo trials per configuration.
    pub trials: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub number: u8,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    /// Offending points, one per line.
    pub details: Vec<String>,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {} {verdict}: {}: {}", self.number, self.title, self.summary)?;
        for d in &self.details {
            write!(f, "\n    {d}")?;
        }
        Ok(())
    }
}

const TAU_GRID_DB: [f64; 6] = [-10.0, 0.0, 10.0, 20.0, 30.0, 40.0];

fn report(number: u8, title: &'static str, result: CoreResult<(bool, String, Vec<String>)>) -> Report {
    match result {
        Ok((passed, summary, details)) => Report {
            number,
            title,
            passed,
            summary,
            details,
        },
        Err(e) => Report {
            number,
            title,
            passed: false,
            summary: format!("evaluation error: {e}"),
            details: Vec::new(),
        },
    }
}

/// THz-only coverage against simulation for several array sizes.
pub fn criterion_1(opts: &Options) -> Report {
    let run = || -> CoreResult<(bool, String, Vec<String>)> {
        let taus: Vec<f64> = TAU_GRID_DB.iter().map(|&d| db_to_linear(d)).collect();
        let mut max_gap: f64 = 0.0;
        let mut details = Vec::new();
        let mut direction_misses = 0;
        let mut gap_misses = 0;
        for n in [8, 16, 32, 64] {
            let mut p = HybridParams::default();
            p.thz.array_size = n;
            let a = Analysis::new(&p)?;
            let mc = Simulator::new(&p, opts.seed)?.estimate_coverage(&taus, opts.trials, Mode::ThzOnly)?;
            for ((db, &tau), est) in TAU_GRID_DB.iter().zip(&taus).zip(&mc) {
                let an = a.coverage_thz_standalone(tau)?;
                let e = est.conditioned;
                let gap = (an - e.mean).abs();
                max_gap = max_gap.max(gap);
                let gap_ok = gap <= 0.03;
                let dir_ok = e.mean >= an - 3.0 * e.stderr;
                if !gap_ok {
                    gap_misses += 1;
                }
                if !dir_ok {
                    direction_misses += 1;
                }
                if !(gap_ok && dir_ok) {
                    details.push(format!(
                        "N_T={n} tau={db} dB: analytic {an:.5}, mc {:.5} +/- {:.5} ({:+.2} stderr)",
                        e.mean,
                        e.stderr,
                        (e.mean - an) / e.stderr
                    ));
                }
            }
        }
        Ok((
            gap_misses == 0 && direction_misses == 0,
            format!(
                "max |analytic - mc| = {max_gap:.4} (limit 0.03, {gap_misses} misses); \
                 mc >= analytic - 3 stderr violated at {direction_misses} of 24 points"
            ),
            details,
        ))
    };
    report(1, "THz-only coverage vs Monte Carlo", run())
}

/// mmWave-only coverage against simulation, existence-conditioned.
pub fn criterion_2(opts: &Options) -> Report {
    let run = || -> CoreResult<(bool, String, Vec<String>)> {
        let p = HybridParams::default();
        let a = Analysis::new(&p)?;
        let taus: Vec<f64> = TAU_GRID_DB.iter().map(|&d| db_to_linear(d)).collect();
        let mc = Simulator::new(&p, opts.seed)?.estimate_coverage(&taus, opts.trials, Mode::MmWaveOnly)?;
        let mut worst: f64 = 0.0;
        let mut details = Vec::new();
        for ((db, &tau), est) in TAU_GRID_DB.iter().zip(&taus).zip(&mc) {
            let an = a.coverage_mmwave_standalone(tau)?;
            let e = est.conditioned;
            let z = if e.stderr > 0.0 { (an - e.mean).abs() / e.stderr } else if an == e.mean { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
            if z > 3.0 {
                details.push(format!("tau={db} dB: analytic {an:.5}, mc {:.5} +/- {:.5}", e.mean, e.stderr));
            }
        }
        Ok((
            details.is_empty(),
            format!("largest deviation {worst:.2} stderr (limit 3)"),
            details,
        ))
    };
    report(2, "mmWave-only coverage vs Monte Carlo", run())
}

/// Association probability against simulation, and its monotonicity.
pub fn criterion_3(opts: &Options) -> Report {
    let run = || -> CoreResult<(bool, String, Vec<String>)> {
        let densities = [1e-3, 5e-3, 0.01, 0.05];
        let biases = [1.0, 10.0];
        let mut grid = vec![[0.0; 2]; densities.len()];
        let mut max_gap: f64 = 0.0;
        let mut details = Vec::new();
        for (i, &lt) in densities.iter().enumerate() {
            for (j, &b) in biases.iter().enumerate() {
                let mut p = HybridParams::default();
                p.thz.density = lt;
                p.thz.bias = b;
                let an = Analysis::new(&p)?.association_prob_thz();
                let mc = Simulator::new(&p, opts.seed)?.estimate_association(opts.trials)?;
                grid[i][j] = an;
                let gap = (an - mc.mean).abs();
                max_gap = max_gap.max(gap);
                if gap > 0.02 {
                    details.push(format!("lambda_T={lt} B_T={b}: analytic {an:.4}, mc {:.4}", mc.mean));
                }
            }
        }
        let mut monotone = true;
        for j in 0..biases.len() {
            if grid.windows(2).any(|w| w[1][j] <= w[0][j]) {
                monotone = false;
                details.push(format!("not increasing in lambda_T at B_T={}", biases[j]));
            }
        }
        for (i, row) in grid.iter().enumerate() {
            if row[1] <= row[0] {
                monotone = false;
                details.push(format!("not increasing in B_T at lambda_T={}", densities[i]));
            }
        }
        Ok((
            details.is_empty(),
            format!(
                "max |analytic - mc| = {max_gap:.4} (limit 0.02); monotone in lambda_T and B_T: {}",
                if monotone { "yes" } else { "no" }
            ),
            details,
        ))
    };
    report(3, "association probability vs Monte Carlo", run())
}

/// Hybrid coverage and spectral efficiency against simulation.
pub fn criterion_4(opts: &Options) -> Report {
    let run = || -> CoreResult<(bool, String, Vec<String>)> {
        let tau = db_to_linear(20.0);
        let mut details = Vec::new();
        let mut max_gap: f64 = 0.0;
        for lt in [1e-3, 0.01, 0.05] {
            for b in [0.1, 1.0, 10.0] {
                let mut p = HybridParams::default();
                p.thz.density = lt;
                p.thz.bias = b;
                let an = Analysis::new(&p)?.coverage_hybrid(tau)?;
                let outcomes = Simulator::new(&p, opts.seed)?.run(opts.trials, Mode::Hybrid);
                let e = coverage_estimate(&outcomes, tau).conditioned;
                let gap = (an - e.mean).abs();
                max_gap = max_gap.max(gap);
                if gap > 0.03 + 3.0 * e.stderr {
                    details.push(format!(
                        "coverage lambda_T={lt} B_T={b}: analytic {an:.4}, mc {:.4} +/- {:.4}",
                        e.mean, e.stderr
                    ));
                }
            }
        }
        let mut se = Vec::new();
        let mut worst_z: f64 = 0.0;
        for n in [32, 64, 128] {
            let mut p = HybridParams::default();
            p.thz.array_size = n;
            let an = Analysis::new(&p)?.se_hybrid()?;
            let outcomes = Simulator::new(&p, opts.seed)?.run(opts.trials, Mode::Hybrid);
            let e = se_estimate(&outcomes).conditioned;
            let z = (an - e.mean).abs() / e.stderr;
            worst_z = worst_z.max(z);
            if z > 3.0 {
                details.push(format!("SE N_T={n}: analytic {an:.4}, mc {:.4} +/- {:.4}", e.mean, e.stderr));
            }
            se.push(an);
        }
        let monotone = se.windows(2).all(|w| w[1] > w[0]);
        if !monotone {
            details.push(format!("SE not increasing in N_T: {se:?}"));
        }
        Ok((
            details.is_empty(),
            format!(
                "coverage max gap {max_gap:.4} (limit 0.03 + 3 stderr); SE worst {worst_z:.2} stderr (limit 3); \
                 SE(N_T=32,64,128) = {:.3}, {:.3}, {:.3}",
                se[0], se[1], se[2]
            ),
            details,
        ))
    };
    report(4, "hybrid coverage and spectral efficiency", run())
}

/// Peaks of the absorption coefficient over the model's band.
pub fn criterion_5(_opts: &Options) -> Report {
    let run = || -> CoreResult<(bool, String, Vec<String>)> {
        let src = AbsorptionSource::Simplified(Environment::default());
        let freqs: Vec<f64> = (0..=250).map(|i| 275.0 + 0.5 * f64::from(i)).collect();
        let k: Vec<f64> = freqs
            .iter()
            .map(|&f| absorption_coefficient(f * 1e9, &src))
            .collect::<CoreResult<_>>()?;
        let mut details = Vec::new();
        if let Some(i) = k.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            details.push(format!("k_a({} GHz) = {}", freqs[i], k[i]));
        }
        let peaks: Vec<f64> = (1..k.len() - 1)
            .filter(|&i| k[i] > k[i - 1] && k[i] > k[i + 1])
            .map(|i| freqs[i])
            .collect();
        let expected = [324.8, 379.7];
        let placed = peaks.len() == 2 && peaks.iter().zip(expected).all(|(p, e)| (p - e).abs() <= 3.0);
        if !placed {
            details.push(format!("local maxima at {peaks:?} GHz, expected near {expected:?}"));
        }
        Ok((
            details.is_empty(),
            format!("local maxima at {peaks:?} GHz; all values finite and positive"),
            details,
        ))
    };
    report(5, "absorption coefficient peaks", run())
}

fn tight_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        max_subdivisions: 20_000,
        ..QuadratureSpec::default()
    }
}

/// Σ_k ∫_x^R t f(Ĝ_k t^{−α}) dt over the normalized MLFT gains of a tier.
fn chi_oracle<F>(gains: &[f64], x: f64, radius: f64, mut f: F) -> CoreResult<f64>
where
    F: FnMut(f64, f64) -> f64,
{
    let q = tight_quadrature();
    let mut total = 0.0;
    for &g in gains {
        total += try_integrate(|t| Ok(t * f(g, t)), x, radius, &q)?;
    }
    Ok(total)
}

/// Closed forms against quadrature and special-function residuals.
pub fn criterion_6(opts: &Options) -> Report {
    let run = || -> CoreResult<(bool, String, Vec<String>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut details = Vec::new();
        let mut worst_chi: f64 = 0.0;
        for _ in 0..100 {
            let mut p = HybridParams::default();
            p.thz.array_size = [8, 16, 32, 64, 128][rng.random_range(0..5)];
            p.mmwave.array_size = [8, 16, 32, 64][rng.random_range(0..4)];
            p.thz.pathloss_exponent = rng.random_range(2.1..4.5);
            p.mmwave.pathloss_exponent = rng.random_range(2.0..4.0);
            p.nakagami_m = rng.random_range(1..=6);
            let a = Analysis::new(&p)?;
            let s = 10f64.powf(rng.random_range(-3.0..6.0));
            let xt = rng.random_range(0.05..0.95) * p.thz.los_radius;
            let xm = rng.random_range(0.05..0.95) * p.mmwave.los_radius;

            let m = f64::from(p.nakagami_m);
            let (at, am) = (p.thz.pathloss_exponent, p.mmwave.pathloss_exponent);
            let norm = |pat: &thzmm_core::antenna::MlftPattern| -> Vec<f64> {
                let n = f64::from(pat.n_elements());
                pat.levels().iter().map(|l| l.gain / n).collect()
            };
            let ot = chi_oracle(&norm(a.thz_pattern()), xt, p.thz.los_radius, |g, t| {
                (1.0 + s * g * t.powf(-at) / m).powf(-m)
            })?;
            let om = chi_oracle(&norm(a.mmwave_pattern()), xm, p.mmwave.los_radius, |g, t| {
                1.0 / (1.0 + s * g * t.powf(-am))
            })?;
            for (name, closed, oracle, x) in [
                ("chi_T", a.chi_thz(s, xt)?, ot, xt),
                ("chi_m", a.chi_mmwave(s, xm)?, om, xm),
            ] {
                let rel = ((closed - oracle) / oracle).abs();
                worst_chi = worst_chi.max(rel);
                if rel > 1e-8 {
                    details.push(format!("{name}(s={s:.3e}, x={x:.3}): closed {closed:.12e}, quadrature {oracle:.12e}"));
                }
            }
        }

        let mut worst_w: f64 = 0.0;
        for _ in 0..200 {
            let x = 10f64.powf(rng.random_range(-12.0..300.0));
            let w = lambert_w0(x)?;
            // Compare in log space so that w e^w cannot overflow.
            let res = if x > 1e300 {
                ((w + w.ln()) - x.ln()).abs() / x.ln()
            } else {
                ((w * w.exp() - x) / x).abs()
            };
            worst_w = worst_w.max(res);
        }
        if worst_w > 1e-12 {
            details.push(format!("Lambert W residual {worst_w:.2e}"));
        }

        let mut worst_nu: f64 = 0.0;
        for _ in 0..20 {
            let mut p = HybridParams::default();
            p.thz.bias = 10f64.powf(rng.random_range(-1.0..2.0));
            p.thz.pathloss_exponent = rng.random_range(2.0..4.5);
            p.mmwave.pathloss_exponent = rng.random_range(2.0..4.0);
            let a = Analysis::new(&p)?;
            let (eps, k) = (a.epsilon(), a.absorption_coefficient());
            for i in 1..=50 {
                let xh = p.mmwave.los_radius * f64::from(i) / 50.0;
                let nu = a.nu(xh)?;
                let lhs = eps.ln() + p.thz.pathloss_exponent * nu.ln() + k * nu;
                let rhs = p.mmwave.pathloss_exponent * xh.ln();
                worst_nu = worst_nu.max((lhs.exp() - rhs.exp()).abs() / rhs.exp());
            }
        }
        if worst_nu > 1e-9 {
            details.push(format!("nu residual {worst_nu:.2e}"));
        }

        let mut p = HybridParams::default();
        p.mmwave_noise_power = 0.0;
        let a = Analysis::new(&p)?;
        let mut worst_product: f64 = 0.0;
        for db in TAU_GRID_DB {
            let tau = db_to_linear(db);
            let product = a.coverage_mmwave_interference_limited(tau)?;
            let general = a.coverage_mmwave_standalone(tau)?;
            worst_product = worst_product.max((product - general).abs());
            if (product - general).abs() > 1e-6 {
                details.push(format!("tau={db} dB: product form {product:.10}, general form {general:.10}"));
            }
        }
        Ok((
            details.is_empty(),
            format!(
                "chi rel err {worst_chi:.1e} (limit 1e-8); Lambert W {worst_w:.1e} (1e-12); \
                 nu {worst_nu:.1e} (1e-9); product vs general form {worst_product:.1e} (1e-6)"
            ),
            details,
        ))
    };
    report(6, "closed forms and special functions", run())
}

/// Structural invariants of the analytic engine and the simulator.
pub fn criterion_7(opts: &Options) -> Report {
    let run = || -> CoreResult<(bool, String, Vec<String>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
        let mut details = Vec::new();
        let taus: Vec<f64> = TAU_GRID_DB.iter().map(|&d| db_to_linear(d)).collect();
        for draw in 0..10 {
            let mut p = HybridParams::default();
            if draw > 0 {
                p.thz.density = 10f64.powf(rng.random_range(-3.5..-1.0));
                p.mmwave.density = 10f64.powf(rng.random_range(-4.0..-2.0));
                p.thz.bias = 10f64.powf(rng.random_range(-1.0..2.0));
                p.thz.array_size = [16, 32, 64, 128][rng.random_range(0..4)];
                p.mmwave.array_size = [8, 16, 32][rng.random_range(0..3)];
            }
            let a = Analysis::new(&p)?;
            let (at, am) = (a.association_prob_thz(), a.association_prob_mmwave());
            if at + am != 1.0 || !(0.0..=1.0).contains(&at) {
                details.push(format!("draw {draw}: A_T = {at}, A_m = {am}"));
            }
            for x in [0.0, 0.5, 5.0] {
                let lt = a.laplace_interference_thz(0.0, x)?;
                let lm = a.laplace_interference_mmwave(0.0, x)?;
                if lt != 1.0 || lm != 1.0 {
                    details.push(format!("draw {draw}: L(0) at x={x} is {lt}, {lm}"));
                }
            }
            let limit = [
                ("THz", a.coverage_thz_standalone(1e-9)?),
                ("mmWave", a.coverage_mmwave_standalone(1e-9)?),
                ("hybrid", a.coverage_hybrid(1e-9)?),
            ];
            for (name, c) in limit {
                if (c - 1.0).abs() > 1e-4 {
                    details.push(format!("draw {draw}: {name} coverage at tau->0 is {c}"));
                }
            }
            for &tau in &taus {
                for c in [
                    a.coverage_thz_standalone(tau)?,
                    a.coverage_mmwave_standalone(tau)?,
                    a.coverage_hybrid(tau)?,
                ] {
                    if !(0.0..=1.0).contains(&c) {
                        details.push(format!("draw {draw}: coverage {c} at tau={tau}"));
                    }
                }
            }
        }
        let sim = Simulator::new(&HybridParams::default(), opts.seed)?;
        let residual = sim.max_conservation_residual(1_000, Mode::ThzOnly)?;
        if residual > 1e-10 {
            details.push(format!("conservation residual {residual:.2e}"));
        }
        let outcomes = sim.run(1_000, Mode::Hybrid);
        let a = association_estimate(&outcomes).mean;
        let c = coverage_estimate(&outcomes, 1.0);
        for v in [a, c.conditioned.mean, c.unconditional.mean] {
            if !(0.0..=1.0).contains(&v) {
                details.push(format!("Monte Carlo probability {v}"));
            }
        }
        Ok((
            details.is_empty(),
            format!("10 parameter draws; max conservation residual {residual:.1e} over 1000 trials (limit 1e-10)"),
            details,
        ))
    };
    report(7, "structural invariants", run())
}

/// Runs a request on a dedicated pool of `workers` threads and returns the CSV bytes.
pub fn run_to_csv(req: &RunRequest, workers: usize) -> Result<Vec<u8>, crate::CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::CliError::Sweep(format!("thread pool: {e}")))?;
    let rows = pool.install(|| execute(req))?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).expect("writing to memory");
    Ok(buf)
}

/// Byte-identical CSV across repeated runs and worker counts.
pub fn criterion_8(opts: &Options) -> Report {
    let run = || -> Result<(bool, String, Vec<String>), crate::CliError> {
        let mut config = RunConfig::default();
        config.master_seed = opts.seed;
        config.n_trials = (opts.trials / 5).max(100);
        let req = RunRequest {
            config,
            sweep: Some(SweepSpec::parse("bias_thz=0.1,1,10").map_err(crate::CliError::Sweep)?),
            metric: Metric::CoverageHybrid,
            tau_db: vec![-10.0, 20.0],
            engines: Engines::Both,
        };
        let runs: Vec<(usize, Vec<u8>)> = [1, 1, 2, 4]
            .into_iter()
            .map(|w| run_to_csv(&req, w).map(|b| (w, b)))
            .collect::<Result<_, _>>()?;
        let mut details = Vec::new();
        for (w, bytes) in &runs[1..] {
            if bytes != &runs[0].1 {
                details.push(format!("run with {w} workers differs from the first run"));
            }
        }
        Ok((
            details.is_empty(),
            format!(
                "{} runs (workers 1, 1, 2, 4) of a {}-byte CSV compared",
                runs.len(),
                runs[0].1.len()
            ),
            details,
        ))
    };
    match run() {
        Ok((passed, summary, details)) => Report {
            number: 8,
            title: "reproducibility",
            passed,
            summary,
            details,
        },
        Err(e) => Report {
            number: 8,
            title: "reproducibility",
            passed: false,
            summary: format!("run failed: {e}"),
            details: Vec::new(),
        },
    }
}

/// All criteria in order. Independent criteria run in parallel.
pub fn run_all(opts: &Options) -> Vec<Report> {
    let criteria: [fn(&Options) -> Report; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    criteria.par_iter().map(|c| c(opts)).collect()
}
