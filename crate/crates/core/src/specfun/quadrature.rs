//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! Finite intervals are bisected worst-error-first until the summed error estimate
//! meets the tolerance. Semi-infinite integrals are accumulated over geometrically
//! growing chunks until the contribution of a chunk becomes negligible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_075,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and budgets for numerical integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// A semi-infinite integral stops once a chunk contributes less than this
    /// fraction of the running total.
    pub tail_cutoff_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tail_cutoff_tol: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.rel_tol) || !ok(self.abs_tol) || self.rel_tol == 0.0 && self.abs_tol == 0.0 {
            return Err(Error::invalid(
                "quadrature tolerance",
                format!(
                    "rel_tol = {}, abs_tol = {}; need finite, non-negative, not both zero",
                    self.rel_tol, self.abs_tol
                ),
            ));
        }
        if !ok(self.tail_cutoff_tol) || self.tail_cutoff_tol == 0.0 {
            return Err(Error::invalid(
                "quad_tail_cutoff_tol",
                format!("{} must be positive", self.tail_cutoff_tol),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("quad_max_subdivisions", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence {
            what: "integrand".into(),
            detail: format!("non-finite value {v} at x = {x}"),
        })
    }
}

/// One 21-point Kronrod rule on [a, b] with the QUADPACK error estimate.
fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = eval(f, center)?;
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    resabs *= abs_half;
    resasc *= abs_half;
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Segment { a, b, value, error })
}

fn adaptive<F>(f: &mut F, points: &[f64], spec: &QuadratureSpec, abs_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let s = gk21(f, w[0], w[1])?;
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }
    let mut subdivisions = heap.len();
    loop {
        let tol = abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            return Ok((total, total_err));
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature".into(),
                detail: format!(
                    "error estimate {total_err:.3e} exceeds tolerance {tol:.3e} after {subdivisions} subintervals on [{}, {}]",
                    points[0],
                    points[points.len() - 1]
                ),
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok((total, total_err));
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Interval can no longer be split in floating point.
            return Err(Error::NonConvergence {
                what: "adaptive quadrature".into(),
                detail: format!("interval around x = {mid} exhausted machine resolution"),
            });
        }
        let left = gk21(f, worst.a, mid)?;
        let right = gk21(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        // Floating drift can make the running error slightly negative.
        if total_err < 0.0 {
            total_err = heap.iter().map(|s| s.error).sum::<f64>() + left.error + right.error;
        }
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// ∫ₐᵇ f with a fallible integrand.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_breaks(&mut f, &[a, b], spec)
}

/// Integrates over consecutive intervals `points[i]..points[i+1]`, refining them
/// jointly. Useful when the integrand has kinks or steep regions at known points.
pub fn try_integrate_breaks<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if points.len() < 2 {
        return Err(Error::invalid("integration limits", "need at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("integration limits", "limits must be finite"));
    }
    adaptive(&mut f, points, spec, spec.abs_tol).map(|(v, _)| v)
}

/// ∫ₐ^∞ f with a fallible integrand. `scale` is a length over which the integrand
/// changes appreciably; it sets the width of the first chunk.
pub fn try_integrate_semi_infinite<F>(
    mut f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !a.is_finite() || !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid(
            "integration limits",
            format!("start {a} and scale {scale} must be finite, scale positive"),
        ));
    }
    const MAX_CHUNKS: usize = 200;
    let mut acc = 0.0f64;
    let mut lo = a;
    let mut width = scale;
    let mut quiet = 0;
    for _ in 0..MAX_CHUNKS {
        let hi = lo + width;
        let chunk_abs = spec.abs_tol.max(0.1 * spec.rel_tol * acc.abs());
        let (chunk, _) = adaptive(&mut f, &[lo, hi], spec, chunk_abs)?;
        acc += chunk;
        if chunk.abs() <= spec.tail_cutoff_tol * acc.abs() || (acc == 0.0 && chunk == 0.0) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(acc);
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
        if !lo.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        what: "semi-infinite quadrature".into(),
        detail: format!("tail still contributing after {MAX_CHUNKS} chunks from x = {a}"),
    })
}

/// ∫ₐᵇ f for an infallible integrand.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, spec)
}

/// ∫ₐ^∞ f for an infallible integrand.
pub fn integrate_semi_infinite<F>(mut f: F, a: f64, scale: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_semi_infinite(|x| Ok(f(x)), a, scale, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn kronrod_weights_sum_to_interval_length() {
        let s: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(30), 0.0, 1.0, &spec()).unwrap();
        assert!((v - 1.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_examples() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, &spec()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, &spec()).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
        let v = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &spec()).unwrap();
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let v = try_integrate_breaks(|x: f64| Ok((x - 0.3).abs()), &[0.0, 0.3, 1.0], &spec())
            .unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = integrate_semi_infinite(|x| (-x).exp(), 0.0, 1.0, &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let v = integrate_semi_infinite(|x| x * (-x * x).exp(), 0.0, 0.1, &spec()).unwrap();
        assert!((v - 0.5).abs() < 1e-10);
    }

    /// Composite Simpson on a truncated, substituted range serves as the oracle.
    #[test]
    fn semi_infinite_matches_simpson_oracle() {
        let g = |x: f64| (-x).exp() / (1.0 + x);
        let n = 400_000;
        let upper = 60.0;
        let h = upper / n as f64;
        let mut s = g(0.0) + g(upper);
        for i in 1..n {
            s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = s * h / 3.0;
        assert!((oracle - 0.596_347_362_323_194).abs() < 1e-12);
        let v = integrate_semi_infinite(g, 0.0, 1.0, &spec()).unwrap();
        assert!((v - oracle).abs() < 1e-10);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, &spec()).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tight = QuadratureSpec {
            max_subdivisions: 2,
            rel_tol: 1e-14,
            ..spec()
        };
        let err = integrate(|x| (1.0 / x).sin(), 1e-4, 1.0, &tight).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn rejects_bad_spec() {
        let bad = QuadratureSpec {
            rel_tol: -1.0,
            ..spec()
        };
        assert!(integrate(|x| x, 0.0, 1.0, &bad).is_err());
    }

    proptest! {
        #[test]
        fn additive_over_subintervals(a in -3.0f64..0.0, m in 0.0f64..2.0, b in 2.0f64..5.0) {
            let f = |x: f64| (x * 1.3).cos() * (-0.2 * x * x).exp();
            let whole = integrate(f, a, b, &spec()).unwrap();
            let parts = integrate(f, a, m, &spec()).unwrap() + integrate(f, m, b, &spec()).unwrap();
            prop_assert!((whole - parts).abs() < 1e-9);
        }
    }
}
