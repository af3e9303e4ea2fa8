//! Laplace transforms of the normalized aggregate interference.
//!
//! Interferers of a tier form a PPP on the annulus [x, R] around the typical UE;
//! each presents the normalized MLFT gain Ĝ_k with probability 2ψ (and zero
//! otherwise). With unit-mean fading the PGFL gives
//!
//! ```text
//! L(s) = exp(−4πλψ · Σ_k ∫_x^R t (1 − E[e^{−s Ĝ_k g t^{−α}}]) dt)
//! ```
//!
//! The integral inside is called the *deficit* here. The χ functions are the
//! complementary closed forms Σ_k ∫_x^R t E[e^{−s Ĝ_k g t^{−α}}] dt, so that
//! deficit = K (R² − x²)/2 − χ.

use std::f64::consts::PI;

use super::Analysis;
use crate::specfun::try_integrate_breaks;
use crate::{Error, Result};

impl Analysis {
    fn thz_span(&self, x: f64) -> Result<(f64, f64)> {
        let r = self.thz.radius;
        if !(x >= 0.0) {
            return Err(Error::domain("laplace_interference_thz", format!("x = {x}")));
        }
        Ok((x.min(r), r))
    }

    /// Σ_k ∫_x^{R_T} t (1 − (1 + s Ĝ_k t^{−α_T}/M)^{−M}) dt.
    fn thz_deficit(&self, s: f64, x: f64) -> Result<f64> {
        let (x, r) = self.thz_span(x)?;
        if s == 0.0 || x >= r {
            return Ok(0.0);
        }
        let alpha = self.thz.alpha;
        let m = f64::from(self.params.nakagami_m);
        match &self.thz_f {
            Some(f) => {
                // t = 0 is a removable endpoint; stay just inside it so that the
                // hypergeometric argument remains finite.
                let lo = x.max(1e-12 * r);
                let mut total = 0.0;
                for &g in &self.thz.gains {
                    let a = s * g / m;
                    // t²/2 (F − 1) is minus an antiderivative of the integrand.
                    let at = |t: f64| -> Result<f64> {
                        let z = -a * t.powf(-alpha);
                        Ok(0.5 * t * t * (f.eval(z)? - 1.0))
                    };
                    total += at(lo)? - at(r)?;
                }
                Ok(total)
            }
            None => {
                let mut total = 0.0;
                for &g in &self.thz.gains {
                    let a = s * g / m;
                    let knee = a.powf(1.0 / alpha);
                    let mut pts = vec![x, r];
                    if knee > x && knee < r {
                        pts.insert(1, knee);
                    }
                    total += try_integrate_breaks(
                        |t: f64| {
                            if t == 0.0 {
                                return Ok(0.0);
                            }
                            Ok(-t * (-m * (a * t.powf(-alpha)).ln_1p()).exp_m1())
                        },
                        &pts,
                        &self.quad,
                    )
                    .map_err(|e| e.within("THz interference Laplace transform"))?;
                }
                Ok(total)
            }
        }
    }

    /// χ_T(s) = Σ_k [t²/2 · ₂F₁(−2/α_T, M; (α_T−2)/α_T; −s Ĝ_k t^{−α_T}/M)]_x^{R_T}.
    pub fn chi_thz(&self, s: f64, x: f64) -> Result<f64> {
        let (x, r) = self.thz_span(x)?;
        let k = self.thz.gains.len() as f64;
        Ok(0.5 * k * (r * r - x * x) - self.thz_deficit(s, x)?)
    }

    /// Laplace transform of the normalized THz interference Ĵ from the annulus [x, R_T].
    pub fn laplace_interference_thz(&self, s: f64, x: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain("laplace_interference_thz", format!("s = {s}")));
        }
        Ok((-self.thz.exponent_scale() * self.thz_deficit(s, x)?).exp())
    }

    fn mm_span(&self, x: f64) -> Result<(f64, f64)> {
        let r = self.mm.radius;
        if !(x >= 0.0) {
            return Err(Error::domain("laplace_interference_mmwave", format!("x = {x}")));
        }
        Ok((x.min(r), r))
    }

    /// Σ_k ∫_x^{R_m} t · s ĝ_k t^{−α_m} / (1 + s ĝ_k t^{−α_m}) dt
    ///   = Σ_k [t²/2 · ₂F₁(1, 2/α_m; 1+2/α_m; −t^{α_m}/(s ĝ_k))]_x^{R_m}.
    fn mm_deficit(&self, s: f64, x: f64) -> Result<f64> {
        let (x, r) = self.mm_span(x)?;
        if s == 0.0 || x >= r {
            return Ok(0.0);
        }
        let alpha = self.mm.alpha;
        let mut total = 0.0;
        for &g in &self.mm.gains {
            let sg = s * g;
            let at = |t: f64| -> Result<f64> {
                if t == 0.0 {
                    return Ok(0.0);
                }
                Ok(0.5 * t * t * self.mm_deficit_f.eval(-t.powf(alpha) / sg)?)
            };
            total += at(r)? - at(x)?;
        }
        Ok(total)
    }

    /// χ_m(s) = Σ_k [t^{α_m+2}/(s ĝ_k (α_m+2)) · ₂F₁(1, 1+2/α_m; 2+2/α_m; −t^{α_m}/(s ĝ_k))]_x^{R_m}.
    pub fn chi_mmwave(&self, s: f64, x: f64) -> Result<f64> {
        let (x, r) = self.mm_span(x)?;
        let k = self.mm.gains.len() as f64;
        if s == 0.0 {
            return Ok(0.5 * k * (r * r - x * x));
        }
        let alpha = self.mm.alpha;
        let mut total = 0.0;
        for &g in &self.mm.gains {
            let sg = s * g;
            let at = |t: f64| -> Result<f64> {
                if t == 0.0 {
                    return Ok(0.0);
                }
                let ta = t.powf(alpha);
                Ok(ta * t * t / (sg * (alpha + 2.0)) * self.mm_chi_f.eval(-ta / sg)?)
            };
            total += at(r)? - at(x)?;
        }
        Ok(total)
    }

    /// Laplace transform of the normalized mmWave interference Î_m from [x, R_m].
    pub fn laplace_interference_mmwave(&self, s: f64, x: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain("laplace_interference_mmwave", format!("s = {s}")));
        }
        Ok((-self.mm.exponent_scale() * self.mm_deficit(s, x)?).exp())
    }

    /// Product form of the mmWave Laplace transform at s = τx² for α_m = 2:
    /// Π_k ((x² + τx²ĝ_k)/(R_m² + τx²ĝ_k))^{2πλ_m ψ_m ĝ_k τ x²}.
    pub fn laplace_interference_mmwave_product(&self, tau: f64, x: f64) -> Result<f64> {
        if self.mm.alpha != 2.0 {
            return Err(Error::invalid(
                "pathloss_exponent_mm",
                format!("product form needs α_m = 2, got {}", self.mm.alpha),
            ));
        }
        let (x, r) = self.mm_span(x)?;
        let s = tau * x * x;
        let c = 2.0 * PI * self.mm.density * self.mm.pattern.hpbw();
        let mut ln = 0.0;
        for &g in &self.mm.gains {
            let sg = s * g;
            if sg == 0.0 {
                continue;
            }
            ln += c * sg * ((x * x + sg) / (r * r + sg)).ln();
        }
        Ok(ln.exp())
    }
}
