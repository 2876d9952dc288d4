//! Radial weight functions and the geometry they induce.
//!
//! A weight is an increasing radial function `h` with `h(0) = 0` whose
//! Laplacian `Δh(r) = h''(r) + h'(r)/r` stays ≥ 1; the local length scale is
//! `ρ(r) = Δh(r)^{-1/2}`. Built-in profiles cover the standard examples on
//! the disc (`1/(1-r)`, `exp(1/(1-r))`, `log-log`) and on the plane (`c·r^p`,
//! `e^r`); user weights come in as sampled tables with monotone-cubic
//! interpolation, or as closures (derivatives then by ρ-scaled central
//! differences).

use crate::quad::{integrate, RADIAL_REL_TOL};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Disc,
    Plane,
}

impl Domain {
    /// Upper end of the radial range (1 for the disc, ∞ for the plane).
    pub fn boundary(self) -> f64 {
        match self {
            Domain::Disc => 1.0,
            Domain::Plane => f64::INFINITY,
        }
    }

    pub fn contains(self, r: f64) -> bool {
        r >= 0.0 && r < self.boundary()
    }
}

/// Regularity class of the weight: (I) power-comparable ρ, (II) the
/// faster-than-power regime where `ρ'·log(1/ρ) → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegularityClass {
    I,
    II,
}

#[derive(Clone)]
enum Profile {
    /// h = (1-r)^{-a} - 1 on the disc.
    PowInv { a: f64 },
    /// h = exp(1/(1-r)) - e on the disc.
    ExpInv,
    /// h = c·r^p on the plane. `c = 1/4, p = 2` is the standard Fock weight β.
    Pow { p: f64, coeff: f64 },
    /// h = e^{a r} - 1 on the plane.
    Exp { scale: f64 },
    /// h = L·log L with L = log(e/(1-r)) on the disc.
    LogLog,
    /// Sampled table with monotone cubic interpolation; derivatives by
    /// central differences with ρ-scaled steps.
    Table(Arc<MonotoneCubic>),
    /// Arbitrary evaluator (derivatives numeric, as for tables).
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A radial weight with its derivatives and domain.
#[derive(Clone)]
pub struct RadialWeight {
    domain: Domain,
    profile: Profile,
    offset: f64,
    label: String,
    class_hint: Option<RegularityClass>,
    /// Largest radius at which h and its derivatives evaluate to finite f64s;
    /// bracket searches stay inside this.
    safe_radius: f64,
}

impl std::fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RadialWeight({}, {:?})", self.label, self.domain)
    }
}

impl RadialWeight {
    fn assemble(
        domain: Domain,
        profile: Profile,
        label: String,
        class_hint: Option<RegularityClass>,
    ) -> RadialWeight {
        let mut w = RadialWeight {
            domain,
            profile,
            offset: 0.0,
            label,
            class_hint,
            safe_radius: domain.boundary(),
        };
        w.offset = w.h_raw(0.0);
        w.safe_radius = w.compute_safe_radius();
        w
    }

    fn compute_safe_radius(&self) -> f64 {
        let finite_at = |r: f64| {
            self.h_raw(r).is_finite() && self.dh(r).is_finite() && self.d2h(r).is_finite()
        };
        match self.domain {
            Domain::Disc => {
                let mut last = 0.5;
                for j in 2..=52 {
                    let r = 1.0 - 0.5f64.powi(j);
                    if !finite_at(r) {
                        return last;
                    }
                    last = r;
                }
                last
            }
            Domain::Plane => {
                let mut last = 1.0;
                for j in 0..=100 {
                    let r = 2.0f64.powi(j);
                    if !finite_at(r) {
                        return last;
                    }
                    last = r;
                }
                f64::INFINITY
            }
        }
    }

    pub fn pow_inv(a: f64) -> RadialWeight {
        assert!(a > 0.0);
        RadialWeight::assemble(
            Domain::Disc,
            Profile::PowInv { a },
            format!("pow_inv(a={a})"),
            Some(RegularityClass::I),
        )
    }

    pub fn exp_inv() -> RadialWeight {
        RadialWeight::assemble(
            Domain::Disc,
            Profile::ExpInv,
            "exp_inv".into(),
            Some(RegularityClass::II),
        )
    }

    pub fn pow(p: f64, coeff: f64) -> RadialWeight {
        assert!(p >= 2.0 && coeff > 0.0);
        RadialWeight::assemble(
            Domain::Plane,
            Profile::Pow { p, coeff },
            format!("pow(p={p}, c={coeff})"),
            Some(RegularityClass::I),
        )
    }

    /// The standard Fock weight β(z) = |z|²/4 with Δβ ≡ 1, ρ ≡ 1.
    pub fn beta() -> RadialWeight {
        RadialWeight::pow(2.0, 0.25)
    }

    pub fn exp(scale: f64) -> RadialWeight {
        assert!(scale > 0.0);
        RadialWeight::assemble(
            Domain::Plane,
            Profile::Exp { scale },
            format!("exp(a={scale})"),
            Some(RegularityClass::II),
        )
    }

    pub fn log_log() -> RadialWeight {
        RadialWeight::assemble(
            Domain::Disc,
            Profile::LogLog,
            "log_log".into(),
            Some(RegularityClass::I),
        )
    }

    /// Weight from a sampled (r, h) table, monotone-cubic interpolated.
    /// h(0) is subtracted so the normalization h(0) = 0 holds.
    pub fn from_table(domain: Domain, table: &[(f64, f64)]) -> Result<RadialWeight> {
        let spline = MonotoneCubic::new(table)?;
        Ok(RadialWeight::assemble(domain, Profile::Table(Arc::new(spline)), "table".into(), None))
    }

    /// Weight from a closure; derivatives via ρ-scaled central differences.
    pub fn from_function(
        domain: Domain,
        label: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> RadialWeight {
        RadialWeight::assemble(domain, Profile::Func(Arc::new(f)), label.into(), None)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Largest radius at which evaluation stays finite; root brackets and
    /// grids are kept inside this.
    pub fn safe_radius(&self) -> f64 {
        self.safe_radius
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn class_hint(&self) -> Option<RegularityClass> {
        self.class_hint
    }

    fn h_raw(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::PowInv { a } => (1.0 - r).powf(-a) - 1.0,
            Profile::ExpInv => (1.0 / (1.0 - r)).exp() - std::f64::consts::E,
            Profile::Pow { p, coeff } => coeff * r.powf(*p),
            Profile::Exp { scale } => (scale * r).exp() - 1.0,
            Profile::LogLog => {
                let l = 1.0 - (1.0 - r).ln();
                l * l.ln()
            }
            Profile::Table(t) => t.eval(r),
            Profile::Func(f) => f(r),
        }
    }

    /// The weight value h(r), normalized so h(0) = 0.
    pub fn h(&self, r: f64) -> f64 {
        debug_assert!(self.domain.contains(r), "radius {r} outside domain");
        self.h_raw(r) - self.offset
    }

    /// First radial derivative h'(r).
    pub fn dh(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::PowInv { a } => a * (1.0 - r).powf(-a - 1.0),
            Profile::ExpInv => {
                let u = 1.0 / (1.0 - r);
                u.exp() * u * u
            }
            Profile::Pow { p, coeff } => coeff * p * r.powf(p - 1.0),
            Profile::Exp { scale } => scale * (scale * r).exp(),
            Profile::LogLog => {
                let l = 1.0 - (1.0 - r).ln();
                (l.ln() + 1.0) / (1.0 - r)
            }
            Profile::Table(_) | Profile::Func(_) => self.fd_derivs(r).0,
        }
    }

    /// Second radial derivative h''(r).
    pub fn d2h(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::PowInv { a } => a * (a + 1.0) * (1.0 - r).powf(-a - 2.0),
            Profile::ExpInv => {
                let u = 1.0 / (1.0 - r);
                u.exp() * (u.powi(4) + 2.0 * u.powi(3))
            }
            Profile::Pow { p, coeff } => coeff * p * (p - 1.0) * r.powf(p - 2.0),
            Profile::Exp { scale } => scale * scale * (scale * r).exp(),
            Profile::LogLog => {
                let om = 1.0 - r;
                let l = 1.0 - om.ln();
                (l.ln() + 1.0) / (om * om) + 1.0 / (l * om * om)
            }
            Profile::Table(_) | Profile::Func(_) => self.fd_derivs(r).1,
        }
    }

    /// Central differences with the step refined once by the estimated local ρ.
    fn fd_derivs(&self, r: f64) -> (f64, f64) {
        let room = match self.domain {
            Domain::Disc => (1.0 - r).min(r.max(0.05)),
            Domain::Plane => r.max(0.5),
        };
        let mut step = (room * 0.01).max(1e-9).min(room * 0.45);
        let mut out = (0.0, 0.0);
        for _ in 0..2 {
            let fp = self.h_raw(r + step);
            let fm = self.h_raw((r - step).max(0.0));
            let f0 = self.h_raw(r);
            let d1 = (fp - fm) / (2.0 * step);
            let d2 = (fp - 2.0 * f0 + fm) / (step * step);
            out = (d1, d2);
            let lap = d2 + if r > 0.0 { d1 / r } else { d2 };
            if lap > 1.0 {
                let rho_est = lap.powf(-0.5);
                let refined = (rho_est * 0.25).max(room * 1e-7).max(1e-15).min(room * 0.25);
                if (refined - step).abs() < 0.5 * step {
                    break;
                }
                step = refined;
            } else {
                break;
            }
        }
        out
    }

    /// Radial Laplacian `Δh(r) = h''(r) + h'(r)/r`.
    pub fn laplacian(&self, r: f64) -> Result<f64> {
        if !self.domain.contains(r) {
            return Err(Error::BadInput(format!("radius {r} outside domain")));
        }
        if r == 0.0 {
            // lim h'/r exists only when h'(0) = 0; then it equals h''(0).
            let eps = 1e-7;
            let d1 = self.dh(eps);
            let d2 = self.d2h(0.0);
            if d1.abs() > 10.0 * eps * d2.abs().max(1.0) {
                return Err(Error::OriginSingularity);
            }
            return Ok(2.0 * d2);
        }
        Ok(self.d2h(r) + self.dh(r) / r)
    }

    /// ρ(r) = Δh(r)^{-1/2}; errors if the standing assumption Δh ≥ 1 fails.
    pub fn rho(&self, r: f64) -> Result<f64> {
        let lap = self.laplacian(r)?;
        if lap < 1.0 {
            return Err(Error::Assumption { r, what: format!("Δh = {lap} < 1") });
        }
        Ok(lap.powf(-0.5))
    }

    /// Integrated ring mass `∫_a^b Δh(t)·t dt` (the measure `Δh·dm₂/2π` of the
    /// annulus `a ≤ |z| < b`).
    pub fn ring_mass(&self, a: f64, b: f64) -> Result<f64> {
        debug_assert!(a <= b);
        integrate(|t| (self.d2h(t) * t + self.dh(t)).max(0.0), a, b, RADIAL_REL_TOL, 1e-14)
    }

    /// Mass-weighted log centroid: `(1/mass)·∫_a^b Δh(t)·t·log t dt`, i.e. the
    /// log-radius `log s` solving the ring centroid relation.
    pub fn log_centroid(&self, a: f64, b: f64, mass: f64) -> Result<f64> {
        let v = integrate(|t| (self.d2h(t) * t + self.dh(t)) * t.ln(), a, b, RADIAL_REL_TOL, 1e-14)?;
        Ok(v / mass)
    }

    /// Truncated weight: h inside the cutoff, logarithmic continuation with
    /// the enclosed mass as slope outside.
    pub fn truncated(&self, cutoff: f64) -> Result<TruncatedWeight> {
        if !(cutoff > 0.0 && self.domain.contains(cutoff)) {
            return Err(Error::BadInput(format!("cutoff {cutoff} outside domain interior")));
        }
        let core_mass = self.ring_mass(0.0, cutoff)?;
        Ok(TruncatedWeight { base: self.clone(), cutoff, core_mass })
    }

    /// Relative residual of the Green identity
    /// `h(r) = ∫_0^r Δh(s)·s·log(r/s) ds` (with h(0) = 0).
    pub fn green_check(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && self.domain.contains(r)) {
            return Err(Error::BadInput(format!("radius {r} outside domain interior")));
        }
        let integral = integrate(
            |s| (self.d2h(s) * s + self.dh(s)) * (r / s).ln(),
            0.0,
            r,
            RADIAL_REL_TOL,
            1e-14,
        )?;
        let h = self.h(r);
        Ok((h - integral).abs() / h.abs().max(1.0))
    }

    /// Grid validation of the standing assumptions plus (I)/(II)
    /// classification. Violations are reported, not raised.
    pub fn validate(&self, r_lo: f64, r_hi: f64, n: usize) -> Result<ValidationReport> {
        if !(r_lo < r_hi && self.domain.contains(r_lo) && self.domain.contains(r_hi) && n >= 2) {
            return Err(Error::BadInput("bad validation range".into()));
        }
        let mut violations = Vec::new();
        let grid: Vec<f64> =
            (0..n).map(|i| r_lo + (r_hi - r_lo) * i as f64 / (n - 1) as f64).collect();

        let mut rho_vals = Vec::with_capacity(n);
        for &r in &grid {
            let lap = match self.laplacian(r) {
                Ok(l) => l,
                Err(e) => {
                    violations.push(Violation { r, what: format!("laplacian failed: {e}") });
                    rho_vals.push(f64::NAN);
                    continue;
                }
            };
            if lap < 1.0 {
                violations.push(Violation { r, what: format!("Δh = {lap} < 1") });
            }
            rho_vals.push(lap.max(f64::MIN_POSITIVE).powf(-0.5));
        }

        // ρ decreasing (non-strict, with a tiny slack for flat profiles)
        for i in 1..n {
            if rho_vals[i] > rho_vals[i - 1] * (1.0 + 1e-9) {
                violations.push(Violation { r: grid[i], what: "ρ not decreasing".into() });
            }
        }

        // ρ' by central differences on the grid; |ρ'| should trend down
        // toward the boundary.
        let drho: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (rho_vals[b] - rho_vals[a]) / (grid[b] - grid[a])
            })
            .collect();
        let q3 = quarter_mean(&drho.iter().map(|d| d.abs()).collect::<Vec<_>>(), 2);
        let q4 = quarter_mean(&drho.iter().map(|d| d.abs()).collect::<Vec<_>>(), 3);
        if q4 > q3 * 1.05 + 1e-12 {
            violations.push(Violation {
                r: r_hi,
                what: format!("|ρ'| not decaying toward the boundary ({q3:.3e} → {q4:.3e})"),
            });
        }

        // Classification. Class (I) means ρ·(1-r)^{-C} (disc) resp. ρ·r^C
        // (plane) is eventually increasing for a fixed C; equivalently the
        // logarithmic slope κ = -ρ'·(1-r)/ρ (disc) resp. -ρ'·r/ρ (plane)
        // stays bounded by C. On a finite grid we require κ ≤ 16 (sweep
        // bound) and no upward trend; a κ that keeps climbing is the
        // faster-than-power regime (II), confirmed by ρ'·log(1/ρ) → 0.
        let kappa: Vec<f64> = (0..n)
            .map(|i| match self.domain {
                Domain::Disc => -drho[i] * (1.0 - grid[i]) / rho_vals[i],
                Domain::Plane => -drho[i] * grid[i] / rho_vals[i],
            })
            .collect();
        let tail = &kappa[n / 2..];
        let kappa_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let k_early = quarter_mean(&kappa, 2);
        let k_late = quarter_mean(&kappa, 3);
        let mut class = None;
        let mut class_exponent = None;
        if kappa_max <= 16.5 && k_late <= k_early.max(0.0) * 1.25 + 0.5 {
            class = Some(RegularityClass::I);
            class_exponent = Some((kappa_max.ceil().max(1.0)) as u32);
        } else {
            let decay: Vec<f64> = (0..n)
                .map(|i| (drho[i] * (1.0 / rho_vals[i]).ln()).abs())
                .collect();
            let early = quarter_mean(&decay, 0);
            let mid = quarter_mean(&decay, 2);
            let late = quarter_mean(&decay, 3);
            if late <= 0.9 * mid + 1e-12 && late <= 0.5 * early + 1e-12 {
                class = Some(RegularityClass::II);
            } else {
                violations.push(Violation {
                    r: r_hi,
                    what: format!(
                        "unclassified: power slope κ reaches {kappa_max:.2} and ρ'·log(1/ρ) not \
                         decaying ({early:.3e} → {late:.3e})"
                    ),
                });
            }
        }

        Ok(ValidationReport {
            label: self.label.clone(),
            domain: self.domain,
            r_lo,
            r_hi,
            grid_points: n,
            class,
            class_exponent,
            notes: vec!["class-I exponent sweep limited to C in 1..=16 (tooling choice)".into()],
            violations,
        })
    }
}

fn quarter_mean(v: &[f64], quarter: usize) -> f64 {
    let n = v.len();
    let lo = n * quarter / 4;
    let hi = (n * (quarter + 1) / 4).max(lo + 1).min(n);
    v[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub r: f64,
    pub what: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub domain: Domain,
    pub r_lo: f64,
    pub r_hi: f64,
    pub grid_points: usize,
    pub class: Option<RegularityClass>,
    pub class_exponent: Option<u32>,
    pub notes: Vec<String>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The weight `h` truncated at `cutoff`: unchanged inside, continued outside
/// with the logarithmic growth matching the enclosed mass.
#[derive(Clone, Debug)]
pub struct TruncatedWeight {
    base: RadialWeight,
    cutoff: f64,
    core_mass: f64,
}

impl TruncatedWeight {
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn core_mass(&self) -> f64 {
        self.core_mass
    }

    pub fn value(&self, r: f64) -> f64 {
        if r < self.cutoff {
            self.base.h(r)
        } else {
            self.base.h(self.cutoff) + (r / self.cutoff).ln() * self.core_mass
        }
    }
}

// ------------------------------------------------------------------
// config

/// JSON weight configuration:
/// `{"domain":"disc"|"plane","kind":"pow_inv"|...,"params":{...}}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct WeightConfig {
    pub domain: Domain,
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl WeightConfig {
    pub fn build(&self) -> Result<RadialWeight> {
        let get = |k: &str, d: f64| self.params.get(k).and_then(|v| v.as_f64()).unwrap_or(d);
        let w = match self.kind.as_str() {
            "pow_inv" => RadialWeight::pow_inv(get("a", 1.0)),
            "exp_inv" => RadialWeight::exp_inv(),
            "pow" => RadialWeight::pow(get("p", 2.0), get("coeff", 0.25)),
            "exp" => RadialWeight::exp(get("scale", 1.0)),
            "log_log" => RadialWeight::log_log(),
            "custom" => {
                let table = self
                    .params
                    .get("table")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::BadInput("custom weight needs a table".into()))?;
                let pts: Vec<(f64, f64)> = table
                    .iter()
                    .filter_map(|row| {
                        let row = row.as_array()?;
                        Some((row.first()?.as_f64()?, row.get(1)?.as_f64()?))
                    })
                    .collect();
                RadialWeight::from_table(self.domain, &pts)?
            }
            other => return Err(Error::BadInput(format!("unknown weight kind {other}"))),
        };
        if w.domain() != self.domain {
            return Err(Error::BadInput(format!(
                "kind {} lives on {:?}, config says {:?}",
                self.kind,
                w.domain(),
                self.domain
            )));
        }
        Ok(w)
    }
}

// ------------------------------------------------------------------
// monotone cubic interpolation (Fritsch–Carlson)

#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(table: &[(f64, f64)]) -> Result<MonotoneCubic> {
        if table.len() < 3 {
            return Err(Error::BadInput("table needs at least 3 samples".into()));
        }
        let mut pts = table.to_vec();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadInput("duplicate radii in table".into()));
        }
        let n = x.len();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
        }
        // Fritsch–Carlson limiter
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
            } else {
                let a = m[i] / d[i];
                let b = m[i + 1] / d[i];
                let s = (a * a + b * b).sqrt();
                if s > 3.0 {
                    m[i] = 3.0 * a / s * d[i];
                    m[i + 1] = 3.0 * b / s * d[i];
                }
            }
        }
        Ok(MonotoneCubic { x, y, m })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_laplacian_is_one() {
        let w = RadialWeight::beta();
        for r in [0.1, 1.0, 3.7, 20.0] {
            assert!((w.laplacian(r).unwrap() - 1.0).abs() < 1e-12);
            assert!((w.rho(r).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((w.laplacian(0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_laplacian_is_four() {
        let w = RadialWeight::pow(2.0, 1.0);
        assert!((w.laplacian(0.5).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pow_inv_closed_forms() {
        let w = RadialWeight::pow_inv(1.0);
        // Δh(0.9) = 2/0.1³ + (1/0.1²)/0.9
        let lap = 2.0 / 0.001 + 100.0 / 0.9;
        assert!((w.laplacian(0.9).unwrap() - lap).abs() / lap < 1e-12);
        assert!((w.rho(0.9).unwrap() - lap.powf(-0.5)).abs() < 1e-15);
        let lap95 = 2.0 / 0.05f64.powi(3) + (1.0 / 0.05f64.powi(2)) / 0.95;
        assert!((w.rho(0.95).unwrap() - lap95.powf(-0.5)).abs() < 1e-15);
        // spot values quoted to 4 digits
        assert!((w.rho(0.9).unwrap() - 0.02177).abs() < 1e-5);
        assert!((w.rho(0.95).unwrap() - 0.007803).abs() < 1e-6);
        // h normalized: h(0) = 0
        assert_eq!(w.h(0.0), 0.0);
    }

    #[test]
    fn laplacian_origin_singularity_rejected() {
        let w = RadialWeight::pow_inv(1.0);
        assert!(matches!(w.laplacian(0.0), Err(Error::OriginSingularity)));
    }

    #[test]
    fn rho_matches_laplacian_at_random_radii() {
        let weights = [
            RadialWeight::pow_inv(1.0),
            RadialWeight::exp_inv(),
            RadialWeight::log_log(),
            RadialWeight::beta(),
            RadialWeight::exp(1.0),
        ];
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for w in &weights {
            for _ in 0..1000 {
                let u = next();
                let r = match w.domain() {
                    Domain::Disc => 0.3 + 0.65 * u,
                    Domain::Plane => 0.5 + 25.0 * u,
                };
                let lap = w.laplacian(r).unwrap();
                if lap >= 1.0 {
                    let rho = w.rho(r).unwrap();
                    assert!((rho - lap.powf(-0.5)).abs() <= 1e-15 * (1.0 + rho));
                    assert!(rho <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn truncated_weight_examples() {
        let w = RadialWeight::pow(2.0, 1.0); // h = r², Δh = 4, mass(0,c) = 2c²
        let t = w.truncated(0.5).unwrap();
        assert!((t.core_mass() - 0.5).abs() < 1e-10);
        let v = t.value(0.8);
        let expect = 0.25 + (0.8f64 / 0.5).ln() * 0.5;
        assert!((v - expect).abs() < 1e-10, "got {v}, want {expect}");
        // continuity at the cutoff and the inside branch
        assert!((t.value(0.5) - w.h(0.5)).abs() < 1e-12);
        assert!((t.value(0.3) - w.h(0.3)).abs() < 1e-15);
    }

    #[test]
    fn truncated_weight_minorizes_h() {
        for w in [RadialWeight::pow_inv(1.0), RadialWeight::exp_inv()] {
            let t = w.truncated(0.6).unwrap();
            for i in 0..50 {
                let r = 0.6 + 0.39 * i as f64 / 49.0;
                assert!(
                    t.value(r) <= w.h(r) + 1e-9,
                    "{}: h_r({r}) = {} > h = {}",
                    w.label(),
                    t.value(r),
                    w.h(r)
                );
            }
        }
    }

    #[test]
    fn green_identity() {
        // exact for h = r²: 4∫ s·log(r/s) ds = r²
        let w = RadialWeight::pow(2.0, 1.0);
        assert!(w.green_check(0.8).unwrap() < 1e-10);
        let beta = RadialWeight::beta();
        assert!(beta.green_check(2.0).unwrap() < 1e-10);
    }

    #[test]
    fn green_identity_all_builtins() {
        let weights = [
            RadialWeight::pow_inv(1.0),
            RadialWeight::exp_inv(),
            RadialWeight::log_log(),
            RadialWeight::beta(),
            RadialWeight::exp(1.0),
        ];
        for w in &weights {
            for i in 0..20 {
                let r = match w.domain() {
                    Domain::Disc => 0.05 + 0.90 * i as f64 / 19.0,
                    Domain::Plane => 0.2 + 10.0 * i as f64 / 19.0,
                };
                let res = w.green_check(r).unwrap();
                assert!(res <= 1e-8, "{} at r={r}: residual {res}", w.label());
            }
        }
    }

    #[test]
    fn validation_classes() {
        let r = RadialWeight::pow_inv(1.0).validate(0.5, 0.99, 200).unwrap();
        assert_eq!(r.class, Some(RegularityClass::I), "{:?}", r.violations);
        assert!(r.ok(), "{:?}", r.violations);

        let r = RadialWeight::exp_inv().validate(0.5, 0.95, 200).unwrap();
        assert_eq!(r.class, Some(RegularityClass::II), "{:?}", r.violations);
        assert!(r.ok(), "{:?}", r.violations);

        let r = RadialWeight::exp(1.0).validate(1.0, 30.0, 200).unwrap();
        assert_eq!(r.class, Some(RegularityClass::II), "{:?}", r.violations);
        assert!(r.ok(), "{:?}", r.violations);
    }

    #[test]
    fn table_weight_tracks_analytic() {
        let exact = RadialWeight::pow_inv(1.0);
        let table: Vec<(f64, f64)> =
            (0..400).map(|i| 0.0025 * i as f64).map(|r| (r, exact.h(r))).collect();
        let w = RadialWeight::from_table(Domain::Disc, &table).unwrap();
        for r in [0.3, 0.5, 0.7, 0.85] {
            let rel = (w.h(r) - exact.h(r)).abs() / exact.h(r).max(1.0);
            assert!(rel < 1e-3, "h mismatch at {r}: {rel}");
            let lap_rel =
                (w.laplacian(r).unwrap() - exact.laplacian(r).unwrap()).abs() / exact.laplacian(r).unwrap();
            assert!(lap_rel < 0.05, "Δh mismatch at {r}: {lap_rel}");
        }
    }

    #[test]
    fn weight_config_round_trip() {
        let json = r#"{"domain":"disc","kind":"pow_inv","params":{"a":1.0}}"#;
        let cfg: WeightConfig = serde_json::from_str(json).unwrap();
        let w = cfg.build().unwrap();
        assert!((w.laplacian(0.9).unwrap() - 2111.111111).abs() < 1e-3);
        let bad = r#"{"domain":"plane","kind":"pow_inv","params":{}}"#;
        let cfg: WeightConfig = serde_json::from_str(bad).unwrap();
        assert!(cfg.build().is_err());
    }
}
