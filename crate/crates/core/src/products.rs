//! Log-space evaluation of the canonical ring product.
//!
//! On the disc the product over a ring of N points at radius s collapses to
//! `(1 - (z/s)^N) / (1 - (zs)^N)` (numerator from the zeros, denominator the
//! reflected factors); on the plane only the numerator remains. Everything
//! is computed through `log(1 - e^u)` with `u = N(log|z| - log s) + iNθ`, so
//! point counts in the millions never overflow.
//!
//! Rings may carry punctures: selected lattice zeros divided out of the
//! product, with the pole/zero cancellation done analytically so evaluation
//! exactly at a punctured zero is finite. Peak functions are built on this.

use crate::atomize::RingSequence;
use crate::geometry::dist_to_rings;
use crate::logcx::{log_one_minus_exp, log_ratio_one_minus_exp, wrap_angle, LogComplex};
use crate::report::BandSummary;
use crate::weight::{Domain, RadialWeight, TruncatedWeight};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Per-factor log-magnitude below which tail rings are dropped.
const TAIL_CUTOFF_LN: f64 = -41.446_531_673_892_35; // ln(1e-18)

/// Evaluator of the ring product, optionally truncated (only ring positions
/// `< truncate_at`), rotated (lattice multiplied by `e^{iθ0}`), and
/// punctured (zeros divided out).
#[derive(Clone)]
pub struct RingProductEval {
    rings: Arc<RingSequence>,
    ln_s: Vec<f64>,
    rotation: f64,
    truncate_at: Option<usize>,
    /// ring position -> sorted angle indices b (zero at θ0 + 2πb/N)
    punctures: BTreeMap<usize, Vec<i64>>,
    max_punctured: Option<usize>,
}

impl RingProductEval {
    pub fn new(rings: Arc<RingSequence>) -> RingProductEval {
        let ln_s = rings.rings.iter().map(|r| r.s.ln()).collect();
        RingProductEval {
            rings,
            ln_s,
            rotation: 0.0,
            truncate_at: None,
            punctures: BTreeMap::new(),
            max_punctured: None,
        }
    }

    /// Keep only ring positions `< k` (the partial product over `Λ ∩ rD`).
    pub fn truncated(rings: Arc<RingSequence>, k: usize) -> RingProductEval {
        let mut p = RingProductEval::new(rings);
        p.truncate_at = Some(k);
        p
    }

    pub fn with_rotation(mut self, theta0: f64) -> RingProductEval {
        self.rotation = theta0;
        self
    }

    /// Divide out the lattice zeros at `(ring position, angle index b)`; the
    /// evaluator then represents `f(z) / Π_j (1 - z/λ_j)`.
    pub fn with_punctures(mut self, punctures: &[(usize, i64)]) -> RingProductEval {
        for &(pos, b) in punctures {
            self.punctures.entry(pos).or_default().push(b);
        }
        for v in self.punctures.values_mut() {
            v.sort_unstable();
            v.dedup();
        }
        self.max_punctured = self.punctures.keys().last().copied();
        self
    }

    pub fn rings(&self) -> &RingSequence {
        &self.rings
    }

    pub fn rings_arc(&self) -> Arc<RingSequence> {
        Arc::clone(&self.rings)
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncate_at
    }

    /// The lattice point at (ring position, angle index).
    pub fn lattice_point(&self, pos: usize, b: i64) -> Complex64 {
        let ring = &self.rings.rings[pos];
        let n = ring.n_points as f64;
        Complex64::from_polar(ring.s, self.rotation + 2.0 * PI * b as f64 / n)
    }

    /// Distance from z to the (possibly truncated, rotated) zero set.
    /// Punctured zeros still count; callers that need them excluded handle
    /// that themselves.
    pub fn dist_to_zeros(&self, z: Complex64) -> f64 {
        dist_to_rings(&self.rings, self.rotation, z, self.truncate_at)
    }

    /// Log-space value. Errors with `TailNotConverged` when a full product
    /// is evaluated too close to the outermost stored ring.
    pub fn eval(&self, z: Complex64) -> Result<LogComplex> {
        let r = z.norm();
        if r == 0.0 {
            return Ok(LogComplex::ONE);
        }
        let ln_r = r.ln();
        let theta = z.im.atan2(z.re);
        let rel = theta - self.rotation;
        let limit = self.truncate_at.unwrap_or(self.rings.rings.len()).min(self.rings.rings.len());
        let disc = self.rings.domain == Domain::Disc;

        let mut acc = LogAccum::default();
        let mut converged = self.truncate_at.is_some();
        for pos in 0..limit {
            let ring = &self.rings.rings[pos];
            if ring.n_points == 0 {
                continue;
            }
            let n = ring.n_points as f64;
            let u_re = n * (ln_r - self.ln_s[pos]);
            let u_im = n * rel;

            if let Some(bs) = self.punctures.get(&pos) {
                // pair the puncture nearest in angle with the ring factor so
                // the zero cancels analytically; divide the rest out plainly
                let d_re = ln_r - self.ln_s[pos];
                let mut nearest = 0usize;
                let mut nearest_abs = f64::INFINITY;
                let d_ims: Vec<f64> = bs
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| {
                        let d = wrap_angle(rel - 2.0 * PI * b as f64 / n);
                        if d.abs() < nearest_abs {
                            nearest_abs = d.abs();
                            nearest = i;
                        }
                        d
                    })
                    .collect();
                acc.mul(log_ratio_one_minus_exp(n, d_re, d_ims[nearest]));
                for (i, &d_im) in d_ims.iter().enumerate() {
                    if i != nearest {
                        let t = log_one_minus_exp(d_re, d_im);
                        if t.is_zero() {
                            return Err(Error::IndeterminateAtZero);
                        }
                        acc.div(t);
                    }
                }
            } else {
                acc.mul(log_one_minus_exp(u_re, u_im));
            }

            if disc {
                let v_re = n * (ln_r + self.ln_s[pos]);
                acc.div(log_one_minus_exp(v_re, u_im));
            }

            if acc.is_zero() {
                return Ok(LogComplex::ZERO);
            }

            // past |z| and all punctures, factors decay like e^{u_re}
            if u_re < TAIL_CUTOFF_LN && self.max_punctured.map_or(true, |m| pos > m) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::TailNotConverged);
        }
        Ok(acc.value())
    }
}

/// Compensated accumulator for products in log space.
#[derive(Default)]
struct LogAccum {
    log_mag: f64,
    comp: f64,
    arg: f64,
    zero: bool,
}

impl LogAccum {
    fn mul(&mut self, t: LogComplex) {
        if t.is_zero() {
            self.zero = true;
            return;
        }
        let s = self.log_mag + t.log_mag;
        if self.log_mag.abs() >= t.log_mag.abs() {
            self.comp += (self.log_mag - s) + t.log_mag;
        } else {
            self.comp += (t.log_mag - s) + self.log_mag;
        }
        self.log_mag = s;
        self.arg += t.arg;
    }

    fn div(&mut self, t: LogComplex) {
        self.mul(LogComplex { log_mag: -t.log_mag, arg: -t.arg });
    }

    fn is_zero(&self) -> bool {
        self.zero
    }

    fn value(&self) -> LogComplex {
        if self.zero {
            LogComplex::ZERO
        } else {
            LogComplex::new(self.log_mag + self.comp, self.arg)
        }
    }
}

/// The boundedness diagnostic `A(z) = log|f(z)| - h(|z|) - log(dist(z,Λ)/ρ(|z|))`.
pub fn diag_a(p: &RingProductEval, w: &RadialWeight, z: Complex64) -> Result<f64> {
    let v = p.eval(z)?;
    if v.is_zero() {
        return Err(Error::IndeterminateAtZero);
    }
    let dist = p.dist_to_zeros(z);
    if dist == 0.0 {
        return Err(Error::IndeterminateAtZero);
    }
    let rho = w.rho(z.norm())?;
    Ok(v.log_mag - w.h(z.norm()) - (dist / rho).ln())
}

/// Truncation diagnostic of the partial product against the truncated
/// weight: `log|f_K(ζ)| - h_{r_K}(ζ) - log min(1, dist(ζ, Λ∩r_K D)/ρ(ζ))`.
pub fn truncated_diag(
    p: &RingProductEval,
    w: &RadialWeight,
    hr: &TruncatedWeight,
    z: Complex64,
) -> Result<f64> {
    let v = p.eval(z)?;
    if v.is_zero() {
        return Err(Error::IndeterminateAtZero);
    }
    let dist = p.dist_to_zeros(z);
    let rho = w.rho(z.norm())?;
    Ok(v.log_mag - hr.value(z.norm()) - (dist / rho).min(1.0).ln())
}

/// The standard diagnostic grid: for each ring position in `k_lo..=k_hi`,
/// points at the ring radius and at the midpoint to the next ring, with
/// jittered angles, keeping only points with `dist(z, Λ) ≥ dist_floor·ρ`.
pub fn band_grid(
    w: &RadialWeight,
    p: &RingProductEval,
    k_lo: usize,
    k_hi: usize,
    angles_per_ring: usize,
    dist_floor: f64,
    seed: u64,
) -> Vec<Complex64> {
    let golden = 0.618_033_988_749_894_9_f64;
    let rings = &p.rings().rings;
    let mut out = Vec::new();
    for pos in k_lo..=k_hi.min(rings.len().saturating_sub(2)) {
        let ring = &rings[pos];
        let radii = [ring.s, 0.5 * (ring.s + rings[pos + 1].s)];
        for (ri, &rad) in radii.iter().enumerate() {
            let rho = match w.rho(rad) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let phase = ((seed as f64 + pos as f64 * 7.0 + ri as f64) * golden).fract();
            for j in 0..angles_per_ring {
                let theta = 2.0 * PI * (j as f64 + 0.5 + 0.37 * phase) / angles_per_ring as f64;
                let z = Complex64::from_polar(rad, theta);
                if p.dist_to_zeros(z) >= dist_floor * rho {
                    out.push(z);
                }
            }
        }
    }
    out
}

/// Evaluate a diagnostic over a grid in parallel and summarize the band.
pub fn band_over<F>(grid: &[Complex64], f: F) -> Result<BandSummary>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let values: Vec<f64> = grid.par_iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    Ok(BandSummary::from_values(&values))
}
