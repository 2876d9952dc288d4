//! Peak functions: analytic functions concentrated near a point, built by
//! dividing selected zeros out of the canonical ring product.
//!
//! Two profiles:
//! - cubic decay: the product truncated at |z| divided by three nearby
//!   zeros and scaled by ρ(z)³, giving `|g|e^{-h} ≍ 1` near z and cubic
//!   falloff in d_ρ;
//! - Gaussian: the anchored product divided by the zeros mapped from a
//!   square-lattice divisor around z, giving
//!   `|g|e^{-h} ≍ e^{-|z-w|²/(4ρ(z)²)}` on `D(z, Rρ(z))` with superexponential
//!   decay outside.
//!
//! Plus certified Taylor truncations of square-exponential entire functions,
//! interpolation atoms `V_n = a_n·U_{z_n}/U_{z_n}(z_n)` with
//! `U_z = g_{z,R}·(T_N F)((w-z)/ρ(z))`, and the far-field tail sums that
//! control their summability.

use crate::atomize::{anchored_rings, RingSequence};
use crate::geometry::{separation, PointSet};
use crate::logcx::LogComplex;
use crate::products::RingProductEval;
use crate::weight::RadialWeight;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{E, PI};
use std::sync::Arc;

// ------------------------------------------------------------------
// cubic-decay peak

/// Peak with cubic d_ρ falloff: `ρ(z)³·f_{|z|}(w) / Π_{j=1..3}(w - λ_j)`.
pub struct CubicPeak {
    center: Complex64,
    rho_center: f64,
    product: RingProductEval,
    removed: [Complex64; 3],
    log_const: LogComplex,
}

impl CubicPeak {
    /// Build the peak at `z` from a ring sequence covering it. Needs at
    /// least 3 lattice points inside `|z|`·D within `5ρ(z)` of z.
    pub fn new(w: &RadialWeight, rings: Arc<RingSequence>, z: Complex64) -> Result<CubicPeak> {
        let r = z.norm();
        let rho = w.rho(r)?;
        let k = rings.rings.partition_point(|g| g.s < r);
        if k == 0 {
            return Err(Error::AnchorTooCentral);
        }
        // candidate zeros on the few rings just inside |z|
        let theta = z.im.atan2(z.re);
        let mut candidates: Vec<(f64, usize, i64)> = Vec::new();
        for pos in k.saturating_sub(4)..k {
            let ring = &rings.rings[pos];
            if ring.n_points == 0 {
                continue;
            }
            let n = ring.n_points as f64;
            let m0 = (theta * n / (2.0 * PI)).round() as i64;
            for db in -2..=2i64 {
                let b = m0 + db;
                let lam = Complex64::from_polar(ring.s, 2.0 * PI * b as f64 / n);
                let d = (lam - z).norm();
                if d < 5.0 * rho {
                    candidates.push((d, pos, b));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        candidates.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2);
        if candidates.len() < 3 {
            return Err(Error::AnchorTooCentral);
        }
        let chosen: Vec<(usize, i64)> = candidates[..3].iter().map(|c| (c.1, c.2)).collect();
        let product = RingProductEval::truncated(rings, k).with_punctures(&chosen);
        let removed = [
            product.lattice_point(chosen[0].0, chosen[0].1),
            product.lattice_point(chosen[1].0, chosen[1].1),
            product.lattice_point(chosen[2].0, chosen[2].1),
        ];
        // ρ³ scale and the (1 - w/λ) → (w - λ) conversion constants
        let mut log_const = LogComplex::from_f64(rho.powi(3));
        for lam in removed {
            // divide by (w - λ) = -λ·(1 - w/λ): the product already divides
            // by (1 - w/λ), so multiply by -1/λ
            log_const = log_const.mul(&LogComplex::new(-lam.norm().ln(), PI - lam.im.atan2(lam.re)));
        }
        Ok(CubicPeak { center: z, rho_center: rho, product, removed, log_const })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn removed_zeros(&self) -> &[Complex64; 3] {
        &self.removed
    }

    pub fn rho_center(&self) -> f64 {
        self.rho_center
    }

    pub fn eval(&self, w_pt: Complex64) -> Result<LogComplex> {
        Ok(self.product.eval(w_pt)?.mul(&self.log_const))
    }

    /// `log|g(w)| - h(|w|)`, the quantity whose near/far profile the
    /// construction pins down.
    pub fn normalized(&self, w: &RadialWeight, w_pt: Complex64) -> Result<f64> {
        Ok(self.eval(w_pt)?.log_mag - w.h(w_pt.norm()))
    }

    /// Cubic-decay margin at w: `log c + 3·log min(1, min(ρz,ρw)/|z-w|)`
    /// minus the normalized value; nonnegative once `log c` dominates the
    /// near-field band.
    pub fn decay_margin(&self, w: &RadialWeight, w_pt: Complex64, log_c: f64) -> Result<f64> {
        let rho_w = w.rho(w_pt.norm())?;
        let d = (w_pt - self.center).norm();
        let envelope = 3.0 * (self.rho_center.min(rho_w) / d).min(1.0).ln();
        Ok(log_c + envelope - self.normalized(w, w_pt)?)
    }
}

// ------------------------------------------------------------------
// Gaussian-profile peak

/// Peak with Gaussian profile on `D(z, Rρ(z))`, built on an anchored ring
/// sequence whose anchor circle passes through z.
pub struct GaussianPeak {
    center: Complex64,
    r_big: f64,
    rho_center: f64,
    anchor_pos: usize,
    product: RingProductEval,
    divisor: Vec<(usize, i64)>,
    log_const: LogComplex,
}

impl GaussianPeak {
    /// Build at the point `s·e^{iθ}` from an anchored sequence with
    /// `anchored_at = s`. The divisor maps the square lattice
    /// `{a+bi: |a+bi| ≤ R²/(2π)}` to ring offsets a and angle offsets b.
    pub fn build(
        w: &RadialWeight,
        rings: Arc<RingSequence>,
        theta: f64,
        r_big: f64,
    ) -> Result<GaussianPeak> {
        let anchor_pos = rings
            .anchor_index
            .ok_or_else(|| Error::BadInput("gaussian peak needs an anchored sequence".into()))?;
        let s = rings.anchored_at.expect("anchored sequence carries its anchor");
        let rho = w.rho(s)?;
        let z = Complex64::from_polar(s, theta);

        let window = r_big * r_big / (2.0 * PI);
        let a_max = window.floor() as i64;
        if anchor_pos as i64 - a_max < 1 {
            return Err(Error::GridOutOfRange {
                what: format!("anchor at position {anchor_pos} cannot host {a_max} inner rings"),
            });
        }
        if rings.rings.len() as i64 - (anchor_pos as i64) - a_max < 10 {
            return Err(Error::GridOutOfRange {
                what: "too few rings beyond the divisor window".into(),
            });
        }
        let mut divisor = Vec::new();
        for a in -a_max..=a_max {
            let b_span = (window * window - (a * a) as f64).sqrt().floor() as i64;
            let pos = (anchor_pos as i64 + a) as usize;
            if rings.rings[pos].n_points == 0 {
                return Err(Error::GridOutOfRange {
                    what: format!("divisor ring {pos} has no points"),
                });
            }
            for b in -b_span..=b_span {
                divisor.push((pos, b));
            }
        }

        let product = RingProductEval::new(Arc::clone(&rings))
            .with_rotation(theta)
            .with_punctures(&divisor);

        // constants: log g = punct_eval(w) - Σ log(-λ) + ln ρ + Σ_{≠z} log(z - λ)
        let mut log_const = LogComplex::from_f64(rho);
        for &(pos, b) in &divisor {
            let lam = product.lattice_point(pos, b);
            // ÷(w - λ) on top of the already divided (1 - w/λ): ×(-1/λ)
            log_const =
                log_const.mul(&LogComplex::new(-lam.norm().ln(), PI - lam.im.atan2(lam.re)));
            if !(pos == anchor_pos && b == 0) {
                log_const = log_const.mul(&LogComplex::from_complex(z - lam));
            }
        }
        // the leading factor is (w-z)/ρ, i.e. divide by ρ... the scale is
        // +ln ρ as derived; from_f64(rho) supplied it
        Ok(GaussianPeak { center: z, r_big, rho_center: rho, anchor_pos, product, divisor, log_const })
    }

    /// Convenience: anchored build from scratch at a given center.
    pub fn at(w: &RadialWeight, z: Complex64, r_big: f64) -> Result<GaussianPeak> {
        let s = z.norm();
        let a_max = (r_big * r_big / (2.0 * PI)).floor() as usize;
        let mut r = s;
        for _ in 0..a_max + 26 {
            let rho = w.rho(r)?;
            r = (r + (2.0 * PI).sqrt() * rho).min(w.safe_radius() * 0.999_999);
        }
        let rings = Arc::new(anchored_rings(w, s, r)?);
        GaussianPeak::build(w, rings, z.im.atan2(z.re), r_big)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn r_big(&self) -> f64 {
        self.r_big
    }

    pub fn rho_center(&self) -> f64 {
        self.rho_center
    }

    pub fn anchor_pos(&self) -> usize {
        self.anchor_pos
    }

    pub fn rings(&self) -> &RingSequence {
        self.product.rings()
    }

    pub fn rings_arc(&self) -> Arc<RingSequence> {
        self.product.rings_arc()
    }

    pub fn divisor_len(&self) -> usize {
        self.divisor.len()
    }

    /// Distance from w to the mapped divisor grid.
    pub fn dist_to_divisor(&self, w_pt: Complex64) -> f64 {
        let r = w_pt.norm();
        let rings = &self.product.rings().rings;
        let mut best = f64::INFINITY;
        for &(pos, b) in &self.divisor {
            // cheap radial prune
            if (rings[pos].s - r).abs() < best {
                let lam = self.product.lattice_point(pos, b);
                best = best.min((w_pt - lam).norm());
            }
        }
        best
    }

    /// log g(w).
    pub fn eval(&self, w_pt: Complex64) -> Result<LogComplex> {
        Ok(self.product.eval(w_pt)?.mul(&self.log_const))
    }

    /// `log|g(w)| - h(|w|)`.
    pub fn normalized(&self, w: &RadialWeight, w_pt: Complex64) -> Result<f64> {
        Ok(self.eval(w_pt)?.log_mag - w.h(w_pt.norm()))
    }

    /// Gaussian band value inside `D(z, Rρ(z))`:
    /// `log|g(w)| - h(|w|) + |z-w|²/(4ρ(z)²)`; bounded when the profile holds.
    pub fn band_value(&self, w: &RadialWeight, w_pt: Complex64) -> Result<f64> {
        let d2 = (w_pt - self.center).norm_sqr();
        Ok(self.normalized(w, w_pt)? + d2 / (4.0 * self.rho_center * self.rho_center))
    }

    /// Decay margin outside: `log c + (R²/4)·log(R²·min(ρz,ρw)²/(e|z-w|²))`
    /// minus the normalized value.
    pub fn decay_margin(&self, w: &RadialWeight, w_pt: Complex64, log_c: f64) -> Result<f64> {
        let rho_w = w.rho(w_pt.norm())?;
        let d2 = (w_pt - self.center).norm_sqr();
        let rho_min = self.rho_center.min(rho_w);
        let envelope = 0.25
            * self.r_big
            * self.r_big
            * (self.r_big * self.r_big * rho_min * rho_min / (E * d2)).ln();
        Ok(log_c + envelope - self.normalized(w, w_pt)?)
    }
}

// ------------------------------------------------------------------
// certified Taylor truncation

/// Degree-N truncation of an entire function with `|F(z)| ≤ e^{|z|²}`,
/// carrying the three certified regional bounds.
#[derive(Clone, Debug)]
pub struct TaylorTruncation {
    coeffs: Vec<Complex64>,
    eps: f64,
}

/// Cauchy bound on the k-th coefficient of functions with |F| ≤ e^{|z|²}:
/// `inf_r e^{r²}/r^k = exp(-(k/2)·log(k/(2e)))`.
pub fn coeff_bound_ln(k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        let kf = k as f64;
        -(kf / 2.0) * (kf / (2.0 * E)).ln()
    }
}

/// Truncate a coefficient stream to degree `n`, verifying the growth
/// hypothesis coefficient by coefficient.
pub fn taylor_truncate(coeffs: &[Complex64], n: usize, eps: f64) -> Result<TaylorTruncation> {
    for (k, c) in coeffs.iter().enumerate() {
        let bound = coeff_bound_ln(k).exp();
        if c.norm() > bound * (1.0 + 1e-9) {
            return Err(Error::GrowthHypothesis { index: k, value: c.norm(), bound });
        }
    }
    let mut kept: Vec<Complex64> = coeffs.iter().take(n + 1).cloned().collect();
    while kept.len() < n + 1 {
        kept.push(Complex64::new(0.0, 0.0));
    }
    Ok(TaylorTruncation { coeffs: kept, eps })
}

impl TaylorTruncation {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The scale R = √(2N/(1-ε)) associated with the truncation.
    pub fn r_scale(&self) -> f64 {
        (2.0 * self.degree() as f64 / (1.0 - self.eps)).sqrt()
    }

    /// Horner evaluation.
    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * zeta + c;
        }
        acc
    }

    /// Inner region radius √(N/(4e)) where the tail is certified.
    pub fn inner_radius(&self) -> f64 {
        (self.degree() as f64 / (4.0 * E)).sqrt()
    }

    /// Certified tail bound `2^{-(N-3)/2}` on the inner region.
    pub fn inner_bound(&self) -> f64 {
        2.0f64.powf(-((self.degree() as f64 - 3.0) / 2.0))
    }

    /// Certified mid-region bound `log[(N+1)·e^{|z|²}]` for
    /// √(N/(4e)) < |z| ≤ √(N/2).
    pub fn mid_bound_ln(&self, abs_z: f64) -> f64 {
        ((self.degree() + 1) as f64).ln() + abs_z * abs_z
    }

    /// Certified outer bound `log[(N+1)·|z|^N·(2e/N)^{N/2}]` for |z| > √(N/2).
    pub fn outer_bound_ln(&self, abs_z: f64) -> f64 {
        let n = self.degree() as f64;
        ((n + 1.0).ln()) + n * abs_z.ln() + 0.5 * n * (2.0 * E / n).ln()
    }
}

/// The zero-killing substitute for the inner interpolation factor: the
/// normalized finite product `Π_{γ ∈ neighbors, |γ| ≤ r'} (1 - ζ/γ)`,
/// truncated to the degree budget N = ⌊R²(1-ε)/2⌋. When the coefficient
/// growth check fails, `r'` shrinks; if no radius works the atom falls back
/// to F ≡ 1.
pub fn node_killer(
    neighbors_rescaled: &[Complex64],
    r_big: f64,
    eps: f64,
) -> (TaylorTruncation, f64, bool) {
    let n_cap = (r_big * r_big * (1.0 - eps) / 2.0).floor() as usize;
    let mut r_prime = r_big;
    while r_prime >= 2.0 {
        let zeros: Vec<Complex64> = neighbors_rescaled
            .iter()
            .filter(|g| g.norm() > 1e-9 && g.norm() <= r_prime)
            .cloned()
            .collect();
        if zeros.len() <= n_cap {
            // expand Π (1 - ζ/γ)
            let mut coeffs = vec![Complex64::new(1.0, 0.0)];
            for g in &zeros {
                let w = -1.0 / g;
                coeffs.push(Complex64::new(0.0, 0.0));
                for i in (1..coeffs.len()).rev() {
                    let lower = coeffs[i - 1];
                    coeffs[i] += lower * w;
                }
            }
            if let Ok(t) = taylor_truncate(&coeffs, n_cap, eps) {
                return (t, r_prime, false);
            }
        }
        r_prime *= 0.8;
    }
    let one = taylor_truncate(&[Complex64::new(1.0, 0.0)], n_cap.max(1), eps)
        .expect("constant satisfies the growth bound");
    (one, 0.0, true)
}

// ------------------------------------------------------------------
// interpolation atoms

/// One interpolation atom `V_n = a_n·U_{z_n}/U_{z_n}(z_n)` with
/// `U_z(w) = g_{z,R}(w)·(T_N F)((w - z)/ρ(z))`.
pub struct InterpAtom {
    peak: Arc<GaussianPeak>,
    killer: Arc<TaylorTruncation>,
    data: LogComplex,
    log_u_center: LogComplex,
}

impl InterpAtom {
    pub fn new(
        peak: Arc<GaussianPeak>,
        killer: Arc<TaylorTruncation>,
        data: LogComplex,
    ) -> Result<InterpAtom> {
        let at_center = peak.eval(peak.center())?;
        let t0 = killer.eval(Complex64::new(0.0, 0.0));
        let log_u_center = at_center.mul(&LogComplex::from_complex(t0));
        if log_u_center.is_zero() || !log_u_center.log_mag.is_finite() {
            return Err(Error::DegenerateAtom);
        }
        Ok(InterpAtom { peak, killer, data, log_u_center })
    }

    pub fn center(&self) -> Complex64 {
        self.peak.center()
    }

    pub fn data(&self) -> LogComplex {
        self.data
    }

    pub fn rho_center(&self) -> f64 {
        self.peak.rho_center()
    }

    /// log V(w); exactly `data` at the atom's own node.
    pub fn eval(&self, w_pt: Complex64) -> Result<LogComplex> {
        if self.data.is_zero() {
            return Ok(LogComplex::ZERO);
        }
        let zeta = (w_pt - self.peak.center()) / self.peak.rho_center();
        let u = self.peak.eval(w_pt)?.mul(&LogComplex::from_complex(self.killer.eval(zeta)));
        Ok(self.data.mul(&u.div(&self.log_u_center)))
    }
}

// ------------------------------------------------------------------
// tail sums

/// Far-field tail sum: over nodes with `|z - z_n| > R·ρ(z_n)`,
/// `Σ (R²·min(ρ(z_n),ρ(z))²/(e·|z - z_n|²))^{εR²/5}`, computed in log space
/// per term and truncated below 1e-30. Requires a d_ρ-separated set.
pub fn tail_sum(
    w: &RadialWeight,
    set: &PointSet,
    z: Complex64,
    r_big: f64,
    eps: f64,
) -> Result<f64> {
    if set.len() >= 2 && separation(w, set)? <= 0.0 {
        return Err(Error::SeparationRequired);
    }
    let rho_z = w.rho(z.norm())?;
    let exponent = eps * r_big * r_big / 5.0;
    // global reject radius: even with min ρ = ρ(z) the term is < 1e-30
    let ln_cut = -30.0 * std::f64::consts::LN_10;
    let d2_reject =
        r_big * r_big * rho_z * rho_z / E * (-ln_cut / exponent).exp();
    let mut sum = 0.0;
    for (i, p) in set.points().iter().enumerate() {
        let d2 = (p - z).norm_sqr();
        if d2 > d2_reject {
            continue;
        }
        let rho_n = set.rho_at(i);
        if d2 <= r_big * r_big * rho_n * rho_n {
            continue; // inside the exclusion disc
        }
        let rho_min = rho_n.min(rho_z);
        let ln_term = exponent * (r_big * r_big * rho_min * rho_min / (E * d2)).ln();
        if ln_term >= ln_cut {
            sum += ln_term.exp();
        }
    }
    Ok(sum)
}
