//! Atomization of the measure `Δh·dm₂/2π` into concentric rings of integer
//! mass.
//!
//! Starting from `r_0 = 0`, each step finds the first radius `r*` with
//! `(r* - r_k)·M(r_k, r*) = 2π` (where `M(a,b) = ∫_a^b Δh(t)·t dt`), then
//! pushes on to the smallest `r_{k+1} ≥ r*` making `N_k = M(r_k, r_{k+1})` a
//! natural number. The ring radius `s_k` is fixed by the log-centroid
//! relation `log s_k = (1/N_k)·∫ Δh·t·log t dt`. The resulting lattice is
//! `{s_k e^{2πim/N_k}}`.

use crate::weight::{Domain, RadialWeight};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// One annulus `r_lo ≤ |z| < r_hi` carrying `n_points` unit masses on the
/// circle of radius `s`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Ring {
    pub index: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub s: f64,
    pub n_points: u64,
}

impl Ring {
    pub fn width(&self) -> f64 {
        self.r_hi - self.r_lo
    }
}

/// Why ring construction stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ReachedRMax,
    RingOverflow,
}

/// The full ring decomposition of a weight out to some radius.
#[derive(Clone, Debug)]
pub struct RingSequence {
    pub domain: Domain,
    pub rings: Vec<Ring>,
    /// Radius the sequence was anchored at, when built by `anchored_rings`.
    pub anchored_at: Option<f64>,
    /// Index of the anchor ring in `rings` (its `s` equals `anchored_at`).
    pub anchor_index: Option<usize>,
    /// |rounded - true core mass| when a rounded core ring was formed.
    pub core_mass_rounding: Option<f64>,
    pub stop: StopReason,
}

impl RingSequence {
    pub fn len(&self) -> usize {
        self.rings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    pub fn outer_radius(&self) -> f64 {
        self.rings.last().map_or(0.0, |r| r.r_hi)
    }

    pub fn total_points(&self) -> u64 {
        self.rings.iter().map(|r| r.n_points).sum()
    }

    /// First index from which `n_points` is non-decreasing to the end.
    pub fn n_monotone_from(&self) -> usize {
        let n = self.rings.len();
        let mut from = 0;
        for i in 1..n {
            if self.rings[i].n_points < self.rings[i - 1].n_points {
                from = i;
            }
        }
        from
    }
}

const MASS_REL_TOL: f64 = 1e-10;

/// Normalizer of the ring-step equation: the construction solves
/// `(r* - r_k)·M(r_k, r*)/ν(r_k) = 2π`. On the disc ν ≡ 1 (the paper's form;
/// radii sit near 1). On the plane ν(r_k) = r_k, which is what makes
/// `N_k(r_{k+1}-r_k)/r_k → 2π` and `(r_{k+1}-r_k)/ρ(r_k) → √(2π)` hold; the
/// first ring (r_0 = 0) keeps ν = 1.
fn step_normalizer(domain: Domain, r_k: f64) -> f64 {
    match domain {
        Domain::Disc => 1.0,
        Domain::Plane => {
            if r_k > 0.0 {
                r_k
            } else {
                1.0
            }
        }
    }
}

/// Grow a bracket endpoint: double the distance from `base` on the plane,
/// halve the gap to the boundary cap on the disc.
fn grow_toward(cap: f64, base: f64, hi: f64) -> f64 {
    if cap.is_finite() {
        hi + 0.5 * (cap - hi)
    } else {
        base + 2.0 * (hi - base)
    }
}

/// Solve `M(lo, r) = target` for `r ∈ [bracket_lo, bracket_hi]` given the
/// monotone mass map. Newton from the midpoint with bisection fallback.
fn solve_mass(
    w: &RadialWeight,
    lo: f64,
    target: f64,
    mut a: f64,
    mut b: f64,
) -> Result<f64> {
    let f = |r: f64| -> Result<f64> { Ok(w.ring_mass(lo, r)? - target) };
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::BadInput(format!(
            "mass bracket invalid: M({a}) - t = {fa}, M({b}) - t = {fb}"
        )));
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x)?;
        if fx.abs() <= MASS_REL_TOL * target.max(1.0) {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        // Newton step using the exact derivative M' = Δh(r)·r
        let slope = w.d2h(x) * x + w.dh(x);
        let newton = x - fx / slope;
        x = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if b - a < f64::EPSILON * b.abs() {
            return Ok(x);
        }
    }
    let _ = fa;
    Ok(x)
}

/// Find `r*` with `(r* - r_k)·M(r_k, r*)/ν(r_k) = 2π`, then the next
/// integer-mass boundary. Returns the ring (with `index` 0; callers re-index).
pub fn next_ring(w: &RadialWeight, r_k: f64) -> Result<Ring> {
    let cap = w.safe_radius();
    let nu = step_normalizer(w.domain(), r_k);
    let phi = |r: f64| -> Result<f64> { Ok((r - r_k) * w.ring_mass(r_k, r)? / nu - 2.0 * PI) };

    // bracket r*: widen until phi ≥ 0
    let mut hi = r_k + initial_step(w, r_k).min(0.5 * (cap - r_k));
    let mut lo = r_k;
    loop {
        if cap - hi <= 1e-15 * cap.min(1e15) {
            let partial = w.ring_mass(r_k, hi).unwrap_or(f64::NAN);
            return Err(Error::RingOverflow { r: r_k, partial_mass: partial });
        }
        let v = phi(hi)?;
        if v >= 0.0 {
            break;
        }
        lo = hi;
        hi = grow_toward(cap, r_k, hi);
    }
    // bisection + Newton on φ
    let mut a = lo;
    let mut b = hi;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = phi(x)?;
        if fx.abs() <= 2.0 * PI * MASS_REL_TOL {
            break;
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let m = w.ring_mass(r_k, x)?;
        let slope = (m + (x - r_k) * (w.d2h(x) * x + w.dh(x))) / nu;
        let newton = x - fx / slope;
        x = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if b - a < f64::EPSILON * b.abs() {
            break;
        }
    }
    let r_star = x;

    let m_star = w.ring_mass(r_k, r_star)?;
    let n = if (m_star - m_star.round()).abs() <= 1e-9 * m_star.max(1.0) {
        m_star.round().max(1.0)
    } else {
        m_star.ceil()
    };

    // smallest r_{k+1} ≥ r* with M(r_k, r_{k+1}) = n
    let r_next = if (m_star - n).abs() <= 1e-9 * n {
        r_star
    } else {
        let mut hi = r_star + (r_star - r_k).min(0.5 * (cap - r_star));
        loop {
            if cap - hi <= 1e-15 * cap.min(1e15) {
                return Err(Error::RingOverflow { r: r_star, partial_mass: m_star });
            }
            if w.ring_mass(r_k, hi)? >= n {
                break;
            }
            hi = grow_toward(cap, r_star, hi);
        }
        solve_mass(w, r_k, n, r_star, hi)?
    };

    let s = w.log_centroid(r_k, r_next, n)?.exp();
    Ok(Ring { index: 0, r_lo: r_k, r_hi: r_next, s, n_points: n as u64 })
}

fn initial_step(w: &RadialWeight, r_k: f64) -> f64 {
    // a few ρ if available, else something small relative to the domain
    let probe = if r_k > 0.0 { r_k } else { 0.1f64.min(0.5 * w.safe_radius()) };
    let room = 0.5 * (w.safe_radius() - r_k);
    match w.rho(probe) {
        Ok(rho) => (2.5 * rho).min(room).max(1e-12),
        Err(_) => room * 0.5,
    }
}

/// Build rings from the origin until the next ring would cross `r_max`.
pub fn build_rings(w: &RadialWeight, r_max: f64) -> Result<RingSequence> {
    if !(r_max > 0.0) || !w.domain().contains(r_max) {
        return Err(Error::BadInput(format!("r_max {r_max} outside domain interior")));
    }
    let mut rings: Vec<Ring> = Vec::new();
    let mut r_k = 0.0;
    let mut stop = StopReason::ReachedRMax;
    loop {
        match next_ring(w, r_k) {
            Ok(mut ring) => {
                if ring.r_hi > r_max {
                    break;
                }
                ring.index = rings.len();
                r_k = ring.r_hi;
                rings.push(ring);
            }
            Err(Error::RingOverflow { .. }) => {
                stop = StopReason::RingOverflow;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RingSequence {
        domain: w.domain(),
        rings,
        anchored_at: None,
        anchor_index: None,
        core_mass_rounding: None,
        stop,
    })
}

/// Build a ring sequence in which some ring has its centroid radius exactly
/// at `s`: one ring is solved to straddle `s`, the sequence is extended
/// outward by `next_ring` and inward by the backward recursion, and leftover
/// core mass is absorbed into a rounded inner ring.
pub fn anchored_rings(w: &RadialWeight, s: f64, r_max: f64) -> Result<RingSequence> {
    if !(s > 0.0 && w.domain().contains(s) && r_max > s) {
        return Err(Error::BadInput(format!("anchor {s} / r_max {r_max} invalid")));
    }

    // Use the plain construction to pick the point count N of the ring whose
    // centroid band contains s (s_k ≤ s < s_{k+1}).
    let mut base_r = 0.0;
    let mut base_n = None;
    let mut prev: Option<Ring> = None;
    loop {
        let ring = match next_ring(w, base_r) {
            Ok(r) => r,
            Err(Error::RingOverflow { .. }) => break,
            Err(e) => return Err(e),
        };
        if ring.s > s {
            base_n = prev.map(|p| p.n_points).or(Some(ring.n_points));
            break;
        }
        base_r = ring.r_hi;
        prev = Some(ring);
        if ring.r_lo > s {
            break;
        }
    }
    let n_anchor = base_n.or_else(|| prev.map(|p| p.n_points)).ok_or(Error::AnchorInfeasible { s })? as f64;

    // Solve the straddling ring: outer bisection on r_lo, inner solve of
    // M(r_lo, r_hi) = n_anchor, matching the log centroid to s.
    let cap = w.safe_radius();
    let centroid_of = |r_lo: f64| -> Result<(f64, f64)> {
        let mut hi = s + (s - r_lo).max(1e-6).min(0.5 * (cap - s));
        loop {
            if cap - hi <= 1e-15 * cap.min(1e15) {
                return Err(Error::AnchorInfeasible { s });
            }
            if w.ring_mass(r_lo, hi)? >= n_anchor {
                break;
            }
            hi = grow_toward(cap, s, hi);
        }
        let r_hi = solve_mass(w, r_lo, n_anchor, r_lo, hi)?;
        let c = w.log_centroid(r_lo, r_hi, n_anchor)?.exp();
        Ok((c, r_hi))
    };

    // bracket in r_lo: centroid increases with r_lo
    let mut lo = 0.0;
    let mut hi = s * (1.0 - 1e-12);
    let (c_lo, _) = centroid_of(lo)?;
    if c_lo > s {
        return Err(Error::AnchorInfeasible { s });
    }
    let mut r_lo_anchor = 0.0;
    let mut r_hi_anchor = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (c, rh) = centroid_of(mid)?;
        if (c - s).abs() <= 1e-13 * s.max(1.0) || hi - lo < f64::EPSILON * s {
            r_lo_anchor = mid;
            r_hi_anchor = rh;
            break;
        }
        if c < s {
            lo = mid;
        } else {
            hi = mid;
        }
        r_lo_anchor = mid;
        r_hi_anchor = rh;
    }

    let anchor = Ring {
        index: 0,
        r_lo: r_lo_anchor,
        r_hi: r_hi_anchor,
        s,
        n_points: n_anchor as u64,
    };

    // backward recursion toward the origin
    let mut inner: Vec<Ring> = Vec::new();
    let mut cur = r_lo_anchor;
    let core_rounding;
    loop {
        let total_inside = w.ring_mass(0.0, cur)?;
        if cur * total_inside / step_normalizer(w.domain(), cur) < 2.0 * PI {
            // absorb the leftover into a rounded core ring
            let n_core = total_inside.round();
            core_rounding = Some((total_inside - n_core).abs());
            let s_core = if n_core >= 1.0 {
                w.log_centroid(0.0, cur, total_inside)?.exp()
            } else {
                0.5 * cur
            };
            inner.push(Ring {
                index: 0,
                r_lo: 0.0,
                r_hi: cur,
                s: s_core,
                n_points: n_core as u64,
            });
            break;
        }
        // r* with (cur - r*)·M(r*, cur)/ν(cur) = 2π; ψ decreasing in r*
        let nu = step_normalizer(w.domain(), cur);
        let psi = |r: f64| -> Result<f64> { Ok((cur - r) * w.ring_mass(r, cur)? / nu - 2.0 * PI) };
        let mut a = 0.0;
        let mut b = cur;
        let mut r_star = 0.5 * cur;
        for _ in 0..200 {
            let v = psi(r_star)?;
            if v.abs() <= 2.0 * PI * MASS_REL_TOL {
                break;
            }
            if v > 0.0 {
                a = r_star;
            } else {
                b = r_star;
            }
            r_star = 0.5 * (a + b);
            if b - a < f64::EPSILON * cur {
                break;
            }
        }
        let v_star = w.ring_mass(r_star, cur)?;
        let n = if (v_star - v_star.round()).abs() <= 1e-9 * v_star.max(1.0) {
            v_star.round().max(1.0)
        } else {
            v_star.ceil()
        };
        if n > total_inside * (1.0 + 1e-12) {
            // no integer reachable with r ≥ 0: absorb everything into the core
            let n_core = total_inside.round();
            core_rounding = Some((total_inside - n_core).abs());
            let s_core = w.log_centroid(0.0, cur, total_inside)?.exp();
            inner.push(Ring { index: 0, r_lo: 0.0, r_hi: cur, s: s_core, n_points: n_core as u64 });
            break;
        }
        // largest r ≤ r* with M(r, cur) = n (M decreasing in r)
        let r_lo_ring = solve_mass_decreasing(w, cur, n, r_star)?;
        let s_ring = w.log_centroid(r_lo_ring, cur, n)?.exp();
        inner.push(Ring { index: 0, r_lo: r_lo_ring, r_hi: cur, s: s_ring, n_points: n as u64 });
        cur = r_lo_ring;
    }
    inner.reverse();

    // forward continuation past the anchor
    let mut rings = inner;
    rings.push(anchor);
    let anchor_pos = rings.len() - 1;
    let mut r_k = r_hi_anchor;
    let mut stop = StopReason::ReachedRMax;
    loop {
        match next_ring(w, r_k) {
            Ok(ring) => {
                if ring.r_hi > r_max {
                    break;
                }
                r_k = ring.r_hi;
                rings.push(ring);
            }
            Err(Error::RingOverflow { .. }) => {
                stop = StopReason::RingOverflow;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    for (i, ring) in rings.iter_mut().enumerate() {
        ring.index = i;
    }
    Ok(RingSequence {
        domain: w.domain(),
        rings,
        anchored_at: Some(s),
        anchor_index: Some(anchor_pos),
        core_mass_rounding: core_rounding,
        stop,
    })
}

/// Solve `M(r, hi) = target` for `r` below `bracket_hi` (mass decreasing in r).
fn solve_mass_decreasing(w: &RadialWeight, hi: f64, target: f64, bracket_hi: f64) -> Result<f64> {
    let mut a = 0.0;
    let mut b = bracket_hi;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = w.ring_mass(x, hi)? - target;
        if fx.abs() <= MASS_REL_TOL * target.max(1.0) {
            return Ok(x);
        }
        if fx > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let slope = -(w.d2h(x) * x + w.dh(x));
        let newton = x - fx / slope;
        x = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if b - a < f64::EPSILON * hi {
            return Ok(x);
        }
    }
    Ok(x)
}

/// The four per-ring ratios whose limits the construction guarantees:
/// `(r_{k+1}-r_k)/ρ(r_k) → √(2π)`, `N_k(r_{k+1}-r_k) → 2π` (disc) resp.
/// `N_k(r_{k+1}-r_k)/r_k → 2π` (plane), consecutive width ratio → 1, and
/// `(r_{k+1}-s_k)/(r_{k+1}-r_k) → 1/2`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RingRatios {
    pub index: usize,
    pub width_over_rho: f64,
    pub mass_width: f64,
    pub width_ratio: f64,
    pub centroid_frac: f64,
}

pub fn asymptotic_ratios(w: &RadialWeight, seq: &RingSequence) -> Vec<RingRatios> {
    let mut out = Vec::new();
    for i in 1..seq.rings.len() {
        let r = &seq.rings[i];
        let prev = &seq.rings[i - 1];
        let rho = match w.rho(r.r_lo) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let mass_width = match seq.domain {
            Domain::Disc => r.n_points as f64 * r.width(),
            Domain::Plane => r.n_points as f64 * r.width() / r.r_lo,
        };
        out.push(RingRatios {
            index: r.index,
            width_over_rho: r.width() / rho,
            mass_width,
            width_ratio: r.width() / prev.width(),
            centroid_frac: (r.r_hi - r.s) / r.width(),
        });
    }
    out
}

// ------------------------------------------------------------------
// CSV io: header `k,r_lo,r_hi,s,N`, radii with 17 significant digits.

pub fn write_rings_csv<W: Write>(mut out: W, seq: &RingSequence) -> Result<()> {
    writeln!(out, "k,r_lo,r_hi,s,N")?;
    for r in &seq.rings {
        writeln!(out, "{},{:.16e},{:.16e},{:.16e},{}", r.index, r.r_lo, r.r_hi, r.s, r.n_points)?;
    }
    Ok(())
}

pub fn read_rings_csv<R: BufRead>(domain: Domain, input: R) -> Result<RingSequence> {
    let mut rings = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if lineno == 0 && line.starts_with('k') {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 5 {
            return Err(Error::BadInput(format!("ring csv line {}: want 5 fields", lineno + 1)));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::BadInput(format!("{e}")));
        rings.push(Ring {
            index: fields[0].parse().map_err(|e| Error::BadInput(format!("{e}")))?,
            r_lo: parse(fields[1])?,
            r_hi: parse(fields[2])?,
            s: parse(fields[3])?,
            n_points: fields[4].parse().map_err(|e| Error::BadInput(format!("{e}")))?,
        });
    }
    Ok(RingSequence {
        domain,
        rings,
        anchored_at: None,
        anchor_index: None,
        core_mass_rounding: None,
        stop: StopReason::ReachedRMax,
    })
}
