//! Partial products of the Weierstrass sigma function over the square
//! lattice.
//!
//! For a scale R ≥ 10 the lattice is `Σ_R = (ℤ+iℤ) ∩ {|λ| ≤ R²}` and the
//! product `P_R(z) = z·Π_{λ∈Σ∖0} (1 - z/λ)`. Inside `|z| ≤ R` it grows like
//! `dist(z,Σ)·e^{(π/2)|z|²}`; past R it is bounded below by
//! `dist(z,Σ)·(e|z|²/R²)^{(π/2)R²}` up to constants. The sums run over
//! concentric shells with compensated accumulation, since cancellation
//! across the lattice is the dominant error source.

use crate::logcx::{wrap_angle, LogComplex};
use crate::report::BandSummary;
use crate::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The square-lattice point set `Σ_R`, sorted into concentric shells.
pub struct SigmaLattice {
    r_scale: f64,
    pts: Vec<Complex64>,
}

impl SigmaLattice {
    pub fn new(r_scale: f64) -> SigmaLattice {
        assert!(r_scale >= 1.0, "scale must be ≥ 1");
        let r2 = r_scale * r_scale;
        let lim = r2.floor() as i64;
        let norm_cap = r2 * r2;
        let mut raw: Vec<(i64, i64, i64)> = Vec::new();
        for a in -lim..=lim {
            for b in -lim..=lim {
                let n2 = a * a + b * b;
                if n2 as f64 <= norm_cap {
                    raw.push((n2, a, b));
                }
            }
        }
        raw.sort_unstable();
        let pts = raw.iter().map(|&(_, a, b)| Complex64::new(a as f64, b as f64)).collect();
        SigmaLattice { r_scale, pts }
    }

    pub fn scale(&self) -> f64 {
        self.r_scale
    }

    /// Number of lattice points including the origin.
    pub fn card(&self) -> usize {
        self.pts.len()
    }

    /// Distance from z to Σ (closed form: round the coordinates).
    pub fn dist(&self, z: Complex64) -> f64 {
        let nearest = Complex64::new(z.re.round(), z.im.round());
        if nearest.norm() <= self.r_scale * self.r_scale {
            (z - nearest).norm()
        } else {
            // outside the lattice disc the nearest point lies on its rim;
            // fall back to a small local scan
            let mut best = f64::INFINITY;
            for da in -1..=1 {
                for db in -1..=1 {
                    let p = nearest + Complex64::new(da as f64, db as f64);
                    if p.norm() <= self.r_scale * self.r_scale {
                        best = best.min((z - p).norm());
                    }
                }
            }
            best
        }
    }

    /// `log P_R(z)`: compensated shell-ordered summation of
    /// `log z + Σ log(1 - z/λ)`.
    pub fn eval(&self, z: Complex64) -> LogComplex {
        if z.re == 0.0 && z.im == 0.0 {
            return LogComplex::ZERO;
        }
        let one = Complex64::new(1.0, 0.0);
        let mut mag = 0.5 * z.norm_sqr().ln();
        let mut mag_c = 0.0;
        let mut arg = z.im.atan2(z.re);
        let mut arg_c = 0.0;
        let add = |x: f64, sum: &mut f64, comp: &mut f64| {
            let s = *sum + x;
            if sum.abs() >= x.abs() {
                *comp += (*sum - s) + x;
            } else {
                *comp += (x - s) + *sum;
            }
            *sum = s;
        };
        for &lam in &self.pts[1..] {
            let term = one - z / lam;
            if term.re == 0.0 && term.im == 0.0 {
                return LogComplex::ZERO;
            }
            add(0.5 * term.norm_sqr().ln(), &mut mag, &mut mag_c);
            add(term.im.atan2(term.re), &mut arg, &mut arg_c);
        }
        LogComplex::new(mag + mag_c, wrap_angle(arg + arg_c))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SigmaBandReport {
    pub r_scale: f64,
    pub lattice_card: usize,
    pub grid_points: usize,
    pub dist_floor: f64,
    pub seed: u64,
    pub band: BandSummary,
}

/// Growth band inside `|z| ≤ R`: statistics of
/// `log|P_R(z)| - (π/2)|z|² - log dist(z,Σ)` over a seeded grid with
/// `dist(z,Σ) ≥ dist_floor`.
pub fn band_inside(
    lat: &SigmaLattice,
    n_points: usize,
    dist_floor: f64,
    seed: u64,
) -> Result<SigmaBandReport> {
    let grid = sample_disc(lat, lat.r_scale, n_points, dist_floor, seed);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&z| lat.eval(z).log_mag - 0.5 * PI * z.norm_sqr() - lat.dist(z).ln())
        .collect();
    Ok(SigmaBandReport {
        r_scale: lat.r_scale,
        lattice_card: lat.card(),
        grid_points: grid.len(),
        dist_floor,
        seed,
        band: BandSummary::from_values(&values),
    })
}

/// Lower-bound margins past the scale: for samples `R < |z| ≤ R^{1.5}`,
/// `log|P_R(z)| - log dist(z,Σ) - (π/2)R²·log(e|z|²/R²)`; the construction
/// guarantees these are bounded below by one constant.
pub fn lower_margins(lat: &SigmaLattice, n_samples: usize, seed: u64) -> Vec<(Complex64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = lat.r_scale;
    let mut samples = Vec::with_capacity(n_samples);
    while samples.len() < n_samples {
        let u: f64 = rng.gen();
        let radius = r * r.powf(0.5 * u.max(1e-6));
        let theta = 2.0 * PI * rng.gen::<f64>();
        let z = Complex64::from_polar(radius, theta);
        if lat.dist(z) >= 0.05 {
            samples.push(z);
        }
    }
    samples
        .par_iter()
        .map(|&z| {
            let m = lat.eval(z).log_mag
                - lat.dist(z).ln()
                - 0.5 * PI * r * r * (std::f64::consts::E * z.norm_sqr() / (r * r)).ln();
            (z, m)
        })
        .collect()
}

/// The margin integrand at a single point (shared by the continuity
/// cross-check with the inside band at |z| = R).
pub fn lower_margin_at(lat: &SigmaLattice, z: Complex64) -> f64 {
    let r = lat.r_scale;
    lat.eval(z).log_mag
        - lat.dist(z).ln()
        - 0.5 * PI * r * r * (std::f64::consts::E * z.norm_sqr() / (r * r)).ln()
}

/// Seeded rejection sample of the disc |z| ≤ radius with a dist floor.
pub fn sample_disc(
    lat: &SigmaLattice,
    radius: f64,
    n_points: usize,
    dist_floor: f64,
    seed: u64,
) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_points);
    let mut guard = 0usize;
    while out.len() < n_points && guard < 100 * n_points + 1000 {
        guard += 1;
        let rr = radius * rng.gen::<f64>().sqrt();
        let theta = 2.0 * PI * rng.gen::<f64>();
        let z = Complex64::from_polar(rr, theta);
        if lat.dist(z) >= dist_floor {
            out.push(z);
        }
    }
    out
}
