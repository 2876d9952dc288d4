//! Norms, sampling/interpolation experiments, regularity checks, the Jensen
//! counting diagnostic, and the thinned-lattice index demo.
//!
//! All function values move through [`LogComplex`]; weighted norms are
//! assembled with max-shift exponentiation so nothing overflows even when
//! `e^h` is astronomically large.

use crate::geometry::{separation, PointSet};
use crate::logcx::LogComplex;
use crate::peaks::{node_killer, GaussianPeak, TaylorTruncation};
use crate::products::RingProductEval;
use crate::weight::{RadialWeight, RegularityClass};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

// ------------------------------------------------------------------
// test functions

/// Building blocks of the test-function ensembles: canonical products,
/// Gaussian peaks, and peaks multiplied by low-degree polynomials in the
/// rescaled variable.
#[derive(Clone)]
pub enum Atom {
    Const(f64),
    Product(Arc<RingProductEval>),
    Peak(Arc<GaussianPeak>),
    PolyPeak { peak: Arc<GaussianPeak>, coeffs: Vec<Complex64> },
}

/// A finite combination Σ c_j·Atom_j evaluated in log space.
#[derive(Clone)]
pub struct TestFunction {
    terms: Vec<(Complex64, Atom)>,
}

impl TestFunction {
    pub fn new(terms: Vec<(Complex64, Atom)>) -> TestFunction {
        TestFunction { terms }
    }

    pub fn constant(c: f64) -> TestFunction {
        TestFunction { terms: vec![(Complex64::new(1.0, 0.0), Atom::Const(c))] }
    }

    pub fn eval_log(&self, z: Complex64) -> Result<LogComplex> {
        let mut acc = LogComplex::ZERO;
        for (c, atom) in &self.terms {
            let v = match atom {
                Atom::Const(x) => LogComplex::from_f64(*x),
                Atom::Product(p) => p.eval(z)?,
                Atom::Peak(p) => p.eval(z)?,
                Atom::PolyPeak { peak, coeffs } => {
                    let zeta = (z - peak.center()) / peak.rho_center();
                    let mut poly = Complex64::new(0.0, 0.0);
                    for c in coeffs.iter().rev() {
                        poly = poly * zeta + c;
                    }
                    peak.eval(z)?.mul(&LogComplex::from_complex(poly))
                }
            };
            acc = acc.add(&v.mul(&LogComplex::from_complex(*c)));
        }
        Ok(acc)
    }
}

// ------------------------------------------------------------------
// norms

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpaceNorm {
    Sup,
    Lp(f64),
}

/// Evaluation grid for continuous norms over an annulus: radial step
/// `ρ(r)/radial_per_rho`, angular count `min(angular cap, 2πr/(ρ/4))`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub annulus: (f64, f64),
    pub radial_per_rho: usize,
    pub angular_cap: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn cells(&self, w: &RadialWeight) -> Vec<(Complex64, f64)> {
        let golden = 0.618_033_988_749_894_9_f64;
        let mut out = Vec::new();
        let mut r = self.annulus.0.max(1e-9);
        let mut ring = 0usize;
        while r < self.annulus.1 {
            let rho = w.rho(r).unwrap_or((self.annulus.1 - self.annulus.0) * 0.1);
            let dr = (rho / self.radial_per_rho as f64)
                .min((self.annulus.1 - self.annulus.0) / 8.0)
                .max(1e-15 * self.annulus.1);
            let wanted = (2.0 * PI * r / (rho / 4.0)).ceil() as usize;
            let n_ang = wanted.clamp(32, self.angular_cap);
            let phase = ((self.seed as f64 + ring as f64) * golden).fract();
            let rad = (r + 0.5 * dr).min(self.annulus.1);
            let cell_area = rad * dr * 2.0 * PI / n_ang as f64;
            for j in 0..n_ang {
                let theta = 2.0 * PI * (j as f64 + phase) / n_ang as f64;
                out.push((Complex64::from_polar(rad, theta), cell_area));
            }
            r += dr;
            ring += 1;
            if ring > 100_000 {
                break;
            }
        }
        out
    }
}

/// log of the continuous norm: `log sup |f|e^{-h}` or
/// `(1/p)·log ∫ |f|^p e^{-ph} dm₂` over the grid region.
pub fn continuous_norm_log(
    w: &RadialWeight,
    f: &TestFunction,
    norm: SpaceNorm,
    grid: &[(Complex64, f64)],
) -> Result<f64> {
    let vals: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&(z, area)| -> Result<(f64, f64)> {
            let v = f.eval_log(z)?;
            Ok((v.log_mag - w.h(z.norm()), area))
        })
        .collect::<Result<Vec<_>>>()?;
    match norm {
        SpaceNorm::Sup => Ok(vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max)),
        SpaceNorm::Lp(p) => {
            let m = vals.iter().map(|v| p * v.0).fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            let sum: f64 = vals.iter().map(|v| (p * v.0 - m).exp() * v.1).sum();
            Ok((m + sum.ln()) / p)
        }
    }
}

/// log of the discrete norm over a point set:
/// `log sup_Γ |f|e^{-h}` or `(1/p)·log Σ |f|^p e^{-ph} ρ²`.
pub fn discrete_norm_log(
    w: &RadialWeight,
    f: &TestFunction,
    norm: SpaceNorm,
    set: &PointSet,
) -> Result<f64> {
    let vals: Vec<f64> = set
        .points()
        .par_iter()
        .map(|&z| -> Result<f64> { Ok(f.eval_log(z)?.log_mag - w.h(z.norm())) })
        .collect::<Result<Vec<_>>>()?;
    match norm {
        SpaceNorm::Sup => Ok(vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        SpaceNorm::Lp(p) => {
            let m = vals
                .iter()
                .enumerate()
                .map(|(i, v)| p * v + 2.0 * set.rho_at(i).ln())
                .fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            let sum: f64 = vals
                .iter()
                .enumerate()
                .map(|(i, v)| (p * v + 2.0 * set.rho_at(i).ln() - m).exp())
                .sum();
            Ok((m + sum.ln()) / p)
        }
    }
}

// ------------------------------------------------------------------
// regularity checks

/// Measured Lipschitz constant of `|f|e^{-h}` in the d_ρ metric over
/// sampled pairs in `D(z, Rρ(z)/2)`. Returns (constant, stability ratio
/// under doubling the pair count).
pub fn lipschitz_check(
    w: &RadialWeight,
    f: &TestFunction,
    z: Complex64,
    r_big: f64,
    pairs: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rho = w.rho(z.norm())?;
    let mut sample = |n: usize| -> Result<f64> {
        let mut max_ratio = 0.0f64;
        let mut max_val = f64::NEG_INFINITY;
        let mut pts = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            let rad = 0.5 * r_big * rho * rng.gen::<f64>().sqrt();
            let ang = 2.0 * PI * rng.gen::<f64>();
            let p = z + Complex64::from_polar(rad, ang);
            let v = (f.eval_log(p)?.log_mag - w.h(p.norm())).exp();
            max_val = max_val.max(v.ln());
            pts.push((p, v));
        }
        let scale = max_val.exp();
        for c in pts.chunks(2) {
            if c.len() < 2 {
                continue;
            }
            let (p1, v1) = c[0];
            let (p2, v2) = c[1];
            let d = crate::geometry::d_rho(w, p1, p2)?;
            if d > 1e-12 {
                max_ratio = max_ratio.max((v1 - v2).abs() / (d * scale));
            }
        }
        Ok(max_ratio)
    };
    let base = sample(pairs)?;
    let doubled = sample(2 * pairs)?;
    Ok((base.max(doubled), doubled / base.max(1e-300)))
}

/// Mean-value check: `c·(1/ρ(z)²)·∫_{D(z,Rρ)} |f|e^{-h} dm₂ - |f(z)|e^{-h(z)}`,
/// by polar quadrature around z. Positive margin confirms the sub-mean-value
/// bound with the constant c.
pub fn mean_value_margin(
    w: &RadialWeight,
    f: &TestFunction,
    z: Complex64,
    r_big: f64,
    c: f64,
) -> Result<f64> {
    let rho = w.rho(z.norm())?;
    let rad_max = r_big * rho;
    let n_rad = 48;
    let n_ang = 64;
    let mut integral = 0.0;
    for i in 0..n_rad {
        let t = rad_max * (i as f64 + 0.5) / n_rad as f64;
        let dt = rad_max / n_rad as f64;
        for j in 0..n_ang {
            let theta = 2.0 * PI * (j as f64 + 0.5) / n_ang as f64;
            let p = z + Complex64::from_polar(t, theta);
            if !w.domain().contains(p.norm()) {
                continue;
            }
            let v = (f.eval_log(p)?.log_mag - w.h(p.norm())).exp();
            integral += v * t * dt * 2.0 * PI / n_ang as f64;
        }
    }
    let lhs = (f.eval_log(z)?.log_mag - w.h(z.norm())).exp();
    Ok(c * integral / (rho * rho) - lhs)
}

/// Max over the ensemble of discrete-to-continuous L^p norm ratios.
pub fn discrete_norm_ratios(
    w: &RadialWeight,
    set: &PointSet,
    ensemble: &[TestFunction],
    p: f64,
    grid: &[(Complex64, f64)],
) -> Result<Vec<f64>> {
    ensemble
        .iter()
        .map(|f| {
            let d = discrete_norm_log(w, f, SpaceNorm::Lp(p), set)?;
            let c = continuous_norm_log(w, f, SpaceNorm::Lp(p), grid)?;
            Ok((d - c).exp())
        })
        .collect()
}

// ------------------------------------------------------------------
// sampling ratios

/// Min over the ensemble of discrete-to-continuous norm ratios (in logs the
/// difference; returned as a plain ratio).
pub fn sampling_ratio(
    w: &RadialWeight,
    set: &PointSet,
    ensemble: &[TestFunction],
    norm: SpaceNorm,
    grid: &[(Complex64, f64)],
) -> Result<(f64, Vec<f64>)> {
    let mut ratios = Vec::with_capacity(ensemble.len());
    for f in ensemble {
        let d = discrete_norm_log(w, f, norm, set)?;
        let c = continuous_norm_log(w, f, norm, grid)?;
        ratios.push((d - c).exp());
    }
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((min, ratios))
}

// ------------------------------------------------------------------
// Jensen diagnostic

fn next_prime(mut n: u64) -> u64 {
    if n < 3 {
        return 3;
    }
    if n % 2 == 0 {
        n += 1;
    }
    'outer: loop {
        let mut d = 3u64;
        while d * d <= n {
            if n % d == 0 {
                n += 2;
                continue 'outer;
            }
            d += 2;
        }
        return n;
    }
}

/// Jensen counting residual for a ring product at radius r:
/// `(1/2π)∫ log|f(re^{iθ})| dθ - Σ_{s_m < r} N_m·log(r/s_m) - log|f(0)|`.
/// For the ring products `f(0) = 1`; the residual vanishes for analytic f
/// with exactly the counted zeros and is nonnegative in general.
///
/// The angular quadrature uses a prime number of nodes exceeding every ring
/// count, so the trapezoid rule integrates each oscillatory factor to
/// essentially machine precision, and a seeded jitter keeps nodes off the
/// zero angles.
pub fn jensen_residual(p: &RingProductEval, r: f64, seed: u64) -> Result<f64> {
    let rings = p.rings();
    let n_max = rings
        .rings
        .iter()
        .filter(|g| g.s < r * 1.05)
        .map(|g| g.n_points)
        .max()
        .unwrap_or(1);
    let m = next_prime(2 * n_max + 101) as usize;
    let golden = 0.618_033_988_749_894_9_f64;
    let theta0 = 2.0 * PI * ((seed as f64 * golden).fract()) / m as f64;
    let vals: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|j| -> Result<f64> {
            let theta = theta0 + 2.0 * PI * j as f64 / m as f64;
            let v = p.eval(Complex64::from_polar(r, theta))?;
            if v.is_zero() {
                return Err(Error::IndeterminateAtZero);
            }
            Ok(v.log_mag)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = vals.iter().sum::<f64>() / m as f64;
    let limit = p.truncation().unwrap_or(rings.rings.len()).min(rings.rings.len());
    let zero_sum: f64 = rings.rings[..limit]
        .iter()
        .filter(|g| g.s < r)
        .map(|g| g.n_points as f64 * (r / g.s).ln())
        .sum();
    Ok(mean - zero_sum)
}

// ------------------------------------------------------------------
// interpolation solver

#[derive(Clone, Copy, Debug)]
pub struct NodeData {
    pub z: Complex64,
    pub data: LogComplex,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolveConfig {
    pub r_big: f64,
    pub eps: f64,
    pub max_iterations: usize,
    /// stop when sup-residual/sup-data drops below this
    pub target: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveOutcome {
    Converged,
    NoContraction,
    MaxIterations,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    /// normalized sup residual after each iteration (index 0 = before any)
    pub residual_trace: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    pub iterations: usize,
    pub atoms: usize,
    pub final_node_error: f64,
    pub killer_fallbacks: usize,
}

struct SolveAtom {
    ring_id: usize,
    phase: Complex64, // e^{-iφ}: rotate into the template frame
    killer: Arc<TaylorTruncation>,
    data: LogComplex,
}

struct RingTemplate {
    peak: Arc<GaussianPeak>,
    log_u_center: LogComplex,
}

impl SolveAtom {
    fn eval(&self, templates: &[RingTemplate], w_pt: Complex64) -> Result<LogComplex> {
        if self.data.is_zero() {
            return Ok(LogComplex::ZERO);
        }
        let t = &templates[self.ring_id];
        let zr = w_pt * self.phase;
        let zeta = (zr - t.peak.center()) / t.peak.rho_center();
        let u = t.peak.eval(zr)?.mul(&LogComplex::from_complex(self.killer.eval(zeta)));
        Ok(self.data.mul(&u.div(&t.log_u_center)))
    }
}

/// Iterative residual-correction interpolation: start from
/// `f₁ = Σ V_n(a_n)`, re-correct with atoms carrying the node residuals,
/// stop at the target or report no contraction when the residual norm fails
/// to decrease three times in a row.
pub fn interp_solve(
    w: &RadialWeight,
    nodes: &[NodeData],
    node_set: &PointSet,
    cfg: SolveConfig,
) -> Result<SolveReport> {
    if nodes.is_empty() {
        return Err(Error::BadInput("no nodes".into()));
    }
    if nodes.len() != node_set.len() {
        return Err(Error::BadInput("node data and point set disagree".into()));
    }
    if nodes.len() >= 2 && separation(w, node_set)? <= 0.0 {
        return Err(Error::SeparationRequired);
    }

    // one Gaussian template per distinct node radius
    let mut radius_ids: Vec<(f64, usize)> = Vec::new();
    let mut node_ring: Vec<usize> = Vec::with_capacity(nodes.len());
    for nd in nodes {
        let s = nd.z.norm();
        let id = match radius_ids.iter().find(|(r, _)| (r - s).abs() <= 1e-12 * s) {
            Some(&(_, id)) => id,
            None => {
                let id = radius_ids.len();
                radius_ids.push((s, id));
                id
            }
        };
        node_ring.push(id);
    }
    let templates: Vec<RingTemplate> = radius_ids
        .par_iter()
        .map(|&(s, _)| -> Result<RingTemplate> {
            let peak =
                Arc::new(GaussianPeak::at(w, Complex64::new(s, 0.0), cfg.r_big)?);
            let log_u_center = peak.eval(peak.center())?;
            if log_u_center.is_zero() {
                return Err(Error::DegenerateAtom);
            }
            Ok(RingTemplate { peak, log_u_center })
        })
        .collect::<Result<Vec<_>>>()?;

    // per-node zero-killing polynomials from the rescaled neighbors, built
    // in the template frame
    let mut killer_fallbacks = 0usize;
    let killers: Vec<Arc<TaylorTruncation>> = nodes
        .iter()
        .enumerate()
        .map(|(i, nd)| {
            let rho = node_set.rho_at(i);
            let ids = node_set.query_disc(nd.z, cfg.r_big * rho);
            let phase = Complex64::from_polar(1.0, -nd.z.im.atan2(nd.z.re));
            let neighbors: Vec<Complex64> = ids
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (node_set.points()[j] - nd.z) / rho * phase)
                .collect();
            let (k, _r_used, fellback) = node_killer(&neighbors, cfg.r_big, cfg.eps);
            if fellback {
                killer_fallbacks += 1;
            }
            Arc::new(k)
        })
        .collect();

    let data_norm = nodes
        .iter()
        .map(|nd| nd.data.log_mag - w.h(nd.z.norm()))
        .fold(f64::NEG_INFINITY, f64::max);
    if data_norm == f64::NEG_INFINITY {
        return Ok(SolveReport {
            outcome: SolveOutcome::Converged,
            residual_trace: vec![0.0],
            contraction_factors: vec![],
            iterations: 0,
            atoms: 0,
            final_node_error: 0.0,
            killer_fallbacks,
        });
    }

    // current approximation value at each node, in log space
    let mut values: Vec<LogComplex> = vec![LogComplex::ZERO; nodes.len()];
    let mut residuals: Vec<LogComplex> = nodes.iter().map(|nd| nd.data).collect();

    let res_norm = |residuals: &[LogComplex]| -> f64 {
        residuals
            .iter()
            .zip(nodes)
            .map(|(r, nd)| r.log_mag - w.h(nd.z.norm()))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut trace = vec![(res_norm(&residuals) - data_norm).exp()];
    let mut factors = Vec::new();
    let mut total_atoms = 0usize;
    let mut non_decreasing = 0usize;
    let mut outcome = SolveOutcome::MaxIterations;
    let mut iterations = 0usize;

    for _iter in 0..cfg.max_iterations {
        iterations += 1;
        // atoms carrying the current residuals
        let atoms: Vec<(usize, SolveAtom)> = residuals
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_zero())
            .map(|(i, r)| {
                let theta = nodes[i].z.im.atan2(nodes[i].z.re);
                (
                    i,
                    SolveAtom {
                        ring_id: node_ring[i],
                        phase: Complex64::from_polar(1.0, -theta),
                        killer: Arc::clone(&killers[i]),
                        data: *r,
                    },
                )
            })
            .collect();
        total_atoms += atoms.len();

        // locality: atoms reach nodes within 2.2·R·ρ of their center
        let updates: Vec<Vec<(usize, LogComplex)>> = atoms
            .par_iter()
            .map(|(i, atom)| -> Result<Vec<(usize, LogComplex)>> {
                let rho = node_set.rho_at(*i);
                let reach = 2.2 * cfg.r_big * rho;
                let mut out = Vec::new();
                for j in node_set.query_disc(nodes[*i].z, reach) {
                    out.push((j, atom.eval(&templates, nodes[j].z)?));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        for chunk in updates {
            for (j, v) in chunk {
                values[j] = values[j].add(&v);
            }
        }
        for (j, nd) in nodes.iter().enumerate() {
            residuals[j] = nd.data.sub(&values[j]);
        }
        let rn = (res_norm(&residuals) - data_norm).exp();
        let prev = *trace.last().unwrap();
        factors.push(rn / prev.max(1e-300));
        trace.push(rn);
        if rn <= cfg.target {
            outcome = SolveOutcome::Converged;
            break;
        }
        if rn >= prev {
            non_decreasing += 1;
            if non_decreasing >= 3 {
                outcome = SolveOutcome::NoContraction;
                break;
            }
        } else {
            non_decreasing = 0;
        }
    }

    let final_node_error = *trace.last().unwrap();
    Ok(SolveReport {
        outcome,
        residual_trace: trace,
        contraction_factors: factors,
        iterations,
        atoms: total_atoms,
        final_node_error,
        killer_fallbacks,
    })
}

// ------------------------------------------------------------------
// index demo

/// The companion weight h̃ = h + √(h·log(1/ρ) + 1) - 1: slightly larger
/// than h, with h̃/h → 1, ρ̃/ρ → 1, and log(1/ρ) = o(h̃ - h).
pub fn companion_weight(w: &RadialWeight) -> RadialWeight {
    let base = w.clone();
    RadialWeight::from_function(w.domain(), "companion", move |r| {
        let h = base.h(r);
        let lap = match base.laplacian(r) {
            Ok(l) => l.max(1.0),
            Err(_) => 1.0,
        };
        let log_inv_rho = 0.5 * lap.ln();
        h + (h * log_inv_rho + 1.0).sqrt() - 1.0
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompanionChecks {
    pub ratio_h: Vec<f64>,
    pub ratio_rho: Vec<f64>,
    pub log_inv_rho_over_gap: Vec<f64>,
    pub class: Option<RegularityClass>,
}

/// Numeric verification of the three companion-weight conditions on a grid.
pub fn companion_checks(
    w: &RadialWeight,
    wt: &RadialWeight,
    r_lo: f64,
    r_hi: f64,
    n: usize,
) -> Result<CompanionChecks> {
    let mut ratio_h = Vec::with_capacity(n);
    let mut ratio_rho = Vec::with_capacity(n);
    let mut gap = Vec::with_capacity(n);
    for i in 0..n {
        let r = r_lo + (r_hi - r_lo) * i as f64 / (n - 1) as f64;
        ratio_h.push(wt.h(r) / w.h(r).max(1e-12));
        ratio_rho.push(wt.rho(r)? / w.rho(r)?);
        gap.push((1.0 / w.rho(r)?).ln() / (wt.h(r) - w.h(r)).max(1e-12));
    }
    let class = wt.validate(r_lo, r_hi, n.max(64))?.class;
    Ok(CompanionChecks { ratio_h, ratio_rho, log_inv_rho_over_gap: gap, class })
}

/// The point-evaluation bound ratios `|g(0)| / ‖g‖_{p,h,Λ̃}` over an
/// ensemble; the thinned-lattice index construction needs these uniformly
/// bounded.
pub fn point_evaluation_ratios(
    w: &RadialWeight,
    lattice_set: &PointSet,
    ensemble: &[TestFunction],
    p: f64,
) -> Result<Vec<f64>> {
    ensemble
        .iter()
        .map(|f| {
            let num = f.eval_log(Complex64::new(0.0, 0.0))?.log_mag;
            let den = discrete_norm_log(w, f, SpaceNorm::Lp(p), lattice_set)?;
            Ok((num - den).exp())
        })
        .collect()
}

// ------------------------------------------------------------------
