//! Point sets, the d_ρ distance, local counts, and density profiles.
//!
//! The spatial index is a polar grid: radial bins of width equal to the
//! local ρ, each split into angular sectors of comparable arc length, so a
//! disc of radius R·ρ touches O(R²) cells and queries stay linear in the
//! output size.

use crate::atomize::RingSequence;
use crate::weight::{Domain, RadialWeight};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Annulus of claimed completeness of a materialized point set.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Coverage {
    pub inner: f64,
    pub outer: f64,
}

impl Coverage {
    pub fn full_disc(outer: f64) -> Coverage {
        Coverage { inner: 0.0, outer }
    }
}

/// A finite planar point collection with its spatial index.
pub struct PointSet {
    domain: Domain,
    pts: Vec<Complex64>,
    rho_at_point: Vec<f64>,
    index: GridIndex,
    coverage: Coverage,
    separation: OnceLock<Option<f64>>,
}

impl std::fmt::Debug for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "PointSet({} points, coverage [{}, {}])",
            self.pts.len(),
            self.coverage.inner,
            self.coverage.outer
        )
    }
}

impl PointSet {
    pub fn new(w: &RadialWeight, pts: Vec<Complex64>, coverage: Coverage) -> PointSet {
        let rho_at_point: Vec<f64> = pts.iter().map(|p| w.rho(p.norm()).unwrap_or(1.0)).collect();
        let index = GridIndex::build(w, &pts, coverage);
        PointSet {
            domain: w.domain(),
            pts,
            rho_at_point,
            index,
            coverage,
            separation: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.pts
    }

    pub fn rho_at(&self, i: usize) -> f64 {
        self.rho_at_point[i]
    }

    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Indices of all points with |p - center| < radius (open disc).
    pub fn query_disc(&self, center: Complex64, radius: f64) -> Vec<usize> {
        self.index.query_disc(&self.pts, center, radius)
    }

    /// Nearest point to `z` (excluding an exact index if given), by
    /// expanding disc queries.
    pub fn nearest(&self, z: Complex64, exclude: Option<usize>) -> Option<(usize, f64)> {
        if self.pts.is_empty() {
            return None;
        }
        let span = (self.coverage.outer - self.coverage.inner).max(1e-12);
        let start = self.index.typical_cell(z.norm()).unwrap_or(span * 0.01).max(span * 1e-9);
        let mut radius = 1.5 * start;
        for _ in 0..128 {
            let mut best: Option<(usize, f64)> = None;
            for i in self.query_disc(z, radius) {
                if exclude == Some(i) {
                    continue;
                }
                let d = (self.pts[i] - z).norm();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            if let Some((i, d)) = best {
                if d < radius {
                    return Some((i, d));
                }
            }
            radius *= 2.0;
            if radius > 4.0 * (self.coverage.outer + z.norm() + 1.0) {
                break;
            }
        }
        // brute fallback
        self.pts
            .iter()
            .enumerate()
            .filter(|(i, _)| exclude != Some(*i))
            .map(|(i, p)| (i, (p - z).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }
}

/// `d_ρ(z, v) = |z - v| / min(ρ(|z|), ρ(|v|))`.
pub fn d_rho(w: &RadialWeight, z: Complex64, v: Complex64) -> Result<f64> {
    let rz = w.rho(z.norm())?;
    let rv = w.rho(v.norm())?;
    Ok((z - v).norm() / rz.min(rv))
}

/// Exact infimum of pairwise d_ρ over the set.
///
/// Pass 1 obtains an upper bound m from per-point nearest neighbors; since
/// any pair at d_ρ ≤ m satisfies |p - q| ≤ m·ρ(p), pass 2 scans discs of
/// radius m·ρ(p) and realizes the true infimum.
pub fn separation(w: &RadialWeight, set: &PointSet) -> Result<f64> {
    if set.len() < 2 {
        return Err(Error::UndefinedSeparation);
    }
    if let Some(v) = set.separation.get() {
        return v.ok_or(Error::UndefinedSeparation);
    }
    let mut bound = f64::INFINITY;
    for (i, &p) in set.pts.iter().enumerate() {
        if let Some((j, _)) = set.nearest(p, Some(i)) {
            let d = d_rho(w, p, set.pts[j])?;
            bound = bound.min(d);
        }
    }
    let mut exact = bound;
    for (i, &p) in set.pts.iter().enumerate() {
        let radius = bound * set.rho_at_point[i] * (1.0 + 1e-12);
        for j in set.query_disc(p, radius.max(1e-300)) {
            if j == i {
                continue;
            }
            let d = (p - set.pts[j]).norm() / set.rho_at_point[i].min(set.rho_at_point[j]);
            exact = exact.min(d);
        }
    }
    let _ = set.separation.set(Some(exact));
    Ok(exact)
}

/// Count of `Γ ∩ D(z, R·ρ(z))` together with the rescaled configuration
/// `{(γ - z)/ρ(z)}`.
pub fn local_count(
    w: &RadialWeight,
    set: &PointSet,
    z: Complex64,
    r_ratio: f64,
) -> Result<(usize, Vec<Complex64>)> {
    let rho = w.rho(z.norm())?;
    let rad = r_ratio * rho;
    let r = z.norm();
    if r + rad > set.coverage.outer + 1e-12
        || (set.coverage.inner > 0.0 && r - rad < set.coverage.inner - 1e-12)
    {
        return Err(Error::PartialCoverage { re: z.re, im: z.im });
    }
    let ids = set.query_disc(z, rad);
    let rescaled: Vec<Complex64> = ids.iter().map(|&i| (set.pts[i] - z) / rho).collect();
    Ok((ids.len(), rescaled))
}

/// Deterministic scan centers: rings of the annulus stepped by the local
/// ring spacing, `centers_per_ring` angles each, golden-angle jitter derived
/// from the seed.
fn scan_centers(
    w: &RadialWeight,
    annulus: (f64, f64),
    centers_per_ring: usize,
    seed: u64,
) -> Vec<Complex64> {
    let golden = 0.618_033_988_749_894_9_f64;
    let phase0 = (seed as f64 * golden).fract();
    let mut centers = Vec::new();
    let mut r = annulus.0;
    let mut ring = 0usize;
    while r <= annulus.1 {
        let phase = (phase0 + golden * ring as f64).fract();
        for j in 0..centers_per_ring {
            let theta = 2.0 * PI * (j as f64 + phase) / centers_per_ring as f64;
            centers.push(Complex64::from_polar(r, theta));
        }
        let step = w
            .rho(r)
            .map(|rho| (2.0 * PI).sqrt() * rho)
            .unwrap_or((annulus.1 - annulus.0) / 8.0);
        r += step.max(1e-12);
        ring += 1;
        if ring > 4096 {
            break;
        }
    }
    centers
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityReport {
    pub r_grid: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub q_mean: Vec<f64>,
    pub scan_annulus: (f64, f64),
    pub effective_annulus: (f64, f64),
    pub centers_per_ring: usize,
    pub center_count: usize,
    pub seed: u64,
}

/// Density profile: for each R in the grid, the min/max/mean of
/// `card Γ(z, R)/R²` over scan centers in the annulus. The annulus shrinks
/// as needed so every query disc stays inside the coverage, and the
/// shrinkage is recorded.
pub fn density_profile(
    w: &RadialWeight,
    set: &PointSet,
    r_grid: &[f64],
    annulus: (f64, f64),
    centers_per_ring: usize,
    seed: u64,
) -> Result<DensityReport> {
    if r_grid.is_empty() {
        return Err(Error::BadInput("empty R grid".into()));
    }
    let r_max = r_grid.iter().cloned().fold(0.0, f64::max);
    // shrink the annulus so discs of radius r_max·ρ fit into the coverage
    let cov = set.coverage;
    let fits = |r: f64| -> bool {
        match w.rho(r) {
            Ok(rho) => {
                r + r_max * rho <= cov.outer + 1e-12
                    && (cov.inner <= 0.0 || r - r_max * rho >= cov.inner - 1e-12)
            }
            Err(_) => false,
        }
    };
    let mut lo = annulus.0;
    let mut hi = annulus.1;
    let span = (hi - lo).max(1e-12);
    for _ in 0..100_000 {
        if fits(lo) || lo >= hi {
            break;
        }
        lo += span * 1e-4;
    }
    for _ in 0..100_000 {
        if fits(hi) || hi <= lo {
            break;
        }
        hi -= span * 1e-4;
    }
    if !(lo < hi && fits(lo) && fits(hi)) {
        return Err(Error::PartialCoverage { re: annulus.0, im: annulus.1 });
    }

    let centers = scan_centers(w, (lo, hi), centers_per_ring, seed);
    let mut q_minus = vec![f64::INFINITY; r_grid.len()];
    let mut q_plus = vec![f64::NEG_INFINITY; r_grid.len()];
    let mut q_sum = vec![0.0; r_grid.len()];
    for &c in &centers {
        for (gi, &rr) in r_grid.iter().enumerate() {
            let (count, _) = local_count(w, set, c, rr)?;
            let q = count as f64 / (rr * rr);
            q_minus[gi] = q_minus[gi].min(q);
            q_plus[gi] = q_plus[gi].max(q);
            q_sum[gi] += q;
        }
    }
    let n = centers.len().max(1) as f64;
    Ok(DensityReport {
        r_grid: r_grid.to_vec(),
        q_minus,
        q_plus,
        q_mean: q_sum.iter().map(|s| s / n).collect(),
        scan_annulus: annulus,
        effective_annulus: (lo, hi),
        centers_per_ring,
        center_count: centers.len(),
        seed,
    })
}

/// Finite-scale surrogate of the density monotonicity `q_-(R) ≤ D^-`:
/// each q_-(R) must not exceed the best q_- at any larger radius by more
/// than 0.05.
pub fn q_monotone_check(rep: &DensityReport) -> bool {
    let n = rep.r_grid.len();
    if n < 3 {
        return true;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rep.r_grid[a].partial_cmp(&rep.r_grid[b]).unwrap());
    for (pos, &i) in order.iter().enumerate() {
        let later_max = order[pos + 1..]
            .iter()
            .map(|&j| rep.q_minus[j])
            .fold(f64::NEG_INFINITY, f64::max);
        if later_max.is_finite() && rep.q_minus[i] > later_max + 0.05 {
            return false;
        }
    }
    true
}

// ------------------------------------------------------------------
// lattices

/// The atomization lattice `{s_k e^{2πim/N_k}}`, kept as rings and
/// materialized on demand.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub rings: RingSequence,
}

impl Lattice {
    pub fn new(rings: RingSequence) -> Lattice {
        Lattice { rings }
    }

    /// Remove exactly the rings whose index has 2-adic valuation `d`
    /// (k = 2^d·(2v+1)); these are the pairwise-disjoint ring families used
    /// in the invariant-subspace construction. Ring 0 is always kept.
    pub fn thin(&self, d: u32) -> Lattice {
        let mut rings = self.rings.clone();
        rings.rings.retain(|r| !thinned_out(r.index, d));
        Lattice { rings }
    }

    /// The complement: only the rings removed by `thin(d)`.
    pub fn thinned_part(&self, d: u32) -> Lattice {
        let mut rings = self.rings.clone();
        rings.rings.retain(|r| thinned_out(r.index, d));
        Lattice { rings }
    }

    /// Materialize rings with ORIGINAL indices in `[lo, hi]` into an indexed
    /// point set. Coverage is the annulus the retained rings span.
    pub fn materialize(&self, w: &RadialWeight, lo: usize, hi: usize) -> Result<PointSet> {
        let total: u64 = self
            .rings
            .rings
            .iter()
            .filter(|r| r.index >= lo && r.index <= hi)
            .map(|r| r.n_points)
            .sum();
        if total > 50_000_000 {
            return Err(Error::BadInput(format!("materialization too large: {total} points")));
        }
        let mut pts = Vec::with_capacity(total as usize);
        let mut cov_lo = f64::INFINITY;
        let mut cov_hi: f64 = 0.0;
        for r in &self.rings.rings {
            if r.index < lo || r.index > hi {
                continue;
            }
            cov_lo = cov_lo.min(r.r_lo);
            cov_hi = cov_hi.max(r.r_hi);
            for m in 0..r.n_points {
                let theta = 2.0 * PI * m as f64 / r.n_points as f64;
                pts.push(Complex64::from_polar(r.s, theta));
            }
        }
        if pts.is_empty() {
            return Err(Error::BadInput("no rings in range".into()));
        }
        if lo == 0 {
            cov_lo = 0.0;
        }
        Ok(PointSet::new(w, pts, Coverage { inner: cov_lo, outer: cov_hi }))
    }

    /// Exact distance from z to the full ring lattice: on each candidate
    /// ring the closest point sits at the nearest admissible angle.
    pub fn dist_to_lattice(&self, z: Complex64) -> f64 {
        dist_to_rings(&self.rings, 0.0, z, None)
    }
}

fn thinned_out(index: usize, d: u32) -> bool {
    index >= 1 && index.trailing_zeros() == d
}

/// Distance from z to the rotated ring lattice `{s_k e^{i(θ0 + 2πm/N_k)}}`,
/// optionally restricted to rings with position < `truncate_at` in the
/// sequence.
pub fn dist_to_rings(
    rings: &RingSequence,
    theta0: f64,
    z: Complex64,
    truncate_at: Option<usize>,
) -> f64 {
    let r = z.norm();
    let theta = z.im.atan2(z.re);
    let limit = truncate_at.unwrap_or(rings.rings.len()).min(rings.rings.len());
    if limit == 0 {
        return f64::INFINITY;
    }
    let candidates = &rings.rings[..limit];
    let mut best = f64::INFINITY;
    // rings sorted by s: scan outward from the closest radius; a ring whose
    // radial gap already exceeds the best distance cannot improve it
    let start = candidates.partition_point(|g| g.s < r) as isize;
    let mut lo = start - 1;
    let mut hi = start;
    while lo >= 0 || (hi as usize) < limit {
        let mut progressed = false;
        for idx in [lo, hi] {
            if idx < 0 || idx as usize >= limit {
                continue;
            }
            let ring = &candidates[idx as usize];
            if (ring.s - r).abs() < best {
                progressed = true;
                if ring.n_points > 0 {
                    let n = ring.n_points as f64;
                    let m = ((theta - theta0) * n / (2.0 * PI)).round();
                    let p = Complex64::from_polar(ring.s, theta0 + 2.0 * PI * m / n);
                    best = best.min((z - p).norm());
                }
            }
        }
        if !progressed && best.is_finite() {
            break;
        }
        lo -= 1;
        hi += 1;
    }
    best
}


// ------------------------------------------------------------------
// polar grid index

struct GridIndex {
    /// radial bin boundaries, len = bins + 1
    bin_edges: Vec<f64>,
    /// per bin: number of angular sectors
    sectors: Vec<usize>,
    /// per bin: offset of its first sector
    bin_start: Vec<usize>,
    /// CSR: per cell, the slice of `entries`
    cell_offsets: Vec<u32>,
    entries: Vec<u32>,
}

impl GridIndex {
    fn build(w: &RadialWeight, pts: &[Complex64], coverage: Coverage) -> GridIndex {
        let inner = coverage
            .inner
            .min(pts.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min).max(0.0));
        let outer = coverage
            .outer
            .max(pts.iter().map(|p| p.norm()).fold(0.0, f64::max))
            .max(inner + 1e-9);
        let span = outer - inner;
        let min_width = span / 20_000.0;
        let mut bin_edges = vec![inner];
        while *bin_edges.last().unwrap() < outer {
            let t = *bin_edges.last().unwrap();
            let width =
                w.rho(t.max(inner + 0.5 * min_width)).unwrap_or(span * 0.05).max(min_width);
            bin_edges.push((t + width).min(outer));
            if bin_edges.len() > 40_000 {
                break;
            }
        }
        let last = bin_edges.len() - 1;
        bin_edges[last] = outer + span * 1e-9 + 1e-300;

        let bins = bin_edges.len() - 1;
        let mut sectors = Vec::with_capacity(bins);
        let mut bin_start = Vec::with_capacity(bins + 1);
        let mut total_cells = 0usize;
        for b in 0..bins {
            let t_mid = 0.5 * (bin_edges[b] + bin_edges[b + 1]);
            let width = bin_edges[b + 1] - bin_edges[b];
            let n = ((2.0 * PI * t_mid / width).floor() as usize).clamp(1, 1 << 22);
            bin_start.push(total_cells);
            sectors.push(n);
            total_cells += n;
        }
        bin_start.push(total_cells);

        let locate_bin = |r: f64| -> usize {
            bin_edges.partition_point(|&v| v <= r).saturating_sub(1).min(bins - 1)
        };
        let mut counts = vec![0u32; total_cells + 1];
        let cell_of = |p: &Complex64| -> usize {
            let b = locate_bin(p.norm());
            let theta = p.im.atan2(p.re).rem_euclid(2.0 * PI);
            let s = ((theta / (2.0 * PI) * sectors[b] as f64) as usize).min(sectors[b] - 1);
            bin_start[b] + s
        };
        for p in pts {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let cell_offsets = counts.clone();
        let mut fill = counts;
        let mut entries = vec![0u32; pts.len()];
        for (i, p) in pts.iter().enumerate() {
            let c = cell_of(p);
            entries[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        GridIndex { bin_edges, sectors, bin_start, cell_offsets, entries }
    }

    fn typical_cell(&self, r: f64) -> Option<f64> {
        let bins = self.bin_edges.len() - 1;
        if bins == 0 {
            return None;
        }
        let b = self.bin_edges.partition_point(|&v| v <= r).saturating_sub(1).min(bins - 1);
        Some(self.bin_edges[b + 1] - self.bin_edges[b])
    }

    fn query_disc(&self, pts: &[Complex64], center: Complex64, radius: f64) -> Vec<usize> {
        let bins = self.bin_edges.len() - 1;
        let rc = center.norm();
        let r_lo = (rc - radius).max(self.bin_edges[0]);
        let r_hi = (rc + radius).min(*self.bin_edges.last().unwrap());
        if r_lo > r_hi {
            return Vec::new();
        }
        let b_lo = self.bin_edges.partition_point(|&v| v <= r_lo).saturating_sub(1).min(bins - 1);
        let b_hi = self.bin_edges.partition_point(|&v| v <= r_hi).saturating_sub(1).min(bins - 1);
        let theta_c = center.im.atan2(center.re);
        let mut out = Vec::new();
        for b in b_lo..=b_hi {
            let n = self.sectors[b];
            let t_lo = self.bin_edges[b];
            let t_hi = self.bin_edges[b + 1];
            // angular window of the disc on this radial bin
            let (s_from, s_to) = if rc <= radius || n == 1 {
                (0usize, n - 1)
            } else {
                // law of cosines at the most permissive radius in the bin,
                // widened by one sector for safety
                let mut cos_min: f64 = 1.0;
                for t in [t_lo.max(rc - radius), t_hi.min(rc + radius), rc.clamp(t_lo, t_hi)] {
                    if t <= 0.0 {
                        cos_min = -1.0;
                        break;
                    }
                    let c = (t * t + rc * rc - radius * radius) / (2.0 * t * rc);
                    cos_min = cos_min.min(c);
                }
                if cos_min <= -1.0 {
                    (0usize, n - 1)
                } else {
                    let half = cos_min.clamp(-1.0, 1.0).acos();
                    let frac = theta_c.rem_euclid(2.0 * PI) / (2.0 * PI);
                    let c_center = frac * n as f64;
                    let spread = half / (2.0 * PI) * n as f64 + 1.0;
                    let from = (c_center - spread).floor() as isize;
                    let to = (c_center + spread).ceil() as isize;
                    if (to - from) as usize >= n {
                        (0, n - 1)
                    } else {
                        (
                            from.rem_euclid(n as isize) as usize,
                            to.rem_euclid(n as isize) as usize,
                        )
                    }
                }
            };
            let mut visit = |s: usize| {
                let cell = self.bin_start[b] + s;
                let lo = self.cell_offsets[cell] as usize;
                let hi = self.cell_offsets[cell + 1] as usize;
                for &e in &self.entries[lo..hi] {
                    if (pts[e as usize] - center).norm() < radius {
                        out.push(e as usize);
                    }
                }
            };
            if s_from <= s_to {
                for s in s_from..=s_to {
                    visit(s);
                }
            } else {
                for s in s_from..n {
                    visit(s);
                }
                for s in 0..=s_to {
                    visit(s);
                }
            }
        }
        out
    }
}
