//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! per sub-check. Tolerances are pinned here, not configurable.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rwspace::atomize::{build_rings, next_ring, asymptotic_ratios, Ring, RingSequence, StopReason};
use rwspace::geometry::{density_profile, local_count, q_monotone_check, separation, Coverage, Lattice, PointSet};
use rwspace::logcx::LogComplex;
use rwspace::peaks::{tail_sum, taylor_truncate, GaussianPeak};
use rwspace::products::{band_grid, band_over, diag_a, RingProductEval};
use rwspace::report::BandSummary;
use rwspace::verify::{
    continuous_norm_log, interp_solve, jensen_residual, sampling_ratio, Atom, GridSpec, NodeData,
    SolveConfig, SolveOutcome, SpaceNorm, TestFunction,
};
use rwspace::weierstrass::{band_inside, lower_margins, SigmaLattice};
use rwspace::weight::{Domain, RadialWeight};
use std::f64::consts::PI;
use std::sync::Arc;

struct Gate {
    name: &'static str,
    failures: Vec<String>,
}

impl Gate {
    fn new(name: &'static str) -> Gate {
        Gate { name, failures: Vec::new() }
    }

    fn check(&mut self, what: &str, ok: bool, detail: String) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("[{}] {verdict}  {what}: {detail}", self.name);
        if !ok {
            self.failures.push(format!("{what}: {detail}"));
        }
    }

    fn finish(self) {
        assert!(
            self.failures.is_empty(),
            "criterion {} failed: {:?}",
            self.name,
            self.failures
        );
    }
}

/// Build rings until the point count would exceed the cap or the radius
/// would cross r_max.
fn build_until(w: &RadialWeight, r_max: f64, n_cap: u64) -> RingSequence {
    let mut rings: Vec<Ring> = Vec::new();
    let mut r_k = 0.0;
    loop {
        match next_ring(w, r_k) {
            Ok(mut ring) => {
                if ring.r_hi > r_max || ring.n_points > n_cap {
                    break;
                }
                ring.index = rings.len();
                r_k = ring.r_hi;
                rings.push(ring);
            }
            Err(_) => break,
        }
    }
    RingSequence {
        domain: w.domain(),
        rings,
        anchored_at: None,
        anchor_index: None,
        core_mass_rounding: None,
        stop: StopReason::ReachedRMax,
    }
}

// ------------------------------------------------------------------

#[test]
fn criterion_01_atomization_limits() {
    let mut gate = Gate::new("criterion 1: atomization limits");
    let sqrt_2pi = (2.0 * PI).sqrt();
    let two_pi = 2.0 * PI;

    // (weight, r_max, point cap); the plane exponential cannot reach r=40
    // at desk scale (it would need ~4·10^8 rings), so the N ≤ 10^6 cap
    // binds there exactly as for the disc class-II weight.
    let cases: Vec<(RadialWeight, f64, u64)> = vec![
        (RadialWeight::pow_inv(1.0), 0.999_999, 1_000_000),
        (RadialWeight::exp_inv(), 0.999_999, 1_000_000),
        (RadialWeight::beta(), 40.0, u64::MAX),
        (RadialWeight::exp(1.0), 40.0, 1_000_000),
    ];
    for (w, r_max, cap) in cases {
        let t0 = std::time::Instant::now();
        let seq = build_until(&w, r_max, cap);
        let label = w.label().to_string();
        gate.check(
            &format!("{label} built"),
            seq.len() >= 12,
            format!("{} rings to r={:.6} in {:.2?}", seq.len(), seq.outer_radius(), t0.elapsed()),
        );
        // ring mass integrality, every ring
        let mut worst_mass = 0.0f64;
        for r in &seq.rings {
            let mass = w.ring_mass(r.r_lo, r.r_hi).unwrap();
            worst_mass = worst_mass.max((mass - r.n_points as f64).abs() / r.n_points as f64);
        }
        gate.check(
            &format!("{label} ring mass integrality"),
            worst_mass <= 1e-8,
            format!("worst relative deviation {worst_mass:.2e}"),
        );
        // the four limits over the last 25% of rings
        let ratios = asymptotic_ratios(&w, &seq);
        let tail = &ratios[ratios.len() * 3 / 4..];
        let mut worst = [0.0f64; 4];
        for r in tail {
            worst[0] = worst[0].max((r.width_over_rho - sqrt_2pi).abs() / sqrt_2pi);
            worst[1] = worst[1].max((r.mass_width - two_pi).abs() / two_pi);
            worst[2] = worst[2].max((r.width_ratio - 1.0).abs());
            worst[3] = worst[3].max((r.centroid_frac - 0.5).abs() / 0.5);
        }
        gate.check(
            &format!("{label} width/ρ → √(2π)"),
            worst[0] <= 0.02,
            format!("worst 2%-dev {:.4}", worst[0]),
        );
        gate.check(
            &format!("{label} mass·width → 2π"),
            worst[1] <= 0.02,
            format!("worst dev {:.4}", worst[1]),
        );
        gate.check(
            &format!("{label} width ratio → 1"),
            worst[2] <= 0.02,
            format!("worst dev {:.4}", worst[2]),
        );
        gate.check(
            &format!("{label} centroid fraction → 1/2"),
            worst[3] <= 0.02,
            format!("worst dev {:.4}", worst[3]),
        );
    }
    gate.finish();
}

#[test]
fn criterion_02_canonical_product_band() {
    let mut gate = Gate::new("criterion 2: canonical product band");
    let w = RadialWeight::pow_inv(1.0);
    let rings = Arc::new(build_rings(&w, 0.99985).unwrap());
    assert!(rings.len() > 64, "need > 64 rings, got {}", rings.len());
    let p = RingProductEval::new(rings.clone());

    let grid = band_grid(&w, &p, 10, 45, 48, 0.1, 11);
    let band = band_over(&grid, |z| diag_a(&p, &w, z)).unwrap();
    gate.check(
        "band width ≤ 6 over the standard grid",
        band.width() <= 6.0,
        format!("width {:.3} over {} points", band.width(), grid.len()),
    );

    // stability (a): ten more rings appended
    let rings_ext = Arc::new(build_rings(&w, 0.99991).unwrap());
    assert!(rings_ext.len() >= rings.len() + 10, "extension adds {} rings", rings_ext.len() - rings.len());
    let p_ext = RingProductEval::new(rings_ext);
    let grid_ext = band_grid(&w, &p_ext, 10, 45, 48, 0.1, 11);
    let band_ext = band_over(&grid_ext, |z| diag_a(&p_ext, &w, z)).unwrap();
    let rel_a = (band_ext.width() - band.width()).abs() / band.width();
    gate.check(
        "band stable under appending ≥ 10 rings",
        rel_a <= 0.10,
        format!("width {:.3} → {:.3} ({:.1}%)", band.width(), band_ext.width(), 100.0 * rel_a),
    );

    // stability (b): doubled grid resolution
    let grid2 = band_grid(&w, &p, 10, 45, 96, 0.1, 11);
    let band2 = band_over(&grid2, |z| diag_a(&p, &w, z)).unwrap();
    let rel_b = (band2.width() - band.width()).abs() / band.width();
    gate.check(
        "band stable under doubling grid resolution",
        rel_b <= 0.10,
        format!("width {:.3} → {:.3} ({:.1}%)", band.width(), band2.width(), 100.0 * rel_b),
    );

    // brute-force factor products at 10³ random points
    let k99 = rings.rings.partition_point(|g| g.s < 0.99);
    let p_trunc = RingProductEval::truncated(rings.clone(), k99);
    let lat = Lattice::new((*rings).clone());
    let set = lat.materialize(&w, 0, k99 - 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let z = Complex64::from_polar(0.9 * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
        let got = p_trunc.eval(z).unwrap();
        let mut log_mag = 0.0f64;
        let mut comp = 0.0f64;
        for lam in set.points() {
            let term = (Complex64::new(1.0, 0.0) - z / lam)
                / (Complex64::new(1.0, 0.0) - z * lam.conj());
            let x = 0.5 * term.norm_sqr().ln();
            let s = log_mag + x;
            comp += if log_mag.abs() >= x.abs() { (log_mag - s) + x } else { (x - s) + log_mag };
            log_mag = s;
        }
        let brute = log_mag + comp;
        worst = worst.max((got.log_mag - brute).abs() / brute.abs().max(1.0));
    }
    gate.check(
        "eval matches brute-force factor products to 1e-8",
        worst <= 1e-8,
        format!("worst relative log-magnitude deviation {worst:.2e}"),
    );
    gate.finish();
}

#[test]
fn criterion_03_weierstrass_partial_product() {
    let mut gate = Gate::new("criterion 3: weierstrass partial product");
    let lat10 = SigmaLattice::new(10.0);
    let rep10 = band_inside(&lat10, 4000, 0.1, 31).unwrap();
    gate.check(
        "R=10 band width ≤ 4 over 4000 points",
        rep10.band.width() <= 4.0,
        format!("width {:.3}", rep10.band.width()),
    );

    // R = 14 at the same grid density
    let lat14 = SigmaLattice::new(14.0);
    let n14 = (4000.0 * (14.0f64 / 10.0).powi(2)).round() as usize;
    let rep14 = band_inside(&lat14, n14, 0.1, 31).unwrap();
    let rel = (rep14.band.width() - rep10.band.width()).abs() / rep10.band.width();
    gate.check(
        "R=14 width within 25% of R=10 width",
        rel <= 0.25,
        format!("{:.3} vs {:.3} ({:.1}%)", rep14.band.width(), rep10.band.width(), 100.0 * rel),
    );

    let margins = lower_margins(&lat10, 100, 5);
    let min = margins.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min);
    gate.check(
        "lower margins bounded below over 100 samples in R < |z| ≤ R^1.5",
        min.is_finite() && min >= -10.0,
        format!("min margin {min:.3}"),
    );
    gate.finish();
}

#[test]
fn criterion_04_gaussian_peak_profile() {
    let mut gate = Gate::new("criterion 4: gaussian peak profile");
    let w = RadialWeight::pow_inv(1.0);
    let base = build_rings(&w, 0.99999).unwrap();
    let r_big = 15.0;
    let mut widths = Vec::new();
    let mut decay_ok = true;
    let mut decay_min = f64::INFINITY;
    for (i, k) in (40..45).enumerate() {
        let z = Complex64::from_polar(base.rings[k].s, 0.3 + 0.5 * i as f64);
        let peak = match GaussianPeak::at(&w, z, r_big) {
            Ok(p) => p,
            Err(e) => {
                gate.check(&format!("anchor ring {k} peak built"), false, format!("{e}"));
                continue;
            }
        };
        let rho = peak.rho_center();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let mut vals = Vec::new();
        let mut guard = 0;
        while vals.len() < 400 && guard < 40_000 {
            guard += 1;
            let rad = r_big * rho * rng.gen::<f64>().sqrt();
            let p = z + Complex64::from_polar(rad, 2.0 * PI * rng.gen::<f64>());
            if peak.dist_to_divisor(p) < 0.1 * rho {
                continue;
            }
            if let Ok(v) = peak.band_value(&w, p) {
                vals.push(v);
            }
        }
        let band = BandSummary::from_values(&vals);
        widths.push(band.width());
        gate.check(
            &format!("anchor ring {k}: band width ≤ 4"),
            band.width() <= 4.0,
            format!("width {:.3}", band.width()),
        );
        // decay margins at 200 outside samples, constant from the inside band
        let log_c = band.max + 2.0;
        let mut n = 0;
        while n < 200 && guard < 100_000 {
            guard += 1;
            let rad = r_big * rho * (1.05 + rng.gen::<f64>());
            let p = z + Complex64::from_polar(rad, 2.0 * PI * rng.gen::<f64>());
            if p.norm() >= w.safe_radius() {
                continue;
            }
            if let Ok(m) = peak.decay_margin(&w, p, log_c) {
                decay_min = decay_min.min(m);
                if m < 0.0 {
                    decay_ok = false;
                }
                n += 1;
            }
        }
    }
    if widths.len() >= 2 {
        let wmin = widths.iter().cloned().fold(f64::INFINITY, f64::min);
        let wmax = widths.iter().cloned().fold(0.0f64, f64::max);
        gate.check(
            "widths agree within 25% across the five anchors",
            (wmax - wmin) / wmin <= 0.25,
            format!("widths {widths:?}"),
        );
    }
    gate.check(
        "decay margins ≥ 0 at 200 outside samples per anchor",
        decay_ok,
        format!("min margin {decay_min:.3}"),
    );
    gate.finish();
}

#[test]
fn criterion_05_taylor_truncation() {
    let mut gate = Gate::new("criterion 5: taylor truncation");
    let n = 60usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut fact = 1.0f64;
    for m in 0..=n / 2 {
        if m > 0 {
            fact *= m as f64;
        }
        coeffs[2 * m] = Complex64::new(1.0 / fact, 0.0);
    }
    let t = taylor_truncate(&coeffs, n, 0.2).unwrap();
    gate.check(
        "certified inner bound equals 2^-28.5",
        (t.inner_bound() - 2.63e-9).abs() < 0.01e-9,
        format!("bound {:.4e}", t.inner_bound()),
    );

    // analytic tail oracle: Σ_{m>30} r^{2m}/m! at the inner radius
    let r = t.inner_radius();
    let r2 = r * r;
    let mut term = 1.0f64;
    for m in 1..=30 {
        term *= r2 / m as f64;
    }
    let mut tail = 0.0;
    let mut m = 31;
    while m < 400 {
        term *= r2 / m as f64;
        tail += term;
        if term < 1e-30 {
            break;
        }
        m += 1;
    }
    gate.check(
        "analytic tail ≤ certified inner bound (nonnegative margin)",
        tail <= t.inner_bound(),
        format!("tail {tail:.3e} vs bound {:.3e}", t.inner_bound()),
    );

    // direct difference inside, certified bounds outside, 100 radii
    let mut worst_inner = 0.0f64;
    for i in 0..100 {
        let rad = r * (i as f64 + 0.5) / 100.0;
        let z = Complex64::from_polar(rad, 0.9 + 0.013 * i as f64);
        worst_inner = worst_inner.max(((z * z).exp() - t.eval(z)).norm());
    }
    gate.check(
        "max |F - T_N F| on the inner region ≤ certified bound",
        worst_inner <= t.inner_bound(),
        format!("measured {worst_inner:.3e}"),
    );
    let mut outer_ok = true;
    let mut worst_gap = f64::INFINITY;
    for i in 0..100 {
        let rad = r + (2.0 * (n as f64).sqrt() - r) * (i as f64 + 0.5) / 100.0;
        let z = Complex64::from_polar(rad, 0.3 + 0.02 * i as f64);
        let val_ln = t.eval(z).norm().ln();
        let bound_ln = if rad <= (n as f64 / 2.0).sqrt() {
            t.mid_bound_ln(rad)
        } else {
            t.outer_bound_ln(rad)
        };
        worst_gap = worst_gap.min(bound_ln - val_ln);
        if val_ln > bound_ln {
            outer_ok = false;
        }
    }
    gate.check(
        "mid/outer certified bounds hold at 100 radii",
        outer_ok,
        format!("min log-margin {worst_gap:.3}"),
    );
    gate.finish();
}

#[test]
fn criterion_06_thinned_densities() {
    let mut gate = Gate::new("criterion 6: thinned densities");
    // plane lattice: the fixed-R density surrogate is exact there (ρ ≡ 1);
    // the disc weights at rings 30..45 still carry the curvature of Δh
    // across a disc of radius 20ρ and sit visibly above 1/2.
    let w = RadialWeight::beta();
    let lat = Lattice::new(build_rings(&w, 145.0).unwrap());
    assert!(lat.rings.len() > 50);
    let n = lat.rings.len();
    let annulus = (lat.rings.rings[30].s, lat.rings.rings[45].s);
    let r_grid = [10.0, 15.0, 20.0];

    let full = lat.materialize(&w, 0, n - 1).unwrap();
    let rep = density_profile(&w, &full, &r_grid, annulus, 64, 42).unwrap();
    let q_lo = rep.q_minus[2];
    let q_hi = rep.q_plus[2];
    gate.check(
        "full lattice q±(20) = 0.5 ± 0.05",
        (q_lo - 0.5).abs() <= 0.05 && (q_hi - 0.5).abs() <= 0.05,
        format!("q ∈ [{q_lo:.4}, {q_hi:.4}]"),
    );
    gate.check("q monotone surrogate", q_monotone_check(&rep), format!("q- {:?}", rep.q_minus));

    for (d, expect) in [(0u32, 0.25), (1, 0.375), (2, 0.4375)] {
        let set = lat.thin(d).materialize(&w, 0, n - 1).unwrap();
        let rep = density_profile(&w, &set, &r_grid, annulus, 64, 42).unwrap();
        let ok = (rep.q_minus[2] - expect).abs() <= 0.03 && (rep.q_plus[2] - expect).abs() <= 0.03;
        gate.check(
            &format!("thinned d={d} density {expect}"),
            ok,
            format!("q ∈ [{:.4}, {:.4}]", rep.q_minus[2], rep.q_plus[2]),
        );
    }
    gate.finish();
}

#[test]
fn criterion_07_tail_sum() {
    let mut gate = Gate::new("criterion 7: tail sum");
    let w = RadialWeight::pow_inv(1.0);
    let rings = build_rings(&w, 0.99975).unwrap();
    let n = rings.len();
    assert!(n >= 50, "got {n} rings");
    let lat = Lattice::new(rings);
    let set = lat.materialize(&w, 0, n - 1).unwrap();
    let mut a10 = Vec::new();
    let mut a14 = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..20 {
        let k = 35 + i % 8;
        let theta = 2.0 * PI * rng.gen::<f64>();
        let z = Complex64::from_polar(lat.rings.rings[k].s, theta);
        a10.push(tail_sum(&w, &set, z, 10.0, 0.2).unwrap());
        a14.push(tail_sum(&w, &set, z, 14.0, 0.2).unwrap());
    }
    let max10 = a10.iter().cloned().fold(0.0f64, f64::max);
    gate.check(
        "A_10 ≤ 0.1 at ε=0.2 over 20 centers",
        max10 <= 0.1,
        format!("max A_10 = {max10:.4}"),
    );
    let pointwise = a14.iter().zip(&a10).all(|(b, a)| b <= a);
    gate.check(
        "A_14 ≤ A_10 pointwise",
        pointwise,
        format!("max A_14 = {:.4}", a14.iter().cloned().fold(0.0f64, f64::max)),
    );
    gate.finish();
}

fn sector_band_nodes(
    w: &RadialWeight,
    lat: &Lattice,
    band: (f64, f64),
    sector: f64,
    midpoints: bool,
    seed: u64,
) -> (Vec<NodeData>, PointSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::new();
    for g in lat.rings.rings.iter().filter(|g| g.s > band.0 && g.s < band.1) {
        let n = g.n_points as f64;
        let m_span = (sector * n / (2.0 * PI)) as i64;
        for m in -m_span..=m_span {
            let z = Complex64::from_polar(g.s, 2.0 * PI * m as f64 / n);
            let data = if m.abs() <= 2 * m_span / 3 {
                LogComplex::new(
                    w.h(g.s) + (rng.gen::<f64>() - 0.5),
                    2.0 * PI * rng.gen::<f64>() - PI,
                )
            } else {
                LogComplex::ZERO
            };
            nodes.push(NodeData { z, data });
        }
        if midpoints {
            let mid = 0.5 * (g.s + g.r_hi);
            for m in -m_span..=m_span {
                let z = Complex64::from_polar(mid, 2.0 * PI * (m as f64 + 0.5) / n);
                nodes.push(NodeData { z, data: LogComplex::ZERO });
            }
        }
    }
    let pts: Vec<Complex64> = nodes.iter().map(|n| n.z).collect();
    let set = PointSet::new(w, pts, Coverage { inner: band.0 - 10.0, outer: band.1 + 10.0 });
    (nodes, set)
}

#[test]
fn criterion_08_interpolation_solver() {
    let mut gate = Gate::new("criterion 8: interpolation solver");
    // thinned lattice of density 0.375 on the plane, where the atoms carry
    // clean Gaussian profiles at desk scale
    let w = RadialWeight::beta();
    let lat = Lattice::new(build_rings(&w, 1080.0).unwrap());
    let thinned = lat.thin(1);
    let (nodes, set) = sector_band_nodes(&w, &thinned, (990.0, 1035.0), 0.06, false, 8);
    assert!(nodes.len() > 300, "want a real band, got {}", nodes.len());
    let cfg = SolveConfig { r_big: 6.0, eps: 0.2, max_iterations: 40, target: 1e-6 };
    let rep = interp_solve(&w, &nodes, &set, cfg).unwrap();
    gate.check(
        "solver converged on the thinned lattice",
        rep.outcome == SolveOutcome::Converged,
        format!("{:?} after {} iterations", rep.outcome, rep.iterations),
    );
    gate.check(
        "≥ 5 iterations of genuine residual correction",
        rep.iterations >= 5,
        format!("{} iterations, trace {:?}", rep.iterations, rep.residual_trace),
    );
    let worst = rep.contraction_factors.iter().cloned().fold(0.0f64, f64::max);
    gate.check(
        "contraction factor ≤ 0.8 per iteration",
        worst <= 0.8,
        format!("worst factor {worst:.3}"),
    );
    gate.check(
        "final node error ≤ 1e-3 relative",
        rep.final_node_error <= 1e-3,
        format!("final {:.3e}", rep.final_node_error),
    );

    // full lattice plus ring midpoints: density ≈ 1, no contraction expected
    let (nodes_d, set_d) = sector_band_nodes(&w, &lat, (995.0, 1020.0), 0.04, true, 9);
    let cfg_d = SolveConfig { r_big: 6.0, eps: 0.2, max_iterations: 25, target: 1e-6 };
    let rep_d = interp_solve(&w, &nodes_d, &set_d, cfg_d).unwrap();
    gate.check(
        "density ≈ 1 case reports no contraction",
        rep_d.outcome == SolveOutcome::NoContraction,
        format!("{:?}, trace {:?}", rep_d.outcome, rep_d.residual_trace),
    );
    gate.finish();
}

#[test]
fn criterion_09_sampling_and_jensen() {
    let mut gate = Gate::new("criterion 9: sampling monotonicity, hole witness, jensen");
    let w = RadialWeight::beta();
    let rings = build_rings(&w, 145.0).unwrap();
    let n = rings.len();
    let lat = Lattice::new(rings.clone());

    // ensemble of peaks on rings 30..45
    let mut ensemble = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..6 {
        let k = 31 + 2 * i;
        let c = Complex64::from_polar(lat.rings.rings[k].s, 2.0 * PI * rng.gen::<f64>());
        let peak = Arc::new(GaussianPeak::at(&w, c, 10.0).unwrap());
        ensemble.push(TestFunction::new(vec![(Complex64::new(1.0, 0.0), Atom::Peak(peak))]));
    }
    let grid = GridSpec {
        annulus: (lat.rings.rings[25].s, lat.rings.rings[50].s),
        radial_per_rho: 2,
        angular_cap: 1024,
        seed: 13,
    }
    .cells(&w);

    let full = lat.materialize(&w, 20, n - 1).unwrap();
    let (_, ratios_full) = sampling_ratio(&w, &full, &ensemble, SpaceNorm::Sup, &grid).unwrap();

    // delete rings 35..40 and ratios can only drop (exact monotonicity)
    let mut holed = rings.clone();
    holed.rings.retain(|r| r.index < 35 || r.index > 40);
    let holed_set = Lattice::new(holed).materialize(&w, 20, n - 1).unwrap();
    let (_, ratios_holed) =
        sampling_ratio(&w, &holed_set, &ensemble, SpaceNorm::Sup, &grid).unwrap();
    let monotone = ratios_full
        .iter()
        .zip(&ratios_holed)
        .all(|(a, b)| b <= &(a * (1.0 + 1e-12)));
    gate.check(
        "sampling ratio monotone under node deletion (exact)",
        monotone,
        format!("full {ratios_full:?} vs holed {ratios_holed:?}"),
    );

    // witness peak centered in the hole drives the ratio below 1e-3
    let witness_center = Complex64::from_polar(lat.rings.rings[37].s, 0.37);
    let witness = TestFunction::new(vec![(
        Complex64::new(1.0, 0.0),
        Atom::Peak(Arc::new(GaussianPeak::at(&w, witness_center, 10.0).unwrap())),
    )]);
    let (r_w, _) =
        sampling_ratio(&w, &holed_set, &[witness], SpaceNorm::Sup, &grid).unwrap();
    gate.check(
        "hole witness ratio ≤ 1e-3",
        r_w <= 1e-3,
        format!("witness ratio {r_w:.3e}"),
    );

    // jensen: residual ≈ 0 for ring products, ≥ -1e-8 always. The circle
    // radii stay far enough inside the stored rings for the product tail.
    let wd = RadialWeight::pow_inv(1.0);
    let rings_d = Arc::new(build_rings(&wd, 0.9995).unwrap());
    let p = RingProductEval::new(rings_d.clone());
    let mut worst_abs = 0.0f64;
    let mut min_res = f64::INFINITY;
    for (i, k) in [4usize, 7, 9, 11].iter().enumerate() {
        let r = 0.5 * (rings_d.rings[*k].s + rings_d.rings[*k].r_hi);
        let res = jensen_residual(&p, r, 40 + i as u64).unwrap();
        worst_abs = worst_abs.max(res.abs());
        min_res = min_res.min(res);
    }
    gate.check(
        "jensen |residual| ≤ 1e-6 for ring products",
        worst_abs <= 1e-6,
        format!("worst |res| {worst_abs:.2e}"),
    );
    gate.check(
        "jensen residual ≥ -1e-8 everywhere",
        min_res >= -1e-8,
        format!("min res {min_res:.2e}"),
    );
    gate.finish();
}

#[test]
fn criterion_10_oracle_equivalences() {
    let mut gate = Gate::new("criterion 10: oracle equivalences");
    // local counts against brute-force disc counts, 10³ queries, exact
    let w = RadialWeight::beta();
    let lat = Lattice::new(build_rings(&w, 90.0).unwrap());
    let n = lat.rings.len();
    let set = lat.materialize(&w, 0, n - 1).unwrap();
    let pts = set.points().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut mismatches = 0usize;
    let mut done = 0usize;
    while done < 1000 {
        let r = 70.0 * rng.gen::<f64>();
        let z = Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>());
        let rr = 1.0 + 12.0 * rng.gen::<f64>();
        match local_count(&w, &set, z, rr) {
            Ok((count, _)) => {
                let brute = pts.iter().filter(|p| (*p - z).norm() < rr).count();
                if count != brute {
                    mismatches += 1;
                }
                done += 1;
            }
            Err(_) => {}
        }
    }
    gate.check(
        "local_count equals brute-force disc count on 10³ queries",
        mismatches == 0,
        format!("{mismatches} mismatches"),
    );

    // norm quadrature against the closed-form Gaussian integral
    let f = TestFunction::constant(1.0);
    let grid =
        GridSpec { annulus: (0.0, 5.0), radial_per_rho: 24, angular_cap: 128, seed: 2 }.cells(&w);
    let got = continuous_norm_log(&w, &f, SpaceNorm::Lp(2.0), &grid).unwrap().exp();
    let exact = (2.0 * PI * (1.0 - (-12.5f64).exp())).sqrt();
    let rel = (got - exact).abs() / exact;
    gate.check(
        "L² quadrature matches 2π(1-e^{-12.5}) to 0.1%",
        rel <= 1e-3,
        format!("{got:.8} vs {exact:.8} (rel {rel:.2e})"),
    );

    // separation is exact and stable on the thinned lattice
    let s_full = separation(&w, &set).unwrap();
    gate.check(
        "lattice separation on the order of √(2π)",
        s_full > 1.0 && s_full < 3.0,
        format!("separation {s_full:.4}"),
    );
    gate.finish();
}
