//! Command-line driver: every toolkit operation as a subcommand with
//! file-based inputs and outputs.
//!
//! Exit codes: 0 success, 2 when a validation report carries assumption
//! violations, 64 for usage errors, 1 for everything else. All randomness is
//! seeded; rerunning a command with the same arguments reproduces its output
//! byte for byte.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rwspace::atomize::{anchored_rings, asymptotic_ratios, build_rings, read_rings_csv, write_rings_csv, RingSequence};
use rwspace::geometry::{density_profile, q_monotone_check, separation, Coverage, Lattice, PointSet};
use rwspace::logcx::LogComplex;
use rwspace::peaks::{tail_sum, CubicPeak, GaussianPeak, TaylorTruncation};
use rwspace::products::{band_grid, band_over, diag_a, RingProductEval};
use rwspace::report::{BandSummary, PlotSeries, PlotSpec};
use rwspace::verify::{
    companion_checks, companion_weight, interp_solve, jensen_residual, point_evaluation_ratios,
    sampling_ratio, Atom, GridSpec, NodeData, SolveConfig, SpaceNorm, TestFunction,
};
use rwspace::weierstrass::{band_inside, lower_margins, SigmaLattice};
use rwspace::weight::{Domain, RadialWeight, WeightConfig};
use serde::Serialize;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as IoWrite};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "rwspace", about = "radial weighted spaces toolkit", version)]
struct Cli {
    /// Cap rayon parallelism (0 = default)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for all randomized grids and jitters
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a weight's standing assumptions and classify it
    Validate(ValidateArgs),
    /// Split the weight measure into integer-mass rings
    Atomize(AtomizeArgs),
    /// Materialize lattice points from a ring file
    Lattice(LatticeArgs),
    /// Density profile q±(R) of a point set
    Density(DensityArgs),
    /// Boundedness band of the canonical ring product
    ProductBand(ProductBandArgs),
    /// Growth band and lower margins of the sigma partial product
    SigmaBand(SigmaBandArgs),
    /// Build a peak function and report its profile bands
    Peak(PeakArgs),
    /// Certified Taylor truncation of e^{z²}
    Truncate(TruncateArgs),
    /// Iterative interpolation solve on a lattice band
    Interp(InterpArgs),
    /// Sampling ratios over an ensemble, with optional deleted rings
    Sample(SampleArgs),
    /// Jensen counting residual of the ring product
    Jensen(JensenArgs),
    /// Thinned-lattice densities, companion weight, point-evaluation bound
    IndexDemo(IndexDemoArgs),
    /// Far-field tail sums A_R over lattice centers
    TailSum(TailSumArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(64);
        }
    };
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Box<dyn std::error::Error>> {
    let seed = cli.seed;
    match cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Atomize(a) => cmd_atomize(a),
        Command::Lattice(a) => cmd_lattice(a),
        Command::Density(a) => cmd_density(a, seed),
        Command::ProductBand(a) => cmd_product_band(a, seed),
        Command::SigmaBand(a) => cmd_sigma_band(a, seed),
        Command::Peak(a) => cmd_peak(a, seed),
        Command::Truncate(a) => cmd_truncate(a),
        Command::Interp(a) => cmd_interp(a, seed),
        Command::Sample(a) => cmd_sample(a, seed),
        Command::Jensen(a) => cmd_jensen(a, seed),
        Command::IndexDemo(a) => cmd_index_demo(a, seed),
        Command::TailSum(a) => cmd_tail_sum(a),
    }
}

fn load_weight(path: &Path) -> Result<RadialWeight, Box<dyn std::error::Error>> {
    let cfg: WeightConfig = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Ok(cfg.build()?)
}

fn load_rings(path: &Path, domain: Domain) -> Result<RingSequence, Box<dyn std::error::Error>> {
    Ok(read_rings_csv(domain, BufReader::new(File::open(path)?))?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Box<dyn std::error::Error>> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn parse_pair(s: &str) -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected lo,hi — got {s}").into());
    }
    Ok((parts[0].trim().parse()?, parts[1].trim().parse()?))
}

fn parse_list(s: &str) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    s.split(',').map(|p| Ok(p.trim().parse()?)).collect()
}

// ------------------------------------------------------------------

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    weight: PathBuf,
    /// radial range lo,hi (defaults to a domain-appropriate tail)
    #[arg(long)]
    range: Option<String>,
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_validate(a: ValidateArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let (lo, hi) = match a.range {
        Some(r) => parse_pair(&r)?,
        None => match w.domain() {
            Domain::Disc => (0.5, (0.99f64).min(w.safe_radius() * 0.999)),
            Domain::Plane => (1.0, 30.0f64.min(w.safe_radius() * 0.5)),
        },
    };
    let report = w.validate(lo, hi, a.grid)?;
    write_json(&a.out, &report)?;
    println!(
        "{}: class {:?}, {} violation(s)",
        w.label(),
        report.class,
        report.violations.len()
    );
    Ok(if report.ok() { 0 } else { 2 })
}

#[derive(Args)]
struct AtomizeArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    r_max: f64,
    /// build anchored at this radius instead of from the origin
    #[arg(long)]
    anchor: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// also write the four asymptotic ratios per ring
    #[arg(long)]
    ratios: Option<PathBuf>,
}

fn cmd_atomize(a: AtomizeArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let rings = match a.anchor {
        Some(s) => anchored_rings(&w, s, a.r_max)?,
        None => build_rings(&w, a.r_max)?,
    };
    write_rings_csv(BufWriter::new(File::create(&a.out)?), &rings)?;
    if let Some(path) = a.ratios {
        let mut f = BufWriter::new(File::create(&path)?);
        writeln!(f, "k,width_over_rho,mass_width,width_ratio,centroid_frac")?;
        for r in asymptotic_ratios(&w, &rings) {
            writeln!(
                f,
                "{},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.index, r.width_over_rho, r.mass_width, r.width_ratio, r.centroid_frac
            )?;
        }
        let spec = PlotSpec {
            title: "ring construction ratios".into(),
            x_label: "ring index".into(),
            y_label: "ratio".into(),
            series: vec![PlotSeries {
                name: "(r_{k+1}-r_k)/rho(r_k)".into(),
                csv: path.display().to_string(),
                x_col: "k".into(),
                y_col: "width_over_rho".into(),
            }],
        };
        write_json(&path.with_extension("plot.json"), &spec)?;
    }
    println!("{} rings, {} points, outer radius {}", rings.len(), rings.total_points(), rings.outer_radius());
    Ok(0)
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    rings: PathBuf,
    /// ring index range lo,hi
    #[arg(long)]
    range: String,
    /// remove rings of 2-adic valuation d before materializing
    #[arg(long)]
    thin: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_lattice(a: LatticeArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let rings = load_rings(&a.rings, w.domain())?;
    let (lo, hi) = parse_pair(&a.range)?;
    let mut lat = Lattice::new(rings);
    if let Some(d) = a.thin {
        lat = lat.thin(d);
    }
    let set = lat.materialize(&w, lo as usize, hi as usize)?;
    let mut f = BufWriter::new(File::create(&a.out)?);
    writeln!(f, "re,im")?;
    for p in set.points() {
        writeln!(f, "{:.16e},{:.16e}", p.re, p.im)?;
    }
    println!("{} points", set.len());
    Ok(0)
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    rings: PathBuf,
    /// ring index range lo,hi to materialize
    #[arg(long)]
    range: String,
    #[arg(long)]
    thin: Option<u32>,
    /// R values, comma separated
    #[arg(long)]
    radii: String,
    /// scan annulus lo,hi (radii)
    #[arg(long)]
    annulus: String,
    #[arg(long, default_value_t = 64)]
    centers: usize,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_density(a: DensityArgs, seed: u64) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let rings = load_rings(&a.rings, w.domain())?;
    let (lo, hi) = parse_pair(&a.range)?;
    let mut lat = Lattice::new(rings);
    if let Some(d) = a.thin {
        lat = lat.thin(d);
    }
    let set = lat.materialize(&w, lo as usize, hi as usize)?;
    let r_grid = parse_list(&a.radii)?;
    let annulus = parse_pair(&a.annulus)?;
    let rep = density_profile(&w, &set, &r_grid, annulus, a.centers, seed)?;
    let monotone = q_monotone_check(&rep);
    #[derive(Serialize)]
    struct Out {
        report: rwspace::geometry::DensityReport,
        q_monotone: bool,
        separation: f64,
    }
    let sep = separation(&w, &set)?;
    write_json(&a.out, &Out { report: rep, q_monotone: monotone, separation: sep })?;
    Ok(0)
}

#[derive(Args)]
struct ProductBandArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    rings: PathBuf,
    /// ring positions lo,hi for the diagnostic grid
    #[arg(long)]
    ring_range: String,
    #[arg(long, default_value_t = 48)]
    angles: usize,
    #[arg(long, default_value_t = 0.1)]
    dist_floor: f64,
    /// truncate the product at this ring position
    #[arg(long)]
    truncate: Option<usize>,
    /// include per-point values in the report
    #[arg(long)]
    emit_values: bool,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_product_band(a: ProductBandArgs, seed: u64) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let rings = Arc::new(load_rings(&a.rings, w.domain())?);
    let p = match a.truncate {
        Some(k) => RingProductEval::truncated(rings, k),
        None => RingProductEval::new(rings),
    };
    let (lo, hi) = parse_pair(&a.ring_range)?;
    let grid = band_grid(&w, &p, lo as usize, hi as usize, a.angles, a.dist_floor, seed);
    let band = band_over(&grid, |z| diag_a(&p, &w, z))?;
    #[derive(Serialize)]
    struct Out {
        grid_points: usize,
        dist_floor: f64,
        seed: u64,
        band: BandSummary,
        values: Option<Vec<f64>>,
    }
    let values = if a.emit_values {
        Some(grid.iter().map(|&z| diag_a(&p, &w, z)).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    write_json(&a.out, &Out { grid_points: grid.len(), dist_floor: a.dist_floor, seed, band, values })?;
    println!("band width {:.3} over {} points", band.width(), grid.len());
    Ok(0)
}

#[derive(Args)]
struct SigmaBandArgs {
    #[arg(long, default_value_t = 10.0)]
    scale: f64,
    #[arg(long, default_value_t = 4000)]
    grid: usize,
    #[arg(long, default_value_t = 0.1)]
    dist_floor: f64,
    #[arg(long, default_value_t = 100)]
    lower_samples: usize,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_sigma_band(a: SigmaBandArgs, seed: u64) -> Result<i32, Box<dyn std::error::Error>> {
    let lat = SigmaLattice::new(a.scale);
    let inside = band_inside(&lat, a.grid, a.dist_floor, seed)?;
    let margins = lower_margins(&lat, a.lower_samples, seed.wrapping_add(1));
    let min_margin = margins.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min);
    #[derive(Serialize)]
    struct Out {
        inside: rwspace::weierstrass::SigmaBandReport,
        lower_margin_min: f64,
        lower_samples: usize,
    }
    println!("inside width {:.3}, min outer margin {:.3}", inside.band.width(), min_margin);
    write_json(&a.out, &Out { inside, lower_margin_min: min_margin, lower_samples: margins.len() })?;
    Ok(0)
}

#[derive(Args)]
struct PeakArgs {
    #[arg(long)]
    weight: PathBuf,
    /// cubic or gauss
    #[arg(long)]
    kind: String,
    #[arg(long)]
    center_radius: f64,
    #[arg(long, default_value_t = 0.0)]
    center_angle: f64,
    /// scale R for the gaussian profile
    #[arg(long, default_value_t = 10.0)]
    big_r: f64,
    /// r_max for the supporting ring build (cubic only; gauss sizes itself)
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    band_samples: usize,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_peak(a: PeakArgs, seed: u64) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let z = Complex64::from_polar(a.center_radius, a.center_angle);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    #[derive(Serialize)]
    struct Out {
        kind: String,
        center: (f64, f64),
        big_r: f64,
        rho: f64,
        band: BandSummary,
        decay_margin_min: f64,
        log_c: f64,
    }
    let (band, margin_min, log_c, rho) = match a.kind.as_str() {
        "cubic" => {
            let r_max = a.r_max.unwrap_or(w.safe_radius() * 0.99);
            let rings = Arc::new(build_rings(&w, r_max)?);
            let peak = CubicPeak::new(&w, rings, z)?;
            let rho = peak.rho_center();
            let mut vals = Vec::new();
            for i in 0..a.band_samples {
                let rad = 0.95 * rho * ((i % 16) as f64 + 0.5) / 16.0;
                let ang = 2.0 * PI * rng.gen::<f64>();
                vals.push(peak.normalized(&w, z + Complex64::from_polar(rad, ang))?);
            }
            let band = BandSummary::from_values(&vals);
            let log_c = band.max + 4.0;
            let mut margin_min = f64::INFINITY;
            for _ in 0..200 {
                let rad = rho * (2.0 + 18.0 * rng.gen::<f64>());
                let p = z + Complex64::from_polar(rad, 2.0 * PI * rng.gen::<f64>());
                if !w.domain().contains(p.norm()) || p.norm() >= w.safe_radius() {
                    continue;
                }
                margin_min = margin_min.min(peak.decay_margin(&w, p, log_c)?);
            }
            (band, margin_min, log_c, rho)
        }
        "gauss" => {
            let peak = GaussianPeak::at(&w, z, a.big_r)?;
            let rho = peak.rho_center();
            let mut vals = Vec::new();
            let mut guard = 0;
            while vals.len() < a.band_samples && guard < 100 * a.band_samples {
                guard += 1;
                let rad = a.big_r * rho * rng.gen::<f64>().sqrt();
                let p = z + Complex64::from_polar(rad, 2.0 * PI * rng.gen::<f64>());
                if peak.dist_to_divisor(p) < 0.1 * rho {
                    continue;
                }
                vals.push(peak.band_value(&w, p)?);
            }
            let band = BandSummary::from_values(&vals);
            let log_c = band.max + 2.0;
            let mut margin_min = f64::INFINITY;
            let mut n = 0;
            while n < 200 && guard < 100_000 {
                guard += 1;
                let rad = a.big_r * rho * (1.05 + rng.gen::<f64>());
                let p = z + Complex64::from_polar(rad, 2.0 * PI * rng.gen::<f64>());
                if !w.domain().contains(p.norm()) || p.norm() >= w.safe_radius() {
                    continue;
                }
                margin_min = margin_min.min(peak.decay_margin(&w, p, log_c)?);
                n += 1;
            }
            (band, margin_min, log_c, rho)
        }
        other => return Err(format!("unknown peak kind {other}").into()),
    };
    write_json(
        &a.out,
        &Out {
            kind: a.kind,
            center: (z.re, z.im),
            big_r: a.big_r,
            rho,
            band,
            decay_margin_min: margin_min,
            log_c,
        },
    )?;
    println!("band width {:.3}, min decay margin {:.3}", band.width(), margin_min);
    Ok(0)
}

#[derive(Args)]
struct TruncateArgs {
    #[arg(long, default_value_t = 60)]
    degree: usize,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_truncate(a: TruncateArgs) -> Result<i32, Box<dyn std::error::Error>> {
    // the built-in test function e^{z²}
    let n = a.degree;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut fact = 1.0f64;
    for m in 0..=(n / 2) {
        if m > 0 {
            fact *= m as f64;
        }
        coeffs[2 * m] = Complex64::new(1.0 / fact, 0.0);
    }
    let t: TaylorTruncation = rwspace::peaks::taylor_truncate(&coeffs, n, a.eps)?;
    // measured inner tail and outer margin
    let r = t.inner_radius();
    let mut max_diff = 0.0f64;
    for i in 0..100 {
        let rad = r * (i as f64 + 0.5) / 100.0;
        let z = Complex64::from_polar(rad, 0.7 + 0.01 * i as f64);
        max_diff = max_diff.max(((z * z).exp() - t.eval(z)).norm());
    }
    #[derive(Serialize)]
    struct Out {
        degree: usize,
        eps: f64,
        r_scale: f64,
        inner_radius: f64,
        inner_bound: f64,
        measured_inner_tail: f64,
        outer_bound_ln_at_sqrt_n: f64,
        measured_outer_ln_at_sqrt_n: f64,
    }
    let z_out = (n as f64).sqrt();
    write_json(
        &a.out,
        &Out {
            degree: n,
            eps: a.eps,
            r_scale: t.r_scale(),
            inner_radius: r,
            inner_bound: t.inner_bound(),
            measured_inner_tail: max_diff,
            outer_bound_ln_at_sqrt_n: t.outer_bound_ln(z_out),
            measured_outer_ln_at_sqrt_n: t.eval(Complex64::new(z_out, 0.0)).norm().ln(),
        },
    )?;
    println!("inner bound {:.3e}, measured {:.3e}", t.inner_bound(), max_diff);
    Ok(0)
}

#[derive(Args)]
struct InterpArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    rings: PathBuf,
    /// thin the lattice: remove rings of 2-adic valuation d
    #[arg(long)]
    thin: Option<u32>,
    /// add ring midpoints on top of the full lattice (the dense case)
    #[arg(long)]
    midpoints: bool,
    /// radial band lo,hi carrying the nodes
    #[arg(long)]
    band: String,
    /// angular sector half-width (radians)
    #[arg(long, default_value_t = 0.06)]
    sector: f64,
    #[arg(long, default_value_t = 10.0)]
    big_r: f64,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 40)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-3)]
    target: f64,
    #[arg(long)]
    out: PathBuf,
    /// residual-per-iteration CSV
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn cmd_interp(a: InterpArgs, seed: u64) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let rings = load_rings(&a.rings, w.domain())?;
    let (lo, hi) = parse_pair(&a.band)?;
    let mut lat = Lattice::new(rings);
    if let Some(d) = a.thin {
        lat = lat.thin(d);
    }
    let (nodes, set) =
        sector_nodes(&w, &lat, (lo, hi), a.sector, a.midpoints, seed)?;
    let cfg = SolveConfig {
        r_big: a.big_r,
        eps: a.eps,
        max_iterations: a.max_iterations,
        target: a.target,
    };
    let rep = interp_solve(&w, &nodes, &set, cfg)?;
    if let Some(path) = a.trace {
        let mut f = BufWriter::new(File::create(&path)?);
        writeln!(f, "iteration,residual")?;
        for (i, r) in rep.residual_trace.iter().enumerate() {
            writeln!(f, "{i},{r:.12e}")?;
        }
        let spec = PlotSpec {
            title: "interpolation residual".into(),
            x_label: "iteration".into(),
            y_label: "sup residual / sup data".into(),
            series: vec![PlotSeries {
                name: "residual".into(),
                csv: path.display().to_string(),
                x_col: "iteration".into(),
                y_col: "residual".into(),
            }],
        };
        write_json(&path.with_extension("plot.json"), &spec)?;
    }
    println!(
        "{:?} after {} iterations, final residual {:.3e}",
        rep.outcome, rep.iterations, rep.final_node_error
    );
    write_json(&a.out, &rep)?;
    Ok(0)
}

/// Nodes on an angular sector of a lattice band: data on the inner 2/3 of
/// the sector, zeros on the margin. Optionally with ring midpoints added
/// (the density-doubling stress case).
fn sector_nodes(
    w: &RadialWeight,
    lat: &Lattice,
    band: (f64, f64),
    sector: f64,
    midpoints: bool,
    seed: u64,
) -> Result<(Vec<NodeData>, PointSet), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::new();
    let rings: Vec<&rwspace::atomize::Ring> =
        lat.rings.rings.iter().filter(|g| g.s > band.0 && g.s < band.1).collect();
    if rings.is_empty() {
        return Err("no rings in band".into());
    }
    let push_ring = |radius: f64, n: f64, rng: &mut ChaCha8Rng, nodes: &mut Vec<NodeData>| {
        let m_span = (sector * n / (2.0 * PI)) as i64;
        for m in -m_span..=m_span {
            let z = Complex64::from_polar(radius, 2.0 * PI * m as f64 / n);
            let inner = 2 * m_span / 3;
            let data = if m.abs() <= inner {
                LogComplex::new(
                    w.h(radius) + (rng.gen::<f64>() - 0.5),
                    2.0 * PI * rng.gen::<f64>() - PI,
                )
            } else {
                LogComplex::ZERO
            };
            nodes.push(NodeData { z, data });
        }
    };
    for g in &rings {
        push_ring(g.s, g.n_points as f64, &mut rng, &mut nodes);
        if midpoints {
            // midpoint circle between consecutive rings, same count, offset angles
            let mid = 0.5 * (g.s + g.r_hi);
            let n = g.n_points as f64;
            let m_span = (sector * n / (2.0 * PI)) as i64;
            for m in -m_span..=m_span {
                let z = Complex64::from_polar(mid, 2.0 * PI * (m as f64 + 0.5) / n);
                let data = LogComplex::ZERO;
                nodes.push(NodeData { z, data });
            }
        }
    }
    let pts: Vec<Complex64> = nodes.iter().map(|n| n.z).collect();
    let pad = 10.0 * w.rho(band.0)?;
    let set = PointSet::new(
        w,
        pts,
        Coverage { inner: band.0 - pad, outer: band.1 + pad },
    );
    Ok((nodes, set))
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    rings: PathBuf,
    /// ring index range lo,hi to materialize
    #[arg(long)]
    range: String,
    /// delete rings lo,hi (indices) to open a hole
    #[arg(long)]
    delete_rings: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    big_r: f64,
    #[arg(long, default_value_t = 8)]
    ensemble: usize,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_sample(a: SampleArgs, seed: u64) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let rings = load_rings(&a.rings, w.domain())?;
    let (lo, hi) = parse_pair(&a.range)?;
    let (lo, hi) = (lo as usize, hi as usize);
    let lat = Lattice::new(rings.clone());
    let deleted = match &a.delete_rings {
        Some(s) => {
            let (dl, dh) = parse_pair(s)?;
            Some((dl as usize, dh as usize))
        }
        None => None,
    };
    let mut kept = lat.rings.clone();
    if let Some((dl, dh)) = deleted {
        kept.rings.retain(|r| r.index < dl || r.index > dh);
    }
    let set = Lattice::new(kept).materialize(&w, lo, hi)?;

    // ensemble: gaussian peaks at jittered centers; a witness in the hole
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ensemble = Vec::new();
    let mut centers = Vec::new();
    for _ in 0..a.ensemble {
        let k = lo + 2 + (rng.gen::<u64>() as usize) % (hi - lo - 4);
        let s = lat.rings.rings[k].s;
        centers.push(Complex64::from_polar(s, 2.0 * PI * rng.gen::<f64>()));
    }
    if let Some((dl, dh)) = deleted {
        let mid = (dl + dh) / 2;
        centers.push(Complex64::from_polar(lat.rings.rings[mid].s, 0.37));
    }
    for &c in &centers {
        let peak = Arc::new(GaussianPeak::at(&w, c, a.big_r)?);
        ensemble.push(TestFunction::new(vec![(Complex64::new(1.0, 0.0), Atom::Peak(peak))]));
    }
    let grid = GridSpec {
        annulus: (set.coverage().inner, set.coverage().outer),
        radial_per_rho: 2,
        angular_cap: 1024,
        seed,
    }
    .cells(&w);
    let (min_ratio, ratios) = sampling_ratio(&w, &set, &ensemble, SpaceNorm::Sup, &grid)?;
    #[derive(Serialize)]
    struct Out {
        points: usize,
        deleted_rings: Option<(usize, usize)>,
        ratios: Vec<f64>,
        min_ratio: f64,
    }
    write_json(&a.out, &Out { points: set.len(), deleted_rings: deleted, ratios, min_ratio })?;
    println!("min sampling ratio {min_ratio:.3e}");
    Ok(0)
}

#[derive(Args)]
struct JensenArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    rings: PathBuf,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_jensen(a: JensenArgs, seed: u64) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let rings = Arc::new(load_rings(&a.rings, w.domain())?);
    let p = RingProductEval::new(rings);
    let res = jensen_residual(&p, a.radius, seed)?;
    #[derive(Serialize)]
    struct Out {
        radius: f64,
        residual: f64,
    }
    write_json(&a.out, &Out { radius: a.radius, residual: res })?;
    println!("jensen residual {res:.3e}");
    Ok(0)
}

#[derive(Args)]
struct IndexDemoArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// thinning depths, comma separated
    #[arg(long, default_value = "0,1,2")]
    d: String,
    #[arg(long, default_value_t = 24)]
    ensemble: usize,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_index_demo(a: IndexDemoArgs, seed: u64) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let wt = companion_weight(&w);
    let (r_lo, r_hi) = match w.domain() {
        Domain::Disc => (0.6, 0.99),
        Domain::Plane => (5.0, 40.0),
    };
    let checks = companion_checks(&w, &wt, r_lo, r_hi, 96)?;
    let rings = Arc::new(build_rings(&wt, r_hi)?);
    let lat = Lattice::new((*rings).clone());
    let n = lat.rings.len();
    let set = lat.materialize(&w, 0, n - 1)?;

    // thinned families: pairwise disjoint
    let ds: Vec<u32> = a.d.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
    let mut disjoint = true;
    for (i, &d1) in ds.iter().enumerate() {
        for &d2 in &ds[i + 1..] {
            let a1: Vec<usize> =
                lat.thinned_part(d1).rings.rings.iter().map(|r| r.index).collect();
            let a2: Vec<usize> =
                lat.thinned_part(d2).rings.rings.iter().map(|r| r.index).collect();
            if a1.iter().any(|k| a2.contains(k)) {
                disjoint = false;
            }
        }
    }

    // point-evaluation ratios over a product ensemble
    let base = Arc::new(RingProductEval::truncated(rings.clone(), n));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ensemble = Vec::new();
    for _ in 0..a.ensemble {
        let c = Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>());
        let c2 = Complex64::from_polar(0.3 * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
        ensemble.push(TestFunction::new(vec![
            (c, Atom::Product(base.clone())),
            (c2, Atom::Const(1.0)),
        ]));
    }
    let ratios = point_evaluation_ratios(&w, &set, &ensemble, a.p)?;
    let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
    #[derive(Serialize)]
    struct Out {
        companion: rwspace::verify::CompanionChecks,
        thinned_disjoint: bool,
        point_eval_ratios: Vec<f64>,
        max_point_eval_ratio: f64,
    }
    write_json(
        &a.out,
        &Out {
            companion: checks,
            thinned_disjoint: disjoint,
            point_eval_ratios: ratios,
            max_point_eval_ratio: max_ratio,
        },
    )?;
    println!("max |g(0)|/‖g‖ ratio {max_ratio:.3e}, disjoint: {disjoint}");
    Ok(0)
}

#[derive(Args)]
struct TailSumArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    rings: PathBuf,
    /// ring index range lo,hi to materialize
    #[arg(long)]
    range: String,
    /// center ring indices, comma separated
    #[arg(long)]
    centers: String,
    #[arg(long, default_value_t = 10.0)]
    big_r: f64,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_tail_sum(a: TailSumArgs) -> Result<i32, Box<dyn std::error::Error>> {
    let w = load_weight(&a.weight)?;
    let rings = load_rings(&a.rings, w.domain())?;
    let (lo, hi) = parse_pair(&a.range)?;
    let lat = Lattice::new(rings);
    let set = lat.materialize(&w, lo as usize, hi as usize)?;
    let centers: Vec<usize> = a
        .centers
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()?;
    let mut values = Vec::new();
    for &k in &centers {
        let z = Complex64::from_polar(lat.rings.rings[k].s, 0.31 + 0.07 * k as f64);
        values.push((k, tail_sum(&w, &set, z, a.big_r, a.eps)?));
    }
    #[derive(Serialize)]
    struct Out {
        big_r: f64,
        eps: f64,
        values: Vec<(usize, f64)>,
        max: f64,
    }
    let max = values.iter().map(|v| v.1).fold(0.0f64, f64::max);
    write_json(&a.out, &Out { big_r: a.big_r, eps: a.eps, values, max })?;
    println!("max tail sum {max:.4}");
    Ok(0)
}
