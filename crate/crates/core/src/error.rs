use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// Diagnostics that are expected outcomes of an experiment (violation lists,
/// "no contraction" traces) are carried in report types instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("assumption violation at r = {r}: {what}")]
    Assumption { r: f64, what: String },

    #[error("origin singularity: h'/r diverges at r = 0")]
    OriginSingularity,

    #[error("quadrature failure on [{a}, {b}]: achieved {achieved:.3e}, wanted {wanted:.3e}")]
    Quadrature {
        a: f64,
        b: f64,
        achieved: f64,
        wanted: f64,
    },

    #[error("ring overflow at r = {r}: domain boundary reached with partial mass {partial_mass}")]
    RingOverflow { r: f64, partial_mass: f64 },

    #[error("anchor infeasible: cannot straddle s = {s} with an integer-mass ring")]
    AnchorInfeasible { s: f64 },

    #[error("undefined separation: point set has fewer than 2 points")]
    UndefinedSeparation,

    #[error("partial coverage: disc around ({re}, {im}) exits the materialized region")]
    PartialCoverage { re: f64, im: f64 },

    #[error("indeterminate at a zero of the product")]
    IndeterminateAtZero,

    #[error("grid out of range: {what}")]
    GridOutOfRange { what: String },

    #[error("anchor too central: fewer than 3 lattice points within 5ρ of the center")]
    AnchorTooCentral,

    #[error("growth hypothesis failed at coefficient {index}: |c| = {value:.3e} exceeds {bound:.3e}")]
    GrowthHypothesis { index: usize, value: f64, bound: f64 },

    #[error("degenerate atom: normalizing value vanishes")]
    DegenerateAtom,

    #[error("separation required: input set is not d_ρ-separated")]
    SeparationRequired,

    #[error("tail not converged: product rings end before the factor bound drops below cutoff")]
    TailNotConverged,

    #[error("bad input: {0}")]
    BadInput(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
}
