//! Bound-computing programs: the sparse SOS hierarchy, the Putinar
//! hierarchy, copositive reformulations and the ε upper bound.

mod copositive;
mod heuristic;
mod putinar;
mod sos;
mod sparse;
mod upper;

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use num_rational::BigRational;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::certificate::Certificate;
use crate::conic::{default_psd_backend, solve_conic, ConicBackend, ConicError, ConicProgram, ResidualReport, SolverResult, SolverStatus};
use crate::poly::PolyError;
use crate::polya::PolyaError;
use crate::semialg::SetError;

pub use copositive::{compact_simplex_reformulation, copositive_lower_bound, CopositiveLayout};
pub use heuristic::{
    spot_check_copositive, strong_positivity_heuristic, strong_positivity_heuristic_with, SpotCheckReport,
    StrongPositivityReport, Witness, HEURISTIC_LABEL,
};
pub use putinar::{build_putinar_program, putinar_lower_bound, PutinarProgram};
pub use sos::{Assembler, Gram, SosLayout};
pub use sparse::{build_sparse_program, sparse_lower_bound, SparseProgram};
pub use upper::{default_lambda_lb, upper_bound_at_points, upper_bound_eps, upper_bound_schedule, UpperBoundSampling};

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("rank {r} is below the required degree {d}")]
    RankTooSmall { r: u32, d: u32 },
    #[error("sigma0 degree {deg} exceeds rank {r}")]
    Sigma0Degree { deg: u32, r: u32 },
    #[error("the set must include x >= 0 explicitly (split variables first)")]
    NotNonneg,
    #[error("epsilon must be positive")]
    Epsilon,
    #[error("program too large: {entries} entries exceed the cap of {cap}")]
    MemoryGuard { entries: usize, cap: usize },
    #[error("g-vector has {got} entries for {expected} variables")]
    GVector { got: usize, expected: usize },
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Polya(#[from] PolyaError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgramSize {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub psd_blocks: Vec<usize>,
}

impl ProgramSize {
    pub fn of(p: &ConicProgram) -> Self {
        ProgramSize { rows: p.nrows(), cols: p.ncols(), nnz: p.nnz(), psd_blocks: p.psd_blocks.clone() }
    }

    /// Rough memory footprint in stored numbers, counting the dense
    /// `svec × svec` Hessian block an interior-point solver forms per PSD
    /// block.
    pub fn entries(&self) -> usize {
        let psd: usize = self.psd_blocks.iter().map(|s| (s * (s + 1) / 2).pow(2)).sum();
        self.nnz + self.cols + psd
    }
}

/// Outcome of one hierarchy level. A lower bound of −∞ means the program was
/// infeasible at this rank.
#[derive(Clone, Debug, Serialize)]
pub struct HierarchyResult {
    pub hierarchy: String,
    pub rank: u32,
    pub deg_sigma0: Option<u32>,
    #[serde(serialize_with = "ser_bound")]
    pub bound: f64,
    #[serde(serialize_with = "ser_opt_q")]
    pub exact_bound: Option<BigRational>,
    pub direction: Direction,
    pub status: SolverStatus,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
    pub wall_time: f64,
    pub size: ProgramSize,
    pub residual: Option<ResidualReport>,
    pub heuristic: Option<StrongPositivityReport>,
    pub notes: Vec<String>,
}

impl HierarchyResult {
    pub fn new(hierarchy: &str, rank: u32, direction: Direction) -> Self {
        HierarchyResult {
            hierarchy: hierarchy.to_owned(),
            rank,
            deg_sigma0: None,
            bound: f64::NAN,
            exact_bound: None,
            direction,
            status: SolverStatus::NumericalFailure,
            certificate: None,
            wall_time: 0.0,
            size: ProgramSize::default(),
            residual: None,
            heuristic: None,
            notes: Vec::new(),
        }
    }

    /// Bound as table text: the number, or `-inf` / `inf` / `nan`.
    pub fn bound_text(&self) -> String {
        format_bound(self.bound)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

pub fn format_bound(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn ser_bound<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format_bound(*v))
    }
}

fn ser_opt_q<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    crate::serde_q::opt::serialize(v, s)
}

/// Solver and extraction settings shared by the SOS-based hierarchies.
#[derive(Clone)]
pub struct HierarchyOptions {
    /// PSD-capable backend; the default registry's choice when `None`.
    pub backend: Option<Arc<dyn ConicBackend>>,
    pub time_limit: Option<f64>,
    /// Round the solution into a certificate.
    pub certificate: bool,
    pub max_den: u64,
    /// One ρ shared by all univariate-multiplier entries.
    pub shared_rho: bool,
    /// Abort before solving when the program exceeds this many entries.
    pub max_entries: Option<usize>,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            backend: None,
            time_limit: None,
            certificate: false,
            max_den: 1_000_000_000,
            shared_rho: false,
            max_entries: None,
        }
    }
}

impl fmt::Debug for HierarchyOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HierarchyOptions")
            .field("backend", &self.backend.as_ref().map(|b| b.name().to_owned()))
            .field("time_limit", &self.time_limit)
            .field("certificate", &self.certificate)
            .field("max_den", &self.max_den)
            .field("shared_rho", &self.shared_rho)
            .field("max_entries", &self.max_entries)
            .finish()
    }
}

impl HierarchyOptions {
    pub fn with_backend(backend: Arc<dyn ConicBackend>) -> Self {
        HierarchyOptions { backend: Some(backend), ..Default::default() }
    }
}

/// Denominator bounds tried when rounding a float solution: small ones
/// first (they recover simple exact certificates), ending at `max_den`.
pub(crate) fn denominator_ladder(max_den: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (2..10).map(|k| 10u64.pow(k)).filter(|&d| d < max_den).collect();
    v.push(max_den);
    v
}

/// Memory guard, backend lookup and the solve itself.
pub(crate) fn run_program(prog: &ConicProgram, opts: &HierarchyOptions) -> Result<SolverResult, HierarchyError> {
    let size = ProgramSize::of(prog);
    if let Some(cap) = opts.max_entries {
        if size.entries() > cap {
            return Err(HierarchyError::MemoryGuard { entries: size.entries(), cap });
        }
    }
    let backend = match &opts.backend {
        Some(b) => b.clone(),
        None => default_psd_backend()?,
    };
    Ok(solve_conic(prog, backend.as_ref(), opts.time_limit)?)
}

/// Fills the common result fields from a solve of a `max λ` program whose
/// λ column is `lambda_col`.
pub(crate) fn finish_result(
    out: &mut HierarchyResult,
    prog: &ConicProgram,
    res: &SolverResult,
    lambda_col: usize,
    start: Instant,
) {
    out.size = ProgramSize::of(prog);
    out.status = res.status;
    out.residual = res.residual.clone();
    out.bound = match res.status {
        SolverStatus::Optimal => res.primal[lambda_col],
        SolverStatus::Infeasible => f64::NEG_INFINITY,
        // only possible when the set is empty
        SolverStatus::Unbounded => f64::INFINITY,
        _ => f64::NAN,
    };
    out.wall_time = start.elapsed().as_secs_f64();
}
