use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use super::format::{parse_result, serialize_program};
use super::simplex::{solve_lp_with, LpOptions};
use super::{ConicError, ConicProgram, SolverResult, SolverStatus};

/// Environment variable holding the external solver command.
pub const SOLVER_CMD_ENV: &str = "POLYCERT_SOLVER_CMD";

/// The narrow contract every solver backend implements: take a program,
/// return status and vectors.
pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &str;
    fn supports_psd(&self) -> bool;
    fn solve(&self, prog: &ConicProgram, time_limit: Option<f64>) -> Result<SolverResult, ConicError>;
}

/// Validates, delegates, and attaches a residual report.
pub fn solve_conic(
    prog: &ConicProgram,
    backend: &dyn ConicBackend,
    time_limit: Option<f64>,
) -> Result<SolverResult, ConicError> {
    prog.validate()?;
    let start = Instant::now();
    let mut res = backend.solve(prog, time_limit).map_err(|e| match e {
        ConicError::BackendFailure { .. } => e,
        other => ConicError::BackendFailure { backend: backend.name().to_owned(), message: other.to_string() },
    })?;
    if res.status == SolverStatus::Optimal {
        if res.primal.len() != prog.ncols() {
            return Err(ConicError::BackendFailure {
                backend: backend.name().to_owned(),
                message: format!("returned {} primal values for {} columns", res.primal.len(), prog.ncols()),
            });
        }
        res.objective = prog.objective_value(&res.primal);
        res.residual = Some(prog.residual_report(&res.primal));
    }
    if res.wall_time == 0.0 {
        res.wall_time = start.elapsed().as_secs_f64();
    }
    res.backend = backend.name().to_owned();
    Ok(res)
}

/// The embedded simplex solver as a backend (LPs and 1×1 blocks only).
#[derive(Clone, Debug, Default)]
pub struct SimplexBackend {
    pub options: LpOptions,
}

impl ConicBackend for SimplexBackend {
    fn name(&self) -> &str {
        "simplex"
    }

    fn supports_psd(&self) -> bool {
        false
    }

    fn solve(&self, prog: &ConicProgram, time_limit: Option<f64>) -> Result<SolverResult, ConicError> {
        let mut opts = self.options.clone();
        if time_limit.is_some() {
            opts.time_limit = time_limit;
        }
        solve_lp_with(prog, &opts)
    }
}

#[cfg(feature = "clarabel")]
pub use clarabel_backend::ClarabelBackend;

#[cfg(feature = "clarabel")]
mod clarabel_backend {
    use super::*;
    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{
        DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus as CStatus, SupportedConeT,
    };

    /// Interior-point backend built on the Clarabel solver.
    #[derive(Clone, Debug)]
    pub struct ClarabelBackend {
        pub max_iter: u32,
        pub tol: f64,
        pub verbose: bool,
    }

    impl Default for ClarabelBackend {
        fn default() -> Self {
            ClarabelBackend { max_iter: 400, tol: 1e-9, verbose: false }
        }
    }

    impl ConicBackend for ClarabelBackend {
        fn name(&self) -> &str {
            "clarabel"
        }

        fn supports_psd(&self) -> bool {
            true
        }

        fn solve(&self, prog: &ConicProgram, time_limit: Option<f64>) -> Result<SolverResult, ConicError> {
            let start = Instant::now();
            let n = prog.ncols();
            let m_eq = prog.rows.len();
            // rows: equalities, then −v_j for cone variables
            // equality rows scaled to unit max norm; Clarabel's own
            // equilibration is bounded and cannot absorb wide ranges
            let row_scale: Vec<f64> = prog
                .rows
                .iter()
                .map(|row| {
                    let m = row.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
                    if m > 0.0 { 1.0 / m } else { 1.0 }
                })
                .collect();
            let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(prog.nnz() + n);
            for (i, row) in prog.rows.iter().enumerate() {
                for &(j, v) in row {
                    trip.push((i, j, v * row_scale[i]));
                }
            }
            let mut r = m_eq;
            for j in prog.free_vars..n {
                trip.push((r, j, -1.0));
                r += 1;
            }
            let nrows = r;
            trip.sort_by_key(|t| (t.1, t.0));
            let mut colptr = vec![0usize; n + 1];
            let mut rowval = Vec::with_capacity(trip.len());
            let mut nzval = Vec::with_capacity(trip.len());
            for &(i, j, v) in &trip {
                colptr[j + 1] += 1;
                rowval.push(i);
                nzval.push(v);
            }
            for j in 0..n {
                colptr[j + 1] += colptr[j];
            }
            let a = CscMatrix::new(nrows, n, colptr, rowval, nzval);
            let mut b: Vec<f64> = prog.b.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
            b.resize(nrows, 0.0);
            let mut qv = vec![0.0; n];
            for &(j, c) in &prog.objective {
                qv[j] = -c;
            }
            let p = CscMatrix::zeros((n, n));
            let mut cones = Vec::new();
            if m_eq > 0 {
                cones.push(SupportedConeT::ZeroConeT(m_eq));
            }
            if prog.nonneg_vars > 0 {
                cones.push(SupportedConeT::NonnegativeConeT(prog.nonneg_vars));
            }
            for &s in &prog.psd_blocks {
                cones.push(SupportedConeT::PSDTriangleConeT(s));
            }
            let mut sb = DefaultSettingsBuilder::default();
            sb.verbose(self.verbose)
                .max_iter(self.max_iter)
                .tol_gap_abs(self.tol)
                .tol_gap_rel(self.tol)
                .tol_feas(self.tol)
                .direct_solve_method("faer".into())
                .time_limit(time_limit.unwrap_or(f64::INFINITY));
            let settings = sb.build().map_err(|e| fail(format!("settings: {e:?}")))?;
            let mut solver = DefaultSolver::new(&p, &qv, &a, &b, &cones, settings)
                .map_err(|e| fail(format!("setup: {e:?}")))?;
            solver.solve();
            let sol = &solver.solution;
            let status = match sol.status {
                CStatus::Solved | CStatus::AlmostSolved => SolverStatus::Optimal,
                CStatus::PrimalInfeasible | CStatus::AlmostPrimalInfeasible => SolverStatus::Infeasible,
                CStatus::DualInfeasible | CStatus::AlmostDualInfeasible => SolverStatus::Unbounded,
                CStatus::MaxTime => SolverStatus::TimeLimit,
                _ => SolverStatus::NumericalFailure,
            };
            Ok(SolverResult {
                status,
                objective: -sol.obj_val,
                primal: sol.x.clone(),
                dual: sol.z[..m_eq].iter().zip(&row_scale).map(|(z, s)| z * s).collect(),
                iterations: sol.iterations as usize,
                wall_time: start.elapsed().as_secs_f64(),
                basis: None,
                residual: None,
                backend: "clarabel".into(),
            })
        }
    }

    fn fail(message: String) -> ConicError {
        ConicError::BackendFailure { backend: "clarabel".into(), message }
    }
}

/// File-based fallback: writes the program in the text format, runs
/// `<command> <program-file> <result-file>` through the shell and parses the
/// result file.
#[derive(Clone, Debug)]
pub struct ExternalBackend {
    pub command: String,
    pub workdir: Option<PathBuf>,
}

impl ExternalBackend {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalBackend { command: command.into(), workdir: None }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var(SOLVER_CMD_ENV).ok().filter(|s| !s.trim().is_empty()).map(Self::new)
    }
}

impl ConicBackend for ExternalBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn supports_psd(&self) -> bool {
        true
    }

    fn solve(&self, prog: &ConicProgram, _time_limit: Option<f64>) -> Result<SolverResult, ConicError> {
        let fail = |message: String| ConicError::BackendFailure { backend: "external".into(), message };
        let dir = match &self.workdir {
            Some(d) => d.clone(),
            None => std::env::temp_dir(),
        };
        let stamp = format!(
            "polycert-{}-{}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos())
                .unwrap_or(0)
        );
        let prog_path = dir.join(format!("{stamp}.prog"));
        let res_path = dir.join(format!("{stamp}.result"));
        std::fs::write(&prog_path, serialize_program(prog)).map_err(|e| fail(format!("write program: {e}")))?;
        let start = Instant::now();
        let out = Command::new("sh")
            .arg("-c")
            .arg(format!(
                "{} '{}' '{}'",
                self.command,
                prog_path.display(),
                res_path.display()
            ))
            .output()
            .map_err(|e| fail(format!("spawn: {e}")));
        let _ = std::fs::remove_file(&prog_path);
        let out = out?;
        if !out.status.success() {
            let _ = std::fs::remove_file(&res_path);
            return Err(fail(format!(
                "command exited with {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(&res_path).map_err(|e| fail(format!("read result: {e}")))?;
        let _ = std::fs::remove_file(&res_path);
        let mut res = parse_result(&text, "external")?;
        res.wall_time = start.elapsed().as_secs_f64();
        Ok(res)
    }
}

/// Named backends. `with_defaults` registers `simplex`, `clarabel` (when
/// compiled in) and `external` (when the environment variable is set).
#[derive(Clone, Default)]
pub struct BackendRegistry {
    backends: BTreeMap<String, Arc<dyn ConicBackend>>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(SimplexBackend::default()));
        #[cfg(feature = "clarabel")]
        r.register(Arc::new(ClarabelBackend::default()));
        if let Some(e) = ExternalBackend::from_env() {
            r.register(Arc::new(e));
        }
        r
    }

    pub fn register(&mut self, b: Arc<dyn ConicBackend>) {
        self.backends.insert(b.name().to_owned(), b);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ConicBackend>, ConicError> {
        self.backends.get(name).cloned().ok_or_else(|| ConicError::BackendMissing(name.to_owned()))
    }

    pub fn names(&self) -> Vec<String> {
        self.backends.keys().cloned().collect()
    }

    /// First PSD-capable backend: `clarabel`, then `external`.
    pub fn psd(&self) -> Result<Arc<dyn ConicBackend>, ConicError> {
        for name in ["clarabel", "external"] {
            if let Some(b) = self.backends.get(name) {
                return Ok(b.clone());
            }
        }
        self.backends
            .values()
            .find(|b| b.supports_psd())
            .cloned()
            .ok_or_else(|| ConicError::BackendMissing("any PSD-capable backend".into()))
    }
}

pub fn default_psd_backend() -> Result<Arc<dyn ConicBackend>, ConicError> {
    BackendRegistry::with_defaults().psd()
}
