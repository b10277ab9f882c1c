//! Block-structured conic programs.
//!
//! Variables are laid out as `[free | non-negative | PSD block 0 | PSD block 1 | …]`.
//! A PSD block of size `s` contributes `s(s+1)/2` columns holding its upper
//! triangle in column-major order, with off-diagonal entries scaled by √2
//! (so `⟨svec X, svec Y⟩ = ⟨X, Y⟩`). The program is
//!
//! ```text
//! maximize  c⊤v   subject to  A v = b,  v_free ∈ R,  v_nonneg ≥ 0,  mat(v_block) ⪰ 0.
//! ```

mod backend;
mod exact;
mod format;
mod simplex;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backend::{
    default_psd_backend, solve_conic, BackendRegistry, ConicBackend, ExternalBackend, SimplexBackend,
    SOLVER_CMD_ENV,
};
#[cfg(feature = "clarabel")]
pub use backend::ClarabelBackend;
pub use exact::solve_rational_system;
pub use format::{parse_program, parse_result, serialize_program, serialize_result};
pub use simplex::{solve_lp, solve_lp_with, LpOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("the simplex solver does not handle PSD blocks larger than 1x1")]
    HasPsd,
    #[error("no backend named `{0}` is registered")]
    BackendMissing(String),
    #[error("backend `{backend}` failed: {message}")]
    BackendFailure { backend: String, message: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
    TimeLimit,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::Infeasible => "infeasible",
            SolverStatus::Unbounded => "unbounded",
            SolverStatus::NumericalFailure => "numerical-failure",
            SolverStatus::TimeLimit => "time-limit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "optimal" => SolverStatus::Optimal,
            "infeasible" => SolverStatus::Infeasible,
            "unbounded" => SolverStatus::Unbounded,
            "numerical-failure" => SolverStatus::NumericalFailure,
            "time-limit" => SolverStatus::TimeLimit,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// ‖A v − b‖∞
    pub equality_inf: f64,
    /// Smallest value among the non-negative variables (0 if there are none).
    pub min_nonneg: f64,
    /// Smallest eigenvalue of each PSD block.
    pub min_psd_eig: Vec<f64>,
}

impl ResidualReport {
    /// The acceptance rule for conic results: equality residual at most
    /// `1e-6 (1 + ‖b‖∞)` and every PSD eigenvalue at least `-1e-7`.
    pub fn acceptable(&self, b_inf: f64) -> bool {
        self.equality_inf <= 1e-6 * (1.0 + b_inf)
            && self.min_psd_eig.iter().all(|&e| e >= -1e-7)
            && self.min_nonneg >= -1e-7
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub status: SolverStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub iterations: usize,
    pub wall_time: f64,
    /// Basic columns of an LP solution, when the solver is simplex-based.
    pub basis: Option<Vec<usize>>,
    pub residual: Option<ResidualReport>,
    pub backend: String,
}

impl SolverResult {
    pub fn failed(status: SolverStatus, backend: &str) -> Self {
        SolverResult {
            status,
            objective: f64::NAN,
            primal: vec![],
            dual: vec![],
            iterations: 0,
            wall_time: 0.0,
            basis: None,
            residual: None,
            backend: backend.to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConicProgram {
    pub free_vars: usize,
    pub nonneg_vars: usize,
    pub psd_blocks: Vec<usize>,
    /// Rows of `A` as `(column, value)` pairs sorted by column.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
    /// Objective (maximized) as `(column, value)` pairs sorted by column.
    pub objective: Vec<(usize, f64)>,
}

pub fn svec_len(s: usize) -> usize {
    s * (s + 1) / 2
}

/// Position of `(i, j)`, `i ≤ j`, inside a block's svec.
pub fn svec_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

impl ConicProgram {
    pub fn ncols(&self) -> usize {
        self.free_vars + self.nonneg_vars + self.psd_blocks.iter().map(|&s| svec_len(s)).sum::<usize>()
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn psd_offset(&self, block: usize) -> usize {
        self.free_vars
            + self.nonneg_vars
            + self.psd_blocks[..block].iter().map(|&s| svec_len(s)).sum::<usize>()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.ncols();
        if self.rows.len() != self.b.len() {
            return Err(ConicError::Malformed(format!(
                "{} rows but {} right-hand sides",
                self.rows.len(),
                self.b.len()
            )));
        }
        for (r, row) in self.rows.iter().enumerate() {
            check_sorted(row, n).map_err(|m| ConicError::Malformed(format!("row {r}: {m}")))?;
        }
        check_sorted(&self.objective, n).map_err(|m| ConicError::Malformed(format!("objective: {m}")))?;
        if self.psd_blocks.contains(&0) {
            return Err(ConicError::Malformed("empty PSD block".into()));
        }
        Ok(())
    }

    pub fn b_inf(&self) -> f64 {
        self.b.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn objective_value(&self, v: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * v[j]).sum()
    }

    pub fn equality_residual(&self, v: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.b)
            .map(|(row, &b)| (row.iter().map(|&(j, a)| a * v[j]).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    /// Unscaled symmetric matrix of a PSD block.
    pub fn block_matrix(&self, v: &[f64], block: usize) -> Vec<Vec<f64>> {
        let s = self.psd_blocks[block];
        let off = self.psd_offset(block);
        let mut m = vec![vec![0.0; s]; s];
        for j in 0..s {
            for i in 0..=j {
                let raw = v[off + svec_index(i, j)];
                let val = if i == j { raw } else { raw / std::f64::consts::SQRT_2 };
                m[i][j] = val;
                m[j][i] = val;
            }
        }
        m
    }

    pub fn residual_report(&self, v: &[f64]) -> ResidualReport {
        let nn = &v[self.free_vars..self.free_vars + self.nonneg_vars];
        let min_nonneg = nn.iter().cloned().fold(0.0, f64::min);
        let min_psd_eig = (0..self.psd_blocks.len())
            .map(|k| min_eigenvalue(&self.block_matrix(v, k)))
            .collect();
        ResidualReport { equality_inf: self.equality_residual(v), min_nonneg, min_psd_eig }
    }
}

fn check_sorted(row: &[(usize, f64)], n: usize) -> Result<(), String> {
    for w in row.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err("columns not strictly increasing".into());
        }
    }
    if let Some(&(j, _)) = row.last() {
        if j >= n {
            return Err(format!("column {j} out of range (ncols = {n})"));
        }
    }
    if row.iter().any(|&(_, v)| !v.is_finite()) {
        return Err("non-finite coefficient".into());
    }
    Ok(())
}

pub fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let s = m.len();
    if s == 0 {
        return 0.0;
    }
    let mat = nalgebra::DMatrix::from_fn(s, s, |i, j| m[i][j]);
    let eig = nalgebra::SymmetricEigen::new(mat);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Symbolic column handle used while a program is being assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Col {
    Free(usize),
    Nonneg(usize),
    Psd { block: usize, i: usize, j: usize },
}

/// Incremental assembly of a [`ConicProgram`]; columns are numbered at
/// `build` time.
#[derive(Clone, Debug, Default)]
pub struct ProgramBuilder {
    free: usize,
    nonneg: usize,
    psd: Vec<usize>,
    rows: Vec<HashMap<Col, f64>>,
    b: Vec<f64>,
    objective: HashMap<Col, f64>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_free(&mut self) -> Col {
        self.free += 1;
        Col::Free(self.free - 1)
    }

    pub fn add_nonneg(&mut self) -> Col {
        self.nonneg += 1;
        Col::Nonneg(self.nonneg - 1)
    }

    pub fn add_psd(&mut self, size: usize) -> usize {
        assert!(size > 0);
        self.psd.push(size);
        self.psd.len() - 1
    }

    pub fn add_row(&mut self, rhs: f64) -> usize {
        self.rows.push(HashMap::new());
        self.b.push(rhs);
        self.rows.len() - 1
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_rhs(&mut self, row: usize, rhs: f64) {
        self.b[row] = rhs;
    }

    pub fn add_rhs(&mut self, row: usize, rhs: f64) {
        self.b[row] += rhs;
    }

    pub fn push(&mut self, row: usize, col: Col, v: f64) {
        if v != 0.0 {
            *self.rows[row].entry(col).or_insert(0.0) += v;
        }
    }

    /// Adds `a · (X_ij + X_ji)` (or `a · X_ii`) for a Gram block.
    pub fn push_gram(&mut self, row: usize, block: usize, i: usize, j: usize, a: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let v = if i == j { a } else { a * std::f64::consts::SQRT_2 };
        self.push(row, Col::Psd { block, i, j }, v);
    }

    pub fn set_objective(&mut self, col: Col, v: f64) {
        self.objective.insert(col, v);
    }

    pub fn column_index(&self, col: Col) -> usize {
        match col {
            Col::Free(k) => k,
            Col::Nonneg(k) => self.free + k,
            Col::Psd { block, i, j } => {
                self.free
                    + self.nonneg
                    + self.psd[..block].iter().map(|&s| svec_len(s)).sum::<usize>()
                    + svec_index(i, j)
            }
        }
    }

    pub fn build(&self) -> ConicProgram {
        let to_sorted = |m: &HashMap<Col, f64>| {
            let mut v: Vec<(usize, f64)> = m
                .iter()
                .filter(|(_, &x)| x != 0.0)
                .map(|(&c, &x)| (self.column_index(c), x))
                .collect();
            v.sort_by_key(|e| e.0);
            v
        };
        ConicProgram {
            free_vars: self.free,
            nonneg_vars: self.nonneg,
            psd_blocks: self.psd.clone(),
            rows: self.rows.iter().map(to_sorted).collect(),
            b: self.b.clone(),
            objective: to_sorted(&self.objective),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_layout() {
        let mut pb = ProgramBuilder::new();
        let f = pb.add_free();
        let k = pb.add_psd(3);
        let n = pb.add_nonneg();
        let r = pb.add_row(1.0);
        pb.push(r, f, 1.0);
        pb.push(r, n, 2.0);
        pb.push_gram(r, k, 2, 1, 1.0);
        let p = pb.build();
        assert_eq!(p.ncols(), 1 + 1 + 6);
        assert_eq!(p.psd_offset(0), 2);
        assert_eq!(p.rows[0], vec![(0, 1.0), (1, 2.0), (2 + 4, std::f64::consts::SQRT_2)]);
        p.validate().unwrap();
    }

    #[test]
    fn svec_round_trip() {
        let p = ConicProgram { psd_blocks: vec![2], ..Default::default() };
        let v = vec![1.0, 0.5 * std::f64::consts::SQRT_2, 3.0];
        let m = p.block_matrix(&v, 0);
        assert_eq!(m[0][0], 1.0);
        assert!((m[0][1] - 0.5).abs() < 1e-15);
        assert_eq!(m[1][1], 3.0);
        assert!((min_eigenvalue(&m) - (2.0 - 1.25f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_bad_rows() {
        let p = ConicProgram { nonneg_vars: 1, rows: vec![vec![(3, 1.0)]], b: vec![0.0], ..Default::default() };
        assert!(p.validate().is_err());
        let p = ConicProgram { nonneg_vars: 1, rows: vec![vec![(0, 1.0)]], b: vec![], ..Default::default() };
        assert!(p.validate().is_err());
    }
}
