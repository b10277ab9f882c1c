//! Hierarchy dispatch for problem files and the benchmark grid runner.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::SolverStatus;
use crate::hierarchies::{
    copositive_lower_bound, format_bound, putinar_lower_bound, sparse_lower_bound, HierarchyError, HierarchyOptions,
    HierarchyResult,
};
use crate::polya::{lp_lower_bound, LpBoundOptions, LpSearchOptions, PolyaError};
use crate::problem::{gen_instance, Problem, ProblemError};
use crate::semialg::split_variables;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hierarchy {
    Lp,
    Sparse,
    Lasserre,
    Copositive,
}

impl Hierarchy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Hierarchy::Lp => "lp",
            Hierarchy::Sparse => "sparse",
            Hierarchy::Lasserre => "lasserre",
            Hierarchy::Copositive => "copositive",
        }
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hierarchy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lp" => Ok(Hierarchy::Lp),
            "sparse" => Ok(Hierarchy::Sparse),
            "lasserre" | "putinar" => Ok(Hierarchy::Lasserre),
            "copositive" => Ok(Hierarchy::Copositive),
            _ => Err(format!("unknown hierarchy `{s}` (lp, sparse, lasserre, copositive)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

impl From<PolyaError> for SolveError {
    fn from(e: PolyaError) -> Self {
        SolveError::Hierarchy(e.into())
    }
}

/// Settings for one hierarchy run on a problem file.
#[derive(Clone, Debug, Default)]
pub struct SolveSettings {
    pub deg_sigma0: Option<u32>,
    /// Box-layout entries with a τ multiplier (overrides the problem's).
    pub m1: Option<usize>,
    pub certificate: bool,
    pub hierarchy: HierarchyOptions,
}

/// Runs one level of a hierarchy. The copositive route splits free
/// variables first when the set is not inside the orthant.
pub fn solve_problem(prob: &Problem, h: Hierarchy, r: u32, s: &SolveSettings) -> Result<HierarchyResult, SolveError> {
    let p = &prob.objective;
    let mut hopts = s.hierarchy.clone();
    hopts.certificate = s.certificate;
    Ok(match h {
        Hierarchy::Lp => {
            let emb = prob.embedding()?;
            let opts = LpBoundOptions {
                search: LpSearchOptions {
                    exact: s.certificate,
                    time_limit: hopts.time_limit,
                    max_den: hopts.max_den,
                    ..Default::default()
                },
                certificate: s.certificate,
            };
            lp_lower_bound(p, &prob.set, &emb, r, &opts)?
        }
        Hierarchy::Sparse => {
            let emb = prob.embedding()?;
            let g = prob.gvector(&emb, s.m1)?;
            sparse_lower_bound(p, &prob.set, &emb, &g, r, s.deg_sigma0.unwrap_or(r), &hopts)?
        }
        Hierarchy::Lasserre => putinar_lower_bound(p, &prob.set, r, &hopts)?,
        Hierarchy::Copositive => {
            let (set, q) = split_variables(&prob.set, p);
            copositive_lower_bound(&q, &set, r, s.deg_sigma0, &hopts)?
        }
    })
}

/// A case of the grid: a problem file or a generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BenchCase {
    File { problem: PathBuf },
    Generated { n: usize, seed: u64, obj_deg: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    #[serde(default)]
    pub cases: Vec<BenchCase>,
    #[serde(default)]
    pub hierarchies: Vec<Hierarchy>,
    #[serde(default)]
    pub ranks: Vec<u32>,
    /// σ0 degrees for the sparse and copositive hierarchies; the rank when
    /// empty.
    #[serde(default)]
    pub deg_sigma0: Vec<u32>,
    #[serde(default)]
    pub time_limit: Option<f64>,
    #[serde(default)]
    pub max_entries: Option<usize>,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Marker in the bound column for a run stopped by the time limit.
pub const TIME_MARKER: &str = "-T";
/// Marker in the bound column for a run refused by the memory guard.
pub const MEMORY_MARKER: &str = "-M";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub case: String,
    pub hierarchy: Hierarchy,
    pub rank: u32,
    pub deg_sigma0: Option<u32>,
    /// A number, `-inf`, `nan`, or one of the −T / −M markers.
    pub bound: String,
    pub wall_time: f64,
    pub status: String,
}

impl BenchRow {
    fn key(&self) -> (&str, Hierarchy, u32, Option<u32>) {
        (&self.case, self.hierarchy, self.rank, self.deg_sigma0)
    }
}

fn load_case(case: &BenchCase, base: &Path) -> Result<Problem, String> {
    match case {
        BenchCase::File { problem } => {
            let path = base.join(problem);
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            Problem::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
        }
        BenchCase::Generated { n, seed, obj_deg } => gen_instance(*n, *seed, *obj_deg).map_err(|e| e.to_string()),
    }
}

fn run_cell(prob: &Problem, h: Hierarchy, r: u32, ds0: Option<u32>, cfg: &BenchConfig) -> BenchRow {
    let settings = SolveSettings {
        deg_sigma0: ds0,
        hierarchy: HierarchyOptions { time_limit: cfg.time_limit, max_entries: cfg.max_entries, ..Default::default() },
        ..Default::default()
    };
    let start = std::time::Instant::now();
    let mut row = BenchRow {
        case: prob.name.clone(),
        hierarchy: h,
        rank: r,
        deg_sigma0: ds0,
        bound: String::new(),
        wall_time: 0.0,
        status: String::new(),
    };
    match solve_problem(prob, h, r, &settings) {
        Ok(res) => {
            row.wall_time = res.wall_time;
            row.status = res.status.as_str().into();
            row.bound = match res.status {
                SolverStatus::TimeLimit => TIME_MARKER.into(),
                _ => format_bound(res.bound),
            };
        }
        Err(e) => {
            row.wall_time = start.elapsed().as_secs_f64();
            match e {
                SolveError::Hierarchy(HierarchyError::MemoryGuard { .. }) => {
                    row.bound = MEMORY_MARKER.into();
                    row.status = "memory-guard".into();
                }
                other => {
                    row.bound = "nan".into();
                    row.status = format!("error: {other}");
                }
            }
        }
    }
    row
}

/// Runs every (case, hierarchy, rank, σ0 degree) cell on a pool of
/// `cfg.workers` threads. Failures become rows; rows are sorted by
/// (case, hierarchy, rank, σ0 degree). Relative problem paths resolve
/// against `base`.
pub fn run_bench(cfg: &BenchConfig, base: &Path) -> Vec<BenchRow> {
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for case in &cfg.cases {
        let prob = match load_case(case, base) {
            Ok(p) => p,
            Err(e) => {
                let name = match case {
                    BenchCase::File { problem } => problem.display().to_string(),
                    BenchCase::Generated { n, seed, .. } => format!("{n}_{seed}"),
                };
                for &h in &cfg.hierarchies {
                    for &r in &cfg.ranks {
                        rows.push(BenchRow {
                            case: name.clone(),
                            hierarchy: h,
                            rank: r,
                            deg_sigma0: None,
                            bound: "nan".into(),
                            wall_time: 0.0,
                            status: format!("error: {e}"),
                        });
                    }
                }
                continue;
            }
        };
        for &h in &cfg.hierarchies {
            for &r in &cfg.ranks {
                let uses_ds0 = matches!(h, Hierarchy::Sparse | Hierarchy::Copositive) && !cfg.deg_sigma0.is_empty();
                if uses_ds0 {
                    for &d in &cfg.deg_sigma0 {
                        cells.push((prob.clone(), h, r, Some(d)));
                    }
                } else {
                    cells.push((prob.clone(), h, r, None));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build().expect("thread pool");
    let done: Vec<BenchRow> = pool.install(|| cells.par_iter().map(|(p, h, r, d)| run_cell(p, *h, *r, *d, cfg)).collect());
    rows.extend(done);
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    rows
}

pub const CSV_HEADER: [&str; 7] = ["case", "hierarchy", "rank", "deg_sigma0", "bound", "wall_time", "status"];

pub fn write_csv<W: io::Write>(rows: &[BenchRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.case.clone(),
            r.hierarchy.to_string(),
            r.rank.to_string(),
            r.deg_sigma0.map(|d| d.to_string()).unwrap_or_default(),
            r.bound.clone(),
            format!("{:.3}", r.wall_time),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_json(rows: &[BenchRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_text(rows: &[BenchRow]) -> String {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_grid_is_header_only() {
        let cfg = BenchConfig::parse("{}").unwrap();
        let rows = run_bench(&cfg, Path::new("."));
        assert!(rows.is_empty());
        assert_eq!(csv_text(&rows), "case,hierarchy,rank,deg_sigma0,bound,wall_time,status\n");
        assert_eq!(rows_to_json(&rows), "[]\n");
    }

    #[test]
    fn rows_sorted_independently_of_workers() {
        let text = r#"{"cases": [{"n": 4, "seed": 3, "obj_deg": 2}, {"n": 4, "seed": 1, "obj_deg": 2}],
                       "hierarchies": ["lp"], "ranks": [3, 2], "workers": 3}"#;
        let cfg = BenchConfig::parse(text).unwrap();
        let rows = run_bench(&cfg, Path::new("."));
        let keys: Vec<(String, u32)> = rows.iter().map(|r| (r.case.clone(), r.rank)).collect();
        assert_eq!(
            keys,
            vec![("4_1".into(), 2), ("4_1".into(), 3), ("4_3".into(), 2), ("4_3".into(), 3)]
        );
        assert!(rows.iter().all(|r| r.status == "optimal"), "{rows:?}");
        let serial = run_bench(&BenchConfig { workers: 1, ..cfg }, Path::new("."));
        let strip = |v: &[BenchRow]| v.iter().map(|r| (r.key().0.to_owned(), r.rank, r.bound.clone())).collect::<Vec<_>>();
        assert_eq!(strip(&rows), strip(&serial));
    }

    #[test]
    fn memory_guard_and_errors_become_rows() {
        let text = r#"{"cases": [{"n": 4, "seed": 0, "obj_deg": 2}, {"n": 5, "seed": 0, "obj_deg": 2}],
                       "hierarchies": ["sparse"], "ranks": [2], "max_entries": 10}"#;
        let rows = run_bench(&BenchConfig::parse(text).unwrap(), Path::new("."));
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].bound, MEMORY_MARKER);
        assert_eq!(rows[0].status, "memory-guard");
        assert!(rows[1].status.starts_with("error"), "{:?}", rows[1]);
    }

    #[test]
    fn hierarchy_names() {
        for h in [Hierarchy::Lp, Hierarchy::Sparse, Hierarchy::Lasserre, Hierarchy::Copositive] {
            assert_eq!(h.as_str().parse::<Hierarchy>().unwrap(), h);
        }
        assert!("moment".parse::<Hierarchy>().is_err());
    }
}
