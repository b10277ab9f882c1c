//! Upper bounds `λ_ε ≥ λ*` from an outer approximation of the copositive
//! cone.
//!
//! The outer approximation keeps only the evaluation constraints `F(w) ≥ 0`
//! at lifted feasible points `w = (x⁺, x⁻, h(x), p(x) − λ_lb)`. On such
//! points the identity fixes `F(w) = (1 + ‖x‖₁)^k (p(x) − λ + ε (1 + ‖x‖₁)^deg p)`,
//! so the approximated program reduces to
//! `λ ≤ p(x_k) + ε (1 + ‖x_k‖₁)^deg p` for every sample, whose optimum is
//! the minimum over the samples.

use std::time::Instant;

use super::{Direction, HierarchyError, HierarchyResult};
use crate::conic::SolverStatus;
use crate::poly::QPoly;
use crate::polya::{lp_lower_bound, LpBoundOptions};
use crate::semialg::{sample_feasible, SampleBox, SemialgebraicSet, SimplexEmbedding};

#[derive(Clone, Debug)]
pub struct UpperBoundSampling {
    pub bx: SampleBox,
    pub count: usize,
    pub seed: u64,
}

pub fn upper_bound_eps(
    p: &QPoly,
    set: &SemialgebraicSet,
    lambda_lb: f64,
    eps: f64,
    sampling: &UpperBoundSampling,
    r: u32,
) -> Result<HierarchyResult, HierarchyError> {
    let points = sample_feasible(set, &sampling.bx, sampling.count, sampling.seed);
    upper_bound_at_points(p, lambda_lb, eps, &points, r)
}

/// As [`upper_bound_eps`] over given feasible points.
pub fn upper_bound_at_points(
    p: &QPoly,
    lambda_lb: f64,
    eps: f64,
    points: &[Vec<f64>],
    r: u32,
) -> Result<HierarchyResult, HierarchyError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(HierarchyError::Epsilon);
    }
    let start = Instant::now();
    let pf = p.to_f64();
    let d = p.degree() as i32;
    let mut best = f64::INFINITY;
    let mut used = 0usize;
    for x in points {
        let v = pf.evaluate(x).expect("point length");
        if v < lambda_lb {
            continue;
        }
        used += 1;
        let q = (1.0 + x.iter().map(|t| t.abs()).sum::<f64>()).powi(d);
        best = best.min(v + eps * q);
    }
    let mut out = HierarchyResult::new("upper-eps", r, Direction::Upper);
    out.bound = best;
    out.status = if used > 0 { SolverStatus::Optimal } else { SolverStatus::Infeasible };
    out.notes.push(format!("eps = {eps}, lambda_lb = {lambda_lb}, {used} lifted points"));
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

/// One upper bound per ε, on a shared sample (so the sequence is
/// non-increasing as ε decreases).
pub fn upper_bound_schedule(
    p: &QPoly,
    set: &SemialgebraicSet,
    lambda_lb: f64,
    schedule: &[f64],
    sampling: &UpperBoundSampling,
    r: u32,
) -> Result<Vec<HierarchyResult>, HierarchyError> {
    let points = sample_feasible(set, &sampling.bx, sampling.count, sampling.seed);
    schedule.iter().map(|&e| upper_bound_at_points(p, lambda_lb, e, &points, r)).collect()
}

/// The rank-r LP lower bound minus a safety margin of 1.
pub fn default_lambda_lb(
    p: &QPoly,
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
    r: u32,
) -> Result<f64, HierarchyError> {
    let res = lp_lower_bound(p, set, emb, r, &LpBoundOptions::default())?;
    Ok(res.bound - 1.0)
}
