//! Two-phase revised simplex with a dense basis inverse.
//!
//! Pricing is Dantzig's rule; after `degenerate_threshold` consecutive
//! degenerate pivots the solver switches to Bland's rule until it makes
//! progress again, which rules out cycling. The inverse is refactorized from
//! scratch every `refactor_every` pivots. Rows and columns are equilibrated
//! before solving. Everything is deterministic for a fixed input.

use std::time::Instant;

use super::{ConicError, ConicProgram, SolverResult, SolverStatus};

#[derive(Clone, Debug)]
pub struct LpOptions {
    pub max_iter: usize,
    pub time_limit: Option<f64>,
    pub degenerate_threshold: usize,
    pub refactor_every: usize,
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            max_iter: 200_000,
            time_limit: None,
            degenerate_threshold: 50,
            refactor_every: 64,
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            pivot_tol: 1e-9,
        }
    }
}

pub fn solve_lp(prog: &ConicProgram) -> Result<SolverResult, ConicError> {
    solve_lp_with(prog, &LpOptions::default())
}

/// Solves a program without PSD blocks (1×1 blocks are treated as
/// non-negative variables).
pub fn solve_lp_with(prog: &ConicProgram, opts: &LpOptions) -> Result<SolverResult, ConicError> {
    prog.validate()?;
    if prog.psd_blocks.iter().any(|&s| s > 1) {
        return Err(ConicError::HasPsd);
    }
    let start = Instant::now();
    let lp = StandardForm::new(prog);
    let mut s = Simplex::new(&lp, opts.clone(), start);
    let status = s.run();
    let mut res = SolverResult::failed(status, "simplex");
    res.iterations = s.iterations;
    if status == SolverStatus::Optimal {
        let (primal, dual, basis) = s.extract(prog);
        res.objective = prog.objective_value(&primal);
        res.residual = Some(prog.residual_report(&primal));
        res.primal = primal;
        res.dual = dual;
        res.basis = Some(basis);
    }
    res.wall_time = start.elapsed().as_secs_f64();
    Ok(res)
}

/// `min c⊤x, A x = b, x ≥ 0` after splitting free variables, equilibration
/// and making `b ≥ 0`.
struct StandardForm {
    m: usize,
    /// Structural columns: `(row, value)` lists.
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    b: Vec<f64>,
    /// For each structural column: original column and sign.
    origin: Vec<(usize, f64)>,
    col_scale: Vec<f64>,
    row_scale: Vec<f64>,
    row_sign: Vec<f64>,
}

impl StandardForm {
    fn new(p: &ConicProgram) -> Self {
        let m = p.rows.len();
        let n = p.ncols();
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in p.rows.iter().enumerate() {
            for &(j, v) in row {
                by_col[j].push((i, v));
            }
        }
        let mut row_scale = vec![1.0; m];
        for (i, row) in p.rows.iter().enumerate() {
            let mx = row.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
            if mx > 0.0 {
                row_scale[i] = 1.0 / mx;
            }
        }
        let mut obj = vec![0.0; n];
        for &(j, c) in &p.objective {
            obj[j] = c;
        }
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut cost = Vec::new();
        let mut origin = Vec::new();
        let mut col_scale = Vec::new();
        for j in 0..n {
            let scaled: Vec<(usize, f64)> = by_col[j].iter().map(|&(i, v)| (i, v * row_scale[i])).collect();
            let mx = scaled.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
            let cs = if mx > 0.0 { 1.0 / mx } else { 1.0 };
            let col: Vec<(usize, f64)> = scaled.iter().map(|&(i, v)| (i, v * cs)).collect();
            let signs: &[f64] = if j < p.free_vars { &[1.0, -1.0] } else { &[1.0] };
            for &sg in signs {
                cols.push(col.iter().map(|&(i, v)| (i, sg * v)).collect());
                // minimize −c⊤x
                cost.push(-obj[j] * cs * sg);
                origin.push((j, sg));
                col_scale.push(cs);
            }
        }
        let mut b: Vec<f64> = p.b.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
        let mut row_sign = vec![1.0; m];
        for i in 0..m {
            if b[i] < 0.0 {
                row_sign[i] = -1.0;
                b[i] = -b[i];
            }
        }
        for col in cols.iter_mut() {
            for e in col.iter_mut() {
                e.1 *= row_sign[e.0];
            }
        }
        StandardForm { m, cols, cost, b, origin, col_scale, row_scale, row_sign }
    }
}

struct Simplex<'a> {
    lp: &'a StandardForm,
    opts: LpOptions,
    start: Instant,
    m: usize,
    /// Structural count; artificial `k` is column `n + k`.
    n: usize,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a StandardForm, opts: LpOptions, start: Instant) -> Self {
        let m = lp.m;
        let n = lp.cols.len();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut in_basis = vec![false; n + m];
        for k in 0..m {
            in_basis[n + k] = true;
        }
        Simplex {
            lp,
            opts,
            start,
            m,
            n,
            basis: (n..n + m).collect(),
            in_basis,
            binv,
            xb: lp.b.clone(),
            iterations: 0,
            since_refactor: 0,
        }
    }

    fn column(&self, j: usize) -> ColRef<'_> {
        if j < self.n {
            ColRef::Sparse(&self.lp.cols[j])
        } else {
            ColRef::Unit(j - self.n)
        }
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        match self.column(j) {
            ColRef::Sparse(col) => {
                for &(r, v) in col {
                    for i in 0..m {
                        u[i] += self.binv[i * m + r] * v;
                    }
                }
            }
            ColRef::Unit(r) => {
                for i in 0..m {
                    u[i] = self.binv[i * m + r];
                }
            }
        }
        u
    }

    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let c = cost(bj);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] += c * row[k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], cost: &dyn Fn(usize) -> f64) -> f64 {
        let dot = match self.column(j) {
            ColRef::Sparse(col) => col.iter().map(|&(r, v)| y[r] * v).sum::<f64>(),
            ColRef::Unit(r) => y[r],
        };
        cost(j) - dot
    }

    fn pivot(&mut self, r: usize, q: usize, u: &[f64]) {
        let m = self.m;
        let ur = u[r];
        let t = self.xb[r] / ur;
        for i in 0..m {
            if i != r {
                self.xb[i] -= t * u[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-13 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = t;
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (prow, after) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= ur;
        }
        for (i, row) in before.chunks_mut(m).enumerate() {
            let f = u[i];
            if f != 0.0 {
                for k in 0..m {
                    row[k] -= f * prow[k];
                }
            }
        }
        for (off, row) in after.chunks_mut(m).enumerate() {
            let f = u[r + 1 + off];
            if f != 0.0 {
                for k in 0..m {
                    row[k] -= f * prow[k];
                }
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.since_refactor += 1;
    }

    fn refactor(&mut self) -> bool {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return true;
        }
        let mut bmat = nalgebra::DMatrix::<f64>::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            match self.column(j) {
                ColRef::Sparse(col) => {
                    for &(r, v) in col {
                        bmat[(r, k)] = v;
                    }
                }
                ColRef::Unit(r) => bmat[(r, k)] = 1.0,
            }
        }
        let Some(inv) = bmat.lu().try_inverse() else {
            return false;
        };
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = inv[(i, k)];
            }
        }
        for i in 0..m {
            let mut s = 0.0;
            for (k, &bk) in self.lp.b.iter().enumerate() {
                s += self.binv[i * m + k] * bk;
            }
            self.xb[i] = if s < 0.0 && s > -1e-11 { 0.0 } else { s };
        }
        true
    }

    fn out_of_time(&self) -> bool {
        self.opts.time_limit.is_some_and(|t| self.start.elapsed().as_secs_f64() > t)
    }

    /// Runs simplex iterations for the given cost until optimal. `eligible`
    /// filters entering columns.
    fn iterate(&mut self, cost: &dyn Fn(usize) -> f64, eligible: &dyn Fn(usize) -> bool) -> SolverStatus {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.opts.max_iter {
                return SolverStatus::NumericalFailure;
            }
            if self.out_of_time() {
                return SolverStatus::TimeLimit;
            }
            if self.since_refactor >= self.opts.refactor_every && !self.refactor() {
                return SolverStatus::NumericalFailure;
            }
            let bland = degenerate >= self.opts.degenerate_threshold;
            let y = self.duals(cost);
            let mut entering = None;
            let mut best = -self.opts.opt_tol;
            for j in 0..self.n + self.m {
                if self.in_basis[j] || !eligible(j) {
                    continue;
                }
                let d = self.reduced_cost(j, &y, cost);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return SolverStatus::Optimal;
            };
            let u = self.ftran(q);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if u[i] > self.opts.pivot_tol {
                    let t = self.xb[i].max(0.0) / u[i];
                    leave = match leave {
                        None => Some((i, t)),
                        Some((r, tr)) => {
                            let tie = (t - tr).abs() <= 1e-12 * (1.0 + tr.abs());
                            let better = if tie {
                                if bland {
                                    self.basis[i] < self.basis[r]
                                } else {
                                    u[i] > u[r]
                                }
                            } else {
                                t < tr
                            };
                            if better {
                                Some((i, t))
                            } else {
                                Some((r, tr))
                            }
                        }
                    };
                }
            }
            let Some((r, t)) = leave else {
                return SolverStatus::Unbounded;
            };
            if t <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, &u);
            self.iterations += 1;
        }
    }

    fn run(&mut self) -> SolverStatus {
        let n = self.n;
        let phase1 = move |j: usize| if j >= n { 1.0 } else { 0.0 };
        let st = self.iterate(&phase1, &|_| true);
        if st != SolverStatus::Optimal {
            return st;
        }
        if !self.refactor() {
            return SolverStatus::NumericalFailure;
        }
        let infeas: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&j, _)| j >= n)
            .map(|(_, &v)| v)
            .sum();
        let bscale = self.lp.b.iter().fold(1.0f64, |a, &v| a.max(v));
        if infeas > 1e-7 * bscale {
            return SolverStatus::Infeasible;
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..self.m {
            if self.basis[r] < n {
                continue;
            }
            let m = self.m;
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut pick = None;
            let mut best = 1e-7;
            for j in 0..n {
                if self.in_basis[j] {
                    continue;
                }
                let v: f64 = self.lp.cols[j].iter().map(|&(i, a)| row[i] * a).sum();
                if v.abs() > best {
                    best = v.abs();
                    pick = Some(j);
                }
            }
            if let Some(q) = pick {
                let u = self.ftran(q);
                self.pivot(r, q, &u);
            }
        }
        if !self.refactor() {
            return SolverStatus::NumericalFailure;
        }
        let lp = self.lp;
        let phase2 = move |j: usize| if j < n { lp.cost[j] } else { 0.0 };
        let st = self.iterate(&phase2, &move |j| j < n);
        if st != SolverStatus::Optimal {
            return st;
        }
        if !self.refactor() {
            return SolverStatus::NumericalFailure;
        }
        SolverStatus::Optimal
    }

    fn extract(&self, prog: &ConicProgram) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
        let lp = self.lp;
        let mut x = vec![0.0; prog.ncols()];
        let mut basis = Vec::new();
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                let (orig, sg) = lp.origin[j];
                x[orig] += sg * self.xb[i].max(0.0) * lp.col_scale[j];
                basis.push(orig);
            }
        }
        basis.sort_unstable();
        basis.dedup();
        let n = self.n;
        let y = self.duals(&move |j: usize| if j < n { lp.cost[j] } else { 0.0 });
        let dual = (0..self.m)
            .map(|i| -y[i] * lp.row_sign[i] * lp.row_scale[i])
            .collect();
        (x, dual, basis)
    }
}

enum ColRef<'a> {
    Sparse(&'a [(usize, f64)]),
    Unit(usize),
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lp(free: usize, nonneg: usize, rows: Vec<Vec<(usize, f64)>>, b: Vec<f64>, obj: Vec<(usize, f64)>) -> ConicProgram {
        ConicProgram { free_vars: free, nonneg_vars: nonneg, psd_blocks: vec![], rows, b, objective: obj }
    }

    #[test]
    fn max_lambda_below_three() {
        // max λ s.t. λ + s = 3, s ≥ 0
        let p = lp(1, 1, vec![vec![(0, 1.0), (1, 1.0)]], vec![3.0], vec![(0, 1.0)]);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, SolverStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_negative() {
        let p = lp(0, 1, vec![vec![(0, 1.0)]], vec![-1.0], vec![]);
        assert_eq!(solve_lp(&p).unwrap().status, SolverStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let p = lp(1, 1, vec![vec![(0, 1.0), (1, -1.0)]], vec![0.0], vec![(0, 1.0)]);
        assert_eq!(solve_lp(&p).unwrap().status, SolverStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // x + y = 1 twice, max x
        let rows = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]];
        let p = lp(0, 2, rows, vec![1.0, 2.0], vec![(0, 1.0)]);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, SolverStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_blocks_rejected() {
        let p = ConicProgram { psd_blocks: vec![2], ..Default::default() };
        assert_eq!(solve_lp(&p), Err(ConicError::HasPsd));
    }

    /// Brute force: enumerate every basis of `A x = b, x ≥ 0` (all variables
    /// non-negative) and take the best feasible vertex.
    fn vertex_enumeration(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
        let m = a.len();
        let n = c.len();
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..m).collect();
        loop {
            let bm = nalgebra::DMatrix::from_fn(m, m, |i, k| a[i][idx[k]]);
            if let Some(inv) = bm.clone().try_inverse() {
                let xb = inv * nalgebra::DVector::from_column_slice(b);
                if xb.iter().all(|&v| v >= -1e-9) {
                    let val: f64 = idx.iter().zip(xb.iter()).map(|(&j, &v)| c[j] * v).sum();
                    best = Some(best.map_or(val, |bv: f64| bv.max(val)));
                }
            }
            // next combination
            let mut i = m;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if idx[i] != i + n - m {
                    break;
                }
                if i == 0 {
                    return best;
                }
            }
            idx[i] += 1;
            for k in i + 1..m {
                idx[k] = idx[k - 1] + 1;
            }
        }
    }

    #[test]
    fn agrees_with_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut checked = 0;
        while checked < 50 {
            let m = rng.gen_range(1..4);
            let n = rng.gen_range(m + 1..=8);
            let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-3i32..=5) as f64).collect()).collect();
            // a bounded feasible region: include a row with all-positive coefficients
            let mut a = a;
            a[0] = (0..n).map(|_| rng.gen_range(1i32..=4) as f64).collect();
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let b: Vec<f64> = a.iter().map(|row| row.iter().zip(&x0).map(|(u, v)| u * v).sum()).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5i32..=5) as f64).collect();
            let Some(expect) = vertex_enumeration(&a, &b, &c) else { continue };
            let rows = a
                .iter()
                .map(|row| row.iter().cloned().enumerate().filter(|(_, v)| *v != 0.0).collect())
                .collect();
            let obj = c.iter().cloned().enumerate().filter(|(_, v)| *v != 0.0).collect();
            let p = lp(0, n, rows, b.clone(), obj);
            let r = solve_lp(&p).unwrap();
            assert_eq!(r.status, SolverStatus::Optimal);
            assert!((r.objective - expect).abs() <= 1e-9 * (1.0 + expect.abs()), "{} vs {}", r.objective, expect);
            // weak duality: b⊤y ≥ c⊤x, and equal at optimum
            let dual_obj: f64 = b.iter().zip(&r.dual).map(|(u, v)| u * v).sum();
            assert!(r.objective <= dual_obj + 1e-9 * (1.0 + dual_obj.abs()));
            assert!((dual_obj - r.objective).abs() <= 1e-7 * (1.0 + expect.abs()));
            checked += 1;
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 12;
        let rows: Vec<Vec<(usize, f64)>> = (0..5)
            .map(|_| (0..n).map(|j| (j, rng.gen_range(0.1..1.0))).collect())
            .collect();
        let b = vec![1.0; 5];
        let obj: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-1.0..1.0))).collect();
        let p = lp(0, n, rows, b, obj);
        let a = solve_lp(&p).unwrap();
        let mut b2 = solve_lp(&p).unwrap();
        b2.wall_time = a.wall_time;
        assert_eq!(a, b2);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's cycling example (cycles under naive Dantzig without anti-cycling).
        // min −3/4 x4 + 20 x5 − 1/2 x6 + 6 x7
        let rows = vec![
            vec![(0, 1.0), (3, 0.25), (4, -8.0), (5, -1.0), (6, 9.0)],
            vec![(1, 1.0), (3, 0.5), (4, -12.0), (5, -0.5), (6, 3.0)],
            vec![(2, 1.0), (5, 1.0)],
        ];
        let obj = vec![(3, 0.75), (4, -20.0), (5, 0.5), (6, -6.0)];
        let p = lp(0, 7, rows, vec![0.0, 0.0, 1.0], obj);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, SolverStatus::Optimal);
        assert!((r.objective - 1.25).abs() < 1e-9);
    }
}
