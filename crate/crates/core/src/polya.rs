//! Pólya expansions, simplex/cone conversions and LP (Handelman-type)
//! certificates `p − λ = Σ c_{αβγ} (x − L)^α h(x)^β (M − e⊤x)^γ`, `c ≥ 0`.

use std::collections::BTreeMap;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{solve_lp_with, solve_rational_system, Col, ConicError, ConicProgram, LpOptions, ProgramBuilder, SolverStatus};
use crate::hierarchies::{Direction, HierarchyResult, ProgramSize};
use crate::poly::{q_to_f64, round_to_rational, Monomial, QPoly};
use crate::semialg::{SemialgebraicSet, SimplexEmbedding};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyaError {
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("simplex bound M must be positive")]
    NonPositiveM,
    #[error("rank {r} is below the degree {d} of the target")]
    RankTooSmall { r: u32, d: u32 },
    #[error("LP solver failure: {0}")]
    Solver(String),
    #[error("LP is unbounded; the input is inconsistent")]
    Unbounded,
    #[error(transparent)]
    Conic(#[from] ConicError),
}

/// `(e⊤x)^r F`.
pub fn polya_expand(f: &QPoly, r: u32) -> Result<QPoly, PolyaError> {
    if !f.is_homogeneous() {
        return Err(PolyaError::NotHomogeneous);
    }
    Ok(&QPoly::sum_of_vars(f.nvars()).pow(r) * f)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PolyaOutcome {
    Certified { r: u32 },
    /// No certificate up to `r_max`. Not a disproof unless F is known to be
    /// strictly positive on the simplex.
    Inconclusive { r_max: u32 },
}

/// Smallest `r ≤ r_max` for which `(e⊤x)^r F` has no negative coefficient.
pub fn polya_certify(f: &QPoly, r_max: u32) -> Result<PolyaOutcome, PolyaError> {
    if !f.is_homogeneous() {
        return Err(PolyaError::NotHomogeneous);
    }
    let s = QPoly::sum_of_vars(f.nvars());
    let mut cur = f.clone();
    for r in 0..=r_max {
        if cur.terms().all(|(_, c)| !c.is_negative()) {
            return Ok(PolyaOutcome::Certified { r });
        }
        cur = &cur * &s;
    }
    Ok(PolyaOutcome::Inconclusive { r_max })
}

/// `G(x0, x) = F^h(x0 + e⊤x, M x)`, homogeneous in n + 1 variables.
pub fn simplex_to_cone(f: &QPoly, m: &BigRational) -> Result<QPoly, PolyaError> {
    if !m.is_positive() {
        return Err(PolyaError::NonPositiveM);
    }
    let n = f.nvars();
    let fh = f.homogenize();
    let mut images = Vec::with_capacity(n + 1);
    images.push(&QPoly::var(n + 1, 0) + &(1..=n).fold(QPoly::zero(n + 1), |a, i| &a + &QPoly::var(n + 1, i)));
    for i in 1..=n {
        images.push(QPoly::var(n + 1, i).scale(m));
    }
    Ok(fh.substitute(&images).expect("image count"))
}

/// `F^h(1 − e⊤x, x)`, of degree `deg F` homogenization.
pub fn cone_to_simplex(f: &QPoly) -> QPoly {
    cone_to_simplex_deg(f, f.degree())
}

/// As [`cone_to_simplex`] with a prescribed homogenization degree.
pub fn cone_to_simplex_deg(f: &QPoly, d: u32) -> QPoly {
    let n = f.nvars();
    let fh = f.homogenize_to(d);
    let mut images = Vec::with_capacity(n + 1);
    images.push(&QPoly::one(n) - &QPoly::sum_of_vars(n));
    for i in 0..n {
        images.push(QPoly::var(n, i));
    }
    fh.substitute(&images).expect("image count")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpTerm {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub gamma: u32,
    #[serde(with = "crate::serde_q::one")]
    pub c: BigRational,
}

/// `p − lambda = Σ c (x − L)^α h(x)^β (M − e⊤x)^γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LPCertificate {
    pub terms: Vec<LpTerm>,
    #[serde(with = "crate::serde_q::vec")]
    pub lower: Vec<BigRational>,
    #[serde(with = "crate::serde_q::one")]
    pub m: BigRational,
    pub rank: u32,
    #[serde(with = "crate::serde_q::one")]
    pub lambda: BigRational,
    /// Whether the term coefficients solve the identity exactly (as opposed
    /// to a rounded float solution).
    pub exact: bool,
}

impl LPCertificate {
    /// Re-expands the sum of products.
    pub fn expand(&self, set: &SemialgebraicSet) -> QPoly {
        let factors = lp_factors(set, &self.lower, &self.m);
        let mut out = QPoly::zero(set.nvars);
        let mut cache = FactorPowers::new(&factors);
        for t in &self.terms {
            let mut e = t.alpha.clone();
            e.extend_from_slice(&t.beta);
            e.push(t.gamma);
            let prod = cache.product(&e);
            out.add_scaled(&prod, &t.c);
        }
        out
    }
}

/// The factor list `(x_1 − L_1, …, x_n − L_n, h_1, …, h_m, M − e⊤x)`.
pub fn lp_factors(set: &SemialgebraicSet, lower: &[BigRational], m: &BigRational) -> Vec<QPoly> {
    let n = set.nvars;
    let mut f = Vec::with_capacity(n + set.m() + 1);
    for i in 0..n {
        f.push(&QPoly::var(n, i) - &QPoly::constant(n, lower[i].clone()));
    }
    f.extend(set.constraints.iter().cloned());
    f.push(&QPoly::constant(n, m.clone()) - &QPoly::sum_of_vars(n));
    f
}

struct FactorPowers<'a> {
    factors: &'a [QPoly],
    powers: Vec<Vec<QPoly>>,
}

impl<'a> FactorPowers<'a> {
    fn new(factors: &'a [QPoly]) -> Self {
        FactorPowers { factors, powers: vec![Vec::new(); factors.len()] }
    }

    fn ensure(&mut self, i: usize, e: u32) {
        let v = &mut self.powers[i];
        if v.is_empty() {
            v.push(QPoly::one(self.factors[i].nvars()));
        }
        while v.len() <= e as usize {
            let next = v.last().unwrap() * &self.factors[i];
            v.push(next);
        }
    }

    fn product(&mut self, e: &[u32]) -> QPoly {
        for (i, &k) in e.iter().enumerate() {
            self.ensure(i, k);
        }
        product_of_powers(&self.powers, e, self.factors[0].nvars())
    }
}

fn product_of_powers(powers: &[Vec<QPoly>], e: &[u32], nvars: usize) -> QPoly {
    let mut acc = QPoly::one(nvars);
    for (i, &k) in e.iter().enumerate() {
        if k > 0 {
            acc = &acc * &powers[i][k as usize];
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct LpSearchOptions {
    /// Bound the raw exponent sum `e⊤α + e⊤β + γ` instead of the product degree.
    pub raw_exponent_sum: bool,
    /// Refine the float LP solution to an exact rational certificate.
    pub exact: bool,
    pub time_limit: Option<f64>,
    pub max_den: u64,
}

impl Default for LpSearchOptions {
    fn default() -> Self {
        LpSearchOptions { raw_exponent_sum: false, exact: true, time_limit: None, max_den: 1_000_000_000 }
    }
}

/// Exponent triples `(α, β, γ)` flattened as `α ++ β ++ [γ]`, graded-lex.
pub fn enumerate_columns(n: usize, hdeg: &[u32], r: u32, raw: bool) -> Vec<Vec<u32>> {
    let mut w = vec![1u32; n];
    w.extend(hdeg.iter().map(|&d| if raw { 1 } else { d.max(1) }));
    w.push(1);
    let k = w.len();
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(i: usize, budget: u32, w: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == w.len() {
            out.push(cur.clone());
            return;
        }
        let mut e = 0;
        while e * w[i] <= budget {
            cur[i] = e;
            rec(i + 1, budget - e * w[i], w, cur, out);
            e += 1;
        }
        cur[i] = 0;
    }
    rec(0, r, &w, &mut cur, &mut out);
    out.sort_by(|a, b| Monomial(a.clone()).cmp(&Monomial(b.clone())));
    out
}

/// The assembled LP together with the exact column data.
pub struct LpInstance {
    pub program: ConicProgram,
    pub columns: Vec<Vec<u32>>,
    pub column_polys: Vec<QPoly>,
    pub rows: Vec<Monomial>,
    pub with_lambda: bool,
    pub n: usize,
    pub m: usize,
}

/// Builds the LP: one non-negative variable per product, one equality per
/// monomial, and (optionally) a free λ in the constant row, maximized.
pub fn build_lp(
    p: &QPoly,
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
    r: u32,
    with_lambda: bool,
    raw: bool,
) -> LpInstance {
    let n = set.nvars;
    let factors = lp_factors(set, &emb.lower, &emb.m);
    let hdeg: Vec<u32> = set.constraints.iter().map(|h| h.degree()).collect();
    let columns = enumerate_columns(n, &hdeg, r, raw);
    let mut maxe = vec![0u32; factors.len()];
    for c in &columns {
        for (i, &e) in c.iter().enumerate() {
            maxe[i] = maxe[i].max(e);
        }
    }
    let mut cache = FactorPowers::new(&factors);
    for (i, &e) in maxe.iter().enumerate() {
        cache.ensure(i, e);
    }
    let powers = cache.powers;
    let column_polys: Vec<QPoly> = columns.par_iter().map(|e| product_of_powers(&powers, e, n)).collect();

    let mut row_index: BTreeMap<Monomial, usize> = BTreeMap::new();
    row_index.insert(Monomial::one(n), 0);
    for (mono, _) in p.terms() {
        row_index.insert(mono.clone(), 0);
    }
    for cp in &column_polys {
        for (mono, _) in cp.terms() {
            row_index.insert(mono.clone(), 0);
        }
    }
    let rows: Vec<Monomial> = row_index.keys().cloned().collect();
    for (i, v) in row_index.values_mut().enumerate() {
        *v = i;
    }
    let mut pb = ProgramBuilder::new();
    let lam = if with_lambda { Some(pb.add_free()) } else { None };
    let cols: Vec<Col> = (0..columns.len()).map(|_| pb.add_nonneg()).collect();
    for mono in &rows {
        pb.add_row(q_to_f64(&p.coeff(mono)));
    }
    if let Some(l) = lam {
        pb.push(0, l, 1.0);
        pb.set_objective(l, 1.0);
    }
    for (k, cp) in column_polys.iter().enumerate() {
        for (mono, c) in cp.terms() {
            pb.push(row_index[mono], cols[k], q_to_f64(c));
        }
    }
    LpInstance {
        program: pb.build(),
        columns,
        column_polys,
        rows,
        with_lambda,
        n,
        m: set.m(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Certificate(LPCertificate),
    /// The LP is infeasible at this rank; not a disproof.
    InfeasibleAtRank(u32),
}

/// Searches for an LP certificate of `p ≥ 0` at rank `r`.
pub fn lp_certificate_search(
    p: &QPoly,
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
    r: u32,
    opts: &LpSearchOptions,
) -> Result<LpOutcome, PolyaError> {
    if r < p.degree() {
        return Err(PolyaError::RankTooSmall { r, d: p.degree() });
    }
    let inst = build_lp(p, set, emb, r, false, opts.raw_exponent_sum);
    let lp_opts = LpOptions { time_limit: opts.time_limit, ..Default::default() };
    let res = solve_lp_with(&inst.program, &lp_opts)?;
    match res.status {
        SolverStatus::Optimal => {}
        SolverStatus::Infeasible => return Ok(LpOutcome::InfeasibleAtRank(r)),
        SolverStatus::Unbounded => return Err(PolyaError::Unbounded),
        s => return Err(PolyaError::Solver(s.as_str().into())),
    }
    Ok(LpOutcome::Certificate(extract_certificate(
        &inst,
        p,
        emb,
        r,
        &res.primal,
        res.basis.as_deref().unwrap_or(&[]),
        opts,
    )))
}

/// Turns an LP solution into a certificate, exactly when possible.
fn extract_certificate(
    inst: &LpInstance,
    p: &QPoly,
    emb: &SimplexEmbedding,
    r: u32,
    primal: &[f64],
    basis: &[usize],
    opts: &LpSearchOptions,
) -> LPCertificate {
    let off = usize::from(inst.with_lambda);
    let n = inst.n;
    let make = |lambda: BigRational, cs: Vec<(usize, BigRational)>, exact: bool| LPCertificate {
        terms: cs
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let e = &inst.columns[k];
                LpTerm { alpha: e[..n].to_vec(), beta: e[n..e.len() - 1].to_vec(), gamma: e[e.len() - 1], c }
            })
            .collect(),
        lower: emb.lower.clone(),
        m: emb.m.clone(),
        rank: r,
        lambda,
        exact,
    };
    let round = |v: f64| round_to_rational(v, opts.max_den);
    let lambda_f = if inst.with_lambda { primal[0] } else { 0.0 };
    let rounded: Vec<(usize, BigRational)> = (0..inst.columns.len())
        .filter(|&k| primal[off + k] > 1e-12)
        .map(|k| (k, round(primal[off + k])))
        .collect();
    let lambda_r = round(lambda_f);
    if !opts.exact {
        return make(lambda_r, rounded, false);
    }
    // 1. rounded solution already exact?
    let mut residual = p - &QPoly::constant(n, lambda_r.clone());
    for (k, c) in &rounded {
        residual.add_scaled(&inst.column_polys[*k], &-c.clone());
    }
    if residual.is_zero() {
        return make(lambda_r, rounded, true);
    }
    // 2. re-solve the basic columns exactly
    let basic: Vec<usize> = basis.iter().cloned().filter(|&j| j >= off).map(|j| j - off).collect();
    let mut var_of_col: Vec<usize> = Vec::new();
    if inst.with_lambda {
        var_of_col.push(usize::MAX);
    }
    var_of_col.extend(basic.iter().cloned());
    let row_of: BTreeMap<&Monomial, usize> = inst.rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); inst.rows.len()];
    if inst.with_lambda {
        rows[0].push((0, BigRational::from_integer(1.into())));
    }
    for (slot, &k) in basic.iter().enumerate() {
        for (mono, c) in inst.column_polys[k].terms() {
            rows[row_of[mono]].push((slot + off, c.clone()));
        }
    }
    let rhs: Vec<BigRational> = inst.rows.iter().map(|m| p.coeff(m)).collect();
    if let Some(sol) = solve_rational_system(&rows, &rhs, var_of_col.len()) {
        let cs: Vec<(usize, BigRational)> =
            basic.iter().enumerate().map(|(slot, &k)| (k, sol[slot + off].clone())).collect();
        if cs.iter().all(|(_, c)| !c.is_negative()) {
            let lambda = if inst.with_lambda { sol[0].clone() } else { BigRational::zero() };
            return make(lambda, cs, true);
        }
    }
    make(lambda_r, rounded, false)
}

#[derive(Clone, Debug)]
pub struct LpBoundOptions {
    pub search: LpSearchOptions,
    /// Extract a certificate (exact when possible) for the optimal λ.
    pub certificate: bool,
}

impl Default for LpBoundOptions {
    fn default() -> Self {
        LpBoundOptions { search: LpSearchOptions { exact: false, ..Default::default() }, certificate: false }
    }
}

/// `max λ` such that `p − λ` has an LP certificate at rank `r`; the bound is
/// −∞ when the LP is infeasible.
pub fn lp_lower_bound(
    p: &QPoly,
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
    r: u32,
    opts: &LpBoundOptions,
) -> Result<HierarchyResult, PolyaError> {
    if r < p.degree() {
        return Err(PolyaError::RankTooSmall { r, d: p.degree() });
    }
    let start = Instant::now();
    let inst = build_lp(p, set, emb, r, true, opts.search.raw_exponent_sum);
    let lp_opts = LpOptions { time_limit: opts.search.time_limit, ..Default::default() };
    let res = solve_lp_with(&inst.program, &lp_opts)?;
    let mut out = HierarchyResult::new("lp", r, Direction::Lower);
    out.size = ProgramSize::of(&inst.program);
    out.status = res.status;
    match res.status {
        SolverStatus::Optimal => {
            out.bound = res.primal[0];
            if opts.certificate {
                let cert = extract_certificate(
                    &inst,
                    p,
                    emb,
                    r,
                    &res.primal,
                    res.basis.as_deref().unwrap_or(&[]),
                    &opts.search,
                );
                if cert.exact {
                    out.exact_bound = Some(cert.lambda.clone());
                }
                out.certificate = Some(crate::certificate::Certificate::Lp(cert));
            }
        }
        SolverStatus::Infeasible => out.bound = f64::NEG_INFINITY,
        SolverStatus::Unbounded => return Err(PolyaError::Unbounded),
        _ => out.bound = f64::NAN,
    }
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Free-format MPS text of an LP (no PSD blocks).
pub fn write_mps(prog: &ConicProgram, name: &str) -> Result<String, ConicError> {
    use std::fmt::Write;
    if prog.psd_blocks.iter().any(|&s| s > 1) {
        return Err(ConicError::HasPsd);
    }
    let n = prog.ncols();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in prog.rows.iter().enumerate() {
        for &(j, v) in row {
            by_col[j].push((i, v));
        }
    }
    let mut obj = vec![0.0; n];
    for &(j, c) in &prog.objective {
        obj[j] = c;
    }
    let mut s = String::new();
    let _ = writeln!(s, "NAME {name}");
    let _ = writeln!(s, "OBJSENSE\n    MAX");
    let _ = writeln!(s, "ROWS\n N OBJ");
    for i in 0..prog.rows.len() {
        let _ = writeln!(s, " E R{i}");
    }
    let _ = writeln!(s, "COLUMNS");
    for j in 0..n {
        if obj[j] != 0.0 {
            let _ = writeln!(s, "    C{j} OBJ {:?}", obj[j]);
        }
        for &(i, v) in &by_col[j] {
            let _ = writeln!(s, "    C{j} R{i} {v:?}");
        }
    }
    let _ = writeln!(s, "RHS");
    for (i, &b) in prog.b.iter().enumerate() {
        if b != 0.0 {
            let _ = writeln!(s, "    RHS R{i} {b:?}");
        }
    }
    let _ = writeln!(s, "BOUNDS");
    for j in 0..prog.free_vars {
        let _ = writeln!(s, " FR BND C{j}");
    }
    let _ = writeln!(s, "ENDATA");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{binomial, q, qi};
    use crate::semialg::{derive_embedding, qvec_from_ints};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x(n: usize, i: usize) -> QPoly {
        QPoly::var(n, i)
    }

    fn quad(a: i64, b: i64, c: i64) -> QPoly {
        let (x1, x2) = (x(2, 0), x(2, 1));
        &(&x1.pow(2).scale(&qi(a)) + &(&x1 * &x2).scale(&qi(b))) + &x2.pow(2).scale(&qi(c))
    }

    #[test]
    fn expand_hand_example() {
        let f = quad(1, -1, 1);
        let e = polya_expand(&f, 1).unwrap();
        assert_eq!(e, &x(2, 0).pow(3) + &x(2, 1).pow(3));
        assert_eq!(polya_expand(&quad(1, 2, 3), 0).unwrap(), quad(1, 2, 3));
        assert_eq!(polya_expand(&(&x(2, 0) + &QPoly::one(2)), 1), Err(PolyaError::NotHomogeneous));
    }

    #[test]
    fn expand_evaluation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = quad(rng.gen_range(-3..4), rng.gen_range(-3..4), rng.gen_range(1..4));
            let r = rng.gen_range(0..5);
            let e = polya_expand(&f, r).unwrap();
            assert_eq!(e.degree(), f.degree() + r);
            let pt = vec![q(rng.gen_range(0..5), 3), q(rng.gen_range(0..5), 2)];
            let s = &pt[0] + &pt[1];
            assert_eq!(e.evaluate(&pt).unwrap(), num_traits::pow(s, r as usize) * f.evaluate(&pt).unwrap());
        }
    }

    #[test]
    fn certify_ranks() {
        assert_eq!(polya_certify(&quad(1, -1, 1), 10).unwrap(), PolyaOutcome::Certified { r: 1 });
        assert_eq!(polya_certify(&QPoly::sum_of_vars(3), 10).unwrap(), PolyaOutcome::Certified { r: 0 });
        // x1 x2 − ε x1² is negative at (1, 0)
        let eps = q(1, 100);
        let f = &(&x(2, 0) * &x(2, 1)) - &x(2, 0).pow(2).scale(&eps);
        assert_eq!(polya_certify(&f, 12).unwrap(), PolyaOutcome::Inconclusive { r_max: 12 });
    }

    #[test]
    fn simplex_to_cone_examples() {
        let m = qi(3);
        let n = 2;
        let f = &QPoly::constant(n, m.clone()) - &QPoly::sum_of_vars(n);
        let g = simplex_to_cone(&f, &m).unwrap();
        assert_eq!(g, x(3, 0).scale(&m));
        let c = QPoly::constant(n, qi(5));
        assert_eq!(simplex_to_cone(&c, &m).unwrap(), QPoly::constant(3, qi(5)));
        assert_eq!(simplex_to_cone(&c, &qi(0)), Err(PolyaError::NonPositiveM));
    }

    #[test]
    fn simplex_cone_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = q(5, 2);
        for _ in 0..10 {
            let mut f = QPoly::zero(2);
            for _ in 0..5 {
                let e = vec![rng.gen_range(0..3), rng.gen_range(0..3)];
                f.add_term(Monomial(e), qi(rng.gen_range(-5..6)));
            }
            let g = simplex_to_cone(&f, &m).unwrap();
            assert!(g.is_homogeneous() || g.is_zero());
            for _ in 0..5 {
                let pt = vec![q(rng.gen_range(0..5), 4), q(rng.gen_range(0..5), 4)];
                let mut gp = vec![&m - &pt[0] - &pt[1]];
                gp.extend(pt.iter().cloned());
                let lhs = g.evaluate(&gp).unwrap() / num_traits::pow(m.clone(), f.degree() as usize);
                assert_eq!(lhs, f.evaluate(&pt).unwrap());
            }
        }
    }

    #[test]
    fn cone_to_simplex_examples() {
        let s = QPoly::sum_of_vars(3);
        assert_eq!(cone_to_simplex(&s), s);
        assert_eq!(cone_to_simplex(&QPoly::one(3)), QPoly::one(3));
        // evaluation agreement: result(w) = F^h(1 − e⊤w, w) and for homogeneous F
        // that is F at the preimage w on the simplex.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = &(&x(2, 0).pow(2) - &(&x(2, 0) * &x(2, 1))) + &x(2, 1);
        let t = cone_to_simplex(&f);
        for _ in 0..10 {
            let w = vec![q(rng.gen_range(0..4), 8), q(rng.gen_range(0..4), 8)];
            let w0 = qi(1) - &w[0] - &w[1];
            let mut full = vec![w0];
            full.extend(w.iter().cloned());
            assert_eq!(t.evaluate(&w).unwrap(), f.homogenize().evaluate(&full).unwrap());
        }
    }

    #[test]
    fn column_enumeration_counts() {
        // with linear factors only the count is C(k + r, r)
        let cols = enumerate_columns(2, &[1], 3, false);
        assert_eq!(cols.len() as u64, binomial(4 + 3, 3).to_string().parse::<u64>().unwrap());
        let weighted = enumerate_columns(1, &[2], 2, false);
        assert!(weighted.iter().all(|c| c[0] + 2 * c[1] + c[2] <= 2));
        let raw = enumerate_columns(1, &[2], 2, true);
        assert!(raw.len() > weighted.len());
    }

    fn simplex_set(n: usize) -> (SemialgebraicSet, SimplexEmbedding) {
        let s = SemialgebraicSet::orthant(n);
        let emb = derive_embedding(&s, &qvec_from_ints(&vec![0; n]), &qi(1), &qi(1)).unwrap();
        (s, emb)
    }

    #[test]
    fn single_term_certificate() {
        let (s, emb) = simplex_set(2);
        let p = &QPoly::one(2) - &QPoly::sum_of_vars(2);
        let LpOutcome::Certificate(c) = lp_certificate_search(&p, &s, &emb, 1, &LpSearchOptions::default()).unwrap()
        else {
            panic!("expected a certificate")
        };
        assert!(c.exact);
        assert_eq!(c.terms.len(), 1);
        assert_eq!(c.terms[0].gamma, 1);
        assert_eq!(c.terms[0].c, qi(1));
        assert_eq!(c.expand(&s), p);
    }

    #[test]
    fn negative_somewhere_is_infeasible() {
        let (s, emb) = simplex_set(2);
        // negative at (1/2, 1/2)
        let p = &QPoly::constant(2, q(1, 10)) - &(&x(2, 0) * &x(2, 1));
        for r in 2..5 {
            assert_eq!(
                lp_certificate_search(&p, &s, &emb, r, &LpSearchOptions::default()).unwrap(),
                LpOutcome::InfeasibleAtRank(r)
            );
        }
    }

    #[test]
    fn bound_of_x1_on_simplex() {
        let (s, emb) = simplex_set(2);
        let p = x(2, 0);
        let r = lp_lower_bound(&p, &s, &emb, 1, &LpBoundOptions::default()).unwrap();
        assert_eq!(r.status, SolverStatus::Optimal);
        assert!(r.bound.abs() < 1e-12);
        assert!(lp_lower_bound(&x(2, 0).pow(2), &s, &emb, 1, &LpBoundOptions::default()).is_err());
    }

    #[test]
    fn exact_bound_certificate() {
        let (s, emb) = simplex_set(2);
        // min of x1² + x2² − x1 on the simplex is −1/4 at (1/2, 0)
        let p = &(&x(2, 0).pow(2) + &x(2, 1).pow(2)) - &x(2, 0);
        let opts = LpBoundOptions { search: LpSearchOptions::default(), certificate: true };
        let r = lp_lower_bound(&p, &s, &emb, 4, &opts).unwrap();
        let Some(crate::certificate::Certificate::Lp(c)) = &r.certificate else { panic!() };
        assert!(c.exact);
        assert!(c.terms.iter().all(|t| !t.c.is_negative()));
        assert_eq!(c.expand(&s), &p - &QPoly::constant(2, c.lambda.clone()));
        assert!(q_to_f64(&c.lambda) <= -0.25 + 1e-12);
        assert_eq!(r.exact_bound.as_ref(), Some(&c.lambda));
    }

    #[test]
    fn mps_dump_lists_every_row() {
        let (s, emb) = simplex_set(2);
        let inst = build_lp(&x(2, 0), &s, &emb, 1, true, false);
        let text = write_mps(&inst.program, "t").unwrap();
        assert!(text.starts_with("NAME t\n"));
        assert_eq!(text.matches(" E R").count(), inst.program.nrows());
        assert!(text.contains(" FR BND C0"));
        assert!(text.ends_with("ENDATA\n"));
    }
}
