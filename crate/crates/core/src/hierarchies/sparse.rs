use std::time::Instant;

use num_rational::BigRational;

use super::sos::{Assembler, SosLayout};
use super::{denominator_ladder, finish_result, run_program, Direction, HierarchyError, HierarchyOptions, HierarchyResult};
use crate::certificate::{shift_constant, Certificate, SparseSOSCertificate};
use crate::conic::{ConicProgram, ProgramBuilder, SolverStatus};
use crate::poly::{round_to_rational, Monomial, QPoly};
use crate::semialg::{GTag, GVector, SemialgebraicSet, SimplexEmbedding};
use crate::verify::{verify_sparse_certificate, Verdict};

/// `max λ` s.t. `p − λ = σ0 + σ1 (R² − Σ g_i²) + Σ τ_i g_i + Σ ρ_i(g_i) g_i`.
pub struct SparseProgram {
    pub program: ConicProgram,
    pub rows: Vec<Monomial>,
    pub lambda_col: usize,
    pub layout: SosLayout,
    pub rank: u32,
    builder: ProgramBuilder,
}

pub fn build_sparse_program(
    p: &QPoly,
    set: &SemialgebraicSet,
    g: &GVector,
    r: u32,
    deg_sigma0: u32,
    shared_rho: bool,
) -> Result<SparseProgram, HierarchyError> {
    let n = set.nvars;
    if r < p.degree() {
        return Err(HierarchyError::RankTooSmall { r, d: p.degree() });
    }
    if deg_sigma0 > r {
        return Err(HierarchyError::Sigma0Degree { deg: deg_sigma0, r });
    }
    if let Some(bad) = g.entries.iter().find(|e| e.nvars() != n) {
        return Err(HierarchyError::GVector { got: bad.nvars(), expected: n });
    }
    let mut asm = Assembler::new();
    let lam = asm.pb.add_free();
    asm.pb.set_objective(lam, 1.0);
    asm.add(Monomial::one(n), lam, 1.0);
    asm.add_rhs_poly(&p.to_f64(), 1.0);
    let layout = SosLayout::add(&mut asm, g, n, r, deg_sigma0, 1.0, shared_rho);
    let (program, keys, builder) = asm.finish();
    let lambda_col = builder.column_index(lam);
    Ok(SparseProgram {
        program,
        rows: keys.into_iter().map(|(_, m)| m).collect(),
        lambda_col,
        layout,
        rank: r,
        builder,
    })
}

impl SparseProgram {
    /// Rounds a solution into a certificate, repairing a constant residual
    /// through σ0's constant entry.
    pub fn certificate(
        &self,
        p: &QPoly,
        emb: &SimplexEmbedding,
        g: &GVector,
        primal: &[f64],
        max_den: u64,
    ) -> SparseSOSCertificate {
        let (sigma0, sigma1, taus, rhos) = self.layout.extract(&self.builder, &self.program, primal, max_den);
        let mut cert = SparseSOSCertificate {
            nvars: p.nvars(),
            lambda: round_to_rational(primal[self.lambda_col], max_den),
            rank: self.rank,
            deg_sigma0: self.layout.deg_sigma0,
            embedding: emb.clone(),
            g: SparseSOSCertificate::entries_from(g),
            m1: g.m1,
            radius: g.radius.clone(),
            sigma0,
            sigma1,
            taus,
            rhos,
        };
        repair_constant(&mut cert, p);
        cert
    }
}

fn repair_constant(cert: &mut SparseSOSCertificate, p: &QPoly) {
    let Ok(rhs) = cert.expand() else { return };
    let target = p - &QPoly::constant(p.nvars(), cert.lambda.clone());
    let residual = &target - &rhs;
    if !residual.is_zero() && residual.degree() == 0 {
        let c: BigRational = residual.constant_term();
        shift_constant(&mut cert.sigma0, &c);
    }
}

/// Sparse SOS lower bound at rank `r`.
#[allow(clippy::too_many_arguments)]
pub fn sparse_lower_bound(
    p: &QPoly,
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
    g: &GVector,
    r: u32,
    deg_sigma0: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult, HierarchyError> {
    let start = Instant::now();
    let sp = build_sparse_program(p, set, g, r, deg_sigma0, opts.shared_rho)?;
    let res = run_program(&sp.program, opts)?;
    let mut out = HierarchyResult::new("sparse", r, Direction::Lower);
    out.deg_sigma0 = Some(deg_sigma0);
    finish_result(&mut out, &sp.program, &res, sp.lambda_col, start);
    if opts.certificate && res.status == SolverStatus::Optimal {
        let upper = upper_from(g, set.nvars);
        let mut best = None;
        for den in denominator_ladder(opts.max_den) {
            let cert = sp.certificate(p, emb, g, &res.primal, den);
            let report = verify_sparse_certificate(&cert, p, set, emb, upper.as_deref());
            let exact = report.verdict == Verdict::ExactPass;
            if exact || den == opts.max_den {
                best = Some((cert, report));
            }
            if exact {
                break;
            }
        }
        let (cert, report) = best.expect("ladder ends at max_den");
        if report.verdict == Verdict::ExactPass {
            out.exact_bound = Some(cert.lambda.clone());
        }
        out.notes.push(format!("certificate: {}", report.verdict.as_str()));
        out.certificate = Some(Certificate::Sparse(cert));
    }
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Box bounds recorded in a trusted g-vector's `Upper` entries.
fn upper_from(g: &GVector, n: usize) -> Option<Vec<BigRational>> {
    let mut u = vec![None; n];
    for (e, t) in g.entries.iter().zip(&g.tags) {
        if let GTag::Upper(i) = *t {
            if i < n {
                u[i] = Some(e.constant_term());
            }
        }
    }
    u.into_iter().collect()
}
