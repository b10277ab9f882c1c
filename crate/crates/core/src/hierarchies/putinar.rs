use std::time::Instant;

use super::sos::{Assembler, Gram};
use super::{denominator_ladder, finish_result, run_program, Direction, HierarchyError, HierarchyOptions, HierarchyResult};
use crate::certificate::{shift_constant, Certificate, PutinarCertificate, SosBlock};
use crate::conic::{ConicProgram, ProgramBuilder, SolverStatus};
use crate::poly::{monomials_up_to, round_to_rational, Monomial, QPoly};
use crate::semialg::SemialgebraicSet;
use crate::verify::{verify_putinar_certificate, Verdict};

/// `max λ` s.t. `p − λ = σ0 + Σ σ_j u_j`, `deg(σ_j u_j) ≤ r`.
pub struct PutinarProgram {
    pub program: ConicProgram,
    pub rows: Vec<Monomial>,
    pub lambda_col: usize,
    pub multipliers: Vec<QPoly>,
    pub blocks: Vec<(Vec<Monomial>, Gram)>,
    pub rank: u32,
    builder: ProgramBuilder,
}

/// The multipliers `1, h_1, …, h_m` (and `x_i` for sets including `x ≥ 0`).
pub fn putinar_multipliers(set: &SemialgebraicSet) -> Vec<QPoly> {
    let mut us = vec![QPoly::one(set.nvars)];
    us.extend(set.with_nonneg_constraints());
    us
}

pub fn build_putinar_program(p: &QPoly, set: &SemialgebraicSet, r: u32) -> Result<PutinarProgram, HierarchyError> {
    let n = set.nvars;
    if r < p.degree() {
        return Err(HierarchyError::RankTooSmall { r, d: p.degree() });
    }
    let mut asm = Assembler::new();
    let lam = asm.pb.add_free();
    asm.pb.set_objective(lam, 1.0);
    asm.add(Monomial::one(n), lam, 1.0);
    asm.add_rhs_poly(&p.to_f64(), 1.0);
    let mut multipliers = Vec::new();
    let mut blocks = Vec::new();
    for u in putinar_multipliers(set) {
        if u.is_zero() || u.degree() > r {
            continue;
        }
        let basis = monomials_up_to(n, (r - u.degree()) / 2);
        let gram = asm.gram(&basis, &u.to_f64(), 1.0);
        multipliers.push(u);
        blocks.push((basis, gram));
    }
    let (program, keys, builder) = asm.finish();
    Ok(PutinarProgram {
        lambda_col: builder.column_index(lam),
        program,
        rows: keys.into_iter().map(|(_, m)| m).collect(),
        multipliers,
        blocks,
        rank: r,
        builder,
    })
}

impl PutinarProgram {
    pub fn certificate(&self, p: &QPoly, primal: &[f64], max_den: u64) -> PutinarCertificate {
        let sigmas: Vec<SosBlock> = self
            .blocks
            .iter()
            .map(|(b, g)| SosBlock::from_f64(b.clone(), &g.matrix(&self.builder, &self.program, primal), max_den))
            .collect();
        let mut cert = PutinarCertificate {
            nvars: p.nvars(),
            lambda: round_to_rational(primal[self.lambda_col], max_den),
            rank: self.rank,
            multipliers: self.multipliers.iter().map(QPoly::to_lines).collect(),
            sigmas,
        };
        if let Ok(rhs) = cert.expand() {
            let residual = &(p - &QPoly::constant(p.nvars(), cert.lambda.clone())) - &rhs;
            if !residual.is_zero() && residual.degree() == 0 {
                shift_constant(&mut cert.sigmas[0], &residual.constant_term());
            }
        }
        cert
    }
}

/// Putinar (Lasserre) lower bound at rank `r`.
pub fn putinar_lower_bound(
    p: &QPoly,
    set: &SemialgebraicSet,
    r: u32,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult, HierarchyError> {
    let start = Instant::now();
    let pp = build_putinar_program(p, set, r)?;
    let res = run_program(&pp.program, opts)?;
    let mut out = HierarchyResult::new("lasserre", r, Direction::Lower);
    finish_result(&mut out, &pp.program, &res, pp.lambda_col, start);
    if opts.certificate && res.status == SolverStatus::Optimal {
        let mut best = None;
        for den in denominator_ladder(opts.max_den) {
            let cert = pp.certificate(p, &res.primal, den);
            let report = verify_putinar_certificate(&cert, p, set);
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
        out.certificate = Some(Certificate::Putinar(cert));
    }
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}
