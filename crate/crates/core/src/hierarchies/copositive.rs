//! Copositive reformulations `c(x)(p − λ) = F(y(x), h(x))` with F certified
//! non-negative on a simplex by a sparse certificate.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use super::heuristic::strong_positivity_heuristic;
use super::sos::{Assembler, SosLayout};
use super::{finish_result, run_program, Direction, HierarchyError, HierarchyOptions, HierarchyResult};
use crate::poly::{binomial, monomials_up_to, FPoly, Polynomial, QPoly, Scalar};
use crate::semialg::{GTag, GVector, SemialgebraicSet, SimplexEmbedding};

/// Sizes of the reformulated program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopositiveLayout {
    pub d_max: u32,
    /// Degree of the unknown F.
    pub degree: u32,
    /// Variables of F: n + m.
    pub f_vars: usize,
    pub f_terms: usize,
}

impl CopositiveLayout {
    pub fn of(p: &QPoly, set: &SemialgebraicSet) -> Self {
        let hmax = set.constraints.iter().map(QPoly::degree).max().unwrap_or(0);
        let d_max = hmax.max(p.degree().div_ceil(2));
        let f_vars = set.nvars + set.m();
        let f_terms = monomials_up_to(f_vars, 2 * d_max).len();
        CopositiveLayout { d_max, degree: 2 * d_max, f_vars, f_terms }
    }
}

struct Reformulation {
    /// Images of F's variables as polynomials in x.
    images: Vec<QPoly>,
    /// Multiplier of λ in the x identity.
    lambda_poly: QPoly,
    /// Right-hand side of the x identity.
    target: QPoly,
    degree: u32,
    /// Simplex size for F's certificate.
    simplex: BigRational,
    /// Certify `F^h(1 − e⊤w, w)` (copositivity) instead of F itself.
    homogenized: bool,
}

fn powers<C: Scalar>(f: &Polynomial<C>, d: u32) -> Vec<Polynomial<C>> {
    let mut v = vec![Polynomial::one(f.nvars())];
    for _ in 0..d {
        let next = v.last().unwrap() * f;
        v.push(next);
    }
    v
}

fn solve(
    name: &str,
    ref_: &Reformulation,
    r: u32,
    deg_sigma0: Option<u32>,
    opts: &HierarchyOptions,
    start: Instant,
) -> Result<HierarchyResult, HierarchyError> {
    let d = ref_.degree;
    if r < d {
        return Err(HierarchyError::RankTooSmall { r, d });
    }
    let ds0 = deg_sigma0.unwrap_or(r);
    if ds0 > r {
        return Err(HierarchyError::Sigma0Degree { deg: ds0, r });
    }
    let n = ref_.target.nvars();
    let nf = ref_.images.len();
    let fbasis = monomials_up_to(nf, d);

    let max_img = ref_.images.iter().map(QPoly::degree).max().unwrap_or(1).max(1);
    if let Some(cap) = opts.max_entries {
        // the x identity alone has up to this many nonzeros
        let est = binomial((n as u32 + d * max_img) as u64, n as u64)
            .to_string()
            .parse::<f64>()
            .unwrap_or(f64::INFINITY)
            * fbasis.len() as f64;
        if est > cap as f64 {
            return Err(HierarchyError::MemoryGuard { entries: est.min(usize::MAX as f64) as usize, cap });
        }
    }

    let mut asm = Assembler::new();
    let lam = asm.pb.add_free();
    asm.pb.set_objective(lam, 1.0);
    let fcols: Vec<_> = fbasis.iter().map(|_| asm.pb.add_free()).collect();

    // x identity, products formed in floating point and streamed in chunks
    asm.set_family(0);
    asm.add_poly(lam, &ref_.lambda_poly.to_f64(), 1.0);
    asm.add_rhs_poly(&ref_.target.to_f64(), 1.0);
    let pw: Vec<Vec<FPoly>> = ref_.images.iter().map(|f| powers(&f.to_f64(), d)).collect();
    let idx: Vec<usize> = (0..fbasis.len()).collect();
    for chunk in idx.chunks(64) {
        let polys: Vec<FPoly> = chunk
            .par_iter()
            .map(|&k| {
                let mut acc = FPoly::one(n);
                for (i, &e) in fbasis[k].0.iter().enumerate() {
                    if e > 0 {
                        acc = &acc * &pw[i][e as usize];
                    }
                }
                acc
            })
            .collect();
        for (&k, poly) in chunk.iter().zip(&polys) {
            asm.add_poly(fcols[k], poly, 1.0);
        }
    }

    // F (or its simplex form) minus a sparse certificate vanishes
    asm.set_family(1);
    let slack = &QPoly::constant(nf, ref_.simplex.clone()) - &QPoly::sum_of_vars(nf);
    let spow = if ref_.homogenized { powers(&slack, d) } else { Vec::new() };
    for (c, b) in fcols.iter().zip(&fbasis) {
        let mono = QPoly::monomial(nf, b.clone(), BigRational::one());
        let poly = if ref_.homogenized { &mono * &spow[(d - b.degree()) as usize] } else { mono };
        asm.add_poly(*c, &poly.to_f64(), 1.0);
    }
    let mut entries: Vec<QPoly> = (0..nf).map(|i| QPoly::var(nf, i)).collect();
    let mut tags: Vec<GTag> = (0..nf).map(GTag::Lower).collect();
    entries.push(slack);
    tags.push(GTag::Simplex);
    let g = GVector::from_parts(entries, tags, 0, ref_.simplex.clone());
    SosLayout::add(&mut asm, &g, nf, r, ds0, -1.0, opts.shared_rho);

    let (program, _, builder) = asm.finish();
    log::debug!("{name}: assembled in {:.2} s", start.elapsed().as_secs_f64());
    let res = run_program(&program, opts)?;
    log::debug!("{name}: solved at {:.2} s", start.elapsed().as_secs_f64());
    let mut out = HierarchyResult::new(name, r, Direction::Lower);
    out.deg_sigma0 = Some(ds0);
    finish_result(&mut out, &program, &res, builder.column_index(lam), start);
    out.notes.push(format!("F: degree {d} in {nf} variables, {} coefficients", fbasis.len()));
    Ok(out)
}

/// `max λ` with `(1 + e⊤x)^(2 d_max − deg p) (p − λ) = F(x, h(x))` and F
/// copositive, the latter certified through `F^h(1 − e⊤w, w)` on the unit
/// simplex at rank `r`. Requires a set inside the orthant.
pub fn copositive_lower_bound(
    p: &QPoly,
    set: &SemialgebraicSet,
    r: u32,
    deg_sigma0: Option<u32>,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult, HierarchyError> {
    let start = Instant::now();
    if !set.explicit_nonneg {
        return Err(HierarchyError::NotNonneg);
    }
    let n = set.nvars;
    let lay = CopositiveLayout::of(p, set);
    let k = lay.degree - p.degree();
    let mult = (&QPoly::one(n) + &QPoly::sum_of_vars(n)).pow(k);
    let mut images: Vec<QPoly> = (0..n).map(|i| QPoly::var(n, i)).collect();
    images.extend(set.constraints.iter().cloned());
    let ref_ = Reformulation {
        images,
        target: &mult * p,
        lambda_poly: mult,
        degree: lay.degree,
        simplex: BigRational::one(),
        homogenized: true,
    };
    let mut out = solve("copositive", &ref_, r, deg_sigma0, opts, start)?;
    out.heuristic = Some(strong_positivity_heuristic(p, set, 2000, 0));
    Ok(out)
}

/// `max λ` with `p − λ = F(x − L, h(x))` and F non-negative on the simplex
/// of size M̂, certified at rank `r`.
pub fn compact_simplex_reformulation(
    p: &QPoly,
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
    r: u32,
    deg_sigma0: Option<u32>,
    opts: &HierarchyOptions,
) -> Result<HierarchyResult, HierarchyError> {
    let start = Instant::now();
    let n = set.nvars;
    let lay = CopositiveLayout::of(p, set);
    let mut images: Vec<QPoly> = (0..n)
        .map(|i| &QPoly::var(n, i) - &QPoly::constant(n, emb.lower[i].clone()))
        .collect();
    images.extend(set.constraints.iter().cloned());
    let ref_ = Reformulation {
        images,
        target: p.clone(),
        lambda_poly: QPoly::one(n),
        degree: lay.degree,
        simplex: emb.m_hat.clone(),
        homogenized: false,
    };
    solve("compact", &ref_, r, deg_sigma0, opts, start)
}
