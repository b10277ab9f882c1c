//! Coefficient-matching assembly for Gram-matrix programs.

use std::collections::BTreeMap;

use crate::certificate::{IndexedBlock, SosBlock};
use crate::conic::{Col, ConicProgram, ProgramBuilder};
use crate::poly::{monomials_up_to, FPoly, Monomial, QPoly};
use crate::semialg::GVector;

/// Equality rows keyed by `(family, monomial)`. Families separate identities
/// that live in different variable spaces. Rows are emitted in key order.
#[derive(Default)]
pub struct Assembler {
    pub pb: ProgramBuilder,
    rows: BTreeMap<(u8, Monomial), Vec<(Col, f64)>>,
    rhs: BTreeMap<(u8, Monomial), f64>,
    family: u8,
}

/// Handle to the decision variables of one Gram matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gram {
    Block { block: usize, size: usize },
    /// 1×1 Gram stored as a non-negative scalar.
    Scalar(Col),
}

impl Gram {
    pub fn matrix(&self, pb: &ProgramBuilder, prog: &ConicProgram, primal: &[f64]) -> Vec<Vec<f64>> {
        match *self {
            Gram::Block { block, .. } => prog.block_matrix(primal, block),
            Gram::Scalar(c) => vec![vec![primal[pb.column_index(c)]]],
        }
    }
}

impl Assembler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_family(&mut self, family: u8) {
        self.family = family;
    }

    pub fn add(&mut self, m: Monomial, col: Col, v: f64) {
        if v != 0.0 {
            self.rows.entry((self.family, m)).or_default().push((col, v));
        }
    }

    pub fn add_poly(&mut self, col: Col, p: &FPoly, scale: f64) {
        for (m, c) in p.terms() {
            self.add(m.clone(), col, scale * c);
        }
    }

    /// Adds `scale · p` to the right-hand side.
    pub fn add_rhs_poly(&mut self, p: &FPoly, scale: f64) {
        for (m, c) in p.terms() {
            let key = (self.family, m.clone());
            self.rows.entry(key.clone()).or_default();
            *self.rhs.entry(key).or_insert(0.0) += scale * c;
        }
    }

    /// Adds `sign · b⊤ G b · mult` for a fresh Gram `G` over `basis`.
    pub fn gram(&mut self, basis: &[Monomial], mult: &FPoly, sign: f64) -> Gram {
        let s = basis.len();
        if s == 1 {
            let col = self.pb.add_nonneg();
            for (m, c) in mult.terms() {
                self.add(basis[0].mul(&basis[0]).mul(m), col, sign * c);
            }
            return Gram::Scalar(col);
        }
        let block = self.pb.add_psd(s);
        for j in 0..s {
            for i in 0..=j {
                let bb = basis[i].mul(&basis[j]);
                let w = if i == j { sign } else { sign * std::f64::consts::SQRT_2 };
                for (m, c) in mult.terms() {
                    self.add(bb.mul(m), Col::Psd { block, i, j }, w * c);
                }
            }
        }
        Gram::Block { block, size: s }
    }

    /// Adds `sign · ρ(g) g` with `ρ(t) = b(t)⊤ G b(t)`, `b = (1, t, …, t^k)`.
    /// `gpow[e]` must hold `g^(e+1)` for `e ≤ 2k`.
    pub fn gram_univariate(&mut self, k: usize, gpow: &[FPoly], sign: f64) -> Gram {
        let g = self.new_univariate(k);
        self.add_univariate(g, k, gpow, sign);
        g
    }

    pub fn new_univariate(&mut self, k: usize) -> Gram {
        if k == 0 {
            Gram::Scalar(self.pb.add_nonneg())
        } else {
            Gram::Block { block: self.pb.add_psd(k + 1), size: k + 1 }
        }
    }

    /// Adds another `sign · ρ(g) g` term for an existing univariate Gram.
    pub fn add_univariate(&mut self, g: Gram, k: usize, gpow: &[FPoly], sign: f64) {
        match g {
            Gram::Scalar(col) => self.add_poly(col, &gpow[0], sign),
            Gram::Block { block, .. } => {
                for j in 0..=k {
                    for i in 0..=j {
                        let w = if i == j { sign } else { sign * std::f64::consts::SQRT_2 };
                        let p = &gpow[i + j];
                        for (m, c) in p.terms() {
                            self.add(m.clone(), Col::Psd { block, i, j }, w * c);
                        }
                    }
                }
            }
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Emits the program; also returns the row keys in row order.
    pub fn finish(mut self) -> (ConicProgram, Vec<(u8, Monomial)>, ProgramBuilder) {
        let mut keys = Vec::with_capacity(self.rows.len());
        let rows = std::mem::take(&mut self.rows);
        for (key, entries) in rows {
            let r = self.pb.add_row(self.rhs.get(&key).copied().unwrap_or(0.0));
            for (c, v) in entries {
                self.pb.push(r, c, v);
            }
            keys.push(key);
        }
        (self.pb.build(), keys, self.pb)
    }
}

/// Where the multipliers of a sparse simplex/box certificate live in a
/// program.
#[derive(Clone, Debug)]
pub struct SosLayout {
    pub nvars: usize,
    pub deg_sigma0: u32,
    pub sigma0: (Vec<Monomial>, Gram),
    pub sigma1: Option<(Vec<Monomial>, Gram)>,
    pub taus: Vec<(usize, Vec<Monomial>, Gram)>,
    pub rhos: Vec<(usize, usize, Gram)>,
}

fn univariate_basis(k: usize) -> Vec<Monomial> {
    (0..=k as u32).map(|e| Monomial(vec![e])).collect()
}

fn embed_monomials(scope: &[usize], nvars: usize, d: u32) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = monomials_up_to(scope.len(), d)
        .into_iter()
        .map(|m| {
            let mut e = vec![0; nvars];
            for (k, &v) in scope.iter().enumerate() {
                e[v] = m.0[k];
            }
            Monomial(e)
        })
        .collect();
    out.sort();
    out
}

/// `g^1 … g^(2k+1)` as floats, computed exactly first.
fn float_powers(g: &QPoly, k: usize) -> Vec<FPoly> {
    let mut out = Vec::with_capacity(2 * k + 1);
    let mut cur = g.clone();
    for e in 0..=2 * k {
        if e > 0 {
            cur = &cur * g;
        }
        out.push(cur.to_f64());
    }
    out
}

impl SosLayout {
    /// Adds `sign · (σ0 + σ1 (R² − Σg²) + Σ τ_i g_i + Σ ρ_i(g_i) g_i)` with
    /// every summand of degree at most `r`, σ0 of degree at most `deg_sigma0`.
    pub fn add(asm: &mut Assembler, g: &GVector, nvars: usize, r: u32, deg_sigma0: u32, sign: f64, shared_rho: bool) -> Self {
        let one = FPoly::one(nvars);
        let b0 = monomials_up_to(nvars, deg_sigma0 / 2);
        let s0 = asm.gram(&b0, &one, sign);
        let ball = g.ball_factor(nvars);
        let sigma1 = if !g.is_empty() && r >= ball.degree() {
            let b1 = monomials_up_to(nvars, (r - ball.degree()) / 2);
            let gram = asm.gram(&b1, &ball.to_f64(), sign);
            Some((b1, gram))
        } else {
            None
        };
        let mut taus = Vec::new();
        for i in 0..g.tau_count().min(g.len()) {
            let d = g.entries[i].degree();
            if r < d || g.entries[i].is_zero() {
                continue;
            }
            let basis = embed_monomials(&g.var_scopes[i], nvars, (r - d) / 2);
            let gram = asm.gram(&basis, &g.entries[i].to_f64(), sign);
            taus.push((i, basis, gram));
        }
        let mut rhos = Vec::new();
        let rho_k = |d: u32| if d == 0 { 0 } else { ((r - d) / (2 * d)) as usize };
        let rho_idx: Vec<usize> = (g.tau_count().min(g.len())..g.len())
            .filter(|&i| r >= g.entries[i].degree() && !g.entries[i].is_zero())
            .collect();
        if shared_rho && !rho_idx.is_empty() {
            let k = rho_idx.iter().map(|&i| rho_k(g.entries[i].degree())).min().unwrap();
            let gram = asm.new_univariate(k);
            for &i in &rho_idx {
                asm.add_univariate(gram, k, &float_powers(&g.entries[i], k), sign);
                rhos.push((i, k + 1, gram));
            }
        } else {
            for &i in &rho_idx {
                let k = rho_k(g.entries[i].degree());
                let gram = asm.gram_univariate(k, &float_powers(&g.entries[i], k), sign);
                rhos.push((i, k + 1, gram));
            }
        }
        SosLayout { nvars, deg_sigma0, sigma0: (b0, s0), sigma1, taus, rhos }
    }

    /// Rounded blocks `(σ0, σ1, τ, ρ)`.
    pub fn extract(
        &self,
        pb: &ProgramBuilder,
        prog: &ConicProgram,
        primal: &[f64],
        max_den: u64,
    ) -> (SosBlock, Option<SosBlock>, Vec<IndexedBlock>, Vec<IndexedBlock>) {
        let block = |basis: &[Monomial], g: &Gram| {
            SosBlock::from_f64(basis.to_vec(), &g.matrix(pb, prog, primal), max_den)
        };
        let s0 = block(&self.sigma0.0, &self.sigma0.1);
        let s1 = self.sigma1.as_ref().map(|(b, g)| block(b, g));
        let taus = self
            .taus
            .iter()
            .map(|(i, b, g)| IndexedBlock { index: *i, block: block(b, g) })
            .collect();
        let rhos = self
            .rhos
            .iter()
            .map(|(i, s, g)| IndexedBlock { index: *i, block: block(&univariate_basis(s - 1), g) })
            .collect();
        (s0, s1, taus, rhos)
    }
}
