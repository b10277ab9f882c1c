//! Certificate values and the certificate file format.
//!
//! A certificate file is one JSON object:
//!
//! ```text
//! {
//!   "format": "polycert-certificate",
//!   "version": 1,
//!   "kind": "lp" | "sparse" | "putinar",
//!   ...kind specific fields
//! }
//! ```
//!
//! Rationals are `"num/den"` strings. Polynomials are arrays of term lines
//! `"c e1 … en"` (the canonical polynomial text form). Gram matrices are
//! arrays of rows of rationals, indexed by the block's monomial basis.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{round_to_rational, Monomial, PolyError, QPoly};
use crate::polya::LPCertificate;
use crate::semialg::{GTag, GVector, SimplexEmbedding};

pub const CERTIFICATE_FORMAT: &str = "polycert-certificate";
pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a certificate file (format `{0}`)")]
    Format(String),
    #[error("unsupported certificate version {0}")]
    Version(u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A Gram block: the SOS `b⊤ G b` over the monomial basis `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosBlock {
    pub basis: Vec<Monomial>,
    #[serde(with = "crate::serde_q::mat")]
    pub gram: Vec<Vec<BigRational>>,
}

impl SosBlock {
    /// `c · 1` as a 1×1 block.
    pub fn scalar(nvars: usize, c: BigRational) -> Self {
        SosBlock { basis: vec![Monomial::one(nvars)], gram: vec![vec![c]] }
    }

    /// Symmetrizes a float Gram and rounds it entry by entry.
    pub fn from_f64(basis: Vec<Monomial>, gram: &[Vec<f64>], max_den: u64) -> Self {
        let s = basis.len();
        let mut g = vec![vec![BigRational::zero(); s]; s];
        for i in 0..s {
            for j in i..s {
                let v = round_to_rational(0.5 * (gram[i][j] + gram[j][i]), max_den);
                g[i][j] = v.clone();
                g[j][i] = v;
            }
        }
        SosBlock { basis, gram: g }
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let s = self.size();
        self.gram.len() == s
            && self.gram.iter().all(|r| r.len() == s)
            && (0..s).all(|i| (0..i).all(|j| self.gram[i][j] == self.gram[j][i]))
    }

    /// `b⊤ G b` in the basis' variables.
    pub fn to_poly(&self, nvars: usize) -> QPoly {
        let mut p = QPoly::zero(nvars);
        for (i, bi) in self.basis.iter().enumerate() {
            for (j, bj) in self.basis.iter().enumerate() {
                let c = &self.gram[i][j];
                if !c.is_zero() {
                    p.add_term(bi.mul(bj), c.clone());
                }
            }
        }
        p
    }

    /// `ρ(t) = b(t)⊤ G b(t)` composed with `t := g`, for a univariate block.
    pub fn compose_univariate(&self, g: &QPoly) -> QPoly {
        let n = g.nvars();
        let mut out = QPoly::zero(n);
        let rho = self.to_poly(1);
        let mut pw = QPoly::one(n);
        let mut e = 0u32;
        for (m, c) in rho.terms() {
            while e < m.0[0] {
                pw = &pw * g;
                e += 1;
            }
            out.add_scaled(&pw, c);
        }
        out
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.gram.iter().map(|r| r.iter().map(crate::poly::q_to_f64).collect()).collect()
    }
}

/// A block attached to one g-entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedBlock {
    pub index: usize,
    pub block: SosBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GEntry {
    pub tag: GTag,
    pub poly: Vec<String>,
}

/// `p − λ = σ0 + σ1 (R² − Σ g_i²) + Σ τ_i g_i + Σ ρ_i(g_i) g_i`, where the
/// τ_i act on the first `2·m1` entries and ρ_i are univariate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSOSCertificate {
    pub nvars: usize,
    #[serde(with = "crate::serde_q::one")]
    pub lambda: BigRational,
    pub rank: u32,
    pub deg_sigma0: u32,
    pub embedding: SimplexEmbedding,
    pub g: Vec<GEntry>,
    pub m1: usize,
    #[serde(with = "crate::serde_q::one")]
    pub radius: BigRational,
    pub sigma0: SosBlock,
    pub sigma1: Option<SosBlock>,
    pub taus: Vec<IndexedBlock>,
    pub rhos: Vec<IndexedBlock>,
}

impl SparseSOSCertificate {
    pub fn entries_from(g: &GVector) -> Vec<GEntry> {
        g.entries.iter().zip(&g.tags).map(|(p, &tag)| GEntry { tag, poly: p.to_lines() }).collect()
    }

    pub fn gvector(&self) -> Result<GVector, PolyError> {
        let entries = self
            .g
            .iter()
            .map(|e| QPoly::parse_lines(self.nvars, e.poly.iter().map(String::as_str)))
            .collect::<Result<Vec<_>, _>>()?;
        let tags = self.g.iter().map(|e| e.tag).collect();
        Ok(GVector::from_parts(entries, tags, self.m1, self.radius.clone()))
    }

    /// The right-hand side of the identity.
    pub fn expand(&self) -> Result<QPoly, PolyError> {
        let n = self.nvars;
        let g = self.gvector()?;
        let mut out = self.sigma0.to_poly(n);
        if let Some(s1) = &self.sigma1 {
            out = &out + &(&s1.to_poly(n) * &g.ball_factor(n));
        }
        for t in &self.taus {
            let gi = g.entries.get(t.index).ok_or_else(|| bad_index(t.index))?;
            out = &out + &(&t.block.to_poly(n) * gi);
        }
        for r in &self.rhos {
            let gi = g.entries.get(r.index).ok_or_else(|| bad_index(r.index))?;
            out = &out + &(&r.block.compose_univariate(gi) * gi);
        }
        Ok(out)
    }

    pub fn blocks(&self) -> Vec<(String, &SosBlock)> {
        let mut v = vec![("sigma0".to_owned(), &self.sigma0)];
        if let Some(s) = &self.sigma1 {
            v.push(("sigma1".into(), s));
        }
        v.extend(self.taus.iter().map(|t| (format!("tau[{}]", t.index), &t.block)));
        v.extend(self.rhos.iter().map(|t| (format!("rho[{}]", t.index), &t.block)));
        v
    }
}

fn bad_index(i: usize) -> PolyError {
    PolyError::Parse(format!("multiplier refers to missing g entry {i}"))
}

/// `p − λ = Σ_j σ_j u_j` with `u_0 = 1` and the remaining `u_j` taken from
/// the constraint list (and `x_i` when the set includes `x ≥ 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PutinarCertificate {
    pub nvars: usize,
    #[serde(with = "crate::serde_q::one")]
    pub lambda: BigRational,
    pub rank: u32,
    pub multipliers: Vec<Vec<String>>,
    pub sigmas: Vec<SosBlock>,
}

impl PutinarCertificate {
    pub fn multiplier_polys(&self) -> Result<Vec<QPoly>, PolyError> {
        self.multipliers
            .iter()
            .map(|m| QPoly::parse_lines(self.nvars, m.iter().map(String::as_str)))
            .collect()
    }

    pub fn expand(&self) -> Result<QPoly, PolyError> {
        let us = self.multiplier_polys()?;
        if us.len() != self.sigmas.len() {
            return Err(PolyError::Parse(format!(
                "{} multipliers but {} SOS blocks",
                us.len(),
                self.sigmas.len()
            )));
        }
        let mut out = QPoly::zero(self.nvars);
        for (u, s) in us.iter().zip(&self.sigmas) {
            out = &out + &(&s.to_poly(self.nvars) * u);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Lp(LPCertificate),
    Sparse(SparseSOSCertificate),
    Putinar(PutinarCertificate),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Lp(_) => "lp",
            Certificate::Sparse(_) => "sparse",
            Certificate::Putinar(_) => "putinar",
        }
    }

    pub fn lambda(&self) -> &BigRational {
        match self {
            Certificate::Lp(c) => &c.lambda,
            Certificate::Sparse(c) => &c.lambda,
            Certificate::Putinar(c) => &c.lambda,
        }
    }

    pub fn to_json(&self) -> String {
        let file = CertificateFile {
            format: CERTIFICATE_FORMAT.into(),
            version: CERTIFICATE_VERSION,
            certificate: self.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Certificate, CertificateError> {
        let file: CertificateFile = serde_json::from_str(text)?;
        if file.format != CERTIFICATE_FORMAT {
            return Err(CertificateError::Format(file.format));
        }
        if file.version != CERTIFICATE_VERSION {
            return Err(CertificateError::Version(file.version));
        }
        Ok(file.certificate)
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    certificate: Certificate,
}

/// Adds `delta` to the constant-monomial diagonal entry of a block whose
/// basis contains 1.
pub fn shift_constant(block: &mut SosBlock, delta: &BigRational) -> bool {
    match block.basis.iter().position(|m| m.degree() == 0) {
        Some(k) => {
            block.gram[k][k] += delta;
            true
        }
        None => false,
    }
}
