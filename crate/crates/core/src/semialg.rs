//! Semialgebraic sets `{x : h_j(x) ≥ 0}`, their bounding constants, the tilde
//! set, variable splitting and the g-vectors used by sparse certificates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{q_to_f64, FPoly, QPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("constraint {index} has {got} variables, set has {expected}")]
    Nvars { index: usize, expected: usize, got: usize },
    #[error("slack must be positive")]
    Slack,
    #[error("lower bound vector has length {got}, expected {expected}")]
    BoundLength { expected: usize, got: usize },
    #[error("m1 = {m1} exceeds the constraint count {m}")]
    M1Range { m1: usize, m: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemialgebraicSet {
    pub nvars: usize,
    pub constraints: Vec<QPoly>,
    /// Whether `x ≥ 0` is part of the description.
    pub explicit_nonneg: bool,
}

impl SemialgebraicSet {
    pub fn new(nvars: usize, constraints: Vec<QPoly>, explicit_nonneg: bool) -> Result<Self, SetError> {
        for (index, h) in constraints.iter().enumerate() {
            if h.nvars() != nvars {
                return Err(SetError::Nvars { index, expected: nvars, got: h.nvars() });
            }
        }
        Ok(SemialgebraicSet { nvars, constraints, explicit_nonneg })
    }

    pub fn unconstrained(nvars: usize) -> Self {
        SemialgebraicSet { nvars, constraints: vec![], explicit_nonneg: false }
    }

    pub fn orthant(nvars: usize) -> Self {
        SemialgebraicSet { nvars, constraints: vec![], explicit_nonneg: true }
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// Exact membership test.
    pub fn contains(&self, x: &[BigRational]) -> bool {
        if self.explicit_nonneg && x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.constraints
            .iter()
            .all(|h| !h.evaluate(x).expect("point length").is_negative())
    }

    /// Float membership with absolute tolerance on each constraint.
    pub fn contains_f64(&self, x: &[f64], tol: f64) -> bool {
        if self.explicit_nonneg && x.iter().any(|&v| v < -tol) {
            return false;
        }
        self.constraints_f64()
            .iter()
            .all(|h| h.evaluate(x).expect("point length") >= -tol)
    }

    pub fn constraints_f64(&self) -> Vec<FPoly> {
        self.constraints.iter().map(QPoly::to_f64).collect()
    }

    /// The constraints together with `x_i ≥ 0` when the flag is set.
    pub fn with_nonneg_constraints(&self) -> Vec<QPoly> {
        let mut out = self.constraints.clone();
        if self.explicit_nonneg {
            for i in 0..self.nvars {
                out.push(QPoly::var(self.nvars, i));
            }
        }
        out
    }
}

/// Box/simplex data: `L ≤ x`, `e⊤x ≤ M` on S, plus the derived M̂ and Ũ_j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexEmbedding {
    #[serde(with = "crate::serde_q::vec")]
    pub lower: Vec<BigRational>,
    #[serde(with = "crate::serde_q::one")]
    pub m: BigRational,
    #[serde(with = "crate::serde_q::one")]
    pub m_hat: BigRational,
    #[serde(with = "crate::serde_q::vec")]
    pub u_tilde: Vec<BigRational>,
}

impl SimplexEmbedding {
    pub fn nvars(&self) -> usize {
        self.lower.len()
    }
}

/// `(1 + M + e⊤(|L| − L))^{deg h} ‖h‖`.
pub fn u_tilde(h: &QPoly, lower: &[BigRational], m: &BigRational) -> BigRational {
    let shift: BigRational = lower
        .iter()
        .map(|l| l.abs() - l)
        .fold(BigRational::zero(), |a, b| a + b);
    let base = BigRational::one() + m + shift;
    num_traits::pow(base, h.degree() as usize) * h.multinomial_norm()
}

/// M̂ = M + Σ Ũ_j + slack (strictly above the bound required for the
/// compact-case certificates).
pub fn derive_embedding(
    set: &SemialgebraicSet,
    lower: &[BigRational],
    m: &BigRational,
    slack: &BigRational,
) -> Result<SimplexEmbedding, SetError> {
    if !slack.is_positive() {
        return Err(SetError::Slack);
    }
    if lower.len() != set.nvars {
        return Err(SetError::BoundLength { expected: set.nvars, got: lower.len() });
    }
    let u: Vec<BigRational> = set.constraints.iter().map(|h| u_tilde(h, lower, m)).collect();
    let m_hat = u.iter().fold(m + slack, |a, b| a + b);
    Ok(SimplexEmbedding { lower: lower.to_vec(), m: m.clone(), m_hat, u_tilde: u })
}

/// Rewrites `x = y − z` with `y, z ≥ 0`. Sets already inside the orthant are
/// returned unchanged (z is eliminated).
pub fn split_variables(set: &SemialgebraicSet, p: &QPoly) -> (SemialgebraicSet, QPoly) {
    if set.explicit_nonneg {
        return (set.clone(), p.clone());
    }
    let n = set.nvars;
    let images: Vec<QPoly> = (0..n)
        .map(|i| &QPoly::var(2 * n, i) - &QPoly::var(2 * n, n + i))
        .collect();
    let sub = |h: &QPoly| h.substitute(&images).expect("image count");
    let t = SemialgebraicSet {
        nvars: 2 * n,
        constraints: set.constraints.iter().map(sub).collect(),
        explicit_nonneg: true,
    };
    (t, sub(p))
}

/// Positive and negative parts of a point, the preimage under `split_variables`.
pub fn split_point(x: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    out.extend(x.iter().map(|v| (-v).max(0.0)));
    out
}

/// Replaces every constraint by its top component. The zero constraint stays
/// zero.
pub fn tilde_set(set: &SemialgebraicSet) -> SemialgebraicSet {
    let constraints = set
        .constraints
        .iter()
        .map(|h| h.top_component().unwrap_or_else(|_| QPoly::zero(set.nvars)))
        .collect();
    SemialgebraicSet { nvars: set.nvars, constraints, explicit_nonneg: set.explicit_nonneg }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum GTag {
    /// `x_i − L_i`
    Lower(usize),
    /// `U_i − x_i`
    Upper(usize),
    /// `h_j`
    Constraint(usize),
    /// `Ũ_j − h_j`
    Complement(usize),
    /// `M̂ − e⊤x − e⊤h`
    Simplex,
    /// User supplied; must be certified non-negative separately.
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GVector {
    pub entries: Vec<QPoly>,
    pub tags: Vec<GTag>,
    pub var_scopes: Vec<Vec<usize>>,
    /// The first `2 * m1` entries get full multipliers over their variables.
    pub m1: usize,
    /// `R` with `Σ g_i² ≤ R²` on the set; the σ1 factor is `R² − Σ g_i²`.
    pub radius: BigRational,
}

impl GVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tau_count(&self) -> usize {
        2 * self.m1
    }

    pub fn from_parts(entries: Vec<QPoly>, tags: Vec<GTag>, m1: usize, radius: BigRational) -> Self {
        let var_scopes = entries.iter().map(QPoly::support).collect();
        GVector { entries, tags, var_scopes, m1, radius }
    }

    /// `R² − Σ g_i²`.
    pub fn ball_factor(&self, nvars: usize) -> QPoly {
        let mut f = QPoly::constant(nvars, &self.radius * &self.radius);
        for g in &self.entries {
            f = &f - &(g * g);
        }
        f
    }
}

/// Number of leading constraints with at most `threshold` variables.
pub fn detect_m1(set: &SemialgebraicSet, threshold: usize) -> usize {
    set.constraints
        .iter()
        .take_while(|h| h.support().len() <= threshold)
        .count()
}

/// g-vector for the simplex form `(x − L, h, M̂ − e⊤x − e⊤h)` with radius
/// `M̂ − e⊤L`.
pub fn g_vector_simplex(set: &SemialgebraicSet, emb: &SimplexEmbedding) -> GVector {
    let n = set.nvars;
    let mut entries = Vec::new();
    let mut tags = Vec::new();
    for i in 0..n {
        entries.push(&QPoly::var(n, i) - &QPoly::constant(n, emb.lower[i].clone()));
        tags.push(GTag::Lower(i));
    }
    for (j, h) in set.constraints.iter().enumerate() {
        entries.push(h.clone());
        tags.push(GTag::Constraint(j));
    }
    entries.push(simplex_entry(set, emb));
    tags.push(GTag::Simplex);
    let radius = emb.lower.iter().fold(emb.m_hat.clone(), |a, l| a - l);
    GVector::from_parts(entries, tags, 0, radius)
}

pub fn simplex_entry(set: &SemialgebraicSet, emb: &SimplexEmbedding) -> QPoly {
    let n = set.nvars;
    let mut e = &QPoly::constant(n, emb.m_hat.clone()) - &QPoly::sum_of_vars(n);
    for h in &set.constraints {
        e = &e - h;
    }
    e
}

/// Box layout `[h_1..h_m1, Ũ−h_1..Ũ−h_m1, h_rest, Ũ−h_rest, x − L, U − x]`
/// with radius `e⊤(U − L) + Σ Ũ_j`.
pub fn g_vector(
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
    upper: &[BigRational],
    m1: usize,
) -> Result<GVector, SetError> {
    let n = set.nvars;
    let m = set.m();
    if m1 > m {
        return Err(SetError::M1Range { m1, m });
    }
    if upper.len() != n {
        return Err(SetError::BoundLength { expected: n, got: upper.len() });
    }
    let mut entries = Vec::with_capacity(2 * n + 2 * m);
    let mut tags = Vec::with_capacity(2 * n + 2 * m);
    for range in [0..m1, m1..m] {
        for j in range.clone() {
            entries.push(set.constraints[j].clone());
            tags.push(GTag::Constraint(j));
        }
        for j in range {
            entries.push(&QPoly::constant(n, emb.u_tilde[j].clone()) - &set.constraints[j]);
            tags.push(GTag::Complement(j));
        }
    }
    for i in 0..n {
        entries.push(&QPoly::var(n, i) - &QPoly::constant(n, emb.lower[i].clone()));
        tags.push(GTag::Lower(i));
    }
    for i in 0..n {
        entries.push(&QPoly::constant(n, upper[i].clone()) - &QPoly::var(n, i));
        tags.push(GTag::Upper(i));
    }
    let mut radius = BigRational::zero();
    for i in 0..n {
        radius += &upper[i] - &emb.lower[i];
    }
    for u in &emb.u_tilde {
        radius += u;
    }
    Ok(GVector::from_parts(entries, tags, m1, radius))
}

/// Axis-aligned sampling box.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        SampleBox { lo, hi }
    }

    pub fn uniform(n: usize, lo: f64, hi: f64) -> Self {
        SampleBox { lo: vec![lo; n], hi: vec![hi; n] }
    }
}

/// Rejection sampling inside `bx`; deterministic for a fixed seed. Gives up
/// after `count * 2000 + 10000` draws and returns what it found.
pub fn sample_feasible(set: &SemialgebraicSet, bx: &SampleBox, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hs = set.constraints_f64();
    let mut out = Vec::with_capacity(count);
    let budget = count.saturating_mul(2000).saturating_add(10_000);
    let mut x = vec![0.0; set.nvars];
    for _ in 0..budget {
        if out.len() >= count {
            break;
        }
        for i in 0..set.nvars {
            let (lo, hi) = (bx.lo[i], bx.hi[i]);
            x[i] = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        }
        if set.explicit_nonneg && x.iter().any(|&v| v < 0.0) {
            continue;
        }
        if hs.iter().all(|h| h.evaluate(&x).unwrap() >= 0.0) {
            out.push(x.clone());
        }
    }
    out
}

pub fn qvec_to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(q_to_f64).collect()
}

pub fn qvec_from_ints(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&k| BigRational::from_integer(BigInt::from(k))).collect()
}
