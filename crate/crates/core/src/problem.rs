//! Problem files and the random instance generator.
//!
//! A problem file is one JSON object:
//!
//! ```text
//! {
//!   "format": "polycert-problem",
//!   "version": 1,
//!   "name": "...",
//!   "seed": 7,                      (optional)
//!   "nvars": n,
//!   "objective": ["c e1 … en", …],
//!   "constraints": [[…], …],        (h_j ≥ 0)
//!   "nonneg": true,                 (x ≥ 0 is part of the set)
//!   "bounds": {"lower": ["0", …], "upper": [...], "m": "3", "slack": "1"},
//!   "m1": 2                         (optional)
//! }
//! ```
//!
//! Polynomials use the term-line form of [`QPoly::to_lines`]; bounds are
//! rational strings. Files written by [`Problem::to_json`] re-serialize to
//! the same bytes.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{format_rational, monomials_up_to, parse_rational, PolyError, QPoly};
use crate::semialg::{derive_embedding, g_vector, g_vector_simplex, GVector, SemialgebraicSet, SetError, SimplexEmbedding};

pub const PROBLEM_FORMAT: &str = "polycert-problem";
pub const PROBLEM_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("problem JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a problem file (format `{0}`)")]
    Format(String),
    #[error("unsupported problem version {0}")]
    Version(u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("the problem gives no {0}")]
    Missing(&'static str),
    #[error("n must be even and at least 4 (got {0})")]
    OddN(usize),
    #[error("objective degree must be 1..=4 (got {0})")]
    Degree(u32),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct BoundsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slack: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ProblemFile {
    format: String,
    version: u32,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    nvars: usize,
    objective: Vec<String>,
    #[serde(default)]
    constraints: Vec<Vec<String>>,
    #[serde(default)]
    nonneg: bool,
    #[serde(default)]
    bounds: BoundsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m1: Option<usize>,
}

/// `min p(x)` over a basic semialgebraic set, with the bounds
/// `L ≤ x ≤ U`, `e⊤x ≤ M` known to hold on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: String,
    pub seed: Option<u64>,
    pub objective: QPoly,
    pub set: SemialgebraicSet,
    pub lower: Option<Vec<BigRational>>,
    pub upper: Option<Vec<BigRational>>,
    pub m: Option<BigRational>,
    pub slack: Option<BigRational>,
    pub m1: Option<usize>,
}

fn parse_vec(v: &Option<Vec<String>>, n: usize) -> Result<Option<Vec<BigRational>>, ProblemError> {
    let Some(v) = v else { return Ok(None) };
    if v.len() != n {
        return Err(SetError::BoundLength { expected: n, got: v.len() }.into());
    }
    Ok(Some(v.iter().map(|s| parse_rational(s)).collect::<Result<_, _>>()?))
}

impl Problem {
    pub fn new(name: impl Into<String>, objective: QPoly, set: SemialgebraicSet) -> Self {
        Problem {
            name: name.into(),
            seed: None,
            objective,
            set,
            lower: None,
            upper: None,
            m: None,
            slack: None,
            m1: None,
        }
    }

    pub fn nvars(&self) -> usize {
        self.set.nvars
    }

    pub fn parse(text: &str) -> Result<Problem, ProblemError> {
        let f: ProblemFile = serde_json::from_str(text)?;
        if f.format != PROBLEM_FORMAT {
            return Err(ProblemError::Format(f.format));
        }
        if f.version != PROBLEM_VERSION {
            return Err(ProblemError::Version(f.version));
        }
        let n = f.nvars;
        let objective = QPoly::parse_lines(n, f.objective.iter().map(String::as_str))?;
        let constraints = f
            .constraints
            .iter()
            .map(|c| QPoly::parse_lines(n, c.iter().map(String::as_str)))
            .collect::<Result<Vec<_>, _>>()?;
        let set = SemialgebraicSet::new(n, constraints, f.nonneg)?;
        let b = &f.bounds;
        Ok(Problem {
            name: f.name,
            seed: f.seed,
            objective,
            set,
            lower: parse_vec(&b.lower, n)?,
            upper: parse_vec(&b.upper, n)?,
            m: b.m.as_deref().map(parse_rational).transpose()?,
            slack: b.slack.as_deref().map(parse_rational).transpose()?,
            m1: f.m1,
        })
    }

    pub fn to_json(&self) -> String {
        let fmt_vec = |v: &Option<Vec<BigRational>>| v.as_ref().map(|v| v.iter().map(format_rational).collect());
        let f = ProblemFile {
            format: PROBLEM_FORMAT.into(),
            version: PROBLEM_VERSION,
            name: self.name.clone(),
            seed: self.seed,
            nvars: self.nvars(),
            objective: self.objective.to_lines(),
            constraints: self.set.constraints.iter().map(QPoly::to_lines).collect(),
            nonneg: self.set.explicit_nonneg,
            bounds: BoundsFile {
                lower: fmt_vec(&self.lower),
                upper: fmt_vec(&self.upper),
                m: self.m.as_ref().map(format_rational),
                slack: self.slack.as_ref().map(format_rational),
            },
            m1: self.m1,
        };
        let mut s = serde_json::to_string_pretty(&f).expect("problem serializes");
        s.push('\n');
        s
    }

    /// `L`, defaulting to 0 for sets inside the orthant.
    pub fn lower_bound(&self) -> Result<Vec<BigRational>, ProblemError> {
        match (&self.lower, self.set.explicit_nonneg) {
            (Some(l), _) => Ok(l.clone()),
            (None, true) => Ok(vec![BigRational::zero(); self.nvars()]),
            (None, false) => Err(ProblemError::Missing("lower bound L")),
        }
    }

    /// `M`, defaulting to `e⊤U` when only a box is given.
    pub fn m_bound(&self) -> Result<BigRational, ProblemError> {
        match (&self.m, &self.upper) {
            (Some(m), _) => Ok(m.clone()),
            (None, Some(u)) => Ok(u.iter().fold(BigRational::zero(), |a, b| a + b)),
            (None, None) => Err(ProblemError::Missing("bound M (or upper bound U)")),
        }
    }

    /// The simplex embedding; slack defaults to 1.
    pub fn embedding(&self) -> Result<SimplexEmbedding, ProblemError> {
        let slack = self.slack.clone().unwrap_or_else(BigRational::one);
        Ok(derive_embedding(&self.set, &self.lower_bound()?, &self.m_bound()?, &slack)?)
    }

    /// Box layout when `U` is known, simplex layout otherwise.
    pub fn gvector(&self, emb: &SimplexEmbedding, m1: Option<usize>) -> Result<GVector, ProblemError> {
        match &self.upper {
            Some(u) => Ok(g_vector(&self.set, emb, u, m1.or(self.m1).unwrap_or(0))?),
            None => Ok(g_vector_simplex(&self.set, emb)),
        }
    }
}

fn rounded_normal(rng: &mut ChaCha8Rng) -> BigRational {
    let v: f64 = StandardNormal.sample(rng);
    BigRational::new(((v * 1e4).round() as i64).into(), 10_000.into())
}

/// Random sparse instance on n (even) variables:
///
/// - `h_i = a_i + b_i x_{2i-1} + c_i x_{2i}` for `i = 1..n/2`;
/// - `1 − x_2⁴ − x_4⁴ − … − x_n⁴`;
/// - `1 − x_1 − x_3 − … − x_{n−1}`;
/// - `x ≥ 0`;
/// - a dense objective with every monomial of degree ≤ `degree`.
///
/// All coefficients are standard normal draws from `ChaCha8Rng` seeded
/// with `seed`, rounded to 4 decimals, taken in this order: `(a_i, b_i,
/// c_i)` for each i (redrawn until `a_i > 0`, so 0 is feasible), then the
/// objective coefficients in graded-lex order (redrawn when zero). Bounds:
/// `L = 0`, `U = e`, `M = 1 + n/2`, `m1 = n/2`.
pub fn gen_instance(n: usize, seed: u64, degree: u32) -> Result<Problem, ProblemError> {
    if n < 4 || n % 2 == 1 {
        return Err(ProblemError::OddN(n));
    }
    if !(1..=4).contains(&degree) {
        return Err(ProblemError::Degree(degree));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constraints = Vec::with_capacity(n / 2 + 2);
    for i in 0..n / 2 {
        let (a, b, c) = loop {
            let t = (rounded_normal(&mut rng), rounded_normal(&mut rng), rounded_normal(&mut rng));
            if t.0 > BigRational::zero() {
                break t;
            }
        };
        let mut coef = vec![BigRational::zero(); n];
        coef[2 * i] = b;
        coef[2 * i + 1] = c;
        constraints.push(QPoly::affine(a, &coef));
    }
    let one = QPoly::one(n);
    let mut quartic = one.clone();
    let mut linear = one;
    for i in 0..n {
        if i % 2 == 1 {
            quartic = &quartic - &QPoly::var(n, i).pow(4);
        } else {
            linear = &linear - &QPoly::var(n, i);
        }
    }
    constraints.push(quartic);
    constraints.push(linear);
    let mut objective = QPoly::zero(n);
    for mono in monomials_up_to(n, degree) {
        let c = loop {
            let c = rounded_normal(&mut rng);
            if !c.is_zero() {
                break c;
            }
        };
        objective.add_term(mono, c);
    }
    let set = SemialgebraicSet::new(n, constraints, true)?;
    Ok(Problem {
        name: format!("{n}_{seed}"),
        seed: Some(seed),
        objective,
        set,
        lower: Some(vec![BigRational::zero(); n]),
        upper: Some(vec![BigRational::one(); n]),
        m: Some(BigRational::from_integer((1 + n as i64 / 2).into())),
        slack: None,
        m1: Some(n / 2),
    })
}
