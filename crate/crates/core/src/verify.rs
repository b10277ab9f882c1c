//! Exact verification of certificates.
//!
//! Identities are re-expanded in rational arithmetic. Multipliers are
//! checked exactly where possible (coefficient signs, LDL with rational
//! pivots, Sturm sequences); Gram blocks that fail the exact test may still
//! pass against a float eigenvalue tolerance, which downgrades the verdict.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;

use crate::certificate::{Certificate, PutinarCertificate, SosBlock, SparseSOSCertificate};
use crate::poly::{format_rational, q_to_f64, Monomial, QPoly};
use crate::polya::{lp_certificate_search, LPCertificate, LpOutcome, LpSearchOptions};
use crate::problem::{Problem, ProblemError};
use crate::semialg::{simplex_entry, u_tilde, GTag, SemialgebraicSet, SimplexEmbedding};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ExactPass,
    TolerancePass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ExactPass => "exact-pass",
            Verdict::TolerancePass => "tolerance-pass",
            Verdict::Fail => "fail",
        }
    }

    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::TolerancePass, _) | (_, Verdict::TolerancePass) => Verdict::TolerancePass,
            _ => Verdict::ExactPass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Residual ∞-norm allowed relative to `1 + ‖p‖∞`.
    pub residual: f64,
    /// Smallest Gram eigenvalue allowed relative to `max(1, max |G|)`.
    pub eigenvalue: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-6, eigenvalue: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissibility {
    pub name: String,
    pub verdict: Verdict,
    pub reason: String,
}

impl Admissibility {
    fn new(name: impl Into<String>, verdict: Verdict, reason: impl Into<String>) -> Self {
        Admissibility { name: name.into(), verdict, reason: reason.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// `p − λ − (certificate expansion)`.
    pub identity_residual: QPoly,
    pub admissibility: Vec<Admissibility>,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
}

impl VerificationReport {
    fn finish(residual: QPoly, admissibility: Vec<Admissibility>, p: &QPoly, tol: Tolerances) -> Self {
        let mut verdict = if residual.is_zero() {
            Verdict::ExactPass
        } else if q_to_f64(&residual.max_abs_coeff()) <= tol.residual * (1.0 + q_to_f64(&p.max_abs_coeff())) {
            Verdict::TolerancePass
        } else {
            Verdict::Fail
        };
        for a in &admissibility {
            verdict = verdict.and(a.verdict);
        }
        VerificationReport { identity_residual: residual, admissibility, verdict, tolerances: tol }
    }

    fn failed(reason: String, p: &QPoly) -> Self {
        VerificationReport {
            identity_residual: QPoly::zero(p.nvars()),
            admissibility: vec![Admissibility::new("format", Verdict::Fail, reason)],
            verdict: Verdict::Fail,
            tolerances: Tolerances::default(),
        }
    }

    /// The residual term of largest magnitude.
    pub fn offending_monomial(&self) -> Option<(Monomial, BigRational)> {
        self.identity_residual
            .terms()
            .max_by(|a, b| a.1.abs().cmp(&b.1.abs()))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let offending = self.offending_monomial().map(|(m, c)| json!({"monomial": m.0, "coeff": format_rational(&c)}));
        json!({
            "verdict": self.verdict.as_str(),
            "identity_residual": self.identity_residual.to_lines(),
            "residual_terms": self.identity_residual.len(),
            "offending": offending,
            "admissibility": self.admissibility,
            "tolerances": self.tolerances,
        })
    }
}

/// Verifies any certificate against a problem. The problem's bounds `L`,
/// `M` and `U` are taken as hypotheses.
pub fn verify_for_problem(cert: &Certificate, prob: &Problem) -> Result<VerificationReport, ProblemError> {
    let p = &prob.objective;
    Ok(match cert {
        Certificate::Lp(c) => verify_lp_certificate(c, p, &prob.set, &prob.embedding()?),
        Certificate::Sparse(c) => verify_sparse_certificate(c, p, &prob.set, &prob.embedding()?, prob.upper.as_deref()),
        Certificate::Putinar(c) => verify_putinar_certificate(c, p, &prob.set),
    })
}

/// Checks `p − λ = Σ c (x − L)^α h^β (M − e⊤x)^γ` with all `c ≥ 0`, for the
/// embedding `emb` of the problem (the certificate's own bounds must match).
pub fn verify_lp_certificate(
    cert: &LPCertificate,
    p: &QPoly,
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
) -> VerificationReport {
    let n = set.nvars;
    if p.nvars() != n || cert.lower.len() != n {
        return VerificationReport::failed("variable count mismatch".into(), p);
    }
    let k = n + set.m() + 1;
    if let Some(t) = cert.terms.iter().find(|t| t.alpha.len() + t.beta.len() + 1 != k || t.alpha.len() != n) {
        return VerificationReport::failed(format!("term with {} + {} exponents", t.alpha.len(), t.beta.len()), p);
    }
    let mut adm = Vec::new();
    if cert.lower == emb.lower && cert.m == emb.m {
        adm.push(Admissibility::new("embedding", Verdict::ExactPass, "L and M match the problem"));
    } else {
        adm.push(Admissibility::new("embedding", Verdict::Fail, "certificate L or M differ from the problem"));
    }
    match cert.terms.iter().position(|t| t.c.is_negative()) {
        None => adm.push(Admissibility::new("coefficients", Verdict::ExactPass, "all c >= 0")),
        Some(i) => adm.push(Admissibility::new(
            "coefficients",
            Verdict::Fail,
            format!("term {i} has c = {}", format_rational(&cert.terms[i].c)),
        )),
    }
    let target = p - &QPoly::constant(n, cert.lambda.clone());
    let residual = &target - &cert.expand(set);
    VerificationReport::finish(residual, adm, p, Tolerances::default())
}

/// Checks a sparse SOS certificate against the problem's embedding bounds
/// `emb.lower`, `emb.m` and, for `Upper` entries, the box bounds `upper`.
pub fn verify_sparse_certificate(
    cert: &SparseSOSCertificate,
    p: &QPoly,
    set: &SemialgebraicSet,
    emb: &SimplexEmbedding,
    upper: Option<&[BigRational]>,
) -> VerificationReport {
    let n = set.nvars;
    let tol = Tolerances::default();
    if p.nvars() != n || cert.nvars != n {
        return VerificationReport::failed("variable count mismatch".into(), p);
    }
    let g = match cert.gvector() {
        Ok(g) => g,
        Err(e) => return VerificationReport::failed(e.to_string(), p),
    };
    let rhs = match cert.expand() {
        Ok(r) => r,
        Err(e) => return VerificationReport::failed(e.to_string(), p),
    };
    let mut adm = Vec::new();
    let ce = &cert.embedding;
    let utilde: Vec<BigRational> = set.constraints.iter().map(|h| u_tilde(h, &emb.lower, &emb.m)).collect();
    let bound = utilde.iter().fold(emb.m.clone(), |a, b| a + b);
    let emb_ok = ce.lower == emb.lower && ce.m == emb.m && ce.u_tilde == utilde && ce.m_hat >= bound;
    adm.push(Admissibility::new(
        "embedding",
        if emb_ok { Verdict::ExactPass } else { Verdict::Fail },
        if emb_ok { "L, M, U~ match the problem and M^ >= M + sum U~" } else { "embedding does not match the problem" },
    ));

    for (i, (entry, tag)) in g.entries.iter().zip(&g.tags).enumerate() {
        let name = format!("g[{i}]");
        let expected = match *tag {
            GTag::Lower(k) if k < n => Some(&QPoly::var(n, k) - &QPoly::constant(n, ce.lower[k].clone())),
            GTag::Upper(k) if k < n => upper
                .filter(|u| u.len() == n)
                .map(|u| &QPoly::constant(n, u[k].clone()) - &QPoly::var(n, k)),
            GTag::Constraint(j) if j < set.m() => Some(set.constraints[j].clone()),
            GTag::Complement(j) if j < set.m() => {
                Some(&QPoly::constant(n, utilde[j].clone()) - &set.constraints[j])
            }
            GTag::Simplex => {
                let e = SimplexEmbedding { m_hat: ce.m_hat.clone(), ..emb.clone() };
                Some(simplex_entry(set, &e))
            }
            GTag::Custom => {
                adm.push(nonneg_on_set(&name, entry, set, emb));
                continue;
            }
            _ => None,
        };
        adm.push(match expected {
            Some(e) if &e == entry => Admissibility::new(name, Verdict::ExactPass, format!("structural {tag:?}")),
            Some(_) => Admissibility::new(name, Verdict::Fail, format!("entry differs from structural {tag:?}")),
            None => Admissibility::new(name, Verdict::Fail, format!("tag {tag:?} cannot be re-derived")),
        });
    }

    if cert.sigma1.is_some() {
        if cert.radius.is_negative() {
            adm.push(Admissibility::new("radius", Verdict::Fail, "negative radius"));
        } else {
            let mut slack = QPoly::constant(n, cert.radius.clone());
            for e in &g.entries {
                slack = &slack - e;
            }
            adm.push(nonneg_on_set("radius", &slack, set, emb));
        }
    }

    for (name, block) in cert.blocks() {
        let mut a = check_gram(&name, block, tol);
        if a.verdict != Verdict::ExactPass && name.starts_with("rho") && block.basis.iter().all(|m| m.nvars() == 1) {
            // ρ only needs to be non-negative on the range of g_i ⊆ [0, ∞)
            let (ok, _) = univariate_nonneg_exact(&block.to_poly(1), Domain::HalfLine);
            if ok {
                a = Admissibility::new(name, Verdict::ExactPass, "univariate, non-negative on t >= 0 (Sturm)");
            }
        }
        adm.push(a);
    }

    let target = p - &QPoly::constant(n, cert.lambda.clone());
    VerificationReport::finish(&target - &rhs, adm, p, tol)
}

/// Checks `p − λ = Σ σ_j u_j` with `u_j` among `1`, the constraints and
/// (for sets inside the orthant) the coordinates.
pub fn verify_putinar_certificate(cert: &PutinarCertificate, p: &QPoly, set: &SemialgebraicSet) -> VerificationReport {
    let n = set.nvars;
    let tol = Tolerances::default();
    if p.nvars() != n || cert.nvars != n {
        return VerificationReport::failed("variable count mismatch".into(), p);
    }
    let us = match cert.multiplier_polys() {
        Ok(u) => u,
        Err(e) => return VerificationReport::failed(e.to_string(), p),
    };
    let rhs = match cert.expand() {
        Ok(r) => r,
        Err(e) => return VerificationReport::failed(e.to_string(), p),
    };
    let mut allowed = vec![QPoly::one(n)];
    allowed.extend(set.with_nonneg_constraints());
    let mut adm = Vec::new();
    for (j, (u, s)) in us.iter().zip(&cert.sigmas).enumerate() {
        if allowed.contains(u) {
            adm.push(Admissibility::new(format!("u[{j}]"), Verdict::ExactPass, "multiplier of the set"));
        } else {
            adm.push(Admissibility::new(format!("u[{j}]"), Verdict::Fail, "multiplier is not 1, a constraint or a coordinate"));
        }
        adm.push(check_gram(&format!("sigma[{j}]"), s, tol));
    }
    let target = p - &QPoly::constant(n, cert.lambda.clone());
    VerificationReport::finish(&target - &rhs, adm, p, tol)
}

/// Admits `f ≥ 0` on S through an exact LP certificate of low rank.
fn nonneg_on_set(name: &str, f: &QPoly, set: &SemialgebraicSet, emb: &SimplexEmbedding) -> Admissibility {
    if f.degree() == 0 {
        let c = f.constant_term();
        return if c.is_negative() {
            Admissibility::new(name, Verdict::Fail, format!("constant {} < 0", format_rational(&c)))
        } else {
            Admissibility::new(name, Verdict::ExactPass, "non-negative constant")
        };
    }
    let opts = LpSearchOptions::default();
    for r in f.degree()..=f.degree() + 2 {
        if let Ok(LpOutcome::Certificate(c)) = lp_certificate_search(f, set, emb, r, &opts) {
            if c.exact && verify_lp_certificate(&c, f, set, emb).verdict == Verdict::ExactPass {
                return Admissibility::new(name, Verdict::ExactPass, format!("exact LP certificate at rank {r}"));
            }
        }
    }
    Admissibility::new(name, Verdict::Fail, "no exact non-negativity certificate on S found")
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsdCheck {
    Psd,
    /// A negative pivot at this index, or a zero pivot with a non-zero
    /// entry in its row.
    NotPsd { index: usize, pivot: BigRational },
}

/// Exact positive semidefiniteness by symmetric elimination with rational
/// pivots.
pub fn psd_exact(gram: &[Vec<BigRational>]) -> PsdCheck {
    let s = gram.len();
    let mut a: Vec<Vec<BigRational>> = gram.to_vec();
    for k in 0..s {
        let piv = a[k][k].clone();
        if piv.is_negative() {
            return PsdCheck::NotPsd { index: k, pivot: piv };
        }
        if piv.is_zero() {
            if (k + 1..s).any(|j| !a[k][j].is_zero()) {
                return PsdCheck::NotPsd { index: k, pivot: piv };
            }
            continue;
        }
        for i in k + 1..s {
            if a[k][i].is_zero() {
                continue;
            }
            let f = &a[k][i] / &piv;
            for j in i..s {
                let d = &f * &a[k][j];
                a[i][j] -= &d;
                if j != i {
                    a[j][i] = a[i][j].clone();
                }
            }
        }
    }
    PsdCheck::Psd
}

pub fn min_eigenvalue(gram: &[Vec<f64>]) -> f64 {
    let s = gram.len();
    if s == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(s, s, |i, j| gram[i][j]);
    SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn check_gram(name: &str, block: &SosBlock, tol: Tolerances) -> Admissibility {
    if !block.is_symmetric() {
        return Admissibility::new(name, Verdict::Fail, "Gram matrix is not square and symmetric");
    }
    match psd_exact(&block.gram) {
        PsdCheck::Psd => Admissibility::new(name, Verdict::ExactPass, "PSD (exact LDL)"),
        PsdCheck::NotPsd { index, pivot } => {
            let f = block.to_f64();
            let scale = f.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
            let ev = min_eigenvalue(&f);
            let verdict = if ev >= -tol.eigenvalue * scale { Verdict::TolerancePass } else { Verdict::Fail };
            Admissibility::new(
                name,
                verdict,
                format!("LDL pivot {} at {index}; min eigenvalue {ev:.3e}", format_rational(&pivot)),
            )
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    AllReals,
    /// `t ≥ 0`.
    HalfLine,
}

/// Dense univariate polynomial, coefficients from low to high degree.
type UPoly = Vec<BigRational>;

fn trim(mut a: UPoly) -> UPoly {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
    a
}

fn deriv(a: &[BigRational]) -> UPoly {
    trim(a.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect())
}

fn sub(a: &[BigRational], b: &[BigRational]) -> UPoly {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    trim(out)
}

fn mul(a: &[BigRational], b: &[BigRational]) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn divrem(a: &[BigRational], b: &[BigRational]) -> (UPoly, UPoly) {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let lb = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut qt = vec![BigRational::zero(); r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - b.len();
        let c = r.last().unwrap() / &lb;
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= &c * bc;
        }
        qt[k] = c;
        r.pop();
        r = trim(r);
    }
    (trim(qt), r)
}

fn monic(a: UPoly) -> UPoly {
    match a.last().cloned() {
        Some(l) => a.into_iter().map(|c| c / &l).collect(),
        None => a,
    }
}

fn gcd(a: &[BigRational], b: &[BigRational]) -> UPoly {
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let (_, r) = divrem(&x, &y);
        x = y;
        y = r;
    }
    monic(x)
}

fn exact_div(a: &[BigRational], b: &[BigRational]) -> UPoly {
    divrem(a, b).0
}

/// Yun's square-free decomposition: `f = lc · Π a_i^i` with monic,
/// square-free, pairwise coprime `a_i`.
fn square_free(f: &[BigRational]) -> Vec<(u32, UPoly)> {
    let f = monic(trim(f.to_vec()));
    if f.len() <= 1 {
        return Vec::new();
    }
    let fp = deriv(&f);
    let a0 = gcd(&f, &fp);
    let mut b = exact_div(&f, &a0);
    let c = exact_div(&fp, &a0);
    let mut d = sub(&c, &deriv(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while b.len() > 1 {
        let a = gcd(&b, &d);
        let nb = exact_div(&b, &a);
        let nc = exact_div(&d, &a);
        d = sub(&nc, &deriv(&nb));
        b = nb;
        if a.len() > 1 {
            out.push((i, a));
        }
        i += 1;
    }
    out
}

fn eval(a: &[BigRational], t: &BigRational) -> BigRational {
    a.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + c)
}

fn sturm_chain(f: &[BigRational]) -> Vec<UPoly> {
    let mut chain = vec![f.to_vec(), deriv(f)];
    loop {
        let k = chain.len();
        if chain[k - 1].is_empty() {
            chain.pop();
            break;
        }
        let (_, r) = divrem(&chain[k - 2], &chain[k - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn variations(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut v = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

fn sign(c: &BigRational) -> i32 {
    if c.is_positive() {
        1
    } else if c.is_negative() {
        -1
    } else {
        0
    }
}

fn var_at(chain: &[UPoly], t: &BigRational) -> usize {
    variations(chain.iter().map(|p| sign(&eval(p, t))))
}

fn var_at_inf(chain: &[UPoly], positive: bool) -> usize {
    variations(chain.iter().map(|p| {
        let s = sign(p.last().unwrap());
        if positive || (p.len() - 1) % 2 == 0 {
            s
        } else {
            -s
        }
    }))
}

/// Distinct real roots of a square-free `f` in `(lo, ∞)` (or all of R).
fn count_roots(chain: &[UPoly], lo: Option<&BigRational>) -> usize {
    let left = match lo {
        Some(t) => var_at(chain, t),
        None => var_at_inf(chain, false),
    };
    left - var_at_inf(chain, true)
}

/// Decides `rho ≥ 0` on the domain exactly, with a rational point where it
/// is negative when it is not.
pub fn univariate_nonneg_exact(rho: &QPoly, domain: Domain) -> (bool, Option<BigRational>) {
    if rho.is_zero() {
        return (true, None);
    }
    assert_eq!(rho.nvars(), 1, "univariate polynomial expected");
    let mut f = vec![BigRational::zero(); rho.degree() as usize + 1];
    for (m, c) in rho.terms() {
        f[m.0[0] as usize] = c.clone();
    }
    let f = trim(f);
    let lc = f.last().unwrap().clone();
    // the odd-multiplicity part carries every sign change
    let mut odd: UPoly = vec![lc.clone()];
    for (i, a) in square_free(&f) {
        if i % 2 == 1 {
            odd = mul(&odd, &a);
        }
    }
    let zero = BigRational::zero();
    let ok = if odd.len() == 1 {
        lc.is_positive()
    } else {
        let mut core = odd.clone();
        if domain == Domain::HalfLine && core[0].is_zero() {
            core.remove(0);
        }
        let chain = sturm_chain(&core);
        let lo = (domain == Domain::HalfLine).then_some(&zero);
        let roots = if core.len() == 1 { 0 } else { count_roots(&chain, lo) };
        roots == 0 && lc.is_positive()
    };
    if ok {
        return (true, None);
    }
    (false, negative_point(&f, &odd, domain))
}

/// A rational t in the domain with f(t) < 0, found by isolating the roots
/// of the odd-multiplicity part (f changes sign across each of them).
fn negative_point(f: &[BigRational], odd: &[BigRational], domain: Domain) -> Option<BigRational> {
    let two = BigRational::from_integer(2.into());
    let mut core = odd.to_vec();
    if domain == Domain::HalfLine && core[0].is_zero() {
        core.remove(0);
    }
    let lc = core.last().unwrap().abs();
    let bound = core[..core.len() - 1].iter().fold(BigRational::zero(), |a, c| a.max(c.abs() / &lc)) + BigRational::one();
    let lo = match domain {
        Domain::AllReals => -bound.clone(),
        Domain::HalfLine => BigRational::zero(),
    };
    let neg = |t: &BigRational| eval(f, t).is_negative();
    // without roots in the domain the sign is constant there: probe
    if let Some(t) = [lo.clone(), bound.clone()]
        .into_iter()
        .chain((1..=64i64).map(|k| &lo + BigRational::from_integer(k.into())))
        .find(|t| neg(t))
    {
        return Some(t);
    }
    if core.len() == 1 {
        return None;
    }
    let chain = sturm_chain(&core);
    let roots_in = |a: &BigRational, b: &BigRational| var_at(&chain, a) - var_at(&chain, b);
    let mut stack = vec![(lo, bound)];
    while let Some((mut a, mut b)) = stack.pop() {
        match roots_in(&a, &b) {
            0 => continue,
            1 => {
                for _ in 0..256 {
                    if neg(&a) {
                        return Some(a);
                    }
                    if neg(&b) {
                        return Some(b);
                    }
                    let mut m = (&a + &b) / &two;
                    while eval(&core, &m).is_zero() {
                        m = (&m + &b) / &two;
                    }
                    if roots_in(&a, &m) == 1 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
            }
            _ => {
                let mut m = (&a + &b) / &two;
                while eval(&core, &m).is_zero() {
                    m = (&m + &b) / &two;
                }
                stack.push((m.clone(), b));
                stack.push((a, m));
            }
        }
    }
    None
}
