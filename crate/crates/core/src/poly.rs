//! Sparse multivariate polynomials.
//!
//! One polynomial type serves two coefficient modes: exact [`BigRational`]
//! (used for certificates and verification) and `f64` (used when talking to
//! numerical solvers). Terms live in a `BTreeMap` keyed by [`Monomial`], whose
//! ordering is graded lexicographic, so iteration and serialization are
//! deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),
    #[error("expected {expected} substitution images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("point has length {got}, polynomial has {expected} variables")]
    PointLength { expected: usize, got: usize },
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Coefficient field. Implemented for `f64` and `BigRational`.
pub trait Scalar:
    Clone + fmt::Debug + PartialEq + PartialOrd + Send + Sync + Zero + One + Signed + 'static
{
    fn from_q(q: &BigRational) -> Self;
    fn from_i64(v: i64) -> Self;
    fn as_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_q(q: &BigRational) -> Self {
        q_to_f64(q)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_q(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn as_f64(&self) -> f64 {
        q_to_f64(self)
    }
}

pub fn q_to_f64(q: &BigRational) -> f64 {
    ToPrimitive::to_f64(q).unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exponent vector. Ordered by total degree, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Indices of variables with a positive exponent.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn eval<C: Scalar>(&self, x: &[C]) -> C {
        let mut acc = C::one();
        for (xi, &e) in x.iter().zip(&self.0) {
            for _ in 0..e {
                acc = acc * xi.clone();
            }
        }
        acc
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors in `nvars` variables with total degree at most `d`,
/// in graded-lex order.
pub fn monomials_up_to(nvars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for k in 0..=d {
        out.extend(monomials_of_degree(nvars, k));
    }
    out
}

/// Exponent vectors of total degree exactly `d`, lexicographically ascending.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Monomial(vec![]));
        }
        return out;
    }
    let mut cur = vec![0u32; nvars];
    fill(&mut cur, 0, d, &mut out);
    out
}

fn fill(cur: &mut Vec<u32>, i: usize, rem: u32, out: &mut Vec<Monomial>) {
    let n = cur.len();
    if i == n - 1 {
        cur[i] = rem;
        out.push(Monomial(cur.clone()));
        return;
    }
    for e in 0..=rem {
        cur[i] = e;
        fill(cur, i + 1, rem - e, out);
    }
    cur[i] = 0;
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// C_{d,α} = d! / ((d − |α|)! α_1! ⋯ α_n!).
pub fn multinomial_coefficient(d: u32, alpha: &Monomial) -> BigInt {
    let s = alpha.degree();
    assert!(s <= d, "monomial degree exceeds d");
    let mut den = factorial((d - s) as u64);
    for &a in alpha.exps() {
        den *= factorial(a as u64);
    }
    factorial(d as u64) / den
}

#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial<C> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
    degree: u32,
}

pub type QPoly = Polynomial<BigRational>;
pub type FPoly = Polynomial<f64>;

impl<C: Scalar> Polynomial<C> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
            degree: 0,
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(nvars, Monomial::one(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(nvars, Monomial::var(nvars, i), C::one())
    }

    pub fn monomial(nvars: usize, m: Monomial, c: C) -> Self {
        assert_eq!(m.nvars(), nvars);
        let mut p = Self::zero(nvars);
        p.add_term(m, c);
        p
    }

    /// Builds a polynomial from (exponents, coefficient) pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    /// Affine polynomial `c0 + Σ a_i x_i`.
    pub fn affine(c0: C, a: &[C]) -> Self {
        let n = a.len();
        let mut p = Self::constant(n, c0);
        for (i, ai) in a.iter().enumerate() {
            p.add_term(Monomial::var(n, i), ai.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one(self.nvars))
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(m.nvars(), self.nvars);
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                    self.refresh_degree();
                } else {
                    *v = s;
                }
            }
            None => {
                self.degree = self.degree.max(m.degree());
                self.terms.insert(m, c);
            }
        }
    }

    fn refresh_degree(&mut self) {
        self.degree = self.terms.keys().next_back().map_or(0, |m| m.degree());
    }

    fn check(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::NvarsMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca.clone() * cb.clone();
                match acc.get_mut(&m) {
                    Some(v) => *v = v.clone() + c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        let mut out = Polynomial {
            nvars: self.nvars,
            terms: acc,
            degree: 0,
        };
        out.refresh_degree();
        Ok(out)
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: &C) {
        assert_eq!(self.nvars, other.nvars);
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v.clone() * c.clone());
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.clone() * c.clone();
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn evaluate(&self, x: &[C]) -> Result<C, PolyError> {
        if x.len() != self.nvars {
            return Err(PolyError::PointLength {
                expected: self.nvars,
                got: x.len(),
            });
        }
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            acc = acc + c.clone() * m.eval(x);
        }
        Ok(acc)
    }

    /// `p(images_1(x), …, images_k(x))`.
    pub fn substitute(&self, images: &[Self]) -> Result<Self, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::ImageCount {
                expected: self.nvars,
                got: images.len(),
            });
        }
        let target = match images.first() {
            Some(p) => p.nvars,
            None => 0,
        };
        for im in images {
            if im.nvars != target {
                return Err(PolyError::NvarsMismatch(target, im.nvars));
            }
        }
        let mut powers = PowerCache::new(images);
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = &t * powers.get(i, e);
                }
            }
            out.add_scaled(&t, &C::one());
        }
        Ok(out)
    }

    /// p^h(x0, x) = x0^{deg p} p(x / x0), with x0 at index 0.
    pub fn homogenize(&self) -> Self {
        let d = self.degree;
        let mut out = Self::zero(self.nvars + 1);
        for (m, c) in &self.terms {
            let mut e = Vec::with_capacity(self.nvars + 1);
            e.push(d - m.degree());
            e.extend_from_slice(m.exps());
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Homogenization to a prescribed degree `d ≥ deg p`.
    pub fn homogenize_to(&self, d: u32) -> Self {
        assert!(d >= self.degree);
        let mut out = Self::zero(self.nvars + 1);
        for (m, c) in &self.terms {
            let mut e = Vec::with_capacity(self.nvars + 1);
            e.push(d - m.degree());
            e.extend_from_slice(m.exps());
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// The terms of maximal total degree.
    pub fn top_component(&self) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let d = self.degree;
        let mut out = Self::zero(self.nvars);
        for (m, c) in self.terms.range(first_of_degree(self.nvars, d)..) {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree;
        self.terms.keys().all(|m| m.degree() == d)
    }

    /// max_α |p_α| / C_{d,α} with d = deg p.
    pub fn multinomial_norm(&self) -> C {
        let d = self.degree;
        let mut best = C::zero();
        for (m, c) in &self.terms {
            let cda = BigRational::from_integer(multinomial_coefficient(d, m));
            let v = c.abs() / C::from_q(&cda);
            if v > best {
                best = v;
            }
        }
        best
    }

    /// Relabels variables into a space of `nvars` variables: variable `i`
    /// becomes `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars);
        let mut out = Self::zero(nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; nvars];
            for (i, &k) in m.exps().iter().enumerate() {
                e[map[i]] += k;
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Variables with a nonzero exponent in some term.
    pub fn support(&self) -> Vec<usize> {
        let mut used = vec![false; self.nvars];
        for m in self.terms.keys() {
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
        (0..self.nvars).filter(|&i| used[i]).collect()
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn to_f64(&self) -> FPoly {
        self.map_coeffs(|c| c.as_f64())
    }

    pub fn max_abs_coeff(&self) -> C {
        let mut best = C::zero();
        for c in self.terms.values() {
            let a = c.abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    /// Sum of the variables, `e⊤x`.
    pub fn sum_of_vars(nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        for i in 0..nvars {
            p.add_term(Monomial::var(nvars, i), C::one());
        }
        p
    }
}

fn first_of_degree(nvars: usize, d: u32) -> Monomial {
    let mut e = vec![0u32; nvars];
    if nvars > 0 {
        e[nvars - 1] = d;
    }
    Monomial(e)
}

/// Memoized powers of substitution images.
pub struct PowerCache<'a, C> {
    base: &'a [Polynomial<C>],
    cache: Vec<Vec<Polynomial<C>>>,
}

impl<'a, C: Scalar> PowerCache<'a, C> {
    pub fn new(base: &'a [Polynomial<C>]) -> Self {
        PowerCache {
            base,
            cache: vec![Vec::new(); base.len()],
        }
    }

    pub fn get(&mut self, i: usize, e: u32) -> &Polynomial<C> {
        let v = &mut self.cache[i];
        if v.is_empty() {
            let n = self.base[i].nvars;
            v.push(Polynomial::one(n));
        }
        while v.len() <= e as usize {
            let next = v.last().unwrap() * &self.base[i];
            v.push(next);
        }
        &v[e as usize]
    }
}

impl QPoly {
    /// Exact rational image of a float polynomial (binary values kept).
    pub fn from_f64_exact(p: &FPoly) -> QPoly {
        p.map_coeffs(|c| BigRational::from_float(*c).expect("finite coefficient"))
    }

    /// Continued-fraction rounding of every coefficient.
    pub fn from_f64_rounded(p: &FPoly, max_den: u64) -> QPoly {
        p.map_coeffs(|c| round_to_rational(*c, max_den))
    }

    /// Canonical text form: one term per line, `num/den e1 … en`, graded-lex.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.terms {
            s.push_str(&format_rational(c));
            for e in m.exps() {
                s.push(' ');
                s.push_str(&e.to_string());
            }
            s.push('\n');
        }
        s
    }

    pub fn to_lines(&self) -> Vec<String> {
        self.to_text().lines().map(str::to_owned).collect()
    }

    pub fn parse_text(nvars: usize, text: &str) -> Result<QPoly, PolyError> {
        Self::parse_lines(nvars, text.lines())
    }

    pub fn parse_lines<'a, I>(nvars: usize, lines: I) -> Result<QPoly, PolyError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut p = QPoly::zero(nvars);
        for line in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let c = parse_rational(it.next().unwrap())?;
            let e: Vec<u32> = it
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| PolyError::Parse(format!("bad exponent `{t}`")))
                })
                .collect::<Result<_, _>>()?;
            if e.len() != nvars {
                return Err(PolyError::Parse(format!(
                    "term `{line}` has {} exponents, expected {nvars}",
                    e.len()
                )));
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }
}

impl FPoly {
    /// Drops coefficients with magnitude at most `tol`.
    pub fn pruned(&self, tol: f64) -> FPoly {
        let mut out = FPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            if c.abs() > tol {
                out.add_term(m.clone(), *c);
            }
        }
        out
    }
}

pub fn format_rational(c: &BigRational) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

/// Parses `a/b`, an integer, or a decimal such as `-1.25e-3`, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, PolyError> {
    let bad = || PolyError::Parse(format!("bad number `{s}`"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|ch| ch.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// via continued fractions (with the final semiconvergent check).
pub fn round_to_rational(x: f64, max_den: u64) -> BigRational {
    assert!(x.is_finite(), "cannot round a non-finite value");
    let exact = BigRational::from_float(x).unwrap();
    if exact.denom() <= &BigInt::from(max_den) {
        return exact;
    }
    let max_den = BigInt::from(max_den.max(1));
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut r = exact.clone();
    loop {
        let a = r.floor().to_integer();
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            let k = (&max_den - &q0) / &q1;
            let cand_a = BigRational::new(&p0 + &k * &p1, &q0 + &k * &q1);
            let cand_b = BigRational::new(p1.clone(), q1.clone());
            let da = (&cand_a - &exact).abs();
            let db = (&cand_b - &exact).abs();
            return if da < db { cand_a } else { cand_b };
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &r - BigRational::from_integer(a);
        if frac.is_zero() {
            return BigRational::new(p1, q1);
        }
        r = frac.recip();
    }
}

pub fn gcd_denominator_lcm(qs: &[BigRational]) -> BigInt {
    qs.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

impl<C: Scalar> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        self.try_add(rhs).expect("polynomial add")
    }
}

impl<C: Scalar> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        self.try_sub(rhs).expect("polynomial sub")
    }
}

impl<C: Scalar> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        self.try_mul(rhs).expect("polynomial mul")
    }
}

impl<C: Scalar> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.scale(&-C::one())
    }
}

impl<C: Scalar> Add for Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        &self + &rhs
    }
}

impl<C: Scalar> Sub for Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        &self - &rhs
    }
}

impl<C: Scalar> Mul for Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        &self * &rhs
    }
}

impl<C: Scalar> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        -&self
    }
}

impl<C: Scalar + fmt::Display> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}
