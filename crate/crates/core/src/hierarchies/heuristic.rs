//! Falsification aids: strong-positivity sampling and copositivity spot
//! checks. A pass is never a proof.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use crate::poly::{q, q_to_f64, qi, QPoly};
use crate::semialg::{sample_feasible, tilde_set, SampleBox, SemialgebraicSet};

pub const HEURISTIC_LABEL: &str = "heuristic, not a proof";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub value: f64,
    /// Whether the point and value were evaluated in exact arithmetic.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongPositivityReport {
    pub label: String,
    pub directions_checked: usize,
    pub finite_checked: usize,
    /// Direction d ≠ 0 in S̃ with p̃(d) ≤ 0.
    pub direction_witness: Option<Witness>,
    /// Feasible x with p(x) ≤ 0 (only when the finite check is requested).
    pub finite_witness: Option<Witness>,
}

impl StrongPositivityReport {
    pub fn passed(&self) -> bool {
        self.direction_witness.is_none() && self.finite_witness.is_none()
    }
}

/// Structured integer directions: axes, then pairs with weights (1,1),
/// (1,2), (2,1), with signs when the set is not inside the orthant.
fn structured_directions(n: usize, nonneg: bool) -> Vec<Vec<BigRational>> {
    let signs: &[i64] = if nonneg { &[1] } else { &[1, -1] };
    let mut out = Vec::new();
    for i in 0..n {
        for &s in signs {
            let mut d = vec![qi(0); n];
            d[i] = qi(s);
            out.push(d);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for (a, b) in [(1, 1), (1, 2), (2, 1)] {
                for &si in signs {
                    for &sj in signs {
                        let mut d = vec![qi(0); n];
                        d[i] = qi(si * a);
                        d[j] = qi(sj * b);
                        out.push(d);
                    }
                }
            }
        }
    }
    out
}

/// Looks for directions of S̃ where the top component of p is not positive
/// (structured directions exactly, random unit directions in floats).
pub fn strong_positivity_heuristic(p: &QPoly, set: &SemialgebraicSet, samples: usize, seed: u64) -> StrongPositivityReport {
    strong_positivity_heuristic_with(p, set, samples, seed, None)
}

/// As [`strong_positivity_heuristic`], optionally also sampling `S ∩ box`
/// for points with `p ≤ 0`.
pub fn strong_positivity_heuristic_with(
    p: &QPoly,
    set: &SemialgebraicSet,
    samples: usize,
    seed: u64,
    finite_box: Option<&SampleBox>,
) -> StrongPositivityReport {
    let n = set.nvars;
    let pt = if p.is_zero() { QPoly::zero(n) } else { p.top_component().expect("nonzero") };
    let st = tilde_set(set);
    let mut report = StrongPositivityReport {
        label: HEURISTIC_LABEL.into(),
        directions_checked: 0,
        finite_checked: 0,
        direction_witness: None,
        finite_witness: None,
    };
    for d in structured_directions(n, set.explicit_nonneg) {
        if !st.contains(&d) {
            continue;
        }
        report.directions_checked += 1;
        let v = pt.evaluate(&d).expect("length");
        if !v.is_positive() {
            report.direction_witness =
                Some(Witness { point: d.iter().map(q_to_f64).collect(), value: q_to_f64(&v), exact: true });
            break;
        }
    }
    if report.direction_witness.is_none() {
        let ptf = pt.to_f64();
        let hs = st.constraints_f64();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let mut d: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if set.explicit_nonneg {
                d.iter_mut().for_each(|v| *v = v.abs());
            }
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            d.iter_mut().for_each(|v| *v /= norm);
            if !hs.iter().all(|h| h.evaluate(&d).unwrap() >= -1e-12) {
                continue;
            }
            report.directions_checked += 1;
            let v = ptf.evaluate(&d).unwrap();
            if v < -1e-9 {
                report.direction_witness = Some(Witness { point: d, value: v, exact: false });
                break;
            }
        }
    }
    if let Some(bx) = finite_box {
        let pf = p.to_f64();
        for x in sample_feasible(set, bx, samples, seed ^ 0x9e37_79b9) {
            report.finite_checked += 1;
            let v = pf.evaluate(&x).unwrap();
            if v <= 0.0 {
                report.finite_witness = Some(Witness { point: x, value: v, exact: false });
                break;
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpotCheckReport {
    pub evaluated: usize,
    /// A non-negative point with `F < 0`: a disproof of copositivity.
    pub witness: Option<Witness>,
}

/// Evaluates F on axes and coordinate pairs at several scales (exactly),
/// then on random sparse non-negative points.
pub fn spot_check_copositive(f: &QPoly, samples: usize, seed: u64) -> SpotCheckReport {
    let n = f.nvars();
    let mut evaluated = 0;
    let exact_hit = |x: Vec<BigRational>, evaluated: &mut usize| {
        *evaluated += 1;
        let v = f.evaluate(&x).expect("length");
        v.is_negative().then(|| Witness { point: x.iter().map(q_to_f64).collect(), value: q_to_f64(&v), exact: true })
    };
    if let Some(w) = exact_hit(vec![qi(0); n], &mut evaluated) {
        return SpotCheckReport { evaluated, witness: Some(w) };
    }
    let scales = [q(1, 2), qi(1), q(3, 2), qi(2), qi(3), qi(5), qi(10), qi(100)];
    for t in &scales {
        for i in 0..n {
            let mut x = vec![BigRational::zero(); n];
            x[i] = t.clone();
            if let Some(w) = exact_hit(x, &mut evaluated) {
                return SpotCheckReport { evaluated, witness: Some(w) };
            }
        }
    }
    for t in [qi(1), qi(2), qi(10)] {
        for s in [qi(1), qi(2), qi(10)] {
            for i in 0..n {
                for j in i + 1..n {
                    let mut x = vec![BigRational::zero(); n];
                    x[i] = t.clone();
                    x[j] = s.clone();
                    if let Some(w) = exact_hit(x, &mut evaluated) {
                        return SpotCheckReport { evaluated, witness: Some(w) };
                    }
                }
            }
        }
    }
    let ff = f.to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let scale = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
        let x: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { 0.0 } else { scale * rng.sample::<f64, _>(Exp1) })
            .collect();
        evaluated += 1;
        let v = ff.evaluate(&x).unwrap();
        if v < 0.0 {
            return SpotCheckReport { evaluated, witness: Some(Witness { point: x, value: v, exact: false }) };
        }
    }
    SpotCheckReport { evaluated, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> SemialgebraicSet {
        SemialgebraicSet::new(2, vec![], true).unwrap()
    }

    #[test]
    fn direction_witness_is_exact() {
        let (x1, x2) = (QPoly::var(2, 0), QPoly::var(2, 1));
        let p = &(&x1.pow(2) - &x2.pow(2)) + &QPoly::one(2);
        let rep = strong_positivity_heuristic(&p, &plane(), 100, 0);
        let w = rep.direction_witness.as_ref().unwrap();
        assert_eq!((w.point.clone(), w.value, w.exact), (vec![0.0, 1.0], -1.0, true));
        assert!(!rep.passed());
        assert_eq!(rep.label, HEURISTIC_LABEL);
    }

    #[test]
    fn positive_polynomial_passes() {
        let (x1, x2) = (QPoly::var(2, 0), QPoly::var(2, 1));
        let p = &(&x1.pow(2) + &x2.pow(2)) + &QPoly::one(2);
        let rep = strong_positivity_heuristic_with(&p, &plane(), 300, 1, Some(&SampleBox::uniform(2, 0.0, 3.0)));
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.directions_checked > 300 / 2 && rep.finite_checked > 0);
    }

    #[test]
    fn finite_witness_needs_the_box() {
        // x − 1/2 has positive top component but is negative near 0
        let x = QPoly::var(1, 0);
        let p = &x - &QPoly::constant(1, q(1, 2));
        let set = SemialgebraicSet::new(1, vec![], true).unwrap();
        assert!(strong_positivity_heuristic(&p, &set, 100, 0).passed());
        let rep = strong_positivity_heuristic_with(&p, &set, 100, 0, Some(&SampleBox::uniform(1, 0.0, 1.0)));
        assert!(rep.finite_witness.unwrap().value <= 0.0);
    }

    #[test]
    fn spot_check_order_and_negatives() {
        let (x1, x2) = (QPoly::var(2, 0), QPoly::var(2, 1));
        let f = &x2.pow(2) - &x1;
        let w = spot_check_copositive(&f, 10, 0).witness.unwrap();
        assert_eq!((w.point, w.value), (vec![0.5, 0.0], -0.5));
        assert!(spot_check_copositive(&(&x1 - &x2).pow(2), 200, 0).witness.is_none());
        let neg = spot_check_copositive(&QPoly::constant(2, qi(-1)), 10, 0);
        assert_eq!((neg.evaluated, neg.witness.unwrap().point), (1, vec![0.0, 0.0]));
    }
}
