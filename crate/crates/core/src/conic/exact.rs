//! Exact sparse Gaussian elimination over the rationals.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

type Row = BTreeMap<usize, BigRational>;

/// Solves `A x = b` exactly, returning one solution (non-pivot unknowns set to
/// zero) or `None` if the system is inconsistent. Rows are `(column, value)`.
pub fn solve_rational_system(
    rows: &[Vec<(usize, BigRational)>],
    rhs: &[BigRational],
    ncols: usize,
) -> Option<Vec<BigRational>> {
    assert_eq!(rows.len(), rhs.len());
    // pivot column -> (reduced row with unit pivot, rhs)
    let mut pivots: BTreeMap<usize, (Row, BigRational)> = BTreeMap::new();
    for (row, b) in rows.iter().zip(rhs) {
        let mut r: Row = BTreeMap::new();
        for (j, v) in row {
            assert!(*j < ncols);
            if !v.is_zero() {
                let e = r.entry(*j).or_insert_with(BigRational::zero);
                *e += v;
            }
        }
        r.retain(|_, v| !v.is_zero());
        let mut b = b.clone();
        let cols: Vec<usize> = r.keys().cloned().collect();
        for j in cols {
            let Some(f) = r.get(&j).cloned() else { continue };
            if let Some((prow, pb)) = pivots.get(&j) {
                for (k, v) in prow {
                    let e = r.entry(*k).or_insert_with(BigRational::zero);
                    *e -= &f * v;
                }
                b -= &f * pb;
                r.retain(|_, v| !v.is_zero());
            }
        }
        let Some((&pc, pv)) = r.iter().next() else {
            if b.is_zero() {
                continue;
            }
            return None;
        };
        let pv = pv.clone();
        for v in r.values_mut() {
            *v /= &pv;
        }
        b /= &pv;
        // keep existing pivot rows reduced with respect to the new pivot
        for (prow, pb) in pivots.values_mut() {
            if let Some(f) = prow.get(&pc).cloned() {
                for (k, v) in &r {
                    let e = prow.entry(*k).or_insert_with(BigRational::zero);
                    *e -= &f * v;
                }
                *pb -= &f * &b;
                prow.retain(|_, v| !v.is_zero());
            }
        }
        pivots.insert(pc, (r, b));
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (c, (_, b)) in pivots {
        x[c] = b;
    }
    Some(x)
}
