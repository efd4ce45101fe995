//! Minimal exact Gaussian elimination used by the isotropy resolution.

use crate::coeff::FieldCoeff;

/// Solves `A x = b` over an exact field, returning one particular solution
/// (free variables set to zero) or `None` when the system is inconsistent.
/// `rows` is the matrix by rows; all rows must have equal length.
pub(crate) fn solve<C: FieldCoeff>(mut rows: Vec<Vec<C>>, mut b: Vec<C>) -> Option<Vec<C>> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut rank = 0usize;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        b.swap(rank, p);
        let inv = rows[rank][col].inv().expect("pivot nonzero");
        for v in rows[rank].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        b[rank] = b[rank].clone() * inv;
        let pivot_row = rows[rank].clone();
        for r in 0..m {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for (v, p) in rows[r].iter_mut().zip(pivot_row.iter()) {
                    *v = v.clone() - factor.clone() * p.clone();
                }
                let delta = factor * b[rank].clone();
                b[r] = b[r].clone() - delta;
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    // inconsistent when a zero row meets a nonzero rhs
    if b[rank..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![C::zero(); n];
    for (col, p) in pivot_of_col.iter().enumerate() {
        if let Some(r) = p {
            x[col] = b[*r].clone();
        }
    }
    Some(x)
}
