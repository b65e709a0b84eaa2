//! Polyhedral seminorms and exact extremal problems over their unit balls.
//!
//! Every seminorm level in this crate can be written as
//! `max_g combine_g(|⟨f, x⟩| : f ∈ rows_g)` where `combine_g` is a sum or a
//! max. The unit ball is then a polyhedron, so suprema of linear functionals
//! and of other polyhedral seminorms over it are linear programs. They are
//! solved here with a dense simplex method using Bland's rule, which is exact
//! over the rationals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// Largest group for which sign patterns are enumerated when a target
/// seminorm is of sum type.
pub const MAX_SIGN_ENUMERATION_ROWS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    Sum,
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FormGroup<S: Scalar> {
    pub combine: Combine,
    pub rows: Matrix<S>,
}

/// A seminorm `x ↦ max_g combine_g |rows_g x|` on a space of dimension `dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PolyForm<S: Scalar> {
    pub dim: usize,
    pub groups: Vec<FormGroup<S>>,
}

impl<S: Scalar> PolyForm<S> {
    pub fn single(combine: Combine, rows: Matrix<S>) -> Self {
        PolyForm {
            dim: rows.cols(),
            groups: vec![FormGroup { combine, rows }],
        }
    }

    pub fn value(&self, x: &[S]) -> S {
        self.groups
            .iter()
            .map(|g| {
                let terms = (0..g.rows.rows()).map(|r| dot(g.rows.row(r), x).abs());
                match g.combine {
                    Combine::Sum => terms.fold(S::zero(), |a, b| a + b),
                    Combine::Max => terms.fold(S::zero(), S::max_of),
                }
            })
            .fold(S::zero(), S::max_of)
    }

    /// All functionals stacked; the kernel of the seminorm is their common kernel.
    pub fn stacked_rows(&self) -> Matrix<S> {
        let rows: Vec<Vec<S>> = self.groups.iter().flat_map(|g| g.rows.row_vecs()).collect();
        Matrix::from_rows_with_width(rows, self.dim).expect("rows share the form dimension")
    }

    /// The pulled-back form `c ↦ self(V c)` on coefficient space.
    pub fn compose(&self, v: &Matrix<S>) -> Result<PolyForm<S>> {
        let groups = self
            .groups
            .iter()
            .map(|g| {
                Ok(FormGroup {
                    combine: g.combine,
                    rows: g.rows.mul(v)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyForm {
            dim: v.cols(),
            groups,
        })
    }

    /// `sup { ⟨objective, x⟩ : self(x) ≤ 1 }`, or `None` when unbounded.
    ///
    /// The ball is symmetric, so this is also the supremum of `|⟨objective, x⟩|`.
    pub fn maximize_linear(&self, objective: &[S]) -> Result<Option<S>> {
        if objective.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: objective.len(),
            });
        }
        if objective.iter().all(|v| v.is_zero()) {
            return Ok(Some(S::zero()));
        }
        let n = self.dim;
        // Variables: x⁺ (n), x⁻ (n), then one slack bound t per row of each sum group.
        let sum_rows: usize = self
            .groups
            .iter()
            .filter(|g| g.combine == Combine::Sum)
            .map(|g| g.rows.rows())
            .sum();
        let nvars = 2 * n + sum_rows;
        let mut a: Vec<Vec<S>> = Vec::new();
        let mut b: Vec<S> = Vec::new();
        let mut t_offset = 2 * n;
        for g in &self.groups {
            match g.combine {
                Combine::Max => {
                    for r in 0..g.rows.rows() {
                        for sign in [S::one(), -S::one()] {
                            let mut row = vec![S::zero(); nvars];
                            for (c, f) in g.rows.row(r).iter().enumerate() {
                                row[c] = sign.clone() * f.clone();
                                row[n + c] = -(sign.clone() * f.clone());
                            }
                            a.push(row);
                            b.push(S::one());
                        }
                    }
                }
                Combine::Sum => {
                    let k = g.rows.rows();
                    for r in 0..k {
                        for sign in [S::one(), -S::one()] {
                            let mut row = vec![S::zero(); nvars];
                            for (c, f) in g.rows.row(r).iter().enumerate() {
                                row[c] = sign.clone() * f.clone();
                                row[n + c] = -(sign.clone() * f.clone());
                            }
                            row[t_offset + r] = -S::one();
                            a.push(row);
                            b.push(S::zero());
                        }
                    }
                    let mut total = vec![S::zero(); nvars];
                    for v in total.iter_mut().skip(t_offset).take(k) {
                        *v = S::one();
                    }
                    a.push(total);
                    b.push(S::one());
                    t_offset += k;
                }
            }
        }
        let mut c = vec![S::zero(); nvars];
        for (i, o) in objective.iter().enumerate() {
            c[i] = o.clone();
            c[n + i] = -o.clone();
        }
        simplex_max(&a, &b, &c)
    }
}

/// `sup { target(T x) : source(x) ≤ 1 }`, or `None` when unbounded.
pub fn operator_norm<S: Scalar>(
    t: &Matrix<S>,
    source: &PolyForm<S>,
    target: &PolyForm<S>,
) -> Result<Option<S>> {
    if t.cols() != source.dim || t.rows() != target.dim {
        return Err(Error::Dimension {
            expected: source.dim,
            got: t.cols(),
        });
    }
    let mut best = S::zero();
    for g in &target.groups {
        let composed = g.rows.mul(t)?;
        let candidates: Vec<Vec<S>> = match g.combine {
            Combine::Max => composed.row_vecs(),
            Combine::Sum => {
                let active: Vec<Vec<S>> = composed
                    .row_vecs()
                    .into_iter()
                    .filter(|r| r.iter().any(|v| !v.is_zero()))
                    .collect();
                if active.len() > MAX_SIGN_ENUMERATION_ROWS {
                    return Err(Error::Input(format!(
                        "sum-type target with {} active functionals exceeds the enumeration limit {}",
                        active.len(),
                        MAX_SIGN_ENUMERATION_ROWS
                    )));
                }
                sign_combinations(&active, source.dim)
            }
        };
        for objective in candidates {
            match source.maximize_linear(&objective)? {
                Some(v) => best = best.max_of(v),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(best))
}

/// `Σ σ_r f_r` for all sign vectors with `σ_0 = +1`.
fn sign_combinations<S: Scalar>(rows: &[Vec<S>], dim: usize) -> Vec<Vec<S>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let k = rows.len();
    (0..1usize << (k - 1))
        .map(|mask| {
            let mut acc = rows[0].clone();
            for (r, row) in rows.iter().enumerate().skip(1) {
                let negative = mask & (1 << (r - 1)) != 0;
                for (a, v) in acc.iter_mut().zip(row) {
                    *a = if negative {
                        a.clone() - v.clone()
                    } else {
                        a.clone() + v.clone()
                    };
                }
            }
            debug_assert_eq!(acc.len(), dim);
            acc
        })
        .collect()
}

fn positive<S: Scalar>(x: &S) -> bool {
    x.is_positive() && !x.is_negligible(&S::one())
}

/// Maximize `cᵀx` subject to `A x ≤ b`, `x ≥ 0`, where `b ≥ 0`.
///
/// Returns `None` if the objective is unbounded on the feasible set.
pub fn simplex_max<S: Scalar>(a: &[Vec<S>], b: &[S], c: &[S]) -> Result<Option<S>> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: a.first().map_or(0, Vec::len),
        });
    }
    if b.iter().any(|v| v.is_negative()) {
        return Err(Error::Input("simplex requires a nonnegative right-hand side".into()));
    }
    let width = n + m + 1;
    let mut tab: Vec<Vec<S>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        let mut t = row.clone();
        t.extend((0..m).map(|j| if i == j { S::one() } else { S::zero() }));
        t.push(b[i].clone());
        tab.push(t);
    }
    let mut obj: Vec<S> = c.iter().map(|v| -v.clone()).collect();
    obj.extend((0..=m).map(|_| S::zero()));
    tab.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland: lowest-index improving column.
        let Some(enter) = (0..n + m).find(|&j| positive(&-tab[m][j].clone())) else {
            break;
        };
        let mut leave: Option<(usize, S)> = None;
        for i in 0..m {
            if !positive(&tab[i][enter]) {
                continue;
            }
            let ratio = tab[i][width - 1].clone() / tab[i][enter].clone();
            leave = match leave {
                None => Some((i, ratio)),
                Some((li, lr)) => {
                    if ratio < lr || (ratio == lr && basis[i] < basis[li]) {
                        Some((i, ratio))
                    } else {
                        Some((li, lr))
                    }
                }
            };
        }
        let Some((pr, _)) = leave else {
            return Ok(None);
        };
        let pivot = tab[pr][enter].clone();
        for v in tab[pr].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        let pivot_row = tab[pr].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == pr || row[enter].is_zero() {
                continue;
            }
            let factor = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v = v.clone() - factor.clone() * p.clone();
                }
            }
            row[enter] = S::zero();
        }
        basis[pr] = enter;
    }
    Ok(Some(tab[m][width - 1].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn simplex_small_lp() {
        // max 3x + 2y, x + y ≤ 4, x + 3y ≤ 6, x ≤ 3
        let a = vec![
            vec![q(1, 1), q(1, 1)],
            vec![q(1, 1), q(3, 1)],
            vec![q(1, 1), q(0, 1)],
        ];
        let b = vec![q(4, 1), q(6, 1), q(3, 1)];
        let c = vec![q(3, 1), q(2, 1)];
        assert_eq!(simplex_max(&a, &b, &c).unwrap(), Some(q(11, 1)));
    }

    #[test]
    fn simplex_detects_unbounded() {
        let a = vec![vec![q(1, 1), q(-1, 1)]];
        let b = vec![q(1, 1)];
        let c = vec![q(0, 1), q(1, 1)];
        assert_eq!(simplex_max(&a, &b, &c).unwrap(), None);
    }

    #[test]
    fn linear_sup_over_weighted_balls() {
        // Ball of max(|x|, 2|y|): sup of x + y is 1 + 1/2.
        let rows = Matrix::from_rows(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(2, 1)]]).unwrap();
        let max_form = PolyForm::single(Combine::Max, rows.clone());
        assert_eq!(
            max_form.maximize_linear(&[q(1, 1), q(1, 1)]).unwrap(),
            Some(q(3, 2))
        );
        // Ball of |x| + 2|y|: sup of x + y is 1.
        let sum_form = PolyForm::single(Combine::Sum, rows);
        assert_eq!(
            sum_form.maximize_linear(&[q(1, 1), q(1, 1)]).unwrap(),
            Some(q(1, 1))
        );
    }

    #[test]
    fn seminorm_ball_is_unbounded_off_the_row_space() {
        let rows = Matrix::from_rows(vec![vec![q(1, 1), q(0, 1)]]).unwrap();
        let form = PolyForm::single(Combine::Max, rows);
        assert_eq!(form.maximize_linear(&[q(0, 1), q(1, 1)]).unwrap(), None);
        assert_eq!(form.maximize_linear(&[q(2, 1), q(0, 1)]).unwrap(), Some(q(2, 1)));
    }

    #[test]
    fn operator_norm_of_l1_to_l1_matches_column_formula() {
        let id = Matrix::<BigRational>::identity(2);
        let l1 = PolyForm::single(Combine::Sum, id.clone());
        let t = Matrix::from_rows(vec![vec![q(1, 1), q(-2, 1)], vec![q(3, 1), q(1, 2)]]).unwrap();
        // max column abs sum: max(4, 5/2) = 4
        assert_eq!(operator_norm(&t, &l1, &l1).unwrap(), Some(q(4, 1)));
        let linf = PolyForm::single(Combine::Max, id);
        // max row abs sum: max(3, 7/2) = 7/2
        assert_eq!(operator_norm(&t, &linf, &linf).unwrap(), Some(q(7, 2)));
    }
}
