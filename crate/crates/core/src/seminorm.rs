//! Graded seminorm systems and their evaluation.
//!
//! A [`SeminormSystem`] is an increasing family `‖·‖_1 ≤ ‖·‖_2 ≤ … ≤ ‖·‖_K`
//! on the coordinates of a truncation box. Values are computed by direct
//! summation; [`SeminormSystem::level_form`] exposes the same level as a
//! polyhedral form for the linear algebra in the construction modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::operator::FiniteRankOperator;
use crate::polyhedral::{Combine, FormGroup, PolyForm};
use crate::scalar::Scalar;
use crate::space::{Index, IndexTriple, TruncatedVector, TruncationBox};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoFormula {
    /// `ρ(μ, ν) = 2^{-μ}`.
    Dyadic,
}

/// Coefficients `0 < ρ(μ, ν) ≤ 1` that tend to zero as `μ → ∞` for each `ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RhoTable<S: Scalar> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<RhoFormula>,
    mu_max: usize,
    nu_max: usize,
    /// `values[μ-1][ν-1]`.
    #[serde(with = "crate::scalar::serde_scalar::vec2")]
    values: Vec<Vec<S>>,
}

impl<S: Scalar> RhoTable<S> {
    pub fn dyadic(mu_max: usize, nu_max: usize) -> Self {
        let values = (1..=mu_max)
            .map(|mu| {
                let v = S::from_ratio(1, 1) / S::from_count(2).pow(mu as u32);
                vec![v; nu_max]
            })
            .collect();
        RhoTable {
            formula: Some(RhoFormula::Dyadic),
            mu_max,
            nu_max,
            values,
        }
    }

    pub fn from_values(values: Vec<Vec<S>>) -> Result<Self> {
        let mu_max = values.len();
        let nu_max = values.first().map_or(0, Vec::len);
        let table = RhoTable {
            formula: None,
            mu_max,
            nu_max,
            values,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu_max == 0 || self.nu_max == 0 || self.values.len() != self.mu_max {
            return Err(Error::Input("rho table must be a nonempty rectangle".into()));
        }
        for (mu, row) in self.values.iter().enumerate() {
            if row.len() != self.nu_max {
                return Err(Error::Input("rho table rows differ in length".into()));
            }
            for (nu, v) in row.iter().enumerate() {
                if !v.is_positive() || *v > S::one() {
                    return Err(Error::Input(format!(
                        "rho({}, {}) = {v} is outside (0, 1]",
                        mu + 1,
                        nu + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mu_max(&self) -> usize {
        self.mu_max
    }

    pub fn nu_max(&self) -> usize {
        self.nu_max
    }

    pub fn get(&self, mu: usize, nu: usize) -> Result<S> {
        if mu == 0 || nu == 0 || mu > self.mu_max || nu > self.nu_max {
            return Err(Error::Domain {
                index: format!("rho({mu}, {nu})"),
                bounds: format!("({}, {})", self.mu_max, self.nu_max),
            });
        }
        Ok(self.values[mu - 1][nu - 1].clone())
    }

    /// Decay witness: the smallest `μ₀` with `ρ(μ, ν) ≤ eps` for every `μ ≥ μ₀`.
    ///
    /// For a formula table this holds on all of `ℕ`; for an explicit table it is
    /// certified on the stored rows only and is `None` if no such row exists.
    pub fn decay_index(&self, nu: usize, eps: &S) -> Option<usize> {
        if !eps.is_positive() {
            return None;
        }
        match self.formula {
            Some(RhoFormula::Dyadic) => {
                let mut mu = 1usize;
                let mut v = S::from_ratio(1, 2);
                while v > *eps {
                    mu += 1;
                    v = v / S::from_count(2);
                }
                Some(mu)
            }
            None => {
                if nu == 0 || nu > self.nu_max {
                    return None;
                }
                let mut start = None;
                for mu in (1..=self.mu_max).rev() {
                    if self.values[mu - 1][nu - 1] <= *eps {
                        start = Some(mu);
                    } else {
                        break;
                    }
                }
                start
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", tag = "kind", rename_all = "snake_case")]
pub enum SeminormKind<S: Scalar> {
    /// Plain terms `|x^n_{μν}| p^{n+μ+ν}` for `ν ≤ p`, difference terms
    /// `|ρ_{μν} x^n_{μν} − x^{n+1}_{μν}| p^{n+μ+ν}` for `ν > p`.
    Vogt { rho: RhoTable<S> },
    /// Köthe echelon seminorms `combine_i a_k(i)|x_i|` with `weights[k-1][i-1] = a_k(i)`.
    Koethe {
        combine: Combine,
        #[serde(with = "crate::scalar::serde_scalar::vec2")]
        weights: Vec<Vec<S>>,
    },
    /// `p_k(x) = max_{j ≤ k} |x_j|`.
    MaxPrefix,
    /// One polyhedral form per level.
    Custom { forms: Vec<PolyForm<S>> },
    /// `|x|_k = max_n ‖Σ_{i≤n} A_i x‖_k` for a base system and the partial sums
    /// `Σ_{i≤n} A_i` of a family of operators.
    PartialSumSup {
        base: Box<SeminormSystem<S>>,
        partial_sums: Vec<Matrix<S>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SeminormSystem<S: Scalar> {
    #[serde(rename = "box")]
    bx: TruncationBox,
    levels: usize,
    #[serde(flatten)]
    kind: SeminormKind<S>,
}

impl<S: Scalar> SeminormSystem<S> {
    pub fn new(bx: TruncationBox, levels: usize, kind: SeminormKind<S>) -> Result<Self> {
        let sys = SeminormSystem { bx, levels, kind };
        sys.validate()?;
        Ok(sys)
    }

    pub fn vogt(bx: TruncationBox, levels: usize, rho: RhoTable<S>) -> Result<Self> {
        Self::new(bx, levels, SeminormKind::Vogt { rho })
    }

    pub fn max_prefix(d: usize, levels: usize) -> Result<Self> {
        Self::new(TruncationBox::linear(d)?, levels, SeminormKind::MaxPrefix)
    }

    pub fn koethe(combine: Combine, weights: Vec<Vec<S>>) -> Result<Self> {
        let d = weights.first().map_or(0, Vec::len);
        Self::new(
            TruncationBox::linear(d)?,
            weights.len(),
            SeminormKind::Koethe { combine, weights },
        )
    }

    pub fn custom(bx: TruncationBox, forms: Vec<PolyForm<S>>) -> Result<Self> {
        Self::new(bx, forms.len(), SeminormKind::Custom { forms })
    }

    pub fn validate(&self) -> Result<()> {
        self.bx.validate()?;
        if self.levels == 0 {
            return Err(Error::Input("a seminorm system needs at least one level".into()));
        }
        let d = self.bx.dim();
        match &self.kind {
            SeminormKind::Vogt { rho } => {
                rho.validate()?;
                let (_, mu_max, nu_max) = self
                    .bx
                    .triple_bounds()
                    .ok_or_else(|| Error::Input("the vogt system needs a triple box".into()))?;
                if rho.mu_max() < mu_max || rho.nu_max() < nu_max {
                    return Err(Error::Input(format!(
                        "rho table ({}, {}) does not cover the box {}",
                        rho.mu_max(),
                        rho.nu_max(),
                        self.bx
                    )));
                }
            }
            SeminormKind::Koethe { weights, .. } => {
                if weights.len() != self.levels || weights.iter().any(|w| w.len() != d) {
                    return Err(Error::Input("koethe weights must be levels x d".into()));
                }
                for (k, w) in weights.iter().enumerate() {
                    if w.iter().any(|a| a.is_negative()) {
                        return Err(Error::Input(format!("negative weight at level {}", k + 1)));
                    }
                    if k > 0 && w.iter().zip(&weights[k - 1]).any(|(hi, lo)| hi < lo) {
                        return Err(Error::Input(format!(
                            "weights decrease from level {k} to {}",
                            k + 1
                        )));
                    }
                }
            }
            SeminormKind::MaxPrefix => {
                if !matches!(self.bx, TruncationBox::Linear { .. }) {
                    return Err(Error::Input("max-prefix needs a linear box".into()));
                }
            }
            SeminormKind::Custom { forms } => {
                if forms.len() != self.levels || forms.iter().any(|f| f.dim != d) {
                    return Err(Error::Input("custom forms must match levels and box".into()));
                }
            }
            SeminormKind::PartialSumSup { base, partial_sums } => {
                if base.bx != self.bx || base.levels != self.levels {
                    return Err(Error::Input("derived system must share the base box".into()));
                }
                if partial_sums.is_empty() {
                    return Err(Error::Degenerate("empty partial-sum family".into()));
                }
                if partial_sums.iter().any(|m| m.rows() != d || m.cols() != d) {
                    return Err(Error::Dimension {
                        expected: d,
                        got: partial_sums[0].rows(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn bx(&self) -> &TruncationBox {
        &self.bx
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.bx.dim()
    }

    pub fn kind(&self) -> &SeminormKind<S> {
        &self.kind
    }

    pub(crate) fn check_level(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.levels {
            return Err(Error::Level {
                level: k,
                levels: self.levels,
            });
        }
        Ok(())
    }

    fn check_box(&self, x: &TruncatedVector<S>) -> Result<()> {
        if *x.bx() != self.bx {
            return Err(Error::Domain {
                index: format!("vector box {}", x.bx()),
                bounds: self.bx.to_string(),
            });
        }
        Ok(())
    }

    /// `‖x‖_k`.
    pub fn eval(&self, k: usize, x: &TruncatedVector<S>) -> Result<S> {
        self.check_box(x)?;
        self.eval_dense(k, x.coords())
    }

    /// `‖x‖_k` for a vector given by its dense coordinates.
    pub fn eval_dense(&self, k: usize, x: &[S]) -> Result<S> {
        self.check_level(k)?;
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match &self.kind {
            SeminormKind::Vogt { rho } => self.vogt_sum(rho, k, x),
            SeminormKind::Koethe { combine, weights } => {
                let terms = weights[k - 1]
                    .iter()
                    .zip(x)
                    .map(|(a, v)| a.clone() * v.abs());
                match combine {
                    Combine::Sum => terms.fold(S::zero(), |a, b| a + b),
                    Combine::Max => terms.fold(S::zero(), S::max_of),
                }
            }
            SeminormKind::MaxPrefix => x
                .iter()
                .take(k)
                .map(|v| v.abs())
                .fold(S::zero(), S::max_of),
            SeminormKind::Custom { forms } => forms[k - 1].value(x),
            SeminormKind::PartialSumSup { base, partial_sums } => {
                let mut best = S::zero();
                for p in partial_sums {
                    let y = p.mul_vec(x)?;
                    best = best.max_of(base.eval_dense(k, &y)?);
                }
                best
            }
        })
    }

    fn vogt_sum(&self, rho: &RhoTable<S>, p: usize, x: &[S]) -> S {
        let (n_max, mu_max, nu_max) = self.bx.triple_bounds().expect("validated triple box");
        let base = S::from_count(p);
        let powers: Vec<S> = (0..=(n_max + mu_max + nu_max) as u32)
            .map(|e| base.pow(e))
            .collect();
        let at = |n: usize, mu: usize, nu: usize| ((n - 1) * mu_max + (mu - 1)) * nu_max + (nu - 1);
        let mut total = S::zero();
        for n in 1..=n_max {
            for mu in 1..=mu_max {
                for nu in 1..=nu_max {
                    let here = &x[at(n, mu, nu)];
                    let w = &powers[n + mu + nu];
                    if nu <= p {
                        if !here.is_zero() {
                            total = total + here.abs() * w.clone();
                        }
                    } else {
                        let next = if n < n_max {
                            x[at(n + 1, mu, nu)].clone()
                        } else {
                            S::zero()
                        };
                        if here.is_zero() && next.is_zero() {
                            continue;
                        }
                        let r = rho.values[mu - 1][nu - 1].clone();
                        total = total + (r * here.clone() - next).abs() * w.clone();
                    }
                }
            }
        }
        total
    }

    /// Level `k` as a polyhedral form: the same value as [`Self::eval_dense`],
    /// expressed through explicit coordinate functionals.
    pub fn level_form(&self, k: usize) -> Result<PolyForm<S>> {
        self.check_level(k)?;
        let d = self.dim();
        let unit_row = |i: usize, w: S| {
            let mut r = vec![S::zero(); d];
            r[i] = w;
            r
        };
        Ok(match &self.kind {
            SeminormKind::Vogt { rho } => {
                let mut rows = Vec::with_capacity(d);
                let base = S::from_count(k);
                for (f, index) in self.bx.indices().enumerate() {
                    let Index::Triple(t) = index else {
                        unreachable!("vogt systems have triple boxes")
                    };
                    let w = base.pow(t.weight_exponent());
                    if t.nu <= k {
                        rows.push(unit_row(f, w));
                    } else {
                        let mut r = unit_row(f, rho.get(t.mu, t.nu)? * w.clone());
                        let next = IndexTriple { n: t.n + 1, ..t };
                        if let Ok(g) = self.bx.flat(&next.into()) {
                            r[g] = -w;
                        }
                        rows.push(r);
                    }
                }
                PolyForm::single(Combine::Sum, Matrix::from_rows_with_width(rows, d)?)
            }
            SeminormKind::Koethe { combine, weights } => {
                let rows = (0..d).map(|i| unit_row(i, weights[k - 1][i].clone())).collect();
                PolyForm::single(*combine, Matrix::from_rows_with_width(rows, d)?)
            }
            SeminormKind::MaxPrefix => {
                let rows = (0..k.min(d)).map(|i| unit_row(i, S::one())).collect();
                PolyForm::single(Combine::Max, Matrix::from_rows_with_width(rows, d)?)
            }
            SeminormKind::Custom { forms } => forms[k - 1].clone(),
            SeminormKind::PartialSumSup { base, partial_sums } => {
                let inner = base.level_form(k)?;
                let mut groups = Vec::new();
                for p in partial_sums {
                    for g in &inner.groups {
                        groups.push(FormGroup {
                            combine: g.combine,
                            rows: g.rows.mul(p)?,
                        });
                    }
                }
                PolyForm { dim: d, groups }
            }
        })
    }

    /// `q_k(x) = max_n ‖Σ_{i≤n} ops[i] x‖_k`.
    pub fn eval_sup(
        &self,
        k: usize,
        ops: &[FiniteRankOperator<S>],
        x: &TruncatedVector<S>,
    ) -> Result<S> {
        self.check_box(x)?;
        if ops.is_empty() {
            return Err(Error::Degenerate("empty operator list".into()));
        }
        let mut partial = vec![S::zero(); self.dim()];
        let mut best = S::zero();
        for op in ops {
            let y = op.apply_dense(x.coords())?;
            partial = linalg::add(&partial, &y);
            best = best.max_of(self.eval_dense(k, &partial)?);
        }
        Ok(best)
    }

    /// Basis of `{v ∈ span(subspace) : ‖v‖_k = 0}`.
    pub fn kernel_basis(
        &self,
        k: usize,
        subspace: &[TruncatedVector<S>],
    ) -> Result<Vec<TruncatedVector<S>>> {
        for v in subspace {
            self.check_box(v)?;
        }
        let dense: Vec<Vec<S>> = subspace.iter().map(|v| v.coords().to_vec()).collect();
        self.kernel_basis_dense(k, &dense)?
            .into_iter()
            .map(|v| TruncatedVector::from_dense(self.bx, v))
            .collect()
    }

    pub(crate) fn kernel_basis_dense(&self, k: usize, subspace: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
        self.check_level(k)?;
        if subspace.is_empty() {
            return Ok(Vec::new());
        }
        let d = self.dim();
        if linalg::rank_of(subspace, d) != subspace.len() {
            return Err(Error::Dependent);
        }
        let v = Matrix::from_columns(subspace, d)?;
        let g = self.level_form(k)?.stacked_rows().mul(&v)?;
        let coeffs = if g.rows() == 0 {
            (0..subspace.len())
                .map(|i| {
                    let mut e = vec![S::zero(); subspace.len()];
                    e[i] = S::one();
                    e
                })
                .collect()
        } else {
            g.nullspace()
        };
        coeffs.iter().map(|c| v.mul_vec(c)).collect()
    }

    /// Whether level `k` is a norm on `span(basis)`.
    pub fn is_norm_on(&self, k: usize, basis: &[Vec<S>]) -> Result<bool> {
        Ok(self.kernel_basis_dense(k, basis)?.is_empty())
    }

    /// Smallest level that is a norm on `span(basis)`.
    pub fn norm_level_on(&self, basis: &[Vec<S>]) -> Result<Option<usize>> {
        for k in 1..=self.levels {
            if self.is_norm_on(k, basis)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Checks `‖x‖_k ≤ ‖x‖_{k+1}` for every level on the given samples and
    /// returns the first offending `(sample index, k)`.
    pub fn monotonicity_violation(&self, samples: &[Vec<S>]) -> Result<Option<(usize, usize)>> {
        for (i, x) in samples.iter().enumerate() {
            let mut prev = self.eval_dense(1, x)?;
            for k in 2..=self.levels {
                let cur = self.eval_dense(k, x)?;
                if !prev.leq(&cur) {
                    return Ok(Some((i, k - 1)));
                }
                prev = cur;
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn t(n: usize, mu: usize, nu: usize) -> IndexTriple {
        IndexTriple::new(n, mu, nu).unwrap()
    }

    fn vogt(n: usize, mu: usize, nu: usize, levels: usize) -> SeminormSystem<Q> {
        let bx = TruncationBox::triple(n, mu, nu).unwrap();
        SeminormSystem::vogt(bx, levels, RhoTable::dyadic(mu, nu)).unwrap()
    }

    #[test]
    fn vogt_unit_vector_in_plain_region() {
        let s = vogt(3, 3, 3, 3);
        let e = TruncatedVector::unit(*s.bx(), t(1, 2, 2)).unwrap();
        assert_eq!(s.eval(2, &e).unwrap(), q(32, 1));
    }

    #[test]
    fn vogt_geometric_vector_at_level_one() {
        // Σ_{n≤3} 4^{-n} e_{n,2,2}; at p = 1 only the boundary difference survives.
        let s = vogt(3, 3, 3, 3);
        let entries = (1..=3).map(|n| (t(n, 2, 2).into(), q(1, 4i64.pow(n as u32))));
        let x = TruncatedVector::from_entries(*s.bx(), entries).unwrap();
        assert_eq!(s.eval(1, &x).unwrap(), q(1, 256));
    }

    #[test]
    fn zero_vector_has_zero_value_everywhere() {
        let s = vogt(3, 3, 3, 4);
        let z = TruncatedVector::zeros(*s.bx());
        for k in 1..=4 {
            assert!(s.eval(k, &z).unwrap().is_zero());
        }
        let m = SeminormSystem::<Q>::max_prefix(3, 3).unwrap();
        assert!(m.eval(2, &TruncatedVector::zeros(*m.bx())).unwrap().is_zero());
    }

    #[test]
    fn level_and_box_errors() {
        let s = vogt(2, 2, 2, 2);
        let z = TruncatedVector::zeros(*s.bx());
        assert_eq!(s.eval(0, &z), Err(Error::Level { level: 0, levels: 2 }));
        assert_eq!(s.eval(3, &z), Err(Error::Level { level: 3, levels: 2 }));
        let other = TruncatedVector::zeros(TruncationBox::triple(3, 2, 2).unwrap());
        assert!(matches!(s.eval(1, &other), Err(Error::Domain { .. })));
    }

    #[test]
    fn vogt_form_agrees_with_direct_sum() {
        let s = vogt(3, 2, 3, 4);
        let coords: Vec<Q> = (0..s.dim()).map(|i| q((i as i64 % 7) - 3, 1 + i as i64 % 3)).collect();
        for k in 1..=4 {
            let direct = s.eval_dense(k, &coords).unwrap();
            let form = s.level_form(k).unwrap().value(&coords);
            assert_eq!(direct, form, "level {k}");
        }
    }

    #[test]
    fn max_prefix_kernel_in_span_of_first_two_units() {
        let s = SeminormSystem::<Q>::max_prefix(3, 3).unwrap();
        let e1 = TruncatedVector::unit(*s.bx(), Index::Single(1)).unwrap();
        let e2 = TruncatedVector::unit(*s.bx(), Index::Single(2)).unwrap();
        let ker = s.kernel_basis(1, &[e1.clone(), e2.clone()]).unwrap();
        assert_eq!(ker, vec![e2.clone()]);
        assert!(s.kernel_basis(2, &[e1.clone(), e2.clone()]).unwrap().is_empty());
        assert!(s.kernel_basis(1, &[]).unwrap().is_empty());
        assert_eq!(
            s.kernel_basis(1, &[e1.clone(), e1.scale(&q(2, 1))]),
            Err(Error::Dependent)
        );
    }

    #[test]
    fn sup_seminorm_over_coordinate_projections() {
        let s = SeminormSystem::<Q>::max_prefix(3, 3).unwrap();
        let ops: Vec<FiniteRankOperator<Q>> = (0..3)
            .map(|i| {
                let mut e = vec![q(0, 1); 3];
                e[i] = q(1, 1);
                FiniteRankOperator::from_matrix(Matrix::outer(&e, &e), format!("P{i}")).unwrap()
            })
            .collect();
        let x = TruncatedVector::from_dense(*s.bx(), vec![q(1, 1), q(-1, 1), q(1, 1)]).unwrap();
        assert_eq!(s.eval_sup(3, &ops, &x).unwrap(), q(1, 1));
        assert!(matches!(s.eval_sup(3, &[], &x), Err(Error::Degenerate(_))));
        let id = FiniteRankOperator::from_matrix(Matrix::identity(3), "id").unwrap();
        assert_eq!(s.eval_sup(2, &[id], &x).unwrap(), s.eval(2, &x).unwrap());
    }

    #[test]
    fn koethe_weights_must_increase() {
        let w = vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]];
        assert!(SeminormSystem::koethe(Combine::Sum, w).is_err());
    }

    #[test]
    fn rho_table_validation_and_decay() {
        assert!(RhoTable::from_values(vec![vec![q(0, 1)]]).is_err());
        assert!(RhoTable::from_values(vec![vec![q(3, 2)]]).is_err());
        let table = RhoTable::from_values(vec![vec![q(1, 1)], vec![q(1, 2)], vec![q(1, 8)]]).unwrap();
        assert_eq!(table.decay_index(1, &q(1, 2)), Some(2));
        assert_eq!(table.decay_index(1, &q(1, 100)), None);
        let dy = RhoTable::<Q>::dyadic(3, 3);
        assert_eq!(dy.decay_index(2, &q(1, 3)), Some(2));
        assert_eq!(dy.decay_index(2, &q(1, 1000)), Some(10));
    }
}
