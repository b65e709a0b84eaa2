//! The basis space built from a rank-one schedule: the embedding `I`, the
//! projection `L`, and checks of every estimate the construction relies on.
//!
//! Elements of the basis space are finite component lists `(y(s))_s` with
//! `y(s) ∈ range(Ã_s)`, normed by `⦀y⦀_k = max_n ‖Σ_{s≤n} y(s)‖_k`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::operator::{build_schedule, FiniteRankOperator, RankOneSplit, ScheduledFamily};
use crate::polyhedral::operator_norm;
use crate::sampling;
use crate::scalar::Scalar;
use crate::seminorm::SeminormSystem;

/// Multiplier in the uniform prefix bound `sup_n ‖Σ_{s≤n} Ã_s x‖_k ≤ 5 M_k ‖x‖_{l(k)}`.
pub const PREFIX_BOUND_FACTOR: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BasisSpaceElement<S: Scalar> {
    #[serde(with = "crate::scalar::serde_scalar::vec2")]
    pub components: Vec<Vec<S>>,
}

impl<S: Scalar> BasisSpaceElement<S> {
    pub fn zero(schedule: &ScheduledFamily<S>) -> Self {
        BasisSpaceElement {
            components: vec![vec![S::zero(); schedule.dim]; schedule.len()],
        }
    }

    /// `Σ_s c_s e_s` where `e_s` carries the generator `y_s` in slot `s`.
    pub fn from_coefficients(schedule: &ScheduledFamily<S>, coeffs: &[S]) -> Result<Self> {
        if coeffs.len() != schedule.len() {
            return Err(Error::Dimension {
                expected: schedule.len(),
                got: coeffs.len(),
            });
        }
        Ok(BasisSpaceElement {
            components: schedule
                .ops
                .iter()
                .zip(coeffs)
                .map(|(op, c)| linalg::scaled(c, &op.generator))
                .collect(),
        })
    }

    pub fn total(&self, dim: usize) -> Vec<S> {
        self.components
            .iter()
            .fold(vec![S::zero(); dim], |acc, y| linalg::add(&acc, y))
    }

    /// Checks that each component is a multiple of the schedule's generator.
    pub fn validate(&self, schedule: &ScheduledFamily<S>) -> Result<()> {
        if self.components.len() != schedule.len() {
            return Err(Error::Dimension {
                expected: schedule.len(),
                got: self.components.len(),
            });
        }
        for (s, (y, op)) in self.components.iter().zip(&schedule.ops).enumerate() {
            if linalg::rank_of(&[y.clone(), op.generator.clone()], schedule.dim) > 1 {
                return Err(Error::Input(format!(
                    "component {} is not in the range of its operator",
                    s + 1
                )));
            }
        }
        Ok(())
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| linalg::is_zero_vec(&linalg::sub(a, b)))
    }
}

/// `⦀(y(s))_s⦀_k = max_n ‖Σ_{s≤n} y(s)‖_k`.
pub struct E0SeminormSystem<'a, S: Scalar> {
    pub base: &'a SeminormSystem<S>,
}

impl<S: Scalar> E0SeminormSystem<'_, S> {
    pub fn eval(&self, k: usize, y: &BasisSpaceElement<S>) -> Result<S> {
        let mut partial = vec![S::zero(); self.base.dim()];
        let mut best = S::zero();
        for c in &y.components {
            partial = linalg::add(&partial, c);
            best = best.max_of(self.base.eval_dense(k, &partial)?);
        }
        Ok(best)
    }

    /// Values `‖Σ_{s≤n} y(s)‖_k` for `n = 1..=len`.
    pub fn partial_values(&self, k: usize, y: &BasisSpaceElement<S>) -> Result<Vec<S>> {
        let mut partial = vec![S::zero(); self.base.dim()];
        y.components
            .iter()
            .map(|c| {
                partial = linalg::add(&partial, c);
                self.base.eval_dense(k, &partial)
            })
            .collect()
    }
}

/// `values[n-1][k-1] = ‖Σ_{s≤n} pieces[s]‖_k` for every prefix and level.
fn prefix_level_values<S: Scalar>(system: &SeminormSystem<S>, pieces: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
    let mut prefix = vec![S::zero(); system.dim()];
    let one = S::one();
    pieces
        .iter()
        .map(|piece| {
            linalg::axpy(&one, piece, &mut prefix);
            (1..=system.levels())
                .map(|k| system.eval_dense(k, &prefix))
                .collect()
        })
        .collect()
}

/// `I(x) = (Ã_s x)_s`.
pub fn embed<S: Scalar>(schedule: &ScheduledFamily<S>, x: &[S]) -> BasisSpaceElement<S> {
    BasisSpaceElement {
        components: schedule.apply_all(x),
    }
}

/// `L(y) = I(Σ_t y(t))`.
pub fn project<S: Scalar>(
    schedule: &ScheduledFamily<S>,
    y: &BasisSpaceElement<S>,
) -> BasisSpaceElement<S> {
    embed(schedule, &y.total(schedule.dim))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LevelCertificate<S: Scalar> {
    pub k: usize,
    /// `l(k)`: the level on the right of `‖Σ_{p≤n} A_p x‖_k ≤ M_k ‖x‖_{l(k)}`.
    pub l: usize,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub m_k: S,
    /// `K_k = 5 M_k`.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub k_k: S,
    /// `ω(k)`, equal to `l(k)`.
    pub omega: usize,
    pub samples: usize,
    /// Largest observed `sup_n ‖Σ_{s≤n} Ã_s x‖_k / ‖x‖_{l(k)}`.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub max_ratio: S,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EquicontinuityCertificate<S: Scalar> {
    pub levels: Vec<LevelCertificate<S>>,
}

impl<S: Scalar> EquicontinuityCertificate<S> {
    pub fn level(&self, k: usize) -> &LevelCertificate<S> {
        &self.levels[k - 1]
    }
}

/// For each level `k`, the smallest `l ≥ k` for which every partial sum
/// `Σ_{p≤n} A_p` is bounded from `‖·‖_l` to `‖·‖_k`, with the exact
/// operator-norm maximum `M_k` over `n`.
pub fn partial_sum_bounds<S: Scalar>(
    system: &SeminormSystem<S>,
    family: &[FiniteRankOperator<S>],
) -> Result<Vec<(usize, S)>> {
    let d = system.dim();
    let mut partial_sums = Vec::with_capacity(family.len());
    let mut acc = Matrix::zeros(d, d);
    for a in family {
        acc = acc.add(a.matrix())?;
        partial_sums.push(acc.clone());
    }
    let forms = (1..=system.levels())
        .map(|k| system.level_form(k))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(system.levels());
    'level: for k in 1..=system.levels() {
        for l in k..=system.levels() {
            let mut m_k = S::zero();
            let mut bounded = true;
            for t in &partial_sums {
                match operator_norm(t, &forms[l - 1], &forms[k - 1])? {
                    Some(v) => m_k = m_k.max_of(v),
                    None => {
                        bounded = false;
                        break;
                    }
                }
            }
            if bounded {
                out.push((l, m_k.certify_upper()));
                continue 'level;
            }
        }
        return Err(Error::Unbounded(format!(
            "partial sums are unbounded into level {k} from every level"
        )));
    }
    Ok(out)
}

/// Computes `M_k`, `l(k)` exactly and checks the uniform prefix bound on
/// `samples` random vectors for every level and every prefix of the schedule.
pub fn certify_equicontinuity<S: Scalar, R: Rng + ?Sized>(
    schedule: &ScheduledFamily<S>,
    system: &SeminormSystem<S>,
    family: &[FiniteRankOperator<S>],
    samples: usize,
    rng: &mut R,
) -> Result<EquicontinuityCertificate<S>> {
    let bounds = partial_sum_bounds(system, family)?;
    let xs: Vec<Vec<S>> = (0..samples)
        .map(|_| sampling::vector(rng, system.dim()))
        .collect();
    let factor = S::from_count(PREFIX_BOUND_FACTOR);
    let mut levels = Vec::with_capacity(bounds.len());
    let mut ratios = vec![S::zero(); bounds.len()];
    for x in &xs {
        let values = prefix_level_values(system, &schedule.apply_all(x))?;
        for (i, (l, m_k)) in bounds.iter().enumerate() {
            let k = i + 1;
            let base = system.eval_dense(*l, x)?;
            let rhs = factor.clone() * m_k.clone() * base.clone();
            let mut sup = S::zero();
            for (n, row) in values.iter().enumerate() {
                let value = &row[i];
                if !value.leq(&rhs) {
                    return Err(Error::Certificate {
                        level: k,
                        prefix: n + 1,
                        detail: format!("{value} > {rhs} for x = {x:?}"),
                    });
                }
                sup = sup.max_of(value.clone());
            }
            if base.is_positive() {
                ratios[i] = ratios[i].clone().max_of(sup / base);
            }
        }
    }
    for (i, (l, m_k)) in bounds.into_iter().enumerate() {
        levels.push(LevelCertificate {
            k: i + 1,
            l,
            k_k: factor.clone() * m_k.clone(),
            m_k,
            omega: l,
            samples,
            max_ratio: ratios[i].clone(),
        });
    }
    Ok(EquicontinuityCertificate { levels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReconstructionTrace<S: Scalar> {
    /// `residuals[k-1][n-1] = ‖Σ_{s≤n} Ã_s x − x‖_k`.
    #[serde(with = "crate::scalar::serde_scalar::vec2")]
    pub residuals: Vec<Vec<S>>,
}

/// Checks `Σ_s Ã_s x = x` and records the residual of every prefix.
pub fn verify_reconstruction<S: Scalar>(
    schedule: &ScheduledFamily<S>,
    system: &SeminormSystem<S>,
    x: &[S],
) -> Result<ReconstructionTrace<S>> {
    let mut residuals = vec![Vec::with_capacity(schedule.len()); system.levels()];
    let mut prefix = vec![S::zero(); x.len()];
    for piece in schedule.apply_all(x) {
        prefix = linalg::add(&prefix, &piece);
        let diff = linalg::sub(&prefix, x);
        for (k, trace) in residuals.iter_mut().enumerate() {
            trace.push(system.eval_dense(k + 1, &diff)?);
        }
    }
    if !linalg::is_zero_vec(&linalg::sub(&prefix, x)) {
        return Err(Error::Construction(
            "the full schedule does not reproduce x".into(),
        ));
    }
    Ok(ReconstructionTrace { residuals })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisCriterionReport {
    pub lists_checked: usize,
    /// Offending `(coefficient list, n, k)`.
    pub violations: Vec<(usize, usize, usize)>,
}

/// Checks `⦀Σ_{s≤n} c_s e_s⦀_k ≤ ⦀Σ_{s≤n+1} c_s e_s⦀_k` for all `n`, `k`.
pub fn basis_criterion_check<S: Scalar>(
    schedule: &ScheduledFamily<S>,
    system: &SeminormSystem<S>,
    coefficient_lists: &[Vec<S>],
) -> Result<BasisCriterionReport> {
    let mut violations = Vec::new();
    for (i, coeffs) in coefficient_lists.iter().enumerate() {
        let y = BasisSpaceElement::from_coefficients(schedule, coeffs)?;
        let values = prefix_level_values(system, &y.components)?;
        for k in 1..=system.levels() {
            // ⦀Σ_{s≤n} c_s e_s⦀_k is the running maximum of the partial values.
            let mut best = S::zero();
            for (n, row) in values.iter().enumerate() {
                let next = best.clone().max_of(row[k - 1].clone());
                if n > 0 && !best.leq(&next) {
                    violations.push((i, n, k));
                }
                best = next;
            }
        }
    }
    Ok(BasisCriterionReport {
        lists_checked: coefficient_lists.len(),
        violations,
    })
}

/// Minimum slack of the sandwich `‖x‖_k ≤ ⦀I(x)⦀_k ≤ K_k ‖x‖_{ω(k)}` per
/// level; negative entries are violations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SandwichMargins<S: Scalar> {
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub lower: Vec<S>,
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub upper: Vec<S>,
    pub violations: usize,
}

pub fn sandwich_margins<S: Scalar>(
    schedule: &ScheduledFamily<S>,
    system: &SeminormSystem<S>,
    certificate: &EquicontinuityCertificate<S>,
    samples: &[Vec<S>],
) -> Result<SandwichMargins<S>> {
    let levels = system.levels();
    let mut lower: Vec<Option<S>> = vec![None; levels];
    let mut upper: Vec<Option<S>> = vec![None; levels];
    let mut violations = 0;
    for x in samples {
        let values = prefix_level_values(system, &schedule.apply_all(x))?;
        for k in 1..=levels {
            let cert = certificate.level(k);
            let mid = values
                .iter()
                .fold(S::zero(), |acc, row| acc.max_of(row[k - 1].clone()));
            let lo = system.eval_dense(k, x)?;
            let hi = cert.k_k.clone() * system.eval_dense(cert.omega, x)?;
            if !lo.leq(&mid) || !mid.leq(&hi) {
                violations += 1;
            }
            let dl = mid.clone() - lo;
            let du = hi - mid;
            lower[k - 1] = Some(match lower[k - 1].take() {
                Some(m) if m < dl => m,
                _ => dl,
            });
            upper[k - 1] = Some(match upper[k - 1].take() {
                Some(m) if m < du => m,
                _ => du,
            });
        }
    }
    Ok(SandwichMargins {
        lower: lower.into_iter().map(|v| v.unwrap_or_else(S::zero)).collect(),
        upper: upper.into_iter().map(|v| v.unwrap_or_else(S::zero)).collect(),
        violations,
    })
}

/// Matrix of `I` acting on `ℝ^d` into the stacked component space `ℝ^{S·d}`.
pub fn embedding_matrix<S: Scalar>(schedule: &ScheduledFamily<S>) -> Result<Matrix<S>> {
    let d = schedule.dim;
    let mut rows = Vec::with_capacity(schedule.len() * d);
    for s in &schedule.ops {
        rows.extend(s.op.matrix().row_vecs());
    }
    Matrix::from_rows_with_width(rows, d)
}

/// `range(L) = image(I)`, decided by ranks of the stacked matrices.
pub fn complementation_check<S: Scalar>(schedule: &ScheduledFamily<S>) -> Result<bool> {
    let d = schedule.dim;
    let i = embedding_matrix(schedule)?;
    let summation = {
        let mut m = Matrix::zeros(d, schedule.len() * d);
        for s in 0..schedule.len() {
            for r in 0..d {
                m[(r, s * d + r)] = S::one();
            }
        }
        m
    };
    let l = i.mul(&summation)?;
    let rank_i = i.rank();
    let rank_l = l.rank();
    let mut joined_rows = i.transpose().row_vecs();
    joined_rows.extend(l.transpose().row_vecs());
    let joined = linalg::rank_of(&joined_rows, schedule.len() * d);
    Ok(rank_i == rank_l && joined == rank_i)
}

/// Summary of one verified instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct InstanceReport<S: Scalar> {
    pub instance: String,
    pub dim: usize,
    pub family_len: usize,
    pub schedule_len: usize,
    pub ranks: Vec<usize>,
    pub replication_counts: Vec<u64>,
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub control_constants: Vec<S>,
    pub schedule_reproduces_family: bool,
    pub all_rank_one: bool,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub max_block_prefix_ratio: S,
    pub equicontinuity: EquicontinuityCertificate<S>,
    pub sandwich: SandwichMargins<S>,
    pub idempotent: bool,
    pub section: bool,
    pub complemented: bool,
    pub reconstruction_exact: bool,
    pub basis_criterion: BasisCriterionReport,
}

impl<S: Scalar> InstanceReport<S> {
    pub fn passed(&self) -> bool {
        self.schedule_reproduces_family
            && self.all_rank_one
            && self.sandwich.violations == 0
            && self.idempotent
            && self.section
            && self.complemented
            && self.reconstruction_exact
            && self.basis_criterion.violations.is_empty()
    }
}

/// Runs the full construction and every check on one instance.
///
/// `samples` random vectors are used for each sampled inequality and
/// `coefficient_lists` random lists for the basis criterion.
pub fn verify_instance<S: Scalar, R: Rng + ?Sized>(
    name: &str,
    system: &SeminormSystem<S>,
    family: &[FiniteRankOperator<S>],
    samples: usize,
    coefficient_lists: usize,
    rng: &mut R,
) -> Result<(Vec<RankOneSplit<S>>, ScheduledFamily<S>, InstanceReport<S>)> {
    let d = system.dim();
    let (splits, schedule) = build_schedule(system, family, samples, rng)?;
    let max_block_ratio = schedule
        .blocks
        .iter()
        .fold(S::zero(), |acc, b| acc.max_of(b.max_prefix_ratio.clone()));
    let expected = family
        .iter()
        .try_fold(Matrix::zeros(d, d), |acc, a| acc.add(a.matrix()))?;
    let schedule_reproduces_family = schedule.total().approx_eq(&expected);
    let all_rank_one = schedule.ops.iter().all(|s| s.op.matrix().rank() == 1);

    let equicontinuity = certify_equicontinuity(&schedule, system, family, samples, rng)?;
    let xs: Vec<Vec<S>> = (0..samples).map(|_| sampling::vector(rng, d)).collect();
    let sandwich = sandwich_margins(&schedule, system, &equicontinuity, &xs)?;

    let mut idempotent = true;
    let mut section = true;
    let mut reconstruction_exact = true;
    for x in &xs {
        let ix = embed(&schedule, x);
        section &= project(&schedule, &ix).approx_eq(&ix);
        let coeffs: Vec<S> = (0..schedule.len())
            .map(|_| sampling::small_scalar(rng))
            .collect();
        let y = BasisSpaceElement::from_coefficients(&schedule, &coeffs)?;
        let ly = project(&schedule, &y);
        idempotent &= project(&schedule, &ly).approx_eq(&ly);
        reconstruction_exact &= verify_reconstruction(&schedule, system, x).is_ok();
    }
    let complemented = complementation_check(&schedule)?;
    let lists: Vec<Vec<S>> = (0..coefficient_lists)
        .map(|_| {
            (0..schedule.len())
                .map(|_| sampling::small_scalar(rng))
                .collect()
        })
        .collect();
    let basis_criterion = basis_criterion_check(&schedule, system, &lists)?;

    let report = InstanceReport {
        instance: name.to_string(),
        dim: d,
        family_len: family.len(),
        schedule_len: schedule.len(),
        ranks: splits.iter().map(RankOneSplit::rank).collect(),
        replication_counts: schedule.replication_counts(),
        control_constants: splits.iter().map(|s| s.control_constant.clone()).collect(),
        schedule_reproduces_family,
        all_rank_one,
        max_block_prefix_ratio: max_block_ratio,
        equicontinuity,
        sandwich,
        idempotent,
        section,
        complemented,
        reconstruction_exact,
        basis_criterion,
    };
    Ok((splits, schedule, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::telescope;
    use num_rational::BigRational;
    use rand::SeedableRng;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn projector(d: usize, idx: &[usize]) -> FiniteRankOperator<Q> {
        let mut m = Matrix::zeros(d, d);
        for &i in idx {
            m[(i, i)] = q(1, 1);
        }
        FiniteRankOperator::from_matrix(m, format!("P{idx:?}")).unwrap()
    }

    fn telescoped_3d() -> (SeminormSystem<Q>, Vec<FiniteRankOperator<Q>>) {
        let sys = SeminormSystem::max_prefix(3, 3).unwrap();
        let partial: Vec<_> = (1..=3)
            .map(|n| projector(3, &(0..n).collect::<Vec<_>>()))
            .collect();
        (sys, telescope(&partial).unwrap())
    }

    fn rng() -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(7)
    }

    #[test]
    fn identity_instance_in_one_dimension() {
        let sys = SeminormSystem::<Q>::max_prefix(1, 2).unwrap();
        let family = vec![projector(1, &[0])];
        let (_, schedule) = build_schedule(&sys, &family, 10, &mut rng()).unwrap();
        assert_eq!(schedule.len(), 1);
        let cert = certify_equicontinuity(&schedule, &sys, &family, 20, &mut rng()).unwrap();
        for lvl in &cert.levels {
            assert_eq!(lvl.m_k, q(1, 1));
            assert!(lvl.max_ratio <= q(1, 1));
        }
        let x = vec![q(3, 2)];
        assert_eq!(embed(&schedule, &x).components, vec![vec![q(3, 2)]]);
        let trace = verify_reconstruction(&schedule, &sys, &x).unwrap();
        assert!(trace.residuals[0][0] == q(0, 1));
    }

    #[test]
    fn telescoped_projections_have_unit_constants() {
        let (sys, family) = telescoped_3d();
        let (_, schedule) = build_schedule(&sys, &family, 10, &mut rng()).unwrap();
        assert_eq!(schedule.len(), 3);
        let bounds = partial_sum_bounds(&sys, &family).unwrap();
        assert_eq!(bounds, vec![(1, q(1, 1)), (2, q(1, 1)), (3, q(1, 1))]);
        // For x = e1 every prefix sum equals e1.
        let e1 = vec![q(1, 1), q(0, 1), q(0, 1)];
        let e0 = E0SeminormSystem { base: &sys };
        for k in 1..=3 {
            assert_eq!(e0.eval(k, &embed(&schedule, &e1)).unwrap(), q(1, 1));
        }
    }

    #[test]
    fn residuals_decrease_to_zero() {
        let (sys, family) = telescoped_3d();
        let (_, schedule) = build_schedule(&sys, &family, 10, &mut rng()).unwrap();
        let x = vec![q(1, 1), q(2, 1), q(3, 1)];
        let trace = verify_reconstruction(&schedule, &sys, &x).unwrap();
        let top = &trace.residuals[2];
        assert_eq!(top, &vec![q(3, 1), q(3, 1), q(0, 1)]);
        // The sup over the unreconstructed tail strictly decreases here.
        assert_eq!(trace.residuals[1], vec![q(2, 1), q(0, 1), q(0, 1)]);
        let zero = vec![q(0, 1); 3];
        let z = verify_reconstruction(&schedule, &sys, &zero).unwrap();
        assert!(z.residuals.iter().flatten().all(|v| *v == q(0, 1)));
    }

    #[test]
    fn projection_kernel_and_image() {
        let (sys, family) = telescoped_3d();
        let (_, schedule) = build_schedule(&sys, &family, 10, &mut rng()).unwrap();
        let x = vec![q(1, 2), q(-1, 1), q(2, 1)];
        let ix = embed(&schedule, &x);
        assert!(project(&schedule, &ix).approx_eq(&ix));
        // Components summing to zero lie in the kernel of L.
        let y = BasisSpaceElement {
            components: vec![
                vec![q(1, 1), q(0, 1), q(0, 1)],
                vec![q(0, 1); 3],
                vec![q(0, 1); 3],
            ],
        };
        let mut y2 = y.clone();
        y2.components[1] = vec![q(-1, 1), q(0, 1), q(0, 1)];
        let ly = project(&schedule, &y2);
        assert!(ly.approx_eq(&BasisSpaceElement::zero(&schedule)));
        assert!(complementation_check(&schedule).unwrap());
        // Component 2 of y2 is not a multiple of e_2's generator.
        assert!(y2.validate(&schedule).is_err());
        assert!(y.validate(&schedule).is_ok());
    }

    #[test]
    fn basis_criterion_edge_cases() {
        let (sys, family) = telescoped_3d();
        let (_, schedule) = build_schedule(&sys, &family, 10, &mut rng()).unwrap();
        let zero = vec![q(0, 1); 3];
        let single = vec![q(5, 1), q(0, 1), q(0, 1)];
        let report = basis_criterion_check(&schedule, &sys, &[zero, single.clone()]).unwrap();
        assert!(report.violations.is_empty());
        let e0 = E0SeminormSystem { base: &sys };
        let y = BasisSpaceElement::from_coefficients(&schedule, &single).unwrap();
        let p = e0.partial_values(1, &y).unwrap();
        assert!(p.iter().all(|v| *v == q(5, 1)));
    }

    #[test]
    fn verify_instance_passes_on_a_skew_basis() {
        // Biorthogonal rank-one family for the basis (1,0), (1,1) in weighted max norms.
        let sys = SeminormSystem::koethe(
            crate::polyhedral::Combine::Max,
            vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(2, 1)]],
        )
        .unwrap();
        let a1 = Matrix::from_rows(vec![vec![q(1, 1), q(-1, 1)], vec![q(0, 1), q(0, 1)]]).unwrap();
        let a2 = Matrix::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(1, 1)]]).unwrap();
        let family = vec![
            FiniteRankOperator::from_matrix(a1, "A1").unwrap(),
            FiniteRankOperator::from_matrix(a2, "A2").unwrap(),
        ];
        let (_, _, report) = verify_instance("skew", &sys, &family, 30, 10, &mut rng()).unwrap();
        assert!(report.passed(), "{report:#?}");
    }
}
