//! Finite-rank operators on a truncated space and the rank-one splitting of
//! an approximating family into a schedule of one-dimensional operators.
//!
//! The pipeline for one operator `A_p` with range `E_p` is
//!
//! 1. [`kernel_filtration`]: `F_j = Ker ‖·‖_j ∩ E_p`, nested decreasingly;
//! 2. [`select_complements`]: `F_l = H_l ⊕ F_{l+1}` with `H_l ⊥ F_{l+1}`;
//! 3. [`rank_one_split`]: coordinate projections `B_j` onto the adapted basis
//!    and the control constant `R_p = max_k C_k`;
//! 4. [`scale_and_replicate`]: `N_p = ⌈m_p R_p⌉` copies of `N_p⁻¹ B_j`;
//!
//! and [`flatten_schedule`] concatenates the blocks into `Ã_s = C_i^p A_p`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::sampling;
use crate::scalar::{Scalar, ScalarMode, FLOAT_SAFETY};
use crate::seminorm::SeminormSystem;

/// A linear map on the coordinates of a box, with a basis of its range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FiniteRankOperator<S: Scalar> {
    pub label: String,
    matrix: Matrix<S>,
    #[serde(with = "crate::scalar::serde_scalar::vec2")]
    range_basis: Vec<Vec<S>>,
}

impl<S: Scalar> FiniteRankOperator<S> {
    pub fn from_matrix(matrix: Matrix<S>, label: impl Into<String>) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::Dimension {
                expected: matrix.rows(),
                got: matrix.cols(),
            });
        }
        let range_basis = matrix.column_basis();
        Ok(FiniteRankOperator {
            label: label.into(),
            matrix,
            range_basis,
        })
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn range_basis(&self) -> &[Vec<S>] {
        &self.range_basis
    }

    pub fn rank(&self) -> usize {
        self.range_basis.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn apply_dense(&self, x: &[S]) -> Result<Vec<S>> {
        self.matrix.mul_vec(x)
    }
}

/// `B₁ = A₁`, `B_{n+1} = A_{n+1} − A_n`.
pub fn telescope<S: Scalar>(family: &[FiniteRankOperator<S>]) -> Result<Vec<FiniteRankOperator<S>>> {
    let mut out = Vec::with_capacity(family.len());
    for (n, a) in family.iter().enumerate() {
        let m = if n == 0 {
            a.matrix.clone()
        } else {
            a.matrix.sub(&family[n - 1].matrix)?
        };
        out.push(FiniteRankOperator::from_matrix(m, format!("d({})", a.label))?);
    }
    Ok(out)
}

/// Partial sums `A_n = Σ_{i≤n} B_i`; inverse of [`telescope`].
pub fn accumulate<S: Scalar>(family: &[FiniteRankOperator<S>]) -> Result<Vec<FiniteRankOperator<S>>> {
    let mut out: Vec<FiniteRankOperator<S>> = Vec::with_capacity(family.len());
    for b in family {
        let m = match out.last() {
            None => b.matrix.clone(),
            Some(prev) => prev.matrix.add(&b.matrix)?,
        };
        out.push(FiniteRankOperator::from_matrix(m, format!("s({})", b.label))?);
    }
    Ok(out)
}

/// Nested kernels `F_1 ⊇ F_2 ⊇ … ⊇ F_L` of the seminorm levels inside a range.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration<S: Scalar> {
    pub range: Vec<Vec<S>>,
    /// `kernels[j-1]` is a basis of `F_j`.
    pub kernels: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> Filtration<S> {
    pub fn dims(&self) -> Vec<usize> {
        self.kernels.iter().map(Vec::len).collect()
    }
}

/// `F_j = Ker ‖·‖_j ∩ range(op)` for `j = 1..=top_level`, verified nested.
pub fn kernel_filtration<S: Scalar>(
    op: &FiniteRankOperator<S>,
    system: &SeminormSystem<S>,
    top_level: usize,
) -> Result<Filtration<S>> {
    if op.dim() != system.dim() {
        return Err(Error::Dimension {
            expected: system.dim(),
            got: op.dim(),
        });
    }
    let d = system.dim();
    let range = op.range_basis.clone();
    let mut kernels: Vec<Vec<Vec<S>>> = Vec::with_capacity(top_level);
    for j in 1..=top_level {
        let kernel = system.kernel_basis_dense(j, &range)?;
        if let Some(prev) = kernels.last() {
            let mut joined = prev.clone();
            joined.extend(kernel.iter().cloned());
            if linalg::rank_of(&joined, d) != prev.len() {
                return Err(Error::Soundness(format!(
                    "kernel of level {j} is not contained in the kernel of level {}",
                    j - 1
                )));
            }
        }
        kernels.push(kernel);
    }
    Ok(Filtration { range, kernels })
}

/// `E = H_0 ⊕ H_1 ⊕ … ⊕ H_{L-1} ⊕ F_L` with each `H_l` the orthogonal
/// complement of `F_{l+1}` inside `F_l` (and `F_0 = E`).
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<S: Scalar> {
    pub blocks: Vec<Vec<Vec<S>>>,
    pub tail: Vec<Vec<S>>,
}

impl<S: Scalar> Decomposition<S> {
    /// Basis adapted to the decomposition: `H_0` first, then `H_1`, …, then `F_L`.
    pub fn adapted_basis(&self) -> Vec<Vec<S>> {
        self.blocks
            .iter()
            .flatten()
            .chain(self.tail.iter())
            .cloned()
            .collect()
    }
}

pub fn select_complements<S: Scalar>(filtration: &Filtration<S>) -> Result<Decomposition<S>> {
    let d = filtration.range.first().map_or(0, Vec::len);
    let mut blocks = Vec::with_capacity(filtration.kernels.len());
    let mut outer = filtration.range.clone();
    for inner in &filtration.kernels {
        blocks.push(orthogonal_complement(&outer, inner, d)?);
        outer = inner.clone();
    }
    let decomposition = Decomposition {
        blocks,
        tail: outer,
    };
    let basis = decomposition.adapted_basis();
    if basis.len() != filtration.range.len() || linalg::rank_of(&basis, d) != basis.len() {
        return Err(Error::Soundness(
            "complements do not decompose the range".into(),
        ));
    }
    Ok(decomposition)
}

/// Basis of `{v ∈ span(outer) : v ⊥ inner}`.
fn orthogonal_complement<S: Scalar>(
    outer: &[Vec<S>],
    inner: &[Vec<S>],
    d: usize,
) -> Result<Vec<Vec<S>>> {
    if outer.is_empty() {
        return Ok(Vec::new());
    }
    if inner.is_empty() {
        return Ok(outer.to_vec());
    }
    let b = Matrix::from_columns(outer, d)?;
    let constraints = Matrix::from_rows_with_width(inner.to_vec(), d)?.mul(&b)?;
    constraints
        .nullspace()
        .iter()
        .map(|c| b.mul_vec(c))
        .collect()
}

/// A partition of the identity of `E_p` into rank-one projections `B_j`
/// with `max_j ‖B_j e‖_k ≤ R_p ‖e‖_k` on every controlled level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RankOneSplit<S: Scalar> {
    /// Adapted basis vectors `v_j`; `B_j = v_j w_jᵀ`.
    #[serde(with = "crate::scalar::serde_scalar::vec2")]
    pub basis: Vec<Vec<S>>,
    /// Dual functionals `w_j` with `w_iᵀ v_j = δ_ij`.
    #[serde(with = "crate::scalar::serde_scalar::vec2")]
    pub dual: Vec<Vec<S>>,
    /// `C_k` for each controlled level, `level_constants[k-1]`.
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub level_constants: Vec<S>,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub control_constant: S,
    pub norm_grading: Vec<usize>,
    /// Smallest level that is a norm on `E_p`.
    pub norm_level: usize,
    /// `dim H_0, dim H_1, …, dim F_L`.
    pub block_dims: Vec<usize>,
}

impl<S: Scalar> RankOneSplit<S> {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn pieces(&self) -> Vec<Matrix<S>> {
        self.basis
            .iter()
            .zip(&self.dual)
            .map(|(v, w)| Matrix::outer(v, w))
            .collect()
    }

    /// Coordinates of `e ∈ E_p` in the adapted basis.
    pub fn coordinates(&self, e: &[S]) -> Vec<S> {
        self.dual.iter().map(|w| linalg::dot(w, e)).collect()
    }
}

/// Splits the identity of `range(op)` into rank-one projections and
/// certifies the control constant on all levels of `system`.
pub fn rank_one_split<S: Scalar>(
    op: &FiniteRankOperator<S>,
    system: &SeminormSystem<S>,
) -> Result<RankOneSplit<S>> {
    if op.rank() == 0 {
        return Err(Error::ZeroOperator {
            label: op.label.clone(),
        });
    }
    let norm_level = system
        .norm_level_on(op.range_basis())?
        .ok_or_else(|| Error::NoNormLevel {
            label: op.label.clone(),
        })?;
    let levels = system.levels();
    let filtration = kernel_filtration(op, system, levels)?;
    let decomposition = select_complements(&filtration)?;
    let basis = decomposition.adapted_basis();
    let d = system.dim();
    let v = Matrix::from_columns(&basis, d)?;
    let w = v.left_inverse()?;
    let dual = w.row_vecs();

    let mut level_constants = Vec::with_capacity(levels);
    for k in 1..=levels {
        let form = system.level_form(k)?;
        let on_range = form.compose(&v)?;
        let mut c_k = S::zero();
        for (j, vj) in basis.iter().enumerate() {
            let size = form.value(vj);
            if size.is_zero() {
                continue;
            }
            let mut unit = vec![S::zero(); basis.len()];
            unit[j] = S::one();
            let coord_sup = on_range.maximize_linear(&unit)?.ok_or_else(|| {
                Error::Soundness(format!(
                    "projection onto adapted vector {} is unbounded at level {k}",
                    j + 1
                ))
            })?;
            c_k = c_k.max_of(size * coord_sup);
        }
        level_constants.push(c_k.certify_upper());
    }
    let control_constant = level_constants.iter().cloned().fold(S::zero(), S::max_of);
    let mut block_dims: Vec<usize> = decomposition.blocks.iter().map(Vec::len).collect();
    block_dims.push(decomposition.tail.len());
    Ok(RankOneSplit {
        basis,
        dual,
        level_constants,
        control_constant,
        norm_grading: (1..=levels).collect(),
        norm_level,
        block_dims,
    })
}

/// `N_p`: the least positive integer with `m_p R_p ≤ N_p`.
///
/// In float mode a product within the safety inflation of an integer counts
/// as that integer.
pub fn replication_count<S: Scalar>(rank: usize, control: &S) -> Result<u64> {
    let product = S::from_count(rank) * control.clone();
    if S::MODE == ScalarMode::Float {
        let v = product.to_f64();
        let near = v.round();
        if near >= 1.0 && (v - near).abs() <= 2.0 * (FLOAT_SAFETY - 1.0) * near {
            return Ok(near as u64);
        }
    }
    let n = product
        .ceil_u64()
        .ok_or_else(|| Error::Soundness(format!("invalid control constant {control}")))?;
    Ok(n.max(1))
}

/// One rank-one operator `u fᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RankOne<S: Scalar> {
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub u: Vec<S>,
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub f: Vec<S>,
}

impl<S: Scalar> RankOne<S> {
    pub fn apply(&self, x: &[S]) -> Vec<S> {
        linalg::scaled(&linalg::dot(&self.f, x), &self.u)
    }

    pub fn matrix(&self) -> Matrix<S> {
        Matrix::outer(&self.u, &self.f)
    }
}

/// The operators `C_i^p = N_p⁻¹ B_j^p`, `i = r m_p + j`, for one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScheduleBlock<S: Scalar> {
    pub rank: usize,
    pub replication: u64,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub control_constant: S,
    pub ops: Vec<RankOne<S>>,
    /// Largest observed `‖Σ_{i≤q} C_i e‖_k / ‖e‖_k` over the samples.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub max_prefix_ratio: S,
}

/// Builds the replicated block and checks on `samples ⊂ E_p` that
/// `Σ_i C_i = Id` on `E_p` and every prefix sum is bounded by `2‖e‖_k`.
pub fn scale_and_replicate<S: Scalar>(
    split: &RankOneSplit<S>,
    system: &SeminormSystem<S>,
    samples: &[Vec<S>],
) -> Result<ScheduleBlock<S>> {
    let m = split.rank();
    let n_p = replication_count(m, &split.control_constant)?;
    let inv = S::one() / S::from_u64(n_p).expect("replication count fits");
    let ops: Vec<RankOne<S>> = (0..n_p)
        .flat_map(|_| split.basis.iter().zip(&split.dual))
        .map(|(v, w)| RankOne {
            u: v.clone(),
            f: linalg::scaled(&inv, w),
        })
        .collect();

    for (j, v) in split.basis.iter().enumerate() {
        let mut total = vec![S::zero(); v.len()];
        for op in &ops {
            total = linalg::add(&total, &op.apply(v));
        }
        if !linalg::is_zero_vec(&linalg::sub(&total, v)) {
            return Err(Error::Soundness(format!(
                "replicated block does not reproduce adapted vector {}",
                j + 1
            )));
        }
    }

    let two = S::from_count(2);
    let mut max_ratio = S::zero();
    for e in samples {
        let coords = split.coordinates(e);
        let pieces: Vec<Vec<S>> = split
            .basis
            .iter()
            .zip(&coords)
            .map(|(v, c)| linalg::scaled(&(c.clone() * inv.clone()), v))
            .collect();
        for &k in &split.norm_grading {
            let bound = system.eval_dense(k, e)?;
            let mut prefix = vec![S::zero(); e.len()];
            for (q, piece) in (0..ops.len()).map(|i| (i + 1, &pieces[i % m])) {
                prefix = linalg::add(&prefix, piece);
                let value = system.eval_dense(k, &prefix)?;
                if !value.leq(&(two.clone() * bound.clone())) {
                    return Err(Error::Soundness(format!(
                        "prefix {q} at level {k}: {value} > 2 * {bound}"
                    )));
                }
                if bound.is_positive() {
                    max_ratio = max_ratio.max_of(value / bound.clone());
                }
            }
        }
    }

    Ok(ScheduleBlock {
        rank: m,
        replication: n_p,
        control_constant: split.control_constant.clone(),
        ops,
        max_prefix_ratio: max_ratio,
    })
}

/// `Ã_s = C_i^p A_p` with its origin `(p, i)` and the chosen generator `y_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScheduledOp<S: Scalar> {
    pub block: usize,
    pub position: usize,
    pub op: RankOne<S>,
    /// Spans `range(Ã_s)`, normalized so its first nonzero coordinate is 1.
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub generator: Vec<S>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BlockInfo<S: Scalar> {
    pub p: usize,
    pub rank: usize,
    pub replication: u64,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub control_constant: S,
    /// First and last global index `s` of the block (1-based, inclusive).
    pub first: usize,
    pub last: usize,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub max_prefix_ratio: S,
}

/// The flat family `(Ã_s)_s` with its block structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScheduledFamily<S: Scalar> {
    pub dim: usize,
    pub ops: Vec<ScheduledOp<S>>,
    pub blocks: Vec<BlockInfo<S>>,
}

impl<S: Scalar> ScheduledFamily<S> {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `(Ã_s x)_s`.
    pub fn apply_all(&self, x: &[S]) -> Vec<Vec<S>> {
        self.ops.iter().map(|s| s.op.apply(x)).collect()
    }

    pub fn total(&self) -> Matrix<S> {
        self.ops.iter().fold(Matrix::zeros(self.dim, self.dim), |acc, s| {
            acc.add(&s.op.matrix()).expect("schedule operators share the dimension")
        })
    }

    pub fn replication_counts(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.replication).collect()
    }
}

fn normalized_generator<S: Scalar>(u: &[S]) -> Vec<S> {
    match u.iter().find(|v| !v.is_zero()) {
        Some(lead) => {
            let inv = S::one() / lead.clone();
            linalg::scaled(&inv, u)
        }
        None => u.to_vec(),
    }
}

/// Concatenates blocks `p = 1..P` into `Ã_s := C_i^p A_p` with
/// `s = m_1 N_1 + … + m_{p-1} N_{p-1} + i`, and checks `Σ_s Ã_s = Σ_p A_p`.
pub fn flatten_schedule<S: Scalar>(
    family: &[FiniteRankOperator<S>],
    blocks: &[ScheduleBlock<S>],
) -> Result<ScheduledFamily<S>> {
    if family.len() != blocks.len() {
        return Err(Error::Dimension {
            expected: family.len(),
            got: blocks.len(),
        });
    }
    let dim = family.first().map_or(0, FiniteRankOperator::dim);
    let mut ops = Vec::new();
    let mut infos = Vec::with_capacity(blocks.len());
    for (p, (a, block)) in family.iter().zip(blocks).enumerate() {
        let first = ops.len() + 1;
        for (i, c) in block.ops.iter().enumerate() {
            let f = a.matrix().left_mul_vec(&c.f)?;
            if linalg::is_zero_vec(&f) || linalg::is_zero_vec(&c.u) {
                return Err(Error::Soundness(format!(
                    "scheduled operator ({}, {}) vanishes",
                    p + 1,
                    i + 1
                )));
            }
            ops.push(ScheduledOp {
                block: p + 1,
                position: i + 1,
                generator: normalized_generator(&c.u),
                op: RankOne { u: c.u.clone(), f },
            });
        }
        infos.push(BlockInfo {
            p: p + 1,
            rank: block.rank,
            replication: block.replication,
            control_constant: block.control_constant.clone(),
            first,
            last: ops.len(),
            max_prefix_ratio: block.max_prefix_ratio.clone(),
        });
    }
    let schedule = ScheduledFamily {
        dim,
        ops,
        blocks: infos,
    };
    let expected = family.iter().try_fold(Matrix::zeros(dim, dim), |acc, a| acc.add(a.matrix()))?;
    if !schedule.total().approx_eq(&expected) {
        return Err(Error::Construction(
            "schedule total differs from the sum of the family".into(),
        ));
    }
    Ok(schedule)
}

/// Runs the whole construction: one split and block per operator of the
/// family, with `samples_per_block` random vectors of each range used for
/// the prefix-bound check.
pub fn build_schedule<S: Scalar, R: Rng + ?Sized>(
    system: &SeminormSystem<S>,
    family: &[FiniteRankOperator<S>],
    samples_per_block: usize,
    rng: &mut R,
) -> Result<(Vec<RankOneSplit<S>>, ScheduledFamily<S>)> {
    if family.is_empty() {
        return Err(Error::Degenerate("empty operator family".into()));
    }
    let mut splits = Vec::with_capacity(family.len());
    let mut blocks = Vec::with_capacity(family.len());
    for a in family {
        let split = rank_one_split(a, system)?;
        let samples: Vec<Vec<S>> = (0..samples_per_block)
            .map(|_| sampling::in_span(rng, a.range_basis(), system.dim()))
            .collect();
        blocks.push(scale_and_replicate(&split, system, &samples)?);
        splits.push(split);
    }
    let schedule = flatten_schedule(family, &blocks)?;
    Ok((splits, schedule))
}
