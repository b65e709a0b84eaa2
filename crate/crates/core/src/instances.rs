//! Ready-made operator families for the construction suite.

use rand::Rng;

use crate::error::Result;
use crate::linalg::Matrix;
use crate::operator::{telescope, FiniteRankOperator};
use crate::polyhedral::Combine;
use crate::scalar::Scalar;
use crate::seminorm::SeminormSystem;

/// A seminorm system together with a finite-rank family summing to the identity.
#[derive(Clone, Debug)]
pub struct Instance<S: Scalar> {
    pub name: String,
    pub system: SeminormSystem<S>,
    pub family: Vec<FiniteRankOperator<S>>,
}

/// `ℝ¹` with the identity and `levels` copies of `|·|`.
pub fn identity_1d<S: Scalar>(levels: usize) -> Result<Instance<S>> {
    let system = SeminormSystem::max_prefix(1, levels)?;
    let family = vec![FiniteRankOperator::from_matrix(Matrix::identity(1), "I")?];
    Ok(Instance {
        name: "identity-1d".into(),
        system,
        family,
    })
}

/// Telescoped coordinate projections `P_n − P_{n−1}` on `ℝ^d` with
/// `p_k(x) = max_{j ≤ k} |x_j|`.
pub fn telescoped_projections<S: Scalar>(d: usize) -> Result<Instance<S>> {
    let system = SeminormSystem::max_prefix(d, d)?;
    let partial = (1..=d)
        .map(|n| {
            let mut m = Matrix::zeros(d, d);
            for i in 0..n {
                m[(i, i)] = S::one();
            }
            FiniteRankOperator::from_matrix(m, format!("P{n}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance {
        name: format!("telescoped-{d}d"),
        system,
        family: telescope(&partial)?,
    })
}

/// A unimodular matrix `L U` with unit diagonals and entries of `L`, `U` in `{-1, 0, 1}`.
fn unimodular<S: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix<S> {
    let mut lower = Matrix::identity(d);
    let mut upper = Matrix::identity(d);
    for i in 0..d {
        for j in 0..i {
            lower[(i, j)] = S::from_ratio(rng.gen_range(-1..=1), 1);
            upper[(j, i)] = S::from_ratio(rng.gen_range(-1..=1), 1);
        }
    }
    lower.mul(&upper).expect("square factors")
}

/// `A_p = Σ_{i ∈ G_p} q_i q'_i` for the columns `q_i` of a random unimodular `Q`,
/// the rows `q'_i` of `Q^{-1}`, and consecutive groups `G_p` of size 1 or 2.
/// The seminorms are weighted maxima with positive weights nondecreasing in `k`.
pub fn random_low_rank<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    levels: usize,
) -> Result<Instance<S>> {
    let q = unimodular::<S, R>(rng, d);
    let q_inv = q.inverse()?;
    let mut family = Vec::new();
    let mut i = 0;
    while i < d {
        let size = if i + 1 < d { rng.gen_range(1..=2) } else { 1 };
        let mut a = Matrix::zeros(d, d);
        for c in i..i + size {
            a = a.add(&Matrix::outer(&q.column(c), q_inv.row(c)))?;
        }
        family.push(FiniteRankOperator::from_matrix(a, format!("A{}", family.len() + 1))?);
        i += size;
    }
    let mut weights = Vec::with_capacity(levels);
    let mut row: Vec<S> = (0..d).map(|_| S::from_ratio(rng.gen_range(1..=3), 1)).collect();
    for _ in 0..levels {
        weights.push(row.clone());
        row = row
            .into_iter()
            .map(|w| w + S::from_ratio(rng.gen_range(0..=2), 1))
            .collect();
    }
    Ok(Instance {
        name: format!("random-rank2-{d}d"),
        system: SeminormSystem::koethe(Combine::Max, weights)?,
        family,
    })
}

/// The three standard instances: 1-D identity, 3-D telescoped projections and
/// a random rank-≤2 family on `ℝ^6`.
pub fn standard<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<Instance<S>>> {
    Ok(vec![
        identity_1d(3)?,
        telescoped_projections(3)?,
        random_low_rank(rng, 6, 3)?,
    ])
}
