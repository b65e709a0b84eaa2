//! Random test vectors with small exact coordinates.

use rand::Rng;

use crate::linalg;
use crate::scalar::Scalar;
use crate::space::{TruncatedVector, TruncationBox};

/// `a / b` with `a ∈ [-6, 6]`, `b ∈ [1, 4]`.
pub fn small_scalar<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> S {
    S::from_ratio(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

pub fn vector<S: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<S> {
    (0..d).map(|_| small_scalar(rng)).collect()
}

/// A random combination of `basis`.
pub fn in_span<S: Scalar, R: Rng + ?Sized>(rng: &mut R, basis: &[Vec<S>], d: usize) -> Vec<S> {
    let mut out = vec![S::zero(); d];
    for b in basis {
        let c: S = small_scalar(rng);
        linalg::axpy(&c, b, &mut out);
    }
    out
}

/// A vector with at most `nnz` nonzero coordinates at random positions.
pub fn sparse<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    bx: TruncationBox,
    nnz: usize,
) -> TruncatedVector<S> {
    let mut coords = vec![S::zero(); bx.dim()];
    for _ in 0..nnz {
        let i = rng.gen_range(0..bx.dim());
        coords[i] = small_scalar(rng);
    }
    TruncatedVector::from_dense(bx, coords).expect("coordinates match the box")
}
