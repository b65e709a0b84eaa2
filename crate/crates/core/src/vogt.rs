//! Vogt's triple-indexed nuclear space at truncation: the comparison norm,
//! nuclearity sums, norm positivity, and sequences that are Cauchy at a high
//! level, tend to zero at a low level and stay bounded below in between.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling;
use crate::scalar::Scalar;
use crate::seminorm::{RhoFormula, RhoTable, SeminormSystem};
use crate::space::{IndexTriple, TruncatedVector, TruncationBox};

pub const DEFAULT_WITNESS_LENGTH: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct VogtInstance<S: Scalar> {
    pub system: SeminormSystem<S>,
    pub rho: RhoTable<S>,
}

impl<S: Scalar> VogtInstance<S> {
    pub fn new(bx: TruncationBox, levels: usize, rho: RhoTable<S>) -> Result<Self> {
        let Some((_, mu_max, nu_max)) = bx.triple_bounds() else {
            return Err(Error::Input("a Vogt instance needs a triple box".into()));
        };
        if rho.mu_max() < mu_max || rho.nu_max() < nu_max {
            return Err(Error::Domain {
                index: format!("rho table {}x{}", rho.mu_max(), rho.nu_max()),
                bounds: bx.to_string(),
            });
        }
        rho.validate()?;
        let system = SeminormSystem::vogt(bx, levels, rho.clone())?;
        Ok(VogtInstance { system, rho })
    }

    /// `ρ(μ, ν) = 2^{-μ}` on the given box.
    pub fn dyadic(n_max: usize, mu_max: usize, nu_max: usize, levels: usize) -> Result<Self> {
        let bx = TruncationBox::triple(n_max, mu_max, nu_max)?;
        Self::new(bx, levels, RhoTable::dyadic(mu_max, nu_max))
    }

    pub fn bounds(&self) -> (usize, usize, usize) {
        self.system.bx().triple_bounds().expect("validated triple box")
    }

    pub fn unit(&self, n: usize, mu: usize, nu: usize) -> Result<TruncatedVector<S>> {
        TruncatedVector::unit(*self.system.bx(), IndexTriple::new(n, mu, nu)?)
    }

    /// `‖x‖'_p = 2 (Σ_{ν ≤ p+1} |x^n_{μν}| p^{n+μ+ν} + Σ_{ν > p+1} |ρ x^n_{μν} − x^{n+1}_{μν}| p^{n+μ+ν})`.
    pub fn comparison_norm(&self, p: usize, x: &TruncatedVector<S>) -> Result<S> {
        let (n_max, mu_max, nu_max) = self.bounds();
        let base = S::from_count(p);
        let powers: Vec<S> = (0..=(n_max + mu_max + nu_max) as u32)
            .map(|e| base.pow(e))
            .collect();
        let mut total = S::zero();
        for n in 1..=n_max {
            for mu in 1..=mu_max {
                for nu in 1..=nu_max {
                    let here = x.get_or_zero(IndexTriple { n, mu, nu });
                    let term = if nu <= p + 1 {
                        here.abs()
                    } else {
                        let next = x.get_or_zero(IndexTriple { n: n + 1, mu, nu });
                        if here.is_zero() && next.is_zero() {
                            continue;
                        }
                        (self.rho.get(mu, nu)? * here - next).abs()
                    };
                    if !term.is_zero() {
                        total = total + term * powers[n + mu + nu].clone();
                    }
                }
            }
        }
        Ok(S::from_count(2) * total)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ComparisonViolation<S: Scalar> {
    pub p: usize,
    pub sample: usize,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub lhs: S,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub rhs: S,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ComparisonReport<S: Scalar> {
    pub samples: usize,
    pub levels: usize,
    pub violations: Vec<ComparisonViolation<S>>,
}

impl<S: Scalar> ComparisonReport<S> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `‖x‖_p ≤ ‖x‖'_p` on every sample and every level `p`.
pub fn comparison_inequality_check<S: Scalar>(
    instance: &VogtInstance<S>,
    samples: &[TruncatedVector<S>],
) -> Result<ComparisonReport<S>> {
    let levels = instance.system.levels();
    let mut violations = Vec::new();
    for (i, x) in samples.iter().enumerate() {
        for p in 1..=levels {
            let lhs = instance.system.eval(p, x)?;
            let rhs = instance.comparison_norm(p, x)?;
            if !lhs.leq(&rhs) {
                violations.push(ComparisonViolation { p, sample: i, lhs, rhs });
            }
        }
    }
    Ok(ComparisonReport {
        samples: samples.len(),
        levels,
        violations,
    })
}

/// `count` random vectors with at most `nnz` nonzero coordinates.
pub fn sparse_samples<S: Scalar, R: Rng + ?Sized>(
    instance: &VogtInstance<S>,
    count: usize,
    nnz: usize,
    rng: &mut R,
) -> Vec<TruncatedVector<S>> {
    (0..count)
        .map(|_| sampling::sparse(rng, *instance.system.bx(), nnz))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NuclearityCertificate<S: Scalar> {
    pub p: usize,
    /// `r = p/(p+1)`.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub ratio: S,
    /// Total weights `n+μ+ν` indexing the partial sums, from 3 upwards.
    pub weights: Vec<usize>,
    /// Sum of `‖e_{nμν}‖'_p ‖u_{nμν}‖_{p+1}` over box triples of weight at most `weights[i]`.
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub partial_sums: Vec<S>,
    /// `Σ_{k ≤ weights[i]} count(k) r^k`.
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub closed_form: Vec<S>,
    /// `(r/(1−r))³`.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub limit: S,
    /// Every term equalled `r^{n+μ+ν}`.
    pub terms_match: bool,
}

impl<S: Scalar> NuclearityCertificate<S> {
    pub fn passed(&self) -> bool {
        self.terms_match
            && self.partial_sums.windows(2).all(|w| w[0].leq(&w[1]))
            && self
                .partial_sums
                .iter()
                .zip(&self.closed_form)
                .all(|(a, b)| a.approx_eq(b) && a.leq(&self.limit))
    }
}

/// Sums `‖e_{nμν}‖'_p · ‖u_{nμν}‖_{p+1}` over the box, with the terms read
/// from the weight table: `p^w` against `(p+1)^{-w}` when `ν ≤ p+1`, and
/// `ρ p^w` against `ρ^{-1}(p+1)^{-w}` otherwise.
pub fn nuclearity_certificate<S: Scalar>(
    instance: &VogtInstance<S>,
    p: usize,
) -> Result<NuclearityCertificate<S>> {
    if p == 0 {
        return Err(Error::Level {
            level: p,
            levels: instance.system.levels(),
        });
    }
    let (n_max, mu_max, nu_max) = instance.bounds();
    let top = n_max + mu_max + nu_max;
    let base = S::from_count(p);
    let next = S::from_count(p + 1);
    let ratio = base.clone() / next.clone();
    let mut by_weight = vec![S::zero(); top + 1];
    let mut counts = vec![0usize; top + 1];
    let mut terms_match = true;
    for n in 1..=n_max {
        for mu in 1..=mu_max {
            for nu in 1..=nu_max {
                let w = n + mu + nu;
                let pw = base.pow(w as u32);
                let qw = next.pow(w as u32);
                let (e_norm, u_norm) = if nu <= p + 1 {
                    (pw, S::one() / qw)
                } else {
                    let r = instance.rho.get(mu, nu)?;
                    (r.clone() * pw, S::one() / (r * qw))
                };
                let term = e_norm * u_norm;
                terms_match &= term.approx_eq(&ratio.pow(w as u32));
                by_weight[w] = by_weight[w].clone() + term;
                counts[w] += 1;
            }
        }
    }
    let mut weights = Vec::new();
    let mut partial_sums = Vec::new();
    let mut closed_form = Vec::new();
    let mut acc = S::zero();
    let mut acc_closed = S::zero();
    for w in 3..=top {
        acc = acc + by_weight[w].clone();
        acc_closed = acc_closed + S::from_count(counts[w]) * ratio.pow(w as u32);
        weights.push(w);
        partial_sums.push(acc.clone());
        closed_form.push(acc_closed.clone());
    }
    let per_index = ratio.clone() / (S::one() - ratio.clone());
    Ok(NuclearityCertificate {
        p,
        limit: per_index.pow(3),
        ratio,
        weights,
        partial_sums,
        closed_form,
        terms_match,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DivergenceCertificate<S: Scalar> {
    pub mu: usize,
    pub nu: usize,
    /// Smallest `q` with `q ρ(μ, ν) > 1`.
    pub q: u64,
    /// `q ρ(μ, ν)`, the ratio of the geometric series `Σ (ρq)^{n−1}` that
    /// `‖·‖_q` would have to sum along `x^n = ρ^{n−1} x^1`.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub growth: S,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormPositivityReport<S: Scalar> {
    pub p: usize,
    pub dim: usize,
    pub rank: usize,
    pub certificates: Vec<DivergenceCertificate<S>>,
}

impl<S: Scalar> NormPositivityReport<S> {
    pub fn is_norm(&self) -> bool {
        self.rank == self.dim
    }
}

/// Smallest integer `q` with `q ρ > 1`.
pub fn divergence_threshold<S: Scalar>(rho: &S) -> Result<u64> {
    let inv = S::one() / rho.clone();
    let mut q = inv
        .ceil_u64()
        .ok_or_else(|| Error::Input(format!("rho value {rho} has no integer bound")))?;
    while !(S::from_u64(q).expect("q fits") * rho.clone() > S::one()) {
        q += 1;
    }
    Ok(q)
}

/// Checks that the coordinate functionals of level `p` have full rank on the
/// box and lists the divergence threshold for every difference coordinate.
pub fn norm_positivity_check<S: Scalar>(
    instance: &VogtInstance<S>,
    p: usize,
) -> Result<NormPositivityReport<S>> {
    let form = instance.system.level_form(p)?;
    let rank = form.stacked_rows().rank();
    let dim = instance.system.dim();
    if rank != dim {
        return Err(Error::Soundness(format!(
            "level {p} has a kernel of dimension {} on the box",
            dim - rank
        )));
    }
    let (_, mu_max, nu_max) = instance.bounds();
    let mut certificates = Vec::new();
    for mu in 1..=mu_max {
        for nu in (p + 1)..=nu_max {
            let rho = instance.rho.get(mu, nu)?;
            let q = divergence_threshold(&rho)?;
            certificates.push(DivergenceCertificate {
                mu,
                nu,
                q,
                growth: S::from_u64(q).expect("q fits") * rho,
            });
        }
    }
    Ok(NormPositivityReport {
        p,
        dim,
        rank,
        certificates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TracePoint<S: Scalar> {
    #[serde(with = "crate::scalar::serde_scalar")]
    pub direct: S,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub closed: S,
}

impl<S: Scalar> TracePoint<S> {
    pub fn agrees(&self) -> bool {
        self.direct.approx_eq(&self.closed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CauchyPoint<S: Scalar> {
    pub l: usize,
    pub m: usize,
    #[serde(flatten)]
    pub value: TracePoint<S>,
    /// `q^{μ+p} (ρq)^{l+1} / (1 − ρq)`.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub tail_bound: S,
}

/// `x_m = Σ_{n≤m} ρ^n e_{n,μ,p}` for `m = 1..=M`, with `ρ = ρ(μ, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BapFailureWitness<S: Scalar> {
    pub p0: usize,
    pub p: usize,
    pub q: usize,
    pub mu: usize,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub rho: S,
    pub length: usize,
    /// `‖x_m − x_l‖_q` for all `l < m ≤ M`.
    pub cauchy: Vec<CauchyPoint<S>>,
    /// `‖x_m‖_{p0}`.
    pub decay: Vec<TracePoint<S>>,
    /// `‖x_m‖_p`.
    pub floor_trace: Vec<TracePoint<S>>,
    /// `p^{μ+p+1} ρ`.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub floor: S,
}

impl<S: Scalar> BapFailureWitness<S> {
    pub fn oracle_agrees(&self) -> bool {
        self.cauchy.iter().all(|c| c.value.agrees())
            && self.decay.iter().all(TracePoint::agrees)
            && self.floor_trace.iter().all(TracePoint::agrees)
    }

    pub fn cauchy_within_tail(&self) -> bool {
        self.cauchy.iter().all(|c| c.value.direct.leq(&c.tail_bound))
    }

    pub fn decay_strict(&self) -> bool {
        self.decay.windows(2).all(|w| w[1].direct < w[0].direct)
    }

    pub fn floor_holds(&self) -> bool {
        self.floor_trace.iter().all(|t| self.floor.leq(&t.direct))
    }

    pub fn passed(&self) -> bool {
        self.oracle_agrees() && self.cauchy_within_tail() && self.decay_strict() && self.floor_holds()
    }

    /// `‖x_m − x_l‖_q` by `(l, m)`.
    pub fn cauchy_value(&self, l: usize, m: usize) -> Option<&S> {
        self.cauchy
            .iter()
            .find(|c| c.l == l && c.m == m)
            .map(|c| &c.value.direct)
    }
}

/// `Σ_{n=a}^{b} t^n`.
fn geometric<S: Scalar>(t: &S, a: usize, b: usize) -> S {
    if b < a {
        return S::zero();
    }
    let count = (b - a + 1) as u32;
    if t.approx_eq(&S::one()) {
        return S::from_count(count as usize);
    }
    t.pow(a as u32) * (S::one() - t.pow(count)) / (S::one() - t.clone())
}

/// Smallest `μ` with `ρ(μ, p) q < 1` when the table has a closed formula.
fn required_mu<S: Scalar>(rho: &RhoTable<S>, q: usize) -> Option<usize> {
    match rho.formula {
        Some(RhoFormula::Dyadic) => {
            let mut mu = 1;
            while (1u128 << mu.min(127)) <= q as u128 {
                mu += 1;
            }
            Some(mu)
        }
        None => None,
    }
}

pub fn bap_failure_witness<S: Scalar>(
    instance: &VogtInstance<S>,
    p0: usize,
    q: usize,
    length: usize,
) -> Result<BapFailureWitness<S>> {
    let p = p0 + 1;
    if p0 == 0 || q < p {
        return Err(Error::Input(format!(
            "need p0 >= 1 and q >= p0 + 1, got p0 = {p0}, q = {q}"
        )));
    }
    if length == 0 {
        return Err(Error::Input("witness length must be positive".into()));
    }
    instance.system.check_level(q)?;
    let (n_max, mu_max, nu_max) = instance.bounds();
    if nu_max < p {
        return Err(Error::BoxTooSmall(format!("nu_max must be at least {p}")));
    }
    if n_max < length {
        return Err(Error::BoxTooSmall(format!(
            "n_max must be at least the witness length {length}"
        )));
    }
    let qs = S::from_count(q);
    let mut mu = None;
    for m in 1..=mu_max {
        if instance.rho.get(m, p)? * qs.clone() < S::one() {
            mu = Some(m);
            break;
        }
    }
    let Some(mu) = mu else {
        return Err(Error::BoxTooSmall(match required_mu(&instance.rho, q) {
            Some(need) => format!("no row with rho(mu, {p}) * {q} < 1; mu_max must be at least {need}"),
            None => format!("no row with rho(mu, {p}) * {q} < 1 in the table"),
        }));
    };
    let rho = instance.rho.get(mu, p)?;
    let bx = *instance.system.bx();

    let mut xs = Vec::with_capacity(length);
    let mut x = TruncatedVector::zeros(bx);
    for n in 1..=length {
        x.set(IndexTriple { n, mu, nu: p }, rho.pow(n as u32))?;
        xs.push(x.clone());
    }

    let ps = S::from_count(p);
    let p0s = S::from_count(p0);
    let rq = rho.clone() * qs.clone();
    let q_scale = qs.pow((mu + p) as u32);
    let mut cauchy = Vec::new();
    for m in 1..=length {
        for l in 1..m {
            let direct = instance.system.eval(q, &xs[m - 1].sub(&xs[l - 1])?)?;
            let closed = q_scale.clone() * geometric(&rq, l + 1, m);
            let tail_bound =
                q_scale.clone() * rq.pow((l + 1) as u32) / (S::one() - rq.clone());
            cauchy.push(CauchyPoint {
                l,
                m,
                value: TracePoint { direct, closed },
                tail_bound,
            });
        }
    }
    let decay = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let m = i + 1;
            Ok(TracePoint {
                direct: instance.system.eval(p0, x)?,
                closed: p0s.pow((mu + p - 1) as u32) * (rho.clone() * p0s.clone()).pow((m + 1) as u32),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rp = rho.clone() * ps.clone();
    let floor_trace = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            Ok(TracePoint {
                direct: instance.system.eval(p, x)?,
                closed: ps.pow((mu + p) as u32) * geometric(&rp, 1, i + 1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BapFailureWitness {
        p0,
        p,
        q,
        mu,
        floor: ps.pow((mu + p + 1) as u32) * rho.clone(),
        rho,
        length,
        cauchy,
        decay,
        floor_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn comparison_on_a_difference_coordinate() {
        let inst = VogtInstance::<Q>::dyadic(3, 3, 4, 3).unwrap();
        for p in 1..=3 {
            let x = inst.unit(1, 1, p + 1).unwrap();
            let lhs = inst.system.eval(p, &x).unwrap();
            let w = Scalar::pow(&Q::from_count(p), (2 + p + 1) as u32);
            assert_eq!(lhs, q(1, 2) * w.clone());
            let rhs = inst.comparison_norm(p, &x).unwrap();
            assert_eq!(rhs, q(2, 1) * w);
            assert!(lhs < rhs);
        }
        let zero = TruncatedVector::zeros(*inst.system.bx());
        let report = comparison_inequality_check(&inst, &[zero]).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn nuclearity_limits() {
        let inst = VogtInstance::<Q>::dyadic(4, 4, 4, 3).unwrap();
        let c1 = nuclearity_certificate(&inst, 1).unwrap();
        assert_eq!(c1.limit, q(1, 1));
        assert!(c1.passed());
        let c2 = nuclearity_certificate(&inst, 2).unwrap();
        assert_eq!(c2.limit, q(8, 1));
        assert!(c2.passed());
        // Box of one triple: a single term 2^{-3}.
        let one = VogtInstance::<Q>::dyadic(1, 1, 1, 1).unwrap();
        assert_eq!(nuclearity_certificate(&one, 1).unwrap().partial_sums, vec![q(1, 8)]);
    }

    #[test]
    fn norm_positivity_and_thresholds() {
        let inst = VogtInstance::<Q>::dyadic(3, 3, 3, 3).unwrap();
        let r = norm_positivity_check(&inst, 1).unwrap();
        assert!(r.is_norm());
        let c = r.certificates.iter().find(|c| c.mu == 2 && c.nu == 2).unwrap();
        assert_eq!(c.q, 5);
        assert_eq!(c.growth, q(5, 4));
        assert!(norm_positivity_check(&inst, 3).unwrap().certificates.is_empty());
        assert_eq!(divergence_threshold(&q(1, 1)).unwrap(), 2);
    }

    #[test]
    fn witness_values() {
        let inst = VogtInstance::<Q>::dyadic(5, 3, 3, 3).unwrap();
        let w = bap_failure_witness(&inst, 1, 3, 5).unwrap();
        assert_eq!((w.mu, w.p), (2, 2));
        assert_eq!(w.decay[2].direct, q(1, 256));
        assert_eq!(w.floor, q(8, 1));
        assert_eq!(w.floor_trace[2].direct, q(14, 1));
        assert_eq!(w.cauchy_value(3, 5), Some(&q(45927, 1024)));
        assert!(w.passed());
    }

    #[test]
    fn witness_of_length_one() {
        let inst = VogtInstance::<Q>::dyadic(1, 2, 2, 3).unwrap();
        let w = bap_failure_witness(&inst, 1, 3, 1).unwrap();
        assert!(w.cauchy.is_empty());
        assert_eq!(w.decay[0].direct, q(1, 16));
        assert!(w.passed());
    }

    #[test]
    fn witness_box_errors() {
        let inst = VogtInstance::<Q>::dyadic(5, 1, 3, 3).unwrap();
        match bap_failure_witness(&inst, 1, 3, 5) {
            Err(Error::BoxTooSmall(msg)) => assert!(msg.contains("at least 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let short = VogtInstance::<Q>::dyadic(2, 3, 3, 3).unwrap();
        assert!(matches!(bap_failure_witness(&short, 1, 3, 5), Err(Error::BoxTooSmall(_))));
        assert!(matches!(bap_failure_witness(&inst, 1, 1, 5), Err(Error::Input(_))));
    }
}
