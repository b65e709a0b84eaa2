//! Finite-evidence diagnostics for countable normability.
//!
//! A family of vectors is tested for three traces at once: Cauchy at a high
//! level `j`, tending to zero at a low level, and bounded below at a middle
//! level. Only a closed-form floor can turn a family into a refutation; raw
//! traces alone never do.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::operator::FiniteRankOperator;
use crate::pelczynski::partial_sum_bounds;
use crate::scalar::Scalar;
use crate::seminorm::{SeminormKind, SeminormSystem};
use crate::vogt::BapFailureWitness;

/// A finite trace "decays" when its last value is at most this fraction of its first.
pub const DEFAULT_DECAY_TOLERANCE: f64 = 1e-6;

/// `‖x_m − x_l‖_level ≤ scale · ratio^{l+1}` for `l < m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TailBound<S: Scalar> {
    pub level: usize,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub scale: S,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub ratio: S,
}

/// `‖x_{m+1}‖_level ≤ ratio · ‖x_m‖_level` with `ratio < 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DecayRatio<S: Scalar> {
    pub level: usize,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub ratio: S,
}

/// `‖x_m‖_level ≥ value > 0` for every `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Floor<S: Scalar> {
    pub level: usize,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub value: S,
}

/// Closed-form facts about a family, each tied to the level it was derived at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClosedForms<S: Scalar> {
    #[serde(default)]
    pub cauchy_tail: Option<TailBound<S>>,
    #[serde(default)]
    pub decay: Option<DecayRatio<S>>,
    #[serde(default)]
    pub floor: Option<Floor<S>>,
}

impl<S: Scalar> Default for ClosedForms<S> {
    fn default() -> Self {
        ClosedForms {
            cauchy_tail: None,
            decay: None,
            floor: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Evidence<S: Scalar> {
    pub label: String,
    #[serde(with = "crate::scalar::serde_scalar::vec2")]
    pub vectors: Vec<Vec<S>>,
    #[serde(default)]
    pub closed: ClosedForms<S>,
}

impl<S: Scalar> Evidence<S> {
    pub fn raw(label: impl Into<String>, vectors: Vec<Vec<S>>) -> Self {
        Evidence {
            label: label.into(),
            vectors,
            closed: ClosedForms::default(),
        }
    }

    /// The witness sequence with its geometric tail bound, decay ratio and floor.
    pub fn from_witness(witness: &BapFailureWitness<S>, system: &SeminormSystem<S>) -> Result<Self> {
        let bx = *system.bx();
        let mut vectors = Vec::with_capacity(witness.length);
        let mut x = vec![S::zero(); system.dim()];
        for n in 1..=witness.length {
            let at = bx.flat(&crate::space::IndexTriple::new(n, witness.mu, witness.p)?.into())?;
            x[at] = witness.rho.pow(n as u32);
            vectors.push(x.clone());
        }
        let qs = S::from_count(witness.q);
        let rq = witness.rho.clone() * qs.clone();
        let scale = qs.pow((witness.mu + witness.p) as u32) / (S::one() - rq.clone());
        Ok(Evidence {
            label: format!("witness(p0={}, q={})", witness.p0, witness.q),
            vectors,
            closed: ClosedForms {
                cauchy_tail: Some(TailBound {
                    level: witness.q,
                    scale,
                    ratio: rq,
                }),
                decay: Some(DecayRatio {
                    level: witness.p0,
                    ratio: witness.rho.clone() * S::from_count(witness.p0),
                }),
                floor: Some(Floor {
                    level: witness.p,
                    value: witness.floor.clone(),
                }),
            },
        })
    }
}

/// A family with its measured Cauchy modulus at level `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CauchyFamily<S: Scalar> {
    pub level: usize,
    pub evidence: Evidence<S>,
    /// `tail[l-1] = max_{m, m' ≥ l} ‖x_m − x_{m'}‖_j`, nonincreasing in `l`.
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub tail: Vec<S>,
}

impl<S: Scalar> CauchyFamily<S> {
    pub fn new(system: &SeminormSystem<S>, level: usize, evidence: Evidence<S>) -> Result<Self> {
        system.check_level(level)?;
        let xs = &evidence.vectors;
        let mut tail = vec![S::zero(); xs.len()];
        for l in (0..xs.len()).rev() {
            let mut widest = tail.get(l + 1).cloned().unwrap_or_else(S::zero);
            for m in (l + 1)..xs.len() {
                widest = widest.max_of(system.eval_dense(level, &linalg::sub(&xs[m], &xs[l]))?);
            }
            tail[l] = widest;
        }
        Ok(CauchyFamily { level, evidence, tail })
    }

    /// `N(ε)`: the first index from which all pairwise distances are at most `eps`.
    pub fn modulus(&self, eps: &S) -> Option<usize> {
        self.tail.iter().position(|t| t.leq(eps)).map(|i| i + 1)
    }

    pub fn len(&self) -> usize {
        self.evidence.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evidence.vectors.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Consistent,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DiagnosticVerdict<S: Scalar> {
    pub predicate: String,
    /// Level whose trace must tend to zero.
    pub k0: usize,
    /// Level whose trace is tested for a positive floor.
    pub k: usize,
    /// Level at which the family is Cauchy.
    pub j: usize,
    pub outcome: Outcome,
    /// `false` when no family was supplied.
    pub evidence: bool,
    pub family: Option<String>,
    pub cauchy: bool,
    pub decays: bool,
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub cauchy_tail: Vec<S>,
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub decay_trace: Vec<S>,
    #[serde(with = "crate::scalar::serde_scalar::vec")]
    pub floor_trace: Vec<S>,
    #[serde(with = "crate::scalar::serde_scalar::option")]
    pub floor: Option<S>,
    pub detail: String,
}

impl<S: Scalar> DiagnosticVerdict<S> {
    fn vacuous(predicate: &str, k0: usize, k: usize, j: usize) -> Self {
        DiagnosticVerdict {
            predicate: predicate.into(),
            k0,
            k,
            j,
            outcome: Outcome::Consistent,
            evidence: false,
            family: None,
            cauchy: false,
            decays: false,
            cauchy_tail: Vec::new(),
            decay_trace: Vec::new(),
            floor_trace: Vec::new(),
            floor: None,
            detail: "no evidence".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Tolerances<S: Scalar> {
    #[serde(with = "crate::scalar::serde_scalar")]
    pub decay: S,
}

impl<S: Scalar> Default for Tolerances<S> {
    fn default() -> Self {
        Tolerances {
            decay: S::from_f64(DEFAULT_DECAY_TOLERANCE).expect("tolerance is finite"),
        }
    }
}

fn heuristic_decay<S: Scalar>(trace: &[S], tol: &S) -> bool {
    match (trace.first(), trace.last()) {
        (Some(first), Some(last)) => last.leq(&(tol.clone() * first.clone())),
        _ => false,
    }
}

/// Runs the three-trace test: Cauchy at `j`, decay at `k0`, floor at `k`.
pub fn three_trace_test<S: Scalar>(
    predicate: &str,
    system: &SeminormSystem<S>,
    k0: usize,
    k: usize,
    family: &CauchyFamily<S>,
    tol: &Tolerances<S>,
) -> Result<DiagnosticVerdict<S>> {
    system.check_level(k0)?;
    system.check_level(k)?;
    let j = family.level;
    let xs = &family.evidence.vectors;
    if xs.len() < 3 {
        return Err(Error::InsufficientData { len: xs.len() });
    }
    let closed = &family.evidence.closed;
    let mut notes = Vec::new();

    // Cauchy: a verified geometric tail bound at a level ≥ j, else the modulus heuristic.
    let cauchy = match &closed.cauchy_tail {
        Some(TailBound { level, scale, ratio }) if *level >= j && *ratio < S::one() => {
            let mut ok = true;
            'pairs: for l in 0..xs.len() {
                let bound = scale.clone() * ratio.pow((l + 2) as u32);
                for m in (l + 1)..xs.len() {
                    let d = system.eval_dense(j, &linalg::sub(&xs[m], &xs[l]))?;
                    if !d.leq(&bound) {
                        ok = false;
                        break 'pairs;
                    }
                }
            }
            if ok {
                notes.push(format!("Cauchy by geometric tail at level {level}"));
            } else {
                notes.push("supplied tail bound fails; ignored".into());
            }
            ok || heuristic_decay(&family.tail, &tol.decay)
        }
        _ => heuristic_decay(&family.tail, &tol.decay),
    };

    let decay_trace = xs
        .iter()
        .map(|x| system.eval_dense(k0, x))
        .collect::<Result<Vec<_>>>()?;
    let decays = match &closed.decay {
        Some(DecayRatio { level, ratio }) if *level == k0 && *ratio < S::one() => {
            let ok = decay_trace
                .windows(2)
                .all(|w| w[1].leq(&(ratio.clone() * w[0].clone())));
            if ok {
                notes.push(format!("geometric decay with ratio {ratio}"));
            } else {
                notes.push("supplied decay ratio fails; ignored".into());
            }
            ok || heuristic_decay(&decay_trace, &tol.decay)
        }
        _ => heuristic_decay(&decay_trace, &tol.decay),
    };

    let floor_trace = xs
        .iter()
        .map(|x| system.eval_dense(k, x))
        .collect::<Result<Vec<_>>>()?;
    let floor = match &closed.floor {
        Some(Floor { level, value: f }) if *level <= k && f.is_positive() => {
            if floor_trace.iter().all(|v| f.leq(v)) {
                Some(f.clone())
            } else {
                notes.push("supplied floor fails; ignored".into());
                None
            }
        }
        _ => None,
    };

    let outcome = if cauchy && decays && floor.is_some() {
        Outcome::Violated
    } else {
        Outcome::Consistent
    };
    if outcome == Outcome::Consistent && cauchy && decays && floor.is_none() && !heuristic_decay(&floor_trace, &tol.decay) {
        notes.push("inconclusive: no certified floor".into());
    }
    Ok(DiagnosticVerdict {
        predicate: predicate.into(),
        k0,
        k,
        j,
        outcome,
        evidence: true,
        family: Some(family.evidence.label.clone()),
        cauchy,
        decays,
        cauchy_tail: family.tail.clone(),
        decay_trace,
        floor_trace,
        floor,
        detail: notes.join("; "),
    })
}

/// Evidence against the inclusion `(E, ‖·‖_j) → (E, ‖·‖_k)` extending
/// injectively to completions: Cauchy at `j`, tending to zero at `k`,
/// bounded below at `floor_level` (default `j`).
pub fn injective_extension_test<S: Scalar>(
    system: &SeminormSystem<S>,
    k: usize,
    j: usize,
    floor_level: Option<usize>,
    family: &CauchyFamily<S>,
    tol: &Tolerances<S>,
) -> Result<DiagnosticVerdict<S>> {
    if k >= j || family.level != j {
        return Err(Error::Input(format!(
            "need k < j and a family Cauchy at j; got k = {k}, j = {j}, family level {}",
            family.level
        )));
    }
    three_trace_test("injective_extension", system, k, floor_level.unwrap_or(j), family, tol)
}

/// Tests the condition "Cauchy at `j(k)` and zero at `k0` forces zero at `k`"
/// for every `(k, j(k))` in `map` on every family of `evidence`.
pub fn dv_condition_check<S: Scalar>(
    system: &SeminormSystem<S>,
    k0: usize,
    map: &[(usize, usize)],
    evidence: &[Evidence<S>],
    tol: &Tolerances<S>,
) -> Result<Vec<DiagnosticVerdict<S>>> {
    system.check_level(k0)?;
    let mut seen = BTreeSet::new();
    for &(k, j) in map {
        if k < k0 || j <= k || !seen.insert(k) {
            return Err(Error::Input(format!(
                "malformed level map entry ({k}, {j}) for k0 = {k0}"
            )));
        }
        system.check_level(j)?;
    }
    let mut verdicts = Vec::new();
    for &(k, j) in map {
        if evidence.is_empty() {
            verdicts.push(DiagnosticVerdict::vacuous("dv_condition", k0, k, j));
            continue;
        }
        for e in evidence {
            let family = CauchyFamily::new(system, j, e.clone())?;
            verdicts.push(three_trace_test("dv_condition", system, k0, k, &family, tol)?);
        }
    }
    Ok(verdicts)
}

/// Recomputes every trace of a verdict from its family.
pub fn reverify<S: Scalar>(
    system: &SeminormSystem<S>,
    verdict: &DiagnosticVerdict<S>,
    evidence: &Evidence<S>,
    tol: &Tolerances<S>,
) -> Result<bool> {
    let family = CauchyFamily::new(system, verdict.j, evidence.clone())?;
    let again = three_trace_test(&verdict.predicate, system, verdict.k0, verdict.k, &family, tol)?;
    Ok(again == *verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SupNormReport<S: Scalar> {
    pub system: SeminormSystem<S>,
    /// `bounds[k-1] = (l(k), C_k)` with `|x|_k ≤ C_k ‖x‖_{l(k)}`.
    #[serde(skip)]
    pub bounds: Vec<(usize, S)>,
    pub samples: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub projection_violations: usize,
}

impl<S: Scalar> SupNormReport<S> {
    pub fn passed(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0 && self.projection_violations == 0
    }
}

/// Builds `|y|_k = max_n ‖Σ_{i≤n} A_i y‖_k` for a biorthogonal rank-one family
/// summing to the identity, and checks the lower, upper and single-projection
/// bounds on `samples`.
pub fn basis_sup_norms<S: Scalar>(
    system: &SeminormSystem<S>,
    ops: &[FiniteRankOperator<S>],
    samples: &[Vec<S>],
) -> Result<SupNormReport<S>> {
    let d = system.dim();
    if ops.is_empty() {
        return Err(Error::Degenerate("empty basis".into()));
    }
    for (n, a) in ops.iter().enumerate() {
        if a.rank() != 1 {
            return Err(Error::Input(format!("operator {} has rank {}", n + 1, a.rank())));
        }
        for (m, b) in ops.iter().enumerate() {
            let prod = a.matrix().mul(b.matrix())?;
            let expected = if n == m { a.matrix().clone() } else { Matrix::zeros(d, d) };
            if !prod.approx_eq(&expected) {
                return Err(Error::Input(format!(
                    "operators {} and {} are not biorthogonal",
                    n + 1,
                    m + 1
                )));
            }
        }
    }
    let mut partial_sums = Vec::with_capacity(ops.len());
    let mut acc = Matrix::zeros(d, d);
    for a in ops {
        acc = acc.add(a.matrix())?;
        partial_sums.push(acc.clone());
    }
    if !acc.approx_eq(&Matrix::identity(d)) {
        return Err(Error::Input("the operators do not sum to the identity".into()));
    }
    let derived = SeminormSystem::new(
        *system.bx(),
        system.levels(),
        SeminormKind::PartialSumSup {
            base: Box::new(system.clone()),
            partial_sums,
        },
    )?;
    let bounds = partial_sum_bounds(system, ops)?;
    let two = S::from_count(2);
    let (mut lower, mut upper, mut projection) = (0, 0, 0);
    for x in samples {
        for k in 1..=system.levels() {
            let sup = derived.eval_dense(k, x)?;
            if !system.eval_dense(k, x)?.leq(&sup) {
                lower += 1;
            }
            let (l, c) = &bounds[k - 1];
            if !sup.leq(&(c.clone() * system.eval_dense(*l, x)?)) {
                upper += 1;
            }
            for a in ops {
                if !derived.eval_dense(k, &a.apply_dense(x)?)?.leq(&(two.clone() * sup.clone())) {
                    projection += 1;
                }
            }
        }
    }
    Ok(SupNormReport {
        system: derived,
        bounds,
        samples: samples.len(),
        lower_violations: lower,
        upper_violations: upper,
        projection_violations: projection,
    })
}
