use bapkit::linalg::Matrix;
use bapkit::normability::{dv_condition_check, basis_sup_norms, Evidence, Outcome, Tolerances};
use bapkit::operator::{build_schedule, FiniteRankOperator};
use bapkit::pelczynski::{embed, E0SeminormSystem};
use bapkit::polyhedral::{operator_norm, Combine};
use bapkit::seminorm::SeminormSystem;
use bapkit::space::{TruncatedVector, TruncationBox};
use bapkit::vogt::{bap_failure_witness, comparison_inequality_check, nuclearity_certificate, VogtInstance};
use bapkit::{instances, BigRational, Scalar};
use num_traits::Signed;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn scalar() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Q::from_ratio(n, d))
}

fn vector(d: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(scalar(), d)
}

fn sparse_vector(d: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec((0..d, scalar()), 0..6).prop_map(move |entries| {
        let mut v = vec![Q::from_ratio(0, 1); d];
        for (i, c) in entries {
            v[i] = c;
        }
        v
    })
}

fn vogt() -> VogtInstance<Q> {
    VogtInstance::dyadic(3, 2, 3, 4).unwrap()
}

fn koethe() -> SeminormSystem<Q> {
    let w = |v: [i64; 4]| v.iter().map(|&x| Q::from_ratio(x, 1)).collect::<Vec<_>>();
    SeminormSystem::koethe(Combine::Sum, vec![w([1, 2, 1, 3]), w([2, 2, 3, 3]), w([2, 5, 3, 4])]).unwrap()
}

fn check_axioms(sys: &SeminormSystem<Q>, x: &[Q], y: &[Q], c: &Q) -> Result<(), TestCaseError> {
    let cx: Vec<Q> = x.iter().map(|v| c.clone() * v.clone()).collect();
    let xy: Vec<Q> = x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect();
    for k in 1..=sys.levels() {
        let vx = sys.eval_dense(k, x).unwrap();
        prop_assert!(vx >= Q::from_ratio(0, 1));
        prop_assert_eq!(sys.eval_dense(k, &cx).unwrap(), c.abs() * vx.clone());
        prop_assert!(sys.eval_dense(k, &xy).unwrap() <= vx.clone() + sys.eval_dense(k, y).unwrap());
        if k < sys.levels() {
            prop_assert!(vx <= sys.eval_dense(k + 1, x).unwrap());
        }
        prop_assert_eq!(sys.level_form(k).unwrap().value(x), sys.eval_dense(k, x).unwrap());
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vogt_seminorm_axioms(x in sparse_vector(18), y in sparse_vector(18), c in scalar()) {
        check_axioms(&vogt().system, &x, &y, &c)?;
    }

    #[test]
    fn koethe_and_prefix_axioms(x in vector(4), y in vector(4), c in scalar()) {
        check_axioms(&koethe(), &x, &y, &c)?;
        check_axioms(&SeminormSystem::max_prefix(4, 4).unwrap(), &x, &y, &c)?;
    }

    #[test]
    fn vogt_comparison_norm_dominates(x in sparse_vector(18)) {
        let inst = vogt();
        let tv = TruncatedVector::from_dense(*inst.system.bx(), x).unwrap();
        prop_assert!(comparison_inequality_check(&inst, &[tv]).unwrap().passed());
    }

    #[test]
    fn witness_traces_match_summation(p0 in 1usize..=2, extra in 0usize..=2, m in 1usize..=8) {
        let q = p0 + 1 + extra;
        let inst = VogtInstance::<Q>::dyadic(m, 4, 3, q).unwrap();
        let w = bap_failure_witness(&inst, p0, q, m).unwrap();
        prop_assert!(w.passed());
        // Hand summation of ‖x_m‖_p = Σ_n ρ^n p^{n+μ+p}.
        let p = Q::from_count(w.p);
        let mut s = Q::from_ratio(0, 1);
        for n in 1..=m {
            s += Scalar::pow(&w.rho, n as u32) * Scalar::pow(&p, (n + w.mu + w.p) as u32);
        }
        prop_assert_eq!(&w.floor_trace[m - 1].direct, &s);
        prop_assert!(Q::from_count(q) * w.rho.clone() < Q::from_ratio(1, 1));
    }

    #[test]
    fn nuclearity_sums_grow_with_the_box(p in 1usize..=4, a in 1usize..=3, b in 1usize..=3, c in 1usize..=3) {
        let small = nuclearity_certificate(&VogtInstance::<Q>::dyadic(a, b, c, 1).unwrap(), p).unwrap();
        let large = nuclearity_certificate(&VogtInstance::<Q>::dyadic(a + 1, b, c, 1).unwrap(), p).unwrap();
        prop_assert!(small.passed() && large.passed());
        prop_assert!(small.partial_sums.last() <= large.partial_sums.last());
    }

    #[test]
    fn operator_norm_matches_vertex_enumeration(
        entries in vector(9),
        a in prop::collection::vec(1i64..=3, 3),
        b in prop::collection::vec(1i64..=3, 3),
        target_sum in any::<bool>(),
    ) {
        let t = Matrix::from_rows(entries.chunks(3).map(<[Q]>::to_vec).collect()).unwrap();
        let weights = |w: &[i64]| w.iter().map(|&v| Q::from_ratio(v, 1)).collect::<Vec<_>>();
        let source = SeminormSystem::koethe(Combine::Max, vec![weights(&a)]).unwrap();
        let combine = if target_sum { Combine::Sum } else { Combine::Max };
        let target = SeminormSystem::koethe(combine, vec![weights(&b)]).unwrap();
        let lp = operator_norm(&t, &source.level_form(1).unwrap(), &target.level_form(1).unwrap())
            .unwrap()
            .unwrap();
        // The unit ball of the source is a box with vertices (±1/a_i).
        let mut best = Q::from_ratio(0, 1);
        for signs in 0..8u32 {
            let v: Vec<Q> = (0..3)
                .map(|i| {
                    let s = if signs >> i & 1 == 1 { -1 } else { 1 };
                    Q::from_ratio(s, a[i])
                })
                .collect();
            best = best.max_of(target.eval_dense(1, &t.mul_vec(&v).unwrap()).unwrap());
        }
        prop_assert_eq!(lp, best);
    }

    #[test]
    fn embedding_dominates_the_base_norm(seed in 0u64..1000, x in vector(4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = instances::random_low_rank::<Q, _>(&mut rng, 4, 2).unwrap();
        let (_, schedule) = build_schedule(&inst.system, &inst.family, 5, &mut rng).unwrap();
        prop_assert!(schedule.total() == Matrix::identity(4));
        prop_assert!(schedule.ops.iter().all(|s| s.op.matrix().rank() == 1));
        let e0 = E0SeminormSystem { base: &inst.system };
        let ix = embed(&schedule, &x);
        for k in 1..=2 {
            prop_assert!(inst.system.eval_dense(k, &x).unwrap() <= e0.eval(k, &ix).unwrap());
        }
    }

    #[test]
    fn sup_norms_respect_their_bounds(u in -2i64..=2, v in -2i64..=2, w in -2i64..=2, x in vector(3)) {
        // Q upper unitriangular, so Q^{-1} is integral and A_i = q_i q'_i is biorthogonal.
        let qm = Matrix::from_rows(vec![
            vec![Q::from_ratio(1, 1), Q::from_ratio(u, 1), Q::from_ratio(v, 1)],
            vec![Q::from_ratio(0, 1), Q::from_ratio(1, 1), Q::from_ratio(w, 1)],
            vec![Q::from_ratio(0, 1), Q::from_ratio(0, 1), Q::from_ratio(1, 1)],
        ]).unwrap();
        let inv = qm.inverse().unwrap();
        let ops: Vec<_> = (0..3)
            .map(|i| FiniteRankOperator::from_matrix(Matrix::outer(&qm.column(i), inv.row(i)), format!("A{i}")).unwrap())
            .collect();
        let sys = koethe_3();
        let report = basis_sup_norms(&sys, &ops, &[x]).unwrap();
        prop_assert!(report.passed());
    }

    #[test]
    fn a_refuting_family_keeps_refuting(extra in prop::collection::vec(sparse_vector(90), 3..5)) {
        let inst = VogtInstance::<Q>::dyadic(10, 3, 3, 3).unwrap();
        let w = bap_failure_witness(&inst, 1, 3, 10).unwrap();
        let witness = Evidence::from_witness(&w, &inst.system).unwrap();
        let tol = Tolerances::default();
        let raw = Evidence::raw("extra", extra);
        let alone = dv_condition_check(&inst.system, 1, &[(2, 3)], std::slice::from_ref(&witness), &tol).unwrap();
        let more = dv_condition_check(&inst.system, 1, &[(2, 3)], &[raw, witness], &tol).unwrap();
        prop_assert!(alone.iter().any(|v| v.outcome == Outcome::Violated));
        prop_assert!(more.iter().any(|v| v.outcome == Outcome::Violated));
    }
}

fn koethe_3() -> SeminormSystem<Q> {
    let w = |v: [i64; 3]| v.iter().map(|&x| Q::from_ratio(x, 1)).collect::<Vec<_>>();
    SeminormSystem::koethe(Combine::Sum, vec![w([1, 1, 2]), w([1, 3, 2])]).unwrap()
}

#[test]
fn sampled_monotonicity_on_a_triple_box() {
    let inst = vogt();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bx: TruncationBox = *inst.system.bx();
    let samples: Vec<Vec<Q>> = (0..200)
        .map(|_| bapkit::sampling::sparse(&mut rng, bx, 4).into_coords())
        .collect();
    assert_eq!(inst.system.monotonicity_violation(&samples).unwrap(), None);
}
