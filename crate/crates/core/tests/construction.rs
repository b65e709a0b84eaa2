use bapkit::instances;
use bapkit::linalg::Matrix;
use bapkit::operator::build_schedule;
use bapkit::pelczynski::{embed, project, verify_instance, BasisSpaceElement};
use bapkit::{BigRational, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

#[test]
fn standard_instances_pass_for_several_seeds() {
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for inst in instances::standard::<Q, _>(&mut rng).unwrap() {
            let (_, _, report) =
                verify_instance(&inst.name, &inst.system, &inst.family, 60, 40, &mut rng).unwrap();
            assert!(report.passed(), "seed {seed}: {report:#?}");
        }
    }
}

#[test]
fn random_family_sums_to_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [2, 4, 7] {
        let inst = instances::random_low_rank::<Q, _>(&mut rng, d, 2).unwrap();
        let total = inst
            .family
            .iter()
            .try_fold(Matrix::zeros(d, d), |acc, a| acc.add(a.matrix()))
            .unwrap();
        assert_eq!(total, Matrix::identity(d));
        assert!(inst.family.iter().all(|a| a.rank() <= 2));
    }
}

#[test]
fn float_mode_agrees_with_exact_mode_on_the_telescoped_instance() {
    let exact = instances::telescoped_projections::<Q>(3).unwrap();
    let float = instances::telescoped_projections::<f64>(3).unwrap();
    let mut r1 = ChaCha8Rng::seed_from_u64(3);
    let mut r2 = ChaCha8Rng::seed_from_u64(3);
    let (_, s1) = build_schedule(&exact.system, &exact.family, 20, &mut r1).unwrap();
    let (_, s2) = build_schedule(&float.system, &float.family, 20, &mut r2).unwrap();
    assert_eq!(s1.len(), s2.len());
    let x1 = vec![Q::from_ratio(1, 3), Q::from_ratio(-2, 1), Q::from_ratio(5, 4)];
    let x2: Vec<f64> = x1.iter().map(Scalar::to_f64).collect();
    let y1 = embed(&s1, &x1);
    let y2 = embed(&s2, &x2);
    for (a, b) in y1.components.iter().flatten().zip(y2.components.iter().flatten()) {
        assert!((a.to_f64() - b).abs() <= 1e-12 * a.to_f64().abs().max(1.0));
    }
    let l2: BasisSpaceElement<f64> = project(&s2, &y2);
    assert!(l2.approx_eq(&y2));
}
