use proptest::prelude::*;

use qfree_core::fixtures::fixture;
use qfree_core::linalg::norm;
use qfree_core::{in_q, in_q_beta, Gamma, QFreeSet, SampleSet, SplitPoint, UnitVector, TAU_MEMBER};

fn planar_sets() -> Vec<QFreeSet> {
    ["ex1", "ex2", "ex4", "constant"]
        .iter()
        .map(|n| {
            let g = Gamma::new(fixture(n).unwrap().gamma.unwrap()).unwrap();
            QFreeSet::sampled(g, SampleSet::angular_grid(1024)).unwrap()
        })
        .collect()
}

fn point4() -> impl Strategy<Value = SplitPoint> {
    prop::array::uniform4(-3.0..3.0f64).prop_map(|z| SplitPoint::from_stacked(&z, 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_of_q_beta(x in prop::collection::vec(-2.0..2.0f64, 1..4), y in prop::collection::vec(-2.0..2.0f64, 1..4)) {
        prop_assume!(norm(&y) > 1e-6);
        let p = SplitPoint::new(x, y.clone()).unwrap();
        let beta = UnitVector::normalized(y).unwrap();
        prop_assert_eq!(in_q(&p), in_q_beta(&beta, &p).unwrap());
    }

    #[test]
    fn margin_is_positively_homogeneous(p in point4(), t in 0.0..10.0f64) {
        for c in planar_sets() {
            let a = c.margin(&p.scaled(t)).unwrap();
            let b = t * c.margin(&p).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn margin_is_concave_on_segments(p in point4(), q in point4(), l in 0.0..1.0f64) {
        let mid = SplitPoint::from_stacked(
            &p.stacked().iter().zip(q.stacked()).map(|(a, b)| l * a + (1.0 - l) * b).collect::<Vec<_>>(),
            2,
        );
        for c in planar_sets() {
            let lhs = c.margin(&mid).unwrap();
            let rhs = l * c.margin(&p).unwrap() + (1.0 - l) * c.margin(&q).unwrap();
            prop_assert!(lhs >= rhs - TAU_MEMBER, "{lhs} < {rhs}");
        }
    }

    #[test]
    fn interior_points_are_outside_q(p in point4()) {
        for c in planar_sets() {
            if c.margin(&p).unwrap() > TAU_MEMBER {
                prop_assert!(!in_q(&p));
            }
        }
    }

    #[test]
    fn gamma_images_are_unit(theta in 0.0..std::f64::consts::TAU) {
        let b = UnitVector::from_angle(theta);
        for c in planar_sets() {
            let g = c.gamma().evaluate(&b).unwrap();
            prop_assert!((norm(&g) - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn exact_index_and_sampled_sphere_agree_on_membership() {
    let g = Gamma::new(fixture("ex3-amended").unwrap().gamma.unwrap()).unwrap();
    let index: Vec<UnitVector> = qfree_core::fixtures::ex3_amended_anchors().into_iter().map(|a| a.beta).collect();
    let exact = QFreeSet::exact(g.clone(), index).unwrap();
    let sampled = QFreeSet::sampled(g, SampleSet::default_for(3, 1)).unwrap();
    let mut rng = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        (rng >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
    };
    let mut compared = 0;
    for _ in 0..300 {
        let z: Vec<f64> = (0..6).map(|_| next()).collect();
        let p = SplitPoint::from_stacked(&z, 3);
        let (e, s) = (exact.margin(&p).unwrap(), sampled.margin(&p).unwrap());
        if e.abs() > 1e-6 {
            compared += 1;
            assert_eq!(e > 0.0, s > 0.0, "{e} vs {s} at {z:?}");
        }
    }
    assert!(compared > 100);
}
