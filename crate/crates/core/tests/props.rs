use nalgebra::DMatrix;
use proptest::prelude::*;

use qfree_core::cuts::cut_from_steps;
use qfree_core::exposing::start_index;
use qfree_core::fixtures::fixture;
use qfree_core::linalg::{dot, norm};
use qfree_core::mesh::{Bounds, Embed};
use qfree_core::reduction::{eigendecompose, kernel_cutoff};
use qfree_core::{
    build_cut, check_origin_exclusion, exposing_point, find_exposing_vector, in_q, pullback_inequality, reduce,
    slice_mesh, step_length, Error, Gamma, HalfspaceCoeff, QFreeSet, QuadraticProblem, SampleSet, SimplicialCone,
    SliceSpec, SplitPoint, UnitVector,
};

fn symmetric(d: usize, vals: &[f64]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; d]; d];
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            a[i][j] = vals[k];
            a[j][i] = vals[k];
            k += 1;
        }
    }
    a
}

fn problem() -> impl Strategy<Value = QuadraticProblem> {
    (2usize..6).prop_flat_map(|d| {
        (
            prop::collection::vec(-5.0..5.0f64, d * (d + 1) / 2),
            prop::collection::vec(-3.0..3.0f64, d),
            -3.0..3.0f64,
            prop::bool::ANY,
        )
            .prop_map(move |(a, g, h, homog)| {
                let (g, h) = if homog { (vec![0.0; d], 0.0) } else { (g, h) };
                QuadraticProblem::new(symmetric(d, &a), g, h).unwrap()
            })
    })
}

fn ex2_exact() -> QFreeSet {
    let f = fixture("ex2").unwrap();
    QFreeSet::exact(Gamma::new(f.gamma.unwrap()).unwrap(), f.index.unwrap()).unwrap()
}

fn ex2_sampled(count: usize) -> QFreeSet {
    QFreeSet::sampled(Gamma::new(fixture("ex2").unwrap().gamma.unwrap()).unwrap(), SampleSet::angular_grid(count)).unwrap()
}

fn ex2_cone() -> impl Strategy<Value = SimplicialCone> {
    (
        prop::array::uniform2(1.0..2.0f64),
        prop::array::uniform2(-0.5..0.5f64),
        prop::collection::vec(prop::array::uniform4(-1.0..1.0f64), 4),
    )
        .prop_filter_map("degenerate rays", |(x, y, rays)| {
            let apex = SplitPoint::new(x.to_vec(), y.to_vec()).unwrap();
            let cone = SimplicialCone::new(apex, rays.iter().map(|r| r.to_vec()).collect()).ok()?;
            cone.validate().ok()?;
            Some(cone)
        })
}

fn lift(s: &[f64], homogenized: bool) -> Vec<f64> {
    let mut v = s.to_vec();
    if homogenized {
        v.push(1.0);
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_reconstructs(p in problem()) {
        let a = p.a();
        let e = eigendecompose(a).unwrap();
        let back = &e.vectors * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone())) * e.vectors.transpose();
        prop_assert!((back - a).amax() <= 1e-9 * (1.0 + a.amax()));
        let gram = e.vectors.transpose() * &e.vectors - DMatrix::<f64>::identity(p.dim(), p.dim());
        prop_assert!(gram.amax() <= 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn standard_form_preserves_the_quadratic(p in problem(), s in prop::collection::vec(-2.0..2.0f64, 6)) {
        let map = match reduce(&p, false) {
            Ok(m) => m,
            Err(Error::NotReducible { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let s = &s[..p.dim()];
        let z = map.apply(&lift(s, map.homogenized));
        let (x, y) = z.split_at(map.n);
        let lifted = lift(s, map.homogenized);
        let scale = 1.0 + kernel_cutoff(p.a()).max(1.0) * dot(&lifted, &lifted);
        prop_assert!((p.value(s) - (dot(x, x) - dot(y, y))).abs() <= 1e-8 * scale * (1.0 + p.a().amax()));
    }

    #[test]
    fn feasible_points_map_into_q(p in problem(), s in prop::collection::vec(-2.0..2.0f64, 6)) {
        let s = &s[..p.dim()];
        prop_assume!(p.value(s) <= 0.0);
        let Ok(map) = reduce(&p, false) else { return Ok(()) };
        let z = map.apply(&lift(s, map.homogenized));
        let (x, y) = z.split_at(map.n);
        prop_assert!(norm(x) <= norm(y) + 1e-7 * (1.0 + p.a().amax()));
    }

    #[test]
    fn pullback_agrees_with_the_image(
        p in problem(),
        s in prop::collection::vec(-2.0..2.0f64, 6),
        gr in prop::collection::vec(-1.0..1.0f64, 8),
        br in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        let Ok(map) = reduce(&p, false) else { return Ok(()) };
        let (Ok(g), Ok(b)) = (UnitVector::normalized(gr[..map.n].to_vec()), UnitVector::normalized(br[..map.m].to_vec())) else {
            return Ok(());
        };
        let coeff = HalfspaceCoeff::new(g, b);
        let ineq = pullback_inequality(&map, &coeff, map.homogenized).unwrap();
        let s = &s[..p.dim()];
        let image = SplitPoint::from_stacked(&map.apply(&lift(s, map.homogenized)), map.n);
        let lhs = dot(&ineq.a, s) - ineq.c;
        prop_assert!((lhs - coeff.value(&image)).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn steps_scale_inversely_with_rays(cone in ex2_cone(), k in 0.1..10.0f64) {
        let c = ex2_exact();
        let scaled = SimplicialCone::new(cone.apex.clone(), cone.rays.iter().map(|r| r.iter().map(|v| k * v).collect()).collect()).unwrap();
        for (r, rs) in cone.rays.iter().zip(&scaled.rays) {
            let (t, ts) = (step_length(&c, &cone.apex, r).unwrap(), step_length(&c, &cone.apex, rs).unwrap());
            if t.is_finite() {
                prop_assert!((ts * k - t).abs() <= 1e-12 * t.max(1.0));
            } else {
                prop_assert!(ts.is_infinite());
            }
        }
        if let (Ok(a), Ok(b)) = (build_cut(&c, &cone), build_cut(&c, &scaled)) {
            prop_assert!((a.pi0 - b.pi0).abs() <= 1e-9);
            prop_assert!(a.pi.iter().zip(&b.pi).all(|(u, v)| (u - v).abs() <= 1e-9));
        }
    }

    #[test]
    fn larger_sets_give_longer_steps(cone in ex2_cone()) {
        let (small, large) = (ex2_sampled(512), ex2_sampled(8));
        for r in &cone.rays {
            let (ts, tl) = (step_length(&small, &cone.apex, r).unwrap(), step_length(&large, &cone.apex, r).unwrap());
            prop_assert!(ts <= tl * (1.0 + 1e-12) + 1e-12, "{ts} > {tl}");
        }
    }

    #[test]
    fn bisection_matches_exact_steps(cone in ex2_cone()) {
        let (exact, sampled) = (ex2_exact(), ex2_sampled(1024));
        for r in &cone.rays {
            let (te, tb) = (step_length(&exact, &cone.apex, r).unwrap(), step_length(&sampled, &cone.apex, r).unwrap());
            if te.is_finite() {
                prop_assert!(tb <= te && te - tb <= 2e-9 * te.max(1.0), "{te} vs {tb}");
            } else {
                prop_assert!(tb.is_infinite());
            }
        }
    }

    #[test]
    fn cut_separates_the_apex(cone in ex2_cone()) {
        let c = ex2_exact();
        let steps: Vec<f64> = cone.rays.iter().map(|r| step_length(&c, &cone.apex, r).unwrap()).collect();
        prop_assume!(steps.iter().any(|t| t.is_finite()));
        let cut = cut_from_steps(&cone, steps.clone()).unwrap();
        prop_assert!(cut.slack(&cone.apex) < 0.0);
        for (r, t) in cone.rays.iter().zip(&steps) {
            if t.is_finite() {
                prop_assert!(cut.slack(&cone.apex.offset(r, *t)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn start_index_is_least(c in 0.0..20.0f64) {
        let cond = |t: u64| 6.0 * t as f64 - 8.0 * (2.0 * t as f64 + 1.0).sqrt() * c - 1.0;
        let t = start_index(c);
        prop_assert!(t >= 1 && cond(t) >= 0.0);
        prop_assert!(t == 1 || cond(t - 1) < 0.0);
    }
}

#[test]
fn exposing_sequences_stay_in_q_and_hit_the_target() {
    let mut exposed = 0;
    for name in ["ex1", "ex2", "ex4", "constant"] {
        let g = Gamma::new(fixture(name).unwrap().gamma.unwrap()).unwrap();
        let c = QFreeSet::sampled(g.clone(), SampleSet::angular_grid(256)).unwrap();
        for k in 0..6 {
            let beta = UnitVector::from_angle(0.3 + k as f64 * std::f64::consts::TAU / 6.0);
            let w = match find_exposing_vector(&c, &beta) {
                Ok(w) => w,
                Err(Error::NotExposed { .. }) => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            exposed += 1;
            let gb = g.evaluate(&beta).unwrap();
            for t in (w.t_bar..w.t_bar + 40).chain([1_000, 100_000]) {
                let p = exposing_point(&w, t).unwrap();
                assert!(in_q(&p), "{name} t={t}");
                let target = dot(&gb, &p.x) - dot(&beta, &p.y);
                assert!(target <= 1e-8, "{name} t={t}: {target}");
            }
        }
    }
    assert!(exposed >= 6, "only {exposed} exposed directions");
}

#[test]
fn origin_certificate_is_sound() {
    for name in ["ex1", "ex2", "ex4", "constant"] {
        let g = Gamma::new(fixture(name).unwrap().gamma.unwrap()).unwrap();
        let samples = SampleSet::angular_grid(512);
        let r = check_origin_exclusion(&g, &samples).unwrap();
        if !r.verdict.passed() {
            continue;
        }
        let p = &r.certificate;
        assert!(p.stacked().iter().all(|v| v.abs() <= 1.0 + 1e-9), "{name}");
        for b in samples.points() {
            let gb = g.evaluate(b).unwrap();
            assert!(dot(&gb, &p.x) - dot(b, &p.y) >= r.delta - 1e-9, "{name}");
        }
        assert!(r.certificate_margin > 0.0 && !in_q(p), "{name}");
    }
}

#[test]
fn ex2_slice_is_piecewise_planar() {
    let spec = SliceSpec::default_for(2, 2).unwrap();
    let h = 4.0 / 40.0;
    let [cm, qm] = slice_mesh(&ex2_exact(), &spec).unwrap();
    assert!(!cm.faces.is_empty() && !qm.faces.is_empty());
    for v in &cm.vertices {
        // slice coordinates (x1, x2, y1) with y2 = 1
        let d = (v[0] - v[2].abs()).abs().min((v[1] - 1.0).abs());
        assert!(d <= h, "{v:?}");
    }
    for v in &qm.vertices {
        let gap = (v[2] * v[2] + 1.0).sqrt() - (v[0] * v[0] + v[1] * v[1]).sqrt();
        assert!(gap.abs() <= h, "{v:?}");
    }
}

#[test]
fn slice_inside_c_has_no_c_boundary() {
    let spec = SliceSpec {
        embed: Embed {
            matrix: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]],
            offset: vec![10.0, 10.0, 0.0, 0.0],
        },
        bounds: Bounds { lo: [-1.0; 3], hi: [1.0; 3] },
        resolution: [9; 3],
    };
    let [cm, qm] = slice_mesh(&ex2_exact(), &spec).unwrap();
    assert!(cm.vertices.is_empty() && cm.faces.is_empty());
    assert!(qm.faces.is_empty());
}
