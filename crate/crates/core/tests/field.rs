mod oracles;

use chamberflow::chamber::{self, StratumId};
use chamberflow::{catalog, field};
use proptest::prelude::*;

#[test]
fn potential_matches_naive_formula() {
    for model in oracles::suite() {
        for w in chamber::sample_interior(&model, 50, 11, 2.0, 1e-2) {
            let a = field::rho(&model, &w).unwrap();
            let b = oracles::naive_rho(&model, &w);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{} at {w:?}: {a} vs {b}", model.name());
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    for model in oracles::suite() {
        for w in chamber::sample_interior(&model, 100, 1, 3.0, 1e-4) {
            let h = 1e-6 * oracles::min_naive_gap(&model, &w).min(1.0);
            let fd = oracles::fd_gradient(|p| field::rho(&model, p).unwrap(), &w, h);
            let g = field::grad(&model, &w).unwrap();
            let err = fd.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let rel = err / oracles::gradient_scale(&model, &w);
            assert!(rel < 1e-5, "{} at {w:?}: rel {rel:e}", model.name());
        }
    }
}

#[test]
fn hessian_matches_finite_differences_and_is_symmetric() {
    for model in oracles::suite() {
        for w in chamber::sample_interior(&model, 100, 2, 3.0, 1e-4) {
            let h = 1e-5 * oracles::min_naive_gap(&model, &w).min(1.0);
            let fd = oracles::fd_jacobian(|p| field::grad(&model, p).unwrap(), &w, h);
            let hs = field::hessian(&model, &w).unwrap();
            let rel = (&fd - &hs).norm() / oracles::hessian_scale(&model, &w);
            assert!(rel < 1e-4, "{} at {w:?}: rel {rel:e}", model.name());
            assert!((&hs - hs.transpose()).amax() <= 1e-12 * hs.amax());
        }
    }
}

#[test]
fn theorem_a_scenarios_are_strictly_convex() {
    for model in oracles::suite().into_iter().filter(|m| m.theorem_a()) {
        for w in chamber::sample_interior(&model, 100, 3, 3.0, 1e-4) {
            let h = field::hessian(&model, &w).unwrap();
            let min = h.symmetric_eigenvalues().min();
            assert!(min > 0.0, "{} at {w:?}: {min}", model.name());
        }
    }
}

#[test]
fn field_turns_into_the_outward_normal_at_a_face() {
    let model = catalog::builtin("a2", &[1.0, 1.0]).unwrap();
    let mut last_angle = f64::INFINITY;
    for k in 1..=6 {
        let u = 10f64.powi(-k);
        let w = [1.0 - u, 0.1];
        let g = field::grad(&model, &w).unwrap();
        let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
        let angle = (g[0] / n).clamp(-1.0, 1.0).acos();
        assert!(angle < last_angle);
        assert!(n > (1.0 / u) * (1.0 - 1e-2));
        last_angle = angle;
    }
    assert!(last_angle < 1e-3);
}

#[test]
fn stratum_field_is_tangent_on_a2_faces() {
    let model = catalog::builtin("a2", &[1.0, 1.0]).unwrap();
    let o = model.concurrent_point().unwrap().to_vec();
    for (wall, dir) in [(0usize, [0.0, -1.0]), (1, [-0.866_025_403_784_438_6, -0.5])] {
        for k in 1..20 {
            let s = k as f64 * 0.1;
            let w = [o[0] + s * dir[0], o[1] + s * dir[1]];
            let sid = StratumId::new(vec![wall]);
            let x = field::stratum_field(&model, &sid, &w).unwrap();
            let r = &model.radial(wall).root;
            assert!((x[0] * r[0] + x[1] * r[1]).abs() < 1e-9, "wall {wall} at {w:?}");
        }
    }
}

fn a2_point() -> impl Strategy<Value = [f64; 2]> {
    (-3.0..0.99f64, -3.0..1.0f64).prop_map(|(a, b)| [a, b])
}

proptest! {
    #[test]
    fn gradient_is_finite_inside(w in a2_point()) {
        let model = catalog::builtin("a2", &[2.0, 1.0]).unwrap();
        prop_assume!(chamber::min_gap(&model, &w).unwrap() > 1e-9);
        let e = field::eval(&model, &w).unwrap();
        prop_assert!(e.value.is_finite());
        prop_assert!(e.gradient.iter().all(|x| x.is_finite()));
        prop_assert!(e.hessian.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn rejects_points_beyond_a_wall(x in 1.0..5.0f64) {
        let model = catalog::builtin("rank1", &[]).unwrap();
        prop_assert!(field::grad(&model, &[x]).is_err());
    }
}
