use bclab::forward::*;
use bclab::manifold::*;
use bclab::response::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn small(physics: Physics) -> (WaveSystem<f64>, ControlBasis<f64>) {
    let g = MetricGrid::unit_cube(8, MetricSpec::Identity).unwrap();
    let spec = BasisSpec { delays: 4, ..Default::default() };
    let time = TimeGrid::fit(0.25, cfl_limit(&g, 0.3), 2 * spec.delays).unwrap();
    let sys = WaveSystem::new(&g, physics, time.dt).unwrap();
    let basis = ControlBasis::new(&sys, time, &spec).unwrap();
    (sys, basis)
}

#[test]
fn odd_continuation_needs_even_step_counts() {
    assert!(odd_continuation(&[0.0, 1.0, 2.0, 3.0]).is_err());
    let f = [0.0, 1.0, 2.0];
    assert_eq!(odd_continuation(&f).unwrap(), vec![0.0, 1.0, -2.0, -1.0, -0.0]);
}

#[test]
fn basis_layout_and_gram() {
    let (_, basis) = small(Physics::Maxwell);
    assert_eq!(basis.len(), 24 * 4);
    assert_eq!(basis.time.steps_per_t % (2 * basis.num_delays()), 0);
    let g = &basis.gram;
    assert!((g - g.transpose()).norm() < 1e-14 * g.norm());
    // the same profile at different delays has disjoint temporal support
    for d in 1..basis.num_delays() {
        assert_eq!(g[(0, d)], 0.0);
    }
    assert!(cholesky(g).is_ok());
    let side = PatchSpec::side(Side { axis: 2, high: false });
    assert_eq!(basis.profile_members(&side).len(), 4);
    assert_eq!(basis.class(&side, 2).len(), 8);
    assert!(basis.class(&side, 0).is_empty());
}

#[test]
fn connecting_form_is_nearly_symmetric_and_psd() {
    for physics in [Physics::Maxwell, Physics::Scalar] {
        let (sys, basis) = small(physics);
        let resp = assemble_response(&sys, &basis).unwrap();
        let c = gram_matrix(&resp).unwrap();
        assert!(c.asymmetry < 0.05, "{physics:?}: {}", c.asymmetry);
        let w = sqrt_operator(&c, &basis.gram).unwrap();
        assert_eq!(w.psd_violations, 0, "{physics:?}");
        // |W|² reproduces the whitened form
        let l = &w.chol;
        let whitened = lower_solve(l, &lower_solve(l, &c.entries).transpose());
        let err = (w.squared() - &whitened).norm() / whitened.norm();
        assert!(err < 1e-8, "{physics:?}: {err:e}");
    }
}

#[test]
fn strongly_asymmetric_forms_are_rejected() {
    let mut m = DMatrix::<f64>::identity(3, 3);
    m[(0, 1)] = 5.0;
    let err = gram_matrix(&ResponseMatrix { entries: m }).unwrap_err();
    assert!(matches!(err, bclab::Error::Asymmetric { .. }));
}

#[test]
fn zero_data_gives_zero_operator() {
    let (_, basis) = small(Physics::Scalar);
    let n = basis.len();
    let resp = ResponseMatrix { entries: DMatrix::zeros(n, n) };
    let w = sqrt_operator(&gram_matrix(&resp).unwrap(), &basis.gram).unwrap();
    assert_eq!(w.matrix.norm(), 0.0);
}

proptest! {
    #[test]
    fn odd_continuation_adjoint_identity(f in prop::collection::vec(-1.0f64..1.0, 5), g in prop::collection::vec(-1.0f64..1.0, 9)) {
        // lattice of N = 4 steps per T
        let sf = odd_continuation(&f).unwrap();
        let lhs: f64 = sf.iter().zip(&g).map(|(a, b)| a * b).sum();
        let adj = odd_continuation_adjoint(&g).unwrap();
        let rhs: f64 = f.iter().zip(&adj).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}
