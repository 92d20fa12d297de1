use bclab::forward::*;
use bclab::manifold::*;
use bclab::model_space::*;
use bclab::response::*;

fn model(physics: Physics) -> (ControlBasis<f64>, ModelOperator<f64>) {
    let g = MetricGrid::unit_cube(8, MetricSpec::Identity).unwrap();
    let spec = BasisSpec { delays: 4, ..Default::default() };
    let time = TimeGrid::fit(0.25, cfl_limit(&g, 0.3), 2 * spec.delays).unwrap();
    let sys = WaveSystem::new(&g, physics, time.dt).unwrap();
    let basis = ControlBasis::new(&sys, time, &spec).unwrap();
    let resp = assemble_response(&sys, &basis).unwrap();
    let w = sqrt_operator(&gram_matrix(&resp).unwrap(), &basis.gram).unwrap();
    (basis, w)
}

#[test]
fn projections_nest_and_eikonal_spectrum_is_bounded() {
    let (basis, w) = model(Physics::Maxwell);
    let t = basis.time.horizon;
    for patch in PatchSpec::default_family().iter().take(10) {
        let chain = reachable_subspace(&w.matrix, &w.chol, &basis, patch, 1e-6).unwrap();
        assert!(chain.ranks.windows(2).all(|r| r[0] <= r[1]));
        let q = chain.basis(chain.ranks.len() - 1);
        let gram = q.transpose() * &q;
        assert!((gram - nalgebra::DMatrix::identity(q.ncols(), q.ncols())).norm() < 1e-10);
        let mut prev = projection(&chain, 0.0).matrix;
        for &s in &basis.delays {
            let e = projection(&chain, s).matrix;
            // E^s E^{s'} = E^{s'} for s' ≤ s, and E is idempotent
            assert!((&e * &prev - &prev).norm() < 1e-10);
            assert!((&e * &e - &e).norm() < 1e-10);
            prev = e;
        }
        let eik = eikonal(&chain);
        for v in eik.eigenvalues() {
            assert!(v >= -1e-6 * t && v <= t * (1.0 + 1e-6), "{}: {v}", patch.id);
        }
    }
}

#[test]
fn larger_patches_reach_more() {
    let (basis, w) = model(Physics::Scalar);
    let side = PatchSpec::side(Side { axis: 0, high: true });
    let quarter = PatchSpec::quarter(Side { axis: 0, high: true }, 1, 0);
    let a = reachable_subspace(&w.matrix, &w.chol, &basis, &side, 1e-6).unwrap();
    let b = reachable_subspace(&w.matrix, &w.chol, &basis, &quarter, 1e-6).unwrap();
    let (ra, rb) = (*a.ranks.last().unwrap(), *b.ranks.last().unwrap());
    assert!(ra > rb && rb > 0, "{:?} {:?}", a.ranks, b.ranks);
    assert!(a.ranks.iter().zip(&b.ranks).all(|(x, y)| x >= y));
}

#[test]
fn scaling_the_operator_leaves_eikonals_unchanged() {
    let (basis, w) = model(Physics::Maxwell);
    let patch = PatchSpec::side(Side { axis: 1, high: false });
    let a = eikonal(&reachable_subspace(&w.matrix, &w.chol, &basis, &patch, 1e-6).unwrap()).matrix;
    let scaled = &w.matrix * 2.0;
    let b = eikonal(&reachable_subspace(&scaled, &w.chol, &basis, &patch, 1e-6).unwrap()).matrix;
    assert!((a - b).norm() < 1e-8);
}
