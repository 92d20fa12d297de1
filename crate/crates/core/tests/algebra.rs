use bclab::algebra::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q()
}

fn commuting_family(n: usize, m: usize, seed: u64) -> (DMatrix<f64>, Vec<DVector<f64>>, Vec<DMatrix<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_orthogonal(n, &mut rng);
    let diags: Vec<DVector<f64>> = (0..m).map(|_| DVector::from_fn(n, |_, _| rng.random_range(0.0..1.0))).collect();
    let fam = diags.iter().map(|d| &q * DMatrix::from_diagonal(d) * q.transpose()).collect();
    (q, diags, fam)
}

#[test]
fn commuting_family_is_diagonalized_exactly() {
    let (_, diags, fam) = commuting_family(12, 4, 7);
    let jd = joint_diagonalize(&fam, 1e-12, 100).unwrap();
    assert!(jd.converged, "residual {}", jd.residual);
    // every recovered tuple is one of the true tuples
    for j in 0..12 {
        let tuple: Vec<f64> = jd.rotated.iter().map(|a| a[(j, j)]).collect();
        let hit = (0..12).any(|i| diags.iter().zip(&tuple).all(|(d, t)| (d[i] - t).abs() < 1e-8));
        assert!(hit, "{tuple:?}");
    }
    let prof = commutator_profile(&fam, false);
    assert!(prof.max_normalized() < 1e-12);
}

#[test]
fn off_diagonal_energy_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fam: Vec<DMatrix<f64>> = (0..5)
        .map(|_| {
            let a = DMatrix::from_fn(10, 10, |_, _| rng.random_range(-1.0..1.0));
            &a + a.transpose()
        })
        .collect();
    let jd = joint_diagonalize(&fam, 1e-12, 30).unwrap();
    assert!(jd.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert!(jd.residual < jd.history[0]);
    // the basis stays orthogonal
    let v = &jd.basis;
    assert!((v.transpose() * v - DMatrix::identity(10, 10)).norm() < 1e-10);
}

#[test]
fn cloud_is_clamped_to_the_horizon() {
    let fam = vec![DMatrix::from_diagonal(&DVector::from_vec(vec![-0.1, 0.2, 0.7]))];
    let cloud = spectrum_cloud(&fam, 0.5, 1e-9, 10).unwrap();
    assert_eq!(cloud.clamped, 2);
    let mut xs: Vec<f64> = cloud.points.iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    assert_eq!(xs, vec![0.0, 0.2, 0.5]);
    assert_eq!(cloud.weights, vec![1.0; 3]);
}

#[test]
fn bad_families_are_rejected() {
    assert!(joint_diagonalize(&[DMatrix::<f64>::identity(2, 2), DMatrix::identity(3, 3)], 1e-6, 5).is_err());
    let mut a = DMatrix::<f64>::zeros(2, 2);
    a[(0, 1)] = 1.0;
    assert!(joint_diagonalize(&[a], 1e-6, 5).is_err());
    assert!(joint_diagonalize(&[DMatrix::<f64>::identity(2, 2)], 0.0, 5).is_err());
}

#[test]
fn closure_contains_products_and_guards_size() {
    let (_, _, fam) = commuting_family(4, 2, 1);
    let cl = algebra_closure(&fam, 2).unwrap();
    // identity, two members, and the products a², ab, b²
    assert_eq!(cl.len(), 6);
    let big: Vec<DMatrix<f64>> = (0..30).map(|i| DMatrix::identity(2, 2) * i as f64).collect();
    assert!(matches!(algebra_closure(&big, 3), Err(bclab::Error::Blowup { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn commutator_is_antisymmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sym = || { let a = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0)); &a + a.transpose() };
        let (a, b) = (sym(), sym());
        prop_assert!((commutator(&a, &b) + commutator(&b, &a)).norm() < 1e-12);
    }
}
