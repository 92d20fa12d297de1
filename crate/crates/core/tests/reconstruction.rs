use bclab::manifold::*;
use bclab::reconstruction::*;
use proptest::prelude::*;

fn cube(n: usize) -> MetricGrid<f64> {
    MetricGrid::unit_cube(n, MetricSpec::Identity).unwrap()
}

#[test]
fn hausdorff_of_shifted_cloud() {
    let a = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
    let b = vec![vec![0.0, 0.25], vec![1.0, 0.0], vec![3.0, 0.0]];
    let r = hausdorff(&a, &b).unwrap();
    assert_eq!(r.a_to_b, 0.25);
    assert_eq!(r.b_to_a, 2.0);
    assert_eq!(r.hausdorff, 2.0);
    assert!(hausdorff(&a, &[vec![0.0]]).is_err());
}

#[test]
fn horizon_reaching_the_whole_domain_is_rejected() {
    let g = cube(8);
    assert!(check_horizon(&g, 0.45).is_err());
    assert!(check_horizon(&g, 0.3).is_ok());
}

#[test]
fn embedding_grows_with_the_horizon() {
    let g = cube(10);
    let fam = PatchSpec::default_family();
    let a = ground_truth_embedding(&g, &fam, 0.2).unwrap();
    let b = ground_truth_embedding(&g, &fam, 0.3).unwrap();
    assert!(a.nodes.len() < b.nodes.len());
    for (i, n) in a.nodes.iter().enumerate() {
        let j = b.nodes.iter().position(|m| m == n).expect("node kept");
        for (x, y) in a.points[i].iter().zip(&b.points[j]) {
            assert!(y >= x);
        }
    }
}

#[test]
fn separation_holds_on_the_flat_cube() {
    let g = cube(10);
    let r = separation_audit(&g, 0.3, 40, 1).unwrap();
    assert_eq!(r.pairs, 40);
    assert_eq!(r.separated, 40);
}

#[test]
fn one_patch_does_not_separate_the_layer() {
    let g = cube(10);
    let single = density_audit(&[PatchSpec::side(Side { axis: 0, high: false })], &g, 0.3).unwrap();
    assert!(!single.injective);
    assert!(single.collisions > 0 && single.example.is_some());
    let sides = density_audit(&PatchSpec::sides(), &g, 0.3).unwrap();
    let full = density_audit(&PatchSpec::default_family(), &g, 0.3).unwrap();
    assert!(full.collisions * 10 < sides.collisions);
}

#[test]
fn quarter_seams_leave_close_pairs_unresolved() {
    // Mirror images 2h apart across a seam differ by (√2 − 1)h in the quarter coordinates.
    let g = cube(10);
    let full = density_audit(&PatchSpec::default_family(), &g, 0.3).unwrap();
    let (a, b) = full.example.unwrap();
    let axis = (0..3).find(|&k| a[k] != b[k]).unwrap();
    assert_eq!(a[axis] + b[axis], 10);
    assert_eq!((0..3).filter(|&k| a[k] != b[k]).count(), 1);
}

fn cloud(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn hausdorff_is_a_metric(a in cloud(8), b in cloud(8), c in cloud(8)) {
        let ab = hausdorff(&a, &b).unwrap().hausdorff;
        let ba = hausdorff(&b, &a).unwrap().hausdorff;
        let bc = hausdorff(&b, &c).unwrap().hausdorff;
        let ac = hausdorff(&a, &c).unwrap().hausdorff;
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(hausdorff(&a, &a).unwrap().hausdorff, 0.0);
    }
}
