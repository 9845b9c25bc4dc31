use curvlab_core::grid::GridSpec;
use curvlab_core::kernel::{KernelSpec, Point};
use curvlab_core::multiplier::{bezout_left_inverse, corona_bound, verify_left_inverse, MatrixMultiplier};
use curvlab_core::poly::PolyC;
use curvlab_core::quotient::{iso_test, kernel_curvature, quotient_curvature, verify_additivity, ErrorPolicy, QuotientSpec};
use curvlab_core::similarity::{build_idempotent, splitting_angle};
use curvlab_core::truncation::{build_truncated_module, build_truncated_quotient, localized_dimension};
use num_complex::Complex64;

fn poly(coeffs: &[f64]) -> PolyC {
    PolyC::from_coeffs(&coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
}

fn z_one_minus_z() -> MatrixMultiplier {
    MatrixMultiplier::column(vec![poly(&[0.0, 1.0]), poly(&[1.0, -1.0])]).unwrap()
}

fn psi_for(theta: &MatrixMultiplier) -> MatrixMultiplier {
    let (a, b) = bezout_left_inverse(theta.entry(0, 0), theta.entry(1, 0)).unwrap();
    MatrixMultiplier::from_rows(1, vec![vec![a, b]]).unwrap()
}

#[test]
fn bezout_symbol_flows_through_every_stage() {
    let theta = z_one_minus_z();
    let psi = psi_for(&theta);
    let grid = GridSpec::disk(0.8, 4, 8);
    let points = grid.points().unwrap();

    assert!(corona_bound(&theta, &points).unwrap() > 0.5);
    assert!(verify_left_inverse(&theta, &psi, &points).unwrap().is_valid(1e-12));

    let spec = QuotientSpec::new(KernelSpec::bergman(), theta.clone(), Some(psi.clone())).unwrap();
    let report = verify_additivity(&spec, &grid, ErrorPolicy::Abort).unwrap();
    assert!(report.max_residual < 1e-6, "{}", report.max_residual);

    let q = build_idempotent(&theta, &psi).unwrap();
    let split = splitting_angle(&theta, &q, &grid).unwrap();
    assert!(split.min_angle > 0.1);

    let module = build_truncated_module(&KernelSpec::bergman(), 48).unwrap();
    let quotient = build_truncated_quotient(&module, &theta).unwrap();
    assert_eq!(quotient.complement_dim(), 49);
    let w = Complex64::new(0.2, -0.1);
    assert_eq!(localized_dimension(&KernelSpec::bergman(), &theta, w, 48).unwrap(), 1);
}

#[test]
fn quotient_curvature_is_kernel_plus_twist() {
    let theta = z_one_minus_z();
    let z = Point::new(vec![Complex64::new(0.3, 0.2)]);
    let szego = QuotientSpec::new(KernelSpec::szego(), theta.clone(), None).unwrap();
    let bergman = QuotientSpec::new(KernelSpec::bergman(), theta, None).unwrap();
    let diff = |spec: &QuotientSpec, k: &KernelSpec| {
        quotient_curvature(spec, &z).unwrap().scalar(0, 0) - kernel_curvature(k, &z).unwrap().scalar(0, 0)
    };
    let a = diff(&szego, &KernelSpec::szego());
    let b = diff(&bergman, &KernelSpec::bergman());
    assert!((a - b).norm() < 1e-7, "{a} vs {b}");
}

#[test]
fn swapped_pair_is_isomorphic_and_squared_pair_is_not() {
    let one_z = MatrixMultiplier::column(vec![poly(&[1.0]), poly(&[0.0, 1.0])]).unwrap();
    let z_one = MatrixMultiplier::column(vec![poly(&[0.0, 1.0]), poly(&[1.0])]).unwrap();
    let one_z2 = MatrixMultiplier::column(vec![poly(&[1.0]), poly(&[0.0, 0.0, 1.0])]).unwrap();
    let grid = GridSpec::disk(0.8, 4, 8);
    assert!(iso_test(&one_z, &z_one, &grid, 1e-6).unwrap().isomorphic);
    assert!(!iso_test(&one_z, &one_z2, &grid, 1e-6).unwrap().isomorphic);
}
