//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use curvlab_core::bundle::delta_theta;
use curvlab_core::grid::GridSpec;
use curvlab_core::kernel::{KernelSpec, Point};
use curvlab_core::linalg::CMat;
use curvlab_core::multiplier::{bezout_left_inverse, MatrixMultiplier};
use curvlab_core::poly::PolyC;
use curvlab_core::quotient::{
    cross_kernel_check, iso_test, kernel_curvature, log_norm_hessian, quotient_curvature, verify_additivity,
    ErrorPolicy, QuotientSpec, DEFAULT_ISO_TOLERANCE,
};
use curvlab_core::similarity::{
    assemble_carleson, build_idempotent, carleson_samples, defect_profile, hs_projection_derivative, splitting_angle,
    CarlesonQuadrature,
};
use curvlab_core::truncation::{build_truncated_module, build_truncated_quotient, oracle_gram_check};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Univariate polynomial from ascending real coefficients.
fn p(coeffs: &[f64]) -> PolyC {
    PolyC::from_coeffs(&coeffs.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
}

fn col(entries: &[&[f64]]) -> MatrixMultiplier {
    MatrixMultiplier::column(entries.iter().map(|e| p(e)).collect()).unwrap()
}

fn one_z() -> MatrixMultiplier {
    col(&[&[1.0], &[0.0, 1.0]])
}

fn z_one() -> MatrixMultiplier {
    col(&[&[0.0, 1.0], &[1.0]])
}

fn one_z2() -> MatrixMultiplier {
    col(&[&[1.0], &[0.0, 0.0, 1.0]])
}

fn z_one_minus_z() -> MatrixMultiplier {
    col(&[&[0.0, 1.0], &[1.0, -1.0]])
}

fn three_by_two() -> MatrixMultiplier {
    MatrixMultiplier::from_rows(
        1,
        vec![vec![p(&[1.0]), p(&[0.0])], vec![p(&[0.0]), p(&[1.0])], vec![p(&[0.0, 1.0]), p(&[0.0, 0.0, 1.0])]],
    )
    .unwrap()
}

fn kernels() -> Vec<KernelSpec> {
    vec![KernelSpec::szego(), KernelSpec::bergman(), KernelSpec::weighted_bergman(1.0).unwrap()]
}

fn multipliers() -> Vec<MatrixMultiplier> {
    vec![one_z(), z_one_minus_z(), three_by_two()]
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: curvlab_core::Error) -> String {
    format!("error: {e}")
}

fn curvature_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for (kernel, coef) in kernels().into_iter().zip([1.0, 2.0, 3.0]) {
        for x in [0.0, 0.3, 0.6] {
            let got = kernel_curvature(&kernel, &Point::real(x)).map_err(err)?.scalar(0, 0);
            let exact = -coef / (1.0 - x * x).powi(2);
            worst = worst.max((got - exact).norm() / exact.abs());
        }
    }
    check(worst <= 1e-6, format!("max relative error {worst:.2e} (tol 1e-6)"))
}

fn additivity() -> Outcome {
    let grid = GridSpec::default();
    let mut worst: f64 = 0.0;
    for kernel in kernels() {
        for theta in multipliers() {
            let spec = QuotientSpec::new(kernel.clone(), theta, None).map_err(err)?;
            worst = worst.max(verify_additivity(&spec, &grid, ErrorPolicy::Abort).map_err(err)?.max_residual);
        }
    }
    check(worst <= 1e-6, format!("max residual {worst:.2e} over 9 cases x 1153 points (tol 1e-6)"))
}

fn isomorphism() -> Outcome {
    let grid = GridSpec::default();
    let same = iso_test(&one_z(), &z_one(), &grid, DEFAULT_ISO_TOLERANCE).map_err(err)?;
    let different = iso_test(&one_z(), &one_z2(), &grid, DEFAULT_ISO_TOLERANCE).map_err(err)?;
    let at_origin = different
        .per_point
        .iter()
        .find(|(z, _)| z.norm() == 0.0)
        .map(|(_, d)| *d)
        .ok_or("grid has no origin")?;
    check(
        same.isomorphic && same.max_deviation <= 1e-8 && !different.isomorphic && at_origin >= 0.9,
        format!(
            "[[1],[z]] vs [[z],[1]]: iso={} dev {:.2e}; [[1],[z]] vs [[1],[z^2]]: iso={} dev at 0 = {at_origin:.6}",
            same.isomorphic, same.max_deviation, different.isomorphic
        ),
    )
}

fn building_block_independence() -> Outcome {
    let grid = GridSpec::disk(0.8, 8, 16);
    let ks = kernels();
    let mut worst: f64 = 0.0;
    let mut all_consistent = true;
    for a in 0..ks.len() {
        for b in a + 1..ks.len() {
            for (t1, t2) in [(one_z(), z_one()), (one_z(), one_z2())] {
                let r = cross_kernel_check(&ks[a], &ks[b], &t1, &t2, &grid, DEFAULT_ISO_TOLERANCE).map_err(err)?;
                all_consistent &= r.consistent && r.twist_bitwise_identical;
                worst = worst.max(r.max_twist_discrepancy);
            }
        }
    }
    // splitting is computed from the symbols of quotients built on each kernel
    let theta = z_one_minus_z();
    let (p1, p2) = bezout_left_inverse(theta.entry(0, 0), theta.entry(1, 0)).map_err(err)?;
    let psi = MatrixMultiplier::from_rows(1, vec![vec![p1, p2]]).map_err(err)?;
    let mut splits = Vec::new();
    for kernel in &ks {
        let spec = QuotientSpec::new(kernel.clone(), theta.clone(), Some(psi.clone())).map_err(err)?;
        let q = build_idempotent(spec.theta(), spec.psi().unwrap()).map_err(err)?;
        let s = splitting_angle(spec.theta(), &q, &GridSpec::default()).map_err(err)?;
        splits.push((s.min_angle.to_bits(), s.max_condition.to_bits(), s.witness.to_flat()));
    }
    let splits_identical = splits.windows(2).all(|w| w[0] == w[1]);
    check(
        all_consistent && splits_identical,
        format!(
            "3 kernel pairs x 2 symbol pairs consistent={all_consistent}, max twist discrepancy {worst:.2e}; splitting bitwise identical={splits_identical}"
        ),
    )
}

fn idempotent_exactness() -> Outcome {
    let theta = z_one_minus_z();
    let (p1, p2) = bezout_left_inverse(theta.entry(0, 0), theta.entry(1, 0)).map_err(err)?;
    let bezout_is_ones = p1 == p(&[1.0]) && p2 == p(&[1.0]);
    let psi = MatrixMultiplier::from_rows(1, vec![vec![p1, p2]]).map_err(err)?;
    let r = build_idempotent(&theta, &psi).map_err(err)?.residuals();
    check(
        bezout_is_ones && r.max() <= 1e-12,
        format!(
            "Psi = [[1,1]]: {bezout_is_ones}; Q^2-Q {:.1e}, Q Theta {:.1e}, trace Q - 1 {:.1e} (tol 1e-12)",
            r.square, r.annihilation, r.trace
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20_260_417);
    let points: Vec<Complex64> = (0..10)
        .map(|_| Complex64::from_polar(0.6 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let (mut eig, mut orth, mut gram48): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut dims_ok = true;
    let mut decreasing = true;
    for kernel in [KernelSpec::szego(), KernelSpec::bergman()] {
        let module = build_truncated_module(&kernel, 48).map_err(err)?;
        for theta in multipliers() {
            let quotient = build_truncated_quotient(&module, &theta).map_err(err)?;
            let m = theta.rows() - theta.cols();
            for (j, &w) in points.iter().enumerate() {
                let r = quotient.eigenvector_check(w).map_err(err)?;
                eig = eig.max(r.eigen_residual);
                orth = orth.max(r.orthogonality_residual);
                dims_ok &= quotient.localized_dimension(w).map_err(err)? == m;
                let z = points[(j + 3) % points.len()];
                let d24 = oracle_gram_check(&kernel, &theta, z, w, 24).map_err(err)?;
                let d48 = oracle_gram_check(&kernel, &theta, z, w, 48).map_err(err)?;
                gram48 = gram48.max(d48);
                // both at rounding level counts as not increasing
                decreasing &= d48 < d24 || d24 <= 1e-14;
            }
        }
    }
    check(
        eig <= 1e-8 && orth <= 1e-8 && dims_ok && gram48 <= 1e-8 && decreasing,
        format!(
            "N=48, 10 points, 2 kernels x 3 symbols: eigen {eig:.1e}, orthogonality {orth:.1e}, localized dim = q-p: {dims_ok}, gram {gram48:.1e}, decreasing 24->48: {decreasing}"
        ),
    )
}

fn hs_identity() -> Outcome {
    let specs = [
        (KernelSpec::szego(), one_z()),
        (KernelSpec::bergman(), z_one_minus_z()),
        (KernelSpec::weighted_bergman(1.0).unwrap(), three_by_two()),
    ];
    let points: Vec<Point> = GridSpec::disk(0.8, 4, 5).points().map_err(err)?.into_iter().skip(1).collect();
    let mut worst: f64 = 0.0;
    for (kernel, theta) in &specs {
        let spec = QuotientSpec::new(kernel.clone(), theta.clone(), None).map_err(err)?;
        let delta = delta_theta(theta).map_err(err)?;
        for z in &points {
            let hs = hs_projection_derivative(&spec.gram_at(z).map_err(err)?, z, &Default::default()).map_err(err)?;
            // d dbar log G = s / (1 - |z|^2)^2 + d dbar log ||Delta||^2
            let t = 1.0 - z.norm() * z.norm();
            let s = -kernel_curvature(kernel, &Point::real(0.0)).map_err(err)?.scalar(0, 0).re;
            let exact = s / (t * t) + log_norm_hessian(&delta, z).map_err(err)?[0][0].re;
            worst = worst.max((hs - exact).abs() / exact.abs());
        }
    }
    let trivial = QuotientSpec::new(KernelSpec::szego(), col(&[&[1.0], &[0.0]]), None).map_err(err)?;
    let h = defect_profile(&trivial, &GridSpec::default()).map_err(err)?.max_abs();
    check(
        worst <= 1e-6 && h <= 1e-8,
        format!("3 specs x {} points: max relative error {worst:.2e} (tol 1e-6); trivial defect {h:.1e} (tol 1e-8)", points.len()),
    )
}

fn carleson() -> Outcome {
    let spec = QuotientSpec::new(KernelSpec::szego(), one_z(), None).map_err(err)?;
    let quad = CarlesonQuadrature::default();
    let h = carleson_samples(&spec, &quad).map_err(err)?;
    let r6 = assemble_carleson(&quad, &h, 6, 1).map_err(err)?;
    let r8 = assemble_carleson(&quad, &h, 8, 1).map_err(err)?;
    let drift = (r6.sup_ratio - r8.sup_ratio).abs() / r6.sup_ratio.abs();
    let levels: Vec<String> = r8.level_ratios.iter().map(|r| format!("{r:.4}")).collect();
    check(
        r8.pointwise_constant <= 1.0 + 1e-3 && drift <= 0.05,
        format!(
            "pointwise {:.6}, sup ratio L6 {:.6} L8 {:.6} (drift {drift:.1e}), r_max {}, per level [{}]",
            r8.pointwise_constant,
            r6.sup_ratio,
            r8.sup_ratio,
            quad.r_max,
            levels.join(", ")
        ),
    )
}

fn dft(q: usize) -> CMat {
    let w = std::f64::consts::TAU / q as f64;
    CMat::from_fn(q, q, |j, k| Complex64::from_polar(1.0 / (q as f64).sqrt(), w * (j * k) as f64))
}

fn gauge(p: usize) -> CMat {
    CMat::from_fn(p, p, |i, j| if i == j { c(2.0 + i as f64, 0.5) } else { c(0.3, -0.7 * (i + j) as f64) })
}

fn invariance() -> Outcome {
    let grid = GridSpec::disk(0.8, 6, 12);
    let mut curvature_dev: f64 = 0.0;
    let mut verdicts_ok = true;
    let symbols = multipliers();
    for theta in &symbols {
        let (q, p) = (theta.rows(), theta.cols());
        let transformed = [
            theta.mul(&MatrixMultiplier::constant(&gauge(p), 1)).map_err(err)?,
            MatrixMultiplier::constant(&dft(q), 1).mul(theta).map_err(err)?,
            theta.scale(c(-1.5, 2.0)),
        ];
        for t in &transformed {
            for kernel in kernels() {
                let a = QuotientSpec::new(kernel.clone(), theta.clone(), None).map_err(err)?;
                let b = QuotientSpec::new(kernel, t.clone(), None).map_err(err)?;
                for z in grid.points().map_err(err)? {
                    let ka = quotient_curvature(&a, &z).map_err(err)?;
                    let kb = quotient_curvature(&b, &z).map_err(err)?;
                    curvature_dev = curvature_dev.max(ka.max_deviation(&kb).map_err(err)?);
                }
            }
            verdicts_ok &= iso_test(theta, t, &grid, DEFAULT_ISO_TOLERANCE).map_err(err)?.isomorphic;
            for other in symbols.iter().filter(|o| o.rows() - o.cols() == q - p) {
                let before = iso_test(theta, other, &grid, DEFAULT_ISO_TOLERANCE).map_err(err)?.isomorphic;
                let after = iso_test(t, other, &grid, DEFAULT_ISO_TOLERANCE).map_err(err)?.isomorphic;
                verdicts_ok &= before == after;
            }
        }
    }
    check(
        curvature_dev <= 1e-6 && verdicts_ok,
        format!("gauge/unitary/scalar over 3 kernels x 3 symbols: curvature change {curvature_dev:.2e} (tol 1e-6), verdicts unchanged: {verdicts_ok}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("curvature oracle agreement", curvature_oracle),
        ("additivity identity", additivity),
        ("isomorphism criterion", isomorphism),
        ("building-block independence", building_block_independence),
        ("idempotent exactness", idempotent_exactness),
        ("oracle equivalence", oracle_equivalence),
        ("rank-one HS identity", hs_identity),
        ("Carleson diagnostic sanity", carleson),
        ("invariance suite", invariance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
