//! Subcommand implementations. Each returns a JSON result, a per-point
//! table and whether its verdict passed.

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use curvlab_core::bundle::CurvatureMatrix;
use curvlab_core::grid::GridSpec;
use curvlab_core::kernel::{KernelSpec, Point};
use curvlab_core::linalg;
use curvlab_core::multiplier::{bezout_left_inverse, corona_bound, verify_left_inverse, MatrixMultiplier};
use curvlab_core::quotient::{
    additivity_at, cross_kernel_check, iso_test, kernel_curvature, quotient_curvature, summarize_additivity,
    QuotientSpec, DEFAULT_ISO_TOLERANCE,
};
use curvlab_core::similarity::{
    assemble_carleson, build_idempotent, defect_at, splitting_angle, splitting_angle_at,
    uniform_equivalence_diagnostic, CarlesonQuadrature,
};
use curvlab_core::truncation::{build_truncated_module, build_truncated_quotient, oracle_gram_check, similarity_map_condition};
use curvlab_core::bundle::JetMethod;
use curvlab_core::Error;
use num_complex::Complex64;

use crate::config::{CarlesonConfig, ErrorPolicyName, OracleConfig, RunConfig};
use crate::format::{GridJson, KernelJson, MultiplierJson};
use crate::report::Table;

pub const DEFAULT_ADDITIVITY_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_CORONA_EPSILON: f64 = 1e-12;
pub const DEFAULT_CERTIFICATE_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::Subcommand)]
pub enum CommandName {
    Curvature,
    QuotientCurvature,
    VerifyAdditivity,
    IsoTest,
    CrossKernel,
    Corona,
    Similarity,
    Carleson,
    Oracle,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Curvature => "curvature",
            CommandName::QuotientCurvature => "quotient-curvature",
            CommandName::VerifyAdditivity => "verify-additivity",
            CommandName::IsoTest => "iso-test",
            CommandName::CrossKernel => "cross-kernel",
            CommandName::Corona => "corona",
            CommandName::Similarity => "similarity",
            CommandName::Carleson => "carleson",
            CommandName::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Isomorphic,
    NotIsomorphic,
}

impl Expect {
    fn matches(self, isomorphic: bool) -> bool {
        isomorphic == (self == Expect::Isomorphic)
    }
}

/// Command-line overrides of the configuration.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub grid_r: Option<f64>,
    pub grid_n: Option<usize>,
    pub expect: Option<Expect>,
}

pub struct Outcome {
    pub result: Value,
    pub table: Table,
    pub passed: bool,
}

struct Ctx<'a> {
    config: &'a RunConfig,
    overrides: &'a Overrides,
}

impl Ctx<'_> {
    fn kernel(&self) -> Result<KernelSpec> {
        self.config.kernel.as_ref().context("config needs \"kernel\"")?.to_spec().context("in \"kernel\"")
    }

    fn theta(&self) -> Result<MatrixMultiplier> {
        self.config.multiplier.as_ref().context("config needs \"multiplier\"")?.to_multiplier().context("in \"multiplier\"")
    }

    fn pair(&self) -> Result<(MatrixMultiplier, MatrixMultiplier)> {
        let list = self.config.multipliers.as_ref().context("config needs \"multipliers\" (a pair)")?;
        ensure!(list.len() == 2, "\"multipliers\" must hold exactly two symbols, got {}", list.len());
        Ok((
            list[0].to_multiplier().context("in \"multipliers\"[0]")?,
            list[1].to_multiplier().context("in \"multipliers\"[1]")?,
        ))
    }

    fn psi(&self) -> Result<Option<MatrixMultiplier>> {
        self.config.psi.as_ref().map(|p| p.to_multiplier().context("in \"psi\"")).transpose()
    }

    /// The configured left inverse, or the Bezout one for a one-variable
    /// `2 x 1` symbol.
    fn psi_or_bezout(&self, theta: &MatrixMultiplier) -> Result<(MatrixMultiplier, &'static str)> {
        if let Some(psi) = self.psi()? {
            return Ok((psi, "config"));
        }
        if theta.rows() == 2 && theta.cols() == 1 && theta.nvars() == 1 {
            let (a, b) = bezout_left_inverse(theta.entry(0, 0), theta.entry(1, 0))?;
            return Ok((MatrixMultiplier::from_rows(1, vec![vec![a, b]])?, "bezout"));
        }
        bail!("config needs \"psi\" (a left inverse is only constructed for one-variable 2x1 symbols)")
    }

    fn grid(&self, kernel: Option<&KernelSpec>) -> Result<GridSpec> {
        let mut grid = match (&self.config.grid, kernel) {
            (Some(g), _) => g.to_spec().context("in \"grid\"")?,
            (None, Some(k)) => GridSpec::for_domain(&k.domain()),
            (None, None) => GridSpec::default(),
        };
        if let Some(r) = self.overrides.grid_r {
            grid = grid.with_r_max(r);
        }
        if let Some(n) = self.overrides.grid_n {
            grid = grid.with_resolution(n);
        }
        grid.validate()?;
        if let Some(k) = kernel {
            ensure!(grid.dim() == k.dim(), "grid in dimension {} for a kernel in dimension {}", grid.dim(), k.dim());
        }
        Ok(grid)
    }

    fn tolerance(&self, configured: Option<f64>, default: f64) -> Result<f64> {
        let tol = self.overrides.tol.or(configured).unwrap_or(default);
        ensure!(tol.is_finite() && tol >= 0.0, "tolerance must be a finite non-negative number, got {tol}");
        Ok(tol)
    }

    fn skip_errors(&self) -> bool {
        self.config.error_policy == ErrorPolicyName::Skip
    }
}

fn complex(c: Complex64) -> Value {
    json!([c.re, c.im])
}

fn curvature_json(k: &CurvatureMatrix) -> Value {
    let blocks: Vec<Vec<Value>> = k
        .blocks()
        .iter()
        .map(|row| {
            row.iter()
                .map(|b| {
                    let rows: Vec<Vec<Value>> =
                        (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| complex(b[(i, j)])).collect()).collect();
                    json!(rows)
                })
                .collect()
        })
        .collect();
    json!(blocks)
}

/// Real part of the trace of the `(0, 0)` block, the scalar curvature on the disk.
fn leading_value(k: &CurvatureMatrix) -> f64 {
    linalg::trace(k.block(0, 0)).re
}

/// Evaluates `f` at every point in parallel, keeping grid order; failures
/// are collected when `skip` is set and abort otherwise.
fn per_point<T: Send>(
    points: &[Point],
    skip: bool,
    f: impl Fn(&Point) -> curvlab_core::Result<T> + Sync,
) -> Result<(Vec<(Point, T)>, Vec<(Point, Error)>)> {
    let results: Vec<_> = points.par_iter().map(|z| (z.clone(), f(z))).collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (z, r) in results {
        match r {
            Ok(v) => ok.push((z, v)),
            Err(e) if skip => skipped.push((z, e)),
            Err(e) => return Err(e.into()),
        }
    }
    Ok((ok, skipped))
}

fn skipped_json(skipped: &[(Point, Error)]) -> Value {
    json!(skipped.iter().map(|(z, e)| json!({"z": z.to_flat(), "error": e.to_string()})).collect::<Vec<_>>())
}

pub fn dispatch(command: CommandName, config: &RunConfig, overrides: &Overrides) -> Result<Outcome> {
    if overrides.expect.is_some() && !matches!(command, CommandName::IsoTest | CommandName::CrossKernel) {
        bail!("--expect applies to iso-test and cross-kernel only");
    }
    let ctx = Ctx { config, overrides };
    match command {
        CommandName::Curvature => curvature(&ctx),
        CommandName::QuotientCurvature => quotient_curvature_cmd(&ctx),
        CommandName::VerifyAdditivity => verify_additivity_cmd(&ctx),
        CommandName::IsoTest => iso_test_cmd(&ctx),
        CommandName::CrossKernel => cross_kernel(&ctx),
        CommandName::Corona => corona(&ctx),
        CommandName::Similarity => similarity(&ctx),
        CommandName::Carleson => carleson(&ctx),
        CommandName::Oracle => oracle(&ctx),
    }
}

fn curvature(ctx: &Ctx) -> Result<Outcome> {
    let kernel = ctx.kernel()?;
    let grid = ctx.grid(Some(&kernel))?;
    let (values, skipped) = per_point(&grid.points()?, ctx.skip_errors(), |z| kernel_curvature(&kernel, z))?;
    let mut table = Table::with_point_columns(kernel.dim(), &["curvature"]);
    let mut points = Vec::with_capacity(values.len());
    for (z, k) in &values {
        table.push(&z.to_flat(), &[leading_value(k)]);
        points.push(json!({"z": z.to_flat(), "curvature": curvature_json(k)}));
    }
    let result = json!({
        "kernel": KernelJson::from_spec(&kernel),
        "grid": GridJson::from_spec(&grid),
        "points": points,
        "skipped": skipped_json(&skipped),
    });
    Ok(Outcome { result, table, passed: true })
}

fn quotient_spec(ctx: &Ctx) -> Result<(QuotientSpec, GridSpec, Value)> {
    let kernel = ctx.kernel()?;
    let grid = ctx.grid(Some(&kernel))?;
    let spec = QuotientSpec::new(kernel, ctx.theta()?, ctx.psi()?)?;
    let tol = ctx.config.tolerances.certificate.unwrap_or(DEFAULT_CERTIFICATE_TOLERANCE);
    let certificate = match spec.certify(&grid.points()?, tol)? {
        Some(c) => json!({"residual": c.residual, "sup_psi_norm": c.sup_psi_norm, "tolerance": tol}),
        None => Value::Null,
    };
    Ok((spec, grid, certificate))
}

fn quotient_curvature_cmd(ctx: &Ctx) -> Result<Outcome> {
    let (spec, grid, certificate) = quotient_spec(ctx)?;
    let (values, skipped) = per_point(&grid.points()?, ctx.skip_errors(), |z| quotient_curvature(&spec, z))?;
    let mut table = Table::with_point_columns(spec.kernel().dim(), &["curvature"]);
    let mut points = Vec::with_capacity(values.len());
    for (z, k) in &values {
        table.push(&z.to_flat(), &[leading_value(k)]);
        points.push(json!({"z": z.to_flat(), "curvature": curvature_json(k)}));
    }
    let result = json!({
        "kernel": KernelJson::from_spec(spec.kernel()),
        "rank": spec.rank(),
        "grid": GridJson::from_spec(&grid),
        "certificate": certificate,
        "points": points,
        "skipped": skipped_json(&skipped),
    });
    Ok(Outcome { result, table, passed: true })
}

fn verify_additivity_cmd(ctx: &Ctx) -> Result<Outcome> {
    let (spec, grid, certificate) = quotient_spec(ctx)?;
    let tol = ctx.tolerance(ctx.config.tolerances.additivity, DEFAULT_ADDITIVITY_TOLERANCE)?;
    let (values, skipped) = per_point(&grid.points()?, ctx.skip_errors(), |z| additivity_at(&spec, z))?;
    let skipped_value = skipped_json(&skipped);
    let report = summarize_additivity(values.into_iter().map(|(_, p)| p).collect(), skipped)?;
    let mut table = Table::with_point_columns(spec.kernel().dim(), &["residual"]);
    for p in &report.points {
        table.push(&p.point.to_flat(), &[p.residual]);
    }
    let verdict = report.max_residual <= tol;
    let result = json!({
        "verdict": verdict,
        "max_residual": report.max_residual,
        "witness": report.witness.to_flat(),
        "tolerance": tol,
        "kernel": KernelJson::from_spec(spec.kernel()),
        "grid": GridJson::from_spec(&grid),
        "certificate": certificate,
        "points_evaluated": report.points.len(),
        "skipped": skipped_value,
    });
    Ok(Outcome { result, table, passed: verdict })
}

fn iso_test_cmd(ctx: &Ctx) -> Result<Outcome> {
    let (t1, t2) = ctx.pair()?;
    let grid = match &ctx.config.kernel {
        Some(k) => ctx.grid(Some(&k.to_spec()?))?,
        None => ctx.grid(None)?,
    };
    let tol = ctx.tolerance(ctx.config.tolerances.iso, DEFAULT_ISO_TOLERANCE)?;
    let verdict = iso_test(&t1, &t2, &grid, tol)?;
    let mut table = Table::with_point_columns(grid.dim(), &["deviation"]);
    for (z, d) in &verdict.per_point {
        table.push(&z.to_flat(), &[*d]);
    }
    let passed = ctx.overrides.expect.map_or(true, |e| e.matches(verdict.isomorphic));
    let result = json!({
        "verdict": verdict.isomorphic,
        "numerical": true,
        "max_deviation": verdict.max_deviation,
        "witness": verdict.witness_point.to_flat(),
        "grid": GridJson::from_spec(&grid),
        "tolerance": tol,
        "per_point": Value::Null,
    });
    Ok(Outcome { result, table, passed })
}

fn cross_kernel(ctx: &Ctx) -> Result<Outcome> {
    let (t1, t2) = ctx.pair()?;
    let list = ctx.config.kernels.as_ref().context("config needs \"kernels\" (at least two)")?;
    ensure!(list.len() >= 2, "\"kernels\" needs at least two entries, got {}", list.len());
    let kernels = list
        .iter()
        .enumerate()
        .map(|(i, k)| k.to_spec().with_context(|| format!("in \"kernels\"[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let grid = ctx.grid(Some(&kernels[0]))?;
    let tol = ctx.tolerance(ctx.config.tolerances.iso, DEFAULT_ISO_TOLERANCE)?;
    let pairs: Vec<(usize, usize)> =
        (0..kernels.len()).flat_map(|a| (a + 1..kernels.len()).map(move |b| (a, b))).collect();
    let reports = pairs
        .par_iter()
        .map(|&(a, b)| cross_kernel_check(&kernels[a], &kernels[b], &t1, &t2, &grid, tol))
        .collect::<curvlab_core::Result<Vec<_>>>()?;
    let mut table = Table::with_point_columns(grid.dim(), &["deviation_a", "deviation_b", "pair"]);
    let mut entries = Vec::new();
    let mut consistent = true;
    let mut expectation_met = true;
    for (idx, (&(a, b), r)) in pairs.iter().zip(&reports).enumerate() {
        for ((z, da), (_, db)) in r.verdict_a.per_point.iter().zip(&r.verdict_b.per_point) {
            table.push(&z.to_flat(), &[*da, *db, idx as f64]);
        }
        consistent &= r.consistent;
        if let Some(e) = ctx.overrides.expect {
            expectation_met &= e.matches(r.verdict_a.isomorphic) && e.matches(r.verdict_b.isomorphic);
        }
        entries.push(json!({
            "kernel_a": KernelJson::from_spec(&kernels[a]),
            "kernel_b": KernelJson::from_spec(&kernels[b]),
            "verdict_a": r.verdict_a.isomorphic,
            "verdict_b": r.verdict_b.isomorphic,
            "max_deviation_a": r.verdict_a.max_deviation,
            "max_deviation_b": r.verdict_b.max_deviation,
            "max_twist_discrepancy": r.max_twist_discrepancy,
            "twist_bitwise_identical": r.twist_bitwise_identical,
            "consistent": r.consistent,
        }));
    }
    let result = json!({
        "verdict": consistent,
        "numerical": true,
        "grid": GridJson::from_spec(&grid),
        "tolerance": tol,
        "pairs": entries,
    });
    Ok(Outcome { result, table, passed: consistent && expectation_met })
}

fn corona(ctx: &Ctx) -> Result<Outcome> {
    let theta = ctx.theta()?;
    let grid = match &ctx.config.kernel {
        Some(k) => ctx.grid(Some(&k.to_spec()?))?,
        None => ctx.grid(None)?,
    };
    ensure!(grid.dim() == theta.nvars(), "grid in dimension {} for a symbol in {} variables", grid.dim(), theta.nvars());
    let points = grid.points()?;
    let epsilon = ctx.tolerance(ctx.config.tolerances.corona, DEFAULT_CORONA_EPSILON)?;
    let bound = corona_bound(&theta, &points)?;
    let mut table = Table::with_point_columns(grid.dim(), &["sigma_min"]);
    for z in &points {
        table.push(&z.to_flat(), &[linalg::sigma_min(&theta.eval(z)?)]);
    }
    let mut passed = bound >= epsilon;
    let left_inverse = match ctx.psi_or_bezout(&theta) {
        Ok((psi, source)) => {
            let tol = ctx.config.tolerances.certificate.unwrap_or(DEFAULT_CERTIFICATE_TOLERANCE);
            let cert = verify_left_inverse(&theta, &psi, &points)?;
            passed &= cert.is_valid(tol);
            json!({
                "source": source,
                "psi": MultiplierJson::from_multiplier(&psi),
                "residual": cert.residual,
                "sup_psi_norm": cert.sup_psi_norm,
                "tolerance": tol,
            })
        }
        Err(e) => json!({"error": format!("{e:#}")}),
    };
    let result = json!({
        "verdict": passed,
        "bound": bound,
        "epsilon": epsilon,
        "grid": GridJson::from_spec(&grid),
        "left_inverse": left_inverse,
    });
    Ok(Outcome { result, table, passed })
}

fn similarity(ctx: &Ctx) -> Result<Outcome> {
    let kernel = ctx.kernel()?;
    let grid = ctx.grid(Some(&kernel))?;
    let theta = ctx.theta()?;
    let (psi, source) = ctx.psi_or_bezout(&theta)?;
    let spec = QuotientSpec::new(kernel.clone(), theta.clone(), Some(psi.clone()))?;
    let q = build_idempotent(&theta, &psi)?;
    let split = splitting_angle(&theta, &q, &grid)?;
    let disk = kernel.dim() == 1;
    let points = grid.points()?;
    let (values, _) = per_point(&points, false, |z| {
        let (angle, condition) = splitting_angle_at(&theta, &q, z)?;
        let h = if disk { defect_at(&spec, z, &JetMethod::default())? } else { f64::NAN };
        Ok((angle, condition, h))
    })?;
    let mut table = Table::with_point_columns(grid.dim(), if disk { &["angle", "condition", "h"] } else { &["angle", "condition"] });
    for (z, (angle, condition, h)) in &values {
        if disk {
            table.push(&z.to_flat(), &[*angle, *condition, *h]);
        } else {
            table.push(&z.to_flat(), &[*angle, *condition]);
        }
    }
    let defect = if disk {
        let (max_abs, witness) = values
            .iter()
            .map(|(z, (_, _, h))| (h.abs(), z))
            .fold((0.0, &points[0]), |acc, (a, z)| if a > acc.0 { (a, z) } else { acc });
        json!({
            "m": spec.rank(),
            "max_abs_h": max_abs,
            "witness": witness.to_flat(),
            "non_szego_warning": !kernel.is_szego(),
        })
    } else {
        Value::Null
    };
    let uniform = if theta.rows() == theta.cols() + 1 {
        let (inf, sup) = uniform_equivalence_diagnostic(&theta, &grid)?;
        json!({"inf": inf, "sup": sup})
    } else {
        Value::Null
    };
    let r = q.residuals();
    let result = json!({
        "kernel": KernelJson::from_spec(&kernel),
        "grid": GridJson::from_spec(&grid),
        "psi": {"source": source, "value": MultiplierJson::from_multiplier(&psi)},
        "idempotent": {
            "q": MultiplierJson::from_multiplier(q.matrix()),
            "rank": q.rank(),
            "residuals": {"square": r.square, "annihilation": r.annihilation, "trace": r.trace},
        },
        "splitting": {"min_angle": split.min_angle, "max_condition": split.max_condition, "witness": split.witness.to_flat()},
        "defect": defect,
        "uniform_equivalence": uniform,
    });
    Ok(Outcome { result, table, passed: true })
}

fn carleson(ctx: &Ctx) -> Result<Outcome> {
    let kernel = ctx.kernel()?;
    ensure!(kernel.dim() == 1, "Carleson boxes are defined on the disk");
    let spec = QuotientSpec::new(kernel.clone(), ctx.theta()?, ctx.psi()?)?;
    let cfg = ctx.config.carleson.clone().unwrap_or_else(CarlesonConfig::default);
    let base = CarlesonQuadrature::default();
    let quad = CarlesonQuadrature {
        r_max: ctx.overrides.grid_r.or(cfg.r_max).unwrap_or(base.r_max),
        radial: ctx.overrides.grid_n.or(cfg.radial).unwrap_or(base.radial),
        angular: cfg.angular.unwrap_or_else(|| base.angular.max(1 << cfg.levels.min(30))),
    };
    quad.validate(cfg.levels)?;
    let cells = quad.cells();
    let h = cells
        .par_iter()
        .map(|cell| defect_at(&spec, &cell.center, &JetMethod::Analytic))
        .collect::<curvlab_core::Result<Vec<f64>>>()?;
    let report = assemble_carleson(&quad, &h, cfg.levels, spec.rank())?;
    let mut table = Table::with_point_columns(1, &["h"]);
    for (cell, value) in cells.iter().zip(&h) {
        table.push(&cell.center.to_flat(), &[*value]);
    }
    let result = json!({
        "kernel": KernelJson::from_spec(&kernel),
        "levels": report.levels,
        "sup_ratio": report.sup_ratio,
        "pointwise_constant": report.pointwise_constant,
        "level_ratios": report.level_ratios,
        "negative_cells": report.negative_cells,
        "quadrature": {"r_max": quad.r_max, "radial": quad.radial, "angular": quad.angular},
        "non_szego_warning": !kernel.is_szego(),
    });
    Ok(Outcome { result, table, passed: true })
}

fn oracle(ctx: &Ctx) -> Result<Outcome> {
    let kernel = ctx.kernel()?;
    let theta = ctx.theta()?;
    let cfg = ctx.config.oracle.clone().unwrap_or_else(OracleConfig::default);
    ensure!(!cfg.degrees.is_empty() && !cfg.points.is_empty(), "oracle needs at least one degree and one point");
    let tol = ctx.tolerance(ctx.config.tolerances.oracle, DEFAULT_ORACLE_TOLERANCE)?;
    let psi = ctx.psi_or_bezout(&theta).ok();
    let m = theta.rows().checked_sub(theta.cols()).context("symbol must be q x p with p < q")?;
    let top = *cfg.degrees.iter().max().expect("non-empty");
    let points: Vec<Complex64> = cfg.points.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();

    let mut table = Table::with_point_columns(1, &["N", "eigen", "orthogonality", "gram", "localized_dimension"]);
    let mut entries = Vec::new();
    let mut sweeps = Vec::new();
    let mut passed = true;
    for &n in &cfg.degrees {
        let module = build_truncated_module(&kernel, n)?;
        let quotient = build_truncated_quotient(&module, &theta)?;
        let rows = points
            .par_iter()
            .map(|&w| -> Result<_> {
                let eig = quotient.eigenvector_check(w)?;
                let gram = oracle_gram_check(&kernel, &theta, w, w, n)?;
                let dim = match quotient.localized_dimension(w) {
                    Ok(d) => Ok(d),
                    Err(Error::IndeterminateRank { value, threshold }) => Err((value, threshold)),
                    Err(e) => return Err(e.into()),
                };
                Ok((w, eig, gram, dim))
            })
            .collect::<Result<Vec<_>>>()?;
        for (w, eig, gram, dim) in rows {
            let ok = eig.eigen_residual <= tol && eig.orthogonality_residual <= tol && gram <= tol && dim == Ok(m);
            if n == top {
                passed &= ok;
            }
            let dim_json = match dim {
                Ok(d) => json!(d),
                Err((value, threshold)) => json!({"indeterminate": {"value": value, "threshold": threshold}}),
            };
            table.push(&[w.re, w.im], &[n as f64, eig.eigen_residual, eig.orthogonality_residual, gram, dim.map_or(f64::NAN, |d| d as f64)]);
            entries.push(json!({
                "N": n,
                "w": [w.re, w.im],
                "residuals": {"eigen": eig.eigen_residual, "orthogonality": eig.orthogonality_residual, "gram": gram},
                "localized_dimension": dim_json,
                "verdict": ok,
            }));
        }
        if let Some((psi, _)) = &psi {
            let r = similarity_map_condition(&kernel, &theta, psi, n)?;
            sweeps.push(json!({
                "N": n,
                "condition": r.condition,
                "sigma_min": r.sigma_min,
                "sigma_max": r.sigma_max,
                "module_map_residual": r.module_map_residual,
                "non_invertible": r.non_invertible,
            }));
        }
    }
    let result = json!({
        "verdict": passed,
        "kernel": KernelJson::from_spec(&kernel),
        "expected_dimension": m,
        "tolerance": tol,
        "entries": entries,
        "similarity_map": if psi.is_some() { json!(sweeps) } else { Value::Null },
    });
    Ok(Outcome { result, table, passed })
}
