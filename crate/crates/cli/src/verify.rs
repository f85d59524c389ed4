//! `verify`: the invariant suite on the configured matching.

use nullshell::jump::{check_admissibility, JumpFunction, SampleGrid};
use nullshell::matching::{
    half_plane_counterexample, null_shell_gluing, pullback_plus, verify_geodesic_extension,
    verify_junction, verify_xi_aligning,
};
use nullshell::metric::{lipschitz_metric, lipschitz_values, LipschitzMetric};
use nullshell::shell::jump_tensor_minkowski;
use nullshell::tensor::{conformally_flat, curvature_report, Chart, MetricField};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Loaded;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub lambda: f64,
    pub dim_n: usize,
    pub jump: String,
    pub checks: Vec<Check>,
    pub failures: Vec<&'static str>,
    pub pass: bool,
}

fn failed(name: &'static str, tolerance: f64, err: impl std::fmt::Display) -> Check {
    Check {
        name,
        pass: false,
        residual: f64::NAN,
        tolerance,
        samples: 0,
        detail: err.to_string(),
    }
}

fn max_check(
    name: &'static str,
    tolerance: f64,
    results: Vec<nullshell::Result<f64>>,
    detail: &str,
) -> Check {
    let samples = results.len();
    let mut worst = 0.0f64;
    for r in results {
        match r {
            Ok(x) if x.is_finite() => worst = worst.max(x),
            Ok(x) => return failed(name, tolerance, format!("non-finite residual {x}")),
            Err(e) => return failed(name, tolerance, e),
        }
    }
    Check {
        name,
        pass: worst <= tolerance,
        residual: worst,
        tolerance,
        samples,
        detail: detail.to_string(),
    }
}

fn max_rel_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs() / y.abs().max(1.0)))
}

/// Every `len/count`-th point, so the sample spans the whole grid.
fn strided(grid: &SampleGrid, count: usize) -> Vec<(f64, Vec<f64>)> {
    let n = grid.points.len();
    if count >= n {
        return grid.points.clone();
    }
    (0..count).map(|k| grid.points[k * n / count].clone()).collect()
}

fn with_u(samples: &[(f64, Vec<f64>)], us: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for (v, z) in samples {
        for &u in us {
            let mut p = vec![u, *v];
            p.extend_from_slice(z);
            out.push(p);
        }
    }
    out
}

fn continuity(h: &JumpFunction, lambda: f64, v: f64, z: &[f64]) -> nullshell::Result<(f64, f64)> {
    let n = h.dim_n();
    let mut p = vec![0.0, v];
    p.extend_from_slice(z);
    let plus = lipschitz_metric(h, lambda, &p, 1)?;
    // the minus chart is the identity, so its metric is η/Ω² itself
    let minus = conformally_flat(lambda, n + 1, Chart::NullCoords).eval(&p, 1)?;
    let mut gap = 0.0f64;
    for mu in 0..=n {
        for nu in 0..=n {
            gap = gap.max((plus[mu][nu].value() - minus[mu][nu].value()).abs());
        }
    }
    let mut slope = 0.0f64;
    if lambda == 0.0 {
        let y = jump_tensor_minkowski(h, v, z)?;
        for a in 0..n {
            for b in 0..n {
                let jump = -0.5 * (plus[a + 1][b + 1].d1(0) - minus[a + 1][b + 1].d1(0));
                slope = slope.max((jump - y[a][b]).abs());
            }
        }
    }
    Ok((gap, slope))
}

pub fn run(cfg: &Loaded) -> VerifyReport {
    let h = &cfg.h;
    let lambda = cfg.raw.lambda;
    let tol = &cfg.raw.tolerances;
    let grid = SampleGrid::v_r(&cfg.v_range, &cfg.r_range, h.dim_n());
    let samples = strided(&grid, cfg.raw.grid.verify_samples);
    let us = &cfg.raw.grid.u_offsets;
    let off_shell = with_u(&samples, us);
    let positive: Vec<f64> = us.iter().copied().filter(|&u| u > 0.0).collect();
    let plus_side = with_u(&samples, &positive);
    let mut checks = Vec::new();

    let adm = check_admissibility(h, &grid);
    checks.push(Check {
        name: "admissibility",
        pass: adm.pass,
        residual: adm.min_dv_h,
        tolerance: 0.0,
        samples: adm.points_checked,
        detail: if adm.failures.is_empty() {
            "min ∂_v H over the grid (must be > 0)".into()
        } else {
            adm.failures.join("; ")
        },
    });

    checks.push(match verify_junction(h, lambda, &samples) {
        Ok(r) => Check {
            name: "junction",
            pass: r.pass,
            residual: r.max_first_form.max(r.max_rigging_tangent).max(r.max_rigging_norm),
            tolerance: r.tolerance,
            samples: r.samples,
            detail: format!(
                "first form {:.3e}, rigging-tangent {:.3e}, rigging-norm {:.3e}, orientation {}",
                r.max_first_form, r.max_rigging_tangent, r.max_rigging_norm, r.orientation_ok
            ),
        },
        Err(e) => failed("junction", 1e-9, e),
    });

    let metric = LipschitzMetric::new(h.clone(), lambda);
    let curv: Vec<_> = off_shell
        .par_iter()
        .map(|p| {
            let r = curvature_report(&metric, p, lambda / 3.0)?;
            Ok(r.constant_curvature_residual / r.max_abs_riemann.max(1.0))
        })
        .collect();
    checks.push(max_check(
        "curvature",
        tol.curvature,
        curv,
        "max |R − (Λ/3)(g∧g)| / max(1, max|R|) off the shell",
    ));

    let cont: Vec<_> = samples
        .par_iter()
        .map(|(v, z)| continuity(h, lambda, *v, z))
        .collect();
    let gaps = cont.iter().map(|r| r.clone().map(|x| x.0)).collect();
    checks.push(max_check(
        "continuity",
        tol.continuity,
        gaps,
        "max |g⁺ − g⁻| on the shell",
    ));
    if lambda == 0.0 {
        let slopes = cont.into_iter().map(|r| r.map(|x| x.1)).collect();
        checks.push(max_check(
            "normal_derivative_jump",
            tol.continuity,
            slopes,
            "max |−½[∂_u g_ab] − [Y]_ab|",
        ));
    }

    let pull: Vec<_> = plus_side
        .par_iter()
        .map(|p| Ok(max_rel_diff(&pullback_plus(h, lambda, p)?, &lipschitz_values(h, lambda, p)?)))
        .collect();
    checks.push(max_check(
        "pullback",
        tol.pullback,
        pull,
        "max relative |Φ*(η/Ω²) − g|, u > 0",
    ));

    checks.push(match verify_geodesic_extension(lambda, h, &plus_side) {
        Ok(r) => Check {
            name: "geodesic_extension",
            pass: r.pass,
            residual: r.null.max(r.geodesic).max(r.affine),
            tolerance: r.tolerance,
            samples: r.samples,
            detail: format!(
                "null {:.3e}, geodesic {:.3e}, affine {:.3e}",
                r.null, r.geodesic, r.affine
            ),
        },
        Err(e) => failed("geodesic_extension", 1e-9, e),
    });

    let boundary: Vec<Vec<f64>> = samples
        .iter()
        .map(|(v, z)| {
            let mut s = vec![*v];
            s.extend_from_slice(z);
            s
        })
        .collect();
    checks.push(match verify_xi_aligning(&null_shell_gluing(h, lambda), &boundary) {
        Ok(r) => Check {
            name: "xi_aligning",
            pass: r.pass,
            residual: r.isometry.max(r.xi_tangent).max(r.xi_xi),
            tolerance: r.tolerance,
            samples: r.samples,
            detail: format!(
                "(i) {:.3e}, (ii) {:.3e}, (iii) {:.3e}",
                r.isometry, r.xi_tangent, r.xi_xi
            ),
        },
        Err(e) => failed("xi_aligning", 1e-10, e),
    });

    let ce_samples = [vec![-1.0], vec![0.0], vec![2.5]];
    checks.push(
        match verify_xi_aligning(&half_plane_counterexample::<f64>(), &ce_samples) {
            Ok(r) => Check {
                name: "xi_aligning_counterexample",
                pass: !r.pass && r.xi_xi == 1.0,
                residual: r.xi_xi,
                tolerance: 1.0,
                samples: r.samples,
                detail: format!(
                    "half planes dx²+dy² | dx²+2dy²: must be rejected with (iii) = 1; got (i) {}, (ii) {}, (iii) {}",
                    r.isometry, r.xi_tangent, r.xi_xi
                ),
            },
            Err(e) => failed("xi_aligning_counterexample", 1.0, e),
        },
    );

    let failures: Vec<&'static str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    VerifyReport {
        command: "verify",
        lambda,
        dim_n: h.dim_n(),
        jump: describe(cfg),
        pass: failures.is_empty(),
        failures,
        checks,
    }
}

pub fn describe(cfg: &Loaded) -> String {
    use crate::config::JumpConfig;
    match &cfg.raw.jump {
        JumpConfig::Expression { expr } => expr.clone(),
        JumpConfig::Example { a, b, c, h0 } => format!("example(a={a}, b={b}, c={c}, h0={h0})"),
        JumpConfig::Linear { a, b, c } => format!("linear(a={a}, b={b:?}, c={c})"),
    }
}
