//! Grid sweeps: `shell-report` and `figure-data`.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use nullshell::jump::{check_admissibility, JumpFunction, SampleGrid};
use nullshell::shell::{classify_shell, shell_scalars};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Loaded;

/// Shell quantities at one grid point, `z = r e₂`.
#[derive(Debug, Clone, Copy)]
pub struct Row {
    pub v: f64,
    pub r: f64,
    pub dv_h: f64,
    pub p: f64,
    pub rho: f64,
    pub jr: f64,
}

fn row(h: &JumpFunction, v: f64, z: &[f64]) -> nullshell::Result<Row> {
    let r = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    let s = shell_scalars(h, v, z)?;
    let dv_h = h.jets(v, z, 1)?.d1(0);
    let jr = s.flux.iter().zip(z).map(|(j, x)| j * x).sum::<f64>() / r;
    Ok(Row {
        v,
        r,
        dv_h,
        p: s.pressure,
        rho: s.rho,
        jr,
    })
}

/// Rows in grid order (`v` outer, `r` inner); the parallel map keeps the order.
pub fn rows(h: &JumpFunction, grid: &SampleGrid) -> Vec<nullshell::Result<Row>> {
    grid.points.par_iter().map(|(v, z)| row(h, *v, z)).collect()
}

pub const CSV_HEADER: &str = "v,r,dvH,p,rho,jr";

pub fn figure_csv(cfg: &Loaded) -> Result<String> {
    let grid = SampleGrid::v_r(&cfg.v_range, &cfg.r_range, cfg.h.dim_n());
    let mut out = String::with_capacity(grid.points.len() * 140);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (k, r) in rows(&cfg.h, &grid).into_iter().enumerate() {
        let r = match r {
            Ok(r) => r,
            Err(e) => bail!("grid point {k}: {e}"),
        };
        let vals = [r.v, r.r, r.dv_h, r.p, r.rho, r.jr];
        if let Some(bad) = vals.iter().find(|x| !x.is_finite()) {
            bail!("grid point {k} (v = {}, r = {}): non-finite value {bad}", r.v, r.r);
        }
        let cells: Vec<String> = vals.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", cells.join(",")).expect("writing to a String");
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct Stat {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `(v, r)` of the minimum and of the maximum.
    pub argmin: (f64, f64),
    pub argmax: (f64, f64),
}

fn stat(rows: &[Row], f: impl Fn(&Row) -> f64) -> Stat {
    let mut s = Stat {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        mean: 0.0,
        argmin: (0.0, 0.0),
        argmax: (0.0, 0.0),
    };
    for r in rows {
        let x = f(r);
        if x < s.min {
            s.min = x;
            s.argmin = (r.v, r.r);
        }
        if x > s.max {
            s.max = x;
            s.argmax = (r.v, r.r);
        }
        s.mean += x;
    }
    s.mean /= rows.len().max(1) as f64;
    s
}

#[derive(Debug, Serialize)]
pub struct ShellReport {
    pub command: &'static str,
    pub jump: String,
    pub dim_n: usize,
    pub points: usize,
    pub classification: Option<String>,
    pub dv_h: Option<Stat>,
    pub rho: Option<Stat>,
    pub pressure: Option<Stat>,
    pub radial_flux: Option<Stat>,
    pub failures: Vec<String>,
    pub pass: bool,
}

pub fn shell_report(cfg: &Loaded) -> ShellReport {
    let grid = SampleGrid::v_r(&cfg.v_range, &cfg.r_range, cfg.h.dim_n());
    let mut failures = Vec::new();
    let adm = check_admissibility(&cfg.h, &grid);
    failures.extend(adm.failures.iter().cloned());
    let mut good = Vec::with_capacity(grid.points.len());
    for (k, r) in rows(&cfg.h, &grid).into_iter().enumerate() {
        match r {
            Ok(r) => good.push(r),
            Err(e) => failures.push(format!("grid point {k}: {e}")),
        }
    }
    let classification = match classify_shell(&cfg.h, &grid) {
        Ok(c) => Some(c.to_string()),
        Err(e) => {
            failures.push(format!("classification: {e}"));
            None
        }
    };
    failures.dedup();
    let have = !good.is_empty();
    ShellReport {
        command: "shell-report",
        jump: crate::verify::describe(cfg),
        dim_n: cfg.h.dim_n(),
        points: grid.points.len(),
        classification,
        dv_h: have.then(|| stat(&good, |r| r.dv_h)),
        rho: have.then(|| stat(&good, |r| r.rho)),
        pressure: have.then(|| stat(&good, |r| r.p)),
        radial_flux: have.then(|| stat(&good, |r| r.jr)),
        pass: failures.is_empty(),
        failures,
    }
}
