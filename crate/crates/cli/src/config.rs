//! Run configuration: TOML file, command-line overrides, validation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nullshell::distribution::MollifierKind;
use nullshell::jump::{make_builtin, parse_jump_expression, Builtin, GridRange, JumpFunction};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpConfig {
    Expression { expr: String },
    Example { a: f64, b: f64, c: f64, h0: f64 },
    Linear { a: f64, b: Vec<f64>, c: f64 },
}

impl Default for JumpConfig {
    fn default() -> Self {
        JumpConfig::Example {
            a: 4.0,
            b: 2.0,
            c: 1.0,
            h0: 1.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// `lo:hi:step`
    pub v_range: String,
    /// `lo:hi:step`, radius along `z²`
    pub r_range: String,
    /// Grid points used by `verify` (evenly strided through the grid).
    pub verify_samples: usize,
    /// Normal offsets `u ≠ 0` used by `verify` for off-shell checks.
    pub u_offsets: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            v_range: "-3:3:0.1".into(),
            r_range: "0.3:3:0.1".into(),
            verify_samples: 50,
            u_offsets: vec![-0.5, -0.1, 0.1, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub curvature: f64,
    pub pullback: f64,
    pub continuity: f64,
    pub products: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            curvature: 1e-8,
            pullback: 1e-9,
            continuity: 1e-9,
            products: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProductsConfig {
    pub epsilon_sequence: Vec<f64>,
    pub mollifiers: Vec<String>,
    pub test_width: f64,
}

impl Default for ProductsConfig {
    fn default() -> Self {
        ProductsConfig {
            epsilon_sequence: vec![1e-1, 1e-2, 1e-3, 1e-4],
            mollifiers: vec!["poly_bump".into(), "tilted_bump".into()],
            test_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    pub dim_n: usize,
    pub jump: JumpConfig,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub products: ProductsConfig,
    /// Output file; stdout when absent.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lambda: 0.0,
            dim_n: 3,
            jump: JumpConfig::default(),
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            products: ProductsConfig::default(),
            out: None,
        }
    }
}

/// Command-line values that replace config entries.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub dim_n: Option<usize>,
    pub expr: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub h0: Option<f64>,
    pub v_range: Option<String>,
    pub r_range: Option<String>,
    pub eps: Option<Vec<f64>>,
}

/// The validated configuration.
pub struct Loaded {
    pub raw: RunConfig,
    pub h: JumpFunction,
    pub v_range: GridRange,
    pub r_range: GridRange,
    pub mollifiers: Vec<MollifierKind>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(l) = o.lambda {
            self.lambda = l;
        }
        if let Some(n) = o.dim_n {
            self.dim_n = n;
        }
        if let Some(e) = &o.expr {
            self.jump = JumpConfig::Expression { expr: e.clone() };
        }
        if o.a.is_some() || o.b.is_some() || o.c.is_some() || o.h0.is_some() {
            if o.expr.is_some() {
                bail!("--expr cannot be combined with --a/--b/--c/--h0");
            }
            let (mut a, mut b, mut c, mut h0) = match &self.jump {
                JumpConfig::Example { a, b, c, h0 } => (*a, *b, *c, *h0),
                _ => (4.0, 2.0, 1.0, 1.1),
            };
            a = o.a.unwrap_or(a);
            b = o.b.unwrap_or(b);
            c = o.c.unwrap_or(c);
            h0 = o.h0.unwrap_or(h0);
            self.jump = JumpConfig::Example { a, b, c, h0 };
        }
        if let Some(v) = &o.v_range {
            self.grid.v_range = v.clone();
        }
        if let Some(r) = &o.r_range {
            self.grid.r_range = r.clone();
        }
        if let Some(e) = &o.eps {
            self.products.epsilon_sequence = e.clone();
        }
        Ok(())
    }

    pub fn load(self) -> Result<Loaded> {
        if !self.lambda.is_finite() {
            bail!("lambda must be finite");
        }
        let h = match &self.jump {
            JumpConfig::Expression { expr } => parse_jump_expression(expr, self.dim_n)?,
            JumpConfig::Example { a, b, c, h0 } => make_builtin(
                Builtin::Example {
                    a: *a,
                    b: *b,
                    c: *c,
                    h0: *h0,
                },
                self.dim_n,
            )?,
            JumpConfig::Linear { a, b, c } => make_builtin(
                Builtin::Linear {
                    a: *a,
                    b: b.clone(),
                    c: *c,
                },
                self.dim_n,
            )?,
        };
        let v_range: GridRange = self.grid.v_range.parse().context("grid.v_range")?;
        let r_range: GridRange = self.grid.r_range.parse().context("grid.r_range")?;
        if !(r_range.lo > 0.0) {
            bail!("grid.r_range must stay away from r = 0, got lo = {}", r_range.lo);
        }
        if self.grid.verify_samples == 0 {
            bail!("grid.verify_samples must be positive");
        }
        if self.grid.u_offsets.iter().any(|&u| u == 0.0 || !u.is_finite()) {
            bail!("grid.u_offsets must be finite and nonzero");
        }
        let eps = &self.products.epsilon_sequence;
        if eps.len() < 3 {
            bail!("products.epsilon_sequence needs at least three values");
        }
        if eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            bail!("products.epsilon_sequence must be positive and strictly decreasing");
        }
        if !(self.products.test_width > 0.0) {
            bail!("products.test_width must be positive");
        }
        let mollifiers = self
            .products
            .mollifiers
            .iter()
            .map(|m| m.parse::<MollifierKind>())
            .collect::<Result<Vec<_>, _>>()?;
        if mollifiers.is_empty() {
            bail!("products.mollifiers is empty");
        }
        Ok(Loaded {
            raw: self,
            h,
            v_range,
            r_range,
            mollifiers,
        })
    }
}

/// The default configuration as commented TOML.
pub fn schema() -> String {
    let body = toml::to_string(&RunConfig::default()).expect("default config serializes");
    format!(
        "# nullshell run configuration; every key is optional and defaults to the value shown.\n\
         # jump.kind is one of: expression (expr), example (a, b, c, h0), linear (a, b, c).\n\
         # example requires b >= 2c >= 0, h0 >= c, a > b + c and dim_n = 3.\n\
         # Ranges read lo:hi:step; r_range must have lo > 0.\n\
         # out = \"path\" writes the command output to a file instead of stdout.\n\n{body}"
    )
}
