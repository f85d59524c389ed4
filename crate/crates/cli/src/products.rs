//! `products`: model-product pairings for every mollifier and test function.

use nullshell::distribution::{
    make_mollifier, model_product_limit, model_product_pairing, theta_delta_integral, Factor,
    TestFunction,
};
use serde::Serialize;

use crate::config::Loaded;

const PRODUCTS: [(Factor, Factor, &str); 7] = [
    (Factor::Theta, Factor::Delta, "theta*delta"),
    (Factor::Theta, Factor::Theta, "theta*theta"),
    (Factor::OneMinusTheta, Factor::OneMinusTheta, "(1-theta)*(1-theta)"),
    (Factor::OneMinusTheta, Factor::Theta, "(1-theta)*theta"),
    (Factor::OneMinusTheta, Factor::Delta, "(1-theta)*delta"),
    (Factor::One, Factor::Delta, "delta"),
    (Factor::One, Factor::Theta, "theta"),
];

#[derive(Debug, Serialize)]
pub struct PairingRow {
    pub mollifier: String,
    pub product: &'static str,
    pub test_function: u32,
    pub values: Vec<f64>,
    pub limit: f64,
    pub order: Option<f64>,
    pub model: f64,
    /// `limit / φ(0)` for products with a δ factor.
    pub delta_coefficient: Option<f64>,
    pub residual: f64,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct HalfIdentity {
    pub mollifier: String,
    pub eps: f64,
    pub integral: f64,
}

#[derive(Debug, Serialize)]
pub struct ProductsReport {
    pub command: &'static str,
    pub epsilon_sequence: Vec<f64>,
    pub test_width: f64,
    pub tolerance: f64,
    pub rows: Vec<PairingRow>,
    pub half_identity: Vec<HalfIdentity>,
    pub failures: Vec<String>,
    pub pass: bool,
}

pub fn run(cfg: &Loaded) -> ProductsReport {
    let p = &cfg.raw.products;
    let tol = cfg.raw.tolerances.products;
    let mut rows = Vec::new();
    let mut half = Vec::new();
    let mut failures = Vec::new();
    let phis = TestFunction::family(p.test_width).expect("width validated at load");
    for &kind in &cfg.mollifiers {
        let m = make_mollifier(kind);
        for phi in &phis {
            for (l, r, name) in PRODUCTS {
                let model = model_product_limit(l, r, phi).unwrap_or(f64::NAN);
                let phi0 = phi.eval(0.0f64);
                let row = match model_product_pairing(l, r, &m, phi, &p.epsilon_sequence) {
                    Ok(res) => {
                        let residual = (res.limit - model).abs();
                        let has_delta = r == Factor::Delta;
                        PairingRow {
                            mollifier: kind.to_string(),
                            product: name,
                            test_function: phi.k,
                            values: res.values,
                            limit: res.limit,
                            order: res.order,
                            model,
                            delta_coefficient: (has_delta && phi0 != 0.0).then(|| res.limit / phi0),
                            residual,
                            pass: residual <= tol,
                            error: None,
                        }
                    }
                    Err(e) => PairingRow {
                        mollifier: kind.to_string(),
                        product: name,
                        test_function: phi.k,
                        values: Vec::new(),
                        limit: f64::NAN,
                        order: None,
                        model,
                        delta_coefficient: None,
                        residual: f64::NAN,
                        pass: false,
                        error: Some(e.to_string()),
                    },
                };
                if !row.pass {
                    failures.push(format!("{} {} phi{}", row.mollifier, name, phi.k));
                }
                rows.push(row);
            }
        }
        for &eps in &p.epsilon_sequence {
            match theta_delta_integral(&m, eps) {
                Ok(integral) => {
                    if (integral - 0.5).abs() > 1e-14 {
                        failures.push(format!("{kind} half identity at eps = {eps}"));
                    }
                    half.push(HalfIdentity {
                        mollifier: kind.to_string(),
                        eps,
                        integral,
                    });
                }
                Err(e) => failures.push(format!("{kind} half identity at eps = {eps}: {e}")),
            }
        }
    }
    ProductsReport {
        command: "products",
        epsilon_sequence: p.epsilon_sequence.clone(),
        test_width: p.test_width,
        tolerance: tol,
        rows,
        half_identity: half,
        pass: failures.is_empty(),
        failures,
    }
}
