//! wasm-bindgen bindings for the browser demo.
//!
//! Three operations, all returning JSON strings: `analyze` (classification,
//! Binet coefficients, limits, convergence), `ratio_trace` (the consecutive
//! ratio per index, for plotting the parity split), and `fix_u2` (the two
//! initial conditions forcing a convergent ratio).

use serde_json::json;
use wasm_bindgen::prelude::*;

use trirec::binet::solve_coefficients;
use trirec::convergence::{converged_limit, u2_solutions};
use trirec::limits::{analytic_limits, consecutive_ratios};
use trirec::numerics::{parse_scalar, Backend, Scalar};
use trirec::recurrence::{make_degenerate_spec, DegenerateRoots};

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn parse(text: &str, backend: Backend) -> Result<Scalar, JsValue> {
    parse_scalar(text, backend).map_err(err)
}

fn roots(lambda2: &str, lambda3: &str, backend: Backend) -> Result<DegenerateRoots, JsValue> {
    DegenerateRoots::new(parse(lambda2, backend)?, parse(lambda3, backend)?).map_err(err)
}

fn pick_backend(exact: bool, inputs: &[&str]) -> Backend {
    if exact && inputs.iter().all(|t| parse_scalar(t, Backend::Exact).is_ok()) {
        Backend::Exact
    } else {
        Backend::Float
    }
}

/// Full analytic report for the given roots and initial conditions.
#[wasm_bindgen]
pub fn analyze(
    lambda2: &str,
    lambda3: &str,
    u0: &str,
    u1: &str,
    u2: &str,
    exact: bool,
) -> Result<String, JsValue> {
    let backend = pick_backend(exact, &[lambda2, lambda3, u0, u1, u2]);
    let roots = roots(lambda2, lambda3, backend)?;
    let u0 = parse(u0, backend)?;
    let u1 = parse(u1, backend)?;
    let u2 = parse(u2, backend)?;

    let spec = make_degenerate_spec(&roots, u0.clone(), u1.clone(), u2.clone());
    let coeffs = solve_coefficients(&roots, &u0, &u1, &u2);
    let limits = analytic_limits(&roots, &u0, &u1, &u2);
    let sols = u2_solutions(&roots, &u0, &u1);
    let doc = json!({
        "backend": backend,
        "spec": spec,
        "binet_coefficients": coeffs,
        "limits": limits,
        "convergence": {
            "u2_first": sols.u2_first,
            "u2_second": sols.u2_second,
            "coincident": sols.coincident,
            "limit_for_given_u2": converged_limit(&roots, &u0, &u1, &u2),
        },
    });
    Ok(doc.to_string())
}

/// Consecutive ratios `U_n / U_{n-1}` for n = 1..=n_max, with the analytic
/// reference lines (L1, L2, ±lambda3, lambda2) for the plot.
#[wasm_bindgen]
pub fn ratio_trace(
    lambda2: &str,
    lambda3: &str,
    u0: &str,
    u1: &str,
    u2: &str,
    n_max: usize,
) -> Result<String, JsValue> {
    let backend = Backend::Float;
    let roots = roots(lambda2, lambda3, backend)?;
    let u0 = parse(u0, backend)?;
    let u1 = parse(u1, backend)?;
    let u2 = parse(u2, backend)?;

    let limits = analytic_limits(&roots, &u0, &u1, &u2);
    let spec = make_degenerate_spec(&roots, u0, u1, u2);
    let ratios: Vec<serde_json::Value> = consecutive_ratios(&spec, n_max)
        .into_iter()
        .map(|(n, r)| json!({ "n": n, "ratio": r }))
        .collect();
    let doc = json!({
        "ratios": ratios,
        "L1": limits.l1.as_ref().map(Scalar::to_f64),
        "L2": limits.l2.as_ref().map(Scalar::to_f64),
        "lambda2": roots.lambda2().to_f64(),
        "lambda3": roots.lambda3().to_f64(),
        "regime": limits.regime,
    });
    Ok(doc.to_string())
}

/// The two u2 values (given u0, u1) that make the ratio converge, with the
/// limit each branch produces.
#[wasm_bindgen]
pub fn fix_u2(lambda2: &str, lambda3: &str, u0: &str, u1: &str) -> Result<String, JsValue> {
    let backend = pick_backend(true, &[lambda2, lambda3, u0, u1]);
    let roots = roots(lambda2, lambda3, backend)?;
    let u0 = parse(u0, backend)?;
    let u1 = parse(u1, backend)?;

    let sols = u2_solutions(&roots, &u0, &u1);
    let doc = json!({
        "u2_first": sols.u2_first,
        "first_limit": converged_limit(&roots, &u0, &u1, &sols.u2_first),
        "u2_second": sols.u2_second,
        "second_limit": converged_limit(&roots, &u0, &u1, &sols.u2_second),
        "coincident": sols.coincident,
    });
    Ok(doc.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_produces_expected_json() {
        let out = analyze("1", "2", "0", "1", "2", true).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["limits"]["L1"], "8/5");
        assert_eq!(doc["binet_coefficients"]["c3"], "3/4");
    }

    #[test]
    fn ratio_trace_shape() {
        let out = ratio_trace("1", "2", "0", "1", "2", 50).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["ratios"].as_array().unwrap().len(), 50);
        assert!((doc["L1"].as_f64().unwrap() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn fix_u2_branches() {
        let out = fix_u2("1", "2", "1", "0").unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["u2_first"], "2");
        assert_eq!(doc["second_limit"], "plus_lambda3");
    }
}
