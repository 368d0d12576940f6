//! Browser bindings for the chamber flow demo. Every exported function takes
//! a scenario document as JSON text and returns JSON text.

use chamberflow::catalog::{self, ChamberModel};
use chamberflow::chamber;
use chamberflow::flow::{self, FlowOptions, FlowStatus};
use chamberflow::field;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn model(scenario: &str) -> Result<ChamberModel, String> {
    catalog::load_scenario(scenario).map_err(|e| e.to_string())
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Scenario document of a builtin.
pub fn builtin_json(name: &str, params: &[f64]) -> Result<Value, String> {
    let m = catalog::builtin(name, params).map_err(|e| e.to_string())?;
    serde_json::to_value(m.to_document()).map_err(|e| e.to_string())
}

/// Flow from `w0` with the type-I report when the collapse is through a face.
pub fn simulate_json(scenario: &str, w0: &[f64]) -> Result<Value, String> {
    let m = model(scenario)?;
    let traj = flow::integrate(&m, w0, &FlowOptions::default()).map_err(|e| e.to_string())?;
    let type_one = flow::type_one_estimate(&m, &traj).ok();
    let (w_limit, stratum) = match &traj.status {
        FlowStatus::Collapsed { w_limit, stratum, .. } => (Some(w_limit.clone()), Some(stratum.clone())),
        FlowStatus::Stationary { w } => (Some(w.clone()), None),
        _ => (None, None),
    };
    Ok(json!({
        "t": traj.samples.iter().map(|s| s.t).collect::<Vec<_>>(),
        "w": traj.samples.iter().map(|s| s.w.clone()).collect::<Vec<_>>(),
        "rho": traj.samples.iter().map(|s| s.rho).collect::<Vec<_>>(),
        "status": traj.status.label(),
        "T": traj.status.collapse_time(),
        "w_limit": w_limit,
        "stratum": stratum,
        "type_one": type_one,
    }))
}

/// Potential on an `nx × ny` grid over `[x0, x1] × [y0, y1]`, row-major
/// from `y0`. Points outside the chamber are `null`.
pub fn potential_grid_json(
    scenario: &str,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> Result<Value, String> {
    let m = model(scenario)?;
    if m.rank() != 2 {
        return Err("the potential grid needs a rank-2 scenario".into());
    }
    if nx < 2 || ny < 2 || nx * ny > 1 << 20 {
        return Err("grid size must be between 2x2 and 2^20 points".into());
    }
    let mut values = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = y0 + (y1 - y0) * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let x = x0 + (x1 - x0) * i as f64 / (nx - 1) as f64;
            values.push(field::rho(&m, &[x, y]).ok());
        }
    }
    Ok(json!({ "nx": nx, "ny": ny, "bounds": [x0, x1, y0, y1], "values": values }))
}

/// Basin curve of the boundary point nearest to `w` along the nearest wall,
/// with a few forward checks run one after another.
pub fn basin_json(scenario: &str, w: &[f64], span: f64) -> Result<Value, String> {
    let m = model(scenario)?;
    let gaps = chamber::wall_gaps(&m, w).map_err(|e| e.to_string())?;
    let (k, u) = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or("scenario has no walls")?;
    let wall = m.walls().nth(k).ok_or("scenario has no walls")?;
    let nn: f64 = wall.root.iter().map(|x| x * x).sum();
    let target: Vec<f64> = w.iter().zip(&wall.root).map(|(x, b)| x + u * b / nn).collect();
    let opts = FlowOptions::default();
    let curve = flow::basin_curve(&m, &target, &opts, span).map_err(|e| e.to_string())?;
    let checks: Vec<Value> = flow::spread_indices(curve.points.len(), 4)
        .into_iter()
        .map(|i| {
            let limit = flow::integrate(&m, &curve.points[i], &opts)
                .ok()
                .and_then(|t| t.status.limit().map(|(w, _)| w.to_vec()));
            json!({ "start": curve.points[i], "w_limit": limit })
        })
        .collect();
    Ok(json!({
        "target": curve.target,
        "stratum": curve.stratum,
        "points": curve.points,
        "checks": checks,
    }))
}

#[wasm_bindgen]
pub fn builtin(name: &str, params: &[f64]) -> Result<String, JsError> {
    to_js(builtin_json(name, params))
}

#[wasm_bindgen]
pub fn simulate(scenario: &str, w0: &[f64]) -> Result<String, JsError> {
    to_js(simulate_json(scenario, w0))
}

#[wasm_bindgen]
pub fn potential_grid(
    scenario: &str,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> Result<String, JsError> {
    to_js(potential_grid_json(scenario, x0, x1, y0, y1, nx, ny))
}

#[wasm_bindgen]
pub fn basin(scenario: &str, w: &[f64], span: f64) -> Result<String, JsError> {
    to_js(basin_json(scenario, w, span))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> String {
        builtin_json("a2", &[1.0, 1.0]).unwrap().to_string()
    }

    #[test]
    fn simulate_collapses() {
        let v = simulate_json(&a2(), &[0.5, 0.0]).unwrap();
        assert_eq!(v["status"], "Collapsed");
        assert_eq!(v["stratum"], json!([0]));
        assert_eq!(v["t"].as_array().unwrap().len(), v["w"].as_array().unwrap().len());
        assert!(simulate_json(&a2(), &[5.0, 5.0]).is_err());
    }

    #[test]
    fn grid_marks_the_outside() {
        let v = potential_grid_json(&a2(), -2.0, 2.0, -2.0, 2.0, 5, 5).unwrap();
        let values = v["values"].as_array().unwrap();
        assert_eq!(values.len(), 25);
        // (2, -2) lies beyond the first wall, the origin inside.
        assert!(values[4].is_null());
        assert!(values[12].is_number());
        let r1 = builtin_json("rank1", &[]).unwrap().to_string();
        assert!(potential_grid_json(&r1, 0.0, 1.0, 0.0, 1.0, 3, 3).is_err());
    }

    #[test]
    fn basin_lands_on_target() {
        let v = basin_json(&a2(), &[0.95, 0.1], 10.0).unwrap();
        let target: Vec<f64> = serde_json::from_value(v["target"].clone()).unwrap();
        assert!((target[0] - 1.0).abs() < 1e-12 && (target[1] - 0.1).abs() < 1e-12);
        for c in v["checks"].as_array().unwrap() {
            let w: Vec<f64> = serde_json::from_value(c["w_limit"].clone()).unwrap();
            assert!(((w[0] - target[0]).powi(2) + (w[1] - target[1]).powi(2)).sqrt() < 1e-7);
        }
    }
}
