//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export has a plain Rust counterpart returning `Result<_, String>`
//! so the logic is testable natively; the `#[wasm_bindgen]` wrappers only
//! convert errors. Numeric results cross the boundary as flat `Float64Array`s.

use wasm_bindgen::prelude::*;

use simplex_mwu::experiments::{self, demo_step, lift_demo_point};
use simplex_mwu::objective::trig_demo;
use simplex_mwu::stationarity::{classify, Tolerances};

/// Displacements of the planar demo map as `[x, y, dx, dy, ...]`.
pub fn field(grid: usize, eps: f64) -> Result<Vec<f64>, String> {
    let rows = experiments::vector_field(grid, eps).map_err(|e| e.to_string())?;
    Ok(rows.into_iter().flatten().collect())
}

/// `[x1, k, τ, ...]` on the interior grid followed by the witness block
/// `[a, b, c, x, x', τ(x), τ(x')]`.
pub fn counterexample(grid: usize) -> Result<Vec<f64>, String> {
    let rep = experiments::counterexample(grid).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = rep.table.into_iter().flatten().collect();
    let (t, w) = (&rep.triple, &rep.witness);
    out.extend([t.a, t.b, t.c, w.x, w.x_prime, w.tau_x, w.tau_x_prime]);
    Ok(out)
}

/// Iterates the demo map from `(x0, y0)` for at most `max_steps` steps or
/// until a step moves less than `tol`; returns `[x0, y0, x1, y1, ...]`.
pub fn trajectory(x0: f64, y0: f64, eps: f64, max_steps: usize, tol: f64) -> Result<Vec<f64>, String> {
    if !(0.0 < x0 && x0 < 1.0 && 0.0 < y0 && y0 < 1.0) {
        return Err("start must lie in the open unit square".into());
    }
    let (mut x, mut y) = (x0, y0);
    let mut out = vec![x, y];
    for _ in 0..max_steps {
        let (nx, ny) = demo_step(x, y, eps).map_err(|e| e.to_string())?;
        let gap = (nx - x).abs().max((ny - y).abs());
        (x, y) = (nx, ny);
        out.extend([x, y]);
        if gap <= tol {
            break;
        }
    }
    Ok(out)
}

/// Classification of the planar point, with coordinates within `snap` of
/// the boundary moved onto it first.
pub fn verdict(x: f64, y: f64, snap: f64) -> Result<String, String> {
    let p = lift_demo_point(x, y).map_err(|e| e.to_string())?;
    let p = simplex_mwu::simplex::clamp_to_support(&p, snap).map_err(|e| e.to_string())?;
    let c = classify(&p, &trig_demo(), &Tolerances::default()).map_err(|e| e.to_string())?;
    Ok(c.verdict.to_string())
}

#[wasm_bindgen(js_name = vectorField)]
pub fn vector_field_js(grid: usize, eps: f64) -> Result<Vec<f64>, JsError> {
    field(grid, eps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = counterexampleCurve)]
pub fn counterexample_js(grid: usize) -> Result<Vec<f64>, JsError> {
    counterexample(grid).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = demoTrajectory)]
pub fn trajectory_js(x0: f64, y0: f64, eps: f64, max_steps: usize, tol: f64) -> Result<Vec<f64>, JsError> {
    trajectory(x0, y0, eps, max_steps, tol).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = classifyPoint)]
pub fn verdict_js(x: f64, y: f64, snap: f64) -> Result<String, JsError> {
    verdict(x, y, snap).map_err(|e| JsError::new(&e))
}
