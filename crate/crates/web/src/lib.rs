//! Three operations for the static page in `www/`: a spectrum scan of a
//! pasted instance, the minimum gap of a built-in family, and an adiabatic
//! run followed by sampling. Everything crosses the boundary as text.

use adiaquant::evolution::{default_dt, evolve, measure, Schedule};
use adiaquant::hamiltonian::{DimensionCap, InitialMode, OperatorPair};
use adiaquant::instance::{parse_instance, Assignment, SatInstance};
use adiaquant::reduction::{scaling_gap_options, Family};
use adiaquant::spectrum::{scan_spectrum, SectorProjector};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Browsers get a smaller register than the command line.
const WEB_CAP: DimensionCap = DimensionCap(12);

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn pair_of(text: &str) -> Result<(SatInstance, OperatorPair), JsError> {
    let inst = parse_instance(text).map_err(fail)?;
    let pair = OperatorPair::from_instance(&inst, InitialMode::ClauseWeighted, WEB_CAP).map_err(fail)?;
    Ok((inst, pair))
}

/// CSV of the lowest `levels` eigenvalues on `grid` points.
#[wasm_bindgen]
pub fn spectrum_csv(instance: &str, levels: usize, grid: usize) -> Result<String, JsError> {
    let (_, pair) = pair_of(instance)?;
    let levels = levels.clamp(1, 1 << pair.n());
    let scan = scan_spectrum(&pair, levels, grid.clamp(2, 2000), &SectorProjector::Full).map_err(fail)?;
    Ok(scan.to_csv())
}

/// `{"g_min", "s_star"}` for a built-in family.
#[wasm_bindgen]
pub fn family_gap(family: &str, n: usize) -> Result<String, JsError> {
    let family: Family = family.parse().map_err(fail)?;
    if n > 400 {
        return Err(JsError::new("n above 400 is too slow for the page"));
    }
    let (g, s) = family.gap(n, scaling_gap_options()).map_err(fail)?;
    Ok(json!({ "family": family.to_string(), "n": n, "g_min": g, "s_star": s }).to_string())
}

/// Evolves for time `t`, then draws `shots` samples.
#[wasm_bindgen]
pub fn run_adiabatic(instance: &str, t: f64, shots: usize, seed: u64) -> Result<String, JsError> {
    let (inst, pair) = pair_of(instance)?;
    let result = evolve(&pair, &Schedule::linear(t).map_err(fail)?, default_dt(&pair)).map_err(fail)?;
    let m = measure(&result.final_state, inst.n(), shots.max(1), seed).map_err(fail)?;
    let samples: Vec<_> = m
        .counts()
        .into_iter()
        .map(|(z, c)| {
            json!({
                "assignment": Assignment::from_index(inst.n(), z).to_string(),
                "count": c,
                "energy": inst.energy_at_index(z),
            })
        })
        .collect();
    Ok(json!({
        "overlap": result.overlap,
        "norm_drift": result.norm_drift,
        "steps": result.steps,
        "unsatisfiable": result.unsatisfiable,
        "samples": samples,
    })
    .to_string())
}
