//! WebAssembly bindings for the static page in `www/`. Every export returns
//! a JSON document so the page can stay framework-free.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gfra_core::airlink::{snr_per_device, snr_target};
use gfra_core::channel::{path_loss_db, PathLossParams};
use gfra_core::dataset::{generate_dataset, ApPolicy, SlotRange};
use gfra_core::numerics::SeededRng;
use gfra_core::robustness::{perturb_features, quantize_features, FixedPointFormat};
use gfra_core::scenario::{Seeds, System, SystemConfig};

#[derive(Serialize)]
struct PathLossCurve {
    breakpoint_m: f64,
    distance_m: Vec<f64>,
    loss_db: Vec<f64>,
}

pub fn path_loss_json(
    carrier_ghz: f64,
    ap_height_m: f64,
    ue_height_m: f64,
    points: usize,
) -> Result<String, String> {
    let params = PathLossParams {
        carrier_freq_hz: carrier_ghz * 1e9,
        ap_height_m,
        ue_height_m,
        shadow_std_db: 0.0,
    };
    let breakpoint_m = params.breakpoint_distance_m().map_err(|e| e.to_string())?;
    let points = points.clamp(2, 2000);
    let (lo, hi) = (10f64.log10(), 5000f64.log10());
    let distance_m: Vec<f64> = (0..points)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (points - 1) as f64))
        .collect();
    let loss_db = distance_m
        .iter()
        .map(|&d| path_loss_db(d, &params))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    to_json(&PathLossCurve {
        breakpoint_m,
        distance_m,
        loss_db,
    })
}

#[derive(Serialize)]
struct Deployment {
    side_m: f64,
    aps: Vec<[f64; 2]>,
    users: Vec<[f64; 2]>,
    snr_db: Vec<f64>,
    target_db: f64,
}

fn system(num_aps: usize, num_users: usize, seed: u64) -> Result<System, String> {
    let mut cfg = SystemConfig::scenario_one();
    cfg.topology.num_aps = num_aps;
    cfg.topology.num_users = num_users;
    let seeds = Seeds {
        topology: seed,
        channel: seed.wrapping_add(1),
        ..Seeds::default()
    };
    System::realize(&cfg, seeds).map_err(|e| e.to_string())
}

pub fn deployment_json(
    num_aps: usize,
    num_users: usize,
    seed: u64,
    coverage: f64,
) -> Result<String, String> {
    let sys = system(num_aps, num_users, seed)?;
    let mut snr_db = snr_per_device(&sys.beta, &sys.power);
    snr_db.sort_by(f64::total_cmp);
    let target_db = snr_target(&snr_db, coverage).map_err(|e| e.to_string())?;
    let xy = |p: &gfra_core::topology::Point| [p.x, p.y];
    to_json(&Deployment {
        side_m: sys.config.topology.area_side_m,
        aps: sys.topology.ap_positions.iter().map(xy).collect(),
        users: sys.topology.ue_positions.iter().map(xy).collect(),
        snr_db,
        target_db,
    })
}

#[derive(Serialize)]
struct InputDistortion {
    clean: Vec<f64>,
    quantized: Vec<f64>,
    perturbed: Vec<f64>,
    quant_max_err: f64,
    quant_rms_err: f64,
    perturb_rms_err: f64,
    bound: f64,
}

/// One received observation in noise-std units, quantized to `W_F` and
/// perturbed with factor `theta`.
pub fn distortion_json(
    word_length: u32,
    fractional_bits: u32,
    theta: f64,
    seed: u64,
) -> Result<String, String> {
    let fmt = FixedPointFormat::new(word_length, fractional_bits).map_err(|e| e.to_string())?;
    let sys = system(20, 100, seed)?;
    let ds = generate_dataset(&sys, SlotRange::new(seed, 1), ApPolicy::DominantRandomUser)
        .map_err(|e| e.to_string())?;
    let clean = ds.samples[0].features_f64();
    let quantized = quantize_features(&clean, fmt);
    let perturbed = perturb_features(&clean, theta, &mut SeededRng::new(seed).split("demo"))
        .map_err(|e| e.to_string())?;
    let rms = |other: &[f64]| {
        (clean
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / clean.len() as f64)
            .sqrt()
    };
    to_json(&InputDistortion {
        quant_max_err: clean
            .iter()
            .zip(&quantized)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
        quant_rms_err: rms(&quantized),
        perturb_rms_err: rms(&perturbed),
        bound: fmt.resolution() / 2.0,
        clean,
        quantized,
        perturbed,
    })
}

fn to_json(value: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = pathLoss)]
pub fn path_loss(
    carrier_ghz: f64,
    ap_height_m: f64,
    ue_height_m: f64,
    points: usize,
) -> Result<String, JsError> {
    path_loss_json(carrier_ghz, ap_height_m, ue_height_m, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn deployment(
    num_aps: usize,
    num_users: usize,
    seed: u64,
    coverage: f64,
) -> Result<String, JsError> {
    deployment_json(num_aps, num_users, seed, coverage).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn distortion(
    word_length: u32,
    fractional_bits: u32,
    theta: f64,
    seed: u64,
) -> Result<String, JsError> {
    distortion_json(word_length, fractional_bits, theta, seed).map_err(|e| JsError::new(&e))
}
