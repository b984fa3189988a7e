//! Browser bindings: RF beam coverage, water filling, and PSO convergence on
//! small scenarios. The `*_impl` functions hold the logic and run natively.

use ris_hbf::baseband::{noise_power_watts, water_filling};
use ris_hbf::channel::{phase_response_vector, UpaSize};
use ris_hbf::harness::{cell_seed, Method, Scenario, ScenarioConfig};
use ris_hbf::linalg::CVector;
use ris_hbf::optimizer::{constant_phases, pso_optimize, random_phases, FitnessContext};
use ris_hbf::rf::build_angle_supports;
use wasm_bindgen::prelude::*;

fn demo_config(d1: f64, ris_side: usize) -> Result<ScenarioConfig, String> {
    let mut cfg = ScenarioConfig::default();
    cfg.geometry.d1 = Some(d1);
    cfg.arrays.ris = UpaSize::new(ris_side, ris_side).map_err(|e| e.to_string())?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Beam gain over the direction-coefficient square `[-1, 1]²`.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct BeamMap {
    resolution: usize,
    gain: Vec<f64>,
    support: Vec<f64>,
    paths: Vec<f64>,
    beams: Vec<f64>,
}

#[wasm_bindgen]
impl BeamMap {
    #[wasm_bindgen(getter)]
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Row-major, `resolution²` values in `[0, 1]`; row index follows `γ_y`.
    #[wasm_bindgen(getter)]
    pub fn gain(&self) -> Vec<f64> {
        self.gain.clone()
    }

    /// Flattened `(γ_x, γ_y)` samples of the angle support.
    #[wasm_bindgen(getter)]
    pub fn support(&self) -> Vec<f64> {
        self.support.clone()
    }

    /// Flattened `(γ_x, γ_y)` of the realized path directions.
    #[wasm_bindgen(getter)]
    pub fn paths(&self) -> Vec<f64> {
        self.paths.clone()
    }

    /// Flattened `(κ_x, κ_y)` beam centers.
    #[wasm_bindgen(getter)]
    pub fn beams(&self) -> Vec<f64> {
        self.beams.clone()
    }
}

pub fn beam_map_impl(transmit: bool, seed: u64, resolution: usize) -> Result<BeamMap, String> {
    if resolution < 2 {
        return Err("resolution must be at least 2".into());
    }
    let cfg = demo_config(20.0, 4)?;
    let scenario = Scenario::new(&cfg).map_err(|e| e.to_string())?;
    let chan = scenario.draw_channel(seed).map_err(|e| e.to_string())?;
    let (f_t, f_r, _) = scenario.rf_stage(&cfg, &chan).map_err(|e| e.to_string())?;
    let (aoa, aod) = build_angle_supports(&scenario.tr, &scenario.ti, &scenario.ir);
    let (rf, support, size) = if transmit {
        (f_t, aod, cfg.arrays.tx)
    } else {
        (f_r, aoa, cfg.arrays.rx)
    };

    let m = size.total() as f64;
    let mut gain = Vec::with_capacity(resolution * resolution);
    for row in 0..resolution {
        let gy = -1.0 + 2.0 * row as f64 / (resolution - 1) as f64;
        for col in 0..resolution {
            let gx = -1.0 + 2.0 * col as f64 / (resolution - 1) as f64;
            let a = phase_response_vector(size, gx, gy, cfg.arrays.spacing);
            let resp: CVector = rf.matrix.adjoint() * a;
            let best = resp.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
            gain.push(best / m);
        }
    }

    let flatten = |pts: &[(f64, f64)]| pts.iter().flat_map(|&(x, y)| [x, y]).collect::<Vec<_>>();
    let realized: Vec<(f64, f64)> = if transmit {
        chan.paths_ti.iter().chain(&chan.paths_tr).map(|p| p.tx_direction()).collect()
    } else {
        chan.paths_ir.iter().chain(&chan.paths_tr).map(|p| p.rx_direction()).collect()
    };
    let beams: Vec<(f64, f64)> = rf.pairs.iter().map(|p| (p.kappa_x, p.kappa_y)).collect();
    Ok(BeamMap {
        resolution,
        gain,
        support: flatten(&support.sample_image(2.0)),
        paths: flatten(&realized),
        beams: flatten(&beams),
    })
}

/// Beam coverage of the transmit (`transmit = true`) or receive RF stage
/// for one seeded channel draw of the default scenario.
#[wasm_bindgen(js_name = beamMap)]
pub fn beam_map(transmit: bool, seed: u32, resolution: usize) -> Result<BeamMap, JsError> {
    beam_map_impl(transmit, seed as u64, resolution).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct WaterFill {
    gamma: Vec<f64>,
    floors: Vec<f64>,
    water_level: f64,
}

#[wasm_bindgen]
impl WaterFill {
    #[wasm_bindgen(getter)]
    pub fn gamma(&self) -> Vec<f64> {
        self.gamma.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn floors(&self) -> Vec<f64> {
        self.floors.clone()
    }

    #[wasm_bindgen(getter, js_name = waterLevel)]
    pub fn water_level(&self) -> f64 {
        self.water_level
    }
}

pub fn water_fill_impl(gains_db: &[f64], noise_power: f64, total_power: f64) -> Result<WaterFill, String> {
    let sv: Vec<f64> = gains_db.iter().map(|g| 10f64.powf(g / 20.0)).collect();
    let alloc = water_filling(&sv, noise_power, total_power, sv.len()).map_err(|e| e.to_string())?;
    let floors = sv.iter().map(|s| noise_power / (total_power * s * s)).collect();
    Ok(WaterFill {
        gamma: alloc.gamma,
        floors,
        water_level: alloc.water_level,
    })
}

/// Water filling over streams with channel power gains `σ_n²` given in dB.
#[wasm_bindgen(js_name = waterFill)]
pub fn water_fill(gains_db: Vec<f64>, noise_power: f64, total_power: f64) -> Result<WaterFill, JsError> {
    water_fill_impl(&gains_db, noise_power, total_power).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Convergence {
    trace: Vec<f64>,
    initial_best: f64,
    random_rate: f64,
    constant_rate: f64,
    no_ris_rate: f64,
}

#[wasm_bindgen]
impl Convergence {
    /// Global best after each iteration.
    #[wasm_bindgen(getter)]
    pub fn trace(&self) -> Vec<f64> {
        self.trace.clone()
    }

    #[wasm_bindgen(getter, js_name = initialBest)]
    pub fn initial_best(&self) -> f64 {
        self.initial_best
    }

    #[wasm_bindgen(getter, js_name = randomRate)]
    pub fn random_rate(&self) -> f64 {
        self.random_rate
    }

    #[wasm_bindgen(getter, js_name = constantRate)]
    pub fn constant_rate(&self) -> f64 {
        self.constant_rate
    }

    #[wasm_bindgen(getter, js_name = noRisRate)]
    pub fn no_ris_rate(&self) -> f64 {
        self.no_ris_rate
    }
}

pub fn convergence_impl(
    ris_side: usize,
    d1: f64,
    particles: usize,
    iterations: usize,
    seed: u64,
) -> Result<Convergence, String> {
    let mut cfg = demo_config(d1, ris_side)?;
    cfg.pso.particles = particles;
    cfg.pso.iterations = iterations;
    cfg.validate().map_err(|e| e.to_string())?;
    let scenario = Scenario::new(&cfg).map_err(|e| e.to_string())?;
    let chan = scenario.draw_channel(seed).map_err(|e| e.to_string())?;
    let (f_t, f_r, _) = scenario.rf_stage(&cfg, &chan).map_err(|e| e.to_string())?;
    let ctx = FitnessContext::new(&chan, &f_t, &f_r, cfg.link_budget());
    let m_i = cfg.arrays.ris.total();

    let rate = |r: ris_hbf::Result<ris_hbf::baseband::BasebandDesign>| r.map(|d| d.rate).unwrap_or(0.0);
    let pso = pso_optimize(&cfg.pso.swarm(cell_seed(seed, 0, Method::Pso, 0)), &ctx);
    Ok(Convergence {
        trace: pso.trace,
        initial_best: pso.initial_best,
        random_rate: rate(ctx.design(&random_phases(m_i, cell_seed(seed, 0, Method::Random, 0)))),
        constant_rate: rate(ctx.design(&constant_phases(m_i, 0.0))),
        no_ris_rate: rate(ctx.design_for(&ctx.direct_channel())),
    })
}

/// PSO on one seeded channel draw with an `ris_side × ris_side` RIS, next
/// to the random, constant and no-RIS baselines on the same draw.
#[wasm_bindgen]
pub fn convergence(
    ris_side: usize,
    d1: f64,
    particles: usize,
    iterations: usize,
    seed: u32,
) -> Result<Convergence, JsError> {
    convergence_impl(ris_side, d1, particles, iterations, seed as u64).map_err(|e| JsError::new(&e))
}

/// Thermal noise power in watts, for the water-filling panel defaults.
#[wasm_bindgen(js_name = noisePower)]
pub fn noise_power(psd_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    noise_power_watts(psd_dbm_hz, bandwidth_hz)
}
