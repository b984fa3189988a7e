use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Method, ScenarioConfig};
use crate::baseband::BasebandDesign;
use crate::channel::{ChannelRealization, SubchannelSpec};
use crate::optimizer::{constant_phases, pso_optimize, random_phases, FitnessContext};
use crate::rf::{build_angle_supports, build_rf_beamformer, path_directions, quantized_grid, select_pairs, RfBeamformer};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialFlag {
    /// Baseband design failed; the rate was recorded as 0.
    RankDeficient,
    /// Fewer grid cells met an angle support than RF chains.
    RfPadded,
    /// Some PSO fitness evaluations hit a rank-deficient channel.
    DegenerateEvaluations,
    /// Water filling left at least one stream without power.
    StreamOff,
}

impl TrialFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialFlag::RankDeficient => "rank_deficient",
            TrialFlag::RfPadded => "rf_padded",
            TrialFlag::DegenerateEvaluations => "degenerate_evals",
            TrialFlag::StreamOff => "stream_off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    /// Drives the channel draw.
    pub channel: u64,
    /// Drives the method's own randomness (swarm, random phases).
    pub method: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoSummary {
    pub initial_best: f64,
    pub final_fitness: f64,
    pub trace: Vec<f64>,
    pub degenerate_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub rate: f64,
    pub flags: Vec<TrialFlag>,
    pub pso: Option<PsoSummary>,
}

/// Resolved per-configuration quantities shared by every trial.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub tr: SubchannelSpec,
    pub ti: SubchannelSpec,
    pub ir: SubchannelSpec,
}

impl Scenario {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let [tr, ti, ir] = cfg.subchannel_specs()?;
        Ok(Self { tr, ti, ir })
    }

    pub fn draw_channel(&self, seed: u64) -> Result<ChannelRealization> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ChannelRealization::generate(&self.tr, &self.ti, &self.ir, &mut rng)
    }

    /// Transmit and receive RF stages for one realization.
    pub fn rf_stage(&self, cfg: &ScenarioConfig, chan: &ChannelRealization) -> Result<(RfBeamformer, RfBeamformer, bool)> {
        let (aoa, aod) = build_angle_supports(&self.tr, &self.ti, &self.ir);
        let step = cfg.run.support_step_deg;
        let a = &cfg.arrays;

        let tx_dirs = path_directions([chan.paths_ti.as_slice(), chan.paths_tr.as_slice()], false);
        let tx_sel = select_pairs(&quantized_grid(a.tx), &aod, &tx_dirs, cfg.chains.tx, step)?;
        let f_t = build_rf_beamformer(a.tx, &tx_sel.pairs, a.spacing)?;

        let rx_dirs = path_directions([chan.paths_ir.as_slice(), chan.paths_tr.as_slice()], true);
        let rx_sel = select_pairs(&quantized_grid(a.rx), &aoa, &rx_dirs, cfg.chains.rx, step)?;
        let f_r = build_rf_beamformer(a.rx, &rx_sel.pairs, a.spacing)?;

        Ok((f_t, f_r, tx_sel.padded || rx_sel.padded))
    }
}

/// One channel draw pushed through the three design stages for `method`.
pub fn run_trial(cfg: &ScenarioConfig, method: Method, seeds: TrialSeeds) -> Result<TrialResult> {
    let scenario = Scenario::new(cfg)?;
    let chan = scenario.draw_channel(seeds.channel)?;
    run_with(cfg, &scenario, method, &chan, seeds.method)
}

/// Like [`run_trial`] on a caller-supplied channel.
pub fn run_trial_on_channel(
    cfg: &ScenarioConfig,
    method: Method,
    chan: &ChannelRealization,
    method_seed: u64,
) -> Result<TrialResult> {
    let scenario = Scenario::new(cfg)?;
    run_with(cfg, &scenario, method, chan, method_seed)
}

pub(super) fn run_with(
    cfg: &ScenarioConfig,
    scenario: &Scenario,
    method: Method,
    chan: &ChannelRealization,
    method_seed: u64,
) -> Result<TrialResult> {
    let m_i = cfg.arrays.ris.total();
    if chan.num_ris_elements() != m_i {
        return Err(Error::mismatch("run_trial", format!("{m_i} RIS elements"), chan.num_ris_elements()));
    }
    let (f_t, f_r, padded) = scenario.rf_stage(cfg, chan)?;
    let ctx = FitnessContext::new(chan, &f_t, &f_r, cfg.link_budget());

    let mut flags = Vec::new();
    if padded {
        flags.push(TrialFlag::RfPadded);
    }
    let mut pso = None;
    let design: Result<BasebandDesign> = match method {
        Method::Pso => {
            let out = pso_optimize(&cfg.pso.swarm(method_seed), &ctx);
            if out.degenerate_evaluations > 0 {
                flags.push(TrialFlag::DegenerateEvaluations);
            }
            pso = Some(PsoSummary {
                initial_best: out.initial_best,
                final_fitness: out.fitness,
                trace: out.trace,
                degenerate_evaluations: out.degenerate_evaluations,
            });
            ctx.design(&out.phases)
        }
        Method::Random => ctx.design(&random_phases(m_i, method_seed)),
        Method::Constant => ctx.design(&constant_phases(m_i, cfg.run.constant_phase)),
        Method::NoRis => ctx.design_for(&ctx.direct_channel()),
    };
    let rate = match design {
        Ok(d) => {
            if d.active_streams < cfg.chains.streams {
                flags.push(TrialFlag::StreamOff);
            }
            d.rate
        }
        Err(Error::RankDeficient { .. }) | Err(Error::SingularNoiseCovariance) => {
            flags.push(TrialFlag::RankDeficient);
            0.0
        }
        Err(e) => return Err(e),
    };
    Ok(TrialResult { rate, flags, pso })
}
