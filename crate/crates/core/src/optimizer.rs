//! RIS phase design: particle swarm optimization of the achievable rate,
//! with random, constant and exhaustive-grid baselines.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseband::{design_baseband, BasebandDesign, EffectiveChannel};
use crate::channel::ChannelRealization;
use crate::linalg::{cis, CMatrix};
use crate::rf::RfBeamformer;
use crate::seed::mix;
use crate::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Upper bound on the number of exhaustive-search grid points.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

/// RIS phase shifts `Ω_i` in radians; `Θ = diag(e^{jΩ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub omega: Vec<f64>,
}

impl PhaseConfig {
    pub fn new(omega: Vec<f64>) -> Self {
        Self { omega }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Every phase wrapped into `[0, 2π)`.
    pub fn canonical(&self) -> Self {
        Self::new(self.omega.iter().map(|&w| wrap_phase(w)).collect())
    }

    /// Diagonal of `Θ`.
    pub fn reflection(&self) -> Vec<Complex64> {
        self.omega.iter().map(|&w| cis(w)).collect()
    }
}

pub fn wrap_phase(w: f64) -> f64 {
    let r = w.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

pub fn random_phases(m_i: usize, seed: u64) -> PhaseConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PhaseConfig::new((0..m_i).map(|_| rng.random::<f64>() * TWO_PI).collect())
}

pub fn constant_phases(m_i: usize, value: f64) -> PhaseConfig {
    PhaseConfig::new(vec![value; m_i])
}

/// Transmit power, noise and stream count shared by every evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub noise_power: f64,
    pub total_power: f64,
    pub num_streams: usize,
}

/// Everything the rate depends on besides `Θ`, with the RF stages folded in.
///
/// `F_r (H_IR Θ H_TI + H_TR) F_t = A diag(e^{jΩ}) B + C` where
/// `A = F_r H_IR`, `B = H_TI F_t` and `C = F_r H_TR F_t`, so each evaluation
/// only touches `N_R × M_I` and `M_I × N_T` matrices.
#[derive(Debug, Clone)]
pub struct FitnessContext {
    pub f_t: CMatrix,
    pub f_r: CMatrix,
    ris_rx: CMatrix,
    ris_tx: CMatrix,
    direct: CMatrix,
    pub budget: LinkBudget,
}

impl FitnessContext {
    pub fn new(chan: &ChannelRealization, f_t: &RfBeamformer, f_r: &RfBeamformer, budget: LinkBudget) -> Self {
        let ft = f_t.matrix.clone();
        let fr = f_r.combiner();
        Self {
            ris_rx: &fr * &chan.h_ir,
            ris_tx: &chan.h_ti * &ft,
            direct: &fr * &chan.h_tr * &ft,
            f_t: ft,
            f_r: fr,
            budget,
        }
    }

    /// Context from raw matrices; `f_r` is in `N_R × M_R` form.
    pub fn from_matrices(
        h_ir: &CMatrix,
        h_ti: &CMatrix,
        h_tr: &CMatrix,
        f_t: CMatrix,
        f_r: CMatrix,
        budget: LinkBudget,
    ) -> Self {
        Self {
            ris_rx: &f_r * h_ir,
            ris_tx: h_ti * &f_t,
            direct: &f_r * h_tr * &f_t,
            f_t,
            f_r,
            budget,
        }
    }

    pub fn num_ris_elements(&self) -> usize {
        self.ris_tx.nrows()
    }

    pub fn effective_channel(&self, phases: &PhaseConfig) -> Result<EffectiveChannel> {
        if phases.len() != self.num_ris_elements() {
            return Err(Error::mismatch("fitness", self.num_ris_elements(), phases.len()));
        }
        let mut weighted = self.ris_rx.clone();
        for (i, &w) in phases.omega.iter().enumerate() {
            let z = cis(wrap_phase(w));
            for r in 0..weighted.nrows() {
                weighted[(r, i)] *= z;
            }
        }
        Ok(EffectiveChannel {
            matrix: weighted * &self.ris_tx + &self.direct,
        })
    }

    /// Effective channel with the RIS removed.
    pub fn direct_channel(&self) -> EffectiveChannel {
        EffectiveChannel {
            matrix: self.direct.clone(),
        }
    }

    pub fn design_for(&self, eff: &EffectiveChannel) -> Result<BasebandDesign> {
        let b = self.budget;
        design_baseband(eff, &self.f_t, &self.f_r, b.noise_power, b.total_power, b.num_streams)
    }

    /// Baseband precoder, combiner and rate for this `Θ`.
    pub fn design(&self, phases: &PhaseConfig) -> Result<BasebandDesign> {
        self.design_for(&self.effective_channel(phases)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fitness {
    pub rate: f64,
    /// Baseband design failed (rank deficiency); `rate` is 0.
    pub degenerate: bool,
}

/// Achievable rate with `B_t`, `B_r` rebuilt for this `Θ`.
pub fn fitness(phases: &PhaseConfig, ctx: &FitnessContext) -> Fitness {
    match ctx.design(phases) {
        Ok(d) => Fitness {
            rate: d.rate,
            degenerate: false,
        },
        Err(_) => Fitness {
            rate: 0.0,
            degenerate: true,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub num_particles: usize,
    pub num_iterations: usize,
    pub inertia: f64,
    pub accel_personal: f64,
    pub accel_social: f64,
    /// Per-dimension velocity bound, radians.
    pub velocity_clamp: f64,
    /// Initial velocities are uniform in `±init_velocity`.
    pub init_velocity: f64,
    pub seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            num_particles: 100,
            num_iterations: 200,
            inertia: 0.729,
            accel_personal: 1.49445,
            accel_social: 1.49445,
            velocity_clamp: 0.25 * TWO_PI,
            init_velocity: 0.1 * TWO_PI,
            seed: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_particles == 0 {
            return Err(Error::Config("swarm needs at least one particle".into()));
        }
        if !(self.inertia > 0.0 && self.inertia <= 1.0) {
            return Err(Error::Config(format!("inertia {} must lie in (0, 1]", self.inertia)));
        }
        let positive = [
            ("accel_personal", self.accel_personal),
            ("accel_social", self.accel_social),
            ("velocity_clamp", self.velocity_clamp),
            ("init_velocity", self.init_velocity),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct PsoOutcome {
    /// Global best after the last iteration.
    pub phases: PhaseConfig,
    pub fitness: f64,
    /// Global-best fitness after each iteration.
    pub trace: Vec<f64>,
    /// Global-best fitness of the initial swarm.
    pub initial_best: f64,
    pub evaluations: usize,
    pub degenerate_evaluations: usize,
}

/// Maximizes `objective` over `[0, 2π)^dim` by particle swarm.
///
/// `objective` returns the value and whether the evaluation was degenerate.
/// Every particle draws from its own stream derived from `cfg.seed`.
pub fn pso_maximize<F>(cfg: &SwarmConfig, dim: usize, mut objective: F) -> PsoOutcome
where
    F: FnMut(&[f64]) -> (f64, bool),
{
    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.num_particles)
        .map(|i| ChaCha8Rng::seed_from_u64(mix(cfg.seed, &[i as u64])))
        .collect();
    let mut evaluations = 0;
    let mut degenerate = 0;
    let mut eval = |x: &[f64]| {
        let (v, bad) = objective(x);
        evaluations += 1;
        degenerate += bad as usize;
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };

    let mut swarm: Vec<Particle> = rngs
        .iter_mut()
        .map(|rng| {
            let position: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * TWO_PI).collect();
            let velocity: Vec<f64> = (0..dim)
                .map(|_| (2.0 * rng.random::<f64>() - 1.0) * cfg.init_velocity)
                .collect();
            Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_fitness: f64::NEG_INFINITY,
            }
        })
        .collect();
    for p in &mut swarm {
        p.best_fitness = eval(&p.position);
    }

    let leader = |swarm: &[Particle]| {
        let mut best = 0;
        for (i, p) in swarm.iter().enumerate() {
            if p.best_fitness > swarm[best].best_fitness {
                best = i;
            }
        }
        best
    };
    let mut g = leader(&swarm);
    let mut global_pos = swarm[g].best_position.clone();
    let mut global_fit = swarm[g].best_fitness;
    let initial_best = global_fit;
    let mut trace = Vec::with_capacity(cfg.num_iterations);

    for _ in 0..cfg.num_iterations {
        for (p, rng) in swarm.iter_mut().zip(rngs.iter_mut()) {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            for d in 0..dim {
                let v = cfg.inertia * p.velocity[d]
                    + u1 * cfg.accel_personal * (p.best_position[d] - p.position[d])
                    + u2 * cfg.accel_social * (global_pos[d] - p.position[d]);
                let v = v.clamp(-cfg.velocity_clamp, cfg.velocity_clamp);
                p.velocity[d] = v;
                p.position[d] = wrap_phase(p.position[d] + v);
            }
        }
        for p in &mut swarm {
            let f = eval(&p.position);
            if f > p.best_fitness {
                p.best_fitness = f;
                p.best_position.clone_from(&p.position);
            }
        }
        g = leader(&swarm);
        if swarm[g].best_fitness > global_fit {
            global_fit = swarm[g].best_fitness;
            global_pos.clone_from(&swarm[g].best_position);
        }
        trace.push(global_fit);
    }

    PsoOutcome {
        phases: PhaseConfig::new(global_pos),
        fitness: global_fit,
        trace,
        initial_best,
        evaluations,
        degenerate_evaluations: degenerate,
    }
}

/// PSO over the RIS phases with the achievable rate as fitness.
pub fn pso_optimize(cfg: &SwarmConfig, ctx: &FitnessContext) -> PsoOutcome {
    let mut phases = PhaseConfig::new(vec![0.0; ctx.num_ris_elements()]);
    pso_maximize(cfg, ctx.num_ris_elements(), |x| {
        phases.omega.copy_from_slice(x);
        let f = fitness(&phases, ctx);
        (f.rate, f.degenerate)
    })
}

/// Best configuration on the grid `{2πk/levels}^m_i`; ties keep the first in
/// lexicographic order.
pub fn exhaustive_search(m_i: usize, levels: usize, ctx: &FitnessContext) -> Result<(PhaseConfig, f64)> {
    exhaustive_maximize(m_i, levels, |p| fitness(p, ctx).rate)
}

pub fn exhaustive_maximize<F>(m_i: usize, levels: usize, mut objective: F) -> Result<(PhaseConfig, f64)>
where
    F: FnMut(&PhaseConfig) -> f64,
{
    let too_large = Error::GridTooLarge {
        levels,
        dims: m_i,
        limit: EXHAUSTIVE_LIMIT,
    };
    if levels == 0 {
        return Err(Error::Domain("exhaustive search needs at least one level".into()));
    }
    let total = (levels as u64).checked_pow(m_i as u32).ok_or(too_large)?;
    if total > EXHAUSTIVE_LIMIT {
        return Err(Error::GridTooLarge {
            levels,
            dims: m_i,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let step = TWO_PI / levels as f64;
    let mut idx = vec![0usize; m_i];
    let mut current = PhaseConfig::new(vec![0.0; m_i]);
    let mut best = (current.clone(), f64::NEG_INFINITY);
    for _ in 0..total {
        for (w, &k) in current.omega.iter_mut().zip(&idx) {
            *w = k as f64 * step;
        }
        let f = objective(&current);
        if f > best.1 {
            best = (current.clone(), f);
        }
        // odometer, last element fastest
        for d in (0..m_i).rev() {
            idx[d] += 1;
            if idx[d] < levels {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(best)
}
