//! Scenario configuration, read from TOML. Every field has a default; the
//! defaults reproduce the common simulation setup (8×8 Tx, 4×4 Rx, 16×16
//! RIS, six and two RF chains, two streams, one five-path cluster per link).

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::geometry::Placement;
use crate::baseband::{dbm_to_watts, noise_power_watts};
use crate::channel::{AngularCluster, Link, SubchannelSpec, UpaSize, HALF_WAVELENGTH};
use crate::optimizer::{LinkBudget, SwarmConfig, TWO_PI};
use crate::rf::DEFAULT_SUPPORT_STEP_DEG;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pso,
    Random,
    Constant,
    NoRis,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pso, Method::Random, Method::Constant, Method::NoRis];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pso => "pso",
            Method::Random => "random",
            Method::Constant => "constant",
            Method::NoRis => "no_ris",
        }
    }

    /// Stable id mixed into per-cell seeds.
    pub fn id(&self) -> u64 {
        match self {
            Method::Pso => 1,
            Method::Random => 2,
            Method::Constant => 3,
            Method::NoRis => 4,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pso" => Ok(Method::Pso),
            "random" => Ok(Method::Random),
            "constant" => Ok(Method::Constant),
            "no_ris" | "noris" | "no-ris" => Ok(Method::NoRis),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected pso, random, constant, no_ris)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub tx: UpaSize,
    pub rx: UpaSize,
    pub ris: UpaSize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            tx: UpaSize { nx: 8, ny: 8 },
            rx: UpaSize { nx: 4, ny: 4 },
            ris: UpaSize { nx: 16, ny: 16 },
            spacing: HALF_WAVELENGTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub tx: usize,
    pub rx: usize,
    pub streams: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { tx: 6, rx: 2, streams: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub clusters: Vec<AngularCluster>,
    pub path_loss_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkTable {
    pub tr: LinkConfig,
    pub ti: LinkConfig,
    pub ir: LinkConfig,
}

/// LOS exponent for the RIS links, NLOS for the nearly blocked direct link.
pub const LOS_EXPONENT: f64 = 2.3;
pub const NLOS_EXPONENT: f64 = 4.5;

impl Default for LinkTable {
    fn default() -> Self {
        let link = |elev, azim, eta| LinkConfig {
            clusters: vec![AngularCluster::symmetric(elev, azim, 10.0, 5)],
            path_loss_exponent: eta,
        };
        Self {
            tr: link(35.0, 25.0, NLOS_EXPONENT),
            ti: link(60.0, 90.0, LOS_EXPONENT),
            ir: link(50.0, 225.0, LOS_EXPONENT),
        }
    }
}

/// Distances in meters. The RIS placement is given by at most one of
/// `ris_x`, `d1`, `d2_over_d1`, or the pair `d1` + `d2`; with none set the
/// RIS sits at `d1 = 20` m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub d_tr: f64,
    pub d_v: f64,
    pub ris_x: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d2_over_d1: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            d_tr: 200.0,
            d_v: 5.0,
            ris_x: None,
            d1: None,
            d2: None,
            d2_over_d1: None,
        }
    }
}

pub const DEFAULT_D1: f64 = 20.0;

impl GeometryConfig {
    pub fn placement(&self) -> Result<Placement> {
        match (self.ris_x, self.d1, self.d2, self.d2_over_d1) {
            (None, None, None, None) => Ok(Placement::D1(DEFAULT_D1)),
            (Some(x), None, None, None) => Ok(Placement::RisX(x)),
            (None, Some(d1), None, None) => Ok(Placement::D1(d1)),
            (None, None, None, Some(k)) => Ok(Placement::Ratio(k)),
            (None, Some(d1), Some(d2), None) => Ok(Placement::Direct { d1, d2 }),
            _ => Err(Error::Config(
                "geometry takes at most one of: ris_x, d1, d2_over_d1, or d1 together with d2".into(),
            )),
        }
    }

    /// `(d_TR, d_1, d_2)`.
    pub fn distances(&self) -> Result<(f64, f64, f64)> {
        if !(self.d_tr > 0.0) {
            return Err(Error::Config(format!("d_tr = {} must be positive", self.d_tr)));
        }
        let (d1, d2) = self.placement()?.distances(self.d_tr, self.d_v)?;
        Ok((self.d_tr, d1, d2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub bandwidth_hz: f64,
    /// Path loss at 1 m, dB.
    pub ref_loss_db: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: DEFAULT_TX_POWER_DBM,
            noise_psd_dbm_hz: -174.0,
            bandwidth_hz: 1e4,
            ref_loss_db: 30.0,
        }
    }
}

/// Chosen so the default d_1 sweep sits in the few-bps/Hz regime where the
/// methods separate clearly; with the 30 dB reference loss and a 10 kHz
/// band, higher powers saturate every method.
pub const DEFAULT_TX_POWER_DBM: f64 = -30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub accel_personal: f64,
    pub accel_social: f64,
    /// Radians per iteration.
    pub velocity_clamp: f64,
    /// Radians.
    pub init_velocity: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        let s = SwarmConfig::default();
        Self {
            particles: s.num_particles,
            iterations: s.num_iterations,
            inertia: s.inertia,
            accel_personal: s.accel_personal,
            accel_social: s.accel_social,
            velocity_clamp: s.velocity_clamp,
            init_velocity: s.init_velocity,
        }
    }
}

impl PsoConfig {
    pub fn swarm(&self, seed: u64) -> SwarmConfig {
        SwarmConfig {
            num_particles: self.particles,
            num_iterations: self.iterations,
            inertia: self.inertia,
            accel_personal: self.accel_personal,
            accel_social: self.accel_social,
            velocity_clamp: self.velocity_clamp,
            init_velocity: self.init_velocity,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub trials: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    /// Phase used by the constant baseline, radians.
    pub constant_phase: f64,
    /// Sampling step of the angle-support image, degrees.
    pub support_step_deg: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            master_seed: 1,
            methods: Method::ALL.to_vec(),
            constant_phase: 0.0,
            support_step_deg: DEFAULT_SUPPORT_STEP_DEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub arrays: ArrayConfig,
    pub chains: ChainConfig,
    pub links: LinkTable,
    pub geometry: GeometryConfig,
    pub power: PowerConfig,
    pub pso: PsoConfig,
    pub run: RunConfig,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.arrays;
        for (name, size) in [("tx", a.tx), ("rx", a.rx), ("ris", a.ris)] {
            UpaSize::new(size.nx, size.ny).map_err(|_| Error::Config(format!("{name} array must be at least 1x1")))?;
        }
        if !(a.spacing > 0.0) {
            return Err(Error::Config("element spacing must be positive".into()));
        }
        let c = &self.chains;
        if c.streams == 0 {
            return Err(Error::Config("at least one data stream is required".into()));
        }
        if c.streams > c.tx.min(c.rx) {
            return Err(Error::Config(format!(
                "N_S = {} violates N_S <= min(N_T, N_R) = min({}, {})",
                c.streams, c.tx, c.rx
            )));
        }
        if c.tx > a.tx.total() || c.rx > a.rx.total() {
            return Err(Error::Config(format!(
                "RF chains ({} Tx, {} Rx) exceed antennas ({} Tx, {} Rx)",
                c.tx,
                c.rx,
                a.tx.total(),
                a.rx.total()
            )));
        }
        for link in self.subchannel_specs()? {
            link.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let p = &self.power;
        if !(p.bandwidth_hz > 0.0) {
            return Err(Error::Config("bandwidth must be positive".into()));
        }
        if ![p.tx_power_dbm, p.noise_psd_dbm_hz, p.ref_loss_db].iter().all(|v| v.is_finite()) {
            return Err(Error::Config("power settings must be finite".into()));
        }
        self.pso.swarm(0).validate()?;
        let r = &self.run;
        if r.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if r.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        let mut seen = r.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != r.methods.len() {
            return Err(Error::Config("methods must not repeat".into()));
        }
        if !(r.constant_phase.is_finite() && r.constant_phase.abs() <= 4.0 * TWO_PI) {
            return Err(Error::Config("constant_phase must be a finite angle in radians".into()));
        }
        if !(r.support_step_deg > 0.0) {
            return Err(Error::Config("support_step_deg must be positive".into()));
        }
        Ok(())
    }

    /// TR, TI and IR sub-channel specs at the configured geometry.
    pub fn subchannel_specs(&self) -> Result<[SubchannelSpec; 3]> {
        let (d_tr, d1, d2) = self.geometry.distances()?;
        let a = &self.arrays;
        let make = |link, cfg: &LinkConfig, distance, tx, rx| SubchannelSpec {
            link,
            clusters: cfg.clusters.clone(),
            distance,
            path_loss_exponent: cfg.path_loss_exponent,
            ref_loss_db: self.power.ref_loss_db,
            tx_array: tx,
            rx_array: rx,
            spacing: a.spacing,
        };
        Ok([
            make(Link::Tr, &self.links.tr, d_tr, a.tx, a.rx),
            make(Link::Ti, &self.links.ti, d1, a.tx, a.ris),
            make(Link::Ir, &self.links.ir, d2, a.ris, a.rx),
        ])
    }

    pub fn link_budget(&self) -> LinkBudget {
        LinkBudget {
            noise_power: noise_power_watts(self.power.noise_psd_dbm_hz, self.power.bandwidth_hz),
            total_power: dbm_to_watts(self.power.tx_power_dbm),
            num_streams: self.chains.streams,
        }
    }
}
