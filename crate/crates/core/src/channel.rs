//! Clustered 3D geometric mmWave channel between uniform planar arrays.
//!
//! Each sub-channel is a sum of rank-one path contributions
//! `g · φ_r(γ_r) φ_t(γ_t)^H`, with path angles drawn uniformly around the
//! cluster means and complex gains scaled by the distance-dependent path loss.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{cis, CMatrix, CVector};
use crate::{Error, Result};

/// Default element spacing in wavelengths.
pub const HALF_WAVELENGTH: f64 = 0.5;

/// Element counts of a uniform planar array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpaSize {
    pub nx: usize,
    pub ny: usize,
}

impl UpaSize {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain(format!("array size {nx}x{ny} must be at least 1x1")));
        }
        Ok(Self { nx, ny })
    }

    pub fn total(&self) -> usize {
        self.nx * self.ny
    }

    /// Most nearly square factorization of `total`, with `nx <= ny`.
    pub fn near_square(total: usize) -> Result<Self> {
        if total == 0 {
            return Err(Error::Domain("array must have at least one element".into()));
        }
        let mut nx = (total as f64).sqrt().floor() as usize;
        while nx > 1 && total % nx != 0 {
            nx -= 1;
        }
        Self::new(nx.max(1), total / nx.max(1))
    }
}

impl std::fmt::Display for UpaSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.nx, self.ny)
    }
}

/// Mean and spread of the elevation/azimuth AoA and AoD of one cluster, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularCluster {
    pub mean_elev_aoa: f64,
    pub spread_elev_aoa: f64,
    pub mean_azim_aoa: f64,
    pub spread_azim_aoa: f64,
    pub mean_elev_aod: f64,
    pub spread_elev_aod: f64,
    pub mean_azim_aod: f64,
    pub spread_azim_aod: f64,
    pub num_paths: usize,
}

impl AngularCluster {
    /// Same mean elevation/azimuth on both ends and one spread for all four angles.
    pub fn symmetric(elevation: f64, azimuth: f64, spread: f64, num_paths: usize) -> Self {
        Self {
            mean_elev_aoa: elevation,
            spread_elev_aoa: spread,
            mean_azim_aoa: azimuth,
            spread_azim_aoa: spread,
            mean_elev_aod: elevation,
            spread_elev_aod: spread,
            mean_azim_aod: azimuth,
            spread_azim_aod: spread,
            num_paths,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let spreads = [
            self.spread_elev_aoa,
            self.spread_azim_aoa,
            self.spread_elev_aod,
            self.spread_azim_aod,
        ];
        if spreads.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::Domain("angular spreads must be finite and nonnegative".into()));
        }
        if self.num_paths == 0 {
            return Err(Error::Domain("a cluster needs at least one path".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    /// Direct Tx → Rx.
    Tr,
    /// Tx → RIS.
    Ti,
    /// RIS → Rx.
    Ir,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubchannelSpec {
    pub link: Link,
    pub clusters: Vec<AngularCluster>,
    /// Terminal separation in meters.
    pub distance: f64,
    pub path_loss_exponent: f64,
    /// Loss at the 1 m reference distance, dB.
    pub ref_loss_db: f64,
    pub tx_array: UpaSize,
    pub rx_array: UpaSize,
    /// Element spacing in wavelengths, shared by both ends.
    pub spacing: f64,
}

impl SubchannelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0) {
            return Err(Error::Domain(format!("{:?} distance must be positive", self.link)));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::Domain(format!(
                "{:?} path-loss exponent must be positive",
                self.link
            )));
        }
        if self.clusters.is_empty() {
            return Err(Error::Domain(format!("{:?} has no clusters", self.link)));
        }
        self.clusters.iter().try_for_each(AngularCluster::validate)
    }

    pub fn total_paths(&self) -> usize {
        self.clusters.iter().map(|c| c.num_paths).sum()
    }

    pub fn path_loss(&self) -> Result<f64> {
        path_loss(self.distance, self.path_loss_exponent, self.ref_loss_db)
    }
}

/// Drawn angles of one path, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAngles {
    pub elev_aoa: f64,
    pub azim_aoa: f64,
    pub elev_aod: f64,
    pub azim_aod: f64,
}

/// Direction coefficients and complex gain of one realized path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRealization {
    pub gamma_x_r: f64,
    pub gamma_y_r: f64,
    pub gamma_x_t: f64,
    pub gamma_y_t: f64,
    pub gain: Complex64,
}

impl PathRealization {
    pub fn from_angles(angles: &PathAngles, gain: Complex64) -> Self {
        let (gamma_x_r, gamma_y_r) = direction_coeffs(angles.elev_aoa, angles.azim_aoa);
        let (gamma_x_t, gamma_y_t) = direction_coeffs(angles.elev_aod, angles.azim_aod);
        Self {
            gamma_x_r,
            gamma_y_r,
            gamma_x_t,
            gamma_y_t,
            gain,
        }
    }

    pub fn rx_direction(&self) -> (f64, f64) {
        (self.gamma_x_r, self.gamma_y_r)
    }

    pub fn tx_direction(&self) -> (f64, f64) {
        (self.gamma_x_t, self.gamma_y_t)
    }
}

/// The three sub-channel matrices of one draw and the paths behind them.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `M_R × M_T`.
    pub h_tr: CMatrix,
    /// `M_I × M_T`.
    pub h_ti: CMatrix,
    /// `M_R × M_I`.
    pub h_ir: CMatrix,
    pub paths_tr: Vec<PathRealization>,
    pub paths_ti: Vec<PathRealization>,
    pub paths_ir: Vec<PathRealization>,
}

impl ChannelRealization {
    /// Draws TR, TI and IR in that order from one stream.
    pub fn generate<R: Rng + ?Sized>(
        tr: &SubchannelSpec,
        ti: &SubchannelSpec,
        ir: &SubchannelSpec,
        rng: &mut R,
    ) -> Result<Self> {
        if ti.rx_array != ir.tx_array {
            return Err(Error::mismatch(
                "channel generation",
                format!("RIS array {}", ti.rx_array),
                format!("{}", ir.tx_array),
            ));
        }
        if tr.tx_array != ti.tx_array || tr.rx_array != ir.rx_array {
            return Err(Error::mismatch(
                "channel generation",
                format!("Tx {} / Rx {}", tr.tx_array, tr.rx_array),
                format!("Tx {} / Rx {}", ti.tx_array, ir.rx_array),
            ));
        }
        let (h_tr, paths_tr) = generate_subchannel(tr, rng)?;
        let (h_ti, paths_ti) = generate_subchannel(ti, rng)?;
        let (h_ir, paths_ir) = generate_subchannel(ir, rng)?;
        Ok(Self {
            h_tr,
            h_ti,
            h_ir,
            paths_tr,
            paths_ti,
            paths_ir,
        })
    }

    pub fn num_ris_elements(&self) -> usize {
        self.h_ti.nrows()
    }
}

/// Linear power gain `10^(-ref/10) · d^(-η)`.
pub fn path_loss(distance: f64, exponent: f64, ref_loss_db: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::Domain(format!("distance {distance} must be positive")));
    }
    Ok(10f64.powf(-ref_loss_db / 10.0) * distance.powf(-exponent))
}

/// Draws the cluster's paths, each angle uniform on `mean ± spread`.
pub fn sample_path_angles<R: Rng + ?Sized>(cluster: &AngularCluster, rng: &mut R) -> Vec<PathAngles> {
    let mut draw = |mean: f64, spread: f64| {
        let u: f64 = rng.random();
        mean + spread * (2.0 * u - 1.0)
    };
    (0..cluster.num_paths)
        .map(|_| PathAngles {
            elev_aoa: draw(cluster.mean_elev_aoa, cluster.spread_elev_aoa),
            azim_aoa: draw(cluster.mean_azim_aoa, cluster.spread_azim_aoa),
            elev_aod: draw(cluster.mean_elev_aod, cluster.spread_elev_aod),
            azim_aod: draw(cluster.mean_azim_aod, cluster.spread_azim_aod),
        })
        .collect()
}

/// `(sinθ cosψ, sinθ sinψ)` for angles in degrees.
pub fn direction_coeffs(elevation_deg: f64, azimuth_deg: f64) -> (f64, f64) {
    let (st, _) = elevation_deg.to_radians().sin_cos();
    let (sp, cp) = azimuth_deg.to_radians().sin_cos();
    (st * cp, st * sp)
}

/// UPA phase response: x-axis progression ⊗ y-axis progression.
pub fn phase_response_vector(size: UpaSize, gamma_x: f64, gamma_y: f64, spacing: f64) -> CVector {
    let kx = 2.0 * PI * spacing * gamma_x;
    let ky = 2.0 * PI * spacing * gamma_y;
    CVector::from_fn(size.total(), |idx, _| {
        let m = (idx / size.ny) as f64;
        let n = (idx % size.ny) as f64;
        cis(kx * m + ky * n)
    })
}

/// `Σ g · φ_r φ_t^H` over the given paths.
pub fn subchannel_from_paths(spec: &SubchannelSpec, paths: &[PathRealization]) -> CMatrix {
    let mut h = CMatrix::zeros(spec.rx_array.total(), spec.tx_array.total());
    for p in paths {
        let phi_r = phase_response_vector(spec.rx_array, p.gamma_x_r, p.gamma_y_r, spec.spacing);
        let phi_t = phase_response_vector(spec.tx_array, p.gamma_x_t, p.gamma_y_t, spec.spacing);
        h.ger(p.gain, &phi_r, &phi_t.conjugate(), Complex64::new(1.0, 0.0));
    }
    h
}

/// Draws one sub-channel. Gains are `CN(0, β/Z)` with `Z` the total path count.
pub fn generate_subchannel<R: Rng + ?Sized>(
    spec: &SubchannelSpec,
    rng: &mut R,
) -> Result<(CMatrix, Vec<PathRealization>)> {
    spec.validate()?;
    let beta = spec.path_loss()?;
    let std = (beta / spec.total_paths() as f64 / 2.0).sqrt();
    let mut paths = Vec::with_capacity(spec.total_paths());
    for cluster in &spec.clusters {
        for angles in sample_path_angles(cluster, rng) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            paths.push(PathRealization::from_angles(&angles, Complex64::new(re * std, im * std)));
        }
    }
    Ok((subchannel_from_paths(spec, &paths), paths))
}

/// `H_IR · diag(e^{jΩ}) · H_TI + H_TR`.
pub fn compose_end_to_end(chan: &ChannelRealization, phases: &[f64]) -> Result<CMatrix> {
    compose_matrices(&chan.h_ir, &chan.h_ti, &chan.h_tr, phases)
}

pub fn compose_matrices(h_ir: &CMatrix, h_ti: &CMatrix, h_tr: &CMatrix, phases: &[f64]) -> Result<CMatrix> {
    let m_i = h_ti.nrows();
    if phases.len() != m_i || h_ir.ncols() != m_i {
        return Err(Error::mismatch(
            "compose_end_to_end",
            format!("{m_i} RIS phases"),
            format!("{} phases, H_IR with {} columns", phases.len(), h_ir.ncols()),
        ));
    }
    if h_ir.nrows() != h_tr.nrows() || h_ti.ncols() != h_tr.ncols() {
        return Err(Error::mismatch(
            "compose_end_to_end",
            format!("{}x{}", h_tr.nrows(), h_tr.ncols()),
            format!("{}x{}", h_ir.nrows(), h_ti.ncols()),
        ));
    }
    let mut scaled = h_ir.clone();
    for (i, &omega) in phases.iter().enumerate() {
        let w = cis(omega);
        for r in 0..scaled.nrows() {
            scaled[(r, i)] *= w;
        }
    }
    Ok(scaled * h_ti + h_tr)
}
