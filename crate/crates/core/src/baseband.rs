//! Baseband precoder/combiner on the reduced effective channel, and the
//! achievable rate of the full hybrid link.

use num_complex::Complex64;

use crate::linalg::{hermitian_log_det, numerical_rank, pseudo_inverse, trace, CMatrix, Svd};
use crate::{Error, Result};

/// `𝓗 = F_r H F_t`, shape `N_R × N_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub matrix: CMatrix,
}

impl EffectiveChannel {
    pub fn rx_chains(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tx_chains(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Per-stream transmit powers and the shared water level.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub gamma: Vec<f64>,
    pub water_level: f64,
}

#[derive(Debug, Clone)]
pub struct BeamformerSet {
    /// `M_T × N_T`.
    pub f_t: CMatrix,
    /// `N_R × M_R`.
    pub f_r: CMatrix,
    /// `N_T × N_S`.
    pub b_t: CMatrix,
    /// `N_S × N_R`.
    pub b_r: CMatrix,
}

impl BeamformerSet {
    /// `tr(B_t^H F_t^H F_t B_t)`.
    pub fn transmit_power(&self) -> f64 {
        let s = &self.f_t * &self.b_t;
        trace(&(s.adjoint() * s)).re
    }
}

/// Output of [`bb_precoder`].
#[derive(Debug, Clone)]
pub struct BasebandPrecoder {
    pub b_t: CMatrix,
    pub allocation: PowerAllocation,
    pub svd: Svd,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Thermal noise power in watts for a PSD (dBm/Hz) over a bandwidth (Hz).
pub fn noise_power_watts(psd_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(psd_dbm_hz + 10.0 * bandwidth_hz.log10())
}

pub fn effective_channel(f_r: &CMatrix, h: &CMatrix, f_t: &CMatrix) -> Result<EffectiveChannel> {
    if f_r.ncols() != h.nrows() || h.ncols() != f_t.nrows() {
        return Err(Error::mismatch(
            "effective_channel",
            format!("F_r (·x{}) · H ({}x{}) · F_t ({}x·)", h.nrows(), h.nrows(), h.ncols(), h.ncols()),
            format!("F_r ·x{}, F_t {}x·", f_r.ncols(), f_t.nrows()),
        ));
    }
    Ok(EffectiveChannel {
        matrix: f_r * h * f_t,
    })
}

/// Water-filling over the first `num_streams` singular values:
/// `Γ_n = (μ - σ_v²/(P_T σ_n²))⁺` with `Σ Γ_n = P_T`.
pub fn water_filling(
    singular_values: &[f64],
    noise_power: f64,
    total_power: f64,
    num_streams: usize,
) -> Result<PowerAllocation> {
    if num_streams == 0 {
        return Err(Error::Domain("water filling needs at least one stream".into()));
    }
    if num_streams > singular_values.len() {
        return Err(Error::Domain(format!(
            "{num_streams} streams requested from {} singular values",
            singular_values.len()
        )));
    }
    if !(total_power > 0.0) || !(noise_power >= 0.0) {
        return Err(Error::Domain("powers must be positive".into()));
    }
    let sv = &singular_values[..num_streams];
    if sv.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain("singular values must be positive and finite".into()));
    }

    let floors: Vec<f64> = sv.iter().map(|s| noise_power / (total_power * s * s)).collect();
    let mut order: Vec<usize> = (0..num_streams).collect();
    order.sort_by(|&a, &b| floors[a].total_cmp(&floors[b]).then(a.cmp(&b)));
    let base = floors[order[0]];

    // Levels are measured above the lowest floor to keep the arithmetic well
    // conditioned when floors are large compared with the power budget.
    let mut active = num_streams;
    let mut rel_level = 0.0;
    while active > 0 {
        let excess: f64 = order[..active].iter().map(|&i| floors[i] - base).sum();
        rel_level = (total_power + excess) / active as f64;
        if rel_level > floors[order[active - 1]] - base {
            break;
        }
        active -= 1;
    }

    let mut gamma = vec![0.0; num_streams];
    for &i in &order[..active] {
        gamma[i] = (rel_level - (floors[i] - base)).max(0.0);
    }
    Ok(PowerAllocation {
        gamma,
        water_level: base + rel_level,
    })
}

/// `B_t = V₁ Γ^{1/2}` from the SVD of the effective channel.
pub fn bb_precoder(
    eff: &EffectiveChannel,
    noise_power: f64,
    total_power: f64,
    num_streams: usize,
) -> Result<BasebandPrecoder> {
    if num_streams == 0 {
        return Err(Error::Domain("at least one stream is required".into()));
    }
    let svd = Svd::new(&eff.matrix);
    let rank = svd.rank();
    if rank < num_streams {
        return Err(Error::RankDeficient {
            rank,
            required: num_streams,
        });
    }
    let allocation = water_filling(&svd.singular_values, noise_power, total_power, num_streams)?;
    let mut b_t = svd.v.columns(0, num_streams).into_owned();
    for (k, g) in allocation.gamma.iter().enumerate() {
        let s = Complex64::from(g.sqrt());
        for r in 0..b_t.nrows() {
            b_t[(r, k)] *= s;
        }
    }
    Ok(BasebandPrecoder { b_t, allocation, svd })
}

/// `B_r = B_t^H 𝓗^H (𝓗 B_t B_t^H 𝓗^H)^{-1}`, pseudo-inverse when `N_R > N_S`.
pub fn mmse_combiner(eff: &EffectiveChannel, b_t: &CMatrix) -> Result<CMatrix> {
    if eff.matrix.ncols() != b_t.nrows() {
        return Err(Error::mismatch(
            "mmse_combiner",
            format!("B_t with {} rows", eff.matrix.ncols()),
            b_t.nrows(),
        ));
    }
    let g = &eff.matrix * b_t;
    let streams = g.ncols();
    let rank = numerical_rank(g.clone().singular_values().as_slice());
    if rank < streams {
        return Err(Error::RankDeficient {
            rank,
            required: streams,
        });
    }
    let gram = &g * g.adjoint();
    let inv = if gram.nrows() == streams {
        gram.clone().try_inverse().unwrap_or_else(|| pseudo_inverse(&gram))
    } else {
        pseudo_inverse(&gram)
    };
    Ok(g.adjoint() * inv)
}

/// `log₂|I + R_w^{-1} B_r 𝓗 B_t B_t^H 𝓗^H B_r^H|` with `R_w = σ_v² B_r F_r F_r^H B_r^H`.
///
/// Evaluated as `log|R_w + S| - log|R_w|` with both terms Hermitian.
pub fn achievable_rate(set: &BeamformerSet, eff: &EffectiveChannel, noise_power: f64) -> Result<f64> {
    let g = &set.b_r * &eff.matrix * &set.b_t;
    let signal = &g * g.adjoint();
    let fr = &set.b_r * &set.f_r;
    let r_w = (&fr * fr.adjoint()) * Complex64::from(noise_power);
    let r_w = hermitian_part(&r_w);
    let total = hermitian_part(&(&r_w + signal));
    let noise_ld = hermitian_log_det(&r_w).ok_or(Error::SingularNoiseCovariance)?;
    let total_ld = hermitian_log_det(&total).ok_or(Error::SingularNoiseCovariance)?;
    Ok(((total_ld - noise_ld) / std::f64::consts::LN_2).max(0.0))
}

fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::from(0.5)
}

/// Full baseband design for one effective channel: precoder, combiner, rate.
#[derive(Debug, Clone)]
pub struct BasebandDesign {
    /// `N_T × N_S`; columns of streams shut off by water filling are zero.
    pub b_t: CMatrix,
    /// `N_S × N_R`; rows of shut-off streams are zero.
    pub b_r: CMatrix,
    pub allocation: PowerAllocation,
    /// Streams with nonzero power.
    pub active_streams: usize,
    pub rate: f64,
}

/// Precoder, combiner and rate for one effective channel.
///
/// Streams that water filling leaves without power carry no data, so the
/// combiner and the rate are computed over the powered streams only.
pub fn design_baseband(
    eff: &EffectiveChannel,
    f_t: &CMatrix,
    f_r: &CMatrix,
    noise_power: f64,
    total_power: f64,
    num_streams: usize,
) -> Result<BasebandDesign> {
    let pre = bb_precoder(eff, noise_power, total_power, num_streams)?;
    let active: Vec<usize> = (0..num_streams).filter(|&k| pre.allocation.gamma[k] > 0.0).collect();
    let b_t_active = pre.b_t.select_columns(&active);
    let b_r_active = mmse_combiner(eff, &b_t_active)?;
    let set = BeamformerSet {
        f_t: f_t.clone(),
        f_r: f_r.clone(),
        b_t: b_t_active,
        b_r: b_r_active,
    };
    let rate = achievable_rate(&set, eff, noise_power)?;
    let mut b_r = CMatrix::zeros(num_streams, eff.rx_chains());
    for (row, &k) in active.iter().enumerate() {
        b_r.set_row(k, &set.b_r.row(row));
    }
    Ok(BasebandDesign {
        b_t: pre.b_t,
        b_r,
        allocation: pre.allocation,
        active_streams: active.len(),
        rate,
    })
}
