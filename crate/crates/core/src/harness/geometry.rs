//! Top-view placement: Tx at the origin, Rx at `(d_TR, 0)`, RIS at `(x, d_V)`.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// RIS x-coordinate.
    RisX(f64),
    /// Tx–RIS distance; the RIS x-coordinate follows from `d_V`.
    D1(f64),
    /// `d_2 = k · d_1`.
    Ratio(f64),
    /// Tx–RIS and RIS–Rx distances given outright.
    Direct { d1: f64, d2: f64 },
}

/// `(d_1, d_2)` for a RIS at `(ris_x, d_v)`.
pub fn resolve_geometry(d_tr: f64, d_v: f64, ris_x: f64) -> Result<(f64, f64)> {
    if !(ris_x > 0.0 && ris_x < d_tr) {
        return Err(Error::Config(format!(
            "RIS x-coordinate {ris_x} must lie strictly between Tx (0) and Rx ({d_tr})"
        )));
    }
    Ok((ris_x.hypot(d_v), (d_tr - ris_x).hypot(d_v)))
}

pub fn ris_x_for_d1(d1: f64, d_v: f64) -> Result<f64> {
    if !(d1 > d_v.abs()) {
        return Err(Error::Config(format!(
            "d1 = {d1} m cannot be reached with lateral offset d_V = {d_v} m"
        )));
    }
    Ok((d1 * d1 - d_v * d_v).sqrt())
}

/// RIS x-coordinate with `d_2 = ratio · d_1`.
pub fn ris_x_for_ratio(d_tr: f64, d_v: f64, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(Error::Config(format!("distance ratio {ratio} must be positive")));
    }
    // k²(x² + d_V²) - ((d_TR - x)² + d_V²) is increasing on (0, d_TR)
    let f = |x: f64| ratio * ratio * (x * x + d_v * d_v) - ((d_tr - x).powi(2) + d_v * d_v);
    let (mut lo, mut hi) = (0.0, d_tr);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::Config(format!(
            "no RIS position gives d2 = {ratio}·d1 with d_TR = {d_tr}, d_V = {d_v}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl Placement {
    pub fn distances(&self, d_tr: f64, d_v: f64) -> Result<(f64, f64)> {
        match *self {
            Placement::RisX(x) => resolve_geometry(d_tr, d_v, x),
            Placement::D1(d1) => resolve_geometry(d_tr, d_v, ris_x_for_d1(d1, d_v)?),
            Placement::Ratio(k) => resolve_geometry(d_tr, d_v, ris_x_for_ratio(d_tr, d_v, k)?),
            Placement::Direct { d1, d2 } => {
                if !(d1 > 0.0 && d2 > 0.0) {
                    return Err(Error::Config(format!("distances d1 = {d1}, d2 = {d2} must be positive")));
                }
                Ok((d1, d2))
            }
        }
    }
}
