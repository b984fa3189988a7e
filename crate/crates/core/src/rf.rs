//! Analog RF precoder/combiner from quantized orthogonal steering vectors.
//!
//! The direction space `(γ_x, γ_y) ∈ [-1, 1]²` is tiled into `M_x × M_y`
//! cells centred on `κ = (2m-1)/M - 1`. Steering vectors at the cell centres
//! are mutually orthogonal at half-wavelength spacing, so any subset of them
//! gives a unitary-column beamformer. Cells are picked where the angle
//! support lands, ranked by how many realized paths they capture.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::channel::{direction_coeffs, phase_response_vector, PathRealization, SubchannelSpec, UpaSize};
use crate::linalg::CMatrix;
use crate::{Error, Result};

/// Step used to sample the support image, degrees.
pub const DEFAULT_SUPPORT_STEP_DEG: f64 = 1.0;

/// Closed interval of angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn around(mean: f64, spread: f64) -> Self {
        Self::new(mean - spread, mean + spread)
    }

    fn samples(&self, step: f64) -> impl Iterator<Item = f64> + '_ {
        let n = ((self.hi - self.lo) / step).ceil().max(0.0) as usize;
        (0..=n).map(move |k| (self.lo + k as f64 * step).min(self.hi))
    }
}

/// Sorts and merges overlapping (or touching) closed intervals.
pub fn merge_intervals(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Union of elevation and azimuth intervals on one side of the link.
///
/// The support in direction space is the image of every (elevation, azimuth)
/// combination drawn from the two unions.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSupport {
    pub elevation_intervals: Vec<Interval>,
    pub azimuth_intervals: Vec<Interval>,
    /// Direction coefficients of the contributing cluster means.
    pub mean_directions: Vec<(f64, f64)>,
}

impl AngleSupport {
    /// Direction-space image sampled on a `step`-degree grid over every
    /// elevation × azimuth rectangle, boundaries included.
    pub fn sample_image(&self, step_deg: f64) -> Vec<(f64, f64)> {
        let step = if step_deg > 0.0 { step_deg } else { DEFAULT_SUPPORT_STEP_DEG };
        let mut pts = Vec::new();
        for el in &self.elevation_intervals {
            for az in &self.azimuth_intervals {
                for theta in el.samples(step) {
                    for psi in az.samples(step) {
                        pts.push(direction_coeffs(theta, psi));
                    }
                }
            }
        }
        pts
    }
}

/// Builds `(Υ_AoA, Υ_AoD)`: receive side from IR and TR, transmit side from TI and TR.
pub fn build_angle_supports(
    tr: &SubchannelSpec,
    ti: &SubchannelSpec,
    ir: &SubchannelSpec,
) -> (AngleSupport, AngleSupport) {
    let mut aoa = (Vec::new(), Vec::new(), Vec::new());
    for c in ir.clusters.iter().chain(&tr.clusters) {
        aoa.0.push(Interval::around(c.mean_elev_aoa, c.spread_elev_aoa));
        aoa.1.push(Interval::around(c.mean_azim_aoa, c.spread_azim_aoa));
        aoa.2.push(direction_coeffs(c.mean_elev_aoa, c.mean_azim_aoa));
    }
    let mut aod = (Vec::new(), Vec::new(), Vec::new());
    for c in ti.clusters.iter().chain(&tr.clusters) {
        aod.0.push(Interval::around(c.mean_elev_aod, c.spread_elev_aod));
        aod.1.push(Interval::around(c.mean_azim_aod, c.spread_azim_aod));
        aod.2.push(direction_coeffs(c.mean_elev_aod, c.mean_azim_aod));
    }
    let build = |(el, az, means): (Vec<Interval>, Vec<Interval>, Vec<(f64, f64)>)| AngleSupport {
        elevation_intervals: merge_intervals(el),
        azimuth_intervals: merge_intervals(az),
        mean_directions: means,
    };
    (build(aoa), build(aod))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedPair {
    /// 1-based x index.
    pub m: usize,
    /// 1-based y index.
    pub n: usize,
    pub kappa_x: f64,
    pub kappa_y: f64,
    /// Realized paths inside the cell.
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct QuantizedGrid {
    pub size: UpaSize,
    pub pairs: Vec<QuantizedPair>,
}

impl QuantizedGrid {
    fn half_widths(&self) -> (f64, f64) {
        (1.0 / self.size.nx as f64, 1.0 / self.size.ny as f64)
    }

    pub fn cell_contains(&self, pair: &QuantizedPair, (gx, gy): (f64, f64)) -> bool {
        let (hx, hy) = self.half_widths();
        (gx - pair.kappa_x).abs() <= hx && (gy - pair.kappa_y).abs() <= hy
    }
}

pub fn quantized_grid(size: UpaSize) -> QuantizedGrid {
    let mut pairs = Vec::with_capacity(size.total());
    for m in 1..=size.nx {
        for n in 1..=size.ny {
            pairs.push(QuantizedPair {
                m,
                n,
                kappa_x: (2 * m - 1) as f64 / size.nx as f64 - 1.0,
                kappa_y: (2 * n - 1) as f64 / size.ny as f64 - 1.0,
                score: 0.0,
            });
        }
    }
    QuantizedGrid { size, pairs }
}

#[derive(Debug, Clone)]
pub struct PairSelection {
    pub pairs: Vec<QuantizedPair>,
    /// Fewer cells met the support than requested; the rest are the nearest outside it.
    pub padded: bool,
}

fn nearest_sq(point: (f64, f64), targets: &[(f64, f64)]) -> f64 {
    targets
        .iter()
        .map(|t| (t.0 - point.0).powi(2) + (t.1 - point.1).powi(2))
        .fold(f64::INFINITY, f64::min)
}

/// Picks `budget` cells of `grid` meeting the support, most realized paths first.
///
/// Ties go to the cell centred closest to a cluster-mean direction, then to
/// the lower `(m, n)`.
pub fn select_pairs(
    grid: &QuantizedGrid,
    support: &AngleSupport,
    paths: &[(f64, f64)],
    budget: usize,
    support_step_deg: f64,
) -> Result<PairSelection> {
    if budget == 0 || budget > grid.pairs.len() {
        return Err(Error::Domain(format!(
            "RF chain budget {budget} must be within 1..={}",
            grid.pairs.len()
        )));
    }
    let image = support.sample_image(support_step_deg);

    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for pair in &grid.pairs {
        let mut p = *pair;
        p.score = paths.iter().filter(|&&g| grid.cell_contains(pair, g)).count() as f64;
        let centre = (p.kappa_x, p.kappa_y);
        if image.iter().any(|&g| grid.cell_contains(pair, g)) {
            inside.push((p, nearest_sq(centre, &support.mean_directions)));
        } else {
            outside.push((p, nearest_sq(centre, &image)));
        }
    }

    let lex = |a: &QuantizedPair, b: &QuantizedPair| a.m.cmp(&b.m).then(a.n.cmp(&b.n));
    inside.sort_by(|(a, da), (b, db)| {
        b.score
            .total_cmp(&a.score)
            .then(da.total_cmp(db))
            .then_with(|| lex(a, b))
    });
    let padded = inside.len() < budget;
    let mut chosen: Vec<QuantizedPair> = inside.into_iter().take(budget).map(|(p, _)| p).collect();
    if padded {
        outside.sort_by(|(a, da), (b, db)| match da.total_cmp(db) {
            Ordering::Equal => lex(a, b),
            o => o,
        });
        let missing = budget - chosen.len();
        chosen.extend(outside.into_iter().take(missing).map(|(p, _)| p));
    }
    Ok(PairSelection { pairs: chosen, padded })
}

/// Direction coefficients of the receive (`rx = true`) or transmit ends of paths.
pub fn path_directions<'a>(
    links: impl IntoIterator<Item = &'a [PathRealization]>,
    rx: bool,
) -> Vec<(f64, f64)> {
    links
        .into_iter()
        .flatten()
        .map(|p| if rx { p.rx_direction() } else { p.tx_direction() })
        .collect()
}

/// `M × N` analog beamformer whose columns are normalized steering vectors.
#[derive(Debug, Clone)]
pub struct RfBeamformer {
    pub matrix: CMatrix,
    pub pairs: Vec<QuantizedPair>,
}

impl RfBeamformer {
    pub fn num_elements(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_chains(&self) -> usize {
        self.matrix.ncols()
    }

    /// Row form used on the receive side, `N × M`.
    pub fn combiner(&self) -> CMatrix {
        self.matrix.adjoint()
    }
}

pub fn build_rf_beamformer(size: UpaSize, pairs: &[QuantizedPair], spacing: f64) -> Result<RfBeamformer> {
    for (i, a) in pairs.iter().enumerate() {
        if let Some(b) = pairs[..i].iter().find(|b| b.m == a.m && b.n == a.n) {
            return Err(Error::DuplicatePair { m: b.m, n: b.n });
        }
    }
    let norm = Complex64::from(1.0 / (size.total() as f64).sqrt());
    let mut matrix = CMatrix::zeros(size.total(), pairs.len());
    for (k, pair) in pairs.iter().enumerate() {
        let col = phase_response_vector(size, pair.kappa_x, pair.kappa_y, spacing) * norm;
        matrix.set_column(k, &col);
    }
    Ok(RfBeamformer {
        matrix,
        pairs: pairs.to_vec(),
    })
}
