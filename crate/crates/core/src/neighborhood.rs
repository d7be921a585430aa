//! Angular neighborhoods on the steering lattice and per-pair min/max/range.
//!
//! A beam-pair neighborhood is a box in the 4-D `[tx_az, tx_el, rx_az, rx_el]`
//! index space (clipped at lattice edges, circular only on an azimuth axis
//! that covers the full circle), so its min and max separate into four 1-D
//! sliding-window passes.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, Direction, DirectionGrid};
use crate::grid::{InrGrid, Side};
use crate::stats::median_in_place;

/// Slack for lattice values that are not exactly representable.
const LATTICE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub dtheta_deg: u32,
    pub dphi_deg: u32,
}

impl NeighborhoodSpec {
    pub const fn new(dtheta_deg: u32, dphi_deg: u32) -> Self {
        Self {
            dtheta_deg,
            dphi_deg,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.dtheta_deg == 0 && self.dphi_deg == 0
    }

    /// Componentwise containment.
    pub fn within(&self, other: &Self) -> bool {
        self.dtheta_deg <= other.dtheta_deg && self.dphi_deg <= other.dphi_deg
    }

    /// Lattice steps reachable in azimuth and elevation.
    pub fn radii(&self, grid: &DirectionGrid) -> (usize, usize) {
        (
            steps_within(self.dtheta_deg as f64, grid.az_step()),
            steps_within(self.dphi_deg as f64, grid.el_step()),
        )
    }
}

impl fmt::Display for NeighborhoodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.dtheta_deg, self.dphi_deg)
    }
}

impl FromStr for NeighborhoodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidConfig(format!("neighborhood `{s}` is not `DTHETA,DPHI`"));
        if parts.len() != 2 {
            return Err(bad());
        }
        Ok(Self::new(
            parts[0].parse().map_err(|_| bad())?,
            parts[1].parse().map_err(|_| bad())?,
        ))
    }
}

fn steps_within(delta_deg: f64, step_deg: f64) -> usize {
    (delta_deg / step_deg + LATTICE_EPS).floor() as usize
}

/// Lattice directions within `spec` of `center` (angle_diff metric), center included.
pub fn neighborhood_directions(
    grid: &DirectionGrid,
    center: &Direction,
    spec: NeighborhoodSpec,
) -> Result<Vec<Direction>> {
    let c = grid.index_of(center)?;
    Ok(neighborhood_indices(grid, c, spec)
        .into_iter()
        .map(|k| grid.direction(k))
        .collect())
}

/// Flat lattice indices within `spec` of flat index `center`.
pub fn neighborhood_indices(grid: &DirectionGrid, center: usize, spec: NeighborhoodSpec) -> Vec<usize> {
    let (ca, ce) = grid.coords(center);
    let (az0, el0) = (grid.azimuths()[ca], grid.elevations()[ce]);
    let az_ok: Vec<usize> = (0..grid.n_az())
        .filter(|&a| angle_diff(grid.azimuths()[a], az0) <= spec.dtheta_deg as f64 + LATTICE_EPS)
        .collect();
    let el_ok: Vec<usize> = (0..grid.n_el())
        .filter(|&e| angle_diff(grid.elevations()[e], el0) <= spec.dphi_deg as f64 + LATTICE_EPS)
        .collect();
    let mut out = Vec::with_capacity(az_ok.len() * el_ok.len());
    for &a in &az_ok {
        for &e in &el_ok {
            out.push(grid.flat_index(a, e));
        }
    }
    out
}

fn axis_count(n: usize, r: usize, wraps: bool, i: usize) -> usize {
    if wraps {
        (2 * r + 1).min(n)
    } else {
        i.min(r) + (n - 1 - i).min(r) + 1
    }
}

/// `|T_tx(i)| * |T_rx(j)|`.
pub fn pair_cardinality(
    tx_grid: &DirectionGrid,
    rx_grid: &DirectionGrid,
    tx: usize,
    rx: usize,
    spec: NeighborhoodSpec,
) -> usize {
    let side = |g: &DirectionGrid, k: usize| {
        let (a, e) = g.coords(k);
        let (ra, re) = spec.radii(g);
        axis_count(g.n_az(), ra, g.azimuth_wraps(), a) * axis_count(g.n_el(), re, false, e)
    };
    side(tx_grid, tx) * side(rx_grid, rx)
}

/// Per-pair extremes over beam-pair neighborhoods, aligned with the grid tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct PairNeighborhoodStats {
    spec: NeighborhoodSpec,
    n_tx: usize,
    n_rx: usize,
    inr_min_db: Vec<f64>,
    inr_max_db: Vec<f64>,
    inr_rng_db: Vec<f64>,
}

impl PairNeighborhoodStats {
    pub fn spec(&self) -> NeighborhoodSpec {
        self.spec
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn inr_min_db(&self) -> &[f64] {
        &self.inr_min_db
    }

    pub fn inr_max_db(&self) -> &[f64] {
        &self.inr_max_db
    }

    pub fn inr_rng_db(&self) -> &[f64] {
        &self.inr_rng_db
    }

    /// Per-beam fraction of counterpart beams whose neighborhood minimum is `<= threshold`.
    pub fn threshold_fraction(&self, side: Side, threshold_db: f64) -> Vec<f64> {
        fraction_at_most(&self.inr_min_db, self.n_tx, self.n_rx, side, threshold_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Extreme {
    Min,
    Max,
}

impl Extreme {
    #[inline]
    fn dominates(self, a: f64, b: f64) -> bool {
        match self {
            Extreme::Min => a <= b,
            Extreme::Max => a >= b,
        }
    }
}

/// Clipped sliding extreme over `[i - r, i + r]` using a monotonic deque.
fn sliding_clipped(x: &[f64], r: usize, which: Extreme, out: &mut [f64], dq: &mut VecDeque<usize>) {
    let n = x.len();
    dq.clear();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + r).min(n - 1);
        while next <= hi {
            while let Some(&b) = dq.back() {
                if which.dominates(x[next], x[b]) {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(r);
        while let Some(&f) = dq.front() {
            if f < lo {
                dq.pop_front();
            } else {
                break;
            }
        }
        out[i] = x[*dq.front().expect("window is never empty")];
    }
}

struct LaneScratch {
    lane: Vec<f64>,
    ext: Vec<f64>,
    res: Vec<f64>,
    dq: VecDeque<usize>,
}

fn sliding_lane(s: &mut LaneScratch, r: usize, wraps: bool, which: Extreme) {
    let n = s.lane.len();
    s.res.resize(n, 0.0);
    if r == 0 {
        s.res.copy_from_slice(&s.lane);
        return;
    }
    if !wraps {
        sliding_clipped(&s.lane, r, which, &mut s.res, &mut s.dq);
        return;
    }
    if 2 * r + 1 >= n {
        let mut best = s.lane[0];
        for &v in &s.lane[1..] {
            if which.dominates(v, best) {
                best = v;
            }
        }
        s.res.fill(best);
        return;
    }
    s.ext.clear();
    s.ext.extend((0..n + 2 * r).map(|k| s.lane[(k + n - r) % n]));
    let mut full = vec![0.0; s.ext.len()];
    sliding_clipped(&s.ext, r, which, &mut full, &mut s.dq);
    s.res.copy_from_slice(&full[r..r + n]);
}

/// Separable box extreme over a 4-D row-major tensor.
fn box_extreme(
    values: &[f64],
    shape: [usize; 4],
    radii: [usize; 4],
    wraps: [bool; 4],
    which: Extreme,
) -> Vec<f64> {
    let mut cur = values.to_vec();
    let mut next = vec![0.0; values.len()];
    for axis in (0..4).rev() {
        let n = shape[axis];
        if radii[axis] == 0 || n <= 1 {
            continue;
        }
        let stride: usize = shape[axis + 1..].iter().product();
        let block = n * stride;
        let input = &cur;
        next.par_chunks_mut(block)
            .zip(input.par_chunks(block))
            .for_each_init(
                || LaneScratch {
                    lane: Vec::with_capacity(n),
                    ext: Vec::new(),
                    res: Vec::with_capacity(n),
                    dq: VecDeque::with_capacity(2 * radii[axis] + 2),
                },
                |s, (out, inp)| {
                    for inner in 0..stride {
                        s.lane.clear();
                        s.lane.extend((0..n).map(|t| inp[inner + t * stride]));
                        sliding_lane(s, radii[axis], wraps[axis], which);
                        for (t, v) in s.res.iter().enumerate() {
                            out[inner + t * stride] = *v;
                        }
                    }
                },
            );
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Min, max and range of INR over every beam-pair neighborhood.
pub fn pair_neighborhood_stats(grid: &InrGrid, spec: NeighborhoodSpec) -> PairNeighborhoodStats {
    let (tra, tre) = spec.radii(grid.tx_grid());
    let (rra, rre) = spec.radii(grid.rx_grid());
    let radii = [tra, tre, rra, rre];
    let wraps = [
        grid.tx_grid().azimuth_wraps(),
        false,
        grid.rx_grid().azimuth_wraps(),
        false,
    ];
    let shape = grid.shape();
    let inr_min_db = box_extreme(grid.values(), shape, radii, wraps, Extreme::Min);
    let inr_max_db = box_extreme(grid.values(), shape, radii, wraps, Extreme::Max);
    let inr_rng_db = inr_max_db
        .iter()
        .zip(&inr_min_db)
        .map(|(hi, lo)| hi - lo)
        .collect();
    PairNeighborhoodStats {
        spec,
        n_tx: grid.n_tx(),
        n_rx: grid.n_rx(),
        inr_min_db,
        inr_max_db,
        inr_rng_db,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSummary {
    pub max_db: f64,
    pub median_db: f64,
    pub min_db: f64,
}

/// Max, median and min INR over all counterpart beams, for each beam on `side`.
pub fn per_beam_summary(grid: &InrGrid, side: Side) -> Vec<BeamSummary> {
    let beams = match side {
        Side::Tx => grid.n_tx(),
        Side::Rx => grid.n_rx(),
    };
    (0..beams)
        .into_par_iter()
        .map(|b| {
            let mut v = grid.beam_values(side, b);
            let max_db = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min_db = v.iter().copied().fold(f64::INFINITY, f64::min);
            let median_db = median_in_place(&mut v).expect("non-empty grid");
            BeamSummary {
                max_db,
                median_db,
                min_db,
            }
        })
        .collect()
}

fn fraction_at_most(values: &[f64], n_tx: usize, n_rx: usize, side: Side, threshold: f64) -> Vec<f64> {
    match side {
        Side::Tx => values
            .par_chunks(n_rx)
            .map(|row| row.iter().filter(|v| **v <= threshold).count() as f64 / n_rx as f64)
            .collect(),
        Side::Rx => {
            let mut counts = vec![0usize; n_rx];
            for row in values.chunks(n_rx) {
                for (c, v) in counts.iter_mut().zip(row) {
                    if *v <= threshold {
                        *c += 1;
                    }
                }
            }
            counts.into_iter().map(|c| c as f64 / n_tx as f64).collect()
        }
    }
}

/// Per-beam fraction of counterpart beams with INR `<= threshold`.
pub fn threshold_fraction(grid: &InrGrid, side: Side, threshold_db: f64) -> Vec<f64> {
    fraction_at_most(grid.values(), grid.n_tx(), grid.n_rx(), side, threshold_db)
}

/// Per-beam fraction of counterpart beams whose pair neighborhood offers INR `<= threshold`.
pub fn neighborhood_threshold_fraction(
    grid: &InrGrid,
    side: Side,
    spec: NeighborhoodSpec,
    threshold_db: f64,
) -> Vec<f64> {
    pair_neighborhood_stats(grid, spec).threshold_fraction(side, threshold_db)
}
