//! Band sweeps over quasimomentum and resonant gap certification.
//!
//! A periodic graph's spectrum is the union over θ ∈ [0, 2π)^p of the Bloch
//! spectra. [`band_sweep`] samples that union on a uniform θ grid;
//! [`certify_gap_near`] decorates a periodic base with an odd-cycle
//! resonator and measures how far the sampled bands stay from
//! `λ₀ = (nπ/l₀)²`. The distances are grid measurements, not proofs: the
//! report carries the largest band variation observed between adjacent θ
//! samples so the reader can judge the resolution.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::decoration::{check_spider_conditions, decorate_periodic, AttachmentMap, Decoration};
use crate::eigensolve::{bloch_spectrum, ScanOptions, SpectrumResult};
use crate::error::{Error, Result};
use crate::graph::{dirichlet_edge_spectrum, MetricGraph, COINCIDENCE_TOL};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandSweep {
    pub window: (f64, f64),
    pub n_theta: usize,
    pub theta_grid: Vec<Vec<f64>>,
    /// One Bloch spectrum per grid point, in grid order.
    pub samples: Vec<SpectrumResult>,
}

impl BandSweep {
    /// All sampled eigenvalues (with multiplicity), sorted.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.samples.iter().flat_map(SpectrumResult::expanded).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `(theta, lambda)` rows, one per eigenvalue copy.
    pub fn rows(&self) -> Vec<(Vec<f64>, f64)> {
        self.theta_grid
            .iter()
            .zip(&self.samples)
            .flat_map(|(t, s)| s.expanded().into_iter().map(move |l| (t.clone(), l)))
            .collect()
    }

    /// Largest band variation between θ-grid neighbours (wrapping around),
    /// over pairs where both sample sets are non-empty.
    pub fn resolution_caveat(&self) -> f64 {
        let n = self.n_theta;
        let p = self.theta_grid.first().map_or(0, Vec::len);
        let mut worst: f64 = 0.0;
        for idx in 0..self.samples.len() {
            let coords = unflatten(idx, n, p);
            for axis in 0..p {
                let mut next = coords.clone();
                next[axis] = (next[axis] + 1) % n;
                let a = self.samples[idx].lambdas();
                let b = self.samples[flatten(&next, n)].lambdas();
                if !a.is_empty() && !b.is_empty() {
                    worst = worst.max(band_variation(&a, &b));
                }
            }
        }
        worst
    }
}

fn unflatten(mut idx: usize, n: usize, p: usize) -> Vec<usize> {
    let mut c = vec![0; p];
    for axis in (0..p).rev() {
        c[axis] = idx % n;
        idx /= n;
    }
    c
}

fn flatten(c: &[usize], n: usize) -> usize {
    c.iter().fold(0, |acc, &x| acc * n + x)
}

/// Band-function variation between two sorted sample sets: index-wise
/// when the counts agree, otherwise the distance from each value of the
/// smaller set to the larger one (a band leaving the window is not counted
/// as variation).
fn band_variation(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == b.len() {
        return a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    }
    let (small, large) = if a.len() < b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .map(|&u| large.iter().map(|&v| (u - v).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Uniform grid of `n` points per axis on `[0, 2π)^p`, last axis fastest.
pub fn theta_grid(p: usize, n: usize) -> Vec<Vec<f64>> {
    let total = n.pow(p as u32);
    (0..total)
        .map(|idx| unflatten(idx, n, p).into_iter().map(|i| 2.0 * PI * i as f64 / n as f64).collect())
        .collect()
}

pub fn band_sweep(graph: &MetricGraph, lo: f64, hi: f64, n_theta: usize, opts: &ScanOptions) -> Result<BandSweep> {
    let p = graph.period_rank();
    if !(1..=2).contains(&p) {
        return Err(Error::Precondition(format!("band sweeps support period rank 1 or 2, got {p}")));
    }
    if n_theta == 0 {
        return Err(Error::Precondition("n_theta must be positive".into()));
    }
    let grid = theta_grid(p, n_theta);
    let samples = grid
        .par_iter()
        .map(|theta| bloch_spectrum(graph, theta, lo, hi, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandSweep { window: (lo, hi), n_theta, theta_grid: grid, samples })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    /// The sweep's [`BandSweep::resolution_caveat`].
    pub caveat: f64,
}

impl Gap {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// Maximal sample-free open subintervals of the window wider than `min_width`.
pub fn find_gaps(sweep: &BandSweep, min_width: f64) -> Vec<Gap> {
    let caveat = sweep.resolution_caveat();
    let mut edges = vec![sweep.window.0];
    edges.extend(sweep.values());
    edges.push(sweep.window.1);
    edges
        .windows(2)
        .filter(|w| w[1] - w[0] > min_width)
        .map(|w| Gap { lo: w[0], hi: w[1], caveat })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapOptions {
    pub n_theta: usize,
    /// Samples this close to λ₀ are attributed to the resonance itself.
    pub flat_tol: f64,
    pub scan: ScanOptions,
    /// Locally minimize the distance from λ₀ over θ around the closest
    /// grid samples.
    pub refine: bool,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions { n_theta: 17, flat_tol: 1e-6, scan: ScanOptions::default(), refine: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub lambda0: f64,
    pub l0: f64,
    pub n: u32,
    /// dist(λ₀, Σ_D) of the base graph.
    pub r: f64,
    pub window: (f64, f64),
    pub n_theta: usize,
    pub flat_band_at_lambda0: bool,
    /// Largest number of eigenvalue copies within `flat_tol` of λ₀ at a
    /// single θ.
    pub flat_band_multiplicity: usize,
    /// Fraction of θ samples carrying such a value.
    pub flat_band_fraction: f64,
    pub eps_below: f64,
    pub eps_above: f64,
    pub nearest_below: Option<f64>,
    pub nearest_above: Option<f64>,
    pub grid_resolution_caveat: f64,
}

/// Checks the resonator conditions, decorates `gamma0`, sweeps the window
/// `λ₀ ± r/2` and reports how far the bands stay from λ₀.
pub fn certify_gap_near(
    gamma0: &MetricGraph,
    dec: &Decoration,
    attach: Option<&AttachmentMap>,
    l0: f64,
    n: u32,
    opts: &GapOptions,
) -> Result<GapReport> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::ConditionViolated(format!(
            "n = {n}: the resonance only forces a gap for odd n; for even n (or even cycles) it can fail"
        )));
    }
    if !(l0 > 0.0) {
        return Err(Error::Precondition(format!("l0 must be positive, got {l0}")));
    }
    if !check_spider_conditions(dec, l0) {
        return Err(Error::ConditionViolated(format!(
            "decoration has no odd cycle of length-{l0} edges reaching every boundary vertex"
        )));
    }
    let lambda0 = (n as f64 * PI / l0).powi(2);
    let r = dirichlet_edge_spectrum(gamma0, 0.0).distance_to(lambda0);
    if r <= COINCIDENCE_TOL * lambda0 {
        return Err(Error::ConditionViolated(format!("lambda0 = {lambda0} lies in the base graph's Σ_D")));
    }
    let decorated = decorate_periodic(gamma0, dec, attach)?;
    let window = (lambda0 - r / 2.0, lambda0 + r / 2.0);
    let sweep = band_sweep(&decorated, window.0, window.1, opts.n_theta, &opts.scan)?;

    let mut flat_band_multiplicity = 0;
    let mut flat_hits = 0;
    let mut nearest_below: Option<(f64, usize)> = None;
    let mut nearest_above: Option<(f64, usize)> = None;
    for (i, s) in sweep.samples.iter().enumerate() {
        let mut here = 0;
        for e in &s.entries {
            let d = e.lambda - lambda0;
            if d.abs() <= opts.flat_tol {
                here += e.multiplicity;
            } else if d < 0.0 {
                if nearest_below.map_or(true, |(b, _)| e.lambda > b) {
                    nearest_below = Some((e.lambda, i));
                }
            } else if nearest_above.map_or(true, |(a, _)| e.lambda < a) {
                nearest_above = Some((e.lambda, i));
            }
        }
        flat_band_multiplicity = flat_band_multiplicity.max(here);
        flat_hits += (here > 0) as usize;
    }

    if opts.refine {
        let step = 2.0 * PI / opts.n_theta as f64;
        if let Some((b, i)) = nearest_below {
            let v = refine_towards(&decorated, &sweep.theta_grid[i], step, lambda0, b, opts.flat_tol, &opts.scan);
            nearest_below = Some((v, i));
        }
        if let Some((a, i)) = nearest_above {
            let v = refine_towards(&decorated, &sweep.theta_grid[i], step, lambda0, a, opts.flat_tol, &opts.scan);
            nearest_above = Some((v, i));
        }
    }

    Ok(GapReport {
        lambda0,
        l0,
        n,
        r,
        window,
        n_theta: opts.n_theta,
        flat_band_at_lambda0: flat_hits > 0,
        flat_band_multiplicity,
        flat_band_fraction: flat_hits as f64 / sweep.samples.len() as f64,
        eps_below: nearest_below.map_or(lambda0 - window.0, |(b, _)| lambda0 - b),
        eps_above: nearest_above.map_or(window.1 - lambda0, |(a, _)| a - lambda0),
        nearest_below: nearest_below.map(|(b, _)| b),
        nearest_above: nearest_above.map(|(a, _)| a),
        grid_resolution_caveat: sweep.resolution_caveat(),
    })
}

/// The sample of `sweep` closest to `target` but farther than `flat_tol`
/// from it, as `(lambda, grid index)`.
pub fn closest_sample(sweep: &BandSweep, target: f64, flat_tol: f64) -> Option<(f64, usize)> {
    sweep
        .samples
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.entries.iter().map(move |e| (e.lambda, i)))
        .filter(|(l, _)| (l - target).abs() > flat_tol)
        .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
}

/// [`closest_sample`] followed by a local search over θ around its grid
/// point; returns the band value found closest to `target`.
pub fn refine_closest(
    graph: &MetricGraph,
    sweep: &BandSweep,
    target: f64,
    flat_tol: f64,
    scan: &ScanOptions,
) -> Option<f64> {
    let (lambda, i) = closest_sample(sweep, target, flat_tol)?;
    let step = 2.0 * PI / sweep.n_theta as f64;
    Some(refine_towards(graph, &sweep.theta_grid[i], step, target, lambda, flat_tol, scan))
}

/// Coordinate-wise golden-section search over θ (within one grid step of
/// the start) for the band value closest to λ₀ on the side of `current`.
fn refine_towards(
    graph: &MetricGraph,
    start: &[f64],
    step: f64,
    lambda0: f64,
    current: f64,
    flat_tol: f64,
    scan: &ScanOptions,
) -> f64 {
    let side = if current < lambda0 { -1.0 } else { 1.0 };
    let (lo, hi) = if side < 0.0 {
        (current - 0.5 * (lambda0 - current), lambda0 - flat_tol)
    } else {
        (lambda0 + flat_tol, current + 0.5 * (current - lambda0))
    };
    let distance = |theta: &[f64]| -> f64 {
        bloch_spectrum(graph, theta, lo, hi, scan)
            .ok()
            .and_then(|s| {
                s.entries
                    .iter()
                    .map(|e| (e.lambda - lambda0).abs())
                    .filter(|d| *d > flat_tol)
                    .min_by(f64::total_cmp)
            })
            .unwrap_or(f64::INFINITY)
    };
    let mut theta = start.to_vec();
    let mut best = (current - lambda0).abs();
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    for _ in 0..2 {
        for axis in 0..theta.len() {
            let mut probe = theta.clone();
            let mut f = |x: f64| {
                probe[axis] = x;
                distance(&probe)
            };
            let (mut a, mut b) = (theta[axis] - step, theta[axis] + step);
            let mut c = b - INV_PHI * (b - a);
            let mut d = a + INV_PHI * (b - a);
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..30 {
                if fc <= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - INV_PHI * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + INV_PHI * (b - a);
                    fd = f(d);
                }
            }
            let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
            if fx < best {
                best = fx;
                theta[axis] = x;
            }
        }
    }
    lambda0 + side * best
}
