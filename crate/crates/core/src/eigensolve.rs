//! Eigenvalue enumeration by scanning the smallest singular value of a
//! parameter-dependent matrix.
//!
//! The scan evaluates σ_min on a uniform grid, refines every local minimum
//! by golden-section search, and accepts a refined point as a root when
//! σ_min falls below `tol_root`. The multiplicity is the number of singular
//! values below `tol_rank · max(σ_max, 1)` at the root.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::{dirichlet_edge_spectrum, MetricGraph};
use crate::secular::{build_bloch_secular, build_secular, k_lipschitz};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanOptions {
    /// Acceptance threshold for σ_min at a refined root.
    pub tol_root: f64,
    /// Relative threshold for counting near-zero singular values.
    pub tol_rank: f64,
    /// Golden-section stopping width in the scan parameter.
    pub x_tol: f64,
    /// Grid density multiplier; 1 gives the default step `π / (4 L)` in k.
    pub grid_factor: f64,
    /// Local minima of σ_min above this are not refined.
    pub trigger: f64,
    pub max_points: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            tol_root: 1e-8,
            tol_rank: 1e-7,
            x_tol: 1e-11,
            grid_factor: 1.0,
            trigger: 1.0,
            max_points: 10_000_000,
        }
    }
}

impl ScanOptions {
    pub fn with_grid_factor(mut self, factor: f64) -> Self {
        self.grid_factor = factor;
        self
    }

    pub fn check(&self) -> Result<()> {
        let positive = [self.tol_root, self.tol_rank, self.x_tol, self.grid_factor, self.trigger];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Precondition("scan tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub lambda: f64,
    pub multiplicity: usize,
    /// σ_min of the normalized secular matrix at the refined root.
    pub residual: f64,
    /// Set when the root lies within 1e-9 of an edge Dirichlet eigenvalue.
    pub near_dirichlet: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub entries: Vec<Eigenvalue>,
    /// Half-open window `[lo, hi)`.
    pub window: (f64, f64),
    pub grid_step: f64,
    pub options: ScanOptions,
}

impl SpectrumResult {
    /// Eigenvalues repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat(e.lambda).take(e.multiplicity))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Root {
    pub x: f64,
    pub multiplicity: usize,
    pub residual: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
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
    if fc <= fd { c } else { d }
}

pub(crate) fn grid(lo: f64, hi: f64, step: f64, max_points: usize) -> Result<Vec<f64>> {
    let intervals = ((hi - lo) / step).ceil();
    if !intervals.is_finite() || intervals + 1.0 > max_points as f64 {
        return Err(Error::GridTooLarge { points: if intervals.is_finite() { intervals as usize + 1 } else { usize::MAX } });
    }
    let n = (intervals as usize).max(2);
    Ok((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect())
}

/// Finds the roots of σ_min over `[lo, hi]`. `svals` returns the singular
/// values at a parameter value, or `None` where the matrix cannot be
/// formed (treated as +∞).
///
/// With a Lipschitz constant `lip` for σ_min, every grid interval is
/// subdivided until `σ(a) + σ(b) > lip · (b − a)` proves it root-free or
/// it is narrower than `step / 64`; the surviving runs are then refined.
/// No root is missed this way. Without one, only local minima of the grid
/// samples are refined.
pub(crate) fn find_roots<F>(lo: f64, hi: f64, step: f64, opts: &ScanOptions, lip: Option<f64>, svals: F) -> Result<Vec<Root>>
where
    F: Fn(f64) -> Option<DVector<f64>> + Sync,
{
    opts.check()?;
    let xs = grid(lo, hi, step, opts.max_points)?;
    let smin = |x: f64| svals(x).map(|s| s.min()).unwrap_or(f64::INFINITY);
    let samples: Vec<f64> = xs.par_iter().map(|&x| smin(x)).collect();
    let n = xs.len();
    let brackets: Vec<(f64, f64)> = match lip {
        Some(lip) => {
            let min_width = (xs[1] - xs[0]) / 64.0;
            let pieces: Vec<(f64, f64)> = (0..n - 1)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let mut out = Vec::new();
                    exclude(&smin, lip, min_width, (xs[i], samples[i]), (xs[i + 1], samples[i + 1]), &mut out);
                    out
                })
                .collect();
            // adjacent survivors form one run
            let mut runs: Vec<(f64, f64)> = Vec::new();
            for (a, b) in pieces {
                match runs.last_mut() {
                    Some(last) if a <= last.1 => last.1 = b,
                    _ => runs.push((a, b)),
                }
            }
            runs
        }
        None => (0..n)
            .filter(|&i| {
                let s = samples[i];
                s.is_finite()
                    && s < opts.trigger
                    && (i == 0 || s <= samples[i - 1])
                    && (i + 1 == n || s <= samples[i + 1])
            })
            .map(|i| (xs[i.saturating_sub(1)], xs[(i + 1).min(n - 1)]))
            .collect(),
    };
    let accept = |x: f64| -> Option<Root> {
        let s = svals(x)?;
        let smax = s.max().max(1.0);
        let residual = s.min();
        (residual < opts.tol_root).then(|| Root {
            x,
            multiplicity: s.iter().filter(|&&v| v < opts.tol_rank * smax).count().max(1),
            residual,
        })
    };
    let mut roots: Vec<Root> = brackets
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            let first = accept(golden_section(&smin, a, b, opts.x_tol));
            // two roots inside one bracket show up as a single dip; divide
            // out the found one and look again on either side
            let mut found: Vec<Root> = first.into_iter().collect();
            if let Some(r) = first {
                let deflated = |x: f64| smin(x) / (x - r.x).abs();
                let gap = 1e3 * opts.x_tol;
                for (u, v) in [(a, r.x - gap), (r.x + gap, b)] {
                    if v - u > opts.x_tol {
                        let x = golden_section(&deflated, u, v, opts.x_tol);
                        // a genuine second root is separated from the first by a hump
                        if smin(0.5 * (x + r.x)) > 100.0 * opts.tol_root {
                            found.extend(accept(x));
                        }
                    }
                }
            }
            found
        })
        .collect();
    roots.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut merged: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last_mut() {
            Some(last) if (r.x - last.x).abs() <= 1e-9 * r.x.abs().max(1.0) => {
                if r.residual < last.residual {
                    last.x = r.x;
                    last.residual = r.residual;
                }
                last.multiplicity = last.multiplicity.max(r.multiplicity);
            }
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

/// Recursive root exclusion on `[a, b]` for a function with Lipschitz
/// constant `lip`; pushes the pieces narrower than `min_width` that might
/// still contain a zero.
fn exclude<F: Fn(f64) -> f64>(f: &F, lip: f64, min_width: f64, a: (f64, f64), b: (f64, f64), out: &mut Vec<(f64, f64)>) {
    let width = b.0 - a.0;
    if a.1 + b.1 > lip * width * (1.0 + 1e-9) {
        return;
    }
    if width <= min_width {
        out.push((a.0, b.0));
        return;
    }
    let m = 0.5 * (a.0 + b.0);
    let mid = (m, f(m));
    exclude(f, lip, min_width, a, mid, out);
    exclude(f, lip, min_width, mid, b, out);
}

/// Roots this close (relatively) to a window end are attributed to that end.
const WINDOW_EDGE_TOL: f64 = 1e-10;

fn check_window(lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::EmptyWindow { lo, hi });
    }
    Ok(())
}

fn scan_in_k<F>(graph: &MetricGraph, lo: f64, hi: f64, opts: &ScanOptions, svals: F) -> Result<SpectrumResult>
where
    F: Fn(f64) -> Option<DVector<f64>> + Sync,
{
    check_window(lo, hi)?;
    graph.ensure_solvable()?;
    let step = PI / (4.0 * graph.total_length() * opts.grid_factor);
    let roots = find_roots(lo.sqrt(), hi.sqrt(), step, opts, Some(k_lipschitz(graph)), svals)?;
    let sigma_d = dirichlet_edge_spectrum(graph, hi + 1.0);
    let entries = roots
        .into_iter()
        .map(|r| (r, r.x * r.x))
        .filter(|&(_, l)| l >= lo * (1.0 - WINDOW_EDGE_TOL) && l < hi * (1.0 - WINDOW_EDGE_TOL))
        .map(|(r, lambda)| Eigenvalue {
            lambda,
            multiplicity: r.multiplicity,
            residual: r.residual,
            near_dirichlet: sigma_d.distance_to(lambda) <= 1e-9 * lambda.max(1.0),
        })
        .collect();
    Ok(SpectrumResult { entries, window: (lo, hi), grid_step: step, options: opts.clone() })
}

/// Eigenvalues of a finite graph in `[lambda_lo, lambda_hi)`.
pub fn scan_spectrum(graph: &MetricGraph, lambda_lo: f64, lambda_hi: f64, opts: &ScanOptions) -> Result<SpectrumResult> {
    graph.ensure_finite()?;
    scan_in_k(graph, lambda_lo, lambda_hi, opts, |k| {
        build_secular(graph, k).ok().map(|m| m.singular_values())
    })
}

/// Bloch eigenvalues of a periodic graph at quasimomentum `theta`.
pub fn bloch_spectrum(
    graph: &MetricGraph,
    theta: &[f64],
    lambda_lo: f64,
    lambda_hi: f64,
    opts: &ScanOptions,
) -> Result<SpectrumResult> {
    if theta.len() != graph.period_rank() {
        return Err(Error::DimensionMismatch { expected: graph.period_rank(), got: theta.len() });
    }
    scan_in_k(graph, lambda_lo, lambda_hi, opts, |k| {
        build_bloch_secular(graph, k, theta).ok().map(|m| m.singular_values())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylReport {
    /// max over the window of |N(λ) − L√λ/π|.
    pub max_deviation: f64,
    pub at_lambda: f64,
    /// |V| + |E|.
    pub bound: f64,
    pub suspicious: bool,
}

/// Compares the counting function of `result` with the Weyl term `L√λ/π`
/// over the result's window. The count starts from the zero modes, so the
/// window should begin below the first positive eigenvalue.
pub fn weyl_check(result: &SpectrumResult, graph: &MetricGraph) -> WeylReport {
    let (lo, hi) = result.window;
    weyl_check_over(result, graph, lo, hi)
}

/// [`weyl_check`] with the deviation only taken over `[lo, hi]`.
pub fn weyl_check_over(result: &SpectrumResult, graph: &MetricGraph, lo: f64, hi: f64) -> WeylReport {
    let l = graph.total_length();
    let weyl = |lambda: f64| l * lambda.sqrt() / PI;
    let mut count = graph.zero_multiplicity() as f64;
    count += result.entries.iter().filter(|e| e.lambda < lo).map(|e| e.multiplicity as f64).sum::<f64>();
    let mut max_deviation = (count - weyl(lo)).abs();
    let mut at_lambda = lo;
    let mut probe = |lambda: f64, n: f64| {
        let d = (n - weyl(lambda)).abs();
        if d > max_deviation {
            max_deviation = d;
            at_lambda = lambda;
        }
    };
    for e in result.entries.iter().filter(|e| e.lambda >= lo && e.lambda <= hi) {
        probe(e.lambda, count);
        count += e.multiplicity as f64;
        probe(e.lambda, count);
    }
    probe(hi, count);
    let bound = (graph.vertex_count() + graph.edge_count()) as f64;
    WeylReport { max_deviation, at_lambda, bound, suspicious: max_deviation > bound }
}
