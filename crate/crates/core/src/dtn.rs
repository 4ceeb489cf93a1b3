//! Dirichlet-to-Neumann matrices of decorations.
//!
//! For `λ ∉ σ(H_G)` and boundary data `φ` on `B`, let `u` solve
//! `-u'' = λu` on the edges of `G`, Kirchhoff at interior vertices and
//! `u|_B = φ`. Then `Λ(λ)φ` collects, at each boundary vertex, the sum of
//! the outgoing derivatives of `u` along the edges of `G`. The interior
//! system is the secular matrix of `G` with Dirichlet conditions on `B`,
//! so it becomes singular exactly at σ(H_G), where Λ has its poles.

use nalgebra::{DMatrix, SVD};
use serde::Serialize;

use crate::decoration::Decoration;
use crate::eigensolve::{find_roots, scan_spectrum, ScanOptions, SpectrumResult};
use crate::error::{Error, Result};
use crate::graph::{EndRole, MetricGraph};
use crate::secular::{assemble, end_coefficients, RowLabel, k_lipschitz};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DtnOptions {
    /// Minimum distance from σ(H_G) at which Λ is evaluated.
    pub pole_guard: f64,
    /// Interior solves with reciprocal condition below this are refused.
    pub min_rcond: f64,
    /// Relative singular-value threshold used by [`solvable_at`].
    pub rank_tol: f64,
    pub scan: ScanOptions,
}

impl Default for DtnOptions {
    fn default() -> Self {
        DtnOptions { pole_guard: 1e-6, min_rcond: 1e-13, rank_tol: 1e-6, scan: ScanOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DtnMatrix {
    pub lambda: f64,
    pub entries: DMatrix<f64>,
    /// Reciprocal condition number of the (row-scaled) interior system.
    pub condition_estimate: f64,
}

impl DtnMatrix {
    pub fn sigma_min(&self) -> f64 {
        SVD::new(self.entries.clone(), false, false).singular_values.min()
    }

    pub fn sigma_max(&self) -> f64 {
        SVD::new(self.entries.clone(), false, false).singular_values.max()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.entries - self.entries.transpose()).norm()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

impl Serialize for DtnMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            lambda: f64,
            entries: Vec<Vec<f64>>,
            condition_estimate: f64,
        }
        Repr { lambda: self.lambda, entries: self.rows(), condition_estimate: self.condition_estimate }.serialize(s)
    }
}

/// σ(H_G) ∩ (0, lambda_max].
pub fn dirichlet_spectrum_g(dec: &Decoration, lambda_max: f64, opts: &ScanOptions) -> Result<SpectrumResult> {
    let lo = (lambda_max * 1e-9).min(1e-6);
    scan_spectrum(&dec.dirichlet_graph(), lo, lambda_max * (1.0 + 1e-9), opts)
}

/// Interior system `A x = R φ` of the boundary value problem.
struct InteriorSystem {
    a: DMatrix<f64>,
    rhs: DMatrix<f64>,
}

fn interior_system(dec: &Decoration, graph: &MetricGraph, k: f64) -> InteriorSystem {
    let asm = assemble(graph, k, None);
    let n = asm.matrix.nrows();
    let d = dec.boundary_size();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, d);
    for i in 0..n {
        let s = asm.scales[i];
        for j in 0..n {
            a[(i, j)] = asm.matrix[(i, j)].re / s;
        }
        if let RowLabel::Value { vertex, .. } = asm.rows[i] {
            if let Some(slot) = dec.slot_of(vertex) {
                rhs[(i, slot)] = 1.0 / s;
            }
        }
    }
    InteriorSystem { a, rhs }
}

/// Applies the Neumann operator to edge coefficients: per boundary slot,
/// the sum of outgoing derivatives along the decoration's edges.
fn neumann(dec: &Decoration, graph: &MetricGraph, k: f64, coeffs: &DMatrix<f64>) -> DMatrix<f64> {
    let d = dec.boundary_size();
    let mut out = DMatrix::<f64>::zeros(d, coeffs.ncols());
    for (i, e) in graph.edges().iter().enumerate() {
        for (role, v) in [(EndRole::Start, e.start), (EndRole::End, e.end)] {
            if let Some(slot) = dec.slot_of(v) {
                let (_, der) = end_coefficients(e.length, k, role);
                for c in 0..coeffs.ncols() {
                    out[(slot, c)] += k * (der[0] * coeffs[(2 * i, c)] + der[1] * coeffs[(2 * i + 1, c)]);
                }
            }
        }
    }
    out
}

fn evaluate(dec: &Decoration, graph: &MetricGraph, lambda: f64, min_rcond: f64) -> Result<DtnMatrix> {
    let k = lambda.sqrt();
    let sys = interior_system(dec, graph, k);
    let sv = SVD::new(sys.a.clone(), false, false).singular_values;
    let rcond = sv.min() / sv.max();
    if !(rcond >= min_rcond) {
        return Err(Error::SingularSolve { rcond });
    }
    let x = sys.a.lu().solve(&sys.rhs).ok_or(Error::SingularSolve { rcond: 0.0 })?;
    Ok(DtnMatrix { lambda, entries: neumann(dec, graph, k, &x), condition_estimate: rcond })
}

/// Λ(λ) for a decoration, with σ(H_G) known on a λ interval so that pole
/// proximity can be checked without rescanning.
#[derive(Clone, Debug)]
pub struct DtnMap {
    dec: Decoration,
    dirichlet: MetricGraph,
    poles: Vec<f64>,
    covered: (f64, f64),
    opts: DtnOptions,
}

impl DtnMap {
    /// Locates σ(H_G) on `[lo, hi]` (widened by the pole guard).
    pub fn new(dec: &Decoration, lo: f64, hi: f64, opts: &DtnOptions) -> Result<Self> {
        let dirichlet = dec.dirichlet_graph();
        let lo = (lo - 2.0 * opts.pole_guard).max(f64::MIN_POSITIVE.sqrt());
        let hi = hi + 2.0 * opts.pole_guard;
        let (klo, khi) = (lo.sqrt(), hi.sqrt());
        // at least 16 samples so that close poles are resolved separately
        let step = (std::f64::consts::PI / (4.0 * dirichlet.total_length() * opts.scan.grid_factor))
            .min((khi - klo) / 16.0);
        let poles = find_roots(klo, khi, step, &opts.scan, Some(k_lipschitz(&dirichlet)), |k| {
            let (m, _) = assemble(&dirichlet, k, None).scaled();
            Some(SVD::new(m, false, false).singular_values)
        })?
        .into_iter()
        .map(|r| r.x * r.x)
        .collect();
        Ok(DtnMap { dec: dec.clone(), dirichlet, poles, covered: (lo, hi), opts: opts.clone() })
    }

    /// Elements of σ(H_G) found in the covered interval.
    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn nearest_pole(&self, lambda: f64) -> Option<f64> {
        self.poles.iter().copied().min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()))
    }

    pub fn eval(&self, lambda: f64) -> Result<DtnMatrix> {
        self.eval_with_guard(lambda, self.opts.pole_guard)
    }

    pub fn eval_with_guard(&self, lambda: f64, guard: f64) -> Result<DtnMatrix> {
        if !(lambda > 0.0) {
            return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
        }
        if lambda < self.covered.0 || lambda > self.covered.1 {
            return Err(Error::Precondition(format!(
                "lambda {lambda} outside the scanned interval [{}, {}]",
                self.covered.0, self.covered.1
            )));
        }
        if let Some(pole) = self.nearest_pole(lambda) {
            if (pole - lambda).abs() < guard {
                return Err(Error::PoleProximity { lambda, pole, guard });
            }
        }
        evaluate(&self.dec, &self.dirichlet, lambda, self.opts.min_rcond)
    }
}

pub fn dtn_matrix(dec: &Decoration, lambda: f64, opts: &DtnOptions) -> Result<DtnMatrix> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
    }
    let w = (100.0 * opts.pole_guard).max(1e-3 * lambda);
    DtnMap::new(dec, lambda - w, lambda + w, opts)?.eval(lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolvabilityReport {
    pub lambda0: f64,
    /// Nullity of the interior system at λ₀ (0 when λ₀ ∉ σ(H_G)).
    pub interior_nullity: usize,
    /// Orthonormal basis of the boundary data for which the problem is
    /// solvable at λ₀.
    pub basis: Vec<Vec<f64>>,
}

impl SolvabilityReport {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Subspace of boundary data `φ` for which the boundary value problem has a
/// solution at `lambda0`. Each left null vector `y` of the interior matrix
/// gives one constraint `yᵀ R φ = 0`.
pub fn solvable_at(dec: &Decoration, lambda0: f64, opts: &DtnOptions) -> Result<SolvabilityReport> {
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::Precondition(format!("lambda0 must be positive, got {lambda0}")));
    }
    let graph = dec.dirichlet_graph();
    let sys = interior_system(dec, &graph, lambda0.sqrt());
    let n = sys.a.nrows();
    let d = dec.boundary_size();
    let svd = SVD::new(sys.a.clone(), true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max().max(1.0);
    let left: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= opts.rank_tol * smax).collect();
    let basis = if left.is_empty() {
        (0..d).map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    } else {
        // constraints, padded with zero rows so that V is d × d
        let rows = left.len().max(d);
        let mut c = DMatrix::<f64>::zeros(rows, d);
        for (r, &i) in left.iter().enumerate() {
            let y = u.column(i);
            for j in 0..d {
                c[(r, j)] = y.dot(&sys.rhs.column(j));
            }
        }
        let cs = SVD::new(c, false, true);
        let v_t = cs.v_t.expect("requested V^T");
        let cmax = cs.singular_values.max().max(1.0);
        (0..d)
            .filter(|&j| cs.singular_values[j] <= opts.rank_tol * cmax)
            .map(|j| v_t.row(j).iter().copied().collect())
            .collect()
    };
    Ok(SolvabilityReport { lambda0, interior_nullity: left.len(), basis })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoleSample {
    pub delta: f64,
    /// min over λ₀ ± δ of σ_min(Λ).
    pub sigma_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleScalingReport {
    pub lambda0: f64,
    /// Strictly decreasing in `delta`.
    pub samples: Vec<PoleSample>,
    /// Deltas that could not be evaluated, with the reason.
    pub skipped: Vec<(f64, String)>,
    /// Least-squares slope of log σ_min against log δ.
    pub fitted_slope: f64,
    /// exp(mean(log σ_min + log δ)): the constant in σ_min ≥ C/δ.
    pub fitted_c: f64,
}

/// Measures how σ_min(Λ(λ₀ ± δ)) scales as δ → 0.
pub fn pole_scaling(dec: &Decoration, lambda0: f64, deltas: &[f64], opts: &DtnOptions) -> Result<PoleScalingReport> {
    let mut deltas: Vec<f64> = deltas.iter().copied().filter(|d| *d > 0.0 && d.is_finite()).collect();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas.dedup();
    if deltas.len() < 2 {
        return Err(Error::Precondition("need at least two positive deltas".into()));
    }
    if !(lambda0 > 0.0) {
        return Err(Error::Precondition(format!("lambda0 must be positive, got {lambda0}")));
    }
    let max_delta = deltas[0];
    let min_delta = *deltas.last().unwrap();
    let map = DtnMap::new(dec, lambda0 - 10.5 * max_delta, lambda0 + 10.5 * max_delta, opts)?;
    if let Some(other) = map
        .poles()
        .iter()
        .find(|&&p| (p - lambda0).abs() > 0.5 * min_delta && (p - lambda0).abs() <= 10.0 * max_delta)
    {
        return Err(Error::Precondition(format!(
            "lambda0 is not isolated: another Dirichlet eigenvalue at {other} lies within 10 × max delta"
        )));
    }
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for &delta in &deltas {
        let guard = opts.pole_guard.min(0.5 * delta);
        let mut best: Option<f64> = None;
        let mut failure = None;
        for lambda in [lambda0 - delta, lambda0 + delta] {
            if lambda <= 0.0 {
                continue;
            }
            match map.eval_with_guard(lambda, guard) {
                Ok(m) => {
                    let s = m.sigma_min();
                    best = Some(best.map_or(s, |b: f64| b.min(s)));
                }
                Err(e) => failure = Some(e.to_string()),
            }
        }
        match (best, failure) {
            (Some(sigma_min), None) => samples.push(PoleSample { delta, sigma_min }),
            (_, Some(reason)) => skipped.push((delta, reason)),
            (None, None) => skipped.push((delta, "no admissible side".into())),
        }
    }
    let (fitted_slope, fitted_c) = fit_power_law(&samples);
    Ok(PoleScalingReport { lambda0, samples, skipped, fitted_slope, fitted_c })
}

fn fit_power_law(samples: &[PoleSample]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.delta.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.sigma_min.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let c = (xs.iter().zip(&ys).map(|(x, y)| x + y).sum::<f64>() / n).exp();
    (sxy / sxx, c)
}

/// Logarithmically spaced deltas `10^-from, ..., 10^-to`, decreasing.
pub fn decade_deltas(from: u32, to: u32, per_decade: usize) -> Vec<f64> {
    let per = per_decade.max(1);
    let steps = (to.saturating_sub(from) as usize) * per;
    (0..=steps).map(|i| 10f64.powf(-(from as f64) - i as f64 / per as f64)).collect()
}
