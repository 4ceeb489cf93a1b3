//! Spectra of metric (quantum) graphs with vertex decorations.
//!
//! Eigenvalues of Kirchhoff Laplacians on finite and periodic metric graphs
//! come from [`scan_spectrum`] and [`bloch_spectrum`]. The decoration side
//! (Dirichlet-to-Neumann matrices, spider resonators) lives in [`dtn`] and
//! [`decoration`]; [`certify_gap_near`] measures the gap an odd-cycle
//! resonator opens around `λ₀ = (nπ/l₀)²`.

pub mod bands;
pub mod cli;
pub mod decoration;
pub mod dtn;
pub mod eigensolve;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod reduction;
pub mod secular;

pub use decoration::{check_spider_conditions, decorate, decorate_periodic, make_spider, AttachmentMap, Decoration};
pub use eigensolve::{bloch_spectrum, scan_spectrum, weyl_check, weyl_check_over, Eigenvalue, ScanOptions, SpectrumResult, WeylReport};
pub use error::{Error, Result};
pub use graph::{
    dirichlet_edge_spectrum, DirichletEdgeSpectrum, EdgeEnd, EndRole, MetricEdge, MetricGraph, ValidationReport,
    Vertex, VertexCondition,
};
pub use secular::{build_bloch_secular, build_secular, solution_from_nullvector, EdgeSolution, SecularMatrix};
pub use oracle::{fem_spectrum, FemDiscretization};
pub use dtn::{decade_deltas, dirichlet_spectrum_g, dtn_matrix, pole_scaling, solvable_at, DtnMap, DtnMatrix, DtnOptions, PoleSample, PoleScalingReport, SolvabilityReport};
pub use reduction::{build_reduced, reduced_spectrum, reduced_spectrum_check, ReducedSecularMatrix, ReductionReport};
pub use bands::{band_sweep, certify_gap_near, closest_sample, find_gaps, refine_closest, theta_grid, BandSweep, Gap, GapOptions, GapReport};
