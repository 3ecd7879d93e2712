//! Magnetic Schrödinger operators on periodic graphs.
//!
//! The operator `H = Δ_α + Q` on a periodic graph is studied through its
//! fundamental graph. The Floquet decomposition turns it into a family of
//! ν×ν Hermitian fiber matrices `H(k)`, `k` on the d-torus, whose sorted
//! eigenvalues trace out the spectral bands.
//!
//! * [`graph`]: fundamental graphs, their file format and validation.
//! * [`fiber`]: the fiber matrix at one quasimomentum and its spectrum.
//! * [`bands`]: band functions on a uniform grid, numeric flatness.
//! * [`trace`]: Fourier coefficients of `Tr H^n(k)` via Laurent-matrix powers,
//!   and the exact test for a spectrum made only of flat bands.
//! * [`cycles`]: cycle enumeration on the loop-augmented graph, an
//!   independent route to the same coefficients.
//! * [`sweep`]: candidate couplings `t` for which `H_{tα}` can be flat.
//! * [`cli`]: the `flatband` command-line tool.

pub mod bands;
pub mod cli;
pub mod cycles;
mod dd;
pub mod error;
pub mod fiber;
pub mod format;
pub mod graph;
pub mod laurent;
pub mod sweep;
pub mod trace;

pub use bands::{compute_bands, detect_flat_eigenvalues, first_band_width, BandStructure, KGrid};
pub use cycles::{enumerate_cycles, Cycle, ModifiedGraph};
pub use error::{Error, Result};
pub use fiber::{build_fiber, fiber_spectrum, trace_power, FiberOperator, FiberSpectrum};
pub use graph::{compute_edge_index, load_graph, FundamentalGraph, OrientedEdge, VertexRecord};
pub use laurent::{LaurentMatrix, LaurentPoly};
pub use sweep::{build_f, find_zeros, select_witness, sweep, ExponentialPolynomial, SweepReport};
pub use trace::{
    build_laurent_matrix, char_poly_from_traces, flat_spectrum_verdict, parseval_check,
    trace_fourier, IndexedTraceSeries, Verdict,
};
