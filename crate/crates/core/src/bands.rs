//! Band functions sampled on a uniform quasimomentum grid.
//!
//! Band extremes come straight from the grid samples, so an endpoint of a
//! non-flat band can be off by O(1/N²). Flatness detected here is only
//! numerical evidence; [`crate::trace`] gives the exact verdict.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fiber::{build_fiber, fiber_spectrum};
use crate::format::fmt_csv;
use crate::graph::FundamentalGraph;

pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_FLAT_TOL: f64 = 1e-10;
pub const DEFAULT_MATCH_TOL: f64 = 1e-8;
/// Upper bound on `N^d · ν³`.
pub const DEFAULT_WORK_BUDGET: f64 = 1e12;

/// Uniform grid `{2π m / N : m ∈ {0..N−1}^d}` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KGrid {
    pub resolution: usize,
    pub dimension: usize,
}

impl KGrid {
    pub fn new(resolution: usize, dimension: usize) -> Result<Self> {
        if resolution == 0 || dimension == 0 {
            return Err(Error::InvalidArgument(
                "grid resolution and dimension must be positive".into(),
            ));
        }
        Ok(KGrid {
            resolution,
            dimension,
        })
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer coordinates of the `i`-th point; the first axis varies slowest.
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut m = vec![0; self.dimension];
        for slot in m.iter_mut().rev() {
            *slot = i % self.resolution;
            i /= self.resolution;
        }
        m
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let step = 2.0 * PI / self.resolution as f64;
        self.multi_index(i)
            .into_iter()
            .map(|m| m as f64 * step)
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }
}

#[derive(Debug, Clone)]
pub struct BandStructure {
    pub grid: KGrid,
    /// One sorted eigenvalue list per grid point, in grid order.
    pub samples: Vec<Vec<f64>>,
    pub bands: Vec<Band>,
    pub flat_flags: Vec<bool>,
    pub flat_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct BandOptions {
    pub flat_tol: f64,
    pub match_tol: f64,
    pub work_budget: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions {
            flat_tol: DEFAULT_FLAT_TOL,
            match_tol: DEFAULT_MATCH_TOL,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }
}

pub fn compute_bands(g: &FundamentalGraph, grid: &KGrid, flat_tol: f64) -> Result<BandStructure> {
    compute_bands_with(
        g,
        grid,
        &BandOptions {
            flat_tol,
            ..BandOptions::default()
        },
    )
}

pub fn compute_bands_with(
    g: &FundamentalGraph,
    grid: &KGrid,
    opts: &BandOptions,
) -> Result<BandStructure> {
    if opts.flat_tol.is_nan()
        || opts.flat_tol <= 0.0
        || opts.match_tol.is_nan()
        || opts.match_tol <= 0.0
    {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if grid.dimension != g.dimension() {
        return Err(Error::DimensionMismatch {
            location: "k-grid".into(),
            expected: g.dimension(),
            found: grid.dimension,
        });
    }
    let nu = g.num_vertices();
    let work = grid.len() as f64 * (nu as f64).powi(3);
    if work > opts.work_budget {
        return Err(Error::BudgetExceeded(format!(
            "{} grid points x {nu}^3 = {work:e} exceeds {:e}",
            grid.len(),
            opts.work_budget
        )));
    }

    // Collected in grid order so the first failure reported is deterministic.
    let results: Vec<Result<Vec<f64>>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let h = build_fiber(g, &grid.point(i))?;
            Ok(fiber_spectrum(&h, false)?.eigenvalues)
        })
        .collect();
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;

    let bands: Vec<Band> = (0..nu)
        .map(|j| {
            samples.iter().fold(
                Band {
                    lower: f64::INFINITY,
                    upper: f64::NEG_INFINITY,
                },
                |b, s| Band {
                    lower: b.lower.min(s[j]),
                    upper: b.upper.max(s[j]),
                },
            )
        })
        .collect();
    let flat_flags = bands.iter().map(|b| b.width() <= opts.flat_tol).collect();
    let mut bs = BandStructure {
        grid: *grid,
        samples,
        bands,
        flat_flags,
        flat_eigenvalues: Vec::new(),
    };
    bs.flat_eigenvalues = detect_flat_eigenvalues(&bs, opts.match_tol);
    Ok(bs)
}

/// Values that occur as an eigenvalue (within `match_tol`) at every grid
/// point. Candidates are the distinct eigenvalues at `k = 0`. Passing this
/// test is necessary but not sufficient for an eigenvalue of infinite
/// multiplicity.
pub fn detect_flat_eigenvalues(bs: &BandStructure, match_tol: f64) -> Vec<f64> {
    let Some(first) = bs.samples.first() else {
        return Vec::new();
    };
    let mut candidates: Vec<f64> = Vec::new();
    for &x in first {
        if candidates.last().is_none_or(|&c| x - c > match_tol) {
            candidates.push(x);
        }
    }
    candidates
        .into_iter()
        .filter(|&c| {
            bs.samples
                .iter()
                .all(|s| s.iter().any(|&x| (x - c).abs() <= match_tol))
        })
        .collect()
}

/// Width of the lowest band.
pub fn first_band_width(bs: &BandStructure) -> f64 {
    bs.bands.first().map_or(0.0, Band::width)
}

impl BandStructure {
    pub fn is_all_flat(&self) -> bool {
        self.flat_flags.iter().all(|&f| f)
    }

    pub fn max_width(&self) -> f64 {
        self.bands.iter().map(Band::width).fold(0.0, f64::max)
    }

    /// One row per grid point: `k_1..k_d, λ_1..λ_ν`, with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let d = self.grid.dimension;
        let nu = self.bands.len();
        let header: Vec<String> = (1..=d)
            .map(|i| format!("k{i}"))
            .chain((1..=nu).map(|j| format!("lambda{j}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (i, s) in self.samples.iter().enumerate() {
            let row: Vec<String> = self
                .grid
                .point(i)
                .into_iter()
                .chain(s.iter().copied())
                .map(fmt_csv)
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}
