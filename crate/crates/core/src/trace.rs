//! Fourier coefficients of `Tr H^n(k)` and the exact flat-spectrum test.
//!
//! The fiber matrix is written as a matrix of Laurent polynomials in the
//! torus variables `e^{−ik_j}` (the loop-augmented form: weight `q_v` on the
//! diagonal, −1 on real edges). Raising it to the `n`-th power and taking the
//! trace gives the coefficients `ĥ_{n,γ}` of
//!
//! ```text
//! Tr H^n(k) = Σ_γ ĥ_{n,γ} e^{−i⟨γ,k⟩},
//! ```
//!
//! the same numbers that the sum of `ω(c) e^{−iα(c)}` over length-`n` cycles of
//! index `γ` produces (see [`crate::cycles`]).
//!
//! The spectrum is flat (every band function constant) exactly when
//! `ĥ_{n,γ} = 0` for all `1 ≤ n ≤ ν` and all `γ ≠ 0`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bands::KGrid;
use crate::error::{Error, Result};
use crate::fiber::{build_fiber, trace_powers};
use crate::format::fmt_csv;
use crate::graph::FundamentalGraph;
use crate::laurent::{Index, LaurentMatrix, LaurentPoly};

pub const DEFAULT_COEFF_TOL: f64 = 1e-9;
pub const DEFAULT_N_CAP: usize = 12;
/// Upper bound on `ν² · (2 n τ_∞ + 1)^d` stored coefficients.
pub const DEFAULT_COEFF_BUDGET: f64 = 1e7;

/// Laurent-matrix form of the fiber matrix.
///
/// Entry `(u, v)` holds `Σ ω(e) e^{−iα(e)}` at monomial `τ(e)` over oriented
/// edges `e = (u, v)` of the loop-augmented graph.
pub fn build_laurent_matrix(g: &FundamentalGraph) -> LaurentMatrix {
    let nu = g.num_vertices();
    let d = g.dimension();
    let mut m = LaurentMatrix::zeros(nu);
    let mut scale = vec![0.0f64; nu * nu];
    for v in 0..nu {
        let q = g.diagonal_weight(v);
        m.entry_mut(v, v)
            .add_term(vec![0; d], Complex64::new(q, 0.0));
        scale[v * nu + v] = q.abs();
    }
    for e in g.edges() {
        let z = -Complex64::from_polar(1.0, -e.alpha);
        let neg: Index = e.tau.iter().map(|t| -t).collect();
        if e.from == e.to {
            m.entry_mut(e.from, e.from).add_term(e.tau.clone(), z);
            m.entry_mut(e.from, e.from).add_term(neg, z.conj());
        } else if e.from < e.to {
            m.entry_mut(e.from, e.to).add_term(e.tau.clone(), z);
        } else {
            m.entry_mut(e.to, e.from).add_term(neg, z.conj());
        }
        let (a, b) = (e.from.min(e.to), e.from.max(e.to));
        scale[a * nu + b] = scale[a * nu + b].max(1.0);
    }
    for u in 0..nu {
        for v in u..nu {
            m.entry_mut(u, v).prune(scale[u * nu + v]);
        }
        for v in 0..u {
            *m.entry_mut(u, v) = m.entry(v, u).conj_reflect();
        }
    }
    m
}

/// The coefficients `ĥ_{n,γ}` for `1 ≤ n ≤ n_max`; absent keys are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedTraceSeries {
    dimension: usize,
    /// Largest Euclidean norm of an edge index.
    index_bound: f64,
    by_power: Vec<LaurentPoly>,
}

impl IndexedTraceSeries {
    pub fn n_max(&self) -> usize {
        self.by_power.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn index_bound(&self) -> f64 {
        self.index_bound
    }

    /// `Tr H^n` as a Laurent polynomial.
    pub fn power(&self, n: usize) -> &LaurentPoly {
        &self.by_power[n - 1]
    }

    pub fn coefficient(&self, n: usize, gamma: &[i64]) -> Complex64 {
        if n == 0 || n > self.n_max() {
            return Complex64::new(0.0, 0.0);
        }
        self.power(n).coefficient(gamma)
    }

    /// Stored (nonzero) coefficients ordered by `n`, then `γ`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Index, Complex64)> {
        self.by_power
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.terms().map(move |(g, c)| (i + 1, g, c)))
    }

    /// All `γ` with `‖γ‖ ≤ n τ_+`, lexicographically ordered.
    pub fn support_ball(&self, n: usize) -> Vec<Index> {
        let radius = n as f64 * self.index_bound;
        let r = (radius + 1e-9).floor() as i64;
        let mut out = Vec::new();
        let mut cur = vec![-r; self.dimension];
        loop {
            let norm_sq: f64 = cur.iter().map(|&x| (x * x) as f64).sum();
            if norm_sq.sqrt() <= radius + 1e-9 {
                out.push(cur.clone());
            }
            // odometer increment, last axis fastest
            let mut axis = self.dimension;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < r {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = -r;
            }
        }
    }

    /// CSV rows `n, γ_1..γ_d, Re, Im` for every `γ` in the support ball of
    /// each `n` (zeros included), sorted by `n` then `γ`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("n".to_string())
            .chain((1..=self.dimension).map(|i| format!("gamma{i}")))
            .chain(["re".to_string(), "im".to_string()])
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for n in 1..=self.n_max() {
            let mut keys: Vec<Index> = self.support_ball(n);
            keys.extend(self.power(n).terms().map(|(g, _)| g.clone()));
            keys.sort();
            keys.dedup();
            for g in keys {
                let c = self.coefficient(n, &g);
                let row: Vec<String> = std::iter::once(n.to_string())
                    .chain(g.iter().map(|x| x.to_string()))
                    .chain([fmt_csv(c.re), fmt_csv(c.im)])
                    .collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    pub n_cap: usize,
    pub coefficient_budget: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            n_cap: DEFAULT_N_CAP,
            coefficient_budget: DEFAULT_COEFF_BUDGET,
        }
    }
}

pub fn trace_fourier(g: &FundamentalGraph, n_max: usize) -> Result<IndexedTraceSeries> {
    trace_fourier_with(g, n_max, &TraceOptions::default())
}

/// Coefficients of `Tr H^n` for `n ≤ n_max` by Laurent-matrix powers.
pub fn trace_fourier_with(
    g: &FundamentalGraph,
    n_max: usize,
    opts: &TraceOptions,
) -> Result<IndexedTraceSeries> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if n_max > opts.n_cap {
        return Err(Error::BudgetExceeded(format!(
            "n_max = {n_max} exceeds the cap {}",
            opts.n_cap
        )));
    }
    let nu = g.num_vertices() as f64;
    let tau_inf = g
        .edges()
        .iter()
        .flat_map(|e| e.tau.iter().map(|t| t.unsigned_abs()))
        .max()
        .unwrap_or(0) as f64;
    let per_entry = (2.0 * n_max as f64 * tau_inf + 1.0).powi(g.dimension() as i32);
    let predicted = nu * nu * per_entry;
    if predicted > opts.coefficient_budget {
        return Err(Error::BudgetExceeded(format!(
            "up to {predicted:e} Laurent coefficients for n_max = {n_max} exceeds {:e}",
            opts.coefficient_budget
        )));
    }

    let m = build_laurent_matrix(g);
    let mut by_power = Vec::with_capacity(n_max);
    let mut p = m.clone();
    for n in 1..=n_max {
        if n > 1 {
            p = p.mul(&m);
        }
        by_power.push(p.trace());
    }
    Ok(IndexedTraceSeries {
        dimension: g.dimension(),
        index_bound: g.max_index_norm(),
        by_power,
    })
}

/// A nonzero coefficient with `γ ≠ 0`: proof that some band is not flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub n: usize,
    pub gamma: Index,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Flat,
    AcNonempty(Certificate),
}

impl Verdict {
    pub fn is_flat(&self) -> bool {
        matches!(self, Verdict::Flat)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Flat => "FLAT",
            Verdict::AcNonempty(_) => "AC_NONEMPTY",
        }
    }
}

/// Smallest `(n, γ)` with `γ ≠ 0` and `|ĥ_{n,γ}| > tol`, ordered by `n` then
/// lexicographic `γ`, among `n ≤ n_upto`.
pub(crate) fn first_nonzero(
    series: &IndexedTraceSeries,
    n_upto: usize,
    tol: f64,
) -> Option<Certificate> {
    (1..=n_upto).find_map(|n| {
        series
            .power(n)
            .terms()
            .find(|(g, c)| g.iter().any(|&x| x != 0) && c.norm() > tol)
            .map(|(g, c)| Certificate {
                n,
                gamma: g.clone(),
                value: c,
            })
    })
}

/// Flat iff every `ĥ_{n,γ}` with `1 ≤ n ≤ ν`, `γ ≠ 0` is at most `tol` in
/// modulus; otherwise the first offending coefficient is the certificate.
pub fn flat_spectrum_verdict(series: &IndexedTraceSeries, nu: usize, tol: f64) -> Result<Verdict> {
    if series.n_max() < nu {
        return Err(Error::SeriesTruncated {
            available: series.n_max(),
            required: nu,
        });
    }
    Ok(match first_nonzero(series, nu, tol) {
        Some(cert) => Verdict::AcNonempty(cert),
        None => Verdict::Flat,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsevalRow {
    pub n: usize,
    /// Grid average of `(Tr H^n(k))²`.
    pub grid_mean_square: f64,
    /// `Σ_γ |ĥ_{n,γ}|²`.
    pub coefficient_energy: f64,
    /// `|ĥ_{n,0}|²`.
    pub zero_mode_energy: f64,
}

impl ParsevalRow {
    pub fn residual(&self) -> f64 {
        (self.grid_mean_square - self.coefficient_energy).abs()
    }

    /// How far the flat-case identity (mean square = zero-mode energy) is off.
    pub fn flat_identity_gap(&self) -> f64 {
        (self.grid_mean_square - self.zero_mode_energy).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsevalReport {
    pub rows: Vec<ParsevalRow>,
    /// The grid integrates every `(Tr H^n)²` exactly.
    pub grid_exact: bool,
    pub warnings: Vec<String>,
}

/// Grid resolution from which the uniform average of `(Tr H^n)²` is exact
/// for all `n ≤ n_max`.
pub fn exact_grid_resolution(g: &FundamentalGraph, n_max: usize) -> usize {
    (2.0 * n_max as f64 * g.max_index_norm()).ceil() as usize + 1
}

/// Traces `Tr H^n(k)` for `n ≤ n_max` at every grid point, in grid order.
fn grid_traces(g: &FundamentalGraph, grid: &KGrid, n_max: usize) -> Result<Vec<Vec<f64>>> {
    let results: Vec<Result<Vec<f64>>> = (0..grid.len())
        .into_par_iter()
        .map(|i| trace_powers(&build_fiber(g, &grid.point(i))?, n_max))
        .collect();
    results.into_iter().collect()
}

/// Compares the grid average of `(Tr H^n)²` with the Parseval sum of the
/// coefficients for every `n` in the series.
pub fn parseval_check(
    g: &FundamentalGraph,
    series: &IndexedTraceSeries,
    grid: &KGrid,
) -> Result<ParsevalReport> {
    let n_max = series.n_max();
    let needed = exact_grid_resolution(g, n_max);
    let mut warnings = Vec::new();
    let grid_exact = grid.resolution >= needed;
    if !grid_exact {
        warnings.push(format!(
            "grid resolution {} is below {needed}; the quadrature is not exact",
            grid.resolution
        ));
    }
    let traces = grid_traces(g, grid, n_max)?;
    let count = traces.len() as f64;
    let rows = (1..=n_max)
        .map(|n| {
            let grid_mean_square = traces.iter().map(|t| t[n - 1] * t[n - 1]).sum::<f64>() / count;
            let poly = series.power(n);
            ParsevalRow {
                n,
                grid_mean_square,
                coefficient_energy: poly.terms().map(|(_, c)| c.norm_sqr()).sum(),
                zero_mode_energy: poly.coefficient(&vec![0; series.dimension]).norm_sqr(),
            }
        })
        .collect();
    Ok(ParsevalReport {
        rows,
        grid_exact,
        warnings,
    })
}

/// Largest relative deviation, per `n`, between the Fourier series summed at
/// each grid point and `Tr H^n(k)` computed from the fiber matrix. The
/// deviation is scaled by `max(1, Σ_γ |ĥ_{n,γ}|)`, a bound on `|Tr H^n|`.
pub fn fourier_cross_check(
    g: &FundamentalGraph,
    series: &IndexedTraceSeries,
    grid: &KGrid,
) -> Result<Vec<f64>> {
    let n_max = series.n_max();
    let traces = grid_traces(g, grid, n_max)?;
    Ok((1..=n_max)
        .map(|n| {
            let poly = series.power(n);
            let scale = poly.terms().map(|(_, c)| c.norm()).sum::<f64>().max(1.0);
            traces
                .iter()
                .enumerate()
                .map(|(i, t)| (poly.evaluate(&grid.point(i)) - t[n - 1]).norm() / scale)
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Characteristic polynomial coefficients from power sums (Newton):
/// `ξ_n = −(T_n + Σ_{j<n} T_{n−j} ξ_j) / n`, giving
/// `λ^ν + ξ_1 λ^{ν−1} + … + ξ_ν`.
pub fn char_poly_from_traces(traces: &[f64]) -> Vec<f64> {
    let mut xi: Vec<f64> = Vec::with_capacity(traces.len());
    for n in 1..=traces.len() {
        let mut s = traces[n - 1];
        for j in 1..n {
            s += traces[n - j - 1] * xi[j - 1];
        }
        xi.push(-s / n as f64);
    }
    xi
}

/// Map from `(n, γ)` to coefficient, for callers that want a flat view.
pub fn coefficient_map(series: &IndexedTraceSeries) -> BTreeMap<(usize, Index), Complex64> {
    series.iter().map(|(n, g, c)| ((n, g.clone()), c)).collect()
}
