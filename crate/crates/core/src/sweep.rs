//! Coupling-constant sweep over the family `H_{tα}`.
//!
//! Pick a coefficient class `(n, γ)`, `γ ≠ 0`, that is nonzero without the
//! magnetic field. Along the family the coefficient is the exponential
//! polynomial `f(t) = Σ_c ω(c) e^{−i t α(c)}` over the cycles of that class.
//! A flat spectrum at `t` forces `f(t) = 0`, so only the finitely many zeros
//! of `f` in a bounded interval are candidates; each one is then checked with
//! the full coefficient test.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cycles::{enumerate_cycles_capped, Cycle, ModifiedGraph, DEFAULT_CYCLE_CAP};
use crate::error::{Error, Result};
use crate::format::{fmt_csv, fmt_sig};
use crate::graph::FundamentalGraph;
use crate::laurent::Index;
use crate::trace::{
    first_nonzero, flat_spectrum_verdict, trace_fourier_with, IndexedTraceSeries, TraceOptions,
    Verdict, DEFAULT_COEFF_TOL,
};

/// Frequencies closer than this are merged into one term.
pub const FREQUENCY_MERGE_GAP: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 4096;
pub const MIN_SAMPLES: usize = 16;

const CANDIDATE_REL: f64 = 1e-6;
const ZERO_REL: f64 = 1e-9;
const REFINE_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub weight: Complex64,
    pub frequency: f64,
}

/// `f(t) = Σ_j w_j e^{−i t φ_j}` with pairwise distinct frequencies, sorted
/// ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentialPolynomial {
    terms: Vec<Term>,
}

impl ExponentialPolynomial {
    /// Sorts the terms and merges equal frequencies. Merged weights that
    /// cancel are dropped.
    pub fn new(mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        let largest = terms.iter().map(|t| t.weight.norm()).fold(0.0, f64::max);
        let mut merged: Vec<Term> = Vec::new();
        let mut anchor = f64::NEG_INFINITY;
        for t in terms {
            match merged.last_mut() {
                Some(last) if t.frequency - anchor <= FREQUENCY_MERGE_GAP => {
                    last.weight += t.weight;
                }
                _ => {
                    anchor = t.frequency;
                    merged.push(t);
                }
            }
        }
        merged.retain(|t| t.weight.norm() > 1e-15 * largest);
        ExponentialPolynomial { terms: merged }
    }

    /// One term per cycle: weight `ω(c)`, frequency the unreduced flux.
    pub fn from_cycles(cycles: &[Cycle]) -> Self {
        Self::new(
            cycles
                .iter()
                .map(|c| Term {
                    weight: Complex64::new(c.weight, 0.0),
                    frequency: c.flux,
                })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.weight * Complex64::from_polar(1.0, -t * term.frequency))
            .sum()
    }

    /// `Σ |w_j|`, an upper bound on `|f|`.
    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.norm()).sum()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// A single frequency class: `|f|` is constant.
    pub fn has_constant_modulus(&self) -> bool {
        self.terms.len() == 1
    }

    /// `t ↦ f(s t)`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| Term {
                    weight: t.weight,
                    frequency: t.frequency * s,
                })
                .collect(),
        )
    }
}

/// Smallest `(n, γ)`, `γ ≠ 0`, with `|ĥ_{n,γ}| > tol` in a series computed
/// without magnetic field.
pub fn select_witness(series0: &IndexedTraceSeries, nu: usize, tol: f64) -> Result<(usize, Index)> {
    if series0.n_max() < nu {
        return Err(Error::SeriesTruncated {
            available: series0.n_max(),
            required: nu,
        });
    }
    first_nonzero(series0, nu, tol)
        .map(|c| (c.n, c.gamma))
        .ok_or(Error::NoWitness(nu))
}

pub fn build_f(g: &FundamentalGraph, n: usize, gamma: &[i64]) -> Result<ExponentialPolynomial> {
    build_f_capped(g, n, gamma, DEFAULT_CYCLE_CAP)
}

/// Collects the cycles of class `(n, γ)` into `f`.
pub fn build_f_capped(
    g: &FundamentalGraph,
    n: usize,
    gamma: &[i64],
    cap: usize,
) -> Result<ExponentialPolynomial> {
    if gamma.iter().all(|&x| x == 0) {
        return Err(Error::InvalidArgument(
            "the witness index must be nonzero".into(),
        ));
    }
    let cycles = enumerate_cycles_capped(&ModifiedGraph::new(g), n, gamma, cap)?;
    Ok(ExponentialPolynomial::from_cycles(&cycles))
}

/// Zeros of `f` in `[t_min, t_max]`.
///
/// `|f|²` is sampled at `samples` equally spaced points (both ends included).
/// Each local minimum below `1e-6 (Σ|w|)²` is refined by golden-section search
/// down to a bracket of `1e-12`, and kept if `|f| ≤ 1e-9 Σ|w|` there.
pub fn find_zeros(
    f: &ExponentialPolynomial,
    t_min: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>> {
    if !t_min.is_finite() || !t_max.is_finite() || t_max <= t_min {
        return Err(Error::InvalidArgument(format!(
            "empty interval [{t_min}, {t_max}]"
        )));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if f.is_identically_zero() {
        return Err(Error::IdenticallyZero);
    }
    if f.has_constant_modulus() {
        return Ok(Vec::new());
    }
    let scale = f.weight_sum();
    let sq = |t: f64| f.evaluate(t).norm_sqr();
    let step = (t_max - t_min) / (samples - 1) as f64;
    let at = |i: usize| {
        if i == samples - 1 {
            t_max
        } else {
            t_min + i as f64 * step
        }
    };
    let values: Vec<f64> = (0..samples).map(|i| sq(at(i))).collect();

    let threshold = CANDIDATE_REL * scale * scale;
    let brackets: Vec<(f64, f64)> = (0..samples)
        .filter(|&i| {
            let left = i == 0 || values[i] <= values[i - 1];
            let right = i == samples - 1 || values[i] <= values[i + 1];
            left && right && values[i] < threshold
        })
        .map(|i| (at(i.saturating_sub(1)), at((i + 1).min(samples - 1))))
        .collect();

    let refined: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b)| golden_section(&sq, a, b))
        .collect();

    let mut zeros: Vec<f64> = Vec::new();
    for t in refined {
        if f.evaluate(t).norm() > ZERO_REL * scale {
            continue;
        }
        // neighbouring minima on a plateau refine to the same point
        match zeros.last_mut() {
            Some(last) if (t - *last).abs() <= step => {
                if f.evaluate(t).norm() < f.evaluate(*last).norm() {
                    *last = t;
                }
            }
            _ => zeros.push(t),
        }
    }
    Ok(zeros)
}

fn golden_section(func: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (func(c), func(d));
    while b - a > REFINE_WIDTH {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = func(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = func(d);
        }
    }
    // the ends are candidates too, for zeros on the interval boundary
    [a, b, 0.5 * (a + b)]
        .into_iter()
        .min_by(|x, y| func(*x).total_cmp(&func(*y)))
        .expect("three candidates")
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Tolerance for both witness selection and the flat verdicts.
    pub coeff_tol: f64,
    pub cycle_cap: usize,
    pub trace: TraceOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            t_min: 0.0,
            t_max: 1.0,
            samples: DEFAULT_SAMPLES,
            coeff_tol: DEFAULT_COEFF_TOL,
            cycle_cap: DEFAULT_CYCLE_CAP,
            trace: TraceOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateZero {
    pub t: f64,
    /// `|f(t)|` at the refined point.
    pub residual: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub n: usize,
    pub gamma: Index,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub f: ExponentialPolynomial,
    pub zeros: Vec<CandidateZero>,
    /// `f` has a single frequency class, so `|f|` never changes.
    pub constant_flag: bool,
}

pub fn sweep(g: &FundamentalGraph, t_min: f64, t_max: f64, samples: usize) -> Result<SweepReport> {
    sweep_with(
        g,
        &SweepOptions {
            t_min,
            t_max,
            samples,
            ..SweepOptions::default()
        },
    )
}

pub fn sweep_with(g: &FundamentalGraph, opts: &SweepOptions) -> Result<SweepReport> {
    let nu = g.num_vertices();
    let series0 = trace_fourier_with(&g.without_phases(), nu, &opts.trace)?;
    let (n, gamma) = select_witness(&series0, nu, opts.coeff_tol)?;
    let f = build_f_capped(g, n, &gamma, opts.cycle_cap)?;
    let times = find_zeros(&f, opts.t_min, opts.t_max, opts.samples)?;
    let zeros = times
        .par_iter()
        .map(|&t| {
            let series = trace_fourier_with(&g.with_scaled_phases(t), nu, &opts.trace)?;
            Ok(CandidateZero {
                t,
                residual: f.evaluate(t).norm(),
                verdict: flat_spectrum_verdict(&series, nu, opts.coeff_tol)?,
            })
        })
        .collect::<Vec<Result<CandidateZero>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        n,
        gamma,
        t_min: opts.t_min,
        t_max: opts.t_max,
        samples: opts.samples,
        constant_flag: f.has_constant_modulus(),
        f,
        zeros,
    })
}

fn fmt_index(gamma: &[i64]) -> String {
    let parts: Vec<String> = gamma.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        fmt_sig(z.re, 6)
    } else if z.im > 0.0 {
        format!("{}+{}i", fmt_sig(z.re, 6), fmt_sig(z.im, 6))
    } else {
        format!("{}-{}i", fmt_sig(z.re, 6), fmt_sig(-z.im, 6))
    }
}

impl SweepReport {
    pub fn flat_times(&self) -> Vec<f64> {
        self.zeros
            .iter()
            .filter(|z| z.verdict.is_flat())
            .map(|z| z.t)
            .collect()
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let interval = format!("[{}, {}]", fmt_sig(self.t_min, 6), fmt_sig(self.t_max, 6));
        writeln!(
            out,
            "witness: n = {}, gamma = {}, f(0) = {}",
            self.n,
            fmt_index(&self.gamma),
            fmt_complex(self.f.evaluate(0.0))
        )?;
        writeln!(out, "f(t) has {} exponential term(s)", self.f.terms().len())?;
        writeln!(out, "interval: {interval}, samples: {}", self.samples)?;
        if self.constant_flag {
            writeln!(out, "|f(t)| is constant; no candidate couplings")?;
        }
        writeln!(out, "candidate zeros: {}", self.zeros.len())?;
        for z in &self.zeros {
            writeln!(
                out,
                "  t = {}  |f| = {}  verdict: {}",
                fmt_sig(z.t, 10),
                fmt_sig(z.residual, 3),
                z.verdict.label()
            )?;
        }
        let flat = self.flat_times();
        if flat.is_empty() {
            writeln!(out, "a.c. spectrum nonempty for all t in {interval}")?;
        } else {
            let list: Vec<String> = flat.iter().map(|&t| fmt_sig(t, 10)).collect();
            writeln!(
                out,
                "a.c. spectrum nonempty for all t in {interval} except t = {}",
                list.join(", ")
            )?;
        }
        writeln!(
            out,
            "note: only {interval} is searched; candidates outside the interval (including periodic recurrences) are not reported"
        )?;
        if self.t_min < 0.0 || self.t_max > 1.0 {
            writeln!(
                out,
                "note: the finiteness guarantee is usually stated for t in [0, 1]; it holds on any bounded interval"
            )?;
        }
        Ok(())
    }

    /// CSV rows `t_zero, verdict, n, γ_1..γ_d, abs_f`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = ["t_zero", "verdict", "n"]
            .into_iter()
            .map(String::from)
            .chain((1..=self.gamma.len()).map(|i| format!("gamma{i}")))
            .chain(std::iter::once("abs_f".to_string()))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for z in &self.zeros {
            let row: Vec<String> = [
                fmt_csv(z.t),
                z.verdict.label().to_string(),
                self.n.to_string(),
            ]
            .into_iter()
            .chain(self.gamma.iter().map(|x| x.to_string()))
            .chain(std::iter::once(fmt_csv(z.residual)))
            .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}
