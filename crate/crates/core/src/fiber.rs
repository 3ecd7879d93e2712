//! Fiber matrices `H(k) = q − A(k)` and their spectra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::FundamentalGraph;

/// Entrywise tolerance on `|H − H*|` accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-13;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// The ν×ν fiber matrix at quasimomentum `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberOperator {
    pub k: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

#[derive(Debug, Clone)]
pub struct FiberSpectrum {
    /// Non-decreasing.
    pub eigenvalues: Vec<f64>,
    /// Column `j` belongs to `eigenvalues[j]`.
    pub eigenvectors: Option<DMatrix<Complex64>>,
}

/// Phase factor `e^{−i(α + ⟨τ,k⟩)}` of one oriented edge.
pub(crate) fn edge_phase(alpha: f64, tau: &[i64], k: &[f64]) -> Complex64 {
    let arg = alpha + tau.iter().zip(k).map(|(&t, &x)| t as f64 * x).sum::<f64>();
    Complex64::from_polar(1.0, -arg)
}

/// Assembles the fiber matrix.
///
/// Entry `(u, v)` is `q_u δ_uv − Σ e^{−i(α(e) + ⟨τ(e), k⟩)}` over oriented
/// edges `e = (u, v)`, inverses included. Only the upper triangle is summed;
/// the lower triangle is its conjugate and the diagonal is real.
pub fn build_fiber(g: &FundamentalGraph, k: &[f64]) -> Result<FiberOperator> {
    if k.len() != g.dimension() {
        return Err(Error::DimensionMismatch {
            location: "quasimomentum".into(),
            expected: g.dimension(),
            found: k.len(),
        });
    }
    let nu = g.num_vertices();
    let mut upper = DMatrix::<Complex64>::zeros(nu, nu);
    let mut diag = vec![0.0; nu];
    for e in g.edges() {
        let z = edge_phase(e.alpha, &e.tau, k);
        if e.from == e.to {
            // both orientations: z + conj(z)
            diag[e.from] += 2.0 * z.re;
        } else if e.from < e.to {
            upper[(e.from, e.to)] += z;
        } else {
            upper[(e.to, e.from)] += z.conj();
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(nu, nu);
    for u in 0..nu {
        m[(u, u)] = Complex64::new(g.diagonal_weight(u) - diag[u], 0.0);
        for v in (u + 1)..nu {
            m[(u, v)] = -upper[(u, v)];
            m[(v, u)] = -upper[(u, v)].conj();
        }
    }
    Ok(FiberOperator {
        k: k.to_vec(),
        matrix: m,
    })
}

impl FiberOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest entrywise `|H − H*|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Eigenvalues in non-decreasing order, optionally with eigenvectors.
pub fn fiber_spectrum(h: &FiberOperator, want_vectors: bool) -> Result<FiberSpectrum> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = h.dim();
    if n == 1 {
        return Ok(FiberSpectrum {
            eigenvalues: vec![h.matrix[(0, 0)].re],
            eigenvectors: want_vectors
                .then(|| DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0))),
        });
    }
    let eig = SymmetricEigen::try_new(h.matrix.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::EigenNonConvergence { k: h.k.clone() })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = want_vectors.then(|| {
        let cols: Vec<DVector<Complex64>> = order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect();
        DMatrix::from_columns(&cols)
    });
    Ok(FiberSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// `Tr H^n` by repeated multiplication. The imaginary part must stay below
/// `1e-10 · ‖H‖_F^n`; anything larger means the matrix is not Hermitian.
pub fn trace_power(h: &FiberOperator, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("trace power needs n >= 1".into()));
    }
    let mut p = h.matrix.clone();
    for _ in 1..n {
        p = &p * &h.matrix;
    }
    let tr = p.trace();
    let tol = 1e-10 * h.frobenius_norm().powi(n as i32).max(1.0);
    if tr.im.abs() > tol {
        return Err(Error::ComplexTrace { imag: tr.im, tol });
    }
    Ok(tr.re)
}

/// `[Tr H, Tr H², …, Tr H^n_max]`, sharing the matrix powers.
pub fn trace_powers(h: &FiberOperator, n_max: usize) -> Result<Vec<f64>> {
    let norm = h.frobenius_norm();
    let mut out = Vec::with_capacity(n_max);
    let mut p = h.matrix.clone();
    for n in 1..=n_max {
        if n > 1 {
            p = &p * &h.matrix;
        }
        let tr = p.trace();
        let tol = 1e-10 * norm.powi(n as i32).max(1.0);
        if tr.im.abs() > tol {
            return Err(Error::ComplexTrace { imag: tr.im, tol });
        }
        out.push(tr.re);
    }
    Ok(out)
}
