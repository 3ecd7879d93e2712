//! Sparse Laurent polynomials in `d` torus variables and matrices of them.
//!
//! A polynomial is a finite map `γ ∈ Z^d → c_γ` standing for the function
//! `k ↦ Σ c_γ e^{−i⟨γ,k⟩}`. Keys are kept in a `BTreeMap`, so iteration is in
//! lexicographic order of `γ`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dd::Cdd;

/// Coefficients below this fraction of the largest contributing term are
/// dropped after every sum, so exact cancellations become structural zeros.
pub const PRUNE_REL: f64 = 1e-15;

pub type Index = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaurentPoly {
    // extended precision so long cancelling sums stay within an ulp
    terms: BTreeMap<Index, Cdd>,
}

impl LaurentPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(dimension: usize, c: Complex64) -> Self {
        let mut p = Self::new();
        p.add_term(vec![0; dimension], c);
        p
    }

    pub fn add_term(&mut self, gamma: Index, c: Complex64) {
        self.add_exact(gamma, Cdd::from_c64(c));
    }

    fn add_exact(&mut self, gamma: Index, c: Cdd) {
        let slot = self.terms.entry(gamma).or_default();
        *slot = slot.add(c);
    }

    pub fn coefficient(&self, gamma: &[i64]) -> Complex64 {
        self.terms
            .get(gamma)
            .map_or(Complex64::new(0.0, 0.0), |c| c.to_c64())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Index, Complex64)> {
        self.terms.iter().map(|(g, c)| (g, c.to_c64()))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_c64().norm())
            .fold(0.0, f64::max)
    }

    /// Drops every coefficient with `|c| < PRUNE_REL · scale`.
    pub fn prune(&mut self, scale: f64) {
        let cut = PRUNE_REL * scale;
        self.terms.retain(|_, c| c.to_c64().norm() >= cut);
    }

    pub fn evaluate(&self, k: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(g, c)| {
                let dot: f64 = g.iter().zip(k).map(|(&gi, &ki)| gi as f64 * ki).sum();
                c.to_c64() * Complex64::from_polar(1.0, -dot)
            })
            .sum()
    }

    /// The polynomial of the pointwise complex conjugate function:
    /// `γ → conj(c_{−γ})`.
    pub fn conj_reflect(&self) -> Self {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.iter().map(|x| -x).collect(), c.conj()))
                .collect(),
        }
    }

    /// Adds `a · b` into `self`, returning the largest single product
    /// magnitude so the caller can prune against it.
    fn add_product(&mut self, a: &LaurentPoly, b: &LaurentPoly) -> f64 {
        let mut largest = 0.0f64;
        for (ga, ca) in &a.terms {
            for (gb, cb) in &b.terms {
                let c = ca.mul(*cb);
                largest = largest.max(c.to_c64().norm());
                let g: Index = ga.iter().zip(gb).map(|(x, y)| x + y).collect();
                self.add_exact(g, c);
            }
        }
        largest
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::new();
        let scale = out.add_product(self, other);
        out.prune(scale);
        out
    }
}

/// Square matrix with Laurent polynomial entries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMatrix {
    dim: usize,
    entries: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn zeros(dim: usize) -> Self {
        LaurentMatrix {
            dim,
            entries: vec![LaurentPoly::new(); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, u: usize, v: usize) -> &LaurentPoly {
        &self.entries[u * self.dim + v]
    }

    pub fn entry_mut(&mut self, u: usize, v: usize) -> &mut LaurentPoly {
        &mut self.entries[u * self.dim + v]
    }

    /// Total number of stored coefficients.
    pub fn support_size(&self) -> usize {
        self.entries.iter().map(LaurentPoly::len).sum()
    }

    pub fn mul(&self, other: &LaurentMatrix) -> LaurentMatrix {
        assert_eq!(self.dim, other.dim, "Laurent matrix dimensions differ");
        let n = self.dim;
        let mut out = LaurentMatrix::zeros(n);
        for u in 0..n {
            for v in 0..n {
                let mut acc = LaurentPoly::new();
                let mut scale = 0.0f64;
                for w in 0..n {
                    scale = scale.max(acc.add_product(self.entry(u, w), other.entry(w, v)));
                }
                acc.prune(scale);
                *out.entry_mut(u, v) = acc;
            }
        }
        out
    }

    pub fn trace(&self) -> LaurentPoly {
        let mut acc = LaurentPoly::new();
        let mut scale = 0.0f64;
        for v in 0..self.dim {
            for (g, c) in &self.entry(v, v).terms {
                scale = scale.max(c.to_c64().norm());
                acc.add_exact(g.clone(), *c);
            }
        }
        acc.prune(scale);
        acc
    }

    pub fn evaluate(&self, k: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |u, v| self.entry(u, v).evaluate(k))
    }
}
