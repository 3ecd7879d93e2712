//! Closed walks on the loop-augmented fundamental graph.
//!
//! Every vertex `v` gets one extra loop with index 0, phase 0 and weight
//! `q_v = κ_v + Q(v)`; real oriented edges carry weight −1. A cycle of length
//! `n` is a sequence of `n` oriented edges returning to its first vertex.
//! Rotations of the same sequence count as different cycles, matching the sum
//! over vertex tuples in `Tr H^n`.
//!
//! Enumeration is exponential in `n` and is used as an independent check on
//! the Laurent-power route, and to collect the individual fluxes of one
//! coefficient class.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dd::{Cdd, Dd};
use crate::error::{Error, Result};
use crate::graph::FundamentalGraph;

pub const DEFAULT_CYCLE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// The added loop at a vertex.
    AddedLoop,
    /// A stored edge of the base graph, possibly traversed backwards.
    Real { edge: usize, reversed: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedEdge {
    pub from: usize,
    pub to: usize,
    pub tau: Vec<i64>,
    pub alpha: f64,
    pub weight: f64,
    pub kind: EdgeKind,
}

/// Fundamental graph plus one weighted loop per vertex.
#[derive(Debug, Clone)]
pub struct ModifiedGraph {
    dimension: usize,
    outgoing: Vec<Vec<ModifiedEdge>>,
}

impl ModifiedGraph {
    pub fn new(g: &FundamentalGraph) -> Self {
        let d = g.dimension();
        let outgoing = (0..g.num_vertices())
            .map(|v| {
                let mut out = vec![ModifiedEdge {
                    from: v,
                    to: v,
                    tau: vec![0; d],
                    alpha: 0.0,
                    weight: g.diagonal_weight(v),
                    kind: EdgeKind::AddedLoop,
                }];
                out.extend(
                    g.oriented_edges_from(v)
                        .expect("vertex in range")
                        .into_iter()
                        .map(|s| ModifiedEdge {
                            from: v,
                            to: s.to,
                            tau: s.tau,
                            alpha: s.alpha,
                            weight: -1.0,
                            kind: EdgeKind::Real {
                                edge: s.edge,
                                reversed: s.reversed,
                            },
                        }),
                );
                out
            })
            .collect();
        ModifiedGraph {
            dimension: d,
            outgoing,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_vertices(&self) -> usize {
        self.outgoing.len()
    }

    pub fn outgoing(&self, v: usize) -> &[ModifiedEdge] {
        &self.outgoing[v]
    }

    pub fn added_loops(&self) -> impl Iterator<Item = &ModifiedEdge> {
        self.outgoing
            .iter()
            .flat_map(|out| out.iter().filter(|e| e.kind == EdgeKind::AddedLoop))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub edges: Vec<ModifiedEdge>,
    /// Product of edge weights.
    pub weight: f64,
    /// Sum of edge phases, not reduced.
    pub flux: f64,
    pub index: Vec<i64>,
}

impl Cycle {
    pub fn start(&self) -> usize {
        self.edges[0].from
    }

    /// Flux reduced to `(−π, π]`.
    pub fn reduced_flux(&self) -> f64 {
        reduce_phase(self.flux)
    }

    /// `ω(c) e^{−iα(c)}`.
    pub fn contribution(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.flux) * self.weight
    }

    /// The same closed walk traversed backwards.
    pub fn reversed(&self) -> Cycle {
        let edges: Vec<ModifiedEdge> = self
            .edges
            .iter()
            .rev()
            .map(|e| ModifiedEdge {
                from: e.to,
                to: e.from,
                tau: e.tau.iter().map(|t| -t).collect(),
                alpha: -e.alpha,
                weight: e.weight,
                kind: match e.kind {
                    EdgeKind::AddedLoop => EdgeKind::AddedLoop,
                    EdgeKind::Real { edge, reversed } => EdgeKind::Real {
                        edge,
                        reversed: !reversed,
                    },
                },
            })
            .collect();
        Cycle {
            edges,
            weight: self.weight,
            flux: -self.flux,
            index: self.index.iter().map(|t| -t).collect(),
        }
    }
}

/// Representative of `x` modulo 2π in `(−π, π]`.
pub fn reduce_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = x - two_pi * (x / two_pi).round();
    if r <= -PI {
        r += two_pi;
    }
    if r > PI {
        r -= two_pi;
    }
    r
}

/// All cycles of length `n` and index `gamma`, with the default length cap.
pub fn enumerate_cycles(g: &ModifiedGraph, n: usize, gamma: &[i64]) -> Result<Vec<Cycle>> {
    enumerate_cycles_capped(g, n, gamma, DEFAULT_CYCLE_CAP)
}

pub fn enumerate_cycles_capped(
    g: &ModifiedGraph,
    n: usize,
    gamma: &[i64],
    cap: usize,
) -> Result<Vec<Cycle>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cycle length must be positive".into(),
        ));
    }
    if n > cap {
        return Err(Error::BudgetExceeded(format!(
            "cycle length {n} exceeds enumeration cap {cap}"
        )));
    }
    if gamma.len() != g.dimension {
        return Err(Error::DimensionMismatch {
            location: "cycle index".into(),
            expected: g.dimension,
            found: gamma.len(),
        });
    }
    // largest |τ_i| of any edge, for pruning walks that cannot reach gamma
    let reach = g
        .outgoing
        .iter()
        .flatten()
        .flat_map(|e| e.tau.iter().map(|t| t.abs()))
        .max()
        .unwrap_or(0);
    let mut found = Vec::new();
    let mut walk: Vec<&ModifiedEdge> = Vec::with_capacity(n);
    for start in 0..g.num_vertices() {
        let mut state = Search {
            g,
            n,
            gamma,
            reach,
            start,
            found: &mut found,
        };
        state.extend(&mut walk, start, &mut vec![0; g.dimension]);
    }
    Ok(found)
}

struct Search<'a, 'b> {
    g: &'a ModifiedGraph,
    n: usize,
    gamma: &'b [i64],
    reach: i64,
    start: usize,
    found: &'b mut Vec<Cycle>,
}

impl<'a> Search<'a, '_> {
    fn extend(&mut self, walk: &mut Vec<&'a ModifiedEdge>, at: usize, index: &mut Vec<i64>) {
        let remaining = (self.n - walk.len()) as i64;
        if remaining == 0 {
            if at == self.start && index.as_slice() == self.gamma {
                let edges: Vec<ModifiedEdge> = walk.iter().map(|&e| e.clone()).collect();
                self.found.push(Cycle {
                    weight: edges.iter().map(|e| e.weight).product(),
                    flux: edges.iter().map(|e| e.alpha).sum(),
                    index: index.clone(),
                    edges,
                });
            }
            return;
        }
        let hopeless = index
            .iter()
            .zip(self.gamma)
            .any(|(i, g)| (g - i).abs() > remaining * self.reach);
        if hopeless {
            return;
        }
        let g = self.g;
        for e in g.outgoing(at) {
            walk.push(e);
            for (i, t) in index.iter_mut().zip(&e.tau) {
                *i += t;
            }
            self.extend(walk, e.to, index);
            for (i, t) in index.iter_mut().zip(&e.tau) {
                *i -= t;
            }
            walk.pop();
        }
    }
}

/// `Σ_c ω(c) e^{−iα(c)}` over the given cycles, accumulated edge by edge in
/// extended precision.
pub fn cycle_sum(cycles: &[Cycle]) -> Complex64 {
    cycles
        .iter()
        .map(|c| {
            c.edges
                .iter()
                .fold(Cdd::from_c64(Complex64::new(1.0, 0.0)), |acc, e| {
                    acc.mul(Cdd::from_c64(Complex64::from_polar(1.0, -e.alpha)))
                        .scale(Dd::new(e.weight))
                })
        })
        .fold(Cdd::default(), Cdd::add)
        .to_c64()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHA_O: f64 = std::f64::consts::FRAC_PI_4;

    fn zlattice() -> ModifiedGraph {
        ModifiedGraph::new(
            &FundamentalGraph::from_json_str(
                r#"{"dimension": 1, "vertices": [{"id": "v"}],
                    "edges": [{"from": "v", "to": "v", "tau": [1]}]}"#,
            )
            .unwrap(),
        )
    }

    fn ex2() -> ModifiedGraph {
        ModifiedGraph::new(
            &FundamentalGraph::from_json_str(
                r#"{"dimension": 1, "vertices": [{"id": "v0"}, {"id": "v1"}],
                    "edges": [
                      {"from": "v0", "to": "v1", "tau": [0], "alpha": 0.7853981633974483},
                      {"from": "v0", "to": "v1", "tau": [0], "alpha": 3.9269908169872414},
                      {"from": "v0", "to": "v1", "tau": [1]}]}"#,
            )
            .unwrap(),
        )
    }

    #[test]
    fn modified_graph_has_one_loop_per_vertex() {
        let g = ex2();
        let loops: Vec<_> = g.added_loops().collect();
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|e| e.weight == 3.0 && e.tau == vec![0]));
        assert_eq!(g.outgoing(0).len(), 4);
    }

    #[test]
    fn single_step_cycle_is_the_added_loop() {
        let cycles = enumerate_cycles(&zlattice(), 1, &[0]).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].edges[0].kind, EdgeKind::AddedLoop);
        assert_eq!(cycles[0].weight, 2.0);
        assert_eq!(cycles[0].flux, 0.0);
    }

    #[test]
    fn length_two_cycles_of_lattice() {
        let cycles = enumerate_cycles(&zlattice(), 2, &[0]).unwrap();
        // loop∘loop, e∘ē, ē∘e
        assert_eq!(cycles.len(), 3);
        let total: f64 = cycles.iter().map(|c| c.weight).sum();
        assert_eq!(total, 6.0);
        assert_eq!(enumerate_cycles(&zlattice(), 2, &[2]).unwrap().len(), 1);
        assert!(enumerate_cycles(&zlattice(), 2, &[3]).unwrap().is_empty());
    }

    #[test]
    fn two_vertex_example_cycles_cancel() {
        let cycles = enumerate_cycles(&ex2(), 2, &[1]).unwrap();
        // β3 with the inverse of β1 or β2, each starting at either end
        assert_eq!(cycles.len(), 4);
        assert!(cycles.iter().all(|c| c.weight == 1.0));
        let mut fluxes: Vec<f64> = cycles.iter().map(|c| c.flux).collect();
        fluxes.sort_by(f64::total_cmp);
        let expect = [-PI - ALPHA_O, -PI - ALPHA_O, -ALPHA_O, -ALPHA_O];
        for (f, e) in fluxes.iter().zip(expect) {
            assert!((f - e).abs() < 1e-15);
        }
        assert!(cycle_sum(&cycles).norm() < 1e-15);
    }

    #[test]
    fn reversal_maps_index_to_negative() {
        let g = ex2();
        let fwd = enumerate_cycles(&g, 3, &[1]).unwrap();
        let back = enumerate_cycles(&g, 3, &[-1]).unwrap();
        assert_eq!(fwd.len(), back.len());
        for c in &fwd {
            let r = c.reversed();
            assert!(back.iter().any(|b| b.edges == r.edges));
        }
        assert!((cycle_sum(&fwd) - cycle_sum(&back).conj()).norm() < 1e-13);
    }

    #[test]
    fn cap_and_argument_checks() {
        let g = zlattice();
        assert!(matches!(
            enumerate_cycles(&g, 9, &[0]),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(enumerate_cycles(&g, 0, &[0]).is_err());
        assert!(enumerate_cycles(&g, 1, &[0, 0]).is_err());
    }

    #[test]
    fn phase_reduction() {
        assert!((reduce_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert!((reduce_phase(-PI) - PI).abs() < 1e-15);
        assert!((reduce_phase(-PI - ALPHA_O) - (PI - ALPHA_O)).abs() < 1e-15);
        assert_eq!(reduce_phase(0.5), 0.5);
    }
}
