#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use flatband::graph::{FundamentalGraph, OrientedEdge, VertexRecord};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> FundamentalGraph {
    flatband::graph::load_graph_file(&fixture(name)).unwrap()
}

/// Two-vertex magnetic chain with `Q(v1) = q1` and phase offset `alpha_o`.
pub fn ex2(q1: f64, alpha_o: f64) -> FundamentalGraph {
    let v = vec![
        VertexRecord {
            id: "v0".into(),
            potential: 0.0,
        },
        VertexRecord {
            id: "v1".into(),
            potential: q1,
        },
    ];
    let e = vec![
        OrientedEdge {
            from: 0,
            to: 1,
            tau: vec![0],
            alpha: alpha_o,
        },
        OrientedEdge {
            from: 0,
            to: 1,
            tau: vec![0],
            alpha: PI + alpha_o,
        },
        OrientedEdge {
            from: 0,
            to: 1,
            tau: vec![1],
            alpha: 0.0,
        },
    ];
    FundamentalGraph::new(1, v, e).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct GraphSpec {
    pub max_vertices: usize,
    pub max_dimension: usize,
    pub max_edges: usize,
    pub magnetic: bool,
    /// Require the cycle indices to span R^d (periodic cover is d-periodic).
    pub full_rank: bool,
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec {
            max_vertices: 4,
            max_dimension: 2,
            max_edges: 6,
            magnetic: true,
            full_rank: false,
        }
    }
}

fn rank(vectors: &[Vec<i64>], d: usize) -> usize {
    let mut rows: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as f64).collect())
        .collect();
    let mut r = 0;
    for col in 0..d {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col].abs() > 1e-9) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][col] / rows[r][col];
                let pivot = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot) {
                    *x -= f * p;
                }
            }
        }
        r += 1;
    }
    r
}

/// Random connected fundamental graph: spanning tree first, then extra edges
/// (loops and multi-edges allowed), `τ ∈ {−1,0,1}^d`.
pub fn random_graph<R: Rng>(rng: &mut R, spec: GraphSpec) -> FundamentalGraph {
    loop {
        let nu = rng.gen_range(1..=spec.max_vertices);
        let d = rng.gen_range(1..=spec.max_dimension);
        let vertices: Vec<VertexRecord> = (0..nu)
            .map(|i| VertexRecord {
                id: format!("v{i}"),
                potential: rng.gen_range(-1.0..1.0),
            })
            .collect();
        let mut edges = Vec::new();
        let random_edge = |rng: &mut R, from: usize, to: usize| OrientedEdge {
            from,
            to,
            tau: (0..d).map(|_| rng.gen_range(-1..=1)).collect(),
            alpha: if spec.magnetic {
                rng.gen_range(-PI..PI)
            } else {
                0.0
            },
        };
        for v in 1..nu {
            let parent = rng.gen_range(0..v);
            let e = if rng.gen_bool(0.5) {
                random_edge(rng, parent, v)
            } else {
                random_edge(rng, v, parent)
            };
            edges.push(e);
        }
        let extra_max = spec.max_edges.saturating_sub(edges.len());
        let extra = rng.gen_range(usize::from(nu == 1)..=extra_max);
        for _ in 0..extra {
            let (a, b) = (rng.gen_range(0..nu), rng.gen_range(0..nu));
            edges.push(random_edge(rng, a, b));
        }
        if spec.full_rank {
            // tree potentials, then the index of each fundamental cycle
            let mut pot: Vec<Option<Vec<i64>>> = vec![None; nu];
            pot[0] = Some(vec![0; d]);
            for e in &edges[..nu - 1] {
                if let Some(p) = pot[e.from].clone() {
                    pot[e.to] = Some(p.iter().zip(&e.tau).map(|(a, b)| a + b).collect());
                } else {
                    let p = pot[e.to].clone().unwrap();
                    pot[e.from] = Some(p.iter().zip(&e.tau).map(|(a, b)| a - b).collect());
                }
            }
            let cycles: Vec<Vec<i64>> = edges[nu - 1..]
                .iter()
                .map(|e| {
                    let (pu, pv) = (pot[e.from].as_ref().unwrap(), pot[e.to].as_ref().unwrap());
                    (0..d).map(|i| e.tau[i] + pu[i] - pv[i]).collect()
                })
                .collect();
            if rank(&cycles, d) < d {
                continue;
            }
        }
        return FundamentalGraph::new(d, vertices, edges).unwrap();
    }
}

/// Doubles every edge with a partner whose phase differs by π.
pub fn doubled_with_pi_offsets(g: &FundamentalGraph) -> FundamentalGraph {
    let mut edges = Vec::new();
    for e in g.edges() {
        edges.push(e.clone());
        edges.push(OrientedEdge {
            alpha: e.alpha + PI,
            ..e.clone()
        });
    }
    FundamentalGraph::new(g.dimension(), g.vertices().to_vec(), edges).unwrap()
}

/// All integer vectors in `[-r, r]^d`.
pub fn index_box(r: i64, d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (-r..=r).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}
