//! Fundamental graphs of periodic graphs.
//!
//! A periodic graph is never materialized. It is described by its finite
//! quotient: vertices carrying the electric potential, and one orientation of
//! every unoriented edge together with its edge index `tau` (which lattice
//! translate the edge lands in) and its magnetic phase `alpha`. The inverse of
//! a stored edge has `tau` and `alpha` negated and is produced on demand.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex of the fundamental graph with its electric potential.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexRecord {
    pub id: String,
    pub potential: f64,
}

/// One stored orientation of an unoriented edge, endpoints as dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedEdge {
    pub from: usize,
    pub to: usize,
    pub tau: Vec<i64>,
    pub alpha: f64,
}

impl OrientedEdge {
    pub fn inverse(&self) -> OrientedEdge {
        OrientedEdge {
            from: self.to,
            to: self.from,
            tau: self.tau.iter().map(|t| -t).collect(),
            alpha: -self.alpha,
        }
    }

    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }
}

/// An oriented edge leaving a given vertex, as seen from that vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub to: usize,
    pub tau: Vec<i64>,
    pub alpha: f64,
    /// Position of the underlying stored edge.
    pub edge: usize,
    /// True when this step traverses the stored edge backwards.
    pub reversed: bool,
}

/// Finite quotient of a periodic graph, validated and immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalGraph {
    dimension: usize,
    vertices: Vec<VertexRecord>,
    edges: Vec<OrientedEdge>,
}

impl FundamentalGraph {
    /// Validates and builds a graph. Vertex indices in `edges` refer to
    /// positions in `vertices`.
    pub fn new(
        dimension: usize,
        vertices: Vec<VertexRecord>,
        edges: Vec<OrientedEdge>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidGraph("dimension must be positive".into()));
        }
        if vertices.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut seen = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if seen.insert(v.id.as_str(), i).is_some() {
                return Err(Error::DuplicateVertex(v.id.clone()));
            }
            if !v.potential.is_finite() {
                return Err(Error::NonFinite(format!("Q of vertex {:?}", v.id)));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            for end in [e.from, e.to] {
                if end >= vertices.len() {
                    return Err(Error::UnknownVertex {
                        id: format!("#{end}"),
                        location: format!("edge {i}"),
                    });
                }
            }
            let location = || {
                format!(
                    "edge {i} ({} -> {})",
                    vertices[e.from].id, vertices[e.to].id
                )
            };
            if e.tau.len() != dimension {
                return Err(Error::DimensionMismatch {
                    location: location(),
                    expected: dimension,
                    found: e.tau.len(),
                });
            }
            if !e.alpha.is_finite() {
                return Err(Error::NonFinite(format!("alpha of {}", location())));
            }
        }
        let graph = FundamentalGraph {
            dimension,
            vertices,
            edges,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    // Only the quotient is checked; connectivity of the periodic cover also
    // depends on the edge indices and is not verified here.
    fn check_connected(&self) -> Result<()> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if let Some(v) = (0..n).find(|&v| find(&mut parent, v) != root) {
            return Err(Error::InvalidGraph(format!(
                "fundamental graph is disconnected: vertex {:?} unreachable from {:?}",
                self.vertices[v].id, self.vertices[0].id
            )));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of vertices ν.
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[VertexRecord] {
        &self.vertices
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn potential(&self, v: usize) -> f64 {
        self.vertices[v].potential
    }

    /// Number of oriented edges starting at `v`; loops count twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| usize::from(e.from == v) + usize::from(e.to == v))
            .sum()
    }

    /// Diagonal entry `q_v = κ_v + Q(v)` of the fiber matrix.
    pub fn diagonal_weight(&self, v: usize) -> f64 {
        self.degree(v) as f64 + self.potential(v)
    }

    /// Largest Euclidean norm of an edge index (0 for an edgeless graph).
    pub fn max_index_norm(&self) -> f64 {
        self.edges.iter().map(|e| norm(&e.tau)).fold(0.0, f64::max)
    }

    /// Every oriented edge starting at `v`: stored edges as-is in input
    /// order, then stored edges ending at `v` in inverse form. A loop at `v`
    /// therefore shows up once in each pass.
    pub fn oriented_edges_from(&self, v: usize) -> Result<Vec<Step>> {
        if v >= self.vertices.len() {
            return Err(Error::VertexOutOfRange(v));
        }
        let forward = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.from == v)
            .map(|(i, e)| Step {
                to: e.to,
                tau: e.tau.clone(),
                alpha: e.alpha,
                edge: i,
                reversed: false,
            });
        let backward = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.to == v)
            .map(|(i, e)| {
                let inv = e.inverse();
                Step {
                    to: inv.to,
                    tau: inv.tau,
                    alpha: inv.alpha,
                    edge: i,
                    reversed: true,
                }
            });
        Ok(forward.chain(backward).collect())
    }

    /// Looks up a vertex by id and lists its oriented edges.
    pub fn oriented_edges_from_id(&self, id: &str) -> Result<Vec<Step>> {
        let v = self.vertex_index(id).ok_or_else(|| Error::UnknownVertex {
            id: id.to_string(),
            location: "query".into(),
        })?;
        self.oriented_edges_from(v)
    }

    /// The full multiset of oriented edges (every stored edge and its inverse).
    pub fn all_oriented_edges(&self) -> Vec<OrientedEdge> {
        self.edges
            .iter()
            .flat_map(|e| [e.clone(), e.inverse()])
            .collect()
    }

    /// Same graph with every magnetic phase multiplied by `t`.
    pub fn with_scaled_phases(&self, t: f64) -> FundamentalGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.alpha *= t;
        }
        g
    }

    /// Same graph with the magnetic potential switched off.
    pub fn without_phases(&self) -> FundamentalGraph {
        self.with_scaled_phases(0.0)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_graph()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_reader(s.as_bytes())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from(self)).expect("graph serializes")
    }
}

/// Reads and validates a graph in the JSON file format.
pub fn load_graph<R: Read>(source: R) -> Result<FundamentalGraph> {
    FundamentalGraph::from_reader(source)
}

pub fn load_graph_file(path: &std::path::Path) -> Result<FundamentalGraph> {
    let file = std::fs::File::open(path)?;
    load_graph(std::io::BufReader::new(file))
}

/// Edge index `τ(e) = [v]_A − [u]_A` from the cell offsets of the endpoints.
pub fn compute_edge_index(u_offset: &[i64], v_offset: &[i64]) -> Result<Vec<i64>> {
    if u_offset.len() != v_offset.len() {
        return Err(Error::DimensionMismatch {
            location: "endpoint offsets".into(),
            expected: u_offset.len(),
            found: v_offset.len(),
        });
    }
    Ok(v_offset.iter().zip(u_offset).map(|(v, u)| v - u).collect())
}

/// Cell offsets of both endpoints of every edge of a periodic embedding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeriodicEmbedding {
    pub offsets: Vec<(Vec<i64>, Vec<i64>)>,
}

impl PeriodicEmbedding {
    pub fn edge_indices(&self) -> Result<Vec<Vec<i64>>> {
        self.offsets
            .iter()
            .map(|(u, v)| compute_edge_index(u, v))
            .collect()
    }
}

pub(crate) fn norm(v: &[i64]) -> f64 {
    v.iter()
        .map(|&x| (x as f64) * (x as f64))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    dimension: usize,
    vertices: Vec<VertexEntry>,
    #[serde(default)]
    edges: Vec<EdgeEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexEntry {
    id: String,
    #[serde(rename = "Q", default)]
    q: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    from: String,
    to: String,
    tau: Vec<i64>,
    #[serde(default)]
    alpha: f64,
}

impl GraphFile {
    fn into_graph(self) -> Result<FundamentalGraph> {
        let ids: HashMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let lookup = |id: &str| {
                ids.get(id).copied().ok_or_else(|| Error::UnknownVertex {
                    id: id.to_string(),
                    location: format!("edge {i}"),
                })
            };
            edges.push(OrientedEdge {
                from: lookup(&e.from)?,
                to: lookup(&e.to)?,
                tau: e.tau.clone(),
                alpha: e.alpha,
            });
        }
        let vertices = self
            .vertices
            .into_iter()
            .map(|v| VertexRecord {
                id: v.id,
                potential: v.q,
            })
            .collect();
        FundamentalGraph::new(self.dimension, vertices, edges)
    }
}

impl From<&FundamentalGraph> for GraphFile {
    fn from(g: &FundamentalGraph) -> Self {
        GraphFile {
            dimension: g.dimension,
            vertices: g
                .vertices
                .iter()
                .map(|v| VertexEntry {
                    id: v.id.clone(),
                    q: v.potential,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeEntry {
                    from: g.vertices[e.from].id.clone(),
                    to: g.vertices[e.to].id.clone(),
                    tau: e.tau.clone(),
                    alpha: e.alpha,
                })
                .collect(),
        }
    }
}
