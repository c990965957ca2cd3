//! The 1-skeleton presentation of a product system of graphs over ℕ^k.
//!
//! A skeleton is a finite set of vertices, edges carrying a color in `1..=k`,
//! and commuting squares `fg = g'f'` relating every composable two-colored
//! pair to exactly one pair in the opposite color order. Loading a skeleton
//! checks the endpoint, bijectivity and associativity conditions, after which
//! paths of any degree are well defined.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub(crate) u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub(crate) u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    /// Color in `1..=k`.
    pub color: usize,
    pub source: VertexId,
    pub range: VertexId,
}

/// `left = (f, g)` with `color(f) < color(g)` and `right = (g', f')`, asserting `fg = g'f'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Square {
    pub left: (EdgeId, EdgeId),
    pub right: (EdgeId, EdgeId),
}

/// Serialized form of a skeleton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonDoc {
    pub k: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub squares: Vec<SquareDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub color: usize,
    pub source: String,
    pub range: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareDoc {
    pub left: [String; 2],
    pub right: [String; 2],
}

/// An offending composable triple `f g h` (colors `i < j < l`) whose two swap
/// chains to the color word `(l, j, i)` disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssociativityViolation {
    pub triple: [String; 3],
    /// Result of swapping positions (0,1), (1,2), (0,1); `None` if a square was missing.
    pub left_first: Option<[String; 3]>,
    /// Result of swapping positions (1,2), (0,1), (1,2).
    pub right_first: Option<[String; 3]>,
}

impl fmt::Display for AssociativityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |w: &Option<[String; 3]>| match w {
            Some(w) => w.join("."),
            None => "<missing square>".to_string(),
        };
        write!(
            f,
            "{} rewrites to {} and to {}",
            self.triple.join("."),
            show(&self.left_first),
            show(&self.right_first)
        )
    }
}

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("k must be at least 1")]
    ZeroRank,
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("id {0:?} must be non-empty and must not contain '.'")]
    BadId(String),
    #[error("edge {edge:?} references unknown vertex {vertex:?}")]
    DanglingVertex { edge: String, vertex: String },
    #[error("square {square} references unknown edge {edge:?}")]
    DanglingEdge { square: String, edge: String },
    #[error("edge {edge:?} has color {color} outside 1..={k}")]
    ColorOutOfRange { edge: String, color: usize, k: usize },
    #[error("square {square}: {detail}")]
    SquareColors { square: String, detail: String },
    #[error("square {square} endpoint mismatch: {detail}")]
    SquareEndpointMismatch { square: String, detail: String },
    #[error("bijectivity violation: {0}")]
    Bijectivity(String),
    #[error("associativity violation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Associativity(Vec<AssociativityViolation>),
}

/// A validated (or, via [`Skeleton::from_doc_unchecked_associativity`],
/// structurally validated) k-graph skeleton. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Skeleton {
    k: usize,
    vertex_names: Vec<String>,
    vertex_index: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    edge_index: HashMap<String, EdgeId>,
    squares: Vec<Square>,
    swap: HashMap<(EdgeId, EdgeId), (EdgeId, EdgeId)>,
    out_edges: Vec<Vec<Vec<EdgeId>>>,
}

fn square_label(sq: &SquareDoc) -> String {
    format!(
        "[{},{}]->[{},{}]",
        sq.left[0], sq.left[1], sq.right[0], sq.right[1]
    )
}

impl Skeleton {
    pub fn from_json(text: &str) -> Result<Self, SkeletonError> {
        let doc: SkeletonDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }

    /// Builds and fully validates a skeleton, including associativity.
    pub fn from_doc(doc: &SkeletonDoc) -> Result<Self, SkeletonError> {
        let sk = Self::from_doc_unchecked_associativity(doc)?;
        let violations = sk.check_associativity();
        if violations.is_empty() {
            Ok(sk)
        } else {
            Err(SkeletonError::Associativity(violations))
        }
    }

    /// Checks ids, references, colors, square endpoints and bijectivity, but
    /// not associativity. Use [`Skeleton::check_associativity`] afterwards.
    pub fn from_doc_unchecked_associativity(doc: &SkeletonDoc) -> Result<Self, SkeletonError> {
        let k = doc.k;
        if k == 0 {
            return Err(SkeletonError::ZeroRank);
        }
        let mut seen = HashSet::new();
        let mut vertex_index = HashMap::new();
        for (i, name) in doc.vertices.iter().enumerate() {
            check_id(name)?;
            if !seen.insert(name.as_str()) {
                return Err(SkeletonError::DuplicateId(name.clone()));
            }
            vertex_index.insert(name.clone(), VertexId(i as u32));
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        let mut edge_index = HashMap::new();
        for (i, e) in doc.edges.iter().enumerate() {
            check_id(&e.id)?;
            if !seen.insert(e.id.as_str()) {
                return Err(SkeletonError::DuplicateId(e.id.clone()));
            }
            if e.color == 0 || e.color > k {
                return Err(SkeletonError::ColorOutOfRange {
                    edge: e.id.clone(),
                    color: e.color,
                    k,
                });
            }
            let lookup = |v: &String| {
                vertex_index
                    .get(v)
                    .copied()
                    .ok_or_else(|| SkeletonError::DanglingVertex {
                        edge: e.id.clone(),
                        vertex: v.clone(),
                    })
            };
            edges.push(Edge {
                id: e.id.clone(),
                color: e.color,
                source: lookup(&e.source)?,
                range: lookup(&e.range)?,
            });
            edge_index.insert(e.id.clone(), EdgeId(i as u32));
        }

        let mut out_edges = vec![vec![Vec::new(); k]; doc.vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.source.index()][e.color - 1].push(EdgeId(i as u32));
        }

        let mut squares = Vec::with_capacity(doc.squares.len());
        let mut swap = HashMap::with_capacity(2 * doc.squares.len());
        for sq in &doc.squares {
            let label = square_label(sq);
            let id = |name: &String| {
                edge_index
                    .get(name)
                    .copied()
                    .ok_or_else(|| SkeletonError::DanglingEdge {
                        square: label.clone(),
                        edge: name.clone(),
                    })
            };
            let (f, g) = (id(&sq.left[0])?, id(&sq.left[1])?);
            let (g2, f2) = (id(&sq.right[0])?, id(&sq.right[1])?);
            let (ef, eg, eg2, ef2) = (&edges[f.index()], &edges[g.index()], &edges[g2.index()], &edges[f2.index()]);
            if ef.color >= eg.color {
                return Err(SkeletonError::SquareColors {
                    square: label,
                    detail: format!(
                        "left pair must have increasing colors, got {} then {}",
                        ef.color, eg.color
                    ),
                });
            }
            if eg2.color != eg.color || ef2.color != ef.color {
                return Err(SkeletonError::SquareColors {
                    square: label,
                    detail: format!(
                        "right pair must have colors ({}, {}), got ({}, {})",
                        eg.color, ef.color, eg2.color, ef2.color
                    ),
                });
            }
            let name = |v: VertexId| doc.vertices[v.index()].clone();
            let mismatch = |what: &str, a: VertexId, b: VertexId| {
                Err(SkeletonError::SquareEndpointMismatch {
                    square: label.clone(),
                    detail: format!("{what}: {} != {}", name(a), name(b)),
                })
            };
            if ef.range != eg.source {
                return mismatch("range(f) vs source(g)", ef.range, eg.source);
            }
            if eg2.range != ef2.source {
                return mismatch("range(g') vs source(f')", eg2.range, ef2.source);
            }
            if eg2.source != ef.source {
                return mismatch("source(g') vs source(f)", eg2.source, ef.source);
            }
            if ef2.range != eg.range {
                return mismatch("range(f') vs range(g)", ef2.range, eg.range);
            }
            if swap.insert((f, g), (g2, f2)).is_some() {
                return Err(SkeletonError::Bijectivity(format!(
                    "pair {}.{} is the left side of more than one square",
                    ef.id, eg.id
                )));
            }
            if swap.insert((g2, f2), (f, g)).is_some() {
                return Err(SkeletonError::Bijectivity(format!(
                    "pair {}.{} is the right side of more than one square",
                    eg2.id, ef2.id
                )));
            }
            squares.push(Square {
                left: (f, g),
                right: (g2, f2),
            });
        }

        let sk = Skeleton {
            k,
            vertex_names: doc.vertices.clone(),
            vertex_index,
            edges,
            edge_index,
            squares,
            swap,
            out_edges,
        };
        // Every composable two-colored pair, in either color order, must be covered.
        for (i, a) in sk.edges.iter().enumerate() {
            for c in 1..=k {
                if c == a.color {
                    continue;
                }
                for &b in sk.out_edges(a.range, c) {
                    if !sk.swap.contains_key(&(EdgeId(i as u32), b)) {
                        let side = if a.color < c { "left" } else { "right" };
                        return Err(SkeletonError::Bijectivity(format!(
                            "composable pair {}.{} is not the {side} side of any square",
                            a.id,
                            sk.edge(b).id
                        )));
                    }
                }
            }
        }
        Ok(sk)
    }

    /// Compares the two maximal swap chains `(i,j,l) -> (l,j,i)` for every
    /// composable triple with `i < j < l`. Empty iff the skeleton is associative.
    pub fn check_associativity(&self) -> Vec<AssociativityViolation> {
        if self.k < 3 {
            return Vec::new();
        }
        (0..self.edges.len() as u32)
            .into_par_iter()
            .flat_map_iter(|fi| {
                let f = EdgeId(fi);
                let ef = self.edge(f);
                let mut found = Vec::new();
                for cj in ef.color + 1..=self.k {
                    for &g in self.out_edges(ef.range, cj) {
                        for cl in cj + 1..=self.k {
                            for &h in self.out_edges(self.edge(g).range, cl) {
                                let a = self.swap_chain(f, g, h, [0, 1, 0]);
                                let b = self.swap_chain(f, g, h, [1, 0, 1]);
                                if a.is_none() || a != b {
                                    let names = |w: Option<[EdgeId; 3]>| {
                                        w.map(|w| w.map(|e| self.edge(e).id.clone()))
                                    };
                                    found.push(AssociativityViolation {
                                        triple: [f, g, h].map(|e| self.edge(e).id.clone()),
                                        left_first: names(a),
                                        right_first: names(b),
                                    });
                                }
                            }
                        }
                    }
                }
                found
            })
            .collect()
    }

    fn swap_chain(&self, f: EdgeId, g: EdgeId, h: EdgeId, positions: [usize; 3]) -> Option<[EdgeId; 3]> {
        let mut w = [f, g, h];
        for p in positions {
            let (x, y) = self.swap(w[p], w[p + 1])?;
            w[p] = x;
            w[p + 1] = y;
        }
        Some(w)
    }

    /// Rewrites a composable pair `ab` of distinct colors through its square.
    pub fn swap(&self, a: EdgeId, b: EdgeId) -> Option<(EdgeId, EdgeId)> {
        self.swap.get(&(a, b)).copied()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_names.len() as u32).map(VertexId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.index()]
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.index()]
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    /// Edges of the given color (1-based) with source `v`.
    pub fn out_edges(&self, v: VertexId, color: usize) -> &[EdgeId] {
        &self.out_edges[v.index()][color - 1]
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn to_doc(&self) -> SkeletonDoc {
        let name = |e: EdgeId| self.edge(e).id.clone();
        SkeletonDoc {
            k: self.k,
            vertices: self.vertex_names.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    color: e.color,
                    source: self.vertex_name(e.source).to_string(),
                    range: self.vertex_name(e.range).to_string(),
                })
                .collect(),
            squares: self
                .squares
                .iter()
                .map(|s| SquareDoc {
                    left: [name(s.left.0), name(s.left.1)],
                    right: [name(s.right.0), name(s.right.1)],
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("skeleton serializes")
    }
}

fn check_id(id: &str) -> Result<(), SkeletonError> {
    if id.is_empty() || id.contains('.') {
        Err(SkeletonError::BadId(id.to_string()))
    } else {
        Ok(())
    }
}
