//! Paths in color-sorted normal form, composition, refactoring and segments.
//!
//! A path is stored as the unique composable edge word whose colors are in
//! ascending order. The factorisation property makes this canonical, so path
//! equality is word equality. Any other color arrangement of the same path is
//! reached by adjacent swaps through the skeleton's squares.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::degree::Degree;
use crate::skeleton::{EdgeId, Skeleton, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("color word {word:?} is not a rearrangement of the path's colors")]
    InvalidColorWord { word: Vec<usize> },
    #[error("segment bounds violate 0 <= {a:?} <= {b:?} <= {degree:?}")]
    DegreeBounds { a: Degree, b: Degree, degree: Degree },
    #[error("unknown vertex or edge id {0:?}")]
    UnknownId(String),
    #[error("edges in {0:?} are not composable")]
    NotComposable(String),
    #[error("empty path literal")]
    EmptyLiteral,
}

/// A path of the skeleton; vertices are the paths of degree 0.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Path {
    source: VertexId,
    range: VertexId,
    edges: Vec<EdgeId>,
    degree: Degree,
}

impl Path {
    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn range(&self) -> VertexId {
        self.range
    }

    /// Normal-form edge word (colors ascending).
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn degree(&self) -> &Degree {
        &self.degree
    }

    pub fn is_vertex(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .total()
            .cmp(&other.degree.total())
            .then_with(|| self.degree.coords().cmp(other.degree.coords()))
            .then_with(|| self.source.cmp(&other.source))
            .then_with(|| self.edges.cmp(&other.edges))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Displays a path as its literal (vertex id, or edge ids joined by `.`).
pub struct PathLiteral<'a> {
    skeleton: &'a Skeleton,
    path: &'a Path,
}

impl fmt::Display for PathLiteral<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_vertex() {
            return f.write_str(self.skeleton.vertex_name(self.path.source));
        }
        for (i, &e) in self.path.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(&self.skeleton.edge(e).id)?;
        }
        Ok(())
    }
}

impl Skeleton {
    pub fn vertex_path(&self, v: VertexId) -> Path {
        Path {
            source: v,
            range: v,
            edges: Vec::new(),
            degree: Degree::zero(self.k()),
        }
    }

    pub fn edge_path(&self, e: EdgeId) -> Path {
        let edge = self.edge(e);
        Path {
            source: edge.source,
            range: edge.range,
            edges: vec![e],
            degree: Degree::unit(self.k(), edge.color),
        }
    }

    /// Builds the path represented by a composable edge word in any color order.
    pub fn path_from_edges(&self, edges: &[EdgeId]) -> Option<Path> {
        let (first, last) = (edges.first()?, edges.last()?);
        if edges
            .windows(2)
            .any(|w| self.edge(w[0]).range != self.edge(w[1]).source)
        {
            return None;
        }
        let mut coords = vec![0u32; self.k()];
        for &e in edges {
            coords[self.edge(e).color - 1] += 1;
        }
        Some(Path {
            source: self.edge(*first).source,
            range: self.edge(*last).range,
            edges: self.normalize(edges.to_vec()),
            degree: Degree::from_coords(coords),
        })
    }

    /// Bubble-sorts a composable word into ascending color order via squares.
    fn normalize(&self, mut word: Vec<EdgeId>) -> Vec<EdgeId> {
        let n = word.len();
        for pass in 0..n {
            let mut swapped = false;
            for j in 0..n.saturating_sub(1 + pass) {
                if self.edge(word[j]).color > self.edge(word[j + 1]).color {
                    let (x, y) = self
                        .swap(word[j], word[j + 1])
                        .expect("validated skeleton has a square for every composable pair");
                    word[j] = x;
                    word[j + 1] = y;
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        word
    }

    /// `a·b`, or `None` when `range(a) != source(b)`.
    pub fn compose(&self, a: &Path, b: &Path) -> Option<Path> {
        if a.range != b.source {
            return None;
        }
        if a.is_vertex() {
            return Some(b.clone());
        }
        if b.is_vertex() {
            return Some(a.clone());
        }
        let mut word = a.edges.clone();
        word.extend_from_slice(&b.edges);
        Some(Path {
            source: a.source,
            range: b.range,
            edges: self.normalize(word),
            degree: a.degree.add(&b.degree),
        })
    }

    /// The unique edge word realizing `p` with the given color word.
    pub fn refactor(&self, p: &Path, colorword: &[usize]) -> Result<Vec<EdgeId>, PathError> {
        let invalid = || PathError::InvalidColorWord {
            word: colorword.to_vec(),
        };
        if colorword.len() != p.edges.len() {
            return Err(invalid());
        }
        let mut slots: Vec<VecDeque<usize>> = vec![VecDeque::new(); self.k() + 1];
        for (pos, &c) in colorword.iter().enumerate() {
            if c == 0 || c > self.k() {
                return Err(invalid());
            }
            slots[c].push_back(pos);
        }
        // Target position of each edge; edges of one color never cross each other.
        let mut ranks = Vec::with_capacity(p.edges.len());
        for &e in &p.edges {
            ranks.push(slots[self.edge(e).color].pop_front().ok_or_else(invalid)?);
        }
        let mut word = p.edges.clone();
        let n = word.len();
        for pass in 0..n {
            for j in 0..n.saturating_sub(1 + pass) {
                if ranks[j] > ranks[j + 1] {
                    let (x, y) = self
                        .swap(word[j], word[j + 1])
                        .expect("validated skeleton has a square for every composable pair");
                    word[j] = x;
                    word[j + 1] = y;
                    ranks.swap(j, j + 1);
                }
            }
        }
        Ok(word)
    }

    /// The segment `p(a, b)`: the unique `q` of degree `b - a` with `p = x q y`,
    /// `d(x) = a` and `d(y) = d(p) - b`.
    pub fn segment(&self, p: &Path, a: &Degree, b: &Degree) -> Result<Path, PathError> {
        let bounds_err = || PathError::DegreeBounds {
            a: a.clone(),
            b: b.clone(),
            degree: p.degree.clone(),
        };
        let mid = b.checked_sub(a).ok_or_else(bounds_err)?;
        let tail = p.degree.checked_sub(b).ok_or_else(bounds_err)?;
        let (start, len) = (a.total() as usize, mid.total() as usize);
        if len == p.len() {
            return Ok(p.clone());
        }
        let word: Vec<usize> = a
            .sorted_colors()
            .chain(mid.sorted_colors())
            .chain(tail.sorted_colors())
            .collect();
        let seq = self.refactor(p, &word)?;
        let source = if start == 0 {
            p.source
        } else {
            self.edge(seq[start - 1]).range
        };
        let range = if len == 0 {
            source
        } else {
            self.edge(seq[start + len - 1]).range
        };
        Ok(Path {
            source,
            range,
            edges: seq[start..start + len].to_vec(),
            degree: mid,
        })
    }

    /// `p(0, n)`, assuming `n <= d(p)`.
    pub fn prefix(&self, p: &Path, n: &Degree) -> Result<Path, PathError> {
        self.segment(p, &Degree::zero(self.k()), n)
    }

    /// `p(n, d(p))`.
    pub fn suffix(&self, p: &Path, n: &Degree) -> Result<Path, PathError> {
        self.segment(p, n, &p.degree)
    }

    /// Whether `q` is an initial segment of `p`.
    pub fn is_prefix(&self, q: &Path, p: &Path) -> bool {
        q.source == p.source
            && q.degree.le(&p.degree)
            && self.prefix(p, &q.degree).is_ok_and(|x| &x == q)
    }

    /// All paths of degree exactly `n`, optionally restricted to one source.
    pub fn enumerate_paths(&self, n: &Degree, src: Option<VertexId>) -> Vec<Path> {
        let word: Vec<usize> = n.sorted_colors().collect();
        let starts: Vec<VertexId> = match src {
            Some(v) => vec![v],
            None => self.vertices().collect(),
        };
        let mut out = Vec::new();
        for v in starts {
            let mut stack: Vec<(VertexId, Vec<EdgeId>)> = vec![(v, Vec::new())];
            while let Some((at, edges)) = stack.pop() {
                if edges.len() == word.len() {
                    out.push(Path {
                        source: v,
                        range: at,
                        edges,
                        degree: n.clone(),
                    });
                    continue;
                }
                for &e in self.out_edges(at, word[edges.len()]).iter().rev() {
                    let mut next = edges.clone();
                    next.push(e);
                    stack.push((self.edge(e).range, next));
                }
            }
        }
        out
    }

    /// All paths with degree `<= bound`, optionally from one source.
    pub fn paths_up_to(&self, bound: &Degree, src: Option<VertexId>) -> Vec<Path> {
        let mut out: Vec<Path> = bound
            .lower_box()
            .iter()
            .flat_map(|n| self.enumerate_paths(n, src))
            .collect();
        out.sort();
        out
    }

    pub fn literal<'a>(&'a self, path: &'a Path) -> PathLiteral<'a> {
        PathLiteral {
            skeleton: self,
            path,
        }
    }

    /// Parses a path literal: a vertex id, or edge ids joined by `.` in any
    /// composable order.
    pub fn parse_path(&self, literal: &str) -> Result<Path, PathError> {
        let literal = literal.trim();
        if literal.is_empty() {
            return Err(PathError::EmptyLiteral);
        }
        if !literal.contains('.') {
            if let Some(v) = self.vertex_id(literal) {
                return Ok(self.vertex_path(v));
            }
        }
        let edges = literal
            .split('.')
            .map(|t| {
                self.edge_id(t.trim())
                    .ok_or_else(|| PathError::UnknownId(t.trim().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.path_from_edges(&edges)
            .ok_or_else(|| PathError::NotComposable(literal.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn d(c: &[u32]) -> Degree {
        Degree::from_coords(c.to_vec())
    }

    #[test]
    fn vertices_are_identities() {
        let sk = fixtures::ex43(2);
        let lambda = sk.parse_path("lambda").unwrap();
        let v00 = sk.parse_path("00").unwrap();
        let v10 = sk.parse_path("10").unwrap();
        assert_eq!(sk.compose(&v00, &lambda), Some(lambda.clone()));
        assert_eq!(sk.compose(&lambda, &v10), Some(lambda.clone()));
        assert_eq!(sk.compose(&lambda, &v00), None);
    }

    #[test]
    fn commuting_square_identifies_paths() {
        let sk = fixtures::ex43(2);
        let p = |s: &str| sk.parse_path(s).unwrap();
        let ba = sk.compose(&p("beta"), &p("alpha_1")).unwrap();
        let lm = sk.compose(&p("lambda"), &p("mu_1")).unwrap();
        assert_eq!(ba, lm);
        assert_eq!(sk.literal(&ba).to_string(), "lambda.mu_1");
        assert_eq!(p("beta.alpha_1"), lm);
    }

    #[test]
    fn refactor_to_other_color_word() {
        let sk = fixtures::ex43(2);
        let lm = sk.parse_path("lambda.mu_1").unwrap();
        let id = |n| sk.edge_id(n).unwrap();
        assert_eq!(sk.refactor(&lm, &[1, 2]).unwrap(), lm.edges().to_vec());
        assert_eq!(sk.refactor(&lm, &[2, 1]).unwrap(), vec![id("beta"), id("alpha_1")]);
        assert!(matches!(
            sk.refactor(&lm, &[1, 1]),
            Err(PathError::InvalidColorWord { .. })
        ));
        assert!(sk.refactor(&lm, &[2]).is_err());
    }

    #[test]
    fn segments_of_a_square() {
        let sk = fixtures::ex43(2);
        let p = sk.parse_path("beta.alpha_1").unwrap();
        let zero = d(&[0, 0]);
        assert_eq!(sk.segment(&p, &zero, &d(&[1, 0])).unwrap(), sk.parse_path("lambda").unwrap());
        assert_eq!(sk.segment(&p, &zero, &d(&[0, 1])).unwrap(), sk.parse_path("beta").unwrap());
        assert_eq!(sk.segment(&p, &d(&[1, 0]), &d(&[1, 1])).unwrap(), sk.parse_path("mu_1").unwrap());
        assert_eq!(sk.segment(&p, &d(&[0, 1]), &d(&[1, 1])).unwrap(), sk.parse_path("alpha_1").unwrap());
        assert_eq!(sk.segment(&p, &zero, &zero).unwrap(), sk.parse_path("00").unwrap());
        assert_eq!(sk.segment(&p, &d(&[1, 1]), &d(&[1, 1])).unwrap(), sk.parse_path("11").unwrap());
        assert_eq!(sk.segment(&p, &zero, &d(&[1, 1])).unwrap(), p);
        assert!(matches!(
            sk.segment(&p, &d(&[1, 0]), &d(&[0, 1])),
            Err(PathError::DegreeBounds { .. })
        ));
        assert!(sk.segment(&p, &zero, &d(&[2, 0])).is_err());
    }

    #[test]
    fn enumerate_counts() {
        let sk = fixtures::loops(2);
        assert_eq!(sk.enumerate_paths(&d(&[2]), None).len(), 4);
        assert_eq!(sk.enumerate_paths(&d(&[0]), None).len(), 1);
        let ex = fixtures::ex43(2);
        let v00 = ex.vertex_id("00").unwrap();
        assert_eq!(ex.enumerate_paths(&d(&[1, 1]), Some(v00)).len(), 3);
        assert_eq!(ex.enumerate_paths(&d(&[0, 0]), None).len(), 4);
        let ex3 = fixtures::ex43(3);
        assert_eq!(ex3.enumerate_paths(&d(&[1, 1]), Some(v00)).len(), 4);
    }

    #[test]
    fn parse_errors() {
        let sk = fixtures::ex43(1);
        assert_eq!(sk.parse_path(""), Err(PathError::EmptyLiteral));
        assert!(matches!(sk.parse_path("nope"), Err(PathError::UnknownId(_))));
        assert!(matches!(
            sk.parse_path("lambda.beta"),
            Err(PathError::NotComposable(_))
        ));
    }

    #[test]
    fn is_prefix_checks_source_and_degree() {
        let sk = fixtures::ex43(1);
        let p = |s: &str| sk.parse_path(s).unwrap();
        assert!(sk.is_prefix(&p("lambda"), &p("beta.alpha_0")));
        assert!(sk.is_prefix(&p("00"), &p("lambda")));
        assert!(!sk.is_prefix(&p("10"), &p("lambda")));
        assert!(!sk.is_prefix(&p("alpha_0"), &p("lambda.mu_0")));
    }
}
