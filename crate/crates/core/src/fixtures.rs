//! Built-in skeletons and random generators.
//!
//! * `ex43(m)`: four vertices, a single path pair `lambda`/`beta` from `00` and
//!   `m + 1` squares `beta.alpha_i = lambda.mu_i`. Its generator-pair MCE
//!   `MCE(lambda, beta)` has `m + 1` elements, growing without bound in `m`.
//! * `loops(n)`: one vertex with `n` loops of a single color.
//! * `free(n, k)`: one vertex with `n` loops per color and commuting squares.
//! * `product(a, b)`: the cartesian product of a `k1`-graph and a `k2`-graph.
//! * `random_2graph`: random 2-graphs with commuting adjacency counts and a
//!   random choice of squares.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::degree::Degree;
use crate::paths::Path;
use crate::skeleton::{EdgeDoc, Skeleton, SkeletonDoc, SquareDoc, VertexId};

fn edge(id: String, color: usize, source: &str, range: &str) -> EdgeDoc {
    EdgeDoc {
        id,
        color,
        source: source.to_string(),
        range: range.to_string(),
    }
}

fn build(doc: SkeletonDoc) -> Skeleton {
    Skeleton::from_doc(&doc).expect("built-in fixture is a valid skeleton")
}

pub fn ex43_doc(m: usize) -> SkeletonDoc {
    let mut edges = vec![
        edge("lambda".into(), 1, "00", "10"),
        edge("beta".into(), 2, "00", "01"),
    ];
    let mut squares = Vec::new();
    for i in 0..=m {
        edges.push(edge(format!("alpha_{i}"), 1, "01", "11"));
        edges.push(edge(format!("mu_{i}"), 2, "10", "11"));
        squares.push(SquareDoc {
            left: ["lambda".into(), format!("mu_{i}")],
            right: ["beta".into(), format!("alpha_{i}")],
        });
    }
    SkeletonDoc {
        k: 2,
        vertices: ["00", "01", "10", "11"].map(String::from).to_vec(),
        edges,
        squares,
    }
}

pub fn ex43(m: usize) -> Skeleton {
    build(ex43_doc(m))
}

fn loop_name(prefix: &str, i: usize, n: usize) -> String {
    if n <= 26 && prefix.is_empty() {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("{prefix}{i}")
    }
}

pub fn loops_doc(n: usize) -> SkeletonDoc {
    SkeletonDoc {
        k: 1,
        vertices: vec!["v".into()],
        edges: (0..n)
            .map(|i| edge(loop_name("", i, n), 1, "v", "v"))
            .collect(),
        squares: vec![],
    }
}

/// One vertex `v` with `n` loops `a, b, ...` of color 1.
pub fn loops(n: usize) -> Skeleton {
    build(loops_doc(n))
}

pub fn free_doc(n: usize, k: usize) -> SkeletonDoc {
    let name = |c: usize, i: usize| format!("{}{}", (b'a' + (c - 1) as u8) as char, i);
    let mut edges = Vec::new();
    for c in 1..=k {
        for i in 0..n {
            edges.push(edge(name(c, i), c, "v", "v"));
        }
    }
    let mut squares = Vec::new();
    for ci in 1..=k {
        for cj in ci + 1..=k {
            for i in 0..n {
                for j in 0..n {
                    squares.push(SquareDoc {
                        left: [name(ci, i), name(cj, j)],
                        right: [name(cj, j), name(ci, i)],
                    });
                }
            }
        }
    }
    SkeletonDoc {
        k,
        vertices: vec!["v".into()],
        edges,
        squares,
    }
}

/// One vertex with `n` loops per color (`a0, a1, ...`, `b0, b1, ...`) that all commute.
pub fn free(n: usize, k: usize) -> Skeleton {
    build(free_doc(n, k))
}

/// Cartesian product: colors of `b` are shifted past those of `a`. Vertex and
/// edge ids are `x:y` pairs.
pub fn product_doc(a: &SkeletonDoc, b: &SkeletonDoc) -> SkeletonDoc {
    let pair = |x: &str, y: &str| format!("{x}:{y}");
    let mut vertices = Vec::new();
    for u in &a.vertices {
        for x in &b.vertices {
            vertices.push(pair(u, x));
        }
    }
    let mut edges = Vec::new();
    for e in &a.edges {
        for x in &b.vertices {
            edges.push(edge(pair(&e.id, x), e.color, &pair(&e.source, x), &pair(&e.range, x)));
        }
    }
    for f in &b.edges {
        for u in &a.vertices {
            edges.push(edge(
                pair(u, &f.id),
                a.k + f.color,
                &pair(u, &f.source),
                &pair(u, &f.range),
            ));
        }
    }
    let mut squares = Vec::new();
    for s in &a.squares {
        for x in &b.vertices {
            squares.push(SquareDoc {
                left: [pair(&s.left[0], x), pair(&s.left[1], x)],
                right: [pair(&s.right[0], x), pair(&s.right[1], x)],
            });
        }
    }
    for s in &b.squares {
        for u in &a.vertices {
            squares.push(SquareDoc {
                left: [pair(u, &s.left[0]), pair(u, &s.left[1])],
                right: [pair(u, &s.right[0]), pair(u, &s.right[1])],
            });
        }
    }
    for e in &a.edges {
        for f in &b.edges {
            squares.push(SquareDoc {
                left: [pair(&e.id, &f.source), pair(&e.range, &f.id)],
                right: [pair(&e.source, &f.id), pair(&e.id, &f.range)],
            });
        }
    }
    SkeletonDoc {
        k: a.k + b.k,
        vertices,
        edges,
        squares,
    }
}

pub fn product(a: &Skeleton, b: &Skeleton) -> Skeleton {
    build(product_doc(&a.to_doc(), &b.to_doc()))
}

/// Size limits for [`random_2graph_doc`].
#[derive(Clone, Debug)]
pub struct RandomGraphParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    /// Largest multiplicity of color-1 edges between a vertex pair.
    pub max_multiplicity: u32,
    pub max_edges_per_color: usize,
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        RandomGraphParams {
            min_vertices: 2,
            max_vertices: 4,
            max_multiplicity: 2,
            max_edges_per_color: 20,
        }
    }
}

type Counts = Vec<Vec<u32>>;

fn mat_mul(a: &Counts, b: &Counts) -> Counts {
    let n = a.len();
    let mut c = vec![vec![0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn total(a: &Counts) -> usize {
    a.iter().flatten().map(|&x| x as usize).sum()
}

/// A random 2-graph. Color-2 adjacency counts are a polynomial in the
/// color-1 counts, so both composite counts agree for every vertex pair; the
/// squares are a uniformly random bijection within each vertex pair.
pub fn random_2graph_doc<R: Rng + ?Sized>(rng: &mut R, params: &RandomGraphParams) -> SkeletonDoc {
    loop {
        let n = rng.gen_range(params.min_vertices..=params.max_vertices);
        let a1: Counts = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.45) {
                            rng.gen_range(1..=params.max_multiplicity)
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        let ident: Counts = (0..n)
            .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
            .collect();
        let sum = |x: &Counts, y: &Counts| -> Counts {
            x.iter()
                .zip(y)
                .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect())
                .collect()
        };
        let a2 = match rng.gen_range(0..5) {
            0 => a1.clone(),
            1 => sum(&a1, &ident),
            2 => ident.clone(),
            3 => mat_mul(&a1, &a1),
            _ => sum(&a1, &a1),
        };
        let (t1, t2) = (total(&a1), total(&a2));
        if t1 == 0 || t2 == 0 || t1 > params.max_edges_per_color || t2 > params.max_edges_per_color {
            continue;
        }
        return doc_from_counts(rng, &a1, &a2);
    }
}

fn doc_from_counts<R: Rng + ?Sized>(rng: &mut R, a1: &Counts, a2: &Counts) -> SkeletonDoc {
    let n = a1.len();
    let vname = |i: usize| format!("v{i}");
    let mut edges = Vec::new();
    // (color, source, range) -> edge ids
    let mut by_ends: BTreeMap<(usize, usize, usize), Vec<String>> = BTreeMap::new();
    for (color, counts, prefix) in [(1, a1, "a"), (2, a2, "b")] {
        let mut next = 0;
        for (i, row) in counts.iter().enumerate() {
            for (j, &count) in row.iter().enumerate() {
                for _ in 0..count {
                    let id = format!("{prefix}{next}");
                    next += 1;
                    edges.push(edge(id.clone(), color, &vname(i), &vname(j)));
                    by_ends.entry((color, i, j)).or_default().push(id);
                }
            }
        }
    }
    let get = |c: usize, i: usize, j: usize| by_ends.get(&(c, i, j)).cloned().unwrap_or_default();
    let mut squares = Vec::new();
    for u in 0..n {
        for w in 0..n {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for x in 0..n {
                for f in get(1, u, x) {
                    for g in get(2, x, w) {
                        left.push([f.clone(), g]);
                    }
                }
                for g in get(2, u, x) {
                    for f in get(1, x, w) {
                        right.push([g.clone(), f]);
                    }
                }
            }
            debug_assert_eq!(left.len(), right.len());
            right.shuffle(rng);
            for (l, r) in left.into_iter().zip(right) {
                squares.push(SquareDoc { left: l, right: r });
            }
        }
    }
    SkeletonDoc {
        k: 2,
        vertices: (0..n).map(vname).collect(),
        edges,
        squares,
    }
}

pub fn random_2graph<R: Rng + ?Sized>(rng: &mut R, params: &RandomGraphParams) -> Skeleton {
    build(random_2graph_doc(rng, params))
}

/// A random 1-graph containing a directed cycle through all its vertices, so
/// every vertex has an edge to a different vertex.
pub fn random_cycle_doc<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> SkeletonDoc {
    let len = rng.gen_range(2..=max_len.max(2));
    let vname = |i: usize| format!("c{i}");
    let mut edges: Vec<EdgeDoc> = (0..len)
        .map(|i| edge(format!("h{i}"), 1, &vname(i), &vname((i + 1) % len)))
        .collect();
    for _ in 0..rng.gen_range(0..=2) {
        let (s, r) = (rng.gen_range(0..len), rng.gen_range(0..len));
        edges.push(edge(format!("h{}", edges.len()), 1, &vname(s), &vname(r)));
    }
    SkeletonDoc {
        k: 1,
        vertices: (0..len).map(vname).collect(),
        edges,
        squares: vec![],
    }
}

/// A random 3-graph: a random 2-graph times a random cycle-bearing 1-graph.
/// Some vertex pair is guaranteed to carry at least two color-(1,2) paths, so
/// [`square_transpositions_of_colors`] for `(1, 2)` is nonempty.
pub fn random_3graph_doc<R: Rng + ?Sized>(rng: &mut R) -> SkeletonDoc {
    let params = RandomGraphParams {
        min_vertices: 1,
        max_vertices: 3,
        max_multiplicity: 2,
        max_edges_per_color: 6,
    };
    loop {
        let base = random_2graph_doc(rng, &params);
        let doc = product_doc(&base, &random_cycle_doc(rng, 3));
        if !square_transpositions_of_colors(&doc, 1, 2).is_empty() {
            return doc;
        }
    }
}

/// All skeletons obtained by exchanging the right sides of two squares with
/// the same colors and endpoints. This keeps every structural check intact,
/// so only associativity can detect the change.
pub fn square_transpositions(doc: &SkeletonDoc) -> Vec<SkeletonDoc> {
    transpositions_where(doc, |_, _| true)
}

/// The transpositions of [`square_transpositions`] restricted to squares of
/// colors `(i, j)`.
pub fn square_transpositions_of_colors(doc: &SkeletonDoc, i: usize, j: usize) -> Vec<SkeletonDoc> {
    transpositions_where(doc, |a, b| (a, b) == (i, j))
}

fn transpositions_where(doc: &SkeletonDoc, keep: impl Fn(usize, usize) -> bool) -> Vec<SkeletonDoc> {
    let info: BTreeMap<&str, &EdgeDoc> = doc.edges.iter().map(|e| (e.id.as_str(), e)).collect();
    let key = |s: &SquareDoc| {
        let (f, g) = (info[s.left[0].as_str()], info[s.left[1].as_str()]);
        (f.color, g.color, f.source.clone(), g.range.clone())
    };
    let mut out = Vec::new();
    for i in 0..doc.squares.len() {
        for j in i + 1..doc.squares.len() {
            let (ki, kj) = (key(&doc.squares[i]), key(&doc.squares[j]));
            if ki == kj && keep(ki.0, ki.1) && doc.squares[i].right != doc.squares[j].right {
                let mut perturbed = doc.clone();
                let tmp = perturbed.squares[i].right.clone();
                perturbed.squares[i].right = perturbed.squares[j].right.clone();
                perturbed.squares[j].right = tmp;
                out.push(perturbed);
            }
        }
    }
    out
}

/// A uniformly chosen path among those of a random degree `<= max_degree`.
pub fn random_path<R: Rng + ?Sized>(
    sk: &Skeleton,
    rng: &mut R,
    max_degree: &Degree,
    src: Option<VertexId>,
) -> Path {
    let degrees = max_degree.lower_box();
    for _ in 0..16 {
        let n = degrees.choose(rng).expect("lower box is nonempty");
        let candidates = sk.enumerate_paths(n, src);
        if let Some(p) = candidates.choose(rng) {
            return p.clone();
        }
    }
    let v = src.unwrap_or_else(|| VertexId(rng.gen_range(0..sk.vertex_count() as u32)));
    sk.vertex_path(v)
}

/// A random set of at most `max_paths` paths from one or two sources, closed
/// under taking source vertices.
pub fn random_admissible_set<R: Rng + ?Sized>(
    sk: &Skeleton,
    rng: &mut R,
    max_paths: usize,
    max_degree: &Degree,
) -> Vec<Path> {
    let nsrc = if sk.vertex_count() > 1 && rng.gen_bool(0.25) { 2 } else { 1 };
    let mut sources: Vec<VertexId> = sk.vertices().collect();
    sources.shuffle(rng);
    sources.truncate(nsrc);
    let mut set = BTreeSet::new();
    for _ in 0..rng.gen_range(1..=max_paths.max(1)) {
        let v = *sources.choose(rng).expect("at least one source");
        set.insert(random_path(sk, rng, max_degree, Some(v)));
    }
    let vertices: Vec<Path> = set.iter().map(|p| sk.vertex_path(p.source())).collect();
    set.extend(vertices);
    set.into_iter().collect()
}
