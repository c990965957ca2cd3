//! Brute-force reference computations for testing `kgraph-core`.
//!
//! Everything here works from first principles: paths are compared through
//! the full set of edge words reachable by square rewrites, extensions are
//! found by exhaustive enumeration, and operators are dense matrices built
//! straight from their defining action on basis vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use kgraph_core::fixtures::random_path;
use kgraph_core::skeleton::SkeletonDoc;
use kgraph_core::{Degree, EdgeId, FockOperator, FormalElement, Path, Skeleton, Tck, VertexId};
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;

/// Square rewrites in both directions, read off the square list.
pub fn rewrite_table(sk: &Skeleton) -> HashMap<(EdgeId, EdgeId), (EdgeId, EdgeId)> {
    let mut table = HashMap::new();
    for s in sk.squares() {
        table.insert(s.left, s.right);
        table.insert(s.right, s.left);
    }
    table
}

/// Every edge word reachable from `word` by rewriting adjacent pairs in any order.
pub fn reachable_words(sk: &Skeleton, word: &[EdgeId]) -> BTreeSet<Vec<EdgeId>> {
    let table = rewrite_table(sk);
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([word.to_vec()]);
    seen.insert(word.to_vec());
    while let Some(w) = queue.pop_front() {
        for i in 0..w.len().saturating_sub(1) {
            if let Some(&(x, y)) = table.get(&(w[i], w[i + 1])) {
                let mut next = w.clone();
                next[i] = x;
                next[i + 1] = y;
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen
}

fn colors(sk: &Skeleton, word: &[EdgeId]) -> Vec<usize> {
    word.iter().map(|&e| sk.edge(e).color).collect()
}

/// The reachable words whose color sequence equals `target`.
pub fn words_with_colors(sk: &Skeleton, word: &[EdgeId], target: &[usize]) -> Vec<Vec<EdgeId>> {
    reachable_words(sk, word)
        .into_iter()
        .filter(|w| colors(sk, w) == target)
        .collect()
}

/// The ascending-color word reachable from `word`; panics unless it is unique.
pub fn normal_form(sk: &Skeleton, word: &[EdgeId]) -> Vec<EdgeId> {
    let mut target = colors(sk, word);
    target.sort_unstable();
    let found = words_with_colors(sk, word, &target);
    assert_eq!(found.len(), 1, "factorisation is not unique for {word:?}");
    found.into_iter().next().unwrap_or_default()
}

fn path_of(sk: &Skeleton, word: &[EdgeId], source: VertexId) -> Path {
    if word.is_empty() {
        sk.vertex_path(source)
    } else {
        sk.path_from_edges(word).expect("composable word")
    }
}

/// `a·b` by concatenation and exhaustive rewriting.
pub fn compose(sk: &Skeleton, a: &Path, b: &Path) -> Option<Path> {
    if a.range() != b.source() {
        return None;
    }
    let mut word = a.edges().to_vec();
    word.extend_from_slice(b.edges());
    Some(path_of(sk, &normal_form(sk, &word), a.source()))
}

/// `p(a, b)`: the middle block of the reachable word with color sequence
/// `sorted(a) ++ sorted(b - a) ++ sorted(d(p) - b)`.
pub fn segment(sk: &Skeleton, p: &Path, a: &Degree, b: &Degree) -> Path {
    let mid = b.checked_sub(a).expect("a <= b");
    let tail = p.degree().checked_sub(b).expect("b <= d(p)");
    let target: Vec<usize> = a
        .sorted_colors()
        .chain(mid.sorted_colors())
        .chain(tail.sorted_colors())
        .collect();
    let found = words_with_colors(sk, p.edges(), &target);
    assert_eq!(found.len(), 1, "no unique factorisation");
    let w = &found[0];
    let (start, len) = (a.total() as usize, mid.total() as usize);
    let source = if start == 0 {
        p.source()
    } else {
        sk.edge(w[start - 1]).range
    };
    path_of(sk, &normal_form(sk, &w[start..start + len]), source)
}

pub fn is_prefix(sk: &Skeleton, q: &Path, p: &Path) -> bool {
    q.source() == p.source()
        && q.degree().le(p.degree())
        && &segment(sk, p, &Degree::zero(sk.k()), q.degree()) == q
}

/// All paths of degree `n` from `src`, by walking every ascending color word.
pub fn all_paths(sk: &Skeleton, n: &Degree, src: Option<VertexId>) -> Vec<Path> {
    let word: Vec<usize> = n.sorted_colors().collect();
    let mut out = Vec::new();
    let starts: Vec<VertexId> = src.map_or_else(|| sk.vertices().collect(), |v| vec![v]);
    for v in starts {
        let mut partial: Vec<(VertexId, Vec<EdgeId>)> = vec![(v, vec![])];
        for &c in &word {
            let mut next = Vec::new();
            for (at, w) in partial {
                for e in sk.edge_ids() {
                    let edge = sk.edge(e);
                    if edge.color == c && edge.source == at {
                        let mut w2 = w.clone();
                        w2.push(e);
                        next.push((edge.range, w2));
                    }
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|(_, w)| path_of(sk, &w, v)));
    }
    out.sort();
    out
}

/// `MCE(G)` by filtering every path of the joined degree.
pub fn brute_mce_family(sk: &Skeleton, g: &[Path]) -> Vec<Path> {
    let Some(first) = g.first() else {
        return Vec::new();
    };
    if g.iter().any(|p| p.source() != first.source()) {
        return Vec::new();
    }
    let join = Degree::join_all(sk.k(), g.iter().map(Path::degree));
    all_paths(sk, &join, Some(first.source()))
        .into_iter()
        .filter(|gamma| g.iter().all(|a| is_prefix(sk, a, gamma)))
        .collect()
}

/// `MCE(μ, ν)` by filtering every extension `μα` of the joined degree, each
/// built by rewriting.
pub fn brute_mce(sk: &Skeleton, mu: &Path, nu: &Path) -> Vec<Path> {
    if mu.source() != nu.source() {
        return Vec::new();
    }
    let tail = mu.degree().join(nu.degree()).checked_sub(mu.degree()).expect("join dominates");
    let mut out: Vec<Path> = all_paths(sk, &tail, Some(mu.range()))
        .iter()
        .map(|alpha| compose(sk, mu, alpha).expect("composable"))
        .filter(|gamma| is_prefix(sk, nu, gamma))
        .collect();
    out.sort();
    out
}

/// `∨F` as the union over all nonempty subsets.
pub fn brute_vee(sk: &Skeleton, f: &[Path]) -> BTreeSet<Path> {
    let f: Vec<Path> = f.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut out = BTreeSet::new();
    for mask in 1usize..(1 << f.len()) {
        let g: Vec<Path> = (0..f.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| f[i].clone())
            .collect();
        out.extend(brute_mce_family(sk, &g));
    }
    out
}

/// All pairs `(x, y)` with `d(x) = a`, `d(y) = d(p) - a` and `xy = p`.
pub fn factorizations(sk: &Skeleton, p: &Path, a: &Degree) -> Vec<(Path, Path)> {
    let rest = p.degree().checked_sub(a).expect("a <= d(p)");
    let mut out = Vec::new();
    for x in all_paths(sk, a, Some(p.source())) {
        for y in all_paths(sk, &rest, Some(x.range())) {
            if compose(sk, &x, &y).as_ref() == Some(p) {
                out.push((x.clone(), y));
            }
        }
    }
    out
}

/// Largest `|MCE(e, f)|` over edges of distinct colors, by brute force.
pub fn brute_generator_max_mce(sk: &Skeleton) -> usize {
    let edges: Vec<Path> = sk.edge_ids().map(|e| sk.edge_path(e)).collect();
    let mut best = 0;
    for a in &edges {
        for b in &edges {
            if a.degree() != b.degree() {
                best = best.max(brute_mce(sk, a, b).len());
            }
        }
    }
    best
}

/// Number of composable triples whose two swap chains disagree, computed on
/// the document's strings.
pub fn doc_associativity_violations(doc: &SkeletonDoc) -> usize {
    let mut table: HashMap<(&str, &str), (&str, &str)> = HashMap::new();
    for s in &doc.squares {
        let l = (s.left[0].as_str(), s.left[1].as_str());
        let r = (s.right[0].as_str(), s.right[1].as_str());
        table.insert(l, r);
        table.insert(r, l);
    }
    let chain = |w: [&str; 3], pos: [usize; 3]| -> Option<Vec<String>> {
        let mut w: Vec<&str> = w.to_vec();
        for p in pos {
            let &(x, y) = table.get(&(w[p], w[p + 1]))?;
            w[p] = x;
            w[p + 1] = y;
        }
        Some(w.into_iter().map(String::from).collect())
    };
    let mut count = 0;
    for f in &doc.edges {
        for g in &doc.edges {
            for h in &doc.edges {
                let (cf, cg, ch) = (f.color, g.color, h.color);
                if cf < cg && cg < ch && f.range == g.source && g.range == h.source {
                    let w = [f.id.as_str(), g.id.as_str(), h.id.as_str()];
                    let a = chain(w, [0, 1, 0]);
                    if a.is_none() || a != chain(w, [1, 0, 1]) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// A dense real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zero(n: usize) -> Self {
        Dense {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn from_sparse(a: &FockOperator) -> Self {
        let mut d = Dense::zero(a.dim());
        for (r, c, v) in a.entries() {
            d.set(r, c, v);
        }
        d
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn transpose(&self) -> Dense {
        let mut out = Dense::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Columns `c` with `keep(c)` on which the matrices differ.
    pub fn differing_columns(&self, other: &Dense, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        (0..self.n)
            .filter(|&c| keep(c) && (0..self.n).any(|r| self.get(r, c) != other.get(r, c)))
            .collect()
    }
}

/// `S_λ` straight from `S_λ e_μ = e_{λμ}` over a given basis.
pub fn dense_generator(sk: &Skeleton, basis: &[Path], lambda: &Path) -> Dense {
    let index: BTreeMap<&Path, usize> = basis.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut d = Dense::zero(basis.len());
    for (c, mu) in basis.iter().enumerate() {
        if let Some(lm) = compose(sk, lambda, mu) {
            if let Some(&r) = index.get(&lm) {
                d.set(r, c, 1.0);
            }
        }
    }
    d
}

/// `Σ c · S_λ S_μ*` with dense generator matrices.
pub fn dense_evaluate(sk: &Skeleton, basis: &[Path], a: &FormalElement) -> Dense {
    let mut out = Dense::zero(basis.len());
    for (t, c) in a.terms() {
        let c = c.to_f64().expect("finite coefficient");
        let prod = dense_generator(sk, basis, &t.left).matmul(&dense_generator(sk, basis, &t.right).transpose());
        for i in 0..out.data.len() {
            out.data[i] += c * prod.data[i];
        }
    }
    out
}

/// A random element with at most `max_terms` terms and small integer
/// coefficients, built from paths of degree `<= max_degree`.
pub fn random_element<R: Rng + ?Sized>(
    tck: &Tck,
    rng: &mut R,
    max_terms: usize,
    max_degree: &Degree,
) -> FormalElement {
    let sk = tck.skeleton();
    let mut out = FormalElement::zero();
    let n = rng.gen_range(1..=max_terms);
    let mut attempts = 0;
    while out.len() < n && attempts < 50 * n {
        attempts += 1;
        let lambda = random_path(sk, rng, max_degree, None);
        let candidates: Vec<Path> = sk
            .paths_up_to(max_degree, None)
            .into_iter()
            .filter(|mu| mu.range() == lambda.range())
            .collect();
        let Some(mu) = candidates.choose(rng) else {
            continue;
        };
        let c = loop {
            let c: i64 = rng.gen_range(-3..=3);
            if c != 0 {
                break c;
            }
        };
        out = &out + &tck.gen(&lambda, mu).expect("same range").scale_int(c);
    }
    out
}
