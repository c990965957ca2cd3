//! Minimal common extensions, the `∨F` closure, finite-alignment statistics
//! and the avoiding-path search.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::degree::Degree;
use crate::paths::Path;
use crate::skeleton::{EdgeId, Skeleton, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignmentError {
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("malformed generator sets: {0}")]
    InvalidSets(String),
}

/// `MCE(μ, ν)` together with the pair it was computed for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MceSet {
    pub pair: (Path, Path),
    /// Sorted, duplicate-free.
    pub extensions: Vec<Path>,
}

/// A finite set `F` and its closure `∨F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VeeClosure {
    pub base: BTreeSet<Path>,
    pub closure: BTreeSet<Path>,
}

impl VeeClosure {
    pub fn contains(&self, p: &Path) -> bool {
        self.closure.contains(p)
    }
}

/// Finite-alignment statistics for a skeleton.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlignmentReport {
    /// Always true for a finite skeleton.
    pub finitely_aligned: bool,
    pub max_generator_mce: usize,
    pub argmax: Option<[String; 2]>,
    /// Generator pairs (distinct colors, common source) with nonempty MCE.
    pub generator_pairs: Vec<PairCount>,
    pub bound: Degree,
    pub max_bounded_mce: usize,
    pub bounded_argmax: Option<[String; 2]>,
    pub bounded_pairs_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCount {
    pub pair: [String; 2],
    pub mce: usize,
}

impl Skeleton {
    /// `MCE(μ, ν)` by depth-first extension in ascending color order, pruning
    /// partial paths whose overlap with `μ` or `ν` disagrees.
    pub fn mce(&self, mu: &Path, nu: &Path) -> MceSet {
        MceSet {
            pair: (mu.clone(), nu.clone()),
            extensions: self.mce_paths(mu, nu),
        }
    }

    pub fn mce_paths(&self, mu: &Path, nu: &Path) -> Vec<Path> {
        if mu.source() != nu.source() {
            return Vec::new();
        }
        if nu.degree().le(mu.degree()) {
            return self.extension_or_empty(mu, nu);
        }
        if mu.degree().le(nu.degree()) {
            return self.extension_or_empty(nu, mu);
        }
        let target = mu.degree().join(nu.degree());
        let word: Vec<usize> = target.sorted_colors().collect();
        let mut prefix_cache: HashMap<(bool, Degree), Path> = HashMap::new();
        let mut out = Vec::new();
        let mut stack: Vec<Vec<EdgeId>> = vec![Vec::new()];
        while let Some(edges) = stack.pop() {
            let at = edges
                .last()
                .map_or(mu.source(), |&e| self.edge(e).range);
            if edges.len() == word.len() {
                out.push(self.path_from_edges(&edges).unwrap_or_else(|| self.vertex_path(at)));
                continue;
            }
            for &e in self.out_edges(at, word[edges.len()]).iter().rev() {
                let mut next = edges.clone();
                next.push(e);
                let partial = self
                    .path_from_edges(&next)
                    .expect("extension of a composable word");
                if self.agrees(&partial, mu, false, &mut prefix_cache)
                    && self.agrees(&partial, nu, true, &mut prefix_cache)
                {
                    stack.push(next);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn extension_or_empty(&self, long: &Path, short: &Path) -> Vec<Path> {
        if self.is_prefix(short, long) {
            vec![long.clone()]
        } else {
            Vec::new()
        }
    }

    fn agrees(
        &self,
        partial: &Path,
        target: &Path,
        which: bool,
        cache: &mut HashMap<(bool, Degree), Path>,
    ) -> bool {
        let m = partial.degree().meet(target.degree());
        if m.is_zero() {
            return true;
        }
        let ours = self.prefix(partial, &m).expect("meet is below degree");
        let theirs = cache
            .entry((which, m.clone()))
            .or_insert_with(|| self.prefix(target, &m).expect("meet is below degree"));
        &ours == theirs
    }

    /// `MCE(G)`: all paths of degree `⋁ d(α)` extending every `α ∈ G`.
    pub fn mce_family(&self, g: &[Path]) -> Vec<Path> {
        let Some((first, rest)) = g.split_first() else {
            return Vec::new();
        };
        let mut current = vec![first.clone()];
        for alpha in rest {
            let next: BTreeSet<Path> = current
                .iter()
                .flat_map(|beta| self.mce_paths(beta, alpha))
                .collect();
            current = next.into_iter().collect();
            if current.is_empty() {
                break;
            }
        }
        current
    }

    /// `∨F`, the union of `MCE(G)` over nonempty `G ⊆ F`.
    ///
    /// Panics if `F` has more than 20 distinct elements.
    pub fn vee(&self, f: &[Path]) -> VeeClosure {
        let base: BTreeSet<Path> = f.iter().cloned().collect();
        let items: Vec<&Path> = base.iter().collect();
        let n = items.len();
        assert!(n <= 20, "vee closure over {n} paths is too large");
        let mut cache: HashMap<(Path, Path), Vec<Path>> = HashMap::new();
        let mut family: Vec<Vec<Path>> = vec![Vec::new(); 1 << n];
        let mut closure = BTreeSet::new();
        for mask in 1usize..(1 << n) {
            let high = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
            let rest = mask ^ (1 << high);
            let members = if rest == 0 {
                vec![items[high].clone()]
            } else {
                let mut acc = BTreeSet::new();
                for beta in &family[rest] {
                    let key = (beta.clone(), items[high].clone());
                    let ext = cache
                        .entry(key)
                        .or_insert_with(|| self.mce_paths(beta, items[high]));
                    acc.extend(ext.iter().cloned());
                }
                acc.into_iter().collect()
            };
            closure.extend(members.iter().cloned());
            family[mask] = members;
        }
        VeeClosure { base, closure }
    }

    /// Generator-pair and bounded MCE statistics.
    pub fn is_finitely_aligned(&self, bound: &Degree) -> AlignmentReport {
        let lit = |p: &Path| self.literal(p).to_string();
        let edges: Vec<Path> = self.edge_ids().map(|e| self.edge_path(e)).collect();
        let generator: Vec<(usize, usize, usize)> = (0..edges.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let edges = &edges;
                (0..edges.len()).filter_map(move |j| {
                    let (a, b) = (&edges[i], &edges[j]);
                    let (ca, cb) = (self.edge(a.edges()[0]).color, self.edge(b.edges()[0]).color);
                    if ca < cb && a.source() == b.source() {
                        let n = self.mce_paths(a, b).len();
                        (n > 0).then_some((i, j, n))
                    } else {
                        None
                    }
                })
            })
            .collect();
        let mut max_generator_mce = 0;
        let mut argmax = None;
        let mut generator_pairs = Vec::new();
        for &(i, j, n) in &generator {
            if n > max_generator_mce {
                max_generator_mce = n;
                argmax = Some([lit(&edges[i]), lit(&edges[j])]);
            }
            generator_pairs.push(PairCount {
                pair: [lit(&edges[i]), lit(&edges[j])],
                mce: n,
            });
        }

        let paths = self.paths_up_to(bound, None);
        let bounded: Vec<(usize, usize, usize)> = (0..paths.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let paths = &paths;
                (i..paths.len())
                    .filter(move |&j| paths[i].source() == paths[j].source())
                    .map(move |j| (i, j, self.mce_paths(&paths[i], &paths[j]).len()))
            })
            .collect();
        let mut max_bounded_mce = 0;
        let mut bounded_argmax = None;
        for &(i, j, n) in &bounded {
            if n > max_bounded_mce {
                max_bounded_mce = n;
                bounded_argmax = Some([lit(&paths[i]), lit(&paths[j])]);
            }
        }
        AlignmentReport {
            finitely_aligned: true,
            max_generator_mce,
            argmax,
            generator_pairs,
            bound: bound.clone(),
            max_bounded_mce,
            bounded_argmax,
            bounded_pairs_checked: bounded.len(),
        }
    }

    /// The pairs `(μ1·σ(p, p∨q), ν2·σ(q, p∨q))` for `σ ∈ MCE(μ2, ν1)`, where
    /// `d(μ1) = d(μ2) = p` and `d(ν1) = d(ν2) = q`. Terms with mismatched
    /// endpoints are dropped.
    pub fn compose_rank_one(
        &self,
        mu1: &Path,
        mu2: &Path,
        nu1: &Path,
        nu2: &Path,
    ) -> Result<Vec<(Path, Path)>, AlignmentError> {
        if mu1.degree() != mu2.degree() {
            return Err(AlignmentError::DegreeMismatch(format!(
                "{} and {} have different degrees",
                self.literal(mu1),
                self.literal(mu2)
            )));
        }
        if nu1.degree() != nu2.degree() {
            return Err(AlignmentError::DegreeMismatch(format!(
                "{} and {} have different degrees",
                self.literal(nu1),
                self.literal(nu2)
            )));
        }
        let (p, q) = (mu2.degree(), nu1.degree());
        let pq = p.join(q);
        let mut out = Vec::new();
        for sigma in self.mce_paths(mu2, nu1) {
            let left_tail = self.segment(&sigma, p, &pq).expect("p <= p v q");
            let right_tail = self.segment(&sigma, q, &pq).expect("q <= p v q");
            if let (Some(l), Some(r)) = (
                self.compose(mu1, &left_tail),
                self.compose(nu2, &right_tail),
            ) {
                out.push((l, r));
            }
        }
        Ok(out)
    }

    /// A path `μ` of degree `(1, ..., 1)` from `v` whose color-`m` first edge
    /// avoids `G_m` for every `m`, found by depth-first search with
    /// backtracking. `None` when the skeleton has no such path.
    pub fn find_avoiding_path(
        &self,
        v: VertexId,
        sets: &[Vec<EdgeId>],
    ) -> Result<Option<Path>, AlignmentError> {
        if sets.len() != self.k() {
            return Err(AlignmentError::InvalidSets(format!(
                "expected {} edge sets, got {}",
                self.k(),
                sets.len()
            )));
        }
        for (m, set) in sets.iter().enumerate() {
            for &e in set {
                let edge = self.edge(e);
                if edge.color != m + 1 || edge.source != v {
                    return Err(AlignmentError::InvalidSets(format!(
                        "edge {} is not a color-{} edge from {}",
                        edge.id,
                        m + 1,
                        self.vertex_name(v)
                    )));
                }
            }
        }
        Ok(self.avoid_from(&self.vertex_path(v), 0, sets))
    }

    fn avoid_from(&self, mu: &Path, m: usize, sets: &[Vec<EdgeId>]) -> Option<Path> {
        if m == self.k() {
            return Some(mu.clone());
        }
        let color = m + 1;
        let unit = Degree::unit(self.k(), color);
        for &e in self.out_edges(mu.range(), color) {
            let next = self
                .compose(mu, &self.edge_path(e))
                .expect("edge leaves the range");
            let first = self.prefix(&next, &unit).expect("unit below degree");
            if sets[m].contains(&first.edges()[0]) {
                continue;
            }
            if let Some(found) = self.avoid_from(&next, m + 1, sets) {
                return Some(found);
            }
        }
        None
    }
}
