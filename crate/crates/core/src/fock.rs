//! The Fock representation `S_λ e_μ = e_{λμ}` truncated to paths of degree
//! at most a bound `N`.
//!
//! Every relation is compared exactly on the columns `e_μ` of an interior
//! subspace `d(μ) <= N - M`, where the margin `M` is the degree support of
//! the identity; outside it the truncation loses terms.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::degree::Degree;
use crate::paths::Path;
use crate::skeleton::{EdgeId, Skeleton, VertexId};
use crate::tck::{FormalElement, Tck};

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("degree {degree:?} of {path} exceeds the bound {bound:?}")]
    DegreeExceedsBound {
        path: String,
        degree: Degree,
        bound: Degree,
    },
    #[error("margin {margin:?} exceeds the bound {bound:?}")]
    MarginExceedsBound { margin: Degree, bound: Degree },
    #[error("malformed sets: {0}")]
    MalformedSets(String),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("bound has rank {0}, skeleton has rank {1}")]
    RankMismatch(usize, usize),
}

/// A sparse real matrix on the truncated path basis, stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    dim: usize,
    /// Per column, `(row, value)` pairs sorted by row with no zeros.
    cols: Vec<Vec<(usize, f64)>>,
}

impl FockOperator {
    pub fn zero(dim: usize) -> Self {
        FockOperator {
            dim,
            cols: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        FockOperator {
            dim,
            cols: (0..dim).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Sums duplicate entries and drops zeros.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut raw: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside dimension {dim}");
            raw[c].push((r, v));
        }
        FockOperator {
            dim,
            cols: raw.into_iter().map(normalize_column).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn column(&self, c: usize) -> &[(usize, f64)] {
        &self.cols[c]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.cols[c]
            .binary_search_by_key(&r, |&(row, _)| row)
            .map_or(0.0, |i| self.cols[c][i].1)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut col: Vec<(usize, f64)> = a.clone();
                col.extend(b.iter().map(|&(r, v)| (r, sign * v)));
                normalize_column(col)
            })
            .collect();
        FockOperator { dim: self.dim, cols }
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.dim);
        }
        FockOperator {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|&(r, v)| (r, v * s)).collect())
                .collect(),
        }
    }

    /// The product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![0.0; self.dim];
        let mut touched = Vec::new();
        let cols = other
            .cols
            .iter()
            .map(|bcol| {
                for &(k, bv) in bcol {
                    for &(r, av) in &self.cols[k] {
                        if acc[r] == 0.0 {
                            touched.push(r);
                        }
                        acc[r] += av * bv;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let col = touched
                    .iter()
                    .filter_map(|&r| {
                        let v = std::mem::take(&mut acc[r]);
                        (v != 0.0).then_some((r, v))
                    })
                    .collect();
                touched.clear();
                col
            })
            .collect();
        FockOperator { dim: self.dim, cols }
    }

    pub fn transpose(&self) -> Self {
        Self::from_entries(self.dim, self.entries().map(|(r, c, v)| (c, r, v)))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (c, col) in self.cols.iter().enumerate() {
            if x[c] != 0.0 {
                for &(r, v) in col {
                    y[r] += v * x[c];
                }
            }
        }
        y
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(r, v)| v * x[r]).sum())
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(r, c, _)| r == c)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `Σ_γ P_γ A P_γ` over basis vectors: keeps the diagonal entries.
    pub fn diagonal_compression(&self) -> Self {
        Self::from_entries(self.dim, self.entries().filter(|(r, c, _)| r == c))
    }

    /// Keeps the columns selected by `keep`.
    pub fn restrict_columns(&self, keep: impl Fn(usize) -> bool) -> Self {
        FockOperator {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .enumerate()
                .map(|(c, col)| if keep(c) { col.clone() } else { Vec::new() })
                .collect(),
        }
    }

    /// First column `c` with `keep(c)` where the two operators differ.
    pub fn first_difference(&self, other: &Self, keep: impl Fn(usize) -> bool) -> Option<usize> {
        (0..self.dim).find(|&c| keep(c) && self.cols[c] != other.cols[c])
    }
}

fn normalize_column(mut col: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    col.sort_by_key(|&(r, _)| r);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(col.len());
    for (r, v) in col {
        match out.last_mut() {
            Some((lr, lv)) if *lr == r => *lv += v,
            _ => out.push((r, v)),
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    out
}

/// Largest singular value estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const NORM_ITERATION_CAP: usize = 10_000;
pub const DIAGONAL_TOL: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-6;

const POWER_SEED: u64 = 0x6b67_7261_7068;

/// `‖A‖` by power iteration on `AᵀA` from a fixed pseudo-random start, or the
/// exact largest absolute entry when `A` is diagonal.
pub fn operator_norm(a: &FockOperator, tol: f64) -> Result<NormEstimate, FockError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(FockError::BadTolerance(tol));
    }
    if a.is_diagonal() {
        let value = a.entries().map(|(_, _, v)| v.abs()).fold(0.0, f64::max);
        return Ok(NormEstimate {
            value,
            iterations: 0,
            converged: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut x: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(0.5..1.5)).collect();
    normalize(&mut x);
    let mut theta = 0.0;
    for it in 1..=NORM_ITERATION_CAP {
        let y = a.apply_transpose(&a.apply(&x));
        theta = dot(&x, &y);
        let residual: f64 = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| (yi - theta * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        let ny = dot(&y, &y).sqrt();
        if ny == 0.0 {
            return Ok(NormEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        if residual <= tol * theta {
            return Ok(NormEstimate {
                value: theta.max(0.0).sqrt(),
                iterations: it,
                converged: true,
            });
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    Ok(NormEstimate {
        value: theta.max(0.0).sqrt(),
        iterations: NORM_ITERATION_CAP,
        converged: false,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// The basis vectors `e_μ` with `d(μ) <= N - margin`.
#[derive(Clone, Debug)]
pub struct InteriorSubspace {
    pub margin: Degree,
    members: Vec<bool>,
}

impl InteriorSubspace {
    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    InteriorPass,
    Fail,
}

impl Status {
    pub fn is_pass(self) -> bool {
        matches!(self, Status::Pass | Status::InteriorPass)
    }
}

/// One relation's verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RelationReport {
    pub relation: String,
    pub status: Status,
    pub margin: Degree,
    pub witness: Option<String>,
    pub residual_norm: f64,
    pub instances: usize,
}

/// Status of the exhaustive-sum relation at one vertex and degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CuntzPimsnerStatus {
    Pass,
    Fail,
    /// No paths of this degree leave the vertex.
    Sink,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CuntzPimsnerEntry {
    pub vertex: String,
    pub degree: Degree,
    pub status: CuntzPimsnerStatus,
    /// Basis vectors in the support of `(S_v − Σ S_λS_λ*) e_v`.
    pub defect: Vec<String>,
    pub defect_is_e_v: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RelationsReport {
    pub relations: Vec<RelationReport>,
    pub cuntz_pimsner: Vec<CuntzPimsnerEntry>,
}

impl RelationsReport {
    /// Whether the Toeplitz relations (1) to (5) hold.
    pub fn toeplitz_passed(&self) -> bool {
        self.relations
            .iter()
            .filter(|r| r.relation != RELATION_NAMES[5])
            .all(|r| r.status.is_pass())
    }
}

pub const RELATION_NAMES: [&str; 6] = [
    "1-vertex-projections",
    "2-multiplicativity",
    "3-isometry",
    "4-range-domination",
    "5-nica-covariance",
    "6-cuntz-pimsner",
];

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FaithfulnessReport {
    pub vertex: String,
    pub nonzero: bool,
    pub diagonal_projection: bool,
    pub witness: Option<String>,
    pub vertex_survives: bool,
    /// The generator sets `G_m` of the reduction to edges.
    pub generator_sets: Vec<Vec<String>>,
    pub generator_product_nonzero: bool,
    /// The reduced product is dominated by the original one.
    pub reduction_dominated: bool,
}

/// Symbolic residual compared with its Fock image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualClass {
    Zero,
    Nonzero,
    /// Symbolically nonzero but zero in the truncated Fock space.
    FockInvisible,
}

/// The truncated Fock space with basis `{e_μ : d(μ) <= N}`.
pub struct FockSpace<'s> {
    sk: &'s Skeleton,
    bound: Degree,
    basis: Vec<Path>,
    index: HashMap<Path, usize>,
    /// For each basis path `μ`, the pairs `(μτ, τ)` within the basis.
    extensions: Vec<Vec<(usize, usize)>>,
}

impl<'s> FockSpace<'s> {
    pub fn new(sk: &'s Skeleton, bound: &Degree) -> Result<Self, FockError> {
        if bound.rank() != sk.k() {
            return Err(FockError::RankMismatch(bound.rank(), sk.k()));
        }
        let basis = sk.paths_up_to(bound, None);
        let index: HashMap<Path, usize> = basis.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut extensions = vec![Vec::new(); basis.len()];
        for (i, p) in basis.iter().enumerate() {
            for a in p.degree().lower_box() {
                let head = sk.prefix(p, &a).expect("a <= d(p)");
                let tail = sk.suffix(p, &a).expect("a <= d(p)");
                extensions[index[&head]].push((i, index[&tail]));
            }
        }
        Ok(FockSpace {
            sk,
            bound: bound.clone(),
            basis,
            index,
            extensions,
        })
    }

    pub fn skeleton(&self) -> &'s Skeleton {
        self.sk
    }

    pub fn bound(&self) -> &Degree {
        &self.bound
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Path] {
        &self.basis
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn interior(&self, margin: &Degree) -> Result<InteriorSubspace, FockError> {
        let room = self
            .bound
            .checked_sub(margin)
            .ok_or_else(|| FockError::MarginExceedsBound {
                margin: margin.clone(),
                bound: self.bound.clone(),
            })?;
        Ok(InteriorSubspace {
            margin: margin.clone(),
            members: self.basis.iter().map(|p| p.degree().le(&room)).collect(),
        })
    }

    fn check_bound(&self, p: &Path) -> Result<usize, FockError> {
        self.index_of(p).ok_or_else(|| FockError::DegreeExceedsBound {
            path: self.sk.literal(p).to_string(),
            degree: p.degree().clone(),
            bound: self.bound.clone(),
        })
    }

    /// `S_λ`.
    pub fn generator(&self, lambda: &Path) -> Result<FockOperator, FockError> {
        self.check_bound(lambda)?;
        let entries = self.basis.iter().enumerate().filter_map(|(c, mu)| {
            let prod = self.sk.compose(lambda, mu)?;
            self.index_of(&prod).map(|r| (r, c, 1.0))
        });
        Ok(FockOperator::from_entries(self.dim(), entries))
    }

    /// `S_λ S_λ*`, the projection onto paths with prefix `λ`.
    pub fn range_projection(&self, lambda: &Path) -> Result<FockOperator, FockError> {
        let i = self.check_bound(lambda)?;
        Ok(FockOperator::from_entries(
            self.dim(),
            self.extensions[i].iter().map(|&(full, _)| (full, full, 1.0)),
        ))
    }

    /// `Σ coeff · S_λ S_μ*`.
    pub fn evaluate(&self, a: &FormalElement) -> Result<FockOperator, FockError> {
        let mut entries = Vec::new();
        for (t, c) in a.terms() {
            self.check_bound(&t.left)?;
            let mu = self.check_bound(&t.right)?;
            let c = c.to_f64().expect("finite coefficient");
            for &(col, tail) in &self.extensions[mu] {
                let target = self
                    .sk
                    .compose(&t.left, &self.basis[tail])
                    .expect("r(λ) = r(μ) = s(τ)");
                if let Some(row) = self.index_of(&target) {
                    entries.push((row, col, c));
                }
            }
        }
        Ok(FockOperator::from_entries(self.dim(), entries))
    }

    fn vertex_index(&self, v: VertexId) -> usize {
        self.index[&self.sk.vertex_path(v)]
    }

    fn literal(&self, i: usize) -> String {
        self.sk.literal(&self.basis[i]).to_string()
    }

    /// Compares `lhs` with `rhs` on the interior of `margin`; returns the
    /// first differing column and the norm of the restricted difference.
    fn compare(
        &self,
        lhs: &FockOperator,
        rhs: &FockOperator,
        interior: &InteriorSubspace,
    ) -> Option<(usize, f64)> {
        let col = lhs.first_difference(rhs, |c| interior.contains(c))?;
        let diff = lhs.sub(rhs).restrict_columns(|c| interior.contains(c));
        let norm = operator_norm(&diff, DEFAULT_TOL).map_or(f64::NAN, |n| n.value);
        Some((col, norm))
    }

    /// Checks the Toeplitz-Cuntz-Krieger relations (1) to (5) and reports the
    /// exhaustive-sum relation (6) per vertex and degree.
    pub fn check_relations(&self) -> RelationsReport {
        let k = self.sk.k();
        let zero = Degree::zero(k);
        let full = self.interior(&zero).expect("zero margin");
        let generators: Vec<FockOperator> = self
            .basis
            .par_iter()
            .map(|p| self.generator(p).expect("basis path"))
            .collect();
        let adjoints: Vec<FockOperator> = generators.par_iter().map(FockOperator::transpose).collect();
        let vertices: Vec<VertexId> = self.sk.vertices().collect();
        let mut relations = Vec::new();

        // (1)
        let mut instances = 0;
        let mut failure = None;
        for &v in &vertices {
            let sv = &generators[self.vertex_index(v)];
            instances += 1;
            if sv != &sv.transpose() {
                failure.get_or_insert((self.vertex_index(v), f64::NAN));
            }
            for &w in &vertices {
                instances += 1;
                let sw = &generators[self.vertex_index(w)];
                let expected = if v == w { sv.clone() } else { FockOperator::zero(self.dim()) };
                if let Some((_, n)) = self.compare(&sv.mul(sw), &expected, &full) {
                    failure.get_or_insert((self.vertex_index(v), n));
                }
            }
        }
        relations.push(self.summarize(0, instances, zero.clone(), failure));

        // (2)
        let n = self.dim();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.basis[i].degree().add(self.basis[j].degree()).le(&self.bound))
            .collect();
        let failures: Vec<(usize, (usize, f64))> = pairs
            .par_iter()
            .enumerate()
            .filter_map(|(idx, &(i, j))| {
                let lhs = generators[i].mul(&generators[j]);
                let rhs = match self.sk.compose(&self.basis[i], &self.basis[j]) {
                    Some(p) => generators[self.index[&p]].clone(),
                    None => FockOperator::zero(n),
                };
                self.compare(&lhs, &rhs, &full).map(|(_, norm)| (idx, (i, norm)))
            })
            .collect();
        relations.push(self.summarize(1, pairs.len(), zero.clone(), failures.into_iter().min_by_key(|f| f.0).map(|f| f.1)));

        // (3)
        let margin3 = Degree::join_all(k, self.basis.iter().map(|p| p.degree()));
        let failures: Vec<(usize, (usize, f64))> = (0..n)
            .into_par_iter()
            .filter_map(|i| {
                let interior = self.interior(self.basis[i].degree()).expect("d(λ) <= N");
                let lhs = adjoints[i].mul(&generators[i]);
                let rhs = &generators[self.vertex_index(self.basis[i].range())];
                self.compare(&lhs, rhs, &interior).map(|(_, norm)| (i, (i, norm)))
            })
            .collect();
        relations.push(self.summarize(2, n, margin3, failures.into_iter().min_by_key(|f| f.0).map(|f| f.1)));

        // (4)
        let mut instances = 0;
        let mut failure = None;
        let projections: Vec<FockOperator> = (0..n)
            .into_par_iter()
            .map(|i| self.range_projection(&self.basis[i]).expect("basis path"))
            .collect();
        for p in self.bound.lower_box().into_iter().filter(|p| !p.is_zero()) {
            for &v in &vertices {
                instances += 1;
                let vi = self.vertex_index(v);
                let mut sum = FockOperator::zero(n);
                for lambda in self.sk.enumerate_paths(&p, Some(v)) {
                    sum = sum.add(&projections[self.index[&lambda]]);
                }
                let d = generators[vi].sub(&sum);
                let ok = d.is_diagonal() && d.entries().all(|(_, _, x)| x == 1.0);
                if !ok {
                    let norm = operator_norm(&d, DEFAULT_TOL).map_or(f64::NAN, |e| e.value);
                    failure.get_or_insert((vi, norm));
                }
            }
        }
        relations.push(self.summarize(3, instances, zero.clone(), failure));

        // (5)
        let tck = Tck::new(self.sk);
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let (a, b) = (&self.basis[i], &self.basis[j]);
                a.source() == b.source() && a.degree().join(b.degree()).le(&self.bound)
            })
            .collect();
        let failures: Vec<(usize, (usize, f64))> = pairs
            .par_iter()
            .enumerate()
            .filter_map(|(idx, &(i, j))| {
                let (mu, nu) = (&self.basis[i], &self.basis[j]);
                let margin = mu.degree().join(nu.degree());
                let interior = self.interior(&margin).expect("join <= N");
                let lhs = adjoints[i].mul(&generators[j]);
                let left = tck
                    .gen(&self.sk.vertex_path(mu.range()), mu)
                    .expect("same range");
                let right = tck.gen(nu, &self.sk.vertex_path(nu.range())).expect("same range");
                let rhs = self.evaluate(&tck.multiply(&left, &right)).expect("terms within the bound");
                self.compare(&lhs, &rhs, &interior).map(|(_, norm)| (idx, (i, norm)))
            })
            .collect();
        let margin5 = pairs
            .iter()
            .fold(zero.clone(), |acc, &(i, j)| {
                acc.join(self.basis[i].degree()).join(self.basis[j].degree())
            });
        relations.push(self.summarize(4, pairs.len(), margin5, failures.into_iter().min_by_key(|f| f.0).map(|f| f.1)));

        // (6)
        let mut cuntz_pimsner = Vec::new();
        for &v in &vertices {
            let vi = self.vertex_index(v);
            for p in self.bound.lower_box().into_iter().filter(|p| !p.is_zero()) {
                let paths = self.sk.enumerate_paths(&p, Some(v));
                let mut d = generators[vi].clone();
                for lambda in &paths {
                    d = d.sub(&projections[self.index[lambda]]);
                }
                let col = d.column(vi);
                let defect: Vec<String> = col.iter().map(|&(r, _)| self.literal(r)).collect();
                let defect_is_e_v = col == [(vi, 1.0)];
                let status = if paths.is_empty() {
                    CuntzPimsnerStatus::Sink
                } else if d.is_zero() {
                    CuntzPimsnerStatus::Pass
                } else {
                    CuntzPimsnerStatus::Fail
                };
                cuntz_pimsner.push(CuntzPimsnerEntry {
                    vertex: self.sk.vertex_name(v).to_string(),
                    degree: p,
                    status,
                    defect,
                    defect_is_e_v,
                });
            }
        }
        let first_fail = cuntz_pimsner
            .iter()
            .find(|e| e.status == CuntzPimsnerStatus::Fail);
        relations.push(RelationReport {
            relation: RELATION_NAMES[5].to_string(),
            status: if first_fail.is_some() { Status::Fail } else { Status::Pass },
            margin: zero,
            witness: first_fail.map(|e| e.vertex.clone()),
            residual_norm: if first_fail.is_some() { 1.0 } else { 0.0 },
            instances: cuntz_pimsner.len(),
        });

        RelationsReport {
            relations,
            cuntz_pimsner,
        }
    }

    fn summarize(
        &self,
        which: usize,
        instances: usize,
        margin: Degree,
        failure: Option<(usize, f64)>,
    ) -> RelationReport {
        let status = match failure {
            Some(_) => Status::Fail,
            None if margin.is_zero() => Status::Pass,
            None => Status::InteriorPass,
        };
        RelationReport {
            relation: RELATION_NAMES[which].to_string(),
            status,
            margin,
            witness: failure.map(|(i, _)| self.literal(i)),
            residual_norm: failure.map_or(0.0, |(_, n)| n),
            instances,
        }
    }

    /// `Σ_{μ ∈ E^p} S_μS_μ*`.
    pub fn degree_projection(&self, p: &Degree) -> Result<FockOperator, FockError> {
        let mut sum = FockOperator::zero(self.dim());
        for mu in self.sk.enumerate_paths(p, None) {
            sum = sum.add(&self.range_projection(&mu)?);
        }
        Ok(sum)
    }

    /// `(Σ_{E^p} S_μS_μ*)(Σ_{E^q} S_νS_ν*) = Σ_{E^{p∨q}} S_λS_λ*`, exactly.
    pub fn check_nica_products(&self, p: &Degree, q: &Degree) -> Result<RelationReport, FockError> {
        let join = p.join(q);
        if !join.le(&self.bound) {
            return Err(FockError::MarginExceedsBound {
                margin: join,
                bound: self.bound.clone(),
            });
        }
        let lhs = self.degree_projection(p)?.mul(&self.degree_projection(q)?);
        let rhs = self.degree_projection(&join)?;
        let full = self.interior(&Degree::zero(self.sk.k()))?;
        let failure = self.compare(&lhs, &rhs, &full);
        Ok(RelationReport {
            relation: format!("nica-product {p} {q}"),
            status: if failure.is_some() { Status::Fail } else { Status::Pass },
            margin: Degree::zero(self.sk.k()),
            witness: failure.map(|(i, _)| self.literal(i)),
            residual_norm: failure.map_or(0.0, |(_, n)| n),
            instances: 1,
        })
    }

    /// `∏_m (S_v − Σ_{λ ∈ sets[m]} S_λS_λ*)`.
    fn complement_product<'a>(
        &self,
        v: VertexId,
        sets: impl IntoIterator<Item = &'a [Path]>,
    ) -> Result<FockOperator, FockError> {
        let sv = self.generator(&self.sk.vertex_path(v))?;
        let mut prod = sv.clone();
        for set in sets {
            let mut factor = sv.clone();
            for lambda in set {
                factor = factor.sub(&self.range_projection(lambda)?);
            }
            prod = prod.mul(&factor);
        }
        Ok(prod)
    }

    /// The product `∏_{p ∈ R} (S_v − Σ_{λ ∈ F_p} S_λS_λ*)` together with its
    /// reduction to generator sets `G_m = {λ(0, e_m)}`.
    pub fn faithfulness_hypothesis(
        &self,
        v: VertexId,
        sets: &[(Degree, Vec<Path>)],
    ) -> Result<FaithfulnessReport, FockError> {
        let k = self.sk.k();
        let mut seen = HashSet::new();
        for (p, set) in sets {
            if p.rank() != k || p.is_zero() {
                return Err(FockError::MalformedSets(format!("degree {p:?} is not a nonzero element of N^{k}")));
            }
            if !seen.insert(p.clone()) {
                return Err(FockError::MalformedSets(format!("degree {p:?} appears twice")));
            }
            if !p.le(&self.bound) {
                return Err(FockError::MarginExceedsBound {
                    margin: p.clone(),
                    bound: self.bound.clone(),
                });
            }
            for lambda in set {
                if lambda.source() != v || lambda.degree() != p {
                    return Err(FockError::MalformedSets(format!(
                        "{} is not a degree-{p:?} path from {}",
                        self.sk.literal(lambda),
                        self.sk.vertex_name(v)
                    )));
                }
            }
        }
        let prod = self.complement_product(v, sets.iter().map(|(_, s)| s.as_slice()))?;
        let diagonal_projection = prod.is_diagonal() && prod.entries().all(|(_, _, x)| x == 1.0);
        let vi = self.vertex_index(v);
        let vertex_survives = prod.get(vi, vi) == 1.0;
        let witness = if vertex_survives {
            Some(vi)
        } else {
            prod.entries().find(|(r, c, _)| r == c).map(|(r, _, _)| r)
        };

        let mut generator_sets: Vec<BTreeSet<Path>> = vec![BTreeSet::new(); k];
        for (p, set) in sets {
            let m = p.coords().iter().position(|&c| c > 0).expect("nonzero degree");
            let unit = Degree::unit(k, m + 1);
            for lambda in set {
                generator_sets[m].insert(self.sk.prefix(lambda, &unit).expect("e_m <= p"));
            }
        }
        let gsets: Vec<Vec<Path>> = generator_sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let reduced = self.complement_product(v, gsets.iter().map(Vec::as_slice))?;
        let (dp, dr) = (prod.diagonal(), reduced.diagonal());
        let reduction_dominated =
            reduced.is_diagonal() && dp.iter().zip(&dr).all(|(a, b)| a >= b);
        Ok(FaithfulnessReport {
            vertex: self.sk.vertex_name(v).to_string(),
            nonzero: !prod.is_zero(),
            diagonal_projection,
            witness: witness.map(|i| self.literal(i)),
            vertex_survives,
            generator_sets: gsets
                .iter()
                .map(|s| s.iter().map(|p| self.sk.literal(p).to_string()).collect())
                .collect(),
            generator_product_nonzero: !reduced.is_zero(),
            reduction_dominated,
        })
    }

    /// `S_λS_λ* ∏_{μ ∈ F} (S_{s(λ)} − S_{λμ}S_{λμ}*)` for paths `μ` of nonzero
    /// degree leaving `r(λ)`.
    pub fn orthogonalized_range(&self, lambda: &Path, f: &[Path]) -> Result<FockOperator, FockError> {
        let sv = self.generator(&self.sk.vertex_path(lambda.source()))?;
        let mut prod = self.range_projection(lambda)?;
        for mu in f {
            if mu.source() != lambda.range() || mu.is_vertex() {
                return Err(FockError::MalformedSets(format!(
                    "{} is not a nonzero-degree path from r({})",
                    self.sk.literal(mu),
                    self.sk.literal(lambda)
                )));
            }
            let lm = self.sk.compose(lambda, mu).expect("r(λ) = s(μ)");
            prod = prod.mul(&sv.sub(&self.range_projection(&lm)?));
        }
        Ok(prod)
    }

    /// Whether `∏_m (S_v − Σ_{e ∈ G_m} S_eS_e*) S_μS_μ* = S_μS_μ*`.
    pub fn verify_avoiding_witness(
        &self,
        v: VertexId,
        sets: &[Vec<EdgeId>],
        mu: &Path,
    ) -> Result<bool, FockError> {
        let paths: Vec<Vec<Path>> = sets
            .iter()
            .map(|s| s.iter().map(|&e| self.sk.edge_path(e)).collect())
            .collect();
        let prod = self.complement_product(v, paths.iter().map(Vec::as_slice))?;
        let pm = self.range_projection(mu)?;
        Ok(prod.mul(&pm) == pm)
    }

    /// Flags symbolic residuals whose Fock image vanishes.
    pub fn classify_residual(&self, a: &FormalElement) -> Result<ResidualClass, FockError> {
        if a.is_zero() {
            return Ok(ResidualClass::Zero);
        }
        if self.evaluate(a)?.is_zero() {
            Ok(ResidualClass::FockInvisible)
        } else {
            Ok(ResidualClass::Nonzero)
        }
    }
}
