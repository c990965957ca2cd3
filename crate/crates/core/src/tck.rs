//! Exact symbolic arithmetic in the span of the symbols `s_λ s_μ*`.
//!
//! Products are expanded with the minimal-common-extension rule
//! `(s_λ s_μ*)(s_σ s_τ*) = Σ_{μα = σβ ∈ MCE(μ, σ)} s_{λα} s_{τβ}*`, and
//! coefficients are arbitrary-precision rationals, so every identity checked
//! here is exact.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::VeeClosure;
use crate::degree::Degree;
use crate::paths::{Path, PathError};
use crate::skeleton::{Skeleton, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TckError {
    #[error("range mismatch: r({left}) != r({right})")]
    RangeMismatch { left: String, right: String },
    #[error("{0} is not in the closure")]
    NotInClosure(String),
    #[error("source vertex of {0} is not in the set")]
    SourceNotInSet(String),
    #[error("{0} must be a path of nonzero degree in the set")]
    NotRemovable(String),
    #[error("no element of the closure is a prefix of {0}")]
    NoPrefix(String),
    #[error("join of prefix degrees of {0} is not attained in the closure")]
    JoinNotAttained(String),
    #[error("bad coefficient {0:?}")]
    BadCoefficient(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// The symbol `s_λ s_μ*`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub left: Path,
    pub right: Path,
}

/// A finite rational combination of symbols, without zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FormalElement {
    terms: BTreeMap<Term, BigRational>,
}

impl FormalElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, t: &Term) -> BigRational {
        self.terms.get(t).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Adds `c · t`; the caller guarantees `r(t.left) = r(t.right)`.
    pub fn add_term(&mut self, t: Term, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        FormalElement {
            terms: self.terms.iter().map(|(t, x)| (t.clone(), x * c)).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(c)))
    }

    /// `(s_λ s_μ*)* = s_μ s_λ*`.
    pub fn adjoint(&self) -> Self {
        FormalElement {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| {
                    (
                        Term {
                            left: t.right.clone(),
                            right: t.left.clone(),
                        },
                        c.clone(),
                    )
                })
                .collect(),
        }
    }

    /// The diagonal expectation: keeps the terms `s_λ s_λ*`.
    pub fn diag(&self) -> Self {
        FormalElement {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.left == t.right)
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
        }
    }

    /// Join of the degrees of all paths occurring in the element.
    pub fn degree_support(&self, k: usize) -> Degree {
        self.terms.keys().fold(Degree::zero(k), |acc, t| {
            acc.join(t.left.degree()).join(t.right.degree())
        })
    }

    pub fn to_doc(&self, sk: &Skeleton) -> Vec<TermDoc> {
        self.terms
            .iter()
            .map(|(t, c)| TermDoc {
                left: sk.literal(&t.left).to_string(),
                right: sk.literal(&t.right).to_string(),
                coeff: format!("{}/{}", c.numer(), c.denom()),
            })
            .collect()
    }

    pub fn from_doc(sk: &Skeleton, docs: &[TermDoc]) -> Result<Self, TckError> {
        let mut out = FormalElement::zero();
        for d in docs {
            let left = sk.parse_path(&d.left)?;
            let right = sk.parse_path(&d.right)?;
            check_ranges(sk, &left, &right)?;
            let coeff = parse_coeff(&d.coeff)?;
            out.add_term(Term { left, right }, coeff);
        }
        Ok(out)
    }

    pub fn display<'a>(&'a self, sk: &'a Skeleton) -> ElementDisplay<'a> {
        ElementDisplay { sk, element: self }
    }
}

fn parse_coeff(s: &str) -> Result<BigRational, TckError> {
    let bad = || TckError::BadCoefficient(s.to_string());
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Serialized term: `{"left": path, "right": path, "coeff": "p/q"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub left: String,
    pub right: String,
    pub coeff: String,
}

pub struct ElementDisplay<'a> {
    sk: &'a Skeleton,
    element: &'a FormalElement,
}

impl fmt::Display for ElementDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.element.is_zero() {
            return f.write_str("0");
        }
        for (i, (t, c)) in self.element.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i > 0 || c.is_negative() {
                write!(f, "{}{sign} ", if i > 0 { " " } else { "" })?;
            }
            let mag = c.abs();
            if !mag.is_one() {
                write!(f, "{mag}·")?;
            }
            write!(
                f,
                "s[{}]s[{}]*",
                self.sk.literal(&t.left),
                self.sk.literal(&t.right)
            )?;
        }
        Ok(())
    }
}

impl Add for &FormalElement {
    type Output = FormalElement;

    fn add(self, rhs: &FormalElement) -> FormalElement {
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }
}

impl Add for FormalElement {
    type Output = FormalElement;

    fn add(self, rhs: FormalElement) -> FormalElement {
        &self + &rhs
    }
}

impl Neg for &FormalElement {
    type Output = FormalElement;

    fn neg(self) -> FormalElement {
        FormalElement {
            terms: self.terms.iter().map(|(t, c)| (t.clone(), -c)).collect(),
        }
    }
}

impl Neg for FormalElement {
    type Output = FormalElement;

    fn neg(self) -> FormalElement {
        -&self
    }
}

impl Sub for &FormalElement {
    type Output = FormalElement;

    fn sub(self, rhs: &FormalElement) -> FormalElement {
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t.clone(), -c);
        }
        out
    }
}

impl Sub for FormalElement {
    type Output = FormalElement;

    fn sub(self, rhs: FormalElement) -> FormalElement {
        &self - &rhs
    }
}

fn check_ranges(sk: &Skeleton, left: &Path, right: &Path) -> Result<(), TckError> {
    if left.range() != right.range() {
        return Err(TckError::RangeMismatch {
            left: sk.literal(left).to_string(),
            right: sk.literal(right).to_string(),
        });
    }
    Ok(())
}

type Tails = Arc<Vec<(Path, Path)>>;

/// Outcome of [`Tck::partition_check`].
#[derive(Clone, Debug)]
pub struct PartitionReport {
    pub closure: VeeClosure,
    /// `Σ_λ Q_λ − Σ_{v ∈ s(F)} t_v`.
    pub residual: FormalElement,
    /// Paths `λ ∈ ∨F` for which `t_λt_λ* ≠ Σ_{λλ' ∈ ∨F} Q_{λλ'}`, with the residual.
    pub range_failures: Vec<(Path, FormalElement)>,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.residual.is_zero() && self.range_failures.is_empty()
    }
}

/// Outcome of [`Tck::removal_identity_check`].
#[derive(Clone, Debug)]
pub struct RemovalReport {
    pub instances: usize,
    /// `(δ, μ_δ, Q^∨F_δ − Q^∨G_{μ_δ} t_δt_δ*)` for each failing `δ`.
    pub failures: Vec<(Path, Path, FormalElement)>,
}

/// Symbolic algebra over one skeleton. Caches minimal common extensions.
pub struct Tck<'s> {
    sk: &'s Skeleton,
    tails: Mutex<HashMap<(Path, Path), Tails>>,
}

impl<'s> Tck<'s> {
    pub fn new(sk: &'s Skeleton) -> Self {
        Tck {
            sk,
            tails: Mutex::new(HashMap::new()),
        }
    }

    pub fn skeleton(&self) -> &'s Skeleton {
        self.sk
    }

    /// `s_λ s_μ*`.
    pub fn gen(&self, lambda: &Path, mu: &Path) -> Result<FormalElement, TckError> {
        check_ranges(self.sk, lambda, mu)?;
        let mut out = FormalElement::zero();
        out.add_term(
            Term {
                left: lambda.clone(),
                right: mu.clone(),
            },
            BigRational::one(),
        );
        Ok(out)
    }

    /// `s_v = s_v s_v*`.
    pub fn vertex(&self, v: VertexId) -> FormalElement {
        self.projection(&self.sk.vertex_path(v))
    }

    /// `s_λ s_λ*`.
    pub fn projection(&self, lambda: &Path) -> FormalElement {
        self.gen(lambda, lambda).expect("a path has the same range as itself")
    }

    /// `(α, β)` with `μα = σβ` ranging over `MCE(μ, σ)`.
    fn tails(&self, mu: &Path, sigma: &Path) -> Tails {
        let key = (mu.clone(), sigma.clone());
        if let Some(t) = self.tails.lock().expect("cache lock").get(&key) {
            return t.clone();
        }
        let join = mu.degree().join(sigma.degree());
        let computed: Vec<(Path, Path)> = self
            .sk
            .mce_paths(mu, sigma)
            .iter()
            .map(|g| {
                (
                    self.sk.segment(g, mu.degree(), &join).expect("d(μ) <= d(γ)"),
                    self.sk.segment(g, sigma.degree(), &join).expect("d(σ) <= d(γ)"),
                )
            })
            .collect();
        let computed = Arc::new(computed);
        self.tails
            .lock()
            .expect("cache lock")
            .insert(key, computed.clone());
        computed
    }

    pub fn multiply(&self, a: &FormalElement, b: &FormalElement) -> FormalElement {
        let mut out = FormalElement::zero();
        for (x, cx) in &a.terms {
            for (y, cy) in &b.terms {
                let c = cx * cy;
                for (alpha, beta) in self.tails(&x.right, &y.left).iter() {
                    let left = self.sk.compose(&x.left, alpha).expect("r(λ) = s(α)");
                    let right = self.sk.compose(&y.right, beta).expect("r(τ) = s(β)");
                    out.add_term(Term { left, right }, c.clone());
                }
            }
        }
        out
    }

    /// `Q^∨F_λ = t_λt_λ* ∏_{λα ∈ ∨F, d(α) ≠ 0} (t_{s(λ)} − t_{λα}t_{λα}*)`, expanded.
    pub fn q_projection(&self, lambda: &Path, vee: &VeeClosure) -> Result<FormalElement, TckError> {
        if !vee.contains(lambda) {
            return Err(TckError::NotInClosure(self.sk.literal(lambda).to_string()));
        }
        let unit = self.vertex(lambda.source());
        let mut q = self.projection(lambda);
        for rho in &vee.closure {
            if rho != lambda && self.sk.is_prefix(lambda, rho) {
                q = self.multiply(&q, &(&unit - &self.projection(rho)));
            }
        }
        Ok(q)
    }

    /// Checks `Σ_{λ ∈ ∨F} Q_λ = Σ_{v ∈ s(F)} t_v` and, for each `λ ∈ ∨F`,
    /// `t_λt_λ* = Σ_{λλ' ∈ ∨F} Q_{λλ'}`.
    pub fn partition_check(&self, f: &[Path]) -> Result<PartitionReport, TckError> {
        let base: BTreeSet<&Path> = f.iter().collect();
        for p in f {
            if !base.contains(&self.sk.vertex_path(p.source())) {
                return Err(TckError::SourceNotInSet(self.sk.literal(p).to_string()));
            }
        }
        let closure = self.sk.vee(f);
        let qs: BTreeMap<&Path, FormalElement> = closure
            .closure
            .iter()
            .map(|l| Ok((l, self.q_projection(l, &closure)?)))
            .collect::<Result<_, TckError>>()?;
        let mut residual = FormalElement::zero();
        for q in qs.values() {
            residual = &residual + q;
        }
        let sources: BTreeSet<VertexId> = f.iter().map(Path::source).collect();
        for v in sources {
            residual = &residual - &self.vertex(v);
        }
        let mut range_failures = Vec::new();
        for lambda in &closure.closure {
            let mut diff = self.projection(lambda);
            for (rho, q) in &qs {
                if self.sk.is_prefix(lambda, rho) {
                    diff = &diff - q;
                }
            }
            if !diff.is_zero() {
                range_failures.push((lambda.clone(), diff));
            }
        }
        Ok(PartitionReport {
            closure,
            residual,
            range_failures,
        })
    }

    /// `μ_γ`: the element of `∨G` of largest degree that is a prefix of `γ`.
    pub fn max_subpath(&self, gamma: &Path, vee: &VeeClosure) -> Result<Path, TckError> {
        let candidates: Vec<&Path> = vee
            .closure
            .iter()
            .filter(|mu| self.sk.is_prefix(mu, gamma))
            .collect();
        if candidates.is_empty() {
            return Err(TckError::NoPrefix(self.sk.literal(gamma).to_string()));
        }
        let join = Degree::join_all(self.sk.k(), candidates.iter().map(|p| p.degree()));
        let top = self.sk.prefix(gamma, &join)?;
        if candidates.contains(&&top) {
            Ok(top)
        } else {
            Err(TckError::JoinNotAttained(self.sk.literal(gamma).to_string()))
        }
    }

    /// The paths `σ` of nonzero degree with `γσ` in the tail sets `d_γ(λ, μ)`
    /// over distinct prefixes `λ ≠ μ` of `γ` in `∨F`.
    pub fn refinement_tails(&self, gamma: &Path, vee: &VeeClosure) -> Result<BTreeSet<Path>, TckError> {
        if !vee.contains(gamma) {
            return Err(TckError::NotInClosure(self.sk.literal(gamma).to_string()));
        }
        let prefixes: Vec<&Path> = vee
            .closure
            .iter()
            .filter(|p| self.sk.is_prefix(p, gamma))
            .collect();
        let top = gamma.degree();
        let mut sigmas = BTreeSet::new();
        for (i, lambda) in prefixes.iter().enumerate() {
            for mu in &prefixes[i + 1..] {
                let l_tail = self.sk.segment(gamma, lambda.degree(), top)?;
                let m_tail = self.sk.segment(gamma, mu.degree(), top)?;
                for delta in self.sk.mce_paths(&l_tail, &m_tail) {
                    let d = delta.degree();
                    for s in [
                        self.sk.segment(&delta, l_tail.degree(), d)?,
                        self.sk.segment(&delta, m_tail.degree(), d)?,
                    ] {
                        if !s.is_vertex() {
                            sigmas.insert(s);
                        }
                    }
                }
            }
        }
        Ok(sigmas)
    }

    /// `Q_γ = Q^∨F_γ ∏_σ (t_γt_γ* − t_{γσ}t_{γσ}*)` over the refinement tails.
    pub fn refine_projection(&self, gamma: &Path, vee: &VeeClosure) -> Result<FormalElement, TckError> {
        let mut q = self.q_projection(gamma, vee)?;
        let p = self.projection(gamma);
        for sigma in self.refinement_tails(gamma, vee)? {
            let gs = self.sk.compose(gamma, &sigma).expect("σ starts at r(γ)");
            q = self.multiply(&q, &(&p - &self.projection(&gs)));
        }
        Ok(q)
    }

    /// For `λ ∈ F` of nonzero degree and `G = F ∖ {λ}`, checks
    /// `Q^∨F_δ = Q^∨G_{μ_δ} t_δt_δ*` for every `δ ∈ ∨F ∖ ∨G`.
    pub fn removal_identity_check(&self, f: &[Path], lambda: &Path) -> Result<RemovalReport, TckError> {
        if lambda.is_vertex() || !f.contains(lambda) {
            return Err(TckError::NotRemovable(self.sk.literal(lambda).to_string()));
        }
        let g: Vec<Path> = f.iter().filter(|p| *p != lambda).cloned().collect();
        let vee_f = self.sk.vee(f);
        let vee_g = self.sk.vee(&g);
        let mut report = RemovalReport {
            instances: 0,
            failures: Vec::new(),
        };
        for delta in vee_f.closure.difference(&vee_g.closure) {
            report.instances += 1;
            let mu = self.max_subpath(delta, &vee_g)?;
            let lhs = self.q_projection(delta, &vee_f)?;
            let rhs = self.multiply(&self.q_projection(&mu, &vee_g)?, &self.projection(delta));
            let diff = &lhs - &rhs;
            if !diff.is_zero() {
                report.failures.push((delta.clone(), mu, diff));
            }
        }
        Ok(report)
    }
}
