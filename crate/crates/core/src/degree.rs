//! Multidegrees in ℕ^k with the componentwise lattice order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DegreeError {
    #[error("degree rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("cannot parse degree {0:?}: expected comma-separated non-negative integers")]
    Parse(String),
}

/// An element of ℕ^k.
///
/// [`PartialOrd`] is the componentwise partial order, so `p <= q` means `p_i <= q_i` for all i.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Degree(Vec<u32>);

impl Degree {
    pub fn zero(k: usize) -> Self {
        Degree(vec![0; k])
    }

    /// The generator e_i, with `color` counted from 1.
    pub fn unit(k: usize, color: usize) -> Self {
        assert!(color >= 1 && color <= k, "color {color} outside 1..={k}");
        let mut coords = vec![0; k];
        coords[color - 1] = 1;
        Degree(coords)
    }

    pub fn from_coords(coords: Vec<u32>) -> Self {
        Degree(coords)
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// |p| = Σ p_i.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Coordinate of the given color (1-based).
    pub fn get(&self, color: usize) -> u32 {
        self.0[color - 1]
    }

    pub fn join(&self, other: &Degree) -> Degree {
        self.zip_with(other, u32::max)
    }

    pub fn meet(&self, other: &Degree) -> Degree {
        self.zip_with(other, u32::min)
    }

    pub fn add(&self, other: &Degree) -> Degree {
        self.zip_with(other, |a, b| a + b)
    }

    /// `self - other`, defined when `other <= self`.
    pub fn checked_sub(&self, other: &Degree) -> Option<Degree> {
        assert_eq!(self.rank(), other.rank());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a.checked_sub(b))
            .collect::<Option<Vec<_>>>()
            .map(Degree)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Degree) -> bool {
        assert_eq!(self.rank(), other.rank());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// The color word of the ascending normal form: `p_1` copies of 1, then `p_2` copies of 2, ...
    pub fn sorted_colors(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(i + 1, n as usize))
    }

    /// All degrees `q` with `0 <= q <= self`, in lexicographic order.
    pub fn lower_box(&self) -> Vec<Degree> {
        let mut out = vec![Degree::zero(self.rank())];
        for (i, &bound) in self.0.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (bound as usize + 1));
            for d in &out {
                for c in 0..=bound {
                    let mut coords = d.0.clone();
                    coords[i] = c;
                    next.push(Degree(coords));
                }
            }
            out = next;
        }
        out
    }

    pub fn join_all<'a>(k: usize, degrees: impl IntoIterator<Item = &'a Degree>) -> Degree {
        degrees
            .into_iter()
            .fold(Degree::zero(k), |acc, d| acc.join(d))
    }

    fn zip_with(&self, other: &Degree, f: impl Fn(u32, u32) -> u32) -> Degree {
        assert_eq!(self.rank(), other.rank(), "degree rank mismatch");
        Degree(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.rank() != other.rank() {
            return None;
        }
        match (self.le(other), other.le(self)) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Degree {
    type Err = DegreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.is_empty() {
            return Err(DegreeError::Parse(s.to_string()));
        }
        s.split(',')
            .map(|c| c.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map(Degree)
            .map_err(|_| DegreeError::Parse(s.to_string()))
    }
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Degree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Vec::<u32>::deserialize(deserializer).map(Degree)
    }
}
