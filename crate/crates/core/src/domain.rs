//! Node identities, attributes, slice geometry and the misplacement test.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Unique node identifier. Ids are never reused within a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Fixed capability metric of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute(pub u64);

/// A point of `(0, 1]`: a random value of the ordering protocols or a
/// normalized rank.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RankPoint(f64);

impl RankPoint {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::RankOutOfRange(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for RankPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Partition of `(0, 1]` into half-open slices `(b[j-1], b[j]]`.
///
/// Slice indices are 1-based, as are all ranks in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpec {
    bounds: Vec<f64>,
}

impl SliceSpec {
    /// Builds a spec from the full boundary list `0 = b0 < b1 < ... < bk = 1`.
    pub fn new(bounds: Vec<f64>) -> Result<Self> {
        if bounds.len() < 2 {
            return Err(Error::InvalidSlices("need at least two boundaries".into()));
        }
        if bounds[0] != 0.0 || bounds[bounds.len() - 1] != 1.0 {
            return Err(Error::InvalidSlices(
                "boundaries must start at 0 and end at 1".into(),
            ));
        }
        if bounds
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidSlices(
                "boundaries must be strictly increasing".into(),
            ));
        }
        Ok(Self { bounds })
    }

    /// `k` slices of equal width.
    pub fn equal_width(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSlices(
                "slice count must be at least 1".into(),
            ));
        }
        let bounds = (0..=k).map(|j| j as f64 / k as f64).collect();
        Self::new(bounds)
    }

    pub fn count(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// True when all slices have the same width (up to rounding of `j/k`).
    pub fn is_equal_width(&self) -> bool {
        let k = self.count();
        self.bounds
            .iter()
            .enumerate()
            .all(|(j, &b)| b == j as f64 / k as f64)
    }

    /// Lower and upper boundary of slice `j` (1-based).
    pub fn interval(&self, j: usize) -> (f64, f64) {
        (self.bounds[j - 1], self.bounds[j])
    }

    /// The unique `j` with `b[j-1] < x <= b[j]`.
    pub fn slice_of(&self, x: f64) -> Result<usize> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::RankOutOfRange(x));
        }
        Ok(self.bounds.partition_point(|&b| b < x))
    }

    /// Like [`slice_of`](Self::slice_of) but maps an estimate of exactly 0
    /// (no favourable sample seen yet) to the first slice.
    pub fn slice_of_estimate(&self, x: f64) -> usize {
        if x <= 0.0 {
            1
        } else {
            self.bounds.partition_point(|&b| b < x.min(1.0))
        }
    }

    /// Interior boundaries, i.e. the ones separating two slices.
    pub fn interior(&self) -> &[f64] {
        &self.bounds[1..self.bounds.len() - 1]
    }

    /// Interior boundary closest to `x`, if there is one.
    pub fn nearest_boundary(&self, x: f64) -> Option<f64> {
        let interior = self.interior();
        if interior.is_empty() {
            return None;
        }
        let idx = interior.partition_point(|&b| b < x);
        let mut best = None::<f64>;
        for cand in [idx.checked_sub(1), Some(idx)].into_iter().flatten() {
            if let Some(&b) = interior.get(cand) {
                if best.is_none_or(|cur| (b - x).abs() < (cur - x).abs()) {
                    best = Some(b);
                }
            }
        }
        best
    }

    /// Distance from `x` to the nearest interior boundary; infinite for a
    /// single-slice spec.
    pub fn boundary_distance(&self, x: f64) -> f64 {
        self.nearest_boundary(x)
            .map_or(f64::INFINITY, |b| (b - x).abs())
    }
}

/// Attribute-based rank of every node: position (1-based) in the order by
/// `(attribute, id)`.
pub fn attribute_ranks(population: &[(NodeId, Attribute)]) -> Result<HashMap<NodeId, usize>> {
    let mut sorted = population.to_vec();
    sorted.sort_unstable_by_key(|&(id, a)| (a, id));
    let mut ranks = HashMap::with_capacity(sorted.len());
    for (pos, &(id, _)) in sorted.iter().enumerate() {
        if ranks.insert(id, pos + 1).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(ranks)
}

/// `(a_j - a_i)(r_j - r_i) < 0`, evaluated by sign so that large attributes
/// cannot overflow.
#[inline]
pub fn misplaced(a_i: Attribute, r_i: f64, a_j: Attribute, r_j: f64) -> bool {
    (a_j > a_i && r_j < r_i) || (a_j < a_i && r_j > r_i)
}
