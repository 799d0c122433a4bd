//! The index set Γ = ℕ^ℓ × ℤ, finite windows of it, and the weighted degree.
//!
//! Basis vectors e_γ of the truncated Hilbert space are numbered by the
//! lexicographic position of γ inside its window: the first coordinate varies
//! slowest and every ℤ axis is offset by its bound so that `-max` maps to 0.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice point needs at least one coordinate")]
    Empty,
    #[error("coordinate {index} of {point:?} must be nonnegative")]
    NegativeNatural { point: Vec<i64>, index: usize },
    #[error("ell must be at least 1")]
    ZeroEll,
    #[error("interior margin {margin} exceeds min(n_max, m_max) = {bound}")]
    MarginTooLarge { margin: u32, bound: u32 },
    #[error("coordinate index {k} outside 1..={len}")]
    BadAxis { k: usize, len: usize },
}

/// A point γ = (γ(1), …, γ(ℓ), γ(ℓ+1)) of ℕ^ℓ × ℤ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    /// Validates that every coordinate except the last is nonnegative.
    pub fn new(coords: Vec<i64>) -> Result<Self, LatticeError> {
        if coords.is_empty() {
            return Err(LatticeError::Empty);
        }
        let last = coords.len() - 1;
        if let Some(index) = coords[..last].iter().position(|&c| c < 0) {
            return Err(LatticeError::NegativeNatural {
                point: coords,
                index: index + 1,
            });
        }
        Ok(Self(coords))
    }

    /// The origin of ℕ^ℓ × ℤ.
    pub fn origin(ell: usize) -> Self {
        Self(vec![0; ell + 1])
    }

    /// Wraps raw coordinates without validation. Used for points of product
    /// spaces that carry more than one ℤ axis.
    pub(crate) fn from_raw(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    /// ℓ, i.e. the number of ℕ coordinates.
    pub fn ell(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    /// γ(k) with 1-based k.
    pub fn coord(&self, k: usize) -> i64 {
        self.0[k - 1]
    }

    /// The ℤ coordinate γ(ℓ+1).
    pub fn last(&self) -> i64 {
        self.0[self.0.len() - 1]
    }

    /// γ + ε_k for 1 ≤ k ≤ ℓ+1.
    pub fn add_epsilon(&self, k: usize) -> Result<Self, LatticeError> {
        self.shifted(k, 1)
    }

    /// γ + t·ε_k. Fails if k is out of range or an ℕ coordinate would go negative.
    pub fn shifted(&self, k: usize, t: i64) -> Result<Self, LatticeError> {
        let len = self.0.len();
        if k == 0 || k > len {
            return Err(LatticeError::BadAxis { k, len });
        }
        let mut c = self.0.clone();
        c[k - 1] += t;
        Self::new(c)
    }

    pub fn weighted_degree(&self) -> u64 {
        weighted_degree(&self.0)
    }

    /// γ(1) + … + γ(k−1), the exponent of q in the coefficient of z_k.
    pub fn prefix_sum(&self, k: usize) -> i64 {
        self.0[..k - 1].iter().sum()
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl std::ops::Deref for LatticePoint {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.0
    }
}

/// γ(1) + … + γ(ℓ) + |γ(ℓ+1)|.
pub fn weighted_degree(coords: &[i64]) -> u64 {
    coords.iter().map(|c| c.unsigned_abs()).sum()
}

/// One axis of a finite product window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// {0, …, max}
    Natural(u32),
    /// {−max, …, max}
    Integer(u32),
}

impl Axis {
    pub fn len(self) -> usize {
        match self {
            Axis::Natural(n) => n as usize + 1,
            Axis::Integer(m) => 2 * m as usize + 1,
        }
    }

    pub fn is_empty(self) -> bool {
        false
    }

    fn offset(self, c: i64) -> Option<usize> {
        match self {
            Axis::Natural(n) => (0..=n as i64).contains(&c).then_some(c as usize),
            Axis::Integer(m) => {
                let m = m as i64;
                (-m..=m).contains(&c).then_some((c + m) as usize)
            }
        }
    }

    fn value(self, offset: usize) -> i64 {
        match self {
            Axis::Natural(_) => offset as i64,
            Axis::Integer(m) => offset as i64 - m as i64,
        }
    }

    /// True if `c` sits on the outermost layer of this axis.
    pub fn on_boundary(self, c: i64) -> bool {
        match self {
            Axis::Natural(n) => c == n as i64,
            Axis::Integer(m) => c.unsigned_abs() == m as u64,
        }
    }

    pub fn max(self) -> u32 {
        match self {
            Axis::Natural(n) | Axis::Integer(n) => n,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Natural(n) => write!(f, "N:{n}"),
            Axis::Integer(m) => write!(f, "Z:{m}"),
        }
    }
}

/// A finite product of axes with lexicographic numbering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSpace {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    dim: usize,
}

impl IndexSpace {
    pub fn new(axes: Vec<Axis>) -> Self {
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].len();
        }
        let dim = axes.iter().map(|a| a.len()).product();
        Self { axes, strides, dim }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        self.index_of(coords).is_some()
    }

    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.axes.len() {
            return None;
        }
        let mut idx = 0;
        for ((axis, &c), stride) in self.axes.iter().zip(coords).zip(&self.strides) {
            idx += axis.offset(c)? * stride;
        }
        Some(idx)
    }

    pub fn coords_at(&self, mut idx: usize) -> Vec<i64> {
        debug_assert!(idx < self.dim);
        self.axes
            .iter()
            .zip(&self.strides)
            .map(|(axis, stride)| {
                let off = idx / stride;
                idx %= stride;
                axis.value(off)
            })
            .collect()
    }

    /// All coordinate vectors in index order.
    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.dim).map(move |i| self.coords_at(i))
    }

    /// True if some coordinate lies on the outer layer of its axis.
    pub fn on_boundary(&self, coords: &[i64]) -> bool {
        self.axes.iter().zip(coords).any(|(a, &c)| a.on_boundary(c))
    }

    /// The same space with one more axis appended.
    pub fn with_axis(&self, axis: Axis) -> Self {
        let mut axes = self.axes.clone();
        axes.push(axis);
        Self::new(axes)
    }
}

/// A finite window of Γ = ℕ^ℓ × ℤ: every ℕ coordinate ≤ `n_max`, |γ(ℓ+1)| ≤ `m_max`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    ell: usize,
    n_max: u32,
    m_max: u32,
    interior_margin: u32,
}

impl Truncation {
    /// A window with the default interior margin of 1.
    pub fn new(ell: usize, n_max: u32, m_max: u32) -> Result<Self, LatticeError> {
        Self::with_margin(ell, n_max, m_max, 1.min(n_max).min(m_max))
    }

    pub fn with_margin(
        ell: usize,
        n_max: u32,
        m_max: u32,
        interior_margin: u32,
    ) -> Result<Self, LatticeError> {
        if ell == 0 {
            return Err(LatticeError::ZeroEll);
        }
        let bound = n_max.min(m_max);
        if interior_margin > bound {
            return Err(LatticeError::MarginTooLarge {
                margin: interior_margin,
                bound,
            });
        }
        Ok(Self {
            ell,
            n_max,
            m_max,
            interior_margin,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn interior_margin(&self) -> u32 {
        self.interior_margin
    }

    pub fn window_size(&self) -> usize {
        (self.n_max as usize + 1).pow(self.ell as u32) * (2 * self.m_max as usize + 1)
    }

    pub fn space(&self) -> IndexSpace {
        let mut axes = vec![Axis::Natural(self.n_max); self.ell];
        axes.push(Axis::Integer(self.m_max));
        IndexSpace::new(axes)
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.ell + 1
            && p[..self.ell]
                .iter()
                .all(|&c| (0..=self.n_max as i64).contains(&c))
            && p[self.ell].unsigned_abs() <= self.m_max as u64
    }

    /// Points at least `interior_margin` away from the outer faces.
    pub fn is_interior(&self, p: &[i64]) -> bool {
        let n = (self.n_max - self.interior_margin) as i64;
        let m = (self.m_max - self.interior_margin) as u64;
        self.contains(p) && p[..self.ell].iter().all(|&c| c <= n) && p[self.ell].unsigned_abs() <= m
    }

    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let base = self.n_max as usize + 1;
        let mut idx = 0usize;
        for &c in &p[..self.ell] {
            idx = idx * base + c as usize;
        }
        Some(idx * (2 * self.m_max as usize + 1) + (p[self.ell] + self.m_max as i64) as usize)
    }

    pub fn point_at(&self, idx: usize) -> LatticePoint {
        LatticePoint(self.space().coords_at(idx))
    }

    /// Every window point exactly once, in basis order.
    pub fn enumerate(&self) -> Vec<LatticePoint> {
        self.space().points().map(LatticePoint).collect()
    }

    /// The window shrunk by `s` on every face (saturating at 0).
    pub fn shrunk(&self, s: u32) -> Self {
        let n_max = self.n_max.saturating_sub(s);
        let m_max = self.m_max.saturating_sub(s);
        Self {
            ell: self.ell,
            n_max,
            m_max,
            interior_margin: self.interior_margin.min(n_max).min(m_max),
        }
    }

    /// Largest radius r such that every γ with weighted degree ≤ r lies in the window.
    pub fn complete_ball_radius(&self) -> u32 {
        self.n_max.min(self.m_max)
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ell={} n_max={} m_max={} interior_margin={}",
            self.ell, self.n_max, self.m_max, self.interior_margin
        )
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// #{γ ∈ ℕ^ℓ × ℤ : weighted_degree(γ) ≤ n}.
///
/// Points with γ(ℓ+1) = 0 number C(n+ℓ, ℓ); those with γ(ℓ+1) = ±j, j ≥ 1,
/// number C(n+ℓ, ℓ+1) for each sign.
pub fn count_ball(ell: usize, n: u64) -> u128 {
    let l = ell as u64;
    binomial(n + l, l) + 2 * binomial(n + l, l + 1)
}

/// Same count by walking the ball. Exponential in ℓ; intended for checks.
pub fn count_ball_by_enumeration(ell: usize, n: u64) -> u128 {
    fn rec(remaining_axes: usize, budget: u64) -> u128 {
        if remaining_axes == 0 {
            // the ℤ coordinate: |j| ≤ budget
            return 2 * budget as u128 + 1;
        }
        (0..=budget)
            .map(|c| rec(remaining_axes - 1, budget - c))
            .sum()
    }
    rec(ell, n)
}
