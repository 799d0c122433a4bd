//! The growth graph of a Dirac operator and the sign structure it forces.
//!
//! Vertices are lattice points; γ and γ' are joined when |d(γ) − d(γ')| ≤ c.
//! With c taken from a bounded commutator check, every step γ → γ ± ε_k with
//! γ(1) = … = γ(k−1) = 0 is an edge, which gives the explicit paths below.
//! Those paths in turn force Γ⁺ = {d > 0} to be a union of the coarse pieces
//! A₁, A₂ and B_{k,tail} up to a finite set.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dirac::EquivariantDirac;
use crate::lattice::{weighted_degree, LatticePoint, Truncation};

/// Slack on the edge test so that sups computed with rounding still count.
const EDGE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("points have length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("k = {k} outside 1..={max}")]
    BadK { k: usize, max: usize },
    #[error("{0} and {1} are not in either path-lemma configuration for this k")]
    PathPrecondition(LatticePoint, LatticePoint),
    #[error("step {step}: {from} -> {to} is not an edge")]
    NotAnEdge {
        step: usize,
        from: LatticePoint,
        to: LatticePoint,
    },
    #[error("{0} lies outside the window")]
    OutsideWindow(LatticePoint),
}

#[derive(Clone, Debug)]
pub struct GrowthGraph {
    trunc: Truncation,
    c: f64,
    dirac: EquivariantDirac,
}

impl GrowthGraph {
    pub fn new(dirac: &EquivariantDirac, c: f64, trunc: &Truncation) -> Result<Self, GraphError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(GraphError::BadThreshold(c));
        }
        Ok(Self {
            trunc: trunc.clone(),
            c,
            dirac: dirac.clone(),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.c
    }

    pub fn trunc(&self) -> &Truncation {
        &self.trunc
    }

    pub fn is_edge(&self, a: &[i64], b: &[i64]) -> bool {
        self.trunc.contains(a)
            && self.trunc.contains(b)
            && (self.dirac.value(a) - self.dirac.value(b)).abs() <= self.c * (1.0 + EDGE_SLACK)
    }

    /// Window points γ ± ε_k joined to γ by an edge.
    pub fn generator_neighbors(&self, g: &[i64]) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for k in 0..g.len() {
            for step in [-1, 1] {
                let mut n = g.to_vec();
                n[k] += step;
                if self.is_edge(g, &n) {
                    out.push(n);
                }
            }
        }
        out
    }

    /// Checks that `start, path[0], path[1], …` is a walk along edges.
    pub fn validate_path(&self, start: &[i64], path: &[LatticePoint]) -> Result<(), GraphError> {
        let mut prev: &[i64] = start;
        for (step, p) in path.iter().enumerate() {
            if !self.is_edge(prev, p) {
                return Err(GraphError::NotAnEdge {
                    step,
                    from: LatticePoint::from_raw(prev.to_vec()),
                    to: p.clone(),
                });
            }
            prev = p;
        }
        Ok(())
    }

    /// Shortest walk length along generator steps, if any.
    pub fn generator_distance(&self, a: &[i64], b: &[i64]) -> Option<usize> {
        if !self.trunc.contains(a) || !self.trunc.contains(b) {
            return None;
        }
        let space = self.trunc.space();
        let mut dist = vec![usize::MAX; space.dim()];
        let start = space.index_of(a)?;
        let goal = space.index_of(b)?;
        dist[start] = 0;
        let mut queue = VecDeque::from([a.to_vec()]);
        while let Some(p) = queue.pop_front() {
            let dp = dist[space.index_of(&p)?];
            if space.index_of(&p) == Some(goal) {
                return Some(dp);
            }
            for n in self.generator_neighbors(&p) {
                let i = space.index_of(&n)?;
                if dist[i] == usize::MAX {
                    dist[i] = dp + 1;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

fn walk_axis(path: &mut Vec<LatticePoint>, cur: &mut [i64], axis: usize, target: i64) {
    while cur[axis] != target {
        cur[axis] += (target - cur[axis]).signum();
        path.push(LatticePoint::from_raw(cur.to_vec()));
    }
}

/// The explicit path of the path lemmas, excluding `a` and ending at `b`.
///
/// Two configurations are accepted:
/// * `a`, `b` vanish on coordinates 1..k−1 and differ only in coordinate k
///   (k ≤ ℓ+1): walk along ε_k, length |a(k) − b(k)|;
/// * `a`, `b` agree on coordinates k..ℓ+1 and one of them vanishes on
///   1..k−1 (k ≤ ℓ+2): zero coordinates 1, 2, …, k−1 of the other one in
///   turn, length Σ_{j<k} |a(j) − b(j)|.
///
/// Every step moves a coordinate whose predecessors are all zero.
pub fn lemma_path(a: &[i64], b: &[i64], k: usize) -> Result<Vec<LatticePoint>, GraphError> {
    let len = a.len();
    if b.len() != len {
        return Err(GraphError::WrongLength {
            expected: len,
            got: b.len(),
        });
    }
    if k == 0 || k > len + 1 {
        return Err(GraphError::BadK { k, max: len + 1 });
    }
    let zero_prefix = |p: &[i64]| p[..k - 1].iter().all(|&c| c == 0);
    let mut path = Vec::new();
    if a == b {
        return Ok(path);
    }
    if k <= len && zero_prefix(a) && zero_prefix(b) && a[k..] == b[k..] {
        let mut cur = a.to_vec();
        walk_axis(&mut path, &mut cur, k - 1, b[k - 1]);
        return Ok(path);
    }
    if a[k - 1..] == b[k - 1..] {
        if zero_prefix(b) {
            let mut cur = a.to_vec();
            for axis in 0..k - 1 {
                walk_axis(&mut path, &mut cur, axis, 0);
            }
            return Ok(path);
        }
        if zero_prefix(a) {
            let mut rev = lemma_path(b, a, k)?;
            rev.pop();
            rev.reverse();
            rev.push(LatticePoint::from_raw(b.to_vec()));
            return Ok(rev);
        }
    }
    Err(GraphError::PathPrecondition(
        LatticePoint::from_raw(a.to_vec()),
        LatticePoint::from_raw(b.to_vec()),
    ))
}

/// Closed-form length of [`lemma_path`] in either configuration.
pub fn lemma_path_length(a: &[i64], b: &[i64], k: usize) -> u64 {
    let upto = (k - 1).min(a.len());
    let head: u64 = (0..upto).map(|j| a[j].abs_diff(b[j])).sum();
    if k <= a.len() && head == 0 {
        a[k - 1].abs_diff(b[k - 1])
    } else {
        head
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignForm {
    #[serde(rename = "A1_UNION_B")]
    A1UnionB,
    #[serde(rename = "A2_UNION_B")]
    A2UnionB,
    #[serde(rename = "A1_A2_UNION_B")]
    A1A2UnionB,
    #[serde(rename = "B_ONLY")]
    BOnly,
}

impl SignForm {
    pub fn from_signs(a1_positive: bool, a2_positive: bool) -> Self {
        match (a1_positive, a2_positive) {
            (true, false) => Self::A1UnionB,
            (false, true) => Self::A2UnionB,
            (true, true) => Self::A1A2UnionB,
            (false, false) => Self::BOnly,
        }
    }

    pub fn a1_positive(self) -> bool {
        matches!(self, Self::A1UnionB | Self::A1A2UnionB)
    }

    pub fn a2_positive(self) -> bool {
        matches!(self, Self::A2UnionB | Self::A1A2UnionB)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::A1UnionB => "A1_UNION_B",
            Self::A2UnionB => "A2_UNION_B",
            Self::A1A2UnionB => "A1_A2_UNION_B",
            Self::BOnly => "B_ONLY",
        }
    }
}

impl fmt::Display for SignForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// B_{k,tail} = {γ : γ(k) > M_k, γ(r) = tail_r for k < r ≤ ℓ+1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BSetLabel {
    pub k: usize,
    pub tail: Vec<i64>,
}

/// Which cell of the partition determined by M a point falls into.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    A1,
    A2,
    B(BSetLabel),
    /// Π[0, M_k] × [−M_{ℓ+1}, M_{ℓ+1}]
    Box,
}

/// The cell of γ: A₁ if γ(ℓ+1) > M_{ℓ+1}, A₂ if γ(ℓ+1) < −M_{ℓ+1}, otherwise
/// B_{k,tail} for the largest k ≤ ℓ with γ(k) > M_k, otherwise the box.
pub fn piece_of(m: &[u32], g: &[i64]) -> Piece {
    let ell = g.len() - 1;
    let ml = m[ell] as i64;
    if g[ell] > ml {
        return Piece::A1;
    }
    if g[ell] < -ml {
        return Piece::A2;
    }
    match (0..ell).rev().find(|&i| g[i] > m[i] as i64) {
        Some(i) => Piece::B(BSetLabel {
            k: i + 1,
            tail: g[i + 1..].to_vec(),
        }),
        None => Piece::Box,
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("M has length {got}, expected {expected}")]
    BadM { expected: usize, got: usize },
    #[error("B-set label {0:?} is not of the form (k, tail) with tail in F_k")]
    BadLabel(BSetLabel),
    #[error("exceptional point {0} lies outside the M-box")]
    ExceptionalOutsideBox(LatticePoint),
    #[error("d vanishes at {0}")]
    ZeroValue(LatticePoint),
    #[error("no admissible M with entries <= {search_max} fits; the window is too small to decide ({reason})")]
    WindowTooSmall { search_max: u32, reason: String },
    #[error("no M with entries <= {search_max} makes every piece single-signed; the pattern is not admissible")]
    Inadmissible { search_max: u32 },
}

/// Γ⁺ as A-pieces ∪ ⋃_{x∈E} B_x ∪ (exceptional points inside the M-box).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    pub ell: usize,
    pub form: SignForm,
    #[serde(rename = "M")]
    pub m: Vec<u32>,
    #[serde(rename = "E")]
    pub e: Vec<BSetLabel>,
    pub exceptional: Vec<LatticePoint>,
}

impl SignPattern {
    pub fn new(
        ell: usize,
        form: SignForm,
        m: Vec<u32>,
        e: impl IntoIterator<Item = BSetLabel>,
        exceptional: impl IntoIterator<Item = LatticePoint>,
    ) -> Result<Self, PatternError> {
        let e: BTreeSet<_> = e.into_iter().collect();
        let exceptional: BTreeSet<_> = exceptional.into_iter().collect();
        let p = Self {
            ell,
            form,
            m,
            e: e.into_iter().collect(),
            exceptional: exceptional.into_iter().collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PatternError> {
        let ell = self.ell;
        if self.m.len() != ell + 1 {
            return Err(PatternError::BadM {
                expected: ell + 1,
                got: self.m.len(),
            });
        }
        for x in &self.e {
            if !self.in_f(x) {
                return Err(PatternError::BadLabel(x.clone()));
            }
        }
        for p in &self.exceptional {
            if p.len() != ell + 1 || piece_of(&self.m, p) != Piece::Box {
                return Err(PatternError::ExceptionalOutsideBox(p.clone()));
            }
        }
        Ok(())
    }

    /// tail ∈ F_k = Π_{r=k+1}^{ℓ} [0, M_r] × [−M_{ℓ+1}, M_{ℓ+1}]
    fn in_f(&self, x: &BSetLabel) -> bool {
        let ell = self.ell;
        if x.k == 0 || x.k > ell || x.tail.len() != ell + 1 - x.k {
            return false;
        }
        x.tail.iter().enumerate().all(|(i, &t)| {
            let r = x.k + i; // 0-based coordinate index
            if r == ell {
                t.unsigned_abs() <= self.m[ell] as u64
            } else {
                (0..=self.m[r] as i64).contains(&t)
            }
        })
    }

    /// Every label in ∪_k {k} × F_k.
    pub fn all_labels(&self) -> Vec<BSetLabel> {
        let ell = self.ell;
        let mut out = Vec::new();
        for k in 1..=ell {
            let mut ranges: Vec<(i64, i64)> = (k..ell).map(|r| (0, self.m[r] as i64)).collect();
            let ml = self.m[ell] as i64;
            ranges.push((-ml, ml));
            let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'odometer: loop {
                out.push(BSetLabel {
                    k,
                    tail: cur.clone(),
                });
                for i in (0..ranges.len()).rev() {
                    if cur[i] < ranges[i].1 {
                        cur[i] += 1;
                        for (j, c) in cur.iter_mut().enumerate().skip(i + 1) {
                            *c = ranges[j].0;
                        }
                        continue 'odometer;
                    }
                }
                break;
            }
        }
        out
    }

    pub fn piece_of(&self, g: &[i64]) -> Piece {
        piece_of(&self.m, g)
    }

    /// Whether γ belongs to the Γ⁺ this pattern describes.
    pub fn reconstructed_contains(&self, g: &[i64]) -> bool {
        match self.piece_of(g) {
            Piece::A1 => self.form.a1_positive(),
            Piece::A2 => self.form.a2_positive(),
            Piece::B(x) => self.e.binary_search(&x).is_ok(),
            Piece::Box => self
                .exceptional
                .binary_search_by(|p| p.coords().cmp(g))
                .is_ok(),
        }
    }

    /// d(γ) = ±(deg(γ) + 1/2), positive exactly on the reconstructed Γ⁺.
    pub fn synthesize_dirac(&self) -> EquivariantDirac {
        let p = self.clone();
        EquivariantDirac::from_fn(
            format!("pattern[{}]", self.form),
            self.ell,
            move |g: &[i64]| {
                let mag = weighted_degree(g) as f64 + 0.5;
                if p.reconstructed_contains(g) {
                    mag
                } else {
                    -mag
                }
            },
        )
    }
}

/// K-homology label: −1 for the D_torus class, +1 for −D_torus, 0 otherwise.
pub fn khomology_class(p: &SignPattern) -> i32 {
    match p.form {
        SignForm::A1UnionB => -1,
        SignForm::A2UnionB => 1,
        SignForm::A1A2UnionB | SignForm::BOnly => 0,
    }
}

/// Every piece of the partition for `m` single-signed on the window points
/// `signs`? Returns the sign of each piece seen.
fn piece_signs(m: &[u32], signs: &[(Vec<i64>, bool)]) -> Option<HashMap<Piece, bool>> {
    let mut seen: HashMap<Piece, bool> = HashMap::new();
    for (g, pos) in signs {
        let piece = piece_of(m, g);
        if piece == Piece::Box {
            continue;
        }
        match seen.get(&piece) {
            Some(&s) if s != *pos => return None,
            Some(_) => {}
            None => {
                seen.insert(piece, *pos);
            }
        }
    }
    Some(seen)
}

fn search_m(
    ell: usize,
    bounds: &[u32],
    signs: &[(Vec<i64>, bool)],
) -> Option<(Vec<u32>, HashMap<Piece, bool>)> {
    let mut m = vec![0u32; ell + 1];
    loop {
        if let Some(seen) = piece_signs(&m, signs) {
            return Some((m, seen));
        }
        let mut i = ell + 1;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if m[i] < bounds[i] {
                m[i] += 1;
                m[i + 1..].iter_mut().for_each(|v| *v = 0);
                break;
            }
        }
    }
}

/// Finds the lexicographically least M (entries ≤ `m_search_max`, and small
/// enough that each piece meets the window) for which every A- and B-piece
/// is single-signed on the window, and reads off the pattern.
pub fn classify_sign_pattern(
    d: &EquivariantDirac,
    trunc: &Truncation,
    m_search_max: u32,
) -> Result<SignPattern, PatternError> {
    let ell = trunc.ell();
    let mut signs = Vec::with_capacity(trunc.window_size());
    for p in trunc.space().points() {
        let v = d.value(&p);
        if v == 0.0 {
            return Err(PatternError::ZeroValue(LatticePoint::from_raw(p)));
        }
        signs.push((p, v > 0.0));
    }
    let n_cap = trunc.n_max().saturating_sub(1);
    let m_cap = trunc.m_max().saturating_sub(1);
    let mut bounds = vec![m_search_max.min(n_cap); ell];
    bounds.push(m_search_max.min(m_cap));

    let Some((m, seen)) = search_m(ell, &bounds, &signs) else {
        let clipped = n_cap < m_search_max || m_cap < m_search_max;
        let inner = trunc.shrunk(trunc.interior_margin().max(1));
        let inner_signs: Vec<_> = signs
            .iter()
            .filter(|(g, _)| inner.contains(g))
            .cloned()
            .collect();
        let mut inner_bounds = vec![m_search_max.min(inner.n_max().saturating_sub(1)); ell];
        inner_bounds.push(m_search_max.min(inner.m_max().saturating_sub(1)));
        let boundary_sensitive = search_m(ell, &inner_bounds, &inner_signs).is_some();
        return Err(if clipped || boundary_sensitive {
            PatternError::WindowTooSmall {
                search_max: m_search_max,
                reason: if boundary_sensitive {
                    "a pattern fits on the interior but not up to the boundary".into()
                } else {
                    "the search bound was clipped by the window".into()
                },
            }
        } else {
            PatternError::Inadmissible {
                search_max: m_search_max,
            }
        });
    };

    let sign_of = |piece: Piece| seen.get(&piece).copied();
    // an A-piece missing from the window takes the sign of the ℤ extreme
    let a1 = sign_of(Piece::A1)
        .unwrap_or_else(|| d.value(&extreme(ell, trunc.m_max() as i64 + 1)) > 0.0);
    let a2 = sign_of(Piece::A2)
        .unwrap_or_else(|| d.value(&extreme(ell, -(trunc.m_max() as i64) - 1)) > 0.0);
    let mut e: Vec<BSetLabel> = seen
        .iter()
        .filter_map(|(p, &pos)| match p {
            Piece::B(x) if pos => Some(x.clone()),
            _ => None,
        })
        .collect();
    e.sort();
    let exceptional: Vec<LatticePoint> = signs
        .iter()
        .filter(|(g, pos)| *pos && piece_of(&m, g) == Piece::Box)
        .map(|(g, _)| LatticePoint::from_raw(g.clone()))
        .collect();
    SignPattern::new(ell, SignForm::from_signs(a1, a2), m, e, exceptional)
}

fn extreme(ell: usize, last: i64) -> Vec<i64> {
    let mut g = vec![0; ell + 1];
    g[ell] = last;
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::commutator_bound_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lp(v: &[i64]) -> LatticePoint {
        LatticePoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn graph_examples() {
        let t = Truncation::new(1, 4, 4).unwrap();
        let g = GrowthGraph::new(&EquivariantDirac::constant(1, 2.0), 0.1, &t).unwrap();
        assert!(g.is_edge(&[0, -4], &[4, 4]));
        let d = EquivariantDirac::torus(1);
        let g = GrowthGraph::new(&d, 1.0, &t).unwrap();
        assert!(g.is_edge(&[1, 2], &[2, 2]));
        assert!(g.is_edge(&[1, 2], &[1, 3]));
        assert!(!g.is_edge(&[1, -1], &[1, 0]));
        let g = GrowthGraph::new(&d, 0.5, &t).unwrap();
        assert!(!g.is_edge(&[1, 0], &[2, 0]));
        assert!(GrowthGraph::new(&d, 0.0, &t).is_err());
    }

    #[test]
    fn path_examples() {
        assert!(lemma_path(&[1, 2], &[1, 2], 2).unwrap().is_empty());
        let p = lemma_path(&[0, 3], &[0, 7], 2).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.last().unwrap(), &lp(&[0, 7]));
        let p = lemma_path(&[2, 1, 5], &[0, 0, 5], 3).unwrap();
        assert_eq!(p, vec![lp(&[1, 1, 5]), lp(&[0, 1, 5]), lp(&[0, 0, 5])]);
        let p = lemma_path(&[0, 0, 5], &[2, 1, 5], 3).unwrap();
        assert_eq!(p, vec![lp(&[0, 1, 5]), lp(&[1, 1, 5]), lp(&[2, 1, 5])]);
        let p = lemma_path(&[1, 2, -3], &[0, 0, 0], 4).unwrap();
        assert_eq!(p.len(), 6);
        assert!(lemma_path(&[1, 2], &[2, 3], 2).is_err());
        assert!(lemma_path(&[1, 2], &[1, 3], 5).is_err());
    }

    #[test]
    fn paths_are_edges_and_reach_origin() {
        let t = Truncation::new(2, 5, 5).unwrap();
        let d = EquivariantDirac::torus(2);
        let c = commutator_bound_check(&d, 0.5, &t).unwrap().edge_constant;
        let g = GrowthGraph::new(&d, c, &t).unwrap();
        for p in t.enumerate() {
            let path = lemma_path(&p, &[0, 0, 0], 4).unwrap();
            assert_eq!(path.len() as u64, p.weighted_degree());
            g.validate_path(&p, &path).unwrap();
        }
        assert_eq!(g.generator_distance(&[2, 1, 3], &[0, 0, 0]), Some(6));
    }

    #[test]
    fn validate_path_reports_bad_step() {
        let t = Truncation::new(1, 4, 4).unwrap();
        let g = GrowthGraph::new(&EquivariantDirac::torus(1), 1.0, &t).unwrap();
        let err = g.validate_path(&[2, -1], &[lp(&[2, 0])]).unwrap_err();
        assert!(matches!(err, GraphError::NotAnEdge { step: 0, .. }));
    }

    #[test]
    fn pieces_partition() {
        let m = [1, 2, 1];
        assert_eq!(piece_of(&m, &[0, 0, 2]), Piece::A1);
        assert_eq!(piece_of(&m, &[5, 5, -2]), Piece::A2);
        assert_eq!(piece_of(&m, &[1, 2, 1]), Piece::Box);
        assert_eq!(
            piece_of(&m, &[4, 2, -1]),
            Piece::B(BSetLabel {
                k: 1,
                tail: vec![2, -1]
            })
        );
        assert_eq!(
            piece_of(&m, &[4, 3, 0]),
            Piece::B(BSetLabel {
                k: 2,
                tail: vec![0]
            })
        );
    }

    #[test]
    fn classify_builtins() {
        for ell in 1..=2 {
            let t = Truncation::new(ell, 6, 6).unwrap();
            let p = classify_sign_pattern(&EquivariantDirac::torus(ell), &t, 5).unwrap();
            assert_eq!(p.form, SignForm::A1UnionB);
            assert_eq!(p.m, vec![0; ell + 1]);
            assert_eq!(p.exceptional, vec![LatticePoint::origin(ell)]);
            let expect: Vec<BSetLabel> = (1..=ell)
                .map(|k| BSetLabel {
                    k,
                    tail: vec![0; ell + 1 - k],
                })
                .collect();
            assert_eq!(p.e, expect);
            assert_eq!(khomology_class(&p), -1);

            let p = classify_sign_pattern(&EquivariantDirac::neg_torus(ell), &t, 5).unwrap();
            assert_eq!(p.form, SignForm::A2UnionB);
            assert_eq!(khomology_class(&p), 1);

            let p = classify_sign_pattern(&EquivariantDirac::abs_torus(ell), &t, 5).unwrap();
            assert_eq!(p.form, SignForm::A1A2UnionB);
            assert_eq!(p.e, p.all_labels());
            assert_eq!(khomology_class(&p), 0);
        }
    }

    #[test]
    fn failures_are_distinguished() {
        let t = Truncation::new(1, 8, 8).unwrap();
        // alternating sign along the ℤ axis: no M can help
        let d =
            EquivariantDirac::from_fn("alt", 1, |g: &[i64]| if g[1] % 2 == 0 { 1.0 } else { -1.0 });
        assert!(matches!(
            classify_sign_pattern(&d, &t, 5),
            Err(PatternError::Inadmissible { search_max: 5 })
        ));
        // a sign change on the last interior layer of the ℤ axis
        let d =
            EquivariantDirac::from_fn("late", 1, |g: &[i64]| if g[1] >= 8 { -1.0 } else { 1.0 });
        assert!(matches!(
            classify_sign_pattern(&d, &t, 5),
            Err(PatternError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn pattern_validation() {
        let ok = SignPattern::new(
            1,
            SignForm::BOnly,
            vec![1, 1],
            [BSetLabel {
                k: 1,
                tail: vec![-1],
            }],
            [lp(&[1, 1])],
        );
        assert!(ok.is_ok());
        let bad = SignPattern::new(
            1,
            SignForm::BOnly,
            vec![1, 1],
            [BSetLabel {
                k: 1,
                tail: vec![2],
            }],
            [],
        );
        assert!(matches!(bad, Err(PatternError::BadLabel(_))));
        let bad = SignPattern::new(1, SignForm::BOnly, vec![1, 1], [], [lp(&[2, 0])]);
        assert!(matches!(bad, Err(PatternError::ExceptionalOutsideBox(_))));
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let ell = rng.gen_range(1..=2);
            let m: Vec<u32> = (0..=ell).map(|_| rng.gen_range(0..=2)).collect();
            let form = [
                SignForm::A1UnionB,
                SignForm::A2UnionB,
                SignForm::A1A2UnionB,
                SignForm::BOnly,
            ][rng.gen_range(0..4)];
            let shell = SignPattern::new(ell, form, m.clone(), [], []).unwrap();
            let e: Vec<_> = shell
                .all_labels()
                .into_iter()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let t = Truncation::new(ell, 5, 5).unwrap();
            let exc: Vec<_> = t
                .enumerate()
                .into_iter()
                .filter(|p| shell.piece_of(p) == Piece::Box && rng.gen_bool(0.5))
                .collect();
            let pat = SignPattern::new(ell, form, m, e, exc).unwrap();
            let got = classify_sign_pattern(&pat.synthesize_dirac(), &t, 5).unwrap();
            assert_eq!(got.form, pat.form);
            assert_eq!(khomology_class(&got), khomology_class(&pat));
            for p in t.enumerate() {
                assert_eq!(
                    got.reconstructed_contains(&p),
                    pat.reconstructed_contains(&p)
                );
            }
        }
    }
}
