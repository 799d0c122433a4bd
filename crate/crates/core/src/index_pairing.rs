//! The index pairing between the unitary u = χ_{1}(z*z)(z − 1) + 1,
//! z = z_{ℓ+1}, and the sign projection P of an equivariant Dirac operator.
//!
//! u shifts the line L = {(0,…,0,m)} by ε_{ℓ+1} and fixes every other basis
//! vector, so PuP = P off L and the index of PuP is decided on L ∩ Γ⁺ alone.
//! A finite matrix always has index 0, so the exact value comes from the
//! lattice: on L, ker PuP is spanned by the e_m with m ∈ Γ⁺, m+1 ∉ Γ⁺, and
//! the cokernel by the e_m with m ∈ Γ⁺, m−1 ∉ Γ⁺. A dense SVD of the
//! compressed u on a segment of L is the numerical cross-check.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dirac::{commutator_bound_check, DiracError, EquivariantDirac, Verdict};
use crate::growth_graph::{classify_sign_pattern, khomology_class, SignForm};
use crate::lattice::{LatticePoint, Truncation};
use crate::qoperators::{compressed_word, generator_z, OperatorError, SparseOperator};

/// Singular values above this count toward the numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-9;
/// Largest allowed entry-wise gap between the two constructions of u.
pub const ROUTE_TOLERANCE: f64 = 1e-12;
/// Bound on M used for the sign-pattern cross-check.
pub const DEFAULT_SEARCH_MAX: u32 = 5;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Dirac(#[from] DiracError),
    #[error("the two constructions of u differ by {0:e}")]
    RoutesDisagree(f64),
    #[error("u moves {0} but not along e_(ell+1) within a full line")]
    NotAShiftLine(LatticePoint),
    #[error(
        "sign of d is not constant near the end of the line through {line}; enlarge the window"
    )]
    UncertifiedTail { line: LatticePoint },
    #[error("combinatorial (ker {ker}, coker {coker}) and numerical (ker {num_ker}, coker {num_coker}) counts differ")]
    Inconsistent {
        ker: usize,
        coker: usize,
        num_ker: usize,
        num_coker: usize,
    },
    #[error("commutators of {0} with the generators are not bounded on this window")]
    NotBounded(String),
    #[error("index {index} disagrees with the sign-pattern class {class}")]
    ClassMismatch { index: i64, class: i32 },
}

/// A partial map on basis vectors with unit amplitudes: e_γ ↦ e_{map(γ)}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisPartialMap {
    map: BTreeMap<LatticePoint, LatticePoint>,
}

impl BasisPartialMap {
    /// u on the window; points whose image leaves the window are outside the domain.
    pub fn unitary_u(trunc: &Truncation) -> Self {
        let ell = trunc.ell();
        let map = trunc
            .enumerate()
            .into_iter()
            .filter_map(|p| {
                let img = if p[..ell].iter().all(|&c| c == 0) {
                    p.add_epsilon(ell + 1).ok()?
                } else {
                    p.clone()
                };
                trunc.contains(&img).then_some((p, img))
            })
            .collect();
        Self { map }
    }

    pub fn apply(&self, g: &LatticePoint) -> Option<&LatticePoint> {
        self.map.get(g)
    }

    pub fn domain(&self) -> impl Iterator<Item = &LatticePoint> {
        self.map.keys()
    }

    pub fn is_injective(&self) -> bool {
        let mut images: Vec<_> = self.map.values().collect();
        images.sort();
        images.windows(2).all(|w| w[0] != w[1])
    }

    /// Points not fixed by the map.
    pub fn moved(&self) -> impl Iterator<Item = (&LatticePoint, &LatticePoint)> {
        self.map.iter().filter(|(a, b)| a != b)
    }

    pub fn to_operator(&self, trunc: &Truncation) -> SparseOperator {
        SparseOperator::from_columns(trunc.space(), |p| {
            let p = LatticePoint::new(p.to_vec()).expect("window point");
            self.map
                .get(&p)
                .map(|img| vec![(img.coords().to_vec(), Complex64::new(1.0, 0.0))])
                .unwrap_or_default()
        })
    }
}

#[derive(Clone, Debug)]
pub struct UnitaryU {
    pub map: BasisPartialMap,
    /// the basis map as an operator
    pub combinatorial: SparseOperator,
    /// χ_{1}(z*z)(z − 1) + 1 from the compressed generator
    pub functional: SparseOperator,
    /// entry-wise gap between the two on columns with γ(ℓ+1) < m_max
    pub max_route_diff: f64,
}

/// Builds u twice: from the basis map, and by functional calculus from
/// z = z_{ℓ+1}. z*z is diagonal with entries q^{2(γ(1)+…+γ(ℓ))}; it is taken
/// as the compression of the lattice operator, so its spectrum on the window
/// is a finite subset of {q^{2j}} and χ_{1} is the exact projection onto the
/// eigenvalue 1. The compressed z vanishes at γ(ℓ+1) = m_max, and those
/// columns are left out of the comparison.
pub fn build_u(q: f64, trunc: &Truncation) -> Result<UnitaryU, IndexError> {
    let ell = trunc.ell();
    let z = generator_z(ell + 1, q, trunc)?;
    let zz = compressed_word(&[(ell + 1, true), (ell + 1, false)], q, trunc)?;
    let diag = zz.diagonal_entries().expect("z*z is diagonal");
    let gap = 0.5 * (1.0 - q * q);
    let chi = SparseOperator::diagonal(trunc.space(), |p| {
        let j = trunc.index_of(p).expect("window point");
        if (diag[j].re - 1.0).abs() < gap {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let id = SparseOperator::identity(trunc.space());
    let functional = chi
        .multiply(&z.sub(&id)?)?
        .add(&id, 1.0.into(), 1.0.into())?;

    let map = BasisPartialMap::unitary_u(trunc);
    let combinatorial = map.to_operator(trunc);
    let diff = functional.sub(&combinatorial)?;
    let top = trunc.m_max() as i64;
    let max_route_diff = trunc
        .space()
        .points()
        .enumerate()
        .filter(|(_, p)| p[ell] < top)
        .flat_map(|(j, _)| diff.column(j).iter().map(|e| e.1.norm()))
        .fold(0.0, f64::max);
    if max_route_diff > ROUTE_TOLERANCE {
        return Err(IndexError::RoutesDisagree(max_route_diff));
    }
    Ok(UnitaryU {
        map,
        combinatorial,
        functional,
        max_route_diff,
    })
}

/// Γ⁺ = {γ : d(γ) > 0}, the range of P = (1 + sign D)/2.
#[derive(Clone, Debug)]
pub struct SignDomain {
    dirac: EquivariantDirac,
}

pub fn sign_projection(d: &EquivariantDirac) -> SignDomain {
    SignDomain { dirac: d.clone() }
}

impl SignDomain {
    pub fn contains(&self, g: &[i64]) -> bool {
        self.dirac.value(g) > 0.0
    }

    pub fn points_in(&self, trunc: &Truncation) -> Vec<LatticePoint> {
        trunc
            .enumerate()
            .into_iter()
            .filter(|p| self.contains(p))
            .collect()
    }

    pub fn projection(&self, trunc: &Truncation) -> SparseOperator {
        SparseOperator::diagonal(trunc.space(), |p| {
            Complex64::new(if self.contains(p) { 1.0 } else { 0.0 }, 0.0)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexComputation {
    pub index: i64,
    pub kernel: Vec<LatticePoint>,
    pub cokernel: Vec<LatticePoint>,
    /// lines of the lattice on which u is not the identity
    pub lines: Vec<LatticePoint>,
    /// sign of d checked constant on |γ(ℓ+1)| ≥ m_max − band + 1 on each line
    pub band: u32,
}

fn line_point(base: &[i64], m: i64) -> Vec<i64> {
    let mut p = base.to_vec();
    p.push(m);
    p
}

/// Exact index of PuP. `u` must act on `trunc` as a unit shift along
/// ε_{ℓ+1} on whole lines and as the identity elsewhere; the sign of d must
/// settle on the outer `band` layers of each such line.
pub fn fredholm_index(
    p: &SignDomain,
    u: &BasisPartialMap,
    trunc: &Truncation,
) -> Result<IndexComputation, IndexError> {
    let ell = trunc.ell();
    let top = trunc.m_max() as i64;
    let mut lines: BTreeMap<Vec<i64>, Vec<i64>> = BTreeMap::new();
    for (a, b) in u.moved() {
        if a.add_epsilon(ell + 1).ok().as_ref() != Some(b) {
            return Err(IndexError::NotAShiftLine(a.clone()));
        }
        lines.entry(a[..ell].to_vec()).or_default().push(a[ell]);
    }
    let band = (trunc.interior_margin() + 1).max(2).min(top as u32 + 1);
    let mut kernel = Vec::new();
    let mut cokernel = Vec::new();
    for (base, ms) in &lines {
        let full: Vec<i64> = (-top..top).collect();
        if *ms != full {
            return Err(IndexError::NotAShiftLine(LatticePoint::from_raw(
                line_point(base, ms[0]),
            )));
        }
        // past either end the certified tail sign continues
        let s = |m: i64| p.contains(&line_point(base, m.clamp(-top, top)));
        let b = band as i64;
        let settled = |range: std::ops::RangeInclusive<i64>| {
            let v: Vec<bool> = range.map(s).collect();
            v.windows(2).all(|w| w[0] == w[1])
        };
        if !settled(top - b + 1..=top) || !settled(-top..=-top + b - 1) {
            return Err(IndexError::UncertifiedTail {
                line: LatticePoint::from_raw(line_point(base, 0)),
            });
        }
        for m in -top - 1..=top + 1 {
            if !s(m) {
                continue;
            }
            if !s(m + 1) && m <= top {
                kernel.push(LatticePoint::from_raw(line_point(base, m)));
            }
            if !s(m - 1) && m >= -top {
                cokernel.push(LatticePoint::from_raw(line_point(base, m)));
            }
        }
    }
    Ok(IndexComputation {
        index: kernel.len() as i64 - cokernel.len() as i64,
        kernel,
        cokernel,
        lines: lines
            .keys()
            .map(|b| LatticePoint::from_raw(line_point(b, 0)))
            .collect(),
        band,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericalIndex {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub kernel: usize,
    pub cokernel: usize,
}

/// Dense block of P u P on the line L: columns m ∈ [−m_max, m_max − 1] ∩ Γ⁺,
/// rows m ∈ [−m_max + 1, m_max] ∩ Γ⁺. With the sign settled near both ends
/// this block has the same kernel and cokernel dimensions as PuP on L.
pub fn numerical_index(p: &SignDomain, u: &SparseOperator, trunc: &Truncation) -> NumericalIndex {
    let ell = trunc.ell();
    let top = trunc.m_max() as i64;
    let base = vec![0i64; ell];
    let cols: Vec<Vec<i64>> = (-top..top)
        .map(|m| line_point(&base, m))
        .filter(|g| p.contains(g))
        .collect();
    let rows: Vec<Vec<i64>> = (-top + 1..=top)
        .map(|m| line_point(&base, m))
        .filter(|g| p.contains(g))
        .collect();
    let rank = if rows.is_empty() || cols.is_empty() {
        0
    } else {
        let a = DMatrix::from_fn(rows.len(), cols.len(), |i, j| u.get(&rows[i], &cols[j]));
        a.singular_values()
            .iter()
            .filter(|&&s| s > RANK_TOLERANCE)
            .count()
    };
    NumericalIndex {
        rows: rows.len(),
        cols: cols.len(),
        rank,
        kernel: cols.len() - rank,
        cokernel: rows.len() - rank,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub dirac_name: String,
    pub ell: usize,
    pub q: f64,
    pub index: i64,
    pub sign_form: Option<SignForm>,
    pub khomology_class: Option<i32>,
    pub window: Truncation,
    pub kernel: Vec<LatticePoint>,
    pub cokernel: Vec<LatticePoint>,
    pub numerical: NumericalIndex,
    pub route_max_diff: f64,
    pub boundedness: Verdict,
}

/// build_u → sign_projection → fredholm_index, with the numerical rank and
/// the sign-pattern class as independent cross-checks.
pub fn pairing(
    d: &EquivariantDirac,
    q: f64,
    trunc: &Truncation,
) -> Result<PairingReport, IndexError> {
    let bounded = commutator_bound_check(d, q, trunc)?;
    if bounded.verdict == Verdict::Diverging {
        return Err(IndexError::NotBounded(d.name().to_string()));
    }
    let u = build_u(q, trunc)?;
    let p = sign_projection(d);
    let exact = fredholm_index(&p, &u.map, trunc)?;
    let numerical = numerical_index(&p, &u.functional, trunc);
    if numerical.kernel != exact.kernel.len() || numerical.cokernel != exact.cokernel.len() {
        return Err(IndexError::Inconsistent {
            ker: exact.kernel.len(),
            coker: exact.cokernel.len(),
            num_ker: numerical.kernel,
            num_coker: numerical.cokernel,
        });
    }
    let pattern = classify_sign_pattern(d, trunc, DEFAULT_SEARCH_MAX).ok();
    let class = pattern.as_ref().map(khomology_class);
    if let Some(class) = class {
        if class as i64 != exact.index {
            return Err(IndexError::ClassMismatch {
                index: exact.index,
                class,
            });
        }
    }
    Ok(PairingReport {
        dirac_name: d.name().to_string(),
        ell: trunc.ell(),
        q,
        index: exact.index,
        sign_form: pattern.map(|p| p.form),
        khomology_class: class,
        window: trunc.clone(),
        kernel: exact.kernel,
        cokernel: exact.cokernel,
        numerical,
        route_max_diff: u.max_route_diff,
        boundedness: bounded.verdict,
    })
}
