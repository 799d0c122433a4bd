use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ExtensionError;
use crate::lattice::Truncation;
use crate::qoperators::{GeneratorSet, SparseOperator};

pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

/// X_0², …, X_ℓ² built from generator products: X_0² = I, X_r² = X_{r−1}² − z_r z_r^*.
pub fn x_squared(gens: &GeneratorSet) -> Result<Vec<SparseOperator>, ExtensionError> {
    let mut out = vec![SparseOperator::identity(gens.space())];
    for r in 1..=gens.ell() {
        let zz = gens.z(r).multiply(gens.z_adj(r))?;
        let next = out[r - 1].sub(&zz)?;
        out.push(next);
    }
    Ok(out)
}

/// χ_{t}(X) for diagonal X with spectrum in {q^{2s}}: the eigenvalues nearest `t`
/// are selected with a relative gap of (1 − q²)/2.
pub fn spectral_projection(
    x: &SparseOperator,
    t: f64,
    q: f64,
) -> Result<SparseOperator, ExtensionError> {
    let diag = x
        .diagonal_entries()
        .ok_or_else(|| ExtensionError::NotDiagonal("X_r^2".into()))?;
    let gap = (1.0 - q * q) / 2.0;
    let space = x.space().clone();
    let hit: Vec<bool> = diag.iter().map(|v| (v.re / t - 1.0).abs() < gap).collect();
    Ok(SparseOperator::diagonal(space.clone(), |p| {
        let j = space.index_of(p).expect("point of the space");
        Complex64::new(if hit[j] { 1.0 } else { 0.0 }, 0.0)
    }))
}

/// p_{i_1 j_1} ⊗ … ⊗ p_{i_ℓ j_ℓ} ⊗ S^k, with S e_m = e_{m−1}, compressed to the window.
pub fn elementary_target(i: &[i64], j: &[i64], k: i64, trunc: &Truncation) -> SparseOperator {
    let ell = trunc.ell();
    SparseOperator::from_columns(trunc.space(), |p| {
        if p[..ell] != *j {
            return Vec::new();
        }
        let mut row = i.to_vec();
        row.push(p[ell] - k);
        vec![(row, Complex64::new(1.0, 0.0))]
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementaryReport {
    pub ell: usize,
    pub q: f64,
    pub i: Vec<i64>,
    pub j: Vec<i64>,
    pub k: i64,
    /// the generator word, rightmost factor applied first
    pub word: String,
    pub normalization: f64,
    pub max_abs_diff: f64,
    pub matches: bool,
}

#[derive(Clone, Debug)]
pub struct ElementaryReconstruction {
    pub built: SparseOperator,
    pub target: SparseOperator,
    pub report: ElementaryReport,
}

fn power(op: &SparseOperator, n: u64) -> Result<SparseOperator, ExtensionError> {
    let mut out = SparseOperator::identity(op.space().clone());
    for _ in 0..n {
        out = op.multiply(&out)?;
    }
    Ok(out)
}

fn power_label(name: String, n: u64) -> String {
    if n == 1 {
        name
    } else {
        format!("({name})^{n}")
    }
}

/// Builds p_{ij} ⊗ S^k as E_i · (moves) · (shift) · E_j / c.
///
/// E_j = Π_r χ_{q^{2(j_1+…+j_r)}}(X_r²) projects onto {γ(1..ℓ) = j}. The shift
/// S^k is z_{ℓ+1}^{|k|} for k < 0 and (z_{ℓ+1}^*)^k for k > 0; the moves are
/// z_r^{i_r−j_r} or (z_r^*)^{j_r−i_r}. The scalar c is the amplitude the word
/// picks up along the way, which does not depend on γ(ℓ+1).
pub fn reconstruct_elementary_report(
    i: &[i64],
    j: &[i64],
    k: i64,
    q: f64,
    trunc: &Truncation,
) -> Result<ElementaryReconstruction, ExtensionError> {
    let ell = trunc.ell();
    let n_max = trunc.n_max() as i64;
    for (name, v) in [("i", i), ("j", j)] {
        if v.len() != ell {
            return Err(ExtensionError::BadIndex(format!(
                "{name} has {} entries, expected {ell}",
                v.len()
            )));
        }
        if v.iter().any(|&c| c < 0 || c > n_max) {
            return Err(ExtensionError::BadIndex(format!(
                "{name} = {v:?} leaves the window"
            )));
        }
    }
    if k.unsigned_abs() > trunc.m_max() as u64 {
        return Err(ExtensionError::BadIndex(format!(
            "|k| = {} exceeds m_max",
            k.abs()
        )));
    }

    let gens = GeneratorSet::new(q, trunc)?;
    let x2 = x_squared(&gens)?;
    let projection = |v: &[i64]| -> Result<SparseOperator, ExtensionError> {
        let mut e = SparseOperator::identity(gens.space());
        let mut prefix = 0i64;
        for r in 1..=ell {
            prefix += v[r - 1];
            let chi = spectral_projection(&x2[r], q.powi(2 * prefix as i32), q)?;
            e = chi.multiply(&e)?;
        }
        Ok(e)
    };

    let mut words = vec![format!("E{j:?}")];
    let mut op = projection(j)?;
    let last = ell + 1;
    if k < 0 {
        op = power(gens.z(last), k.unsigned_abs())?.multiply(&op)?;
        words.push(power_label(format!("z{last}"), k.unsigned_abs()));
    } else if k > 0 {
        op = power(gens.z_adj(last), k as u64)?.multiply(&op)?;
        words.push(power_label(format!("z{last}*"), k as u64));
    }
    for r in 1..=ell {
        let d = i[r - 1] - j[r - 1];
        if d > 0 {
            op = power(gens.z(r), d as u64)?.multiply(&op)?;
            words.push(power_label(format!("z{r}"), d as u64));
        } else if d < 0 {
            op = power(gens.z_adj(r), d.unsigned_abs())?.multiply(&op)?;
            words.push(power_label(format!("z{r}*"), d.unsigned_abs()));
        }
    }
    op = projection(i)?.multiply(&op)?;
    words.push(format!("E{i:?}"));
    words.reverse();

    // amplitude on a column whose image stays in the window
    let m0 = k.max(0);
    let mut col = j.to_vec();
    col.push(m0);
    let mut row = i.to_vec();
    row.push(m0 - k);
    let c = op.get(&row, &col).re;
    let built = op.scale(Complex64::new(1.0 / c, 0.0));
    let target = elementary_target(i, j, k, trunc);
    let diff = built.max_abs_diff(&target)?;
    let report = ElementaryReport {
        ell,
        q,
        i: i.to_vec(),
        j: j.to_vec(),
        k,
        word: format!("(1/c) {}", words.join(" ")),
        normalization: c,
        max_abs_diff: diff,
        matches: diff <= RECONSTRUCTION_TOLERANCE,
    };
    Ok(ElementaryReconstruction {
        built,
        target,
        report,
    })
}

/// As [`reconstruct_elementary_report`], failing when the match is worse than 1e−10.
pub fn reconstruct_elementary(
    i: &[i64],
    j: &[i64],
    k: i64,
    q: f64,
    trunc: &Truncation,
) -> Result<ElementaryReconstruction, ExtensionError> {
    let rec = reconstruct_elementary_report(i, j, k, q, trunc)?;
    if !rec.report.matches {
        return Err(ExtensionError::ReconstructionMismatch {
            word: rec.report.word,
            diff: rec.report.max_abs_diff,
        });
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_squared_is_diagonal_with_q_powers() {
        let q: f64 = 0.4;
        let t = Truncation::new(2, 3, 2).unwrap();
        let gens = GeneratorSet::new(q, &t).unwrap();
        let x2 = x_squared(&gens).unwrap();
        for p in t.enumerate() {
            for r in 0..=2 {
                let expect = q.powi(2 * p[..r].iter().sum::<i64>() as i32);
                assert!((x2[r].get(&p, &p).re - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn diagonal_projection() {
        let t = Truncation::new(1, 4, 3).unwrap();
        let rec = reconstruct_elementary(&[0], &[0], 0, 0.5, &t).unwrap();
        assert_eq!(rec.report.normalization, 1.0);
        for p in t.enumerate() {
            let expect = if p[0] == 0 { 1.0 } else { 0.0 };
            assert_eq!(rec.built.get(&p, &p).re, expect);
        }
    }

    #[test]
    fn raising_with_negative_shift() {
        let t = Truncation::new(1, 4, 3).unwrap();
        let rec = reconstruct_elementary(&[1], &[0], -1, 0.5, &t).unwrap();
        assert!(rec.report.max_abs_diff <= 1e-10);
        assert_eq!(rec.built.get(&[1, 1], &[0, 0]).re, 1.0);
        assert_eq!(rec.report.word, "(1/c) E[1] z1 z2 E[0]");
    }

    #[test]
    fn diagonal_entries_give_projections() {
        let t = Truncation::new(2, 3, 3).unwrap();
        for i in [[0, 0], [1, 2], [2, 1]] {
            let p = reconstruct_elementary(&i, &i, 0, 0.3, &t).unwrap().built;
            assert_eq!(p.adjoint(), p);
            assert!(p.multiply(&p).unwrap().max_abs_diff(&p).unwrap() < 1e-15);
        }
    }

    #[test]
    fn bad_indices() {
        let t = Truncation::new(2, 2, 2).unwrap();
        assert!(reconstruct_elementary(&[0], &[0, 0], 0, 0.5, &t).is_err());
        assert!(reconstruct_elementary(&[3, 0], &[0, 0], 0, 0.5, &t).is_err());
        assert!(reconstruct_elementary(&[0, 0], &[0, 0], 3, 0.5, &t).is_err());
    }
}
