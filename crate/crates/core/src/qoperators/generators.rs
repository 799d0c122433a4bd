use num_complex::Complex64;

use super::{op_norm, OperatorError, SparseOperator};
use crate::lattice::{IndexSpace, Truncation};

pub(crate) fn check_q(q: f64) -> Result<(), OperatorError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(OperatorError::QOutOfRange(q));
    }
    Ok(())
}

/// Coefficient of z_k on e_γ: z_k e_γ = coeff · e_{γ+ε_k}.
///
/// For k ≤ ℓ this is q^{γ(1)+…+γ(k−1)} √(1 − q^{2γ(k)+2}); for k = ℓ+1 it is
/// q^{γ(1)+…+γ(ℓ)}. `gamma` may carry trailing axes beyond ℓ+1; they are ignored.
pub fn generator_coefficient(k: usize, ell: usize, q: f64, gamma: &[i64]) -> f64 {
    let prefix: i64 = gamma[..k - 1].iter().sum();
    let weight = q.powi(prefix as i32);
    if k <= ell {
        weight * (1.0 - q.powi(2 * gamma[k - 1] as i32 + 2)).sqrt()
    } else {
        weight
    }
}

/// z_k of the ℓ-sphere acting on `space`, whose first ℓ+1 axes carry ℕ^ℓ × ℤ.
/// Any further axes are acted on by the identity.
pub(crate) fn generator_on_space(
    k: usize,
    ell: usize,
    q: f64,
    space: &IndexSpace,
) -> Result<SparseOperator, OperatorError> {
    check_q(q)?;
    if k == 0 || k > ell + 1 {
        return Err(OperatorError::BadGenerator { k, ell });
    }
    Ok(SparseOperator::from_columns(space.clone(), |p| {
        let mut row = p.to_vec();
        row[k - 1] += 1;
        vec![(
            row,
            Complex64::new(generator_coefficient(k, ell, q, p), 0.0),
        )]
    }))
}

/// Applies a word of generators to e_γ on the whole lattice, rightmost letter
/// first. Each letter is `(k, adjoint)`. Returns `None` when the word kills e_γ.
pub fn apply_word_unbounded(
    ell: usize,
    q: f64,
    word: &[(usize, bool)],
    gamma: &[i64],
) -> Option<(Vec<i64>, f64)> {
    let mut p = gamma.to_vec();
    let mut amp = 1.0;
    for &(k, adjoint) in word.iter().rev() {
        if adjoint {
            p[k - 1] -= 1;
            if k <= ell && p[k - 1] < 0 {
                return None;
            }
            amp *= generator_coefficient(k, ell, q, &p);
        } else {
            amp *= generator_coefficient(k, ell, q, &p);
            p[k - 1] += 1;
        }
        if amp == 0.0 {
            return None;
        }
    }
    Some((p, amp))
}

/// P π_ℓ(word) P: the word is evaluated on the whole lattice and only the
/// result is compressed, so intermediate vectors may leave the window.
pub fn compressed_word(
    word: &[(usize, bool)],
    q: f64,
    trunc: &Truncation,
) -> Result<SparseOperator, OperatorError> {
    check_q(q)?;
    let ell = trunc.ell();
    if let Some(&(k, _)) = word.iter().find(|(k, _)| *k == 0 || *k > ell + 1) {
        return Err(OperatorError::BadGenerator { k, ell });
    }
    Ok(SparseOperator::from_columns(trunc.space(), |p| {
        apply_word_unbounded(ell, q, word, p)
            .map(|(row, a)| vec![(row, Complex64::new(a, 0.0))])
            .unwrap_or_default()
    }))
}

/// π_ℓ(z_k) compressed to the window. Images leaving the window are dropped.
pub fn generator_z(k: usize, q: f64, trunc: &Truncation) -> Result<SparseOperator, OperatorError> {
    generator_on_space(k, trunc.ell(), q, &trunc.space())
}

/// The generators z_1, …, z_{ℓ+1} on one window.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    q: f64,
    trunc: Truncation,
    z: Vec<SparseOperator>,
    z_adj: Vec<SparseOperator>,
}

impl GeneratorSet {
    pub fn new(q: f64, trunc: &Truncation) -> Result<Self, OperatorError> {
        check_q(q)?;
        let z: Vec<_> = (1..=trunc.ell() + 1)
            .map(|k| generator_z(k, q, trunc))
            .collect::<Result<_, _>>()?;
        let z_adj = z.iter().map(SparseOperator::adjoint).collect();
        Ok(Self {
            q,
            trunc: trunc.clone(),
            z,
            z_adj,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn ell(&self) -> usize {
        self.trunc.ell()
    }

    pub fn trunc(&self) -> &Truncation {
        &self.trunc
    }

    /// z_k, 1-based.
    pub fn z(&self, k: usize) -> &SparseOperator {
        &self.z[k - 1]
    }

    /// z_k^*, 1-based.
    pub fn z_adj(&self, k: usize) -> &SparseOperator {
        &self.z_adj[k - 1]
    }

    pub fn space(&self) -> IndexSpace {
        self.trunc.space()
    }
}

/// U_w = w_1^N ⊗ … ⊗ w_{ℓ+1}^N, diagonal with entry Π w_i^{γ(i)}.
pub fn torus_unitary(w: &[Complex64], trunc: &Truncation) -> Result<SparseOperator, OperatorError> {
    if w.len() != trunc.ell() + 1 {
        return Err(OperatorError::PhaseLength {
            expected: trunc.ell() + 1,
            got: w.len(),
        });
    }
    if let Some(bad) = w.iter().find(|x| (x.norm() - 1.0).abs() > 1e-12) {
        return Err(OperatorError::NotUnimodular(bad.norm()));
    }
    Ok(SparseOperator::diagonal(trunc.space(), |p| {
        w.iter().zip(p).map(|(wi, &g)| wi.powi(g as i32)).product()
    }))
}

/// max_k ‖w_k z_k − U_w z_k U_w^*‖
pub fn covariance_residual(gens: &GeneratorSet, w: &[Complex64]) -> Result<f64, OperatorError> {
    let u = torus_unitary(w, gens.trunc())?;
    let u_adj = u.adjoint();
    let mut worst = 0.0f64;
    for k in 1..=gens.ell() + 1 {
        let conj = u.multiply(gens.z(k))?.multiply(&u_adj)?;
        let diff = gens.z(k).add(&conj, w[k - 1], Complex64::new(-1.0, 0.0))?;
        worst = worst.max(op_norm(&diff)?);
    }
    Ok(worst)
}
