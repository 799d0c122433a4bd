use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{sigma_quotient, Alphabet, ExtensionError, ModuleSpaceModel, Monomial, Summand};
use crate::lattice::Axis;
use crate::qoperators::{compressed_word, op_norm, SparseOperator};

fn expect_alphabet(m: &Monomial, a: Alphabet, ell: usize) -> Result<(), ExtensionError> {
    if !m.is_unit() && m.alphabet != a {
        return Err(ExtensionError::WrongAlphabet { expected: a });
    }
    let probe = Monomial {
        alphabet: a,
        letters: m.letters.clone(),
    };
    probe.check_ell(ell)
}

/// ψ_{ℓ+1}(m) on the truncated L₂(ℕ^{ℓ+1}) ⊗ C(S¹).
///
/// y_k for k ≤ ℓ+1 is the usual weighted raising operator on the k-th ℕ factor,
/// y_{ℓ+2} is q^{n_1+…+n_{ℓ+1}} ⊗ Z. The word is evaluated exactly and then compressed.
pub fn psi_rep(
    m: &Monomial,
    q: f64,
    model: &ModuleSpaceModel,
) -> Result<SparseOperator, ExtensionError> {
    expect_alphabet(m, Alphabet::Y, model.ell())?;
    Ok(compressed_word(&m.word(), q, &model.f_window())?)
}

/// σ̃_ℓ(m) = π_ℓ(m) ⊗ I on the ℋ_ℓ ⊗ C(S¹) window.
pub fn sigma_tilde(
    m: &Monomial,
    q: f64,
    model: &ModuleSpaceModel,
) -> Result<SparseOperator, ExtensionError> {
    expect_alphabet(m, Alphabet::Z, model.ell())?;
    let h = compressed_word(&m.word(), q, &model.h_window())?;
    Ok(h.tensor_identity(Axis::Integer(model.fourier_max())))
}

/// σ̂_ℓ(m) = Q_ℓ σ̃_ℓ(m) Q_ℓ, read on F_{ℓ+1} through U.
pub fn sigma_hat(
    m: &Monomial,
    q: f64,
    model: &ModuleSpaceModel,
) -> Result<SparseOperator, ExtensionError> {
    let tilde = sigma_tilde(m, q, model)?;
    let h_space = tilde.space().clone();
    let f_space = model.f_window().space();
    let upper = |idx: usize| -> Option<usize> {
        match model.transport_point(&h_space.coords_at(idx)) {
            (Summand::Upper, p) => f_space.index_of(&p),
            (Summand::Lower, _) => None,
        }
    };
    let triplets: Vec<(usize, usize, Complex64)> = tilde
        .triplets()
        .filter_map(|(r, c, v)| Some((upper(r)?, upper(c)?, v)))
        .collect();
    Ok(SparseOperator::from_triplets(f_space, triplets)?)
}

/// Points of F_{ℓ+1} ⊗ Fourier outside the degree-`r` box whose images under a
/// word of length `len` stay inside the ℕ window.
pub fn tail_region(model: &ModuleSpaceModel, r: u32, len: usize) -> impl Fn(&[i64]) -> bool {
    let n = model.ell() + 1;
    let cap = model.n_max() as i64 - len as i64;
    move |p: &[i64]| {
        let nat = &p[..n];
        nat.iter().sum::<i64>() > r as i64 && nat.iter().all(|&c| c <= cap)
    }
}

/// ‖σ̂_ℓ(m) − ψ_{ℓ+1}(m̃)‖ restricted to the tail outside the degree-`r` box.
///
/// For m over the z-alphabet, m̃ is the same word in the y letters. For m over the
/// y-alphabet, the σ̂ side is σ̂_ℓ(σ_ℓ(m)), which is 0 when m contains y_{ℓ+2}.
pub fn lift_residual(
    m: &Monomial,
    q: f64,
    model: &ModuleSpaceModel,
    r: u32,
) -> Result<f64, ExtensionError> {
    let ell = model.ell();
    let n_cap = model.n_max() as usize;
    if m.len() > n_cap || r as usize >= (ell + 1) * (n_cap - m.len()) {
        return Err(ExtensionError::BadRadius {
            r,
            n_max: model.n_max(),
        });
    }
    let (hat, psi) = match m.alphabet {
        Alphabet::Z => (
            Some(sigma_hat(m, q, model)?),
            psi_rep(&m.relabel(Alphabet::Y), q, model)?,
        ),
        Alphabet::Y => {
            let hat = match sigma_quotient(m, ell)? {
                Some(z) => Some(sigma_hat(&z, q, model)?),
                None => None,
            };
            (hat, psi_rep(m, q, model)?)
        }
    };
    let diff = match hat {
        Some(h) => h.sub(&psi)?,
        None => psi.scale(Complex64::new(-1.0, 0.0)),
    };
    let tail = diff.compress(tail_region(model, r, m.len()));
    Ok(op_norm(&tail)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftProfile {
    pub monomial: String,
    pub ell: usize,
    pub q: f64,
    pub n_max: u32,
    /// residual at R = 0, 1, …
    pub residuals: Vec<f64>,
    pub monotone: bool,
    pub exactly_zero: bool,
    /// λ in residual ≈ C·λ^R, least squares over the nonzero residuals
    pub decay_factor: Option<f64>,
    pub prefactor: Option<f64>,
}

pub fn lift_profile(
    m: &Monomial,
    q: f64,
    model: &ModuleSpaceModel,
    r_max: u32,
) -> Result<LiftProfile, ExtensionError> {
    let residuals: Vec<f64> = (0..=r_max)
        .map(|r| lift_residual(m, q, model, r))
        .collect::<Result<_, _>>()?;
    let monotone = residuals
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    let exactly_zero = residuals.iter().all(|&x| x == 0.0);
    let pts: Vec<(f64, f64)> = residuals
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 1e-14)
        .map(|(r, &x)| (r as f64, x.ln()))
        .collect();
    let (decay_factor, prefactor) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        (Some(slope.exp()), Some((my - slope * mx).exp()))
    } else {
        (None, None)
    };
    Ok(LiftProfile {
        monomial: m.to_string(),
        ell: model.ell(),
        q,
        n_max: model.n_max(),
        residuals,
        monotone,
        exactly_zero,
        decay_factor,
        prefactor,
    })
}
