//! The extension 0 → J_{ℓ+1} → C(S_q^{2ℓ+3}) → C(S_q^{2ℓ+1}) → 0 on finite windows.
//!
//! C(S¹) is modelled by its Fourier modes f_m, m ∈ ℤ, so the module
//! L₂(ℕ^{ℓ+1}) ⊗ C(S¹) becomes a scalar space with one extra bilateral axis and
//! multiplication by the coordinate function becomes the unit shift f_m ↦ f_{m+1}.
//! This is the same index set as the ℋ_{ℓ+1} window, with the Fourier mode in the
//! ℤ slot, which is why ψ_{ℓ+1} coincides with π_{ℓ+1} there.

mod ev1;
mod ideal;
mod lift;
mod monomial;

pub use ev1::{ev1_pullback_check, localize, Ev1Report};
pub use ideal::{
    elementary_target, reconstruct_elementary, reconstruct_elementary_report, spectral_projection,
    x_squared, ElementaryReconstruction, ElementaryReport, RECONSTRUCTION_TOLERANCE,
};
pub use lift::{
    lift_profile, lift_residual, psi_rep, sigma_hat, sigma_tilde, tail_region, LiftProfile,
};
pub use monomial::{sigma_quotient, Alphabet, Letter, Monomial};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Axis, IndexSpace, LatticeError, Truncation};
use crate::qoperators::{OperatorError, SparseOperator};

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("cannot parse monomial {input:?}: {msg}")]
    Parse { input: String, msg: String },
    #[error("monomial mixes the z and y alphabets")]
    MixedAlphabet,
    #[error("expected a monomial over the {expected:?} alphabet")]
    WrongAlphabet { expected: Alphabet },
    #[error("letter {letter} does not exist for ell = {ell}")]
    LetterOutOfRange { letter: String, ell: usize },
    #[error("bad index: {0}")]
    BadIndex(String),
    #[error("radius {r} leaves no room in a window with n_max = {n_max}")]
    BadRadius { r: u32, n_max: u32 },
    #[error("operator {0} is not diagonal")]
    NotDiagonal(String),
    #[error("reconstruction via {word} differs from the target by {diff:e}")]
    ReconstructionMismatch { word: String, diff: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Which copy of F_{ℓ+1} a ℤ coordinate lands in under U.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Summand {
    /// j ≥ 0, the range of Q_ℓ
    Upper,
    /// j < 0, sent to index −j−1
    Lower,
}

/// U^*: e_j ↦ e_j ⊕ 0 for j ≥ 0 and e_j ↦ 0 ⊕ e_{−j−1} for j < 0.
pub fn transport(j: i64) -> (Summand, i64) {
    if j >= 0 {
        (Summand::Upper, j)
    } else {
        (Summand::Lower, -j - 1)
    }
}

/// Truncated L₂(ℕ^{ℓ+1}) ⊗ C(S¹) together with the ℋ_ℓ ⊗ C(S¹) window that
/// U identifies with two copies of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpaceModel {
    ell: usize,
    n_max: u32,
    fourier_max: u32,
}

impl ModuleSpaceModel {
    pub fn new(ell: usize, n_max: u32, fourier_max: u32) -> Result<Self, ExtensionError> {
        Truncation::new(ell + 1, n_max, fourier_max)?;
        Ok(Self {
            ell,
            n_max,
            fourier_max,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn fourier_max(&self) -> u32 {
        self.fourier_max
    }

    /// ℕ^{ℓ+1} × (Fourier modes), as a window of the ℓ+1 lattice.
    pub fn f_window(&self) -> Truncation {
        Truncation::new(self.ell + 1, self.n_max, self.fourier_max).expect("validated in new")
    }

    /// The ℋ_ℓ window whose ℤ axis covers both transported copies of {0, …, n_max}.
    pub fn h_window(&self) -> Truncation {
        Truncation::new(self.ell, self.n_max, self.n_max + 1).expect("validated in new")
    }

    /// ℋ_ℓ window ⊗ Fourier modes.
    pub fn h_module_space(&self) -> IndexSpace {
        self.h_window()
            .space()
            .with_axis(Axis::Integer(self.fourier_max))
    }

    /// Point of F_{ℓ+1} ⊗ Fourier for a point (γ, f) of ℋ_ℓ ⊗ Fourier.
    pub fn transport_point(&self, p: &[i64]) -> (Summand, Vec<i64>) {
        let ell = self.ell;
        let (s, j) = transport(p[ell]);
        let mut out = p.to_vec();
        out[ell] = j;
        (s, out)
    }

    /// Z: f_m ↦ f_{m+1} on the Fourier axis.
    pub fn fourier_shift(&self) -> SparseOperator {
        let last = self.ell + 1;
        SparseOperator::from_columns(self.f_window().space(), |p| {
            let mut row = p.to_vec();
            row[last] += 1;
            vec![(row, num_complex::Complex64::new(1.0, 0.0))]
        })
    }
}
