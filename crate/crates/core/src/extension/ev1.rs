use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{sigma_tilde, ExtensionError, ModuleSpaceModel, Monomial, Summand};
use crate::dirac::EquivariantDirac;
use crate::qoperators::{compressed_word, SparseOperator};

/// Localization along ev₁: L(A)[γ', γ] = Σ_{m'} A[(γ', m'), (γ, 0)].
///
/// A vector e_γ ⊗ 1 is e_γ ⊗ f_0; evaluating a Fourier series at 1 sums its
/// coefficients.
pub fn localize(
    a: &SparseOperator,
    model: &ModuleSpaceModel,
) -> Result<SparseOperator, ExtensionError> {
    let h = model.h_window();
    let module = a.space().clone();
    let mut triplets = Vec::new();
    for (gi, g) in h.space().points().enumerate() {
        let mut col = g.clone();
        col.push(0);
        let c = module
            .index_of(&col)
            .expect("Fourier mode 0 is in the window");
        for &(r, v) in a.column(c) {
            let row = module.coords_at(r);
            let gr = h
                .space()
                .index_of(&row[..row.len() - 1])
                .expect("same ℋ_ℓ window");
            triplets.push((gr, gi, v));
        }
    }
    Ok(SparseOperator::from_triplets(h.space(), triplets)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ev1Report {
    pub ell: usize,
    pub q: f64,
    pub n_max: u32,
    pub m_max: u32,
    pub fourier_max: u32,
    /// the localized space has the dimension of the ℋ_ℓ window
    pub space_matches: bool,
    pub positive: usize,
    pub negative: usize,
    pub sign_mismatches: usize,
    pub mismatch_trace: f64,
    /// max_k max |L(σ̃(z_k)) − π_ℓ(z_k)|
    pub generator_max_diff: f64,
    pub passed: bool,
}

/// Checks that (2Q_ℓ − I) ⊗ I localizes to sign D_torus and σ̃_ℓ to π_ℓ, entry-wise.
pub fn ev1_pullback_check(q: f64, model: &ModuleSpaceModel) -> Result<Ev1Report, ExtensionError> {
    let ell = model.ell();
    let h = model.h_window();
    let module = model.h_module_space();
    let two_q_minus_i = SparseOperator::diagonal(module.clone(), |p| {
        let s = match model.transport_point(p).0 {
            Summand::Upper => 1.0,
            Summand::Lower => -1.0,
        };
        Complex64::new(s, 0.0)
    });
    let local = localize(&two_q_minus_i, model)?;
    let d = EquivariantDirac::torus(ell);
    let sign = SparseOperator::diagonal(h.space(), |p| Complex64::new(d.value(p).signum(), 0.0));
    let mismatch = local.sub(&sign)?;
    let sign_mismatches = mismatch.nnz();
    let mismatch_trace = (0..mismatch.dim()).map(|j| mismatch.entry(j, j).re).sum();
    let diag = sign.diagonal_entries().unwrap_or_default();
    let positive = diag.iter().filter(|v| v.re > 0.0).count();
    let negative = diag.iter().filter(|v| v.re < 0.0).count();

    let mut generator_max_diff = 0.0f64;
    for k in 1..=ell + 1 {
        let word = [(k, false)];
        let m = Monomial::letter(super::Alphabet::Z, k, false);
        let l = localize(&sigma_tilde(&m, q, model)?, model)?;
        let pi = compressed_word(&word, q, &h)?;
        generator_max_diff = generator_max_diff.max(l.max_abs_diff(&pi)?);
    }

    let space_matches = local.dim() == h.window_size()
        && module.dim() == h.window_size() * (2 * model.fourier_max() as usize + 1);
    let passed =
        space_matches && sign_mismatches == 0 && mismatch_trace == 0.0 && generator_max_diff == 0.0;
    Ok(Ev1Report {
        ell,
        q,
        n_max: h.n_max(),
        m_max: h.m_max(),
        fourier_max: model.fourier_max(),
        space_matches,
        positive,
        negative,
        sign_mismatches,
        mismatch_trace,
        generator_max_diff,
        passed,
    })
}
