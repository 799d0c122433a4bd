//! Residuals of the defining relations of C(S_q^{2ℓ+1}) under π_ℓ.
//!
//! The four families checked are
//!
//! 1. z_i z_j = q z_j z_i for j < i,
//! 2. z_i^* z_j = q z_j z_i^* for i ≠ j,
//! 3. z_i z_i^* − z_i^* z_i + (1 − q²) Σ_{k>i} z_k z_k^* = 0,
//! 4. Σ_i z_i z_i^* = 1.
//!
//! Families 1–3 are products of the compressed generators and are measured on
//! interior columns, where no intermediate vector leaves the window. Family 3
//! is also reported on the full window so the truncation artifact at the outer
//! face is visible. Family 4 is diagonal: each z_i z_i^* is evaluated on the
//! whole lattice and then compressed (z_{ℓ+1}^* lowers the ℤ coordinate out of
//! the window at γ(ℓ+1) = −m_max), and it is measured on every column.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{compressed_word, GeneratorSet, OperatorError, SparseOperator};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationResidual {
    pub family: String,
    /// max_γ ‖(LHS − RHS) e_γ‖ over interior γ
    pub interior: f64,
    /// same over the whole window
    pub full_window: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub ell: usize,
    pub q: f64,
    pub families: Vec<RelationResidual>,
}

impl RelationReport {
    pub fn family(&self, name: &str) -> Option<&RelationResidual> {
        self.families.iter().find(|f| f.family == name)
    }

    /// Largest interior residual over families 1–3.
    pub fn max_interior(&self) -> f64 {
        self.families
            .iter()
            .filter(|f| f.family != SPHERE)
            .map(|f| f.interior)
            .fold(0.0, f64::max)
    }

    pub fn sphere(&self) -> f64 {
        self.family(SPHERE).map_or(f64::NAN, |f| f.full_window)
    }
}

pub const Q_COMMUTATION: &str = "q_commutation";
pub const CROSS: &str = "cross_adjoint";
pub const NORMALITY_DEFECT: &str = "normality_defect";
pub const SPHERE: &str = "sphere";

fn column_residuals(gens: &GeneratorSet, op: &SparseOperator) -> (f64, f64) {
    let t = gens.trunc();
    let mut interior = 0.0f64;
    let mut full = 0.0f64;
    for (j, p) in t.space().points().enumerate() {
        let r = op.column_norm(j);
        full = full.max(r);
        if t.is_interior(&p) {
            interior = interior.max(r);
        }
    }
    (interior, full)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn relation_residuals(gens: &GeneratorSet) -> Result<RelationReport, OperatorError> {
    let n = gens.ell() + 1;
    let q = Complex64::new(gens.q(), 0.0);
    let mut fam1 = (0.0f64, 0.0f64);
    let mut fam2 = (0.0f64, 0.0f64);
    let mut fam3 = (0.0f64, 0.0f64);
    let merge = |acc: &mut (f64, f64), r: (f64, f64)| {
        acc.0 = acc.0.max(r.0);
        acc.1 = acc.1.max(r.1);
    };

    for i in 1..=n {
        for j in 1..=n {
            if j < i {
                let lhs = gens.z(i).multiply(gens.z(j))?;
                let rhs = gens.z(j).multiply(gens.z(i))?;
                merge(
                    &mut fam1,
                    column_residuals(gens, &lhs.add(&rhs, one(), -q)?),
                );
            }
            if i != j {
                let lhs = gens.z_adj(i).multiply(gens.z(j))?;
                let rhs = gens.z(j).multiply(gens.z_adj(i))?;
                merge(
                    &mut fam2,
                    column_residuals(gens, &lhs.add(&rhs, one(), -q)?),
                );
            }
        }
    }

    let zz_adj: Vec<SparseOperator> = (1..=n)
        .map(|k| gens.z(k).multiply(gens.z_adj(k)))
        .collect::<Result<_, _>>()?;
    let mut tail = SparseOperator::zero(gens.space());
    for i in (1..=n).rev() {
        let commutator = zz_adj[i - 1].sub(&gens.z_adj(i).multiply(gens.z(i))?)?;
        let expr = commutator.add(&tail, one(), Complex64::new(1.0 - gens.q() * gens.q(), 0.0))?;
        merge(&mut fam3, column_residuals(gens, &expr));
        tail = tail.add(&zz_adj[i - 1], one(), one())?;
    }

    let mut sphere = SparseOperator::identity(gens.space()).scale(-one());
    for k in 1..=n {
        let zz = compressed_word(&[(k, false), (k, true)], gens.q(), gens.trunc())?;
        sphere = sphere.add(&zz, one(), one())?;
    }
    let fam4 = column_residuals(gens, &sphere);

    let mk = |family: &str, r: (f64, f64)| RelationResidual {
        family: family.to_string(),
        interior: r.0,
        full_window: r.1,
    };
    Ok(RelationReport {
        ell: gens.ell(),
        q: gens.q(),
        families: vec![
            mk(Q_COMMUTATION, fam1),
            mk(CROSS, fam2),
            mk(NORMALITY_DEFECT, fam3),
            mk(SPHERE, fam4),
        ],
    })
}
