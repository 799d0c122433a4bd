use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};
use serde::{Deserialize, Serialize};

use qsphere::dirac::{read_spectrum, EquivariantDirac, TREND_THRESHOLD};
use qsphere::lattice::{weighted_degree, Truncation};
use qsphere::qoperators::NORM_TOLERANCE;

/// Anything wrong with the configuration itself; mapped to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub ell: usize,
    pub n_max: u32,
    pub m_max: u32,
    pub interior_margin: u32,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            ell: 1,
            n_max: 8,
            m_max: 8,
            interior_margin: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorSection {
    pub q: f64,
}

impl Default for OperatorSection {
    fn default() -> Self {
        Self { q: 0.5 }
    }
}

/// One of `builtin`, `table` (optionally with `expression` as fallback) or `expression`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracSection {
    pub builtin: Option<String>,
    pub table: Option<PathBuf>,
    /// evalexpr formula in g1, …, g{ell+1} and deg
    pub expression: Option<String>,
    /// value used where d vanishes; the operator's own default when unset
    pub zero_replacement: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSection {
    pub norm_tolerance: f64,
    pub trend_threshold: f64,
    pub relation_tolerance: f64,
    pub sphere_tolerance: f64,
    pub covariance_tolerance: f64,
    pub slope_tolerance: f64,
    pub sign_search_max: u32,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        Self {
            norm_tolerance: NORM_TOLERANCE,
            trend_threshold: TREND_THRESHOLD,
            relation_tolerance: 1e-10,
            sphere_tolerance: 1e-12,
            covariance_tolerance: 1e-12,
            slope_tolerance: 0.1,
            sign_search_max: 5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub lo: Option<u64>,
    pub hi: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionSection {
    /// monomials such as "z2" or "z1 z2*"; empty means z1 and z{ell+1}
    pub words: Vec<String>,
    pub r_max: u32,
    pub fourier_max: u32,
}

impl Default for ExtensionSection {
    fn default() -> Self {
        Self {
            words: Vec::new(),
            r_max: 6,
            fourier_max: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdealSection {
    pub i: Option<Vec<i64>>,
    pub j: Option<Vec<i64>>,
    pub k: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexSection {
    pub expected: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("reports"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub lattice: LatticeSection,
    pub operator: OperatorSection,
    pub dirac: DiracSection,
    pub thresholds: ThresholdSection,
    pub spectral: SpectralSection,
    pub extension: ExtensionSection,
    pub ideal: IdealSection,
    pub index: IndexSection,
    pub output: OutputSection,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // relative table paths are read from the config file's directory
        if let (Some(t), Some(dir)) = (cfg.dirac.table.as_mut(), path.parent()) {
            if t.is_relative() {
                *t = dir.join(&*t);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let l = &self.lattice;
        if l.ell == 0 {
            return Err(bad("lattice.ell must be at least 1"));
        }
        if l.n_max == 0 || l.m_max == 0 {
            return Err(bad("lattice.n_max and lattice.m_max must be positive"));
        }
        if l.interior_margin > l.n_max.min(l.m_max) {
            return Err(bad("lattice.interior_margin exceeds the window"));
        }
        let q = self.operator.q;
        if !(q > 0.0 && q < 1.0) {
            return Err(bad(format!(
                "operator.q must lie strictly between 0 and 1, got {q}"
            )));
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("norm_tolerance", t.norm_tolerance),
            ("trend_threshold", t.trend_threshold),
            ("relation_tolerance", t.relation_tolerance),
            ("sphere_tolerance", t.sphere_tolerance),
            ("covariance_tolerance", t.covariance_tolerance),
            ("slope_tolerance", t.slope_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("thresholds.{name} must be positive, got {v}")));
            }
        }
        if let Some(z) = self.dirac.zero_replacement {
            if z == 0.0 || !z.is_finite() {
                return Err(bad("dirac.zero_replacement must be nonzero and finite"));
            }
        }
        if self.dirac.builtin.is_some()
            && (self.dirac.table.is_some() || self.dirac.expression.is_some())
        {
            return Err(bad(
                "dirac.builtin cannot be combined with dirac.table or dirac.expression",
            ));
        }
        if let (Some(lo), Some(hi)) = (self.spectral.lo, self.spectral.hi) {
            if lo > hi || hi == 0 {
                return Err(bad(format!("spectral range {lo}..={hi} is empty")));
            }
        }
        Ok(())
    }

    pub fn truncation(&self) -> Result<Truncation, ConfigError> {
        let l = &self.lattice;
        Truncation::with_margin(l.ell, l.n_max, l.m_max, l.interior_margin)
            .map_err(|e| bad(e.to_string()))
    }

    /// The Dirac operator described by the `[dirac]` section.
    pub fn dirac(&self) -> Result<EquivariantDirac, ConfigError> {
        let ell = self.lattice.ell;
        let sec = &self.dirac;
        let expr = sec
            .expression
            .as_deref()
            .map(|e| compile_expression(e, ell))
            .transpose()?;
        let d = match (&sec.builtin, &sec.table) {
            (Some(name), _) => builtin(name, ell)?,
            (None, Some(path)) => {
                let file =
                    fs::File::open(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
                let (table_ell, table) = read_spectrum(file).map_err(|e| bad(e.to_string()))?;
                if table_ell != ell {
                    return Err(bad(format!(
                        "spectrum table has ell = {table_ell}, config has {ell}"
                    )));
                }
                let d = EquivariantDirac::from_table(path.display().to_string(), ell, table, expr);
                d.check_defined(&self.truncation()?)
                    .map_err(|e| bad(e.to_string()))?;
                d
            }
            (None, None) => match expr {
                Some(f) => {
                    let name = sec.expression.clone().unwrap_or_default();
                    EquivariantDirac::from_fn(name, ell, move |g: &[i64]| f(g))
                }
                None => EquivariantDirac::torus(ell),
            },
        };
        match sec.zero_replacement {
            Some(z) => d.with_zero_replacement(z).map_err(|e| bad(e.to_string())),
            None => Ok(d),
        }
    }
}

fn builtin(name: &str, ell: usize) -> Result<EquivariantDirac, ConfigError> {
    match name {
        "torus" => Ok(EquivariantDirac::torus(ell)),
        "neg_torus" => Ok(EquivariantDirac::neg_torus(ell)),
        "abs_torus" => Ok(EquivariantDirac::abs_torus(ell)),
        other => Err(bad(format!(
            "unknown builtin Dirac operator {other:?} (expected torus, neg_torus or abs_torus)"
        ))),
    }
}

type Formula = Arc<dyn Fn(&[i64]) -> f64 + Send + Sync>;

/// Compiles `expr` into d(γ). Variables: g1, …, g{ell+1} and deg. A failed
/// evaluation gives NaN, which the callers report as an undefined value.
pub fn compile_expression(expr: &str, ell: usize) -> Result<Formula, ConfigError> {
    let tree: Node<DefaultNumericTypes> =
        build_operator_tree(expr).map_err(|e| bad(format!("dirac.expression: {e}")))?;
    let eval = move |g: &[i64]| -> Result<f64, String> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for (i, &c) in g.iter().enumerate() {
            ctx.set_value(format!("g{}", i + 1), Value::Float(c as f64))
                .map_err(|e| e.to_string())?;
        }
        ctx.set_value("deg".into(), Value::Float(weighted_degree(g) as f64))
            .map_err(|e| e.to_string())?;
        tree.eval_number_with_context(&ctx)
            .map_err(|e| e.to_string())
    };
    // surface unknown variables and type errors now rather than per point
    let origin = vec![0i64; ell + 1];
    eval(&origin).map_err(|e| bad(format!("dirac.expression: {e}")))?;
    Ok(Arc::new(move |g: &[i64]| eval(g).unwrap_or(f64::NAN)))
}
