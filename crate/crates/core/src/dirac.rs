//! Torus-equivariant Dirac operators, i.e. diagonal operators e_γ ↦ d(γ) e_γ,
//! and the numerical shadows of their defining properties: bounded
//! commutators with the generators, growth of the eigenvalue counting
//! function, and linear growth of |d| in the weighted degree.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{weighted_degree, Truncation};
use crate::qoperators::{
    check_q, generator_coefficient, op_norm, GeneratorSet, OperatorError, SparseOperator,
};

/// Value substituted for d(γ) = 0 unless configured otherwise.
pub const DEFAULT_ZERO_REPLACEMENT: f64 = 0.5;

/// Relative growth below which a sup sequence counts as settled.
pub const TREND_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum DiracError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("zero replacement must be nonzero and finite, got {0}")]
    BadZeroReplacement(f64),
    #[error("d is undefined at {0:?}")]
    Undefined(Vec<i64>),
    #[error("the sublevel set |d| <= {n} touches the window boundary at {point:?}")]
    BallExitsWindow { n: u64, point: Vec<i64> },
    #[error("trend threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("empty or reversed range {lo}..={hi}")]
    BadRange { lo: u64, hi: u64 },
    #[error("spectrum table: {0}")]
    Table(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Spectrum = Arc<dyn Fn(&[i64]) -> f64 + Send + Sync>;

/// An equivariant Dirac operator, given by its spectrum d on ℕ^ℓ × ℤ.
///
/// `value` applies the zero policy: wherever the raw spectrum vanishes the
/// configured replacement is used instead, so `value` never returns 0.
#[derive(Clone)]
pub struct EquivariantDirac {
    name: String,
    ell: usize,
    d: Spectrum,
    zero_replacement: f64,
}

impl fmt::Debug for EquivariantDirac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquivariantDirac")
            .field("name", &self.name)
            .field("ell", &self.ell)
            .field("zero_replacement", &self.zero_replacement)
            .finish()
    }
}

impl EquivariantDirac {
    pub fn from_fn(
        name: impl Into<String>,
        ell: usize,
        d: impl Fn(&[i64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            ell,
            d: Arc::new(d),
            zero_replacement: DEFAULT_ZERO_REPLACEMENT,
        }
    }

    /// d(γ) = ±(γ(1)+…+γ(ℓ)+|γ(ℓ+1)|), positive iff γ(ℓ+1) ≥ 0.
    pub fn torus(ell: usize) -> Self {
        Self::from_fn("torus", ell, |g: &[i64]| {
            let deg = weighted_degree(g) as f64;
            if g[g.len() - 1] >= 0 {
                deg
            } else {
                -deg
            }
        })
    }

    /// −D_torus, including the sign of the zero replacement: d(0) = −1/2.
    pub fn neg_torus(ell: usize) -> Self {
        Self::torus(ell).negated().renamed("neg_torus")
    }

    /// |D_torus| + 1/2, positive everywhere.
    pub fn abs_torus(ell: usize) -> Self {
        let t = Self::torus(ell);
        Self::from_fn("abs_torus", ell, move |g: &[i64]| t.value(g).abs() + 0.5)
    }

    pub fn constant(ell: usize, c: f64) -> Self {
        Self::from_fn(format!("constant({c})"), ell, move |_: &[i64]| c)
    }

    /// A spectrum read from a table, with `fallback` for points not listed.
    /// Without a fallback, unlisted points are undefined (NaN); see
    /// [`EquivariantDirac::check_defined`].
    pub fn from_table(
        name: impl Into<String>,
        ell: usize,
        table: HashMap<Vec<i64>, f64>,
        fallback: Option<Spectrum>,
    ) -> Self {
        Self::from_fn(name, ell, move |g: &[i64]| match table.get(g) {
            Some(&v) => v,
            None => fallback.as_ref().map_or(f64::NAN, |f| f(g)),
        })
    }

    pub fn with_zero_replacement(mut self, v: f64) -> Result<Self, DiracError> {
        if v == 0.0 || !v.is_finite() {
            return Err(DiracError::BadZeroReplacement(v));
        }
        self.zero_replacement = v;
        Ok(self)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The operator with spectrum −value(γ).
    pub fn negated(&self) -> Self {
        let inner = self.clone();
        Self::from_fn(format!("-{}", self.name), self.ell, move |g: &[i64]| {
            -inner.value(g)
        })
    }

    /// The operator with spectrum value(γ) + c.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.clone();
        Self::from_fn(
            format!("{}+{c}", self.name),
            self.ell,
            move |g: &[i64]| inner.value(g) + c,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn zero_replacement(&self) -> f64 {
        self.zero_replacement
    }

    /// The spectrum before the zero policy.
    pub fn raw(&self, g: &[i64]) -> f64 {
        (self.d)(g)
    }

    pub fn value(&self, g: &[i64]) -> f64 {
        let v = (self.d)(g);
        if v == 0.0 {
            self.zero_replacement
        } else {
            v
        }
    }

    pub fn check_defined(&self, trunc: &Truncation) -> Result<(), DiracError> {
        match trunc.space().points().find(|p| !self.value(p).is_finite()) {
            Some(p) => Err(DiracError::Undefined(p)),
            None => Ok(()),
        }
    }

    /// d(γ) for every window point in basis order.
    pub fn spectrum_on(&self, trunc: &Truncation) -> Vec<f64> {
        trunc.space().points().map(|p| self.value(&p)).collect()
    }

    pub fn operator(&self, trunc: &Truncation) -> SparseOperator {
        SparseOperator::diagonal(trunc.space(), |p| Complex64::new(self.value(p), 0.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Diverging,
    /// fewer than three nested windows available
    Inconclusive,
}

/// Per-k sups on one sub-window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSups {
    pub n_max: u32,
    pub m_max: u32,
    pub sups: Vec<f64>,
}

/// sup_γ |d(γ+ε_k) − d(γ)|·q^{γ(1)+…+γ(k−1)} over pairs inside the window,
/// for k = 1..ℓ+1, and the same on the nested sub-windows
/// (n_max − J + j, m_max − J + j), j = 0..J, J = min(n_max, m_max).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub dirac: String,
    pub ell: usize,
    pub q: f64,
    pub window: Truncation,
    pub sups: Vec<f64>,
    pub trend: Vec<WindowSups>,
    pub per_k_verdict: Vec<Verdict>,
    pub verdict: Verdict,
    /// c = max_k sup_k; bounds |d(γ+ε_k) − d(γ)| whenever γ(1) = … = γ(k−1) = 0
    pub edge_constant: f64,
    pub trend_threshold: f64,
    pub criterion: String,
}

fn trend_verdict(seq: &[f64], threshold: f64) -> Verdict {
    if seq.len() < 3 {
        return Verdict::Inconclusive;
    }
    let rel = |j: usize| {
        let (a, b) = (seq[j - 1], seq[j]);
        if b > 0.0 {
            (b - a) / b
        } else {
            0.0
        }
    };
    let n = seq.len();
    if rel(n - 1) < threshold && rel(n - 2) < threshold {
        Verdict::Bounded
    } else {
        Verdict::Diverging
    }
}

pub fn commutator_bound_check(
    d: &EquivariantDirac,
    q: f64,
    trunc: &Truncation,
) -> Result<BoundednessReport, DiracError> {
    commutator_bound_check_with(d, q, trunc, TREND_THRESHOLD)
}

/// [`commutator_bound_check`] with a custom relative-growth threshold.
pub fn commutator_bound_check_with(
    d: &EquivariantDirac,
    q: f64,
    trunc: &Truncation,
    threshold: f64,
) -> Result<BoundednessReport, DiracError> {
    check_q(q)?;
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(DiracError::BadThreshold(threshold));
    }
    let ell = trunc.ell();
    let (n_max, m_max) = (trunc.n_max() as i64, trunc.m_max() as i64);
    let big_j = n_max.min(m_max);
    let (n0, m0) = (n_max - big_j, m_max - big_j);
    // raw[k][j]: max over pairs whose smallest enclosing sub-window is j
    let mut raw = vec![vec![0.0f64; big_j as usize + 1]; ell + 1];

    for p in trunc.space().points() {
        let dp = d.value(&p);
        let mut prefix = 0i64;
        for k in 1..=ell + 1 {
            let mut next = p.clone();
            next[k - 1] += 1;
            if trunc.contains(&next) {
                let v = (d.value(&next) - dp).abs() * q.powi(prefix as i32);
                let nat = next[..ell].iter().copied().max().unwrap_or(0);
                let int = p[ell].abs().max(next[ell].abs());
                let j = (nat - n0).max(int - m0).max(0) as usize;
                raw[k - 1][j] = raw[k - 1][j].max(v);
            }
            if k <= ell {
                prefix += p[k - 1];
            }
        }
    }

    for row in raw.iter_mut() {
        for j in 1..row.len() {
            row[j] = row[j].max(row[j - 1]);
        }
    }
    let trend = (0..=big_j as usize)
        .map(|j| WindowSups {
            n_max: (n0 + j as i64) as u32,
            m_max: (m0 + j as i64) as u32,
            sups: raw.iter().map(|r| r[j]).collect(),
        })
        .collect();
    let per_k_verdict: Vec<Verdict> = raw.iter().map(|r| trend_verdict(r, threshold)).collect();
    let verdict = if per_k_verdict.contains(&Verdict::Diverging) {
        Verdict::Diverging
    } else if per_k_verdict.contains(&Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Bounded
    };
    let sups: Vec<f64> = raw.iter().map(|r| r[r.len() - 1]).collect();
    let edge_constant = sups.iter().copied().fold(0.0, f64::max);
    Ok(BoundednessReport {
        dirac: d.name().to_string(),
        ell,
        q,
        window: trunc.clone(),
        sups,
        trend,
        per_k_verdict,
        verdict,
        edge_constant,
        trend_threshold: threshold,
        criterion: format!(
            "bounded iff the relative growth of every per-k sup over the last two \
             nested-window increments is below {threshold}"
        ),
    })
}

/// ‖[D, z_k]‖ for k = 1..ℓ+1, from the assembled sparse commutators.
pub fn commutator_norms(d: &EquivariantDirac, gens: &GeneratorSet) -> Result<Vec<f64>, DiracError> {
    let dop = d.operator(gens.trunc());
    (1..=gens.ell() + 1)
        .map(|k| {
            let c = dop.multiply(gens.z(k))?.sub(&gens.z(k).multiply(&dop)?)?;
            Ok(op_norm(&c)?)
        })
        .collect()
}

/// The same norms in closed form. [D, z_k] e_γ = (d(γ+ε_k) − d(γ))·c_k(γ)
/// e_{γ+ε_k} and z_k is injective on basis vectors, so the norm is the
/// largest column entry.
pub fn commutator_column_maxima(
    d: &EquivariantDirac,
    q: f64,
    trunc: &Truncation,
) -> Result<Vec<f64>, DiracError> {
    check_q(q)?;
    let ell = trunc.ell();
    let mut out = vec![0.0f64; ell + 1];
    for p in trunc.space().points() {
        for (k, slot) in out.iter_mut().enumerate().map(|(i, s)| (i + 1, s)) {
            let mut next = p.clone();
            next[k - 1] += 1;
            if trunc.contains(&next) {
                let v = (d.value(&next) - d.value(&p)).abs() * generator_coefficient(k, ell, q, &p);
                *slot = slot.max(v);
            }
        }
    }
    Ok(out)
}

fn check_ball_inside(d: &EquivariantDirac, trunc: &Truncation, n: u64) -> Result<(), DiracError> {
    let space = trunc.space();
    let hit = space
        .points()
        .find(|p| space.on_boundary(p) && d.value(p).abs() <= n as f64);
    match hit {
        Some(point) => Err(DiracError::BallExitsWindow { n, point }),
        None => Ok(()),
    }
}

/// #{γ : |d(γ)| ≤ n}. The sublevel set must stay off the window's outer faces.
pub fn counting_function(
    d: &EquivariantDirac,
    trunc: &Truncation,
    n: u64,
) -> Result<u64, DiracError> {
    check_ball_inside(d, trunc, n)?;
    Ok(trunc
        .space()
        .points()
        .filter(|p| d.value(p).abs() <= n as f64)
        .count() as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDimension {
    /// least-squares slope of ln N(n) against ln(n + 1)
    pub slope: f64,
    pub intercept: f64,
    /// (n, N(n))
    pub counts: Vec<(u64, u64)>,
}

/// Growth order of the counting function: slope of ln N(n) against ln(n+1)
/// over `lo..=hi`. The shifted abscissa makes N(n) = (n+1)^{ℓ+1}-type laws
/// exact lines; against ln n the slope at these n is biased well below ℓ+1.
pub fn spectral_dimension_estimate(
    d: &EquivariantDirac,
    trunc: &Truncation,
    lo: u64,
    hi: u64,
) -> Result<SpectralDimension, DiracError> {
    if lo > hi || hi == 0 {
        return Err(DiracError::BadRange { lo, hi });
    }
    check_ball_inside(d, trunc, hi)?;
    let mut abs: Vec<f64> = trunc.space().points().map(|p| d.value(&p).abs()).collect();
    abs.sort_by(f64::total_cmp);
    let counts: Vec<(u64, u64)> = (lo..=hi)
        .map(|n| (n, abs.partition_point(|&v| v <= n as f64) as u64))
        .collect();
    let xs: Vec<f64> = counts.iter().map(|&(n, _)| ((n + 1) as f64).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(SpectralDimension {
        slope,
        intercept,
        counts,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Growth {
    #[serde(rename = "O(degree)")]
    Linear,
    #[serde(rename = "super-linear")]
    SuperLinear,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub radius: u32,
    pub a: f64,
    pub b: f64,
}

/// Linear envelope |d(γ)| ≤ a + b·deg(γ).
///
/// f(t) is the largest |d| on the complete shell deg = t. On the ball of
/// radius T′, b is the largest shell increment f(t) − f(t−1) over the upper
/// half t ∈ [⌈T′/2⌉, T′] (at least 0) and a = max_t (f(t) − b·t). The fit is
/// repeated for T′ = T−2, T−1, T with T the complete-ball radius of the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub dirac: String,
    pub a: f64,
    pub b: f64,
    pub verdict: Growth,
    pub shell_max: Vec<f64>,
    pub fits: Vec<LinearFit>,
}

pub fn optimality_check(d: &EquivariantDirac, trunc: &Truncation) -> OptimalityReport {
    let big_t = trunc.complete_ball_radius();
    let mut shell = vec![0.0f64; big_t as usize + 1];
    for p in trunc.space().points() {
        let t = weighted_degree(&p);
        if t <= big_t as u64 {
            shell[t as usize] = shell[t as usize].max(d.value(&p).abs());
        }
    }
    let fit = |r: u32| {
        let r = r as usize;
        let b = r.div_ceil(2).max(1)..=r;
        let b = b.map(|t| shell[t] - shell[t - 1]).fold(0.0f64, f64::max);
        let a = (0..=r)
            .map(|t| shell[t] - b * t as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        LinearFit {
            radius: r as u32,
            a,
            b,
        }
    };
    let fits: Vec<LinearFit> = (big_t.saturating_sub(2)..=big_t).map(fit).collect();
    let last = fits.last().cloned().unwrap_or(LinearFit {
        radius: 0,
        a: shell[0],
        b: 0.0,
    });
    let verdict = if big_t < 4 {
        Growth::Inconclusive
    } else if fits
        .iter()
        .all(|f| (f.a - last.a).abs() <= 1e-9 && (f.b - last.b).abs() <= 1e-9)
    {
        Growth::Linear
    } else {
        Growth::SuperLinear
    };
    OptimalityReport {
        dirac: d.name().to_string(),
        a: last.a,
        b: last.b,
        verdict,
        shell_max: shell,
        fits,
    }
}

/// CSV `g1,…,g{ℓ+1},d` in basis order.
pub fn write_spectrum<W: Write>(
    out: W,
    d: &EquivariantDirac,
    trunc: &Truncation,
) -> Result<(), DiracError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=trunc.ell() + 1).map(|i| format!("g{i}")).collect();
    header.push("d".into());
    w.write_record(&header)?;
    for p in trunc.space().points() {
        let mut rec: Vec<String> = p.iter().map(i64::to_string).collect();
        rec.push(d.value(&p).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `g1,…,g{ℓ+1},d` table; returns ℓ and the map γ ↦ d.
pub fn read_spectrum<R: Read>(input: R) -> Result<(usize, HashMap<Vec<i64>, f64>), DiracError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let cols = header.len();
    if cols < 3 || header.get(cols - 1).map(str::trim) != Some("d") {
        return Err(DiracError::Table(
            "expected header g1,...,g{ell+1},d with ell >= 1".into(),
        ));
    }
    for (i, h) in header.iter().take(cols - 1).enumerate() {
        if h.trim() != format!("g{}", i + 1) {
            return Err(DiracError::Table(format!(
                "column {} is {h:?}, expected g{}",
                i + 1,
                i + 1
            )));
        }
    }
    let ell = cols - 2;
    let mut table = HashMap::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| DiracError::Table(format!("record {}: {what}", line + 1));
        let coords = rec
            .iter()
            .take(ell + 1)
            .map(|s| s.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        if coords[..ell].iter().any(|&c| c < 0) {
            return Err(bad("negative natural coordinate"));
        }
        let v: f64 = rec[ell + 1]
            .trim()
            .parse()
            .map_err(|_| bad("d is not a number"))?;
        if table.insert(coords, v).is_some() {
            return Err(bad("duplicate point"));
        }
    }
    Ok((ell, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::count_ball;

    #[test]
    fn torus_values() {
        let t = EquivariantDirac::torus(2);
        assert_eq!(t.value(&[1, 2, 3]), 6.0);
        assert_eq!(EquivariantDirac::torus(1).value(&[0, -1]), -1.0);
        assert_eq!(t.value(&[0, 0, 0]), 0.5);
        assert_eq!(t.raw(&[0, 0, 0]), 0.0);
        let n = EquivariantDirac::neg_torus(2);
        assert_eq!(n.value(&[0, 0, 0]), -0.5);
        assert_eq!(n.value(&[1, 0, -2]), 3.0);
        let a = EquivariantDirac::abs_torus(1);
        assert_eq!(a.value(&[0, 0]), 1.0);
        assert_eq!(a.value(&[2, -3]), 5.5);
    }

    #[test]
    fn zero_replacement_validated() {
        let t = EquivariantDirac::torus(1);
        assert!(t.clone().with_zero_replacement(0.0).is_err());
        assert_eq!(t.with_zero_replacement(-2.0).unwrap().value(&[0, 0]), -2.0);
    }

    #[test]
    fn constant_is_bounded() {
        let t = Truncation::new(2, 5, 5).unwrap();
        let r = commutator_bound_check(&EquivariantDirac::constant(2, 3.0), 0.5, &t).unwrap();
        assert!(r.sups.iter().all(|&s| s == 0.0));
        assert_eq!(r.verdict, Verdict::Bounded);
        let gens = GeneratorSet::new(0.5, &t).unwrap();
        let norms = commutator_norms(&EquivariantDirac::constant(2, 3.0), &gens).unwrap();
        assert!(norms.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn torus_sups_and_norms() {
        let q: f64 = 0.5;
        let t = Truncation::new(1, 10, 10).unwrap();
        let d = EquivariantDirac::torus(1);
        let r = commutator_bound_check(&d, q, &t).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded);
        assert!((r.sups[0] - 1.0).abs() < 1e-12);
        // jump across γ(2) = −1 → 0: 1.5 at γ(1) = 0 (zero policy), (2s+1)q^s after
        assert!((r.sups[1] - 1.5).abs() < 1e-12);

        let gens = GeneratorSet::new(q, &t).unwrap();
        let norms = commutator_norms(&d, &gens).unwrap();
        let closed = commutator_column_maxima(&d, q, &t).unwrap();
        for (a, b) in norms.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((norms[0] - (1.0 - q.powi(20)).sqrt()).abs() < 1e-10);
        assert!((norms[1] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn trend_is_monotone() {
        let t = Truncation::new(2, 6, 4).unwrap();
        let d = EquivariantDirac::from_fn("sq", 2, |g: &[i64]| (weighted_degree(g) as f64).powi(2));
        let r = commutator_bound_check(&d, 0.7, &t).unwrap();
        assert_eq!(r.trend.len(), 5);
        for w in r.trend.windows(2) {
            for k in 0..3 {
                assert!(w[1].sups[k] >= w[0].sups[k]);
            }
        }
        assert_eq!(r.trend.last().unwrap().sups, r.sups);
        assert_eq!(r.verdict, Verdict::Diverging);
    }

    #[test]
    fn exponential_diverges() {
        let t = Truncation::new(1, 12, 4).unwrap();
        let d = EquivariantDirac::from_fn("exp", 1, |g: &[i64]| 2f64.powi(g[0] as i32));
        let r = commutator_bound_check(&d, 0.5, &t).unwrap();
        assert_eq!(r.verdict, Verdict::Diverging);
        assert_eq!(r.sups[0], 2f64.powi(11));
    }

    #[test]
    fn verdict_invariant_under_shift_and_negation() {
        let t = Truncation::new(1, 8, 8).unwrap();
        for d in [
            EquivariantDirac::torus(1),
            EquivariantDirac::from_fn("sq", 1, |g: &[i64]| (weighted_degree(g) as f64).powi(2)),
        ] {
            let base = commutator_bound_check(&d, 0.5, &t).unwrap().verdict;
            assert_eq!(
                commutator_bound_check(&d.negated(), 0.5, &t)
                    .unwrap()
                    .verdict,
                base
            );
            assert_eq!(
                commutator_bound_check(&d.shifted(7.25), 0.5, &t)
                    .unwrap()
                    .verdict,
                base
            );
        }
    }

    #[test]
    fn edge_pairs_bounded_by_constant() {
        let t = Truncation::new(2, 5, 5).unwrap();
        let d = EquivariantDirac::torus(2);
        let r = commutator_bound_check(&d, 0.5, &t).unwrap();
        for p in t.enumerate() {
            for k in 1..=3 {
                if p[..k - 1].iter().any(|&c| c != 0) {
                    continue;
                }
                let next = p.add_epsilon(k).unwrap();
                if t.contains(&next) {
                    assert!((d.value(&next) - d.value(&p)).abs() <= r.edge_constant + 1e-12);
                }
            }
        }
    }

    #[test]
    fn counting_matches_ball() {
        let d = EquivariantDirac::torus(1);
        let t = Truncation::new(1, 3, 3).unwrap();
        assert_eq!(counting_function(&d, &t, 2).unwrap(), 9);
        assert!(matches!(
            counting_function(&d, &t, 3),
            Err(DiracError::BallExitsWindow { n: 3, .. })
        ));
        let t = Truncation::new(2, 9, 9).unwrap();
        let d = EquivariantDirac::torus(2);
        for n in 1..9 {
            assert_eq!(
                counting_function(&d, &t, n).unwrap() as u128,
                count_ball(2, n)
            );
        }
    }

    #[test]
    fn dimension_for_circle_law() {
        let t = Truncation::new(1, 51, 51).unwrap();
        let r = spectral_dimension_estimate(&EquivariantDirac::torus(1), &t, 10, 50).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-9);
        assert_eq!(r.counts[0], (10, 121));
        assert!(spectral_dimension_estimate(&EquivariantDirac::torus(1), &t, 5, 4).is_err());
    }

    #[test]
    fn optimality_examples() {
        let t = Truncation::new(2, 10, 10).unwrap();
        let r = optimality_check(&EquivariantDirac::torus(2), &t);
        assert_eq!((r.a, r.b, r.verdict), (0.5, 1.0, Growth::Linear));
        let d =
            EquivariantDirac::from_fn("lin", 2, |g: &[i64]| 2.0 * weighted_degree(g) as f64 + 3.0);
        let r = optimality_check(&d, &t);
        assert_eq!((r.a, r.b, r.verdict), (3.0, 2.0, Growth::Linear));
        let d = EquivariantDirac::from_fn("sq", 2, |g: &[i64]| (weighted_degree(g) as f64).powi(2));
        let r = optimality_check(&d, &t);
        assert_eq!(r.verdict, Growth::SuperLinear);
        assert!(r.fits[2].b > r.fits[0].b);
        let small = Truncation::new(1, 2, 2).unwrap();
        assert_eq!(
            optimality_check(&EquivariantDirac::torus(1), &small).verdict,
            Growth::Inconclusive
        );
    }

    #[test]
    fn spectrum_csv_roundtrip() {
        let t = Truncation::new(1, 2, 2).unwrap();
        let d = EquivariantDirac::torus(1);
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &d, &t).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("g1,g2,d\n0,-2,-2\n"));
        let (ell, table) = read_spectrum(&buf[..]).unwrap();
        assert_eq!(ell, 1);
        assert_eq!(table.len(), t.window_size());
        let back = EquivariantDirac::from_table("t", 1, table, None);
        back.check_defined(&t).unwrap();
        assert_eq!(back.spectrum_on(&t), d.spectrum_on(&t));
        assert!(back
            .check_defined(&Truncation::new(1, 3, 2).unwrap())
            .is_err());
        assert!(read_spectrum(&b"a,b,c\n1,2,3\n"[..]).is_err());
        assert!(read_spectrum(&b"g1,g2,d\n-1,2,3\n"[..]).is_err());
    }
}
