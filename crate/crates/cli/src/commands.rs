use anyhow::Result;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use qsphere::dirac::{
    commutator_bound_check_with, commutator_column_maxima, optimality_check,
    spectral_dimension_estimate, Verdict,
};
use qsphere::extension::{
    ev1_pullback_check, lift_profile, reconstruct_elementary_report, Alphabet, ModuleSpaceModel,
    Monomial,
};
use qsphere::growth_graph::{classify_sign_pattern, khomology_class, lemma_path, GrowthGraph};
use qsphere::index_pairing::pairing;
use qsphere::lattice::{count_ball, LatticePoint};
use qsphere::qoperators::{
    covariance_residual, op_norm_with, relation_residuals, GeneratorSet, NORM_MAX_ITER,
};

use crate::config::{Config, ConfigError};

/// A report body plus the checks that failed on it.
pub struct Outcome {
    pub report: Value,
    pub failures: Vec<String>,
}

impl Outcome {
    fn new(report: impl Serialize, failures: Vec<String>) -> Result<Self> {
        Ok(Self {
            report: serde_json::to_value(report)?,
            failures,
        })
    }

    /// A computation that refused to run counts as a failed check.
    fn refused(err: impl std::fmt::Display) -> Result<Self> {
        let msg = err.to_string();
        Ok(Self {
            report: json!({ "error": msg }),
            failures: vec![msg],
        })
    }
}

macro_rules! try_check {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return Outcome::refused(err),
        }
    };
}

pub fn verify_relations(cfg: &Config) -> Result<Outcome> {
    let t = cfg.truncation()?;
    let th = &cfg.thresholds;
    let gens = GeneratorSet::new(cfg.operator.q, &t)?;
    let rel = relation_residuals(&gens)?;
    let ell = t.ell();
    let phases: Vec<Vec<Complex64>> = [0.7, 2.1, -1.3]
        .iter()
        .map(|&theta| {
            (1..=ell + 1)
                .map(|k| Complex64::from_polar(1.0, theta * k as f64))
                .collect()
        })
        .collect();
    let cov = phases
        .iter()
        .map(|w| covariance_residual(&gens, w))
        .collect::<Result<Vec<f64>, _>>()?;
    let cov_max = cov.iter().copied().fold(0.0, f64::max);
    let mut failures = Vec::new();
    if rel.max_interior() > th.relation_tolerance {
        failures.push(format!(
            "interior residual {:e} above {:e}",
            rel.max_interior(),
            th.relation_tolerance
        ));
    }
    if rel.sphere() > th.sphere_tolerance {
        failures.push(format!(
            "sphere residual {:e} above {:e}",
            rel.sphere(),
            th.sphere_tolerance
        ));
    }
    if cov_max > th.covariance_tolerance {
        failures.push(format!(
            "covariance residual {cov_max:e} above {:e}",
            th.covariance_tolerance
        ));
    }
    Outcome::new(
        json!({
            "relations": rel,
            "max_interior": rel.max_interior(),
            "sphere": rel.sphere(),
            "covariance_residuals": cov,
        }),
        failures,
    )
}

pub fn check_dirac(cfg: &Config) -> Result<Outcome> {
    let t = cfg.truncation()?;
    let d = cfg.dirac()?;
    let q = cfg.operator.q;
    let bound = try_check!(commutator_bound_check_with(
        &d,
        q,
        &t,
        cfg.thresholds.trend_threshold
    ));
    let optimality = optimality_check(&d, &t);
    let maxima = try_check!(commutator_column_maxima(&d, q, &t));
    // the same norms from the assembled commutators
    let gens = GeneratorSet::new(q, &t)?;
    let dop = d.operator(&t);
    let mut assembled = Vec::new();
    for k in 1..=t.ell() + 1 {
        let c = dop.multiply(gens.z(k))?.sub(&gens.z(k).multiply(&dop)?)?;
        assembled.push(op_norm_with(
            &c,
            cfg.thresholds.norm_tolerance,
            NORM_MAX_ITER,
        )?);
    }
    let mut failures = Vec::new();
    if bound.verdict != Verdict::Bounded {
        failures.push(format!("commutator bound check: {:?}", bound.verdict));
    }
    for (k, (a, b)) in assembled.iter().zip(&maxima).enumerate() {
        if (a - b).abs() > 1e-8 * b.max(1.0) {
            failures.push(format!(
                "‖[D, z_{}]‖: assembled {a} vs closed form {b}",
                k + 1
            ));
        }
    }
    Outcome::new(
        json!({
            "boundedness": bound,
            "optimality": optimality,
            "commutator_norms": { "closed_form": maxima, "assembled": assembled },
        }),
        failures,
    )
}

pub fn growth_graph(cfg: &Config) -> Result<Outcome> {
    let t = cfg.truncation()?;
    let d = cfg.dirac()?;
    let bound = try_check!(commutator_bound_check_with(
        &d,
        cfg.operator.q,
        &t,
        cfg.thresholds.trend_threshold
    ));
    let c = bound.edge_constant;
    let g = try_check!(GrowthGraph::new(&d, c, &t));
    let origin = LatticePoint::origin(t.ell());
    let mut failures = Vec::new();
    let mut checked = 0usize;
    let mut longest = 0usize;
    for p in t.enumerate() {
        let path = try_check!(lemma_path(&p, &origin, t.ell() + 2));
        if path.len() as u64 != p.weighted_degree() {
            failures.push(format!(
                "path from {p} has length {}, degree {}",
                path.len(),
                p.weighted_degree()
            ));
        }
        if let Err(e) = g.validate_path(&p, &path) {
            failures.push(format!("path from {p}: {e}"));
        }
        checked += 1;
        longest = longest.max(path.len());
    }
    failures.truncate(20);
    Outcome::new(
        json!({
            "dirac": d.name(),
            "edge_constant": c,
            "boundedness": bound.verdict,
            "paths_checked": checked,
            "longest_path": longest,
        }),
        failures,
    )
}

pub fn classify_sign(cfg: &Config) -> Result<Outcome> {
    let t = cfg.truncation()?;
    let d = cfg.dirac()?;
    let pattern = try_check!(classify_sign_pattern(
        &d,
        &t,
        cfg.thresholds.sign_search_max
    ));
    let class = khomology_class(&pattern);
    Outcome::new(
        json!({
            "dirac": d.name(),
            "pattern": pattern,
            "form": pattern.form.label(),
            "khomology_class": class,
        }),
        Vec::new(),
    )
}

pub fn index_pairing(cfg: &Config) -> Result<Outcome> {
    let t = cfg.truncation()?;
    let d = cfg.dirac()?;
    let r = try_check!(pairing(&d, cfg.operator.q, &t));
    let mut failures = Vec::new();
    if let Some(expected) = cfg.index.expected {
        if r.index != expected {
            failures.push(format!("index {} expected {expected}", r.index));
        }
    }
    Outcome::new(r, failures)
}

pub fn spectral_dimension(cfg: &Config) -> Result<Outcome> {
    let t = cfg.truncation()?;
    let d = cfg.dirac()?;
    let hi = cfg
        .spectral
        .hi
        .unwrap_or(t.complete_ball_radius().saturating_sub(1) as u64)
        .max(1);
    let lo = cfg.spectral.lo.unwrap_or((hi / 2).max(1));
    if lo > hi {
        return Err(ConfigError(format!("spectral range {lo}..={hi} is empty")).into());
    }
    let est = try_check!(spectral_dimension_estimate(&d, &t, lo, hi));
    let target = (t.ell() + 1) as f64;
    let ball: Vec<(u64, u128)> = (lo..=hi).map(|n| (n, count_ball(t.ell(), n))).collect();
    let mut failures = Vec::new();
    if (est.slope - target).abs() > cfg.thresholds.slope_tolerance {
        failures.push(format!(
            "slope {} not within {} of {target}",
            est.slope, cfg.thresholds.slope_tolerance
        ));
    }
    Outcome::new(
        json!({
            "dirac": d.name(),
            "range": [lo, hi],
            "slope": est.slope,
            "intercept": est.intercept,
            "expected_slope": target,
            "counts": est.counts,
            "ball_counts": ball,
        }),
        failures,
    )
}

pub fn extension_lift(cfg: &Config) -> Result<Outcome> {
    let ell = cfg.lattice.ell;
    let q = cfg.operator.q;
    let ext = &cfg.extension;
    let model = ModuleSpaceModel::new(ell, cfg.lattice.n_max, ext.fourier_max)
        .map_err(|e| ConfigError(e.to_string()))?;
    let words: Vec<String> = if ext.words.is_empty() {
        vec!["z1".into(), format!("z{}", ell + 1)]
    } else {
        ext.words.clone()
    };
    let mut profiles = Vec::new();
    let mut failures = Vec::new();
    for w in &words {
        let m: Monomial = w
            .parse()
            .map_err(|e: qsphere::extension::ExtensionError| ConfigError(e.to_string()))?;
        m.check_ell(ell).map_err(|e| ConfigError(e.to_string()))?;
        let prof = match lift_profile(&m, q, &model, ext.r_max) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("{w}: {e}"));
                continue;
            }
        };
        if !prof.monotone {
            failures.push(format!("{w}: residual not monotone in R"));
        }
        let quotient_letter = match m.alphabet {
            Alphabet::Z => ell + 1,
            Alphabet::Y => ell + 2,
        };
        let touches_corner = m.contains(ell + 1) || m.contains(quotient_letter);
        if !touches_corner && !prof.exactly_zero {
            failures.push(format!("{w}: residual should vanish identically"));
        }
        if touches_corner && prof.decay_factor.is_some_and(|l| l >= 1.0) {
            failures.push(format!("{w}: residual does not decay"));
        }
        profiles.push(prof);
    }
    Outcome::new(json!({ "model": model, "profiles": profiles }), failures)
}

pub fn reconstruct_ideal(cfg: &Config) -> Result<Outcome> {
    let t = cfg.truncation()?;
    let ell = t.ell();
    let q = cfg.operator.q;
    let id = &cfg.ideal;
    let cases: Vec<(Vec<i64>, Vec<i64>, i64)> = match (&id.i, &id.j) {
        (Some(i), Some(j)) => vec![(i.clone(), j.clone(), id.k.unwrap_or(0))],
        (None, None) => {
            let top = 2.min(t.n_max() as i64);
            let kmax = 2.min(t.m_max() as i64);
            let base = top + 1;
            let idx: Vec<Vec<i64>> = (0..base.pow(ell as u32))
                .map(|mut c| {
                    (0..ell)
                        .map(|_| {
                            let v = c % base;
                            c /= base;
                            v
                        })
                        .collect()
                })
                .collect();
            let ks: Vec<i64> = match id.k {
                Some(k) => vec![k],
                None => (-kmax..=kmax).collect(),
            };
            let mut out = Vec::new();
            for i in &idx {
                for j in &idx {
                    for &k in &ks {
                        out.push((i.clone(), j.clone(), k));
                    }
                }
            }
            out
        }
        _ => return Err(ConfigError("ideal.i and ideal.j must be given together".into()).into()),
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (i, j, k) in cases {
        let rec = reconstruct_elementary_report(&i, &j, k, q, &t)
            .map_err(|e| ConfigError(e.to_string()))?;
        if !rec.report.matches {
            failures.push(format!(
                "i={i:?} j={j:?} k={k}: diff {:e} via {}",
                rec.report.max_abs_diff, rec.report.word
            ));
        }
        reports.push(rec.report);
    }
    let worst = reports.iter().map(|r| r.max_abs_diff).fold(0.0, f64::max);
    Outcome::new(
        json!({ "count": reports.len(), "max_abs_diff": worst, "cases": reports }),
        failures,
    )
}

pub fn ev1_check(cfg: &Config) -> Result<Outcome> {
    let model = ModuleSpaceModel::new(
        cfg.lattice.ell,
        cfg.lattice.n_max,
        cfg.extension.fourier_max,
    )
    .map_err(|e| ConfigError(e.to_string()))?;
    let r = ev1_pullback_check(cfg.operator.q, &model)?;
    let failures = if r.passed {
        Vec::new()
    } else {
        vec![format!(
            "{} sign mismatches, generator diff {:e}",
            r.sign_mismatches, r.generator_max_diff
        )]
    };
    Outcome::new(r, failures)
}
