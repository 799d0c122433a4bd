//! Coordinate-list text dump of an operator on a truncation window.
//!
//! ```text
//! # ell=1 n_max=2 m_max=2 interior_margin=1
//! 3 0 0.8660254037844386 0
//! ```

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{OperatorError, SparseOperator};
use crate::lattice::Truncation;

pub fn write_coo<W: Write>(
    mut out: W,
    trunc: &Truncation,
    op: &SparseOperator,
) -> Result<(), OperatorError> {
    if op.space() != &trunc.space() {
        return Err(OperatorError::SpaceMismatch);
    }
    writeln!(
        out,
        "# ell={} n_max={} m_max={} interior_margin={}",
        trunc.ell(),
        trunc.n_max(),
        trunc.m_max(),
        trunc.interior_margin()
    )?;
    for (i, j, v) in op.triplets() {
        writeln!(out, "{i} {j} {:?} {:?}", v.re, v.im)?;
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> OperatorError {
    OperatorError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<Truncation, OperatorError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "missing header"))?;
    let mut vals = [None; 4];
    const KEYS: [&str; 4] = ["ell", "n_max", "m_max", "interior_margin"];
    for kv in body.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("bad field {kv:?}")))?;
        let slot = KEYS
            .iter()
            .position(|key| *key == k)
            .ok_or_else(|| parse_err(1, format!("unknown key {k:?}")))?;
        vals[slot] = Some(
            v.parse::<u32>()
                .map_err(|e| parse_err(1, format!("{k}: {e}")))?,
        );
    }
    let get = |i: usize| vals[i].ok_or_else(|| parse_err(1, format!("missing {}", KEYS[i])));
    Ok(Truncation::with_margin(
        get(0)? as usize,
        get(1)?,
        get(2)?,
        get(3)?,
    )?)
}

pub fn read_coo<R: BufRead>(input: R) -> Result<(Truncation, SparseOperator), OperatorError> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty input"))??;
    let trunc = parse_header(header.trim())?;
    let mut trip = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = n + 2;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(parse_err(lineno, "expected `row col re im`"));
        }
        let idx = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(lineno, e.to_string()))
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| parse_err(lineno, e.to_string()))
        };
        trip.push((
            idx(f[0])?,
            idx(f[1])?,
            Complex64::new(num(f[2])?, num(f[3])?),
        ));
    }
    let op = SparseOperator::from_triplets(trunc.space(), trip)?;
    Ok((trunc, op))
}
