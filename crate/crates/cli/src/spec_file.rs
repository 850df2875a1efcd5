//! System definition files: TOML with matrices F, G, B, an input signal
//! specification, initial data, and solver options.
//!
//! Matrix entries may be integers, floats, or `"num/den"` strings. Exact
//! mode (`--exact`) accepts only integers and rational strings, since a
//! float literal has no canonical rational reading.

use serde::Deserialize;

use desys::matrix::{Matrix, Tolerance};
use desys::signal::{ExpTerm, InputSignal, SinTerm};
use desys::{Rational, Scalar};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    system: RawSystem,
    input: Option<RawInput>,
    initial: Option<RawInitial>,
    options: Option<RawOptions>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "F")]
    f: Vec<Vec<NumLit>>,
    #[serde(rename = "G")]
    g: Vec<Vec<NumLit>>,
    #[serde(rename = "B")]
    b: Option<Vec<Vec<NumLit>>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawInput {
    Zero,
    Polynomial {
        coeffs: Vec<Vec<f64>>,
    },
    ExponentialSum {
        terms: Vec<RawExpTerm>,
    },
    Sinusoid {
        terms: Vec<RawSinTerm>,
    },
    ZohSamples {
        #[serde(default)]
        start: f64,
        period: f64,
        samples: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExpTerm {
    coeff: Vec<f64>,
    rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSinTerm {
    coeff: Vec<f64>,
    omega: f64,
    #[serde(default)]
    phase: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    y0: Option<Vec<f64>>,
    #[serde(default)]
    t0: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    rank_tol: Option<f64>,
    residual_tol: Option<f64>,
    cluster_tol: Option<f64>,
}

/// A numeric literal: integer, float, or a `"num/den"` string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NumLit {
    Int(i64),
    Float(f64),
    Ratio(String),
}

impl NumLit {
    fn to_f64(&self, path: &str) -> Result<f64, CliError> {
        match self {
            NumLit::Int(v) => Ok(*v as f64),
            NumLit::Float(v) => Ok(*v),
            NumLit::Ratio(s) => {
                let (n, d) = split_ratio(s, path)?;
                Ok(n as f64 / d as f64)
            }
        }
    }

    fn to_exact(&self, path: &str) -> Result<Rational, CliError> {
        match self {
            NumLit::Int(v) => Ok(Rational::from_ratio(*v, 1)),
            NumLit::Float(_) => Err(CliError::Parse(format!(
                "{path}: float literals are not allowed in exact mode; use an integer or \"num/den\""
            ))),
            NumLit::Ratio(s) => {
                let (n, d) = split_ratio(s, path)?;
                Ok(Rational::from_ratio(n, d))
            }
        }
    }
}

fn split_ratio(s: &str, path: &str) -> Result<(i64, i64), CliError> {
    let parse_int = |txt: &str| {
        txt.trim()
            .parse::<i64>()
            .map_err(|_| CliError::Parse(format!("{path}: cannot parse rational literal {s:?}")))
    };
    match s.split_once('/') {
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d == 0 {
                return Err(CliError::Parse(format!("{path}: zero denominator in {s:?}")));
            }
            Ok((parse_int(num)?, d))
        }
        None => Ok((parse_int(s)?, 1)),
    }
}

/// Validated system definition, holding both scalar views of the data.
#[derive(Debug)]
pub struct SystemSpec {
    pub m: usize,
    pub r: usize,
    raw_f: Vec<Vec<NumLit>>,
    raw_g: Vec<Vec<NumLit>>,
    raw_b: Vec<Vec<NumLit>>,
    pub signal: InputSignal,
    pub y0: Vec<f64>,
    pub t0: f64,
    pub tol: Tolerance,
}

impl SystemSpec {
    pub fn parse(text: &str) -> Result<SystemSpec, CliError> {
        let raw: RawSpec =
            toml::from_str(text).map_err(|e| CliError::Parse(format!("system file: {e}")))?;
        let m = raw.system.f.len();
        check_square("system.F", &raw.system.f, m)?;
        check_square("system.G", &raw.system.g, m)?;
        let b = raw
            .system
            .b
            .unwrap_or_else(|| identity_lit(m));
        if b.len() != m {
            return Err(CliError::Parse(format!(
                "system.B: has {} rows, need {m} to match F",
                b.len()
            )));
        }
        let r = b.first().map_or(0, Vec::len);
        if r == 0 || b.iter().any(|row| row.len() != r) {
            return Err(CliError::Parse(
                "system.B: rows must be nonempty and of equal length".to_string(),
            ));
        }

        let signal = build_signal(raw.input, r)?;
        let initial = raw.initial.unwrap_or(RawInitial { y0: None, t0: 0.0 });
        let y0 = initial.y0.unwrap_or_else(|| vec![0.0; m]);
        if y0.len() != m {
            return Err(CliError::Parse(format!(
                "initial.y0: has {} entries, system dimension is {m}",
                y0.len()
            )));
        }

        let mut tol = Tolerance::default();
        if let Some(opts) = raw.options {
            if let Some(v) = opts.rank_tol {
                tol.rank_tol = v;
            }
            if let Some(v) = opts.residual_tol {
                tol.residual_tol = v;
            }
            if let Some(v) = opts.cluster_tol {
                tol.cluster_tol = v;
            }
        }

        Ok(SystemSpec {
            m,
            r,
            raw_f: raw.system.f,
            raw_g: raw.system.g,
            raw_b: b,
            signal,
            y0,
            t0: initial.t0,
            tol,
        })
    }

    pub fn f_matrix(&self) -> Result<Matrix<f64>, CliError> {
        lit_matrix_f64("system.F", &self.raw_f)
    }

    pub fn g_matrix(&self) -> Result<Matrix<f64>, CliError> {
        lit_matrix_f64("system.G", &self.raw_g)
    }

    pub fn b_matrix(&self) -> Result<Matrix<f64>, CliError> {
        lit_matrix_f64("system.B", &self.raw_b)
    }

    pub fn f_matrix_exact(&self) -> Result<Matrix<Rational>, CliError> {
        lit_matrix_exact("system.F", &self.raw_f)
    }

    pub fn g_matrix_exact(&self) -> Result<Matrix<Rational>, CliError> {
        lit_matrix_exact("system.G", &self.raw_g)
    }
}

fn identity_lit(m: usize) -> Vec<Vec<NumLit>> {
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| NumLit::Int(if i == j { 1 } else { 0 }))
                .collect()
        })
        .collect()
}

fn check_square(path: &str, rows: &[Vec<NumLit>], m: usize) -> Result<(), CliError> {
    if m == 0 {
        return Err(CliError::Parse(format!("{path}: matrix is empty")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(CliError::Parse(format!(
                "{path}[{i}]: has {} entries, need {m} for a square matrix",
                row.len()
            )));
        }
    }
    Ok(())
}

fn lit_matrix_f64(path: &str, rows: &[Vec<NumLit>]) -> Result<Matrix<f64>, CliError> {
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (j, lit) in row.iter().enumerate() {
            r.push(lit.to_f64(&format!("{path}[{i}][{j}]"))?);
        }
        out.push(r);
    }
    Ok(Matrix::from_rows(out))
}

fn lit_matrix_exact(path: &str, rows: &[Vec<NumLit>]) -> Result<Matrix<Rational>, CliError> {
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (j, lit) in row.iter().enumerate() {
            r.push(lit.to_exact(&format!("{path}[{i}][{j}]"))?);
        }
        out.push(r);
    }
    Ok(Matrix::from_rows(out))
}

fn build_signal(input: Option<RawInput>, r: usize) -> Result<InputSignal, CliError> {
    let check_dim = |what: &str, len: usize| {
        if len != r {
            Err(CliError::Parse(format!(
                "input.{what}: has dimension {len}, input matrix has {r} columns"
            )))
        } else {
            Ok(())
        }
    };
    Ok(match input {
        None | Some(RawInput::Zero) => InputSignal::zero(r),
        Some(RawInput::Polynomial { coeffs }) => {
            for (d, c) in coeffs.iter().enumerate() {
                check_dim(&format!("coeffs[{d}]"), c.len())?;
            }
            InputSignal::Polynomial { dim: r, coeffs }
        }
        Some(RawInput::ExponentialSum { terms }) => {
            let mut out = Vec::with_capacity(terms.len());
            for (i, t) in terms.into_iter().enumerate() {
                check_dim(&format!("terms[{i}].coeff"), t.coeff.len())?;
                out.push(ExpTerm {
                    coeff: t.coeff,
                    rate: t.rate,
                });
            }
            InputSignal::ExponentialSum { dim: r, terms: out }
        }
        Some(RawInput::Sinusoid { terms }) => {
            let mut out = Vec::with_capacity(terms.len());
            for (i, t) in terms.into_iter().enumerate() {
                check_dim(&format!("terms[{i}].coeff"), t.coeff.len())?;
                out.push(SinTerm {
                    coeff: t.coeff,
                    omega: t.omega,
                    phase: t.phase,
                });
            }
            InputSignal::Sinusoid { dim: r, terms: out }
        }
        Some(RawInput::ZohSamples {
            start,
            period,
            samples,
        }) => {
            if period <= 0.0 {
                return Err(CliError::Parse(
                    "input.period: must be positive".to_string(),
                ));
            }
            for (k, s) in samples.iter().enumerate() {
                check_dim(&format!("samples[{k}]"), s.len())?;
            }
            InputSignal::ZeroOrderHold {
                dim: r,
                start,
                period,
                samples,
            }
        }
    })
}
