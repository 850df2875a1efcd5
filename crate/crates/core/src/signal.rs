//! Vector-valued input signals with exact derivatives of every order.
//!
//! The fast subsystem of a descriptor system feeds on derivatives of the
//! input up to the nilpotency index, so signals here are closed-form objects
//! rather than sampled data. Each smooth kind also exposes an LTI generator
//! `V(t0 + u) = C exp(S u) w0`, which turns the slow convolution integral
//! into a single augmented matrix exponential (Van Loan's trick).

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    /// Coefficient vector (dimension r).
    pub coeff: Vec<f64>,
    /// Exponential rate a: the term is `coeff * exp(a t)`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinTerm {
    /// Coefficient vector (dimension r).
    pub coeff: Vec<f64>,
    pub omega: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    /// `V(t) = sum_d coeffs[d] * t^d`. An empty list is the zero signal.
    Polynomial { dim: usize, coeffs: Vec<Vec<f64>> },
    /// `V(t) = sum_j coeff_j * exp(a_j t)`.
    ExponentialSum { dim: usize, terms: Vec<ExpTerm> },
    /// `V(t) = sum_j coeff_j * sin(omega_j t + phase_j)`.
    Sinusoid { dim: usize, terms: Vec<SinTerm> },
    /// Piecewise constant: value `samples[k]` on `[start + k T, start + (k+1) T)`,
    /// clamped to the first/last sample outside the covered range.
    ZeroOrderHold {
        dim: usize,
        start: f64,
        period: f64,
        samples: Vec<Vec<f64>>,
    },
}

impl InputSignal {
    pub fn zero(dim: usize) -> Self {
        InputSignal::Polynomial { dim, coeffs: vec![] }
    }

    /// Constant signal.
    pub fn constant(value: Vec<f64>) -> Self {
        InputSignal::Polynomial {
            dim: value.len(),
            coeffs: vec![value],
        }
    }

    pub fn polynomial(coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let dim = coeffs.first().map_or(0, Vec::len);
        if coeffs.iter().any(|c| c.len() != dim) || (dim == 0 && !coeffs.is_empty()) {
            return Err(Error::dim(
                "polynomial signal coefficients must share one dimension".to_string(),
            ));
        }
        Ok(InputSignal::Polynomial { dim, coeffs })
    }

    pub fn dim(&self) -> usize {
        match self {
            InputSignal::Polynomial { dim, .. }
            | InputSignal::ExponentialSum { dim, .. }
            | InputSignal::Sinusoid { dim, .. }
            | InputSignal::ZeroOrderHold { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.eval_derivative(t, 0)
    }

    /// Exact i-th derivative at `t`. Zero-order-hold signals have derivative
    /// zero inside every interval (jumps are not differentiated).
    pub fn eval_derivative(&self, t: f64, order: usize) -> Vec<f64> {
        let r = self.dim();
        let mut out = vec![0.0; r];
        match self {
            InputSignal::Polynomial { coeffs, .. } => {
                for (d, c) in coeffs.iter().enumerate() {
                    if d < order {
                        continue;
                    }
                    // d!/(d-order)! * t^(d-order)
                    let mut factor = 1.0;
                    for k in 0..order {
                        factor *= (d - k) as f64;
                    }
                    let tp = t.powi((d - order) as i32);
                    for (o, ci) in out.iter_mut().zip(c.iter()) {
                        *o += factor * tp * ci;
                    }
                }
            }
            InputSignal::ExponentialSum { terms, .. } => {
                for term in terms {
                    let factor = term.rate.powi(order as i32) * (term.rate * t).exp();
                    for (o, ci) in out.iter_mut().zip(term.coeff.iter()) {
                        *o += factor * ci;
                    }
                }
            }
            InputSignal::Sinusoid { terms, .. } => {
                for term in terms {
                    let factor = term.omega.powi(order as i32);
                    let arg = term.omega * t
                        + term.phase
                        + order as f64 * std::f64::consts::FRAC_PI_2;
                    let val = factor * arg.sin();
                    for (o, ci) in out.iter_mut().zip(term.coeff.iter()) {
                        *o += val * ci;
                    }
                }
            }
            InputSignal::ZeroOrderHold { .. } => {
                if order == 0 {
                    out = self.zoh_value(t);
                }
                // Derivatives of any positive order vanish inside intervals.
            }
        }
        out
    }

    fn zoh_value(&self, t: f64) -> Vec<f64> {
        if let InputSignal::ZeroOrderHold {
            dim,
            start,
            period,
            samples,
        } = self
        {
            if samples.is_empty() {
                return vec![0.0; *dim];
            }
            // Left-closed intervals [start + kT, start + (k+1)T); a tiny nudge
            // keeps exact sample instants in their own interval.
            let x = (t - start) / period + 1e-9;
            let k = x.floor().max(0.0) as usize;
            samples[k.min(samples.len() - 1)].clone()
        } else {
            unreachable!()
        }
    }

    /// Discontinuity locations strictly inside `(a, b)`, for quadrature
    /// splitting and sampling diagnostics. Empty for smooth kinds.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            InputSignal::ZeroOrderHold {
                start,
                period,
                samples,
                ..
            } => {
                let mut out = Vec::new();
                for k in 1..samples.len() {
                    let edge = start + k as f64 * period;
                    if edge > a && edge < b {
                        out.push(edge);
                    }
                }
                out
            }
            _ => vec![],
        }
    }

    /// LTI generator `(S, C, w0)` with `V(t0 + u) = C exp(S u) w0`, available
    /// for the smooth kinds. Zero-order-hold signals are integrated piecewise
    /// instead.
    pub fn generator(&self, t0: f64) -> Option<SignalGenerator> {
        match self {
            InputSignal::Polynomial { dim, coeffs } => {
                let deg = coeffs.len();
                if deg == 0 {
                    return Some(SignalGenerator {
                        s: Matrix::zeros(1, 1),
                        c: Matrix::zeros(*dim, 1),
                        w0: vec![1.0],
                    });
                }
                // Re-expand around t0: V(t0+u) = sum_j beta_j u^j with state
                // w_j(u) = u^j / j!, so C columns are beta_j * j!.
                let mut s = Matrix::zeros(deg, deg);
                for j in 1..deg {
                    s[(j, j - 1)] = 1.0;
                }
                let mut c = Matrix::zeros(*dim, deg);
                for j in 0..deg {
                    // beta_j = sum_{k>=j} coeffs[k] C(k,j) t0^{k-j}; times j!.
                    let mut factor_jfact = 1.0;
                    for k in 1..=j {
                        factor_jfact *= k as f64;
                    }
                    for k in j..deg {
                        let binom = binomial(k, j);
                        let tp = t0.powi((k - j) as i32);
                        for i in 0..*dim {
                            c[(i, j)] += coeffs[k][i] * binom * tp * factor_jfact;
                        }
                    }
                }
                let mut w0 = vec![0.0; deg];
                w0[0] = 1.0;
                Some(SignalGenerator { s, c, w0 })
            }
            InputSignal::ExponentialSum { dim, terms } => {
                let g = terms.len().max(1);
                let mut s = Matrix::zeros(g, g);
                let mut c = Matrix::zeros(*dim, g);
                let mut w0 = vec![0.0; g];
                for (j, term) in terms.iter().enumerate() {
                    s[(j, j)] = term.rate;
                    w0[j] = 1.0;
                    let e0 = (term.rate * t0).exp();
                    for i in 0..*dim {
                        c[(i, j)] = term.coeff[i] * e0;
                    }
                }
                Some(SignalGenerator { s, c, w0 })
            }
            InputSignal::Sinusoid { dim, terms } => {
                let g = (2 * terms.len()).max(1);
                let mut s = Matrix::zeros(g, g);
                let mut c = Matrix::zeros(*dim, g);
                let mut w0 = vec![0.0; g];
                for (j, term) in terms.iter().enumerate() {
                    let (a, b) = (2 * j, 2 * j + 1);
                    s[(a, b)] = term.omega;
                    s[(b, a)] = -term.omega;
                    let arg = term.omega * t0 + term.phase;
                    w0[a] = arg.sin();
                    w0[b] = arg.cos();
                    for i in 0..*dim {
                        c[(i, a)] = term.coeff[i];
                    }
                }
                Some(SignalGenerator { s, c, w0 })
            }
            InputSignal::ZeroOrderHold { .. } => None,
        }
    }

    /// Constant pieces of the signal covering `[a, b]`, as (left edge, right
    /// edge, value). Only available for zero-order-hold signals.
    pub fn piecewise_segments(&self, a: f64, b: f64) -> Option<Vec<(f64, f64, Vec<f64>)>> {
        match self {
            InputSignal::ZeroOrderHold { .. } => {
                let mut edges = vec![a];
                edges.extend(self.breakpoints(a, b));
                edges.push(b);
                let mut out = Vec::new();
                for w in edges.windows(2) {
                    if w[1] > w[0] {
                        let mid = 0.5 * (w[0] + w[1]);
                        out.push((w[0], w[1], self.zoh_value(mid)));
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Generator realization of a smooth signal: `V(t0 + u) = C exp(S u) w0`.
#[derive(Debug, Clone)]
pub struct SignalGenerator {
    pub s: Matrix<f64>,
    pub c: Matrix<f64>,
    pub w0: Vec<f64>,
}
