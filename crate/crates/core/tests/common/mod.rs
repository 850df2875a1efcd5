//! Shared fixtures and independent oracles for the integration suites.
//!
//! Every oracle here recomputes results along a route disjoint from the
//! library implementation it checks: plain truncated series for the matrix
//! exponential, classic RK4 for invertible-F systems, and direct
//! Gamma-formula summation for the nabla operator.
#![allow(dead_code)] // each test binary uses its own subset

use desys::gamma::{gamma, rising_factorial};
use desys::matrix::Matrix;
use desys::pencil::Pencil;
use desys::sequence::SampleSequence;
use desys::signal::InputSignal;
use desys::{Rational, Scalar};

/// One hand-constructed pencil with its ground-truth invariants. The
/// divisors are derived from the block construction: strict equivalence
/// transforms (unimodular left/right factors) preserve them.
pub struct PencilCase {
    pub name: &'static str,
    pub f: Vec<Vec<i64>>,
    pub g: Vec<Vec<i64>>,
    pub regular: bool,
    pub p: usize,
    pub q: usize,
    pub q_star: usize,
    /// ((re num, re den), (im num, im den), block size), sorted by
    /// (re, im) then descending size — the library's output order.
    pub finite_divisors: Vec<((i64, i64), (i64, i64), usize)>,
    /// Nilpotent block sizes, descending.
    pub infinite_divisors: Vec<usize>,
}

fn mat_i64(rows: &[Vec<i64>]) -> Matrix<f64> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect(),
    )
}

fn mat_exact(rows: &[Vec<i64>]) -> Matrix<Rational> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| Rational::from_ratio(x, 1)).collect())
            .collect(),
    )
}

pub fn pencil_f64(case: &PencilCase) -> Pencil<f64> {
    Pencil::new(mat_i64(&case.f), mat_i64(&case.g)).unwrap()
}

pub fn pencil_exact(case: &PencilCase) -> Pencil<Rational> {
    Pencil::new(mat_exact(&case.f), mat_exact(&case.g)).unwrap()
}

fn mul_i64(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut out = vec![vec![0i64; m]; n];
    for i in 0..n {
        for l in 0..k {
            for j in 0..m {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

/// The structure corpus: canonical blocks, strict-equivalence transforms of
/// them, complex and rational spectra, and two singular pencils.
pub fn corpus() -> Vec<PencilCase> {
    let mut cases = Vec::new();

    cases.push(PencilCase {
        name: "ode_diag",
        f: vec![vec![1, 0], vec![0, 1]],
        g: vec![vec![1, 0], vec![0, 2]],
        regular: true,
        p: 2,
        q: 0,
        q_star: 0,
        finite_divisors: vec![((1, 1), (0, 1), 1), ((2, 1), (0, 1), 1)],
        infinite_divisors: vec![],
    });

    cases.push(PencilCase {
        name: "mixed_canonical",
        f: vec![vec![1, 0], vec![0, 0]],
        g: vec![vec![-1, 0], vec![0, 1]],
        regular: true,
        p: 1,
        q: 1,
        q_star: 1,
        finite_divisors: vec![((-1, 1), (0, 1), 1)],
        infinite_divisors: vec![1],
    });

    cases.push(PencilCase {
        name: "fast_two_chain",
        f: vec![vec![0, 1], vec![0, 0]],
        g: vec![vec![1, 0], vec![0, 1]],
        regular: true,
        p: 0,
        q: 2,
        q_star: 2,
        finite_divisors: vec![],
        infinite_divisors: vec![2],
    });

    cases.push(PencilCase {
        name: "index_three_chain",
        f: vec![vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]],
        g: vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
        regular: true,
        p: 0,
        q: 3,
        q_star: 3,
        finite_divisors: vec![],
        infinite_divisors: vec![3],
    });

    cases.push(PencilCase {
        name: "complex_rotation",
        f: vec![vec![1, 0], vec![0, 1]],
        g: vec![vec![0, 1], vec![-1, 0]],
        regular: true,
        p: 2,
        q: 0,
        q_star: 0,
        finite_divisors: vec![((0, 1), (-1, 1), 1), ((0, 1), (1, 1), 1)],
        infinite_divisors: vec![],
    });

    cases.push(PencilCase {
        name: "complex_shifted",
        f: vec![vec![1, 0], vec![0, 1]],
        g: vec![vec![1, 2], vec![-2, 1]],
        regular: true,
        p: 2,
        q: 0,
        q_star: 0,
        finite_divisors: vec![((1, 1), (-2, 1), 1), ((1, 1), (2, 1), 1)],
        infinite_divisors: vec![],
    });

    cases.push(PencilCase {
        name: "finite_jordan_block",
        f: vec![vec![1, 0], vec![0, 1]],
        g: vec![vec![1, 1], vec![0, 1]],
        regular: true,
        p: 2,
        q: 0,
        q_star: 0,
        finite_divisors: vec![((1, 1), (0, 1), 2)],
        infinite_divisors: vec![],
    });

    cases.push(PencilCase {
        name: "mixed_three",
        f: vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 0, 0]],
        g: vec![vec![-1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
        regular: true,
        p: 1,
        q: 2,
        q_star: 2,
        finite_divisors: vec![((-1, 1), (0, 1), 1)],
        infinite_divisors: vec![2],
    });

    // Strict-equivalence transform of mixed_canonical:
    // M = [[1,1],[0,1]], N = [[1,0],[1,1]] (both unimodular).
    {
        let m = vec![vec![1, 1], vec![0, 1]];
        let n = vec![vec![1, 0], vec![1, 1]];
        let f0 = vec![vec![1, 0], vec![0, 0]];
        let g0 = vec![vec![-1, 0], vec![0, 1]];
        cases.push(PencilCase {
            name: "mixed_transformed",
            f: mul_i64(&mul_i64(&m, &f0), &n),
            g: mul_i64(&mul_i64(&m, &g0), &n),
            regular: true,
            p: 1,
            q: 1,
            q_star: 1,
            finite_divisors: vec![((-1, 1), (0, 1), 1)],
            infinite_divisors: vec![1],
        });
    }

    cases.push(PencilCase {
        name: "scalar_fast",
        f: vec![vec![0]],
        g: vec![vec![1]],
        regular: true,
        p: 0,
        q: 1,
        q_star: 1,
        finite_divisors: vec![],
        infinite_divisors: vec![1],
    });

    cases.push(PencilCase {
        name: "rational_eigenvalues",
        f: vec![vec![2, 0], vec![0, 3]],
        g: vec![vec![1, 0], vec![0, 1]],
        regular: true,
        p: 2,
        q: 0,
        q_star: 0,
        finite_divisors: vec![((1, 3), (0, 1), 1), ((1, 2), (0, 1), 1)],
        infinite_divisors: vec![],
    });

    cases.push(PencilCase {
        name: "zero_eigenvalue",
        f: vec![vec![1, 0], vec![0, 1]],
        g: vec![vec![0, 0], vec![0, -1]],
        regular: true,
        p: 2,
        q: 0,
        q_star: 0,
        finite_divisors: vec![((-1, 1), (0, 1), 1), ((0, 1), (0, 1), 1)],
        infinite_divisors: vec![],
    });

    // blkdiag(J_2(2), H_2) under a unimodular strict-equivalence transform.
    {
        let m = vec![
            vec![1, 0, 1, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 1, 0, 1],
        ];
        let n = vec![
            vec![1, 0, 0, 0],
            vec![1, 1, 0, 0],
            vec![0, 0, 1, 1],
            vec![0, 0, 0, 1],
        ];
        let f0 = vec![
            vec![1, 0, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 0, 1],
            vec![0, 0, 0, 0],
        ];
        let g0 = vec![
            vec![2, 1, 0, 0],
            vec![0, 2, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ];
        cases.push(PencilCase {
            name: "four_by_four_transformed",
            f: mul_i64(&mul_i64(&m, &f0), &n),
            g: mul_i64(&mul_i64(&m, &g0), &n),
            regular: true,
            p: 2,
            q: 2,
            q_star: 2,
            finite_divisors: vec![((2, 1), (0, 1), 2)],
            infinite_divisors: vec![2],
        });
    }

    cases.push(PencilCase {
        name: "singular_shared_kernel",
        f: vec![vec![1, 0], vec![0, 0]],
        g: vec![vec![1, 0], vec![0, 0]],
        regular: false,
        p: 0,
        q: 0,
        q_star: 0,
        finite_divisors: vec![],
        infinite_divisors: vec![],
    });

    cases.push(PencilCase {
        name: "singular_zero",
        f: vec![vec![0, 0], vec![0, 0]],
        g: vec![vec![0, 0], vec![0, 0]],
        regular: false,
        p: 0,
        q: 0,
        q_star: 0,
        finite_divisors: vec![],
        infinite_divisors: vec![],
    });

    cases
}

/// Plain truncated Taylor series for exp(A t); independent of the Padé path.
pub fn series_mat_exp(a: &Matrix<f64>, t: f64, terms: usize) -> Matrix<f64> {
    let n = a.rows();
    let at = a.scale(&t);
    let mut sum = Matrix::<f64>::identity(n);
    let mut term = Matrix::<f64>::identity(n);
    for k in 1..=terms {
        term = &term * &at;
        term = term.scale(&(1.0 / k as f64));
        sum = &sum + &term;
    }
    sum
}

/// Classic fixed-step RK4 on `Y' = F^{-1} G Y + F^{-1} B V(t)` for systems
/// with invertible F, evaluated at the grid points of `t_grid` (which must be
/// uniform). `substeps` RK4 steps are taken inside each grid interval.
pub fn rk4_oracle(
    f_inv_g: &Matrix<f64>,
    f_inv_b: &Matrix<f64>,
    signal: &InputSignal,
    y0: &[f64],
    t_grid: &[f64],
    substeps: usize,
) -> Vec<Vec<f64>> {
    let deriv = |t: f64, y: &Matrix<f64>| -> Matrix<f64> {
        let v = Matrix::col_vec(signal.eval(t));
        &(f_inv_g * y) + &(f_inv_b * &v)
    };
    let mut out = Vec::with_capacity(t_grid.len());
    let mut y = Matrix::col_vec(y0.to_vec());
    out.push(y.as_slice().to_vec());
    for w in t_grid.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        let mut t = w[0];
        for _ in 0..substeps {
            let k1 = deriv(t, &y);
            let k2 = deriv(t + 0.5 * h, &(&y + &k1.scale(&(0.5 * h))));
            let k3 = deriv(t + 0.5 * h, &(&y + &k2.scale(&(0.5 * h))));
            let k4 = deriv(t + h, &(&y + &k3.scale(&h)));
            let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(&2.0);
            y = &y + &incr.scale(&(h / 6.0));
            t += h;
        }
        out.push(y.as_slice().to_vec());
    }
    out
}

/// Direct Gamma-formula summation of the nabla operator,
/// `(1/Gamma(-n)) sum_j (k-j+1)^(-n-1) Y_j`, term by term. Independent of the
/// recurrence-based coefficient path.
pub fn nabla_direct_oracle(seq: &SampleSequence, n: f64, k: i64) -> Vec<f64> {
    let gamma_minus_n = gamma(-n).unwrap();
    let dim = seq.dim();
    let mut out = vec![0.0; dim];
    for j in 0..=k {
        let w = rising_factorial((k - j + 1) as f64, -n - 1.0).unwrap() / gamma_minus_n;
        let y = seq.get(j).unwrap();
        for (o, yi) in out.iter_mut().zip(y.iter()) {
            *o += w * yi;
        }
    }
    out
}
