//! Closed-form solutions of `F Y' = G Y + B V` with consistent initial data.
//!
//! Two independent routes are implemented: the z-coordinate form
//! `Y(t) = Qp exp(Jp (t-t0)) Zp(t0) + Q K(t)`, and the fundamental-matrix
//! form `Y(t) = F(t,t0) Y(t0) + int F(t,s) Qp Bp V(s) ds + fast correction`,
//! the latter evaluating its integral by adaptive quadrature so the two
//! agree only when both are right.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::mat_exp;
use crate::matrix::{real_part_checked, Matrix, Tolerance};
use crate::quad::integrate;
use crate::signal::InputSignal;
use crate::system::{consistency_check, k_vector, zp_initial, DescriptorSystem, IM_TOL};
use crate::weierstrass::WeierstrassDecomposition;

/// Time-stamped solution samples.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

#[derive(Debug, Clone)]
pub struct TrajectoryMeta {
    pub tolerance: Tolerance,
    pub decomposition_residuals: (f64, f64),
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotonicGrid);
    }
    Ok(())
}

fn check_consistent(
    sys: &DescriptorSystem,
    y0: &[f64],
    signal: &InputSignal,
    t0: f64,
) -> Result<()> {
    let report = consistency_check(sys, y0, signal, t0)?;
    if !report.consistent {
        return Err(Error::InconsistentInitialCondition {
            defect: report.defect,
        });
    }
    Ok(())
}

/// Evaluate `Y(t) = Qp exp(Jp (t - t0)) Zp(t0) + Q K(t)` on the grid. The
/// first grid point is the initial time.
pub fn solve_continuous(
    sys: &DescriptorSystem,
    y0: &[f64],
    signal: &InputSignal,
    t_grid: &[f64],
) -> Result<Trajectory> {
    validate_grid(t_grid)?;
    let t0 = *t_grid.first().ok_or(Error::GridTooCoarse)?;
    check_consistent(sys, y0, signal, t0)?;
    let dec = sys.decomposition();
    let zp0 = zp_initial(sys, y0)?;

    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let slow = if dec.p > 0 {
            let e = mat_exp(&dec.jp, t - t0)?;
            &dec.qp * &(&e * &zp0)
        } else {
            Matrix::zeros(sys.dim(), 1)
        };
        let k = k_vector(sys, signal, t, t0)?;
        let y_cx = &slow + &(&dec.qmat * &k);
        let y = real_part_checked::<f64>(&y_cx, IM_TOL)?;
        states.push(y.into_vec());
    }
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        meta: TrajectoryMeta {
            tolerance: *sys.tolerance(),
            decomposition_residuals: crate::weierstrass::verify_decomposition(
                dec,
                sys.pencil(),
            )?,
        },
    })
}

/// State transition operator `F(t, t0) = Q diag(exp(Jp (t-t0)), I_q) Q^{-1}`.
/// Real for real pencils; satisfies the semigroup law
/// `F(t, s) F(s, t0) = F(t, t0)`.
pub fn fundamental_matrix(
    dec: &WeierstrassDecomposition<f64>,
    t: f64,
    t0: f64,
) -> Result<Matrix<f64>> {
    let qinv = dec.qmat.inverse(&Tolerance::default()).map_err(|_| {
        Error::IllConditioned {
            residual: f64::INFINITY,
            tol: 0.0,
        }
    })?;
    fundamental_matrix_cached(dec, &qinv, t, t0)
}

fn fundamental_matrix_cached(
    dec: &WeierstrassDecomposition<f64>,
    qinv: &Matrix<Complex64>,
    t: f64,
    t0: f64,
) -> Result<Matrix<f64>> {
    let blocks = Matrix::block_diag(&[&mat_exp(&dec.jp, t - t0)?, &Matrix::identity(dec.q)]);
    let full = &(&dec.qmat * &blocks) * qinv;
    real_part_checked::<f64>(&full, IM_TOL)
}

/// Solve through the fundamental matrix:
///
///   Y(t) = F(t,t0) Y(t0) + int_{t0}^t F(t,s) Qp Bp V(s) ds
///          + Qq sum_i Hq^i Bq (V^(i)(t0) - V^(i)(t)).
///
/// The integral runs through adaptive quadrature on the transition operator
/// itself, making this an independent cross-check of [`solve_continuous`].
pub fn solve_via_fundamental(
    sys: &DescriptorSystem,
    y0: &[f64],
    signal: &InputSignal,
    t_grid: &[f64],
) -> Result<Trajectory> {
    validate_grid(t_grid)?;
    let t0 = *t_grid.first().ok_or(Error::GridTooCoarse)?;
    check_consistent(sys, y0, signal, t0)?;
    let dec = sys.decomposition();
    let m = sys.dim();
    let qinv = dec
        .qmat
        .inverse(sys.tolerance())
        .map_err(|_| Error::IllConditioned {
            residual: f64::INFINITY,
            tol: sys.tolerance().residual_tol,
        })?;
    let y0_col = Matrix::col_vec(y0.to_vec());
    let slow_map = sys.slow_map_real(); // Re(Qp Bp), m x r
    let fast_maps = sys.fast_maps_real(); // Re(Qq Hq^i Bq)

    let deriv_t0: Vec<Vec<f64>> = (0..dec.q_star)
        .map(|i| signal.eval_derivative(t0, i))
        .collect();

    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let transition = fundamental_matrix_cached(dec, &qinv, t, t0)?;
        let mut y = (&transition * &y0_col).into_vec();

        if dec.p > 0 {
            let integrand = |s: f64| -> Vec<f64> {
                let phi = fundamental_matrix_cached(dec, &qinv, t, s)
                    .expect("transition operator evaluation");
                let v = Matrix::col_vec(signal.eval(s));
                (&phi * &(slow_map * &v)).into_vec()
            };
            let breakpoints = signal.breakpoints(t0.min(t), t0.max(t));
            let contrib = integrate(integrand, t0, t, &breakpoints, 1e-12);
            for (yi, ci) in y.iter_mut().zip(contrib.iter()) {
                *yi += ci;
            }
        }

        for (i, map) in fast_maps.iter().enumerate() {
            let dt = signal.eval_derivative(t, i);
            let diff: Vec<f64> = deriv_t0[i].iter().zip(dt.iter()).map(|(a, b)| a - b).collect();
            let contrib = map * &Matrix::col_vec(diff);
            for (yi, ci) in y.iter_mut().zip(contrib.as_slice().iter()) {
                *yi += ci;
            }
        }
        debug_assert_eq!(y.len(), m);
        states.push(y);
    }
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        meta: TrajectoryMeta {
            tolerance: *sys.tolerance(),
            decomposition_residuals: crate::weierstrass::verify_decomposition(
                dec,
                sys.pencil(),
            )?,
        },
    })
}

/// Independent residual oracle: approximate `Y'` with central differences on
/// a uniform grid and return `max_k ||F Y'(t_k) - G Y(t_k) - B V(t_k)||_inf`
/// over interior points. Second order in the grid step for exact solutions.
pub fn residual_check(
    sys: &DescriptorSystem,
    traj: &Trajectory,
    signal: &InputSignal,
) -> Result<f64> {
    let n = traj.times.len();
    if n < 3 {
        return Err(Error::GridTooCoarse);
    }
    let h = traj.times[1] - traj.times[0];
    let uniform = traj
        .times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
    if !uniform {
        return Err(Error::NonMonotonicGrid);
    }
    let f = sys.pencil().f();
    let g = sys.pencil().g();
    let b = sys.input_matrix();
    let mut worst = 0.0f64;
    for k in 1..n - 1 {
        let mut ydot = Vec::with_capacity(sys.dim());
        for i in 0..sys.dim() {
            ydot.push((traj.states[k + 1][i] - traj.states[k - 1][i]) / (2.0 * h));
        }
        let ydot = Matrix::col_vec(ydot);
        let y = Matrix::col_vec(traj.states[k].clone());
        let v = Matrix::col_vec(signal.eval(traj.times[k]));
        let residual = &(&(f * &ydot) - &(g * &y)) - &(b * &v);
        worst = worst.max(residual.max_abs());
    }
    Ok(worst)
}

/// Uniform grid helper: `count + 1` points from `t0` with step `dt`.
pub fn uniform_grid(t0: f64, dt: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|k| t0 + k as f64 * dt).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::build_system;

    fn scalar_decay() -> DescriptorSystem {
        build_system(
            Matrix::from_rows(vec![vec![1.0]]),
            Matrix::from_rows(vec![vec![-1.0]]),
            Matrix::from_rows(vec![vec![1.0]]),
            &Tolerance::default(),
        )
        .unwrap()
    }

    fn mixed_2x2() -> DescriptorSystem {
        build_system(
            Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            Matrix::from_rows(vec![vec![-1.0, 0.0], vec![0.0, 1.0]]),
            Matrix::identity(2),
            &Tolerance::default(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_ode_closed_form() {
        let sys = scalar_decay();
        let v = 2.0;
        let y0 = 5.0;
        let sig = InputSignal::constant(vec![v]);
        let grid = uniform_grid(0.0, 0.1, 20);
        let traj = solve_continuous(&sys, &[y0], &sig, &grid).unwrap();
        for (t, y) in traj.times.iter().zip(traj.states.iter()) {
            let expected = (-t).exp() * y0 + (1.0 - (-t).exp()) * v;
            assert!((y[0] - expected).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn pure_fast_unique_solution() {
        let sys = build_system(
            Matrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]]),
            Matrix::identity(2),
            Matrix::identity(2),
            &Tolerance::default(),
        )
        .unwrap();
        let sig = InputSignal::polynomial(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let grid = uniform_grid(0.0, 0.25, 8);
        let traj = solve_continuous(&sys, &[-1.0, 0.0], &sig, &grid).unwrap();
        for (t, y) in traj.times.iter().zip(traj.states.iter()) {
            assert!((y[0] - (-t - 1.0)).abs() < 1e-10);
            assert!((y[1] - (-t)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_input_zero_state_stays_zero() {
        let sys = mixed_2x2();
        let grid = uniform_grid(0.0, 0.2, 10);
        let traj = solve_continuous(&sys, &[0.0, 0.0], &InputSignal::zero(2), &grid).unwrap();
        for y in &traj.states {
            assert!(y.iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn inconsistent_initial_condition_rejected() {
        let sys = mixed_2x2();
        let sig = InputSignal::constant(vec![0.0, 1.0]);
        let grid = uniform_grid(0.0, 0.1, 5);
        let err = solve_continuous(&sys, &[3.0, 0.0], &sig, &grid).unwrap_err();
        assert!(matches!(err, Error::InconsistentInitialCondition { .. }));
    }

    #[test]
    fn initial_state_reproduced_at_t0() {
        let sys = mixed_2x2();
        let sig = InputSignal::constant(vec![0.0, 1.0]);
        let grid = uniform_grid(0.0, 0.1, 3);
        let traj = solve_continuous(&sys, &[3.0, -1.0], &sig, &grid).unwrap();
        assert!((traj.states[0][0] - 3.0).abs() < 1e-10);
        assert!((traj.states[0][1] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn fundamental_matrix_basics() {
        let sys = mixed_2x2();
        let dec = sys.decomposition();
        let id = fundamental_matrix(dec, 0.7, 0.7).unwrap();
        assert!((&id - &Matrix::identity(2)).max_abs() < 1e-12);
        // Block formula: diag(exp(-(t-t0)), 1).
        let f = fundamental_matrix(dec, 1.2, 0.2).unwrap();
        assert!((f[(0, 0)] - (-1.0f64).exp()).abs() < 1e-11);
        assert!((f[(1, 1)] - 1.0).abs() < 1e-11);
        assert!(f[(0, 1)].abs() < 1e-12 && f[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn semigroup_property_of_transition() {
        let sys = build_system(
            Matrix::identity(2),
            Matrix::from_rows(vec![vec![0.0, 1.0], vec![-2.0, -0.5]]),
            Matrix::identity(2),
            &Tolerance::default(),
        )
        .unwrap();
        let dec = sys.decomposition();
        let f_ts = fundamental_matrix(dec, 1.9, 0.8).unwrap();
        let f_st0 = fundamental_matrix(dec, 0.8, 0.1).unwrap();
        let f_tt0 = fundamental_matrix(dec, 1.9, 0.1).unwrap();
        assert!((&(&f_ts * &f_st0) - &f_tt0).max_abs() < 1e-11);
    }

    #[test]
    fn two_routes_agree_on_mixed_system() {
        let sys = mixed_2x2();
        let sig = InputSignal::Sinusoid {
            dim: 2,
            terms: vec![crate::signal::SinTerm {
                coeff: vec![1.0, 0.5],
                omega: 2.0,
                phase: 0.3,
            }],
        };
        let rep = consistency_check(&sys, &[1.0, 1.0], &sig, 0.0).unwrap();
        let y0 = rep.projected_y0.clone();
        let grid = uniform_grid(0.0, 0.05, 40);
        let a = solve_continuous(&sys, &y0, &sig, &grid).unwrap();
        let b = solve_via_fundamental(&sys, &y0, &sig, &grid).unwrap();
        for (ya, yb) in a.states.iter().zip(b.states.iter()) {
            for (x, y) in ya.iter().zip(yb.iter()) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn residual_check_flags_corruption() {
        let sys = scalar_decay();
        let sig = InputSignal::constant(vec![1.0]);
        let grid = uniform_grid(0.0, 0.01, 100);
        let mut traj = solve_continuous(&sys, &[2.0], &sig, &grid).unwrap();
        let clean = residual_check(&sys, &traj, &sig).unwrap();
        assert!(clean < 1e-3);
        traj.states[50][0] += 0.5;
        let corrupted = residual_check(&sys, &traj, &sig).unwrap();
        assert!(corrupted > 1.0);
    }

    #[test]
    fn residual_shrinks_second_order() {
        let sys = scalar_decay();
        let sig = InputSignal::constant(vec![1.0]);
        let r1 = {
            let grid = uniform_grid(0.0, 0.02, 50);
            let traj = solve_continuous(&sys, &[2.0], &sig, &grid).unwrap();
            residual_check(&sys, &traj, &sig).unwrap()
        };
        let r2 = {
            let grid = uniform_grid(0.0, 0.01, 100);
            let traj = solve_continuous(&sys, &[2.0], &sig, &grid).unwrap();
            residual_check(&sys, &traj, &sig).unwrap()
        };
        assert!(r1 / r2 > 3.5, "ratio {}", r1 / r2);
    }

    #[test]
    fn grid_too_coarse_for_residual() {
        let sys = scalar_decay();
        let sig = InputSignal::zero(1);
        let traj = solve_continuous(&sys, &[0.0], &sig, &[0.0, 1.0]).unwrap();
        assert_eq!(residual_check(&sys, &traj, &sig), Err(Error::GridTooCoarse));
    }
}
