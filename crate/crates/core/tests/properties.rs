//! Property-based invariants across the library, driven by proptest.

mod common;

use proptest::prelude::*;

use desys::discretize::fast_correction_coeffs;
use desys::expm::mat_exp;
use desys::fractional::{nabla_apply, nabla_coefficients, FractionalOrder};
use desys::matrix::{Matrix, Tolerance};
use desys::pencil::{classify_pencil, det_polynomial, spectral_structure, Pencil, PencilClass};
use desys::sequence::SampleSequence;
use desys::signal::InputSignal;
use desys::solve::{fundamental_matrix, solve_continuous, uniform_grid};
use desys::system::{build_system, consistency_check};
use desys::weierstrass::{elementary_divisors, weierstrass_decompose};
use desys::{Rational, Scalar};

use common::{corpus, nabla_direct_oracle, pencil_exact, pencil_f64, series_mat_exp};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn small_entry() -> impl Strategy<Value = f64> {
    (-100i32..=100).prop_map(|x| x as f64 / 50.0)
}

fn matrix_3x3() -> impl Strategy<Value = Matrix<f64>> {
    proptest::collection::vec(small_entry(), 9)
        .prop_map(|v| Matrix::from_fn(3, 3, |i, j| v[3 * i + j]))
}

/// Random invertible integer matrix: unit lower triangle times unit upper
/// triangle, optionally negated rows. Determinant is +-1 by construction.
fn unimodular_2x2() -> impl Strategy<Value = Vec<Vec<i64>>> {
    ((-3i64..=3), (-3i64..=3), proptest::bool::ANY).prop_map(|(a, b, flip)| {
        // L = [[1,0],[a,1]], U = [[1,b],[0,1]] -> L U = [[1,b],[a,ab+1]]
        let mut m = vec![vec![1, b], vec![a, a * b + 1]];
        if flip {
            m[0] = m[0].iter().map(|x| -x).collect();
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mat_exp_semigroup(a in matrix_3x3(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let es = mat_exp(&a, s).unwrap();
        let et = mat_exp(&a, t).unwrap();
        let est = mat_exp(&a, s + t).unwrap();
        let gap = (&(&es * &et) - &est).max_abs();
        prop_assert!(gap < 1e-10, "semigroup gap {gap}");
    }

    #[test]
    fn mat_exp_matches_series_oracle(a in matrix_3x3(), t in -1.5f64..1.5) {
        // Stay inside ||A t|| <= 5 where the plain series is trustworthy.
        let norm = a.one_norm() * t.abs();
        prop_assume!(norm <= 5.0);
        let fast = mat_exp(&a, t).unwrap();
        let slow = series_mat_exp(&a, t, 60);
        let rel = (&fast - &slow).max_abs() / slow.max_abs().max(1.0);
        prop_assert!(rel < 1e-9, "relative gap {rel}");
    }

    #[test]
    fn rank_plus_nullity_is_cols(
        entries in proptest::collection::vec(small_entry(), 12),
        transpose in proptest::bool::ANY,
    ) {
        let m = Matrix::from_fn(3, 4, |i, j| entries[4 * i + j]);
        let m = if transpose { m.transpose() } else { m };
        let (rank, basis) = m.rank_and_nullspace(&tol());
        prop_assert_eq!(rank + basis.cols(), m.cols());
        if basis.cols() > 0 {
            let image = &m * &basis;
            prop_assert!(image.max_abs() < 1e-8, "kernel image {}", image.max_abs());
        }
    }

    #[test]
    fn rank_deficient_products_detected(
        entries in proptest::collection::vec(small_entry(), 6),
    ) {
        // A = u v^T has rank <= 1.
        let u = Matrix::from_fn(3, 1, |i, _| entries[i]);
        let v = Matrix::from_fn(3, 1, |i, _| entries[3 + i]);
        let a = &u * &v.transpose();
        let (rank, basis) = a.rank_and_nullspace(&tol());
        prop_assert!(rank <= 1);
        prop_assert_eq!(rank + basis.cols(), 3);
    }

    #[test]
    fn classification_invariant_under_equivalence(
        m_rows in unimodular_2x2(),
        case_idx in 0usize..15,
    ) {
        let cases = corpus();
        prop_assume!(case_idx < cases.len());
        let case = &cases[case_idx];
        prop_assume!(case.f.len() == 2);
        let p = pencil_f64(case);
        let m = Matrix::from_rows(
            m_rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect(),
        );
        let equivalent = Pencil::new(&m * p.f(), &m * p.g()).unwrap();
        prop_assert_eq!(
            classify_pencil(&p, &tol()),
            classify_pencil(&equivalent, &tol())
        );
    }

    #[test]
    fn divisors_are_strict_equivalence_invariants(
        left in unimodular_2x2(),
        right in unimodular_2x2(),
        case_idx in 0usize..15,
    ) {
        let cases = corpus();
        prop_assume!(case_idx < cases.len());
        let case = &cases[case_idx];
        prop_assume!(case.regular && case.f.len() == 2);
        let p = pencil_exact(case);
        let to_exact = |rows: &Vec<Vec<i64>>| {
            Matrix::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&x| Rational::from_ratio(x, 1)).collect())
                    .collect(),
            )
        };
        let (l, r) = (to_exact(&left), to_exact(&right));
        let transformed = Pencil::new(&(&l * p.f()) * &r, &(&l * p.g()) * &r).unwrap();
        let d0 = elementary_divisors(&p, &tol()).unwrap();
        let d1 = elementary_divisors(&transformed, &tol()).unwrap();
        prop_assert_eq!(d0.finite, d1.finite);
        prop_assert_eq!(d0.infinite, d1.infinite);
    }

    #[test]
    fn fast_correction_weights_sum_to_zero(order in 0usize..10) {
        let sum: f64 = fast_correction_coeffs(order).iter().sum();
        prop_assert!(sum.abs() < 1e-10);
    }

    #[test]
    fn leading_nabla_weight_is_one(n_millis in 1u32..1999) {
        prop_assume!(n_millis != 1000);
        let n = n_millis as f64 / 1000.0;
        let order = FractionalOrder::new(n).unwrap();
        let c = nabla_coefficients(order, 8).c;
        prop_assert_eq!(c[0], 1.0);
    }

    #[test]
    fn nabla_apply_matches_direct_summation(
        values in proptest::collection::vec(small_entry(), 12),
        n_millis in 50u32..1950,
    ) {
        prop_assume!(n_millis != 1000);
        let n = n_millis as f64 / 1000.0;
        let order = FractionalOrder::new(n).unwrap();
        let seq = SampleSequence::from_zero(values.iter().map(|&v| vec![v]).collect());
        for k in 0..values.len() as i64 {
            let fast = nabla_apply(&seq, order, k).unwrap();
            let direct = nabla_direct_oracle(&seq, n, k);
            let scale = direct[0].abs().max(1.0);
            prop_assert!(
                (fast[0] - direct[0]).abs() / scale < 1e-10,
                "k={k}: {} vs {}", fast[0], direct[0]
            );
        }
    }
}

#[test]
fn regular_corpus_satisfies_dimension_counts() {
    for case in corpus().iter().filter(|c| c.regular) {
        let p = pencil_f64(case);
        let spec = spectral_structure(&p, &tol()).unwrap();
        assert_eq!(spec.p + spec.q, p.dim(), "{}", case.name);
        let det = det_polynomial(&p, &tol());
        assert_eq!(det.degree(&tol()), Some(spec.p).filter(|d| *d > 0).or(Some(0)), "{}", case.name);
    }
}

#[test]
fn decomposition_roundtrip_reconstruction() {
    for case in corpus().iter().filter(|c| c.regular) {
        let pencil = pencil_f64(case);
        let dec = weierstrass_decompose(&pencil, &tol()).unwrap();
        let p_inv = dec.pmat.inverse(&tol()).unwrap();
        let q_inv = dec.qmat.inverse(&tol()).unwrap();
        let f_rec = &(&p_inv * &dec.fw()) * &q_inv;
        let g_rec = &(&p_inv * &dec.gw()) * &q_inv;
        let gap_f = (&f_rec - &pencil.f().complexify()).max_abs();
        let gap_g = (&g_rec - &pencil.g().complexify()).max_abs();
        assert!(gap_f < 1e-8 && gap_g < 1e-8, "{}: {gap_f}, {gap_g}", case.name);
    }
}

#[test]
fn jp_spectrum_equals_finite_eigenvalues() {
    for case in corpus().iter().filter(|c| c.regular && c.p > 0) {
        let pencil = pencil_f64(case);
        let spec = spectral_structure(&pencil, &tol()).unwrap();
        let dec = weierstrass_decompose(&pencil, &tol()).unwrap();
        // Jp is upper bidiagonal: its diagonal is the spectrum with
        // multiplicity, in block order.
        let mut diag: Vec<(f64, f64)> = (0..dec.p).map(|i| (dec.jp[(i, i)].re, dec.jp[(i, i)].im)).collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expected: Vec<(f64, f64)> = spec
            .finite
            .iter()
            .flat_map(|(z, mult)| std::iter::repeat((z.re, z.im)).take(*mult))
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (d, e) in diag.iter().zip(expected.iter()) {
            assert!((d.0 - e.0).abs() < 1e-8 && (d.1 - e.1).abs() < 1e-8, "{}", case.name);
        }
    }
}

#[test]
fn transition_semigroup_on_random_times() {
    let pencil = pencil_f64(&corpus()[7]); // mixed_three
    let dec = weierstrass_decompose(&pencil, &tol()).unwrap();
    let times = [(0.0, 0.4, 1.1), (0.2, 0.9, 2.0), (-0.5, 0.1, 0.3)];
    for (t0, s, t) in times {
        let a = fundamental_matrix(&dec, t, s).unwrap();
        let b = fundamental_matrix(&dec, s, t0).unwrap();
        let c = fundamental_matrix(&dec, t, t0).unwrap();
        assert!((&(&a * &b) - &c).max_abs() < 1e-10);
    }
}

#[test]
fn superposition_of_solutions() {
    let sys = build_system(
        Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
        Matrix::from_rows(vec![vec![-1.0, 0.0], vec![0.0, 1.0]]),
        Matrix::identity(2),
        &tol(),
    )
    .unwrap();
    let va = InputSignal::polynomial(vec![vec![1.0, 0.5], vec![0.0, -1.0]]).unwrap();
    let vb = InputSignal::polynomial(vec![vec![-0.5, 1.0], vec![0.3, 0.2]]).unwrap();
    let vsum = InputSignal::polynomial(vec![vec![0.5, 1.5], vec![0.3, -0.8]]).unwrap();
    let grid = uniform_grid(0.0, 0.1, 15);
    let ya0 = consistency_check(&sys, &[1.0, 0.0], &va, 0.0).unwrap().projected_y0;
    let yb0 = consistency_check(&sys, &[0.5, 0.0], &vb, 0.0).unwrap().projected_y0;
    let ysum0: Vec<f64> = ya0.iter().zip(yb0.iter()).map(|(a, b)| a + b).collect();
    let ta = solve_continuous(&sys, &ya0, &va, &grid).unwrap();
    let tb = solve_continuous(&sys, &yb0, &vb, &grid).unwrap();
    let tsum = solve_continuous(&sys, &ysum0, &vsum, &grid).unwrap();
    for k in 0..grid.len() {
        for i in 0..2 {
            let expected = ta.states[k][i] + tb.states[k][i];
            assert!((tsum.states[k][i] - expected).abs() < 1e-10);
        }
    }
}

#[test]
fn projected_state_always_accepted() {
    for case in corpus().iter().filter(|c| c.regular) {
        let m = case.f.len();
        let pencil = pencil_f64(case);
        let sys = build_system(
            pencil.f().clone(),
            pencil.g().clone(),
            Matrix::identity(m),
            &tol(),
        )
        .unwrap();
        let signal = InputSignal::polynomial(vec![
            (0..m).map(|i| 0.5 + i as f64).collect(),
            (0..m).map(|i| -0.25 * i as f64).collect(),
        ])
        .unwrap();
        for seed_scale in [0.0, 1.0, -2.5] {
            let seed: Vec<f64> = (0..m).map(|i| seed_scale * (i as f64 + 1.0)).collect();
            let projected = consistency_check(&sys, &seed, &signal, 0.0)
                .unwrap()
                .projected_y0;
            let grid = uniform_grid(0.0, 0.1, 5);
            let result = solve_continuous(&sys, &projected, &signal, &grid);
            assert!(result.is_ok(), "{}: projection rejected", case.name);
        }
    }
}

#[test]
fn singular_pencils_rejected_consistently() {
    for case in corpus().iter().filter(|c| !c.regular) {
        let pencil = pencil_f64(case);
        assert_eq!(classify_pencil(&pencil, &tol()), PencilClass::Singular);
        assert!(spectral_structure(&pencil, &tol()).is_err());
        assert!(weierstrass_decompose(&pencil, &tol()).is_err());
        let exact = pencil_exact(case);
        assert!(elementary_divisors(&exact, &tol()).is_err());
    }
}
