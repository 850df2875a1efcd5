//! Weierstrass canonical form of a regular pencil: invertible P, Q with
//! `P F Q = I_p (+) H_q` and `P G Q = J_p (+) I_q`, where J_p collects the
//! finite eigenvalues in Jordan form and H_q is nilpotent.
//!
//! The construction avoids a QZ iteration: with a shift c such that
//! `cF - G` is invertible, the matrix `T = (cF - G)^{-1} F` has the same
//! invariant structure as the pencil (eigenvalue mu = 1/(c - lambda) for each
//! finite lambda, mu = 0 for the infinite part). Jordan chains `u_1..u_L` of
//! T map to pencil chains via
//!
//!   finite:   v_j = (mu T)^(j-1) u_j,
//!   infinite: v_j = (c T - I)^(j-1) u_j,
//!
//! which satisfy `(G - lambda F) v_j = F v_{j-1}` resp. `F v_j = G v_{j-1}`.
//! Stacking the chains as columns of Q and taking P = [F Q_p | G Q_q]^{-1}
//! lands exactly on the canonical block form.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::jordan::{block_sizes, jordan_chains};
use crate::matrix::{Matrix, Tolerance};
use crate::pencil::{spectral_structure, Pencil, SpectralStructure};
use crate::poly::PencilScalar;
use crate::scalar::{RealScalar, Scalar};

#[derive(Debug, Clone)]
pub struct WeierstrassDecomposition<T: RealScalar> {
    pub p: usize,
    pub q: usize,
    /// Nilpotency index of `hq`; 0 by convention when q = 0.
    pub q_star: usize,
    /// Left transform, m x m.
    pub pmat: Matrix<T::Cx>,
    /// Right transform, m x m; columns are generalized eigenvectors.
    pub qmat: Matrix<T::Cx>,
    /// Jordan block of the finite eigenvalues, p x p.
    pub jp: Matrix<T::Cx>,
    /// Nilpotent block of the infinite eigenvalues, q x q.
    pub hq: Matrix<T::Cx>,
    /// First p columns of Q (finite-eigenvalue chains).
    pub qp: Matrix<T::Cx>,
    /// Last q columns of Q (infinite-eigenvalue chains).
    pub qq: Matrix<T::Cx>,
    /// (eigenvalue, block size) per finite Jordan block, in block order.
    pub finite_blocks: Vec<(T::Cx, usize)>,
    /// Sizes of the nilpotent blocks, in block order (descending).
    pub infinite_blocks: Vec<usize>,
}

impl<T: RealScalar> WeierstrassDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// `I_p (+) H_q`, the canonical image of F.
    pub fn fw(&self) -> Matrix<T::Cx> {
        Matrix::block_diag(&[&Matrix::identity(self.p), &self.hq])
    }

    /// `J_p (+) I_q`, the canonical image of G.
    pub fn gw(&self) -> Matrix<T::Cx> {
        Matrix::block_diag(&[&self.jp, &Matrix::identity(self.q)])
    }
}

/// Pick a shift with `det(cF - G) != 0`. Candidates are small integers; in
/// float mode the shift must also stay at distance >= 1/2 from every finite
/// eigenvalue so that 1/(c - lambda) stays well scaled.
fn choose_shift<T: PencilScalar>(
    pencil: &Pencil<T>,
    spectral: &SpectralStructure<T>,
    tol: &Tolerance,
) -> Result<T> {
    let p = spectral.finite.len();
    let mut candidates: Vec<i64> = vec![0];
    for k in 1..=(p as i64 + 1) {
        candidates.push(k);
        candidates.push(-k);
    }
    for c in candidates {
        let shift = T::from_ratio(c, 1);
        let ok_distance = spectral.finite.iter().all(|(lambda, _)| {
            let diff = shift.complexify() - lambda.clone();
            if T::EXACT {
                !diff.is_zero()
            } else {
                diff.magnitude() >= 0.5
            }
        });
        if !ok_distance {
            continue;
        }
        let det = pencil.eval(&shift).det(tol).expect("square pencil");
        if !det.is_negligible(if T::EXACT {
            0.0
        } else {
            tol.rank_tol * pencil.f().max_abs().max(pencil.g().max_abs()).max(1.0)
        }) {
            return Ok(shift);
        }
    }
    // A regular pencil admits a shift among the candidates above.
    Err(Error::SingularPencil)
}

/// Weierstrass decomposition of a regular pencil.
pub fn weierstrass_decompose<T: PencilScalar>(
    pencil: &Pencil<T>,
    tol: &Tolerance,
) -> Result<WeierstrassDecomposition<T>> {
    let spectral = spectral_structure(pencil, tol)?;
    let m = pencil.dim();
    let (p, q) = (spectral.p, spectral.q);

    let shift = choose_shift(pencil, &spectral, tol)?;
    let w = pencil.eval(&shift); // cF - G
    let t_real = w.solve(pencil.f(), tol).map_err(|_| Error::SingularPencil)?;
    let t = t_real.complexify();
    let shift_cx = shift.complexify();

    // Spectrum of T: mu = 1/(c - lambda) per finite eigenvalue, 0 for the
    // infinite part. Finite eigenvalues keep their (re, im) sort order.
    let one = T::Cx::one();
    let mut eigs: Vec<(T::Cx, usize)> = spectral
        .finite
        .iter()
        .map(|(lambda, mult)| (one.clone() / (shift_cx.clone() - lambda.clone()), *mult))
        .collect();
    if q > 0 {
        eigs.push((T::Cx::zero(), q));
    }

    let chains = jordan_chains(&t, &eigs, tol)?;

    // Transform T-chains into pencil chains and assemble Q block-wise.
    let mut q_columns: Vec<Matrix<T::Cx>> = Vec::with_capacity(m);
    let mut finite_blocks: Vec<(T::Cx, usize)> = Vec::new();
    let mut infinite_blocks: Vec<usize> = Vec::new();
    let mut jp = Matrix::<T::Cx>::zeros(p, p);
    let mut hq = Matrix::<T::Cx>::zeros(q, q);
    let mut fin_offset = 0usize;
    let mut inf_offset = 0usize;

    for chain in &chains {
        let mu = &chain.eigenvalue;
        let len = chain.size();
        let is_infinite = mu.is_zero();
        let transform = if is_infinite {
            // cT - I
            let mut a = t.scale(&shift_cx);
            for i in 0..m {
                a[(i, i)] = a[(i, i)].clone() - one.clone();
            }
            a
        } else {
            t.scale(mu)
        };
        let mut power = Matrix::<T::Cx>::identity(m);
        for (j, u) in chain.vectors.iter().enumerate() {
            if j > 0 {
                power = &power * &transform;
            }
            q_columns.push(&power * u);
        }
        if is_infinite {
            write_nilpotent_block(&mut hq, inf_offset, len);
            infinite_blocks.push(len);
            inf_offset += len;
        } else {
            let lambda = shift_cx.clone() - one.clone() / mu.clone();
            write_jordan_block(&mut jp, fin_offset, len, &lambda);
            finite_blocks.push((lambda, len));
            fin_offset += len;
        }
    }
    debug_assert_eq!(fin_offset, p);
    debug_assert_eq!(inf_offset, q);

    debug_assert_eq!(q_columns.len(), m);
    let qmat = Matrix::from_columns(&q_columns);
    let qp = qmat.sub_block(0, 0, m, p);
    let qq = qmat.sub_block(0, p, m, q);

    // P = [F Qp | G Qq]^{-1}.
    let f_cx = pencil.f().complexify();
    let g_cx = pencil.g().complexify();
    let x = (&f_cx * &qp).hstack(&(&g_cx * &qq));
    let pmat = x.inverse(tol).map_err(|_| Error::IllConditioned {
        residual: f64::INFINITY,
        tol: tol.residual_tol,
    })?;

    let q_star = infinite_blocks.iter().copied().max().unwrap_or(0);
    let dec = WeierstrassDecomposition {
        p,
        q,
        q_star,
        pmat,
        qmat,
        jp,
        hq,
        qp,
        qq,
        finite_blocks,
        infinite_blocks,
    };

    let (res_f, res_g) = verify_decomposition(&dec, pencil)?;
    let scale = pencil.f().max_abs().max(pencil.g().max_abs()).max(1.0);
    let gate = tol.residual_tol * scale;
    if !T::EXACT && (res_f > gate || res_g > gate) {
        return Err(Error::IllConditioned {
            residual: res_f.max(res_g),
            tol: gate,
        });
    }
    if T::EXACT && (res_f > 0.0 || res_g > 0.0) {
        return Err(Error::StructureAmbiguous {
            context: "exact decomposition failed to verify".to_string(),
        });
    }
    Ok(dec)
}

fn write_jordan_block<S: Scalar>(target: &mut Matrix<S>, offset: usize, size: usize, lambda: &S) {
    for i in 0..size {
        target[(offset + i, offset + i)] = lambda.clone();
        if i + 1 < size {
            target[(offset + i, offset + i + 1)] = S::one();
        }
    }
}

fn write_nilpotent_block<S: Scalar>(target: &mut Matrix<S>, offset: usize, size: usize) {
    for i in 0..size.saturating_sub(1) {
        target[(offset + i, offset + i + 1)] = S::one();
    }
}

/// Residuals `max|P F Q - (I_p (+) H_q)|` and `max|P G Q - (J_p (+) I_q)|`.
pub fn verify_decomposition<T: RealScalar>(
    dec: &WeierstrassDecomposition<T>,
    pencil: &Pencil<T>,
) -> Result<(f64, f64)> {
    let m = pencil.dim();
    if dec.dim() != m || dec.pmat.rows() != m || dec.qmat.rows() != m {
        return Err(Error::dim(format!(
            "decomposition is for dimension {}, pencil has dimension {m}",
            dec.dim()
        )));
    }
    let f_cx = pencil.f().complexify();
    let g_cx = pencil.g().complexify();
    let pfq = &(&dec.pmat * &f_cx) * &dec.qmat;
    let pgq = &(&dec.pmat * &g_cx) * &dec.qmat;
    let res_f = (&pfq - &dec.fw()).max_abs();
    let res_g = (&pgq - &dec.gw()).max_abs();
    Ok((res_f, res_g))
}

/// Finite and infinite elementary divisors of a regular pencil. Exact mode
/// only: float arithmetic cannot certify divisor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryDivisorList<T: RealScalar> {
    /// One entry (a_j, p_j) per finite Jordan block: the divisor (s - a_j)^{p_j}.
    pub finite: Vec<(T::Cx, usize)>,
    /// One entry q_j per nilpotent block: the infinite divisor of degree q_j.
    pub infinite: Vec<usize>,
}

impl<T: RealScalar> ElementaryDivisorList<T> {
    pub fn p(&self) -> usize {
        self.finite.iter().map(|(_, size)| size).sum()
    }

    pub fn q(&self) -> usize {
        self.infinite.iter().sum()
    }

    pub fn q_star(&self) -> usize {
        self.infinite.iter().copied().max().unwrap_or(0)
    }
}

/// Elementary divisors via per-eigenvalue kernel towers of the shifted
/// inverse; requires exact rational arithmetic.
pub fn elementary_divisors<T: PencilScalar>(
    pencil: &Pencil<T>,
    tol: &Tolerance,
) -> Result<ElementaryDivisorList<T>> {
    if !T::EXACT {
        return Err(Error::ExactModeRequired);
    }
    let spectral = spectral_structure(pencil, tol)?;
    let shift = choose_shift(pencil, &spectral, tol)?;
    let w = pencil.eval(&shift);
    let t = w
        .solve(pencil.f(), tol)
        .map_err(|_| Error::SingularPencil)?
        .complexify();
    let shift_cx = shift.complexify();
    let one = T::Cx::one();

    let mut finite = Vec::new();
    for (lambda, mult) in &spectral.finite {
        let mu = one.clone() / (shift_cx.clone() - lambda.clone());
        for size in block_sizes(&t, &mu, *mult, tol)? {
            finite.push((lambda.clone(), size));
        }
    }
    let infinite = if spectral.q > 0 {
        block_sizes(&t, &T::Cx::zero(), spectral.q, tol)?
    } else {
        vec![]
    };
    Ok(ElementaryDivisorList { finite, infinite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Zero;

    fn pencil64(f: Vec<Vec<f64>>, g: Vec<Vec<f64>>) -> Pencil<f64> {
        Pencil::new(Matrix::from_rows(f), Matrix::from_rows(g)).unwrap()
    }

    fn qm(rows: Vec<Vec<i64>>) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| Rational::from_ratio(x, 1)).collect())
                .collect(),
        )
    }

    #[test]
    fn ode_pencil_has_empty_fast_part() {
        let p = pencil64(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 1.0], vec![0.0, 2.0]],
        );
        let dec = weierstrass_decompose(&p, &Tolerance::default()).unwrap();
        assert_eq!((dec.p, dec.q, dec.q_star), (2, 0, 0));
        assert!(dec.hq.is_empty());
        // Jp carries the eigenvalues 1 and 2 on its diagonal.
        assert!((dec.jp[(0, 0)].re - 1.0).abs() < 1e-9);
        assert!((dec.jp[(1, 1)].re - 2.0).abs() < 1e-9);
    }

    #[test]
    fn canonical_mixed_pencil_decomposes_in_place() {
        let p = pencil64(
            vec![vec![1.0, 0.0], vec![0.0, 0.0]],
            vec![vec![-1.0, 0.0], vec![0.0, 1.0]],
        );
        let dec = weierstrass_decompose(&p, &Tolerance::default()).unwrap();
        assert_eq!((dec.p, dec.q, dec.q_star), (1, 1, 1));
        assert!((dec.jp[(0, 0)].re + 1.0).abs() < 1e-9);
        assert!(dec.hq[(0, 0)].norm() < 1e-12);
        let (rf, rg) = verify_decomposition(&dec, &p).unwrap();
        assert!(rf < 1e-10 && rg < 1e-10);
    }

    #[test]
    fn pure_fast_chain_structure() {
        let p = pencil64(
            vec![vec![0.0, 1.0], vec![0.0, 0.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        );
        let dec = weierstrass_decompose(&p, &Tolerance::default()).unwrap();
        assert_eq!((dec.p, dec.q, dec.q_star), (0, 2, 2));
        assert_eq!(dec.infinite_blocks, vec![2]);
        // Hq is the canonical 2x2 shift block.
        assert!(dec.hq[(0, 1)].re - 1.0 == 0.0);
        let (rf, rg) = verify_decomposition(&dec, &p).unwrap();
        assert!(rf < 1e-10 && rg < 1e-10);
    }

    #[test]
    fn roundtrip_reconstruction() {
        // Non-canonical mixed pencil: transformed version of diag-slow/fast.
        let m_left = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0]];
        let n_right = vec![vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let f0 = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]];
        let g0 = vec![vec![-2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let (ml, nr, f0, g0) = (
            Matrix::from_rows(m_left),
            Matrix::from_rows(n_right),
            Matrix::from_rows(f0),
            Matrix::from_rows(g0),
        );
        let f = &(&ml * &f0) * &nr;
        let g = &(&ml * &g0) * &nr;
        let pencil = Pencil::new(f.clone(), g.clone()).unwrap();
        let tol = Tolerance::default();
        let dec = weierstrass_decompose(&pencil, &tol).unwrap();
        assert_eq!((dec.p, dec.q, dec.q_star), (1, 2, 2));

        // Rebuild F and G from the canonical blocks.
        let p_inv = dec.pmat.inverse(&tol).unwrap();
        let q_inv = dec.qmat.inverse(&tol).unwrap();
        let f_rec = &(&p_inv * &dec.fw()) * &q_inv;
        let g_rec = &(&p_inv * &dec.gw()) * &q_inv;
        assert!((&f_rec - &f.complexify()).max_abs() < 1e-8);
        assert!((&g_rec - &g.complexify()).max_abs() < 1e-8);
    }

    #[test]
    fn complex_eigenvalues_come_in_conjugate_pairs() {
        // G = rotation: eigenvalues +-i.
        let p = pencil64(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![-1.0, 0.0]],
        );
        let dec = weierstrass_decompose(&p, &Tolerance::default()).unwrap();
        assert_eq!((dec.p, dec.q), (2, 0));
        let l0 = dec.finite_blocks[0].0;
        let l1 = dec.finite_blocks[1].0;
        assert!((l0.conj() - l1).norm() < 1e-10);
        assert!((l0.im.abs() - 1.0).abs() < 1e-10);
        let (rf, rg) = verify_decomposition(&dec, &p).unwrap();
        assert!(rf < 1e-9 && rg < 1e-9);
    }

    #[test]
    fn perturbed_transform_shows_residual() {
        let p = pencil64(
            vec![vec![1.0, 0.0], vec![0.0, 0.0]],
            vec![vec![-1.0, 0.0], vec![0.0, 1.0]],
        );
        let mut dec = weierstrass_decompose(&p, &Tolerance::default()).unwrap();
        dec.pmat[(0, 0)] = dec.pmat[(0, 0)] + num_complex::Complex64::new(1.0, 0.0);
        let (rf, _) = verify_decomposition(&dec, &p).unwrap();
        assert!(rf > 0.1);
    }

    #[test]
    fn exact_divisors_jordan_block() {
        // F = I2, G = J_2(1): one finite divisor (s-1)^2.
        let p = Pencil::new(qm(vec![vec![1, 0], vec![0, 1]]), qm(vec![vec![1, 1], vec![0, 1]]))
            .unwrap();
        let div = elementary_divisors(&p, &Tolerance::default()).unwrap();
        assert_eq!(div.finite.len(), 1);
        assert_eq!(div.finite[0].1, 2);
        assert!(div.finite[0].0.im.is_zero());
        assert_eq!(div.finite[0].0.re, Rational::from_ratio(1, 1));
        assert!(div.infinite.is_empty());
    }

    #[test]
    fn exact_divisors_fast_block_and_scalar_case() {
        let p = Pencil::new(qm(vec![vec![0, 1], vec![0, 0]]), qm(vec![vec![1, 0], vec![0, 1]]))
            .unwrap();
        let div = elementary_divisors(&p, &Tolerance::default()).unwrap();
        assert!(div.finite.is_empty());
        assert_eq!(div.infinite, vec![2]);
        assert_eq!(div.q_star(), 2);

        let p1 = Pencil::new(qm(vec![vec![0]]), qm(vec![vec![1]])).unwrap();
        let div1 = elementary_divisors(&p1, &Tolerance::default()).unwrap();
        assert!(div1.finite.is_empty());
        assert_eq!(div1.infinite, vec![1]);
    }

    #[test]
    fn float_mode_divisors_rejected() {
        let p = pencil64(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert_eq!(
            elementary_divisors(&p, &Tolerance::default()).unwrap_err(),
            Error::ExactModeRequired
        );
    }

    #[test]
    fn exact_decomposition_verifies_exactly() {
        let p = Pencil::new(
            qm(vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 0, 0]]),
            qm(vec![vec![-2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]),
        )
        .unwrap();
        let dec = weierstrass_decompose(&p, &Tolerance::default()).unwrap();
        let (rf, rg) = verify_decomposition(&dec, &p).unwrap();
        assert_eq!((rf, rg), (0.0, 0.0));
        assert_eq!((dec.p, dec.q, dec.q_star), (1, 2, 2));
    }
}
