//! Univariate polynomials over a generic scalar, plus root finding.
//!
//! Float polynomials get all complex roots simultaneously via the
//! Aberth-Ehrlich iteration with cluster merging for multiple roots. Exact
//! rational polynomials are split over the Gaussian rationals by square-free
//! factorization (Yun), float root hints, continued-fraction reconstruction,
//! and exact verification.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::Tolerance;
use crate::scalar::{RealScalar, Scalar};

/// Polynomial with coefficients stored low degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn is_zero_poly(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Degree after discarding high coefficients negligible against the
    /// largest one. Returns `None` for the zero polynomial.
    pub fn degree(&self, tol: &Tolerance) -> Option<usize> {
        let scale = self.coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max);
        let threshold = if T::EXACT { 0.0 } else { tol.rank_tol * scale };
        self.coeffs
            .iter()
            .rposition(|c| !c.is_negligible(threshold))
    }

    /// Copy with negligible high coefficients stripped.
    pub fn trimmed(&self, tol: &Tolerance) -> Poly<T> {
        match self.degree(tol) {
            None => Poly::zero(),
            Some(d) => Poly::new(self.coeffs[..=d].to_vec()),
        }
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Poly<T> {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| T::from_ratio(k as i64, 1) * c.clone())
            .collect();
        Poly::new(coeffs)
    }

    pub fn mul(&self, other: &Poly<T>) -> Poly<T> {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

/// Newton interpolation through `(xs[i], ys[i])`. Exact for exact scalars;
/// the nodes must be pairwise distinct.
pub fn interpolate<T: Scalar>(xs: &[T], ys: &[T]) -> Poly<T> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n > 0, "interpolation needs at least one node");
    // Divided differences.
    let mut dd: Vec<T> = ys.to_vec();
    let mut newton: Vec<T> = vec![dd[0].clone()];
    for level in 1..n {
        for i in 0..n - level {
            let num = dd[i + 1].clone() - dd[i].clone();
            let den = xs[i + level].clone() - xs[i].clone();
            dd[i] = num / den;
        }
        newton.push(dd[0].clone());
    }
    // Expand the Newton form into monomial coefficients.
    let mut poly = Poly::new(vec![newton[n - 1].clone()]);
    for k in (0..n - 1).rev() {
        let factor = Poly::new(vec![-xs[k].clone(), T::one()]);
        poly = poly.mul(&factor);
        poly.coeffs[0] = poly.coeffs[0].clone() + newton[k].clone();
    }
    poly
}

/// Real scalar whose polynomials can be split over the complexification.
/// This is the spectral entry point used by pencil analysis.
pub trait PencilScalar: RealScalar {
    /// All roots of `poly` with multiplicities, sorted by (re, im). The input
    /// is assumed trimmed (nonzero leading coefficient, degree >= 0).
    fn poly_roots(poly: &Poly<Self>, tol: &Tolerance) -> Result<Vec<(Self::Cx, usize)>>;
}

impl PencilScalar for f64 {
    fn poly_roots(poly: &Poly<f64>, tol: &Tolerance) -> Result<Vec<(Complex64, usize)>> {
        Ok(float_roots(&poly.coeffs, tol.cluster_tol))
    }
}

impl PencilScalar for BigRational {
    fn poly_roots(
        poly: &Poly<BigRational>,
        _tol: &Tolerance,
    ) -> Result<Vec<(num_complex::Complex<BigRational>, usize)>> {
        exact_roots(poly)
    }
}

// ---------------------------------------------------------------------------
// Float path: Aberth-Ehrlich with cluster merging.
// ---------------------------------------------------------------------------

fn horner_c(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// All roots of a real polynomial, clustered into multiple roots with radius
/// `cluster_tol * max(1, |root|)` and sorted by (re, im).
pub fn float_roots(coeffs: &[f64], cluster_tol: f64) -> Vec<(Complex64, usize)> {
    let deg = match coeffs.iter().rposition(|c| *c != 0.0) {
        None | Some(0) => return vec![],
        Some(d) => d,
    };
    let lead = coeffs[deg];
    let monic: Vec<Complex64> = coeffs[..=deg]
        .iter()
        .map(|c| Complex64::new(c / lead, 0.0))
        .collect();

    let mut roots = aberth(&monic);
    conjugate_symmetrize(&mut roots);
    let mut clusters = cluster_roots(&roots, cluster_tol);
    for (center, mult) in clusters.iter_mut() {
        if *mult > 1 {
            *center = polish_multiple_root(&monic, *center, *mult);
        }
    }
    // Pair up conjugate clusters so downstream real extraction cancels cleanly.
    pair_conjugate_clusters(&mut clusters, cluster_tol);
    clusters.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    clusters
}

fn aberth(monic: &[Complex64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let deriv: Vec<Complex64> = monic
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64 + 0.7;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    for _ in 0..600 {
        let mut moved = 0.0f64;
        for j in 0..n {
            let p = horner_c(monic, z[j]);
            let dp = horner_c(&deriv, z[j]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 { p / dp } else { p };
            let mut repulse = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if k != j {
                    let d = z[j] - z[k];
                    if d.norm() > 1e-300 {
                        repulse += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulse;
            let step = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            z[j] -= step;
            moved = moved.max(step.norm() / (1.0 + z[j].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn conjugate_symmetrize(roots: &mut [Complex64]) {
    // Real-coefficient input: roots come in conjugate pairs up to noise.
    // Greedily match each root with the nearest conjugate partner and average.
    let n = roots.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        if roots[i].im.abs() <= 1e-10 * (1.0 + roots[i].re.abs()) {
            roots[i].im = 0.0;
            continue;
        }
        let target = roots[i].conj();
        let mut best: Option<(usize, f64)> = None;
        for j in i + 1..n {
            if used[j] {
                continue;
            }
            let d = (roots[j] - target).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            if d <= 1e-6 * (1.0 + target.norm()) {
                used[j] = true;
                let avg = (roots[i] + roots[j].conj()) * 0.5;
                roots[i] = avg;
                roots[j] = avg.conj();
            }
        }
    }
}

fn cluster_roots(roots: &[Complex64], cluster_tol: f64) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut assigned = vec![usize::MAX; n];
    let mut next_cluster = 0usize;
    // Transitive closure of pairwise proximity.
    for i in 0..n {
        if assigned[i] == usize::MAX {
            assigned[i] = next_cluster;
            next_cluster += 1;
        }
        for j in i + 1..n {
            let radius = cluster_tol * (1.0 + roots[i].norm().max(roots[j].norm()));
            if (roots[i] - roots[j]).norm() <= radius {
                if assigned[j] == usize::MAX {
                    assigned[j] = assigned[i];
                } else if assigned[j] != assigned[i] {
                    let (from, to) = (assigned[j], assigned[i]);
                    for a in assigned.iter_mut() {
                        if *a == from {
                            *a = to;
                        }
                    }
                }
            }
        }
    }
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..n {
        let c = assigned[i];
        if seen.contains(&c) {
            continue;
        }
        seen.push(c);
        let members: Vec<Complex64> = (0..n)
            .filter(|&j| assigned[j] == c)
            .map(|j| roots[j])
            .collect();
        let mean = members.iter().sum::<Complex64>() / members.len() as f64;
        clusters.push((mean, members.len()));
    }
    clusters
}

/// Newton-polish a k-fold root on the (k-1)-th derivative, where it is simple.
fn polish_multiple_root(monic: &[Complex64], start: Complex64, mult: usize) -> Complex64 {
    let mut p = monic.to_vec();
    for _ in 0..mult - 1 {
        p = p
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
    }
    let dp: Vec<Complex64> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();
    let mut z = start;
    for _ in 0..8 {
        let f = horner_c(&p, z);
        let df = horner_c(&dp, z);
        if df.norm() < 1e-300 {
            break;
        }
        let step = f / df;
        if step.norm() > 1.0 {
            break;
        }
        z -= step;
    }
    if (z - start).norm() <= 1e-3 * (1.0 + start.norm()) {
        z
    } else {
        start
    }
}

fn pair_conjugate_clusters(clusters: &mut [(Complex64, usize)], cluster_tol: f64) {
    let n = clusters.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        if clusters[i].0.im.abs() <= cluster_tol * (1.0 + clusters[i].0.re.abs()) {
            clusters[i].0.im = 0.0;
            continue;
        }
        let target = clusters[i].0.conj();
        for j in i + 1..n {
            if !used[j]
                && clusters[j].1 == clusters[i].1
                && (clusters[j].0 - target).norm() <= cluster_tol * (1.0 + target.norm())
            {
                used[j] = true;
                let avg = (clusters[i].0 + clusters[j].0.conj()) * 0.5;
                clusters[i].0 = avg;
                clusters[j].0 = avg.conj();
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Exact path: square-free factorization over Q, roots in Q(i).
// ---------------------------------------------------------------------------

type QPoly = Poly<BigRational>;
type CxQ = num_complex::Complex<BigRational>;

fn qtrim(p: &QPoly) -> QPoly {
    match p.coeffs.iter().rposition(|c| !c.is_zero()) {
        None => Poly::zero(),
        Some(d) => Poly::new(p.coeffs[..=d].to_vec()),
    }
}

fn qdeg(p: &QPoly) -> Option<usize> {
    p.coeffs.iter().rposition(|c| !c.is_zero())
}

fn qmonic(p: &QPoly) -> QPoly {
    let p = qtrim(p);
    match qdeg(&p) {
        None => p,
        Some(d) => {
            let lead = p.coeffs[d].clone();
            Poly::new(p.coeffs.iter().map(|c| c / lead.clone()).collect())
        }
    }
}

/// Exact division with remainder: returns (quotient, remainder).
fn qdivmod(num: &QPoly, den: &QPoly) -> (QPoly, QPoly) {
    let dd = qdeg(den).expect("division by zero polynomial");
    let mut rem = qtrim(num);
    let mut quot = vec![BigRational::zero(); rem.coeffs.len().saturating_sub(dd)];
    while let Some(rd) = qdeg(&rem) {
        if rd < dd {
            break;
        }
        let factor = rem.coeffs[rd].clone() / den.coeffs[dd].clone();
        quot[rd - dd] = factor.clone();
        for i in 0..=dd {
            let delta = factor.clone() * den.coeffs[i].clone();
            rem.coeffs[rd - dd + i] = rem.coeffs[rd - dd + i].clone() - delta;
        }
        rem = qtrim(&rem);
    }
    (qtrim(&Poly::new(quot)), rem)
}

fn qgcd(a: &QPoly, b: &QPoly) -> QPoly {
    let mut f = qmonic(a);
    let mut g = qmonic(b);
    while !g.is_zero_poly() {
        let (_, r) = qdivmod(&f, &g);
        f = g;
        g = qmonic(&r);
    }
    qmonic(&f)
}

/// Yun's square-free decomposition: returns pairs (factor, multiplicity) with
/// the factors monic, square-free, and pairwise coprime.
pub fn square_free_decomposition(p: &QPoly) -> Vec<(QPoly, usize)> {
    let f = qmonic(p);
    let d = match qdeg(&f) {
        None | Some(0) => return vec![],
        Some(d) => d,
    };
    let fp = f.derivative();
    let g = qgcd(&f, &fp);
    if qdeg(&g) == Some(0) || qdeg(&g).is_none() {
        return vec![(f, 1)];
    }
    let mut out = Vec::new();
    let (mut w, _) = qdivmod(&f, &g);
    let (mut y, _) = qdivmod(&fp, &g);
    let mut z = {
        let wp = w.derivative();
        qtrim(&Poly::new(sub_coeffs(&y.coeffs, &wp.coeffs)))
    };
    let mut i = 1usize;
    while qdeg(&w).map_or(false, |d| d > 0) {
        let a = qgcd(&w, &z);
        if qdeg(&a).map_or(false, |d| d > 0) {
            out.push((a.clone(), i));
        }
        let (w2, _) = qdivmod(&w, &a);
        let (y2, _) = qdivmod(&z, &a);
        w = w2;
        y = y2;
        let wp = w.derivative();
        z = qtrim(&Poly::new(sub_coeffs(&y.coeffs, &wp.coeffs)));
        i += 1;
        if i > d + 1 {
            break; // defensive bound; cannot trigger for valid input
        }
    }
    out
}

fn sub_coeffs(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            x - y
        })
        .collect()
}

/// Exact roots over Q(i) with multiplicities, sorted by (re, im).
/// Fails with [`Error::NonRationalEigenvalue`] when the polynomial does not
/// split over the Gaussian rationals.
pub fn exact_roots(p: &QPoly) -> Result<Vec<(CxQ, usize)>> {
    let mut out: Vec<(CxQ, usize)> = Vec::new();
    for (factor, mult) in square_free_decomposition(p) {
        for root in roots_of_squarefree(&factor)? {
            out.push((root, mult));
        }
    }
    out.sort_by(|a, b| (a.0.re.clone(), a.0.im.clone()).cmp(&(b.0.re.clone(), b.0.im.clone())));
    Ok(out)
}

fn roots_of_squarefree(factor: &QPoly) -> Result<Vec<CxQ>> {
    let mut rem = qmonic(factor);
    let mut roots = Vec::new();
    // Float hints drive the exact reconstruction; each hint is verified
    // exactly before it is accepted.
    let float_coeffs: Vec<f64> = rem
        .coeffs
        .iter()
        .map(|c| c.to_f64().ok_or(Error::NonRationalEigenvalue))
        .collect::<Result<_>>()?;
    let hints = float_roots(&float_coeffs, 1e-12);

    let mut pending: Vec<Complex64> = hints.iter().map(|(z, _)| *z).collect();
    while let Some(z) = pending.pop() {
        if qdeg(&rem).map_or(true, |d| d == 0) {
            break;
        }
        if z.im.abs() <= 1e-9 * (1.0 + z.re.abs()) {
            // Candidate rational root.
            let mut accepted = false;
            for candidate in rational_candidates(z.re) {
                if rem.eval(&candidate).is_zero() {
                    let lin = Poly::new(vec![-candidate.clone(), BigRational::one()]);
                    let (q, r) = qdivmod(&rem, &lin);
                    debug_assert!(r.is_zero_poly());
                    rem = q;
                    roots.push(CxQ::new(candidate, BigRational::zero()));
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                return Err(Error::NonRationalEigenvalue);
            }
        } else {
            // Candidate conjugate pair a +- bi: reconstruct the real quadratic
            // s^2 - 2a s + (a^2 + b^2) and verify exact divisibility.
            pending.retain(|w| (*w - z.conj()).norm() > 1e-6 * (1.0 + z.norm()));
            let mut accepted = false;
            'outer: for u in rational_candidates(-2.0 * z.re) {
                for v in rational_candidates(z.norm_sqr()) {
                    let quad = Poly::new(vec![v.clone(), u.clone(), BigRational::one()]);
                    let (q, r) = qdivmod(&rem, &quad);
                    if r.is_zero_poly() {
                        let a = -u.clone() / BigRational::from_ratio(2, 1);
                        let b2 = v.clone() - a.clone() * a.clone();
                        let b = match sqrt_rational(&b2) {
                            Some(b) => b,
                            None => return Err(Error::NonRationalEigenvalue),
                        };
                        rem = q;
                        roots.push(CxQ::new(a.clone(), b.clone()));
                        roots.push(CxQ::new(a, -b));
                        accepted = true;
                        break 'outer;
                    }
                }
            }
            if !accepted {
                return Err(Error::NonRationalEigenvalue);
            }
        }
    }
    if qdeg(&rem).map_or(false, |d| d > 0) {
        return Err(Error::NonRationalEigenvalue);
    }
    Ok(roots)
}

/// Continued-fraction convergents of `x` with denominators up to 10^7,
/// candidates for an exactly-verified rational value.
fn rational_candidates(x: f64) -> Vec<BigRational> {
    if !x.is_finite() {
        return vec![];
    }
    let mut out = Vec::new();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(x.floor() as i64), BigInt::one());
    out.push(BigRational::new(p1.clone(), q1.clone()));
    let mut frac = x - x.floor();
    for _ in 0..40 {
        if frac.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        frac = inv - a;
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > BigInt::from(10_000_000i64) {
            break;
        }
        out.push(BigRational::new(p2.clone(), q2.clone()));
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    // Closest candidates first: the last convergent is the most accurate.
    out.reverse();
    out.retain(|r| {
        r.to_f64()
            .map_or(false, |v| (v - x).abs() <= 1e-6 * (1.0 + x.abs()))
    });
    out
}

/// Exact square root of a nonnegative rational, when it is itself rational.
fn sqrt_rational(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(BigRational::zero());
    }
    let num = r.numer().magnitude().clone();
    let den = r.denom().magnitude().clone();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &sn * &sn == num && &sd * &sd == den {
        Some(BigRational::new(
            BigInt::from_biguint(num_bigint::Sign::Plus, sn),
            BigInt::from_biguint(num_bigint::Sign::Plus, sd),
        ))
    } else {
        None
    }
}

#[allow(dead_code)]
fn biguint_is_square(n: &BigUint) -> bool {
    let s = n.sqrt();
    &s * &s == *n
}
