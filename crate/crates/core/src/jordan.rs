//! Jordan chain computation through iterated null spaces of `(A - mu I)^k`.
//!
//! The kernel dimension sequence `d_k = dim ker (A - mu I)^k` determines the
//! block sizes (the number of blocks of size exactly k is
//! `2 d_k - d_{k-1} - d_{k+1}`); chains are then built top-down by selecting,
//! at each height, kernel vectors independent of the lower kernel and of the
//! continuations of longer chains.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Tolerance};
use crate::scalar::Scalar;

/// One Jordan chain: `vectors[0]` is the eigenvector, `vectors.last()` the
/// chain top, and `(A - mu I) vectors[j] = vectors[j-1]`.
#[derive(Debug, Clone)]
pub(crate) struct JordanChain<T> {
    pub eigenvalue: T,
    pub vectors: Vec<Matrix<T>>,
}

impl<T: Scalar> JordanChain<T> {
    pub fn size(&self) -> usize {
        self.vectors.len()
    }
}

/// Kernel dimensions of `B^k` for k = 1.. until the dimension reaches
/// `mult`, together with the kernels themselves.
fn kernel_tower<T: Scalar>(
    b: &Matrix<T>,
    mult: usize,
    tol: &Tolerance,
) -> Result<Vec<Matrix<T>>> {
    let mut kernels: Vec<Matrix<T>> = Vec::new();
    let mut power = b.clone();
    loop {
        let (_, basis) = power.rank_and_nullspace(tol);
        let dim = basis.cols();
        let prev = kernels.last().map_or(0, Matrix::cols);
        if dim <= prev || dim > mult {
            return Err(Error::StructureAmbiguous {
                context: format!(
                    "kernel dimensions stalled at {dim} before reaching multiplicity {mult}"
                ),
            });
        }
        kernels.push(basis);
        if dim == mult {
            return Ok(kernels);
        }
        if kernels.len() > mult {
            return Err(Error::StructureAmbiguous {
                context: "kernel tower exceeded algebraic multiplicity".to_string(),
            });
        }
        power = &power * b;
    }
}

/// Jordan block sizes (descending) for one eigenvalue of `a` with algebraic
/// multiplicity `mult`.
pub(crate) fn block_sizes<T: Scalar>(
    a: &Matrix<T>,
    eigenvalue: &T,
    mult: usize,
    tol: &Tolerance,
) -> Result<Vec<usize>> {
    let b = shifted(a, eigenvalue);
    let kernels = kernel_tower(&b, mult, tol)?;
    let dims: Vec<usize> = kernels.iter().map(Matrix::cols).collect();
    Ok(sizes_from_dims(&dims))
}

fn sizes_from_dims(dims: &[usize]) -> Vec<usize> {
    let s = dims.len();
    let d = |k: usize| -> isize {
        if k == 0 {
            0
        } else if k > s {
            dims[s - 1] as isize
        } else {
            dims[k - 1] as isize
        }
    };
    let mut sizes = Vec::new();
    for k in (1..=s).rev() {
        let count = (d(k) - d(k - 1)) - (d(k + 1) - d(k));
        for _ in 0..count {
            sizes.push(k);
        }
    }
    sizes
}

fn shifted<T: Scalar>(a: &Matrix<T>, eigenvalue: &T) -> Matrix<T> {
    let mut b = a.clone();
    for i in 0..a.rows() {
        b[(i, i)] = b[(i, i)].clone() - eigenvalue.clone();
    }
    b
}

/// Jordan chains of `a` for the given eigenvalues (with algebraic
/// multiplicities), processed in input order. Within one eigenvalue the
/// chains come out sorted by decreasing length.
pub(crate) fn jordan_chains<T: Scalar>(
    a: &Matrix<T>,
    eigenvalues: &[(T, usize)],
    tol: &Tolerance,
) -> Result<Vec<JordanChain<T>>> {
    let mut out = Vec::new();
    for (eigenvalue, mult) in eigenvalues {
        out.extend(chains_for_eigenvalue(a, eigenvalue, *mult, tol)?);
    }
    Ok(out)
}

fn chains_for_eigenvalue<T: Scalar>(
    a: &Matrix<T>,
    eigenvalue: &T,
    mult: usize,
    tol: &Tolerance,
) -> Result<Vec<JordanChain<T>>> {
    let b = shifted(a, eigenvalue);
    let kernels = kernel_tower(&b, mult, tol)?;
    let dims: Vec<usize> = kernels.iter().map(Matrix::cols).collect();
    let s = dims.len();
    let d = |k: usize| -> usize {
        if k == 0 {
            0
        } else {
            dims[(k - 1).min(s - 1)]
        }
    };

    // tops[i] = (top vector, chain length), longest chains first.
    let mut tops: Vec<(Matrix<T>, usize)> = Vec::new();
    for k in (1..=s).rev() {
        let longer = if k == s { 0 } else { d(k + 1) - d(k) };
        let needed = (d(k) - d(k - 1)) - longer;
        if needed == 0 {
            continue;
        }
        // Vectors that already occupy height k: continuations of longer chains.
        let active: Vec<Matrix<T>> = tops
            .iter()
            .map(|(top, len)| apply_power(&b, top, len - k))
            .collect();
        let mut base: Vec<Matrix<T>> = if k >= 2 {
            kernels[k - 2].columns()
        } else {
            vec![]
        };
        base.extend(active);
        let candidates = kernels[k - 1].columns();
        let chosen = greedy_extend(&base, &candidates, tol);
        if chosen.len() < needed {
            return Err(Error::StructureAmbiguous {
                context: format!(
                    "found {} independent chain tops at height {k}, needed {needed}",
                    chosen.len()
                ),
            });
        }
        for &idx in chosen.iter().take(needed) {
            tops.push((candidates[idx].clone(), k));
        }
    }

    let mut chains = Vec::new();
    for (top, len) in tops {
        let mut vectors = Vec::with_capacity(len);
        let mut v = top;
        for _ in 0..len {
            vectors.push(v.clone());
            v = &b * &v;
        }
        vectors.reverse(); // eigenvector first
        // Rescale the whole chain so its largest entry is ~1. A common factor
        // preserves the chain relations; per-vector scaling would not.
        let scale = vectors.iter().map(Matrix::max_abs).fold(0.0f64, f64::max);
        if !T::EXACT && scale > 0.0 {
            let factor = T::one() / approx_scalar::<T>(scale);
            for v in &mut vectors {
                *v = v.scale(&factor);
            }
        }
        chains.push(JordanChain {
            eigenvalue: eigenvalue.clone(),
            vectors,
        });
    }
    Ok(chains)
}

/// Best-effort embedding of an f64 magnitude into the scalar type, used only
/// for conditioning rescales in float mode.
fn approx_scalar<T: Scalar>(x: f64) -> T {
    // Split into mantissa/exponent so the i64 ratio stays in range.
    let bits = 1i64 << 30;
    let scaled = (x * bits as f64).round();
    if scaled.abs() < i64::MAX as f64 && scaled != 0.0 {
        T::from_ratio(scaled as i64, bits)
    } else {
        T::one()
    }
}

fn apply_power<T: Scalar>(b: &Matrix<T>, v: &Matrix<T>, power: usize) -> Matrix<T> {
    let mut out = v.clone();
    for _ in 0..power {
        out = b * &out;
    }
    out
}

/// Indices of `candidates` that extend the span of `base` plus previously
/// accepted candidates, scanned left to right. Works over any scalar;
/// independence decisions use the elimination threshold.
fn greedy_extend<T: Scalar>(
    base: &[Matrix<T>],
    candidates: &[Matrix<T>],
    tol: &Tolerance,
) -> Vec<usize> {
    let scale = base
        .iter()
        .chain(candidates.iter())
        .map(Matrix::max_abs)
        .fold(0.0f64, f64::max);
    let threshold = if T::EXACT { 0.0 } else { tol.rank_tol * scale.max(1.0) };

    // Reduced rows: (pivot position, normalized vector).
    let mut reduced: Vec<(usize, Vec<T>)> = Vec::new();
    let push_vector = |v: &Matrix<T>, reduced: &mut Vec<(usize, Vec<T>)>| -> bool {
        let mut w: Vec<T> = v.as_slice().to_vec();
        for (pivot, r) in reduced.iter() {
            let factor = w[*pivot].clone();
            if factor.is_negligible(threshold) {
                continue;
            }
            for (wi, ri) in w.iter_mut().zip(r.iter()) {
                *wi = wi.clone() - factor.clone() * ri.clone();
            }
        }
        let pivot = (0..w.len())
            .max_by(|&i, &j| {
                w[i].magnitude()
                    .partial_cmp(&w[j].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .filter(|&i| !w[i].is_negligible(threshold));
        match pivot {
            Some(p) => {
                let inv = T::one() / w[p].clone();
                let normalized: Vec<T> = w.iter().map(|x| x.clone() * inv.clone()).collect();
                reduced.push((p, normalized));
                true
            }
            None => false,
        }
    };

    for v in base {
        push_vector(v, &mut reduced);
    }
    let mut accepted = Vec::new();
    for (idx, v) in candidates.iter().enumerate() {
        if push_vector(v, &mut reduced) {
            accepted.push(idx);
        }
    }
    accepted
}
