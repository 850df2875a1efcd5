//! Adaptive Gauss-Kronrod (G7, K15) quadrature for vector-valued integrands.

/// Kronrod-15 nodes on [-1, 1] (nonnegative half; the rule is symmetric).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod-15 weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Gauss-7 weights for the embedded rule (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

fn gk15(f: &mut dyn FnMut(f64) -> Vec<f64>, a: f64, b: f64) -> (Vec<f64>, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let dim = f(center).len();
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let points: &[f64] = if x == 0.0 {
            &[0.0]
        } else {
            &[-x, x]
        };
        for &p in points {
            let v = f(center + half * p);
            for (k, vi) in kronrod.iter_mut().zip(v.iter()) {
                *k += wk * vi;
            }
            // Odd indices (plus the center at i = 7) are the embedded G7 nodes.
            if i % 2 == 1 {
                let wg = WG[i / 2];
                for (g, vi) in gauss.iter_mut().zip(v.iter()) {
                    *g += wg * vi;
                }
            }
        }
    }
    let mut err = 0.0f64;
    for (k, g) in kronrod.iter_mut().zip(gauss.iter()) {
        *k *= half;
        err = err.max((*k - g * half).abs());
    }
    (kronrod, err)
}

fn adaptive(
    f: &mut dyn FnMut(f64) -> Vec<f64>,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
    out: &mut Vec<f64>,
) {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= 30 || (b - a).abs() < 1e-14 {
        if out.is_empty() {
            *out = value;
        } else {
            for (o, v) in out.iter_mut().zip(value.iter()) {
                *o += v;
            }
        }
        return;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, depth + 1, out);
    adaptive(f, mid, b, 0.5 * tol, depth + 1, out);
}

/// Integrate a vector-valued function over [a, b] with interior breakpoints
/// (the integrand may jump there). `tol` is an absolute tolerance.
pub fn integrate<F: FnMut(f64) -> Vec<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Vec<f64> {
    if a == b {
        return f(a).iter().map(|_| 0.0).collect();
    }
    let sign = if b >= a { 1.0 } else { -1.0 };
    let (lo, hi) = if b >= a { (a, b) } else { (b, a) };
    let mut edges = vec![lo];
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.extend(pts);
    edges.push(hi);

    let mut total: Vec<f64> = Vec::new();
    for w in edges.windows(2) {
        let mut piece = Vec::new();
        let piece_tol = tol * (w[1] - w[0]).max(1e-12) / (hi - lo);
        adaptive(&mut f, w[0], w[1], piece_tol, 0, &mut piece);
        if total.is_empty() {
            total = piece;
        } else {
            for (t, p) in total.iter_mut().zip(piece.iter()) {
                *t += p;
            }
        }
    }
    total.iter_mut().for_each(|t| *t *= sign);
    total
}
