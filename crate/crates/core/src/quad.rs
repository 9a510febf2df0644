//! Quadrature, differencing and interpolation weights shared by the modules.

/// Composite Simpson weights for `n` uniformly spaced samples.
///
/// Odd `n` gives the classical 1-4-2-…-4-1 pattern. Even `n` closes the
/// last three intervals with the 3/8 rule so the order stays four.
pub fn simpson_weights(n: usize, dx: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 => {}
        1 => {}
        2 => {
            w[0] = 0.5 * dx;
            w[1] = 0.5 * dx;
        }
        3 => {
            w[0] = dx / 3.0;
            w[1] = 4.0 * dx / 3.0;
            w[2] = dx / 3.0;
        }
        _ => {
            let m = if n % 2 == 1 { n } else { n - 3 };
            // m == 1 leaves nothing for Simpson; the 3/8 rule covers all of n = 4
            if m > 1 {
                for i in 0..m {
                    let c = if i == 0 || i == m - 1 {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w[i] += c * dx / 3.0;
                }
            }
            if m < n {
                let s = 3.0 * dx / 8.0;
                w[m - 1] += s;
                w[m] += 3.0 * s;
                w[m + 1] += 3.0 * s;
                w[m + 2] += s;
            }
        }
    }
    w
}

/// Composite Simpson integral of uniformly spaced samples.
pub fn simpson(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n % 2 == 1 {
        let mut odd = 0.0;
        let mut even = 0.0;
        for i in (1..n - 1).step_by(2) {
            odd += values[i];
        }
        for i in (2..n - 1).step_by(2) {
            even += values[i];
        }
        return dx / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even);
    }
    simpson_weights(n, dx).iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Trapezoid rule on a periodic grid of `values.len()` points covering one period.
pub fn periodic_trapezoid(values: &[f64], period: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() * period / values.len() as f64
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }

    // Start from a modest uniform partition so narrow features are not missed.
    const PIECES: usize = 64;
    let h = (b - a) / PIECES as f64;
    (0..PIECES)
        .map(|k| {
            let lo = a + k as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            recurse(&f, lo, hi, fa, fm, fb, whole, tol / PIECES as f64, 40)
        })
        .sum()
}

/// Fourth-order first derivative of uniformly spaced samples.
///
/// Interior points use the centered five-point stencil; the two points at
/// each end use one-sided fourth-order stencils. Fewer than five samples
/// fall back to second-order differences.
pub fn derivative(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n < 5 {
        for i in 0..n {
            d[i] = if i == 0 {
                (values[1] - values[0]) / dx
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / dx
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * dx)
            };
        }
        return d;
    }
    let v = values;
    for i in 2..n - 2 {
        d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * dx);
    }
    d[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * dx);
    d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * dx);
    d[n - 1] = (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] + 3.0 * v[n - 5]) / (12.0 * dx);
    d[n - 2] = (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5]) / (12.0 * dx);
    d
}

/// Cubic Lagrange weights (and their derivatives in units of one spacing)
/// for nodes at offsets -1, 0, 1, 2 evaluated at fractional offset `f`.
#[inline]
pub fn cubic_weights(f: f64) -> ([f64; 4], [f64; 4]) {
    let fm1 = f - 1.0;
    let fm2 = f - 2.0;
    let fp1 = f + 1.0;
    let w = [
        -f * fm1 * fm2 / 6.0,
        fp1 * fm1 * fm2 / 2.0,
        -fp1 * f * fm2 / 2.0,
        fp1 * f * fm1 / 6.0,
    ];
    let dw = [
        -(3.0 * f * f - 6.0 * f + 2.0) / 6.0,
        (3.0 * f * f - 4.0 * f - 1.0) / 2.0,
        -(3.0 * f * f - 2.0 * f - 2.0) / 2.0,
        (3.0 * f * f - 1.0) / 6.0,
    ];
    (w, dw)
}

/// Weights and derivative weights of the cubic through four arbitrary nodes.
#[inline]
pub fn lagrange4(t: [f64; 4], x: f64) -> ([f64; 4], [f64; 4]) {
    let mut w = [0.0; 4];
    let mut dw = [0.0; 4];
    for j in 0..4 {
        let mut denom = 1.0;
        let mut num = 1.0;
        for m in 0..4 {
            if m != j {
                denom *= t[j] - t[m];
                num *= x - t[m];
            }
        }
        let mut dnum = 0.0;
        for k in 0..4 {
            if k == j {
                continue;
            }
            let mut p = 1.0;
            for m in 0..4 {
                if m != j && m != k {
                    p *= x - t[m];
                }
            }
            dnum += p;
        }
        w[j] = num / denom;
        dw[j] = dnum / denom;
    }
    (w, dw)
}

/// Lagrange interpolation weights and derivative weights on arbitrary nodes.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    let mut dw = vec![0.0; n];
    for j in 0..n {
        let mut denom = 1.0;
        for m in 0..n {
            if m != j {
                denom *= nodes[j] - nodes[m];
            }
        }
        let mut num = 1.0;
        for m in 0..n {
            if m != j {
                num *= x - nodes[m];
            }
        }
        let mut dnum = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let mut p = 1.0;
            for m in 0..n {
                if m != j && m != k {
                    p *= x - nodes[m];
                }
            }
            dnum += p;
        }
        w[j] = num / denom;
        dw[j] = dnum / denom;
    }
    (w, dw)
}
