//! Adaptive Simpson quadrature with caller-supplied split points.
//!
//! The integrands in this crate are piecewise-smooth with a handful of known
//! breakpoints (density knees, price crossings); accuracy comes from splitting
//! exactly there and letting the adaptive rule handle each smooth piece.

/// Adaptive Simpson integral of `f` over `[lo, hi]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    integrate_split(f, lo, hi, &[], tol)
}

/// Integrate with the interval pre-split at `splits` (points outside `(lo,hi)`
/// are ignored). Tolerance is apportioned to segments by length, floored at an
/// equal share so a short segment of a very long range is not starved; the
/// combined error stays within twice `tol`.
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    splits: &[f64],
    tol: f64,
) -> f64 {
    assert!(lo.is_finite() && hi.is_finite() && hi >= lo);
    if hi == lo {
        return 0.0;
    }
    let mut pts: Vec<f64> = splits.iter().copied().filter(|&s| s > lo && s < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let total = hi - lo;
    let nseg = (pts.len() - 1) as f64;
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-300 {
            continue;
        }
        let seg_tol = (tol * (b - a) / total).max(tol / nseg).max(1e-300);
        acc += segment(&f, a, b, seg_tol);
    }
    acc
}

fn segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adapt(f, a, m, b, fa, fm, fb, whole, tol, 52)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // 15 = Richardson factor for Simpson's rule; the final term is the
    // extrapolated correction.
    if depth == 0 || delta.abs() <= 15.0 * tol || (m - a) < 1e-15 * (1.0 + a.abs()) {
        return left + right + delta / 15.0;
    }
    adapt(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adapt(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Compensated (Kahan) sum; used where bit-stable accumulation matters.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Inverse standard-normal CDF (Acklam's rational approximation, |err| < 1.2e-9).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probability out of range: {p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |p: f64| {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail(p)
    } else if p > 1.0 - P_LOW {
        -tail(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly_enough() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-12);
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let v = integrate(|x| x.powi(5) - 2.0 * x + 1.0, -1.0, 2.0, 1e-12);
        // antiderivative x^6/6 - x^2 + x evaluated at bounds
        let exact = (64.0 / 6.0 - 4.0 + 2.0) - (1.0 / 6.0 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn handles_kinks_via_splits() {
        let f = |x: f64| x.abs();
        let v = integrate_split(f, -1.0, 1.0, &[0.0], 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_integral_matches_closed_form() {
        let v = integrate(|x| (-x).exp(), 0.0, 30.0, 1e-11);
        assert!((v - (1.0 - (-30.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn kahan_sums_many_small_terms() {
        let n = 10_000_000;
        let s = kahan_sum((0..n).map(|_| 0.1));
        assert!((s - 0.1 * n as f64).abs() < 1e-6);
    }

    #[test]
    fn inverse_normal_hits_standard_quantiles() {
        assert!((inverse_normal_cdf(0.975) - 1.959964).abs() < 1e-5);
        assert!((inverse_normal_cdf(0.5)).abs() < 1e-9);
        assert!((inverse_normal_cdf(0.995) - 2.575829).abs() < 1e-5);
        assert!((inverse_normal_cdf(0.025) + 1.959964).abs() < 1e-5);
    }
}
