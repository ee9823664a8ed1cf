//! Small deterministic 1-D search utilities shared by the analytic root
//! finders and the brute-force oracle.

/// Golden-section maximization of `f` on [a, b].
///
/// Returns `(x_max, f_max)` after shrinking the bracket below `x_tol` or
/// `max_iter` iterations, whichever comes first.
pub(crate) fn golden_max(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    x_tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if (b - a).abs() <= x_tol {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Smallest `x` in [lo, hi] with `pred(x)` true, assuming `pred(hi)` holds
/// and the predicate is monotone on the bracket. Bisection to `x_tol`.
pub(crate) fn lower_boundary(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    if pred(lo) {
        return lo;
    }
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
