//! Bisection on a bracketing interval.

/// Boundary between `pred == true` and `pred == false` on `[lo, hi]`, for a
/// predicate that is true on a prefix of the interval and false afterwards.
///
/// Requires `pred(lo)` and `!pred(hi)`. Returns the bracket `(a, b)` with
/// `pred(a)`, `!pred(b)` and `b - a <= tol` (or after 200 halvings, which
/// exhausts f64 resolution on any finite interval).
pub fn bisect_boundary<F>(mut lo: f64, mut hi: f64, tol: f64, mut pred: F) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    debug_assert!(lo <= hi);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Root of `f` on `[lo, hi]` given `f(lo)` and `f(hi)` of opposite strict sign
/// (or one of them zero). Returns the midpoint of the final bracket.
pub fn bisect_root<F>(lo: f64, hi: f64, tol: f64, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let positive_left = f_lo > 0.0;
    let (a, b) = bisect_boundary(lo, hi, tol, |x| {
        let v = f(x);
        if positive_left {
            v > 0.0
        } else {
            v < 0.0
        }
    });
    a + 0.5 * (b - a)
}
