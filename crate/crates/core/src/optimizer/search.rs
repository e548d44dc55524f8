//! One-dimensional search primitives used by the block optimizer.

/// Inverse golden ratio, (√5 − 1)/2.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Iteration cap for all interval searches; generous, the tolerances below
/// terminate far earlier.
const MAX_STEPS: usize = 200;

/// Golden-section maximization of `f` on `[a, b]` (endpoint order is
/// irrelevant). Returns `(argmax, max)` once the bracket is below `tol`.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_STEPS {
        if b - a <= tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection root of a decreasing function with `f(a) > 0 > f(b)`
/// (endpoint order is irrelevant). Returns the bracket midpoint once the
/// bracket is below `tol`.
pub(crate) fn bisect_root<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    for _ in 0..MAX_STEPS {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Smallest `x` in `[a, b]` with `f(x) >= level`, for `f` nondecreasing on
/// the interval; expects `f(a) < level <= f(b)`. Returns the feasible end of
/// the final bracket.
pub(crate) fn lowest_above<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, level: f64, tol: f64) -> f64 {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    for _ in 0..MAX_STEPS {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if f(m) >= level {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// Largest `x` in `[a, b]` with `f(x) >= level`, for `f` nonincreasing on
/// the interval; expects `f(a) >= level > f(b)`. Returns the feasible end of
/// the final bracket.
pub(crate) fn highest_above<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, level: f64, tol: f64) -> f64 {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    for _ in 0..MAX_STEPS {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if f(m) >= level {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v <= 0.0 && v > -1e-15);
    }

    #[test]
    fn golden_invariant_under_endpoint_reversal() {
        let f = |x: f64| (2.0 * x).sin() - 0.1 * x;
        let (x1, _) = golden_max(f, -1.0, 2.0, 1e-10);
        let (x2, _) = golden_max(f, 2.0, -1.0, 1e-10);
        assert!((x1 - x2).abs() <= 1e-10);
    }

    #[test]
    fn bisect_root_and_reversal() {
        let f = |x: f64| 1.5 - x;
        let r1 = bisect_root(f, 0.0, 4.0, 1e-12);
        let r2 = bisect_root(f, 4.0, 0.0, 1e-12);
        assert!((r1 - 1.5).abs() < 1e-11);
        assert!((r1 - r2).abs() <= 1e-12);
    }

    #[test]
    fn level_crossings_return_feasible_side() {
        let f = |x: f64| x;
        let lo = lowest_above(f, 0.0, 1.0, 0.25, 1e-12);
        assert!(lo >= 0.25 && lo < 0.25 + 1e-11);
        let g = |x: f64| 1.0 - x;
        let hi = highest_above(g, 0.0, 1.0, 0.25, 1e-12);
        assert!(g(hi) >= 0.25 && hi > 0.75 - 1e-11);
    }
}
