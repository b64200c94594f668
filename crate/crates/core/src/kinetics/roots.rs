/// Bisection on a sign-changing bracket `[lo, hi]`, run to floating-point
/// resolution.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots of `c3 x^3 + c2 x^2 + c1 x + c0`, ascending.
///
/// The real line is split at the critical points into monotone pieces and each
/// sign change is bisected. Double roots (tangencies) are reported only when a
/// critical value is exactly zero.
pub fn monotone_cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let p = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    if c3 == 0.0 {
        return quadratic_roots(c2, c1, c0);
    }
    // Cauchy bound on root magnitude.
    let bound = 1.0 + (c2.abs().max(c1.abs()).max(c0.abs())) / c3.abs();
    let mut knots = vec![-bound];
    for x in quadratic_roots(3.0 * c3, 2.0 * c2, c1) {
        if x > -bound && x < bound {
            knots.push(x);
        }
    }
    knots.push(bound);
    let mut roots: Vec<f64> = Vec::with_capacity(3);
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (pa, pb) = (p(a), p(b));
        if pa == 0.0 {
            if roots.last().is_none_or(|&r| r != a) {
                roots.push(a);
            }
        } else if pb != 0.0 && pa.signum() != pb.signum() {
            roots.push(bisect(p, a, b));
        }
    }
    if let Some(&last) = knots.last() {
        if p(last) == 0.0 && roots.last().is_none_or(|&r| r != last) {
            roots.push(last);
        }
    }
    roots
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    let mut r = vec![q / a, c / q];
    r.sort_by(f64::total_cmp);
    r
}
