//! One-dimensional minimization for convex objectives: bracket expansion,
//! golden-section refinement, and a coarse grid scan used when the
//! objective may be flat over wide ranges.

/// `1 / phi` where `phi` is the golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `xtol`. Returns the best point seen and its value.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // 200 iterations shrink any finite bracket below one ulp
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Outcome of walking away from a starting point in one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    /// A minimum lies in `[lo, hi]`.
    Found { lo: f64, hi: f64 },
    /// The objective kept decreasing past `limit` or below `-limit`.
    Unbounded { at: f64, value: f64 },
}

/// Expand geometrically from `x0` in direction `dir` (+1 or -1) until the
/// objective increases. `f0` must be `f(x0)` and `f(x0 + dir * step)` is
/// expected to be below it.
pub fn expand_bracket<F: Fn(f64) -> f64>(
    f: F,
    x0: f64,
    f0: f64,
    dir: f64,
    step: f64,
    limit: f64,
) -> Bracket {
    let mut prev2 = x0;
    let mut prev = x0;
    let mut fprev = f0;
    let mut h = step;
    loop {
        let x = x0 + dir * h;
        let fx = f(x);
        if !(fx.is_finite()) || fx < -limit || (x - x0).abs() > limit {
            return Bracket::Unbounded { at: x, value: fx };
        }
        if fx > fprev {
            let (lo, hi) = if prev2 <= x { (prev2, x) } else { (x, prev2) };
            return Bracket::Found { lo, hi };
        }
        prev2 = prev;
        prev = x;
        fprev = fx;
        h *= 2.0;
    }
}

/// Evaluate `f` on `points` equally spaced nodes of `[lo, hi]`, then refine
/// around the best node by golden section. Ties on the grid go to the node
/// of smallest absolute value.
pub fn scan_then_refine<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    points: usize,
    xtol: f64,
) -> (f64, f64) {
    let points = points.max(3);
    let h = (hi - lo) / (points - 1) as f64;
    let mut best = 0usize;
    let mut best_x = lo;
    let mut best_f = f(lo);
    for i in 1..points {
        let x = if i == points - 1 { hi } else { lo + h * i as f64 };
        let fx = f(x);
        if fx < best_f || (fx == best_f && x.abs() < best_x.abs()) {
            best = i;
            best_x = x;
            best_f = fx;
        }
    }
    let a = lo + h * best.saturating_sub(1) as f64;
    let b = if best + 1 >= points { hi } else { lo + h * (best + 1) as f64 };
    let (x, fx) = golden_section(&f, a, b, xtol);
    if fx < best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}

/// For convex `f` with minimum value `fmin` attained at `x`, find the point
/// of the level set `{f <= fmin + slack}` closest to zero.
pub fn closest_to_zero_in_level_set<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    fmin: f64,
    slack: f64,
    xtol: f64,
) -> f64 {
    if x == 0.0 || f(0.0) <= fmin + slack {
        return if x == 0.0 { x } else { 0.0 };
    }
    // 0 lies outside the level set, x inside; bisect for the boundary.
    let mut inside = x;
    let mut outside = 0.0f64;
    while (inside - outside).abs() > xtol {
        let mid = 0.5 * (inside + outside);
        if f(mid) <= fmin + slack {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}
