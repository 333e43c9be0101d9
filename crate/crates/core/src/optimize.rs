//! Derivative-free maximizers for the (at most two-dimensional) likelihoods.
//!
//! Objectives return `-inf` outside the admissible region.

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal function on
/// `[lo, hi]`. The endpoints are compared explicitly so that boundary maxima
/// are returned exactly.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi, c, d] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Points `lo, lo + step, ..., hi` (with `hi` always included).
fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).floor() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).filter(|&x| x <= hi).collect();
    if pts.last().is_none_or(|&x| x < hi) {
        pts.push(hi);
    }
    pts
}

/// Grid scan followed by golden-section refinement around the best grid point.
pub(crate) fn maximize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64, tol: f64) -> (f64, f64) {
    let mut best = (lo, f64::NEG_INFINITY);
    for x in grid(lo, hi, step) {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    let refined = golden_max(&f, a, b, tol);
    if refined.1 >= best.1 {
        refined
    } else {
        best
    }
}

/// Grid scan over `[0, hi_x] x [0, hi_y]`, then Nelder-Mead from the best
/// grid point, then coordinate-wise golden-section polishing.
pub(crate) fn maximize_2d<F: Fn([f64; 2]) -> f64>(
    f: F,
    hi: [f64; 2],
    step: f64,
    tol: f64,
) -> ([f64; 2], f64) {
    let mut best = ([0.0, 0.0], f64::NEG_INFINITY);
    let ys = grid(0.0, hi[1], step);
    for x in grid(0.0, hi[0], step) {
        for &y in &ys {
            let v = f([x, y]);
            if v > best.1 {
                best = ([x, y], v);
            }
        }
    }
    for _ in 0..3 {
        let nm = nelder_mead_max(&f, best.0, step, tol, 4000);
        if nm.1 >= best.1 {
            best = nm;
        }
        let before = best.1;
        for _ in 0..200 {
            let prev = best.1;
            let (x, _) = golden_max(|x| f([x, best.0[1]]), 0.0, hi[0], tol);
            let vx = f([x, best.0[1]]);
            if vx >= best.1 {
                best = ([x, best.0[1]], vx);
            }
            let (y, _) = golden_max(|y| f([best.0[0], y]), 0.0, hi[1], tol);
            let vy = f([best.0[0], y]);
            if vy >= best.1 {
                best = ([best.0[0], y], vy);
            }
            if best.1 - prev <= 1e-14 * prev.abs().max(1.0) {
                break;
            }
        }
        if best.1 - before <= 1e-14 * before.abs().max(1.0) {
            break;
        }
    }
    best
}

/// Nelder-Mead simplex maximization in two dimensions.
pub(crate) fn nelder_mead_max<F: Fn([f64; 2]) -> f64>(
    f: F,
    start: [f64; 2],
    scale: f64,
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    let mut simplex: Vec<([f64; 2], f64)> = [
        start,
        [start[0] + scale, start[1]],
        [start[0], start[1] + scale],
    ]
    .into_iter()
    .map(|x| (x, f(x)))
    .collect();

    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..max_iter {
        // Descending by objective: best first.
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let size = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| (x[0] - simplex[0].0[0]).abs().max((x[1] - simplex[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if size < tol {
            break;
        }
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let worst = simplex[2];

        let reflected = lerp(centroid, worst.0, -1.0);
        let fr = f(reflected);
        if fr > simplex[0].1 {
            let expanded = lerp(centroid, worst.0, -2.0);
            let fe = f(expanded);
            simplex[2] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr > simplex[1].1 {
            simplex[2] = (reflected, fr);
            continue;
        }
        let contracted = if fr > worst.1 {
            lerp(centroid, reflected, 0.5)
        } else {
            lerp(centroid, worst.0, 0.5)
        };
        let fc = f(contracted);
        if fc > worst.1.max(fr) {
            simplex[2] = (contracted, fc);
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].0;
        for v in simplex.iter_mut().skip(1) {
            let x = lerp(best, v.0, 0.5);
            *v = (x, f(x));
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    simplex[0]
}
