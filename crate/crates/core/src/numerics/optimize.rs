//! Deterministic scalar optimization: golden-section search on a bracket and
//! the substitution used to maximize over an unbounded SNR-like parameter.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of a unimodal function on [a, b]. Returns
/// (argmax, max). Fixed iteration schedule, no randomness.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iter = 0;
    while (hi - lo) > tol && iter < 400 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iter += 1;
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    if fm >= f1 && fm >= f2 {
        (xm, fm)
    } else if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Golden-section minimization on [a, b].
pub fn minimize_scalar<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, fx) = golden_max(|t| -f(t), a, b, tol);
    (x, -fx)
}

/// Maximize over gamma in (0, inf) via the compactifying substitution
/// gamma = u/(1-u), u in (0, 1): a coarse grid locates the best cell, then
/// golden-section search polishes inside it. Returns (gamma*, sup value).
pub fn maximize_over_gamma<F: FnMut(f64) -> f64>(mut f: F, tol_u: f64) -> (f64, f64) {
    let to_gamma = |u: f64| u / (1.0 - u);
    let mut g = |u: f64| f(to_gamma(u));
    const GRID: usize = 64;
    let eps = 1e-9;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let u = eps + (1.0 - 2.0 * eps) * (i as f64) / (GRID as f64);
        let v = g(u);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let step = (1.0 - 2.0 * eps) / (GRID as f64);
    let lo = eps + step * (best_i.saturating_sub(1) as f64);
    let hi = (eps + step * ((best_i + 1) as f64)).min(1.0 - eps);
    let (u_star, v_star) = golden_max(g, lo, hi, tol_u);
    (to_gamma(u_star), v_star)
}

/// Maximize f over a rectangle with a 21x21 grid followed by coordinatewise
/// golden polish. Deterministic; adequate for the smooth two-parameter
/// objectives that arise here.
pub fn grid_max_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    xr: (f64, f64),
    yr: (f64, f64),
    tol: f64,
) -> ((f64, f64), f64) {
    const GRID: usize = 21;
    let mut best = (xr.0, yr.0);
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..GRID {
        let x = xr.0 + (xr.1 - xr.0) * (i as f64) / ((GRID - 1) as f64);
        for j in 0..GRID {
            let y = yr.0 + (yr.1 - yr.0) * (j as f64) / ((GRID - 1) as f64);
            let v = f(x, y);
            if v > best_v {
                best_v = v;
                best = (x, y);
            }
        }
    }
    let (mut x, mut y) = best;
    for _ in 0..8 {
        let dx = (xr.1 - xr.0) / ((GRID - 1) as f64);
        let (nx, _) = golden_max(
            |t| f(t, y),
            (x - dx).max(xr.0),
            (x + dx).min(xr.1),
            tol,
        );
        x = nx;
        let dy = (yr.1 - yr.0) / ((GRID - 1) as f64);
        let (ny, v) = golden_max(
            |t| f(x, t),
            (y - dy).max(yr.0),
            (y + dy).min(yr.1),
            tol,
        );
        y = ny;
        best_v = v;
    }
    ((x, y), best_v)
}

/// Nelder-Mead maximization in a box. The start simplex is built from `x0`
/// plus axis steps of 10% of each box width, so runs are fully deterministic.
/// Iterates until the simplex value spread drops below `tol` or `max_iter`
/// reflections have been spent; returns (argmax, max).
pub fn nelder_mead_max<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let d = x0.len();
    assert_eq!(bounds.len(), d, "one bound pair per coordinate");
    let clamp = |x: &mut Vec<f64>| {
        for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *xi = xi.clamp(lo, hi);
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let mut start = x0.to_vec();
    clamp(&mut start);
    let v0 = f(&start);
    simplex.push((start.clone(), v0));
    for i in 0..d {
        let (lo, hi) = bounds[i];
        let step = 0.1 * (hi - lo);
        let mut x = start.clone();
        // Step toward whichever side has room, so degenerate simplices
        // cannot form on a boundary start.
        x[i] = if x[i] + step <= hi { x[i] + step } else { x[i] - step };
        clamp(&mut x);
        let v = f(&x);
        simplex.push((x, v));
    }
    let centroid = |s: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut c = vec![0.0; d];
        for (x, _) in &s[..d] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi;
            }
        }
        for ci in &mut c {
            *ci /= d as f64;
        }
        c
    };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        if simplex[0].1 - simplex[d].1 < tol {
            break;
        }
        let c = centroid(&simplex);
        let worst = simplex[d].0.clone();
        let mut refl: Vec<f64> = c.iter().zip(&worst).map(|(ci, wi)| 2.0 * ci - wi).collect();
        clamp(&mut refl);
        let fr = f(&refl);
        if fr > simplex[0].1 {
            let mut exp: Vec<f64> = c.iter().zip(&worst).map(|(ci, wi)| 3.0 * ci - 2.0 * wi).collect();
            clamp(&mut exp);
            let fe = f(&exp);
            simplex[d] = if fe > fr { (exp, fe) } else { (refl, fr) };
        } else if fr > simplex[d - 1].1 {
            simplex[d] = (refl, fr);
        } else {
            let mut con: Vec<f64> = c.iter().zip(&worst).map(|(ci, wi)| 0.5 * (ci + wi)).collect();
            clamp(&mut con);
            let fc = f(&con);
            if fc > simplex[d].1 {
                simplex[d] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let mut x: Vec<f64> = best
                        .iter()
                        .zip(&entry.0)
                        .map(|(bi, xi)| 0.5 * (bi + xi))
                        .collect();
                    clamp(&mut x);
                    let v = f(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    simplex.swap_remove(0)
}
