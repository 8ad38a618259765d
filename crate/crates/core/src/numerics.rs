//! Quadrature, monotone root bracketing and 1-D minimization.

use crate::scalar::Real;

/// Bisection tolerance on the argument shared by every inversion.
pub const BISECT_TOL: f64 = 1e-10;
pub const BISECT_MAX_ITER: usize = 200;

/// Composite Simpson weights for `n` subintervals (rounded up to even) on `[a, b]`.
pub fn simpson_nodes<T: Real>(a: T, b: T, n: usize) -> (Vec<T>, Vec<T>) {
    let n = n.max(2) + n % 2;
    let h = (b - a) / T::nat(n);
    let third = h / T::lit(3.0);
    let mut xs = Vec::with_capacity(n + 1);
    let mut ws = Vec::with_capacity(n + 1);
    for i in 0..=n {
        xs.push(if i == n { b } else { a + h * T::nat(i) });
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        ws.push(third * T::lit(w));
    }
    (xs, ws)
}

pub fn simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    let (xs, ws) = simpson_nodes(a, b, n);
    xs.iter().zip(&ws).fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
}

/// Tensor-product Simpson rule on `[a0, b0] x [a1, b1]`.
pub fn simpson_2d<T: Real, F: Fn(T, T) -> T>(f: F, (a0, b0): (T, T), (a1, b1): (T, T), n0: usize, n1: usize) -> T {
    let (xs, wx) = simpson_nodes(a0, b0, n0);
    let (ys, wy) = simpson_nodes(a1, b1, n1);
    let mut acc = T::zero();
    for (&x, &u) in xs.iter().zip(&wx) {
        let mut row = T::zero();
        for (&y, &v) in ys.iter().zip(&wy) {
            row += v * f(x, y);
        }
        acc += u * row;
    }
    acc
}

const GAUSS3: [(f64, f64); 3] =
    [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];

/// Composite three-point Gauss-Legendre rule on `n` panels. Never evaluates
/// the endpoints, so integrable endpoint singularities are tolerated.
pub fn gauss3<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    let n = n.max(1);
    let h = (b - a) / T::nat(n);
    let half = h / T::lit(2.0);
    let mut acc = T::zero();
    for k in 0..n {
        let mid = a + h * (T::nat(k) + T::lit(0.5));
        for &(x, w) in &GAUSS3 {
            acc += T::lit(w) * f(mid + half * T::lit(x));
        }
    }
    acc * half
}

/// Tensor-product version of [`gauss3`].
pub fn gauss3_2d<T: Real, F: Fn(T, T) -> T>(f: F, (a0, b0): (T, T), (a1, b1): (T, T), n0: usize, n1: usize) -> T {
    gauss3(|x| gauss3(|y| f(x, y), a1, b1, n1), a0, b0, n0)
}

/// Runs `rule(n)`, `rule(2n)`, `rule(4n)` and returns the finest value when the
/// last doubling moved it by at most `rel_tol` (relative).
pub fn refined<T: Real, F: Fn(usize) -> T>(rule: F, n: usize, rel_tol: f64) -> Option<T> {
    let coarse = rule(n);
    let mid = rule(2 * n);
    let fine = rule(4 * n);
    if !(coarse.is_finite() && mid.is_finite() && fine.is_finite()) {
        return None;
    }
    let scale = fine.abs().max(T::min_positive());
    if (fine - mid).abs() / scale > T::lit(rel_tol) {
        return None;
    }
    Some(fine)
}

/// Smallest `x` in `[lo, hi]` with `pred(x)` true, assuming `pred` is monotone
/// (false then true). Returns `hi` if only `hi` satisfies it.
pub fn bisect_first<T: Real, P: Fn(T) -> bool>(pred: P, mut lo: T, mut hi: T, tol: T) -> T {
    let two = T::lit(2.0);
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / two;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
pub fn golden_min<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, iters: usize) -> (T, T) {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn log_grid<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                a
            } else if i + 1 == n {
                b
            } else {
                (la + (lb - la) * T::nat(i) / T::nat(n - 1)).exp()
            }
        })
        .collect()
}
