//! Reference routines for the test suites.
//!
//! Nothing here is used by the library itself. Every routine follows a
//! computation path that is independent of the one it is used to check:
//! elliptic functions come from the arithmetic-geometric mean, Bessel
//! functions from their power series.

use std::f64::consts::PI;

const AGM_TOL: f64 = 1e-16;
const AGM_MAX: usize = 64;

/// Arithmetic-geometric mean of `a` and `b`.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        a = an;
        b = bn;
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, modulus convention
/// `K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ)`.
pub fn elliptic_k(modulus: f64) -> f64 {
    assert!((0.0..1.0).contains(&modulus.abs()), "modulus outside [0, 1)");
    PI / (2.0 * agm(1.0, (1.0 - modulus * modulus).sqrt()))
}

/// Jacobi elliptic function `cn(u, k)` by the descending AGM / Landen
/// scheme (Abramowitz & Stegun 16.4).
pub fn jacobi_cn(u: f64, modulus: f64) -> f64 {
    let m = modulus * modulus;
    if m == 0.0 {
        return u.cos();
    }
    let mut a = vec![1.0];
    let mut b = (1.0 - m).sqrt();
    let mut c = vec![modulus];
    for _ in 0..AGM_MAX {
        let an = a[a.len() - 1];
        let a_next = 0.5 * (an + b);
        let c_next = 0.5 * (an - b);
        b = (an * b).sqrt();
        a.push(a_next);
        c.push(c_next);
        if c_next.abs() <= AGM_TOL {
            break;
        }
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for k in (1..=n).rev() {
        phi = 0.5 * (phi + (c[k] / a[k] * phi.sin()).asin());
    }
    phi.cos()
}

/// `J_ν(x)` for integer order by its power series. Accurate to roughly
/// `1e-15 · e^{x}` absolute; intended for `x ≲ 12`.
pub fn bessel_j_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(order as i32) / factorial(order);
    let mut sum = term;
    let q = -half * half;
    for m in 1..400u32 {
        term *= q / (m as f64 * (m + order) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && m > 4 {
            break;
        }
    }
    sum
}

/// `J_ν′(x)` from the series via `J_ν′ = (J_{ν−1} − J_{ν+1}) / 2`
/// (and `J_0′ = −J_1`).
pub fn bessel_j_prime_series(order: u32, x: f64) -> f64 {
    if order == 0 {
        -bessel_j_series(1, x)
    } else {
        0.5 * (bessel_j_series(order - 1, x) - bessel_j_series(order + 1, x))
    }
}

/// The `k`-th positive zero of `J_ν′`, by a fine sign scan followed by
/// plain bisection on the series derivative. Restricted to small
/// arguments (below about 12).
pub fn bessel_j_prime_zero_series(order: u32, k: usize) -> f64 {
    let step = 1e-2;
    let mut x = 1e-3;
    let mut prev = bessel_j_prime_series(order, x);
    let mut found = 0;
    while x < 14.0 {
        let next = x + step;
        let val = bessel_j_prime_series(order, next);
        if prev == 0.0 || prev.signum() != val.signum() {
            found += 1;
            if found == k {
                return bisect(|s| bessel_j_prime_series(order, s), x, next, 1e-15);
            }
        }
        prev = val;
        x = next;
    }
    panic!("series oracle range exceeded for J'_{order} zero {k}");
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * mid.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Richardson extrapolation of a second-order sequence on grids refined
/// by a factor of two: `values[k]` is the result at spacing `h / 2^k`.
/// Eliminates the `h²`, `h⁴`, ... terms in turn.
pub fn richardson_h2(values: &[f64]) -> f64 {
    let mut table = values.to_vec();
    let mut factor = 4.0;
    while table.len() > 1 {
        table = table
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        factor *= 4.0;
    }
    table[0]
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
