//! Integer-order Bessel functions of the first kind and the zeros of
//! their derivatives.
//!
//! `J_n(x) = (1/2π) ∫₀^{2π} cos(nτ − x sin τ) dτ`. The integrand is smooth
//! and periodic, so the trapezoidal rule converges geometrically once the
//! number of nodes exceeds `x + n` by a margin.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EXTRA_NODES: usize = 48;

fn nodes(order: u32, x: f64) -> usize {
    let n = x.abs().ceil() as usize + order as usize + EXTRA_NODES;
    n + n % 2
}

/// `J_n(x)`.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    let n = nodes(order, x);
    let nu = order as f64;
    let sum: f64 = (0..n)
        .map(|k| {
            let tau = 2.0 * PI * k as f64 / n as f64;
            (nu * tau - x * tau.sin()).cos()
        })
        .sum();
    sum / n as f64
}

/// `J_n′(x)`, differentiating under the integral sign.
pub fn bessel_j_prime(order: u32, x: f64) -> f64 {
    let n = nodes(order, x);
    let nu = order as f64;
    let sum: f64 = (0..n)
        .map(|k| {
            let tau = 2.0 * PI * k as f64 / n as f64;
            tau.sin() * (nu * tau - x * tau.sin()).sin()
        })
        .sum();
    sum / n as f64
}

/// `J_n″(x)` from Bessel's equation.
fn bessel_j_second(order: u32, x: f64, j: f64, jp: f64) -> f64 {
    let nu = order as f64;
    -jp / x - (1.0 - nu * nu / (x * x)) * j
}

/// Scan step for bracketing; consecutive zeros of `J_n′` are more than π/2 apart.
const SCAN_STEP: f64 = 0.25;

/// All positive zeros of `J_n′` not exceeding `x_max`, ascending.
pub fn bessel_j_prime_zeros(order: u32, x_max: f64) -> Result<Vec<f64>> {
    if !x_max.is_finite() {
        return Err(Error::Validation(format!("invalid zero search range {x_max}")));
    }
    // J_n′ keeps one sign on (0, √(n(n+2))].
    let nu = order as f64;
    let mut x = (nu * (nu + 2.0)).sqrt().max(0.5);
    let mut fx = bessel_j_prime(order, x);
    let mut zeros = Vec::new();
    while x < x_max + SCAN_STEP {
        let next = x + SCAN_STEP;
        let fnext = bessel_j_prime(order, next);
        if fx == 0.0 {
            zeros.push(x);
        } else if fx.signum() != fnext.signum() && fnext != 0.0 {
            zeros.push(refine(order, x, next, fx)?);
        }
        x = next;
        fx = fnext;
    }
    zeros.retain(|z| *z <= x_max);
    Ok(zeros)
}

/// Newton on `J_n′` safeguarded by the bracket `[lo, hi]`.
fn refine(order: u32, mut lo: f64, mut hi: f64, flo: f64) -> Result<f64> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let jp = bessel_j_prime(order, x);
        if jp == 0.0 {
            return Ok(x);
        }
        if jp.signum() == flo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let j = bessel_j(order, x);
        let jpp = bessel_j_second(order, x, j, jp);
        let newton = x - jp / jpp;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::convergence(
        format!("zero of J'_{order} in [{lo}, {hi}]"),
        100,
        bessel_j_prime(order, x).abs(),
    ))
}
