//! Bessel function of the first kind, order zero.

use core::f64::consts::{FRAC_PI_4, PI};
#[allow(unused_imports)]
use num_traits::Float;

// The power series loses about log10(I0(x)) digits to cancellation, roughly
// 4 at x = 12. The Hankel expansion has a smallest term near e^(-2x), about
// 4e-11 at x = 12, and improves rapidly beyond.
const SERIES_LIMIT: f64 = 12.0;

/// `J0(x)` with absolute error below 1e-10 for all real `x`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        hankel(x)
    }
}

fn series(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && term.abs() < 1e-18 {
            return sum;
        }
        k += 1.0;
    }
}

fn hankel(x: f64) -> f64 {
    // a_k = ((1)(9)(25)...(2k-1)^2) / (k! 8^k) / x^k
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut k = 1u32;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (8.0 * k as f64 * x);
        if next >= term || next < 1e-17 {
            break;
        }
        term = next;
        // P = 1 - t2 + t4 - ..., Q = -t1 + t3 - t5 + ...
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q -= sign * term;
        } else {
            p += sign * term;
        }
        k += 1;
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
