//! Bessel function of the first kind, order one.
//!
//! Three regimes: power series below 8, Miller backward recurrence with the
//! `J0 + 2ΣJ2k = 1` normalization on [8, 30), and the Hankel asymptotic
//! expansion from 30 up, where it already reaches full double precision.

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 30.0;

/// `J1(x)` for real `x`, absolute accuracy around 1e-14.
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax < SERIES_LIMIT {
        series(ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax)
    } else {
        hankel(ax)
    };
    if x < 0.0 {
        -value
    } else {
        value
    }
}

/// `J1(x)/x`, continuous at zero where it equals 1/2.
pub fn j1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        0.5 - x * x / 16.0
    } else {
        j1(x) / x
    }
}

fn series(x: f64) -> f64 {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut term = h;
    let mut sum = h;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= -h2 / (m * (m + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> f64 {
    let start = (x + (160.0 * x).sqrt() + 20.0) as usize;
    let start = start + start % 2;
    let two_over_x = 2.0 / x;
    let mut j_next = 0.0;
    let mut j = 1e-30;
    let mut order_one = 0.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let j_prev = k as f64 * two_over_x * j - j_next;
        j_next = j;
        j = j_prev;
        let order = k - 1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            j_next *= 1e-250;
            order_one *= 1e-250;
            norm *= 1e-250;
        }
        if order == 1 {
            order_one = j;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    order_one / norm
}

fn hankel(x: f64) -> f64 {
    // μ = 4ν² = 4
    let mu = 4.0;
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 1;
    loop {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        if term.abs() < 1e-18 {
            break;
        }
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        k += 1;
        if k > 60 {
            break;
        }
    }
    let chi = x - 0.75 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
