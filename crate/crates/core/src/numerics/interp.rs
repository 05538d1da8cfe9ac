//! Interpolation helpers and numerical differentiation.

/// Natural cubic spline through `(x, y)` with strictly increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    /// Panics if fewer than two points or `x` not strictly increasing; callers
    /// validate their tables first.
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n, "spline needs matching tables of length >= 2");
        assert!(x.windows(2).all(|w| w[1] > w[0]), "spline abscissae must increase");
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the tridiagonal system.
            let mut c_prime = vec![0.0; n];
            let mut d_prime = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0;
                let b = 2.0 * (h0 + h1);
                let c = h1;
                let d = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (d - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d_prime[i] - c_prime[i] * m[i + 1];
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value at `t`; linear continuation outside the knots.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        if t < self.x[0] || t > self.x[self.x.len() - 1] {
            let edge = if t < self.x[0] { 0 } else { self.x.len() - 1 };
            return self.y[edge] + self.slope(self.x[edge]) * (t - self.x[edge]);
        }
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn slope(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * self.m[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.m[i + 1]
    }
}

/// Linear interpolation in a strictly increasing table; `None` outside it.
pub fn linear(xs: &[f64], ys: &[f64], t: f64) -> Option<f64> {
    let n = xs.len();
    if n == 0 || t < xs[0] || t > xs[n - 1] {
        return None;
    }
    if n == 1 {
        return Some(ys[0]);
    }
    let i = match xs.binary_search_by(|v| v.total_cmp(&t)) {
        Ok(i) => return Some(ys[i]),
        Err(i) => i - 1,
    };
    let w = (t - xs[i]) / (xs[i + 1] - xs[i]);
    Some(ys[i] + w * (ys[i + 1] - ys[i]))
}

/// Central difference at `x` with step `h`, improved by one Richardson
/// extrapolation: `(4·D(h/2) - D(h))/3`.
pub fn richardson_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let central = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let coarse = central(h);
    let fine = central(0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

/// Step used for numerical derivatives with respect to a distance `d`.
pub fn distance_step(d: f64) -> f64 {
    (1e-4 * d.abs()).max(1e-12)
}
