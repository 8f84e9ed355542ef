//! Periodic cubic splines on a uniform grid, many complex channels at once.

use crate::linalg::{C64, ZERO};

/// Interpolates `channels` complex series sampled at `t_k = k·h`, `k = 0..n`,
/// with period `n·h`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    n: usize,
    channels: usize,
    h: f64,
    period: f64,
    values: Vec<C64>,
    second: Vec<C64>,
}

impl PeriodicSpline {
    /// `values` is laid out sample-major: `values[k * channels + c]`.
    pub fn new(period: f64, channels: usize, values: Vec<C64>) -> Self {
        assert!(channels > 0 && values.len() % channels == 0);
        let n = values.len() / channels;
        assert!(n >= 3, "periodic spline needs at least 3 samples");
        let h = period / n as f64;
        let scale = 6.0 / (h * h);
        let mut rhs = vec![ZERO; n];
        let mut second = vec![ZERO; n * channels];
        let solver = CyclicSolver::new(n);
        for c in 0..channels {
            for k in 0..n {
                let prev = values[((k + n - 1) % n) * channels + c];
                let next = values[((k + 1) % n) * channels + c];
                rhs[k] = (prev - values[k * channels + c] * 2.0 + next) * scale;
            }
            solver.solve(&mut rhs);
            for k in 0..n {
                second[k * channels + c] = rhs[k];
            }
        }
        PeriodicSpline {
            n,
            channels,
            h,
            period,
            values,
            second,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Evaluates all channels at `t` (any real, wrapped into the period).
    pub fn eval_into(&self, t: f64, out: &mut [C64]) {
        let x = (t / self.h).rem_euclid(self.n as f64);
        let mut k = x.floor() as usize;
        let mut u = x - k as f64;
        if k >= self.n {
            k = self.n - 1;
            u = 1.0;
        }
        let k1 = (k + 1) % self.n;
        let v = 1.0 - u;
        let h2 = self.h * self.h / 6.0;
        let a = (v * v * v - v) * h2;
        let b = (u * u * u - u) * h2;
        let c = self.channels;
        let (y0, y1) = (&self.values[k * c..(k + 1) * c], &self.values[k1 * c..(k1 + 1) * c]);
        let (m0, m1) = (&self.second[k * c..(k + 1) * c], &self.second[k1 * c..(k1 + 1) * c]);
        for i in 0..c {
            out[i] = y0[i] * v + y1[i] * u + m0[i] * a + m1[i] * b;
        }
    }

    pub fn eval(&self, t: f64) -> Vec<C64> {
        let mut out = vec![ZERO; self.channels];
        self.eval_into(t, &mut out);
        out
    }
}

/// Solver for the circulant system `x_{k-1} + 4 x_k + x_{k+1} = r_k`.
/// Thomas algorithm plus a Sherman–Morrison correction for the corners.
#[derive(Debug, Clone)]
struct CyclicSolver {
    n: usize,
    // modified diagonal and forward multipliers of the bordered tridiagonal
    c_prime: Vec<f64>,
    denom: Vec<f64>,
    z: Vec<f64>,
    gamma: f64,
}

impl CyclicSolver {
    fn new(n: usize) -> Self {
        // A = T + u v^T with u = (γ, 0, .., 0, 1), v = (1, 0, .., 0, 1/γ)
        let gamma = -4.0;
        let mut diag = vec![4.0; n];
        diag[0] -= gamma;
        diag[n - 1] -= 1.0 / gamma;
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        denom[0] = diag[0];
        c_prime[0] = 1.0 / denom[0];
        for k in 1..n {
            denom[k] = diag[k] - c_prime[k - 1];
            c_prime[k] = 1.0 / denom[k];
        }
        let mut s = CyclicSolver {
            n,
            c_prime,
            denom,
            z: vec![],
            gamma,
        };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = 1.0;
        s.z = s.thomas_real(&u);
        s
    }

    fn thomas_real(&self, r: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        y[0] = r[0] / self.denom[0];
        for k in 1..n {
            y[k] = (r[k] - y[k - 1]) / self.denom[k];
        }
        for k in (0..n - 1).rev() {
            y[k] -= self.c_prime[k] * y[k + 1];
        }
        y
    }

    fn solve(&self, r: &mut [C64]) {
        let n = self.n;
        r[0] /= self.denom[0];
        for k in 1..n {
            r[k] = (r[k] - r[k - 1]) / self.denom[k];
        }
        for k in (0..n - 1).rev() {
            let next = r[k + 1];
            r[k] -= next * self.c_prime[k];
        }
        let vy = r[0] + r[n - 1] / self.gamma;
        let vz = self.z[0] + self.z[n - 1] / self.gamma;
        let f = vy / (1.0 + vz);
        for k in 0..n {
            r[k] -= f * self.z[k];
        }
    }
}
