//! Scalar reference implementations for real-valued 1D signals.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub type Rows = Vec<Vec<(usize, f64)>>;

pub fn gaussian_kernel(support: usize, sigma: f64) -> Vec<f64> {
    let c = (support / 2) as f64;
    let w: Vec<f64> = (0..support)
        .map(|k| (-(k as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Centered convolution with taps outside the signal dropped and each row
/// renormalized.
pub fn conv_rows(kernel: &[f64], n: usize) -> Rows {
    let c = (kernel.len() / 2) as i64;
    (0..n as i64)
        .map(|i| {
            let row: Vec<(usize, f64)> = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| (i + k as i64 - c, *w))
                .filter(|(j, _)| *j >= 0 && *j < n as i64)
                .map(|(j, w)| (j as usize, w))
                .collect();
            let s: f64 = row.iter().map(|(_, w)| w).sum();
            row.into_iter().map(|(j, w)| (j, w / s)).collect()
        })
        .collect()
}

pub fn apply(rows: &Rows, u: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| r.iter().map(|(j, w)| w * u[*j]).sum()).collect()
}

pub fn tv(u: &[f64], lambda: f64) -> f64 {
    lambda * u.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
}

pub fn tv2(u: &[f64], mu: f64) -> f64 {
    mu * u.windows(3).map(|w| (w[1] - 0.5 * (w[0] + w[2])).abs()).sum::<f64>()
}

pub struct Flat {
    pub rows: Rows,
    pub f: Vec<f64>,
    pub lambda: f64,
    pub p: f64,
}

impl Flat {
    fn residual(&self, i: usize, u: &[f64]) -> f64 {
        self.rows[i].iter().map(|(j, w)| w * u[*j]).sum::<f64>() - self.f[i]
    }

    fn dphi(&self, r: f64) -> f64 {
        if r == 0.0 {
            0.0
        } else {
            self.p * r.abs().powf(self.p - 1.0) * r.signum()
        }
    }

    pub fn functional(&self, u: &[f64]) -> f64 {
        (0..self.rows.len())
            .map(|i| self.residual(i, u).abs().powf(self.p))
            .sum::<f64>()
            + tv(u, self.lambda)
    }

    /// Prox of `tau·λ·TV`: even edges, then odd edges.
    pub fn tv_sweep(&self, u: &mut [f64], tau: f64) {
        for parity in 0..2 {
            for k in (parity..u.len().saturating_sub(1)).step_by(2) {
                self.edge_prox(u, k, k + 1, tau);
            }
        }
    }

    pub fn edge_prox(&self, u: &mut [f64], a: usize, b: usize, tau: f64) {
        let d = u[b] - u[a];
        let s = (tau * self.lambda).min(0.5 * d.abs()) * d.signum();
        u[a] += s;
        u[b] -= s;
    }

    pub fn gfb_iteration(&self, u: &mut [f64], mu: f64) {
        let mut g = vec![0.0; u.len()];
        for i in 0..self.rows.len() {
            let d = self.dphi(self.residual(i, u));
            for (j, w) in &self.rows[i] {
                g[*j] += d * w;
            }
        }
        for (x, gj) in u.iter_mut().zip(&g) {
            *x -= mu * gj;
        }
        self.tv_sweep(u, mu);
    }

    pub fn data_step(&self, u: &mut [f64], i: usize, mu: f64) {
        let d = self.dphi(self.residual(i, u));
        for (j, w) in &self.rows[i] {
            u[*j] -= mu * d * w;
        }
    }

    pub fn traj_iteration(&self, u: &mut [f64], mu: f64) {
        for i in 0..self.rows.len() {
            self.data_step(u, i, mu);
        }
        self.tv_sweep(u, mu);
    }

    /// `argmin_y μ|a·y − f|^p + ½‖y − x‖²` for `p ∈ {1, 2}`.
    pub fn data_prox(&self, u: &mut [f64], i: usize, mu: f64) {
        let r = self.residual(i, u);
        let aa: f64 = self.rows[i].iter().map(|(_, w)| w * w).sum();
        let t = if self.p == 2.0 {
            2.0 * mu * r / (1.0 + 2.0 * mu * aa)
        } else {
            r.signum() * mu.min(r.abs() / aa)
        };
        for (j, w) in &self.rows[i] {
            u[*j] -= t * w;
        }
    }

    pub fn cppa_iteration(&self, u: &mut [f64], mu: f64) {
        for i in 0..self.rows.len() {
            self.data_prox(u, i, mu);
        }
        self.tv_sweep(u, mu);
    }

    /// Minimizer of `‖Au − f‖² + λ‖Du‖₁` by ADMM on `z = Du`.
    pub fn admm_minimizer(&self, iterations: usize) -> Vec<f64> {
        assert_eq!(self.p, 2.0);
        let n = self.f.len();
        let mut a: DMatrix<f64> = DMatrix::zeros(self.rows.len(), n);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, w) in r {
                a[(i, *j)] = *w;
            }
        }
        let mut d: DMatrix<f64> = DMatrix::zeros(n - 1, n);
        for k in 0..n - 1 {
            d[(k, k)] = -1.0;
            d[(k, k + 1)] = 1.0;
        }
        let rho = 1.0;
        let f = DVector::from_column_slice(&self.f);
        let lhs = 2.0 * a.transpose() * &a + rho * d.transpose() * &d;
        let chol = lhs.cholesky().expect("positive definite");
        let atf = 2.0 * a.transpose() * f;
        let mut z: DVector<f64> = DVector::zeros(n - 1);
        let mut w: DVector<f64> = DVector::zeros(n - 1);
        let mut u: DVector<f64> = DVector::zeros(n);
        let shrink = |x: f64, k: f64| x.signum() * (x.abs() - k).max(0.0);
        for _ in 0..iterations {
            u = chol.solve(&(&atf + rho * d.transpose() * (&z - &w)));
            let du = &d * &u;
            z = (&du + &w).map(|x| shrink(x, self.lambda / rho));
            w += du - &z;
        }
        u.iter().copied().collect()
    }
}
