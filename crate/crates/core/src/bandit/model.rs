use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Online logistic regression on a soft target, one gradient step per observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineLogistic {
    pub weights: Vec<f64>,
    pub updates: u64,
}

impl OnlineLogistic {
    pub fn new(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            updates: 0,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.weights.iter().zip(x).map(|(w, v)| w * v).sum())
    }

    /// Cross-entropy gradient step. The L2 penalty is spread over the
    /// observations seen so far so it acts like a prior rather than a per-step decay.
    pub fn step(&mut self, x: &[f64], target: f64, lr: f64, l2: f64) {
        self.updates += 1;
        let err = self.predict(x) - target;
        let shrink = l2 / self.updates as f64;
        for (w, &v) in self.weights.iter_mut().zip(x) {
            *w -= lr * (err * v + shrink * *w);
        }
    }
}

/// Inverse of `λI + Σ xxᵀ`, kept current with rank-one Sherman-Morrison updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversePrecision {
    pub dim: usize,
    pub inv: Vec<f64>,
}

impl InversePrecision {
    pub fn new(dim: usize, lambda: f64) -> Self {
        let mut inv = vec![0.0; dim * dim];
        for i in 0..dim {
            inv[i * dim + i] = 1.0 / lambda;
        }
        Self { dim, inv }
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let row = &self.inv[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `xᵀ A⁻¹ x`
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.mul(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn add_outer(&mut self, x: &[f64]) {
        let u = self.mul(x);
        let denom = 1.0 + u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let d = self.dim;
        for i in 0..d {
            let ui = u[i] / denom;
            if ui == 0.0 {
                continue;
            }
            for j in 0..d {
                self.inv[i * d + j] -= ui * u[j];
            }
        }
    }
}
