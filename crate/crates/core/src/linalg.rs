//! Small dense linear algebra helpers: symmetric eigensolver and orthonormalization.

use alloc::vec;
use alloc::vec::Vec;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Eigen-decomposition of a symmetric `n × n` row-major matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as rows.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        let scale: f64 = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum::<f64>();
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    (values, vectors)
}

/// Modified Gram-Schmidt, twice, in place. Columns that collapse are replaced by
/// `fallback(i)` before re-orthogonalizing.
pub fn orthonormalize(cols: &mut [Vec<f64>], mut fallback: impl FnMut(usize) -> Vec<f64>) {
    for i in 0..cols.len() {
        for attempt in 0..3 {
            let before = norm(&cols[i]);
            for _ in 0..2 {
                for j in 0..i {
                    let (head, tail) = cols.split_at_mut(i);
                    let proj = dot(&head[j], &tail[0]);
                    for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                        *x -= proj * y;
                    }
                }
            }
            let after = norm(&cols[i]);
            if after > 1e-10 * before.max(1e-300) && after > 1e-300 {
                cols[i].iter_mut().for_each(|x| *x /= after);
                break;
            }
            if attempt == 2 {
                cols[i].iter_mut().for_each(|x| *x = 0.0);
                break;
            }
            cols[i] = fallback(i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_2x2() {
        let (vals, vecs) = symmetric_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vecs[0][0].abs() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(dot(&vecs[0], &vecs[1]).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt() {
        let mut cols = vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![2.0, 2.0, 0.0]];
        orthonormalize(&mut cols, |_| vec![0.0, 0.0, 1.0]);
        for i in 0..3 {
            assert!((norm(&cols[i]) - 1.0).abs() < 1e-12);
            for j in 0..i {
                assert!(dot(&cols[i], &cols[j]).abs() < 1e-12);
            }
        }
    }
}
