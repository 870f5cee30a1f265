//! Collective-spin rotations about J_y in the J_z eigenbasis.
//!
//! For N qubits restricted to the symmetric subspace (spin j = N/2), the
//! generator J_y is a tridiagonal Hermitian matrix with purely imaginary
//! entries, so exp(-i theta J_y) is real orthogonal. We diagonalize once per N
//! and evaluate rotations for any angle from the spectral data: conjugating
//! J_y by the diagonal phase matrix diag(i^a) turns it into the real symmetric
//! J_x matrix, whose eigenpairs (lambda_k, V) give
//!
//!   R(theta)_ab = Re[ i^(b-a) * sum_k V_ak V_bk exp(-i theta lambda_k) ].

use crate::linalg::{matmul_nt, Mat};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Unit imaginary raised to `p mod 4`.
#[inline]
fn i_pow(p: usize) -> Complex64 {
    match p % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Unit imaginary raised to `-p mod 4`.
#[inline]
fn i_pow_neg(p: usize) -> Complex64 {
    i_pow((4 - p % 4) % 4)
}

/// Cached spectral decomposition of J_x for spin j = N/2.
///
/// Construction is O(dim^3); every rotation afterwards is O(dim^3) for the
/// full matrix and O(dim^2) for rotating a fixed pure state.
#[derive(Debug, Clone)]
pub struct SpinRotor {
    dim: usize,
    eigenvalues: Vec<f64>,
    /// Row-major, `vectors[a][k]` = component a of eigenvector k.
    vectors: Mat,
}

impl SpinRotor {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "need at least one qubit");
        let dim = n_qubits + 1;
        let j = n_qubits as f64 / 2.0;
        let mut jx = DMatrix::<f64>::zeros(dim, dim);
        for k in 0..dim - 1 {
            let mu = k as f64 - j;
            let x = 0.5 * (j * (j + 1.0) - mu * (mu + 1.0)).sqrt();
            jx[(k + 1, k)] = x;
            jx[(k, k + 1)] = x;
        }
        let eig = SymmetricEigen::new(jx);
        let eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let vectors = Mat::from_fn(dim, dim, |a, k| eig.eigenvectors[(a, k)]);
        SpinRotor { dim, eigenvalues, vectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The full real orthogonal matrix exp(-i theta J_y).
    pub fn rotation(&self, theta: f64) -> Mat {
        let d = self.dim;
        let mut vc = Mat::zeros(d, d);
        let mut vs = Mat::zeros(d, d);
        for a in 0..d {
            for k in 0..d {
                let (s, c) = (theta * self.eigenvalues[k]).sin_cos();
                let v = self.vectors[(a, k)];
                vc[(a, k)] = v * c;
                vs[(a, k)] = v * s;
            }
        }
        let cos_part = matmul_nt(&vc, &self.vectors);
        let sin_part = matmul_nt(&vs, &self.vectors);
        // R_ab = i^(b-a) (C_ab - i S_ab); parity structure makes it real.
        Mat::from_fn(d, d, |a, b| match (b + 4 * d - a) % 4 {
            0 => cos_part[(a, b)],
            1 => sin_part[(a, b)],
            2 => -cos_part[(a, b)],
            _ => -sin_part[(a, b)],
        })
    }

    /// Precomputes the eigenbasis projection w_k = sum_b i^b V_bk c_b of a
    /// pure state, so repeated rotations cost O(dim^2).
    pub fn carrier(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(amplitudes.len(), self.dim);
        let d = self.dim;
        let mut w = vec![Complex64::ZERO; d];
        for (b, amp) in amplitudes.iter().enumerate() {
            let phase = i_pow(b);
            let row = self.vectors.row(b);
            for k in 0..d {
                w[k] += phase * row[k] * amp;
            }
        }
        w
    }

    /// Amplitudes of exp(-i theta J_y) applied to the state behind `carrier`.
    pub fn rotate_carrier(&self, carrier: &[Complex64], theta: f64) -> Vec<Complex64> {
        assert_eq!(carrier.len(), self.dim);
        let d = self.dim;
        let phase: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| {
                let (s, c) = (theta * l).sin_cos();
                Complex64::new(c, -s)
            })
            .collect();
        let mut out = vec![Complex64::ZERO; d];
        for (a, slot) in out.iter_mut().enumerate() {
            let row = self.vectors.row(a);
            let mut acc = Complex64::ZERO;
            for k in 0..d {
                acc += row[k] * phase[k] * carrier[k];
            }
            *slot = i_pow_neg(a) * acc;
        }
        out
    }
}

/// The (N+1)x(N+1) matrix of exp(-i theta J_y) in the J_z eigenbasis,
/// with basis states ordered by increasing J_z eigenvalue.
pub fn wigner_rotation(n_qubits: usize, theta: f64) -> Mat {
    SpinRotor::new(n_qubits).rotation(theta)
}
