//! Minimal row-major matrix type and the few dense kernels the crate needs.
//!
//! The hot paths of the crate (classifier training, posterior tables, the
//! prior fixed-point iteration) only require matrix products in the form
//! `A * B^T` plus transposes and mat-vec. The kernels below are written with a
//! fixed accumulation order so results are bit-identical between the
//! sequential build and any rayon thread count.

use crate::par;
use std::ops::{Index, IndexMut};

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        Mat { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        transpose_into(&mut out, self);
        out
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Fused multiply-add when the build target has hardware FMA; plain mul+add
/// otherwise (a softfloat `fma` call would be far slower than two ops).
/// Either way the kernel's operation order is fixed.
#[inline(always)]
fn madd(acc: f64, x: f64, y: f64) -> f64 {
    #[cfg(target_feature = "fma")]
    {
        x.mul_add(y, acc)
    }
    #[cfg(not(target_feature = "fma"))]
    {
        acc + x * y
    }
}

/// Dot product with sixteen independent accumulators (fixed order, SIMD-friendly).
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n16 = a.len() & !15;
    let mut acc = [0.0f64; 16];
    for (ca, cb) in a[..n16].chunks_exact(16).zip(b[..n16].chunks_exact(16)) {
        for k in 0..16 {
            acc[k] = madd(acc[k], ca[k], cb[k]);
        }
    }
    let mut tail = 0.0;
    for (x, y) in a[n16..].iter().zip(&b[n16..]) {
        tail = madd(tail, *x, *y);
    }
    let mut half = [0.0f64; 8];
    for k in 0..8 {
        half[k] = acc[k] + acc[k + 8];
    }
    (((half[0] + half[1]) + (half[2] + half[3])) + ((half[4] + half[5]) + (half[6] + half[7])))
        + tail
}

/// Below this many multiply-adds a kernel runs sequentially to avoid
/// thread-pool overhead on the many small steps of small-network training.
const PAR_THRESHOLD: usize = 1 << 18;

/// Column tile: keeps the active block of `b` rows resident in L2.
const TILE_J: usize = 64;

/// `c = a * b^T`, where all three are row-major (`c` is `a.rows x b.rows`).
pub fn matmul_nt_into(c: &mut Mat, a: &Mat, b: &Mat) {
    assert_eq!(a.cols, b.cols, "inner dimensions must agree");
    assert_eq!(c.rows, a.rows);
    assert_eq!(c.cols, b.rows);
    let work = a.rows * a.cols * b.rows;
    let threads = par::thread_count();
    let rows_per_chunk = if work >= PAR_THRESHOLD && threads > 1 {
        a.rows.div_ceil(threads).max(1)
    } else {
        a.rows.max(1)
    };
    let cols = c.cols;
    let a_cols = a.cols;
    let a_data = &a.data;
    let b_ref = b;
    par::for_each_chunk_mut(&mut c.data, rows_per_chunk * cols, |chunk_idx, chunk| {
        let row0 = chunk_idx * rows_per_chunk;
        let n_rows = chunk.len() / cols;
        for jb in (0..b_ref.rows).step_by(TILE_J) {
            let j_end = (jb + TILE_J).min(b_ref.rows);
            for r in 0..n_rows {
                let a_row = &a_data[(row0 + r) * a_cols..(row0 + r + 1) * a_cols];
                let c_row = &mut chunk[r * cols..(r + 1) * cols];
                for j in jb..j_end {
                    c_row[j] = dot(a_row, b_ref.row(j));
                }
            }
        }
    });
}

pub fn matmul_nt(a: &Mat, b: &Mat) -> Mat {
    let mut c = Mat::zeros(a.rows, b.rows);
    matmul_nt_into(&mut c, a, b);
    c
}

#[inline]
fn axpy(coeff: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = madd(*yi, coeff, *xi);
    }
}

/// `c = a * b` with row-major operands (`c` is `a.rows x b.cols`), organized
/// as row-accumulated axpy so `b` streams through cache once per row chunk.
/// Rows of `a` that are entirely zero skip their work; the result is
/// unchanged by the skip because all operands are finite.
pub fn matmul_nn_into(c: &mut Mat, a: &Mat, b: &Mat) {
    assert_eq!(a.cols, b.rows, "inner dimensions must agree");
    assert_eq!(c.rows, a.rows);
    assert_eq!(c.cols, b.cols);
    let work = a.rows * a.cols * b.cols;
    let threads = par::thread_count();
    let rows_per_chunk = if work >= PAR_THRESHOLD && threads > 1 {
        a.rows.div_ceil(threads).max(1)
    } else {
        a.rows.max(1)
    };
    let cols = c.cols;
    let a_cols = a.cols;
    let a_data = &a.data;
    let b_ref = b;
    par::for_each_chunk_mut(&mut c.data, rows_per_chunk * cols, |chunk_idx, chunk| {
        let row0 = chunk_idx * rows_per_chunk;
        let n_rows = chunk.len() / cols;
        for r in 0..n_rows {
            let a_row = &a_data[(row0 + r) * a_cols..(row0 + r + 1) * a_cols];
            let c_row = &mut chunk[r * cols..(r + 1) * cols];
            c_row.fill(0.0);
            for (k, &coeff) in a_row.iter().enumerate() {
                if coeff != 0.0 {
                    axpy(coeff, b_ref.row(k), c_row);
                }
            }
        }
    });
}

/// `out = m * v` (row-major mat-vec, parallel over rows for large `m`).
pub fn matvec_into(out: &mut [f64], m: &Mat, v: &[f64]) {
    assert_eq!(m.cols, v.len());
    assert_eq!(out.len(), m.rows);
    let work = m.rows * m.cols;
    let threads = par::thread_count();
    let rows_per_chunk = if work >= PAR_THRESHOLD && threads > 1 {
        m.rows.div_ceil(threads).max(1)
    } else {
        m.rows.max(1)
    };
    let m_ref = &*m;
    par::for_each_chunk_mut(out, rows_per_chunk, |chunk_idx, chunk| {
        let row0 = chunk_idx * rows_per_chunk;
        for (r, slot) in chunk.iter_mut().enumerate() {
            *slot = dot(m_ref.row(row0 + r), v);
        }
    });
}

/// Blocked transpose, `out = m^T`.
pub fn transpose_into(out: &mut Mat, m: &Mat) {
    assert_eq!(out.rows, m.cols);
    assert_eq!(out.cols, m.rows);
    const B: usize = 32;
    for rb in (0..m.rows).step_by(B) {
        for cb in (0..m.cols).step_by(B) {
            for r in rb..(rb + B).min(m.rows) {
                for c in cb..(cb + B).min(m.cols) {
                    out.data[c * out.cols + r] = m.data[r * m.cols + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_nt(a: &Mat, b: &Mat) -> Mat {
        Mat::from_fn(a.rows(), b.rows(), |i, j| {
            (0..a.cols()).map(|k| a[(i, k)] * b[(j, k)]).sum()
        })
    }

    #[test]
    fn matmul_nt_matches_naive() {
        let a = Mat::from_fn(7, 13, |i, j| (i as f64 + 1.0) * 0.3 - j as f64 * 0.11);
        let b = Mat::from_fn(9, 13, |i, j| (j as f64 - 4.0) * 0.07 + i as f64 * 0.2);
        let c = matmul_nt(&a, &b);
        let expect = naive_nt(&a, &b);
        for i in 0..7 {
            for j in 0..9 {
                assert!((c[(i, j)] - expect[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_nn_matches_naive() {
        let a = Mat::from_fn(6, 11, |i, j| ((i * 11 + j) as f64 * 0.713).sin());
        let b = Mat::from_fn(11, 8, |i, j| ((i * 8 + j) as f64 * 0.219).cos());
        let mut c = Mat::zeros(6, 8);
        matmul_nn_into(&mut c, &a, &b);
        for i in 0..6 {
            for j in 0..8 {
                let expect: f64 = (0..11).map(|k| a[(i, k)] * b[(k, j)]).sum();
                assert!((c[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transpose_round_trip() {
        let a = Mat::from_fn(41, 67, |i, j| (i * 67 + j) as f64);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn matvec_matches_rows() {
        let m = Mat::from_fn(100, 33, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let v: Vec<f64> = (0..33).map(|k| (k as f64).sin()).collect();
        let mut out = vec![0.0; 100];
        matvec_into(&mut out, &m, &v);
        for r in 0..100 {
            assert!((out[r] - dot(m.row(r), &v)).abs() < 1e-12);
        }
    }
}
