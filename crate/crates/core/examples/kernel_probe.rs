//! Scratch micro-timings for the step kernels at criterion-5 shapes.

use qbayes::linalg::*;
use std::time::Instant;

fn timeit(label: &str, reps: usize, mut f: impl FnMut()) {
    let t = Instant::now();
    for _ in 0..reps {
        f();
    }
    println!("{label}: {:?}/rep", t.elapsed() / reps as u32);
}

fn main() {
    let a3 = Mat::from_fn(51, 256, |i, j| ((i * 256 + j) as f64 * 0.01).sin());
    let w4 = Mat::from_fn(2000, 256, |i, j| ((i * 256 + j) as f64 * 0.003).cos());
    let d4 = Mat::from_fn(51, 2000, |i, j| ((i * 2000 + j) as f64 * 0.0007).sin());
    let w3 = Mat::from_fn(256, 256, |i, j| ((i + j) as f64 * 0.01).cos());
    let d4t = d4.transpose();

    let mut logits = Mat::zeros(51, 2000);
    timeit("fwd L4 nt (51x256 * 2000x256^T)", 50, || {
        matmul_nt_into(&mut logits, &a3, &w4)
    });

    let mut d3 = Mat::zeros(51, 256);
    timeit("bwd D3 nn (51x2000 * 2000x256)", 50, || {
        matmul_nn_into(&mut d3, &d4, &w4)
    });

    let mut g4 = Mat::zeros(2000, 256);
    timeit("grad G4 nn (2000x51 * 51x256)", 50, || {
        matmul_nn_into(&mut g4, &d4t, &a3)
    });

    let mut d4t_buf = Mat::zeros(2000, 51);
    timeit("transpose 51x2000", 200, || transpose_into(&mut d4t_buf, &d4));

    let mut h2 = Mat::zeros(51, 256);
    timeit("fwd L2 nt (51x256 * 256x256^T)", 200, || {
        matmul_nt_into(&mut h2, &a3, &w3)
    });

    // softmax-equivalent cost: exp over 51x2000
    let mut buf = logits.clone();
    timeit("exp 51x2000", 50, || {
        for x in buf.data_mut() {
            *x = (*x * 1e-6).exp();
        }
    });

    // adam-equivalent elementwise over 645k params
    let mut w = vec![0.5f64; 645_000];
    let mut m = vec![0.1f64; 645_000];
    let mut v = vec![0.2f64; 645_000];
    let g = vec![0.01f64; 645_000];
    timeit("adam-ish 645k", 50, || {
        for i in 0..w.len() {
            m[i] = 0.9 * m[i] + 0.1 * g[i];
            v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
            w[i] -= 0.001 * (m[i] / 0.9) / ((v[i] / 0.99).sqrt() + 1e-8);
        }
    });
    let s: f64 = w.iter().sum::<f64>() + logits.data().iter().sum::<f64>() + d3.data().iter().sum::<f64>() + g4.data().iter().sum::<f64>();
    println!("(sink {s:.3e})");
}
