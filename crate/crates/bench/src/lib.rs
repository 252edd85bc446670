//! Fixtures shared by the benchmarks.

use fhl_core::{Complex64, HermitianMatrix};

/// Deterministic dense Hermitian matrix of order `n` with a spread spectrum.
pub fn hermitian_fixture(n: usize) -> HermitianMatrix {
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        data[i * n + i] = Complex64::new(1.0 + i as f64, 0.0);
        for j in i + 1..n {
            let t = (i * 31 + j * 17) as f64;
            let v = Complex64::new(t.sin(), (0.5 * t).cos()) / (1.0 + (j - i) as f64);
            data[i * n + j] = v;
            data[j * n + i] = v.conj();
        }
    }
    HermitianMatrix::new(n, data).expect("fixture is Hermitian")
}
