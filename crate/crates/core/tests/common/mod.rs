//! Shared test support: an independent dense eigensolver used as an oracle
//! for the Sturm-bisection spectra. Deliberately naive — cyclic Jacobi
//! rotations on the full symmetric matrix — so its correctness is auditable
//! at a glance and shares no code path with the implementation under test.

use jspec_core::JacobiFamily;

/// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal
/// and off-diagonal, by cyclic Jacobi rotations until the off-diagonal
/// Frobenius mass is below `1e−14` of the total. Ascending.
pub fn dense_tridiag_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(off.len() + 1 == n || (n == 0 && off.is_empty()));
    if n == 0 {
        return Vec::new();
    }
    let mut a = vec![0.0f64; n * n];
    for (i, &d) in diag.iter().enumerate() {
        a[i * n + i] = d;
    }
    for (i, &e) in off.iter().enumerate() {
        a[i * n + i + 1] = e;
        a[(i + 1) * n + i] = e;
    }
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-14 * fro.max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off_sq.sqrt() <= target {
            let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return eig;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                // Classical 2×2 symmetric Schur decomposition.
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    panic!("dense Jacobi rotations did not converge in 60 sweeps (n = {n})");
}

/// Dense-oracle eigenvalues of the size-`n` truncation of a family.
#[allow(dead_code)]
pub fn dense_family_eigenvalues(family: &JacobiFamily, n: usize) -> Vec<f64> {
    let diag: Vec<f64> = (0..n).map(|k| family.b(k)).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1)).map(|k| family.a(k)).collect();
    dense_tridiag_eigenvalues(&diag, &off)
}
