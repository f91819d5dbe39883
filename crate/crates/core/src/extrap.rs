//! Small shared extrapolation helpers: Neville evaluation at zero and a
//! tail-convergence test, used by the discriminant limits and the boundary
//! density limits.

use num_complex::Complex64;

/// Neville's scheme for the interpolating polynomial through
/// `(t_i, y_i)`, evaluated at `t = 0`. Nodes must be pairwise distinct.
pub(crate) fn neville_at_zero(ts: &[f64], ys: &[Complex64]) -> Complex64 {
    assert_eq!(ts.len(), ys.len());
    assert!(!ts.is_empty());
    let mut q: Vec<Complex64> = ys.to_vec();
    let n = q.len();
    for level in 1..n {
        for i in 0..n - level {
            let t0 = ts[i];
            let t1 = ts[i + level];
            // P_{i..i+level}(0) from the two children.
            q[i] = (q[i + 1] * (-t0) - q[i] * (-t1)) / (t1 - t0);
        }
    }
    q[0]
}

pub(crate) fn neville_at_zero_real(ts: &[f64], ys: &[f64]) -> f64 {
    let cs: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(y, 0.0)).collect();
    neville_at_zero(ts, &cs).re
}

/// [`tail_is_settling_with_floor`] with the noise floor taken relative to
/// the largest sample, `1e−8 · max |yᵢ|`.
pub(crate) fn tail_is_settling(values: &[Complex64]) -> bool {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    tail_is_settling_with_floor(values, 1e-8 * scale)
}

/// Cheap certificate that a sampled sequence has settled toward a limit.
/// Over the tail half of the samples the successive differences must either
/// all sit below the noise floor, or shrink: no single step may grow by more
/// than ×1.5 (local wobble), and the last difference must come in under 90%
/// of the first (net decay — this is what rejects polynomial and logarithmic
/// divergence, whose steps never shrink).
pub(crate) fn tail_is_settling_with_floor(values: &[Complex64], floor: f64) -> bool {
    if values.len() < 3 {
        return true;
    }
    let floor = floor.max(1e-300);
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let k = diffs.len();
    let start = k / 2;
    if (start..k).all(|i| diffs[i] <= floor) {
        return true;
    }
    let per_step = (start..k - 1).all(|i| diffs[i + 1] <= diffs[i] * 1.5 + floor);
    let net = diffs[k - 1] <= 0.9 * diffs[start].max(floor) + floor;
    per_step && net
}
