//! Orthonormal polynomials of a Jacobi family and everything built from
//! their three-term recurrence: derivatives, Christoffel–Darboux kernels,
//! Gauss rules with kernel weights, Wronskians, and minimal solutions.
//!
//! `p_0 = 1`, `p_1 = (z − b_0)/a_0`, and
//! `a_k p_{k+1} = (z − b_k) p_k − a_{k-1} p_{k-1}`. For unbounded families
//! these values sweep hundreds of decades across one evaluation, so every
//! walker here carries an explicit `log_scale`: the pair `(u, v)` stands for
//! `(u, v) · exp(log_scale)` and is kept with `max(|u|, |v|)` in `[1/2, 2]`.

use crate::params::JacobiFamily;
use crate::spectra::{self, SpectraError};
use num_complex::Complex64;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrthoError {
    #[error("evaluation point must be off the real axis (got {0})")]
    RealShift(Complex64),
    #[error("backward recurrence depth {0} must exceed the requested output range {1}")]
    DepthTooShallow(usize, usize),
}

/// Consecutive solution values `(u_n, v_n) = (value at n, value at n+1)`
/// under a shared power-of-e scale: true values are `u · exp(log_scale)` and
/// `v · exp(log_scale)`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledPair {
    pub u: Complex64,
    pub v: Complex64,
    pub log_scale: f64,
}

impl ScaledPair {
    /// The represented values without the scale guard. Overflows to ∞ when
    /// the true magnitude exceeds f64 range; fine for moderate `log_scale`.
    pub fn unscaled(&self) -> (Complex64, Complex64) {
        let s = self.log_scale.exp();
        (self.u * s, self.v * s)
    }
}

/// `(p_n, p_{n+1}, p'_n, p'_{n+1})` under one shared scale.
#[derive(Clone, Copy, Debug)]
pub struct ScaledQuad {
    pub p_n: Complex64,
    pub p_n1: Complex64,
    pub dp_n: Complex64,
    pub dp_n1: Complex64,
    pub log_scale: f64,
}

/// One solution value with its own scale: `value · exp(log_scale)`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledValue {
    pub value: Complex64,
    pub log_scale: f64,
}

impl ScaledValue {
    pub fn magnitude_log(&self) -> f64 {
        self.value.norm().ln() + self.log_scale
    }
}

#[inline]
fn renorm2(u: &mut Complex64, v: &mut Complex64, log_scale: &mut f64) {
    let m2 = u.norm_sqr().max(v.norm_sqr());
    if !(0.25..=4.0).contains(&m2) && m2 > 0.0 && m2.is_finite() {
        let m = m2.sqrt();
        *u /= m;
        *v /= m;
        *log_scale += m.ln();
    }
}

/// Roll an arbitrary solution of the recurrence from `(w_0, w_1)` up to
/// `(w_n, w_{n+1})`. The orthonormal polynomials are the special case
/// `(1, (z − b_0)/a_0)`; second-kind solutions start from `(0, 1/a_0)`.
pub fn eval_solution(
    family: &JacobiFamily,
    n: usize,
    z: Complex64,
    w0: Complex64,
    w1: Complex64,
) -> ScaledPair {
    let mut u = w0;
    let mut v = w1;
    let mut ls = 0.0f64;
    renorm2(&mut u, &mut v, &mut ls);
    for k in 1..=n {
        let w = ((z - family.b(k)) * v - family.a(k - 1) * u) / family.a(k);
        u = v;
        v = w;
        renorm2(&mut u, &mut v, &mut ls);
    }
    ScaledPair { u, v, log_scale: ls }
}

/// `(p_n, p_{n+1})` at `z`, scaled.
pub fn eval_pn(family: &JacobiFamily, n: usize, z: Complex64) -> ScaledPair {
    let p1 = (z - family.b(0)) / family.a(0);
    eval_solution(family, n, z, Complex64::new(1.0, 0.0), p1)
}

/// `(p_n, p_{n+1})` and their `z`-derivatives under one scale. The joint
/// recurrence `a_k p'_{k+1} = (z − b_k) p'_k + p_k − a_{k-1} p'_{k-1}` is run
/// in lockstep with the values so both sides share the renormalization.
pub fn eval_pn_derivative(family: &JacobiFamily, n: usize, z: Complex64) -> ScaledQuad {
    let a0 = family.a(0);
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = (z - family.b(0)) / a0;
    let mut dp = Complex64::new(0.0, 0.0);
    let mut dq = Complex64::new(1.0 / a0, 0.0);
    let mut ls = 0.0f64;
    for k in 1..=n {
        let ak = family.a(k);
        let akm = family.a(k - 1);
        let zb = z - family.b(k);
        let nq = (zb * q - akm * p) / ak;
        let ndq = (zb * dq + q - akm * dp) / ak;
        p = q;
        q = nq;
        dp = dq;
        dq = ndq;
        // Scale is steered by the values; derivatives ride along. Their
        // ratio to the values stays polynomially bounded, which f64's
        // exponent range absorbs without further guards.
        let m2 = p.norm_sqr().max(q.norm_sqr());
        if !(0.25..=4.0).contains(&m2) && m2 > 0.0 && m2.is_finite() {
            let m = m2.sqrt();
            p /= m;
            q /= m;
            dp /= m;
            dq /= m;
            ls += m.ln();
        }
    }
    ScaledQuad { p_n: p, p_n1: q, dp_n: dp, dp_n1: dq, log_scale: ls }
}

/// Diagonal Christoffel–Darboux kernel `K_n(x, x) = Σ_{k=0}^{n} p_k(x)²`.
///
/// Accumulated against a running log offset, so the partial sums never
/// overflow internally; the return value itself may be `+∞` when the true
/// kernel exceeds f64 range (far outside the essential spectrum).
pub fn cd_kernel_diag(family: &JacobiFamily, n: usize, x: f64) -> f64 {
    cd_kernel_diag_log(family, n, x).exp()
}

/// `ln K_n(x, x)`; the overflow-free form of [`cd_kernel_diag`].
pub fn cd_kernel_diag_log(family: &JacobiFamily, n: usize, x: f64) -> f64 {
    // acc · exp(off) = Σ so far, with acc kept in [1, ~e^60].
    let mut acc = 1.0f64; // p_0² = 1
    let mut off = 0.0f64;
    let mut u = 1.0f64;
    let mut v = (x - family.b(0)) / family.a(0);
    let mut ls = 0.0f64;
    let push = |acc: &mut f64, off: &mut f64, t: f64| {
        if t > *off + 60.0 {
            *acc = *acc * (*off - t).exp() + 1.0;
            *off = t;
        } else {
            *acc += (t - *off).exp();
        }
        if *acc > 1e300 {
            *off += acc.ln();
            *acc = 1.0;
        }
    };
    // Entering iteration k, (u, v) = (p_{k−1}, p_k) · e^{ls}; the push folds
    // in p_k², so k = 1..=n together with the seeded p_0² covers the sum.
    for k in 1..=n {
        if v != 0.0 {
            push(&mut acc, &mut off, 2.0 * (v.abs().ln() + ls));
        }
        let w = ((x - family.b(k)) * v - family.a(k - 1) * u) / family.a(k);
        u = v;
        v = w;
        let m = u.abs().max(v.abs());
        if (m > 2.0 || m < 0.5) && m > 0.0 && m.is_finite() {
            u /= m;
            v /= m;
            ls += m.ln();
        }
    }
    acc.ln() + off
}

/// Gauss rule of a family: `n+1` nodes (zeros of `p_{n+1}`), kernel weights.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Kernel order: the rule integrates polynomials up to degree
    /// `2 · order + 1` exactly against the orthogonality measure.
    pub order: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,weight\n");
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let _ = writeln!(s, "{x},{w}");
        }
        s
    }
}

/// Nodes are eigenvalues of the `(n+1) × (n+1)` truncation polished by two
/// Newton steps on `p_{n+1}`; weights are `1/K_n(y, y)`.
pub fn gauss_quadrature(family: &JacobiFamily, n: usize) -> Result<QuadratureRule, SpectraError> {
    let (lo, hi) = spectra::gershgorin_bounds(family, n + 1);
    let tol = (hi - lo).max(1.0) * 1e-14;
    let spec = spectra::eigenvalues(family, n + 1, tol)?;
    let mut nodes = spec.eigenvalues;
    for y in nodes.iter_mut() {
        for _ in 0..2 {
            let q = eval_pn_derivative(family, n, Complex64::new(*y, 0.0));
            // p_{n+1} and p'_{n+1} share a scale, so the Newton step is
            // scale-free.
            let step = q.p_n1.re / q.dp_n1.re;
            if step.is_finite() {
                *y -= step;
            }
        }
    }
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&y| (-cd_kernel_diag_log(family, n, y)).exp())
        .collect();
    Ok(QuadratureRule { nodes, weights, order: n })
}

/// `a_n (u_{n-1} v_n − u_n v_{n-1})` for raw consecutive values.
pub fn wronskian(u: (Complex64, Complex64), v: (Complex64, Complex64), a_n: f64) -> Complex64 {
    a_n * (u.0 * v.1 - u.1 * v.0)
}

/// Wronskian of two scaled pairs taken at the same index; returns the value
/// and the combined log scale (true Wronskian = `value · exp(log_scale)`).
pub fn wronskian_scaled(u: &ScaledPair, v: &ScaledPair, a_n: f64) -> (Complex64, f64) {
    (wronskian((u.u, u.v), (v.u, v.v), a_n), u.log_scale + v.log_scale)
}

/// Minimal (decaying) solution of the recurrence at a non-real point,
/// normalized to 1 at index 0.
#[derive(Clone, Debug)]
pub struct MinimalSolution {
    /// Entries `0..=n_out`, each with its own scale.
    pub values: Vec<ScaledValue>,
    /// Largest relative disagreement between the `n_back` and `2 n_back`
    /// runs over the reported range.
    pub instability: f64,
    /// `instability <= rel_tol`.
    pub stable: bool,
}

/// Default backward-start depth for a requested output range.
pub fn default_backward_depth(n_out: usize) -> usize {
    4 * n_out + 200
}

/// Backward (Miller-style) recurrence from a far tail seed `(0, 1)` at
/// `n_back`: whatever mixture the seed has, the backward direction amplifies
/// only the minimal solution's component, and the start-up error is washed
/// out geometrically. The run is repeated from `2 n_back` and the two are
/// compared entrywise; `stable` records whether they agree to `rel_tol`.
pub fn minimal_solution(
    family: &JacobiFamily,
    z: Complex64,
    n_back: usize,
    n_out: usize,
    rel_tol: f64,
) -> Result<MinimalSolution, OrthoError> {
    if z.im == 0.0 {
        return Err(OrthoError::RealShift(z));
    }
    if n_back <= n_out + 1 {
        return Err(OrthoError::DepthTooShallow(n_back, n_out));
    }
    let run = |depth: usize| -> Vec<ScaledValue> {
        let mut upper = Complex64::new(0.0, 0.0); // value at k+1
        let mut cur = Complex64::new(1.0, 0.0); // value at k
        let mut ls = 0.0f64;
        let mut out = vec![ScaledValue { value: Complex64::default(), log_scale: 0.0 }; n_out + 1];
        let mut k = depth;
        while k >= 1 {
            let prev = ((z - family.b(k)) * cur - family.a(k) * upper) / family.a(k - 1);
            upper = cur;
            cur = prev;
            renorm2(&mut cur, &mut upper, &mut ls);
            k -= 1;
            if k <= n_out {
                out[k] = ScaledValue { value: cur, log_scale: ls };
            }
            if k + 1 <= n_out {
                // Entry k+1 may have been rescaled since it was stored.
                out[k + 1] = ScaledValue { value: upper, log_scale: ls };
            }
        }
        // Normalize to 1 at index 0.
        let v0 = out[0];
        for e in out.iter_mut() {
            e.value /= v0.value;
            e.log_scale -= v0.log_scale;
        }
        out
    };
    let first = run(n_back);
    let second = run(2 * n_back);
    let mut worst = 0.0f64;
    for (a, b) in first.iter().zip(second.iter()) {
        let ratio = (b.value / a.value) * (b.log_scale - a.log_scale).exp();
        let rel = (ratio - 1.0).norm();
        if rel.is_finite() {
            worst = worst.max(rel);
        } else {
            worst = f64::INFINITY;
        }
    }
    Ok(MinimalSolution { values: second, instability: worst, stable: worst <= rel_tol })
}
