//! Transfer matrices of the recurrence, their spectral data, and the
//! asymptotic machinery built on them: Joukowsky branches, eigenvalue pairs
//! with derivative limits, case classification of the periodic base,
//! discriminant limits, the parabolic normal form, and Levinson-type
//! dominance products.
//!
//! Conventions. The one-step matrices are
//! `B_0 = [[0, 1], [−1/a_0, (z−b_0)/a_0]]` and, for `n ≥ 1`,
//! `B_n = [[0, 1], [−a_{n−1}/a_n, (z−b_n)/a_n]]`, so that
//! `(u_n, u_{n+1})ᵀ = B_n (u_{n−1}, u_n)ᵀ`. The block products
//! `X_n = B_{n+N−1} ⋯ B_n` (`n ≥ 1`) advance one full period of the
//! modulation, and `𝔛_n` is their idealized periodic counterpart built from
//! the base `(α, β)` alone.
//!
//! Eigenvalues of a `2×2` matrix `Y` are taken in the resolved form
//! `λ± = √(det Y) · ξ±(tr Y / (2√det Y))`, where `ξ±(w) = w ± 𝔢(w)` are the
//! two roots of `ξ² − 2wξ + 1 = 0` and `𝔢(w) = exp(½ Log(w−1) + ½ Log(w+1))`
//! is the branch of `√(w²−1)` that is continuous across `(−∞, −1)`. With
//! this branch `|ξ⁺| ≥ 1 ≥ |ξ⁻|` everywhere, so `λ⁺` is always the
//! dominant eigenvalue; on the interval `(−1, 1)` the upper-half-plane
//! boundary value is used.

use crate::extrap::{neville_at_zero, tail_is_settling};
use crate::params::{JacobiFamily, PeriodicBase};
use crate::orthopoly::{self, ScaledValue};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("discriminant too close to zero relative to the matrix (|discr| = {discr:.3e}, scale {scale:.3e})")]
    DegenerateDiscriminant { discr: f64, scale: f64 },
    #[error("determinant lies on the closed negative real ray ({0})")]
    NegativeDeterminantRay(Complex64),
    #[error("upper-right entry vanishes; eigenvector columns are undefined")]
    ZeroUpperRight,
    #[error("eigenvector reconstruction error {err:.3e} exceeds 1e-10 · ‖Y‖ = {bound:.3e}")]
    ReconstructionFailed { err: f64, bound: f64 },
    #[error("family is case {0}, not supported by this operation")]
    UnsupportedCase(CaseVariant),
    #[error("family has no tempering sequence")]
    MissingTempering,
    #[error("tempering ratio γ_n/a_n ≈ {0} settles at neither 0 nor 1")]
    AmbiguousTempering(f64),
    #[error("scaled discriminant samples are not settling at z = {0}")]
    NonConvergent(Complex64),
    #[error("sequence limits behind the parabolic data are not settling (residue {0})")]
    UnsettledTail(usize),
    #[error("point is outside the admissible domain: {0}")]
    DomainViolation(String),
    #[error("no admissible start index in [{floor}, {ceiling}] at the probe points")]
    NoAdmissibleStart { floor: usize, ceiling: usize },
    #[error("normal form construction failed: {0}")]
    FrameConstruction(String),
}

// ---------------------------------------------------------------------------
// 2×2 complex matrices

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2C {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2C {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn from_re(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self::from_re(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn tr(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// `tr² − 4 det` in the cancellation-free form
    /// `(m₀₀ − m₁₁)² + 4 m₀₁ m₁₀`. Near-parabolic matrices have
    /// `tr² ≈ 4 det` with both sides O(1), so the textbook form loses all
    /// significant digits exactly where the discriminant matters most.
    pub fn discr(&self) -> Complex64 {
        let d = self.m[0][0] - self.m[1][1];
        d * d + 4.0 * self.m[0][1] * self.m[1][0]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.m.iter().flatten().map(|e| e.norm_sqr()).sum()
    }

    pub fn inv(&self) -> Option<Self> {
        let d = self.det();
        if d.norm_sqr() == 0.0 {
            return None;
        }
        Some(Self::new(
            self.m[1][1] / d,
            -self.m[0][1] / d,
            -self.m[1][0] / d,
            self.m[0][0] / d,
        ))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        out
    }

    pub fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.m[0][0] * v.0 + self.m[0][1] * v.1,
            self.m[1][0] * v.0 + self.m[1][1] * v.1,
        )
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, rhs: Mat2C) -> Mat2C {
        let a = &self.m;
        let b = &rhs.m;
        Mat2C::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, rhs: Mat2C) -> Mat2C {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, rhs: Mat2C) -> Mat2C {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] -= rhs.m[i][j];
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Transfer matrices

/// One-step transfer matrix `B_n(z)`.
pub fn transfer_b(family: &JacobiFamily, n: usize, z: Complex64) -> Mat2C {
    let an = family.a(n);
    let lower_left = if n == 0 { -1.0 / an } else { -family.a(n - 1) / an };
    Mat2C::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(lower_left, 0.0),
        (z - family.b(n)) / an,
    )
}

/// `z`-derivative of `B_n`: only the lower-right entry depends on `z`.
pub fn transfer_b_prime(family: &JacobiFamily, n: usize) -> Mat2C {
    Mat2C::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0 / family.a(n), 0.0),
    )
}

/// One-period product `X_n = B_{n+N−1} ⋯ B_n` (needs `n ≥ 1` so the special
/// first column of `B_0` stays out of the product).
pub fn transfer_x(family: &JacobiFamily, n: usize, z: Complex64) -> Mat2C {
    assert!(n >= 1, "period products start at n = 1");
    let period = family.period();
    let mut x = transfer_b(family, n, z);
    for k in 1..period {
        x = transfer_b(family, n + k, z) * x;
    }
    x
}

/// `z`-derivative of `X_n` by the product rule.
pub fn transfer_x_prime(family: &JacobiFamily, n: usize, z: Complex64) -> Mat2C {
    assert!(n >= 1);
    let period = family.period();
    let mut sum = Mat2C::from_re(0.0, 0.0, 0.0, 0.0);
    for k in 0..period {
        let mut term = transfer_b_prime(family, n + k);
        for j in 0..period {
            if j < k {
                term = term * transfer_b(family, n + j, z);
            } else if j > k {
                term = transfer_b(family, n + j, z) * term;
            }
        }
        sum = sum + term;
    }
    sum
}

/// Idealized periodic one-step matrix `𝔅_j(x) = [[0, 1],
/// [−α_{j−1}/α_j, (x−β_j)/α_j]]` with modular index.
pub fn periodic_b(base: &PeriodicBase, j: i64, x: Complex64) -> Mat2C {
    let aj = base.alpha(j);
    Mat2C::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-base.alpha(j - 1) / aj, 0.0),
        (x - base.beta(j)) / aj,
    )
}

/// One-period product of the idealized matrices, `𝔛_n = 𝔅_{n+N−1} ⋯ 𝔅_n`.
/// Its trace and discriminant do not depend on `n` (cyclic rotations are
/// similar), which is what the classification relies on.
pub fn periodic_x(base: &PeriodicBase, n: i64, x: Complex64) -> Mat2C {
    let period = base.period() as i64;
    let mut out = periodic_b(base, n, x);
    for k in 1..period {
        out = periodic_b(base, n + k, x) * out;
    }
    out
}

/// `x`-derivative of `𝔛_n`.
pub fn periodic_x_prime(base: &PeriodicBase, n: i64, x: Complex64) -> Mat2C {
    let period = base.period() as i64;
    let mut sum = Mat2C::from_re(0.0, 0.0, 0.0, 0.0);
    for k in 0..period {
        let mut term = Mat2C::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0 / base.alpha(n + k), 0.0),
        );
        for j in 0..period {
            if j < k {
                term = term * periodic_b(base, n + j, x);
            } else if j > k {
                term = periodic_b(base, n + j, x) * term;
            }
        }
        sum = sum + term;
    }
    sum
}

// ---------------------------------------------------------------------------
// Joukowsky layer

/// The branch of `√(w²−1)` cut along `(−1, 1)`: continuous on
/// `ℂ ∖ [−1, 1]`, equal to `−√(x²−1)` on `(−∞, −1)` and `+√(x²−1)` on
/// `(1, ∞)`; on `[−1, 1]` the boundary value from the upper half-plane,
/// `i√(1−x²)`.
pub fn sqrt_w2m1(w: Complex64) -> Complex64 {
    if w.im == 0.0 {
        let x = w.re;
        if x.abs() <= 1.0 {
            // (1−x)(1+x) instead of 1−x² keeps full precision at the edges.
            return Complex64::new(0.0, ((1.0 - x) * (1.0 + x)).sqrt());
        }
        let mag = ((x.abs() - 1.0) * (x.abs() + 1.0)).sqrt();
        return Complex64::new(if x > 0.0 { mag } else { -mag }, 0.0);
    }
    (0.5 * (w - 1.0).ln() + 0.5 * (w + 1.0).ln()).exp()
}

/// Roots `ξ± = w ± √(w²−1)` of `ξ² − 2wξ + 1 = 0`, ordered so that
/// `|ξ⁺| ≥ 1 ≥ |ξ⁻|` (with the branch of [`sqrt_w2m1`], the `+` root is
/// always the large one).
pub fn joukowsky_roots(w: Complex64) -> (Complex64, Complex64) {
    let e = sqrt_w2m1(w);
    (w + e, w - e)
}

/// `|ξ⁺(w)|` and a distance-to-the-unit-circle bound.
#[derive(Clone, Copy, Debug)]
pub struct XiModulus {
    /// `|ξ⁺(w)| = (s + √(s²−4))/2` with `s = |w−1| + |w+1|`.
    pub value: f64,
    /// For non-real `w`: `|ξ⁺| − 1 ≥ |Im w| / (2√(|w−1||w+1|))`.
    pub gap_lower_bound: Option<f64>,
}

pub fn xi_modulus(w: Complex64) -> XiModulus {
    let d1 = (w - 1.0).norm();
    let d2 = (w + 1.0).norm();
    let s = d1 + d2;
    let value = 0.5 * (s + ((s - 2.0) * (s + 2.0)).max(0.0).sqrt());
    let gap_lower_bound = if w.im != 0.0 {
        Some(w.im.abs() / (2.0 * (d1 * d2).sqrt()))
    } else {
        None
    };
    XiModulus { value, gap_lower_bound }
}

// ---------------------------------------------------------------------------
// Eigenvalue pairs

/// Which branches produced an eigenvalue pair.
#[derive(Clone, Copy, Debug)]
pub struct BranchMeta {
    /// Principal `√(det Y)`.
    pub sqrt_det: Complex64,
    /// Normalized half-trace `w = tr Y / (2√det Y)`.
    pub w: Complex64,
    /// True when `w` landed on `[−1, 1]` and the upper-half-plane boundary
    /// value was taken.
    pub band_limit: bool,
}

/// Dominant/recessive eigenvalue pair of a 2×2 matrix, with optional
/// recentred (ζ) values attached by the parabolic analysis.
#[derive(Clone, Copy, Debug)]
pub struct EigenPair {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub zeta_plus: Option<Complex64>,
    pub zeta_minus: Option<Complex64>,
    pub meta: BranchMeta,
}

impl EigenPair {
    /// Attach `ζ± = scale · (ε λ± − 1)`, the recentred eigenvalues used when
    /// `λ±` collapse to `ε` in the parabolic regime.
    pub fn with_zeta(mut self, scale: f64, epsilon: i8) -> Self {
        let e = Complex64::new(epsilon as f64, 0.0);
        self.zeta_plus = Some(scale * (e * self.lambda_plus - 1.0));
        self.zeta_minus = Some(scale * (e * self.lambda_minus - 1.0));
        self
    }
}

pub const DEGENERATE_DISCRIMINANT_TOL: f64 = 1e-12;

/// Eigenvalues `λ± = √det · ξ±(tr/(2√det))` of `y`.
pub fn eigpair(y: &Mat2C) -> Result<EigenPair, TransferError> {
    eigpair_with_tol(y, DEGENERATE_DISCRIMINANT_TOL)
}

pub fn eigpair_with_tol(y: &Mat2C, tol: f64) -> Result<EigenPair, TransferError> {
    let det = y.det();
    let tr = y.tr();
    let scale = y.norm_sqr();
    let discr = y.discr();
    if discr.norm() < tol * scale {
        return Err(TransferError::DegenerateDiscriminant { discr: discr.norm(), scale });
    }
    if det.im == 0.0 && det.re <= 0.0 {
        return Err(TransferError::NegativeDeterminantRay(det));
    }
    let s = det.sqrt();
    let w = tr / (2.0 * s);
    let (xp, xm) = joukowsky_roots(w);
    let band_limit = w.im == 0.0 && w.re.abs() <= 1.0;
    Ok(EigenPair {
        lambda_plus: s * xp,
        lambda_minus: s * xm,
        zeta_plus: None,
        zeta_minus: None,
        meta: BranchMeta { sqrt_det: s, w, band_limit },
    })
}

/// Logarithmic derivative `(λ⁺)'/λ⁺` of the dominant eigenvalue, given `y`
/// and its `z`-derivative. Uses the cancellation-free form
/// `det'/(2 det) + w'/√(w²−1)` — the difference `ξ⁺(w) − w` is exactly the
/// branch root, so nothing is lost when `λ⁺` and `λ⁻` are close.
pub fn eigpair_derivative(y: &Mat2C, yp: &Mat2C) -> Result<Complex64, TransferError> {
    let det = y.det();
    let tr = y.tr();
    let scale = y.norm_sqr();
    let discr = y.discr();
    if discr.norm() < DEGENERATE_DISCRIMINANT_TOL * scale {
        return Err(TransferError::DegenerateDiscriminant { discr: discr.norm(), scale });
    }
    if det.im == 0.0 && det.re <= 0.0 {
        return Err(TransferError::NegativeDeterminantRay(det));
    }
    let det_p = yp.m[0][0] * y.m[1][1] + y.m[0][0] * yp.m[1][1]
        - yp.m[0][1] * y.m[1][0]
        - y.m[0][1] * yp.m[1][0];
    let tr_p = yp.tr();
    let s = det.sqrt();
    let w = tr / (2.0 * s);
    let wp = (tr_p - tr * det_p / (2.0 * det)) / (2.0 * s);
    Ok(det_p / (2.0 * det) + wp / sqrt_w2m1(w))
}

// ---------------------------------------------------------------------------
// Case classification

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CaseVariant {
    /// `|tr 𝔛₀(0)| < 2`: elliptic period product.
    I,
    /// `𝔛₀(0) = ±Id`: scalar parabolic boundary.
    IIa,
    /// `|tr 𝔛₀(0)| = 2` with a nontrivial Jordan block.
    IIb,
    /// `|tr 𝔛₀(0)| > 2`: hyperbolic.
    III,
    /// Within the classification tolerance of the boundary but not exactly
    /// parabolic: the discrete data cannot distinguish the regimes.
    Undecided,
}

impl fmt::Display for CaseVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseVariant::I => "I",
            CaseVariant::IIa => "IIa",
            CaseVariant::IIb => "IIb",
            CaseVariant::III => "III",
            CaseVariant::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CaseClass {
    pub variant: CaseVariant,
    /// `sign(tr 𝔛₀(0))` for the parabolic and hyperbolic cases.
    pub epsilon: Option<i8>,
    /// `tr 𝔛₀(0)`.
    pub trace0: f64,
    /// `|tr 𝔛₀(0)| − 2`.
    pub margin: f64,
    /// How far the family's entry ratios at `probe_n` sit from the base
    /// ratios — a consistency diagnostic, not part of the decision.
    pub modulation_residual: f64,
}

pub const DEFAULT_CLASS_TOL: f64 = 1e-6;

/// Decide the case of the periodic base at the origin. Exact parabolicity
/// (to machine precision) resolves to IIa/IIb by whether the period product
/// is a scalar; a trace within `tol_class` of ±2 but not machine-exact is
/// reported as [`CaseVariant::Undecided`].
pub fn classify(family: &JacobiFamily, probe_n: usize, tol_class: f64) -> CaseClass {
    let base = family.base();
    let x0 = periodic_x(base, 0, Complex64::new(0.0, 0.0));
    let trace0 = x0.tr().re;
    let margin = trace0.abs() - 2.0;

    let probe = probe_n.max(2);
    let i = (probe % family.period()) as i64;
    let modulation_residual = (family.a(probe - 1) / family.a(probe)
        - base.alpha(i - 1) / base.alpha(i))
    .abs()
        + (family.b(probe) / family.a(probe) - base.beta(i) / base.alpha(i)).abs();

    let machine = 1e3 * f64::EPSILON * x0.norm().max(1.0);
    let (variant, epsilon) = if margin < -tol_class {
        (CaseVariant::I, None)
    } else if margin > tol_class {
        (CaseVariant::III, Some(trace0.signum() as i8))
    } else if margin.abs() <= machine {
        let eps = trace0.signum();
        let dev = (x0 - Mat2C::identity().scale(eps.into())).norm();
        if dev <= machine {
            (CaseVariant::IIa, Some(eps as i8))
        } else {
            (CaseVariant::IIb, Some(eps as i8))
        }
    } else {
        (CaseVariant::Undecided, None)
    };

    CaseClass { variant, epsilon, trace0, margin, modulation_residual }
}

// ---------------------------------------------------------------------------
// Scaled discriminant limit

/// Extrapolated limit `h(z) = lim scaleⱼ · discr X_{jN}(z)`, where the scale
/// is `a²` at the block end for the scalar-parabolic case and the tempering
/// `γ` at the block end for the Jordan-parabolic case.
#[derive(Clone, Debug)]
pub struct HEstimate {
    /// `(j, scaled discriminant at the first grid point)` — the raw sweep
    /// behind the extrapolation, kept for inspection.
    pub samples: Vec<(u64, Complex64)>,
    /// Extrapolated limit at the first grid point.
    pub extrapolated: Complex64,
    /// Extrapolated limit at every grid point, in grid order.
    pub per_point: Vec<(Complex64, Complex64)>,
    /// Least-squares polynomial (degree ≤ 2, ascending coefficients) through
    /// the limits at the real grid points.
    pub poly_fit: Vec<f64>,
    /// Max deviation of the fit from the limits at the real grid points.
    pub residual: f64,
}

impl HEstimate {
    pub fn fit_eval(&self, x: f64) -> f64 {
        self.poly_fit.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

fn geometric_depths(j_max: usize) -> Vec<usize> {
    let mut js = Vec::new();
    let mut j = j_max;
    while j >= 8 && js.len() < 16 {
        js.push(j);
        j /= 2;
    }
    if js.is_empty() {
        js.push(j_max.max(1));
    }
    js.reverse();
    js
}

/// Least squares for `Σ c_k x^k`, `k ≤ deg`, via the (tiny) normal equations.
fn polyfit(xs: &[f64], ys: &[f64], deg: usize) -> Vec<f64> {
    let deg = deg.min(xs.len().saturating_sub(1));
    let m = deg + 1;
    // Normal matrix G[i][j] = Σ x^{i+j}, rhs r[i] = Σ y x^i.
    let mut g = vec![vec![0.0f64; m]; m];
    let mut r = vec![0.0f64; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut pw = vec![1.0f64; 2 * m - 1];
        for k in 1..2 * m - 1 {
            pw[k] = pw[k - 1] * x;
        }
        for i in 0..m {
            r[i] += y * pw[i];
            for j in 0..m {
                g[i][j] += pw[i + j];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let piv = (col..m).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs())).unwrap();
        g.swap(col, piv);
        r.swap(col, piv);
        let d = g[col][col];
        for row in 0..m {
            if row != col && g[row][col] != 0.0 {
                let f = g[row][col] / d;
                for k in col..m {
                    g[row][k] -= f * g[col][k];
                }
                r[row] -= f * r[col];
            }
        }
    }
    (0..m).map(|i| r[i] / g[i][i]).collect()
}

pub fn h_estimate(
    family: &JacobiFamily,
    z_grid: &[Complex64],
    j_max: usize,
) -> Result<HEstimate, TransferError> {
    assert!(!z_grid.is_empty());
    let cc = classify(family, j_max.max(16), DEFAULT_CLASS_TOL);
    let period = family.period();
    let scale_at = |j: usize| -> Result<f64, TransferError> {
        let end = j * period + period - 1;
        match cc.variant {
            CaseVariant::IIa => Ok(family.a(end) * family.a(end)),
            CaseVariant::IIb => family.gamma(end).ok_or(TransferError::MissingTempering),
            other => Err(TransferError::UnsupportedCase(other)),
        }
    };
    let js = geometric_depths(j_max);
    // Extrapolation nodes in u = 1/√j: exact for tails in powers of 1/j and
    // still convergent when a √-growing tempering leaves 1/√j corrections.
    let ts: Vec<f64> = js.iter().map(|&j| 1.0 / (j as f64).sqrt()).collect();

    let mut per_point = Vec::with_capacity(z_grid.len());
    let mut first_samples = Vec::new();
    for (zi, &z) in z_grid.iter().enumerate() {
        let mut vals = Vec::with_capacity(js.len());
        for &j in &js {
            let x = transfer_x(family, j * period, z);
            vals.push(x.discr() * scale_at(j)?);
        }
        if !tail_is_settling(&vals) {
            return Err(TransferError::NonConvergent(z));
        }
        // Extrapolate in 1/j over the deepest samples.
        let m = vals.len().min(6);
        let lim = neville_at_zero(&ts[vals.len() - m..], &vals[vals.len() - m..]);
        per_point.push((z, lim));
        if zi == 0 {
            first_samples = js.iter().map(|&j| j as u64).zip(vals.iter().copied()).map(|(j, v)| (j, v)).collect();
        }
    }

    let real_pts: Vec<(f64, f64)> = per_point
        .iter()
        .filter(|(z, _)| z.im == 0.0)
        .map(|(z, h)| (z.re, h.re))
        .collect();
    let (poly_fit, residual) = if real_pts.is_empty() {
        (Vec::new(), 0.0)
    } else {
        let xs: Vec<f64> = real_pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = real_pts.iter().map(|p| p.1).collect();
        let fit = polyfit(&xs, &ys, 2);
        let res = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let f = fit.iter().rev().fold(0.0, |acc, c| acc * x + c);
                (f - y).abs()
            })
            .fold(0.0f64, f64::max);
        (fit, res)
    };

    Ok(HEstimate {
        samples: first_samples,
        extrapolated: per_point[0].1,
        per_point,
        poly_fit,
        residual,
    })
}

// ---------------------------------------------------------------------------
// Parabolic (Jordan-block) normal form

/// Limit data of a Jordan-parabolic family: the normal-form conjugator `T₀`
/// with `𝔛₀(0) = ε T₀ [[0,1],[−1,2]] T₀⁻¹`, the tempering flag
/// `𝔱 = lim γ_n/a_n ∈ {0, 1}`, and the drift sums `𝔖`, `𝔘` entering the
/// shifted-discriminant polynomial `τ`.
#[derive(Clone, Debug)]
pub struct ParabolicData {
    pub epsilon: i8,
    /// `lim γ_n/a_n`, snapped to 0 or 1.
    pub t_flag: u8,
    /// `𝔖 = Σᵢ 𝔰ᵢ/α_{i−1}` — weighted off-diagonal drift.
    pub s_big: f64,
    /// `𝔘 = Σᵢ 𝔲ᵢ/α_{i−1}` — weighted mixed drift.
    pub u_big: f64,
    /// `tr 𝔛'₀(0)`.
    pub tr_xprime0: f64,
    /// Normal-form conjugator.
    pub t0: Mat2C,
    pub alpha_last: f64,
}

impl ParabolicData {
    /// `τ(z) = 𝔖²/4 + 𝔱 ε z tr 𝔛'₀(0) + 𝔘`: quarter of the limiting
    /// discriminant of the recentred one-period matrices. Affine in `z`
    /// (constant when `𝔱 = 0`), with `τ'(z) = ε tr 𝔛'₀(0)` when `𝔱 = 1`.
    pub fn tau(&self, z: Complex64) -> Complex64 {
        let slope = self.t_flag as f64 * self.epsilon as f64 * self.tr_xprime0;
        z * slope + (self.s_big * self.s_big / 4.0 + self.u_big)
    }

    /// The scaled discriminant limit expressed through the normal form:
    /// `h(z) = 4 α_{N−1} τ(z)` — the cross-check partner of [`h_estimate`].
    pub fn h_from_tau(&self, z: Complex64) -> Complex64 {
        4.0 * self.alpha_last * self.tau(z)
    }

    /// Real root of `τ` (only meaningful when `𝔱 = 1`):
    /// `x₀ = −ε(𝔘 + 𝔖²/4)/tr 𝔛'₀(0)`.
    pub fn tau_root(&self) -> f64 {
        -(self.epsilon as f64) * (self.u_big + self.s_big * self.s_big / 4.0) / self.tr_xprime0
    }
}

/// Eigenvector of a parabolic 2×2 matrix (eigenvalue 1 after `ε`-flip),
/// normalized to first entry 1, plus the Jordan partner with first entry 0.
fn jordan_chain(m_eps: &Mat2C) -> Result<(Complex64, Complex64), TransferError> {
    // (M − Id) u = 0 with u = (1, u2): both rows give u2; use the larger.
    let d = *m_eps - Mat2C::identity();
    let (r0, r1) = (d.m[0], d.m[1]);
    let u2 = if r0[1].norm() >= r1[1].norm() {
        if r0[1].norm() == 0.0 {
            return Err(TransferError::FrameConstruction(
                "eigenvector has no first-entry-1 normalization".into(),
            ));
        }
        -r0[0] / r0[1]
    } else {
        -r1[0] / r1[1]
    };
    // (M − Id) v = u with v = (0, v2): row with the larger second entry.
    let v2 = if r0[1].norm() >= r1[1].norm() {
        1.0 / r0[1]
    } else {
        u2 / r1[1]
    };
    Ok((u2, v2))
}

/// Extract the parabolic limit data of a Jordan-parabolic family, sampling
/// the drift sequences up to index ≈ `n_probe` and extrapolating in `1/n`.
pub fn parabolic_data(family: &JacobiFamily, n_probe: usize) -> Result<ParabolicData, TransferError> {
    let cc = classify(family, n_probe.max(16), DEFAULT_CLASS_TOL);
    if cc.variant != CaseVariant::IIb {
        return Err(TransferError::UnsupportedCase(cc.variant));
    }
    let epsilon = cc.epsilon.expect("IIb carries a sign");
    let eps = epsilon as f64;
    let base = family.base();
    let period = base.period();
    let alpha_last = base.alpha(period as i64 - 1);
    let origin = Complex64::new(0.0, 0.0);

    // Tempering flag.
    let gamma = |n: usize| family.gamma(n).ok_or(TransferError::MissingTempering);
    let t_raw = {
        let n = n_probe.max(64);
        let mut acc = 0.0;
        for k in 0..4 {
            let m = n - k * (n / 8).max(1);
            acc += gamma(m)? / family.a(m);
        }
        acc / 4.0
    };
    let t_flag = if (t_raw - 1.0).abs() < 0.05 {
        1u8
    } else if t_raw.abs() < 0.05 {
        0u8
    } else {
        return Err(TransferError::AmbiguousTempering(t_raw));
    };

    // Normal form at the origin.
    let x0 = periodic_x(base, 0, origin);
    let m_eps = x0.scale(eps.into());
    let (u2, v2) = jordan_chain(&m_eps)?;
    // With S = [[1,0],[u2,v2]] mapping the canonical chain of
    // P = [[0,1],[−1,2]] (eigenvector (1,1), partner (0,1)) onto ours:
    // T0 = S · [[1,0],[−1,1]].
    let s_mat = Mat2C::new(1.0.into(), 0.0.into(), u2, v2);
    let t0 = s_mat * Mat2C::from_re(1.0, 0.0, -1.0, 1.0);
    let p = Mat2C::from_re(0.0, 1.0, -1.0, 2.0);
    let t0_inv = t0.inv().ok_or_else(|| {
        TransferError::FrameConstruction("normal-form conjugator is singular".into())
    })?;
    let recon = (t0 * p * t0_inv).scale(eps.into());
    let dev = (recon - x0).norm();
    if dev > 1e-10 * x0.norm().max(1.0) {
        return Err(TransferError::FrameConstruction(format!(
            "normal form reconstruction off by {dev:.3e}"
        )));
    }

    let tr_xprime0 = periodic_x_prime(base, 0, origin).tr().re;

    // Drift sums 𝔖 and 𝔘: per-residue limits extrapolated in 1/n.
    let mut s_big = 0.0;
    let mut u_big = 0.0;
    for i in 0..period {
        let sample = |j: usize| -> Result<(f64, f64), TransferError> {
            let n = i + j * period;
            let g = gamma(n)?;
            let ii = n as i64;
            let da = base.alpha(ii - 1) / base.alpha(ii) - family.a(n - 1) / family.a(n);
            let db = base.beta(ii) / base.alpha(ii) - family.b(n) / family.a(n);
            let x11 = periodic_x(base, ii, origin).m[0][0].re;
            let s = (base.alpha(ii) * g).sqrt() * da;
            let u = g * (eps * x11 - 1.0) * da - g * eps * db;
            Ok((s, u))
        };
        let j_top = (n_probe.max(64)) / period.max(1);
        let js: Vec<usize> = [16usize, 8, 4, 2, 1].iter().map(|d| (j_top / d).max(1)).collect();
        // Drift samples generically carry 1/√j corrections (a √-growing
        // tempering times a 1/n entry drift), so extrapolate in u = 1/√j,
        // where they are smooth.
        let ts: Vec<f64> = js.iter().map(|&j| 1.0 / (j as f64).sqrt()).collect();
        let mut svals = Vec::new();
        let mut uvals = Vec::new();
        for &j in &js {
            let (s, u) = sample(j)?;
            svals.push(Complex64::new(s, 0.0));
            uvals.push(Complex64::new(u, 0.0));
        }
        // The drift limits enter τ against terms of size O(1 + |z|); motion
        // below an absolute 1e−7 is noise for every downstream tolerance.
        let floor = 1e-7;
        if !crate::extrap::tail_is_settling_with_floor(&svals, floor)
            || !crate::extrap::tail_is_settling_with_floor(&uvals, floor)
        {
            return Err(TransferError::UnsettledTail(i));
        }
        let s_i = neville_at_zero(&ts, &svals).re;
        let u_i = neville_at_zero(&ts, &uvals).re;
        let w = base.alpha(i as i64 - 1);
        s_big += s_i / w;
        u_big += u_i / w;
    }

    Ok(ParabolicData {
        epsilon,
        t_flag,
        s_big,
        u_big,
        tr_xprime0,
        t0,
        alpha_last,
    })
}

/// The moving frame of the parabolic regime at block `j`: the conjugators
/// `Z_j`, `Z_{j+1}` and the recentred block matrix
/// `Y_j = Z_{j+1}⁻¹ X_{jN} Z_j`, which tends to `ε(Id + O(1/√γ))`.
#[derive(Clone, Copy, Debug)]
pub struct ParabolicFrame {
    pub z_j: Mat2C,
    pub z_j1: Mat2C,
    pub y_j: Mat2C,
    /// The frame angle `ϑ_j` at this block.
    pub vartheta: Complex64,
}

pub fn parabolic_frame(
    family: &JacobiFamily,
    pd: &ParabolicData,
    j: usize,
    z: Complex64,
) -> Result<ParabolicFrame, TransferError> {
    assert!(j >= 1);
    let period = family.period();
    let gamma_end = |jj: usize| -> Result<f64, TransferError> {
        family
            .gamma(jj * period + period - 1)
            .ok_or(TransferError::MissingTempering)
    };
    let sqrt_minus_tau = if pd.t_flag == 1 {
        let tau = pd.tau(z);
        if tau.im == 0.0 && tau.re >= 0.0 {
            return Err(TransferError::DomainViolation(format!(
                "τ(z) = {tau} lies on [0, ∞); the frame angle degenerates"
            )));
        }
        (-tau).sqrt()
    } else {
        let t0 = pd.tau(Complex64::new(0.0, 0.0)).norm();
        if t0 == 0.0 {
            return Err(TransferError::DomainViolation(
                "τ(0) = 0; the frame angle degenerates".into(),
            ));
        }
        Complex64::new(t0.sqrt(), 0.0)
    };
    let z_at = |jj: usize| -> Result<Mat2C, TransferError> {
        let th = sqrt_minus_tau * (pd.alpha_last / gamma_end(jj)?).sqrt();
        let frame = Mat2C::new(1.0.into(), 1.0.into(), th.exp(), (-th).exp());
        Ok(pd.t0 * frame)
    };
    let z_j = z_at(j)?;
    let z_j1 = z_at(j + 1)?;
    let x = transfer_x(family, j * period, z);
    let inv = z_j1
        .inv()
        .ok_or_else(|| TransferError::FrameConstruction("frame matrix is singular".into()))?;
    let th_j = sqrt_minus_tau * (pd.alpha_last / gamma_end(j)?).sqrt();
    Ok(ParabolicFrame { z_j, z_j1, y_j: inv * x * z_j, vartheta: th_j })
}

// ---------------------------------------------------------------------------
// Diagonalization

#[derive(Clone, Copy, Debug)]
pub struct Diagonalization {
    /// Eigenvector columns `(1, (λ± − Y₁₁)/Y₁₂)`.
    pub c: Mat2C,
    /// `diag(λ⁺, λ⁻)`.
    pub d: Mat2C,
    pub recon_error: f64,
}

/// `Y = C D C⁻¹` with first-entry-1 eigenvector columns. Fails when the
/// upper-right entry vanishes (columns undefined) or when the reconstruction
/// misses `Y` by more than `1e-10 ‖Y‖` (near-degenerate pair).
pub fn diagonalize(y: &Mat2C) -> Result<Diagonalization, TransferError> {
    let ep = eigpair(y)?;
    let y12 = y.m[0][1];
    if y12.norm() < 1e-14 * y.norm() {
        return Err(TransferError::ZeroUpperRight);
    }
    let c = Mat2C::new(
        1.0.into(),
        1.0.into(),
        (ep.lambda_plus - y.m[0][0]) / y12,
        (ep.lambda_minus - y.m[0][0]) / y12,
    );
    let d = Mat2C::new(ep.lambda_plus, 0.0.into(), 0.0.into(), ep.lambda_minus);
    let c_inv = c.inv().ok_or(TransferError::ZeroUpperRight)?;
    let recon_error = ((c * d * c_inv) - *y).norm();
    let bound = 1e-10 * y.norm().max(f64::MIN_POSITIVE);
    if recon_error > bound {
        return Err(TransferError::ReconstructionFailed { err: recon_error, bound });
    }
    Ok(Diagonalization { c, d, recon_error })
}

// ---------------------------------------------------------------------------
// Levinson products and profiles

/// Cumulative logs of `∏ |λ⁺_j / λ⁻_j|` along block index, starting at
/// `m_start`. Nondecreasing by the eigenvalue ordering; divergence is the
/// dominance certificate behind the generalized-eigenvector asymptotics.
#[derive(Clone, Debug)]
pub struct LevinsonProduct {
    pub m_start: usize,
    /// `log_partials[k] = Σ_{j=m_start}^{m_start+k} ln |λ⁺_j/λ⁻_j|`.
    pub log_partials: Vec<f64>,
}

impl LevinsonProduct {
    /// First block index whose partial product exceeds `e^{log_threshold}`.
    pub fn first_index_exceeding(&self, log_threshold: f64) -> Option<usize> {
        self.log_partials
            .iter()
            .position(|&lp| lp > log_threshold)
            .map(|k| self.m_start + k)
    }
}

enum BlockMode {
    Direct,
    Parabolic(Box<ParabolicData>),
}

fn block_mode(family: &JacobiFamily, depth: usize) -> Result<BlockMode, TransferError> {
    let cc = classify(family, depth.max(64), DEFAULT_CLASS_TOL);
    match cc.variant {
        CaseVariant::IIb => Ok(BlockMode::Parabolic(Box::new(parabolic_data(
            family,
            depth.max(10_000),
        )?))),
        CaseVariant::Undecided => Err(TransferError::UnsupportedCase(cc.variant)),
        _ => Ok(BlockMode::Direct),
    }
}

fn block_matrix(
    family: &JacobiFamily,
    mode: &BlockMode,
    j: usize,
    z: Complex64,
) -> Result<Mat2C, TransferError> {
    match mode {
        BlockMode::Direct => Ok(transfer_x(family, j * family.period(), z)),
        BlockMode::Parabolic(pd) => Ok(parabolic_frame(family, pd, j, z)?.y_j),
    }
}

pub fn levinson_ratio_product(
    family: &JacobiFamily,
    z: Complex64,
    m_start: usize,
    j_max: usize,
) -> Result<LevinsonProduct, TransferError> {
    assert!(m_start >= 1 && m_start <= j_max);
    let mode = block_mode(family, j_max)?;
    let mut log_partials = Vec::with_capacity(j_max - m_start + 1);
    let mut acc = 0.0f64;
    for j in m_start..=j_max {
        let y = block_matrix(family, &mode, j, z)?;
        let ep = eigpair(&y)?;
        // Mathematically ≥ 0; clamp washes only float dust so the partial
        // sums are exactly nondecreasing.
        let step = (ep.lambda_plus.norm() / ep.lambda_minus.norm()).ln().max(0.0);
        acc += step;
        log_partials.push(acc);
    }
    Ok(LevinsonProduct { m_start, log_partials })
}

/// Smallest block index `j ≥ floor` at which the eigenpair layer succeeds at
/// every probe point for `j` and the next few blocks.
pub fn adaptive_start_index(
    family: &JacobiFamily,
    probes: &[Complex64],
    floor: usize,
) -> Result<usize, TransferError> {
    let floor = floor.max(1);
    let ceiling = floor + 10_000;
    let mode = block_mode(family, ceiling)?;
    let mut j = floor;
    'outer: while j <= ceiling {
        for dj in 0..4 {
            for &z in probes {
                let ok = block_matrix(family, &mode, j + dj, z)
                    .and_then(|y| eigpair(&y))
                    .is_ok();
                if !ok {
                    j += dj + 1;
                    continue 'outer;
                }
            }
        }
        return Ok(j);
    }
    Err(TransferError::NoAdmissibleStart { floor, ceiling })
}

/// Ratios `p_{kN+i}(z) / ∏_{j=m_start}^{k−1} λ⁺_j` along one residue class.
/// When the dominance products diverge these settle to a finite limit —
/// the boundary profile of the polynomial sequence.
#[derive(Clone, Debug)]
pub struct AsymptoticProfile {
    pub residue: usize,
    pub m_start: usize,
    /// `ratios[k]` is the ratio at block `m_start + 1 + k`.
    pub ratios: Vec<Complex64>,
    /// Last relative step `|r_K − r_{K−1}|/|r_K|`.
    pub last_delta: f64,
    /// Tail steps were shrinking.
    pub converged: bool,
}

pub fn asymptotic_profile(
    family: &JacobiFamily,
    z: Complex64,
    residue: usize,
    m_start: usize,
    k_max: usize,
) -> Result<AsymptoticProfile, TransferError> {
    let period = family.period();
    assert!(residue < period);
    assert!(m_start >= 1 && m_start + 2 <= k_max);
    let mode = block_mode(family, k_max)?;

    // One forward sweep of the polynomials, recording the scaled value at
    // each index kN + residue.
    let top = k_max * period + residue;
    let mut pvals: Vec<ScaledValue> = Vec::with_capacity(k_max + 1);
    {
        let mut pair = orthopoly::eval_pn(family, 0, z); // (p_0, p_1)
        // Walk indices 1..=top, capturing p at the residue marks.
        if residue == 0 {
            pvals.push(ScaledValue { value: pair.u, log_scale: pair.log_scale });
        }
        for n in 1..=top {
            let next = ((z - family.b(n)) * pair.v - family.a(n - 1) * pair.u) / family.a(n);
            pair.u = pair.v;
            pair.v = next;
            let m2 = pair.u.norm_sqr().max(pair.v.norm_sqr());
            if !(0.25..=4.0).contains(&m2) && m2 > 0.0 && m2.is_finite() {
                let m = m2.sqrt();
                pair.u /= m;
                pair.v /= m;
                pair.log_scale += m.ln();
            }
            if n % period == residue {
                pvals.push(ScaledValue { value: pair.u, log_scale: pair.log_scale });
            }
        }
    }
    // pvals[k] = p at kN + residue (k starts at 0 when residue == 0, else 1).
    let k_of = |idx: usize| if residue == 0 { idx } else { idx - 1 };

    let mut ratios = Vec::with_capacity(k_max - m_start);
    let mut log_prod = Complex64::new(0.0, 0.0);
    for j in m_start..k_max {
        let y = block_matrix(family, &mode, j, z)?;
        let ep = eigpair(&y)?;
        log_prod += ep.lambda_plus.ln();
        let k = j + 1; // ratio uses the product up to k−1 = j
        let pv = pvals[k_of(k)];
        let logp = Complex64::new(pv.value.norm().ln() + pv.log_scale, pv.value.arg());
        let diff = Complex64::new(logp.re - log_prod.re, logp.im - log_prod.im);
        // exp of the log-difference: branch offsets of the per-factor logs
        // cancel in the exponential.
        ratios.push(diff.exp());
    }

    let mut deltas: Vec<f64> = ratios.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let last_delta = match (ratios.last(), deltas.last()) {
        (Some(r), Some(d)) if r.norm() > 0.0 => d / r.norm(),
        _ => f64::NAN,
    };
    let tail = deltas.split_off(deltas.len() / 2);
    let converged = tail.windows(2).all(|w| w[1] <= w[0] * 1.5 + 1e-300);

    Ok(AsymptoticProfile { residue, m_start, ratios, last_delta, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_c_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn one_step_matrix_shapes() {
        let lag = JacobiFamily::laguerre();
        let b0 = transfer_b(&lag, 0, c(0.0, 0.0));
        assert_eq!(b0, Mat2C::from_re(0.0, 1.0, -1.0, -1.0));
        // Propagates (p_{−1}, p_0) = (0, 1) to (p_0, p_1) and onward.
        let z = c(0.7, 0.2);
        let p1 = (z - lag.b(0)) / lag.a(0);
        let (u, v) = transfer_b(&lag, 0, z).apply((c(0.0, 0.0), c(1.0, 0.0)));
        assert_c_close(u, c(1.0, 0.0), 1e-15);
        assert_c_close(v, p1, 1e-15);
    }

    #[test]
    fn laguerre_period_products_in_closed_form() {
        let lag = JacobiFamily::laguerre();
        for j in [1usize, 3, 17] {
            for x in [0.0, 0.5, -2.0] {
                let xj = transfer_x(&lag, j, c(x, 0.0));
                let jf = j as f64;
                assert_relative_eq!(xj.tr().re, (x - 2.0 * jf - 1.0) / (jf + 1.0), epsilon = 1e-13);
                assert_relative_eq!(xj.det().re, jf / (jf + 1.0), epsilon = 1e-13);
                // γ_j · discr X_j = (x² − 2x(2j+1) + 1)/(j+1) exactly.
                let discr = xj.tr() * xj.tr() - 4.0 * xj.det();
                let want = (x * x - 2.0 * x * (2.0 * jf + 1.0) + 1.0) / (jf + 1.0);
                assert_relative_eq!((discr * lag.gamma(j).unwrap()).re, want, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn synthetic_block_determinants() {
        let fam = JacobiFamily::synthetic_iia();
        for j in [1usize, 5, 40] {
            let x = transfer_x(&fam, 2 * j, c(0.3, 0.0));
            let jf = j as f64;
            assert_relative_eq!(x.det().re, jf / (jf + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn product_determinant_telescopes() {
        let h = JacobiFamily::hermite();
        let n = 7;
        let x = transfer_x(&h, n, c(0.2, 0.9));
        let want = h.a(n - 1) / h.a(n + h.period() - 1);
        assert_relative_eq!(x.det().re, want, epsilon = 1e-14);
        assert!(x.det().im.abs() < 1e-15);
    }

    #[test]
    fn periodic_product_is_unimodular_and_rotation_invariant() {
        let base = PeriodicBase::new(vec![1.0, 2.0, 0.5], vec![0.3, -1.0, 0.0]).unwrap();
        let z = c(0.4, 0.0);
        let x0 = periodic_x(&base, 0, z);
        assert_relative_eq!(x0.det().re, 1.0, epsilon = 1e-14);
        for n in [1i64, 2, 3, -1, 7] {
            let xn = periodic_x(&base, n, z);
            assert_relative_eq!(xn.tr().re, x0.tr().re, epsilon = 1e-13);
        }
    }

    #[test]
    fn derivative_products_match_finite_differences() {
        let fam = JacobiFamily::laguerre();
        let z = c(0.37, 0.11);
        let h = 1e-6;
        let d = transfer_x_prime(&fam, 4, z);
        let fp = transfer_x(&fam, 4, z + c(h, 0.0));
        let fm = transfer_x(&fam, 4, z - c(h, 0.0));
        for i in 0..2 {
            for j in 0..2 {
                let fd = (fp.m[i][j] - fm.m[i][j]) / (2.0 * h);
                assert!((fd - d.m[i][j]).norm() < 1e-8 * (1.0 + d.m[i][j].norm()));
            }
        }

        let base = fam.base();
        let dp = periodic_x_prime(base, 0, z);
        let pp = periodic_x(base, 0, z + c(h, 0.0));
        let pm = periodic_x(base, 0, z - c(h, 0.0));
        for i in 0..2 {
            for j in 0..2 {
                let fd = (pp.m[i][j] - pm.m[i][j]) / (2.0 * h);
                assert!((fd - dp.m[i][j]).norm() < 1e-8 * (1.0 + dp.m[i][j].norm()));
            }
        }
    }

    #[test]
    fn branch_values_on_and_off_the_axis() {
        // ξ±(±1) = ±1.
        let (p, m) = joukowsky_roots(c(1.0, 0.0));
        assert_c_close(p, c(1.0, 0.0), 1e-15);
        assert_c_close(m, c(1.0, 0.0), 1e-15);
        let (p, m) = joukowsky_roots(c(-1.0, 0.0));
        assert_c_close(p, c(-1.0, 0.0), 1e-15);
        assert_c_close(m, c(-1.0, 0.0), 1e-15);

        // ξ⁺(i) = (1+√2) i.
        let (p, _) = joukowsky_roots(c(0.0, 1.0));
        assert_c_close(p, c(0.0, 1.0 + 2.0f64.sqrt()), 1e-14);

        // Real w > 1: ξ⁺(2) = 2 + √3.
        let (p, m) = joukowsky_roots(c(2.0, 0.0));
        assert_c_close(p, c(2.0 + 3.0f64.sqrt(), 0.0), 1e-14);
        assert_c_close(m, c(2.0 - 3.0f64.sqrt(), 0.0), 1e-14);

        // Real w < −1: the glued branch keeps ξ⁺ the large root.
        let (p, m) = joukowsky_roots(c(-2.0, 0.0));
        assert_c_close(p, c(-2.0 - 3.0f64.sqrt(), 0.0), 1e-14);
        assert!(p.norm() >= m.norm());

        // Band interior: upper boundary value, |ξ±| = 1.
        let (p, m) = joukowsky_roots(c(0.3, 0.0));
        assert_c_close(p, c(0.3, (0.91f64).sqrt()), 1e-14);
        assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(m.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn branch_is_continuous_across_the_left_ray() {
        // Approach (−∞,−1) from both half-planes: same value.
        let w0 = c(-1.7, 0.0);
        let above = sqrt_w2m1(c(-1.7, 1e-12));
        let below = sqrt_w2m1(c(-1.7, -1e-12));
        let on = sqrt_w2m1(w0);
        assert!((above - on).norm() < 1e-9);
        assert!((below - on).norm() < 1e-9);
        assert!(on.re < 0.0);
    }

    #[test]
    fn root_identities_on_a_grid() {
        // ξ⁺ξ⁻ = 1, ξ⁺+ξ⁻ = 2w, |ξ⁺| ≥ 1 ≥ |ξ⁻| everywhere.
        let mut pts = Vec::new();
        for k in 0..40 {
            let t = k as f64 / 39.0;
            pts.push(c(-3.0 + 6.0 * t, 0.0));
            pts.push(c(-3.0 + 6.0 * t, 0.7));
            pts.push(c(-3.0 + 6.0 * t, -0.2));
        }
        pts.push(c(1.0 + 1e-6, 0.0));
        pts.push(c(1.0 - 1e-6, 0.0));
        pts.push(c(-1.0 - 1e-6, 0.0));
        for w in pts {
            let (p, m) = joukowsky_roots(w);
            assert!((p * m - 1.0).norm() < 1e-12, "at {w}");
            assert!((p + m - 2.0 * w).norm() < 1e-12, "at {w}");
            assert!(p.norm() >= m.norm() - 1e-14, "at {w}");
            let xm = xi_modulus(w);
            assert!((xm.value - p.norm()).abs() < 1e-12, "at {w}");
            if let Some(gap) = xm.gap_lower_bound {
                assert!(p.norm() - 1.0 >= gap - 1e-13, "at {w}");
            }
        }
    }

    #[test]
    fn modulus_closed_form_example() {
        // w = 1.25: s = 2.5, |ξ⁺| = (2.5 + 1.5)/2 = 2.
        let xm = xi_modulus(c(1.25, 0.0));
        assert_relative_eq!(xm.value, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn eigpair_closed_forms() {
        let d = Mat2C::from_re(2.0, 0.0, 0.0, 0.5);
        let ep = eigpair(&d).unwrap();
        assert_c_close(ep.lambda_plus, c(2.0, 0.0), 1e-14);
        assert_c_close(ep.lambda_minus, c(0.5, 0.0), 1e-14);

        // [[0,1],[−1,1]]: unimodular band case, λ± = (1 ± i√3)/2.
        let y = Mat2C::from_re(0.0, 1.0, -1.0, 1.0);
        let ep = eigpair(&y).unwrap();
        assert_c_close(ep.lambda_plus, c(0.5, 3.0f64.sqrt() / 2.0), 1e-14);
        assert_c_close(ep.lambda_minus, c(0.5, -(3.0f64.sqrt()) / 2.0), 1e-14);
        assert!(ep.meta.band_limit);

        // Parabolic matrix: degenerate discriminant must refuse.
        let p = Mat2C::from_re(0.0, 1.0, -1.0, -2.0);
        assert!(matches!(
            eigpair(&p),
            Err(TransferError::DegenerateDiscriminant { .. })
        ));

        // Negative determinant ray refusal.
        let n = Mat2C::from_re(1.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            eigpair(&n),
            Err(TransferError::NegativeDeterminantRay(_))
        ));
    }

    #[test]
    fn eigpair_identities_and_zeta() {
        let y = Mat2C::new(c(0.3, 0.1), c(1.2, -0.4), c(-0.9, 0.2), c(1.1, 0.5));
        let ep = eigpair(&y).unwrap();
        assert!((ep.lambda_plus * ep.lambda_minus - y.det()).norm() < 1e-12 * y.norm_sqr());
        assert!((ep.lambda_plus + ep.lambda_minus - y.tr()).norm() < 1e-12 * y.norm());
        assert!(ep.lambda_plus.norm() >= ep.lambda_minus.norm());

        let ep = ep.with_zeta(10.0, -1);
        let zp = ep.zeta_plus.unwrap();
        assert_c_close(zp, 10.0 * (-ep.lambda_plus - 1.0), 1e-13);
    }

    #[test]
    fn eigvalue_log_derivative_matches_finite_differences() {
        let fam = JacobiFamily::hermite();
        let n = 50;
        let z = c(0.4, 1.0);
        let h = 1e-6;
        let y = transfer_x(&fam, n, z);
        let yp = transfer_x_prime(&fam, n, z);
        let got = eigpair_derivative(&y, &yp).unwrap();
        let lp = eigpair(&transfer_x(&fam, n, z + c(h, 0.0))).unwrap().lambda_plus;
        let lm = eigpair(&transfer_x(&fam, n, z - c(h, 0.0))).unwrap().lambda_plus;
        let fd = (lp.ln() - lm.ln()) / (2.0 * h);
        assert!((got - fd).norm() < 1e-6 * got.norm().max(1.0), "{got} vs {fd}");
    }

    #[test]
    fn hermite_dominant_eigenvalue_limits() {
        let fam = JacobiFamily::hermite();
        let z = c(0.0, 1.0);
        // λ⁺_n(i) → i.
        let y = transfer_x(&fam, 1_000, z);
        let ep = eigpair(&y).unwrap();
        assert!((ep.lambda_plus - c(0.0, 1.0)).norm() < 0.03);

        // a_n (λ⁺_n)'/λ⁺_n → 1/(2i).
        let n = 10_000;
        let y = transfer_x(&fam, n, z);
        let yp = transfer_x_prime(&fam, n, z);
        let ld = eigpair_derivative(&y, &yp).unwrap() * fam.a(n);
        let want = c(0.0, -0.5);
        assert!((ld - want).norm() < 0.01, "{ld}");
    }

    #[test]
    fn classification_of_the_builtins() {
        let cases = [
            (JacobiFamily::chebyshev(), CaseVariant::I),
            (JacobiFamily::hermite(), CaseVariant::I),
            (JacobiFamily::synthetic_iia(), CaseVariant::IIa),
            (JacobiFamily::laguerre(), CaseVariant::IIb),
            (JacobiFamily::meixner(0.5, 1.0).unwrap(), CaseVariant::III),
        ];
        for (fam, want) in cases {
            let cc = classify(&fam, 1000, DEFAULT_CLASS_TOL);
            assert_eq!(cc.variant, want, "{}", fam.name());
            assert!(cc.modulation_residual < 0.01, "{}", fam.name());
        }
        let s = classify(&JacobiFamily::synthetic_iia(), 1000, DEFAULT_CLASS_TOL);
        assert_eq!(s.epsilon, Some(-1));
        assert_relative_eq!(s.trace0, -2.0, epsilon = 1e-14);
        let l = classify(&JacobiFamily::laguerre(), 1000, DEFAULT_CLASS_TOL);
        assert_eq!(l.epsilon, Some(-1));
        let m = classify(&JacobiFamily::meixner(0.5, 1.0).unwrap(), 1000, DEFAULT_CLASS_TOL);
        assert_eq!(m.epsilon, Some(-1));
        assert_relative_eq!(m.trace0, -3.0 / 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn near_boundary_base_is_undecided() {
        let text = r#"{
            "name": "edge", "N": 1, "alpha": [1.0], "beta": [2.0000004],
            "a": [1.0, 2.0], "b": [0.0, 0.0]
        }"#;
        let fam = JacobiFamily::custom_from_json(text).unwrap();
        let cc = classify(&fam, 100, 1e-6);
        assert_eq!(cc.variant, CaseVariant::Undecided);
        // A wider tolerance sweeps it into the boundary class, a tighter one
        // into the hyperbolic class.
        assert_eq!(classify(&fam, 100, 1e-9).variant, CaseVariant::III);
    }

    #[test]
    fn discriminant_limits_for_the_two_parabolic_families() {
        // Tempered: h(x) = −4x.
        let lag = JacobiFamily::laguerre();
        let grid = [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let h = h_estimate(&lag, &grid, 100_000).unwrap();
        assert!(h.poly_fit.len() <= 3);
        assert!((h.fit_eval(1.0) + 4.0).abs() < 1e-3, "h(1) = {}", h.fit_eval(1.0));
        assert!((h.extrapolated - c(-2.0, 0.0)).norm() < 1e-3);
        assert!(h.residual < 1e-6);

        // Scalar: h(x) = −4x².
        let syn = JacobiFamily::synthetic_iia();
        let grid = [c(0.5, 0.0), c(1.0, 0.0), c(1.5, 0.0), c(2.5, 0.0)];
        let h = h_estimate(&syn, &grid, 50_000).unwrap();
        let c2 = h.poly_fit.get(2).copied().unwrap_or(0.0);
        assert!((c2 + 4.0).abs() < 1e-3, "leading coeff {c2}");
        assert!(c2 < 0.0);
        assert!(h.poly_fit[0].abs() < 1e-3 && h.poly_fit[1].abs() < 1e-3);
    }

    #[test]
    fn h_estimate_refuses_wrong_case() {
        let h = JacobiFamily::hermite();
        assert!(matches!(
            h_estimate(&h, &[c(1.0, 0.0)], 1000),
            Err(TransferError::UnsupportedCase(CaseVariant::I))
        ));
    }

    #[test]
    fn parabolic_data_of_the_tempered_family() {
        let lag = JacobiFamily::laguerre();
        let pd = parabolic_data(&lag, 100_000).unwrap();
        assert_eq!(pd.epsilon, -1);
        assert_eq!(pd.t_flag, 1);
        assert!(pd.s_big.abs() < 1e-6, "drift 𝔖 = {}", pd.s_big);
        assert!(pd.u_big.abs() < 1e-6, "drift 𝔘 = {}", pd.u_big);
        assert_relative_eq!(pd.tr_xprime0, 1.0, epsilon = 1e-12);
        // τ(z) = −z and h = 4ατ = −4z; the root sits at the origin.
        assert_c_close(pd.tau(c(2.0, 0.0)), c(-2.0, 0.0), 1e-5);
        assert_c_close(pd.h_from_tau(c(1.0, 0.0)), c(-4.0, 0.0), 1e-4);
        assert!(pd.tau_root().abs() < 1e-5);

        // The normal form reproduces the period product at the origin.
        let base = lag.base();
        let x0 = periodic_x(base, 0, c(0.0, 0.0));
        let p = Mat2C::from_re(0.0, 1.0, -1.0, 2.0);
        let recon = (pd.t0 * p * pd.t0.inv().unwrap()).scale(c(-1.0, 0.0));
        assert!((recon - x0).norm() < 1e-12);
    }

    #[test]
    fn parabolic_frame_contracts_to_identity() {
        let lag = JacobiFamily::laguerre();
        let pd = parabolic_data(&lag, 100_000).unwrap();
        let z = c(0.0, 1.0);
        for j in [100usize, 1_000, 10_000] {
            let f = parabolic_frame(&lag, &pd, j, z).unwrap();
            let dev = (f.y_j.scale(c(-1.0, 0.0)) - Mat2C::identity()).norm();
            let bound = 5.0 / (lag.gamma(j).unwrap()).sqrt();
            assert!(dev <= bound, "j={j}: dev {dev} vs {bound}");
        }
        // Domain refusal on the positive τ ray (τ(x) = −x ≥ 0 for x ≤ 0).
        assert!(matches!(
            parabolic_frame(&lag, &pd, 10, c(-1.0, 0.0)),
            Err(TransferError::DomainViolation(_))
        ));
    }

    #[test]
    fn diagonalization_reconstructs() {
        let y = Mat2C::from_re(0.0, 1.0, -0.96, 0.4);
        let d = diagonalize(&y).unwrap();
        assert!(d.recon_error <= 1e-10 * y.norm());
        // Columns have first entry 1.
        assert_c_close(d.c.m[0][0], c(1.0, 0.0), 0.0);
        assert_c_close(d.c.m[0][1], c(1.0, 0.0), 0.0);

        let upper = Mat2C::from_re(2.0, 0.0, 3.0, 0.5);
        assert!(matches!(diagonalize(&upper), Err(TransferError::ZeroUpperRight)));
    }

    #[test]
    fn levinson_products_grow_for_the_unbounded_baseline() {
        let fam = JacobiFamily::hermite();
        let lp = levinson_ratio_product(&fam, c(0.0, 1.0), 1, 2_000).unwrap();
        assert!(lp.log_partials.windows(2).all(|w| w[1] >= w[0]));
        // Σ 1/a_j ~ 2√(2n) at z = i: far past e^6 by j = 2000.
        assert!(lp.first_index_exceeding(6.0).is_some());
        assert!(*lp.log_partials.last().unwrap() > 50.0);
    }

    #[test]
    fn adaptive_start_skips_bad_blocks() {
        // At z = 0 the Laguerre block matrices have tr < 0 and positive det
        // for every j, but det → 1 while tr crosses the degenerate band;
        // the scan must still find an admissible start at z = i.
        let fam = JacobiFamily::laguerre();
        let j = adaptive_start_index(&fam, &[c(0.0, 1.0)], 1).unwrap();
        assert!(j >= 1);
        let lp = levinson_ratio_product(&fam, c(0.0, 1.0), j, j + 50).unwrap();
        assert_eq!(lp.log_partials.len(), 51);
    }

    #[test]
    fn profile_ratios_settle_for_the_unbounded_baseline() {
        let fam = JacobiFamily::hermite();
        let prof = asymptotic_profile(&fam, c(0.0, 1.0), 0, 1, 400).unwrap();
        assert!(prof.converged, "last delta {}", prof.last_delta);
        let r = *prof.ratios.last().unwrap();
        assert!(r.norm() > 1e-8, "profile collapsed: {r}");
        // The tail is Cauchy at the 1e-3 scale by k = 400.
        let prev = prof.ratios[prof.ratios.len() - 2];
        assert!((r - prev).norm() < 1e-3 * r.norm().max(1e-9));
    }
}
