//! Cauchy transforms of counting and kernel measures, the predicted limit
//! functions `g(z)` for each spectral case, the recentred `ω̃` transform,
//! and Stieltjes inversion back to densities.
//!
//! Conventions. The Cauchy transform of a measure `ω` is
//! `𝒞[ω](z) = ∫ (x − z)⁻¹ dω(x)`, a Herglotz function for positive `ω`
//! (it maps the upper half-plane into its closure). The counting measure
//! `ν_n` puts a unit atom at each eigenvalue of the `(n+1) × (n+1)`
//! truncation — equivalently at each zero of `p_{n+1}` — so
//! `𝒞[ν_n] = −p'_{n+1}/p_{n+1}`. All square roots are principal.

use crate::extrap::{neville_at_zero, neville_at_zero_real};
use crate::orthopoly;
use crate::params::JacobiFamily;
use crate::spectra::SpectrumResult;
use crate::transfer::{
    self, classify, CaseVariant, TransferError, DEFAULT_CLASS_TOL,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CauchyError {
    #[error("point {0} is outside the admissible domain: {1}")]
    DomainViolation(Complex64, String),
    #[error("transform has a pole at the excluded point {0}")]
    ExcludedPoint(Complex64),
    #[error("no closed-form limit for case {0}")]
    UnsupportedCase(CaseVariant),
    #[error("family {0} has no built-in orthogonality weight")]
    UnknownWeight(String),
    #[error("quadrature did not reach tolerance {target:.1e} (error estimate {achieved:.1e})")]
    QuadratureNonConvergence { achieved: f64, target: f64 },
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Spectra(#[from] crate::spectra::SpectraError),
}

/// One evaluation of a normalized Cauchy transform along an `n`-sweep.
#[derive(Clone, Copy, Debug)]
pub struct CauchySample {
    pub z: Complex64,
    /// `(1/ρ_n) · 𝒞[ν_n](z)`.
    pub value: Complex64,
    pub n: usize,
    /// The normalizer `ρ_n` that was applied.
    pub normalizer: f64,
}

// ---------------------------------------------------------------------------
// The two discrete routes

/// `Σ_j 1/(x_j − z)` over the eigenvalues of a computed spectrum.
pub fn cauchy_discrete(spec: &SpectrumResult, z: Complex64) -> Complex64 {
    assert!(z.im != 0.0, "Cauchy transform needs Im z ≠ 0");
    spec.eigenvalues
        .iter()
        .map(|&x| (Complex64::new(x, 0.0) - z).inv())
        .sum()
}

/// `−p'_{n+1}(z)/p_{n+1}(z)`: the same transform as [`cauchy_discrete`] of
/// the `(n+1)`-truncation spectrum, but in `O(n)` time through the scaled
/// joint recurrence — no eigenvalues needed.
pub fn cauchy_via_logderiv(family: &JacobiFamily, n: usize, z: Complex64) -> Complex64 {
    assert!(z.im != 0.0, "Cauchy transform needs Im z ≠ 0");
    let q = orthopoly::eval_pn_derivative(family, n, z);
    // Shared log scale cancels in the ratio.
    -q.dp_n1 / q.p_n1
}

// ---------------------------------------------------------------------------
// Limiting density models

/// Descriptor of a predicted limiting eigenvalue-counting density.
///
/// Exactly one shape is active per case: the elliptic case carries a
/// constant `level`; both parabolic cases carry the limit polynomial `h`
/// (ascending coefficients, degree ≤ 2), the region `Λ₋ = {h < 0}`, and a
/// precomputed normalization constant.
#[derive(Clone, Debug)]
pub struct DensityModel {
    pub variant: CaseVariant,
    /// Constant density value (elliptic case only, else 0).
    pub level: f64,
    /// Coefficients of `h`, ascending (parabolic cases only, else empty).
    pub h: Vec<f64>,
    /// Maximal intervals of `{x : h(x) < 0}`, with ±∞ endpoints allowed.
    pub lambda_minus: Vec<(f64, f64)>,
    /// `1/(4πNα_{N−1})` for the scalar-parabolic density
    /// `norm·|h'|/√(−h)`; `√α_{N−1}·|tr 𝔛'₀(0)|/(πN)` for the
    /// Jordan-parabolic density `norm/√(−h)`.
    pub norm_const: f64,
    pub period: usize,
    pub alpha_last: f64,
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

fn poly_eval_c(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &ck)| k as f64 * ck).collect()
}

/// `{x : h(x) < 0}` as maximal intervals, for `deg h ≤ 2`.
fn negativity_set(h: &[f64]) -> Vec<(f64, f64)> {
    let deg = h.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    let inf = f64::INFINITY;
    match deg {
        0 => {
            if h.first().copied().unwrap_or(0.0) < 0.0 {
                vec![(-inf, inf)]
            } else {
                vec![]
            }
        }
        1 => {
            let r = -h[0] / h[1];
            if h[1] < 0.0 {
                vec![(r, inf)]
            } else {
                vec![(-inf, r)]
            }
        }
        _ => {
            let (c0, c1, c2) = (h[0], h[1], h[2]);
            let disc = c1 * c1 - 4.0 * c0 * c2;
            if disc <= 0.0 {
                // No sign change: the parabola stays on one side (touching
                // zero at most at one point, which has measure zero).
                return if c2 < 0.0 { vec![(-inf, inf)] } else { vec![] };
            }
            let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
            let (mut r1, mut r2) = (q / c2, c0 / q);
            if r1 > r2 {
                std::mem::swap(&mut r1, &mut r2);
            }
            if c2 < 0.0 {
                vec![(-inf, r1), (r2, inf)]
            } else {
                vec![(r1, r2)]
            }
        }
    }
}

pub const DEFAULT_MODEL_DEPTH: usize = 100_000;

impl DensityModel {
    /// Build the predicted limiting-density descriptor of a family: the
    /// classification decides the shape, and the parameters come from the
    /// periodic base (elliptic) or from the extrapolated limits of the
    /// transfer-matrix data (parabolic), probed up to index ≈ `depth`.
    pub fn from_family(family: &JacobiFamily, depth: usize) -> Result<Self, CauchyError> {
        let base = family.base();
        let period = base.period();
        let alpha_last = base.alpha(period as i64 - 1);
        let origin = Complex64::new(0.0, 0.0);
        let cc = classify(family, depth.min(10_000).max(16), DEFAULT_CLASS_TOL);
        let trp = transfer::periodic_x_prime(base, 0, origin).tr().re;
        match cc.variant {
            CaseVariant::I => {
                let discr0 = transfer::periodic_x(base, 0, origin).discr().re;
                let level = trp.abs() / (PI * period as f64 * (-discr0).sqrt());
                Ok(DensityModel {
                    variant: CaseVariant::I,
                    level,
                    h: Vec::new(),
                    lambda_minus: vec![(f64::NEG_INFINITY, f64::INFINITY)],
                    norm_const: 0.0,
                    period,
                    alpha_last,
                })
            }
            CaseVariant::IIa => {
                let grid: Vec<Complex64> = [-2.5, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.5]
                    .iter()
                    .map(|&x| Complex64::new(x, 0.0))
                    .collect();
                let he = transfer::h_estimate(family, &grid, (depth / period).max(64))?;
                let h = he.poly_fit.clone();
                let lambda_minus = negativity_set(&h);
                Ok(DensityModel {
                    variant: CaseVariant::IIa,
                    level: 0.0,
                    lambda_minus,
                    norm_const: 1.0 / (4.0 * PI * period as f64 * alpha_last),
                    h,
                    period,
                    alpha_last,
                })
            }
            CaseVariant::IIb => {
                let pd = transfer::parabolic_data(family, depth)?;
                let c0 = 4.0 * alpha_last * (pd.s_big * pd.s_big / 4.0 + pd.u_big);
                let c1 = 4.0
                    * alpha_last
                    * pd.t_flag as f64
                    * pd.epsilon as f64
                    * pd.tr_xprime0;
                let h = if c1 == 0.0 { vec![c0] } else { vec![c0, c1] };
                let lambda_minus = negativity_set(&h);
                Ok(DensityModel {
                    variant: CaseVariant::IIb,
                    level: 0.0,
                    lambda_minus,
                    norm_const: alpha_last.sqrt() * pd.tr_xprime0.abs() / (PI * period as f64),
                    h,
                    period,
                    alpha_last,
                })
            }
            other => Err(CauchyError::UnsupportedCase(other)),
        }
    }

    pub fn h_at(&self, x: f64) -> f64 {
        poly_eval(&self.h, x)
    }

    pub fn h_prime_at(&self, x: f64) -> f64 {
        poly_eval(&poly_deriv(&self.h), x)
    }

    pub fn in_lambda_minus(&self, x: f64) -> bool {
        self.lambda_minus.iter().any(|&(a, b)| a < x && x < b)
    }

    /// Exact integral of the density over `[lo, hi]`, by closed-form
    /// antiderivatives: the elliptic density is constant; for the parabolic
    /// densities `∫ |h'|/√(−h) = ∓2√(−h)` on pieces where `h'` keeps its
    /// sign, and `∫ 1/√(−h) = ∓(2/h')√(−h)` for affine `h`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        assert!(lo <= hi);
        if self.variant == CaseVariant::I {
            return self.level * (hi - lo);
        }
        let mut total = 0.0;
        for &(a, b) in &self.lambda_minus {
            let p = lo.max(a);
            let q = hi.min(b);
            if p >= q {
                continue;
            }
            match self.variant {
                CaseVariant::IIa => {
                    // Split at the vertex so |h'| has a constant sign.
                    let mut cuts = vec![p, q];
                    if self.h.len() == 3 && self.h[2] != 0.0 {
                        let v = -self.h[1] / (2.0 * self.h[2]);
                        if p < v && v < q {
                            cuts.insert(1, v);
                        }
                    }
                    for w in cuts.windows(2) {
                        let s0 = (-self.h_at(w[0])).max(0.0).sqrt();
                        let s1 = (-self.h_at(w[1])).max(0.0).sqrt();
                        total += self.norm_const * 2.0 * (s1 - s0).abs();
                    }
                }
                CaseVariant::IIb => {
                    let c1 = self.h.get(1).copied().unwrap_or(0.0);
                    if c1 == 0.0 {
                        let d = (-self.h_at(0.5 * (p + q))).max(0.0).sqrt();
                        if d > 0.0 {
                            total += self.norm_const * (q - p) / d;
                        }
                    } else {
                        let s0 = (-self.h_at(p)).max(0.0).sqrt();
                        let s1 = (-self.h_at(q)).max(0.0).sqrt();
                        total += self.norm_const * 2.0 * (s1 - s0).abs() / c1.abs();
                    }
                }
                _ => unreachable!("mass is defined for cases I, IIa, IIb"),
            }
        }
        total
    }
}

/// Pointwise limiting density of a model.
///
/// Elliptic: the constant level everywhere. Scalar parabolic:
/// `norm·|h'(x)|/√(−h(x))` on `Λ₋`, else 0. Jordan parabolic:
/// `norm/√(−h(x))` on `Λ₋`, else 0. Exactly at a root of `h` the value is
/// `+∞` (a one-sided integrable singularity left to the integration layer),
/// except the scalar-parabolic case with `h'(x) = 0` too, where the
/// density extends continuously but the point itself is outside `Λ₋` and
/// reports 0.
pub fn closed_form_density(model: &DensityModel, x: f64) -> f64 {
    match model.variant {
        CaseVariant::I => model.level,
        CaseVariant::IIa => {
            let hx = model.h_at(x);
            let hp = model.h_prime_at(x);
            if hx < 0.0 {
                model.norm_const * hp.abs() / (-hx).sqrt()
            } else if hx == 0.0 && hp != 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        }
        CaseVariant::IIb => {
            let hx = model.h_at(x);
            if hx < 0.0 {
                model.norm_const / (-hx).sqrt()
            } else if hx == 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        }
        _ => f64::NAN,
    }
}

/// The predicted limit of `(1/ρ_n) 𝒞[ν_n](z)` on the upper half-plane.
///
/// Elliptic: the constant `i·|tr 𝔛'₀(0)|/(N√(−discr 𝔛₀(0))) = iπ·level`.
/// Scalar parabolic: `−h'(z)/(4Nα_{N−1}√h(z))`. Jordan parabolic:
/// `−h'(z)/(4N√α_{N−1}·√h(z))`. Principal square roots; evaluation refuses
/// points where `h(z)` lands on the closed negative ray, where the
/// principal branch degenerates (for real-rooted `h` this never happens in
/// the open upper half-plane).
pub fn limit_g(model: &DensityModel, z: Complex64) -> Result<Complex64, CauchyError> {
    if z.im <= 0.0 {
        return Err(CauchyError::DomainViolation(
            z,
            "the limit function lives on the upper half-plane".into(),
        ));
    }
    match model.variant {
        CaseVariant::I => Ok(Complex64::new(0.0, PI * model.level)),
        CaseVariant::IIa | CaseVariant::IIb => {
            let hz = poly_eval_c(&model.h, z);
            if hz.im == 0.0 && hz.re <= 0.0 {
                return Err(CauchyError::DomainViolation(
                    z,
                    format!("h(z) = {hz} lies on the branch cut"),
                ));
            }
            let hp = poly_eval_c(&poly_deriv(&model.h), z);
            let nf = model.period as f64;
            let denom = if model.variant == CaseVariant::IIa {
                4.0 * nf * model.alpha_last
            } else {
                4.0 * nf * model.alpha_last.sqrt()
            };
            Ok(-hp / (denom * hz.sqrt()))
        }
        other => Err(CauchyError::UnsupportedCase(other)),
    }
}

// ---------------------------------------------------------------------------
// The recentred ω̃ transform

/// The transform
/// `ω̃(z) = (g(z) − Re g(z₀) − ((z−x₀)/y₀)·Im g(z₀)) / ((z−x₀)² + y₀²)`,
/// built from a Herglotz function handle and a recentring point
/// `z₀ = x₀ + iy₀` in the upper half-plane. When `g` is the Cauchy
/// transform of a limit of normalized counting measures, `ω̃` is the Cauchy
/// transform of a finite positive measure of total mass at most
/// `Im g(z₀)/y₀`.
pub struct OmegaTilde<'g> {
    pub z0: Complex64,
    pub mass_bound: f64,
    g_z0: Complex64,
    g: Box<dyn Fn(Complex64) -> Complex64 + 'g>,
}

impl<'g> std::fmt::Debug for OmegaTilde<'g> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OmegaTilde")
            .field("z0", &self.z0)
            .field("mass_bound", &self.mass_bound)
            .finish_non_exhaustive()
    }
}

impl<'g> OmegaTilde<'g> {
    pub fn new(
        g: impl Fn(Complex64) -> Complex64 + 'g,
        z0: Complex64,
    ) -> Result<Self, CauchyError> {
        if z0.im <= 0.0 {
            return Err(CauchyError::DomainViolation(
                z0,
                "recentring point must lie in the upper half-plane".into(),
            ));
        }
        let g_z0 = g(z0);
        Ok(OmegaTilde { z0, mass_bound: g_z0.im / z0.im, g_z0, g: Box::new(g) })
    }

    /// Evaluate the transform. The denominator `(z−z₀)(z−z̄₀)` vanishes at
    /// `z₀`, where the numerator vanishes too (a removable point that is
    /// refused rather than patched).
    pub fn eval(&self, z: Complex64) -> Result<Complex64, CauchyError> {
        if z.im <= 0.0 {
            return Err(CauchyError::DomainViolation(
                z,
                "transform domain is the upper half-plane".into(),
            ));
        }
        if (z - self.z0).norm() < 1e-9 * (1.0 + self.z0.norm()) {
            return Err(CauchyError::ExcludedPoint(self.z0));
        }
        let x0 = self.z0.re;
        let y0 = self.z0.im;
        let dz = z - x0;
        let num = (self.g)(z) - self.g_z0.re - dz * (self.g_z0.im / y0);
        Ok(num / (dz * dz + y0 * y0))
    }
}

pub fn omega_tilde_transform(ot: &OmegaTilde<'_>, z: Complex64) -> Result<Complex64, CauchyError> {
    ot.eval(z)
}

// ---------------------------------------------------------------------------
// Stieltjes inversion

pub const DEFAULT_EPS_SEQ: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Boundary-density estimate at one real point.
#[derive(Clone, Debug)]
pub struct DensityEstimate {
    /// `(ε, Im g(x+iε)/π)` along the supplied sequence.
    pub samples: Vec<(f64, f64)>,
    /// Richardson limit of the samples at `ε = 0`.
    pub value: f64,
    /// The samples grow like `1/ε`: a singular (non-a.c.) contribution
    /// sits at this point and `value` is not a density.
    pub singular: bool,
}

/// Stieltjes inversion `(1/π)·lim_{ε↓0} Im g(x+iε)`, extrapolated in ε.
/// Divergence (an atom or other singular part at `x`) is reported through
/// the flag, never thrown.
pub fn stieltjes_density(
    g: impl Fn(Complex64) -> Complex64,
    x: f64,
    eps_seq: &[f64],
) -> DensityEstimate {
    assert!(eps_seq.len() >= 4, "need at least 4 ε values to extrapolate");
    assert!(
        eps_seq.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0),
        "ε sequence must decrease to 0"
    );
    let samples: Vec<(f64, f64)> = eps_seq
        .iter()
        .map(|&e| (e, g(Complex64::new(x, e)).im / PI))
        .collect();
    let first = samples.first().unwrap().1;
    let last = samples.last().unwrap().1;
    // Growth exponent of the samples in 1/ε: an atom gives exactly +1,
    // absolutely continuous points give ≈ 0.
    let singular = first > 0.0 && last > 0.0 && {
        let growth = (last / first).ln() / (eps_seq[0] / eps_seq[eps_seq.len() - 1]).ln();
        growth > 0.5
    };
    let ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let value = neville_at_zero_real(&ts, &ys);
    DensityEstimate { samples, value, singular }
}

/// Mass of an atom of the measure behind `g` at `x₀`:
/// `lim_{z→x₀} (x₀ − z)·g(z)` along `z = x₀ + iε`, extrapolated in ε.
/// Zero (up to extrapolation error) when no atom sits at `x₀`.
pub fn stieltjes_atom_mass(
    g: impl Fn(Complex64) -> Complex64,
    x0: f64,
    eps_seq: &[f64],
) -> f64 {
    assert!(eps_seq.len() >= 2);
    let vals: Vec<Complex64> = eps_seq
        .iter()
        .map(|&e| {
            let z = Complex64::new(x0, e);
            (Complex64::new(x0, 0.0) - z) * g(z)
        })
        .collect();
    neville_at_zero(eps_seq, &vals).re
}

// ---------------------------------------------------------------------------
// Kernel-measure transforms and the counting-vs-kernel gap

/// Orthogonality weights known in closed form, for computing kernel-measure
/// integrals `∫ (Σ_{k≤n} p_k²) w dx` by quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KnownWeight {
    /// `(2/π)√(1−x²)` on `[−1, 1]`.
    ChebyshevU,
    /// `e^{−x²}/√π` on ℝ.
    HermiteGauss,
    /// `e^{−x}` on `[0, ∞)`.
    LaguerreExp,
}

impl KnownWeight {
    pub fn for_family(family: &JacobiFamily) -> Option<KnownWeight> {
        match family.name() {
            "chebyshev" => Some(KnownWeight::ChebyshevU),
            "hermite" => Some(KnownWeight::HermiteGauss),
            "laguerre" => Some(KnownWeight::LaguerreExp),
            _ => None,
        }
    }

    pub fn log_eval(&self, x: f64) -> f64 {
        match self {
            KnownWeight::ChebyshevU => {
                if x.abs() >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    (2.0 / PI).ln() + 0.5 * ((1.0 - x).ln() + (1.0 + x).ln())
                }
            }
            KnownWeight::HermiteGauss => -x * x - 0.5 * PI.ln(),
            KnownWeight::LaguerreExp => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -x
                }
            }
        }
    }

    /// Interval outside which `K_n · w` is below double-precision noise.
    pub fn support(&self, n: usize) -> (f64, f64) {
        match self {
            KnownWeight::ChebyshevU => (-1.0, 1.0),
            KnownWeight::HermiteGauss => {
                let r = (2.0 * (n as f64 + 2.0)).sqrt() + 10.0;
                (-r, r)
            }
            KnownWeight::LaguerreExp => (0.0, 4.5 * n as f64 + 60.0),
        }
    }
}

struct QuadBudget {
    evals: usize,
    max_evals: usize,
}

/// Adaptive Simpson on complex-valued integrands, absolute tolerance.
fn adaptive_simpson<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: usize,
    budget: &mut QuadBudget,
) -> Result<Complex64, CauchyError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    budget.evals += 2;
    if budget.evals > budget.max_evals {
        return Err(CauchyError::QuadratureNonConvergence { achieved: f64::NAN, target: tol });
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol || b - a < 1e-14 * (a.abs() + b.abs() + 1.0) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(CauchyError::QuadratureNonConvergence {
            achieved: delta.norm() / 15.0,
            target: tol,
        });
    }
    let l = adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget)?;
    let r = adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)?;
    Ok(l + r)
}

/// `∫ f` over `[lo, hi]` split into `panels` initial panels (so oscillation
/// at the kernel's own frequency cannot alias past the refinement test).
fn integrate_panels<F: Fn(f64) -> Complex64>(
    f: F,
    lo: f64,
    hi: f64,
    panels: usize,
    tol: f64,
) -> Result<Complex64, CauchyError> {
    let mut budget = QuadBudget { evals: 0, max_evals: 4_000_000 };
    let mut total = Complex64::new(0.0, 0.0);
    let w = (hi - lo) / panels as f64;
    let per_tol = tol / panels as f64;
    for k in 0..panels {
        let a = lo + k as f64 * w;
        let b = a + w;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        budget.evals += 3;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += adaptive_simpson(&f, a, b, fa, fm, fb, whole, per_tol, 48, &mut budget)?;
    }
    Ok(total)
}

/// `𝒞[η_n](z) = ∫ K_n(x,x)/(x−z) dμ(x)` against a known weight, by
/// adaptive quadrature. `η_n` is the kernel measure `Σ_{k≤n} p_k² dμ`,
/// of total mass `n+1`.
pub fn kernel_cauchy_transform(
    family: &JacobiFamily,
    weight: KnownWeight,
    n: usize,
    z: Complex64,
    tol: f64,
) -> Result<Complex64, CauchyError> {
    assert!(z.im != 0.0);
    let (lo, hi) = weight.support(n);
    let f = |x: f64| {
        let t = orthopoly::cd_kernel_diag_log(family, n, x) + weight.log_eval(x);
        t.exp() / (Complex64::new(x, 0.0) - z)
    };
    integrate_panels(f, lo, hi, n / 2 + 16, tol)
}

/// `∫ K_n(x,x) dμ(x)`: must equal `n+1` (orthonormality), so it doubles as
/// a quadrature sanity check.
pub fn kernel_measure_mass(
    family: &JacobiFamily,
    weight: KnownWeight,
    n: usize,
    tol: f64,
) -> Result<f64, CauchyError> {
    let (lo, hi) = weight.support(n);
    let f = |x: f64| {
        let t = orthopoly::cd_kernel_diag_log(family, n, x) + weight.log_eval(x);
        Complex64::new(t.exp(), 0.0)
    };
    Ok(integrate_panels(f, lo, hi, n / 2 + 16, tol)?.re)
}

/// Comparison of the two measures with the same index: the counting
/// measure `ν_n` of the `(n+1)`-truncation and the kernel measure `η_n`.
#[derive(Clone, Copy, Debug)]
pub struct GapReport {
    pub nu_transform: Complex64,
    pub eta_transform: Complex64,
    /// `|𝒞[ν_n](z) − 𝒞[η_n](z)|`.
    pub gap: f64,
    /// The projection-rank bound `8/|Im z|` the gap must respect.
    pub bound: f64,
    /// `|𝒞[η_{n+L}](z) − 𝒞[η_n](z)|` for the requested shift `L`.
    pub shift_gap: Option<f64>,
    /// The total-variation bound `L/|Im z|` for the shift gap.
    pub shift_bound: Option<f64>,
    /// `∫ K_n dμ`, which must come out as `n+1`.
    pub kernel_mass: f64,
}

/// Measure the distance between the counting and kernel Cauchy transforms
/// at `z`, against the `8/|Im z|` bound; optionally also the `L`-shift
/// total-variation gap `|𝒞[η_{n+L}] − 𝒞[η_n]| ≤ L/|Im z|`.
pub fn counting_vs_kernel_gap(
    family: &JacobiFamily,
    n: usize,
    l_shift: usize,
    z: Complex64,
    quad_tol: f64,
) -> Result<GapReport, CauchyError> {
    let weight = KnownWeight::for_family(family)
        .ok_or_else(|| CauchyError::UnknownWeight(family.name().to_string()))?;
    let spec = crate::spectra::eigenvalues(family, n + 1, spectral_tol(family, n + 1))?;
    let nu = cauchy_discrete(&spec, z);
    let eta = kernel_cauchy_transform(family, weight, n, z, quad_tol)?;
    let (shift_gap, shift_bound) = if l_shift > 0 {
        let eta_l = kernel_cauchy_transform(family, weight, n + l_shift, z, quad_tol)?;
        ((eta_l - eta).norm().into(), (l_shift as f64 / z.im.abs()).into())
    } else {
        (None, None)
    };
    let kernel_mass = kernel_measure_mass(family, weight, n, quad_tol)?;
    Ok(GapReport {
        nu_transform: nu,
        eta_transform: eta,
        gap: (nu - eta).norm(),
        bound: 8.0 / z.im.abs(),
        shift_gap,
        shift_bound,
        kernel_mass,
    })
}

fn spectral_tol(family: &JacobiFamily, n: usize) -> f64 {
    let (lo, hi) = crate::spectra::gershgorin_bounds(family, n);
    (hi - lo) * 1e-13
}
