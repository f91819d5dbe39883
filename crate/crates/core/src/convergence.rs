//! End-to-end experiments: normalized eigenvalue counts and kernel ratios
//! against their predicted limiting densities, bounded-case CDF sanity
//! checks, band densities of purely periodic operators, and gap counts in
//! regions that must stay spectrum-free.
//!
//! The experiments never integrate the model numerically — every model
//! integral goes through [`DensityModel::mass`]'s closed-form
//! antiderivatives — so a failing tolerance always points at the spectral
//! side.

use crate::cauchy::{CauchyError, DensityModel};
use crate::extrap::tail_is_settling_with_floor;
use crate::orthopoly;
use crate::params::{self, JacobiFamily, NormalizerKind, ParamError};
use crate::spectra::{self, CountingQuery, SpectraError};
use crate::transfer::{self, CaseVariant, TransferError};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvergenceError {
    #[error("ill-formed experiment plan: {0}")]
    BadPlan(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Cauchy(#[from] CauchyError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

// ---------------------------------------------------------------------------
// Test functions

/// Test function classes the counting measures are integrated against.
#[derive(Clone)]
pub enum TestFunction {
    /// 1 on `[a+ramp, b−ramp]`, 0 outside `[a, b]`, linear in between.
    Hat { a: f64, b: f64, ramp: f64 },
    /// `exp(−((x−center)/width)²)` cut to 0 beyond `cutoff` widths.
    TruncatedGaussian { center: f64, width: f64, cutoff: f64 },
    /// Arbitrary bounded-decay function carrying its declared
    /// `sup |(1+x²) f(x)|` bound.
    Weighted { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, sup_bound: f64 },
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Hat { a, b, ramp } => {
                write!(fmt, "Hat[{a}, {b}; ramp {ramp}]")
            }
            TestFunction::TruncatedGaussian { center, width, cutoff } => {
                write!(fmt, "TruncatedGaussian[{center} ± {cutoff}·{width}]")
            }
            TestFunction::Weighted { sup_bound, .. } => {
                write!(fmt, "Weighted[sup(1+x²)|f| ≤ {sup_bound}]")
            }
        }
    }
}

impl TestFunction {
    pub fn hat(a: f64, b: f64, ramp: f64) -> Result<Self, ConvergenceError> {
        if !(a < b) || ramp < 0.0 || 2.0 * ramp > b - a {
            return Err(ConvergenceError::BadPlan(format!(
                "hat needs a < b and 0 ≤ 2·ramp ≤ b−a, got [{a}, {b}], ramp {ramp}"
            )));
        }
        Ok(TestFunction::Hat { a, b, ramp })
    }

    pub fn truncated_gaussian(center: f64, width: f64, cutoff: f64) -> Result<Self, ConvergenceError> {
        if !(width > 0.0 && cutoff > 0.0) {
            return Err(ConvergenceError::BadPlan(format!(
                "gaussian needs positive width and cutoff, got {width}, {cutoff}"
            )));
        }
        Ok(TestFunction::TruncatedGaussian { center, width, cutoff })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Hat { a, b, ramp } => {
                if x <= *a || x >= *b {
                    0.0
                } else if *ramp == 0.0 {
                    1.0
                } else {
                    ((x - a) / ramp).min((b - x) / ramp).min(1.0)
                }
            }
            TestFunction::TruncatedGaussian { center, width, cutoff } => {
                let t = (x - center) / width;
                if t.abs() > *cutoff {
                    0.0
                } else {
                    (-t * t).exp()
                }
            }
            TestFunction::Weighted { f, .. } => f(x),
        }
    }

    /// Support interval; the weighted kind is unbounded and reports ±∞.
    pub fn support(&self) -> (f64, f64) {
        match self {
            TestFunction::Hat { a, b, .. } => (*a, *b),
            TestFunction::TruncatedGaussian { center, width, cutoff } => {
                (center - cutoff * width, center + cutoff * width)
            }
            TestFunction::Weighted { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `Σ_j f(λ_j)` over a computed spectrum — the integral of `f` against
    /// the counting measure.
    pub fn apply_to_spectrum(&self, spec: &crate::spectra::SpectrumResult) -> f64 {
        spec.eigenvalues.iter().map(|&x| self.eval(x)).sum()
    }
}

// ---------------------------------------------------------------------------
// Experiment plans

/// A declared density experiment: which family, which normalizer, which
/// truncation sizes, which intervals, and the tolerance the run is judged
/// against. Widened tolerances (slow normalizers) are declared here, never
/// applied silently.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub family: JacobiFamily,
    pub normalizer: NormalizerKind,
    /// ν-indices `n` (the measure ν_n counts the `(n+1)`-truncation).
    pub n_grid: Vec<usize>,
    pub intervals: Vec<(f64, f64)>,
    pub test_functions: Vec<TestFunction>,
    /// Judged against the final-`n` relative errors.
    pub tolerance: f64,
    /// Why the tolerance is wider than the default, when it is.
    pub widened_reason: Option<String>,
    pub label: String,
    /// Destination hint for whoever owns I/O; the experiment itself never
    /// writes anywhere.
    pub sink: Option<String>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), ConvergenceError> {
        if self.n_grid.is_empty() {
            return Err(ConvergenceError::BadPlan("empty n_grid".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConvergenceError::BadPlan(
                "n_grid must be strictly increasing".into(),
            ));
        }
        if self.intervals.is_empty() && self.test_functions.is_empty() {
            return Err(ConvergenceError::BadPlan(
                "plan needs at least one interval or test function".into(),
            ));
        }
        for &(lo, hi) in &self.intervals {
            if !(lo < hi) {
                return Err(ConvergenceError::BadPlan(format!(
                    "interval ({lo}, {hi}) is empty"
                )));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(ConvergenceError::BadPlan("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// One (interval, n) cell of a density experiment.
#[derive(Clone, Debug)]
pub struct DensityRow {
    pub family: String,
    pub variant: CaseVariant,
    pub n: usize,
    pub rho: f64,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `count / ρ_n`.
    pub normalized: f64,
    /// Closed-form model mass of the interval.
    pub predicted: f64,
    /// `|normalized − predicted| / |predicted|` (absolute error when the
    /// prediction is 0).
    pub rel_err: f64,
}

#[derive(Clone, Debug)]
pub struct DensityTable {
    /// Sorted by (n, interval).
    pub rows: Vec<DensityRow>,
    /// Intervals whose rel_err failed to shrink over the last half of the
    /// n-grid.
    pub slow_intervals: Vec<(f64, f64)>,
    pub tolerance: f64,
    pub label: String,
}

pub const DENSITY_CSV_HEADER: &str =
    "family, case, n, rho_n, interval_lo, interval_hi, count, normalized, predicted, rel_err";

impl DensityTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(DENSITY_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}, {}, {}, {}, {}, {}, {}, {}, {}, {}\n",
                r.family, r.variant, r.n, r.rho, r.lo, r.hi, r.count, r.normalized,
                r.predicted, r.rel_err
            ));
        }
        out
    }

    /// Final-`n` rows all within tolerance?
    pub fn pass(&self) -> bool {
        let last_n = self.rows.iter().map(|r| r.n).max().unwrap_or(0);
        self.rows
            .iter()
            .filter(|r| r.n == last_n)
            .all(|r| r.rel_err <= self.tolerance)
    }

    pub fn summary_json(&self) -> String {
        let last_n = self.rows.iter().map(|r| r.n).max().unwrap_or(0);
        let finals: Vec<serde_json::Value> = self
            .rows
            .iter()
            .filter(|r| r.n == last_n)
            .map(|r| {
                serde_json::json!({
                    "interval": [r.lo, r.hi],
                    "count": r.count,
                    "normalized": r.normalized,
                    "predicted": r.predicted,
                    "rel_err": r.rel_err,
                })
            })
            .collect();
        serde_json::json!({
            "label": self.label,
            "family": self.rows.first().map(|r| r.family.clone()).unwrap_or_default(),
            "n_final": last_n,
            "tolerance": self.tolerance,
            "pass": self.pass(),
            "slow_intervals": self.slow_intervals,
            "final_rows": finals,
        })
        .to_string()
    }
}

/// Run a density experiment: exact Sturm counts per (n, interval) against
/// the model's closed-form interval masses.
pub fn density_experiment(
    plan: &ExperimentPlan,
    model: &DensityModel,
) -> Result<DensityTable, ConvergenceError> {
    plan.validate()?;
    let family = &plan.family;
    let name = family.name().to_string();
    let mut rows = Vec::with_capacity(plan.n_grid.len() * plan.intervals.len());
    for &n in &plan.n_grid {
        let rho = params::rho(family, plan.normalizer, n)?;
        for &(lo, hi) in &plan.intervals {
            let count = spectra::count_in_interval(family, &CountingQuery::new(n + 1, lo, hi));
            let normalized = count as f64 / rho;
            let predicted = model.mass(lo, hi);
            let rel_err = if predicted != 0.0 {
                (normalized - predicted).abs() / predicted.abs()
            } else {
                normalized.abs()
            };
            rows.push(DensityRow {
                family: name.clone(),
                variant: model.variant,
                n,
                rho,
                lo,
                hi,
                count,
                normalized,
                predicted,
                rel_err,
            });
        }
    }
    rows.sort_by(|a, b| (a.n, a.lo).partial_cmp(&(b.n, b.lo)).unwrap());

    let mut slow_intervals = Vec::new();
    for &(lo, hi) in &plan.intervals {
        let errs: Vec<f64> = rows
            .iter()
            .filter(|r| r.lo == lo && r.hi == hi)
            .map(|r| r.rel_err)
            .collect();
        let m = errs.len();
        if m >= 2 {
            let mid = errs[(m - 1) / 2];
            let decreased = errs[m - 1] <= 0.9 * mid + 1e-12;
            if !decreased {
                slow_intervals.push((lo, hi));
            }
        }
    }
    Ok(DensityTable { rows, slow_intervals, tolerance: plan.tolerance, label: plan.label.clone() })
}

// ---------------------------------------------------------------------------
// Bounded-case CDF sanity

/// Sup-norm distance between the empirical CDF of the size-`n` truncation's
/// spectrum and the arcsine law `F(x) = 1/2 + arcsin(x)/π` — the known
/// limit for the chebyshev-like bounded baseline.
pub fn cdf_compare_bounded(family: &JacobiFamily, n: usize) -> Result<f64, ConvergenceError> {
    let (lo, hi) = spectra::gershgorin_bounds(family, n);
    let spec = spectra::eigenvalues(family, n, (hi - lo).max(1.0) * 1e-12)?;
    let arcsine = |x: f64| {
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            0.5 + x.asin() / PI
        }
    };
    let nf = n as f64;
    let mut sup: f64 = 0.0;
    for (j, &x) in spec.eigenvalues.iter().enumerate() {
        let fx = arcsine(x);
        sup = sup
            .max((fx - j as f64 / nf).abs())
            .max((fx - (j + 1) as f64 / nf).abs());
    }
    Ok(sup)
}

// ---------------------------------------------------------------------------
// Band density of the purely periodic background

/// Density of states of the purely `N`-periodic operator:
/// `|tr 𝔛'_N(x)| / (πN √(−discr 𝔛_N(x)))` inside the bands
/// `{|tr 𝔛_N| < 2}`, zero outside, `+∞` sentinel exactly at a band edge.
/// Integrates to 1 over the whole band set.
pub fn periodic_band_density(base: &crate::params::PeriodicBase, x: f64) -> f64 {
    let z = Complex64::new(x, 0.0);
    let xn = transfer::periodic_x(base, 0, z);
    let discr = xn.discr().re;
    if discr > 0.0 {
        return 0.0;
    }
    if discr == 0.0 {
        return f64::INFINITY;
    }
    let trp = transfer::periodic_x_prime(base, 0, z).tr().re;
    trp.abs() / (PI * base.period() as f64 * (-discr).sqrt())
}

// ---------------------------------------------------------------------------
// Kernel ratios

#[derive(Clone, Copy, Debug)]
pub struct KernelRatioRow {
    pub x: f64,
    pub n: usize,
    /// `K_n(x,x) / ρ_n`.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct KernelRatioTable {
    pub rows: Vec<KernelRatioRow>,
    /// Per grid point: did the ratio sequence settle along the n-grid?
    pub settled: Vec<(f64, bool)>,
}

/// Diagonal Christoffel–Darboux kernel values against the normalizer, per
/// `(x, n)`, with a per-`x` settling diagnostic along the n-grid.
pub fn kernel_ratio_experiment(
    family: &JacobiFamily,
    normalizer: NormalizerKind,
    x_grid: &[f64],
    n_grid: &[usize],
) -> Result<KernelRatioTable, ConvergenceError> {
    let mut rows = Vec::with_capacity(x_grid.len() * n_grid.len());
    let mut settled = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let mut seq = Vec::with_capacity(n_grid.len());
        for &n in n_grid {
            let ratio =
                orthopoly::cd_kernel_diag(family, n, x) / params::rho(family, normalizer, n)?;
            rows.push(KernelRatioRow { x, n, ratio });
            seq.push(Complex64::new(ratio, 0.0));
        }
        let scale = seq.iter().map(|v| v.norm()).fold(0.0, f64::max);
        settled.push((x, tail_is_settling_with_floor(&seq, 1e-3 * scale)));
    }
    Ok(KernelRatioTable { rows, settled })
}

// ---------------------------------------------------------------------------
// Gap counts

#[derive(Clone, Debug)]
pub struct GapCountTable {
    /// `(ν-index n, eigenvalues of the (n+1)-truncation inside the interval)`.
    pub counts: Vec<(usize, usize)>,
    pub max_count: usize,
    /// No variation over the last quarter of the n-grid.
    pub eventually_constant: bool,
}

/// Count eigenvalues falling in an interval that the limiting theory
/// predicts to be spectrum-free or purely discrete: the counts must stay
/// bounded (and eventually constant) as `n` grows.
pub fn gap_count_experiment(
    family: &JacobiFamily,
    interval: (f64, f64),
    n_grid: &[usize],
) -> Result<GapCountTable, ConvergenceError> {
    if n_grid.is_empty() {
        return Err(ConvergenceError::BadPlan("empty n_grid".into()));
    }
    if !(interval.0 < interval.1) {
        return Err(ConvergenceError::BadPlan(format!(
            "interval ({}, {}) is empty",
            interval.0, interval.1
        )));
    }
    let mut counts = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let c = spectra::count_in_interval(
            family,
            &CountingQuery::new(n + 1, interval.0, interval.1),
        );
        counts.push((n, c));
    }
    let max_count = counts.iter().map(|&(_, c)| c).max().unwrap();
    let tail_start = counts.len() - counts.len().div_ceil(4);
    let tail = &counts[tail_start..];
    let eventually_constant = tail.iter().all(|&(_, c)| c == tail[0].1);
    Ok(GapCountTable { counts, max_count, eventually_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::cauchy::closed_form_density;
    use crate::params::PeriodicBase;

    fn hermite_plan(n_grid: Vec<usize>) -> ExperimentPlan {
        ExperimentPlan {
            family: JacobiFamily::hermite(),
            normalizer: NormalizerKind::SumAlphaOverA,
            n_grid,
            intervals: vec![(-1.0, 1.0)],
            test_functions: vec![],
            tolerance: 0.25,
            widened_reason: None,
            label: "hermite-density".into(),
            sink: None,
        }
    }

    #[test]
    fn plan_validation_catches_malformed_grids() {
        let mut p = hermite_plan(vec![100, 100]);
        assert!(matches!(p.validate(), Err(ConvergenceError::BadPlan(_))));
        p.n_grid = vec![100, 200];
        p.intervals.clear();
        assert!(p.validate().is_err());
        p.intervals = vec![(1.0, -1.0)];
        assert!(p.validate().is_err());
        p.intervals = vec![(-1.0, 1.0)];
        p.tolerance = 0.0;
        assert!(p.validate().is_err());
        p.tolerance = 0.1;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn test_functions_evaluate_and_sum() {
        let hat = TestFunction::hat(0.0, 4.0, 1.0).unwrap();
        assert_eq!(hat.eval(-0.5), 0.0);
        assert_eq!(hat.eval(2.0), 1.0);
        assert_relative_eq!(hat.eval(0.5), 0.5);
        assert_relative_eq!(hat.eval(3.75), 0.25);
        assert_eq!(hat.support(), (0.0, 4.0));
        assert!(TestFunction::hat(0.0, 1.0, 0.6).is_err());

        let g = TestFunction::truncated_gaussian(1.0, 2.0, 3.0).unwrap();
        assert_relative_eq!(g.eval(1.0), 1.0);
        assert_eq!(g.eval(7.5), 0.0);
        assert_relative_eq!(g.eval(3.0), (-1.0f64).exp());

        let w = TestFunction::Weighted {
            f: Arc::new(|x: f64| 1.0 / (1.0 + x * x)),
            sup_bound: 1.0,
        };
        let spec = crate::spectra::SpectrumResult {
            n: 2,
            eigenvalues: vec![0.0, 1.0],
            tol: 0.0,
        };
        assert_relative_eq!(w.apply_to_spectrum(&spec), 1.5);
        // Atom at 0 sits exactly on the hat's support boundary (value 0);
        // the atom at 1 is past the ramp (value 1).
        assert_relative_eq!(hat.apply_to_spectrum(&spec), 1.0);
    }

    #[test]
    fn hermite_counts_converge_to_the_flat_density() {
        let plan = hermite_plan(vec![200, 400, 800]);
        let model = DensityModel::from_family(&plan.family, 10_000).unwrap();
        let table = density_experiment(&plan, &model).unwrap();
        assert_eq!(table.rows.len(), 3);
        // Counts nondecreasing in n; all rows already inside the declared
        // tolerance at these sizes.
        let counts: Vec<usize> = table.rows.iter().map(|r| r.count).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
        for r in &table.rows {
            assert_relative_eq!(r.predicted, 1.0 / PI, epsilon = 1e-12);
            assert!(r.rel_err < 0.25, "n={} rel_err={}", r.n, r.rel_err);
        }
        assert!(table.pass());
    }

    #[test]
    fn csv_and_summary_shapes_are_stable() {
        let plan = hermite_plan(vec![50, 100]);
        let model = DensityModel::from_family(&plan.family, 10_000).unwrap();
        let table = density_experiment(&plan, &model).unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), DENSITY_CSV_HEADER);
        assert_eq!(csv.lines().count(), 1 + table.rows.len());
        for line in lines {
            assert_eq!(line.split(", ").count(), 10, "{line}");
        }
        let summary: serde_json::Value =
            serde_json::from_str(&table.summary_json()).unwrap();
        assert_eq!(summary["label"], "hermite-density");
        assert_eq!(summary["n_final"], 100);
        assert!(summary["pass"].is_boolean());
    }

    #[test]
    fn bounded_baseline_matches_the_arcsine_law() {
        let cheb = JacobiFamily::chebyshev();
        // Single eigenvalue at 0: the empirical CDF jumps 0 → 1 where the
        // arcsine CDF is 1/2.
        let d1 = cdf_compare_bounded(&cheb, 1).unwrap();
        assert_relative_eq!(d1, 0.5, epsilon = 1e-12);

        let d100 = cdf_compare_bounded(&cheb, 100).unwrap();
        let d1000 = cdf_compare_bounded(&cheb, 1000).unwrap();
        // Nodes cos(kπ/(n+1)) give sup distance 1/(n+1).
        assert!(d100 < 0.012, "{d100}");
        assert!(d1000 < 0.0012, "{d1000}");
        assert!(d1000 < d100);
    }

    #[test]
    fn band_density_of_the_free_baseline() {
        let base = PeriodicBase::new(vec![0.5], vec![0.0]).unwrap();
        assert_relative_eq!(periodic_band_density(&base, 0.0), 1.0 / PI, epsilon = 1e-14);
        // Arcsine density elsewhere inside the band.
        assert_relative_eq!(
            periodic_band_density(&base, 0.6),
            1.0 / (PI * (1.0f64 - 0.36).sqrt()),
            epsilon = 1e-12
        );
        assert_eq!(periodic_band_density(&base, 1.5), 0.0);
        assert_eq!(periodic_band_density(&base, -2.0), 0.0);
        // Exact band edge: the discriminant vanishes exactly and the
        // sentinel comes back.
        assert!(periodic_band_density(&base, 1.0).is_infinite());
    }

    /// Composite Simpson after the edge-absorbing substitution
    /// `x = m + r·sin θ`: band densities blow up like 1/√(edge distance),
    /// which the cosine Jacobian cancels.
    fn band_mass(base: &PeriodicBase, lo: f64, hi: f64) -> f64 {
        let m = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        let steps = 200_000;
        let h = PI / steps as f64;
        let f = |theta: f64| {
            // The transformed integrand density·r·cosθ has a finite limit at
            // ±π/2 (the cosine cancels the edge singularity) but evaluates
            // as ∞·0 exactly there; sample a hair inside instead.
            let th = theta.clamp(-0.5 * PI + 1e-7, 0.5 * PI - 1e-7);
            periodic_band_density(base, m + r * th.sin()) * r * th.cos()
        };
        let mut acc = f(-0.5 * PI) + f(0.5 * PI);
        for k in 1..steps {
            let theta = -0.5 * PI + k as f64 * h;
            acc += f(theta) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn band_density_integrates_to_one() {
        // One band [−1, 1] (arcsine): mass 1.
        let free = PeriodicBase::new(vec![0.5], vec![0.0]).unwrap();
        assert_relative_eq!(band_mass(&free, -1.0, 1.0), 1.0, epsilon = 1e-6);

        // Period 2, two bands at ±(1, 3): tr 𝔛 = x²/2 − 5/2, so the
        // substitution u = tr/2 gives exactly 1/2 per band.
        let two = PeriodicBase::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let m = band_mass(&two, 1.0, 3.0) + band_mass(&two, -3.0, -1.0);
        assert_relative_eq!(m, 1.0, epsilon = 1e-6);
        // Parity for β ≡ 0.
        for x in [1.3, 2.0, 2.9] {
            assert_relative_eq!(
                periodic_band_density(&two, x),
                periodic_band_density(&two, -x),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn kernel_ratios_follow_the_closed_form_at_zero() {
        let cheb = JacobiFamily::chebyshev();
        let grid = [40usize, 80, 160, 320];
        let table = kernel_ratio_experiment(&cheb, NormalizerKind::Count, &[0.0], &grid).unwrap();
        // K_n(0,0) = Σ_{k≤n} U_k(0)² = ⌈(n+1)/2⌉, so the Count-normalized
        // ratio tends to 1/2.
        for row in &table.rows {
            let want = ((row.n + 1).div_ceil(2)) as f64 / (row.n + 1) as f64;
            assert_relative_eq!(row.ratio, want, epsilon = 1e-12);
            assert!(row.ratio > 0.0);
        }
        let last = table.rows.last().unwrap().ratio;
        assert!((last - 0.5).abs() < 2e-3, "{last}");
        assert!(table.settled[0].1);
    }

    #[test]
    fn hermite_kernel_ratio_settles() {
        let h = JacobiFamily::hermite();
        let grid = [100usize, 200, 400, 800, 1600];
        let table =
            kernel_ratio_experiment(&h, NormalizerKind::SumAlphaOverA, &[0.0, 0.5], &grid)
                .unwrap();
        assert!(table.rows.iter().all(|r| r.ratio > 0.0));
        for &(x, ok) in &table.settled {
            assert!(ok, "ratios at x = {x} did not settle");
        }
        // Consistency with the predicted flat density 1/(2π): the kernel
        // ratio at the center approaches a positive constant of that size.
        let last = table.rows.iter().filter(|r| r.x == 0.0).last().unwrap();
        assert!(
            (0.5 / PI..2.0 / PI).contains(&last.ratio),
            "ratio {}",
            last.ratio
        );
    }

    #[test]
    fn spectrum_free_regions_stay_empty() {
        let lag = JacobiFamily::laguerre();
        let grid = [100usize, 200, 400, 800];
        let t = gap_count_experiment(&lag, (-2.0, -1.0), &grid).unwrap();
        assert_eq!(t.max_count, 0);
        assert!(t.eventually_constant);

        let mex = JacobiFamily::meixner(0.5, 1.0).unwrap();
        let t = gap_count_experiment(&mex, (-10.0, -5.0), &grid).unwrap();
        assert_eq!(t.max_count, 0);
        assert!(t.eventually_constant);
    }

    #[test]
    fn discrete_spectrum_counts_stabilize() {
        let mex = JacobiFamily::meixner(0.5, 1.0).unwrap();
        let grid = [100usize, 200, 400, 800, 1600];
        let t = gap_count_experiment(&mex, (0.0, 10.0), &grid).unwrap();
        assert!(t.eventually_constant, "counts {:?}", t.counts);
        assert!(t.max_count > 0, "expected some discrete spectrum in (0, 10)");
        // Bounded over the grid, not growing with n.
        let first = t.counts.first().unwrap().1;
        let last = t.counts.last().unwrap().1;
        assert!(last <= first + 5, "counts {:?}", t.counts);
    }

    #[test]
    fn laguerre_interval_masses_feed_the_experiment() {
        // End-to-end on the square-root edge: counts near 0 against the
        // closed-form ∫ 1/(2π√x).
        let plan = ExperimentPlan {
            family: JacobiFamily::laguerre(),
            normalizer: NormalizerKind::SumSqrtAlphaGammaOverA,
            n_grid: vec![500, 1000, 2000],
            intervals: vec![(0.0, 1.0)],
            test_functions: vec![],
            tolerance: 0.3,
            widened_reason: None,
            label: "laguerre-edge".into(),
            sink: None,
        };
        let model = DensityModel::from_family(&plan.family, 50_000).unwrap();
        let table = density_experiment(&plan, &model).unwrap();
        assert_relative_eq!(table.rows[0].predicted, 1.0 / PI, epsilon = 1e-6);
        assert!(table.pass(), "{}", table.summary_json());
        // The model density itself is the √-edge profile.
        assert_relative_eq!(
            closed_form_density(&model, 0.25),
            1.0 / PI,
            epsilon = 1e-4
        );
    }
}
