//! Entry sequences for unbounded Jacobi matrices with periodically modulated
//! parameters, and the normalizing sequences used throughout the experiments.
//!
//! A family supplies off-diagonal entries `a_n > 0` and diagonal entries
//! `b_n` together with an `N`-periodic base `(α, β)` describing the
//! modulation: `a_{n-1}/a_n → α_{n-1}/α_n` and `b_n/a_n → β_n/α_n` along each
//! residue class mod `N`. Some families additionally carry a tempering
//! sequence `γ_n` used by the square-root normalizer and by the parabolic
//! analysis in [`crate::transfer`].

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("invalid family option: {0}")]
    InvalidOption(String),
    #[error("custom family: {0}")]
    CustomFamily(String),
    #[error("normalizer needs a tempering sequence, but family `{0}` has none")]
    MissingGamma(String),
}

/// `N`-periodic positive weights `α` and real shifts `β`.
///
/// Indexing is modular and accepts negative indices, so `α_{-1}` means
/// `α_{N-1}`; the transfer-matrix layer leans on that wrap-around.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBase {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl PeriodicBase {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self, ParamError> {
        if alpha.is_empty() {
            return Err(ParamError::InvalidOption("period must be at least 1".into()));
        }
        if alpha.len() != beta.len() {
            return Err(ParamError::InvalidOption(format!(
                "alpha and beta must share a period (got {} and {})",
                alpha.len(),
                beta.len()
            )));
        }
        if let Some(bad) = alpha.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(ParamError::InvalidOption(format!(
                "alpha entries must be finite and positive (got {bad})"
            )));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(ParamError::InvalidOption("beta entries must be finite".into()));
        }
        Ok(Self { alpha, beta })
    }

    pub fn period(&self) -> usize {
        self.alpha.len()
    }

    fn wrap(&self, n: i64) -> usize {
        n.rem_euclid(self.alpha.len() as i64) as usize
    }

    pub fn alpha(&self, n: i64) -> f64 {
        self.alpha[self.wrap(n)]
    }

    pub fn beta(&self, n: i64) -> f64 {
        self.beta[self.wrap(n)]
    }
}

/// How a custom family's tables continue past their last entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExtendRule {
    /// Geometric continuation by the final table ratio. Needs table length
    /// ≥ 2; a zero penultimate diagonal entry falls back to holding.
    LastRatio,
    /// Hold the last table value.
    Constant,
}

#[derive(Clone, Debug, Deserialize)]
struct CustomSpec {
    name: String,
    #[serde(rename = "N")]
    period: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    #[serde(default)]
    gamma: Option<Vec<f64>>,
    #[serde(default)]
    extend: Option<ExtendRule>,
}

#[derive(Clone, Debug)]
struct CustomTables {
    a: Vec<f64>,
    b: Vec<f64>,
    gamma: Option<Vec<f64>>,
    extend: ExtendRule,
}

impl CustomTables {
    fn sample(table: &[f64], n: usize, extend: ExtendRule) -> f64 {
        if n < table.len() {
            return table[n];
        }
        let last = table.len() - 1;
        match extend {
            ExtendRule::Constant => table[last],
            ExtendRule::LastRatio => {
                // Table length ≥ 2 is validated at load time.
                let prev = table[last - 1];
                if prev == 0.0 {
                    return table[last];
                }
                let ratio = table[last] / prev;
                table[last] * ratio.powi((n - last) as i32)
            }
        }
    }
}

#[derive(Clone, Debug)]
enum FamilyKind {
    Chebyshev,
    Hermite,
    SyntheticIIa,
    Laguerre,
    Meixner { c: f64, beta0: f64 },
    Custom(CustomTables),
}

/// A concrete Jacobi-matrix family: entry sequences plus their periodic base.
#[derive(Clone, Debug)]
pub struct JacobiFamily {
    name: String,
    base: PeriodicBase,
    kind: FamilyKind,
}

impl JacobiFamily {
    /// Bounded baseline: `a ≡ 1/2`, `b ≡ 0` (Chebyshev polynomials of the
    /// second kind; the arcsine density on `[-1, 1]`).
    pub fn chebyshev() -> Self {
        Self {
            name: "chebyshev".into(),
            base: PeriodicBase::new(vec![0.5], vec![0.0]).unwrap(),
            kind: FamilyKind::Chebyshev,
        }
    }

    /// `a_n = sqrt((n+1)/2)`, `b ≡ 0`.
    pub fn hermite() -> Self {
        Self {
            name: "hermite".into(),
            base: PeriodicBase::new(vec![1.0], vec![0.0]).unwrap(),
            kind: FamilyKind::Hermite,
        }
    }

    /// `a_n = n+1`, `b ≡ 0`, period 2: the period-2 product of one-step
    /// transfer matrices tends to `-Id` at the origin.
    pub fn synthetic_iia() -> Self {
        Self {
            name: "synthetic_iia".into(),
            base: PeriodicBase::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap(),
            kind: FamilyKind::SyntheticIIa,
        }
    }

    /// `a_n = n+1`, `b_n = 2n+1`, tempering `γ_n = a_n`.
    pub fn laguerre() -> Self {
        Self {
            name: "laguerre".into(),
            base: PeriodicBase::new(vec![1.0], vec![2.0]).unwrap(),
            kind: FamilyKind::Laguerre,
        }
    }

    /// `a_n = sqrt(c(n+1)(n+β₀))/(1-c)`, `b_n = ((1+c)n + β₀c)/(1-c)` for
    /// `c ∈ (0,1)`, `β₀ > 0`. The base ratio `β/α = (1+c)/√c` exceeds 2, so
    /// the period product at the origin is hyperbolic.
    pub fn meixner(c: f64, beta0: f64) -> Result<Self, ParamError> {
        if !(c.is_finite() && 0.0 < c && c < 1.0) {
            return Err(ParamError::InvalidOption(format!("meixner c must lie in (0,1), got {c}")));
        }
        if !(beta0.is_finite() && beta0 > 0.0) {
            return Err(ParamError::InvalidOption(format!(
                "meixner beta0 must be positive, got {beta0}"
            )));
        }
        let ratio = (1.0 + c) / c.sqrt();
        Ok(Self {
            name: format!("meixner({c},{beta0})"),
            base: PeriodicBase::new(vec![1.0], vec![ratio]).unwrap(),
            kind: FamilyKind::Meixner { c, beta0 },
        })
    }

    /// Load a family from the JSON table format:
    ///
    /// ```text
    /// { "name": "...", "N": 1, "alpha": [..], "beta": [..],
    ///   "a": [..], "b": [..], "gamma": [..]?, "extend": "lastRatio"|"constant"? }
    /// ```
    ///
    /// Tables are read verbatim for `n` inside the table and continued by the
    /// `extend` rule (default `lastRatio`) past it. Off-diagonal entries must
    /// be positive everywhere, including the continuation.
    pub fn custom_from_json(text: &str) -> Result<Self, ParamError> {
        let spec: CustomSpec =
            serde_json::from_str(text).map_err(|e| ParamError::CustomFamily(e.to_string()))?;
        if spec.alpha.len() != spec.period || spec.beta.len() != spec.period {
            return Err(ParamError::CustomFamily(format!(
                "alpha/beta length must equal N={}",
                spec.period
            )));
        }
        let base = PeriodicBase::new(spec.alpha, spec.beta)?;
        let extend = spec.extend.unwrap_or(ExtendRule::LastRatio);
        for (label, table) in [("a", &spec.a), ("b", &spec.b)] {
            if table.is_empty() {
                return Err(ParamError::CustomFamily(format!("table `{label}` is empty")));
            }
            if extend == ExtendRule::LastRatio && table.len() < 2 {
                return Err(ParamError::CustomFamily(format!(
                    "table `{label}` needs length >= 2 for the lastRatio rule"
                )));
            }
            if table.iter().any(|v| !v.is_finite()) {
                return Err(ParamError::CustomFamily(format!("table `{label}` has a non-finite entry")));
            }
        }
        if spec.a.iter().any(|v| *v <= 0.0) {
            return Err(ParamError::CustomFamily("off-diagonal entries must be positive".into()));
        }
        if let Some(g) = &spec.gamma {
            if g.is_empty() || g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(ParamError::CustomFamily(
                    "gamma table must be non-empty, finite, positive".into(),
                ));
            }
            if extend == ExtendRule::LastRatio && g.len() < 2 {
                return Err(ParamError::CustomFamily(
                    "gamma table needs length >= 2 for the lastRatio rule".into(),
                ));
            }
        }
        // The lastRatio continuation of a positive table stays positive, so
        // the a > 0 check above covers all n.
        Ok(Self {
            name: spec.name,
            base,
            kind: FamilyKind::Custom(CustomTables {
                a: spec.a,
                b: spec.b,
                gamma: spec.gamma,
                extend,
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &PeriodicBase {
        &self.base
    }

    pub fn period(&self) -> usize {
        self.base.period()
    }

    /// Off-diagonal entry `a_n` (positive for every `n`).
    pub fn a(&self, n: usize) -> f64 {
        let x = n as f64;
        match &self.kind {
            FamilyKind::Chebyshev => 0.5,
            FamilyKind::Hermite => ((x + 1.0) / 2.0).sqrt(),
            FamilyKind::SyntheticIIa | FamilyKind::Laguerre => x + 1.0,
            FamilyKind::Meixner { c, beta0 } => {
                (c * (x + 1.0) * (x + beta0)).sqrt() / (1.0 - c)
            }
            FamilyKind::Custom(t) => CustomTables::sample(&t.a, n, t.extend),
        }
    }

    /// Diagonal entry `b_n`.
    pub fn b(&self, n: usize) -> f64 {
        let x = n as f64;
        match &self.kind {
            FamilyKind::Chebyshev | FamilyKind::Hermite | FamilyKind::SyntheticIIa => 0.0,
            FamilyKind::Laguerre => 2.0 * x + 1.0,
            FamilyKind::Meixner { c, beta0 } => ((1.0 + c) * x + beta0 * c) / (1.0 - c),
            FamilyKind::Custom(t) => CustomTables::sample(&t.b, n, t.extend),
        }
    }

    /// Tempering entry `γ_n`, when the family declares one.
    pub fn gamma(&self, n: usize) -> Option<f64> {
        match &self.kind {
            FamilyKind::Laguerre => Some(self.a(n)),
            FamilyKind::Custom(t) => t
                .gamma
                .as_ref()
                .map(|g| CustomTables::sample(g, n, t.extend)),
            _ => None,
        }
    }

    pub fn has_gamma(&self) -> bool {
        match &self.kind {
            FamilyKind::Laguerre => true,
            FamilyKind::Custom(t) => t.gamma.is_some(),
            _ => false,
        }
    }
}

/// Dispatch a built-in family by name. `options` feeds parameterized
/// families: meixner reads `c` and `beta0`.
pub fn builtin_family(name: &str, options: &BTreeMap<String, f64>) -> Result<JacobiFamily, ParamError> {
    match name {
        "chebyshev" => Ok(JacobiFamily::chebyshev()),
        "hermite" => Ok(JacobiFamily::hermite()),
        "synthetic_iia" => Ok(JacobiFamily::synthetic_iia()),
        "laguerre" => Ok(JacobiFamily::laguerre()),
        "meixner" => {
            let c = *options
                .get("c")
                .ok_or_else(|| ParamError::InvalidOption("meixner needs option `c`".into()))?;
            let beta0 = *options
                .get("beta0")
                .ok_or_else(|| ParamError::InvalidOption("meixner needs option `beta0`".into()))?;
            JacobiFamily::meixner(c, beta0)
        }
        other => Err(ParamError::UnknownFamily(other.into())),
    }
}

/// Normalizing sequence for eigenvalue-counting measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NormalizerKind {
    /// `ρ_n = Σ_{k≤n} α_k / a_k` — the default for unbounded families.
    SumAlphaOverA,
    /// `ρ_n = Σ_{k≤n} sqrt(α_k γ_k) / a_k` — for tempered families.
    SumSqrtAlphaGammaOverA,
    /// `ρ_n = n + 1` — plain counting, for bounded baselines.
    Count,
}

impl fmt::Display for NormalizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NormalizerKind::SumAlphaOverA => "sumAlphaOverA",
            NormalizerKind::SumSqrtAlphaGammaOverA => "sumSqrtAlphaGammaOverA",
            NormalizerKind::Count => "count",
        };
        f.write_str(s)
    }
}

/// `ρ_n` for the given normalizer; a sum over `k = 0..=n`.
pub fn rho(family: &JacobiFamily, kind: NormalizerKind, n: usize) -> Result<f64, ParamError> {
    Ok(rho_many(family, kind, &[n])?[0])
}

/// `ρ` at several indices in one pass. `ns` must be strictly increasing.
pub fn rho_many(
    family: &JacobiFamily,
    kind: NormalizerKind,
    ns: &[usize],
) -> Result<Vec<f64>, ParamError> {
    assert!(ns.windows(2).all(|w| w[0] < w[1]), "indices must be strictly increasing");
    if kind == NormalizerKind::SumSqrtAlphaGammaOverA && !family.has_gamma() {
        return Err(ParamError::MissingGamma(family.name().into()));
    }
    let mut out = Vec::with_capacity(ns.len());
    if kind == NormalizerKind::Count {
        out.extend(ns.iter().map(|n| (n + 1) as f64));
        return Ok(out);
    }
    let base = family.base();
    let mut acc = 0.0;
    let mut next = 0usize;
    let last = match ns.last() {
        Some(l) => *l,
        None => return Ok(out),
    };
    for k in 0..=last {
        let term = match kind {
            NormalizerKind::SumAlphaOverA => base.alpha(k as i64) / family.a(k),
            NormalizerKind::SumSqrtAlphaGammaOverA => {
                let g = family.gamma(k).expect("checked above");
                (base.alpha(k as i64) * g).sqrt() / family.a(k)
            }
            NormalizerKind::Count => unreachable!(),
        };
        acc += term;
        while next < ns.len() && ns[next] == k {
            out.push(acc);
            next += 1;
        }
    }
    Ok(out)
}

/// Partial sum `Σ_{k≤n} 1/a_k`. Divergence as `n → ∞` is the self-adjointness
/// certificate for these matrices.
pub fn carleman_partial_sum(family: &JacobiFamily, n: usize) -> f64 {
    (0..=n).map(|k| 1.0 / family.a(k)).sum()
}

/// Per-residue total-variation sums of a scalar sequence along arithmetic
/// progressions mod `period`: entry `i` is `Σ_j |x_{(j+1)N+i} − x_{jN+i}|`
/// over `j ≥ 1` with `(j+1)N + i ≤ n_max`. Small values mean the sequence has
/// convergent modulation along each residue class.
pub fn stolz_d1n_diagnostic(
    seq: impl Fn(usize) -> f64,
    period: usize,
    n_max: usize,
) -> Vec<f64> {
    assert!(period >= 1);
    let mut out = vec![0.0; period];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut j = 1usize;
        while (j + 1) * period + i <= n_max {
            *slot += (seq((j + 1) * period + i) - seq(j * period + i)).abs();
            j += 1;
        }
    }
    out
}
