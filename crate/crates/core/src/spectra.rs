//! Spectra of finite Jacobi truncations.
//!
//! Everything here rides on one primitive: the number of eigenvalues of the
//! `n × n` truncation strictly below a shift `x`, read off the signs of the
//! `LDLᵀ` pivots of `A_n − x`. Counts are exact integers, so bisection on
//! them is immune to clustering and needs no Gram–Schmidt, and interval
//! counts come straight from two probes.
//!
//! The full-spectrum solver batches many shifts per pass over the matrix
//! (the pivot recurrence is a serial chain of divisions; independent shifts
//! in the inner loop keep the divider busy), which is what makes
//! whole-spectrum extraction at `n ~ 10⁴` cheap.

use crate::params::JacobiFamily;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("truncation size {n} needs about {need} bytes, over the {budget}-byte budget")]
    BudgetExceeded { n: usize, need: usize, budget: usize },
    #[error("invalid tolerance {0}; need a positive finite value")]
    BadTolerance(f64),
}

/// Eigenvalues of one truncation, sorted increasing.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    /// Truncation size (matrix dimension).
    pub n: usize,
    /// All `n` eigenvalues, strictly increasing.
    pub eigenvalues: Vec<f64>,
    /// Half-width certificate: each entry is within `tol` of a true
    /// eigenvalue of the truncation.
    pub tol: f64,
}

impl SpectrumResult {
    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Two columns, `index,eigenvalue`, floats in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.eigenvalues.len() * 24 + 32);
        s.push_str("index,eigenvalue\n");
        for (i, ev) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(s, "{i},{ev}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// Open-interval eigenvalue count request against an `n × n` truncation.
#[derive(Clone, Copy, Debug)]
pub struct CountingQuery {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

impl CountingQuery {
    pub fn new(n: usize, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty interval ({lo}, {hi})");
        assert!(n >= 1);
        Self { n, lo, hi }
    }
}

/// Count plus breakdown bookkeeping from [`sturm_count_detailed`].
#[derive(Clone, Copy, Debug)]
pub struct SturmProbe {
    pub count: usize,
    /// True when a zero pivot forced the shift to be nudged by
    /// `2⁻⁴⁰ · scale` (deterministically) before counting.
    pub nudged: bool,
}

const NUDGE_EXP: i32 = -40;
// Pivots this small behave like exact zeros: the next division would
// overflow and the sign bookkeeping of ±0 is not deterministic.
const PIVOT_FLOOR: f64 = 1e-300;

struct Tridiag {
    b: Vec<f64>,
    /// Squared off-diagonals `a_k²`, `k = 0..n-2`.
    asq: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Tridiag {
    fn build(family: &JacobiFamily, n: usize) -> Self {
        assert!(n >= 1);
        let mut b = Vec::with_capacity(n);
        let mut asq = Vec::with_capacity(n.saturating_sub(1));
        let mut prev_a = 0.0f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..n {
            let bk = family.b(k);
            let ak = if k + 1 < n { family.a(k) } else { 0.0 };
            let r = prev_a + ak;
            lo = lo.min(bk - r);
            hi = hi.max(bk + r);
            b.push(bk);
            if k + 1 < n {
                asq.push(ak * ak);
            }
            prev_a = ak;
        }
        Self { b, asq, lo, hi }
    }

    fn scale(&self) -> f64 {
        self.lo.abs().max(self.hi.abs()).max(1.0)
    }

    /// Signed pivot count at one shift; `None` on a (near-)zero pivot.
    fn pivot_count(&self, x: f64) -> Option<usize> {
        let mut neg = 0usize;
        let mut d = self.b[0] - x;
        if d.abs() < PIVOT_FLOOR {
            return None;
        }
        if d < 0.0 {
            neg += 1;
        }
        for k in 1..self.b.len() {
            d = (self.b[k] - x) - self.asq[k - 1] / d;
            if d.abs() < PIVOT_FLOOR {
                return None;
            }
            if d < 0.0 {
                neg += 1;
            }
        }
        Some(neg)
    }

    fn count_with_nudge(&self, x: f64) -> SturmProbe {
        if let Some(count) = self.pivot_count(x) {
            return SturmProbe { count, nudged: false };
        }
        let mut eps = self.scale() * (NUDGE_EXP as f64).exp2();
        for _ in 0..80 {
            if let Some(count) = self.pivot_count(x + eps) {
                return SturmProbe { count, nudged: true };
            }
            eps *= 2.0;
        }
        unreachable!("a shift off the real axis of every pivot exists within 80 doublings");
    }

    /// Counts for a whole wave of shifts, eight per matrix pass. Lanes that
    /// hit a pivot breakdown are redone individually through the nudge path.
    fn counts_batched(&self, shifts: &[f64], out: &mut Vec<usize>) {
        out.clear();
        out.reserve(shifts.len());
        let n = self.b.len();
        for chunk in shifts.chunks(8) {
            let m = chunk.len();
            let mut x = [0.0f64; 8];
            x[..m].copy_from_slice(chunk);
            // Pad dead lanes with the first shift so they run harmlessly.
            for lane in x.iter_mut().skip(m) {
                *lane = chunk[0];
            }
            let mut d = [0.0f64; 8];
            let mut neg = [0usize; 8];
            let mut bad = [false; 8];
            for lane in 0..8 {
                d[lane] = self.b[0] - x[lane];
            }
            for k in 0..n {
                if k > 0 {
                    let aq = self.asq[k - 1];
                    let bk = self.b[k];
                    for lane in 0..8 {
                        d[lane] = (bk - x[lane]) - aq / d[lane];
                    }
                }
                for lane in 0..8 {
                    let dl = d[lane];
                    if dl.abs() < PIVOT_FLOOR {
                        bad[lane] = true;
                        d[lane] = -1.0; // keep the lane numerically sane
                    } else if dl < 0.0 {
                        neg[lane] += 1;
                    }
                }
            }
            for lane in 0..m {
                if bad[lane] {
                    out.push(self.count_with_nudge(chunk[lane]).count);
                } else {
                    out.push(neg[lane]);
                }
            }
        }
    }
}

/// Number of eigenvalues of the `n × n` truncation strictly below `x`.
pub fn sturm_count(family: &JacobiFamily, n: usize, x: f64) -> usize {
    sturm_count_detailed(family, n, x).count
}

/// Like [`sturm_count`], also reporting whether a pivot breakdown forced the
/// deterministic shift nudge.
pub fn sturm_count_detailed(family: &JacobiFamily, n: usize, x: f64) -> SturmProbe {
    Tridiag::build(family, n).count_with_nudge(x)
}

/// Interval `(lo, hi)` enclosing the whole spectrum of the truncation
/// (union of Gershgorin disks, padded).
pub fn gershgorin_bounds(family: &JacobiFamily, n: usize) -> (f64, f64) {
    let t = Tridiag::build(family, n);
    let pad = 1e-12 * t.scale();
    (t.lo - pad, t.hi + pad)
}

/// Eigenvalues of the truncation strictly inside `(lo, hi)`.
///
/// Boundary resolution is the nudge width `2⁻⁴⁰ · scale`: an eigenvalue
/// exactly at either endpoint is excluded, one within the nudge width of an
/// endpoint may land on either side.
pub fn count_in_interval(family: &JacobiFamily, query: &CountingQuery) -> usize {
    let t = Tridiag::build(family, query.n);
    let delta = t.scale() * (NUDGE_EXP as f64).exp2();
    // Pull both thresholds inward by the nudge width so eigenvalues sitting
    // exactly on an endpoint stay outside the open interval.
    let below_hi = t.count_with_nudge(query.hi - delta).count;
    let at_most_lo = t.count_with_nudge(query.lo + delta).count;
    below_hi.saturating_sub(at_most_lo)
}

/// `Σ f(λ)` over the stored eigenvalues — the integral of `f` against the
/// truncation's counting measure.
pub fn counting_integral(spectrum: &SpectrumResult, f: impl Fn(f64) -> f64) -> f64 {
    spectrum.eigenvalues.iter().map(|&x| f(x)).sum()
}

pub const DEFAULT_MEMORY_BUDGET: usize = 512 << 20;

/// All eigenvalues of the `n × n` truncation, each within `tol` of a true
/// eigenvalue, by wave-batched bisection on Sturm counts.
pub fn eigenvalues(family: &JacobiFamily, n: usize, tol: f64) -> Result<SpectrumResult, SpectraError> {
    eigenvalues_with_budget(family, n, tol, DEFAULT_MEMORY_BUDGET)
}

pub fn eigenvalues_with_budget(
    family: &JacobiFamily,
    n: usize,
    tol: f64,
    budget_bytes: usize,
) -> Result<SpectrumResult, SpectraError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SpectraError::BadTolerance(tol));
    }
    // Arrays (b, a², output) plus the worst-case interval queue and wave
    // buffers; refuse rather than thrash.
    let need = n.saturating_mul(96);
    if need > budget_bytes {
        return Err(SpectraError::BudgetExceeded { n, need, budget: budget_bytes });
    }

    let t = Tridiag::build(family, n);
    let scale = t.scale();
    let width_floor = 8.0 * f64::EPSILON * scale;

    #[derive(Clone, Copy)]
    struct Iv {
        lo: f64,
        hi: f64,
        clo: usize,
        chi: usize,
    }

    let mut out = vec![0.0f64; n];
    let emit = |iv: &Iv, out: &mut [f64]| {
        let k = iv.chi - iv.clo;
        let width = iv.hi - iv.lo;
        // k is almost always 1. Several eigenvalues collapsing below the
        // width floor get distinct, ordered representatives inside the
        // bracket; each is still within the bracket width of a true one.
        for (slot, i) in (iv.clo..iv.chi).enumerate() {
            out[i] = iv.lo + width * (slot as f64 + 1.0) / (k as f64 + 1.0);
        }
    };

    let pad = 1e-12 * scale;
    let mut active = vec![Iv { lo: t.lo - pad, hi: t.hi + pad, clo: 0, chi: n }];
    let mut mids: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut next: Vec<Iv> = Vec::new();

    while !active.is_empty() {
        mids.clear();
        mids.extend(active.iter().map(|iv| 0.5 * (iv.lo + iv.hi)));
        t.counts_batched(&mids, &mut counts);
        next.clear();
        for (iv, (&mid, &cm)) in active.iter().zip(mids.iter().zip(counts.iter())) {
            // Counts are monotone in the shift; clamping guards the nudge's
            // boundary jitter so child intervals stay consistent.
            let cm = cm.clamp(iv.clo, iv.chi);
            for child in [
                Iv { lo: iv.lo, hi: mid, clo: iv.clo, chi: cm },
                Iv { lo: mid, hi: iv.hi, clo: cm, chi: iv.chi },
            ] {
                if child.chi == child.clo {
                    continue;
                }
                let width = child.hi - child.lo;
                if width <= tol || width <= width_floor {
                    emit(&child, &mut out);
                } else {
                    next.push(child);
                }
            }
        }
        std::mem::swap(&mut active, &mut next);
    }

    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    Ok(SpectrumResult { n, eigenvalues: out, tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::JacobiFamily;
    use approx::assert_relative_eq;

    #[test]
    fn free_truncation_has_explicit_spectrum() {
        // a ≡ 1, b ≡ 0 at size 3: eigenvalues {-√2, 0, √2}.
        let fam = JacobiFamily::custom_from_json(
            r#"{"name":"free","N":1,"alpha":[1.0],"beta":[0.0],
                "a":[1.0],"b":[0.0],"extend":"constant"}"#,
        )
        .unwrap();
        let got = eigenvalues(&fam, 3, 1e-12).unwrap();
        let want = [-(2.0f64.sqrt()), 0.0, 2.0f64.sqrt()];
        for (g, w) in got.eigenvalues.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn chebyshev_truncation_eigenvalues_are_cosines() {
        // Size n: eigenvalues cos(kπ/(n+1)), k = 1..n.
        let fam = JacobiFamily::chebyshev();
        let n = 5;
        let got = eigenvalues(&fam, n, 1e-13).unwrap();
        for (i, ev) in got.eigenvalues.iter().enumerate() {
            let k = (n - i) as f64; // increasing order ⇒ k decreasing
            let want = (k * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((ev - want).abs() < 1e-12, "{ev} vs {want}");
        }
    }

    #[test]
    fn hermite_size_three_closed_form() {
        // diag 0, off-diagonals sqrt(1/2), 1: eigenvalues {0, ±sqrt(3/2)}.
        let fam = JacobiFamily::hermite();
        let got = eigenvalues(&fam, 3, 1e-13).unwrap();
        let s = (1.5f64).sqrt();
        assert!((got.eigenvalues[0] + s).abs() < 1e-12);
        assert!(got.eigenvalues[1].abs() < 1e-12);
        assert!((got.eigenvalues[2] - s).abs() < 1e-12);
    }

    #[test]
    fn laguerre_size_two_closed_form() {
        // [[1,1],[1,3]]: eigenvalues 2 ± √2.
        let fam = JacobiFamily::laguerre();
        let got = eigenvalues(&fam, 2, 1e-13).unwrap();
        assert_relative_eq!(got.eigenvalues[0], 2.0 - 2.0f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(got.eigenvalues[1], 2.0 + 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn trace_identity_holds() {
        for fam in [
            JacobiFamily::chebyshev(),
            JacobiFamily::hermite(),
            JacobiFamily::laguerre(),
            JacobiFamily::meixner(0.5, 1.0).unwrap(),
        ] {
            let n = 40;
            let spec = eigenvalues(&fam, n, 1e-11).unwrap();
            let want: f64 = (0..n).map(|k| fam.b(k)).sum();
            let slack = (n as f64) * spec.tol + 1e-9 * want.abs().max(1.0);
            assert!(
                (spec.trace() - want).abs() <= slack,
                "{}: trace {} vs Σb {}",
                fam.name(),
                spec.trace(),
                want
            );
        }
    }

    #[test]
    fn sturm_count_matches_extracted_spectrum() {
        let fam = JacobiFamily::laguerre();
        let n = 60;
        let spec = eigenvalues(&fam, n, 1e-12).unwrap();
        for x in [-1.0, 0.5, 3.0, 17.0, 80.0, 1000.0] {
            let want = spec.eigenvalues.iter().filter(|&&ev| ev < x).count();
            assert_eq!(sturm_count(&fam, n, x), want, "at shift {x}");
        }
        assert_eq!(sturm_count(&fam, n, -1e9), 0);
        assert_eq!(sturm_count(&fam, n, 1e9), n);
    }

    #[test]
    fn count_at_exact_eigenvalue_is_deterministic() {
        // Shift exactly on an eigenvalue of the free matrix (0 for odd size):
        // the first pivot is an exact zero, so the nudge path must fire.
        let fam = JacobiFamily::custom_from_json(
            r#"{"name":"free","N":1,"alpha":[1.0],"beta":[0.0],
                "a":[1.0],"b":[0.0],"extend":"constant"}"#,
        )
        .unwrap();
        let probe = sturm_count_detailed(&fam, 3, 0.0);
        assert!(probe.nudged);
        // The nudge moves the shift up, so the eigenvalue at 0 is counted.
        assert_eq!(probe.count, 2);
        let again = sturm_count_detailed(&fam, 3, 0.0);
        assert_eq!(again.count, probe.count);
    }

    #[test]
    fn open_interval_count_excludes_endpoints() {
        let fam = JacobiFamily::chebyshev();
        let n = 9; // eigenvalues cos(kπ/10)
        let ev: Vec<f64> = (1..=n).map(|k| ((k as f64) * std::f64::consts::PI / 10.0).cos()).collect();
        let q = CountingQuery::new(n, ev[4], ev[1]); // endpoints are eigenvalues
        // Strictly inside: indices 2 and 3 of the sorted-descending list.
        assert_eq!(count_in_interval(&fam, &q), 2);
        let all = CountingQuery::new(n, -2.0, 2.0);
        assert_eq!(count_in_interval(&fam, &all), n);
    }

    #[test]
    fn counting_integral_sums_over_spectrum() {
        let fam = JacobiFamily::chebyshev();
        let spec = eigenvalues(&fam, 7, 1e-12).unwrap();
        // Σ λ² over cos(kπ/8), k=1..7 is 7/2 - 1/2 = 3 (half-angle sum).
        let got = counting_integral(&spec, |x| x * x);
        assert_relative_eq!(got, 3.0, epsilon = 1e-10);
    }

    #[test]
    fn budget_refusal_is_explicit() {
        let fam = JacobiFamily::hermite();
        let err = eigenvalues_with_budget(&fam, 1_000_000, 1e-8, 1 << 20).unwrap_err();
        assert!(matches!(err, SpectraError::BudgetExceeded { .. }));
    }

    #[test]
    fn csv_and_json_round_trip_shapes() {
        let fam = JacobiFamily::chebyshev();
        let spec = eigenvalues(&fam, 3, 1e-12).unwrap();
        let csv = spec.to_csv();
        assert!(csv.starts_with("index,eigenvalue\n"));
        assert_eq!(csv.lines().count(), 4);
        let json = spec.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn gershgorin_encloses_spectrum() {
        for fam in [JacobiFamily::hermite(), JacobiFamily::laguerre()] {
            let n = 25;
            let (lo, hi) = gershgorin_bounds(&fam, n);
            let spec = eigenvalues(&fam, n, 1e-12).unwrap();
            assert!(spec.eigenvalues.first().unwrap() > &lo);
            assert!(spec.eigenvalues.last().unwrap() < &hi);
        }
    }

    #[test]
    fn meixner_spectrum_stays_above_gershgorin_floor() {
        // b_0 - a_0 = 1 - √2 for c = 1/2, β₀ = 1: nothing below ≈ -0.415.
        let fam = JacobiFamily::meixner(0.5, 1.0).unwrap();
        assert_eq!(sturm_count(&fam, 2000, 1.0 - 2.0f64.sqrt()), 0);
    }
}
