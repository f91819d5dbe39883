//! One runner per subcommand. Each computes through jspec-core, writes its
//! artifacts, and reports declared checks; solver refusals bubble up with
//! their original wording.

use anyhow::{anyhow, Result};
use jspec_core::cauchy::{
    cauchy_via_logderiv, closed_form_density, counting_vs_kernel_gap, limit_g, stieltjes_density,
    DensityModel, DEFAULT_EPS_SEQ, DEFAULT_MODEL_DEPTH,
};
use jspec_core::convergence::{density_experiment, gap_count_experiment, ExperimentPlan};
use jspec_core::params::{self, JacobiFamily, NormalizerKind};
use jspec_core::spectra;
use jspec_core::transfer::{classify as classify_family, levinson_ratio_product, DEFAULT_CLASS_TOL};
use num_complex::Complex64;
use rayon::prelude::*;
use std::cell::RefCell;
use std::fmt::Write as _;

use crate::config::RunConfig;
use crate::emit::{Artifacts, Check, Outcome};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn bisection_tol(family: &JacobiFamily, n: usize, cfg: &RunConfig) -> f64 {
    cfg.tol.unwrap_or_else(|| {
        let (lo, hi) = spectra::gershgorin_bounds(family, n);
        (hi - lo).max(1.0) * 1e-13
    })
}

pub fn spectrum(cfg: &RunConfig, family: &JacobiFamily, art: &mut Artifacts) -> Result<Outcome> {
    let n = cfg.n.ok_or_else(|| anyhow!("field `n`: spectrum needs a truncation size"))?;
    if n == 0 {
        return Err(anyhow!("field `n`: truncation size must be at least 1"));
    }
    let tol = bisection_tol(family, n, cfg);
    let spec = spectra::eigenvalues(family, n, tol).map_err(|e| anyhow!("{e}"))?;
    let mut csv = String::from("index,eigenvalue\n");
    for (k, x) in spec.eigenvalues.iter().enumerate() {
        let _ = writeln!(csv, "{k},{x}");
    }
    art.write("spectrum.csv", csv.as_bytes())?;
    let (lo, hi) = spectra::gershgorin_bounds(family, n);
    Ok(Outcome {
        checks: vec![],
        extras: serde_json::json!({
            "family": family.name(),
            "n": n,
            "bisection_tol": tol,
            "gershgorin": [lo, hi],
            "min": spec.eigenvalues.first(),
            "max": spec.eigenvalues.last(),
        }),
    })
}

pub fn density(cfg: &RunConfig, family: &JacobiFamily, art: &mut Artifacts) -> Result<Outcome> {
    let n_grid = cfg
        .n_grid
        .clone()
        .ok_or_else(|| anyhow!("field `n_grid`: density needs a size sweep"))?;
    let intervals = cfg
        .intervals
        .clone()
        .ok_or_else(|| anyhow!("field `intervals`: density needs at least one interval"))?;
    let tol = cfg.tol.unwrap_or(0.1);
    let depth = cfg.model_depth.unwrap_or(DEFAULT_MODEL_DEPTH);
    let model = DensityModel::from_family(family, depth).map_err(|e| anyhow!("{e}"))?;
    let plan = ExperimentPlan {
        family: family.clone(),
        normalizer: cfg.normalizer.unwrap_or(NormalizerKind::SumAlphaOverA),
        n_grid,
        intervals,
        test_functions: vec![],
        tolerance: tol,
        widened_reason: cfg.widened_reason.clone(),
        label: cfg.label.clone().unwrap_or_else(|| "density".into()),
        sink: None,
    };
    let table = density_experiment(&plan, &model).map_err(|e| anyhow!("{e}"))?;
    art.write("density.csv", table.to_csv().as_bytes())?;
    art.write("summary.json", table.summary_json().as_bytes())?;
    let last_n = table.rows.iter().map(|r| r.n).max().unwrap_or(0);
    let worst = table
        .rows
        .iter()
        .filter(|r| r.n == last_n)
        .map(|r| r.rel_err)
        .fold(0.0f64, f64::max);
    let check = Check {
        name: "density_rel_err_final".into(),
        tolerance: Some(tol),
        measured: Some(worst),
        pass: table.pass(),
    };
    Ok(Outcome {
        checks: vec![check],
        extras: serde_json::json!({
            "family": family.name(),
            "case": model.variant,
            "n_final": last_n,
            "slow_intervals": table.slow_intervals,
        }),
    })
}

pub fn cauchy(cfg: &RunConfig, family: &JacobiFamily, art: &mut Artifacts) -> Result<Outcome> {
    let sizes = match (&cfg.n_grid, cfg.n) {
        (Some(grid), _) => grid.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => return Err(anyhow!("field `n`: cauchy needs `n` or `n_grid`")),
    };
    let zs = cfg.z_points(I)?;
    for z in &zs {
        if z.im == 0.0 {
            return Err(anyhow!("field `z`: probe points must be off the real axis, got {z}"));
        }
    }
    let kind = cfg.normalizer.unwrap_or(NormalizerKind::SumAlphaOverA);
    let tol = cfg.tol.unwrap_or(0.02);
    let depth = cfg.model_depth.unwrap_or(DEFAULT_MODEL_DEPTH);

    // The predicted limit exists only when the family fits a density model;
    // without one the sweep still runs, just without error columns.
    let (limits, model_note): (Option<Vec<Complex64>>, Option<String>) =
        match DensityModel::from_family(family, depth) {
            Ok(model) => {
                let ls: Result<Vec<Complex64>> = zs
                    .iter()
                    .map(|&z| limit_g(&model, z).map_err(|e| anyhow!("{e}")))
                    .collect();
                (Some(ls?), None)
            }
            Err(e) => (None, Some(e.to_string())),
        };

    let mut jobs = Vec::new();
    for &n in &sizes {
        for (iz, &z) in zs.iter().enumerate() {
            jobs.push((n, iz, z));
        }
    }
    let rows: Result<Vec<(usize, usize, Complex64, f64, Complex64)>> = jobs
        .par_iter()
        .map(|&(n, iz, z)| {
            let rho = params::rho(family, kind, n).map_err(|e| anyhow!("{e}"))?;
            let v = cauchy_via_logderiv(family, n, z) / rho;
            Ok((n, iz, z, rho, v))
        })
        .collect();
    let rows = rows?;

    let mut csv =
        String::from("n,rho_n,z_re,z_im,value_re,value_im,limit_re,limit_im,rel_err\n");
    let mut final_errs = vec![0.0f64; zs.len()];
    for &(n, iz, z, rho, v) in &rows {
        match &limits {
            Some(ls) => {
                let g = ls[iz];
                let rel = (v - g).norm() / g.norm();
                if n == *sizes.last().unwrap() {
                    final_errs[iz] = rel;
                }
                let _ = writeln!(
                    csv,
                    "{n},{rho},{},{},{},{},{},{},{rel}",
                    z.re, z.im, v.re, v.im, g.re, g.im
                );
            }
            None => {
                let _ = writeln!(csv, "{n},{rho},{},{},{},{},,,", z.re, z.im, v.re, v.im);
            }
        }
    }
    art.write("cauchy.csv", csv.as_bytes())?;

    let checks = match &limits {
        Some(_) => zs
            .iter()
            .zip(&final_errs)
            .map(|(z, &err)| Check::tolerance(format!("cauchy_rel_err@z={z}"), tol, err))
            .collect(),
        None => vec![],
    };
    Ok(Outcome {
        checks,
        extras: serde_json::json!({
            "family": family.name(),
            "sizes": sizes,
            "normalizer": kind.to_string(),
            "limit_available": limits.is_some(),
            "model_note": model_note,
        }),
    })
}

pub fn classify(cfg: &RunConfig, family: &JacobiFamily, art: &mut Artifacts) -> Result<Outcome> {
    let probe = cfg.n.unwrap_or(100_000);
    let cc = classify_family(family, probe, DEFAULT_CLASS_TOL);
    let report = serde_json::json!({
        "case": cc.variant,
        "epsilon": cc.epsilon,
        "trace0": cc.trace0,
    });
    let line = report.to_string();
    println!("{line}");
    art.write("classify.json", line.as_bytes())?;
    Ok(Outcome {
        checks: vec![],
        extras: serde_json::json!({
            "family": family.name(),
            "probe_n": probe,
            "margin": cc.margin,
            "modulation_residual": cc.modulation_residual,
        }),
    })
}

pub fn levinson(cfg: &RunConfig, family: &JacobiFamily, art: &mut Artifacts) -> Result<Outcome> {
    let j_max = cfg.n.unwrap_or(100_000);
    let m_start = cfg.m_start.unwrap_or(1);
    if m_start < 1 || m_start > j_max {
        return Err(anyhow!("field `m_start`: need 1 <= m_start <= n, got {m_start}"));
    }
    let zs = cfg.z_points(I)?;
    let z = zs[0];
    if z.im == 0.0 {
        return Err(anyhow!("field `z`: probe point must be off the real axis, got {z}"));
    }
    let prod = levinson_ratio_product(family, z, m_start, j_max).map_err(|e| anyhow!("{e}"))?;
    let mut csv = String::from("j,log_partial\n");
    for (k, lp) in prod.log_partials.iter().enumerate() {
        let _ = writeln!(csv, "{},{lp}", prod.m_start + k);
    }
    art.write("levinson.csv", csv.as_bytes())?;
    let nondecreasing = prod.log_partials.windows(2).all(|w| w[1] >= w[0]);
    let threshold = 1e6f64.ln();
    Ok(Outcome {
        checks: vec![Check::structural("levinson_log_partials_nondecreasing", nondecreasing)],
        extras: serde_json::json!({
            "family": family.name(),
            "z": [z.re, z.im],
            "m_start": m_start,
            "j_max": j_max,
            "first_block_exceeding_1e6": prod.first_index_exceeding(threshold),
            "final_log_partial": prod.log_partials.last(),
        }),
    })
}

pub fn kernel(cfg: &RunConfig, family: &JacobiFamily, art: &mut Artifacts) -> Result<Outcome> {
    let n = cfg.n.unwrap_or(100);
    let zs = cfg.z_points(I)?;
    let z = zs[0];
    if z.im == 0.0 {
        return Err(anyhow!("field `z`: probe point must be off the real axis, got {z}"));
    }
    let quad_tol = cfg.tol.unwrap_or(1e-9);
    let shift = cfg.shift.unwrap_or(0);
    let report = counting_vs_kernel_gap(family, n, shift, z, quad_tol).map_err(|e| anyhow!("{e}"))?;
    let body = serde_json::json!({
        "family": family.name(),
        "n": n,
        "z": [z.re, z.im],
        "quad_tol": quad_tol,
        "nu_transform": [report.nu_transform.re, report.nu_transform.im],
        "eta_transform": [report.eta_transform.re, report.eta_transform.im],
        "gap": report.gap,
        "bound": report.bound,
        "shift": shift,
        "shift_gap": report.shift_gap,
        "shift_bound": report.shift_bound,
        "kernel_mass": report.kernel_mass,
    });
    art.write("kernel.json", serde_json::to_string_pretty(&body)?.as_bytes())?;

    let mass_target = (n + 1) as f64;
    let mut checks = vec![
        Check::tolerance("kernel_gap_vs_rank_bound", report.bound, report.gap),
        Check::tolerance(
            "kernel_mass_vs_dimension",
            (1e-6 * mass_target).max(10.0 * quad_tol),
            (report.kernel_mass - mass_target).abs(),
        ),
    ];
    if let (Some(sg), Some(sb)) = (report.shift_gap, report.shift_bound) {
        checks.push(Check::tolerance("kernel_shift_gap_vs_tv_bound", sb, sg));
    }
    Ok(Outcome { checks, extras: body })
}

pub fn stieltjes(cfg: &RunConfig, family: &JacobiFamily, art: &mut Artifacts) -> Result<Outcome> {
    let intervals = cfg
        .intervals
        .clone()
        .ok_or_else(|| anyhow!("field `intervals`: stieltjes needs sample intervals"))?;
    let samples = cfg.n.unwrap_or(21);
    if samples < 2 {
        return Err(anyhow!("field `n`: need at least 2 samples per interval, got {samples}"));
    }
    let eps = cfg.eps.clone().unwrap_or_else(|| DEFAULT_EPS_SEQ.to_vec());
    if eps.len() < 4 {
        return Err(anyhow!("field `eps`: need at least 4 offsets to extrapolate"));
    }
    let tol = cfg.tol.unwrap_or(1e-6);
    let depth = cfg.model_depth.unwrap_or(DEFAULT_MODEL_DEPTH);
    let model = DensityModel::from_family(family, depth).map_err(|e| anyhow!("{e}"))?;

    let mut xs = Vec::new();
    for &(lo, hi) in &intervals {
        for k in 0..samples {
            xs.push(lo + (hi - lo) * k as f64 / (samples - 1) as f64);
        }
    }
    let rows: Result<Vec<(f64, f64, f64, bool)>> = xs
        .par_iter()
        .map(|&x| {
            let refusal = RefCell::new(None);
            let g = |z: Complex64| match limit_g(&model, z) {
                Ok(v) => v,
                Err(e) => {
                    *refusal.borrow_mut() = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            };
            let est = stieltjes_density(g, x, &eps);
            if let Some(e) = refusal.into_inner() {
                return Err(anyhow!("{e}"));
            }
            Ok((x, est.value, closed_form_density(&model, x), est.singular))
        })
        .collect();
    let rows = rows?;

    let mut csv = String::from("x,recovered,predicted,abs_err,singular\n");
    let mut worst = 0.0f64;
    let mut skipped = 0usize;
    for &(x, rec, pred, singular) in &rows {
        let judged = pred.is_finite() && !singular;
        let abs_err = (rec - pred).abs();
        if judged {
            worst = worst.max(abs_err);
        } else {
            skipped += 1;
        }
        let _ = writeln!(csv, "{x},{rec},{pred},{abs_err},{singular}");
    }
    art.write("stieltjes.csv", csv.as_bytes())?;
    Ok(Outcome {
        checks: vec![Check::tolerance("stieltjes_abs_err", tol, worst)],
        extras: serde_json::json!({
            "family": family.name(),
            "case": model.variant,
            "eps": eps,
            "samples_per_interval": samples,
            "rows": rows.len(),
            "skipped_singular_or_infinite": skipped,
        }),
    })
}

pub fn gapcount(cfg: &RunConfig, family: &JacobiFamily, art: &mut Artifacts) -> Result<Outcome> {
    let intervals = cfg
        .intervals
        .clone()
        .ok_or_else(|| anyhow!("field `intervals`: gapcount needs at least one interval"))?;
    let n_grid = cfg
        .n_grid
        .clone()
        .ok_or_else(|| anyhow!("field `n_grid`: gapcount needs a size sweep"))?;
    let require_constant = cfg.require_constant.unwrap_or(false);

    let mut csv = String::from("interval_lo,interval_hi,n,count\n");
    let mut checks = Vec::new();
    let mut per_interval = Vec::new();
    for &(lo, hi) in &intervals {
        let table = gap_count_experiment(family, (lo, hi), &n_grid).map_err(|e| anyhow!("{e}"))?;
        for &(n, count) in &table.counts {
            let _ = writeln!(csv, "{lo},{hi},{n},{count}");
        }
        if require_constant {
            checks.push(Check::structural(
                format!("counts_constant@({lo},{hi})"),
                table.eventually_constant,
            ));
        }
        per_interval.push(serde_json::json!({
            "interval": [lo, hi],
            "max_count": table.max_count,
            "eventually_constant": table.eventually_constant,
        }));
    }
    art.write("gapcount.csv", csv.as_bytes())?;
    Ok(Outcome {
        checks,
        extras: serde_json::json!({
            "family": family.name(),
            "n_grid": n_grid,
            "intervals": per_interval,
        }),
    })
}
