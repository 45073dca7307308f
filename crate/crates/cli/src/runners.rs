//! Verdict and enumeration modes: `classify`, `w2star`, and `enumerate`.
//!
//! Unlike the verification suites these deliver an answer rather than
//! pass/fail a battery: a flagged hypothesis is part of the answer, so the
//! process still exits 0 as long as the verdict was produced.

use crate::plan::ExperimentPlan;
use crate::report::CheckResult;
use betadyn_core::beta_core::{
    cylinder_csv_line, enumerate_cylinders_capped, enumerate_full_capped, CylinderRecord,
};
use betadyn_core::series_classifier::{
    multiplicative_verdict, numeric_partial_sums, rectangle_verdict, w2star_hdim, w2star_verdict,
    DichotomyVerdict,
};
use betadyn_core::{Error, Result};
use serde_json::json;

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn verdict_output(
    verdict: &DichotomyVerdict,
    n_range: Option<[u32; 2]>,
) -> Result<(Vec<CheckResult>, serde_json::Value)> {
    let checks: Vec<CheckResult> = verdict
        .hypothesis_checks
        .iter()
        .map(|h| {
            CheckResult::new(format!("hypothesis:{}", h.name), h.pass, json!({"note": h.note}))
        })
        .collect();
    let partial = match (&verdict.series_form, n_range) {
        (Some(form), range) => {
            let [lo, hi] = range.unwrap_or([2, 80]);
            let form = *form;
            Some(numeric_partial_sums(move |n| form.ln_term(n), lo.max(2), hi.max(lo.max(2)))?)
        }
        _ => None,
    };
    let data = json!({
        "verdict": verdict.to_json(),
        "partial_sums": partial,
    });
    Ok((checks, data))
}

/// Zero/full verdict for the configured shrinking-target set.
pub fn classify(plan: &ExperimentPlan) -> Result<(Vec<CheckResult>, serde_json::Value)> {
    let betas = plan.betas().map_err(|e| usage(e.to_string()))?;
    let psis = plan.psis().map_err(|e| usage(e.to_string()))?;
    let f = plan.dimension_function().map_err(|e| usage(e.to_string()))?;
    let target = plan.file.target.as_deref().unwrap_or("rectangle");
    let verdict = match target {
        "multiplicative" => {
            if psis.len() != 1 {
                return Err(usage("the multiplicative target takes a single psi entry"));
            }
            multiplicative_verdict(&betas, &psis[0], &f)?
        }
        "rectangle" => {
            if psis.len() != betas.d() {
                return Err(usage(format!(
                    "got {} psi entries for d={}; the rectangle target needs one per base",
                    psis.len(),
                    betas.d()
                )));
            }
            rectangle_verdict(&betas, &psis, &f)?
        }
        other => return Err(usage(format!("classify target must be rectangle|multiplicative, got '{other}'"))),
    };
    verdict_output(&verdict, plan.file.n_range)
}

/// Verdict for the two-base (2, 3) family with rate e^(−nt).
pub fn w2star(plan: &ExperimentPlan) -> Result<(Vec<CheckResult>, serde_json::Value)> {
    let t = plan.file.t.ok_or_else(|| usage("w2star mode needs 't' in the config"))?;
    let f = plan.dimension_function().map_err(|e| usage(e.to_string()))?;
    let verdict = w2star_verdict(t, &f)?;
    let (checks, mut data) = verdict_output(&verdict, plan.file.n_range)?;
    data["hausdorff_dimension"] = json!(w2star_hdim(t));
    Ok((checks, data))
}

/// Cylinder table at one level: every cylinder, or the full ones inside an
/// optional window.
pub fn enumerate(plan: &ExperimentPlan) -> Result<(Vec<CheckResult>, serde_json::Value)> {
    let betas = plan.betas().map_err(|e| usage(e.to_string()))?;
    if betas.d() != 1 {
        return Err(usage("enumerate mode takes a single base"));
    }
    let beta = betas.get(0);
    let n = plan.file.n.ok_or_else(|| usage("enumerate mode needs 'n' in the config"))?;
    let target = plan.file.target.as_deref().unwrap_or("all");
    let window = plan.file.window.map(|[a, b]| (a, b));
    const CAP: usize = 2_000_000;
    let cyls = match target {
        "full" => enumerate_full_capped(beta, n, window, CAP)?,
        "all" => {
            if window.is_some() {
                return Err(usage("windowed enumeration is only supported for target = \"full\""));
            }
            enumerate_cylinders_capped(beta, n, CAP)?
        }
        other => return Err(usage(format!("enumerate target must be all|full, got '{other}'"))),
    };
    let mut checks = vec![CheckResult::new(
        "enumeration_complete",
        true,
        json!({"level": n, "target": target, "count": cyls.len()}),
    )];
    if target == "all" {
        let total: f64 = cyls.iter().map(|c| c.length_f64()).sum();
        checks.push(CheckResult::new(
            "cylinder_partition",
            (total - 1.0).abs() <= 1e-9,
            json!({"total_length": total}),
        ));
    }
    let records: Vec<CylinderRecord> = cyls.iter().map(CylinderRecord::from).collect();
    let mut csv_lines = vec!["word;left;length;is_full".to_string()];
    csv_lines.extend(cyls.iter().map(cylinder_csv_line));
    let data = json!({
        "count": records.len(),
        "records": records,
        "csv_lines": csv_lines,
    });
    Ok((checks, data))
}
