//! Command implementations.

use fexp_core::exponents::{
    achievable_as, achievable_expected, bsc_bounds, converse_as, converse_expected_simple,
    converse_expected_tight, fit_exponent_slope, passive_feedback_bound, rate_converse_as,
    BoundKind, ExponentBound, Regime,
};
use fexp_core::schemes::{
    audit_power, estimate_error, log_closed_form_error, reference_exponent, SchemeConfig,
};
use fexp_core::verify::{run_full_suite, SuiteConfig};

use crate::config::{OutputFormat, Resolved};
use crate::output::{
    csv_document, emit, json_document, to_value, BoundRow, ResultRow, SweepSummary,
};
use crate::CliError;

fn bound_row(b: &ExponentBound) -> BoundRow {
    BoundRow {
        label: b.label.clone(),
        kind: match b.kind {
            BoundKind::Achievable => "achievable",
            BoundKind::Converse => "converse",
        }
        .to_string(),
        regime: match b.regime {
            Regime::AlmostSure => "almost-sure",
            Regime::Expected => "expected",
            Regime::Passive => "passive",
            Regime::Bsc => "bsc",
        }
        .to_string(),
        value: b.value,
    }
}

fn emit_bounds(resolved: &Resolved, command: &str, rows: &[BoundRow]) -> Result<(), CliError> {
    let config = resolved.experiment(command, None);
    match resolved.out.as_deref() {
        None => {
            // Human-readable table on stdout.
            for r in rows {
                println!(
                    "{:<58} {:>11} {:>12} {:.12}",
                    r.label, r.kind, r.regime, r.value
                );
            }
            Ok(())
        }
        Some(path) => {
            let doc = match resolved.format {
                OutputFormat::Csv => csv_document(&config, rows, &[])?,
                OutputFormat::Json => {
                    json_document(&config, &[("bounds", to_value(&rows.to_vec())?)])?
                }
            };
            emit(Some(path), &doc)
        }
    }
}

pub fn exponents(resolved: &Resolved) -> Result<(), CliError> {
    let p = &resolved.params;
    let mut bounds = Vec::new();
    bounds.push(achievable_as(p, None)?);
    if let Some(d) = resolved.delta {
        bounds.push(achievable_as(p, Some(d))?);
    }
    bounds.push(converse_as(p)?);
    if let Some(e) = resolved.e_nofb {
        bounds.push(rate_converse_as(p, e)?);
    }
    bounds.push(achievable_expected(p, None)?);
    if let Some(dp) = resolved.delta_fb_power {
        bounds.push(achievable_expected(p, Some(dp))?);
    }
    bounds.push(converse_expected_simple(p)?);
    bounds.push(converse_expected_tight(p, resolved.fb_budget)?);
    bounds.push(passive_feedback_bound(p, false)?);
    bounds.push(passive_feedback_bound(p, true)?);
    let rows: Vec<BoundRow> = bounds.iter().map(bound_row).collect();
    emit_bounds(resolved, "exponents", &rows)
}

fn result_row(
    resolved: &Resolved,
    scheme: &SchemeConfig,
    trials: u64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    log_pe: f64,
) -> ResultRow {
    ResultRow {
        scheme: scheme.kind.name().to_string(),
        n: scheme.n,
        p_fwd: resolved.params.p_fwd,
        sigma2_fwd: resolved.params.sigma2_fwd,
        p_fb: resolved.params.p_fb,
        sigma2_fb: resolved.params.sigma2_fb,
        delta: scheme.delta,
        trials,
        p_hat,
        ci_low,
        ci_high,
        log_pe_closed_form: log_pe,
        seed: resolved.seed,
    }
}

pub fn simulate(resolved: &Resolved) -> Result<(), CliError> {
    let scheme = resolved.scheme()?;
    let trials = resolved
        .trials
        .ok_or_else(|| CliError::usage("simulate requires --trials (at least 1)"))?;
    if trials == 0 {
        return Err(CliError::usage("simulate requires at least one trial"));
    }
    let est = estimate_error(
        &resolved.params,
        &scheme,
        trials,
        resolved.seed,
        resolved.tilt.as_ref(),
    )?;
    let audit = audit_power(&resolved.params, &scheme, trials, resolved.seed)?;
    let log_pe = log_closed_form_error(&resolved.params, &scheme)?;
    eprintln!(
        "{}: n={} trials={} p_hat={:.6e} ci=[{:.6e}, {:.6e}] oracle={:.6e}",
        scheme.kind.name(),
        scheme.n,
        trials,
        est.p_hat,
        est.ci_low,
        est.ci_high,
        log_pe.exp()
    );
    let row = result_row(
        resolved,
        &scheme,
        trials,
        est.p_hat,
        est.ci_low,
        est.ci_high,
        log_pe,
    );
    let config = resolved.experiment("simulate", Some(scheme));
    let doc = match resolved.format {
        OutputFormat::Csv => csv_document(
            &config,
            &[row],
            &[(
                "audit",
                serde_json::to_string(&audit).map_err(|e| CliError::Numerical(e.to_string()))?,
            )],
        )?,
        OutputFormat::Json => json_document(
            &config,
            &[
                ("rows", to_value(&vec![row])?),
                ("audit", to_value(&audit)?),
            ],
        )?,
    };
    emit(resolved.out.as_deref(), &doc)
}

pub fn sweep(resolved: &Resolved) -> Result<(), CliError> {
    let kind = resolved
        .scheme_kind
        .ok_or_else(|| CliError::usage("sweep requires --scheme"))?;
    if resolved.n_list.len() < 3 {
        return Err(CliError::usage(
            "sweep requires --n-list with at least three blocklengths",
        ));
    }
    if !resolved.n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::usage("--n-list must be strictly increasing"));
    }
    let trials = resolved
        .trials
        .ok_or_else(|| CliError::usage("sweep requires --trials (0 for oracle mode)"))?;

    let mut rows = Vec::new();
    let mut points: Vec<(u64, f64)> = Vec::new();
    let mut scheme_for_reference = None;
    for &n in &resolved.n_list {
        let scheme = resolved.scheme_with_n(kind, n)?;
        let log_pe = log_closed_form_error(&resolved.params, &scheme)?;
        if trials == 0 {
            let p = log_pe.exp();
            rows.push(result_row(resolved, &scheme, 0, p, p, p, log_pe));
            points.push((n as u64, log_pe));
            eprintln!("n={n}: oracle log_pe={log_pe:.6}");
        } else {
            let est = estimate_error(
                &resolved.params,
                &scheme,
                trials,
                resolved.seed,
                resolved.tilt.as_ref(),
            )?;
            rows.push(result_row(
                resolved,
                &scheme,
                trials,
                est.p_hat,
                est.ci_low,
                est.ci_high,
                log_pe,
            ));
            if est.p_hat > 0.0 {
                points.push((n as u64, est.p_hat.ln()));
            } else {
                eprintln!("n={n}: no errors observed, excluded from the slope fit");
            }
            eprintln!("n={n}: p_hat={:.6e} oracle={:.6e}", est.p_hat, log_pe.exp());
        }
        scheme_for_reference = Some(scheme);
    }
    let fit = fit_exponent_slope(&points)?;
    let reference = reference_exponent(
        &resolved.params,
        &scheme_for_reference.expect("n_list is nonempty"),
    )?;
    let summary = SweepSummary {
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        reference_exponent: reference,
    };
    eprintln!(
        "slope={:.6} intercept={:.3} r2={:.6} reference={:.6}",
        summary.slope, summary.intercept, summary.r2, summary.reference_exponent
    );
    let config = resolved.experiment(
        "sweep",
        resolved.scheme_with_n(kind, resolved.n_list[0]).ok(),
    );
    let doc = match resolved.format {
        OutputFormat::Csv => csv_document(
            &config,
            &rows,
            &[(
                "summary",
                serde_json::to_string(&summary).map_err(|e| CliError::Numerical(e.to_string()))?,
            )],
        )?,
        OutputFormat::Json => json_document(
            &config,
            &[("rows", to_value(&rows)?), ("summary", to_value(&summary)?)],
        )?,
    };
    emit(resolved.out.as_deref(), &doc)
}

pub fn verify(resolved: &Resolved) -> Result<(), CliError> {
    let suite = if resolved.quick {
        SuiteConfig::quick(resolved.seed)
    } else {
        SuiteConfig {
            seed: resolved.seed,
            ..SuiteConfig::default()
        }
    };
    let report = run_full_suite(&suite)?;
    for check in &report.checks {
        eprintln!(
            "{} {} ({})",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    let config = resolved.experiment("verify", None);
    let doc = json_document(&config, &[("report", to_value(&report)?)])?;
    emit(resolved.out.as_deref(), &doc)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(
            "one or more verification checks failed".into(),
        ))
    }
}

pub fn bsc(resolved: &Resolved) -> Result<(), CliError> {
    let eps = resolved
        .eps
        .ok_or_else(|| CliError::usage("bsc requires --eps"))?;
    let eps_fb = resolved
        .eps_fb
        .ok_or_else(|| CliError::usage("bsc requires --eps-fb"))?;
    let (active, two_codeword) = bsc_bounds(eps, eps_fb, resolved.e_nofb.unwrap_or(0.0))?;
    let rows = vec![bound_row(&active), bound_row(&two_codeword)];
    emit_bounds(resolved, "bsc", &rows)
}
