use std::fs;
use std::path::{Path, PathBuf};

use critscat::classical::{fit_asymptotics, solve_zeta, FitReport};
use critscat::scattering::{
    cook_integrand, cook_slope, log_spaced, threshold_sweep, CheckpointStore, ConvergenceReport, NoStore, Verdict,
};
use serde::Serialize;

use crate::cache::FileStore;
use crate::config::Resolved;
use crate::output::{ensure_dir, num, opt, write_csv, write_json, Stamp};
use crate::CliError;

/// Tolerance on the fitted Cook slope against `-2 + kappa`.
pub const COOK_SLOPE_TOLERANCE: f64 = 0.05;

/// Result of a command that ran to completion.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Every scientific check passed.
    pub matches: bool,
    pub files: Vec<PathBuf>,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

#[derive(Serialize)]
struct FitFile<'a> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    sigma: f64,
    r0: f64,
    fit_window_log_t: [f64; 2],
    #[serde(flatten)]
    fit: FitReport,
    max_wronskian_drift: f64,
}

pub fn cmd_zeta(r: &Resolved) -> Result<Outcome, CliError> {
    let out = &r.config.output_dir;
    ensure_dir(out)?;
    let stamp = Stamp::new(&r.hash);
    let s = &r.config.schedule;
    let sol = solve_zeta(&r.schedule, s.log_t_max.exp(), s.tol)?;
    let rows: Vec<Vec<String>> = sol
        .samples()
        .iter()
        .map(|z| vec![num(z.t), num(z.zeta1), num(z.zeta2), num(z.wronskian())])
        .collect();
    let drift = sol.samples().iter().map(|z| (z.wronskian() - 1.0).abs()).fold(0.0, f64::max);
    let fit = fit_asymptotics(&sol, (s.fit_window[0].exp(), s.fit_window[1].exp()))?;
    let files = vec![
        write_csv(&out.join("zeta.csv"), &["t", "zeta1", "zeta2", "wronskian"], &rows, &stamp)?,
        write_json(
            &out.join("fit.json"),
            &FitFile {
                stamp: &stamp,
                sigma: s.sigma,
                r0: s.r0,
                fit_window_log_t: s.fit_window,
                fit,
                max_wronskian_drift: drift,
            },
        )?,
    ];
    let summary = vec![
        format!(
            "regime {:?}: lambda {:.6}, log coefficient {:.7}",
            fit.regime, fit.lambda, fit.log_coefficient
        ),
        format!("max Wronskian drift {drift:.3e}"),
    ];
    Ok(Outcome {
        matches: true,
        files,
        summary,
    })
}

#[derive(Serialize)]
struct CookFit<'a> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    kappa: Option<f64>,
    window: [f64; 2],
    slope: Option<f64>,
    predicted_slope: Option<f64>,
    tolerance: f64,
    slope_matches: Option<bool>,
    bounds_hold: bool,
}

pub fn cmd_cook(r: &Resolved) -> Result<Outcome, CliError> {
    let out = &r.config.output_dir;
    ensure_dir(out)?;
    let stamp = Stamp::new(&r.hash);
    let window = r.config.scattering.cook_window;
    let samples = log_spaced(window[0], window[1], r.config.scattering.cook_points)
        .into_iter()
        .map(|tau| cook_integrand(&r.packet, tau, r.potential.as_ref()))
        .collect::<critscat::Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            vec![
                num(s.tau),
                num(s.term_v),
                num(s.term_d),
                num(s.term_x2),
                num(s.bound_d),
                num(s.bound_x2),
                num(s.envelope_v),
            ]
        })
        .collect();
    let bounds_hold = samples.iter().all(|s| s.within_bounds());
    let kappa = r.potential.map(|v| v.kappa());
    let slope = kappa.and(cook_slope(&samples, (window[0], window[1])));
    let predicted = kappa.map(|k| -2.0 + k);
    let slope_matches = predicted.map(|p| slope.is_some_and(|s| (s - p).abs() <= COOK_SLOPE_TOLERANCE));
    let files = vec![
        write_csv(
            &out.join("cook.csv"),
            &["tau", "term_v", "term_d", "term_x2", "bound_d", "bound_x2", "envelope_v"],
            &rows,
            &stamp,
        )?,
        write_json(
            &out.join("cook_fit.json"),
            &CookFit {
                stamp: &stamp,
                kappa,
                window,
                slope,
                predicted_slope: predicted,
                tolerance: COOK_SLOPE_TOLERANCE,
                slope_matches,
                bounds_hold,
            },
        )?,
    ];
    let mut summary = vec![format!(
        "term_d and term_x2 {} their envelopes",
        if bounds_hold { "within" } else { "EXCEED" }
    )];
    match (slope, predicted) {
        (Some(s), Some(p)) => summary.push(format!("term_V slope {s:.4}, predicted {p:.4} +- {COOK_SLOPE_TOLERANCE}")),
        (None, Some(_)) => summary.push("term_V slope unavailable".into()),
        _ => summary.push("no potential: term_V = 0".into()),
    }
    Ok(Outcome {
        matches: bounds_hold && slope_matches.unwrap_or(true),
        files,
        summary,
    })
}

#[derive(Serialize)]
struct PointFile<'a> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    index: usize,
    predicted: Verdict,
    matches: bool,
    j1_growth_class: String,
    report: &'a ConvergenceReport,
}

#[derive(Serialize)]
struct SummaryPoint {
    index: usize,
    kappa: f64,
    amplitude: f64,
    verdict: Option<Verdict>,
    predicted: Verdict,
    matches: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    all_match: bool,
    failures: usize,
    points: Vec<SummaryPoint>,
}

#[derive(Serialize)]
struct FailureEntry {
    index: usize,
    kappa: f64,
    amplitude: f64,
    error: String,
}

#[derive(Serialize)]
struct FailureManifest<'a> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    failures: Vec<FailureEntry>,
}

/// Removes outputs of an earlier sweep in `out` that this run might not
/// overwrite.
fn clear_previous(out: &Path) -> Result<(), CliError> {
    let Ok(entries) = fs::read_dir(out) else {
        return Ok(());
    };
    for e in entries.flatten() {
        let name = e.file_name().to_string_lossy().into_owned();
        if name == "failures.json" || (name.starts_with("report_") && name.ends_with(".json")) {
            fs::remove_file(e.path()).map_err(|source| CliError::Io {
                context: e.path().display().to_string(),
                source,
            })?;
        }
    }
    Ok(())
}

/// Outcome of a sweep; `failed` counts points that raised errors.
pub struct SweepOutcome {
    pub outcome: Outcome,
    pub failed: usize,
}

pub fn cmd_sweep(r: &Resolved, jobs: usize) -> Result<SweepOutcome, CliError> {
    let out = &r.config.output_dir;
    ensure_dir(out)?;
    clear_previous(out)?;
    let stamp = Stamp::new(&r.hash);
    let sw = &r.config.sweep;
    let file_store;
    let store: &dyn CheckpointStore = if r.config.cache {
        let dir = out.join("cache");
        file_store = FileStore::open(&dir).map_err(|source| CliError::Io {
            context: dir.display().to_string(),
            source,
        })?;
        &file_store
    } else {
        &NoStore
    };
    let results = threshold_sweep(&sw.kappas, &sw.amplitudes, &r.packet, &r.sweep, jobs, store)?;

    let amplitude = |i: usize| if sw.amplitudes.len() == 1 { sw.amplitudes[0] } else { sw.amplitudes[i] };
    let mut files = Vec::new();
    let (mut verdicts, mut cauchy, mut cook, mut j1) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for (i, res) in results.iter().enumerate() {
        let (kappa, amp) = (sw.kappas[i], amplitude(i));
        let predicted = Verdict::predicted(kappa);
        match res {
            Ok(rep) => {
                let matches = rep.verdict == predicted;
                let class = rep.j1_growth_class();
                verdicts.push(vec![
                    num(kappa),
                    num(amp),
                    rep.verdict.as_str().to_string(),
                    opt(rep.final_cauchy()),
                    opt(rep.cook_slope),
                    class.clone(),
                ]);
                for e in &rep.cauchy {
                    cauchy.push(vec![
                        num(kappa),
                        num(amp),
                        num(e.tau1),
                        num(e.tau2),
                        num(e.value),
                        num(e.interaction),
                        num(e.splitting_error),
                        num(e.norm_drift),
                    ]);
                }
                for s in &rep.cook_samples {
                    cook.push(vec![
                        num(kappa),
                        num(amp),
                        num(s.tau),
                        num(s.term_v),
                        num(s.term_d),
                        num(s.term_x2),
                        num(s.bound_d),
                        num(s.bound_x2),
                        num(s.envelope_v),
                    ]);
                }
                for a in &rep.j1_curve {
                    j1.push(vec![
                        num(kappa),
                        num(amp),
                        num(a.tau1),
                        num(a.tau2),
                        num(a.j1_lower),
                        num(a.j1_numeric),
                        num(a.j2_envelope),
                        num(a.j3_bound),
                        num(a.constants.gamma),
                    ]);
                }
                files.push(write_json(
                    &out.join(format!("report_{i:02}.json")),
                    &PointFile {
                        stamp: &stamp,
                        index: i,
                        predicted,
                        matches,
                        j1_growth_class: class,
                        report: rep,
                    },
                )?);
                summary.push(format!(
                    "kappa {kappa} C {amp}: {} (expected {}){}",
                    rep.verdict.as_str(),
                    predicted.as_str(),
                    if matches { "" } else { "  MISMATCH" }
                ));
                points.push(SummaryPoint {
                    index: i,
                    kappa,
                    amplitude: amp,
                    verdict: Some(rep.verdict),
                    predicted,
                    matches,
                    error: None,
                });
            }
            Err(e) => {
                verdicts.push(vec![num(kappa), num(amp), "failed".into(), String::new(), String::new(), String::new()]);
                summary.push(format!("kappa {kappa} C {amp}: FAILED: {e}"));
                failures.push(FailureEntry {
                    index: i,
                    kappa,
                    amplitude: amp,
                    error: e.to_string(),
                });
                points.push(SummaryPoint {
                    index: i,
                    kappa,
                    amplitude: amp,
                    verdict: None,
                    predicted,
                    matches: false,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let pair = ["kappa", "amplitude"];
    let cols = |rest: &[&'static str]| -> Vec<&'static str> { pair.iter().chain(rest).copied().collect() };
    files.push(write_csv(
        &out.join("verdicts.csv"),
        &cols(&["verdict", "final_cauchy", "cook_slope", "j1_growth_class"]),
        &verdicts,
        &stamp,
    )?);
    files.push(write_csv(
        &out.join("cauchy.csv"),
        &cols(&["tau1", "tau2", "d", "interaction", "splitting_error", "norm_drift"]),
        &cauchy,
        &stamp,
    )?);
    files.push(write_csv(
        &out.join("cook_samples.csv"),
        &cols(&["tau", "term_v", "term_d", "term_x2", "bound_d", "bound_x2", "envelope_v"]),
        &cook,
        &stamp,
    )?);
    files.push(write_csv(
        &out.join("j1_curve.csv"),
        &cols(&["tau1", "tau2", "j1_lower", "j1_numeric", "j2_envelope", "j3_bound", "gamma"]),
        &j1,
        &stamp,
    )?);
    let failed = failures.len();
    if failed > 0 {
        files.push(write_json(
            &out.join("failures.json"),
            &FailureManifest {
                stamp: &stamp,
                failures,
            },
        )?);
    }
    let all_match = points.iter().all(|p| p.matches);
    files.push(write_json(
        &out.join("summary.json"),
        &SweepSummary {
            stamp: &stamp,
            all_match,
            failures: failed,
            points,
        },
    )?);
    Ok(SweepOutcome {
        outcome: Outcome {
            matches: all_match,
            files,
            summary,
        },
        failed,
    })
}
