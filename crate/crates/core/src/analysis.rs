//! Post-processing of simulation output: support radius, exponent fits,
//! comparison checks, gradient envelopes and the J-functional diagnostic.

use crate::closedform::{ComparisonProfile, RadialProfile};
use crate::exponents::{barrier_constants, derive_constants, ProblemParams, Regime};
use crate::gridop::{Field, RadialGrid};
use crate::solver::{SeriesRow, SimulationResult, Snapshot};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_FIT_POINTS: usize = 8;
/// Reference value of ϑ for the upper rate bound when `p != 2`.
pub const THETA_REF: f64 = 0.9;
/// Half-width added to exponent bands.
pub const TOL_EXP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("only {found} points in the fit window, need at least {needed}")]
    InsufficientPoints { found: usize, needed: usize },
    #[error("non-positive value {value} at t = {t} inside the fit window")]
    NonPositiveValues { t: f64, value: f64 },
    #[error("invalid fit window: {0}")]
    BadWindow(String),
    #[error("initial ordering fails: violation {violation} at r = {r}")]
    InitialOrderingFails { r: f64, violation: f64 },
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("no cell qualifies at t = {t} (solution extinct)")]
    EmptySupport { t: f64 },
}

/// Largest cell centre with `u > tol_pos`, 0 if none.
pub fn support_radius(grid: &RadialGrid, field: &Field, tol_pos: f64) -> f64 {
    crate::solver::support_radius_of(grid, &field.values, tol_pos)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportTrace {
    pub rows: Vec<(f64, f64)>,
}

impl SupportTrace {
    pub fn from_series(series: &[SeriesRow]) -> Self {
        Self {
            rows: series.iter().map(|r| (r.t, r.support_radius)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub window: FitWindow,
    pub rms: f64,
    pub n_points: usize,
}

/// Least-squares slope of `ln y` against `ln(t_e - t)` over the rows in `window`.
pub fn fit_exponent(
    rows: &[(f64, f64)],
    t_e: f64,
    window: FitWindow,
) -> Result<ExponentFit, AnalysisError> {
    if !(window.t_lo < window.t_hi) || !(window.t_hi < t_e) {
        return Err(AnalysisError::BadWindow(format!(
            "need t_lo < t_hi < T_e, got [{}, {}] with T_e = {t_e}",
            window.t_lo, window.t_hi
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, y) in rows.iter().filter(|(t, _)| *t >= window.t_lo && *t <= window.t_hi) {
        if !(y > 0.0) {
            return Err(AnalysisError::NonPositiveValues { t, value: y });
        }
        xs.push((t_e - t).ln());
        ys.push(y.ln());
    }
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(AnalysisError::InsufficientPoints {
            found: n,
            needed: MIN_FIT_POINTS,
        });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(AnalysisError::BadWindow("all points share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(ExponentFit {
        exponent: slope,
        intercept,
        window,
        rms: (ss / nf).sqrt(),
        n_points: n,
    })
}

/// Keeps at most one row per bin of `ln(t_e - t)`, `bins` bins over the window,
/// so that densely sampled late times do not dominate the fit.
pub fn log_thin(rows: &[(f64, f64)], t_e: f64, window: FitWindow, bins: usize) -> Vec<(f64, f64)> {
    let lo = (t_e - window.t_hi).ln();
    let hi = (t_e - window.t_lo).ln();
    let width = (hi - lo) / bins.max(1) as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut last_bin = usize::MAX;
    // Walk from late to early times so each bin keeps the row closest to its lower edge.
    for &(t, y) in rows.iter().rev() {
        if t < window.t_lo || t > window.t_hi {
            continue;
        }
        let x = (t_e - t).ln();
        let b = (((x - lo) / width).floor().max(0.0) as usize).min(bins.saturating_sub(1));
        if b != last_bin {
            out.push((t, y));
            last_bin = b;
        }
    }
    out.reverse();
    out
}

/// `fit_exponent` on the log-thinned rows.
pub fn fit_exponent_thinned(
    rows: &[(f64, f64)],
    t_e: f64,
    window: FitWindow,
    bins: usize,
) -> Result<ExponentFit, AnalysisError> {
    fit_exponent(&log_thin(rows, t_e, window, bins), t_e, window)
}

/// `[T_e - 0.4 (T_e - t_start), T_e - max(5 dt, T_e - t_dec)]` where `t_dec`
/// is the last time with `max_u >= 10 tol_ext`.
pub fn default_window(series: &[SeriesRow], t_e: f64, tol_ext: f64, dt: f64) -> Option<FitWindow> {
    let t_start = series.first()?.t;
    let t_dec = series
        .iter()
        .filter(|r| r.max_u >= 10.0 * tol_ext)
        .map(|r| r.t)
        .last()?;
    let t_lo = t_e - 0.4 * (t_e - t_start);
    let t_hi = (t_e - 5.0 * dt).min(t_dec);
    (t_lo < t_hi).then_some(FitWindow { t_lo, t_hi })
}

/// Bins used by the fits of simulated series.
pub const FIT_BINS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandFit {
    pub quantity: String,
    pub fit: Option<ExponentFit>,
    pub band: [f64; 2],
    pub verdict: Verdict,
}

fn banded(quantity: &str, fit: ExponentFit, band: [f64; 2]) -> BandFit {
    let ok = fit.exponent >= band[0] - TOL_EXP && fit.exponent <= band[1] + TOL_EXP;
    BandFit {
        quantity: quantity.into(),
        fit: Some(fit),
        band,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
    }
}

/// Band for the decay exponent of `max_u`: from the upper rate bound
/// (`(2-q)/(2-2q)` for `p = 2`, `ϑ (p-q)/(p-2q)` otherwise) to `1/(1-q)`.
pub fn rate_band(params: &ProblemParams) -> [f64; 2] {
    let (p, q) = (params.p(), params.q());
    let lo = if p == 2.0 {
        (2.0 - q) / (2.0 - 2.0 * q)
    } else {
        THETA_REF * (p - q) / (p - 2.0 * q)
    };
    [lo, 1.0 / (1.0 - q)]
}

pub fn fit_max_u(result: &SimulationResult, window: FitWindow) -> Result<BandFit, AnalysisError> {
    let t_e = result
        .t_e_est
        .ok_or_else(|| AnalysisError::BadWindow("run did not reach extinction".into()))?;
    let rows: Vec<(f64, f64)> = result.series.iter().map(|r| (r.t, r.max_u)).collect();
    let fit = fit_exponent_thinned(&rows, t_e, window, FIT_BINS)?;
    Ok(banded("max_u", fit, rate_band(&result.params)))
}

/// Fit of the support radius against `T_e - t`, judged against `[ν, σ]`.
/// Not applicable outside the single point range or when the support stays
/// at the scale of the domain.
pub fn fit_support_exponents(
    trace: &SupportTrace,
    t_e: f64,
    window: FitWindow,
    params: &ProblemParams,
    r_max: f64,
) -> Result<BandFit, AnalysisError> {
    let not_applicable = || BandFit {
        quantity: "support_radius".into(),
        fit: None,
        band: [f64::NAN, f64::NAN],
        verdict: Verdict::NotApplicable,
    };
    if params.regime() != Regime::SinglePointRange {
        return Ok(not_applicable());
    }
    let mut in_window: Vec<f64> = trace
        .rows
        .iter()
        .filter(|(t, _)| *t >= window.t_lo && *t <= window.t_hi)
        .map(|&(_, r)| r)
        .collect();
    if !in_window.is_empty() {
        in_window.sort_by(f64::total_cmp);
        if in_window[in_window.len() / 2] >= 0.5 * r_max {
            return Ok(not_applicable());
        }
    }
    let dc = derive_constants(params).map_err(|e| AnalysisError::WrongRegime(e.to_string()))?;
    let band = [dc.nu.unwrap_or(f64::NAN), dc.sigma.unwrap_or(f64::NAN)];
    let fit = fit_exponent_thinned(&trace.rows, t_e, window, FIT_BINS)?;
    Ok(banded("support_radius", fit, band))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DominationSense {
    /// `u <= z`.
    Below,
    /// `u >= z`.
    Above,
}

/// Part of the `(t, r)` plane where a comparison is checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub r: [f64; 2],
    pub t: [f64; 2],
}

impl Default for Region {
    fn default() -> Self {
        Self {
            r: [0.0, f64::INFINITY],
            t: [0.0, f64::INFINITY],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub family: String,
    pub sense: DominationSense,
    pub tol_cmp: f64,
    /// Largest of `u - z` (below) or `z - u` (above).
    pub max_violation: f64,
    pub worst_t: f64,
    pub worst_r: f64,
    pub n_snapshots: usize,
    pub n_points: usize,
    pub pass: bool,
}

/// `10 ε^{min(q, γ_reg)}`.
pub fn reference_tol_cmp(params: &ProblemParams, eps: f64, gamma_reg: f64) -> f64 {
    10.0 * eps.powf(params.q().min(gamma_reg))
}

/// Signed violation of `u <= z` (or `u >= z`) over the stored snapshots that
/// lie in the profile's time domain and in `region`.
pub fn check_domination(
    result: &SimulationResult,
    profile: &ComparisonProfile,
    sense: DominationSense,
    region: Region,
    tol_cmp: f64,
) -> Result<DominationReport, AnalysisError> {
    let (t_min, t_max) = profile.time_domain();
    let grid = &result.grid;
    let sign = match sense {
        DominationSense::Below => 1.0,
        DominationSense::Above => -1.0,
    };
    let mut report = DominationReport {
        family: profile.family().into(),
        sense,
        tol_cmp,
        max_violation: f64::NEG_INFINITY,
        worst_t: f64::NAN,
        worst_r: f64::NAN,
        n_snapshots: 0,
        n_points: 0,
        pass: false,
    };
    let first_t = result.snapshots.first().map(|s| s.t);
    for snap in &result.snapshots {
        let t = snap.t;
        if t < t_min || t >= t_max || t < region.t[0] || t > region.t[1] {
            continue;
        }
        report.n_snapshots += 1;
        for (i, &u) in snap.field.values.iter().enumerate() {
            let r = grid.center(i);
            if r < region.r[0] || r > region.r[1] {
                continue;
            }
            let v = sign * (u - profile.value(t, r));
            report.n_points += 1;
            if Some(t) == first_t && v > tol_cmp {
                return Err(AnalysisError::InitialOrderingFails { r, violation: v });
            }
            if v > report.max_violation {
                report.max_violation = v;
                report.worst_t = t;
                report.worst_r = r;
            }
        }
    }
    report.pass = report.n_points > 0 && report.max_violation <= tol_cmp;
    Ok(report)
}

/// `R0 + (sup u0 / κ)^{1/ω}`.
pub fn localization_radius(r0: f64, sup_norm: f64, params: &ProblemParams) -> Result<f64, AnalysisError> {
    let (kappa, omega) = barrier_constants(params)
        .filter(|_| params.regime() == Regime::SinglePointRange)
        .ok_or_else(|| AnalysisError::WrongRegime("localization needs the single point range".into()))?;
    Ok(r0 + (sup_norm / kappa).powf(1.0 / omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientRow {
    pub t: f64,
    /// Largest discrete slope of `u^e`.
    pub g: f64,
    /// `g / (1 + sup_u0^{s} t^{-1/p})`.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientEnvelope {
    pub exponent: f64,
    pub sup_exponent: f64,
    pub rows: Vec<GradientRow>,
    pub sup_c: f64,
    pub bounded: bool,
}

/// Envelope of `|∂_r u^e|` with `e = (p-q-1)/(p-q)`, normalised by
/// `1 + sup_u0^{(p-2q)/(p(p-q))} t^{-1/p}`. Only faces whose two cells exceed
/// `tol_pos` enter, and only snapshots with `t > 0`.
pub fn gradient_envelope(
    snapshots: &[Snapshot],
    grid: &RadialGrid,
    params: &ProblemParams,
    sup_norm0: f64,
    tol_pos: f64,
) -> GradientEnvelope {
    let (p, q) = (params.p(), params.q());
    let e = (p - q - 1.0) / (p - q);
    let s = (p - 2.0 * q) / (p * (p - q));
    let lift = sup_norm0.powf(s);
    let rows: Vec<GradientRow> = snapshots
        .iter()
        .filter(|sn| sn.t > 0.0)
        .map(|sn| {
            let u = &sn.field.values;
            let g = u
                .windows(2)
                .filter(|w| w[0] > tol_pos && w[1] > tol_pos)
                .map(|w| (w[1].powf(e) - w[0].powf(e)).abs() / grid.dr())
                .fold(0.0, f64::max);
            let c = g / (1.0 + lift * sn.t.powf(-1.0 / p));
            GradientRow { t: sn.t, g, c }
        })
        .collect();
    let sup_c = rows.iter().map(|r| r.c).fold(0.0, f64::max);
    GradientEnvelope {
        exponent: e,
        sup_exponent: s,
        bounded: sup_c.is_finite(),
        rows,
        sup_c,
    }
}

/// The `p = 2` gradient estimate; other `p` use `gradient_envelope` directly.
pub fn gradient_estimate_check(
    snapshots: &[Snapshot],
    grid: &RadialGrid,
    params: &ProblemParams,
    sup_norm0: f64,
    tol_pos: f64,
) -> Result<GradientEnvelope, AnalysisError> {
    if params.p() != 2.0 {
        return Err(AnalysisError::WrongRegime(format!(
            "the gradient estimate is stated for p = 2, got p = {}",
            params.p()
        )));
    }
    Ok(gradient_envelope(snapshots, grid, params, sup_norm0, tol_pos))
}

/// `|a/b - 1|`.
pub fn relative_change(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JRow {
    pub t: f64,
    pub delta_emp: f64,
    pub n_cells: usize,
    /// Largest `J` over the qualifying cells with `δ = delta_probe`.
    pub max_j: f64,
    /// Largest `r^{N-1} |u_r|^{p-1}` over the same cells.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JDiagnostic {
    pub lambda_j: f64,
    pub beta_j: f64,
    pub delta_probe: f64,
    pub rows: Vec<JRow>,
    pub delta0: f64,
    pub inf_delta: f64,
}

/// δ_emp and the J-field of one state. Cells qualify when `u > 10 tol_pos`
/// and `2 Δr < r < r0`; the slope is the centred difference.
pub fn j_row(
    t: f64,
    field: &Field,
    grid: &RadialGrid,
    params: &ProblemParams,
    tol_pos: f64,
    r0: f64,
    delta_probe: f64,
) -> Result<JRow, AnalysisError> {
    let (n, p, q) = (params.dim() as f64, params.p(), params.q());
    let d = p - 1.0 - q;
    if !(d > 0.0) {
        return Err(AnalysisError::WrongRegime("J needs q < p - 1".into()));
    }
    let lambda = n + q / d;
    let beta = (p - 1.0) / (p - q);
    let u = &field.values;
    let m = u.len();
    let dr = grid.dr();
    let mut row = JRow {
        t,
        delta_emp: f64::INFINITY,
        n_cells: 0,
        max_j: f64::NEG_INFINITY,
        scale: 0.0,
    };
    for i in 1..m.saturating_sub(1) {
        let r = grid.center(i);
        if !(r > 2.0 * dr && r < r0 && u[i] > 10.0 * tol_pos) {
            continue;
        }
        let g = (u[i + 1] - u[i - 1]) / (2.0 * dr);
        let ratio = g.abs() / (r.powf(1.0 / d) * u[i].powf(1.0 / (p - q)));
        row.delta_emp = row.delta_emp.min(ratio.powf(p - 1.0));
        let flux = r.powf(n - 1.0) * g.abs().powf(p - 1.0);
        let j = -flux + delta_probe * r.powf(lambda) * u[i].powf(beta);
        row.max_j = row.max_j.max(j);
        row.scale = row.scale.max(flux);
        row.n_cells += 1;
    }
    if row.n_cells == 0 {
        return Err(AnalysisError::EmptySupport { t });
    }
    Ok(row)
}

/// Runs `j_row` on every snapshot. `delta_probe` defaults to half of δ_emp
/// of the first snapshot.
pub fn j_diagnostic(
    snapshots: &[Snapshot],
    grid: &RadialGrid,
    params: &ProblemParams,
    tol_pos: f64,
    r0: f64,
    delta_probe: Option<f64>,
) -> Result<JDiagnostic, AnalysisError> {
    let first = snapshots
        .first()
        .ok_or(AnalysisError::EmptySupport { t: 0.0 })?;
    let delta0 = j_row(first.t, &first.field, grid, params, tol_pos, r0, 0.0)?.delta_emp;
    let probe = delta_probe.unwrap_or(0.5 * delta0);
    let rows = snapshots
        .iter()
        .map(|s| j_row(s.t, &s.field, grid, params, tol_pos, r0, probe))
        .collect::<Result<Vec<_>, _>>()?;
    let (p, q) = (params.p(), params.q());
    Ok(JDiagnostic {
        lambda_j: params.dim() as f64 + q / (p - 1.0 - q),
        beta_j: (p - 1.0) / (p - q),
        delta_probe: probe,
        inf_delta: rows.iter().map(|r| r.delta_emp).fold(f64::INFINITY, f64::min),
        rows,
        delta0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub run_id: String,
    pub t_e_est: Option<f64>,
    pub fits: Vec<BandFit>,
    pub domination: Vec<DominationReport>,
    pub j_floor: Option<f64>,
    pub gradient_envelope: Option<f64>,
    pub localization_radius: Option<f64>,
}

/// Fits and envelopes that need nothing beyond the run itself.
pub fn analyze_run(run_id: &str, result: &SimulationResult, window: Option<FitWindow>) -> AnalysisReport {
    let mut report = AnalysisReport {
        run_id: run_id.into(),
        t_e_est: result.t_e_est,
        fits: Vec::new(),
        domination: Vec::new(),
        j_floor: None,
        gradient_envelope: None,
        localization_radius: None,
    };
    let params = &result.params;
    if let Some(t_e) = result.t_e_est {
        let window = window.or_else(|| default_window(&result.series, t_e, result.tol_ext, result.dt_max));
        if let Some(w) = window {
            if let Ok(f) = fit_max_u(result, w) {
                report.fits.push(f);
            }
            let trace = SupportTrace::from_series(&result.series);
            if let Ok(f) = fit_support_exponents(&trace, t_e, w, params, result.grid.r_max()) {
                report.fits.push(f);
            }
        }
    }
    if params.q() < params.p() - 1.0 {
        let env = gradient_envelope(&result.snapshots, &result.grid, params, result.sup_norm0, result.tol_pos);
        report.gradient_envelope = Some(env.sup_c);
    }
    report
}
