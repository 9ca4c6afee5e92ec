//! Initial-condition factory, time integration of the regularized problem and
//! extinction detection.

use crate::exponents::{barrier_constants, ProblemParams, Regime};
use crate::gridop::{
    a_eps, b_eps, face_gradient_into, DiscreteOperator, Field, OuterBoundary, RadialGrid,
    Regularization, SchemeOptions,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("initial condition violates {0}")]
    HypothesisViolated(String),
    #[error("run diverged at t = {t}: {reason}")]
    Diverged { t: f64, reason: String },
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
}

/// Kinds of initial data, with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum IcKind {
    /// `m (R0² - r²)_+^power`; `power` defaults to ω and `m` to `κ (2R0)^{-ω}`.
    Bump {
        #[serde(default)]
        m: Option<f64>,
        r0: f64,
        #[serde(default)]
        power: Option<f64>,
    },
    /// `C (1+r²)^{-θ/2}` with `θ > q/(1-q)`.
    FastDecay { c: f64, theta: f64 },
    /// `C (1+r²)^{-ρ/2}` with `0 < ρ < q/(1-q)`.
    FatTail { c: f64, rho: f64 },
    /// Piecewise linear through `(r, u)`, zero beyond the last node.
    Custom { r: Vec<f64>, u: Vec<f64> },
}

/// Bound and gradient constant attached to a bump with exponent ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpCertificate {
    /// `κ (2R0)^{-ω}`.
    pub m_max: f64,
    pub m: f64,
    /// `2 m^{1/ω} R0^{1 - 1/(p-1-q)}`.
    pub delta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub kind: IcKind,
    pub field: Field,
    pub sup_norm: f64,
    pub certificate: Option<BumpCertificate>,
}

fn violated(msg: impl Into<String>) -> SolverError {
    SolverError::HypothesisViolated(msg.into())
}

pub fn make_initial_condition(
    kind: &IcKind,
    grid: &RadialGrid,
    params: &ProblemParams,
) -> Result<InitialCondition, SolverError> {
    let q = params.q();
    let threshold = if q < 1.0 { q / (1.0 - q) } else { f64::INFINITY };
    let mut certificate = None;
    let field = match *kind {
        IcKind::Bump { m, r0, power } => {
            if !(r0 > 0.0 && r0.is_finite()) {
                return Err(violated(format!("bump radius R0 = {r0} must be positive")));
            }
            let barrier = match params.regime() {
                Regime::SinglePointRange => barrier_constants(params),
                _ => None,
            };
            let (exp, m) = match (power, barrier) {
                (Some(e), _) if !(e >= 1.0) => {
                    return Err(violated(format!("bump power {e} must be >= 1")))
                }
                (Some(e), _) => {
                    let m = m.ok_or_else(|| violated("bump with explicit power needs m"))?;
                    (e, m)
                }
                (None, Some((kappa, omega))) => {
                    let m_max = kappa * (2.0 * r0).powf(-omega);
                    let m = m.unwrap_or(m_max);
                    if m > m_max * (1.0 + 1e-12) {
                        return Err(violated(format!(
                            "the barrier bound m <= kappa (2 R0)^-omega = {m_max} (got m = {m})"
                        )));
                    }
                    let d = params.p() - 1.0 - q;
                    certificate = Some(BumpCertificate {
                        m_max,
                        m,
                        delta0: 2.0 * m.powf(1.0 / omega) * r0.powf(1.0 - 1.0 / d),
                    });
                    (omega, m)
                }
                (None, None) => {
                    return Err(violated(
                        "the barrier bound: kappa is undefined outside the single point range, give an explicit power",
                    ))
                }
            };
            if !(m >= 0.0 && m.is_finite()) {
                return Err(violated(format!("bump amplitude m = {m} must be >= 0")));
            }
            Field::from_fn(grid, |r| {
                let s = r0 * r0 - r * r;
                if s > 0.0 {
                    m * s.powf(exp)
                } else {
                    0.0
                }
            })
        }
        IcKind::FastDecay { c, theta } => {
            if !(theta > threshold) {
                return Err(violated(format!(
                    "the decay threshold theta > q/(1-q) = {threshold} (got theta = {theta})"
                )));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(violated(format!("amplitude C = {c} must be positive")));
            }
            Field::from_fn(grid, |r| c * (1.0 + r * r).powf(-0.5 * theta))
        }
        IcKind::FatTail { c, rho } => {
            if !(rho > 0.0 && rho < threshold) {
                return Err(violated(format!(
                    "the fat-tail condition 0 < rho < q/(1-q) = {threshold} (got rho = {rho})"
                )));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(violated(format!("amplitude C = {c} must be positive")));
            }
            Field::from_fn(grid, |r| c * (1.0 + r * r).powf(-0.5 * rho))
        }
        IcKind::Custom { ref r, ref u } => {
            if r.len() != u.len() || r.is_empty() {
                return Err(violated("custom data: r and u must be nonempty and of equal length"));
            }
            if r.windows(2).any(|w| !(w[1] > w[0])) || r[0] < 0.0 {
                return Err(violated("custom data: r nodes must be >= 0 and strictly increasing"));
            }
            if u.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(violated("custom data: u must be finite and nonnegative"));
            }
            if u.windows(2).any(|w| w[1] > w[0]) {
                return Err(violated("custom data: u must be non-increasing in r"));
            }
            Field::from_fn(grid, |x| interp(r, u, x))
        }
    };
    let sup_norm = field.max();
    Ok(InitialCondition {
        kind: kind.clone(),
        field,
        sup_norm,
        certificate,
    })
}

fn interp(r: &[f64], u: &[f64], x: f64) -> f64 {
    if x <= r[0] {
        return u[0];
    }
    let last = r.len() - 1;
    if x > r[last] {
        return 0.0;
    }
    let k = r.partition_point(|&v| v < x);
    let (r0, r1) = (r[k - 1], r[k]);
    let s = (x - r0) / (r1 - r0);
    u[k - 1] + s * (u[k] - u[k - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    #[default]
    #[serde(rename = "explicit-euler")]
    ExplicitEuler,
    /// Diffusion implicit with frozen `a_ε`, Hamiltonian explicit.
    #[serde(rename = "semi-implicit")]
    SemiImplicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub safety: f64,
    pub t_end: f64,
    /// Snapshot spacing in time; 0 keeps only the first and last state.
    pub snapshot_dt: f64,
    /// Keep every k-th step in the series (crossing rows are always kept).
    pub series_stride: usize,
    pub reg: Regularization,
    pub tol_ext: f64,
    pub tol_pos: f64,
    /// Constant added to the initial data (0 for plain runs).
    pub lift: f64,
    /// Upper bound on the step (semi-implicit scheme).
    pub dt_max: f64,
    pub max_steps: u64,
    pub outer: OuterBoundary,
}

impl SolverConfig {
    pub fn validate(&self, params: &ProblemParams, sup_norm: f64) -> Result<(), SolverError> {
        self.reg
            .validate(params)
            .map_err(|e| SolverError::BadConfig(e.to_string()))?;
        let bad = |s: String| Err(SolverError::BadConfig(s));
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("safety = {} must lie in (0, 1]", self.safety));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.tol_ext > 0.0) || !(self.tol_pos > 0.0) {
            return bad("tol_ext and tol_pos must be positive".into());
        }
        if self.tol_pos < f64::EPSILON * sup_norm {
            return bad(format!(
                "tol_pos = {} is below machine precision relative to sup u0 = {sup_norm}",
                self.tol_pos
            ));
        }
        if !(self.lift >= 0.0) || !(self.snapshot_dt >= 0.0) || !(self.dt_max > 0.0) {
            return bad("lift, snapshot_dt must be >= 0 and dt_max > 0".into());
        }
        if self.series_stride == 0 {
            return bad("series_stride must be >= 1".into());
        }
        Ok(())
    }
}

/// Data-scaled defaults used when a configuration leaves them open.
///
/// `ε = max(1.1 ε_pe, 1e-7 G0)` with `ε_pe` the cell Péclet bound and `G0` the
/// largest initial face gradient, and
/// `tol_ext = tol_pos = sup u0 · max(1e-6, 10 (ε/G0)^{p-q})`.
pub fn default_eps(params: &ProblemParams, grid: &RadialGrid, u0: &Field) -> f64 {
    let g0 = max_gradient(grid, u0);
    let pe = if params.p() - params.q() > 1.0 {
        1.1 * crate::gridop::peclet_eps(params, grid)
    } else {
        0.0
    };
    let floor = if g0 > 0.0 { 1e-7 * g0 } else { 1e-7 };
    pe.max(floor)
}

pub fn default_tolerance(params: &ProblemParams, grid: &RadialGrid, u0: &Field, eps: f64) -> f64 {
    let g0 = max_gradient(grid, u0);
    let sup = u0.max();
    if sup <= 0.0 || g0 <= 0.0 {
        return f64::MIN_POSITIVE.max(1e-6 * sup);
    }
    let ratio = 10.0 * (eps / g0).powf(params.p() - params.q());
    sup * ratio.max(1e-6)
}

pub fn max_gradient(grid: &RadialGrid, u: &Field) -> f64 {
    crate::gridop::face_gradient(grid, u)
        .iter()
        .fold(0.0, |a, &g| a.max(g.abs()))
}

impl SolverConfig {
    /// Explicit scheme with data-scaled ε and thresholds.
    pub fn recommended(params: &ProblemParams, grid: &RadialGrid, u0: &Field, t_end: f64) -> Self {
        let eps = default_eps(params, grid, u0);
        let tol = default_tolerance(params, grid, u0, eps);
        Self {
            scheme: Scheme::ExplicitEuler,
            safety: 0.9,
            t_end,
            snapshot_dt: t_end / 200.0,
            series_stride: 1,
            reg: Regularization {
                eps,
                gamma_reg: Regularization::default_gamma_reg(params),
                counterterm: true,
            },
            tol_ext: tol,
            tol_pos: tol,
            lift: 0.0,
            dt_max: t_end / 1000.0,
            max_steps: 200_000_000,
            outer: OuterBoundary::Dirichlet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub max_u: f64,
    pub support_radius: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Extinct,
    HorizonReached,
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub params: ProblemParams,
    pub grid: RadialGrid,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<Snapshot>,
    pub t_e_est: Option<f64>,
    pub termination: Termination,
    pub steps: u64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub sup_norm0: f64,
    pub tol_ext: f64,
    pub tol_pos: f64,
}

/// Largest cell centre with `u > tol_pos`, 0 if there is none.
pub fn support_radius_of(grid: &RadialGrid, u: &[f64], tol_pos: f64) -> f64 {
    u.iter()
        .rposition(|&v| v > tol_pos)
        .map_or(0.0, |i| grid.center(i))
}

/// First crossing of `tol_ext` by `max_u`, interpolated linearly in
/// `log max_u`. A row equal to `tol_ext` counts as crossed.
pub fn detect_extinction(series: &[SeriesRow], tol_ext: f64) -> Option<f64> {
    let k = series.iter().position(|row| row.max_u <= tol_ext)?;
    let row = series[k];
    if k == 0 || row.max_u == tol_ext {
        return Some(row.t);
    }
    let prev = series[k - 1];
    if row.max_u > 0.0 && prev.max_u > 0.0 {
        let (l0, l1, lt) = (prev.max_u.ln(), row.max_u.ln(), tol_ext.ln());
        let s = (l0 - lt) / (l0 - l1);
        Some(prev.t + s * (row.t - prev.t))
    } else {
        let s = (prev.max_u - tol_ext) / (prev.max_u - row.max_u);
        Some(prev.t + s * (row.t - prev.t))
    }
}

/// Solves `A x = d` for tridiagonal `A` with sub-, main and super-diagonals
/// `lo`, `di`, `up` (Thomas algorithm). `lo[0]` and `up[n-1]` are ignored.
fn thomas(lo: &[f64], di: &[f64], up: &[f64], d: &mut [f64], c: &mut [f64]) {
    let n = di.len();
    c[0] = up[0] / di[0];
    d[0] /= di[0];
    for i in 1..n {
        let den = di[i] - lo[i] * c[i - 1];
        c[i] = if i + 1 < n { up[i] / den } else { 0.0 };
        d[i] = (d[i] - lo[i] * d[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
}

struct SemiImplicit {
    grad: Vec<f64>,
    coef: Vec<f64>,
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    c: Vec<f64>,
}

impl SemiImplicit {
    fn new(m: usize) -> Self {
        Self {
            grad: vec![0.0; m + 1],
            coef: vec![0.0; m + 1],
            lo: vec![0.0; m],
            di: vec![0.0; m],
            up: vec![0.0; m],
            c: vec![0.0; m],
        }
    }

    /// Step limit from the explicit Hamiltonian.
    fn dt_limit(&mut self, grid: &RadialGrid, u: &[f64], p: &ProblemParams, reg: &Regularization, outer: OuterBoundary) -> f64 {
        face_gradient_into(grid, u, outer, &mut self.grad);
        let (q, eps) = (p.q(), reg.eps);
        let mut ham = 0.0f64;
        for i in 0..u.len() {
            let gb = 0.5 * (self.grad[i] + self.grad[i + 1]);
            ham = ham.max(q * b_eps(gb * gb, q, eps) / gb.abs().max(eps));
        }
        grid.dr() / ham
    }

    fn step(
        &mut self,
        grid: &RadialGrid,
        u: &mut [f64],
        dt: f64,
        p: &ProblemParams,
        reg: &Regularization,
        outer: OuterBoundary,
    ) {
        let m = u.len();
        let (pp, q, eps) = (p.p(), p.q(), reg.eps);
        face_gradient_into(grid, u, outer, &mut self.grad);
        let inv_dr = 1.0 / grid.dr();
        for j in 0..=m {
            let g = self.grad[j];
            self.coef[j] = grid.face_weight(j) * a_eps(g * g, pp, eps) * inv_dr;
        }
        self.coef[0] = 0.0;
        if outer == OuterBoundary::ZeroFlux {
            self.coef[m] = 0.0;
        }
        let source = if reg.counterterm { eps.powf(q) } else { 0.0 };
        for i in 0..m {
            let s = dt / grid.cell_weight(i);
            let (cl, cr) = (self.coef[i], self.coef[i + 1]);
            self.lo[i] = -s * cl;
            self.up[i] = -s * cr;
            self.di[i] = 1.0 + s * (cl + cr);
            let gb = 0.5 * (self.grad[i] + self.grad[i + 1]);
            // Hamiltonian explicit; clip so the absorption cannot overshoot zero.
            let h = b_eps(gb * gb, q, eps) - source;
            self.c[i] = (u[i] - dt * h).max(0.0);
        }
        u.copy_from_slice(&self.c);
        let mut c = std::mem::take(&mut self.c);
        thomas(&self.lo, &self.di, &self.up, u, &mut c);
        self.c = c;
        for v in u.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
}

/// Integrates from `ic` until extinction, the horizon, or divergence.
pub fn run(
    params: &ProblemParams,
    grid: &RadialGrid,
    ic: &InitialCondition,
    cfg: &SolverConfig,
) -> Result<SimulationResult, SolverError> {
    cfg.validate(params, ic.sup_norm)?;
    if grid.dim() != params.dim() {
        return Err(SolverError::BadConfig(format!(
            "grid dimension {} differs from N = {}",
            grid.dim(),
            params.dim()
        )));
    }
    let m = grid.len();
    let mut u: Vec<f64> = ic.field.values.iter().map(|&v| v + cfg.lift).collect();
    let sup0 = u.iter().copied().fold(0.0, f64::max);
    let opts = SchemeOptions {
        hamiltonian: true,
        outer: cfg.outer,
    };
    let mut op = DiscreteOperator::new(*params, cfg.reg, opts);
    let mut semi = SemiImplicit::new(m);
    let mut work = vec![0.0; m];
    // Without the counterterm zero is not steady; keep the iterate nonnegative.
    let clamp = !cfg.reg.counterterm;

    let row_of = |t: f64, u: &[f64]| SeriesRow {
        t,
        max_u: u.iter().copied().fold(0.0, f64::max),
        support_radius: support_radius_of(grid, u, cfg.tol_pos),
        mass: u.iter().enumerate().map(|(i, &v)| v * grid.cell_weight(i)).sum(),
    };

    let mut t = 0.0;
    let first = row_of(0.0, &u);
    let mut series = vec![first];
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        field: Field { values: u.clone() },
    }];
    let mut steps = 0u64;
    let (mut dt_min, mut dt_max) = (f64::INFINITY, 0.0f64);

    let finish = |series: Vec<SeriesRow>,
                  snapshots: Vec<Snapshot>,
                  t_e: Option<f64>,
                  termination: Termination,
                  steps: u64,
                  dt_min: f64,
                  dt_max: f64| SimulationResult {
        params: *params,
        grid: grid.clone(),
        series,
        snapshots,
        t_e_est: t_e,
        termination,
        steps,
        dt_min,
        dt_max,
        sup_norm0: sup0,
        tol_ext: cfg.tol_ext,
        tol_pos: cfg.tol_pos,
    };

    if first.max_u < cfg.tol_ext {
        return Ok(finish(series, snapshots, Some(0.0), Termination::Extinct, 0, 0.0, 0.0));
    }

    let mut prev = first;
    let mut next_snap = if cfg.snapshot_dt > 0.0 { cfg.snapshot_dt } else { f64::INFINITY };
    let mut snap_index = 1u64;
    loop {
        if steps >= cfg.max_steps {
            return Err(SolverError::BadConfig(format!(
                "max_steps = {} reached at t = {t}",
                cfg.max_steps
            )));
        }
        let mut dt = match cfg.scheme {
            Scheme::ExplicitEuler => op.stable_dt(grid, &u, cfg.safety),
            Scheme::SemiImplicit => {
                (cfg.safety * semi.dt_limit(grid, &u, params, &cfg.reg, cfg.outer)).min(cfg.dt_max)
            }
        };
        let mut hit_snap = false;
        if t + dt >= next_snap {
            dt = next_snap - t;
            hit_snap = true;
        }
        let mut hit_end = false;
        if t + dt >= cfg.t_end {
            dt = cfg.t_end - t;
            hit_end = true;
        }
        if !(dt > 0.0) {
            // Rounding left t a hair short of a target time.
            dt = f64::EPSILON * t.max(1.0);
        }
        match cfg.scheme {
            Scheme::ExplicitEuler => op.euler_step(grid, &mut u, dt, &mut work),
            Scheme::SemiImplicit => semi.step(grid, &mut u, dt, params, &cfg.reg, cfg.outer),
        }
        if clamp {
            for v in u.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        t = if hit_end {
            cfg.t_end
        } else if hit_snap {
            next_snap
        } else {
            t + dt
        };
        steps += 1;
        dt_min = dt_min.min(dt);
        dt_max = dt_max.max(dt);

        let row = row_of(t, &u);
        if !row.max_u.is_finite() || u.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Diverged {
                t,
                reason: "non-finite value".into(),
            });
        }
        if row.max_u > 2.0 * sup0 {
            return Err(SolverError::Diverged {
                t,
                reason: format!("max u = {} exceeds twice the initial sup {}", row.max_u, sup0),
            });
        }

        let crossed = row.max_u < cfg.tol_ext;
        if crossed || hit_snap || hit_end || steps % cfg.series_stride as u64 == 0 {
            if crossed && series.last().map_or(true, |r| r.t < prev.t) {
                series.push(prev);
            }
            series.push(row);
        }
        if hit_snap {
            snapshots.push(Snapshot {
                t,
                field: Field { values: u.clone() },
            });
            snap_index += 1;
            next_snap = cfg.snapshot_dt * snap_index as f64;
        }
        if crossed {
            if !hit_snap {
                snapshots.push(Snapshot {
                    t,
                    field: Field { values: u.clone() },
                });
            }
            let t_e = detect_extinction(&series, cfg.tol_ext);
            return Ok(finish(series, snapshots, t_e, Termination::Extinct, steps, dt_min, dt_max));
        }
        if hit_end {
            if !hit_snap {
                snapshots.push(Snapshot {
                    t,
                    field: Field { values: u.clone() },
                });
            }
            return Ok(finish(
                series,
                snapshots,
                None,
                Termination::HorizonReached,
                steps,
                dt_min,
                dt_max,
            ));
        }
        prev = row;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa() -> ProblemParams {
        ProblemParams::new(1, 2.0, 0.5).unwrap()
    }

    #[test]
    fn bump_example() {
        let grid = RadialGrid::new(1, 4.0, 400).unwrap();
        let ic = make_initial_condition(
            &IcKind::Bump {
                m: Some(1.0 / 96.0),
                r0: 1.0,
                power: None,
            },
            &grid,
            &pa(),
        )
        .unwrap();
        let cert = ic.certificate.unwrap();
        assert!((cert.m_max - 1.0 / 96.0).abs() < 1e-17);
        let want = 2.0 * (1.0f64 / 96.0).powf(1.0 / 3.0);
        assert!((cert.delta0 - want).abs() < 1e-15);
        // u0(0) = m R0^{2ω}; the first centre sits at Δr/2.
        let u00 = 1.0 / 96.0 * (1.0 - 0.005f64.powi(2)).powi(3);
        assert!((ic.field.values[0] - u00).abs() < 1e-17);
        let too_big = IcKind::Bump {
            m: Some(0.011),
            r0: 1.0,
            power: None,
        };
        assert!(make_initial_condition(&too_big, &grid, &pa()).is_err());
    }

    #[test]
    fn decay_hypotheses() {
        let grid = RadialGrid::new(1, 4.0, 64).unwrap();
        assert!(make_initial_condition(&IcKind::FastDecay { c: 1.0, theta: 3.0 }, &grid, &pa()).is_ok());
        assert!(make_initial_condition(&IcKind::FastDecay { c: 1.0, theta: 1.0 }, &grid, &pa()).is_err());
        match make_initial_condition(&IcKind::FatTail { c: 1.0, rho: 1.0 }, &grid, &pa()) {
            Err(SolverError::HypothesisViolated(msg)) => assert!(msg.contains("rho")),
            other => panic!("{other:?}"),
        }
        assert!(make_initial_condition(&IcKind::FatTail { c: 1.0, rho: 0.5 }, &grid, &pa()).is_ok());
    }

    #[test]
    fn custom_interpolates_and_checks_monotonicity() {
        let grid = RadialGrid::new(1, 2.0, 4).unwrap();
        let ok = IcKind::Custom {
            r: vec![0.0, 1.0],
            u: vec![1.0, 0.0],
        };
        let ic = make_initial_condition(&ok, &grid, &pa()).unwrap();
        assert_eq!(ic.field.values, vec![0.75, 0.25, 0.0, 0.0]);
        let bad = IcKind::Custom {
            r: vec![0.0, 1.0],
            u: vec![0.0, 1.0],
        };
        assert!(make_initial_condition(&bad, &grid, &pa()).is_err());
    }

    fn series(f: impl Fn(f64) -> f64, n: usize, t1: f64) -> Vec<SeriesRow> {
        (0..=n)
            .map(|k| {
                let t = t1 * k as f64 / n as f64;
                SeriesRow {
                    t,
                    max_u: f(t),
                    support_radius: 0.0,
                    mass: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn extinction_detection_examples() {
        let s = series(|t| (0.8 - t).max(0.0).powi(2), 10_000, 1.0);
        let te = detect_extinction(&s, 1e-8).unwrap();
        assert!((te - 0.8).abs() <= 1e-4, "{te}");

        let s = series(|t| 1.0 - 0.5 * t, 100, 1.0);
        assert_eq!(detect_extinction(&s, 0.1), None);

        let s = series(|t| if t < 0.5 { 1.0 - t } else { 0.5 }, 100, 1.0);
        let te = detect_extinction(&s, 0.5).unwrap();
        assert!((te - 0.5).abs() < 1e-12, "{te}");
    }

    #[test]
    fn thomas_solves_small_system() {
        let lo = [0.0, -1.0, -1.0];
        let di = [2.0, 2.0, 2.0];
        let up = [-1.0, -1.0, 0.0];
        let mut d = [1.0, 0.0, 1.0];
        let mut c = [0.0; 3];
        thomas(&lo, &di, &up, &mut d, &mut c);
        for (x, w) in d.iter().zip([1.0, 1.0, 1.0]) {
            assert!((x - w).abs() < 1e-14);
        }
    }
}
