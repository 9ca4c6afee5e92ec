use super::RadialProfile;
use crate::exponents::{derive_constants, ExponentError, ProblemParams, Regime};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error(transparent)]
    Regime(#[from] ExponentError),
    #[error("this construction needs the single point range, got {0}")]
    WrongRegime(Regime),
    #[error("decay exponent {theta} does not exceed the threshold q/(1-q) = {threshold}")]
    DecayTooSlow { theta: f64, threshold: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> ClosedFormError {
    ClosedFormError::InvalidParameter {
        name,
        value,
        reason: reason.into(),
    }
}

fn require_single_point(params: &ProblemParams) -> Result<(), ClosedFormError> {
    match params.regime() {
        Regime::SinglePointRange => Ok(()),
        other => Err(ClosedFormError::WrongRegime(other)),
    }
}

/// Bisection for the root of a decreasing function on `(0, inf)`, carried out
/// in `log a`. Returns the lower end of the final bracket, where `f >= 0`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, rel_tol: f64, max_iter: usize) -> f64 {
    let mut lo = 1.0;
    let mut hi = 1.0;
    while f(lo) < 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return 0.0;
        }
    }
    while f(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    for _ in 0..max_iter {
        if hi / lo - 1.0 <= rel_tol {
            break;
        }
        let mid = (lo * hi).sqrt();
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

// ---------------------------------------------------------------------------
// Barrier

/// Stationary barrier `kappa |r - center|^omega`.
///
/// About the origin it is an exact solution. Shifted to `center > 0` it is
/// the radial trace of `kappa |x - x0|^omega` along the ray through `x0`,
/// which is how it enters comparison checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Barrier {
    pub problem: ProblemParams,
    pub kappa: f64,
    pub omega: f64,
    pub center: f64,
}

impl Barrier {
    pub fn new(problem: ProblemParams, center: f64) -> Result<Self, ClosedFormError> {
        require_single_point(&problem)?;
        let (kappa, omega) = crate::exponents::barrier_constants(&problem)
            .ok_or(ClosedFormError::WrongRegime(problem.regime()))?;
        if !(center >= 0.0 && center.is_finite()) {
            return Err(invalid("center", center, "must be finite and >= 0"));
        }
        Ok(Self {
            problem,
            kappa,
            omega,
            center,
        })
    }

    pub fn at_origin(problem: ProblemParams) -> Result<Self, ClosedFormError> {
        Self::new(problem, 0.0)
    }
}

impl RadialProfile for Barrier {
    fn problem(&self) -> &ProblemParams {
        &self.problem
    }
    fn value(&self, _t: f64, r: f64) -> f64 {
        self.kappa * (r - self.center).abs().powf(self.omega)
    }
    fn d_r(&self, _t: f64, r: f64) -> f64 {
        let d = r - self.center;
        self.omega * self.kappa * d.abs().powf(self.omega - 1.0) * d.signum()
    }
    fn d_rr(&self, _t: f64, r: f64) -> f64 {
        let d = (r - self.center).abs();
        self.omega * (self.omega - 1.0) * self.kappa * d.powf(self.omega - 2.0)
    }
    fn d_t(&self, _t: f64, _r: f64) -> f64 {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Shrinking supersolution

/// `Σ(t, r) = [A/(1+r^α) - η(t)]_+^γ` with `η' = K η^β`, `η(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkSuper {
    pub problem: ProblemParams,
    pub amplitude: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub radius: f64,
    pub t0: f64,
    /// `K` in `η' = K η^β`.
    pub eta_coeff: f64,
    pub beta_eta: f64,
    /// Envelope `u0 <= C (1+r)^{-θ}` the parameters were built for.
    pub envelope_c: f64,
    pub envelope_theta: f64,
    pub theta_prime: f64,
    pub sup_norm: f64,
    /// Ratios lhs/rhs of the three compatibility conditions (all >= 1).
    pub cond_ratios: [f64; 3],
    /// Time at which the lateral boundary condition becomes an equality.
    pub t_star: f64,
}

impl ShrinkSuper {
    /// Direct construction from `(A, α, R, t0)`. Checks `α ∈ (α1, α2)` and
    /// `R >= 1` but none of the compatibility conditions.
    pub fn from_parts(
        problem: ProblemParams,
        amplitude: f64,
        alpha: f64,
        radius: f64,
        t0: f64,
    ) -> Result<Self, ClosedFormError> {
        require_single_point(&problem)?;
        let dc = derive_constants(&problem)?;
        let gamma = dc.gamma_sigma.expect("single point range");
        let (a1, a2) = (dc.alpha1.unwrap(), dc.alpha2.unwrap());
        if !(alpha > a1 && alpha < a2) {
            return Err(invalid(
                "alpha",
                alpha,
                format!("must lie in (alpha1, alpha2) = ({a1}, {a2})"),
            ));
        }
        if !(radius >= 1.0 && radius.is_finite()) {
            return Err(invalid("R", radius, "must be finite and >= 1"));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid("A", amplitude, "must be positive"));
        }
        if !(t0 > 0.0) {
            return Err(invalid("t0", t0, "must be positive"));
        }
        let q = problem.q();
        let beta_eta = (alpha * (1.0 + q * gamma - gamma) + q) / alpha;
        let eta_coeff = (alpha * gamma).powf(q) * amplitude.powf(-q / alpha) / (2.0 * gamma);
        Ok(Self {
            problem,
            amplitude,
            alpha,
            gamma,
            radius,
            t0,
            eta_coeff,
            beta_eta,
            envelope_c: f64::NAN,
            envelope_theta: f64::NAN,
            theta_prime: alpha * gamma,
            sup_norm: f64::NAN,
            cond_ratios: [f64::NAN; 3],
            t_star: f64::NAN,
        })
    }

    /// Copy with the amplitude exponent in the η-law flipped to `A^{+q/α}`.
    /// The result is not a supersolution; it exists to exercise certification.
    pub fn inverted_eta_law(&self) -> Self {
        let q = self.problem.q();
        let mut out = self.clone();
        out.eta_coeff = (self.alpha * self.gamma).powf(q) * self.amplitude.powf(q / self.alpha)
            / (2.0 * self.gamma);
        out
    }

    pub fn eta(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let e = 1.0 - self.beta_eta;
        (self.eta_coeff * e * t).powf(1.0 / e)
    }

    pub fn eta_dot(&self, t: f64) -> f64 {
        self.eta_coeff * self.eta(t).powf(self.beta_eta)
    }

    fn h(&self, r: f64) -> f64 {
        self.amplitude / (1.0 + r.powf(self.alpha))
    }

    fn h_r(&self, r: f64) -> f64 {
        let ra = r.powf(self.alpha);
        -self.amplitude * self.alpha * r.powf(self.alpha - 1.0) / (1.0 + ra).powi(2)
    }

    fn h_rr(&self, r: f64) -> f64 {
        let a = self.alpha;
        let ra = r.powf(a);
        -self.amplitude * a * r.powf(a - 2.0) * ((a - 1.0) - (a + 1.0) * ra) / (1.0 + ra).powi(3)
    }

    fn y(&self, t: f64, r: f64) -> f64 {
        self.h(r) - self.eta(t)
    }

    /// Outer edge of the positivity set of Σ at time `t`.
    pub fn support_radius(&self, t: f64) -> f64 {
        let e = self.eta(t);
        if e <= 0.0 {
            return f64::INFINITY;
        }
        let s = self.amplitude / e - 1.0;
        if s <= 0.0 {
            0.0
        } else {
            s.powf(1.0 / self.alpha)
        }
    }
}

impl RadialProfile for ShrinkSuper {
    fn problem(&self) -> &ProblemParams {
        &self.problem
    }
    fn value(&self, t: f64, r: f64) -> f64 {
        let y = self.y(t, r);
        if y <= 0.0 {
            0.0
        } else {
            y.powf(self.gamma)
        }
    }
    fn d_r(&self, t: f64, r: f64) -> f64 {
        let y = self.y(t, r);
        if y <= 0.0 {
            return 0.0;
        }
        self.gamma * y.powf(self.gamma - 1.0) * self.h_r(r)
    }
    fn d_rr(&self, t: f64, r: f64) -> f64 {
        let y = self.y(t, r);
        if y <= 0.0 {
            return 0.0;
        }
        let g = self.gamma;
        let hr = self.h_r(r);
        g * (g - 1.0) * y.powf(g - 2.0) * hr * hr + g * y.powf(g - 1.0) * self.h_rr(r)
    }
    fn d_t(&self, t: f64, r: f64) -> f64 {
        let y = self.y(t, r);
        if y <= 0.0 {
            return 0.0;
        }
        -self.gamma * y.powf(self.gamma - 1.0) * self.eta_dot(t)
    }
    fn at_kink(&self, t: f64, r: f64) -> bool {
        self.y(t, r).abs() <= 1e-14 * self.amplitude
    }
    fn excluded(&self, t: f64, r: f64) -> bool {
        self.y(t, r) < 1e-6 * self.amplitude
    }
    fn time_domain(&self) -> (f64, f64) {
        (0.0, self.t0)
    }
}

/// Builds Σ for initial data with `u0(r) <= C (1+r)^{-θ}` and `sup u0 = sup_norm`.
///
/// `θ' = θ` if `θ < γα2`, otherwise `θ' = γ(α1+α2)/2`; then `α = θ'/γ`.
/// `R >= 1` is the smallest radius meeting both lower bounds on `R` with a
/// 5% margin, `A = 1.5 (1+R^α) sup_norm^{1/γ}`, and `t0` is 99% of the time
/// at which the lateral boundary condition becomes an equality.
pub fn make_shrink_super(
    problem: ProblemParams,
    envelope_c: f64,
    theta: f64,
    sup_norm: f64,
) -> Result<ShrinkSuper, ClosedFormError> {
    require_single_point(&problem)?;
    let dc = derive_constants(&problem)?;
    let threshold = dc.decay_threshold.unwrap();
    if !(theta > threshold) {
        return Err(ClosedFormError::DecayTooSlow { theta, threshold });
    }
    if !(envelope_c > 0.0 && envelope_c.is_finite()) {
        return Err(invalid("C", envelope_c, "must be positive"));
    }
    if !(sup_norm > 0.0 && sup_norm.is_finite()) {
        return Err(invalid("sup_norm", sup_norm, "must be positive"));
    }
    let p = problem.p();
    let q = problem.q();
    let gamma = dc.gamma_sigma.unwrap();
    let (a1, a2) = (dc.alpha1.unwrap(), dc.alpha2.unwrap());
    let theta_prime = if theta < gamma * a2 {
        theta
    } else {
        gamma * 0.5 * (a1 + a2)
    };
    let alpha = theta_prime / gamma;
    let ag = alpha * gamma;
    let s = sup_norm.powf(1.0 / gamma);

    let thr1 = {
        let v = envelope_c.powf(1.0 / gamma) / (2f64.powf(alpha - 1.0) * s) - 1.0;
        if v > 0.0 {
            v.powf(1.0 / alpha)
        } else {
            0.0
        }
    };
    let k2 = 2.0 * (2.0 * (p - 1.0) * (1.0 + ag) * ag.powf(p - 1.0 - q)).powf(1.0 / (p - q));
    // R^{α+1} - k2 (1+R^α) s changes sign once on (0, inf).
    let f2 = |r: f64| r.powf(alpha + 1.0) - k2 * (1.0 + r.powf(alpha)) * s;
    let thr2 = {
        let mut lo = 0.0;
        let mut hi = 1.0;
        while f2(hi) <= 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f2(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        hi
    };
    let radius = (1.05 * thr1.max(thr2)).max(1.0);
    let ra = radius.powf(alpha);
    let amplitude = 1.5 * (1.0 + ra) * s;

    let cond1 = radius.powf((alpha + 1.0) * (p - q))
        / (2.0 * (1.0 + ag) * (p - 1.0) * ag.powf(p - 1.0 - q) * amplitude.powf(p - q));
    let cond2 = amplitude / (envelope_c.powf(1.0 / gamma) / 2f64.powf(alpha - 1.0));
    let cond3 = amplitude / ((1.0 + ra) * s);

    let mut sigma = ShrinkSuper::from_parts(problem, amplitude, alpha, radius, 1.0)?;
    let eta_star = amplitude / (1.0 + ra) - s;
    let e = 1.0 - sigma.beta_eta;
    let t_star = eta_star.powf(e) / (sigma.eta_coeff * e);
    sigma.t0 = 0.99 * t_star;
    sigma.t_star = t_star;
    sigma.envelope_c = envelope_c;
    sigma.envelope_theta = theta;
    sigma.theta_prime = theta_prime;
    sigma.sup_norm = sup_norm;
    sigma.cond_ratios = [cond1, cond2, cond3];
    Ok(sigma)
}

// ---------------------------------------------------------------------------
// Tail subsolution

/// `w(t, r) = (T-t)^{1/(1-q)} (a + b r^θ)^{-γ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSub {
    pub problem: ProblemParams,
    pub horizon: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub gamma: f64,
    pub b0: f64,
    pub a_min: f64,
    /// Value of the bounding bracket at `a` (negative for a subsolution).
    pub bracket: f64,
}

fn tail_bracket(problem: &ProblemParams, horizon: f64, b: f64, a: f64) -> f64 {
    let (n, p, q) = (problem.dim() as f64, problem.p(), problem.q());
    let theta = p / (p - 1.0);
    let gamma = q * (p - 1.0) / (p * (1.0 - q));
    (gamma * theta * b).powf(p - 1.0)
        * horizon.powf((p - 1.0 - q) / (1.0 - q))
        * a.powf((2.0 - p) * gamma - p + 1.0)
        * ((1.0 + gamma) * p + n - 1.0)
        - 1.0 / (2.0 * (1.0 - q))
}

/// Smallest offset `a` for which the bracket bounding `L w` is negative.
pub fn tail_sub_a_min(problem: &ProblemParams, horizon: f64, b: f64) -> f64 {
    bisect_decreasing(|a| tail_bracket(problem, horizon, b, a), 1e-14, 400)
}

pub fn make_tail_sub(
    problem: ProblemParams,
    horizon: f64,
    b: f64,
    a: f64,
) -> Result<TailSub, ClosedFormError> {
    require_single_point(&problem)?;
    let dc = derive_constants(&problem)?;
    let b0 = dc.b0.unwrap();
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("T", horizon, "must be positive"));
    }
    if !(b > 0.0 && b < b0) {
        return Err(invalid("b", b, format!("must lie in (0, b0) = (0, {b0})")));
    }
    let a_min = tail_sub_a_min(&problem, horizon, b);
    if !(a > a_min && a.is_finite()) {
        return Err(invalid("a", a, format!("must exceed a_min = {a_min}")));
    }
    Ok(TailSub {
        problem,
        horizon,
        a,
        b,
        theta: dc.theta_w.unwrap(),
        gamma: dc.gamma_w.unwrap(),
        b0,
        a_min,
        bracket: tail_bracket(&problem, horizon, b, a),
    })
}

impl TailSub {
    fn parts(&self, t: f64, r: f64) -> Option<(f64, f64)> {
        let s = self.horizon - t;
        if s <= 0.0 {
            return None;
        }
        Some((s, self.a + self.b * r.powf(self.theta)))
    }
}

impl RadialProfile for TailSub {
    fn problem(&self) -> &ProblemParams {
        &self.problem
    }
    fn value(&self, t: f64, r: f64) -> f64 {
        let q = self.problem.q();
        self.parts(t, r)
            .map_or(0.0, |(s, y)| s.powf(1.0 / (1.0 - q)) * y.powf(-self.gamma))
    }
    fn d_r(&self, t: f64, r: f64) -> f64 {
        let q = self.problem.q();
        let (g, th, b) = (self.gamma, self.theta, self.b);
        self.parts(t, r).map_or(0.0, |(s, y)| {
            -g * th * b * s.powf(1.0 / (1.0 - q)) * r.powf(th - 1.0) * y.powf(-g - 1.0)
        })
    }
    fn d_rr(&self, t: f64, r: f64) -> f64 {
        let q = self.problem.q();
        let (g, th, b) = (self.gamma, self.theta, self.b);
        self.parts(t, r).map_or(0.0, |(s, y)| {
            -g * th
                * b
                * s.powf(1.0 / (1.0 - q))
                * y.powf(-g - 2.0)
                * r.powf(th - 2.0)
                * ((th - 1.0) * y - (1.0 + g) * th * b * r.powf(th))
        })
    }
    fn d_t(&self, t: f64, r: f64) -> f64 {
        let q = self.problem.q();
        self.parts(t, r).map_or(0.0, |(s, y)| {
            -s.powf(q / (1.0 - q)) * y.powf(-self.gamma) / (1.0 - q)
        })
    }
    fn time_domain(&self) -> (f64, f64) {
        (0.0, self.horizon)
    }
}

// ---------------------------------------------------------------------------
// Self-similar supersolution

/// The four certificate values that must be nonnegative for `W` to be a
/// supersolution, evaluated at a given amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfSimCertificates {
    pub amplitude: f64,
    pub y0: f64,
    /// Quadratic-in-y term.
    pub interm12: f64,
    /// Inner range `y <= y0`.
    pub interm13: f64,
    /// Outer range `y >= y0`, constant part.
    pub interm14a: f64,
    /// Outer range `y >= y0`, power part.
    pub interm14b: f64,
}

impl SelfSimCertificates {
    pub fn evaluate(problem: &ProblemParams, amplitude: f64) -> Self {
        let (p, q) = (problem.p(), problem.q());
        let alpha = (p - q) / (p - 2.0 * q);
        let beta = (q - p + 1.0) / (p - 2.0 * q);
        let g = q / (2.0 * (1.0 - q));
        let y0 = (4.0 * (g + 1.0)).powf(-0.5);
        let a = amplitude;
        let tg = 2.0 * g;
        Self {
            amplitude,
            y0,
            interm12: tg.powf(q) / 2.0 * a.powf(q - 1.0) - (alpha - 2.0 * beta * g),
            interm13: (p - 1.0) * tg.powf(p - 1.0) / (2.0 * y0.powf(2.0 - p)) * a.powf(p - 2.0)
                - alpha,
            interm14a: tg.powf(q) / 4.0 * y0 * y0 * a.powf(q - 1.0) - alpha,
            interm14b: tg.powf(q - p + 1.0) / 4.0
                * y0.powf((p - 2.0 * q) / (1.0 - q))
                * a.powf(q - p + 1.0)
                - 2.0
                    * (p - 1.0)
                    * (g + 1.0)
                    * ((1.0 + y0 * y0) / (y0 * y0)).powf((2.0 - p) * (g + 1.0)),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.interm12, self.interm13, self.interm14a, self.interm14b]
    }

    pub fn min(&self) -> f64 {
        self.as_array().into_iter().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A0Search {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for A0Search {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            max_iter: 400,
        }
    }
}

/// Largest amplitude at which all four certificates are nonnegative.
/// Returns the certificates evaluated there.
pub fn find_a0(
    problem: &ProblemParams,
    search: A0Search,
) -> Result<SelfSimCertificates, ClosedFormError> {
    if problem.p() >= 2.0 {
        return Err(ClosedFormError::NotApplicable(
            "the self-similar supersolution needs p < 2".into(),
        ));
    }
    require_single_point(problem)?;
    let a0 = bisect_decreasing(
        |a| SelfSimCertificates::evaluate(problem, a).min(),
        search.rel_tol,
        search.max_iter,
    );
    Ok(SelfSimCertificates::evaluate(problem, a0))
}

/// `W(t, r) = (T-t)^α f(r (T-t)^β)`, `f(y) = A (1+y^2)^{-γ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfSimSuper {
    pub problem: ProblemParams,
    pub horizon: f64,
    pub amplitude: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a0_emp: f64,
    pub certificates: SelfSimCertificates,
}

pub fn make_self_sim_super(
    problem: ProblemParams,
    horizon: f64,
    amplitude: f64,
) -> Result<SelfSimSuper, ClosedFormError> {
    let a0 = find_a0(&problem, A0Search::default())?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("T", horizon, "must be positive"));
    }
    if !(amplitude > 0.0 && amplitude <= a0.amplitude) {
        return Err(invalid(
            "A",
            amplitude,
            format!("must lie in (0, A0] with A0 = {}", a0.amplitude),
        ));
    }
    let (p, q) = (problem.p(), problem.q());
    Ok(SelfSimSuper {
        problem,
        horizon,
        amplitude,
        alpha: (p - q) / (p - 2.0 * q),
        beta: (q - p + 1.0) / (p - 2.0 * q),
        gamma: q / (2.0 * (1.0 - q)),
        a0_emp: a0.amplitude,
        certificates: SelfSimCertificates::evaluate(&problem, amplitude),
    })
}

impl SelfSimSuper {
    fn f(&self, y: f64) -> f64 {
        self.amplitude * (1.0 + y * y).powf(-self.gamma)
    }
    fn f_y(&self, y: f64) -> f64 {
        -2.0 * self.amplitude * self.gamma * y * (1.0 + y * y).powf(-self.gamma - 1.0)
    }
    fn f_yy(&self, y: f64) -> f64 {
        let y2 = y * y;
        -2.0 * self.amplitude
            * self.gamma
            * (1.0 + y2).powf(-self.gamma - 1.0)
            * (1.0 - 2.0 * (self.gamma + 1.0) * y2 / (1.0 + y2))
    }
    fn s(&self, t: f64) -> Option<f64> {
        let s = self.horizon - t;
        (s > 0.0).then_some(s)
    }
}

impl RadialProfile for SelfSimSuper {
    fn problem(&self) -> &ProblemParams {
        &self.problem
    }
    fn value(&self, t: f64, r: f64) -> f64 {
        self.s(t)
            .map_or(0.0, |s| s.powf(self.alpha) * self.f(r * s.powf(self.beta)))
    }
    fn d_r(&self, t: f64, r: f64) -> f64 {
        self.s(t).map_or(0.0, |s| {
            s.powf(self.alpha + self.beta) * self.f_y(r * s.powf(self.beta))
        })
    }
    fn d_rr(&self, t: f64, r: f64) -> f64 {
        self.s(t).map_or(0.0, |s| {
            s.powf(self.alpha + 2.0 * self.beta) * self.f_yy(r * s.powf(self.beta))
        })
    }
    fn d_t(&self, t: f64, r: f64) -> f64 {
        self.s(t).map_or(0.0, |s| {
            let y = r * s.powf(self.beta);
            -s.powf(self.alpha - 1.0) * (self.alpha * self.f(y) + self.beta * y * self.f_y(y))
        })
    }
    fn time_domain(&self) -> (f64, f64) {
        (0.0, self.horizon)
    }
}
