//! Problem parameters `(N, p, q)`, regime classification and the closed-form
//! exponents and constants attached to each regime.
//!
//! Every constant is evaluated in binary64 straight from its defining formula.
//! Constants that only make sense in part of the parameter space are stored as
//! `None` there, and [`DerivedConstants::require`] turns a missing value into a
//! [`ExponentError::RegimeMismatch`].

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("spatial dimension must be an integer >= 1, got {0}")]
    NonIntegerDimension(f64),
    #[error("{name} = {value} is outside the admissible range {admissible}")]
    ExponentOutOfRange {
        name: &'static str,
        value: f64,
        admissible: String,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error("constant `{constant}` is undefined in regime {regime}")]
    RegimeMismatch {
        constant: &'static str,
        regime: Regime,
    },
}

/// Validated `(N, p, q)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    #[serde(rename = "N")]
    dim: u32,
    p: f64,
    q: f64,
}

impl ProblemParams {
    /// Full validation: `N >= 1`, `p_c < p <= 2`, `q > 0`.
    pub fn new(dim: u32, p: f64, q: f64) -> Result<Self, ParamError> {
        validate_params(dim as f64, p, q)
    }

    /// Only the base constraints `N >= 1`, `1 < p <= 2`, `q > 0`. Triples built
    /// this way may classify as [`Regime::OutOfScope`].
    pub fn relaxed(dim: u32, p: f64, q: f64) -> Result<Self, ParamError> {
        check_base(dim as f64, p, q)?;
        Ok(Self { dim, p, q })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Critical diffusion exponent `2N/(N+1)`.
    pub fn p_c(&self) -> f64 {
        critical_p(self.dim)
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self)
    }
}

impl fmt::Display for ProblemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(N={}, p={}, q={})", self.dim, self.p, self.q)
    }
}

fn critical_p(dim: u32) -> f64 {
    let n = dim as f64;
    2.0 * n / (n + 1.0)
}

fn check_base(dim: f64, p: f64, q: f64) -> Result<(), ParamError> {
    if !dim.is_finite() || dim.fract() != 0.0 || dim < 1.0 || dim > u32::MAX as f64 {
        return Err(ParamError::NonIntegerDimension(dim));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(ParamError::ExponentOutOfRange {
            name: "p",
            value: p,
            admissible: "(1, 2]".into(),
        });
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(ParamError::ExponentOutOfRange {
            name: "q",
            value: q,
            admissible: "(0, inf)".into(),
        });
    }
    Ok(())
}

/// Validates a raw triple. The dimension arrives as a float so that
/// non-integer input can be reported rather than truncated.
pub fn validate_params(dim: f64, p: f64, q: f64) -> Result<ProblemParams, ParamError> {
    check_base(dim, p, q)?;
    let dim = dim as u32;
    let pc = critical_p(dim);
    if p <= pc {
        return Err(ParamError::ExponentOutOfRange {
            name: "p",
            value: p,
            admissible: format!("(p_c, 2] with p_c = 2N/(N+1) = {pc}"),
        });
    }
    Ok(ProblemParams { dim, p, q })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `0 < q < p-1`, `p_c < p <= 2`: instantaneous shrinking, localization,
    /// single point extinction.
    SinglePointRange,
    /// `p-1 <= q < p/2`, `p_c < p < 2`: positivity everywhere until extinction.
    CompleteExtinctionRange,
    /// `q >= p/2`.
    NoFiniteExtinction,
    /// `p <= p_c`.
    OutOfScope,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::SinglePointRange => "SinglePointRange",
            Regime::CompleteExtinctionRange => "CompleteExtinctionRange",
            Regime::NoFiniteExtinction => "NoFiniteExtinction",
            Regime::OutOfScope => "OutOfScope",
        };
        f.write_str(s)
    }
}

pub fn classify_regime(params: &ProblemParams) -> Regime {
    let (p, q) = (params.p, params.q);
    if p <= params.p_c() {
        Regime::OutOfScope
    } else if q < p - 1.0 {
        Regime::SinglePointRange
    } else if q < p / 2.0 {
        // p = 2 makes [p-1, p/2) empty, so this branch implies p < 2.
        Regime::CompleteExtinctionRange
    } else {
        Regime::NoFiniteExtinction
    }
}

/// Names of the derived constants, used for regime-checked access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    PC,
    Kappa,
    Omega,
    Sigma,
    Nu,
    AlphaSs,
    BetaSs,
    GammaSigma,
    Alpha1,
    Alpha2,
    ThetaW,
    GammaW,
    B0,
    GammaSelfSim,
    DecayThreshold,
    RateLower,
    RateUpperP2,
    LambdaJ,
    BetaJ,
}

impl Constant {
    pub fn name(self) -> &'static str {
        match self {
            Constant::PC => "p_c",
            Constant::Kappa => "kappa",
            Constant::Omega => "omega",
            Constant::Sigma => "sigma",
            Constant::Nu => "nu",
            Constant::AlphaSs => "alpha_ss",
            Constant::BetaSs => "beta_ss",
            Constant::GammaSigma => "gamma_sigma",
            Constant::Alpha1 => "alpha1",
            Constant::Alpha2 => "alpha2",
            Constant::ThetaW => "theta_w",
            Constant::GammaW => "gamma_w",
            Constant::B0 => "b0",
            Constant::GammaSelfSim => "gamma_selfsim",
            Constant::DecayThreshold => "decay_threshold",
            Constant::RateLower => "rate_lower",
            Constant::RateUpperP2 => "rate_upper_p2",
            Constant::LambdaJ => "lambda_j",
            Constant::BetaJ => "beta_j",
        }
    }
}

/// Closed-form constants of a parameter triple.
///
/// * `kappa`, `omega`: amplitude and exponent of the stationary barrier `kappa r^omega`.
/// * `sigma`, `nu`: exponents bounding the positivity set near extinction.
/// * `alpha_ss`, `beta_ss`: self-similar exponents.
/// * `gamma_sigma`, `alpha1`, `alpha2`: the shrinking supersolution `Σ`.
/// * `theta_w`, `gamma_w`, `b0`: the tail subsolution `w`.
/// * `gamma_selfsim`: profile exponent of the self-similar supersolution `W`.
/// * `lambda_j`, `beta_j`: weights of the gradient functional `J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub regime: Regime,
    pub p_c: f64,
    pub kappa: Option<f64>,
    pub omega: Option<f64>,
    pub sigma: Option<f64>,
    pub nu: Option<f64>,
    pub alpha_ss: Option<f64>,
    pub beta_ss: Option<f64>,
    pub gamma_sigma: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub theta_w: Option<f64>,
    pub gamma_w: Option<f64>,
    pub b0: Option<f64>,
    pub gamma_selfsim: Option<f64>,
    pub decay_threshold: Option<f64>,
    pub rate_lower: Option<f64>,
    pub rate_upper_p2: Option<f64>,
    pub lambda_j: Option<f64>,
    pub beta_j: Option<f64>,
}

impl DerivedConstants {
    pub fn get(&self, c: Constant) -> Option<f64> {
        match c {
            Constant::PC => Some(self.p_c),
            Constant::Kappa => self.kappa,
            Constant::Omega => self.omega,
            Constant::Sigma => self.sigma,
            Constant::Nu => self.nu,
            Constant::AlphaSs => self.alpha_ss,
            Constant::BetaSs => self.beta_ss,
            Constant::GammaSigma => self.gamma_sigma,
            Constant::Alpha1 => self.alpha1,
            Constant::Alpha2 => self.alpha2,
            Constant::ThetaW => self.theta_w,
            Constant::GammaW => self.gamma_w,
            Constant::B0 => self.b0,
            Constant::GammaSelfSim => self.gamma_selfsim,
            Constant::DecayThreshold => self.decay_threshold,
            Constant::RateLower => self.rate_lower,
            Constant::RateUpperP2 => self.rate_upper_p2,
            Constant::LambdaJ => self.lambda_j,
            Constant::BetaJ => self.beta_j,
        }
    }

    pub fn require(&self, c: Constant) -> Result<f64, ExponentError> {
        self.get(c).ok_or(ExponentError::RegimeMismatch {
            constant: c.name(),
            regime: self.regime,
        })
    }
}

/// Barrier amplitude `kappa_{p,q}` and exponent `omega`.
pub fn barrier_constants(params: &ProblemParams) -> Option<(f64, f64)> {
    let (n, p, q) = (params.dim as f64, params.p, params.q);
    let d = p - 1.0 - q;
    if d <= 0.0 {
        return None;
    }
    let kappa = d / (p - q) * ((p - 1.0) / d + n - 1.0).powf(-1.0 / d);
    Some((kappa, (p - q) / d))
}

/// `alpha_2 = min{q/(gamma(1-q) - 1), 1}`; a nonpositive denominator makes
/// the first branch vacuous.
fn alpha2(q: f64, gamma: f64) -> f64 {
    let den = gamma * (1.0 - q) - 1.0;
    if den <= 0.0 {
        1.0
    } else {
        (q / den).min(1.0)
    }
}

pub fn derive_constants(params: &ProblemParams) -> Result<DerivedConstants, ExponentError> {
    let regime = classify_regime(params);
    let (n, p, q) = (params.dim as f64, params.p, params.q);
    let mut dc = DerivedConstants {
        regime,
        p_c: params.p_c(),
        kappa: None,
        omega: None,
        sigma: None,
        nu: None,
        alpha_ss: None,
        beta_ss: None,
        gamma_sigma: None,
        alpha1: None,
        alpha2: None,
        theta_w: None,
        gamma_w: None,
        b0: None,
        gamma_selfsim: None,
        decay_threshold: None,
        rate_lower: None,
        rate_upper_p2: None,
        lambda_j: None,
        beta_j: None,
    };
    match regime {
        Regime::NoFiniteExtinction | Regime::OutOfScope => {
            return Err(ExponentError::RegimeMismatch {
                constant: "set",
                regime,
            })
        }
        Regime::SinglePointRange | Regime::CompleteExtinctionRange => {}
    }

    // Quantities defined on the whole extinction range 0 < q < p/2.
    dc.alpha_ss = Some((p - q) / (p - 2.0 * q));
    dc.beta_ss = Some((q - p + 1.0) / (p - 2.0 * q));
    dc.gamma_selfsim = Some(q / (2.0 * (1.0 - q)));
    dc.decay_threshold = Some(q / (1.0 - q));
    dc.rate_lower = Some(1.0 / (1.0 - q));
    if p == 2.0 {
        dc.rate_upper_p2 = Some((2.0 - q) / (2.0 - 2.0 * q));
    }

    if regime == Regime::SinglePointRange {
        let d = p - 1.0 - q;
        let (kappa, omega) = barrier_constants(params).expect("q < p - 1");
        dc.kappa = Some(kappa);
        dc.omega = Some(omega);
        dc.sigma = Some(d / ((p - q) * (1.0 - q)));
        dc.nu = Some(p * d * d / (2.0 * (p - q) * (p - 2.0 * q)));

        let gamma = (p - q) / d;
        dc.gamma_sigma = Some(gamma);
        dc.alpha1 = Some(q / (gamma * (1.0 - q)));
        dc.alpha2 = Some(alpha2(q, gamma));

        let theta = p / (p - 1.0);
        let gamma_w = q * (p - 1.0) / (p * (1.0 - q));
        dc.theta_w = Some(theta);
        dc.gamma_w = Some(gamma_w);
        dc.b0 = Some((2.0 * (1.0 - q) * (gamma_w * theta).powf(q)).powf(-theta / q));

        dc.lambda_j = Some(n + q / d);
        dc.beta_j = Some((p - 1.0) / (p - q));
    }
    Ok(dc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn validate_examples() {
        let pp = validate_params(1.0, 2.0, 0.5).unwrap();
        assert_eq!(pp.p_c(), 1.0);

        match validate_params(2.0, 1.2, 0.1) {
            Err(ParamError::ExponentOutOfRange { name, admissible, .. }) => {
                assert_eq!(name, "p");
                assert!(admissible.contains("1.3333"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match validate_params(1.0, 2.0, 0.0) {
            Err(ParamError::ExponentOutOfRange { name, .. }) => assert_eq!(name, "q"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            validate_params(1.5, 2.0, 0.5),
            Err(ParamError::NonIntegerDimension(_))
        ));
        assert!(matches!(
            validate_params(0.0, 2.0, 0.5),
            Err(ParamError::NonIntegerDimension(_))
        ));
        assert!(validate_params(1.0, 2.1, 0.5).is_err());
    }

    #[test]
    fn classify_examples() {
        let r = |n, p, q| classify_regime(&ProblemParams::new(n, p, q).unwrap());
        assert_eq!(r(1, 2.0, 0.5), Regime::SinglePointRange);
        assert_eq!(r(2, 1.8, 0.85), Regime::CompleteExtinctionRange);
        assert_eq!(r(2, 1.8, 0.95), Regime::NoFiniteExtinction);
        assert_eq!(r(2, 1.8, 0.8), Regime::CompleteExtinctionRange);
        assert_eq!(r(1, 2.0, 1.0), Regime::NoFiniteExtinction);
        let low = ProblemParams::relaxed(2, 1.2, 0.1).unwrap();
        assert_eq!(classify_regime(&low), Regime::OutOfScope);
    }

    #[test]
    fn constants_n1_p2_q05() {
        let dc = derive_constants(&ProblemParams::new(1, 2.0, 0.5).unwrap()).unwrap();
        let expect = [
            (Constant::Kappa, 1.0 / 12.0),
            (Constant::Omega, 3.0),
            (Constant::Sigma, 2.0 / 3.0),
            (Constant::Nu, 1.0 / 6.0),
            (Constant::AlphaSs, 1.5),
            (Constant::BetaSs, -0.5),
            (Constant::Alpha1, 1.0 / 3.0),
            (Constant::Alpha2, 1.0),
            (Constant::ThetaW, 2.0),
            (Constant::GammaW, 0.5),
            (Constant::B0, 1.0),
            (Constant::DecayThreshold, 1.0),
            (Constant::RateLower, 2.0),
            (Constant::RateUpperP2, 1.5),
            (Constant::LambdaJ, 2.0),
            (Constant::BetaJ, 2.0 / 3.0),
            (Constant::GammaSigma, 3.0),
        ];
        for (c, v) in expect {
            let got = dc.require(c).unwrap();
            assert!(close(got, v, 1e-14), "{}: {got} vs {v}", c.name());
        }
        assert_eq!(dc.omega, dc.gamma_sigma);
    }

    #[test]
    fn constants_n2_p18_q06() {
        let dc = derive_constants(&ProblemParams::new(2, 1.8, 0.6).unwrap()).unwrap();
        let kappa = dc.kappa.unwrap();
        assert!(close(kappa, 5f64.powi(-5) / 6.0, 1e-13));
        assert!((kappa - 5.3333e-5).abs() < 1e-9);
        assert!(close(dc.omega.unwrap(), 6.0, 1e-13));
        assert!(close(dc.sigma.unwrap(), 5.0 / 12.0, 1e-13));
        assert!(close(dc.nu.unwrap(), 0.05, 1e-13));
        assert!(close(dc.alpha_ss.unwrap(), 2.0, 1e-13));
        assert!(close(dc.beta_ss.unwrap(), -1.0 / 3.0, 1e-13));
        assert!(close(dc.decay_threshold.unwrap(), 1.5, 1e-13));
        assert!(close(dc.rate_lower.unwrap(), 2.5, 1e-13));
        assert!(dc.rate_upper_p2.is_none());
    }

    #[test]
    fn complete_extinction_has_no_barrier() {
        let dc = derive_constants(&ProblemParams::new(2, 1.8, 0.85).unwrap()).unwrap();
        assert_eq!(dc.regime, Regime::CompleteExtinctionRange);
        assert!(dc.alpha_ss.is_some());
        match dc.require(Constant::Kappa) {
            Err(ExponentError::RegimeMismatch { constant, regime }) => {
                assert_eq!(constant, "kappa");
                assert_eq!(regime, Regime::CompleteExtinctionRange);
            }
            other => panic!("unexpected {other:?}"),
        }
        let none = ProblemParams::new(2, 1.8, 0.95).unwrap();
        assert!(derive_constants(&none).is_err());
    }

    #[test]
    fn alpha2_vacuous_branch() {
        // gamma(1-q) <= 1 makes the first branch of the min vacuous.
        assert_eq!(alpha2(0.5, 2.0), 1.0);
        assert_eq!(alpha2(0.5, 3.0), 1.0);
        assert!((alpha2(0.2, 3.0) - 0.2 / 1.4).abs() < 1e-15);
    }
}
