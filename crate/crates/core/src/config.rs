//! JSON experiment configuration. Every optional field has a default that is
//! written back out by `Resolved::config`, so a resolved file reproduces the run.

use crate::analysis::FitWindow;
use crate::closedform::{
    find_a0, make_self_sim_super, make_shrink_super, make_tail_sub, tail_sub_a_min, A0Search,
    Barrier, CertBox, ComparisonProfile, Sampler, Sense,
};
use crate::exponents::{derive_constants, ProblemParams};
use crate::gridop::{OuterBoundary, RadialGrid};
use crate::solver::{make_initial_condition, IcKind, InitialCondition, Scheme, SolverConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: cannot read: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config error at `{key}` (line {line}, column {column}): {message}")]
    Parse {
        key: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid(e: impl ToString) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

/// Deserializes `text`, reporting the dotted key path of the first error.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            key,
            line: inner.line(),
            column: inner.column(),
            message: strip_position(&inner.to_string()),
        }
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(k) => msg[..k].to_string(),
        None => msg.to_string(),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_json(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    pub q: f64,
}

impl ProblemSection {
    pub fn params(&self) -> Result<ProblemParams, ConfigError> {
        ProblemParams::new(self.n, self.p, self.q).map_err(invalid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub r_max: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

/// Solver overrides; anything left out takes the data-scaled default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub safety: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub snapshot_dt: Option<f64>,
    #[serde(default)]
    pub series_stride: Option<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub gamma_reg: Option<f64>,
    #[serde(default)]
    pub counterterm: Option<bool>,
    #[serde(default)]
    pub tol_ext: Option<f64>,
    #[serde(default)]
    pub tol_pos: Option<f64>,
    #[serde(default)]
    pub lift: Option<f64>,
    #[serde(default)]
    pub dt_max: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub outer: Option<OuterBoundary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Rate,
    Support,
    Gradient,
    JDiagnostic,
    Localization,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub fit_window: Option<FitWindow>,
    /// Radius of the initial support, for the J-diagnostic and localization.
    #[serde(default)]
    pub r0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    /// Write every k-th stored snapshot (0 writes none).
    #[serde(default = "one")]
    pub snapshot_every: usize,
}

fn one() -> usize {
    1
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            snapshot_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub ic: IcKind,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
}

/// A configuration with every default filled in, plus the objects it builds.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub params: ProblemParams,
    pub grid: RadialGrid,
    pub ic: InitialCondition,
    pub cfg: SolverConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        parse_json(text)
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let params = self.problem.params()?;
        let grid = RadialGrid::new(params.dim(), self.grid.r_max, self.grid.m).map_err(invalid)?;
        let ic = make_initial_condition(&self.ic, &grid, &params).map_err(invalid)?;
        let s = &self.solver;
        let t_end = s.t_end.unwrap_or(1.0);
        let mut cfg = SolverConfig::recommended(&params, &grid, &ic.field, t_end);
        if let Some(eps) = s.eps {
            cfg.reg.eps = eps;
            // Thresholds follow ε unless given.
            let tol = crate::solver::default_tolerance(&params, &grid, &ic.field, eps);
            cfg.tol_ext = tol;
            cfg.tol_pos = tol;
        }
        macro_rules! set {
            ($($field:ident).+ = $v:expr) => {
                if let Some(v) = $v {
                    cfg.$($field).+ = v;
                }
            };
        }
        set!(scheme = s.scheme);
        set!(safety = s.safety);
        set!(snapshot_dt = s.snapshot_dt);
        set!(series_stride = s.series_stride);
        set!(reg.gamma_reg = s.gamma_reg);
        set!(reg.counterterm = s.counterterm);
        set!(tol_ext = s.tol_ext);
        set!(tol_pos = s.tol_pos);
        set!(lift = s.lift);
        set!(dt_max = s.dt_max);
        set!(max_steps = s.max_steps);
        set!(outer = s.outer);
        cfg.validate(&params, ic.sup_norm).map_err(invalid)?;

        let mut config = self.clone();
        config.solver = SolverSection {
            scheme: Some(cfg.scheme),
            safety: Some(cfg.safety),
            t_end: Some(cfg.t_end),
            snapshot_dt: Some(cfg.snapshot_dt),
            series_stride: Some(cfg.series_stride),
            eps: Some(cfg.reg.eps),
            gamma_reg: Some(cfg.reg.gamma_reg),
            counterterm: Some(cfg.reg.counterterm),
            tol_ext: Some(cfg.tol_ext),
            tol_pos: Some(cfg.tol_pos),
            lift: Some(cfg.lift),
            dt_max: Some(cfg.dt_max),
            max_steps: Some(cfg.max_steps),
            outer: Some(cfg.outer),
        };
        if config.analysis.r0.is_none() {
            if let IcKind::Bump { r0, .. } = self.ic {
                config.analysis.r0 = Some(r0);
            }
        }
        Ok(Resolved {
            config,
            params,
            grid,
            ic,
            cfg,
        })
    }
}

/// Comparison function selected in a residual configuration. Omitted
/// parameters take the values used by the verification battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum ProfileSpec {
    Barrier {
        #[serde(default)]
        center: f64,
    },
    ShrinkSuper {
        envelope_c: f64,
        theta: f64,
        sup_norm: f64,
        /// Use the deliberately wrong `η` law (for negative controls).
        #[serde(default)]
        inverted: bool,
    },
    TailSub {
        horizon: f64,
        #[serde(default)]
        b: Option<f64>,
        #[serde(default)]
        a: Option<f64>,
    },
    SelfSimSuper {
        horizon: f64,
        #[serde(default)]
        amplitude: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualConfig {
    pub problem: ProblemSection,
    pub profile: ProfileSpec,
    #[serde(rename = "box")]
    pub cert_box: CertBox,
    /// Defaults to `ge0` for supersolutions and `le0` for the subsolution.
    #[serde(default)]
    pub sense: Option<Sense>,
    #[serde(default)]
    pub sampler: Option<Sampler>,
}

impl ResidualConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        parse_json(text)
    }

    pub fn build(&self) -> Result<(ComparisonProfile, Sense, Sampler), ConfigError> {
        let pp = self.problem.params()?;
        let profile: ComparisonProfile = match self.profile {
            ProfileSpec::Barrier { center } => Barrier::new(pp, center).map_err(invalid)?.into(),
            ProfileSpec::ShrinkSuper {
                envelope_c,
                theta,
                sup_norm,
                inverted,
            } => {
                let s = make_shrink_super(pp, envelope_c, theta, sup_norm).map_err(invalid)?;
                if inverted {
                    s.inverted_eta_law().into()
                } else {
                    s.into()
                }
            }
            ProfileSpec::TailSub { horizon, b, a } => {
                let b0 = derive_constants(&pp).map_err(invalid)?.b0.ok_or_else(|| invalid("b0 undefined"))?;
                let b = b.unwrap_or(0.5 * b0);
                let a = match a {
                    Some(a) => a,
                    None => 2.0 * tail_sub_a_min(&pp, horizon, b),
                };
                make_tail_sub(pp, horizon, b, a).map_err(invalid)?.into()
            }
            ProfileSpec::SelfSimSuper { horizon, amplitude } => {
                let amp = match amplitude {
                    Some(a) => a,
                    None => 0.5 * find_a0(&pp, A0Search::default()).map_err(invalid)?.amplitude,
                };
                make_self_sim_super(pp, horizon, amp).map_err(invalid)?.into()
            }
        };
        let sense = self.sense.unwrap_or(match profile {
            ComparisonProfile::TailSub(_) => Sense::NonPositive,
            _ => Sense::NonNegative,
        });
        Ok((profile, sense, self.sampler.unwrap_or_default()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUMP: &str = r#"{
        "problem": {"N": 1, "p": 2.0, "q": 0.5},
        "ic": {"kind": "Bump", "m": 0.010416666666666666, "r0": 1.0},
        "grid": {"r_max": 4.0, "M": 256},
        "solver": {"t_end": 0.2}
    }"#;

    #[test]
    fn resolves_and_round_trips() {
        let c = ExperimentConfig::from_json(BUMP).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.cfg.t_end, 0.2);
        assert_eq!(r.config.analysis.r0, Some(1.0));
        let text = serde_json::to_string_pretty(&r.config).unwrap();
        let again = ExperimentConfig::from_json(&text).unwrap().resolve().unwrap();
        assert_eq!(again.cfg, r.cfg);
        assert_eq!(again.config, r.config);
    }

    #[test]
    fn string_for_m_names_the_key() {
        let bad = BUMP.replace("\"M\": 256", "\"M\": \"256\"");
        match ExperimentConfig::from_json(&bad) {
            Err(ConfigError::Parse { key, line, .. }) => {
                assert_eq!(key, "grid.M");
                assert_eq!(line, 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = BUMP.replace("\"r_max\"", "\"rmax\": 1, \"r_max\"");
        assert!(matches!(
            ExperimentConfig::from_json(&bad),
            Err(ConfigError::Parse { .. })
        ));
        let bad = BUMP.replace("\"t_end\": 0.2", "\"t_end\": 0.2, \"dt\": 1");
        match ExperimentConfig::from_json(&bad) {
            Err(ConfigError::Parse { key, .. }) => assert_eq!(key, "solver.dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn residual_config_defaults() {
        let text = r#"{
            "problem": {"N": 1, "p": 2.0, "q": 0.5},
            "profile": {"family": "TailSub", "horizon": 1.0},
            "box": {"t": [0.0, 0.99], "r": [0.01, 10.0]}
        }"#;
        let (profile, sense, sampler) = ResidualConfig::from_json(text).unwrap().build().unwrap();
        assert_eq!(sense, Sense::NonPositive);
        assert_eq!(sampler, Sampler::default());
        match profile {
            ComparisonProfile::TailSub(w) => {
                assert_eq!(w.b, 0.5 * w.b0);
                assert!((w.a - 3.0).abs() < 1e-9);
            }
            _ => panic!(),
        }
    }
}
