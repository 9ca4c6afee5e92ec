use super::{radial_operator_terms, ComparisonProfile, OperatorError, RadialProfile};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    /// Supersolution: `L z >= 0`.
    #[serde(rename = "ge0")]
    NonNegative,
    /// Subsolution: `L z <= 0`.
    #[serde(rename = "le0")]
    NonPositive,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::NonNegative => 1.0,
            Sense::NonPositive => -1.0,
        }
    }
}

/// Open box `(t_lo, t_hi) x (r_lo, r_hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertBox {
    pub t: [f64; 2],
    pub r: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampler {
    pub n_t: usize,
    pub n_r: usize,
    /// Geometric spacing in r instead of uniform.
    pub log_r: bool,
    /// Accepted relative margin below zero.
    pub tol_sign: f64,
}

impl Default for Sampler {
    fn default() -> Self {
        Self {
            n_t: 64,
            n_r: 256,
            log_r: true,
            tol_sign: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstPoint {
    pub t: f64,
    pub r: f64,
    /// `L z` at the point.
    pub value: f64,
    /// Sum of magnitudes of the operator terms at the point.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub family: String,
    pub params: serde_json::Value,
    #[serde(rename = "box")]
    pub cert_box: CertBox,
    pub sense: Sense,
    pub n_samples: usize,
    pub n_excluded: usize,
    pub min_value: f64,
    pub max_value: f64,
    /// Smallest of `sense * L z / scale` over the samples.
    pub min_margin: f64,
    pub worst_point: Option<WorstPoint>,
    pub tol_sign: f64,
    pub pass: bool,
}

fn grid(lo: f64, hi: f64, n: usize, geometric: bool) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let s = k as f64 / (n + 1) as f64;
            if geometric && lo > 0.0 {
                lo * (hi / lo).powf(s)
            } else {
                lo + (hi - lo) * s
            }
        })
        .collect()
}

/// Samples `L z` on an interior tensor grid of `bx` and checks its sign.
pub fn certify_sign(
    profile: &ComparisonProfile,
    bx: CertBox,
    sense: Sense,
    sampler: Sampler,
) -> Result<CertReport, OperatorError> {
    let ts = grid(bx.t[0], bx.t[1], sampler.n_t.max(1), false);
    let rs = grid(bx.r[0], bx.r[1], sampler.n_r.max(1), sampler.log_r);
    let sign = sense.sign();

    #[derive(Clone, Copy)]
    struct Acc {
        n: usize,
        excluded: usize,
        min_v: f64,
        max_v: f64,
        worst: Option<(f64, WorstPoint)>,
    }
    let empty = Acc {
        n: 0,
        excluded: 0,
        min_v: f64::INFINITY,
        max_v: f64::NEG_INFINITY,
        worst: None,
    };
    let merge = |a: Acc, b: Acc| Acc {
        n: a.n + b.n,
        excluded: a.excluded + b.excluded,
        min_v: a.min_v.min(b.min_v),
        max_v: a.max_v.max(b.max_v),
        worst: match (a.worst, b.worst) {
            (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        },
    };

    let rows: Result<Vec<Acc>, OperatorError> = ts
        .par_iter()
        .map(|&t| {
            let mut acc = empty;
            for &r in &rs {
                if profile.excluded(t, r) {
                    acc.excluded += 1;
                    continue;
                }
                let terms = radial_operator_terms(profile, t, r)?;
                let v = terms.total();
                let scale = terms.scale();
                let margin = if scale > 0.0 { sign * v / scale } else { 0.0 };
                acc.n += 1;
                acc.min_v = acc.min_v.min(v);
                acc.max_v = acc.max_v.max(v);
                if acc.worst.map_or(true, |(m, _)| margin < m) {
                    acc.worst = Some((
                        margin,
                        WorstPoint {
                            t,
                            r,
                            value: v,
                            scale,
                        },
                    ));
                }
            }
            Ok(acc)
        })
        .collect();
    let acc = rows?.into_iter().fold(empty, merge);
    let min_margin = acc.worst.map_or(f64::NAN, |(m, _)| m);
    Ok(CertReport {
        family: profile.family().to_string(),
        params: serde_json::to_value(profile).unwrap_or(serde_json::Value::Null),
        cert_box: bx,
        sense,
        n_samples: acc.n,
        n_excluded: acc.excluded,
        min_value: acc.min_v,
        max_value: acc.max_v,
        min_margin,
        worst_point: acc.worst.map(|(_, w)| w),
        tol_sign: sampler.tol_sign,
        pass: acc.n > 0 && min_margin >= -sampler.tol_sign,
    })
}
