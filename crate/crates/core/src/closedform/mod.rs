//! Closed-form comparison functions with analytic derivatives, the radial
//! operator evaluated on them, parameter selection and sign certification.

mod certify;
mod profiles;

pub use certify::{certify_sign, CertBox, CertReport, Sampler, Sense, WorstPoint};
pub use profiles::{
    find_a0, make_self_sim_super, make_shrink_super, make_tail_sub, tail_sub_a_min, A0Search,
    Barrier, ClosedFormError, SelfSimCertificates, SelfSimSuper, ShrinkSuper, TailSub,
};

use crate::exponents::ProblemParams;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("radial derivative vanishes at (t={t}, r={r}) with p < 2")]
    SingularPoint { t: f64, r: f64 },
    #[error("profile has a free-boundary kink at (t={t}, r={r})")]
    FreeBoundary { t: f64, r: f64 },
    #[error("operator needs r > 0, got {0}")]
    NonPositiveRadius(f64),
}

/// A radially symmetric function `z(t, r)` with exact derivatives.
pub trait RadialProfile {
    fn problem(&self) -> &ProblemParams;
    fn value(&self, t: f64, r: f64) -> f64;
    fn d_r(&self, t: f64, r: f64) -> f64;
    fn d_rr(&self, t: f64, r: f64) -> f64;
    fn d_t(&self, t: f64, r: f64) -> f64;

    /// True on a kink of a positive-part expression.
    fn at_kink(&self, _t: f64, _r: f64) -> bool {
        false
    }

    /// True where sign certification should skip the point.
    fn excluded(&self, _t: f64, _r: f64) -> bool {
        false
    }

    /// Closed time interval on which the profile is defined.
    fn time_domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// The four comparison families.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family")]
pub enum ComparisonProfile {
    Barrier(Barrier),
    ShrinkSuper(ShrinkSuper),
    TailSub(TailSub),
    SelfSimSuper(SelfSimSuper),
}

impl ComparisonProfile {
    pub fn family(&self) -> &'static str {
        match self {
            ComparisonProfile::Barrier(_) => "Barrier",
            ComparisonProfile::ShrinkSuper(_) => "ShrinkSuper",
            ComparisonProfile::TailSub(_) => "TailSub",
            ComparisonProfile::SelfSimSuper(_) => "SelfSimSuper",
        }
    }

    fn inner(&self) -> &dyn RadialProfile {
        match self {
            ComparisonProfile::Barrier(b) => b,
            ComparisonProfile::ShrinkSuper(s) => s,
            ComparisonProfile::TailSub(w) => w,
            ComparisonProfile::SelfSimSuper(w) => w,
        }
    }
}

impl RadialProfile for ComparisonProfile {
    fn problem(&self) -> &ProblemParams {
        self.inner().problem()
    }
    fn value(&self, t: f64, r: f64) -> f64 {
        self.inner().value(t, r)
    }
    fn d_r(&self, t: f64, r: f64) -> f64 {
        self.inner().d_r(t, r)
    }
    fn d_rr(&self, t: f64, r: f64) -> f64 {
        self.inner().d_rr(t, r)
    }
    fn d_t(&self, t: f64, r: f64) -> f64 {
        self.inner().d_t(t, r)
    }
    fn at_kink(&self, t: f64, r: f64) -> bool {
        self.inner().at_kink(t, r)
    }
    fn excluded(&self, t: f64, r: f64) -> bool {
        self.inner().excluded(t, r)
    }
    fn time_domain(&self) -> (f64, f64) {
        self.inner().time_domain()
    }
}

impl From<Barrier> for ComparisonProfile {
    fn from(v: Barrier) -> Self {
        ComparisonProfile::Barrier(v)
    }
}
impl From<ShrinkSuper> for ComparisonProfile {
    fn from(v: ShrinkSuper) -> Self {
        ComparisonProfile::ShrinkSuper(v)
    }
}
impl From<TailSub> for ComparisonProfile {
    fn from(v: TailSub) -> Self {
        ComparisonProfile::TailSub(v)
    }
}
impl From<SelfSimSuper> for ComparisonProfile {
    fn from(v: SelfSimSuper) -> Self {
        ComparisonProfile::SelfSimSuper(v)
    }
}

/// The four additive pieces of the radial operator at one point:
/// `z_t`, `-(p-1)|z_r|^{p-2} z_rr`, `-((N-1)/r)|z_r|^{p-2} z_r`, `|z_r|^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorTerms {
    pub time: f64,
    pub diffusion: f64,
    pub geometric: f64,
    pub absorption: f64,
}

impl OperatorTerms {
    pub fn total(&self) -> f64 {
        self.time + self.diffusion + self.geometric + self.absorption
    }

    /// Sum of magnitudes, the natural scale of rounding error in `total`.
    pub fn scale(&self) -> f64 {
        self.time.abs() + self.diffusion.abs() + self.geometric.abs() + self.absorption.abs()
    }
}

pub fn radial_operator_terms<P: RadialProfile + ?Sized>(
    profile: &P,
    t: f64,
    r: f64,
) -> Result<OperatorTerms, OperatorError> {
    if !(r > 0.0) {
        return Err(OperatorError::NonPositiveRadius(r));
    }
    if profile.at_kink(t, r) {
        return Err(OperatorError::FreeBoundary { t, r });
    }
    let pp = profile.problem();
    let (n, p, q) = (pp.dim() as f64, pp.p(), pp.q());
    let zr = profile.d_r(t, r);
    let zrr = profile.d_rr(t, r);
    let zt = profile.d_t(t, r);
    let g = zr.abs();
    let weight = if p == 2.0 {
        1.0
    } else if g == 0.0 {
        return Err(OperatorError::SingularPoint { t, r });
    } else {
        g.powf(p - 2.0)
    };
    Ok(OperatorTerms {
        time: zt,
        diffusion: -(p - 1.0) * weight * zrr,
        geometric: -(n - 1.0) / r * weight * zr,
        absorption: if g == 0.0 { 0.0 } else { g.powf(q) },
    })
}

/// `L z = z_t - (p-1)|z_r|^{p-2} z_rr - ((N-1)/r)|z_r|^{p-2} z_r + |z_r|^q`.
pub fn apply_radial_operator<P: RadialProfile + ?Sized>(
    profile: &P,
    t: f64,
    r: f64,
) -> Result<f64, OperatorError> {
    radial_operator_terms(profile, t, r).map(|terms| terms.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant {
        pp: ProblemParams,
        c: f64,
    }

    impl RadialProfile for Constant {
        fn problem(&self) -> &ProblemParams {
            &self.pp
        }
        fn value(&self, _t: f64, _r: f64) -> f64 {
            self.c
        }
        fn d_r(&self, _t: f64, _r: f64) -> f64 {
            0.0
        }
        fn d_rr(&self, _t: f64, _r: f64) -> f64 {
            0.0
        }
        fn d_t(&self, _t: f64, _r: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn constant_profile_is_a_solution_for_p2() {
        let z = Constant {
            pp: ProblemParams::new(3, 2.0, 0.5).unwrap(),
            c: 4.2,
        };
        for &(t, r) in &[(0.0, 0.1), (1.0, 3.0), (7.5, 100.0)] {
            assert_eq!(z.value(t, r), 4.2);
            assert_eq!(apply_radial_operator(&z, t, r).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_profile_is_singular_for_p_below_2() {
        let z = Constant {
            pp: ProblemParams::new(1, 1.5, 0.2).unwrap(),
            c: 1.0,
        };
        assert!(matches!(
            apply_radial_operator(&z, 0.0, 1.0),
            Err(OperatorError::SingularPoint { .. })
        ));
        assert!(matches!(
            apply_radial_operator(&z, 0.0, 0.0),
            Err(OperatorError::NonPositiveRadius(_))
        ));
    }
}
