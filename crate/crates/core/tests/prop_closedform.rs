use proptest::prelude::*;
use vhj_lab::closedform::{
    apply_radial_operator, find_a0, make_self_sim_super, make_shrink_super, make_tail_sub,
    radial_operator_terms, tail_sub_a_min, A0Search, Barrier, RadialProfile,
};
use vhj_lab::exponents::{derive_constants, ProblemParams};

fn p_c(n: u32) -> f64 {
    2.0 * n as f64 / (n as f64 + 1.0)
}

/// Single point triples with the barrier exponent ω = (p-q)/(p-1-q) at most 50.
fn single_point() -> impl Strategy<Value = ProblemParams> {
    (1u32..=5, 0.02f64..=1.0, 0.02f64..0.98)
        .prop_map(|(n, s, t)| {
            let p = p_c(n) + (2.0 - p_c(n)) * s;
            ProblemParams::new(n, p, (p - 1.0) * t).unwrap()
        })
        .prop_filter("omega <= 50", |pp| {
            let (p, q) = (pp.p(), pp.q());
            (p - q) / (p - 1.0 - q) <= 50.0
        })
}

const H: f64 = 1e-5;

/// Compares analytic r- and t-derivatives with centred differences at (t, r),
/// with the r-step relative to `len`, the distance to the nearest singularity.
fn check_derivatives_at<P: RadialProfile>(z: &P, t: f64, r: f64, len: f64) -> Result<(), TestCaseError> {
    let hr = H * len;
    let zr = z.d_r(t, r);
    let fd_r = (z.value(t, r + hr) - z.value(t, r - hr)) / (2.0 * hr);
    let scale_r = zr.abs() + z.value(t, r).abs() / r + z.d_rr(t, r).abs() * r;
    prop_assert!(
        (zr - fd_r).abs() <= 1e-6 * scale_r,
        "d_r at t={t}, r={r}: {zr} vs {fd_r} (scale {scale_r})"
    );

    let zrr = z.d_rr(t, r);
    // Subnormal values carry too few digits to compare.
    if zrr.is_normal() {
        let fd_rr = (z.d_r(t, r + hr) - z.d_r(t, r - hr)) / (2.0 * hr);
        let scale_rr = zrr.abs() + zr.abs() / r;
        prop_assert!(
            (zrr - fd_rr).abs() <= 1e-6 * scale_rr,
            "d_rr at t={t}, r={r}: {zrr} vs {fd_rr}"
        );
    }

    let (t_lo, t_hi) = z.time_domain();
    // Step relative to the distance to the ends of the time domain.
    let ht = H * t.abs().max(1e-3).min(t_hi - t).min(t - t_lo);
    if ht > 0.0 && t - 2.0 * ht > t_lo && t + 2.0 * ht < t_hi {
        let zt = z.d_t(t, r);
        let v = |k: f64| z.value(t + k * ht, r);
        let fd_t = (v(-2.0) - 8.0 * v(-1.0) + 8.0 * v(1.0) - v(2.0)) / (12.0 * ht);
        let scale_t = zt.abs() + z.value(t, r).abs() / (t_hi - t).min(t).max(ht);
        prop_assert!(
            (zt - fd_t).abs() <= 1e-6 * scale_t,
            "d_t at t={t}, r={r}: {zt} vs {fd_t}"
        );
    }
    Ok(())
}

fn check_derivatives<P: RadialProfile>(z: &P, t: f64, r: f64) -> Result<(), TestCaseError> {
    check_derivatives_at(z, t, r, r)
}

fn log_uniform(lo: f64, hi: f64, s: f64) -> f64 {
    (lo.ln() + s * (hi.ln() - lo.ln())).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn barrier_is_an_exact_solution(pp in single_point(), samples in prop::collection::vec(0.0f64..1.0, 64)) {
        let b = Barrier::at_origin(pp).unwrap();
        let q = pp.q();
        for s in samples {
            let r = log_uniform(1e-3, 1e3, s);
            let bound = 1e-12 * (b.omega * b.kappa).powf(q) * r.powf(q * (b.omega - 1.0));
            if !bound.is_normal() {
                continue;
            }
            let l = apply_radial_operator(&b, 0.0, r).unwrap();
            prop_assert!(l.abs() <= bound, "L = {l} at r = {r}, bound {bound}");
        }
    }

    #[test]
    fn barrier_derivatives(pp in single_point(), c in 0.0f64..3.0, samples in prop::collection::vec((0.0f64..1.0, any::<bool>()), 10)) {
        let b = Barrier::new(pp, c).unwrap();
        for (s, right) in samples {
            let d = log_uniform(1e-2, 10.0, s);
            let r = if right || d >= c { c + d } else { c - d };
            check_derivatives_at(&b, 0.0, r, d.min(r))?;
        }
    }

    #[test]
    fn shrink_super_derivatives(
        pp in single_point(),
        c in 0.1f64..10.0,
        theta_factor in 1.1f64..3.0,
        sup in 0.01f64..1.0,
        samples in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 10),
    ) {
        let thr = derive_constants(&pp).unwrap().decay_threshold.unwrap();
        let sigma = make_shrink_super(pp, c, thr * theta_factor, sup);
        prop_assume!(sigma.is_ok());
        let sigma = sigma.unwrap();
        for (st, sr) in samples {
            let t = sigma.t0 * (0.01 + 0.98 * st);
            let edge = sigma.support_radius(t).min(10.0 * sigma.radius);
            let r = sigma.radius + (edge - sigma.radius) * (0.02 + 0.9 * sr);
            // Stay clear of the free boundary where Σ is only Hölder.
            if edge - r <= 0.02 * (edge - sigma.radius) {
                continue;
            }
            check_derivatives_at(&sigma, t, r, r.min(edge - r))?;
        }
    }

    #[test]
    fn eta_law_holds_pointwise(
        pp in single_point(),
        c in 0.1f64..10.0,
        theta_factor in 1.1f64..3.0,
        samples in prop::collection::vec(0.0f64..1.0, 16),
    ) {
        let thr = derive_constants(&pp).unwrap().decay_threshold.unwrap();
        let sigma = make_shrink_super(pp, c, thr * theta_factor, 1.0);
        prop_assume!(sigma.is_ok());
        let sigma = sigma.unwrap();
        prop_assert_eq!(sigma.eta(0.0), 0.0);
        for s in samples {
            let t = sigma.t0 * (0.01 + 0.98 * s);
            // Local power-law exponent of η sets the step.
            let gamma = (t * sigma.eta_coeff * sigma.eta(t).powf(sigma.beta_eta) / sigma.eta(t)).abs();
            let h = 1e-3 * t / gamma.max(1.0);
            let e = |k: f64| sigma.eta(t + k * h);
            // Fourth-order centred derivative of the closed form.
            let d = (e(-2.0) - 8.0 * e(-1.0) + 8.0 * e(1.0) - e(2.0)) / (12.0 * h);
            let ode = sigma.eta_coeff * sigma.eta(t).powf(sigma.beta_eta);
            prop_assert!((d - ode).abs() <= 1e-10 * ode.abs(), "t = {t}: {d} vs {ode}");
        }
    }

    #[test]
    fn tail_sub_derivatives(
        pp in single_point(),
        horizon in 0.1f64..10.0,
        b_frac in 0.05f64..0.95,
        a_factor in 1.0f64..4.0,
        samples in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 10),
    ) {
        let b0 = derive_constants(&pp).unwrap().b0.unwrap();
        let b = b0 * b_frac;
        let a = a_factor * tail_sub_a_min(&pp, horizon, b);
        let w = make_tail_sub(pp, horizon, b, a);
        prop_assume!(w.is_ok());
        let w = w.unwrap();
        for (st, sr) in samples {
            let t = horizon * 0.98 * st;
            let r = log_uniform(1e-2, 1e2, sr);
            check_derivatives(&w, t, r)?;
        }
    }

    #[test]
    fn every_term_is_finite(pp in single_point(), s in 0.0f64..1.0) {
        let b = Barrier::at_origin(pp).unwrap();
        let r = log_uniform(1e-2, 1e2, s);
        let terms = radial_operator_terms(&b, 0.0, r).unwrap();
        prop_assert!(terms.total().is_finite() && terms.scale() >= terms.total().abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn self_sim_derivatives(
        case in 0usize..4,
        horizon in 0.5f64..4.0,
        a_frac in 0.1f64..1.0,
        samples in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 80),
    ) {
        let (n, p, q) = [(2, 1.8, 0.6), (1, 1.5, 0.2), (3, 1.9, 0.4), (2, 1.7, 0.5)][case];
        let pp = ProblemParams::new(n, p, q).unwrap();
        let a0 = find_a0(&pp, A0Search::default()).unwrap().amplitude;
        let w = make_self_sim_super(pp, horizon, a0 * a_frac).unwrap();
        for (st, sr) in samples {
            let t = horizon * 0.98 * st;
            let r = log_uniform(1e-2, 1e2, sr);
            check_derivatives(&w, t, r)?;
        }
    }
}
