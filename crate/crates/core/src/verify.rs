//! The verification battery: thirteen numbered criteria grouped in four suites.
//! Simulations shared between criteria are computed once per `Battery`.

use crate::analysis::{
    check_domination, default_window, fit_max_u, fit_support_exponents, gradient_envelope,
    j_diagnostic, relative_change, DominationSense, Region, SupportTrace, Verdict,
};
use crate::closedform::{
    certify_sign, find_a0, make_self_sim_super, make_shrink_super, make_tail_sub,
    radial_operator_terms, tail_sub_a_min, A0Search, Barrier, CertBox, ComparisonProfile,
    RadialProfile, Sampler, Sense,
};
use crate::exponents::{derive_constants, validate_params, ProblemParams};
use crate::gridop::{DiscreteOperator, Field, OuterBoundary, RadialGrid, Regularization, SchemeOptions};
use crate::solver::{
    default_eps, make_initial_condition, run, IcKind, InitialCondition,
    SimulationResult, SolverConfig, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Closedform,
    Scheme,
    Phenomena,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Algebra, Suite::Closedform, Suite::Scheme, Suite::Phenomena];

    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Algebra => &[1, 2],
            Suite::Closedform => &[3],
            Suite::Scheme => &[4],
            Suite::Phenomena => &[5, 6, 7, 8, 9, 10, 11, 12, 13],
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "algebra" => Some(Suite::Algebra),
            "closedform" => Some(Suite::Closedform),
            "scheme" => Some(Suite::Scheme),
            "phenomena" => Some(Suite::Phenomena),
            _ => None,
        }
    }
}

pub const TITLES: [&str; 13] = [
    "exponent algebra",
    "barrier exactness",
    "closed-form sign certificates",
    "scheme properties",
    "finite-time extinction and rate band",
    "single-point extinction",
    "no-waiting-time localization",
    "instantaneous shrinking",
    "non-extinction",
    "complete extinction",
    "gradient estimate",
    "J-functional",
    "extinction-time upper bound",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: u8) -> Self {
        Self {
            id,
            title: TITLES[id as usize - 1],
            pass: true,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// Records a sub-check; the outcome fails if any sub-check fails.
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.pass = false;
            self.notes.push(format!("FAILED: {what}"));
        } else {
            self.notes.push(format!("ok: {what}"));
        }
    }

    fn fail(&mut self, what: impl Into<String>) {
        self.check(false, what);
    }

    /// One line `criterion NN [PASS|FAIL] title`.
    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:2} [{}] {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suites: Vec<Suite>,
    pub outcomes: Vec<CriterionOutcome>,
    pub pass: bool,
}

/// Simulations referenced by the phenomena criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunKey {
    /// `N=1, p=2, q=0.5`, bump `m = 1/96`, `R0 = 1`, `r_max = 4`.
    A { m: usize, lift: bool },
    /// `N=2, p=1.8, q=0.6`, bump at the barrier bound, `r_max = 2`.
    B { m: usize },
    /// `N=2, p=1.8, q=0.85`, quadratic bump, `r_max = 4`.
    C,
    /// Fast decay data, `r_max = 32`.
    Shrink,
    /// Fat tail data, `r_max = 16`.
    Tail,
    /// Decay exactly at the threshold, configuration B exponents.
    SelfSim,
}

pub struct RunSetup {
    pub params: ProblemParams,
    pub grid: RadialGrid,
    pub ic: InitialCondition,
    pub cfg: SolverConfig,
}

pub const R0: f64 = 1.0;
pub const M_A: usize = 2048;
pub const M_B: usize = 256;
/// Amplitude of the threshold data in criterion 13.
pub const C_SELFSIM: f64 = 1.0;

fn params(n: u32, p: f64, q: f64) -> ProblemParams {
    ProblemParams::new(n, p, q).expect("reference parameters are admissible")
}

pub fn params_a() -> ProblemParams {
    params(1, 2.0, 0.5)
}
pub fn params_b() -> ProblemParams {
    params(2, 1.8, 0.6)
}
pub fn params_c() -> ProblemParams {
    params(2, 1.8, 0.85)
}

/// Builds the configuration for `key`.
pub fn setup(key: RunKey) -> RunSetup {
    let (pp, r_max, m, kind, t_end) = match key {
        RunKey::A { m, .. } => (
            params_a(),
            4.0,
            m,
            IcKind::Bump { m: Some(1.0 / 96.0), r0: R0, power: None },
            0.2,
        ),
        RunKey::B { m } => (params_b(), 2.0, m, IcKind::Bump { m: None, r0: R0, power: None }, 5e-3),
        RunKey::C => (
            params_c(),
            4.0,
            256,
            IcKind::Bump { m: Some(1.0), r0: R0, power: Some(2.0) },
            5.0,
        ),
        RunKey::Shrink => (params_a(), 32.0, 2048, IcKind::FastDecay { c: 1.0, theta: 3.0 }, 0.01),
        RunKey::Tail => (params_a(), 16.0, 1024, IcKind::FatTail { c: 1.0, rho: 0.5 }, 1.0),
        RunKey::SelfSim => (params_b(), 4.0, 256, IcKind::Bump { m: None, r0: R0, power: None }, 0.0),
    };
    let grid = RadialGrid::new(pp.dim(), r_max, m).expect("reference grid");
    let kind = if key == RunKey::SelfSim {
        threshold_data(&pp, &grid)
    } else {
        kind
    };
    let ic = make_initial_condition(&kind, &grid, &pp).expect("reference data");
    let mut cfg = SolverConfig::recommended(&pp, &grid, &ic.field, if t_end > 0.0 { t_end } else { 1.0 });
    match key {
        RunKey::A { lift: true, .. } => {
            cfg.lift = cfg.reg.eps.powf(cfg.reg.gamma_reg).min(0.1 * cfg.tol_pos);
        }
        RunKey::C => {
            cfg.reg.eps = 1e-7;
            cfg.tol_ext = 1e-6 * ic.sup_norm;
            cfg.tol_pos = cfg.tol_ext;
        }
        RunKey::SelfSim => {
            let w = self_sim_profile(&pp, C_SELFSIM);
            cfg.t_end = w.horizon;
            cfg.snapshot_dt = 0.0;
            cfg.series_stride = 16;
        }
        _ => {}
    }
    if key == RunKey::Shrink {
        cfg.snapshot_dt = cfg.t_end / 20.0;
    }
    RunSetup { params: pp, grid, ic, cfg }
}

/// `C (1+r²)^{-θ/2}` with `θ = q/(1-q)` sampled at the cell centres.
fn threshold_data(pp: &ProblemParams, grid: &RadialGrid) -> IcKind {
    let theta = pp.q() / (1.0 - pp.q());
    let r = grid.centers().to_vec();
    let u = r.iter().map(|&x| C_SELFSIM * (1.0 + x * x).powf(-0.5 * theta)).collect();
    IcKind::Custom { r, u }
}

/// W with `A = A0/2` and the smallest horizon `T > 1` for which `W(0) >= C (1+r²)^{-γ}`,
/// enlarged by 5%.
pub fn self_sim_profile(pp: &ProblemParams, c: f64) -> crate::closedform::SelfSimSuper {
    let a0 = find_a0(pp, A0Search::default()).expect("p < 2").amplitude;
    let amp = 0.5 * a0;
    let alpha = (pp.p() - pp.q()) / (pp.p() - 2.0 * pp.q());
    let horizon = 1.05 * (c / amp).powf(1.0 / alpha).max(1.0);
    make_self_sim_super(*pp, horizon, amp).expect("A <= A0")
}

pub struct Battery {
    pub seed: u64,
    /// Randomized trials for criteria 1, 2 and 4.
    pub trials: usize,
    cache: Mutex<HashMap<RunKey, Arc<Result<SimulationResult, String>>>>,
}

impl Battery {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            trials: 1000,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, key: RunKey) -> Arc<Result<SimulationResult, String>> {
        if let Some(r) = self.cache.lock().unwrap().get(&key) {
            return r.clone();
        }
        let s = setup(key);
        let res = Arc::new(run(&s.params, &s.grid, &s.ic, &s.cfg).map_err(|e| e.to_string()));
        self.cache.lock().unwrap().insert(key, res.clone());
        res
    }

    pub fn criterion(&self, id: u8) -> CriterionOutcome {
        match id {
            1 => criterion_1(self),
            2 => criterion_2(self),
            3 => criterion_3(),
            4 => criterion_4(self),
            5 => criterion_5(self),
            6 => criterion_6(self),
            7 => criterion_7(self),
            8 => criterion_8(self),
            9 => criterion_9(self),
            10 => criterion_10(self),
            11 => criterion_11(self),
            12 => criterion_12(self),
            13 => criterion_13(self),
            _ => {
                let mut o = CriterionOutcome::new(1);
                o.fail(format!("no criterion {id}"));
                o
            }
        }
    }

    pub fn run_suites(&self, suites: &[Suite]) -> SuiteReport {
        let outcomes: Vec<CriterionOutcome> = suites
            .iter()
            .flat_map(|s| s.criteria().iter().copied())
            .map(|id| self.criterion(id))
            .collect();
        SuiteReport {
            suites: suites.to_vec(),
            pass: outcomes.iter().all(|o| o.pass),
            outcomes,
        }
    }
}

macro_rules! need_run {
    ($o:expr, $res:expr) => {
        match $res.as_ref() {
            Ok(r) => r,
            Err(e) => {
                $o.fail(format!("simulation failed: {e}"));
                return $o;
            }
        }
    };
}

/// A random triple in the single point range with `ω <= omega_max`.
pub fn random_single_point(rng: &mut impl Rng, omega_max: f64) -> ProblemParams {
    loop {
        let n = rng.gen_range(1..=6u32);
        let pc = 2.0 * n as f64 / (n as f64 + 1.0);
        let p = rng.gen_range(pc..=2.0);
        let q = rng.gen_range(0.0..(p - 1.0));
        if let Ok(pp) = validate_params(n as f64, p, q) {
            let omega = (p - q) / (p - 1.0 - q);
            if q > 1e-6 && omega <= omega_max && p > pc + 1e-6 {
                return pp;
            }
        }
    }
}

fn criterion_1(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(1);
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
    let mut worst = 0.0f64;
    let n = 10 * b.trials;
    for _ in 0..n {
        let pp = random_single_point(&mut rng, f64::INFINITY);
        let q = pp.q();
        let dc = derive_constants(&pp).expect("single point range");
        let omega = dc.omega.unwrap();
        let e1 = (omega - dc.gamma_sigma.unwrap()).abs() / omega;
        let e2 = (omega * dc.alpha1.unwrap() - q / (1.0 - q)).abs() / (q / (1.0 - q));
        let (a, bb) = (dc.alpha_ss.unwrap(), dc.beta_ss.unwrap());
        let e3 = ((a - 1.0) - q * (a + bb)).abs() / (a - 1.0).abs().max(1.0);
        worst = worst.max(e1).max(e2).max(e3);
    }
    o.metric("triples", n as f64);
    o.metric("max_relative_error", worst);
    o.check(worst <= 1e-12, format!("identities hold to {worst:.2e}"));
    o
}

fn criterion_2(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(2);
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed.wrapping_add(2));
    let mut worst = 0.0f64;
    let sets = (b.trials / 10).max(100);
    for _ in 0..sets {
        // Larger ω underflows κ r^ω at r = 1e-3.
        let pp = random_single_point(&mut rng, 50.0);
        let bar = Barrier::at_origin(pp).expect("single point range");
        for k in 0..=120 {
            let r = 10f64.powf(-3.0 + 6.0 * k as f64 / 120.0);
            let t = rng.gen_range(0.0..10.0);
            match radial_operator_terms(&bar, t, r) {
                Ok(terms) => worst = worst.max(terms.total().abs() / terms.scale()),
                Err(e) => {
                    o.fail(format!("operator error {e}"));
                    return o;
                }
            }
        }
    }
    o.metric("parameter_sets", sets as f64);
    o.metric("max_relative_residual", worst);
    o.check(worst <= 1e-12, format!("barrier residual {worst:.2e}"));
    o
}

/// Profiles and boxes certified by criterion 3.
pub fn certified_profiles() -> Vec<(ComparisonProfile, CertBox, Sense)> {
    let a = params_a();
    let sigma = make_shrink_super(a, 1.0, 3.0, 1.0).expect("shrinking supersolution");
    let sbox = CertBox {
        t: [0.0, sigma.t0],
        r: [sigma.radius, 10.0 * sigma.radius],
    };
    let w = tail_profile(&a, None);
    let wbox = CertBox {
        t: [0.0, 0.99 * w.horizon],
        r: [1e-2, 1e2],
    };
    let big_w = self_sim_profile(&params_b(), C_SELFSIM);
    let bwbox = CertBox {
        t: [0.0, 0.99 * big_w.horizon],
        r: [1e-3, 1e3],
    };
    vec![
        (sigma.into(), sbox, Sense::NonNegative),
        (w.into(), wbox, Sense::NonPositive),
        (big_w.into(), bwbox, Sense::NonNegative),
    ]
}

/// TailSub with `T = 1`, `b = b0/2` and `a = 2 a_min`, enlarged until
/// `w(0) <= u0` on `grid` when data are given.
pub fn tail_profile(pp: &ProblemParams, data: Option<(&RadialGrid, &Field)>) -> crate::closedform::TailSub {
    let b0 = derive_constants(pp).unwrap().b0.unwrap();
    let b = 0.5 * b0;
    let mut a = 2.0 * tail_sub_a_min(pp, 1.0, b);
    loop {
        let w = make_tail_sub(*pp, 1.0, b, a).expect("a > a_min");
        let below = data.map_or(true, |(g, u)| {
            g.centers().iter().zip(&u.values).all(|(&r, &v)| w.value(0.0, r) <= v)
        });
        if below {
            return w;
        }
        a *= 1.25;
    }
}

fn criterion_3() -> CriterionOutcome {
    let mut o = CriterionOutcome::new(3);
    for (profile, bx, sense) in certified_profiles() {
        let name = profile.family();
        match certify_sign(&profile, bx, sense, Sampler::default()) {
            Ok(rep) => {
                o.metric(&format!("{name}.min_margin"), rep.min_margin);
                o.check(rep.pass, format!("{name} sign on its box, margin {:.3e}", rep.min_margin));
            }
            Err(e) => o.fail(format!("{name}: {e}")),
        }
    }
    o
}

/// Nonincreasing random data with compact support in `[0, r_max)`.
fn random_profile(rng: &mut impl Rng, grid: &RadialGrid) -> Field {
    let m = grid.len();
    let cut = rng.gen_range(m / 4..m);
    let amp = 10f64.powf(rng.gen_range(-3.0..1.0));
    let mut u = vec![0.0; m];
    let mut v = amp;
    for ui in u.iter_mut().take(cut) {
        *ui = v;
        v *= 1.0 - rng.gen_range(0.0..0.05f64).powi(2) * 20.0;
        v = v.max(0.0);
    }
    Field { values: u }
}

/// Per-trial flags of the four scheme properties.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SchemeTrial {
    pub comparison: f64,
    pub max_principle: f64,
    pub monotonicity: f64,
    pub step_order: f64,
}

/// Runs one randomized trial of `steps` explicit steps at `M = 256` and
/// returns the largest violation of each property.
pub fn scheme_trial(rng: &mut impl Rng, steps: usize) -> SchemeTrial {
    let pp = random_single_point(rng, 50.0);
    let grid = RadialGrid::new(pp.dim(), rng.gen_range(1.0..8.0), 256).unwrap();
    let mut u = random_profile(rng, &grid);
    let mut v = u.clone();
    for x in v.values.iter_mut() {
        *x += rng.gen_range(0.0..0.1) * *x + if rng.gen_bool(0.3) { rng.gen_range(0.0..1e-3) } else { 0.0 };
    }
    let eps = default_eps(&pp, &grid, &v);
    let reg = Regularization::new(&pp, eps, Regularization::default_gamma_reg(&pp), true).unwrap();
    let opts = SchemeOptions { hamiltonian: true, outer: OuterBoundary::Dirichlet };
    let mut op = DiscreteOperator::new(pp, reg, opts);
    let mut work = Vec::new();
    let sup0 = u.max();
    let source = eps.powf(pp.q());
    let mut out = SchemeTrial::default();
    let mut t = 0.0;

    // Single step from a pair differing in one cell.
    {
        let mut a = u.values.clone();
        let mut b = a.clone();
        let k = rng.gen_range(0..grid.len());
        b[k] += rng.gen_range(0.0..1.0) * sup0.max(1e-3);
        let dt = op.stable_dt(&grid, &a, 1.0).min(op.stable_dt(&grid, &b, 1.0));
        op.euler_step(&grid, &mut a, dt, &mut work);
        op.euler_step(&grid, &mut b, dt, &mut work);
        out.step_order = a.iter().zip(&b).map(|(x, y)| x - y).fold(0.0, f64::max);
    }

    for _ in 0..steps {
        let dt = op.stable_dt(&grid, &u.values, 0.9).min(op.stable_dt(&grid, &v.values, 0.9));
        op.euler_step(&grid, &mut u.values, dt, &mut work);
        op.euler_step(&grid, &mut v.values, dt, &mut work);
        t += dt;
        let bound = sup0 + source * t;
        for (i, (&x, &y)) in u.values.iter().zip(&v.values).enumerate() {
            out.comparison = out.comparison.max(x - y);
            out.max_principle = out.max_principle.max(-x).max(x - bound);
            if i + 1 < grid.len() {
                out.monotonicity = out.monotonicity.max(u.values[i + 1] - x);
            }
        }
    }
    out
}

pub const SCHEME_SLACK: f64 = 1e-10;

fn criterion_4(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed.wrapping_add(4));
    let mut worst = SchemeTrial::default();
    for _ in 0..b.trials {
        let t = scheme_trial(&mut rng, 20);
        worst.comparison = worst.comparison.max(t.comparison);
        worst.max_principle = worst.max_principle.max(t.max_principle);
        worst.monotonicity = worst.monotonicity.max(t.monotonicity);
        worst.step_order = worst.step_order.max(t.step_order);
    }
    o.metric("trials", b.trials as f64);
    for (name, v) in [
        ("comparison", worst.comparison),
        ("maximum_principle", worst.max_principle),
        ("radial_monotonicity", worst.monotonicity),
        ("monotone_step", worst.step_order),
    ] {
        o.metric(name, v);
        o.check(v <= SCHEME_SLACK, format!("{name} worst violation {v:.2e}"));
    }
    o
}

fn extinction(o: &mut CriterionOutcome, res: &SimulationResult, tag: &str) -> Option<f64> {
    o.check(
        res.termination == Termination::Extinct,
        format!("{tag} terminates {:?}", res.termination),
    );
    if let Some(te) = res.t_e_est {
        o.metric(&format!("{tag}.T_e"), te);
    }
    res.t_e_est.filter(|_| res.termination == Termination::Extinct)
}

fn criterion_5(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(5);
    let coarse = b.get(RunKey::A { m: M_A, lift: false });
    let coarse = need_run!(o, coarse);
    let Some(te) = extinction(&mut o, coarse, "M2048") else { return o };
    match default_window(&coarse.series, te, coarse.tol_ext, coarse.dt_max)
        .ok_or_else(|| "empty fit window".to_string())
        .and_then(|w| fit_max_u(coarse, w).map_err(|e| e.to_string()))
    {
        Ok(f) => {
            let fit = f.fit.unwrap();
            o.metric("rate_exponent", fit.exponent);
            o.metric("rate_rms", fit.rms);
            o.check(
                f.verdict == Verdict::Pass,
                format!("max_u exponent {:.4} in [{}, {}] +- 0.1", fit.exponent, f.band[0], f.band[1]),
            );
        }
        Err(e) => o.fail(format!("rate fit: {e}")),
    }
    let fine = b.get(RunKey::A { m: 2 * M_A, lift: false });
    let fine = need_run!(o, fine);
    if let Some(te2) = extinction(&mut o, fine, "M4096") {
        let change = relative_change(te2, te);
        o.metric("T_e_relative_change", change);
        o.check(change <= 0.03, format!("T_e changes by {:.2}% under doubling", 100.0 * change));
    }
    o
}

fn criterion_6(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(6);
    let res = b.get(RunKey::A { m: M_A, lift: false });
    let res = need_run!(o, res);
    let Some(te) = extinction(&mut o, res, "M2048") else { return o };
    let trace = SupportTrace::from_series(&res.series);
    match default_window(&res.series, te, res.tol_ext, res.dt_max)
        .ok_or_else(|| "empty fit window".to_string())
        .and_then(|w| {
            fit_support_exponents(&trace, te, w, &res.params, res.grid.r_max()).map_err(|e| e.to_string())
        }) {
        Ok(f) => match f.fit {
            Some(fit) => {
                o.metric("support_exponent", fit.exponent);
                o.check(
                    f.verdict == Verdict::Pass,
                    format!("support exponent {:.4} in [{:.4}, {:.4}] +- 0.1", fit.exponent, f.band[0], f.band[1]),
                );
            }
            None => o.fail("support fit not applicable"),
        },
        Err(e) => o.fail(format!("support fit: {e}")),
    }
    let last = res.series.iter().filter(|r| r.max_u >= res.tol_ext).last();
    let dr = res.grid.dr();
    match last {
        Some(row) => {
            o.metric("final_support_over_dr", row.support_radius / dr);
            o.check(
                row.support_radius <= 5.0 * dr,
                format!("final support {:.3e} = {:.1} dr", row.support_radius, row.support_radius / dr),
            );
        }
        None => o.fail("no row above tol_ext"),
    }
    o
}

fn criterion_7(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(7);
    let res = b.get(RunKey::A { m: M_A, lift: false });
    let res = need_run!(o, res);
    let limit = R0 + 2.0 * res.grid.dr();
    let worst = res.series.iter().map(|r| r.support_radius).fold(0.0, f64::max);
    o.metric("max_support", worst);
    o.metric("limit", limit);
    o.check(worst <= limit, format!("support {worst:.6} <= R0 + 2 dr = {limit:.6}"));
    o
}

fn criterion_8(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(8);
    let res = b.get(RunKey::Shrink);
    let res = need_run!(o, res);
    let r_max = res.grid.r_max();
    let u0 = &res.snapshots[0].field;
    o.metric("tol_pos", res.tol_pos);
    o.metric("u0_min", u0.min());
    o.check(
        u0.values.iter().all(|&v| v > res.tol_pos),
        format!("u0 > tol_pos = {:.2e} on the whole grid", res.tol_pos),
    );
    let end = res.series.last().unwrap();
    o.metric("support_at_end", end.support_radius);
    o.check(
        end.support_radius < 0.5 * r_max,
        format!("support {:.3} at t = {} below r_max/2 = {}", end.support_radius, end.t, 0.5 * r_max),
    );
    let sup: Vec<f64> = res.snapshots.iter().skip(1).map(|s| crate::analysis::support_radius(&res.grid, &s.field, res.tol_pos)).collect();
    let non_increasing = sup.windows(2).all(|w| w[1] <= w[0]);
    let decreased = sup.first().zip(sup.last()).is_some_and(|(a, b)| b < a);
    o.check(non_increasing && decreased, "support decreasing in t over the stored snapshots");

    let sigma = make_shrink_super(res.params, 1.0, 3.0, res.sup_norm0).expect("Σ");
    o.metric("sigma.R", sigma.radius);
    o.metric("sigma.t0", sigma.t0);
    let region = Region {
        r: [sigma.radius, r_max],
        t: [0.0, sigma.t0],
    };
    match check_domination(res, &sigma.into(), DominationSense::Below, region, 10.0 * res.tol_pos) {
        Ok(rep) => {
            o.metric("domination.max_violation", rep.max_violation);
            o.check(rep.pass, format!("u <= Σ, max violation {:.2e}", rep.max_violation));
        }
        Err(e) => o.fail(format!("domination: {e}")),
    }
    o
}

fn criterion_9(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(9);
    let res = b.get(RunKey::Tail);
    let res = need_run!(o, res);
    o.check(
        res.termination == Termination::HorizonReached,
        format!("terminates {:?}", res.termination),
    );
    let s = setup(RunKey::Tail);
    let w = tail_profile(&res.params, Some((&res.grid, &s.ic.field)));
    o.metric("w.a", w.a);
    o.metric("w.b", w.b);
    let tol = 10.0 * s.cfg.reg.eps.powf(res.params.q());
    o.metric("tol_cmp", tol);
    let region = Region {
        r: [0.0, 0.5 * res.grid.r_max()],
        t: [0.0, f64::INFINITY],
    };
    match check_domination(res, &w.into(), DominationSense::Above, region, tol) {
        Ok(rep) => {
            o.metric("domination.max_violation", rep.max_violation);
            o.check(rep.pass, format!("u >= w - 10 eps^q, max violation {:.2e}", rep.max_violation));
        }
        Err(e) => o.fail(format!("domination: {e}")),
    }
    let last = res.snapshots.last().unwrap();
    let half = 0.5 * res.grid.r_max();
    let min_half = last
        .field
        .values
        .iter()
        .zip(res.grid.centers())
        .filter(|(_, &r)| r <= half)
        .map(|(&v, _)| v)
        .fold(f64::INFINITY, f64::min);
    o.metric("min_u_inner_half_at_end", min_half);
    o.check(min_half > res.tol_pos, format!("min u(t_end) on r <= r_max/2 is {min_half:.3e}"));
    o
}

fn criterion_10(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(10);
    let res = b.get(RunKey::C);
    let res = need_run!(o, res);
    extinction(&mut o, res, "C");
    let half = 0.5 * res.grid.r_max();
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for s in res.snapshots.iter().filter(|s| s.t > 0.0 && s.field.max() > 1e3 * res.tol_ext) {
        let m = s
            .field
            .values
            .iter()
            .zip(res.grid.centers())
            .filter(|(_, &r)| r <= half)
            .map(|(&v, _)| v)
            .fold(f64::INFINITY, f64::min);
        worst = worst.min(m);
        checked += 1;
    }
    o.metric("snapshots_checked", checked as f64);
    o.metric("min_u_inner_half", worst);
    o.metric("tol_pos", res.tol_pos);
    o.check(
        checked > 0 && worst > res.tol_pos,
        format!("min u on r <= r_max/2 is {worst:.3e} over {checked} snapshots"),
    );
    o
}

fn criterion_11(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(11);
    for (tag, keys) in [
        ("A", [RunKey::A { m: M_A, lift: false }, RunKey::A { m: 2 * M_A, lift: false }]),
        ("B", [RunKey::B { m: M_B }, RunKey::B { m: 2 * M_B }]),
    ] {
        let mut sups = Vec::new();
        for key in keys {
            let res = b.get(key);
            let res = need_run!(o, res);
            let env = gradient_envelope(&res.snapshots, &res.grid, &res.params, res.sup_norm0, res.tol_pos);
            o.check(env.bounded, format!("{tag} M={} envelope finite", res.grid.len()));
            o.metric(&format!("{tag}.M{}.sup_C", res.grid.len()), env.sup_c);
            sups.push(env.sup_c);
        }
        let change = relative_change(sups[1], sups[0]);
        o.metric(&format!("{tag}.relative_change"), change);
        o.check(change <= 0.2, format!("{tag} envelope changes by {:.1}% under doubling", 100.0 * change));
    }
    o
}

fn criterion_12(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(12);
    let mut infs = Vec::new();
    for m in [M_A, 2 * M_A] {
        let res = b.get(RunKey::A { m, lift: true });
        let res = need_run!(o, res);
        let Some(te) = extinction(&mut o, res, &format!("M{m}")) else { return o };
        let snaps: Vec<_> = res.snapshots.iter().filter(|s| s.t < 0.9 * te).cloned().collect();
        match j_diagnostic(&snaps, &res.grid, &res.params, res.tol_pos, R0, None) {
            Ok(d) => {
                o.metric(&format!("M{m}.delta0"), d.delta0);
                o.metric(&format!("M{m}.inf_delta"), d.inf_delta);
                o.check(
                    d.inf_delta >= 0.5 * d.delta0,
                    format!("M={m}: inf delta {:.4e} >= delta0/2 = {:.4e}", d.inf_delta, 0.5 * d.delta0),
                );
                let worst = d
                    .rows
                    .iter()
                    .map(|r| r.max_j - 10.0 * res.tol_pos * r.scale)
                    .fold(f64::NEG_INFINITY, f64::max);
                let rel = d.rows.iter().map(|r| r.max_j / r.scale).fold(f64::NEG_INFINITY, f64::max);
                o.metric(&format!("M{m}.max_J_over_scale"), rel);
                o.check(worst <= 0.0, format!("M={m}: max J <= 10 tol_pos scale (max J/scale = {rel:.3e})"));
                infs.push(d.inf_delta);
            }
            Err(e) => o.fail(format!("M={m}: {e}")),
        }
    }
    if infs.len() == 2 {
        let change = relative_change(infs[1], infs[0]);
        o.metric("inf_delta_relative_change", change);
        o.check(change <= 0.2, format!("inf delta changes by {:.1}% under doubling", 100.0 * change));
    }
    o
}

fn criterion_13(b: &Battery) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(13);
    let res = b.get(RunKey::SelfSim);
    let res = need_run!(o, res);
    let w = self_sim_profile(&res.params, C_SELFSIM);
    o.metric("W.A", w.amplitude);
    o.metric("W.T", w.horizon);
    let Some(te) = extinction(&mut o, res, "threshold data") else { return o };
    o.check(te <= w.horizon, format!("T_e = {te:.4e} <= T = {:.4e}", w.horizon));
    match check_domination(res, &w.into(), DominationSense::Below, Region::default(), 10.0 * res.tol_pos) {
        Ok(rep) => {
            o.metric("domination.max_violation", rep.max_violation);
            o.check(rep.pass, format!("u <= W, max violation {:.2e}", rep.max_violation));
        }
        Err(e) => o.fail(format!("domination: {e}")),
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_cover_all_criteria_once() {
        let mut ids: Vec<u8> = Suite::ALL.iter().flat_map(|s| s.criteria().iter().copied()).collect();
        ids.sort();
        assert_eq!(ids, (1..=13).collect::<Vec<u8>>());
        assert_eq!(Suite::parse("scheme"), Some(Suite::Scheme));
        assert_eq!(Suite::parse("nope"), None);
    }

    #[test]
    fn self_sim_profile_dominates_threshold_data() {
        let pp = params_b();
        let w = self_sim_profile(&pp, C_SELFSIM);
        assert!(w.horizon > 1.0);
        let g = 0.75;
        for k in 0..200 {
            let r = 0.05 * k as f64;
            assert!(w.value(0.0, r) >= C_SELFSIM * (1.0 + r * r).powf(-g));
        }
    }

    #[test]
    fn algebra_suite_passes_quickly() {
        let mut b = Battery::new(7);
        b.trials = 100;
        let rep = b.run_suites(&[Suite::Algebra]);
        assert!(rep.pass, "{rep:?}");
    }
}
