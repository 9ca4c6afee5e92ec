use proptest::prelude::*;
use vhj_lab::exponents::ProblemParams;
use vhj_lab::gridop::{
    discrete_rhs_with, face_gradient, DiscreteOperator, Field, OuterBoundary, RadialGrid,
    Regularization, SchemeOptions,
};
use vhj_lab::solver::default_eps;

fn p_c(n: u32) -> f64 {
    2.0 * n as f64 / (n as f64 + 1.0)
}

fn single_point() -> impl Strategy<Value = ProblemParams> {
    (1u32..=4, 0.05f64..=1.0, 0.05f64..0.95)
        .prop_map(|(n, s, t)| {
            let p = p_c(n) + (2.0 - p_c(n)) * s;
            ProblemParams::new(n, p, (p - 1.0) * t).unwrap()
        })
        .prop_filter("omega <= 50", |pp| {
            let (p, q) = (pp.p(), pp.q());
            (p - q) / (p - 1.0 - q) <= 50.0
        })
}

/// Problem, grid, and an ordered pair `u <= v` of nonnegative fields.
fn ordered_pair() -> impl Strategy<Value = (ProblemParams, RadialGrid, Vec<f64>, Vec<f64>)> {
    (single_point(), 0.5f64..8.0, 8usize..96).prop_flat_map(|(pp, r_max, m)| {
        let grid = RadialGrid::new(pp.dim(), r_max, m).unwrap();
        let cells = prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, any::<bool>()), m);
        (Just(pp), Just(grid), cells).prop_map(|(pp, grid, cells)| {
            let u: Vec<f64> = cells.iter().map(|c| c.0).collect();
            let v = cells
                .iter()
                .map(|&(a, d, bump)| a + if bump { d } else { 0.0 })
                .collect();
            (pp, grid, u, v)
        })
    })
}

fn regularization(pp: &ProblemParams, grid: &RadialGrid, v: &[f64]) -> Regularization {
    let field = Field::from_values(grid, v.to_vec()).unwrap();
    let eps = default_eps(pp, grid, &field);
    Regularization::new(pp, eps, Regularization::default_gamma_reg(pp), true).unwrap()
}

fn step_pair(pp: ProblemParams, grid: &RadialGrid, u: Vec<f64>, v: Vec<f64>) -> Result<(), TestCaseError> {
    let reg = regularization(&pp, grid, &v);
    let mut op = DiscreteOperator::new(pp, reg, SchemeOptions::default());
    let dt = op.stable_dt(grid, &u, 1.0).min(op.stable_dt(grid, &v, 1.0));
    let (mut a, mut b) = (u, v);
    let mut work = Vec::new();
    op.euler_step(grid, &mut a, dt, &mut work);
    op.euler_step(grid, &mut b, dt, &mut work);
    let scale = b.iter().copied().fold(1.0, f64::max);
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        prop_assert!(x <= &(y + 1e-12 * scale), "cell {i}: {x} > {y}");
    }
    Ok(())
}

fn non_increasing(mut u: Vec<f64>) -> Vec<f64> {
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn euler_step_preserves_order_of_radial_data((pp, grid, u, v) in ordered_pair()) {
        // Sorting keeps the pair ordered cell by cell.
        step_pair(pp, &grid, non_increasing(u), non_increasing(v))?;
    }

    #[test]
    fn euler_step_preserves_order_at_p2(
        (pp, grid, u, v) in ordered_pair().prop_map(|(pp, _, u, v)| {
            let p2 = ProblemParams::new(pp.dim(), 2.0, pp.q() / (pp.p() - 1.0) * 0.999).unwrap();
            let grid = RadialGrid::new(pp.dim(), 4.0, u.len()).unwrap();
            (p2, grid, u, v)
        })
    ) {
        step_pair(pp, &grid, u, v)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn diffusion_alone_conserves_mass((pp, grid, u, _v) in ordered_pair()) {
        let reg = regularization(&pp, &grid, &u);
        let opts = SchemeOptions { hamiltonian: false, outer: OuterBoundary::ZeroFlux };
        let mut op = DiscreteOperator::new(pp, reg, opts);
        let mut a = u.clone();
        let before = Field::from_values(&grid, u).unwrap().mass(&grid);
        let mut work = Vec::new();
        for _ in 0..5 {
            let dt = op.stable_dt(&grid, &a, 0.9);
            op.euler_step(&grid, &mut a, dt, &mut work);
        }
        let after = Field::from_values(&grid, a).unwrap().mass(&grid);
        prop_assert!((after - before).abs() <= 1e-12 * before.abs().max(1e-300), "{before} -> {after}");
    }

    #[test]
    fn centre_cell_sees_only_the_symmetry_face(
        (pp, grid, u, _v) in ordered_pair(),
        noise in prop::collection::vec(0.0f64..1.0, 96),
        hamiltonian in any::<bool>(),
    ) {
        // Radially non-increasing data.
        let mut sorted = u.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let field = Field::from_values(&grid, sorted.clone()).unwrap();
        let g = face_gradient(&grid, &field);
        prop_assert_eq!(g[0], 0.0);

        let reg = regularization(&pp, &grid, &sorted);
        let opts = SchemeOptions { hamiltonian, outer: OuterBoundary::Dirichlet };
        let rhs = discrete_rhs_with(&grid, &field, &pp, &reg, opts);

        // Only u_0 and u_1 may influence the centre cell.
        let mut far = sorted.clone();
        for (k, x) in far.iter_mut().enumerate().skip(2) {
            *x *= noise[k % noise.len()];
        }
        let far = Field::from_values(&grid, far).unwrap();
        let rhs_far = discrete_rhs_with(&grid, &far, &pp, &reg, opts);
        prop_assert_eq!(rhs[0].to_bits(), rhs_far[0].to_bits());

        // The only flux is through face 1, outward for non-increasing data.
        let p = pp.p();
        let eps = reg.eps;
        let flux = grid.face_weight(1) * (g[1] * g[1] + eps * eps).powf(0.5 * (p - 2.0)) * g[1];
        let diffusion = flux / grid.cell_weight(0);
        if !hamiltonian {
            prop_assert!((rhs[0] - diffusion).abs() <= 1e-12 * diffusion.abs().max(1e-300));
            prop_assert!(rhs[0] <= 0.0);
        }
    }
}
