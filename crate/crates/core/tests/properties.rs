use fracdiff::assembly::{Operators, Variant};
use fracdiff::config::RunConfig;
use fracdiff::data::{Preset, ProblemData};
use fracdiff::kernel::FracParams;
use fracdiff::mesh::{build_mesh, Field, FieldKind};
use fracdiff::solver::{solve_dirichlet_with, solve_robin_with, TimeGrid};
use fracdiff::verify::{
    check_comparison, check_positive_part, check_positivity, max_offdiagonal, split_signs,
    CheckReport, TOL_EXACT,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ops(s: f64, n: usize, radius: f64, n_ext: usize, variant: Variant) -> Operators {
    let mesh = build_mesh((-1.0, 1.0), n, radius, n_ext).unwrap();
    Operators::assemble(&mesh, &FracParams::one_d(s).unwrap(), variant).unwrap()
}

fn robin_data(source: &Preset, exterior: &Preset, initial: &Preset) -> ProblemData {
    ProblemData::robin(
        source.space_time(),
        exterior.space_time(),
        initial.point_field(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_signs_recombine(values in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let phi = Field { values: values.clone(), kind: FieldKind::Robin };
        let (p, m) = split_signs(&phi);
        for ((v, a), b) in values.iter().zip(&p.values).zip(&m.values) {
            prop_assert!(*a >= 0.0 && *b >= 0.0);
            prop_assert_eq!(a * b, 0.0);
            prop_assert_eq!(a - b, *v);
        }
    }

    #[test]
    fn report_passes_iff_within_tolerance(v in -1.0f64..1.0, tol in 0.0f64..1.0, ctx in ".{0,20}") {
        let r = CheckReport::new("x", v, tol, None, ctx);
        prop_assert_eq!(r.passed, v <= tol);
        prop_assert_eq!(r.line().split('|').count(), 7);
    }

    #[test]
    fn time_grid_arithmetic(horizon in 0.01f64..10.0, n in 1usize..500) {
        let g = TimeGrid::with_steps(horizon, n).unwrap();
        prop_assert_eq!(g.n_steps(), n);
        prop_assert_eq!(g.time(0), 0.0);
        prop_assert_eq!(g.time(n), horizon);
        prop_assert!((g.dt() * n as f64 - horizon).abs() <= 1e-12 * horizon);
        let r = g.refined();
        prop_assert_eq!(r.n_steps(), 2 * n);
        prop_assert_eq!(r.dt(), 0.5 * g.dt());
        prop_assert_eq!(r.time(2 * n), horizon);
    }

    #[test]
    fn preset_combinations_are_linear(seed: u64, a in -3.0f64..3.0, x in -3.0f64..3.0, t in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Preset::random_nonnegative(&mut rng, (-1.0, 1.0));
        let q = Preset::random_signed(&mut rng, (-1.0, 1.0));
        let lhs = p.scaled(a).plus(&q).eval(x, t);
        let rhs = a * p.eval(x, t) + q.eval(x, t);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        prop_assert!(p.eval(x, t) >= 0.0);
        prop_assert_eq!(p.negated().eval(x, t), -p.eval(x, t));
    }

    #[test]
    fn config_round_trips(
        s in 0.05f64..0.95,
        n in 2usize..100,
        ne in 1usize..10,
        radius in 0.1f64..5.0,
        steps in 1usize..50,
        seed in 0..=i64::MAX as u64,
        robin: bool,
    ) {
        let text = format!(
            "problem = \"{}\"\nseed = {seed}\n[domain]\nomega = [-1.0, 1.0]\norder = {s}\nn_interior = {n}\n\
             n_exterior = {ne}\ntruncation_radius = {radius}\n[time]\nhorizon = 1.0\ndt = {}\n\
             [data.source]\npreset = \"constant\"\nvalue = 1.0\n{}[data.initial]\npreset = \"zero\"\n",
            if robin { "robin" } else { "dirichlet" },
            1.0 / steps as f64,
            if robin { "[data.exterior]\npreset = \"constant\"\nvalue = 0.5\n" } else { "" },
        );
        let cfg = RunConfig::parse(&text).unwrap();
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(cfg, back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stiffness_is_a_symmetric_positive_definite_z_matrix(
        s in 0.35f64..0.95,
        n in 4usize..8,
        radius in 0.3f64..2.0,
        n_ext in 1usize..3,
        robin: bool,
    ) {
        let variant = if robin { Variant::Robin } else { Variant::Dirichlet };
        let o = ops(s, n, radius, n_ext, variant);
        let a = &o.stiffness;
        let amax = a.amax();
        prop_assert!((a - a.transpose()).amax() <= 1e-12 * amax);
        prop_assert!(max_offdiagonal(a) <= 1e-14);
        prop_assert!(a.clone().cholesky().is_some());
    }

    #[test]
    fn positive_part_inequality_holds(
        s in 0.1f64..0.95,
        n in 3usize..8,
        seed: u64,
        robin: bool,
    ) {
        let variant = if robin { Variant::Robin } else { Variant::Dirichlet };
        let o = ops(s, n, 1.0, 2, variant);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let phi: Vec<f64> = (0..o.n_unknowns()).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
            let r = check_positive_part(&phi, &o.stiffness, TOL_EXACT).unwrap();
            if max_offdiagonal(&o.stiffness) <= 1e-14 {
                prop_assert!(r.passed, "{}", r.line());
            } else {
                prop_assert!(r.context.contains("positive_offdiag=true"));
            }
        }
    }

    #[test]
    fn nonnegative_data_stay_nonnegative(s in 0.35f64..0.95, n in 4usize..7, seed: u64, robin: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = (-2.0, 2.0);
        let f = Preset::random_nonnegative(&mut rng, span);
        let g = Preset::random_nonnegative(&mut rng, span);
        let u0 = Preset::random_nonnegative(&mut rng, span);
        let grid = TimeGrid::with_steps(0.5, 8).unwrap();
        let (o, data, traj) = if robin {
            let o = ops(s, n, 1.0, 2, Variant::Robin);
            let data = robin_data(&f, &g, &u0);
            let traj = solve_robin_with(&o, &data, &grid).unwrap();
            (o, data, traj)
        } else {
            let o = ops(s, n, 1.0, 2, Variant::Dirichlet);
            let data = ProblemData::dirichlet(f.space_time(), u0.point_field());
            let traj = solve_dirichlet_with(&o, &data, &grid).unwrap();
            (o, data, traj)
        };
        let r = check_positivity(&o, &data, &traj, TOL_EXACT).unwrap();
        prop_assert!(r.passed, "{}", r.line());
    }

    #[test]
    fn ordered_data_give_ordered_solutions(s in 0.35f64..0.95, n in 4usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = (-2.0, 2.0);
        let lo: Vec<Preset> = (0..3).map(|_| Preset::random_signed(&mut rng, span)).collect();
        let hi: Vec<Preset> = lo.iter().map(|p| p.plus(&Preset::random_nonnegative(&mut rng, span))).collect();
        let o = ops(s, n, 1.0, 2, Variant::Robin);
        let grid = TimeGrid::with_steps(0.5, 8).unwrap();
        let dl = robin_data(&lo[0], &lo[1], &lo[2]);
        let dh = robin_data(&hi[0], &hi[1], &hi[2]);
        let tl = solve_robin_with(&o, &dl, &grid).unwrap();
        let th = solve_robin_with(&o, &dh, &grid).unwrap();
        let r = check_comparison(&o, &dl, &tl, &dh, &th, TOL_EXACT).unwrap();
        prop_assert!(r.passed, "{}", r.line());
    }
}

// For small orders the nearest-neighbour entries of the P1 stiffness turn
// positive on any uniform mesh, so the sign condition behind the discrete
// maximum principle is a property of the order, not of the mesh.
#[test]
fn small_orders_lose_the_sign_condition() {
    for n in [4, 16, 64] {
        let weak = ops(0.1, n, 1.0, 4, Variant::Dirichlet);
        assert!(max_offdiagonal(&weak.stiffness) > 0.0);
        let strong = ops(0.5, n, 1.0, 4, Variant::Dirichlet);
        assert!(max_offdiagonal(&strong.stiffness) < 0.0);
    }
}
