mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tubesolve::nabla::{
    nabla_derivative, nabla_exp, nabla_exp_cylinder, nabla_integral, nabla_integral_oriented,
};
use tubesolve::{FiniteTimeScale, GridFunction, TimeScaleSpec};

use common::{check_identities, random_grid, Smooth};

fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn identity_suite_on_random_grids(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let ts = random_grid(&mut rng, 120);
        let f = Smooth::random(&mut rng).on(&ts);
        let g = Smooth::random_nonvanishing(&mut rng).on(&ts);
        prop_assert_eq!(check_identities(&ts, &f, &g, 1e-10), Ok(()));
    }

    #[test]
    fn derivative_and_integral_are_linear(seed in any::<u64>(), alpha in -5.0..5.0f64, beta in -5.0..5.0f64) {
        let mut rng = seeded(seed);
        let ts = random_grid(&mut rng, 80);
        let f = Smooth::random(&mut rng).on(&ts);
        let g = Smooth::random(&mut rng).on(&ts);
        let combo = GridFunction::from_fn(ts.clone(), 1, |t, out| {
            let i = ts.index_of(t).unwrap();
            out[0] = alpha * f.scalar_at(i) + beta * g.scalar_at(i);
        });
        let (dc, df, dg) = (nabla_derivative(&combo), nabla_derivative(&f), nabla_derivative(&g));
        for i in ts.kappa_indices() {
            let expect = alpha * df.scalar_at(i) + beta * dg.scalar_at(i);
            let scale = (alpha * df.scalar_at(i)).abs() + (beta * dg.scalar_at(i)).abs();
            prop_assert!(common::close(dc.scalar_at(i), expect, scale, 1e-10));
        }
        let last = ts.len() - 1;
        let ic = nabla_integral(&combo, 0, last).unwrap()[0];
        let expect = alpha * nabla_integral(&f, 0, last).unwrap()[0] + beta * nabla_integral(&g, 0, last).unwrap()[0];
        prop_assert!(common::close(ic, expect, expect, 1e-10));
    }

    #[test]
    fn integral_orientation_and_additivity(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let ts = random_grid(&mut rng, 80);
        let f = Smooth::random(&mut rng).on(&ts);
        let n = ts.len();
        let (c, m, d) = {
            let mut idx = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
            idx.sort_unstable();
            (idx[0], idx[1], idx[2])
        };
        let whole = nabla_integral(&f, c, d).unwrap()[0];
        let split = nabla_integral(&f, c, m).unwrap()[0] + nabla_integral(&f, m, d).unwrap()[0];
        prop_assert!(common::close(whole, split, whole, 1e-12));
        let back = nabla_integral_oriented(&f, d, c).unwrap()[0];
        prop_assert_eq!(back, -whole);
        prop_assert_eq!(nabla_integral(&f, c, c).unwrap()[0], 0.0);
    }

    #[test]
    fn exponential_solves_its_equation(seed in any::<u64>(), eps in -3.0..1.0f64) {
        let mut rng = seeded(seed);
        let ts = random_grid(&mut rng, 100);
        let t0 = rng.gen_range(0..ts.len());
        let e = nabla_exp(&ts, eps, t0).unwrap();
        prop_assert_eq!(e.scalar_at(t0), 1.0);
        let de = nabla_derivative(&e);
        for i in ts.kappa_indices() {
            let expect = eps * e.scalar_at(i);
            prop_assert!(common::close(de.scalar_at(i), expect, expect, 1e-12));
        }
        let cyl = nabla_exp_cylinder(&ts, eps, t0).unwrap();
        for i in 0..ts.len() {
            let (p, c) = (e.scalar_at(i), cyl.scalar_at(i));
            prop_assert!((p - c).abs() <= 1e-9 * p.abs().max(1.0), "{} vs {}", p, c);
        }
    }

    #[test]
    fn exponential_to_the_right_end_lies_in_unit_interval(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let ts = random_grid(&mut rng, 100);
        let last = ts.len() - 1;
        let e = nabla_exp(&ts, 1.0, last).unwrap();
        for i in 0..ts.len() {
            prop_assert!(e.scalar_at(i) > 0.0 && e.scalar_at(i) <= 1.0);
        }
        prop_assert!(e.scalar_at(0) < 1.0);
    }
}

#[test]
fn exponential_converges_to_e_on_refined_grids() {
    for h in [1e-2, 1e-3] {
        let ts = Arc::new(TimeScaleSpec::uniform(0.0, 1.0, h).build().unwrap());
        let e = nabla_exp(&ts, 1.0, 0).unwrap();
        let err = (e.scalar_at(ts.len() - 1) - std::f64::consts::E).abs();
        assert!(err <= 3.0 * h, "h = {h}: error {err}");
        // product-form closed value on a uniform grid
        let closed = (1.0 - h).powi(-((ts.len() - 1) as i32));
        assert!((e.scalar_at(ts.len() - 1) - closed).abs() <= 1e-12 * closed);
    }
}

#[test]
fn isolated_points_and_intervals_mix() {
    let ts = Arc::new(
        FiniteTimeScale::from_points(vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.7, 0.9, 1.0]).unwrap(),
    );
    let f = GridFunction::from_fn(ts.clone(), 1, |t, out| out[0] = t * t);
    let df = nabla_derivative(&f);
    // (t^2)^nabla = t + rho(t)
    for i in ts.kappa_indices() {
        let expect = ts.points()[i] + ts.points()[i - 1];
        assert!((df.scalar_at(i) - expect).abs() <= 1e-14);
    }
}
