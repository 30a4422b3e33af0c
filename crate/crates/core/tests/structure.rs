mod common;

use common::desk;
use lnl_core::assembly::assemble;
use lnl_core::energy::EnergyEvaluator;
use lnl_core::ModelKind;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn every_kind_is_exactly_symmetric() {
    for kind in ModelKind::ALL {
        let (grid, model) = desk(kind);
        let sys = assemble(&grid, &model).unwrap();
        assert_eq!(sys.a.asymmetry_max(), 0.0, "{}", kind.name());
        assert!(sys.a.nnz() > 0);
    }
}

#[test]
fn assembled_energy_matches_direct_sum() {
    for kind in ModelKind::ALL {
        let (grid, model) = desk(kind);
        let sys = assemble(&grid, &model).unwrap();
        let eval = EnergyEvaluator::quadratic(&grid, &model, &sys.dofmap);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let u: Vec<f64> = (0..sys.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (e1, e2) = (sys.energy(&u), eval.energy(&u));
            assert!(
                (e1 - e2).abs() <= 1e-12 * e1.abs().max(e2.abs()).max(1.0),
                "{}: {e1} vs {e2}",
                kind.name()
            );
        }
    }
}

#[test]
fn gradient_of_quadratic_energy_matches_differences() {
    for kind in ModelKind::ALL {
        let (grid, model) = desk(kind);
        let sys = assemble(&grid, &model).unwrap();
        let u: Vec<f64> = (0..sys.n()).map(|i| (i as f64 * 0.37).sin()).collect();
        let err = lnl_core::verify::gradient_check_quadratic(&sys, &u, 8, 1e-5, 3);
        assert!(err <= 1e-6, "{}: {err}", kind.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadratic_forms_are_nonnegative(k in 0usize..6, seed in any::<u64>()) {
        let kind = ModelKind::ALL[k];
        let (grid, model) = desk(kind);
        let sys = assemble(&grid, &model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..sys.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let uu: f64 = u.iter().map(|x| x * x).sum();
        prop_assert!(sys.a.quad_form(&u) >= -1e-12 * sys.a.max_abs() * uu);
    }

    #[test]
    fn quadratic_form_is_affine_in_kernel_amplitude(c in 0.1f64..10.0) {
        let (grid, model) = desk(ModelKind::ScalarSource);
        let with_c = |c: f64| {
            let mut m = model.clone();
            m.kernel.c = c;
            assemble(&grid, &m).unwrap()
        };
        let (q1, q2, qc) = (with_c(1.0), with_c(2.0), with_c(c));
        let u: Vec<f64> = (0..q1.n()).map(|i| (i as f64).cos()).collect();
        let (e1, e2, ec) = (q1.a.quad_form(&u), q2.a.quad_form(&u), qc.a.quad_form(&u));
        prop_assert!((ec - e1 - (c - 1.0) * (e2 - e1)).abs() <= 1e-10 * ec.abs().max(1.0));
    }
}
