//! Relaxation bounds against exhaustive enumeration.

mod common;

use common::*;
use mesp_core::oracle::solve_exact;
use mesp_core::relax::{self, Method, SolveOptions};
use mesp_core::scaling::{optimize_g_scaling, optimize_o_scaling, ScalingOptions};
use mesp_core::ScalingVector;

#[test]
fn bounds_dominate_the_optimum() {
    let mut r = rng(21);
    for trial in 0..24 {
        let n = 4 + trial % 4;
        let s = 1 + trial % (n - 1);
        let m = if trial % 2 == 0 { 0 } else { 1 + trial % 3 };
        let inst = random_instance(&mut r, n, s, m);
        let z = solve_exact(&inst).unwrap().z;
        let e = ScalingVector::ones(n);
        for method in Method::ALL {
            let b = relax::solve(method, &inst, &e, &SolveOptions::default()).unwrap();
            assert!(b.upper_bound >= z - 1e-6, "{method} n={n} s={s}: {} < {z}", b.upper_bound);
            let g = optimize_g_scaling(method, &inst, &e, &ScalingOptions::with_steps(5)).unwrap();
            assert!(g.best_value >= z - 1e-6, "g-scaled {method}: {} < {z}", g.best_value);
        }
        let o = optimize_o_scaling(Method::Linx, &inst, 1.0, &ScalingOptions::default()).unwrap();
        assert!(o.value >= z - 1e-6);
    }
}

#[test]
fn scaled_linx_is_ordered() {
    let mut r = rng(22);
    for trial in 0..8 {
        let n = 5 + trial % 3;
        let inst = random_instance(&mut r, n, n / 2, 2);
        let e = ScalingVector::ones(n);
        let plain = relax::solve(Method::Linx, &inst, &e, &SolveOptions::with_tol(1e-8)).unwrap();
        let o = optimize_o_scaling(Method::Linx, &inst, 1.0, &ScalingOptions::default()).unwrap();
        let start = ScalingVector::uniform(n, o.gamma).unwrap();
        let g = optimize_g_scaling(Method::Linx, &inst, &start, &ScalingOptions::with_steps(20)).unwrap();
        assert!(o.value <= plain.upper_bound + 1e-8);
        assert!(g.best_value <= o.value + 1e-8);
    }
}

#[test]
fn complement_identity_on_the_optimum() {
    let mut r = rng(23);
    for trial in 0..10 {
        let n = 3 + trial % 5;
        let s = 1 + trial % (n - 1);
        let inst = random_instance(&mut r, n, s, 0);
        let (comp, offset) = inst.complement().unwrap();
        let z = solve_exact(&inst).unwrap().z;
        let zc = solve_exact(&comp).unwrap().z;
        assert!((z - zc - offset).abs() < 1e-9, "{z} vs {zc} + {offset}");
    }
}

#[test]
fn ddfact_stationary_in_scaling_at_ones() {
    let mut r = rng(24);
    for _ in 0..5 {
        let inst = random_instance(&mut r, 7, 3, 0);
        let g = optimize_g_scaling(Method::Ddfact, &inst, &ScalingVector::ones(7), &ScalingOptions::with_steps(0)).unwrap();
        assert!(g.gradient.iter().all(|v| v.abs() <= 1e-4), "{:?}", g.gradient);
    }
}
