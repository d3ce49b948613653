mod common;

use common::*;
use mesp_core::fixing::{iterate_fixing, FixOptions, ScalingMode};
use mesp_core::heuristics::{greedy_construct, local_search};
use mesp_core::oracle::solve_exact;
use mesp_core::tol;

#[test]
fn fixes_agree_with_every_optimum() {
    let mut r = rng(31);
    let mut fixed = 0;
    for trial in 0..12 {
        let n = 5 + trial % 4;
        let s = 2 + trial % (n - 3);
        let m = if trial % 2 == 0 { 0 } else { 2 };
        let inst = random_instance(&mut r, n, s, m);
        let exact = solve_exact(&inst).unwrap();
        let inc = local_search(&inst, &greedy_construct(&inst).unwrap());
        for mode in [ScalingMode::O, ScalingMode::G] {
            let res = iterate_fixing(&inst, inc.value, Some(&inc), &FixOptions::with_mode(mode)).unwrap();
            for &j in &res.fix0 {
                assert!(exact.never_contains(j), "trial {trial}: {j} fixed to 0");
            }
            for &j in &res.fix1 {
                assert!(exact.always_contains(j), "trial {trial}: {j} fixed to 1");
            }
            for p in &res.probes {
                assert!(p.probe_bound < inc.value - tol::FIX_MARGIN);
            }
            assert!(res.lb >= inc.value);
            fixed += res.fixed_count();
        }
    }
    assert!(fixed > 0, "the suite should fix something");
}

#[test]
fn exact_lower_bound_on_unconstrained_instances() {
    let mut r = rng(32);
    for _ in 0..4 {
        let inst = random_instance(&mut r, 6, 3, 0);
        let exact = solve_exact(&inst).unwrap();
        let res = iterate_fixing(&inst, exact.z, None, &FixOptions::default()).unwrap();
        for &j in &res.fix0 {
            assert!(exact.never_contains(j));
        }
        for &j in &res.fix1 {
            assert!(exact.always_contains(j));
        }
        if let Some(v) = res.decided_value {
            assert!((v - exact.z).abs() < 1e-9);
        }
    }
}
