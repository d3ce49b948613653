#![allow(dead_code)]

use mesp_core::oracle::solve_exact;
use mesp_core::{Constraints, Instance, Matrix, ScalingVector, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `G Gᵀ + δ I` with `G` uniform in `[-1, 1]`.
pub fn random_cov(rng: &mut ChaCha8Rng, n: usize, delta: f64) -> SymMatrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut c = g.matmul(&g.transpose());
    for i in 0..n {
        c[(i, i)] += delta;
    }
    SymMatrix::new(c).unwrap()
}

/// Rows `a ∈ {-2..2}ⁿ`, `b = aᵀx* - 1`, each cutting off `x*`; retries until
/// the instance stays feasible.
pub fn constrained(rng: &mut ChaCha8Rng, c: SymMatrix, s: usize, m: usize) -> Instance {
    let plain = Instance::new(c.clone(), s, None).unwrap();
    let best = solve_exact(&plain).unwrap().optima[0].clone();
    let n = c.order();
    for _ in 0..200 {
        let mut rows = Vec::new();
        let mut b = Vec::new();
        for _ in 0..m {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-2..=2) as f64).collect();
            b.push(best.iter().map(|&j| a[j]).sum::<f64>() - 1.0);
            rows.extend(a);
        }
        let cons = Constraints::new(Matrix::from_vec(m, n, rows).unwrap(), b).unwrap();
        let inst = Instance::new(c.clone(), s, Some(cons)).unwrap();
        if solve_exact(&inst).is_ok() {
            return inst;
        }
    }
    plain
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, s: usize, m: usize) -> Instance {
    let c = random_cov(rng, n, 0.1);
    if m == 0 {
        Instance::new(c, s, None).unwrap()
    } else {
        constrained(rng, c, s, m)
    }
}

/// A point with `eᵀx = s` and every coordinate in `[0.05, 0.95]`.
pub fn random_interior(rng: &mut ChaCha8Rng, n: usize, s: usize) -> Vec<f64> {
    let base = s as f64 / n as f64;
    let mut dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = dir.iter().sum::<f64>() / n as f64;
    dir.iter_mut().for_each(|v| *v -= mean);
    let room = (base - 0.05).min(0.95 - base);
    let big = dir.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let scale = rng.random_range(0.0..1.0) * room / big;
    dir.iter().map(|v| base + scale * v).collect()
}

pub fn random_scaling(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> ScalingVector {
    ScalingVector::from_log((0..n).map(|_| rng.random_range(-spread..spread)).collect()).unwrap()
}

/// Central difference of `f` along coordinate `i`.
pub fn central(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[i] += h;
    m[i] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
