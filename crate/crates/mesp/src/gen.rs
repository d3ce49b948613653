//! Seeded random instances and side constraints.

use mesp_core::heuristics::{greedy_construct, local_search};
use mesp_core::oracle::{binomial, solve_exact};
use mesp_core::{Constraints, Instance, Matrix, SymMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

/// Enumeration is used for `x*` up to this many subsets.
const EXACT_LIMIT: u128 = 200_000;
const MAX_ROW_DRAWS: usize = 100;
const MAX_SET_DRAWS: usize = 100;

/// `G Gᵀ + δ I` with `G` an `n × n` matrix of uniform `[-1, 1]` entries.
pub fn random_covariance(rng: &mut ChaCha8Rng, n: usize, delta: f64) -> SymMatrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut c = g.matmul(&g.transpose());
    for i in 0..n {
        c[(i, i)] += delta;
    }
    SymMatrix::new(c).expect("finite by construction")
}

/// The best set known for the unconstrained problem: exact when small,
/// otherwise greedy plus local search.
pub fn best_known_set(inst: &Instance) -> Result<Vec<usize>, Error> {
    let plain = inst.with_constraints(None)?;
    if binomial(plain.n(), plain.s()) <= EXACT_LIMIT {
        Ok(solve_exact(&plain)?.optima[0].clone())
    } else {
        Ok(local_search(&plain, &greedy_construct(&plain)?).set)
    }
}

/// `m` rows with coefficients uniform in `{-2, …, 2}` and `b = aᵀx* - 1`,
/// the largest integer right-hand side that cuts off `x*`. All-zero rows are
/// redrawn.
pub fn side_constraints(rng: &mut ChaCha8Rng, n: usize, m: usize, best: &[usize]) -> Result<Constraints, Error> {
    let mut a = Vec::with_capacity(m * n);
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        let row = (0..MAX_ROW_DRAWS)
            .map(|_| (0..n).map(|_| rng.random_range(-2i32..=2) as f64).collect::<Vec<f64>>())
            .find(|row| row.iter().any(|&v| v != 0.0))
            .ok_or_else(|| Error::Usage("could not draw a nonzero constraint row".into()))?;
        b.push(best.iter().map(|&j| row[j]).sum::<f64>() - 1.0);
        a.extend(row);
    }
    Ok(Constraints::new(Matrix::from_vec(m, n, a)?, b)?)
}

/// Appends `m` generated rows to `inst`, redrawing the whole block until
/// the constrained problem stays feasible.
pub fn gen_side_constraints(inst: &Instance, m: usize, rng: &mut ChaCha8Rng) -> Result<Instance, Error> {
    if m == 0 {
        return Ok(inst.clone());
    }
    let best = best_known_set(inst)?;
    for _ in 0..MAX_SET_DRAWS {
        let fresh = side_constraints(rng, inst.n(), m, &best)?;
        let cons = match inst.constraints() {
            Some(old) => old.stacked(&fresh)?,
            None => fresh,
        };
        let candidate = inst.with_constraints(Some(cons))?;
        if greedy_construct(&candidate).is_ok() {
            return Ok(candidate);
        }
    }
    Err(Error::Core(mesp_core::Error::Infeasible))
}
