//! Exact CMESP by enumerating every `s`-subset.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::tol;

/// Default cap on the number of enumerated subsets.
pub const DEFAULT_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    /// Optimal `ldet C[S,S]`.
    pub z: f64,
    /// Every feasible set within [`tol::TIE`] of `z`, in lexicographic order.
    pub optima: Vec<Vec<usize>>,
    pub count_feasible: u64,
}

impl ExactResult {
    /// Whether every optimal set contains `j`.
    pub fn always_contains(&self, j: usize) -> bool {
        self.optima.iter().all(|s| s.contains(&j))
    }

    /// Whether no optimal set contains `j`.
    pub fn never_contains(&self, j: usize) -> bool {
        self.optima.iter().all(|s| !s.contains(&j))
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn solve_exact(inst: &Instance) -> Result<ExactResult> {
    solve_exact_with_budget(inst, DEFAULT_BUDGET)
}

pub fn solve_exact_with_budget(inst: &Instance, budget: u128) -> Result<ExactResult> {
    let (n, s) = (inst.n(), inst.s());
    let subsets = binomial(n, s);
    if subsets > budget {
        return Err(Error::BudgetExceeded { subsets, budget });
    }

    // Scored sets, kept while within the tie window of the running best.
    let mut best = f64::NEG_INFINITY;
    let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut count_feasible = 0u64;
    let mut comb: Vec<usize> = (0..s).collect();
    loop {
        if inst.is_feasible_set(&comb) {
            count_feasible += 1;
            let v = inst.subset_ldet(&comb);
            if v > best {
                best = v;
                candidates.retain(|(w, _)| *w >= best - tol::TIE);
            }
            if v >= best - tol::TIE || (v == f64::NEG_INFINITY && best == f64::NEG_INFINITY) {
                candidates.push((v, comb.clone()));
            }
        }
        if !next_combination(&mut comb, n) {
            break;
        }
    }
    if count_feasible == 0 {
        return Err(Error::Infeasible);
    }
    let optima = candidates
        .into_iter()
        .filter(|(v, _)| *v >= best - tol::TIE || best == f64::NEG_INFINITY)
        .map(|(_, set)| set)
        .collect();
    Ok(ExactResult { z: best, optima, count_feasible })
}

/// Advances to the next combination in lexicographic order.
pub(crate) fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in (i + 1)..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Constraints;
    use crate::linalg::{Matrix, SymMatrix};
    use alloc::vec;

    fn diag234() -> Instance {
        Instance::new(SymMatrix::diag(&[2.0, 3.0, 4.0]), 2, None).unwrap()
    }

    #[test]
    fn diagonal_optimum() {
        let r = solve_exact(&diag234()).unwrap();
        assert!((r.z - 12f64.ln()).abs() < 1e-12);
        assert_eq!(r.optima, vec![vec![1, 2]]);
        assert_eq!(r.count_feasible, 3);
    }

    #[test]
    fn symmetric_tie() {
        let c2 = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let r = solve_exact(&Instance::new(c2, 1, None).unwrap()).unwrap();
        assert!((r.z - 2f64.ln()).abs() < 1e-12);
        assert_eq!(r.optima, vec![vec![0], vec![1]]);
    }

    #[test]
    fn side_constraint_changes_optimum() {
        let cons = Constraints::new(Matrix::from_rows(&[&[0.0, 1.0, 1.0]]).unwrap(), vec![1.0]).unwrap();
        let inst = diag234().with_constraints(Some(cons)).unwrap();
        let r = solve_exact(&inst).unwrap();
        assert!((r.z - 8f64.ln()).abs() < 1e-12);
        assert_eq!(r.optima, vec![vec![0, 2]]);
        assert_eq!(r.count_feasible, 2);
    }

    #[test]
    fn infeasible_and_budget() {
        let cons = Constraints::new(Matrix::from_rows(&[&[1.0, 1.0, 1.0]]).unwrap(), vec![1.0]).unwrap();
        let inst = diag234().with_constraints(Some(cons)).unwrap();
        assert_eq!(solve_exact(&inst), Err(Error::Infeasible));
        assert!(matches!(solve_exact_with_budget(&diag234(), 2), Err(Error::BudgetExceeded { subsets: 3, .. })));
    }

    #[test]
    fn combinations_are_exhaustive() {
        let mut comb = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut comb, 5) {
            count += 1;
        }
        assert_eq!(count, binomial(5, 2));
        assert_eq!(binomial(63, 31), 916312070471295267);
    }
}
