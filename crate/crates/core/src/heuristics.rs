//! Lower bounds: greedy forward selection with a feasibility look-ahead,
//! then best-improvement swap local search.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::{Constraints, Instance};
use crate::linalg::{Cholesky, Matrix};
use crate::math::ln;
use crate::tol;

/// Node budget of one completion search before it gives up optimistically.
const COMPLETION_NODE_BUDGET: usize = 200_000;
const MAX_SWAP_ROUNDS: usize = 10_000;

/// A candidate solution and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    /// Selected indices, ascending.
    pub set: Vec<usize>,
    /// `ldet C[S,S]`, `-∞` when singular.
    pub value: f64,
    pub feasible: bool,
}

impl Incumbent {
    pub fn from_set(inst: &Instance, set: &[usize]) -> Self {
        let mut set = set.to_vec();
        set.sort_unstable();
        Incumbent { value: inst.subset_ldet(&set), feasible: inst.is_feasible_set(&set), set }
    }

    /// The 0/1 indicator vector of the set.
    pub fn indicator(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for &i in &self.set {
            x[i] = 1.0;
        }
        x
    }
}

/// Greedy forward selection: each step adds the index with the largest
/// conditional variance given the current set (the largest increase of
/// `ldet`), among indices whose addition still admits a feasible
/// completion. Ties go to the lowest index.
pub fn greedy_construct(inst: &Instance) -> Result<Incumbent> {
    let n = inst.n();
    let s = inst.s();
    let c = inst.covariance().as_matrix();
    let scale = (0..n).fold(0.0_f64, |m, i| m.max(c[(i, i)]));
    let singular = tol::PD_RELATIVE * scale;

    let mut residual: Vec<f64> = (0..n).map(|i| c[(i, i)]).collect();
    // Columns of the partial pivoted Cholesky factor, one per chosen index.
    let mut factor_cols: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut chosen: Vec<usize> = Vec::with_capacity(s);
    let mut in_set = vec![false; n];
    let mut value = 0.0;

    for _ in 0..s {
        let mut order: Vec<usize> = (0..n).filter(|&j| !in_set[j]).collect();
        let score = |j: usize| if residual[j] > singular { ln(residual[j]) } else { f64::NEG_INFINITY };
        order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
        let pick = order.into_iter().find(|&j| {
            let mut trial = chosen.clone();
            trial.push(j);
            completion_exists(inst.constraints(), &trial, n, s)
        });
        let Some(p) = pick else {
            return Err(Error::Infeasible);
        };
        value += score(p);
        let pivot = residual[p];
        let mut col = vec![0.0; n];
        if pivot > singular {
            let root = crate::math::sqrt(pivot);
            for j in 0..n {
                if in_set[j] || j == p {
                    continue;
                }
                let mut v = c[(j, p)];
                for prev in &factor_cols {
                    v -= prev[j] * prev[p];
                }
                col[j] = v / root;
                residual[j] -= col[j] * col[j];
            }
        }
        factor_cols.push(col);
        in_set[p] = true;
        chosen.push(p);
    }
    let inc = Incumbent::from_set(inst, &chosen);
    if !inc.feasible {
        return Err(Error::Infeasible);
    }
    debug_assert!(value == f64::NEG_INFINITY || (value - inc.value).abs() <= 1e-6 * (1.0 + value.abs()));
    Ok(inc)
}

/// Whether `partial` extends to a feasible `s`-set. Exhausting the search
/// budget counts as success; the final set is checked by the caller.
fn completion_exists(constraints: Option<&Constraints>, partial: &[usize], n: usize, s: usize) -> bool {
    let Some(cons) = constraints else {
        return true;
    };
    let a = cons.a();
    let m = cons.rows();
    let mut sums: Vec<f64> = (0..m).map(|i| partial.iter().map(|&j| a[(i, j)]).sum()).collect();
    let mut rest: Vec<usize> = (0..n).filter(|j| !partial.contains(j)).collect();
    // Most slack-friendly columns first so feasible completions surface early.
    rest.sort_by(|&p, &q| column_sum(a, p).total_cmp(&column_sum(a, q)).then(p.cmp(&q)));
    let mut budget = COMPLETION_NODE_BUDGET;
    match dfs(a, cons.b(), &rest, 0, s - partial.len(), &mut sums, &mut budget) {
        Some(found) => found,
        None => true,
    }
}

fn column_sum(a: &Matrix, j: usize) -> f64 {
    (0..a.rows()).map(|i| a[(i, j)]).sum()
}

/// Depth-first search choosing `need` more columns from `rest[pos..]`;
/// `None` when the node budget runs out.
fn dfs(
    a: &Matrix,
    b: &[f64],
    rest: &[usize],
    pos: usize,
    need: usize,
    sums: &mut [f64],
    budget: &mut usize,
) -> Option<bool> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let m = b.len();
    if need == 0 {
        return Some((0..m).all(|i| sums[i] <= b[i] + tol::FEASIBILITY));
    }
    if rest.len() - pos < need {
        return Some(false);
    }
    // Each row's sum can at best grow by its `need` smallest remaining entries.
    for i in 0..m {
        let mut vals: Vec<f64> = rest[pos..].iter().map(|&j| a[(i, j)]).collect();
        vals.sort_by(f64::total_cmp);
        let least: f64 = vals[..need].iter().sum();
        if sums[i] + least > b[i] + tol::FEASIBILITY {
            return Some(false);
        }
    }
    let mut exhausted = false;
    for k in pos..=rest.len() - need {
        let j = rest[k];
        for i in 0..m {
            sums[i] += a[(i, j)];
        }
        let r = dfs(a, b, rest, k + 1, need - 1, sums, budget);
        for i in 0..m {
            sums[i] -= a[(i, j)];
        }
        match r {
            Some(true) => return Some(true),
            Some(false) => {}
            None => {
                exhausted = true;
                break;
            }
        }
    }
    if exhausted {
        None
    } else {
        Some(false)
    }
}

/// Best-improvement swap local search from a feasible start.
pub fn local_search(inst: &Instance, start: &Incumbent) -> Incumbent {
    local_search_locked(inst, start, &[])
}

/// [`local_search`] that never swaps out the indices in `locked`.
pub fn local_search_locked(inst: &Instance, start: &Incumbent, locked: &[usize]) -> Incumbent {
    let n = inst.n();
    let mut cur = Incumbent::from_set(inst, &start.set);
    let cons = inst.constraints();
    for _ in 0..MAX_SWAP_ROUNDS {
        let sums: Vec<f64> = cons.map_or(Vec::new(), |c| {
            (0..c.rows()).map(|i| cur.set.iter().map(|&j| c.a()[(i, j)]).sum()).collect()
        });
        let feasible_swap = |out: usize, inn: usize| {
            cons.map_or(true, |c| {
                (0..c.rows()).all(|i| sums[i] - c.a()[(i, out)] + c.a()[(i, inn)] <= c.b()[i] + tol::FEASIBILITY)
            })
        };
        let outside: Vec<usize> = (0..n).filter(|j| cur.set.binary_search(j).is_err()).collect();
        let best = match swap_gains(inst, &cur) {
            Some(gains) => pick_swap(&cur, &outside, locked, &feasible_swap, |pi, qi| gains[(pi, qi)]),
            None => pick_swap(&cur, &outside, locked, &feasible_swap, |pi, qi| {
                let mut trial = cur.set.clone();
                trial[pi] = outside[qi];
                inst.subset_ldet(&trial) - cur.value
            }),
        };
        let Some((pi, qi)) = best else {
            break;
        };
        let mut next = cur.set.clone();
        next[pi] = outside[qi];
        let next = Incumbent::from_set(inst, &next);
        if !(next.value > cur.value) {
            break;
        }
        cur = next;
    }
    cur
}

/// Lowest `(position in S, position outside)` pair with the largest gain
/// above the improvement threshold.
fn pick_swap(
    cur: &Incumbent,
    outside: &[usize],
    locked: &[usize],
    feasible_swap: &impl Fn(usize, usize) -> bool,
    gain: impl Fn(usize, usize) -> f64,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (pi, &out) in cur.set.iter().enumerate() {
        if locked.contains(&out) {
            continue;
        }
        for (qi, &inn) in outside.iter().enumerate() {
            let g = gain(pi, qi);
            if !(g > tol::LOCAL_SEARCH_IMPROVEMENT) || !feasible_swap(out, inn) {
                continue;
            }
            if best.map_or(true, |(_, _, bg)| g > bg) {
                best = Some((pi, qi, g));
            }
        }
    }
    best.map(|(pi, qi, _)| (pi, qi))
}

/// `log det C[S-i+j] - log det C[S]` for every position `i` in `S` and
/// every `j` outside, from `M = C[S,S]⁻¹`:
/// the determinant ratio is `Mᵢᵢ·(Cⱼⱼ - cⱼᵀ M cⱼ) + (M cⱼ)ᵢ²`.
fn swap_gains(inst: &Instance, cur: &Incumbent) -> Option<Matrix> {
    let c = inst.covariance();
    let set = &cur.set;
    let chol = Cholesky::factor(&c.principal(set))?;
    let m = chol.inverse();
    let k = set.len();
    let outside: Vec<usize> = (0..inst.n()).filter(|j| set.binary_search(j).is_err()).collect();
    let mut gains = Matrix::zeros(k, outside.len());
    for (qi, &j) in outside.iter().enumerate() {
        let cj: Vec<f64> = set.iter().map(|&i| c[(i, j)]).collect();
        let w = m.matvec(&cj);
        let cond = c[(j, j)] - crate::math::dot(&cj, &w);
        for pi in 0..k {
            let ratio = m[(pi, pi)] * cond + w[pi] * w[pi];
            gains[(pi, qi)] = if ratio > 0.0 { ln(ratio) } else { f64::NEG_INFINITY };
        }
    }
    Some(gains)
}
