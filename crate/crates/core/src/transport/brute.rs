//! Exact small-instance oracle: enumerates the basic feasible solutions
//! (spanning-tree bases) of the transportation polytope.
//!
//! A spanning-tree solution is determined by repeatedly peeling a leaf and
//! sending its whole residual mass to its unique neighbour. Peeling always
//! the smallest-labelled leaf (Prüfer order) makes every tree appear once:
//! when leaf L is peeled, every active node with a smaller label is put on
//! an obligation list — it must stop being a leaf-candidate until it has
//! served as the neighbour of some later peel. Branch-and-bound prunes with
//! a min-cost lower bound. This code path shares nothing with the simplex.

use thiserror::Error;

/// Largest side (◊ included) the oracle accepts.
pub const MAX_SIDE: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BruteError {
    #[error("oracle size cap exceeded: {rows}x{cols} (max {MAX_SIDE} per side)")]
    SizeCap { rows: usize, cols: usize },
    #[error("no feasible spanning-tree solution found")]
    NoVertex,
}

struct Search<'a> {
    m: usize,
    cost: &'a [f64],
    n: usize,
    res: Vec<f64>,
    tol: f64,
    best: f64,
}

impl Search<'_> {
    fn c(&self, u: usize, v: usize) -> f64 {
        if u < self.m {
            self.cost[u * self.n + (v - self.m)]
        } else {
            self.cost[v * self.n + (u - self.m)]
        }
    }

    fn rec(&mut self, active: &[usize], obliged: u32, acc: f64) {
        let rows: Vec<usize> = active.iter().copied().filter(|&u| u < self.m).collect();
        let cols: Vec<usize> = active.iter().copied().filter(|&u| u >= self.m).collect();
        if rows.len() == 1 || cols.len() == 1 {
            let (centre, leaves) = if rows.len() == 1 { (rows[0], &cols) } else { (cols[0], &rows) };
            if leaves.iter().any(|&u| obliged & (1 << u) != 0) {
                return;
            }
            if leaves.len() == 1 && obliged & (1 << centre) != 0 {
                return;
            }
            let v = acc + leaves.iter().map(|&u| self.c(centre, u) * self.res[u]).sum::<f64>();
            if v < self.best {
                self.best = v;
            }
            return;
        }
        if obliged.count_ones() as usize > active.len() - 2 {
            return;
        }
        let lb_rows: f64 = rows
            .iter()
            .map(|&u| self.res[u].max(0.0) * cols.iter().map(|&v| self.c(u, v)).fold(f64::INFINITY, f64::min))
            .sum();
        let lb_cols: f64 = cols
            .iter()
            .map(|&v| self.res[v].max(0.0) * rows.iter().map(|&u| self.c(u, v)).fold(f64::INFINITY, f64::min))
            .sum();
        if acc + lb_rows.max(lb_cols) >= self.best {
            return;
        }
        // candidate moves, cheapest first
        let mut moves: Vec<(f64, usize, usize)> = Vec::new();
        for &l in active {
            if obliged & (1 << l) != 0 {
                continue;
            }
            let opp = if l < self.m { &cols } else { &rows };
            for &nb in opp {
                if self.res[l] <= self.res[nb] + self.tol {
                    moves.push((self.c(l, nb) * self.res[l], l, nb));
                }
            }
        }
        moves.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (step, l, nb) in moves {
            let smaller = active.iter().filter(|&&u| u < l).fold(0u32, |acc, &u| acc | (1 << u));
            let next_obliged = (obliged | smaller) & !(1 << nb);
            let rest: Vec<usize> = active.iter().copied().filter(|&u| u != l).collect();
            let r = self.res[l];
            self.res[nb] -= r;
            self.rec(&rest, next_obliged, acc + step);
            self.res[nb] += r;
        }
    }
}

/// Optimal value of the transportation problem with a dense row-major cost.
pub fn brute_force_matrix(cost: &[f64], supply: &[f64], demand: &[f64]) -> Result<f64, BruteError> {
    let (m, n) = (supply.len(), demand.len());
    if m > MAX_SIDE || n > MAX_SIDE {
        return Err(BruteError::SizeCap { rows: m, cols: n });
    }
    if m == 0 || n == 0 {
        return Ok(0.0);
    }
    let total: f64 = supply.iter().sum();
    let mut s = Search {
        m,
        cost,
        n,
        res: supply.iter().chain(demand).copied().collect(),
        tol: 1e-12 * (1.0 + total),
        best: f64::INFINITY,
    };
    let all: Vec<usize> = (0..m + n).collect();
    s.rec(&all, 0, 0.0);
    if s.best.is_finite() {
        Ok(s.best)
    } else {
        Err(BruteError::NoVertex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_hand_enumeration() {
        let v = brute_force_matrix(&[1.0, 2.0, 3.0, 1.0], &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn size_cap() {
        let c = vec![0.0; 8];
        assert!(matches!(
            brute_force_matrix(&c, &[1.0; 8], &[8.0]),
            Err(BruteError::SizeCap { .. })
        ));
    }

    #[test]
    fn agrees_with_exhaustive_permutations_on_assignment() {
        // unit masses: optimum is an assignment, checkable by permutations
        let n = 5;
        let c: Vec<f64> = (0..n * n).map(|k| ((k * 7919 % 23) as f64).sqrt()).collect();
        let v = brute_force_matrix(&c, &[1.0; 5], &[1.0; 5]).unwrap();
        let mut best = f64::INFINITY;
        let mut p: Vec<usize> = (0..n).collect();
        permute(&mut p, 0, &mut |p| {
            best = best.min((0..n).map(|i| c[i * n + p[i]]).sum());
        });
        assert!((v - best).abs() < 1e-12);
    }

    fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }
}
