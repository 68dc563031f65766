//! Transportation simplex on a dense m×n cost matrix.
//!
//! The basis is a spanning tree of the bipartite graph rows ∪ cols with
//! m + n − 1 cells. Pricing is block-search Dantzig; during a run of
//! degenerate pivots it switches to Bland's rule (smallest entering index,
//! smallest leaving index on ties), which cannot cycle.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("supplies sum to {supply} but demands to {demand}")]
    Infeasible { supply: f64, demand: f64 },
    #[error("degenerate pivot guard exceeded after {0} degenerate pivots")]
    DegenerateCycle(usize),
    #[error("iteration limit {0} exceeded")]
    IterationLimit(usize),
    #[error("cost matrix has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite or negative input")]
    BadInput,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Basic cells `(row, col, flow)`, zero flows included.
    pub basis: Vec<(usize, usize, f64)>,
    /// Row duals u and column duals w with u_i + w_j ≤ C_ij.
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub iterations: usize,
    pub degenerate_pivots: usize,
}

#[derive(Clone, Copy)]
struct Cell {
    i: usize,
    j: usize,
    flow: f64,
}

struct Tree {
    m: usize,
    adj: Vec<Vec<(usize, usize)>>, // node -> (neighbour node, basis slot)
    parent: Vec<usize>,
    parent_slot: Vec<usize>,
    depth: Vec<usize>,
    pot: Vec<f64>, // u for rows, w for cols
    queue: Vec<usize>,
}

impl Tree {
    fn new(m: usize, n: usize) -> Self {
        let k = m + n;
        Self {
            m,
            adj: vec![Vec::new(); k],
            parent: vec![usize::MAX; k],
            parent_slot: vec![usize::MAX; k],
            depth: vec![0; k],
            pot: vec![0.0; k],
            queue: Vec::with_capacity(k),
        }
    }

    /// Rebuilds adjacency and potentials from the basis.
    fn rebuild(&mut self, basis: &[Cell], cost: &[f64], n: usize) {
        for a in &mut self.adj {
            a.clear();
        }
        for (s, c) in basis.iter().enumerate() {
            self.adj[c.i].push((self.m + c.j, s));
            self.adj[self.m + c.j].push((c.i, s));
        }
        self.parent.fill(usize::MAX);
        self.queue.clear();
        self.queue.push(0);
        self.parent[0] = 0;
        self.depth[0] = 0;
        self.pot[0] = 0.0;
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            for k in 0..self.adj[v].len() {
                let (nb, s) = self.adj[v][k];
                if self.parent[nb] != usize::MAX {
                    continue;
                }
                self.parent[nb] = v;
                self.parent_slot[nb] = s;
                self.depth[nb] = self.depth[v] + 1;
                let c = basis[s];
                let cij = cost[c.i * n + c.j];
                // u_i + w_j = C_ij on basic cells
                self.pot[nb] = cij - self.pot[v];
                self.queue.push(nb);
            }
        }
        debug_assert_eq!(self.queue.len(), self.adj.len(), "basis is not a spanning tree");
    }

    /// Basis slots on the tree path from col node `b` to row node `a`,
    /// ordered from `b`'s end.
    fn path(&self, a: usize, b: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut from_a = Vec::new();
        let (mut x, mut y) = (a, b);
        while self.depth[x] > self.depth[y] {
            from_a.push(self.parent_slot[x]);
            x = self.parent[x];
        }
        while self.depth[y] > self.depth[x] {
            out.push(self.parent_slot[y]);
            y = self.parent[y];
        }
        while x != y {
            from_a.push(self.parent_slot[x]);
            x = self.parent[x];
            out.push(self.parent_slot[y]);
            y = self.parent[y];
        }
        out.extend(from_a.into_iter().rev());
    }
}

/// Minimum-cost greedy start that always yields an (m+n−1)-cell tree.
fn initial_basis(cost: &[f64], m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Vec<Cell> {
    let mut order: Vec<usize> = (0..m * n).collect();
    order.sort_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(a.cmp(&b)));
    let mut sa = supply.to_vec();
    let mut sb = demand.to_vec();
    let mut row_open = vec![true; m];
    let mut col_open = vec![true; n];
    let (mut open_rows, mut open_cols) = (m, n);
    let mut basis = Vec::with_capacity(m + n - 1);
    for idx in order {
        if open_rows == 0 || open_cols == 0 {
            break;
        }
        let (i, j) = (idx / n, idx % n);
        if !row_open[i] || !col_open[j] {
            continue;
        }
        let q = sa[i].min(sb[j]).max(0.0);
        basis.push(Cell { i, j, flow: q });
        sa[i] -= q;
        sb[j] -= q;
        let close_row = if open_rows == 1 && open_cols == 1 {
            row_open[i] = false;
            col_open[j] = false;
            open_rows = 0;
            open_cols = 0;
            continue;
        } else if open_rows == 1 {
            false
        } else if open_cols == 1 {
            true
        } else {
            sa[i] <= sb[j]
        };
        if close_row {
            row_open[i] = false;
            open_rows -= 1;
        } else {
            col_open[j] = false;
            open_cols -= 1;
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);
    basis
}

/// Solves min Σ C_ij x_ij subject to row sums `supply` and column sums `demand`.
///
/// Totals may differ by roundoff; the greedy start absorbs the difference
/// in the last cell.
pub fn solve(cost: &[f64], m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Result<LpSolution, SimplexError> {
    if cost.len() != m * n {
        return Err(SimplexError::Shape { expected: m * n, got: cost.len() });
    }
    if supply.len() != m || demand.len() != n {
        return Err(SimplexError::Shape { expected: m + n, got: supply.len() + demand.len() });
    }
    if cost.iter().chain(supply).chain(demand).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(SimplexError::BadInput);
    }
    let ts = crate::numeric::fsum(supply.iter().copied());
    let td = crate::numeric::fsum(demand.iter().copied());
    if (ts - td).abs() > 1e-12 * (1.0 + ts.max(td)) || m == 0 || n == 0 {
        if m == 0 && n == 0 || (ts == 0.0 && td == 0.0) {
            return Ok(LpSolution { basis: Vec::new(), u: vec![0.0; m], w: vec![0.0; n], iterations: 0, degenerate_pivots: 0 });
        }
        return Err(SimplexError::Infeasible { supply: ts, demand: td });
    }

    let mut basis = initial_basis(cost, m, n, supply, demand);
    let mut tree = Tree::new(m, n);
    let cmax = cost.iter().fold(0.0f64, |a, &b| a.max(b));
    let eps = 1e-12 * (1.0 + cmax);
    let cells = m * n;
    let block = ((cells as f64).sqrt() as usize).max(32).min(cells);
    let mut cursor = 0usize;
    let mut degenerate_streak = 0usize;
    let mut degenerate_total = 0usize;
    let streak_for_bland = 2 * (m + n);
    let streak_limit = 10 * cells + 10_000;
    let max_iter = 100 * cells + 100_000;
    let mut path = Vec::new();
    let mut iterations = 0;

    loop {
        tree.rebuild(&basis, cost, n);
        let reduced = |idx: usize, tree: &Tree| {
            let (i, j) = (idx / n, idx % n);
            cost[idx] - tree.pot[i] - tree.pot[m + j]
        };

        // pricing
        let entering = if degenerate_streak >= streak_for_bland {
            (0..cells).find(|&idx| reduced(idx, &tree) < -eps)
        } else {
            let mut found = None;
            let mut scanned = 0;
            while scanned < cells && found.is_none() {
                let mut best = -eps;
                let len = block.min(cells - scanned);
                for k in 0..len {
                    let idx = (cursor + k) % cells;
                    let d = reduced(idx, &tree);
                    if d < best {
                        best = d;
                        found = Some(idx);
                    }
                }
                cursor = (cursor + len) % cells;
                scanned += len;
            }
            found
        };
        let Some(enter) = entering else { break };

        iterations += 1;
        if iterations > max_iter {
            return Err(SimplexError::IterationLimit(max_iter));
        }

        let (ei, ej) = (enter / n, enter % n);
        tree.path(ei, m + ej, &mut path);
        // path[0] touches column ej; odd positions (0-based even) lose flow
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &s) in path.iter().enumerate() {
            if k % 2 == 0 {
                let c = basis[s];
                let key = c.i * n + c.j;
                if c.flow < theta || (c.flow == theta && key < basis[leave].i * n + basis[leave].j) {
                    theta = c.flow;
                    leave = s;
                }
            }
        }
        let theta = theta.max(0.0);
        if theta == 0.0 {
            degenerate_streak += 1;
            degenerate_total += 1;
            if degenerate_streak > streak_limit {
                return Err(SimplexError::DegenerateCycle(degenerate_streak));
            }
        } else {
            degenerate_streak = 0;
        }
        for (k, &s) in path.iter().enumerate() {
            let f = &mut basis[s].flow;
            if k % 2 == 0 {
                *f = (*f - theta).max(0.0);
            } else {
                *f += theta;
            }
        }
        basis[leave] = Cell { i: ei, j: ej, flow: theta };
    }

    let u = tree.pot[..m].to_vec();
    let w = tree.pot[m..].to_vec();
    Ok(LpSolution {
        basis: basis.iter().map(|c| (c.i, c.j, c.flow)).collect(),
        u,
        w,
        iterations,
        degenerate_pivots: degenerate_total,
    })
}
