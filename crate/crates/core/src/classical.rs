//! The finite commutative specialization: transport capacities on finite
//! sets via transportation linear programs, maximum bipartite matching and
//! minimum-weight vertex cover, plus the embedding into diagonal matrix
//! algebras.
//!
//! The three solvers here are deliberately independent of the conic engine
//! (and of each other): the transportation simplex, a dense two-phase
//! simplex on the covering dual, and a max-flow cut. Together with the
//! diagonal embedding they serve as oracles for the matrix-algebra solvers.

use crate::error::{Error, Result};
use crate::linalg::{Complex64, ComplexMatrix, HermitianOperator};
use crate::model::MeasuredAlgebra;

const MASS_TOL: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-11;

/// A finite transport instance: two probability vectors and a cost matrix
/// with entries in `[0, 1]` (the indicator of a support set, or a general
/// cost).
#[derive(Debug, Clone)]
pub struct ClassicalInstance {
    mu: Vec<f64>,
    nu: Vec<f64>,
    cost: Vec<f64>,
}

impl ClassicalInstance {
    pub fn new(mu: Vec<f64>, nu: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        if cost.len() != mu.len() * nu.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len() * nu.len(),
                got: cost.len(),
            });
        }
        for side in [&mu, &nu] {
            if side.is_empty() {
                return Err(Error::Precondition("empty marginal".into()));
            }
            if side.iter().any(|&p| p < -MASS_TOL) {
                return Err(Error::Precondition("negative probability mass".into()));
            }
            let total: f64 = side.iter().sum();
            if (total - 1.0).abs() > MASS_TOL {
                return Err(Error::Precondition(format!(
                    "marginal mass {total} differs from 1"
                )));
            }
        }
        if cost
            .iter()
            .any(|&c| !(-MASS_TOL..=1.0 + MASS_TOL).contains(&c))
        {
            return Err(Error::Precondition(
                "cost entries must lie in [0, 1]".into(),
            ));
        }
        Ok(Self { mu, nu, cost })
    }

    /// 0/1 instance from a support set over uniform or given marginals.
    pub fn from_support(mu: Vec<f64>, nu: Vec<f64>, support: &[(usize, usize)]) -> Result<Self> {
        let (n, m) = (mu.len(), nu.len());
        let mut cost = vec![0.0; n * m];
        for &(i, j) in support {
            if i >= n || j >= m {
                return Err(Error::Precondition(format!(
                    "support cell ({i}, {j}) out of range"
                )));
            }
            cost[i * m + j] = 1.0;
        }
        Self::new(mu, nu, cost)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn m(&self) -> usize {
        self.nu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.nu.len() + j]
    }

    fn is_binary(&self) -> bool {
        self.cost
            .iter()
            .all(|&c| c.abs() <= 1e-9 || (c - 1.0).abs() <= 1e-9)
    }
}

/// A feasible transport plan and its cost value.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    n: usize,
    m: usize,
    plan: Vec<f64>,
    pub value: f64,
}

impl TransportPlan {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.m + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.m).map(|j| self.entry(i, j)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| (0..self.n).map(|i| self.entry(i, j)).sum())
            .collect()
    }
}

/// Transportation simplex state: a spanning-tree basis over the bipartite
/// node set, pivoted with Bland's rule.
struct TransportSimplex<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    x: Vec<f64>,
    basis: Vec<bool>,
}

impl<'a> TransportSimplex<'a> {
    fn new(mu: &[f64], nu: &[f64], cost: &'a [f64]) -> Self {
        let (n, m) = (mu.len(), nu.len());
        let mut x = vec![0.0; n * m];
        let mut basis = vec![false; n * m];
        let mut a = mu.to_vec();
        let mut b = nu.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        // northwest-corner start: exactly n + m - 1 basic cells
        loop {
            let q = a[i].min(b[j]).max(0.0);
            x[i * m + j] = q;
            basis[i * m + j] = true;
            a[i] -= q;
            b[j] -= q;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if (a[i] <= b[j] && i < n - 1) || j == m - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            n,
            m,
            cost,
            x,
            basis,
        }
    }

    /// Potentials `u_i + v_j = c_ij` on basic cells, via traversal of the
    /// basis tree from row 0.
    fn potentials(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let (n, m) = (self.n, self.m);
        let mut u = vec![f64::NAN; n];
        let mut v = vec![f64::NAN; m];
        u[0] = 0.0;
        let mut stack = vec![(0usize, true)]; // (index, is_row)
        while let Some((idx, is_row)) = stack.pop() {
            if is_row {
                for j in 0..m {
                    if self.basis[idx * m + j] && v[j].is_nan() {
                        v[j] = self.cost[idx * m + j] - u[idx];
                        stack.push((j, false));
                    }
                }
            } else {
                for i in 0..n {
                    if self.basis[i * m + idx] && u[i].is_nan() {
                        u[i] = self.cost[i * m + idx] - v[idx];
                        stack.push((i, true));
                    }
                }
            }
        }
        if u.iter().any(|x| x.is_nan()) || v.iter().any(|x| x.is_nan()) {
            return Err(Error::Inconsistent(
                "transportation basis is not a spanning tree".into(),
            ));
        }
        Ok((u, v))
    }

    /// Unique alternating cycle created by the entering cell, as the list of
    /// cells with signs `+,-,+,-,...` starting at the entering cell.
    fn cycle(&self, ie: usize, je: usize) -> Result<Vec<(usize, usize)>> {
        // path from column node je back to row node ie over basic cells
        let (n, m) = (self.n, self.m);
        // parent pointers from a DFS on the basis tree
        let total = n + m;
        let node = |is_row: bool, idx: usize| if is_row { idx } else { n + idx };
        let mut parent = vec![usize::MAX; total];
        let mut parent_cell = vec![(0usize, 0usize); total];
        let start = node(false, je);
        let target = node(true, ie);
        let mut stack = vec![start];
        let mut seen = vec![false; total];
        seen[start] = true;
        while let Some(cur) = stack.pop() {
            if cur == target {
                break;
            }
            if cur < n {
                for j in 0..m {
                    let nxt = node(false, j);
                    if self.basis[cur * m + j] && !seen[nxt] {
                        seen[nxt] = true;
                        parent[nxt] = cur;
                        parent_cell[nxt] = (cur, j);
                        stack.push(nxt);
                    }
                }
            } else {
                let jcol = cur - n;
                for i in 0..n {
                    let nxt = node(true, i);
                    if self.basis[i * m + jcol] && !seen[nxt] {
                        seen[nxt] = true;
                        parent[nxt] = cur;
                        parent_cell[nxt] = (i, jcol);
                        stack.push(nxt);
                    }
                }
            }
        }
        if !seen[target] {
            return Err(Error::Inconsistent(
                "entering cell closes no cycle in the basis tree".into(),
            ));
        }
        let mut cells = vec![(ie, je)];
        let mut cur = target;
        while cur != start {
            cells.push(parent_cell[cur]);
            cur = parent[cur];
        }
        Ok(cells)
    }

    /// Minimize `sum x_ij cost_ij`; Bland's rule throughout.
    fn solve(&mut self) -> Result<()> {
        let (n, m) = (self.n, self.m);
        for _ in 0..50_000 {
            let (u, v) = self.potentials()?;
            let mut entering = None;
            'scan: for i in 0..n {
                for j in 0..m {
                    if !self.basis[i * m + j] && self.cost[i * m + j] - u[i] - v[j] < -PIVOT_TOL {
                        entering = Some((i, j));
                        break 'scan;
                    }
                }
            }
            let Some((ie, je)) = entering else {
                return Ok(());
            };
            let cells = self.cycle(ie, je)?;
            // odd positions in the alternating cycle lose mass
            let mut theta = f64::INFINITY;
            let mut leaving = None;
            for (pos, &(i, j)) in cells.iter().enumerate() {
                if pos % 2 == 1 {
                    let val = self.x[i * m + j];
                    if val < theta - PIVOT_TOL
                        || (val < theta + PIVOT_TOL
                            && leaving.map_or(true, |(li, lj)| (i, j) < (li, lj)))
                    {
                        theta = val;
                        leaving = Some((i, j));
                    }
                }
            }
            let (li, lj) = leaving.ok_or_else(|| {
                Error::Inconsistent("degenerate transportation cycle without leaving cell".into())
            })?;
            let theta = theta.max(0.0);
            for (pos, &(i, j)) in cells.iter().enumerate() {
                if pos % 2 == 0 {
                    self.x[i * m + j] += theta;
                } else {
                    self.x[i * m + j] -= theta;
                }
            }
            self.basis[ie * m + je] = true;
            self.basis[li * m + lj] = false;
            self.x[li * m + lj] = 0.0;
        }
        Err(Error::Inconsistent(
            "transportation simplex exceeded its pivot budget".into(),
        ))
    }
}

/// Maximize `sum plan * cost` over the transportation polytope.
pub fn ot_alpha(inst: &ClassicalInstance) -> Result<(f64, TransportPlan)> {
    let (n, m) = (inst.n(), inst.m());
    let negated: Vec<f64> = inst.cost.iter().map(|c| -c).collect();
    let mut simplex = TransportSimplex::new(&inst.mu, &inst.nu, &negated);
    simplex.solve()?;
    let value: f64 = (0..n * m).map(|k| simplex.x[k] * inst.cost[k]).sum();
    Ok((
        value,
        TransportPlan {
            n,
            m,
            plan: simplex.x,
            value,
        },
    ))
}

/// Dense tableau simplex (two-phase, Bland's rule) for
/// `min w.x  s.t.  A x >= b, x >= 0`.
struct DenseSimplex {
    rows: usize,
    cols: usize,
    tableau: Vec<Vec<f64>>, // rows x (cols + 1), last column is the RHS
    cost_row: Vec<f64>,     // cols + 1, last entry minus the objective
    basis: Vec<usize>,
    allowed: Vec<bool>,
}

impl DenseSimplex {
    fn pivot(&mut self, row: usize, col: usize) {
        let f = self.tableau[row][col];
        for x in self.tableau[row].iter_mut() {
            *x /= f;
        }
        for r in 0..self.rows {
            if r != row {
                let factor = self.tableau[r][col];
                if factor.abs() > 0.0 {
                    for k in 0..=self.cols {
                        self.tableau[r][k] -= factor * self.tableau[row][k];
                    }
                }
            }
        }
        let factor = self.cost_row[col];
        if factor.abs() > 0.0 {
            for k in 0..=self.cols {
                self.cost_row[k] -= factor * self.tableau[row][k];
            }
        }
        self.basis[row] = col;
    }

    fn run(&mut self) -> Result<()> {
        for _ in 0..200_000 {
            let mut entering = None;
            for j in 0..self.cols {
                if self.allowed[j] && self.cost_row[j] < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(f64, usize)> = None;
            for r in 0..self.rows {
                let a = self.tableau[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.tableau[r][self.cols] / a;
                    if best.map_or(true, |(br, brow)| {
                        ratio < br - PIVOT_TOL || (ratio < br + PIVOT_TOL && r < brow)
                    }) {
                        best = Some((ratio, r));
                    }
                }
            }
            let Some((_, row)) = best else {
                return Err(Error::Inconsistent("unbounded linear program".into()));
            };
            self.pivot(row, col);
        }
        Err(Error::Inconsistent(
            "simplex exceeded its pivot budget".into(),
        ))
    }
}

/// Solve `min w.x  s.t.  A x >= b, x >= 0` and return the optimal `x`.
fn solve_lp_geq(a: &[Vec<f64>], b: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let rows = b.len();
    let nvars = w.len();
    // columns: [x | surplus | artificials]
    let needs_artificial: Vec<bool> = b.iter().map(|&bi| bi > PIVOT_TOL).collect();
    let n_art = needs_artificial.iter().filter(|&&x| x).count();
    let cols = nvars + rows + n_art;

    let mut tableau = vec![vec![0.0; cols + 1]; rows];
    let mut basis = vec![0usize; rows];
    let mut art_index = nvars + rows;
    for r in 0..rows {
        for j in 0..nvars {
            tableau[r][j] = a[r][j];
        }
        tableau[r][nvars + r] = -1.0; // surplus
        tableau[r][cols] = b[r];
        if needs_artificial[r] {
            tableau[r][art_index] = 1.0;
            basis[r] = art_index;
            art_index += 1;
        } else {
            // flip the row so the surplus can start basic at -b >= 0
            for k in 0..=cols {
                tableau[r][k] = -tableau[r][k];
            }
            basis[r] = nvars + r;
        }
    }

    // phase 1: drive artificials to zero
    let mut cost_row = vec![0.0; cols + 1];
    for j in nvars + rows..cols {
        cost_row[j] = 1.0;
    }
    for r in 0..rows {
        if basis[r] >= nvars + rows {
            for k in 0..=cols {
                cost_row[k] -= tableau[r][k];
            }
        }
    }
    let mut simplex = DenseSimplex {
        rows,
        cols,
        tableau,
        cost_row,
        basis,
        allowed: vec![true; cols],
    };
    simplex.run()?;
    if -simplex.cost_row[cols] > 1e-9 {
        return Err(Error::Inconsistent(
            "phase-1 simplex found no feasible point".into(),
        ));
    }

    // phase 2: original objective, artificials barred from entering
    for j in nvars + rows..cols {
        simplex.allowed[j] = false;
    }
    let mut cost_row = vec![0.0; cols + 1];
    cost_row[..nvars].copy_from_slice(w);
    for r in 0..simplex.rows {
        let bcol = simplex.basis[r];
        let c = if bcol < nvars { w[bcol] } else { 0.0 };
        if c != 0.0 {
            for k in 0..=simplex.cols {
                cost_row[k] -= c * simplex.tableau[r][k];
            }
        }
    }
    simplex.cost_row = cost_row;
    simplex.run()?;

    let mut x = vec![0.0; nvars];
    for r in 0..simplex.rows {
        if simplex.basis[r] < nvars {
            x[simplex.basis[r]] = simplex.tableau[r][simplex.cols];
        }
    }
    Ok(x)
}

/// Minimize `sum a(x) mu(x) + sum b(y) nu(y)` over nonnegative potentials
/// with `a(x) + b(y) >= cost(x, y)`; by finite transport duality the value
/// agrees with [`ot_alpha`].
pub fn ot_beta(inst: &ClassicalInstance) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (n, m) = (inst.n(), inst.m());
    let mut rows = Vec::with_capacity(n * m);
    let mut rhs = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let mut row = vec![0.0; n + m];
            row[i] = 1.0;
            row[n + j] = 1.0;
            rows.push(row);
            rhs.push(inst.cost(i, j));
        }
    }
    let mut w = Vec::with_capacity(n + m);
    w.extend_from_slice(&inst.mu);
    w.extend_from_slice(&inst.nu);
    let x = solve_lp_geq(&rows, &rhs, &w)?;
    let a = x[..n].to_vec();
    let b = x[n..].to_vec();
    let value = a.iter().zip(&inst.mu).map(|(ai, mi)| ai * mi).sum::<f64>()
        + b.iter().zip(&inst.nu).map(|(bj, nj)| bj * nj).sum::<f64>();
    Ok((value, a, b))
}

/// Minimum-weight vertex cover of the support graph of a 0/1 instance:
/// `min mu(A) + nu(B)` over covers `support ⊆ (A x Y) ∪ (X x B)`, computed
/// by a max-flow/min-cut reduction (integral by the matching/cover duality
/// for bipartite graphs).
pub fn ot_gamma(inst: &ClassicalInstance) -> Result<(f64, Vec<usize>, Vec<usize>)> {
    if !inst.is_binary() {
        return Err(Error::Precondition(
            "vertex-cover capacity needs a 0/1 cost matrix".into(),
        ));
    }
    let (n, m) = (inst.n(), inst.m());
    // nodes: 0 source, 1..=n left, n+1..=n+m right, n+m+1 sink
    let total = n + m + 2;
    let (source, sink) = (0usize, n + m + 1);
    let mut cap = vec![vec![0.0_f64; total]; total];
    for i in 0..n {
        cap[source][1 + i] = inst.mu[i];
    }
    for j in 0..m {
        cap[1 + n + j][sink] = inst.nu[j];
    }
    for i in 0..n {
        for j in 0..m {
            if inst.cost(i, j) > 0.5 {
                cap[1 + i][1 + n + j] = f64::INFINITY;
            }
        }
    }
    let mut flow = vec![vec![0.0_f64; total]; total];
    loop {
        // shortest augmenting path in the residual graph
        let mut parent = vec![usize::MAX; total];
        parent[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..total {
                if parent[v] == usize::MAX && cap[u][v] - flow[u][v] > 1e-12 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            bottleneck = bottleneck.min(cap[u][v] - flow[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = parent[v];
            flow[u][v] += bottleneck;
            flow[v][u] -= bottleneck;
            v = u;
        }
    }
    // min cut: nodes reachable from the source in the residual graph
    let mut reachable = vec![false; total];
    reachable[source] = true;
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for v in 0..total {
            if !reachable[v] && cap[u][v] - flow[u][v] > 1e-12 {
                reachable[v] = true;
                queue.push_back(v);
            }
        }
    }
    let a: Vec<usize> = (0..n).filter(|&i| !reachable[1 + i]).collect();
    let b: Vec<usize> = (0..m).filter(|&j| reachable[1 + n + j]).collect();
    let value: f64 =
        a.iter().map(|&i| inst.mu[i]).sum::<f64>() + b.iter().map(|&j| inst.nu[j]).sum::<f64>();
    Ok((value, a, b))
}

/// Maximum bipartite matching size of a square 0/1 support, divided by `n`.
/// The combinatorial oracle for the capacities of uniform 0/1 instances.
pub fn matching_value(support: &[bool], n: usize) -> f64 {
    assert_eq!(support.len(), n * n);
    let mut matched_col: Vec<Option<usize>> = vec![None; n];

    fn try_row(
        row: usize,
        n: usize,
        support: &[bool],
        seen: &mut [bool],
        matched_col: &mut [Option<usize>],
    ) -> bool {
        for col in 0..n {
            if support[row * n + col] && !seen[col] {
                seen[col] = true;
                let free = match matched_col[col] {
                    None => true,
                    Some(other) => try_row(other, n, support, seen, matched_col),
                };
                if free {
                    matched_col[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }

    let mut size = 0usize;
    for row in 0..n {
        let mut seen = vec![false; n];
        if try_row(row, n, support, &mut seen, &mut matched_col) {
            size += 1;
        }
    }
    size as f64 / n as f64
}

/// Embed a classical instance into diagonal matrix algebras: diagonal
/// density matrices for the marginals and the diagonal cost operator
/// `T[(i,j),(i,j)] = cost(i, j)`.
pub fn diag_embed(
    inst: &ClassicalInstance,
) -> Result<(HermitianOperator, MeasuredAlgebra, MeasuredAlgebra)> {
    let (n, m) = (inst.n(), inst.m());
    let mut t = ComplexMatrix::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..m {
            t.set(i * m + j, i * m + j, Complex64::new(inst.cost(i, j), 0.0));
        }
    }
    let left = MeasuredAlgebra::from_probabilities(&inst.mu)?;
    let right = MeasuredAlgebra::from_probabilities(&inst.nu)?;
    Ok((HermitianOperator::symmetrized(t), left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    fn random_probability(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = p.iter().sum();
        for x in p.iter_mut() {
            *x /= total;
        }
        let head: f64 = p[..n - 1].iter().sum();
        p[n - 1] = 1.0 - head;
        p
    }

    #[test]
    fn alpha_of_all_ones_cost() {
        let inst = ClassicalInstance::new(uniform(3), uniform(4), vec![1.0; 12]).unwrap();
        let (value, plan) = ot_alpha(&inst).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
        for (r, want) in plan.row_sums().iter().zip(inst.mu()) {
            assert!((r - want).abs() < 1e-9);
        }
        for (c, want) in plan.col_sums().iter().zip(inst.nu()) {
            assert!((c - want).abs() < 1e-9);
        }
    }

    #[test]
    fn alpha_of_partial_diagonal_support() {
        let inst =
            ClassicalInstance::from_support(uniform(3), uniform(3), &[(0, 0), (1, 1)]).unwrap();
        let (value, _) = ot_alpha(&inst).unwrap();
        // the largest partial permutation inside the support has two cells
        let support: Vec<bool> = (0..9).map(|k| inst.cost[k] > 0.5).collect();
        let oracle = matching_value(&support, 3);
        assert!((value - 2.0 / 3.0).abs() < 1e-9);
        assert!((value - oracle).abs() < 1e-9);
    }

    #[test]
    fn alpha_of_identity_support() {
        let n = 4;
        let cells: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        let inst = ClassicalInstance::from_support(uniform(n), uniform(n), &cells).unwrap();
        let (value, plan) = ot_alpha(&inst).unwrap();
        assert!((value - 1.0).abs() < 1e-9);
        for i in 0..n {
            assert!((plan.entry(i, i) - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn beta_of_zero_cost() {
        let inst = ClassicalInstance::new(uniform(2), uniform(3), vec![0.0; 6]).unwrap();
        let (value, a, b) = ot_beta(&inst).unwrap();
        assert!(value.abs() < 1e-12);
        assert!(a.iter().chain(&b).all(|&x| x.abs() < 1e-9));
    }

    #[test]
    fn beta_of_full_grid() {
        let inst = ClassicalInstance::new(uniform(3), uniform(3), vec![1.0; 9]).unwrap();
        let (value, _, _) = ot_beta(&inst).unwrap();
        assert!((value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lp_duality_on_random_instances() {
        let mut rng = crate::haar::rng(100);
        for _ in 0..20 {
            let n = rng.gen_range(2..6);
            let m = rng.gen_range(2..6);
            let mu = random_probability(n, &mut rng);
            let nu = random_probability(m, &mut rng);
            let cost: Vec<f64> = (0..n * m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let inst = ClassicalInstance::new(mu, nu, cost).unwrap();
            let (alpha, _) = ot_alpha(&inst).unwrap();
            let (beta, a, b) = ot_beta(&inst).unwrap();
            assert!((alpha - beta).abs() <= 1e-8, "alpha {alpha} vs beta {beta}");
            // dual feasibility
            for i in 0..n {
                for j in 0..m {
                    assert!(a[i] + b[j] >= inst.cost(i, j) - 1e-9);
                }
            }
        }
    }

    #[test]
    fn gamma_of_partial_diagonal_support() {
        let inst =
            ClassicalInstance::from_support(uniform(3), uniform(3), &[(0, 0), (1, 1)]).unwrap();
        let (value, a, b) = ot_gamma(&inst).unwrap();
        assert!((value - 2.0 / 3.0).abs() < 1e-9);
        // the returned sets must cover the support
        for &(i, j) in &[(0usize, 0usize), (1, 1)] {
            assert!(a.contains(&i) || b.contains(&j));
        }
    }

    #[test]
    fn gamma_of_empty_support() {
        let inst = ClassicalInstance::from_support(uniform(3), uniform(3), &[]).unwrap();
        let (value, a, b) = ot_gamma(&inst).unwrap();
        assert!(value.abs() < 1e-12);
        assert!(a.is_empty() && b.is_empty());
    }

    #[test]
    fn gamma_of_single_row_support() {
        let mut rng = crate::haar::rng(101);
        let mu = random_probability(3, &mut rng);
        let cells: Vec<(usize, usize)> = (0..4).map(|j| (1, j)).collect();
        let inst = ClassicalInstance::from_support(mu.clone(), uniform(4), &cells).unwrap();
        let (value, a, _) = ot_gamma(&inst).unwrap();
        assert!((value - mu[1]).abs() < 1e-9);
        assert_eq!(a, vec![1]);
    }

    #[test]
    fn gamma_rejects_fractional_cost() {
        let inst = ClassicalInstance::new(uniform(2), uniform(2), vec![0.5; 4]).unwrap();
        assert!(ot_gamma(&inst).is_err());
    }

    #[test]
    fn matching_oracle_basics() {
        let n = 3;
        let identity: Vec<bool> = (0..9).map(|k| k % 4 == 0).collect();
        assert!((matching_value(&identity, n) - 1.0).abs() < 1e-12);
        let single_row: Vec<bool> = (0..9).map(|k| k < 3).collect();
        assert!((matching_value(&single_row, n) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_binary_instances_agree_with_matching() {
        let mut rng = crate::haar::rng(102);
        for _ in 0..50 {
            let n = rng.gen_range(2..=8);
            let support: Vec<bool> = (0..n * n).map(|_| rng.gen_bool(0.4)).collect();
            let cells: Vec<(usize, usize)> = (0..n * n)
                .filter(|&k| support[k])
                .map(|k| (k / n, k % n))
                .collect();
            let inst = ClassicalInstance::from_support(uniform(n), uniform(n), &cells).unwrap();
            let oracle = matching_value(&support, n);
            let (alpha, _) = ot_alpha(&inst).unwrap();
            let (gamma, _, _) = ot_gamma(&inst).unwrap();
            assert!((alpha - oracle).abs() <= 1e-9, "alpha {alpha} vs {oracle}");
            assert!((gamma - oracle).abs() <= 1e-9, "gamma {gamma} vs {oracle}");
        }
    }

    #[test]
    fn chain_inequality_for_binary_costs() {
        let mut rng = crate::haar::rng(103);
        for _ in 0..20 {
            let n = rng.gen_range(2..6);
            let m = rng.gen_range(2..6);
            let mu = random_probability(n, &mut rng);
            let nu = random_probability(m, &mut rng);
            let cells: Vec<(usize, usize)> = (0..n * m)
                .filter(|_| rng.gen_bool(0.4))
                .map(|k| (k / m, k % m))
                .collect();
            let inst = ClassicalInstance::from_support(mu, nu, &cells).unwrap();
            let (alpha, _) = ot_alpha(&inst).unwrap();
            let (gamma, _, _) = ot_gamma(&inst).unwrap();
            assert!(alpha <= gamma + 1e-9, "alpha {alpha} vs gamma {gamma}");
        }
    }

    #[test]
    fn diag_embed_of_permutation_support() {
        let inst =
            ClassicalInstance::from_support(uniform(2), uniform(2), &[(0, 0), (1, 1)]).unwrap();
        let (t, left, right) = diag_embed(&inst).unwrap();
        let res = crate::sdp::solve_alpha(&t, &left, &right, &Default::default()).unwrap();
        assert!((res.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn diag_embed_agrees_with_classical_alpha() {
        let mut rng = crate::haar::rng(104);
        for _ in 0..5 {
            let mu = random_probability(2, &mut rng);
            let nu = random_probability(3, &mut rng);
            let cost: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
            let inst = ClassicalInstance::new(mu, nu, cost).unwrap();
            let (classical, _) = ot_alpha(&inst).unwrap();
            let (t, left, right) = diag_embed(&inst).unwrap();
            let quantum = crate::sdp::solve_alpha(&t, &left, &right, &Default::default())
                .unwrap()
                .value;
            assert!(
                (classical - quantum).abs() <= 1e-6,
                "classical {classical} vs embedded {quantum}"
            );
        }
    }

    #[test]
    fn diag_embed_of_empty_support() {
        let inst = ClassicalInstance::from_support(uniform(2), uniform(2), &[]).unwrap();
        let (classical, _) = ot_alpha(&inst).unwrap();
        let (t, left, right) = diag_embed(&inst).unwrap();
        let quantum = crate::sdp::solve_alpha(&t, &left, &right, &Default::default())
            .unwrap()
            .value;
        assert!(classical.abs() < 1e-12);
        assert!(quantum.abs() < 1e-6);
    }

    #[test]
    fn degenerate_marginals_are_allowed() {
        let inst =
            ClassicalInstance::from_support(vec![0.0, 1.0], vec![0.5, 0.5], &[(0, 0), (1, 1)])
                .unwrap();
        let (alpha, _) = ot_alpha(&inst).unwrap();
        let (beta, _, _) = ot_beta(&inst).unwrap();
        let (gamma, _, _) = ot_gamma(&inst).unwrap();
        assert!((alpha - 0.5).abs() < 1e-9);
        assert!((beta - 0.5).abs() < 1e-9);
        assert!((gamma - 0.5).abs() < 1e-9);
    }
}
