//! H-polytope representation with active-set queries, ratio tests, and
//! linear-optimization oracles.
//!
//! All polytopes are `P = {x : <a_i, x> <= b_i}` and are verified nonempty and
//! bounded at construction. Structured kinds (box, probability simplex,
//! scaled l1 ball, DAG flow) carry closed-form oracles; the l1 ball never
//! materializes its `2^n` facet rows and instead answers every query through
//! sign-pattern arithmetic, so its `A` block is empty by design.

use crate::linalg::{is_finite_slice, norm, norm1, DenseMatrix, Vector};
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative activity tolerance: row `i` is active at `x` iff
/// `|<a_i,x> - b_i| <= EPS_ACTIVE * (1 + |b_i|)`.
pub const EPS_ACTIVE: f64 = 1e-9;

/// Directed acyclic graph with a designated source and sink. Edge order is
/// the variable order of the associated flow polytope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub source: usize,
    pub sink: usize,
}

impl Dag {
    /// Validate node indices, acyclicity, and source-to-sink connectivity.
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>, source: usize, sink: usize) -> Result<Self> {
        if source >= nodes || sink >= nodes || source == sink {
            return Err(Error::InvalidData("dag endpoints out of range".to_string()));
        }
        for &(u, v) in &edges {
            if u >= nodes || v >= nodes {
                return Err(Error::InvalidData("dag edge out of range".to_string()));
            }
            if u == v {
                return Err(Error::NotADag);
            }
        }
        let dag = Self { nodes, edges, source, sink };
        if dag.topo_order().is_none() {
            return Err(Error::NotADag);
        }
        if !dag.reaches(source, sink) {
            return Err(Error::Disconnected);
        }
        Ok(dag)
    }

    fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.0 == u)
            .map(|(i, e)| (i, e.1))
    }

    /// Kahn's algorithm, always removing the lowest-index ready node.
    fn topo_order(&self) -> Option<Vec<usize>> {
        let mut indeg = vec![0usize; self.nodes];
        for &(_, v) in &self.edges {
            indeg[v] += 1;
        }
        let mut done = vec![false; self.nodes];
        let mut order = Vec::with_capacity(self.nodes);
        for _ in 0..self.nodes {
            let next = (0..self.nodes).find(|&v| !done[v] && indeg[v] == 0)?;
            done[next] = true;
            order.push(next);
            for (_, v) in self.out_edges(next) {
                indeg[v] -= 1;
            }
        }
        Some(order)
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for (_, v) in self.out_edges(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    /// Minimum-weight source-to-sink path as edge indices. Negative weights
    /// are fine on a DAG; ties resolve to the relaxation seen first, which is
    /// deterministic because nodes go in topological order and edges in index
    /// order.
    pub fn shortest_path_edges(&self, weights: &[f64]) -> Result<Vec<usize>> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch("dag weight length".to_string()));
        }
        if !is_finite_slice(weights) {
            return Err(Error::NonFiniteInput("dag weights"));
        }
        let order = self.topo_order().ok_or(Error::NotADag)?;
        let mut dist = vec![f64::INFINITY; self.nodes];
        let mut pred: Vec<Option<usize>> = vec![None; self.nodes];
        dist[self.source] = 0.0;
        for &u in &order {
            if !dist[u].is_finite() {
                continue;
            }
            for (e, v) in self.out_edges(u) {
                let cand = dist[u] + weights[e];
                if cand < dist[v] {
                    dist[v] = cand;
                    pred[v] = Some(e);
                }
            }
        }
        if !dist[self.sink].is_finite() {
            return Err(Error::Disconnected);
        }
        let mut path = Vec::new();
        let mut v = self.sink;
        while v != self.source {
            let e = pred[v].expect("finite distance implies a predecessor chain");
            path.push(e);
            v = self.edges[e].0;
        }
        path.reverse();
        Ok(path)
    }

    /// All source-to-sink paths as edge-index lists, in DFS order with edges
    /// tried by index. Errors once more than `cap` paths exist.
    pub fn enumerate_paths(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        self.dfs_paths(self.source, &mut stack, &mut out, cap)?;
        Ok(out)
    }

    fn dfs_paths(
        &self,
        u: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if u == self.sink {
            if out.len() >= cap {
                return Err(Error::CapExceeded(cap));
            }
            out.push(stack.clone());
            return Ok(());
        }
        for (e, v) in self.out_edges(u) {
            stack.push(e);
            self.dfs_paths(v, stack, out, cap)?;
            stack.pop();
        }
        Ok(())
    }

    /// True iff every source-to-sink path uses edge `e`.
    fn edge_is_mandatory(&self, e: usize) -> bool {
        let pruned = Self {
            nodes: self.nodes,
            edges: self
                .edges
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != e)
                .map(|(_, &ed)| ed)
                .collect(),
            source: self.source,
            sink: self.sink,
        };
        !pruned.reaches(self.source, self.sink)
    }

    /// True iff some source-to-sink path uses edge `e`.
    fn edge_is_usable(&self, e: usize) -> bool {
        let (u, v) = self.edges[e];
        self.reaches(self.source, u) && self.reaches(v, self.sink)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolytopeKind {
    Generic,
    Box { lo: Vector, hi: Vector },
    Simplex,
    L1Ball { radius: f64 },
    Flow { dag: Dag },
}

/// Sorted indices of the rows active at a point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActiveSet {
    pub indices: Vec<usize>,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Polytope {
    a: DenseMatrix,
    b: Vector,
    kind: PolytopeKind,
    diameter_bound: f64,
    coord_min: Vector,
    coord_max: Vector,
    row_norms: Vector,
    anchor: Vector,
    equality_partner: Vec<Option<usize>>,
}

impl Polytope {
    /// Generic H-polytope. Solves `2n` coordinate LPs to certify the region
    /// nonempty and bounded and to record coordinate ranges.
    pub fn generic(a: DenseMatrix, b: Vector) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch("polytope rows".to_string()));
        }
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::DimensionMismatch("polytope must have rows and columns".to_string()));
        }
        if !is_finite_slice(&b) {
            return Err(Error::NonFiniteInput("polytope rhs"));
        }
        let n = a.cols();
        let mut coord_min = vec![0.0; n];
        let mut coord_max = vec![0.0; n];
        let mut anchor = vec![0.0; n];
        for j in 0..n {
            for (sign, slot) in [(1.0, 0), (-1.0, 1)] {
                let mut c = vec![0.0; n];
                c[j] = sign;
                let lp = LinearProgram {
                    objective: c,
                    ineq: Some((a.clone(), b.clone())),
                    eq: None,
                    bounds: None,
                };
                let sol = solve_lp(&lp)?;
                match sol.status {
                    LpStatus::Optimal => {
                        if slot == 0 {
                            coord_min[j] = sol.value;
                        } else {
                            coord_max[j] = -sol.value;
                        }
                        for (t, v) in anchor.iter_mut().zip(sol.point.iter()) {
                            *t += v / (2 * n) as f64;
                        }
                    }
                    LpStatus::Infeasible => return Err(Error::EmptyPolytope),
                    LpStatus::Unbounded => return Err(Error::UnboundedPolytope(j)),
                }
            }
        }
        Ok(Self::assemble(a, b, PolytopeKind::Generic, coord_min, coord_max, anchor))
    }

    /// Axis-aligned box `{lo <= x <= hi}`. Rows: `x_i <= hi_i` for all `i`,
    /// then `-x_i <= -lo_i`.
    pub fn hyperbox(lo: Vector, hi: Vector) -> Result<Self> {
        let n = lo.len();
        if hi.len() != n || n == 0 {
            return Err(Error::DimensionMismatch("box bounds".to_string()));
        }
        if !is_finite_slice(&lo) || !is_finite_slice(&hi) {
            return Err(Error::NonFiniteInput("box bounds"));
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(Error::EmptyPolytope);
        }
        let a = DenseMatrix::from_fn(2 * n, n, |i, j| {
            if i < n {
                if i == j { 1.0 } else { 0.0 }
            } else if i - n == j {
                -1.0
            } else {
                0.0
            }
        });
        let mut b = hi.clone();
        b.extend(lo.iter().map(|l| -l));
        let anchor: Vector = lo.iter().zip(hi.iter()).map(|(l, h)| 0.5 * (l + h)).collect();
        let kind = PolytopeKind::Box { lo: lo.clone(), hi: hi.clone() };
        Ok(Self::assemble(a, b, kind, lo, hi, anchor))
    }

    /// Probability simplex `{x >= 0, sum x = 1}`. Rows: `-x_i <= 0` for all
    /// `i`, then the equality pair `sum x <= 1`, `-sum x <= -1`.
    pub fn simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("simplex dimension".to_string()));
        }
        let a = DenseMatrix::from_fn(n + 2, n, |i, j| {
            if i < n {
                if i == j { -1.0 } else { 0.0 }
            } else if i == n {
                1.0
            } else {
                -1.0
            }
        });
        let mut b = vec![0.0; n];
        b.push(1.0);
        b.push(-1.0);
        let anchor = vec![1.0 / n as f64; n];
        Ok(Self::assemble(a, b, PolytopeKind::Simplex, vec![0.0; n], vec![1.0; n], anchor))
    }

    /// Scaled l1 ball `{|x|_1 <= radius}`. Its `2^n` facets stay implicit:
    /// the stored `A` block is empty and every query runs in closed form.
    pub fn l1_ball(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("l1 ball dimension".to_string()));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidData("l1 radius must be positive".to_string()));
        }
        let a = DenseMatrix::from_fn(0, n, |_, _| 0.0);
        Ok(Self::assemble(
            a,
            Vec::new(),
            PolytopeKind::L1Ball { radius },
            vec![-radius; n],
            vec![radius; n],
            vec![0.0; n],
        ))
    }

    /// Unit-flow polytope of a DAG: variables are edges, constraints are
    /// conservation pairs at internal nodes, a unit net outflow pair at the
    /// source, and capacities `0 <= x_e <= 1`. Vertices are exactly the
    /// indicator vectors of source-to-sink paths.
    pub fn flow(dag: Dag) -> Result<Self> {
        let dag = Dag::new(dag.nodes, dag.edges, dag.source, dag.sink)?;
        let ne = dag.edges.len();
        let internal: Vec<usize> =
            (0..dag.nodes).filter(|&v| v != dag.source && v != dag.sink).collect();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut b: Vector = Vec::new();
        for &v in &internal {
            let mut row = vec![0.0; ne];
            for (e, &(from, to)) in dag.edges.iter().enumerate() {
                if to == v {
                    row[e] += 1.0;
                }
                if from == v {
                    row[e] -= 1.0;
                }
            }
            rows.push(row.clone());
            b.push(0.0);
            rows.push(row.iter().map(|c| -c).collect());
            b.push(0.0);
        }
        let mut src = vec![0.0; ne];
        for (e, &(from, to)) in dag.edges.iter().enumerate() {
            if from == dag.source {
                src[e] += 1.0;
            }
            if to == dag.source {
                src[e] -= 1.0;
            }
        }
        rows.push(src.clone());
        b.push(1.0);
        rows.push(src.iter().map(|c| -c).collect());
        b.push(-1.0);
        for e in 0..ne {
            let mut row = vec![0.0; ne];
            row[e] = 1.0;
            rows.push(row);
            b.push(1.0);
        }
        for e in 0..ne {
            let mut row = vec![0.0; ne];
            row[e] = -1.0;
            rows.push(row);
            b.push(0.0);
        }
        let a = DenseMatrix::from_rows(&rows)?;
        // Coordinate ranges are combinatorial: an edge can carry flow iff it
        // lies on some path, and must carry flow iff it lies on every path.
        let mut coord_min = vec![0.0; ne];
        let mut coord_max = vec![0.0; ne];
        for e in 0..ne {
            coord_max[e] = if dag.edge_is_usable(e) { 1.0 } else { 0.0 };
            coord_min[e] = if dag.edge_is_mandatory(e) { 1.0 } else { 0.0 };
        }
        let anchor_path = dag.shortest_path_edges(&vec![0.0; ne])?;
        let mut anchor = vec![0.0; ne];
        for e in anchor_path {
            anchor[e] = 1.0;
        }
        let kind = PolytopeKind::Flow { dag };
        Ok(Self::assemble(a, b, kind, coord_min, coord_max, anchor))
    }

    fn assemble(
        a: DenseMatrix,
        b: Vector,
        kind: PolytopeKind,
        coord_min: Vector,
        coord_max: Vector,
        anchor: Vector,
    ) -> Self {
        let diameter_bound = coord_min
            .iter()
            .zip(coord_max.iter())
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt();
        let row_norms: Vector = (0..a.rows()).map(|i| norm(a.row(i))).collect();
        // Detect equality pairs (rows i, j with a_j = -a_i, b_j = -b_i):
        // their joint multiplier is sign-free, which downstream active-set
        // logic must know to avoid dropping one side forever.
        let m = a.rows();
        let mut equality_partner: Vec<Option<usize>> = vec![None; m];
        for i in 0..m {
            if equality_partner[i].is_some() {
                continue;
            }
            let tol_a = 1e-12 * (1.0 + row_norms[i]);
            let tol_b = 1e-12 * (1.0 + b.get(i).copied().unwrap_or(0.0).abs());
            for j in i + 1..m {
                if equality_partner[j].is_some() {
                    continue;
                }
                let negated = a
                    .row(i)
                    .iter()
                    .zip(a.row(j).iter())
                    .all(|(p, q)| (p + q).abs() <= tol_a)
                    && (b[i] + b[j]).abs() <= tol_b;
                if negated {
                    equality_partner[i] = Some(j);
                    equality_partner[j] = Some(i);
                    break;
                }
            }
        }
        Self {
            a,
            b,
            kind,
            diameter_bound,
            coord_min,
            coord_max,
            row_norms,
            anchor,
            equality_partner,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn num_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn kind(&self) -> &PolytopeKind {
        &self.kind
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    pub fn coord_min(&self) -> &[f64] {
        &self.coord_min
    }

    pub fn coord_max(&self) -> &[f64] {
        &self.coord_max
    }

    /// A feasible point recorded at construction.
    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Maximum relative constraint violation at `x`; `<= 0` means feasible.
    pub fn feasibility_violation(&self, x: &[f64]) -> f64 {
        if let PolytopeKind::L1Ball { radius } = self.kind {
            return (norm1(x) - radius) / (1.0 + radius);
        }
        let ax = self.a.matvec(x);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.b.len() {
            worst = worst.max((ax[i] - self.b[i]) / (1.0 + self.b[i].abs()));
        }
        worst
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.feasibility_violation(x) <= EPS_ACTIVE
    }

    /// The row paired with `i` into an equality (`a_j = -a_i`, `b_j = -b_i`),
    /// if any.
    pub fn equality_partner(&self, i: usize) -> Option<usize> {
        self.equality_partner[i]
    }

    /// Errors with the first violated row when `x` is infeasible beyond
    /// [`EPS_ACTIVE`].
    pub fn ensure_feasible(&self, x: &[f64]) -> Result<()> {
        self.check_feasible(x)
    }

    fn check_feasible(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch("point dimension".to_string()));
        }
        if !is_finite_slice(x) {
            return Err(Error::NonFiniteInput("point"));
        }
        if let PolytopeKind::L1Ball { radius } = self.kind {
            let viol = (norm1(x) - radius) / (1.0 + radius);
            if viol > EPS_ACTIVE {
                return Err(Error::Infeasible { row: 0, violation: viol });
            }
            return Ok(());
        }
        let ax = self.a.matvec(x);
        for i in 0..self.b.len() {
            let viol = (ax[i] - self.b[i]) / (1.0 + self.b[i].abs());
            if viol > EPS_ACTIVE {
                return Err(Error::Infeasible { row: i, violation: viol });
            }
        }
        Ok(())
    }

    /// Indices of rows active at `x` under the relative tolerance
    /// [`EPS_ACTIVE`]. The l1 ball keeps its facets implicit, so it has no
    /// row indices to report.
    pub fn active_set(&self, x: &[f64]) -> Result<ActiveSet> {
        if matches!(self.kind, PolytopeKind::L1Ball { .. }) {
            return Err(Error::UnsupportedPolytope(
                "l1 ball facets are implicit; use the closed-form l1 queries",
            ));
        }
        self.check_feasible(x)?;
        let ax = self.a.matvec(x);
        let indices = (0..self.b.len())
            .filter(|&i| (ax[i] - self.b[i]).abs() <= EPS_ACTIVE * (1.0 + self.b[i].abs()))
            .collect();
        Ok(ActiveSet { indices })
    }

    /// The `A_I` submatrix for an active set.
    pub fn rows_of(&self, active: &ActiveSet) -> DenseMatrix {
        self.a.select_rows(&active.indices)
    }

    /// Feasibility ratio test: largest `delta` with `x + delta d` in `P`.
    /// Infeasible directions at the tolerance boundary give `0`; boundedness
    /// guarantees a finite value for any nonzero direction.
    pub fn max_step(&self, x: &[f64], d: &[f64]) -> Result<f64> {
        self.check_feasible(x)?;
        if d.len() != self.dim() {
            return Err(Error::DimensionMismatch("direction dimension".to_string()));
        }
        if !is_finite_slice(d) {
            return Err(Error::NonFiniteInput("direction"));
        }
        if let PolytopeKind::L1Ball { radius } = self.kind {
            return l1_max_step(x, d, radius);
        }
        let dnorm = norm(d);
        if dnorm == 0.0 {
            return Ok(0.0);
        }
        let ax = self.a.matvec(x);
        let ad = self.a.matvec(d);
        let mut best: Option<f64> = None;
        for j in 0..self.b.len() {
            // Rows whose directional derivative is numerical noise cannot
            // bind; without this cutoff a just-active row with a roundoff
            // positive dot product would spuriously report a zero step.
            let thr = 1e-11 * (1.0 + self.row_norms[j] * dnorm);
            if ad[j] > thr {
                let slack = (self.b[j] - ax[j]).max(0.0);
                let ratio = slack / ad[j];
                best = Some(best.map_or(ratio, |b: f64| b.min(ratio)));
            }
        }
        best.map_or(Err(Error::UnboundedPolytope(usize::MAX)), Ok)
    }

    /// Vertex minimizer of `<c, x>` over `P` with deterministic ties.
    pub fn lo_oracle(&self, c: &[f64]) -> Result<Vector> {
        if c.len() != self.dim() {
            return Err(Error::DimensionMismatch("objective dimension".to_string()));
        }
        if !is_finite_slice(c) {
            return Err(Error::NonFiniteInput("lo objective"));
        }
        match &self.kind {
            PolytopeKind::Box { lo, hi } => Ok(lo
                .iter()
                .zip(hi.iter())
                .zip(c.iter())
                .map(|((l, h), ci)| if *ci < 0.0 { *h } else { *l })
                .collect()),
            PolytopeKind::Simplex => {
                let mut best = 0usize;
                for j in 1..c.len() {
                    if c[j] < c[best] {
                        best = j;
                    }
                }
                let mut v = vec![0.0; c.len()];
                v[best] = 1.0;
                Ok(v)
            }
            PolytopeKind::L1Ball { radius } => {
                let mut best = 0usize;
                for j in 1..c.len() {
                    if c[j].abs() > c[best].abs() {
                        best = j;
                    }
                }
                let mut v = vec![0.0; c.len()];
                v[best] = if c[best] > 0.0 { -*radius } else { *radius };
                Ok(v)
            }
            PolytopeKind::Flow { dag } => {
                let path = dag.shortest_path_edges(c)?;
                let mut v = vec![0.0; c.len()];
                for e in path {
                    v[e] = 1.0;
                }
                Ok(v)
            }
            PolytopeKind::Generic => {
                let bounds = self
                    .coord_min
                    .iter()
                    .map(|lo| (Some(*lo), None))
                    .collect::<Vec<_>>();
                let lp = LinearProgram {
                    objective: c.to_vec(),
                    ineq: Some((self.a.clone(), self.b.clone())),
                    eq: None,
                    bounds: Some(bounds),
                };
                let sol = solve_lp(&lp)?;
                match sol.status {
                    LpStatus::Optimal => Ok(sol.point),
                    // Construction certified the region nonempty and bounded.
                    _ => Err(Error::NumericalStall { pivots: 0 }),
                }
            }
        }
    }

    /// True iff `y` lies in the normal cone at `x`: the nnls residual of
    /// projecting `y` onto `cone(A_I^T)` has norm `<= 1e-8 * (1 + |y|)`.
    pub fn normal_cone_member(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch("normal cone query".to_string()));
        }
        if !is_finite_slice(y) {
            return Err(Error::NonFiniteInput("normal cone query"));
        }
        self.check_feasible(x)?;
        let tol = 1e-8 * (1.0 + norm(y));
        if let PolytopeKind::L1Ball { radius } = self.kind {
            return Ok(l1_normal_cone_member(x, y, radius, tol));
        }
        let active = self.active_set(x)?;
        let a_i = self.rows_of(&active);
        let fit = crate::linalg::nnls(&a_i, y)?;
        Ok(norm(&fit.residual) <= tol)
    }

    /// All vertices, as a test oracle for tiny polytopes. Materialized kinds
    /// enumerate row subsets; the l1 ball and flow kinds list theirs in
    /// closed form.
    pub fn enumerate_vertices(&self, cap: usize) -> Result<Vec<Vector>> {
        let n = self.dim();
        match &self.kind {
            PolytopeKind::L1Ball { radius } => {
                let mut out = Vec::with_capacity(2 * n);
                for j in 0..n {
                    for sign in [1.0, -1.0] {
                        let mut v = vec![0.0; n];
                        v[j] = sign * radius;
                        out.push(v);
                    }
                }
                Ok(out)
            }
            PolytopeKind::Flow { dag } => {
                let paths = dag.enumerate_paths(cap)?;
                Ok(paths
                    .into_iter()
                    .map(|p| {
                        let mut v = vec![0.0; n];
                        for e in p {
                            v[e] = 1.0;
                        }
                        v
                    })
                    .collect())
            }
            _ => {
                let m = self.num_rows();
                if n > 10 || m > 40 {
                    return Err(Error::UnsupportedPolytope(
                        "vertex enumeration is a test oracle for tiny polytopes",
                    ));
                }
                let mut out: Vec<Vector> = Vec::new();
                let mut subset = Vec::new();
                self.vertex_rec(0, n, &mut subset, &mut out, cap)?;
                Ok(out)
            }
        }
    }

    fn vertex_rec(
        &self,
        start: usize,
        n: usize,
        subset: &mut Vec<usize>,
        out: &mut Vec<Vector>,
        cap: usize,
    ) -> Result<()> {
        if subset.len() == n {
            let a_s = self.a.select_rows(subset);
            let b_s: Vector = subset.iter().map(|&i| self.b[i]).collect();
            let x = crate::linalg::least_squares(&a_s, &b_s)?;
            if crate::linalg::max_abs_diff(&a_s.matvec(&x), &b_s) > 1e-9 {
                return Ok(());
            }
            let null = crate::linalg::pseudoinverse_projector(&a_s)?;
            if crate::linalg::norm_inf(null.entries()) > 1e-9 {
                return Ok(()); // rank-deficient subset: not a unique point
            }
            if self.feasibility_violation(&x) > 1e-9 {
                return Ok(());
            }
            if out.iter().any(|v| crate::linalg::max_abs_diff(v, &x) <= 1e-8) {
                return Ok(());
            }
            if out.len() >= cap {
                return Err(Error::CapExceeded(cap));
            }
            out.push(x);
            return Ok(());
        }
        if self.num_rows() - start < n - subset.len() {
            return Ok(());
        }
        for i in start..self.num_rows() {
            subset.push(i);
            self.vertex_rec(i + 1, n, subset, out, cap)?;
            subset.pop();
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = match &self.kind {
            PolytopeKind::Generic => PolytopeFile {
                kind: "generic".to_string(),
                a: Some((0..self.a.rows()).map(|i| self.a.row(i).to_vec()).collect()),
                b: Some(self.b.clone()),
                ..Default::default()
            },
            PolytopeKind::Box { lo, hi } => PolytopeFile {
                kind: "box".to_string(),
                lo: Some(lo.clone()),
                hi: Some(hi.clone()),
                ..Default::default()
            },
            PolytopeKind::Simplex => PolytopeFile {
                kind: "simplex".to_string(),
                n: Some(self.dim()),
                ..Default::default()
            },
            PolytopeKind::L1Ball { radius } => PolytopeFile {
                kind: "l1".to_string(),
                n: Some(self.dim()),
                radius: Some(*radius),
                ..Default::default()
            },
            PolytopeKind::Flow { dag } => PolytopeFile {
                kind: "flow".to_string(),
                nodes: Some(dag.nodes),
                edges: Some(dag.edges.clone()),
                source: Some(dag.source),
                sink: Some(dag.sink),
                ..Default::default()
            },
        };
        serde_json::to_string_pretty(&file).expect("polytope file schema serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PolytopeFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidData(format!("polytope json: {e}")))?;
        let missing = |what: &str| Error::InvalidData(format!("polytope json missing {what}"));
        match file.kind.as_str() {
            "generic" => {
                let a = file.a.ok_or_else(|| missing("A"))?;
                let b = file.b.ok_or_else(|| missing("b"))?;
                Polytope::generic(DenseMatrix::from_rows(&a)?, b)
            }
            "box" => {
                let lo = file.lo.ok_or_else(|| missing("lo"))?;
                let hi = file.hi.ok_or_else(|| missing("hi"))?;
                Polytope::hyperbox(lo, hi)
            }
            "simplex" => Polytope::simplex(file.n.ok_or_else(|| missing("n"))?),
            "l1" => Polytope::l1_ball(
                file.n.ok_or_else(|| missing("n"))?,
                file.radius.ok_or_else(|| missing("radius"))?,
            ),
            "flow" => {
                let nodes = file.nodes.ok_or_else(|| missing("nodes"))?;
                let edges = file.edges.ok_or_else(|| missing("edges"))?;
                let source = file.source.ok_or_else(|| missing("source"))?;
                let sink = file.sink.ok_or_else(|| missing("sink"))?;
                Polytope::flow(Dag::new(nodes, edges, source, sink)?)
            }
            other => Err(Error::InvalidData(format!("unknown polytope kind {other:?}"))),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct PolytopeFile {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sink: Option<usize>,
}

/// Explicit facet rows of the l1 ball, for cross-validation and file
/// polytopes. Guarded because the row count is `2^n`.
pub fn l1_ball_facets(n: usize, radius: f64) -> Result<(DenseMatrix, Vector)> {
    if n == 0 || n > 16 {
        return Err(Error::UnsupportedPolytope("explicit l1 facets need 1 <= n <= 16"));
    }
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::InvalidData("l1 radius must be positive".to_string()));
    }
    let rows = 1usize << n;
    let a = DenseMatrix::from_fn(rows, n, |i, j| if (i >> j) & 1 == 1 { -1.0 } else { 1.0 });
    Ok((a, vec![radius; rows]))
}

/// Ratio test on the l1 ball: the map `delta -> |x + delta d|_1` is piecewise
/// linear and convex, so march its breakpoints until the radius is crossed.
fn l1_max_step(x: &[f64], d: &[f64], radius: f64) -> Result<f64> {
    let dnorm = norm(d);
    if dnorm == 0.0 {
        return Ok(0.0);
    }
    let h = |delta: f64| -> f64 {
        x.iter().zip(d.iter()).map(|(xi, di)| (xi + delta * di).abs()).sum()
    };
    let mut cuts: Vec<f64> = x
        .iter()
        .zip(d.iter())
        .filter(|(_, di)| **di != 0.0)
        .map(|(xi, di)| -xi / di)
        .filter(|t| *t > 0.0)
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).expect("finite breakpoints"));
    cuts.dedup();
    let slope_at = |delta: f64| -> f64 {
        x.iter()
            .zip(d.iter())
            .map(|(xi, di)| {
                let v = xi + delta * di;
                if v > 0.0 {
                    *di
                } else if v < 0.0 {
                    -*di
                } else {
                    di.abs()
                }
            })
            .sum()
    };
    let mut start = 0.0;
    let mut h_start = h(0.0);
    for (k, &cut) in cuts.iter().enumerate() {
        let mid = if k == 0 { 0.5 * cut } else { 0.5 * (start + cut) };
        let s = slope_at(mid);
        let h_cut = h(cut);
        if h_cut > radius && s > 0.0 {
            let delta = start + (radius - h_start) / s;
            return Ok(delta.max(0.0).min(cut));
        }
        start = cut;
        h_start = h_cut;
    }
    // Terminal ray: the slope is sum |d_i| > 0, so the ball is always exited.
    let s: f64 = d.iter().map(|v| v.abs()).sum();
    Ok((start + (radius - h_start) / s).max(0.0))
}

/// Normal cone test on the l1 ball without facet rows. At a boundary point
/// the cone is `{y : y_i = theta * sign(x_i) on the support, |y_i| <= theta
/// off it, theta >= 0}`; in the interior it is `{0}`.
fn l1_normal_cone_member(x: &[f64], y: &[f64], radius: f64, tol: f64) -> bool {
    let interior = norm1(x) < radius - EPS_ACTIVE * (1.0 + radius);
    if interior {
        return norm(y) <= tol;
    }
    let support_tol = EPS_ACTIVE * (1.0 + radius);
    let mut theta: Option<f64> = None;
    for (xi, yi) in x.iter().zip(y.iter()) {
        if xi.abs() > support_tol {
            let cand = yi * xi.signum();
            match theta {
                None => theta = Some(cand),
                Some(t) => {
                    if (cand - t).abs() > tol {
                        return false;
                    }
                }
            }
        }
    }
    let theta = theta.expect("boundary point of the l1 ball has a nonzero coordinate");
    if theta < -tol {
        return false;
    }
    x.iter()
        .zip(y.iter())
        .all(|(xi, yi)| xi.abs() > support_tol || yi.abs() <= theta + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, max_abs_diff};
    use crate::problems::SplitMix64;

    fn triangle() -> Polytope {
        let a = DenseMatrix::from_rows(&[
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        Polytope::generic(a, vec![0.0, 0.0, 1.0]).unwrap()
    }

    fn unit_box2() -> Polytope {
        Polytope::hyperbox(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn active_set_matches_hand_examples() {
        let bx = unit_box2();
        assert!(bx.active_set(&[0.5, 0.5]).unwrap().is_empty());
        assert_eq!(bx.active_set(&[1.0, 0.3]).unwrap().indices, vec![0]);
        let tri = triangle();
        assert_eq!(tri.active_set(&[1.0, 0.0]).unwrap().indices, vec![1, 2]);
    }

    #[test]
    fn active_set_rejects_infeasible_points() {
        let bx = unit_box2();
        let err = bx.active_set(&[1.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::Infeasible { row: 0, .. }), "{err:?}");
    }

    #[test]
    fn max_step_matches_hand_examples() {
        let bx = unit_box2();
        assert!((bx.max_step(&[0.5, 0.5], &[1.0, 0.0]).unwrap() - 0.5).abs() <= 1e-12);
        let tri = triangle();
        assert!((tri.max_step(&[0.2, 0.2], &[0.0, -1.0]).unwrap() - 0.2).abs() <= 1e-12);
        // On the hypotenuse moving along it: the first wall is x1 >= 0 at 1.0.
        assert!((tri.max_step(&[0.5, 0.5], &[-0.5, 0.5]).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn max_step_lands_on_boundary_and_overshoot_violates() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..40 {
            let n = 2 + (rng.next_u64() % 3) as usize;
            let p = random_polytope(&mut rng, n);
            let x = vec![0.0; n]; // strictly interior by construction
            let d: Vector = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
            if norm(&d) < 1e-3 {
                continue;
            }
            let gamma = p.max_step(&x, &d).unwrap();
            let landing: Vector = (0..n).map(|j| x[j] + gamma * d[j]).collect();
            assert!(p.feasibility_violation(&landing) <= EPS_ACTIVE, "landing infeasible");
            let over: Vector = (0..n).map(|j| x[j] + (gamma + 1e-6) * d[j]).collect();
            assert!(p.feasibility_violation(&over) > 1e-12, "overshoot stayed feasible");
        }
    }

    fn random_polytope(rng: &mut SplitMix64, n: usize) -> Polytope {
        let extra = 2 + (rng.next_u64() % 4) as usize;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut b: Vector = Vec::new();
        for i in 0..n {
            let mut up = vec![0.0; n];
            up[i] = 1.0;
            rows.push(up.clone());
            b.push(0.6 + rng.next_f64());
            let mut dn = vec![0.0; n];
            dn[i] = -1.0;
            rows.push(dn);
            b.push(0.6 + rng.next_f64());
        }
        for _ in 0..extra {
            rows.push((0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect());
            b.push(0.3 + rng.next_f64());
        }
        Polytope::generic(DenseMatrix::from_rows(&rows).unwrap(), b).unwrap()
    }

    #[test]
    fn lo_oracle_matches_hand_examples() {
        let tri = triangle();
        assert!(max_abs_diff(&tri.lo_oracle(&[-2.0, -1.0]).unwrap(), &[1.0, 0.0]) <= 1e-8);
        // Largest |c_j| wins and the sign opposes c: argmin over the ball.
        let l1 = Polytope::l1_ball(2, 1.0).unwrap();
        assert!(max_abs_diff(&l1.lo_oracle(&[0.3, -0.9]).unwrap(), &[0.0, 1.0]) <= 1e-12);
        // Nodes s=0, a=1, t=2; edges (s,a), (a,t), (s,t) with costs 1, 1, 3.
        let dag = Dag::new(3, vec![(0, 1), (1, 2), (0, 2)], 0, 2).unwrap();
        let fl = Polytope::flow(dag).unwrap();
        assert!(max_abs_diff(&fl.lo_oracle(&[1.0, 1.0, 3.0]).unwrap(), &[1.0, 1.0, 0.0]) <= 1e-12);
    }

    #[test]
    fn lo_oracle_agrees_across_kind_and_generic_posing() {
        let mut rng = SplitMix64::new(11);
        let box3 = Polytope::hyperbox(vec![-0.5, 0.0, 0.25], vec![1.0, 2.0, 0.75]).unwrap();
        let box3_gen = Polytope::generic(box3.a().clone(), box3.b().to_vec()).unwrap();
        let sim4 = Polytope::simplex(4).unwrap();
        let sim4_gen = Polytope::generic(sim4.a().clone(), sim4.b().to_vec()).unwrap();
        let l1_3 = Polytope::l1_ball(3, 1.5).unwrap();
        let (fa, fb) = l1_ball_facets(3, 1.5).unwrap();
        let l1_gen = Polytope::generic(fa, fb).unwrap();
        let dag = Dag::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)], 0, 3).unwrap();
        let flow = Polytope::flow(dag).unwrap();
        let flow_gen = Polytope::generic(flow.a().clone(), flow.b().to_vec()).unwrap();
        let pairs: Vec<(&Polytope, &Polytope)> =
            vec![(&box3, &box3_gen), (&sim4, &sim4_gen), (&l1_3, &l1_gen), (&flow, &flow_gen)];
        for (structured, generic) in pairs {
            for _ in 0..50 {
                let c: Vector =
                    (0..structured.dim()).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                let vs = structured.lo_oracle(&c).unwrap();
                let vg = generic.lo_oracle(&c).unwrap();
                assert!(
                    (dot(&c, &vs) - dot(&c, &vg)).abs() <= 1e-8,
                    "kind {:?}: {} vs {}",
                    structured.kind(),
                    dot(&c, &vs),
                    dot(&c, &vg)
                );
            }
        }
    }

    #[test]
    fn normal_cone_member_matches_hand_examples() {
        let bx = unit_box2();
        assert!(bx.normal_cone_member(&[1.0, 0.3], &[5.0, 0.0]).unwrap());
        assert!(!bx.normal_cone_member(&[1.0, 0.3], &[0.0, 1.0]).unwrap());
        assert!(bx.normal_cone_member(&[0.5, 0.5], &[0.0, 0.0]).unwrap());
    }

    #[test]
    fn normal_cone_member_agrees_with_vertex_inequalities() {
        let mut rng = SplitMix64::new(23);
        let mut checked = 0;
        for _ in 0..30 {
            let n = 2 + (rng.next_u64() % 2) as usize;
            let p = random_polytope(&mut rng, n);
            let verts = p.enumerate_vertices(10_000).unwrap();
            // Probe at vertices and at edge midpoints of the vertex list.
            let mut probes: Vec<Vector> = verts.clone();
            if verts.len() >= 2 {
                probes.push(
                    verts[0].iter().zip(verts[1].iter()).map(|(a, b)| 0.5 * (a + b)).collect(),
                );
            }
            for x in probes {
                if p.feasibility_violation(&x) > EPS_ACTIVE {
                    continue;
                }
                let y: Vector = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                let member = p.normal_cone_member(&x, &y).unwrap();
                let worst = verts
                    .iter()
                    .map(|z| dot(&y, &sub_vec(z, &x)))
                    .fold(f64::NEG_INFINITY, f64::max);
                // Skip the ambiguous band around the tolerance boundary.
                if worst > 1e-10 && worst < 1e-5 {
                    continue;
                }
                assert_eq!(member, worst <= 1e-8, "worst = {worst}");
                checked += 1;
            }
        }
        assert!(checked >= 40, "too few decisive probes: {checked}");
    }

    fn sub_vec(a: &[f64], b: &[f64]) -> Vector {
        a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
    }

    #[test]
    fn flow_polytopes_match_their_path_structure() {
        let parallel = Polytope::flow(Dag::new(2, vec![(0, 1), (0, 1)], 0, 1).unwrap()).unwrap();
        let vs = parallel.enumerate_vertices(100).unwrap();
        assert_eq!(vs.len(), 2);
        assert!(vs.iter().any(|v| max_abs_diff(v, &[1.0, 0.0]) <= 1e-12));
        assert!(vs.iter().any(|v| max_abs_diff(v, &[0.0, 1.0]) <= 1e-12));

        let diamond =
            Polytope::flow(Dag::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)], 0, 3).unwrap())
                .unwrap();
        assert_eq!(diamond.enumerate_vertices(100).unwrap().len(), 2);

        let chain = Polytope::flow(Dag::new(3, vec![(0, 1), (1, 2)], 0, 2).unwrap()).unwrap();
        let vs = chain.enumerate_vertices(100).unwrap();
        assert_eq!(vs.len(), 1);
        assert!(max_abs_diff(&vs[0], &[1.0, 1.0]) <= 1e-12);
        assert!(chain.diameter_bound() <= 1e-12);
    }

    #[test]
    fn dag_validation_rejects_cycles_and_disconnection() {
        let err = Dag::new(3, vec![(0, 1), (1, 2), (2, 0)], 0, 2).unwrap_err();
        assert_eq!(err, Error::NotADag);
        let err = Dag::new(3, vec![(0, 1)], 0, 2).unwrap_err();
        assert_eq!(err, Error::Disconnected);
    }

    #[test]
    fn construction_rejects_empty_and_unbounded_regions() {
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let err = Polytope::generic(a, vec![-1.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::EmptyPolytope);
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let err = Polytope::generic(a, vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::UnboundedPolytope(_)), "{err:?}");
    }

    #[test]
    fn diameter_bound_dominates_true_diameter() {
        let mut rng = SplitMix64::new(37);
        for _ in 0..10 {
            let n = 2 + (rng.next_u64() % 2) as usize;
            let p = random_polytope(&mut rng, n);
            let verts = p.enumerate_vertices(10_000).unwrap();
            let mut true_d: f64 = 0.0;
            for i in 0..verts.len() {
                for j in i + 1..verts.len() {
                    true_d = true_d.max(norm(&sub_vec(&verts[i], &verts[j])));
                }
            }
            assert!(p.diameter_bound() >= true_d - 1e-9);
        }
        let bx = Polytope::hyperbox(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap();
        assert!((bx.diameter_bound() - 5.0).abs() <= 1e-12);
        let sim = Polytope::simplex(3).unwrap();
        assert!((sim.diameter_bound() - 3.0_f64.sqrt()).abs() <= 1e-12);
        let l1 = Polytope::l1_ball(4, 2.0).unwrap();
        assert!((l1.diameter_bound() - 8.0).abs() <= 1e-12);
    }

    #[test]
    fn l1_closed_forms_agree_with_materialized_facets() {
        let mut rng = SplitMix64::new(53);
        for n in 2..=5 {
            let radius = 0.5 + rng.next_f64();
            let l1 = Polytope::l1_ball(n, radius).unwrap();
            let (fa, fb) = l1_ball_facets(n, radius).unwrap();
            let gen = Polytope::generic(fa, fb).unwrap();
            for _ in 0..40 {
                // A feasible point, sometimes squarely on the boundary.
                let mut x: Vector = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                let s = norm1(&x);
                let scale = if rng.next_f64() < 0.5 { radius / s } else { 0.6 * radius / s };
                for v in x.iter_mut() {
                    *v *= scale;
                }
                let d: Vector = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                let a = l1.max_step(&x, &d).unwrap();
                let b = gen.max_step(&x, &d).unwrap();
                assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "max_step {a} vs {b}");
                let y: Vector = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                assert_eq!(
                    l1.normal_cone_member(&x, &y).unwrap(),
                    gen.normal_cone_member(&x, &y).unwrap(),
                    "normal cone disagreement at x={x:?} y={y:?}"
                );
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_every_kind() {
        let tri = triangle();
        let dag = Dag::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)], 0, 3).unwrap();
        let polys = vec![
            tri,
            Polytope::hyperbox(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap(),
            Polytope::simplex(3).unwrap(),
            Polytope::l1_ball(4, 1.25).unwrap(),
            Polytope::flow(dag).unwrap(),
        ];
        for p in polys {
            let back = Polytope::from_json(&p.to_json()).unwrap();
            assert_eq!(p.kind(), back.kind());
            assert_eq!(p.num_rows(), back.num_rows());
            assert!(max_abs_diff(p.b(), back.b()) <= 1e-15);
            assert!((p.diameter_bound() - back.diameter_bound()).abs() <= 1e-12);
        }
    }

    #[test]
    fn enumerate_vertices_finds_the_classic_sets() {
        let tri = triangle();
        let vs = tri.enumerate_vertices(100).unwrap();
        assert_eq!(vs.len(), 3);
        for expect in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] {
            assert!(vs.iter().any(|v| max_abs_diff(v, &expect) <= 1e-9));
        }
        let l1 = Polytope::l1_ball(2, 1.5).unwrap();
        assert_eq!(l1.enumerate_vertices(100).unwrap().len(), 4);
    }
}
