//! Deterministic dense linear programming.
//!
//! A two-phase primal simplex with Bland's rule backs the generic LO oracle,
//! boundedness probes during polytope construction, and the maximum in-face
//! movement LP. Instances are small, so the implementation favours
//! determinism and auditability over speed: full-tableau pivots, lowest-index
//! tie-breaking, explicit artificial variables on every row.

use crate::linalg::{dot, is_finite_slice, norm1, norm_inf, DenseMatrix, Vector};
use crate::{Error, Result};

/// Magnitude below which a tableau entry cannot serve as a pivot.
const PIVOT_TOL: f64 = 1e-9;

/// A linear program `min c^T y` subject to `G y <= h`, `E y = f`, and
/// optional per-variable bounds.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    /// Minimized objective `c`.
    pub objective: Vector,
    /// Inequality block `G y <= h`.
    pub ineq: Option<(DenseMatrix, Vector)>,
    /// Equality block `E y = f`.
    pub eq: Option<(DenseMatrix, Vector)>,
    /// Per-variable `(lower, upper)` bounds; `None` sides are free.
    ///
    /// Variables with a finite lower bound are shifted, not split, so when
    /// every stated bound is valid for the feasible region the reported
    /// optimum is a vertex of that region.
    pub bounds: Option<Vec<(Option<f64>, Option<f64>)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver outcome. `point` and `value` are meaningful only when `status`
/// is [`LpStatus::Optimal`]; otherwise they are empty and NaN.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Vector,
    pub value: f64,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        Self { status, point: Vec::new(), value: f64::NAN }
    }
}

enum VarMap {
    Shift { col: usize, lo: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

enum RunEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= piv;
        }
        self.rhs[r] /= piv;
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let factor = self.t[i][c];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                self.t[i][j] -= factor * self.t[r][j];
            }
            self.rhs[i] -= factor * self.rhs[r];
            if self.rhs[i] < 0.0 && self.rhs[i] > -1e-11 {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs and objective value for the current basis.
    fn reduced_costs(&self, costs: &[f64]) -> (Vec<f64>, f64) {
        let mut rc = costs.to_vec();
        let mut obj = 0.0;
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                obj += cb * self.rhs[i];
                for j in 0..self.cols {
                    rc[j] -= cb * self.t[i][j];
                }
            }
        }
        (rc, obj)
    }

    /// Bland-rule simplex until optimal or unbounded, within the pivot budget.
    fn run(&mut self, costs: &[f64], budget: &mut usize, used: &mut usize) -> Result<RunEnd> {
        let tol_rc = 1e-9 * (1.0 + norm_inf(costs));
        loop {
            let (rc, _) = self.reduced_costs(costs);
            let Some(enter) = rc.iter().position(|&v| v < -tol_rc) else {
                return Ok(RunEnd::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let coeff = self.t[i][enter];
                if coeff > PIVOT_TOL {
                    let ratio = self.rhs[i] / coeff;
                    let better = match leave {
                        None => true,
                        Some((best_i, best_ratio)) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[i] < self.basis[best_i])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(RunEnd::Unbounded);
            };
            if *budget == 0 {
                return Err(Error::NumericalStall { pivots: *used });
            }
            *budget -= 1;
            *used += 1;
            self.pivot(row, enter);
        }
    }
}

/// Solve a dense LP with the two-phase simplex.
///
/// Determinism: Bland's rule (lowest eligible column enters, ratio ties break
/// toward the lowest basic index), so equal inputs give identical outputs and
/// the reported optimum sits at a vertex of the standard-form region.
pub fn solve_lp(p: &LinearProgram) -> Result<LpSolution> {
    let n = p.objective.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("lp with zero variables".to_string()));
    }
    if !is_finite_slice(&p.objective) {
        return Err(Error::NonFiniteInput("lp objective"));
    }

    // Gather rows in y-space: inequalities, upper bounds as rows, equalities.
    let mut g_rows: Vec<(Vec<f64>, f64)> = Vec::new();
    if let Some((g, h)) = &p.ineq {
        if g.cols() != n || g.rows() != h.len() {
            return Err(Error::DimensionMismatch("lp inequality block".to_string()));
        }
        if !is_finite_slice(h) {
            return Err(Error::NonFiniteInput("lp inequality rhs"));
        }
        for i in 0..g.rows() {
            g_rows.push((g.row(i).to_vec(), h[i]));
        }
    }
    let mut maps: Vec<VarMap> = Vec::with_capacity(n);
    let mut structural = 0usize;
    if let Some(bounds) = &p.bounds {
        if bounds.len() != n {
            return Err(Error::DimensionMismatch("lp bounds length".to_string()));
        }
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            if let Some(hi) = hi {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                g_rows.push((row, *hi));
            }
            match lo {
                Some(lo) => {
                    if !lo.is_finite() {
                        return Err(Error::NonFiniteInput("lp lower bound"));
                    }
                    maps.push(VarMap::Shift { col: structural, lo: *lo });
                    structural += 1;
                }
                None => {
                    maps.push(VarMap::Split { pos: structural, neg: structural + 1 });
                    structural += 2;
                }
            }
        }
    } else {
        for _ in 0..n {
            maps.push(VarMap::Split { pos: structural, neg: structural + 1 });
            structural += 2;
        }
    }
    let mut e_rows: Vec<(Vec<f64>, f64)> = Vec::new();
    if let Some((e, f)) = &p.eq {
        if e.cols() != n || e.rows() != f.len() {
            return Err(Error::DimensionMismatch("lp equality block".to_string()));
        }
        if !is_finite_slice(f) {
            return Err(Error::NonFiniteInput("lp equality rhs"));
        }
        for i in 0..e.rows() {
            e_rows.push((e.row(i).to_vec(), f[i]));
        }
    }
    if g_rows.is_empty() && e_rows.is_empty() {
        // Nothing constrains the problem except lower bounds; decide by signs.
        return no_row_solution(p, &maps, structural);
    }

    // Translate a y-space row into structural coordinates.
    let translate = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; structural];
        let mut r = rhs;
        for (i, coeff) in row.iter().enumerate() {
            if *coeff == 0.0 {
                continue;
            }
            match maps[i] {
                VarMap::Shift { col, lo } => {
                    out[col] += coeff;
                    r -= coeff * lo;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += coeff;
                    out[neg] -= coeff;
                }
            }
        }
        (out, r)
    };

    let n_ineq = g_rows.len();
    let m = n_ineq + e_rows.len();
    let n_std = structural + n_ineq + m; // structurals | slacks | artificials
    let art_floor = structural + n_ineq;
    let mut t = vec![vec![0.0; n_std]; m];
    let mut rhs = vec![0.0; m];
    for (r, (row, h)) in g_rows.iter().chain(e_rows.iter()).enumerate() {
        let (coeffs, mut b) = translate(row, *h);
        let mut coeffs = coeffs;
        let mut slack = if r < n_ineq { 1.0 } else { 0.0 };
        if b < 0.0 {
            for c in coeffs.iter_mut() {
                *c = -*c;
            }
            slack = -slack;
            b = -b;
        }
        t[r][..structural].copy_from_slice(&coeffs);
        if r < n_ineq {
            t[r][structural + r] = slack;
        }
        t[r][art_floor + r] = 1.0;
        rhs[r] = b;
    }
    let mut tab = Tableau { rows: m, cols: n_std, t, rhs, basis: (art_floor..art_floor + m).collect() };

    let mut budget = 10 * (m + n_std) * (m + n_std);
    let mut used = 0usize;

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![0.0; n_std];
    for c in phase1.iter_mut().skip(art_floor) {
        *c = 1.0;
    }
    match tab.run(&phase1, &mut budget, &mut used)? {
        RunEnd::Optimal => {}
        RunEnd::Unbounded => return Err(Error::NumericalStall { pivots: used }),
    }
    let (_, infeas) = tab.reduced_costs(&phase1);
    let feas_cut = 1e-8 * (1.0 + norm1(&tab.rhs));
    if infeas > feas_cut {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
    }

    // Drive basic artificials out; delete rows that prove redundant.
    let mut r = 0;
    while r < tab.rows {
        if tab.basis[r] >= art_floor {
            if let Some(c) = (0..art_floor).find(|&c| tab.t[r][c].abs() > PIVOT_TOL) {
                tab.pivot(r, c);
            } else {
                tab.t.remove(r);
                tab.rhs.remove(r);
                tab.basis.remove(r);
                tab.rows -= 1;
                continue;
            }
        }
        r += 1;
    }
    for row in tab.t.iter_mut() {
        row.truncate(art_floor);
    }
    tab.cols = art_floor;

    // Phase 2: the real objective over structural columns.
    let mut phase2 = vec![0.0; art_floor];
    for (i, map) in maps.iter().enumerate() {
        match map {
            VarMap::Shift { col, .. } => phase2[*col] += p.objective[i],
            VarMap::Split { pos, neg } => {
                phase2[*pos] += p.objective[i];
                phase2[*neg] -= p.objective[i];
            }
        }
    }
    match tab.run(&phase2, &mut budget, &mut used)? {
        RunEnd::Optimal => {}
        RunEnd::Unbounded => return Ok(LpSolution::non_optimal(LpStatus::Unbounded)),
    }

    // Reconstruct y from the standard-form basic solution.
    let mut x_std = vec![0.0; art_floor];
    for i in 0..tab.rows {
        if tab.basis[i] < art_floor {
            x_std[tab.basis[i]] = tab.rhs[i];
        }
    }
    let point: Vector = maps
        .iter()
        .map(|map| match map {
            VarMap::Shift { col, lo } => x_std[*col] + lo,
            VarMap::Split { pos, neg } => x_std[*pos] - x_std[*neg],
        })
        .collect();

    // Contract check: an Optimal report must satisfy the original rows.
    if let Some((g, h)) = &p.ineq {
        let gx = g.matvec(&point);
        for i in 0..h.len() {
            if gx[i] - h[i] > 1e-8 * (1.0 + h[i].abs()) {
                return Err(Error::NumericalStall { pivots: used });
            }
        }
    }
    if let Some((e, f)) = &p.eq {
        let ex = e.matvec(&point);
        for i in 0..f.len() {
            if (ex[i] - f[i]).abs() > 1e-8 * (1.0 + f[i].abs()) {
                return Err(Error::NumericalStall { pivots: used });
            }
        }
    }

    let value = dot(&p.objective, &point);
    Ok(LpSolution { status: LpStatus::Optimal, point, value })
}

/// Degenerate case: no rows at all, only lower bounds and free variables.
fn no_row_solution(p: &LinearProgram, maps: &[VarMap], _structural: usize) -> Result<LpSolution> {
    let mut point = vec![0.0; p.objective.len()];
    for (i, map) in maps.iter().enumerate() {
        match map {
            VarMap::Shift { lo, .. } => {
                if p.objective[i] < 0.0 {
                    return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
                }
                point[i] = *lo;
            }
            VarMap::Split { .. } => {
                if p.objective[i] != 0.0 {
                    return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
                }
            }
        }
    }
    let value = dot(&p.objective, &point);
    Ok(LpSolution { status: LpStatus::Optimal, point, value })
}

/// Largest curve parameter that keeps the in-face residual inside the active
/// normal cone.
///
/// Solves `max lambda` subject to
/// `x0 - lambda*w - x - (lambda - lambda_x)*dhat = A_I^T mu`, `mu >= 0`,
/// over `lambda in [lambda_x, lambda_cap]`. The anchor `lambda = lambda_x` is
/// feasible by the caller's active-set contract, so infeasibility signals an
/// upstream bug and comes back as [`Error::InfeasibleContract`]. The explicit
/// cap keeps the LP bounded under floating-point noise; callers pass their
/// maximal in-face movement bound plus one.
pub fn max_inface_lambda(
    a_i: &DenseMatrix,
    x0: &[f64],
    w: &[f64],
    x: &[f64],
    lambda_x: f64,
    dhat: &[f64],
    lambda_cap: f64,
) -> Result<f64> {
    let n = x0.len();
    if w.len() != n || x.len() != n || dhat.len() != n || a_i.cols() != n {
        return Err(Error::DimensionMismatch("max_inface_lambda inputs".to_string()));
    }
    if !is_finite_slice(x0) || !is_finite_slice(w) || !is_finite_slice(x) || !is_finite_slice(dhat) {
        return Err(Error::NonFiniteInput("max_inface_lambda inputs"));
    }
    if !lambda_x.is_finite() || !lambda_cap.is_finite() {
        return Err(Error::NonFiniteInput("max_inface_lambda lambdas"));
    }
    let k = a_i.rows();
    let cap = (lambda_cap - lambda_x).max(0.0);

    // Variables: [delta, mu_0, .., mu_{k-1}], all >= 0 with delta = lambda - lambda_x.
    // Equalities per coordinate j: (w_j + dhat_j)*delta + sum_i A_I[i][j]*mu_i = p_j.
    let p_vec: Vector = (0..n).map(|j| x0[j] - lambda_x * w[j] - x[j]).collect();
    let eq = DenseMatrix::from_fn(n, k + 1, |j, col| {
        if col == 0 {
            w[j] + dhat[j]
        } else {
            a_i.get(col - 1, j)
        }
    });
    let mut objective = vec![0.0; k + 1];
    objective[0] = -1.0;
    let mut bounds = vec![(Some(0.0), None); k + 1];
    bounds[0] = (Some(0.0), Some(cap));
    let lp = LinearProgram {
        objective,
        ineq: None,
        eq: Some((eq, p_vec)),
        bounds: Some(bounds),
    };
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(lambda_x + sol.point[0]),
        LpStatus::Infeasible => Err(Error::InfeasibleContract),
        // The delta variable is capped, so the LP cannot be unbounded.
        LpStatus::Unbounded => Err(Error::NumericalStall { pivots: 0 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        least_squares, max_abs_diff, nnls, norm, pseudoinverse_projector, sub,
    };
    use crate::problems::SplitMix64;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn triangle_lp_finds_vertex_with_split_variables() {
        let lp = LinearProgram {
            objective: vec![-2.0, -1.0],
            ineq: Some((mat(&[&[-1.0, 0.0], &[0.0, -1.0], &[1.0, 1.0]]), vec![0.0, 0.0, 1.0])),
            eq: None,
            bounds: None,
        };
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value + 2.0).abs() <= 1e-9, "value = {}", sol.value);
        assert!(max_abs_diff(&sol.point, &[1.0, 0.0]) <= 1e-8, "point = {:?}", sol.point);
    }

    #[test]
    fn triangle_lp_finds_vertex_with_shifted_variables() {
        let lp = LinearProgram {
            objective: vec![-2.0, -1.0],
            ineq: Some((mat(&[&[1.0, 1.0]]), vec![1.0])),
            eq: None,
            bounds: Some(vec![(Some(0.0), None), (Some(0.0), None)]),
        };
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value + 2.0).abs() <= 1e-9);
        assert!(max_abs_diff(&sol.point, &[1.0, 0.0]) <= 1e-8);
    }

    #[test]
    fn contradictory_rows_report_infeasible() {
        let lp = LinearProgram {
            objective: vec![0.0],
            ineq: Some((mat(&[&[1.0], &[-1.0]]), vec![-1.0, 0.0])),
            eq: None,
            bounds: None,
        };
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn open_ray_reports_unbounded() {
        let lp = LinearProgram {
            objective: vec![-1.0],
            ineq: Some((mat(&[&[-1.0]]), vec![0.0])),
            eq: None,
            bounds: None,
        };
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_block_is_respected() {
        let lp = LinearProgram {
            objective: vec![1.0, 2.0],
            ineq: None,
            eq: Some((mat(&[&[1.0, 1.0]]), vec![1.0])),
            bounds: Some(vec![(Some(0.0), None), (Some(0.0), None)]),
        };
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 1.0).abs() <= 1e-9);
        assert!(max_abs_diff(&sol.point, &[1.0, 0.0]) <= 1e-8);
    }

    fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..m {
                cur.push(i);
                rec(i + 1, m, k, cur, out);
                cur.pop();
            }
        }
        rec(0, m, k, &mut cur, &mut out);
        out
    }

    /// Exhaustive vertex-enumeration minimum for an inequality-only LP.
    fn brute_min(g: &DenseMatrix, h: &[f64], c: &[f64]) -> Option<f64> {
        let n = c.len();
        let mut best: Option<f64> = None;
        for s in combinations(g.rows(), n) {
            let a_s = g.select_rows(&s);
            let b_s: Vector = s.iter().map(|&i| h[i]).collect();
            let x = least_squares(&a_s, &b_s).unwrap();
            if max_abs_diff(&a_s.matvec(&x), &b_s) > 1e-8 {
                continue;
            }
            let null = pseudoinverse_projector(&a_s).unwrap();
            if norm_inf(null.entries()) > 1e-8 {
                continue; // not a unique intersection point
            }
            let gx = g.matvec(&x);
            if (0..h.len()).all(|i| gx[i] <= h[i] + 1e-7) {
                let v = dot(c, &x);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        best
    }

    #[test]
    fn simplex_agrees_with_vertex_enumeration() {
        let mut rng = SplitMix64::new(91);
        for trial in 0..25 {
            let n = 2 + (rng.next_u64() % 3) as usize;
            let extra = 1 + (rng.next_u64() % 5) as usize;
            let mut rows: Vec<Vec<f64>> = Vec::new();
            let mut h: Vector = Vec::new();
            // Box rows keep the region bounded; origin stays strictly feasible.
            for i in 0..n {
                let mut up = vec![0.0; n];
                up[i] = 1.0;
                rows.push(up.clone());
                h.push(1.0 + 2.0 * rng.next_f64());
                let mut dn = vec![0.0; n];
                dn[i] = -1.0;
                rows.push(dn);
                h.push(1.0 + 2.0 * rng.next_f64());
            }
            for _ in 0..extra {
                rows.push((0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect());
                h.push(0.1 + rng.next_f64());
            }
            let g = DenseMatrix::from_rows(&rows).unwrap();
            let c: Vector = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
            let lp = LinearProgram {
                objective: c.clone(),
                ineq: Some((g.clone(), h.clone())),
                eq: None,
                bounds: None,
            };
            let sol = solve_lp(&lp).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
            let brute = brute_min(&g, &h, &c).expect("bounded feasible LP has a vertex optimum");
            assert!(
                (sol.value - brute).abs() <= 1e-7 * (1.0 + brute.abs()),
                "trial {trial}: simplex {} vs enumeration {brute}",
                sol.value
            );
        }
    }

    fn cone_member(a_i: &DenseMatrix, q: &[f64]) -> bool {
        let out = nnls(a_i, q).unwrap();
        norm(&out.residual) <= 1e-8 * (1.0 + norm(q))
    }

    /// Grid-scan reference for the in-face lambda maximum.
    fn grid_max_lambda(
        a_i: &DenseMatrix,
        x0: &[f64],
        w: &[f64],
        x: &[f64],
        lambda_x: f64,
        dhat: &[f64],
        hi: f64,
        steps: usize,
    ) -> f64 {
        let mut best = lambda_x;
        for k in 0..=steps {
            let lam = lambda_x + (hi - lambda_x) * k as f64 / steps as f64;
            let q: Vector = (0..x0.len())
                .map(|j| x0[j] - lam * w[j] - x[j] - (lam - lambda_x) * dhat[j])
                .collect();
            if cone_member(a_i, &q) {
                best = lam;
            } else {
                break;
            }
        }
        best
    }

    #[test]
    fn inface_lambda_single_row_cone() {
        // p = (1,1) in cone([1,1]); drifting by w = (1,1) exits at delta = 1.
        let a_i = mat(&[&[1.0, 1.0]]);
        let lambda_x = 0.25;
        let w = vec![1.0, 1.0];
        let x = vec![0.0, 0.0];
        let x0 = vec![1.0 + lambda_x, 1.0 + lambda_x];
        let got =
            max_inface_lambda(&a_i, &x0, &w, &x, lambda_x, &[0.0, 0.0], lambda_x + 5.0).unwrap();
        assert!((got - (lambda_x + 1.0)).abs() <= 1e-8, "got {got}");
    }

    #[test]
    fn inface_lambda_interior_drift_matches_grid_oracle() {
        // Orthant cone; residual stays inside until the first coordinate dies.
        let a_i = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let lambda_x = 0.5;
        let w = vec![1.0, 0.0];
        let x = vec![0.0, 0.0];
        let x0 = vec![2.0 + lambda_x * 1.0, 1.0];
        let got =
            max_inface_lambda(&a_i, &x0, &w, &x, lambda_x, &[0.0, 0.0], lambda_x + 10.0).unwrap();
        assert!((got - 2.5).abs() <= 1e-8, "got {got}");
        let grid = grid_max_lambda(&a_i, &x0, &w, &x, lambda_x, &[0.0, 0.0], lambda_x + 10.0, 4000);
        assert!((got - grid).abs() <= 3e-3, "lp {got} vs grid {grid}");
    }

    #[test]
    fn inface_lambda_immediate_exit_returns_anchor() {
        let a_i = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let lambda_x = 0.75;
        let w = vec![0.0, 1.0];
        let x = vec![0.0, 0.0];
        // p = (1, 0): on the cone boundary, and w pushes the second coordinate negative.
        let x0 = vec![1.0, lambda_x];
        let got =
            max_inface_lambda(&a_i, &x0, &w, &x, lambda_x, &[0.0, 0.0], lambda_x + 10.0).unwrap();
        assert!((got - lambda_x).abs() <= 1e-8, "got {got}");
    }

    #[test]
    fn inface_lambda_certificate_passes_at_star_fails_past_it() {
        let mut rng = SplitMix64::new(123);
        let mut nontrivial = 0;
        for _ in 0..40 {
            let n = 2 + (rng.next_u64() % 3) as usize;
            let k = 1 + (rng.next_u64() % n as u64) as usize;
            let a_i = DenseMatrix::from_fn(k, n, |_, _| rng.next_f64() * 2.0 - 1.0);
            // Build p strictly inside the cone so lambda_x is robustly feasible.
            let mu: Vector = (0..k).map(|_| 0.3 + rng.next_f64()).collect();
            let p = a_i.t_matvec(&mu);
            let w: Vector = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
            let dhat: Vector = (0..n).map(|_| rng.next_f64() * 0.4 - 0.2).collect();
            let lambda_x = rng.next_f64();
            let x = vec![0.0; n];
            let x0: Vector = (0..n).map(|j| p[j] + lambda_x * w[j]).collect();
            let cap = lambda_x + 8.0;
            let star =
                max_inface_lambda(&a_i, &x0, &w, &x, lambda_x, &dhat, cap).unwrap();
            let q_at = |lam: f64| -> Vector {
                (0..n)
                    .map(|j| x0[j] - lam * w[j] - x[j] - (lam - lambda_x) * dhat[j])
                    .collect()
            };
            assert!(cone_member(&a_i, &q_at(star)), "membership must hold at lambda*");
            if star < cap - 1e-6 && star > lambda_x + 1e-6 {
                nontrivial += 1;
                let past = star + 1e-4 * (1.0 + star);
                assert!(
                    !cone_member(&a_i, &q_at(past)),
                    "membership must fail just past lambda* = {star}"
                );
                let grid = grid_max_lambda(&a_i, &x0, &w, &x, lambda_x, &dhat, cap, 4000);
                assert!(
                    (star - grid).abs() <= (cap - lambda_x) / 1000.0,
                    "lp {star} vs grid {grid}"
                );
            }
        }
        assert!(nontrivial >= 5, "want enough interior cases, got {nontrivial}");
    }

    #[test]
    fn inface_lambda_rejects_points_outside_cone() {
        // p far outside the cone of a single generator: the anchor itself fails.
        let a_i = mat(&[&[1.0, 0.0]]);
        let err = max_inface_lambda(
            &a_i,
            &[-3.0, 5.0],
            &[0.0, 0.0],
            &[0.0, 0.0],
            0.0,
            &[0.0, 0.0],
            4.0,
        )
        .unwrap_err();
        assert_eq!(err, Error::InfeasibleContract);
    }

    #[test]
    fn feasibility_of_reported_optimum_is_rechecked() {
        // A benign LP must come back Optimal and satisfy its rows; this guards
        // the final contract check rather than the solver path itself.
        let lp = LinearProgram {
            objective: vec![1.0, 1.0, 1.0],
            ineq: Some((
                mat(&[&[1.0, 2.0, -1.0], &[-1.0, 0.5, 2.0], &[0.3, -1.0, 0.7]]),
                vec![2.0, 1.5, 1.0],
            )),
            eq: Some((mat(&[&[1.0, 1.0, 1.0]]), vec![1.0])),
            bounds: Some(vec![(Some(-2.0), Some(2.0)); 3]),
        };
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let s = sub(&sol.point, &[0.0; 3]);
        assert!((s.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
    }
}
