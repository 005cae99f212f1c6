//! Exact Euclidean projection onto polytopes.
//!
//! This is the ground-truth oracle the curve tracer is validated against, so
//! it favours exactness: a primal active-set QP with minimum-norm KKT solves
//! for generic polytopes, closed forms for boxes, simplices, and l1 balls.

use crate::linalg::{
    is_finite_slice, least_squares, nnls, norm, norm1, pseudoinverse_projector, sub, Vector,
};
use crate::logging;
use crate::polytope::{ActiveSet, Polytope, PolytopeKind};
use crate::{Error, Result};

/// A projection with its first-order certificate: `y - point = A_I^T mu`
/// with `mu >= 0` over the active rows. The l1 ball keeps facets implicit,
/// so there `active` and `multipliers` are empty and the certificate is the
/// closed-form normal-cone test instead.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub point: Vector,
    pub active: ActiveSet,
    pub multipliers: Vector,
    pub iterations: usize,
}

/// Projection `argmin_{x in P} |x - y|^2`, starting the active-set method
/// from the polytope's construction anchor.
pub fn project(p: &Polytope, y: &[f64]) -> Result<ProjectionResult> {
    project_warm(p, y, p.anchor())
}

/// Projection with a warm start: `start` must be feasible and is used to
/// seed the working set. Closed-form kinds ignore it.
pub fn project_warm(p: &Polytope, y: &[f64], start: &[f64]) -> Result<ProjectionResult> {
    if y.len() != p.dim() {
        return Err(Error::DimensionMismatch("projection input".to_string()));
    }
    if !is_finite_slice(y) {
        return Err(Error::NonFiniteInput("projection input"));
    }
    match p.kind() {
        PolytopeKind::Box { lo, hi } => {
            let point: Vector = y
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .map(|(v, (l, h))| v.max(*l).min(*h))
                .collect();
            certify(p, y, point, 0)
        }
        PolytopeKind::Simplex => certify(p, y, simplex_project(y, 1.0), 0),
        PolytopeKind::L1Ball { radius } => {
            let point = l1_project(y, *radius);
            Ok(ProjectionResult {
                point,
                active: ActiveSet::default(),
                multipliers: Vec::new(),
                iterations: 0,
            })
        }
        PolytopeKind::Generic | PolytopeKind::Flow { .. } => qp_project(p, y, start),
    }
}

/// Brute-force oracle projections along the curve `g(lambda) =
/// project(x0 - lambda w)`, warm-started left to right.
pub fn sample_curve(p: &Polytope, x0: &[f64], w: &[f64], lambdas: &[f64]) -> Result<Vec<Vector>> {
    p.ensure_feasible(x0)?;
    if w.len() != p.dim() {
        return Err(Error::DimensionMismatch("curve direction".to_string()));
    }
    if !is_finite_slice(w) || !is_finite_slice(lambdas) {
        return Err(Error::NonFiniteInput("curve inputs"));
    }
    if lambdas.windows(2).any(|ab| ab[0] > ab[1]) {
        return Err(Error::InvalidData("curve lambdas must be sorted ascending".to_string()));
    }
    let mut out = Vec::with_capacity(lambdas.len());
    let mut warm = x0.to_vec();
    for &lam in lambdas {
        let target: Vector = x0.iter().zip(w.iter()).map(|(a, b)| a - lam * b).collect();
        let res = project_warm(p, &target, &warm)?;
        warm = res.point.clone();
        out.push(res.point);
    }
    Ok(out)
}

/// Attach the active set and nnls-recovered multipliers to a closed-form
/// projection point.
fn certify(p: &Polytope, y: &[f64], point: Vector, iterations: usize) -> Result<ProjectionResult> {
    let active = p.active_set(&point)?;
    let a_i = p.rows_of(&active);
    let residual = sub(y, &point);
    let fit = nnls(&a_i, &residual)?;
    Ok(ProjectionResult { point, active, multipliers: fit.mu, iterations })
}

/// Primal active-set QP: minimize `|x - y|^2` over `Ax <= b`, treating the
/// working set as equalities, with minimum-norm KKT solves and lowest-index
/// multiplier drops. Equality pairs are never dropped (their joint
/// multiplier is sign-free); instead their multipliers are shifted
/// nonnegative at the end.
fn qp_project(p: &Polytope, y: &[f64], start: &[f64]) -> Result<ProjectionResult> {
    p.ensure_feasible(start)?;
    let mut x = start.to_vec();
    let mut working: Vec<usize> = p.active_set(&x)?.indices;
    let tol_mult = 1e-10 * (1.0 + norm(y));
    let cap = 100 * (p.num_rows() + p.dim()) + 10;
    for iter in 0..cap {
        let a_w = p.rows_of(&ActiveSet { indices: working.clone() });
        let b_w: Vector = working.iter().map(|&i| p.b()[i]).collect();
        // Equality projection onto {A_W x = b_W} without normal equations:
        // the gram form squares the condition number and the lost digits get
        // amplified by downstream difference quotients.
        let x_p = least_squares(&a_w, &b_w)?;
        let null_proj = pseudoinverse_projector(&a_w)?;
        let shifted = sub(y, &x_p);
        let mut xhat = null_proj.matvec(&shifted);
        for (t, v) in xhat.iter_mut().zip(x_p.iter()) {
            *t += v;
        }
        let nu = least_squares(&a_w.transpose(), &sub(y, &xhat))?;
        if p.feasibility_violation(&xhat) <= 1e-10 {
            let pair_locked = |k: usize| -> bool {
                p.equality_partner(working[k]).is_some_and(|j| working.contains(&j))
            };
            let drop = (0..working.len())
                .find(|&k| nu[k] < -tol_mult && !pair_locked(k));
            match drop {
                Some(k) => {
                    working.remove(k);
                    x = xhat;
                }
                None => return finish(p, y, xhat, &working, &nu, iter + 1),
            }
        } else {
            let d = sub(&xhat, &x);
            let dn = norm(&d);
            let ax = p.a().matvec(&x);
            let ad = p.a().matvec(&d);
            let mut alpha = 1.0;
            let mut block: Option<usize> = None;
            for j in 0..p.num_rows() {
                if working.contains(&j) {
                    continue;
                }
                if ad[j] > 1e-13 * (1.0 + dn) {
                    let step = ((p.b()[j] - ax[j]).max(0.0)) / ad[j];
                    if step < alpha - 1e-15 {
                        alpha = step;
                        block = Some(j);
                    }
                }
            }
            match block {
                Some(j) => {
                    for (xi, di) in x.iter_mut().zip(d.iter()) {
                        *xi += alpha * di;
                    }
                    let pos = working.partition_point(|&k| k < j);
                    working.insert(pos, j);
                }
                None => {
                    // Violated row parallel to the move: pin the worst one.
                    let worst = (0..p.num_rows())
                        .filter(|j| !working.contains(j))
                        .max_by(|&i, &j| {
                            let vi = ax[i] + ad[i] - p.b()[i];
                            let vj = ax[j] + ad[j] - p.b()[j];
                            vi.partial_cmp(&vj).expect("finite violations")
                        })
                        .ok_or(Error::IterationCap("projection working set"))?;
                    let pos = working.partition_point(|&k| k < worst);
                    working.insert(pos, worst);
                }
            }
        }
    }
    Err(Error::IterationCap("projection working set"))
}

fn finish(
    p: &Polytope,
    y: &[f64],
    point: Vector,
    working: &[usize],
    nu: &[f64],
    iterations: usize,
) -> Result<ProjectionResult> {
    let active = p.active_set(&point)?;
    let mut multipliers = vec![0.0; active.len()];
    for (slot, &row) in active.indices.iter().enumerate() {
        if let Some(k) = working.iter().position(|&w| w == row) {
            multipliers[slot] = nu[k];
        }
    }
    // Shift equality-pair multipliers into the nonnegative orthant; the pair
    // rows are exact negations so the certificate sum is unchanged.
    for (slot, &row) in active.indices.iter().enumerate() {
        if let Some(partner) = p.equality_partner(row) {
            if let Some(pslot) = active.indices.iter().position(|&r| r == partner) {
                let shift = (-multipliers[slot]).max(-multipliers[pslot]).max(0.0);
                if shift > 0.0 && pslot > slot {
                    multipliers[slot] += shift;
                    multipliers[pslot] += shift;
                }
            }
        }
    }
    for m in multipliers.iter_mut() {
        if *m < 0.0 && *m > -1e-9 * (1.0 + norm(y)) {
            *m = 0.0;
        }
    }
    let residual = sub(y, &point);
    match p.normal_cone_member(&point, &residual) {
        Ok(true) => {}
        Ok(false) => logging::error(&format!(
            "projection certificate failed: residual norm {}",
            norm(&residual)
        )),
        Err(e) => return Err(e),
    }
    Ok(ProjectionResult { point, active, multipliers, iterations })
}

/// Euclidean projection onto the scaled probability simplex
/// `{x >= 0, sum x = total}` by the sort-and-threshold rule.
pub fn simplex_project(y: &[f64], total: f64) -> Vector {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite coordinates"));
    let mut cumsum = 0.0;
    let mut tau = (sorted.iter().sum::<f64>() - total) / sorted.len() as f64;
    for (j, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let cand = (cumsum - total) / (j + 1) as f64;
        if v - cand <= 0.0 {
            break;
        }
        tau = cand;
    }
    y.iter().map(|&v| (v - tau).max(0.0)).collect()
}

/// Euclidean projection onto `{|x|_1 <= radius}`: identity inside, otherwise
/// soft-threshold with the simplex threshold of `|y|`.
pub fn l1_project(y: &[f64], radius: f64) -> Vector {
    if norm1(y) <= radius {
        return y.to_vec();
    }
    let abs: Vector = y.iter().map(|v| v.abs()).collect();
    let on_simplex = simplex_project(&abs, radius);
    y.iter()
        .zip(on_simplex.iter())
        .map(|(v, m)| v.signum() * m)
        .collect()
}
