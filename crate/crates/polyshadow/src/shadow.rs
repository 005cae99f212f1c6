//! Directional-derivative oracles: the shadow (projection of `-w` onto the
//! tangent cone) and the in-face shadow (projection onto the minimal face's
//! direction subspace).
//!
//! Both are exact. The shadow uses Moreau's decomposition: project `-w` onto
//! the normal cone `cone(A_I^T)` by nnls and subtract; a finite difference of
//! projections would need an ill-conditioned "sufficiently small" step.

use crate::linalg::{is_finite_slice, norm, norm1, pseudoinverse_projector, sub, Vector};
use crate::polytope::{Polytope, PolytopeKind, EPS_ACTIVE};
use crate::{Error, Result};

/// Moreau decomposition of `-w` at a point: `shadow + normal_part = -w`
/// exactly as stored, the parts are orthogonal, and `A_I * shadow <= 0`
/// within tolerance. `multipliers` are the nnls coefficients of
/// `normal_part` over the active rows (empty for the implicit-facet l1
/// ball).
#[derive(Debug, Clone)]
pub struct ConeProjection {
    pub shadow: Vector,
    pub normal_part: Vector,
    pub multipliers: Vector,
}

/// Projection of `-w` onto the minimal face's direction subspace.
#[derive(Debug, Clone)]
pub struct InFaceShadow {
    pub direction: Vector,
}

/// The shadow `argmin_{d in T_P(x)} |(-w) - d|^2`, via the normal-cone
/// projection. An empty active set gives `shadow = -w` directly.
pub fn shadow(p: &Polytope, x: &[f64], w: &[f64]) -> Result<ConeProjection> {
    p.ensure_feasible(x)?;
    if w.len() != p.dim() {
        return Err(Error::DimensionMismatch("shadow direction".to_string()));
    }
    if !is_finite_slice(w) {
        return Err(Error::NonFiniteInput("shadow direction"));
    }
    let v: Vector = w.iter().map(|c| -c).collect();
    if let PolytopeKind::L1Ball { radius } = *p.kind() {
        if let Some((support, signs)) = l1_boundary_support(x, radius) {
            let normal_part = l1_normal_projection(&v, &support, &signs, x.len());
            let shadow = sub(&v, &normal_part);
            return Ok(ConeProjection { shadow, normal_part, multipliers: Vec::new() });
        }
        return Ok(ConeProjection {
            shadow: v,
            normal_part: vec![0.0; x.len()],
            multipliers: Vec::new(),
        });
    }
    let active = p.active_set(x)?;
    if active.is_empty() {
        return Ok(ConeProjection {
            shadow: v,
            normal_part: vec![0.0; x.len()],
            multipliers: Vec::new(),
        });
    }
    let a_i = p.rows_of(&active);
    let fit = crate::linalg::nnls(&a_i, &v)?;
    let normal_part = sub(&v, &fit.residual);
    Ok(ConeProjection { shadow: fit.residual, normal_part, multipliers: fit.mu })
}

/// The in-face shadow `(I - A_I^+ A_I)(-w)`; by convention `-w` itself when
/// the active set is empty, mirroring the tangent-cone case.
pub fn in_face_shadow(p: &Polytope, x: &[f64], w: &[f64]) -> Result<InFaceShadow> {
    p.ensure_feasible(x)?;
    if w.len() != p.dim() {
        return Err(Error::DimensionMismatch("shadow direction".to_string()));
    }
    if !is_finite_slice(w) {
        return Err(Error::NonFiniteInput("shadow direction"));
    }
    let v: Vector = w.iter().map(|c| -c).collect();
    if let PolytopeKind::L1Ball { radius } = *p.kind() {
        if let Some((support, signs)) = l1_boundary_support(x, radius) {
            return Ok(InFaceShadow { direction: l1_face_projection(&v, &support, &signs) });
        }
        return Ok(InFaceShadow { direction: v });
    }
    let active = p.active_set(x)?;
    if active.is_empty() {
        return Ok(InFaceShadow { direction: v });
    }
    let a_i = p.rows_of(&active);
    let projector = pseudoinverse_projector(&a_i)?;
    Ok(InFaceShadow { direction: projector.matvec(&v) })
}

/// Stationarity test: the shadow vanishes relative to the normal part.
pub fn is_stationary(cp: &ConeProjection) -> bool {
    norm(&cp.shadow) <= 1e-9 * (1.0 + norm(&cp.normal_part))
}

/// Support pattern of a boundary point of the l1 ball: `Some((support_mask,
/// signs))` on the boundary, `None` in the interior.
pub(crate) fn l1_boundary_support(x: &[f64], radius: f64) -> Option<(Vec<bool>, Vector)> {
    let tol = EPS_ACTIVE * (1.0 + radius);
    if norm1(x) < radius - tol {
        return None;
    }
    let support: Vec<bool> = x.iter().map(|xi| xi.abs() > tol).collect();
    let signs: Vector = x.iter().map(|xi| xi.signum()).collect();
    Some((support, signs))
}

/// Projection of `v` onto the l1 normal cone `{y : y_i = theta s_i on the
/// support, |y_i| <= theta off it, theta >= 0}`. The objective is a convex
/// piecewise quadratic in theta, minimized by walking the breakpoints
/// `|v_i|` of the off-support soft clamp.
fn l1_normal_projection(v: &[f64], support: &[bool], signs: &[f64], n: usize) -> Vector {
    let s_count = support.iter().filter(|&&b| b).count();
    let s_dot: f64 = (0..n).filter(|&i| support[i]).map(|i| signs[i] * v[i]).sum();
    let mut off: Vector = (0..n).filter(|&i| !support[i]).map(|i| v[i].abs()).collect();
    off.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    let suffix_total: f64 = off.iter().sum();
    let mut below = 0.0;
    let mut theta = 0.0;
    for k in 0..=off.len() {
        let lo = if k == 0 { 0.0 } else { off[k - 1] };
        let hi = if k == off.len() { f64::INFINITY } else { off[k] };
        let active_count = off.len() - k;
        let cnt = (s_count + active_count) as f64;
        let root = (s_dot + (suffix_total - below)) / cnt;
        if root <= hi && (root >= lo || k == 0) {
            theta = root;
            break;
        }
        if k < off.len() {
            below += off[k];
        }
        theta = root; // terminal segment root if the loop runs out
    }
    theta = theta.max(0.0);
    (0..n)
        .map(|i| {
            if support[i] {
                theta * signs[i]
            } else {
                v[i].max(-theta).min(theta)
            }
        })
        .collect()
}

/// Projection of `v` onto the l1 face direction subspace `{d : d_i = 0 off
/// the support, <s, d> = 0 on it}`.
fn l1_face_projection(v: &[f64], support: &[bool], signs: &[f64]) -> Vector {
    let s_count = support.iter().filter(|&&b| b).count();
    let s_dot: f64 = (0..v.len()).filter(|&i| support[i]).map(|i| signs[i] * v[i]).sum();
    let shift = s_dot / s_count as f64;
    (0..v.len())
        .map(|i| if support[i] { v[i] - shift * signs[i] } else { 0.0 })
        .collect()
}
