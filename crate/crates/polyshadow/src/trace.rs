//! Breakpoint-by-breakpoint walking of the parametric projections curve
//! `g(lambda) = proj_P(x0 - lambda * w)`.
//!
//! The curve is piecewise linear; between breakpoints the active set is
//! constant and the curve moves with unit parameter speed along either the
//! shadow (a new row becomes active at the far end) or the in-face shadow
//! (the residual leaves the current normal cone at the far end). Walking the
//! breakpoints directly costs one cone projection per segment plus one LP
//! per in-face move, versus one full QP per sample for naive sampling.

use std::io::Write;

use crate::linalg::{
    axpy, dot, is_finite_slice, norm, scaled, sub, DenseMatrix, Vector,
};
use crate::logging;
use crate::lp::{max_inface_lambda, solve_lp, LinearProgram, LpStatus};
use crate::polytope::{Polytope, PolytopeKind};
use crate::problems::QuadraticObjective;
use crate::shadow::{in_face_shadow, is_stationary, l1_boundary_support, shadow, ConeProjection};
use crate::solvers::golden_section;
use crate::{Error, Result};

#[cfg(debug_assertions)]
use crate::projection::project;

/// Relative tolerance of the case (a)/(b) orthogonality test. An exact zero
/// test is meaningless in floating point, and misbranching into (b) is safe:
/// the LP then reports no movement and we fall back to the shadow step.
const EPS_BRANCH: f64 = 1e-8;

/// An in-face answer must advance lambda by more than this (relative) amount
/// to count as progress; anything smaller is treated as a misbranch.
const EPS_PROGRESS: f64 = 1e-9;

/// In-face directions with norm below this (relative to `w`) are stalls.
const EPS_STALL: f64 = 1e-12;

/// What the curve does when it leaves a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Moves along the shadow; a new row becomes active at arrival.
    ShadowStep,
    /// Slides inside the current minimal face; for a stall the direction is
    /// zero and only the parameter advances.
    InFaceStep,
    /// The curve has ended; the point never changes again.
    Endpoint,
}

impl StepKind {
    /// Stable label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            StepKind::ShadowStep => "shadow",
            StepKind::InFaceStep => "in_face",
            StepKind::Endpoint => "endpoint",
        }
    }
}

/// One breakpoint of the projections curve.
///
/// Inside a [`ProjectionCurve`], the curve sits at `point` for every
/// `lambda` in `[lambda_minus, lambda_plus]` (a strict interval is a stall)
/// and departs along `segment_direction` with unit parameter speed;
/// `step_kind` names that departing segment. `normal_vector` is the residual
/// `x0 - lambda_plus * w - point`, a member of the normal cone at `point`;
/// at the endpoint `lambda_plus` is infinite and the limiting direction `-w`
/// is stored instead.
///
/// [`trace_step`] returns breakpoints in arrival form: `segment_direction`
/// and `step_kind` there describe the segment just traversed.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoint {
    pub point: Vector,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub segment_direction: Vector,
    pub step_kind: StepKind,
    pub normal_vector: Vector,
}

/// The full piecewise-linear curve `g(lambda) = proj_P(origin - lambda *
/// direction)`, as the ordered list of its breakpoints. Always ends with an
/// [`StepKind::Endpoint`] breakpoint; lambda intervals strictly increase.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCurve {
    pub origin: Vector,
    pub direction: Vector,
    pub breakpoints: Vec<Breakpoint>,
}

impl ProjectionCurve {
    /// Point of the curve at parameter `lambda` (clamped to `lambda >= 0`),
    /// reconstructed from the breakpoint list.
    pub fn point_at(&self, lambda: f64) -> Vector {
        let bps = &self.breakpoints;
        if lambda <= bps[0].lambda_plus {
            return bps[0].point.clone();
        }
        for i in 1..bps.len() {
            let prev = &bps[i - 1];
            let cur = &bps[i];
            if lambda < cur.lambda_minus {
                return axpy(lambda - prev.lambda_plus, &prev.segment_direction, &prev.point);
            }
            if lambda <= cur.lambda_plus {
                return cur.point.clone();
            }
        }
        bps[bps.len() - 1].point.clone()
    }

    /// Dump the breakpoints as CSV: `index,lambda_minus,lambda_plus,
    /// step_kind,x0,..`, with `inf` for the endpoint's lambda_plus.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "index,lambda_minus,lambda_plus,step_kind")?;
        for j in 0..self.origin.len() {
            write!(out, ",x{j}")?;
        }
        writeln!(out)?;
        for (i, bp) in self.breakpoints.iter().enumerate() {
            if bp.lambda_plus.is_finite() {
                write!(out, "{i},{},{},{}", bp.lambda_minus, bp.lambda_plus, bp.step_kind.label())?;
            } else {
                write!(out, "{i},{},inf,{}", bp.lambda_minus, bp.step_kind.label())?;
            }
            for v in &bp.point {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|&c| c == 0.0)
}

/// Residual `x0 - lambda * w - x`.
fn residual(x0: &[f64], w: &[f64], lambda: f64, x: &[f64]) -> Vector {
    (0..x.len()).map(|i| x0[i] - lambda * w[i] - x[i]).collect()
}

/// Shared entry validation: dimensions, finiteness, feasibility, and (debug
/// builds only) the on-curve certificate `proj(x0 - lambda_x w) = x`.
fn validate_curve_point(
    p: &Polytope,
    x0: &[f64],
    w: &[f64],
    x: &[f64],
    lambda_x: f64,
) -> Result<()> {
    let n = p.dim();
    if x0.len() != n || w.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch("trace inputs".to_string()));
    }
    if !is_finite_slice(x0) || !is_finite_slice(w) || !is_finite_slice(x) {
        return Err(Error::NonFiniteInput("trace inputs"));
    }
    if !lambda_x.is_finite() || lambda_x < 0.0 {
        return Err(Error::InvalidData("curve parameter must be finite and nonnegative".to_string()));
    }
    p.ensure_feasible(x)?;
    #[cfg(debug_assertions)]
    {
        let y = axpy(-lambda_x, w, x0);
        let pr = project(p, &y)?;
        let dist = norm(&sub(&pr.point, x));
        if dist > 1e-7 * (1.0 + norm(x)) {
            return Err(Error::OffCurve(dist));
        }
    }
    Ok(())
}

/// Arrival breakpoint of a shadow segment leaving `(x, lambda_x)`.
fn shadow_arrival(
    p: &Polytope,
    x0: &[f64],
    w: &[f64],
    x: &[f64],
    lambda_x: f64,
    cp: &ConeProjection,
) -> Result<Breakpoint> {
    let gamma_max = p.max_step(x, &cp.shadow)?;
    let arrival = lambda_x + gamma_max;
    let point = axpy(gamma_max, &cp.shadow, x);
    let normal_vector = residual(x0, w, arrival, &point);
    Ok(Breakpoint {
        point,
        lambda_minus: arrival,
        lambda_plus: arrival,
        segment_direction: cp.shadow.clone(),
        step_kind: StepKind::ShadowStep,
        normal_vector,
    })
}

/// Exit parameter of the in-face movement: the largest lambda for which the
/// moving residual stays inside the (fixed) normal cone of the current face.
fn inface_exit_lambda(
    p: &Polytope,
    x0: &[f64],
    w: &[f64],
    x: &[f64],
    lambda_x: f64,
    dhat: &[f64],
    cap: f64,
) -> Result<f64> {
    match p.kind() {
        PolytopeKind::L1Ball { radius } => {
            l1_inface_lambda(x0, w, x, lambda_x, dhat, *radius, cap)
        }
        _ => {
            let active = p.active_set(x)?;
            let a_i = p.rows_of(&active);
            max_inface_lambda(&a_i, x0, w, x, lambda_x, dhat, cap)
        }
    }
}

/// l1-ball version of the in-face exit LP. The normal cone at a boundary
/// point with support S and signs s is `{q : q_i = theta * s_i on S, |q_i|
/// <= theta off S, theta >= 0}`, so membership of the moving residual
/// `p - delta * (w + dhat)` is linear in `(delta, theta)`.
fn l1_inface_lambda(
    x0: &[f64],
    w: &[f64],
    x: &[f64],
    lambda_x: f64,
    dhat: &[f64],
    radius: f64,
    cap: f64,
) -> Result<f64> {
    let n = x.len();
    let (support, signs) = match l1_boundary_support(x, radius) {
        Some(t) => t,
        // Interior points have no face to slide in; report no movement and
        // let the caller fall back to a shadow step.
        None => return Ok(lambda_x),
    };
    let u: Vector = (0..n).map(|i| w[i] + dhat[i]).collect();
    let pvec = residual(x0, w, lambda_x, x);
    let on: Vec<usize> = (0..n).filter(|&i| support[i]).collect();
    let off: Vec<usize> = (0..n).filter(|&i| !support[i]).collect();

    // Variables [delta, theta], both nonnegative, delta capped.
    let eq_m = DenseMatrix::from_fn(on.len(), 2, |r, c| {
        let i = on[r];
        if c == 0 {
            u[i]
        } else {
            signs[i]
        }
    });
    let eq_rhs: Vector = on.iter().map(|&i| pvec[i]).collect();
    let ineq = if off.is_empty() {
        None
    } else {
        // |p_i - delta * u_i| <= theta as two rows per off-support i.
        let m = DenseMatrix::from_fn(2 * off.len(), 2, |r, c| {
            let i = off[r / 2];
            let sgn = if r % 2 == 0 { -1.0 } else { 1.0 };
            if c == 0 {
                sgn * u[i]
            } else {
                -1.0
            }
        });
        let rhs: Vector = (0..2 * off.len())
            .map(|r| {
                let i = off[r / 2];
                if r % 2 == 0 {
                    -pvec[i]
                } else {
                    pvec[i]
                }
            })
            .collect();
        Some((m, rhs))
    };
    let lp = LinearProgram {
        objective: vec![-1.0, 0.0],
        ineq,
        eq: Some((eq_m, eq_rhs)),
        bounds: Some(vec![
            (Some(0.0), Some((cap - lambda_x).max(0.0))),
            (Some(0.0), None),
        ]),
    };
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(lambda_x + sol.point[0]),
        // delta = 0 is feasible on the curve, so this signals a broken input.
        LpStatus::Infeasible => Err(Error::InfeasibleContract),
        // delta is capped, so the LP cannot be unbounded.
        LpStatus::Unbounded => Err(Error::NumericalStall { pivots: 0 }),
    }
}

/// Case (b) work shared by `trace_step` and `trace_in_face`: in-face
/// direction plus the exit parameter. `cp` saves a recomputation of the
/// shadow when the caller already has it (only stalls need it, for the cap).
fn in_face_core(
    p: &Polytope,
    x0: &[f64],
    w: &[f64],
    x: &[f64],
    lambda_x: f64,
    cp: Option<&ConeProjection>,
) -> Result<(Vector, f64)> {
    let dhat = in_face_shadow(p, x, w)?.direction;
    if norm(&dhat) <= EPS_STALL * (1.0 + norm(w)) {
        // Stall (the active rows span the space of w): the point holds still
        // while the residual p(lambda) = p(lambda_x) - (lambda - lambda_x)w
        // drifts through the cone. Since q in N(x) forces <q, s> <= 0 for
        // the shadow s and <w, s> = -|s|^2 by Moreau orthogonality, the
        // drift must end by lambda_x + |<p, s>| / |s|^2; cap one past that.
        let zero = vec![0.0; x.len()];
        let owned;
        let cpref = match cp {
            Some(c) => c,
            None => {
                owned = shadow(p, x, w)?;
                &owned
            }
        };
        let s2 = dot(&cpref.shadow, &cpref.shadow);
        if s2 <= 1e-24 {
            // A vanishing shadow means -w sits in the normal cone, so the
            // residual never leaves it: the stall is the endpoint.
            return Ok((zero, f64::INFINITY));
        }
        let pvec = residual(x0, w, lambda_x, x);
        let cap = lambda_x + dot(&pvec, &cpref.shadow).abs() / s2 + 1.0;
        let lambda_hat = inface_exit_lambda(p, x0, w, x, lambda_x, &zero, cap)?;
        if lambda_hat >= cap - 1e-9 {
            logging::error(&format!(
                "in-face LP hit its stall cap at lambda {lambda_hat:.6e}; redundant rows suspected"
            ));
        }
        return Ok((zero, lambda_hat));
    }

    let gamma_max = p.max_step(x, &dhat)?;
    let far = axpy(gamma_max, &dhat, x);
    let q = residual(x0, w, lambda_x + gamma_max, &far);
    if p.normal_cone_member(&far, &q)? {
        // First-order optimality holds at the face boundary: the whole face
        // width is one segment of the curve.
        return Ok((dhat, lambda_x + gamma_max));
    }
    let cap = lambda_x + gamma_max + 1.0;
    let lambda_hat = inface_exit_lambda(p, x0, w, x, lambda_x, &dhat, cap)?;
    if lambda_hat >= cap - 1e-9 {
        logging::error(&format!(
            "in-face LP hit its movement cap at lambda {lambda_hat:.6e}; redundant rows suspected"
        ));
    }
    // Membership failed at gamma_max, so the exit is interior; anything
    // beyond the face boundary is LP tolerance noise.
    Ok((dhat, lambda_hat.min(lambda_x + gamma_max)))
}

/// One step of the curve walk: from the breakpoint `(x, lambda_x)`, return
/// the next breakpoint in arrival form (see [`Breakpoint`]).
///
/// Endpoint detection, the case (a)/(b) orthogonality branch, and the stall
/// handling follow the single-segment trace: a stationary shadow ends the
/// curve; an orthogonal residual takes a shadow step to the ratio-test
/// boundary; otherwise the in-face machinery determines how far the current
/// face carries the curve.
pub fn trace_step(
    p: &Polytope,
    x0: &[f64],
    w: &[f64],
    x: &[f64],
    lambda_x: f64,
) -> Result<Breakpoint> {
    validate_curve_point(p, x0, w, x, lambda_x)?;
    let cp = shadow(p, x, w)?;
    if is_stationary(&cp) {
        return Ok(Breakpoint {
            point: x.to_vec(),
            lambda_minus: lambda_x,
            lambda_plus: f64::INFINITY,
            segment_direction: vec![0.0; x.len()],
            step_kind: StepKind::Endpoint,
            normal_vector: scaled(w, -1.0),
        });
    }
    let pvec = residual(x0, w, lambda_x, x);
    let scale = 1.0 + norm(&pvec) * norm(&cp.shadow);
    if dot(&pvec, &cp.shadow).abs() <= EPS_BRANCH * scale {
        return shadow_arrival(p, x0, w, x, lambda_x, &cp);
    }
    let (dhat, lambda_hat) = in_face_core(p, x0, w, x, lambda_x, Some(&cp))?;
    if lambda_hat <= lambda_x + EPS_PROGRESS * (1.0 + lambda_x) {
        // The branch test misfired: the residual is not actually interior to
        // the cone, so the curve leaves along the shadow instead.
        logging::debug(&format!(
            "in-face exit made no progress at lambda {lambda_x:.6e}; taking the shadow step"
        ));
        return shadow_arrival(p, x0, w, x, lambda_x, &cp);
    }
    if is_zero(&dhat) {
        // Stall: only the parameter moves.
        let normal_vector = residual(x0, w, lambda_hat, x);
        return Ok(Breakpoint {
            point: x.to_vec(),
            lambda_minus: lambda_x,
            lambda_plus: lambda_hat,
            segment_direction: dhat,
            step_kind: StepKind::InFaceStep,
            normal_vector,
        });
    }
    let point = axpy(lambda_hat - lambda_x, &dhat, x);
    let normal_vector = residual(x0, w, lambda_hat, &point);
    Ok(Breakpoint {
        point,
        lambda_minus: lambda_hat,
        lambda_plus: lambda_hat,
        segment_direction: dhat,
        step_kind: StepKind::InFaceStep,
        normal_vector,
    })
}

/// In-face movement from the breakpoint `(x, lambda_x)`: the in-face shadow
/// direction and the exit parameter `lambda_hat`.
///
/// The direction is zero exactly when the curve stalls (Remark 2); then
/// `lambda_hat` is where the residual leaves the normal cone and the point
/// itself does not move. Otherwise the curve moves as `x + (lambda -
/// lambda_x) * direction` up to `lambda_hat`, which is `lambda_x +
/// gamma_max` when first-order optimality holds at the face boundary and
/// the LP exit otherwise.
pub fn trace_in_face(
    p: &Polytope,
    x0: &[f64],
    w: &[f64],
    x: &[f64],
    lambda_x: f64,
) -> Result<(Vector, f64)> {
    validate_curve_point(p, x0, w, x, lambda_x)?;
    in_face_core(p, x0, w, x, lambda_x, None)
}

/// Breakpoint budget: the structural bound is 2^m over m facets, clamped to
/// a hard ceiling. The l1 ball has 2^n implicit facets.
fn breakpoint_cap(p: &Polytope) -> usize {
    const CEILING: usize = 10_000;
    let facets = match p.kind() {
        PolytopeKind::L1Ball { .. } => {
            if p.dim() >= 14 {
                return CEILING;
            }
            1usize << p.dim()
        }
        _ => p.num_rows(),
    };
    if facets >= 14 {
        CEILING
    } else {
        CEILING.min(1usize << facets)
    }
}

/// Walk the whole curve `g(lambda) = proj_P(x0 - lambda * w)` from
/// `lambda = 0` to its endpoint.
pub fn trace_curve(p: &Polytope, x0: &[f64], w: &[f64]) -> Result<ProjectionCurve> {
    p.ensure_feasible(x0)?;
    if w.len() != p.dim() {
        return Err(Error::DimensionMismatch("trace_curve direction".to_string()));
    }
    if !is_finite_slice(w) {
        return Err(Error::NonFiniteInput("trace_curve direction"));
    }
    let cap = breakpoint_cap(p);
    let mut breakpoints: Vec<Breakpoint> = Vec::new();
    let mut x = x0.to_vec();
    let mut lambda_minus = 0.0_f64;
    let mut lambda_plus = 0.0_f64;
    for _ in 0..cap {
        let step = trace_step(p, x0, w, &x, lambda_plus)?;
        match step.step_kind {
            StepKind::Endpoint => {
                breakpoints.push(Breakpoint {
                    point: x,
                    lambda_minus,
                    lambda_plus: f64::INFINITY,
                    segment_direction: vec![0.0; p.dim()],
                    step_kind: StepKind::Endpoint,
                    normal_vector: scaled(w, -1.0),
                });
                return Ok(ProjectionCurve {
                    origin: x0.to_vec(),
                    direction: w.to_vec(),
                    breakpoints,
                });
            }
            StepKind::InFaceStep if is_zero(&step.segment_direction) => {
                // Stall: extend the residence interval of the current point.
                lambda_plus = step.lambda_plus;
            }
            kind => {
                if step.lambda_minus <= lambda_plus {
                    // No parameter progress means the ratio test or LP has
                    // degenerated; stop instead of cycling to the cap.
                    return Err(Error::CapExceeded(breakpoints.len()));
                }
                let normal_vector = residual(x0, w, lambda_plus, &x);
                breakpoints.push(Breakpoint {
                    point: x,
                    lambda_minus,
                    lambda_plus,
                    segment_direction: step.segment_direction,
                    step_kind: kind,
                    normal_vector,
                });
                x = step.point;
                lambda_minus = step.lambda_minus;
                lambda_plus = step.lambda_minus;
            }
        }
    }
    Err(Error::CapExceeded(cap))
}

/// Options for [`trace_opt_with`].
#[derive(Debug, Clone)]
pub struct TraceOptions {
    /// Stop once the accumulated parameter reaches this value; `Some(1/L)`
    /// is the early-exit rule that matches one fixed-step PGD move.
    pub lambda_exit: Option<f64>,
    /// Golden-section tolerance (scaled by segment length internally).
    pub line_search_tol: f64,
    /// Hard cap on traced segments.
    pub max_segments: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { lambda_exit: None, line_search_tol: 1e-10, max_segments: 10_000 }
    }
}

/// Telemetry of one Trace-Opt walk.
#[derive(Debug, Clone)]
pub struct TraceOptOutcome {
    pub point: Vector,
    /// Cone projections performed (one per examined breakpoint).
    pub shadow_calls: usize,
    /// Segments traversed, stalls included.
    pub segments: usize,
    /// Accumulated curve parameter at the returned point.
    pub lambda_total: f64,
    /// The walk hit the curve endpoint.
    pub reached_endpoint: bool,
    /// The walk stopped at a line-search optimum interior to a segment.
    pub interior_stop: bool,
    /// Kind of the last traversed segment (`Endpoint` when none).
    pub last_kind: StepKind,
}

/// Minimize `f` along the projections curve of `w = grad f(x)` from `x`:
/// golden-section line search on every segment, stopping at the first
/// interior optimum or the curve endpoint.
pub fn trace_opt(p: &Polytope, f: &QuadraticObjective, x: &[f64]) -> Result<Vector> {
    trace_opt_with(p, f, x, &TraceOptions::default()).map(|o| o.point)
}

/// [`trace_opt`] with explicit options and full telemetry.
pub fn trace_opt_with(
    p: &Polytope,
    f: &QuadraticObjective,
    x: &[f64],
    opts: &TraceOptions,
) -> Result<TraceOptOutcome> {
    p.ensure_feasible(x)?;
    if f.dim() != p.dim() {
        return Err(Error::DimensionMismatch("objective dimension".to_string()));
    }
    let w = f.gradient(x)?;
    let x0 = x.to_vec();
    let mut cur = x.to_vec();
    let mut lambda_total = 0.0_f64;
    let mut shadow_calls = 0usize;
    let mut segments = 0usize;
    let mut last_kind = StepKind::Endpoint;
    let mut reached_endpoint = false;
    let mut interior_stop = false;
    loop {
        if let Some(exit) = opts.lambda_exit {
            if lambda_total >= exit {
                break;
            }
        }
        if segments >= opts.max_segments {
            return Err(Error::CapExceeded(opts.max_segments));
        }
        let cp = shadow(p, &cur, &w)?;
        shadow_calls += 1;
        if is_stationary(&cp) {
            reached_endpoint = true;
            break;
        }
        let pvec = residual(&x0, &w, lambda_total, &cur);
        let scale = 1.0 + norm(&pvec) * norm(&cp.shadow);
        let take_shadow = dot(&pvec, &cp.shadow).abs() <= EPS_BRANCH * scale;
        let (dir, gamma_max, kind) = if take_shadow {
            (cp.shadow.clone(), p.max_step(&cur, &cp.shadow)?, StepKind::ShadowStep)
        } else {
            let (dhat, lambda_hat) = in_face_core(p, &x0, &w, &cur, lambda_total, Some(&cp))?;
            if lambda_hat <= lambda_total + EPS_PROGRESS * (1.0 + lambda_total) {
                (cp.shadow.clone(), p.max_step(&cur, &cp.shadow)?, StepKind::ShadowStep)
            } else if is_zero(&dhat) {
                // Stall: f is constant while lambda drifts, so jump to the
                // stall's end (gamma* = gamma_max, never an interior stop).
                if !lambda_hat.is_finite() {
                    reached_endpoint = true;
                    break;
                }
                lambda_total = lambda_hat;
                segments += 1;
                last_kind = StepKind::InFaceStep;
                continue;
            } else {
                (dhat, lambda_hat - lambda_total, StepKind::InFaceStep)
            }
        };
        let gamma_star = golden_section(
            |g| {
                f.value(&axpy(g, &dir, &cur))
                    .expect("objective dimension checked at entry")
            },
            0.0,
            gamma_max,
            opts.line_search_tol,
        );
        segments += 1;
        last_kind = kind;
        // Snap to the far end when within line-search resolution: treating a
        // boundary optimum as interior would stop the walk one segment early
        // and drift the lambda bookkeeping off the true breakpoint.
        let snap = 2.0 * opts.line_search_tol * (1.0 + gamma_max);
        if gamma_star >= gamma_max - snap {
            cur = axpy(gamma_max, &dir, &cur);
            lambda_total += gamma_max;
        } else {
            let g = gamma_star.max(0.0);
            cur = axpy(g, &dir, &cur);
            lambda_total += g;
            interior_stop = true;
            break;
        }
    }
    Ok(TraceOptOutcome {
        point: cur,
        shadow_calls,
        segments,
        lambda_total,
        reached_endpoint,
        interior_stop,
        last_kind,
    })
}
