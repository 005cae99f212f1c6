//! Solvers over polytopes: Shadow-Walk, Shadow-CG, Shadow-CG2, projected
//! gradient descent, and the Frank-Wolfe family, all with exact(ish)
//! golden-section line search and per-iteration telemetry.

/// Golden-section search for the minimizer of a unimodal `f_along` on
/// `[lo, hi]`. Returns `gamma` with `|gamma - argmin| <= tol * (1 + hi)`.
///
/// Convex restrictions of convex objectives are unimodal, so every line
/// search in this crate qualifies. The iteration cap only binds for
/// pathologically tiny tolerances.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f_along: F, lo: f64, hi: f64, tol: f64) -> f64 {
    if !(hi > lo) {
        return lo;
    }
    // (sqrt(5) - 1) / 2, the inverse golden ratio.
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let target = tol * (1.0 + hi.abs());
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f_along(c);
    let mut fd = f_along(d);
    let mut iters = 0usize;
    while b - a > target && iters < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f_along(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f_along(d);
        }
        iters += 1;
    }
    0.5 * (a + b)
}
