//! Reproducible benchmark instances and the RNG that seeds them.

use crate::linalg::{norm1, DenseMatrix, Vector};
use crate::polytope::{Dag, Polytope};
use crate::{Error, Result};

/// SplitMix64: a 64-bit mixing generator with a single u64 of state.
///
/// One step adds the Weyl constant `0x9E3779B97F4A7C15` to the state and
/// mixes it with xor-shifts and the multipliers `0xBF58476D1CE4E5B9` and
/// `0x94D049BB133111EB`. The sequence is a pure function of the seed, so
/// instances built from it are bit-reproducible across runs and platforms.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `[0, 1)` using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via the Box-Muller transform (two uniforms per
    /// call; no state beyond the integer stream, to keep replay trivial).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = (self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Convex quadratic `f(x) = 1/2 x^T Q x + c^T x + constant` with `Q`
/// symmetric positive semidefinite. `mu` and `L` are the extreme eigenvalues
/// of `Q`, so `f` is `mu`-strongly-convex and `L`-smooth.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    q: DenseMatrix,
    c: Vector,
    constant: f64,
    mu: f64,
    l: f64,
}

impl QuadraticObjective {
    /// Validates symmetry (entrywise within `1e-12` of the scale) and
    /// positive semidefiniteness, and extracts the eigenvalue range.
    pub fn new(q: DenseMatrix, c: Vector, constant: f64) -> Result<Self> {
        let n = q.rows();
        if q.cols() != n || c.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "objective needs square Q and matching c, got {}x{} and {}",
                q.rows(),
                q.cols(),
                c.len()
            )));
        }
        let scale = q.entries().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (q.get(i, j) - q.get(j, i)).abs() > 1e-12 * (1.0 + scale) {
                    return Err(Error::InvalidObjective(format!(
                        "Q is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let (lo, hi) = if n == 0 {
            (0.0, 0.0)
        } else {
            crate::linalg::symmetric_eigen_bounds(&q)?
        };
        if lo < -1e-9 * (1.0 + hi.abs()) {
            return Err(Error::InvalidObjective(format!(
                "Q has a negative eigenvalue {lo:.3e}"
            )));
        }
        Ok(Self { q, c, constant, mu: lo.max(0.0), l: hi.max(0.0) })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Strong convexity constant: the smallest eigenvalue of `Q`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Smoothness constant: the largest eigenvalue of `Q`.
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch("objective value input".to_string()));
        }
        let qx = self.q.matvec(x);
        let mut v = self.constant;
        for j in 0..x.len() {
            v += 0.5 * x[j] * qx[j] + self.c[j] * x[j];
        }
        Ok(v)
    }

    /// Gradient `Qx + c`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch("gradient input".to_string()));
        }
        let mut g = self.q.matvec(x);
        for j in 0..g.len() {
            g[j] += self.c[j];
        }
        Ok(g)
    }

    /// Curvature `d^T Q d` along a direction, for line-search diagnostics.
    pub fn curvature(&self, d: &[f64]) -> Result<f64> {
        if d.len() != self.dim() {
            return Err(Error::DimensionMismatch("curvature input".to_string()));
        }
        let qd = self.q.matvec(d);
        Ok(d.iter().zip(qd.iter()).map(|(a, b)| a * b).sum())
    }
}

/// A benchmark instance: feasible region, objective, start point, seed.
#[derive(Debug, Clone)]
pub struct Instance {
    pub polytope: Polytope,
    pub objective: QuadraticObjective,
    pub x0: Vector,
    pub seed: u64,
}

impl Instance {
    pub fn new(polytope: Polytope, objective: QuadraticObjective, x0: Vector, seed: u64) -> Result<Self> {
        if objective.dim() != polytope.dim() || x0.len() != polytope.dim() {
            return Err(Error::DimensionMismatch("instance dimensions".to_string()));
        }
        polytope.ensure_feasible(&x0)?;
        Ok(Self { polytope, objective, x0, seed })
    }

    /// JSON form: the polytope document plus an "objective" section and the
    /// start point, so instances round-trip through files bit-exactly.
    pub fn to_json(&self) -> String {
        let poly: serde_json::Value =
            serde_json::from_str(&self.polytope.to_json()).expect("polytope json is valid");
        let q_rows: Vec<Vec<f64>> =
            (0..self.objective.q.rows()).map(|i| self.objective.q.row(i).to_vec()).collect();
        let doc = serde_json::json!({
            "polytope": poly,
            "objective": {
                "q": q_rows,
                "c": self.objective.c,
                "constant": self.objective.constant,
            },
            "x0": self.x0,
            "seed": self.seed,
        });
        serde_json::to_string_pretty(&doc).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidData(format!("instance json: {e}")))?;
        let poly_text = doc
            .get("polytope")
            .ok_or_else(|| Error::InvalidData("instance json lacks a polytope".to_string()))?
            .to_string();
        let polytope = Polytope::from_json(&poly_text)?;
        let obj = doc
            .get("objective")
            .ok_or_else(|| Error::InvalidData("instance json lacks an objective".to_string()))?;
        let q_rows: Vec<Vec<f64>> = serde_json::from_value(
            obj.get("q").cloned().unwrap_or(serde_json::Value::Null),
        )
        .map_err(|e| Error::InvalidData(format!("objective Q: {e}")))?;
        let c: Vector = serde_json::from_value(obj.get("c").cloned().unwrap_or(serde_json::Value::Null))
            .map_err(|e| Error::InvalidData(format!("objective c: {e}")))?;
        let constant = obj.get("constant").and_then(|v| v.as_f64()).unwrap_or(0.0);
        let x0: Vector = serde_json::from_value(doc.get("x0").cloned().unwrap_or(serde_json::Value::Null))
            .map_err(|e| Error::InvalidData(format!("instance x0: {e}")))?;
        let seed = doc.get("seed").and_then(|v| v.as_u64()).unwrap_or(0);
        let objective = QuadraticObjective::new(DenseMatrix::from_rows(&q_rows)?, c, constant)?;
        Instance::new(polytope, objective, x0, seed)
    }
}

/// Lasso regression over an l1 ball: draws a Gaussian design `M`, a sparse
/// ground truth `x*` with `sparsity` entries of `+-1`, observations
/// `b = M x* + 0.01 * noise`, and expands `|Mx - b|^2` into quadratic form
/// `Q = 2 M^T M`, `c = -2 M^T b`, `constant = b^T b`.
///
/// `radius` of `None` means `|x*|_1` (so the optimum is boundary-active), or
/// `1.0` when `sparsity = 0`. The start is the vertex `radius * e_1`.
pub fn make_lasso(
    rows: usize,
    cols: usize,
    sparsity: usize,
    radius: Option<f64>,
    seed: u64,
) -> Result<Instance> {
    if sparsity > cols || cols == 0 || rows == 0 {
        return Err(Error::InvalidData(format!(
            "lasso shape {rows}x{cols} with sparsity {sparsity}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rng.next_gaussian());
        }
    }
    // Partial Fisher-Yates picks the support; signs come off the same stream.
    let mut order: Vec<usize> = (0..cols).collect();
    for i in 0..sparsity {
        let j = i + (rng.next_u64() % (cols - i) as u64) as usize;
        order.swap(i, j);
    }
    let mut xstar = vec![0.0; cols];
    for &j in order.iter().take(sparsity) {
        xstar[j] = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
    }
    let mut b = m.matvec(&xstar);
    for bi in b.iter_mut() {
        *bi += 0.01 * rng.next_gaussian();
    }
    let q = m.transpose().matmul(&m);
    let q = DenseMatrix::from_fn(cols, cols, |i, j| 2.0 * q.get(i, j));
    let c: Vector = m.t_matvec(&b).iter().map(|v| -2.0 * v).collect();
    let constant: f64 = b.iter().map(|v| v * v).sum();
    let r = radius.unwrap_or_else(|| {
        let n1 = norm1(&xstar);
        if n1 > 0.0 {
            n1
        } else {
            1.0
        }
    });
    let polytope = Polytope::l1_ball(cols, r)?;
    let mut x0 = vec![0.0; cols];
    x0[0] = r;
    Instance::new(polytope, QuadraticObjective::new(q, c, constant)?, x0, seed)
}

/// Quadratic minimization over a layered flow polytope: source, `n_layers`
/// fully connected layers of `width` nodes, sink. The objective is
/// `Q = G^T G + 0.1 I` with `G` Gaussian of variance `1/dim` (so `L` stays
/// near 4 and the condition number near 40 at every size) and Gaussian `c`.
/// The start is the vertex optimizing a random direction.
pub fn make_flow_quadratic(n_layers: usize, width: usize, seed: u64) -> Result<Instance> {
    if n_layers == 0 || width == 0 {
        return Err(Error::InvalidData(format!(
            "flow shape {n_layers} layers x {width}"
        )));
    }
    let nodes = 2 + n_layers * width;
    let source = 0usize;
    let sink = nodes - 1;
    let node = |layer: usize, slot: usize| 1 + (layer - 1) * width + slot;
    let mut edges = Vec::new();
    for k in 0..width {
        edges.push((source, node(1, k)));
    }
    for layer in 1..n_layers {
        for a in 0..width {
            for b in 0..width {
                edges.push((node(layer, a), node(layer + 1, b)));
            }
        }
    }
    for k in 0..width {
        edges.push((node(n_layers, k), sink));
    }
    let polytope = Polytope::flow(Dag::new(nodes, edges, source, sink)?)?;
    let n = polytope.dim();

    let mut rng = SplitMix64::new(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let mut g = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, scale * rng.next_gaussian());
        }
    }
    let gtg = g.transpose().matmul(&g);
    let q = DenseMatrix::from_fn(n, n, |i, j| gtg.get(i, j) + if i == j { 0.1 } else { 0.0 });
    let c: Vector = (0..n).map(|_| rng.next_gaussian()).collect();
    let dir: Vector = (0..n).map(|_| rng.next_gaussian()).collect();
    let x0 = polytope.lo_oracle(&dir)?;
    Instance::new(polytope, QuadraticObjective::new(q, c, 0.0)?, x0, seed)
}
