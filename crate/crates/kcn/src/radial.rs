//! Radial grids and grid functions: the discrete stand-in for H¹_rad(R^N).
//!
//! A [`RadialGrid`] carries strictly increasing nodes 0 < r_1 < … < r_M ≤ r_max
//! and positive quadrature weights w_i realizing
//!
//! ```text
//!   ∫_{R^N} f(|x|) dx  ≈  ∑_i w_i f(r_i),
//! ```
//!
//! i.e. integration against the measure dν = ω_{N−1} r^{N−1} dr truncated at
//! r_max. Weights come from product integration: on each panel the integrand
//! is replaced by its Lagrange interpolant on the panel nodes and the moments
//! ∫ r^k dν are evaluated in closed form, so node placement is decoupled from
//! the r^{N−1} Jacobian. Consequences used throughout the crate:
//!
//! * ∑w_i equals the ball volume |B_{r_max}| to machine precision,
//! * low moments ∑w_i r_i^k are exact up to rounding for k = 0, 1, 2,
//! * under the exact dilation r → σr the weights scale as σ^N exactly
//!   ([`RadialGrid::rescaled`]), which the solvers exploit to move along
//!   dilation fibers without resampling.
//!
//! [`RadialFunction`] wraps samples on a shared grid and provides the L² and
//! gradient norms, mass normalization onto the constraint sphere, the
//! mass-preserving dilation s⋆u = e^{Ns/2}u(e^s·) by monotone-cubic
//! resampling, and the Talenti-type bubble used for critical-exponent work.

use std::sync::Arc;

use crate::error::{KcnError, Result};

/// Default cap on |s| for resampling dilation (config-overridable).
pub const DEFAULT_S_MAX: f64 = 3.0;

/// Surface area ω_{N−1} of the unit sphere S^{N−1} ⊂ R^N:
/// ω_{N−1} = 2π^{N/2}/Γ(N/2), evaluated exactly for integer and half-integer
/// arguments (N=3 → 4π, N=4 → 2π², …).
pub fn sphere_area(n: u32) -> f64 {
    let pi = std::f64::consts::PI;
    // Γ(N/2): N even = (N/2−1)!, N odd = (2m)!√π/(4^m m!) at m = (N−1)/2.
    let gamma_half = if n % 2 == 0 {
        let mut g = 1.0;
        for k in 2..(n / 2) {
            g *= k as f64;
        }
        g
    } else {
        let m = (n - 1) / 2;
        let mut g = pi.sqrt();
        // Γ(1/2 + m) = √π · ∏_{j=1..m} (2j−1)/2
        for j in 1..=m {
            g *= (2 * j - 1) as f64 / 2.0;
        }
        g
    };
    2.0 * pi.powf(n as f64 / 2.0) / gamma_half
}

/// Node-placement family of a grid. Part of the kernel cache key, so grids
/// read back from explicit node lists are tagged [`Spacing::Explicit`] and
/// never share cache entries with constructed grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    /// r_i = i·(r_max/M).
    Uniform,
    /// Geometric progression from r_min to r_max (resolves bubble cores).
    Graded { r_min: f64 },
    /// Arbitrary strictly increasing nodes (e.g. loaded from a file).
    Explicit,
}

/// Discretization of (0, r_max] with product-integration quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: u32,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_max: f64,
    spacing: Spacing,
}

/// Moments μ_k = ∫_lo^hi (r−c)^k ω r^{N−1} dr for k = 0, 1, 2, computed by
/// binomial expansion of r^{N−1} about the shift c. The shift keeps the
/// Lagrange-weight combinations free of catastrophic cancellation on narrow
/// panels far from the origin.
fn shifted_moments(n: u32, omega: f64, c: f64, lo: f64, hi: f64) -> [f64; 3] {
    let a = lo - c;
    let b = hi - c;
    let mut mom = [0.0f64; 3];
    let deg = (n - 1) as usize;
    // binomial coefficients C(N−1, j), incremental
    let mut binom = 1.0f64;
    let mut c_pow = c.powi(deg as i32); // c^{N−1−j}, updated each j
    for j in 0..=deg {
        for (k, m) in mom.iter_mut().enumerate() {
            let e = (k + j + 1) as i32;
            *m += binom * c_pow * (b.powi(e) - a.powi(e)) / e as f64;
        }
        binom *= (deg - j) as f64 / (j + 1) as f64;
        if c != 0.0 {
            c_pow /= c;
        } else {
            c_pow = if j + 1 == deg { 1.0 } else { 0.0 };
        }
    }
    [omega * mom[0], omega * mom[1], omega * mom[2]]
}

/// Product-integration weights against dν = ω_{N−1}r^{N−1}dr on [0, r_max]:
/// the mass of [0, r_1] is lumped onto node 1, interior node triples carry
/// three-point Lagrange weights per panel [r_i, r_{i+2}], with a two-point
/// product-trapezoid fallback whenever a three-point weight would go
/// nonpositive (the r^{N−1} Jacobian can skew the first panel for N ≥ 4).
fn product_weights(n: u32, nodes: &[f64]) -> Vec<f64> {
    let omega = sphere_area(n);
    let m = nodes.len();
    let mut w = vec![0.0f64; m];
    // [0, r_1]: exact panel mass onto the first node (k=0 moment exact; the
    // k≥1 moment defect is O((r_1/r_max)^{N+k}), far below grid error).
    w[0] += omega * nodes[0].powi(n as i32) / n as f64;

    let two_point = |w: &mut Vec<f64>, i: usize, j: usize| {
        let (u, v) = (nodes[i], nodes[j]);
        let c = 0.5 * (u + v);
        let [m0, m1, _] = shifted_moments(n, omega, c, u, v);
        let h = v - u;
        w[i] += ((v - c) * m0 - m1) / h;
        w[j] += (m1 - (u - c) * m0) / h;
    };

    // With an odd interval count the two-point panel goes to [r_1, r_2],
    // where the r^{N−1} Jacobian suppresses its error; the far end always
    // gets a full three-point panel.
    let mut i = 0;
    if (m - 1) % 2 == 1 {
        two_point(&mut w, 0, 1);
        i = 1;
    }
    while i + 2 < m {
        let (x0, x1, x2) = (nodes[i], nodes[i + 1], nodes[i + 2]);
        let [m0, m1, m2] = shifted_moments(n, omega, x1, x0, x2);
        let (e0, e2) = (x0 - x1, x2 - x1);
        let lagrange =
            |ej: f64, ea: f64, eb: f64| (m2 - (ea + eb) * m1 + ea * eb * m0) / ((ej - ea) * (ej - eb));
        let w0 = lagrange(e0, 0.0, e2);
        let w1 = lagrange(0.0, e0, e2);
        let w2 = lagrange(e2, e0, 0.0);
        if w0 > 0.0 && w1 > 0.0 && w2 > 0.0 {
            w[i] += w0;
            w[i + 1] += w1;
            w[i + 2] += w2;
        } else {
            two_point(&mut w, i, i + 1);
            two_point(&mut w, i + 1, i + 2);
        }
        i += 2;
    }
    w
}

impl RadialGrid {
    /// Uniform grid r_i = i·h, h = r_max/M, i = 1..=M.
    pub fn uniform(n: u32, m: usize, r_max: f64) -> Result<Arc<RadialGrid>> {
        let h = r_max / m as f64;
        let nodes: Vec<f64> = (1..=m).map(|i| i as f64 * h).collect();
        RadialGrid::from_parts(n, nodes, r_max, Spacing::Uniform)
    }

    /// Geometric grid from r_min to r_max (node i = r_min·ρ^i with
    /// ρ = (r_max/r_min)^{1/(M−1)}); concentrates resolution at the origin.
    pub fn graded(n: u32, m: usize, r_max: f64, r_min: f64) -> Result<Arc<RadialGrid>> {
        if !(r_min > 0.0 && r_min < r_max) {
            return Err(KcnError::InvalidParams(format!(
                "graded grid needs 0 < r_min < r_max, got r_min={r_min}, r_max={r_max}"
            )));
        }
        let rho = (r_max / r_min).powf(1.0 / (m as f64 - 1.0));
        let mut nodes: Vec<f64> = (0..m).map(|i| r_min * rho.powi(i as i32)).collect();
        nodes[m - 1] = r_max;
        RadialGrid::from_parts(n, nodes, r_max, Spacing::Graded { r_min })
    }

    /// Grid over an explicit strictly increasing node list.
    pub fn from_nodes(n: u32, nodes: Vec<f64>, r_max: f64) -> Result<Arc<RadialGrid>> {
        RadialGrid::from_parts(n, nodes, r_max, Spacing::Explicit)
    }

    fn from_parts(n: u32, nodes: Vec<f64>, r_max: f64, spacing: Spacing) -> Result<Arc<RadialGrid>> {
        if n < 3 {
            return Err(KcnError::InvalidParams(format!("N={n}, need N >= 3")));
        }
        if nodes.len() < 16 {
            return Err(KcnError::InvalidParams(format!(
                "M={}, need at least 16 nodes",
                nodes.len()
            )));
        }
        if !(r_max > 0.0) {
            return Err(KcnError::InvalidParams(format!("r_max={r_max}, need > 0")));
        }
        let increasing = nodes.windows(2).all(|p| p[0] < p[1]);
        if !increasing || nodes[0] <= 0.0 || *nodes.last().unwrap() > r_max {
            return Err(KcnError::InvalidParams(
                "nodes must be strictly increasing within (0, r_max]".into(),
            ));
        }
        let weights = product_weights(n, &nodes);
        debug_assert!(weights.iter().all(|&w| w > 0.0));
        Ok(Arc::new(RadialGrid {
            n,
            nodes,
            weights,
            r_max,
            spacing,
        }))
    }

    /// The same grid pushed through the exact dilation r → σr: nodes scale by
    /// σ and weights by σ^N (the product-integration construction is
    /// scale-covariant, so this *is* the quadrature of the scaled grid, not an
    /// approximation of it).
    pub fn rescaled(self: &Arc<Self>, sigma: f64) -> Result<Arc<RadialGrid>> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(KcnError::InvalidParams(format!("sigma={sigma}, need > 0")));
        }
        let vol = sigma.powi(self.n as i32);
        let spacing = match self.spacing {
            Spacing::Uniform => Spacing::Uniform,
            Spacing::Graded { r_min } => Spacing::Graded {
                r_min: sigma * r_min,
            },
            Spacing::Explicit => Spacing::Explicit,
        };
        Ok(Arc::new(RadialGrid {
            n: self.n,
            nodes: self.nodes.iter().map(|&r| sigma * r).collect(),
            weights: self.weights.iter().map(|&w| vol * w).collect(),
            r_max: sigma * self.r_max,
            spacing,
        }))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// |B_{r_max}| = ω_{N−1} r_max^N / N; ∑w_i reproduces this exactly.
    pub fn ball_volume(&self) -> f64 {
        sphere_area(self.n) * self.r_max.powi(self.n as i32) / self.n as f64
    }

    /// Structural compatibility for binary operations between functions.
    pub fn compatible(&self, other: &RadialGrid) -> bool {
        self.n == other.n
            && self.nodes.len() == other.nodes.len()
            && self.r_max.to_bits() == other.r_max.to_bits()
            && self.nodes[0].to_bits() == other.nodes[0].to_bits()
    }
}

/// Samples of a radial function at the nodes of a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(KcnError::GridMismatch(format!(
                "{} values on a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(KcnError::InvalidParams("non-finite sample".into()));
        }
        Ok(RadialFunction { grid, values })
    }

    /// Samples f at the grid nodes.
    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialFunction::new(Arc::clone(grid), values)
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        RadialFunction {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Carries the same samples onto a structurally identical grid object
    /// (used when re-basing functions between equal grids from different
    /// sources).
    pub fn with_grid(&self, grid: &Arc<RadialGrid>) -> Result<Self> {
        if !self.grid.compatible(grid) {
            return Err(KcnError::GridMismatch("incompatible target grid".into()));
        }
        Ok(RadialFunction {
            grid: Arc::clone(grid),
            values: self.values.clone(),
        })
    }

    /// Weighted pairing ⟨u, v⟩ = ∑ w_i u_i v_i ≈ ∫ u v.
    pub fn dot(&self, other: &RadialFunction) -> Result<f64> {
        if !self.grid.compatible(&other.grid) {
            return Err(KcnError::GridMismatch("dot on mismatched grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((u, v), w)| w * u * v)
            .sum())
    }

    /// ‖u‖₂² = ∑ w_i u_i².
    pub fn l2_norm_sq(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(u, w)| w * u * u)
            .sum()
    }

    /// ‖u‖₂.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Radial derivative by centered differences (one-sided at both ends).
    pub fn radial_derivative(&self) -> Vec<f64> {
        let r = self.grid.nodes();
        let u = &self.values;
        let m = u.len();
        let mut d = vec![0.0; m];
        d[0] = (u[1] - u[0]) / (r[1] - r[0]);
        for i in 1..m - 1 {
            d[i] = (u[i + 1] - u[i - 1]) / (r[i + 1] - r[i - 1]);
        }
        d[m - 1] = (u[m - 1] - u[m - 2]) / (r[m - 1] - r[m - 2]);
        d
    }

    /// ‖∇u‖₂² = ∑ w_i u'(r_i)².
    pub fn grad_norm_sq(&self) -> f64 {
        self.radial_derivative()
            .iter()
            .zip(self.grid.weights())
            .map(|(d, w)| w * d * d)
            .sum()
    }

    /// ‖∇u‖₂.
    pub fn grad_norm(&self) -> f64 {
        self.grad_norm_sq().sqrt()
    }

    /// Projection onto the mass sphere ‖·‖₂ = c (proportional rescale).
    pub fn normalized(&self, c: f64) -> Result<RadialFunction> {
        if !(c > 0.0) {
            return Err(KcnError::InvalidParams(format!("mass c={c}, need > 0")));
        }
        let norm = self.l2_norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(KcnError::ZeroFunction);
        }
        let scale = c / norm;
        Ok(RadialFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v * scale).collect(),
        })
    }

    /// Pointwise sum with weights (convenience for building trial profiles).
    pub fn axpy(&self, alpha: f64, other: &RadialFunction) -> Result<RadialFunction> {
        if !self.grid.compatible(&other.grid) {
            return Err(KcnError::GridMismatch("axpy on mismatched grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + alpha * b)
            .collect();
        RadialFunction::new(Arc::clone(&self.grid), values)
    }

    pub fn scaled(&self, alpha: f64) -> RadialFunction {
        RadialFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Mass-preserving dilation (s⋆u)(r) = e^{Ns/2} u(e^s r) by monotone
    /// cubic (PCHIP) resampling on the same grid; zero beyond r_max, even
    /// parabola through the first two nodes below r_1. |s| capped at
    /// [`DEFAULT_S_MAX`]; see [`RadialFunction::dilate_with_max`].
    pub fn dilate(&self, s: f64) -> Result<RadialFunction> {
        self.dilate_with_max(s, DEFAULT_S_MAX)
    }

    /// As [`RadialFunction::dilate`] with an explicit cap on |s|.
    pub fn dilate_with_max(&self, s: f64, s_max: f64) -> Result<RadialFunction> {
        if !(s.abs() <= s_max) {
            return Err(KcnError::DilationOutOfRange(s, s_max));
        }
        let interp = Pchip::new(self.grid.nodes(), &self.values);
        let es = s.exp();
        let amp = (self.grid.n() as f64 * s / 2.0).exp();
        let r_max = *self.grid.nodes().last().unwrap();
        let values = self
            .grid
            .nodes()
            .iter()
            .map(|&r| {
                let x = es * r;
                if x > r_max {
                    0.0
                } else {
                    amp * interp.eval(x)
                }
            })
            .collect();
        RadialFunction::new(Arc::clone(&self.grid), values)
    }
}

/// Shape-preserving cubic Hermite interpolant (Fritsch–Carlson slopes) with
/// even-parabola extension below the first node: radial profiles satisfy
/// u'(0) = 0, so on [0, r_1) we evaluate the parabola A + Br² through the
/// first two samples.
struct Pchip<'a> {
    x: &'a [f64],
    y: &'a [f64],
    slope: Vec<f64>,
    // even extension u(r) ≈ par_a + par_b·r² for r < x[0]
    par_a: f64,
    par_b: f64,
}

impl<'a> Pchip<'a> {
    fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        let m = x.len();
        let h: Vec<f64> = (0..m - 1).map(|i| x[i + 1] - x[i]).collect();
        let d: Vec<f64> = (0..m - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slope = vec![0.0; m];
        for i in 1..m - 1 {
            if d[i - 1] * d[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slope[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        slope[0] = Pchip::end_slope(h[0], h[1], d[0], d[1]);
        slope[m - 1] = Pchip::end_slope(h[m - 2], h[m - 3], d[m - 2], d[m - 3]);
        let par_b = (y[1] - y[0]) / (x[1] * x[1] - x[0] * x[0]);
        let par_a = y[0] - par_b * x[0] * x[0];
        Pchip {
            x,
            y,
            slope,
            par_a,
            par_b,
        }
    }

    /// Shape-preserving three-point end slope (clipped as in standard PCHIP).
    fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            s = 0.0;
        } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    }

    fn eval(&self, q: f64) -> f64 {
        let x = self.x;
        if q < x[0] {
            return self.par_a + self.par_b * q * q;
        }
        let m = x.len();
        if q >= x[m - 1] {
            return self.y[m - 1];
        }
        // interval k with x[k] <= q < x[k+1]
        let k = match x.binary_search_by(|v| v.partial_cmp(&q).unwrap()) {
            Ok(k) => k.min(m - 2),
            Err(k) => k - 1,
        };
        let h = x[k + 1] - x[k];
        let t = (q - x[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.y[k] * h00 + h * self.slope[k] * h10 + self.y[k + 1] * h01 + h * self.slope[k + 1] * h11
    }
}

/// The scalar bubble profile η(r)·(ε/(ε²+r²))^{(N−2)/2} with the smooth
/// cut-off η ≡ 1 on [0, δ], ≡ 0 on [2δ, ∞),
/// η(r) = φ((2δ−r)/δ)/(φ((2δ−r)/δ)+φ((r−δ)/δ)), φ(t) = e^{−1/t} for t > 0.
pub fn bubble_value(n: u32, eps: f64, delta: f64, r: f64) -> f64 {
    let phi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let pa = phi((2.0 * delta - r) / delta);
    let pb = phi((r - delta) / delta);
    if pa == 0.0 {
        return 0.0;
    }
    let eta = pa / (pa + pb);
    eta * (eps / (eps * eps + r * r)).powf((n as f64 - 2.0) / 2.0)
}

/// Talenti-type bubble on a grid with the default cut-off radius δ = r_max/4.
pub fn bubble(grid: &Arc<RadialGrid>, eps: f64) -> Result<RadialFunction> {
    bubble_with_cutoff(grid, eps, grid.r_max() / 4.0)
}

/// Bubble with an explicit cut-off radius δ (support ⊂ B_{2δ}).
pub fn bubble_with_cutoff(grid: &Arc<RadialGrid>, eps: f64, delta: f64) -> Result<RadialFunction> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(KcnError::InvalidParams(format!(
            "bubble eps={eps}, need 0 < eps < 1"
        )));
    }
    if !(delta > 0.0) {
        return Err(KcnError::InvalidParams(format!(
            "bubble cut-off delta={delta}, need > 0"
        )));
    }
    let n = grid.n();
    RadialFunction::from_fn(grid, |r| bubble_value(n, eps, delta, r))
}

/// Serializes a function to the interchange text format: one header line
/// `N mu M r_max`, then M lines `r value`. All numbers print in the shortest
/// round-trip form, so parse ∘ serialize is bit-exact.
pub fn to_text(u: &RadialFunction, mu: f64) -> String {
    let g = u.grid();
    let mut s = String::with_capacity(32 * (g.len() + 1));
    s.push_str(&format!("{} {} {} {}\n", g.n(), mu, g.len(), g.r_max()));
    for (r, v) in g.nodes().iter().zip(u.values()) {
        s.push_str(&format!("{r} {v}\n"));
    }
    s
}

/// Parses the text format produced by [`to_text`]; returns the function and
/// the μ recorded in its header. A node set that matches the canonical
/// uniform construction bit-for-bit is rebuilt as [`Spacing::Uniform`] (so
/// kernel caches keep working); anything else becomes an explicit-node grid.
pub fn from_text(text: &str) -> Result<(RadialFunction, f64)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| KcnError::FormatError("empty radial-function text".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 {
        return Err(KcnError::FormatError(format!(
            "header must be `N mu M r_max`, got {} fields",
            toks.len()
        )));
    }
    let parse_f = |t: &str, what: &str| -> Result<f64> {
        t.parse::<f64>()
            .map_err(|_| KcnError::FormatError(format!("bad {what}: {t:?}")))
    };
    let n: u32 = toks[0]
        .parse()
        .map_err(|_| KcnError::FormatError(format!("bad N: {:?}", toks[0])))?;
    let mu = parse_f(toks[1], "mu")?;
    let m: usize = toks[2]
        .parse()
        .map_err(|_| KcnError::FormatError(format!("bad M: {:?}", toks[2])))?;
    let r_max = parse_f(toks[3], "r_max")?;
    let mut nodes = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: Vec<&str> = line.split_whitespace().collect();
        if pair.len() != 2 {
            return Err(KcnError::FormatError(format!(
                "line {}: expected `r value`, got {line:?}",
                k + 2
            )));
        }
        nodes.push(parse_f(pair[0], "node radius")?);
        values.push(parse_f(pair[1], "sample value")?);
    }
    if nodes.len() != m {
        return Err(KcnError::FormatError(format!(
            "header promised {m} samples, found {}",
            nodes.len()
        )));
    }
    let uniform = RadialGrid::uniform(n, m, r_max)?;
    let grid = if uniform
        .nodes()
        .iter()
        .zip(&nodes)
        .all(|(a, b)| a.to_bits() == b.to_bits())
    {
        uniform
    } else {
        RadialGrid::from_nodes(n, nodes, r_max)?
    };
    Ok((RadialFunction::new(grid, values)?, mu))
}
