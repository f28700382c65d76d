//! The constrained functional: energy, Pohozaev, fiber derivatives, Lagrange
//! multiplier, Euler–Lagrange residual, and the constrained gradient.
//!
//! Everything here reduces to four base quantities of a profile u —
//!
//! ```text
//!   G = ‖∇u‖₂²,  G^θ,  D_q = D(u,q),  D_p = D(u,p)
//! ```
//!
//! — computed once per profile ([`base_quantities`]) and recombined in closed
//! form. The energy and its dilation fiber E_u(s) = J_α(s⋆u) are sums of four
//! exponentials C·e^{ks}:
//!
//! ```text
//!   (a/2)G·e^{2s} + (b/2θ)G^θ·e^{2θs} − (α/2q)D_q·e^{2qδ_q s} − (1/2p)D_p·e^{2pδ_p s},
//! ```
//!
//! so E_u' and E_u'' are the same sums with coefficients C·k and C·k². The
//! Pohozaev functional is *defined* as P_α(u) = E_u'(0); the textbook display
//! a‖∇u‖² + b‖∇u‖^{2θ} − δ_q α D_q − δ_p D_p is the same floating-point
//! computation, so the fiber–Pohozaev identity holds to the last bit rather
//! than to a tolerance.
//!
//! The kinetic term uses the conservative quadratic form G = uᵀLu built from
//! staggered edge differences ([`KineticForm`]), whose variational derivative
//! is exactly 2Lu — this keeps the gradient field, the discrete radial
//! Laplacian in [`el_residual`], and the energy consistent with one another.
//! (The centered-difference `grad_norm` on [`RadialFunction`] remains the
//! public norm; both converge at second order and agree to O(h²).)
//!
//! [`Kernels`] bundles grid + Riesz matrix + kinetic form, and rescales
//! exactly under dilation: weights by σ^N, kernel by σ^{−μ}, kinetic
//! coefficients by σ^{N−2} — the backbone of the solvers' exact fiber moves.

use std::path::Path;
use std::sync::Arc;

use crate::error::{KcnError, Result};
use crate::exponents::{derive_exponents, ProblemParams};
use crate::radial::{sphere_area, RadialFunction, RadialGrid};
use crate::riesz::RieszKernel;

/// Relative mass tolerance for operations that require u ∈ S_c.
pub const MASS_REL_TOL: f64 = 1e-6;

/// Conservative discretization of ‖∇u‖₂² as a quadratic form
/// uᵀLu = ∑_edges ν_e·((u_{i+1}−u_i)/h_e)², ν_e the measure of the edge
/// shell, closed at the outer boundary by a ghost node one spacing beyond
/// r_max where u = 0. L is symmetric positive definite and tridiagonal.
///
/// The closure edge is what makes the discrete space a genuine subspace of
/// H¹(ℝ^N): every grid vector extends by zero past the ghost node at the
/// cost its gradient actually incurs. Without it the boundary is free and
/// minimizing sequences can park mass in flat, kinetically invisible
/// shelves against r_max, driving interaction quotients above their
/// continuum bounds. Exponentially decaying profiles pay e^{−2κ·r_max}:
/// nothing.
#[derive(Debug, Clone)]
pub struct KineticForm {
    /// c_i = ν_i/h_i² for the interior edge (i, i+1).
    coeffs: Vec<f64>,
    /// The ghost-edge coefficient multiplying u_{M−1}².
    closure: f64,
}

impl KineticForm {
    pub fn build(grid: &RadialGrid) -> KineticForm {
        let omega = sphere_area(grid.n());
        let nf = grid.n() as f64;
        let r = grid.nodes();
        let m = r.len();
        let edge = |lo: f64, hi: f64| {
            let shell = omega * (hi.powf(nf) - lo.powf(nf)) / nf;
            let h = hi - lo;
            shell / (h * h)
        };
        let coeffs = (0..m - 1).map(|i| edge(r[i], r[i + 1])).collect();
        let h_last = r[m - 1] - r[m - 2];
        let closure = edge(r[m - 1], r[m - 1] + h_last);
        KineticForm { coeffs, closure }
    }

    /// uᵀLu = ∑ c_i (u_{i+1} − u_i)² + c_gh·u_{M−1}².
    pub fn quad(&self, values: &[f64]) -> f64 {
        let interior: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let d = values[i + 1] - values[i];
                c * d * d
            })
            .sum();
        let last = values[values.len() - 1];
        interior + self.closure * last * last
    }

    /// The interior edge coefficients c_i (solvers assemble tridiagonal
    /// operators stiff·L + s₀·diag(w) from them, adding [`Self::closure`]
    /// to the last diagonal entry).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The ghost-edge coefficient.
    pub fn closure(&self) -> f64 {
        self.closure
    }

    /// (Lu)_j, the half-derivative of the quadratic form.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let m = values.len();
        let mut out = vec![0.0; m];
        for (i, c) in self.coeffs.iter().enumerate() {
            let d = c * (values[i + 1] - values[i]);
            out[i] -= d;
            out[i + 1] += d;
        }
        out[m - 1] += self.closure * values[m - 1];
        out
    }

    /// Edge coefficients under r → σr: shells scale by σ^N, spacings by σ,
    /// hence c_i by σ^{N−2} — exactly the e^{2s} kinetic fiber factor once
    /// the σ^{−N} amplitude normalization is accounted for.
    pub fn rescaled(&self, sigma: f64, n: u32) -> KineticForm {
        let s = sigma.powi(n as i32 - 2);
        KineticForm {
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
            closure: s * self.closure,
        }
    }
}

/// Grid + Riesz kernel + kinetic form: everything an energy evaluation needs.
#[derive(Debug, Clone)]
pub struct Kernels {
    riesz: RieszKernel,
    kin: KineticForm,
}

impl Kernels {
    pub fn build(grid: &Arc<RadialGrid>, mu: f64) -> Result<Kernels> {
        Ok(Kernels {
            riesz: RieszKernel::build(grid, mu)?,
            kin: KineticForm::build(grid),
        })
    }

    /// As [`Kernels::build`] but consulting/updating the kernel disk cache.
    pub fn load_or_build(
        grid: &Arc<RadialGrid>,
        mu: f64,
        cache_dir: Option<&Path>,
    ) -> Result<Kernels> {
        Ok(Kernels {
            riesz: RieszKernel::load_or_build(grid, mu, cache_dir)?,
            kin: KineticForm::build(grid),
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.riesz.grid()
    }

    pub fn mu(&self) -> f64 {
        self.riesz.mu()
    }

    pub fn riesz(&self) -> &RieszKernel {
        &self.riesz
    }

    pub fn kinetic(&self) -> &KineticForm {
        &self.kin
    }

    /// Exact pushforward of the whole bundle along r → σr.
    pub fn rescaled(&self, sigma: f64) -> Result<Kernels> {
        let n = self.grid().n();
        Ok(Kernels {
            riesz: self.riesz.rescaled(sigma)?,
            kin: self.kin.rescaled(sigma, n),
        })
    }
}

/// The cached ingredients of every functional evaluation at a fixed profile.
#[derive(Debug, Clone, Copy)]
pub struct BaseQuantities {
    /// G = ‖∇u‖₂² (kinetic quadratic form).
    pub g: f64,
    /// G^θ, shared so identities cancel bit-for-bit.
    pub g_theta: f64,
    /// D(u, q); zero is stored (and the convolution skipped) when α = 0.
    pub dq: f64,
    /// D(u, p).
    pub dp: f64,
    /// ‖u‖₂².
    pub mass_sq: f64,
}

/// sign(u)|u|^{e}: the |u|^{t−2}u nonlinearity with the u = 0 limit made
/// explicit (e > 0 throughout the admissible exponent range).
pub(crate) fn sgn_pow(u: f64, e: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(e)
    }
}

fn check_grid(u: &RadialFunction, kernels: &Kernels) -> Result<()> {
    if !kernels.grid().compatible(u.grid()) {
        return Err(KcnError::GridMismatch(
            "profile grid differs from kernel grid".into(),
        ));
    }
    Ok(())
}

/// |u|^t as a grid function (the density the Riesz potential acts on).
fn abs_pow(u: &RadialFunction, t: f64) -> RadialFunction {
    RadialFunction::new(
        Arc::clone(u.grid()),
        u.values().iter().map(|v| v.abs().powf(t)).collect(),
    )
    .expect("powers of finite samples are finite")
}

/// Computes (G, G^θ, D_q, D_p, ‖u‖₂²) in two kernel applications (one when
/// α = 0).
pub fn base_quantities(
    u: &RadialFunction,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<BaseQuantities> {
    check_grid(u, kernels)?;
    let g = kernels.kin.quad(u.values());
    let dq = if params.alpha == 0.0 {
        0.0
    } else {
        let fq = abs_pow(u, params.q);
        kernels.riesz.apply(&fq)?.dot(&fq)?
    };
    let fp = abs_pow(u, params.p);
    let dp = kernels.riesz.apply(&fp)?.dot(&fp)?;
    Ok(BaseQuantities {
        g,
        g_theta: g.powf(params.theta),
        dq,
        dp,
        mass_sq: u.l2_norm_sq(),
    })
}

/// J_α(u) split into its four terms.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown {
    /// (a/2)‖∇u‖₂².
    pub kin2: f64,
    /// (b/2θ)‖∇u‖₂^{2θ}.
    pub kin2theta: f64,
    /// (α/2q)D(u,q).
    pub choq_q: f64,
    /// (1/2p)D(u,p).
    pub choq_p: f64,
    /// kin2 + kin2theta − choq_q − choq_p.
    pub total: f64,
}

/// The dilation fiber E_u(s) = J_α(s⋆u) as four exponentials C·e^{ks},
/// cached per profile. `d1`/`d2` reuse the same coefficients with factors k
/// and k², so E'(0) *is* the Pohozaev evaluation.
#[derive(Debug, Clone, Copy)]
pub struct FiberMap {
    /// (coefficient, rate) per term: kinetic-2, kinetic-2θ, q-term, p-term.
    terms: [(f64, f64); 4],
}

impl FiberMap {
    /// Builds the fiber map from precomputed base quantities.
    pub fn from_base(base: &BaseQuantities, params: &ProblemParams) -> FiberMap {
        let d = derive_exponents(params);
        FiberMap {
            terms: [
                (params.a / 2.0 * base.g, 2.0),
                (params.b / (2.0 * params.theta) * base.g_theta, 2.0 * params.theta),
                (
                    -(params.alpha / (2.0 * params.q)) * base.dq,
                    2.0 * params.q * d.delta_q,
                ),
                (
                    -(1.0 / (2.0 * params.p)) * base.dp,
                    2.0 * params.p * d.delta_p,
                ),
            ],
        }
    }

    /// Builds a fiber map directly from signed (coefficient, rate) pairs
    /// (used by the scalar-profile machinery).
    pub fn from_terms(terms: [(f64, f64); 4]) -> FiberMap {
        FiberMap { terms }
    }

    /// E_u(s).
    pub fn energy(&self, s: f64) -> f64 {
        self.terms.iter().map(|(c, k)| c * (k * s).exp()).sum()
    }

    /// E_u'(s).
    pub fn d1(&self, s: f64) -> f64 {
        self.terms.iter().map(|(c, k)| c * k * (k * s).exp()).sum()
    }

    /// E_u''(s).
    pub fn d2(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, k)| c * k * k * (k * s).exp())
            .sum()
    }

    /// The four (coefficient, rate) pairs (used by the fiber-geometry module).
    pub fn terms(&self) -> &[(f64, f64); 4] {
        &self.terms
    }
}

/// Builds the cached fiber map of a profile.
pub fn fiber_map(
    u: &RadialFunction,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<FiberMap> {
    Ok(FiberMap::from_base(
        &base_quantities(u, params, kernels)?,
        params,
    ))
}

/// J_α(u) with its term-by-term breakdown.
pub fn energy(
    u: &RadialFunction,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<EnergyBreakdown> {
    let base = base_quantities(u, params, kernels)?;
    Ok(energy_from_base(&base, params))
}

/// Breakdown from cached base quantities.
pub fn energy_from_base(base: &BaseQuantities, params: &ProblemParams) -> EnergyBreakdown {
    let kin2 = params.a / 2.0 * base.g;
    let kin2theta = params.b / (2.0 * params.theta) * base.g_theta;
    let choq_q = params.alpha / (2.0 * params.q) * base.dq;
    let choq_p = 1.0 / (2.0 * params.p) * base.dp;
    EnergyBreakdown {
        kin2,
        kin2theta,
        choq_q,
        choq_p,
        total: kin2 + kin2theta - choq_q - choq_p,
    }
}

/// P_α(u) = a‖∇u‖² + b‖∇u‖^{2θ} − δ_q α D_q − δ_p D_p, evaluated as E_u'(0)
/// (identical floating-point expression, so the identity is exact).
pub fn pohozaev(u: &RadialFunction, params: &ProblemParams, kernels: &Kernels) -> Result<f64> {
    Ok(fiber_map(u, params, kernels)?.d1(0.0))
}

/// E_u(s) (closed form; no re-dilation, no re-convolution).
pub fn fiber_energy(
    u: &RadialFunction,
    s: f64,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<f64> {
    Ok(fiber_map(u, params, kernels)?.energy(s))
}

/// E_u'(s).
pub fn fiber_d1(
    u: &RadialFunction,
    s: f64,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<f64> {
    Ok(fiber_map(u, params, kernels)?.d1(s))
}

/// E_u''(s).
pub fn fiber_d2(
    u: &RadialFunction,
    s: f64,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<f64> {
    Ok(fiber_map(u, params, kernels)?.d2(s))
}

fn require_mass(u: &RadialFunction, c: f64) -> Result<f64> {
    let mass = u.l2_norm();
    if (mass - c).abs() > MASS_REL_TOL * c {
        return Err(KcnError::MassMismatch(format!(
            "profile mass {mass} differs from constraint c={c}"
        )));
    }
    Ok(mass)
}

/// λ = (a‖∇u‖² + b‖∇u‖^{2θ} − αD_q − D_p)/c²; requires ‖u‖₂ = c within 1e−6.
pub fn lagrange_multiplier(
    u: &RadialFunction,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<f64> {
    require_mass(u, params.c)?;
    let base = base_quantities(u, params, kernels)?;
    Ok(lagrange_from_base(&base, params))
}

/// λ from cached base quantities (no mass check).
pub fn lagrange_from_base(base: &BaseQuantities, params: &ProblemParams) -> f64 {
    (params.a * base.g + params.b * base.g_theta - params.alpha * base.dq - base.dp)
        / (params.c * params.c)
}

/// The L²-gradient field of J_α at u under the weighted inner product:
/// grad_i = (a + bG^{θ−1})(Lu)_i/w_i − αΦ_q,i|u_i|^{q−2}u_i − Φ_p,i|u_i|^{p−2}u_i,
/// where Φ_t = K(|u|^t). Satisfies ⟨grad, u⟩ = a G + b G^θ − αD_q − D_p = λc²
/// exactly (by the symmetry of K).
pub fn gradient_field(
    u: &RadialFunction,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<RadialFunction> {
    check_grid(u, kernels)?;
    let g = kernels.kin.quad(u.values());
    let stiff = params.a + params.b * g.powf(params.theta - 1.0);
    let lu = kernels.kin.apply(u.values());
    let w = kernels.grid().weights();
    let phi_q = if params.alpha == 0.0 {
        None
    } else {
        Some(kernels.riesz.apply(&abs_pow(u, params.q))?)
    };
    let phi_p = kernels.riesz.apply(&abs_pow(u, params.p))?;
    let values = (0..u.values().len())
        .map(|i| {
            let ui = u.values()[i];
            let mut v = stiff * lu[i] / w[i] - phi_p.values()[i] * sgn_pow(ui, params.p - 1.0);
            if let Some(phi_q) = &phi_q {
                v -= params.alpha * phi_q.values()[i] * sgn_pow(ui, params.q - 1.0);
            }
            v
        })
        .collect();
    RadialFunction::new(Arc::clone(kernels.grid()), values)
}

/// Euler–Lagrange residual field
/// −(a+b‖∇u‖^{2(θ−1)})Δ_r u − λu − α(I_μ∗|u|^q)|u|^{q−2}u − (I_μ∗|u|^p)|u|^{p−2}u
/// (with Δ_r u := −(Lu)_i/w_i) and its weighted L² norm.
pub fn el_residual(
    u: &RadialFunction,
    lambda: f64,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<(RadialFunction, f64)> {
    let grad = gradient_field(u, params, kernels)?;
    let field = grad.axpy(-lambda, u)?;
    let norm = field.l2_norm();
    Ok((field, norm))
}

/// Gradient of J_α restricted to the sphere S_c: grad − (⟨grad,u⟩/c²)u.
/// L²-orthogonal to u by construction; vanishes exactly at constrained
/// critical points, where ⟨grad,u⟩/c² recovers λ.
pub fn constrained_gradient(
    u: &RadialFunction,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<RadialFunction> {
    require_mass(u, params.c)?;
    let grad = gradient_field(u, params, kernels)?;
    let lam = grad.dot(u)? / (params.c * params.c);
    grad.axpy(-lam, u)
}

/// Sign class of E_u''(0) on the Pohozaev set: Pplus/Pminus partition the
/// manifold; Pzero marks the dead band |E''| ≤ 1e−8·(1+|E|), which the
/// two-extrema theory excludes — it signals numerical degeneracy, not theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorseClass {
    Pplus,
    Pminus,
    Pzero,
}

impl std::fmt::Display for MorseClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MorseClass::Pplus => "Pplus",
            MorseClass::Pminus => "Pminus",
            MorseClass::Pzero => "Pzero",
        };
        write!(f, "{s}")
    }
}

/// Dead-band tolerance of the Morse classification.
pub const MORSE_DEAD_BAND: f64 = 1e-8;

/// Classifies E'' against the dead band scaled by 1 + |E|.
pub fn morse_class(e2: f64, e0: f64) -> MorseClass {
    if e2.abs() <= MORSE_DEAD_BAND * (1.0 + e0.abs()) {
        MorseClass::Pzero
    } else if e2 > 0.0 {
        MorseClass::Pplus
    } else {
        MorseClass::Pminus
    }
}
