//! Exponent algebra, regime classification, and closed-form coupling thresholds.
//!
//! Everything in this module is scalar arithmetic on the parameter set of the
//! Kirchhoff–Choquard problem
//!
//! ```text
//!   −(a + b‖∇u‖₂^{2(θ−1)}) Δu = λu + α (I_μ∗|u|^q)|u|^{q−2}u + (I_μ∗|u|^p)|u|^{p−2}u,
//!   ‖u‖₂² = c²,  u ∈ H¹_rad(R^N),
//! ```
//!
//! with Riesz order 0 < μ < N. The derived quantities are
//!
//! * the lower/upper Hardy–Littlewood–Sobolev exponents
//!   `2_{μ,*} = (2N−μ)/N` and `2*_μ = (2N−μ)/(N−2)`,
//! * the mass-critical markers `A* = 2 + (2−μ)/N` (Laplacian scaling) and
//!   `B* = 2 + (2θ−μ)/N` (Kirchhoff scaling),
//! * the dilation weight `δ_r = (N(r−2)+μ)/(2r)`, which satisfies `δ_{2*_μ} = 1`
//!   and `sign(rδ_r − θ) = sign(r − B*)`,
//! * the coupling thresholds α₁, α₂, α₃ (with auxiliary constant κ) below which
//!   the mixed-regime geometry (local minimum + mountain pass) is guaranteed,
//! * the Cardano closed forms Λ for the depressed equations
//!   `Λ³ − bS²Λ − aS = 0` (θ=2, μ=2) and `Λ⁴ − bS³Λ² − aS = 0` (θ=3, μ=1),
//!   and the critical-case energy level built from them.
//!
//! All functions here are pure; the inequality constants C_q, C_p, S_HL they
//! consume are explicit inputs so that every threshold is reproducible from a
//! recorded provenance (see `constants`).

use crate::error::{KcnError, Result};

/// Full parameter set of the problem. Constructed through [`ProblemParams::new`],
/// which enforces the structural invariants; fields are read-only afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Spatial dimension N ≥ 3.
    pub n: u32,
    /// Riesz order μ, 0 < μ < N.
    pub mu: f64,
    /// Kirchhoff constant a > 0.
    pub a: f64,
    /// Kirchhoff constant b > 0.
    pub b: f64,
    /// Kirchhoff exponent θ, 1 < θ < 2*_μ.
    pub theta: f64,
    /// Prescribed mass c > 0 (the constraint is ‖u‖₂ = c).
    pub c: f64,
    /// Lower Choquard exponent q.
    pub q: f64,
    /// Upper Choquard exponent p.
    pub p: f64,
    /// Coupling α ≥ 0 in front of the q-term.
    pub alpha: f64,
}

impl ProblemParams {
    /// Validates 2_{μ,*} < q < p ≤ 2*_μ and all positivity constraints.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: u32,
        mu: f64,
        a: f64,
        b: f64,
        theta: f64,
        c: f64,
        q: f64,
        p: f64,
        alpha: f64,
    ) -> Result<Self> {
        let nf = n as f64;
        if n < 3 {
            return Err(KcnError::InvalidParams(format!("N={n}, need N >= 3")));
        }
        if !(mu > 0.0 && mu < nf) {
            return Err(KcnError::InvalidParams(format!(
                "mu={mu}, need 0 < mu < N={n}"
            )));
        }
        if !(a > 0.0) || !(b > 0.0) || !(c > 0.0) {
            return Err(KcnError::InvalidParams(format!(
                "a={a}, b={b}, c={c}: all must be positive"
            )));
        }
        let two_mu_lower = (2.0 * nf - mu) / nf;
        let two_mu_star = (2.0 * nf - mu) / (nf - 2.0);
        if !(theta > 1.0 && theta < two_mu_star) {
            return Err(KcnError::InvalidParams(format!(
                "theta={theta}, need 1 < theta < 2*_mu = {two_mu_star}"
            )));
        }
        if !(q > two_mu_lower && q < p && p <= two_mu_star) {
            return Err(KcnError::InvalidParams(format!(
                "need 2_mu_lower = {two_mu_lower} < q < p <= 2*_mu = {two_mu_star}, got q={q}, p={p}"
            )));
        }
        if !(alpha >= 0.0) {
            return Err(KcnError::InvalidParams(format!("alpha={alpha}, need alpha >= 0")));
        }
        Ok(ProblemParams {
            n,
            mu,
            a,
            b,
            theta,
            c,
            q,
            p,
            alpha,
        })
    }

    /// Dimension as a float (used in every exponent formula).
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Same parameters with a different coupling α (sweeps, α→0 limits).
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ProblemParams::new(
            self.n, self.mu, self.a, self.b, self.theta, self.c, self.q, self.p, alpha,
        )
    }
}

/// The dilation weight δ_r = (N(r−2)+μ)/(2r).
pub fn delta_r(n: u32, mu: f64, r: f64) -> f64 {
    let nf = n as f64;
    (nf * (r - 2.0) + mu) / (2.0 * r)
}

/// The product r·δ_r computed without the intermediate division:
/// rδ_r = (N(r−2)+μ)/2. Exact whenever the numerator is exactly representable,
/// which keeps the identity rδ_r = θ at r = B* sharp in floating point.
pub fn r_delta_r(n: u32, mu: f64, r: f64) -> f64 {
    let nf = n as f64;
    (nf * (r - 2.0) + mu) / 2.0
}

/// All derived exponents of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedExponents {
    /// Lower HLS exponent 2_{μ,*} = (2N−μ)/N.
    pub two_mu_lower: f64,
    /// Upper HLS exponent 2*_μ = (2N−μ)/(N−2); δ_r = 1 there.
    pub two_mu_star: f64,
    /// Laplacian mass-critical exponent A* = 2 + (2−μ)/N.
    pub a_star: f64,
    /// Kirchhoff mass-critical exponent B* = 2 + (2θ−μ)/N.
    pub b_star: f64,
    /// δ_q.
    pub delta_q: f64,
    /// δ_p.
    pub delta_p: f64,
}

/// Computes every derived exponent from the parameter set.
pub fn derive_exponents(params: &ProblemParams) -> DerivedExponents {
    let nf = params.nf();
    DerivedExponents {
        two_mu_lower: (2.0 * nf - params.mu) / nf,
        two_mu_star: (2.0 * nf - params.mu) / (nf - 2.0),
        a_star: 2.0 + (2.0 - params.mu) / nf,
        b_star: 2.0 + (2.0 * params.theta - params.mu) / nf,
        delta_q: delta_r(params.n, params.mu, params.q),
        delta_p: delta_r(params.n, params.mu, params.p),
    }
}

/// Position of (q, p) relative to (A*, B*, 2*_μ).
///
/// * `CaseI`:   2_{μ,*} < q < A*  and  B* < p < 2*_μ  (mixed, subcritical p)
/// * `CaseII`:  2_{μ,*} < q < A*  and  p = 2*_μ       (mixed, critical p)
/// * `CaseIII`: B* < q < p < 2*_μ                      (supercritical, subcritical p)
/// * `CaseIV`:  B* < q < 2*_μ and p = 2*_μ             (supercritical, critical p)
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    CaseI,
    CaseII,
    CaseIII,
    CaseIV,
}

impl Regime {
    /// True in the mixed regime (q mass-subcritical): Cases I and II.
    pub fn is_mixed(&self) -> bool {
        matches!(self, Regime::CaseI | Regime::CaseII)
    }

    /// True when p sits at the HLS-critical exponent: Cases II and IV.
    pub fn is_critical_p(&self) -> bool {
        matches!(self, Regime::CaseII | Regime::CaseIV)
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::CaseI => "CaseI",
            Regime::CaseII => "CaseII",
            Regime::CaseIII => "CaseIII",
            Regime::CaseIV => "CaseIV",
        };
        write!(f, "{s}")
    }
}

/// Classifies (q, p) into exactly one case, rejecting boundary exponents.
///
/// The case inequalities are strict, so q = A*, q = B*, or p = B* is a
/// [`KcnError::BoundaryExponent`]; configurations the taxonomy does not cover
/// (q ∈ (A*, B*), or p ≤ B*) are [`KcnError::UnsupportedExponents`].
pub fn classify_regime(params: &ProblemParams) -> Result<Regime> {
    let d = derive_exponents(params);
    let (q, p) = (params.q, params.p);
    if q == d.a_star || q == d.b_star || p == d.b_star {
        return Err(KcnError::BoundaryExponent(format!(
            "q={q}, p={p} sits exactly on A*={} or B*={}",
            d.a_star, d.b_star
        )));
    }
    let critical_p = p == d.two_mu_star;
    if q < d.a_star {
        if critical_p {
            return Ok(Regime::CaseII);
        }
        if p > d.b_star {
            return Ok(Regime::CaseI);
        }
        return Err(KcnError::UnsupportedExponents(format!(
            "q={q} < A*={} but p={p} <= B*={}: no case applies",
            d.a_star, d.b_star
        )));
    }
    if q > d.b_star {
        if critical_p {
            return Ok(Regime::CaseIV);
        }
        return Ok(Regime::CaseIII);
    }
    Err(KcnError::UnsupportedExponents(format!(
        "q={q} lies between A*={} and B*={}: no case applies",
        d.a_star, d.b_star
    )))
}

/// Coupling thresholds with the constants they were evaluated from.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdSet {
    /// Threshold α₁ (two-extrema geometry of the fiber map).
    pub alpha1: f64,
    /// Threshold α₂ (two-zero structure of the lower envelope g).
    pub alpha2: f64,
    /// Threshold α₃ (critical-case compactness margin); only defined when
    /// p = 2*_μ.
    pub alpha3: Option<f64>,
    /// Auxiliary constant κ entering α₂.
    pub kappa: f64,
    /// Effective C_p used (the GN constant, or S_HL^{−2*_μ} when p = 2*_μ).
    pub c_p: f64,
    /// C_q used.
    pub c_q: f64,
    /// S_HL used.
    pub s_hl: f64,
}

impl ThresholdSet {
    /// min(α₁, α₂), additionally capped by α₃ when the latter exists.
    pub fn admissible_alpha(&self) -> f64 {
        let m = self.alpha1.min(self.alpha2);
        match self.alpha3 {
            Some(a3) => m.min(a3),
            None => m,
        }
    }
}

/// Evaluates α₁, α₂ (and α₃ when p = 2*_μ) together with κ.
///
/// Requires the mixed regime (q < A*); C_p, C_q are the Gagliardo–Nirenberg
/// constants for the two Choquard terms and S_HL the Rayleigh-quotient
/// constant. When p = 2*_μ the effective C_p is S_HL^{−2*_μ} regardless of the
/// c_p argument.
pub fn compute_thresholds(
    params: &ProblemParams,
    c_p: f64,
    c_q: f64,
    s_hl: f64,
) -> Result<ThresholdSet> {
    if !(c_p > 0.0 && c_q > 0.0 && s_hl > 0.0) {
        return Err(KcnError::InvalidParams(format!(
            "constants must be positive: C_p={c_p}, C_q={c_q}, S_HL={s_hl}"
        )));
    }
    let d = derive_exponents(params);
    if params.q >= d.a_star {
        return Err(KcnError::RegimeMismatch(format!(
            "thresholds require q < A*={}, got q={}",
            d.a_star, params.q
        )));
    }
    let regime = classify_regime(params)?;
    let (a, b, th, c) = (params.a, params.b, params.theta, params.c);
    let (q, p) = (params.q, params.p);
    let (dq, dp) = (d.delta_q, d.delta_p);
    let qdq = r_delta_r(params.n, params.mu, q);
    let pdp = r_delta_r(params.n, params.mu, p);
    let critical_p = regime.is_critical_p();
    let eff_cp = if critical_p {
        s_hl.powf(-d.two_mu_star)
    } else {
        c_p
    };

    // α₁: the two-extrema threshold.
    let alpha1 = (b * (th - qdq) / (dp * (pdp - qdq) * eff_cp * c.powf(2.0 * p * (1.0 - dp))))
        .powf((th - qdq) / (pdp - th))
        * b
        * (pdp - th)
        / (dq * (pdp - qdq) * c_q * c.powf(2.0 * q * (1.0 - dq)));

    // κ = x^s − x^t with the base x < 1 and exponents s < t, hence κ > 0.
    let x = th * (th - qdq) * (th - 1.0) / (pdp * (pdp - qdq) * (pdp - 1.0));
    let s_exp = (th - qdq) / (pdp - th);
    let t_exp = (pdp - qdq) / (pdp - th);
    let kappa = x.powf(s_exp) - x.powf(t_exp);

    // α₂: the lower-envelope threshold.
    let term1 = a / c.powf(2.0 * q * (1.0 - dq) + 2.0 * p * (1.0 - dp) * (1.0 - qdq) / (pdp - th))
        * (b * p / (th * eff_cp)).powf((1.0 - qdq) / (pdp - th));
    let term2 = 2.0 / c.powf(2.0 * q * (1.0 - dq) + 2.0 * p * (1.0 - dp) * (th - qdq) / (pdp - th))
        * (b / (2.0 * th)).powf((pdp - qdq) / (pdp - th))
        / (eff_cp / (2.0 * p)).powf((th - qdq) / (pdp - th));
    let alpha2 = kappa * q / c_q * (term1 + term2);

    // α₃ exists only at the critical exponent p = 2*_μ.
    let alpha3 = if critical_p {
        let tms = d.two_mu_star;
        let level = (s_hl.powf(th + 1.0) * 4.0 * a * b).powf(tms / (2.0 * tms - (th + 1.0)));
        Some(
            (level * q / (th - qdq)).powf((th - qdq) / th) * (b / dq).powf(qdq / th) * (tms - th)
                / ((tms - qdq) * c_q * c.powf(2.0 * q * (1.0 - dq))),
        )
    } else {
        None
    };

    Ok(ThresholdSet {
        alpha1,
        alpha2,
        alpha3,
        kappa,
        c_p: eff_cp,
        c_q,
        s_hl,
    })
}

/// Which depressed-equation closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CardanoVariant {
    /// θ = 2, μ = 2, N = 3 (2*_μ = 4): Λ³ − bS²Λ − aS = 0.
    Theta2Mu2,
    /// θ = 3, μ = 1, N = 3 (2*_μ = 5): Λ⁴ − bS³Λ² − aS = 0.
    Theta3Mu1,
}

/// Closed-form positive root Λ of the critical-case algebraic equation.
///
/// `Theta2Mu2` uses the Cardano form Λ = u + v with u³, v³ the two branch
/// values aS/2 ± √(a²S²/4 − b³S⁶/27); it requires a²/4 − b³S⁴/27 > 0. For
/// numerical stability v is recovered from the product identity u·v = bS²/3
/// instead of the (cancellation-prone) difference branch. `Theta3Mu1` resolves
/// the quadratic in Λ²: Λ = √((bS³ + √(b²S⁶ + 4aS))/2).
pub fn cardano_lambda(a: f64, b: f64, s_hl: f64, variant: CardanoVariant) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0 && s_hl > 0.0) {
        return Err(KcnError::InvalidParams(format!(
            "cardano_lambda needs a, b >= 0 and S_HL > 0, got a={a}, b={b}, S_HL={s_hl}"
        )));
    }
    let s = s_hl;
    match variant {
        CardanoVariant::Theta2Mu2 => {
            let hypothesis = a * a / 4.0 - b.powi(3) * s.powi(4) / 27.0;
            if !(hypothesis > 0.0) {
                return Err(KcnError::DiscriminantNonpositive(format!(
                    "a^2/4 - b^3 S^4/27 = {hypothesis:e} <= 0"
                )));
            }
            let disc = s * s * hypothesis; // a²S²/4 − b³S⁶/27
            let u = (a * s / 2.0 + disc.sqrt()).cbrt();
            // v = cbrt(aS/2 − √disc); u·v = cbrt((aS/2)² − disc) = bS²/3.
            let v = b * s * s / (3.0 * u);
            Ok(u + v)
        }
        CardanoVariant::Theta3Mu1 => {
            let bs3 = b * s.powi(3);
            Ok(((bs3 + (bs3 * bs3 + 4.0 * a * s).sqrt()) / 2.0).sqrt())
        }
    }
}

/// Critical-case energy level and (when available) the Cardano upper bound.
#[derive(Debug, Clone, Copy)]
pub struct CriticalLevel {
    /// (S_HL^{θ+1}·4ab)^{2*_μ/(2·2*_μ−(θ+1))}·(2*_μ−θ)/(2·2*_μ·θ).
    pub general: f64,
    /// bΛ²S²/8 + 3aΛS/8 for (N,θ,μ) = (3,2,2); None otherwise or when the
    /// discriminant hypothesis fails.
    pub cardano_bound: Option<f64>,
}

/// Evaluates the critical-case energy level; requires p = 2*_μ.
pub fn critical_energy_level(params: &ProblemParams, s_hl: f64) -> Result<CriticalLevel> {
    let d = derive_exponents(params);
    if params.p < d.two_mu_star {
        return Err(KcnError::RegimeMismatch(format!(
            "critical level requires p = 2*_mu = {}, got p = {}",
            d.two_mu_star, params.p
        )));
    }
    let (a, b, th) = (params.a, params.b, params.theta);
    let tms = d.two_mu_star;
    let general = (s_hl.powf(th + 1.0) * 4.0 * a * b).powf(tms / (2.0 * tms - (th + 1.0)))
        * (tms - th)
        / (2.0 * tms * th);
    let cardano_bound = if params.n == 3 && th == 2.0 && params.mu == 2.0 {
        cardano_lambda(a, b, s_hl, CardanoVariant::Theta2Mu2)
            .ok()
            .map(|lam| b * lam * lam * s_hl * s_hl / 8.0 + 3.0 * a * lam * s_hl / 8.0)
    } else {
        None
    };
    Ok(CriticalLevel {
        general,
        cardano_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;
    use num::{BigInt, FromPrimitive, Signed, Zero};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn case1_params(alpha: f64) -> ProblemParams {
        ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 1.5, 3.0, alpha).unwrap()
    }

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(1e-300)
    }

    #[test]
    fn derived_exponents_n3_mu2_theta2() {
        let d = derive_exponents(&case1_params(0.0));
        assert_eq!(d.two_mu_lower, 4.0 / 3.0);
        assert_eq!(d.two_mu_star, 4.0);
        assert_eq!(d.a_star, 2.0);
        assert_eq!(d.b_star, 2.0 + 2.0 / 3.0);
        assert_eq!(d.delta_q, 1.0 / 6.0);
        assert_eq!(d.delta_p, 5.0 / 6.0);
    }

    #[test]
    fn delta_at_upper_critical_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let n = rng.random_range(3..=9u32);
            let mu = rng.random_range(0.05..(n as f64 - 0.05));
            let r = (2.0 * n as f64 - mu) / (n as f64 - 2.0);
            assert!((delta_r(n, mu, r) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn r_delta_r_hits_theta_at_b_star() {
        // N=4, mu=1, theta=1.5: B* = 2.5 and rδ_r there equals θ exactly.
        assert_eq!(r_delta_r(4, 1.0, 2.5), 1.5);
    }

    #[test]
    fn sign_of_r_delta_r_minus_theta_matches_sign_of_r_minus_b_star() {
        // Exact rational arithmetic: rδ_r − θ and r − B* have identical sign
        // for every admissible rational (N, μ, θ, r).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rat = |num: i64, den: i64| {
            BigRational::new(BigInt::from_i64(num).unwrap(), BigInt::from_i64(den).unwrap())
        };
        for _ in 0..500 {
            let n = rng.random_range(3..=8i64);
            let nr = rat(n, 1);
            let mu = rat(rng.random_range(1..(4 * n)), 4); // μ ∈ {1/4, …, N−1/4}
            if mu >= nr || mu <= BigRational::zero() {
                continue;
            }
            let theta = rat(rng.random_range(5..12), 4); // θ ∈ (1, 3]
            let r = rat(rng.random_range(9..32), 8); // r ∈ (1, 4]
            if r <= BigRational::zero() {
                continue;
            }
            let two = rat(2, 1);
            let r_delta = (&nr * (&r - &two) + &mu) / &two; // rδ_r
            let b_star = &two + (&two * &theta - &mu) / &nr;
            let lhs = &r_delta - &theta;
            let rhs = &r - &b_star;
            assert_eq!(lhs.is_positive(), rhs.is_positive());
            assert_eq!(lhs.is_zero(), rhs.is_zero());
        }
    }

    #[test]
    fn classify_canonical_cases() {
        let mk = |q, p| ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, q, p, 0.1).unwrap();
        assert_eq!(classify_regime(&mk(1.5, 3.0)).unwrap(), Regime::CaseI);
        assert_eq!(classify_regime(&mk(1.5, 4.0)).unwrap(), Regime::CaseII);
        assert_eq!(classify_regime(&mk(3.0, 3.5)).unwrap(), Regime::CaseIII);
        assert_eq!(classify_regime(&mk(3.5, 4.0)).unwrap(), Regime::CaseIV);
    }

    #[test]
    fn classify_rejects_boundaries_and_gaps() {
        let mk = |q, p| ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, q, p, 0.1).unwrap();
        // q exactly at A* = 2.
        assert!(matches!(
            classify_regime(&mk(2.0, 3.0)),
            Err(KcnError::BoundaryExponent(_))
        ));
        // p exactly at B* = 8/3.
        assert!(matches!(
            classify_regime(&mk(1.5, 2.0 + 2.0 / 3.0)),
            Err(KcnError::BoundaryExponent(_))
        ));
        // q exactly at B*.
        assert!(matches!(
            classify_regime(&mk(2.0 + 2.0 / 3.0, 3.5)),
            Err(KcnError::BoundaryExponent(_))
        ));
        // q strictly between A* and B*: uncovered.
        assert!(matches!(
            classify_regime(&mk(2.2, 3.5)),
            Err(KcnError::UnsupportedExponents(_))
        ));
        // both below B* (p subcritical for the Kirchhoff scaling): uncovered.
        assert!(matches!(
            classify_regime(&mk(1.5, 2.5)),
            Err(KcnError::UnsupportedExponents(_))
        ));
    }

    #[test]
    fn params_invariants_enforced() {
        assert!(ProblemParams::new(2, 1.0, 1.0, 1.0, 1.5, 1.0, 1.8, 2.5, 0.0).is_err());
        assert!(ProblemParams::new(3, 3.5, 1.0, 1.0, 1.5, 1.0, 1.8, 2.5, 0.0).is_err());
        assert!(ProblemParams::new(3, 2.0, -1.0, 1.0, 2.0, 1.0, 1.5, 3.0, 0.0).is_err());
        // q below 2_{μ,*} = 4/3.
        assert!(ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 1.2, 3.0, 0.0).is_err());
        // p above 2*_μ = 4.
        assert!(ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 1.5, 4.2, 0.0).is_err());
        // θ out of range.
        assert!(ProblemParams::new(3, 2.0, 1.0, 1.0, 4.0, 1.0, 1.5, 3.0, 0.0).is_err());
    }

    // Golden values: independent extended-precision (40-digit) evaluation of
    // the closed-form thresholds at N=3, μ=2, θ=2, q=1.5, p=3, a=b=c=1,
    // C_p=C_q=1.
    const GOLD_ALPHA1: f64 = 1.047291201094158207638755936059887502441;
    const GOLD_ALPHA2: f64 = 0.1575325523813091021085324359556682838376;
    const GOLD_KAPPA: f64 = 0.02690191694727462225179876041619057670244;
    const GOLD_ALPHA1_C2: f64 = 0.01636392501709622199435556150093574222563;

    #[test]
    fn thresholds_golden_case1() {
        let t = compute_thresholds(&case1_params(0.0), 1.0, 1.0, 1.0).unwrap();
        assert!(rel_err(t.alpha1, GOLD_ALPHA1) <= 1e-13, "alpha1 = {}", t.alpha1);
        assert!(rel_err(t.alpha2, GOLD_ALPHA2) <= 1e-13, "alpha2 = {}", t.alpha2);
        assert!(rel_err(t.kappa, GOLD_KAPPA) <= 1e-13, "kappa = {}", t.kappa);
        assert!(t.alpha3.is_none());
        assert_eq!(t.admissible_alpha(), t.alpha2);
    }

    // Same extended-precision source, Case II config (p = 4 = 2*_μ, S_HL = 1).
    const GOLD_ALPHA1_II: f64 = 1.642596570157360433421497712217945653456;
    const GOLD_ALPHA2_II: f64 = 0.3277723894480917790689169584553817960738;
    const GOLD_ALPHA3_II: f64 = 1.538619340513585342984722297870425202094;

    #[test]
    fn thresholds_golden_case2_include_alpha3() {
        let params = ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 1.5, 4.0, 0.0).unwrap();
        // c_p argument is ignored at the critical exponent: C_p := S_HL^{−4} = 1.
        let t = compute_thresholds(&params, 123.0, 1.0, 1.0).unwrap();
        assert_eq!(t.c_p, 1.0);
        assert!(rel_err(t.alpha1, GOLD_ALPHA1_II) <= 1e-13);
        assert!(rel_err(t.alpha2, GOLD_ALPHA2_II) <= 1e-13);
        assert!(rel_err(t.alpha3.unwrap(), GOLD_ALPHA3_II) <= 1e-13);
    }

    #[test]
    fn doubling_c_strictly_decreases_alpha1() {
        let p1 = case1_params(0.0);
        let p2 = ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 2.0, 1.5, 3.0, 0.0).unwrap();
        let t1 = compute_thresholds(&p1, 1.0, 1.0, 1.0).unwrap();
        let t2 = compute_thresholds(&p2, 1.0, 1.0, 1.0).unwrap();
        assert!(t2.alpha1 < t1.alpha1);
        assert!(rel_err(t2.alpha1, GOLD_ALPHA1_C2) <= 1e-13);
    }

    #[test]
    fn thresholds_reject_supercritical_q() {
        let params = ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 3.0, 3.5, 0.1).unwrap();
        assert!(matches!(
            compute_thresholds(&params, 1.0, 1.0, 1.0),
            Err(KcnError::RegimeMismatch(_))
        ));
    }

    #[test]
    fn kappa_positive_on_admissible_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = 0;
        while seen < 200 {
            let q = rng.random_range(1.4..1.95);
            let p = rng.random_range(2.7..3.9);
            let params = match ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, q, p, 0.0) {
                Ok(p) => p,
                Err(_) => continue,
            };
            if !matches!(classify_regime(&params), Ok(Regime::CaseI)) {
                continue;
            }
            let t = compute_thresholds(&params, 1.0, 1.0, 1.0).unwrap();
            // Base x ∈ (0,1) and s < t exponents ⇒ κ > 0.
            assert!(t.kappa > 0.0, "kappa = {} at q={q}, p={p}", t.kappa);
            assert!(t.alpha1 > 0.0 && t.alpha2 > 0.0);
            seen += 1;
        }
    }

    // Extended-precision Cardano goldens.
    const GOLD_LAMBDA_B01: f64 = 1.033321398592648076747486505515810670233;
    const GOLD_LAMBDA_B1: f64 = 1.324717957244746025960908854478097340734;
    const GOLD_T3M1: f64 = 1.500893243252566161725669428364075064202;

    #[test]
    fn cardano_theta2mu2_matches_bracketed_root() {
        let lam = cardano_lambda(1.0, 0.1, 1.0, CardanoVariant::Theta2Mu2).unwrap();
        assert!(rel_err(lam, GOLD_LAMBDA_B01) <= 1e-14);
        assert!((lam.powi(3) - 0.1 * lam - 1.0).abs() <= 1e-12);
        let lam11 = cardano_lambda(1.0, 1.0, 1.0, CardanoVariant::Theta2Mu2).unwrap();
        assert!(rel_err(lam11, GOLD_LAMBDA_B1) <= 1e-14);
    }

    #[test]
    fn cardano_closed_forms_at_degenerate_coefficients() {
        // b = 0: the cubic collapses to Λ³ = aS.
        let lam = cardano_lambda(2.0, 0.0, 1.5, CardanoVariant::Theta2Mu2).unwrap();
        assert!(rel_err(lam, 3.0f64.cbrt()) <= 1e-14);
        // a = 0: the quartic collapses to Λ² = bS³.
        let lam = cardano_lambda(0.0, 0.25, 4.0, CardanoVariant::Theta3Mu1).unwrap();
        assert!(rel_err(lam, 4.0) <= 1e-14);
    }

    #[test]
    fn cardano_theta3mu1_golden() {
        let lam = cardano_lambda(2.0, 0.5, 1.3, CardanoVariant::Theta3Mu1).unwrap();
        assert!(rel_err(lam, GOLD_T3M1) <= 1e-14);
    }

    #[test]
    fn cardano_residuals_small_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut n_ok = 0;
        while n_ok < 300 {
            let a = rng.random_range(0.05..5.0);
            let b = rng.random_range(0.0..2.0);
            let s = rng.random_range(0.2..4.0);
            match cardano_lambda(a, b, s, CardanoVariant::Theta2Mu2) {
                Ok(lam) => {
                    let res = lam.powi(3) - b * s * s * lam - a * s;
                    let scale = lam.powi(3) + b * s * s * lam + a * s;
                    assert!(res.abs() <= 1e-10 * scale, "a={a} b={b} s={s}");
                    n_ok += 1;
                }
                Err(KcnError::DiscriminantNonpositive(_)) => continue,
                Err(e) => panic!("unexpected error {e}"),
            }
            let lam = cardano_lambda(a, b, s, CardanoVariant::Theta3Mu1).unwrap();
            let res = lam.powi(4) - b * s.powi(3) * lam * lam - a * s;
            let scale = lam.powi(4) + b * s.powi(3) * lam * lam + a * s;
            assert!(res.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn cardano_rejects_nonpositive_discriminant() {
        // a²/4 − b³S⁴/27 = 1/4 − 8·16/27 < 0.
        assert!(matches!(
            cardano_lambda(1.0, 2.0, 2.0, CardanoVariant::Theta2Mu2),
            Err(KcnError::DiscriminantNonpositive(_))
        ));
    }

    const GOLD_CRIT_LEVEL: f64 = 0.3789291416275995205868149503266113096703;
    const GOLD_THM_BOUND: f64 = 0.7161289422476163547415294324741025892622;

    #[test]
    fn critical_level_golden_and_cardano_bound() {
        let params = ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 3.5, 4.0, 1.0).unwrap();
        let lvl = critical_energy_level(&params, 1.0).unwrap();
        // θ=2, 2*_μ=4: exponent 2·4−3 = 5 → (4ab S³)^{4/5}·2/16.
        assert!(rel_err(lvl.general, GOLD_CRIT_LEVEL) <= 1e-14);
        assert!(rel_err(lvl.cardano_bound.unwrap(), GOLD_THM_BOUND) <= 1e-14);
    }

    #[test]
    fn critical_level_vanishes_with_a_at_b_zero_direction() {
        // b = 0 keeps the discriminant hypothesis alive as a → 0, and both the
        // general level and the Cardano bound carry positive powers of a.
        let mut prev_general = f64::INFINITY;
        let mut prev_bound = f64::INFINITY;
        for &a in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let params = ProblemParams::new(3, 2.0, a, 1e-12, 2.0, 1.0, 3.5, 4.0, 1.0).unwrap();
            let lvl = critical_energy_level(&params, 1.0).unwrap();
            let bound = lvl.cardano_bound.unwrap();
            assert!(lvl.general < prev_general && lvl.general > 0.0);
            assert!(bound < prev_bound && bound > 0.0);
            prev_general = lvl.general;
            prev_bound = bound;
        }
        assert!(prev_general < 1e-6);
        assert!(prev_bound < 1e-2);
    }

    #[test]
    fn critical_level_requires_critical_p() {
        let params = case1_params(0.1);
        assert!(matches!(
            critical_energy_level(&params, 1.0),
            Err(KcnError::RegimeMismatch(_))
        ));
    }
}
