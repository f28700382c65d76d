//! Scalar fiber geometry: the four-term power profiles that govern
//! existence, the two-extrema condition, the envelope g(t), and the exact
//! critical-point structure of the dilation fiber E_u.
//!
//! Both the envelope and every fiber are instances of one scalar shape,
//!
//! ```text
//!   h(t) = a₁t² + a₂t^{2θ} − a₃t^{p₁} − a₄t^{q₁},
//! ```
//!
//! with a₁,a₂ from the kinetic terms and a₃,a₄ from the Choquard terms
//! (sharp-constant bounds for the envelope, the profile's own integrals for a
//! fiber). In the mixed regime (q₁ < 2 < 2θ < p₁) an explicit inequality on
//! the coefficients — [`two_extrema_condition`] — guarantees a strict local
//! minimum at negative level followed by a strict global maximum at positive
//! level; in the supercritical regime (q₁ > 2θ) the shape has a unique
//! maximum instead.
//!
//! Root-finding works on x = e^s: E' is divided by the smallest active power
//! so signs are clean near 0, sign changes are bracketed on a 512-point
//! log-uniform grid over x ∈ [1e−6, 1e6], refined by bisection in s and
//! polished by Newton steps. A mismatch between the found structure and the
//! regime's expected one is an error ([`KcnError::StructureMismatch`]), never
//! silently repaired: the classifying lemmas are exhaustive under their
//! hypotheses, so a mismatch means the hypotheses fail or the grid is too
//! coarse.
//!
//! Naming note: the two-extrema condition involves a constant
//! ([`t1_condition`]) that is unrelated to the envelope's second zero
//! ([`EnvelopeReport::t1`]); the two are kept apart deliberately.

use crate::energy::{fiber_map, morse_class, FiberMap, MorseClass};
use crate::error::{KcnError, Result};
use crate::exponents::{classify_regime, derive_exponents, ProblemParams, Regime};
use crate::radial::RadialFunction;

use crate::energy::{base_quantities, BaseQuantities, Kernels};

/// Residual tolerance of reported fiber critical points, relative to the
/// all-positive term sum a₁e^{2s} + a₂e^{2θs} + a₃e^{p₁s} + a₄e^{q₁s}.
pub const FIBER_RESIDUAL_TOL: f64 = 1e-10;

/// Fallback x-window (degenerate coefficient sets) and the minimum
/// resolution of the bracketing scan.
const SCAN_LO: f64 = 1e-6;
const SCAN_HI: f64 = 1e6;
const SCAN_POINTS: usize = 512;

/// Whether a profile's Choquard coefficients come from sharp-constant bounds
/// (envelope) or from a concrete function's integrals (fiber).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileRole {
    Envelope,
    Fiber,
}

/// Coefficients and exponents of the scalar shape
/// h(t) = a₁t² + a₂t^{2θ} − a₃t^{p₁} − a₄t^{q₁} (θ supplied at evaluation).
#[derive(Debug, Clone, Copy)]
pub struct ScalarProfile {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub p1: f64,
    pub q1: f64,
    pub role: ProfileRole,
}

impl ScalarProfile {
    pub fn new(
        a1: f64,
        a2: f64,
        a3: f64,
        a4: f64,
        p1: f64,
        q1: f64,
        role: ProfileRole,
    ) -> Result<ScalarProfile> {
        let all = [a1, a2, a3, a4, p1, q1];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(KcnError::InvalidParams(
                "scalar profile entries must be finite".into(),
            ));
        }
        if !(a1 > 0.0 && a2 > 0.0) {
            return Err(KcnError::InvalidParams(format!(
                "kinetic coefficients must be positive, got a1={a1}, a2={a2}"
            )));
        }
        if !(a3 >= 0.0 && a4 >= 0.0) {
            return Err(KcnError::InvalidParams(format!(
                "attractive coefficients must be nonnegative, got a3={a3}, a4={a4}"
            )));
        }
        if !(p1 > 0.0 && q1 > 0.0) {
            return Err(KcnError::InvalidParams(format!(
                "profile exponents must be positive, got p1={p1}, q1={q1}"
            )));
        }
        Ok(ScalarProfile {
            a1,
            a2,
            a3,
            a4,
            p1,
            q1,
            role,
        })
    }

    /// The envelope profile: a₃, a₄ built from the interpolation constants
    /// C_p, C_q and the mass c, so that J_α(u) ≥ g(‖∇u‖₂) pointwise.
    pub fn envelope(params: &ProblemParams, c_p: f64, c_q: f64) -> Result<ScalarProfile> {
        if !(c_p > 0.0 && c_q > 0.0) {
            return Err(KcnError::InvalidParams(format!(
                "interpolation constants must be positive, got C_p={c_p}, C_q={c_q}"
            )));
        }
        let d = derive_exponents(params);
        let c = params.c;
        ScalarProfile::new(
            params.a / 2.0,
            params.b / (2.0 * params.theta),
            c_p * c.powf(2.0 * params.p * (1.0 - d.delta_p)) / (2.0 * params.p),
            params.alpha * c_q * c.powf(2.0 * params.q * (1.0 - d.delta_q)) / (2.0 * params.q),
            2.0 * params.p * d.delta_p,
            2.0 * params.q * d.delta_q,
            ProfileRole::Envelope,
        )
    }

    /// The fiber profile of a concrete function: a₃, a₄ are its own Choquard
    /// integrals, so h(t) = E_u(ln t).
    pub fn from_base(base: &BaseQuantities, params: &ProblemParams) -> Result<ScalarProfile> {
        let d = derive_exponents(params);
        ScalarProfile::new(
            params.a / 2.0 * base.g,
            params.b / (2.0 * params.theta) * base.g_theta,
            base.dp / (2.0 * params.p),
            params.alpha * base.dq / (2.0 * params.q),
            2.0 * params.p * d.delta_p,
            2.0 * params.q * d.delta_q,
            ProfileRole::Fiber,
        )
    }

    /// h(t).
    pub fn eval(&self, t: f64, theta: f64) -> f64 {
        self.a1 * t.powi(2) + self.a2 * t.powf(2.0 * theta)
            - self.a3 * t.powf(self.p1)
            - self.a4 * t.powf(self.q1)
    }

    /// h'(t).
    pub fn d1(&self, t: f64, theta: f64) -> f64 {
        2.0 * self.a1 * t + 2.0 * theta * self.a2 * t.powf(2.0 * theta - 1.0)
            - self.p1 * self.a3 * t.powf(self.p1 - 1.0)
            - self.q1 * self.a4 * t.powf(self.q1 - 1.0)
    }

    /// The signed (coefficient, rate) pairs of h(e^s).
    pub fn terms(&self, theta: f64) -> [(f64, f64); 4] {
        [
            (self.a1, 2.0),
            (self.a2, 2.0 * theta),
            (-self.a4, self.q1),
            (-self.a3, self.p1),
        ]
    }
}

/// The constant of the two-extrema condition,
/// t₁ = 2θ(2θ−q₁)(2θ−2) / (p₁(p₁−q₁)(p₁−2)). Distinct from the envelope's
/// second zero.
pub fn t1_condition(profile: &ScalarProfile, theta: f64) -> f64 {
    let tt = 2.0 * theta;
    tt * (tt - profile.q1) * (tt - 2.0)
        / (profile.p1 * (profile.p1 - profile.q1) * (profile.p1 - 2.0))
}

/// The explicit sufficient condition for the mixed-regime two-extrema shape:
///
/// ```text
/// (t₁^{(2θ−q₁)/(p₁−2θ)} − t₁^{(p₁−q₁)/(p₁−2θ)}) ·
///   [ (a₁/a₄)(a₂/a₃)^{(2−q₁)/(p₁−2θ)} + (1/a₄)·a₂^{(p₁−q₁)/(p₁−2θ)}/a₃^{(2θ−q₁)/(p₁−2θ)} ] > 1.
/// ```
///
/// Returns (holds, lhs); holds ⇔ lhs > 1. Requires the mixed exponent
/// pattern q₁ < 2 < 2θ < p₁ and strictly positive coefficients.
pub fn two_extrema_condition(profile: &ScalarProfile, theta: f64) -> Result<(bool, f64)> {
    let tt = 2.0 * theta;
    if !(profile.q1 < 2.0 && 2.0 < tt && tt < profile.p1) {
        return Err(KcnError::ExponentPattern(format!(
            "two-extrema condition needs q1 < 2 < 2θ < p1, got q1={}, 2θ={tt}, p1={}",
            profile.q1, profile.p1
        )));
    }
    if !(profile.a3 > 0.0 && profile.a4 > 0.0) {
        return Err(KcnError::ExponentPattern(format!(
            "two-extrema condition needs strictly positive a3, a4, got a3={}, a4={}",
            profile.a3, profile.a4
        )));
    }
    let t1 = t1_condition(profile, theta);
    let gap = profile.p1 - tt;
    let e_low = (tt - profile.q1) / gap;
    let e_high = (profile.p1 - profile.q1) / gap;
    let lhs = (t1.powf(e_low) - t1.powf(e_high))
        * (profile.a1 / profile.a4 * (profile.a2 / profile.a3).powf((2.0 - profile.q1) / gap)
            + profile.a2.powf(e_high) / (profile.a4 * profile.a3.powf(e_low)));
    Ok((lhs > 1.0, lhs))
}

/// Zeros and extrema of the envelope: g < 0 on (0,t₀) with minimum at
/// t_minus, g > 0 exactly on (t₀, t₁) with maximum at t_plus.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeReport {
    /// First zero: g(t₀) = 0, entry of the positivity window.
    pub t0: f64,
    /// Second zero: exit of the positivity window (not the two-extrema
    /// condition constant).
    pub t1: f64,
    /// Location of the strict local minimum (negative level).
    pub t_minus: f64,
    /// Location of the strict global maximum (positive level).
    pub t_plus: f64,
}

/// One critical point of a fiber, with its second-derivative class.
#[derive(Debug, Clone, Copy)]
pub struct FiberCritical {
    /// Fiber parameter (the dilation s; the multiplicative scale is e^s).
    pub s: f64,
    /// E_u(s).
    pub energy: f64,
    /// E_u''(s).
    pub d2: f64,
    pub class: MorseClass,
}

/// The complete critical-point structure of one fiber.
#[derive(Debug, Clone)]
pub struct FiberReport {
    pub regime: Regime,
    /// Whether the two-point (min-then-max) structure was expected.
    pub two_point: bool,
    /// Critical points ordered by s: [min, max] or [max].
    pub critical: Vec<FiberCritical>,
    /// Zeros of E_u ordered by s; interleaved min < zero < max < zero in the
    /// two-point structure, single zero past the maximum otherwise.
    pub zeros: Vec<f64>,
}

impl FiberReport {
    /// The global fiber maximizer (last critical point in either structure).
    pub fn maximizer(&self) -> &FiberCritical {
        self.critical.last().expect("validated structure is nonempty")
    }

    /// The local minimizer, present only in the two-point structure.
    pub fn local_min(&self) -> Option<&FiberCritical> {
        if self.two_point {
            self.critical.first()
        } else {
            None
        }
    }
}

/// ∑ c·kᵈ·e^{(k−kmin)s} over the active terms: the d-th fiber derivative
/// with the leading power divided out, so signs are stable as s → −∞.
fn reduced_sum(active: &[(f64, f64)], kmin: f64, s: f64) -> f64 {
    active
        .iter()
        .map(|(c, k)| c * ((k - kmin) * s).exp())
        .sum()
}

/// Brackets sign changes of ∑ cᵢkᵢᵈ e^{kᵢs} on a window derived from the
/// pairwise balance points of the terms and bisects each to machine-level s
/// resolution. Returns ascending s roots.
fn scan_roots(terms: &[(f64, f64)], d: u32) -> Vec<f64> {
    let active: Vec<(f64, f64)> = terms
        .iter()
        .filter(|(c, _)| *c != 0.0)
        .map(|(c, k)| (c * k.powi(d as i32), *k))
        .collect();
    if active.is_empty()
        || active.iter().all(|(c, _)| *c > 0.0)
        || active.iter().all(|(c, _)| *c < 0.0)
    {
        return Vec::new();
    }
    let kmin = active.iter().map(|(_, k)| *k).fold(f64::INFINITY, f64::min);
    // All roots lie between the pairwise balance points ln(|C_i|/|C_j|)/(k_j−k_i):
    // past them (plus a domination margin) a single exponential outgrows the
    // rest, so the sum cannot change sign.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &(ci, ki)) in active.iter().enumerate() {
        for &(cj, kj) in active.iter().skip(i + 1) {
            if ki == kj {
                continue;
            }
            let s = (ci.abs().ln() - cj.abs().ln()) / (kj - ki);
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        lo = SCAN_LO.ln();
        hi = SCAN_HI.ln();
    }
    let mut ks: Vec<f64> = active.iter().map(|(_, k)| *k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let gap = ks
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        .max(1e-2);
    let pad = 2.0 + (active.len() as f64).ln() / gap;
    let (s_lo, s_hi) = (lo - pad, hi + pad);
    let points = (((s_hi - s_lo) * 64.0).ceil() as usize).clamp(SCAN_POINTS, 16 * SCAN_POINTS);
    let step = (s_hi - s_lo) / (points - 1) as f64;
    let f = |s: f64| reduced_sum(&active, kmin, s);
    let mut roots = Vec::new();
    let mut prev_s = s_lo;
    let mut prev_v = f(prev_s);
    for j in 1..points {
        let s = s_lo + step * j as f64;
        let v = f(s);
        if prev_v == 0.0 {
            roots.push(prev_s);
        } else if prev_v.signum() != v.signum() && v != 0.0 {
            let (mut lo, mut hi, mut flo) = (prev_s, s, prev_v);
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_s = s;
        prev_v = v;
    }
    roots
}

/// A few Newton steps on the exact exponential sum, guarded to stay inside
/// the bisection-sized neighborhood.
fn polish_root(map: &FiberMap, d: u32, s0: f64) -> f64 {
    let (f, df): (fn(&FiberMap, f64) -> f64, fn(&FiberMap, f64) -> f64) = match d {
        0 => (FiberMap::energy, FiberMap::d1),
        _ => (FiberMap::d1, FiberMap::d2),
    };
    let mut s = s0;
    for _ in 0..3 {
        let den = df(map, s);
        if den == 0.0 {
            break;
        }
        let step = f(map, s) / den;
        if !step.is_finite() || step.abs() > 1e-6 * (1.0 + s.abs()) {
            break;
        }
        s -= step;
    }
    s
}

/// The all-positive term sum a₁e^{2s}+a₂e^{2θs}+a₃e^{p₁s}+a₄e^{q₁s} that
/// scales the critical-point residual tolerance.
fn term_scale(map: &FiberMap, s: f64) -> f64 {
    map.terms()
        .iter()
        .map(|(c, k)| c.abs() * (k * s).exp())
        .sum()
}

/// Critical points of the fiber ordered by s, Morse-classified but not
/// validated against any expected pattern. [`fiber_structure`] layers the
/// regime checks on top; descent loops that only need the leading local
/// minimum use the raw list, because close to a discrete minimizer the
/// fiber maximum can sink below zero and the validated two-point shape
/// (which requires a positive barrier) legitimately disappears.
pub fn fiber_extrema(map: &FiberMap) -> Vec<FiberCritical> {
    scan_roots(map.terms(), 1)
        .into_iter()
        .map(|s| {
            let s = polish_root(map, 1, s);
            let energy = map.energy(s);
            let d2 = map.d2(s);
            FiberCritical {
                s,
                energy,
                d2,
                class: morse_class(d2, energy),
            }
        })
        .collect()
}

/// Critical points and zeros of the exponential sum in `map`, validated
/// against the expected structure (`two_point` = mixed-regime min/max pair,
/// otherwise unique maximum).
pub fn fiber_structure(
    map: &FiberMap,
    two_point: bool,
) -> Result<(Vec<FiberCritical>, Vec<f64>)> {
    let critical = fiber_extrema(map);
    let zeros: Vec<f64> = scan_roots(map.terms(), 0)
        .into_iter()
        .map(|s| polish_root(map, 0, s))
        .collect();
    let describe = || {
        format!(
            "found {} critical point(s) at s={:?} and {} zero(s) at s={:?}",
            critical.len(),
            critical.iter().map(|c| c.s).collect::<Vec<_>>(),
            zeros.len(),
            zeros
        )
    };
    if two_point {
        let ok = critical.len() == 2
            && zeros.len() == 2
            && critical[0].s < zeros[0]
            && zeros[0] < critical[1].s
            && critical[1].s < zeros[1]
            && critical[0].class == MorseClass::Pplus
            && critical[1].class == MorseClass::Pminus
            && critical[0].energy < 0.0
            && critical[1].energy > 0.0;
        if !ok {
            return Err(KcnError::StructureMismatch(format!(
                "expected the two-point fiber structure (local min at negative \
                 level, then global max at positive level, zeros interleaved); {}",
                describe()
            )));
        }
    } else {
        let ok = critical.len() == 1
            && zeros.len() == 1
            && critical[0].class == MorseClass::Pminus
            && critical[0].energy > 0.0
            && zeros[0] > critical[0].s;
        if !ok {
            return Err(KcnError::StructureMismatch(format!(
                "expected a unique fiber maximum at positive level followed by \
                 one zero; {}",
                describe()
            )));
        }
    }
    for c in &critical {
        let resid = map.d1(c.s).abs();
        let scale = term_scale(map, c.s);
        if resid > FIBER_RESIDUAL_TOL * scale {
            return Err(KcnError::StructureMismatch(format!(
                "critical point at s={} has residual {resid:e} above {FIBER_RESIDUAL_TOL:e}·scale ({scale:e})",
                c.s
            )));
        }
    }
    Ok((critical, zeros))
}

/// Zeros and extrema of the envelope g built from (params, C_p, C_q).
/// Bracketing + bisection to machine-level relative accuracy; the two-zero
/// structure is guaranteed for α < α₂ and its absence is an error.
pub fn g_profile(params: &ProblemParams, c_p: f64, c_q: f64) -> Result<EnvelopeReport> {
    let profile = ScalarProfile::envelope(params, c_p, c_q)?;
    let map = FiberMap::from_terms(profile.terms(params.theta));
    let (critical, zeros) = fiber_structure(&map, true).map_err(|e| {
        KcnError::ConditionFailed(format!(
            "envelope lacks the two-zero structure (guaranteed for α below the \
             second threshold): {e}"
        ))
    })?;
    Ok(EnvelopeReport {
        t0: zeros[0].exp(),
        t1: zeros[1].exp(),
        t_minus: critical[0].s.exp(),
        t_plus: critical[1].s.exp(),
    })
}

/// The critical-point structure of the dilation fiber through u. The
/// expected shape is decided by the regime (and α > 0): mixed regimes carry
/// the min/max pair, supercritical regimes and α = 0 a unique maximum.
pub fn fiber_critical_points(
    u: &RadialFunction,
    params: &ProblemParams,
    kernels: &Kernels,
) -> Result<FiberReport> {
    let regime = classify_regime(params)?;
    let two_point = regime.is_mixed() && params.alpha > 0.0;
    let map = fiber_map(u, params, kernels)?;
    let (critical, zeros) = fiber_structure(&map, two_point)?;
    Ok(FiberReport {
        regime,
        two_point,
        critical,
        zeros,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::compute_thresholds;
    use crate::radial::RadialGrid;
    use num::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::LazyLock;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn case1(alpha: f64) -> ProblemParams {
        ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 1.5, 3.0, alpha).unwrap()
    }

    fn case3(alpha: f64) -> ProblemParams {
        ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 3.0, 3.5, alpha).unwrap()
    }

    static K256: LazyLock<Kernels> = LazyLock::new(|| {
        let grid = RadialGrid::uniform(3, 256, 16.0).unwrap();
        Kernels::build(&grid, 2.0).unwrap()
    });

    fn random_mixture(kernels: &Kernels, rng: &mut ChaCha8Rng) -> RadialFunction {
        let parts: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.random_range(0.3..1.0), rng.random_range(0.5..2.0)))
            .collect();
        RadialFunction::from_fn(kernels.grid(), |r| {
            parts
                .iter()
                .map(|(c, w)| c * (-r * r / (2.0 * w * w)).exp())
                .sum()
        })
        .unwrap()
        .normalized(1.0)
        .unwrap()
    }

    #[test]
    fn condition_constant_collapses_to_kappa_base_exactly() {
        // With p₁ = 2pδ_p and q₁ = 2qδ_q, the constant
        // 2θ(2θ−q₁)(2θ−2)/(p₁(p₁−q₁)(p₁−2)) collapses (all factors of 2
        // cancel) to θ(θ−qδ_q)(θ−1)/(pδ_p(pδ_p−qδ_q)(pδ_p−1)) — verified in
        // exact rational arithmetic at the canonical exponents.
        let theta = ratio(2, 1);
        let qdq = ratio(1, 4); // qδ_q at (N,μ,q) = (3,2,3/2)
        let pdp = ratio(5, 2); // pδ_p at (N,μ,p) = (3,2,3)
        let two = ratio(2, 1);
        let one = ratio(1, 1);
        let q1 = two.clone() * qdq.clone();
        let p1 = two.clone() * pdp.clone();
        let tt = two.clone() * theta.clone();
        let lemma_form = tt.clone() * (tt.clone() - q1.clone()) * (tt.clone() - two.clone())
            / (p1.clone() * (p1.clone() - q1.clone()) * (p1.clone() - two));
        let kappa_base = theta.clone() * (theta.clone() - qdq.clone()) * (theta - one.clone())
            / (pdp.clone() * (pdp.clone() - qdq) * (pdp - one));
        assert_eq!(lemma_form, kappa_base);

        // and in floating point through the public entry points
        let params = case1(0.4);
        let profile = ScalarProfile::envelope(&params, 0.3, 1.1).unwrap();
        let t1 = t1_condition(&profile, params.theta);
        let x = 2.0 * (2.0 - 0.25) * 1.0 / (2.5 * (2.5 - 0.25) * 1.5);
        assert!((t1 - x).abs() <= 1e-15 * x);
    }

    #[test]
    fn condition_blows_up_as_a4_vanishes() {
        // a₄ appears only in denominators, so lhs → ∞ as a₄ → 0⁺.
        let mk = |a4: f64| {
            ScalarProfile::new(1.0, 0.5, 0.3, a4, 5.0, 0.5, ProfileRole::Fiber).unwrap()
        };
        let lhs = |a4: f64| two_extrema_condition(&mk(a4), 2.0).unwrap().1;
        let (l3, l6, l9) = (lhs(1e-3), lhs(1e-6), lhs(1e-9));
        assert!(l9 > l6 && l6 > l3, "{l9} vs {l6} vs {l3}");
        assert!((l6 / l3 - 1e3).abs() <= 1.0, "scaling {l6} / {l3}");
        assert!(two_extrema_condition(&mk(1e-6), 2.0).unwrap().0);
    }

    #[test]
    fn condition_requires_mixed_pattern() {
        // q1 ≥ 2
        let p = ScalarProfile::new(1.0, 0.5, 0.3, 0.1, 6.5, 5.0, ProfileRole::Fiber).unwrap();
        assert!(matches!(
            two_extrema_condition(&p, 2.0),
            Err(KcnError::ExponentPattern(_))
        ));
        // p1 ≤ 2θ
        let p = ScalarProfile::new(1.0, 0.5, 0.3, 0.1, 3.5, 0.5, ProfileRole::Fiber).unwrap();
        assert!(matches!(
            two_extrema_condition(&p, 2.0),
            Err(KcnError::ExponentPattern(_))
        ));
        // a4 = 0
        let p = ScalarProfile::new(1.0, 0.5, 0.3, 0.0, 5.0, 0.5, ProfileRole::Fiber).unwrap();
        assert!(matches!(
            two_extrema_condition(&p, 2.0),
            Err(KcnError::ExponentPattern(_))
        ));
    }

    #[test]
    fn satisfied_condition_yields_two_extrema_by_dense_sampling() {
        // brute-force oracle: when lhs > 1, h sampled on a 10⁵-point log
        // grid has exactly two sign changes of h' and h(min) < 0 < h(max).
        let profile =
            ScalarProfile::new(1.0, 0.5, 0.3, 0.05, 5.0, 0.5, ProfileRole::Fiber).unwrap();
        let theta = 2.0;
        let (holds, lhs) = two_extrema_condition(&profile, theta).unwrap();
        assert!(holds, "lhs = {lhs}");
        let n = 100_000;
        let (lo, hi) = (1e-6f64.ln(), 1e6f64.ln());
        let mut crossings = Vec::new();
        let mut prev = profile.d1((lo).exp(), theta);
        for j in 1..n {
            let t = (lo + (hi - lo) * j as f64 / (n - 1) as f64).exp();
            let v = profile.d1(t, theta);
            if prev.signum() != v.signum() {
                crossings.push(t);
            }
            prev = v;
        }
        assert_eq!(crossings.len(), 2, "crossings at {crossings:?}");
        let h_min = profile.eval(crossings[0], theta);
        let h_max = profile.eval(crossings[1], theta);
        assert!(h_min < 0.0 && h_max > 0.0, "h(min)={h_min}, h(max)={h_max}");
    }

    #[test]
    fn envelope_zeros_vanish_and_bound_positivity_window() {
        let (c_p, c_q) = (0.3, 1.1);
        let params = case1(1.0);
        let thresholds = compute_thresholds(&params, c_p, c_q, 1.0).unwrap();
        let alpha = 0.5 * thresholds.admissible_alpha();
        let params = params.with_alpha(alpha).unwrap();
        let rep = g_profile(&params, c_p, c_q).unwrap();
        assert!(
            rep.t_minus < rep.t0 && rep.t0 < rep.t_plus && rep.t_plus < rep.t1,
            "ordering {rep:?}"
        );
        let profile = ScalarProfile::envelope(&params, c_p, c_q).unwrap();
        let theta = params.theta;
        // zeros vanish relative to the term scale
        for t in [rep.t0, rep.t1] {
            let scale = profile.a1 * t * t
                + profile.a2 * t.powf(2.0 * theta)
                + profile.a3 * t.powf(profile.p1)
                + profile.a4 * t.powf(profile.q1);
            assert!(
                profile.eval(t, theta).abs() <= 1e-10 * scale,
                "g({t}) = {}",
                profile.eval(t, theta)
            );
        }
        // g > 0 exactly inside (t0, t1) on a dense grid over [0, 2t1]
        for j in 0..1000 {
            let t = 2.0 * rep.t1 * (j as f64 + 0.5) / 1000.0;
            let inside = t > rep.t0 && t < rep.t1;
            let v = profile.eval(t, theta);
            // skip the immediate vicinity of the zeros where signs are not
            // resolvable at this sampling density
            if (t - rep.t0).abs() < 1e-3 * rep.t0 || (t - rep.t1).abs() < 1e-3 * rep.t1 {
                continue;
            }
            assert!(
                (v > 0.0) == inside,
                "g({t}) = {v}, inside positivity window: {inside}"
            );
        }
    }

    #[test]
    fn envelope_first_zero_shrinks_with_alpha() {
        let (c_p, c_q) = (0.3, 1.1);
        let base = case1(1.0);
        let thresholds = compute_thresholds(&base, c_p, c_q, 1.0).unwrap();
        let m = thresholds.admissible_alpha();
        let t0s: Vec<f64> = [0.9, 0.5, 0.1, 0.01]
            .iter()
            .map(|f| {
                g_profile(&base.with_alpha(f * m).unwrap(), c_p, c_q)
                    .unwrap()
                    .t0
            })
            .collect();
        assert!(
            t0s.windows(2).all(|w| w[1] < w[0]),
            "t0 not decreasing along α ↓ 0: {t0s:?}"
        );
        assert!(t0s[3] < 0.1 * t0s[0], "t0 fails to collapse: {t0s:?}");
    }

    #[test]
    fn envelope_rejects_absent_structure() {
        // enormous α swamps the kinetic terms: no positivity window
        let params = case1(1e6);
        assert!(matches!(
            g_profile(&params, 0.3, 1.1),
            Err(KcnError::ConditionFailed(_))
        ));
    }

    #[test]
    fn mixed_fiber_has_interleaved_two_point_structure() {
        let params = case1(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..10 {
            let u = random_mixture(&K256, &mut rng);
            let rep = fiber_critical_points(&u, &params, &K256).unwrap();
            assert!(rep.two_point);
            let (s1, s3) = (rep.critical[0].s, rep.critical[1].s);
            let (z1, z2) = (rep.zeros[0], rep.zeros[1]);
            assert!(
                s1 < z1 && z1 < s3 && s3 < z2,
                "trial {trial}: ordering {s1} {z1} {s3} {z2}"
            );
            assert_eq!(rep.critical[0].class, MorseClass::Pplus);
            assert_eq!(rep.critical[1].class, MorseClass::Pminus);
            assert!(rep.critical[0].energy < 0.0 && rep.critical[1].energy > 0.0);
            assert!(rep.local_min().is_some());
            assert!((rep.maximizer().s - s3).abs() == 0.0);
        }
    }

    #[test]
    fn fiber_strictly_decreasing_past_maximizer() {
        let params = case1(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_mixture(&K256, &mut rng);
        let map = fiber_map(&u, &params, &K256).unwrap();
        let rep = fiber_critical_points(&u, &params, &K256).unwrap();
        let s3 = rep.maximizer().s;
        for j in 1..=50 {
            let s = s3 + 3.0 * j as f64 / 50.0;
            assert!(map.d1(s) < 0.0, "E' = {} at s = {s}", map.d1(s));
        }
    }

    #[test]
    fn fiber_minimizer_dilation_nearly_satisfies_pohozaev() {
        // resampling the profile at the fiber minimizer leaves only the
        // interpolation error in P.
        use crate::energy::pohozaev;
        let params = case1(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_mixture(&K256, &mut rng);
        let rep = fiber_critical_points(&u, &params, &K256).unwrap();
        let s1 = rep.local_min().unwrap().s;
        let moved = u.dilate(s1).unwrap();
        let p = pohozaev(&moved, &params, &K256).unwrap();
        let base = base_quantities(&moved, &params, &K256).unwrap();
        let scale = params.a * base.g
            + params.b * base.g_theta
            + params.alpha * base.dq
            + base.dp;
        assert!(p.abs() <= 1e-2 * scale, "P = {p}, scale = {scale}");
    }

    #[test]
    fn supercritical_fiber_has_unique_positive_maximum() {
        let params = case3(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let u = random_mixture(&K256, &mut rng);
            let rep = fiber_critical_points(&u, &params, &K256).unwrap();
            assert!(!rep.two_point, "trial {trial}");
            assert_eq!(rep.critical.len(), 1);
            assert_eq!(rep.critical[0].class, MorseClass::Pminus);
            assert!(rep.critical[0].energy > 0.0);
            assert_eq!(rep.zeros.len(), 1);
            assert!(rep.zeros[0] > rep.critical[0].s);
            assert!(rep.local_min().is_none());
        }
    }

    #[test]
    fn alpha_zero_fiber_collapses_to_single_maximum() {
        let params = case1(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_mixture(&K256, &mut rng);
        let rep = fiber_critical_points(&u, &params, &K256).unwrap();
        assert!(!rep.two_point);
        assert_eq!(rep.critical.len(), 1);
        assert_eq!(rep.critical[0].class, MorseClass::Pminus);
    }

    #[test]
    fn overwhelming_alpha_is_a_structure_mismatch() {
        let params = case1(1e6);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_mixture(&K256, &mut rng);
        assert!(matches!(
            fiber_critical_points(&u, &params, &K256),
            Err(KcnError::StructureMismatch(_))
        ));
    }

    #[test]
    fn critical_point_residuals_under_tolerance() {
        let params = case1(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = random_mixture(&K256, &mut rng);
        let map = fiber_map(&u, &params, &K256).unwrap();
        let rep = fiber_critical_points(&u, &params, &K256).unwrap();
        for c in &rep.critical {
            let scale: f64 = map
                .terms()
                .iter()
                .map(|(cf, k)| cf.abs() * (k * c.s).exp())
                .sum();
            assert!(map.d1(c.s).abs() <= FIBER_RESIDUAL_TOL * scale);
        }
    }
}
