//! Hardy weights built from a radial p-harmonic profile, their ground
//! states, and the two-supersolution interpolation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{abs_pow, p_laplacian_terms, Fn1, RadialFunction, ScalarMap};
use crate::defaults;
use crate::domain::{Classification, GreenProfile, Limit, ProblemParams, RadialDomain};
use crate::error::{Error, Result};

/// Which construction produced a weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    Case1,
    Case2 { gamma: f64 },
    Alpha { alpha: f64 },
    TwoEndsBounded { alpha: f64, m: f64, big_m: f64 },
    TwoEndsUnbounded { alpha: f64, m: f64 },
    Interpolated { alpha: f64, gamma: f64 },
    GroundStateQuotient { gamma: f64 },
    Supersolution { alpha: f64 },
    Scaled { factor: f64 },
}

/// What is known about the weight's optimality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimalityClaim {
    /// optimal Hardy weight, best constant 1
    Optimal,
    /// Hardy weight whose functional is subcritical
    Subcritical,
    /// nothing asserted
    Unknown,
}

/// Nonnegative radial weight.
#[derive(Clone)]
pub struct Weight {
    eval: Fn1,
    construction: Construction,
    params: ProblemParams,
    expected_lambda0: Option<f64>,
    claim: OptimalityClaim,
    singular_radii: Vec<f64>,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("construction", &self.construction)
            .field("expected_lambda0", &self.expected_lambda0)
            .field("claim", &self.claim)
            .finish()
    }
}

/// JSON-facing summary of a weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightDescriptor {
    pub construction: Construction,
    pub params: ProblemParams,
    pub expected_lambda0: Option<f64>,
    pub claim: OptimalityClaim,
}

impl Weight {
    pub fn new(
        eval: Fn1,
        construction: Construction,
        params: ProblemParams,
        expected_lambda0: Option<f64>,
        claim: OptimalityClaim,
    ) -> Self {
        Weight { eval, construction, params, expected_lambda0, claim, singular_radii: Vec::new() }
    }

    pub fn with_singular_radii(mut self, radii: Vec<f64>) -> Self {
        self.singular_radii = radii;
        self
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    pub fn as_fn(&self) -> Fn1 {
        self.eval.clone()
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn expected_lambda0(&self) -> Option<f64> {
        self.expected_lambda0
    }

    pub fn claim(&self) -> OptimalityClaim {
        self.claim
    }

    /// Interior radii where a factor `|·|^{p-2}` has a zero base.
    pub fn singular_radii(&self) -> &[f64] {
        &self.singular_radii
    }

    /// `c W`; the best constant scales by `1/c`.
    pub fn scaled(&self, c: f64) -> Weight {
        let f = self.eval.clone();
        Weight {
            eval: Arc::new(move |r| c * f(r)),
            construction: Construction::Scaled { factor: c },
            params: self.params.clone(),
            expected_lambda0: self.expected_lambda0.map(|l| l / c),
            claim: self.claim,
            singular_radii: self.singular_radii.clone(),
        }
    }

    pub fn descriptor(&self) -> WeightDescriptor {
        WeightDescriptor {
            construction: self.construction,
            params: self.params.clone(),
            expected_lambda0: self.expected_lambda0,
            claim: self.claim,
        }
    }
}

/// Positive solution of the equation the weight is built for.
#[derive(Clone, Debug)]
pub struct GroundState {
    func: RadialFunction,
    construction: Construction,
    limits: Option<(Limit, Limit)>,
}

impl GroundState {
    pub fn new(func: RadialFunction, construction: Construction, limits: Option<(Limit, Limit)>) -> Self {
        GroundState { func, construction, limits }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.func.value(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.func.derivative(r)
    }

    pub fn function(&self) -> &RadialFunction {
        &self.func
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// Limits at the (inner, outer) ends, when known.
    pub fn limits(&self) -> Option<(Limit, Limit)> {
        self.limits
    }
}

/// Radial potential `V(r)`.
#[derive(Clone)]
pub struct PotentialProfile {
    eval: Fn1,
    zero: bool,
}

impl fmt::Debug for PotentialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PotentialProfile {{ zero: {} }}", self.zero)
    }
}

impl PotentialProfile {
    pub fn new(eval: Fn1) -> Self {
        PotentialProfile { eval, zero: false }
    }

    pub fn zero() -> Self {
        PotentialProfile { eval: Arc::new(|_| 0.0), zero: true }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.zero {
            0.0
        } else {
            (self.eval)(r)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `V = Δ_p v / v^{p-1}`, the potential for which `v` is a solution.
    pub fn annihilating(v: &RadialFunction, params: &ProblemParams) -> Result<Self> {
        if !v.has_second_derivative() {
            return Err(Error::MissingSecondDerivative);
        }
        let (v, params) = (v.clone(), params.clone());
        Ok(PotentialProfile::new(Arc::new(move |r| {
            let lap = crate::calculus::p_laplacian_at(&v, &params, r).expect("checked");
            lap / v.value(r).powf(params.p - 1.0)
        })))
    }
}

/// Strong-form residual of `-Δ_p v + (V - W) v^{p-1}` at `r`, with the sum
/// of term magnitudes for relative comparison.
pub fn ground_state_residual(
    v: &GroundState,
    w: &Weight,
    potential: &PotentialProfile,
    params: &ProblemParams,
    r: f64,
) -> Result<(f64, f64)> {
    let (lap, scale) = p_laplacian_terms(v.function(), params, r)?;
    let vp = v.eval(r).powf(params.p - 1.0);
    let pot = potential.eval(r) * vp;
    let wt = w.eval(r) * vp;
    Ok((lap + pot - wt, scale + pot.abs() + wt.abs()))
}

/// `α^{p-1}(1-α)`, the coefficient maximized by the optimal exponent.
pub fn alpha_coefficient(p: f64, alpha: f64) -> f64 {
    alpha.powf(p - 1.0) * (1.0 - alpha)
}

/// `(p-1)/p`
pub fn optimal_alpha(p: f64) -> f64 {
    (p - 1.0) / p
}

fn check_nonvanishing(domain: &RadialDomain, f: impl Fn(f64) -> f64) -> Result<()> {
    for r in domain.sample_radii(defaults::DERIVATIVE_SAMPLES, 12.0) {
        let d = f(r);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::VanishingDerivative { r });
        }
    }
    Ok(())
}

fn check_profile_derivative(g: &GreenProfile) -> Result<()> {
    check_nonvanishing(&g.domain(), |r| g.derivative(r))
}

fn radius_if_inside(g: &GreenProfile, level: f64) -> Vec<f64> {
    g.radius_at_level(level).map(|r| vec![r]).unwrap_or_default()
}

fn gamma_matches(given: f64, actual: f64) -> bool {
    (given - actual).abs() <= 1e-12 * actual.abs().max(1.0)
}

/// `W = ((p-1)/p)^p |G'/G|^p` with ground state `G^{(p-1)/p}`.
pub fn hardy_weight_case1(g: &GreenProfile) -> Result<(Weight, GroundState)> {
    match g.classification() {
        Classification::InfiniteInner | Classification::InfiniteOuter => {}
        other => {
            return Err(Error::WrongClassification { expected: "InfiniteInner or InfiniteOuter".into(), found: other.name() })
        }
    }
    check_profile_derivative(g)?;
    let params = g.params().clone();
    let (p, cp) = (params.p, params.hardy_constant());
    let gw = g.clone();
    let w = Weight::new(
        Arc::new(move |r| cp * abs_pow(gw.derivative(r) / gw.value(r), p)),
        Construction::Case1,
        params.clone(),
        Some(1.0),
        OptimalityClaim::Optimal,
    );
    let beta = params.beta();
    let lim = |l: Limit| match l {
        Limit::Finite(x) => Limit::Finite(x.powf(beta)),
        Limit::Infinite => Limit::Infinite,
    };
    let v = GroundState::new(
        g.as_radial().compose(&ScalarMap::power(beta)),
        Construction::Case1,
        Some((lim(g.inner_limit()), lim(g.outer_limit()))),
    );
    Ok((w, v))
}

fn require_gamma_pos(g: &GreenProfile, gamma: f64) -> Result<()> {
    let params = g.params();
    if params.p <= params.dim() {
        return Err(Error::InvalidParams(format!(
            "this construction needs p > n, got p = {}, n = {}",
            params.p, params.n
        )));
    }
    match g.classification() {
        Classification::FiniteInner { gamma: actual } => {
            if !gamma_matches(gamma, actual) {
                return Err(Error::GammaMismatch { given: gamma, actual });
            }
            Ok(())
        }
        other => Err(Error::WrongClassification { expected: "FiniteInner".into(), found: other.name() }),
    }
}

// Two-ends weight for m < G < M with exponent α, shared by Case2 and GroundStateQuotient.
fn bounded_two_ends_eval(g: &GreenProfile, m: f64, big_m: f64, alpha: f64) -> Fn1 {
    let p = g.params().p;
    let g = g.clone();
    Arc::new(move |r| {
        let x = g.value(r);
        let v1 = (x - m) * (big_m - x);
        let ratio = g.derivative(r) / v1;
        let bracket = 2.0 * (2.0 * alpha - 1.0) * v1 + (1.0 - alpha) * (big_m - m) * (big_m - m);
        (p - 1.0) * alpha.powf(p - 1.0) * abs_pow(ratio, p) * abs_pow(m + big_m - 2.0 * x, p - 2.0) * bracket
    })
}

fn bounded_ground_state(g: &GreenProfile, m: f64, big_m: f64, alpha: f64, c: Construction) -> GroundState {
    GroundState::new(
        g.as_radial().compose(&ScalarMap::two_ends_power(m, big_m, alpha)),
        c,
        Some((Limit::Finite(0.0), Limit::Finite(0.0))),
    )
}

/// Weight for `G → γ > 0` at the origin and `G → 0` at the outer end, with
/// ground state `[G(γ-G)]^{(p-1)/p}`.
pub fn hardy_weight_case2(g: &GreenProfile, gamma: f64) -> Result<(Weight, GroundState)> {
    require_gamma_pos(g, gamma)?;
    check_profile_derivative(g)?;
    let params = g.params().clone();
    let beta = params.beta();
    let c = Construction::Case2 { gamma };
    let w = Weight::new(bounded_two_ends_eval(g, 0.0, gamma, beta), c, params, Some(1.0), OptimalityClaim::Optimal)
        .with_singular_radii(radius_if_inside(g, gamma / 2.0));
    Ok((w, bounded_ground_state(g, 0.0, gamma, beta, c)))
}

/// Same weight as [`hardy_weight_case2`], tagged as the quotient
/// `-Δ_p(ψ(G)) / ψ(G)^{p-1}` with `ψ(s) = [s(γ-s)]^{(p-1)/p}`.
pub fn ground_state_quotient_weight(g: &GreenProfile, gamma: f64) -> Result<(Weight, GroundState)> {
    let (w, v) = hardy_weight_case2(g, gamma)?;
    let c = Construction::GroundStateQuotient { gamma };
    let w = Weight { construction: c, ..w };
    let v = GroundState { construction: c, ..v };
    Ok((w, v))
}

/// `W_α = α^{p-1}(1-α)(p-1)|G'/G|^p` with ground state `G^α`.
pub fn hardy_weight_alpha(g: &GreenProfile, alpha: f64) -> Result<(Weight, GroundState)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    check_profile_derivative(g)?;
    let params = g.params().clone();
    let p = params.p;
    let coef = alpha_coefficient(p, alpha) * (p - 1.0);
    let gw = g.clone();
    let c = Construction::Alpha { alpha };
    let w = Weight::new(
        Arc::new(move |r| coef * abs_pow(gw.derivative(r) / gw.value(r), p)),
        c,
        params.clone(),
        Some(params.hardy_constant() / coef),
        if (alpha - optimal_alpha(p)).abs() < 1e-12 { OptimalityClaim::Optimal } else { OptimalityClaim::Unknown },
    );
    let lim = |l: Limit| match l {
        Limit::Finite(x) => Limit::Finite(x.powf(alpha)),
        Limit::Infinite => Limit::Infinite,
    };
    let v = GroundState::new(
        g.as_radial().compose(&ScalarMap::power(alpha)),
        c,
        Some((lim(g.inner_limit()), lim(g.outer_limit()))),
    );
    Ok((w, v))
}

/// Weights for a profile with distinct end limits `m < M`.
///
/// Bounded `M`: ground state `[(G-m)(M-G)]^α`, with `α ∈ [1/2, 1]` when
/// `m > 0` and `α ∈ [0, 1]` when `m = 0`. Unbounded `M`: ground state
/// `(G-m)^α` and weight `α^{p-1}(1-α)(p-1)|G'/(G-m)|^p`.
pub fn hardy_weight_two_ends(g: &GreenProfile, m: f64, big_m: Limit, alpha: f64) -> Result<(Weight, GroundState)> {
    let (inf, sup) = g.range();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    let limits_ok = close(inf, m)
        && match (big_m, sup) {
            (Limit::Infinite, Limit::Infinite) => true,
            (Limit::Finite(a), Limit::Finite(b)) => close(a, b),
            _ => false,
        };
    if !limits_ok {
        return Err(Error::EndLimitMismatch(format!(
            "profile ranges over ({inf}, {sup}) but m = {m}, M = {big_m} were given"
        )));
    }
    check_profile_derivative(g)?;
    let params = g.params().clone();
    let p = params.p;
    let beta = optimal_alpha(p);
    let is_opt = (alpha - beta).abs() < 1e-12;
    match big_m {
        Limit::Finite(big_m) => {
            let ok = if m > 0.0 { (0.5..=1.0).contains(&alpha) } else { (0.0..=1.0).contains(&alpha) };
            if !ok {
                let range = if m > 0.0 { "[1/2, 1] since m > 0" } else { "[0, 1]" };
                return Err(Error::AlphaOutOfRange(format!(
                    "with both end limits finite, alpha must lie in {range}; got {alpha}"
                )));
            }
            let c = Construction::TwoEndsBounded { alpha, m, big_m };
            let w = Weight::new(
                bounded_two_ends_eval(g, m, big_m, alpha),
                c,
                params,
                if is_opt { Some(1.0) } else { None },
                if is_opt { OptimalityClaim::Optimal } else { OptimalityClaim::Unknown },
            )
            .with_singular_radii(radius_if_inside(g, 0.5 * (m + big_m)));
            Ok((w, bounded_ground_state(g, m, big_m, alpha, c)))
        }
        Limit::Infinite => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::AlphaOutOfRange(format!("alpha must lie in (0, 1), got {alpha}")));
            }
            let coef = alpha_coefficient(p, alpha) * (p - 1.0);
            let gw = g.clone();
            let c = Construction::TwoEndsUnbounded { alpha, m };
            let w = Weight::new(
                Arc::new(move |r| coef * abs_pow(gw.derivative(r) / (gw.value(r) - m), p)),
                c,
                params.clone(),
                Some(params.hardy_constant() / coef),
                if is_opt { OptimalityClaim::Optimal } else { OptimalityClaim::Unknown },
            );
            let v = GroundState::new(
                g.as_radial().compose(&ScalarMap::shifted_power(m, alpha)),
                c,
                Some(if g.is_increasing() {
                    (Limit::Finite(0.0), Limit::Infinite)
                } else {
                    (Limit::Infinite, Limit::Finite(0.0))
                }),
            );
            Ok((w, v))
        }
    }
}

/// Interpolated weight from the two p-harmonic functions `G` and `γ - G`:
/// ground state `G^{1-α}(γ-G)^α` and
/// `W_α = α(1-α)(p-1) γ² |(1-α)γ - G|^{p-2} |G'|^p / |G(γ-G)|^p`.
///
/// The functional with this weight is subcritical, so the weight is not
/// optimal.
pub fn interpolated_weight(g: &GreenProfile, gamma: f64, alpha: f64) -> Result<(Weight, GroundState)> {
    require_gamma_pos(g, gamma)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let params = g.params().clone();
    let p = params.p;
    let gw = g.clone();
    let coef = alpha * (1.0 - alpha) * (p - 1.0) * gamma * gamma;
    let c = Construction::Interpolated { alpha, gamma };
    let w = Weight::new(
        Arc::new(move |r| {
            if coef == 0.0 {
                return 0.0;
            }
            let x = gw.value(r);
            coef * abs_pow((1.0 - alpha) * gamma - x, p - 2.0) * abs_pow(gw.derivative(r) / (x * (gamma - x)), p)
        }),
        c,
        params,
        None,
        OptimalityClaim::Subcritical,
    )
    .with_singular_radii(radius_if_inside(g, (1.0 - alpha) * gamma));
    let inner = if alpha == 0.0 { Limit::Finite(gamma) } else { Limit::Finite(0.0) };
    let v = GroundState::new(
        g.as_radial().compose(&ScalarMap::interpolated(gamma, alpha)),
        c,
        Some((inner, Limit::Finite(0.0))),
    );
    Ok((w, v))
}

/// Interpolates two radial supersolutions `v0`, `v1` of
/// `-Δ_p v + V_j v^{p-1} = 0`:
///
/// `v_α = v1^α v0^{1-α}`,
/// `V_α = ((1-α)V0|(log v0)'|^{2-p} + αV1|(log v1)'|^{2-p}) |(log v_α)'|^{p-2}`,
/// `W_α = α(1-α)(p-1) |(log(v0/v1))'|^2 |(log v_α)'|^{p-2}`.
///
/// Nonvanishing of `v_j'` (where `V_j ≠ 0`) and of `v_α'` is checked on
/// radii sampled over `domain`; this stands in for a global hypothesis.
pub fn supersolution_construct_radial(
    v0: &RadialFunction,
    pot0: &PotentialProfile,
    v1: &RadialFunction,
    pot1: &PotentialProfile,
    alpha: f64,
    params: &ProblemParams,
    domain: &RadialDomain,
) -> Result<(GroundState, PotentialProfile, Weight)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !v0.has_second_derivative() || !v1.has_second_derivative() {
        return Err(Error::MissingSecondDerivative);
    }
    let c = Construction::Supersolution { alpha };
    let p = params.p;
    if alpha == 0.0 || alpha == 1.0 {
        let (v, pot) = if alpha == 0.0 { (v0, pot0) } else { (v1, pot1) };
        let w = Weight::new(Arc::new(|_| 0.0), c, params.clone(), None, OptimalityClaim::Unknown);
        return Ok((GroundState::new(v.clone(), c, None), pot.clone(), w));
    }
    if !pot0.is_zero() {
        check_nonvanishing(domain, |r| v0.derivative(r))?;
    }
    if !pot1.is_zero() {
        check_nonvanishing(domain, |r| v1.derivative(r))?;
    }
    let ell = {
        let (v0, v1) = (v0.clone(), v1.clone());
        move |r: f64| alpha * v1.derivative(r) / v1.value(r) + (1.0 - alpha) * v0.derivative(r) / v0.value(r)
    };
    check_nonvanishing(domain, &ell)?;

    let va = {
        let (a0, a1) = (v0.clone(), v1.clone());
        let (b0, b1, b2) = (v0.clone(), v1.clone(), ell.clone());
        let (c0, c1, c2) = (v0.clone(), v1.clone(), ell.clone());
        let val = move |x0: &RadialFunction, x1: &RadialFunction, r: f64| {
            x1.value(r).powf(alpha) * x0.value(r).powf(1.0 - alpha)
        };
        RadialFunction::new(
            Arc::new(move |r| val(&a0, &a1, r)),
            Arc::new(move |r| val(&b0, &b1, r) * b2(r)),
            Some(Arc::new(move |r| {
                let l = c2(r);
                let log2 = |f: &RadialFunction| {
                    let (u, du) = (f.value(r), f.derivative(r));
                    f.second_derivative(r).expect("checked") / u - (du / u) * (du / u)
                };
                let dl = alpha * log2(&c1) + (1.0 - alpha) * log2(&c0);
                val(&c0, &c1, r) * (l * l + dl)
            })),
        )
    };

    let potential = if pot0.is_zero() && pot1.is_zero() {
        PotentialProfile::zero()
    } else {
        let (v0, v1, pot0, pot1, ell) = (v0.clone(), v1.clone(), pot0.clone(), pot1.clone(), ell.clone());
        PotentialProfile::new(Arc::new(move |r| {
            let mut s = 0.0;
            if !pot0.is_zero() {
                s += (1.0 - alpha) * pot0.eval(r) * abs_pow(v0.derivative(r) / v0.value(r), 2.0 - p);
            }
            if !pot1.is_zero() {
                s += alpha * pot1.eval(r) * abs_pow(v1.derivative(r) / v1.value(r), 2.0 - p);
            }
            s * abs_pow(ell(r), p - 2.0)
        }))
    };

    let weight = {
        let (v0, v1) = (v0.clone(), v1.clone());
        Weight::new(
            Arc::new(move |r| {
                let q = v0.derivative(r) / v0.value(r) - v1.derivative(r) / v1.value(r);
                alpha * (1.0 - alpha) * (p - 1.0) * q * q * abs_pow(ell(r), p - 2.0)
            }),
            c,
            params.clone(),
            None,
            OptimalityClaim::Unknown,
        )
    };
    Ok((GroundState::new(va, c, None), potential, weight))
}

/// `±((1-α)|V0|^{1/(p-1)} + α|V1|^{1/(p-1)})^{p-1}`, minus when both
/// potentials are `≤ 0` (needs `p ≥ 2`), plus when both are `≥ 0` (needs
/// `p ≤ 2`). Signs are checked on radii sampled over `domain`.
pub fn convex_combination_potential(
    pot0: &PotentialProfile,
    pot1: &PotentialProfile,
    alpha: f64,
    params: &ProblemParams,
    domain: &RadialDomain,
) -> Result<PotentialProfile> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let p = params.p;
    let radii = domain.sample_radii(defaults::DERIVATIVE_SAMPLES, 12.0);
    let all = |pred: &dyn Fn(f64) -> bool| radii.iter().all(|&r| pred(pot0.eval(r)) && pred(pot1.eval(r)));
    let sign = if p >= 2.0 && all(&|x| x <= 0.0) {
        -1.0
    } else if p <= 2.0 && all(&|x| x >= 0.0) {
        1.0
    } else {
        let want_nonpos = p >= 2.0;
        let bad = radii
            .iter()
            .copied()
            .find(|&r| {
                let ok = |x: f64| if want_nonpos { x <= 0.0 } else { x >= 0.0 };
                !(ok(pot0.eval(r)) && ok(pot1.eval(r)))
            })
            .unwrap_or(f64::NAN);
        let reason = if want_nonpos {
            "for p >= 2 both potentials must be nonpositive"
        } else {
            "for p < 2 both potentials must be nonnegative"
        };
        return Err(Error::SignConditionViolated { r: bad, reason: reason.into() });
    };
    if pot0.is_zero() && pot1.is_zero() {
        return Ok(PotentialProfile::zero());
    }
    let (pot0, pot1) = (pot0.clone(), pot1.clone());
    let e = 1.0 / (p - 1.0);
    Ok(PotentialProfile::new(Arc::new(move |r| {
        let s = (1.0 - alpha) * pot0.eval(r).abs().powf(e) + alpha * pot1.eval(r).abs().powf(e);
        sign * s.powf(p - 1.0)
    })))
}

/// Hessian of `(ξ, η) ↦ ξ^{p-1} η^{2-p}`.
pub fn interpolation_hessian(p: f64, xi: f64, eta: f64) -> [[f64; 2]; 2] {
    let f = xi.powf(p - 1.0) * eta.powf(2.0 - p);
    let k = (p - 1.0) * (p - 2.0) * f;
    [[k / (xi * xi), -k / (xi * eta)], [-k / (xi * eta), k / (eta * eta)]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{chain_rule_plap, p_laplacian_radial};
    use crate::domain::green_radial;

    fn prm(p: f64, n: u32) -> ProblemParams {
        ProblemParams::new(p, n).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn classical_hardy_weight() {
        let g = green_radial(&prm(2.0, 3), &RadialDomain::PuncturedSpace).unwrap();
        let (w, v) = hardy_weight_case1(&g).unwrap();
        for r in [0.1, 1.0, 3.0] {
            assert!(rel(w.eval(r), 0.25 / (r * r)) < 1e-14);
            assert!(rel(v.eval(r), r.powf(-0.5)) < 1e-14);
        }
        assert_eq!(w.expected_lambda0(), Some(1.0));
    }

    #[test]
    fn supercritical_power_weight() {
        let g = green_radial(&prm(4.0, 2), &RadialDomain::PuncturedSpace).unwrap();
        let (w, _) = hardy_weight_case1(&g).unwrap();
        assert!(rel(w.eval(2.0), 0.5f64.powi(4) / 16.0) < 1e-14);
    }

    #[test]
    fn case1_is_scale_invariant() {
        let g = green_radial(&prm(3.0, 5), &RadialDomain::PuncturedSpace).unwrap();
        let h = g.scaled(7.5).unwrap();
        let (a, _) = hardy_weight_case1(&g).unwrap();
        let (b, _) = hardy_weight_case1(&h).unwrap();
        assert!(rel(a.eval(0.7), b.eval(0.7)) < 1e-14);
    }

    #[test]
    fn case1_rejects_other_classes() {
        let g = green_radial(&prm(3.0, 2), &RadialDomain::PuncturedBall { radius: 1.0 }).unwrap();
        assert!(matches!(hardy_weight_case1(&g), Err(Error::WrongClassification { .. })));
    }

    #[test]
    fn case2_zero_and_maximum() {
        let g = green_radial(&prm(3.0, 2), &RadialDomain::PuncturedBall { radius: 1.0 }).unwrap();
        let (w, v) = hardy_weight_case2(&g, 1.0).unwrap();
        assert!(w.eval(0.25).abs() < 1e-12);
        assert!(rel(v.eval(0.25), 0.25f64.powf(2.0 / 3.0)) < 1e-14);
        assert!(v.eval(0.2) < v.eval(0.25) && v.eval(0.3) < v.eval(0.25));
        assert!(matches!(hardy_weight_case2(&g, 2.0), Err(Error::GammaMismatch { .. })));
        let e = ground_state_quotient_weight(&g, 1.0).unwrap().0;
        for r in [0.01, 0.2, 0.6, 0.95] {
            assert!(rel(e.eval(r), w.eval(r)) < 1e-12);
        }
    }

    #[test]
    fn case2_reduces_at_p2() {
        // p = 2 < n is not admissible for case 2, so compare the shared
        // bounded two-ends formula on an annulus instead
        let params = prm(2.0, 3);
        let g = GreenProfile::from_form(
            crate::domain::ProfileForm::Power { a: -1.0 },
            1.0,
            params,
            RadialDomain::Annulus { inner: 1.0, outer: 2.0 },
        )
        .unwrap();
        let (w, _) = hardy_weight_two_ends(&g, 0.5, Limit::Finite(1.0), 0.5).unwrap();
        for r in [1.1, 1.5, 1.9] {
            let x = 1.0 / r;
            let dx = -1.0 / (r * r);
            let d = dx / (x - 0.5) + dx / (1.0 - x);
            assert!(rel(w.eval(r), 0.25 * d * d) < 1e-12);
        }
    }

    #[test]
    fn two_ends_alpha_rules() {
        let params = prm(3.0, 3);
        let g = GreenProfile::from_form(
            crate::domain::ProfileForm::Power { a: -1.0 },
            1.0,
            prm(2.0, 3),
            RadialDomain::Annulus { inner: 1.0, outer: 2.0 },
        )
        .unwrap();
        assert!(matches!(hardy_weight_two_ends(&g, 0.5, Limit::Finite(1.0), 0.3), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(hardy_weight_two_ends(&g, 0.4, Limit::Finite(1.0), 0.5), Err(Error::EndLimitMismatch(_))));
        let ann = green_radial(&params, &RadialDomain::Annulus { inner: 1.0, outer: 2.0 }).unwrap();
        assert!(hardy_weight_two_ends(&ann, 0.0, Limit::Finite(1.0), 0.2).is_ok());
    }

    #[test]
    fn two_ends_with_zero_lower_limit_matches_case2() {
        let g = green_radial(&prm(3.0, 2), &RadialDomain::PuncturedBall { radius: 1.0 }).unwrap();
        let (a, _) = hardy_weight_case2(&g, 1.0).unwrap();
        let (b, _) = hardy_weight_two_ends(&g, 0.0, Limit::Finite(1.0), 2.0 / 3.0).unwrap();
        for r in [0.01, 0.3, 0.8] {
            assert!(rel(a.eval(r), b.eval(r)) < 1e-13);
        }
    }

    #[test]
    fn alpha_weight_properties() {
        let g = green_radial(&prm(2.0, 3), &RadialDomain::PuncturedSpace).unwrap();
        let (w, _) = hardy_weight_alpha(&g, 0.5).unwrap();
        assert!(rel(w.eval(2.0), 0.25 / 4.0) < 1e-14);
        assert!(hardy_weight_alpha(&g, 1.0).is_err());
        let coarse = (0..=10000).map(|i| i as f64 / 10000.0);
        for p in [1.5, 2.0, 3.0, 4.5] {
            let best = coarse.clone().fold((0.0, -1.0), |acc, a| {
                let c = alpha_coefficient(p, a);
                if c > acc.1 {
                    (a, c)
                } else {
                    acc
                }
            });
            assert!((best.0 - optimal_alpha(p)).abs() < 2e-4);
        }
    }

    #[test]
    fn ground_states_solve_their_equations() {
        let cases: Vec<(Weight, GroundState, ProblemParams, RadialDomain)> = {
            let mut v = Vec::new();
            for (p, n) in [(2.0, 3), (3.0, 5), (4.0, 2), (1.5, 3)] {
                let params = prm(p, n);
                let g = green_radial(&params, &RadialDomain::PuncturedSpace).unwrap();
                let (w, gs) = hardy_weight_case1(&g).unwrap();
                v.push((w, gs, params, RadialDomain::PuncturedSpace));
            }
            let params = prm(3.0, 2);
            let dom = RadialDomain::PuncturedBall { radius: 1.0 };
            let g = green_radial(&params, &dom).unwrap();
            let (w, gs) = hardy_weight_case2(&g, 1.0).unwrap();
            v.push((w, gs, params.clone(), dom));
            let (w, gs) = interpolated_weight(&g, 1.0, 0.3).unwrap();
            v.push((w, gs, params, dom));
            let params = prm(3.0, 3);
            let dom = RadialDomain::Annulus { inner: 1.0, outer: 4.0 };
            let g = green_radial(&params, &dom).unwrap();
            let (w, gs) = hardy_weight_two_ends(&g, 0.0, Limit::Finite(1.0), 2.0 / 3.0).unwrap();
            v.push((w, gs, params, dom));
            v
        };
        for (w, gs, params, dom) in cases {
            for r in dom.sample_radii(200, 10.0) {
                let (res, scale) = ground_state_residual(&gs, &w, &PotentialProfile::zero(), &params, r).unwrap();
                assert!(res.abs() <= 1e-6 * scale, "{:?} r={r} res={res} scale={scale}", w.construction());
            }
        }
    }

    #[test]
    fn chain_rule_reproduces_alpha_weight() {
        for (p, n) in [(2.0, 3), (3.0, 2), (1.7, 4)] {
            let params = prm(p, n);
            let g = green_radial(&params, &RadialDomain::PuncturedSpace).unwrap();
            let alpha = 0.35;
            let (w, v) = hardy_weight_alpha(&g, alpha).unwrap();
            let lhs = chain_rule_plap(&ScalarMap::power(alpha), &g.as_radial(), &params, &g.domain()).unwrap();
            for r in [0.05, 1.0, 20.0] {
                assert!(rel(lhs.eval(r), w.eval(r) * v.eval(r).powf(p - 1.0)) < 1e-10);
            }
        }
    }

    #[test]
    fn supersolution_pair_matches_alpha_weight() {
        for (p, n) in [(2.0, 3), (3.0, 5), (1.5, 2)] {
            let params = prm(p, n);
            let a = (p - n as f64) / (p - 1.0);
            let alpha = 0.4;
            let (_, pot, w) = supersolution_construct_radial(
                &RadialFunction::power(a),
                &PotentialProfile::zero(),
                &RadialFunction::constant(1.0),
                &PotentialProfile::zero(),
                alpha,
                &params,
                &RadialDomain::PuncturedSpace,
            )
            .unwrap();
            assert!(pot.is_zero());
            for r in [0.3, 2.0] {
                let expected = alpha * (1.0 - alpha).powf(p - 1.0) * (p - 1.0) * (a / r).abs().powf(p);
                assert!(rel(w.eval(r), expected) < 1e-12);
            }
        }
    }

    #[test]
    fn supersolution_optimized_alpha_gives_hardy_weight() {
        let params = prm(3.0, 5);
        let g = green_radial(&params, &RadialDomain::PuncturedSpace).unwrap();
        let beta = optimal_alpha(3.0);
        let (_, _, w) = supersolution_construct_radial(
            &RadialFunction::constant(1.0),
            &PotentialProfile::zero(),
            &g.as_radial(),
            &PotentialProfile::zero(),
            beta,
            &params,
            &RadialDomain::PuncturedSpace,
        )
        .unwrap();
        let (h, _) = hardy_weight_case1(&g).unwrap();
        for r in [0.2, 3.0] {
            assert!(rel(w.eval(r), h.eval(r)) < 1e-12);
        }
    }

    #[test]
    fn supersolution_degenerate_alpha() {
        let params = prm(2.0, 3);
        let v0 = RadialFunction::power(-1.0);
        let pot = PotentialProfile::new(Arc::new(|r| -1.0 / r));
        let (v, p0, w) = supersolution_construct_radial(
            &v0,
            &pot,
            &RadialFunction::constant(1.0),
            &PotentialProfile::zero(),
            0.0,
            &params,
            &RadialDomain::PuncturedSpace,
        )
        .unwrap();
        assert_eq!(v.eval(2.0), 0.5);
        assert_eq!(p0.eval(2.0), -0.5);
        assert_eq!(w.eval(2.0), 0.0);
    }

    #[test]
    fn supersolution_rejects_vanishing_derivative() {
        let params = prm(2.0, 3);
        let pot = PotentialProfile::new(Arc::new(|_| -1.0));
        let res = supersolution_construct_radial(
            &RadialFunction::constant(2.0),
            &pot,
            &RadialFunction::power(1.0),
            &PotentialProfile::zero(),
            0.5,
            &params,
            &RadialDomain::Annulus { inner: 0.5, outer: 1.5 },
        );
        assert!(matches!(res, Err(Error::VanishingDerivative { .. })));
    }

    #[test]
    fn convex_combination_examples() {
        let params = prm(3.0, 3);
        let dom = RadialDomain::PuncturedSpace;
        let v = PotentialProfile::new(Arc::new(|r| -1.0 / (r * r)));
        let c = convex_combination_potential(&v, &v, 0.3, &params, &dom).unwrap();
        assert!(rel(c.eval(2.0), -0.25) < 1e-14);
        let w = PotentialProfile::new(Arc::new(|r| -2.0 / r));
        let c1 = convex_combination_potential(&v, &w, 1.0, &params, &dom).unwrap();
        assert!(rel(c1.eval(3.0), -2.0 / 3.0) < 1e-14);
        let c2 = convex_combination_potential(&v, &w, 0.25, &prm(2.0, 3), &dom).unwrap();
        assert!(rel(c2.eval(2.0), 0.75 * -0.25 - 0.25) < 1e-14);
        let pos = PotentialProfile::new(Arc::new(|_| 1.0));
        assert!(matches!(
            convex_combination_potential(&pos, &v, 0.5, &params, &dom),
            Err(Error::SignConditionViolated { .. })
        ));
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let f = |p: f64, x: f64, y: f64| x.powf(p - 1.0) * y.powf(2.0 - p);
        let (p, x, y, h) = (2.7, 1.3, 0.6, 1e-4);
        let hs = interpolation_hessian(p, x, y);
        let fxx = (f(p, x + h, y) - 2.0 * f(p, x, y) + f(p, x - h, y)) / (h * h);
        let fxy = (f(p, x + h, y + h) - f(p, x + h, y - h) - f(p, x - h, y + h) + f(p, x - h, y - h)) / (4.0 * h * h);
        let fyy = (f(p, x, y + h) - 2.0 * f(p, x, y) + f(p, x, y - h)) / (h * h);
        assert!(rel(hs[0][0], fxx) < 1e-5);
        assert!(rel(hs[0][1], fxy) < 1e-5);
        assert!(rel(hs[1][1], fyy) < 1e-5);
    }

    #[test]
    fn interpolated_weight_examples() {
        let params = prm(3.0, 2);
        let g = green_radial(&params, &RadialDomain::PuncturedBall { radius: 1.0 }).unwrap();
        let (w0, v0) = interpolated_weight(&g, 1.0, 0.0).unwrap();
        assert_eq!(w0.eval(0.3), 0.0);
        assert!(rel(v0.eval(0.3), g.value(0.3)) < 1e-14);
        let (w, _) = interpolated_weight(&g, 1.0, 0.5).unwrap();
        assert!(w.eval(0.25).abs() < 1e-14);
        assert_eq!(w.claim(), OptimalityClaim::Subcritical);
        // defining property through the p-Laplacian
        let (w, v) = interpolated_weight(&g, 1.0, 0.3).unwrap();
        let lap = p_laplacian_radial(v.function(), &params).unwrap();
        for r in [0.05, 0.5, 0.9] {
            assert!(rel(lap.eval(r), w.eval(r) * v.eval(r).powf(2.0)) < 1e-9);
        }
    }
}
