//! Radial p-Laplacian, its chain rule, level-set flux and coarea identities.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{GreenProfile, Limit, ProblemParams, RadialDomain};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, adaptive_piecewise, AdaptiveOptions};

/// Shared scalar function of one real variable.
pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `|x|^e` with `|x|^0 = 1` everywhere, including `x = 0`.
pub fn abs_pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == e.trunc() && e.abs() <= 16.0 {
        x.abs().powi(e as i32)
    } else {
        x.abs().powf(e)
    }
}

/// Radial function with its first and optionally second derivative.
#[derive(Clone)]
pub struct RadialFunction {
    value: Fn1,
    derivative: Fn1,
    second: Option<Fn1>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialFunction {{ second: {} }}", self.second.is_some())
    }
}

impl RadialFunction {
    pub fn new(value: Fn1, derivative: Fn1, second: Option<Fn1>) -> Self {
        RadialFunction { value, derivative, second }
    }

    /// `r^a`, all derivatives exact.
    pub fn power(a: f64) -> Self {
        RadialFunction::new(
            Arc::new(move |r: f64| r.powf(a)),
            Arc::new(move |r: f64| a * r.powf(a - 1.0)),
            Some(Arc::new(move |r: f64| a * (a - 1.0) * r.powf(a - 2.0))),
        )
    }

    pub fn constant(c: f64) -> Self {
        RadialFunction::new(Arc::new(move |_| c), Arc::new(|_| 0.0), Some(Arc::new(|_| 0.0)))
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        (self.derivative)(r)
    }

    pub fn second_derivative(&self, r: f64) -> Option<f64> {
        self.second.as_ref().map(|s| s(r))
    }

    pub fn has_second_derivative(&self) -> bool {
        self.second.is_some()
    }

    /// `f ∘ u` with the chain rule applied to both derivatives.
    pub fn compose(&self, f: &ScalarMap) -> RadialFunction {
        let (u0, u1, u2) = (self.value.clone(), self.derivative.clone(), self.second.clone());
        let (f0, f1, f2) = (f.f.clone(), f.df.clone(), f.d2f.clone());
        let v = {
            let (u0, f0) = (u0.clone(), f0);
            Arc::new(move |r: f64| f0(u0(r))) as Fn1
        };
        let d = {
            let (u0, u1, f1) = (u0.clone(), u1.clone(), f1.clone());
            Arc::new(move |r: f64| f1(u0(r)) * u1(r)) as Fn1
        };
        let s = u2.map(|u2| {
            Arc::new(move |r: f64| {
                let x = u0(r);
                let du = u1(r);
                f2(x) * du * du + f1(x) * u2(r)
            }) as Fn1
        });
        RadialFunction::new(v, d, s)
    }

    /// Pointwise product.
    pub fn product(&self, other: &RadialFunction) -> RadialFunction {
        let (a0, a1, a2) = (self.value.clone(), self.derivative.clone(), self.second.clone());
        let (b0, b1, b2) = (other.value.clone(), other.derivative.clone(), other.second.clone());
        let v = {
            let (a0, b0) = (a0.clone(), b0.clone());
            Arc::new(move |r: f64| a0(r) * b0(r)) as Fn1
        };
        let d = {
            let (a0, a1, b0, b1) = (a0.clone(), a1.clone(), b0.clone(), b1.clone());
            Arc::new(move |r: f64| a1(r) * b0(r) + a0(r) * b1(r)) as Fn1
        };
        let s = match (a2, b2) {
            (Some(a2), Some(b2)) => Some(Arc::new(move |r: f64| {
                a2(r) * b0(r) + 2.0 * a1(r) * b1(r) + a0(r) * b2(r)
            }) as Fn1),
            _ => None,
        };
        RadialFunction::new(v, d, s)
    }
}

/// C² scalar map `s ↦ f(s)` with its derivatives.
#[derive(Clone)]
pub struct ScalarMap {
    pub f: Fn1,
    pub df: Fn1,
    pub d2f: Fn1,
}

impl ScalarMap {
    pub fn new(f: Fn1, df: Fn1, d2f: Fn1) -> Self {
        ScalarMap { f, df, d2f }
    }

    pub fn identity() -> Self {
        ScalarMap::new(Arc::new(|s| s), Arc::new(|_| 1.0), Arc::new(|_| 0.0))
    }

    /// `s^α`
    pub fn power(alpha: f64) -> Self {
        ScalarMap::new(
            Arc::new(move |s: f64| s.powf(alpha)),
            Arc::new(move |s: f64| alpha * s.powf(alpha - 1.0)),
            Arc::new(move |s: f64| alpha * (alpha - 1.0) * s.powf(alpha - 2.0)),
        )
    }

    /// `[(s - m)(M - s)]^α`
    pub fn two_ends_power(m: f64, big_m: f64, alpha: f64) -> Self {
        let q = move |s: f64| (s - m) * (big_m - s);
        ScalarMap::new(
            Arc::new(move |s: f64| q(s).powf(alpha)),
            Arc::new(move |s: f64| alpha * q(s).powf(alpha - 1.0) * (m + big_m - 2.0 * s)),
            Arc::new(move |s: f64| {
                let x = q(s);
                let l = m + big_m - 2.0 * s;
                alpha * (alpha - 1.0) * x.powf(alpha - 2.0) * l * l - 2.0 * alpha * x.powf(alpha - 1.0)
            }),
        )
    }

    /// `(s - m)^α`
    pub fn shifted_power(m: f64, alpha: f64) -> Self {
        ScalarMap::new(
            Arc::new(move |s: f64| (s - m).powf(alpha)),
            Arc::new(move |s: f64| alpha * (s - m).powf(alpha - 1.0)),
            Arc::new(move |s: f64| alpha * (alpha - 1.0) * (s - m).powf(alpha - 2.0)),
        )
    }

    /// `s^{1-α} (γ - s)^α`
    pub fn interpolated(gamma: f64, alpha: f64) -> Self {
        let b = 1.0 - alpha;
        ScalarMap::new(
            Arc::new(move |s: f64| s.powf(b) * (gamma - s).powf(alpha)),
            Arc::new(move |s: f64| {
                let v = s.powf(b) * (gamma - s).powf(alpha);
                v * (b / s - alpha / (gamma - s))
            }),
            Arc::new(move |s: f64| {
                let v = s.powf(b) * (gamma - s).powf(alpha);
                let l = b / s - alpha / (gamma - s);
                let dl = -b / (s * s) - alpha / ((gamma - s) * (gamma - s));
                v * (l * l + dl)
            }),
        )
    }
}

/// Value-only radial field, the output of differential operators.
#[derive(Clone)]
pub struct RadialField(Fn1);

impl RadialField {
    pub fn new(f: Fn1) -> Self {
        RadialField(f)
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.0)(r)
    }

    pub fn as_fn(&self) -> Fn1 {
        self.0.clone()
    }
}

impl fmt::Debug for RadialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialField")
    }
}

/// `Δ_p u` at `r` for a radial `u`:
/// `|u'|^{p-2} [(p-1) u'' + ((n-1)/r + σ'/σ) u']`.
pub fn p_laplacian_at(u: &RadialFunction, params: &ProblemParams, r: f64) -> Result<f64> {
    let d1 = u.derivative(r);
    let d2 = u.second_derivative(r).ok_or(Error::MissingSecondDerivative)?;
    let drift = (params.dim() - 1.0) / r + params.sigma.log_derivative(r);
    Ok(abs_pow(d1, params.p - 2.0) * ((params.p - 1.0) * d2 + drift * d1))
}

/// `(-Δ_p u(r), scale)` where `scale` is the sum of the magnitudes of the
/// two terms, used for relative residuals.
pub fn p_laplacian_terms(u: &RadialFunction, params: &ProblemParams, r: f64) -> Result<(f64, f64)> {
    let d1 = u.derivative(r);
    let d2 = u.second_derivative(r).ok_or(Error::MissingSecondDerivative)?;
    let drift = (params.dim() - 1.0) / r + params.sigma.log_derivative(r);
    let g = abs_pow(d1, params.p - 2.0);
    let a = g * (params.p - 1.0) * d2;
    let b = g * drift * d1;
    Ok((-(a + b), a.abs() + b.abs()))
}

/// `-Δ_p u` as a radial field.
pub fn p_laplacian_radial(u: &RadialFunction, params: &ProblemParams) -> Result<RadialField> {
    if !u.has_second_derivative() {
        return Err(Error::MissingSecondDerivative);
    }
    let u = u.clone();
    let params = params.clone();
    Ok(RadialField::new(Arc::new(move |r| {
        -p_laplacian_at(&u, &params, r).expect("second derivative present")
    })))
}

/// `-Δ_p(f(u))` from the chain rule
/// `-|f'(u)|^{p-2} [(p-1) f''(u) |u'|^p + f'(u) Δ_p u]`.
///
/// `f'` must not vanish on the range of `u`; this is checked on radii
/// sampled over `domain`.
pub fn chain_rule_plap(
    f: &ScalarMap,
    u: &RadialFunction,
    params: &ProblemParams,
    domain: &RadialDomain,
) -> Result<RadialField> {
    if !u.has_second_derivative() {
        return Err(Error::MissingSecondDerivative);
    }
    for r in domain.sample_radii(crate::defaults::DERIVATIVE_SAMPLES, 12.0) {
        let s = u.value(r);
        let d = (f.df)(s);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::DerivativeVanishes { s });
        }
    }
    let (f, u, params) = (f.clone(), u.clone(), params.clone());
    Ok(RadialField::new(Arc::new(move |r| {
        let s = u.value(r);
        let (d1, d2) = ((f.df)(s), (f.d2f)(s));
        let du = u.derivative(r);
        let lap = p_laplacian_at(&u, &params, r).expect("second derivative present");
        -abs_pow(d1, params.p - 2.0) * ((params.p - 1.0) * d2 * abs_pow(du, params.p) + d1 * lap)
    })))
}

/// Flux `ω r_t^{n-1} σ(r_t) |G'(r_t)|^{p-1}` through the level sphere
/// `{G = t}`.
pub fn flux(g: &GreenProfile, t: f64) -> Result<f64> {
    let r = g.radius_at_level(t)?;
    let params = g.params();
    let d = g.derivative(r);
    if d == 0.0 {
        return Err(Error::VanishingDerivative { r });
    }
    Ok(params.measure(r) * abs_pow(d, params.p - 1.0))
}

/// Flux at `count` levels spread over the range of `G`.
pub fn flux_sweep(g: &GreenProfile, count: usize) -> Result<Vec<(f64, f64)>> {
    g.sample_levels(count).into_iter().map(|t| Ok((t, flux(g, t)?))).collect()
}

/// Relative standard deviation of a list of fluxes.
pub fn relative_deviation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}

/// The two coarea constants of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoareaConstants {
    /// flux constant, multiplies `∫ g(t) dt`
    pub c_tilde: f64,
    /// `((p-1)/p)^{p-1} c_tilde`, multiplies `∫ f(τ) dτ/τ`
    pub c: f64,
}

pub fn coarea_constants(g: &GreenProfile) -> Result<CoareaConstants> {
    let levels = g.sample_levels(3);
    let c_tilde = flux(g, levels[1])?;
    let beta = g.params().beta();
    Ok(CoareaConstants { c_tilde, c: beta.powf(g.params().p - 1.0) * c_tilde })
}

/// Level-space integrand with a declared support `[lo, hi]`.
#[derive(Clone)]
pub struct LevelIntegrand {
    pub f: Fn1,
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Debug for LevelIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevelIntegrand [{}, {}]", self.lo, self.hi)
    }
}

impl LevelIntegrand {
    pub fn new(f: Fn1, lo: f64, hi: f64) -> Self {
        LevelIntegrand { f, lo, hi }
    }

    /// Indicator of `(lo, hi)`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        LevelIntegrand::new(Arc::new(|_| 1.0), lo, hi)
    }

    /// Smooth bump `(x-lo)^2 (hi-x)^2` on `[lo, hi]`, times `1 + k x`.
    pub fn bump(lo: f64, hi: f64, k: f64) -> Self {
        LevelIntegrand::new(
            Arc::new(move |x: f64| {
                if x <= lo || x >= hi {
                    0.0
                } else {
                    let q = (x - lo) * (hi - x);
                    q * q * (1.0 + k * x)
                }
            }),
            lo,
            hi,
        )
    }
}

/// Both sides of the two coarea identities for one integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoareaReport {
    pub constants: CoareaConstants,
    /// `∫ f(v) |∇v|^p dν` with `v = G^{(p-1)/p}`
    pub ground_lhs: f64,
    /// `c ∫ f(τ) dτ / τ`
    pub ground_rhs: f64,
    /// `∫ f(G) |∇G|^p dν`
    pub green_lhs: f64,
    /// `c̃ ∫ f(t) dt`
    pub green_rhs: f64,
}

impl CoareaReport {
    pub fn ground_relative_error(&self) -> f64 {
        rel(self.ground_lhs, self.ground_rhs)
    }

    pub fn green_relative_error(&self) -> f64 {
        rel(self.green_lhs, self.green_rhs)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn check_support(lo: f64, hi: f64, inf: f64, sup: Limit) -> Result<()> {
    let sup_f = sup.finite().unwrap_or(f64::INFINITY);
    if lo > inf && hi < sup_f && lo < hi {
        Ok(())
    } else {
        Err(Error::SupportNotCompact { lo, hi, inf, sup: sup_f })
    }
}

/// Integrates `h(r)` over the radii where `G` lies between levels `t0` and
/// `t1`, adaptively in the domain coordinate.
pub(crate) fn integrate_level_band<F: Fn(f64) -> f64>(
    g: &GreenProfile,
    t0: f64,
    t1: f64,
    pieces: usize,
    opts: AdaptiveOptions,
    h: F,
) -> Result<f64> {
    let coord = g.domain().coordinate();
    let (ra, rb) = (g.radius_at_level(t0)?, g.radius_at_level(t1)?);
    let (sa, sb) = {
        let (x, y) = (coord.to_s(ra), coord.to_s(rb));
        if x < y {
            (x, y)
        } else {
            (y, x)
        }
    };
    let breaks: Vec<f64> = (0..=pieces).map(|i| sa + (sb - sa) * i as f64 / pieces as f64).collect();
    let value = adaptive_piecewise(&breaks, opts, |s| {
        let r = coord.to_r(s);
        h(r) * coord.jacobian(s)
    });
    if !value.is_finite() {
        return Err(Error::NonFiniteIntegrand { r: ra });
    }
    Ok(value)
}

/// Evaluates both sides of the coarea identities for `f`.
///
/// The support `[f.lo, f.hi]` must lie inside the open ranges of both `G`
/// and `v = G^{(p-1)/p}`, otherwise [`Error::SupportNotCompact`].
pub fn coarea_reduce(f: &LevelIntegrand, g: &GreenProfile) -> Result<CoareaReport> {
    let params = g.params().clone();
    let p = params.p;
    let beta = params.beta();
    let (inf, sup) = g.range();
    check_support(f.lo, f.hi, inf, sup)?;
    let v_sup = match sup {
        Limit::Finite(x) => Limit::Finite(x.powf(beta)),
        Limit::Infinite => Limit::Infinite,
    };
    check_support(f.lo, f.hi, inf.powf(beta), v_sup)?;
    let constants = coarea_constants(g)?;
    let opts = AdaptiveOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_panels: 4000 };

    let green_lhs = integrate_level_band(g, f.lo, f.hi, 16, opts, |r| {
        (f.f)(g.value(r)) * abs_pow(g.derivative(r), p) * params.measure(r)
    })?;
    let green_rhs = constants.c_tilde * adaptive(f.lo, f.hi, opts, |t| (f.f)(t));

    let (tl, th) = (f.lo.powf(1.0 / beta), f.hi.powf(1.0 / beta));
    let ground_lhs = integrate_level_band(g, tl, th, 16, opts, |r| {
        let gv = g.value(r);
        let v = gv.powf(beta);
        let dv = beta * gv.powf(beta - 1.0) * g.derivative(r);
        (f.f)(v) * abs_pow(dv, p) * params.measure(r)
    })?;
    let ground_rhs = constants.c * adaptive(f.lo.ln(), f.hi.ln(), opts, |y| (f.f)(y.exp()));

    Ok(CoareaReport { constants, ground_lhs, ground_rhs, green_lhs, green_rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::green_radial;
    use std::f64::consts::PI;

    fn params(p: f64, n: u32) -> ProblemParams {
        ProblemParams::new(p, n).unwrap()
    }

    #[test]
    fn laplacian_of_square() {
        let u = RadialFunction::power(2.0);
        let l = p_laplacian_radial(&u, &params(2.0, 3)).unwrap();
        for r in [0.3, 1.0, 4.0] {
            assert!((l.eval(r) + 6.0).abs() < 1e-13);
        }
    }

    #[test]
    fn power_profile_is_p_harmonic() {
        for (p, n) in [(2.0, 3), (3.0, 5), (4.0, 2), (1.5, 4)] {
            let a = (p - n as f64) / (p - 1.0);
            let l = p_laplacian_radial(&RadialFunction::power(a), &params(p, n)).unwrap();
            for r in [0.01, 1.0, 50.0] {
                let scale = RadialFunction::power(a).derivative(r).abs().powf(p - 1.0) / r;
                assert!(l.eval(r).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn missing_second_derivative() {
        let u = RadialFunction::new(Arc::new(|r| r), Arc::new(|_| 1.0), None);
        assert_eq!(p_laplacian_radial(&u, &params(2.0, 3)).unwrap_err(), Error::MissingSecondDerivative);
    }

    #[test]
    fn chain_rule_identity_map() {
        let prm = params(3.0, 2);
        let u = RadialFunction::power(1.5);
        let a = chain_rule_plap(&ScalarMap::identity(), &u, &prm, &RadialDomain::PuncturedSpace).unwrap();
        let b = p_laplacian_radial(&u, &prm).unwrap();
        for r in [0.2, 3.0] {
            assert!((a.eval(r) - b.eval(r)).abs() < 1e-12 * b.eval(r).abs());
        }
    }

    #[test]
    fn chain_rule_rejects_critical_map() {
        let prm = params(2.0, 3);
        let u = RadialFunction::power(-1.0);
        // f' = 0 for s > 1
        let f = ScalarMap::new(
            Arc::new(|s: f64| s.min(1.0)),
            Arc::new(|s: f64| if s < 1.0 { 1.0 } else { 0.0 }),
            Arc::new(|_| 0.0),
        );
        assert!(matches!(
            chain_rule_plap(&f, &u, &prm, &RadialDomain::PuncturedSpace),
            Err(Error::DerivativeVanishes { .. })
        ));
    }

    #[test]
    fn flux_examples() {
        let g = green_radial(&params(2.0, 3), &RadialDomain::PuncturedSpace).unwrap();
        for t in [1e-3, 0.5, 7.0] {
            assert!((flux(&g, t).unwrap() - 4.0 * PI).abs() < 1e-12);
        }
        let g = green_radial(&params(3.0, 3), &RadialDomain::PuncturedBall { radius: 2.0 }).unwrap();
        assert!((flux(&g, 1.3).unwrap() - 4.0 * PI).abs() < 1e-11);
        let (p, n) = (1.5, 4);
        let g = green_radial(&params(p, n), &RadialDomain::PuncturedSpace).unwrap();
        let expected = crate::domain::sphere_area(n) * ((n as f64 - p) / (p - 1.0)).powf(p - 1.0);
        assert!((flux(&g, 2.0).unwrap() - expected).abs() < 1e-11 * expected);
        assert!(matches!(flux(&g, -1.0), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn classical_coarea_constants() {
        let g = green_radial(&params(2.0, 3), &RadialDomain::PuncturedSpace).unwrap();
        let c = coarea_constants(&g).unwrap();
        assert!((c.c_tilde - 4.0 * PI).abs() < 1e-10);
        assert!((c.c - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn coarea_indicator_and_zero() {
        let g = green_radial(&params(2.0, 3), &RadialDomain::PuncturedSpace).unwrap();
        let rep = coarea_reduce(&LevelIntegrand::indicator(0.5, 2.0), &g).unwrap();
        assert!((rep.green_rhs - 4.0 * PI * 1.5).abs() < 1e-9);
        assert!(rep.green_relative_error() < 1e-6);
        assert!(rep.ground_relative_error() < 1e-6);
        let zero = LevelIntegrand::new(Arc::new(|_| 0.0), 0.5, 2.0);
        let rep = coarea_reduce(&zero, &g).unwrap();
        assert_eq!((rep.green_lhs, rep.green_rhs, rep.ground_lhs, rep.ground_rhs), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn coarea_support_must_be_inside() {
        let g = green_radial(&params(3.0, 2), &RadialDomain::PuncturedBall { radius: 1.0 }).unwrap();
        assert!(matches!(
            coarea_reduce(&LevelIntegrand::indicator(0.5, 1.5), &g),
            Err(Error::SupportNotCompact { .. })
        ));
        assert!(matches!(
            coarea_reduce(&LevelIntegrand::indicator(0.0, 0.5), &g),
            Err(Error::SupportNotCompact { .. })
        ));
    }

    #[test]
    fn compose_and_product_match_finite_differences() {
        let u = RadialFunction::power(-0.7);
        let f = ScalarMap::power(1.3);
        let c = u.compose(&f).product(&RadialFunction::power(0.4));
        let h = 1e-5;
        for r in [0.5, 2.0] {
            let fd1 = (c.value(r + h) - c.value(r - h)) / (2.0 * h);
            let fd2 = (c.derivative(r + h) - c.derivative(r - h)) / (2.0 * h);
            assert!((fd1 - c.derivative(r)).abs() < 1e-8 * (1.0 + fd1.abs()));
            assert!((fd2 - c.second_derivative(r).unwrap()).abs() < 1e-7 * (1.0 + fd2.abs()));
        }
    }
}
