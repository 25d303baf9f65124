//! Second-order Rellich-type inequalities `∫ A |Δφ|^p dν ≥ C ∫ B |φ|^p dν`
//! for radial weights built from positive (super)harmonic functions, and a
//! checker over closed-form bump families.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{abs_pow, Fn1, RadialFunction, ScalarMap};
use crate::defaults;
use crate::domain::{ProblemParams, RadialDomain};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::quadrature::{adaptive_piecewise, AdaptiveOptions};

/// Weights and constant of one inequality: `lhs_weight` multiplies
/// `|Δφ|^p`, `rhs_weight` multiplies `|φ|^p`.
#[derive(Clone)]
pub struct RellichTriple {
    pub lhs_weight: Fn1,
    pub rhs_weight: Fn1,
    pub constant: f64,
    pub p: f64,
}

impl fmt::Debug for RellichTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RellichTriple").field("constant", &self.constant).field("p", &self.p).finish()
    }
}

impl RellichTriple {
    /// Equivalent inequality with `lhs·κ^{p-1}`, `rhs/κ` and `C·κ^p`.
    pub fn normalized(&self, kappa: f64) -> RellichTriple {
        let (l, r) = (self.lhs_weight.clone(), self.rhs_weight.clone());
        let lk = kappa.powf(self.p - 1.0);
        RellichTriple {
            lhs_weight: Arc::new(move |x| lk * l(x)),
            rhs_weight: Arc::new(move |x| r(x) / kappa),
            constant: self.constant * kappa.powf(self.p),
            p: self.p,
        }
    }
}

/// `((p-1)δ + 1)^p / p^{2p}`.
pub fn davies_hinz_constant(p: f64, delta: f64) -> f64 {
    ((p - 1.0) * delta + 1.0).powf(p) / p.powf(2.0 * p)
}

/// `4^p (1-α)^p (p-1+α)^p / p^{2p}`.
pub fn rellich_constant(p: f64, alpha: f64) -> f64 {
    (4.0 * (1.0 - alpha) * (p - 1.0 + alpha)).powf(p) / p.powf(2.0 * p)
}

// (-Δu, |u''| + |drift·u'|)
fn laplacian_terms(u: &RadialFunction, params: &ProblemParams, r: f64) -> Result<(f64, f64)> {
    let d1 = u.derivative(r);
    let d2 = u.second_derivative(r).ok_or(Error::MissingSecondDerivative)?;
    let drift = (params.dim() - 1.0) / r + params.sigma.log_derivative(r);
    Ok((-(d2 + drift * d1), d2.abs() + (drift * d1).abs()))
}

/// `Δu` for a radial `u` with a second derivative.
pub fn laplacian(u: &RadialFunction, params: &ProblemParams, r: f64) -> Result<f64> {
    Ok(-laplacian_terms(u, params, r)?.0)
}

const SIGN_TOL: f64 = 1e-10;
const SOLUTION_TOL: f64 = 1e-8;
const SAMPLE_SPAN: f64 = 20.0;

fn sample(domain: &RadialDomain) -> Vec<f64> {
    domain.sample_radii(defaults::DERIVATIVE_SAMPLES, SAMPLE_SPAN)
}

// strict: -Δu > tol·scale; otherwise -Δu ≥ -tol·scale
fn check_superharmonic(u: &RadialFunction, params: &ProblemParams, domain: &RadialDomain, strict: bool, what: &str) -> Result<()> {
    for r in sample(domain) {
        let (minus_lap, scale) = laplacian_terms(u, params, r)?;
        let ok = if strict { minus_lap > SIGN_TOL * scale } else { minus_lap >= -SIGN_TOL * scale };
        if !ok || !minus_lap.is_finite() {
            let rel = if strict { "> 0" } else { ">= 0" };
            return Err(Error::SuperharmonicityFails {
                r,
                reason: format!("-Δ({what}) = {minus_lap:e}, required {rel}"),
            });
        }
    }
    Ok(())
}

fn check_solution(u: &RadialFunction, params: &ProblemParams, domain: &RadialDomain, what: &str) -> Result<()> {
    for r in sample(domain) {
        let (minus_lap, scale) = laplacian_terms(u, params, r)?;
        if !(minus_lap.abs() <= SOLUTION_TOL * scale) || u.value(r) <= 0.0 {
            return Err(Error::SuperharmonicityFails {
                r,
                reason: format!("{what} is not a positive harmonic function: -Δ({what}) = {minus_lap:e}"),
            });
        }
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Weights `v^p/|Δv|^{p-1}` and `|Δv|` for `v` with `-Δv > 0` and
/// `-Δ(v^δ) ≥ 0`, `δ > 1`, both checked on sampled radii.
pub fn davies_hinz_weights(v: &RadialFunction, delta: f64, params: &ProblemParams, domain: &RadialDomain) -> Result<RellichTriple> {
    params.validate()?;
    if !(delta > 1.0 && delta.is_finite()) {
        return Err(Error::InvalidParams(format!("delta must exceed 1, got {delta}")));
    }
    if !v.has_second_derivative() {
        return Err(Error::MissingSecondDerivative);
    }
    check_superharmonic(v, params, domain, true, "v")?;
    check_superharmonic(&v.compose(&ScalarMap::power(delta)), params, domain, false, "v^delta")?;
    let p = params.p;
    let (va, vb) = (v.clone(), v.clone());
    let (pa, pb) = (params.clone(), params.clone());
    Ok(RellichTriple {
        lhs_weight: Arc::new(move |r| {
            let lap = laplacian(&va, &pa, r).expect("second derivative present");
            abs_pow(va.value(r), p) / abs_pow(lap, p - 1.0)
        }),
        rhs_weight: Arc::new(move |r| laplacian(&vb, &pb, r).expect("second derivative present").abs()),
        constant: davies_hinz_constant(p, delta),
        p,
    })
}

/// Weights `v0^α/W^{p-1}` and `W v0^α` with `W = |∇ log v0|²/4`, for a
/// positive `v0` with `-Δv0 ≥ 0` and `α ∈ (0, 1)`.
pub fn rellich_weights(v0: &RadialFunction, alpha: f64, params: &ProblemParams, domain: &RadialDomain) -> Result<RellichTriple> {
    params.validate()?;
    check_alpha(alpha)?;
    if !v0.has_second_derivative() {
        return Err(Error::MissingSecondDerivative);
    }
    check_superharmonic(v0, params, domain, false, "v0")?;
    let p = params.p;
    let weight = {
        let v0 = v0.clone();
        move |r: f64| 0.25 * (v0.derivative(r) / v0.value(r)).powi(2)
    };
    let wl = weight.clone();
    let (va, vb) = (v0.clone(), v0.clone());
    Ok(RellichTriple {
        lhs_weight: Arc::new(move |r| va.value(r).powf(alpha) / abs_pow(wl(r), p - 1.0)),
        rhs_weight: Arc::new(move |r| weight(r) * vb.value(r).powf(alpha)),
        constant: rellich_constant(p, alpha),
        p,
    })
}

/// Ground-state-transformed weights for two positive harmonic functions:
/// `q^α v1^{2-p}/W^{p-1}` and `W q^α v1^{2-p}` with `q = v0/v1` and
/// `W = |∇ log q|²/4`.
pub fn rellich_gst_weights(
    v0: &RadialFunction,
    v1: &RadialFunction,
    alpha: f64,
    params: &ProblemParams,
    domain: &RadialDomain,
) -> Result<RellichTriple> {
    params.validate()?;
    check_alpha(alpha)?;
    if !(v0.has_second_derivative() && v1.has_second_derivative()) {
        return Err(Error::MissingSecondDerivative);
    }
    check_solution(v0, params, domain, "v0")?;
    check_solution(v1, params, domain, "v1")?;
    let p = params.p;
    let parts = {
        let (v0, v1) = (v0.clone(), v1.clone());
        move |r: f64| {
            let (a, b) = (v0.value(r), v1.value(r));
            let log_slope = v0.derivative(r) / a - v1.derivative(r) / b;
            let w = 0.25 * log_slope * log_slope;
            let common = (a / b).powf(alpha) * b.powf(2.0 - p);
            (w, common)
        }
    };
    let pl = parts.clone();
    Ok(RellichTriple {
        lhs_weight: Arc::new(move |r| {
            let (w, c) = pl(r);
            c / abs_pow(w, p - 1.0)
        }),
        rhs_weight: Arc::new(move |r| {
            let (w, c) = parts(r);
            w * c
        }),
        constant: rellich_constant(p, alpha),
        p,
    })
}

/// `φ(r) = r^k exp(-(ln r - c)²/(2 w²))`, smooth and rapidly decaying in
/// `ln r` at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGaussianBump {
    pub power: f64,
    pub center: f64,
    pub width: f64,
}

impl LogGaussianBump {
    pub fn new(power: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && power.is_finite() && center.is_finite()) {
            return Err(Error::InvalidTestFunction(format!(
                "bump needs finite parameters and positive width, got ({power}, {center}, {width})"
            )));
        }
        Ok(LogGaussianBump { power, center, width })
    }

    /// Family of `count` bumps with parameters drawn from one seeded stream.
    pub fn random_family(count: usize, seed: u64) -> Vec<LogGaussianBump> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| LogGaussianBump {
                power: rng.gen_range(-2.0..2.0),
                center: rng.gen_range(-3.0..3.0),
                width: rng.gen_range(0.3..2.0),
            })
            .collect()
    }

    // exponent F(s) and its first two s-derivatives
    fn exponent(&self, s: f64) -> (f64, f64, f64) {
        let d = s - self.center;
        let w2 = self.width * self.width;
        (self.power * s - d * d / (2.0 * w2), self.power - d / w2, -1.0 / w2)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.exponent(r.ln()).0.exp()
    }

    /// `Δφ = e^F r^{-2} [F_s² + F_ss + (n-2 + r σ'/σ) F_s]` with `s = ln r`.
    pub fn laplacian(&self, params: &ProblemParams, r: f64) -> f64 {
        let (f, fs, fss) = self.exponent(r.ln());
        let drift = params.dim() - 2.0 + r * params.sigma.log_derivative(r);
        f.exp() / (r * r) * (fs * fs + fss + drift * fs)
    }

    // ln r range outside which the bump is below e^{-50} of its peak
    fn span(&self) -> (f64, f64) {
        let half = 10.0 * self.width;
        let peak = self.center + self.power * self.width * self.width;
        (peak - half, peak + half)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RellichCheck {
    pub constant: f64,
    pub min_ratio: f64,
    pub argmin: usize,
    pub ratios: Vec<f64>,
}

/// Ratio `∫ lhs |Δφ|^p dν / ∫ rhs |φ|^p dν` for one bump.
pub fn rellich_ratio(triple: &RellichTriple, bump: &LogGaussianBump, params: &ProblemParams) -> Result<f64> {
    let p = params.p;
    let (a, b) = bump.span();
    let pieces = 40;
    let breaks: Vec<f64> = (0..=pieces).map(|k| a + (b - a) * k as f64 / pieces as f64).collect();
    let opts = AdaptiveOptions { abs_tol: 0.0, rel_tol: 1e-10, max_panels: 4000 };
    // dr = r ds
    let num = adaptive_piecewise(&breaks, opts, |s| {
        let r = s.exp();
        (triple.lhs_weight)(r) * abs_pow(bump.laplacian(params, r), p) * params.measure(r) * r
    });
    let den = adaptive_piecewise(&breaks, opts, |s| {
        let r = s.exp();
        (triple.rhs_weight)(r) * abs_pow(bump.value(r), p) * params.measure(r) * r
    });
    if !(num.is_finite() && den.is_finite()) {
        return Err(Error::NonFiniteIntegrand { r: bump.center.exp() });
    }
    if den <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// Smallest ratio over the family; the inequality holds on the family when
/// it is at least the triple's constant.
pub fn rellich_check(triple: &RellichTriple, family: &[LogGaussianBump], params: &ProblemParams, exec: Exec) -> Result<RellichCheck> {
    if family.is_empty() {
        return Err(Error::InvalidParams("empty test family".into()));
    }
    let ratios = exec::map(exec, family, |b| rellich_ratio(triple, b, params)).into_iter().collect::<Result<Vec<_>>>()?;
    let (argmin, min_ratio) = ratios
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("nonempty family");
    Ok(RellichCheck { constant: triple.constant, min_ratio, argmin, ratios })
}
