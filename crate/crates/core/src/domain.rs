//! Radial model domains, problem parameters and the catalog of closed-form
//! radial p-harmonic profiles with their end classification.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{p_laplacian_terms, Fn1, RadialFunction};
use crate::defaults;
use crate::error::{Error, Result};
use crate::quadrature::bisect;

/// Density of the reference measure with respect to `ω r^{n-1} dr`.
#[derive(Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    #[default]
    Lebesgue,
    /// `σ(r) = r^exponent`
    Power { exponent: f64 },
    /// User density; not serializable.
    #[serde(skip)]
    Custom {
        value: Fn1,
        log_derivative: Fn1,
    },
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Lebesgue => write!(f, "Lebesgue"),
            Density::Power { exponent } => write!(f, "Power({exponent})"),
            Density::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Density {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Density::Lebesgue => 1.0,
            Density::Power { exponent } => r.powf(*exponent),
            Density::Custom { value, .. } => value(r),
        }
    }

    /// `σ'(r) / σ(r)`
    pub fn log_derivative(&self, r: f64) -> f64 {
        match self {
            Density::Lebesgue => 0.0,
            Density::Power { exponent } => exponent / r,
            Density::Custom { log_derivative, .. } => log_derivative(r),
        }
    }

    pub fn is_lebesgue(&self) -> bool {
        matches!(self, Density::Lebesgue)
    }
}

/// Exponent `p`, dimension `n` and measure density.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams {
    pub p: f64,
    pub n: u32,
    #[serde(default)]
    pub sigma: Density,
}

impl ProblemParams {
    pub fn new(p: f64, n: u32) -> Result<Self> {
        let params = ProblemParams { p, n, sigma: Density::Lebesgue };
        params.validate()?;
        Ok(params)
    }

    pub fn with_density(mut self, sigma: Density) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::InvalidParams(format!("p must be > 1, got {}", self.p)));
        }
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n must be >= 2, got {}", self.n)));
        }
        Ok(())
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// Area of the unit sphere `S^{n-1}`.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n)
    }

    /// Radial measure factor `ω_{n-1} r^{n-1} σ(r)`.
    pub fn measure(&self, r: f64) -> f64 {
        self.sphere_area() * r.powi(self.n as i32 - 1) * self.sigma.value(r)
    }

    /// `((p-1)/p)^p`
    pub fn hardy_constant(&self) -> f64 {
        ((self.p - 1.0) / self.p).powf(self.p)
    }

    /// Conjugate-type exponent `(p-1)/p` of the ground state `G^{(p-1)/p}`.
    pub fn beta(&self) -> f64 {
        (self.p - 1.0) / self.p
    }
}

/// `|S^{n-1}| = 2 π^{n/2} / Γ(n/2)` via the two-step recursion.
pub fn sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    let (mut area, mut k) = if n.is_multiple_of(2) { (2.0 * PI, 2) } else { (4.0 * PI, 3) };
    while k < n {
        area *= 2.0 * PI / k as f64;
        k += 2;
    }
    if n == 1 {
        2.0
    } else {
        area
    }
}

/// Coordinate in which grids are uniform and quadrature is done.
///
/// Each variant is logarithmic at every end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coordinate {
    /// `s = ln r`
    Log,
    /// `s = ln((r - lo) / (hi - r))`
    Logit { lo: f64, hi: f64 },
    /// `s = ln((r - lo) / lo)`
    ShiftedLog { lo: f64 },
}

impl Coordinate {
    pub fn to_s(&self, r: f64) -> f64 {
        match *self {
            Coordinate::Log => r.ln(),
            Coordinate::Logit { lo, hi } => ((r - lo) / (hi - r)).ln(),
            Coordinate::ShiftedLog { lo } => ((r - lo) / lo).ln(),
        }
    }

    pub fn to_r(&self, s: f64) -> f64 {
        match *self {
            Coordinate::Log => s.exp(),
            Coordinate::Logit { lo, hi } => {
                // stable logistic
                if s >= 0.0 {
                    let e = (-s).exp();
                    (hi + lo * e) / (1.0 + e)
                } else {
                    let e = s.exp();
                    (lo + hi * e) / (1.0 + e)
                }
            }
            Coordinate::ShiftedLog { lo } => lo + lo * s.exp(),
        }
    }

    /// `dr/ds`
    pub fn jacobian(&self, s: f64) -> f64 {
        match *self {
            Coordinate::Log => s.exp(),
            Coordinate::Logit { lo, hi } => {
                let e = (-s.abs()).exp();
                (hi - lo) * e / ((1.0 + e) * (1.0 + e))
            }
            Coordinate::ShiftedLog { lo } => lo * s.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialDomain {
    PuncturedSpace,
    PuncturedBall { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Exterior { radius: f64 },
}

impl RadialDomain {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RadialDomain::PuncturedSpace => true,
            RadialDomain::PuncturedBall { radius } | RadialDomain::Exterior { radius } => {
                radius.is_finite() && radius > 0.0
            }
            RadialDomain::Annulus { inner, outer } => {
                inner > 0.0 && outer.is_finite() && inner < outer
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid domain {self:?}")))
        }
    }

    /// Radius of the inner end (0 for punctured domains).
    pub fn inner_radius(&self) -> f64 {
        match *self {
            RadialDomain::PuncturedSpace | RadialDomain::PuncturedBall { .. } => 0.0,
            RadialDomain::Annulus { inner, .. } => inner,
            RadialDomain::Exterior { radius } => radius,
        }
    }

    /// Radius of the outer end, `None` for infinity.
    pub fn outer_radius(&self) -> Option<f64> {
        match *self {
            RadialDomain::PuncturedSpace | RadialDomain::Exterior { .. } => None,
            RadialDomain::PuncturedBall { radius } => Some(radius),
            RadialDomain::Annulus { outer, .. } => Some(outer),
        }
    }

    pub fn is_punctured(&self) -> bool {
        matches!(self, RadialDomain::PuncturedSpace | RadialDomain::PuncturedBall { .. })
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.inner_radius() && self.outer_radius().is_none_or(|o| r < o)
    }

    pub fn coordinate(&self) -> Coordinate {
        match *self {
            RadialDomain::PuncturedSpace => Coordinate::Log,
            RadialDomain::PuncturedBall { radius } => Coordinate::Logit { lo: 0.0, hi: radius },
            RadialDomain::Annulus { inner, outer } => Coordinate::Logit { lo: inner, hi: outer },
            RadialDomain::Exterior { radius } => Coordinate::ShiftedLog { lo: radius },
        }
    }

    /// `count` radii spread over the domain, uniform in the domain coordinate
    /// for `|s| <= span`.
    pub fn sample_radii(&self, count: usize, span: f64) -> Vec<f64> {
        let c = self.coordinate();
        (0..count)
            .map(|i| {
                let s = -span + 2.0 * span * (i as f64 + 0.5) / count as f64;
                c.to_r(s)
            })
            .filter(|&r| self.contains(r))
            .collect()
    }
}

/// Extended nonnegative real used for end limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Finite(f64),
    Infinite,
}

impl Limit {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            Limit::Finite(x) => Some(x),
            Limit::Infinite => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, Limit::Finite(x) if x == 0.0)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Limit::Infinite)
    }

    fn approx_eq(&self, other: &Limit) -> bool {
        match (self, other) {
            (Limit::Infinite, Limit::Infinite) => true,
            (Limit::Finite(a), Limit::Finite(b)) => (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())),
            _ => false,
        }
    }

    fn less_than(&self, other: &Limit) -> bool {
        match (self, other) {
            (Limit::Finite(a), Limit::Finite(b)) => a < b,
            (Limit::Finite(_), Limit::Infinite) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(x) => write!(f, "{x}"),
            Limit::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndBehavior {
    pub which_end: End,
    pub limit: Limit,
}

/// End behaviour of a profile, which selects the weight construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    /// `1 < p <= n`, `G -> ∞` at the origin and `G -> 0` at the outer end.
    InfiniteInner,
    /// `p > n`, `G -> 0` at the origin and `G -> ∞` at the outer end.
    InfiniteOuter,
    /// `p > n`, `G -> γ > 0` at the origin and `G -> 0` at the outer end.
    FiniteInner { gamma: f64 },
    /// Distinct limits `m < M` (M possibly infinite) at the two ends.
    TwoEnds { m: f64, big_m: Limit },
}

impl Classification {
    pub fn name(&self) -> String {
        match self {
            Classification::InfiniteInner => "InfiniteInner".into(),
            Classification::InfiniteOuter => "InfiniteOuter".into(),
            Classification::FiniteInner { gamma } => format!("FiniteInner({gamma})"),
            Classification::TwoEnds { m, big_m } => format!("TwoEnds({m}, {big_m})"),
        }
    }
}

/// Closed-form shape of a profile, before the multiplicative scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ProfileForm {
    /// `r^a`
    Power { a: f64 },
    /// `r^a - offset`
    PowerShift { a: f64, offset: f64 },
    /// `ln(radius / r)`
    Log { radius: f64 },
    /// user-supplied; only the runtime object carries the closures
    Custom,
}

#[derive(Clone)]
struct CustomProfile {
    value: Fn1,
    derivative: Fn1,
}

/// Positive radial p-harmonic function `G = scale * form(r)` with its end
/// limits and classification.
#[derive(Clone)]
pub struct GreenProfile {
    form: ProfileForm,
    scale: f64,
    params: ProblemParams,
    domain: RadialDomain,
    inner: Limit,
    outer: Limit,
    classification: Classification,
    custom: Option<CustomProfile>,
}

impl fmt::Debug for GreenProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GreenProfile")
            .field("form", &self.form)
            .field("scale", &self.scale)
            .field("domain", &self.domain)
            .field("inner", &self.inner)
            .field("outer", &self.outer)
            .field("classification", &self.classification)
            .finish()
    }
}

/// JSON-facing description of a closed-form profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDescriptor {
    pub form: ProfileForm,
    pub scale: f64,
    pub params: ProblemParams,
    pub domain: RadialDomain,
    pub classification: Classification,
}

// Limit of the unscaled base at an end; the sign matters for infinities.
#[derive(Debug, Clone, Copy)]
enum BaseLimit {
    Finite(f64),
    PosInf,
    NegInf,
}

impl GreenProfile {
    /// Builds a closed-form profile and validates positivity and
    /// p-harmonicity on the domain.
    pub fn from_form(
        form: ProfileForm,
        scale: f64,
        params: ProblemParams,
        domain: RadialDomain,
    ) -> Result<Self> {
        params.validate()?;
        domain.validate()?;
        if matches!(form, ProfileForm::Custom) {
            return Err(Error::InvalidParams("use GreenProfile::custom for user profiles".into()));
        }
        if !(scale.is_finite() && scale != 0.0) {
            return Err(Error::InvalidParams(format!("scale must be finite and nonzero, got {scale}")));
        }
        let inner = Self::base_limit(&form, domain.inner_radius(), true);
        let outer = match domain.outer_radius() {
            Some(r) => Self::base_limit(&form, r, false),
            None => Self::base_limit_at_infinity(&form),
        };
        let to_limit = |b: BaseLimit| -> Result<Limit> {
            match b {
                BaseLimit::Finite(x) => {
                    let v = scale * x;
                    if v < -1e-12 * x.abs().max(1.0) {
                        Err(Error::NonPositiveProfile { r: f64::NAN })
                    } else {
                        Ok(Limit::Finite(v.max(0.0)))
                    }
                }
                BaseLimit::PosInf if scale > 0.0 => Ok(Limit::Infinite),
                BaseLimit::NegInf if scale < 0.0 => Ok(Limit::Infinite),
                _ => Err(Error::NonPositiveProfile { r: f64::NAN }),
            }
        };
        let inner = to_limit(inner)?;
        let outer = to_limit(outer)?;
        let classification = classify(&params, &domain, inner, outer)?;
        let profile = GreenProfile {
            form,
            scale,
            params,
            domain,
            inner,
            outer,
            classification,
            custom: None,
        };
        profile.check_positive()?;
        profile.check_residual(defaults::CATALOG_RESIDUAL_TOL)?;
        Ok(profile)
    }

    /// User-supplied profile from a `(value, derivative)` pair.
    ///
    /// The radial flux `r^{n-1} σ |G'|^{p-2} G'` must be constant to
    /// `tol` relative at sampled radii; this is p-harmonicity for radial
    /// functions and also fixes `G''`. End limits are supplied by the
    /// caller.
    pub fn custom(
        value: Fn1,
        derivative: Fn1,
        params: ProblemParams,
        domain: RadialDomain,
        inner: Limit,
        outer: Limit,
        tol: f64,
    ) -> Result<Self> {
        params.validate()?;
        domain.validate()?;
        let classification = classify(&params, &domain, inner, outer)?;
        let profile = GreenProfile {
            form: ProfileForm::Custom,
            scale: 1.0,
            params,
            domain,
            inner,
            outer,
            classification,
            custom: Some(CustomProfile { value, derivative }),
        };
        profile.check_positive()?;
        let radii = profile.domain.sample_radii(100, 12.0);
        let flux: Vec<(f64, f64)> = radii
            .iter()
            .map(|&r| {
                let d = profile.derivative(r);
                let p = profile.params.p;
                (r, r.powi(profile.params.n as i32 - 1) * profile.params.sigma.value(r) * d.abs().powf(p - 2.0) * d)
            })
            .collect();
        let reference = flux[flux.len() / 2].1;
        if reference == 0.0 || !reference.is_finite() {
            return Err(Error::VanishingDerivative { r: flux[flux.len() / 2].0 });
        }
        for &(r, f) in &flux {
            let rel = (f - reference).abs() / reference.abs();
            if !(rel <= tol) {
                return Err(Error::NotPHarmonic { r, residual: rel });
            }
        }
        Ok(profile)
    }

    fn base_limit(form: &ProfileForm, r: f64, _inner: bool) -> BaseLimit {
        if r > 0.0 {
            return BaseLimit::Finite(Self::base(form, r).0);
        }
        // r -> 0+
        match *form {
            ProfileForm::Power { a } => {
                if a < 0.0 {
                    BaseLimit::PosInf
                } else if a > 0.0 {
                    BaseLimit::Finite(0.0)
                } else {
                    BaseLimit::Finite(1.0)
                }
            }
            ProfileForm::PowerShift { a, offset } => {
                if a < 0.0 {
                    BaseLimit::PosInf
                } else if a > 0.0 {
                    BaseLimit::Finite(-offset)
                } else {
                    BaseLimit::Finite(1.0 - offset)
                }
            }
            ProfileForm::Log { .. } => BaseLimit::PosInf,
            ProfileForm::Custom => BaseLimit::Finite(f64::NAN),
        }
    }

    fn base_limit_at_infinity(form: &ProfileForm) -> BaseLimit {
        match *form {
            ProfileForm::Power { a } => {
                if a < 0.0 {
                    BaseLimit::Finite(0.0)
                } else if a > 0.0 {
                    BaseLimit::PosInf
                } else {
                    BaseLimit::Finite(1.0)
                }
            }
            ProfileForm::PowerShift { a, offset } => {
                if a < 0.0 {
                    BaseLimit::Finite(-offset)
                } else if a > 0.0 {
                    BaseLimit::PosInf
                } else {
                    BaseLimit::Finite(1.0 - offset)
                }
            }
            ProfileForm::Log { .. } => BaseLimit::NegInf,
            ProfileForm::Custom => BaseLimit::Finite(f64::NAN),
        }
    }

    // (value, first, second derivative) of the unscaled base
    fn base(form: &ProfileForm, r: f64) -> (f64, f64, f64) {
        match *form {
            ProfileForm::Power { a } => {
                let ra = r.powf(a);
                (ra, a * ra / r, a * (a - 1.0) * ra / (r * r))
            }
            ProfileForm::PowerShift { a, offset } => {
                let ra = r.powf(a);
                (ra - offset, a * ra / r, a * (a - 1.0) * ra / (r * r))
            }
            ProfileForm::Log { radius } => ((radius / r).ln(), -1.0 / r, 1.0 / (r * r)),
            ProfileForm::Custom => (f64::NAN, f64::NAN, f64::NAN),
        }
    }

    fn check_positive(&self) -> Result<()> {
        for r in self.domain.sample_radii(200, 12.0) {
            let v = self.value(r);
            if !(v > 0.0) {
                return Err(Error::NonPositiveProfile { r });
            }
        }
        Ok(())
    }

    /// Largest relative p-Laplacian residual over 100 sampled radii.
    pub fn max_relative_residual(&self) -> f64 {
        let u = self.as_radial();
        self.domain
            .sample_radii(100, 12.0)
            .into_iter()
            .map(|r| {
                let (res, scale) = p_laplacian_terms(&u, &self.params, r).expect("profile has G''");
                if scale == 0.0 {
                    0.0
                } else {
                    res.abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    fn check_residual(&self, tol: f64) -> Result<()> {
        let u = self.as_radial();
        for r in self.domain.sample_radii(100, 12.0) {
            let (res, scale) = p_laplacian_terms(&u, &self.params, r)?;
            let rel = if scale == 0.0 { res.abs() } else { res.abs() / scale };
            if !(rel <= tol) {
                return Err(Error::NotPHarmonic { r, residual: rel });
            }
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        match &self.custom {
            Some(c) => (c.value)(r),
            None => self.scale * Self::base(&self.form, r).0,
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match &self.custom {
            Some(c) => (c.derivative)(r),
            None => self.scale * Self::base(&self.form, r).1,
        }
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        match &self.custom {
            // radial p-harmonicity: (p-1) G'' = -((n-1)/r + σ'/σ) G'
            Some(c) => {
                let d = (c.derivative)(r);
                -((self.params.dim() - 1.0) / r + self.params.sigma.log_derivative(r)) * d
                    / (self.params.p - 1.0)
            }
            None => self.scale * Self::base(&self.form, r).2,
        }
    }

    pub fn as_radial(&self) -> RadialFunction {
        let (a, b, c) = (self.clone(), self.clone(), self.clone());
        RadialFunction::new(
            Arc::new(move |r| a.value(r)),
            Arc::new(move |r| b.derivative(r)),
            Some(Arc::new(move |r| c.second_derivative(r))),
        )
    }

    /// `c G` for `c > 0`; still p-harmonic with rescaled limits.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!("scale factor must be positive, got {c}")));
        }
        if let Some(custom) = &self.custom {
            let (v, d) = (custom.value.clone(), custom.derivative.clone());
            let scale_limit = |l: Limit| match l {
                Limit::Finite(x) => Limit::Finite(c * x),
                Limit::Infinite => Limit::Infinite,
            };
            return GreenProfile::custom(
                Arc::new(move |r| c * v(r)),
                Arc::new(move |r| c * d(r)),
                self.params.clone(),
                self.domain,
                scale_limit(self.inner),
                scale_limit(self.outer),
                defaults::PROFILE_RESIDUAL_TOL,
            );
        }
        GreenProfile::from_form(self.form, self.scale * c, self.params.clone(), self.domain)
    }

    pub fn form(&self) -> ProfileForm {
        self.form
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn domain(&self) -> RadialDomain {
        self.domain
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn inner_limit(&self) -> Limit {
        self.inner
    }

    pub fn outer_limit(&self) -> Limit {
        self.outer
    }

    /// Infimum and supremum of `G` over the domain.
    pub fn range(&self) -> (f64, Limit) {
        if self.inner.less_than(&self.outer) {
            (self.inner.finite().unwrap_or(0.0), self.outer)
        } else {
            (self.outer.finite().unwrap_or(0.0), self.inner)
        }
    }

    /// Whether `G` increases from the inner to the outer end.
    pub fn is_increasing(&self) -> bool {
        self.inner.less_than(&self.outer)
    }

    /// The radius where `G = t`, by bisection in the domain coordinate.
    pub fn radius_at_level(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        let hi_f = hi.finite().unwrap_or(f64::INFINITY);
        if !(t > lo && t < hi_f) {
            return Err(Error::LevelOutOfRange { t, lo, hi: hi_f });
        }
        let coord = self.domain.coordinate();
        let f = |s: f64| {
            let r = coord.to_r(s);
            if !self.domain.contains(r) {
                // saturated at an end: push toward the matching limit
                return if s < 0.0 { self.limit_sign(self.inner, t) } else { self.limit_sign(self.outer, t) };
            }
            self.value(r) - t
        };
        let s = bisect(-700.0, 700.0, f).ok_or(Error::LevelOutOfRange { t, lo, hi: hi_f })?;
        Ok(coord.to_r(s))
    }

    fn limit_sign(&self, l: Limit, t: f64) -> f64 {
        match l {
            Limit::Infinite => 1.0,
            Limit::Finite(x) => x - t,
        }
    }

    /// `count` levels of `G`, taken at radii spread evenly over `[-12, 12]`
    /// in the domain coordinate and sorted ascending.
    pub fn sample_levels(&self, count: usize) -> Vec<f64> {
        let mut levels: Vec<f64> = self.domain.sample_radii(count, 12.0).into_iter().map(|r| self.value(r)).collect();
        levels.sort_by(f64::total_cmp);
        levels
    }

    pub fn descriptor(&self) -> Result<ProfileDescriptor> {
        if self.custom.is_some() {
            return Err(Error::InvalidParams("user-supplied profiles are not serializable".into()));
        }
        Ok(ProfileDescriptor {
            form: self.form,
            scale: self.scale,
            params: self.params.clone(),
            domain: self.domain,
            classification: self.classification,
        })
    }

    pub fn from_descriptor(desc: &ProfileDescriptor) -> Result<Self> {
        let g = GreenProfile::from_form(desc.form, desc.scale, desc.params.clone(), desc.domain)?;
        if !classification_matches(&g.classification, &desc.classification) {
            return Err(Error::WrongClassification {
                expected: desc.classification.name(),
                found: g.classification.name(),
            });
        }
        Ok(g)
    }
}

fn classification_matches(a: &Classification, b: &Classification) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
    match (a, b) {
        (Classification::InfiniteInner, Classification::InfiniteInner) => true,
        (Classification::InfiniteOuter, Classification::InfiniteOuter) => true,
        (Classification::FiniteInner { gamma: x }, Classification::FiniteInner { gamma: y }) => close(*x, *y),
        (Classification::TwoEnds { m: m1, big_m: b1 }, Classification::TwoEnds { m: m2, big_m: b2 }) => {
            close(*m1, *m2) && b1.approx_eq(b2)
        }
        _ => false,
    }
}

/// Case split of the end conditions; punctured domains get the
/// origin/infinity classes when they apply, everything else with distinct
/// limits is two-ended.
pub fn classify(
    params: &ProblemParams,
    domain: &RadialDomain,
    inner: Limit,
    outer: Limit,
) -> Result<Classification> {
    let (p, n) = (params.p, params.dim());
    if domain.is_punctured() {
        if p <= n && inner.is_infinite() && outer.is_zero() {
            return Ok(Classification::InfiniteInner);
        }
        if p > n && inner.is_zero() && outer.is_infinite() {
            return Ok(Classification::InfiniteOuter);
        }
        if p > n && outer.is_zero() {
            if let Limit::Finite(g) = inner {
                if g > 0.0 {
                    return Ok(Classification::FiniteInner { gamma: g });
                }
            }
        }
    }
    if inner.approx_eq(&outer) {
        return Err(Error::UnsupportedCombination(format!(
            "end limits coincide ({inner}, {outer})"
        )));
    }
    let (lo, hi) = if inner.less_than(&outer) { (inner, outer) } else { (outer, inner) };
    Ok(Classification::TwoEnds { m: lo.finite().unwrap_or(0.0), big_m: hi })
}

/// Closed-form radial p-harmonic profile realizing the end conditions on
/// `dom` (Lebesgue measure only).
pub fn green_radial(params: &ProblemParams, dom: &RadialDomain) -> Result<GreenProfile> {
    params.validate()?;
    dom.validate()?;
    if !params.sigma.is_lebesgue() {
        return Err(Error::NonLebesgueMeasure);
    }
    let (p, n) = (params.p, params.dim());
    let a = (p - n) / (p - 1.0);
    let critical = p == n;
    let (form, scale) = match *dom {
        RadialDomain::PuncturedSpace => {
            if critical {
                return Err(Error::UnsupportedCombination(
                    "punctured space with p = n has no positive p-harmonic profile with the required end limits".into(),
                ));
            }
            (ProfileForm::Power { a }, 1.0)
        }
        RadialDomain::PuncturedBall { radius } => {
            if critical {
                (ProfileForm::Log { radius }, 1.0)
            } else if p < n {
                (ProfileForm::PowerShift { a, offset: radius.powf(a) }, 1.0)
            } else {
                (ProfileForm::PowerShift { a, offset: radius.powf(a) }, -1.0)
            }
        }
        RadialDomain::Annulus { inner, outer } => {
            if critical {
                (ProfileForm::Log { radius: inner }, -1.0 / (outer / inner).ln())
            } else {
                let (ia, oa) = (inner.powf(a), outer.powf(a));
                (ProfileForm::PowerShift { a, offset: ia }, 1.0 / (oa - ia))
            }
        }
        RadialDomain::Exterior { .. } => {
            if p >= n {
                return Err(Error::UnsupportedCombination(
                    "exterior domain catalog covers p < n only".into(),
                ));
            }
            (ProfileForm::Power { a }, 1.0)
        }
    };
    GreenProfile::from_form(form, scale, params.clone(), *dom)
}

/// Limits of `G` at the inner and outer ends.
pub fn classify_ends(g: &GreenProfile) -> (EndBehavior, EndBehavior) {
    (
        EndBehavior { which_end: End::Inner, limit: g.inner_limit() },
        EndBehavior { which_end: End::Outer, limit: g.outer_limit() },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn sphere_areas() {
        assert!(close(sphere_area(2), 2.0 * PI, 1e-15));
        assert!(close(sphere_area(3), 4.0 * PI, 1e-15));
        assert!(close(sphere_area(4), 2.0 * PI * PI, 1e-15));
        assert!(close(sphere_area(5), 8.0 * PI * PI / 3.0, 1e-15));
    }

    #[test]
    fn classical_space_profile_is_a7() {
        let g = green_radial(&ProblemParams::new(2.0, 3).unwrap(), &RadialDomain::PuncturedSpace).unwrap();
        assert_eq!(g.classification(), Classification::InfiniteInner);
        for r in [0.1, 1.0, 7.0] {
            assert!(close(g.value(r), 1.0 / r, 1e-15));
        }
    }

    #[test]
    fn supercritical_space_profile_is_a8_gamma0() {
        let g = green_radial(&ProblemParams::new(3.0, 2).unwrap(), &RadialDomain::PuncturedSpace).unwrap();
        assert_eq!(g.classification(), Classification::InfiniteOuter);
        assert!(close(g.value(4.0), 2.0, 1e-15));
    }

    #[test]
    fn supercritical_ball_profile() {
        let g = green_radial(
            &ProblemParams::new(3.0, 2).unwrap(),
            &RadialDomain::PuncturedBall { radius: 1.0 },
        )
        .unwrap();
        assert_eq!(g.classification(), Classification::FiniteInner { gamma: 1.0 });
        assert!(close(g.value(0.25), 0.5, 1e-15));
        assert!(g.max_relative_residual() < 1e-10);
    }

    #[test]
    fn critical_ball_profile_is_log() {
        let g = green_radial(
            &ProblemParams::new(3.0, 3).unwrap(),
            &RadialDomain::PuncturedBall { radius: 1.0 },
        )
        .unwrap();
        assert_eq!(g.classification(), Classification::InfiniteInner);
        assert!(close(g.value(0.5), 2f64.ln(), 1e-15));
        assert!(g.max_relative_residual() < 1e-10);
    }

    #[test]
    fn unsupported_and_non_lebesgue() {
        let p = ProblemParams::new(3.0, 3).unwrap();
        assert!(matches!(
            green_radial(&p, &RadialDomain::PuncturedSpace),
            Err(Error::UnsupportedCombination(_))
        ));
        let q = ProblemParams::new(2.0, 3).unwrap().with_density(Density::Power { exponent: 1.0 });
        assert_eq!(green_radial(&q, &RadialDomain::PuncturedSpace).unwrap_err(), Error::NonLebesgueMeasure);
        let e = ProblemParams::new(4.0, 3).unwrap();
        assert!(green_radial(&e, &RadialDomain::Exterior { radius: 1.0 }).is_err());
    }

    #[test]
    fn end_limits() {
        let p = ProblemParams::new(2.0, 3).unwrap();
        let g = green_radial(&p, &RadialDomain::PuncturedSpace).unwrap();
        let (i, o) = classify_ends(&g);
        assert_eq!(i.limit, Limit::Infinite);
        assert_eq!(o.limit, Limit::Finite(0.0));

        let ball = green_radial(&ProblemParams::new(3.0, 2).unwrap(), &RadialDomain::PuncturedBall { radius: 1.0 })
            .unwrap();
        let (i, o) = classify_ends(&ball);
        assert_eq!(i.limit, Limit::Finite(1.0));
        assert_eq!(o.limit, Limit::Finite(0.0));

        let ann = GreenProfile::from_form(
            ProfileForm::Power { a: -1.0 },
            1.0,
            p,
            RadialDomain::Annulus { inner: 1.0, outer: 2.0 },
        )
        .unwrap();
        let (i, o) = classify_ends(&ann);
        assert_eq!(i.limit, Limit::Finite(1.0));
        assert_eq!(o.limit, Limit::Finite(0.5));
        assert_eq!(ann.classification(), Classification::TwoEnds { m: 0.5, big_m: Limit::Finite(1.0) });
    }

    #[test]
    fn annulus_and_exterior_catalog() {
        for (p, n) in [(2.0, 3), (3.0, 3), (4.0, 2), (1.5, 2)] {
            let params = ProblemParams::new(p, n).unwrap();
            let g = green_radial(&params, &RadialDomain::Annulus { inner: 1.0, outer: 3.0 }).unwrap();
            assert_eq!(g.classification(), Classification::TwoEnds { m: 0.0, big_m: Limit::Finite(1.0) });
            assert!(g.max_relative_residual() < 1e-10);
        }
        let g = green_radial(&ProblemParams::new(2.0, 3).unwrap(), &RadialDomain::Exterior { radius: 2.0 }).unwrap();
        assert_eq!(g.classification(), Classification::TwoEnds { m: 0.0, big_m: Limit::Finite(0.5) });
    }

    #[test]
    fn level_inversion() {
        let g = green_radial(&ProblemParams::new(3.0, 2).unwrap(), &RadialDomain::PuncturedBall { radius: 1.0 })
            .unwrap();
        assert!(close(g.radius_at_level(0.5).unwrap(), 0.25, 1e-13));
        assert!(g.radius_at_level(1.5).is_err());
        let s = green_radial(&ProblemParams::new(2.0, 3).unwrap(), &RadialDomain::PuncturedSpace).unwrap();
        assert!(close(s.radius_at_level(1e-5).unwrap(), 1e5, 1e-12));
    }

    #[test]
    fn custom_profile_validation() {
        let params = ProblemParams::new(2.0, 3).unwrap();
        let ok = GreenProfile::custom(
            Arc::new(|r: f64| 2.0 / r),
            Arc::new(|r: f64| -2.0 / (r * r)),
            params.clone(),
            RadialDomain::PuncturedSpace,
            Limit::Infinite,
            Limit::Finite(0.0),
            1e-8,
        )
        .unwrap();
        assert_eq!(ok.classification(), Classification::InfiniteInner);
        assert!(close(ok.second_derivative(2.0), 4.0 / 8.0, 1e-14));
        let bad = GreenProfile::custom(
            Arc::new(|r: f64| 1.0 / (r * r)),
            Arc::new(|r: f64| -2.0 / (r * r * r)),
            params,
            RadialDomain::PuncturedSpace,
            Limit::Infinite,
            Limit::Finite(0.0),
            1e-8,
        );
        assert!(matches!(bad, Err(Error::NotPHarmonic { .. })));
    }

    #[test]
    fn descriptor_roundtrip() {
        let g = green_radial(&ProblemParams::new(3.0, 2).unwrap(), &RadialDomain::PuncturedBall { radius: 2.0 })
            .unwrap();
        let json = serde_json::to_string(&g.descriptor().unwrap()).unwrap();
        let back: ProfileDescriptor = serde_json::from_str(&json).unwrap();
        let h = GreenProfile::from_descriptor(&back).unwrap();
        assert_eq!(h.value(0.3), g.value(0.3));
    }

    #[test]
    fn coordinates_invert() {
        for c in [
            Coordinate::Log,
            Coordinate::Logit { lo: 0.0, hi: 2.0 },
            Coordinate::Logit { lo: 1.0, hi: 3.0 },
            Coordinate::ShiftedLog { lo: 1.5 },
        ] {
            for s in [-5.0, -0.3, 0.0, 2.0, 7.0] {
                let r = c.to_r(s);
                assert!(close(c.to_s(r), s, 1e-10), "{c:?} {s}");
                let h = 1e-6;
                let fd = (c.to_r(s + h) - c.to_r(s - h)) / (2.0 * h);
                assert!(close(c.jacobian(s), fd, 1e-7));
            }
        }
    }
}
