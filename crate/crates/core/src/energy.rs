//! Radial grids, piecewise-linear test functions and the energy functionals.
//!
//! Test functions are continuous and piecewise linear in `r`, vanish at the
//! first and last node, and are therefore admissible competitors; a discrete
//! Rayleigh quotient is an upper bound for the continuous infimum up to
//! quadrature error.

use serde::{Deserialize, Serialize};

use crate::calculus::abs_pow;
use crate::defaults;
use crate::domain::{Coordinate, ProblemParams, RadialDomain};
use crate::error::{Error, Result};
use crate::quadrature::{gl6, GaussLegendre};
use crate::weights::{GroundState, PotentialProfile, Weight};

/// Strictly increasing radii with the measure factor `ω r^{n-1} σ(r)`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    s: Vec<f64>,
    coord: Coordinate,
    params: ProblemParams,
    measure: Vec<f64>,
    mass: Vec<f64>,
}

impl RadialGrid {
    /// Grid from explicit radii; `coord` is the variable used for quadrature.
    pub fn new(params: &ProblemParams, nodes: Vec<f64>, coord: Coordinate) -> Result<Self> {
        params.validate()?;
        if nodes.len() < defaults::MIN_GRID_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {} nodes, got {}",
                defaults::MIN_GRID_NODES,
                nodes.len()
            )));
        }
        if !nodes.iter().all(|r| r.is_finite() && *r > 0.0) {
            return Err(Error::InvalidGrid("nodes must be positive and finite".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        let s = nodes.iter().map(|&r| coord.to_s(r)).collect();
        let measure = nodes.iter().map(|&r| params.measure(r)).collect();
        let mut grid = RadialGrid { nodes, s, coord, params: params.clone(), measure, mass: Vec::new() };
        grid.mass = (0..grid.intervals()).map(|i| grid.compute_mass(i)).collect();
        Ok(grid)
    }

    /// `count` nodes uniform in `coord` between `r_lo` and `r_hi` inclusive.
    pub fn uniform(params: &ProblemParams, coord: Coordinate, r_lo: f64, r_hi: f64, count: usize) -> Result<Self> {
        if !(r_lo < r_hi) {
            return Err(Error::InvalidGrid(format!("empty range [{r_lo}, {r_hi}]")));
        }
        let (a, b) = (coord.to_s(r_lo), coord.to_s(r_hi));
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidGrid(format!("[{r_lo}, {r_hi}] is not inside the coordinate chart")));
        }
        let nodes = (0..count)
            .map(|i| {
                if i == 0 {
                    r_lo
                } else if i + 1 == count {
                    r_hi
                } else {
                    coord.to_r(a + (b - a) * i as f64 / (count - 1) as f64)
                }
            })
            .collect();
        RadialGrid::new(params, nodes, coord)
    }

    /// Log-spaced nodes.
    pub fn log_spaced(params: &ProblemParams, r_lo: f64, r_hi: f64, count: usize) -> Result<Self> {
        RadialGrid::uniform(params, Coordinate::Log, r_lo, r_hi, count)
    }

    /// Nodes uniform in the domain's own coordinate; both radii must lie in
    /// the open domain.
    pub fn for_domain(params: &ProblemParams, domain: &RadialDomain, r_lo: f64, r_hi: f64, count: usize) -> Result<Self> {
        if !(domain.contains(r_lo) && domain.contains(r_hi)) {
            return Err(Error::InvalidGrid(format!("[{r_lo}, {r_hi}] is not inside the domain")));
        }
        RadialGrid::uniform(params, domain.coordinate(), r_lo, r_hi, count)
    }

    fn compute_mass(&self, i: usize) -> f64 {
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        if self.params.sigma.is_lebesgue() {
            let n = self.params.dim();
            // ω (b^n - a^n) / n, written to avoid cancellation
            self.params.sphere_area() * a.powf(n) * (n * (b / a).ln()).exp_m1() / n
        } else {
            self.integrate_interval(i, gl6(), &[], |r| self.params.measure(r))
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coord
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.measure[i]
    }

    /// `∫_{r_i}^{r_{i+1}} ω r^{n-1} σ dr`
    pub fn interval_mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    /// Quadrature points of interval `i` in the grid coordinate, split at any
    /// `breaks` strictly inside it. Each item is `(r, weight)` with the
    /// Jacobian `dr/ds` folded into the weight (the measure factor is not).
    pub fn interval_points(&self, i: usize, rule: &GaussLegendre, breaks: &[f64]) -> Vec<(f64, f64)> {
        let (ra, rb) = (self.nodes[i], self.nodes[i + 1]);
        let mut cuts = vec![self.s[i]];
        for &b in breaks {
            if b > ra && b < rb {
                cuts.push(self.coord.to_s(b));
            }
        }
        cuts.push(self.s[i + 1]);
        cuts.sort_by(f64::total_cmp);
        let mut out = Vec::with_capacity(rule.len() * (cuts.len() - 1));
        for w in cuts.windows(2) {
            for (s, wt) in rule.mapped(w[0], w[1]) {
                out.push((self.coord.to_r(s), wt * self.coord.jacobian(s)));
            }
        }
        out
    }

    /// `∫_{r_i}^{r_{i+1}} f(r) dr` with `rule`, split at `breaks`.
    pub fn integrate_interval<F: Fn(f64) -> f64>(&self, i: usize, rule: &GaussLegendre, breaks: &[f64], f: F) -> f64 {
        self.interval_points(i, rule, breaks).into_iter().map(|(r, w)| w * f(r)).sum()
    }
}

/// Continuous piecewise-linear function given by nodal values, zero at both
/// ends of its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    values: Vec<f64>,
}

impl TestFunction {
    pub fn new(grid: &RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidTestFunction(format!(
                "{} nodal values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(Error::InvalidTestFunction("values at the first and last node must be 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTestFunction("nodal values must be finite".into()));
        }
        Ok(TestFunction { values })
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: &RadialGrid, f: F) -> Result<Self> {
        let n = grid.len();
        let values = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &r)| if i == 0 || i + 1 == n { 0.0 } else { f(r) })
            .collect();
        TestFunction::new(grid, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> TestFunction {
        TestFunction { values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Slope on interval `i`.
    pub fn slope(&self, grid: &RadialGrid, i: usize) -> f64 {
        let x = grid.nodes();
        (self.values[i + 1] - self.values[i]) / (x[i + 1] - x[i])
    }

    /// Value at `r` inside interval `i`.
    pub fn value_in(&self, grid: &RadialGrid, i: usize, r: f64) -> f64 {
        let x = grid.nodes();
        let t = (r - x[i]) / (x[i + 1] - x[i]);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Radii of the first and last nonzero node, or `None` when zero.
    pub fn support(&self, grid: &RadialGrid) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|v| *v != 0.0)?;
        let last = self.values.iter().rposition(|v| *v != 0.0)?;
        Some((grid.nodes()[first - 1], grid.nodes()[last + 1]))
    }

    /// Support width in the grid coordinate.
    pub fn support_width(&self, grid: &RadialGrid) -> f64 {
        match self.support(grid) {
            Some((a, b)) => grid.coordinate().to_s(b) - grid.coordinate().to_s(a),
            None => 0.0,
        }
    }

    fn check_nonnegative(&self) -> Result<()> {
        match self.values.iter().position(|v| *v < 0.0) {
            Some(index) => Err(Error::NegativeNodalValue { index, value: self.values[index] }),
            None => Ok(()),
        }
    }
}

/// Terms of the energy of one test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `∫ (|φ'|^p + V|φ|^p) dν`
    pub q: f64,
    pub gradient_term: f64,
    pub potential_term: f64,
    /// `∫ W |φ|^p dν`, zero when no weight was given
    pub rhs: f64,
    /// `q / rhs`, when `rhs > 0`
    pub rayleigh: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub qsim: Option<f64>,
}

fn gradient_term(phi: &TestFunction, grid: &RadialGrid) -> f64 {
    let p = grid.params().p;
    (0..grid.intervals()).map(|i| abs_pow(phi.slope(grid, i), p) * grid.interval_mass(i)).sum()
}

fn weighted_term(phi: &TestFunction, grid: &RadialGrid, breaks: &[f64], f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let p = grid.params().p;
    let mut total = 0.0;
    for i in 0..grid.intervals() {
        let (a, b) = (phi.values[i], phi.values[i + 1]);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        for (r, w) in grid.interval_points(i, gl6(), breaks) {
            let term = f(r) * abs_pow(phi.value_in(grid, i, r), p) * grid.params().measure(r) * w;
            if !term.is_finite() {
                return Err(Error::NonFiniteIntegrand { r });
            }
            total += term;
        }
    }
    Ok(total)
}

/// `𝒬_V(φ) = ∫(|φ'|^p + V|φ|^p) dν`, and `∫W|φ|^p dν` when a weight is
/// given. The gradient term is exact per interval; the others use 6-point
/// Gauss quadrature in the grid coordinate, split at the weight's singular
/// radii.
pub fn energy_qv(phi: &TestFunction, potential: &PotentialProfile, weight: Option<&Weight>, grid: &RadialGrid) -> Result<EnergyReport> {
    if phi.values.len() != grid.len() {
        return Err(Error::InvalidTestFunction("test function does not match the grid".into()));
    }
    let gradient = gradient_term(phi, grid);
    let pot = if potential.is_zero() { 0.0 } else { weighted_term(phi, grid, &[], &|r| potential.eval(r))? };
    let rhs = match weight {
        Some(w) => weighted_term(phi, grid, w.singular_radii(), &|r| w.eval(r))?,
        None => 0.0,
    };
    let q = gradient + pot;
    Ok(EnergyReport {
        q,
        gradient_term: gradient,
        potential_term: pot,
        rhs,
        rayleigh: if rhs > 0.0 { Some(q / rhs) } else { None },
        x: None,
        y: None,
        qsim: None,
    })
}

/// Energy report including the ground-state split of `φ = v w`, where `w`
/// is the given test function and `φ` is evaluated by quadrature.
pub fn energy_with_ground_state(
    w: &TestFunction,
    v: &GroundState,
    weight: &Weight,
    grid: &RadialGrid,
) -> Result<EnergyReport> {
    let split = xy_split(w, v, grid)?;
    let p = grid.params().p;
    let mut grad = 0.0;
    let mut rhs = 0.0;
    for i in 0..grid.intervals() {
        let s = w.slope(grid, i);
        if w.values[i] == 0.0 && w.values[i + 1] == 0.0 {
            continue;
        }
        for (r, q) in grid.interval_points(i, gl6(), weight.singular_radii()) {
            let (vv, dv, ww) = (v.eval(r), v.derivative(r), w.value_in(grid, i, r));
            let mu = grid.params().measure(r) * q;
            grad += abs_pow(dv * ww + vv * s, p) * mu;
            rhs += weight.eval(r) * abs_pow(vv * ww, p) * mu;
        }
    }
    let q = grad - rhs;
    Ok(EnergyReport {
        q,
        gradient_term: grad,
        potential_term: -rhs,
        rhs,
        rayleigh: if rhs > 0.0 { Some(grad / rhs) } else { None },
        x: Some(split.x),
        y: Some(split.y),
        qsim: Some(split.qsim),
    })
}

/// Pointwise densities `(v^p|w'|^p, |w|^p|v'|^p, simplified)` without the
/// measure.
pub fn simplified_densities(p: f64, v: f64, dv: f64, w: f64, dw: f64) -> (f64, f64, f64) {
    let x = abs_pow(v * dw, p);
    let y = abs_pow(w * dv, p);
    let sim = if p <= 2.0 {
        let base = v * dw.abs() + w.abs() * dv.abs();
        if base == 0.0 {
            0.0
        } else {
            v * v * dw * dw * abs_pow(base, p - 2.0)
        }
    } else {
        x + v * v * abs_pow(dv, p - 2.0) * abs_pow(w, p - 2.0) * dw * dw
    };
    (x, y, sim)
}

/// `X`, `Y`, the simplified energy and the smallest constant in the upper
/// estimate of the simplified energy by `X` (for `p ≤ 2`) or by
/// `X + (X/Y)^{2/p} Y` (for `p > 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XySplit {
    pub x: f64,
    pub y: f64,
    pub qsim: f64,
    pub bound_constant: Option<f64>,
}

impl XySplit {
    pub fn from_parts(p: f64, x: f64, y: f64, qsim: f64) -> Self {
        let denom = if p > 2.0 && y > 0.0 { x + (x / y).powf(2.0 / p) * y } else { x };
        XySplit { x, y, qsim, bound_constant: if denom > 0.0 { Some(qsim / denom) } else { None } }
    }
}

/// `X(w) = ∫v^p|w'|^p dν` and `Y(w) = ∫|w|^p|v'|^p dν`, with the simplified
/// energy.
pub fn xy_split(w: &TestFunction, v: &GroundState, grid: &RadialGrid) -> Result<XySplit> {
    w.check_nonnegative()?;
    let p = grid.params().p;
    let (mut x, mut y, mut sim) = (0.0, 0.0, 0.0);
    for i in 0..grid.intervals() {
        if w.values[i] == 0.0 && w.values[i + 1] == 0.0 {
            continue;
        }
        let dw = w.slope(grid, i);
        for (r, q) in grid.interval_points(i, gl6(), &[]) {
            let (a, b, c) = simplified_densities(p, v.eval(r), v.derivative(r), w.value_in(grid, i, r), dw);
            let mu = grid.params().measure(r) * q;
            x += a * mu;
            y += b * mu;
            sim += c * mu;
        }
    }
    if !(x.is_finite() && y.is_finite() && sim.is_finite()) {
        return Err(Error::NonFiniteIntegrand { r: f64::NAN });
    }
    Ok(XySplit::from_parts(p, x, y, sim))
}

/// Simplified energy of a nonnegative `w` relative to the ground state `v`.
pub fn simplified_energy(w: &TestFunction, v: &GroundState, grid: &RadialGrid) -> Result<f64> {
    Ok(xy_split(w, v, grid)?.qsim)
}
