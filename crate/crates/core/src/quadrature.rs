//! Gauss–Legendre rules, adaptive composite integration and a bracketing
//! root finder.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on P_n from the Chebyshev guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Points of the rule mapped to `[a, b]`, with their scaled weights.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 15-point rule used by the adaptive integrator.
pub fn gl15() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

/// Shared 6-point rule used for per-interval energy quadrature.
pub fn gl6() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(6))
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// budget of panels; the estimate is returned as is once it is spent
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            abs_tol: crate::defaults::QUAD_ABS_TOL,
            rel_tol: crate::defaults::QUAD_REL_TOL,
            max_panels: 2000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    err: f64,
}

impl Panel {
    // `whole` is the 15-point estimate on the full panel
    fn new<F: FnMut(f64) -> f64>(a: f64, b: f64, whole: f64, f: &mut F) -> Self {
        let rule = gl15();
        let m = 0.5 * (a + b);
        let left = rule.integrate(a, m, &mut *f);
        let right = rule.integrate(m, b, &mut *f);
        let splittable = m > a && m < b;
        let err = if splittable { (left + right - whole).abs() } else { 0.0 };
        Panel { a, b, left, right, err }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive composite 15-point Gauss–Legendre integration.
///
/// The panel with the largest error estimate (difference between the rule on
/// the panel and on its two halves) is split until the summed estimate drops
/// below `max(abs_tol, rel_tol * |integral|)` or the panel budget is spent.
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, opts: AdaptiveOptions, mut f: F) -> f64 {
    if a == b {
        return 0.0;
    }
    let rule = gl15();
    let whole = rule.integrate(a, b, &mut f);
    let first = Panel::new(a, b, whole, &mut f);
    let mut total = first.value();
    let mut err = first.err;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(first);
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) && heap.len() < opts.max_panels.max(1) {
        if !total.is_finite() {
            return total;
        }
        let worst = heap.pop().expect("nonempty panel heap");
        if worst.err == 0.0 {
            heap.push(worst);
            break;
        }
        let m = 0.5 * (worst.a + worst.b);
        let l = Panel::new(worst.a, m, worst.left, &mut f);
        let r = Panel::new(m, worst.b, worst.right, &mut f);
        total += l.value() + r.value() - worst.value();
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
    }
    // resum to shed the drift of the running updates
    heap.iter().map(Panel::value).sum::<f64>()
}

/// Adaptive integration over consecutive breakpoints.
pub fn adaptive_piecewise<F: FnMut(f64) -> f64>(
    breaks: &[f64],
    opts: AdaptiveOptions,
    mut f: F,
) -> f64 {
    breaks
        .windows(2)
        .map(|w| adaptive(w[0], w[1], opts, &mut f))
        .sum()
}

/// Bisection for a sign change of `f` on `[a, b]`.
///
/// Returns `None` when `f(a)` and `f(b)` have the same strict sign.
pub fn bisect<F: Fn(f64) -> f64>(mut a: f64, mut b: f64, f: F) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// `count` points log-spaced between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0);
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(6);
        // exact up to degree 11
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(11) - 3.0 * x.powi(4));
        let exact = (2f64.powi(12) - 1.0) / 12.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-11 * exact.abs());
        let w: f64 = GaussLegendre::new(15).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = adaptive(0.0, 1.0, AdaptiveOptions::default(), |x| 1.0 / (1e-4 + (x - 0.3).powi(2)));
        let exact = ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan()) / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(0.0, 2.0, |x| x * x - 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(bisect(0.0, 1.0, |x| x + 1.0).is_none());
    }
}
