//! Globally adaptive Gauss–Legendre quadrature on finite and (semi-)infinite ranges.
//!
//! Each panel is estimated with an n-point rule on the whole panel and on its two
//! halves; the difference is the panel error. The panel with the largest error is
//! bisected until the summed error drops below the absolute tolerance.
//! Infinite ends are mapped onto a finite parameter interval
//! (`u = b - (1-t)/t` and `u = a + t/(1-t)`).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration on P_n.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "Gauss-Legendre order must be at least 2");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Fixed rule on [a, b].
    pub fn apply<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// (-inf, b]: u = b - (1 - t)/t, t in (0, 1]
    Lower(f64),
    /// [a, +inf): u = a + t/(1 - t), t in [0, 1)
    Upper(f64),
}

impl Map {
    #[inline]
    fn eval<F: Fn(f64) -> f64>(self, f: &F, t: f64) -> f64 {
        match self {
            Map::Identity => f(t),
            Map::Lower(b) => {
                if t <= 0.0 {
                    return 0.0;
                }
                let u = b - (1.0 - t) / t;
                let v = f(u) / (t * t);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            }
            Map::Upper(a) => {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                let u = a + t / s;
                let v = f(u) / (s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            }
        }
    }
}

struct Panel {
    map: Map,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integrator with an absolute error target.
#[derive(Debug, Clone)]
pub struct Integrator {
    rule: GaussLegendre,
    tol: f64,
    max_panels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(16, 1e-10)
    }
}

impl Integrator {
    pub fn new(order: usize, tol: f64) -> Self {
        Self {
            rule: GaussLegendre::new(order),
            tol,
            max_panels: 4000,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn panel<F: Fn(f64) -> f64>(&self, f: &F, map: Map, a: f64, b: f64) -> Panel {
        let g = |t: f64| map.eval(f, t);
        let whole = self.rule.apply(&g, a, b);
        let m = 0.5 * (a + b);
        let halves = self.rule.apply(&g, a, m) + self.rule.apply(&g, m, b);
        Panel {
            map,
            a,
            b,
            value: halves,
            error: (whole - halves).abs(),
        }
    }

    /// ∫_a^b f(u) du; either limit may be infinite.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate_with_breaks(f, a, b, &[])
    }

    /// Like [`integrate`](Self::integrate) but seeds the panel set with interior break
    /// points. Use them to mark narrow peaks the initial rule could otherwise miss.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<f64> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::NonFinite(f64::NAN));
        }
        if a == b {
            return Ok(0.0);
        }
        if a > b {
            return self.integrate_with_breaks(f, b, a, breaks).map(|v| -v);
        }
        let mut points: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|p| p.is_finite() && *p > a && *p < b)
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        if a.is_infinite() && b.is_infinite() && points.is_empty() {
            points.push(0.0);
        }

        let mut cuts = Vec::with_capacity(points.len() + 2);
        cuts.push(a);
        cuts.extend(points);
        cuts.push(b);

        let mut heap = BinaryHeap::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let panel = match (lo.is_infinite(), hi.is_infinite()) {
                (true, false) => self.panel(&f, Map::Lower(hi), 0.0, 1.0),
                (false, true) => self.panel(&f, Map::Upper(lo), 0.0, 1.0),
                (false, false) => self.panel(&f, Map::Identity, lo, hi),
                (true, true) => unreachable!("split at an interior point above"),
            };
            heap.push(panel);
        }

        loop {
            let (total, err): (f64, f64) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if !total.is_finite() {
                return Err(Error::Quadrature {
                    context: "non-finite integrand".into(),
                    error_estimate: f64::INFINITY,
                });
            }
            if err <= self.tol || err <= 4.0 * f64::EPSILON * total.abs() {
                return Ok(total);
            }
            if heap.len() >= self.max_panels {
                return Err(Error::Quadrature {
                    context: format!("panel limit {} reached", self.max_panels),
                    error_estimate: err,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let m = 0.5 * (worst.a + worst.b);
            if m <= worst.a || m >= worst.b {
                // Panel cannot be split further in floating point; accept it.
                heap.push(Panel { error: 0.0, ..worst });
                continue;
            }
            heap.push(self.panel(&f, worst.map, worst.a, m));
            heap.push(self.panel(&f, worst.map, m, worst.b));
        }
    }
}
