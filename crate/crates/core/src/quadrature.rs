//! One-dimensional quadrature building blocks.
//!
//! Gauss–Legendre rules, dyadically graded composite rules for endpoint
//! singularities, an adaptive bisection integrator with an error estimate,
//! and a three-sample rule that integrates `t^{-2s} P(t)` over `(0, 1)`
//! exactly for quadratic `P`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
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
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared rule instances for the sizes used throughout the crate.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static G4: OnceLock<GaussLegendre> = OnceLock::new();
    static G8: OnceLock<GaussLegendre> = OnceLock::new();
    static G16: OnceLock<GaussLegendre> = OnceLock::new();
    static G32: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        4 => G4.get_or_init(|| GaussLegendre::new(4)),
        8 => G8.get_or_init(|| GaussLegendre::new(8)),
        16 => G16.get_or_init(|| GaussLegendre::new(16)),
        32 => G32.get_or_init(|| GaussLegendre::new(32)),
        _ => panic!(
            "no shared Gauss-Legendre rule with {n} points; construct one with GaussLegendre::new"
        ),
    }
}

/// Value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Which end(s) of an interval a graded rule refines toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    Left,
    Right,
    Both,
}

/// Composite Gauss rule on `[a, b]` whose panels halve in width toward the
/// graded end(s), `depth` levels deep.
pub fn integrate_graded<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    grading: Grading,
    depth: u32,
    mut f: F,
) -> f64 {
    graded_dyn(rule, a, b, grading, depth, &mut f)
}

fn graded_dyn(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    grading: Grading,
    depth: u32,
    f: &mut dyn FnMut(f64) -> f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    match grading {
        Grading::Both => {
            let mid = 0.5 * (a + b);
            graded_dyn(rule, a, mid, Grading::Left, depth, f)
                + graded_dyn(rule, mid, b, Grading::Right, depth, f)
        }
        Grading::Left | Grading::Right => {
            let len = b - a;
            let mut total = 0.0;
            // Panel k spans relative offsets [2^{-k-1}, 2^{-k}]; the last one reaches the end.
            for k in 0..=depth {
                let (lo, hi) = if k == depth {
                    (0.0, 0.5f64.powi(k as i32))
                } else {
                    (0.5f64.powi(k as i32 + 1), 0.5f64.powi(k as i32))
                };
                let (pa, pb) = match grading {
                    Grading::Left => (a + lo * len, a + hi * len),
                    _ => (b - hi * len, b - lo * len),
                };
                total += rule.integrate(pa, pb, &mut *f);
            }
            total
        }
    }
}

/// Adaptive bisection: each panel is accepted when a 16-point Gauss value
/// and the sum over its two halves agree to the panel's share of `tol`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
    mut f: F,
) -> Result<Estimate> {
    if b <= a {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let rule = gauss_legendre(16);
    let total_len = b - a;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut unresolved = 0.0;
    let whole = rule.integrate(a, b, &mut f);
    let mut stack = vec![(a, b, whole, 0u32)];
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        let fine = left + right;
        let diff = (fine - coarse).abs();
        let share = tol * (hi - lo) / total_len;
        if diff <= share.max(f64::EPSILON * fine.abs()) || depth >= max_depth {
            if depth >= max_depth && diff > share {
                unresolved += diff;
            }
            value += fine;
            error += diff;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if !value.is_finite() {
        return Err(Error::NonFinite { x: 0.5 * (a + b) });
    }
    if unresolved > tol {
        return Err(Error::NonConvergence {
            estimate: error,
            tolerance: tol,
            context: format!("adaptive quadrature on [{a}, {b}] hit depth {max_depth}"),
        });
    }
    Ok(Estimate { value, error })
}

/// Exact rule for `∫_0^1 t^{-2s} P(t) dt`, `P` of degree at most two,
/// from the samples `P(0)`, `P(1/2)`, `P(1)`.
///
/// For `2s >= 1` the weight on `P(0)` is dropped: the integral only exists
/// when `P(0) = 0`, and the caller guarantees that.
#[derive(Debug, Clone, Copy)]
pub struct CornerRule {
    pub weights: [f64; 3],
}

pub const CORNER_SAMPLES: [f64; 3] = [0.0, 0.5, 1.0];

impl CornerRule {
    pub fn new(order: f64) -> Self {
        let two_s = 2.0 * order;
        let m1 = 1.0 / (2.0 - two_s);
        let m2 = 1.0 / (3.0 - two_s);
        // Quadratic through the samples: c0 = v0, c1 = -3v0 + 4v1 - v2, c2 = 2v0 - 4v1 + 2v2.
        let w0 = if two_s < 1.0 {
            1.0 / (1.0 - two_s) - 3.0 * m1 + 2.0 * m2
        } else {
            0.0
        };
        let w1 = 4.0 * m1 - 4.0 * m2;
        let w2 = -m1 + 2.0 * m2;
        Self {
            weights: [w0, w1, w2],
        }
    }
}
