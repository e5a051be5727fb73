//! Pointwise fractional-kernel mathematics.
//!
//! The operators here act on continuous functions ([`PointField`]) rather
//! than on finite element fields. They are the reference against which the
//! assembled matrices are validated, so they share nothing with `assembly`
//! beyond the quadrature primitives.
//!
//! ```text
//! C_{N,s}       = s 2^{2s} Γ((N+2s)/2) / (π^{N/2} Γ(1-s))
//! (-Δ)^s_ε u(x) = C_{N,s} ∫_{|x-y|>ε} (u(x) - u(y)) / |x-y|^{N+2s} dy
//! (-Δ)^s u(x)   = lim_{ε→0} (-Δ)^s_ε u(x)
//! N_s u(x)      = C_{N,s} ∫_Ω (u(x) - u(y)) / |x-y|^{N+2s} dy,   x ∉ Ω̄
//! ```
//!
//! In one dimension the regularized integral is evaluated in the symmetric
//! form `∫_ε^∞ (2u(x) - u(x+t) - u(x-t)) t^{-1-2s} dt`, which is smooth in
//! `t` near the origin for C² inputs. Its error expansion is in powers
//! `ε^{2k-2s}`, `k = 1, 2, ...`, which is what the Richardson table removes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{
    gauss_legendre, integrate_adaptive, integrate_graded, GaussLegendre, Grading,
};
use crate::special::gamma;

/// Order `s`, dimension `N` and the normalization constant `C_{N,s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    dim: u32,
    order: f64,
    c_ns: f64,
}

impl FracParams {
    pub fn new(dim: u32, order: f64) -> Result<Self> {
        let c_ns = normalization_constant(dim, order)?;
        Ok(Self { dim, order, c_ns })
    }

    /// One-dimensional parameters, the only dimension the solver supports.
    pub fn one_d(order: f64) -> Result<Self> {
        Self::new(1, order)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn c_ns(&self) -> f64 {
        self.c_ns
    }
}

/// `C_{N,s}` from the gamma function.
pub fn normalization_constant(dim: u32, order: f64) -> Result<f64> {
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::param(
            "order",
            format!("must lie in (0, 1), got {order}"),
        ));
    }
    if dim < 1 {
        return Err(Error::param("dim", "must be at least 1"));
    }
    let n = dim as f64;
    let s = order;
    Ok(s * 2f64.powf(2.0 * s) * gamma(0.5 * (2.0 * s + n)) / (PI.powf(0.5 * n) * gamma(1.0 - s)))
}

/// Where a [`PointField`] may be nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// Identically zero outside `[lo, hi]`.
    Bounded { lo: f64, hi: f64 },
    /// No compact support. Contributions from `|x - y| > cutoff` are
    /// dropped; `tail_bound` bounds `|u(x) - u(y)|` there and turns into a
    /// reported bound on the dropped part.
    Unbounded { cutoff: f64, tail_bound: f64 },
}

/// A continuous function of one variable together with its support.
#[derive(Clone)]
pub struct PointField {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Support,
}

impl fmt::Debug for PointField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointField")
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl PointField {
    pub fn new(support: Support, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            support,
        }
    }

    pub fn bounded(lo: f64, hi: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(Support::Bounded { lo, hi }, eval)
    }

    /// A constant on all of ℝ. Differences vanish, so any cutoff is exact.
    pub fn constant(c: f64) -> Self {
        Self::new(
            Support::Unbounded {
                cutoff: 1.0,
                tail_bound: 0.0,
            },
            move |_| c,
        )
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Value at `x`; zero outside a bounded support.
    pub fn eval(&self, x: f64) -> f64 {
        match self.support {
            Support::Bounded { lo, hi } if x < lo || x > hi => 0.0,
            _ => (self.eval)(x),
        }
    }

    /// `a·self + b·other`. The support is the hull of both supports.
    pub fn combine(&self, a: f64, other: &PointField, b: f64) -> PointField {
        let support = match (self.support, other.support) {
            (Support::Bounded { lo: l1, hi: h1 }, Support::Bounded { lo: l2, hi: h2 }) => {
                Support::Bounded {
                    lo: l1.min(l2),
                    hi: h1.max(h2),
                }
            }
            (Support::Unbounded { cutoff, tail_bound }, Support::Bounded { .. })
            | (Support::Bounded { .. }, Support::Unbounded { cutoff, tail_bound }) => {
                Support::Unbounded {
                    cutoff,
                    tail_bound: tail_bound * a.abs().max(b.abs()),
                }
            }
            (
                Support::Unbounded {
                    cutoff: c1,
                    tail_bound: t1,
                },
                Support::Unbounded {
                    cutoff: c2,
                    tail_bound: t2,
                },
            ) => Support::Unbounded {
                cutoff: c1.max(c2),
                tail_bound: a.abs() * t1 + b.abs() * t2,
            },
        };
        let (u, v) = (self.clone(), other.clone());
        PointField::new(support, move |x| a * u.eval(x) + b * v.eval(x))
    }
}

/// Knobs for the pointwise quadratures.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Gauss points per panel.
    pub points: usize,
    /// Dyadic grading depth toward singular points.
    pub grading_depth: u32,
    /// Absolute tolerance for each adaptive integral.
    pub tol: f64,
    /// Largest accepted difference between the last two extrapolants,
    /// relative to max(1, |value|).
    pub extrapolation_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            points: 16,
            grading_depth: 12,
            tol: 1e-12,
            extrapolation_tol: 1e-4,
        }
    }
}

/// Result of a pointwise operator evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseEstimate {
    pub value: f64,
    /// Difference between the last two extrapolants (or the quadrature
    /// error estimate when no extrapolation is involved).
    pub increment: f64,
    /// Bound on contributions dropped beyond an unbounded support's cutoff.
    pub tail_bound: f64,
}

/// Geometry of the symmetric integral around `x`: where `x ± t` leaves the
/// support, and the distance beyond which everything is tail.
fn symmetric_layout(support: Support, x: f64) -> (Vec<f64>, f64) {
    match support {
        Support::Bounded { lo, hi } => {
            let d1 = (x - lo).abs();
            let d2 = (hi - x).abs();
            let mut breaks = vec![d1, d2];
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            (breaks, d1.max(d2))
        }
        Support::Unbounded { cutoff, .. } => (vec![cutoff], cutoff),
    }
}

fn second_difference(u: &PointField, x: f64) -> impl Fn(f64) -> f64 + '_ {
    let ux = u.eval(x);
    move |t: f64| 2.0 * ux - u.eval(x + t) - u.eval(x - t)
}

/// `(-Δ)^s_ε u(x)` for a single `ε`, with its quadrature error estimate.
pub fn frac_laplacian_regularized(
    u: &PointField,
    x: f64,
    eps: f64,
    params: &FracParams,
    opts: &QuadratureOptions,
) -> Result<PointwiseEstimate> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    let s = params.order();
    let (breaks, reach) = symmetric_layout(u.support(), x);
    let ux = u.eval(x);
    let diff = second_difference(u, x);
    let kernel = |t: f64| diff(t) * t.powf(-1.0 - 2.0 * s);

    let mut points = vec![eps];
    points.extend(breaks.iter().copied().filter(|&b| b > eps));
    let mut value = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        let est = integrate_adaptive(w[0], w[1], opts.tol, 60, kernel)?;
        value += est.value;
        error += est.error;
    }
    let far = reach.max(eps);
    let mut tail_bound = 0.0;
    match u.support() {
        Support::Bounded { .. } => value += 2.0 * ux * far.powf(-2.0 * s) / (2.0 * s),
        Support::Unbounded { tail_bound: b, .. } => {
            tail_bound = params.c_ns() * 2.0 * b * far.powf(-2.0 * s) / (2.0 * s);
        }
    }
    Ok(PointwiseEstimate {
        value: params.c_ns() * value,
        increment: params.c_ns() * error,
        tail_bound,
    })
}

/// `(-Δ)^s u(x)` by Richardson extrapolation of the regularized integrals
/// over `eps_levels` (strictly decreasing). The leading error term is taken
/// to be `O(ε^{2-2s})`, followed by `ε^{4-2s}`, `ε^{6-2s}`, ...
pub fn frac_laplacian_pointwise(
    u: &PointField,
    x: f64,
    eps_levels: &[f64],
    params: &FracParams,
    opts: &QuadratureOptions,
) -> Result<PointwiseEstimate> {
    if eps_levels.len() < 2 {
        return Err(Error::param("eps_levels", "need at least two levels"));
    }
    if eps_levels.windows(2).any(|w| !(w[1] < w[0])) || eps_levels.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::param(
            "eps_levels",
            "must be positive and strictly decreasing",
        ));
    }
    let s = params.order();
    let mut tail_bound = 0.0f64;
    let base: Vec<f64> = eps_levels
        .iter()
        .map(|&e| {
            frac_laplacian_regularized(u, x, e, params, opts).map(|est| {
                tail_bound = tail_bound.max(est.tail_bound);
                est.value
            })
        })
        .collect::<Result<_>>()?;

    let m = base.len();
    let mut table = vec![base];
    for j in 1..m {
        let p = 2.0 * j as f64 - 2.0 * s;
        let prev = &table[j - 1];
        let col: Vec<f64> = (j..m)
            .map(|i| {
                let r = (eps_levels[i - j] / eps_levels[i]).powf(p);
                let hi = prev[i - (j - 1)];
                let lo = prev[i - 1 - (j - 1)];
                hi + (hi - lo) / (r - 1.0)
            })
            .collect();
        table.push(col);
    }
    let value = *table[m - 1].last().unwrap();
    let previous = *table[m - 2].last().unwrap();
    let increment = (value - previous).abs();
    if increment > opts.extrapolation_tol * value.abs().max(1.0) {
        return Err(Error::NonConvergence {
            estimate: increment,
            tolerance: opts.extrapolation_tol,
            context: format!("Richardson extrapolation of (-Δ)^s at x = {x}"),
        });
    }
    Ok(PointwiseEstimate {
        value,
        increment,
        tail_bound,
    })
}

/// `(-Δ)^s u(x)` without regularization: the symmetric integral is taken
/// from `t = 0` with a composite Gauss rule graded dyadically toward the
/// origin and toward every point where `x ± t` crosses the support edge.
/// Independent of [`frac_laplacian_pointwise`]; used to cross-check it.
pub fn frac_laplacian_direct(
    u: &PointField,
    x: f64,
    params: &FracParams,
    opts: &QuadratureOptions,
) -> Result<PointwiseEstimate> {
    let s = params.order();
    let (breaks, reach) = symmetric_layout(u.support(), x);
    let rule = if opts.points == 16 {
        gauss_legendre(16).clone()
    } else {
        GaussLegendre::new(opts.points)
    };
    let ux = u.eval(x);
    let diff = second_difference(u, x);
    let kernel = |t: f64| diff(t) * t.powf(-1.0 - 2.0 * s);

    let mut points = vec![0.0];
    points.extend(breaks.iter().copied().filter(|&b| b > 0.0));
    let mut value = 0.0;
    for w in points.windows(2) {
        value += integrate_graded(&rule, w[0], w[1], Grading::Both, opts.grading_depth, kernel);
    }
    let mut tail_bound = 0.0;
    match u.support() {
        Support::Bounded { .. } => {
            if reach > 0.0 {
                value += 2.0 * ux * reach.powf(-2.0 * s) / (2.0 * s);
            }
        }
        Support::Unbounded { tail_bound: b, .. } => {
            tail_bound = params.c_ns() * 2.0 * b * reach.powf(-2.0 * s) / (2.0 * s);
        }
    }
    Ok(PointwiseEstimate {
        value: params.c_ns() * value,
        increment: f64::NAN,
        tail_bound,
    })
}

/// `N_s u(x_ext)` for `x_ext` outside `[omega.0, omega.1]`.
pub fn nonlocal_normal_derivative_pointwise(
    u: &PointField,
    x_ext: f64,
    omega: (f64, f64),
    params: &FracParams,
    opts: &QuadratureOptions,
) -> Result<PointwiseEstimate> {
    let (lo, hi) = omega;
    if !(lo < hi) {
        return Err(Error::param("omega", "empty interval"));
    }
    if x_ext >= lo && x_ext <= hi {
        return Err(Error::PointInsideDomain { x: x_ext, lo, hi });
    }
    let s = params.order();
    let ux = u.eval(x_ext);
    let est = integrate_adaptive(lo, hi, opts.tol, 60, |y| {
        (ux - u.eval(y)) * (x_ext - y).abs().powf(-1.0 - 2.0 * s)
    })?;
    Ok(PointwiseEstimate {
        value: params.c_ns() * est.value,
        increment: params.c_ns() * est.error,
        tail_bound: 0.0,
    })
}
