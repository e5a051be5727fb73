//! Quadrature over a pair of distinct elements `K × K'` against the kernel
//! `|x - y|^{-1-2s}`.
//!
//! A rule is a list of points `(t_x, t_y, w)` in the elements' local
//! coordinates with the kernel and Jacobian folded into `w`, so that
//! `Σ w f(t_x, t_y) ≈ ∬_{K×K'} f(x, y) |x - y|^{-1-2s} dx dy`.
//!
//! Touching pairs are split into two triangles at the shared corner and
//! mapped by `p = h1 ξ, q = h2 ξ η` (and the mirror). The kernel becomes
//! `ξ^{-1-2s} D(η)`, so the radial integral `∫ ξ^{-2s} P(ξ) dξ` is done
//! exactly by [`CornerRule`] for the quadratic integrands that products of
//! hat differences produce. The integrand must vanish at the corner when
//! `2s ≥ 1`.

use crate::quadrature::{gauss_legendre, CornerRule, CORNER_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPoint {
    pub tx: f64,
    pub ty: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Contact {
    /// `K` ends where `K'` starts.
    LeftOf,
    /// `K'` ends where `K` starts.
    RightOf,
    Separated,
}

fn contact(x: (f64, f64), y: (f64, f64)) -> Contact {
    if x.1 == y.0 {
        Contact::LeftOf
    } else if y.1 == x.0 {
        Contact::RightOf
    } else {
        Contact::Separated
    }
}

/// Quadrature points for `K = [x.0, x.1]`, `K' = [y.0, y.1]`, `K ≠ K'`.
pub fn pair_rule(x: (f64, f64), y: (f64, f64), order: f64, out: &mut Vec<PairPoint>) {
    out.clear();
    assert!(x != y, "identical elements need the closed-form path");
    match contact(x, y) {
        Contact::Separated => separated(x, y, (0.0, 1.0), (0.0, 1.0), order, out),
        c => touching(x, y, c, order, out),
    }
}

fn separated(
    x: (f64, f64),
    y: (f64, f64),
    sx: (f64, f64),
    sy: (f64, f64),
    order: f64,
    out: &mut Vec<PairPoint>,
) {
    // Sub-panels in local coordinates sx ⊂ [0,1], sy ⊂ [0,1].
    let hx = x.1 - x.0;
    let hy = y.1 - y.0;
    let (ax, bx) = (x.0 + sx.0 * hx, x.0 + sx.1 * hx);
    let (ay, by) = (y.0 + sy.0 * hy, y.0 + sy.1 * hy);
    let gap = if bx <= ay { ay - bx } else { ax - by };
    let lx = bx - ax;
    let ly = by - ay;
    if gap < lx.max(ly) {
        // Split the longer panel until each is no longer than the gap.
        if lx >= ly {
            let m = 0.5 * (sx.0 + sx.1);
            separated(x, y, (sx.0, m), sy, order, out);
            separated(x, y, (m, sx.1), sy, order, out);
        } else {
            let m = 0.5 * (sy.0 + sy.1);
            separated(x, y, sx, (sy.0, m), order, out);
            separated(x, y, sx, (m, sy.1), order, out);
        }
        return;
    }
    let g = gauss_legendre(16);
    let p = -1.0 - 2.0 * order;
    for (xq, wx) in g.mapped(ax, bx) {
        for (yq, wy) in g.mapped(ay, by) {
            out.push(PairPoint {
                tx: (xq - x.0) / hx,
                ty: (yq - y.0) / hy,
                w: wx * wy * (xq - yq).abs().powf(p),
            });
        }
    }
}

fn touching(x: (f64, f64), y: (f64, f64), c: Contact, order: f64, out: &mut Vec<PairPoint>) {
    let h1 = x.1 - x.0;
    let h2 = y.1 - y.0;
    let corner = CornerRule::new(order);
    let g = gauss_legendre(16);
    let p = -1.0 - 2.0 * order;
    // (p, q) are distances of x and y from the shared corner.
    let local = |pd: f64, qd: f64| -> (f64, f64) {
        match c {
            Contact::LeftOf => (1.0 - pd / h1, qd / h2),
            _ => (pd / h1, 1.0 - qd / h2),
        }
    };
    for (eta, weta) in g.mapped(0.0, 1.0) {
        let d1 = (h1 + h2 * eta).powf(p);
        let d2 = (h1 * eta + h2).powf(p);
        for (k, &xi) in CORNER_SAMPLES.iter().enumerate() {
            let cw = corner.weights[k];
            if cw == 0.0 {
                continue;
            }
            let (tx, ty) = local(h1 * xi, h2 * xi * eta);
            out.push(PairPoint {
                tx,
                ty,
                w: h1 * h2 * cw * weta * d1,
            });
            let (tx, ty) = local(h1 * xi * eta, h2 * xi);
            out.push(PairPoint {
                tx,
                ty,
                w: h1 * h2 * cw * weta * d2,
            });
        }
    }
}

/// `∬_{K×K} |x-y|^{1-2s} / h² dx dy`, the only integral the diagonal
/// block needs: on a single element every hat difference is `±(x-y)/h`.
pub fn self_pair_coefficient(h: f64, order: f64) -> f64 {
    let two_s = 2.0 * order;
    2.0 * h.powf(1.0 - two_s) / ((2.0 - two_s) * (3.0 - two_s))
}

/// Points and weights for `∫_K f(x) |x - e|^{-2s} dx` in local coordinates.
/// When `e` is an endpoint of `K`, `f` must be quadratic in `x` (and vanish
/// at `e` for `2s ≥ 1`).
pub fn endpoint_power_rule(k: (f64, f64), e: f64, order: f64, out: &mut Vec<(f64, f64)>) {
    out.clear();
    let h = k.1 - k.0;
    let two_s = 2.0 * order;
    if e == k.0 || e == k.1 {
        let corner = CornerRule::new(order);
        let scale = h.powf(1.0 - two_s);
        for (i, &t) in CORNER_SAMPLES.iter().enumerate() {
            if corner.weights[i] == 0.0 {
                continue;
            }
            let tx = if e == k.0 { t } else { 1.0 - t };
            out.push((tx, scale * corner.weights[i]));
        }
        return;
    }
    let g = gauss_legendre(16);
    let dist = if e < k.0 { k.0 - e } else { e - k.1 };
    let pieces = (h / dist).ceil().max(1.0) as usize;
    for piece in 0..pieces {
        let a = k.0 + h * piece as f64 / pieces as f64;
        let b = k.0 + h * (piece + 1) as f64 / pieces as f64;
        for (xq, w) in g.mapped(a, b) {
            out.push(((xq - k.0) / h, w * (xq - e).abs().powf(-two_s)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graded_reference(x: (f64, f64), y: (f64, f64), s: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        crate::assembly::reference::visit_pair(x, y, s, &mut |a, b, w| acc += w * f(a, b));
        acc
    }

    fn apply(rule: &[PairPoint], x: (f64, f64), y: (f64, f64), f: impl Fn(f64, f64) -> f64) -> f64 {
        rule.iter()
            .map(|p| p.w * f(x.0 + p.tx * (x.1 - x.0), y.0 + p.ty * (y.1 - y.0)))
            .sum()
    }

    #[test]
    fn touching_rule_matches_graded_reference() {
        for s in [0.25, 0.5, 0.8] {
            for (x, y) in [((0.0, 0.5), (0.5, 1.5)), ((1.0, 1.25), (0.25, 1.0))] {
                let c = if x.1 == y.0 { x.1 } else { x.0 };
                // Vanishes at the corner, quadratic.
                let f = |a: f64, b: f64| ((a - c) + 2.0 * (b - c)) * (0.3 * (a - c) - (b - c));
                let mut pts = Vec::new();
                pair_rule(x, y, s, &mut pts);
                let v = apply(&pts, x, y, f);
                let r = graded_reference(x, y, s, f);
                assert!(((v - r) / r).abs() < 1e-9, "s = {s}: {v} vs {r}");
            }
        }
    }

    #[test]
    fn separated_rule_matches_graded_reference() {
        let x = (0.0, 1.0);
        let y = (1.1, 1.3);
        let f = |a: f64, b: f64| (1.0 + a) * (2.0 - b);
        let mut pts = Vec::new();
        pair_rule(x, y, 0.6, &mut pts);
        let v = apply(&pts, x, y, f);
        let r = graded_reference(x, y, 0.6, f);
        assert!(((v - r) / r).abs() < 1e-10, "{v} vs {r}");
    }

    #[test]
    fn self_pair_closed_form() {
        let h = 0.3;
        let s = 0.35;
        // Hat differences on one element are ±(x-y)/h.
        let r = graded_reference((0.0, h), (0.0, h), s, |a, b| (a - b).powi(2)) / (h * h);
        assert!(((self_pair_coefficient(h, s) - r) / r).abs() < 1e-10);
    }

    #[test]
    fn endpoint_rule_exact_for_quadratics() {
        let s = 0.7;
        let k = (1.0, 1.5);
        let mut pts = Vec::new();
        endpoint_power_rule(k, 1.0, s, &mut pts);
        // ∫_1^{1.5} (x-1)^2 (x-1)^{-1.4} dx = 0.5^{1.6} / 1.6
        let v: f64 = pts.iter().map(|&(t, w)| w * (0.5 * t).powi(2)).sum();
        let e = 0.5f64.powf(1.6) / 1.6;
        assert!(((v - e) / e).abs() < 1e-13);
        endpoint_power_rule(k, 3.0, s, &mut pts);
        let v: f64 = pts.iter().map(|&(_, w)| w).sum();
        let e = (1.5f64.powf(-0.4) - 2f64.powf(-0.4)) / 0.4;
        assert!(((v - e) / e).abs() < 1e-12);
    }
}
