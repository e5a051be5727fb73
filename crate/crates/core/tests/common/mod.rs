//! Stiffness entries by brute-force 2D quadrature.
//!
//! The oracle integrates `(C/2) (∬_{Ω×Ω} + 2 ∬_{Ω×Ωᶜ}) dφ_i dφ_j |x-y|^{-1-2s}`
//! element pair by element pair in the variables `(x, y - x)`, graded
//! toward the diagonal. Beyond the mesh window the hats vanish and the
//! `y` integral is elementary, leaving a 1D integral graded toward the ends.
//! Nothing here shares code with the assembly.

use fracdiff::kernel::FracParams;
use fracdiff::mesh::Mesh;
use fracdiff::quadrature::gauss_legendre;

fn hat(nodes: &[f64], i: usize, x: f64) -> f64 {
    let xi = nodes[i];
    if i > 0 && x >= nodes[i - 1] && x <= xi {
        return (x - nodes[i - 1]) / (xi - nodes[i - 1]);
    }
    if i + 1 < nodes.len() && x >= xi && x <= nodes[i + 1] {
        return (nodes[i + 1] - x) / (nodes[i + 1] - xi);
    }
    0.0
}

/// `∬_{Kx×Ky} g(x, y) dx dy` with `f(x, u) = g(x, x + u)`. For fixed
/// `u` the `x` range is an interval on which `f` is polynomial; the `u`
/// integral is split where that interval changes shape and graded toward
/// `u = 0`.
fn cell(kx: (f64, f64), ky: (f64, f64), f: &dyn Fn(f64, f64) -> f64) -> f64 {
    // Passing u itself lets the grading go far below the float spacing near x.
    let inner = gauss_legendre(8);
    let outer = gauss_legendre(16);
    let w = |u: f64| {
        let lo = kx.0.max(ky.0 - u);
        let hi = kx.1.min(ky.1 - u);
        if hi <= lo {
            0.0
        } else {
            inner.integrate(lo, hi, |x| f(x, u))
        }
    };
    let mut cuts = vec![ky.0 - kx.1, ky.0 - kx.0, ky.1 - kx.1, ky.1 - kx.0];
    if cuts[0] < 0.0 && cuts[3] > 0.0 {
        cuts.push(0.0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut acc = 0.0;
    for piece in cuts.windows(2) {
        let (p, q) = (piece[0], piece[1]);
        if p == 0.0 || q == 0.0 {
            let (end, far) = if p == 0.0 { (p, q) } else { (q, p) };
            let mut near = far;
            for _ in 0..300 {
                let mid = end + 0.5 * (near - end);
                acc += outer.integrate(mid.min(near), mid.max(near), &w);
                near = mid;
            }
        } else {
            for k in 0..4 {
                let a = p + (q - p) * k as f64 / 4.0;
                let b = p + (q - p) * (k + 1) as f64 / 4.0;
                acc += outer.integrate(a, b, &w);
            }
        }
    }
    acc
}

/// `∫_lo^hi f` graded dyadically toward both ends. `f` must be smooth inside.
fn graded_1d(lo: f64, hi: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let g = gauss_legendre(16);
    let mid = 0.5 * (lo + hi);
    let mut acc = 0.0;
    for (end, dir) in [(lo, 1.0), (hi, -1.0)] {
        let half = mid - lo;
        let mut outer = half;
        for _ in 0..40 {
            let inner = 0.5 * outer;
            let (a, b) = if dir > 0.0 {
                (end + inner, end + outer)
            } else {
                (end - outer, end - inner)
            };
            acc += g.integrate(a, b, f);
            outer = inner;
        }
    }
    acc
}

pub fn oracle(mesh: &Mesh, params: &FracParams, unknowns: &[usize]) -> Vec<Vec<f64>> {
    let s = params.order();
    let nodes = mesh.nodes().to_vec();
    let (a, b) = mesh.omega();
    let (lo, hi) = (nodes[0], *nodes.last().unwrap());
    let elems: Vec<(f64, f64)> = (0..mesh.n_elements())
        .map(|e| mesh.element_bounds(e))
        .collect();
    let inside = |e: &(f64, f64)| e.0 >= a && e.1 <= b;
    let n = unknowns.len();
    let mut out = vec![vec![0.0; n]; n];
    for r in 0..n {
        for c in r..n {
            let (i, j) = (unknowns[r], unknowns[c]);
            let mut total = 0.0;
            for kx in elems.iter().filter(|e| inside(e)) {
                for ky in &elems {
                    let same = kx == ky;
                    let slope = |k: usize| {
                        (hat(&nodes, k, kx.1 - 1e-300) - hat(&nodes, k, kx.0 + 1e-300))
                            / (kx.1 - kx.0)
                    };
                    let (si, sj) = (slope(i), slope(j));
                    let f = |x: f64, u: f64| {
                        let (di, dj) = if same {
                            (-si * u, -sj * u)
                        } else {
                            let y = x + u;
                            if x == y {
                                return 0.0;
                            }
                            (
                                hat(&nodes, i, x) - hat(&nodes, i, y),
                                hat(&nodes, j, x) - hat(&nodes, j, y),
                            )
                        };
                        di * dj * u.abs().powf(-1.0 - 2.0 * s)
                    };
                    let w = if inside(ky) { 1.0 } else { 2.0 };
                    total += w * cell(*kx, *ky, &f);
                }
            }
            // y beyond the window: only φ_i(x) φ_j(x) survives.
            let tail = |x: f64| {
                hat(&nodes, i, x)
                    * hat(&nodes, j, x)
                    * ((x - lo).powf(-2.0 * s) + (hi - x).powf(-2.0 * s))
                    / (2.0 * s)
            };
            for kx in elems.iter().filter(|e| inside(e)) {
                total += 2.0 * graded_1d(kx.0, kx.1, &tail);
            }
            out[r][c] = 0.5 * params.c_ns() * total;
            out[c][r] = out[r][c];
        }
    }
    out
}

/// Largest entrywise relative error of `m` against `o`, with its position.
pub fn worst_relative(m: &nalgebra::DMatrix<f64>, o: &[Vec<f64>]) -> (f64, (usize, usize)) {
    let mut worst = (0.0, (0, 0));
    for (r, row) in o.iter().enumerate() {
        for (c, &want) in row.iter().enumerate() {
            let rel = (m[(r, c)] - want).abs() / want.abs().max(1e-300);
            if rel > worst.0 || rel.is_nan() {
                worst = (rel, (r, c));
            }
        }
    }
    worst
}

/// `‖m - mᵀ‖_max / ‖m‖_max`.
pub fn asymmetry(m: &nalgebra::DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax() / m.amax()
}
