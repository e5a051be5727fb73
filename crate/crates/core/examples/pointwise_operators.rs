//! `(-Δ)^s` of the torsion-like profile `(1 - x²)_+^s`, which is constant
//! on `(-1, 1)`, by two independent quadratures, and `N_s` of a constant.

use fracdiff::kernel::{
    frac_laplacian_direct, frac_laplacian_pointwise, nonlocal_normal_derivative_pointwise,
    FracParams, PointField, QuadratureOptions,
};
use fracdiff::special::gamma;

fn main() -> fracdiff::error::Result<()> {
    let s = 0.5;
    let params = FracParams::one_d(s)?;
    let opts = QuadratureOptions::default();
    let u = PointField::bounded(-1.0, 1.0, move |y: f64| (1.0 - y * y).max(0.0).powf(s));
    // Known value: 2^{2s} Γ(1+s) Γ(1/2+s) / Γ(1/2).
    let exact = 4f64.powf(s) * gamma(1.0 + s) * gamma(0.5 + s) / gamma(0.5);
    println!("exact {exact:.10}");
    for x in [0.0, 0.3, -0.3] {
        let rich = frac_laplacian_pointwise(&u, x, &[0.1, 0.05, 0.025, 0.0125], &params, &opts)?;
        let direct = frac_laplacian_direct(&u, x, &params, &opts)?;
        println!(
            "x = {x:+.1}  extrapolated {:.10} (±{:.1e})  graded {:.10}",
            rich.value, rich.increment, direct.value
        );
    }
    let one = PointField::constant(1.0);
    for x in [-2.5, 1.2, 4.0] {
        let n = nonlocal_normal_derivative_pointwise(&one, x, (-1.0, 1.0), &params, &opts)?;
        println!("N_s 1 at {x:+} = {:.1e}", n.value);
    }
    Ok(())
}
