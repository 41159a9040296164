// The functional Psi_K on atomic, continuous and mixed measures.

use num_complex::Complex64;
use summand_lab::psi::psi_sweep;
use summand_lab::{
    build_accum, psi_curvature_check, psi_eval, ComponentDist, LimitMeasureSpec, Result, RowSpec,
};

pub fn run_example() -> Result<()> {
    let dirac = LimitMeasureSpec::DiracAtZero { mass: 1.0 }.to_measure();
    let poisson = LimitMeasureSpec::ScaledDiracAtOne { lambda: 2.0 }.to_measure();
    for u in [-3.0, 0.5, 4.0] {
        let g = psi_eval(&dirac, u, 1e-10)?.value;
        let p = psi_eval(&poisson, u, 1e-10)?.value;
        let closed = (Complex64::from_polar(1.0, u) - 1.0 - Complex64::new(0.0, u)) * 2.0;
        println!(
            "u = {u:>4}: Psi_gauss = {g:.6} (-u^2/2 = {:.6}), Psi_pois error = {:.1e}",
            -u * u / 2.0,
            (p - closed).norm()
        );
    }

    let row = RowSpec::new(
        3,
        vec![
            ComponentDist::rademacher().scaled_down(2.0),
            ComponentDist::uniform(-1.0, 1.0)?,
            ComponentDist::gaussian(0.0, 0.5)?,
        ],
    )?;
    let k = build_accum(&row, false);
    for e in psi_sweep(&k, &[0.5, 2.0, 8.0], 1e-8)? {
        println!(
            "mixed u = {:>3}: Psi = {:.6}, error bound {:.1e}, window {}",
            e.u, e.value, e.quadrature_error_bound, e.tail_truncation
        );
    }
    let (second, expected) = psi_curvature_check(&k, 1e-4)?;
    println!("Psi''(0) ~ {second:.8}, -s_n^2 = {expected}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("psi example");
}
