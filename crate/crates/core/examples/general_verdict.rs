// General verdict through weak convergence of centered accumulation functions.

use summand_lab::criteria::general_verdict;
use summand_lab::tolerances::Tolerances;
use summand_lab::{ArrayGenerator, ComponentDist, LimitMeasureSpec, Result};

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    let n_list = [100, 1000, 10000];

    let gauss = general_verdict(
        &ArrayGenerator::StandardizedIid {
            base: ComponentDist::rademacher(),
        },
        &n_list,
        &LimitMeasureSpec::DiracAtZero { mass: 1.0 },
        Some(0.0),
        &[-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
        1e-9,
        &tol,
    )?;
    println!("rademacher vs delta_0: pass = {}", gauss.pass);

    let pois = general_verdict(
        &ArrayGenerator::BernoulliPoisson { lambda: 1.0 },
        &n_list,
        &LimitMeasureSpec::ScaledDiracAtOne { lambda: 1.0 },
        Some(1.0),
        &[0.5, 1.5],
        1e-9,
        &tol,
    )?;
    println!("bernoulli-poisson vs delta_1: pass = {}", pois.pass);
    for p in &pois.preweak {
        println!(
            "  n = {:>5}: preweak {:.3e}, mass gap {:.3e}",
            p.n, p.sup_deviation, p.mass_gap
        );
    }

    // a grid point on the atom of the limit is rejected
    let err = general_verdict(
        &ArrayGenerator::BernoulliPoisson { lambda: 1.0 },
        &n_list,
        &LimitMeasureSpec::ScaledDiracAtOne { lambda: 1.0 },
        None,
        &[1.0],
        1e-9,
        &tol,
    )
    .unwrap_err();
    println!("grid on the jump: {err}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("general verdict example");
}
