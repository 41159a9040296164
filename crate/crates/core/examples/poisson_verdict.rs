// Verdict for a translated Poisson limit, with the Gaussian array as a control.

use summand_lab::criteria::poisson_verdict;
use summand_lab::tolerances::Tolerances;
use summand_lab::{eval_cf, ArrayGenerator, ComponentDist, Result};

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    let n_list = [100, 1000, 10000];
    let v = poisson_verdict(
        &ArrayGenerator::BernoulliPoisson { lambda: 1.0 },
        &n_list,
        &[0.1, 0.5],
        (0.0, 1.0),
        &tol,
    )?;
    println!("bernoulli-poisson(1): pass = {}", v.pass);
    for t in &v.trends {
        println!("  {:<22} {:?}", t.name, t.values);
    }
    if let Some(limit) = &v.predicted_limit {
        println!("  predicted cf at u = 1: {:.6}", eval_cf(limit, 1.0));
    }

    let rademacher = ArrayGenerator::StandardizedIid {
        base: ComponentDist::rademacher(),
    };
    let v = poisson_verdict(&rademacher, &n_list, &[0.1], (-1.0, 1.0), &tol)?;
    let stuck = v.trend("g_n_pois(0.1)").map(|t| t.values.clone());
    println!("rademacher: pass = {}, g_n_pois(0.1) = {:?}", v.pass, stuck);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("poisson verdict example");
}
