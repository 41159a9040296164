// Monte Carlo check of S_n against its limit law, plus the exact TV distance
// for Bernoulli rows.

use summand_lab::montecarlo::SimulationRow;
use summand_lab::{
    simulate, tv_binomial_poisson, ArrayGenerator, ComponentDist, Result, SimLimit, SimulationPlan,
};

fn show(rows: &[SimulationRow]) {
    for r in rows {
        println!(
            "  n = {:>5}: ks = {:.4}, ecf = {:.4}, exact tv = {:?}",
            r.n,
            r.ks_distance.unwrap_or(f64::NAN),
            r.ecf_distance,
            r.exact_tv
        );
    }
}

pub fn run_example() -> Result<()> {
    let u_grid: Vec<f64> = (0..=10).map(|i| -5.0 + i as f64).collect();
    let plan = SimulationPlan {
        generator: ArrayGenerator::StandardizedIid {
            base: ComponentDist::uniform(-1.0, 1.0)?,
        },
        n_list: vec![1, 4, 32],
        samples_per_n: 4000,
        seed: 7,
        u_grid: u_grid.clone(),
        limit: SimLimit::StdGaussian,
    };
    let (report, _) = simulate(&plan, false)?;
    println!("standardized uniform sums against N(0, 1):");
    show(&report.rows);

    let plan = SimulationPlan {
        generator: ArrayGenerator::BernoulliPoisson { lambda: 1.0 },
        limit: SimLimit::TranslatedPoisson {
            b: 0.0,
            lambda: 1.0,
        },
        n_list: vec![10, 100],
        ..plan
    };
    let (report, _) = simulate(&plan, false)?;
    println!("bernoulli-poisson(1) against Poisson(1):");
    show(&report.rows);
    for n in [100u64, 1000, 10000] {
        println!(
            "  exact TV(Bin({n}, 1/{n}), Poi(1)) = {:.4e}",
            tv_binomial_poisson(n, 1.0 / n as f64, 1.0)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("simulation example");
}
