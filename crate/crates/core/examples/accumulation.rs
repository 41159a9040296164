// Accumulation measures of array rows and their grid distance to a limit.

use summand_lab::{
    build_accum, eval_accum, preweak_distance, ArrayGenerator, ComponentDist, LimitMeasureSpec,
    Result,
};

pub fn run_example() -> Result<()> {
    let gen = ArrayGenerator::StandardizedIid {
        base: ComponentDist::rademacher(),
    };
    let k = build_accum(&gen.row(8)?, false);
    println!(
        "K_8 has {} atoms and total mass {}",
        k.atoms.len(),
        k.total_mass
    );
    for x in [-1.0, -0.2, 0.0, 0.2, 1.0] {
        println!("  K_8({x:>4}) = {:.4}", eval_accum(&k, x));
    }
    k.write_csv(Some(8), false, std::io::stdout())
        .map_err(|e| summand_lab::Error::Io {
            path: "stdout".into(),
            source: e,
        })?;

    // centered Bernoulli rows approach the jump of height 1 at x = 1
    let bern = ArrayGenerator::BernoulliPoisson { lambda: 1.0 };
    let seq = [10u64, 100, 1000]
        .iter()
        .map(|&n| Ok((n, build_accum(&bern.row(n)?, true))))
        .collect::<Result<Vec<_>>>()?;
    let limit = LimitMeasureSpec::ScaledDiracAtOne { lambda: 1.0 };
    for row in preweak_distance(&seq, &limit, &[0.5, 1.5], 1e-9)? {
        println!(
            "n = {:>5}: sup |K*_n - K*| = {:.3e}, mass gap = {:.3e}",
            row.n, row.sup_deviation, row.mass_gap
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("accumulation example");
}
