// Row statistics and the UAN / BVH / VCH hypotheses for two classic arrays.

use summand_lab::{hypothesis_check, row_statistics, ArrayGenerator, ComponentDist, Result};

pub fn run_example() -> Result<()> {
    let rademacher = ArrayGenerator::StandardizedIid {
        base: ComponentDist::rademacher(),
    };
    let bernoulli = ArrayGenerator::BernoulliPoisson { lambda: 2.0 };
    let n_list = [100, 1000, 10000];
    let eps_list = [0.05, 0.5];

    let st = row_statistics(&rademacher.row(100)?, 0.05);
    println!(
        "rademacher n = 100: U(0.05) = {}, MV = {}, B = {}",
        st.u, st.mv, st.b
    );

    for (name, gen, c) in [
        ("rademacher", &rademacher, 1.0),
        ("bernoulli-poisson(2)", &bernoulli, 2.0),
    ] {
        let h = hypothesis_check(gen, &n_list, &eps_list, Some(c), 1e-3)?;
        println!(
            "{name}: BVH {} (sup MV = {:.4}), Markov bound holds: {}",
            h.bvh,
            h.sup_mv(),
            h.markov_holds
        );
        for t in h.uan.iter().chain(h.vch.iter()) {
            println!(
                "  {:<14} {:?} -> {}",
                t.name,
                t.values,
                if t.pass { "tends to 0" } else { "does not" }
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("hypotheses example");
}
