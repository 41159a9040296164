// Lindeberg-type verdict for a standard Gaussian limit, and a normalization failure.

use summand_lab::criteria::gaussian_verdict;
use summand_lab::tolerances::Tolerances;
use summand_lab::{ArrayGenerator, ComponentDist, Result, RowSpec};

pub fn run_example() -> Result<()> {
    let tol = Tolerances::default();
    let gen = ArrayGenerator::StandardizedIid {
        base: ComponentDist::uniform(-1.0, 1.0)?,
    };
    let v = gaussian_verdict(&gen, &[100, 1000, 10000], &[0.05, 0.1, 0.5], &tol)?;
    println!("uniform array: pass = {}", v.pass);
    for t in &v.trends {
        println!("  {:<10} {:?}", t.name, t.values);
    }
    for c in v.comparison.iter().filter(|c| c.n == 10000) {
        println!(
            "  comparison u = {}: residual {:.3e} <= bound {:.3e}",
            c.u, c.residual, c.bound
        );
    }

    let doubled = ArrayGenerator::Explicit {
        rows: [10u64, 100, 1000]
            .iter()
            .map(|&n| {
                RowSpec::new(
                    n,
                    vec![ComponentDist::gaussian(0.0, 2.0 / n as f64)?; n as usize],
                )
            })
            .collect::<Result<_>>()?,
    };
    let v = gaussian_verdict(&doubled, &[10, 100, 1000], &[0.1], &tol)?;
    println!(
        "variance-2 array: pass = {}, reasons = {:?}",
        v.pass, v.reasons
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("gaussian verdict example");
}
