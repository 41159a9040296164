// Products of Poisson-type factors approximating exp(Psi_K) under mesh refinement.

use summand_lab::{build_accum, poisson_type_approx, ComponentDist, Mesh, Result, RowSpec};

pub fn run_example() -> Result<()> {
    let row = RowSpec::new(
        4,
        vec![
            ComponentDist::rademacher().scaled_down(2.0),
            ComponentDist::rademacher().scaled_down(2.0),
            ComponentDist::uniform(-0.5, 0.5)?,
            ComponentDist::uniform(-0.5, 0.5)?,
        ],
    )?;
    let k = build_accum(&row, false);
    let u_grid: Vec<f64> = (0..=20).map(|i| -5.0 + 0.5 * i as f64).collect();
    let mut mesh = Mesh::uniform(1.0, 4);
    for _ in 0..4 {
        let approx = poisson_type_approx(&k, 1.0, &mesh)?;
        println!(
            "{:>3} cells, {:>3} factors: sup |exp(S) - exp(Psi)| = {:.3e}",
            mesh.points.len() - 1,
            approx.terms.len(),
            approx.sup_error(&k, &u_grid, 1e-10)?
        );
        mesh = mesh.refined();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("poisson approximation example");
}
