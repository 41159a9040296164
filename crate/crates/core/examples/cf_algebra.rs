// Characteristic-function algebra: roots, products, conjugates and the
// logarithm recovered from scaled roots.

use summand_lab::cf::root_limit_profile;
use summand_lab::{conjugate_and_norm, eval_cf, product, pth_root, CharFnSpec, Result};

pub fn run_example() -> Result<()> {
    let families = [
        CharFnSpec::gaussian(0.5, 2.0)?,
        CharFnSpec::translated_poisson(1.0, 3.0)?,
        CharFnSpec::gamma(2.5, 1.5)?,
        CharFnSpec::cauchy(0.0, 1.0)?,
        CharFnSpec::degenerate(-1.25)?,
    ];
    for spec in &families {
        let root = pth_root(spec, 3)?;
        let t = 1.7;
        let back = eval_cf(&root, t).powu(3);
        println!("{}", serde_json::to_string(&root)?);
        println!(
            "  |(psi^(1/3))^3 - psi| at t = {t}: {:.2e}",
            (back - eval_cf(spec, t)).norm()
        );
    }

    let sum = product(vec![families[0].clone(), families[2].clone()])?;
    let (conj, norm) = conjugate_and_norm(&sum);
    let t = 0.8;
    println!(
        "product at t = {t}: {:.6}, conjugate: {:.6}, |psi|^2: {:.6}",
        eval_cf(&sum, t),
        eval_cf(&conj, t),
        eval_cf(&norm, t).re
    );

    // roots shrink towards 1, and n (psi^{1/n} - 1) approaches Log psi
    let grid = [0.5, 1.0, 2.0];
    let profile = root_limit_profile(&families[1], &grid, 1000)?;
    for (i, &t) in grid.iter().enumerate() {
        let n = 1000;
        let scaled = (eval_cf(&pth_root(&families[1], n)?, t) - 1.0) * n as f64;
        println!(
            "t = {t}: |psi^(1/{n}) - 1| = {:.3e}, |n(psi^(1/n) - 1) - Log psi| = {:.3e}",
            profile.at(n, i),
            (scaled - families[1].exponent(t)).norm()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cf algebra example");
}
