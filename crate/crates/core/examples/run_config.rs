// A JSON run configuration executed through the library front end.

use summand_lab::cli::{execute, summary, RunConfig};
use summand_lab::Result;

const CONFIG: &str = r#"{
  "array": {"generator": "standardized_iid", "base": {"family": "finite_discrete", "atoms": [[-1.0, 0.5], [1.0, 0.5]]}},
  "task": {"kind": "verdict-gaussian", "n_list": [100, 1000, 10000], "eps_list": [0.05, 0.1, 0.5]},
  "seed": 1
}"#;

pub fn run_example() -> Result<()> {
    let config = RunConfig::from_json(CONFIG)?;
    let exec = execute(&config)?;
    print!("{}", summary(&exec.report));
    for (path, bytes) in &exec.artifacts.files {
        println!("  would write {} ({} bytes)", path.display(), bytes.len());
    }
    let broken = CONFIG.replace(r#", "eps_list": [0.05, 0.1, 0.5]"#, "");
    println!(
        "without eps_list: {}",
        RunConfig::from_json(&broken).unwrap_err()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("run config example");
}
