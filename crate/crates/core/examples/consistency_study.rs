// Hodge star consistency on exact data, and the split of the Laplacian
// error into its two parts, on a randomly perturbed pentagon family.

use dec_lab::fields::Problem;
use dec_lab::study::{run_consistency_study, to_text_table, StudyConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = StudyConfig::new("pentagon".parse()?).levels(5).deterministic(true).jitter(0.4, 1);
    for k in 0..=2 {
        let report = run_consistency_study(&config, &Problem::trig2d(), k)?;
        print!("{}", to_text_table(&report));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
