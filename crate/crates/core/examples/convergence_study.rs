// Convergence study on the reentrant corner, rendered as a text table, CSV
// and a log-log SVG plot in a temporary directory.

use dec_lab::fields::Problem;
use dec_lab::study::{emit, run_convergence_study, to_text_table, Format, StudyConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = StudyConfig::new("corner".parse()?).levels(6).deterministic(true);
    let problem: Problem = "corner:5/8".parse()?;
    let report = run_convergence_study(&config, &problem)?;
    print!("{}", to_text_table(&report));
    println!("fitted rates: max {:.3}, h1 {:.3}, l2 {:.3}",
        report.fitted_rate("max", 3).unwrap_or(f64::NAN),
        report.fitted_rate("h1", 3).unwrap_or(f64::NAN),
        report.fitted_rate("l2", 3).unwrap_or(f64::NAN));

    let dir = std::env::temp_dir().join("dec-lab-example");
    std::fs::create_dir_all(&dir)?;
    emit(&report, Format::Csv, &dir.join("corner.csv"))?;
    emit(&report, Format::Svg, &dir.join("corner.svg"))?;
    println!("wrote {}", dir.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
