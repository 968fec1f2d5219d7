//! A small benchmark sweep: serial baseline, each scheme at a few task
//! counts, then a report as a table and as CSV.

use mandelbrot_rows::analysis::{build_report, parallel_fraction, AmdahlModel, RunMeasurement};
use mandelbrot_rows::{run, RenderConfig, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RenderConfig::new(300, 300)?.with_max_iterations(800)?;
    let reps = 3;

    let baseline: Vec<RunMeasurement> = (0..reps)
        .map(|_| run(Scheme::Serial, &config, 1).map(|r| RunMeasurement::from(&r)))
        .collect::<Result<_, _>>()?;
    let compute: f64 = baseline.iter().map(|b| b.compute_time.as_secs_f64()).sum();
    let total: f64 = baseline.iter().map(|b| b.total_time.as_secs_f64()).sum();
    let model = AmdahlModel::from_parallel_fraction(parallel_fraction(compute, total)?)?;

    let mut runs = Vec::new();
    for scheme in Scheme::PARALLEL {
        for tasks in [2, 4] {
            for _ in 0..reps {
                runs.push(RunMeasurement::from(&run(scheme, &config, tasks)?));
            }
        }
    }

    let report = build_report(&baseline, &runs, &[], &model)?;
    print!("{}", report.to_text_table());
    println!();
    print!("{}", report.to_csv()?);
    Ok(())
}
