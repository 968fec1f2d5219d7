//! Run every scheme on the same view, confirm each matches the serial grid,
//! and show how the rows were spread across ranks.
//!
//! ```bash
//! cargo run --release -p mandelbrot-rows --example compare_schemes
//! ```

use mandelbrot_rows::{run, RenderConfig, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RenderConfig::new(400, 400)?.with_max_iterations(1000)?;
    let tasks = 4;
    let serial = run(Scheme::Serial, &config, 1)?;
    println!("serial       {:>8.3} s", serial.total_time.as_secs_f64());

    for scheme in Scheme::PARALLEL {
        let r = run(scheme, &config, tasks)?;
        assert_eq!(r.grid, serial.grid, "{scheme} disagrees with serial");
        let busy: Vec<String> = r.stats.busy_per_rank.iter().map(|d| format!("{:.3}", d.as_secs_f64())).collect();
        println!(
            "{scheme:<12} {:>8.3} s  messages {:>4}  rows/rank {:?}  busy/rank [{}]",
            r.total_time.as_secs_f64(),
            r.messages_sent,
            r.stats.rows_per_rank,
            busy.join(", ")
        );
    }
    Ok(())
}
