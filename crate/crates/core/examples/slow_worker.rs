//! Make one worker slow and watch FCFS route rows away from it while the
//! static schemes wait for it.

use std::time::Duration;

use mandelbrot_rows::runtime::{run_scheme, ChannelTransport, RunOptions};
use mandelbrot_rows::{RenderConfig, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RenderConfig::new(64, 96)?.with_max_iterations(200)?;
    let options = RunOptions::default().with_row_hook(|rank, _row| {
        if rank == 1 {
            std::thread::sleep(Duration::from_millis(4));
        }
        Ok(())
    });

    for scheme in Scheme::PARALLEL {
        let r = run_scheme(scheme, &config, 4, &ChannelTransport, None, &options)?;
        println!("{scheme:<12} {:>6.3} s  rows/rank {:?}", r.total_time.as_secs_f64(), r.stats.rows_per_rank);
    }

    let failing =
        RunOptions::default().with_row_hook(
            |rank, row| {
                if rank == 2 && row > 10 {
                    Err("simulated crash".into())
                } else {
                    Ok(())
                }
            },
        );
    match run_scheme(Scheme::Fcfs, &config, 4, &ChannelTransport, None, &failing) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("failure surfaced to the caller: {e}"),
    }
    Ok(())
}
