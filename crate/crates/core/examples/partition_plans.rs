//! Print which rows each rank owns under the static schemes, and the
//! message count every scheme needs.
//!
//! ```bash
//! cargo run -p mandelbrot-rows --example partition_plans -- 10 4
//! ```

use mandelbrot_rows::partition::{expected_message_count, PartitionPlan, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let height: usize = args.next().as_deref().unwrap_or("10").parse()?;
    let tasks: usize = args.next().as_deref().unwrap_or("4").parse()?;

    for scheme in [Scheme::Naive, Scheme::Alternating] {
        let plan = PartitionPlan::new(scheme, height, tasks)?;
        println!("{scheme}: {height} rows over {tasks} tasks");
        for rank in 0..tasks {
            println!("  rank {rank}: {:?}", plan.owned_rows(rank));
        }
        if let Some(rem) = plan.remainder() {
            println!("  remainder {rem:?} handled by the master");
        }
    }

    println!("fcfs: rows handed out on demand to ranks 1..{tasks}, master computes none");
    for scheme in Scheme::PARALLEL {
        println!("{scheme:>12} messages: {}", expected_message_count(scheme, height, tasks)?);
    }
    Ok(())
}
