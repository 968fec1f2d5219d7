//! Mandelbrot rendering with master–worker row partitioning.
//!
//! The image is computed row by row by `N` tasks: a master (rank 0) that
//! assembles the final grid and `N − 1` workers. Three partition schemes
//! decide who computes which rows:
//!
//! * **Naive**: contiguous blocks of `⌊height/N⌋` rows, the last rank taking
//!   the leftover rows. One block message per worker.
//! * **FCFS**: the master hands out single rows to whichever worker reports
//!   back first and computes nothing itself. Two messages per row.
//! * **Alternating**: rank `r` takes rows `r, r+N, r+2N, …`; the master also
//!   computes any trailing remainder. One block message per worker.
//!
//! Every scheme produces a grid bit-identical to [`kernel::compute_grid_serial`].
//!
//! ```
//! use mandelbrot_rows::{kernel::RenderConfig, partition::Scheme, runtime};
//!
//! let config = RenderConfig::new(48, 32)?.with_max_iterations(100)?;
//! let serial = mandelbrot_rows::kernel::compute_grid_serial(&config)?.0;
//! let fcfs = runtime::run(Scheme::Fcfs, &config, 4)?;
//! assert_eq!(fcfs.grid, serial);
//! assert_eq!(fcfs.messages_sent, 2 * 32);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analysis;
pub mod cli;
pub mod image;
pub mod kernel;
pub mod partition;
pub mod runtime;

pub use kernel::{IterationGrid, RenderConfig};
pub use partition::Scheme;
pub use runtime::{run, run_scheme, RunResult};
