//! Render the default view with one of the schemes and save it as a PPM.
//!
//! ```bash
//! cargo run --release -p mandelbrot-rows --example render_image -- fcfs 4 out.ppm
//! ```

use std::fs::File;
use std::io::BufWriter;

use mandelbrot_rows::image::ColorMap;
use mandelbrot_rows::runtime::{run_scheme, ChannelTransport, OutputSink, RunOptions};
use mandelbrot_rows::{RenderConfig, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scheme: Scheme = args.next().as_deref().unwrap_or("alternating").parse()?;
    let tasks: usize = args.next().as_deref().unwrap_or("4").parse()?;
    let path = args.next().unwrap_or_else(|| "mandelbrot.ppm".into());

    let config = RenderConfig::new(800, 800)?.with_max_iterations(500)?;
    let mut writer = BufWriter::new(File::create(&path)?);
    let sink = OutputSink { writer: &mut writer, colormap: ColorMap::Classic };
    let result = run_scheme(scheme, &config, tasks, &ChannelTransport, Some(sink), &RunOptions::default())?;

    println!("{scheme} with {tasks} tasks wrote {path}");
    println!("compute {:.3} s, total {:.3} s", result.compute_time.as_secs_f64(), result.total_time.as_secs_f64());
    println!("messages sent: {}", result.messages_sent);
    Ok(())
}
