//! Command-line front end: `render`, `bench` and `report`.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime or protocol error,
//! 3 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analysis::{
    build_report, parallel_fraction, read_csv, render_table, theoretical_table, AmdahlModel, AnalysisError,
    FailedGroup, RunMeasurement,
};
use crate::image::{ColorMap, ImageError};
use crate::kernel::{ConfigError, Iterations, RenderConfig};
use crate::partition::Scheme;
use crate::runtime::{run_scheme, ChannelTransport, OutputSink, RunError, RunOptions, RunResult, SocketTransport};

/// Overrides the directory default output files are written to.
pub const OUTPUT_DIR_ENV: &str = "MANDELBROT_ROWS_OUTPUT_DIR";

pub const DEFAULT_IMAGE_NAME: &str = "Mandelbrot.ppm";
pub const DEFAULT_CSV_NAME: &str = "bench.csv";

const FULL_SCALE: usize = 8000;

#[derive(Debug, Parser)]
#[command(name = "mandelbrot-rows", version, about = "Mandelbrot rendering with master-worker row partition schemes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one image with the chosen scheme and print its timings.
    Render(RenderArgs),
    /// Time every scheme over a sweep of task counts and write a report.
    Bench(BenchArgs),
    /// Print a saved benchmark CSV, or the theoretical speedup table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransportKind {
    /// In-process channels.
    Channel,
    /// Loopback TCP with length-prefixed frames.
    Socket,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    #[arg(long, default_value_t = 1000)]
    pub width: usize,
    #[arg(long, default_value_t = 1000)]
    pub height: usize,
    #[arg(long, default_value_t = RenderConfig::DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: Iterations,
    /// Compared against |z|².
    #[arg(long, default_value_t = RenderConfig::DEFAULT_ESCAPE_RADIUS)]
    pub escape_radius: f64,
    #[arg(long, default_value_t = RenderConfig::DEFAULT_RE.0, allow_hyphen_values = true)]
    pub re_min: f64,
    #[arg(long, default_value_t = RenderConfig::DEFAULT_RE.1, allow_hyphen_values = true)]
    pub re_max: f64,
    #[arg(long, default_value_t = RenderConfig::DEFAULT_IM.0, allow_hyphen_values = true)]
    pub im_min: f64,
    #[arg(long, default_value_t = RenderConfig::DEFAULT_IM.1, allow_hyphen_values = true)]
    pub im_max: f64,
    /// 8000×8000 pixels, overriding --width and --height.
    #[arg(long)]
    pub paper_scale: bool,
}

impl ImageArgs {
    pub fn config(&self) -> Result<RenderConfig, ConfigError> {
        let (width, height) = if self.paper_scale { (FULL_SCALE, FULL_SCALE) } else { (self.width, self.height) };
        let config = RenderConfig {
            width,
            height,
            max_iterations: self.max_iterations,
            escape_radius: self.escape_radius,
            re_min: self.re_min,
            re_max: self.re_max,
            im_min: self.im_min,
            im_max: self.im_max,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, default_value = "serial", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Total tasks, master included.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub tasks: u32,
    #[command(flatten)]
    pub image: ImageArgs,
    /// Defaults to Mandelbrot.ppm in the output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "grayscale", value_parser = parse_colormap)]
    pub colormap: ColorMap,
    #[arg(long, value_enum, default_value_t = TransportKind::Channel)]
    pub transport: TransportKind,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "naive,fcfs,alternating", value_parser = parse_scheme)]
    pub schemes: Vec<Scheme>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32", value_parser = clap::value_parser!(u32).range(1..))]
    pub tasks: Vec<u32>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,
    #[command(flatten)]
    pub image: ImageArgs,
    /// Fixed parallel fraction for the theoretical speedup. Measured from
    /// the serial baseline when absent.
    #[arg(long)]
    pub parallel_fraction: Option<f64>,
    /// Defaults to bench.csv in the output directory.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Image written by every run. Defaults to Mandelbrot.ppm in the output
    /// directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Skip image writing; total time then equals compute time.
    #[arg(long)]
    pub no_image: bool,
    #[arg(long, default_value = "grayscale", value_parser = parse_colormap)]
    pub colormap: ColorMap,
    #[arg(long, value_enum, default_value_t = TransportKind::Channel)]
    pub transport: TransportKind,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Benchmark CSV to print as a table.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Parallel fraction for the theoretical table. Defaults to the
    /// reference model (asymptotic speedup 356.22764).
    #[arg(long)]
    pub parallel_fraction: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32", value_parser = clap::value_parser!(u32).range(1..))]
    pub tasks: Vec<u32>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: crate::partition::PartitionError| e.to_string())
}

fn parse_colormap(s: &str) -> Result<ColorMap, String> {
    s.parse().map_err(|e: ImageError| e.to_string())
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("{0}")]
    Analysis(AnalysisError),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
    #[error("{0} benchmark group(s) failed")]
    GroupsFailed(usize),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Io(source) => CliError::Io { context: "report".into(), source },
            other => CliError::Analysis(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 3,
            CliError::Run(RunError::Image(ImageError::Io { .. })) => 3,
            CliError::Run(RunError::Config(_)) | CliError::Run(RunError::Partition(_)) => 1,
            CliError::Run(RunError::SerialTaskCount(_)) => 1,
            CliError::Analysis(AnalysisError::Csv(_)) => 3,
            CliError::Analysis(_) | CliError::Run(_) | CliError::GroupsFailed(_) => 2,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Directory for default output files: `$MANDELBROT_ROWS_OUTPUT_DIR` or the
/// working directory.
pub fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn run_with(
    transport: TransportKind,
    scheme: Scheme,
    config: &RenderConfig,
    tasks: usize,
    sink: Option<OutputSink<'_>>,
) -> Result<RunResult, RunError> {
    let options = RunOptions::default();
    match transport {
        TransportKind::Channel => run_scheme(scheme, config, tasks, &ChannelTransport, sink, &options),
        TransportKind::Socket => run_scheme(scheme, config, tasks, &SocketTransport::default(), sink, &options),
    }
}

/// One run writing its image to `path`.
fn run_to_file(
    transport: TransportKind,
    scheme: Scheme,
    config: &RenderConfig,
    tasks: usize,
    path: &Path,
    colormap: ColorMap,
) -> Result<RunResult, CliError> {
    let file = File::create(path).map_err(io_err(format!("opening {}", path.display())))?;
    let mut writer = BufWriter::new(file);
    let result = run_with(transport, scheme, config, tasks, Some(OutputSink { writer: &mut writer, colormap }))?;
    writer
        .into_inner()
        .map_err(|e| e.into_error())
        .and_then(|f| f.sync_all())
        .map_err(io_err(format!("closing {}", path.display())))?;
    Ok(result)
}

fn render(args: &RenderArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = args.image.config()?;
    let path = args.output.clone().unwrap_or_else(|| output_dir().join(DEFAULT_IMAGE_NAME));
    let w = |e| CliError::Io { context: "stdout".into(), source: e };
    writeln!(out, "File: {} successfully opened for writing.", path.display()).map_err(w)?;
    writeln!(out, "Computing Mandelbrot Set. Please wait...").map_err(w)?;
    let result = run_to_file(args.transport, args.scheme, &config, args.tasks as usize, &path, args.colormap)?;
    writeln!(out, "Mandelbrot computational process time: {:.6}", result.compute_time.as_secs_f64()).map_err(w)?;
    writeln!(out, "Completed Computing Mandelbrot Set.").map_err(w)?;
    writeln!(out, "File: {} successfully closed.", path.display()).map_err(w)?;
    writeln!(out, "Mandelbrot total process time: {:.6}", result.total_time.as_secs_f64()).map_err(w)?;
    writeln!(out, "Messages sent: {}", result.messages_sent).map_err(w)?;
    Ok(())
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = args.image.config()?;
    if args.schemes.is_empty() || args.tasks.is_empty() {
        return Err(CliError::Usage("--schemes and --tasks must be non-empty".into()));
    }
    let dir = output_dir();
    let image_path = args.output.clone().unwrap_or_else(|| dir.join(DEFAULT_IMAGE_NAME));
    let csv_path = args.csv.clone().unwrap_or_else(|| dir.join(DEFAULT_CSV_NAME));
    let reps = args.reps as usize;

    let once = |scheme: Scheme, tasks: usize| -> Result<RunResult, CliError> {
        if args.no_image {
            Ok(run_with(args.transport, scheme, &config, tasks, None)?)
        } else {
            run_to_file(args.transport, scheme, &config, tasks, &image_path, args.colormap)
        }
    };

    eprintln!("baseline: serial × {reps}");
    let baseline =
        (0..reps).map(|_| once(Scheme::Serial, 1).map(|r| RunMeasurement::from(&r))).collect::<Result<Vec<_>, _>>()?;

    let model = match args.parallel_fraction {
        Some(rp) => AmdahlModel::from_parallel_fraction(rp).map_err(|e| CliError::Usage(e.to_string()))?,
        None => {
            let compute: f64 = baseline.iter().map(|b| b.compute_time.as_secs_f64()).sum();
            let total: f64 = baseline.iter().map(|b| b.total_time.as_secs_f64()).sum();
            AmdahlModel::from_parallel_fraction(parallel_fraction(compute, total)?)?
        }
    };

    let mut runs = Vec::new();
    let mut failed = Vec::new();
    for &scheme in &args.schemes {
        for &tasks in &args.tasks {
            let tasks = tasks as usize;
            eprintln!("{scheme} × {tasks} tasks × {reps}");
            let mut group = Vec::with_capacity(reps);
            for _ in 0..reps {
                match once(scheme, tasks) {
                    Ok(r) => group.push(RunMeasurement::from(&r)),
                    Err(e) => {
                        eprintln!("  {scheme} × {tasks} failed: {e}");
                        failed.push(FailedGroup { scheme, num_tasks: tasks, reason: e.to_string() });
                        group.clear();
                        break;
                    }
                }
            }
            runs.extend(group);
        }
    }

    let report = build_report(&baseline, &runs, &failed, &model)?;
    let w = |e| CliError::Io { context: "stdout".into(), source: e };
    writeln!(
        out,
        "{}×{} pixels, {} iterations, escape radius {}, window re [{}, {}] im [{}, {}]",
        config.width,
        config.height,
        config.max_iterations,
        config.escape_radius,
        config.re_min,
        config.re_max,
        config.im_min,
        config.im_max
    )
    .map_err(w)?;
    writeln!(
        out,
        "serial baseline: compute {:.6} s, total {:.6} s; parallel fraction {:.7}",
        report.baseline_compute,
        report.baseline_total,
        model.parallel_fraction()
    )
    .map_err(w)?;
    write!(out, "{}", report.to_text_table()).map_err(w)?;
    std::fs::write(&csv_path, report.to_csv()?).map_err(io_err(format!("writing {}", csv_path.display())))?;
    writeln!(out, "report written to {}", csv_path.display()).map_err(w)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::GroupsFailed(failed.len()))
    }
}

fn report(args: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let w = |e| CliError::Io { context: "stdout".into(), source: e };
    if let Some(path) = &args.input {
        let file = File::open(path).map_err(io_err(format!("opening {}", path.display())))?;
        let rows = read_csv(file)?;
        write!(out, "{}", render_table(&rows)).map_err(w)?;
        return Ok(());
    }
    let model = match args.parallel_fraction {
        Some(rp) => AmdahlModel::from_parallel_fraction(rp).map_err(|e| CliError::Usage(e.to_string()))?,
        None => AmdahlModel::reference(),
    };
    let tasks: Vec<usize> = args.tasks.iter().map(|&t| t as usize).collect();
    writeln!(out, "parallel fraction {:.7}", model.parallel_fraction()).map_err(w)?;
    write!(out, "{}", theoretical_table(&model, &tasks)?).map_err(w)?;
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Render(args) => render(args, out),
        Command::Bench(args) => bench(args, out),
        Command::Report(args) => report(args, out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run with --help for usage");
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("mandelbrot-rows").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn bench_defaults_cover_reference_grid() {
        let cli = parse(&["bench"]);
        let Command::Bench(args) = cli.command else { panic!("expected bench") };
        assert_eq!(args.tasks, vec![2, 4, 8, 16, 32]);
        assert_eq!(args.reps, 5);
        assert_eq!(args.schemes, vec![Scheme::Naive, Scheme::Fcfs, Scheme::Alternating]);
        let config = args.image.config().unwrap();
        assert_eq!((config.width, config.height, config.max_iterations), (1000, 1000, 2000));
        assert_eq!(config.escape_radius, 400.0);
    }

    #[test]
    fn paper_scale_flag() {
        let Command::Bench(args) = parse(&["bench", "--paper-scale"]).command else { panic!() };
        let config = args.image.config().unwrap();
        assert_eq!((config.width, config.height), (8000, 8000));
    }

    #[test]
    fn negative_window_bounds_parse() {
        let Command::Render(args) = parse(&["render", "--re-min", "-1.5", "--im-min", "-1"]).command else { panic!() };
        assert_eq!(args.image.re_min, -1.5);
        assert_eq!(args.image.im_min, -1.0);
    }

    #[test]
    fn rejects_zero_tasks_and_bad_scheme() {
        let argv = ["mandelbrot-rows", "render", "--tasks", "0"];
        assert!(Cli::try_parse_from(argv).is_err());
        assert!(Cli::try_parse_from(["mandelbrot-rows", "render", "--scheme", "tiles"]).is_err());
        assert!(Cli::try_parse_from(["mandelbrot-rows", "bench", "--reps", "0"]).is_err());
    }

    #[test]
    fn invalid_window_is_usage_error() {
        let Command::Render(args) = parse(&["render", "--re-min", "2", "--re-max", "1"]).command else { panic!() };
        let err = CliError::from(args.image.config().unwrap_err());
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn theoretical_report_output() {
        let mut out = Vec::new();
        execute(&parse(&["report", "--tasks", "2,32"]), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("1.99440"), "{text}");
        assert!(text.contains("29.43820"), "{text}");
        assert!(text.contains("356.22764"), "{text}");
    }
}
