fn main() {
    std::process::exit(mandelbrot_rows::cli::main_with_args(std::env::args_os()));
}
