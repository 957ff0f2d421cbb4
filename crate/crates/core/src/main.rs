fn main() {
    std::process::exit(thermoporo::cli::run(std::env::args_os()));
}
