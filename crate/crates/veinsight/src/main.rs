fn main() {
    std::process::exit(veinsight::cli::dispatch(std::env::args_os()));
}
