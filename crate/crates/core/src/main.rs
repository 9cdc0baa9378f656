fn main() {
    std::process::exit(zeno_lab::cli::run_from_args(std::env::args_os()));
}
