fn main() {
    std::process::exit(coughscope::cli::run(std::env::args_os()));
}
