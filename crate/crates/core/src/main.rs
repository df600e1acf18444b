fn main() {
    std::process::exit(rkhs_cert::cli::run(std::env::args_os()));
}
