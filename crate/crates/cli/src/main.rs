fn main() {
    std::process::exit(stokes_cli::run(std::env::args_os()));
}
