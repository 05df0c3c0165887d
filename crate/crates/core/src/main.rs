fn main() {
    std::process::exit(squeezeflux::cli::run(std::env::args_os()));
}
