fn main() {
    std::process::exit(msdyn::cli::run(std::env::args_os()));
}
